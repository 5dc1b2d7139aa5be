//! p-torsion Brauer classes of a degree-2d K3 surface of Picard rank one:
//! parametrization, invariants, classification, closed-form counts and
//! brute-force verification.
//!
//! The transcendental lattice is modeled as ⟨t⟩ ⊕ Λ with t² = −2d and
//! Λ = U ⊕ U ⊕ E8(−1) ⊕ E8(−1) in a fixed basis. A class is a pair
//! (i, λ) with i mod p and λ ∈ Λ/pΛ, acting by
//! z·t + μ ↦ (i·z + λ·μ)/p; its B-field representative pairs to
//! B·h = −i/p and B² = λ²/p² = −2c/p² with c = −λ²/2.

use std::collections::BTreeMap;
use std::fmt;

use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::lattice::{disc_form, kernel_sublattice, rat_mod, FiniteQuadForm, GramLattice, Rat};
use crate::mat::{int, Int};
use crate::{Error, Result};

/// Fixed rank-20 even unimodular lattice U ⊕ U ⊕ E8(−1) ⊕ E8(−1).
pub fn ambient_lattice() -> GramLattice {
    let u = GramLattice::hyperbolic_plane();
    let e8 = GramLattice::e8_minus_one();
    GramLattice::direct_sum(&[&u, &u, &e8, &e8])
}

/// Rank-(m+1) transcendental model ⟨−2d⟩ ⊕ Λ_m, with Λ_m the leading m×m
/// block of the fixed ambient basis. The full model has m = 20.
pub fn transcendental_model(d: u64, m: usize) -> GramLattice {
    assert!(m <= 20 && m % 2 == 0, "toy rank must be even and at most 20");
    let amb = ambient_lattice();
    let block: Vec<Vec<Int>> =
        (0..m).map(|i| (0..m).map(|j| amb.gram()[i][j].clone()).collect()).collect();
    let t = GramLattice::rank1(-2 * d as i64);
    if m == 0 {
        return t;
    }
    GramLattice::direct_sum(&[&t, &GramLattice::new(block).expect("leading block is even")])
}

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut q = 2;
    while q * q <= p {
        if p % q == 0 {
            return false;
        }
        q += 1;
    }
    true
}

/// Legendre symbol (a | p) for an odd prime p.
pub fn legendre(a: &Int, p: u64) -> i32 {
    let pp = int(p as i64);
    let r = a.mod_floor(&pp);
    if r.is_zero() {
        return 0;
    }
    let e = (p - 1) / 2;
    let v = r.modpow(&int(e as i64), &pp);
    if v.is_one() {
        1
    } else {
        -1
    }
}

/// A p-torsion class in the coordinates (i, λ mod p) on ⟨t⟩ ⊕ Λ.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlphaParam {
    pub p: u64,
    pub d: u64,
    pub i_alpha: u64,
    pub lambda: Vec<u64>,
}

impl AlphaParam {
    pub fn new(p: u64, d: u64, i_alpha: u64, lambda: Vec<u64>) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if d == 0 {
            return Err(Error::InvalidInput("d must be positive".into()));
        }
        if lambda.len() != 20 {
            return Err(Error::InvalidInput(format!(
                "lambda must have 20 coordinates, got {}",
                lambda.len()
            )));
        }
        Ok(AlphaParam {
            p,
            d,
            i_alpha: i_alpha % p,
            lambda: lambda.into_iter().map(|v| v % p).collect(),
        })
    }

    pub fn is_zero(&self) -> bool {
        self.i_alpha == 0 && self.lambda.iter().all(|&v| v == 0)
    }
}

/// Lemma case labels: A = p∤d (three classes), B = p|d (three classes for
/// p = 2, four for p > 2).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LemmaCase {
    #[serde(rename = "A_i")]
    AI,
    #[serde(rename = "A_ii")]
    AII,
    #[serde(rename = "A_iii")]
    AIII,
    #[serde(rename = "B_i")]
    BI,
    #[serde(rename = "B_ii")]
    BII,
    #[serde(rename = "B_iii")]
    BIII,
    #[serde(rename = "B_iv")]
    BIV,
}

impl fmt::Display for LemmaCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            LemmaCase::AI => "A_i",
            LemmaCase::AII => "A_ii",
            LemmaCase::AIII => "A_iii",
            LemmaCase::BI => "B_i",
            LemmaCase::BII => "B_ii",
            LemmaCase::BIII => "B_iii",
            LemmaCase::BIV => "B_iv",
        };
        f.write_str(s)
    }
}

/// Theta bookkeeping for p = 2, d = 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ThetaTag {
    #[serde(rename = "order_two_point")]
    OrderTwoPoint,
    #[serde(rename = "even_theta")]
    EvenTheta,
    #[serde(rename = "odd_theta")]
    OddTheta,
}

/// Which quotient the B² invariant is well-defined in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum QuotientTag {
    /// mod ℤ (the p = 2 situation)
    #[serde(rename = "Z")]
    ModZ,
    /// mod (1/p)ℤ (p > 2)
    #[serde(rename = "Z/p")]
    ModZOverP,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassInvariants {
    /// B·h mod ℤ, canonical representative in [0, 1).
    pub bh: Rat,
    /// c = −λ²/2 mod p.
    pub c_alpha: u64,
    /// B² = −2c/p², stored unreduced; interpret in the tagged quotient.
    pub bsq: Rat,
    pub bsq_tag: QuotientTag,
    /// Invariant factors of the discriminant group of ker(α).
    pub disc_orders: Vec<Int>,
    /// Quadratic-residue verdict entering the p > 2 classification.
    pub qr_flag: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassLabel {
    pub lemma_case: LemmaCase,
    pub k3_type: bool,
    /// Present exactly for p = 2, d = 1.
    pub theta_tag: Option<ThetaTag>,
}

/// c_α = −λ²/2 mod p, with λ lifted to [0, p) in the rank-m ambient block.
fn c_alpha_model(p: u64, lambda: &[u64], m: usize) -> u64 {
    let amb = ambient_lattice();
    let lift: Vec<Int> = lambda.iter().take(m).map(|&v| int((v % p) as i64)).collect();
    let mut norm = Int::zero();
    for i in 0..lift.len() {
        for j in 0..lift.len() {
            norm += &lift[i] * &lift[j] * &amb.gram()[i][j];
        }
    }
    let half: Int = norm / 2;
    (-half).mod_floor(&int(p as i64)).to_u64().expect("residue fits")
}

fn theta_of(d: u64, i: u64, c_parity: u64) -> Option<ThetaTag> {
    if d != 1 {
        return None;
    }
    Some(if i == 0 {
        ThetaTag::OrderTwoPoint
    } else if c_parity % 2 == 0 {
        ThetaTag::EvenTheta
    } else {
        ThetaTag::OddTheta
    })
}

struct Outcome {
    case: LemmaCase,
    k3_type: bool,
    theta: Option<ThetaTag>,
    orders: Vec<Int>,
    qr: Option<bool>,
}

/// Invariant factors of ℤ/a ⊕ ℤ/b.
fn two_factor_orders(a: u64, b: u64) -> Vec<Int> {
    let g = a.gcd(&b);
    let l = a / g * b;
    let mut out = Vec::new();
    if g > 1 {
        out.push(int(g as i64));
    }
    out.push(int(l as i64));
    out
}

/// Closed classification for p = 2 via the B-field parity invariants
/// Bh = i/2 mod ℤ and B² = −c/2 mod ℤ.
fn classify_fast_p2(d: u64, i: u64, c: u64) -> Outcome {
    let d_odd = d % 2 == 1;
    let (case, k3) = if d_odd {
        match (i, c) {
            (0, _) => (LemmaCase::AI, false),
            (_, 0) => (LemmaCase::AII, true),
            _ => (LemmaCase::AIII, false),
        }
    } else {
        match (i, c) {
            (0, 0) => (LemmaCase::BI, false),
            (0, _) => (LemmaCase::BII, false),
            _ => (LemmaCase::BIII, true),
        }
    };
    let orders = match case {
        LemmaCase::AII | LemmaCase::AIII | LemmaCase::BIII => vec![int(8 * d as i64)],
        _ => vec![int(2), int(2), int(2 * d as i64)],
    };
    Outcome { case, k3_type: k3, theta: theta_of(d, i, c), orders, qr: None }
}

/// First-principles classification: build ker(α) inside the rank-(m+1)
/// model, take its discriminant form, and read the lemma invariants off the
/// lattice. Works for every prime p; for p = 2 it is the independent check
/// of the parity rules.
pub fn classify_via_kernel(p: u64, d: u64, i: u64, lambda: &[u64], m: usize) -> Result<ClassLabel> {
    let out = kernel_outcome(p, d, i, lambda, m)?;
    Ok(ClassLabel { lemma_case: out.case, k3_type: out.k3_type, theta_tag: out.theta })
}

fn kernel_quad_form(p: u64, d: u64, i: u64, lambda: &[u64], m: usize) -> Result<FiniteQuadForm> {
    let model = transcendental_model(d, m);
    let mut f = Vec::with_capacity(m + 1);
    f.push(i % p);
    f.extend(lambda.iter().take(m).map(|&v| v % p));
    if f.iter().all(|&v| v == 0) {
        return Err(Error::ZeroClass);
    }
    let kernel = kernel_sublattice(&model, &f, p)?;
    disc_form(&kernel)
}

fn kernel_outcome(p: u64, d: u64, i: u64, lambda: &[u64], m: usize) -> Result<Outcome> {
    let fq = kernel_quad_form(p, d, i, lambda, m)?;
    let orders = fq.cyclic_orders.clone();
    let c = c_alpha_model(p, lambda, m);
    if p == 2 {
        let case = if fq.is_cyclic() {
            if d % 2 == 1 {
                // −8d·q(v) mod 8 distinguishes the two cyclic classes; it is
                // generator-independent because odd units square to 1 mod 8.
                let x = cyclic_q_scaled(&fq, 8 * d);
                match x.mod_floor(&int(8)).to_u64() {
                    Some(1) => LemmaCase::AII,
                    Some(5) => LemmaCase::AIII,
                    other => panic!("unexpected cyclic invariant {other:?} mod 8"),
                }
            } else {
                LemmaCase::BIII
            }
        } else if d % 2 == 1 {
            LemmaCase::AI
        } else {
            // The two noncyclic classes for 2|d share the group but not the
            // form; compare against reference kernels with c even resp. odd.
            let probe = fq.value_multiset(100_000)?;
            let mut lam_even = vec![0u64; 20];
            lam_even[0] = 1; // first U coordinate: λ² = 0, c even
            let ref_even = kernel_quad_form(2, d, 0, &lam_even, m)?.value_multiset(100_000)?;
            if probe == ref_even {
                LemmaCase::BI
            } else {
                let mut lam_odd = vec![0u64; 20];
                lam_odd[0] = 1;
                lam_odd[1] = 1; // full U vector: λ² = 2, c odd
                let ref_odd = kernel_quad_form(2, d, 0, &lam_odd, m)?.value_multiset(100_000)?;
                assert_eq!(probe, ref_odd, "kernel matches neither reference form");
                LemmaCase::BII
            }
        };
        let k3 = matches!(case, LemmaCase::AII | LemmaCase::BIII);
        return Ok(Outcome { case, k3_type: k3, theta: theta_of(d, i, c), orders, qr: None });
    }
    // p > 2
    if d % p != 0 {
        if fq.is_cyclic() {
            // −2dp²·q(v) mod p is well-defined and a unit here.
            let x = cyclic_q_scaled(&fq, 2 * p * p * d);
            let sym = legendre(&x, p);
            assert_ne!(sym, 0, "cyclic case must give a unit residue");
            let case = if sym == 1 { LemmaCase::AI } else { LemmaCase::AII };
            Ok(Outcome { case, k3_type: sym == 1, theta: None, orders, qr: Some(sym == 1) })
        } else {
            Ok(Outcome { case: LemmaCase::AIII, k3_type: false, theta: None, orders, qr: None })
        }
    } else if i % p != 0 {
        assert!(fq.is_cyclic(), "Bh ≢ 0 must give a cyclic discriminant group");
        Ok(Outcome { case: LemmaCase::BIV, k3_type: true, theta: None, orders, qr: None })
    } else if c == 0 {
        assert_eq!(orders, vec![int(p as i64), int(p as i64), int(2 * d as i64)]);
        Ok(Outcome { case: LemmaCase::BIII, k3_type: false, theta: None, orders, qr: None })
    } else {
        assert_eq!(orders, two_factor_orders(2 * d, p * p));
        let sym = legendre(&int(c as i64), p);
        let case = if sym == 1 { LemmaCase::BI } else { LemmaCase::BII };
        Ok(Outcome { case, k3_type: false, theta: None, orders, qr: Some(sym == 1) })
    }
}

/// −n·q(v) for the generator of a cyclic discriminant group of order n: the
/// integer residue entering the quadratic-residue tests.
fn cyclic_q_scaled(fq: &FiniteQuadForm, n: u64) -> Int {
    assert_eq!(fq.cyclic_orders.len(), 1);
    assert_eq!(fq.cyclic_orders[0], int(n as i64));
    let v = -BigRational::from_integer(int(n as i64)) * &fq.q_matrix[0][0];
    assert!(v.denom().is_one(), "n·q(v) must be integral");
    v.numer().clone()
}

/// Invariants of a class: Bh, c, B² with its quotient tag, the discriminant
/// group shape and the residue verdict.
pub fn alpha_invariants(a: &AlphaParam) -> Result<ClassInvariants> {
    if a.is_zero() {
        return Err(Error::ZeroClass);
    }
    let p = a.p;
    let c = c_alpha_model(p, &a.lambda, 20);
    let bh = rat_mod(&Rat::new(int(-(a.i_alpha as i64)), int(p as i64)), 1);
    let bsq = Rat::new(int(-2 * c as i64), int((p * p) as i64));
    let bsq_tag = if p == 2 { QuotientTag::ModZ } else { QuotientTag::ModZOverP };
    let out = if p == 2 {
        classify_fast_p2(a.d, a.i_alpha, c)
    } else {
        kernel_outcome(p, a.d, a.i_alpha, &a.lambda, 20)?
    };
    Ok(ClassInvariants {
        bh,
        c_alpha: c,
        bsq,
        bsq_tag,
        disc_orders: out.orders,
        qr_flag: out.qr,
    })
}

/// Classification of a nonzero class per the rank-one lemmas: parity rules
/// for p = 2, kernel-lattice invariants for p > 2.
pub fn classify(a: &AlphaParam) -> Result<ClassLabel> {
    if a.is_zero() {
        return Err(Error::ZeroClass);
    }
    if a.p == 2 {
        let c = c_alpha_model(2, &a.lambda, 20);
        let out = classify_fast_p2(a.d, a.i_alpha, c);
        Ok(ClassLabel { lemma_case: out.case, k3_type: out.k3_type, theta_tag: out.theta })
    } else {
        classify_via_kernel(a.p, a.d, a.i_alpha, &a.lambda, 20)
    }
}

/// Closed-form sublattice counts per lemma case at ambient rank m (m = 20 is
/// the K3 case). Counting unit: index-p sublattices, i.e. order-p subgroups.
///
/// Valid whenever the leading m×m ambient block reduces to a split
/// nondegenerate form mod p: m ∈ {2, 4} (hyperbolic planes only) and m = 20
/// (the full even unimodular lattice). Intermediate ranks cut through an E8
/// block and are not covered by these formulas.
pub fn count_classes_at_rank(p: u64, d: u64, m: u32) -> Result<BTreeMap<LemmaCase, Int>> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if d == 0 {
        return Err(Error::InvalidInput("d must be positive".into()));
    }
    assert!(matches!(m, 2 | 4 | 20), "closed tables exist for m in {{2, 4, 20}}");
    let pp = int(p as i64);
    let ph = pp.pow(m / 2); // p^{m/2}
    let pm = pp.pow(m); // p^m
    let mut t = BTreeMap::new();
    if p == 2 {
        let half: Int = &ph / 2; // 2^{m/2 − 1}
        if d % 2 == 1 {
            t.insert(LemmaCase::AI, &pm - 1);
            t.insert(LemmaCase::AII, &half * (&ph + 1));
            t.insert(LemmaCase::AIII, &half * (&ph - 1));
        } else {
            t.insert(LemmaCase::BI, &half * (&ph + 1) - 1);
            t.insert(LemmaCase::BII, &half * (&ph - 1));
            t.insert(LemmaCase::BIII, pm.clone());
        }
    } else if d % p != 0 {
        t.insert(LemmaCase::AI, &ph * (&ph + 1) / 2);
        t.insert(LemmaCase::AII, &ph * (&ph - 1) / 2);
        t.insert(LemmaCase::AIII, (&pm - 1) / (&pp - 1));
    } else {
        let ph1: Int = &ph / &pp; // p^{m/2 − 1}
        t.insert(LemmaCase::BI, &ph1 * (&ph - 1) / 2);
        t.insert(LemmaCase::BII, t[&LemmaCase::BI].clone());
        t.insert(LemmaCase::BIII, (&ph1 + 1) * (&ph - 1) / (&pp - 1));
        t.insert(LemmaCase::BIV, pm.clone());
    }
    Ok(t)
}

/// Closed-form sublattice counts for the K3 case (rank-21 transcendental
/// model).
pub fn count_classes(p: u64, d: u64) -> Result<BTreeMap<LemmaCase, Int>> {
    count_classes_at_rank(p, d, 20)
}

/// Enumerates all order-p subgroups of the rank-(m+1) model, classifies
/// each, and returns the bucket counts. The independent oracle for the
/// closed-form tables.
pub fn brute_force_counts(
    p: u64,
    d: u64,
    m: u32,
    budget: u64,
) -> Result<BTreeMap<LemmaCase, Int>> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if d == 0 {
        return Err(Error::InvalidInput("d must be positive".into()));
    }
    let required = (p as u128).checked_pow(m + 1).unwrap_or(u128::MAX);
    if required > budget as u128 {
        return Err(Error::BudgetExceeded { required });
    }
    let mut buckets: BTreeMap<LemmaCase, u64> = BTreeMap::new();
    if p == 2 {
        // F₂ quadratic form λ²/2 mod 2 of the ambient block, as bit masks.
        let amb = ambient_lattice();
        let mut diag_mask: u32 = 0;
        let mut rows: Vec<u32> = vec![0; m as usize];
        for k in 0..m as usize {
            let half: Int = &amb.gram()[k][k] / 2;
            if half.is_odd() {
                diag_mask |= 1 << k;
            }
            for l in k + 1..m as usize {
                if amb.gram()[k][l].is_odd() {
                    rows[k] |= 1 << l;
                }
            }
        }
        let q_bar = |lam: u32| -> u64 {
            let mut v = (lam & diag_mask).count_ones() & 1;
            let mut rest = lam;
            while rest != 0 {
                let k = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                if (lam >> k) & 1 == 1 {
                    v ^= (lam & rows[k]).count_ones() & 1;
                }
            }
            v as u64
        };
        for i in 0..2u64 {
            for lam in 0..(1u32 << m) {
                if i == 0 && lam == 0 {
                    continue;
                }
                let c = q_bar(lam); // c ≡ λ²/2 mod 2
                let out = classify_fast_p2(d, i, c);
                *buckets.entry(out.case).or_insert(0) += 1;
            }
        }
        // p − 1 = 1: α-counts are subgroup counts already.
    } else {
        // One representative per subgroup: first nonzero coordinate = 1.
        let n = (m + 1) as usize;
        let mut coords = vec![0u64; n];
        'outer: loop {
            if let Some(first) = coords.iter().position(|&v| v != 0) {
                if coords[first] == 1 {
                    let (i, lambda) = (coords[0], &coords[1..]);
                    let out = kernel_outcome(p, d, i, lambda, m as usize)?;
                    *buckets.entry(out.case).or_insert(0) += 1;
                }
            }
            let mut k = 0;
            loop {
                if k == n {
                    break 'outer;
                }
                coords[k] += 1;
                if coords[k] < p {
                    break;
                }
                coords[k] = 0;
                k += 1;
            }
        }
    }
    Ok(buckets.into_iter().map(|(k, v)| (k, int(v as i64))).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FormType {
    #[serde(rename = "split")]
    Split,
    #[serde(rename = "nonsplit")]
    NonSplit,
}

/// Number of solutions of a nondegenerate 2m-variable quadratic form of the
/// given type over F_p taking the given value.
pub fn quadric_count(p: u64, m: u32, value: u64, form_type: FormType) -> Int {
    let pp = int(p as i64);
    let a = pp.pow(2 * m - 1); // p^{2m−1}
    let b = pp.pow(m); // p^m
    let c = pp.pow(m - 1); // p^{m−1}
    match (form_type, value % p == 0) {
        (FormType::Split, true) => a + b - c,
        (FormType::Split, false) => a - c,
        (FormType::NonSplit, true) => a - b + c,
        (FormType::NonSplit, false) => a + c,
    }
}

/// B-field invariants of the vanishing class (1/p)·k for a specialization
/// with Gram [[2d, b], [b, 2c]]: Bh = b/p mod ℤ and B² = 2c/p².
pub fn vanishing_invariants(p: u64, b: i64, c: i64) -> (Rat, Rat, QuotientTag) {
    let bh = rat_mod(&Rat::new(int(b), int(p as i64)), 1);
    let bsq = Rat::new(int(2 * c), int((p * p) as i64));
    let tag = if p == 2 { QuotientTag::ModZ } else { QuotientTag::ModZOverP };
    (bh, bsq, tag)
}
