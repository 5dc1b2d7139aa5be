//! Even integer lattices given by Gram matrices, their discriminant groups
//! and the induced finite quadratic forms.
//!
//! Conventions: vectors are integer (or rational) row vectors of coordinates
//! in the lattice basis; the pairing of v and w is v·G·wᵀ. The discriminant
//! group L*/L of a nondegenerate even lattice carries q(x) = x² mod 2ℤ and
//! the bilinear b(x, y) = x·y mod ℤ. Values of q and b are stored as exact
//! rationals and never pre-reduced, so callers may reinterpret them in
//! coarser quotients.

use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::mat::{self, int, Int, Mat};
use crate::{Error, Result};

pub use crate::mat::{smith_normal_form, SmithDecomposition};

pub type Rat = BigRational;

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(int(n), int(d))
}

/// Canonical representative of `r` in [0, m) for a positive integer modulus.
pub fn rat_mod(r: &Rat, m: u32) -> Rat {
    let m = Rat::from_integer(int(m as i64));
    let q = (r / &m).floor();
    r - q * m
}

/// A nondegenerate-by-default even lattice: symmetric integer Gram matrix
/// with even diagonal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GramLattice {
    gram: Mat,
}

impl GramLattice {
    pub fn new(gram: Mat) -> Result<Self> {
        if gram.is_empty() || !mat::is_symmetric(&gram) {
            return Err(Error::InvalidInput("Gram matrix must be square and symmetric".into()));
        }
        for (i, row) in gram.iter().enumerate() {
            if row[i].is_odd() {
                return Err(Error::InvalidInput(format!(
                    "odd diagonal entry {} at position {i}: lattice must be even",
                    row[i]
                )));
            }
        }
        Ok(GramLattice { gram })
    }

    pub fn from_i64(rows: &[&[i64]]) -> Result<Self> {
        Self::new(rows.iter().map(|r| r.iter().map(|&v| int(v)).collect()).collect())
    }

    pub fn rank(&self) -> usize {
        self.gram.len()
    }

    pub fn gram(&self) -> &Mat {
        &self.gram
    }

    pub fn det(&self) -> Int {
        mat::det(&self.gram)
    }

    /// v·G·wᵀ for integer row vectors.
    pub fn pair(&self, v: &[Int], w: &[Int]) -> Int {
        mat::pair(v, &self.gram, w)
    }

    pub fn norm(&self, v: &[Int]) -> Int {
        self.pair(v, v)
    }

    /// v·G·wᵀ for rational row vectors (dual-lattice computations).
    pub fn pair_rat(&self, v: &[Rat], w: &[Rat]) -> Rat {
        let mut acc = Rat::zero();
        for (i, vi) in v.iter().enumerate() {
            if vi.is_zero() {
                continue;
            }
            for (j, wj) in w.iter().enumerate() {
                if wj.is_zero() {
                    continue;
                }
                acc += vi * wj * Rat::from_integer(self.gram[i][j].clone());
            }
        }
        acc
    }

    pub fn norm_rat(&self, v: &[Rat]) -> Rat {
        self.pair_rat(v, v)
    }

    /// Base change to U·G·Uᵀ for a square integer matrix U (rows are the new
    /// basis vectors in the old coordinates).
    pub fn transform(&self, u: &Mat) -> GramLattice {
        let g = mat::mat_mul(&mat::mat_mul(u, &self.gram), &mat::transpose(u));
        GramLattice { gram: g }
    }

    /// The hyperbolic plane U.
    pub fn hyperbolic_plane() -> Self {
        Self::from_i64(&[&[0, 1], &[1, 0]]).unwrap()
    }

    /// Rank-1 lattice ⟨n⟩ with an even generator norm.
    pub fn rank1(n: i64) -> Self {
        Self::from_i64(&[&[n]]).unwrap()
    }

    /// E8 root lattice negated: the standard Cartan matrix with all signs
    /// flipped. Unimodular, even, negative definite.
    pub fn e8_minus_one() -> Self {
        let edges = [(0, 2), (1, 3), (2, 3), (3, 4), (4, 5), (5, 6), (6, 7)];
        let mut g = mat::zeros(8, 8);
        for i in 0..8 {
            g[i][i] = int(-2);
        }
        for &(i, j) in &edges {
            g[i][j] = int(1);
            g[j][i] = int(1);
        }
        GramLattice { gram: g }
    }

    /// Block-diagonal direct sum.
    pub fn direct_sum(parts: &[&GramLattice]) -> Self {
        let n: usize = parts.iter().map(|p| p.rank()).sum();
        let mut g = mat::zeros(n, n);
        let mut off = 0;
        for p in parts {
            let r = p.rank();
            for i in 0..r {
                for j in 0..r {
                    g[off + i][off + j] = p.gram[i][j].clone();
                }
            }
            off += r;
        }
        GramLattice { gram: g }
    }
}

/// A finite quadratic form: the discriminant group of an even lattice as a
/// product of cyclic groups in divisibility order, with exact values of q on
/// the generators (diagonal, read mod 2ℤ) and of the bilinear pairing
/// (off-diagonal, read mod ℤ).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteQuadForm {
    pub cyclic_orders: Vec<Int>,
    pub q_matrix: Vec<Vec<Rat>>,
    /// Generators as rational coordinate vectors in the basis of the source
    /// lattice.
    pub generators: Vec<Vec<Rat>>,
}

impl FiniteQuadForm {
    pub fn order(&self) -> Int {
        self.cyclic_orders.iter().product()
    }

    pub fn is_cyclic(&self) -> bool {
        self.cyclic_orders.len() <= 1
    }

    /// q on the element Σ aᵢ·genᵢ, as an exact rational (caller reduces
    /// mod 2ℤ).
    pub fn q_of(&self, coeffs: &[Int]) -> Rat {
        let k = self.cyclic_orders.len();
        assert_eq!(coeffs.len(), k);
        let mut acc = Rat::zero();
        for i in 0..k {
            let ai = Rat::from_integer(coeffs[i].clone());
            acc += &ai * &ai * &self.q_matrix[i][i];
            for j in i + 1..k {
                let aj = Rat::from_integer(coeffs[j].clone());
                acc += rat(2, 1) * &ai * aj * &self.q_matrix[i][j];
            }
        }
        acc
    }

    /// Additive order of Σ aᵢ·genᵢ.
    pub fn element_order(&self, coeffs: &[Int]) -> Int {
        let mut ord = Int::one();
        for (a, d) in coeffs.iter().zip(&self.cyclic_orders) {
            let g = a.gcd(d);
            ord = ord.lcm(&(d / g));
        }
        ord
    }

    /// Multiset of (element order, q mod 2ℤ) pairs over the whole group —
    /// a complete isomorphism invariant for cyclic groups and the
    /// basis-independence witness used by the tests. Group order must stay
    /// within `bound`.
    pub fn value_multiset(&self, bound: u64) -> Result<Vec<(Int, Rat)>> {
        let total = self.order();
        if total > int(bound as i64) {
            return Err(Error::EnumerationLimit);
        }
        let mut out = Vec::new();
        let mut coeffs = vec![Int::zero(); self.cyclic_orders.len()];
        loop {
            out.push((self.element_order(&coeffs), rat_mod(&self.q_of(&coeffs), 2)));
            // odometer over ∏ ℤ/dᵢ
            let mut i = 0;
            loop {
                if i == coeffs.len() {
                    out.sort();
                    return Ok(out);
                }
                coeffs[i] += 1;
                if coeffs[i] < self.cyclic_orders[i] {
                    break;
                }
                coeffs[i] = Int::zero();
                i += 1;
            }
        }
    }
}

/// Discriminant group L*/L with its induced quadratic form.
///
/// Generators come out of the Smith normal form of the Gram matrix: with
/// U·G·V = diag(d₁, …), the class of (column i of V)/dᵢ generates a cyclic
/// factor of order dᵢ.
pub fn disc_form(l: &GramLattice) -> Result<FiniteQuadForm> {
    let snf = smith_normal_form(l.gram());
    if snf.diag.iter().any(|d| d.is_zero()) {
        return Err(Error::SingularLattice);
    }
    let n = l.rank();
    let mut orders = Vec::new();
    let mut gens: Vec<Vec<Rat>> = Vec::new();
    for i in 0..n {
        if snf.diag[i] > Int::one() {
            orders.push(snf.diag[i].clone());
            let d = Rat::from_integer(snf.diag[i].clone());
            gens.push((0..n).map(|r| Rat::from_integer(snf.right[r][i].clone()) / &d).collect());
        }
    }
    let k = orders.len();
    let mut q = vec![vec![Rat::zero(); k]; k];
    for i in 0..k {
        for j in i..k {
            let v = l.pair_rat(&gens[i], &gens[j]);
            q[i][j] = v.clone();
            q[j][i] = v;
        }
    }
    Ok(FiniteQuadForm { cyclic_orders: orders, q_matrix: q, generators: gens })
}

/// Index-p sublattice ker(f) for a nonzero functional f: L → ℤ/p given by
/// integer coordinates mod p. The basis is canonicalized by row-style
/// Hermite reduction; |det| grows by p².
pub fn kernel_sublattice(l: &GramLattice, f: &[u64], p: u64) -> Result<GramLattice> {
    let n = l.rank();
    assert_eq!(f.len(), n, "functional length must match rank");
    let fp: Vec<u64> = f.iter().map(|v| v % p).collect();
    let j = match fp.iter().position(|&v| v != 0) {
        Some(j) => j,
        None => return Err(Error::TrivialFunctional),
    };
    let inv_fj = mod_inverse(fp[j], p).expect("pivot coordinate is a unit mod p");
    let mut gens: Mat = Vec::with_capacity(n);
    for i in 0..n {
        let mut row = vec![Int::zero(); n];
        if i == j {
            row[j] = int(p as i64);
        } else {
            row[i] = Int::one();
            let c = (fp[i] * inv_fj) % p;
            row[j] = -int(c as i64);
        }
        gens.push(row);
    }
    let basis = mat::hnf_rows(&gens);
    assert_eq!(basis.len(), n, "kernel basis must have full rank");
    Ok(l.transform(&basis))
}

/// An automorphism of a finite quadratic form: multiplication by a unit in
/// the cyclic case, a matrix in generator coordinates otherwise.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DiscAutomorphism {
    Unit(Int),
    Matrix(Mat),
}

/// All automorphisms of the group preserving q (values mod 2ℤ). Supports
/// trivial, cyclic and two-generator groups; enumeration is capped by
/// `bound`.
pub fn disc_orthogonal_group(f: &FiniteQuadForm, bound: u64) -> Result<Vec<DiscAutomorphism>> {
    if f.order() > int(bound as i64) {
        return Err(Error::EnumerationLimit);
    }
    match f.cyclic_orders.len() {
        0 => Ok(vec![DiscAutomorphism::Unit(Int::one())]),
        1 => {
            let n = f.cyclic_orders[0].clone();
            let q = &f.q_matrix[0][0];
            let mut out = Vec::new();
            let mut u = Int::one();
            while u < n {
                if u.gcd(&n).is_one() {
                    let delta = Rat::from_integer(&u * &u - 1) * q;
                    if is_multiple_of_two(&delta) {
                        out.push(DiscAutomorphism::Unit(u.clone()));
                    }
                }
                u += 1;
            }
            Ok(out)
        }
        2 => two_generator_orthogonal(f, bound),
        _ => Err(Error::UnsupportedDiscGroup),
    }
}

fn two_generator_orthogonal(f: &FiniteQuadForm, bound: u64) -> Result<Vec<DiscAutomorphism>> {
    let (d1, d2) = (f.cyclic_orders[0].clone(), f.cyclic_orders[1].clone());
    let q1 = rat_mod(&f.q_matrix[0][0], 2);
    let q2 = rat_mod(&f.q_matrix[1][1], 2);
    let b12 = rat_mod(&f.q_matrix[0][1], 1);
    let mut elements = Vec::new();
    let mut a = Int::zero();
    while a < d1 {
        let mut b = Int::zero();
        while b < d2 {
            elements.push(vec![a.clone(), b.clone()]);
            b += 1;
        }
        a += 1;
    }
    let cand1: Vec<&Vec<Int>> = elements
        .iter()
        .filter(|e| f.element_order(e) == d1 && rat_mod(&f.q_of(e), 2) == q1)
        .collect();
    let cand2: Vec<&Vec<Int>> = elements
        .iter()
        .filter(|e| f.element_order(e) == d2 && rat_mod(&f.q_of(e), 2) == q2)
        .collect();
    if (cand1.len() as u128) * (cand2.len() as u128) > bound as u128 {
        return Err(Error::EnumerationLimit);
    }
    let bilinear = |x: &[Int], y: &[Int]| -> Rat {
        let b11 = rat_mod(&f.q_matrix[0][0], 1);
        let b22 = rat_mod(&f.q_matrix[1][1], 1);
        let v = Rat::from_integer(&x[0] * &y[0]) * b11
            + Rat::from_integer(&x[0] * &y[1] + &x[1] * &y[0]) * &b12
            + Rat::from_integer(&x[1] * &y[1]) * b22;
        rat_mod(&v, 1)
    };
    let group_order = f.order();
    let mut out = Vec::new();
    for g1 in &cand1 {
        for g2 in &cand2 {
            if bilinear(g1, g2) != b12 {
                continue;
            }
            if subgroup_order_2gen(&d1, &d2, g1, g2) != group_order {
                continue;
            }
            // Images as matrix columns: gen_i ↦ column i in generator coords.
            out.push(DiscAutomorphism::Matrix(vec![
                vec![g1[0].clone(), g2[0].clone()],
                vec![g1[1].clone(), g2[1].clone()],
            ]));
        }
    }
    Ok(out)
}

/// Order of the subgroup of ℤ/d1 × ℤ/d2 generated by two elements.
fn subgroup_order_2gen(d1: &Int, d2: &Int, g1: &[Int], g2: &[Int]) -> Int {
    // Subgroup = image of ℤ² under (a,b) ↦ a·g1 + b·g2; its order is
    // d1·d2 / |cokernel|, computed via the SNF of the relation matrix.
    let rel = vec![
        vec![g1[0].clone(), g1[1].clone()],
        vec![g2[0].clone(), g2[1].clone()],
        vec![d1.clone(), Int::zero()],
        vec![Int::zero(), d2.clone()],
    ];
    let snf = smith_normal_form(&rel);
    let idx: Int = snf.diag.iter().product();
    d1 * d2 / idx
}

pub(crate) fn mod_inverse(a: u64, m: u64) -> Option<u64> {
    let (mut t, mut new_t) = (0i128, 1i128);
    let (mut r, mut new_r) = (m as i128, (a % m) as i128);
    while new_r != 0 {
        let q = r / new_r;
        (t, new_t) = (new_t, t - q * new_t);
        (r, new_r) = (new_r, r - q * new_r);
    }
    if r != 1 {
        return None;
    }
    Some(t.rem_euclid(m as i128) as u64)
}

pub(crate) fn is_multiple_of_two(r: &Rat) -> bool {
    r.denom().is_one() && r.numer().is_even()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Signed;

    fn gl(rows: &[&[i64]]) -> GramLattice {
        GramLattice::from_i64(rows).unwrap()
    }

    #[test]
    fn rank1_disc_is_forced() {
        for d in 1..6i64 {
            let f = disc_form(&GramLattice::rank1(2 * d)).unwrap();
            assert_eq!(f.cyclic_orders, vec![int(2 * d)]);
            assert_eq!(rat_mod(&f.q_matrix[0][0], 2), rat(1, 2 * d));
        }
    }

    #[test]
    fn m16_disc_group() {
        let l = gl(&[&[16, 1], &[1, -2]]);
        let f = disc_form(&l).unwrap();
        assert_eq!(f.cyclic_orders, vec![int(33)]);
        // The order-33 generator (2,1)/33: q = 2/33 mod 2ℤ, computed exactly.
        let delta = vec![rat(2, 33), rat(1, 33)];
        assert_eq!(rat_mod(&l.norm_rat(&delta), 2), rat(2, 33));
        // The generator returned by disc_form has full order and lies in L*.
        let g = &f.generators[0];
        for col in 0..2i64 {
            let e: Vec<Rat> = (0..2).map(|j| rat((j == col) as i64, 1)).collect();
            let dual_pairing = l.pair_rat(g, &e);
            assert!(dual_pairing.denom().is_one(), "generator must lie in the dual lattice");
        }
        assert_eq!(f.element_order(&[int(1)]), int(33));
    }

    #[test]
    fn x18_disc_group_has_prime_order() {
        let f = disc_form(&gl(&[&[2, 1], &[1, -18]])).unwrap();
        assert_eq!(f.cyclic_orders, vec![int(37)]);
    }

    #[test]
    fn degenerate_is_rejected() {
        let l = gl(&[&[2, 2], &[2, 2]]);
        assert!(matches!(disc_form(&l), Err(Error::SingularLattice)));
    }

    #[test]
    fn disc_order_equals_det() {
        for l in [
            gl(&[&[16, 1], &[1, -2]]),
            gl(&[&[2, 1], &[1, -18]]),
            GramLattice::direct_sum(&[&GramLattice::rank1(-4), &GramLattice::hyperbolic_plane()]),
            GramLattice::e8_minus_one(),
        ] {
            let f = disc_form(&l).unwrap();
            assert_eq!(f.order(), l.det().abs());
        }
    }

    #[test]
    fn e8_is_unimodular_and_even() {
        let e8 = GramLattice::e8_minus_one();
        assert_eq!(e8.det(), int(1));
        assert!(disc_form(&e8).unwrap().cyclic_orders.is_empty());
    }

    #[test]
    fn q_scales_quadratically_on_generators() {
        let f = disc_form(&gl(&[&[16, 1], &[1, -2]])).unwrap();
        for n in 0..6i64 {
            let lhs = rat_mod(&f.q_of(&[int(n)]), 2);
            let rhs = rat_mod(&(Rat::from_integer(int(n * n)) * &f.q_matrix[0][0]), 2);
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn kernel_rank1_scales() {
        for (d, p) in [(1i64, 2u64), (3, 3), (2, 5)] {
            let l = GramLattice::rank1(-2 * d);
            let k = kernel_sublattice(&l, &[1], p).unwrap();
            assert_eq!(k.gram()[0][0], int(-2 * d * (p * p) as i64));
        }
    }

    #[test]
    fn kernel_hyperbolic_mod_two() {
        let u = GramLattice::hyperbolic_plane();
        let k = kernel_sublattice(&u, &[1, 0], 2).unwrap();
        assert_eq!(k.gram(), &vec![vec![int(0), int(2)], vec![int(2), int(0)]]);
    }

    #[test]
    fn kernel_trivial_functional_rejected() {
        let u = GramLattice::hyperbolic_plane();
        assert!(matches!(kernel_sublattice(&u, &[2, 4], 2), Err(Error::TrivialFunctional)));
    }

    #[test]
    fn kernel_det_ratio() {
        // |det ker(f)| = p²·|det L| on a random-ish rank-5 lattice.
        let l = gl(&[
            &[2, 1, 0, -1, 3],
            &[1, -4, 2, 0, 1],
            &[0, 2, 6, 1, 0],
            &[-1, 0, 1, -2, 2],
            &[3, 1, 0, 2, 8],
        ]);
        let base = l.det().abs();
        for p in [2u64, 3, 5] {
            for f in [[1, 0, 0, 0, 0], [1, 2, 3, 4, 1], [0, 0, 1, 1, 1]] {
                let k = kernel_sublattice(&l, &f, p).unwrap();
                assert_eq!(k.det().abs(), &base * int((p * p) as i64));
            }
        }
    }

    #[test]
    fn orthogonal_group_prime_orders() {
        // ℤ/37 and ℤ/73: only ±1.
        for rows in [[[2i64, 1], [1, -18]], [[36, 1], [1, -2]]] {
            let l = gl(&[&rows[0], &rows[1]]);
            let f = disc_form(&l).unwrap();
            let n = f.cyclic_orders[0].clone();
            let auts = disc_orthogonal_group(&f, 1_000_000).unwrap();
            let units: Vec<Int> = auts
                .iter()
                .map(|a| match a {
                    DiscAutomorphism::Unit(u) => u.clone(),
                    _ => panic!("cyclic group expected"),
                })
                .collect();
            assert_eq!(units, vec![Int::one(), &n - 1]);
        }
    }

    #[test]
    fn orthogonal_group_order_33() {
        let f = disc_form(&gl(&[&[16, 1], &[1, -2]])).unwrap();
        let auts = disc_orthogonal_group(&f, 1_000_000).unwrap();
        let mut units: Vec<Int> = auts
            .iter()
            .map(|a| match a {
                DiscAutomorphism::Unit(u) => u.clone(),
                _ => panic!("cyclic group expected"),
            })
            .collect();
        units.sort();
        // ±1 and ±23: exactly the units with u² ≡ 1 mod 33.
        assert_eq!(units, vec![int(1), int(10), int(23), int(32)]);
    }

    #[test]
    fn orthogonal_group_two_generators() {
        // U/2U-shaped example: disc of ⟨-4⟩ ⊕ ⟨-4⟩ is ℤ/4 × ℤ/4.
        let l = GramLattice::direct_sum(&[&GramLattice::rank1(-4), &GramLattice::rank1(-4)]);
        let f = disc_form(&l).unwrap();
        assert_eq!(f.cyclic_orders, vec![int(4), int(4)]);
        let auts = disc_orthogonal_group(&f, 1_000_000).unwrap();
        // Swapping the two generators preserves q; so does negating either.
        assert!(auts.len() >= 4);
        for a in &auts {
            if let DiscAutomorphism::Matrix(m) = a {
                // columns are images; verify q is preserved on both.
                for c in 0..2 {
                    let img = vec![m[0][c].clone(), m[1][c].clone()];
                    assert_eq!(rat_mod(&f.q_of(&img), 2), rat_mod(&f.q_matrix[c][c], 2));
                }
            }
        }
    }

    #[test]
    fn enumeration_limit_enforced() {
        let f = disc_form(&GramLattice::rank1(2_000_000)).unwrap();
        assert!(matches!(disc_orthogonal_group(&f, 1_000_000), Err(Error::EnumerationLimit)));
    }
}
