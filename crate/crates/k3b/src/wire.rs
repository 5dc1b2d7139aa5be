//! JSON wire formats. All integers travel as decimal strings so arbitrary
//! precision survives the command line; discriminant-group orders are plain
//! JSON numbers.

use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::brauer::{ClassInvariants, ClassLabel, QuotientTag, ThetaTag};
use crate::kappa::ThetaVerdict;
use crate::lattice::{FiniteQuadForm, GramLattice, Rat};
use crate::mat::{Int, Mat};
use crate::pell::{PellResult, PellSign};
use crate::{Error, Result};

/// Gram matrices serialize as arrays of arrays of decimal strings.
pub fn gram_to_wire(l: &GramLattice) -> Vec<Vec<String>> {
    l.gram().iter().map(|row| row.iter().map(|v| v.to_string()).collect()).collect()
}

pub fn mat_to_wire(m: &Mat) -> Vec<Vec<String>> {
    m.iter().map(|row| row.iter().map(|v| v.to_string()).collect()).collect()
}

pub fn wire_to_gram(rows: &[Vec<String>]) -> Result<GramLattice> {
    let mut out = Vec::with_capacity(rows.len());
    for row in rows {
        let mut r = Vec::with_capacity(row.len());
        for s in row {
            let v: Int = s
                .parse()
                .map_err(|_| Error::InvalidInput(format!("not a decimal integer: {s:?}")))?;
            r.push(v);
        }
        out.push(r);
    }
    GramLattice::new(out)
}

pub fn parse_gram_json(text: &str) -> Result<GramLattice> {
    let rows: Vec<Vec<String>> = serde_json::from_str(text)
        .map_err(|e| Error::InvalidInput(format!("bad Gram JSON: {e}")))?;
    wire_to_gram(&rows)
}

fn rat_pair(r: &Rat) -> [String; 2] {
    [r.numer().to_string(), r.denom().to_string()]
}

/// {orders: [int], q: [[num, den], …]} with q the row-major entries of the
/// generator value matrix.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuadFormWire {
    pub orders: Vec<u64>,
    pub q: Vec<[String; 2]>,
}

pub fn quad_form_to_wire(f: &FiniteQuadForm) -> Result<QuadFormWire> {
    let orders = f
        .cyclic_orders
        .iter()
        .map(|d| d.to_u64().ok_or(Error::EnumerationLimit))
        .collect::<Result<Vec<_>>>()?;
    let mut q = Vec::new();
    for row in &f.q_matrix {
        for v in row {
            q.push(rat_pair(v));
        }
    }
    Ok(QuadFormWire { orders, q })
}

/// {solvable, r, s, sign}
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PellWire {
    pub solvable: bool,
    pub r: Option<String>,
    pub s: Option<String>,
    pub sign: Option<PellSign>,
}

pub fn pell_to_wire(p: &PellResult) -> PellWire {
    PellWire {
        solvable: p.solvable,
        r: p.witness.as_ref().map(|(r, _)| r.to_string()),
        s: p.witness.as_ref().map(|(_, s)| s.to_string()),
        sign: p.sign,
    }
}

/// One row of a count table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CountRow {
    pub case: String,
    pub count: String,
    pub k3_type: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassifyWire {
    pub case: String,
    pub k3_type: bool,
    pub theta: Option<ThetaTag>,
    pub bh: [String; 2],
    pub c_alpha: u64,
    pub bsq: [String; 2],
    pub bsq_modulus: QuotientTag,
    pub disc_orders: Vec<u64>,
    pub qr: Option<bool>,
}

pub fn classify_to_wire(label: &ClassLabel, inv: &ClassInvariants) -> Result<ClassifyWire> {
    Ok(ClassifyWire {
        case: label.lemma_case.to_string(),
        k3_type: label.k3_type,
        theta: label.theta_tag,
        bh: rat_pair(&inv.bh),
        c_alpha: inv.c_alpha,
        bsq: rat_pair(&inv.bsq),
        bsq_modulus: inv.bsq_tag,
        disc_orders: inv
            .disc_orders
            .iter()
            .map(|d| d.to_u64().ok_or(Error::EnumerationLimit))
            .collect::<Result<Vec<_>>>()?,
        qr: inv.qr_flag,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct IsomWire {
    pub isometric: bool,
    pub witness: Option<Vec<Vec<String>>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct KappaWire {
    pub pic_s: Vec<Vec<String>>,
    pub det_x: String,
    pub det_s: String,
    pub alpha_eq_vanishing: bool,
    pub theta: Option<ThetaVerdict>,
    pub fiber_degree: String,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gram_round_trip() {
        let l = GramLattice::from_i64(&[&[16, 1], &[1, -2]]).unwrap();
        let wire = gram_to_wire(&l);
        assert_eq!(wire, vec![vec!["16", "1"], vec!["1", "-2"]]);
        let back = wire_to_gram(&wire).unwrap();
        assert_eq!(back.gram(), l.gram());
    }

    #[test]
    fn quad_form_wire_shape() {
        let l = GramLattice::from_i64(&[&[16, 1], &[1, -2]]).unwrap();
        let f = crate::lattice::disc_form(&l).unwrap();
        let w = quad_form_to_wire(&f).unwrap();
        assert_eq!(w.orders, vec![33]);
        assert_eq!(w.q.len(), 1);
    }

    #[test]
    fn bad_gram_rejected() {
        assert!(parse_gram_json("[[\"1\",\"0\"],[\"0\",\"2\"]]").is_err()); // odd diagonal
        assert!(parse_gram_json("not json").is_err());
    }
}
