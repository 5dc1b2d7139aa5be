//! Exact integer matrix algebra: products, determinants, Hermite and Smith
//! normal forms. Everything runs over `BigInt`; no floating point.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

pub type Int = BigInt;
pub type Mat = Vec<Vec<Int>>;

pub fn int(v: i64) -> Int {
    Int::from(v)
}

pub fn zeros(rows: usize, cols: usize) -> Mat {
    vec![vec![Int::zero(); cols]; rows]
}

pub fn identity(n: usize) -> Mat {
    let mut m = zeros(n, n);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = Int::one();
    }
    m
}

pub fn transpose(m: &[Vec<Int>]) -> Mat {
    let (r, c) = (m.len(), m[0].len());
    let mut t = zeros(c, r);
    for i in 0..r {
        for j in 0..c {
            t[j][i] = m[i][j].clone();
        }
    }
    t
}

pub fn mat_mul(a: &[Vec<Int>], b: &[Vec<Int>]) -> Mat {
    let (r, k, c) = (a.len(), b.len(), b[0].len());
    assert_eq!(a[0].len(), k, "dimension mismatch");
    let mut out = zeros(r, c);
    for i in 0..r {
        for t in 0..k {
            if a[i][t].is_zero() {
                continue;
            }
            for j in 0..c {
                let prod = &a[i][t] * &b[t][j];
                out[i][j] += prod;
            }
        }
    }
    out
}

/// v·M for a row vector v.
pub fn row_mul(v: &[Int], m: &[Vec<Int>]) -> Vec<Int> {
    let c = m[0].len();
    let mut out = vec![Int::zero(); c];
    for (t, vt) in v.iter().enumerate() {
        if vt.is_zero() {
            continue;
        }
        for j in 0..c {
            out[j] += vt * &m[t][j];
        }
    }
    out
}

pub fn dot(a: &[Int], b: &[Int]) -> Int {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// v·G·wᵀ, the bilinear value of two row vectors against a Gram matrix.
pub fn pair(v: &[Int], g: &[Vec<Int>], w: &[Int]) -> Int {
    dot(&row_mul(v, g), w)
}

pub fn is_symmetric(m: &[Vec<Int>]) -> bool {
    let n = m.len();
    m.iter().all(|r| r.len() == n) && (0..n).all(|i| (0..i).all(|j| m[i][j] == m[j][i]))
}

/// Fraction-free Bareiss determinant.
pub fn det(m: &[Vec<Int>]) -> Int {
    let n = m.len();
    if n == 0 {
        return Int::one();
    }
    assert_eq!(m[0].len(), n, "determinant needs a square matrix");
    let mut a: Mat = m.to_vec();
    let mut sign = Int::one();
    let mut prev = Int::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                Some(i) => {
                    a.swap(k, i);
                    sign = -sign;
                }
                None => return Int::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = &num / &prev;
            }
            a[i][k] = Int::zero();
        }
        prev = a[k][k].clone();
    }
    sign * a[n - 1][n - 1].clone()
}

/// Smith normal form data: `left · m · right = diag(diag)` with unimodular
/// transforms and a divisibility chain d1 | d2 | … of nonnegative entries.
#[derive(Debug, Clone)]
pub struct SmithDecomposition {
    pub diag: Vec<Int>,
    pub left: Mat,
    pub right: Mat,
}

impl SmithDecomposition {
    /// Invariant factors > 1, in divisibility order.
    pub fn nontrivial_factors(&self) -> Vec<Int> {
        self.diag.iter().filter(|d| d.abs() > Int::one()).cloned().collect()
    }
}

fn swap_rows(a: &mut Mat, l: &mut Mat, i: usize, j: usize) {
    a.swap(i, j);
    l.swap(i, j);
}

fn swap_cols(a: &mut Mat, r: &mut Mat, i: usize, j: usize) {
    for row in a.iter_mut() {
        row.swap(i, j);
    }
    for row in r.iter_mut() {
        row.swap(i, j);
    }
}

fn add_row(a: &mut Mat, l: &mut Mat, dst: usize, src: usize, c: &Int) {
    if c.is_zero() {
        return;
    }
    for j in 0..a[0].len() {
        let v = c * &a[src][j];
        a[dst][j] += v;
    }
    for j in 0..l[0].len() {
        let v = c * &l[src][j];
        l[dst][j] += v;
    }
}

fn add_col(a: &mut Mat, r: &mut Mat, dst: usize, src: usize, c: &Int) {
    if c.is_zero() {
        return;
    }
    for row in a.iter_mut() {
        let v = c * &row[src];
        row[dst] += v;
    }
    for row in r.iter_mut() {
        let v = c * &row[src];
        row[dst] += v;
    }
}

fn negate_row(a: &mut Mat, l: &mut Mat, i: usize) {
    for v in a[i].iter_mut() {
        *v = -std::mem::take(v);
    }
    for v in l[i].iter_mut() {
        *v = -std::mem::take(v);
    }
}

/// Rounded quotient, so remainders stay in [-|b|/2, |b|/2].
fn div_round(a: &Int, b: &Int) -> Int {
    let (q, r) = a.div_rem(b);
    let two_r: Int = &r * 2;
    if two_r.abs() > b.abs() {
        if (r.is_negative()) == (b.is_negative()) {
            q + 1
        } else {
            q - 1
        }
    } else {
        q
    }
}

/// Smith normal form of an arbitrary integer matrix.
pub fn smith_normal_form(m: &[Vec<Int>]) -> SmithDecomposition {
    let rows = m.len();
    let cols = if rows == 0 { 0 } else { m[0].len() };
    let mut a: Mat = m.to_vec();
    let mut left = identity(rows);
    let mut right = identity(cols);
    let steps = rows.min(cols);

    for t in 0..steps {
        'pivot: loop {
            // Smallest nonzero entry in the trailing block becomes the pivot.
            let mut best: Option<(usize, usize)> = None;
            for i in t..rows {
                for j in t..cols {
                    if !a[i][j].is_zero()
                        && best
                            .map(|(bi, bj)| a[i][j].abs() < a[bi][bj].abs())
                            .unwrap_or(true)
                    {
                        best = Some((i, j));
                    }
                }
            }
            let (pi, pj) = match best {
                Some(p) => p,
                None => break 'pivot,
            };
            if pi != t {
                swap_rows(&mut a, &mut left, t, pi);
            }
            if pj != t {
                swap_cols(&mut a, &mut right, t, pj);
            }

            let mut clean = true;
            for i in t + 1..rows {
                if !a[i][t].is_zero() {
                    let q = div_round(&a[i][t], &a[t][t]);
                    add_row(&mut a, &mut left, i, t, &(-q));
                    if !a[i][t].is_zero() {
                        clean = false;
                    }
                }
            }
            for j in t + 1..cols {
                if !a[t][j].is_zero() {
                    let q = div_round(&a[t][j], &a[t][t]);
                    add_col(&mut a, &mut right, j, t, &(-q));
                    if !a[t][j].is_zero() {
                        clean = false;
                    }
                }
            }
            if !clean {
                continue 'pivot;
            }
            // Pivot must divide the rest of the block.
            for i in t + 1..rows {
                for j in t + 1..cols {
                    if !(&a[i][j] % &a[t][t]).is_zero() {
                        add_row(&mut a, &mut left, t, i, &Int::one());
                        continue 'pivot;
                    }
                }
            }
            break 'pivot;
        }
    }

    for t in 0..steps {
        if a[t][t].is_negative() {
            negate_row(&mut a, &mut left, t);
        }
    }
    let diag = (0..steps).map(|t| a[t][t].clone()).collect();
    SmithDecomposition { diag, left, right }
}

/// Row-style Hermite normal form: echelon basis of the row span with
/// positive pivots and reduced entries above each pivot. Zero rows dropped.
pub fn hnf_rows(m: &[Vec<Int>]) -> Mat {
    let cols = if m.is_empty() { 0 } else { m[0].len() };
    let mut rows: Mat = m.to_vec();
    let mut pivots: Vec<(usize, usize)> = Vec::new(); // (row, col)
    let mut rank = 0usize;
    for col in 0..cols {
        loop {
            let mut best: Option<usize> = None;
            for i in rank..rows.len() {
                if !rows[i][col].is_zero()
                    && best.map(|b| rows[i][col].abs() < rows[b][col].abs()).unwrap_or(true)
                {
                    best = Some(i);
                }
            }
            let p = match best {
                Some(p) => p,
                None => break,
            };
            rows.swap(rank, p);
            let mut done = true;
            for i in rank + 1..rows.len() {
                if !rows[i][col].is_zero() {
                    let q = div_round(&rows[i][col], &rows[rank][col]);
                    for j in 0..cols {
                        let v = &q * &rows[rank][j];
                        rows[i][j] -= v;
                    }
                    if !rows[i][col].is_zero() {
                        done = false;
                    }
                }
            }
            if done {
                if rows[rank][col].is_negative() {
                    for v in rows[rank].iter_mut() {
                        *v = -std::mem::take(v);
                    }
                }
                pivots.push((rank, col));
                rank += 1;
                break;
            }
        }
    }
    rows.truncate(rank);
    // Reduce entries above each pivot.
    for &(pr, pc) in pivots.iter() {
        for i in 0..pr {
            if !rows[i][pc].is_zero() {
                let q = rows[i][pc].div_floor(&rows[pr][pc]);
                for j in 0..cols {
                    let v = &q * &rows[pr][j];
                    rows[i][j] -= v;
                }
            }
        }
    }
    rows
}

/// Basis (as rows) of the integer solutions of w·x = 0.
pub fn kernel_of_vector(w: &[Int]) -> Mat {
    let n = w.len();
    let snf = smith_normal_form(&[w.to_vec()]);
    // w · right = (±g, 0, …, 0), so columns 1.. of `right` span the kernel.
    let mut basis = Vec::with_capacity(n - 1);
    for j in 1..n {
        basis.push((0..n).map(|i| snf.right[i][j].clone()).collect());
    }
    basis
}

/// Expresses `target` as an integer combination of `basis` rows, if possible.
pub fn solve_in_row_span(basis: &[Vec<Int>], target: &[Int]) -> Option<Vec<Int>> {
    let snf = smith_normal_form(basis);
    let k = basis.len();
    // y·B = t  ⟺  z·D = t·V with z = y·U⁻¹, so y = z·U.
    let tv = row_mul(target, &snf.right);
    let mut z = vec![Int::zero(); k];
    for i in 0..k {
        let d = &snf.diag[i];
        if d.is_zero() {
            if !tv[i].is_zero() {
                return None;
            }
        } else {
            let (q, r) = tv[i].div_rem(d);
            if !r.is_zero() {
                return None;
            }
            z[i] = q;
        }
    }
    for v in tv.iter().skip(k) {
        if !v.is_zero() {
            return None;
        }
    }
    let y = row_mul(&z, &snf.left);
    // Exactness check.
    if row_mul(&y, basis) == target { Some(y) } else { None }
}

/// 2×2 inverse of a unimodular matrix.
pub fn inv2(u: &[Vec<Int>]) -> Mat {
    let d = &u[0][0] * &u[1][1] - &u[0][1] * &u[1][0];
    assert!(d.abs().is_one(), "matrix is not unimodular");
    let m = vec![
        vec![&u[1][1] / &d, -&u[0][1] / &d],
        vec![-&u[1][0] / &d, &u[0][0] / &d],
    ];
    m
}

pub fn det2(u: &[Vec<Int>]) -> Int {
    &u[0][0] * &u[1][1] - &u[0][1] * &u[1][0]
}
