//! Exact integer linear algebra.
//!
//! Everything here is arbitrary precision and deterministic: Smith normal form
//! uses a minimal-absolute-value pivot with lowest-index tie-breaks, Hermite
//! normal form is the canonical representation of a row span, and rank is
//! computed by fraction-free Bareiss elimination. There is no floating-point
//! fallback anywhere in this module.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::fmt;

/// Dense integer matrix in row-major order. Dimensions are fixed at
/// construction; all operations return new matrices.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntMat {
    rows: usize,
    cols: usize,
    entries: Vec<BigInt>,
}

impl IntMat {
    /// Builds a matrix from row-major entries.
    ///
    /// Panics if `rows * cols != entries.len()` or either dimension is zero;
    /// shape bugs are programmer errors, not runtime conditions.
    pub fn new(rows: usize, cols: usize, entries: Vec<BigInt>) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        assert_eq!(rows * cols, entries.len(), "entry count must match shape");
        IntMat { rows, cols, entries }
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        let r = rows.len();
        assert!(r > 0);
        let c = rows[0].len();
        let mut entries = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            entries.extend(row.iter().map(|&x| BigInt::from(x)));
        }
        IntMat::new(r, c, entries)
    }

    pub fn from_rows(rows: Vec<Vec<BigInt>>) -> Self {
        let r = rows.len();
        assert!(r > 0);
        let c = rows[0].len();
        let mut entries = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            entries.extend(row);
        }
        IntMat::new(r, c, entries)
    }

    pub fn zero(rows: usize, cols: usize) -> Self {
        IntMat::new(rows, cols, vec![BigInt::zero(); rows * cols])
    }

    pub fn identity(n: usize) -> Self {
        let mut m = IntMat::zero(n, n);
        for i in 0..n {
            *m.at_mut(i, i) = BigInt::one();
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn at(&self, i: usize, j: usize) -> &BigInt {
        &self.entries[i * self.cols + j]
    }

    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut BigInt {
        &mut self.entries[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_vec(&self, i: usize) -> Vec<BigInt> {
        self.row(i).to_vec()
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn transpose(&self) -> IntMat {
        let mut t = IntMat::zero(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                *t.at_mut(j, i) = self.at(i, j).clone();
            }
        }
        t
    }

    pub fn add(&self, other: &IntMat) -> IntMat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a + b)
            .collect();
        IntMat::new(self.rows, self.cols, entries)
    }

    pub fn sub(&self, other: &IntMat) -> IntMat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a - b)
            .collect();
        IntMat::new(self.rows, self.cols, entries)
    }

    pub fn neg(&self) -> IntMat {
        IntMat::new(self.rows, self.cols, self.entries.iter().map(|a| -a).collect())
    }

    pub fn scale(&self, k: &BigInt) -> IntMat {
        IntMat::new(self.rows, self.cols, self.entries.iter().map(|a| a * k).collect())
    }

    pub fn mul(&self, other: &IntMat) -> IntMat {
        assert_eq!(self.cols, other.rows, "inner dimensions must agree");
        let mut out = IntMat::zero(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.at(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.at(k, j);
                    if !b.is_zero() {
                        *out.at_mut(i, j) += a * b;
                    }
                }
            }
        }
        out
    }

    /// Matrix-vector product.
    pub fn mul_vec(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                let mut acc = BigInt::zero();
                for j in 0..self.cols {
                    acc += self.at(i, j) * &v[j];
                }
                acc
            })
            .collect()
    }

    /// Nonnegative integer power of a square matrix.
    pub fn pow(&self, mut e: u64) -> IntMat {
        assert!(self.is_square());
        let mut base = self.clone();
        let mut acc = IntMat::identity(self.rows);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Zero::is_zero)
    }

    pub fn trace(&self) -> BigInt {
        assert!(self.is_square());
        (0..self.rows).map(|i| self.at(i, i).clone()).sum()
    }

    /// Determinant by fraction-free Bareiss elimination.
    pub fn det(&self) -> BigInt {
        assert!(self.is_square());
        let n = self.rows;
        let mut m = self.entries.clone();
        let idx = |i: usize, j: usize| i * n + j;
        let mut sign = 1i32;
        let mut prev = BigInt::one();
        for k in 0..n {
            if m[idx(k, k)].is_zero() {
                match (k + 1..n).find(|&i| !m[idx(i, k)].is_zero()) {
                    Some(i) => {
                        for j in 0..n {
                            m.swap(idx(k, j), idx(i, j));
                        }
                        sign = -sign;
                    }
                    None => return BigInt::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let num = &m[idx(i, j)] * &m[idx(k, k)] - &m[idx(i, k)] * &m[idx(k, j)];
                    let (q, r) = num.div_rem(&prev);
                    debug_assert!(r.is_zero(), "Bareiss division must be exact");
                    m[idx(i, j)] = q;
                }
                m[idx(i, k)] = BigInt::zero();
            }
            prev = m[idx(k, k)].clone();
        }
        let d = m[idx(n - 1, n - 1)].clone();
        if sign < 0 {
            -d
        } else {
            d
        }
    }

    /// Exact inverse of a matrix with determinant ±1. Errors on anything else.
    pub fn inverse_unimodular(&self) -> Result<IntMat, LinalgError> {
        assert!(self.is_square());
        let d = self.det();
        if !(d.abs().is_one()) {
            return Err(LinalgError::NotUnimodular { det: d });
        }
        let n = self.rows;
        // Rational Gauss-Jordan on [A | I]; entries of the result are integers
        // because det = ±1.
        let mut aug: Vec<Vec<BigRational>> = (0..n)
            .map(|i| {
                (0..2 * n)
                    .map(|j| {
                        if j < n {
                            BigRational::from_integer(self.at(i, j).clone())
                        } else if j - n == i {
                            BigRational::one()
                        } else {
                            BigRational::zero()
                        }
                    })
                    .collect()
            })
            .collect();
        for col in 0..n {
            let pivot = (col..n)
                .find(|&i| !aug[i][col].is_zero())
                .expect("unimodular matrix has full rank");
            aug.swap(col, pivot);
            let p = aug[col][col].clone();
            for j in col..2 * n {
                aug[col][j] = &aug[col][j] / &p;
            }
            for i in 0..n {
                if i != col && !aug[i][col].is_zero() {
                    let f = aug[i][col].clone();
                    for j in col..2 * n {
                        let sub = &f * &aug[col][j];
                        aug[i][j] = &aug[i][j] - &sub;
                    }
                }
            }
        }
        let mut entries = Vec::with_capacity(n * n);
        for row in &aug {
            for v in &row[n..] {
                debug_assert!(v.is_integer());
                entries.push(v.to_integer());
            }
        }
        Ok(IntMat::new(n, n, entries))
    }

    /// Coefficients `c_0..c_n` of the characteristic polynomial
    /// `det(tI - A) = c_0 + c_1 t + ... + c_n t^n` (so `c_n = 1`), by the
    /// Faddeev-LeVerrier recurrence. All divisions are exact over Z.
    pub fn charpoly(&self) -> Vec<BigInt> {
        assert!(self.is_square());
        let n = self.rows;
        let mut coeffs = vec![BigInt::zero(); n + 1];
        coeffs[n] = BigInt::one();
        let mut m = IntMat::identity(n);
        for k in 1..=n {
            let am = self.mul(&m);
            let tr = am.trace();
            let (c, r) = (-tr).div_rem(&BigInt::from(k));
            debug_assert!(r.is_zero(), "Faddeev-LeVerrier division must be exact");
            coeffs[n - k] = c.clone();
            m = am;
            for i in 0..n {
                *m.at_mut(i, i) += &c;
            }
        }
        coeffs
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.entries.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.entries.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// row[i] -= q * row[k]
    fn row_sub(&mut self, i: usize, k: usize, q: &BigInt) {
        if q.is_zero() {
            return;
        }
        for j in 0..self.cols {
            let sub = q * self.at(k, j);
            *self.at_mut(i, j) -= sub;
        }
    }

    /// col[j] -= q * col[k]
    fn col_sub(&mut self, j: usize, k: usize, q: &BigInt) {
        if q.is_zero() {
            return;
        }
        for i in 0..self.rows {
            let sub = q * self.at(i, k);
            *self.at_mut(i, j) -= sub;
        }
    }

    fn negate_row(&mut self, i: usize) {
        for j in 0..self.cols {
            let v = -self.at(i, j).clone();
            *self.at_mut(i, j) = v;
        }
    }
}

impl fmt::Debug for IntMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "IntMat {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(|x| x.to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl fmt::Display for IntMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(|x| x.to_string()).collect();
            writeln!(f, "[{}]", row.join(" "))?;
        }
        Ok(())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum LinalgError {
    #[error("matrix is not unimodular (det = {det})")]
    NotUnimodular { det: BigInt },
}

/// Smith normal form `U * A * V = diag(d)` with unimodular transforms and
/// `d[i]` dividing `d[i+1]`.
#[derive(Clone, Debug)]
pub struct SnfDecomposition {
    pub d: Vec<BigInt>,
    pub u: IntMat,
    pub v: IntMat,
}

impl SnfDecomposition {
    /// The diagonal as a matrix of the original shape, for verification.
    pub fn diagonal_matrix(&self, rows: usize, cols: usize) -> IntMat {
        let mut m = IntMat::zero(rows, cols);
        for (i, di) in self.d.iter().enumerate() {
            *m.at_mut(i, i) = di.clone();
        }
        m
    }
}

/// Smith normal form with a minimal-absolute-value pivot and lowest-index
/// tie-breaks, so decompositions are reproducible across runs.
pub fn snf(a: &IntMat) -> SnfDecomposition {
    let rows = a.rows();
    let cols = a.cols();
    let mut s = a.clone();
    let mut u = IntMat::identity(rows);
    let mut v = IntMat::identity(cols);
    let steps = rows.min(cols);

    for t in 0..steps {
        'pivot: loop {
            // Minimal |nonzero| pivot in the trailing block, row-major scan so
            // ties resolve to the lowest (row, col).
            let mut best: Option<(usize, usize)> = None;
            for i in t..rows {
                for j in t..cols {
                    if s.at(i, j).is_zero() {
                        continue;
                    }
                    let better = match best {
                        None => true,
                        Some((bi, bj)) => s.at(i, j).abs() < s.at(bi, bj).abs(),
                    };
                    if better {
                        best = Some((i, j));
                    }
                }
            }
            let (pi, pj) = match best {
                Some(p) => p,
                None => break 'pivot, // trailing block is zero
            };
            s.swap_rows(t, pi);
            u.swap_rows(t, pi);
            s.swap_cols(t, pj);
            v.swap_cols(t, pj);

            let mut clean = true;
            for i in t + 1..rows {
                if !s.at(i, t).is_zero() {
                    let q = s.at(i, t).div_floor(s.at(t, t));
                    s.row_sub(i, t, &q);
                    u.row_sub(i, t, &q);
                    if !s.at(i, t).is_zero() {
                        clean = false;
                    }
                }
            }
            for j in t + 1..cols {
                if !s.at(t, j).is_zero() {
                    let q = s.at(t, j).div_floor(s.at(t, t));
                    s.col_sub(j, t, &q);
                    v.col_sub(j, t, &q);
                    if !s.at(t, j).is_zero() {
                        clean = false;
                    }
                }
            }
            if !clean {
                continue 'pivot; // smaller remainders exist; re-select pivot
            }
            // Row and column are clear; enforce that the pivot divides the
            // trailing block, otherwise fold the offending row in and redo.
            let p = s.at(t, t).clone();
            let mut offender = None;
            'scan: for i in t + 1..rows {
                for j in t + 1..cols {
                    if !s.at(i, j).mod_floor(&p).is_zero() {
                        offender = Some(i);
                        break 'scan;
                    }
                }
            }
            match offender {
                Some(i) => {
                    let minus_one = BigInt::from(-1);
                    s.row_sub(t, i, &minus_one); // row_t += row_i
                    u.row_sub(t, i, &minus_one);
                }
                None => break 'pivot,
            }
        }
    }

    let mut d = Vec::with_capacity(steps);
    for t in 0..steps {
        if s.at(t, t).is_negative() {
            s.negate_row(t);
            u.negate_row(t);
        }
        d.push(s.at(t, t).clone());
    }
    SnfDecomposition { d, u, v }
}

/// Row Hermite normal form: pivots positive and strictly right-moving, entries
/// above each pivot reduced into `[0, pivot)`, zero rows dropped. Two matrices
/// have the same row span over Z iff their HNFs are equal.
pub fn hnf(a: &IntMat) -> IntMat {
    let rows = a.rows();
    let cols = a.cols();
    let mut m = a.clone();
    let mut pivot_row = 0usize;
    for col in 0..cols {
        if pivot_row == rows {
            break;
        }
        if (pivot_row..rows).all(|i| m.at(i, col).is_zero()) {
            continue;
        }
        loop {
            let best = (pivot_row..rows)
                .filter(|&i| !m.at(i, col).is_zero())
                .min_by_key(|&i| m.at(i, col).abs())
                .expect("nonzero entry exists");
            m.swap_rows(pivot_row, best);
            let mut done = true;
            for i in pivot_row + 1..rows {
                if !m.at(i, col).is_zero() {
                    let q = m.at(i, col).div_floor(m.at(pivot_row, col));
                    m.row_sub(i, pivot_row, &q);
                    if !m.at(i, col).is_zero() {
                        done = false;
                    }
                }
            }
            if done {
                break;
            }
        }
        if m.at(pivot_row, col).is_negative() {
            m.negate_row(pivot_row);
        }
        let pivot = m.at(pivot_row, col).clone();
        for i in 0..pivot_row {
            let q = m.at(i, col).div_floor(&pivot);
            m.row_sub(i, pivot_row, &q);
        }
        pivot_row += 1;
    }
    if pivot_row == 0 {
        // Zero matrix: canonical form is a single zero row.
        return IntMat::zero(1, cols);
    }
    let mut out = IntMat::zero(pivot_row, cols);
    for i in 0..pivot_row {
        for j in 0..cols {
            *out.at_mut(i, j) = m.at(i, j).clone();
        }
    }
    out
}

/// A sublattice of `Z^ambient_rank`, stored canonically as the row HNF of its
/// generators. Equality of lattices is equality of these bases.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lattice {
    ambient_rank: usize,
    basis: IntMat,
    rank: usize,
}

/// Finite or infinite lattice index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Index {
    Finite(BigUint),
    Infinite,
}

impl fmt::Display for Index {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Index::Finite(q) => write!(f, "{}", q),
            Index::Infinite => write!(f, "infinite"),
        }
    }
}

impl Index {
    pub fn is_finite(&self) -> bool {
        matches!(self, Index::Finite(_))
    }
}

impl Lattice {
    /// Lattice spanned by the rows of `generators` inside `Z^ambient_rank`.
    pub fn from_generators(ambient_rank: usize, generators: &IntMat) -> Self {
        assert_eq!(generators.cols(), ambient_rank);
        let h = hnf(generators);
        let rank = if h.rows() == 1 && h.row(0).iter().all(Zero::is_zero) {
            0
        } else {
            h.rows()
        };
        Lattice { ambient_rank, basis: h, rank }
    }

    pub fn from_vectors(ambient_rank: usize, vectors: &[Vec<BigInt>]) -> Self {
        assert!(!vectors.is_empty());
        Lattice::from_generators(ambient_rank, &IntMat::from_rows(vectors.to_vec()))
    }

    pub fn ambient_rank(&self) -> usize {
        self.ambient_rank
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Canonical HNF basis (one zero row for the zero lattice).
    pub fn basis(&self) -> &IntMat {
        &self.basis
    }

    /// `|Z^r / L|`: the product of the invariant factors of the basis when the
    /// lattice has full rank, infinite otherwise.
    pub fn index(&self) -> Index {
        if self.rank < self.ambient_rank {
            return Index::Infinite;
        }
        // Full-rank row HNF is square upper triangular with positive diagonal.
        let mut prod = BigUint::one();
        for i in 0..self.rank {
            prod *= self.basis.at(i, i).magnitude();
        }
        Index::Finite(prod)
    }

    /// Membership by back-substitution against the HNF basis.
    pub fn contains(&self, v: &[BigInt]) -> bool {
        assert_eq!(v.len(), self.ambient_rank);
        if self.rank == 0 {
            return v.iter().all(Zero::is_zero);
        }
        let mut w = v.to_vec();
        let mut row = 0usize;
        for col in 0..self.ambient_rank {
            if row < self.rank && !self.basis.at(row, col).is_zero() {
                let p = self.basis.at(row, col);
                let (q, r) = w[col].div_rem(p);
                if !r.is_zero() {
                    return false;
                }
                for j in col..self.ambient_rank {
                    let sub = &q * self.basis.at(row, j);
                    w[j] -= sub;
                }
                row += 1;
            } else if !w[col].is_zero() {
                return false;
            }
        }
        w.iter().all(Zero::is_zero)
    }
}

/// Rank over the rationals by fraction-free Bareiss elimination.
pub fn rational_rank(a: &IntMat) -> usize {
    let rows = a.rows();
    let cols = a.cols();
    let mut m: Vec<BigInt> = a.entries.clone();
    let idx = |i: usize, j: usize| i * cols + j;
    let mut prev = BigInt::one();
    let mut rank = 0usize;
    let mut pivot_col = 0usize;
    while rank < rows && pivot_col < cols {
        let pivot = (rank..rows).find(|&i| !m[idx(i, pivot_col)].is_zero());
        let pr = match pivot {
            Some(pr) => pr,
            None => {
                pivot_col += 1;
                continue;
            }
        };
        for j in 0..cols {
            m.swap(idx(rank, j), idx(pr, j));
        }
        for i in rank + 1..rows {
            for j in pivot_col + 1..cols {
                let num =
                    &m[idx(i, j)] * &m[idx(rank, pivot_col)] - &m[idx(i, pivot_col)] * &m[idx(rank, j)];
                let (q, r) = num.div_rem(&prev);
                debug_assert!(r.is_zero());
                m[idx(i, j)] = q;
            }
            m[idx(i, pivot_col)] = BigInt::zero();
        }
        prev = m[idx(rank, pivot_col)].clone();
        rank += 1;
        pivot_col += 1;
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn mat(rows: &[&[i64]]) -> IntMat {
        IntMat::from_i64(rows)
    }

    /// gcd of all k x k minors, the classical characterization that the SNF
    /// invariant factors must reproduce: d_1 * ... * d_k = gcd_k.
    fn minor_gcd(a: &IntMat, k: usize) -> BigInt {
        fn combos(n: usize, k: usize) -> Vec<Vec<usize>> {
            if k == 0 {
                return vec![vec![]];
            }
            let mut out = Vec::new();
            for first in 0..n {
                for rest in combos(n, k - 1) {
                    if rest.iter().all(|&x| x > first) {
                        let mut c = vec![first];
                        c.extend(rest);
                        out.push(c);
                    }
                }
            }
            out
        }
        let mut g = BigInt::zero();
        for rsel in combos(a.rows(), k) {
            for csel in combos(a.cols(), k) {
                let entries: Vec<BigInt> = rsel
                    .iter()
                    .flat_map(|&i| csel.iter().map(move |&j| a.at(i, j).clone()))
                    .collect();
                let minor = IntMat::new(k, k, entries).det();
                g = g.gcd(&minor);
            }
        }
        g
    }

    #[test]
    fn snf_small_examples() {
        let s = snf(&mat(&[&[2, 0], &[0, 3]]));
        assert_eq!(s.d, vec![BigInt::from(1), BigInt::from(6)]);
        let s = snf(&IntMat::identity(3));
        assert_eq!(s.d, vec![BigInt::one(); 3]);
        let s = snf(&mat(&[&[0, 0], &[0, 0]]));
        assert_eq!(s.d, vec![BigInt::zero(), BigInt::zero()]);
    }

    #[test]
    fn snf_reconstruction_and_unimodularity_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..120 {
            let rows = rng.gen_range(1..=6);
            let cols = rng.gen_range(1..=6);
            let entries: Vec<BigInt> =
                (0..rows * cols).map(|_| BigInt::from(rng.gen_range(-9i64..=9))).collect();
            let a = IntMat::new(rows, cols, entries);
            let s = snf(&a);
            let lhs = s.u.mul(&a).mul(&s.v);
            assert_eq!(lhs, s.diagonal_matrix(rows, cols), "U*A*V must equal diag");
            assert_eq!(s.u.det().abs(), BigInt::one());
            assert_eq!(s.v.det().abs(), BigInt::one());
            for w in s.d.windows(2) {
                if !w[0].is_zero() {
                    assert!(w[1].mod_floor(&w[0]).is_zero(), "divisibility chain");
                } else {
                    assert!(w[1].is_zero(), "zeros only at the end of the chain");
                }
            }
        }
    }

    #[test]
    fn snf_matches_minor_gcds() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..60 {
            let rows = rng.gen_range(1..=4);
            let cols = rng.gen_range(1..=4);
            let entries: Vec<BigInt> =
                (0..rows * cols).map(|_| BigInt::from(rng.gen_range(-6i64..=6))).collect();
            let a = IntMat::new(rows, cols, entries);
            let s = snf(&a);
            let mut running = BigInt::one();
            for k in 1..=rows.min(cols) {
                running *= &s.d[k - 1];
                assert_eq!(
                    running.abs(),
                    minor_gcd(&a, k).abs(),
                    "product of first {k} invariant factors = gcd of {k}x{k} minors"
                );
            }
        }
    }

    #[test]
    fn hnf_small_examples() {
        assert_eq!(hnf(&mat(&[&[2, 4], &[1, 1]])), mat(&[&[1, 1], &[0, 2]]));
        assert_eq!(hnf(&IntMat::identity(3)), IntMat::identity(3));
        assert_eq!(hnf(&mat(&[&[3], &[5]])), mat(&[&[1]]));
    }

    #[test]
    fn hnf_idempotent_and_span_preserving() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..80 {
            let rows = rng.gen_range(1..=4);
            let cols = rng.gen_range(1..=3);
            let entries: Vec<BigInt> =
                (0..rows * cols).map(|_| BigInt::from(rng.gen_range(-5i64..=5))).collect();
            let a = IntMat::new(rows, cols, entries);
            let h = hnf(&a);
            assert_eq!(hnf(&h), h, "idempotent");
            // Span agreement on a brute-force box: v is an integer combination
            // of the rows of a iff the HNF lattice contains it.
            let lat_a = Lattice::from_generators(cols, &a);
            let lat_h = Lattice::from_generators(cols, &h);
            assert_eq!(lat_a, lat_h);
            // Spot-check membership against explicit small combinations.
            for _ in 0..10 {
                let coeffs: Vec<BigInt> =
                    (0..rows).map(|_| BigInt::from(rng.gen_range(-3i64..=3))).collect();
                let mut v = vec![BigInt::zero(); cols];
                for (i, c) in coeffs.iter().enumerate() {
                    for j in 0..cols {
                        v[j] += c * a.at(i, j);
                    }
                }
                assert!(lat_h.contains(&v));
            }
        }
    }

    #[test]
    fn lattice_index_examples() {
        let l = Lattice::from_generators(2, &mat(&[&[2, 0], &[0, 3]]));
        assert_eq!(l.index(), Index::Finite(6u32.into()));
        let l = Lattice::from_generators(2, &IntMat::identity(2));
        assert_eq!(l.index(), Index::Finite(1u32.into()));
        let l = Lattice::from_generators(2, &mat(&[&[1, 1]]));
        assert_eq!(l.index(), Index::Infinite);
    }

    #[test]
    fn lattice_index_equals_coset_count() {
        // Exhaustive coset count over a box [0, B)^r for full-rank lattices.
        let cases: Vec<(usize, IntMat)> = vec![
            (2, mat(&[&[2, 0], &[0, 3]])),
            (2, mat(&[&[2, 1], &[0, 5]])),
            (2, mat(&[&[4, 2], &[1, 3]])),
            (3, mat(&[&[2, 0, 0], &[0, 2, 0], &[0, 0, 2]])),
            (3, mat(&[&[1, 2, 3], &[0, 2, 1], &[0, 0, 5]])),
        ];
        for (r, gens) in cases {
            let lat = Lattice::from_generators(r, &gens);
            let idx = match lat.index() {
                Index::Finite(q) => q.to_u64().unwrap(),
                Index::Infinite => panic!("expected finite index"),
            };
            assert!(idx <= 200);
            // Count residues in [0, idx)^r that differ by a lattice vector
            // from the origin class representative set.
            let b = idx as i64;
            let mut reps = 0u64;
            let mut coords = vec![0i64; r];
            'outer: loop {
                // v is a canonical representative iff it is the lexicographically
                // least element of its coset within the box; equivalently count
                // points and divide by lattice points per box.
                let v: Vec<BigInt> = coords.iter().map(|&x| BigInt::from(x)).collect();
                let mut least = true;
                let mut other = vec![0i64; r];
                'inner: loop {
                    if other < coords {
                        let diff: Vec<BigInt> = other
                            .iter()
                            .zip(&coords)
                            .map(|(&o, &c)| BigInt::from(o - c))
                            .collect();
                        if lat.contains(&diff) {
                            least = false;
                            break 'inner;
                        }
                    }
                    let mut k = r;
                    loop {
                        if k == 0 {
                            break 'inner;
                        }
                        k -= 1;
                        other[k] += 1;
                        if other[k] < b {
                            break;
                        }
                        other[k] = 0;
                    }
                }
                let _ = v;
                if least {
                    reps += 1;
                }
                let mut k = r;
                loop {
                    if k == 0 {
                        break 'outer;
                    }
                    k -= 1;
                    coords[k] += 1;
                    if coords[k] < b {
                        break;
                    }
                    coords[k] = 0;
                }
            }
            assert_eq!(reps, idx, "coset count must equal the invariant-factor product");
        }
    }

    #[test]
    fn rank_examples() {
        assert_eq!(rational_rank(&mat(&[&[1, 1], &[2, 2]])), 1);
        assert_eq!(rational_rank(&IntMat::identity(4)), 4);
        assert_eq!(rational_rank(&mat(&[&[2, 0], &[0, 3], &[1, 1]])), 2);
    }

    #[test]
    fn charpoly_companion_roundtrip() {
        // det(tI - A) for a known matrix: A = [[2,1],[0,3]] -> (t-2)(t-3).
        let a = mat(&[&[2, 1], &[0, 3]]);
        let c = a.charpoly();
        assert_eq!(c, vec![BigInt::from(6), BigInt::from(-5), BigInt::from(1)]);
    }

    #[test]
    fn inverse_unimodular_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..40 {
            let n = rng.gen_range(1..=4);
            // Random product of elementary matrices is unimodular.
            let mut m = IntMat::identity(n);
            for _ in 0..6 {
                let i = rng.gen_range(0..n);
                let mut j = rng.gen_range(0..n);
                if n > 1 {
                    while j == i {
                        j = rng.gen_range(0..n);
                    }
                    let mut e = IntMat::identity(n);
                    *e.at_mut(i, j) = BigInt::from(rng.gen_range(-3i64..=3));
                    m = m.mul(&e);
                }
            }
            let inv = m.inverse_unimodular().unwrap();
            assert_eq!(m.mul(&inv), IntMat::identity(n));
        }
    }
}
