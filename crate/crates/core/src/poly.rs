//! Integer-valued polynomials, coefficient matrices, multiplicative
//! complexity, and the monomial substitution that collapses a multivariate
//! orbit polynomial into one variable.
//!
//! The canonical representation is the binomial basis p(n) = sum c_k*C(n,k)
//! with integer c_k; a polynomial is integer-valued exactly when it has such
//! a form. The monomial view is rational and derived on demand.

use crate::linalg::{rational_rank, snf, Index, IntMat};
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::collections::BTreeMap;
use std::fmt;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum PolyError {
    #[error("polynomial is not integer-valued (finite difference {k} is {value})")]
    NotIntegerValued { k: usize, value: String },
    #[error("variable {var} has degree {degree}, exceeding the cap {cap}")]
    DegreeExceedsCap { var: usize, degree: u32, cap: u32 },
    #[error("expected {expected} variables, found {found}")]
    VariableCountMismatch { expected: usize, found: usize },
}

/// C(n, k) for arbitrary integer n: n(n-1)...(n-k+1)/k!.
pub fn binom_int(n: &BigInt, k: usize) -> BigInt {
    let mut num = BigInt::one();
    for t in 0..k {
        num *= n - BigInt::from(t);
    }
    let mut fact = BigInt::one();
    for t in 1..=k {
        fact *= BigInt::from(t);
    }
    let (q, r) = num.div_rem(&fact);
    debug_assert!(r.is_zero());
    q
}

fn factorial(n: usize) -> BigInt {
    let mut f = BigInt::one();
    for t in 2..=n {
        f *= BigInt::from(t);
    }
    f
}

/// Univariate integer-valued polynomial in the binomial basis. The
/// coefficient vector carries no trailing zeros; the zero polynomial is the
/// empty vector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntValuedPoly {
    binom: Vec<BigInt>,
}

impl IntValuedPoly {
    pub fn zero() -> Self {
        IntValuedPoly { binom: Vec::new() }
    }

    pub fn from_binomial_coeffs(mut c: Vec<BigInt>) -> Self {
        while c.last().map_or(false, Zero::is_zero) {
            c.pop();
        }
        IntValuedPoly { binom: c }
    }

    pub fn constant(c: BigInt) -> Self {
        IntValuedPoly::from_binomial_coeffs(vec![c])
    }

    /// From integer coefficients of powers of n (a_0 + a_1 n + ...).
    pub fn from_integer_monomial(a: &[BigInt]) -> Self {
        let rat: Vec<BigRational> =
            a.iter().map(|x| BigRational::from_integer(x.clone())).collect();
        IntValuedPoly::from_rational_monomial(&rat).expect("integer coefficients")
    }

    pub fn from_i64_monomial(a: &[i64]) -> Self {
        let v: Vec<BigInt> = a.iter().map(|&x| BigInt::from(x)).collect();
        IntValuedPoly::from_integer_monomial(&v)
    }

    /// From rational monomial coefficients; fails unless the polynomial is
    /// integer-valued on all of Z. Validation and conversion are one and the
    /// same: the k-th finite difference at 0 is the k-th binomial coefficient.
    pub fn from_rational_monomial(a: &[BigRational]) -> Result<Self, PolyError> {
        let mut coeffs = a.to_vec();
        while coeffs.last().map_or(false, Zero::is_zero) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            return Ok(IntValuedPoly::zero());
        }
        let d = coeffs.len() - 1;
        let mut values: Vec<BigRational> = (0..=d)
            .map(|n| {
                let n = BigRational::from_integer(BigInt::from(n));
                let mut acc = BigRational::zero();
                for c in coeffs.iter().rev() {
                    acc = acc * &n + c;
                }
                acc
            })
            .collect();
        let mut binom = Vec::with_capacity(d + 1);
        for k in 0..=d {
            let head = values[0].clone();
            if !head.is_integer() {
                return Err(PolyError::NotIntegerValued { k, value: head.to_string() });
            }
            binom.push(head.to_integer());
            for i in 0..d - k {
                values[i] = &values[i + 1] - &values[i];
            }
            values.truncate(d - k);
        }
        Ok(IntValuedPoly::from_binomial_coeffs(binom))
    }

    pub fn is_zero(&self) -> bool {
        self.binom.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.binom.len().saturating_sub(1)
    }

    pub fn binomial_coeffs(&self) -> &[BigInt] {
        &self.binom
    }

    pub fn eval(&self, n: &BigInt) -> BigInt {
        let mut acc = BigInt::zero();
        for (k, c) in self.binom.iter().enumerate() {
            if !c.is_zero() {
                acc += c * binom_int(n, k);
            }
        }
        acc
    }

    /// Rational coefficients of powers of n, constant first; length degree+1
    /// (empty for the zero polynomial).
    pub fn monomial_coeffs(&self) -> Vec<BigRational> {
        if self.binom.is_empty() {
            return Vec::new();
        }
        let d = self.degree();
        let mut out = vec![BigRational::zero(); d + 1];
        // falling[j] = coefficient of n^j in n(n-1)...(n-k+1), built up by k.
        let mut falling = vec![BigInt::one()];
        for (k, c) in self.binom.iter().enumerate() {
            if k > 0 {
                let shift_by = BigInt::from(k as i64 - 1);
                let mut next = vec![BigInt::zero(); falling.len() + 1];
                for (j, f) in falling.iter().enumerate() {
                    next[j + 1] += f;
                    next[j] -= f * &shift_by;
                }
                falling = next;
            }
            if c.is_zero() {
                continue;
            }
            let kfact = factorial(k);
            for (j, f) in falling.iter().enumerate() {
                out[j] += BigRational::new(c * f, kfact.clone());
            }
        }
        out
    }

    /// Integer monomial coefficients, if every denominator is 1.
    pub fn integer_monomial(&self) -> Option<Vec<BigInt>> {
        let m = self.monomial_coeffs();
        let mut out = Vec::with_capacity(m.len());
        for c in m {
            if !c.is_integer() {
                return None;
            }
            out.push(c.to_integer());
        }
        Some(out)
    }

    /// p(scale * n): same values along the sublattice, and for scale = D! the
    /// result has integer monomial coefficients.
    pub fn compose_scale(&self, scale: &BigInt) -> IntValuedPoly {
        let m = self.monomial_coeffs();
        let mut pw = BigInt::one();
        let scaled: Vec<BigRational> = m
            .iter()
            .enumerate()
            .map(|(j, c)| {
                if j > 0 {
                    pw *= scale;
                }
                c * BigRational::from_integer(pw.clone())
            })
            .collect();
        IntValuedPoly::from_rational_monomial(&scaled).expect("values unchanged on a sublattice")
    }

    pub fn add(&self, other: &IntValuedPoly) -> IntValuedPoly {
        let n = self.binom.len().max(other.binom.len());
        let mut c = vec![BigInt::zero(); n];
        for (i, x) in self.binom.iter().enumerate() {
            c[i] += x;
        }
        for (i, x) in other.binom.iter().enumerate() {
            c[i] += x;
        }
        IntValuedPoly::from_binomial_coeffs(c)
    }
}

impl fmt::Display for IntValuedPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let terms: Vec<String> = self
            .monomial_coeffs()
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(j, c)| match j {
                0 => format!("{}", c),
                1 => format!("{}*n", c),
                _ => format!("{}*n^{}", c, j),
            })
            .collect();
        write!(f, "{}", terms.join(" + "))
    }
}

/// Vector of integer-valued polynomials: one map P: Z -> Z^r.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyVec {
    comps: Vec<IntValuedPoly>,
}

impl PolyVec {
    pub fn new(comps: Vec<IntValuedPoly>) -> Self {
        assert!(!comps.is_empty(), "at least one component");
        PolyVec { comps }
    }

    pub fn from_i64_monomials(rows: &[&[i64]]) -> Self {
        PolyVec::new(rows.iter().map(|r| IntValuedPoly::from_i64_monomial(r)).collect())
    }

    pub fn dim(&self) -> usize {
        self.comps.len()
    }

    pub fn degree(&self) -> usize {
        self.comps.iter().map(IntValuedPoly::degree).max().unwrap_or(0)
    }

    pub fn components(&self) -> &[IntValuedPoly] {
        &self.comps
    }

    pub fn eval(&self, n: &BigInt) -> Vec<BigInt> {
        self.comps.iter().map(|p| p.eval(n)).collect()
    }

    pub fn eval_i64(&self, n: i64) -> Vec<BigInt> {
        self.eval(&BigInt::from(n))
    }

    pub fn has_integer_coeffs(&self) -> bool {
        self.comps.iter().all(|p| p.integer_monomial().is_some())
    }
}

/// P'(n) = P(L*n) with L = D!, D the degree of P. Every component of P' has
/// integer monomial coefficients, and the image of P' is a subset of the
/// image of P.
pub fn rescale_to_integer_coeffs(p: &PolyVec) -> (PolyVec, BigInt) {
    let l = factorial(p.degree().max(1));
    let comps = p.comps.iter().map(|c| c.compose_scale(&l)).collect();
    (PolyVec::new(comps), l)
}

/// Coefficients of n^j (j = 1..D) for each component, constant terms dropped:
/// row j-1, column i holds the n^j coefficient of component i. A constant
/// vector yields a single zero row so the matrix stays well-formed.
#[derive(Clone, Debug)]
pub struct CoeffMatrix {
    pub mat: IntMat,
    pub degree: usize,
    pub components: usize,
}

/// Requires integer monomial coefficients (use rescale_to_integer_coeffs
/// first when in doubt); panics otherwise.
pub fn coeff_matrix(p: &PolyVec) -> CoeffMatrix {
    let r = p.dim();
    let d = p.degree();
    let rows = d.max(1);
    let mut mat = IntMat::zero(rows, r);
    for (i, c) in p.comps.iter().enumerate() {
        let m = c.integer_monomial().expect("coeff_matrix needs integer coefficients");
        for (j, v) in m.into_iter().enumerate().skip(1) {
            *mat.at_mut(j - 1, i) = v;
        }
    }
    CoeffMatrix { mat, degree: d, components: r }
}

/// Rational coefficient matrix with denominators cleared per component;
/// column rank is unaffected, which is all it is used for.
fn cleared_coeff_matrix(p: &PolyVec) -> IntMat {
    let r = p.dim();
    let d = p.degree().max(1);
    let mut mat = IntMat::zero(d, r);
    for (i, c) in p.comps.iter().enumerate() {
        let m = c.monomial_coeffs();
        let mut denom = BigInt::one();
        for v in m.iter().skip(1) {
            denom = denom.lcm(v.denom());
        }
        for (j, v) in m.iter().enumerate().skip(1) {
            let cleared = v * BigRational::from_integer(denom.clone());
            debug_assert!(cleared.is_integer());
            *mat.at_mut(j - 1, i) = cleared.to_integer();
        }
    }
    mat
}

/// True iff no nontrivial linear combination of the components is constant:
/// the coefficient matrix has full column rank.
pub fn hyperplane_fleeing(p: &PolyVec) -> bool {
    rational_rank(&cleared_coeff_matrix(p)) == p.dim()
}

/// The least Q such that for every q and every a in [0,q)^r with
/// gcd(a, q) = 1, the nonconstant coefficients b of (P(n) - P(0))*a satisfy
/// gcd(b_1, ..., b_D, q) <= Q. Infinite when the coefficient matrix has
/// column rank below r; otherwise equal to its largest invariant factor
/// (validated against mult_complexity_brute in tests before being relied on).
pub fn mult_complexity(p: &PolyVec) -> Index {
    let cm = coeff_matrix(p);
    if rational_rank(&cm.mat) < cm.components {
        return Index::Infinite;
    }
    let s = snf(&cm.mat);
    let d_r = s.d.last().expect("nonempty diagonal");
    debug_assert!(d_r.is_positive());
    Index::Finite(d_r.magnitude().clone())
}

/// Brute-force witness maximization of gcd(C*a mod q, q) over q <= q_max and
/// primitive residue vectors a. The oracle the invariant-factor shortcut is
/// checked against: for full column rank the capped maximum must equal the
/// largest divisor of d_r not exceeding q_max, and q_max itself otherwise.
pub fn mult_complexity_brute(p: &PolyVec, q_max: u64) -> BigUint {
    let cm = coeff_matrix(p);
    let rows = cm.mat.rows();
    let r = cm.components;
    let mut best = 1u64;
    for q in 1..=q_max {
        // Coefficient matrix reduced mod q; everything below fits in u64.
        let qb = BigInt::from(q);
        let mut red = vec![0u64; rows * r];
        for j in 0..rows {
            for i in 0..r {
                red[j * r + i] = cm.mat.at(j, i).mod_floor(&qb).to_u64().unwrap();
            }
        }
        let mut a = vec![0u64; r];
        loop {
            let mut g = q;
            for &ai in &a {
                g = gcd_u64(g, ai);
            }
            if g == 1 {
                let mut gb = q;
                for j in 0..rows {
                    let mut b = 0u128;
                    for i in 0..r {
                        b += red[j * r + i] as u128 * a[i] as u128;
                    }
                    gb = gcd_u64(gb, (b % q as u128) as u64);
                    if gb == 1 {
                        break;
                    }
                }
                best = best.max(gb);
            }
            let mut k = r;
            loop {
                if k == 0 {
                    break;
                }
                k -= 1;
                a[k] += 1;
                if a[k] < q {
                    break;
                }
                a[k] = 0;
            }
            if a.iter().all(|&x| x == 0) {
                break;
            }
        }
    }
    BigUint::from(best)
}

fn gcd_u64(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd_u64(b, a % b)
    }
}

/// Multivariate polynomial with rational monomial coefficients and a declared
/// per-variable degree cap. Deterministic term order (lexicographic exponent
/// vectors).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiPoly {
    nvars: usize,
    cap: u32,
    terms: BTreeMap<Vec<u32>, BigRational>,
}

impl MultiPoly {
    pub fn zero(nvars: usize, cap: u32) -> Self {
        MultiPoly { nvars, cap, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, cap: u32, c: BigRational) -> Self {
        let mut p = MultiPoly::zero(nvars, cap);
        if !c.is_zero() {
            p.terms.insert(vec![0; nvars], c);
        }
        p
    }

    pub fn add_term(&mut self, expts: Vec<u32>, c: BigRational) -> Result<(), PolyError> {
        if expts.len() != self.nvars {
            return Err(PolyError::VariableCountMismatch {
                expected: self.nvars,
                found: expts.len(),
            });
        }
        for (var, &e) in expts.iter().enumerate() {
            if e > self.cap {
                return Err(PolyError::DegreeExceedsCap { var, degree: e, cap: self.cap });
            }
        }
        let entry = self.terms.entry(expts.clone()).or_insert_with(BigRational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&expts);
        }
        Ok(())
    }

    /// Univariate p placed in variable `var` (monomial rational coefficients).
    pub fn from_univariate(
        nvars: usize,
        cap: u32,
        var: usize,
        coeffs: &[BigRational],
    ) -> Result<Self, PolyError> {
        let mut p = MultiPoly::zero(nvars, cap);
        for (j, c) in coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mut e = vec![0u32; nvars];
            e[var] = j as u32;
            p.add_term(e, c.clone())?;
        }
        Ok(p)
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &BigRational)> {
        self.terms.iter()
    }

    pub fn max_degree_of_var(&self, var: usize) -> u32 {
        self.terms.keys().map(|e| e[var]).max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn scale(&self, c: &BigRational) -> MultiPoly {
        if c.is_zero() {
            return MultiPoly::zero(self.nvars, self.cap);
        }
        let terms = self.terms.iter().map(|(e, v)| (e.clone(), v * c)).collect();
        MultiPoly { nvars: self.nvars, cap: self.cap, terms }
    }

    pub fn add(&self, other: &MultiPoly) -> Result<MultiPoly, PolyError> {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone())?;
        }
        Ok(out)
    }

    pub fn mul(&self, other: &MultiPoly) -> Result<MultiPoly, PolyError> {
        assert_eq!(self.nvars, other.nvars);
        let mut out = MultiPoly::zero(self.nvars, self.cap);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.add_term(e, c1 * c2)?;
            }
        }
        Ok(out)
    }

    pub fn eval(&self, point: &[BigInt]) -> BigRational {
        assert_eq!(point.len(), self.nvars);
        let mut acc = BigRational::zero();
        for (e, c) in &self.terms {
            let mut m = c.clone();
            for (x, &k) in point.iter().zip(e) {
                for _ in 0..k {
                    m *= BigRational::from_integer(x.clone());
                }
            }
            acc += m;
        }
        acc
    }

    /// Multiset of nonconstant-monomial coefficients, sorted; substitution
    /// must preserve this exactly.
    pub fn nonconstant_coeff_multiset(&self) -> Vec<BigRational> {
        let mut v: Vec<BigRational> = self
            .terms
            .iter()
            .filter(|(e, _)| e.iter().any(|&x| x > 0))
            .map(|(_, c)| c.clone())
            .collect();
        v.sort();
        v
    }
}

/// Substitutes n_j -> n^{(r+1)^j} (j = 1-based) into each component. Distinct
/// exponent vectors with entries <= r land on distinct powers (base r+1
/// digits), so the nonconstant coefficient multiset survives unchanged. The
/// result degree is at most (r+1)^{N+1} - r - 1.
pub fn substitute_monomials(s: &[MultiPoly], r: usize) -> Result<PolyVec, PolyError> {
    assert!(!s.is_empty());
    let nvars = s[0].nvars;
    for p in s {
        if p.nvars != nvars {
            return Err(PolyError::VariableCountMismatch { expected: nvars, found: p.nvars });
        }
        for var in 0..nvars {
            let d = p.max_degree_of_var(var);
            if d as usize > r {
                return Err(PolyError::DegreeExceedsCap { var, degree: d, cap: r as u32 });
            }
        }
    }
    let base = r as u64 + 1;
    let mut weights = Vec::with_capacity(nvars);
    let mut w = base;
    for _ in 0..nvars {
        weights.push(w);
        w *= base;
    }
    let mut comps = Vec::with_capacity(s.len());
    for p in s {
        let mut coeffs: Vec<BigRational> = Vec::new();
        for (e, c) in &p.terms {
            let t: u64 = e.iter().zip(&weights).map(|(&x, &w)| x as u64 * w).sum();
            let t = t as usize;
            if coeffs.len() <= t {
                coeffs.resize(t + 1, BigRational::zero());
            }
            debug_assert!(coeffs[t].is_zero(), "substitution must be injective on monomials");
            coeffs[t] = c.clone();
        }
        comps.push(IntValuedPoly::from_rational_monomial(&coeffs)?);
    }
    Ok(PolyVec::new(comps))
}

/// Degree bound for the substitution: (r+1)^{N+1} - r - 1.
pub fn substitution_degree_cap(nvars: usize, r: usize) -> u64 {
    let base = r as u64 + 1;
    base.pow(nvars as u32 + 1) - base
}

/// Multivariate analogue of mult_complexity: the coefficient matrix has one
/// row per nonzero nonconstant exponent vector (union over components).
/// Requires integer coefficients.
pub fn mult_complexity_multi(s: &[MultiPoly]) -> Index {
    assert!(!s.is_empty());
    let r = s.len();
    let mut support: Vec<Vec<u32>> = Vec::new();
    for p in s {
        for (e, _) in &p.terms {
            if e.iter().any(|&x| x > 0) && !support.contains(e) {
                support.push(e.clone());
            }
        }
    }
    support.sort();
    if support.is_empty() {
        return Index::Infinite;
    }
    let mut mat = IntMat::zero(support.len(), r);
    for (i, p) in s.iter().enumerate() {
        for (e, c) in &p.terms {
            if e.iter().all(|&x| x == 0) {
                continue;
            }
            assert!(c.is_integer(), "mult_complexity_multi needs integer coefficients");
            let row = support.binary_search(e).unwrap();
            *mat.at_mut(row, i) = c.to_integer();
        }
    }
    if rational_rank(&mat) < r {
        return Index::Infinite;
    }
    let s = snf(&mat);
    Index::Finite(s.d.last().unwrap().magnitude().clone())
}
