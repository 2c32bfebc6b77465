//! Unipotent orbits: symbolic powers, the adjoint action on trace-zero
//! matrices, companion matrices, and lattice certificates for orbit spans.

use crate::linalg::{hnf, rational_rank, snf, Index, IntMat, Lattice};
use crate::poly::{
    binom_int, rescale_to_integer_coeffs, substitute_monomials, substitution_degree_cap,
    IntValuedPoly, MultiPoly, PolyError, PolyVec,
};
use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::Rng;
use std::collections::BTreeSet;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum OrbitError {
    #[error("matrix is not square")]
    NotSquare,
    #[error("matrix of size {size} is not unipotent: (u - 1)^{size} != 0")]
    NotUnipotent { size: usize },
    #[error("determinant {det} != 1, matrix does not act on the trace-zero lattice")]
    NotSpecialLinear { det: BigInt },
    #[error("matrix has nonzero trace")]
    TraceNotZero,
    #[error("subleading coefficient must vanish for a trace-zero companion matrix")]
    NonzeroSubleadingCoeff,
    #[error("matrix lies outside the even-corner lattice")]
    NotInLambda,
    #[error("dimension mismatch between generators and base vector")]
    SizeMismatch,
    #[error("no input samples")]
    EmptyInput,
    #[error("commutator differs between samples")]
    SampleMismatch,
    #[error("commutator does not match the expected pattern")]
    PatternMismatch,
    #[error("orbit span did not stabilize within depth {depth_cap}")]
    NoStabilization { depth_cap: usize },
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// Square integer matrix u with (u - 1)^k = 0; stores the least such k and
/// the nilpotent powers (u - 1)^0 .. (u - 1)^{k-1}.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnipotentMat {
    mat: IntMat,
    nilpotency: usize,
    nil_powers: Vec<IntMat>,
}

impl UnipotentMat {
    pub fn new(mat: IntMat) -> Result<Self, OrbitError> {
        if !mat.is_square() || mat.rows() == 0 {
            return Err(OrbitError::NotSquare);
        }
        let d = mat.rows();
        let n = mat.sub(&IntMat::identity(d));
        let mut nil_powers = vec![IntMat::identity(d)];
        let mut p = IntMat::identity(d);
        let mut nilpotency = None;
        for k in 1..=d {
            p = p.mul(&n);
            if p.is_zero() {
                nilpotency = Some(k);
                break;
            }
            nil_powers.push(p.clone());
        }
        match nilpotency {
            Some(k) => Ok(UnipotentMat {
                mat,
                nilpotency: k,
                nil_powers,
            }),
            None => Err(OrbitError::NotUnipotent { size: d }),
        }
    }

    pub fn matrix(&self) -> &IntMat {
        &self.mat
    }

    pub fn size(&self) -> usize {
        self.mat.rows()
    }

    /// Least k >= 1 with (u - 1)^k = 0.
    pub fn nilpotency(&self) -> usize {
        self.nilpotency
    }

    /// u^n = sum_{k < nilpotency} C(n, k) (u - 1)^k, valid for every integer n.
    pub fn power(&self, n: &BigInt) -> IntMat {
        let d = self.size();
        let mut acc = IntMat::zero(d, d);
        for (k, p) in self.nil_powers.iter().enumerate() {
            acc = acc.add(&p.scale(&binom_int(n, k)));
        }
        acc
    }

    /// Entrywise polynomials of n |-> u^n; entry (i,j) has binomial
    /// coefficients [(u - 1)^k]_{ij}.
    pub fn power_poly(&self) -> Vec<Vec<IntValuedPoly>> {
        let d = self.size();
        (0..d)
            .map(|i| {
                (0..d)
                    .map(|j| {
                        let c = self
                            .nil_powers
                            .iter()
                            .map(|p| p.at(i, j).clone())
                            .collect::<Vec<_>>();
                        IntValuedPoly::from_binomial_coeffs(c)
                    })
                    .collect()
            })
            .collect()
    }
}

pub fn trace_zero_dim(d: usize) -> usize {
    d * d - 1
}

/// Basis tags in lexicographic order: (i,i) carries H_i = E_ii - E_{i+1,i+1}
/// for i < d-1, (i,j) with i != j carries E_ij.
fn basis_tags(d: usize) -> Vec<(usize, usize)> {
    let mut tags = Vec::with_capacity(d * d - 1);
    for i in 0..d {
        for j in 0..d {
            if i == j {
                if i < d - 1 {
                    tags.push((i, i));
                }
            } else {
                tags.push((i, j));
            }
        }
    }
    tags
}

pub fn trace_zero_basis(d: usize) -> Vec<IntMat> {
    basis_tags(d)
        .into_iter()
        .map(|(i, j)| {
            let mut m = IntMat::zero(d, d);
            if i == j {
                *m.at_mut(i, i) = BigInt::one();
                *m.at_mut(i + 1, i + 1) = -BigInt::one();
            } else {
                *m.at_mut(i, j) = BigInt::one();
            }
            m
        })
        .collect()
}

/// Coordinates of a trace-zero matrix in the fixed basis: off-diagonal
/// entries directly, diagonal partial sums on the H_i.
pub fn trace_zero_coords(m: &IntMat) -> Result<Vec<BigInt>, OrbitError> {
    if !m.is_square() || m.rows() < 2 {
        return Err(OrbitError::NotSquare);
    }
    if !m.trace().is_zero() {
        return Err(OrbitError::TraceNotZero);
    }
    let d = m.rows();
    let mut out = Vec::with_capacity(d * d - 1);
    let mut partial = BigInt::zero();
    for i in 0..d {
        for j in 0..d {
            if i == j {
                if i < d - 1 {
                    partial += m.at(i, i);
                    out.push(partial.clone());
                }
            } else {
                out.push(m.at(i, j).clone());
            }
        }
    }
    Ok(out)
}

pub fn trace_zero_from_coords(d: usize, v: &[BigInt]) -> Result<IntMat, OrbitError> {
    if d < 2 || v.len() != d * d - 1 {
        return Err(OrbitError::SizeMismatch);
    }
    let mut m = IntMat::zero(d, d);
    for ((i, j), c) in basis_tags(d).into_iter().zip(v) {
        if i == j {
            *m.at_mut(i, i) += c;
            *m.at_mut(i + 1, i + 1) -= c;
        } else {
            *m.at_mut(i, j) = c.clone();
        }
    }
    Ok(m)
}

/// Matrix of x |-> g x g^{-1} on the trace-zero lattice in the fixed basis.
/// Requires det g = 1.
pub fn adjoint_map(g: &IntMat) -> Result<IntMat, OrbitError> {
    if !g.is_square() || g.rows() < 2 {
        return Err(OrbitError::NotSquare);
    }
    let det = g.det();
    if !det.is_one() {
        return Err(OrbitError::NotSpecialLinear { det });
    }
    let g_inv = g.inverse_unimodular().expect("det 1 matrix invertible");
    let r = trace_zero_dim(g.rows());
    let mut out = IntMat::zero(r, r);
    for (t, b) in trace_zero_basis(g.rows()).iter().enumerate() {
        let col = trace_zero_coords(&g.mul(b).mul(&g_inv))?;
        for (i, c) in col.into_iter().enumerate() {
            *out.at_mut(i, t) = c;
        }
    }
    Ok(out)
}

/// Companion matrix of the monic polynomial t^n + a_{n-1} t^{n-1} + .. + a_0:
/// ones on the subdiagonal, last column -a_0 .. -a_{n-1} top to bottom.
/// Trace is -a_{n-1}, so a_{n-1} = 0 is required.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompanionMatrix {
    coeffs: Vec<BigInt>,
    mat: IntMat,
}

pub fn companion(coeffs: &[BigInt]) -> Result<CompanionMatrix, OrbitError> {
    let n = coeffs.len();
    if n == 0 {
        return Err(OrbitError::EmptyInput);
    }
    if !coeffs[n - 1].is_zero() {
        return Err(OrbitError::NonzeroSubleadingCoeff);
    }
    let mut mat = IntMat::zero(n, n);
    for i in 0..n {
        if i > 0 {
            *mat.at_mut(i, i - 1) = BigInt::one();
        }
        *mat.at_mut(i, n - 1) = -&coeffs[i];
    }
    Ok(CompanionMatrix {
        coeffs: coeffs.to_vec(),
        mat,
    })
}

impl CompanionMatrix {
    pub fn degree(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn matrix(&self) -> &IntMat {
        &self.mat
    }
}

/// Companion matrix of a random monic degree-d polynomial with vanishing
/// subleading coefficient, remaining coefficients uniform in [-bound, bound].
pub fn random_companion<R: Rng>(d: usize, bound: i64, rng: &mut R) -> CompanionMatrix {
    assert!(d >= 2);
    let mut coeffs: Vec<BigInt> = (0..d - 1)
        .map(|_| BigInt::from(rng.gen_range(-bound..=bound)))
        .collect();
    coeffs.push(BigInt::zero());
    companion(&coeffs).expect("subleading coefficient is zero")
}

/// gamma_0 = 1 + E_{1,d}.
pub fn gamma0(d: usize) -> IntMat {
    let mut g = IntMat::identity(d);
    *g.at_mut(0, d - 1) = BigInt::one();
    g
}

/// Expected value of gamma_0 c gamma_0^{-1} - c for a trace-zero companion
/// matrix c: entry (1, d-1) is 1, entry (2, d) is -1, entry (1, d) is -1
/// exactly when d = 2 (1-indexed).
pub fn gamma0_commutator_pattern(d: usize) -> IntMat {
    let mut m = IntMat::zero(d, d);
    *m.at_mut(0, d - 2) = BigInt::one();
    *m.at_mut(1, d - 1) = -BigInt::one();
    if d == 2 {
        *m.at_mut(0, d - 1) = -BigInt::one();
    }
    m
}

/// Checks that gamma_0 c gamma_0^{-1} - c is the same trace-zero matrix for
/// every sample and matches the fixed pattern, then returns it.
pub fn gamma0_identity(d: usize, samples: &[CompanionMatrix]) -> Result<IntMat, OrbitError> {
    if d < 2 {
        return Err(OrbitError::NotSquare);
    }
    if samples.is_empty() {
        return Err(OrbitError::EmptyInput);
    }
    let g = gamma0(d);
    let g_inv = g.inverse_unimodular().expect("det 1");
    let mut v0: Option<IntMat> = None;
    for s in samples {
        if s.degree() != d {
            return Err(OrbitError::SizeMismatch);
        }
        let c = s.matrix();
        let diff = g.mul(c).mul(&g_inv).sub(c);
        match &v0 {
            None => v0 = Some(diff),
            Some(prev) => {
                if *prev != diff {
                    return Err(OrbitError::SampleMismatch);
                }
            }
        }
    }
    let v0 = v0.expect("samples nonempty");
    if v0 != gamma0_commutator_pattern(d) {
        return Err(OrbitError::PatternMismatch);
    }
    if !v0.trace().is_zero() {
        return Err(OrbitError::TraceNotZero);
    }
    Ok(v0)
}

/// a_t = [[0, 2t], [2, 0]], the standard one-parameter family in the
/// even-corner lattice.
pub fn so21_a(t: i64) -> IntMat {
    IntMat::from_i64(&[&[0, 2 * t], &[2, 0]])
}

/// Coordinates in the basis H = [[1,0],[0,-1]], X = [[0,1],[1,0]],
/// Y = [[0,2],[0,0]] of the lattice { trace zero, upper entry congruent to
/// lower entry mod 2 }.
pub fn lambda_coords(m: &IntMat) -> Result<[BigInt; 3], OrbitError> {
    if !m.is_square() || m.rows() != 2 {
        return Err(OrbitError::NotSquare);
    }
    if !m.trace().is_zero() {
        return Err(OrbitError::TraceNotZero);
    }
    let alpha = m.at(0, 0).clone();
    let beta = m.at(1, 0).clone();
    let twice_gamma = m.at(0, 1) - &beta;
    if (&twice_gamma % 2i64) != BigInt::zero() {
        return Err(OrbitError::NotInLambda);
    }
    Ok([alpha, beta, twice_gamma / 2])
}

pub struct So21Data {
    pub gamma0: IntMat,
    pub gamma_gens: [IntMat; 2],
    pub lambda_basis: [IntMat; 3],
    pub v0: IntMat,
    pub v0_coords: [BigInt; 3],
}

/// Fixed data for the 2x2 even-corner setup, with the commutator identity
/// gamma_0 a_t gamma_0^{-1} - a_t = v_0 verified for t in [-50, 50] and the
/// lattice checked to be preserved by the generators.
pub fn so21_setup() -> Result<So21Data, OrbitError> {
    let gamma0 = IntMat::from_i64(&[&[1, 2], &[0, 1]]);
    let gamma_gens = [
        IntMat::from_i64(&[&[1, 2], &[0, 1]]),
        IntMat::from_i64(&[&[1, 0], &[2, 1]]),
    ];
    let lambda_basis = [
        IntMat::from_i64(&[&[1, 0], &[0, -1]]),
        IntMat::from_i64(&[&[0, 1], &[1, 0]]),
        IntMat::from_i64(&[&[0, 2], &[0, 0]]),
    ];
    let v0 = IntMat::from_i64(&[&[4, -8], &[0, -4]]);
    let g_inv = gamma0.inverse_unimodular().expect("det 1");
    for t in -50..=50 {
        let a = so21_a(t);
        let diff = gamma0.mul(&a).mul(&g_inv).sub(&a);
        if diff != v0 {
            return Err(OrbitError::SampleMismatch);
        }
        lambda_coords(&a)?;
    }
    let v0_coords = lambda_coords(&v0)?;
    if v0_coords != [BigInt::from(4), BigInt::zero(), BigInt::from(-4)] {
        return Err(OrbitError::PatternMismatch);
    }
    for g in &gamma_gens {
        let gi = g.inverse_unimodular().expect("det 1");
        for b in &lambda_basis {
            lambda_coords(&g.mul(b).mul(&gi))?;
        }
    }
    Ok(So21Data {
        gamma0,
        gamma_gens,
        lambda_basis,
        v0,
        v0_coords,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OrbitAction {
    Linear,
    Adjoint,
}

/// Unipotent generators with a base vector: either matrices acting on Z^m
/// directly, or SL_d matrices acting on the trace-zero lattice (dimension
/// d^2 - 1) by conjugation.
pub struct OrbitSpec {
    gens: Vec<UnipotentMat>,
    acting: Vec<UnipotentMat>,
    v: Vec<BigInt>,
    action: OrbitAction,
    r: usize,
}

impl OrbitSpec {
    pub fn new_linear(gens: Vec<IntMat>, v: Vec<BigInt>) -> Result<Self, OrbitError> {
        let gens = gens
            .into_iter()
            .map(UnipotentMat::new)
            .collect::<Result<Vec<_>, _>>()?;
        let r = v.len();
        if r == 0 || gens.iter().any(|g| g.size() != r) {
            return Err(OrbitError::SizeMismatch);
        }
        Ok(OrbitSpec {
            acting: gens.clone(),
            gens,
            v,
            action: OrbitAction::Linear,
            r,
        })
    }

    pub fn new_adjoint(gens: Vec<IntMat>, v: IntMat) -> Result<Self, OrbitError> {
        if !v.is_square() || v.rows() < 2 {
            return Err(OrbitError::NotSquare);
        }
        let d = v.rows();
        let coords = trace_zero_coords(&v)?;
        let gens = gens
            .into_iter()
            .map(UnipotentMat::new)
            .collect::<Result<Vec<_>, _>>()?;
        if gens.iter().any(|g| g.size() != d) {
            return Err(OrbitError::SizeMismatch);
        }
        let acting = gens
            .iter()
            .map(|g| UnipotentMat::new(adjoint_map(g.matrix())?))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(OrbitSpec {
            gens,
            acting,
            v: coords,
            action: OrbitAction::Adjoint,
            r: trace_zero_dim(d),
        })
    }

    pub fn generator_count(&self) -> usize {
        self.gens.len()
    }

    /// Dimension of the space the orbit lives in.
    pub fn acting_dim(&self) -> usize {
        self.r
    }

    pub fn action(&self) -> OrbitAction {
        self.action
    }

    pub fn generators(&self) -> &[UnipotentMat] {
        &self.gens
    }

    pub fn acting_generators(&self) -> &[UnipotentMat] {
        &self.acting
    }

    /// Base vector in acting-space coordinates.
    pub fn base_coords(&self) -> &[BigInt] {
        &self.v
    }
}

pub struct OrbitPolyOutput {
    /// Single-variable image of the orbit map after the monomial
    /// substitution n_j -> n^{(r+1)^j}; integer-valued, possibly with
    /// non-integer monomial coefficients.
    pub substituted: PolyVec,
    /// substituted composed with n -> scale * n, making every monomial
    /// coefficient an integer.
    pub rescaled: PolyVec,
    pub scale: BigInt,
}

/// Symbolic orbit map S(n_1, .., n_N) = u_1^{n_1} .. u_N^{n_N} v collapsed to
/// one variable by the injective monomial substitution, then rescaled to
/// integer coefficients.
pub fn orbit_poly(spec: &OrbitSpec) -> Result<OrbitPolyOutput, OrbitError> {
    let n_gens = spec.acting.len();
    let r = spec.r;
    let cap = r as u32;
    let mut w: Vec<MultiPoly> = spec
        .v
        .iter()
        .map(|c| MultiPoly::constant(n_gens, cap, c.clone().into()))
        .collect();
    for j in (0..n_gens).rev() {
        let upoly = spec.acting[j].power_poly();
        let entries: Vec<Vec<MultiPoly>> = upoly
            .iter()
            .map(|row| {
                row.iter()
                    .map(|p| MultiPoly::from_univariate(n_gens, cap, j, &p.monomial_coeffs()))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        let mut next = Vec::with_capacity(r);
        for row in &entries {
            let mut acc = MultiPoly::zero(n_gens, cap);
            for (e, wk) in row.iter().zip(&w) {
                acc = acc.add(&e.mul(wk)?)?;
            }
            next.push(acc);
        }
        w = next;
    }
    let substituted = substitute_monomials(&w, r)?;
    debug_assert!(substituted.degree() as u64 <= substitution_degree_cap(n_gens, r));
    let (rescaled, scale) = rescale_to_integer_coeffs(&substituted);
    Ok(OrbitPolyOutput {
        substituted,
        rescaled,
        scale,
    })
}

/// All points u_1^{e_1} .. u_N^{e_N} v with each exponent in [lo, hi],
/// deduplicated and sorted.
pub fn word_orbit_points(spec: &OrbitSpec, lo: i64, hi: i64) -> Vec<Vec<BigInt>> {
    if lo > hi {
        return Vec::new();
    }
    let powers: Vec<Vec<IntMat>> = spec
        .acting
        .iter()
        .map(|u| (lo..=hi).map(|e| u.power(&BigInt::from(e))).collect())
        .collect();
    let n_gens = spec.acting.len();
    let width = (hi - lo + 1) as usize;
    let mut points = BTreeSet::new();
    let mut odo = vec![0usize; n_gens];
    loop {
        let mut p = spec.v.clone();
        for j in (0..n_gens).rev() {
            p = powers[j][odo[j]].mul_vec(&p);
        }
        points.insert(p);
        let mut j = 0;
        loop {
            if j == n_gens {
                return points.into_iter().collect();
            }
            odo[j] += 1;
            if odo[j] < width {
                break;
            }
            odo[j] = 0;
            j += 1;
        }
    }
}

/// Witness that a point set escapes every low-index coset family: the
/// Z-span of the vectors in `generators` has full rank r and index q, so any
/// subgroup W containing the differences of the points satisfies
/// [Z^r : W] <= q.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FleeingCertificate {
    /// Word depth at which the span stabilized, or the number of difference
    /// vectors for a raw point set.
    pub n: usize,
    pub q: Index,
    pub generators: Vec<Vec<BigInt>>,
    pub invariant_factors: Vec<BigInt>,
    pub full_rank: bool,
}

fn nonzero_invariant_factors(m: &IntMat) -> Vec<BigInt> {
    let s = snf(m);
    s.d.into_iter().filter(|d| !d.is_zero()).collect()
}

/// Certificate from the differences of an explicit point list against its
/// first element.
pub fn fleeing_certificate(points: &[Vec<BigInt>]) -> Result<FleeingCertificate, OrbitError> {
    let Some(base) = points.first() else {
        return Err(OrbitError::EmptyInput);
    };
    let r = base.len();
    if r == 0 || points.iter().any(|p| p.len() != r) {
        return Err(OrbitError::SizeMismatch);
    }
    let diffs: Vec<Vec<BigInt>> = points[1..]
        .iter()
        .map(|p| p.iter().zip(base).map(|(a, b)| a - b).collect())
        .collect();
    // a single point spans the zero lattice; one zero row encodes it
    let rows = if diffs.is_empty() {
        vec![vec![BigInt::zero(); r]]
    } else {
        diffs.clone()
    };
    let lat = Lattice::from_vectors(r, &rows);
    let stack = IntMat::from_rows(rows);
    Ok(FleeingCertificate {
        n: diffs.len(),
        q: lat.index(),
        invariant_factors: nonzero_invariant_factors(&stack),
        full_rank: lat.rank() == r,
        generators: diffs,
    })
}

/// Elementary matrices 1 +- E_ij acting on the trace-zero lattice.
fn elementary_adjoint_generators(d: usize) -> Vec<IntMat> {
    let mut gens = Vec::new();
    for i in 0..d {
        for j in 0..d {
            if i == j {
                continue;
            }
            for s in [1i64, -1] {
                let mut g = IntMat::identity(d);
                *g.at_mut(i, j) = BigInt::from(s);
                gens.push(adjoint_map(&g).expect("elementary matrices have det 1"));
            }
        }
    }
    gens
}

/// Grows the word orbit of v_0 = gamma_0 c gamma_0^{-1} - c under the
/// elementary adjoint generators depth by depth until its Z-span is full
/// rank and provably invariant, so the span never grows again. The
/// resulting (n, q) depends only on d, never on the companion samples.
pub fn certify_companion_bounds(
    d: usize,
    depth_cap: usize,
    samples: &[CompanionMatrix],
) -> Result<FleeingCertificate, OrbitError> {
    let v0 = trace_zero_coords(&gamma0_identity(d, samples)?)?;
    let r = trace_zero_dim(d);
    let gens = elementary_adjoint_generators(d);
    let mut seen: BTreeSet<Vec<BigInt>> = BTreeSet::new();
    let mut frontier: Vec<Vec<BigInt>> = vec![v0.clone()];
    seen.insert(v0);
    for depth in 1..=depth_cap {
        let mut next = Vec::new();
        for v in &frontier {
            for g in &gens {
                let w = g.mul_vec(v);
                if seen.insert(w.clone()) {
                    next.push(w);
                }
            }
        }
        frontier = next;
        let vectors: Vec<Vec<BigInt>> = seen.iter().cloned().collect();
        if rational_rank(&IntMat::from_rows(vectors.clone())) < r {
            continue;
        }
        let lat = Lattice::from_vectors(r, &vectors);
        let basis = lat.basis().clone();
        let invariant = gens.iter().all(|g| {
            (0..basis.rows()).all(|i| lat.contains(&g.mul_vec(basis.row(i))))
        });
        if !invariant {
            continue;
        }
        return Ok(FleeingCertificate {
            n: depth,
            q: lat.index(),
            invariant_factors: nonzero_invariant_factors(&basis),
            full_rank: true,
            generators: (0..basis.rows()).map(|i| basis.row_vec(i)).collect(),
        });
    }
    Err(OrbitError::NoStabilization { depth_cap })
}

/// HNF basis of the Z-span of a vector list; row count equals the rank.
pub fn span_basis(vectors: &[Vec<BigInt>]) -> IntMat {
    hnf(&IntMat::from_rows(vectors.to_vec()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn bi(n: i64) -> BigInt {
        BigInt::from(n)
    }

    fn random_unipotent<R: Rng>(d: usize, rng: &mut R) -> IntMat {
        let mut t = IntMat::identity(d);
        for i in 0..d {
            for j in i + 1..d {
                *t.at_mut(i, j) = bi(rng.gen_range(-3..=3));
            }
        }
        let mut g = IntMat::identity(d);
        for _ in 0..4 {
            let i = rng.gen_range(0..d);
            let mut j = rng.gen_range(0..d);
            while j == i {
                j = rng.gen_range(0..d);
            }
            let mut e = IntMat::identity(d);
            *e.at_mut(i, j) = bi(rng.gen_range(-2..=2));
            g = g.mul(&e);
        }
        let g_inv = g.inverse_unimodular().unwrap();
        g.mul(&t).mul(&g_inv)
    }

    #[test]
    fn unipotent_recognition() {
        assert!(UnipotentMat::new(IntMat::from_i64(&[&[1, 5], &[0, 1]])).is_ok());
        assert_eq!(
            UnipotentMat::new(IntMat::identity(3)).unwrap().nilpotency(),
            1
        );
        assert_eq!(
            UnipotentMat::new(IntMat::from_i64(&[&[1, 1], &[0, 1]]))
                .unwrap()
                .nilpotency(),
            2
        );
        assert_eq!(
            UnipotentMat::new(IntMat::from_i64(&[&[2, 0], &[0, 1]])),
            Err(OrbitError::NotUnipotent { size: 2 })
        );
        assert_eq!(
            UnipotentMat::new(IntMat::from_i64(&[&[1, 1], &[1, 1]])),
            Err(OrbitError::NotUnipotent { size: 2 })
        );
    }

    #[test]
    fn power_matches_iterated_multiplication() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..30 {
            let d = rng.gen_range(2..=4);
            let u = UnipotentMat::new(random_unipotent(d, &mut rng)).unwrap();
            let mut acc = IntMat::identity(d);
            for n in 0..=6i64 {
                assert_eq!(u.power(&bi(n)), acc);
                acc = acc.mul(u.matrix());
            }
            let inv = u.power(&bi(-1));
            assert_eq!(u.matrix().mul(&inv), IntMat::identity(d));
            assert_eq!(u.power(&bi(-5)).mul(&u.power(&bi(5))), IntMat::identity(d));
        }
    }

    #[test]
    fn power_poly_entries_match_power_values() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let u = UnipotentMat::new(random_unipotent(4, &mut rng)).unwrap();
        let entries = u.power_poly();
        for n in -6..=6i64 {
            let m = u.power(&bi(n));
            for i in 0..4 {
                for j in 0..4 {
                    assert_eq!(entries[i][j].eval(&bi(n)), *m.at(i, j));
                }
            }
        }
        for row in &entries {
            for p in row {
                assert!(p.degree() < u.nilpotency().max(1));
            }
        }
    }

    #[test]
    fn coords_roundtrip_and_basis_size() {
        for d in 2..=4 {
            let basis = trace_zero_basis(d);
            assert_eq!(basis.len(), trace_zero_dim(d));
            for (t, b) in basis.iter().enumerate() {
                assert!(b.trace().is_zero());
                let mut e = vec![BigInt::zero(); trace_zero_dim(d)];
                e[t] = BigInt::one();
                assert_eq!(trace_zero_coords(b).unwrap(), e);
                assert_eq!(&trace_zero_from_coords(d, &e).unwrap(), b);
            }
        }
        let m = IntMat::from_i64(&[&[3, 7], &[-2, -3]]);
        let c = trace_zero_coords(&m).unwrap();
        assert_eq!(trace_zero_from_coords(2, &c).unwrap(), m);
        assert_eq!(
            trace_zero_coords(&IntMat::identity(2)),
            Err(OrbitError::TraceNotZero)
        );
    }

    #[test]
    fn adjoint_example_and_homomorphism() {
        let e = IntMat::from_i64(&[&[1, 1], &[0, 1]]);
        let ad = adjoint_map(&e).unwrap();
        assert_eq!(
            ad,
            IntMat::from_i64(&[&[1, 0, 1], &[-2, 1, -1], &[0, 0, 1]])
        );
        assert!(UnipotentMat::new(ad).is_ok());

        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for d in 2..=3 {
            for _ in 0..10 {
                let g = random_unipotent(d, &mut rng);
                let h = random_unipotent(d, &mut rng);
                let lhs = adjoint_map(&g.mul(&h)).unwrap();
                let rhs = adjoint_map(&g).unwrap().mul(&adjoint_map(&h).unwrap());
                assert_eq!(lhs, rhs);
            }
            assert_eq!(
                adjoint_map(&IntMat::identity(d)).unwrap(),
                IntMat::identity(trace_zero_dim(d))
            );
        }
        let bad = IntMat::from_i64(&[&[2, 0], &[0, 1]]);
        assert_eq!(
            adjoint_map(&bad),
            Err(OrbitError::NotSpecialLinear { det: bi(2) })
        );
        let refl = IntMat::from_i64(&[&[1, 0], &[0, -1]]);
        assert!(matches!(
            adjoint_map(&refl),
            Err(OrbitError::NotSpecialLinear { .. })
        ));
    }

    #[test]
    fn companion_layout_and_charpoly() {
        let c = companion(&[bi(-5), bi(0)]).unwrap();
        assert_eq!(*c.matrix(), IntMat::from_i64(&[&[0, 5], &[1, 0]]));
        let c = companion(&[bi(-7), bi(2), bi(0)]).unwrap();
        assert_eq!(
            *c.matrix(),
            IntMat::from_i64(&[&[0, 0, 7], &[1, 0, -2], &[0, 1, 0]])
        );
        assert_eq!(
            companion(&[bi(1), bi(3)]),
            Err(OrbitError::NonzeroSubleadingCoeff)
        );

        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for _ in 0..20 {
            let d = rng.gen_range(2..=5);
            let c = random_companion(d, 9, &mut rng);
            let mut expected = c.coeffs().to_vec();
            expected.push(BigInt::one());
            assert_eq!(c.matrix().charpoly(), expected);
            assert!(c.matrix().trace().is_zero());
        }
    }

    #[test]
    fn gamma0_commutator_is_sample_independent() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        for d in 2..=5 {
            let samples: Vec<CompanionMatrix> =
                (0..25).map(|_| random_companion(d, 50, &mut rng)).collect();
            let v0 = gamma0_identity(d, &samples).unwrap();
            assert_eq!(v0, gamma0_commutator_pattern(d));
            assert!(v0.trace().is_zero());
        }
        assert_eq!(gamma0_identity(3, &[]), Err(OrbitError::EmptyInput));
        let wrong = vec![random_companion(2, 5, &mut ChaCha8Rng::seed_from_u64(1))];
        assert_eq!(gamma0_identity(3, &wrong), Err(OrbitError::SizeMismatch));
    }

    #[test]
    fn so21_data_checks() {
        let data = so21_setup().unwrap();
        assert_eq!(data.v0_coords, [bi(4), bi(0), bi(-4)]);
        assert_eq!(lambda_coords(&so21_a(7)).unwrap(), [bi(0), bi(2), bi(6)]);
        assert_eq!(
            lambda_coords(&IntMat::from_i64(&[&[0, 1], &[0, 0]])),
            Err(OrbitError::NotInLambda)
        );
        for g in &data.gamma_gens {
            assert!(g.det().is_one());
        }
    }

    #[test]
    fn orbit_poly_shear_example() {
        let spec = OrbitSpec::new_linear(
            vec![IntMat::from_i64(&[&[1, 1], &[0, 1]])],
            vec![bi(0), bi(1)],
        )
        .unwrap();
        let out = orbit_poly(&spec).unwrap();
        assert_eq!(out.scale, bi(6));
        let s = &out.substituted;
        assert_eq!(s.dim(), 2);
        assert_eq!(s.degree(), 3);
        assert_eq!(
            s.components()[0].integer_monomial().unwrap(),
            vec![bi(0), bi(0), bi(0), bi(1)]
        );
        assert_eq!(s.components()[1].integer_monomial().unwrap(), vec![bi(1)]);
        assert_eq!(
            out.rescaled.components()[0].integer_monomial().unwrap(),
            vec![bi(0), bi(0), bi(0), bi(216)]
        );
        let orbit = word_orbit_points(&spec, -1000, 1000);
        for n in -5..=5i64 {
            assert!(orbit.contains(&out.substituted.eval(&bi(n))));
        }
    }

    #[test]
    fn orbit_poly_adjoint_example() {
        let spec = OrbitSpec::new_adjoint(
            vec![IntMat::from_i64(&[&[1, 1], &[0, 1]])],
            IntMat::from_i64(&[&[1, -1], &[0, -1]]),
        )
        .unwrap();
        assert_eq!(spec.acting_dim(), 3);
        assert_eq!(spec.base_coords(), &[bi(1), bi(-1), bi(0)]);
        let out = orbit_poly(&spec).unwrap();
        for n in -4..=4i64 {
            let val = out.substituted.eval(&bi(n));
            let m = n.pow(4);
            assert_eq!(val, vec![bi(1), bi(-1 - 2 * m), bi(0)]);
        }
    }

    #[test]
    fn orbit_poly_zero_vector_not_fleeing() {
        let spec = OrbitSpec::new_linear(
            vec![IntMat::from_i64(&[&[1, 2], &[0, 1]])],
            vec![bi(0), bi(0)],
        )
        .unwrap();
        let out = orbit_poly(&spec).unwrap();
        assert!(out.rescaled.components().iter().all(|p| p.is_zero()));
        assert!(!crate::poly::hyperplane_fleeing(&out.rescaled));
    }

    #[test]
    fn word_orbit_points_dedup_and_bounds() {
        let spec = OrbitSpec::new_linear(
            vec![
                IntMat::from_i64(&[&[1, 1], &[0, 1]]),
                IntMat::from_i64(&[&[1, 0], &[0, 1]]),
            ],
            vec![bi(0), bi(1)],
        )
        .unwrap();
        let pts = word_orbit_points(&spec, -2, 2);
        let expected: Vec<Vec<BigInt>> = (-2..=2i64).map(|e| vec![bi(e), bi(1)]).collect();
        assert_eq!(pts, expected);
    }

    #[test]
    fn fleeing_certificate_examples() {
        let pts = vec![
            vec![bi(0), bi(0)],
            vec![bi(1), bi(0)],
            vec![bi(0), bi(1)],
        ];
        let cert = fleeing_certificate(&pts).unwrap();
        assert!(cert.full_rank);
        assert_eq!(cert.q, Index::Finite(1u32.into()));
        assert_eq!(cert.invariant_factors, vec![bi(1), bi(1)]);

        let pts = vec![
            vec![bi(5), bi(5)],
            vec![bi(7), bi(5)],
            vec![bi(5), bi(7)],
        ];
        let cert = fleeing_certificate(&pts).unwrap();
        assert_eq!(cert.q, Index::Finite(4u32.into()));

        let pts = vec![vec![bi(0), bi(0)], vec![bi(3), bi(0)]];
        let cert = fleeing_certificate(&pts).unwrap();
        assert!(!cert.full_rank);
        assert_eq!(cert.q, Index::Infinite);

        // a single point spans the zero lattice
        let cert = fleeing_certificate(&[vec![bi(7), bi(-1)]]).unwrap();
        assert_eq!(cert.n, 0);
        assert!(!cert.full_rank);
        assert_eq!(cert.q, Index::Infinite);
        assert!(cert.invariant_factors.is_empty());
        assert_eq!(fleeing_certificate(&[]), Err(OrbitError::EmptyInput));
    }

    #[test]
    fn companion_bound_certificates_are_frozen_and_sample_independent() {
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        let mut certs = Vec::new();
        for seed in [1u64, 2] {
            let mut r2 = ChaCha8Rng::seed_from_u64(seed);
            let samples: Vec<CompanionMatrix> =
                (0..5).map(|_| random_companion(2, 40, &mut r2)).collect();
            certs.push(certify_companion_bounds(2, 4, &samples).unwrap());
        }
        assert_eq!(certs[0], certs[1]);
        assert_eq!(certs[0].n, 1);
        assert_eq!(certs[0].q, Index::Finite(2u32.into()));
        assert_eq!(certs[0].invariant_factors, vec![bi(1), bi(1), bi(2)]);

        let samples: Vec<CompanionMatrix> =
            (0..5).map(|_| random_companion(3, 40, &mut rng)).collect();
        let cert = certify_companion_bounds(3, 4, &samples).unwrap();
        assert_eq!(cert.n, 2);
        assert_eq!(cert.q, Index::Finite(1u32.into()));
        assert!(cert.full_rank);
    }
}
