//! Exact finite models of measure-preserving Z^r actions on finite abelian
//! groups: ergodic components, equidistribution, the measure-increment
//! algorithm, spectral projections, and recurrence experiments. All densities
//! and averages are exact rationals.

use crate::bitset::BitSet;
use crate::expsum::{lcm_upto_mod, qbound, qbound_threshold, ExpsumError};
use crate::hiprec::{Cdd, Dd};
use crate::linalg::Index;
use crate::poly::{hyperplane_fleeing, mult_complexity, IntValuedPoly, PolyVec};
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use rayon::prelude::*;
use std::collections::HashSet;

pub const DEFAULT_GROUP_CAP: u64 = 1 << 24;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum SystemsError {
    #[error("zero modulus")]
    ZeroModulus,
    #[error("group of size {size} exceeds the cap {cap}")]
    GroupTooLarge { size: u128, cap: u64 },
    #[error("generator arity does not match the moduli")]
    SizeMismatch,
    #[error("set is empty")]
    EmptySet,
    #[error("delta must be positive")]
    NonPositiveDelta,
    #[error("eps must lie in (0, 1)")]
    EpsOutOfRange,
    #[error("system is not ergodic")]
    NotErgodic,
    #[error("polynomial arity {got} does not match the action rank {expected}")]
    WrongRank { expected: usize, got: usize },
    #[error("polynomial has non-integer coefficients")]
    NonIntegerPoly,
    #[error("set density is below the experiment's eps floor")]
    DensityBelowEps,
    #[error("family member {member} violates its declared complexity or fleeing contract")]
    ComplexityViolation { member: usize },
    #[error("shift polynomial must have degree >= 2 and zero constant term")]
    InvalidShiftPolynomial,
    #[error("{boosts} density boosts exceed the termination bound {bound}")]
    StageOverflow { boosts: usize, bound: usize },
    #[error("no disjoint shift exists for k = {k}")]
    NoDisjointShift { k: u64 },
    #[error(transparent)]
    Expsum(#[from] ExpsumError),
}

/// Z^r acting on G = Z/m_1 x .. x Z/m_s by translations: generator i
/// translates by Phi(e_i) = gens[i]. Elements are mixed-radix indices with
/// the first coordinate fastest.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteSystem {
    moduli: Vec<u64>,
    gens: Vec<Vec<u64>>,
    size: u64,
}

impl FiniteSystem {
    pub fn new(moduli: Vec<u64>, gens: Vec<Vec<u64>>) -> Result<Self, SystemsError> {
        if moduli.is_empty() || moduli.iter().any(|m| *m == 0) {
            return Err(SystemsError::ZeroModulus);
        }
        let mut size: u128 = 1;
        for m in &moduli {
            size *= *m as u128;
            if size > DEFAULT_GROUP_CAP as u128 {
                return Err(SystemsError::GroupTooLarge {
                    size,
                    cap: DEFAULT_GROUP_CAP,
                });
            }
        }
        if gens.is_empty() || gens.iter().any(|g| g.len() != moduli.len()) {
            return Err(SystemsError::SizeMismatch);
        }
        let gens = gens
            .into_iter()
            .map(|g| g.iter().zip(&moduli).map(|(x, m)| x % m).collect())
            .collect();
        Ok(FiniteSystem {
            moduli,
            gens,
            size: size as u64,
        })
    }

    pub fn cyclic(m: u64, step: u64) -> Result<Self, SystemsError> {
        FiniteSystem::new(vec![m], vec![vec![step]])
    }

    pub fn grid(m1: u64, m2: u64) -> Result<Self, SystemsError> {
        FiniteSystem::new(vec![m1, m2], vec![vec![1, 0], vec![0, 1]])
    }

    pub fn moduli(&self) -> &[u64] {
        &self.moduli
    }

    pub fn generators(&self) -> &[Vec<u64>] {
        &self.gens
    }

    pub fn size(&self) -> u64 {
        self.size
    }

    pub fn rank(&self) -> usize {
        self.gens.len()
    }

    /// lcm of the moduli; every translation has order dividing it.
    pub fn exponent(&self) -> u64 {
        self.moduli.iter().fold(1, |l, m| l.lcm(m))
    }

    pub fn encode(&self, coords: &[u64]) -> u64 {
        debug_assert_eq!(coords.len(), self.moduli.len());
        let mut idx = 0u64;
        for (x, m) in coords.iter().zip(&self.moduli).rev() {
            debug_assert!(x < m);
            idx = idx * m + x;
        }
        idx
    }

    pub fn decode(&self, mut idx: u64) -> Vec<u64> {
        let mut coords = Vec::with_capacity(self.moduli.len());
        for m in &self.moduli {
            coords.push(idx % m);
            idx /= m;
        }
        coords
    }

    pub fn add_indices(&self, a: u64, b: u64) -> u64 {
        let ca = self.decode(a);
        let cb = self.decode(b);
        let sum: Vec<u64> = ca
            .iter()
            .zip(&cb)
            .zip(&self.moduli)
            .map(|((x, y), m)| (x + y) % m)
            .collect();
        self.encode(&sum)
    }

    /// Scalar reduced against each modulus.
    pub fn scalar_mod(&self, k: &BigUint) -> Vec<u64> {
        self.moduli
            .iter()
            .map(|m| (k % BigUint::from(*m)).to_u64().expect("below modulus"))
            .collect()
    }

    /// Phi(v) for an integer vector of length r.
    pub fn phi(&self, v: &[BigInt]) -> u64 {
        assert_eq!(v.len(), self.gens.len());
        let coords: Vec<u64> = self
            .moduli
            .iter()
            .enumerate()
            .map(|(j, m)| {
                let mj = BigInt::from(*m);
                let mut acc: u128 = 0;
                for (vi, g) in v.iter().zip(&self.gens) {
                    let r = vi.mod_floor(&mj).to_u64().expect("below modulus");
                    acc = (acc + r as u128 * g[j] as u128) % *m as u128;
                }
                acc as u64
            })
            .collect();
        self.encode(&coords)
    }

    /// Phi(k * v).
    pub fn phi_scaled(&self, k: &BigUint, v: &[BigInt]) -> u64 {
        let k_int = BigInt::from(k.clone());
        let kv: Vec<BigInt> = v.iter().map(|x| x * &k_int).collect();
        self.phi(&kv)
    }

    /// Phi(kZ^r) for a scalar given per-modulus, as sorted element indices.
    pub fn subgroup_for_scalar(&self, k_mod: &[u64]) -> Vec<u64> {
        assert_eq!(k_mod.len(), self.moduli.len());
        let gen_indices: Vec<u64> = self
            .gens
            .iter()
            .map(|g| {
                let coords: Vec<u64> = g
                    .iter()
                    .zip(k_mod)
                    .zip(&self.moduli)
                    .map(|((gj, kj), m)| ((*gj as u128 * *kj as u128) % *m as u128) as u64)
                    .collect();
                self.encode(&coords)
            })
            .collect();
        let mut seen = BitSet::new(self.size as usize);
        seen.set(0);
        let mut queue = vec![0u64];
        let mut head = 0;
        while head < queue.len() {
            let x = queue[head];
            head += 1;
            for g in &gen_indices {
                let y = self.add_indices(x, *g);
                if !seen.get(y as usize) {
                    seen.set(y as usize);
                    queue.push(y);
                }
            }
        }
        queue.sort_unstable();
        queue
    }

    pub fn subgroup(&self, k: &BigUint) -> Vec<u64> {
        self.subgroup_for_scalar(&self.scalar_mod(k))
    }

    /// Ergodic iff Phi is surjective.
    pub fn is_ergodic(&self) -> bool {
        self.subgroup(&BigUint::one()).len() as u64 == self.size
    }
}

/// Membership set with exact uniform measure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MeasSet {
    bits: BitSet,
    card: u64,
}

impl MeasSet {
    pub fn from_indices(size: u64, indices: impl IntoIterator<Item = u64>) -> Self {
        let bits = BitSet::from_indices(size as usize, indices.into_iter().map(|i| i as usize));
        let card = bits.count() as u64;
        MeasSet { bits, card }
    }

    pub fn full(size: u64) -> Self {
        MeasSet::from_indices(size, 0..size)
    }

    /// Members selected by a predicate on coordinates.
    pub fn filter(sys: &FiniteSystem, pred: impl Fn(&[u64]) -> bool) -> Self {
        MeasSet::from_indices(sys.size(), (0..sys.size()).filter(|i| pred(&sys.decode(*i))))
    }

    /// Exactly `card` distinct members chosen by Floyd's sampling.
    pub fn sample_exact<R: Rng>(size: u64, card: u64, rng: &mut R) -> Self {
        assert!(card <= size);
        let mut chosen = HashSet::new();
        for j in size - card..size {
            let t = rng.gen_range(0..=j);
            if !chosen.insert(t) {
                chosen.insert(j);
            }
        }
        MeasSet::from_indices(size, chosen)
    }

    pub fn size(&self) -> u64 {
        self.bits.len() as u64
    }

    pub fn cardinality(&self) -> u64 {
        self.card
    }

    pub fn measure(&self) -> BigRational {
        BigRational::new(BigInt::from(self.card), BigInt::from(self.size()))
    }

    pub fn contains(&self, i: u64) -> bool {
        self.bits.get(i as usize)
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        self.bits.iter_ones().map(|i| i as u64)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Coset {
    pub rep: u64,
    pub members: Vec<u64>,
}

fn cosets_within(sys: &FiniteSystem, subgroup: &[u64], parent: Option<&[u64]>) -> Vec<Coset> {
    let mut visited = BitSet::new(sys.size() as usize);
    let mut out = Vec::new();
    let scan = |g: u64, out: &mut Vec<Coset>, visited: &mut BitSet| {
        if visited.get(g as usize) {
            return;
        }
        let mut members: Vec<u64> = subgroup.iter().map(|h| sys.add_indices(g, *h)).collect();
        members.sort_unstable();
        for m in &members {
            visited.set(*m as usize);
        }
        out.push(Coset { rep: g, members });
    };
    match parent {
        Some(p) => {
            for g in p {
                scan(*g, &mut out, &mut visited);
            }
        }
        None => {
            for g in 0..sys.size() {
                scan(g, &mut out, &mut visited);
            }
        }
    }
    out
}

/// Components of T^k: the cosets of Phi(kZ^r), in least-representative order.
pub fn ergodic_components(sys: &FiniteSystem, k: &BigUint) -> Vec<Coset> {
    cosets_within(sys, &sys.subgroup(k), None)
}

fn count_in(b: &MeasSet, members: &[u64]) -> u64 {
    members.iter().filter(|m| b.contains(**m)).count() as u64
}

fn density_in(b: &MeasSet, members: &[u64]) -> BigRational {
    BigRational::new(
        BigInt::from(count_in(b, members)),
        BigInt::from(members.len() as u64),
    )
}

#[derive(Clone, Debug, PartialEq)]
pub struct EquidistReport {
    pub equidistributed: bool,
    pub worst_ratio: BigRational,
    pub witness_rep: u64,
}

fn equidist_over(
    b: &MeasSet,
    base_density: &BigRational,
    cosets: &[Coset],
    delta: &BigRational,
) -> EquidistReport {
    let mut worst = BigRational::zero();
    let mut witness = cosets[0].rep;
    for c in cosets {
        let d = density_in(b, &c.members);
        if d > worst {
            worst = d;
            witness = c.rep;
        }
    }
    let worst_ratio = &worst / base_density;
    EquidistReport {
        equidistributed: worst_ratio <= BigRational::one() + delta,
        worst_ratio,
        witness_rep: witness,
    }
}

/// Max component density of B over the components of T^q against (1+delta)
/// times its global density.
pub fn equidist_check(
    sys: &FiniteSystem,
    b: &MeasSet,
    q: &BigUint,
    delta: &BigRational,
) -> Result<EquidistReport, SystemsError> {
    if b.cardinality() == 0 {
        return Err(SystemsError::EmptySet);
    }
    if delta.is_negative() {
        return Err(SystemsError::NonPositiveDelta);
    }
    let comps = ergodic_components(sys, q);
    Ok(equidist_over(b, &b.measure(), &comps, delta))
}

#[derive(Clone, Debug, PartialEq)]
pub struct IncrementStep {
    pub q: BigUint,
    pub component_rep: u64,
    pub density: BigRational,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IncrementTrace {
    pub steps: Vec<IncrementStep>,
    pub k: BigUint,
    pub initial_density: BigRational,
    pub final_density: BigRational,
    pub final_component: Coset,
}

/// Refine to components of T^{q^j} until the restricted set is
/// (q,delta)-equidistributed, boosting density by >= (1+delta) each step;
/// k = q^J. Among violating components the densest wins, ties to the least
/// representative.
pub fn measure_increment(
    sys: &FiniteSystem,
    b: &MeasSet,
    q: &BigUint,
    delta: &BigRational,
) -> Result<IncrementTrace, SystemsError> {
    if b.cardinality() == 0 {
        return Err(SystemsError::EmptySet);
    }
    if !delta.is_positive() {
        return Err(SystemsError::NonPositiveDelta);
    }
    let initial = b.measure();
    let mut comp = Coset {
        rep: 0,
        members: (0..sys.size()).collect(),
    };
    let mut nu = initial.clone();
    let mut k = BigUint::one();
    let mut steps = Vec::new();
    let threshold = BigRational::one() + delta;
    loop {
        let k_next = &k * q;
        let h = sys.subgroup(&k_next);
        let cosets = cosets_within(sys, &h, Some(&comp.members));
        let mut best: Option<(usize, BigRational)> = None;
        for (i, c) in cosets.iter().enumerate() {
            let d = density_in(b, &c.members);
            if best.as_ref().map_or(true, |(_, bd)| d > *bd) {
                best = Some((i, d));
            }
        }
        let (best_idx, best_density) = best.expect("component is nonempty");
        if best_density <= &threshold * &nu {
            break;
        }
        comp = cosets[best_idx].clone();
        nu = best_density;
        k = k_next;
        steps.push(IncrementStep {
            q: q.clone(),
            component_rep: comp.rep,
            density: nu.clone(),
        });
    }
    Ok(IncrementTrace {
        steps,
        k,
        initial_density: initial,
        final_density: nu,
        final_component: comp,
    })
}

#[derive(Clone, Debug)]
pub struct CharCoeff {
    pub t: Vec<u64>,
    pub coeff: Cdd,
}

#[derive(Clone, Debug)]
pub struct SpectralReport {
    /// DFT route: sum of |coefficient|^2 over nontrivial characters with
    /// chi^q = 1.
    pub norm_sq: Dd,
    pub norm: f64,
    pub coefficients: Vec<CharCoeff>,
    /// Coset-density route: ||P_{T^q} 1_B||^2 - mu(B)^2, exactly.
    pub exact_norm_sq: BigRational,
}

/// L2 norm of the projection of 1_B - mu(B) onto the span of the characters
/// chi with chi^q = 1, by both the Fourier and the component-density route.
pub fn spectral_projection_norm(
    sys: &FiniteSystem,
    b: &MeasSet,
    q: &BigUint,
) -> Result<SpectralReport, SystemsError> {
    if !sys.is_ergodic() {
        return Err(SystemsError::NotErgodic);
    }
    let size = sys.size();
    let mu = b.measure();
    let comps = ergodic_components(sys, q);
    let mut proj_sq = BigRational::zero();
    for c in &comps {
        let d = density_in(b, &c.members);
        let w = BigRational::new(BigInt::from(c.members.len() as u64), BigInt::from(size));
        proj_sq += w * &d * &d;
    }
    let exact_norm_sq = proj_sq - &mu * &mu;

    // chi_t^q = 1 iff each t_j is a multiple of m_j / gcd(q, m_j).
    let steps: Vec<(u64, u64)> = sys
        .moduli
        .iter()
        .map(|m| {
            let g = (q % BigUint::from(*m)).to_u64().expect("below modulus").gcd(m);
            (m / g, g)
        })
        .collect();
    let ell = sys.exponent();
    let members: Vec<Vec<u64>> = b.iter().map(|i| sys.decode(i)).collect();
    let mut coefficients = Vec::new();
    let mut norm_sq = Dd::ZERO;
    let mut t_idx = vec![0u64; sys.moduli.len()];
    'outer: loop {
        let t: Vec<u64> = t_idx
            .iter()
            .zip(&steps)
            .map(|(i, (step, _))| i * step)
            .collect();
        if t.iter().any(|v| *v != 0) {
            let mut sum = Cdd::ZERO;
            for coords in &members {
                let mut num: u128 = 0;
                for ((tj, xj), m) in t.iter().zip(coords).zip(&sys.moduli) {
                    num = (num + *tj as u128 * *xj as u128 % *m as u128 * (ell / m) as u128)
                        % ell as u128;
                }
                // conjugate character: phase -num/ell
                let frac = Dd::from_ratio((ell as u128 - num) as i64 % ell as i64, ell as i64);
                sum = sum.add(Cdd::unit_phase(frac));
            }
            let coeff = sum.scale(Dd::from_ratio(1, size as i64));
            norm_sq = norm_sq + coeff.re * coeff.re + coeff.im * coeff.im;
            coefficients.push(CharCoeff { t, coeff });
        }
        for j in 0..t_idx.len() {
            t_idx[j] += 1;
            if t_idx[j] < steps[j].1 {
                continue 'outer;
            }
            t_idx[j] = 0;
        }
        break;
    }
    Ok(SpectralReport {
        norm: norm_sq.sqrt().to_f64(),
        norm_sq,
        coefficients,
        exact_norm_sq,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct DeviationReport {
    pub norm_sq: BigRational,
    pub norm: f64,
}

/// Exact || mu(B) - (1/N) sum_{n=1}^N T^{kP(n)} 1_B ||_2.
pub fn mean_ergodic_deviation(
    sys: &FiniteSystem,
    b: &MeasSet,
    p: &PolyVec,
    k: &BigUint,
    n_max: u64,
) -> Result<DeviationReport, SystemsError> {
    if p.dim() != sys.rank() {
        return Err(SystemsError::WrongRank {
            expected: sys.rank(),
            got: p.dim(),
        });
    }
    if !p.has_integer_coeffs() {
        return Err(SystemsError::NonIntegerPoly);
    }
    assert!(n_max >= 1 && n_max <= u32::MAX as u64);
    let size = sys.size();
    let mut counts = vec![0u32; size as usize];
    for n in 1..=n_max {
        let shift = sys.phi_scaled(k, &p.eval(&BigInt::from(n)));
        for x in b.iter() {
            counts[sys.add_indices(x, shift) as usize] += 1;
        }
    }
    // h(x) = (|B| N - counts[x] |G|) / (|G| N)
    let bn = b.cardinality() as i128 * n_max as i128;
    let mut sum_sq: i128 = 0;
    for c in &counts {
        let d = bn - *c as i128 * size as i128;
        sum_sq += d * d;
    }
    let denom = BigInt::from(size).pow(3) * BigInt::from(n_max).pow(2);
    let norm_sq = BigRational::new(BigInt::from(sum_sq), denom);
    Ok(DeviationReport {
        norm: norm_sq.to_f64().unwrap_or(f64::NAN).sqrt(),
        norm_sq,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct RecurrenceReport {
    pub points: Vec<(i64, BigRational)>,
}

impl RecurrenceReport {
    /// Highest intersection measure, ties to the earliest n.
    pub fn best(&self) -> Option<&(i64, BigRational)> {
        self.points
            .iter()
            .reduce(|a, b| if b.1 > a.1 { b } else { a })
    }

    pub fn first_positive(&self) -> Option<&(i64, BigRational)> {
        self.points.iter().find(|(_, m)| m.is_positive())
    }
}

/// mu(B intersect T^{kP(n)} B) for each n in [n_lo, n_hi], exactly.
pub fn recurrence_search(
    sys: &FiniteSystem,
    b: &MeasSet,
    p: &PolyVec,
    k: &BigUint,
    n_lo: i64,
    n_hi: i64,
) -> Result<RecurrenceReport, SystemsError> {
    if p.dim() != sys.rank() {
        return Err(SystemsError::WrongRank {
            expected: sys.rank(),
            got: p.dim(),
        });
    }
    let size = sys.size();
    let points: Vec<(i64, BigRational)> = (n_lo..=n_hi)
        .into_par_iter()
        .map(|n| {
            let shift = sys.phi_scaled(k, &p.eval(&BigInt::from(n)));
            let hits = b.iter().filter(|x| b.contains(sys.add_indices(*x, shift))).count();
            (
                n,
                BigRational::new(BigInt::from(hits as u64), BigInt::from(size)),
            )
        })
        .collect();
    Ok(RecurrenceReport { points })
}

pub struct FamilyMember {
    pub poly: PolyVec,
    pub declared_degree: u32,
    pub declared_complexity: BigUint,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MemberOutcome {
    pub best: Option<(i64, BigRational)>,
    pub satisfied: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SarkozyReport {
    pub q0: u64,
    pub q: BigUint,
    pub delta: BigRational,
    pub k: BigUint,
    pub trace: IncrementTrace,
    pub outcomes: Vec<MemberOutcome>,
    pub success: bool,
}

/// One k for the whole family: run the measure increment at
/// q = qbound(D, r, Q, eps^2/2) and delta = eps^4/12, then verify a positive
/// return along every member at the resulting k.
pub fn uniform_sarkozy_experiment(
    sys: &FiniteSystem,
    b: &MeasSet,
    family: &[FamilyMember],
    eps: &BigRational,
    c: &BigRational,
    q0_cap: u64,
    n_scan: u64,
) -> Result<SarkozyReport, SystemsError> {
    if family.is_empty() {
        return Err(SystemsError::EmptySet);
    }
    if !eps.is_positive() || *eps >= BigRational::one() {
        return Err(SystemsError::EpsOutOfRange);
    }
    for (i, member) in family.iter().enumerate() {
        if member.poly.dim() != sys.rank() {
            return Err(SystemsError::WrongRank {
                expected: sys.rank(),
                got: member.poly.dim(),
            });
        }
        let ok = member.poly.has_integer_coeffs()
            && member.poly.degree() as u32 <= member.declared_degree
            && hyperplane_fleeing(&member.poly)
            && match mult_complexity(&member.poly) {
                Index::Finite(q) => q <= member.declared_complexity,
                Index::Infinite => false,
            };
        if !ok {
            return Err(SystemsError::ComplexityViolation { member: i });
        }
    }
    if b.measure() < *eps {
        return Err(SystemsError::DensityBelowEps);
    }
    let d_star = family.iter().map(|m| m.declared_degree).max().unwrap().max(1);
    let q_star = family
        .iter()
        .map(|m| m.declared_complexity.clone())
        .max()
        .unwrap();
    let eps_q = eps * eps / BigRational::from_integer(2.into());
    let delta = eps.pow(4) / BigRational::from_integer(12.into());
    let qb = qbound(d_star, sys.rank(), &q_star, &eps_q, c, q0_cap)?;
    let trace = measure_increment(sys, b, &qb.q, &delta)?;
    let mut outcomes = Vec::new();
    let mut success = true;
    for member in family {
        let rec = recurrence_search(sys, b, &member.poly, &trace.k, 1, n_scan as i64)?;
        let best = rec.best().cloned();
        let satisfied = best.as_ref().is_some_and(|(_, m)| m.is_positive());
        success &= satisfied;
        outcomes.push(MemberOutcome { best, satisfied });
    }
    Ok(SarkozyReport {
        q0: qb.q0,
        q: qb.q,
        delta,
        k: trace.k.clone(),
        trace,
        outcomes,
        success,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct RemarkReport {
    pub modulus: u64,
    pub b_card: u64,
    /// (k, least a0) with B + k*a0 disjoint from B.
    pub per_k: Vec<(u64, u64)>,
}

/// The unbounded-coefficient counterexample on Z/(m k0) with B = {0..m}:
/// every k <= k0 admits a shift k*a0 separating B from itself.
pub fn remark_counterexample(m: u64, k0: u64) -> Result<RemarkReport, SystemsError> {
    assert!(m >= 1 && k0 >= 1);
    let modulus = m
        .checked_mul(k0)
        .filter(|g| *g <= DEFAULT_GROUP_CAP)
        .ok_or(SystemsError::GroupTooLarge {
            size: m as u128 * k0 as u128,
            cap: DEFAULT_GROUP_CAP,
        })?;
    let top = m.min(modulus - 1);
    let disjoint = |shift: u64| (0..=top).all(|x| (x + shift) % modulus > top);
    let mut per_k = Vec::new();
    for k in 1..=k0 {
        let a0 = (0..modulus)
            .find(|a0| disjoint(k * a0 % modulus))
            .ok_or(SystemsError::NoDisjointShift { k })?;
        per_k.push((k, a0));
    }
    Ok(RemarkReport {
        modulus,
        b_card: top + 1,
        per_k,
    })
}

/// (c - k^{-1}R(kn), n) as an integer polynomial vector; the degree-j
/// coefficient of the first component is -a_j k^{j-1}.
pub fn bog_shifted_poly(r_coeffs: &[BigInt], k: &BigInt, c: &BigInt) -> PolyVec {
    assert!(r_coeffs.first().map(|a| a.is_zero()).unwrap_or(true));
    let mut first = vec![c.clone()];
    let mut k_pow = BigInt::one();
    for (j, a) in r_coeffs.iter().enumerate().skip(1) {
        if j >= 2 {
            k_pow *= k;
        }
        first.push(-(a * &k_pow));
    }
    PolyVec::new(vec![
        IntValuedPoly::from_integer_monomial(&first),
        IntValuedPoly::from_integer_monomial(&[BigInt::zero(), BigInt::one()]),
    ])
}

#[derive(Clone, Debug, PartialEq)]
pub struct BogStage {
    pub q0: BigUint,
    pub q_mods: Vec<u64>,
    pub worst_ratio: BigRational,
    pub passed: bool,
    pub component_rep: u64,
    pub density: BigRational,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BogReport {
    pub r_d: BigUint,
    pub delta: BigRational,
    pub boost_bound: usize,
    pub stages: Vec<BogStage>,
    pub k: BigUint,
    /// Per residue target c: best recurrence point along (c - k^{-1}R(kn), n).
    pub verification: Vec<(u64, Option<(i64, BigRational)>)>,
    pub success: bool,
}

/// Least J with (1+delta)^J >= 1/eps, exactly.
fn boost_bound(eps: &BigRational, delta: &BigRational) -> usize {
    let target = eps.recip();
    let step = BigRational::one() + delta;
    let mut pow = BigRational::one();
    let mut j = 0;
    while pow < target {
        pow *= &step;
        j += 1;
    }
    j
}

/// Stagewise Bogolyubov loop on a rank-2 system: at stage j test
/// (q_j, delta)-equidistribution with q_j = qbound(D, 2, r_D k^D, eps^2/2)
/// against the current component (k = product of the consumed q's); a failed
/// test boosts density and multiplies k by q_j. The test needs q_j only
/// modulo the group exponent, so q_j is materialized (capped) only when
/// consumed. On success, every residue target c must admit a recurrence
/// point along (c - k^{-1}R(kn), n).
pub fn bogolyubov_iterate(
    sys: &FiniteSystem,
    b: &MeasSet,
    r_coeffs: &[BigInt],
    eps: &BigRational,
    c: &BigRational,
    materialize_cap: u64,
    n_scan: u64,
) -> Result<BogReport, SystemsError> {
    if sys.rank() != 2 {
        return Err(SystemsError::WrongRank {
            expected: 2,
            got: sys.rank(),
        });
    }
    if b.cardinality() == 0 {
        return Err(SystemsError::EmptySet);
    }
    if !eps.is_positive() || *eps >= BigRational::one() {
        return Err(SystemsError::EpsOutOfRange);
    }
    let deg = r_coeffs.len().saturating_sub(1);
    if deg < 2
        || r_coeffs[deg].is_zero()
        || !r_coeffs[0].is_zero()
    {
        return Err(SystemsError::InvalidShiftPolynomial);
    }
    let r_d = match mult_complexity(&bog_shifted_poly(r_coeffs, &BigInt::one(), &BigInt::zero())) {
        Index::Finite(v) => v,
        Index::Infinite => return Err(SystemsError::InvalidShiftPolynomial),
    };
    let d = deg as u32;
    let eps_q = eps * eps / BigRational::from_integer(2.into());
    let delta = eps.pow(4) / BigRational::from_integer(12.into());
    let bound = boost_bound(eps, &delta);
    let threshold = BigRational::one() + &delta;

    let mut comp = Coset {
        rep: 0,
        members: (0..sys.size()).collect(),
    };
    let mut nu = b.measure();
    let mut k_factors: Vec<BigUint> = Vec::new();
    let mut k_mods: Vec<u64> = sys.moduli.iter().map(|m| 1 % m).collect();
    let mut stages = Vec::new();
    let mut boosts = 0;
    loop {
        let k_prod = k_factors.iter().fold(BigUint::one(), |acc, f| acc * f);
        let q_cap_j = &r_d * k_prod.pow(d);
        let q0_j = qbound_threshold(d, &q_cap_j, &eps_q, c);
        let q_mods: Vec<u64> = sys.moduli.iter().map(|m| lcm_upto_mod(&q0_j, *m)).collect();
        let combined: Vec<u64> = k_mods
            .iter()
            .zip(&q_mods)
            .zip(&sys.moduli)
            .map(|((k, q), m)| ((*k as u128 * *q as u128) % *m as u128) as u64)
            .collect();
        let h = sys.subgroup_for_scalar(&combined);
        let cosets = cosets_within(sys, &h, Some(&comp.members));
        let mut best: Option<(usize, BigRational)> = None;
        for (i, cs) in cosets.iter().enumerate() {
            let dens = density_in(b, &cs.members);
            if best.as_ref().map_or(true, |(_, bd)| dens > *bd) {
                best = Some((i, dens));
            }
        }
        let (best_idx, best_density) = best.expect("component is nonempty");
        let ratio = &best_density / &nu;
        if ratio <= threshold {
            stages.push(BogStage {
                q0: q0_j,
                q_mods,
                worst_ratio: ratio,
                passed: true,
                component_rep: comp.rep,
                density: nu.clone(),
            });
            break;
        }
        boosts += 1;
        if boosts > bound {
            return Err(SystemsError::StageOverflow { boosts, bound });
        }
        // The failed stage's q becomes a factor of k and must materialize.
        let qb = qbound(d, 2, &q_cap_j, &eps_q, c, materialize_cap)?;
        debug_assert_eq!(BigUint::from(qb.q0), q0_j);
        comp = cosets[best_idx].clone();
        nu = best_density;
        stages.push(BogStage {
            q0: q0_j,
            q_mods,
            worst_ratio: ratio,
            passed: false,
            component_rep: comp.rep,
            density: nu.clone(),
        });
        k_factors.push(qb.q);
        k_mods = combined;
    }
    let k = k_factors.iter().fold(BigUint::one(), |acc, f| acc * f);

    // P_{k,c}(n) = (kc - R(kn), kn); each group coordinate only needs the
    // components mod m_j, so k enters through k mod m_j.
    let exponent = sys.exponent();
    let k_mod_vals: Vec<u64> = sys.scalar_mod(&k);
    let r_mod: Vec<Vec<u64>> = sys
        .moduli
        .iter()
        .map(|m| {
            let mj = BigInt::from(*m);
            r_coeffs
                .iter()
                .map(|a| a.mod_floor(&mj).to_u64().expect("below modulus"))
                .collect()
        })
        .collect();
    let shift_index = |target: u64, n: u64| -> u64 {
        let coords: Vec<u64> = sys
            .moduli
            .iter()
            .enumerate()
            .map(|(j, m)| {
                let m = *m as u128;
                let km = k_mod_vals[j] as u128;
                let kc = km * (target as u128 % m) % m;
                let kn = km * (n as u128 % m) % m;
                let r_val = r_mod[j]
                    .iter()
                    .rev()
                    .fold(0u128, |acc, a| (acc * kn + *a as u128) % m);
                let p1 = (kc + m - r_val) % m;
                ((p1 * sys.gens[0][j] as u128 + kn * sys.gens[1][j] as u128) % m) as u64
            })
            .collect();
        sys.encode(&coords)
    };
    let mut verification = Vec::new();
    let mut success = true;
    for target in 0..exponent {
        let mut best: Option<(i64, BigRational)> = None;
        for n in 0..n_scan {
            let shift = shift_index(target, n);
            let hits = b
                .iter()
                .filter(|x| b.contains(sys.add_indices(*x, shift)))
                .count();
            if hits > 0 {
                let measure =
                    BigRational::new(BigInt::from(hits as u64), BigInt::from(sys.size()));
                if best.as_ref().map_or(true, |(_, bm)| measure > *bm) {
                    best = Some((n as i64, measure));
                }
            }
        }
        success &= best.is_some();
        verification.push((target, best));
    }
    Ok(BogReport {
        r_d,
        delta,
        boost_bound: bound,
        stages,
        k,
        verification,
        success,
    })
}
