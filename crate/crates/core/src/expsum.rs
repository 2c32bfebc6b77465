//! Characters of Z^r and complete polynomial exponential sums.
//!
//! Sums are evaluated by exact residue counting: the phase numerators
//! a.P(n) mod q are tallied first, then the count vector is contracted
//! against one table of q-th roots of unity in double-double precision. No
//! floating-point value ever enters a phase computation.

use crate::hiprec::{Cdd, Dd};
use crate::linalg::Index;
use crate::poly::PolyVec;
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ExpsumError {
    #[error("q0 = {q0} exceeds the configured cap {cap}; lcm(1..q0) would be astronomical")]
    QBoundCapExceeded { q0: u64, cap: u64 },
}

/// Character chi(x) = e(a.x / q), stored in canonical reduced form:
/// gcd(a_1, ..., a_r, q) = 1, so the image has exactly q elements.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Character {
    q: u64,
    a: Vec<u64>,
}

impl Character {
    /// Reduces (q, a) by g = gcd(a, q); the resulting character is the same
    /// function on Z^r with exact image cardinality q/g.
    pub fn new(q: u64, a: &[i64]) -> Character {
        assert!(q >= 1);
        assert!(!a.is_empty());
        let reduced: Vec<u64> = a.iter().map(|&x| (x.rem_euclid(q as i64)) as u64).collect();
        let mut g = q;
        for &x in &reduced {
            g = g.gcd(&x);
        }
        if g <= 1 {
            return Character { q, a: reduced };
        }
        Character { q: q / g, a: reduced.iter().map(|x| x / g).collect() }
    }

    pub fn modulus(&self) -> u64 {
        self.q
    }

    pub fn residues(&self) -> &[u64] {
        &self.a
    }
}

/// Result of one complete character sum (1/q) sum_{n=1}^q chi(P(n)).
#[derive(Clone, Debug)]
pub struct SumReport {
    pub q: u64,
    pub value: Cdd,
    pub magnitude: Dd,
    /// gcd of the nonconstant coefficients of a.P with q.
    pub q_prime: u64,
    pub reduced_modulus: u64,
}

fn twiddles(q: u64) -> Vec<Cdd> {
    (0..q).map(|m| Cdd::unit_phase(Dd::from_ratio(m as i64, q as i64))).collect()
}

/// Phase-count vector: counts[m] = #{n in [1,q] : a.P(n) = m mod q}.
fn phase_counts(chi: &Character, p: &PolyVec) -> Vec<u64> {
    let q = chi.q;
    assert_eq!(chi.a.len(), p.dim(), "character dimension must match P");
    let qb = BigInt::from(q);
    // Single phase polynomial f = sum a_i P_i, coefficients reduced mod q.
    let mut coeffs_mod: Vec<u64> = Vec::new();
    for (i, comp) in p.components().iter().enumerate() {
        let mono = comp.integer_monomial().expect("char_sum needs integer coefficients");
        if coeffs_mod.len() < mono.len() {
            coeffs_mod.resize(mono.len(), 0);
        }
        let ai = BigInt::from(chi.a[i]);
        for (j, c) in mono.iter().enumerate() {
            let add = (c * &ai).mod_floor(&qb).to_u64().unwrap();
            coeffs_mod[j] = ((coeffs_mod[j] as u128 + add as u128) % q as u128) as u64;
        }
    }
    let mut counts = vec![0u64; q as usize];
    for n in 1..=q {
        // Horner mod q; q <= ~2^32 keeps every product inside u128.
        let mut acc = 0u128;
        for &c in coeffs_mod.iter().rev() {
            acc = (acc * n as u128 + c as u128) % q as u128;
        }
        counts[acc as usize] += 1;
    }
    counts
}

fn sum_from_counts(q: u64, counts: &[u64], tw: &[Cdd]) -> (Cdd, Dd) {
    let mut acc = Cdd::ZERO;
    for (m, &c) in counts.iter().enumerate() {
        if c > 0 {
            acc = acc.add(tw[m].scale(Dd::from_i64(c as i64)));
        }
    }
    let value = Cdd {
        re: acc.re.div_f64(q as f64),
        im: acc.im.div_f64(q as f64),
    };
    (value, value.magnitude())
}

/// gcd of the nonconstant coefficients of the phase polynomial a.P with q.
fn phase_gcd(chi: &Character, p: &PolyVec) -> u64 {
    let mut g = BigInt::from(chi.q);
    let degree = p.degree();
    for j in 1..=degree {
        let mut b = BigInt::zero();
        for (i, comp) in p.components().iter().enumerate() {
            let mono = comp.integer_monomial().expect("char_sum needs integer coefficients");
            if j < mono.len() {
                b += &mono[j] * BigInt::from(chi.a[i]);
            }
        }
        g = g.gcd(&b);
        if g.is_one() {
            break;
        }
    }
    g.to_u64().unwrap()
}

/// Complete normalized sum (1/q) sum_{n=1}^q chi(P(n)) with the Prop-2.2
/// style reduction bookkeeping: q' = gcd(nonconstant coefficients of a.P, q).
pub fn char_sum(chi: &Character, p: &PolyVec) -> SumReport {
    let tw = twiddles(chi.q);
    char_sum_with_twiddles(chi, p, &tw)
}

fn char_sum_with_twiddles(chi: &Character, p: &PolyVec, tw: &[Cdd]) -> SumReport {
    let q = chi.q;
    let counts = phase_counts(chi, p);
    let (value, magnitude) = sum_from_counts(q, &counts, tw);
    let q_prime = phase_gcd(chi, p);
    SumReport { q, value, magnitude, q_prime, reduced_modulus: q / q_prime }
}

/// One row of a decay scan: the worst sum magnitude seen at modulus q.
#[derive(Clone, Debug)]
pub struct HuaRow {
    pub q: u64,
    pub worst_magnitude: Dd,
    pub q_prime: u64,
    /// Nonconstant coefficients of the worst polynomial, for reproduction.
    pub worst_coeffs: Vec<u64>,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

/// Per-modulus RNG stream so parallel scan order cannot leak into results.
fn rng_for(seed: u64, q: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(seed ^ q.wrapping_mul(0x9e3779b97f4a7c15)))
}

/// For each q <= q_max: the maximum normalized magnitude of the degree-d sum
/// over `trials` random polynomials whose nonconstant-coefficient gcd with q
/// is at most q_cap. Deterministic given the seed; parallel over q.
pub fn hua_decay_scan(d: u32, q_cap: u64, q_max: u64, trials: u32, seed: u64) -> Vec<HuaRow> {
    assert!(d >= 1);
    let mut rows: Vec<HuaRow> = (1..=q_max)
        .into_par_iter()
        .map(|q| {
            let tw = twiddles(q);
            let mut rng = rng_for(seed, q);
            let mut worst: Option<(Dd, u64, Vec<u64>)> = None;
            for _ in 0..trials.max(1) {
                let coeffs = sample_primitive_coeffs(&mut rng, d, q, q_cap);
                let mut mono: Vec<i64> = vec![0];
                mono.extend(coeffs.iter().map(|&c| c as i64));
                let p = PolyVec::from_i64_monomials(&[&mono]);
                let chi = Character::new(q, &[1]);
                let rep = char_sum_with_twiddles(&chi, &p, &tw);
                let better = match &worst {
                    None => true,
                    Some((m, _, _)) => rep.magnitude > *m,
                };
                if better {
                    worst = Some((rep.magnitude, rep.q_prime, coeffs));
                }
            }
            let (m, qp, coeffs) = worst.unwrap();
            HuaRow { q, worst_magnitude: m, q_prime: qp, worst_coeffs: coeffs }
        })
        .collect();
    rows.sort_by_key(|r| r.q);
    rows
}

/// Degree-d coefficient vector (b_1..b_d, each in [0,q)) with
/// gcd(b_1, ..., b_d, q) <= q_cap.
fn sample_primitive_coeffs(rng: &mut ChaCha8Rng, d: u32, q: u64, q_cap: u64) -> Vec<u64> {
    for _ in 0..10_000 {
        let b: Vec<u64> = (0..d).map(|_| rng.gen_range(0..q)).collect();
        let mut g = q;
        for &x in &b {
            g = g.gcd(&x);
        }
        if g <= q_cap {
            return b;
        }
    }
    // Unreachable in practice; gcd = 1 has positive probability for every q.
    let mut b = vec![0u64; d as usize];
    b[0] = 1 % q;
    b
}

/// theta as the exact rational hi + lo (every finite f64 is rational).
fn dd_to_rational(x: Dd) -> BigRational {
    BigRational::from_float(x.hi()).expect("finite")
        + BigRational::from_float(x.lo()).expect("finite")
}

/// Top 106 bits of a rational as a double-double.
pub fn dd_from_rational(r: &BigRational) -> Dd {
    let hi = r.to_f64().unwrap_or(0.0);
    let rest = r - BigRational::from_float(hi).expect("finite");
    Dd::new(hi, rest.to_f64().unwrap_or(0.0))
}

/// Fractional part of x*theta, computed exactly: theta is expanded to the
/// rational it literally represents, the product and reduction happen over
/// the rationals, and only the final conversion back to double-double
/// rounds. Reducing after scaling the double-double instead would lose the
/// bits below 2^-106 of the product's magnitude.
pub fn frac_bigint_times(x: &BigInt, theta: Dd) -> Dd {
    let prod = dd_to_rational(theta) * BigRational::from_integer(x.clone());
    let fr = &prod - prod.floor();
    dd_from_rational(&fr)
}

/// (1/N) sum_{n=1}^N e(<P(n), theta>): the finite Weyl average along P.
pub fn partial_weyl_avg(p: &PolyVec, theta: &[Dd], n_max: u64) -> Cdd {
    assert_eq!(theta.len(), p.dim());
    assert!(n_max >= 1);
    let mut acc = Cdd::ZERO;
    for n in 1..=n_max {
        let v = p.eval(&BigInt::from(n));
        let mut phase = Dd::ZERO;
        for (x, th) in v.iter().zip(theta) {
            phase = (phase + frac_bigint_times(x, *th)).frac_unit();
        }
        acc = acc.add(Cdd::unit_phase(phase));
    }
    Cdd {
        re: acc.re.div_f64(n_max as f64),
        im: acc.im.div_f64(n_max as f64),
    }
}

/// The modulus schedule underlying every quantitative experiment.
#[derive(Clone, Debug)]
pub struct QBound {
    /// Smallest q0 with C * (q/Q)^{-1/(2D)} < eps for all q >= q0.
    pub q0: u64,
    /// lcm{1, ..., q0}.
    pub q: BigUint,
}

/// Solves C * (q/Q)^{-1/(2D)} < eps exactly over the rationals: the condition
/// is q > Q * (C/eps)^{2D}, so q0 is one more than the floor of the
/// right-hand side. The Hua epsilon is fixed at 1/(2D); the ambient dimension
/// r does not enter the bound (the phase polynomial a.P is univariate) but is
/// kept in the signature as part of the experiment contract.
pub fn qbound(
    d: u32,
    _r: usize,
    q_cap: &BigUint,
    eps: &BigRational,
    c: &BigRational,
    q0_cap: u64,
) -> Result<QBound, ExpsumError> {
    let q0_big = qbound_threshold(d, q_cap, eps, c);
    let q0 = match q0_big.to_u64() {
        Some(v) if v <= q0_cap => v.max(1),
        _ => {
            return Err(ExpsumError::QBoundCapExceeded {
                q0: q0_big.to_u64().unwrap_or(u64::MAX),
                cap: q0_cap,
            })
        }
    };
    Ok(QBound {
        q0,
        q: lcm_upto(q0),
    })
}

/// Smallest q0 (as an unbounded integer) with C * (q/Q)^{-1/(2D)} < eps for
/// all q >= q0.
pub fn qbound_threshold(d: u32, q_cap: &BigUint, eps: &BigRational, c: &BigRational) -> BigUint {
    assert!(d >= 1);
    assert!(eps.is_positive() && c.is_positive());
    let ratio = c / eps;
    let mut pow = BigRational::one();
    for _ in 0..2 * d {
        pow *= &ratio;
    }
    let threshold = pow * BigRational::from_integer(BigInt::from(q_cap.clone()));
    (threshold.floor().to_integer() + BigInt::one())
        .max(BigInt::one())
        .to_biguint()
        .expect("positive")
}

/// lcm{1..q0} = product over primes p <= q0 of the largest power p^e <= q0.
pub fn lcm_upto(q0: u64) -> BigUint {
    let mut sieve = vec![true; (q0 + 1).max(2) as usize];
    let mut l = BigUint::one();
    for p in 2..=q0 {
        if !sieve[p as usize] {
            continue;
        }
        let mut m = p * p;
        while m <= q0 {
            sieve[m as usize] = false;
            m += p;
        }
        let mut pe = p;
        while pe <= q0 / p {
            pe *= p;
        }
        l *= pe;
    }
    l
}

/// lcm{1..q0} mod modulus without materializing the lcm. Every prime-power
/// factor of modulus is <= modulus, so q0 >= modulus forces divisibility;
/// otherwise q0 fits in u64 and the prime powers below it are multiplied out.
pub fn lcm_upto_mod(q0: &BigUint, modulus: u64) -> u64 {
    assert!(modulus >= 1);
    if *q0 >= BigUint::from(modulus) {
        return 0;
    }
    let q0 = q0.to_u64().expect("below modulus");
    let mut sieve = vec![true; (q0 + 1) as usize];
    let mut acc: u64 = 1 % modulus;
    for p in 2..=q0 {
        if !sieve[p as usize] {
            continue;
        }
        let mut m = p * p;
        while m <= q0 {
            sieve[m as usize] = false;
            m += p;
        }
        let mut pe = p;
        while pe <= q0 / p {
            pe *= p;
        }
        acc = ((acc as u128 * (pe % modulus) as u128) % modulus as u128) as u64;
    }
    acc
}

/// Default cap on q0; beyond this the lcm has thousands of digits and every
/// downstream experiment is hopeless anyway.
pub const DEFAULT_Q0_CAP: u64 = 100_000;

/// Default stand-in for the inexplicit Hua constant.
pub fn default_hua_constant() -> BigRational {
    BigRational::from_integer(BigInt::from(10))
}

/// Complexity value as needed by qbound: finite indices pass through,
/// infinite ones refuse.
pub fn index_to_biguint(idx: &Index) -> Option<BigUint> {
    match idx {
        Index::Finite(q) => Some(q.clone()),
        Index::Infinite => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::IntValuedPoly;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn character_normalization() {
        let chi = Character::new(12, &[4, 6]);
        assert_eq!(chi.modulus(), 6);
        assert_eq!(chi.residues(), &[2, 3]);
        let chi = Character::new(5, &[7]);
        assert_eq!(chi.modulus(), 5);
        assert_eq!(chi.residues(), &[2]);
        let chi = Character::new(4, &[0]);
        assert_eq!(chi.modulus(), 1);
    }

    #[test]
    fn char_sum_examples() {
        let p = PolyVec::from_i64_monomials(&[&[0, 1]]);
        let rep = char_sum(&Character::new(1, &[0]), &p);
        assert!((rep.magnitude.to_f64() - 1.0).abs() < 1e-15);

        // Quadratic Gauss sum at q=5 has magnitude 5^{-1/2}.
        let p = PolyVec::from_i64_monomials(&[&[0, 0, 1]]);
        let rep = char_sum(&Character::new(5, &[1]), &p);
        assert!((rep.magnitude.to_f64() - 0.2f64.sqrt()).abs() < 1e-12);

        // Alternating linear sum vanishes; reduction reports q' = 2.
        let p = PolyVec::from_i64_monomials(&[&[0, 2]]);
        let rep = char_sum(&Character::new(4, &[1]), &p);
        assert!(rep.magnitude.to_f64() < 1e-25);
        assert_eq!(rep.q_prime, 2);
        assert_eq!(rep.reduced_modulus, 2);
    }

    #[test]
    fn translation_leaves_magnitude_fixed() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..40 {
            let q = rng.gen_range(2u64..60);
            let r = rng.gen_range(1..=3);
            let comps: Vec<IntValuedPoly> = (0..r)
                .map(|_| {
                    let coeffs: Vec<i64> =
                        (0..=rng.gen_range(1..4)).map(|_| rng.gen_range(-20i64..=20)).collect();
                    IntValuedPoly::from_i64_monomial(&coeffs)
                })
                .collect();
            let p = PolyVec::new(comps.clone());
            let shifted = PolyVec::new(
                comps
                    .iter()
                    .map(|c| c.add(&IntValuedPoly::constant(BigInt::from(rng.gen_range(-9i64..=9)))))
                    .collect(),
            );
            let a: Vec<i64> = (0..r).map(|_| rng.gen_range(0..q as i64)).collect();
            let chi = Character::new(q, &a);
            let m1 = char_sum(&chi, &p).magnitude;
            let m2 = char_sum(&chi, &shifted).magnitude;
            assert!((m1 - m2).abs().to_f64() < 1e-25);
        }
    }

    #[test]
    fn degenerate_coefficients_give_magnitude_one() {
        // Every nonconstant coefficient divisible by q: the phase is constant.
        let p = PolyVec::from_i64_monomials(&[&[3, 12, 24]]);
        let rep = char_sum(&Character::new(12, &[1]), &p);
        assert!((rep.magnitude.to_f64() - 1.0).abs() < 1e-25);
        assert_eq!(rep.q_prime, 12);
    }

    #[test]
    fn hua_scan_prime_gauss_rows() {
        let rows = hua_decay_scan(2, 1, 60, 8, 99);
        assert_eq!(rows[0].q, 1);
        assert!((rows[0].worst_magnitude.to_f64() - 1.0).abs() < 1e-20);
        for row in &rows {
            if [3u64, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59]
                .contains(&row.q)
            {
                let expect = 1.0 / (row.q as f64).sqrt();
                assert!(
                    (row.worst_magnitude.to_f64() - expect).abs() < 1e-9,
                    "q={} got {} want {}",
                    row.q,
                    row.worst_magnitude.to_f64(),
                    expect
                );
            }
        }
    }

    #[test]
    fn hua_scan_deterministic() {
        let a = hua_decay_scan(3, 1, 40, 5, 1234);
        let b = hua_decay_scan(3, 1, 40, 5, 1234);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.q, y.q);
            assert_eq!(x.worst_magnitude.to_f64().to_bits(), y.worst_magnitude.to_f64().to_bits());
            assert_eq!(x.worst_coeffs, y.worst_coeffs);
        }
    }

    #[test]
    fn weyl_examples() {
        let p = PolyVec::from_i64_monomials(&[&[0, 1]]);
        let avg = partial_weyl_avg(&p, &[Dd::ZERO], 100);
        assert!((avg.re.to_f64() - 1.0).abs() < 1e-20);

        let avg = partial_weyl_avg(&p, &[Dd::from_ratio(1, 2)], 100);
        assert!(avg.magnitude().to_f64() < 1e-25);

        let p = PolyVec::from_i64_monomials(&[&[0, 0, 1]]);
        let sqrt2 = Dd::from_i64(2).sqrt();
        let avg = partial_weyl_avg(&p, &[sqrt2], 20_000);
        assert!(avg.magnitude().to_f64() < 0.05);
    }

    #[test]
    fn frac_bigint_times_exact_for_dyadic_theta() {
        // theta = a/2^k is one exact f64, so x*theta mod 1 has an integer
        // closed form: (x*a mod 2^k) / 2^k.
        let a = 1_234_567i64;
        let k = 31u32;
        let theta = Dd::from_ratio(a, 1i64 << k);
        let x = BigInt::from(123_456_789_012_345_678i64);
        let m = (&x * a).mod_floor(&(BigInt::one() << k));
        let expect = dd_from_rational(&BigRational::new(m.clone(), BigInt::one() << k));
        let got = frac_bigint_times(&x, theta);
        assert!((got - expect).abs().to_f64() < 1e-30);
        // Negative x reflects the fraction.
        let got_neg = frac_bigint_times(&(-&x), theta);
        let expect_neg = dd_from_rational(&BigRational::new(
            (BigInt::one() << k) - m,
            BigInt::one() << k,
        ));
        assert!((got_neg - expect_neg).abs().to_f64() < 1e-30);
    }

    #[test]
    fn frac_bigint_times_error_scales_with_x() {
        // theta = dd(3/7) is only a 106-bit approximation; against the true
        // 3/7 the reduction of x*theta can drift by about |x| * 2^-107 and
        // no more.
        let theta = Dd::from_ratio(3, 7);
        let x = BigInt::from(123_456_789_012_345_678i64);
        let direct = Dd::from_ratio(((&x * 3i64) % 7i64).to_i64().unwrap(), 7);
        let got = frac_bigint_times(&x, theta);
        let err = (got - direct).abs().to_f64();
        assert!(err < 1e-13, "err {err}");
    }

    #[test]
    fn qbound_examples() {
        // D=2, Q=1, C=1, eps=1/2: q > (C/eps)^4 = 16, so q0 = 17.
        let b = qbound(2, 1, &BigUint::one(), &rat(1, 2), &rat(1, 1), 1_000).unwrap();
        assert_eq!(b.q0, 17);
        let expect = (1..=17u64).fold(BigUint::one(), |l, k| l.lcm(&BigUint::from(k)));
        assert_eq!(b.q, expect);

        // Bound already met strictly: eps > C * Q^{1/D}.
        let b = qbound(2, 1, &BigUint::one(), &rat(3, 2), &rat(1, 1), 1_000).unwrap();
        assert_eq!(b.q0, 1);
        assert_eq!(b.q, BigUint::one());

        // Monotonicity: smaller eps never shrinks q0.
        let mut last = 0;
        for eps_den in 1..=6 {
            let b = qbound(2, 1, &BigUint::one(), &rat(1, eps_den), &rat(1, 1), 1_000_000).unwrap();
            assert!(b.q0 >= last);
            last = b.q0;
        }

        // Cap refusal.
        let err = qbound(3, 1, &BigUint::from(50u32), &rat(1, 10), &rat(10, 1), 1_000);
        assert!(matches!(err, Err(ExpsumError::QBoundCapExceeded { .. })));
    }

    #[test]
    fn lcm_modular_agrees_with_materialized() {
        for q0 in [1u64, 2, 7, 30, 97] {
            let l = lcm_upto(q0);
            for m in [2u64, 3, 12, 101, 4096, 65537] {
                let expect = (&l % BigUint::from(m)).to_u64().unwrap();
                assert_eq!(lcm_upto_mod(&BigUint::from(q0), m), expect, "q0={q0} m={m}");
            }
        }
        assert_eq!(lcm_upto_mod(&BigUint::from(10u32).pow(40), 48), 0);
        assert_eq!(lcm_upto_mod(&BigUint::from(5u32), 1), 0);
    }
}
