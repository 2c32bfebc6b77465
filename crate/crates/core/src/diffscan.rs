//! Difference sets of integer windows and their images under quadratic forms
//! and polynomial shift maps. Images are enumerated by meet-in-the-middle
//! (pair-value table plus probes), never by the cubic triple loop, and
//! coverage of kZ is certified over a finite verification range.

use crate::bitset::BitSet;
use crate::linalg::IntMat;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use rayon::prelude::*;

pub const DEFAULT_MEMORY_BUDGET: u64 = 2 << 30;

/// Windows keep coordinates within [-MAX_HALF_WIDTH, MAX_HALF_WIDTH] so that
/// pair values (products, sums of squares) stay inside i64.
pub const MAX_HALF_WIDTH: i64 = 1 << 20;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum DiffscanError {
    #[error("window is empty")]
    EmptyWindow,
    #[error("half-width {l} outside [0, {max}]")]
    HalfWidthOutOfRange { l: i64, max: i64 },
    #[error("value {value} outside the window box")]
    ValueOutOfBox { value: i64 },
    #[error("pair table needs {needed} bytes, budget is {budget}")]
    MemoryBudget { needed: u64, budget: u64 },
    #[error("eps out of range")]
    EpsOutOfRange,
    #[error("shift polynomial must have degree >= 2 and zero constant term")]
    InvalidShiftPolynomial,
    #[error("matrix is not a trace-zero 2x2 matrix")]
    NotTraceZeroTwoByTwo,
    #[error("off-diagonal sum is odd, not in the image of the embedding")]
    ParityMismatch,
}

/// Subset of the box [-L, L], bit index v + L.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Window {
    l: i64,
    bits: BitSet,
}

impl Window {
    pub fn new(l: i64) -> Result<Window, DiffscanError> {
        if !(0..=MAX_HALF_WIDTH).contains(&l) {
            return Err(DiffscanError::HalfWidthOutOfRange {
                l,
                max: MAX_HALF_WIDTH,
            });
        }
        Ok(Window {
            l,
            bits: BitSet::new((2 * l + 1) as usize),
        })
    }

    pub fn from_values(l: i64, values: impl IntoIterator<Item = i64>) -> Result<Window, DiffscanError> {
        let mut w = Window::new(l)?;
        for v in values {
            w.insert(v)?;
        }
        Ok(w)
    }

    pub fn full(l: i64) -> Result<Window, DiffscanError> {
        Window::from_values(l, -l..=l)
    }

    /// Bernoulli(density) fill of [lo, hi] within the box.
    pub fn random_density<R: Rng>(
        l: i64,
        lo: i64,
        hi: i64,
        density: f64,
        rng: &mut R,
    ) -> Result<Window, DiffscanError> {
        let mut w = Window::new(l)?;
        for v in lo.max(-l)..=hi.min(l) {
            if rng.gen_bool(density) {
                w.insert(v)?;
            }
        }
        Ok(w)
    }

    pub fn insert(&mut self, v: i64) -> Result<(), DiffscanError> {
        if v.abs() > self.l {
            return Err(DiffscanError::ValueOutOfBox { value: v });
        }
        self.bits.set((v + self.l) as usize);
        Ok(())
    }

    pub fn contains(&self, v: i64) -> bool {
        v.abs() <= self.l && self.bits.get((v + self.l) as usize)
    }

    pub fn half_width(&self) -> i64 {
        self.l
    }

    pub fn cardinality(&self) -> u64 {
        self.bits.count() as u64
    }

    pub fn density(&self) -> f64 {
        self.cardinality() as f64 / (2 * self.l + 1) as f64
    }

    pub fn values(&self) -> Vec<i64> {
        self.bits.iter_ones().map(|i| i as i64 - self.l).collect()
    }
}

/// B - B as a sorted set in [-2L, 2L]; always symmetric and containing 0.
pub fn diff_set(b: &Window) -> Result<Vec<i64>, DiffscanError> {
    if b.cardinality() == 0 {
        return Err(DiffscanError::EmptyWindow);
    }
    let l = b.l;
    let mut diff = BitSet::new((4 * l + 1) as usize);
    // For each member m, {x - m : x in B} lands at bit offset l - m.
    for m in b.values() {
        diff.or_shifted(&b.bits, (l - m) as usize);
    }
    Ok(diff.iter_ones().map(|i| i as i64 - 2 * l).collect())
}

/// B + B as a sorted set in [-2L, 2L].
pub fn sum_set(b: &Window) -> Result<Vec<i64>, DiffscanError> {
    if b.cardinality() == 0 {
        return Err(DiffscanError::EmptyWindow);
    }
    let l = b.l;
    let mut sum = BitSet::new((4 * l + 1) as usize);
    for m in b.values() {
        sum.or_shifted(&b.bits, (l + m) as usize);
    }
    Ok(sum.iter_ones().map(|i| i as i64 - 2 * l).collect())
}

/// Subset of the box [-L, L]^2, bit index (x + L) + (2L+1)(y + L).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Window2 {
    l: i64,
    bits: BitSet,
}

/// Window2 boxes are capped so the (4L+1)^2 difference bitmap stays modest.
pub const MAX_HALF_WIDTH_2D: i64 = 1 << 12;

impl Window2 {
    pub fn new(l: i64) -> Result<Window2, DiffscanError> {
        if !(0..=MAX_HALF_WIDTH_2D).contains(&l) {
            return Err(DiffscanError::HalfWidthOutOfRange {
                l,
                max: MAX_HALF_WIDTH_2D,
            });
        }
        let side = (2 * l + 1) as usize;
        Ok(Window2 {
            l,
            bits: BitSet::new(side * side),
        })
    }

    pub fn from_predicate(l: i64, pred: impl Fn(i64, i64) -> bool) -> Result<Window2, DiffscanError> {
        let mut w = Window2::new(l)?;
        for y in -l..=l {
            for x in -l..=l {
                if pred(x, y) {
                    w.insert(x, y)?;
                }
            }
        }
        Ok(w)
    }

    pub fn full(l: i64) -> Result<Window2, DiffscanError> {
        Window2::from_predicate(l, |_, _| true)
    }

    pub fn insert(&mut self, x: i64, y: i64) -> Result<(), DiffscanError> {
        if x.abs() > self.l {
            return Err(DiffscanError::ValueOutOfBox { value: x });
        }
        if y.abs() > self.l {
            return Err(DiffscanError::ValueOutOfBox { value: y });
        }
        let side = 2 * self.l + 1;
        self.bits.set(((x + self.l) + side * (y + self.l)) as usize);
        Ok(())
    }

    pub fn contains(&self, x: i64, y: i64) -> bool {
        if x.abs() > self.l || y.abs() > self.l {
            return false;
        }
        let side = 2 * self.l + 1;
        self.bits.get(((x + self.l) + side * (y + self.l)) as usize)
    }

    pub fn half_width(&self) -> i64 {
        self.l
    }

    pub fn cardinality(&self) -> u64 {
        self.bits.count() as u64
    }

    pub fn density(&self) -> f64 {
        let side = (2 * self.l + 1) as f64;
        self.cardinality() as f64 / (side * side)
    }

    pub fn points(&self) -> Vec<(i64, i64)> {
        let side = 2 * self.l + 1;
        self.bits
            .iter_ones()
            .map(|i| {
                let i = i as i64;
                (i % side - self.l, i / side - self.l)
            })
            .collect()
    }
}

/// E - E as sorted points in [-2L, 2L]^2.
pub fn diff_set_2d(e: &Window2) -> Result<Vec<(i64, i64)>, DiffscanError> {
    if e.cardinality() == 0 {
        return Err(DiffscanError::EmptyWindow);
    }
    let l = e.l;
    let side = 4 * l + 1;
    let mut diff = BitSet::new((side * side) as usize);
    let points = e.points();
    for (x, y) in &points {
        for (bx, by) in &points {
            diff.set(((x - bx + 2 * l) + side * (y - by + 2 * l)) as usize);
        }
    }
    Ok(diff
        .iter_ones()
        .map(|i| {
            let i = i as i64;
            (i % side - 2 * l, i / side - 2 * l)
        })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QuadForm {
    XyMinusZ2,
    X2PlusY2MinusZ2,
    X2MinusY2MinusZ2,
}

impl QuadForm {
    pub fn name(self) -> &'static str {
        match self {
            QuadForm::XyMinusZ2 => "xy-z2",
            QuadForm::X2PlusY2MinusZ2 => "x2+y2-z2",
            QuadForm::X2MinusY2MinusZ2 => "x2-y2-z2",
        }
    }

    pub fn parse(s: &str) -> Option<QuadForm> {
        match s {
            "xy-z2" => Some(QuadForm::XyMinusZ2),
            "x2+y2-z2" => Some(QuadForm::X2PlusY2MinusZ2),
            "x2-y2-z2" => Some(QuadForm::X2MinusY2MinusZ2),
            _ => None,
        }
    }

    pub fn eval(self, x: i64, y: i64, z: i64) -> i128 {
        let (x, y, z) = (x as i128, y as i128, z as i128);
        match self {
            QuadForm::XyMinusZ2 => x * y - z * z,
            QuadForm::X2PlusY2MinusZ2 => x * x + y * y - z * z,
            QuadForm::X2MinusY2MinusZ2 => x * x - y * y - z * z,
        }
    }

    fn pair_value(self, x: i64, y: i64) -> i64 {
        match self {
            QuadForm::XyMinusZ2 => x * y,
            QuadForm::X2PlusY2MinusZ2 => x * x + y * y,
            QuadForm::X2MinusY2MinusZ2 => x * x - y * y,
        }
    }
}

/// {F(a,b,c) : a,b,c in D} intersected with [-M, M], sorted. The pair table
/// {F_2(x,y)} is a value-indexed bitmap (its sorted deduplicated form), and
/// each candidate m is settled by probing m + z^2 over the distinct squares
/// of D; the triple loop is never run.
pub fn quadform_image(
    d: &[i64],
    form: QuadForm,
    m: i64,
    memory_budget: u64,
) -> Result<Vec<i64>, DiffscanError> {
    if d.is_empty() {
        return Err(DiffscanError::EmptyWindow);
    }
    assert!(m >= 0);
    let bound = d.iter().map(|v| v.abs()).max().unwrap();
    assert!(bound <= 2 * MAX_HALF_WIDTH);
    let (lo, hi) = match form {
        QuadForm::XyMinusZ2 => (-bound * bound, bound * bound),
        QuadForm::X2PlusY2MinusZ2 => (0, 2 * bound * bound),
        QuadForm::X2MinusY2MinusZ2 => (-bound * bound, bound * bound),
    };
    let table_len = (hi - lo + 1) as u64;
    let needed = table_len.div_ceil(64) * 8;
    if needed > memory_budget {
        return Err(DiffscanError::MemoryBudget {
            needed,
            budget: memory_budget,
        });
    }
    let mut table = BitSet::new(table_len as usize);
    for x in d {
        for y in d {
            table.set((form.pair_value(*x, *y) - lo) as usize);
        }
    }
    let mut squares: Vec<i64> = d.iter().map(|z| z * z).collect();
    squares.sort_unstable();
    squares.dedup();
    let image: Vec<i64> = (-m..=m)
        .into_par_iter()
        .filter(|v| {
            squares.iter().any(|zz| {
                let probe = v + zz;
                probe >= lo && probe <= hi && table.get((probe - lo) as usize)
            })
        })
        .collect();
    Ok(image)
}

/// Triple-loop oracle for cross-checking the meet-in-the-middle enumerator on
/// small difference sets.
pub fn quadform_image_naive(d: &[i64], form: QuadForm, m: i64) -> Vec<i64> {
    let m128 = m as i128;
    let mut out = BitSet::new((2 * m + 1) as usize);
    for x in d {
        for y in d {
            for z in d {
                let v = form.eval(*x, *y, *z);
                if v.abs() <= m128 {
                    out.set((v as i64 + m) as usize);
                }
            }
        }
    }
    out.iter_ones().map(|i| i as i64 - m).collect()
}

pub const COVERAGE_CAVEAT: &str =
    "finite-window certificate: covering verified only on the shrunken range [-M/2, M/2]";

#[derive(Clone, Debug, PartialEq)]
pub struct KCoverage {
    pub k: u64,
    pub attained: u64,
    pub total: u64,
    pub fraction: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoverageReport {
    pub form: String,
    pub m_full: i64,
    pub m_verify: i64,
    pub per_k: Vec<KCoverage>,
    pub covering_k: Option<u64>,
    pub caveat: &'static str,
}

/// Smallest k <= k_max whose multiples within [-M/2, M/2] all lie in the
/// image; fractions are reported for every k so boundary near-misses stay
/// visible.
pub fn find_k_cover(image: &[i64], form: &str, m: i64, k_max: u64) -> CoverageReport {
    debug_assert!(image.windows(2).all(|w| w[0] < w[1]));
    let m_verify = m / 2;
    let mut per_k = Vec::new();
    let mut covering_k = None;
    for k in 1..=k_max {
        let mut attained = 0u64;
        let mut total = 0u64;
        let mut t = -(m_verify / k as i64) * k as i64;
        while t <= m_verify {
            total += 1;
            if image.binary_search(&t).is_ok() {
                attained += 1;
            }
            t += k as i64;
        }
        per_k.push(KCoverage {
            k,
            attained,
            total,
            fraction: attained as f64 / total as f64,
        });
        if attained == total && covering_k.is_none() {
            covering_k = Some(k);
        }
    }
    CoverageReport {
        form: form.to_string(),
        m_full: m,
        m_verify,
        per_k,
        covering_k,
        caveat: COVERAGE_CAVEAT,
    }
}

fn frac_distance(x: &BigRational) -> BigRational {
    let f = x - x.floor();
    (BigRational::one() - &f).min(f)
}

/// B(theta, eps) over the box [-L, L]: exact membership
/// dist(x theta, Z) < eps. Pass theta as a convergent with denominator
/// larger than the window to emulate an irrational deterministically.
pub fn bohr_set(theta: &BigRational, eps: &BigRational, l: i64) -> Result<Window, DiffscanError> {
    if !eps.is_positive() || *eps >= BigRational::new(BigInt::one(), BigInt::from(2)) {
        return Err(DiffscanError::EpsOutOfRange);
    }
    let mut w = Window::new(l)?;
    for x in -l..=l {
        if frac_distance(&(theta * BigRational::from_integer(BigInt::from(x)))) < *eps {
            w.insert(x)?;
        }
    }
    Ok(w)
}

#[derive(Clone, Debug, PartialEq)]
pub struct BohrControlReport {
    pub l: i64,
    pub bohr_cardinality: u64,
    pub bohr_density: f64,
    pub values_checked: u64,
    /// Every value of x1 + x2 over (BxB) - (BxB) lies in B(theta, 4 eps).
    pub all_values_in_dilated: bool,
    /// Per k: the least positive multiple of k in [1, 2L] whose theta-orbit
    /// escapes (-4 eps, 4 eps), when one exists.
    pub escapes: Vec<(u64, Option<i64>)>,
    pub coverage: CoverageReport,
    /// Theta with denominator <= L behaves periodically; coverage may then
    /// legitimately succeed.
    pub rational_theta: bool,
}

/// The structured non-example: with F(x1,x2) = x1 + x2 and B a Bohr set,
/// every F-value over (BxB) - (BxB) stays inside the dilated Bohr set
/// B(theta, 4 eps), and for an irrational-like theta every k <= k_max has an
/// escaping multiple, so no k passes coverage.
pub fn bohr_negative_control(
    theta: &BigRational,
    eps: &BigRational,
    l: i64,
    k_max: u64,
) -> Result<BohrControlReport, DiffscanError> {
    let one_eighth = BigRational::new(BigInt::one(), BigInt::from(8));
    if !eps.is_positive() || *eps >= one_eighth {
        return Err(DiffscanError::EpsOutOfRange);
    }
    let b = bohr_set(theta, eps, l)?;
    if b.cardinality() == 0 {
        return Err(DiffscanError::EmptyWindow);
    }
    // F over (BxB) - (BxB) = (B+B) - (B+B).
    let sums = sum_set(&b)?;
    let sum_window = Window::from_values(2 * l, sums)?;
    let values = diff_set(&sum_window)?;
    let four_eps = eps * BigRational::from_integer(BigInt::from(4));
    let in_dilated = |v: i64| {
        frac_distance(&(theta * BigRational::from_integer(BigInt::from(v)))) < four_eps
    };
    let all_values_in_dilated = values.iter().all(|v| in_dilated(*v));
    let m = 4 * l;
    let coverage = find_k_cover(&values, "x1+x2 over bohr^2 differences", m, k_max);
    let m_verify = m / 2;
    let mut escapes = Vec::new();
    for k in 1..=k_max {
        let mut found = None;
        let mut t = k as i64;
        while t <= m_verify {
            if !in_dilated(t) {
                found = Some(t);
                break;
            }
            t += k as i64;
        }
        escapes.push((k, found));
    }
    Ok(BohrControlReport {
        l,
        bohr_cardinality: b.cardinality(),
        bohr_density: b.density(),
        values_checked: values.len() as u64,
        all_values_in_dilated,
        escapes,
        coverage,
        rational_theta: theta.denom() <= &BigInt::from(l),
    })
}

/// {x + R(y) : (x,y) in E - E} intersected with [-M, M], plus its coverage
/// report. R must have degree >= 2 and zero constant term.
pub fn poly_bog_scan(
    e: &Window2,
    r_coeffs: &[i64],
    m: i64,
    k_max: u64,
) -> Result<(Vec<i64>, CoverageReport), DiffscanError> {
    let deg = r_coeffs.len().saturating_sub(1);
    if deg < 2 || r_coeffs[deg] == 0 || r_coeffs[0] != 0 {
        return Err(DiffscanError::InvalidShiftPolynomial);
    }
    let diffs = diff_set_2d(e)?;
    let eval_r = |y: i64| -> Option<i128> {
        let mut acc: i128 = 0;
        for c in r_coeffs.iter().rev() {
            acc = acc.checked_mul(y as i128)?.checked_add(*c as i128)?;
        }
        Some(acc)
    };
    let mut out = BitSet::new((2 * m + 1) as usize);
    for (dx, dy) in &diffs {
        let v = match eval_r(*dy) {
            Some(r) => *dx as i128 + r,
            None => {
                // Promote: exact value, only its membership in [-M, M] matters.
                let mut acc = BigInt::zero();
                for c in r_coeffs.iter().rev() {
                    acc = acc * BigInt::from(*dy) + BigInt::from(*c);
                }
                acc += BigInt::from(*dx);
                match acc.to_i128() {
                    Some(v) => v,
                    None => continue,
                }
            }
        };
        if v.abs() <= m as i128 {
            out.set((v as i64 + m) as usize);
        }
    }
    let image: Vec<i64> = out.iter_ones().map(|i| i as i64 - m).collect();
    let report = find_k_cover(&image, "x+R(y) over E-E", m, k_max);
    Ok((image, report))
}

/// (x,y,z) -> [[z, -y], [x, -z]]; det = xy - z^2.
pub fn sl2_embed(x: i64, y: i64, z: i64) -> IntMat {
    IntMat::from_i64(&[&[z, -y], &[x, -z]])
}

pub fn sl2_project(m: &IntMat) -> Result<[BigInt; 3], DiffscanError> {
    if m.rows() != 2 || m.cols() != 2 || !(m.at(0, 0) + m.at(1, 1)).is_zero() {
        return Err(DiffscanError::NotTraceZeroTwoByTwo);
    }
    Ok([m.at(1, 0).clone(), -m.at(0, 1).clone(), m.at(0, 0).clone()])
}

/// (x,y,z) -> [[z, -(x+y)], [x-y, -z]]; det = x^2 - y^2 - z^2.
pub fn sl2_embed_sym(x: i64, y: i64, z: i64) -> IntMat {
    IntMat::from_i64(&[&[z, -(x + y)], &[x - y, -z]])
}

pub fn sl2_project_sym(m: &IntMat) -> Result<[BigInt; 3], DiffscanError> {
    if m.rows() != 2 || m.cols() != 2 || !(m.at(0, 0) + m.at(1, 1)).is_zero() {
        return Err(DiffscanError::NotTraceZeroTwoByTwo);
    }
    let s = -m.at(0, 1).clone();
    let d = m.at(1, 0).clone();
    if (&s + &d).mod_floor(&BigInt::from(2)) != BigInt::zero() {
        return Err(DiffscanError::ParityMismatch);
    }
    let two = BigInt::from(2);
    Ok([(&s + &d) / &two, (&s - &d) / &two, m.at(0, 0).clone()])
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ratio(a: i64, b: i64) -> BigRational {
        BigRational::new(BigInt::from(a), BigInt::from(b))
    }

    #[test]
    fn diff_set_examples_and_symmetry() {
        let b = Window::from_values(5, 0..=5).unwrap();
        assert_eq!(diff_set(&b).unwrap(), (-5..=5).collect::<Vec<_>>());

        let b = Window::from_values(10, [0, 3]).unwrap();
        assert_eq!(diff_set(&b).unwrap(), vec![-3, 0, 3]);

        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let l = rng.gen_range(1..200);
            let b = Window::random_density(l, -l, l, 0.3, &mut rng);
            let b = match b {
                Ok(w) if w.cardinality() > 0 => w,
                _ => continue,
            };
            let d = diff_set(&b).unwrap();
            assert!(d.binary_search(&0).is_ok());
            let negated: Vec<i64> = d.iter().rev().map(|v| -v).collect();
            assert_eq!(d, negated);
            assert!(d.len() as u64 <= (b.cardinality() * b.cardinality()).min(4 * l as u64 + 1));
            assert!(d.iter().all(|v| v.abs() <= 2 * l));
        }
    }

    #[test]
    fn quadform_trivial_images() {
        assert_eq!(
            quadform_image(&[0], QuadForm::XyMinusZ2, 5, DEFAULT_MEMORY_BUDGET).unwrap(),
            vec![0]
        );
        // Full difference set: x = m, y = 1, z = 0 attains every |m| <= M.
        let b = Window::full(30).unwrap();
        let d = diff_set(&b).unwrap();
        let img = quadform_image(&d, QuadForm::XyMinusZ2, 30, DEFAULT_MEMORY_BUDGET).unwrap();
        assert_eq!(img, (-30..=30).collect::<Vec<_>>());
    }

    #[test]
    fn quadform_matches_naive_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for form in [
            QuadForm::XyMinusZ2,
            QuadForm::X2PlusY2MinusZ2,
            QuadForm::X2MinusY2MinusZ2,
        ] {
            for _ in 0..6 {
                let l = rng.gen_range(5..40);
                let b = Window::random_density(l, -l, l, 0.4, &mut rng).unwrap();
                if b.cardinality() == 0 {
                    continue;
                }
                let d = diff_set(&b).unwrap();
                assert!(d.len() <= 200, "oracle domain");
                let m = rng.gen_range(10..200);
                let fast = quadform_image(&d, form, m, DEFAULT_MEMORY_BUDGET).unwrap();
                let slow = quadform_image_naive(&d, form, m);
                assert_eq!(fast, slow, "form {} m {}", form.name(), m);
            }
        }
    }

    #[test]
    fn quadform_negation_symmetry() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let b = Window::random_density(25, -25, 25, 0.5, &mut rng).unwrap();
        let d = diff_set(&b).unwrap();
        let plus = quadform_image(&d, QuadForm::X2PlusY2MinusZ2, 100, DEFAULT_MEMORY_BUDGET).unwrap();
        let minus = quadform_image(&d, QuadForm::X2MinusY2MinusZ2, 100, DEFAULT_MEMORY_BUDGET).unwrap();
        let negated: Vec<i64> = plus.iter().rev().map(|v| -v).collect();
        assert_eq!(minus, negated);
    }

    #[test]
    fn quadform_memory_budget() {
        let d: Vec<i64> = (-1000..=1000).collect();
        assert!(matches!(
            quadform_image(&d, QuadForm::XyMinusZ2, 100, 1024),
            Err(DiffscanError::MemoryBudget { .. })
        ));
    }

    #[test]
    fn k_cover_examples_and_monotonicity() {
        let full: Vec<i64> = (-100..=100).collect();
        let rep = find_k_cover(&full, "full", 100, 8);
        assert_eq!(rep.covering_k, Some(1));
        assert_eq!(rep.m_verify, 50);
        assert!(rep.per_k.iter().all(|c| c.fraction == 1.0));

        let fours: Vec<i64> = (-100..=100).filter(|v| v % 4 == 0).collect();
        let rep = find_k_cover(&fours, "fours", 100, 8);
        assert_eq!(rep.covering_k, Some(4));
        assert!(rep.per_k[0].fraction < 1.0);
        assert_eq!(rep.per_k[3].fraction, 1.0);
        // 8Z subset 4Z: k = 8 also covers (monotone under divisibility).
        assert_eq!(rep.per_k[7].fraction, 1.0);

        let odds: Vec<i64> = (-101..=101).filter(|v| v % 2 != 0).collect();
        let rep = find_k_cover(&odds, "odds", 100, 8);
        assert_eq!(rep.covering_k, None);

        // Enlarging the image preserves any covering k.
        let mut enlarged = fours.clone();
        enlarged.extend((-100..=100).filter(|v| v % 3 == 0));
        enlarged.sort_unstable();
        enlarged.dedup();
        let rep2 = find_k_cover(&enlarged, "enlarged", 100, 8);
        assert_eq!(rep2.per_k[3].fraction, 1.0);
    }

    #[test]
    fn bohr_half_gives_evens() {
        let b = bohr_set(&ratio(1, 2), &ratio(3, 10), 20).unwrap();
        for x in -20..=20i64 {
            assert_eq!(b.contains(x), x % 2 == 0, "x = {x}");
        }
    }

    #[test]
    fn bohr_density_near_two_eps() {
        // Golden-ratio convergent with denominator above the window.
        let theta = ratio(10946, 17711);
        let b = bohr_set(&theta, &ratio(1, 10), 10_000).unwrap();
        assert!((b.density() - 0.2).abs() < 0.02);
        for x in 0..=10_000i64 {
            assert_eq!(b.contains(x), b.contains(-x));
        }
    }

    #[test]
    fn bohr_negative_control_blocks_all_k() {
        let theta = ratio(10946, 17711);
        let rep = bohr_negative_control(&theta, &ratio(1, 10), 2000, 10).unwrap();
        assert!(!rep.rational_theta);
        assert!(rep.all_values_in_dilated);
        assert!(rep.escapes.iter().all(|(_, e)| e.is_some()));
        assert_eq!(rep.coverage.covering_k, None);
        // k = 1 fails concretely: the recorded escape really escapes.
        let (k, esc) = rep.escapes[0];
        assert_eq!(k, 1);
        let esc = esc.unwrap();
        assert!(frac_distance(&(theta * ratio(esc, 1))) >= ratio(4, 10));
    }

    #[test]
    fn bohr_rational_control_can_cover() {
        let rep = bohr_negative_control(&ratio(1, 2), &ratio(1, 10), 200, 4).unwrap();
        assert!(rep.rational_theta);
        assert!(rep.all_values_in_dilated);
        assert_eq!(rep.coverage.covering_k, Some(2));
        assert!(rep.escapes[1].1.is_none());
    }

    #[test]
    fn poly_bog_examples() {
        let l = 32;
        let m = 48;
        let e = Window2::from_predicate(l, |x, y| x.mod_floor(&4) == 0 && y.mod_floor(&2) == 0)
            .unwrap();
        let (image, rep) = poly_bog_scan(&e, &[0, 0, 1], m, 8).unwrap();
        assert!(image.iter().all(|v| v % 4 == 0));
        assert_eq!(rep.covering_k, Some(4));

        let full = Window2::full(l).unwrap();
        let (_, rep) = poly_bog_scan(&full, &[0, 0, 1], m, 8).unwrap();
        assert_eq!(rep.covering_k, Some(1));

        let half = Window2::from_predicate(l, |x, _| x.mod_floor(&2) == 0).unwrap();
        let (_, rep) = poly_bog_scan(&half, &[0, 0, 1], m, 8).unwrap();
        assert_eq!(rep.covering_k, Some(1));

        assert!(matches!(
            poly_bog_scan(&full, &[1, 0, 1], m, 8),
            Err(DiffscanError::InvalidShiftPolynomial)
        ));
        assert!(matches!(
            poly_bog_scan(&full, &[0, 1], m, 8),
            Err(DiffscanError::InvalidShiftPolynomial)
        ));
    }

    #[test]
    fn sl2_embeddings_round_trip() {
        assert_eq!(sl2_embed(1, 1, 0).det(), BigInt::from(1));
        assert_eq!(sl2_embed(0, 0, 1).det(), BigInt::from(-1));
        assert_eq!(sl2_embed_sym(2, 1, 1).det(), BigInt::from(2));
        for x in -5..=5 {
            for y in -5..=5 {
                for z in -5..=5 {
                    let m = sl2_embed(x, y, z);
                    assert_eq!(m.det(), BigInt::from(QuadForm::XyMinusZ2.eval(x, y, z)));
                    let [px, py, pz] = sl2_project(&m).unwrap();
                    assert_eq!((px, py, pz), (x.into(), y.into(), z.into()));

                    let m = sl2_embed_sym(x, y, z);
                    assert_eq!(
                        m.det(),
                        BigInt::from(QuadForm::X2MinusY2MinusZ2.eval(x, y, z))
                    );
                    let [px, py, pz] = sl2_project_sym(&m).unwrap();
                    assert_eq!((px, py, pz), (x.into(), y.into(), z.into()));
                }
            }
        }
        assert!(matches!(
            sl2_project(&IntMat::from_i64(&[&[1, 0], &[0, 1]])),
            Err(DiffscanError::NotTraceZeroTwoByTwo)
        ));
        assert!(matches!(
            sl2_project_sym(&IntMat::from_i64(&[&[0, 1], &[0, 0]])),
            Err(DiffscanError::ParityMismatch)
        ));
    }
}
