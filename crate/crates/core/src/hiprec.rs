//! Double-double arithmetic: an unevaluated sum of two f64s giving roughly a
//! 106-bit mantissa. Used wherever exponential-sum magnitudes need more
//! headroom than plain f64 (target: comfortably below 1e-12 relative error).
//!
//! Argument reduction for the circle functions is exact: callers pass phases
//! as values interpreted mod 1, quadrant splitting is done on binary fractions
//! (no pi division), and the Taylor tail runs to ~1e-35.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Two-float representation: value = hi + lo, |lo| <= ulp(hi)/2.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct Dd {
    hi: f64,
    lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    debug_assert!(a == 0.0 || a.abs() >= b.abs() || a.is_infinite());
    let s = a + b;
    let err = b - (s - a);
    (s, err)
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let err = a.mul_add(b, -p);
    (p, err)
}

pub const TWO_PI: Dd = Dd {
    hi: f64::from_bits(0x401921fb54442d18),
    lo: f64::from_bits(0x3cb1a62633145c07),
};

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    #[inline]
    pub fn new(hi: f64, lo: f64) -> Dd {
        let (s, e) = two_sum(hi, lo);
        Dd { hi: s, lo: e }
    }

    #[inline]
    pub fn from_f64(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    /// Exact conversion: the i64 is split so both halves are representable.
    pub fn from_i64(x: i64) -> Dd {
        let hi = x as f64;
        let lo = (x as i128 - hi as i128) as f64;
        Dd::new(hi, lo)
    }

    /// Full-precision quotient of two i64s, `den != 0`.
    pub fn from_ratio(num: i64, den: i64) -> Dd {
        Dd::from_i64(num) / Dd::from_i64(den)
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    pub fn hi(self) -> f64 {
        self.hi
    }

    pub fn abs(self) -> Dd {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            -self
        } else {
            self
        }
    }

    pub fn is_zero(self) -> bool {
        self.hi == 0.0 && self.lo == 0.0
    }

    /// Exact scaling by a power of two.
    #[inline]
    pub fn mul_pow2(self, k: f64) -> Dd {
        debug_assert!(k.abs().log2().fract() == 0.0);
        Dd { hi: self.hi * k, lo: self.lo * k }
    }

    pub fn div_f64(self, b: f64) -> Dd {
        let q1 = self.hi / b;
        let mut r = self - Dd::from_f64(q1).mul_f64(b);
        let q2 = r.hi / b;
        r = r - Dd::from_f64(q2).mul_f64(b);
        let q3 = r.hi / b;
        let (s1, e1) = quick_two_sum(q1, q2);
        let (s2, e2) = two_sum(e1, q3);
        let (h, l) = quick_two_sum(s1, s2);
        Dd { hi: h, lo: l + e2 }
    }

    #[inline]
    pub fn mul_f64(self, b: f64) -> Dd {
        let (p, e) = two_prod(self.hi, b);
        Dd::new(p, e + self.lo * b)
    }

    #[inline]
    pub fn lo(self) -> f64 {
        self.lo
    }

    /// Largest integer not exceeding the represented value.
    pub fn floor(self) -> Dd {
        let f = self.hi.floor();
        if f == self.hi {
            let g = self.lo.floor();
            let (s, e) = two_sum(f, g);
            Dd { hi: s, lo: e }
        } else {
            Dd { hi: f, lo: 0.0 }
        }
    }

    /// Value reduced into [0, 1): self - floor(self).
    pub fn frac_unit(self) -> Dd {
        let mut y = self - self.floor();
        // Guard the boundary: rounding can land exactly on 1 or below 0.
        if y.hi >= 1.0 {
            y = y - Dd::ONE;
        }
        if y.hi < 0.0 {
            y = y + Dd::ONE;
        }
        y
    }

    pub fn sqrt(self) -> Dd {
        if self.is_zero() {
            return Dd::ZERO;
        }
        assert!(self.hi > 0.0, "sqrt of negative double-double");
        let y0 = self.hi.sqrt();
        // One Newton step in double-double doubles the 53-bit seed.
        (Dd::from_f64(y0) + self / Dd::from_f64(y0)).mul_pow2(0.5)
    }

    /// (cos 2πx, sin 2πx) with x interpreted mod 1.
    pub fn sincos2pi(self) -> (Dd, Dd) {
        let x = self.frac_unit();
        // Quadrant split on the binary fraction: exact since 1/4 is a power
        // of two away from the floor.
        let q = (x.mul_pow2(4.0)).floor().to_f64();
        debug_assert!((0.0..4.0).contains(&q));
        let s = x - Dd::from_f64(q).mul_pow2(0.25);
        let a = TWO_PI * s; // in [0, pi/2)
        let (c, sn) = sincos_taylor(a);
        match q as i32 {
            0 => (c, sn),
            1 => (-sn, c),
            2 => (-c, -sn),
            _ => (sn, -c),
        }
    }

    pub fn cos2pi(self) -> Dd {
        self.sincos2pi().0
    }

    pub fn sin2pi(self) -> Dd {
        self.sincos2pi().1
    }
}

/// Taylor evaluation of (cos a, sin a) for a in [0, pi/2); the tail is cut
/// at 1e-35, well under the representable precision.
fn sincos_taylor(a: Dd) -> (Dd, Dd) {
    let a2 = a * a;
    let mut sin = a;
    let mut term = a;
    let mut k = 1.0f64;
    loop {
        term = (term * a2).div_f64(-(2.0 * k) * (2.0 * k + 1.0));
        sin = sin + term;
        k += 1.0;
        if term.hi.abs() < 1e-35 {
            break;
        }
    }
    let mut cos = Dd::ONE;
    let mut cterm = Dd::ONE;
    let mut j = 1.0f64;
    loop {
        cterm = (cterm * a2).div_f64(-(2.0 * j - 1.0) * (2.0 * j));
        cos = cos + cterm;
        j += 1.0;
        if cterm.hi.abs() < 1e-35 {
            break;
        }
    }
    (cos, sin)
}

impl Add for Dd {
    type Output = Dd;
    #[inline]
    fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        let e = e + self.lo + o.lo;
        let (h, l) = quick_two_sum(s, e);
        Dd { hi: h, lo: l }
    }
}

impl Sub for Dd {
    type Output = Dd;
    #[inline]
    fn sub(self, o: Dd) -> Dd {
        self + (-o)
    }
}

impl Neg for Dd {
    type Output = Dd;
    #[inline]
    fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }
}

impl Mul for Dd {
    type Output = Dd;
    #[inline]
    fn mul(self, o: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, o.hi);
        let e = e + self.hi * o.lo + self.lo * o.hi;
        let (h, l) = quick_two_sum(p, e);
        Dd { hi: h, lo: l }
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, o: Dd) -> Dd {
        let q1 = self.hi / o.hi;
        let mut r = self - o.mul_f64(q1);
        let q2 = r.hi / o.hi;
        r = r - o.mul_f64(q2);
        let q3 = r.hi / o.hi;
        let (s1, e1) = quick_two_sum(q1, q2);
        let (s2, e2) = two_sum(e1, q3);
        let (h, l) = quick_two_sum(s1, s2);
        Dd { hi: h, lo: l + e2 }
    }
}

/// Complex value over Dd, enough for accumulating exponential sums.
#[derive(Clone, Copy, Debug)]
pub struct Cdd {
    pub re: Dd,
    pub im: Dd,
}

impl Cdd {
    pub const ZERO: Cdd = Cdd { re: Dd::ZERO, im: Dd::ZERO };

    /// e(x) = exp(2πi x), x interpreted mod 1.
    pub fn unit_phase(x: Dd) -> Cdd {
        let (c, s) = x.sincos2pi();
        Cdd { re: c, im: s }
    }

    pub fn add(self, o: Cdd) -> Cdd {
        Cdd { re: self.re + o.re, im: self.im + o.im }
    }

    pub fn scale(self, k: Dd) -> Cdd {
        Cdd { re: self.re * k, im: self.im * k }
    }

    pub fn magnitude(self) -> Dd {
        (self.re * self.re + self.im * self.im).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn close(a: Dd, b: Dd, tol: f64) -> bool {
        (a - b).abs().to_f64() < tol
    }

    #[test]
    fn ratio_arithmetic_agrees_with_exact_rationals() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..500 {
            let a = rng.gen_range(-1000i64..1000);
            let b = rng.gen_range(1i64..1000);
            let c = rng.gen_range(-1000i64..1000);
            let d = rng.gen_range(1i64..1000);
            let x = Dd::from_ratio(a, b) + Dd::from_ratio(c, d);
            let y = Dd::from_ratio(a * d + c * b, b * d);
            assert!(close(x, y, 1e-28), "{a}/{b} + {c}/{d}");
            let x = Dd::from_ratio(a, b) * Dd::from_ratio(c, d);
            let y = Dd::from_ratio(a * c, b * d);
            assert!(close(x, y, 1e-28));
        }
    }

    #[test]
    fn floor_and_frac() {
        assert_eq!(Dd::from_ratio(7, 2).floor().to_f64(), 3.0);
        assert_eq!(Dd::from_ratio(-7, 2).floor().to_f64(), -4.0);
        // A value just under an integer must floor below it.
        let just_under = Dd::from_f64(1.0) - Dd::from_f64(1e-20);
        assert_eq!(just_under.floor().to_f64(), 0.0);
        let f = Dd::from_ratio(-13, 5).frac_unit();
        assert!(close(f, Dd::from_ratio(2, 5), 1e-30));
    }

    #[test]
    fn sqrt_squares_back() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..200 {
            let n = rng.gen_range(1i64..1_000_000);
            let x = Dd::from_i64(n);
            let r = x.sqrt();
            assert!(close(r * r, x, 1e-24), "sqrt({n})");
        }
    }

    // Frozen references computed with 60-digit decimal arithmetic; each row is
    // (m, q, cos hi, cos lo, sin hi, sin lo) for the phase m/q.
    const TRIG_REFS: &[(i64, i64, f64, f64, f64, f64)] = &[
        (0, 16, f64::from_bits(0x3ff0000000000000), f64::from_bits(0x0), f64::from_bits(0x0), f64::from_bits(0x0)),
        (1, 16, f64::from_bits(0x3fed906bcf328d46), f64::from_bits(0x3c7457e610231ac2), f64::from_bits(0x3fd87de2a6aea963), f64::from_bits(0xbc672cedd3d5a610)),
        (2, 16, f64::from_bits(0x3fe6a09e667f3bcd), f64::from_bits(0xbc8bdd3413b26456), f64::from_bits(0x3fe6a09e667f3bcd), f64::from_bits(0xbc8bdd3413b26456)),
        (3, 16, f64::from_bits(0x3fd87de2a6aea963), f64::from_bits(0xbc672cedd3d5a610), f64::from_bits(0x3fed906bcf328d46), f64::from_bits(0x3c7457e610231ac2)),
        (4, 16, f64::from_bits(0x33377d4c76273645), f64::from_bits(0xafd75afbc338e5fe), f64::from_bits(0x3ff0000000000000), f64::from_bits(0x0)),
        (5, 16, f64::from_bits(0xbfd87de2a6aea963), f64::from_bits(0x3c672cedd3d5a610), f64::from_bits(0x3fed906bcf328d46), f64::from_bits(0x3c7457e610231ac2)),
        (6, 16, f64::from_bits(0xbfe6a09e667f3bcd), f64::from_bits(0x3c8bdd3413b26456), f64::from_bits(0x3fe6a09e667f3bcd), f64::from_bits(0xbc8bdd3413b26456)),
        (7, 16, f64::from_bits(0xbfed906bcf328d46), f64::from_bits(0xbc7457e610231ac2), f64::from_bits(0x3fd87de2a6aea963), f64::from_bits(0xbc672cedd3d5a610)),
        (8, 16, f64::from_bits(0xbff0000000000000), f64::from_bits(0x0), f64::from_bits(0x33477d4c76273645), f64::from_bits(0xafe75afbc338e5fe)),
        (9, 16, f64::from_bits(0xbfed906bcf328d46), f64::from_bits(0xbc7457e610231ac2), f64::from_bits(0xbfd87de2a6aea963), f64::from_bits(0x3c672cedd3d5a610)),
        (10, 16, f64::from_bits(0xbfe6a09e667f3bcd), f64::from_bits(0x3c8bdd3413b26456), f64::from_bits(0xbfe6a09e667f3bcd), f64::from_bits(0x3c8bdd3413b26456)),
        (11, 16, f64::from_bits(0xbfd87de2a6aea963), f64::from_bits(0x3c672cedd3d5a610), f64::from_bits(0xbfed906bcf328d46), f64::from_bits(0xbc7457e610231ac2)),
        (12, 16, f64::from_bits(0xb3519df9589d68b3), f64::from_bits(0xaffe7bc32d955382), f64::from_bits(0xbff0000000000000), f64::from_bits(0x0)),
        (13, 16, f64::from_bits(0x3fd87de2a6aea963), f64::from_bits(0xbc672cedd3d5a610), f64::from_bits(0xbfed906bcf328d46), f64::from_bits(0xbc7457e610231ac2)),
        (14, 16, f64::from_bits(0x3fe6a09e667f3bcd), f64::from_bits(0xbc8bdd3413b26456), f64::from_bits(0xbfe6a09e667f3bcd), f64::from_bits(0x3c8bdd3413b26456)),
        (15, 16, f64::from_bits(0x3fed906bcf328d46), f64::from_bits(0x3c7457e610231ac2), f64::from_bits(0xbfd87de2a6aea963), f64::from_bits(0x3c672cedd3d5a610)),
        (1, 3, f64::from_bits(0xbfe0000000000000), f64::from_bits(0x3350000000000000), f64::from_bits(0x3febb67ae8584caa), f64::from_bits(0x3c8cec95d0b5c1e3)),
        (2, 3, f64::from_bits(0xbfe0000000000000), f64::from_bits(0xb360000000000000), f64::from_bits(0xbfebb67ae8584caa), f64::from_bits(0xbc8cec95d0b5c1e3)),
        (1, 5, f64::from_bits(0x3fd3c6ef372fe950), f64::from_bits(0xbc7f506319fcfd19), f64::from_bits(0x3fee6f0e134454ff), f64::from_bits(0x3c8798ddb868c354)),
        (2, 5, f64::from_bits(0xbfe9e3779b97f4a8), f64::from_bits(0x3c7f506319fcfd19), f64::from_bits(0x3fe2cf2304755a5e), f64::from_bits(0xbc624bd9a522ca0d)),
        (4, 5, f64::from_bits(0x3fd3c6ef372fe950), f64::from_bits(0xbc7f506319fcfd19), f64::from_bits(0xbfee6f0e134454ff), f64::from_bits(0xbc8798ddb868c354)),
        (1, 7, f64::from_bits(0x3fe3f3a0e28bedd1), f64::from_bits(0x3c8b2fbc2cf229dc), f64::from_bits(0x3fe904c37505de4b), f64::from_bits(0x3c5766b339d009ff)),
        (2, 7, f64::from_bits(0xbfcc7b90e3024582), f64::from_bits(0xbc6a50bf75360795), f64::from_bits(0x3fef329c0558e969), f64::from_bits(0xbc6c6ab5b10ae22a)),
        (3, 7, f64::from_bits(0xbfecd4bca9cb5c71), f64::from_bits(0x3c76c8e760b6b012), f64::from_bits(0x3fdbc4c04d71abc1), f64::from_bits(0x3bf5dcb6bd934eb2)),
        (6, 7, f64::from_bits(0x3fe3f3a0e28bedd1), f64::from_bits(0x3c8b2fbc2cf229dc), f64::from_bits(0xbfe904c37505de4b), f64::from_bits(0xbc5766b339d009ff)),
        (1, 11, f64::from_bits(0x3feaeb8c8764f0ba), f64::from_bits(0xbc85202f49e43cb7), f64::from_bits(0x3fe14cedf8bb580b), f64::from_bits(0x3c7ec1e4bd5f0a6f)),
        (2, 11, f64::from_bits(0x3fda9628d9c712b6), f64::from_bits(0xbc660866dd41c94e), f64::from_bits(0x3fed1bb48eee2c13), f64::from_bits(0x3c87cf05afa09ca7)),
        (5, 11, f64::from_bits(0xbfeeb42a9bcd5057), f64::from_bits(0xbc787cd8cc247dc7), f64::from_bits(0x3fd207e7fd768dbf), f64::from_bits(0x3c7ec17471546617)),
        (10, 11, f64::from_bits(0x3feaeb8c8764f0ba), f64::from_bits(0xbc85202f49e43cb7), f64::from_bits(0xbfe14cedf8bb580b), f64::from_bits(0xbc7ec1e4bd5f0a6f)),
        (1, 13, f64::from_bits(0x3fec55a7e00740e9), f64::from_bits(0xbc70d79c2c6c8e30), f64::from_bits(0x3fddbe064267c47c), f64::from_bits(0xbc72e1ea9109ccf7)),
        (2, 13, f64::from_bits(0x3fe22d961ea71119), f64::from_bits(0xbc659147f373981b), f64::from_bits(0x3fea55e242a4c3d2), f64::from_bits(0x3c8867f99b489f1d)),
        (6, 13, f64::from_bits(0xbfef11f493053d00), f64::from_bits(0xbc71b5826032832e), f64::from_bits(0x3fcea1e54bc48dbf), f64::from_bits(0x3c2240609a01722a)),
        (12, 13, f64::from_bits(0x3fec55a7e00740e9), f64::from_bits(0xbc70d79c2c6c8e30), f64::from_bits(0xbfddbe064267c47c), f64::from_bits(0x3c72e1ea9109ccf7)),
        (1, 97, f64::from_bits(0x3fefeed1e868dcb6), f64::from_bits(0x3c72d4755b674e9c), f64::from_bits(0x3fb0922224fe854b), f64::from_bits(0x3c4f7062dde26e9d)),
        (2, 97, f64::from_bits(0x3fefbb5a141a5bcb), f64::from_bits(0x3c89a55a842e16ed), f64::from_bits(0x3fc0893ca4927c85), f64::from_bits(0xbc5cfe4d6adbcecd)),
        (48, 97, f64::from_bits(0xbfeffbb43046727f), f64::from_bits(0x3c80328875dfcfeb), f64::from_bits(0x3fa0945bf7d4e2b2), f64::from_bits(0x3c1e6ac31594896a)),
        (96, 97, f64::from_bits(0x3fefeed1e868dcb6), f64::from_bits(0x3c72d4755b674e9c), f64::from_bits(0xbfb0922224fe854b), f64::from_bits(0xbc4f7062dde26e9d)),
        (1, 2027, f64::from_bits(0x3feffff5ecc2899c), f64::from_bits(0x3c827c5182f0eeb2), f64::from_bits(0x3f6964a0d73ac4c0), f64::from_bits(0xbc040094f3aa49cf)),
        (2, 2027, f64::from_bits(0x3fefffd7b3107e95), f64::from_bits(0x3c6ea702b627b115), f64::from_bits(0x3f796498d883fc39), f64::from_bits(0xbc10e396274d7f5f)),
        (1013, 2027, f64::from_bits(0xbfeffffd7b308907), f64::from_bits(0x3c8fd7a486de82f2), f64::from_bits(0x3f5964a2d6e8b34b), f64::from_bits(0x3be6f2a093aeafa4)),
        (2026, 2027, f64::from_bits(0x3feffff5ecc2899c), f64::from_bits(0x3c827c5182f0eeb2), f64::from_bits(0xbf6964a0d73ac4c0), f64::from_bits(0x3c040094f3aa49cf)),
    ];

    #[test]
    fn circle_functions_match_frozen_references() {
        for &(m, q, chi, clo, shi, slo) in TRIG_REFS {
            let x = Dd::from_ratio(m, q);
            let (c, s) = x.sincos2pi();
            let cref = Dd::new(chi, clo);
            let sref = Dd::new(shi, slo);
            assert!(close(c, cref, 1e-30), "cos 2pi*{m}/{q}");
            assert!(close(s, sref, 1e-30), "sin 2pi*{m}/{q}");
        }
    }

    #[test]
    fn circle_functions_periodic_and_pythagorean() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..300 {
            let m = rng.gen_range(-5000i64..5000);
            let q = rng.gen_range(1i64..5000);
            let x = Dd::from_ratio(m, q);
            let (c, s) = x.sincos2pi();
            let (c2, s2) = (x + Dd::from_i64(3)).sincos2pi();
            assert!(close(c, c2, 1e-29));
            assert!(close(s, s2, 1e-29));
            assert!(close(c * c + s * s, Dd::ONE, 1e-29));
        }
    }

    #[test]
    fn unit_phase_sums_cancel() {
        // Full sum of q-th roots of unity vanishes.
        for q in [3i64, 7, 16, 101] {
            let mut acc = Cdd::ZERO;
            for m in 0..q {
                acc = acc.add(Cdd::unit_phase(Dd::from_ratio(m, q)));
            }
            assert!(acc.magnitude().to_f64() < 1e-28, "q={q}");
        }
    }
}
