//! Accurate polynomial evaluation: double-double Horner and exact dyadic
//! evaluation of integer polynomials.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{Signed, ToPrimitive, Zero};

pub(crate) const UNIT_ROUNDOFF: f64 = f64::EPSILON / 2.0;

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// An unevaluated sum `hi + lo` with `|lo| ≤ ulp(hi)/2`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub(crate) struct DoubleDouble {
    pub hi: f64,
    pub lo: f64,
}

impl DoubleDouble {
    pub fn new(hi: f64, lo: f64) -> Self {
        let (hi, lo) = quick_two_sum(hi, lo);
        Self { hi, lo }
    }

    pub fn from_bigint(n: &BigInt) -> Self {
        let hi = bigint_to_f64(n);
        let rest = n - BigInt::from_f64_exact(hi);
        Self::new(hi, bigint_to_f64(&rest))
    }

    #[inline]
    pub fn add(self, o: Self) -> Self {
        let (s, e) = two_sum(self.hi, o.hi);
        let e = e + self.lo + o.lo;
        let (hi, lo) = quick_two_sum(s, e);
        Self { hi, lo }
    }

    #[inline]
    pub fn neg(self) -> Self {
        Self {
            hi: -self.hi,
            lo: -self.lo,
        }
    }

    #[inline]
    fn mul_f64(self, y: f64) -> Self {
        let (p, e) = two_prod(self.hi, y);
        let e = e + self.lo * y;
        let (hi, lo) = quick_two_sum(p, e);
        Self { hi, lo }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
}

trait FromF64Exact {
    fn from_f64_exact(x: f64) -> Self;
}

impl FromF64Exact for BigInt {
    fn from_f64_exact(x: f64) -> Self {
        // Rounded values of integers are integers, so this is exact.
        num_traits::FromPrimitive::from_f64(x).unwrap_or_else(BigInt::zero)
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct ComplexDd {
    pub re: DoubleDouble,
    pub im: DoubleDouble,
}

impl ComplexDd {
    pub fn from_parts(re: DoubleDouble, im: DoubleDouble) -> Self {
        Self { re, im }
    }

    #[inline]
    pub fn add(self, o: Self) -> Self {
        Self {
            re: self.re.add(o.re),
            im: self.im.add(o.im),
        }
    }

    #[inline]
    fn mul_c64(self, z: Complex64) -> Self {
        Self {
            re: self.re.mul_f64(z.re).add(self.im.mul_f64(z.im).neg()),
            im: self.re.mul_f64(z.im).add(self.im.mul_f64(z.re)),
        }
    }

    pub fn to_c64(self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }
}

/// Value and derivative of `Σ c_k z^k` (ascending) in double-double
/// arithmetic, plus `Σ |c_k| |z|^k` for error bounds.
pub(crate) fn horner_dd(coeffs: &[ComplexDd], z: Complex64) -> (Complex64, Complex64, f64) {
    let mut value = ComplexDd::default();
    let mut deriv = ComplexDd::default();
    let mut magnitude = 0.0;
    let r = z.norm();
    for (k, c) in coeffs.iter().enumerate().rev() {
        if k + 1 < coeffs.len() {
            deriv = deriv.mul_c64(z).add(value);
        }
        value = value.mul_c64(z).add(*c);
        magnitude = magnitude * r + c.to_c64().norm();
    }
    (value.to_c64(), deriv.to_c64(), magnitude)
}

pub(crate) fn bigint_to_f64(n: &BigInt) -> f64 {
    let bits = n.bits();
    if bits <= 1000 {
        return n.to_f64().unwrap_or(f64::NAN);
    }
    let shift = bits - 64;
    let top = (n >> shift).to_f64().unwrap_or(f64::NAN);
    top * 2f64.powi(shift as i32)
}

/// `n / 2^shift` rounded to f64.
fn scaled_to_f64(n: &BigInt, shift: u64) -> f64 {
    if n.is_zero() {
        return 0.0;
    }
    let bits = n.bits();
    let drop = bits.saturating_sub(64);
    let top = (n.abs() >> drop).to_f64().unwrap_or(f64::NAN);
    let value = top * 2f64.powf(drop as f64 - shift as f64);
    if n.is_negative() {
        -value
    } else {
        value
    }
}

/// `x = m · 2^e` with integer `m`.
fn decompose(x: f64) -> (BigInt, i64) {
    if x == 0.0 {
        return (BigInt::zero(), 0);
    }
    let bits = x.to_bits();
    let sign = if bits >> 63 == 0 { 1i64 } else { -1 };
    let exponent = ((bits >> 52) & 0x7ff) as i64;
    let mantissa = if exponent == 0 {
        (bits & 0xf_ffff_ffff_ffff) << 1
    } else {
        (bits & 0xf_ffff_ffff_ffff) | 0x10_0000_0000_0000
    };
    (BigInt::from(sign * mantissa as i64), exponent - 1075)
}

fn gaussian_mul(a: &(BigInt, BigInt), b: &(BigInt, BigInt)) -> (BigInt, BigInt) {
    (&a.0 * &b.0 - &a.1 * &b.1, &a.0 * &b.1 + &a.1 * &b.0)
}

/// Exact value and derivative of an integer polynomial at a binary
/// floating-point point, each rounded once to f64.
pub(crate) fn exact_eval(coeffs: &[BigInt], z: Complex64) -> (Complex64, Complex64) {
    let (mr, er) = decompose(z.re);
    let (mi, ei) = decompose(z.im);
    let e = match (z.re == 0.0, z.im == 0.0) {
        (true, true) => 0,
        (true, false) => ei,
        (false, true) => er,
        (false, false) => er.min(ei),
    };
    let lift = |m: BigInt, ex: i64| if m.is_zero() { m } else { m << (ex - e) as u64 };
    let (gz, scale) = if e >= 0 {
        ((lift(mr, er) << e as u64, lift(mi, ei) << e as u64), 0u64)
    } else {
        ((lift(mr, er), lift(mi, ei)), (-e) as u64)
    };
    let run = |cs: &[BigInt]| -> Complex64 {
        let Some((last, rest)) = cs.split_last() else {
            return Complex64::new(0.0, 0.0);
        };
        let n = rest.len() as u64;
        let mut v = (last.clone(), BigInt::zero());
        for (j, c) in rest.iter().rev().enumerate() {
            v = gaussian_mul(&v, &gz);
            v.0 += c << (scale * (j as u64 + 1));
        }
        Complex64::new(scaled_to_f64(&v.0, scale * n), scaled_to_f64(&v.1, scale * n))
    };
    let deriv: Vec<BigInt> = coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, c)| c * BigInt::from(k))
        .collect();
    (run(coeffs), run(&deriv))
}
