//! Coefficient scalars.
//!
//! Everything in the crate runs on [`Complex64`] by default. [`MpComplex`] is a
//! fixed-width extended-precision complex type, selected through the const
//! parameter `BITS`, for constructions of high order where binomial growth
//! starts to eat into the binary64 residuals.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use astro_float::{BigFloat, Consts, RoundingMode, Word};
use num_complex::Complex64;

/// Complex coefficient field used by the polynomial types.
pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_parts(re: f64, im: f64) -> Self;
    fn from_integer(k: i128) -> Self;
    fn to_c64(&self) -> Complex64;
    fn is_zero(&self) -> bool;
    fn conj(&self) -> Self;
    fn is_finite(&self) -> bool;

    /// The point `1/2 + i tan(pi * num / den) / 2`, i.e. the point of the line
    /// `Re z = 1/2` whose argument is `pi * num / den`.
    fn half_line_point(num: u64, den: u64) -> Self;

    fn from_c64(z: Complex64) -> Self {
        Self::from_parts(z.re, z.im)
    }

    fn modulus(&self) -> f64 {
        self.to_c64().norm()
    }

    fn scale_int(&self, k: i128) -> Self {
        self.clone() * Self::from_integer(k)
    }

    fn powu(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base.clone();
            }
            e >>= 1;
            if e > 0 {
                base = base.clone() * base;
            }
        }
        acc
    }
}

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }

    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }

    fn from_parts(re: f64, im: f64) -> Self {
        Complex64::new(re, im)
    }

    fn from_integer(k: i128) -> Self {
        Complex64::new(k as f64, 0.0)
    }

    fn to_c64(&self) -> Complex64 {
        *self
    }

    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }

    fn conj(&self) -> Self {
        Complex64::conj(self)
    }

    fn is_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }

    fn half_line_point(num: u64, den: u64) -> Self {
        let theta = std::f64::consts::PI * num as f64 / den as f64;
        Complex64::new(0.5, theta.tan() / 2.0)
    }

    fn powu(&self, e: u32) -> Self {
        Complex64::powu(self, e)
    }
}

const RM: RoundingMode = RoundingMode::ToEven;

/// Complex number with `BITS`-bit significands in both parts.
#[derive(Clone, Debug)]
pub struct MpComplex<const BITS: usize> {
    re: BigFloat,
    im: BigFloat,
}

impl<const BITS: usize> MpComplex<BITS> {
    pub fn new(re: BigFloat, im: BigFloat) -> Self {
        Self { re, im }
    }

    pub fn re(&self) -> &BigFloat {
        &self.re
    }

    pub fn im(&self) -> &BigFloat {
        &self.im
    }
}

/// Nearest binary64 value of a big float (ties to even on the top word).
pub fn big_to_f64(x: &BigFloat) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x.is_inf_pos() {
        return f64::INFINITY;
    }
    if x.is_inf_neg() {
        return f64::NEG_INFINITY;
    }
    if x.is_zero() {
        return 0.0;
    }
    let Some((mantissa, _, _, exponent, _)) = x.as_raw_parts() else {
        return f64::NAN;
    };
    let word_bits = (std::mem::size_of::<Word>() * 8) as i32;
    let top = mantissa.last().copied().unwrap_or(0) as f64;
    let magnitude = ldexp(top, exponent - word_bits);
    if x.is_negative() {
        -magnitude
    } else {
        magnitude
    }
}

/// `x * 2^e` without intermediate overflow or underflow of the power.
fn ldexp(mut x: f64, mut e: i32) -> f64 {
    while e > 1000 {
        x *= 2f64.powi(1000);
        e -= 1000;
    }
    while e < -1000 {
        x *= 2f64.powi(-1000);
        e += 1000;
    }
    x * 2f64.powi(e)
}

impl<const BITS: usize> PartialEq for MpComplex<BITS> {
    fn eq(&self, other: &Self) -> bool {
        self.re.cmp(&other.re) == Some(0) && self.im.cmp(&other.im) == Some(0)
    }
}

impl<const BITS: usize> Add for MpComplex<BITS> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self {
            re: self.re.add(&rhs.re, BITS, RM),
            im: self.im.add(&rhs.im, BITS, RM),
        }
    }
}

impl<const BITS: usize> Sub for MpComplex<BITS> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self {
            re: self.re.sub(&rhs.re, BITS, RM),
            im: self.im.sub(&rhs.im, BITS, RM),
        }
    }
}

impl<const BITS: usize> Mul for MpComplex<BITS> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let ac = self.re.mul(&rhs.re, BITS, RM);
        let bd = self.im.mul(&rhs.im, BITS, RM);
        let ad = self.re.mul(&rhs.im, BITS, RM);
        let bc = self.im.mul(&rhs.re, BITS, RM);
        Self {
            re: ac.sub(&bd, BITS, RM),
            im: ad.add(&bc, BITS, RM),
        }
    }
}

#[allow(clippy::suspicious_arithmetic_impl)]
impl<const BITS: usize> Div for MpComplex<BITS> {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        let denom = rhs
            .re
            .mul(&rhs.re, BITS, RM)
            .add(&rhs.im.mul(&rhs.im, BITS, RM), BITS, RM);
        let num = self * rhs.conj();
        Self {
            re: num.re.div(&denom, BITS, RM),
            im: num.im.div(&denom, BITS, RM),
        }
    }
}

impl<const BITS: usize> Neg for MpComplex<BITS> {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            re: self.re.neg(),
            im: self.im.neg(),
        }
    }
}

impl<const BITS: usize> Scalar for MpComplex<BITS> {
    fn zero() -> Self {
        Self::from_parts(0.0, 0.0)
    }

    fn one() -> Self {
        Self::from_parts(1.0, 0.0)
    }

    fn from_parts(re: f64, im: f64) -> Self {
        Self {
            re: BigFloat::from_f64(re, BITS),
            im: BigFloat::from_f64(im, BITS),
        }
    }

    fn from_integer(k: i128) -> Self {
        Self {
            re: BigFloat::from_i128(k, BITS),
            im: BigFloat::from_f64(0.0, BITS),
        }
    }

    fn to_c64(&self) -> Complex64 {
        Complex64::new(big_to_f64(&self.re), big_to_f64(&self.im))
    }

    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    fn conj(&self) -> Self {
        Self {
            re: self.re.clone(),
            im: BigFloat::neg(&self.im),
        }
    }

    fn is_finite(&self) -> bool {
        !(self.re.is_nan() || self.re.is_inf() || self.im.is_nan() || self.im.is_inf())
    }

    fn half_line_point(num: u64, den: u64) -> Self {
        let mut cc = Consts::new().expect("astro-float constant cache");
        // Work with guard bits so the final rounding to BITS dominates.
        let p = BITS + 64;
        let pi = cc.pi(p, RM);
        let theta = pi
            .mul(&BigFloat::from_u64(num, p), p, RM)
            .div(&BigFloat::from_u64(den, p), p, RM);
        let half_tan = theta.tan(p, RM, &mut cc).div(&BigFloat::from_u64(2, p), p, RM);
        let mut re = BigFloat::from_f64(0.5, BITS);
        let mut im = half_tan;
        re.set_precision(BITS, RM).expect("precision");
        im.set_precision(BITS, RM).expect("precision");
        Self { re, im }
    }
}
