//! Forward-mode automatic differentiation scalar.
//!
//! [`Dual`] carries a value and a single derivative component and implements
//! [`num_traits::Float`], so it can be substituted for `f64` anywhere in the
//! crate (including inside `num_complex::Complex`). Seeding one parameter
//! with derivative 1 and evaluating a function yields the exact partial
//! derivative of the result with respect to that parameter.

use std::fmt;
use std::iter::Sum;
use std::num::FpCategory;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Rem, RemAssign, Sub, SubAssign};

use num_traits::{Float, FloatConst, FromPrimitive, Num, NumCast, One, ToPrimitive, Zero};

use crate::scalar::Scalar;

/// Value/derivative pair. Comparisons are lexicographic on (value, deriv) so
/// equality stays consistent with ordering; all numeric branches in practice
/// resolve on the value part.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct Dual<T> {
    pub value: T,
    pub deriv: T,
}

impl<T: Scalar> Dual<T> {
    pub fn new(value: T, deriv: T) -> Self {
        Dual { value, deriv }
    }

    /// Lift a constant: zero derivative.
    pub fn constant(value: T) -> Self {
        Dual { value, deriv: T::zero() }
    }

    /// Mark a value as the differentiation variable: unit derivative.
    pub fn variable(value: T) -> Self {
        Dual { value, deriv: T::one() }
    }

    fn chain(self, value: T, dfdv: T) -> Self {
        Dual { value, deriv: self.deriv * dfdv }
    }
}

impl<T: Scalar> fmt::Display for Dual<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}+{}ε", self.value, self.deriv)
    }
}

impl<T: Scalar> Add for Dual<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Dual::new(self.value + rhs.value, self.deriv + rhs.deriv)
    }
}

impl<T: Scalar> Sub for Dual<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Dual::new(self.value - rhs.value, self.deriv - rhs.deriv)
    }
}

impl<T: Scalar> Mul for Dual<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Dual::new(
            self.value * rhs.value,
            self.deriv * rhs.value + self.value * rhs.deriv,
        )
    }
}

impl<T: Scalar> Div for Dual<T> {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        Dual::new(
            self.value / rhs.value,
            (self.deriv * rhs.value - self.value * rhs.deriv) / (rhs.value * rhs.value),
        )
    }
}

impl<T: Scalar> Rem for Dual<T> {
    type Output = Self;
    fn rem(self, rhs: Self) -> Self {
        // x mod y = x - y*trunc(x/y); derivative away from jumps
        let q = (self.value / rhs.value).trunc();
        Dual::new(self.value % rhs.value, self.deriv - q * rhs.deriv)
    }
}

impl<T: Scalar> Neg for Dual<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Dual::new(-self.value, -self.deriv)
    }
}

impl<T: Scalar> AddAssign for Dual<T> {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}
impl<T: Scalar> SubAssign for Dual<T> {
    fn sub_assign(&mut self, rhs: Self) {
        *self = *self - rhs;
    }
}
impl<T: Scalar> MulAssign for Dual<T> {
    fn mul_assign(&mut self, rhs: Self) {
        *self = *self * rhs;
    }
}
impl<T: Scalar> DivAssign for Dual<T> {
    fn div_assign(&mut self, rhs: Self) {
        *self = *self / rhs;
    }
}
impl<T: Scalar> RemAssign for Dual<T> {
    fn rem_assign(&mut self, rhs: Self) {
        *self = *self % rhs;
    }
}

impl<T: Scalar> Sum for Dual<T> {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::zero(), |a, b| a + b)
    }
}

impl<T: Scalar> Zero for Dual<T> {
    fn zero() -> Self {
        Dual::constant(T::zero())
    }
    fn is_zero(&self) -> bool {
        self.value.is_zero() && self.deriv.is_zero()
    }
}

impl<T: Scalar> One for Dual<T> {
    fn one() -> Self {
        Dual::constant(T::one())
    }
}

impl<T: Scalar> Num for Dual<T> {
    type FromStrRadixErr = T::FromStrRadixErr;
    fn from_str_radix(str: &str, radix: u32) -> Result<Self, Self::FromStrRadixErr> {
        T::from_str_radix(str, radix).map(Dual::constant)
    }
}

impl<T: Scalar> ToPrimitive for Dual<T> {
    fn to_i64(&self) -> Option<i64> {
        self.value.to_i64()
    }
    fn to_u64(&self) -> Option<u64> {
        self.value.to_u64()
    }
    fn to_f64(&self) -> Option<f64> {
        self.value.to_f64()
    }
}

impl<T: Scalar> FromPrimitive for Dual<T> {
    fn from_i64(n: i64) -> Option<Self> {
        T::from_i64(n).map(Dual::constant)
    }
    fn from_u64(n: u64) -> Option<Self> {
        T::from_u64(n).map(Dual::constant)
    }
    fn from_f64(n: f64) -> Option<Self> {
        T::from_f64(n).map(Dual::constant)
    }
}

impl<T: Scalar> NumCast for Dual<T> {
    fn from<N: ToPrimitive>(n: N) -> Option<Self> {
        T::from(n).map(Dual::constant)
    }
}

impl<T: Scalar> FloatConst for Dual<T> {
    fn E() -> Self {
        Dual::constant(T::E())
    }
    fn FRAC_1_PI() -> Self {
        Dual::constant(T::FRAC_1_PI())
    }
    fn FRAC_1_SQRT_2() -> Self {
        Dual::constant(T::FRAC_1_SQRT_2())
    }
    fn FRAC_2_PI() -> Self {
        Dual::constant(T::FRAC_2_PI())
    }
    fn FRAC_2_SQRT_PI() -> Self {
        Dual::constant(T::FRAC_2_SQRT_PI())
    }
    fn FRAC_PI_2() -> Self {
        Dual::constant(T::FRAC_PI_2())
    }
    fn FRAC_PI_3() -> Self {
        Dual::constant(T::FRAC_PI_3())
    }
    fn FRAC_PI_4() -> Self {
        Dual::constant(T::FRAC_PI_4())
    }
    fn FRAC_PI_6() -> Self {
        Dual::constant(T::FRAC_PI_6())
    }
    fn FRAC_PI_8() -> Self {
        Dual::constant(T::FRAC_PI_8())
    }
    fn LN_10() -> Self {
        Dual::constant(T::LN_10())
    }
    fn LN_2() -> Self {
        Dual::constant(T::LN_2())
    }
    fn LOG10_E() -> Self {
        Dual::constant(T::LOG10_E())
    }
    fn LOG2_E() -> Self {
        Dual::constant(T::LOG2_E())
    }
    fn PI() -> Self {
        Dual::constant(T::PI())
    }
    fn SQRT_2() -> Self {
        Dual::constant(T::SQRT_2())
    }
}

impl<T: Scalar> Float for Dual<T> {
    fn nan() -> Self {
        Dual::constant(T::nan())
    }
    fn infinity() -> Self {
        Dual::constant(T::infinity())
    }
    fn neg_infinity() -> Self {
        Dual::constant(T::neg_infinity())
    }
    fn neg_zero() -> Self {
        Dual::constant(T::neg_zero())
    }
    fn min_value() -> Self {
        Dual::constant(T::min_value())
    }
    fn min_positive_value() -> Self {
        Dual::constant(T::min_positive_value())
    }
    fn max_value() -> Self {
        Dual::constant(T::max_value())
    }
    fn epsilon() -> Self {
        Dual::constant(T::epsilon())
    }

    fn is_nan(self) -> bool {
        self.value.is_nan() || self.deriv.is_nan()
    }
    fn is_infinite(self) -> bool {
        self.value.is_infinite() || self.deriv.is_infinite()
    }
    fn is_finite(self) -> bool {
        self.value.is_finite() && self.deriv.is_finite()
    }
    fn is_normal(self) -> bool {
        self.value.is_normal()
    }
    fn classify(self) -> FpCategory {
        self.value.classify()
    }
    fn is_sign_positive(self) -> bool {
        self.value.is_sign_positive()
    }
    fn is_sign_negative(self) -> bool {
        self.value.is_sign_negative()
    }

    fn floor(self) -> Self {
        Dual::constant(self.value.floor())
    }
    fn ceil(self) -> Self {
        Dual::constant(self.value.ceil())
    }
    fn round(self) -> Self {
        Dual::constant(self.value.round())
    }
    fn trunc(self) -> Self {
        Dual::constant(self.value.trunc())
    }
    fn fract(self) -> Self {
        Dual::new(self.value.fract(), self.deriv)
    }

    fn abs(self) -> Self {
        let s = self.value.signum();
        Dual::new(self.value.abs(), self.deriv * s)
    }
    fn signum(self) -> Self {
        Dual::constant(self.value.signum())
    }

    fn mul_add(self, a: Self, b: Self) -> Self {
        self * a + b
    }
    fn recip(self) -> Self {
        Self::one() / self
    }

    fn powi(self, n: i32) -> Self {
        let vp = self.value.powi(n - 1);
        Dual::new(
            self.value * vp,
            T::from_i32(n).expect("i32 fits scalar") * vp * self.deriv,
        )
    }
    fn powf(self, n: Self) -> Self {
        let v = self.value.powf(n.value);
        let dv = n.value * self.value.powf(n.value - T::one()) * self.deriv
            + v * self.value.ln() * n.deriv;
        Dual::new(v, dv)
    }
    fn sqrt(self) -> Self {
        let v = self.value.sqrt();
        Dual::new(v, self.deriv / (v + v))
    }
    fn cbrt(self) -> Self {
        let v = self.value.cbrt();
        self.chain(v, (T::from_f64(3.0).unwrap() * v * v).recip())
    }

    fn exp(self) -> Self {
        let v = self.value.exp();
        self.chain(v, v)
    }
    fn exp2(self) -> Self {
        let v = self.value.exp2();
        self.chain(v, v * T::LN_2())
    }
    fn ln(self) -> Self {
        self.chain(self.value.ln(), self.value.recip())
    }
    fn log(self, base: Self) -> Self {
        self.ln() / base.ln()
    }
    fn log2(self) -> Self {
        self.chain(self.value.log2(), (self.value * T::LN_2()).recip())
    }
    fn log10(self) -> Self {
        self.chain(self.value.log10(), (self.value * T::LN_10()).recip())
    }
    fn exp_m1(self) -> Self {
        self.chain(self.value.exp_m1(), self.value.exp())
    }
    fn ln_1p(self) -> Self {
        self.chain(self.value.ln_1p(), (T::one() + self.value).recip())
    }

    fn max(self, other: Self) -> Self {
        if self.value >= other.value {
            self
        } else {
            other
        }
    }
    fn min(self, other: Self) -> Self {
        if self.value <= other.value {
            self
        } else {
            other
        }
    }
    fn abs_sub(self, other: Self) -> Self {
        if self.value > other.value {
            self - other
        } else {
            Self::zero()
        }
    }

    fn hypot(self, other: Self) -> Self {
        let h = self.value.hypot(other.value);
        Dual::new(h, (self.value * self.deriv + other.value * other.deriv) / h)
    }

    fn sin(self) -> Self {
        self.chain(self.value.sin(), self.value.cos())
    }
    fn cos(self) -> Self {
        self.chain(self.value.cos(), -self.value.sin())
    }
    fn tan(self) -> Self {
        let t = self.value.tan();
        self.chain(t, T::one() + t * t)
    }
    fn sin_cos(self) -> (Self, Self) {
        let (s, c) = self.value.sin_cos();
        (self.chain(s, c), self.chain(c, -s))
    }
    fn asin(self) -> Self {
        self.chain(
            self.value.asin(),
            (T::one() - self.value * self.value).sqrt().recip(),
        )
    }
    fn acos(self) -> Self {
        self.chain(
            self.value.acos(),
            -(T::one() - self.value * self.value).sqrt().recip(),
        )
    }
    fn atan(self) -> Self {
        self.chain(self.value.atan(), (T::one() + self.value * self.value).recip())
    }
    fn atan2(self, other: Self) -> Self {
        let den = self.value * self.value + other.value * other.value;
        Dual::new(
            self.value.atan2(other.value),
            (other.value * self.deriv - self.value * other.deriv) / den,
        )
    }

    fn sinh(self) -> Self {
        self.chain(self.value.sinh(), self.value.cosh())
    }
    fn cosh(self) -> Self {
        self.chain(self.value.cosh(), self.value.sinh())
    }
    fn tanh(self) -> Self {
        let t = self.value.tanh();
        self.chain(t, T::one() - t * t)
    }
    fn asinh(self) -> Self {
        self.chain(
            self.value.asinh(),
            (self.value * self.value + T::one()).sqrt().recip(),
        )
    }
    fn acosh(self) -> Self {
        self.chain(
            self.value.acosh(),
            (self.value * self.value - T::one()).sqrt().recip(),
        )
    }
    fn atanh(self) -> Self {
        self.chain(self.value.atanh(), (T::one() - self.value * self.value).recip())
    }

    fn integer_decode(self) -> (u64, i16, i8) {
        self.value.integer_decode()
    }
}
