//! Exact scalars: the real field trait and Gaussian numbers over it.

use std::fmt::{self, Debug, Display};
use std::hash::Hash;
use std::iter::{Product, Sum};
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use num_traits::{FromPrimitive, Num, One, Signed, Zero};

/// An exact ordered field used for the real and imaginary parts of every
/// coefficient. Implemented for anything that looks like a rational number
/// (`BigRational`, `Rational64`, ...). Floating point types do not qualify:
/// they are neither `Eq` nor `Hash`.
pub trait Real:
    Clone + Debug + Display + Eq + Ord + Hash + Num + Signed + FromPrimitive + Send + Sync + 'static
{
    fn from_int(n: i64) -> Self {
        Self::from_i64(n).expect("integer fits the scalar type")
    }

    fn from_frac(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Self::from_int(num) / Self::from_int(den)
    }

    /// Parses `"n"` or `"n/d"` in base 10.
    fn parse_decimal(s: &str) -> Option<Self> {
        if s.contains('/') {
            Self::from_str_radix(s, 10).ok()
        } else {
            Self::from_str_radix(&format!("{}/1", s), 10).ok()
        }
    }
}

impl<T> Real for T where
    T: Clone
        + Debug
        + Display
        + Eq
        + Ord
        + Hash
        + Num
        + Signed
        + FromPrimitive
        + Send
        + Sync
        + 'static
{
}

/// `re + im·i` with exact parts.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Gaussian<R> {
    pub re: R,
    pub im: R,
}

impl<R: Real> Gaussian<R> {
    pub fn new(re: R, im: R) -> Self {
        Self { re, im }
    }

    pub fn real(re: R) -> Self {
        Self { re, im: R::zero() }
    }

    pub fn i() -> Self {
        Self { re: R::zero(), im: R::one() }
    }

    pub fn from_int(n: i64) -> Self {
        Self::real(R::from_int(n))
    }

    pub fn from_frac(num: i64, den: i64) -> Self {
        Self::real(R::from_frac(num, den))
    }

    pub fn from_ints(re: i64, im: i64) -> Self {
        Self::new(R::from_int(re), R::from_int(im))
    }

    pub fn conj(&self) -> Self {
        Self { re: self.re.clone(), im: -self.im.clone() }
    }

    /// `|q|² = q·conj(q)`, always a non-negative real.
    pub fn norm_sqr(&self) -> R {
        self.re.clone() * self.re.clone() + self.im.clone() * self.im.clone()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    /// True when the number is real and strictly positive.
    pub fn is_positive_real(&self) -> bool {
        self.im.is_zero() && self.re.is_positive()
    }

    pub fn inv(&self) -> Option<Self> {
        let n = self.norm_sqr();
        if n.is_zero() {
            return None;
        }
        Some(Self { re: self.re.clone() / n.clone(), im: -self.im.clone() / n })
    }

    pub fn checked_div(&self, rhs: &Self) -> Option<Self> {
        rhs.inv().map(|r| self * &r)
    }

    pub fn scale(&self, k: &R) -> Self {
        Self { re: self.re.clone() * k.clone(), im: self.im.clone() * k.clone() }
    }

    pub fn pow(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Converts between exact real types (e.g. `Rational64` to `BigRational`)
    /// through their decimal `num/den` representation.
    pub fn convert<S: Real>(&self) -> Gaussian<S> {
        let cv = |x: &R| S::parse_decimal(&x.to_string()).expect("exact conversion");
        Gaussian::new(cv(&self.re), cv(&self.im))
    }
}

impl<R: Real> Zero for Gaussian<R> {
    fn zero() -> Self {
        Self { re: R::zero(), im: R::zero() }
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
}

impl<R: Real> One for Gaussian<R> {
    fn one() -> Self {
        Self { re: R::one(), im: R::zero() }
    }
}

impl<'a, R: Real> Add<&'a Gaussian<R>> for &'a Gaussian<R> {
    type Output = Gaussian<R>;
    fn add(self, rhs: &Gaussian<R>) -> Gaussian<R> {
        Gaussian { re: self.re.clone() + rhs.re.clone(), im: self.im.clone() + rhs.im.clone() }
    }
}

impl<'a, R: Real> Sub<&'a Gaussian<R>> for &'a Gaussian<R> {
    type Output = Gaussian<R>;
    fn sub(self, rhs: &Gaussian<R>) -> Gaussian<R> {
        Gaussian { re: self.re.clone() - rhs.re.clone(), im: self.im.clone() - rhs.im.clone() }
    }
}

impl<'a, R: Real> Mul<&'a Gaussian<R>> for &'a Gaussian<R> {
    type Output = Gaussian<R>;
    fn mul(self, rhs: &Gaussian<R>) -> Gaussian<R> {
        Gaussian {
            re: self.re.clone() * rhs.re.clone() - self.im.clone() * rhs.im.clone(),
            im: self.re.clone() * rhs.im.clone() + self.im.clone() * rhs.re.clone(),
        }
    }
}

impl<R: Real> Neg for &Gaussian<R> {
    type Output = Gaussian<R>;
    fn neg(self) -> Gaussian<R> {
        Gaussian { re: -self.re.clone(), im: -self.im.clone() }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl<R: Real> $tr for Gaussian<R> {
            type Output = Gaussian<R>;
            fn $m(self, rhs: Gaussian<R>) -> Gaussian<R> {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl<R: Real> Neg for Gaussian<R> {
    type Output = Gaussian<R>;
    fn neg(self) -> Gaussian<R> {
        -&self
    }
}

impl<R: Real> AddAssign<&Gaussian<R>> for Gaussian<R> {
    fn add_assign(&mut self, rhs: &Gaussian<R>) {
        self.re = self.re.clone() + rhs.re.clone();
        self.im = self.im.clone() + rhs.im.clone();
    }
}

impl<R: Real> SubAssign<&Gaussian<R>> for Gaussian<R> {
    fn sub_assign(&mut self, rhs: &Gaussian<R>) {
        self.re = self.re.clone() - rhs.re.clone();
        self.im = self.im.clone() - rhs.im.clone();
    }
}

impl<R: Real> MulAssign<&Gaussian<R>> for Gaussian<R> {
    fn mul_assign(&mut self, rhs: &Gaussian<R>) {
        *self = &*self * rhs;
    }
}

impl<R: Real> Sum for Gaussian<R> {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::zero(), |mut acc, x| {
            acc += &x;
            acc
        })
    }
}

impl<R: Real> Product for Gaussian<R> {
    fn product<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::one(), |acc, x| &acc * &x)
    }
}

/// Parseable by the expression grammar: `3/2`, `-i`, `2*i`, `(1 - 1/2*i)`.
impl<R: Real> Display for Gaussian<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let im_part = |f: &mut fmt::Formatter<'_>, im: &R| {
            if im.is_one() {
                write!(f, "i")
            } else {
                write!(f, "{}*i", im)
            }
        };
        if self.im.is_zero() {
            write!(f, "{}", self.re)
        } else if self.re.is_zero() {
            if self.im.is_negative() {
                write!(f, "-")?;
                im_part(f, &self.im.abs())
            } else {
                im_part(f, &self.im)
            }
        } else {
            write!(f, "({} {} ", self.re, if self.im.is_negative() { "-" } else { "+" })?;
            im_part(f, &self.im.abs())?;
            write!(f, ")")
        }
    }
}
