//! Exact scalars: Gaussian rationals `Q(i)` and the extension `Q(i)[s]/(s^2 - 2)`.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

fn rat_to_f64(r: &BigRational) -> f64 {
    let n = r.numer().to_f64().unwrap_or(f64::NAN);
    let d = r.denom().to_f64().unwrap_or(f64::NAN);
    if n.is_finite() && d.is_finite() {
        n / d
    } else {
        // huge numerator/denominator: scale down through the bit length
        let shift = r.numer().bits().max(r.denom().bits()).saturating_sub(900) as usize;
        let n = (r.numer() >> shift).to_f64().unwrap_or(0.0);
        let d = (r.denom() >> shift).to_f64().unwrap_or(1.0);
        n / d
    }
}

/// Rational number with an `i64` fast path; values that do not fit are
/// held as big rationals. The representation is canonical.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Rat {
    /// Reduced, denominator positive.
    Small(i64, i64),
    Big(BigRational),
}

impl Default for Rat {
    fn default() -> Self {
        Rat::Small(0, 1)
    }
}

impl Rat {
    pub fn zero() -> Self {
        Rat::Small(0, 1)
    }
    pub fn int(k: i64) -> Self {
        Rat::Small(k, 1)
    }
    fn from_i128(n: i128, d: i128) -> Self {
        debug_assert!(d != 0);
        let g = num_integer::Integer::gcd(&n, &d).max(1);
        let (mut n, mut d) = (n / g, d / g);
        if d < 0 {
            n = -n;
            d = -d;
        }
        match (i64::try_from(n), i64::try_from(d)) {
            (Ok(a), Ok(b)) => Rat::Small(a, b),
            _ => Rat::Big(BigRational::new(BigInt::from(n), BigInt::from(d))),
        }
    }
    pub fn from_big(r: BigRational) -> Self {
        match (r.numer().to_i64(), r.denom().to_i64()) {
            (Some(a), Some(b)) => Rat::Small(a, b),
            _ => Rat::Big(r),
        }
    }
    pub fn to_big(&self) -> BigRational {
        match self {
            Rat::Small(a, b) => BigRational::new(BigInt::from(*a), BigInt::from(*b)),
            Rat::Big(r) => r.clone(),
        }
    }
    pub fn is_zero(&self) -> bool {
        matches!(self, Rat::Small(0, _))
    }
    pub fn is_one(&self) -> bool {
        matches!(self, Rat::Small(1, 1))
    }
    pub fn is_negative(&self) -> bool {
        match self {
            Rat::Small(a, _) => *a < 0,
            Rat::Big(r) => r.is_negative(),
        }
    }
    pub fn add(&self, o: &Rat) -> Rat {
        match (self, o) {
            (Rat::Small(0, _), _) => o.clone(),
            (_, Rat::Small(0, _)) => self.clone(),
            (Rat::Small(a, b), Rat::Small(c, d)) => {
                let (a, b, c, d) = (*a as i128, *b as i128, *c as i128, *d as i128);
                if b == d {
                    return Rat::from_i128(a + c, b);
                }
                match (a * d).checked_add(c * b) {
                    Some(num) => Rat::from_i128(num, b * d),
                    None => Rat::from_big(self.to_big() + o.to_big()),
                }
            }
            _ => Rat::from_big(self.to_big() + o.to_big()),
        }
    }
    pub fn neg(&self) -> Rat {
        match self {
            Rat::Small(a, b) if *a != i64::MIN => Rat::Small(-a, *b),
            _ => Rat::from_big(-self.to_big()),
        }
    }
    pub fn sub(&self, o: &Rat) -> Rat {
        self.add(&o.neg())
    }
    pub fn mul(&self, o: &Rat) -> Rat {
        match (self, o) {
            (Rat::Small(0, _), _) | (_, Rat::Small(0, _)) => Rat::zero(),
            (Rat::Small(1, 1), _) => o.clone(),
            (_, Rat::Small(1, 1)) => self.clone(),
            (Rat::Small(a, b), Rat::Small(c, d)) => {
                Rat::from_i128(*a as i128 * *c as i128, *b as i128 * *d as i128)
            }
            _ => Rat::from_big(self.to_big() * o.to_big()),
        }
    }
    /// `None` when dividing by zero.
    pub fn div(&self, o: &Rat) -> Option<Rat> {
        match o {
            Rat::Small(0, _) => None,
            Rat::Small(c, d) => Some(self.mul(&Rat::from_i128(*d as i128, *c as i128))),
            Rat::Big(r) => Some(Rat::from_big(self.to_big() / r)),
        }
    }
    pub fn to_f64(&self) -> f64 {
        match self {
            Rat::Small(a, b) => *a as f64 / *b as f64,
            Rat::Big(r) => rat_to_f64(r),
        }
    }
}

impl fmt::Display for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rat::Small(a, 1) => write!(f, "{a}"),
            Rat::Small(a, b) => write!(f, "{a}/{b}"),
            Rat::Big(r) => write!(f, "{r}"),
        }
    }
}

/// Gaussian rational `re + i im`.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct GaussQ {
    pub re: Rat,
    pub im: Rat,
}

impl GaussQ {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        GaussQ { re: Rat::from_big(re), im: Rat::from_big(im) }
    }
    pub fn from_rats(re: Rat, im: Rat) -> Self {
        GaussQ { re, im }
    }
    pub fn from_ints(re: i64, im: i64) -> Self {
        GaussQ { re: Rat::int(re), im: Rat::int(im) }
    }
    pub fn real(r: BigRational) -> Self {
        GaussQ::from_rats(Rat::from_big(r), Rat::zero())
    }
    pub fn frac(n: i64, d: i64) -> Self {
        GaussQ::from_rats(Rat::from_i128(n as i128, d as i128), Rat::zero())
    }
    pub fn i() -> Self {
        GaussQ::from_ints(0, 1)
    }
    pub fn zero() -> Self {
        GaussQ::from_ints(0, 0)
    }
    pub fn one() -> Self {
        GaussQ::from_ints(1, 0)
    }
    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
    pub fn is_one(&self) -> bool {
        self.re.is_one() && self.im.is_zero()
    }
    pub fn conj(&self) -> Self {
        GaussQ::from_rats(self.re.clone(), self.im.neg())
    }
    pub fn norm_sqr(&self) -> BigRational {
        self.re.mul(&self.re).add(&self.im.mul(&self.im)).to_big()
    }
    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let d = self.re.mul(&self.re).add(&self.im.mul(&self.im));
        Some(GaussQ::from_rats(self.re.div(&d)?, self.im.neg().div(&d)?))
    }
    pub fn pow(&self, k: u32) -> Self {
        let mut out = GaussQ::one();
        for _ in 0..k {
            out = &out * self;
        }
        out
    }
    pub fn scale(&self, r: &BigRational) -> Self {
        let r = Rat::from_big(r.clone());
        GaussQ::from_rats(self.re.mul(&r), self.im.mul(&r))
    }
    pub fn to_c64(&self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }
}

impl fmt::Display for GaussQ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.re.is_zero(), self.im.is_zero()) {
            (true, true) => write!(f, "0"),
            (false, true) => write!(f, "{}", self.re),
            (true, false) => write!(f, "{}i", self.im),
            (false, false) => {
                if self.im.is_negative() {
                    write!(f, "({}-{}i)", self.re, self.im.neg())
                } else {
                    write!(f, "({}+{}i)", self.re, self.im)
                }
            }
        }
    }
}

impl<'a> Add<&'a GaussQ> for &'a GaussQ {
    type Output = GaussQ;
    fn add(self, o: &GaussQ) -> GaussQ {
        GaussQ::from_rats(self.re.add(&o.re), self.im.add(&o.im))
    }
}
impl<'a> Sub<&'a GaussQ> for &'a GaussQ {
    type Output = GaussQ;
    fn sub(self, o: &GaussQ) -> GaussQ {
        GaussQ::from_rats(self.re.sub(&o.re), self.im.sub(&o.im))
    }
}
impl<'a> Mul<&'a GaussQ> for &'a GaussQ {
    type Output = GaussQ;
    fn mul(self, o: &GaussQ) -> GaussQ {
        if self.is_zero() || o.is_zero() {
            return GaussQ::zero();
        }
        if self.im.is_zero() && o.im.is_zero() {
            return GaussQ::from_rats(self.re.mul(&o.re), Rat::zero());
        }
        GaussQ::from_rats(
            self.re.mul(&o.re).sub(&self.im.mul(&o.im)),
            self.re.mul(&o.im).add(&self.im.mul(&o.re)),
        )
    }
}
impl Neg for &GaussQ {
    type Output = GaussQ;
    fn neg(self) -> GaussQ {
        GaussQ::from_rats(self.re.neg(), self.im.neg())
    }
}
impl Neg for GaussQ {
    type Output = GaussQ;
    fn neg(self) -> GaussQ {
        -&self
    }
}

/// Exact scalar `a + b*s` with `s^2 = 2` and `a, b` Gaussian rationals.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct ScalarExt {
    pub a: GaussQ,
    pub b: GaussQ,
}

impl ScalarExt {
    pub fn new(a: GaussQ, b: GaussQ) -> Self {
        ScalarExt { a, b }
    }
    pub fn zero() -> Self {
        ScalarExt::new(GaussQ::zero(), GaussQ::zero())
    }
    pub fn one() -> Self {
        ScalarExt::from_gauss(GaussQ::one())
    }
    pub fn from_gauss(a: GaussQ) -> Self {
        ScalarExt::new(a, GaussQ::zero())
    }
    pub fn from_int(k: i64) -> Self {
        ScalarExt::from_gauss(GaussQ::from_ints(k, 0))
    }
    pub fn frac(n: i64, d: i64) -> Self {
        ScalarExt::from_gauss(GaussQ::frac(n, d))
    }
    pub fn from_rational(r: BigRational) -> Self {
        ScalarExt::from_gauss(GaussQ::real(r))
    }
    pub fn i() -> Self {
        ScalarExt::from_gauss(GaussQ::i())
    }
    /// `s = sqrt(2)`.
    pub fn sqrt2() -> Self {
        ScalarExt::new(GaussQ::zero(), GaussQ::one())
    }
    /// `1/sqrt(2) = s/2`.
    pub fn inv_sqrt2() -> Self {
        ScalarExt::new(GaussQ::zero(), GaussQ::frac(1, 2))
    }
    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }
    pub fn is_one(&self) -> bool {
        self.a.is_one() && self.b.is_zero()
    }
    /// Complex conjugation (fixes `s`).
    pub fn conj(&self) -> Self {
        ScalarExt::new(self.a.conj(), self.b.conj())
    }
    pub fn inv(&self) -> Option<Self> {
        // (a + b s)(a - b s) = a^2 - 2 b^2, nonzero unless both vanish
        let d = &(&self.a * &self.a) - &(&(&self.b * &self.b) * &GaussQ::from_ints(2, 0));
        let di = d.inv()?;
        Some(ScalarExt::new(&self.a * &di, -&(&self.b * &di)))
    }
    pub fn pow(&self, k: u32) -> Self {
        let mut out = ScalarExt::one();
        for _ in 0..k {
            out = &out * self;
        }
        out
    }
    pub fn scale_rational(&self, r: &BigRational) -> Self {
        ScalarExt::new(self.a.scale(r), self.b.scale(r))
    }
    /// The value as `(re a, im a, re b, im b)`.
    pub fn parts(&self) -> [&Rat; 4] {
        [&self.a.re, &self.a.im, &self.b.re, &self.b.im]
    }
    pub fn to_c64(&self) -> Complex64 {
        self.a.to_c64() + self.b.to_c64() * std::f64::consts::SQRT_2
    }
}

impl fmt::Display for ScalarExt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.a.is_zero(), self.b.is_zero()) {
            (_, true) => write!(f, "{}", self.a),
            (true, false) => write!(f, "{}*s", self.b),
            (false, false) => write!(f, "{}+{}*s", self.a, self.b),
        }
    }
}

impl<'a> Add<&'a ScalarExt> for &'a ScalarExt {
    type Output = ScalarExt;
    fn add(self, o: &ScalarExt) -> ScalarExt {
        ScalarExt::new(&self.a + &o.a, &self.b + &o.b)
    }
}
impl<'a> Sub<&'a ScalarExt> for &'a ScalarExt {
    type Output = ScalarExt;
    fn sub(self, o: &ScalarExt) -> ScalarExt {
        ScalarExt::new(&self.a - &o.a, &self.b - &o.b)
    }
}
impl<'a> Mul<&'a ScalarExt> for &'a ScalarExt {
    type Output = ScalarExt;
    fn mul(self, o: &ScalarExt) -> ScalarExt {
        if self.is_zero() || o.is_zero() {
            return ScalarExt::zero();
        }
        if self.b.is_zero() && o.b.is_zero() {
            return ScalarExt::from_gauss(&self.a * &o.a);
        }
        let bb = &self.b * &o.b;
        let a = &(&self.a * &o.a) + &(&bb + &bb);
        let b = &(&self.a * &o.b) + &(&self.b * &o.a);
        ScalarExt::new(a, b)
    }
}
impl<'a> Div<&'a ScalarExt> for &'a ScalarExt {
    type Output = ScalarExt;
    fn div(self, o: &ScalarExt) -> ScalarExt {
        self * &o.inv().expect("division by zero ScalarExt")
    }
}
impl Neg for &ScalarExt {
    type Output = ScalarExt;
    fn neg(self) -> ScalarExt {
        ScalarExt::new(-&self.a, -&self.b)
    }
}
impl Neg for ScalarExt {
    type Output = ScalarExt;
    fn neg(self) -> ScalarExt {
        ScalarExt::new(-self.a, -self.b)
    }
}
impl Add for ScalarExt {
    type Output = ScalarExt;
    fn add(self, o: ScalarExt) -> ScalarExt {
        &self + &o
    }
}
impl Sub for ScalarExt {
    type Output = ScalarExt;
    fn sub(self, o: ScalarExt) -> ScalarExt {
        &self - &o
    }
}
impl Mul for ScalarExt {
    type Output = ScalarExt;
    fn mul(self, o: ScalarExt) -> ScalarExt {
        &self * &o
    }
}
impl AddAssign<&ScalarExt> for ScalarExt {
    fn add_assign(&mut self, o: &ScalarExt) {
        if o.is_zero() {
            return;
        }
        self.a = &self.a + &o.a;
        self.b = &self.b + &o.b;
    }
}
impl SubAssign<&ScalarExt> for ScalarExt {
    fn sub_assign(&mut self, o: &ScalarExt) {
        if o.is_zero() {
            return;
        }
        self.a = &self.a - &o.a;
        self.b = &self.b - &o.b;
    }
}
impl MulAssign<&ScalarExt> for ScalarExt {
    fn mul_assign(&mut self, o: &ScalarExt) {
        *self = &*self * o;
    }
}

/// Parse a rational from `"p/q"`, an integer, or a decimal literal.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().ok()?;
        let q: BigInt = q.trim().parse().ok()?;
        if q.is_zero() {
            return None;
        }
        return Some(BigRational::new(p, q));
    }
    if let Ok(k) = s.parse::<BigInt>() {
        return Some(BigRational::from_integer(k));
    }
    let x: f64 = s.parse().ok()?;
    BigRational::from_float(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt2_squares_to_two() {
        let s = ScalarExt::sqrt2();
        assert_eq!(&s * &s, ScalarExt::from_int(2));
        let h = ScalarExt::inv_sqrt2();
        assert_eq!(&h * &h, ScalarExt::frac(1, 2));
        assert_eq!(&s * &h, ScalarExt::one());
    }

    #[test]
    fn inverse_roundtrip() {
        let x = ScalarExt::new(GaussQ::from_ints(3, -1), GaussQ::frac(2, 7));
        let y = x.inv().unwrap();
        assert_eq!(&x * &y, ScalarExt::one());
        assert!(ScalarExt::zero().inv().is_none());
    }

    #[test]
    fn float_image() {
        let x = ScalarExt::new(GaussQ::from_ints(1, 2), GaussQ::from_ints(0, 1));
        let c = x.to_c64();
        assert!((c.re - 1.0).abs() < 1e-15);
        assert!((c.im - (2.0 + std::f64::consts::SQRT_2)).abs() < 1e-15);
    }

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn small_rationals_overflow_into_big() {
        let a = Rat::int(i64::MAX);
        let b = a.add(&a);
        assert!(matches!(b, Rat::Big(_)));
        assert_eq!(b.sub(&a), a);
        assert_eq!(Rat::int(i64::MIN).neg().neg(), Rat::int(i64::MIN));
        let h = Rat::from_big(rat(6, 4));
        assert_eq!(h, Rat::Small(3, 2));
    }

    #[test]
    fn rational_parsing() {
        assert_eq!(parse_rational("3/4"), Some(rat(3, 4)));
        assert_eq!(parse_rational("-2"), Some(rat(-2, 1)));
        assert_eq!(parse_rational("0.5"), Some(rat(1, 2)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("abc"), None);
    }
}
