//! Exact arithmetic in `Q(sqrt D)` and the q-combinatorics built on it.
//!
//! A [`Scalar`] is `x + y*sqrt(D)` with arbitrary-precision rational parts.
//! The radicand travels with the value; rational values carry radicand 0
//! so they mix freely with any quadratic field.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{Integer, One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("q must be a rational with q != 0 and |q| != 1, got {0}")]
    InvalidQ(String),
    #[error("radicand {0} is neither 0 nor square-free")]
    InvalidRadicand(i64),
    #[error("zero input to {0}")]
    ZeroInput(&'static str),
    #[error("q_binomial({n}, {k}) is out of range")]
    BinomialRange { n: i64, k: i64 },
    #[error("cannot parse scalar {0:?}")]
    Parse(String),
    #[error("value lives in Q(sqrt {found}) but the session field is Q(sqrt {expected})")]
    Extension { expected: i64, found: i64 },
}

/// An element `x + y*sqrt(rad)` of a quadratic field.
///
/// Rationals whose numerator and denominator fit in `i64` are stored inline;
/// everything else falls back to arbitrary precision. The representation is
/// canonical, so derived equality and hashing are value equality.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Scalar(Repr);

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Repr {
    /// `n/d` in lowest terms, `d > 0`, `n != i64::MIN`.
    Small(i64, i64),
    /// Either `y != 0`, or `x` does not fit `Small`.
    Big(Box<Quad>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct Quad {
    x: BigRational,
    y: BigRational,
    rad: i64,
}

fn big(x: BigRational, y: BigRational, rad: i64) -> Scalar {
    Scalar(Repr::Big(Box::new(Quad { x, y, rad })))
}

fn join_rad(a: i64, b: i64) -> i64 {
    if a == b || b == 0 {
        a
    } else if a == 0 {
        b
    } else {
        panic!("mixed quadratic fields Q(sqrt {a}) and Q(sqrt {b})")
    }
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn gcd_u64(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}

/// Reduces `n/d` (with `d != 0`) and stores it inline when it fits.
fn small_or_big(n: i128, d: i128) -> Scalar {
    if let (Ok(n64), Ok(d64)) = (i64::try_from(n), i64::try_from(d)) {
        if n64 != i64::MIN && d64 != i64::MIN {
            let g = gcd_u64(n64.unsigned_abs(), d64.unsigned_abs()) as i64;
            let (n, d) = if d64 < 0 { (-n64 / g, -d64 / g) } else { (n64 / g, d64 / g) };
            return Scalar(Repr::Small(n, d));
        }
    }
    let g = n.gcd(&d);
    let (mut n, mut d) = (n / g, d / g);
    if d < 0 {
        n = -n;
        d = -d;
    }
    match (i64::try_from(n), i64::try_from(d)) {
        (Ok(a), Ok(b)) if a != i64::MIN => Scalar(Repr::Small(a, b)),
        _ => big(BigRational::new_raw(BigInt::from(n), BigInt::from(d)), BigRational::zero(), 0),
    }
}

impl Scalar {
    pub fn new(x: BigRational, y: BigRational, rad: i64) -> Self {
        if y.is_zero() || rad == 0 {
            assert!(y.is_zero(), "irrational part without a radicand");
            Scalar::from_rational(x)
        } else {
            big(x, y, rad)
        }
    }

    pub fn zero() -> Self {
        Scalar(Repr::Small(0, 1))
    }

    pub fn one() -> Self {
        Scalar(Repr::Small(1, 1))
    }

    pub fn from_int(n: i64) -> Self {
        small_or_big(n as i128, 1)
    }

    pub fn from_ratio(n: i64, d: i64) -> Self {
        assert!(d != 0, "zero denominator");
        small_or_big(n as i128, d as i128)
    }

    pub fn from_rational(x: BigRational) -> Self {
        match (x.numer().to_i64(), x.denom().to_i64()) {
            (Some(n), Some(d)) if n != i64::MIN => Scalar(Repr::Small(n, d)),
            _ => big(x, BigRational::zero(), 0),
        }
    }

    /// `sqrt(rad)` itself.
    pub fn sqrt_of(rad: i64) -> Self {
        Scalar::new(BigRational::zero(), BigRational::one(), rad)
    }

    fn small(&self) -> Option<(i64, i64)> {
        match self.0 {
            Repr::Small(n, d) => Some((n, d)),
            Repr::Big(_) => None,
        }
    }

    /// Rational and irrational parts.
    fn parts(&self) -> (BigRational, BigRational, i64) {
        match &self.0 {
            Repr::Small(n, d) => (rat(*n, *d), BigRational::zero(), 0),
            Repr::Big(b) => (b.x.clone(), b.y.clone(), b.rad),
        }
    }

    pub fn x(&self) -> BigRational {
        self.parts().0
    }

    pub fn y(&self) -> BigRational {
        self.parts().1
    }

    pub fn radicand(&self) -> i64 {
        match &self.0 {
            Repr::Small(..) => 0,
            Repr::Big(b) => b.rad,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.0, Repr::Small(0, _))
    }

    pub fn is_one(&self) -> bool {
        matches!(self.0, Repr::Small(1, 1))
    }

    pub fn is_rational(&self) -> bool {
        match &self.0 {
            Repr::Small(..) => true,
            Repr::Big(b) => b.y.is_zero(),
        }
    }

    /// Field norm `x^2 - D y^2`.
    pub fn norm(&self) -> BigRational {
        let (x, y, rad) = self.parts();
        let d = BigRational::from_integer(BigInt::from(rad));
        &x * &x - d * &y * &y
    }

    pub fn conjugate(&self) -> Self {
        let (x, y, rad) = self.parts();
        Scalar::new(x, -y, rad)
    }

    pub fn checked_inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        if let Some((n, d)) = self.small() {
            return Some(small_or_big(d as i128, n as i128));
        }
        let (x, y, rad) = self.parts();
        if y.is_zero() {
            return Some(Scalar::from_rational(x.recip()));
        }
        let n = self.norm();
        Some(Scalar::new(&x / &n, -(&y / &n), rad))
    }

    /// Multiplicative inverse. Panics on zero.
    pub fn inv(&self) -> Self {
        self.checked_inv().expect("inverse of zero")
    }

    pub fn pow(&self, e: i64) -> Self {
        let base = if e < 0 { self.inv() } else { self.clone() };
        let mut e = e.unsigned_abs();
        let mut acc = Scalar::one();
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &sq;
            }
            e >>= 1;
            if e > 0 {
                sq = &sq * &sq;
            }
        }
        acc
    }

    pub fn scale_int(&self, n: i64) -> Self {
        self * &Scalar::from_int(n)
    }
}

impl PartialOrd for Scalar {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

/// Lexicographic in `(x, y, rad)`.
impl Ord for Scalar {
    fn cmp(&self, o: &Self) -> Ordering {
        if let (Some((a, b)), Some((c, d))) = (self.small(), o.small()) {
            return (a as i128 * d as i128).cmp(&(c as i128 * b as i128));
        }
        let (x1, y1, r1) = self.parts();
        let (x2, y2, r2) = o.parts();
        (x1, y1, r1).cmp(&(x2, y2, r2))
    }
}

fn fmt_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some((n, d)) = self.small() {
            return if d == 1 { write!(f, "{n}") } else { write!(f, "{n}/{d}") };
        }
        let (x, y, rad) = self.parts();
        if y.is_zero() {
            return f.write_str(&fmt_rational(&x));
        }
        let coef = |r: &BigRational| -> String {
            if r.is_one() {
                String::new()
            } else {
                format!("{}*", fmt_rational(r))
            }
        };
        let tail = format!("{}sqrt({})", coef(&y.abs()), rad);
        let sign = if y.is_negative() { "-" } else { "+" };
        if x.is_zero() {
            if y.is_negative() {
                write!(f, "-{tail}")
            } else {
                f.write_str(&tail)
            }
        } else {
            write!(f, "{}{sign}{tail}", fmt_rational(&x))
        }
    }
}

fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.strip_prefix('+').unwrap_or(s);
    if s.is_empty() {
        return None;
    }
    match s.split_once('/') {
        Some((n, d)) => {
            let n = BigInt::from_str(n).ok()?;
            let d = BigInt::from_str(d).ok()?;
            if d.is_zero() {
                None
            } else {
                Some(BigRational::new(n, d))
            }
        }
        None => Some(BigRational::from_integer(BigInt::from_str(s).ok()?)),
    }
}

fn parse_surd(s: &str) -> Option<(BigRational, i64)> {
    let s = s.strip_prefix('+').unwrap_or(s);
    let at = s.find("sqrt(")?;
    let inner = s[at + 5..].strip_suffix(')')?;
    let rad: i64 = inner.parse().ok()?;
    let head = &s[..at];
    let coef = match head {
        "" => BigRational::one(),
        "-" => -BigRational::one(),
        _ => parse_rational(head.strip_suffix('*')?)?,
    };
    Some((coef, rad))
}

impl FromStr for Scalar {
    type Err = FieldError;

    /// Accepts `p`, `p/q`, `p/q+r/s*sqrt(D)`, `r/s*sqrt(D)` and sign variants.
    fn from_str(raw: &str) -> Result<Self, FieldError> {
        let s: String = raw.chars().filter(|c| !c.is_whitespace()).collect();
        let err = || FieldError::Parse(raw.to_string());
        let Some(at) = s.find("sqrt(") else {
            return parse_rational(&s).map(Scalar::from_rational).ok_or_else(err);
        };
        let split = s[..at]
            .char_indices()
            .filter(|&(i, c)| i > 0 && (c == '+' || c == '-'))
            .map(|(i, _)| i)
            .next_back();
        let (xs, ys) = match split {
            Some(p) => (s[..p].trim_end_matches('+'), &s[p..]),
            None => ("", &s[..]),
        };
        let x = if xs.is_empty() {
            BigRational::zero()
        } else {
            parse_rational(xs).ok_or_else(err)?
        };
        let (y, rad) = parse_surd(ys).ok_or_else(err)?;
        if rad == 0 || rad == 1 || !is_squarefree(rad) {
            return Err(FieldError::InvalidRadicand(rad));
        }
        Ok(Scalar::new(x, y, rad))
    }
}

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        ser.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let s = String::deserialize(de)?;
        Scalar::from_str(&s).map_err(serde::de::Error::custom)
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        if let Some((n, d)) = self.small() {
            return Scalar(Repr::Small(-n, d));
        }
        let (x, y, rad) = self.parts();
        Scalar::new(-x, -y, rad)
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

impl Add for &Scalar {
    type Output = Scalar;
    fn add(self, o: &Scalar) -> Scalar {
        if let (Some((a, b)), Some((c, d))) = (self.small(), o.small()) {
            if a == 0 {
                return o.clone();
            }
            if c == 0 {
                return self.clone();
            }
            if b == 1 && d == 1 {
                if let Some(n) = a.checked_add(c).filter(|&n| n != i64::MIN) {
                    return Scalar(Repr::Small(n, 1));
                }
            }
            if b == d {
                return small_or_big(a as i128 + c as i128, b as i128);
            }
            return small_or_big(a as i128 * d as i128 + c as i128 * b as i128, b as i128 * d as i128);
        }
        let (x1, y1, r1) = self.parts();
        let (x2, y2, r2) = o.parts();
        Scalar::new(x1 + x2, y1 + y2, join_rad(r1, r2))
    }
}

impl Sub for &Scalar {
    type Output = Scalar;
    fn sub(self, o: &Scalar) -> Scalar {
        self + &(-o)
    }
}

impl Mul for &Scalar {
    type Output = Scalar;
    fn mul(self, o: &Scalar) -> Scalar {
        if let (Some((a, b)), Some((c, d))) = (self.small(), o.small()) {
            if a == 0 || c == 0 {
                return Scalar::zero();
            }
            // cross-cancel so the product is already in lowest terms
            let g1 = gcd_u64(a.unsigned_abs(), d as u64) as i64;
            let g2 = gcd_u64(c.unsigned_abs(), b as u64) as i64;
            let (a, d, c, b) = (a / g1, d / g1, c / g2, b / g2);
            if let (Some(n), Some(m)) = (a.checked_mul(c), b.checked_mul(d)) {
                if n != i64::MIN {
                    return Scalar(Repr::Small(n, m));
                }
            }
            return small_or_big(a as i128 * c as i128, b as i128 * d as i128);
        }
        let (x1, y1, r1) = self.parts();
        let (x2, y2, r2) = o.parts();
        let rad = join_rad(r1, r2);
        let dd = BigRational::from_integer(BigInt::from(rad));
        let x = &x1 * &x2 + dd * &y1 * &y2;
        let y = &x1 * &y2 + &y1 * &x2;
        Scalar::new(x, y, rad)
    }
}

impl Div for &Scalar {
    type Output = Scalar;
    fn div(self, o: &Scalar) -> Scalar {
        assert!(!o.is_zero(), "division by zero");
        if let (Some((a, b)), Some((c, d))) = (self.small(), o.small()) {
            return small_or_big(a as i128 * d as i128, b as i128 * c as i128);
        }
        self * &o.inv()
    }
}

macro_rules! forward_owned {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr<Scalar> for Scalar {
            type Output = Scalar;
            fn $m(self, o: Scalar) -> Scalar { (&self).$m(&o) }
        }
        impl $tr<&Scalar> for Scalar {
            type Output = Scalar;
            fn $m(self, o: &Scalar) -> Scalar { (&self).$m(o) }
        }
        impl $tr<Scalar> for &Scalar {
            type Output = Scalar;
            fn $m(self, o: Scalar) -> Scalar { self.$m(&o) }
        }
    )*};
}

forward_owned!(Add add, Sub sub, Mul mul, Div div);

impl AddAssign<&Scalar> for Scalar {
    fn add_assign(&mut self, o: &Scalar) {
        *self = &*self + o;
    }
}

impl SubAssign<&Scalar> for Scalar {
    fn sub_assign(&mut self, o: &Scalar) {
        *self = &*self - o;
    }
}

impl MulAssign<&Scalar> for Scalar {
    fn mul_assign(&mut self, o: &Scalar) {
        *self = &*self * o;
    }
}

impl From<i64> for Scalar {
    fn from(n: i64) -> Self {
        Scalar::from_int(n)
    }
}

fn is_squarefree(n: i64) -> bool {
    let m = n.unsigned_abs();
    if m == 0 {
        return false;
    }
    let mut p = 2u64;
    while p * p <= m {
        if m.is_multiple_of(p * p) {
            return false;
        }
        p += 1;
    }
    true
}

fn rational_sqrt(r: &BigRational) -> Option<BigRational> {
    if r.is_negative() {
        return None;
    }
    let n = r.numer().sqrt();
    let d = r.denom().sqrt();
    if &(&n * &n) == r.numer() && &(&d * &d) == r.denom() {
        Some(BigRational::new(n, d))
    } else {
        None
    }
}

/// The ground field `Q(sqrt D)` together with the deformation parameter `q`.
#[derive(Clone, Debug)]
pub struct FieldConfig {
    q: BigRational,
    radicand: i64,
    i_max: u32,
    powers: Vec<Scalar>,
}

/// The structure constants derived from `q`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Constants {
    pub beta: Scalar,
    pub delta: Scalar,
    pub delta_prime: Scalar,
    pub alpha: Scalar,
}

pub const DEFAULT_I_MAX: u32 = 64;

impl FieldConfig {
    pub fn new(q: BigRational, radicand: i64) -> Result<Self, FieldError> {
        Self::with_i_max(q, radicand, DEFAULT_I_MAX)
    }

    pub fn with_i_max(q: BigRational, radicand: i64, i_max: u32) -> Result<Self, FieldError> {
        if q.is_zero() || q.abs().is_one() {
            return Err(FieldError::InvalidQ(fmt_rational(&q)));
        }
        if radicand != 0 && (radicand == 1 || !is_squarefree(radicand)) {
            return Err(FieldError::InvalidRadicand(radicand));
        }
        let qs = Scalar::from_rational(q.clone());
        let qi = qs.inv();
        let n = i_max as usize;
        let mut powers = vec![Scalar::one(); 2 * n + 1];
        for i in 1..=n {
            powers[n + i] = &powers[n + i - 1] * &qs;
            powers[n - i] = &powers[n - i + 1] * &qi;
        }
        Ok(FieldConfig { q, radicand, i_max, powers })
    }

    /// Rational `q = num/den` over plain `Q`.
    pub fn rational(num: i64, den: i64) -> Result<Self, FieldError> {
        Self::new(rat(num, den), 0)
    }

    pub fn q(&self) -> Scalar {
        Scalar::from_rational(self.q.clone())
    }

    pub fn q_rational(&self) -> &BigRational {
        &self.q
    }

    pub fn radicand(&self) -> i64 {
        self.radicand
    }

    pub fn i_max(&self) -> u32 {
        self.i_max
    }

    /// Same field and `q`, different search bound.
    pub fn reconfigured(&self, i_max: u32) -> Self {
        Self::with_i_max(self.q.clone(), self.radicand, i_max).expect("already validated")
    }

    /// `q^n` for any integer `n`.
    pub fn q_pow(&self, n: i64) -> Scalar {
        let m = self.i_max as i64;
        if n.abs() <= m {
            self.powers[(n + m) as usize].clone()
        } else {
            self.q().pow(n)
        }
    }

    /// Rejects values from a different quadratic field.
    pub fn check(&self, s: &Scalar) -> Result<(), FieldError> {
        if s.radicand() == 0 || s.radicand() == self.radicand {
            Ok(())
        } else {
            Err(FieldError::Extension { expected: self.radicand, found: s.radicand() })
        }
    }

    pub fn parse(&self, s: &str) -> Result<Scalar, FieldError> {
        let v = Scalar::from_str(s)?;
        self.check(&v)?;
        Ok(v)
    }

    /// `[n] = (q^n - q^-n)/(q - q^-1)`.
    pub fn q_integer(&self, n: i64) -> Scalar {
        let num = self.q_pow(n) - self.q_pow(-n);
        let den = self.q_pow(1) - self.q_pow(-1);
        num / den
    }

    pub fn q_factorial(&self, n: i64) -> Scalar {
        (1..=n).fold(Scalar::one(), |acc, j| acc * self.q_integer(j))
    }

    /// `[n]! / ([n-k]! [k]!)`.
    pub fn q_binomial(&self, n: i64, k: i64) -> Result<Scalar, FieldError> {
        if k < 0 || k > n {
            return Err(FieldError::BinomialRange { n, k });
        }
        let mut acc = Scalar::one();
        for i in 1..=k {
            acc = acc * self.q_integer(n - k + i) / self.q_integer(i);
        }
        Ok(acc)
    }

    /// The `i` with `|i| <= i_max` and `b = a q^i`, if any.
    pub fn q_power_ratio(&self, a: &Scalar, b: &Scalar) -> Result<Option<i64>, FieldError> {
        if a.is_zero() || b.is_zero() {
            return Err(FieldError::ZeroInput("q_power_ratio"));
        }
        let r = b / a;
        if !r.is_rational() {
            return Ok(None);
        }
        let m = self.i_max as i64;
        for i in 0..=m {
            if r == self.powers[(m + i) as usize] {
                return Ok(Some(i));
            }
            if r == self.powers[(m - i) as usize] {
                return Ok(Some(-i));
            }
        }
        Ok(None)
    }

    pub fn constants(&self) -> Constants {
        let q = |n| self.q_pow(n);
        let minus = |n| q(n) - q(-n);
        let sq = |s: Scalar| &s * &s;
        Constants {
            beta: q(2) + q(-2),
            delta: -sq(minus(2)),
            delta_prime: -(minus(1) * minus(2) * minus(3) * q(4)),
            alpha: -(q(-1) * sq(minus(1))),
        }
    }

    /// `Q_d = (-1)^d prod_{j=1}^d (q^j - q^-j)^2`.
    pub fn q_d_norm(&self, d: usize) -> Scalar {
        let mut acc = if d.is_multiple_of(2) { Scalar::one() } else { Scalar::from_int(-1) };
        for j in 1..=d as i64 {
            let m = self.q_pow(j) - self.q_pow(-j);
            acc = acc * &m * &m;
        }
        acc
    }

    /// Square root inside this field, if it exists.
    pub fn sqrt(&self, s: &Scalar) -> Option<Scalar> {
        self.check(s).ok()?;
        if s.is_zero() {
            return Some(Scalar::zero());
        }
        if s.is_rational() {
            if let Some(r) = rational_sqrt(&s.x()) {
                return Some(Scalar::from_rational(r));
            }
            if self.radicand == 0 {
                return None;
            }
            let d = BigRational::from_integer(BigInt::from(self.radicand));
            let v = rational_sqrt(&(s.x() / d))?;
            return Some(Scalar::new(BigRational::zero(), v, self.radicand));
        }
        // (u + v sqrt D)^2 = u^2 + D v^2 + 2uv sqrt D
        let root_norm = rational_sqrt(&s.norm())?;
        let two = BigRational::from_integer(BigInt::from(2));
        let sx = s.x();
        for cand in [&sx + &root_norm, &sx - &root_norm] {
            let Some(u) = rational_sqrt(&(cand / &two)) else { continue };
            if u.is_zero() {
                continue;
            }
            let v = s.y() / (&two * &u);
            let r = Scalar::new(u, v, self.radicand);
            if &(&r * &r) == s {
                return Some(r);
            }
        }
        None
    }
}

#[derive(Serialize, Deserialize)]
struct FieldConfigRepr {
    q: String,
    #[serde(rename = "D", default)]
    radicand: i64,
    #[serde(default = "default_i_max")]
    i_max: u32,
}

fn default_i_max() -> u32 {
    DEFAULT_I_MAX
}

impl Serialize for FieldConfig {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        FieldConfigRepr { q: fmt_rational(&self.q), radicand: self.radicand, i_max: self.i_max }
            .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for FieldConfig {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let r = FieldConfigRepr::deserialize(de)?;
        let q = parse_rational(&r.q)
            .ok_or_else(|| serde::de::Error::custom(FieldError::Parse(r.q.clone())))?;
        FieldConfig::with_i_max(q, r.radicand, r.i_max).map_err(serde::de::Error::custom)
    }
}
