//! Coefficient fields.
//!
//! Three modes are supported: exact Gaussian rationals, finite sums of
//! monomials `c · π^{p/2} · λ^{q/2}` with Gaussian-rational `c`, and
//! double-precision complex numbers. Algorithms are generic over [`Field`];
//! the tagged [`Scalar`] is what crosses the CLI/FFI boundary.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use num::bigint::BigInt;
use num::complex::Complex64;
use num::integer::Integer;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Name of a scalar mode, as used on the command line and in JSON.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Symbolic,
    Float,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Exact => "exact",
            Mode::Symbolic => "symbolic",
            Mode::Float => "float",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Mode::Exact),
            "symbolic" => Ok(Mode::Symbolic),
            "float" => Ok(Mode::Float),
            _ => Err(Error::Config(format!("unknown mode '{s}'"))),
        }
    }
}

/// The operations every coefficient field provides.
pub trait Field:
    Clone
    + PartialEq
    + fmt::Debug
    + fmt::Display
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    const MODE: Mode;
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn from_i64(n: i64) -> Self;
    fn from_rat(r: &Rat) -> Self;
    fn from_gaussian(g: &Gaussian) -> Self;
    fn imag_unit() -> Self;
    /// Multiplicative inverse, `None` when the element is zero or not a unit.
    fn inv(&self) -> Option<Self>;
    /// A size used for pivoting and residual reporting.
    fn magnitude(&self) -> f64;
    /// Treat as zero during elimination (exact fields: exactly zero).
    fn negligible(&self) -> bool {
        self.is_zero()
    }
    fn scale_i64(&self, n: i64) -> Self {
        self.clone() * Self::from_i64(n)
    }
}

/// The principal square root of `2i`, which is `1 + i`.
pub fn sqrt_2i<F: Field>() -> F {
    F::one() + F::imag_unit()
}

// ---------------------------------------------------------------------------
// Rationals with a machine-word fast path.

/// An exact rational number. Values that fit in `i64/i64` stay unboxed; all
/// arithmetic is carried out in `i128` and promoted to big integers only when
/// the reduced result does not fit.
#[derive(Clone)]
pub enum Rat {
    Small(i64, i64),
    Big(BigRational),
}

impl Rat {
    pub fn new(n: i64, d: i64) -> Rat {
        assert!(d != 0, "zero denominator");
        Rat::from_i128(n as i128, d as i128)
    }

    pub fn int(n: i64) -> Rat {
        Rat::Small(n, 1)
    }

    fn from_i128(mut n: i128, mut d: i128) -> Rat {
        if d < 0 {
            n = -n;
            d = -d;
        }
        let g = n.gcd(&d);
        if g > 1 {
            n /= g;
            d /= g;
        }
        if n == 0 {
            return Rat::Small(0, 1);
        }
        match (i64::try_from(n), i64::try_from(d)) {
            (Ok(a), Ok(b)) => Rat::Small(a, b),
            _ => Rat::Big(BigRational::new_raw(BigInt::from(n), BigInt::from(d))),
        }
    }

    fn from_big(r: BigRational) -> Rat {
        match (r.numer().to_i64(), r.denom().to_i64()) {
            (Some(a), Some(b)) => Rat::Small(a, b),
            _ => Rat::Big(r),
        }
    }

    fn to_big(&self) -> BigRational {
        match self {
            Rat::Small(a, b) => BigRational::new_raw(BigInt::from(*a), BigInt::from(*b)),
            Rat::Big(r) => r.clone(),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Rat::Small(0, _))
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Rat::Small(1, 1))
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Rat::Small(a, b) => *a as f64 / *b as f64,
            Rat::Big(r) => r.to_f64().unwrap_or(f64::NAN),
        }
    }

    pub fn recip(&self) -> Option<Rat> {
        match self {
            Rat::Small(0, _) => None,
            Rat::Small(a, b) => Some(Rat::from_i128(*b as i128, *a as i128)),
            Rat::Big(r) => Some(Rat::from_big(r.recip())),
        }
    }

    /// Numerator and denominator when both fit in an `i64`.
    pub fn as_i64_pair(&self) -> Option<(i64, i64)> {
        match self {
            Rat::Small(a, b) => Some((*a, *b)),
            Rat::Big(_) => None,
        }
    }

    pub fn signum(&self) -> i32 {
        match self {
            Rat::Small(a, _) => a.signum() as i32,
            Rat::Big(r) => {
                if r.is_positive() {
                    1
                } else if r.is_negative() {
                    -1
                } else {
                    0
                }
            }
        }
    }

    pub fn abs(&self) -> Rat {
        if self.signum() < 0 {
            -self.clone()
        } else {
            self.clone()
        }
    }

    pub fn parse(s: &str) -> Result<Rat> {
        let s = s.trim();
        let (n, d) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s, "1"),
        };
        let n: BigInt = n.parse().map_err(|_| Error::Parse(format!("bad rational '{s}'")))?;
        let d: BigInt = d.parse().map_err(|_| Error::Parse(format!("bad rational '{s}'")))?;
        if d.is_zero() {
            return Err(Error::Parse(format!("zero denominator in '{s}'")));
        }
        Ok(Rat::from_big(BigRational::new(n, d)))
    }

    /// `n!` as a rational.
    pub fn factorial(n: u32) -> Rat {
        let mut acc = BigInt::one();
        for k in 2..=n {
            acc *= k;
        }
        Rat::from_big(BigRational::from_integer(acc))
    }
}

impl PartialEq for Rat {
    fn eq(&self, o: &Rat) -> bool {
        match (self, o) {
            (Rat::Small(a, b), Rat::Small(c, d)) => a == c && b == d,
            (Rat::Big(x), Rat::Big(y)) => x == y,
            _ => false,
        }
    }
}
impl Eq for Rat {}

impl PartialOrd for Rat {
    fn partial_cmp(&self, o: &Rat) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Rat {
    fn cmp(&self, o: &Rat) -> Ordering {
        match (self, o) {
            (Rat::Small(a, b), Rat::Small(c, d)) => (*a as i128 * *d as i128).cmp(&(*c as i128 * *b as i128)),
            _ => self.to_big().cmp(&o.to_big()),
        }
    }
}

impl fmt::Debug for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rat::Small(a, 1) => write!(f, "{a}"),
            Rat::Small(a, b) => write!(f, "{a}/{b}"),
            Rat::Big(r) if r.denom().is_one() => write!(f, "{}", r.numer()),
            Rat::Big(r) => write!(f, "{}/{}", r.numer(), r.denom()),
        }
    }
}

impl Add for Rat {
    type Output = Rat;
    fn add(self, o: Rat) -> Rat {
        &self + &o
    }
}
impl<'a> Add<&'a Rat> for &'a Rat {
    type Output = Rat;
    fn add(self, o: &Rat) -> Rat {
        match (self, o) {
            (Rat::Small(a, b), Rat::Small(c, d)) => {
                if *b == 1 && *d == 1 {
                    return Rat::from_i128(*a as i128 + *c as i128, 1);
                }
                Rat::from_i128(*a as i128 * *d as i128 + *c as i128 * *b as i128, *b as i128 * *d as i128)
            }
            _ => Rat::from_big(self.to_big() + o.to_big()),
        }
    }
}
impl Sub for Rat {
    type Output = Rat;
    fn sub(self, o: Rat) -> Rat {
        &self + &(-o)
    }
}
impl Neg for Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        match self {
            Rat::Small(a, b) => match a.checked_neg() {
                Some(n) => Rat::Small(n, b),
                None => Rat::from_i128(-(a as i128), b as i128),
            },
            Rat::Big(r) => Rat::from_big(-r),
        }
    }
}
impl Mul for Rat {
    type Output = Rat;
    fn mul(self, o: Rat) -> Rat {
        &self * &o
    }
}
impl<'a> Mul<&'a Rat> for &'a Rat {
    type Output = Rat;
    fn mul(self, o: &Rat) -> Rat {
        match (self, o) {
            (Rat::Small(a, b), Rat::Small(c, d)) => {
                Rat::from_i128(*a as i128 * *c as i128, *b as i128 * *d as i128)
            }
            _ => Rat::from_big(self.to_big() * o.to_big()),
        }
    }
}

// ---------------------------------------------------------------------------
// Exact Gaussian rationals.

/// `re + im·i` with rational parts.
#[derive(Clone, PartialEq, Eq)]
pub struct Gaussian {
    pub re: Rat,
    pub im: Rat,
}

impl Gaussian {
    pub fn new(re: Rat, im: Rat) -> Self {
        Gaussian { re, im }
    }
    pub fn real(r: Rat) -> Self {
        Gaussian { re: r, im: Rat::int(0) }
    }
    pub fn ratio(n: i64, d: i64) -> Self {
        Gaussian::real(Rat::new(n, d))
    }
    pub fn conj(&self) -> Self {
        Gaussian { re: self.re.clone(), im: -self.im.clone() }
    }
    pub fn to_c64(&self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }

    /// Accepts `3`, `-1/2`, `i`, `-2i`, `1/2+3/4i`, optionally parenthesised.
    pub fn parse(s: &str) -> Result<Gaussian> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let t = t.strip_prefix('(').and_then(|x| x.strip_suffix(')')).unwrap_or(&t).to_string();
        if t.is_empty() {
            return Err(Error::Parse("empty scalar".into()));
        }
        // split at a sign that is not the leading one
        let bytes = t.as_bytes();
        let mut split = None;
        for k in 1..bytes.len() {
            if (bytes[k] == b'+' || bytes[k] == b'-') && bytes[k - 1] != b'/' {
                split = Some(k);
            }
        }
        let parse_part = |p: &str| -> Result<Gaussian> {
            if let Some(body) = p.strip_suffix('i') {
                let body = body.strip_suffix('*').unwrap_or(body);
                let r = match body {
                    "" | "+" => Rat::int(1),
                    "-" => Rat::int(-1),
                    _ => Rat::parse(body)?,
                };
                Ok(Gaussian::new(Rat::int(0), r))
            } else {
                Ok(Gaussian::real(Rat::parse(p)?))
            }
        };
        match split {
            Some(k) => Ok(parse_part(&t[..k])? + parse_part(&t[k..])?),
            None => parse_part(&t),
        }
    }
}

impl fmt::Debug for Gaussian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Gaussian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let im_str = |im: &Rat| -> String {
            if im.is_one() {
                "i".into()
            } else if *im == Rat::int(-1) {
                "-i".into()
            } else {
                format!("{im}i")
            }
        };
        if self.im.is_zero() {
            write!(f, "{}", self.re)
        } else if self.re.is_zero() {
            write!(f, "{}", im_str(&self.im))
        } else if self.im.signum() < 0 {
            write!(f, "({}{})", self.re, im_str(&self.im))
        } else {
            write!(f, "({}+{})", self.re, im_str(&self.im))
        }
    }
}

impl Add for Gaussian {
    type Output = Gaussian;
    fn add(self, o: Gaussian) -> Gaussian {
        Gaussian { re: &self.re + &o.re, im: &self.im + &o.im }
    }
}
impl Sub for Gaussian {
    type Output = Gaussian;
    fn sub(self, o: Gaussian) -> Gaussian {
        self + (-o)
    }
}
impl Neg for Gaussian {
    type Output = Gaussian;
    fn neg(self) -> Gaussian {
        Gaussian { re: -self.re, im: -self.im }
    }
}
impl Mul for Gaussian {
    type Output = Gaussian;
    fn mul(self, o: Gaussian) -> Gaussian {
        if self.im.is_zero() && o.im.is_zero() {
            return Gaussian::real(&self.re * &o.re);
        }
        Gaussian {
            re: &self.re * &o.re + -(&self.im * &o.im),
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }
}

impl Field for Gaussian {
    const MODE: Mode = Mode::Exact;
    fn zero() -> Self {
        Gaussian::real(Rat::int(0))
    }
    fn one() -> Self {
        Gaussian::real(Rat::int(1))
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
    fn from_i64(n: i64) -> Self {
        Gaussian::real(Rat::int(n))
    }
    fn from_rat(r: &Rat) -> Self {
        Gaussian::real(r.clone())
    }
    fn from_gaussian(g: &Gaussian) -> Self {
        g.clone()
    }
    fn imag_unit() -> Self {
        Gaussian::new(Rat::int(0), Rat::int(1))
    }
    fn inv(&self) -> Option<Self> {
        let n = &self.re * &self.re + &self.im * &self.im;
        let r = n.recip()?;
        Some(Gaussian { re: &self.re * &r, im: -(&self.im * &r) })
    }
    fn magnitude(&self) -> f64 {
        self.to_c64().norm()
    }
}

// ---------------------------------------------------------------------------
// Symbolic monomial sums.

/// `Σ c_{p,q} · π^{p/2} · λ^{q/2}`; equal exponent pairs merge and zero
/// coefficients are dropped, so equality is structural.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct Sym {
    terms: BTreeMap<(i32, i32), Gaussian>,
}

impl Sym {
    /// `c · π^{p/2} · λ^{q/2}`.
    pub fn monomial(c: Gaussian, p: i32, q: i32) -> Sym {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert((p, q), c);
        }
        Sym { terms }
    }
    /// `√λ`.
    pub fn sqrt_lambda() -> Sym {
        Sym::monomial(Gaussian::one(), 0, 1)
    }
    pub fn lambda() -> Sym {
        Sym::monomial(Gaussian::one(), 0, 2)
    }
    pub fn sqrt_pi() -> Sym {
        Sym::monomial(Gaussian::one(), 1, 0)
    }
    pub fn terms(&self) -> impl Iterator<Item = (&(i32, i32), &Gaussian)> {
        self.terms.iter()
    }
    pub fn scale(&self, c: &Gaussian) -> Sym {
        let mut out = Sym::default();
        for (k, v) in &self.terms {
            let w = v.clone() * c.clone();
            if !w.is_zero() {
                out.terms.insert(*k, w);
            }
        }
        out
    }
    /// Substitute numeric values for `π` and `λ`.
    pub fn lower(&self, pi: f64, lambda: f64) -> Complex64 {
        self.terms
            .iter()
            .map(|((p, q), c)| c.to_c64() * pi.powf(*p as f64 / 2.0) * lambda.powf(*q as f64 / 2.0))
            .sum()
    }
    /// The coefficient of `π^0 λ^0` when that is the only term.
    pub fn as_constant(&self) -> Option<Gaussian> {
        if self.terms.is_empty() {
            return Some(Gaussian::zero());
        }
        if self.terms.len() == 1 {
            if let Some(c) = self.terms.get(&(0, 0)) {
                return Some(c.clone());
            }
        }
        None
    }
    fn add_term(&mut self, k: (i32, i32), c: Gaussian) {
        let e = self.terms.entry(k).or_insert_with(Gaussian::zero);
        *e = e.clone() + c;
        if e.is_zero() {
            self.terms.remove(&k);
        }
    }
}

impl fmt::Debug for Sym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Sym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for ((p, q), c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{c}")?;
            if *p != 0 {
                write!(f, "·π^({p}/2)")?;
            }
            if *q != 0 {
                write!(f, "·λ^({q}/2)")?;
            }
        }
        Ok(())
    }
}

impl Add for Sym {
    type Output = Sym;
    fn add(mut self, o: Sym) -> Sym {
        for (k, c) in o.terms {
            self.add_term(k, c);
        }
        self
    }
}
impl Sub for Sym {
    type Output = Sym;
    fn sub(self, o: Sym) -> Sym {
        self + (-o)
    }
}
impl Neg for Sym {
    type Output = Sym;
    fn neg(self) -> Sym {
        Sym { terms: self.terms.into_iter().map(|(k, c)| (k, -c)).collect() }
    }
}
impl Mul for Sym {
    type Output = Sym;
    fn mul(self, o: Sym) -> Sym {
        let mut out = Sym::default();
        for ((p1, q1), c1) in &self.terms {
            for ((p2, q2), c2) in &o.terms {
                out.add_term((p1 + p2, q1 + q2), c1.clone() * c2.clone());
            }
        }
        out
    }
}

impl Field for Sym {
    const MODE: Mode = Mode::Symbolic;
    fn zero() -> Self {
        Sym::default()
    }
    fn one() -> Self {
        Sym::monomial(Gaussian::one(), 0, 0)
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    fn from_i64(n: i64) -> Self {
        Sym::monomial(Gaussian::from_i64(n), 0, 0)
    }
    fn from_rat(r: &Rat) -> Self {
        Sym::monomial(Gaussian::from_rat(r), 0, 0)
    }
    fn from_gaussian(g: &Gaussian) -> Self {
        Sym::monomial(g.clone(), 0, 0)
    }
    fn imag_unit() -> Self {
        Sym::monomial(Gaussian::imag_unit(), 0, 0)
    }
    fn inv(&self) -> Option<Self> {
        if self.terms.len() != 1 {
            return None;
        }
        let ((p, q), c) = self.terms.iter().next()?;
        Some(Sym::monomial(c.inv()?, -p, -q))
    }
    fn magnitude(&self) -> f64 {
        self.terms.values().map(|c| c.magnitude()).sum()
    }
}

// ---------------------------------------------------------------------------
// Floating point.

impl Field for Complex64 {
    const MODE: Mode = Mode::Float;
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn from_i64(n: i64) -> Self {
        Complex64::new(n as f64, 0.0)
    }
    fn from_rat(r: &Rat) -> Self {
        Complex64::new(r.to_f64(), 0.0)
    }
    fn from_gaussian(g: &Gaussian) -> Self {
        g.to_c64()
    }
    fn imag_unit() -> Self {
        Complex64::new(0.0, 1.0)
    }
    fn inv(&self) -> Option<Self> {
        if Field::is_zero(self) {
            None
        } else {
            Some(Complex64::new(1.0, 0.0) / self)
        }
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
    fn negligible(&self) -> bool {
        self.norm() < 1e-11
    }
}

// ---------------------------------------------------------------------------
// Tagged scalars for the external boundary.

/// A scalar whose mode is known only at run time. Mixing modes is an error;
/// exact and symbolic values lower explicitly to `Float`.
#[derive(Debug, Clone, PartialEq)]
pub enum Scalar {
    Exact(Gaussian),
    Symbolic(Sym),
    Float(Complex64),
}

impl Scalar {
    pub fn mode(&self) -> Mode {
        match self {
            Scalar::Exact(_) => Mode::Exact,
            Scalar::Symbolic(_) => Mode::Symbolic,
            Scalar::Float(_) => Mode::Float,
        }
    }

    fn mismatch(&self, o: &Scalar) -> Error {
        Error::ModeMismatch(self.mode().name(), o.mode().name())
    }

    pub fn try_add(&self, o: &Scalar) -> Result<Scalar> {
        match (self, o) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Ok(Scalar::Exact(a.clone() + b.clone())),
            (Scalar::Symbolic(a), Scalar::Symbolic(b)) => Ok(Scalar::Symbolic(a.clone() + b.clone())),
            (Scalar::Float(a), Scalar::Float(b)) => Ok(Scalar::Float(a + b)),
            _ => Err(self.mismatch(o)),
        }
    }

    pub fn try_mul(&self, o: &Scalar) -> Result<Scalar> {
        match (self, o) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Ok(Scalar::Exact(a.clone() * b.clone())),
            (Scalar::Symbolic(a), Scalar::Symbolic(b)) => Ok(Scalar::Symbolic(a.clone() * b.clone())),
            (Scalar::Float(a), Scalar::Float(b)) => Ok(Scalar::Float(a * b)),
            _ => Err(self.mismatch(o)),
        }
    }

    /// Lower to floating point; symbolic values need numeric `π` and `λ`.
    pub fn lower(&self, lambda: Option<f64>) -> Result<Complex64> {
        match self {
            Scalar::Exact(g) => Ok(g.to_c64()),
            Scalar::Float(z) => Ok(*z),
            Scalar::Symbolic(s) => match lambda {
                Some(l) => Ok(s.lower(std::f64::consts::PI, l)),
                None => Err(Error::ModeError("lowering a symbolic scalar needs a value for λ".into())),
            },
        }
    }

    /// `√(2i) = 1 + i` in the requested mode.
    pub fn sqrt_2i(mode: Mode) -> Scalar {
        match mode {
            Mode::Exact => Scalar::Exact(sqrt_2i()),
            Mode::Symbolic => Scalar::Symbolic(sqrt_2i()),
            Mode::Float => Scalar::Float(sqrt_2i()),
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(g) => write!(f, "{g}"),
            Scalar::Symbolic(s) => write!(f, "{s}"),
            Scalar::Float(z) => write!(f, "{z}"),
        }
    }
}

macro_rules! assign_ops {
    ($($t:ty),*) => {$(
        impl AddAssign for $t {
            fn add_assign(&mut self, o: $t) {
                *self = std::mem::replace(self, <$t as Field>::zero()) + o;
            }
        }
        impl SubAssign for $t {
            fn sub_assign(&mut self, o: $t) {
                *self = std::mem::replace(self, <$t as Field>::zero()) - o;
            }
        }
        impl MulAssign for $t {
            fn mul_assign(&mut self, o: $t) {
                *self = std::mem::replace(self, <$t as Field>::zero()) * o;
            }
        }
    )*};
}
assign_ops!(Gaussian, Sym);

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_promotes_instead_of_overflowing() {
        let big = Rat::int(i64::MAX);
        let s = big.clone() + big.clone();
        assert!(matches!(s, Rat::Big(_)));
        assert_eq!(s - big.clone(), big);
        let p = Rat::new(1, 3) * Rat::new(3, 7);
        assert_eq!(p, Rat::new(1, 7));
    }

    #[test]
    fn gaussian_arithmetic_and_parsing() {
        let a = Gaussian::parse("1/2+3/4i").unwrap();
        let b = Gaussian::parse("-i").unwrap();
        assert_eq!(a.clone() * b, Gaussian::parse("3/4-1/2i").unwrap());
        assert_eq!(a.clone() * a.inv().unwrap(), Gaussian::one());
        assert_eq!(Gaussian::parse("(2)").unwrap(), Gaussian::from_i64(2));
        assert_eq!(format!("{}", Gaussian::parse("1-2i").unwrap()), "(1-2i)");
    }

    #[test]
    fn sqrt_two_i_squares_to_two_i() {
        let r: Gaussian = sqrt_2i();
        assert_eq!(r.clone() * r, Gaussian::new(Rat::int(0), Rat::int(2)));
    }

    #[test]
    fn symbolic_terms_merge_and_cancel() {
        let a = Sym::monomial(Gaussian::from_i64(2), 1, -1);
        let b = Sym::monomial(Gaussian::from_i64(-2), 1, -1);
        assert!((a.clone() + b).is_zero());
        let sq = Sym::sqrt_lambda() * Sym::sqrt_lambda();
        assert_eq!(sq, Sym::lambda());
        let x = a.clone() * a.inv().unwrap();
        assert_eq!(x, Sym::one());
        let l = Sym::sqrt_pi().lower(std::f64::consts::PI, 2.0);
        assert!((l.re - std::f64::consts::PI.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn tagged_scalars_refuse_mixing() {
        let a = Scalar::Exact(Gaussian::one());
        let b = Scalar::Float(Complex64::new(1.0, 0.0));
        assert!(matches!(a.try_add(&b), Err(Error::ModeMismatch(_, _))));
        assert_eq!(a.lower(None).unwrap(), Complex64::new(1.0, 0.0));
        assert!(Scalar::Symbolic(Sym::lambda()).lower(None).is_err());
    }
}
