//! Exact complex amplitudes over `Q(i, √2, √3)`.
//!
//! Every value is stored as eight rationals: real and imaginary coefficients
//! on the basis `{1, √2, √3, √6}`. Arithmetic keeps the form canonical after
//! every operation, so structural equality is numerical equality.
//!
//! Text form (used by circuit files, JSON and the CLI):
//!
//! ```text
//! expr    = ['-'] term { ('+' | '-') term }
//! term    = unary { ('*' | '/') unary }
//! unary   = '-' unary | primary
//! primary = integer | 'i' | 'sqrt(' integer ')' | '(' expr ')'
//! ```
//!
//! Division is restricted to monomial divisors such as `sqrt(12)` or
//! `(3/1)*i`. The canonical rendering writes each nonzero coefficient as
//! `(a/b)`, `(a/b)*i`, `(a/b)*sqrt(k)` or `(a/b)*i*sqrt(k)` joined by `+`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Arbitrary-precision rational; always stored in lowest terms with a
/// positive denominator.
pub type Rational = BigRational;

/// Radicands of the basis elements, in storage order.
pub const BASIS: [u32; 4] = [1, 2, 3, 6];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AmplitudeError {
    #[error("amplitude {0} is not rational")]
    NotRational(String),
    #[error("sqrt({0}) is outside span{{1, sqrt(2), sqrt(3), sqrt(6)}}")]
    UnsupportedRadical(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("division by a non-monomial amplitude")]
    NonMonomialDivisor,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("at offset {offset}: expected {expected}")]
pub struct ParseAmplitudeError {
    /// Byte offset into the parsed text.
    pub offset: usize,
    pub expected: String,
}

/// Shorthand for building a small rational.
pub fn rat(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

/// Renders a rational as `n/d`, keeping the denominator even when it is 1.
pub fn format_rational(q: &Rational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

/// Parses `n/d` or a bare integer.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let text = text.trim();
    let (n, d) = match text.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (text, "1"),
    };
    let n: BigInt = n.parse().ok()?;
    let d: BigInt = d.parse().ok()?;
    if d.is_zero() {
        return None;
    }
    Some(Rational::new(n, d))
}

// √a·√b = scale·√c for basis indices a, b.
fn basis_product(a: usize, b: usize) -> (i64, usize) {
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    match (lo, hi) {
        (0, k) => (1, k),
        (1, 1) => (2, 0),
        (1, 2) => (1, 3),
        (1, 3) => (2, 2),
        (2, 2) => (3, 0),
        (2, 3) => (3, 1),
        (3, 3) => (6, 0),
        _ => unreachable!("basis index out of range"),
    }
}

/// Writes `q` as `c·√k` with `k` in the basis, if possible.
fn sqrt_decompose(q: &Rational) -> Option<(Rational, usize)> {
    if q.is_negative() {
        return None;
    }
    if q.is_zero() {
        return Some((Rational::zero(), 0));
    }
    // √(p/r) = √(p·r)/r
    let m = q.numer() * q.denom();
    for (idx, &k) in BASIS.iter().enumerate() {
        let k = BigInt::from(k);
        if (&m % &k).is_zero() {
            let s2 = &m / &k;
            let s = s2.sqrt();
            if &s * &s == s2 {
                return Some((Rational::new(s, q.denom().clone()), idx));
            }
        }
    }
    None
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RadicalComplex {
    re: [Rational; 4],
    im: [Rational; 4],
}

impl Default for RadicalComplex {
    fn default() -> Self {
        Self::zero()
    }
}

impl RadicalComplex {
    pub fn zero() -> Self {
        Self {
            re: std::array::from_fn(|_| Rational::zero()),
            im: std::array::from_fn(|_| Rational::zero()),
        }
    }

    pub fn one() -> Self {
        Self::from_rational(Rational::one())
    }

    /// The imaginary unit.
    pub fn i() -> Self {
        let mut out = Self::zero();
        out.im[0] = Rational::one();
        out
    }

    pub fn from_rational(q: Rational) -> Self {
        let mut out = Self::zero();
        out.re[0] = q;
        out
    }

    pub fn from_integer(n: i64) -> Self {
        Self::from_rational(Rational::from_integer(BigInt::from(n)))
    }

    /// Builds a value from `(real, imaginary)` coefficients on `{1, √2, √3, √6}`.
    pub fn from_parts(re: [Rational; 4], im: [Rational; 4]) -> Self {
        Self { re, im }
    }

    /// `i^k`, i.e. the phase factor of `k` quarter turns.
    pub fn i_pow(quarter_turns: i64) -> Self {
        match quarter_turns.rem_euclid(4) {
            0 => Self::one(),
            1 => Self::i(),
            2 => Self::from_integer(-1),
            _ => -Self::i(),
        }
    }

    /// `√q` for a nonnegative rational whose root lies in the basis span.
    pub fn sqrt_rational(q: &Rational) -> Result<Self, AmplitudeError> {
        let (c, idx) = sqrt_decompose(q)
            .ok_or_else(|| AmplitudeError::UnsupportedRadical(format_rational(q)))?;
        let mut out = Self::zero();
        out.re[idx] = c;
        Ok(out)
    }

    /// `1/√n`, the usual normalization prefactor.
    pub fn inv_sqrt(n: i64) -> Result<Self, AmplitudeError> {
        Self::one().div_sqrt(&rat(n, 1))
    }

    pub fn real(&self) -> &[Rational; 4] {
        &self.re
    }

    pub fn imag(&self) -> &[Rational; 4] {
        &self.im
    }

    pub fn is_zero(&self) -> bool {
        self.re.iter().chain(self.im.iter()).all(Zero::is_zero)
    }

    pub fn conj(&self) -> Self {
        Self {
            re: self.re.clone(),
            im: std::array::from_fn(|k| -&self.im[k]),
        }
    }

    pub fn scale(&self, q: &Rational) -> Self {
        Self {
            re: std::array::from_fn(|k| &self.re[k] * q),
            im: std::array::from_fn(|k| &self.im[k] * q),
        }
    }

    /// `|a|² = a·conj(a)`. The result is real but may still carry radicals,
    /// e.g. `|1+√2|² = 3 + 2√2`.
    pub fn norm_sq(&self) -> Self {
        self * &self.conj()
    }

    /// The rational value, if every radical and imaginary coefficient is zero.
    pub fn as_rational(&self) -> Result<Rational, AmplitudeError> {
        let pure = self.re[1..].iter().all(Zero::is_zero) && self.im.iter().all(Zero::is_zero);
        if pure {
            Ok(self.re[0].clone())
        } else {
            Err(AmplitudeError::NotRational(self.to_string()))
        }
    }

    /// `self / √q`, for `q > 0` with `√q` in the basis span.
    pub fn div_sqrt(&self, q: &Rational) -> Result<Self, AmplitudeError> {
        if q.is_zero() {
            return Err(AmplitudeError::DivisionByZero);
        }
        let (c, idx) = sqrt_decompose(q)
            .ok_or_else(|| AmplitudeError::UnsupportedRadical(format_rational(q)))?;
        // 1/(c·√k) = √k/(c·k)
        let k = Rational::from_integer(BigInt::from(BASIS[idx]));
        let mut factor = Self::zero();
        factor.re[idx] = (c * k).recip();
        Ok(self * &factor)
    }

    /// Exact quotient by a single-coefficient value `c·i^e·√k`.
    pub fn div_monomial(&self, divisor: &Self) -> Result<Self, AmplitudeError> {
        let mut nonzero = divisor
            .re
            .iter()
            .enumerate()
            .map(|(k, c)| (k, false, c))
            .chain(divisor.im.iter().enumerate().map(|(k, c)| (k, true, c)))
            .filter(|(_, _, c)| !c.is_zero());
        let (idx, imaginary, coeff) = match (nonzero.next(), nonzero.next()) {
            (None, _) => return Err(AmplitudeError::DivisionByZero),
            (Some(t), None) => t,
            (Some(_), Some(_)) => return Err(AmplitudeError::NonMonomialDivisor),
        };
        let k = Rational::from_integer(BigInt::from(BASIS[idx]));
        let mut inverse = Self::zero();
        // 1/(c·√k) = √k/(c·k); 1/i = -i
        if imaginary {
            inverse.im[idx] = -(coeff * k).recip();
        } else {
            inverse.re[idx] = (coeff * k).recip();
        }
        Ok(self * &inverse)
    }

    /// Multiplicative inverse. The denominator is rationalized by
    /// multiplying through by conjugates under `i -> -i`, `√2 -> -√2` and
    /// `√3 -> -√3` in turn.
    pub fn inv(&self) -> Result<Self, AmplitudeError> {
        if self.is_zero() {
            return Err(AmplitudeError::DivisionByZero);
        }
        let flip = |x: &Self, idx: [usize; 2]| {
            let mut y = x.clone();
            for k in idx {
                y.re[k] = -&y.re[k];
                y.im[k] = -&y.im[k];
            }
            y
        };
        let n1 = self.norm_sq();
        let s2 = flip(&n1, [1, 3]);
        let n2 = &n1 * &s2;
        let s3 = flip(&n2, [2, 3]);
        let n = (&n2 * &s3).as_rational()?;
        let numerator = &(&self.conj() * &s2) * &s3;
        Ok(numerator.scale(&n.recip()))
    }

    /// Numeric value as `(re, im)`.
    pub fn to_f64_pair(&self) -> (f64, f64) {
        let eval = |coeffs: &[Rational; 4]| -> f64 {
            coeffs
                .iter()
                .zip(BASIS)
                .filter(|(c, _)| !c.is_zero())
                .map(|(c, k)| c.to_f64().unwrap_or(f64::NAN) * f64::from(k).sqrt())
                .sum()
        };
        (eval(&self.re), eval(&self.im))
    }
}

impl Add<&RadicalComplex> for &RadicalComplex {
    type Output = RadicalComplex;
    fn add(self, rhs: &RadicalComplex) -> RadicalComplex {
        RadicalComplex {
            re: std::array::from_fn(|k| &self.re[k] + &rhs.re[k]),
            im: std::array::from_fn(|k| &self.im[k] + &rhs.im[k]),
        }
    }
}

impl Sub<&RadicalComplex> for &RadicalComplex {
    type Output = RadicalComplex;
    fn sub(self, rhs: &RadicalComplex) -> RadicalComplex {
        RadicalComplex {
            re: std::array::from_fn(|k| &self.re[k] - &rhs.re[k]),
            im: std::array::from_fn(|k| &self.im[k] - &rhs.im[k]),
        }
    }
}

// Real and imaginary parts of one operand times the radical ring.
fn ring_mul(a: &[Rational; 4], b: &[Rational; 4]) -> [Rational; 4] {
    let mut out: [Rational; 4] = std::array::from_fn(|_| Rational::zero());
    for (i, x) in a.iter().enumerate().filter(|(_, x)| !x.is_zero()) {
        for (j, y) in b.iter().enumerate().filter(|(_, y)| !y.is_zero()) {
            let (scale, k) = basis_product(i, j);
            out[k] += x * y * BigInt::from(scale);
        }
    }
    out
}

impl Mul<&RadicalComplex> for &RadicalComplex {
    type Output = RadicalComplex;
    fn mul(self, rhs: &RadicalComplex) -> RadicalComplex {
        let rr = ring_mul(&self.re, &rhs.re);
        let ii = ring_mul(&self.im, &rhs.im);
        let ri = ring_mul(&self.re, &rhs.im);
        let ir = ring_mul(&self.im, &rhs.re);
        RadicalComplex {
            re: std::array::from_fn(|k| &rr[k] - &ii[k]),
            im: std::array::from_fn(|k| &ri[k] + &ir[k]),
        }
    }
}

impl Neg for &RadicalComplex {
    type Output = RadicalComplex;
    fn neg(self) -> RadicalComplex {
        RadicalComplex {
            re: std::array::from_fn(|k| -&self.re[k]),
            im: std::array::from_fn(|k| -&self.im[k]),
        }
    }
}

macro_rules! forward_owned {
    ($($tr:ident $method:ident),*) => {$(
        impl $tr for RadicalComplex {
            type Output = RadicalComplex;
            fn $method(self, rhs: RadicalComplex) -> RadicalComplex {
                (&self).$method(&rhs)
            }
        }
        impl $tr<&RadicalComplex> for RadicalComplex {
            type Output = RadicalComplex;
            fn $method(self, rhs: &RadicalComplex) -> RadicalComplex {
                (&self).$method(rhs)
            }
        }
    )*};
}
forward_owned!(Add add, Sub sub, Mul mul);

impl Neg for RadicalComplex {
    type Output = RadicalComplex;
    fn neg(self) -> RadicalComplex {
        -&self
    }
}

impl fmt::Display for RadicalComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (idx, &k) in BASIS.iter().enumerate() {
            for (coeff, imaginary) in [(&self.re[idx], false), (&self.im[idx], true)] {
                if coeff.is_zero() {
                    continue;
                }
                if !first {
                    f.write_str("+")?;
                }
                first = false;
                write!(f, "({})", format_rational(coeff))?;
                if imaginary {
                    f.write_str("*i")?;
                }
                if k != 1 {
                    write!(f, "*sqrt({k})")?;
                }
            }
        }
        if first {
            f.write_str("(0/1)")?;
        }
        Ok(())
    }
}

impl FromStr for RadicalComplex {
    type Err = ParseAmplitudeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut parser = Parser {
            src: s.as_bytes(),
            pos: 0,
        };
        let value = parser.expr()?;
        parser.skip_ws();
        if parser.pos != s.len() {
            return Err(parser.error("end of amplitude"));
        }
        Ok(value)
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, expected: &str) -> ParseAmplitudeError {
        ParseAmplitudeError {
            offset: self.pos,
            expected: expected.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, byte: u8) -> bool {
        if self.peek() == Some(byte) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, byte: u8) -> Result<(), ParseAmplitudeError> {
        if self.eat(byte) {
            Ok(())
        } else {
            Err(self.error(&format!("'{}'", byte as char)))
        }
    }

    fn expr(&mut self) -> Result<RadicalComplex, ParseAmplitudeError> {
        let mut acc = if self.eat(b'-') {
            -self.term()?
        } else {
            self.term()?
        };
        loop {
            if self.eat(b'+') {
                acc = acc + self.term()?;
            } else if self.eat(b'-') {
                acc = acc - self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<RadicalComplex, ParseAmplitudeError> {
        let mut acc = self.unary()?;
        loop {
            if self.eat(b'*') {
                acc = acc * self.unary()?;
            } else if self.peek() == Some(b'/') {
                let at = self.pos;
                self.pos += 1;
                let divisor = self.unary()?;
                acc = acc
                    .div_monomial(&divisor)
                    .map_err(|e| ParseAmplitudeError {
                        offset: at,
                        expected: format!("a nonzero monomial divisor ({e})"),
                    })?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<RadicalComplex, ParseAmplitudeError> {
        if self.eat(b'-') {
            return Ok(-self.unary()?);
        }
        self.primary()
    }

    fn integer(&mut self) -> Result<BigInt, ParseAmplitudeError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("integer"));
        }
        let digits = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
        Ok(digits.parse().expect("validated digits"))
    }

    fn primary(&mut self) -> Result<RadicalComplex, ParseAmplitudeError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                self.expect(b')')?;
                Ok(inner)
            }
            Some(b'i') => {
                self.pos += 1;
                Ok(RadicalComplex::i())
            }
            Some(b's') if self.src[self.pos..].starts_with(b"sqrt") => {
                self.pos += 4;
                self.expect(b'(')?;
                let at = self.pos;
                let radicand = Rational::from_integer(self.integer()?);
                self.expect(b')')?;
                RadicalComplex::sqrt_rational(&radicand).map_err(|_| ParseAmplitudeError {
                    offset: at,
                    expected: "a radicand of the form s^2*k with k in {1,2,3,6}".into(),
                })
            }
            Some(c) if c.is_ascii_digit() => Ok(RadicalComplex::from_rational(
                Rational::from_integer(self.integer()?),
            )),
            _ => Err(self.error("integer, 'i', 'sqrt(' or '('")),
        }
    }
}
