//! Certified real and complex arithmetic.
//!
//! [`Interval`] is a closed interval of MPFR floats whose endpoints are
//! produced with outward (directed) rounding, so every operation returns an
//! enclosure of the exact result. [`CInterval`] is the rectangular complex
//! counterpart. Exact quantities live in [`CRational`].

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use rug::float::Round;
use rug::ops::AssignRound;
use rug::{Float, Integer, Rational};

use crate::error::{Error, Result};

/// Default working precision in bits.
pub const DEFAULT_PRECISION: u32 = 256;

fn down<T>(prec: u32, val: T) -> Float
where
    Float: AssignRound<T, Round = Round, Ordering = Ordering>,
{
    Float::with_val_round(prec, val, Round::Down).0
}

fn up<T>(prec: u32, val: T) -> Float
where
    Float: AssignRound<T, Round = Round, Ordering = Ordering>,
{
    Float::with_val_round(prec, val, Round::Up).0
}

fn min_f(a: Float, b: Float) -> Float {
    if a <= b {
        a
    } else {
        b
    }
}

fn max_f(a: Float, b: Float) -> Float {
    if a >= b {
        a
    } else {
        b
    }
}

/// Closed interval `[lo, hi]` with outward-rounded endpoints.
#[derive(Clone, Debug, PartialEq)]
pub struct Interval {
    lo: Float,
    hi: Float,
}

impl Interval {
    pub fn new(lo: Float, hi: Float) -> Self {
        debug_assert!(lo.is_nan() || hi.is_nan() || lo <= hi, "inverted interval");
        Interval { lo, hi }
    }

    pub fn point(value: Float) -> Self {
        Interval {
            lo: value.clone(),
            hi: value,
        }
    }

    pub fn zero(prec: u32) -> Self {
        Self::point(Float::new(prec))
    }

    pub fn from_i64(prec: u32, v: i64) -> Self {
        Interval::new(down(prec, v), up(prec, v))
    }

    pub fn from_rational(prec: u32, q: &Rational) -> Self {
        Interval::new(down(prec, q), up(prec, q))
    }

    pub fn from_integer(prec: u32, z: &Integer) -> Self {
        Interval::new(down(prec, z), up(prec, z))
    }

    pub fn from_f64(prec: u32, v: f64) -> Self {
        Interval::point(Float::with_val(prec.max(53), v))
    }

    pub fn lo(&self) -> &Float {
        &self.lo
    }

    pub fn hi(&self) -> &Float {
        &self.hi
    }

    pub fn prec(&self) -> u32 {
        self.lo.prec().max(self.hi.prec())
    }

    pub fn is_finite(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn mid(&self) -> Float {
        let p = self.prec();
        let mut m = Float::with_val(p + 1, &self.lo + &self.hi);
        m /= 2;
        Float::with_val(p, &m)
    }

    /// Upper bound on the half-width.
    pub fn rad(&self) -> Float {
        let p = self.prec();
        let mut w = up(p, &self.hi - &self.lo);
        w /= 2;
        w
    }

    /// Upper bound on `|x|` for every `x` in the interval.
    pub fn mag(&self) -> Float {
        let a = Float::with_val(self.lo.prec(), self.lo.abs_ref());
        let b = Float::with_val(self.hi.prec(), self.hi.abs_ref());
        max_f(a, b)
    }

    /// Lower bound on `|x|` over the interval (zero if it straddles zero).
    pub fn mig(&self) -> Float {
        if self.lo.is_sign_positive() && !self.lo.is_zero() {
            self.lo.clone()
        } else if self.hi.is_sign_negative() && !self.hi.is_zero() {
            Float::with_val(self.hi.prec(), -&self.hi)
        } else {
            Float::new(self.prec())
        }
    }

    pub fn contains(&self, x: &Float) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn contains_zero(&self) -> bool {
        !self.is_positive() && !self.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.lo > 0
    }

    pub fn is_negative(&self) -> bool {
        self.hi < 0
    }

    /// True when every point of `self` is strictly below every point of `other`.
    pub fn certainly_lt(&self, other: &Interval) -> bool {
        self.hi < other.lo
    }

    pub fn certainly_lt_f(&self, x: &Float) -> bool {
        &self.hi < x
    }

    pub fn certainly_ge_f(&self, x: &Float) -> bool {
        &self.lo >= x
    }

    pub fn overlaps(&self, other: &Interval) -> bool {
        !(self.hi < other.lo || other.hi < self.lo)
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        Interval::new(
            min_f(self.lo.clone(), other.lo.clone()),
            max_f(self.hi.clone(), other.hi.clone()),
        )
    }

    pub fn neg(&self) -> Interval {
        Interval::new(
            Float::with_val(self.hi.prec(), -&self.hi),
            Float::with_val(self.lo.prec(), -&self.lo),
        )
    }

    pub fn add(&self, o: &Interval) -> Interval {
        let p = self.prec().max(o.prec());
        Interval::new(down(p, &self.lo + &o.lo), up(p, &self.hi + &o.hi))
    }

    pub fn sub(&self, o: &Interval) -> Interval {
        let p = self.prec().max(o.prec());
        Interval::new(down(p, &self.lo - &o.hi), up(p, &self.hi - &o.lo))
    }

    pub fn mul(&self, o: &Interval) -> Interval {
        let p = self.prec().max(o.prec());
        let (a, b) = (self, o);
        let a_nonneg = a.lo >= 0;
        let a_nonpos = a.hi <= 0;
        let b_nonneg = b.lo >= 0;
        let b_nonpos = b.hi <= 0;
        let (lo, hi) = if a_nonneg {
            if b_nonneg {
                (down(p, &a.lo * &b.lo), up(p, &a.hi * &b.hi))
            } else if b_nonpos {
                (down(p, &a.hi * &b.lo), up(p, &a.lo * &b.hi))
            } else {
                (down(p, &a.hi * &b.lo), up(p, &a.hi * &b.hi))
            }
        } else if a_nonpos {
            if b_nonneg {
                (down(p, &a.lo * &b.hi), up(p, &a.hi * &b.lo))
            } else if b_nonpos {
                (down(p, &a.hi * &b.hi), up(p, &a.lo * &b.lo))
            } else {
                (down(p, &a.lo * &b.hi), up(p, &a.lo * &b.lo))
            }
        } else if b_nonneg {
            (down(p, &a.lo * &b.hi), up(p, &a.hi * &b.hi))
        } else if b_nonpos {
            (down(p, &a.hi * &b.lo), up(p, &a.lo * &b.lo))
        } else {
            (
                min_f(down(p, &a.lo * &b.hi), down(p, &a.hi * &b.lo)),
                max_f(up(p, &a.lo * &b.lo), up(p, &a.hi * &b.hi)),
            )
        };
        Interval::new(lo, hi)
    }

    pub fn sqr(&self) -> Interval {
        let p = self.prec();
        if self.lo >= 0 {
            Interval::new(down(p, self.lo.square_ref()), up(p, self.hi.square_ref()))
        } else if self.hi <= 0 {
            Interval::new(down(p, self.hi.square_ref()), up(p, self.lo.square_ref()))
        } else {
            let m = self.mag();
            Interval::new(Float::new(p), up(p, m.square_ref()))
        }
    }

    pub fn recip(&self) -> Result<Interval> {
        if self.contains_zero() {
            return Err(Error::Range("reciprocal of an interval containing zero".into()));
        }
        let p = self.prec();
        Ok(Interval::new(down(p, 1 / &self.hi), up(p, 1 / &self.lo)))
    }

    pub fn div(&self, o: &Interval) -> Result<Interval> {
        Ok(self.mul(&o.recip()?))
    }

    pub fn mul_u(&self, k: u64) -> Interval {
        self.mul(&Interval::from_i64(self.prec(), k as i64))
    }

    /// Multiplication by `2^e`, exact.
    pub fn mul_2exp(&self, e: i32) -> Interval {
        let mut lo = self.lo.clone();
        let mut hi = self.hi.clone();
        if e >= 0 {
            lo <<= e as u32;
            hi <<= e as u32;
        } else {
            lo >>= (-e) as u32;
            hi >>= (-e) as u32;
        }
        Interval::new(lo, hi)
    }

    pub fn pow_u(&self, n: u32) -> Interval {
        let p = self.prec();
        let mut acc = Interval::from_i64(p, 1);
        let mut base = self.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.sqr();
            }
        }
        // Even powers of a straddling interval are nonnegative.
        if n.is_multiple_of(2) && acc.lo < 0 {
            acc.lo = Float::new(p);
        }
        acc
    }

    pub fn sqrt(&self) -> Result<Interval> {
        if self.hi < 0 {
            return Err(Error::Range("square root of a negative interval".into()));
        }
        let p = self.prec();
        let lo = if self.lo <= 0 {
            Float::new(p)
        } else {
            down(p, self.lo.sqrt_ref())
        };
        Ok(Interval::new(lo, up(p, self.hi.sqrt_ref())))
    }

    pub fn exp(&self) -> Interval {
        let p = self.prec();
        Interval::new(down(p, self.lo.exp_ref()), up(p, self.hi.exp_ref()))
    }

    pub fn ln(&self) -> Result<Interval> {
        if self.lo <= 0 {
            return Err(Error::Range("logarithm of a nonpositive interval".into()));
        }
        let p = self.prec();
        Ok(Interval::new(down(p, self.lo.ln_ref()), up(p, self.hi.ln_ref())))
    }

    /// `self^e` for a positive base and arbitrary real exponent interval.
    pub fn powf(&self, e: &Interval) -> Result<Interval> {
        Ok(self.ln()?.mul(e).exp())
    }

    pub fn abs(&self) -> Interval {
        if self.lo >= 0 {
            self.clone()
        } else if self.hi <= 0 {
            self.neg()
        } else {
            Interval::new(Float::new(self.prec()), self.mag())
        }
    }

    pub fn max(&self, o: &Interval) -> Interval {
        Interval::new(
            max_f(self.lo.clone(), o.lo.clone()),
            max_f(self.hi.clone(), o.hi.clone()),
        )
    }

    /// Widen by an absolute error bound `err >= 0`.
    pub fn inflate(&self, err: &Float) -> Interval {
        let p = self.prec();
        Interval::new(down(p, &self.lo - err), up(p, &self.hi + err))
    }

    pub fn to_f64(&self) -> f64 {
        self.mid().to_f64()
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", fmt_float(&self.lo, 20), fmt_float(&self.hi, 20))
    }
}

/// Rectangular complex interval.
#[derive(Clone, Debug, PartialEq)]
pub struct CInterval {
    pub re: Interval,
    pub im: Interval,
}

impl CInterval {
    pub fn new(re: Interval, im: Interval) -> Self {
        CInterval { re, im }
    }

    pub fn real(re: Interval) -> Self {
        let p = re.prec();
        CInterval {
            re,
            im: Interval::zero(p),
        }
    }

    pub fn zero(prec: u32) -> Self {
        Self::real(Interval::zero(prec))
    }

    pub fn from_crational(prec: u32, q: &CRational) -> Self {
        CInterval {
            re: Interval::from_rational(prec, &q.re),
            im: Interval::from_rational(prec, &q.im),
        }
    }

    pub fn from_complex(c: &BigComplex) -> Self {
        CInterval {
            re: Interval::point(c.re.clone()),
            im: Interval::point(c.im.clone()),
        }
    }

    pub fn prec(&self) -> u32 {
        self.re.prec().max(self.im.prec())
    }

    pub fn is_real(&self) -> bool {
        self.im.lo().is_zero() && self.im.hi().is_zero()
    }

    pub fn is_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }

    pub fn add(&self, o: &CInterval) -> CInterval {
        CInterval::new(self.re.add(&o.re), self.im.add(&o.im))
    }

    pub fn sub(&self, o: &CInterval) -> CInterval {
        CInterval::new(self.re.sub(&o.re), self.im.sub(&o.im))
    }

    pub fn neg(&self) -> CInterval {
        CInterval::new(self.re.neg(), self.im.neg())
    }

    pub fn mul(&self, o: &CInterval) -> CInterval {
        if self.is_real() && o.is_real() {
            return CInterval::real(self.re.mul(&o.re));
        }
        let re = self.re.mul(&o.re).sub(&self.im.mul(&o.im));
        let im = self.re.mul(&o.im).add(&self.im.mul(&o.re));
        CInterval::new(re, im)
    }

    pub fn mul_real(&self, r: &Interval) -> CInterval {
        CInterval::new(self.re.mul(r), self.im.mul(r))
    }

    pub fn recip(&self) -> Result<CInterval> {
        if self.is_real() {
            return Ok(CInterval::real(self.re.recip()?));
        }
        let den = self.re.sqr().add(&self.im.sqr());
        let inv = den.recip()?;
        Ok(CInterval::new(self.re.mul(&inv), self.im.neg().mul(&inv)))
    }

    pub fn div(&self, o: &CInterval) -> Result<CInterval> {
        Ok(self.mul(&o.recip()?))
    }

    pub fn pow_u(&self, n: u32) -> CInterval {
        let p = self.prec();
        let mut acc = CInterval::real(Interval::from_i64(p, 1));
        let mut base = self.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Enclosure of the modulus.
    pub fn abs(&self) -> Interval {
        if self.is_real() {
            return self.re.abs();
        }
        let sq = self.re.sqr().add(&self.im.sqr());
        sq.sqrt().expect("sum of squares is nonnegative")
    }

    /// Upper bound on the distance from the midpoint to any point of the box.
    pub fn radius(&self) -> Float {
        let p = self.prec();
        let r = self.re.rad();
        let i = self.im.rad();
        if i.is_zero() {
            return r;
        }
        let s = up(p, r.square_ref());
        let t = up(p, i.square_ref());
        up(p, up(p, &s + &t).sqrt_ref())
    }

    pub fn mid(&self) -> BigComplex {
        BigComplex {
            re: self.re.mid(),
            im: self.im.mid(),
        }
    }

    pub fn inflate(&self, err: &Float) -> CInterval {
        CInterval::new(self.re.inflate(err), self.im.inflate(err))
    }
}

/// A complex point value at explicit precision.
#[derive(Clone, Debug, PartialEq)]
pub struct BigComplex {
    pub re: Float,
    pub im: Float,
}

impl BigComplex {
    pub fn new(re: Float, im: Float) -> Self {
        BigComplex { re, im }
    }

    pub fn real(re: Float) -> Self {
        let p = re.prec();
        BigComplex {
            re,
            im: Float::new(p),
        }
    }

    pub fn from_f64(prec: u32, re: f64, im: f64) -> Self {
        BigComplex {
            re: Float::with_val(prec, re),
            im: Float::with_val(prec, im),
        }
    }

    pub fn from_crational(prec: u32, q: &CRational) -> Self {
        BigComplex {
            re: Float::with_val(prec, &q.re),
            im: Float::with_val(prec, &q.im),
        }
    }

    pub fn prec(&self) -> u32 {
        self.re.prec().max(self.im.prec())
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn abs(&self) -> Float {
        let p = self.prec();
        let s = Float::with_val(p, self.re.square_ref()) + Float::with_val(p, self.im.square_ref());
        s.sqrt()
    }

    /// Upper bound on the modulus.
    pub fn abs_upper(&self) -> Float {
        CInterval::from_complex(self).abs().hi().clone()
    }

    pub fn neg(&self) -> BigComplex {
        BigComplex::new(-self.re.clone(), -self.im.clone())
    }
}

impl fmt::Display for BigComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            write!(f, "{}", fmt_float(&self.re, 30))
        } else {
            let sign = if self.im.is_sign_negative() { "-" } else { "+" };
            let im = Float::with_val(self.im.prec(), self.im.abs_ref());
            write!(f, "{} {} {}i", fmt_float(&self.re, 30), sign, fmt_float(&im, 30))
        }
    }
}

/// Exact complex rational `re + i·im`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct CRational {
    pub re: Rational,
    pub im: Rational,
}

impl CRational {
    pub fn new(re: Rational, im: Rational) -> Self {
        CRational { re, im }
    }

    pub fn real(re: Rational) -> Self {
        CRational {
            re,
            im: Rational::new(),
        }
    }

    pub fn from_i64(v: i64) -> Self {
        Self::real(Rational::from(v))
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::from_i64(1)
    }

    pub fn i() -> Self {
        CRational::new(Rational::new(), Rational::from(1))
    }

    pub fn is_zero(&self) -> bool {
        self.re == 0 && self.im == 0
    }

    pub fn is_real(&self) -> bool {
        self.im == 0
    }

    pub fn abs_sq(&self) -> Rational {
        Rational::from(self.re.square_ref()) + Rational::from(self.im.square_ref())
    }

    pub fn add(&self, o: &CRational) -> CRational {
        CRational::new(
            Rational::from(&self.re + &o.re),
            Rational::from(&self.im + &o.im),
        )
    }

    pub fn sub(&self, o: &CRational) -> CRational {
        CRational::new(
            Rational::from(&self.re - &o.re),
            Rational::from(&self.im - &o.im),
        )
    }

    pub fn neg(&self) -> CRational {
        CRational::new(-self.re.clone(), -self.im.clone())
    }

    pub fn mul(&self, o: &CRational) -> CRational {
        if self.is_real() && o.is_real() {
            return CRational::real(Rational::from(&self.re * &o.re));
        }
        let re = Rational::from(&self.re * &o.re) - Rational::from(&self.im * &o.im);
        let im = Rational::from(&self.re * &o.im) + Rational::from(&self.im * &o.re);
        CRational::new(re, im)
    }

    pub fn mul_rational(&self, r: &Rational) -> CRational {
        CRational::new(Rational::from(&self.re * r), Rational::from(&self.im * r))
    }

    pub fn recip(&self) -> Option<CRational> {
        if self.is_zero() {
            return None;
        }
        let d = self.abs_sq();
        Some(CRational::new(
            Rational::from(&self.re / &d),
            -Rational::from(&self.im / &d),
        ))
    }

    pub fn to_complex(&self, prec: u32) -> BigComplex {
        BigComplex::from_crational(prec, self)
    }
}

impl fmt::Display for CRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im == 0 {
            write!(f, "{}", self.re)
        } else if self.re == 0 {
            write!(f, "{}i", self.im)
        } else if self.im < 0 {
            write!(f, "{}-{}i", self.re, Rational::from(-&self.im))
        } else {
            write!(f, "{}+{}i", self.re, self.im)
        }
    }
}

impl From<Rational> for CRational {
    fn from(r: Rational) -> Self {
        CRational::real(r)
    }
}

impl From<i64> for CRational {
    fn from(v: i64) -> Self {
        CRational::from_i64(v)
    }
}

impl FromStr for CRational {
    type Err = Error;

    /// Accepts `"p/q"`, decimals, and `"a+bi"` / `"bi"` forms.
    fn from_str(s: &str) -> Result<Self> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if let Some(body) = t.strip_suffix('i') {
            // Split at the last sign that is not the leading one and not part of an exponent.
            let bytes = body.as_bytes();
            let mut split = None;
            for idx in (1..bytes.len()).rev() {
                if (bytes[idx] == b'+' || bytes[idx] == b'-')
                    && !matches!(bytes[idx - 1], b'e' | b'E')
                {
                    split = Some(idx);
                    break;
                }
            }
            let (re, im) = match split {
                Some(idx) => (&body[..idx], &body[idx..]),
                None => ("0", body),
            };
            let im = match im {
                "" | "+" => "1",
                "-" => "-1",
                other => other,
            };
            return Ok(CRational::new(parse_rational(re)?, parse_rational(im)?));
        }
        Ok(CRational::real(parse_rational(&t)?))
    }
}

/// Parse an exact rational from `"p/q"`, an integer, or a decimal with an
/// optional exponent (`"0.01"`, `"1e-6"`). Decimals are converted exactly.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let t = s.trim();
    let bad = || Error::Parse(format!("not a rational number: {s:?}"));
    if t.is_empty() {
        return Err(bad());
    }
    if t.contains('/') {
        let q = Rational::from_str_radix(t.trim_start_matches('+'), 10).map_err(|_| bad())?;
        return Ok(q);
    }
    let (mantissa, exp) = match t.find(['e', 'E']) {
        Some(i) => (&t[..i], t[i + 1..].parse::<i64>().map_err(|_| bad())?),
        None => (t, 0),
    };
    let (neg, digits) = match mantissa.as_bytes().first() {
        Some(b'-') => (true, &mantissa[1..]),
        Some(b'+') => (false, &mantissa[1..]),
        _ => (false, mantissa),
    };
    let (int_part, frac_part) = match digits.find('.') {
        Some(i) => (&digits[..i], &digits[i + 1..]),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let all: String = format!("{int_part}{frac_part}");
    let num = Integer::from_str_radix(if all.is_empty() { "0" } else { &all }, 10).map_err(|_| bad())?;
    let scale = exp - frac_part.len() as i64;
    if scale.unsigned_abs() > 100_000 {
        return Err(bad());
    }
    let ten_pow = Integer::from(Integer::u_pow_u(10, scale.unsigned_abs() as u32));
    let mut q = if scale >= 0 {
        Rational::from(num * ten_pow)
    } else {
        Rational::from((num, ten_pow))
    };
    if neg {
        q = -q;
    }
    Ok(q)
}

/// Render a rational as `"p/q"` (or `"p"` for integers).
pub fn fmt_rational(q: &Rational) -> String {
    q.to_string()
}

/// Decimal rendering with `digits` significant digits.
pub fn fmt_float(x: &Float, digits: usize) -> String {
    if x.is_zero() {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = x.to_string_radix(10, Some(digits));
    let Some((mant, exp)) = sci.split_once('e') else {
        // already positional
        return if sci.contains('.') {
            sci.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            sci
        };
    };
    let Ok(exp) = exp.parse::<i64>() else {
        return sci;
    };
    // Positional form for moderate exponents: 2.0787e-1 → 0.20787.
    if !(-6..digits as i64).contains(&exp) {
        return sci;
    }
    let (neg, mant) = match mant.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mant),
    };
    let ds: String = mant.chars().filter(|c| c.is_ascii_digit()).collect();
    let point = exp + 1;
    let mut out = if point <= 0 {
        format!("0.{}{}", "0".repeat((-point) as usize), ds)
    } else if point as usize >= ds.len() {
        format!("{}{}", ds, "0".repeat(point as usize - ds.len()))
    } else {
        format!("{}.{}", &ds[..point as usize], &ds[point as usize..])
    };
    if out.contains('.') {
        out = out.trim_end_matches('0').trim_end_matches('.').to_string();
    }
    if neg {
        out.insert(0, '-');
    }
    out
}

/// Exact rational square root when both numerator and denominator are
/// perfect squares.
pub fn rational_sqrt_exact(q: &Rational) -> Option<Rational> {
    if *q < 0 {
        return None;
    }
    let (n, d) = (q.numer(), q.denom());
    if n.is_perfect_square() && d.is_perfect_square() {
        Some(Rational::from((Integer::from(n.sqrt_ref()), Integer::from(d.sqrt_ref()))))
    } else {
        None
    }
}

/// Exact rational fourth root when it exists.
pub fn rational_root4_exact(q: &Rational) -> Option<Rational> {
    rational_sqrt_exact(q).and_then(|s| rational_sqrt_exact(&s))
}

/// Enclosure of `sqrt(q)` for a nonnegative rational.
pub fn rational_sqrt(prec: u32, q: &Rational) -> Result<Interval> {
    if let Some(r) = rational_sqrt_exact(q) {
        return Ok(Interval::from_rational(prec, &r));
    }
    Interval::from_rational(prec, q).sqrt()
}

/// Fast `ln |q|` estimate for a nonzero rational (diagnostics only).
pub fn ln_abs_f64(q: &Rational) -> f64 {
    let n = q.numer();
    let d = q.denom();
    let ln_int = |z: &Integer| -> f64 {
        let bits = z.significant_bits();
        if bits < 1000 {
            Float::with_val(64, z).abs().ln().to_f64()
        } else {
            let shift = bits - 64;
            let top = Integer::from(z.abs_ref()) >> shift;
            top.to_f64().ln() + shift as f64 * std::f64::consts::LN_2
        }
    };
    ln_int(n) - ln_int(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    #[test]
    fn decimal_rendering() {
        let r = |v: f64, d| fmt_float(&Float::with_val(64, v), d);
        assert_eq!(r(0.207875, 6), "0.207875");
        assert_eq!(r(-1.5, 6), "-1.5");
        assert_eq!(r(1234.5, 8), "1234.5");
        assert_eq!(r(1e6, 8), "1000000");
        assert_eq!(r(2.5e-9, 4), "2.500e-9");
        assert_eq!(r(3.0e12, 6), "3.00000e12");
    }

    fn iv(prec: u32, v: f64) -> Interval {
        Interval::from_f64(prec, v)
    }

    #[test]
    fn parse_forms() {
        assert_eq!(parse_rational("1/3").unwrap(), Rational::from((1, 3)));
        assert_eq!(parse_rational("-2/4").unwrap(), Rational::from((-1, 2)));
        assert_eq!(parse_rational("0.01").unwrap(), Rational::from((1, 100)));
        assert_eq!(parse_rational("1e-6").unwrap(), Rational::from((1, 1_000_000)));
        assert_eq!(parse_rational("2.5E2").unwrap(), Rational::from(250));
        assert_eq!(parse_rational("-.5").unwrap(), Rational::from((-1, 2)));
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("").is_err());
        assert!(parse_rational("1/0").is_err());
    }

    #[test]
    fn parse_complex() {
        let z: CRational = "1/2-3i".parse().unwrap();
        assert_eq!(z, CRational::new(Rational::from((1, 2)), Rational::from(-3)));
        let w: CRational = "i".parse().unwrap();
        assert_eq!(w, CRational::i());
        let v: CRational = "-2i".parse().unwrap();
        assert_eq!(v.im, -2);
        let e: CRational = "1e-3+1e-3i".parse().unwrap();
        assert_eq!(e.re, Rational::from((1, 1000)));
        assert_eq!(e.im, Rational::from((1, 1000)));
    }

    #[test]
    fn directed_rounding_encloses_one_third() {
        let third = Interval::from_rational(64, &Rational::from((1, 3)));
        assert!(third.lo() < third.hi());
        let three = third.mul_u(3);
        assert!(three.contains(&Float::with_val(64, 1)));
    }

    #[test]
    fn mul_sign_cases() {
        let p = 64;
        let a = Interval::new(Float::with_val(p, -2), Float::with_val(p, 3));
        let b = Interval::new(Float::with_val(p, -5), Float::with_val(p, 4));
        let c = a.mul(&b);
        assert_eq!(c.lo().to_f64(), -15.0);
        assert_eq!(c.hi().to_f64(), 12.0);
        let d = iv(p, -2.0).mul(&Interval::new(Float::with_val(p, 1), Float::with_val(p, 3)));
        assert_eq!((d.lo().to_f64(), d.hi().to_f64()), (-6.0, -2.0));
    }

    #[test]
    fn transcendental_enclosures() {
        let p = 128;
        let one = Interval::from_i64(p, 1);
        let e = one.exp();
        let exact = Float::with_val(p * 2, 1).exp();
        assert!(e.lo() <= &exact && &exact <= e.hi());
        assert!(e.ln().unwrap().contains(&Float::with_val(p, 1)));
        assert!(iv(p, -1.0).ln().is_err());
        assert!(Interval::zero(p).recip().is_err());
    }

    #[test]
    fn even_power_of_straddling_interval() {
        let p = 64;
        let a = Interval::new(Float::with_val(p, -1), Float::with_val(p, 2));
        let s = a.pow_u(2);
        assert_eq!(s.lo().to_f64(), 0.0);
        assert_eq!(s.hi().to_f64(), 4.0);
    }

    #[test]
    fn complex_mul_i_squared() {
        let p = 64;
        let i = CInterval::from_crational(p, &CRational::i());
        let m1 = i.mul(&i);
        assert_eq!(m1.re.mid().to_f64(), -1.0);
        assert!(m1.im.contains(&Float::new(p)));
        assert_eq!(i.pow_u(4).re.mid().to_f64(), 1.0);
    }

    #[test]
    fn exact_roots() {
        assert_eq!(rational_sqrt_exact(&Rational::from((9, 4))), Some(Rational::from((3, 2))));
        assert_eq!(rational_sqrt_exact(&Rational::from((1, 2))), None);
        assert_eq!(rational_root4_exact(&Rational::from(81)), Some(Rational::from(3)));
    }

    #[test]
    fn ln_abs_estimate() {
        let q = Rational::from((1, 3));
        assert!((ln_abs_f64(&q) + 3f64.ln()).abs() < 1e-12);
        let big = Rational::from(Integer::from(Integer::u_pow_u(3, 5000)));
        assert!((ln_abs_f64(&big) - 5000.0 * 3f64.ln()).abs() < 1e-6);
    }
}

impl serde::Serialize for CRational {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> serde::Deserialize<'de> for CRational {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(serde::Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(v) => Ok(CRational::from_i64(v)),
            Raw::Str(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Serde adapter storing a [`Rational`] as a `"p/q"` string (integers and
/// decimal strings are accepted on input).
pub mod rational_str {
    use rug::Rational;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(q: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&q.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(v) => Ok(Rational::from(v)),
            Raw::Str(s) => super::parse_rational(&s).map_err(serde::de::Error::custom),
        }
    }
}

/// Exact binary number `mantissa · 2^exponent` (mantissa as a decimal string).
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Dyadic {
    pub mantissa: String,
    pub exponent: i64,
}

impl Dyadic {
    pub fn from_float(x: &Float) -> Self {
        if x.is_zero() {
            return Dyadic {
                mantissa: "0".into(),
                exponent: 0,
            };
        }
        let (m, e) = x.to_integer_exp().expect("finite float");
        // Strip trailing zero bits so the encoding is canonical.
        let tz = m.find_one(0).unwrap_or(0);
        let m = m >> tz;
        Dyadic {
            mantissa: m.to_string(),
            exponent: e as i64 + tz as i64,
        }
    }

    pub fn to_rational(&self) -> Result<Rational> {
        let m = Integer::from_str_radix(&self.mantissa, 10)
            .map_err(|_| Error::Parse(format!("bad mantissa {:?}", self.mantissa)))?;
        let e = self.exponent;
        if e.unsigned_abs() > 1 << 26 {
            return Err(Error::Range(format!("dyadic exponent {e} out of range")));
        }
        let mut q = Rational::from(m);
        if e >= 0 {
            q <<= e as u32;
        } else {
            q >>= (-e) as u32;
        }
        Ok(q)
    }

    /// The value as a float, exactly (precision grows to fit the mantissa).
    pub fn to_float(&self) -> Result<Float> {
        let m = Integer::from_str_radix(&self.mantissa, 10)
            .map_err(|_| Error::Parse(format!("bad mantissa {:?}", self.mantissa)))?;
        let bits = m.significant_bits().max(2);
        let mut f = Float::with_val(bits, &m);
        let e = i32::try_from(self.exponent)
            .map_err(|_| Error::Range(format!("dyadic exponent {} out of range", self.exponent)))?;
        if e >= 0 {
            f <<= e as u32;
        } else {
            f >>= (-e) as u32;
        }
        Ok(f)
    }
}

/// `mantissa · 2^exponent ± error`.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Approx {
    pub mantissa: String,
    pub exponent: i64,
    pub error: Dyadic,
}

impl Approx {
    pub fn from_interval(x: &Interval) -> Self {
        let mid = Dyadic::from_float(&x.mid());
        let mf = mid.to_float().expect("finite");
        let p = x.prec();
        let d1 = Float::with_val_round(p, x.hi() - &mf, rug::float::Round::Up).0;
        let d2 = Float::with_val_round(p, &mf - x.lo(), rug::float::Round::Up).0;
        let err = if d1 > d2 { d1 } else { d2 };
        Approx {
            mantissa: mid.mantissa,
            exponent: mid.exponent,
            error: Dyadic::from_float(&err),
        }
    }

    pub fn center(&self) -> Dyadic {
        Dyadic {
            mantissa: self.mantissa.clone(),
            exponent: self.exponent,
        }
    }

    pub fn to_interval(&self, prec: u32) -> Result<Interval> {
        let c = self.center().to_float()?;
        let e = self.error.to_float()?;
        let p = prec.max(c.prec());
        Ok(Interval::new(
            Float::with_val_round(p, &c - &e, rug::float::Round::Down).0,
            Float::with_val_round(p, &c + &e, rug::float::Round::Up).0,
        ))
    }

}
