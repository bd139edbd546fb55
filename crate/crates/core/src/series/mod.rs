//! Power series given by coefficient rules.

mod coeff;
mod eval;
mod head;
mod norms;
mod tail;

use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, RwLock};

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::ops::Pow;
use rug::{Float, Integer, Rational};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::num::{rational_sqrt_exact, rational_str, CRational, Interval};

pub use coeff::{Coeff, Sign, Surd};
pub use eval::{auto_truncation, eval, eval_auto, eval_many, Evaluation};
pub use head::{recover_head, HeadDiagnostic, HeadOptions, HeadRecovery};
pub use norms::{l1_norm, sup_norm_estimate, L1Norm, SupDomain, SupGrid, SupNormLower};
pub use tail::{abs_sum_upper, exp_tail, tail_bound};

pub(crate) use coeff::factorial;

/// Theta decay parameter `ρ`: rational, or the square root of a rational
/// (so that `ρ = 2^{-1/2}` stays exact).
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Rho {
    Rational(Rational),
    Sqrt(Rational),
}

impl Rho {
    /// `χ = ρ²`, always rational.
    pub fn chi(&self) -> Rational {
        match self {
            Rho::Rational(r) => Rational::from(r.square_ref()),
            Rho::Sqrt(r) => r.clone(),
        }
    }

    pub fn enclose(&self, prec: u32) -> Interval {
        match self {
            Rho::Rational(r) => Interval::from_rational(prec, r),
            Rho::Sqrt(r) => crate::num::rational_sqrt(prec, r).expect("positive"),
        }
    }

    /// `ρ^{e}` as an exact surd.
    pub fn pow(&self, e: u64) -> Surd {
        match self {
            Rho::Rational(r) => Surd::rational(CRational::real(rat_pow(r, e))),
            Rho::Sqrt(r) => {
                let half = rat_pow(r, e / 2);
                if e.is_multiple_of(2) {
                    Surd::rational(CRational::real(half))
                } else {
                    Surd::new(CRational::real(half), r.clone())
                }
            }
        }
    }

    fn normalized(self) -> Rho {
        match self {
            Rho::Sqrt(r) => match rational_sqrt_exact(&r) {
                Some(root) => Rho::Rational(root),
                None => Rho::Sqrt(r),
            },
            other => other,
        }
    }

    fn validate(&self) -> Result<()> {
        let chi = self.chi();
        if chi <= 0 || chi >= 1 {
            return Err(Error::InvalidArgument(format!("rho must lie in (0, 1), got {self}")));
        }
        Ok(())
    }
}

impl fmt::Display for Rho {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rho::Rational(r) => write!(f, "{r}"),
            Rho::Sqrt(r) => write!(f, "sqrt({r})"),
        }
    }
}

impl FromStr for Rho {
    type Err = Error;

    /// `"1/3"`, `"0.5"`, `"sqrt(1/2)"` or `"2^-1/2"`.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if let Some(inner) = t.strip_prefix("sqrt(").and_then(|r| r.strip_suffix(')')) {
            return Ok(Rho::Sqrt(crate::num::parse_rational(inner)?).normalized());
        }
        if let Some(rest) = t.strip_suffix("^-1/2") {
            let base = crate::num::parse_rational(rest)?;
            if base == 0 {
                return Err(Error::Parse(format!("bad rho {s:?}")));
            }
            return Ok(Rho::Sqrt(base.recip()).normalized());
        }
        Ok(Rho::Rational(crate::num::parse_rational(t)?))
    }
}

impl Serialize for Rho {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Rho {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Sign pattern `ε: ℕ → {±1}` for the Theta family.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignRule {
    AllPlus,
    Alternating,
    /// Periodic repetition of the listed signs.
    Explicit(Vec<i8>),
    /// Independent fair signs from a seeded ChaCha8 stream.
    Random(u64),
}

impl SignRule {
    pub fn sign(&self, n: usize) -> i8 {
        match self {
            SignRule::AllPlus => 1,
            SignRule::Alternating => {
                if n.is_multiple_of(2) {
                    1
                } else {
                    -1
                }
            }
            SignRule::Explicit(v) => {
                if v[n % v.len()] < 0 {
                    -1
                } else {
                    1
                }
            }
            SignRule::Random(seed) => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                rng.set_word_pos(n as u128);
                if rng.next_u32() & 1 == 0 {
                    1
                } else {
                    -1
                }
            }
        }
    }

    fn validate(&self) -> Result<()> {
        if let SignRule::Explicit(v) = self {
            if v.is_empty() || v.iter().any(|&s| s != 1 && s != -1) {
                return Err(Error::InvalidArgument(
                    "explicit signs must be a nonempty list of +1/-1".into(),
                ));
            }
        }
        Ok(())
    }
}

type CoeffFn = dyn Fn(usize) -> Option<Coeff> + Send + Sync;
type TailFn = dyn Fn(&Float, usize, u32) -> Option<Float> + Send + Sync;

/// Explicit head followed by a caller-supplied coefficient rule and an
/// optional proven tail majorant `(r, N, prec) ↦ bound on Σ_{n>N}|a_n|rⁿ`.
#[derive(Clone)]
pub struct UserTail {
    pub head: Vec<CRational>,
    pub rule: Arc<CoeffFn>,
    pub tail: Option<Arc<TailFn>>,
}

impl fmt::Debug for UserTail {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("UserTail")
            .field("head", &self.head)
            .field("tail", &self.tail.is_some())
            .finish()
    }
}

/// Coefficient rule of a series.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum Rule {
    Explicit {
        coeffs: Vec<CRational>,
    },
    /// `z^m·exp(−λz²)`.
    Gaussian {
        #[serde(with = "rational_str")]
        lambda: Rational,
        m: u32,
    },
    /// `p(z)·exp(−z^{2n})`.
    PolyGaussian {
        poly: Vec<CRational>,
        n: u32,
    },
    Sin,
    Cos,
    /// `sin(mz)/m`.
    SinScaled {
        m: u32,
    },
    /// `exp(−z^{2m})`.
    ExpNeg2m {
        m: u32,
    },
    /// `exp(−(z/2)^{2m})`.
    ExpNegHalf2m {
        m: u32,
    },
    /// `exp(−z²/m)`.
    ExpNegSqOverM {
        m: u32,
    },
    /// `Σ ε(n) ρ^{n²} zⁿ`.
    Theta {
        rho: Rho,
        signs: SignRule,
    },
    /// `exp(1 − e^z)`.
    ComplementaryBellEgf,
    Shifted {
        inner: SeriesSpec,
        k: usize,
    },
    Sum {
        left: SeriesSpec,
        right: SeriesSpec,
    },
    Scaled {
        inner: SeriesSpec,
        c: CRational,
    },
    Product {
        left: SeriesSpec,
        right: SeriesSpec,
    },
    /// `c + z·f(z)`.
    LeftExtended {
        inner: SeriesSpec,
        c: CRational,
    },
    #[serde(skip)]
    UserTail(UserTail),
}

impl Rule {
    fn validate(&self) -> Result<()> {
        let need_m = |m: u32, what: &str| {
            if m == 0 {
                Err(Error::InvalidArgument(format!("{what} requires m >= 1")))
            } else {
                Ok(())
            }
        };
        match self {
            Rule::Gaussian { lambda, .. } if *lambda <= 0 => {
                Err(Error::InvalidArgument("Gaussian requires lambda > 0".into()))
            }
            Rule::PolyGaussian { n, .. } => need_m(*n, "poly_gaussian (n)"),
            Rule::SinScaled { m } => need_m(*m, "sin_scaled"),
            Rule::ExpNeg2m { m } => need_m(*m, "exp_neg2m"),
            Rule::ExpNegHalf2m { m } => need_m(*m, "exp_neg_half2m"),
            Rule::ExpNegSqOverM { m } => need_m(*m, "exp_neg_sq_over_m"),
            Rule::Theta { rho, signs } => {
                rho.validate()?;
                signs.validate()
            }
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Rule::Explicit { .. } => "explicit",
            Rule::Gaussian { .. } => "gaussian",
            Rule::PolyGaussian { .. } => "poly_gaussian",
            Rule::Sin => "sin",
            Rule::Cos => "cos",
            Rule::SinScaled { .. } => "sin_scaled",
            Rule::ExpNeg2m { .. } => "exp_neg2m",
            Rule::ExpNegHalf2m { .. } => "exp_neg_half2m",
            Rule::ExpNegSqOverM { .. } => "exp_neg_sq_over_m",
            Rule::Theta { .. } => "theta",
            Rule::ComplementaryBellEgf => "complementary_bell_egf",
            Rule::Shifted { .. } => "shifted",
            Rule::Sum { .. } => "sum",
            Rule::Scaled { .. } => "scaled",
            Rule::Product { .. } => "product",
            Rule::LeftExtended { .. } => "left_extended",
            Rule::UserTail(_) => "user_tail",
        }
    }
}

struct Inner {
    rule: Rule,
    cache: RwLock<Vec<Coeff>>,
}

/// A power series `Σ a_n zⁿ` described by a [`Rule`].
///
/// Cheap to clone; coefficients are computed on demand and cached behind a
/// lock, so a spec can be shared across threads.
#[derive(Clone)]
pub struct SeriesSpec {
    inner: Arc<Inner>,
}

impl fmt::Debug for SeriesSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.inner.rule.fmt(f)
    }
}

impl PartialEq for SeriesSpec {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner) || self.to_json() == other.to_json()
    }
}

impl Serialize for SeriesSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.inner.rule.serialize(s)
    }
}

impl<'de> Deserialize<'de> for SeriesSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rule = Rule::deserialize(d)?;
        SeriesSpec::new(rule).map_err(serde::de::Error::custom)
    }
}

impl SeriesSpec {
    pub fn new(rule: Rule) -> Result<Self> {
        rule.validate()?;
        Ok(Self::from_rule(rule))
    }

    fn from_rule(rule: Rule) -> Self {
        SeriesSpec {
            inner: Arc::new(Inner {
                rule,
                cache: RwLock::new(Vec::new()),
            }),
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Parse(format!("series spec: {e}")))
    }

    /// Canonical JSON (empty for user callbacks, which do not serialize).
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).unwrap_or_default()
    }

    pub fn rule(&self) -> &Rule {
        &self.inner.rule
    }

    pub fn explicit<I: IntoIterator<Item = CRational>>(coeffs: I) -> Self {
        Self::from_rule(Rule::Explicit {
            coeffs: coeffs.into_iter().collect(),
        })
    }

    pub fn explicit_i64(coeffs: &[i64]) -> Self {
        Self::explicit(coeffs.iter().map(|&v| CRational::from_i64(v)))
    }

    pub fn constant(c: CRational) -> Self {
        Self::explicit([c])
    }

    pub fn gaussian(lambda: Rational, m: u32) -> Result<Self> {
        Self::new(Rule::Gaussian { lambda, m })
    }

    pub fn poly_gaussian(poly: Vec<CRational>, n: u32) -> Result<Self> {
        Self::new(Rule::PolyGaussian { poly, n })
    }

    pub fn sin() -> Self {
        Self::from_rule(Rule::Sin)
    }

    pub fn cos() -> Self {
        Self::from_rule(Rule::Cos)
    }

    pub fn sin_scaled(m: u32) -> Result<Self> {
        Self::new(Rule::SinScaled { m })
    }

    pub fn exp_neg_2m(m: u32) -> Result<Self> {
        Self::new(Rule::ExpNeg2m { m })
    }

    pub fn exp_neg_half_2m(m: u32) -> Result<Self> {
        Self::new(Rule::ExpNegHalf2m { m })
    }

    pub fn exp_neg_sq_over_m(m: u32) -> Result<Self> {
        Self::new(Rule::ExpNegSqOverM { m })
    }

    pub fn theta(rho: Rho, signs: SignRule) -> Result<Self> {
        Self::new(Rule::Theta {
            rho: rho.normalized(),
            signs,
        })
    }

    pub fn complementary_bell_egf() -> Self {
        Self::from_rule(Rule::ComplementaryBellEgf)
    }

    pub fn user_tail(tail: UserTail) -> Self {
        Self::from_rule(Rule::UserTail(tail))
    }

    /// Backward shift `σ^k`: `coeff(result, n) = coeff(self, n + k)`.
    pub fn shift(&self, k: usize) -> Self {
        if k == 0 {
            return self.clone();
        }
        match self.rule() {
            Rule::Shifted { inner, k: j } => Self::from_rule(Rule::Shifted {
                inner: inner.clone(),
                k: j + k,
            }),
            Rule::Explicit { coeffs } => {
                Self::explicit(coeffs.iter().skip(k).cloned().collect::<Vec<_>>())
            }
            _ => Self::from_rule(Rule::Shifted {
                inner: self.clone(),
                k,
            }),
        }
    }

    /// `c + z·f(z)`; the one-parameter right inverse of `σ`.
    pub fn left_extend(&self, c: CRational) -> Self {
        Self::from_rule(Rule::LeftExtended {
            inner: self.clone(),
            c,
        })
    }

    pub fn add(&self, other: &SeriesSpec) -> Self {
        Self::from_rule(Rule::Sum {
            left: self.clone(),
            right: other.clone(),
        })
    }

    pub fn scale(&self, c: CRational) -> Self {
        Self::from_rule(Rule::Scaled {
            inner: self.clone(),
            c,
        })
    }

    pub fn sub(&self, other: &SeriesSpec) -> Self {
        self.add(&other.scale(CRational::from_i64(-1)))
    }

    pub fn cauchy_product(&self, other: &SeriesSpec) -> Self {
        Self::from_rule(Rule::Product {
            left: self.clone(),
            right: other.clone(),
        })
    }

    /// Degree bound when the series is a polynomial by construction.
    pub fn polynomial_len(&self) -> Option<usize> {
        match self.rule() {
            Rule::Explicit { coeffs } => Some(coeffs.len()),
            Rule::Shifted { inner, k } => inner.polynomial_len().map(|l| l.saturating_sub(*k)),
            Rule::Sum { left, right } | Rule::Product { left, right } => {
                let (a, b) = (left.polynomial_len()?, right.polynomial_len()?);
                Some(match self.rule() {
                    Rule::Sum { .. } => a.max(b),
                    _ => (a + b).saturating_sub(1),
                })
            }
            Rule::Scaled { inner, .. } => inner.polynomial_len(),
            Rule::LeftExtended { inner, .. } => inner.polynomial_len().map(|l| l + 1),
            _ => None,
        }
    }

    /// `(N, χ)` when the rule satisfies `|a_{n+1}a_{n−1}| ≤ χ|a_n|²` for all
    /// `n ≥ N` by construction.
    pub fn structural_turan(&self) -> Option<(usize, Rational)> {
        match self.rule() {
            Rule::Theta { rho, .. } => Some((1, rho.chi())),
            // σ^k preserves the inequality at every n ≥ 1 when N = 1.
            Rule::Shifted { inner, .. } => inner.structural_turan().filter(|(n, _)| *n <= 1),
            Rule::Scaled { inner, c } if !c.is_zero() => inner.structural_turan(),
            _ => None,
        }
    }

    /// Whether every coefficient is real by construction.
    pub fn is_real(&self) -> bool {
        match self.rule() {
            Rule::Explicit { coeffs } => coeffs.iter().all(CRational::is_real),
            Rule::PolyGaussian { poly, .. } => poly.iter().all(CRational::is_real),
            Rule::Shifted { inner, .. } => inner.is_real(),
            Rule::Sum { left, right } | Rule::Product { left, right } => {
                left.is_real() && right.is_real()
            }
            Rule::Scaled { inner, c } | Rule::LeftExtended { inner, c } => {
                c.is_real() && inner.is_real()
            }
            Rule::UserTail(_) => false,
            _ => true,
        }
    }

    /// Exact (or enclosed) coefficient `a_n`.
    pub fn coeff(&self, n: usize) -> Result<Coeff> {
        if let Rule::UserTail(u) = self.rule() {
            return user_coeff(u, n);
        }
        {
            let cache = self.inner.cache.read().expect("coefficient cache poisoned");
            if let Some(c) = cache.get(n) {
                return Ok(c.clone());
            }
        }
        let mut cache = self.inner.cache.write().expect("coefficient cache poisoned");
        let start = cache.len();
        if n >= start {
            let end = (n + 1).max(start * 2).max(16);
            let fresh = self.generate(start, end)?;
            cache.extend(fresh);
        }
        Ok(cache[n].clone())
    }

    /// Coefficients `a_from .. a_to` (exclusive).
    pub fn coeffs(&self, from: usize, to: usize) -> Result<Vec<Coeff>> {
        if to > from {
            self.coeff(to - 1)?;
        }
        (from..to).map(|n| self.coeff(n)).collect()
    }

    fn generate(&self, from: usize, to: usize) -> Result<Vec<Coeff>> {
        const PREC: u32 = 256;
        let out = match self.rule() {
            Rule::Explicit { coeffs } => (from..to)
                .map(|n| coeffs.get(n).cloned().map_or_else(Coeff::zero, Coeff::rational))
                .collect(),
            Rule::Gaussian { lambda, m } => {
                let neg = Rational::from(-lambda);
                exp_family(from, to, *m as usize, 2, |k| rat_pow(&neg, k as u64))
            }
            Rule::PolyGaussian { poly, n } => {
                let step = 2 * *n as usize;
                let base = exp_family(0, to, 0, step, |k| {
                    Rational::from(if k % 2 == 0 { 1 } else { -1 })
                });
                (from..to)
                    .map(|j| {
                        let mut acc = CRational::zero();
                        for (i, p) in poly.iter().enumerate().take(j + 1) {
                            if let Some(e) = base[j - i].as_rational() {
                                acc = acc.add(&p.mul(&e));
                            }
                        }
                        Coeff::rational(acc)
                    })
                    .collect()
            }
            Rule::Sin => sin_family(from, to, 1, true),
            Rule::Cos => sin_family(from, to, 1, false),
            Rule::SinScaled { m } => sin_family(from, to, *m, true),
            Rule::ExpNeg2m { m } => exp_family(from, to, 0, 2 * *m as usize, |k| {
                Rational::from(if k % 2 == 0 { 1 } else { -1 })
            }),
            Rule::ExpNegHalf2m { m } => {
                let base = Rational::from((-1, Integer::from(Integer::u_pow_u(4, *m))));
                exp_family(from, to, 0, 2 * *m as usize, |k| rat_pow(&base, k as u64))
            }
            Rule::ExpNegSqOverM { m } => {
                let base = Rational::from((-1, *m));
                exp_family(from, to, 0, 2, |k| rat_pow(&base, k as u64))
            }
            Rule::Theta { rho, signs } => (from..to)
                .map(|n| {
                    let mut s = rho.pow((n as u64) * (n as u64));
                    if signs.sign(n) < 0 {
                        s.scale = s.scale.neg();
                    }
                    Coeff::surd(s)
                })
                .collect(),
            Rule::ComplementaryBellEgf => {
                let b = crate::bell::complementary_bell(to.saturating_sub(1));
                (from..to)
                    .map(|n| {
                        Coeff::real(Rational::from((b.values[n].clone(), factorial(n as u32))))
                    })
                    .collect()
            }
            Rule::Shifted { inner, k } => inner.coeffs(from + k, to + k)?,
            Rule::Sum { left, right } => {
                let a = left.coeffs(from, to)?;
                let b = right.coeffs(from, to)?;
                a.iter().zip(&b).map(|(x, y)| x.add(y, PREC)).collect()
            }
            Rule::Scaled { inner, c } => inner
                .coeffs(from, to)?
                .iter()
                .map(|x| x.scale(c, PREC))
                .collect(),
            Rule::Product { left, right } => {
                let a = left.coeffs(0, to)?;
                let b = right.coeffs(0, to)?;
                let nz_a: Vec<usize> = (0..to).filter(|&i| a[i].is_zero() != Some(true)).collect();
                (from..to)
                    .map(|n| {
                        let mut acc = Coeff::zero();
                        for &i in nz_a.iter().take_while(|&&i| i <= n) {
                            if b[n - i].is_zero() == Some(true) {
                                continue;
                            }
                            acc = acc.add(&a[i].mul(&b[n - i], PREC), PREC);
                        }
                        acc
                    })
                    .collect()
            }
            Rule::LeftExtended { inner, c } => {
                let mut out = Vec::with_capacity(to - from);
                let mut start = from;
                if from == 0 {
                    out.push(Coeff::rational(c.clone()));
                    start = 1;
                }
                if to > start {
                    out.extend(inner.coeffs(start - 1, to - 1)?);
                }
                out
            }
            Rule::UserTail(u) => (from..to).map(|n| user_coeff(u, n)).collect::<Result<_>>()?,
        };
        Ok(out)
    }
}

fn user_coeff(u: &UserTail, n: usize) -> Result<Coeff> {
    if let Some(q) = u.head.get(n) {
        return Ok(Coeff::rational(q.clone()));
    }
    (u.rule)(n).ok_or(Error::UndefinedCoefficient(n))
}

pub(crate) fn rat_pow(r: &Rational, e: u64) -> Rational {
    let e = u32::try_from(e).expect("exponent fits in u32");
    let num = Integer::from(r.numer().pow(e));
    let den = Integer::from(r.denom().pow(e));
    Rational::from((num, den))
}

/// Coefficients of `z^offset · Σ_k w(k)/k! · z^{step·k}`.
fn exp_family(
    from: usize,
    to: usize,
    offset: usize,
    step: usize,
    w: impl Fn(usize) -> Rational,
) -> Vec<Coeff> {
    (from..to)
        .map(|n| {
            if n < offset || !(n - offset).is_multiple_of(step) {
                return Coeff::zero();
            }
            let k = (n - offset) / step;
            Coeff::real(w(k) / factorial(k as u32))
        })
        .collect()
}

/// Coefficients of `sin(mz)/m` (odd) or `cos(mz)` (even, m = 1).
fn sin_family(from: usize, to: usize, m: u32, odd: bool) -> Vec<Coeff> {
    let mm = Integer::from(m);
    (from..to)
        .map(|n| {
            if (n % 2 == 1) != odd {
                return Coeff::zero();
            }
            let sign = if (n / 2) % 2 == 0 { 1 } else { -1 };
            let pow = if odd { n as u32 - 1 } else { n as u32 };
            let num = Integer::from((&mm).pow(pow)) * sign;
            Coeff::real(Rational::from((num, factorial(n as u32))))
        })
        .collect()
}
