//! Turán profiles, the constants `ϑ(χ)`, `ψ(χ)`, sign runs, the term
//! envelope and the threshold solvers.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use rug::{Float, Rational};

use crate::error::{Error, Result};
use crate::num::{fmt_float, rational_sqrt_exact, Interval};
use crate::series::{tail_bound, Coeff, SeriesSpec, Sign};

// ---------------------------------------------------------------------------
// Turán profile

/// Windowed Turán constant `χ = max |a_{n+1}a_{n−1}|/|a_n|²`.
#[derive(Clone, Debug)]
pub struct TuranProfile {
    pub start: usize,
    pub window_end: usize,
    /// Exact `χ²` when every coefficient in the window is exact.
    pub chi_sq: Option<Rational>,
    /// Exact `χ` when `χ²` is a rational square.
    pub chi_exact: Option<Rational>,
    /// Enclosure of `χ`.
    pub chi: Interval,
    /// Index attaining the maximum.
    pub attained_at: usize,
    /// Indices `n` with `a_{n−1} = 0` (ratio undefined, skipped).
    pub zero_indices: Vec<usize>,
    /// Indices with `a_{n−1} ≠ 0 = a_n` but `a_{n+1} ≠ 0`: no finite `χ`
    /// satisfies the inequality there.
    pub unbounded_at: Vec<usize>,
}

impl TuranProfile {
    /// True when a finite `χ` covers the whole window.
    pub fn is_finite(&self) -> bool {
        self.unbounded_at.is_empty()
    }
}

pub fn estimate_chi(s: &SeriesSpec, start: usize, end: usize, prec: u32) -> Result<TuranProfile> {
    if end <= start {
        return Err(Error::InvalidArgument("window needs M > N".into()));
    }
    let start = start.max(1);
    let coeffs = s.coeffs(start - 1, end + 2)?;
    let a = |n: usize| -> &Coeff { &coeffs[n + 1 - start] };
    let mut zero_indices = Vec::new();
    let mut unbounded_at = Vec::new();
    let mut best_exact: Option<(Rational, usize)> = None;
    let mut best_enc: Option<(Interval, usize)> = None;
    let mut all_exact = true;
    for n in start..=end {
        let (prev, cur, next) = (a(n - 1), a(n), a(n + 1));
        if prev.is_zero() == Some(true) {
            zero_indices.push(n);
            continue;
        }
        if cur.is_zero() == Some(true) {
            if next.is_zero() != Some(true) {
                unbounded_at.push(n);
            } else {
                zero_indices.push(n);
            }
            continue;
        }
        match (prev.abs_sq(), cur.abs_sq(), next.abs_sq()) {
            (Some(p), Some(c), Some(x)) => {
                // ratio² = |a_{n+1}|²|a_{n−1}|² / |a_n|⁴
                let r2 = Rational::from(&x * &p) / Rational::from(c.square_ref());
                if best_exact.as_ref().is_none_or(|(b, _)| r2 > *b) {
                    best_exact = Some((r2, n));
                }
            }
            _ => {
                all_exact = false;
                let num = next.enclose(prec).abs().mul(&prev.enclose(prec).abs());
                let den = cur.enclose(prec).abs().sqr();
                let r = num.div(&den)?;
                if best_enc.as_ref().is_none_or(|(b, _)| r.hi() > b.hi()) {
                    best_enc = Some((r, n));
                }
            }
        }
    }
    let exact_enc = best_exact.as_ref().map(|(r2, n)| {
        let chi = crate::num::rational_sqrt(prec, r2).expect("nonnegative");
        (chi, *n)
    });
    let (chi, attained_at) = match (exact_enc, best_enc) {
        (Some(e), Some(f)) => {
            if f.0.hi() > e.0.hi() {
                f
            } else {
                e
            }
        }
        (Some(e), None) => e,
        (None, Some(f)) => f,
        (None, None) => {
            if unbounded_at.is_empty() {
                return Err(Error::DegenerateWindow { start, end });
            }
            (Interval::point(Float::with_val(prec, f64::INFINITY)), unbounded_at[0])
        }
    };
    let chi_sq = if all_exact {
        best_exact.map(|(r2, _)| r2)
    } else {
        None
    };
    let chi_exact = chi_sq.as_ref().and_then(rational_sqrt_exact);
    Ok(TuranProfile {
        start,
        window_end: end,
        chi_sq,
        chi_exact,
        chi,
        attained_at,
        zero_indices,
        unbounded_at,
    })
}

// ---------------------------------------------------------------------------
// ϑ and ψ

/// `ϑ(χ)`, `ψ(χ)` and the sums `Θ`, `Ψ`.
#[derive(Clone, Debug)]
pub struct ThetaPsi {
    pub chi: Interval,
    /// `None` means `ϑ = ∞`.
    pub theta: Option<u64>,
    pub psi: u64,
    /// `Θ = Σ_{1≤k≤ϑ} χ^{k²/2}`.
    pub theta_sum: Interval,
    /// `Ψ = Σ_{k>ψ} χ^{k²/2}`.
    pub psi_sum: Interval,
    pub precision: u32,
}

/// Partial sums of `Σ_{k≥1} χ^{k²/2}` with a certified tail majorant.
pub struct KernelSums {
    sqrt_chi: Interval,
    chi_hi: Float,
    partial: Vec<Interval>,
    prec: u32,
}

impl KernelSums {
    pub fn new(chi: &Interval, prec: u32) -> Result<Self> {
        if !(chi.lo() > &0 && chi.hi() < &1) {
            return Err(Error::InvalidArgument(format!("chi must lie in (0, 1), got {chi}")));
        }
        let wp = prec + 32;
        let chi = Interval::new(Float::with_val(wp, chi.lo()), Float::with_val(wp, chi.hi()));
        Ok(KernelSums {
            sqrt_chi: chi.sqrt()?,
            chi_hi: chi.hi().clone(),
            partial: vec![Interval::zero(wp)],
            prec: wp,
        })
    }

    pub fn from_rational(chi: &Rational, prec: u32) -> Result<Self> {
        Self::new(&Interval::from_rational(prec + 32, chi), prec)
    }

    /// `χ^{k²/2}`.
    pub fn term(&self, k: u64) -> Interval {
        self.sqrt_chi.pow_u((k * k) as u32)
    }

    /// `S_L = Σ_{1≤k≤L} χ^{k²/2}`.
    pub fn partial(&mut self, l: u64) -> Interval {
        while (self.partial.len() as u64) <= l {
            let k = self.partial.len() as u64;
            let next = self.partial[k as usize - 1].add(&self.term(k));
            self.partial.push(next);
        }
        self.partial[l as usize].clone()
    }

    /// Majorant `Σ_{k>K} χ^{k²/2} ≤ χ^{(K+1)²/2}/(1 − χ^{K+3/2})`.
    pub fn tail(&self, k: u64) -> Float {
        let wp = self.prec;
        let c = Interval::point(self.chi_hi.clone());
        let num = self.sqrt_chi.pow_u(((k + 1) * (k + 1)) as u32);
        // χ^{K+3/2} = χ^{K+1}·√χ
        let r = c.pow_u((k + 1) as u32).mul(&self.sqrt_chi);
        let den = Interval::from_i64(wp, 1).sub(&r);
        num.div(&den).expect("chi < 1").hi().clone()
    }

    /// Enclosure of the full sum `Σ_{k≥1} χ^{k²/2}`, truncated where the
    /// majorant drops below `2^{−prec}`.
    pub fn total(&mut self) -> Interval {
        let target = Float::with_val(self.prec, 1) >> (self.prec - 32);
        let mut k = 1u64;
        while self.tail(k) > target && k < 1 << 20 {
            k += 1;
        }
        let s = self.partial(k);
        let hi = Float::with_val_round(self.prec, s.hi() + &self.tail(k), rug::float::Round::Up).0;
        Interval::new(s.lo().clone(), hi)
    }

    /// Truncation index where the tail drops below `2^{−prec/2}`.
    fn settle_index(&self) -> u64 {
        let target = Float::with_val(self.prec, 1) >> ((self.prec - 32) / 2);
        let mut k = 1u64;
        while self.tail(k) > target && k < 1 << 20 {
            k += 1;
        }
        k
    }
}

fn undecidable(what: impl Into<String>, prec: u32) -> Error {
    Error::Undecidable {
        what: what.into(),
        precision: prec,
    }
}

/// Decide `S_L < 1` (equivalently `ϑ(χ) ≥ L`).
pub fn theta_at_least(k: &mut KernelSums, l: u64, prec: u32) -> Result<bool> {
    let s = k.partial(l);
    let one = Float::with_val(prec, 1);
    if s.certainly_lt_f(&one) {
        Ok(true)
    } else if s.certainly_ge_f(&one) {
        Ok(false)
    } else {
        Err(undecidable(format!("S_{l} is within rounding of 1"), prec))
    }
}

/// Decide `Σ_{k>L} χ^{k²/2} < 1/2` (equivalently `ψ(χ) ≤ L`).
pub fn psi_at_most(k: &mut KernelSums, l: u64, prec: u32) -> Result<bool> {
    let total = k.total();
    let t = total.sub(&k.partial(l));
    let half = Float::with_val(prec, 0.5);
    if t.certainly_lt_f(&half) {
        Ok(true)
    } else if t.certainly_ge_f(&half) {
        Ok(false)
    } else {
        Err(undecidable(format!("tail beyond {l} is within rounding of 1/2"), prec))
    }
}

/// `ϑ(χ)`, `None` for `∞`.
pub fn theta_of(k: &mut KernelSums, prec: u32) -> Result<Option<u64>> {
    let one = Float::with_val(prec, 1);
    let settle = k.settle_index();
    let mut l = 1u64;
    loop {
        let s = k.partial(l);
        if s.certainly_ge_f(&one) {
            return Ok(Some(l - 1));
        }
        if !s.certainly_lt_f(&one) {
            return Err(undecidable(format!("S_{l} is within rounding of 1"), prec));
        }
        let upper = Float::with_val_round(prec + 32, s.hi() + &k.tail(l), rug::float::Round::Up).0;
        if upper < one {
            return Ok(None);
        }
        if l >= settle {
            return Err(undecidable("total sum is within 2^(-prec/2) of 1", prec));
        }
        l += 1;
    }
}

/// `ψ(χ)`.
pub fn psi_of(k: &mut KernelSums, prec: u32) -> Result<u64> {
    let mut l = 0u64;
    loop {
        if psi_at_most(k, l, prec)? {
            return Ok(l);
        }
        l += 1;
        if l > 1 << 16 {
            return Err(undecidable("psi search did not terminate", prec));
        }
    }
}

pub fn theta_psi(chi: &Interval, prec: u32) -> Result<ThetaPsi> {
    let mut k = KernelSums::new(chi, prec)?;
    let theta = theta_of(&mut k, prec)?;
    let psi = psi_of(&mut k, prec)?;
    let theta_sum = match theta {
        Some(t) => k.partial(t),
        None => k.total(),
    };
    let psi_sum = k.total().sub(&k.partial(psi));
    Ok(ThetaPsi {
        chi: chi.clone(),
        theta,
        psi,
        theta_sum,
        psi_sum,
        precision: prec,
    })
}

pub fn theta_psi_rational(chi: &Rational, prec: u32) -> Result<ThetaPsi> {
    theta_psi(&Interval::from_rational(prec + 32, chi), prec)
}

/// Certified steps showing `ϑ(χ) ≥ 2` and `ψ(χ) ≤ 1` for `0 < χ ≤ 1/2`
/// without computing either constant:
///
/// * `χ^{1/2} + χ² ≤ 2^{−1/2} + 2^{−2} ≤ 1`;
/// * with `S = Σ_{k>1} χ^{k²/2}`: `S < χ²(1 + χ + S) ≤ ¼(3/2 + S)`,
///   hence `S < 1/2`.
#[derive(Clone, Debug)]
pub struct HalfBoundChain {
    pub chi: Rational,
    pub first_two: Interval,
    pub first_two_at_half: Interval,
    pub s: Interval,
    pub majorant: Interval,
    pub quarter_bound: Interval,
    pub first_two_le_half_case: bool,
    pub half_case_le_one: bool,
    pub s_below_majorant: bool,
    pub majorant_le_quarter: bool,
    pub s_below_half: bool,
}

impl HalfBoundChain {
    pub fn holds(&self) -> bool {
        self.first_two_le_half_case
            && self.half_case_le_one
            && self.s_below_majorant
            && self.majorant_le_quarter
            && self.s_below_half
    }
}

pub fn half_bound_chain(chi: &Rational, prec: u32) -> Result<HalfBoundChain> {
    if *chi <= 0 || *chi > Rational::from((1, 2)) {
        return Err(Error::InvalidArgument(format!("chain needs 0 < chi <= 1/2, got {chi}")));
    }
    let le = |a: &Interval, b: &Interval| a.hi() <= b.lo();
    let half_q = Rational::from((1, 2));
    let quarter_q = Rational::from((1, 4));
    let wp = prec + 32;
    let mut k = KernelSums::from_rational(chi, prec)?;
    let c = Interval::from_rational(wp, chi);
    let one = Interval::from_i64(wp, 1);
    let first_two = k.partial(2);
    let half = KernelSums::from_rational(&half_q, prec)?.partial(2);
    let s = k.total().sub(&k.term(1));
    let majorant = c.sqr().mul(&one.add(&c).add(&s));
    let quarter_bound = Interval::from_rational(wp, &Rational::from((3, 2)))
        .add(&s)
        .mul_2exp(-2);
    Ok(HalfBoundChain {
        chi: chi.clone(),
        // Both steps are termwise monotone in χ; at χ = 1/2 they are equalities,
        // so they are decided on the exact rationals.
        first_two_le_half_case: *chi <= half_q || le(&first_two, &half),
        half_case_le_one: le(&half, &one),
        s_below_majorant: s.certainly_lt(&majorant),
        majorant_le_quarter: (Rational::from(chi.square_ref()) <= quarter_q
            && Rational::from(chi + 1u32) <= (3, 2))
            || le(&majorant, &quarter_bound),
        s_below_half: s.certainly_lt(&one.mul_2exp(-1)),
        first_two,
        first_two_at_half: half,
        s,
        majorant,
        quarter_bound,
    })
}

// ---------------------------------------------------------------------------
// Threshold solver

/// Named predicates over `χ`, each true below its threshold.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Predicate {
    /// `ψ(χ) = 0`, i.e. `Σ_{k≥1} χ^{k²/2} < 1/2`.
    PsiEq0,
    /// `ϑ(χ) ≥ 2` and `ψ(χ) ≤ 1`.
    ThetaGe2AndPsiLe1,
    /// `ϑ(χ) ≥ 2ψ(χ)`.
    ThetaGe2Psi,
    /// `ϑ(χ) ≥ 2` alone (audit).
    ThetaGe2,
    /// `ψ(χ) ≤ 1` alone (audit).
    PsiLe1,
}

impl Predicate {
    pub const ALL: [Predicate; 5] = [
        Predicate::PsiEq0,
        Predicate::ThetaGe2AndPsiLe1,
        Predicate::ThetaGe2Psi,
        Predicate::ThetaGe2,
        Predicate::PsiLe1,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Predicate::PsiEq0 => "psi_eq_0",
            Predicate::ThetaGe2AndPsiLe1 => "theta_ge_2_and_psi_le_1",
            Predicate::ThetaGe2Psi => "theta_ge_2psi",
            Predicate::ThetaGe2 => "theta_ge_2",
            Predicate::PsiLe1 => "psi_le_1",
        }
    }

    /// Decide the predicate at `χ`, touching only the sums it needs.
    pub fn eval(self, chi: &Rational, prec: u32) -> Result<bool> {
        let mut k = KernelSums::from_rational(chi, prec)?;
        match self {
            Predicate::PsiEq0 => psi_at_most(&mut k, 0, prec),
            Predicate::ThetaGe2AndPsiLe1 => {
                Ok(theta_at_least(&mut k, 2, prec)? && psi_at_most(&mut k, 1, prec)?)
            }
            Predicate::ThetaGe2Psi => {
                let psi = psi_of(&mut k, prec)?;
                theta_at_least(&mut k, 2 * psi, prec)
            }
            Predicate::ThetaGe2 => theta_at_least(&mut k, 2, prec),
            Predicate::PsiLe1 => psi_at_most(&mut k, 1, prec),
        }
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Predicate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Predicate::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| {
                Error::Parse(format!(
                    "unknown predicate {s:?}; expected one of {}",
                    Predicate::ALL.map(|p| p.name()).join(", ")
                ))
            })
    }
}

#[derive(Clone, Debug)]
pub struct ThresholdResult {
    pub predicate: Predicate,
    /// Midpoint of the final bracket.
    pub chi_star: Rational,
    /// Predicate holds at `lo` and fails at `hi`.
    pub lo: Rational,
    pub hi: Rational,
    pub tolerance: Rational,
    pub iterations: usize,
    pub precision: u32,
}

impl ThresholdResult {
    pub fn chi_star_f64(&self) -> f64 {
        self.chi_star.to_f64()
    }

    pub fn chi_star_decimal(&self, digits: usize) -> String {
        fmt_float(&Float::with_val(128, &self.chi_star), digits)
    }
}

/// Number of monotonicity samples taken across the bracket.
pub const MONOTONE_SAMPLES: usize = 17;

/// Bisection for the switch point of a predicate that holds below it.
pub fn threshold_solve(
    predicate: Predicate,
    lo: &Rational,
    hi: &Rational,
    tol: &Rational,
    prec: u32,
) -> Result<ThresholdResult> {
    if lo >= hi || *tol <= 0 {
        return Err(Error::InvalidArgument("need lo < hi and tol > 0".into()));
    }
    // Monotonicity by sampling (endpoints included), evaluated in parallel.
    let width = Rational::from(hi - lo);
    let points: Vec<Rational> = (0..MONOTONE_SAMPLES)
        .map(|i| lo + (&width * Rational::from((i as i64, (MONOTONE_SAMPLES - 1) as i64))))
        .collect();
    let values: Vec<Result<bool>> = points
        .par_iter()
        .map(|c| predicate.eval(c, prec))
        .collect();
    let mut decided = Vec::with_capacity(values.len());
    for (c, v) in points.iter().zip(values) {
        match v {
            Ok(b) => decided.push((c.clone(), b)),
            Err(e) if e.is_inconclusive() => continue,
            Err(e) => return Err(e),
        }
    }
    if let Some(first_false) = decided.iter().position(|(_, b)| !b) {
        if let Some((c, _)) = decided[first_false..].iter().find(|(_, b)| *b) {
            return Err(Error::NonMonotone {
                predicate: predicate.name().into(),
                holds_at: c.to_string(),
                fails_at: decided[first_false].0.to_string(),
            });
        }
    }
    let lo_ok = predicate.eval(lo, prec)?;
    let hi_ok = predicate.eval(hi, prec)?;
    if !lo_ok || hi_ok {
        return Err(Error::InvalidArgument(format!(
            "{predicate} must hold at lo and fail at hi (got {lo_ok} at {lo}, {hi_ok} at {hi})"
        )));
    }
    let (mut a, mut b) = (lo.clone(), hi.clone());
    let mut iterations = 0;
    while Rational::from(&b - &a) > *tol {
        let mid = Rational::from(&a + &b) / 2u32;
        if predicate.eval(&mid, prec)? {
            a = mid;
        } else {
            b = mid;
        }
        iterations += 1;
    }
    Ok(ThresholdResult {
        predicate,
        chi_star: Rational::from(&a + &b) / 2u32,
        lo: a,
        hi: b,
        tolerance: tol.clone(),
        iterations,
        precision: prec,
    })
}

/// A threshold recomputed at four times the precision, compared against
/// an externally reported value.
#[derive(Clone, Debug)]
pub struct AuditRow {
    pub result: ThresholdResult,
    pub oracle: ThresholdResult,
    /// The two final brackets overlap.
    pub consistent: bool,
    pub reported: Rational,
    /// `|χ* − reported| ≤ tol` (both brackets included).
    pub matches_reported: bool,
}

pub fn threshold_audit(
    predicates: &[Predicate],
    lo: &Rational,
    hi: &Rational,
    tol: &Rational,
    reported: &Rational,
    prec: u32,
) -> Result<Vec<AuditRow>> {
    predicates
        .par_iter()
        .map(|&p| {
            let result = threshold_solve(p, lo, hi, tol, prec)?;
            let oracle = threshold_solve(p, lo, hi, tol, 4 * prec)?;
            let consistent = result.lo <= oracle.hi && oracle.lo <= result.hi;
            let near = |r: &ThresholdResult| {
                Rational::from(reported - &r.hi) <= *tol && Rational::from(&r.lo - reported) <= *tol
            };
            let matches_reported = near(&result);
            Ok(AuditRow {
                result,
                oracle,
                consistent,
                reported: reported.clone(),
                matches_reported,
            })
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Sign runs

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Run {
    pub start: usize,
    pub length: usize,
    pub sign: Sign,
}

#[derive(Clone, Debug)]
pub struct SignRunProfile {
    pub start: usize,
    /// Inclusive end of the examined range.
    pub end: usize,
    pub runs: Vec<Run>,
    /// The series continues beyond `end`; `L(n)` only sees the computed range.
    pub range_truncated: bool,
}

impl SignRunProfile {
    /// Longest same-sign (nonzero) run within `[n, end]`; zeros end runs.
    pub fn l_of(&self, n: usize) -> usize {
        self.runs
            .iter()
            .filter(|r| r.sign != Sign::Zero && r.start + r.length > n)
            .map(|r| r.start + r.length - r.start.max(n))
            .max()
            .unwrap_or(0)
    }

    pub fn max_run(&self) -> usize {
        self.l_of(self.start)
    }

    /// Sign at index `n`, if in range.
    pub fn sign_at(&self, n: usize) -> Option<Sign> {
        self.runs
            .iter()
            .find(|r| r.start <= n && n < r.start + r.length)
            .map(|r| r.sign)
    }
}

pub fn runs_from_signs(start: usize, signs: &[Sign], truncated: bool) -> SignRunProfile {
    let mut runs: Vec<Run> = Vec::new();
    for (i, &s) in signs.iter().enumerate() {
        match runs.last_mut() {
            Some(r) if r.sign == s => r.length += 1,
            _ => runs.push(Run {
                start: start + i,
                length: 1,
                sign: s,
            }),
        }
    }
    SignRunProfile {
        start,
        end: (start + signs.len()).saturating_sub(1),
        runs,
        range_truncated: truncated,
    }
}

pub fn sign_runs(s: &SeriesSpec, start: usize, end: usize) -> Result<SignRunProfile> {
    if end < start {
        return Err(Error::InvalidArgument("sign run range is empty".into()));
    }
    let mut signs = Vec::with_capacity(end - start + 1);
    for (i, c) in s.coeffs(start, end + 1)?.iter().enumerate() {
        match c.sign() {
            Some(sg) => signs.push(sg),
            None if !c.is_real() => return Err(Error::ComplexCoefficient(start + i)),
            None => {
                return Err(Error::Undecidable {
                    what: format!("sign of coefficient {}", start + i),
                    precision: 2048,
                })
            }
        }
    }
    let truncated = s.polynomial_len().is_none_or(|l| l > end + 1);
    Ok(runs_from_signs(start, &signs, truncated))
}

// ---------------------------------------------------------------------------
// Term envelope

#[derive(Clone, Debug)]
pub struct ScanParams {
    pub horizon: usize,
    /// Consecutive indices without a new maximum before stopping.
    pub window: usize,
}

impl Default for ScanParams {
    fn default() -> Self {
        ScanParams {
            horizon: 100_000,
            window: 8,
        }
    }
}

#[derive(Clone, Debug)]
pub struct EnvelopeMax {
    /// Minimum index attaining `max_n |a_n xⁿ|`.
    pub m: usize,
    pub max_term: Interval,
    pub scanned: usize,
    /// The remaining tail was not certified below the maximum.
    pub horizon_limited: bool,
}

/// `argmax_n |a_n xⁿ|` with minimum-index tie-breaking.
pub fn envelope_argmax(
    s: &SeriesSpec,
    x: &Float,
    scan: &ScanParams,
    prec: u32,
) -> Result<EnvelopeMax> {
    let ax = Float::with_val(x.prec(), x.abs_ref());
    let ln_x = if ax.is_zero() { f64::NEG_INFINITY } else { ax.to_f64().ln() };
    let x_sq = ax.to_rational().map(|q| Rational::from(q.square_ref()));
    let xi = Interval::point(Float::with_val(prec.max(ax.prec()), &ax));
    let term_enc = |c: &Coeff, n: usize| -> Interval {
        c.enclose(prec).abs().mul(&xi.pow_u(n as u32))
    };
    // |a_n xⁿ|² exactly, when possible.
    let exact_sq = |c: &Coeff, n: usize| -> Option<Rational> {
        let a2 = c.abs_sq()?;
        let x2 = x_sq.as_ref()?;
        Some(a2 * crate::series::rat_pow(x2, n as u64))
    };
    let log_term = |c: &Coeff, n: usize| -> f64 {
        let l = c.ln_abs_f64();
        if n == 0 || l == f64::NEG_INFINITY {
            l
        } else {
            l + n as f64 * ln_x
        }
    };
    let c0 = s.coeff(0)?;
    if ax.is_zero() {
        return Ok(EnvelopeMax {
            m: 0,
            max_term: c0.enclose(prec).abs(),
            scanned: 1,
            horizon_limited: false,
        });
    }
    let mut best_n = 0usize;
    let mut best_c = c0.clone();
    let mut best_log = log_term(&c0, 0);
    let mut since_best = 0usize;
    let mut n = 1usize;
    let mut certified = false;
    let limit = s.polynomial_len().map_or(scan.horizon, |l| l.min(scan.horizon));
    while n < limit {
        let c = s.coeff(n)?;
        let lt = log_term(&c, n);
        let better = if lt > best_log + 1e-9 {
            true
        } else if lt < best_log - 1e-9 || lt == f64::NEG_INFINITY {
            false
        } else {
            // Near tie: decide exactly, or by enclosure.
            match (exact_sq(&c, n), exact_sq(&best_c, best_n)) {
                (Some(a), Some(b)) => a > b,
                _ => {
                    let (a, b) = (term_enc(&c, n), term_enc(&best_c, best_n));
                    a.lo() > b.hi()
                }
            }
        };
        if better {
            best_n = n;
            best_c = c;
            best_log = lt;
            since_best = 0;
        } else {
            since_best += 1;
        }
        if since_best >= scan.window {
            if let Some(t) = tail_bound(s, &ax, n, prec) {
                let best = term_enc(&best_c, best_n);
                if &t < best.lo() {
                    certified = true;
                    break;
                }
            }
        }
        n += 1;
    }
    if s.polynomial_len().is_some_and(|l| n >= l) {
        certified = true;
    }
    Ok(EnvelopeMax {
        m: best_n,
        max_term: term_enc(&best_c, best_n),
        scanned: n,
        horizon_limited: !certified,
    })
}

// ---------------------------------------------------------------------------
// Discrete Taylor-like inequalities at the geometric-mean point

/// Outcome of checking both inequalities
/// `|a_{m±p}x^{m±p}| / |a_{m±q}x^{m±q}| ≤ χ^{(p−q)²/2}` at
/// `x = |a_{m−1}/a_{m+1}|^{1/2}`.
#[derive(Clone, Debug)]
pub struct TaylorCheck {
    pub forward_holds: bool,
    /// `None` when `m − p < 0`.
    pub backward_holds: Option<bool>,
    /// `χ^{(p−q)²/2} − ratio` (double precision report).
    pub forward_slack: f64,
    pub backward_slack: Option<f64>,
}

impl TaylorCheck {
    pub fn holds(&self) -> bool {
        self.forward_holds && self.backward_holds.unwrap_or(true)
    }
}

/// Both inequalities are compared exactly after raising to the fourth power,
/// where every quantity is rational: `|a|²` is exact and `x⁴ =
/// |a_{m−1}|²/|a_{m+1}|²`.
pub fn verify_taylor_like(
    s: &SeriesSpec,
    m: usize,
    q: usize,
    p: usize,
    chi: &Rational,
) -> Result<TaylorCheck> {
    if p < q {
        return Err(Error::InvalidArgument("need p >= q".into()));
    }
    if m == 0 {
        return Err(Error::Inapplicable("x_m needs m >= 1".into()));
    }
    let sq = |n: usize| -> Result<Rational> {
        s.coeff(n)?.abs_sq().ok_or_else(|| {
            Error::Inapplicable(format!("coefficient {n} has no exact modulus"))
        })
    };
    let nonzero = |n: usize, v: &Rational| -> Result<()> {
        if *v == 0 {
            Err(Error::Inapplicable(format!("zero coefficient a_{n} in denominator chain")))
        } else {
            Ok(())
        }
    };
    let (am1, ap1) = (sq(m - 1)?, sq(m + 1)?);
    nonzero(m + 1, &ap1)?;
    nonzero(m - 1, &am1)?;
    let x4 = Rational::from(&am1 / &ap1);
    let d = (p - q) as u64;
    let rhs4 = crate::series::rat_pow(chi, 2 * d * d);
    let ln_rhs = chi.to_f64().ln() * (d * d) as f64 / 2.0;
    let slack = |lhs4: &Rational| -> f64 {
        let ln_ratio = crate::num::ln_abs_f64(lhs4) / 4.0;
        if lhs4.cmp0() == std::cmp::Ordering::Equal {
            ln_rhs.exp()
        } else {
            ln_rhs.exp() - ln_ratio.exp()
        }
    };
    let (aq, ap) = (sq(m + q)?, sq(m + p)?);
    nonzero(m + q, &aq)?;
    let base = Rational::from(&ap / &aq);
    let fwd = Rational::from(base.square_ref()) * crate::series::rat_pow(&x4, d);
    let forward_holds = fwd <= rhs4;
    let forward_slack = slack(&fwd);
    let (backward_holds, backward_slack) = if m >= p {
        let (bq, bp) = (sq(m - q)?, sq(m - p)?);
        nonzero(m - q, &bq)?;
        let base = Rational::from(&bp / &bq);
        let bwd = Rational::from(base.square_ref()) / crate::series::rat_pow(&x4, d);
        (Some(bwd <= rhs4), Some(slack(&bwd)))
    } else {
        (None, None)
    };
    Ok(TaylorCheck {
        forward_holds,
        backward_holds,
        forward_slack,
        backward_slack,
    })
}

// ---------------------------------------------------------------------------
// Log profile

/// `g(n) = −log|a_n|` and its second difference on a window.
#[derive(Clone, Debug)]
pub struct LogProfile {
    pub start: usize,
    /// `None` at zero coefficients.
    pub g: Vec<Option<Interval>>,
    /// `Δ²g(n−1) = g(n+1) − 2g(n) + g(n−1)` indexed by `n` (from `start + 1`).
    pub second_difference: Vec<Option<Interval>>,
}

impl LogProfile {
    /// Whether `Δ²g(n−1) ≥ log(1/χ)` is certain at `n` (`None` if undefined
    /// or undecided).
    pub fn turan_holds_at(&self, n: usize, chi: &Interval) -> Option<bool> {
        let d = self.second_difference.get(n.checked_sub(self.start + 1)?)?.as_ref()?;
        let target = chi.ln().ok()?.neg();
        if d.lo() >= target.hi() {
            Some(true)
        } else if d.hi() < target.lo() {
            Some(false)
        } else {
            None
        }
    }
}

pub fn log_profile(s: &SeriesSpec, start: usize, end: usize, prec: u32) -> Result<LogProfile> {
    if end < start + 2 {
        return Err(Error::InvalidArgument("log profile needs at least three indices".into()));
    }
    let g: Vec<Option<Interval>> = s
        .coeffs(start, end + 1)?
        .iter()
        .map(|c| {
            let a = c.enclose(prec).abs();
            if a.lo() > &0 {
                a.ln().ok().map(|l| l.neg())
            } else {
                None
            }
        })
        .collect();
    let second_difference = g
        .windows(3)
        .map(|w| match (&w[0], &w[1], &w[2]) {
            (Some(a), Some(b), Some(c)) => Some(c.sub(&b.mul_u(2)).add(a)),
            _ => None,
        })
        .collect();
    Ok(LogProfile {
        start,
        g,
        second_difference,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::CRational;
    use crate::series::{Rho, SignRule};

    fn q(n: i64, d: i64) -> Rational {
        Rational::from((n, d))
    }

    #[test]
    fn chi_of_theta_is_rho_squared() {
        let t = SeriesSpec::theta(Rho::Rational(q(1, 3)), SignRule::Random(5)).unwrap();
        let p = estimate_chi(&t, 1, 30, 128).unwrap();
        assert_eq!(p.chi_exact, Some(q(1, 9)));
        assert!(p.zero_indices.is_empty());
    }

    #[test]
    fn chi_of_factorial_coefficients() {
        let sc = SeriesSpec::sin().add(&SeriesSpec::cos());
        let p = estimate_chi(&sc, 1, 50, 128).unwrap();
        assert_eq!(p.chi_exact, Some(q(50, 51)));
        assert_eq!(p.attained_at, 50);
        let ones = SeriesSpec::explicit_i64(&[1, 1, 1, 1]);
        assert_eq!(estimate_chi(&ones, 1, 2, 64).unwrap().chi_exact, Some(q(1, 1)));
    }

    #[test]
    fn gaussian_has_no_finite_chi() {
        let g = SeriesSpec::gaussian(q(1, 1), 0).unwrap();
        let p = estimate_chi(&g, 1, 20, 64).unwrap();
        assert!(!p.is_finite());
        let z = SeriesSpec::explicit_i64(&[0, 0, 0, 0, 0]);
        assert!(matches!(estimate_chi(&z, 1, 3, 64), Err(Error::DegenerateWindow { .. })));
    }

    #[test]
    fn theta_psi_at_one_half() {
        let tp = theta_psi_rational(&q(1, 2), 256).unwrap();
        assert_eq!(tp.theta, Some(2));
        assert_eq!(tp.psi, 1);
        assert!(tp.theta_sum.hi() < &1);
        assert!(tp.psi_sum.hi() < &0.5);
    }

    #[test]
    fn theta_psi_small_chi() {
        let tp = theta_psi_rational(&q(1, 1_000_000), 128).unwrap();
        assert_eq!(tp.psi, 0);
        let tp = theta_psi_rational(&q(1, 25), 128).unwrap();
        assert_eq!(tp.theta, None);
    }

    #[test]
    fn predicates_at_known_points() {
        assert!(Predicate::PsiEq0.eval(&q(1, 5), 256).unwrap());
        assert!(Predicate::ThetaGe2AndPsiLe1.eval(&q(1, 2), 256).unwrap());
        assert!(!Predicate::ThetaGe2.eval(&q(675, 1000), 256).unwrap());
    }

    #[test]
    fn threshold_psi_eq_0() {
        let r = threshold_solve(Predicate::PsiEq0, &q(1, 10), &q(3, 10), &q(1, 1_000_000), 256)
            .unwrap();
        assert!((r.chi_star_f64() - 0.207875).abs() < 5e-6);
        assert!(Rational::from(&r.hi - &r.lo) <= r.tolerance);
    }

    #[test]
    fn runs_of_explicit() {
        let p = sign_runs(&SeriesSpec::explicit_i64(&[1, 2, 3, -1, -2]), 0, 4).unwrap();
        let v: Vec<_> = p.runs.iter().map(|r| (r.start, r.length, r.sign)).collect();
        assert_eq!(v, vec![(0, 3, Sign::Pos), (3, 2, Sign::Neg)]);
        assert!(!p.range_truncated);
        assert_eq!(p.l_of(1), 2);
        let g = sign_runs(&SeriesSpec::gaussian(q(1, 1), 0).unwrap(), 0, 8).unwrap();
        assert_eq!(g.max_run(), 1);
        assert!(g.range_truncated);
        let c = SeriesSpec::explicit([CRational::i()]);
        assert!(matches!(sign_runs(&c, 0, 0), Err(Error::ComplexCoefficient(0))));
    }

    #[test]
    fn envelope_examples() {
        let t = SeriesSpec::theta(Rho::Rational(q(1, 3)), SignRule::AllPlus).unwrap();
        let e = envelope_argmax(&t, &Float::with_val(64, 9), &ScanParams::default(), 128).unwrap();
        assert_eq!(e.m, 1);
        assert!(!e.horizon_limited);
        let s = envelope_argmax(&SeriesSpec::sin(), &Float::with_val(64, 10), &ScanParams::default(), 128)
            .unwrap();
        assert_eq!(s.m, 9);
        let z = envelope_argmax(&SeriesSpec::sin(), &Float::new(64), &ScanParams::default(), 64).unwrap();
        assert_eq!(z.m, 0);
    }

    #[test]
    fn taylor_like_equality_case() {
        let t = SeriesSpec::theta(Rho::Rational(q(1, 3)), SignRule::AllPlus).unwrap();
        let c = verify_taylor_like(&t, 5, 0, 3, &q(1, 9)).unwrap();
        assert!(c.holds());
        assert!(c.forward_slack.abs() < 1e-12);
        let eq = verify_taylor_like(&t, 5, 2, 2, &q(1, 9)).unwrap();
        assert!(eq.holds());
        let f = SeriesSpec::sin().add(&SeriesSpec::cos());
        assert!(verify_taylor_like(&f, 10, 0, 2, &q(1, 1)).unwrap().holds());
        let g = SeriesSpec::gaussian(q(1, 1), 0).unwrap();
        assert!(matches!(verify_taylor_like(&g, 2, 0, 1, &q(1, 2)), Err(Error::Inapplicable(_))));
    }

    #[test]
    fn log_profile_matches_turan() {
        let t = SeriesSpec::theta(Rho::Rational(q(1, 2)), SignRule::AllPlus).unwrap();
        let lp = log_profile(&t, 1, 10, 128).unwrap();
        let chi = Interval::from_rational(128, &q(1, 4));
        // Equality case: Δ²g = log 4 exactly, so the enclosure comparison is undecided or true.
        assert_ne!(lp.turan_holds_at(5, &chi), Some(false));
        let looser = Interval::from_rational(128, &q(1, 3));
        assert_eq!(lp.turan_holds_at(5, &looser), Some(true));
        let tighter = Interval::from_rational(128, &q(1, 5));
        assert_eq!(lp.turan_holds_at(5, &tighter), Some(false));
    }

    #[test]
    fn half_chain() {
        for (a, b) in [(1, 2), (1, 3), (1, 10), (1, 1000)] {
            let c = half_bound_chain(&q(a, b), 256).unwrap();
            assert!(c.holds(), "{a}/{b}: {c:?}");
        }
        let c = half_bound_chain(&q(1, 2), 256).unwrap();
        assert!(c.s.hi() < &0.3 && c.s.lo() > &0.29);
        assert!(half_bound_chain(&q(3, 5), 256).is_err());
    }

    #[test]
    fn audit_consistent() {
        let rows = threshold_audit(
            &[Predicate::ThetaGe2AndPsiLe1, Predicate::ThetaGe2Psi],
            &q(3, 10),
            &q(9, 10),
            &q(1, 100_000),
            &q(67522, 100_000),
            128,
        )
        .unwrap();
        for r in &rows {
            assert!(r.consistent);
            assert!(!r.matches_reported);
            assert!((r.result.chi_star_f64() - 0.524889).abs() < 1e-5);
        }
    }
}
