//! Unboundedness certificates built from witness points
//! `x_m = |a_{m−1}/a_{m+1}|^{1/2}`.
//!
//! Each witness sums the window `a_0 … a_{m+K}` at `±x_m` in interval
//! arithmetic and bounds the rest of the series, either by the χ-kernel
//! majorant `|a_m x_m^m|·χ^{(K+1)²/2}/(1 − χ^{K+3/2})` (rules that satisfy the
//! Turán inequality by construction) or by the rule's own analytic majorant.
//! The resulting lower bound on `|f(±x_m)|` is rigorous whatever the sign
//! pattern; the branch conditions only decide which `m` are worth trying.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use rug::float::Round;
use rug::{Float, Rational};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::{
    rational_root4_exact, rational_sqrt, rational_str, Approx, CInterval, Dyadic, Interval,
};
use crate::series::{tail_bound, SeriesSpec, Sign};
use crate::turan::{theta_psi_rational, KernelSums, ThetaPsi};

pub const FORMAT: &str = "bounded-series-certificate";
pub const VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    /// Every same-sign run (from index 0) has length ≤ ϑ(χ); uses Θ.
    ShortRuns,
    /// `a_{m−ψ} … a_{m+ψ}` share a sign; uses Ψ.
    LongRun,
    /// Complex coefficients with ψ(χ) = 0.
    ComplexPsi0,
}

impl Branch {
    pub fn name(self) -> &'static str {
        match self {
            Branch::ShortRuns => "short-runs",
            Branch::LongRun => "long-run",
            Branch::ComplexPsi0 => "complex-psi0",
        }
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Branch {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().replace('_', "-").as_str() {
            "short-runs" => Ok(Branch::ShortRuns),
            "long-run" => Ok(Branch::LongRun),
            "complex-psi0" => Ok(Branch::ComplexPsi0),
            other => Err(Error::Parse(format!("unknown branch {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum TailMethod {
    /// `|a_m x^m| · Σ_{k>K} χ^{k²/2}`, valid because the rule satisfies the
    /// Turán inequality for every index ≥ the certificate's start.
    TuranMajorant { k: u64 },
    /// The rule's analytic majorant of `Σ_{n>hi} |a_n| |x|^n`.
    RuleMajorant,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub m: usize,
    /// Exact `x_m⁴ = |a_{m−1}|² / |a_{m+1}|²`.
    #[serde(with = "rational_str")]
    pub x4: Rational,
    /// `x_m` (the evaluation point is `−x_m` for reflected certificates).
    pub x_m: Approx,
    /// Summed index range `[lo, hi]`.
    pub window: [usize; 2],
    pub window_sum_re: Approx,
    pub window_sum_im: Approx,
    /// `|a_m x_m^m|`.
    pub peak: Approx,
    pub tail_method: TailMethod,
    pub tail_bound: Dyadic,
    /// Lower bound on `|f(±x_m)|`.
    pub certified_lower: Dyadic,
}

impl Witness {
    pub fn certified_lower_rational(&self) -> Rational {
        self.certified_lower.to_rational().unwrap_or_default()
    }

    pub fn certified_lower_f64(&self) -> f64 {
        self.certified_lower.to_float().map(|f| f.to_f64()).unwrap_or(f64::NAN)
    }

    pub fn x_m_f64(&self) -> f64 {
        self.x_m.center().to_float().map(|f| f.to_f64()).unwrap_or(f64::NAN)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub format: String,
    pub version: u32,
    pub series: SeriesSpec,
    #[serde(with = "rational_str")]
    pub chi: Rational,
    /// First index from which the Turán inequality is claimed.
    pub turan_start: usize,
    /// `None` is `ϑ = ∞`.
    pub theta: Option<u64>,
    pub psi: u64,
    pub branch: Branch,
    /// Witnesses evaluate `f(−x_m)` (alternating coefficients).
    pub reflected: bool,
    #[serde(with = "rational_str")]
    pub conclusion_threshold: Rational,
    pub precision: u32,
    pub witnesses: Vec<Witness>,
}

impl Certificate {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Parse(format!("certificate: {e}")))
    }
}

#[derive(Clone, Debug)]
pub struct CertifyOptions {
    /// Force a branch instead of choosing from the sign pattern.
    pub branch: Option<Branch>,
    /// Force (or forbid) evaluation at `−x_m`.
    pub reflected: Option<bool>,
    pub max_witnesses: usize,
    /// Total witness attempts (including rejected candidates).
    pub max_attempts: usize,
    /// Largest `m` tried.
    pub max_index: usize,
    /// Coefficients scanned when choosing the branch.
    pub sign_horizon: usize,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions {
            branch: None,
            reflected: None,
            max_witnesses: 16,
            max_attempts: 64,
            max_index: 4096,
            sign_horizon: 256,
        }
    }
}

// ---------------------------------------------------------------------------

struct Ctx<'a> {
    s: &'a SeriesSpec,
    chi: Rational,
    tp: ThetaPsi,
    branch: Branch,
    reflected: bool,
    start: usize,
    structural: bool,
}

impl Ctx<'_> {
    fn sign(&self, n: usize) -> Result<Sign> {
        let c = self.s.coeff(n)?;
        let sg = c.sign().ok_or(Error::ComplexCoefficient(n))?;
        Ok(if self.reflected && n % 2 == 1 {
            match sg {
                Sign::Pos => Sign::Neg,
                Sign::Neg => Sign::Pos,
                Sign::Zero => Sign::Zero,
            }
        } else {
            sg
        })
    }

    /// Window radius `K` beyond `m`.
    fn radius(&self, prec: u32) -> Result<u64> {
        let ks = KernelSums::from_rational(&self.chi, prec)?;
        let target = Float::with_val(prec, 1) >> (prec / 2);
        let mut k = self.tp.psi.max(self.tp.theta.unwrap_or(0)).max(1);
        while ks.tail(k) > target {
            k += 1;
        }
        Ok(k)
    }

    /// Branch precondition at `m`, with the summed window ending at `hi`.
    fn precondition(&self, m: usize, hi: usize) -> Result<()> {
        if m < 1 {
            return Err(Error::WindowPrecondition {
                indices: vec![m],
                reason: "x_m needs a_{m-1}".into(),
            });
        }
        for n in [m - 1, m + 1] {
            if self.s.coeff(n)?.is_zero() != Some(false) {
                return Err(Error::WindowPrecondition {
                    indices: vec![n],
                    reason: "x_m needs nonzero neighbours a_{m-1}, a_{m+1}".into(),
                });
            }
        }
        match self.branch {
            Branch::ComplexPsi0 => {
                if self.tp.psi != 0 {
                    return Err(Error::WindowPrecondition {
                        indices: vec![m],
                        reason: format!("complex-psi0 needs psi(chi) = 0, got {}", self.tp.psi),
                    });
                }
                Ok(())
            }
            Branch::LongRun => {
                let psi = self.tp.psi as usize;
                if m < psi {
                    return Err(Error::WindowPrecondition {
                        indices: vec![m],
                        reason: format!("long-run window needs m >= psi = {psi}"),
                    });
                }
                let s0 = self.sign(m)?;
                let bad: Vec<usize> = (m - psi..=m + psi)
                    .map(|n| self.sign(n).map(|sg| (n, sg)))
                    .collect::<Result<Vec<_>>>()?
                    .into_iter()
                    .filter(|(_, sg)| *sg != s0 || *sg == Sign::Zero)
                    .map(|(n, _)| n)
                    .collect();
                if bad.is_empty() {
                    Ok(())
                } else {
                    Err(Error::WindowPrecondition {
                        indices: bad,
                        reason: format!(
                            "coefficients {}..={} do not share one sign",
                            m - psi,
                            m + psi
                        ),
                    })
                }
            }
            Branch::ShortRuns => {
                let (a, b) = (self.sign(m)?, self.sign(m + 1)?);
                if a != b || a == Sign::Zero {
                    return Err(Error::WindowPrecondition {
                        indices: vec![m, m + 1],
                        reason: "short-runs needs a_m, a_{m+1} of one sign".into(),
                    });
                }
                if let Some(theta) = self.tp.theta {
                    let (mut run_start, mut prev) = (0usize, self.sign(0)?);
                    for n in 1..=hi + 1 {
                        let sg = self.sign(n)?;
                        if sg != prev || sg == Sign::Zero {
                            run_start = n;
                            prev = sg;
                        }
                        if n + 1 - run_start > theta as usize {
                            return Err(Error::WindowPrecondition {
                                indices: (run_start..=n).collect(),
                                reason: format!("same-sign run longer than theta = {theta}"),
                            });
                        }
                    }
                }
                Ok(())
            }
        }
    }

    /// Exact `|a_{n+1}a_{n−1}| ≤ χ|a_n|²` for `start ≤ n ≤ hi`.
    fn turan_window(&self, hi: usize) -> Result<()> {
        let chi2 = Rational::from(self.chi.square_ref());
        for n in self.start.max(1)..=hi {
            let sq = |i: usize| -> Result<Rational> {
                self.s.coeff(i)?.abs_sq().ok_or_else(|| {
                    Error::Inconclusive(format!("coefficient {i} is not exact"))
                })
            };
            let (l, c, r) = (sq(n - 1)?, sq(n)?, sq(n + 1)?);
            let lhs = l * r;
            let rhs = Rational::from(c.square_ref()) * &chi2;
            if lhs > rhs {
                return Err(Error::WindowPrecondition {
                    indices: vec![n - 1, n, n + 1],
                    reason: format!("Turán inequality with chi = {} fails at n = {n}", self.chi),
                });
            }
        }
        Ok(())
    }
}

struct Raw {
    x4: Rational,
    x: Interval,
    hi: usize,
    sum: CInterval,
    peak: Interval,
    method: TailMethod,
    tail: Float,
    lower: Float,
}

fn build(ctx: &Ctx, m: usize, k: u64, prec: u32) -> Result<Raw> {
    let s = ctx.s;
    let hi = m + k as usize;
    ctx.precondition(m, hi)?;
    ctx.turan_window(hi)?;

    let exact = |i: usize| -> Result<Rational> {
        s.coeff(i)?
            .abs_sq()
            .ok_or_else(|| Error::Inconclusive(format!("coefficient {i} is not exact")))
    };
    let x4 = exact(m - 1)? / exact(m + 1)?;

    // Guard bits for the cancellation between huge terms.
    let peak_log2 = (s.coeff(m)?.ln_abs_f64() + m as f64 * x4.to_f64().ln() / 4.0)
        / std::f64::consts::LN_2;
    let wp = prec + 64 + peak_log2.max(0.0).ceil() as u32 + (64 - (hi as u64).leading_zeros());

    let x = match rational_root4_exact(&x4) {
        Some(q) => Interval::from_rational(wp, &q),
        None => rational_sqrt(wp, &x4)?.sqrt()?,
    };
    let xe = if ctx.reflected { x.neg() } else { x.clone() };

    let coeffs = s.coeffs(0, hi + 1)?;
    let mut sum = CInterval::zero(wp);
    let mut pw = Interval::from_i64(wp, 1);
    for c in &coeffs {
        if c.is_zero() != Some(true) {
            sum = sum.add(&c.enclose(wp).mul_real(&pw));
        }
        pw = pw.mul(&xe);
    }

    let am = match coeffs[m].abs_sq() {
        Some(q) => rational_sqrt(wp, &q)?,
        None => coeffs[m].enclose(wp).abs(),
    };
    let peak = am.mul(&x.pow_u(m as u32));

    let (method, tail) = match s.structural_turan() {
        Some((n0, chi_s)) if ctx.structural && n0 <= ctx.start.max(1) && chi_s <= ctx.chi => {
            let ks = KernelSums::from_rational(&ctx.chi, wp)?;
            let t = Float::with_val_round(wp, peak.hi() * &ks.tail(k), Round::Up).0;
            (TailMethod::TuranMajorant { k }, t)
        }
        _ => {
            let t = tail_bound(s, x.hi(), hi, wp).ok_or_else(|| {
                Error::Inconclusive(format!(
                    "rule {} has no analytic tail majorant",
                    s.rule().name()
                ))
            })?;
            (TailMethod::RuleMajorant, t)
        }
    };

    let lower = Float::with_val_round(wp, sum.abs().mig() - &tail, Round::Down).0;
    Ok(Raw {
        x4,
        x,
        hi,
        sum,
        peak,
        method,
        tail,
        lower,
    })
}

/// Stored bounds give up a relative `2^{−(prec−32)}` so a recheck at any
/// precision ≥ `prec` reproduces them.
fn shave(lower: &Float, prec: u32) -> Float {
    if lower.is_sign_negative() || lower.is_zero() {
        return Float::with_val_round(prec, lower, Round::Down).0;
    }
    let eps = Float::with_val(lower.prec(), lower >> (prec - 32));
    Float::with_val_round(prec, lower - eps, Round::Down).0
}

fn witness_from(m: usize, raw: &Raw, prec: u32) -> Witness {
    Witness {
        m,
        x4: raw.x4.clone(),
        x_m: Approx::from_interval(&raw.x),
        window: [0, raw.hi],
        window_sum_re: Approx::from_interval(&raw.sum.re),
        window_sum_im: Approx::from_interval(&raw.sum.im),
        peak: Approx::from_interval(&raw.peak),
        tail_method: raw.method,
        tail_bound: Dyadic::from_float(&raw.tail),
        certified_lower: Dyadic::from_float(&shave(&raw.lower, prec)),
    }
}

fn check_chi(chi: &Rational) -> Result<()> {
    if *chi <= 0 || *chi >= 1 {
        return Err(Error::InvalidArgument(format!("chi must lie in (0, 1), got {chi}")));
    }
    Ok(())
}

fn make_ctx<'a>(
    s: &'a SeriesSpec,
    chi: &Rational,
    branch: Branch,
    reflected: bool,
    prec: u32,
) -> Result<Ctx<'a>> {
    check_chi(chi)?;
    let tp = theta_psi_rational(chi, prec)?;
    let (start, structural) = match s.structural_turan() {
        Some((n0, chi_s)) if chi_s <= *chi => (n0, true),
        _ => (1, false),
    };
    Ok(Ctx {
        s,
        chi: chi.clone(),
        tp,
        branch,
        reflected,
        start,
        structural,
    })
}

/// A single witness at index `m`.
pub fn witness(
    s: &SeriesSpec,
    m: usize,
    chi: &Rational,
    branch: Branch,
    reflected: bool,
    prec: u32,
) -> Result<Witness> {
    let ctx = make_ctx(s, chi, branch, reflected, prec)?;
    let k = ctx.radius(prec)?;
    let raw = build(&ctx, m, k, prec)?;
    Ok(witness_from(m, &raw, prec))
}

fn signs(s: &SeriesSpec, n: usize) -> Result<Option<Vec<Sign>>> {
    let mut out = Vec::with_capacity(n);
    for c in s.coeffs(0, n)? {
        match c.sign() {
            Some(sg) => out.push(sg),
            None => return Ok(None),
        }
    }
    Ok(Some(out))
}

fn choose_branch(
    s: &SeriesSpec,
    tp: &ThetaPsi,
    opts: &CertifyOptions,
) -> Result<(Branch, bool)> {
    let horizon = opts.sign_horizon.max(8);
    let sg = match signs(s, horizon)? {
        Some(v) if s.is_real() => v,
        _ => {
            return match opts.branch {
                Some(Branch::ComplexPsi0) | None if tp.psi == 0 => Ok((Branch::ComplexPsi0, false)),
                Some(b) if b != Branch::ComplexPsi0 => {
                    Err(Error::Inconclusive(format!("branch {b} needs real coefficients")))
                }
                _ => Err(Error::Inconclusive(format!(
                    "complex coefficients are only certified when psi(chi) = 0 (psi = {})",
                    tp.psi
                ))),
            };
        }
    };
    let alternating = sg[1..]
        .windows(2)
        .all(|w| w[0] != Sign::Zero && w[1] != Sign::Zero && w[0] != w[1]);
    let reflected = opts.reflected.unwrap_or(alternating);
    let b: Vec<Sign> = sg
        .iter()
        .enumerate()
        .map(|(n, &x)| match (reflected && n % 2 == 1, x) {
            (true, Sign::Pos) => Sign::Neg,
            (true, Sign::Neg) => Sign::Pos,
            (_, x) => x,
        })
        .collect();
    let psi = tp.psi as usize;
    let long = (psi.max(1)..horizon - psi - 1)
        .any(|m| b[m - psi..=m + psi].iter().all(|&x| x == b[m] && x != Sign::Zero));
    let max_run = {
        let (mut best, mut cur) = (0usize, 0usize);
        for (i, &x) in b.iter().enumerate() {
            cur = if i > 0 && x == b[i - 1] && x != Sign::Zero { cur + 1 } else { 1 };
            best = best.max(cur);
        }
        best
    };
    let short = tp.theta.is_none_or(|t| max_run as u64 <= t)
        && b.windows(2).any(|w| w[0] == w[1] && w[0] != Sign::Zero);
    match opts.branch {
        Some(Branch::ComplexPsi0) if tp.psi != 0 => Err(Error::Inconclusive(format!(
            "complex-psi0 needs psi(chi) = 0 (psi = {})",
            tp.psi
        ))),
        Some(br) => Ok((br, reflected)),
        None if long => Ok((Branch::LongRun, reflected)),
        None if short => Ok((Branch::ShortRuns, reflected)),
        None => {
            let theta = tp.theta.map_or("inf".to_string(), |t| t.to_string());
            let why_short = if tp.theta.is_none_or(|t| max_run as u64 <= t) {
                format!("no two adjacent coefficients share a nonzero sign (theta = {theta})")
            } else {
                format!("the longest run ({max_run}) exceeds theta = {theta}")
            };
            Err(Error::Inconclusive(format!(
                "no index in 0..{horizon} satisfies either branch: no window of {} equal signs, and {why_short}",
                2 * psi + 1
            )))
        }
    }
}

/// Search witnesses `m₀, 2m₀, 4m₀, …` (each advanced to the next index
/// meeting the branch precondition) until `certified_lower > target`.
pub fn certify_unbounded(
    s: &SeriesSpec,
    chi: &Rational,
    target: &Rational,
    prec: u32,
    opts: &CertifyOptions,
) -> Result<Certificate> {
    check_chi(chi)?;
    let tp = theta_psi_rational(chi, prec)?;
    let (branch, reflected) = choose_branch(s, &tp, opts)?;
    let ctx = make_ctx(s, chi, branch, reflected, prec)?;
    let k = ctx.radius(prec)?;

    let mut witnesses: Vec<Witness> = Vec::new();
    let mut next = ctx.start.max(1).max(tp.psi as usize);
    let mut attempts = 0usize;
    let mut last_reason = String::from("no candidate index");
    loop {
        if attempts >= opts.max_attempts || witnesses.len() >= opts.max_witnesses {
            return Err(Error::Inconclusive(format!(
                "{} witnesses after {attempts} attempts without exceeding the target; last: {last_reason}",
                witnesses.len()
            )));
        }
        // Advance to the next index meeting the branch precondition.
        let mut m = next;
        loop {
            if m > opts.max_index {
                return Err(Error::Inconclusive(format!(
                    "no valid index up to {}; last: {last_reason}",
                    opts.max_index
                )));
            }
            match ctx.precondition(m, m + k as usize) {
                Ok(()) => break,
                Err(e @ Error::WindowPrecondition { .. }) => {
                    last_reason = e.to_string();
                    m += 1;
                }
                Err(e) => return Err(e),
            }
        }
        attempts += 1;
        let raw = match build(&ctx, m, k, prec) {
            Ok(r) => r,
            Err(e @ Error::WindowPrecondition { .. }) => {
                // The Turán inequality failing inside the window is final:
                // later windows contain it too.
                return Err(Error::Inconclusive(e.to_string()));
            }
            Err(e) => return Err(e),
        };
        let w = witness_from(m, &raw, prec);
        let lower = w.certified_lower_rational();
        let increasing = witnesses.last().is_none_or(|p| w.x4 > p.x4);
        if lower > 0 && increasing {
            let done = lower > *target;
            witnesses.push(w);
            if done {
                break;
            }
            next = 2 * m;
        } else {
            last_reason = format!("witness at m = {m} gave no positive bound");
            next = m + 1;
        }
    }
    Ok(Certificate {
        format: FORMAT.into(),
        version: VERSION,
        series: s.clone(),
        chi: chi.clone(),
        turan_start: ctx.start,
        theta: tp.theta,
        psi: tp.psi,
        branch,
        reflected,
        conclusion_threshold: target.clone(),
        precision: prec,
        witnesses,
    })
}

/// Why a certificate fails to re-verify.
pub fn recheck_report(c: &Certificate, prec: u32) -> std::result::Result<(), String> {
    if c.format != FORMAT || c.version != VERSION {
        return Err(format!("unsupported format {} v{}", c.format, c.version));
    }
    let last = c.witnesses.last().ok_or("empty witness list")?;
    if c.conclusion_threshold > 0 && last.certified_lower_rational() <= c.conclusion_threshold {
        return Err("final witness does not exceed the conclusion threshold".into());
    }
    for w in c.witnesses.windows(2) {
        if w[1].x4 <= w[0].x4 {
            return Err(format!("x_m does not increase between m = {} and m = {}", w[0].m, w[1].m));
        }
    }
    let ctx = make_ctx(&c.series, &c.chi, c.branch, c.reflected, prec).map_err(|e| e.to_string())?;
    if ctx.tp.theta != c.theta || ctx.tp.psi != c.psi {
        return Err("stored theta/psi disagree with recomputation".into());
    }
    if ctx.start != c.turan_start {
        return Err("stored Turán start disagrees with the rule".into());
    }
    c.witnesses.par_iter().try_for_each(|w| check_witness(&ctx, w, c.precision, prec))
}

fn check_witness(ctx: &Ctx, w: &Witness, stored_prec: u32, prec: u32) -> std::result::Result<(), String> {
    let at = |msg: &str| format!("witness m = {}: {msg}", w.m);
    if w.window[0] != 0 || w.window[1] < w.m + 1 {
        return Err(at("malformed window"));
    }
    let k = (w.window[1] - w.m) as u64;
    let raw = build(ctx, w.m, k, prec).map_err(|e| at(&e.to_string()))?;
    if raw.x4 != w.x4 {
        return Err(at("x_m^4 mismatch"));
    }
    if raw.method != w.tail_method {
        return Err(at("tail method mismatch"));
    }
    let lower = w.certified_lower.to_rational().map_err(|e| at(&e.to_string()))?;
    if lower <= 0 {
        return Err(at("non-positive certified lower bound"));
    }
    let fresh = raw.lower.to_rational().ok_or_else(|| at("non-finite recomputation"))?;
    if lower > fresh {
        return Err(at("certified lower bound exceeds the recomputed bound"));
    }
    let p = prec.max(stored_prec) + 64;
    let claims = [
        (&w.x_m, &raw.x, "x_m"),
        (&w.window_sum_re, &raw.sum.re, "window sum (re)"),
        (&w.window_sum_im, &raw.sum.im, "window sum (im)"),
        (&w.peak, &raw.peak, "peak term"),
    ];
    for (stored, fresh, what) in claims {
        let iv = stored.to_interval(p).map_err(|e| at(&e.to_string()))?;
        if !iv.overlaps(fresh) {
            return Err(at(&format!("{what} inconsistent with recomputation")));
        }
    }
    // Tail claims may differ by rounding of the majorant only.
    let t = w.tail_bound.to_float().map_err(|e| at(&e.to_string()))?;
    let slack = Float::with_val(p, &raw.tail >> (stored_prec.min(prec) - 40));
    if Float::with_val(p, &t + &slack) < raw.tail || Float::with_val(p, &t - &slack) > raw.tail {
        return Err(at("tail bound inconsistent with recomputation"));
    }
    Ok(())
}

/// Re-verify every claim from the series rule at `prec` bits.
pub fn recheck(c: &Certificate, prec: u32) -> bool {
    recheck_report(c, prec).is_ok()
}

/// Certified evaluation point of a witness: `x_m` or `−x_m`.
pub fn witness_point(c: &Certificate, w: &Witness, prec: u32) -> Result<Interval> {
    let x = match rational_root4_exact(&w.x4) {
        Some(q) => Interval::from_rational(prec, &q),
        None => rational_sqrt(prec, &w.x4)?.sqrt()?,
    };
    Ok(if c.reflected { x.neg() } else { x })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::{Rho, SignRule};
    use rug::ops::Pow;

    fn theta(rho: &str, signs: SignRule) -> SeriesSpec {
        SeriesSpec::theta(rho.parse::<Rho>().unwrap(), signs).unwrap()
    }

    #[test]
    fn theta_third_long_run_witness() {
        let s = theta("1/3", SignRule::AllPlus);
        let w = witness(&s, 10, &Rational::from((1, 9)), Branch::LongRun, false, 256).unwrap();
        // x_10 = 3^20
        assert_eq!(w.x4, Rational::from(rug::Integer::from(3).pow(80)));
        // ≥ (1 − 2Ψ)·3^100 with Ψ < 0.0124
        let lb = w.certified_lower.to_float().unwrap();
        let floor = Float::with_val(256, rug::Integer::from(3).pow(100)) * 0.97;
        assert!(lb > floor);
        assert!(matches!(w.tail_method, TailMethod::TuranMajorant { .. }));
    }

    #[test]
    fn certify_and_recheck() {
        let s = theta("1/3", SignRule::AllPlus);
        let c = certify_unbounded(
            &s,
            &Rational::from((1, 9)),
            &Rational::from(1_000_000),
            256,
            &CertifyOptions::default(),
        )
        .unwrap();
        assert!(c.witnesses.len() <= 5);
        assert_eq!(c.branch, Branch::LongRun);
        assert!(recheck(&c, 512), "{:?}", recheck_report(&c, 512));
        let back = Certificate::from_json(&c.to_json()).unwrap();
        assert_eq!(back, c);
        assert!(recheck(&back, 256));

        let mut bad = c.clone();
        let w = bad.witnesses.last_mut().unwrap();
        let bumped = w.certified_lower_rational() + 1u32;
        // +1 is represented exactly as a dyadic.
        w.certified_lower = Dyadic::from_float(&Float::with_val(2048, &bumped));
        assert!(!recheck(&bad, 512));

        let mut empty = c.clone();
        empty.witnesses.clear();
        assert!(!recheck(&empty, 512));
    }

    #[test]
    fn alternating_uses_reflection() {
        let s = theta("1/3", SignRule::Alternating);
        let c = certify_unbounded(
            &s,
            &Rational::from((1, 9)),
            &Rational::from(1_000_000),
            256,
            &CertifyOptions::default(),
        )
        .unwrap();
        assert!(c.reflected);
        assert!(recheck(&c, 512));
    }

    #[test]
    fn gaussian_is_inconclusive() {
        let g = SeriesSpec::gaussian(Rational::from(1), 0).unwrap();
        let r = certify_unbounded(
            &g,
            &Rational::from((1, 2)),
            &Rational::from(1_000_000),
            256,
            &CertifyOptions::default(),
        );
        assert!(matches!(r, Err(Error::Inconclusive(_))), "{r:?}");
    }

    #[test]
    fn precondition_names_indices() {
        let s = theta("1/2", SignRule::Explicit(vec![1, 1, -1, 1]));
        // χ = 1/4: ψ = 1, so a_1..a_3 must share a sign; a_2 < 0.
        let e = witness(&s, 2, &Rational::from((1, 4)), Branch::LongRun, false, 128).unwrap_err();
        match e {
            Error::WindowPrecondition { indices, .. } => assert!(indices.contains(&2) || indices.contains(&1)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn complex_psi0() {
        use crate::num::CRational;
        let s = theta("1/3", SignRule::AllPlus).scale("1+1i".parse::<CRational>().unwrap());
        let c = certify_unbounded(
            &s,
            &Rational::from((1, 9)),
            &Rational::from(1000),
            256,
            &CertifyOptions::default(),
        )
        .unwrap();
        assert_eq!(c.branch, Branch::ComplexPsi0);
        assert!(recheck(&c, 384));
    }
}
