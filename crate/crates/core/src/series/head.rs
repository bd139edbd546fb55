//! Recovering a coefficient from the tail alone:
//! `a_n = −lim_{|x|→∞} Σ_{k≥1} a_{n+k} x^k` for series bounded on ℝ.

use rug::Float;

use super::{eval_auto, SeriesSpec};
use crate::error::{Error, Result};
use crate::num::{fmt_float, BigComplex};

#[derive(Clone, Debug)]
pub struct HeadOptions {
    /// Polynomial extrapolation order in `u = 1/x`; `None` uses
    /// `min(n, len − 1)` (exact for polynomial-times-decaying tails such as
    /// the Gaussian family). Order 0 takes the raw tail sums.
    pub order: Option<usize>,
    /// Growing differences below `tol·max(1, |estimate|)` are still read
    /// as convergence (oscillating tails like `sin(x)/x` do not contract
    /// monotonically).
    pub tol: f64,
}

impl Default for HeadOptions {
    fn default() -> Self {
        HeadOptions {
            order: None,
            tol: 1e-2,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum HeadDiagnostic {
    /// Successive estimates contract.
    Converging { last_difference: f64 },
    /// Too few estimates to judge.
    Undetermined,
}

#[derive(Clone, Debug)]
pub struct HeadRecovery {
    pub value: BigComplex,
    /// `−Σ_{k≥1} a_{n+k} x^k` at each schedule point.
    pub samples: Vec<BigComplex>,
    /// Extrapolated limits from consecutive windows of the schedule.
    pub estimates: Vec<BigComplex>,
    pub differences: Vec<f64>,
    pub order: usize,
    pub diagnostic: HeadDiagnostic,
}

fn sub(a: &BigComplex, b: &BigComplex) -> BigComplex {
    let p = a.prec().max(b.prec());
    BigComplex::new(
        Float::with_val(p, &a.re - &b.re),
        Float::with_val(p, &a.im - &b.im),
    )
}

/// Neville–Aitken extrapolation of the interpolating polynomial through
/// `(u_i, v_i)` to `u = 0`.
fn neville_at_zero(u: &[Float], v: &[BigComplex]) -> BigComplex {
    let p = v[0].prec();
    let mut t: Vec<BigComplex> = v.to_vec();
    let n = u.len();
    for level in 1..n {
        for i in 0..n - level {
            let j = i + level;
            // T = (u_j·T_i − u_i·T_{i+1}) / (u_j − u_i)
            let den = Float::with_val(p, &u[j] - &u[i]);
            let re = (Float::with_val(p, &u[j] * &t[i].re) - Float::with_val(p, &u[i] * &t[i + 1].re))
                / &den;
            let im = (Float::with_val(p, &u[j] * &t[i].im) - Float::with_val(p, &u[i] * &t[i + 1].im))
                / &den;
            t[i] = BigComplex::new(re, im);
        }
    }
    t.swap_remove(0)
}

/// Recover `a_n` from the tail `(a_{n+k})_{k≥1}` by evaluating
/// `−Σ_{k≥1} a_{n+k} x^k` along an increasing schedule and extrapolating
/// to `x = ∞`.
///
/// The tail is summed directly from the shifted series, never as
/// `f − head`, so the head is genuinely not consulted.
pub fn recover_head(
    s: &SeriesSpec,
    n: usize,
    schedule: &[Float],
    prec: u32,
    opts: &HeadOptions,
) -> Result<HeadRecovery> {
    if n == 0 {
        return Err(Error::InvalidArgument("head recovery needs n >= 1".into()));
    }
    if schedule.len() < 2 {
        return Err(Error::InvalidArgument("schedule needs at least two points".into()));
    }
    if schedule.windows(2).any(|w| w[1] <= w[0]) || schedule[0] <= 0 {
        return Err(Error::InvalidArgument("schedule must be positive and increasing".into()));
    }
    let tail = s.shift(n + 1);
    let wp = prec + 64;
    let mut samples = Vec::with_capacity(schedule.len());
    for x in schedule {
        let xc = BigComplex::real(Float::with_val(wp, x));
        let e = eval_auto(&tail, &xc, wp)?;
        // −x·(σ^{n+1} f)(x)
        let v = BigComplex::new(
            -Float::with_val(wp, &e.value.re * x),
            -Float::with_val(wp, &e.value.im * x),
        );
        samples.push(v);
    }
    let order = opts.order.unwrap_or(n).min(schedule.len() - 1);
    let u: Vec<Float> = schedule.iter().map(|x| Float::with_val(wp, 1) / x).collect();
    let estimates: Vec<BigComplex> = (0..schedule.len() - order)
        .map(|i| neville_at_zero(&u[i..=i + order], &samples[i..=i + order]))
        .collect();
    let differences: Vec<f64> = estimates
        .windows(2)
        .map(|w| sub(&w[1], &w[0]).abs().to_f64())
        .collect();
    let floor = 2f64.powi(-(prec as i32) / 2);
    let diagnostic = match differences.as_slice() {
        [] => HeadDiagnostic::Undetermined,
        [d] if *d <= floor => HeadDiagnostic::Converging { last_difference: *d },
        [_] => HeadDiagnostic::Undetermined,
        [first, .., last] => {
            let scale = estimates[0].abs().to_f64().max(1.0);
            if *last <= floor || last <= first || *last <= opts.tol * scale {
                HeadDiagnostic::Converging {
                    last_difference: *last,
                }
            } else {
                return Err(Error::NoLimit(format!(
                    "successive extrapolants grow from {first:e} to {last:e}; the series may be \
                     unbounded or the schedule/precision insufficient (last estimate {})",
                    fmt_float(&estimates.last().unwrap().re, 12)
                )));
            }
        }
    };
    let last = estimates.last().expect("at least one estimate").clone();
    let value = BigComplex::new(Float::with_val(prec, &last.re), Float::with_val(prec, &last.im));
    Ok(HeadRecovery {
        value,
        samples,
        estimates,
        differences,
        order,
        diagnostic,
    })
}
