//! Backward shift `σ`, left extension, σ^k-membership at infinity and the
//! resolvent of `σ − λ`.

use rayon::prelude::*;
use rug::ops::Pow;
use rug::{Float, Rational};

use crate::error::{Error, Result};
use crate::num::{BigComplex, CInterval, CRational, Interval};
use crate::series::{eval_auto, tail_bound, SeriesSpec};

/// `σ^k s`: `coeff(result, n) = coeff(s, n + k)`.
pub fn shift(s: &SeriesSpec, k: usize) -> SeriesSpec {
    s.shift(k)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Growth {
    Bounded,
    Unbounded,
    Undetermined,
}

impl Growth {
    pub fn name(self) -> &'static str {
        match self {
            Growth::Bounded => "bounded",
            Growth::Unbounded => "unbounded",
            Growth::Undetermined => "undetermined",
        }
    }
}

/// Samples of `|x f(x)|` at large `|x|`. Evidence only.
#[derive(Clone, Debug)]
pub struct ExtensionDiagnostic {
    pub samples: Vec<(Float, Float)>,
    pub verdict: Growth,
}

pub const DEFAULT_PROBES: [i32; 3] = [1, 2, 3];

/// `c + x·f(x)`, with a diagnostic of `|x f(x)|` at `x = ±10^e` for `e` in
/// `exponents`.
pub fn left_extend(
    s: &SeriesSpec,
    c: CRational,
    exponents: &[i32],
    prec: u32,
) -> Result<(SeriesSpec, ExtensionDiagnostic)> {
    let ext = s.left_extend(c);
    let xf = ext.sub(&SeriesSpec::explicit([ext.coeff(0)?.as_rational().unwrap_or_default()]));
    let mut pts: Vec<Float> = Vec::new();
    for &e in exponents {
        let x = Float::with_val(prec, Pow::pow(Float::with_val(prec, 10u32), e));
        pts.push(Float::with_val(prec, -&x));
        pts.push(x);
    }
    let samples: Vec<(Float, Float)> = pts
        .into_par_iter()
        .map(|x| {
            let v = eval_auto(&xf, &BigComplex::real(x.clone()), prec)?;
            Ok((x, v.value.abs()))
        })
        .collect::<Result<_>>()?;
    let verdict = growth_verdict(&samples);
    Ok((ext, ExtensionDiagnostic { samples, verdict }))
}

// ordered by |x| in pairs (−x, x)
fn growth_verdict(samples: &[(Float, Float)]) -> Growth {
    if samples.len() < 4 {
        return Growth::Undetermined;
    }
    let first = samples[..2].iter().map(|s| s.1.to_f64()).fold(0f64, f64::max);
    let last = samples[samples.len() - 2..]
        .iter()
        .map(|s| s.1.to_f64())
        .fold(0f64, f64::max);
    let overall = samples.iter().map(|s| s.1.to_f64()).fold(0f64, f64::max);
    if last > 10.0 * first.max(1.0) {
        Growth::Unbounded
    } else if overall <= 4.0 * first.max(1.0) {
        Growth::Bounded
    } else {
        Growth::Undetermined
    }
}

/// Whether `s` is constant (`σ^k s = 0` forces `σ s = 0` for bounded `s`).
/// Exact for polynomial rules; otherwise checks `horizon` coefficients.
pub fn kernel_test(s: &SeriesSpec, k: usize, horizon: usize) -> Result<bool> {
    let _ = k;
    let end = s.polynomial_len().unwrap_or(horizon + 1).max(1);
    for n in 1..end {
        if s.coeff(n)?.is_zero() != Some(true) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Whether `σ^k s` vanishes on the same horizon.
pub fn shift_vanishes(s: &SeriesSpec, k: usize, horizon: usize) -> Result<bool> {
    let t = s.shift(k);
    let end = t.polynomial_len().unwrap_or(horizon + 1);
    for n in 0..end {
        if t.coeff(n)?.is_zero() != Some(true) {
            return Ok(false);
        }
    }
    Ok(true)
}

// ---------------------------------------------------------------------------
// Peano expansion at infinity

/// `f(1/x) = c_1 x + … + c_{k−1} x^{k−1} + O(x^k)` evidence.
#[derive(Clone, Debug)]
pub struct PeanoExpansion {
    pub k: usize,
    /// `c_1 … c_{k−1}`.
    pub coefficients: Vec<BigComplex>,
    pub remainder: RemainderEvidence,
    /// `max_j |c_j(A) − c_j(B)| / max(1, |c_j|)` over the two interleaved
    /// sub-schedules.
    pub spread: f64,
    pub samples: usize,
}

/// `r(y) = y^k (f(y) − Σ c_j y^{−j})` on the sampled schedule, grouped by
/// the first and last third of `|y|`.
#[derive(Clone, Debug)]
pub struct RemainderEvidence {
    pub max_first: f64,
    pub max_last: f64,
    pub growth: f64,
}

#[derive(Clone, Debug)]
pub enum PeanoOutcome {
    Accepted(PeanoExpansion),
    Rejected {
        stage: usize,
        reason: String,
        /// `(y, |r(y)|)` at the rejecting stage.
        samples: Vec<(f64, f64)>,
    },
}

impl PeanoOutcome {
    pub fn is_accepted(&self) -> bool {
        matches!(self, PeanoOutcome::Accepted(_))
    }
}

#[derive(Clone, Debug)]
pub struct PeanoOptions {
    /// Sample magnitudes `|y|`; both signs are used.
    pub schedule: Vec<Float>,
    /// Relative tolerance for coefficient agreement across sub-schedules.
    pub tol: f64,
    /// Allowed growth of the remainder from the first to the last third.
    pub growth: f64,
    /// Samples whose certified truncation needs more terms are dropped.
    pub max_terms: usize,
}

impl PeanoOptions {
    /// `|y| = 16·2^{i/4}`, `i = 0..=24` (16 … 1024).
    pub fn standard(prec: u32) -> Self {
        let schedule = (0..=24)
            .map(|i| Float::with_val(prec, i as f64 / 4.0 + 4.0).exp2())
            .collect();
        PeanoOptions {
            schedule,
            tol: 0.1,
            growth: 4.0,
            max_terms: 12_000,
        }
    }
}

/// Least squares for `v ≈ Σ_{p=1}^{d} β_p y^p` (normal equations, Gaussian
/// elimination with partial pivoting at `prec` bits).
fn lsq(ys: &[Float], vs: &[Float], d: usize, prec: u32) -> Vec<Float> {
    if d == 0 {
        return Vec::new();
    }
    let mut a = vec![vec![Float::new(prec); d + 1]; d];
    for (y, v) in ys.iter().zip(vs) {
        let mut pw = Vec::with_capacity(d);
        let mut t = Float::with_val(prec, y);
        for _ in 0..d {
            pw.push(t.clone());
            t *= y;
        }
        for i in 0..d {
            for j in 0..d {
                a[i][j] += Float::with_val(prec, &pw[i] * &pw[j]);
            }
            a[i][d] += Float::with_val(prec, &pw[i] * v);
        }
    }
    for col in 0..d {
        let piv = (col..d)
            .max_by(|&i, &j| a[i][col].clone().abs().partial_cmp(&a[j][col].clone().abs()).unwrap())
            .unwrap();
        a.swap(col, piv);
        if a[col][col].is_zero() {
            continue;
        }
        for row in 0..d {
            if row != col {
                let f = Float::with_val(prec, &a[row][col] / &a[col][col]);
                for j in col..=d {
                    let t = Float::with_val(prec, &f * &a[col][j]);
                    a[row][j] -= t;
                }
            }
        }
    }
    (0..d)
        .map(|i| {
            if a[i][i].is_zero() {
                Float::new(prec)
            } else {
                Float::with_val(prec, &a[i][d] / &a[i][i])
            }
        })
        .collect()
}

struct Fit {
    coeffs_re: Vec<Float>,
    coeffs_im: Vec<Float>,
    resid: Vec<f64>,
}

/// Fit `y^ℓ f(y) ≈ Σ_{j<ℓ} c_j y^{ℓ−j}` and return the residuals.
fn fit_level(ys: &[Float], fs: &[BigComplex], l: usize, prec: u32) -> Fit {
    let scaled: Vec<(Float, Float)> = ys
        .iter()
        .zip(fs)
        .map(|(y, f)| {
            let yl = Float::with_val(prec, Pow::pow(y, l as u32));
            (Float::with_val(prec, &f.re * &yl), Float::with_val(prec, &f.im * &yl))
        })
        .collect();
    let d = l.saturating_sub(1);
    let re: Vec<Float> = scaled.iter().map(|p| p.0.clone()).collect();
    let im: Vec<Float> = scaled.iter().map(|p| p.1.clone()).collect();
    // β_p multiplies y^p, i.e. c_{ℓ−p}.
    let br = lsq(ys, &re, d, prec);
    let bi = lsq(ys, &im, d, prec);
    let resid = ys
        .iter()
        .enumerate()
        .map(|(i, y)| {
            let (mut r, mut m) = (re[i].clone(), im[i].clone());
            let mut t = Float::with_val(prec, y);
            for p in 0..d {
                r -= Float::with_val(prec, &br[p] * &t);
                m -= Float::with_val(prec, &bi[p] * &t);
                t *= y;
            }
            BigComplex::new(r, m).abs().to_f64()
        })
        .collect();
    // c_j = β_{ℓ−j}
    let coeffs_re = (1..l).map(|j| br[l - j - 1].clone()).collect();
    let coeffs_im = (1..l).map(|j| bi[l - j - 1].clone()).collect();
    Fit {
        coeffs_re,
        coeffs_im,
        resid,
    }
}

/// Numerical decision of `f ∈ σ^k(B)` from the behaviour of `f(y)` as
/// `|y| → ∞`: stage `ℓ = 1 … k` fits `y^ℓ f(y)` by a polynomial of degree
/// `ℓ − 1` without constant term and requires the residual to stay bounded
/// (growth from the first to the last third of the schedule within
/// `opts.growth`). A heuristic, not a proof; `s` is assumed bounded.
pub fn peano_membership(
    s: &SeriesSpec,
    k: usize,
    opts: &PeanoOptions,
    prec: u32,
) -> Result<PeanoOutcome> {
    if k == 0 {
        return Err(Error::InvalidArgument("membership level k must be >= 1".into()));
    }
    if opts.schedule.len() < 6 {
        return Err(Error::InvalidArgument("schedule needs at least 6 points".into()));
    }
    let mut mags: Vec<Float> = opts
        .schedule
        .iter()
        .map(|y| Float::with_val(prec, y.abs_ref()))
        .filter(|y| {
            let target = Float::with_val(prec, 1) >> prec;
            tail_bound(s, y, opts.max_terms, prec + 32).is_some_and(|t| t <= target)
        })
        .collect();
    mags.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if mags.len() < 6 {
        return Err(Error::Inconclusive(format!(
            "only {} schedule points are within the {}-term evaluation budget",
            mags.len(),
            opts.max_terms
        )));
    }
    let mut ys: Vec<Float> = Vec::new();
    for y in &mags {
        ys.push(Float::with_val(prec, -y));
        ys.push(y.clone());
    }
    let fs: Vec<BigComplex> = ys
        .par_iter()
        .map(|y| eval_auto(s, &BigComplex::real(y.clone()), prec).map(|e| e.value))
        .collect::<Result<_>>()?;

    let wp = prec * 2;
    let n = ys.len();
    let third = (n / 3).max(2);
    let mut last_fit = None;
    let mut last_ev = None;
    for l in 1..=k {
        let fit = fit_level(&ys, &fs, l, wp);
        let max_first = fit.resid[..third].iter().cloned().fold(0f64, f64::max);
        let max_last = fit.resid[n - third..].iter().cloned().fold(0f64, f64::max);
        let floor = 2f64.powi(-(prec as i32 / 2));
        let growth = max_last / max_first.max(floor);
        if !(max_last <= opts.growth * max_first.max(floor)) {
            return Ok(PeanoOutcome::Rejected {
                stage: l,
                reason: format!(
                    "y^{l}·(f(y) − fitted head) grows by {growth:.3e} across the schedule"
                ),
                samples: ys.iter().map(|y| y.to_f64()).zip(fit.resid.iter().cloned()).collect(),
            });
        }
        last_ev = Some(RemainderEvidence {
            max_first,
            max_last,
            growth,
        });
        last_fit = Some(fit);
    }
    let fit = last_fit.expect("k >= 1");

    // Stability: the same fit on the two interleaved halves of |y|.
    let pick = |parity: usize| -> (Vec<Float>, Vec<BigComplex>) {
        ys.iter()
            .zip(&fs)
            .enumerate()
            .filter(|(i, _)| (i / 2) % 2 == parity)
            .map(|(_, (y, f))| (y.clone(), f.clone()))
            .unzip()
    };
    let (ya, fa) = pick(0);
    let (yb, fb) = pick(1);
    let (ca, cb) = (fit_level(&ya, &fa, k, wp), fit_level(&yb, &fb, k, wp));
    let mut spread = 0f64;
    for j in 0..k - 1 {
        let a = BigComplex::new(ca.coeffs_re[j].clone(), ca.coeffs_im[j].clone());
        let b = BigComplex::new(cb.coeffs_re[j].clone(), cb.coeffs_im[j].clone());
        let c = BigComplex::new(fit.coeffs_re[j].clone(), fit.coeffs_im[j].clone());
        let d = BigComplex::new(
            Float::with_val(wp, &a.re - &b.re),
            Float::with_val(wp, &a.im - &b.im),
        )
        .abs()
        .to_f64();
        spread = spread.max(d / c.abs().to_f64().max(1.0));
    }
    if spread > opts.tol {
        return Ok(PeanoOutcome::Rejected {
            stage: k,
            reason: format!("coefficients differ by {spread:.3e} between sub-schedules"),
            samples: ys.iter().map(|y| y.to_f64()).zip(fit.resid.iter().cloned()).collect(),
        });
    }
    let coefficients = fit
        .coeffs_re
        .iter()
        .zip(&fit.coeffs_im)
        .map(|(r, i)| BigComplex::new(Float::with_val(prec, r), Float::with_val(prec, i)))
        .collect();
    Ok(PeanoOutcome::Accepted(PeanoExpansion {
        k,
        coefficients,
        remainder: last_ev.expect("k >= 1"),
        spread,
        samples: n,
    }))
}

// ---------------------------------------------------------------------------
// Resolvent

#[derive(Clone, Debug)]
pub struct ResolventSolution {
    pub lambda: CRational,
    pub g: SeriesSpec,
    /// `f_0 = −λ^{−1} g(λ^{−1})`.
    pub f0: BigComplex,
    /// `f_0 … f_N`.
    pub coefficients: Vec<BigComplex>,
    /// `max_{n<N} |f_{n+1} − λ f_n − g_n|`.
    pub residual_max: Float,
    /// Largest enclosure radius among the `f_n` (conditioning).
    pub radius_max: Float,
    pub working_precision: u32,
    /// Whether `1/λ` is real (otherwise `g` was evaluated off the line).
    pub inverse_is_real: bool,
}

fn lambda_enclosure(lambda: &CRational, wp: u32) -> CInterval {
    CInterval::from_crational(wp, lambda)
}

/// Coefficients of `(σ − λ)^{−1} g` at `4·prec` bits.
pub fn resolvent_solve(
    g: &SeriesSpec,
    lambda: &CRational,
    n: usize,
    prec: u32,
) -> Result<ResolventSolution> {
    if lambda.is_zero() {
        return Err(Error::ZeroLambda);
    }
    let wp = 4 * prec;
    let inv = lambda.recip().ok_or(Error::ZeroLambda)?;
    let at = BigComplex::from_crational(wp, &inv);
    let gv = eval_auto(g, &at, wp)?;
    let f0 = CInterval::from_crational(wp, &inv).mul(&gv.enclosure).neg();
    let f0_mid = f0.mid();
    let orbit = resolvent_orbit(g, lambda, &f0, n, wp)?;
    let f0_point = BigComplex::new(Float::with_val(prec, &f0_mid.re), Float::with_val(prec, &f0_mid.im));
    Ok(ResolventSolution {
        lambda: lambda.clone(),
        g: g.clone(),
        f0: f0_point,
        coefficients: orbit.values,
        residual_max: orbit.residual_max,
        radius_max: orbit.radius_max,
        working_precision: wp,
        inverse_is_real: inv.is_real(),
    })
}

/// The recurrence `f_{n+1} = λ f_n + g_n` from a given `f_0`.
#[derive(Clone, Debug)]
pub struct Orbit {
    pub values: Vec<BigComplex>,
    pub residual_max: Float,
    pub radius_max: Float,
}

pub fn resolvent_orbit(
    g: &SeriesSpec,
    lambda: &CRational,
    f0: &CInterval,
    n: usize,
    wp: u32,
) -> Result<Orbit> {
    let lam = lambda_enclosure(lambda, wp);
    let lam_mid = BigComplex::from_crational(wp, lambda);
    let gs = g.coeffs(0, n)?;
    let mut f = f0.clone();
    let mut values = vec![f.mid()];
    let mut radius_max = f.radius();
    let mut residual_max = Float::new(wp);
    for gn in &gs {
        let ge = gn.enclose(wp);
        let next = lam.mul(&f).add(&ge);
        // Residual of the stored midpoints.
        let (prev, cur) = (values.last().unwrap().clone(), next.mid());
        let gm = ge.mid();
        let lr = Float::with_val(wp, &lam_mid.re * &prev.re) - Float::with_val(wp, &lam_mid.im * &prev.im);
        let li = Float::with_val(wp, &lam_mid.re * &prev.im) + Float::with_val(wp, &lam_mid.im * &prev.re);
        let rr = Float::with_val(wp, &cur.re - &lr) - &gm.re;
        let ri = Float::with_val(wp, &cur.im - &li) - &gm.im;
        let res = BigComplex::new(rr, ri).abs();
        if res > residual_max {
            residual_max = res;
        }
        let rad = next.radius();
        if rad > radius_max {
            radius_max = rad;
        }
        values.push(cur);
        f = next;
    }
    Ok(Orbit {
        values,
        residual_max,
        radius_max,
    })
}

/// Perturb `f_0` by `eps` and run the recurrence; the difference is
/// `λ^n·eps` exactly, so a bounded solution is unique.
pub fn perturbed_orbit(sol: &ResolventSolution, eps: &Rational, n: usize) -> Result<Orbit> {
    let wp = sol.working_precision;
    let base = CInterval::from_complex(&sol.coefficients[0]);
    let shifted = base.add(&CInterval::real(Interval::from_rational(wp, eps)));
    resolvent_orbit(&sol.g, &sol.lambda, &shifted, n, wp)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shift_basics() {
        let s = shift(&SeriesSpec::sin(), 1);
        assert_eq!(s.coeff(0).unwrap().as_rational().unwrap(), CRational::from_i64(1));
        assert!(s.coeff(1).unwrap().is_zero().unwrap());
        assert_eq!(
            s.coeff(2).unwrap().as_rational().unwrap(),
            CRational::real(Rational::from((-1, 6)))
        );
        let e = shift(&SeriesSpec::explicit_i64(&[1, 2, 3]), 2);
        assert_eq!(e, SeriesSpec::explicit_i64(&[3]));
    }

    #[test]
    fn left_extension_diagnostics() {
        let (ext, d) = left_extend(&SeriesSpec::sin(), CRational::zero(), &DEFAULT_PROBES, 128).unwrap();
        assert_eq!(ext.coeff(2).unwrap().as_rational().unwrap(), CRational::from_i64(1));
        assert_eq!(d.verdict, Growth::Unbounded);

        let (c, d) = left_extend(&SeriesSpec::explicit_i64(&[0]), CRational::from_i64(5), &DEFAULT_PROBES, 64).unwrap();
        assert_eq!(c.coeff(0).unwrap().as_rational().unwrap(), CRational::from_i64(5));
        assert!(c.coeff(1).unwrap().is_zero().unwrap());
        assert_eq!(d.verdict, Growth::Bounded);
    }

    #[test]
    fn kernel() {
        assert!(kernel_test(&SeriesSpec::explicit_i64(&[7]), 1, 1000).unwrap());
        let x2 = SeriesSpec::explicit_i64(&[0, 0, 1]);
        assert!(!kernel_test(&x2, 3, 1000).unwrap());
        assert!(shift_vanishes(&x2, 3, 1000).unwrap());
        assert!(!kernel_test(&SeriesSpec::sin(), 1, 100).unwrap());
    }

    #[test]
    fn peano_sin() {
        let opts = PeanoOptions::standard(256);
        let r = peano_membership(&SeriesSpec::sin(), 1, &opts, 256).unwrap();
        assert!(matches!(r, PeanoOutcome::Rejected { stage: 1, .. }), "{r:?}");
        let s2 = shift(&SeriesSpec::sin(), 2);
        match peano_membership(&s2, 2, &opts, 256).unwrap() {
            PeanoOutcome::Accepted(p) => {
                // f(y) = (sin y − y)/y²: c_1 = −1.
                assert!((p.coefficients[0].re.to_f64() + 1.0).abs() < 1e-2, "{p:?}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn peano_levels() {
        let opts = PeanoOptions::standard(256);
        for k in 1..=4 {
            let s = shift(&SeriesSpec::sin(), k);
            let r = peano_membership(&s, k, &opts, 256).unwrap();
            assert!(r.is_accepted(), "k = {k}: {r:?}");
        }
        let g = SeriesSpec::gaussian(Rational::from(1), 0).unwrap();
        match peano_membership(&g, 8, &opts, 256).unwrap() {
            PeanoOutcome::Accepted(p) => {
                assert_eq!(p.coefficients.len(), 7);
                assert!(p.coefficients.iter().all(|c| c.abs() < 1e-20));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn resolvent_constant() {
        let g = SeriesSpec::explicit_i64(&[1]);
        let sol = resolvent_solve(&g, &CRational::from_i64(2), 10, 64).unwrap();
        assert_eq!(sol.f0.re, -0.5);
        for v in &sol.coefficients[1..] {
            assert!(v.abs() < 1e-60);
        }
        assert!(matches!(
            resolvent_solve(&g, &CRational::zero(), 5, 64),
            Err(Error::ZeroLambda)
        ));
    }

    #[test]
    fn resolvent_sin() {
        let sol = resolvent_solve(&SeriesSpec::sin(), &CRational::from_i64(1), 100, 256).unwrap();
        let want = -Float::with_val(1024, 1).sin();
        let d = Float::with_val(1024, &sol.f0.re - &want).abs();
        assert!(d < Float::with_val(64, 1) >> 200u32);
        assert!(sol.residual_max < Float::with_val(64, 1) >> 246u32);
    }
}
