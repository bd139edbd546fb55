//! ℓ¹, uniform-on-ℝ and compact convergence on bounded power series: exact
//! ℓ¹ identities, separating families, and the `exp(−z^{2m})` erratum.

use std::fmt::Write as _;

use rayon::prelude::*;
use rug::float::Round;
use rug::ops::Pow;
use rug::{Float, Rational};

use crate::error::{Error, Result};
use crate::num::{fmt_float, fmt_rational, BigComplex, CRational, Interval};
use crate::series::{
    auto_truncation, eval_auto, eval_many, l1_norm, sup_norm_estimate, L1Norm, SeriesSpec, SupDomain,
    SupGrid,
};

/// `Σ_{n≤N} |a_n − b_n|` with the tail bound when the rules have one.
pub fn l1_distance(s: &SeriesSpec, t: &SeriesSpec, n: usize, prec: u32) -> Result<L1Norm> {
    l1_norm(&s.sub(t), n, prec)
}

/// `‖s − t‖_{ℓ¹}` enclosed to width about `2^{−prec}` (truncation doubled
/// until the tail is below that).
pub fn l1_distance_auto(s: &SeriesSpec, t: &SeriesSpec, prec: u32) -> Result<Interval> {
    if s == t {
        return Ok(Interval::zero(prec));
    }
    let d = s.sub(t);
    let target = Float::with_val(prec, 1) >> prec;
    let mut n = 32usize;
    loop {
        let l = l1_norm(&d, n, prec + 32)?;
        match l.tail.as_ref() {
            None => {
                return Err(Error::Inapplicable(format!(
                    "no tail majorant for {}",
                    d.rule().name()
                )))
            }
            Some(t) if *t <= target => return Ok(l.enclosure().expect("tail present")),
            Some(_) if n >= 1 << 20 => {
                return Err(Error::Inconclusive("l1 tail did not settle".into()))
            }
            Some(_) => n *= 2,
        }
    }
}

/// Max of certified lower bounds of `|f|` at `points` equally spaced points
/// on `|z| = r`. A lower bound for the max modulus on the disc.
pub fn compact_sup(s: &SeriesSpec, r: &Float, points: usize, prec: u32) -> Result<Float> {
    let n = auto_truncation(s, r, prec)
        .ok_or_else(|| Error::Inapplicable(format!("no tail majorant for {}", s.rule().name())))?;
    let pts = points.max(1);
    let wp = prec + 16;
    let two_pi = Float::with_val(wp, rug::float::Constant::Pi) * 2u32;
    let zs: Vec<BigComplex> = (0..pts)
        .map(|k| {
            let th = Float::with_val(wp, &two_pi * k as u32) / pts as u32;
            let (sn, cs) = th.sin_cos(Float::new(wp));
            BigComplex::new(Float::with_val(wp, r * &cs), Float::with_val(wp, r * &sn))
        })
        .collect();
    let vals: Vec<Float> = eval_many(s, &zs, n, prec)?.iter().map(|e| e.abs_lower()).collect();
    Ok(vals.into_iter().fold(Float::new(prec), |a, b| if b > a { b } else { a }))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    /// `exp(−z²/m) → 1`: compactly, not uniformly on ℝ.
    ExpNegSqOverM,
    /// `(1/m) sin(mz) → 0`: uniformly on ℝ, not in ℓ¹.
    SinScaled,
    /// `exp(−z^{2m})`, the family as originally stated; its ℓ¹ distance to 1
    /// is `e − 1` for every `m`.
    ExpNeg2m,
    /// `exp(−(z/2)^{2m})`, the corrected family: `ℓ¹` distance `e^{4^{−m}} − 1`.
    ExpNegHalf2m,
}

impl Family {
    pub const ALL: [Family; 4] = [
        Family::ExpNegSqOverM,
        Family::SinScaled,
        Family::ExpNeg2m,
        Family::ExpNegHalf2m,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::ExpNegSqOverM => "exp_neg_sq_over_m",
            Family::SinScaled => "sin_scaled",
            Family::ExpNeg2m => "exp_neg2m",
            Family::ExpNegHalf2m => "exp_neg_half2m",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Family::ExpNegSqOverM => "exp(-z^2/m) vs 1",
            Family::SinScaled => "sin(mz)/m vs 0",
            Family::ExpNeg2m => "exp(-z^(2m)) vs 1 [as stated; erratum]",
            Family::ExpNegHalf2m => "exp(-(z/2)^(2m)) vs 1 [corrected]",
        }
    }

    pub fn series(self, m: u32) -> Result<SeriesSpec> {
        match self {
            Family::ExpNegSqOverM => SeriesSpec::exp_neg_sq_over_m(m),
            Family::SinScaled => SeriesSpec::sin_scaled(m),
            Family::ExpNeg2m => SeriesSpec::exp_neg_2m(m),
            Family::ExpNegHalf2m => SeriesSpec::exp_neg_half_2m(m),
        }
    }

    pub fn limit(self) -> SeriesSpec {
        match self {
            Family::SinScaled => SeriesSpec::explicit_i64(&[0]),
            _ => SeriesSpec::explicit_i64(&[1]),
        }
    }

    /// Closed form of the ℓ¹ distance to the limit.
    pub fn l1_closed_form(self, m: u32, prec: u32) -> Float {
        let one = Float::with_val(prec, 1);
        match self {
            Family::ExpNegSqOverM => (one / m).exp_m1(),
            Family::SinScaled => Float::with_val(prec, m).sinh() / m,
            Family::ExpNeg2m => one.exp_m1(),
            Family::ExpNegHalf2m => {
                let q = Float::with_val(prec, Pow::pow(Float::with_val(prec, 4u32), -(m as i32)));
                q.exp_m1()
            }
        }
    }

    /// Real half-width on which `sup_ℝ |f − limit|` is essentially attained.
    pub fn sup_radius(self, m: u32, prec: u32) -> Float {
        let r = match self {
            Family::ExpNegSqOverM => (40.0 * m as f64).sqrt(),
            Family::SinScaled => 4.0 / m as f64,
            Family::ExpNeg2m => 40f64.powf(1.0 / (2.0 * m as f64)),
            Family::ExpNegHalf2m => 2.0 * 40f64.powf(1.0 / (2.0 * m as f64)),
        };
        Float::with_val(prec, r)
    }

    fn probes(self) -> Vec<(i64, i64)> {
        match self {
            Family::ExpNegHalf2m => vec![(0, 1), (0, 3)],
            _ => vec![(0, 1)],
        }
    }
}

#[derive(Clone, Debug)]
pub struct Probe {
    pub z: (i64, i64),
    pub value: BigComplex,
    pub abs: Float,
}

#[derive(Clone, Debug)]
pub struct TopologyReport {
    pub family: Family,
    pub m: u32,
    pub l1_distance_to_limit: Interval,
    pub l1_closed_form: Float,
    /// Certified lower bound on `sup_ℝ |f − limit|`.
    pub supr_distance_lower: Float,
    /// `r ↦` sampled lower bound on `max_{|z|=r} |f − limit|`.
    pub compact_sup: Vec<(Rational, Float)>,
    pub pointwise_probe: Vec<Probe>,
}

impl TopologyReport {
    /// Whether the sampled compact sups are nondecreasing in `r`, within
    /// the relative slack allowed by sampling.
    pub fn compact_sup_monotone(&self) -> bool {
        self.compact_sup
            .windows(2)
            .all(|w| w[1].1.to_f64() >= w[0].1.to_f64() * (1.0 - 1e-9))
    }
}

#[derive(Clone, Debug)]
pub struct SuiteConfig {
    pub m_values: Vec<u32>,
    pub radii: Vec<Rational>,
    pub circle_points: usize,
    pub sup_grid: SupGrid,
    pub families: Vec<Family>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            m_values: (1..=10).collect(),
            radii: vec![Rational::from((1, 2)), Rational::from(1)],
            circle_points: 1024,
            sup_grid: SupGrid::default(),
            families: Family::ALL.to_vec(),
        }
    }
}

pub fn topology_report(family: Family, m: u32, cfg: &SuiteConfig, prec: u32) -> Result<TopologyReport> {
    let s = family.series(m)?;
    let limit = family.limit();
    let d = s.sub(&limit);
    let l1 = l1_distance_auto(&s, &limit, prec)?;
    let sup = sup_norm_estimate(
        &d,
        &SupDomain::Real {
            radius: family.sup_radius(m, prec),
        },
        &cfg.sup_grid,
        prec,
    )?;
    let mut compact = Vec::new();
    for r in &cfg.radii {
        let rf = Float::with_val(prec, r);
        compact.push((r.clone(), compact_sup(&d, &rf, cfg.circle_points, prec)?));
    }
    let mut probes = Vec::new();
    for (re, im) in family.probes() {
        let z = BigComplex::from_f64(prec, re as f64, im as f64);
        let v = eval_auto(&s, &z, prec)?.value;
        let a = v.abs();
        probes.push(Probe { z: (re, im), value: v, abs: a });
    }
    Ok(TopologyReport {
        family,
        m,
        l1_distance_to_limit: l1,
        l1_closed_form: family.l1_closed_form(m, prec),
        supr_distance_lower: sup.lower,
        compact_sup: compact,
        pointwise_probe: probes,
    })
}

/// One report per `(family, m)`, in family-major order.
pub fn counterexample_suite(cfg: &SuiteConfig, prec: u32) -> Result<Vec<TopologyReport>> {
    let jobs: Vec<(Family, u32)> = cfg
        .families
        .iter()
        .flat_map(|&f| cfg.m_values.iter().map(move |&m| (f, m)))
        .collect();
    jobs.par_iter()
        .map(|&(f, m)| topology_report(f, m, cfg, prec))
        .collect()
}

#[derive(Clone, Debug)]
pub struct ErratumReport {
    pub m_values: Vec<u32>,
    /// `‖exp(−z^{2m}) − 1‖_{ℓ¹}`.
    pub original: Vec<Interval>,
    /// `‖exp(−(z/2)^{2m}) − 1‖_{ℓ¹}`.
    pub corrected: Vec<Interval>,
    pub e_minus_one: Float,
    /// Every original distance encloses `e − 1`.
    pub original_constant: bool,
    pub corrected_strictly_decreasing: bool,
    /// Corrected distances match `e^{4^{−m}} − 1`.
    pub corrected_matches_closed_form: bool,
}

pub fn erratum_report(m_values: &[u32], prec: u32) -> Result<ErratumReport> {
    let one = SeriesSpec::explicit_i64(&[1]);
    let original: Vec<Interval> = m_values
        .par_iter()
        .map(|&m| l1_distance_auto(&SeriesSpec::exp_neg_2m(m)?, &one, prec))
        .collect::<Result<_>>()?;
    let corrected: Vec<Interval> = m_values
        .par_iter()
        .map(|&m| l1_distance_auto(&SeriesSpec::exp_neg_half_2m(m)?, &one, prec))
        .collect::<Result<_>>()?;
    let e1 = Float::with_val(prec, 1).exp_m1();
    let tol = Float::with_val(prec, 1) >> (prec - 8);
    let close = |iv: &Interval, x: &Float| iv.inflate(&tol).contains(x);
    let original_constant = original.iter().all(|iv| close(iv, &e1));
    let corrected_strictly_decreasing = corrected.windows(2).all(|w| w[1].hi() < w[0].lo());
    let corrected_matches_closed_form = m_values
        .iter()
        .zip(&corrected)
        .all(|(&m, iv)| close(iv, &Family::ExpNegHalf2m.l1_closed_form(m, prec)));
    Ok(ErratumReport {
        m_values: m_values.to_vec(),
        original,
        corrected,
        e_minus_one: e1,
        original_constant,
        corrected_strictly_decreasing,
        corrected_matches_closed_form,
    })
}

impl ErratumReport {
    pub fn to_json(&self, digits: usize) -> serde_json::Value {
        let rows: Vec<serde_json::Value> = self
            .m_values
            .iter()
            .enumerate()
            .map(|(i, m)| {
                serde_json::json!({
                    "m": m,
                    "original_l1_distance": fmt_float(&self.original[i].mid(), digits),
                    "corrected_l1_distance": fmt_float(&self.corrected[i].mid(), digits),
                })
            })
            .collect();
        serde_json::json!({
            "claim": "exp(-z^(2m)) -> 1 in l1 as m -> infinity",
            "finding": if self.original_constant {
                "does not hold: the l1 distance to 1 equals e - 1 for every m"
            } else {
                "l1 distance to 1 is not constant in m"
            },
            "e_minus_one": fmt_float(&self.e_minus_one, digits),
            "original_constant": self.original_constant,
            "corrected_family": "exp(-(z/2)^(2m)), l1 distance exp(4^-m) - 1",
            "corrected_strictly_decreasing": self.corrected_strictly_decreasing,
            "corrected_matches_closed_form": self.corrected_matches_closed_form,
            "rows": rows,
        })
    }
}

#[derive(Clone, Debug)]
pub struct DensityRow {
    pub lambda: Rational,
    /// `‖z^m e^{−λz²} − z^m‖_{ℓ¹}` from the coefficients.
    pub l1: Interval,
    /// `e^λ − 1`.
    pub l1_closed_form: Float,
    /// `r^m (e^{λr²} − 1)`.
    pub bound: Float,
    /// Sampled lower bound on `max_{|z|=r} |z^m e^{−λz²} − z^m|`.
    pub sampled_sup: Float,
}

impl DensityRow {
    pub fn within_bound(&self) -> bool {
        self.sampled_sup <= self.bound
    }
}

pub fn density_demo(
    m: u32,
    lambdas: &[Rational],
    r: &Rational,
    points: usize,
    prec: u32,
) -> Result<Vec<DensityRow>> {
    if *r <= 0 {
        return Err(Error::InvalidArgument("radius must be positive".into()));
    }
    let mut zm = vec![CRational::zero(); m as usize + 1];
    zm[m as usize] = CRational::from_i64(1);
    let base = SeriesSpec::explicit(zm);
    lambdas
        .par_iter()
        .map(|lam| {
            if *lam <= 0 {
                return Err(Error::InvalidArgument(format!("lambda must be positive, got {lam}")));
            }
            let g = SeriesSpec::gaussian(lam.clone(), m)?;
            let l1 = l1_distance_auto(&g, &base, prec)?;
            let lf = Float::with_val(prec, lam);
            let rf = Float::with_val(prec, r);
            let closed = Float::with_val(prec, lf.exp_m1_ref());
            let arg = Float::with_val(prec, &lf * Float::with_val(prec, rf.square_ref()));
            let bound = Float::with_val_round(
                prec,
                Float::with_val(prec, Pow::pow(&rf, m)) * arg.exp_m1(),
                Round::Up,
            )
            .0;
            let sampled = compact_sup(&g.sub(&base), &rf, points, prec)?;
            Ok(DensityRow {
                lambda: lam.clone(),
                l1,
                l1_closed_form: closed,
                bound,
                sampled_sup: sampled,
            })
        })
        .collect()
}

/// The three-topologies table as Markdown.
pub fn reports_markdown(reports: &[TopologyReport], digits: usize) -> String {
    let radii: Vec<String> = reports
        .first()
        .map(|r| r.compact_sup.iter().map(|(q, _)| fmt_rational(q)).collect())
        .unwrap_or_default();
    let mut out = String::new();
    let _ = write!(out, "| family | m | l1 distance | closed form | sup_R distance (lower) |");
    for r in &radii {
        let _ = write!(out, " max |z|={r} (lower) |");
    }
    out.push_str(" probes |\n|---|---|---|---|---|");
    for _ in &radii {
        out.push_str("---|");
    }
    out.push_str("---|\n");
    for rep in reports {
        let _ = write!(
            out,
            "| {} | {} | {} | {} | {} |",
            rep.family.label(),
            rep.m,
            fmt_float(&rep.l1_distance_to_limit.mid(), digits),
            fmt_float(&rep.l1_closed_form, digits),
            fmt_float(&rep.supr_distance_lower, digits)
        );
        for (_, v) in &rep.compact_sup {
            let _ = write!(out, " {} |", fmt_float(v, digits));
        }
        let probes: Vec<String> = rep
            .pointwise_probe
            .iter()
            .map(|p| format!("|f({})| = {}", fmt_z(p.z), fmt_float(&p.abs, digits)))
            .collect();
        let _ = writeln!(out, " {} |", probes.join("; "));
    }
    out
}

pub fn reports_csv(reports: &[TopologyReport], digits: usize) -> String {
    let mut out = String::from("family,m,l1_distance,l1_closed_form,supr_distance_lower,radius,compact_sup\n");
    for rep in reports {
        for (r, v) in &rep.compact_sup {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                rep.family.name(),
                rep.m,
                fmt_float(&rep.l1_distance_to_limit.mid(), digits),
                fmt_float(&rep.l1_closed_form, digits),
                fmt_float(&rep.supr_distance_lower, digits),
                fmt_rational(r),
                fmt_float(v, digits)
            );
        }
    }
    out
}

fn fmt_z((re, im): (i64, i64)) -> String {
    match (re, im) {
        (0, 1) => "i".into(),
        (0, b) => format!("{b}i"),
        (a, 0) => a.to_string(),
        (a, b) => format!("{a}+{b}i"),
    }
}

pub fn probe_label(z: (i64, i64)) -> String {
    fmt_z(z)
}
