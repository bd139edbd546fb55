use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use bounded_series::bell::{bell_sign_runs, complementary_bell, turan_ratio_table, wilf_scan};
use bounded_series::certify::{self, Branch, Certificate, CertifyOptions, TailMethod};
use bounded_series::num::{fmt_float, parse_rational};
use bounded_series::series::{eval, eval_auto, Sign};
use bounded_series::shift::{
    kernel_test, left_extend, peano_membership, resolvent_solve, PeanoOptions, PeanoOutcome, DEFAULT_PROBES,
};
use bounded_series::topology::{
    counterexample_suite, density_demo, erratum_report, probe_label, Family, SuiteConfig,
};
use bounded_series::turan::{
    envelope_argmax, estimate_chi, half_bound_chain, theta_psi, theta_psi_rational, threshold_audit,
    threshold_solve, Predicate, ScanParams,
};
use bounded_series::{BigComplex, CRational, Coeff, Interval, SeriesSpec};
use clap::{Args, Subcommand, ValueEnum};
use rayon::prelude::*;
use rug::{Float, Rational};
use serde_json::{json, Value};

use crate::output::{Report, RunConfig, Status, Table};
use crate::series_args::SeriesArgs;

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Turán profile, ϑ/ψ and sign runs of a series.
    Analyze(AnalyzeArgs),
    /// Bisection for the χ at which a named predicate switches.
    Thresholds(ThresholdArgs),
    /// Emit or recheck an unboundedness certificate.
    Certify(CertifyArgs),
    /// Backward shift, left extension, kernel test, Peano membership.
    Shift(ShiftArgs),
    /// Coefficients of (σ − λ)⁻¹ g.
    Resolvent(ResolventArgs),
    /// Counterexample suite, erratum report and density demo.
    Topology(TopologyArgs),
    /// Complementary Bell numbers: sequence, zeros, sign runs, Turán ratios.
    Bell(BellArgs),
    /// Certified evaluation at a point.
    Eval(EvalArgs),
}

pub fn run(cmd: &Command, cfg: &RunConfig) -> Result<Report> {
    match cmd {
        Command::Analyze(a) => analyze(a, cfg),
        Command::Thresholds(a) => thresholds(a, cfg),
        Command::Certify(a) => certify_cmd(a, cfg),
        Command::Shift(a) => shift_cmd(a, cfg),
        Command::Resolvent(a) => resolvent(a, cfg),
        Command::Topology(a) => topology(a, cfg),
        Command::Bell(a) => bell(a, cfg),
        Command::Eval(a) => eval_cmd(a, cfg),
    }
}

// ---------------------------------------------------------------------------
// formatting helpers

fn f(x: &Float, d: usize) -> String {
    fmt_float(x, d)
}

fn iv(x: &Interval, d: usize) -> Value {
    json!({ "lo": f(x.lo(), d), "hi": f(x.hi(), d) })
}

fn cx(z: &BigComplex, d: usize) -> Value {
    json!({ "re": f(&z.re, d), "im": f(&z.im, d) })
}

fn cx_str(z: &BigComplex, d: usize) -> String {
    if z.im.is_zero() {
        f(&z.re, d)
    } else {
        format!("{} {} {}i", f(&z.re, d), if z.im.is_sign_negative() { "-" } else { "+" }, f(&Float::with_val(z.im.prec(), z.im.abs_ref()), d))
    }
}

fn coeff_str(c: &Coeff, prec: u32, d: usize) -> String {
    match c.as_rational() {
        Some(q) => q.to_string(),
        None => cx_str(&c.enclose(prec).mid(), d),
    }
}

fn coeff_list(s: &SeriesSpec, n: usize, prec: u32, d: usize) -> Result<Vec<String>> {
    Ok(s.coeffs(0, n)?.iter().map(|c| coeff_str(c, prec, d)).collect())
}

/// Undecidable/inconclusive library outcomes become a report with status 2;
/// everything else propagates as an error.
fn inconclusive_or(e: bounded_series::Error, command: &'static str, extra: Value) -> Result<Report> {
    if e.is_inconclusive() {
        let mut v = extra;
        v["reason"] = Value::from(e.to_string());
        Ok(Report::ok(command, v).with_status(Status::Inconclusive))
    } else {
        Err(e.into())
    }
}

fn sign_char(s: Sign) -> char {
    match s {
        Sign::Neg => '-',
        Sign::Zero => '0',
        Sign::Pos => '+',
    }
}

// ---------------------------------------------------------------------------
// analyze

#[derive(Args, Debug)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub series: SeriesArgs,
    /// First index N of the Turán window.
    #[arg(long, default_value_t = 1)]
    pub start: usize,
    /// Last index M (defaults to --trunc, else 60).
    #[arg(long)]
    pub end: Option<usize>,
    /// Also locate the peak of |a_n xⁿ| at this x.
    #[arg(long)]
    pub x: Option<String>,
}

fn analyze(a: &AnalyzeArgs, cfg: &RunConfig) -> Result<Report> {
    let s = a.series.build(cfg.seed)?;
    let (p, d) = (cfg.precision, cfg.digits());
    let end = a.end.or(cfg.trunc).unwrap_or(60);
    let prof = estimate_chi(&s, a.start, end, p)?;
    let mut status = Status::Ok;
    let mut out = json!({
        "series": serde_json::from_str::<Value>(&s.to_json()).unwrap_or(Value::Null),
        "turan": {
            "start": prof.start,
            "end": prof.window_end,
            "chi": iv(&prof.chi, d),
            "chi_exact": prof.chi_exact.as_ref().map(|q| q.to_string()),
            "chi_squared_exact": prof.chi_sq.as_ref().map(|q| q.to_string()),
            "attained_at": prof.attained_at,
            "finite": prof.is_finite(),
            "unbounded_at": prof.unbounded_at,
            "zero_indices": prof.zero_indices,
        },
        "structural_turan": s.structural_turan().map(|(n, c)| json!({"start": n, "chi": c.to_string()})),
    });
    if prof.is_finite() && prof.chi.hi() < &1 && prof.chi.lo() > &0 {
        let tp = match &prof.chi_exact {
            Some(q) => theta_psi_rational(q, p),
            None => theta_psi(&prof.chi, p),
        };
        out["theta_psi"] = match tp {
            Ok(t) => json!({
                "theta": t.theta.map_or(Value::from("infinity"), Value::from),
                "psi": t.psi,
                "theta_sum": iv(&t.theta_sum, d),
                "psi_sum": iv(&t.psi_sum, d),
            }),
            Err(e) if e.is_inconclusive() => {
                status = Status::Inconclusive;
                json!({ "undecidable": e.to_string() })
            }
            Err(e) => return Err(e.into()),
        };
    } else {
        out["theta_psi"] = json!({ "not_applicable": "chi outside (0, 1)" });
    }
    out["sign_runs"] = match bounded_series::turan::sign_runs(&s, a.start, end) {
        Ok(r) => json!({
            "max_run": r.max_run(),
            "runs": r.runs.iter().map(|x| json!({"start": x.start, "length": x.length, "sign": sign_char(x.sign).to_string()})).collect::<Vec<_>>(),
        }),
        Err(e) => json!({ "not_available": e.to_string() }),
    };
    if let Some(x) = &a.x {
        let xf = Float::with_val(p, &parse_rational(x)?);
        let env = envelope_argmax(&s, &xf, &ScanParams::default(), p)?;
        out["envelope"] = json!({
            "x": x,
            "argmax": env.m,
            "max_term": iv(&env.max_term, d),
            "scanned": env.scanned,
            "horizon_limited": env.horizon_limited,
        });
        if env.horizon_limited {
            status = Status::Inconclusive;
        }
    }
    Ok(Report::ok("analyze", out).with_status(status))
}

// ---------------------------------------------------------------------------
// thresholds

#[derive(Args, Debug)]
pub struct ThresholdArgs {
    /// Predicate name, or `all`.
    #[arg(long, default_value = "all")]
    pub predicate: String,
    #[arg(long, default_value = "0.1")]
    pub lo: String,
    #[arg(long, default_value = "0.9")]
    pub hi: String,
    #[arg(long, default_value = "1e-6")]
    pub tol: String,
    /// Recompute the ϑ≥2∧ψ≤1 and ϑ≥2ψ thresholds at 4× precision and compare with a reported value.
    #[arg(long)]
    pub audit: bool,
    #[arg(long, default_value = "0.67522")]
    pub reported: String,
}

fn thresholds(a: &ThresholdArgs, cfg: &RunConfig) -> Result<Report> {
    let (lo, hi, tol) = (parse_rational(&a.lo)?, parse_rational(&a.hi)?, parse_rational(&a.tol)?);
    let digits = (-(tol.to_f64().log10()).floor() as usize + 3).clamp(6, 40);
    if a.audit {
        let reported = parse_rational(&a.reported)?;
        let preds = [Predicate::ThetaGe2AndPsiLe1, Predicate::ThetaGe2Psi];
        let rows = threshold_audit(&preds, &lo, &hi, &tol, &reported, cfg.precision)?;
        let mut t = Table::new(["predicate", "chi_star", "oracle_chi_star", "consistent", "reported", "matches_reported"]);
        let mut items = Vec::new();
        for r in &rows {
            let cs = r.result.chi_star_decimal(digits);
            let os = r.oracle.chi_star_decimal(digits);
            t.push([
                r.result.predicate.name().to_string(),
                cs.clone(),
                os.clone(),
                r.consistent.to_string(),
                a.reported.clone(),
                r.matches_reported.to_string(),
            ]);
            items.push(json!({
                "predicate": r.result.predicate.name(),
                "chi_star": cs,
                "bracket": [r.result.lo.to_string(), r.result.hi.to_string()],
                "oracle_precision": r.oracle.precision,
                "oracle_chi_star": os,
                "consistent": r.consistent,
                "reported": a.reported,
                "matches_reported": r.matches_reported,
                "flag": if r.matches_reported { Value::Null } else { Value::from("discrepancy with the reported value") },
            }));
        }
        let ok = rows.iter().all(|r| r.consistent);
        return Ok(Report::ok("thresholds", json!({ "audit": items, "internally_consistent": ok }))
            .with_table(t)
            .with_status(if ok { Status::Ok } else { Status::Inconclusive }));
    }
    let preds: Vec<Predicate> = if a.predicate == "all" {
        Predicate::ALL.to_vec()
    } else {
        a.predicate.split(',').map(|p| p.trim().parse()).collect::<Result<_, _>>()?
    };
    let results: Vec<_> = preds
        .par_iter()
        .map(|&p| threshold_solve(p, &lo, &hi, &tol, cfg.precision))
        .collect();
    let mut t = Table::new(["predicate", "chi_star", "lo", "hi", "iterations"]);
    let mut items = Vec::new();
    for r in results {
        let r = match r {
            Ok(r) => r,
            Err(e) => return inconclusive_or(e, "thresholds", json!({})),
        };
        let cs = r.chi_star_decimal(digits);
        let (l, h) = (
            fmt_float(&Float::with_val(128, &r.lo), digits),
            fmt_float(&Float::with_val(128, &r.hi), digits),
        );
        t.push([r.predicate.name().to_string(), cs.clone(), l.clone(), h.clone(), r.iterations.to_string()]);
        items.push(json!({
            "predicate": r.predicate.name(),
            "chi_star": cs,
            "lo": l,
            "hi": h,
            "bracket_exact": [r.lo.to_string(), r.hi.to_string()],
            "tolerance": r.tolerance.to_string(),
            "iterations": r.iterations,
        }));
    }
    let mut out = json!({ "thresholds": items });
    if preds.contains(&Predicate::ThetaGe2AndPsiLe1) || preds.contains(&Predicate::PsiLe1) {
        let chain = half_bound_chain(&Rational::from((1, 2)), cfg.precision)?;
        out["half_chain"] = json!({
            "chi": "1/2",
            "first_two_terms": iv(&chain.first_two, 20),
            "s": iv(&chain.s, 20),
            "holds": chain.holds(),
        });
    }
    Ok(Report::ok("thresholds", out).with_table(t))
}

// ---------------------------------------------------------------------------
// certify

#[derive(Args, Debug)]
pub struct CertifyArgs {
    #[command(flatten)]
    pub series: SeriesArgs,
    /// Recheck an existing certificate instead of emitting one.
    #[arg(long, conflicts_with = "family")]
    pub recheck: Option<PathBuf>,
    /// Turán constant χ (defaults to the family's structural constant).
    #[arg(long)]
    pub chi: Option<String>,
    #[arg(long, default_value = "1e6")]
    pub target: String,
    #[arg(long)]
    pub branch: Option<String>,
    #[arg(long, default_value_t = 16)]
    pub max_witnesses: usize,
}

fn certificate_table(c: &Certificate) -> Table {
    let mut t = Table::new(["m", "x_m", "window", "tail_method", "certified_lower"]);
    for w in &c.witnesses {
        let method = match &w.tail_method {
            TailMethod::TuranMajorant { k } => format!("turan-majorant(K={k})"),
            TailMethod::RuleMajorant => "rule-majorant".to_string(),
        };
        t.push([
            w.m.to_string(),
            format!("{:.12e}", w.x_m_f64()),
            format!("[{}, {}]", w.window[0], w.window[1]),
            method,
            format!("{:.12e}", w.certified_lower_f64()),
        ]);
    }
    t
}

fn certify_cmd(a: &CertifyArgs, cfg: &RunConfig) -> Result<Report> {
    let prec = cfg.precision;
    if let Some(path) = &a.recheck {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let v: Value = serde_json::from_str(&text).context("certificate is not JSON")?;
        let inner = v
            .get("result")
            .and_then(|r| r.get("certificate"))
            .cloned()
            .unwrap_or(v);
        let c = Certificate::from_json(&inner.to_string())?;
        let report = certify::recheck_report(&c, prec);
        let out = json!({
            "file": path.display().to_string(),
            "witnesses": c.witnesses.len(),
            "recheck_precision": prec,
            "valid": report.is_ok(),
            "failure": report.as_ref().err(),
        });
        if let Err(msg) = report {
            bail!("certificate rejected at {prec} bits: {msg}");
        }
        return Ok(Report::ok("certify", out).with_table(certificate_table(&c)));
    }
    let s = a.series.build(cfg.seed)?;
    let chi = match &a.chi {
        Some(c) => parse_rational(c)?,
        None => s
            .structural_turan()
            .map(|(_, c)| c)
            .ok_or_else(|| anyhow!("no structural Turán constant for this series; pass --chi"))?,
    };
    let target = parse_rational(&a.target)?;
    let opts = CertifyOptions {
        branch: a.branch.as_deref().map(str::parse::<Branch>).transpose()?,
        max_witnesses: a.max_witnesses,
        ..CertifyOptions::default()
    };
    let c = match certify::certify_unbounded(&s, &chi, &target, prec, &opts) {
        Ok(c) => c,
        Err(e) => {
            return inconclusive_or(e, "certify", json!({ "certificate": Value::Null, "chi": chi.to_string() }))
        }
    };
    let recheck = certify::recheck(&c, 2 * prec);
    let cert: Value = serde_json::from_str(&c.to_json())?;
    let out = json!({
        "certificate": cert,
        "recheck_precision": 2 * prec,
        "recheck": recheck,
    });
    if !recheck {
        bail!("emitted certificate failed its own recheck at {} bits", 2 * prec);
    }
    Ok(Report::ok("certify", out).with_table(certificate_table(&c)))
}

// ---------------------------------------------------------------------------
// shift

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "kebab-case")]
pub enum ShiftOp {
    Shift,
    LeftExtend,
    Kernel,
    Peano,
}

#[derive(Args, Debug)]
pub struct ShiftArgs {
    #[command(flatten)]
    pub series: SeriesArgs,
    #[arg(long, value_enum, default_value = "shift")]
    pub op: ShiftOp,
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    /// Constant for left extension c + x f(x).
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub c: String,
    /// Coefficients to print.
    #[arg(long, default_value_t = 10)]
    pub terms: usize,
    /// Horizon for the kernel test on non-polynomial series.
    #[arg(long, default_value_t = 200)]
    pub horizon: usize,
}

fn shift_cmd(a: &ShiftArgs, cfg: &RunConfig) -> Result<Report> {
    let s = a.series.build(cfg.seed)?;
    let (p, d) = (cfg.precision, cfg.digits());
    match a.op {
        ShiftOp::Shift => {
            let t = s.shift(a.k);
            Ok(Report::ok(
                "shift",
                json!({
                    "k": a.k,
                    "spec": serde_json::from_str::<Value>(&t.to_json()).unwrap_or(Value::Null),
                    "coefficients": coeff_list(&t, a.terms, p, d)?,
                }),
            ))
        }
        ShiftOp::LeftExtend => {
            let c: CRational = a.c.parse()?;
            let (t, diag) = left_extend(&s, c.clone(), &DEFAULT_PROBES, p)?;
            let samples: Vec<Value> = diag
                .samples
                .iter()
                .map(|(x, v)| json!({ "x": f(x, 6), "abs_x_f": f(v, 12) }))
                .collect();
            let status = if diag.verdict == bounded_series::shift::Growth::Undetermined {
                Status::Inconclusive
            } else {
                Status::Ok
            };
            Ok(Report::ok(
                "shift",
                json!({
                    "c": c.to_string(),
                    "spec": serde_json::from_str::<Value>(&t.to_json()).unwrap_or(Value::Null),
                    "coefficients": coeff_list(&t, a.terms, p, d)?,
                    "diagnostic": { "samples": samples, "verdict": diag.verdict.name() },
                }),
            )
            .with_status(status))
        }
        ShiftOp::Kernel => {
            let in_kernel = kernel_test(&s, a.k, a.horizon)?;
            Ok(Report::ok(
                "shift",
                json!({
                    "k": a.k,
                    "sigma_k_vanishes": in_kernel,
                    "exact": s.polynomial_len().is_some(),
                    "horizon": a.horizon,
                }),
            ))
        }
        ShiftOp::Peano => {
            let opts = PeanoOptions::standard(p);
            let out = match peano_membership(&s, a.k, &opts, p) {
                Ok(o) => o,
                Err(e) => return inconclusive_or(e, "shift", json!({ "k": a.k })),
            };
            let v = match out {
                PeanoOutcome::Accepted(x) => json!({
                    "k": a.k,
                    "accepted": true,
                    "coefficients": x.coefficients.iter().map(|c| cx(c, 20)).collect::<Vec<_>>(),
                    "remainder": {
                        "max_first_third": x.remainder.max_first,
                        "max_last_third": x.remainder.max_last,
                        "growth": x.remainder.growth,
                    },
                    "spread": x.spread,
                    "samples": x.samples,
                }),
                PeanoOutcome::Rejected { stage, reason, samples } => json!({
                    "k": a.k,
                    "accepted": false,
                    "rejected_at_stage": stage,
                    "reason": reason,
                    "remainder_samples": samples.iter().map(|(y, r)| json!([y, r])).collect::<Vec<_>>(),
                }),
            };
            Ok(Report::ok("shift", v))
        }
    }
}

// ---------------------------------------------------------------------------
// resolvent

#[derive(Args, Debug)]
pub struct ResolventArgs {
    #[command(flatten)]
    pub series: SeriesArgs,
    /// λ in (σ − λ)⁻¹, e.g. `2`, `1/2`, `1+1i`.
    #[arg(long, allow_hyphen_values = true)]
    pub eigenvalue: String,
    #[arg(long, default_value_t = 100)]
    pub terms: usize,
    /// Coefficients to print.
    #[arg(long, default_value_t = 10)]
    pub show: usize,
}

fn resolvent(a: &ResolventArgs, cfg: &RunConfig) -> Result<Report> {
    let g = a.series.build(cfg.seed)?;
    let lambda: CRational = a.eigenvalue.parse()?;
    let d = cfg.digits();
    let sol = resolvent_solve(&g, &lambda, a.terms, cfg.precision)?;
    let mut t = Table::new(["n", "f_n"]);
    for (i, c) in sol.coefficients.iter().take(a.show).enumerate() {
        t.push([i.to_string(), cx_str(c, d)]);
    }
    let out = json!({
        "lambda": lambda.to_string(),
        "f0": cx(&sol.f0, d),
        "terms": a.terms,
        "residual_max": f(&sol.residual_max, 6),
        "radius_max": f(&sol.radius_max, 6),
        "working_precision": sol.working_precision,
        "inverse_is_real": sol.inverse_is_real,
        "coefficients": sol.coefficients.iter().take(a.show).map(|c| cx(c, d)).collect::<Vec<_>>(),
    });
    Ok(Report::ok("resolvent", out).with_table(t))
}

// ---------------------------------------------------------------------------
// topology

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TopologyPart {
    Suite,
    Erratum,
    Density,
    All,
}

#[derive(Args, Debug)]
pub struct TopologyArgs {
    #[arg(long, value_enum, default_value = "all")]
    pub report: TopologyPart,
    #[arg(long, default_value_t = 10)]
    pub m_max: u32,
    /// Sample points per circle for compact sups.
    #[arg(long, default_value_t = 1024)]
    pub points: usize,
    /// Monomial degree for the density demo.
    #[arg(long, default_value_t = 2)]
    pub density_m: u32,
    #[arg(long, default_value = "1,1/2,1/4,1/8,1/16")]
    pub lambdas: String,
    #[arg(long, default_value = "1")]
    pub radius: String,
}

fn topology(a: &TopologyArgs, cfg: &RunConfig) -> Result<Report> {
    let (p, d) = (cfg.precision, cfg.digits().min(40));
    let ms: Vec<u32> = (1..=a.m_max).collect();
    let mut out = json!({});
    let mut t = Table::new(["section", "family", "m", "l1_distance", "closed_form", "sup_real_lower", "compact_sups", "probes"]);
    let want = |x: TopologyPart| a.report == x || a.report == TopologyPart::All;
    if want(TopologyPart::Suite) {
        let cfg_s = SuiteConfig {
            m_values: ms.clone(),
            circle_points: a.points,
            ..SuiteConfig::default()
        };
        let reports = counterexample_suite(&cfg_s, p)?;
        let mut items = Vec::new();
        for r in &reports {
            let sups: Vec<String> = r.compact_sup.iter().map(|(rad, v)| format!("r={rad}:{}", f(v, 12))).collect();
            let probes: Vec<String> = r
                .pointwise_probe
                .iter()
                .map(|pr| format!("{}:{}", probe_label(pr.z), f(&pr.abs, 12)))
                .collect();
            t.push([
                "suite".to_string(),
                r.family.name().to_string(),
                r.m.to_string(),
                f(&r.l1_distance_to_limit.mid(), d),
                f(&r.l1_closed_form, d),
                f(&r.supr_distance_lower, 12),
                sups.join(" "),
                probes.join(" "),
            ]);
            items.push(json!({
                "family": r.family.name(),
                "label": r.family.label(),
                "m": r.m,
                "l1_distance_to_limit": iv(&r.l1_distance_to_limit, d),
                "l1_closed_form": f(&r.l1_closed_form, d),
                "sup_real_distance_lower": f(&r.supr_distance_lower, 12),
                "compact_sup": r.compact_sup.iter().map(|(rad, v)| json!({"r": rad.to_string(), "lower": f(v, 12)})).collect::<Vec<_>>(),
                "compact_sup_monotone": r.compact_sup_monotone(),
                "pointwise_probe": r.pointwise_probe.iter().map(|pr| json!({"z": probe_label(pr.z), "value": cx(&pr.value, 20), "abs": f(&pr.abs, 20)})).collect::<Vec<_>>(),
            }));
        }
        out["suite"] = Value::from(items);
    }
    if want(TopologyPart::Erratum) {
        let e = erratum_report(&ms, p)?;
        for (i, m) in e.m_values.iter().enumerate() {
            t.push([
                "erratum".to_string(),
                "exp_neg2m | exp_neg_half2m".to_string(),
                m.to_string(),
                format!("{} | {}", f(&e.original[i].mid(), d), f(&e.corrected[i].mid(), d)),
                format!("{} | {}", f(&e.e_minus_one, d), f(&Family::ExpNegHalf2m.l1_closed_form(*m, p), d)),
                "-".into(),
                "-".into(),
                "-".into(),
            ]);
        }
        out["erratum"] = e.to_json(d);
    }
    if want(TopologyPart::Density) {
        let lambdas: Vec<Rational> = a.lambdas.split(',').map(parse_rational).collect::<Result<_, _>>()?;
        let r = parse_rational(&a.radius)?;
        let rows = density_demo(a.density_m, &lambdas, &r, a.points, p)?;
        let mut items = Vec::new();
        for row in &rows {
            t.push([
                "density".to_string(),
                format!("z^{} exp(-lambda z^2), lambda={}", a.density_m, row.lambda),
                a.density_m.to_string(),
                f(&row.l1.mid(), d),
                f(&row.l1_closed_form, d),
                "-".into(),
                format!("r={}:{} <= {}", a.radius, f(&row.sampled_sup, 12), f(&row.bound, 12)),
                "-".into(),
            ]);
            items.push(json!({
                "lambda": row.lambda.to_string(),
                "l1": iv(&row.l1, d),
                "l1_closed_form": f(&row.l1_closed_form, d),
                "bound": f(&row.bound, 12),
                "sampled_sup": f(&row.sampled_sup, 12),
                "within_bound": row.within_bound(),
            }));
        }
        out["density"] = json!({ "m": a.density_m, "radius": a.radius, "rows": items });
    }
    Ok(Report::ok("topology", out).with_table(t))
}

// ---------------------------------------------------------------------------
// bell

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BellOp {
    Sequence,
    Wilf,
    Runs,
    Ratios,
}

#[derive(Args, Debug)]
pub struct BellArgs {
    /// Largest index.
    #[arg(long, default_value_t = 10)]
    pub n: usize,
    #[arg(long, value_enum, default_value = "sequence")]
    pub op: BellOp,
}

fn bell(a: &BellArgs, cfg: &RunConfig) -> Result<Report> {
    let d = cfg.digits().min(30);
    match a.op {
        BellOp::Sequence => {
            let b = complementary_bell(a.n);
            let mut t = Table::new(["n", "b_n"]);
            for (i, v) in b.values.iter().enumerate() {
                t.push([i.to_string(), v.to_string()]);
            }
            let vals: Vec<String> = b.values.iter().map(|v| v.to_string()).collect();
            Ok(Report::ok("bell", json!({ "n": a.n, "values": vals })).with_table(t))
        }
        BellOp::Wilf => {
            let zeros = wilf_scan(a.n);
            let mut t = Table::new(["zero_index"]);
            for z in &zeros {
                t.push([z.to_string()]);
            }
            Ok(Report::ok("bell", json!({ "n": a.n, "zeros": zeros })).with_table(t))
        }
        BellOp::Runs => {
            let r = bell_sign_runs(a.n);
            let mut t = Table::new(["start", "length", "sign"]);
            for x in &r.records {
                t.push([x.start.to_string(), x.length.to_string(), x.sign.to_string()]);
            }
            Ok(Report::ok(
                "bell",
                json!({ "n": a.n, "max_run": r.profile.max_run(), "record_runs": r.records }),
            )
            .with_table(t))
        }
        BellOp::Ratios => {
            let rows = turan_ratio_table(a.n);
            let mut t = Table::new(["n", "ratio", "running_max", "running_min"]);
            let dec = |q: &Option<Rational>| q.as_ref().map_or("-".to_string(), |q| f(&Float::with_val(128, q), d));
            let mut items = Vec::new();
            for r in &rows {
                t.push([r.n.to_string(), dec(&r.ratio), dec(&r.running_max), dec(&r.running_min)]);
                items.push(json!({
                    "n": r.n,
                    "ratio": r.ratio.as_ref().map(|q| q.to_string()),
                    "ratio_decimal": dec(&r.ratio),
                    "running_max": dec(&r.running_max),
                    "running_min": dec(&r.running_min),
                }));
            }
            Ok(Report::ok("bell", json!({ "n": a.n, "rows": items })).with_table(t))
        }
    }
}

// ---------------------------------------------------------------------------
// eval

#[derive(Args, Debug)]
pub struct EvalArgs {
    #[command(flatten)]
    pub series: SeriesArgs,
    /// Point, e.g. `1`, `-7/2`, `1+2i`.
    #[arg(long, allow_hyphen_values = true)]
    pub x: String,
}

fn eval_cmd(a: &EvalArgs, cfg: &RunConfig) -> Result<Report> {
    let s = a.series.build(cfg.seed)?;
    let (p, d) = (cfg.precision, cfg.digits());
    let x: CRational = a.x.parse()?;
    let z = BigComplex::from_crational(p, &x);
    let e = match cfg.trunc {
        Some(n) => eval(&s, &z, n, p),
        None => eval_auto(&s, &z, p),
    };
    let e = match e {
        Ok(e) => e,
        Err(err) => return inconclusive_or(err, "eval", json!({ "x": x.to_string() })),
    };
    let out = json!({
        "x": x.to_string(),
        "value": cx(&e.value, d),
        "error_bound": f(&e.error, 6),
        "terms": e.terms,
        "truncation_certified": e.truncation_certified,
        "enclosure": { "re": iv(&e.enclosure.re, d), "im": iv(&e.enclosure.im, d) },
        "abs_lower": f(&e.abs_lower(), d),
    });
    let status = if e.truncation_certified { Status::Ok } else { Status::Inconclusive };
    Ok(Report::ok("eval", out).with_status(status))
}
