use rayon::prelude::*;
use rug::float::Round;
use rug::Float;

use super::{tail_bound, SeriesSpec};
use crate::error::{Error, Result};
use crate::num::{BigComplex, CInterval, Interval};

/// Result of a certified evaluation: `|value − f(x)| ≤ error`.
///
/// When the rule has no tail majorant, `error` covers rounding only and
/// `truncation_certified` is false.
#[derive(Clone, Debug)]
pub struct Evaluation {
    pub value: BigComplex,
    pub error: Float,
    /// Rigorous enclosure of the truncated sum, widened by the tail bound.
    pub enclosure: CInterval,
    pub terms: usize,
    pub truncation_certified: bool,
}

impl Evaluation {
    /// Certified lower bound on `|f(x)|` (zero if the enclosure touches 0).
    pub fn abs_lower(&self) -> Float {
        self.enclosure.abs().mig()
    }
}

/// Guard bits needed so that cancellation among terms up to `n` does not eat
/// the requested precision.
fn guard_bits(s: &SeriesSpec, r: f64, n: usize) -> Result<u32> {
    let ln_r = if r > 0.0 { r.ln() } else { f64::NEG_INFINITY };
    let mut max_ln = 0f64;
    for (k, c) in s.coeffs(0, n + 1)?.iter().enumerate() {
        let l = c.ln_abs_f64();
        if l.is_finite() {
            let t = if k == 0 { l } else { l + k as f64 * ln_r };
            if t.is_finite() {
                max_ln = max_ln.max(t);
            }
        }
    }
    let bits = max_ln / std::f64::consts::LN_2 + 32.0 + ((n + 2) as f64).log2();
    Ok(bits.clamp(32.0, 1.0e7) as u32)
}

/// Sum `Σ_{k≤N} a_k x^k` in interval arithmetic and add the tail majorant.
pub fn eval(s: &SeriesSpec, x: &BigComplex, n: usize, prec: u32) -> Result<Evaluation> {
    let mut v = eval_many(s, std::slice::from_ref(x), n, prec)?;
    Ok(v.pop().expect("one point"))
}

/// [`eval`] at several points sharing one truncation: coefficient
/// enclosures, guard bits and the tail majorant (at the largest `|x|`) are
/// computed once.
pub fn eval_many(s: &SeriesSpec, xs: &[BigComplex], n: usize, prec: u32) -> Result<Vec<Evaluation>> {
    if xs.is_empty() {
        return Ok(Vec::new());
    }
    let r_up = xs
        .iter()
        .map(|x| x.abs_upper())
        .fold(Float::new(prec), |a, b| if b > a { b } else { a });
    let wp = prec + guard_bits(s, r_up.to_f64(), n)?;
    let raw = s.coeffs(0, n + 1)?;
    let real_coeffs = raw.iter().all(|c| c.is_real());
    // Sparse families (e.g. exp(−z^{2m})) only touch their nonzero terms.
    let terms: Vec<(usize, CInterval)> = raw
        .iter()
        .enumerate()
        .filter(|(_, c)| c.is_zero() != Some(true))
        .map(|(k, c)| (k, c.enclose(wp)))
        .collect();
    let tail = tail_bound(s, &r_up, n, wp);
    xs.par_iter()
        .map(|x| {
            let sum = if real_coeffs && x.is_real() {
                let xr = Interval::point(Float::with_val(wp, &x.re));
                let one = Interval::from_i64(wp, 1);
                let mut acc = Interval::zero(wp);
                for_powers(&terms, one, &xr, |a, b| a.mul(b), |i, pow| {
                    acc = acc.add(&terms[i].1.re.mul(pow));
                });
                CInterval::real(acc)
            } else {
                let xc = CInterval::from_complex(&BigComplex::new(
                    Float::with_val(wp, &x.re),
                    Float::with_val(wp, &x.im),
                ));
                let one = CInterval::real(Interval::from_i64(wp, 1));
                let mut acc = CInterval::zero(wp);
                for_powers(&terms, one, &xc, |a, b| a.mul(b), |i, pow| {
                    acc = acc.add(&terms[i].1.mul(pow));
                });
                acc
            };
            finish(sum, tail.as_ref(), n, prec, wp, &r_up)
        })
        .collect()
}

/// Calls `f(i, x^{k_i})` for each term index `k_i` in increasing order,
/// reaching each power from the previous one by a cached `x^gap`.
fn for_powers<T: Clone>(
    terms: &[(usize, CInterval)],
    one: T,
    x: &T,
    mul: impl Fn(&T, &T) -> T,
    mut f: impl FnMut(usize, &T),
) {
    let mut gaps: Vec<(usize, T)> = Vec::new();
    let mut pow = one.clone();
    let mut last = 0usize;
    for (i, (k, _)) in terms.iter().enumerate() {
        let d = k - last;
        if d > 0 {
            let step = match gaps.iter().find(|(g, _)| *g == d) {
                Some((_, p)) => p.clone(),
                None => {
                    let p = pow_by_squaring(&one, x, d, &mul);
                    gaps.push((d, p.clone()));
                    p
                }
            };
            pow = mul(&pow, &step);
            last = *k;
        }
        f(i, &pow);
    }
}

fn pow_by_squaring<T: Clone>(one: &T, x: &T, mut e: usize, mul: &impl Fn(&T, &T) -> T) -> T {
    let mut base = x.clone();
    let mut acc = one.clone();
    while e > 0 {
        if e & 1 == 1 {
            acc = mul(&acc, &base);
        }
        e >>= 1;
        if e > 0 {
            base = mul(&base, &base);
        }
    }
    acc
}

fn finish(sum: CInterval, tail: Option<&Float>, n: usize, prec: u32, wp: u32, r_up: &Float) -> Result<Evaluation> {
    if !sum.is_finite() {
        return Err(Error::Range(format!(
            "partial sum at |x| ≈ {} overflowed the exponent range",
            r_up.to_f64()
        )));
    }
    let truncation_certified = tail.is_some();
    let tail = tail.cloned().unwrap_or_else(|| Float::new(wp));
    let enclosure = sum.inflate(&tail);
    let mid = sum.mid();
    let value = BigComplex::new(Float::with_val(prec, &mid.re), Float::with_val(prec, &mid.im));
    // error ≥ |value − mid| + radius(sum) + tail
    let dre = Float::with_val_round(wp, &value.re - &mid.re, Round::Up).0.abs();
    let dim = Float::with_val_round(wp, &value.im - &mid.im, Round::Up).0.abs();
    let mut err = Float::with_val_round(wp, &dre + &dim, Round::Up).0;
    err = Float::with_val_round(wp, &err + &sum.radius(), Round::Up).0;
    err = Float::with_val_round(wp, &err + &tail, Round::Up).0;
    let error = Float::with_val_round(prec, &err, Round::Up).0;
    if !error.is_finite() {
        return Err(Error::Range("error bound overflowed".into()));
    }
    Ok(Evaluation {
        value,
        error,
        enclosure,
        terms: n + 1,
        truncation_certified,
    })
}

/// Smallest truncation (by doubling) whose tail majorant is at most
/// `2^{−prec}`, or `None` if the rule has no majorant.
pub fn auto_truncation(s: &SeriesSpec, r: &Float, prec: u32) -> Option<usize> {
    let target = Float::with_val(prec, 1) >> prec;
    if let Some(len) = s.polynomial_len() {
        return Some(len.saturating_sub(1));
    }
    let mut n = 16usize;
    while n <= 1 << 22 {
        let t = tail_bound(s, r, n, prec + 32)?;
        if t <= target {
            // Refine downwards: bisect between n/2 and n.
            let (mut lo, mut hi) = (n / 2, n);
            while hi - lo > 1 {
                let mid = (lo + hi) / 2;
                match tail_bound(s, r, mid, prec + 32) {
                    Some(t) if t <= target => hi = mid,
                    _ => lo = mid,
                }
            }
            return Some(hi);
        }
        n *= 2;
    }
    None
}

/// Certified evaluation with the truncation chosen automatically so that
/// the tail contributes at most `2^{−prec}`.
pub fn eval_auto(s: &SeriesSpec, x: &BigComplex, prec: u32) -> Result<Evaluation> {
    let r = x.abs_upper();
    let n = auto_truncation(s, &r, prec).ok_or_else(|| {
        Error::Inapplicable(format!(
            "rule '{}' has no tail majorant at |x| = {}",
            s.rule().name(),
            r.to_f64()
        ))
    })?;
    eval(s, x, n, prec)
}
