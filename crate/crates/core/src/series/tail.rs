//! Proven upper bounds on `Σ_{n>N} |a_n| rⁿ`.

use rug::{Float, Integer, Rational};

use super::{Coeff, Rule, SeriesSpec};
use crate::num::{CInterval, Interval};

/// Upper bound on `Σ_{j>K} y^j/j!` for `y ≥ 0`; `K = None` bounds the whole
/// series `e^y`.
pub fn exp_tail(y: &Interval, k: Option<usize>, prec: u32) -> Float {
    let y = Interval::new(y.lo().clone().max(&Float::new(prec)), y.hi().clone());
    let yh = Interval::point(Float::with_val(prec, y.hi()));
    let Some(k) = k else {
        return yh.exp().hi().clone();
    };
    if yh.hi().is_zero() {
        return Float::new(prec);
    }
    let k1 = (k + 1) as u32;
    let first = yh
        .pow_u(k1)
        .div(&Interval::from_integer(prec, &Integer::from(Integer::factorial(k1))))
        .expect("factorial is positive");
    let ratio = yh
        .div(&Interval::from_i64(prec, k as i64 + 2))
        .expect("positive");
    let half = Float::with_val(prec, 0.5);
    if ratio.certainly_lt_f(&half) || ratio.hi() <= &half {
        let one = Interval::from_i64(prec, 1);
        let geo = first.div(&one.sub(&ratio)).expect("ratio below one");
        return geo.hi().clone();
    }
    // Before the peak term the tail is essentially all of e^y.
    if yh.hi() > &Float::with_val(prec, k + 1) {
        return yh.exp().hi().clone();
    }
    // Near the bulk of the series the geometric bound is poor; subtract the
    // partial sum from e^y with guard bits instead.
    let wp = prec + 64 + (yh.hi().to_f64().max(1.0) * 1.5) as u32;
    let yw = Interval::point(Float::with_val(wp, yh.hi()));
    let mut term = Interval::from_i64(wp, 1);
    let mut partial = term.clone();
    for j in 1..=k {
        term = term
            .mul(&yw)
            .div(&Interval::from_i64(wp, j as i64))
            .expect("positive");
        partial = partial.add(&term);
    }
    let tail = yw.exp().sub(&partial);
    let t = Float::with_val_round(prec, tail.hi(), rug::float::Round::Up).0;
    t.max(&Float::new(prec))
}

fn point(prec: u32, r: &Float) -> Interval {
    Interval::point(Float::with_val(prec.max(r.prec()), r))
}

fn coeff_abs_upper(c: &Coeff, prec: u32) -> Interval {
    c.enclose(prec).abs()
}

fn rational_abs(prec: u32, q: &Rational) -> Interval {
    Interval::from_rational(prec, &Rational::from(q.abs_ref()))
}

/// Upper bound on `Σ_{n>N} |a_n| rⁿ` for `r ≥ 0`, or `None` when the rule
/// carries no majorant.
pub fn tail_bound(s: &SeriesSpec, r: &Float, n: usize, prec: u32) -> Option<Float> {
    let zero = Float::new(prec);
    if let Some(len) = s.polynomial_len() {
        if n + 1 >= len {
            return Some(zero);
        }
    }
    let rr = point(prec, r);
    let fi = |k: usize| Interval::from_i64(prec, k as i64);
    let bound = match s.rule() {
        Rule::Explicit { coeffs } => {
            let mut acc = Interval::zero(prec);
            let mut pow = rr.pow_u((n + 1) as u32);
            for c in coeffs.iter().skip(n + 1) {
                let a = CInterval::from_crational(prec, c).abs();
                acc = acc.add(&a.mul(&pow));
                pow = pow.mul(&rr);
            }
            acc.hi().clone()
        }
        Rule::Gaussian { lambda, m } => {
            let m = *m as usize;
            let y = rr.sqr().mul(&rational_abs(prec, lambda));
            let k = (n >= m).then(|| (n - m) / 2);
            rr.pow_u(m as u32)
                .mul(&Interval::point(exp_tail(&y, k, prec)))
                .hi()
                .clone()
        }
        Rule::PolyGaussian { poly, n: deg } => {
            let step = 2 * *deg as usize;
            let y = rr.pow_u(step as u32);
            let mut acc = Interval::zero(prec);
            for (j, p) in poly.iter().enumerate() {
                if p.is_zero() {
                    continue;
                }
                let k = (n >= j).then(|| (n - j) / step);
                let t = CInterval::from_crational(prec, p)
                    .abs()
                    .mul(&rr.pow_u(j as u32))
                    .mul(&Interval::point(exp_tail(&y, k, prec)));
                acc = acc.add(&t);
            }
            acc.hi().clone()
        }
        Rule::Sin | Rule::Cos => exp_tail(&rr, Some(n), prec),
        Rule::SinScaled { m } => {
            let y = rr.mul(&fi(*m as usize));
            Interval::point(exp_tail(&y, Some(n), prec))
                .div(&fi(*m as usize))
                .expect("m >= 1")
                .hi()
                .clone()
        }
        Rule::ExpNeg2m { m } => {
            let step = 2 * *m as usize;
            exp_tail(&rr.pow_u(step as u32), Some(n / step), prec)
        }
        Rule::ExpNegHalf2m { m } => {
            let step = 2 * *m as usize;
            let y = rr.pow_u(step as u32).mul_2exp(-(step as i32));
            exp_tail(&y, Some(n / step), prec)
        }
        Rule::ExpNegSqOverM { m } => {
            let y = rr.sqr().div(&fi(*m as usize)).expect("m >= 1");
            exp_tail(&y, Some(n / 2), prec)
        }
        Rule::Theta { rho, .. } => theta_tail(&rho.enclose(prec), &rr, n, prec)?,
        Rule::ComplementaryBellEgf => bell_egf_tail(r, n, prec)?,
        Rule::Shifted { inner, k } => {
            if r.is_zero() {
                return Some(zero);
            }
            let t = tail_bound(inner, r, n + k, prec)?;
            Interval::point(t)
                .div(&rr.pow_u(*k as u32))
                .ok()?
                .hi()
                .clone()
        }
        Rule::Sum { left, right } => {
            let a = tail_bound(left, r, n, prec)?;
            let b = tail_bound(right, r, n, prec)?;
            Interval::point(a).add(&Interval::point(b)).hi().clone()
        }
        Rule::Scaled { inner, c } => {
            let t = tail_bound(inner, r, n, prec)?;
            CInterval::from_crational(prec, c)
                .abs()
                .mul(&Interval::point(t))
                .hi()
                .clone()
        }
        Rule::Product { left, right } => {
            // i + j > N forces i > N/2 or j > N/2.
            let h = n / 2;
            let a_all = abs_sum_upper(left, r, h, prec)?;
            let b_all = abs_sum_upper(right, r, h, prec)?;
            let ta = tail_bound(left, r, h, prec)?;
            let tb = tail_bound(right, r, h, prec)?;
            Interval::point(a_all)
                .mul(&Interval::point(tb))
                .add(&Interval::point(ta).mul(&Interval::point(b_all)))
                .hi()
                .clone()
        }
        Rule::LeftExtended { inner, .. } => {
            let t = if n == 0 {
                abs_sum_upper(inner, r, 0, prec)?
            } else {
                tail_bound(inner, r, n - 1, prec)?
            };
            rr.mul(&Interval::point(t)).hi().clone()
        }
        Rule::UserTail(u) => (u.tail.as_ref()?)(r, n, prec)?,
    };
    if bound.is_nan() || bound.is_infinite() {
        return None;
    }
    Some(bound)
}

/// Upper bound on `Σ_{n≥0} |a_n| rⁿ`, using exact terms up to `N`.
pub fn abs_sum_upper(s: &SeriesSpec, r: &Float, n: usize, prec: u32) -> Option<Float> {
    let rr = point(prec, r);
    let mut acc = Interval::zero(prec);
    let mut pow = Interval::from_i64(prec, 1);
    for c in s.coeffs(0, n + 1).ok()? {
        acc = acc.add(&coeff_abs_upper(&c, prec).mul(&pow));
        pow = pow.mul(&rr);
    }
    let t = tail_bound(s, r, n, prec)?;
    Some(acc.add(&Interval::point(t)).hi().clone())
}

/// `Σ_{n>N} ρ^{n²} rⁿ`: explicit terms until the term ratio `ρ^{2n+1} r`
/// drops to 1/2, then a geometric majorant (the ratio keeps decreasing).
fn theta_tail(rho: &Interval, r: &Interval, n: usize, prec: u32) -> Option<Float> {
    if r.hi().is_zero() {
        return Some(Float::new(prec));
    }
    let rho = Interval::point(rho.hi().clone());
    let ln_rho = rho.hi().to_f64().ln();
    let ln_r = r.hi().to_f64().ln();
    // Smallest j with (2j+1) ln ρ + ln r ≤ −ln 2.
    let j_star = ((-std::f64::consts::LN_2 - ln_r) / (2.0 * ln_rho) - 0.5).ceil();
    let mut j = (n + 1).max(if j_star.is_finite() { j_star.max(0.0) as usize } else { 0 });
    if j - (n + 1) > 200_000 {
        return None;
    }
    let half = Float::with_val(prec, 0.5);
    let term = |k: usize| -> Interval {
        rho.pow_u((k * k) as u32).mul(&r.pow_u(k as u32))
    };
    let ratio = |k: usize| -> Interval { rho.pow_u((2 * k + 1) as u32).mul(r) };
    while ratio(j).hi() > &half {
        j += 1;
    }
    let mut acc = Interval::zero(prec);
    for k in (n + 1)..j {
        acc = acc.add(&term(k));
    }
    let one = Interval::from_i64(prec, 1);
    let geo = term(j).div(&one.sub(&ratio(j))).ok()?;
    Some(acc.add(&geo).hi().clone())
}

/// Cauchy estimate for `exp(1 − e^z)`: on `|z| = R`, `|f| ≤ exp(1 + e^R)`,
/// so the tail is at most `exp(1+e^R) q^{N+1}/(1−q)` with `q = r/R`.
fn bell_egf_tail(r: &Float, n: usize, prec: u32) -> Option<Float> {
    if r.is_zero() {
        return Some(Float::new(prec));
    }
    let rf = r.to_f64();
    let objective = |big_r: f64| -> f64 {
        let q = rf / big_r;
        1.0 + big_r.exp() + (n as f64 + 1.0) * q.ln() - (1.0 - q).ln()
    };
    let mut best = (f64::INFINITY, rf + 1.0);
    for i in 1..=400 {
        let big_r = rf + (i as f64 / 400.0) * (20.0 + (n as f64 + 2.0).ln() + rf);
        let v = objective(big_r);
        if v < best.0 {
            best = (v, big_r);
        }
    }
    let big_r = Interval::point(Float::with_val(prec, best.1));
    let rr = point(prec, r);
    let one = Interval::from_i64(prec, 1);
    let m = one.add(&big_r.exp()).exp();
    let q = rr.div(&big_r).ok()?;
    let t = m.mul(&q.pow_u((n + 1) as u32)).div(&one.sub(&q)).ok()?;
    Some(t.hi().clone())
}
