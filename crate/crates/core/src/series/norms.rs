use rug::float::Round;
use rug::Float;

use super::{eval_auto, tail_bound, SeriesSpec};
use crate::error::{Error, Result};
use crate::num::{BigComplex, Interval};

/// `Σ_{n≤N} |a_n|` with a certified tail bound when the rule has one.
#[derive(Clone, Debug)]
pub struct L1Norm {
    pub partial: Interval,
    pub tail: Option<Float>,
}

impl L1Norm {
    /// Enclosure of the full norm, if the tail is certified.
    pub fn enclosure(&self) -> Option<Interval> {
        let t = self.tail.as_ref()?;
        let hi = Float::with_val_round(self.partial.prec(), self.partial.hi() + t, Round::Up).0;
        Some(Interval::new(self.partial.lo().clone(), hi))
    }
}

pub fn l1_norm(s: &SeriesSpec, n: usize, prec: u32) -> Result<L1Norm> {
    let mut acc = Interval::zero(prec);
    for c in s.coeffs(0, n + 1)? {
        if c.is_zero() != Some(true) {
            acc = acc.add(&c.enclose(prec).abs());
        }
    }
    let tail = tail_bound(s, &Float::with_val(prec, 1), n, prec);
    Ok(L1Norm { partial: acc, tail })
}

#[derive(Clone, Debug)]
pub enum SupDomain {
    Interval { lo: Float, hi: Float },
    /// The whole line, explored on `[−radius, radius]`.
    Real { radius: Float },
}

#[derive(Clone, Debug)]
pub struct SupGrid {
    pub points: usize,
    /// Rounds of local refinement around the best sample.
    pub refine: usize,
}

impl Default for SupGrid {
    fn default() -> Self {
        SupGrid {
            points: 256,
            refine: 60,
        }
    }
}

/// Certified LOWER bound on `sup |f|` over the domain. No upper bound is
/// claimed.
#[derive(Clone, Debug)]
pub struct SupNormLower {
    pub lower: Float,
    pub at: Float,
    pub samples: usize,
    pub note: &'static str,
}

pub fn sup_norm_estimate(
    s: &SeriesSpec,
    domain: &SupDomain,
    grid: &SupGrid,
    prec: u32,
) -> Result<SupNormLower> {
    let (lo, hi) = match domain {
        SupDomain::Interval { lo, hi } => (lo.clone(), hi.clone()),
        SupDomain::Real { radius } => (Float::with_val(prec, -radius), radius.clone()),
    };
    if hi < lo {
        return Err(Error::InvalidArgument("empty sup-norm domain".into()));
    }
    let lower_at = |x: &Float| -> Result<Float> {
        let e = eval_auto(s, &BigComplex::real(Float::with_val(prec, x)), prec)?;
        Ok(e.abs_lower())
    };
    let mut xs: Vec<Float> = Vec::new();
    let pts = grid.points.max(2);
    let width = Float::with_val(prec, &hi - &lo);
    for i in 0..pts {
        xs.push(Float::with_val(prec, &lo + Float::with_val(prec, &width * i as u32) / (pts - 1) as u32));
    }
    // Geometric probes for the far field.
    let mut g = Float::with_val(prec, 1);
    while g <= hi || Float::with_val(prec, -&g) >= lo {
        for cand in [g.clone(), Float::with_val(prec, -&g)] {
            if cand >= lo && cand <= hi {
                xs.push(cand);
            }
        }
        g *= 2u32;
    }
    let mut samples = 0usize;
    let mut best = (Float::new(prec), lo.clone());
    for x in &xs {
        let v = lower_at(x)?;
        samples += 1;
        if v > best.0 {
            best = (v, x.clone());
        }
    }
    // Local refinement: shrink a bracket around the incumbent.
    let mut step = Float::with_val(prec, &width / (pts - 1) as u32);
    for _ in 0..grid.refine {
        step /= 2u32;
        for dir in [-1i32, 1] {
            let cand = Float::with_val(prec, &best.1 + Float::with_val(prec, &step * dir));
            if cand < lo || cand > hi {
                continue;
            }
            let v = lower_at(&cand)?;
            samples += 1;
            if v > best.0 {
                best = (v, cand);
            }
        }
    }
    Ok(SupNormLower {
        lower: best.0,
        at: best.1,
        samples,
        note: "certified lower bound (max of certified evaluations); no upper bound is claimed",
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::CRational;
    use rug::Rational;

    #[test]
    fn l1_of_scaled_sine() {
        let n = l1_norm(&SeriesSpec::sin_scaled(1).unwrap(), 40, 128).unwrap();
        let e = n.enclosure().unwrap();
        let truth = Float::with_val(128, 1).sinh();
        assert!(e.contains(&truth));
        assert!(e.rad() < 1e-30);
    }

    #[test]
    fn l1_of_gaussian_is_e() {
        let g = SeriesSpec::gaussian(Rational::from(1), 0).unwrap();
        let e = l1_norm(&g, 80, 128).unwrap().enclosure().unwrap();
        assert!(e.contains(&Float::with_val(128, 1).exp()));
    }

    #[test]
    fn sup_of_sine_reaches_one() {
        let r = sup_norm_estimate(
            &SeriesSpec::sin(),
            &SupDomain::Real {
                radius: Float::with_val(128, 4),
            },
            &SupGrid::default(),
            128,
        )
        .unwrap();
        assert!(r.lower >= Float::with_val(128, 1) - 1e-20f64);
        assert!(r.lower <= 1);
    }

    #[test]
    fn sup_of_constant() {
        let c = SeriesSpec::constant(CRational::from_i64(-3));
        let r = sup_norm_estimate(
            &c,
            &SupDomain::Interval {
                lo: Float::with_val(64, -1),
                hi: Float::with_val(64, 1),
            },
            &SupGrid { points: 4, refine: 0 },
            64,
        )
        .unwrap();
        assert_eq!(r.lower, 3);
    }
}
