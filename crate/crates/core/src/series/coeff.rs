//! Exact coefficient values.
//!
//! Every built-in family has coefficients of the form `Σ c_i·√r_i` with
//! complex-rational `c_i` and positive rational `r_i` (a single term in all
//! but mixed sums). Keeping them symbolic means Turán ratios and witness
//! points never pick up rounding noise.

use rug::{Integer, Rational};

use crate::num::{rational_sqrt_exact, CInterval, CRational, Interval};

/// `scale · √radicand` with `radicand > 0` and not a perfect square
/// (perfect squares are folded into `scale`; `radicand == 1` means rational).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Surd {
    pub scale: CRational,
    pub radicand: Rational,
}

impl Surd {
    pub fn new(scale: CRational, radicand: Rational) -> Self {
        assert!(radicand > 0, "surd radicand must be positive");
        match rational_sqrt_exact(&radicand) {
            Some(root) => Surd {
                scale: scale.mul_rational(&root),
                radicand: Rational::from(1),
            },
            None => Surd { scale, radicand },
        }
    }

    pub fn rational(q: CRational) -> Self {
        Surd {
            scale: q,
            radicand: Rational::from(1),
        }
    }

    pub fn is_rational(&self) -> bool {
        self.radicand == 1
    }

    pub fn abs_sq(&self) -> Rational {
        self.scale.abs_sq() * &self.radicand
    }

    pub fn mul(&self, o: &Surd) -> Surd {
        let scale = self.scale.mul(&o.scale);
        if self.radicand == o.radicand {
            return Surd::rational(scale.mul_rational(&self.radicand));
        }
        Surd::new(scale, Rational::from(&self.radicand * &o.radicand))
    }

    pub fn enclose(&self, prec: u32) -> CInterval {
        let base = CInterval::from_crational(prec, &self.scale);
        if self.is_rational() {
            return base;
        }
        let root = Interval::from_rational(prec, &self.radicand)
            .sqrt()
            .expect("positive radicand");
        base.mul_real(&root)
    }
}

/// A coefficient: exact when the rule permits, otherwise an enclosure.
#[derive(Clone, Debug, PartialEq)]
pub enum Coeff {
    /// Sum of surds with pairwise distinct radicands and nonzero scales;
    /// the empty sum is zero.
    Exact(Vec<Surd>),
    Enclosed(CInterval),
}

/// Sign of a real coefficient.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sign {
    Neg,
    Zero,
    Pos,
}

impl Sign {
    pub fn as_i8(self) -> i8 {
        match self {
            Sign::Neg => -1,
            Sign::Zero => 0,
            Sign::Pos => 1,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Sign::Neg => '-',
            Sign::Zero => '0',
            Sign::Pos => '+',
        }
    }
}

impl Coeff {
    pub fn zero() -> Self {
        Coeff::Exact(Vec::new())
    }

    pub fn rational(q: CRational) -> Self {
        if q.is_zero() {
            Coeff::zero()
        } else {
            Coeff::Exact(vec![Surd::rational(q)])
        }
    }

    pub fn real(q: Rational) -> Self {
        Coeff::rational(CRational::real(q))
    }

    pub fn surd(s: Surd) -> Self {
        if s.scale.is_zero() {
            Coeff::zero()
        } else {
            Coeff::Exact(vec![s])
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Coeff::Exact(_))
    }

    /// `Some(true)` for exact zero, `Some(false)` when provably nonzero,
    /// `None` for an enclosure touching zero.
    pub fn is_zero(&self) -> Option<bool> {
        match self {
            Coeff::Exact(terms) => Some(terms.is_empty()),
            Coeff::Enclosed(c) => {
                if !c.re.contains_zero() || !c.im.contains_zero() {
                    Some(false)
                } else if c.re.is_point() && c.im.is_point() {
                    Some(true)
                } else {
                    None
                }
            }
        }
    }

    pub fn is_real(&self) -> bool {
        match self {
            Coeff::Exact(terms) => terms.iter().all(|t| t.scale.is_real()),
            Coeff::Enclosed(c) => c.is_real(),
        }
    }

    /// The value as a complex rational, when it is one.
    pub fn as_rational(&self) -> Option<CRational> {
        match self {
            Coeff::Exact(terms) if terms.is_empty() => Some(CRational::zero()),
            Coeff::Exact(terms) if terms.len() == 1 && terms[0].is_rational() => {
                Some(terms[0].scale.clone())
            }
            _ => None,
        }
    }

    /// Exact `|a|²` when it is rational (at most one surd term).
    pub fn abs_sq(&self) -> Option<Rational> {
        match self {
            Coeff::Exact(terms) if terms.is_empty() => Some(Rational::new()),
            Coeff::Exact(terms) if terms.len() == 1 => Some(terms[0].abs_sq()),
            _ => None,
        }
    }

    pub fn enclose(&self, prec: u32) -> CInterval {
        match self {
            Coeff::Exact(terms) => terms
                .iter()
                .fold(CInterval::zero(prec), |acc, t| acc.add(&t.enclose(prec))),
            Coeff::Enclosed(c) => c.clone(),
        }
    }

    /// Sign of a real coefficient, `None` if complex or undetermined.
    pub fn sign(&self) -> Option<Sign> {
        if !self.is_real() {
            return None;
        }
        match self {
            Coeff::Exact(terms) if terms.is_empty() => Some(Sign::Zero),
            Coeff::Exact(terms) if terms.len() == 1 => Some(sign_of(&terms[0].scale.re)),
            _ => {
                // Mixed surds or an enclosure: tighten until the sign is clear.
                for prec in [128u32, 512, 2048] {
                    let e = self.enclose(prec).re;
                    if e.is_positive() {
                        return Some(Sign::Pos);
                    }
                    if e.is_negative() {
                        return Some(Sign::Neg);
                    }
                    if matches!(self, Coeff::Enclosed(_)) {
                        break;
                    }
                }
                None
            }
        }
    }

    pub fn neg(&self) -> Coeff {
        match self {
            Coeff::Exact(terms) => Coeff::Exact(
                terms
                    .iter()
                    .map(|t| Surd {
                        scale: t.scale.neg(),
                        radicand: t.radicand.clone(),
                    })
                    .collect(),
            ),
            Coeff::Enclosed(c) => Coeff::Enclosed(c.neg()),
        }
    }

    pub fn add(&self, o: &Coeff, prec: u32) -> Coeff {
        match (self, o) {
            (Coeff::Exact(a), Coeff::Exact(b)) => {
                let mut out = a.clone();
                for t in b {
                    push_surd(&mut out, t.clone());
                }
                Coeff::Exact(out)
            }
            _ => Coeff::Enclosed(self.enclose(prec).add(&o.enclose(prec))),
        }
    }

    pub fn scale(&self, c: &CRational, prec: u32) -> Coeff {
        match self {
            Coeff::Exact(terms) => {
                if c.is_zero() {
                    return Coeff::zero();
                }
                Coeff::Exact(
                    terms
                        .iter()
                        .map(|t| Surd {
                            scale: t.scale.mul(c),
                            radicand: t.radicand.clone(),
                        })
                        .collect(),
                )
            }
            Coeff::Enclosed(e) => Coeff::Enclosed(e.mul(&CInterval::from_crational(prec, c))),
        }
    }

    pub fn mul(&self, o: &Coeff, prec: u32) -> Coeff {
        match (self, o) {
            (Coeff::Exact(a), Coeff::Exact(b)) => {
                let mut out = Vec::new();
                for s in a {
                    for t in b {
                        push_surd(&mut out, s.mul(t));
                    }
                }
                Coeff::Exact(out)
            }
            _ => Coeff::Enclosed(self.enclose(prec).mul(&o.enclose(prec))),
        }
    }

    /// Natural log of `|a|` in double precision (for scans and diagnostics).
    pub fn ln_abs_f64(&self) -> f64 {
        match self.abs_sq() {
            Some(q) if q == 0 => f64::NEG_INFINITY,
            Some(q) => crate::num::ln_abs_f64(&q) / 2.0,
            None => {
                let a = self.enclose(128).abs();
                let m = a.mid();
                if m.is_zero() {
                    f64::NEG_INFINITY
                } else {
                    m.ln().to_f64()
                }
            }
        }
    }

    /// Human-readable exact form: `p/q`, `p/q*sqrt(r)`, sums thereof, or an interval.
    pub fn render(&self) -> String {
        match self {
            Coeff::Exact(terms) if terms.is_empty() => "0".into(),
            Coeff::Exact(terms) => terms
                .iter()
                .map(|t| {
                    if t.is_rational() {
                        t.scale.to_string()
                    } else {
                        format!("({})*sqrt({})", t.scale, t.radicand)
                    }
                })
                .collect::<Vec<_>>()
                .join(" + "),
            Coeff::Enclosed(c) => format!("{} + i{}", c.re, c.im),
        }
    }
}

fn push_surd(out: &mut Vec<Surd>, t: Surd) {
    if t.scale.is_zero() {
        return;
    }
    if let Some(pos) = out.iter().position(|s| s.radicand == t.radicand) {
        let sum = out[pos].scale.add(&t.scale);
        if sum.is_zero() {
            out.remove(pos);
        } else {
            out[pos].scale = sum;
        }
    } else {
        out.push(t);
    }
}

pub(crate) fn sign_of(q: &Rational) -> Sign {
    match q.cmp0() {
        std::cmp::Ordering::Less => Sign::Neg,
        std::cmp::Ordering::Equal => Sign::Zero,
        std::cmp::Ordering::Greater => Sign::Pos,
    }
}

pub(crate) fn factorial(n: u32) -> Integer {
    Integer::from(Integer::factorial(n))
}
