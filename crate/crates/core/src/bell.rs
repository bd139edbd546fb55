//! Complementary Bell (Uppuluri–Carpenter) numbers:
//! `exp(1 − e^x) = Σ b_n xⁿ/n!`.

use rayon::prelude::*;
use rug::{Integer, Rational};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::series::Sign;
use crate::turan::{runs_from_signs, SignRunProfile};

#[derive(Clone, Debug, PartialEq)]
pub struct BellSequence {
    /// `b_0 … b_N`.
    pub values: Vec<Integer>,
}

impl BellSequence {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sign(&self, n: usize) -> Sign {
        match self.values[n].cmp0() {
            std::cmp::Ordering::Less => Sign::Neg,
            std::cmp::Ordering::Equal => Sign::Zero,
            std::cmp::Ordering::Greater => Sign::Pos,
        }
    }
}

/// `b_0 … b_N` from `b_{n+1} = −Σ_{k≤n} C(n,k) b_k` (differentiate
/// `f = exp(1 − e^x)` to get `f' = −e^x f`), with binomials streamed row by
/// row of Pascal's triangle.
pub fn complementary_bell(n: usize) -> BellSequence {
    let mut values: Vec<Integer> = Vec::with_capacity(n + 1);
    values.push(Integer::from(1));
    let mut row: Vec<Integer> = vec![Integer::from(1)];
    for m in 0..n {
        // row = C(m, ·)
        let mut acc = Integer::new();
        for (c, b) in row.iter().zip(&values) {
            acc += c * b;
        }
        values.push(-acc);
        let mut next = Vec::with_capacity(row.len() + 1);
        next.push(Integer::from(1));
        for w in row.windows(2) {
            next.push(Integer::from(&w[0] + &w[1]));
        }
        next.push(Integer::from(1));
        row = next;
        debug_assert_eq!(row.len(), m + 2);
    }
    BellSequence { values }
}

/// Indices `n ≤ N` with `b_n = 0`.
pub fn wilf_scan(n: usize) -> Vec<usize> {
    let b = complementary_bell(n);
    b.values
        .iter()
        .enumerate()
        .filter(|(_, v)| v.cmp0() == std::cmp::Ordering::Equal)
        .map(|(i, _)| i)
        .collect()
}

/// First index at which a same-sign run of each new record length starts.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RunRecord {
    pub start: usize,
    pub length: usize,
    pub sign: char,
}

#[derive(Clone, Debug)]
pub struct BellRuns {
    pub profile: SignRunProfile,
    pub records: Vec<RunRecord>,
}

pub fn bell_sign_runs(n: usize) -> BellRuns {
    let b = complementary_bell(n);
    let signs: Vec<Sign> = (0..b.len()).map(|i| b.sign(i)).collect();
    let profile = runs_from_signs(0, &signs, false);
    let mut records = Vec::new();
    let mut best = 0;
    for r in &profile.runs {
        if r.sign != Sign::Zero && r.length > best {
            best = r.length;
            records.push(RunRecord {
                start: r.start,
                length: r.length,
                sign: r.sign.symbol(),
            });
        }
    }
    BellRuns { profile, records }
}

/// `|n·b_{n+1}·b_{n−1} / ((n+1)·b_n²)|`, exact.
pub fn turan_ratio_from(b: &BellSequence, n: usize) -> Result<Rational> {
    if n == 0 || n + 1 >= b.len() {
        return Err(Error::InvalidArgument(format!(
            "turan ratio needs 1 <= n < {}",
            b.len().saturating_sub(1)
        )));
    }
    if b.values[n].cmp0() == std::cmp::Ordering::Equal {
        return Err(Error::Inapplicable(format!("undefined at n = {n}: b_n = 0")));
    }
    let num = Integer::from(&b.values[n + 1] * &b.values[n - 1]) * n as u64;
    let den = Integer::from(b.values[n].square_ref()) * (n as u64 + 1);
    Ok(Rational::from((num, den)).abs())
}

pub fn turan_ratio(n: usize) -> Result<Rational> {
    turan_ratio_from(&complementary_bell(n + 1), n)
}

#[derive(Clone, Debug, PartialEq)]
pub struct RatioRow {
    pub n: usize,
    /// `None` where `b_n = 0`.
    pub ratio: Option<Rational>,
    pub running_max: Option<Rational>,
    pub running_min: Option<Rational>,
}

/// Turán ratios for `1 ≤ n < N` with running max/min (limsup/liminf evidence).
pub fn turan_ratio_table(n: usize) -> Vec<RatioRow> {
    let b = complementary_bell(n);
    let ratios: Vec<Option<Rational>> = (1..n)
        .into_par_iter()
        .map(|k| turan_ratio_from(&b, k).ok())
        .collect();
    let mut out = Vec::with_capacity(ratios.len());
    let (mut hi, mut lo): (Option<Rational>, Option<Rational>) = (None, None);
    for (i, r) in ratios.into_iter().enumerate() {
        if let Some(q) = &r {
            if hi.as_ref().is_none_or(|h| q > h) {
                hi = Some(q.clone());
            }
            if lo.as_ref().is_none_or(|l| q < l) {
                lo = Some(q.clone());
            }
        }
        out.push(RatioRow {
            n: i + 1,
            ratio: r,
            running_max: hi.clone(),
            running_min: lo.clone(),
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_values() {
        let b = complementary_bell(10);
        let want = [1, -1, 0, 1, 1, -2, -9, -9, 50, 267, 413];
        assert_eq!(b.values, want.iter().map(|&v| Integer::from(v)).collect::<Vec<_>>());
    }

    #[test]
    fn small_wilf_scans() {
        assert_eq!(wilf_scan(1), Vec::<usize>::new());
        assert_eq!(wilf_scan(2), vec![2]);
        assert_eq!(wilf_scan(100), vec![2]);
    }

    #[test]
    fn ratios() {
        assert_eq!(turan_ratio(4).unwrap(), Rational::from((8, 5)));
        assert_eq!(turan_ratio(5).unwrap(), Rational::from((15, 8)));
        assert!(matches!(turan_ratio(2), Err(Error::Inapplicable(_))));
        let t = turan_ratio_table(12);
        assert_eq!(t[1].ratio, None);
        assert!(t.iter().all(|r| r.running_max >= r.ratio));
    }

    #[test]
    fn runs() {
        let r = bell_sign_runs(7);
        let runs: Vec<(usize, usize, char)> = r
            .profile
            .runs
            .iter()
            .map(|x| (x.start, x.length, x.sign.symbol()))
            .collect();
        assert!(runs.contains(&(5, 3, '-')));
        let r4 = bell_sign_runs(4);
        assert!(r4.profile.runs.iter().any(|x| (x.start, x.length, x.sign) == (3, 2, Sign::Pos)));
        let r1 = bell_sign_runs(1);
        let v: Vec<_> = r1.profile.runs.iter().map(|x| (x.start, x.length, x.sign)).collect();
        assert_eq!(v, vec![(0, 1, Sign::Pos), (1, 1, Sign::Neg)]);
    }
}
