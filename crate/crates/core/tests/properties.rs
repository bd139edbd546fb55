use bounded_series::series::{eval, eval_auto, Sign};
use bounded_series::topology::l1_distance_auto;
use bounded_series::turan::{estimate_chi, runs_from_signs, theta_psi_rational};
use bounded_series::{BigComplex, CRational, Rho, SeriesSpec, SignRule};
use proptest::prelude::*;
use rug::float::Round;
use rug::{Float, Rational};

type C = (Rational, Rational);

fn c_add(a: &C, b: &C) -> C {
    (Rational::from(&a.0 + &b.0), Rational::from(&a.1 + &b.1))
}

fn c_mul(a: &C, b: &C) -> C {
    (
        Rational::from(&a.0 * &b.0) - Rational::from(&a.1 * &b.1),
        Rational::from(&a.0 * &b.1) + Rational::from(&a.1 * &b.0),
    )
}

fn to_c(c: &C) -> CRational {
    CRational::new(c.0.clone(), c.1.clone())
}

fn coeff_of(s: &SeriesSpec, n: usize) -> C {
    let q = s.coeff(n).unwrap().as_rational().unwrap();
    (q.re, q.im)
}

fn arb_c() -> impl Strategy<Value = C> {
    (-20i64..=20, 1i64..=6, -20i64..=20, 1i64..=6)
        .prop_map(|(a, b, c, d)| (Rational::from((a, b)), Rational::from((c, d))))
}

fn arb_poly() -> impl Strategy<Value = Vec<C>> {
    prop::collection::vec(arb_c(), 1..10)
}

fn spec(p: &[C]) -> SeriesSpec {
    SeriesSpec::explicit(p.iter().map(to_c))
}

fn get(p: &[C], n: usize) -> C {
    p.get(n).cloned().unwrap_or_default()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn algebra_matches_brute_force(p in arb_poly(), q in arb_poly(), c in arb_c(), k in 0usize..5) {
        let (s, t) = (spec(&p), spec(&q));
        let sum = s.add(&t);
        let scaled = s.scale(to_c(&c));
        let prod = s.cauchy_product(&t);
        let shifted = s.shift(k);
        let ext = s.left_extend(to_c(&c));
        for n in 0..(p.len() + q.len() + 2) {
            prop_assert_eq!(coeff_of(&sum, n), c_add(&get(&p, n), &get(&q, n)));
            prop_assert_eq!(coeff_of(&scaled, n), c_mul(&c, &get(&p, n)));
            let mut acc = C::default();
            for i in 0..=n {
                acc = c_add(&acc, &c_mul(&get(&p, i), &get(&q, n - i)));
            }
            prop_assert_eq!(coeff_of(&prod, n), acc);
            prop_assert_eq!(coeff_of(&shifted, n), get(&p, n + k));
            let want = if n == 0 { c.clone() } else { get(&p, n - 1) };
            prop_assert_eq!(coeff_of(&ext, n), want);
        }
    }

    #[test]
    fn shift_undoes_left_extension(p in arb_poly(), c in arb_c()) {
        let s = spec(&p);
        let back = s.left_extend(to_c(&c)).shift(1);
        for n in 0..p.len() + 3 {
            prop_assert_eq!(coeff_of(&back, n), coeff_of(&s, n));
        }
    }

    #[test]
    fn l1_is_submultiplicative(p in arb_poly(), q in arb_poly()) {
        let (s, t) = (spec(&p), spec(&q));
        let zero = SeriesSpec::explicit_i64(&[0]);
        let ns = l1_distance_auto(&s, &zero, 128).unwrap();
        let nt = l1_distance_auto(&t, &zero, 128).unwrap();
        let np = l1_distance_auto(&s.cauchy_product(&t), &zero, 128).unwrap();
        let prod = Float::with_val_round(128, ns.hi() * nt.hi(), Round::Up).0;
        prop_assert!(np.lo() <= &prod);
        // and the triangle inequality
        let nsum = l1_distance_auto(&s.add(&t), &zero, 128).unwrap();
        let sum = Float::with_val_round(128, ns.hi() + nt.hi(), Round::Up).0;
        prop_assert!(nsum.lo() <= &sum);
    }

    #[test]
    fn theta_psi_monotone(a in 1u32..999, b in 1u32..999) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let tl = theta_psi_rational(&Rational::from((lo, 1000)), 128).unwrap();
        let th = theta_psi_rational(&Rational::from((hi, 1000)), 128).unwrap();
        // ϑ is nonincreasing in χ (None = ∞), ψ nondecreasing.
        prop_assert!(th.theta.unwrap_or(u64::MAX) <= tl.theta.unwrap_or(u64::MAX));
        prop_assert!(th.psi >= tl.psi);
    }

    #[test]
    fn theta_turan_constant_exact(p in 1u32..20, q in 2u32..21, seed in any::<u64>()) {
        prop_assume!(p < q);
        let rho = Rational::from((p, q));
        let s = SeriesSpec::theta(Rho::Rational(rho.clone()), SignRule::Random(seed)).unwrap();
        let prof = estimate_chi(&s, 1, 40, 128).unwrap();
        prop_assert_eq!(prof.chi_exact, Some(Rational::from(rho.square_ref())));
    }

    #[test]
    fn run_partition(signs in prop::collection::vec(prop_oneof![Just(Sign::Neg), Just(Sign::Zero), Just(Sign::Pos)], 1..80),
                     start in 0usize..50) {
        let prof = runs_from_signs(start, &signs, false);
        let total: usize = prof.runs.iter().map(|r| r.length).sum();
        prop_assert_eq!(total, signs.len());
        prop_assert_eq!(prof.runs[0].start, start);
        for w in prof.runs.windows(2) {
            prop_assert_eq!(w[0].start + w[0].length, w[1].start);
            prop_assert!(w[0].sign != w[1].sign);
        }
        for (i, s) in signs.iter().enumerate() {
            prop_assert_eq!(prof.sign_at(start + i), Some(*s));
        }
        // L(n) is nonincreasing and bounded by the remaining length.
        let mut prev = usize::MAX;
        for n in start..start + signs.len() {
            let l = prof.l_of(n);
            prop_assert!(l <= prev);
            prop_assert!(l <= start + signs.len() - n);
            prev = l;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn certified_evaluation_encloses_refined_value(
        which in 0usize..4,
        re in -6.0f64..6.0,
        im in -2.0f64..2.0,
    ) {
        let s = match which {
            0 => SeriesSpec::sin(),
            1 => SeriesSpec::cos(),
            2 => SeriesSpec::theta(Rho::Rational(Rational::from((1, 2))), SignRule::Random(3)).unwrap(),
            _ => SeriesSpec::gaussian(Rational::from(1), 1).unwrap(),
        };
        let z = BigComplex::from_f64(128, re, im);
        let e = eval_auto(&s, &z, 128).unwrap();
        prop_assume!(e.truncation_certified);
        let n = e.terms * 4 + 16;
        let fine = eval(&s, &BigComplex::from_f64(512, re, im), n, 512).unwrap();
        let d = BigComplex::new(
            Float::with_val(512, &e.value.re - &fine.value.re),
            Float::with_val(512, &e.value.im - &fine.value.im),
        )
        .abs();
        prop_assert!(d <= Float::with_val(512, &e.error + &fine.error));
    }
}
