use dirtail::asymptotics::{density_thm, tail_thm};
use dirtail::config::parse_dist;
use dirtail::logspace::{log_add_exp, log_sum_exp};
use dirtail::montecarlo::{estimate_tail, McConfig, Remainder};
use dirtail::oracle::Enumeration;
use dirtail::saddle::solve_t;
use dirtail::series::mean_series;
use dirtail::{Cgf, Constants, Distribution};
use proptest::prelude::*;

fn two_point() -> impl Strategy<Value = Distribution> {
    (0.2f64..5.0, 0.05f64..0.95).prop_map(|(b, theta)| Distribution::two_point(b, theta).unwrap())
}

fn family() -> impl Strategy<Value = Distribution> {
    prop_oneof![
        two_point(),
        (0.5f64..3.0, 0.5f64..4.0).prop_map(|(b, r)| Distribution::poly_edge(b, r).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cgf_is_convex_with_drift_below_edge(spec in family(), s in -30.0f64..60.0) {
        let cgf = Cgf::new(spec.clone());
        let d = cgf.derivs(s).unwrap();
        prop_assert!(d.d2 >= 0.0);
        prop_assert!(d.d1 <= spec.b() * (1.0 + 1e-12));
        prop_assert!(d.psi >= -1e-12 * (1.0 + s.abs()));
        // ψ'(s) has the sign of s
        prop_assert!(d.d1 * s >= -1e-12);
        prop_assert!((d.l - (d.psi - spec.b() * s)).abs() <= 1e-9 * (1.0 + d.psi.abs()));
    }

    #[test]
    fn saddle_round_trip(spec in family(), alpha in 0.55f64..=1.0, x in 0.1f64..20.0) {
        let cgf = Cgf::new(spec);
        let sp = solve_t(&cgf, alpha, x).unwrap();
        prop_assert!(sp.t > 0.0);
        let m = mean_series(&cgf, alpha, sp.t).unwrap().value;
        prop_assert!((m - x).abs() <= 1e-10 * (1.0 + x), "M(t) = {m}, x = {x}");
    }

    #[test]
    fn saddle_is_monotone(spec in family(), alpha in 0.55f64..=1.0, x in 0.5f64..15.0, dx in 0.01f64..3.0) {
        let cgf = Cgf::new(spec);
        let t0 = solve_t(&cgf, alpha, x).unwrap().t;
        let t1 = solve_t(&cgf, alpha, x + dx).unwrap().t;
        prop_assert!(t1 > t0);
    }

    #[test]
    fn sigma_one_is_edge(spec in two_point()) {
        let c = Constants::compute(&Cgf::new(spec.clone()), 1.0).unwrap();
        prop_assert!((c.sigma_sq - spec.b()).abs() < 1e-8 * spec.b().max(1.0));
    }

    #[test]
    fn constant_identities_hold(spec in family(), alpha in 0.55f64..0.99) {
        let c = Constants::compute(&Cgf::new(spec), alpha).unwrap();
        prop_assert!(c.sigma_sq > 0.0);
        prop_assert!(c.checks.dual_sigma_rel_err < 1e-6);
        prop_assert!(c.checks.kappa_identity_rel_err.unwrap() < 1e-6);
    }

    #[test]
    fn theorem_tail_decreases_and_density_ratio_grows(spec in family(), alpha in prop::sample::select(vec![0.75, 0.9, 1.0]), x in 6.0f64..14.0) {
        let c = Constants::compute(&Cgf::new(spec), alpha).unwrap();
        let a = tail_thm(&c, x).unwrap().log_value;
        let b = tail_thm(&c, x + 0.5).unwrap().log_value;
        prop_assert!(b < a);
        // log g - log P tracks log t(x), which increases
        let ra = density_thm(&c, x).unwrap().log_value - a;
        let rb = density_thm(&c, x + 0.5).unwrap().log_value - b;
        prop_assert!(rb > ra);
    }

    #[test]
    fn log_sum_exp_matches_pairwise(v in prop::collection::vec(-800.0f64..50.0, 1..12)) {
        let all = log_sum_exp(&v);
        let folded = v.iter().skip(1).fold(v[0], |acc, &x| log_add_exp(acc, x));
        prop_assert!((all - folded).abs() <= 1e-12 * all.abs().max(1.0));
        let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(all >= max && all <= max + (v.len() as f64).ln() + 1e-12);
    }

    #[test]
    fn parsed_two_point_keeps_parameters(b in 0.1f64..10.0, theta in 0.01f64..0.99) {
        let spec = parse_dist(&format!("two_point:b={b},theta={theta}")).unwrap();
        prop_assert_eq!(spec.b(), b);
        prop_assert_eq!(spec.theta(), Some(theta));
        prop_assert!(spec.variance() > 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn enumeration_tail_is_a_survival_function(k in 1usize..12, y0 in -6.0f64..6.0, dy in 0.0f64..2.0) {
        let e = Enumeration::new(&Distribution::rademacher(), 1.0, k).unwrap();
        let (a, b) = (e.tail(y0), e.tail(y0 + dy));
        prop_assert!((0.0..=1.0).contains(&a));
        prop_assert!(b <= a);
        prop_assert_eq!(e.tail(-100.0), 1.0);
        prop_assert_eq!(e.tail(100.0), 0.0);
    }

    #[test]
    fn mc_is_seed_deterministic(seed in any::<u64>(), x in 1.0f64..6.0) {
        let cgf = Cgf::new(Distribution::rademacher());
        let cfg = McConfig { n_samples: 2000, k_trunc: Some(64), seed, threads: 1, remainder: Remainder::Gaussian };
        let a = estimate_tail(&cgf, 1.0, x, &cfg).unwrap();
        let b = estimate_tail(&cgf, 1.0, x, &McConfig { threads: 2, ..cfg.clone() }).unwrap();
        prop_assert_eq!(a.log_estimate.to_bits(), b.log_estimate.to_bits());
        prop_assert!(a.log_estimate < 0.0 && a.std_error_of_log > 0.0);
    }
}
