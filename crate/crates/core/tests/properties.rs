use std::f64::consts::TAU;

use proptest::prelude::*;
use zonalflow::arith::{gauss_sum_closed, gauss_sum_direct, kadec_gap, rep_count_r, rep_count_r_table, GaussSumParams};
use zonalflow::experiments::{interval_union, BlowupInterval};
use zonalflow::quadrature::{fit_exponent, smooth_size, spacetime_norm_auto};
use zonalflow::spectral::{
    apply_multiplier, rational_phase, schrodinger_evolve, schrodinger_phase, sobolev_weight, CircleField, Field,
    ZonalField,
};
use zonalflow::Complex64;

fn coeffs(max_len: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..max_len)
        .prop_map(|v| v.into_iter().map(|(re, im)| Complex64::new(re, im)).collect())
}

fn zonal() -> impl Strategy<Value = ZonalField> {
    (2usize..7, coeffs(40)).prop_map(|(n, c)| ZonalField::new(n, c).unwrap())
}

fn close(a: &[(i64, Complex64)], b: &[(i64, Complex64)], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.0 == y.0 && (x.1 - y.1).norm() <= tol)
}

fn is_smooth(mut m: usize) -> bool {
    for p in [2, 3, 5] {
        while m.is_multiple_of(p) {
            m /= p;
        }
    }
    m == 1
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn evolution_is_an_isometry(f in zonal(), t in -100.0f64..100.0) {
        let g = schrodinger_evolve(&f, t);
        prop_assert!((g.l2_norm() - f.l2_norm()).abs() <= 1e-13 * f.l2_norm().max(1e-300));
    }

    #[test]
    fn evolution_is_a_group(f in zonal(), s in -20.0f64..20.0, t in -20.0f64..20.0) {
        let two_steps = schrodinger_evolve(&schrodinger_evolve(&f, s), t);
        let one_step = schrodinger_evolve(&f, s + t);
        prop_assert!(close(&two_steps.modes(), &one_step.modes(), 1e-9));
    }

    #[test]
    fn full_period_is_the_identity(f in zonal(), turns in -5i32..6) {
        let g = schrodinger_evolve(&f, TAU * turns as f64);
        prop_assert_eq!(g.modes(), f.modes());
    }

    #[test]
    fn multipliers_commute_with_evolution(f in zonal(), t in -10.0f64..10.0, s in -2.0f64..2.0) {
        let m = sobolev_weight(f.n(), s);
        let a = apply_multiplier(&schrodinger_evolve(&f, t), &m).unwrap();
        let b = schrodinger_evolve(&apply_multiplier(&f, &m).unwrap(), t);
        let scale = a.coefficient_norm().max(1.0);
        prop_assert!(close(&a.modes(), &b.modes(), 1e-13 * scale));
    }

    #[test]
    fn rational_phase_matches_real_time(lambda in 0u64..100_000, p in -50i64..50, q in 1u64..500) {
        let exact = rational_phase(lambda, p, q);
        let real = schrodinger_phase(lambda, TAU * p as f64 / q as f64);
        prop_assert!((exact - real).norm() < 1e-8);
        prop_assert!((exact.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn gauss_closed_form_matches_direct_sum(half_q in 0u64..150, p_half in 0u64..150, n in 1u64..9) {
        let q = 2 * half_q + 1;
        let p = 2 * (p_half % q);
        let params = GaussSumParams::new(q, p, n).unwrap();
        let closed = gauss_sum_closed(params).unwrap();
        let direct = gauss_sum_direct(q, params.linear_coefficient()).unwrap();
        prop_assert!((closed - direct).norm() <= 1e-9 * (q as f64).sqrt());
    }

    #[test]
    fn gauss_sums_depend_on_the_residue_only(half_q in 0u64..100, c in -1000i64..1000, shift in -5i64..5) {
        let q = 2 * half_q + 1;
        let a = gauss_sum_direct(q, c).unwrap();
        let b = gauss_sum_direct(q, c + shift * q as i64).unwrap();
        prop_assert_eq!(a, b);
        prop_assert!((a.norm() - (q as f64).sqrt()).abs() <= 1e-9 * q as f64);
    }

    #[test]
    fn rep_table_matches_pointwise_count(smax in 0u64..3000) {
        let table = rep_count_r_table(smax);
        prop_assert_eq!(table[smax as usize] as u64, rep_count_r(smax));
    }

    #[test]
    fn smooth_size_is_the_next_smooth_number(min in 1usize..100_000) {
        let m = smooth_size(min);
        prop_assert!(m >= min && is_smooth(m));
        prop_assert!((min..m).all(|j| !is_smooth(j)));
    }

    #[test]
    fn power_fit_recovers_exact_laws(a in -3.0f64..3.0, c in 0.1f64..10.0, len in 3usize..10) {
        let series: Vec<(f64, f64)> = (0..len).map(|i| {
            let x = 2f64.powi(i as i32 + 2);
            (x, c * x.powf(a))
        }).collect();
        let fit = fit_exponent(&series).unwrap();
        prop_assert!((fit.slope - a).abs() < 1e-10);
        prop_assert!((fit.intercept - c.ln()).abs() < 1e-9);
        prop_assert!(fit.r2 > 1.0 - 1e-12);
    }

    #[test]
    fn kadec_gap_is_decreasing_and_accurate(k in 1u64..1_000_000) {
        let g = kadec_gap(k).unwrap();
        prop_assert!(kadec_gap(k + 1).unwrap() < g);
        prop_assert!(g > 0.0 && g <= 1.0 / (8.0 * k as f64));
        if k < 1000 {
            let naive = (((k * (k + 1)) as f64).sqrt() - k as f64 - 0.5).abs();
            prop_assert!((naive - g).abs() < 1e-11);
        }
    }

    #[test]
    fn union_measure_is_bounded_by_lengths(raw in prop::collection::vec((0.0f64..3.0, 0.001f64..0.2), 1..30)) {
        let mut ivs: Vec<BlowupInterval> = raw.iter().enumerate()
            .map(|(i, &(lo, len))| BlowupInterval { p: 2 * i as u64, q: 1_000_003, lo, hi: lo + len })
            .collect();
        ivs.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        let (measure, disjoint) = interval_union(&ivs);
        let total: f64 = ivs.iter().map(|iv| iv.hi - iv.lo).sum();
        let longest = ivs.iter().map(|iv| iv.hi - iv.lo).fold(0.0, f64::max);
        prop_assert!(measure <= total + 1e-12 && measure >= longest - 1e-12);
        if disjoint {
            prop_assert!((measure - total).abs() < 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn circle_norm_is_translation_invariant(c in coeffs(16), n in 1usize..4, phi in 0.0f64..TAU) {
        let f = CircleField::one_sided(n, c).unwrap();
        let g = f.map_modes(|k, a| a * Complex64::from_polar(1.0, k as f64 * phi));
        for p in [4u32, 6] {
            let a = spacetime_norm_auto(&f, p).unwrap().value;
            let b = spacetime_norm_auto(&g, p).unwrap().value;
            prop_assert!((a - b).abs() <= 1e-12 * a.max(1e-300));
        }
    }
}
