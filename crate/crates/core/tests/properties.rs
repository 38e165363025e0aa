//! Property tests for module invariants, with a fixed seed.

mod common;

use std::f64::consts::PI;

use common::{grid, DT};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed};
use waveshape::*;

fn config(cases: u32) -> Config {
    Config {
        cases,
        rng_seed: RngSeed::Fixed(0x00dd_5eed),
        failure_persistence: None,
        ..Config::default()
    }
}

fn coefficients(max_modes: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 1..=max_modes)
        .prop_map(|v| v.into_iter().map(|(re, im)| Complex64::new(re, im)).collect())
}

fn samples(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0..1.0f64, n)
}

fn plane_of(x: Vec<f64>) -> SstPlane {
    let w = MotherWavelet::bump(0.1).unwrap();
    let sig = SampledSignal::new(0.0, DT, x).unwrap();
    let sc = cwt(&sig, &w, &default_scale_grid(&w, 2.0, 12.0, 1, 16).unwrap()).unwrap();
    let bins = FrequencyBins::linear(1.0, 20.0, 96).unwrap();
    synchrosqueeze(&sc, &omega(&sc, 0.02), &bins, 0.0, 0.02).unwrap()
}

fn sorted_events() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.2..2.0f64, 3..30).prop_map(|gaps| {
        gaps.iter()
            .scan(0.0, |t, g| {
                *t += g;
                Some(*t)
            })
            .collect()
    })
}

proptest! {
    #![proptest_config(config(48))]

    #[test]
    fn shapes_have_unit_norm(c in coefficients(24)) {
        if let Ok(s) = FourierShape::from_coeffs(c) {
            prop_assert!((s.l2_norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn larger_tail_budget_never_needs_more_harmonics(c in coefficients(24), t1 in 0.0..2.0f64, t2 in 0.0..2.0f64) {
        let Ok(s) = FourierShape::from_coeffs(c) else { return Ok(()) };
        let (lo, hi) = (t1.min(t2), t1.max(t2));
        match (s.classify(lo), s.classify(hi)) {
            (Ok(a), Ok(b)) => prop_assert!(b.harmonics <= a.harmonics),
            (Err(_), Err(_)) => {}
            other => prop_assert!(false, "inconsistent classification {:?}", other),
        }
    }

    #[test]
    fn real_part_matches_cosine_series(c in coefficients(12), phase in 0.0..(2.0 * PI)) {
        let Ok(s) = FourierShape::from_coeffs(c) else { return Ok(()) };
        let series: f64 = s
            .coeffs()
            .iter()
            .enumerate()
            .map(|(i, z)| z.norm() * ((i + 1) as f64 * phase + z.arg()).cos())
            .sum();
        prop_assert!((s.eval_real(phase) - series).abs() < 1e-12);
    }

    #[test]
    fn synthesis_is_linear_in_components(f1 in 1.0..6.0f64, f2 in 1.0..6.0f64, amp in 0.1..2.0f64) {
        let g = grid(256);
        let c1 = AnalyticComponent::new(Profile::constant(amp), Profile::linear(f1, 0.1), FourierShape::toy(ToyShape::S3));
        let c2 = AnalyticComponent::new(Profile::constant(1.0), Profile::linear(f2, 0.0), FourierShape::toy(ToyShape::S4));
        let one = |c: &AnalyticComponent| synthesize(&SuperpositionSpec::new(vec![c.clone()], 0.5, 1), &g).unwrap();
        let both = synthesize(&SuperpositionSpec::new(vec![c1.clone(), c2.clone()], 0.5, 1), &g).unwrap();
        let (a, b) = (one(&c1), one(&c2));
        for i in 0..g.n {
            prop_assert!((a.samples[i] + b.samples[i] - both.samples[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn separation_ignores_component_order(f1 in 1.0..8.0f64, f2 in 1.0..8.0f64) {
        let g = grid(64);
        let mk = |f: f64| AnalyticComponent::new(Profile::constant(1.0), Profile::linear(f, 0.0), FourierShape::exponential());
        let fwd = SuperpositionSpec::new(vec![mk(f1), mk(f2)], 0.2, 3);
        let rev = SuperpositionSpec::new(vec![mk(f2), mk(f1)], 0.2, 3);
        let (a, b) = (validate_separation(&fwd, 0.1, &g).unwrap(), validate_separation(&rev, 0.1, &g).unwrap());
        prop_assert_eq!(a.pass, b.pass);
    }
}

proptest! {
    #![proptest_config(config(16))]

    #[test]
    fn peeling_never_increases_magnitude(x in samples(128), width in 0usize..10) {
        let plane = plane_of(x);
        prop_assume!(plane.total_magnitude() > 0.0);
        let ridge = extract_ridge(&plane, 2.0).unwrap();
        let peeled = peel(&plane, &ridge, width);
        for (p, q) in peeled.s.iter().zip(plane.s.iter()) {
            prop_assert!(p.norm() <= q.norm());
        }
    }

    #[test]
    fn intuitive_rate_ignores_time_offset(events in sorted_events(), offset in -100.0..100.0f64) {
        let ev = EventList::new(events).unwrap();
        let (r0, r1) = (intuitive_rate(&ev).unwrap(), intuitive_rate(&ev.shifted(offset)).unwrap());
        let (RateCurve::Step { values: v0, .. }, RateCurve::Step { values: v1, .. }) = (&r0, &r1) else {
            panic!("intuitive rates are step curves");
        };
        for (a, b) in v0.iter().zip(v1) {
            prop_assert!((a - b).abs() <= 1e-9 * a.abs());
        }
    }

    #[test]
    fn comparison_is_symmetric(a in samples(200), b in samples(150), t0 in -1.0..1.0f64) {
        let ca = RateCurve::dense(0.0, 0.05, a);
        let cb = RateCurve::dense(t0, 0.05, b);
        let (x, y) = (compare_rates(&ca, &cb, (-10.0, 10.0)).unwrap(), compare_rates(&cb, &ca, (-10.0, 10.0)).unwrap());
        prop_assert!((x.rmse - y.rmse).abs() < 1e-12);
        prop_assert!((x.max_abs - y.max_abs).abs() < 1e-12);
        prop_assert!((x.mean_bias + y.mean_bias).abs() < 1e-12);
    }
}
