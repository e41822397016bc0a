//! Property tests for the invariants of each module.

use lebesgue_circle::distortion::{
    cylinder_oscillation, cylinders, distortion_level, distortion_level_with, DistortionOptions,
};
use lebesgue_circle::extension::{assemble_circle_map, condition_one_margin, extend_missing_branch};
use lebesgue_circle::io::{map_from_json, map_to_json};
use lebesgue_circle::perturbation::{c1_distance, perturb_map, DISTANCE_GRID};
use lebesgue_circle::transfer::{invariance_defect, pullback_measure_defect, transfer_apply, DensityGrid};
use lebesgue_circle::{Branch, FullBranchMap, Interval, Modulus, PartialMapSpec, PerturbationConfig};
use proptest::prelude::*;

const DELTA: f64 = 1e-3;

fn iv(lo: f64, hi: f64) -> Interval {
    Interval::new(lo, hi).unwrap()
}

/// `x + a sin(2 pi j x / (2w))` scaled onto `[0, 1]` over `[lo, lo + w]`, with `f' >= 1.2`.
fn sine_branch(lo: f64, w: f64, fraction: f64, half_waves: u32) -> Branch {
    let j = half_waves as f64;
    let max_amplitude = (1.0 - 1.2 * w) / (std::f64::consts::PI * j);
    Branch::sine_perturbed(iv(lo, lo + w), 1.0 / w, fraction * max_amplitude, j / (2.0 * w))
}

/// Two-branch spec with a sine first branch on `[0, w]` and the second branch missing.
fn two_branch_spec(w: f64, fraction: f64, half_waves: u32) -> PartialMapSpec {
    PartialMapSpec::new(vec![0.0, w, 1.0], 2, vec![sine_branch(0.0, w, fraction, half_waves)]).unwrap()
}

fn sine_map(amplitude: f64) -> FullBranchMap {
    let spec =
        PartialMapSpec::new(vec![0.0, 0.5, 1.0], 2, vec![Branch::sine_perturbed(iv(0.0, 0.5), 2.0, amplitude, 1.0)])
            .unwrap();
    assemble_circle_map(&spec, DELTA).unwrap()
}

fn spec_strategy() -> impl Strategy<Value = PartialMapSpec> {
    (0.3..0.6f64, -0.9..0.9f64, 1u32..=2).prop_map(|(w, a, j)| two_branch_spec(w, a, j))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn inverse_round_trip_and_monotone(w in 0.2..0.7f64, a in -0.95..0.95f64, j in 1u32..=3) {
        let b = sine_branch(0.1, w, a, j);
        let mut prev = f64::NEG_INFINITY;
        for k in 0..=200 {
            let u = k as f64 / 200.0;
            let x = b.inverse(u).unwrap();
            prop_assert!((b.eval(x).unwrap() - u).abs() <= 1e-12);
            prop_assert!(x > prev);
            prev = x;
        }
    }

    #[test]
    fn derivative_matches_finite_difference(w in 0.2..0.7f64, a in -0.95..0.95f64, j in 1u32..=3) {
        let b = sine_branch(0.0, w, a, j);
        let h = 1e-6;
        for k in 1..50 {
            let x = w * k as f64 / 50.0;
            let fd = (b.eval(x + h).unwrap() - b.eval(x - h).unwrap()) / (2.0 * h);
            let d = b.deriv(x).unwrap();
            prop_assert!(((fd - d) / d).abs() <= 1e-5);
        }
    }

    #[test]
    fn extension_preserves_interval_measure(spec in spec_strategy(), cuts in prop::collection::vec((0.0..1.0f64, 0.0..1.0f64), 20)) {
        let m = assemble_circle_map(&spec, DELTA).unwrap();
        let intervals: Vec<Interval> = cuts
            .iter()
            .filter(|(p, q)| p != q)
            .map(|&(p, q)| iv(p.min(q), p.max(q)))
            .collect();
        prop_assert!(pullback_measure_defect(&m, &intervals).unwrap() <= 1e-10);
        prop_assert!(invariance_defect(&m, 1000).unwrap() <= 1e-8);
    }

    #[test]
    fn extended_derivative_is_the_reciprocal_formula(spec in spec_strategy(), u in 0.0..1.0f64) {
        let b = extend_missing_branch(&spec, DELTA).unwrap();
        let (x, d) = b.inverse_with_deriv(u).unwrap();
        let expected = 1.0 / (1.0 - spec.reciprocal_sum(u).unwrap());
        prop_assert!(((d - expected) / expected).abs() <= 1e-12);
        prop_assert!(d > 1.0);
        prop_assert!(d <= (1.0 + 1e-9) / condition_one_margin(&spec, 10_000).unwrap());
        prop_assert!((b.eval(x).unwrap() - u).abs() <= 1e-12);
    }

    #[test]
    fn extension_is_deterministic(spec in spec_strategy()) {
        let a = map_to_json(&assemble_circle_map(&spec, DELTA).unwrap()).unwrap();
        let b = map_to_json(&assemble_circle_map(&spec, DELTA).unwrap()).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn steeper_known_branch_flattens_the_extension(s in 2.2..6.0f64, bump in 0.01..2.0f64) {
        // affine first branch of slope s, then s + bump, over the matching domain
        let ext_slope = |slope: f64| {
            let w = 1.0 / slope;
            let spec = PartialMapSpec::new(vec![0.0, w, 1.0], 2, vec![Branch::affine_onto(iv(0.0, w))]).unwrap();
            extend_missing_branch(&spec, DELTA).unwrap().deriv(0.5 * (w + 1.0)).unwrap()
        };
        prop_assert!(ext_slope(s + bump) < ext_slope(s));
    }

    #[test]
    fn json_round_trip_is_byte_identical(spec in spec_strategy()) {
        let text = map_to_json(&assemble_circle_map(&spec, DELTA).unwrap()).unwrap();
        prop_assert_eq!(map_to_json(&map_from_json(&text).unwrap()).unwrap(), text);
    }
}

fn density(values: &[f64]) -> DensityGrid {
    DensityGrid::new(values.to_vec()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn transfer_is_linear_and_positive(
        pair in prop::collection::vec((0.0..5.0f64, 0.0..5.0f64), 65),
        s in -3.0..3.0f64,
        t in -3.0..3.0f64,
    ) {
        let m = sine_map(0.1);
        let (h1, h2): (Vec<f64>, Vec<f64>) = pair.into_iter().unzip();
        let p1 = transfer_apply(&m, &density(&h1)).unwrap();
        let p2 = transfer_apply(&m, &density(&h2)).unwrap();
        prop_assert!(p1.values().iter().chain(p2.values()).all(|&v| v >= 0.0));
        // shift keeps the combination a valid (nonnegative) density
        let shift = 3.0 * 5.0 * 2.0;
        let combo: Vec<f64> = h1.iter().zip(&h2).map(|(a, b)| s * a + t * b + shift).collect();
        let pc = transfer_apply(&m, &density(&combo)).unwrap();
        let p_shift = transfer_apply(&m, &DensityGrid::constant(65, shift).unwrap()).unwrap();
        for j in 0..65 {
            let expect = s * p1.values()[j] + t * p2.values()[j] + p_shift.values()[j];
            prop_assert!((pc.values()[j] - expect).abs() <= 1e-10 * (1.0 + expect.abs()));
        }
    }

    #[test]
    fn transfer_preserves_integrals_of_affine_maps(values in prop::collection::vec(0.0..4.0f64, 257), n in 2usize..=4) {
        let m = FullBranchMap::affine_uniform(n).unwrap();
        let h = density(&values);
        let ph = transfer_apply(&m, &h).unwrap();
        // the trapezoid rule is exact for the piecewise-linear h; P adds O(N^-2) per kink
        let n_nodes = values.len() as f64;
        prop_assert!((ph.trapezoid() - h.trapezoid()).abs() <= 8.0 * 4.0 / (n_nodes * n_nodes) * n as f64);
    }
}

#[test]
fn affine_defects_agree() {
    let m = FullBranchMap::new(vec![
        Branch::affine(iv(0.0, 0.5), 2.0, 0.0),
        Branch::affine(iv(0.5, 0.9), 2.5, -1.25),
    ])
    .unwrap();
    let inv = invariance_defect(&m, 1000).unwrap();
    let pull = pullback_measure_defect(&m, &[iv(0.0, 1.0)]).unwrap();
    assert!((inv - pull).abs() < 1e-15);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn modulus_is_nondecreasing_and_concave(
        kind in 0usize..3,
        p in 0.05..1.0f64,
        c in 2.0..6.0f64,
        s in 0.0..1.0f64,
        t in 0.0..1.0f64,
    ) {
        let w = match kind {
            0 => Modulus::holder(p).unwrap(),
            1 => Modulus::log_reciprocal(c).unwrap(),
            _ => Modulus::log_squared(c).unwrap(),
        };
        let top = w.concave_up_to();
        let (a, b) = (top * s.min(t), top * s.max(t));
        prop_assert_eq!(w.eval(0.0), 0.0);
        prop_assert!(w.eval(a) <= w.eval(b));
        let mid = w.eval(0.5 * (a + b));
        prop_assert!(mid + 1e-14 >= 0.5 * (w.eval(a) + w.eval(b)));
    }

    #[test]
    fn holder_tails_are_bounded(alpha in 0.1..1.0f64, j in 1i32..60) {
        let w = Modulus::holder(alpha).unwrap();
        // the exact tail (1 - delta^alpha)/alpha is within round-off of 1/alpha for small delta
        prop_assert!(w.dini_tail(2f64.powi(-j)).unwrap() <= (1.0 + 1e-10) / alpha);
    }
}

#[test]
fn log_reciprocal_tail_follows_its_antiderivative() {
    let w = Modulus::log_reciprocal(2.0).unwrap();
    let mut prev = 0.0;
    for j in 1..=60 {
        let delta = 2f64.powi(-j);
        let tail = w.dini_tail(delta).unwrap();
        let exact = (2.0 - delta.ln()).ln() - 2f64.ln();
        assert!((tail - exact).abs() <= 1e-6, "j = {j}");
        assert!(tail > prev);
        prev = tail;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn more_samples_never_lower_distortion(a in 0.0..0.12f64, k in 1usize..=4, s in 2usize..20, extra in 1usize..20) {
        let m = sine_map(a);
        prop_assert!(distortion_level(&m, k, s + extra).unwrap() >= distortion_level(&m, k, s).unwrap());
    }

    #[test]
    fn cylinders_map_onto_the_unit_interval(a in 0.0..0.12f64, k in 1usize..=5) {
        let m = sine_map(a);
        for c in cylinders(&m, k).unwrap().cylinders {
            let (lo, hi) = c.image_endpoints(&m).unwrap();
            prop_assert!(lo.abs() <= 1e-8 && (hi - 1.0).abs() <= 1e-8);
        }
    }

    #[test]
    fn smooth_maps_obey_the_classical_distortion_bound(a in 0.0..0.12f64, k in 1usize..=6) {
        let m = sine_map(a);
        let sigma = m.sigma().unwrap();
        // sup |f''| from centered differences of f', padded by 5%
        let h = 1e-6;
        let mut second = 0.0f64;
        for b in m.branches() {
            let d = b.domain();
            for j in 1..2000 {
                let x = d.lo() + d.width() * j as f64 / 2000.0;
                second = second.max(((b.deriv(x + h).unwrap() - b.deriv(x - h).unwrap()) / (2.0 * h)).abs());
            }
        }
        let bound = 1.05 * second / sigma * (1..=k).map(|i| sigma.powi(-(i as i32))).sum::<f64>();
        prop_assert!(distortion_level(&m, k, 16).unwrap() <= bound + 1e-12);
    }
}

#[test]
fn first_level_distortion_is_continuous_in_amplitude() {
    let d1 = |a: f64| distortion_level(&sine_map(a), 1, 256).unwrap();
    for a in [0.05, 0.1, 0.15] {
        let base = d1(a);
        // steps go downwards: amplitudes much above 0.15 break expansion
        let steps: Vec<f64> = [1e-2, 1e-3, 1e-4].iter().map(|&h| (d1(a - h) - base).abs()).collect();
        // differences shrink with the step, roughly in proportion
        assert!(steps[1] < 0.2 * steps[0] && steps[2] < 0.2 * steps[1], "a = {a}: {steps:?}");
    }
}

#[test]
fn affine_distortion_is_zero() {
    for n in 2..=4 {
        let m = FullBranchMap::affine_uniform(n).unwrap();
        for k in 1..=6 {
            assert_eq!(distortion_level(&m, k, 8).unwrap(), 0.0);
        }
    }
}

#[test]
fn oscillation_of_a_single_cylinder_is_a_lower_bound_of_its_level() {
    let m = sine_map(0.1);
    let level = distortion_level(&m, 3, 16).unwrap();
    for c in cylinders(&m, 3).unwrap().cylinders {
        assert!(cylinder_oscillation(&m, &c, 16).unwrap() <= level);
    }
}

fn doubling_config(eps: f64) -> PerturbationConfig {
    PerturbationConfig::for_domain(iv(0.0, 0.5), eps, Modulus::log_reciprocal(2.0).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn perturbed_maps_stay_lebesgue_preserving(eps in 0.0..0.08f64, cuts in prop::collection::vec((0.0..1.0f64, 0.0..1.0f64), 10)) {
        let p = perturb_map(&FullBranchMap::doubling(), &doubling_config(eps), DELTA).unwrap();
        let intervals: Vec<Interval> = cuts
            .iter()
            .filter(|(a, b)| a != b)
            .map(|&(a, b)| iv(a.min(b), a.max(b)))
            .collect();
        prop_assert!(invariance_defect(&p.map, 1000).unwrap() <= 1e-8);
        prop_assert!(pullback_measure_defect(&p.map, &intervals).unwrap() <= 1e-10);
        prop_assert!(p.c1_distance <= 0.3 * eps + 1e-10);
    }
}

#[test]
fn perturbation_distance_vanishes_with_epsilon() {
    let m = FullBranchMap::doubling();
    let mut prev = f64::INFINITY;
    for eps in [0.04, 0.02, 0.01, 0.005, 0.0025, 0.0] {
        let p = perturb_map(&m, &doubling_config(eps), DELTA).unwrap();
        assert!(p.c1_distance <= prev);
        assert!((c1_distance(&m, &p.map, DISTANCE_GRID).unwrap() - p.c1_distance).abs() < 1e-15);
        prev = p.c1_distance;
    }
    assert!(prev <= 1e-10);
}

#[test]
fn perturbed_distortion_converges_as_epsilon_shrinks() {
    let m = FullBranchMap::doubling();
    let opts = DistortionOptions { samples: 32, ..Default::default() };
    let gap = |eps: f64| {
        let p = perturb_map(&m, &doubling_config(eps), DELTA).unwrap();
        distortion_level_with(&p.map, 6, &[], &opts).unwrap().value
    };
    let (a, b, c) = (gap(0.01), gap(0.005), gap(0.0025));
    // d_6 of the doubling map is 0
    assert!(a > b && b > c && c > 0.0);
    assert!(c < 0.3 * a);
}

#[test]
fn middle_branch_survives_perturbation() {
    let m = FullBranchMap::affine_uniform(3).unwrap();
    let cfg = PerturbationConfig::for_domain(m.branch(1).domain(), 0.05, Modulus::log_reciprocal(2.0).unwrap());
    let p = perturb_map(&m, &cfg, DELTA).unwrap();
    assert_eq!(p.map.degree(), 3);
    assert_eq!(p.map.branch(2), m.branch(2));
    assert!(invariance_defect(&p.map, 1000).unwrap() <= 1e-8);
}

#[test]
fn zero_perturbation_reproduces_the_map() {
    let m = FullBranchMap::doubling();
    let p = perturb_map(&m, &doubling_config(0.0), DELTA).unwrap();
    for j in 0..=1000 {
        let x = j as f64 / 1000.0;
        assert!((p.map.eval(x).unwrap().0 - m.eval(x).unwrap().0).abs() <= 1e-10);
    }
}
