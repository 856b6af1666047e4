//! Estimator behavior: closed-form benchmarks, invariances, consistency.

use tangency_core::geom::{make_schedule, BoxDomain, CantorScaffold};
use tangency_core::linalg::LinMap;
use tangency_core::seminorm::{
    box_dimension_estimate, field_pair_source, fractional_seminorm, graph_seminorm_compare,
    holder_estimate, poincare_ratio, slicing_ratio, superdensity_profile_oracle, FieldSampler,
    FnGraph, SampleDomain,
};

/// Closed form of the half-interval indicator seminorm on (0,1):
/// integrating the kernel over `{x < 1/2 < y}` twice gives
/// `2 (2^s - 1) / (s (1 - s))`.
fn half_jump_closed_form(s: f64) -> f64 {
    2.0 * (2f64.powf(s) - 1.0) / (s * (1.0 - s))
}

fn half_jump_sampler<'a>() -> FieldSampler<'a> {
    FieldSampler::indicator(
        SampleDomain::Box(BoxDomain::new(vec![0.0], vec![1.0]).unwrap()),
        |x: &[f64]| x[0] < 0.5,
    )
    .with_hyperplane_hint(0, 0.5)
}

#[test]
fn half_interval_indicator_matches_closed_form() {
    for (s, budget) in [(0.25, 400_000), (0.5, 400_000), (0.75, 1_500_000)] {
        let f = half_jump_sampler();
        let est = fractional_seminorm(&f, s, 1.0, budget, 42).unwrap();
        let exact = half_jump_closed_form(s);
        assert!(
            (est.value - exact).abs() <= 3.0 * est.stderr,
            "s={s}: {} +- {} vs {}",
            est.value,
            est.stderr,
            exact
        );
        // The error bars themselves are informative, not vacuous.
        assert!(est.stderr < 0.05 * exact, "s={s}: stderr {}", est.stderr);
        assert!(!est.truncated);
    }
    // Spot value: s = 1/2 gives 8 (sqrt(2) - 1).
    assert!((half_jump_closed_form(0.5) - 8.0 * (2f64.sqrt() - 1.0)).abs() < 1e-12);
}

#[test]
fn constant_field_has_zero_seminorm() {
    let f = FieldSampler::function(SampleDomain::Box(BoxDomain::unit(2)), |_: &[f64]| 3.25);
    let est = fractional_seminorm(&f, 0.4, 1.0, 50_000, 9).unwrap();
    assert_eq!(est.value, 0.0);
    assert_eq!(est.stderr, 0.0);
}

#[test]
fn estimator_invariances_on_shared_streams() {
    let domain = || SampleDomain::Box(BoxDomain::new(vec![0.0], vec![1.0]).unwrap());
    let base = FieldSampler::function(domain(), |x: &[f64]| (x[0] * 7.0).sin());
    let neg = FieldSampler::function(domain(), |x: &[f64]| -(x[0] * 7.0).sin());
    let shifted = FieldSampler::function(domain(), |x: &[f64]| (x[0] * 7.0).sin() + 4.0);
    let scaled = FieldSampler::function(domain(), |x: &[f64]| 3.0 * (x[0] * 7.0).sin());
    let (s, p, n, seed) = (0.3, 1.5, 40_000, 7);
    let a = fractional_seminorm(&base, s, p, n, seed).unwrap();
    let b = fractional_seminorm(&neg, s, p, n, seed).unwrap();
    let c = fractional_seminorm(&shifted, s, p, n, seed).unwrap();
    let d = fractional_seminorm(&scaled, s, p, n, seed).unwrap();
    // Negation leaves every pair difference bit-identical.
    assert_eq!(a.value, b.value);
    // Shifting and scaling re-round the field values themselves; the
    // estimator sees the same pairs, so agreement holds to evaluation
    // roundoff.
    assert!((a.value - c.value).abs() <= 1e-9 * a.value);
    assert!((d.value - 3.0 * a.value).abs() <= 1e-9 * d.value);
}

#[test]
fn quadrupling_budget_halves_stderr() {
    let f = half_jump_sampler();
    let small = fractional_seminorm(&f, 0.5, 1.0, 100_000, 3).unwrap();
    let big = fractional_seminorm(&f, 0.5, 1.0, 400_000, 3).unwrap();
    let factor = small.stderr / big.stderr;
    assert!(
        (1.55..=2.45).contains(&factor),
        "stderr factor {factor} ({} -> {})",
        small.stderr,
        big.stderr
    );
}

#[test]
fn seminorm_grows_with_extra_component() {
    // E vs E plus an isolated far cube: the indicator seminorm increases.
    let domain = || SampleDomain::Box(BoxDomain::unit(2));
    let e_small = FieldSampler::indicator(domain(), |x: &[f64]| x[0] < 0.3 && x[1] < 0.3);
    let e_big = FieldSampler::indicator(domain(), |x: &[f64]| {
        (x[0] < 0.3 && x[1] < 0.3) || (x[0] > 0.7 && x[1] > 0.7)
    });
    let (s, n, seed) = (0.35, 300_000, 12);
    let a = fractional_seminorm(&e_small, s, 1.0, n, seed).unwrap();
    let b = fractional_seminorm(&e_big, s, 1.0, n, seed).unwrap();
    assert!(
        b.value - a.value > 3.0 * (a.stderr + b.stderr),
        "{} vs {}",
        a.value,
        b.value
    );
}

#[test]
fn parameter_validation() {
    let f = half_jump_sampler();
    assert!(fractional_seminorm(&f, 0.0, 1.0, 100, 0).is_err());
    assert!(fractional_seminorm(&f, 1.0, 1.0, 100, 0).is_err());
    assert!(fractional_seminorm(&f, 0.5, 0.5, 100, 0).is_err());
    assert!(fractional_seminorm(&f, 0.5, 1.0, 0, 0).is_err());
}

#[test]
fn flat_graph_ratio_is_one() {
    let f = FieldSampler::indicator(
        SampleDomain::Box(BoxDomain::new(vec![0.0], vec![1.0]).unwrap()),
        |x: &[f64]| x[0] < 0.5,
    );
    let flat = FnGraph {
        rows: 1,
        value: |_: &[f64]| vec![0.0],
        grad: |_: &[f64]| LinMap::zeros(1, 1),
    };
    let cmp = graph_seminorm_compare(&flat, &f, 0.5, 1.0, 50_000, 5).unwrap();
    assert_eq!(cmp.ratio, 1.0);
    assert_eq!(cmp.lip, 0.0);
}

#[test]
fn tilted_plane_ratio_matches_closed_form() {
    // u(x) = x over (0,1): graph distances scale by sqrt(2) and both area
    // factors equal sqrt(2), so the power ratio is
    // 2 * sqrt(2)^{-(sp+1)} = 2^{(1 - sp)/2}.
    let f = FieldSampler::indicator(
        SampleDomain::Box(BoxDomain::new(vec![0.0], vec![1.0]).unwrap()),
        |x: &[f64]| x[0] < 0.5,
    );
    let tilted = FnGraph {
        rows: 1,
        value: |x: &[f64]| vec![x[0]],
        grad: |_: &[f64]| LinMap::from_rows(&[&[1.0]]),
    };
    let (s, p) = (0.5, 1.0);
    let cmp = graph_seminorm_compare(&tilted, &f, s, p, 50_000, 5).unwrap();
    let expect = 2f64.powf((1.0 - s * p) / 2.0);
    // Constant per-pair factor: the ratio is exact up to roundoff.
    assert!(
        (cmp.ratio - expect).abs() < 1e-9,
        "{} vs {expect}",
        cmp.ratio
    );
    assert!((cmp.lip - 1.0).abs() < 1e-12);
    // Window from the equivalence inequalities.
    assert!(cmp.window.0 <= cmp.ratio && cmp.ratio <= cmp.window.1);
    let lo_expect = 2f64.powf(-(s * p + 1.0) / 2.0);
    assert!((cmp.window.0 - lo_expect).abs() < 1e-12);
    assert!((cmp.window.1 - 4.0).abs() < 1e-12);
}

#[test]
fn holder_scan_on_model_functions() {
    // Linear function at alpha = 1: per-scale sups equal the slope, fit 0.
    let lin = FieldSampler::function(
        SampleDomain::Box(BoxDomain::new(vec![-1.0], vec![1.0]).unwrap()),
        |x: &[f64]| 3.0 * x[0],
    );
    let scales: Vec<f64> = (0..6).map(|i| 0.2 * 0.5f64.powi(i)).collect();
    let scan = holder_estimate(field_pair_source(&lin), 1.0, &scales, 3000, 17).unwrap();
    for row in &scan.rows {
        assert!((row.sup - 3.0).abs() < 1e-9, "sup {}", row.sup);
    }
    assert!(scan.slope.unwrap().abs() < 1e-9);

    // |x|^beta at alpha = beta: bounded ratios, near-zero slope.
    let beta = 0.6;
    let rough = FieldSampler::function(
        SampleDomain::Box(BoxDomain::new(vec![-1.0], vec![1.0]).unwrap()),
        move |x: &[f64]| x[0].abs().powf(beta),
    );
    let scan = holder_estimate(field_pair_source(&rough), beta, &scales, 6000, 19).unwrap();
    let slope = scan.slope.unwrap();
    assert!(slope.abs() < 0.1, "slope {slope}");
    // Validation.
    assert!(holder_estimate(field_pair_source(&lin), 1.0, &[], 10, 0).is_err());
    assert!(holder_estimate(field_pair_source(&lin), 1.5, &scales, 10, 0).is_err());
}

#[test]
fn box_dimension_from_exact_counts() {
    for (k, b, d) in [(2usize, 1u32, 1.0f64), (2, 2, 1.5), (1, 1, 0.5)] {
        let sched = make_schedule("dimension", k, b, 0.1, d).unwrap();
        let sc = CantorScaffold::build(BoxDomain::unit(k), sched, 8).unwrap();
        let levels: Vec<usize> = (2..=8).collect();
        let slope = box_dimension_estimate(&sc, &levels).unwrap();
        assert!((slope - d).abs() <= 0.05, "({k},{b},{d}): {slope}");
        let theory = sc.schedule().theoretical_dimension().unwrap();
        assert!((theory - d).abs() < 1e-12);
    }
    // Gapless: slope equals the ambient dimension.
    let sched = make_schedule("gapless", 2, 1, 0.25, 0.0).unwrap();
    let sc = CantorScaffold::build(BoxDomain::unit(2), sched, 6).unwrap();
    let slope = box_dimension_estimate(&sc, &[2, 3, 4, 5, 6]).unwrap();
    assert!((slope - 2.0).abs() < 1e-9);
    // Fewer than 3 levels errors.
    assert!(box_dimension_estimate(&sc, &[2, 3]).is_err());
}

#[test]
fn superdensity_on_reference_sets() {
    // E = everything: all ratios zero.
    let full = |_: &[f64]| true;
    let rows =
        superdensity_profile_oracle(&full, &[0.5, 0.5], &[0.1, 0.05], 0.2, 0.4, 20_000, 3).unwrap();
    for row in &rows {
        assert_eq!(row.ratio, 0.0);
    }

    // Half-plane at distance h from the probe point: zero inside, then the
    // exact circular-segment area once r > h.
    let h = 0.1;
    let half = move |x: &[f64]| x[0] <= 0.5 + h;
    let x0 = [0.5, 0.5];
    let rows = superdensity_profile_oracle(&half, &x0, &[0.05, 0.3], 0.2, 0.4, 200_000, 4).unwrap();
    assert_eq!(rows[0].complement_fraction, 0.0);
    let r = 0.3f64;
    let seg_fraction =
        ((h / r).acos() - (h / r) * (1.0 - (h / r).powi(2)).sqrt()) / std::f64::consts::PI;
    let se = (seg_fraction * (1.0 - seg_fraction) / 200_000f64).sqrt();
    assert!(
        (rows[1].complement_fraction - seg_fraction).abs() <= 3.0 * se,
        "{} vs {seg_fraction}",
        rows[1].complement_fraction
    );
    // Parameter validation: b < s.
    assert!(superdensity_profile_oracle(&half, &x0, &[0.1], 0.5, 0.4, 100, 0).is_err());
    assert!(superdensity_profile_oracle(&half, &x0, &[-0.1], 0.1, 0.4, 100, 0).is_err());
}

fn bump(cx: f64, cy: f64, r: f64) -> impl Fn(&[f64]) -> f64 {
    move |x: &[f64]| {
        let d2 = ((x[0] - cx).powi(2) + (x[1] - cy).powi(2)) / (r * r);
        if d2 < 1.0 {
            (1.0 - d2).powi(2)
        } else {
            0.0
        }
    }
}

#[test]
fn slicing_constant_is_universal() {
    let domain = || SampleDomain::Box(BoxDomain::unit(2));
    let f1 = FieldSampler::function(domain(), bump(0.4, 0.5, 0.3));
    let f2 = FieldSampler::function(domain(), bump(0.6, 0.4, 0.22));
    // A rotated copy of f1 about the domain center.
    let f3 = FieldSampler::function(domain(), |x: &[f64]| {
        let (cx, cy) = (0.5, 0.5);
        let (dx, dy) = (x[0] - cx, x[1] - cy);
        let rot = [cx + dy, cy - dx];
        bump(0.4, 0.5, 0.3)(&rot)
    });
    let rows = slicing_ratio(&[&f1, &f2, &f3], 0.4, 2.0, 24, 400_000, 11).unwrap();
    let r1 = rows[0].ratio.unwrap();
    let r2 = rows[1].ratio.unwrap();
    let r3 = rows[2].ratio.unwrap();
    let tol12 = 3.0 * (rows[0].ratio_stderr + rows[1].ratio_stderr);
    let tol13 = 3.0 * (rows[0].ratio_stderr + rows[2].ratio_stderr);
    assert!((r1 - r2).abs() <= tol12, "{r1} vs {r2} (tol {tol12})");
    assert!((r1 - r3).abs() <= tol13, "{r1} vs {r3} (tol {tol13})");
    // The polar-decomposition constant for lines in the plane is pi; keep a
    // generous 3-sigma-style band as a second, independent route.
    for r in [r1, r2, r3] {
        assert!((2.6..=3.7).contains(&r), "slicing constant {r}");
    }

    // Constant test function: both sides vanish, ratio absent.
    let fc = FieldSampler::function(domain(), |_: &[f64]| 2.0);
    let rows = slicing_ratio(&[&fc], 0.4, 2.0, 8, 20_000, 11).unwrap();
    assert!(rows[0].ratio.is_none());

    // Wrong dimension errors.
    let f1d = FieldSampler::function(
        SampleDomain::Box(BoxDomain::new(vec![0.0], vec![1.0]).unwrap()),
        |x: &[f64]| x[0],
    );
    assert!(slicing_ratio(&[&f1d], 0.4, 2.0, 8, 1000, 0).is_err());
}

#[test]
fn poincare_ratio_behaviour() {
    let ball = || SampleDomain::Ball {
        center: vec![0.0],
        radius: 1.0,
    };
    let f = FieldSampler::function(ball(), |x: &[f64]| 1.0 - x[0] * x[0]);
    let (alpha, q) = (0.8, 3.0);
    let a = poincare_ratio(&f, alpha, q, 200_000, 21).unwrap().unwrap();
    assert!(a.ratio.is_finite() && a.ratio > 0.0);
    // Stability under doubling the budget.
    let b = poincare_ratio(&f, alpha, q, 400_000, 21).unwrap().unwrap();
    assert!(
        (a.ratio - b.ratio).abs() <= 0.1 * a.ratio,
        "{} vs {}",
        a.ratio,
        b.ratio
    );
    // Homogeneity: scaling f leaves the ratio unchanged on shared streams.
    let f2 = FieldSampler::function(ball(), |x: &[f64]| 2.0 * (1.0 - x[0] * x[0]));
    let c = poincare_ratio(&f2, alpha, q, 200_000, 21).unwrap().unwrap();
    assert!((c.ratio - a.ratio).abs() <= 1e-12 * a.ratio);
    // f = 0 gives the guarded absent value.
    let z = FieldSampler::function(ball(), |_: &[f64]| 0.0);
    assert!(poincare_ratio(&z, alpha, q, 50_000, 2).unwrap().is_none());
    // alpha q <= n rejected.
    assert!(poincare_ratio(&f, 0.2, 3.0, 1000, 0).is_err());
    // Not vanishing on the sphere rejected.
    let bad = FieldSampler::function(ball(), |x: &[f64]| x[0] + 2.0);
    assert!(poincare_ratio(&bad, alpha, q, 1000, 0).is_err());
}

#[test]
fn superdensity_trend_on_the_deep_set() {
    // Around a deep point of the sobolev-schedule set, the normalized
    // complement ratio decreases with the radius; the fitted slope over the
    // radii with observable complement clears half of b * k/(k-s).
    use tangency_core::geom::DeepPoint;
    use tangency_core::rng::substream;
    use tangency_core::seminorm::superdensity_profile;
    let sched = make_schedule("sobolev", 2, 10, 0.01, 0.25).unwrap();
    let sc = CantorScaffold::build(BoxDomain::unit(2), sched, 6).unwrap();
    let (b, s) = (0.2, 0.25);
    let radii: Vec<f64> = (1..=6).map(|l| sc.side(l)).collect();
    let mut rng = substream(31, &[77]);
    let center = DeepPoint::at_center(sc.random_cube(6, &mut rng));
    let rows = superdensity_profile(&sc, 6, &center, &radii, b, s, 100_000, 31).unwrap();
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.ratio > 0.0)
        .map(|r| (r.r.ln(), r.ratio.ln()))
        .collect();
    assert!(pts.len() >= 2, "no observable complement at any radius");
    let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
    let (slope, _) = tangency_core::fit::linear_fit(&xs, &ys).unwrap();
    let one_star = 2.0 / (2.0 - s);
    assert!(
        slope >= 0.5 * b * one_star,
        "superdensity slope {slope} vs {:.4}",
        0.5 * b * one_star
    );
}

#[test]
fn graph_compare_window_holds_for_a_built_graph() {
    use tangency_core::lusin::{GradientDatum, LusinFunction};
    let sched = make_schedule("dimension", 2, 1, 1e-3, 1.0).unwrap();
    let dom = BoxDomain::new(vec![0.0, 0.0], vec![2e-3, 2e-3]).unwrap();
    let sc = CantorScaffold::build(dom, sched, 4).unwrap();
    let datum = GradientDatum::heisenberg(3e-3);
    let u = LusinFunction::build(&datum, &sc, 4, 1.0).unwrap();
    let f = FieldSampler::indicator(SampleDomain::Box(sc.domain().clone()), |x: &[f64]| {
        x[0] < 1e-3
    });
    let cmp = graph_seminorm_compare(&u, &f, 0.4, 1.0, 60_000, 23).unwrap();
    assert!(cmp.lip.is_finite());
    assert!(
        cmp.window.0 <= cmp.ratio && cmp.ratio <= cmp.window.1,
        "ratio {} outside window {:?}",
        cmp.ratio,
        cmp.window
    );
    // The graph is nearly flat at this mesh, so the ratio hugs 1.
    assert!((cmp.ratio - 1.0).abs() < 0.05, "ratio {}", cmp.ratio);
}
