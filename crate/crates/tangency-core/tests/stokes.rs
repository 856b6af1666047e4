//! Quadrature probes: Green/Stokes exactness, orientation, additivity,
//! escape scans and the locality witness.

use rand::Rng;
use tangency_core::geom::{make_schedule, BoxDomain, CantorScaffold, DeepPoint};
use tangency_core::lusin::{GradientDatum, LusinFunction};
use tangency_core::rng::substream;
use tangency_core::stokes::{
    circulation, curl_flux, escape_scan_exact, escape_scan_sampling, gauss_legendre,
    locality_witness, stokes_residual, EscapeContext, OneForm, RectangleProbe,
};

#[test]
fn gauss_legendre_integrates_polynomials_exactly() {
    let (nodes, weights) = gauss_legendre(8);
    assert_eq!(nodes.len(), 8);
    // Exact for degrees up to 15: check monomial moments against
    // 2/(d+1) for even degree, 0 for odd.
    for d in 0..=15u32 {
        let num: f64 = nodes
            .iter()
            .zip(&weights)
            .map(|(x, w)| w * x.powi(d as i32))
            .sum();
        let exact = if d % 2 == 0 {
            2.0 / (d as f64 + 1.0)
        } else {
            0.0
        };
        assert!((num - exact).abs() < 1e-13, "degree {d}: {num} vs {exact}");
    }
}

fn random_probe(rng: &mut tangency_core::rng::Stream, order: usize) -> RectangleProbe {
    let angle = rng.gen_range(0.0..std::f64::consts::PI);
    RectangleProbe::from_angle(
        [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)],
        angle,
        [rng.gen_range(0.2..1.0), rng.gen_range(0.2..1.0)],
        order,
    )
    .unwrap()
}

#[test]
fn exact_gradients_circulate_to_zero() {
    // g = d(x1^2 x2) = (2 x1 x2, x1^2).
    let g = OneForm::new("exact-gradient", |z| [2.0 * z[0] * z[1], z[0] * z[0]]);
    let constant = OneForm::new("constant", |_| [0.7, -0.3]);
    let mut rng = substream(41, &[0]);
    for _ in 0..20 {
        let probe = random_probe(&mut rng, 8);
        assert!(circulation(&g, &probe).abs() < 1e-12);
        assert!(circulation(&constant, &probe).abs() < 1e-12);
    }
}

#[test]
fn greens_identity_on_the_unit_square() {
    // g = x1 dx2 has curl 1: circulation over the unit square is its area.
    let g = OneForm::new("x1-dx2", |z| [0.0, z[0]]).with_curl(|_| 1.0);
    let unit = RectangleProbe::axis_square([0.5, 0.5], 0.5, 8).unwrap();
    assert!((circulation(&g, &unit) - 1.0).abs() < 1e-13);
    assert!((curl_flux(&g, &unit).unwrap() - 1.0).abs() < 1e-13);

    // The model pair has curl 4: flux is 4 x area everywhere.
    let m = OneForm::heisenberg_pair();
    let mut rng = substream(42, &[0]);
    for _ in 0..10 {
        let probe = random_probe(&mut rng, 6);
        assert!((curl_flux(&m, &probe).unwrap() - 4.0 * probe.area()).abs() < 1e-10);
        assert!(stokes_residual(&m, &probe).unwrap() < 1e-10);
    }
    // Zero curl: flux vanishes.
    let flat = OneForm::new("flat", |_| [1.0, 1.0]).with_curl(|_| 0.0);
    assert_eq!(curl_flux(&flat, &unit).unwrap(), 0.0);
}

#[test]
fn monomial_forms_satisfy_stokes_to_1e10() {
    // All x1^a x2^b dx_j with a + b <= 6, 10 random rectangles (rotated
    // included), order 8.
    let mut rng = substream(43, &[0]);
    let probes: Vec<RectangleProbe> = (0..10).map(|_| random_probe(&mut rng, 8)).collect();
    for a in 0..=6u32 {
        for b in 0..=(6 - a) {
            for component in 0..2usize {
                let form = OneForm::new("monomial", move |z: &[f64; 2]| {
                    let v = z[0].powi(a as i32) * z[1].powi(b as i32);
                    if component == 0 {
                        [v, 0.0]
                    } else {
                        [0.0, v]
                    }
                })
                .with_curl(move |z: &[f64; 2]| {
                    if component == 0 {
                        // -d/dx2 of x1^a x2^b
                        if b == 0 {
                            0.0
                        } else {
                            -(b as f64) * z[0].powi(a as i32) * z[1].powi(b as i32 - 1)
                        }
                    } else if a == 0 {
                        0.0
                    } else {
                        a as f64 * z[0].powi(a as i32 - 1) * z[1].powi(b as i32)
                    }
                });
                for probe in &probes {
                    let res = stokes_residual(&form, probe).unwrap();
                    assert!(res <= 1e-10, "x^{a} y^{b} dx_{component}: residual {res}");
                }
            }
        }
    }
}

#[test]
fn smooth_form_converges_at_order_8() {
    // g = sin(x1) cos(x2) dx1 with analytic curl sin(x1) sin(x2).
    let g = OneForm::new("sin-cos", |z| [z[0].sin() * z[1].cos(), 0.0])
        .with_curl(|z| z[0].sin() * z[1].sin());
    let unit = RectangleProbe::axis_square([0.5, 0.5], 0.5, 8).unwrap();
    assert!(stokes_residual(&g, &unit).unwrap() <= 1e-8);
    // Order-16 oracle: both quadratures agree to much higher accuracy.
    let fine = RectangleProbe::axis_square([0.5, 0.5], 0.5, 16).unwrap();
    let coarse = circulation(&g, &unit);
    let exact = circulation(&g, &fine);
    assert!((coarse - exact).abs() <= 1e-9);
}

#[test]
fn orientation_and_additivity() {
    let g = OneForm::new("bumpy", |z| [(3.0 * z[1]).sin(), (2.0 * z[0]).cos()]);
    let probe = RectangleProbe::from_angle([0.2, -0.1], 0.4, [0.8, 0.5], 10).unwrap();
    let c = circulation(&g, &probe);
    // Reversal flips the sign exactly.
    assert_eq!(circulation(&g, &probe.reversed()), -c);

    // Splitting along the mid-chord perpendicular to the long axis: the two
    // halves' circulations add up to the whole (the interface cancels).
    let v = [0.4f64.cos(), 0.4f64.sin()];
    let half = |shift: f64| {
        RectangleProbe::new(
            [0.2 + shift * 0.4 * v[0], -0.1 + shift * 0.4 * v[1]],
            v,
            [0.4, 0.5],
            10,
        )
        .unwrap()
        .with_segments(2)
    };
    let total = circulation(&g, &probe.clone().with_segments(2));
    assert!(
        (circulation(&g, &half(-1.0)) + circulation(&g, &half(1.0)) - total).abs() < 1e-12,
        "additivity violated"
    );
}

#[test]
fn sampling_escape_scan_reference_sets() {
    // E = everything: zero measures, no exponent.
    let all = |_: &[f64; 2]| true;
    let scan =
        escape_scan_sampling(&all, [0.4, 0.4], [1.0, 0.0], &[0.1, 0.05, 0.025], 2000).unwrap();
    assert!(scan.rows.iter().all(|r| r.measure == 0.0));
    assert!(scan.exponent.is_none());

    // Half-plane: zero until the square pokes past the boundary, then a
    // jump of roughly the protruding side lengths.
    let h = 0.07;
    let half = move |z: &[f64; 2]| z[0] <= 0.5 + h;
    let scan =
        escape_scan_sampling(&half, [0.5, 0.5], [1.0, 0.0], &[0.02, 0.05, 0.2], 4000).unwrap();
    assert_eq!(scan.rows[0].measure, 0.0);
    assert_eq!(scan.rows[1].measure, 0.0);
    assert!(scan.rows[2].measure > 0.3);
    assert!(
        scan.exponent.is_none(),
        "single positive radius fits nothing"
    );
    // Radii must be positive.
    assert!(escape_scan_sampling(&all, [0.0, 0.0], [1.0, 0.0], &[0.0], 10).is_err());
}

fn axis_scaffold() -> CantorScaffold {
    let sched = make_schedule("dimension", 1, 1, 0.1, 0.5).unwrap();
    CantorScaffold::build(BoxDomain::new(vec![0.0], vec![1.0]).unwrap(), sched, 6).unwrap()
}

#[test]
fn exact_escape_matches_interval_enumeration() {
    let sc = axis_scaffold();
    let level = 4;
    // Brute-force the level-4 intervals per axis.
    let mut intervals: Vec<(f64, f64)> = Vec::new();
    sc.for_each_cube(level, |path| {
        let c = sc.center_global(path)[0];
        let h = sc.side(level) / 2.0;
        intervals.push((c - h, c + h));
    })
    .unwrap();
    let olap = |lo: f64, hi: f64| -> f64 {
        intervals
            .iter()
            .map(|(a, b)| (b.min(hi) - a.max(lo)).max(0.0))
            .sum()
    };
    let member = |t: f64| intervals.iter().any(|(a, b)| t >= *a && t <= *b);
    let ax = sc.anchor_global(&[0.33]);
    let ay = sc.anchor_global(&[0.52]);
    let radii = [0.07, 0.031, 0.009];
    let scan = escape_scan_exact(&sc, &sc, level, &ax, &ay, &radii, 9).unwrap();
    for row in &scan.rows {
        // Reconstruct the same best-offset square by brute force.
        let candidates: Vec<f64> = (0..9)
            .map(|i| (i as f64 / 8.0 - 0.5) * (row.r / 2.0))
            .collect();
        let mut best = f64::INFINITY;
        for &oxv in &candidates {
            for &oyv in &candidates {
                let (x0, y0) = (0.33 + oxv, 0.52 + oyv);
                let hits_x = member(x0 - row.r) as u32 + member(x0 + row.r) as u32;
                let hits_y = member(y0 - row.r) as u32 + member(y0 + row.r) as u32;
                let m = 8.0 * row.r
                    - hits_x as f64 * olap(y0 - row.r, y0 + row.r)
                    - hits_y as f64 * olap(x0 - row.r, x0 + row.r);
                best = best.min(m);
            }
        }
        assert!(
            (row.measure - best).abs() <= 1e-12 * best.max(1e-9),
            "r = {}: exact {} vs brute {}",
            row.r,
            row.measure,
            best
        );
    }
}

#[test]
fn witness_reproduces_the_curl_for_smooth_data() {
    // Plain smooth record: no graph, no escape set. The model pair is
    // linear, so the ratio is the curl exactly at every radius.
    let m = OneForm::heisenberg_pair();
    let center = DeepPoint {
        path: tangency_core::geom::CubePath::new_root(vec![0, 0]),
        offset: vec![0.31, 0.55],
    };
    let rows = locality_witness(&m, None, None, &center, &[0.1, 0.01, 0.001], 8).unwrap();
    for row in &rows {
        assert!((row.ratio - 4.0).abs() < 1e-9, "ratio {}", row.ratio);
        assert!((row.flux - 4.0 * 4.0 * row.r * row.r).abs() < 1e-12);
        assert!(row.escape.is_none());
    }

    // A smooth form with curved curl shows the Lebesgue-differentiation
    // error shrinking with the radius.
    let g = OneForm::new("cubic", |z| [0.0, z[0] * z[0] * z[0]]).with_curl(|z| 3.0 * z[0] * z[0]);
    let rows = locality_witness(&g, None, None, &center, &[0.2, 0.02, 0.002], 8).unwrap();
    let curl_here = 3.0 * 0.31 * 0.31;
    let err0 = (rows[0].ratio - curl_here).abs();
    let err2 = (rows[2].ratio - curl_here).abs();
    assert!(err2 < err0 * 0.05, "errors {err0} -> {err2}");
}

#[test]
fn schwarz_contradiction_in_numbers() {
    // If a graph were tangent on a full square, the circulation of
    // h = m - du would vanish while the curl flux of m stays 4 x area:
    // circulation of the zero form against the model flux.
    let zero = OneForm::new("zero", |_| [0.0, 0.0]);
    let m = OneForm::heisenberg_pair();
    let probe = RectangleProbe::axis_square([0.4, 0.6], 0.05, 6).unwrap();
    assert_eq!(circulation(&zero, &probe), 0.0);
    let flux = curl_flux(&m, &probe).unwrap();
    assert!((flux - 4.0 * probe.area()).abs() < 1e-14 && flux > 0.0);
}

#[test]
fn witness_on_the_deep_build() {
    // Full pipeline at depth: the ratio must stay at the curl even when the
    // radii are far below global resolution, because every ingredient is
    // evaluated scale-relatively.
    let sched = make_schedule("sobolev", 2, 10, 1e-5, 0.25).unwrap();
    let sc = CantorScaffold::build(BoxDomain::unit(2), sched, 6).unwrap();
    let datum = GradientDatum::heisenberg(2f64.sqrt());
    let u = LusinFunction::build(&datum, &sc, 6, 1.0).unwrap();
    let m = OneForm::heisenberg_pair();

    let axis_sched = make_schedule("sobolev", 1, 10, 1e-5, 0.25).unwrap();
    let axis = CantorScaffold::build(BoxDomain::new(vec![0.0], vec![1.0]).unwrap(), axis_sched, 8)
        .unwrap();
    let mut rng = substream(44, &[0]);
    let cube = sc.random_cube(6, &mut rng);
    let center = DeepPoint::at_center(cube.clone());
    // Per-axis anchors matching the 2-D center's coordinates.
    let axis_anchor = |axis_idx: usize| -> DeepPoint {
        let mut path = tangency_core::geom::CubePath::new_root(vec![cube.root[axis_idx]]);
        for lev in 1..=cube.level() {
            path.push(&[cube.digit(lev, axis_idx)]);
        }
        DeepPoint::at_center(path)
    };
    let ax = axis_anchor(0);
    let ay = axis_anchor(1);
    let ctx = EscapeContext {
        sx: &axis,
        sy: &axis,
        level: 8,
        ax: &ax,
        ay: &ay,
        offsets: 16,
    };
    let radii: Vec<f64> = (1..=6).map(|l| sc.side(l)).collect();
    let rows = locality_witness(&m, Some(&u), Some(&ctx), &center, &radii, 8).unwrap();
    for row in &rows {
        // The gradient loop vanishes identically, so the ratio reproduces
        // the curl at every scale.
        assert!(
            (row.ratio - 4.0).abs() < 1e-9,
            "r = {}: ratio {}",
            row.r,
            row.ratio
        );
        // The raw gradient-loop quadrature is finite; it under-resolves the
        // ring mass (analytically it is zero, and the missing mass is
        // exactly what the escape measure tracks).
        assert!(row.du_loop_quadrature.is_finite());
        let esc = row.escape.unwrap();
        assert!(esc.is_finite() && esc >= 0.0);
    }
}
