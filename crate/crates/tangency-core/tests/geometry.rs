//! Schedule and scaffold behavior: closed forms, lattices, measures,
//! membership, dimension, and the indicator regularity bounds.

use rand::Rng;
use tangency_core::geom::{make_schedule, BoxDomain, CantorScaffold};
use tangency_core::rng::substream;
use tangency_core::CoreError;

const PI2: f64 = std::f64::consts::PI * std::f64::consts::PI;

fn dim_scaffold_2d(depth: usize) -> CantorScaffold {
    let sched = make_schedule("dimension", 2, 1, 0.1, 1.0).unwrap();
    CantorScaffold::build(BoxDomain::unit(2), sched, depth).unwrap()
}

#[test]
fn dimension_schedule_closed_form() {
    let sched = make_schedule("dimension", 2, 1, 0.1, 1.0).unwrap();
    assert_eq!(sched.lambda(), Some(0.5));
    // rho_i = delta (1 - lambda) lambda^i 2^{-Bi} = 0.05 * 4^{-i}
    for i in 0..8 {
        let expect = 0.05 * 0.25f64.powi(i as i32);
        assert!((sched.rho(i) - expect).abs() <= 1e-15 * expect.max(1e-300));
    }
    assert!((sched.rho(1) - 0.0125).abs() < 1e-16);
    // Cross-check the recursion r_i = 2^{-B} r_{i-1} - rho_i.
    let r = sched.side_lengths(8).unwrap();
    for i in 1..=8 {
        let rec = 0.5 * r[i - 1] - sched.rho(i);
        assert!((r[i] - rec).abs() <= 1e-12 * 0.1);
    }
    // Closed form r_i = delta lambda^{i+1} 2^{-Bi}.
    for (i, ri) in r.iter().enumerate() {
        let expect = 0.1 * 0.5f64.powi(i as i32 + 1) * 0.5f64.powi(i as i32);
        assert!((ri - expect).abs() <= 1e-15);
    }
    assert!((r[0] - 0.05).abs() < 1e-16);
    assert!((r[1] - 0.0125).abs() < 1e-16);
    assert!((r[2] - 0.003125).abs() < 1e-16);
}

#[test]
fn sobolev_schedule_series_and_closed_form() {
    let sched = make_schedule("sobolev", 2, 10, 0.01, 0.25).unwrap();
    // sum_{j<=N} 2^{10 j} rho_j^{3/4} climbs to delta/2 like a Basel tail.
    let s_small = sched.sum_2bj_rho_pow(0.25, 100).value;
    let s_big = sched.sum_2bj_rho_pow(0.25, 20_000).value;
    assert!(s_small < s_big && s_big < 0.005);
    let basel_tail = (3.0 * 0.01 / PI2) / 20_000.0;
    assert!((0.005 - s_big) < basel_tail * 1.05);

    // At s = 0 the gap widths are (3 delta / pi^2) j^{-2} 2^{-10 j}; the
    // extremal regime is the same schedule.
    let s0 = make_schedule("sobolev", 2, 10, 0.01, 0.0).unwrap();
    let ex = make_schedule("extremal", 2, 10, 0.01, 0.0).unwrap();
    for j in 1..12 {
        let expect = (3.0 * 0.01 / PI2) * (j as f64).powi(-2) * 2f64.powi(-10 * j);
        assert!((s0.rho(j as usize) - expect).abs() <= 1e-15 * expect);
        assert!((ex.rho(j as usize) - expect).abs() <= 1e-15 * expect);
    }

    // Monotone positive gaps, and the partial sums stay below delta.
    let mut prev = f64::INFINITY;
    let mut acc = 0.0;
    for j in 1..40 {
        let rho = sched.rho(j);
        assert!(rho > 0.0 && rho <= prev);
        prev = rho;
        acc += 2f64.powi(10 * j as i32) * rho;
        assert!(acc < 0.01);
    }
}

#[test]
fn schedule_parameter_validation() {
    assert!(make_schedule("sobolev", 2, 10, 0.01, 0.5).is_err()); // s >= 1/2
    assert!(make_schedule("sobolev", 2, 9, 0.01, 0.25).is_err()); // B < 10
    assert!(make_schedule("dimension", 2, 1, 0.1, 2.0).is_err()); // d >= k
    assert!(make_schedule("dimension", 2, 1, 0.1, 0.0).is_err()); // d <= 0
    assert!(make_schedule("nope", 2, 1, 0.1, 0.5).is_err());
    assert!(make_schedule("dimension", 2, 1, -0.1, 0.5).is_err());
}

#[test]
fn gapless_sides_are_pure_powers() {
    let sched = make_schedule("gapless", 1, 2, 1.0, 0.0).unwrap();
    let r = sched.side_lengths(10).unwrap();
    for (i, ri) in r.iter().enumerate() {
        assert!((ri - 0.25f64.powi(i as i32)).abs() <= 1e-15 * ri);
    }
}

#[test]
fn recursion_agrees_with_closed_form_in_all_regimes() {
    for sched in [
        make_schedule("sobolev", 2, 10, 0.01, 0.25).unwrap(),
        make_schedule("sobolev", 1, 12, 0.5, 0.4).unwrap(),
        make_schedule("dimension", 2, 2, 0.1, 1.5).unwrap(),
        make_schedule("extremal", 3, 10, 0.05, 0.0).unwrap(),
        make_schedule("gapless", 2, 3, 0.2, 0.0).unwrap(),
    ] {
        let n = 10;
        let r = sched.side_lengths(n).unwrap();
        let scale = 2f64.powi(-(sched.b() as i32));
        let mut prev = sched.delta() - sched.rho(0);
        assert!((r[0] - prev).abs() <= 1e-12 * sched.delta());
        for (i, item) in r.iter().enumerate().take(n + 1).skip(1) {
            let rec = scale * prev - sched.rho(i);
            assert!(
                (item - rec).abs() <= 1e-12 * sched.delta(),
                "regime {} level {i}",
                sched.regime().name()
            );
            prev = *item;
        }
    }
}

#[test]
fn schedule_exhausts_only_at_f64_underflow() {
    // The built-in schedules always leave positive side length; the error
    // surfaces once (delta - sum)/2^{Bi} underflows to zero.
    let sched = make_schedule("sobolev", 2, 10, 0.01, 0.25).unwrap();
    let err = sched.side_lengths(200).unwrap_err();
    match err {
        CoreError::ScheduleExhausted { depth } => assert!(depth > 90),
        other => panic!("unexpected error {other:?}"),
    }
}

#[test]
fn lattice_counts_and_empty_lattice() {
    // 0.3-cubes tile (0,1)^2 three per axis.
    let sched = make_schedule("gapless", 2, 1, 0.3, 0.0).unwrap();
    let sc = CantorScaffold::build(BoxDomain::unit(2), sched, 2).unwrap();
    assert_eq!(sc.card_roots(), 9);

    let sched = make_schedule("gapless", 2, 1, 2.0, 0.0).unwrap();
    match CantorScaffold::build(BoxDomain::unit(2), sched, 1) {
        Err(CoreError::EmptyLattice) => {}
        other => panic!("expected empty lattice, got {other:?}"),
    }

    // Level-2 count = Card(L1) * 2^{2Bk}.
    let sc = dim_scaffold_2d(4);
    let expect = (sc.card_roots() as f64).ln() + (2.0 * 2.0 * 1.0) * std::f64::consts::LN_2;
    assert!((sc.log_cube_count(2) - expect).abs() < 1e-12);
    let mut count = 0u64;
    sc.for_each_cube(2, |_| count += 1).unwrap();
    assert_eq!(count as f64, (sc.log_cube_count(2)).exp().round());
}

#[test]
fn membership_examples() {
    let sc = dim_scaffold_2d(6);
    // A root-cube center belongs to level 0 ...
    let mut rng = substream(11, &[0]);
    let root = sc.random_cube(0, &mut rng);
    let c0 = sc.center_global(&root);
    assert!(sc.membership(&c0, 0).unwrap());
    // ... but not to level 1: with B = 1 the parent center falls in the
    // central gap between the two children per axis.
    assert!(!sc.membership(&c0, 1).unwrap());
    // A deep cube center belongs to its own level.
    let q = sc.random_cube(6, &mut rng);
    let cq = sc.center_global(&q);
    assert!(sc.membership(&cq, 6).unwrap());
    // Points outside the domain are outside every level.
    assert!(!sc.membership(&[1.7, 0.4], 0).unwrap());
}

#[test]
fn membership_is_nested() {
    let sc = dim_scaffold_2d(6);
    let mut rng = substream(12, &[0]);
    let mut hits = 0;
    for _ in 0..10_000 {
        let x = [rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)];
        let mut prev = true;
        for level in 0..=6 {
            let m = sc.membership(&x, level).unwrap();
            assert!(!(m && !prev), "membership not nested at level {level}");
            if m {
                hits += 1;
            }
            prev = m;
        }
    }
    assert!(hits > 0);
}

#[test]
fn measure_closed_forms() {
    // Gapless: no mass is ever removed.
    let sched = make_schedule("gapless", 2, 2, 0.25, 0.0).unwrap();
    let sc = CantorScaffold::build(BoxDomain::unit(2), sched, 5).unwrap();
    for level in 0..=5 {
        let expect = sc.card_roots() as f64 * 0.25f64.powi(2);
        assert!((sc.measure(level) - expect).abs() <= 1e-14);
    }

    // Dimension regime: measure(level) = Card * delta^2 * lambda^{2(level+1)}
    // decreases geometrically to zero.
    let sc = dim_scaffold_2d(8);
    let card = sc.card_roots() as f64;
    for level in 0..=8 {
        let expect = card * (0.1 * 0.5f64.powi(level as i32 + 1)).powi(2);
        assert!((sc.measure(level) - expect).abs() <= 1e-12 * expect);
    }
    let lim = sc.measure_limit();
    assert!(lim.converged && lim.value.abs() < 1e-12);

    // Level-difference identity, exactly as the two-route formula.
    for level in 0..8 {
        let lhs = sc.measure(level) - sc.measure(level + 1);
        let bk = 2f64.powi((sc.b() * 2) as i32 * level as i32);
        let rhs = card * bk * (sc.side(level).powi(2) - 2f64.powi(2) * sc.side(level + 1).powi(2));
        assert!((lhs - rhs).abs() <= 1e-12 * lhs.max(1e-300));
    }
}

#[test]
fn measure_matches_monte_carlo() {
    let sc = dim_scaffold_2d(4);
    let mut rng = substream(21, &[4]);
    let n = 200_000;
    let mut hits = 0u64;
    for _ in 0..n {
        let x = [rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)];
        if sc.membership(&x, 4).unwrap() {
            hits += 1;
        }
    }
    let p_hat = hits as f64 / n as f64;
    let exact = sc.measure(4) / sc.domain().volume();
    let se = (exact * (1.0 - exact) / n as f64).sqrt();
    assert!(
        (p_hat - exact).abs() <= 3.0 * se,
        "MC {p_hat} vs exact {exact} (se {se})"
    );
}

#[test]
fn sibling_gaps_are_exact() {
    let sc = dim_scaffold_2d(6);
    for level in 1..=6 {
        let gap = sc.pitch(level) - sc.side(level);
        assert!((gap - sc.rho(level)).abs() <= 1e-15 * 0.1);
        // Distance between adjacent sibling cubes along an axis.
        let d = sc.child_offset(level, 1) - sc.child_offset(level, 0) - sc.side(level);
        assert!((d - sc.rho(level)).abs() <= 1e-15 * 0.1);
    }
}

#[test]
fn dimension_regime_is_self_similar() {
    // Rescaling the level-(i+1) offsets by 2^B / lambda reproduces the
    // level-i offsets: the Hutchinson iterated-function-system property.
    let sc = dim_scaffold_2d(8);
    let lam = sc.schedule().lambda().unwrap();
    let factor = 2f64.powi(sc.b() as i32) / lam;
    for level in 1..8 {
        for g in 0..2u32 {
            let fine = sc.child_offset(level + 1, g) * factor;
            let coarse = sc.child_offset(level, g);
            assert!((fine - coarse).abs() <= 1e-12 * 0.1);
        }
    }
}

#[test]
fn theoretical_dimension_identity() {
    let sc = |k: usize, b: u32, d: f64| {
        make_schedule("dimension", k, b, 0.1, d)
            .unwrap()
            .theoretical_dimension()
            .unwrap()
    };
    // (k=2, B=1, lambda=1/2) -> Bk/(B - log2 lambda) = 2/(1+1) = 1.
    assert!((sc(2, 1, 1.0) - 1.0).abs() < 1e-14);
    // Algebraic identity: the formula returns d itself.
    assert!((sc(2, 2, 1.5) - 1.5).abs() < 1e-14);
    assert!((sc(1, 1, 0.5) - 0.5).abs() < 1e-14);
    // Gap-free limit: d -> k recovers full dimension.
    assert!((sc(1, 1, 1.0 - 1e-9) - 1.0).abs() < 1e-8);
    // Wrong regime errors.
    assert!(make_schedule("sobolev", 2, 10, 0.01, 0.25)
        .unwrap()
        .theoretical_dimension()
        .is_err());
}

#[test]
fn indicator_bound_series() {
    let sched = make_schedule("sobolev", 2, 10, 0.01, 0.25).unwrap();
    let sc = CantorScaffold::build(BoxDomain::unit(2), sched, 6).unwrap();
    // Series part tends to delta/2 from below (Basel partial sums).
    let b1 = sc.indicator_seminorm_bound(0.25, 1_000).unwrap();
    let b2 = sc.indicator_seminorm_bound(0.25, 100_000).unwrap();
    let vol = sc.domain().volume();
    assert!(b1.value - vol < b2.value - vol && b2.value - vol < 0.005);
    assert!(0.005 - (b2.value - vol) < 1e-6);
    assert!(!b1.divergent);

    // Gapless: bound reduces to the domain volume.
    let g = make_schedule("gapless", 2, 2, 0.2, 0.0).unwrap();
    let gsc = CantorScaffold::build(BoxDomain::unit(2), g, 3).unwrap();
    let gb = gsc.indicator_seminorm_bound(0.5, 100).unwrap();
    assert!((gb.value - 1.0).abs() < 1e-14);

    // Dimension regime: the series diverges once s >= 1 - d/k.
    let d = make_schedule("dimension", 2, 2, 0.1, 1.0).unwrap();
    let dsc = CantorScaffold::build(BoxDomain::unit(2), d, 4).unwrap();
    assert!(
        dsc.indicator_seminorm_bound(0.6, usize::MAX)
            .unwrap()
            .divergent
    );
    assert!(
        !dsc.indicator_seminorm_bound(0.4, usize::MAX)
            .unwrap()
            .divergent
    );

    // Range validation.
    assert!(sc.indicator_seminorm_bound(0.0, 10).is_err());
    assert!(sc.indicator_seminorm_bound(1.0, 10).is_err());
}

#[test]
fn explicit_indicator_bound_is_finite_and_ordered() {
    let sched = make_schedule("sobolev", 2, 10, 0.01, 0.25).unwrap();
    let sc = CantorScaffold::build(BoxDomain::unit(2), sched, 6).unwrap();
    let b4 = sc.explicit_indicator_bound(0.25, 4).unwrap();
    let b6 = sc.explicit_indicator_bound(0.25, 6).unwrap();
    assert!(b4.is_finite() && b4 > 0.0);
    // Deeper levels only add gap mass.
    assert!(b6 >= b4 * 0.99);

    // Gapless tiling leaves only domain-edge strips, which vanish here.
    let g = make_schedule("gapless", 2, 1, 0.25, 0.0).unwrap();
    let gsc = CantorScaffold::build(BoxDomain::unit(2), g, 3).unwrap();
    let gb = gsc.explicit_indicator_bound(0.5, 3).unwrap();
    assert!(gb.abs() < 1e-12, "gapless bound {gb}");
}

#[test]
fn w1q_ratio_test_matches_theory() {
    // Sobolev regime: the limiting term ratio is
    // 2^{B[(1-2q) + (q-1)/(1-s)]}, which is < 1 exactly when s < q/(2q-1).
    // Valid schedules have s < 1/2 < q/(2q-1), so they always converge.
    for (s, q) in [(0.25, 2.0), (0.45, 40.0), (0.1, 1.0), (0.49, 8.0)] {
        let sched = make_schedule("sobolev", 2, 10, 0.01, s).unwrap();
        let ratio = sched.w1q_term_ratio(q).unwrap();
        // Geometric part plus the polynomial correction of the ratio-test
        // probe at its internal depth (terms carry j^{-2/(1-s)} factors).
        let geometric = 10.0 * f64::ln(2.0) * ((1.0 - 2.0 * q) + (q - 1.0) / (1.0 - s));
        let poly = (q - 1.0) * (2.0 / (1.0 - s)) * f64::ln(17.0 / 16.0);
        let expect = f64::exp(geometric + poly);
        assert!(ratio < 1.0, "s={s} q={q}: ratio {ratio}");
        assert!(
            (ratio / expect).ln().abs() < 0.05,
            "s={s} q={q}: ratio {ratio} vs {expect}"
        );
    }
    // Dimension regime: ratio 2^{-Bq} lambda^{q+k} < 1 always.
    let dim = make_schedule("dimension", 2, 2, 0.1, 1.5).unwrap();
    let ratio = dim.w1q_term_ratio(3.0).unwrap();
    let lam = dim.lambda().unwrap();
    let expect = 2f64.powf(-2.0 * 3.0) * lam.powf(3.0 + 2.0);
    assert!(ratio < 1.0 && (ratio / expect).ln().abs() < 1e-6);
}

#[test]
fn gradient_increment_series_is_summable_in_the_sobolev_regime() {
    // sum_j rho_{j+1}^{-1} r_j^2 converges for the sobolev schedule (the
    // gradient increments are summable, so the layered sums converge in C^1).
    let sched = make_schedule("sobolev", 2, 10, 0.01, 0.25).unwrap();
    let s20 = sched.c1_series(20).unwrap();
    let s40 = sched.c1_series(40).unwrap();
    assert!(s20.is_finite() && s40.is_finite() && s40 >= s20);
    assert!(
        (s40 - s20) <= 1e-9 * s40,
        "tail not negligible: {s20} vs {s40}"
    );
}
