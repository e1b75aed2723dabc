use optomech::beam::{self, BeamSpec, ModeShape};
use optomech::units::HBAR;
use proptest::prelude::*;
use std::f64::consts::PI;

// plain bisection on cos ν − 1/cosh ν, no derivatives
fn bisect_root(mut lo: f64, mut hi: f64) -> f64 {
    let f = |v: f64| v.cos() - 1.0 / v.cosh();
    let mut flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

// textbook form, unnormalized; only well conditioned for small ν
fn textbook_shape(nu: f64, s: f64) -> f64 {
    let sigma = (nu.cosh() - nu.cos()) / (nu.sinh() - nu.sin());
    (nu * s).cosh() - (nu * s).cos() - sigma * ((nu * s).sinh() - (nu * s).sin())
}

fn simpson<F: Fn(f64) -> f64>(f: F, n: usize) -> f64 {
    let h = 1.0 / n as f64;
    let mut acc = f(0.0) + f(1.0);
    for i in 1..n {
        acc += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * h / 3.0
}

fn cnt() -> BeamSpec {
    beam::material("cnt_10_0").unwrap().beam(1e-6).unwrap()
}

#[test]
fn roots_match_bisection() {
    let roots = beam::mode_roots(12).unwrap();
    for (i, &r) in roots.iter().enumerate() {
        let n = (i + 1) as f64;
        let oracle = bisect_root(n * PI + 1e-9, (n + 1.0) * PI - 1e-9);
        assert!((r - oracle).abs() < 1e-10, "root {}: {r} vs {oracle}", i + 1);
    }
    assert!((roots[0] - 4.730040744862704).abs() < 1e-12);
    assert!((roots[1] - 7.8532).abs() < 1e-4);
    assert!((roots[2] - 10.9956).abs() < 1e-4);
}

#[test]
fn roots_approach_odd_half_multiples() {
    let roots = beam::mode_roots(beam::MAX_ROOTS).unwrap();
    let gaps: Vec<f64> = roots
        .iter()
        .enumerate()
        .map(|(i, r)| (r - (2.0 * (i + 1) as f64 + 1.0) * PI / 2.0).abs())
        .collect();
    for w in gaps.windows(2).filter(|w| w[0] > 1e-12) {
        assert!(w[1] < w[0]);
    }
    assert!(gaps[beam::MAX_ROOTS - 1] < 1e-12);
    for r in &roots {
        assert!(beam::root_residual(*r).abs() < 1e-10);
    }
}

#[test]
fn root_count_limits() {
    assert!(beam::mode_roots(0).is_err());
    assert!(beam::mode_roots(beam::MAX_ROOTS + 1).is_err());
    assert!(ModeShape::new(0).is_err());
}

#[test]
fn clamped_boundary_conditions() {
    for n in 1..=beam::MAX_ROOTS {
        let m = ModeShape::new(n).unwrap();
        for s in [0.0, 1.0] {
            assert!(m.value(s).abs() < 1e-8, "mode {n} value at {s}: {}", m.value(s));
            assert!(m.slope(s).abs() < 1e-8, "mode {n} slope at {s}: {}", m.slope(s));
        }
    }
}

#[test]
fn shapes_are_unit_peak_and_have_midpoint_parity() {
    for n in 1..=8 {
        let m = ModeShape::new(n).unwrap();
        let peak = (0..=20_000).map(|i| m.value(i as f64 / 20_000.0).abs()).fold(0.0, f64::max);
        assert!((peak - 1.0).abs() < 1e-6, "mode {n} peak {peak}");
        for i in 0..50 {
            let s = i as f64 / 100.0;
            let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
            assert!((m.value(s) - sign * m.value(1.0 - s)).abs() < 1e-9);
        }
    }
    assert!((ModeShape::new(1).unwrap().value(0.5) - 1.0).abs() < 1e-6);
    assert!(ModeShape::new(2).unwrap().value(0.5).abs() < 1e-12);
}

#[test]
fn shapes_match_textbook_form() {
    for n in 1..=5 {
        let m = ModeShape::new(n).unwrap();
        let peak = (0..=20_000).map(|i| textbook_shape(m.nu, i as f64 / 20_000.0).abs()).fold(0.0, f64::max);
        for i in 0..=40 {
            let s = i as f64 / 40.0;
            let t = textbook_shape(m.nu, s) / peak;
            assert!((m.value(s).abs() - t.abs()).abs() < 1e-6, "mode {n} at {s}");
        }
    }
}

#[test]
fn outside_unit_interval_is_an_error() {
    assert!(beam::mode_shape(1, -0.01).is_err());
    assert!(beam::mode_shape(1, 1.01).is_err());
    assert!(beam::mode_shape(1, 1.0).is_ok());
}

#[test]
fn mass_ratio_by_independent_quadrature() {
    for n in 1..=4 {
        let m = ModeShape::new(n).unwrap();
        let oracle = simpson(|s| m.value(s).powi(2), 4000);
        assert!((beam::mass_ratio(n).unwrap() - oracle).abs() < 1e-9);
    }
    assert!((beam::mass_ratio(1).unwrap() - 0.39648).abs() < 5e-5);
}

#[test]
fn stiffness_overlaps_structure() {
    let m = beam::stiffness_overlaps(6).unwrap();
    for i in 0..6 {
        for j in 0..6 {
            assert!((m[(i, j)] - m[(j, i)]).abs() < 1e-12);
            if (i + j) % 2 == 1 {
                assert!(m[(i, j)].abs() < 1e-9, "M~[{i},{j}] = {}", m[(i, j)]);
            }
        }
        assert!(m[(i, i)] > 0.0);
    }
    let (a, b) = (ModeShape::new(1).unwrap(), ModeShape::new(3).unwrap());
    let oracle = simpson(|s| a.slope(s) * b.slope(s), 4000);
    assert!((m[(0, 2)] - oracle).abs() < 1e-8);
}

#[test]
fn table_entries() {
    let t = beam::nonlinearity_tensor(&cnt(), 5).unwrap();
    let expected = [
        ((1, 1), 0.3024),
        ((2, 2), 0.4106),
        ((3, 3), 0.4498),
        ((1, 3), 0.1029),
        ((1, 5), -0.0512),
        ((3, 5), 0.0705),
    ];
    for ((k, l), v) in expected {
        let b = t.bracket(1, 1, k, l);
        assert!((b - v).abs() < 2e-3, "B_11{k}{l} = {b}, expected {v}");
    }
    assert!(t.bracket(1, 1, 1, 2).abs() < 1e-9);
}

#[test]
fn lambda0_permutation_symmetry() {
    let t = beam::nonlinearity_tensor(&cnt(), 4).unwrap();
    for i in 1..=4 {
        for j in 1..=4 {
            for k in 1..=4 {
                for l in 1..=4 {
                    let v = t.lambda0(i, j, k, l);
                    for w in [t.lambda0(j, i, k, l), t.lambda0(i, j, l, k), t.lambda0(k, l, i, j)] {
                        assert!((v - w).abs() <= 1e-12 * v.abs().max(1e-300));
                    }
                }
            }
        }
    }
}

#[test]
fn tensor_cutoff_limits() {
    assert!(beam::nonlinearity_tensor(&cnt(), 0).is_err());
    assert!(beam::nonlinearity_tensor(&cnt(), beam::MAX_TENSOR_MODES + 1).is_err());
}

#[test]
fn cnt_fundamental_mode() {
    let d = beam::duffing_params(&cnt()).unwrap();
    assert!((d.omega0 / (2.0 * PI) / 20.62e6 - 1.0).abs() < 2e-3);
    assert!((d.lambda0 / (2.0 * PI) / 2239.5 - 1.0).abs() < 2e-3);
    assert!((d.x_zpm / 2.35e-11 - 1.0).abs() < 1e-2);
    assert!((beam::anharmonicity_coefficient().unwrap() - 0.0599).abs() < 1e-4);
}

#[test]
fn thin_rod_warning_threshold() {
    assert!(cnt().thin_rod_warning().is_none());
    let stubby = BeamSpec::new(1e-8, 1e-15, 1e-9, 1e4).unwrap();
    assert!(stubby.thin_rod_warning().is_some());
    assert!(BeamSpec::new(-1.0, 1e-15, 1e-9, 1e4).is_err());
    assert!(BeamSpec::new(1e-6, 0.0, 1e-9, 1e4).is_err());
}

#[test]
fn doubling_length_halves_lambda0() {
    let a = beam::duffing_params(&cnt()).unwrap();
    let mut s = cnt();
    s.length *= 2.0;
    let b = beam::duffing_params(&s).unwrap();
    assert!((b.lambda0 / a.lambda0 - 0.5).abs() < 1e-12);
    assert!((b.omega0 / a.omega0 - 0.25).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // λ₀ = c ℏ / (8 κ̃² m*) with c the dimensionless coefficient
    #[test]
    fn lambda0_closed_form(l in 1e-7..1e-5f64, mu in 1e-16..1e-13f64, g in 1e-10..5e-9f64, cs in 1e3..5e4f64) {
        let spec = BeamSpec::new(l, mu, g, cs).unwrap();
        let d = beam::duffing_params(&spec).unwrap();
        let c = beam::anharmonicity_coefficient().unwrap();
        let oracle = c * HBAR / (8.0 * g * g * d.effective_mass);
        prop_assert!((d.lambda0 / oracle - 1.0).abs() < 1e-10);
    }

    #[test]
    fn brackets_are_scale_free(l in 1e-7..1e-5f64, mu in 1e-16..1e-13f64, g in 1e-10..5e-9f64, cs in 1e3..5e4f64) {
        let a = beam::nonlinearity_tensor(&BeamSpec::new(l, mu, g, cs).unwrap(), 3).unwrap();
        let b = beam::nonlinearity_tensor(&BeamSpec::new(10.0 * l, 3.0 * mu, 2.0 * g, cs).unwrap(), 3).unwrap();
        for k in 1..=3 {
            for m in 1..=3 {
                prop_assert!((a.bracket(1, 1, k, m) - b.bracket(1, 1, k, m)).abs() < 1e-12);
            }
        }
        // λ⁰ ∝ 1/(κ̃² μ L)
        prop_assert!((b.lambda0(1, 1, 1, 1) / a.lambda0(1, 1, 1, 1) - 1.0 / 120.0).abs() < 1e-12);
    }

    #[test]
    fn shape_bounded(n in 1usize..=20, s in 0.0..=1.0f64) {
        prop_assert!(beam::mode_shape(n, s).unwrap().abs() <= 1.0 + 1e-9);
    }
}
