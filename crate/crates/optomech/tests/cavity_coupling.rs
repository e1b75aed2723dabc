use nalgebra::Complex;
use optomech::cavity::{self, AcConvention, CavityGeometry, LaserInput};
use optomech::scenario::Scenario;
use optomech::units::polarizability_from_angstrom2;
use proptest::prelude::*;
use std::f64::consts::PI;

fn geom() -> CavityGeometry {
    Scenario::fig4().cavity().unwrap()
}

fn alpha_par() -> f64 {
    polarizability_from_angstrom2(143.0)
}

// power series, adequate for |t| < 6
fn bessel_series(n: i32, t: f64) -> f64 {
    let mut term = (0.5 * t).powi(n) / (1..=n).map(f64::from).product::<f64>();
    let mut sum = term;
    for k in 1..60 {
        term *= -(0.25 * t * t) / (k as f64 * (k + n) as f64);
        sum += term;
    }
    sum
}

fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        acc += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * h / 3.0
}

#[test]
fn reference_field_structure() {
    let fs = cavity::field_structure(&geom()).unwrap();
    assert!((1.0 / fs.kappa_perp / 0.17e-6 - 1.0).abs() < 0.05);
    assert!((fs.xi / 0.2 - 1.0).abs() < 0.15);
    assert!((fs.xi_tilde + 0.4).abs() < 0.01);
    assert!((fs.xi - fs.xi_definition).abs() < 1e-6 * fs.xi);
    assert!(fs.xi > 0.0 && fs.xi < 1.0);
    assert!(fs.kappa_perp > fs.gamma_t);
    assert!((bessel_series(1, fs.x11)).abs() < 1e-9);
    assert!((bessel_series(0, fs.x_star) - bessel_series(2, fs.x_star)).abs() < 1e-9);
}

#[test]
fn below_cutoff_is_rejected() {
    let mut g = geom();
    g.radius = 0.3e-6;
    let err = cavity::field_structure(&g).unwrap_err();
    assert!(err.to_string().contains("cutoff"));
    g = geom();
    g.index = 1.0;
    assert!(cavity::field_structure(&g).is_err());
}

#[test]
fn evanescent_profile() {
    let g = geom();
    let fs = cavity::field_structure(&g).unwrap();
    let a = fs.radius;
    assert!(cavity::evanescent_amplitude(&fs, g.index, a).is_err());
    let edge = cavity::evanescent_amplitude(&fs, g.index, a * (1.0 + 1e-12)).unwrap().abs();
    assert!((edge / (fs.xi / (g.index * fs.mode_volume.sqrt())) - 1.0).abs() < 1e-9);
    let r = a + 1.0 / fs.kappa_perp;
    let far = cavity::evanescent_amplitude(&fs, g.index, r).unwrap().abs();
    assert!((far / edge - (-1f64).exp() * (a / r).sqrt()).abs() < 1e-9);
    let mut prev = edge;
    for i in 1..100 {
        let v = cavity::evanescent_amplitude(&fs, g.index, a + i as f64 * 1e-8).unwrap().abs();
        assert!(v < prev);
        prev = v;
    }
}

#[test]
fn mode_normalization_spot_check() {
    // internal E_φ ∝ J₁(γr), scaled to 1/(n_c√V_c) at its maximum, plus the evanescent tail
    let g = geom();
    let fs = cavity::field_structure(&g).unwrap();
    let (a, n) = (fs.radius, g.index);
    let umax2 = 1.0 / (n * n * fs.mode_volume);
    let peak = bessel_series(1, fs.x_star).powi(2);
    let inside = simpson(|r| r * bessel_series(1, fs.gamma_t * r).powi(2) / peak, 0.0, a, 4000);
    let inside = n * n * umax2 * 2.0 * PI * g.circumference * inside;
    let outside = simpson(
        |r| r * cavity::evanescent_amplitude(&fs, n, r).unwrap().powi(2),
        a * (1.0 + 1e-12),
        a + 40.0 / fs.kappa_perp,
        4000,
    ) * 2.0 * PI * g.circumference;
    let total = inside + outside;
    assert!((total - 1.0).abs() < 0.1, "normalization {total}");
}

#[test]
fn placement_at_reference_geometry() {
    let (fs, p, c) = cavity::optimal_coupling(&geom(), alpha_par(), 1e-6).unwrap();
    assert!((p.theta.sin().powi(2) - 2.0 / 3.0).abs() < 1e-12);
    assert!((1.0 / p.c_corr - 22.0).abs() < 2.0);
    assert!(c.c_corr > 0.0 && c.c_corr < 1.0);
    assert_eq!(cavity::correction_factor(cavity::offset_parameter(&geom(), &fs), 0.0, p.phi).unwrap(), 0.0);
    assert!(cavity::correction_factor(1.0, 1.0, 0.5 * PI).is_err());
    assert!((c.g0_hz_per_m * 2.0 * PI - c.g0_angular).abs() < 1e-6 * c.g0_angular);
}

fn grid_optimum(kd: f64) -> (f64, f64, f64) {
    let mut best = (0.0, 0.0, f64::MIN);
    let n = 600;
    for i in 1..n {
        let th = 0.5 * PI * i as f64 / n as f64;
        for j in 1..n {
            let ph = 0.5 * PI * j as f64 / n as f64;
            let v = cavity::correction_factor(kd, th, ph).unwrap();
            if v > best.2 {
                best = (th, ph, v);
            }
        }
    }
    // refine on a local grid
    let (t0, p0) = (best.0, best.1);
    let step = 0.5 * PI / n as f64;
    for i in -50..=50 {
        for j in -50..=50 {
            let th = t0 + step * i as f64 / 50.0;
            let ph = p0 + step * j as f64 / 50.0;
            if ph.abs() < 0.5 * PI {
                let v = cavity::correction_factor(kd, th, ph).unwrap();
                if v > best.2 {
                    best = (th, ph, v);
                }
            }
        }
    }
    best
}

#[test]
fn placement_matches_grid_search() {
    for kd in [5.0, 8.0, 12.0, 20.0, 35.0, 50.0] {
        let p = cavity::optimize_placement(kd).unwrap();
        let (th, ph, v) = grid_optimum(kd);
        assert!((p.theta / th - 1.0).abs() < 0.01, "theta at K = {kd}");
        assert!((p.phi / ph - 1.0).abs() < 0.01, "phi at K = {kd}");
        assert!(p.c_corr >= v * (1.0 - 1e-9));
        if kd >= 8.0 {
            assert!((p.c_corr_leading / p.c_corr - 1.0).abs() < 0.12);
        }
    }
    assert!(cavity::optimize_placement(0.0).is_err());
}

#[test]
fn coupling_scalings() {
    let g = geom();
    let (fs, p, base) = cavity::optimal_coupling(&g, alpha_par(), 1e-6).unwrap();
    assert_eq!(cavity::coupling_g0(&g, &fs, 0.0, 1e-6, p.c_corr).g0_angular, 0.0);
    let a2 = cavity::coupling_g0(&g, &fs, 2.0 * alpha_par(), 1e-6, p.c_corr);
    let l3 = cavity::coupling_g0(&g, &fs, alpha_par(), 3e-6, p.c_corr);
    assert!((a2.g0_angular / base.g0_angular - 2.0).abs() < 1e-12);
    assert!((l3.g0_angular / base.g0_angular - 3.0).abs() < 1e-12);
    let mut far = g;
    far.gap += 0.5 / fs.kappa_perp;
    let shifted = cavity::coupling_g0(&far, &fs, alpha_par(), 1e-6, p.c_corr);
    assert!((shifted.g0_angular / base.g0_angular - (-1f64).exp()).abs() < 1e-12);
}

#[test]
fn reference_g0_magnitude() {
    let (_, _, c) = cavity::optimal_coupling(&geom(), alpha_par(), 1e-6).unwrap();
    assert!((c.g0_angular / 1.745e10 - 1.0).abs() < 0.01);
    let ratio = c.g0_angular / 1.02e10;
    assert!((0.5..2.0).contains(&ratio));
}

#[test]
fn convention_toggle_scales_radius() {
    let mut g = geom();
    g.convention = AcConvention::Reference;
    assert!((g.model_radius() / g.radius - 1.44).abs() < 1e-12);
    let s = cavity::g0_sensitivity(&geom(), alpha_par(), 1e-6).unwrap();
    assert!(s.len() >= 6);
    assert!(s.iter().all(|x| x.g0_angular > 0.0));
}

fn laser(power: f64, detuning: f64) -> LaserInput {
    let g = geom();
    let kappa = 2.0 * PI * 52.3e3;
    LaserInput { power, omega_laser: g.omega(), detuning, kappa, kappa_ex: 0.1 * kappa }
}

#[test]
fn zero_power_and_resonance() {
    let d = cavity::linearize_drives(1e10, 4.66e-11, &[laser(0.0, 1e5), laser(1e-6, 0.0)]).unwrap();
    assert_eq!(d[0].alpha, Complex::new(0.0, 0.0));
    assert_eq!(d[0].coupling.norm(), 0.0);
    let on = d[1];
    assert!(on.alpha.re.abs() < 1e-15 * on.alpha.im.abs());
    assert!((on.alpha.norm() - on.rabi / laser(1e-6, 0.0).kappa).abs() < 1e-12 * on.alpha.norm());
    let mut bad = laser(1e-6, 0.0);
    bad.kappa = 0.0;
    assert!(cavity::linearize_drives(1e10, 4.66e-11, &[bad]).is_err());
}

#[test]
fn power_inverts_coupling() {
    let (_, _, c) = cavity::optimal_coupling(&geom(), alpha_par(), 1e-6).unwrap();
    let l = laser(0.0, 2.0 * PI * 5.4e6);
    let target = 2.0 * PI * 20.9e3;
    let p = cavity::power_for_coupling(target, c.g0_angular, 4.66e-11, l.detuning, l.kappa, l.kappa_ex, l.omega_laser);
    let d = cavity::linearize_drives(c.g0_angular, 4.66e-11, &[laser(p, l.detuning)]).unwrap();
    assert!((d[0].coupling.norm() / target - 1.0).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn amplitude_consistency(p in 0.0..1e-3f64, det in -1e8..1e8f64, k in 1e3..1e7f64, f in 0.01..1.0f64) {
        let g = geom();
        let input = LaserInput { power: p, omega_laser: g.omega(), detuning: det, kappa: k, kappa_ex: f * k };
        let d = cavity::linearize_drives(1e10, 4.66e-11, &[input]).unwrap()[0];
        let lhs = d.photons * (det * det + 0.25 * k * k);
        let rhs = 0.25 * d.rabi * d.rabi;
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1e-300));
        prop_assert!((d.coupling.norm() - 2.0 * d.alpha.norm() * 1e10 * 4.66e-11).abs() <= 1e-12 * d.coupling.norm().max(1e-300));
    }

    #[test]
    fn correction_factor_bounded(kd in 0.5..100.0f64, th in 0.0..PI, ph in -1.5..1.5f64) {
        let v = cavity::correction_factor(kd, th, ph).unwrap();
        prop_assert!(v.abs() < 1.0);
    }
}

