use nalgebra::DMatrix;
use optomech::spectrum::{self, AnharmonicSpectrum};
use proptest::prelude::*;

// b + b† built from the ladder operator directly
fn ladder_position(n: usize) -> DMatrix<f64> {
    let mut b = DMatrix::zeros(n, n);
    for k in 1..n {
        b[(k - 1, k)] = (k as f64).sqrt();
    }
    &b + b.transpose()
}

fn solved(lambda: f64) -> AnharmonicSpectrum {
    spectrum::solve(1.0, lambda, 10, 60).unwrap()
}

#[test]
fn quartic_diagonal_closed_form() {
    let q = spectrum::quartic_matrix(30);
    for n in 0..30 {
        let n_ = n as f64;
        assert!((q[(n, n)] - (6.0 * n_ * n_ + 6.0 * n_ + 3.0)).abs() < 1e-9);
    }
}

#[test]
fn quartic_matches_operator_algebra() {
    let x = ladder_position(40);
    let x4 = &x * &x * &x * &x;
    let q = spectrum::quartic_matrix(20);
    for i in 0..20 {
        for j in 0..20 {
            assert!((q[(i, j)] - x4[(i, j)]).abs() < 1e-9);
            if (i + j) % 2 == 1 || i.abs_diff(j) > 4 {
                assert_eq!(q[(i, j)], 0.0);
            }
        }
    }
}

#[test]
fn harmonic_limit() {
    let s = spectrum::solve(2.0, 0.0, 12, 40).unwrap();
    for n in 0..12 {
        assert!((s.energies[n] - 2.0 * n as f64).abs() < 1e-12);
        for m in 0..12 {
            let oracle = if n == m + 1 || m == n + 1 { (n.max(m) as f64).sqrt() } else { 0.0 };
            assert!((s.x[(n, m)].abs() - oracle).abs() < 1e-12);
        }
    }
}

#[test]
fn hamiltonian_is_symmetric_and_validated() {
    let h = spectrum::build_hamiltonian(1.0, 0.1, 30).unwrap();
    assert_eq!(h, h.transpose());
    assert!(spectrum::build_hamiltonian(1.0, 0.1, 3).is_err());
    assert!(spectrum::build_hamiltonian(0.0, 0.1, 30).is_err());
    assert!(spectrum::build_hamiltonian(1.0, -0.1, 30).is_err());
}

#[test]
fn validity_warning_threshold() {
    assert!(spectrum::validity_warning(1.0, 0.1).is_none());
    assert!(spectrum::validity_warning(1.0, 0.5).is_some());
}

#[test]
fn parity_selection_is_exact() {
    let s = solved(0.05);
    for n in 0..10 {
        for m in 0..10 {
            if (n + m) % 2 == 0 {
                assert_eq!(s.x[(n, m)], 0.0, "X[{n},{m}]");
            }
        }
    }
}

#[test]
fn spacings_grow_and_telescope() {
    let s = solved(0.02);
    for n in 1..9 {
        assert!(s.delta(n + 1, n) > s.delta(n, n - 1));
    }
    let t = s.transition_table(6).unwrap();
    for n in 0..=6 {
        for m in 0..=6 {
            assert!((t[(n, m)] + t[(m, n)]).abs() < 1e-12);
            for k in 0..=6 {
                assert!((t[(n, m)] - (t[(n, k)] + t[(k, m)])).abs() < 1e-12);
            }
        }
    }
    assert!(s.transition_table(10).is_err());
}

#[test]
fn position_sum_rule() {
    // Σ_m X_nm² = ⟨ψ_n|x²|ψ_n⟩ when all basis states are kept
    let n = 40;
    let h = spectrum::build_hamiltonian(1.0, 0.03, n).unwrap();
    let s = spectrum::diagonalize(&h, 1.0, 0.03, n).unwrap();
    let x = ladder_position(n);
    let x2 = s.vectors.transpose() * (&x * &x) * &s.vectors;
    for k in 0..10 {
        let row: f64 = (0..n).map(|m| s.x[(k, m)].powi(2)).sum();
        assert!((row - x2[(k, k)]).abs() < 1e-9);
    }
}

#[test]
fn variational_monotonicity() {
    let mut prev: Option<Vec<f64>> = None;
    for n in [12, 16, 24, 32, 48] {
        let h = spectrum::build_hamiltonian(1.0, 0.1, n).unwrap();
        let s = spectrum::diagonalize(&h, 1.0, 0.1, 6).unwrap();
        let raw: Vec<f64> = (0..6).map(|k| s.raw_energy(k)).collect();
        if let Some(p) = &prev {
            for k in 0..6 {
                assert!(raw[k] <= p[k] + 1e-12, "level {k} rose at cutoff {n}");
            }
        }
        prev = Some(raw);
    }
}

#[test]
fn rwa_examples() {
    let e = spectrum::rwa_spectrum(1.0, 0.01, 3);
    let (lp, wp) = (0.06, 1.12);
    assert_eq!(e[0], 0.0);
    assert!((e[1] - wp).abs() < 1e-15);
    assert!((e[2] - e[1] - (wp + lp)).abs() < 1e-12);
    assert!(((e[3] - e[2]) - (e[2] - e[1]) - lp).abs() < 1e-12);
}

// Rayleigh–Schrödinger to second order in V = (λ/2)x⁴, with x⁴ from the ladder algebra
fn second_order_energy(w: f64, lambda: f64, n: usize) -> f64 {
    let x = ladder_position(n + 12);
    let v = (&x * &x * &x * &x) * (0.5 * lambda);
    let mut e = n as f64 * w + v[(n, n)];
    for k in 0..n + 8 {
        if k != n {
            e += v[(k, n)].powi(2) / ((n as f64 - k as f64) * w);
        }
    }
    e
}

#[test]
fn low_levels_follow_perturbation_theory() {
    let w = 1.0;
    for lambda in [1e-4, 1e-3, 3e-3] {
        let s = spectrum::solve(w, lambda, 4, 40).unwrap();
        let p = spectrum::first_order_spectrum(w, lambda, 3);
        let e0 = second_order_energy(w, lambda, 0);
        for n in 1..=3 {
            let pt2 = second_order_energy(w, lambda, n) - e0;
            assert!((s.energies[n] - pt2).abs() < 4e4 * lambda.powi(3), "n = {n}, λ = {lambda}");
            // first order alone misses an O(λ²) shift
            assert!((s.energies[n] - p[n]).abs() < 1e3 * lambda * lambda);
        }
    }
}

#[test]
fn truncation_keeps_lowest_levels() {
    let s = solved(0.02);
    let t = s.truncated(4);
    assert_eq!(t.levels(), 4);
    assert_eq!(t.energies[..], s.energies[..4]);
    assert_eq!(t.x[(3, 2)], s.x[(3, 2)]);
}

#[test]
fn cutoff_below_levels_is_rejected() {
    let h = spectrum::build_hamiltonian(1.0, 0.02, 8).unwrap();
    assert!(spectrum::diagonalize(&h, 1.0, 0.02, 9).is_err());
    assert!(spectrum::diagonalize(&h, 1.0, 0.02, 0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn energy_scales_with_omega(w in 0.1..10.0f64, r in 0.0..0.1f64) {
        let a = spectrum::solve(1.0, r, 6, 40).unwrap();
        let b = spectrum::solve(w, r * w, 6, 40).unwrap();
        for n in 0..6 {
            prop_assert!((b.energies[n] - w * a.energies[n]).abs() < 1e-9 * w * (n as f64 + 1.0));
        }
    }

    #[test]
    fn eigenvectors_orthonormal(r in 0.0..0.2f64) {
        let s = spectrum::solve(1.0, r, 8, 40).unwrap();
        let g = s.vectors.transpose() * &s.vectors;
        for i in 0..8 {
            for j in 0..8 {
                let e = if i == j { 1.0 } else { 0.0 };
                prop_assert!((g[(i, j)] - e).abs() < 1e-10);
            }
        }
    }
}
