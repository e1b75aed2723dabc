//! Fock-space diagonalization of ω_m b†b + (λ/2)(b† + b)⁴.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

pub const DEFAULT_CUTOFF: usize = 60;
pub const DEFAULT_LEVELS: usize = 15;
const MAX_CUTOFF: usize = 1920;
/// Convergence target for the retained levels, relative to ω_m.
const CONVERGENCE: f64 = 1e-8;

/// Number-basis matrix of b + b† on `n` levels.
pub fn position_matrix(n: usize) -> DMatrix<f64> {
    let mut x = DMatrix::zeros(n, n);
    for k in 1..n {
        let v = (k as f64).sqrt();
        x[(k - 1, k)] = v;
        x[(k, k - 1)] = v;
    }
    x
}

/// Exact ⟨n|(b + b†)⁴|m⟩ for n, m < `n` (computed in a padded basis).
pub fn quartic_matrix(n: usize) -> DMatrix<f64> {
    let x = position_matrix(n + 4);
    let x2 = &x * &x;
    let x4 = &x2 * &x2;
    x4.view((0, 0), (n, n)).into_owned()
}

/// Warning when λ/ω_m leaves the weak-anharmonicity regime.
pub fn validity_warning(omega: f64, lambda: f64) -> Option<String> {
    let r = lambda / omega;
    (r >= 0.5).then(|| format!("lambda/omega = {r:.3} >= 0.5: single-mode quartic model out of its regime"))
}

/// H/ℏ in the number basis (rad/s).
pub fn build_hamiltonian(omega: f64, lambda: f64, n: usize) -> Result<DMatrix<f64>> {
    if n < 4 {
        return Err(Error::Invalid(format!("Fock cutoff must be at least 4, got {n}")));
    }
    if !(omega > 0.0) || !(lambda >= 0.0) {
        return Err(Error::Invalid(format!("need omega > 0 and lambda >= 0, got ({omega}, {lambda})")));
    }
    let mut h = quartic_matrix(n) * (0.5 * lambda);
    for k in 0..n {
        h[(k, k)] += omega * k as f64;
    }
    Ok(h)
}

#[derive(Debug, Clone, Serialize)]
pub struct AnharmonicSpectrum {
    pub omega: f64,
    pub lambda: f64,
    /// Fock cutoff used
    pub cutoff: usize,
    /// E_n − E_0 (rad/s), ascending
    pub energies: Vec<f64>,
    /// E_0 before the offset was removed (rad/s)
    pub ground_energy: f64,
    /// X_nm in units of x_ZPM
    pub x: DMatrix<f64>,
    /// eigenvectors in the number basis, one column per retained level
    pub vectors: DMatrix<f64>,
}

impl AnharmonicSpectrum {
    pub fn levels(&self) -> usize {
        self.energies.len()
    }

    /// δ_nm = E_n − E_m (rad/s)
    pub fn delta(&self, n: usize, m: usize) -> f64 {
        self.energies[n] - self.energies[m]
    }

    /// E_n before offset removal.
    pub fn raw_energy(&self, n: usize) -> f64 {
        self.energies[n] + self.ground_energy
    }

    /// δ_nm for n, m ≤ max_level.
    pub fn transition_table(&self, max_level: usize) -> Result<DMatrix<f64>> {
        if max_level >= self.levels() {
            return Err(Error::Invalid(format!(
                "max_level {max_level} beyond the {} retained levels",
                self.levels()
            )));
        }
        let k = max_level + 1;
        Ok(DMatrix::from_fn(k, k, |n, m| self.delta(n, m)))
    }

    /// Truncated copy keeping the lowest `levels` states.
    pub fn truncated(&self, levels: usize) -> AnharmonicSpectrum {
        let k = levels.min(self.levels());
        AnharmonicSpectrum {
            energies: self.energies[..k].to_vec(),
            x: self.x.view((0, 0), (k, k)).into_owned(),
            vectors: self.vectors.columns(0, k).into_owned(),
            ..self.clone()
        }
    }
}

/// Diagonalizes `h` and keeps the `n_keep` lowest levels. Eigenvector
/// phases are fixed so that ⟨n|ψ_n⟩ > 0; ties are ordered by bare phonon
/// number.
pub fn diagonalize(h: &DMatrix<f64>, omega: f64, lambda: f64, n_keep: usize) -> Result<AnharmonicSpectrum> {
    let n = h.nrows();
    if n_keep == 0 || n_keep > n {
        return Err(Error::Invalid(format!("cannot keep {n_keep} levels of a {n}-dimensional basis")));
    }
    let eig = SymmetricEigen::new(h.clone());
    let mut order: Vec<usize> = (0..n).collect();
    let dominant = |k: usize| eig.eigenvectors.column(k).iamax();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .partial_cmp(&eig.eigenvalues[b])
            .unwrap()
            .then(dominant(a).cmp(&dominant(b)))
    });
    if eig.eigenvalues.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("non-finite eigenvalue".into()));
    }
    let mut vectors = DMatrix::zeros(n, n_keep);
    for (col, &k) in order.iter().take(n_keep).enumerate() {
        let mut v = eig.eigenvectors.column(k).into_owned();
        if v[col] < 0.0 {
            v.neg_mut();
        }
        // parity is a good quantum number; drop round-off leakage so that
        // X_nm vanishes exactly for even n − m
        let parity = v.iamax() % 2;
        for (i, c) in v.iter_mut().enumerate() {
            if i % 2 != parity {
                *c = 0.0;
            }
        }
        v.normalize_mut();
        vectors.set_column(col, &v);
    }
    let e0 = eig.eigenvalues[order[0]];
    let energies = order.iter().take(n_keep).map(|&k| eig.eigenvalues[k] - e0).collect();
    let x = vectors.transpose() * position_matrix(n) * &vectors;
    Ok(AnharmonicSpectrum { omega, lambda, cutoff: n, energies, ground_energy: e0, x, vectors })
}

/// Spectrum with automatic cutoff doubling until the retained levels move
/// by less than 10⁻⁸ ω_m.
pub fn solve(omega: f64, lambda: f64, n_keep: usize, cutoff: usize) -> Result<AnharmonicSpectrum> {
    let mut n = cutoff.max(n_keep + 4);
    let mut prev = diagonalize(&build_hamiltonian(omega, lambda, n)?, omega, lambda, n_keep)?;
    loop {
        let next_n = 2 * n;
        if next_n > MAX_CUTOFF {
            return Err(Error::Numerical(format!(
                "levels not converged at cutoff {n}; try a larger --fock-cutoff or fewer levels"
            )));
        }
        let next = diagonalize(&build_hamiltonian(omega, lambda, next_n)?, omega, lambda, n_keep)?;
        let change = (0..n_keep)
            .map(|k| (next.raw_energy(k) - prev.raw_energy(k)).abs())
            .fold(0.0, f64::max);
        if change < CONVERGENCE * omega {
            // report the smaller converged basis
            return Ok(prev);
        }
        prev = next;
        n = next_n;
    }
}

/// E_n = nω_m' + n(n−1)λ'/2 with ω_m' = ω_m + 2λ', λ' = 6λ, for n = 0..=n_max.
pub fn rwa_spectrum(omega: f64, lambda: f64, n_max: usize) -> Vec<f64> {
    let lp = 6.0 * lambda;
    let wp = omega + 2.0 * lp;
    (0..=n_max)
        .map(|n| {
            let n = n as f64;
            n * wp + 0.5 * n * (n - 1.0) * lp
        })
        .collect()
}

/// First-order perturbative energies relative to E_0,
/// n(ω_m + 6λ) + 3λn(n−1).
pub fn first_order_spectrum(omega: f64, lambda: f64, n_max: usize) -> Vec<f64> {
    (0..=n_max)
        .map(|n| {
            let n = n as f64;
            n * (omega + 6.0 * lambda) + 3.0 * lambda * n * (n - 1.0)
        })
        .collect()
}
