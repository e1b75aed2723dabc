//! Reduced population master equation in the energy eigenbasis, effective
//! linewidths and the probe output spectrum.

pub mod liouvillian;

use crate::error::{Error, Result};
use crate::spectrum::AnharmonicSpectrum;
use crate::units::bose_occupation;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Default number of uniform spectrum grid points.
pub const DEFAULT_GRID: usize = 1 << 12;
/// Extra points placed around each peak.
const PEAK_POINTS: usize = 41;
/// Half-width of the refinement window in units of γ_eff.
const PEAK_WINDOW: f64 = 5.0;
/// Peaks lighter than this fraction of the heaviest one do not set the
/// window or the nearest-peak labels.
const SIGNIFICANT: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Probe,
    Preparation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Drive {
    /// Δ_j = ω_L,j − ω_j (rad/s)
    pub detuning: f64,
    /// |g_m,j| (rad/s)
    pub coupling: f64,
    /// κ_j (rad/s)
    pub kappa: f64,
    pub role: Role,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriveSet {
    pub drives: Vec<Drive>,
}

impl DriveSet {
    pub fn new(drives: Vec<Drive>) -> Result<Self> {
        let set = DriveSet { drives };
        set.validate()?;
        Ok(set)
    }

    pub fn validate(&self) -> Result<()> {
        for (j, d) in self.drives.iter().enumerate() {
            if !(d.kappa > 0.0 && d.kappa.is_finite()) {
                return Err(Error::Invalid(format!("drive {j}: kappa must be positive, got {}", d.kappa)));
            }
            if !(d.coupling >= 0.0 && d.coupling.is_finite() && d.detuning.is_finite()) {
                return Err(Error::Invalid(format!("drive {j}: coupling and detuning must be finite, coupling >= 0")));
            }
        }
        if self.drives.iter().filter(|d| d.role == Role::Probe).count() > 1 {
            return Err(Error::Invalid("at most one probe drive is allowed".into()));
        }
        Ok(())
    }

    pub fn probe(&self) -> Option<&Drive> {
        self.drives.iter().find(|d| d.role == Role::Probe)
    }

    pub fn preparation(&self) -> Vec<Drive> {
        self.drives.iter().copied().filter(|d| d.role == Role::Preparation).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermalBath {
    /// T (K)
    pub temperature: f64,
    /// γ (1/s)
    pub gamma: f64,
    pub nbar: f64,
}

impl ThermalBath {
    /// Bath at temperature `t` with n̄ taken at `omega_m`.
    pub fn new(omega_m: f64, temperature: f64, gamma: f64) -> Result<Self> {
        let bath = ThermalBath { temperature, gamma, nbar: bose_occupation(omega_m, temperature) };
        bath.validate(omega_m)?;
        Ok(bath)
    }

    /// Bath with γ = ω_m/Q.
    pub fn from_quality(omega_m: f64, quality: f64, temperature: f64) -> Result<Self> {
        if !(quality > 0.0) {
            return Err(Error::Invalid(format!("quality factor must be positive, got {quality}")));
        }
        Self::new(omega_m, temperature, omega_m / quality)
    }

    pub fn validate(&self, omega_m: f64) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::Invalid(format!("mechanical damping must be positive, got {}", self.gamma)));
        }
        if !(self.temperature >= 0.0) {
            return Err(Error::Invalid(format!("temperature must be non-negative, got {}", self.temperature)));
        }
        let expected = bose_occupation(omega_m, self.temperature);
        if (self.nbar - expected).abs() > 1e-9 * expected.max(1e-300) {
            return Err(Error::Invalid(format!(
                "nbar = {} inconsistent with the Bose occupation {expected} at T = {}",
                self.nbar, self.temperature
            )));
        }
        Ok(())
    }
}

/// A^{nm} for one drive; entry (n, m) is the rate m → n.
pub fn drive_rates(spec: &AnharmonicSpectrum, drive: &Drive) -> DMatrix<f64> {
    let k = spec.levels();
    let g2 = drive.coupling * drive.coupling;
    DMatrix::from_fn(k, k, |n, m| {
        if n == m {
            return 0.0;
        }
        let off = drive.detuning - spec.delta(n, m);
        g2 * spec.x[(n, m)].powi(2) * drive.kappa / (4.0 * off * off + drive.kappa * drive.kappa)
    })
}

/// A^{nm}_j for every drive in order.
pub fn laser_rates(spec: &AnharmonicSpectrum, drives: &[Drive]) -> Vec<DMatrix<f64>> {
    drives.iter().map(|d| drive_rates(spec, d)).collect()
}

/// γ(n̄+1)X²_{nm} downward (n < m) and γn̄X²_{nm} upward (n > m).
pub fn thermal_rates(spec: &AnharmonicSpectrum, bath: &ThermalBath) -> DMatrix<f64> {
    let k = spec.levels();
    DMatrix::from_fn(k, k, |n, m| {
        let x2 = spec.x[(n, m)].powi(2);
        match n.cmp(&m) {
            std::cmp::Ordering::Less => bath.gamma * (bath.nbar + 1.0) * x2,
            std::cmp::Ordering::Greater => bath.gamma * bath.nbar * x2,
            std::cmp::Ordering::Equal => 0.0,
        }
    })
}

/// Sum of transition-rate matrices.
pub fn total_rates(parts: &[&DMatrix<f64>]) -> Result<DMatrix<f64>> {
    let first = parts.first().ok_or_else(|| Error::Invalid("no rate contributions".into()))?;
    let mut total = DMatrix::zeros(first.nrows(), first.ncols());
    for p in parts {
        total += *p;
    }
    Ok(total)
}

/// Generator G = R − diag(Σ_n R_nm); columns sum to zero.
pub fn generator(rates: &DMatrix<f64>) -> DMatrix<f64> {
    let mut g = rates.clone();
    g.fill_diagonal(0.0);
    for m in 0..g.ncols() {
        let out: f64 = (0..g.nrows()).filter(|&n| n != m).map(|n| g[(n, m)]).sum();
        g[(m, m)] = -out;
    }
    g
}

/// Total rate out of each level, Σ_{l≠m} R_lm.
pub fn out_rates(rates: &DMatrix<f64>) -> Vec<f64> {
    (0..rates.ncols())
        .map(|m| (0..rates.nrows()).filter(|&n| n != m).map(|n| rates[(n, m)]).sum())
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct SteadyState {
    pub populations: Vec<f64>,
    pub generator: DMatrix<f64>,
    /// max |G P|
    pub residual: f64,
    /// max |Σ_n G_nm|
    pub column_sum_error: f64,
}

fn reachable(rates: &DMatrix<f64>, forward: bool) -> Vec<bool> {
    let k = rates.nrows();
    let mut seen = vec![false; k];
    let mut stack = vec![0usize];
    seen[0] = true;
    while let Some(m) = stack.pop() {
        for n in 0..k {
            let r = if forward { rates[(n, m)] } else { rates[(m, n)] };
            if n != m && r > 0.0 && !seen[n] {
                seen[n] = true;
                stack.push(n);
            }
        }
    }
    seen
}

/// Solves G P = 0 with Σ P = 1.
pub fn steady_populations(rates: &DMatrix<f64>) -> Result<SteadyState> {
    let k = rates.nrows();
    if k == 0 || rates.ncols() != k {
        return Err(Error::Invalid("rate matrix must be square and non-empty".into()));
    }
    if rates.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
        return Err(Error::Invalid("rates must be finite and non-negative".into()));
    }
    let fwd = reachable(rates, true);
    let bwd = reachable(rates, false);
    let cut: Vec<usize> = (0..k).filter(|&n| !(fwd[n] && bwd[n])).collect();
    if !cut.is_empty() {
        return Err(Error::Solver(format!(
            "rate graph is reducible: levels {cut:?} are not mutually reachable with level 0 \
             (unreachable from 0: {:?}; cannot reach 0: {:?})",
            (0..k).filter(|&n| !fwd[n]).collect::<Vec<_>>(),
            (0..k).filter(|&n| !bwd[n]).collect::<Vec<_>>()
        )));
    }
    let g = generator(rates);
    let mut a = g.clone();
    let last = k - 1;
    for m in 0..k {
        a[(last, m)] = 1.0;
    }
    let mut rhs = DVector::zeros(k);
    rhs[last] = 1.0;
    let p = a
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Solver("population balance is singular".into()))?;
    if p.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("non-finite steady-state population".into()));
    }
    let mut populations: Vec<f64> = p.iter().map(|&v| v.max(0.0)).collect();
    let sum: f64 = populations.iter().sum();
    populations.iter_mut().for_each(|v| *v /= sum);
    let pv = DVector::from_column_slice(&populations);
    let residual = (&g * pv).amax();
    let column_sum_error = (0..k).map(|m| g.column(m).sum().abs()).fold(0.0, f64::max);
    Ok(SteadyState { populations, generator: g, residual, column_sum_error })
}

/// γ_eff^{nm}: the summed decay rates of levels n and m under all drive
/// and thermal channels.
pub fn effective_linewidths(drive_rates: &[DMatrix<f64>], thermal: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let mut parts: Vec<&DMatrix<f64>> = drive_rates.iter().collect();
    parts.push(thermal);
    let out = out_rates(&total_rates(&parts)?);
    let k = out.len();
    Ok(DMatrix::from_fn(k, k, |n, m| out[n] + out[m]))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Peak {
    pub n: usize,
    pub m: usize,
    /// δ_nm (rad/s)
    pub position: f64,
    /// γ_eff^{nm} (rad/s)
    pub width: f64,
    /// ∫ S dω = (κ_ex/κ) A^{nm}_0 P_n
    pub weight: f64,
}

impl Peak {
    #[inline]
    fn eval(&self, offset: f64) -> f64 {
        let d = offset - self.position;
        self.weight / (2.0 * PI) * self.width / (d * d + 0.25 * self.width * self.width)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumResult {
    /// ω − ω_L (rad/s)
    pub offsets: Vec<f64>,
    pub values: Vec<f64>,
    /// (n, m) of the nearest significant peak per grid point
    pub nearest: Vec<(usize, usize)>,
    pub peaks: Vec<Peak>,
}

/// Lorentzian peak list of the probe output. `external_fraction` is κ_ex/κ
/// of the probed mode.
pub fn spectrum_peaks(
    spec: &AnharmonicSpectrum,
    populations: &[f64],
    probe: &Drive,
    linewidths: &DMatrix<f64>,
    external_fraction: f64,
) -> Result<Vec<Peak>> {
    let k = spec.levels();
    if populations.len() != k || linewidths.nrows() != k {
        return Err(Error::Invalid("populations, linewidths and spectrum disagree in size".into()));
    }
    let a0 = drive_rates(spec, probe);
    let mut peaks = Vec::new();
    for n in 0..k {
        for m in 0..k {
            if n == m {
                continue;
            }
            let weight = external_fraction * a0[(n, m)] * populations[n];
            if weight > 0.0 {
                peaks.push(Peak { n, m, position: spec.delta(n, m), width: linewidths[(n, m)], weight });
            }
        }
    }
    Ok(peaks)
}

/// Uniform grid over ±1.2 max|δ_nm| of the significant peaks, refined
/// around each of them.
pub fn default_grid(peaks: &[Peak], points: usize) -> Result<Vec<f64>> {
    if points < 2 {
        return Err(Error::Invalid(format!("grid needs at least 2 points, got {points}")));
    }
    let sig = significant(peaks);
    if sig.is_empty() {
        return Err(Error::Invalid("no spectral peaks to place a grid around".into()));
    }
    let span = 1.2 * sig.iter().map(|p| p.position.abs()).fold(0.0, f64::max);
    let step = 2.0 * span / (points - 1) as f64;
    let mut grid: Vec<f64> = (0..points).map(|i| -span + step * i as f64).collect();
    for p in &sig {
        let half = PEAK_WINDOW * p.width;
        for i in 0..PEAK_POINTS {
            let t = -1.0 + 2.0 * i as f64 / (PEAK_POINTS - 1) as f64;
            grid.push(p.position + half * t);
        }
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    Ok(grid)
}

fn significant(peaks: &[Peak]) -> Vec<Peak> {
    let top = peaks.iter().map(|p| p.weight).fold(0.0, f64::max);
    peaks.iter().copied().filter(|p| p.weight >= SIGNIFICANT * top).collect()
}

/// S at one offset, summing peaks in list order.
pub fn spectral_density(peaks: &[Peak], offset: f64) -> f64 {
    let mut s = 0.0;
    for p in peaks {
        s += p.eval(offset);
    }
    s
}

/// Evaluates S on `grid`, split over `workers` threads. Every point is
/// summed in the same order, so the output does not depend on `workers`.
pub fn emission_spectrum(peaks: &[Peak], grid: &[f64], workers: usize) -> Result<SpectrumResult> {
    if grid.is_empty() {
        return Err(Error::Invalid("empty frequency grid".into()));
    }
    if peaks.is_empty() {
        return Err(Error::Invalid("no spectral peaks".into()));
    }
    let workers = workers.clamp(1, grid.len());
    let mut values = vec![0.0; grid.len()];
    let chunk = grid.len().div_ceil(workers);
    std::thread::scope(|scope| {
        for (xs, out) in grid.chunks(chunk).zip(values.chunks_mut(chunk)) {
            scope.spawn(move || {
                for (x, v) in xs.iter().zip(out.iter_mut()) {
                    *v = spectral_density(peaks, *x);
                }
            });
        }
    });
    let sig = significant(peaks);
    let nearest = grid
        .iter()
        .map(|&x| {
            let mut best = &sig[0];
            for p in &sig[1..] {
                if (x - p.position).abs() < (x - best.position).abs() {
                    best = p;
                }
            }
            (best.n, best.m)
        })
        .collect();
    Ok(SpectrumResult { offsets: grid.to_vec(), values, nearest, peaks: peaks.to_vec() })
}
