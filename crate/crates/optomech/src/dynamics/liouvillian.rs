//! Brute-force Lindblad steady state of mechanics ⊗ one linearized cavity
//! mode. Small Hilbert spaces only; used to check the reduced rate model.

use super::{drive_rates, out_rates, thermal_rates, Drive, ThermalBath};
use crate::error::{Error, Result};
use crate::spectrum::{self, position_matrix, AnharmonicSpectrum};
use nalgebra::{Complex, DMatrix, DVector};
use serde::{Deserialize, Serialize};

pub const MAX_MECH: usize = 8;
pub const MAX_PHOT: usize = 6;
/// Tolerance on trace, Hermiticity and positivity of ρ_ss.
pub const STATE_TOL: f64 = 1e-8;

type C = Complex<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThermalModel {
    /// ladder operators projected on the anharmonic eigenbasis
    #[default]
    Eigenbasis,
    /// plain b and b†
    Fock,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConfig {
    /// ω_m (rad/s)
    pub omega: f64,
    /// λ (rad/s)
    pub lambda: f64,
    pub drive: Drive,
    pub bath: ThermalBath,
    pub n_mech: usize,
    pub n_phot: usize,
    pub thermal: ThermalModel,
}

#[derive(Debug, Clone)]
pub struct OracleState {
    /// ρ_ss on mechanics ⊗ cavity, index = photon·N_mech + phonon
    pub rho: DMatrix<C>,
    /// P_n in the anharmonic eigenbasis
    pub populations: Vec<f64>,
    /// ⟨b†b⟩
    pub phonons: f64,
    pub spectrum: AnharmonicSpectrum,
    pub liouvillian: DMatrix<C>,
    pub trace_error: f64,
    pub hermiticity_error: f64,
    pub min_eigenvalue: f64,
}

fn real(m: &DMatrix<f64>) -> DMatrix<C> {
    m.map(|v| C::new(v, 0.0))
}

fn annihilation(n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, j| if j == i + 1 { (j as f64).sqrt() } else { 0.0 })
}

impl OracleConfig {
    pub fn validate(&self) -> Result<()> {
        if !(4..=MAX_MECH).contains(&self.n_mech) || !(1..=MAX_PHOT).contains(&self.n_phot) {
            return Err(Error::Invalid(format!(
                "oracle dimensions must satisfy 4 <= N_mech <= {MAX_MECH}, 1 <= N_phot <= {MAX_PHOT}; got {}, {}",
                self.n_mech, self.n_phot
            )));
        }
        if !(self.drive.kappa > 0.0) {
            return Err(Error::Invalid("cavity linewidth must be positive".into()));
        }
        self.bath.validate(self.omega)
    }

    /// Mechanical spectrum in the same truncated basis as the oracle.
    pub fn spectrum(&self) -> Result<AnharmonicSpectrum> {
        let h = spectrum::build_hamiltonian(self.omega, self.lambda, self.n_mech)?;
        spectrum::diagonalize(&h, self.omega, self.lambda, self.n_mech)
    }

    fn mech_op(&self, op: &DMatrix<f64>) -> DMatrix<C> {
        real(&DMatrix::<f64>::identity(self.n_phot, self.n_phot).kronecker(op))
    }

    /// Vectorized generator (row-major vec ρ) and the mechanical spectrum.
    pub fn liouvillian(&self) -> Result<(DMatrix<C>, AnharmonicSpectrum)> {
        self.validate()?;
        let spec = self.spectrum()?;
        let nm = self.n_mech;
        let hm = spectrum::build_hamiltonian(self.omega, self.lambda, nm)?;
        let xm = position_matrix(nm);
        let ap = annihilation(self.n_phot);
        let a = real(&ap.kronecker(&DMatrix::<f64>::identity(nm, nm)));
        let ad = a.adjoint();
        let x = self.mech_op(&xm);
        let mut h = self.mech_op(&hm) - (&ad * &a) * C::new(self.drive.detuning, 0.0);
        h += (&ad + &a) * &x * C::new(0.5 * self.drive.coupling, 0.0);

        let (lower, raise) = match self.thermal {
            ThermalModel::Eigenbasis => {
                let v = &spec.vectors;
                let up = DMatrix::from_fn(nm, nm, |i, j| if i < j { spec.x[(i, j)] } else { 0.0 });
                let dn = DMatrix::from_fn(nm, nm, |i, j| if i > j { spec.x[(i, j)] } else { 0.0 });
                (v * up * v.transpose(), v * dn * v.transpose())
            }
            ThermalModel::Fock => {
                let b = annihilation(nm);
                let bd = b.transpose();
                (b, bd)
            }
        };
        let jumps = [
            a.clone() * C::new(self.drive.kappa.sqrt(), 0.0),
            self.mech_op(&lower) * C::new((self.bath.gamma * (self.bath.nbar + 1.0)).sqrt(), 0.0),
            self.mech_op(&raise) * C::new((self.bath.gamma * self.bath.nbar).sqrt(), 0.0),
        ];
        let d = h.nrows();
        let id = DMatrix::<C>::identity(d, d);
        let minus_i = C::new(0.0, -1.0);
        let mut l = (h.kronecker(&id) - id.kronecker(&h.transpose())) * minus_i;
        for c in &jumps {
            let cdc = c.adjoint() * c;
            l += c.kronecker(&c.conjugate());
            l -= cdc.kronecker(&id) * C::new(0.5, 0.0);
            l -= id.kronecker(&cdc.transpose()) * C::new(0.5, 0.0);
        }
        Ok((l, spec))
    }

    fn mechanical_reduce(&self, rho: &DMatrix<C>) -> DMatrix<C> {
        let nm = self.n_mech;
        DMatrix::from_fn(nm, nm, |i, j| (0..self.n_phot).map(|p| rho[(p * nm + i, p * nm + j)]).sum())
    }

    /// Eigenbasis projector |n⟩⟨m| on the full space.
    fn transition(&self, spec: &AnharmonicSpectrum, n: usize, m: usize) -> DMatrix<C> {
        let v = &spec.vectors;
        self.mech_op(&(v.column(n) * v.column(m).transpose()))
    }
}

/// Steady state by replacing one row of L with the trace condition.
pub fn full_liouvillian_steady(cfg: &OracleConfig) -> Result<OracleState> {
    let (l, spec) = cfg.liouvillian()?;
    let d = cfg.n_mech * cfg.n_phot;
    let mut a = l.clone();
    for k in 0..d * d {
        a[(0, k)] = C::new(0.0, 0.0);
    }
    for i in 0..d {
        a[(0, i * d + i)] = C::new(1.0, 0.0);
    }
    let mut rhs = DVector::<C>::zeros(d * d);
    rhs[0] = C::new(1.0, 0.0);
    let sol = a
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Solver("Liouvillian null space is not one-dimensional".into()))?;
    if sol.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::Solver("Liouvillian null space is not one-dimensional".into()));
    }
    let rho = DMatrix::from_row_slice(d, d, sol.as_slice());
    let resid = (&l * &sol).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if resid > 1e-6 * l.iter().map(|z| z.norm()).fold(0.0, f64::max) {
        return Err(Error::Solver(format!("steady state residual {resid:e} too large; degenerate null space?")));
    }
    let trace_error = (rho.trace() - C::new(1.0, 0.0)).norm();
    let hermiticity_error = (&rho - rho.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    let herm = (&rho + rho.adjoint()) * C::new(0.5, 0.0);
    let min_eigenvalue = herm.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min);
    if trace_error > STATE_TOL || hermiticity_error > STATE_TOL || min_eigenvalue < -STATE_TOL {
        return Err(Error::Numerical(format!(
            "steady state not physical: trace error {trace_error:e}, hermiticity {hermiticity_error:e}, min eigenvalue {min_eigenvalue:e}"
        )));
    }
    let rm = cfg.mechanical_reduce(&rho);
    let v = real(&spec.vectors);
    let proj = v.transpose() * &rm * &v;
    let populations = (0..cfg.n_mech).map(|n| proj[(n, n)].re).collect();
    let num = real(&DMatrix::from_diagonal(&DVector::from_fn(cfg.n_mech, |i, _| i as f64)));
    let phonons = (num * rm).trace().re;
    Ok(OracleState {
        rho,
        populations,
        phonons,
        spectrum: spec,
        liouvillian: l,
        trace_error,
        hermiticity_error,
        min_eigenvalue,
    })
}

/// Populations of the reduced rate model on the oracle's spectrum.
pub fn reduced_populations(cfg: &OracleConfig, spec: &AnharmonicSpectrum) -> Result<Vec<f64>> {
    let r = drive_rates(spec, &cfg.drive) + thermal_rates(spec, &cfg.bath);
    Ok(super::steady_populations(&r)?.populations)
}

/// Largest laser rate over κ, the small parameter of the reduced model.
pub fn rate_ratio(cfg: &OracleConfig, spec: &AnharmonicSpectrum) -> f64 {
    drive_rates(spec, &cfg.drive).amax() / cfg.drive.kappa
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorrelatorFit {
    pub n: usize,
    pub m: usize,
    /// fitted decay of |C(τ)|, times two (1/s)
    pub fitted: f64,
    /// γ_eff^{nm} of the reduced model (1/s)
    pub predicted: f64,
}

/// Fits the decay of C(τ) = Tr[|n⟩⟨m| e^{Lτ}(|m⟩⟨n|ρ_ss)] and compares with
/// the rate-model linewidth.
pub fn correlator_decay(cfg: &OracleConfig, state: &OracleState, n: usize, m: usize, steps: usize) -> Result<CorrelatorFit> {
    let spec = &state.spectrum;
    if n >= spec.levels() || m >= spec.levels() || n == m {
        return Err(Error::Invalid(format!("bad transition ({n}, {m})")));
    }
    if steps < 3 {
        return Err(Error::Invalid("need at least 3 time steps".into()));
    }
    let rates = drive_rates(spec, &cfg.drive) + thermal_rates(spec, &cfg.bath);
    let out = out_rates(&rates);
    let predicted = out[n] + out[m];
    let dt = 0.2 / out.iter().copied().fold(0.0, f64::max);
    let step = (&state.liouvillian * C::new(dt, 0.0)).exp();
    let d = cfg.n_mech * cfg.n_phot;
    let pmn = cfg.transition(spec, m, n);
    let pnm = cfg.transition(spec, n, m);
    let start = &pmn * &state.rho;
    let mut v = DVector::from_row_slice(&start.transpose().as_slice().to_vec());
    let mut ts = Vec::with_capacity(steps);
    let mut ys = Vec::with_capacity(steps);
    for k in 0..steps {
        let cur = DMatrix::from_row_slice(d, d, v.as_slice());
        let c = (&pnm * cur).trace().norm();
        if !(c > 0.0) {
            return Err(Error::Numerical(format!("correlator vanished at step {k}")));
        }
        ts.push(k as f64 * dt);
        ys.push(c.ln());
        v = &step * v;
    }
    let nf = steps as f64;
    let mt = ts.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxy: f64 = ts.iter().zip(&ys).map(|(t, y)| (t - mt) * (y - my)).sum();
    let sxx: f64 = ts.iter().map(|t| (t - mt).powi(2)).sum();
    Ok(CorrelatorFit { n, m, fitted: -2.0 * sxy / sxx, predicted })
}
