//! Tip-electrode fields acting on the polarizable beam: mode forces,
//! curvature coefficients, softening and electrical-noise estimates.

use crate::beam::{BeamSpec, DuffingParams, ModeShape};
use crate::error::{Error, Result};
use crate::quad;
use crate::units::{COULOMB_K, HBAR, KB};
use nalgebra::{Complex, DMatrix};
use serde::Serialize;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PointCharge {
    /// C
    pub q: f64,
    /// position along the beam axis (m)
    pub x: f64,
    /// position along the deflection direction (m)
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ElectrodeConfig {
    pub charges: Vec<PointCharge>,
    /// electrode gap D (m)
    pub gap: f64,
    /// α_∥ (F·m)
    pub alpha_par: f64,
    /// α_⊥ (F·m)
    pub alpha_perp: f64,
    /// (E_∥, E_⊥) at the tube when the charges were fitted to fields (V/m)
    pub direct_field: Option<(f64, f64)>,
}

/// Field components and their first two y-derivatives at one point.
#[derive(Debug, Clone, Copy, Default)]
struct FieldJet {
    ex: f64,
    ey: f64,
    ex_y: f64,
    ey_y: f64,
    ex_yy: f64,
    ey_yy: f64,
}

impl ElectrodeConfig {
    /// Charges q, q' at (L/2, +D/2) and (L/2, −D/2).
    pub fn symmetric_tips(
        q: f64,
        q_prime: f64,
        gap: f64,
        length: f64,
        alpha_par: f64,
        alpha_perp: f64,
    ) -> Result<Self> {
        let cfg = ElectrodeConfig {
            charges: vec![
                PointCharge { q, x: 0.5 * length, y: 0.5 * gap },
                PointCharge { q: q_prime, x: 0.5 * length, y: -0.5 * gap },
            ],
            gap,
            alpha_par,
            alpha_perp,
            direct_field: None,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Fits q, q' so that the largest axial field along the tube equals E_∥
    /// and the transverse field at the tube centre equals E_⊥.
    pub fn from_direct_field(
        e_par: f64,
        e_perp: f64,
        gap: f64,
        length: f64,
        alpha_par: f64,
        alpha_perp: f64,
    ) -> Result<Self> {
        if !(gap > 0.0) {
            return Err(Error::Invalid(format!("electrode gap must be positive, got {gap}")));
        }
        let h = 0.5 * gap;
        // max_u u/(u²+h²)^{3/2} = 2/(3√3 h²), reached at u = h/√2
        let sum = e_par * h * h * 3.0 * 3f64.sqrt() / 2.0 / COULOMB_K;
        let diff = e_perp * h * h / COULOMB_K;
        let q = 0.5 * (sum - diff);
        let q_prime = 0.5 * (sum + diff);
        let mut cfg = Self::symmetric_tips(q, q_prime, gap, length, alpha_par, alpha_perp)?;
        cfg.direct_field = Some((e_par, e_perp));
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gap > 0.0) {
            return Err(Error::Invalid(format!("electrode gap must be positive, got {}", self.gap)));
        }
        if !(self.alpha_par >= 0.0 && self.alpha_perp >= 0.0) {
            return Err(Error::Invalid("polarizabilities must be non-negative".into()));
        }
        for c in &self.charges {
            if c.y == 0.0 {
                return Err(Error::Domain(format!("charge at x = {} lies on the beam axis", c.x)));
            }
        }
        Ok(())
    }

    fn jet(&self, x: f64, y: f64) -> Result<FieldJet> {
        let mut j = FieldJet::default();
        for c in &self.charges {
            let (u, v) = (x - c.x, y - c.y);
            let r2 = u * u + v * v;
            if r2 == 0.0 {
                return Err(Error::Domain(format!("field evaluated at the charge location ({x}, {y})")));
            }
            let kq = COULOMB_K * c.q;
            let r = r2.sqrt();
            let r3 = r2 * r;
            let r5 = r3 * r2;
            let r7 = r5 * r2;
            j.ex += kq * u / r3;
            j.ey += kq * v / r3;
            j.ex_y += -3.0 * kq * u * v / r5;
            j.ey_y += kq * (1.0 / r3 - 3.0 * v * v / r5);
            j.ex_yy += kq * (-3.0 * u / r5 + 15.0 * u * v * v / r7);
            j.ey_yy += kq * (-9.0 * v / r5 + 15.0 * v.powi(3) / r7);
        }
        Ok(j)
    }

    /// (E_∥, E_⊥) at (x, y) in V/m.
    pub fn field(&self, x: f64, y: f64) -> Result<(f64, f64)> {
        let j = self.jet(x, y)?;
        Ok((j.ex, j.ey))
    }

    /// ∂_y W and ∂²_y W at (x, y), from the analytic field derivatives.
    pub fn energy_derivatives(&self, x: f64, y: f64) -> Result<(f64, f64)> {
        let j = self.jet(x, y)?;
        let (ap, at) = (self.alpha_par, self.alpha_perp);
        let d1 = -(ap * j.ex * j.ex_y + at * j.ey * j.ey_y);
        let d2 = -(ap * (j.ex_y.powi(2) + j.ex * j.ex_yy) + at * (j.ey_y.powi(2) + j.ey * j.ey_yy));
        Ok((d1, d2))
    }
}

/// W(x, y) = −½(α_∥E_∥² + α_⊥E_⊥²) in J/m.
pub fn dielectric_energy_density(cfg: &ElectrodeConfig, x: f64, y: f64) -> Result<f64> {
    let (ep, et) = cfg.field(x, y)?;
    Ok(-0.5 * (cfg.alpha_par * ep * ep + cfg.alpha_perp * et * et))
}

#[derive(Debug, Clone)]
pub struct ModeCoefficients {
    /// F_n (N), 0-based over modes 1..=n_max
    pub forces: Vec<f64>,
    /// W_lk (N/m)
    pub curvature: DMatrix<f64>,
}

impl ModeCoefficients {
    /// W₀₀, the fundamental-mode curvature.
    pub fn w00(&self) -> f64 {
        self.curvature[(0, 0)]
    }
}

/// Breakpoints in s where charges sit over the beam, to keep panels aligned
/// with the field peaks.
fn breakpoints(cfg: &ElectrodeConfig, length: f64) -> Vec<f64> {
    let mut pts = vec![0.0, 1.0];
    for c in &cfg.charges {
        let s = c.x / length;
        if s > 0.0 && s < 1.0 {
            pts.push(s);
        }
    }
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    pts
}

fn integrate_pieces<F: Fn(f64) -> f64>(f: F, pts: &[f64]) -> f64 {
    pts.windows(2)
        .map(|w| quad::adaptive(&f, w[0], w[1], 8, 1e-12).value)
        .sum()
}

/// F_n = ∫∂_yW φ_n dx and W_lk = ∫∂²_yW φ_l φ_k dx over modes 1..=n_max.
pub fn mode_coefficients(cfg: &ElectrodeConfig, beam: &BeamSpec, n_max: usize) -> Result<ModeCoefficients> {
    cfg.validate()?;
    beam.validate()?;
    let shapes = (1..=n_max).map(ModeShape::new).collect::<Result<Vec<_>>>()?;
    let l = beam.length;
    // probe once so singular configurations surface as errors
    cfg.energy_derivatives(0.5 * l, 0.0)?;
    let deriv = |s: f64| cfg.energy_derivatives(s * l, 0.0).unwrap_or((0.0, 0.0));
    let pts = breakpoints(cfg, l);
    let forces = shapes
        .iter()
        .map(|sh| l * integrate_pieces(|s| deriv(s).0 * sh.value(s), &pts))
        .collect();
    let mut curvature = DMatrix::zeros(n_max, n_max);
    for a in 0..n_max {
        for b in a..n_max {
            let (p, q) = (shapes[a], shapes[b]);
            let v = l * integrate_pieces(|s| deriv(s).1 * p.value(s) * q.value(s), &pts);
            curvature[(a, b)] = v;
            curvature[(b, a)] = v;
        }
    }
    Ok(ModeCoefficients { forces, curvature })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TunedMode {
    /// ω_m (rad/s)
    pub omega: f64,
    /// ζ = ω_m,0 / ω_m
    pub zeta: f64,
    /// λ = ζ²λ₀ (rad/s)
    pub lambda: f64,
    /// λ' = 6λ (rad/s)
    pub lambda_rwa: f64,
    /// ω_m' = ω_m + 2λ' (rad/s), as stated with the RWA Hamiltonian
    pub omega_rwa: f64,
    /// F₀ˢ (N)
    pub static_force: f64,
    /// W₀₀ˢ (N/m)
    pub curvature: f64,
    /// x_ZPM at the softened frequency (m)
    pub x_zpm: f64,
    pub effective_mass: f64,
}

/// Softened fundamental mode for a static curvature W₀₀ ≤ 0.
pub fn soften(duffing: &DuffingParams, w00: f64) -> Result<TunedMode> {
    if w00 > 0.0 {
        return Err(Error::Invalid(format!("W00 = {w00:e} N/m stiffens the mode; softening needs W00 <= 0")));
    }
    let shift = w00.abs() / duffing.effective_mass;
    let w0sq = duffing.omega0.powi(2);
    if shift >= w0sq {
        return Err(Error::Instability(format!(
            "|W00|/m* = {shift:e} s^-2 reaches omega0^2 = {w0sq:e} s^-2 (buckling threshold)"
        )));
    }
    let omega = (w0sq - shift).sqrt();
    let zeta = duffing.omega0 / omega;
    let lambda = zeta * zeta * duffing.lambda0;
    let lambda_rwa = 6.0 * lambda;
    Ok(TunedMode {
        omega,
        zeta,
        lambda,
        lambda_rwa,
        omega_rwa: omega + 2.0 * lambda_rwa,
        static_force: 0.0,
        curvature: w00,
        x_zpm: duffing.x_zpm * zeta.sqrt(),
        effective_mass: duffing.effective_mass,
    })
}

/// Curvature needed to soften the fundamental mode to `omega` (rad/s).
pub fn curvature_for_frequency(duffing: &DuffingParams, omega: f64) -> Result<f64> {
    if !(omega > 0.0 && omega <= duffing.omega0) {
        return Err(Error::Invalid(format!(
            "target frequency must lie in (0, omega0 = {:e}] rad/s, got {omega:e}",
            duffing.omega0
        )));
    }
    Ok(-duffing.effective_mass * (duffing.omega0.powi(2) - omega.powi(2)))
}

/// Static electrode force cancelling the mean radiation force,
/// F₀ˢ = −ℏ Σ_i 2πG₀,ᵢ |α_i|², with G₀ given as ordinary-frequency pulls (Hz/m).
pub fn compensation_force(g0_hz_per_m: &[f64], alpha: &[Complex<f64>]) -> Result<f64> {
    if g0_hz_per_m.len() != alpha.len() {
        return Err(Error::Invalid(format!(
            "{} coupling rates for {} cavity amplitudes",
            g0_hz_per_m.len(),
            alpha.len()
        )));
    }
    Ok(-HBAR * g0_hz_per_m.iter().zip(alpha).map(|(g, a)| 2.0 * PI * g * a.norm_sqr()).sum::<f64>())
}

/// Where the fluctuating field acts on the beam. All noise results are
/// order-of-magnitude upper estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoiseSite {
    /// polarizability entering the gradient force (F·m)
    pub alpha: f64,
    /// static field at the beam (V/m)
    pub field: f64,
    pub x_zpm: f64,
    /// electrode–tube distance a (m)
    pub distance: f64,
}

/// Γ ~ 4 (x_ZPM²/ℏ²) α² E² S_δE
pub fn decoherence_rate(site: &NoiseSite, s_delta_e: f64) -> f64 {
    4.0 * (site.x_zpm / HBAR).powi(2) * (site.alpha * site.field).powi(2) * s_delta_e
}

/// Johnson–Nyquist estimate with S_δE ~ 4k_BT R_e / a².
pub fn johnson_decoherence(temperature: f64, resistance: f64, site: &NoiseSite) -> Result<f64> {
    if !(temperature > 0.0) || resistance < 0.0 {
        return Err(Error::Invalid("need T > 0 and R_e >= 0".into()));
    }
    Ok(decoherence_rate(site, 4.0 * KB * temperature * resistance / site.distance.powi(2)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FlickerEstimate {
    /// S_E at the target point (V² m⁻² Hz⁻¹)
    pub field_noise: f64,
    /// Γ_1/f (1/s)
    pub rate: f64,
}

/// 1/f estimate: scales S_E ∝ T/ω from the reference point to (ω_m, T).
pub fn one_over_f_decoherence(
    s_e_ref: f64,
    omega_ref: f64,
    t_ref: f64,
    omega_m: f64,
    temperature: f64,
    site: &NoiseSite,
) -> Result<FlickerEstimate> {
    if s_e_ref < 0.0 || !(omega_ref > 0.0 && t_ref > 0.0 && omega_m > 0.0 && temperature > 0.0) {
        return Err(Error::Invalid("1/f reference and target must be positive".into()));
    }
    let field_noise = s_e_ref * (temperature / t_ref) * (omega_ref / omega_m);
    Ok(FlickerEstimate { field_noise, rate: decoherence_rate(site, field_noise) })
}
