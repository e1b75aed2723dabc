//! Electrode-induced cavity loss channels expressed as finesse bounds.

use crate::cavity::{CavityGeometry, FieldStructure};
use crate::error::{Error, Result};
use crate::quad;
use crate::special::{j1, j2};
use crate::units::{ALPHA_FINE, C_LIGHT, EPS0};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Largest misalignment angle accepted (rad).
pub const MAX_ANGLE: f64 = 0.3;
/// Upper limit on kR' for the thin-electrode expansion.
const MAX_KR: f64 = 0.1;
/// d/a_c above which d ≪ a_c is considered violated.
const MAX_GAP_RATIO: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Qualifier {
    LowerBound,
    OrderEstimate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElectrodeLossConfig {
    /// R' (m)
    pub radius: f64,
    /// θ (rad)
    pub angle: f64,
    /// gap D between electrode tips (m)
    pub gap: f64,
    /// σ̃ = σ/σ_max with σ_max = 8e²/h
    pub conductivity: f64,
}

impl ElectrodeLossConfig {
    pub fn validate(&self, geom: &CavityGeometry) -> Result<()> {
        if !(self.radius > 0.0) {
            return Err(Error::Invalid(format!("electrode radius must be positive, got {}", self.radius)));
        }
        let kr = geom.wavenumber() * self.radius;
        if kr >= MAX_KR {
            return Err(Error::Domain(format!("k R' = {kr:.3} is not small (need < {MAX_KR})")));
        }
        if !(self.angle.abs() < MAX_ANGLE) {
            return Err(Error::Domain(format!(
                "misalignment |theta| = {:.3} rad exceeds the small-angle guard {MAX_ANGLE}",
                self.angle.abs()
            )));
        }
        if !(self.gap > 0.0) {
            return Err(Error::Invalid(format!("electrode gap must be positive, got {}", self.gap)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChannelFinesse {
    pub value: f64,
    pub qualifier: Qualifier,
    /// alternative evaluation kept for comparison
    pub diagnostic: f64,
}

/// G ≈ 1/(2|ln 2kR'|)
pub fn g_integral_estimate(k: f64, radius: f64) -> f64 {
    1.0 / (2.0 * (2.0 * k * radius).ln().abs())
}

/// G = 2∫₀ᵏ k dk' / ((k² − k'²) ln²[(k² − k'²)R'²]) by quadrature.
pub fn g_integral_numeric(k: f64, radius: f64) -> f64 {
    // k' = k(1 − e^{−y}) removes the endpoint singularity; the tail beyond
    // y = Y is integrated in closed form with 2 − e^{−y} ≈ 2
    let l0 = (k * k * radius * radius).ln();
    let f = |y: f64| {
        let e = (-y).exp();
        let t = l0 + (2.0 - e).ln() - y;
        1.0 / ((2.0 - e) * t * t)
    };
    let tail_start = 60.0;
    let body = quad::adaptive(&f, 0.0, tail_start, 64, 1e-13).value;
    let tail = 0.5 / (tail_start - l0 - 2f64.ln());
    2.0 * (body + tail)
}

/// J ≈ (κ⊥(d + a_c)/π)^{−1/2}
pub fn j_integral_estimate(kd: f64) -> f64 {
    (kd / PI).powf(-0.5)
}

/// ∫ e^{−2K(√(1+x²)−1)}/(1+x²)^{3/2} dx over the real line, by quadrature.
pub fn j_integral_numeric(kd: f64) -> f64 {
    // x = tan t maps the line onto (−π/2, π/2); the integrand becomes
    // cos t · e^{−2K(sec t − 1)}
    let f = |t: f64| {
        let c = t.cos();
        if c <= 0.0 {
            return 0.0;
        }
        c * (-2.0 * kd * (1.0 / c - 1.0)).exp()
    };
    2.0 * quad::adaptive(&f, 0.0, 0.5 * PI, 16, 1e-12).value
}

/// Lower bound on F_s; the diagnostic is the bound before the
/// d ≪ a_c, a_c > λ_c simplifications.
pub fn scattering_finesse(geom: &CavityGeometry, fs: &FieldStructure, cfg: &ElectrodeLossConfig) -> Result<ChannelFinesse> {
    cfg.validate(geom)?;
    let n = geom.index;
    let theta = cfg.angle.abs();
    let limit = ((n - 1.0) / (n + 1.0)).sqrt();
    if !(theta > 0.0 && theta < limit) {
        return Err(Error::Domain(format!(
            "scattering bound needs 0 < |theta| < sqrt((n-1)/(n+1)) = {limit:.4}, got {theta:.4}"
        )));
    }
    let a = fs.radius;
    if geom.gap / a > MAX_GAP_RATIO {
        return Err(Error::Domain(format!("scattering bound needs d << a_c, got d/a_c = {:.3}", geom.gap / a)));
    }
    if !(a > geom.wavelength) {
        return Err(Error::Domain(format!(
            "scattering bound needs a_c > lambda_c, got {a:e} <= {:e}",
            geom.wavelength
        )));
    }
    let root = (n * n - 1.0).sqrt();
    let value = 16.0 * n * root.powi(3) * (geom.wavelength / (4.0 * PI * cfg.radius)).ln() * (4.0 * PI * (n - 1.0) / theta).exp();
    let k = fs.k;
    let inv = (-2.0 * k * (geom.gap * root + (geom.gap + a) * (n - 1.0) / theta)).exp()
        / (n * (k * a * root).powi(3) * (2.0 * k * cfg.radius).ln().abs());
    Ok(ChannelFinesse { value, qualifier: Qualifier::LowerBound, diagnostic: 1.0 / inv })
}

/// Gap-scattering estimate from the induced-dipole power P_g/(2πP_c).
/// The diagnostic holds the closed form with ξ² in the denominator.
pub fn gap_finesse(geom: &CavityGeometry, fs: &FieldStructure, cfg: &ElectrodeLossConfig) -> Result<ChannelFinesse> {
    cfg.validate(geom)?;
    if !(cfg.gap > 2.0 * cfg.radius) {
        return Err(Error::Domain(format!(
            "gap model needs D > 2R', got D = {:e}, R' = {:e}",
            cfg.gap, cfg.radius
        )));
    }
    let n = geom.index;
    let a = fs.radius;
    let growth = (2.0 * fs.kappa_perp * geom.gap).exp();
    let cos2 = 1.0 / 3.0;
    let value = 48.0 * PI * j2(fs.x11).powi(2) * n * a * a
        / (fs.k.powi(4) * cfg.gap.powi(6) * fs.xi.powi(2) * j1(fs.x_star).powi(2) * cos2)
        * growth;
    let displayed =
        0.8 * n * a.powi(4) * geom.wavelength.powi(2) / (cfg.gap.powi(6) * fs.xi.powi(2)) * (n * n - 1.0) * growth;
    Ok(ChannelFinesse { value, qualifier: Qualifier::OrderEstimate, diagnostic: displayed })
}

/// Absorption estimate for conducting-shell electrodes with σ = σ̃·8e²/h.
/// The diagnostic holds the closed form without the x₁,₁² factor.
pub fn absorption_finesse(geom: &CavityGeometry, fs: &FieldStructure, cfg: &ElectrodeLossConfig) -> Result<ChannelFinesse> {
    cfg.validate(geom)?;
    if !(cfg.conductivity > 0.0 && cfg.conductivity <= 1.0) {
        return Err(Error::Invalid(format!("conductivity fraction must lie in (0, 1], got {}", cfg.conductivity)));
    }
    let theta = cfg.angle.abs();
    if !(theta > 0.0) {
        return Err(Error::Domain("absorption estimate needs theta > 0".into()));
    }
    let n = geom.index;
    let a = fs.radius;
    let ka = fs.kappa_perp * a;
    let sigma = 16.0 * cfg.conductivity * EPS0 * C_LIGHT * ALPHA_FINE;
    let inv = sigma * cfg.radius * fs.xi.powi(2) / (PI * n * C_LIGHT * EPS0 * a)
        * (PI / ka).sqrt()
        * (-2.0 * fs.kappa_perp * geom.gap).exp()
        * theta.sin()
        * (j1(fs.x_star) / j2(fs.x11)).powi(2);
    let displayed = PI.sqrt() * n * a / (16.0 * ALPHA_FINE * cfg.conductivity * cfg.radius * theta.sin())
        * ka.powf(2.5)
        * (2.0 * fs.kappa_perp * geom.gap).exp();
    Ok(ChannelFinesse { value: 1.0 / inv, qualifier: Qualifier::OrderEstimate, diagnostic: displayed })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FinesseBudget {
    pub scattering: f64,
    pub gap: f64,
    pub absorption: f64,
    pub intrinsic: f64,
    pub combined: f64,
    /// κ = Δω/F (rad/s)
    pub kappa: f64,
    /// Δω = 2πc/(n_c L_c) (rad/s)
    pub free_spectral_range: f64,
}

/// 1/F = Σ 1/F_i
pub fn combine_finesse(channels: &[f64]) -> Result<f64> {
    if channels.is_empty() {
        return Err(Error::Invalid("no loss channels given".into()));
    }
    let mut inv = 0.0;
    for &f in channels {
        if !(f > 0.0) {
            return Err(Error::Invalid(format!("channel finesse must be positive, got {f}")));
        }
        inv += 1.0 / f;
    }
    Ok(1.0 / inv)
}

pub fn combine(geom: &CavityGeometry, scattering: f64, gap: f64, absorption: f64) -> Result<FinesseBudget> {
    let combined = combine_finesse(&[scattering, gap, absorption, geom.finesse])?;
    let fsr = 2.0 * PI * C_LIGHT / (geom.index * geom.circumference);
    Ok(FinesseBudget {
        scattering,
        gap,
        absorption,
        intrinsic: geom.finesse,
        combined,
        kappa: fsr / combined,
        free_spectral_range: fsr,
    })
}
