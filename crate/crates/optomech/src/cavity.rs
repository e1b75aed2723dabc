//! TE₀,₁ waveguide model of the cavity rim, evanescent coupling and the
//! linearized per-drive optomechanical couplings.

use crate::error::{Error, Result};
use crate::special::{j0, j0_eq_j2_first_root, j1, j1_first_zero, j2, solve_bracketed};
use crate::units::{C_LIGHT, EPS0, HBAR};
use nalgebra::Complex;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Ratio between the default rim radius convention and the one of the earlier
/// reference treatment.
pub const AC_CONVENTION_RATIO: f64 = 1.44;
/// Minimum (n_c k a_c / x₁,₁)² accepted as "well above cutoff".
const ABOVE_CUTOFF_MIN: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AcConvention {
    /// radius used as given
    #[default]
    Paper,
    /// radius given in the reference convention, scaled by 1.44
    Reference,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CavityGeometry {
    /// λ_c (m)
    pub wavelength: f64,
    /// n_c
    pub index: f64,
    /// a_c (m)
    pub radius: f64,
    /// L_c (m)
    pub circumference: f64,
    /// chip-to-rim distance d (m)
    pub gap: f64,
    /// intrinsic finesse F_c
    pub finesse: f64,
    /// κ_ex/κ
    pub external_fraction: f64,
    #[serde(default)]
    pub convention: AcConvention,
}

impl CavityGeometry {
    /// a_c after applying the convention toggle.
    pub fn model_radius(&self) -> f64 {
        match self.convention {
            AcConvention::Paper => self.radius,
            AcConvention::Reference => self.radius * AC_CONVENTION_RATIO,
        }
    }

    pub fn wavenumber(&self) -> f64 {
        2.0 * PI / self.wavelength
    }

    /// ω_c = 2πc/λ_c (rad/s)
    pub fn omega(&self) -> f64 {
        C_LIGHT * self.wavenumber()
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("wavelength", self.wavelength),
            ("radius", self.radius),
            ("circumference", self.circumference),
            ("gap", self.gap),
            ("finesse", self.finesse),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Invalid(format!("cavity {name} must be positive, got {v}")));
            }
        }
        if !(self.index > 1.0) {
            return Err(Error::Invalid(format!("refractive index must exceed 1, got {}", self.index)));
        }
        if !(self.external_fraction > 0.0 && self.external_fraction <= 1.0) {
            return Err(Error::Invalid(format!(
                "external coupling fraction must lie in (0, 1], got {}",
                self.external_fraction
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FieldStructure {
    /// k = 2π/λ_c (1/m)
    pub k: f64,
    /// k_∥ ≈ n_c k
    pub k_par: f64,
    /// κ⊥ ≈ √(n_c² − 1) k
    pub kappa_perp: f64,
    /// internal transverse wavevector, a_c γ_t ≈ x₁,₁
    pub gamma_t: f64,
    /// ξ̃ = J₀(x₁,₁)
    pub xi_tilde: f64,
    /// ξ from the closed form
    pub xi: f64,
    /// ξ from its definition γ_t|ξ̃|/(κ⊥ J₁(x_*))
    pub xi_definition: f64,
    /// V_c ≈ 0.5π a_c² L_c (m³)
    pub mode_volume: f64,
    pub x11: f64,
    pub x_star: f64,
    /// a_c actually used (m)
    pub radius: f64,
    /// (n_c k a_c / x₁,₁)²
    pub cutoff_ratio: f64,
}

pub fn field_structure(geom: &CavityGeometry) -> Result<FieldStructure> {
    geom.validate()?;
    let a = geom.model_radius();
    let n = geom.index;
    let k = geom.wavenumber();
    let x11 = j1_first_zero();
    let x_star = j0_eq_j2_first_root();
    let cutoff_ratio = (n * k * a / x11).powi(2);
    if cutoff_ratio < ABOVE_CUTOFF_MIN {
        return Err(Error::Domain(format!(
            "(n_c k a_c / x11)^2 = {cutoff_ratio:.2} is not well above cutoff (need >= {ABOVE_CUTOFF_MIN})"
        )));
    }
    let kappa_perp = (n * n - 1.0).sqrt() * k;
    let gamma_t = x11 / a;
    if !(kappa_perp > gamma_t) {
        return Err(Error::Domain(format!(
            "kappa_perp = {kappa_perp:e} must exceed gamma_t = {gamma_t:e}"
        )));
    }
    let xi_tilde = j0(x11);
    let xi = geom.wavelength * x11 * xi_tilde.abs() / (2.0 * PI * a * (n * n - 1.0).sqrt() * j1(x_star));
    let xi_definition = gamma_t * xi_tilde.abs() / (kappa_perp * j1(x_star));
    Ok(FieldStructure {
        k,
        k_par: n * k,
        kappa_perp,
        gamma_t,
        xi_tilde,
        xi,
        xi_definition,
        mode_volume: 0.5 * PI * a * a * geom.circumference,
        x11,
        x_star,
        radius: a,
        cutoff_ratio,
    })
}

impl FieldStructure {
    /// J₂(x₁,₁)
    pub fn j2_x11(&self) -> f64 {
        j2(self.x11)
    }

    /// J₁(x_*)
    pub fn j1_xstar(&self) -> f64 {
        j1(self.x_star)
    }
}

/// Evanescent mode amplitude u_φ(r) for r > a_c (m^{-3/2}).
pub fn evanescent_amplitude(fs: &FieldStructure, index: f64, r: f64) -> Result<f64> {
    if !(r > fs.radius) {
        return Err(Error::Domain(format!(
            "r = {r:e} m is inside the rim (a_c = {:e} m); the internal field is not modelled here",
            fs.radius
        )));
    }
    Ok(-fs.xi / (index * fs.mode_volume.sqrt()) * (fs.radius / r).sqrt() * (-fs.kappa_perp * (r - fs.radius)).exp())
}

/// C_corr(θ', φ) for an offset distance d + a_c expressed through
/// K = κ⊥(d + a_c).
pub fn correction_factor(kd: f64, theta: f64, phi: f64) -> Result<f64> {
    if !(phi.abs() < 0.5 * PI) {
        return Err(Error::Domain(format!("|phi| = {} must be below pi/2", phi.abs())));
    }
    let sec = 1.0 / phi.cos();
    Ok((-2.0 * kd * (sec - 1.0)).exp() * theta.sin().powi(2) * theta.cos() * phi.cos().powi(2) * phi.sin())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Placement {
    /// θ'_* with sin²θ'_* = 2/3
    pub theta: f64,
    /// φ_* from the exact stationarity condition
    pub phi: f64,
    /// C_corr at (θ'_*, φ_*)
    pub c_corr: f64,
    /// leading-order φ_* ≈ 1/√(2κ⊥(d + a_c))
    pub phi_leading: f64,
    /// 0.17/√(κ⊥(d + a_c))
    pub c_corr_leading: f64,
}

/// Optimal placement angles for K = κ⊥(d + a_c).
pub fn optimize_placement(kd: f64) -> Result<Placement> {
    if !(kd > 0.0) {
        return Err(Error::Invalid(format!("kappa_perp (d + a_c) must be positive, got {kd}")));
    }
    let theta = (2.0f64 / 3.0).sqrt().asin();
    // d/dφ ln C = −2K sec φ tan φ − 2 tan φ + cot φ
    let g = |p: f64| -2.0 * kd * p.tan() / p.cos() - 2.0 * p.tan() + 1.0 / p.tan();
    let dg = |p: f64| {
        let (s, t) = (1.0 / p.cos(), p.tan());
        -2.0 * kd * (s * t * t + s.powi(3)) - 2.0 * s * s - 1.0 / p.sin().powi(2)
    };
    let phi = solve_bracketed(g, dg, 1e-9, 0.5 * PI - 1e-9, 1e-14)?;
    Ok(Placement {
        theta,
        phi,
        c_corr: correction_factor(kd, theta, phi)?,
        phi_leading: 1.0 / (2.0 * kd).sqrt(),
        c_corr_leading: 0.17 / kd.sqrt(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Coupling {
    /// G₀ as the formula yields it (rad s⁻¹ m⁻¹)
    pub g0_angular: f64,
    /// G₀ / 2π (Hz/m)
    pub g0_hz_per_m: f64,
    pub c_corr: f64,
}

/// G₀ ≈ (ω_c α_∥ κ⊥ L ξ² / n_c² ε₀ V_c) e^{−2κ⊥d} C_corr
pub fn coupling_g0(geom: &CavityGeometry, fs: &FieldStructure, alpha_par: f64, length: f64, c_corr: f64) -> Coupling {
    let g0 = geom.omega() * alpha_par * fs.kappa_perp * length * fs.xi.powi(2)
        / (geom.index.powi(2) * EPS0 * fs.mode_volume)
        * (-2.0 * fs.kappa_perp * geom.gap).exp()
        * c_corr;
    Coupling { g0_angular: g0, g0_hz_per_m: g0 / (2.0 * PI), c_corr }
}

/// κ⊥(d + a_c)
pub fn offset_parameter(geom: &CavityGeometry, fs: &FieldStructure) -> f64 {
    fs.kappa_perp * (geom.gap + fs.radius)
}

/// Coupling at the optimal placement.
pub fn optimal_coupling(geom: &CavityGeometry, alpha_par: f64, length: f64) -> Result<(FieldStructure, Placement, Coupling)> {
    let fs = field_structure(geom)?;
    let placement = optimize_placement(offset_parameter(geom, &fs))?;
    let c = coupling_g0(geom, &fs, alpha_par, length, placement.c_corr);
    Ok((fs, placement, c))
}

/// G₀ under alternative readings of the ingredients, for attributing a
/// residual against a quoted value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sensitivity {
    pub label: String,
    /// rad s⁻¹ m⁻¹
    pub g0_angular: f64,
}

/// Mode volume variant quoted as L_c × 6 µm².
const QUOTED_SECTION: f64 = 6e-12;

pub fn g0_sensitivity(geom: &CavityGeometry, alpha_par: f64, length: f64) -> Result<Vec<Sensitivity>> {
    let (fs, placement, base) = optimal_coupling(geom, alpha_par, length)?;
    let mut out = vec![
        Sensitivity { label: "angular value (rad/s per m)".into(), g0_angular: base.g0_angular },
        Sensitivity { label: "ordinary value (Hz/m), times 2pi".into(), g0_angular: base.g0_hz_per_m },
    ];
    let mut quoted_v = fs;
    quoted_v.mode_volume = geom.circumference * QUOTED_SECTION;
    out.push(Sensitivity {
        label: "V_c = L_c x 6 um^2".into(),
        g0_angular: coupling_g0(geom, &quoted_v, alpha_par, length, placement.c_corr).g0_angular,
    });
    out.push(Sensitivity {
        label: "C_corr = 0.17/sqrt(K)".into(),
        g0_angular: coupling_g0(geom, &fs, alpha_par, length, placement.c_corr_leading).g0_angular,
    });
    let shape = crate::beam::ModeShape::new(1)?;
    let avg = crate::quad::unit_interval(|s| shape.value(s));
    out.push(Sensitivity {
        label: format!("mode-shape average {avg:.3} over the tube"),
        g0_angular: base.g0_angular * avg,
    });
    let mut other = *geom;
    other.convention = match geom.convention {
        AcConvention::Paper => AcConvention::Reference,
        AcConvention::Reference => AcConvention::Paper,
    };
    if let Ok((_, _, c)) = optimal_coupling(&other, alpha_par, length) {
        out.push(Sensitivity { label: format!("a_c convention {:?}", other.convention), g0_angular: c.g0_angular });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaserInput {
    /// input power P (W)
    pub power: f64,
    /// ω_L (rad/s)
    pub omega_laser: f64,
    /// Δ = ω_L − ω_c (rad/s)
    pub detuning: f64,
    /// κ (rad/s)
    pub kappa: f64,
    /// κ_ex (rad/s)
    pub kappa_ex: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearizedDrive {
    /// Ω (rad/s)
    pub rabi: f64,
    pub alpha: Complex<f64>,
    /// g_m = 2αG₀x_ZPM (rad/s)
    pub coupling: Complex<f64>,
    /// |α|², the mean intracavity photon number
    pub photons: f64,
}

/// α = Ω/(2Δ + iκ) and g_m = 2αG₀x_ZPM, with Ω/2 = √(Pκ_ex/ℏω_L).
pub fn linearize_drives(g0_angular: f64, x_zpm: f64, drives: &[LaserInput]) -> Result<Vec<LinearizedDrive>> {
    drives
        .iter()
        .map(|d| {
            if !(d.kappa > 0.0) {
                return Err(Error::Invalid(format!("cavity linewidth must be positive, got {}", d.kappa)));
            }
            if d.power < 0.0 || d.kappa_ex < 0.0 || !(d.omega_laser > 0.0) {
                return Err(Error::Invalid("need P >= 0, kappa_ex >= 0, omega_L > 0".into()));
            }
            let rabi = 2.0 * (d.power * d.kappa_ex / (HBAR * d.omega_laser)).sqrt();
            let alpha = Complex::new(rabi, 0.0) / Complex::new(2.0 * d.detuning, d.kappa);
            Ok(LinearizedDrive {
                rabi,
                alpha,
                coupling: alpha * (2.0 * g0_angular * x_zpm),
                photons: alpha.norm_sqr(),
            })
        })
        .collect()
}

/// Input power that yields |g_m| = `coupling` (rad/s) for one drive.
pub fn power_for_coupling(coupling: f64, g0_angular: f64, x_zpm: f64, detuning: f64, kappa: f64, kappa_ex: f64, omega_laser: f64) -> f64 {
    let alpha = coupling / (2.0 * g0_angular * x_zpm);
    let rabi = alpha * (4.0 * detuning * detuning + kappa * kappa).sqrt();
    (rabi / 2.0).powi(2) * HBAR * omega_laser / kappa_ex
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geom() -> CavityGeometry {
        CavityGeometry {
            wavelength: 1.1e-6,
            index: 1.44,
            radius: 2.0e-6,
            circumference: 1e-3,
            gap: 50e-9,
            finesse: 3e6,
            external_fraction: 0.1,
            convention: AcConvention::Paper,
        }
    }

    #[test]
    fn below_cutoff_rejected() {
        let mut g = geom();
        g.radius = 0.3e-6;
        assert!(matches!(field_structure(&g), Err(Error::Domain(_))));
    }

    #[test]
    fn inside_rim_rejected() {
        let fs = field_structure(&geom()).unwrap();
        assert!(evanescent_amplitude(&fs, 1.44, 1.9e-6).is_err());
    }

    #[test]
    fn phi_domain() {
        assert!(correction_factor(10.0, 1.0, 1.6).is_err());
    }

    #[test]
    fn zero_power_zero_coupling() {
        let d = LaserInput { power: 0.0, omega_laser: 1e15, detuning: 1e6, kappa: 1e5, kappa_ex: 1e4 };
        let out = linearize_drives(1e10, 1e-11, &[d]).unwrap();
        assert_eq!(out[0].coupling.norm(), 0.0);
    }

    #[test]
    fn power_inverse() {
        let d = LaserInput { power: 1e-6, omega_laser: 1.7e15, detuning: 3e7, kappa: 3e5, kappa_ex: 3e4 };
        let g = linearize_drives(2e10, 4e-11, &[d]).unwrap()[0].coupling.norm();
        let p = power_for_coupling(g, 2e10, 4e-11, d.detuning, d.kappa, d.kappa_ex, d.omega_laser);
        assert!((p - 1e-6).abs() < 1e-15);
    }
}
