//! Doubly clamped Euler–Bernoulli beam: eigenmodes, effective masses,
//! stretching nonlinearity and the fundamental-mode Duffing parameters.

use crate::error::{Error, Result};
use crate::quad;
use crate::special::solve_bracketed;
use crate::units::HBAR;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::OnceLock;

pub const MAX_ROOTS: usize = 50;
pub const MAX_TENSOR_MODES: usize = 10;
const SCAN_POINTS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamSpec {
    /// L (m)
    pub length: f64,
    /// μ (kg/m)
    pub line_density: f64,
    /// κ̃ (m)
    pub gyration: f64,
    /// c_s (m/s)
    pub sound_speed: f64,
}

impl BeamSpec {
    pub fn new(length: f64, line_density: f64, gyration: f64, sound_speed: f64) -> Result<Self> {
        let spec = BeamSpec { length, line_density, gyration, sound_speed };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("length", self.length),
            ("line_density", self.line_density),
            ("gyration", self.gyration),
            ("sound_speed", self.sound_speed),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Invalid(format!("beam {name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// F = μ c_s² (N)
    pub fn linear_modulus(&self) -> f64 {
        self.line_density * self.sound_speed.powi(2)
    }

    /// m = μL (kg)
    pub fn mass(&self) -> f64 {
        self.line_density * self.length
    }

    /// Warning text when κ̃/L leaves the thin-rod regime.
    pub fn thin_rod_warning(&self) -> Option<String> {
        let r = self.gyration / self.length;
        (r >= 0.05).then(|| format!("gyration/length = {r:.3} is outside the thin-rod regime (< 0.05)"))
    }

    pub fn omega(&self, nu: f64) -> f64 {
        self.sound_speed * self.gyration * (nu / self.length).powi(2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CrossSection {
    Rectangular,
    Circular,
    CylindricalShell,
}

impl CrossSection {
    /// κ̃ for a thickness (rectangular) or radius (circular, shell).
    pub fn gyration(self, size: f64) -> f64 {
        match self {
            CrossSection::Rectangular => size / 12f64.sqrt(),
            CrossSection::Circular => size / 2.0,
            CrossSection::CylindricalShell => size / 2f64.sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Material {
    pub description: String,
    pub cross_section: CrossSection,
    /// Radius for round sections, thickness for rectangular ones (m).
    pub radius_m: f64,
    pub sound_speed_m_per_s: f64,
    #[serde(default)]
    pub areal_density_kg_per_m2: Option<f64>,
    #[serde(default)]
    pub line_density_kg_per_m: Option<f64>,
    pub alpha_par_4pi_eps0_a2: f64,
    pub alpha_perp_4pi_eps0_a2: f64,
}

impl Material {
    pub fn line_density(&self) -> Result<f64> {
        match (self.line_density_kg_per_m, self.areal_density_kg_per_m2, self.cross_section) {
            (Some(mu), _, _) => Ok(mu),
            (None, Some(rho), CrossSection::CylindricalShell) => Ok(2.0 * PI * self.radius_m * rho),
            _ => Err(Error::Invalid(format!(
                "material '{}' needs line_density_kg_per_m (areal density only applies to shells)",
                self.description
            ))),
        }
    }

    pub fn beam(&self, length: f64) -> Result<BeamSpec> {
        BeamSpec::new(
            length,
            self.line_density()?,
            self.cross_section.gyration(self.radius_m),
            self.sound_speed_m_per_s,
        )
    }

    /// (α_∥, α_⊥) in F·m.
    pub fn polarizabilities(&self) -> (f64, f64) {
        (
            crate::units::polarizability_from_angstrom2(self.alpha_par_4pi_eps0_a2),
            crate::units::polarizability_from_angstrom2(self.alpha_perp_4pi_eps0_a2),
        )
    }
}

/// Bundled materials table.
pub fn materials() -> &'static BTreeMap<String, Material> {
    static TABLE: OnceLock<BTreeMap<String, Material>> = OnceLock::new();
    TABLE.get_or_init(|| {
        serde_json::from_str(include_str!("../presets/materials.json"))
            .expect("bundled materials table parses")
    })
}

pub fn material(key: &str) -> Result<&'static Material> {
    materials().get(key).ok_or_else(|| {
        let known: Vec<_> = materials().keys().cloned().collect();
        Error::Invalid(format!("unknown material preset '{key}' (known: {})", known.join(", ")))
    })
}

// cos ν cosh ν = 1 rescaled by 1/cosh ν so the residual stays O(1)
fn frequency_equation(nu: f64) -> f64 {
    nu.cos() - 1.0 / nu.cosh()
}

fn frequency_equation_slope(nu: f64) -> f64 {
    -nu.sin() - nu.tanh() / nu.cosh()
}

/// |cos ν cosh ν − 1| / cosh ν
pub fn root_residual(nu: f64) -> f64 {
    frequency_equation(nu).abs()
}

/// The first `n_max` nontrivial roots of cos ν cosh ν = 1.
///
/// Root n is bracketed in (nπ, (n+1)π), where cos ν − sech ν changes sign
/// exactly once.
pub fn mode_roots(n_max: usize) -> Result<Vec<f64>> {
    if n_max == 0 || n_max > MAX_ROOTS {
        return Err(Error::Domain(format!("n_max must be in 1..={MAX_ROOTS}, got {n_max}")));
    }
    (1..=n_max)
        .map(|n| {
            let (lo, hi) = (n as f64 * PI, (n + 1) as f64 * PI);
            solve_bracketed(frequency_equation, frequency_equation_slope, lo, hi, 1e-15).map_err(|e| {
                Error::Solver(format!("mode {n}: root search on ({lo:.6}, {hi:.6}) failed: {e}"))
            })
        })
        .collect()
}

/// Roots 1..=MAX_ROOTS, computed once.
fn cached_root(n: usize) -> Result<f64> {
    static ROOTS: OnceLock<Vec<f64>> = OnceLock::new();
    if n == 0 || n > MAX_ROOTS {
        return Err(Error::Domain(format!("mode index must be in 1..={MAX_ROOTS}, got {n}")));
    }
    let roots = ROOTS.get_or_init(|| mode_roots(MAX_ROOTS).expect("roots converge"));
    Ok(roots[n - 1])
}

/// Clamped-clamped mode shape on s = x/L ∈ [0, 1], normalized to max |φ| = 1.
///
/// Sign convention: odd modes are positive at the midpoint, even modes
/// have φ''(0) > 0.
#[derive(Debug, Clone, Copy)]
pub struct ModeShape {
    pub index: usize,
    pub nu: f64,
    sigma: f64,
    // cos ν − sin ν − e^{−ν}
    c: f64,
    // 1 − e^{−2ν} − 2 sin ν e^{−ν}, so that sinh ν − sin ν = e^ν·den/2
    den: f64,
    scale: f64,
}

impl ModeShape {
    pub fn new(index: usize) -> Result<Self> {
        let nu = cached_root(index)?;
        let em = (-nu).exp();
        let den = 1.0 - em * em - 2.0 * nu.sin() * em;
        let c = nu.cos() - nu.sin() - em;
        let one_minus_sigma = c * 2.0 * em / den;
        let mut shape = ModeShape { index, nu, sigma: 1.0 - one_minus_sigma, c, den, scale: 1.0 };
        let peak = shape.raw_peak();
        let sign = if index % 2 == 1 { shape.raw(0.5).signum() } else { 1.0 };
        shape.scale = sign / peak;
        Ok(shape)
    }

    // e^{νs}/(sinh ν − sin ν)
    fn grow(&self, s: f64) -> f64 {
        2.0 * (self.nu * (s - 1.0)).exp() / self.den
    }

    fn raw(&self, s: f64) -> f64 {
        let x = self.nu * s;
        0.5 * self.c * self.grow(s) + 0.5 * (-x).exp() * (1.0 + self.sigma) - x.cos() + self.sigma * x.sin()
    }

    fn raw_d1(&self, s: f64) -> f64 {
        let x = self.nu * s;
        self.nu
            * (0.5 * self.c * self.grow(s) - 0.5 * (-x).exp() * (1.0 + self.sigma) + x.sin() + self.sigma * x.cos())
    }

    fn raw_d2(&self, s: f64) -> f64 {
        let x = self.nu * s;
        self.nu.powi(2)
            * (0.5 * self.c * self.grow(s) + 0.5 * (-x).exp() * (1.0 + self.sigma) + x.cos() - self.sigma * x.sin())
    }

    fn raw_peak(&self) -> f64 {
        let h = 1.0 / SCAN_POINTS as f64;
        let mut best = (0usize, 0.0f64);
        for k in 0..=SCAN_POINTS {
            let v = self.raw(k as f64 * h).abs();
            if v > best.1 {
                best = (k, v);
            }
        }
        // golden-section refinement around the scanned maximum
        let (mut a, mut b) = (
            (best.0 as f64 - 1.0).max(0.0) * h,
            (best.0 as f64 + 1.0).min(SCAN_POINTS as f64) * h,
        );
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let mut x1 = b - g * (b - a);
        let mut x2 = a + g * (b - a);
        let (mut f1, mut f2) = (self.raw(x1).abs(), self.raw(x2).abs());
        while b - a > 1e-13 {
            if f1 > f2 {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - g * (b - a);
                f1 = self.raw(x1).abs();
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + g * (b - a);
                f2 = self.raw(x2).abs();
            }
        }
        best.1.max(f1).max(f2)
    }

    /// φ(s) without a domain check.
    pub fn value(&self, s: f64) -> f64 {
        self.scale * self.raw(s)
    }

    /// φ(s), rejecting positions outside [0, 1].
    pub fn eval(&self, s: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::Domain(format!("position s = {s} outside [0, 1]")));
        }
        Ok(self.value(s))
    }

    /// dφ/ds
    pub fn slope(&self, s: f64) -> f64 {
        self.scale * self.raw_d1(s)
    }

    /// d²φ/ds²
    pub fn curvature(&self, s: f64) -> f64 {
        self.scale * self.raw_d2(s)
    }

    /// C_n: factor applied to the unnormalized shape
    /// cosh νs − cos νs − σ(sinh νs − sin νs).
    pub fn norm_constant(&self) -> f64 {
        self.scale
    }
}

/// φ_n(s) for 1-based mode index n.
pub fn mode_shape(n: usize, s: f64) -> Result<f64> {
    ModeShape::new(n)?.eval(s)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MechanicalMode {
    pub index: usize,
    pub root: f64,
    /// rad/s
    pub omega: f64,
    /// kg
    pub effective_mass: f64,
    /// m
    pub x_zpm: f64,
    pub norm_constant: f64,
}

/// ∫₀¹ φ_n² ds, i.e. m*_n / (μL).
pub fn mass_ratio(n: usize) -> Result<f64> {
    let shape = ModeShape::new(n)?;
    Ok(quad::unit_interval(|s| shape.value(s).powi(2)))
}

pub fn mode_properties(spec: &BeamSpec, n: usize) -> Result<MechanicalMode> {
    spec.validate()?;
    let shape = ModeShape::new(n)?;
    let omega = spec.omega(shape.nu);
    let effective_mass = spec.mass() * quad::unit_interval(|s| shape.value(s).powi(2));
    Ok(MechanicalMode {
        index: n,
        root: shape.nu,
        omega,
        effective_mass,
        x_zpm: (HBAR / (2.0 * effective_mass * omega)).sqrt(),
        norm_constant: shape.norm_constant(),
    })
}

/// M̃_ij = L·M_ij = ∫₀¹ φ_i' φ_j' ds for i, j = 1..=n_max (stored 0-based).
pub fn stiffness_overlaps(n_max: usize) -> Result<DMatrix<f64>> {
    if n_max == 0 || n_max > MAX_ROOTS {
        return Err(Error::Domain(format!("n_max must be in 1..={MAX_ROOTS}, got {n_max}")));
    }
    let shapes = (1..=n_max).map(ModeShape::new).collect::<Result<Vec<_>>>()?;
    let mut m = DMatrix::zeros(n_max, n_max);
    for i in 0..n_max {
        for j in i..n_max {
            let (a, b) = (shapes[i], shapes[j]);
            let v = quad::unit_interval(|s| a.slope(s) * b.slope(s));
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    Ok(m)
}

#[derive(Debug, Clone)]
pub struct NonlinearityTensor {
    pub n_max: usize,
    pub roots: Vec<f64>,
    /// m*_n / (μL)
    pub mass_ratios: Vec<f64>,
    /// M̃_ij (dimensionless)
    pub m_tilde: DMatrix<f64>,
    /// M_ij = M̃_ij / L (1/m)
    pub overlaps: DMatrix<f64>,
    lambda0: Vec<f64>,
    bracket: Vec<f64>,
}

impl NonlinearityTensor {
    fn idx(&self, i: usize, j: usize, k: usize, l: usize) -> usize {
        let n = self.n_max;
        assert!((1..=n).contains(&i) && (1..=n).contains(&j) && (1..=n).contains(&k) && (1..=n).contains(&l));
        (((i - 1) * n + (j - 1)) * n + (k - 1)) * n + (l - 1)
    }

    /// λ⁰_ijkl (rad/s), 1-based indices.
    pub fn lambda0(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.lambda0[self.idx(i, j, k, l)]
    }

    /// B_ijkl = 32 κ̃² m λ⁰_ijkl / ℏ, 1-based indices.
    pub fn bracket(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.bracket[self.idx(i, j, k, l)]
    }

    /// λ_ijkl = λ⁰_ijkl √(ζ_i ζ_j ζ_k ζ_l) with ζ given per mode (0-based slice).
    pub fn rescaled(&self, zeta: &[f64], i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.lambda0(i, j, k, l) * (zeta[i - 1] * zeta[j - 1] * zeta[k - 1] * zeta[l - 1]).sqrt()
    }

    /// The B_11ij block for the first n_max modes (0-based n_max × n_max).
    pub fn table(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n_max, self.n_max, |a, b| self.bracket(1, 1, a + 1, b + 1))
    }
}

pub fn nonlinearity_tensor(spec: &BeamSpec, n_max: usize) -> Result<NonlinearityTensor> {
    if n_max == 0 || n_max > MAX_TENSOR_MODES {
        return Err(Error::Domain(format!("tensor cutoff must be in 1..={MAX_TENSOR_MODES}, got {n_max}")));
    }
    spec.validate()?;
    let m_tilde = stiffness_overlaps(n_max)?;
    let modes = (1..=n_max).map(|n| mode_properties(spec, n)).collect::<Result<Vec<_>>>()?;
    let overlaps = &m_tilde / spec.length;
    let pref = spec.linear_modulus() / (8.0 * spec.length * HBAR);
    let to_bracket = 32.0 * spec.gyration.powi(2) * spec.mass() / HBAR;
    let n = n_max;
    let mut lambda0 = vec![0.0; n.pow(4)];
    let mut bracket = vec![0.0; n.pow(4)];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let x = modes[i].x_zpm * modes[j].x_zpm * modes[k].x_zpm * modes[l].x_zpm;
                    let v = pref * overlaps[(i, j)] * overlaps[(k, l)] * x;
                    let id = ((i * n + j) * n + k) * n + l;
                    lambda0[id] = v;
                    bracket[id] = v * to_bracket;
                }
            }
        }
    }
    Ok(NonlinearityTensor {
        n_max,
        roots: modes.iter().map(|m| m.root).collect(),
        mass_ratios: modes.iter().map(|m| m.effective_mass / spec.mass()).collect(),
        m_tilde,
        overlaps,
        lambda0,
        bracket,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DuffingParams {
    /// ω_m,0 (rad/s)
    pub omega0: f64,
    /// β (N/m³)
    pub beta: f64,
    /// λ₀ (rad/s)
    pub lambda0: f64,
    pub x_zpm: f64,
    pub effective_mass: f64,
}

/// (M̃₁₁)² / (2 ν₁⁴ m*/μL), the dimensionless prefactor of β.
pub fn anharmonicity_coefficient() -> Result<f64> {
    let m11 = stiffness_overlaps(1)?[(0, 0)];
    let nu = cached_root(1)?;
    Ok(m11.powi(2) / (2.0 * nu.powi(4) * mass_ratio(1)?))
}

pub fn duffing_params(spec: &BeamSpec) -> Result<DuffingParams> {
    let mode = mode_properties(spec, 1)?;
    let beta = anharmonicity_coefficient()? * mode.effective_mass * mode.omega.powi(2) / spec.gyration.powi(2);
    Ok(DuffingParams {
        omega0: mode.omega,
        beta,
        lambda0: beta * mode.x_zpm.powi(4) / (2.0 * HBAR),
        x_zpm: mode.x_zpm,
        effective_mass: mode.effective_mass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shapes_vanish_at_clamps() {
        for n in 1..=10 {
            let sh = ModeShape::new(n).unwrap();
            for s in [0.0, 1.0] {
                assert!(sh.value(s).abs() < 1e-8, "n={n} s={s}");
                assert!(sh.slope(s).abs() < 1e-8 * sh.nu, "n={n} s={s}");
            }
        }
    }

    #[test]
    fn outside_domain_rejected() {
        assert!(matches!(mode_shape(1, 1.5), Err(Error::Domain(_))));
        assert!(matches!(mode_shape(1, -0.1), Err(Error::Domain(_))));
    }

    #[test]
    fn high_modes_stay_finite() {
        let sh = ModeShape::new(50).unwrap();
        for k in 0..=1000 {
            let v = sh.value(k as f64 / 1000.0);
            assert!(v.is_finite() && v.abs() <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn unknown_preset() {
        assert!(material("graphite").is_err());
        assert!(material("cnt_10_0").is_ok());
    }
}
