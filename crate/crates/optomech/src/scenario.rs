//! Declarative scenario files (JSON) and the evaluation pipeline built on
//! them.

use crate::beam::{self, BeamSpec, DuffingParams};
use crate::cavity::{self, AcConvention, CavityGeometry, Coupling, FieldStructure, LaserInput, Placement};
use crate::dynamics::{self, Drive, DriveSet, Peak, Role, SpectrumResult, SteadyState, ThermalBath};
use crate::electrostatics::{self, ElectrodeConfig, FlickerEstimate, ModeCoefficients, NoiseSite, TunedMode};
use crate::error::{Error, Result};
use crate::losses::{self, ChannelFinesse, ElectrodeLossConfig, FinesseBudget};
use crate::spectrum::{self, AnharmonicSpectrum};
use crate::units::{hz_to_rad, polarizability_from_angstrom2};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// The reference parameter set shipped with the crate.
pub const FIG4_SCENARIO: &str = include_str!("../presets/fig4.scenario");

const REQUIRED: &[&str] = &["beam"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub beam: BeamInput,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub electrodes: Option<ElectrodeInput>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tuning: Option<TuningInput>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cavity: Option<CavityGeometry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub losses: Option<LossInput>,
    #[serde(default)]
    pub drives: Vec<DriveInput>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bath: Option<BathInput>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseInput>,
    #[serde(default)]
    pub options: Options,
}

/// Either a material preset or explicit beam parameters, plus the length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeamInput {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    /// L (m)
    pub length: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub line_density: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gyration: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sound_speed: Option<f64>,
    /// α_∥ in 4πε₀Å²
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_par: Option<f64>,
    /// α_⊥ in 4πε₀Å²
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_perp: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DirectField {
    /// E_∥ (V/m)
    pub e_par: f64,
    /// E_⊥ (V/m)
    pub e_perp: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TipCharges {
    /// C
    pub q: f64,
    /// C
    pub q_prime: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElectrodeInput {
    /// D (m)
    pub gap: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direct_field: Option<DirectField>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub charges: Option<TipCharges>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TuningInput {
    pub target_frequency_hz: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelInput {
    /// R' (m)
    pub radius: f64,
    pub angle_deg: f64,
    /// D (m)
    pub gap: f64,
    /// σ̃
    pub conductivity: f64,
}

impl ChannelInput {
    pub fn config(&self) -> ElectrodeLossConfig {
        ElectrodeLossConfig {
            radius: self.radius,
            angle: self.angle_deg.to_radians(),
            gap: self.gap,
            conductivity: self.conductivity,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LossInput {
    pub scattering: ChannelInput,
    pub gap: ChannelInput,
    pub absorption: ChannelInput,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveInput {
    pub role: Role,
    /// Δ = δ_nm for the transition m → n
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resonant_with: Option<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detuning_hz: Option<f64>,
    /// |g_m|/2π
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coupling_hz: Option<f64>,
    /// input power (W); the coupling then follows from G₀
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub power_w: Option<f64>,
    /// κ/2π
    pub linewidth_hz: f64,
    /// κ_ex/κ; defaults to the cavity value
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub external_fraction: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BathInput {
    /// T (K)
    pub temperature: f64,
    /// Q = ω_m/γ
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quality: Option<f64>,
    /// γ (1/s)
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlickerInput {
    /// S_E at the reference point (V² m⁻² Hz⁻¹)
    pub s_ref: f64,
    pub f_ref_hz: f64,
    /// K
    pub t_ref: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseInput {
    /// static field at the tube (V/m)
    pub field: f64,
    /// electrode–tube distance (m)
    pub distance: f64,
    /// R_e (Ω)
    pub resistance: f64,
    pub flicker: FlickerInput,
}

fn default_fock_cutoff() -> usize {
    spectrum::DEFAULT_CUTOFF
}
fn default_levels() -> usize {
    spectrum::DEFAULT_LEVELS
}
fn default_mode_cutoff() -> usize {
    5
}
fn default_grid() -> usize {
    dynamics::DEFAULT_GRID
}
fn default_workers() -> usize {
    4
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Options {
    #[serde(default = "default_fock_cutoff")]
    pub fock_cutoff: usize,
    #[serde(default = "default_levels")]
    pub levels: usize,
    /// number of beam modes in tensors and electrostatic overlaps
    #[serde(default = "default_mode_cutoff")]
    pub mode_cutoff: usize,
    #[serde(default = "default_grid")]
    pub grid_points: usize,
    #[serde(default)]
    pub ac_convention: AcConvention,
    /// threads used for spectrum grids; results do not depend on it
    #[serde(default = "default_workers")]
    pub workers: usize,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            fock_cutoff: default_fock_cutoff(),
            levels: default_levels(),
            mode_cutoff: default_mode_cutoff(),
            grid_points: default_grid(),
            ac_convention: AcConvention::Paper,
            workers: default_workers(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Tuning {
    pub duffing: DuffingParams,
    /// mode used downstream
    pub tuned: TunedMode,
    /// electrode overlaps, when electrodes are configured
    #[serde(skip)]
    pub coefficients: Option<ModeCoefficients>,
    /// result of softening by the configured electrodes alone
    pub electrode_tuned: Option<TunedMode>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CouplingReport {
    pub geometry: CavityGeometry,
    pub field: FieldStructure,
    pub placement: Placement,
    pub coupling: Coupling,
}

#[derive(Debug, Clone, Serialize)]
pub struct LossReport {
    pub scattering: ChannelFinesse,
    pub gap: ChannelFinesse,
    pub absorption: ChannelFinesse,
    pub budget: FinesseBudget,
}

#[derive(Debug, Clone, Serialize)]
pub struct NoiseReport {
    /// Γ_δU / R_e (Hz/Ω)
    pub johnson_per_ohm: f64,
    /// Γ_δU at the configured R_e (1/s)
    pub johnson: f64,
    pub flicker: FlickerEstimate,
    /// γn̄ (1/s)
    pub thermal_rate: f64,
}

#[derive(Debug, Clone)]
pub struct SteadyReport {
    pub spectrum: AnharmonicSpectrum,
    pub drives: DriveSet,
    pub bath: ThermalBath,
    pub steady: SteadyState,
    /// γ_eff^{nm} (1/s)
    pub linewidths: DMatrix<f64>,
    /// largest probe rate over γn̄, when a probe is present
    pub probe_weakness: Option<f64>,
}

fn exactly_one(a: bool, b: bool, what: &str) -> Result<()> {
    if a == b {
        return Err(Error::Invalid(format!("{what}: give exactly one of the alternatives")));
    }
    Ok(())
}

impl Scenario {
    /// Parses and validates a scenario document.
    pub fn parse(text: &str) -> Result<Scenario> {
        if text.trim().is_empty() {
            return Err(Error::Invalid(format!("empty scenario; required fields: {}", REQUIRED.join(", "))));
        }
        let value: serde_json::Value = serde_json::from_str(text)
            .map_err(|e| Error::Invalid(format!("scenario is not valid JSON: {e}")))?;
        if let Some(obj) = value.as_object() {
            let missing: Vec<_> = REQUIRED.iter().filter(|k| !obj.contains_key(**k)).copied().collect();
            if !missing.is_empty() {
                return Err(Error::Invalid(format!("scenario is missing required fields: {}", missing.join(", "))));
            }
        }
        let scenario: Scenario =
            serde_json::from_str(text).map_err(|e| Error::Invalid(format!("scenario schema: {e}")))?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn fig4() -> Scenario {
        Scenario::parse(FIG4_SCENARIO).expect("bundled scenario is valid")
    }

    /// Canonical JSON with defaults filled in.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    /// Re-checks the invariants of every referenced type.
    pub fn validate(&self) -> Result<()> {
        self.beam()?;
        if let Some(e) = &self.electrodes {
            exactly_one(e.direct_field.is_some(), e.charges.is_some(), "electrodes (direct_field | charges)")?;
            if !(e.gap > 0.0) {
                return Err(Error::Invalid(format!("electrode gap must be positive, got {}", e.gap)));
            }
        }
        if let Some(t) = &self.tuning {
            if !(t.target_frequency_hz > 0.0) {
                return Err(Error::Invalid("tuning target frequency must be positive".into()));
            }
        }
        if let Some(c) = &self.cavity {
            c.validate()?;
        }
        if let (Some(l), Some(c)) = (&self.losses, &self.cavity) {
            for ch in [l.scattering, l.gap, l.absorption] {
                ch.config().validate(c)?;
            }
        }
        if self.losses.is_some() && self.cavity.is_none() {
            return Err(Error::Invalid("losses need a cavity section".into()));
        }
        for (j, d) in self.drives.iter().enumerate() {
            exactly_one(d.resonant_with.is_some(), d.detuning_hz.is_some(), &format!("drive {j} (resonant_with | detuning_hz)"))?;
            exactly_one(d.coupling_hz.is_some(), d.power_w.is_some(), &format!("drive {j} (coupling_hz | power_w)"))?;
            if !(d.linewidth_hz > 0.0) {
                return Err(Error::Invalid(format!("drive {j}: linewidth must be positive")));
            }
            if let Some([n, m]) = d.resonant_with {
                if n == m || n >= self.options.levels || m >= self.options.levels {
                    return Err(Error::Invalid(format!(
                        "drive {j}: resonant_with [{n}, {m}] must name two distinct retained levels (< {})",
                        self.options.levels
                    )));
                }
            }
            if d.power_w.is_some() && self.cavity.is_none() {
                return Err(Error::Invalid(format!("drive {j}: power-specified drives need a cavity section")));
            }
        }
        if self.drives.iter().filter(|d| d.role == Role::Probe).count() > 1 {
            return Err(Error::Invalid("at most one probe drive is allowed".into()));
        }
        if let Some(b) = &self.bath {
            exactly_one(b.quality.is_some(), b.gamma.is_some(), "bath (quality | gamma)")?;
            if !(b.temperature >= 0.0) {
                return Err(Error::Invalid("bath temperature must be non-negative".into()));
            }
        }
        let o = &self.options;
        if o.levels < 2 || o.fock_cutoff < o.levels + 4 || o.mode_cutoff == 0 || o.mode_cutoff > beam::MAX_TENSOR_MODES {
            return Err(Error::Invalid(format!(
                "options: need levels >= 2, fock_cutoff >= levels + 4, 1 <= mode_cutoff <= {}",
                beam::MAX_TENSOR_MODES
            )));
        }
        if o.grid_points < 2 || o.workers == 0 {
            return Err(Error::Invalid("options: grid_points >= 2 and workers >= 1 required".into()));
        }
        Ok(())
    }

    /// Beam parameters and (α_∥, α_⊥) in F·m.
    pub fn beam(&self) -> Result<(BeamSpec, (f64, f64))> {
        let b = &self.beam;
        let explicit = [b.line_density, b.gyration, b.sound_speed];
        match &b.preset {
            Some(key) => {
                if explicit.iter().any(Option::is_some) {
                    return Err(Error::Invalid("beam: give a preset or explicit parameters, not both".into()));
                }
                let mat = beam::material(key)?;
                let (mut ap, mut at) = mat.polarizabilities();
                if let Some(v) = b.alpha_par {
                    ap = polarizability_from_angstrom2(v);
                }
                if let Some(v) = b.alpha_perp {
                    at = polarizability_from_angstrom2(v);
                }
                Ok((mat.beam(b.length)?, (ap, at)))
            }
            None => {
                let [Some(mu), Some(k), Some(c)] = explicit else {
                    return Err(Error::Invalid(
                        "beam: without a preset, line_density, gyration and sound_speed are required".into(),
                    ));
                };
                let spec = BeamSpec::new(b.length, mu, k, c)?;
                let ap = polarizability_from_angstrom2(b.alpha_par.unwrap_or(0.0));
                let at = polarizability_from_angstrom2(b.alpha_perp.unwrap_or(0.0));
                Ok((spec, (ap, at)))
            }
        }
    }

    pub fn electrode_config(&self) -> Result<Option<ElectrodeConfig>> {
        let Some(e) = &self.electrodes else { return Ok(None) };
        let (spec, (ap, at)) = self.beam()?;
        let cfg = match (e.direct_field, e.charges) {
            (Some(f), None) => ElectrodeConfig::from_direct_field(f.e_par, f.e_perp, e.gap, spec.length, ap, at)?,
            (None, Some(c)) => ElectrodeConfig::symmetric_tips(c.q, c.q_prime, e.gap, spec.length, ap, at)?,
            _ => return Err(Error::Invalid("electrodes (direct_field | charges)".into())),
        };
        Ok(Some(cfg))
    }

    /// Softened fundamental mode. A tuning target takes precedence over the
    /// electrode-derived curvature; both are reported.
    pub fn tuning(&self) -> Result<Tuning> {
        let (spec, _) = self.beam()?;
        let duffing = beam::duffing_params(&spec)?;
        let (coefficients, electrode_tuned) = match self.electrode_config()? {
            Some(cfg) => {
                let c = electrostatics::mode_coefficients(&cfg, &spec, self.options.mode_cutoff)?;
                let t = electrostatics::soften(&duffing, c.w00())?;
                (Some(c), Some(t))
            }
            None => (None, None),
        };
        let tuned = match (&self.tuning, electrode_tuned) {
            (Some(t), _) => {
                let w = electrostatics::curvature_for_frequency(&duffing, hz_to_rad(t.target_frequency_hz))?;
                electrostatics::soften(&duffing, w)?
            }
            (None, Some(t)) => t,
            (None, None) => electrostatics::soften(&duffing, 0.0)?,
        };
        Ok(Tuning { duffing, tuned, coefficients, electrode_tuned })
    }

    pub fn spectrum(&self, tuned: &TunedMode) -> Result<AnharmonicSpectrum> {
        spectrum::solve(tuned.omega, tuned.lambda, self.options.levels, self.options.fock_cutoff)
    }

    pub fn cavity(&self) -> Result<CavityGeometry> {
        let mut c = self.cavity.ok_or_else(|| Error::Invalid("scenario has no cavity section".into()))?;
        c.convention = self.options.ac_convention;
        Ok(c)
    }

    pub fn coupling(&self) -> Result<CouplingReport> {
        let geometry = self.cavity()?;
        let (spec, (ap, _)) = self.beam()?;
        let (field, placement, coupling) = cavity::optimal_coupling(&geometry, ap, spec.length)?;
        Ok(CouplingReport { geometry, field, placement, coupling })
    }

    pub fn losses(&self) -> Result<LossReport> {
        let l = self.losses.ok_or_else(|| Error::Invalid("scenario has no losses section".into()))?;
        let geom = self.cavity()?;
        let fs = cavity::field_structure(&geom)?;
        let scattering = losses::scattering_finesse(&geom, &fs, &l.scattering.config())?;
        let gap = losses::gap_finesse(&geom, &fs, &l.gap.config())?;
        let absorption = losses::absorption_finesse(&geom, &fs, &l.absorption.config())?;
        let budget = losses::combine(&geom, scattering.value, gap.value, absorption.value)?;
        Ok(LossReport { scattering, gap, absorption, budget })
    }

    pub fn bath(&self, omega_m: f64) -> Result<ThermalBath> {
        let b = self.bath.ok_or_else(|| Error::Invalid("scenario has no bath section".into()))?;
        match (b.quality, b.gamma) {
            (Some(q), None) => ThermalBath::from_quality(omega_m, q, b.temperature),
            (None, Some(g)) => ThermalBath::new(omega_m, b.temperature, g),
            _ => Err(Error::Invalid("bath (quality | gamma)".into())),
        }
    }

    fn external_fraction(&self, d: &DriveInput) -> Result<f64> {
        d.external_fraction
            .or(self.cavity.map(|c| c.external_fraction))
            .ok_or_else(|| Error::Invalid("drive needs external_fraction (or a cavity section)".into()))
    }

    /// Drives in angular units on the given spectrum.
    pub fn drive_set(&self, spec: &AnharmonicSpectrum, tuned: &TunedMode) -> Result<DriveSet> {
        let mut coupling: Option<CouplingReport> = None;
        let mut drives = Vec::with_capacity(self.drives.len());
        for d in &self.drives {
            let detuning = match (d.resonant_with, d.detuning_hz) {
                (Some([n, m]), None) => spec.delta(n, m),
                (None, Some(f)) => hz_to_rad(f),
                _ => return Err(Error::Invalid("drive (resonant_with | detuning_hz)".into())),
            };
            let kappa = hz_to_rad(d.linewidth_hz);
            let g = match (d.coupling_hz, d.power_w) {
                (Some(g), None) => hz_to_rad(g),
                (None, Some(p)) => {
                    if coupling.is_none() {
                        coupling = Some(self.coupling()?);
                    }
                    let c = coupling.as_ref().unwrap();
                    let input = LaserInput {
                        power: p,
                        omega_laser: c.geometry.omega() + detuning,
                        detuning,
                        kappa,
                        kappa_ex: self.external_fraction(d)? * kappa,
                    };
                    cavity::linearize_drives(c.coupling.g0_angular, tuned.x_zpm, &[input])?[0].coupling.norm()
                }
                _ => return Err(Error::Invalid("drive (coupling_hz | power_w)".into())),
            };
            drives.push(Drive { detuning, coupling: g, kappa, role: d.role });
        }
        DriveSet::new(drives)
    }

    /// Steady populations under the preparation lasers and the bath. The
    /// probe is treated as a weak measurement: it enters the linewidths but
    /// not the populations.
    pub fn steady(&self) -> Result<SteadyReport> {
        let tuning = self.tuning()?;
        let spec = self.spectrum(&tuning.tuned)?;
        let drives = self.drive_set(&spec, &tuning.tuned)?;
        let bath = self.bath(tuning.tuned.omega)?;
        let thermal = dynamics::thermal_rates(&spec, &bath);
        let prep = dynamics::laser_rates(&spec, &drives.preparation());
        let mut parts: Vec<&DMatrix<f64>> = prep.iter().collect();
        parts.push(&thermal);
        let steady = dynamics::steady_populations(&dynamics::total_rates(&parts)?)?;
        let all = dynamics::laser_rates(&spec, &drives.drives);
        let linewidths = dynamics::effective_linewidths(&all, &thermal)?;
        let probe_weakness = drives
            .probe()
            .map(|p| dynamics::drive_rates(&spec, p).amax() / (bath.gamma * bath.nbar.max(1e-300)));
        Ok(SteadyReport { spectrum: spec, drives, bath, steady, linewidths, probe_weakness })
    }

    pub fn probe_external_fraction(&self) -> Result<f64> {
        let d = self
            .drives
            .iter()
            .find(|d| d.role == Role::Probe)
            .ok_or_else(|| Error::Invalid("emission spectrum needs a probe drive".into()))?;
        self.external_fraction(d)
    }

    pub fn emission_peaks(&self, report: &SteadyReport) -> Result<Vec<Peak>> {
        let probe = report
            .drives
            .probe()
            .ok_or_else(|| Error::Invalid("emission spectrum needs a probe drive".into()))?;
        dynamics::spectrum_peaks(
            &report.spectrum,
            &report.steady.populations,
            probe,
            &report.linewidths,
            self.probe_external_fraction()?,
        )
    }

    pub fn emission(&self, report: &SteadyReport) -> Result<SpectrumResult> {
        let peaks = self.emission_peaks(report)?;
        let grid = dynamics::default_grid(&peaks, self.options.grid_points)?;
        dynamics::emission_spectrum(&peaks, &grid, self.options.workers)
    }

    /// Johnson and 1/f estimates with the unsoftened x_ZPM, compared with γn̄.
    pub fn noise(&self) -> Result<NoiseReport> {
        let n = self.noise.ok_or_else(|| Error::Invalid("scenario has no noise section".into()))?;
        let (_, (ap, _)) = self.beam()?;
        let tuning = self.tuning()?;
        let bath = self.bath(tuning.tuned.omega)?;
        let site = NoiseSite { alpha: ap, field: n.field, x_zpm: tuning.duffing.x_zpm, distance: n.distance };
        let johnson_per_ohm = electrostatics::johnson_decoherence(bath.temperature, 1.0, &site)?;
        let flicker = electrostatics::one_over_f_decoherence(
            n.flicker.s_ref,
            hz_to_rad(n.flicker.f_ref_hz),
            n.flicker.t_ref,
            tuning.tuned.omega,
            bath.temperature,
            &site,
        )?;
        Ok(NoiseReport {
            johnson_per_ohm,
            johnson: johnson_per_ohm * n.resistance,
            flicker,
            thermal_rate: bath.gamma * bath.nbar,
        })
    }
}
