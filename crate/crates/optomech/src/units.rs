//! Physical constants (SI, CODATA 2018) and unit helpers.

use std::f64::consts::PI;

pub const HBAR: f64 = 1.054_571_817e-34;
pub const PLANCK: f64 = 6.626_070_15e-34;
pub const KB: f64 = 1.380_649e-23;
pub const EPS0: f64 = 8.854_187_812_8e-12;
pub const C_LIGHT: f64 = 299_792_458.0;
pub const E_CHARGE: f64 = 1.602_176_634e-19;
pub const ALPHA_FINE: f64 = 7.297_352_569_3e-3;

/// Coulomb constant 1/(4πε₀).
pub const COULOMB_K: f64 = 1.0 / (4.0 * PI * EPS0);

/// Ordinary frequency (Hz) to angular (rad/s).
#[inline]
pub fn hz_to_rad(f: f64) -> f64 {
    2.0 * PI * f
}

/// Angular frequency (rad/s) to ordinary (Hz).
#[inline]
pub fn rad_to_hz(w: f64) -> f64 {
    w / (2.0 * PI)
}

/// Polarizability quoted in units of 4πε₀Å² (per unit length) to F·m.
#[inline]
pub fn polarizability_from_angstrom2(v: f64) -> f64 {
    v * 4.0 * PI * EPS0 * 1e-20
}

/// Bose occupation at angular frequency `w` and temperature `t`.
pub fn bose_occupation(w: f64, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    1.0 / (HBAR * w / (KB * t)).exp_m1()
}
