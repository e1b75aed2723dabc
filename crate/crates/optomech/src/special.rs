//! Bessel functions of the first kind and the roots used by the
//! waveguide model.

use crate::error::{Error, Result};
use std::f64::consts::PI;

const SERIES_LIMIT: f64 = 12.0;

fn series(n: u32, x: f64) -> f64 {
    let h = 0.5 * x;
    let mut term = 1.0;
    for k in 1..=n {
        term *= h / k as f64;
    }
    let mut sum = term;
    let h2 = h * h;
    for k in 1..200u32 {
        term *= -h2 / (k as f64 * (k + n) as f64);
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

// Hankel asymptotic expansion, adequate past SERIES_LIMIT
fn asymptotic(n: u32, x: f64) -> f64 {
    let mu = 4.0 * (n as f64).powi(2);
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0;
    let z8 = 8.0 * x;
    for k in 1..12 {
        let kf = k as f64;
        term *= (mu - (2.0 * kf - 1.0).powi(2)) / (kf * z8);
        if k % 2 == 1 {
            q += if (k / 2) % 2 == 0 { term } else { -term };
        } else {
            p += if (k / 2) % 2 == 0 { term } else { -term };
        }
    }
    let chi = x - (0.5 * n as f64 + 0.25) * PI;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

/// J_n(x) for integer order n ≥ 0.
pub fn bessel_j(n: u32, x: f64) -> f64 {
    let sign = if x < 0.0 && n % 2 == 1 { -1.0 } else { 1.0 };
    let ax = x.abs();
    sign * if ax <= SERIES_LIMIT { series(n, ax) } else { asymptotic(n, ax) }
}

pub fn j0(x: f64) -> f64 {
    bessel_j(0, x)
}

pub fn j1(x: f64) -> f64 {
    bessel_j(1, x)
}

pub fn j2(x: f64) -> f64 {
    bessel_j(2, x)
}

/// Bracketed Newton iteration with bisection fallback.
pub fn solve_bracketed<F, D>(f: F, df: D, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::Solver(format!(
            "no sign change on [{lo}, {hi}]: f = ({flo:e}, {fhi:e})"
        )));
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let fx = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if fx.signum() == flo.signum() {
            lo = x;
            flo = fx;
        } else {
            hi = x;
        }
        let d = df(x);
        let newton = x - fx / d;
        let next = if d != 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - x).abs() <= tol * x.abs().max(1.0) {
            return Ok(next);
        }
        x = next;
    }
    Err(Error::Solver(format!(
        "no convergence in [{lo}, {hi}] after 200 iterations"
    )))
}

/// First positive zero of J₁ (x₁,₁ ≈ 3.8317).
pub fn j1_first_zero() -> f64 {
    // J1' = J0 - J1/x
    solve_bracketed(j1, |x| j0(x) - j1(x) / x, 3.0, 4.5, 1e-15)
        .expect("J1 changes sign on [3, 4.5]")
}

/// First positive root of J₀(x) = J₂(x), which is the first maximum of J₁.
pub fn j0_eq_j2_first_root() -> f64 {
    let f = |x: f64| j0(x) - j2(x);
    let df = |x: f64| -j1(x) - (j1(x) - 2.0 * j2(x) / x);
    solve_bracketed(f, df, 0.5, 3.0, 1e-15).expect("J0 - J2 changes sign on [0.5, 3]")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        // Abramowitz & Stegun table 9.1
        assert!((j0(1.0) - 0.765_197_686_557_966_6).abs() < 1e-15);
        assert!((j1(1.0) - 0.440_050_585_744_933_5).abs() < 1e-15);
        assert!((j2(5.0) - 0.046_565_116_277_752_2).abs() < 1e-14);
        assert!((j0(20.0) - 0.167_024_664_340_583_1).abs() < 1e-10);
    }

    #[test]
    fn recurrence() {
        for &x in &[0.3, 2.0, 7.5, 11.9, 13.0, 20.0] {
            let lhs = j0(x) + j2(x);
            let rhs = 2.0 * j1(x) / x;
            assert!((lhs - rhs).abs() < 1e-10, "x = {x}");
        }
    }

    #[test]
    fn roots() {
        let x11 = j1_first_zero();
        assert!((x11 - 3.831_705_970_207_512).abs() < 1e-12);
        let xs = j0_eq_j2_first_root();
        assert!((xs - 1.841_183_781_340_659).abs() < 1e-12);
        assert!((j0(x11) + j2(x11)).abs() < 1e-12);
    }
}
