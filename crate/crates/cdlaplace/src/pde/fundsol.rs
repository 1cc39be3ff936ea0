//! Fundamental solutions of the Laplacian and the normalising constant of
//! the Newtonian kernel.

use std::f64::consts::PI;

use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::transform::quad::{composite_gauss_legendre, tanh_sinh};

/// Normalisation of `C_n` in `Psi_n = C_n |z|^{2-n}` for `n >= 3`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConstantConvention {
    /// `-Gamma(n/2 - 1) / (4 pi^{n/2})`, so that `Delta Psi_n = delta`.
    Standard,
    /// `-Gamma(n/2 - 1) / (4 (n - 2) pi^{n/2})`, built on `sigma_n = (n - 2) |S^{n-1}|`.
    Scaled,
}

/// `C_n` for `n >= 3`.
pub fn fundamental_constant(n: usize, conv: ConstantConvention) -> Result<f64> {
    if n < 3 {
        return Err(Error::InvalidArgument(format!("C_n is defined for n >= 3, got {n}")));
    }
    let h = n as f64 / 2.0;
    let c = -gamma(h - 1.0) / (4.0 * PI.powf(h));
    Ok(match conv {
        ConstantConvention::Standard => c,
        ConstantConvention::Scaled => c / (n as f64 - 2.0),
    })
}

fn radial(n: usize, rho: f64, conv: ConstantConvention) -> Result<f64> {
    if n == 2 {
        Ok((rho * rho).ln() / (4.0 * PI))
    } else {
        Ok(fundamental_constant(n, conv)? * rho.powi(2 - n as i32))
    }
}

/// `Psi_2 = (1/4 pi) ln |z|^2`, `Psi_n = C_n |z|^{2-n}` for `n >= 3`.
pub fn fundamental_solution_elliptic(z: &[f64], conv: ConstantConvention) -> Result<f64> {
    let n = z.len();
    if n < 2 {
        return Err(Error::InvalidArgument("fundamental solutions need n >= 2".into()));
    }
    let rho = z.iter().map(|x| x * x).sum::<f64>().sqrt();
    if rho == 0.0 {
        return Err(Error::InvalidArgument("the fundamental solution is singular at the origin".into()));
    }
    radial(n, rho, conv)
}

/// `|S^{n-1}| = (int e^{-x^2} dx)^n / int_0^inf e^{-r^2} r^{n-1} dr` by quadrature.
pub fn sphere_area_numeric(n: usize) -> f64 {
    let line = composite_gauss_legendre(-10.0, 10.0, 8, 20);
    let g: f64 = line.t.iter().zip(&line.w).map(|(x, w)| w * (-x * x).exp()).sum();
    let half = composite_gauss_legendre(0.0, 10.0, 8, 20);
    let r: f64 = half.t.iter().zip(&half.w).map(|(x, w)| w * (-x * x).exp() * x.powi(n as i32 - 1)).sum();
    g.powi(n as i32) / r
}

/// `int Psi_n Delta phi` for the bump `phi = exp(-1/(1 - |z|^2))`; equals
/// `phi(0) = e^{-1}` exactly when `Psi_n` is a fundamental solution.
pub fn delta_test(n: usize, conv: ConstantConvention) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidArgument("the delta test needs n >= 2".into()));
    }
    let area = sphere_area_numeric(n);
    let lap = |rho: f64| {
        let u = 1.0 - rho * rho;
        if u < 1e-3 {
            return 0.0;
        }
        let phi = (-1.0 / u).exp();
        let g1 = -2.0 * rho / (u * u);
        let g2 = -2.0 / (u * u) - 8.0 * rho * rho / (u * u * u);
        phi * (g2 + g1 * g1) + (n as f64 - 1.0) * phi * g1 / rho
    };
    let nodes = tanh_sinh(0.0, 1.0, 7);
    let mut acc = 0.0;
    for (&rho, &w) in nodes.t.iter().zip(&nodes.w) {
        if rho <= 0.0 || rho >= 1.0 {
            continue;
        }
        acc += w * radial(n, rho, conv)? * lap(rho) * area * rho.powi(n as i32 - 1);
    }
    Ok(acc)
}

/// Both constants side by side with their delta tests.
#[derive(Clone, Debug, PartialEq)]
pub struct SigmaReport {
    pub n: usize,
    pub area_exact: f64,
    pub area_numeric: f64,
    /// `(n - 2) |S^{n-1}|`.
    pub sigma_scaled: f64,
    pub standard: f64,
    pub scaled: f64,
    pub delta_standard: f64,
    pub delta_scaled: f64,
    /// `phi(0)`.
    pub delta_target: f64,
}

pub fn sigma_report(n: usize) -> Result<SigmaReport> {
    let standard = fundamental_constant(n, ConstantConvention::Standard)?;
    let scaled = fundamental_constant(n, ConstantConvention::Scaled)?;
    let h = n as f64 / 2.0;
    let area_exact = 2.0 * PI.powf(h) / gamma(h);
    Ok(SigmaReport {
        n,
        area_exact,
        area_numeric: sphere_area_numeric(n),
        sigma_scaled: (n as f64 - 2.0) * area_exact,
        standard,
        scaled,
        delta_standard: delta_test(n, ConstantConvention::Standard)?,
        delta_scaled: delta_test(n, ConstantConvention::Scaled)?,
        delta_target: (-1.0f64).exp(),
    })
}
