//! Photon statistics of steady states and trajectories.

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{cavity_annihilator, expectation, Basis, Operator};
use crate::liouvillian::{build_liouvillian, propagate, DensityMatrix, PropagationSettings, Superoperator};
use crate::model::SystemParams;

/// Photon numbers at or below this are treated as an empty cavity.
pub const MIN_PHOTON_NUMBER: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationSeries {
    pub taus: Vec<f64>,
    pub values: Vec<f64>,
    pub g2_zero: f64,
}

fn number_operator(basis: Basis) -> Operator {
    let a = cavity_annihilator(basis);
    &a.adjoint() * &a
}

/// `n = Tr(â†â ρ)`.
pub fn photon_number(rho: &DensityMatrix) -> f64 {
    expectation(&number_operator(rho.basis()), rho)
        .expect("operator built on the state's basis")
        .re
}

/// `g²(0) = Tr(â†â†ââ ρ)/n²`.
pub fn g2_zero(rho: &DensityMatrix) -> Result<f64> {
    let n = photon_number(rho);
    if !(n > MIN_PHOTON_NUMBER) {
        return Err(Error::UndefinedCorrelation(format!("photon number {n:.3e} is zero")));
    }
    let a = cavity_annihilator(rho.basis());
    let a2 = &a * &a;
    let pairs = expectation(&(&a2.adjoint() * &a2), rho).expect("same basis").re;
    Ok(pairs.max(0.0) / (n * n))
}

/// `g²(τ)` by propagating `â ρ_s â† / n_s` under the generator.
pub fn g2_tau(
    rho_s: &DensityMatrix,
    l: &Superoperator,
    taus: &[f64],
    settings: &PropagationSettings,
) -> Result<CorrelationSeries> {
    if taus.first() != Some(&0.0) {
        return Err(Error::InvalidArgument("delay grid must start at tau = 0".into()));
    }
    let zero = g2_zero(rho_s)?;
    let n_s = photon_number(rho_s);
    let basis = rho_s.basis();
    let a = cavity_annihilator(basis);
    let projected = a.elements() * rho_s.elements() * a.adjoint().elements();
    let d = basis.dim();
    // normalizing by n_s makes ρ' unit-trace, so Tr(n ρ'(τ))/n_s is g²(τ)
    let rho_c = DensityMatrix::from_matrix_unchecked(
        basis,
        faer::Mat::from_fn(d, d, |i, j| projected[(i, j)] / n_s),
    );
    let states = propagate(&rho_c, l, taus, settings)?;
    let values = states.iter().map(|s| (photon_number(s) / n_s).max(0.0)).collect();
    Ok(CorrelationSeries { taus: taus.to_vec(), values, g2_zero: zero })
}

/// Photon number along the trajectory from `rho0`.
pub fn photon_dynamics(
    params: &SystemParams,
    rho0: &DensityMatrix,
    times: &[f64],
    settings: &PropagationSettings,
) -> Result<Vec<f64>> {
    let l = build_liouvillian(params, rho0.basis());
    let states = propagate(rho0, &l, times, settings)?;
    Ok(states.iter().map(photon_number).collect())
}

/// Relative change `(max − min)/|mean|` over the trailing `fraction` of a series.
pub fn plateau_relative_change(series: &[f64], fraction: f64) -> Result<f64> {
    let tail = trailing(series, fraction)?;
    let max = tail.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = tail.iter().copied().fold(f64::INFINITY, f64::min);
    let mean = tail.iter().sum::<f64>() / tail.len() as f64;
    if mean == 0.0 {
        return Err(Error::DivisionByZero("series mean is zero"));
    }
    Ok((max - min) / mean.abs())
}

/// Frequency (cycles per unit time) of the largest non-zero FFT bin of the
/// trailing window, after subtracting the window mean.
pub fn dominant_frequency(samples: &[f64], dt: f64, fraction: f64) -> Result<f64> {
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument("sample spacing must be positive".into()));
    }
    let tail = trailing(samples, fraction)?;
    let len = tail.len();
    if len < 4 {
        return Err(Error::InvalidArgument("need at least 4 samples for a spectrum".into()));
    }
    let mean = tail.iter().sum::<f64>() / len as f64;
    let mut buf: Vec<Complex64> = tail.iter().map(|&x| Complex64::new(x - mean, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(len).process(&mut buf);
    let (bin, _) = buf[1..=len / 2]
        .iter()
        .enumerate()
        .map(|(k, z)| (k + 1, z.norm()))
        .fold((0, f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best });
    Ok(bin as f64 / (len as f64 * dt))
}

fn trailing(series: &[f64], fraction: f64) -> Result<&[f64]> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::InvalidArgument(format!("window fraction must lie in (0, 1], got {fraction}")));
    }
    if series.is_empty() {
        return Err(Error::InvalidArgument("empty series".into()));
    }
    let keep = ((series.len() as f64 * fraction).ceil() as usize).clamp(1, series.len());
    Ok(&series[series.len() - keep..])
}
