//! Two-photon suppression by interference of the cavity drive with the
//! microwave-assisted Raman path, and the truncated weak-drive wavefunction.

use faer::Mat;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::SystemParams;

/// Amplitude systems with a larger 2-norm condition number are rejected.
pub const MAX_CONDITION_NUMBER: f64 = 1e12;

/// `θ_opt = arctan((κ + γ_g)/(2Δc))` on the branch in [0, π].
pub fn optimal_phase(delta_c: f64, kappa: f64, gamma_g: f64) -> Result<f64> {
    let total = kappa + gamma_g;
    if delta_c == 0.0 && total == 0.0 {
        return Err(Error::UndefinedPhase);
    }
    // atan2 with a non-negative ordinate already lands in [0, π]
    Ok(total.atan2(2.0 * delta_c))
}

/// `Ωm,opt = η(R + √(R² + 4))/2` with `R = √(4Δc² + (κ + γ_g)²)/g`.
pub fn optimal_microwave(params: &SystemParams) -> Result<f64> {
    if params.g == 0.0 {
        return Err(Error::DivisionByZero("Raman coupling g is zero"));
    }
    let total = params.kappa + params.gamma_g;
    let r = (4.0 * params.delta_c * params.delta_c + total * total).sqrt() / params.g.abs();
    Ok(params.eta * (r + (r * r + 4.0).sqrt()) / 2.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimalConditions {
    pub theta_opt: f64,
    pub omega_m_opt: f64,
}

pub fn optimal_conditions(params: &SystemParams) -> Result<OptimalConditions> {
    Ok(OptimalConditions {
        theta_opt: optimal_phase(params.delta_c, params.kappa, params.gamma_g)?,
        omega_m_opt: optimal_microwave(params)?,
    })
}

impl OptimalConditions {
    /// Copy of `params` with θ and Ωm set to these values.
    pub fn apply_to(&self, params: &SystemParams) -> SystemParams {
        SystemParams { theta: self.theta_opt, omega_m: self.omega_m_opt, ..params.clone() }
    }
}

/// Probability amplitudes of the weak-drive wavefunction, normalized to
/// `c0_up = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeakDriveAmplitudes {
    pub c0_up: Complex64,
    pub c0_dn: Complex64,
    pub c1_up: Complex64,
    pub c1_dn: Complex64,
    pub c2_up: Complex64,
    /// 2-norm condition number of the solved system.
    pub condition: f64,
    /// Residual of the `⟨0,↓|` projection, which the closure leaves out.
    pub dropped_residual: Complex64,
}

/// Solves the amplitude equations closed by `c0_up = 1`.
///
/// The projections onto `⟨0,↑|`, `⟨1,↑|`, `⟨1,↓|`, `⟨2,↑|` enter the system
/// and the `⟨0,↓|` projection is reported as [`WeakDriveAmplitudes::dropped_residual`];
/// with the normalization the full set is overdetermined.
pub fn weak_drive_amplitudes(params: &SystemParams) -> Result<WeakDriveAmplitudes> {
    if !(params.eta > 0.0) {
        return Err(Error::InvalidArgument(format!("eta must be positive, got {}", params.eta)));
    }
    let i = Complex64::i();
    let re = |x: f64| Complex64::new(x, 0.0);
    let sqrt2 = re(std::f64::consts::SQRT_2);
    let eta = re(params.eta);
    let g = re(params.g);
    let mw = Complex64::from_polar(params.omega_m, params.theta);
    let mw_conj = mw.conj();
    let d1 = re(params.delta_c + params.u0) - i * params.kappa;
    let d2 = re(2.0 * params.delta_c) - i * (params.kappa + params.gamma_g);
    let zero = re(0.0);

    // unknowns ordered (c0_up, c0_dn, c1_up, c1_dn, c2_up)
    let rows: [[Complex64; 5]; 5] = [
        [re(1.0), zero, zero, zero, zero],
        [zero, mw, eta, zero, zero],
        [zero, zero, eta, g, sqrt2 * d1],
        [zero, eta, mw_conj, d2, sqrt2 * g],
        [eta, g, d1, mw, sqrt2 * eta],
    ];
    let a = Mat::<Complex64>::from_fn(5, 5, |r, c| rows[r][c]);
    let sv = a
        .singular_values()
        .map_err(|_| Error::NearResonanceDegeneracy { condition: f64::INFINITY })?;
    let smax = sv.iter().copied().fold(0.0, f64::max);
    let smin = sv.iter().copied().fold(f64::INFINITY, f64::min);
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if !(condition <= MAX_CONDITION_NUMBER) {
        return Err(Error::NearResonanceDegeneracy { condition });
    }

    let mut rhs = Mat::<Complex64>::zeros(5, 1);
    rhs[(0, 0)] = re(1.0);
    let x = faer::prelude::Solve::solve(&a.partial_piv_lu(), &rhs);
    let [c0_up, c0_dn, c1_up, c1_dn, c2_up] = [0, 1, 2, 3, 4].map(|k| x[(k, 0)]);
    let dropped_residual =
        mw_conj * c0_up + g * c1_up + (re(params.delta_c) - i * params.gamma_g) * c0_dn + eta * c1_dn;
    Ok(WeakDriveAmplitudes { c0_up, c0_dn, c1_up, c1_dn, c2_up, condition, dropped_residual })
}

/// Truncated-wavefunction estimate `2|c₂|² / (|c1↑|² + |c1↓|² + 2|c₂|²)²`.
pub fn analytic_g2(amplitudes: &WeakDriveAmplitudes) -> Result<f64> {
    let two = 2.0 * amplitudes.c2_up.norm_sqr();
    let photons = amplitudes.c1_up.norm_sqr() + amplitudes.c1_dn.norm_sqr() + two;
    if photons == 0.0 {
        return Err(Error::UndefinedCorrelation("truncated state has no photons".into()));
    }
    Ok(two / (photons * photons))
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{FRAC_PI_2, PI};

    use super::*;

    fn amplitudes(c1_up: Complex64, c1_dn: Complex64, c2_up: Complex64) -> WeakDriveAmplitudes {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        WeakDriveAmplitudes { c0_up: one, c0_dn: zero, c1_up, c1_dn, c2_up, condition: 1.0, dropped_residual: zero }
    }

    #[test]
    fn phase_examples() {
        let forward = optimal_phase(1.0, 1.0, 0.001).unwrap();
        assert!((forward - 0.5005f64.atan()).abs() < 1e-15);
        assert!((forward - 0.46410).abs() < 1e-4);
        let backward = optimal_phase(-1.0, 1.0, 0.001).unwrap();
        assert!((backward - (PI - 0.5005f64.atan())).abs() < 1e-15);
        assert!((backward - 2.67749).abs() < 1e-4);
        assert_eq!(optimal_phase(0.0, 1.0, 0.0).unwrap(), FRAC_PI_2);
        assert!(optimal_phase(1e9, 1.0, 0.0).unwrap() < 1e-9);
        assert!(PI - optimal_phase(-1e9, 1.0, 0.0).unwrap() < 1e-9);
        assert_eq!(optimal_phase(0.0, 0.0, 0.0), Err(Error::UndefinedPhase));
    }

    #[test]
    fn microwave_examples() {
        let p = SystemParams { delta_c: 0.0, gamma_g: 0.0, g: 1.0, eta: 0.14142, ..Default::default() };
        assert!((optimal_microwave(&p).unwrap() - 0.22882).abs() < 5e-6);
        let strong = SystemParams { g: 1e8, ..p.clone() };
        assert!((optimal_microwave(&strong).unwrap() / p.eta - 1.0).abs() < 1e-7);
        let weak = SystemParams { g: 1e-4, ..p.clone() };
        let r = 1.0 / 1e-4;
        assert!((optimal_microwave(&weak).unwrap() / (p.eta * r) - 1.0).abs() < 1e-7);
        let none = SystemParams { g: 0.0, ..p };
        assert!(matches!(optimal_microwave(&none), Err(Error::DivisionByZero(_))));
    }

    #[test]
    fn optimum_nulls_two_photon_amplitude() {
        let base = SystemParams { g: 1.0, u0: -5.0, delta_c: 5.19258, eta: 0.14142, ..Default::default() };
        let p = optimal_conditions(&base).unwrap().apply_to(&base);
        let amp = weak_drive_amplitudes(&p).unwrap();
        assert!(amp.c2_up.norm() <= 1e-10 * p.eta * p.eta);
        assert!(analytic_g2(&amp).unwrap() < 1e-18);
    }

    #[test]
    fn no_interference_without_microwave() {
        let p = SystemParams { g: 0.8, u0: -1.0, delta_c: 0.7, eta: 0.1, omega_m: 0.0, ..Default::default() };
        let amp = weak_drive_amplitudes(&p).unwrap();
        assert!(amp.c2_up.norm() > 1e-6);
    }

    #[test]
    fn weak_drive_scaling() {
        // at Ωm = 0 the closure fixes c1_up = 0 and c0_dn = −η/g, so the
        // leading orders sit in c0_dn (linear) and c1_dn, c2_up (quadratic)
        let p = SystemParams { g: 1.0, u0: 0.0, delta_c: 1.0, eta: 1e-6, omega_m: 0.0, ..Default::default() };
        let a = weak_drive_amplitudes(&p).unwrap();
        let b = weak_drive_amplitudes(&SystemParams { eta: 2e-6, ..p }).unwrap();
        assert!((b.c0_dn.norm() / a.c0_dn.norm() - 2.0).abs() < 1e-6);
        assert!((b.c2_up.norm() / a.c2_up.norm() - 4.0).abs() < 1e-4);
        assert!((b.c1_dn.norm() / a.c1_dn.norm() - 4.0).abs() < 1e-4);
        assert!(a.condition < MAX_CONDITION_NUMBER);
    }

    #[test]
    fn linear_in_drive_at_fixed_ratio() {
        let base = SystemParams { g: 1.2, u0: -2.0, delta_c: 1.5, eta: 1e-4, omega_m: 3e-4, theta: 0.4, ..Default::default() };
        let a = weak_drive_amplitudes(&base).unwrap();
        let b = weak_drive_amplitudes(&SystemParams { eta: 2e-4, omega_m: 6e-4, ..base }).unwrap();
        assert!((b.c1_up.norm() / a.c1_up.norm() - 2.0).abs() < 1e-6);
        assert!((b.c0_dn.norm() / a.c0_dn.norm() - 2.0).abs() < 1e-6);
        assert!((b.c2_up.norm() / a.c2_up.norm() - 4.0).abs() < 1e-5);
    }

    #[test]
    fn estimator_limits() {
        let zero = Complex64::new(0.0, 0.0);
        let eps = Complex64::new(1e-4, 0.0);
        assert_eq!(analytic_g2(&amplitudes(eps, zero, zero)).unwrap(), 0.0);
        let coherent = amplitudes(eps, zero, eps * eps / std::f64::consts::SQRT_2);
        assert!((analytic_g2(&coherent).unwrap() - 1.0).abs() < 1e-6);
        assert!(matches!(analytic_g2(&amplitudes(zero, zero, zero)), Err(Error::UndefinedCorrelation(_))));
    }

    #[test]
    fn phase_range_and_microwave_bound() {
        for k in -40..=40 {
            let dc = k as f64 * 0.25;
            let theta = optimal_phase(dc, 1.0, 1e-3).unwrap();
            assert!((0.0..=PI).contains(&theta));
            let p = SystemParams { delta_c: dc, g: 0.7, eta: 0.1, ..Default::default() };
            assert!(optimal_microwave(&p).unwrap() >= p.eta);
        }
    }

    #[test]
    fn rejects_zero_drive() {
        let p = SystemParams { eta: 0.0, ..Default::default() };
        assert!(matches!(weak_drive_amplitudes(&p), Err(Error::InvalidArgument(_))));
    }
}
