//! System parameters and the effective rotating-frame Hamiltonian.
//!
//! All rates and detunings are in units of the cavity decay rate κ.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{cavity_annihilator, spin_lowering, Basis, Operator};

/// Empty-cavity photon number `(η/κ)²` of the reference configuration.
pub const REFERENCE_EMPTY_CAVITY_PHOTONS: f64 = 0.02;

/// Cavity decay rate of the reference high-finesse cavity, 2π × 147 kHz in rad/s.
pub const REFERENCE_KAPPA_RAD_PER_S: f64 = 2.0 * PI * 147.0e3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemParams {
    /// Raman coupling g.
    pub g: f64,
    /// Optical Stark shift U₀ (signed).
    pub u0: f64,
    /// Cavity-light detuning Δc.
    pub delta_c: f64,
    /// Two-photon detuning Δa; `None` ties it to Δc.
    pub delta_a: Option<f64>,
    /// Cavity drive amplitude η.
    pub eta: f64,
    /// Microwave Rabi frequency Ωm.
    pub omega_m: f64,
    /// Microwave phase θ in radians.
    pub theta: f64,
    pub kappa: f64,
    /// Ground-state loss γ_g.
    pub gamma_g: f64,
    /// Pure dephasing γ_d.
    pub gamma_d: f64,
    /// Physical κ in rad/s, used only to convert times for output.
    pub kappa_hz: Option<f64>,
}

impl Default for SystemParams {
    fn default() -> Self {
        Self {
            g: 1.0,
            u0: 0.0,
            delta_c: 0.0,
            delta_a: None,
            eta: REFERENCE_EMPTY_CAVITY_PHOTONS.sqrt(),
            omega_m: 0.0,
            theta: 0.0,
            kappa: 1.0,
            gamma_g: 1.0e-3,
            gamma_d: 1.0e-3,
            kappa_hz: None,
        }
    }
}

impl SystemParams {
    pub fn two_photon_detuning(&self) -> f64 {
        self.delta_a.unwrap_or(self.delta_c)
    }

    /// Whether Δa = Δc, the condition under which the dressed ladder has a
    /// closed form.
    pub fn detunings_tied(&self) -> bool {
        let da = self.two_photon_detuning();
        (da - self.delta_c).abs() <= 1e-12 * self.delta_c.abs().max(1.0)
    }

    /// Every violated constraint, not just the first.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let finite = [
            ("g", self.g),
            ("u0", self.u0),
            ("delta_c", self.delta_c),
            ("eta", self.eta),
            ("omega_m", self.omega_m),
            ("theta", self.theta),
            ("kappa", self.kappa),
            ("gamma_g", self.gamma_g),
            ("gamma_d", self.gamma_d),
            ("delta_a", self.two_photon_detuning()),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                out.push(format!("{name} must be finite, got {v}"));
            }
        }
        if !(self.kappa > 0.0) {
            out.push(format!("kappa must be positive, got {}", self.kappa));
        }
        for (name, v) in [
            ("gamma_g", self.gamma_g),
            ("gamma_d", self.gamma_d),
            ("eta", self.eta),
            ("omega_m", self.omega_m),
            ("g", self.g),
        ] {
            if v < 0.0 {
                out.push(format!("{name} must be non-negative, got {v}"));
            }
        }
        if !(0.0..2.0 * PI).contains(&self.theta) {
            out.push(format!("theta must lie in [0, 2π), got {}", self.theta));
        }
        if let Some(k) = self.kappa_hz {
            if !(k > 0.0 && k.is_finite()) {
                out.push(format!("kappa_hz must be positive, got {k}"));
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidArgument(v.join("; ")))
        }
    }

    /// Convert a time in units of 1/κ to microseconds, if κ is known physically.
    pub fn time_in_us(&self, t_kappa: f64) -> Option<f64> {
        self.kappa_hz.map(|k| t_kappa * self.kappa / k * 1.0e6)
    }
}

/// Bare three-level parameters before adiabatic elimination of |e⟩.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RawAtomParams {
    pub g0: f64,
    pub omega: f64,
    pub delta: f64,
}

impl RawAtomParams {
    /// Elimination validity warnings: |g₀/Δ| and |Ω/Δ| above 0.1.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.delta != 0.0 {
            for (name, v) in [("g0", self.g0), ("omega", self.omega)] {
                let ratio = (v / self.delta).abs();
                if ratio > 0.1 {
                    out.push(format!(
                        "|{name}/delta| = {ratio:.3} exceeds 0.1; adiabatic elimination may be inaccurate"
                    ));
                }
            }
        }
        out
    }
}

/// Effective `(g, U₀) = (−Ω g₀/Δ, −g₀²/Δ)` from the bare parameters.
pub fn derive_effective(raw: &RawAtomParams) -> Result<(f64, f64)> {
    if raw.delta == 0.0 {
        return Err(Error::DivisionByZero("atom-pump detuning delta is zero"));
    }
    Ok((-raw.omega * raw.g0 / raw.delta, -raw.g0 * raw.g0 / raw.delta))
}

/// Effective Hamiltonian
/// `H = Δc â†â + (U₀ â†â − Δa)|↑⟩⟨↑| + η(â† + â) + [(g â† + Ωm e^{iθ}) σ₋ + h.c.]`.
pub fn hamiltonian(params: &SystemParams, basis: Basis) -> Operator {
    let a = cavity_annihilator(basis);
    let a_dag = a.adjoint();
    let sigma_minus = spin_lowering(basis);
    let identity = Operator::identity(basis);
    let number = &a_dag * &a;
    let up_projector = &sigma_minus * &sigma_minus.adjoint();

    let real = |x: f64| Complex64::new(x, 0.0);

    let free = number.scaled(real(params.delta_c));
    let stark = &(&number.scaled(real(params.u0)) - &identity.scaled(real(params.two_photon_detuning())))
        * &up_projector;
    let drive = (&a_dag + &a).scaled(real(params.eta));
    let raising_part = &(&a_dag.scaled(real(params.g))
        + &identity.scaled(Complex64::from_polar(params.omega_m, params.theta)))
        * &sigma_minus;
    let coupling = &raising_part + &raising_part.adjoint();

    &(&(&free + &stark) + &drive) + &coupling
}

/// Total excitation operator `N̂ = â†â + |↓⟩⟨↓|`.
pub fn excitation_number(basis: Basis) -> Operator {
    let a = cavity_annihilator(basis);
    let sm = spin_lowering(basis);
    &(&a.adjoint() * &a) + &(&sm.adjoint() * &sm)
}
