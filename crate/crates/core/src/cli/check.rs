//! Built-in invariant suite behind the `check` subcommand.

use faer::Mat;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::hilbert::{Basis, Spin};
use crate::interference::{optimal_conditions, weak_drive_amplitudes};
use crate::liouvillian::{build_liouvillian, steady_state, DensityMatrix, PropagationSettings};
use crate::model::SystemParams;
use crate::observables::{g2_zero, photon_dynamics, photon_number};
use crate::spectrum::{dressed_energy, numeric_spectrum, resonance_detuning, Branch};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn outcome(name: &'static str, value: f64, bound: f64) -> CheckOutcome {
    CheckOutcome { name, passed: value <= bound, detail: format!("{value:.3e} (bound {bound:.0e})") }
}

fn failed(name: &'static str, err: impl std::fmt::Display) -> CheckOutcome {
    CheckOutcome { name, passed: false, detail: err.to_string() }
}

pub fn run_checks() -> Vec<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    vec![
        spectrum_oracle(&mut rng),
        interference_nulling(),
        trace_preservation(&mut rng),
        coherent_cavity(),
        steady_state_invariants(),
        cavity_decay(),
    ]
}

fn spectrum_oracle(rng: &mut ChaCha8Rng) -> CheckOutcome {
    let basis = Basis::new(8).expect("n_max ≥ 1");
    let mut worst = 0.0_f64;
    for _ in 0..20 {
        let p = SystemParams {
            g: rng.random_range(0.1..5.0),
            u0: rng.random_range(-10.0..10.0),
            delta_c: rng.random_range(-10.0..10.0),
            eta: 0.0,
            omega_m: 0.0,
            ..Default::default()
        };
        let blocks = match numeric_spectrum(&p, basis) {
            Ok(b) => b,
            Err(e) => return failed("spectrum closed form", e),
        };
        for block in blocks.iter().filter(|b| b.complete && b.excitations >= 1) {
            let (lo, hi) = dressed_energy(block.excitations, &p).expect("tied detunings");
            worst = worst.max((block.eigenvalues[0] - lo).abs()).max((block.eigenvalues[1] - hi).abs());
        }
    }
    outcome("spectrum closed form", worst, 1e-10)
}

fn interference_nulling() -> CheckOutcome {
    let mut worst = 0.0_f64;
    for gi in 0..5 {
        for ui in 0..5 {
            for di in 0..5 {
                let base = SystemParams {
                    g: 0.2 + 0.9 * gi as f64,
                    u0: -5.0 + 2.5 * ui as f64,
                    delta_c: -6.0 + 3.0 * di as f64 + 0.1,
                    ..Default::default()
                };
                let res = optimal_conditions(&base)
                    .and_then(|c| weak_drive_amplitudes(&c.apply_to(&base)));
                match res {
                    Ok(a) => worst = worst.max(a.c2_up.norm() / (base.eta * base.eta)),
                    Err(e) => return failed("two-photon nulling", e),
                }
            }
        }
    }
    outcome("two-photon nulling", worst, 1e-10)
}

fn trace_preservation(rng: &mut ChaCha8Rng) -> CheckOutcome {
    let basis = Basis::new(4).expect("n_max ≥ 1");
    let p = SystemParams { g: 0.9, u0: -1.5, delta_c: 0.4, eta: 0.3, omega_m: 0.5, theta: 1.1, gamma_g: 0.2, gamma_d: 0.1, ..Default::default() };
    let l = build_liouvillian(&p, basis);
    let d = basis.dim();
    let mut worst = 0.0_f64;
    for _ in 0..5 {
        let g = Mat::from_fn(d, d, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let m = &g * g.adjoint();
        let tr: Complex64 = (0..d).map(|i| m[(i, i)]).sum();
        let rho = match DensityMatrix::from_matrix(basis, Mat::from_fn(d, d, |i, j| m[(i, j)] / tr)) {
            Ok(r) => r,
            Err(e) => return failed("generator trace", e),
        };
        let lr = l.apply(&rho).expect("same basis");
        worst = worst.max((0..d).map(|i| lr[(i, i)]).sum::<Complex64>().norm());
    }
    outcome("generator trace", worst, 1e-12)
}

fn coherent_cavity() -> CheckOutcome {
    let basis = Basis::new(10).expect("n_max ≥ 1");
    let p = SystemParams { g: 0.0, delta_c: 0.0, omega_m: 0.0, ..Default::default() };
    match steady_state(&build_liouvillian(&p, basis)) {
        Ok(rho) => {
            let n_err = (photon_number(&rho) - 4.0 * p.eta * p.eta).abs();
            let g2_err = g2_zero(&rho).map(|g| (g - 1.0).abs()).unwrap_or(f64::INFINITY);
            CheckOutcome {
                name: "coherent empty cavity",
                passed: n_err <= 1e-8 && g2_err <= 1e-6,
                detail: format!("photon number error {n_err:.3e}, g2 error {g2_err:.3e}"),
            }
        }
        Err(e) => failed("coherent empty cavity", e),
    }
}

fn steady_state_invariants() -> CheckOutcome {
    let basis = Basis::new(8).expect("n_max ≥ 1");
    let mut base = SystemParams { g: 1.0, u0: -5.0, ..Default::default() };
    base.delta_c = resonance_detuning(Branch::Lower, &base);
    let res = optimal_conditions(&base).map_err(|e| e.to_string()).and_then(|c| {
        let l = build_liouvillian(&c.apply_to(&base), basis);
        let rho = steady_state(&l).map_err(|e| e.to_string())?;
        rho.check(1e-10, 1e-10, -1e-8).map_err(|e| e.to_string())?;
        Ok(l.residual_norm(&rho))
    });
    match res {
        Ok(r) => outcome("steady-state invariants", r, 1e-10),
        Err(e) => failed("steady-state invariants", e),
    }
}

fn cavity_decay() -> CheckOutcome {
    let basis = Basis::new(2).expect("n_max ≥ 1");
    let p = SystemParams { g: 0.0, eta: 0.0, omega_m: 0.0, gamma_g: 0.0, gamma_d: 0.0, ..Default::default() };
    let rho0 = DensityMatrix::pure(basis, 1, Spin::Up).expect("within truncation");
    let times = [0.0, 0.5, 1.0, 2.0];
    let settings = PropagationSettings::default();
    match photon_dynamics(&p, &rho0, &times, &settings) {
        Ok(n) => {
            let worst = times.iter().zip(&n).map(|(t, v)| (v - (-t).exp()).abs()).fold(0.0, f64::max);
            outcome("cavity decay law", worst, 1e-9)
        }
        Err(e) => failed("cavity decay law", e),
    }
}
