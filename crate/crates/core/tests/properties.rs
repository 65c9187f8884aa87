use blockade::hilbert::{cavity_annihilator, spin_lowering, Basis, Operator, Spin};
use blockade::interference::{optimal_conditions, optimal_phase, weak_drive_amplitudes};
use blockade::liouvillian::{build_liouvillian, propagate, steady_state, DensityMatrix, PropagationSettings};
use blockade::model::{excitation_number, hamiltonian, SystemParams};
use blockade::observables::{g2_tau, g2_zero};
use blockade::spectrum::{dressed_splitting, resonance_detuning, Branch};
use faer::Mat;
use num_complex::Complex64;
use proptest::prelude::*;

fn params() -> impl Strategy<Value = SystemParams> {
    (
        (0.0..3.0, -6.0..6.0, -6.0..6.0, -2.0..2.0),
        (0.0..0.4, 0.0..1.0, 0.0..std::f64::consts::TAU),
        (0.0..1.0, 0.0..1.0),
    )
        .prop_map(|((g, u0, delta_c, delta_a), (eta, omega_m, theta), (gamma_g, gamma_d))| SystemParams {
            g,
            u0,
            delta_c,
            delta_a: Some(delta_a),
            eta,
            omega_m,
            theta,
            gamma_g,
            gamma_d,
            ..Default::default()
        })
}

/// A full-rank random state from the entries of `G`, as `G G† / Tr`.
fn random_state(basis: Basis, entries: &[(f64, f64)]) -> DensityMatrix {
    let d = basis.dim();
    let g = Mat::from_fn(d, d, |i, j| {
        let (re, im) = entries[(i * d + j) % entries.len()];
        Complex64::new(re + if i == j { 1.0 } else { 0.0 }, im)
    });
    let m = &g * g.adjoint();
    let tr: Complex64 = (0..d).map(|i| m[(i, i)]).sum();
    DensityMatrix::from_matrix(basis, Mat::from_fn(d, d, |i, j| m[(i, j)] / tr)).unwrap()
}

proptest! {
    #[test]
    fn basis_index_is_a_bijection(n_max in 1usize..30) {
        let b = Basis::new(n_max).unwrap();
        prop_assert_eq!(b.dim(), 2 * (n_max + 1));
        for i in 0..b.dim() {
            let (n, s) = b.state(i).unwrap();
            prop_assert_eq!(b.index(n, s), Some(i));
        }
    }

    #[test]
    fn hamiltonian_is_hermitian(p in params(), n_max in 1usize..10) {
        let h = hamiltonian(&p, Basis::new(n_max).unwrap());
        prop_assert!(h.hermiticity_defect() <= 1e-12);
    }

    #[test]
    fn conserving_hamiltonian_commutes_with_excitations(p in params(), n_max in 1usize..10) {
        let p = SystemParams { eta: 0.0, omega_m: 0.0, ..p };
        let b = Basis::new(n_max).unwrap();
        prop_assert!(hamiltonian(&p, b).commutator(&excitation_number(b)).max_abs() <= 1e-12);
    }

    #[test]
    fn phase_drops_out_without_microwave(p in params(), theta in 0.0..std::f64::consts::TAU) {
        let b = Basis::new(4).unwrap();
        let a = hamiltonian(&SystemParams { omega_m: 0.0, ..p.clone() }, b);
        let c = hamiltonian(&SystemParams { omega_m: 0.0, theta, ..p }, b);
        prop_assert_eq!(a.elements(), c.elements());
    }

    #[test]
    fn operator_algebra(n_max in 1usize..12) {
        let b = Basis::new(n_max).unwrap();
        let a = cavity_annihilator(b);
        let s = spin_lowering(b);
        let id = Operator::identity(b);
        let comm = &(&a * &a.adjoint()) - &(&a.adjoint() * &a);
        for i in 0..b.dim() {
            for j in 0..b.dim() {
                let (n, _) = b.state(i).unwrap();
                if n < n_max {
                    prop_assert!((comm.get(i, j) - id.get(i, j)).norm() <= 1e-12);
                }
            }
        }
        let num = &a.adjoint() * &a;
        for i in 0..b.dim() {
            let (n, _) = b.state(i).unwrap();
            prop_assert!((num.get(i, i).re - n as f64).abs() <= 1e-12);
        }
        prop_assert!((&s * &s).max_abs() == 0.0);
        let anti = &(&s.adjoint() * &s) + &(&s * &s.adjoint());
        prop_assert!((&anti - &id).max_abs() <= 1e-15);
    }

    #[test]
    fn splitting_gap_and_mirror(n in 1usize..10, g in 0.0..5.0, u0 in -10.0..10.0) {
        let (lo, hi) = dressed_splitting(n, g, u0).unwrap();
        let nf = n as f64;
        prop_assert!(((hi - lo) - (nf * nf * u0 * u0 + 4.0 * nf * g * g).sqrt()).abs() <= 1e-10);
        prop_assert!(hi >= lo);
        let (mlo, mhi) = dressed_splitting(n, g, -u0).unwrap();
        prop_assert!((mlo + hi).abs() <= 1e-12 && (mhi + lo).abs() <= 1e-12);
        let (wlo, whi) = dressed_splitting(n + 1, g, u0).unwrap();
        prop_assert!(whi - wlo >= hi - lo);
        let (slo, shi) = dressed_splitting(n, g, u0.abs() + 0.5).unwrap();
        prop_assert!(shi - slo >= hi - lo);
    }

    #[test]
    fn optimal_conditions_null_two_photon_amplitude(
        g in 0.1..5.0,
        u0 in -10.0..10.0,
        delta_c in -10.0..10.0,
        eta in 0.01..0.3,
        gamma_g in 0.0..0.5,
    ) {
        let base = SystemParams { g, u0, delta_c, eta, gamma_g, ..Default::default() };
        let c = optimal_conditions(&base).unwrap();
        prop_assert!((0.0..=std::f64::consts::PI).contains(&c.theta_opt));
        prop_assert!(c.omega_m_opt >= eta);
        let amps = weak_drive_amplitudes(&c.apply_to(&base)).unwrap();
        prop_assert!(amps.c2_up.norm() <= 1e-10 * eta * eta);
    }

    #[test]
    fn optimal_phase_is_continuous_on_each_half_line(delta_c in 1e-3..20.0, gamma_g in 0.0..1.0) {
        let h = 1e-7;
        for s in [1.0, -1.0] {
            let a = optimal_phase(s * delta_c, 1.0, gamma_g).unwrap();
            let b = optimal_phase(s * (delta_c + h), 1.0, gamma_g).unwrap();
            prop_assert!((a - b).abs() <= 1e-6);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn generator_preserves_trace(p in params(), entries in prop::collection::vec((-1.0..1.0, -1.0..1.0), 16)) {
        let b = Basis::new(4).unwrap();
        let l = build_liouvillian(&p, b);
        let lr = l.apply(&random_state(b, &entries)).unwrap();
        let tr: Complex64 = (0..b.dim()).map(|i| lr[(i, i)]).sum();
        prop_assert!(tr.norm() <= 1e-12);
    }

    #[test]
    fn propagation_keeps_states_physical(p in params(), entries in prop::collection::vec((-1.0..1.0, -1.0..1.0), 16)) {
        let b = Basis::new(3).unwrap();
        let l = build_liouvillian(&p, b);
        let times: Vec<f64> = (0..=10).map(|k| 0.5 * k as f64).collect();
        let traj = propagate(&random_state(b, &entries), &l, &times, &PropagationSettings::default()).unwrap();
        for s in &traj {
            prop_assert!(s.hermiticity_defect() <= 1e-9);
            prop_assert!((s.trace() - 1.0).norm() <= 1e-8);
            prop_assert!(s.min_eigenvalue() >= -1e-7);
        }
    }

    #[test]
    fn steady_state_is_a_fixed_point(p in params(), t in 0.1..5.0) {
        let p = SystemParams { gamma_g: p.gamma_g + 0.05, ..p };
        let b = Basis::new(3).unwrap();
        let l = build_liouvillian(&p, b);
        let rho = steady_state(&l).unwrap();
        let traj = propagate(&rho, &l, &[0.0, t], &PropagationSettings::default()).unwrap();
        prop_assert!(traj[1].max_abs_difference(&rho) <= 1e-8);
    }

    #[test]
    fn undriven_spectrum_is_stable(p in params()) {
        let p = SystemParams { eta: 0.0, omega_m: 0.0, ..p };
        let l = build_liouvillian(&p, Basis::new(2).unwrap());
        let worst = l.eigenvalues().unwrap().iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(worst <= 1e-10);
    }

    #[test]
    fn g2_is_intensity_normalized_at_weak_drive(
        p in params(),
        eta in 0.005..0.02,
        c in 0.5..2.0,
    ) {
        let b = Basis::new(6).unwrap();
        let p = SystemParams { g: p.g + 0.1, eta, omega_m: p.omega_m * eta, gamma_g: p.gamma_g + 0.01, delta_a: None, ..p };
        let scaled = SystemParams { eta: c * p.eta, omega_m: c * p.omega_m, ..p.clone() };
        let a = g2_zero(&steady_state(&build_liouvillian(&p, b)).unwrap()).unwrap();
        let s = g2_zero(&steady_state(&build_liouvillian(&scaled, b)).unwrap()).unwrap();
        prop_assert!((s - a).abs() <= 0.05 * a, "g2 {} -> {}", a, s);
    }

    #[test]
    fn coherent_cavity_has_flat_correlation(eta in 0.01..0.3, delta_c in -2.0..2.0) {
        let b = Basis::new(10).unwrap();
        let p = SystemParams { g: 0.0, omega_m: 0.0, eta, delta_c, ..Default::default() };
        let l = build_liouvillian(&p, b);
        let rho = steady_state(&l).unwrap();
        let taus: Vec<f64> = (0..=10).map(|k| k as f64 * 0.5).collect();
        let series = g2_tau(&rho, &l, &taus, &PropagationSettings::default()).unwrap();
        for v in &series.values {
            prop_assert!((v - 1.0).abs() <= 1e-6);
        }
    }
}

#[test]
fn spin_projector_matches_definition() {
    let b = Basis::new(3).unwrap();
    let s = spin_lowering(b);
    let proj = &s.adjoint() * &s;
    for n in 0..=3 {
        for spin in [Spin::Up, Spin::Down] {
            let i = b.index(n, spin).unwrap();
            let want = if spin == Spin::Down { 1.0 } else { 0.0 };
            assert_eq!(proj.get(i, i).re, want);
        }
    }
}

#[test]
fn interference_residue_grows_with_drive() {
    let b = Basis::new(8).unwrap();
    let values: Vec<f64> = [0.025, 0.05, 0.1, 0.14142, 0.2]
        .iter()
        .map(|&eta| {
            let mut base = SystemParams { g: 1.0, u0: -5.0, eta, ..Default::default() };
            base.delta_c = resonance_detuning(Branch::Lower, &base);
            let p = optimal_conditions(&base).unwrap().apply_to(&base);
            g2_zero(&steady_state(&build_liouvillian(&p, b)).unwrap()).unwrap()
        })
        .collect();
    assert!(values.windows(2).all(|w| w[1] > w[0]), "{values:?}");
    assert!(values[4] > 4.0 * values[2], "{values:?}");
}
