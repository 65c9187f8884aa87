use blockade::hilbert::Basis;
use blockade::interference::{analytic_g2, optimal_conditions, weak_drive_amplitudes};
use blockade::liouvillian::{build_liouvillian, steady_state};
use blockade::model::SystemParams;
use blockade::observables::g2_zero;
use blockade::spectrum::{dressed_splitting, resonance_detuning, Branch};
use blockade::sweep::{find_optimum, run_sweep, Axis, AxisName, SweepMode, SweepSpec};

#[test]
fn map_argmin_follows_lower_branch() {
    let u0s = vec![-5.0, -4.0, -3.0, -2.0, -1.0];
    let spec = SweepSpec::new(
        SweepMode::MapG2Ns,
        SystemParams { g: 1.0, ..Default::default() },
        vec![Axis::linear(AxisName::DeltaC, -8.0, 8.0, 161), Axis::explicit(AxisName::U0, u0s.clone())],
    );
    let res = run_sweep(&spec).unwrap();
    let dc = res.column("delta_c").unwrap();
    let u0 = res.column("u0").unwrap();
    let g2 = res.column("g2_0").unwrap();
    let mut argmins = Vec::new();
    for &u in &u0s {
        let best = (0..dc.len())
            .filter(|&i| u0[i] == u)
            .min_by(|&a, &b| g2[a].total_cmp(&g2[b]))
            .unwrap();
        let target = -dressed_splitting(1, 1.0, u).unwrap().0;
        // the dip sits on the red side of the bare resonance, a few cells below it
        assert!(dc[best] > 0.0 && dc[best] <= target && target - dc[best] <= 0.5, "u0 {u}: {} vs {target}", dc[best]);
        argmins.push(dc[best]);
    }
    assert!(argmins.windows(2).all(|w| w[1] < w[0]), "{argmins:?}");
}

#[test]
fn cut_optimum_near_resonance() {
    let spec = SweepSpec::new(
        SweepMode::Cut,
        SystemParams { g: 1.0, u0: -5.0, ..Default::default() },
        vec![Axis::linear(AxisName::DeltaC, -8.0, 8.0, 401)],
    );
    let res = run_sweep(&spec).unwrap();
    let (row, value) = find_optimum(&res, "g2_0").unwrap();
    let dc = res.rows[row][res.column_index("delta_c").unwrap()];
    assert!((4.7..=5.19258).contains(&dc), "{dc}");
    assert!(value < 0.02, "{value}");
}

#[test]
fn resonant_point_is_strongly_antibunched() {
    let mut base = SystemParams { g: 1.0, u0: -5.0, ..Default::default() };
    base.delta_c = resonance_detuning(Branch::Lower, &base);
    let p = optimal_conditions(&base).unwrap().apply_to(&base);
    let g2 = g2_zero(&steady_state(&build_liouvillian(&p, Basis::new(8).unwrap())).unwrap()).unwrap();
    assert!((g2 - 0.02832).abs() < 1e-4, "{g2}");
    // the truncated ansatz has no two-photon amplitude here at all
    assert!(analytic_g2(&weak_drive_amplitudes(&p).unwrap()).unwrap() < 1e-20);
}

#[test]
fn jc_baseline_is_not_beaten_at_weak_coupling() {
    let mut spec = SweepSpec::new(
        SweepMode::GScanQiVsJc,
        SystemParams::default(),
        vec![Axis::explicit(AxisName::G, vec![0.2, 0.3]), Axis::linear(AxisName::DeltaC, 0.05, 12.0, 240).in_units_of_g()],
    );
    spec.jc_delta_c = Some(Axis::linear(AxisName::DeltaC, -4.0, 4.0, 161).in_units_of_g());
    let res = run_sweep(&spec).unwrap();
    for ratio in res.column("improvement").unwrap() {
        assert!((0.9..1.1).contains(&ratio), "{ratio}");
    }
}
