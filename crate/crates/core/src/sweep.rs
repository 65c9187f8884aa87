//! Parameter sweeps over detuning, Stark shift, coupling and time.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{Basis, Spin};
use crate::interference::{optimal_conditions, weak_drive_amplitudes};
use crate::liouvillian::{
    build_liouvillian, propagate, steady_state_with_tolerance, DensityMatrix, PropagationSettings,
    STEADY_STATE_RESIDUAL_TOLERANCE,
};
use crate::model::SystemParams;
use crate::observables::{g2_tau, g2_zero, photon_number};
use crate::spectrum::{resonance_detuning, Branch};

/// Environment variable overriding the worker count.
pub const WORKERS_ENV: &str = "BLOCKADE_WORKERS";

/// Every `SPOT_CHECK_STRIDE`-th grid point is checked against the weak-drive oracle.
pub const SPOT_CHECK_STRIDE: usize = 20;

/// Bound on `|c₂↑|/η²` at the optimal interference conditions.
pub const SPOT_CHECK_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisName {
    DeltaC,
    U0,
    G,
    T,
}

impl AxisName {
    pub fn as_str(self) -> &'static str {
        match self {
            AxisName::DeltaC => "delta_c",
            AxisName::U0 => "u0",
            AxisName::G => "g",
            AxisName::T => "t",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    #[default]
    Linear,
}

/// Units of an axis: κ, or multiples of the point's coupling g.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisUnits {
    #[default]
    Kappa,
    G,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub name: AxisName,
    #[serde(default)]
    pub min: f64,
    #[serde(default)]
    pub max: f64,
    #[serde(default)]
    pub count: usize,
    #[serde(default)]
    pub spacing: Spacing,
    /// Explicit grid, replacing min/max/count.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(default)]
    pub units: AxisUnits,
}

impl Axis {
    pub fn linear(name: AxisName, min: f64, max: f64, count: usize) -> Self {
        Self { name, min, max, count, spacing: Spacing::Linear, values: None, units: AxisUnits::Kappa }
    }

    pub fn explicit(name: AxisName, values: Vec<f64>) -> Self {
        Self { values: Some(values), ..Self::linear(name, 0.0, 0.0, 0) }
    }

    pub fn in_units_of_g(self) -> Self {
        Self { units: AxisUnits::G, ..self }
    }

    pub fn grid(&self) -> Vec<f64> {
        if let Some(v) = &self.values {
            return v.clone();
        }
        let step = (self.max - self.min) / (self.count - 1) as f64;
        (0..self.count)
            .map(|k| if k + 1 == self.count { self.max } else { self.min + step * k as f64 })
            .collect()
    }

    /// Grid spacing, or the smallest gap of an explicit grid.
    pub fn cell(&self) -> f64 {
        let g = self.grid();
        g.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
    }

    fn problems(&self) -> Vec<String> {
        let name = self.name.as_str();
        let mut out = Vec::new();
        match &self.values {
            Some(v) => {
                if v.len() < 2 {
                    out.push(format!("axis {name}: explicit grid needs at least 2 values"));
                }
                if v.iter().any(|x| !x.is_finite()) || v.windows(2).any(|w| !(w[1] > w[0])) {
                    out.push(format!("axis {name}: explicit grid must be finite and strictly ascending"));
                }
            }
            None => {
                if self.count < 2 {
                    out.push(format!("axis {name}: count must be at least 2, got {}", self.count));
                }
                if !(self.min < self.max) || !self.min.is_finite() || !self.max.is_finite() {
                    out.push(format!("axis {name}: need finite min < max, got [{}, {}]", self.min, self.max));
                }
            }
        }
        out
    }

    fn first(&self) -> f64 {
        match &self.values {
            Some(v) => v.first().copied().unwrap_or(f64::NAN),
            None => self.min,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepMode {
    /// g²(0) and n_s over the (Δc, U₀) plane.
    MapG2Ns,
    /// g²(0) and n_s along Δc.
    Cut,
    /// Minimum of g²(0) over Δc for each U₀.
    OptimumVsU0,
    /// Interference-assisted minimum against the Jaynes-Cummings baseline versus g.
    GScanQiVsJc,
    /// Delayed intensity correlation at one parameter point.
    G2Tau,
    /// Photon number from the vacuum versus time, per U₀.
    Dynamics,
}

impl SweepMode {
    fn required_axes(self) -> (&'static [AxisName], &'static [AxisName]) {
        use AxisName::*;
        match self {
            SweepMode::MapG2Ns => (&[DeltaC, U0], &[]),
            SweepMode::Cut => (&[DeltaC], &[]),
            SweepMode::OptimumVsU0 => (&[U0, DeltaC], &[]),
            SweepMode::GScanQiVsJc => (&[G, DeltaC], &[]),
            SweepMode::G2Tau => (&[T], &[]),
            SweepMode::Dynamics => (&[T], &[U0]),
        }
    }
}

/// How θ and Ωm are chosen at each point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interference {
    /// Recomputed from the point's Δc.
    #[default]
    Optimal,
    /// Ωm = 0.
    Off,
    /// θ and Ωm taken from the fixed parameters.
    Manual,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub fixed: SystemParams,
    pub mode: SweepMode,
    pub axes: Vec<Axis>,
    pub interference: Interference,
    /// Puts Δc on the single-photon resonance of this branch (g2_tau, dynamics).
    pub resonance: Option<Branch>,
    /// Stark shift per unit coupling in the g scan.
    pub u0_per_g: f64,
    /// Δc grid for the baseline in the g scan; defaults to the main Δc axis.
    pub jc_delta_c: Option<Axis>,
    pub n_max: usize,
    pub settings: PropagationSettings,
    pub steady_state_tolerance: f64,
}

impl SweepSpec {
    pub fn new(mode: SweepMode, fixed: SystemParams, axes: Vec<Axis>) -> Self {
        Self {
            fixed,
            mode,
            axes,
            interference: Interference::Optimal,
            resonance: None,
            u0_per_g: -5.0,
            jc_delta_c: None,
            n_max: 8,
            settings: PropagationSettings::default(),
            steady_state_tolerance: STEADY_STATE_RESIDUAL_TOLERANCE,
        }
    }

    pub fn axis(&self, name: AxisName) -> Option<&Axis> {
        self.axes.iter().find(|a| a.name == name)
    }

    /// All problems with the specification.
    pub fn problems(&self) -> Vec<String> {
        let mut out: Vec<String> = self.fixed.violations();
        let (required, optional) = self.mode.required_axes();
        for name in required {
            if self.axis(*name).is_none() {
                out.push(format!("mode {:?} requires a {} axis", self.mode, name.as_str()));
            }
        }
        for axis in &self.axes {
            if !required.contains(&axis.name) && !optional.contains(&axis.name) {
                out.push(format!("axis {} is not used by mode {:?}", axis.name.as_str(), self.mode));
            }
            if self.axes.iter().filter(|a| a.name == axis.name).count() > 1 {
                out.push(format!("axis {} given more than once", axis.name.as_str()));
            }
            if axis.units == AxisUnits::G && !(axis.name == AxisName::DeltaC && self.mode == SweepMode::GScanQiVsJc) {
                out.push(format!("axis {}: units of g are only supported for delta_c in the g scan", axis.name.as_str()));
            }
            out.extend(axis.problems());
        }
        if let Some(axis) = &self.jc_delta_c {
            if axis.name != AxisName::DeltaC {
                out.push("jc_delta_c must be a delta_c axis".into());
            }
            if self.mode != SweepMode::GScanQiVsJc {
                out.push("jc_delta_c is only used by the g scan".into());
            }
            out.extend(axis.problems());
        }
        if let Some(t) = self.axis(AxisName::T) {
            let t0 = t.first();
            if self.mode == SweepMode::G2Tau && t0 != 0.0 {
                out.push(format!("g2_tau delays must start at 0, got {t0}"));
            }
            if t0 < 0.0 {
                out.push(format!("times must be non-negative, got {t0}"));
            }
        }
        if let Some(g) = self.axis(AxisName::G) {
            if g.first() <= 0.0 {
                out.push("g axis must be positive".into());
            }
        }
        if self.resonance.is_some() && !matches!(self.mode, SweepMode::G2Tau | SweepMode::Dynamics) {
            out.push("resonance applies only to g2_tau and dynamics".into());
        }
        if self.n_max < 1 {
            out.push(format!("n_max must be at least 1, got {}", self.n_max));
        }
        if !(self.steady_state_tolerance > 0.0) {
            out.push("steady-state tolerance must be positive".into());
        }
        if !(self.settings.step > 0.0) || !(self.settings.tolerance > 0.0) {
            out.push("propagation step and tolerance must be positive".into());
        }
        if !self.u0_per_g.is_finite() {
            out.push("u0_per_g must be finite".into());
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.problems();
        if p.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidSweep(p.join("; ")))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpotCheck {
    pub stride: usize,
    pub checked: usize,
    pub skipped: usize,
    pub max_c2_over_eta2: f64,
    pub violations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub version: String,
    pub mode: SweepMode,
    pub parameters: SystemParams,
    pub axes: Vec<Axis>,
    pub interference: Interference,
    pub resonance: Option<Branch>,
    pub u0_per_g: Option<f64>,
    pub jc_delta_c: Option<Axis>,
    pub n_max: usize,
    pub steady_state_tolerance: f64,
    pub propagation: PropagationSettings,
    pub total_points: usize,
    pub failed_points: usize,
    pub failures: BTreeMap<String, usize>,
    pub spot_check: Option<SpotCheck>,
    /// `key=value` overrides applied on top of the configuration file.
    pub overrides: Vec<String>,
}

impl Metadata {
    pub fn failure_fraction(&self) -> f64 {
        if self.total_points == 0 {
            0.0
        } else {
            self.failed_points as f64 / self.total_points as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    /// "ok" or an error code, per row.
    pub status: Vec<String>,
    pub metadata: Metadata,
}

impl SweepResult {
    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.column_index(name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    pub fn ok(&self, row: usize) -> bool {
        self.status[row] == OK
    }
}

const OK: &str = "ok";

/// Steady-state observables at one parameter point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointResult {
    pub n_s: f64,
    pub g2_0: f64,
    pub theta: f64,
    pub omega_m: f64,
}

/// Parameters after applying the interference rule.
pub fn with_interference(params: &SystemParams, interference: Interference) -> Result<SystemParams> {
    match interference {
        Interference::Optimal => Ok(optimal_conditions(params)?.apply_to(params)),
        Interference::Off => Ok(SystemParams { omega_m: 0.0, ..params.clone() }),
        Interference::Manual => Ok(params.clone()),
    }
}

/// Builds the generator, solves for the steady state and evaluates n_s and g²(0).
pub fn evaluate_point(
    params: &SystemParams,
    interference: Interference,
    basis: Basis,
    tolerance: f64,
) -> Result<PointResult> {
    let p = with_interference(params, interference)?;
    p.validate()?;
    let rho = steady_state_with_tolerance(&build_liouvillian(&p, basis), tolerance)?;
    Ok(PointResult { n_s: photon_number(&rho), g2_0: g2_zero(&rho)?, theta: p.theta, omega_m: p.omega_m })
}

fn worker_count() -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
}

/// Runs the sweep on a pool sized by [`WORKERS_ENV`].
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    run_sweep_with_workers(spec, worker_count())
}

/// Runs the sweep on `workers` threads; results do not depend on the count.
pub fn run_sweep_with_workers(spec: &SweepSpec, workers: usize) -> Result<SweepResult> {
    spec.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidSweep(format!("cannot start worker pool: {e}")))?;
    pool.install(|| run_validated(spec))
}

struct Evaluations {
    results: Vec<Result<PointResult>>,
}

impl Evaluations {
    fn failures(&self) -> BTreeMap<String, usize> {
        let mut m = BTreeMap::new();
        for r in &self.results {
            if let Err(e) = r {
                *m.entry(e.code().to_string()).or_insert(0) += 1;
            }
        }
        m
    }
}

fn evaluate_all(spec: &SweepSpec, points: &[(SystemParams, Interference)]) -> Evaluations {
    let basis = Basis::new(spec.n_max).expect("validated n_max");
    let results = points
        .par_iter()
        .map(|(p, i)| evaluate_point(p, *i, basis, spec.steady_state_tolerance))
        .collect();
    Evaluations { results }
}

/// Columns, rows, per-row status, point count and failure tally.
type Table = (Vec<&'static str>, Vec<Vec<f64>>, Vec<String>, usize, BTreeMap<String, usize>);

fn run_validated(spec: &SweepSpec) -> Result<SweepResult> {
    let fixed = &spec.fixed;
    let grid = |name| spec.axis(name).map(Axis::grid).unwrap_or_default();
    let mut spot_points = Vec::new();

    let (columns, rows, status, total, failures): Table =
        match spec.mode {
            SweepMode::MapG2Ns | SweepMode::Cut => {
                let u0s = if spec.mode == SweepMode::Cut { vec![fixed.u0] } else { grid(AxisName::U0) };
                let dcs = grid(AxisName::DeltaC);
                let points: Vec<_> = u0s
                    .iter()
                    .flat_map(|&u0| {
                        dcs.iter().map(move |&delta_c| (SystemParams { u0, delta_c, ..fixed.clone() }, spec.interference))
                    })
                    .collect();
                let ev = evaluate_all(spec, &points);
                spot_points.extend(points.iter().map(|(p, _)| p.clone()));
                let mut rows = Vec::with_capacity(points.len());
                let mut status = Vec::with_capacity(points.len());
                for ((p, _), r) in points.iter().zip(&ev.results) {
                    let (values, s) = match r {
                        Ok(v) => ([v.n_s, v.g2_0, v.theta, v.omega_m], OK.to_string()),
                        Err(e) => ([f64::NAN; 4], e.code().to_string()),
                    };
                    rows.push(vec![p.delta_c, p.u0, values[0], values[1], values[2], values[3]]);
                    status.push(s);
                }
                let cols = vec!["delta_c", "u0", "n_s", "g2_0", "theta_opt", "omega_m_opt"];
                (cols, rows, status, points.len(), ev.failures())
            }
            SweepMode::OptimumVsU0 => {
                let u0s = grid(AxisName::U0);
                let dcs = grid(AxisName::DeltaC);
                let points: Vec<_> = u0s
                    .iter()
                    .flat_map(|&u0| {
                        dcs.iter().map(move |&delta_c| (SystemParams { u0, delta_c, ..fixed.clone() }, spec.interference))
                    })
                    .collect();
                let ev = evaluate_all(spec, &points);
                spot_points.extend(points.iter().map(|(p, _)| p.clone()));
                let mut rows = Vec::new();
                let mut status = Vec::new();
                for (k, &u0) in u0s.iter().enumerate() {
                    let chunk = &ev.results[k * dcs.len()..(k + 1) * dcs.len()];
                    match argmin(&dcs, chunk) {
                        Some((j, v)) => {
                            rows.push(vec![u0, dcs[j], v.g2_0, v.n_s, v.theta, v.omega_m]);
                            status.push(OK.to_string());
                        }
                        None => {
                            rows.push(vec![u0, f64::NAN, f64::NAN, f64::NAN, f64::NAN, f64::NAN]);
                            status.push(first_error(chunk));
                        }
                    }
                }
                let cols = vec!["u0", "delta_c_opt", "g2_opt", "n_s_opt", "theta_opt", "omega_m_opt"];
                (cols, rows, status, points.len(), ev.failures())
            }
            SweepMode::GScanQiVsJc => {
                let gs = grid(AxisName::G);
                let qi_axis = spec.axis(AxisName::DeltaC).expect("validated");
                let jc_axis = spec.jc_delta_c.as_ref().unwrap_or(qi_axis);
                let scaled = |axis: &Axis, g: f64| -> Vec<f64> {
                    let factor = if axis.units == AxisUnits::G { g } else { 1.0 };
                    axis.grid().into_iter().map(|x| x * factor).collect()
                };
                let mut points = Vec::new();
                let mut blocks = Vec::new();
                for &g in &gs {
                    let u0 = spec.u0_per_g * g;
                    let qi = scaled(qi_axis, g);
                    let jc = scaled(jc_axis, g);
                    let start = points.len();
                    points.extend(qi.iter().map(|&delta_c| {
                        (SystemParams { g, u0, delta_c, ..fixed.clone() }, spec.interference)
                    }));
                    spot_points.extend(points[start..].iter().map(|(p, _)| p.clone()));
                    let mid = points.len();
                    points.extend(jc.iter().map(|&delta_c| {
                        (SystemParams { g, u0: 0.0, delta_c, omega_m: 0.0, ..fixed.clone() }, Interference::Off)
                    }));
                    blocks.push((g, u0, start, mid, points.len(), qi, jc));
                }
                let ev = evaluate_all(spec, &points);
                let mut rows = Vec::new();
                let mut status = Vec::new();
                for (g, u0, start, mid, end, qi, jc) in blocks {
                    let best_qi = argmin(&qi, &ev.results[start..mid]);
                    let best_jc = argmin(&jc, &ev.results[mid..end]);
                    match (best_qi, best_jc) {
                        (Some((i, q)), Some((j, b))) => {
                            rows.push(vec![g, u0, qi[i], q.g2_0, q.n_s, jc[j], b.g2_0, b.n_s, b.g2_0 / q.g2_0]);
                            status.push(OK.to_string());
                        }
                        (q, _) => {
                            let mut row = vec![g, u0];
                            row.extend([f64::NAN; 7]);
                            rows.push(row);
                            let failed = if q.is_none() { start..mid } else { mid..end };
                            status.push(first_error(&ev.results[failed]));
                        }
                    }
                }
                let cols = vec![
                    "g", "u0", "delta_c_qi", "g2_qi", "n_s_qi", "delta_c_jc", "g2_jc", "n_s_jc", "improvement",
                ];
                (cols, rows, status, points.len(), ev.failures())
            }
            SweepMode::G2Tau => {
                let taus = grid(AxisName::T);
                let params = resonant(spec, fixed.clone());
                let mut failures = BTreeMap::new();
                let mut rows = Vec::with_capacity(taus.len());
                let mut status = Vec::with_capacity(taus.len());
                spot_points.push(params.clone());
                match correlation(spec, &params, &taus) {
                    Ok(values) => {
                        for (&t, v) in taus.iter().zip(values) {
                            rows.push(time_row(fixed, t, v, None));
                            status.push(OK.to_string());
                        }
                    }
                    Err(e) => {
                        *failures.entry(e.code().to_string()).or_insert(0) += taus.len();
                        for &t in &taus {
                            rows.push(time_row(fixed, t, f64::NAN, None));
                            status.push(e.code().to_string());
                        }
                    }
                }
                (time_columns(fixed, "tau", "g2_tau", false), rows, status, taus.len(), failures)
            }
            SweepMode::Dynamics => {
                let times = grid(AxisName::T);
                let u0s = spec.axis(AxisName::U0).map(Axis::grid).unwrap_or_else(|| vec![fixed.u0]);
                let params: Vec<SystemParams> =
                    u0s.iter().map(|&u0| resonant(spec, SystemParams { u0, ..fixed.clone() })).collect();
                let trajectories: Vec<Result<Vec<f64>>> =
                    params.par_iter().map(|p| trajectory(spec, p, &times)).collect();
                let mut failures = BTreeMap::new();
                let mut rows = Vec::new();
                let mut status = Vec::new();
                for ((p, traj), &u0) in params.iter().zip(&trajectories).zip(&u0s) {
                    spot_points.push(p.clone());
                    match traj {
                        Ok(values) => {
                            for (&t, &v) in times.iter().zip(values) {
                                rows.push(time_row(fixed, t, v, Some(u0)));
                                status.push(OK.to_string());
                            }
                        }
                        Err(e) => {
                            *failures.entry(e.code().to_string()).or_insert(0) += times.len();
                            for &t in &times {
                                rows.push(time_row(fixed, t, f64::NAN, Some(u0)));
                                status.push(e.code().to_string());
                            }
                        }
                    }
                }
                (time_columns(fixed, "t", "photon_number", true), rows, status, times.len() * u0s.len(), failures)
            }
        };

    let spot_check = (spec.interference == Interference::Optimal).then(|| spot_check(&spot_points));
    let failed_points = failures.values().sum();
    let metadata = Metadata {
        version: env!("CARGO_PKG_VERSION").to_string(),
        mode: spec.mode,
        parameters: spec.fixed.clone(),
        axes: spec.axes.clone(),
        interference: spec.interference,
        resonance: spec.resonance,
        u0_per_g: (spec.mode == SweepMode::GScanQiVsJc).then_some(spec.u0_per_g),
        jc_delta_c: spec.jc_delta_c.clone(),
        n_max: spec.n_max,
        steady_state_tolerance: spec.steady_state_tolerance,
        propagation: spec.settings,
        total_points: total,
        failed_points,
        failures,
        spot_check,
        overrides: Vec::new(),
    };
    Ok(SweepResult { columns: columns.into_iter().map(String::from).collect(), rows, status, metadata })
}

fn resonant(spec: &SweepSpec, params: SystemParams) -> SystemParams {
    match spec.resonance {
        Some(branch) => SystemParams { delta_c: resonance_detuning(branch, &params), ..params },
        None => params,
    }
}

fn correlation(spec: &SweepSpec, params: &SystemParams, taus: &[f64]) -> Result<Vec<f64>> {
    let p = with_interference(params, spec.interference)?;
    p.validate()?;
    let basis = Basis::new(spec.n_max)?;
    let l = build_liouvillian(&p, basis);
    let rho = steady_state_with_tolerance(&l, spec.steady_state_tolerance)?;
    Ok(g2_tau(&rho, &l, taus, &spec.settings)?.values)
}

fn trajectory(spec: &SweepSpec, params: &SystemParams, times: &[f64]) -> Result<Vec<f64>> {
    let p = with_interference(params, spec.interference)?;
    p.validate()?;
    let basis = Basis::new(spec.n_max)?;
    let rho0 = DensityMatrix::pure(basis, 0, Spin::Up)?;
    let states = propagate(&rho0, &build_liouvillian(&p, basis), times, &spec.settings)?;
    Ok(states.iter().map(photon_number).collect())
}

fn time_columns(fixed: &SystemParams, time: &str, value: &'static str, with_u0: bool) -> Vec<&'static str> {
    let mut cols = Vec::new();
    if with_u0 {
        cols.push("u0");
    }
    cols.push(if time == "tau" { "tau_kappa" } else { "t_kappa" });
    if fixed.kappa_hz.is_some() {
        cols.push(if time == "tau" { "tau_us" } else { "t_us" });
    }
    cols.push(value);
    cols
}

fn time_row(fixed: &SystemParams, t: f64, value: f64, u0: Option<f64>) -> Vec<f64> {
    let mut row = Vec::with_capacity(4);
    row.extend(u0);
    row.push(t);
    row.extend(fixed.time_in_us(t));
    row.push(value);
    row
}

/// Minimum g²(0) over successful points, ties to the smallest |Δc|.
fn argmin(delta_cs: &[f64], results: &[Result<PointResult>]) -> Option<(usize, PointResult)> {
    let mut best: Option<(usize, PointResult)> = None;
    for (k, r) in results.iter().enumerate() {
        let Ok(v) = r else { continue };
        if !v.g2_0.is_finite() {
            continue;
        }
        let better = match &best {
            None => true,
            Some((j, b)) => v.g2_0 < b.g2_0 || (v.g2_0 == b.g2_0 && delta_cs[k].abs() < delta_cs[*j].abs()),
        };
        if better {
            best = Some((k, *v));
        }
    }
    best
}

fn first_error(results: &[Result<PointResult>]) -> String {
    results
        .iter()
        .find_map(|r| r.as_ref().err().map(|e| e.code().to_string()))
        .unwrap_or_else(|| "empty_result".to_string())
}

fn spot_check(points: &[SystemParams]) -> SpotCheck {
    let mut check = SpotCheck { stride: SPOT_CHECK_STRIDE, checked: 0, skipped: 0, max_c2_over_eta2: 0.0, violations: 0 };
    for p in points.iter().step_by(SPOT_CHECK_STRIDE) {
        let ratio = with_interference(p, Interference::Optimal)
            .and_then(|q| weak_drive_amplitudes(&q).map(|a| a.c2_up.norm() / (q.eta * q.eta)));
        match ratio {
            Ok(r) => {
                check.checked += 1;
                check.max_c2_over_eta2 = check.max_c2_over_eta2.max(r);
                if !(r <= SPOT_CHECK_TOLERANCE) {
                    check.violations += 1;
                }
            }
            Err(_) => check.skipped += 1,
        }
    }
    check
}

/// Row and value of the minimum of `column` over successful rows, ties
/// broken by the smallest |Δc| when a Δc column is present.
pub fn find_optimum(result: &SweepResult, column: &str) -> Result<(usize, f64)> {
    let k = result
        .column_index(column)
        .ok_or_else(|| Error::InvalidArgument(format!("no column named `{column}`")))?;
    let dc = ["delta_c", "delta_c_opt", "delta_c_qi"].iter().find_map(|c| result.column_index(c));
    let mut best: Option<(usize, f64)> = None;
    for (row, values) in result.rows.iter().enumerate() {
        let v = values[k];
        if !result.ok(row) || !v.is_finite() {
            continue;
        }
        let better = match best {
            None => true,
            Some((j, b)) => {
                v < b || (v == b && dc.is_some_and(|d| values[d].abs() < result.rows[j][d].abs()))
            }
        };
        if better {
            best = Some((row, v));
        }
    }
    best.ok_or_else(|| Error::EmptyResult(column.to_string()))
}
