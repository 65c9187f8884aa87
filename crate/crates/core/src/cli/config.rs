//! TOML run configuration with a strict schema.

use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::liouvillian::{PropagationSettings, STEADY_STATE_RESIDUAL_TOLERANCE};
use crate::model::SystemParams;
use crate::spectrum::Branch;
use crate::sweep::{Axis, Interference, SweepMode, SweepSpec};

const PARAMS_KEYS: &[&str] = &[
    "g", "u0", "delta_c", "delta_a", "eta", "omega_m", "theta", "kappa", "gamma_g", "gamma_d", "kappa_hz",
];
const SWEEP_KEYS: &[&str] = &["mode", "interference", "resonance", "u0_per_g", "axes", "jc_delta_c"];
const AXIS_KEYS: &[&str] = &["name", "min", "max", "count", "spacing", "values", "units"];
const SOLVER_KEYS: &[&str] = &["n_max", "steady_state_tolerance", "step", "tolerance", "max_halvings"];
const OUTPUT_KEYS: &[&str] = &["path", "precision"];
const SECTIONS: &[(&str, &[&str])] =
    &[("params", PARAMS_KEYS), ("sweep", SWEEP_KEYS), ("solver", SOLVER_KEYS), ("output", OUTPUT_KEYS)];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub mode: Option<SweepMode>,
    pub interference: Interference,
    pub resonance: Option<Branch>,
    pub u0_per_g: f64,
    pub axes: Vec<Axis>,
    pub jc_delta_c: Option<Axis>,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self { mode: None, interference: Interference::Optimal, resonance: None, u0_per_g: -5.0, axes: Vec::new(), jc_delta_c: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    pub n_max: usize,
    pub steady_state_tolerance: f64,
    pub step: f64,
    pub tolerance: f64,
    pub max_halvings: u32,
}

impl Default for SolverSection {
    fn default() -> Self {
        let p = PropagationSettings::default();
        Self {
            n_max: 8,
            steady_state_tolerance: STEADY_STATE_RESIDUAL_TOLERANCE,
            step: p.step,
            tolerance: p.tolerance,
            max_halvings: p.max_halvings,
        }
    }
}

impl SolverSection {
    pub fn propagation(&self) -> PropagationSettings {
        PropagationSettings { step: self.step, tolerance: self.tolerance, max_halvings: self.max_halvings }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub path: Option<PathBuf>,
    /// Significant digits of emitted floats.
    pub precision: usize,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { path: None, precision: 12 }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub params: SystemParams,
    pub sweep: SweepSection,
    pub solver: SolverSection,
    pub output: OutputSection,
}

impl RunConfig {
    /// Sweep specification, with `mode` standing in when the file names none.
    pub fn sweep_spec(&self, mode: SweepMode) -> SweepSpec {
        let mut spec = SweepSpec::new(self.sweep.mode.unwrap_or(mode), self.params.clone(), self.sweep.axes.clone());
        spec.interference = self.sweep.interference;
        spec.resonance = self.sweep.resonance;
        spec.u0_per_g = self.sweep.u0_per_g;
        spec.jc_delta_c = self.sweep.jc_delta_c.clone();
        spec.n_max = self.solver.n_max;
        spec.settings = self.solver.propagation();
        spec.steady_state_tolerance = self.solver.steady_state_tolerance;
        spec
    }

    fn problems(&self) -> Vec<String> {
        let mut out: Vec<String> = self.params.violations().into_iter().map(|v| format!("params: {v}")).collect();
        let s = &self.solver;
        if s.n_max < 1 {
            out.push(format!("solver.n_max must be at least 1, got {}", s.n_max));
        }
        for (key, v) in [("steady_state_tolerance", s.steady_state_tolerance), ("step", s.step), ("tolerance", s.tolerance)] {
            if !(v > 0.0 && v.is_finite()) {
                out.push(format!("solver.{key} must be positive, got {v}"));
            }
        }
        if !(1..=17).contains(&self.output.precision) {
            out.push(format!("output.precision must lie in 1..=17, got {}", self.output.precision));
        }
        if let Some(mode) = self.sweep.mode {
            out.extend(
                self.sweep_spec(mode)
                    .problems()
                    .into_iter()
                    .filter(|p| !self.params.violations().contains(p))
                    .map(|p| format!("sweep: {p}")),
            );
        }
        out
    }
}

/// Every problem found in a configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub messages: Vec<String>,
}

impl ConfigError {
    fn one(message: impl Into<String>) -> Self {
        Self { messages: vec![message.into()] }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, m) in self.messages.iter().enumerate() {
            if k > 0 {
                writeln!(f)?;
            }
            write!(f, "{m}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    parse_with_overrides(text, &[])
}

/// Parses a document, applies `key=value` overrides, then validates.
pub fn parse_with_overrides(text: &str, overrides: &[String]) -> Result<RunConfig, ConfigError> {
    let mut table: Table = text
        .parse()
        .map_err(|e: toml::de::Error| ConfigError::one(format!("syntax error: {}", e.to_string().trim_end())))?;
    let mut messages = unknown_keys(&table);
    for o in overrides {
        if let Err(m) = apply_override(&mut table, o) {
            messages.push(m);
        }
    }
    if !messages.is_empty() {
        return Err(ConfigError { messages });
    }
    let config: RunConfig = Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| ConfigError::one(format!("schema error: {}", e.to_string().trim_end())))?;
    let problems = config.problems();
    if problems.is_empty() {
        Ok(config)
    } else {
        Err(ConfigError { messages: problems })
    }
}

fn unknown_keys(table: &Table) -> Vec<String> {
    let mut out = Vec::new();
    for (key, value) in table {
        let Some((_, known)) = SECTIONS.iter().find(|(s, _)| s == key) else {
            out.push(format!("unknown key `{key}`"));
            continue;
        };
        let Value::Table(section) = value else { continue };
        for (k, v) in section {
            if !known.contains(&k.as_str()) {
                out.push(format!("unknown key `{key}.{k}`"));
                continue;
            }
            match (key.as_str(), k.as_str(), v) {
                ("sweep", "axes", Value::Array(items)) => {
                    for (i, item) in items.iter().enumerate() {
                        axis_unknown_keys(item, &format!("sweep.axes[{i}]"), &mut out);
                    }
                }
                ("sweep", "jc_delta_c", item) => axis_unknown_keys(item, "sweep.jc_delta_c", &mut out),
                _ => {}
            }
        }
    }
    out
}

fn axis_unknown_keys(item: &Value, path: &str, out: &mut Vec<String>) {
    if let Value::Table(axis) = item {
        for k in axis.keys() {
            if !AXIS_KEYS.contains(&k.as_str()) {
                out.push(format!("unknown key `{path}.{k}`"));
            }
        }
    }
}

/// Resolves a short key (`g`, `n_max`) or a dotted one (`solver.n_max`).
fn resolve_key(key: &str) -> Result<(&'static str, String), String> {
    if let Some((section, field)) = key.split_once('.') {
        let (s, known) = SECTIONS
            .iter()
            .find(|(s, _)| *s == section)
            .ok_or_else(|| format!("override `{key}`: unknown section `{section}`"))?;
        if !known.contains(&field) || field == "axes" {
            return Err(format!("override `{key}`: unknown key `{key}`"));
        }
        return Ok((s, field.to_string()));
    }
    let hits: Vec<&str> = SECTIONS.iter().filter(|(_, k)| k.contains(&key)).map(|(s, _)| *s).collect();
    match hits.as_slice() {
        [one] if key != "axes" => Ok((one, key.to_string())),
        [] | [_] => Err(format!("override `{key}`: unknown key `{key}`")),
        many => Err(format!("override `{key}` is ambiguous between sections {}", many.join(", "))),
    }
}

fn apply_override(table: &mut Table, spec: &str) -> Result<(), String> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| format!("override `{spec}` must have the form key=value"))?;
    let (section, field) = resolve_key(key.trim())?;
    let raw = raw.trim();
    let value = format!("v = {raw}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()));
    let entry = table.entry(section.to_string()).or_insert_with(|| Value::Table(Table::new()));
    let Value::Table(sec) = entry else {
        return Err(format!("section `{section}` is not a table"));
    };
    sec.insert(field, value);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_fills_defaults() {
        let c = parse_config("[params]\ng = 1.0\n").unwrap();
        assert_eq!(c.params.g, 1.0);
        assert!((c.params.eta - 0.14142).abs() < 1e-5);
        assert_eq!(c.params.gamma_g, 1e-3);
        assert_eq!(c.params.gamma_d, 1e-3);
        assert_eq!(c.solver.n_max, 8);
        assert_eq!(c.output.precision, 12);
    }

    #[test]
    fn unknown_keys_are_named() {
        let err = parse_config("[params]\ngamma_x = 1.0\n[solver]\nfoo = 2\n").unwrap_err();
        assert_eq!(err.messages.len(), 2);
        assert!(err.messages[0].contains("gamma_x"));
        assert!(err.messages[1].contains("solver.foo"));
        let err = parse_config("[sweep]\nmode = \"cut\"\n[[sweep.axes]]\nname = \"delta_c\"\nbins = 3\n").unwrap_err();
        assert!(err.messages[0].contains("sweep.axes[0].bins"));
    }

    #[test]
    fn zero_truncation_rejected() {
        let err = parse_config("[solver]\nn_max = 0\n").unwrap_err();
        assert!(err.messages.iter().any(|m| m.contains("n_max")));
    }

    #[test]
    fn all_problems_reported() {
        let err = parse_config("[params]\nkappa = -1.0\ngamma_g = -2.0\n[solver]\nn_max = 0\n").unwrap_err();
        assert!(err.messages.len() >= 3, "{err}");
    }

    #[test]
    fn syntax_error_has_position() {
        let err = parse_config("[params]\ng = = 1\n").unwrap_err();
        assert!(err.messages[0].contains("line 2"), "{err}");
    }

    #[test]
    fn overrides_short_and_dotted() {
        let c = parse_with_overrides("", &["g=2.5".into(), "solver.n_max=5".into(), "u0=-5".into()]).unwrap();
        assert_eq!((c.params.g, c.solver.n_max, c.params.u0), (2.5, 5, -5.0));
        let c = parse_with_overrides("", &["mode=cut".into(), "interference=off".into()]);
        assert!(c.is_err(), "cut without a delta_c axis is invalid");
        assert!(parse_with_overrides("", &["bogus=1".into()]).is_err());
        assert!(parse_with_overrides("", &["g".into()]).is_err());
    }

    #[test]
    fn sweep_section_round_trip() {
        let text = r#"
            [params]
            u0 = -5.0
            [sweep]
            mode = "map_g2_ns"
            [[sweep.axes]]
            name = "delta_c"
            min = -8.0
            max = 8.0
            count = 161
            [[sweep.axes]]
            name = "u0"
            min = -5.0
            max = 5.0
            count = 101
        "#;
        let c = parse_config(text).unwrap();
        let spec = c.sweep_spec(SweepMode::Cut);
        assert_eq!(spec.mode, SweepMode::MapG2Ns);
        assert_eq!(spec.axes.len(), 2);
        assert!(spec.validate().is_ok());
    }
}
