//! Sweep configuration: `[params]` (fixed values), `[axes.<name>]` (swept
//! values) and `[numerics]` (solver knobs, all defaulted).
//!
//! TOML is the primary encoding; a `.json` file with the same layout is
//! accepted too. `--set` overrides are applied to the parsed tree before
//! validation, so they are checked exactly like file entries.

use std::path::Path;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Subject {
    Spectrum,
    Coupling,
    Lambshift,
    Zeno,
    Oracle,
    Classify,
}

impl Subject {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Spectrum => "spectrum",
            Self::Coupling => "coupling",
            Self::Lambshift => "lambshift",
            Self::Zeno => "zeno",
            Self::Oracle => "oracle",
            Self::Classify => "classify",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RwaMode {
    On,
    Off,
    Both,
}

impl RwaMode {
    pub fn flags(&self) -> &'static [bool] {
        match self {
            Self::On => &[true],
            Self::Off => &[false],
            Self::Both => &[true, false],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum OracleMode {
    /// `t, re_alpha, im_alpha, survival` up to `t_max`.
    #[default]
    Trajectory,
    /// Memory kernel by both methods over a `t` axis.
    Kernel,
    /// Survival after `m` measurement cycles over a `tau` axis.
    Measured,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Layout {
    #[default]
    Long,
    Wide,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ZenoOutput {
    /// `Q` columns when every curve has a baseline rate, `R` columns otherwise.
    #[default]
    Auto,
    Q,
    Rate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    #[default]
    Spectral,
    CentralDifference,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct Numerics {
    pub grid_n: usize,
    pub scheme: Scheme,
    pub n_levels: usize,
    pub tau_min: f64,
    pub tau_max: f64,
    pub scan_points: usize,
    pub tau_rel_tol: f64,
    pub oracle_mode: OracleMode,
    pub n_sites: Option<usize>,
    pub t_max: Option<f64>,
    pub dt: Option<f64>,
    pub record_every: usize,
    pub layout: Layout,
    pub zeno_output: ZenoOutput,
}

impl Default for Numerics {
    fn default() -> Self {
        Self {
            grid_n: 64,
            scheme: Scheme::Spectral,
            n_levels: 5,
            tau_min: 1e-3,
            tau_max: 1e3,
            scan_points: 200,
            tau_rel_tol: 1e-10,
            oracle_mode: OracleMode::Trajectory,
            n_sites: None,
            t_max: None,
            dt: None,
            record_every: 1,
            layout: Layout::Long,
            zeno_output: ZenoOutput::Auto,
        }
    }
}

const NUMERIC_KEYS: &[&str] = &[
    "grid_n",
    "scheme",
    "n_levels",
    "tau_min",
    "tau_max",
    "scan_points",
    "tau_rel_tol",
    "oracle_mode",
    "n_sites",
    "t_max",
    "dt",
    "record_every",
    "layout",
    "zeno_output",
];

const CIRCUIT_KEYS: &[&str] = &["e_j", "c_j", "alpha", "f", "c_t", "l_t", "dx", "flux_unit"];
const QED_KEYS: &[&str] = &["omega_c", "xi", "g", "n", "omega_a"];

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct AxisSpec {
    values: Option<Vec<f64>>,
    start: Option<f64>,
    stop: Option<f64>,
    count: Option<usize>,
    #[serde(default)]
    scale: AxisScale,
}

#[derive(Debug, Clone, Copy, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
enum AxisScale {
    #[default]
    Linear,
    Geometric,
}

impl AxisSpec {
    fn expand(&self, name: &str) -> Result<Vec<f64>> {
        let bad = |reason: &str| CliError::InvalidValue {
            key: format!("axes.{name}"),
            reason: reason.into(),
        };
        match (&self.values, self.start, self.stop, self.count) {
            (Some(v), None, None, None) => {
                if v.is_empty() {
                    return Err(bad("`values` is empty"));
                }
                Ok(v.clone())
            }
            (None, Some(a), Some(b), Some(count)) => {
                if count == 0 {
                    return Err(bad("`count` must be positive"));
                }
                match self.scale {
                    AxisScale::Linear => Ok(linear(a, b, count)),
                    AxisScale::Geometric => {
                        if !(a > 0.0 && b > 0.0) {
                            return Err(bad("geometric axes need positive endpoints"));
                        }
                        Ok(giant_atom::zeno::geometric_grid(a, b, count))
                    }
                }
            }
            _ => Err(bad("give either `values` or all of `start`, `stop`, `count`")),
        }
    }
}

fn linear(a: f64, b: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![a];
    }
    let step = (b - a) / (count - 1) as f64;
    (0..count)
        .map(|i| if i == count - 1 { b } else { a + step * i as f64 })
        .collect()
}

/// Fully resolved sweep: every physics key of the subject has one or more values.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub subject: Subject,
    /// `(key, values)` in subject key order; a single value means fixed.
    pub values: Vec<(String, Vec<f64>)>,
    /// Names that came from `[axes]`, in declaration order.
    pub axes: Vec<String>,
    pub rwa: Option<RwaMode>,
    pub numerics: Numerics,
}

impl SweepSpec {
    pub fn list(&self, key: &str) -> &[f64] {
        self.values
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_slice())
            .unwrap_or_else(|| panic!("physics key `{key}` was validated as present"))
    }

    /// The single value of a key that is not swept.
    pub fn scalar(&self, key: &str) -> f64 {
        self.list(key)[0]
    }

    pub fn rwa(&self) -> RwaMode {
        self.rwa.expect("rwa validated as present")
    }

    /// Every fixed parameter and axis, for the metadata sidecar.
    pub fn describe(&self) -> Value {
        let mut params = Map::new();
        let mut axes = Map::new();
        for (k, v) in &self.values {
            if self.axes.contains(k) {
                axes.insert(k.clone(), Value::from(v.clone()));
            } else {
                params.insert(k.clone(), Value::from(v[0]));
            }
        }
        if let Some(r) = self.rwa {
            params.insert("rwa".into(), serde_json::to_value(r).unwrap());
        }
        serde_json::json!({
            "subject": self.subject.name(),
            "params": params,
            "axes": axes,
            "numerics": serde_json::to_value(&self.numerics).unwrap(),
        })
    }
}

/// Physics keys a subject needs, and the subset that may be swept.
fn subject_keys(subject: Subject, numerics: &Numerics) -> (Vec<&'static str>, &'static [&'static str], bool) {
    let qed = QED_KEYS.to_vec();
    match subject {
        Subject::Spectrum => (CIRCUIT_KEYS.to_vec(), &["f"], false),
        Subject::Coupling => (CIRCUIT_KEYS.to_vec(), &["c_t"], false),
        Subject::Lambshift => (qed, &["xi"], false),
        Subject::Zeno => ([qed, vec!["tau"]].concat(), &["tau", "g"], true),
        Subject::Classify => (qed, &["n", "g"], true),
        Subject::Oracle => match numerics.oracle_mode {
            OracleMode::Trajectory => (qed, &[], true),
            // The kernel does not involve the atom at all.
            OracleMode::Kernel => (vec!["omega_c", "xi", "g", "n", "t"], &["t"], false),
            OracleMode::Measured => ([qed, vec!["tau", "m"]].concat(), &["tau"], true),
        },
    }
}

/// Reads a config file into a generic tree (TOML, or JSON by extension).
pub fn load_tree(path: Option<&Path>) -> Result<Value> {
    let Some(path) = path else {
        return Ok(Value::Object(Map::new()));
    };
    let text = std::fs::read_to_string(path)?;
    let is_json = path.extension().and_then(|e| e.to_str()) == Some("json");
    let tree: Value = if is_json {
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
    } else {
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
    };
    if !tree.is_object() {
        return Err(CliError::Config("top level must be a table".into()));
    }
    Ok(tree)
}

/// Applies `key=value`; a bare key means `params.<key>`. Values use TOML syntax
/// (`0.2`, `[1, 2]`, `"both"`); anything unparsable is taken as a string.
pub fn apply_override(tree: &mut Value, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("override `{assignment}` is not key=value")))?;
    let key = key.trim();
    let path: Vec<&str> = if key.contains('.') {
        key.split('.').collect()
    } else {
        vec!["params", key]
    };
    if path.iter().any(|p| p.is_empty()) {
        return Err(CliError::Config(format!("override key `{key}` is malformed")));
    }
    let value: Value = toml::from_str::<Map<String, Value>>(&format!("v = {}", raw.trim()))
        .ok()
        .and_then(|mut m| m.remove("v"))
        .unwrap_or_else(|| Value::String(raw.trim().to_string()));
    let mut node = tree;
    for part in &path[..path.len() - 1] {
        let obj = node
            .as_object_mut()
            .ok_or_else(|| CliError::Config(format!("override `{key}` descends into a non-table")))?;
        node = obj.entry(part.to_string()).or_insert_with(|| Value::Object(Map::new()));
    }
    let obj = node
        .as_object_mut()
        .ok_or_else(|| CliError::Config(format!("override `{key}` descends into a non-table")))?;
    obj.insert(path[path.len() - 1].to_string(), value);
    Ok(())
}

fn parse_rwa(v: &Value) -> Result<RwaMode> {
    let bad = || CliError::InvalidValue {
        key: "rwa".into(),
        reason: format!("{v} is not one of true/false/\"on\"/\"off\"/\"both\""),
    };
    match v {
        Value::Bool(true) => Ok(RwaMode::On),
        Value::Bool(false) => Ok(RwaMode::Off),
        Value::String(s) => match s.as_str() {
            "on" | "true" => Ok(RwaMode::On),
            "off" | "false" => Ok(RwaMode::Off),
            "both" => Ok(RwaMode::Both),
            _ => Err(bad()),
        },
        _ => Err(bad()),
    }
}

fn number(key: &str, v: &Value) -> Result<f64> {
    v.as_f64().ok_or_else(|| CliError::InvalidValue {
        key: key.into(),
        reason: format!("{v} is not a number"),
    })
}

/// Validates the tree against the subject's schema.
pub fn resolve(subject: Subject, tree: &Value) -> Result<SweepSpec> {
    let top = tree.as_object().expect("tree is an object");
    for key in top.keys() {
        if !["params", "axes", "numerics"].contains(&key.as_str()) {
            return Err(CliError::UnknownKey {
                key: key.clone(),
                section: "top level".into(),
            });
        }
    }
    let empty = Map::new();
    let section = |name: &str| -> Result<&Map<String, Value>> {
        match top.get(name) {
            None => Ok(&empty),
            Some(Value::Object(m)) => Ok(m),
            Some(_) => Err(CliError::Config(format!("`{name}` must be a table"))),
        }
    };
    let params = section("params")?;
    let axes = section("axes")?;
    let numerics_raw = section("numerics")?;

    for key in numerics_raw.keys() {
        if !NUMERIC_KEYS.contains(&key.as_str()) {
            return Err(CliError::UnknownKey {
                key: key.clone(),
                section: "[numerics]".into(),
            });
        }
    }
    let numerics: Numerics = serde_json::from_value(Value::Object(numerics_raw.clone()))
        .map_err(|e| CliError::Config(format!("[numerics]: {e}")))?;

    let (keys, sweepable, uses_rwa) = subject_keys(subject, &numerics);
    for key in params.keys() {
        let known = keys.contains(&key.as_str()) || (uses_rwa && key == "rwa");
        if !known {
            return Err(CliError::UnknownKey {
                key: key.clone(),
                section: format!("[params] for `{}`", subject.name()),
            });
        }
    }
    let mut axis_names = Vec::new();
    for name in axes.keys() {
        if !keys.contains(&name.as_str()) {
            return Err(CliError::UnknownKey {
                key: name.clone(),
                section: format!("[axes] for `{}`", subject.name()),
            });
        }
        if !sweepable.contains(&name.as_str()) {
            return Err(CliError::Config(format!(
                "`{name}` cannot be swept by `{}` (sweepable: {})",
                subject.name(),
                if sweepable.is_empty() {
                    "none".to_string()
                } else {
                    sweepable.join(", ")
                }
            )));
        }
        if params.contains_key(name) {
            return Err(CliError::Config(format!(
                "`{name}` is given both in [params] and [axes]"
            )));
        }
        axis_names.push(name.clone());
    }

    let mut values = Vec::with_capacity(keys.len());
    for key in &keys {
        let list = if let Some(spec) = axes.get(*key) {
            let spec: AxisSpec = serde_json::from_value(spec.clone()).map_err(|e| CliError::InvalidValue {
                key: format!("axes.{key}"),
                reason: e.to_string(),
            })?;
            spec.expand(key)?
        } else if let Some(v) = params.get(*key) {
            vec![number(key, v)?]
        } else {
            return Err(CliError::MissingParameter((*key).to_string()));
        };
        if ["n", "m"].contains(key) {
            if let Some(bad) = list
                .iter()
                .find(|v| !(v.fract() == 0.0 && **v >= 0.0 && **v <= u32::MAX as f64))
            {
                return Err(CliError::InvalidValue {
                    key: (*key).into(),
                    reason: format!("{bad} is not a non-negative integer"),
                });
            }
        }
        values.push((key.to_string(), list));
    }
    let rwa = if uses_rwa {
        let v = params
            .get("rwa")
            .ok_or_else(|| CliError::MissingParameter("rwa".into()))?;
        let mode = parse_rwa(v)?;
        if subject == Subject::Oracle && mode == RwaMode::Both {
            return Err(CliError::InvalidValue {
                key: "rwa".into(),
                reason: "the oracle runs one model at a time; use on or off".into(),
            });
        }
        Some(mode)
    } else {
        None
    };
    Ok(SweepSpec {
        subject,
        values,
        axes: axis_names,
        rwa,
        numerics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tree(text: &str) -> Value {
        toml::from_str(text).unwrap()
    }

    const ZENO: &str = r#"
        [params]
        omega_c = 1.0
        xi = 0.1
        n = 4
        omega_a = 1.0
        rwa = "both"
        [axes.g]
        values = [0.05, 0.1, 0.2]
        [axes.tau]
        start = 0.01
        stop = 30.0
        count = 5
        scale = "geometric"
    "#;

    #[test]
    fn resolves_axes_and_fixed_values() {
        let spec = resolve(Subject::Zeno, &tree(ZENO)).unwrap();
        assert_eq!(spec.list("g"), &[0.05, 0.1, 0.2]);
        assert_eq!(spec.list("tau").len(), 5);
        assert_eq!(spec.scalar("xi"), 0.1);
        assert_eq!(spec.axes, vec!["g".to_string(), "tau".to_string()]);
        assert_eq!(spec.rwa(), RwaMode::Both);
    }

    #[test]
    fn unknown_key_is_named() {
        let mut t = tree(ZENO);
        apply_override(&mut t, "gamma=0.3").unwrap();
        match resolve(Subject::Zeno, &t) {
            Err(CliError::UnknownKey { key, .. }) => assert_eq!(key, "gamma"),
            other => panic!("{other:?}"),
        }
        let mut t = tree(ZENO);
        apply_override(&mut t, "numerics.tolerance=1").unwrap();
        assert!(matches!(resolve(Subject::Zeno, &t), Err(CliError::UnknownKey { .. })));
    }

    #[test]
    fn missing_physics_parameter_is_an_error() {
        let t = tree("[params]\nomega_c = 1.0\n");
        match resolve(Subject::Lambshift, &t) {
            Err(CliError::MissingParameter(k)) => assert_eq!(k, "xi"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn overrides_parse_toml_values() {
        let mut t = tree(ZENO);
        apply_override(&mut t, "params.n=2").unwrap();
        apply_override(&mut t, "rwa=off").unwrap();
        apply_override(&mut t, "axes.g.values=[0.2]").unwrap();
        let spec = resolve(Subject::Zeno, &t).unwrap();
        assert_eq!(spec.scalar("n"), 2.0);
        assert_eq!(spec.rwa(), RwaMode::Off);
        assert_eq!(spec.list("g"), &[0.2]);
    }

    #[test]
    fn rejects_bad_axes() {
        let mut t = tree(ZENO);
        apply_override(&mut t, "axes.xi.values=[0.1, 0.2]").unwrap();
        apply_override(&mut t, "params.xi=0.1").unwrap();
        assert!(resolve(Subject::Zeno, &t).is_err());
        let mut t = tree(ZENO);
        apply_override(&mut t, "n=2.5").unwrap();
        assert!(matches!(resolve(Subject::Zeno, &t), Err(CliError::InvalidValue { .. })));
    }

    #[test]
    fn linear_axis_endpoints() {
        assert_eq!(linear(0.0, 1.0, 3), vec![0.0, 0.5, 1.0]);
        assert_eq!(linear(2.0, 5.0, 1), vec![2.0]);
    }
}
