//! Exhaustive parameter grids.
//!
//! Points are evaluated independently (in parallel when available) and
//! assembled in lexicographic grid order, the first axis varying slowest.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::config::{ParamsConfig, PARAM_NAMES};
use crate::error::{Error, Result};
use crate::parallel::{map_ordered, Execution};
use crate::simulation::{run, schedule_for, Scenario, INITIAL_STATE};

pub const DEFAULT_CAP: usize = 10_000;

/// Metrics reported per grid point. Everything except the `mean_`/`max_`
/// aggregates refers to the final recorded row.
pub const SCAN_METRICS: [&str; 18] = [
    "P1",
    "P2",
    "P3",
    "P4",
    "P5",
    "P6",
    "P7",
    "P8",
    "Pp",
    "Pea",
    "Pe",
    "norm",
    "fid_qubit",
    "fid_qutrit",
    "mean_Pe",
    "max_Pp",
    "max_Pea",
    "maxdev_third",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
}

impl Axis {
    pub fn list(name: &str, values: Vec<f64>) -> Self {
        Axis {
            name: name.to_string(),
            values: Some(values),
            start: None,
            stop: None,
            count: None,
            step: None,
        }
    }

    /// Inclusive range `start, start + step, ..., stop`.
    pub fn stepped(name: &str, start: f64, stop: f64, step: f64) -> Self {
        Axis {
            name: name.to_string(),
            values: None,
            start: Some(start),
            stop: Some(stop),
            count: None,
            step: Some(step),
        }
    }

    pub fn resolve(&self, position: usize) -> Result<Vec<f64>> {
        let key = |field: &str| format!("axes[{position}].{field}");
        if !PARAM_NAMES.contains(&self.name.as_str()) {
            return Err(Error::config(
                key("name"),
                format!("unknown parameter `{}` (expected one of {})", self.name, PARAM_NAMES.join(", ")),
            ));
        }
        let values = match (&self.values, self.start, self.stop, self.count, self.step) {
            (Some(v), None, None, None, None) => v.clone(),
            (None, Some(a), Some(b), Some(n), None) => match n {
                0 => Vec::new(),
                1 => vec![a],
                n => (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect(),
            },
            (None, Some(a), Some(b), None, Some(h)) => {
                if !(h.is_finite() && h > 0.0 && b >= a) {
                    return Err(Error::config(key("step"), "must be > 0 with stop >= start"));
                }
                let n = ((b - a) / h + 1e-9).floor() as usize + 1;
                (0..n).map(|k| a + h * k as f64).collect()
            }
            _ => {
                return Err(Error::config(
                    key("values"),
                    "give either `values` or `start`/`stop` with one of `count`/`step`",
                ))
            }
        };
        if values.is_empty() {
            return Err(Error::config(key("values"), "axis has no values"));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::config(key("values"), format!("non-finite value {bad}")));
        }
        Ok(values)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSpec {
    pub scenario: Scenario,
    #[serde(default)]
    pub base: ParamsConfig,
    pub axes: Vec<Axis>,
    /// Metric columns; empty means all of [`SCAN_METRICS`].
    #[serde(default)]
    pub outputs: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objective: Option<String>,
    #[serde(default = "default_cap")]
    pub cap: usize,
    /// `0` uses every available core, `1` runs serially.
    #[serde(default)]
    pub workers: usize,
    #[serde(default = "default_true")]
    pub restrict_to_s: bool,
    #[serde(default)]
    pub normalize_pe: bool,
}

fn default_cap() -> usize {
    DEFAULT_CAP
}

fn default_true() -> bool {
    true
}

impl ScanSpec {
    pub fn new(scenario: Scenario, base: ParamsConfig, axes: Vec<Axis>) -> Self {
        ScanSpec {
            scenario,
            base,
            axes,
            outputs: Vec::new(),
            objective: None,
            cap: DEFAULT_CAP,
            workers: 0,
            restrict_to_s: true,
            normalize_pe: false,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::config("scan", e.to_string()))
    }

    pub fn outputs(&self) -> Result<Vec<String>> {
        if self.outputs.is_empty() {
            return Ok(SCAN_METRICS.iter().map(|s| s.to_string()).collect());
        }
        for name in &self.outputs {
            if !SCAN_METRICS.contains(&name.as_str()) {
                return Err(Error::UnknownMetric(name.clone()));
            }
        }
        Ok(self.outputs.clone())
    }

    /// Grid points in row order.
    pub fn grid(&self) -> Result<Vec<Vec<f64>>> {
        if self.axes.is_empty() {
            return Err(Error::EmptyAxes);
        }
        if !matches!(self.scenario, Scenario::Stirap | Scenario::Fstirap) {
            return Err(Error::config("scenario", "scans support `stirap` and `fstirap`"));
        }
        let axes: Vec<Vec<f64>> = self
            .axes
            .iter()
            .enumerate()
            .map(|(i, a)| a.resolve(i))
            .collect::<Result<_>>()?;
        let size = axes
            .iter()
            .try_fold(1usize, |acc, a| acc.checked_mul(a.len()))
            .unwrap_or(usize::MAX);
        if size > self.cap {
            return Err(Error::CapExceeded { size, cap: self.cap });
        }
        let mut points = vec![Vec::new()];
        for values in &axes {
            points = points
                .into_iter()
                .flat_map(|p| {
                    values.iter().map(move |&v| {
                        let mut q = p.clone();
                        q.push(v);
                        q
                    })
                })
                .collect();
        }
        Ok(points)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanRow {
    pub point: Vec<f64>,
    /// `None` when the point evaluated; otherwise the failure with its exit code.
    pub failure: Option<(i32, String)>,
    pub metrics: Vec<Option<f64>>,
}

impl ScanRow {
    pub fn status(&self) -> String {
        match &self.failure {
            None => "ok".to_string(),
            Some((_, msg)) => format!("error: {msg}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanTable {
    pub axes: Vec<String>,
    pub metrics: Vec<String>,
    pub rows: Vec<ScanRow>,
}

impl ScanTable {
    /// Column header: axes, `status`, then metrics.
    pub fn columns(&self) -> Vec<String> {
        let mut c = self.axes.clone();
        c.push("status".into());
        c.extend(self.metrics.iter().cloned());
        c
    }

    pub fn metric(&self, row: usize, name: &str) -> Result<Option<f64>> {
        let j = self
            .metrics
            .iter()
            .position(|m| m == name)
            .ok_or_else(|| Error::UnknownMetric(name.to_string()))?;
        Ok(self.rows[row].metrics[j])
    }

    pub fn failures(&self) -> impl Iterator<Item = &ScanRow> {
        self.rows.iter().filter(|r| r.failure.is_some())
    }
}

/// Final-row and aggregate metrics for one set of parameters.
pub fn evaluate_point(spec: &ScanSpec, point: &[f64], names: &[String]) -> Result<Vec<Option<f64>>> {
    let mut cfg = spec.base.clone();
    for (axis, &v) in spec.axes.iter().zip(point) {
        cfg.set(&axis.name, v)?;
    }
    let params = cfg.resolve()?;
    let schedule = schedule_for(spec.scenario, &params, None)?;
    let out = run(&params, &schedule, &INITIAL_STATE, spec.restrict_to_s, spec.normalize_pe)?;
    let m = &out.metrics;
    let last = m.last();
    Ok(names
        .iter()
        .map(|name| match name.as_str() {
            "Pp" => Some(last.photon),
            "Pea" => Some(last.excited),
            "Pe" => last.error,
            "norm" => Some(last.norm),
            "fid_qubit" => Some(last.fidelity_qubit),
            "fid_qutrit" => Some(last.fidelity_qutrit),
            "mean_Pe" => m.time_averaged_error(),
            "max_Pp" => Some(m.max_photon()),
            "max_Pea" => Some(m.max_excited()),
            "maxdev_third" => Some(last.max_deviation_from_third()),
            p => p
                .strip_prefix('P')
                .and_then(|k| k.parse::<usize>().ok())
                .map(|k| last.populations[k - 1]),
        })
        .collect())
}

/// Evaluates every grid point. Invalid specs are refused up front; failures at
/// individual points are recorded in their rows.
pub fn run_scan(spec: &ScanSpec, exec: Execution) -> Result<ScanTable> {
    let names = spec.outputs()?;
    let grid = spec.grid()?;
    let rows = map_ordered(&grid, exec, |point| match evaluate_point(spec, point, &names) {
        Ok(metrics) => ScanRow {
            point: point.clone(),
            failure: None,
            metrics,
        },
        Err(e) => ScanRow {
            point: point.clone(),
            failure: Some((e.exit_code(), e.to_string())),
            metrics: vec![None; names.len()],
        },
    });
    Ok(ScanTable {
        axes: spec.axes.iter().map(|a| a.name.clone()).collect(),
        metrics: names,
        rows,
    })
}

/// Objective: a metric name, optionally as `1 - name`.
#[derive(Debug, Clone, PartialEq)]
pub struct Objective {
    pub metric: String,
    pub complement: bool,
}

impl Objective {
    pub fn parse(text: &str) -> Result<Self> {
        let t = text.trim();
        let rest = t
            .strip_prefix('1')
            .map(str::trim_start)
            .and_then(|r| r.strip_prefix('-').or_else(|| r.strip_prefix('−')));
        let (metric, complement) = match rest {
            Some(r) => (r.trim(), true),
            None => (t, false),
        };
        if !SCAN_METRICS.contains(&metric) {
            return Err(Error::UnknownMetric(metric.to_string()));
        }
        Ok(Objective {
            metric: metric.to_string(),
            complement,
        })
    }

    pub fn value(&self, raw: f64) -> f64 {
        if self.complement {
            1.0 - raw
        } else {
            raw
        }
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.complement {
            write!(f, "1 - {}", self.metric)
        } else {
            f.write_str(&self.metric)
        }
    }
}

/// Row minimizing the objective, with its value. Rows where the metric is
/// missing are skipped; ties go to the earliest row.
pub fn best_point(table: &ScanTable, objective: &str) -> Result<Option<(usize, f64)>> {
    let obj = Objective::parse(objective)?;
    let j = table
        .metrics
        .iter()
        .position(|m| *m == obj.metric)
        .ok_or_else(|| Error::UnknownMetric(obj.metric.clone()))?;
    let mut best: Option<(usize, f64)> = None;
    for (i, row) in table.rows.iter().enumerate() {
        if let Some(raw) = row.metrics[j] {
            let v = obj.value(raw);
            if best.is_none_or(|(_, b)| v < b) {
                best = Some((i, v));
            }
        }
    }
    Ok(best)
}
