//! Time-dependent Rabi frequencies and couplings, the STIRAP and fractional
//! STIRAP presets, and diagnostics for the asymptotic pulse-ratio conditions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::SystemParams;

/// Default tolerance for the asymptotic ratio conditions.
pub const DEFAULT_RATIO_EPSILON: f64 = 1e-3;
const DIAGNOSTIC_SAMPLES: usize = 2000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PulseShape {
    Constant {
        amplitude: f64,
    },
    /// `amplitude * exp[-(t - center tau)^2 / (width_divisor tau^2)]`, center in units of tau.
    Gaussian {
        amplitude: f64,
        center: f64,
        width_divisor: f64,
    },
    Sum {
        terms: Vec<PulseShape>,
    },
}

impl PulseShape {
    pub fn zero() -> Self {
        PulseShape::Constant { amplitude: 0.0 }
    }

    pub fn evaluate(&self, t: f64, tau: f64) -> f64 {
        match self {
            PulseShape::Constant { amplitude } => *amplitude,
            PulseShape::Gaussian {
                amplitude,
                center,
                width_divisor,
            } => {
                let x = t - center * tau;
                amplitude * (-x * x / (width_divisor * tau * tau)).exp()
            }
            PulseShape::Sum { terms } => terms.iter().map(|s| s.evaluate(t, tau)).sum(),
        }
    }

    /// The same shape with every center moved by `delta` (units of tau).
    pub fn shifted(&self, delta: f64) -> Self {
        match self {
            PulseShape::Constant { .. } => self.clone(),
            PulseShape::Gaussian {
                amplitude,
                center,
                width_divisor,
            } => PulseShape::Gaussian {
                amplitude: *amplitude,
                center: center + delta,
                width_divisor: *width_divisor,
            },
            PulseShape::Sum { terms } => PulseShape::Sum {
                terms: terms.iter().map(|s| s.shifted(delta)).collect(),
            },
        }
    }

    pub fn validate(&self, key: &str) -> Result<()> {
        match self {
            PulseShape::Constant { amplitude } => check_amplitude(key, *amplitude),
            PulseShape::Gaussian {
                amplitude,
                center,
                width_divisor,
            } => {
                check_amplitude(key, *amplitude)?;
                if !center.is_finite() {
                    return Err(Error::config(format!("{key}.center"), "must be finite"));
                }
                if !(width_divisor.is_finite() && *width_divisor > 0.0) {
                    return Err(Error::config(format!("{key}.width_divisor"), "must be > 0"));
                }
                Ok(())
            }
            PulseShape::Sum { terms } => {
                if terms.len() < 2 {
                    return Err(Error::config(format!("{key}.terms"), "a sum needs at least 2 terms"));
                }
                for (i, term) in terms.iter().enumerate() {
                    term.validate(&format!("{key}.terms[{i}]"))?;
                }
                Ok(())
            }
        }
    }
}

fn check_amplitude(key: &str, amplitude: f64) -> Result<()> {
    if amplitude.is_finite() && amplitude >= 0.0 {
        Ok(())
    } else {
        Err(Error::config(format!("{key}.amplitude"), "must be finite and >= 0"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct PulseValues {
    pub omega_a: f64,
    pub omega_b: f64,
    pub g_a: f64,
    pub g_b: f64,
}

impl PulseValues {
    pub fn scaled(self, factor: f64) -> Self {
        PulseValues {
            omega_a: self.omega_a * factor,
            omega_b: self.omega_b * factor,
            g_a: self.g_a * factor,
            g_b: self.g_b * factor,
        }
    }

    /// `r = g_B Omega_A / (g_A Omega_B)`.
    pub fn ratio(&self) -> Ratio {
        let num = self.g_b * self.omega_a;
        let den = self.g_a * self.omega_b;
        match (num == 0.0, den == 0.0) {
            (true, true) => Ratio::Undefined,
            (false, true) => Ratio::Infinite,
            _ => Ratio::Finite(num / den),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Ratio {
    Finite(f64),
    Infinite,
    /// Both products vanish.
    Undefined,
}

impl Ratio {
    pub fn value(self) -> Option<f64> {
        match self {
            Ratio::Finite(r) => Some(r),
            Ratio::Infinite => Some(f64::INFINITY),
            Ratio::Undefined => None,
        }
    }

    pub fn inverse(self) -> Ratio {
        match self {
            Ratio::Finite(0.0) => Ratio::Infinite,
            Ratio::Finite(r) => Ratio::Finite(1.0 / r),
            Ratio::Infinite => Ratio::Finite(0.0),
            Ratio::Undefined => Ratio::Undefined,
        }
    }
}

impl Serialize for Ratio {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Ratio::Finite(r) => s.serialize_f64(*r),
            Ratio::Infinite => s.serialize_str("inf"),
            Ratio::Undefined => s.serialize_str("undefined"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseSchedule {
    /// Time scale used by the Gaussian centers and widths.
    pub tau: f64,
    pub omega_a: PulseShape,
    pub omega_b: PulseShape,
    pub g_a: PulseShape,
    pub g_b: PulseShape,
}

impl PulseSchedule {
    pub fn evaluate(&self, t: f64) -> PulseValues {
        PulseValues {
            omega_a: self.omega_a.evaluate(t, self.tau),
            omega_b: self.omega_b.evaluate(t, self.tau),
            g_a: self.g_a.evaluate(t, self.tau),
            g_b: self.g_b.evaluate(t, self.tau),
        }
    }

    pub fn constant(values: PulseValues, tau: f64) -> Self {
        let c = |amplitude| PulseShape::Constant { amplitude };
        PulseSchedule {
            tau,
            omega_a: c(values.omega_a),
            omega_b: c(values.omega_b),
            g_a: c(values.g_a),
            g_b: c(values.g_b),
        }
    }

    pub fn zero(tau: f64) -> Self {
        Self::constant(PulseValues::default(), tau)
    }

    pub fn shifted(&self, delta: f64) -> Self {
        PulseSchedule {
            tau: self.tau,
            omega_a: self.omega_a.shifted(delta),
            omega_b: self.omega_b.shifted(delta),
            g_a: self.g_a.shifted(delta),
            g_b: self.g_b.shifted(delta),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau.is_finite() && self.tau > 0.0) {
            return Err(Error::config("schedule.tau", "must be > 0"));
        }
        self.omega_a.validate("schedule.omega_a")?;
        self.omega_b.validate("schedule.omega_b")?;
        self.g_a.validate("schedule.g_a")?;
        self.g_b.validate("schedule.g_b")
    }
}

fn gaussian(amplitude: f64, center: f64, width_divisor: f64) -> PulseShape {
    PulseShape::Gaussian {
        amplitude,
        center,
        width_divisor,
    }
}

/// Stokes-first STIRAP: `Omega_B` peaks at 0, `Omega_A` at `t0`, constant couplings `g`.
pub fn preset_stirap(params: &SystemParams) -> PulseSchedule {
    let d = params.width_divisor;
    PulseSchedule {
        tau: params.tau,
        omega_a: gaussian(params.omega0, params.t0, d),
        omega_b: gaussian(params.omega0, 0.0, d),
        g_a: PulseShape::Constant { amplitude: params.g },
        g_b: PulseShape::Constant { amplitude: params.g },
    }
}

/// Fractional STIRAP: as [`preset_stirap`] with a half-amplitude copy of the
/// Stokes envelope added to `Omega_A`.
pub fn preset_fstirap(params: &SystemParams) -> PulseSchedule {
    let d = params.width_divisor;
    let mut schedule = preset_stirap(params);
    schedule.omega_a = PulseShape::Sum {
        terms: vec![
            gaussian(params.omega0, params.t0, d),
            gaussian(params.omega0 / 2.0, 0.0, d),
        ],
    };
    schedule
}

fn log_ratio(schedule: &PulseSchedule, t: f64) -> Option<f64> {
    match schedule.evaluate(t).ratio() {
        Ratio::Finite(r) if r > 0.0 => Some(r.ln()),
        _ => None,
    }
}

/// Times in `[a, b]` (absolute) where `r(t)` crosses `level`, located on a uniform
/// sampling grid and refined by bisection on `ln r`.
pub fn ratio_crossings(schedule: &PulseSchedule, level: f64, a: f64, b: f64) -> Vec<f64> {
    let target = level.ln();
    let dt = (b - a) / DIAGNOSTIC_SAMPLES as f64;
    let f = |t: f64| log_ratio(schedule, t).map(|x| x - target);
    let mut out = Vec::new();
    let mut prev = (a, f(a));
    if prev.1 == Some(0.0) {
        out.push(a);
    }
    for k in 1..=DIAGNOSTIC_SAMPLES {
        let t = if k == DIAGNOSTIC_SAMPLES { b } else { a + k as f64 * dt };
        let cur = (t, f(t));
        match (prev.1, cur.1) {
            (_, Some(0.0)) => out.push(t),
            (Some(lo), Some(hi)) if lo != 0.0 && lo.signum() != hi.signum() => {
                out.push(bisect(&f, prev.0, t, lo));
            }
            _ => {}
        }
        prev = cur;
    }
    out
}

fn bisect(f: &impl Fn(f64) -> Option<f64>, mut lo: f64, mut hi: f64, f_lo: f64) -> f64 {
    let lo_sign = f_lo.signum();
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        match f(mid) {
            Some(0.0) => return mid,
            Some(v) if v.signum() == lo_sign => lo = mid,
            Some(_) => hi = mid,
            None => break,
        }
    }
    0.5 * (lo + hi)
}

/// First time in `[a, b]` where the inverse ratio `g_A Omega_B / (g_B Omega_A)`
/// equals `target`.
pub fn ratio_crossing(schedule: &PulseSchedule, target: f64, a: f64, b: f64) -> Option<f64> {
    ratio_crossings(schedule, 1.0 / target, a, b).first().copied()
}

#[derive(Debug, Clone, Serialize)]
pub struct Extremum {
    pub time: f64,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LimitConditions {
    /// `r -> 0` at the window start (STIRAP and fractional STIRAP).
    pub initial_ratio_vanishes: bool,
    /// `1/r -> 0` at the window end (STIRAP).
    pub final_inverse_vanishes: bool,
    /// `1/r -> 1/2` at the window end (fractional STIRAP).
    pub final_inverse_half: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct RatioReport {
    pub window: (f64, f64),
    pub epsilon: f64,
    pub start: Ratio,
    pub end: Ratio,
    pub min: Option<Extremum>,
    pub max: Option<Extremum>,
    /// `(level, times)` for levels 1/2, 1 and 2.
    pub crossings: Vec<(f64, Vec<f64>)>,
    pub conditions: LimitConditions,
}

/// Evaluates `r(t) = g_B Omega_A / (g_A Omega_B)` over the absolute window `[a, b]`.
pub fn ratio_diagnostics(schedule: &PulseSchedule, a: f64, b: f64, epsilon: f64) -> RatioReport {
    let start = schedule.evaluate(a).ratio();
    let end = schedule.evaluate(b).ratio();
    let mut min: Option<Extremum> = None;
    let mut max: Option<Extremum> = None;
    let dt = (b - a) / DIAGNOSTIC_SAMPLES as f64;
    for k in 0..=DIAGNOSTIC_SAMPLES {
        let t = if k == DIAGNOSTIC_SAMPLES { b } else { a + k as f64 * dt };
        if let Some(value) = schedule.evaluate(t).ratio().value() {
            if min.as_ref().is_none_or(|m| value < m.value) {
                min = Some(Extremum { time: t, value });
            }
            if max.as_ref().is_none_or(|m| value > m.value) {
                max = Some(Extremum { time: t, value });
            }
        }
    }
    let crossings = [0.5, 1.0, 2.0]
        .into_iter()
        .map(|level| (level, ratio_crossings(schedule, level, a, b)))
        .collect();
    let within = |r: Ratio, target: f64| r.value().is_some_and(|v| (v - target).abs() <= epsilon);
    RatioReport {
        window: (a, b),
        epsilon,
        start,
        end,
        min,
        max,
        crossings,
        conditions: LimitConditions {
            initial_ratio_vanishes: within(start, 0.0),
            final_inverse_vanishes: within(end.inverse(), 0.0),
            final_inverse_half: within(end.inverse(), 0.5),
        },
    }
}
