//! Resolved physical and numerical parameters of a run.
//!
//! Frequencies (`omega0`, `g`, `kappa`, `gamma`) share one unit, by default
//! `omega0 = 1`. Time-like settings (`t0`, the window and the step) are
//! multiples of `tau`; `tau` itself is in inverse frequency units.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Width divisor of the Gaussian envelopes, `exp[-(t - c)^2 / (d tau^2)]`.
/// `d = 8` makes the Gaussian standard deviation equal to the default delay `2 tau`.
pub const DEFAULT_WIDTH_DIVISOR: f64 = 8.0;
/// Width divisor of the broad envelope `exp[-(t - c)^2 / (200 tau^2)]`.
pub const BROAD_WIDTH_DIVISOR: f64 = 200.0;
pub const DEFAULT_STEPS_PER_TAU: f64 = 2000.0;
pub const DEFAULT_RECORD_POINTS: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub omega0: f64,
    pub g: f64,
    pub tau: f64,
    /// Pulse delay in units of `tau`.
    pub t0: f64,
    pub kappa: f64,
    pub gamma: f64,
    pub width_divisor: f64,
    pub n_max: usize,
    /// Window start in units of `tau`.
    pub t_start: f64,
    /// Window end in units of `tau`.
    pub t_end: f64,
    /// Integrator step in units of `tau`.
    pub step: f64,
    /// Number of recorded intervals; the trajectory holds `record_points + 1` states
    /// when the step count divides evenly.
    pub record_points: usize,
}

impl Default for SystemParams {
    /// `g = 5 Omega0`, `tau = 1/Omega0`, `t0 = 2 tau`, `kappa = gamma = 0.005 g`.
    fn default() -> Self {
        let g = 5.0;
        let (t_start, t_end) = default_window(DEFAULT_WIDTH_DIVISOR, 2.0);
        SystemParams {
            omega0: 1.0,
            g,
            tau: 1.0,
            t0: 2.0,
            kappa: 0.005 * g,
            gamma: 0.005 * g,
            width_divisor: DEFAULT_WIDTH_DIVISOR,
            n_max: 1,
            t_start,
            t_end,
            step: 1.0 / DEFAULT_STEPS_PER_TAU,
            record_points: DEFAULT_RECORD_POINTS,
        }
    }
}

/// Default integration window `[start, end]` in units of `tau`.
///
/// Starts six Gaussian standard deviations before the Stokes peak and ends eight
/// after the pump peak. The broad width `d = 200` uses `[-40, 60]` instead,
/// since the full tails would need several hundred `tau`.
pub fn default_window(width_divisor: f64, t0: f64) -> (f64, f64) {
    if width_divisor == BROAD_WIDTH_DIVISOR {
        return (-40.0, 60.0);
    }
    let sigma = (width_divisor / 2.0).sqrt();
    (-6.0 * sigma, t0 + 8.0 * sigma)
}

impl SystemParams {
    pub fn lossless(mut self) -> Self {
        self.kappa = 0.0;
        self.gamma = 0.0;
        self
    }

    pub fn with_width_divisor(mut self, d: f64) -> Self {
        self.width_divisor = d;
        let (a, b) = default_window(d, self.t0);
        self.t_start = a;
        self.t_end = b;
        self
    }

    pub fn window(&self) -> (f64, f64) {
        (self.t_start * self.tau, self.t_end * self.tau)
    }

    pub fn step_abs(&self) -> f64 {
        self.step * self.tau
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            ("params.omega0", self.omega0),
            ("params.g", self.g),
            ("params.tau", self.tau),
            ("params.t0", self.t0),
            ("params.kappa", self.kappa),
            ("params.gamma", self.gamma),
            ("params.width_divisor", self.width_divisor),
            ("params.t_start", self.t_start),
            ("params.t_end", self.t_end),
            ("params.step", self.step),
        ];
        for (key, v) in finite {
            if !v.is_finite() {
                return Err(Error::config(key, "must be finite"));
            }
        }
        for (key, v) in [
            ("params.omega0", self.omega0),
            ("params.g", self.g),
            ("params.kappa", self.kappa),
            ("params.gamma", self.gamma),
        ] {
            if v < 0.0 {
                return Err(Error::config(key, "must be >= 0"));
            }
        }
        if self.tau <= 0.0 {
            return Err(Error::config("params.tau", "must be > 0"));
        }
        if self.width_divisor <= 0.0 {
            return Err(Error::config("params.width_divisor", "must be > 0"));
        }
        if self.step <= 0.0 {
            return Err(Error::config("params.step", "must be > 0"));
        }
        if self.t_end <= self.t_start {
            return Err(Error::config("params.t_end", "window must satisfy t_start < t_end"));
        }
        if self.n_max < 1 {
            return Err(Error::config("params.n_max", "must be >= 1"));
        }
        if self.record_points < 1 {
            return Err(Error::config("params.record_points", "must be >= 1"));
        }
        Ok(())
    }
}
