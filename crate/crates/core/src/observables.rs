//! Populations, photon and excited-state probabilities, the dark-state error
//! probability and fidelities to the entangled target states.

use num_complex::Complex64;
use serde::Serialize;

use crate::basis::{BasisState, StateVector, SUBSPACE_DIM, SUBSPACE_STATES};
use crate::darkstate::{dark_state_from_values, DarkState};
use crate::propagator::Trajectory;

/// Fixed CSV column order of [`MetricsRow`].
pub const METRICS_COLUMNS: [&str; 17] = [
    "t",
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
    "OmegaA",
    "OmegaB",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetLabel {
    Qubit,
    Qutrit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TargetState {
    pub label: TargetLabel,
    pub amplitudes: [Complex64; SUBSPACE_DIM],
}

impl TargetState {
    /// `(|g_L,g_R,0,0> + |g_R,g_L,0,0>) / sqrt 2`.
    pub fn qubit() -> Self {
        let a = Complex64::new(0.5f64.sqrt(), 0.0);
        let mut amplitudes = [Complex64::new(0.0, 0.0); SUBSPACE_DIM];
        amplitudes[4] = a;
        amplitudes[7] = a;
        TargetState {
            label: TargetLabel::Qubit,
            amplitudes,
        }
    }

    /// `(|g_a,g_0,0,0> + |g_L,g_R,0,0> + |g_R,g_L,0,0>) / sqrt 3`.
    pub fn qutrit() -> Self {
        let a = Complex64::new((1.0f64 / 3.0).sqrt(), 0.0);
        let mut amplitudes = [Complex64::new(0.0, 0.0); SUBSPACE_DIM];
        for k in [0, 4, 7] {
            amplitudes[k] = a;
        }
        TargetState {
            label: TargetLabel::Qutrit,
            amplitudes,
        }
    }
}

/// Locates the subspace states inside an arbitrary basis listing.
#[derive(Debug, Clone)]
pub struct SubspaceLookup {
    positions: [Option<usize>; SUBSPACE_DIM],
    photonic: Vec<bool>,
    excited: Vec<bool>,
}

impl SubspaceLookup {
    pub fn new(basis: &[BasisState]) -> Self {
        let positions = SUBSPACE_STATES.map(|s| basis.iter().position(|b| *b == s));
        SubspaceLookup {
            positions,
            photonic: basis.iter().map(|s| s.photons() >= 1).collect(),
            excited: basis.iter().map(|s| s.excited_atoms() >= 1).collect(),
        }
    }

    pub fn amplitudes(&self, state: &StateVector) -> [Complex64; SUBSPACE_DIM] {
        self.positions
            .map(|p| p.map_or(Complex64::new(0.0, 0.0), |i| state[i]))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Populations {
    pub subspace: [f64; SUBSPACE_DIM],
    /// Probability of at least one cavity photon.
    pub photon: f64,
    /// Probability of at least one atom in `e_L`, `e_0` or `e_R`.
    pub excited: f64,
}

pub fn populations(state: &StateVector, lookup: &SubspaceLookup) -> Populations {
    let subspace = lookup.amplitudes(state).map(|z| z.norm_sqr());
    let mut photon = 0.0;
    let mut excited = 0.0;
    for (i, z) in state.iter().enumerate() {
        let p = z.norm_sqr();
        if lookup.photonic[i] {
            photon += p;
        }
        if lookup.excited[i] {
            excited += p;
        }
    }
    Populations {
        subspace,
        photon,
        excited,
    }
}

/// `1 - |<D|phi>|^2`, with `phi` optionally renormalized first.
pub fn error_probability(subspace_amplitudes: &[Complex64; SUBSPACE_DIM], norm_sq: f64, dark: &DarkState, normalize: bool) -> f64 {
    let overlap: Complex64 = dark
        .amplitudes
        .iter()
        .zip(subspace_amplitudes)
        .map(|(d, p)| d.conj() * p)
        .sum();
    let mut o = overlap.norm_sqr();
    if normalize && norm_sq > 0.0 {
        o /= norm_sq;
    }
    (1.0 - o).max(0.0)
}

pub fn fidelity(subspace_amplitudes: &[Complex64; SUBSPACE_DIM], target: &TargetState) -> f64 {
    target
        .amplitudes
        .iter()
        .zip(subspace_amplitudes)
        .map(|(t, p)| t.conj() * p)
        .sum::<Complex64>()
        .norm_sqr()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricsRow {
    pub t: f64,
    pub populations: [f64; SUBSPACE_DIM],
    pub photon: f64,
    pub excited: f64,
    /// `None` when no dark state is defined anywhere in the window.
    pub error: Option<f64>,
    pub norm: f64,
    pub fidelity_qubit: f64,
    pub fidelity_qutrit: f64,
    pub omega_a: f64,
    pub omega_b: f64,
    pub g_a: f64,
    pub g_b: f64,
}

impl MetricsRow {
    /// Values in [`METRICS_COLUMNS`] order; `None` marks a missing value.
    pub fn values(&self) -> Vec<Option<f64>> {
        let mut v = Vec::with_capacity(METRICS_COLUMNS.len());
        v.push(Some(self.t));
        v.extend(self.populations.iter().map(|p| Some(*p)));
        v.extend([
            Some(self.photon),
            Some(self.excited),
            self.error,
            Some(self.norm),
            Some(self.fidelity_qubit),
            Some(self.fidelity_qutrit),
            Some(self.omega_a),
            Some(self.omega_b),
        ]);
        v
    }

    /// `max_{i in {1,5,8}} |P_i - 1/3|`.
    pub fn max_deviation_from_third(&self) -> f64 {
        [0, 4, 7]
            .iter()
            .map(|&i| (self.populations[i] - 1.0 / 3.0).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Metrics {
    #[serde(skip)]
    pub rows: Vec<MetricsRow>,
    /// Row indices whose error probability used the nearest defined dark state.
    pub substituted_dark_rows: Vec<usize>,
    pub normalized_error: bool,
}

impl Metrics {
    pub fn last(&self) -> &MetricsRow {
        self.rows.last().expect("metrics hold at least one row")
    }

    /// Trapezoidal time average of the error probability over rows where it is defined.
    pub fn time_averaged_error(&self) -> Option<f64> {
        let mut area = 0.0;
        let mut span = 0.0;
        for w in self.rows.windows(2) {
            if let (Some(a), Some(b)) = (w[0].error, w[1].error) {
                let dt = w[1].t - w[0].t;
                area += 0.5 * (a + b) * dt;
                span += dt;
            }
        }
        (span > 0.0).then(|| area / span)
    }

    pub fn max_photon(&self) -> f64 {
        self.rows.iter().map(|r| r.photon).fold(0.0, f64::max)
    }

    pub fn max_excited(&self) -> f64 {
        self.rows.iter().map(|r| r.excited).fold(0.0, f64::max)
    }
}

/// Evaluates every metric on the recorded trajectory.
///
/// Where the dark state is undefined (all pulse products vanish) the nearest
/// defined dark state in the window is used, earlier rows winning ties.
pub fn compute_metrics(traj: &Trajectory, normalize_error: bool) -> Metrics {
    let lookup = SubspaceLookup::new(&traj.basis);
    let schedule = &traj.meta.schedule;
    let values: Vec<_> = traj.times.iter().map(|&t| schedule.evaluate(t)).collect();
    let darks: Vec<DarkState> = values.iter().map(dark_state_from_values).collect();
    let defined: Vec<usize> = (0..darks.len()).filter(|&i| darks[i].defined).collect();
    let mut substituted = Vec::new();
    let qubit = TargetState::qubit();
    let qutrit = TargetState::qutrit();

    let rows = traj
        .states
        .iter()
        .enumerate()
        .map(|(i, state)| {
            let pops = populations(state, &lookup);
            let amps = lookup.amplitudes(state);
            let norm = traj.norms[i];
            let dark = if darks[i].defined {
                Some(&darks[i])
            } else {
                let nearest = defined.iter().min_by_key(|&&j| j.abs_diff(i));
                if nearest.is_some() {
                    substituted.push(i);
                }
                nearest.map(|&j| &darks[j])
            };
            let v = values[i];
            MetricsRow {
                t: traj.times[i],
                populations: pops.subspace,
                photon: pops.photon,
                excited: pops.excited,
                error: dark.map(|d| error_probability(&amps, norm, d, normalize_error)),
                norm,
                fidelity_qubit: fidelity(&amps, &qubit),
                fidelity_qutrit: fidelity(&amps, &qutrit),
                omega_a: v.omega_a,
                omega_b: v.omega_b,
                g_a: v.g_a,
                g_b: v.g_b,
            }
        })
        .collect();
    Metrics {
        rows,
        substituted_dark_rows: substituted,
        normalized_error: normalize_error,
    }
}
