//! One complete run: schedule selection, propagation and metrics.

use serde::{Deserialize, Serialize};

use crate::basis::{BasisIndex, BasisState, StateVector, SUBSPACE_STATES};
use crate::error::{Error, Result};
use crate::hamiltonian::CouplingModel;
use crate::observables::{compute_metrics, Metrics};
use crate::params::SystemParams;
use crate::propagator::{propagate, Trajectory};
use crate::pulses::{preset_fstirap, preset_stirap, PulseSchedule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    Stirap,
    Fstirap,
    Custom,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::Stirap => "stirap",
            Scenario::Fstirap => "fstirap",
            Scenario::Custom => "custom",
        }
    }
}

/// `|g_a, g_0, 0, 0>`.
pub const INITIAL_STATE: BasisState = SUBSPACE_STATES[0];

pub fn schedule_for(scenario: Scenario, params: &SystemParams, custom: Option<&PulseSchedule>) -> Result<PulseSchedule> {
    match (scenario, custom) {
        (Scenario::Stirap, _) => Ok(preset_stirap(params)),
        (Scenario::Fstirap, _) => Ok(preset_fstirap(params)),
        (Scenario::Custom, Some(s)) => {
            s.validate()?;
            Ok(s.clone())
        }
        (Scenario::Custom, None) => Err(Error::config("schedule", "scenario `custom` requires a schedule")),
    }
}

pub fn build_model(params: &SystemParams, restrict_to_subspace: bool) -> Result<(BasisIndex, CouplingModel)> {
    let index = BasisIndex::new(params.n_max)?;
    let model = if restrict_to_subspace {
        CouplingModel::subspace(&index)
    } else {
        CouplingModel::full(&index)
    };
    Ok((index, model))
}

/// Unit vector on `state` in the model's coordinates.
pub fn initial_vector(model: &CouplingModel, state: &BasisState) -> Result<StateVector> {
    let i = model
        .states()
        .iter()
        .position(|s| s == state)
        .ok_or_else(|| Error::config("initial", format!("{state} is not part of the propagation basis")))?;
    let mut v = StateVector::zeros(model.dim());
    v[i] = num_complex::Complex64::new(1.0, 0.0);
    Ok(v)
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub trajectory: Trajectory,
    pub metrics: Metrics,
}

pub fn run(
    params: &SystemParams,
    schedule: &PulseSchedule,
    initial: &BasisState,
    restrict_to_subspace: bool,
    normalize_error: bool,
) -> Result<RunOutput> {
    params.validate()?;
    let (_, model) = build_model(params, restrict_to_subspace)?;
    let psi0 = initial_vector(&model, initial)?;
    let trajectory = propagate(&psi0, schedule, params, &model)?;
    let metrics = compute_metrics(&trajectory, normalize_error);
    Ok(RunOutput { trajectory, metrics })
}

pub fn run_scenario(params: &SystemParams, scenario: Scenario, restrict_to_subspace: bool) -> Result<RunOutput> {
    let schedule = schedule_for(scenario, params, None)?;
    run(params, &schedule, &INITIAL_STATE, restrict_to_subspace, false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::AtomLevel;

    #[test]
    fn custom_requires_schedule() {
        let p = SystemParams::default();
        assert!(schedule_for(Scenario::Custom, &p, None).is_err());
        let s = PulseSchedule::zero(1.0);
        assert_eq!(schedule_for(Scenario::Custom, &p, Some(&s)).unwrap(), s);
    }

    #[test]
    fn initial_state_outside_subspace_is_rejected_when_restricted() {
        let (_, model) = build_model(&SystemParams::default(), true).unwrap();
        let err = initial_vector(&model, &BasisState::new(AtomLevel::EL, AtomLevel::EL, 0, 0)).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn metrics_cover_every_recorded_state() {
        let mut p = SystemParams::default();
        p.record_points = 50;
        let out = run_scenario(&p, Scenario::Stirap, true).unwrap();
        assert_eq!(out.metrics.rows.len(), out.trajectory.states.len());
        let last = out.metrics.last();
        assert_eq!(last.t, p.window().1);
        assert!(last.populations.iter().sum::<f64>() <= last.norm + 1e-10);
    }
}
