//! Fixed-step fourth-order Runge-Kutta integration of `i d|psi>/dt = H(t)|psi>`.
//!
//! No renormalization is applied: under the non-Hermitian Hamiltonian the squared
//! norm of the state is the survival probability.

use num_complex::Complex64;
use serde::Serialize;

use crate::basis::{BasisState, StateVector, SUBSPACE_DIM};
use crate::error::{Error, Result};
use crate::hamiltonian::{CMatrix, CouplingModel};
use crate::params::SystemParams;
use crate::pulses::PulseSchedule;

/// Largest accepted `h * ||H||` (row-sum norm).
pub const MAX_STEP_NORM_PRODUCT: f64 = 0.1;

/// Time-dependent linear generator `psi -> H(t) psi`.
pub trait Generator {
    fn dim(&self) -> usize;
    fn apply(&self, t: f64, psi: &[Complex64], out: &mut [Complex64]);
    /// Upper bound on `||H(t)||`, used by the step-size guard.
    fn norm_bound(&self, t: f64) -> f64;
}

/// `H_nh(t)` of the cavity model over the model's basis.
pub struct CavityGenerator<'a> {
    model: &'a CouplingModel,
    schedule: &'a PulseSchedule,
    decay: Vec<f64>,
}

impl<'a> CavityGenerator<'a> {
    pub fn new(model: &'a CouplingModel, schedule: &'a PulseSchedule, kappa: f64, gamma: f64) -> Self {
        CavityGenerator {
            model,
            schedule,
            decay: model.decay_diagonal(kappa, gamma),
        }
    }
}

impl Generator for CavityGenerator<'_> {
    fn dim(&self) -> usize {
        self.model.dim()
    }

    fn apply(&self, t: f64, psi: &[Complex64], out: &mut [Complex64]) {
        self.model.apply(&self.schedule.evaluate(t), &self.decay, psi, out);
    }

    fn norm_bound(&self, t: f64) -> f64 {
        self.model.row_sum_norm(&self.schedule.evaluate(t), &self.decay)
    }
}

/// Time-independent dense generator.
pub struct ConstantGenerator {
    pub matrix: CMatrix,
}

impl Generator for ConstantGenerator {
    fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    fn apply(&self, _t: f64, psi: &[Complex64], out: &mut [Complex64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.matrix.row(i).iter().zip(psi).map(|(a, b)| a * b).sum();
        }
    }

    fn norm_bound(&self, _t: f64) -> f64 {
        self.matrix
            .row_iter()
            .map(|r| r.iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

struct Workspace {
    k1: Vec<Complex64>,
    k2: Vec<Complex64>,
    k3: Vec<Complex64>,
    k4: Vec<Complex64>,
    tmp: Vec<Complex64>,
}

impl Workspace {
    fn new(dim: usize) -> Self {
        let z = vec![Complex64::new(0.0, 0.0); dim];
        Workspace {
            k1: z.clone(),
            k2: z.clone(),
            k3: z.clone(),
            k4: z.clone(),
            tmp: z,
        }
    }
}

const MINUS_I: Complex64 = Complex64::new(0.0, -1.0);

fn rk4_step(gen: &impl Generator, t: f64, h: f64, psi: &mut [Complex64], ws: &mut Workspace) {
    let half = 0.5 * h;
    gen.apply(t, psi, &mut ws.k1);
    for ((x, p), k) in ws.tmp.iter_mut().zip(psi.iter()).zip(&ws.k1) {
        *x = p + MINUS_I * k * half;
    }
    gen.apply(t + half, &ws.tmp, &mut ws.k2);
    for ((x, p), k) in ws.tmp.iter_mut().zip(psi.iter()).zip(&ws.k2) {
        *x = p + MINUS_I * k * half;
    }
    gen.apply(t + half, &ws.tmp, &mut ws.k3);
    for ((x, p), k) in ws.tmp.iter_mut().zip(psi.iter()).zip(&ws.k3) {
        *x = p + MINUS_I * k * h;
    }
    gen.apply(t + h, &ws.tmp, &mut ws.k4);
    let sixth = h / 6.0;
    for (i, p) in psi.iter_mut().enumerate() {
        let sum = ws.k1[i] + 2.0 * ws.k2[i] + 2.0 * ws.k3[i] + ws.k4[i];
        *p += MINUS_I * sum * sixth;
    }
}

/// Uniform step grid covering `[start, end]` with step at most `nominal`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepGrid {
    pub start: f64,
    pub end: f64,
    pub steps: usize,
    pub step: f64,
}

impl StepGrid {
    pub fn new(start: f64, end: f64, nominal: f64) -> Self {
        let span = end - start;
        let steps = ((span / nominal) - 1e-9).ceil().max(1.0) as usize;
        StepGrid {
            start,
            end,
            steps,
            step: span / steps as f64,
        }
    }

    pub fn time(&self, k: usize) -> f64 {
        if k == self.steps {
            self.end
        } else {
            self.start + k as f64 * self.step
        }
    }

    pub fn halved(&self) -> Self {
        StepGrid {
            steps: self.steps * 2,
            step: (self.end - self.start) / (self.steps * 2) as f64,
            ..*self
        }
    }
}

/// Integrates from `grid.start` to `grid.end`, recording the state every
/// `record_every` steps and at the final step.
pub fn integrate(
    gen: &impl Generator,
    initial: &StateVector,
    grid: &StepGrid,
    record_every: usize,
) -> Result<(Vec<f64>, Vec<StateVector>)> {
    if initial.len() != gen.dim() {
        return Err(Error::DimensionMismatch {
            expected: gen.dim(),
            got: initial.len(),
        });
    }
    let every = record_every.max(1);
    let mut ws = Workspace::new(gen.dim());
    let mut psi: Vec<Complex64> = initial.iter().copied().collect();
    let mut times = vec![grid.start];
    let mut states = vec![initial.clone()];
    for k in 0..grid.steps {
        let t = grid.time(k);
        let norm = gen.norm_bound(t);
        let product = grid.step * norm;
        if product > MAX_STEP_NORM_PRODUCT {
            return Err(Error::StepTooLarge {
                time: t,
                step: grid.step,
                norm,
                product,
                limit: MAX_STEP_NORM_PRODUCT,
            });
        }
        rk4_step(gen, t, grid.step, &mut psi, &mut ws);
        let done = k + 1;
        if done % every == 0 || done == grid.steps {
            times.push(grid.time(done));
            states.push(StateVector::from_column_slice(&psi));
        }
    }
    Ok((times, states))
}

#[derive(Debug, Clone, Serialize)]
pub struct TrajectoryMeta {
    pub params: SystemParams,
    pub schedule: PulseSchedule,
    pub grid: StepGrid,
    pub record_every: usize,
    pub dim: usize,
    pub restricted_to_subspace: bool,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<StateVector>,
    pub norms: Vec<f64>,
    /// Coordinates of `states`.
    pub basis: Vec<BasisState>,
    pub meta: TrajectoryMeta,
}

impl Trajectory {
    pub fn final_state(&self) -> &StateVector {
        self.states.last().expect("a trajectory holds at least the initial state")
    }
}

pub fn record_every(steps: usize, record_points: usize) -> usize {
    steps.div_ceil(record_points.max(1)).max(1)
}

/// Propagates `initial` (coordinates of `model`) under `H_nh(t)` over the
/// configured window.
pub fn propagate(
    initial: &StateVector,
    schedule: &PulseSchedule,
    params: &SystemParams,
    model: &CouplingModel,
) -> Result<Trajectory> {
    params.validate()?;
    let (a, b) = params.window();
    let grid = StepGrid::new(a, b, params.step_abs());
    let every = record_every(grid.steps, params.record_points);
    let gen = CavityGenerator::new(model, schedule, params.kappa, params.gamma);
    let (times, states) = integrate(&gen, initial, &grid, every)?;
    let norms = states.iter().map(|s| s.norm_squared()).collect();
    Ok(Trajectory {
        times,
        states,
        norms,
        basis: model.states().to_vec(),
        meta: TrajectoryMeta {
            params: params.clone(),
            schedule: schedule.clone(),
            grid,
            record_every: every,
            dim: model.dim(),
            restricted_to_subspace: model.dim() == SUBSPACE_DIM,
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ConvergenceOrder {
    Measured { order: f64 },
    RoundoffLimited,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ConvergenceReport {
    pub result: ConvergenceOrder,
    /// `||psi_h - psi_{h/2}||`, `||psi_{h/2} - psi_{h/4}||`.
    pub differences: [f64; 2],
    pub base_step: f64,
}

impl ConvergenceReport {
    pub fn order(&self) -> Option<f64> {
        match self.result {
            ConvergenceOrder::Measured { order } => Some(order),
            ConvergenceOrder::RoundoffLimited => None,
        }
    }
}

/// Step-halving estimate of the global order from final states at `h`, `h/2`, `h/4`.
pub fn convergence_order_with(gen: &impl Generator, initial: &StateVector, grid: &StepGrid) -> Result<ConvergenceReport> {
    let fine = grid.halved();
    let finest = fine.halved();
    let last = |g: &StepGrid| -> Result<StateVector> {
        let (_, mut states) = integrate(gen, initial, g, g.steps)?;
        Ok(states.pop().expect("final state recorded"))
    };
    let (x, y, z) = (last(grid)?, last(&fine)?, last(&finest)?);
    let coarse_diff = (&x - &y).norm();
    let fine_diff = (&y - &z).norm();
    let floor = 100.0 * (finest.steps as f64).sqrt() * f64::EPSILON * z.norm().max(1e-300);
    let result = if fine_diff <= floor || coarse_diff <= fine_diff {
        ConvergenceOrder::RoundoffLimited
    } else {
        ConvergenceOrder::Measured {
            order: (coarse_diff / fine_diff).log2(),
        }
    };
    Ok(ConvergenceReport {
        result,
        differences: [coarse_diff, fine_diff],
        base_step: grid.step,
    })
}

pub fn convergence_order(
    initial: &StateVector,
    schedule: &PulseSchedule,
    params: &SystemParams,
    model: &CouplingModel,
) -> Result<ConvergenceReport> {
    params.validate()?;
    let (a, b) = params.window();
    let grid = StepGrid::new(a, b, params.step_abs());
    let gen = CavityGenerator::new(model, schedule, params.kappa, params.gamma);
    convergence_order_with(&gen, initial, &grid)
}
