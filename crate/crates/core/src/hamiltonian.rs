//! Interaction Hamiltonian of the two driven atoms in the bi-mode cavity and its
//! non-Hermitian extension with cavity and spontaneous-emission decay.
//!
//! `H0(t)` is a linear combination of seven time-independent coupling patterns,
//! one per term of the interaction, each weighted by a single pulse value:
//!
//! | family | weight | operator (plus h.c.) |
//! |---|---|---|
//! | `CavityRA` | `g_A` | `a_R |e_0><g_R|` on atom A |
//! | `CavityLA` | `g_A` | `a_L |e_0><g_L|` on atom A |
//! | `PumpA` | `Omega_A` | `|e_0><g_a|` on atom A |
//! | `CavityRB` | `g_B` | `a_R |e_L><g_0|` on atom B |
//! | `CavityLB` | `g_B` | `a_L |e_R><g_0|` on atom B |
//! | `StokesLB` | `Omega_B` | `|e_L><g_L|` on atom B |
//! | `StokesRB` | `Omega_B` | `|e_R><g_R|` on atom B |
//!
//! The patterns are stored sparsely; dense matrices are assembled on request.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::basis::{AtomLevel, BasisIndex, BasisState, StateVector, SUBSPACE_DIM};
use crate::params::SystemParams;
use crate::pulses::{PulseSchedule, PulseValues};

pub type CMatrix = DMatrix<Complex64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    CavityRA,
    CavityLA,
    PumpA,
    CavityRB,
    CavityLB,
    StokesLB,
    StokesRB,
}

impl Family {
    pub const ALL: [Family; 7] = [
        Family::CavityRA,
        Family::CavityLA,
        Family::PumpA,
        Family::CavityRB,
        Family::CavityLB,
        Family::StokesLB,
        Family::StokesRB,
    ];

    pub fn weight(self, v: &PulseValues) -> f64 {
        match self {
            Family::CavityRA | Family::CavityLA => v.g_a,
            Family::PumpA => v.omega_a,
            Family::CavityRB | Family::CavityLB => v.g_b,
            Family::StokesLB | Family::StokesRB => v.omega_b,
        }
    }

    /// `(atom B?, excited level, ground level, photon mode)`: the operator
    /// `[a_mode] |excited><ground|` on the given atom.
    fn transition(self) -> (bool, AtomLevel, AtomLevel, Option<Mode>) {
        use AtomLevel::*;
        match self {
            Family::CavityRA => (false, E0, GR, Some(Mode::R)),
            Family::CavityLA => (false, E0, GL, Some(Mode::L)),
            Family::PumpA => (false, E0, Ga, None),
            Family::CavityRB => (true, EL, G0, Some(Mode::R)),
            Family::CavityLB => (true, ER, G0, Some(Mode::L)),
            Family::StokesLB => (true, EL, GL, None),
            Family::StokesRB => (true, ER, GR, None),
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Mode {
    R,
    L,
}

/// One matrix element `<row| P |col> = value` of a coupling pattern.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Entry {
    pub row: usize,
    pub col: usize,
    pub value: f64,
}

/// Sparse, time-independent decomposition of the Hamiltonian over a set of basis states.
#[derive(Debug, Clone)]
pub struct CouplingModel {
    states: Vec<BasisState>,
    patterns: Vec<(Family, Vec<Entry>)>,
    photons: Vec<f64>,
    excitations: Vec<f64>,
}

impl CouplingModel {
    /// Model over the full truncated basis.
    pub fn full(index: &BasisIndex) -> Self {
        let states = index.states().to_vec();
        let patterns = Family::ALL
            .iter()
            .map(|&f| (f, family_entries(f, index)))
            .collect();
        Self::with_patterns(states, patterns)
    }

    /// Model restricted to the eight-state invariant subspace (canonical order).
    pub fn subspace(index: &BasisIndex) -> Self {
        let map = index.subspace_map();
        let position = |full: usize| map.iter().position(|&i| i == full);
        let full = Self::full(index);
        let patterns = full
            .patterns
            .iter()
            .map(|(f, entries)| {
                let kept = entries
                    .iter()
                    .filter_map(|e| {
                        Some(Entry {
                            row: position(e.row)?,
                            col: position(e.col)?,
                            value: e.value,
                        })
                    })
                    .collect();
                (*f, kept)
            })
            .collect();
        let states = map.iter().map(|&i| index.states()[i]).collect();
        Self::with_patterns(states, patterns)
    }

    fn with_patterns(states: Vec<BasisState>, patterns: Vec<(Family, Vec<Entry>)>) -> Self {
        let photons = states.iter().map(|s| s.photons() as f64).collect();
        let excitations = states.iter().map(|s| s.excited_atoms() as f64).collect();
        CouplingModel {
            states,
            patterns,
            photons,
            excitations,
        }
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[BasisState] {
        &self.states
    }

    pub fn patterns(&self) -> &[(Family, Vec<Entry>)] {
        &self.patterns
    }

    /// Imaginary part of the diagonal of `H_nh - H0`, i.e. `-(kappa n + gamma n_e)`.
    pub fn decay_diagonal(&self, kappa: f64, gamma: f64) -> Vec<f64> {
        self.photons
            .iter()
            .zip(&self.excitations)
            .map(|(n, e)| -(kappa * n + gamma * e))
            .collect()
    }

    /// `out = H0(v) psi + i diag(decay) psi`, with `decay` from [`Self::decay_diagonal`].
    pub fn apply(&self, values: &PulseValues, decay: &[f64], psi: &[Complex64], out: &mut [Complex64]) {
        for ((o, p), d) in out.iter_mut().zip(psi).zip(decay) {
            *o = Complex64::new(0.0, *d) * p;
        }
        for (family, entries) in &self.patterns {
            let w = family.weight(values);
            if w == 0.0 {
                continue;
            }
            for e in entries {
                out[e.row] += psi[e.col] * (w * e.value);
            }
        }
    }

    /// Row-sum (infinity) norm of `H_nh`, an upper bound on its spectral norm.
    pub fn row_sum_norm(&self, values: &PulseValues, decay: &[f64]) -> f64 {
        let mut rows: Vec<f64> = decay.iter().map(|d| d.abs()).collect();
        for (family, entries) in &self.patterns {
            let w = family.weight(values).abs();
            for e in entries {
                rows[e.row] += w * e.value.abs();
            }
        }
        rows.into_iter().fold(0.0, f64::max)
    }

    pub fn dense_h0(&self, values: &PulseValues) -> CMatrix {
        let mut m = CMatrix::zeros(self.dim(), self.dim());
        for (family, entries) in &self.patterns {
            let w = family.weight(values);
            for e in entries {
                m[(e.row, e.col)] += Complex64::new(w * e.value, 0.0);
            }
        }
        m
    }

    pub fn dense_hnh(&self, values: &PulseValues, kappa: f64, gamma: f64) -> CMatrix {
        let mut m = self.dense_h0(values);
        for (i, d) in self.decay_diagonal(kappa, gamma).into_iter().enumerate() {
            m[(i, i)] += Complex64::new(0.0, d);
        }
        m
    }
}

fn family_entries(family: Family, index: &BasisIndex) -> Vec<Entry> {
    let (on_b, excited, ground, mode) = family.transition();
    let mut entries = Vec::new();
    for (col, s) in index.states().iter().enumerate() {
        let level = if on_b { s.atom_b } else { s.atom_a };
        if level != ground {
            continue;
        }
        // a_mode removes one photon with amplitude sqrt(n).
        let (n_r, n_l, amp) = match mode {
            None => (s.n_r, s.n_l, 1.0),
            Some(Mode::R) if s.n_r > 0 => (s.n_r - 1, s.n_l, (s.n_r as f64).sqrt()),
            Some(Mode::L) if s.n_l > 0 => (s.n_r, s.n_l - 1, (s.n_l as f64).sqrt()),
            Some(_) => continue,
        };
        let target = if on_b {
            BasisState::new(s.atom_a, excited, n_r, n_l)
        } else {
            BasisState::new(excited, s.atom_b, n_r, n_l)
        };
        let row = index.encode(&target).expect("lowering stays inside the truncation");
        entries.push(Entry { row, col, value: amp });
        entries.push(Entry {
            row: col,
            col: row,
            value: amp,
        });
    }
    entries
}

#[derive(Debug, Clone)]
pub struct HamiltonianMatrix {
    pub entries: CMatrix,
    pub time: f64,
    pub hermitian: bool,
}

pub fn assemble_h0(t: f64, schedule: &PulseSchedule, model: &CouplingModel) -> HamiltonianMatrix {
    HamiltonianMatrix {
        entries: model.dense_h0(&schedule.evaluate(t)),
        time: t,
        hermitian: true,
    }
}

pub fn assemble_hnh(
    t: f64,
    schedule: &PulseSchedule,
    params: &SystemParams,
    model: &CouplingModel,
) -> HamiltonianMatrix {
    let hermitian = params.kappa == 0.0 && params.gamma == 0.0;
    HamiltonianMatrix {
        entries: model.dense_hnh(&schedule.evaluate(t), params.kappa, params.gamma),
        time: t,
        hermitian,
    }
}

/// Largest singular value. Exact (SVD) for small matrices; power iteration on
/// `M^dagger M` above 16 rows, which converges from below.
pub fn spectral_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    if m.nrows() <= 16 {
        return m.singular_values().iter().fold(0.0, |a, &b| a.max(b));
    }
    let mut v = StateVector::from_fn(m.ncols(), |i, _| Complex64::new(1.0 + (i as f64 * 0.618).fract(), 0.0));
    v /= Complex64::new(v.norm(), 0.0);
    let mh = m.adjoint();
    let mut estimate = 0.0;
    for _ in 0..500 {
        let w = &mh * (m * &v);
        let n = w.norm();
        if n == 0.0 {
            return 0.0;
        }
        let next = n.sqrt();
        v = w / Complex64::new(n, 0.0);
        if (next - estimate).abs() <= 1e-10 * next {
            return next;
        }
        estimate = next;
    }
    estimate
}

/// Largest out-of-subspace norm of `H0 s` over the subspace basis vectors `s`,
/// returned together with `||H0||` at the same time.
pub fn subspace_leakage(index: &BasisIndex, model: &CouplingModel, values: &PulseValues) -> (f64, f64) {
    let h = model.dense_h0(values);
    let mut worst = 0.0f64;
    for k in 0..SUBSPACE_DIM {
        let mut sub = [Complex64::new(0.0, 0.0); SUBSPACE_DIM];
        sub[k] = Complex64::new(1.0, 0.0);
        let s = index.embed(&sub).expect("fixed subspace length");
        let hs: StateVector = &h * s;
        let (_, leak) = index.project_to_subspace(&hs).expect("dimensions agree");
        worst = worst.max(leak.sqrt());
    }
    (worst, spectral_norm(&h))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct InvarianceReport {
    /// Largest `leakage / ||H0||` over the grid (0 when `H0 = 0`).
    pub max_relative_leakage: f64,
    pub max_leakage: f64,
    pub worst_time: f64,
}

/// Checks that `H0(t)` maps the subspace into itself at every grid time.
pub fn check_invariance(index: &BasisIndex, schedule: &PulseSchedule, times: &[f64]) -> InvarianceReport {
    let model = CouplingModel::full(index);
    let mut report = InvarianceReport {
        max_relative_leakage: 0.0,
        max_leakage: 0.0,
        worst_time: times.first().copied().unwrap_or(0.0),
    };
    for &t in times {
        let (leak, norm) = subspace_leakage(index, &model, &schedule.evaluate(t));
        let rel = if norm > 0.0 { leak / norm } else { leak };
        if rel > report.max_relative_leakage || leak > report.max_leakage {
            report.worst_time = t;
        }
        report.max_relative_leakage = report.max_relative_leakage.max(rel);
        report.max_leakage = report.max_leakage.max(leak);
    }
    report
}

/// Row-major `[re, im]` pairs.
pub fn dump_json(h: &HamiltonianMatrix, index_labels: &[BasisState]) -> serde_json::Value {
    let rows: Vec<Vec<[f64; 2]>> = (0..h.entries.nrows())
        .map(|i| {
            (0..h.entries.ncols())
                .map(|j| {
                    let z = h.entries[(i, j)];
                    [z.re, z.im]
                })
                .collect()
        })
        .collect();
    serde_json::json!({
        "time": h.time,
        "hermitian": h.hermitian,
        "dim": h.entries.nrows(),
        "basis": index_labels.iter().map(ToString::to_string).collect::<Vec<_>>(),
        "matrix": rows,
    })
}
