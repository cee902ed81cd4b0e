//! Atomic levels, photon-number truncation and the ordered product basis
//! `|A, B, n_R, n_L>` together with the eight-state invariant subspace.

use std::fmt;

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type StateVector = DVector<Complex64>;

/// Dimension of the invariant subspace.
pub const SUBSPACE_DIM: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AtomLevel {
    #[serde(rename = "g_a")]
    Ga,
    #[serde(rename = "g_L")]
    GL,
    #[serde(rename = "g_0")]
    G0,
    #[serde(rename = "g_R")]
    GR,
    #[serde(rename = "e_L")]
    EL,
    #[serde(rename = "e_0")]
    E0,
    #[serde(rename = "e_R")]
    ER,
}

impl AtomLevel {
    pub const ALL: [AtomLevel; 7] = [
        AtomLevel::Ga,
        AtomLevel::GL,
        AtomLevel::G0,
        AtomLevel::GR,
        AtomLevel::EL,
        AtomLevel::E0,
        AtomLevel::ER,
    ];

    pub fn is_excited(self) -> bool {
        matches!(self, AtomLevel::EL | AtomLevel::E0 | AtomLevel::ER)
    }

    pub fn ordinal(self) -> usize {
        self as usize
    }

    /// Image under the left/right relabeling `g_L <-> g_R`, `e_L <-> e_R`.
    pub fn mirrored(self) -> AtomLevel {
        match self {
            AtomLevel::GL => AtomLevel::GR,
            AtomLevel::GR => AtomLevel::GL,
            AtomLevel::EL => AtomLevel::ER,
            AtomLevel::ER => AtomLevel::EL,
            other => other,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            AtomLevel::Ga => "g_a",
            AtomLevel::GL => "g_L",
            AtomLevel::G0 => "g_0",
            AtomLevel::GR => "g_R",
            AtomLevel::EL => "e_L",
            AtomLevel::E0 => "e_0",
            AtomLevel::ER => "e_R",
        }
    }
}

impl fmt::Display for AtomLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BasisState {
    pub atom_a: AtomLevel,
    pub atom_b: AtomLevel,
    pub n_r: usize,
    pub n_l: usize,
}

impl BasisState {
    pub const fn new(atom_a: AtomLevel, atom_b: AtomLevel, n_r: usize, n_l: usize) -> Self {
        BasisState {
            atom_a,
            atom_b,
            n_r,
            n_l,
        }
    }

    pub fn photons(&self) -> usize {
        self.n_r + self.n_l
    }

    pub fn excited_atoms(&self) -> usize {
        usize::from(self.atom_a.is_excited()) + usize::from(self.atom_b.is_excited())
    }

    pub fn mirrored(&self) -> BasisState {
        BasisState::new(self.atom_a.mirrored(), self.atom_b.mirrored(), self.n_l, self.n_r)
    }
}

impl fmt::Display for BasisState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|{},{},{},{}>", self.atom_a, self.atom_b, self.n_r, self.n_l)
    }
}

/// The invariant subspace in its canonical order. Positions 1, 5 and 8 (one-based)
/// are the populations `P1`, `P5`, `P8` reported everywhere else.
pub const SUBSPACE_STATES: [BasisState; SUBSPACE_DIM] = [
    BasisState::new(AtomLevel::Ga, AtomLevel::G0, 0, 0),
    BasisState::new(AtomLevel::E0, AtomLevel::G0, 0, 0),
    BasisState::new(AtomLevel::GL, AtomLevel::G0, 0, 1),
    BasisState::new(AtomLevel::GL, AtomLevel::ER, 0, 0),
    BasisState::new(AtomLevel::GL, AtomLevel::GR, 0, 0),
    BasisState::new(AtomLevel::GR, AtomLevel::G0, 1, 0),
    BasisState::new(AtomLevel::GR, AtomLevel::EL, 0, 0),
    BasisState::new(AtomLevel::GR, AtomLevel::GL, 0, 0),
];

/// Ordered product basis, lexicographic on `(atom_a, atom_b, n_r, n_l)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BasisIndex {
    n_max: usize,
    states: Vec<BasisState>,
    subspace_map: [usize; SUBSPACE_DIM],
}

impl BasisIndex {
    pub fn new(n_max: usize) -> Result<Self> {
        if n_max < 1 {
            return Err(Error::config("params.n_max", "photon truncation must be >= 1"));
        }
        let photons = n_max + 1;
        let mut states = Vec::with_capacity(49 * photons * photons);
        for a in AtomLevel::ALL {
            for b in AtomLevel::ALL {
                for n_r in 0..photons {
                    for n_l in 0..photons {
                        states.push(BasisState::new(a, b, n_r, n_l));
                    }
                }
            }
        }
        let mut subspace_map = [0; SUBSPACE_DIM];
        let mut index = BasisIndex {
            n_max,
            states,
            subspace_map,
        };
        for (slot, s) in subspace_map.iter_mut().zip(SUBSPACE_STATES.iter()) {
            *slot = index.encode(s).expect("subspace states lie within any truncation >= 1");
        }
        index.subspace_map = subspace_map;
        Ok(index)
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[BasisState] {
        &self.states
    }

    pub fn subspace_map(&self) -> &[usize; SUBSPACE_DIM] {
        &self.subspace_map
    }

    pub fn encode(&self, state: &BasisState) -> Option<usize> {
        if state.n_r > self.n_max || state.n_l > self.n_max {
            return None;
        }
        let photons = self.n_max + 1;
        let atoms = state.atom_a.ordinal() * 7 + state.atom_b.ordinal();
        Some((atoms * photons + state.n_r) * photons + state.n_l)
    }

    pub fn decode(&self, index: usize) -> Option<BasisState> {
        self.states.get(index).copied()
    }

    pub fn basis_vector(&self, state: &BasisState) -> Option<StateVector> {
        let i = self.encode(state)?;
        let mut v = StateVector::zeros(self.dim());
        v[i] = Complex64::new(1.0, 0.0);
        Some(v)
    }

    /// Full-space vector carrying the given subspace amplitudes.
    pub fn embed(&self, sub: &[Complex64]) -> Result<StateVector> {
        if sub.len() != SUBSPACE_DIM {
            return Err(Error::DimensionMismatch {
                expected: SUBSPACE_DIM,
                got: sub.len(),
            });
        }
        let mut v = StateVector::zeros(self.dim());
        for (&i, &amp) in self.subspace_map.iter().zip(sub) {
            v[i] = amp;
        }
        Ok(v)
    }

    /// Splits `v` into its subspace amplitudes (canonical order) and the squared
    /// norm of everything outside the subspace.
    pub fn project_to_subspace(&self, v: &StateVector) -> Result<(StateVector, f64)> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: v.len(),
            });
        }
        let sub = StateVector::from_iterator(SUBSPACE_DIM, self.subspace_map.iter().map(|&i| v[i]));
        let mut inside = vec![false; self.dim()];
        for &i in &self.subspace_map {
            inside[i] = true;
        }
        let leakage = v
            .iter()
            .zip(&inside)
            .filter(|(_, &inside)| !inside)
            .map(|(z, _)| z.norm_sqr())
            .sum();
        Ok((sub, leakage))
    }

    /// Index permutation implementing the left/right relabeling.
    pub fn mirror_permutation(&self) -> Vec<usize> {
        self.states
            .iter()
            .map(|s| self.encode(&s.mirrored()).expect("mirroring preserves truncation"))
            .collect()
    }
}

/// Mirror permutation restricted to the subspace, in subspace coordinates.
pub fn subspace_mirror_permutation() -> [usize; SUBSPACE_DIM] {
    let mut perm = [0; SUBSPACE_DIM];
    for (k, s) in SUBSPACE_STATES.iter().enumerate() {
        let image = s.mirrored();
        perm[k] = SUBSPACE_STATES
            .iter()
            .position(|t| *t == image)
            .expect("subspace is closed under mirroring");
    }
    perm
}

#[derive(Serialize)]
struct BasisDump<'a> {
    n_max: usize,
    dim: usize,
    states: Vec<String>,
    subspace_map: &'a [usize; SUBSPACE_DIM],
    subspace_states: Vec<String>,
}

/// JSON dump of the basis order and subspace map.
pub fn dump_json(index: &BasisIndex) -> serde_json::Value {
    let dump = BasisDump {
        n_max: index.n_max,
        dim: index.dim(),
        states: index.states.iter().map(ToString::to_string).collect(),
        subspace_map: &index.subspace_map,
        subspace_states: SUBSPACE_STATES.iter().map(ToString::to_string).collect(),
    };
    serde_json::to_value(dump).expect("basis dump is always serializable")
}
