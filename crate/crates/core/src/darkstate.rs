//! Analytic dark state of the interaction Hamiltonian on the invariant subspace,
//! its strong-coupling approximation, and an SVD null-space oracle.

use num_complex::Complex64;
use serde::Serialize;

use crate::basis::{BasisIndex, StateVector, SUBSPACE_DIM};
use crate::hamiltonian::{spectral_norm, CMatrix, CouplingModel};
use crate::pulses::{PulseSchedule, PulseValues};

/// Relative singular-value threshold for the numerical kernel.
pub const KERNEL_THRESHOLD: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DarkState {
    /// Subspace amplitudes in canonical order (unit norm when defined).
    #[serde(skip)]
    pub amplitudes: [Complex64; SUBSPACE_DIM],
    /// `C` with `C^-2 = 4 g_A^2 Omega_B^2 + 2 Omega_A^2 Omega_B^2 + 2 g_B^2 Omega_A^2`.
    pub normalization: f64,
    pub defined: bool,
}

impl DarkState {
    fn from_raw(raw: [f64; SUBSPACE_DIM]) -> Self {
        let norm_sq: f64 = raw.iter().map(|x| x * x).sum();
        if norm_sq == 0.0 || !norm_sq.is_finite() {
            return DarkState {
                amplitudes: [Complex64::new(0.0, 0.0); SUBSPACE_DIM],
                normalization: 0.0,
                defined: false,
            };
        }
        let c = norm_sq.sqrt().recip();
        DarkState {
            amplitudes: raw.map(|x| Complex64::new(x * c, 0.0)),
            normalization: c,
            defined: true,
        }
    }

    pub fn to_vector(&self) -> StateVector {
        StateVector::from_column_slice(&self.amplitudes)
    }

    pub fn to_full(&self, index: &BasisIndex) -> StateVector {
        index.embed(&self.amplitudes).expect("fixed subspace length")
    }

    /// `<self|other>` over the subspace.
    pub fn overlap(&self, other: &DarkState) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }
}

/// `(2 g_A Omega_B, 0, -Omega_A Omega_B, 0, g_B Omega_A, -Omega_A Omega_B, 0, g_B Omega_A)`.
pub fn dark_state_from_values(v: &PulseValues) -> DarkState {
    let photonic = -v.omega_a * v.omega_b;
    let entangled = v.g_b * v.omega_a;
    DarkState::from_raw([
        2.0 * v.g_a * v.omega_b,
        0.0,
        photonic,
        0.0,
        entangled,
        photonic,
        0.0,
        entangled,
    ])
}

/// Strong-coupling form without the photonic components.
pub fn dark_state_approx_from_values(v: &PulseValues) -> DarkState {
    let entangled = v.g_b * v.omega_a;
    DarkState::from_raw([
        2.0 * v.g_a * v.omega_b,
        0.0,
        0.0,
        0.0,
        entangled,
        0.0,
        0.0,
        entangled,
    ])
}

pub fn dark_state(t: f64, schedule: &PulseSchedule) -> DarkState {
    dark_state_from_values(&schedule.evaluate(t))
}

pub fn dark_state_approx(t: f64, schedule: &PulseSchedule) -> DarkState {
    dark_state_approx_from_values(&schedule.evaluate(t))
}

#[derive(Debug, Clone)]
pub struct NullSpace {
    /// Orthonormal kernel basis, subspace coordinates.
    pub basis: Vec<StateVector>,
    pub singular_values: Vec<f64>,
}

impl NullSpace {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Norm of the component of `v` orthogonal to the kernel.
    pub fn distance(&self, v: &StateVector) -> f64 {
        let mut residual = v.clone();
        for b in &self.basis {
            let c = b.dotc(v);
            residual -= b * c;
        }
        residual.norm()
    }
}

/// Kernel of an arbitrary square matrix by singular-value thresholding at
/// `sigma <= KERNEL_THRESHOLD * sigma_max`.
pub fn null_space(h: &CMatrix) -> NullSpace {
    let n = h.ncols();
    let svd = h.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested V^dagger");
    let sigma_max = svd.singular_values.iter().fold(0.0f64, |a, &b| a.max(b));
    let singular_values: Vec<f64> = svd.singular_values.iter().copied().collect();
    let basis = if sigma_max == 0.0 {
        (0..n)
            .map(|k| StateVector::from_fn(n, |i, _| Complex64::new(f64::from(u8::from(i == k)), 0.0)))
            .collect()
    } else {
        singular_values
            .iter()
            .enumerate()
            .filter(|(_, &s)| s <= KERNEL_THRESHOLD * sigma_max)
            .map(|(k, _)| v_t.row(k).adjoint())
            .collect()
    };
    NullSpace {
        basis,
        singular_values,
    }
}

pub fn null_space_s_from_values(model: &CouplingModel, v: &PulseValues) -> NullSpace {
    null_space(&model.dense_h0(v))
}

/// Kernel of `H0(t)` restricted to the invariant subspace.
pub fn null_space_s(t: f64, schedule: &PulseSchedule, index: &BasisIndex) -> NullSpace {
    let model = CouplingModel::subspace(index);
    null_space_s_from_values(&model, &schedule.evaluate(t))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct NullityCheck {
    pub defined: bool,
    /// `||H0 D||`.
    pub residual: f64,
    /// `||H0||` (spectral).
    pub h0_norm: f64,
    pub kernel_dim: usize,
    /// Distance of `D` from the numerical kernel.
    pub kernel_distance: f64,
}

impl NullityCheck {
    /// `||H0 D|| / (||H0|| ||D||)`, zero when `H0 = 0` or `D` is undefined.
    pub fn relative_residual(&self) -> f64 {
        if self.defined && self.h0_norm > 0.0 {
            self.residual / self.h0_norm
        } else {
            0.0
        }
    }
}

/// Applies `H0` on the subspace to the analytic dark state and measures the kernel.
pub fn check_nullity(model: &CouplingModel, v: &PulseValues) -> NullityCheck {
    debug_assert_eq!(model.dim(), SUBSPACE_DIM);
    let h = model.dense_h0(v);
    let dark = dark_state_from_values(v);
    let d = dark.to_vector();
    let kernel = null_space(&h);
    NullityCheck {
        defined: dark.defined,
        residual: (&h * &d).norm(),
        h0_norm: spectral_norm(&h),
        kernel_dim: kernel.dim(),
        kernel_distance: if dark.defined { kernel.distance(&d) } else { 0.0 },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::SystemParams;
    use crate::pulses::preset_stirap;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn values(omega_a: f64, omega_b: f64, g_a: f64, g_b: f64) -> PulseValues {
        PulseValues {
            omega_a,
            omega_b,
            g_a,
            g_b,
        }
    }

    fn subspace_model() -> CouplingModel {
        CouplingModel::subspace(&BasisIndex::new(1).unwrap())
    }

    #[test]
    fn pump_off_gives_initial_state() {
        let d = dark_state_from_values(&values(0.0, 0.7, 5.0, 5.0));
        assert!(d.defined);
        assert_eq!(d.amplitudes[0], Complex64::new(1.0, 0.0));
        assert!(d.amplitudes[1..].iter().all(|z| z.norm() == 0.0));
        assert_eq!(dark_state_approx_from_values(&values(0.0, 0.7, 5.0, 5.0)), d);
    }

    #[test]
    fn normalization_constant() {
        let (g, w) = (5.0f64, 0.8f64);
        let d = dark_state_from_values(&values(w, w, g, g));
        let expected = 4.0 * g * g * w * w + 2.0 * w.powi(4) + 2.0 * g * g * w * w;
        assert!((d.normalization.powi(-2) / expected - 1.0).abs() < 1e-14);
    }

    #[test]
    fn structure_of_the_amplitudes() {
        let d = dark_state_from_values(&values(0.3, 0.9, 4.0, 6.0));
        for k in [1, 3, 6] {
            assert_eq!(d.amplitudes[k].norm(), 0.0);
        }
        assert_eq!(d.amplitudes[2], d.amplitudes[5]);
        assert_eq!(d.amplitudes[4], d.amplitudes[7]);
        assert!(d.amplitudes[2].re < 0.0);
        assert!((d.to_vector().norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn vanishing_pulses_are_undefined() {
        assert!(!dark_state_from_values(&values(0.0, 0.0, 5.0, 5.0)).defined);
        assert!(!dark_state_from_values(&PulseValues::default()).defined);
    }

    #[test]
    fn approximation_overlap_at_strong_coupling() {
        // g = 5 Omega: |<D|D_approx>|^2 = 150/152.
        let v = values(1.0, 1.0, 5.0, 5.0);
        let o = dark_state_from_values(&v)
            .overlap(&dark_state_approx_from_values(&v))
            .norm_sqr();
        assert!((o - 150.0 / 152.0).abs() < 1e-14);
        assert!(o >= 1.0 - 1.0 / 50.0);
        let mut last = o;
        for g in [10.0, 100.0, 1000.0] {
            let v = values(1.0, 1.0, g, g);
            let o = dark_state_from_values(&v)
                .overlap(&dark_state_approx_from_values(&v))
                .norm_sqr();
            assert!(o > last);
            last = o;
        }
        assert!(1.0 - last < 1e-6);
    }

    #[test]
    fn kernel_examples() {
        let model = subspace_model();
        let generic = values(0.37, 0.81, 4.3, 5.9);
        let check = check_nullity(&model, &generic);
        assert!(check.relative_residual() <= 1e-12);
        assert!(check.kernel_distance < 1e-10);
        // The antisymmetric (L <-> R odd) sector carries a second zero mode.
        assert_eq!(check.kernel_dim, 2);

        let zero = null_space_s_from_values(&model, &PulseValues::default());
        assert_eq!(zero.dim(), 8);

        let pump_off = null_space_s_from_values(&model, &values(0.0, 0.6, 5.0, 5.0));
        let mut ga = StateVector::zeros(8);
        ga[0] = Complex64::new(1.0, 0.0);
        assert!(pump_off.dim() >= 1);
        assert!(pump_off.distance(&ga) < 1e-10);
    }

    #[test]
    fn randomized_nullity() {
        let model = subspace_model();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let v = values(
                rng.random_range(0.0..10.0),
                rng.random_range(0.0..10.0),
                rng.random_range(0.0..10.0),
                rng.random_range(0.0..10.0),
            );
            let c = check_nullity(&model, &v);
            assert!(c.relative_residual() <= 1e-12, "{v:?} {c:?}");
        }
    }

    #[test]
    fn continuity_along_stirap() {
        let p = SystemParams::default();
        let s = preset_stirap(&p);
        let (a, b) = p.window();
        let n = 4000;
        let delta = (b - a) / n as f64;
        for k in 0..n {
            let t = a + k as f64 * delta;
            let o = dark_state(t, &s).overlap(&dark_state(t + delta, &s));
            assert!(o.re > 0.99, "t = {t}: {o}");
        }
    }

    proptest! {
        #[test]
        fn scale_invariance(
            a in 0.01f64..10.0, b in 0.01f64..10.0, c in 0.01f64..10.0, d in 0.01f64..10.0,
            factor in 0.01f64..100.0,
        ) {
            let v = values(a, b, c, d);
            let x = dark_state_from_values(&v);
            let y = dark_state_from_values(&v.scaled(factor));
            for (p, q) in x.amplitudes.iter().zip(&y.amplitudes) {
                prop_assert!((p - q).norm() < 1e-12);
            }
            prop_assert!((x.normalization / y.normalization - factor * factor).abs() < 1e-9 * factor * factor);
        }
    }
}
