//! Two-qubit density matrices and their Bloch/correlation decomposition.
//!
//! Basis order is |00⟩, |01⟩, |10⟩, |11⟩ and Pauli index 0, 1, 2 is X, Y, Z.
//! In this convention the YY correlator of cos θ|00⟩ + sin θ|11⟩ is
//! −sin 2θ; the sign is reported as computed.

use alloc::vec::Vec;
use core::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};

use num_complex::Complex64;
use thiserror::Error;

use crate::linalg::{
    hermitian_eigenvalues, kron, pauli, svd3, tol, ComplexMatrix, LinalgError, RealMatrix3, Vec3,
};

/// Lowest admissible eigenvalue of a density matrix (roundoff allowance).
pub const PSD_TOL: f64 = -1e-10;
pub const TRACE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StateError {
    #[error("parameter {name} = {value} outside [{min}, {max}]")]
    OutOfRange {
        name: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },
    #[error("density matrix must be 4x4, got {rows}x{cols}")]
    Shape { rows: usize, cols: usize },
    #[error("density matrix is not Hermitian (error {0:e})")]
    NotHermitian(f64),
    #[error("density matrix trace is {0}, expected 1")]
    Trace(f64),
    #[error("density matrix has negative eigenvalue {0:e}")]
    NotPositive(f64),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// A validated two-qubit density operator.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoQubitState {
    rho: ComplexMatrix,
}

impl TwoQubitState {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(rho: ComplexMatrix) -> Result<Self, StateError> {
        if rho.rows() != 4 || rho.cols() != 4 {
            return Err(StateError::Shape {
                rows: rho.rows(),
                cols: rho.cols(),
            });
        }
        let herm = rho.hermiticity_error();
        if herm > tol::EPS_HERM {
            return Err(StateError::NotHermitian(herm));
        }
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(StateError::Trace(tr.re));
        }
        let min_eig = hermitian_eigenvalues(&rho)?[0];
        if min_eig < PSD_TOL {
            return Err(StateError::NotPositive(min_eig));
        }
        Ok(Self { rho })
    }

    /// Skips validation. Test fixtures only.
    #[doc(hidden)]
    pub fn new_unchecked(rho: ComplexMatrix) -> Self {
        Self { rho }
    }

    /// Projector onto a (not necessarily normalized) pure state.
    pub fn from_pure(psi: &[Complex64; 4]) -> Result<Self, StateError> {
        let norm = libm::sqrt(psi.iter().map(|z| z.norm_sqr()).sum::<f64>());
        let unit: Vec<Complex64> = psi.iter().map(|z| z / norm).collect();
        Self::new(ComplexMatrix::outer(&unit))
    }

    /// `q·ρ + (1 − q)·I/4`.
    pub fn with_white_noise(&self, q: f64) -> Result<Self, StateError> {
        check_range("q", q, 0.0, 1.0)?;
        let noise = ComplexMatrix::identity(4).scale_real((1.0 - q) / 4.0);
        Self::new(self.rho.scale_real(q).add(&noise)?)
    }

    pub fn rho(&self) -> &ComplexMatrix {
        &self.rho
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.rho
    }

    pub fn purity(&self) -> f64 {
        self.rho.trace_product(&self.rho).re
    }

    /// `tr(ρ·op)`.
    pub fn expect(&self, op: &ComplexMatrix) -> Complex64 {
        self.rho.trace_product(op)
    }
}

fn check_range(name: &'static str, value: f64, min: f64, max: f64) -> Result<(), StateError> {
    if !(min..=max).contains(&value) {
        return Err(StateError::OutOfRange {
            name,
            value,
            min,
            max,
        });
    }
    Ok(())
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// `cos θ|00⟩ + sin θ|11⟩` for θ in [0, π/4].
pub fn pure_state(theta: f64) -> Result<TwoQubitState, StateError> {
    // Allow the rounded value of π/4 printed with a few digits to pass.
    check_range("theta", theta, 0.0, FRAC_PI_4 + 1e-12)?;
    let psi = [c(libm::cos(theta)), c(0.0), c(0.0), c(libm::sin(theta))];
    TwoQubitState::new(ComplexMatrix::outer(&psi))
}

/// `(|00⟩ + |11⟩)/√2`.
pub fn phi_plus() -> TwoQubitState {
    let psi = [c(FRAC_1_SQRT_2), c(0.0), c(0.0), c(FRAC_1_SQRT_2)];
    TwoQubitState::new_unchecked(ComplexMatrix::outer(&psi))
}

/// `p|φ⁺⟩⟨φ⁺| + (1 − p)I/4` for p in [0, 1].
pub fn werner_state(p: f64) -> Result<TwoQubitState, StateError> {
    check_range("p", p, 0.0, 1.0)?;
    phi_plus().with_white_noise(p)
}

/// `(|01⟩ − |10⟩)/√2`.
pub fn singlet() -> TwoQubitState {
    let psi = [c(0.0), c(FRAC_1_SQRT_2), c(-FRAC_1_SQRT_2), c(0.0)];
    TwoQubitState::new_unchecked(ComplexMatrix::outer(&psi))
}

/// `I/4`.
pub fn maximally_mixed() -> TwoQubitState {
    TwoQubitState::new_unchecked(ComplexMatrix::identity(4).scale_real(0.25))
}

/// Local Bloch vectors and the correlation matrix `t_ij = tr(σ_i⊗σ_j ρ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationData {
    pub r: Vec3,
    pub s: Vec3,
    pub t: RealMatrix3,
}

impl CorrelationData {
    pub fn singular_values(&self) -> Vec3 {
        svd3(&self.t).singular_values
    }

    /// Rebuilds `ρ = ¼[I⊗I + Σ r_i σ_i⊗I + Σ s_j I⊗σ_j + Σ t_ij σ_i⊗σ_j]`.
    pub fn to_density_matrix(&self) -> ComplexMatrix {
        let id = ComplexMatrix::identity(2);
        let mut rho = ComplexMatrix::identity(4);
        let mut acc = |m: ComplexMatrix, w: f64| {
            if w != 0.0 {
                rho = rho.add(&m.scale_real(w)).expect("4x4 shapes");
            }
        };
        for i in 0..3 {
            acc(kron(&pauli(i), &id), self.r[i]);
            acc(kron(&id, &pauli(i)), self.s[i]);
            for j in 0..3 {
                acc(kron(&pauli(i), &pauli(j)), self.t.0[i][j]);
            }
        }
        rho.scale_real(0.25)
    }
}

pub fn correlation_data(state: &TwoQubitState) -> CorrelationData {
    let id = ComplexMatrix::identity(2);
    let mut r = [0.0; 3];
    let mut s = [0.0; 3];
    let mut t = [[0.0; 3]; 3];
    for i in 0..3 {
        r[i] = state.expect(&kron(&pauli(i), &id)).re;
        s[i] = state.expect(&kron(&id, &pauli(i))).re;
        for j in 0..3 {
            t[i][j] = state.expect(&kron(&pauli(i), &pauli(j))).re;
        }
    }
    CorrelationData {
        r,
        s,
        t: RealMatrix3(t),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::{FRAC_PI_8, PI};

    /// Trace oracle written out entry by entry, independent of `kron`.
    fn yy_by_hand(rho: &ComplexMatrix) -> f64 {
        // Y⊗Y has −1 at (0,3),(3,0) and +1 at (1,2),(2,1).
        (-rho[(3, 0)] - rho[(0, 3)] + rho[(2, 1)] + rho[(1, 2)]).re
    }

    fn assert_valid(s: &TwoQubitState) {
        assert!(s.rho().hermiticity_error() <= tol::EPS_HERM);
        assert!((s.rho().trace().re - 1.0).abs() <= TRACE_TOL);
        assert!(hermitian_eigenvalues(s.rho()).unwrap()[0] >= PSD_TOL);
    }

    #[test]
    fn pure_state_at_pi_over_4_is_phi_plus() {
        let s = pure_state(FRAC_PI_4).unwrap();
        assert!(s.rho().sub(phi_plus().rho()).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn pure_state_at_zero_is_product() {
        let s = pure_state(0.0).unwrap();
        assert_eq!(s.rho()[(0, 0)], c(1.0));
        assert!((s.purity() - 1.0).abs() < 1e-12);
        assert_eq!(s.rho().max_abs(), 1.0);
    }

    #[test]
    fn pure_state_pi_over_8_correlations() {
        let s = pure_state(FRAC_PI_8).unwrap();
        let cd = correlation_data(&s);
        let h = FRAC_1_SQRT_2;
        let want = RealMatrix3::diag([h, -h, 1.0]);
        assert!(cd.t.max_abs_diff(&want) < 1e-12);
        assert!((cd.t.0[1][1] - yy_by_hand(s.rho())).abs() < 1e-15);
        assert!((s.purity() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pure_state_rejects_out_of_range() {
        assert!(matches!(
            pure_state(-0.1),
            Err(StateError::OutOfRange { .. })
        ));
        assert!(matches!(
            pure_state(PI / 2.0),
            Err(StateError::OutOfRange { .. })
        ));
    }

    #[test]
    fn werner_limits() {
        let w1 = werner_state(1.0).unwrap();
        assert!(
            w1.rho()
                .sub(pure_state(FRAC_PI_4).unwrap().rho())
                .unwrap()
                .max_abs()
                < 1e-15
        );
        let w0 = correlation_data(&werner_state(0.0).unwrap());
        assert_eq!(w0.t, RealMatrix3::ZERO);
        assert_eq!((w0.r, w0.s), ([0.0; 3], [0.0; 3]));
        assert!(werner_state(1.2).is_err());
    }

    #[test]
    fn werner_spectrum() {
        let p = 0.3;
        let ev = hermitian_eigenvalues(werner_state(p).unwrap().rho()).unwrap();
        let low = (1.0 - p) / 4.0;
        for e in &ev[..3] {
            assert!((e - low).abs() < 1e-14);
        }
        assert!((ev[3] - (1.0 + 3.0 * p) / 4.0).abs() < 1e-14);
    }

    #[test]
    fn werner_singular_values_equal_p() {
        for k in 0..=10 {
            let p = k as f64 / 10.0;
            let sv = correlation_data(&werner_state(p).unwrap()).singular_values();
            for x in sv {
                assert!((x - p).abs() < 1e-12);
            }
        }
        let cd = correlation_data(&werner_state(0.7).unwrap());
        assert!(cd.t.max_abs_diff(&RealMatrix3::diag([0.7, -0.7, 0.7])) < 1e-12);
    }

    #[test]
    fn singlet_data() {
        let s = singlet();
        assert_valid(&s);
        let cd = correlation_data(&s);
        assert!(cd.t.max_abs_diff(&RealMatrix3::IDENTITY.scale(-1.0)) < 1e-12);
        assert_eq!(cd.r, [0.0; 3]);
        assert_eq!(cd.s, [0.0; 3]);
        assert!((s.purity() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn validation_catches_bad_matrices() {
        let mut m = ComplexMatrix::identity(4).scale_real(0.25);
        m[(0, 1)] = Complex64::new(0.1, 0.0);
        assert!(matches!(
            TwoQubitState::new(m),
            Err(StateError::NotHermitian(_))
        ));
        let m = ComplexMatrix::identity(4).scale_real(0.3);
        assert!(matches!(TwoQubitState::new(m), Err(StateError::Trace(_))));
        let mut m = ComplexMatrix::zeros(4, 4);
        m[(0, 0)] = c(1.5);
        m[(1, 1)] = c(-0.5);
        assert!(matches!(
            TwoQubitState::new(m),
            Err(StateError::NotPositive(_))
        ));
        assert!(matches!(
            TwoQubitState::new(ComplexMatrix::identity(2)),
            Err(StateError::Shape { .. })
        ));
    }

    #[test]
    fn maximally_mixed_has_no_correlations() {
        let cd = correlation_data(&maximally_mixed());
        assert_eq!(cd.t, RealMatrix3::ZERO);
        assert_eq!(cd.r, [0.0; 3]);
    }

    #[test]
    fn round_trip_grid() {
        // 200 (θ, p) pairs, mixing the pure family with white noise.
        for i in 0..20 {
            let theta = FRAC_PI_4 * i as f64 / 19.0;
            for j in 0..10 {
                let p = j as f64 / 9.0;
                let s = pure_state(theta).unwrap().with_white_noise(p).unwrap();
                assert_valid(&s);
                let cd = correlation_data(&s);
                assert!(cd.to_density_matrix().sub(s.rho()).unwrap().max_abs() <= 1e-12);
                for x in cd.r.iter().chain(&cd.s).chain(cd.t.0.iter().flatten()) {
                    assert!(x.abs() <= 1.0 + 1e-10);
                }
            }
        }
    }
}
