//! Four unit vectors with the most negative total pairwise overlap.
//!
//! With `M` the Gram matrix of `b₁…b₄` and `W` the all-ones matrix with a
//! zero diagonal, `Σ_{i<j} ⟨b_i, b_j⟩ = ½ tr(M W)`. Minimizing over unit
//! vectors is the SDP `min ½ tr(MW) s.t. M ⪰ 0, m_ii = 1`, whose dual is
//! `max Σ v_i s.t. ½W − diag(v) ⪰ 0`.

use alloc::vec::Vec;

use super::{Constraint, SdpProblem, Sense, SparseSym};
use crate::linalg::{symmetric_eigenvalues, RealMatrix};

/// Dual feasibility tolerance on the certificate's smallest eigenvalue.
pub const CERTIFICATE_TOL: f64 = 1e-9;

/// `W`: zero diagonal, ones elsewhere.
pub fn gram_weights() -> RealMatrix {
    RealMatrix::from_fn(4, 4, |i, j| if i == j { 0.0 } else { 1.0 })
}

pub fn gram_problem() -> SdpProblem {
    let constraints = (0..4)
        .map(|i| Constraint {
            a: SparseSym::new(4).with(i, i, 1.0).expect("in range"),
            b: 1.0,
        })
        .collect();
    SdpProblem::new(gram_weights().scale(0.5), constraints, Sense::Minimize)
        .expect("well-formed constant problem")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertificateCheck {
    /// `λ_min(½W − diag(v))`.
    pub min_eigenvalue: f64,
    pub feasible: bool,
}

/// Checks whether `v` is dual feasible; if so `Σ v_i` lower-bounds the
/// primal optimum.
pub fn dual_certificate_check(v: &[f64; 4]) -> CertificateCheck {
    let mut m = gram_weights().scale(0.5);
    for (i, vi) in v.iter().enumerate() {
        m[(i, i)] -= vi;
    }
    let eig: Vec<f64> = symmetric_eigenvalues(&m).expect("4x4 symmetric");
    let min_eigenvalue = eig[0];
    CertificateCheck {
        min_eigenvalue,
        feasible: min_eigenvalue >= -CERTIFICATE_TOL,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sdp::{solve, SdpStatus};

    #[test]
    fn primal_and_dual_reach_minus_two() {
        let sol = solve(&gram_problem());
        assert_eq!(sol.status, SdpStatus::Optimal);
        assert!((sol.primal_obj + 2.0).abs() < 1e-6, "{}", sol.primal_obj);
        assert!((sol.dual_obj + 2.0).abs() < 1e-6, "{}", sol.dual_obj);
        for v in &sol.y {
            assert!((v + 0.5).abs() < 1e-6, "{v}");
        }
    }

    #[test]
    fn optimal_gram_rows_sum_to_minus_one() {
        let sol = solve(&gram_problem());
        for i in 0..4 {
            assert!((sol.x[(i, i)] - 1.0).abs() < 1e-8);
            let off: f64 = (0..4).filter(|&j| j != i).map(|j| sol.x[(i, j)]).sum();
            assert!((off + 1.0).abs() < 1e-6, "row {i}: {off}");
        }
    }

    #[test]
    fn certificates() {
        let c = dual_certificate_check(&[-0.5; 4]);
        assert!(c.min_eigenvalue.abs() < 1e-12 && c.feasible);
        let c = dual_certificate_check(&[0.0; 4]);
        assert!((c.min_eigenvalue + 0.5).abs() < 1e-12 && !c.feasible);
        let c = dual_certificate_check(&[-1.0; 4]);
        assert!((c.min_eigenvalue - 0.5).abs() < 1e-12 && c.feasible);
    }
}
