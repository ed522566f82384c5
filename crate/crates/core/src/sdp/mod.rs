//! Standard-form semidefinite programs
//!
//! ```text
//! minimize (or maximize) ⟨C, X⟩  s.t.  ⟨A_i, X⟩ = b_i,  X ⪰ 0
//! ```
//!
//! with the dual `max bᵀy s.t. C − Σ y_i A_i = S ⪰ 0` (signs flip for
//! maximization). Constraint matrices are kept as sparse symmetric triplets
//! because moment-matrix constraints touch two or three entries each.

mod gram;
mod solver;

use alloc::vec::Vec;

use thiserror::Error;

use crate::linalg::RealMatrix;

pub use gram::{dual_certificate_check, gram_problem, gram_weights, CertificateCheck};
pub use solver::{
    solve, solve_with, Accuracy, IterateRecord, SdpSolution, SdpStatus, SolverSettings,
};

/// Symmetry tolerance on problem data.
pub const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SdpError {
    #[error("matrix is {found}x{found}, expected {expected}x{expected}")]
    Dimension { expected: usize, found: usize },
    #[error("entry ({i}, {j}) lies outside a {n}x{n} matrix")]
    EntryOutOfRange { i: usize, j: usize, n: usize },
    #[error("objective matrix is not symmetric (error {0:e})")]
    NotSymmetric(f64),
    #[error("{count} constraints exceed n(n+1)/2 = {max}")]
    TooManyConstraints { count: usize, max: usize },
    #[error("problem data contains a non-finite value")]
    NonFinite,
    #[error("problem has dimension zero")]
    Empty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

/// Symmetric matrix stored as its upper-triangle nonzeros `(i, j, v)`,
/// `i ≤ j`; an off-diagonal triplet stands for both `(i, j)` and `(j, i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSym {
    n: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl SparseSym {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            entries: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    /// Adds `v` at `(i, j)` and its mirror; repeated positions accumulate.
    pub fn add(&mut self, i: usize, j: usize, v: f64) -> Result<(), SdpError> {
        if i >= self.n || j >= self.n {
            return Err(SdpError::EntryOutOfRange { i, j, n: self.n });
        }
        if !v.is_finite() {
            return Err(SdpError::NonFinite);
        }
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        match self.entries.iter_mut().find(|e| e.0 == i && e.1 == j) {
            Some(e) => e.2 += v,
            None => self.entries.push((i, j, v)),
        }
        Ok(())
    }

    pub fn with(mut self, i: usize, j: usize, v: f64) -> Result<Self, SdpError> {
        self.add(i, j, v)?;
        Ok(self)
    }

    /// Upper-triangle nonzeros of a dense symmetric matrix.
    pub fn from_dense(m: &RealMatrix) -> Result<Self, SdpError> {
        check_dense(m, m.rows())?;
        let n = m.rows();
        let mut entries = Vec::new();
        for i in 0..n {
            for j in i..n {
                let v = 0.5 * (m[(i, j)] + m[(j, i)]);
                if v != 0.0 {
                    entries.push((i, j, v));
                }
            }
        }
        Ok(Self { n, entries })
    }

    pub fn to_dense(&self) -> RealMatrix {
        let mut m = RealMatrix::zeros(self.n, self.n);
        self.add_scaled_to(&mut m, 1.0);
        m
    }

    /// `⟨A, X⟩ = tr(A X)` for symmetric `X`.
    pub fn inner(&self, x: &RealMatrix) -> f64 {
        self.entries
            .iter()
            .map(|&(i, j, v)| {
                if i == j {
                    v * x[(i, i)]
                } else {
                    v * (x[(i, j)] + x[(j, i)])
                }
            })
            .sum()
    }

    /// `m += alpha·A`.
    pub fn add_scaled_to(&self, m: &mut RealMatrix, alpha: f64) {
        for &(i, j, v) in &self.entries {
            m[(i, j)] += alpha * v;
            if i != j {
                m[(j, i)] += alpha * v;
            }
        }
    }

    fn is_finite(&self) -> bool {
        self.entries.iter().all(|e| e.2.is_finite())
    }
}

/// One equality `⟨A, X⟩ = b`.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub a: SparseSym,
    pub b: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdpProblem {
    n: usize,
    c: RealMatrix,
    constraints: Vec<Constraint>,
    sense: Sense,
}

impl SdpProblem {
    pub fn new(
        c: RealMatrix,
        constraints: Vec<Constraint>,
        sense: Sense,
    ) -> Result<Self, SdpError> {
        let n = c.rows();
        if n == 0 {
            return Err(SdpError::Empty);
        }
        check_dense(&c, n)?;
        let max = n * (n + 1) / 2;
        if constraints.len() > max {
            return Err(SdpError::TooManyConstraints {
                count: constraints.len(),
                max,
            });
        }
        for con in &constraints {
            if con.a.dim() != n {
                return Err(SdpError::Dimension {
                    expected: n,
                    found: con.a.dim(),
                });
            }
            if !con.b.is_finite() || !con.a.is_finite() {
                return Err(SdpError::NonFinite);
            }
        }
        Ok(Self {
            n,
            c,
            constraints,
            sense,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn objective(&self) -> &RealMatrix {
        &self.c
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn sense(&self) -> Sense {
        self.sense
    }

    /// `⟨C, X⟩`.
    pub fn objective_value(&self, x: &RealMatrix) -> f64 {
        self.c.inner(x)
    }

    /// `max_i |⟨A_i, X⟩ − b_i|`.
    pub fn primal_residual(&self, x: &RealMatrix) -> f64 {
        self.constraints
            .iter()
            .map(|k| (k.a.inner(x) - k.b).abs())
            .fold(0.0, f64::max)
    }
}

fn check_dense(m: &RealMatrix, n: usize) -> Result<(), SdpError> {
    if m.rows() != n || m.cols() != n {
        return Err(SdpError::Dimension {
            expected: n,
            found: if m.rows() != n { m.rows() } else { m.cols() },
        });
    }
    if !m.is_finite() {
        return Err(SdpError::NonFinite);
    }
    let err = m.symmetry_error();
    if err > SYMMETRY_TOL {
        return Err(SdpError::NotSymmetric(err));
    }
    Ok(())
}
