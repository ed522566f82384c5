//! Bipartite dichotomic Bell expressions evaluated on two-qubit states.
//!
//! Observables are `A_k = a_k·σ` and `B_l = b_l·σ` for real unit vectors, so
//! every correlator reduces to `⟨A_k B_l⟩ = a_kᵀ T b_l` with `T` the
//! correlation matrix of the state.

mod behavior;
mod bound;
mod seesaw;
mod threshold;

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::linalg::{bloch_operator, dot3, kron, norm3, ComplexMatrix, Vec3};
use crate::states::{correlation_data, StateError, TwoQubitState};

pub use behavior::{behavior_from, Behavior};
pub use bound::{optimal_measurements, tight_bound, tightness_check, TightnessReport};
pub use seesaw::{seesaw_max_violation, SeesawResult, SEESAW_MAX_ROUNDS, SEESAW_TOL};
pub use threshold::{
    max_violation, max_violation_seeded, violation_threshold, StateFamily, DEFAULT_SEESAW_RESTARTS,
    DEFAULT_SEESAW_SEED,
};

/// Unit-norm tolerance for measurement directions.
pub const UNIT_TOL: f64 = 1e-12;
/// Enumeration guard for [`classical_bound`].
pub const MAX_ENUMERATED_SETTINGS: usize = 24;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BellError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("{name} = {value} is out of range")]
    OutOfRange { name: &'static str, value: f64 },
    #[error("correlation matrix has no nonzero singular value")]
    DegenerateState,
    #[error("{0} settings exceed the enumeration limit")]
    TooManySettings(usize),
    #[error("the maximal violation never exceeds the classical bound")]
    NoCrossing,
    #[error("measurement direction {index} of {party} has norm {norm}")]
    NotUnitVector {
        party: &'static str,
        index: usize,
        norm: f64,
    },
    #[error(transparent)]
    State(#[from] StateError),
}

/// Which built-in family an expression belongs to, if any.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExpressionKind {
    Elegant,
    Chsh,
    Chained(usize),
    Custom,
}

/// `Σ c_kl ⟨A_k B_l⟩ + Σ α_k ⟨A_k⟩ + Σ β_l ⟨B_l⟩` with ±1-valued observables.
#[derive(Debug, Clone, PartialEq)]
pub struct BellExpression {
    name: String,
    kind: ExpressionKind,
    alice_settings: usize,
    bob_settings: usize,
    correlators: Vec<f64>,
    alice_marginals: Vec<f64>,
    bob_marginals: Vec<f64>,
    classical_bound: Option<f64>,
}

impl BellExpression {
    /// Correlator-only expression from a row-major `k × l` table.
    pub fn new(
        name: impl Into<String>,
        alice_settings: usize,
        bob_settings: usize,
        correlators: Vec<f64>,
    ) -> Result<Self, BellError> {
        Self::with_marginals(
            name,
            alice_settings,
            bob_settings,
            correlators,
            vec![0.0; alice_settings],
            vec![0.0; bob_settings],
        )
    }

    pub fn with_marginals(
        name: impl Into<String>,
        alice_settings: usize,
        bob_settings: usize,
        correlators: Vec<f64>,
        alice_marginals: Vec<f64>,
        bob_marginals: Vec<f64>,
    ) -> Result<Self, BellError> {
        if alice_settings == 0 || bob_settings == 0 {
            return Err(BellError::DimensionMismatch(
                "each party needs at least one setting".to_string(),
            ));
        }
        if correlators.len() != alice_settings * bob_settings
            || alice_marginals.len() != alice_settings
            || bob_marginals.len() != bob_settings
        {
            return Err(BellError::DimensionMismatch(alloc::format!(
                "coefficient tables do not match {alice_settings}x{bob_settings} settings"
            )));
        }
        Ok(Self {
            name: name.into(),
            kind: ExpressionKind::Custom,
            alice_settings,
            bob_settings,
            correlators,
            alice_marginals,
            bob_marginals,
            classical_bound: None,
        })
    }

    fn builtin(mut self, kind: ExpressionKind) -> Self {
        self.kind = kind;
        self.classical_bound = classical_bound(&self).ok();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> ExpressionKind {
        self.kind
    }

    pub fn alice_settings(&self) -> usize {
        self.alice_settings
    }

    pub fn bob_settings(&self) -> usize {
        self.bob_settings
    }

    pub fn coefficient(&self, k: usize, l: usize) -> f64 {
        self.correlators[k * self.bob_settings + l]
    }

    pub fn correlators(&self) -> &[f64] {
        &self.correlators
    }

    pub fn alice_marginals(&self) -> &[f64] {
        &self.alice_marginals
    }

    pub fn bob_marginals(&self) -> &[f64] {
        &self.bob_marginals
    }

    pub fn has_marginals(&self) -> bool {
        self.alice_marginals
            .iter()
            .chain(&self.bob_marginals)
            .any(|&x| x != 0.0)
    }

    /// LHV bound, if it has been computed (built-ins carry it).
    pub fn classical_bound_value(&self) -> Option<f64> {
        self.classical_bound
    }

    /// Evaluates the expression on correlators `E[k][l]` and marginals.
    pub fn evaluate(
        &self,
        correlator: impl Fn(usize, usize) -> f64,
        alice: &[f64],
        bob: &[f64],
    ) -> f64 {
        let mut value = 0.0;
        for k in 0..self.alice_settings {
            for l in 0..self.bob_settings {
                let c = self.coefficient(k, l);
                if c != 0.0 {
                    value += c * correlator(k, l);
                }
            }
        }
        value += self
            .alice_marginals
            .iter()
            .zip(alice)
            .map(|(c, e)| c * e)
            .sum::<f64>();
        value += self
            .bob_marginals
            .iter()
            .zip(bob)
            .map(|(c, e)| c * e)
            .sum::<f64>();
        value
    }

    /// Same expression with settings relabeled by the given permutations.
    pub fn relabeled(&self, alice_perm: &[usize], bob_perm: &[usize]) -> Self {
        let (k, l) = (self.alice_settings, self.bob_settings);
        let mut out = self.clone();
        for i in 0..k {
            for j in 0..l {
                out.correlators[alice_perm[i] * l + bob_perm[j]] = self.coefficient(i, j);
            }
            out.alice_marginals[alice_perm[i]] = self.alice_marginals[i];
        }
        for j in 0..l {
            out.bob_marginals[bob_perm[j]] = self.bob_marginals[j];
        }
        out.kind = ExpressionKind::Custom;
        out
    }

    /// Same expression with the outcomes of one setting flipped (`A_k → −A_k`
    /// or `B_l → −B_l`).
    pub fn with_flipped_setting(&self, alice: bool, index: usize) -> Self {
        let mut out = self.clone();
        let l = self.bob_settings;
        if alice {
            for j in 0..l {
                out.correlators[index * l + j] *= -1.0;
            }
            out.alice_marginals[index] *= -1.0;
        } else {
            for i in 0..self.alice_settings {
                out.correlators[i * l + index] *= -1.0;
            }
            out.bob_marginals[index] *= -1.0;
        }
        out.kind = ExpressionKind::Custom;
        out
    }
}

/// Gisin's elegant Bell expression,
/// `A₁(B₁+B₂−B₃−B₄) + A₂(B₁−B₂+B₃−B₄) + A₃(B₁−B₂−B₃+B₄)`.
pub fn ebi() -> BellExpression {
    #[rustfmt::skip]
    let table = vec![
        1.0,  1.0, -1.0, -1.0,
        1.0, -1.0,  1.0, -1.0,
        1.0, -1.0, -1.0,  1.0,
    ];
    BellExpression::new("ebi", 3, 4, table)
        .expect("static table")
        .builtin(ExpressionKind::Elegant)
}

/// `A₁B₁ + A₁B₂ + A₂B₁ − A₂B₂`.
pub fn chsh() -> BellExpression {
    BellExpression::new("chsh", 2, 2, vec![1.0, 1.0, 1.0, -1.0])
        .expect("static table")
        .builtin(ExpressionKind::Chsh)
}

/// `Σ_i (A_i B_i + A_{i+1} B_i)` with `A_{n+1} = −A₁`, i.e. the closing term
/// `A₁B_n` carries the minus sign.
pub fn chained(n: usize) -> Result<BellExpression, BellError> {
    if n < 2 {
        return Err(BellError::OutOfRange {
            name: "chained settings",
            value: n as f64,
        });
    }
    let mut table = vec![0.0; n * n];
    for i in 0..n {
        table[i * n + i] += 1.0;
        if i + 1 < n {
            table[(i + 1) * n + i] += 1.0;
        } else {
            table[i] -= 1.0;
        }
    }
    Ok(
        BellExpression::new(alloc::format!("chained{n}"), n, n, table)?
            .builtin(ExpressionKind::Chained(n)),
    )
}

/// Per-party measurement directions.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementStrategy {
    pub alice: Vec<Vec3>,
    pub bob: Vec<Vec3>,
}

impl MeasurementStrategy {
    /// Checks that every direction is a unit vector.
    pub fn new(alice: Vec<Vec3>, bob: Vec<Vec3>) -> Result<Self, BellError> {
        for (party, vs) in [("alice", &alice), ("bob", &bob)] {
            for (index, v) in vs.iter().enumerate() {
                let norm = norm3(v);
                if (norm - 1.0).abs() > UNIT_TOL {
                    return Err(BellError::NotUnitVector { party, index, norm });
                }
            }
        }
        Ok(Self { alice, bob })
    }

    fn check_shape(&self, expr: &BellExpression) -> Result<(), BellError> {
        if self.alice.len() != expr.alice_settings || self.bob.len() != expr.bob_settings {
            return Err(BellError::DimensionMismatch(alloc::format!(
                "strategy has {}x{} settings, expression needs {}x{}",
                self.alice.len(),
                self.bob.len(),
                expr.alice_settings,
                expr.bob_settings
            )));
        }
        Ok(())
    }
}

/// Alice measures X, Y, Z; Bob measures along the four tetrahedral
/// directions that maximize the elegant expression on `|φ⁺⟩`.
pub fn ebi_reference_strategy() -> MeasurementStrategy {
    pure_family_strategy(core::f64::consts::FRAC_PI_4)
}

/// Measurements that saturate the elegant bound on `cos θ|00⟩ + sin θ|11⟩`:
/// Alice X, Y, Z and Bob `(±s, ±s, ±1)/√(1+2s²)` with `s = sin 2θ`.
pub fn pure_family_strategy(theta: f64) -> MeasurementStrategy {
    let s = libm::sin(2.0 * theta);
    let n = libm::sqrt(1.0 + 2.0 * s * s);
    let b = |x: f64, y: f64, z: f64| [x * s / n, y * s / n, z / n];
    MeasurementStrategy {
        alice: vec![[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
        bob: vec![
            b(1.0, -1.0, 1.0),
            b(1.0, 1.0, -1.0),
            b(-1.0, -1.0, -1.0),
            b(-1.0, 1.0, 1.0),
        ],
    }
}

/// Signed Bell value via `⟨A_k B_l⟩ = a_kᵀ T b_l`.
pub fn expectation(
    state: &TwoQubitState,
    expr: &BellExpression,
    strategy: &MeasurementStrategy,
) -> Result<f64, BellError> {
    strategy.check_shape(expr)?;
    let cd = correlation_data(state);
    let alice: Vec<f64> = strategy.alice.iter().map(|a| dot3(a, &cd.r)).collect();
    let bob: Vec<f64> = strategy.bob.iter().map(|b| dot3(b, &cd.s)).collect();
    Ok(expr.evaluate(
        |k, l| dot3(&strategy.alice[k], &cd.t.mul_vec(&strategy.bob[l])),
        &alice,
        &bob,
    ))
}

/// Signed Bell value via `tr(ρ Σ c_kl (a_k·σ)⊗(b_l·σ))` plus marginal terms.
pub fn expectation_by_trace(
    state: &TwoQubitState,
    expr: &BellExpression,
    strategy: &MeasurementStrategy,
) -> Result<f64, BellError> {
    strategy.check_shape(expr)?;
    let id = ComplexMatrix::identity(2);
    let alice_ops: Vec<ComplexMatrix> = strategy.alice.iter().map(bloch_operator).collect();
    let bob_ops: Vec<ComplexMatrix> = strategy.bob.iter().map(bloch_operator).collect();
    let mut op = ComplexMatrix::zeros(4, 4);
    for (k, a) in alice_ops.iter().enumerate() {
        for (l, b) in bob_ops.iter().enumerate() {
            let c = expr.coefficient(k, l);
            if c != 0.0 {
                op = op.add(&kron(a, b).scale_real(c))?;
            }
        }
        op = op.add(&kron(a, &id).scale_real(expr.alice_marginals[k]))?;
    }
    for (l, b) in bob_ops.iter().enumerate() {
        op = op.add(&kron(&id, b).scale_real(expr.bob_marginals[l]))?;
    }
    Ok(state.expect(&op).re)
}

impl From<crate::linalg::LinalgError> for BellError {
    fn from(e: crate::linalg::LinalgError) -> Self {
        BellError::State(StateError::Linalg(e))
    }
}

/// Local-hidden-variable bound: the maximum over every deterministic ±1
/// assignment to all `k + l` settings.
pub fn classical_bound(expr: &BellExpression) -> Result<f64, BellError> {
    let (k, l) = (expr.alice_settings, expr.bob_settings);
    if k + l > MAX_ENUMERATED_SETTINGS {
        return Err(BellError::TooManySettings(k + l));
    }
    let sign = |bits: u32, i: usize| if bits >> i & 1 == 1 { -1.0 } else { 1.0 };
    let mut best = f64::NEG_INFINITY;
    let mut alice = vec![0.0; k];
    let mut bob = vec![0.0; l];
    for abits in 0u32..(1 << k) {
        for (i, a) in alice.iter_mut().enumerate() {
            *a = sign(abits, i);
        }
        for bbits in 0u32..(1 << l) {
            for (j, b) in bob.iter_mut().enumerate() {
                *b = sign(bbits, j);
            }
            let v = expr.evaluate(|x, y| alice[x] * bob[y], &alice, &bob);
            if v > best {
                best = v;
            }
        }
    }
    Ok(best)
}
