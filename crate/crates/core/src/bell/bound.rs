//! The singular-value bound on the elegant Bell expression and the
//! measurements that saturate it.

use alloc::vec::Vec;

use super::{ebi, expectation, BellError, MeasurementStrategy};
use crate::linalg::{add3, dot3, norm3, normalize3, scale3, svd3, Vec3};
use crate::states::{correlation_data, TwoQubitState};

/// Singular values below this are treated as absent.
const SINGULAR_FLOOR: f64 = 1e-12;
/// Tolerance for the saturation conditions reported by [`tightness_check`].
pub const TIGHTNESS_TOL: f64 = 1e-8;

/// `4·√(λ₁² + λ₂² + λ₃²)` over the singular values of the correlation matrix.
pub fn tight_bound(state: &TwoQubitState) -> f64 {
    let sv = correlation_data(state).singular_values();
    4.0 * norm3(&sv)
}

/// The three combinations `b₁+b₂−b₃−b₄`, `b₁−b₂+b₃−b₄`, `b₁−b₂−b₃+b₄` that
/// Alice's settings pair with.
fn bob_combinations(bob: &[Vec3]) -> [Vec3; 3] {
    let e = ebi();
    core::array::from_fn(|k| {
        (0..4).fold([0.0; 3], |acc, l| {
            add3(&acc, &scale3(&bob[l], e.coefficient(k, l)))
        })
    })
}

/// Measurements reaching [`tight_bound`].
///
/// Bob's directions, in the right-singular basis `(v₁, v₂, v₃)` of `T`, are
/// `(λ₁,−λ₂,λ₃)`, `(λ₁,λ₂,−λ₃)`, `−(λ₁,λ₂,λ₃)`, `(−λ₁,λ₂,λ₃)` scaled by
/// `1/√Σλ²`. Alice's are the normalized images of Bob's three combinations
/// under `T`; when an image vanishes (a zero singular value) the matching
/// left singular vector is used instead, which does not change the value.
pub fn optimal_measurements(state: &TwoQubitState) -> Result<MeasurementStrategy, BellError> {
    let cd = correlation_data(state);
    let svd = svd3(&cd.t);
    let [l1, l2, l3] = svd.singular_values;
    if l1 < SINGULAR_FLOOR {
        return Err(BellError::DegenerateState);
    }
    let norm = norm3(&svd.singular_values);
    let v = &svd.right_vectors;
    let in_basis = |c: Vec3| {
        let raw = (0..3).fold([0.0; 3], |acc, i| add3(&acc, &scale3(&v[i], c[i] / norm)));
        // Already unit up to roundoff; renormalize so the strategy validates.
        normalize3(&raw, 0.0).expect("nonzero combination of orthonormal vectors")
    };
    let bob: Vec<Vec3> = [[l1, -l2, l3], [l1, l2, -l3], [-l1, -l2, -l3], [-l1, l2, l3]]
        .into_iter()
        .map(in_basis)
        .collect();

    let alice = bob_combinations(&bob)
        .iter()
        .zip(&svd.left_vectors)
        .map(|(w, u)| normalize3(&cd.t.mul_vec(w), SINGULAR_FLOOR).unwrap_or(*u))
        .collect();
    MeasurementStrategy::new(alice, bob)
}

/// Which saturation conditions a strategy meets on a given state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TightnessReport {
    /// The ratios `σ_k/|w_k|` agree, where `w_k` are Bob's three combinations
    /// and `σ_k = |T w_k|/|w_k|`, and the `σ_k` carry the full singular
    /// weight `Σλ²`.
    pub proportionality_ok: bool,
    /// `Σ_{i<j} ⟨b_i, b_j⟩`.
    pub gram_sum: f64,
    pub gram_sum_ok: bool,
    /// Every `a_k` equals `±T w_k/|T w_k|` with one common sign.
    pub alice_aligned: bool,
    /// `tight_bound − |⟨S⟩|`.
    pub bound_gap: f64,
}

impl TightnessReport {
    pub fn all_ok(&self) -> bool {
        self.proportionality_ok && self.gram_sum_ok && self.alice_aligned
    }
}

pub fn tightness_check(
    state: &TwoQubitState,
    strategy: &MeasurementStrategy,
) -> Result<TightnessReport, BellError> {
    let value = expectation(state, &ebi(), strategy)?;
    let cd = correlation_data(state);
    let sv = svd3(&cd.t).singular_values;
    let bob = &strategy.bob;

    let mut gram_sum = 0.0;
    for i in 0..4 {
        for j in (i + 1)..4 {
            gram_sum += dot3(&bob[i], &bob[j]);
        }
    }

    let combos = bob_combinations(bob);
    let images: Vec<Vec3> = combos.iter().map(|w| cd.t.mul_vec(w)).collect();

    let mut ratios = Vec::new();
    let mut weight = 0.0;
    for (w, tw) in combos.iter().zip(&images) {
        let wn = norm3(w);
        if wn > SINGULAR_FLOOR {
            let sigma = norm3(tw) / wn;
            ratios.push(sigma / wn);
            weight += sigma * sigma;
        }
    }
    let spread = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let proportionality_ok = !ratios.is_empty()
        && spread <= TIGHTNESS_TOL
        && (weight - dot3(&sv, &sv)).abs() <= TIGHTNESS_TOL;

    let mut sign = 0.0;
    let mut aligned_any = false;
    let mut alice_aligned = true;
    for (a, tw) in strategy.alice.iter().zip(&images) {
        if let Some(dir) = normalize3(tw, SINGULAR_FLOOR) {
            let c = dot3(a, &dir);
            if sign == 0.0 {
                sign = if c >= 0.0 { 1.0 } else { -1.0 };
            }
            aligned_any = true;
            alice_aligned &= (c * sign - 1.0).abs() <= TIGHTNESS_TOL;
        }
    }

    Ok(TightnessReport {
        proportionality_ok,
        gram_sum,
        gram_sum_ok: (gram_sum + 2.0).abs() <= TIGHTNESS_TOL,
        alice_aligned: alice_aligned && aligned_any,
        bound_gap: 4.0 * norm3(&sv) - value.abs(),
    })
}
