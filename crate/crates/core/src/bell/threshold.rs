use super::{
    classical_bound, seesaw_max_violation, tight_bound, BellError, BellExpression, ExpressionKind,
};
use crate::states::{pure_state, werner_state, TwoQubitState};

/// Restarts and seed used whenever a maximal violation has no closed form.
pub const DEFAULT_SEESAW_RESTARTS: usize = 20;
pub const DEFAULT_SEESAW_SEED: u64 = 0x5EE5_A770;
const BISECTION_WIDTH: f64 = 1e-7;
const VIOLATION_SLACK: f64 = 1e-12;

/// One-parameter state families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateFamily {
    /// `cos θ|00⟩ + sin θ|11⟩`, θ in [0, π/4].
    PureTheta,
    /// `p|φ⁺⟩⟨φ⁺| + (1 − p)I/4`, p in [0, 1].
    WernerP,
}

impl StateFamily {
    pub fn domain(self) -> (f64, f64) {
        match self {
            StateFamily::PureTheta => (0.0, core::f64::consts::FRAC_PI_4),
            StateFamily::WernerP => (0.0, 1.0),
        }
    }

    pub fn state(self, param: f64) -> Result<TwoQubitState, BellError> {
        Ok(match self {
            StateFamily::PureTheta => pure_state(param)?,
            StateFamily::WernerP => werner_state(param)?,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            StateFamily::PureTheta => "pure",
            StateFamily::WernerP => "werner",
        }
    }
}

/// Largest `|⟨expr⟩|` over projective qubit measurements on `state`: the
/// singular-value bound for the elegant expression, the see-saw optimum for
/// everything else.
pub fn max_violation(state: &TwoQubitState, expr: &BellExpression) -> f64 {
    max_violation_seeded(state, expr, DEFAULT_SEESAW_RESTARTS, DEFAULT_SEESAW_SEED)
}

/// [`max_violation`] with explicit see-saw restarts and seed.
pub fn max_violation_seeded(
    state: &TwoQubitState,
    expr: &BellExpression,
    restarts: usize,
    seed: u64,
) -> f64 {
    match expr.kind() {
        ExpressionKind::Elegant => tight_bound(state),
        _ => seesaw_max_violation(state, expr, restarts, seed)
            .value
            .abs(),
    }
}

/// Smallest family parameter beyond which `expr` is violated.
///
/// Werner correlations scale linearly in `p`, so the threshold there is
/// `classical / max_violation(p = 1)` exactly. The pure family is bisected.
pub fn violation_threshold(family: StateFamily, expr: &BellExpression) -> Result<f64, BellError> {
    let classical = match expr.classical_bound_value() {
        Some(c) => c,
        None => classical_bound(expr)?,
    };
    let excess = |param: f64| -> Result<f64, BellError> {
        Ok(max_violation(&family.state(param)?, expr) - classical)
    };
    let (lo, hi) = family.domain();
    match family {
        StateFamily::WernerP if !expr.has_marginals() => {
            let top = max_violation(&family.state(hi)?, expr);
            if top <= classical + VIOLATION_SLACK {
                return Err(BellError::NoCrossing);
            }
            Ok(classical / top)
        }
        _ => {
            if excess(hi)? <= VIOLATION_SLACK {
                return Err(BellError::NoCrossing);
            }
            if excess(lo)? > VIOLATION_SLACK {
                return Ok(lo);
            }
            let (mut lo, mut hi) = (lo, hi);
            while hi - lo > BISECTION_WIDTH {
                let mid = 0.5 * (lo + hi);
                if excess(mid)? > VIOLATION_SLACK {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            Ok(0.5 * (lo + hi))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bell::{chained, chsh, ebi};

    #[test]
    fn pure_family_ebi_threshold() {
        let t = violation_threshold(StateFamily::PureTheta, &ebi()).unwrap();
        // 4√(1 + 2 sin² 2θ) = 6  ⇔  sin² 2θ = 5/8.
        let closed = 0.5 * libm::asin(libm::sqrt(5.0 / 8.0));
        assert!((t - closed).abs() < 1e-6);
        assert!((t - 0.456).abs() < 1e-3);
    }

    #[test]
    fn werner_ebi_threshold_is_root_three_over_two() {
        let t = violation_threshold(StateFamily::WernerP, &ebi()).unwrap();
        assert!((t - libm::sqrt(3.0) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn chsh_violated_for_every_entangled_pure_state() {
        let t = violation_threshold(StateFamily::PureTheta, &chsh()).unwrap();
        assert!(t < 1e-3, "{t}");
    }

    #[test]
    fn werner_chsh_and_chained() {
        let t = violation_threshold(StateFamily::WernerP, &chsh()).unwrap();
        assert!((t - core::f64::consts::FRAC_1_SQRT_2).abs() < 1e-9);
        let t = violation_threshold(StateFamily::WernerP, &chained(3).unwrap()).unwrap();
        assert!((t - 4.0 / (3.0 * libm::sqrt(3.0))).abs() < 1e-9);
    }

    #[test]
    fn unviolable_expression_has_no_crossing() {
        // A1B1 alone is never violated by quantum correlations.
        let e = BellExpression::new("trivial", 1, 1, alloc::vec![1.0]).unwrap();
        assert_eq!(
            violation_threshold(StateFamily::WernerP, &e),
            Err(BellError::NoCrossing)
        );
        assert_eq!(
            violation_threshold(StateFamily::PureTheta, &e),
            Err(BellError::NoCrossing)
        );
    }
}
