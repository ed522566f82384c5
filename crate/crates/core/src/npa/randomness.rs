use alloc::vec::Vec;

use super::{MomentRelaxation, NpaError, NpaLevel, ValueConstraint};
use crate::bell::{classical_bound, max_violation, BellExpression, StateFamily};

/// Certified randomness at one point of a state family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomnessPoint {
    pub param: f64,
    pub bell_value: f64,
    pub guessing_probability: f64,
    /// `−log₂ guessing_probability`.
    pub min_entropy: f64,
}

/// Violations at or below the classical bound certify nothing; such points
/// skip the SDP and report `P_g = 1`.
const LOCAL_SLACK: f64 = 1e-12;

/// Evaluates one family member: its maximal violation of the relaxation's
/// expression, then the guessing probability at that value.
pub fn randomness_point(
    relaxation: &MomentRelaxation,
    family: StateFamily,
    param: f64,
    input_pair: (usize, usize),
    relation: ValueConstraint,
) -> Result<RandomnessPoint, NpaError> {
    let bell_value = max_violation(&family.state(param)?, relaxation.expression());
    randomness_at_value(relaxation, param, bell_value, input_pair, relation)
}

/// Certified randomness for an already known Bell value; `param` is only
/// carried through.
pub fn randomness_at_value(
    relaxation: &MomentRelaxation,
    param: f64,
    bell_value: f64,
    input_pair: (usize, usize),
    relation: ValueConstraint,
) -> Result<RandomnessPoint, NpaError> {
    let classical = local_bound(relaxation.expression())?;
    if bell_value <= classical + LOCAL_SLACK {
        return Ok(RandomnessPoint {
            param,
            bell_value,
            guessing_probability: 1.0,
            min_entropy: 0.0,
        });
    }
    let pg = relaxation
        .guessing(bell_value, input_pair, relation)?
        .guessing_probability;
    Ok(RandomnessPoint {
        param,
        bell_value,
        guessing_probability: pg,
        // `max(0)` turns −0.0 into 0.0 at P_g = 1.
        min_entropy: (-libm::log2(pg)).max(0.0),
    })
}

/// [`randomness_point`] over a grid, sequentially. Stops at the first
/// failure.
pub fn min_entropy_curve(
    family: StateFamily,
    grid: &[f64],
    expr: &BellExpression,
    level: NpaLevel,
    input_pair: (usize, usize),
) -> Result<Vec<RandomnessPoint>, NpaError> {
    let relaxation = MomentRelaxation::new(expr, level)?;
    grid.iter()
        .map(|&p| randomness_point(&relaxation, family, p, input_pair, ValueConstraint::Equal))
        .collect()
}

/// Grid interval on which `a` overtakes `b`: the last pair of neighbours
/// with `H_a < H_b` followed by `H_a ≥ H_b`. Curves must share one grid.
pub fn crossover_bracket(a: &[RandomnessPoint], b: &[RandomnessPoint]) -> Option<(f64, f64)> {
    let diff: Vec<(f64, f64)> = a
        .iter()
        .zip(b)
        .map(|(p, q)| (p.param, p.min_entropy - q.min_entropy))
        .collect();
    diff.windows(2)
        .rev()
        .find(|w| w[0].1 < 0.0 && w[1].1 >= 0.0)
        .map(|w| (w[0].0, w[1].0))
}

/// Bisects on `bracket` (as returned by [`crossover_bracket`]) down to
/// `width`, where `diff(param)` is `H_a − H_b`; returns the midpoint of the
/// final interval.
pub fn refine_crossover<E>(
    bracket: (f64, f64),
    width: f64,
    mut diff: impl FnMut(f64) -> Result<f64, E>,
) -> Result<f64, E> {
    let (mut lo, mut hi) = bracket;
    while hi - lo > width {
        let mid = 0.5 * (lo + hi);
        if diff(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn local_bound(expr: &BellExpression) -> Result<f64, NpaError> {
    Ok(match expr.classical_bound_value() {
        Some(c) => c,
        None => classical_bound(expr)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bell::{chained, ebi};

    #[test]
    fn werner_ebi_at_the_threshold_is_zero() {
        let pts = min_entropy_curve(
            StateFamily::WernerP,
            &[libm::sqrt(3.0) / 2.0, 0.3],
            &ebi(),
            NpaLevel::Two,
            (0, 0),
        )
        .unwrap();
        for p in pts {
            assert_eq!(p.min_entropy, 0.0);
            assert_eq!(p.guessing_probability, 1.0);
        }
    }

    #[test]
    fn bracket_is_the_last_upward_crossing() {
        let pt = |param, min_entropy| RandomnessPoint {
            param,
            bell_value: 0.0,
            guessing_probability: 1.0,
            min_entropy,
        };
        let a = [
            pt(0.0, 0.0),
            pt(1.0, 0.0),
            pt(2.0, 0.5),
            pt(3.0, 1.0),
            pt(4.0, 2.0),
        ];
        let b = [
            pt(0.0, 0.0),
            pt(1.0, 0.3),
            pt(2.0, 0.6),
            pt(3.0, 0.9),
            pt(4.0, 1.2),
        ];
        assert_eq!(crossover_bracket(&a, &b), Some((2.0, 3.0)));
        assert_eq!(crossover_bracket(&b, &a), None);
        let x = refine_crossover::<()>((2.0, 3.0), 1e-9, |t| Ok(t - 2.25)).unwrap();
        assert!((x - 2.25).abs() < 1e-9);
    }

    #[test]
    fn chained_endpoint() {
        let pts = min_entropy_curve(
            StateFamily::WernerP,
            &[1.0],
            &chained(3).unwrap(),
            NpaLevel::Two,
            (0, 0),
        )
        .unwrap();
        assert!((pts[0].min_entropy - 1.1).abs() < 0.05, "{:?}", pts[0]);
        assert!((pts[0].min_entropy + libm::log2(pts[0].guessing_probability)).abs() < 1e-12);
    }
}
