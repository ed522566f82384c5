//! Moment-matrix SDPs: the largest Bell value over the relaxation, and the
//! largest single outcome probability compatible with a given Bell value.

use alloc::vec;
use alloc::vec::Vec;

use super::{build_moment_structure, MomentStructure, Monomial, NpaError, NpaLevel, Scenario};
use crate::bell::BellExpression;
use crate::sdp::{solve_with, Constraint, SdpProblem, SdpStatus, Sense, SolverSettings, SparseSym};

/// Requested Bell values this far beyond the relaxation's range are treated
/// as roundoff and pulled back onto the boundary.
pub const OVERSHOOT_TOL: f64 = 1e-6;

/// Unconverged solves are still used when their gap and residuals are this
/// small. Close to the edge of the relaxation the feasible moments form a
/// thin sliver and interior-point iterates stall around 1e-7.
pub const ACCEPT_MERIT: f64 = 1e-6;

/// Bell values closer than this to either end of the attainable range are
/// imposed at this distance instead. On the edge itself the moment problem
/// has no interior point at all; the shift moves guessing probabilities by
/// roughly `√EDGE_MARGIN`.
pub const EDGE_MARGIN: f64 = 2e-6;

/// How the Bell value enters a guessing-probability SDP.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ValueConstraint {
    /// `⟨S⟩ = I`.
    #[default]
    Equal,
    /// `⟨S⟩ ≥ I`, for sensitivity checks.
    AtLeast,
}

/// Linear functional on moment classes; the constant term sits on class 0,
/// which is pinned to one.
type ClassForm = Vec<f64>;

/// One moment relaxation of one Bell expression, with the attainable range
/// of its value.
///
/// The moment matrix is the dual slack of the solver's standard form:
/// `M(y) = F₀ + Σ_c y_c F_c` with one free variable per class (class 0 is
/// pinned to one and lives in `F₀`), so the structure costs no equality
/// constraints at all. A Bell-value equality is eliminated by substitution;
/// a `≥` constraint becomes the extra 1×1 block `⟨S⟩ − I ≥ 0`.
#[derive(Debug, Clone)]
pub struct MomentRelaxation {
    structure: MomentStructure,
    expr: BellExpression,
    positions: Vec<Vec<(usize, usize)>>,
    bell: ClassForm,
    settings: SolverSettings,
    max: f64,
    min: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GuessingReport {
    /// Bell value actually imposed: requests within [`EDGE_MARGIN`] of the
    /// range ends (or slightly beyond them) are moved inside.
    pub bell_value: f64,
    /// Indexed by `2a + b`, outcome 0 meaning +1.
    pub per_outcome: [f64; 4],
    pub guessing_probability: f64,
}

/// Moment problem `max g·y + g₀ s.t. M(y) ⪰ 0` in the solver's form, plus
/// what is needed to map its answer back.
struct Lowered {
    problem: SdpProblem,
    /// Constant objective term after substitution.
    offset: f64,
}

impl MomentRelaxation {
    /// Builds the relaxation and solves for its maximal (and, for
    /// expressions with marginals, minimal) Bell value.
    pub fn new(expr: &BellExpression, level: NpaLevel) -> Result<Self, NpaError> {
        Self::with_settings(expr, level, SolverSettings::default())
    }

    /// As [`MomentRelaxation::new`], with every SDP solved under `settings`.
    pub fn with_settings(
        expr: &BellExpression,
        level: NpaLevel,
        settings: SolverSettings,
    ) -> Result<Self, NpaError> {
        let scenario = Scenario::new(expr.alice_settings(), expr.bob_settings())?;
        let structure = build_moment_structure(scenario, level);
        let mut relax = Self {
            bell: bell_form(&structure, expr),
            positions: structure.class_positions(),
            structure,
            expr: expr.clone(),
            settings,
            max: f64::NAN,
            min: f64::NAN,
        };
        relax.max = relax.optimize(&relax.bell, None)?.0;
        relax.min = if expr.has_marginals() {
            let neg: ClassForm = relax.bell.iter().map(|v| -v).collect();
            -relax.optimize(&neg, None)?.0
        } else {
            // Relabeling every outcome of one party negates the value.
            -relax.max
        };
        Ok(relax)
    }

    pub fn structure(&self) -> &MomentStructure {
        &self.structure
    }

    pub fn expression(&self) -> &BellExpression {
        &self.expr
    }

    /// Upper bound on the quantum value of the expression.
    pub fn max_value(&self) -> f64 {
        self.max
    }

    pub fn min_value(&self) -> f64 {
        self.min
    }

    /// Largest `P(ab|xy)` over the four outcomes at input pair `(x, y)`
    /// (zero-based) given the Bell value.
    pub fn guessing(
        &self,
        value: f64,
        (x, y): (usize, usize),
        relation: ValueConstraint,
    ) -> Result<GuessingReport, NpaError> {
        let sc = self.structure.scenario();
        if x >= sc.alice_settings || y >= sc.bob_settings {
            return Err(NpaError::InputOutOfRange {
                x,
                y,
                k: sc.alice_settings,
                l: sc.bob_settings,
            });
        }
        let value = self.pull_back(value)?;
        let mut per_outcome = [0.0; 4];
        for (ab, slot) in per_outcome.iter_mut().enumerate() {
            let form = outcome_form(&self.structure, x, y, ab / 2, ab % 2);
            *slot = self.optimize(&form, Some((value, relation)))?.0;
        }
        let best = per_outcome
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        Ok(GuessingReport {
            bell_value: value,
            per_outcome,
            guessing_probability: best.clamp(0.25, 1.0),
        })
    }

    /// Optimal moment values (one per class) maximizing `objective`.
    pub fn optimal_moments(&self, objective: &[f64]) -> Result<Vec<f64>, NpaError> {
        Ok(self.optimize(objective, None)?.1)
    }

    fn pull_back(&self, value: f64) -> Result<f64, NpaError> {
        if !value.is_finite()
            || value > self.max + OVERSHOOT_TOL
            || value < self.min - OVERSHOOT_TOL
        {
            return Err(NpaError::InfeasibleValue {
                value,
                min: self.min,
                max: self.max,
            });
        }
        let (lo, hi) = (self.min + EDGE_MARGIN, self.max - EDGE_MARGIN);
        Ok(if lo < hi {
            value.clamp(lo, hi)
        } else {
            0.5 * (self.min + self.max)
        })
    }

    /// Maximizes a class functional; returns the value and the class vector.
    fn optimize(
        &self,
        objective: &[f64],
        value: Option<(f64, ValueConstraint)>,
    ) -> Result<(f64, Vec<f64>), NpaError> {
        let (lowered, free, pinned) = self.lower(objective, value);
        let sol = solve_with(&lowered.problem, &self.settings);
        if sol.status != SdpStatus::Optimal && sol.accuracy.merit() > ACCEPT_MERIT {
            return Err(NpaError::Solver {
                status: sol.status,
                gap: sol.accuracy.relative_gap,
            });
        }
        let mut moments = vec![0.0; self.structure.num_classes()];
        moments[0] = 1.0;
        for (c, yc) in free.iter().zip(&sol.y) {
            moments[*c] = *yc;
        }
        if let Some((c, constant, coeffs)) = pinned {
            moments[c] = constant + coeffs.iter().zip(&sol.y).map(|(a, b)| a * b).sum::<f64>();
        }
        Ok((lowered.offset + sol.dual_obj, moments))
    }

    /// Lowers `max objective(M) s.t. M ⪰ 0 [, Bell(M) ~ value]`.
    ///
    /// Returns the problem, the classes carried by the solver's `y`, and for
    /// an equality the eliminated class as `(class, constant, coefficients
    /// over y)`.
    #[allow(clippy::type_complexity)]
    fn lower(
        &self,
        objective: &[f64],
        value: Option<(f64, ValueConstraint)>,
    ) -> (Lowered, Vec<usize>, Option<(usize, f64, Vec<f64>)>) {
        let m = self.structure.size();
        let nc = self.structure.num_classes();
        let at_least = matches!(value, Some((_, ValueConstraint::AtLeast)));
        let n = if at_least { m + 1 } else { m };

        // Every class c ≥ 1 as an affine function of y: class c = κ_c + Σ λ_ci y_i.
        let elim = match value {
            Some((_, ValueConstraint::Equal)) => Some(
                (1..nc)
                    .max_by(|&a, &b| self.bell[a].abs().total_cmp(&self.bell[b].abs()))
                    .expect("a Bell functional touches some class"),
            ),
            _ => None,
        };
        let free: Vec<usize> = (1..nc).filter(|&c| Some(c) != elim).collect();
        let mut index = vec![usize::MAX; nc];
        for (i, &c) in free.iter().enumerate() {
            index[c] = i;
        }
        let pinned = elim.map(|e| {
            let (target, _) = value.expect("elimination implies a value");
            let be = self.bell[e];
            let constant = (target - self.bell[0]) / be;
            let coeffs: Vec<f64> = free.iter().map(|&c| -self.bell[c] / be).collect();
            (e, constant, coeffs)
        });
        let affine = |c: usize| -> (f64, Vec<(usize, f64)>) {
            match &pinned {
                Some((e, constant, coeffs)) if *e == c => (
                    *constant,
                    coeffs
                        .iter()
                        .enumerate()
                        .filter(|(_, v)| **v != 0.0)
                        .map(|(i, v)| (i, *v))
                        .collect(),
                ),
                _ => (0.0, vec![(index[c], 1.0)]),
            }
        };

        // M(y) = F₀ + Σ y_i F_i, written as C − Σ y_i A_i with A_i = −F_i.
        let mut c_mat = SparseSym::new(n);
        let mut a_mats: Vec<SparseSym> = (0..free.len()).map(|_| SparseSym::new(n)).collect();
        let mut touch = |class: usize, i: usize, j: usize| {
            if class == 0 {
                c_mat.add(i, j, 1.0).expect("in range");
                return;
            }
            let (k, lin) = affine(class);
            if k != 0.0 {
                c_mat.add(i, j, k).expect("in range");
            }
            for (v, coef) in lin {
                a_mats[v].add(i, j, -coef).expect("in range");
            }
        };
        for (class, group) in self.positions.iter().enumerate() {
            for &(i, j) in group {
                touch(class, i, j);
            }
        }
        if let Some((target, ValueConstraint::AtLeast)) = value {
            // Last diagonal entry: Bell(M) − target.
            c_mat.add(m, m, self.bell[0] - target).expect("in range");
            for (class, &f) in self.bell.iter().enumerate().skip(1) {
                if f != 0.0 {
                    touch_scaled(&mut a_mats, &affine, class, m, f);
                    let (k, _) = affine(class);
                    c_mat.add(m, m, f * k).expect("in range");
                }
            }
        }

        // Objective g₀ + Σ g_i y_i after substitution.
        let mut offset = objective[0];
        let mut b = vec![0.0; free.len()];
        for (class, &g) in objective.iter().enumerate().skip(1) {
            if g == 0.0 {
                continue;
            }
            let (k, lin) = affine(class);
            offset += g * k;
            for (v, coef) in lin {
                b[v] += g * coef;
            }
        }

        let constraints = a_mats
            .into_iter()
            .zip(b)
            .map(|(a, b)| Constraint { a, b })
            .collect();
        let problem = SdpProblem::new(c_mat.to_dense(), constraints, Sense::Minimize)
            .expect("structured problem is well formed");
        (Lowered { problem, offset }, free, pinned)
    }
}

fn touch_scaled(
    a_mats: &mut [SparseSym],
    affine: &impl Fn(usize) -> (f64, Vec<(usize, f64)>),
    class: usize,
    m: usize,
    f: f64,
) {
    for (v, coef) in affine(class).1 {
        a_mats[v].add(m, m, -f * coef).expect("in range");
    }
}

struct Classes {
    one: usize,
    alice: Vec<usize>,
    bob: Vec<usize>,
    joint: Vec<Vec<usize>>,
}

fn classes(s: &MomentStructure) -> Classes {
    let sc = s.scenario();
    let find = |a: Vec<usize>, b: Vec<usize>| {
        s.find_class(&Monomial::new(a, b))
            .expect("level one holds every single and joint projector")
    };
    Classes {
        one: 0,
        alice: (0..sc.alice_settings)
            .map(|x| find(vec![x], vec![]))
            .collect(),
        bob: (0..sc.bob_settings)
            .map(|y| find(vec![], vec![y]))
            .collect(),
        joint: (0..sc.alice_settings)
            .map(|x| {
                (0..sc.bob_settings)
                    .map(|y| find(vec![x], vec![y]))
                    .collect()
            })
            .collect(),
    }
}

/// With `A = 2Π_A − 1`, `B = 2Π_B − 1`:
/// `⟨AB⟩ = 4⟨Π_AΠ_B⟩ − 2⟨Π_A⟩ − 2⟨Π_B⟩ + 1`, `⟨A⟩ = 2⟨Π_A⟩ − 1`.
fn bell_form(s: &MomentStructure, expr: &BellExpression) -> ClassForm {
    let c = classes(s);
    let mut form = vec![0.0; s.num_classes()];
    for x in 0..expr.alice_settings() {
        for y in 0..expr.bob_settings() {
            let k = expr.coefficient(x, y);
            if k != 0.0 {
                form[c.joint[x][y]] += 4.0 * k;
                form[c.alice[x]] -= 2.0 * k;
                form[c.bob[y]] -= 2.0 * k;
                form[c.one] += k;
            }
        }
    }
    for (x, &k) in expr.alice_marginals().iter().enumerate() {
        form[c.alice[x]] += 2.0 * k;
        form[c.one] -= k;
    }
    for (y, &k) in expr.bob_marginals().iter().enumerate() {
        form[c.bob[y]] += 2.0 * k;
        form[c.one] -= k;
    }
    form
}

/// `P(ab|xy)` from projector moments; outcome 1 uses the complement `1 − Π`.
fn outcome_form(s: &MomentStructure, x: usize, y: usize, a: usize, b: usize) -> ClassForm {
    let c = classes(s);
    let mut form = vec![0.0; s.num_classes()];
    let (sa, sb) = (
        if a == 0 { 1.0 } else { -1.0 },
        if b == 0 { 1.0 } else { -1.0 },
    );
    // (a₀ + sa·Π_A)(b₀ + sb·Π_B) with a₀ = 0 or 1.
    let a0 = if a == 0 { 0.0 } else { 1.0 };
    let b0 = if b == 0 { 0.0 } else { 1.0 };
    form[c.one] += a0 * b0;
    form[c.alice[x]] += sa * b0;
    form[c.bob[y]] += a0 * sb;
    form[c.joint[x][y]] += sa * sb;
    form
}

/// Largest value of `expr` over the level's moment relaxation.
pub fn tsirelson_bound(expr: &BellExpression, level: NpaLevel) -> Result<f64, NpaError> {
    Ok(MomentRelaxation::new(expr, level)?.max_value())
}

/// Guessing probability at Bell value `value`, input pair `(x, y)`
/// (zero-based), with the value imposed as an equality.
pub fn max_guessing_probability(
    expr: &BellExpression,
    value: f64,
    input_pair: (usize, usize),
    level: NpaLevel,
) -> Result<f64, NpaError> {
    Ok(MomentRelaxation::new(expr, level)?
        .guessing(value, input_pair, ValueConstraint::Equal)?
        .guessing_probability)
}
