//! Randomness curves over a parameter grid on a bounded worker pool. Points
//! are independent; results come back in grid order whatever the
//! completion order, so output does not depend on the thread count.

use bellbound_core::bell::{max_violation_seeded, StateFamily};
use bellbound_core::npa::{
    crossover_bracket, randomness_at_value, refine_crossover, MomentRelaxation, NpaError,
    RandomnessPoint, ValueConstraint,
};
use rayon::prelude::*;

use crate::config::PairChoice;
use crate::error::CliError;

/// Crossovers are bisected down to this parameter width.
pub const CROSSOVER_WIDTH: f64 = 1e-4;

/// Everything needed to evaluate one point, shared read-only by workers.
pub struct Evaluator<'a> {
    pub relaxation: &'a MomentRelaxation,
    pub family: StateFamily,
    pub pair: PairChoice,
    pub relation: ValueConstraint,
    pub seed: u64,
    pub restarts: usize,
}

impl Evaluator<'_> {
    /// With [`PairChoice::All`] the least random input pair is reported.
    pub fn point(&self, param: f64) -> Result<RandomnessPoint, NpaError> {
        let state = self.family.state(param)?;
        let bell = max_violation_seeded(
            &state,
            self.relaxation.expression(),
            self.restarts,
            self.seed,
        );
        let pairs: Vec<(usize, usize)> = match self.pair {
            PairChoice::One(x, y) => vec![(x, y)],
            PairChoice::All => {
                let s = self.relaxation.structure().scenario();
                (0..s.alice_settings)
                    .flat_map(|x| (0..s.bob_settings).map(move |y| (x, y)))
                    .collect()
            }
        };
        let mut best: Option<RandomnessPoint> = None;
        for pair in pairs {
            let p = randomness_at_value(self.relaxation, param, bell, pair, self.relation)?;
            if best.is_none_or(|b| p.guessing_probability > b.guessing_probability) {
                best = Some(p);
            }
        }
        Ok(best.expect("at least one pair"))
    }

    pub fn curve(
        &self,
        grid: &[f64],
        pool: &rayon::ThreadPool,
    ) -> Vec<Result<RandomnessPoint, NpaError>> {
        pool.install(|| grid.par_iter().map(|&p| self.point(p)).collect())
    }
}

pub fn pool(threads: usize) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Config(format!("worker pool: {e}")))
}

/// Where `a`'s entropy overtakes `b`'s, bracketed on the shared grid and then
/// bisected. `None` when the curves never cross upward.
pub fn crossover(
    a: &Evaluator<'_>,
    b: &Evaluator<'_>,
    curve_a: &[RandomnessPoint],
    curve_b: &[RandomnessPoint],
) -> Result<Option<f64>, NpaError> {
    let Some(bracket) = crossover_bracket(curve_a, curve_b) else {
        return Ok(None);
    };
    refine_crossover(bracket, CROSSOVER_WIDTH, |t| {
        Ok(a.point(t)?.min_entropy - b.point(t)?.min_entropy)
    })
    .map(Some)
}
