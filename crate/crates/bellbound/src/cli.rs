use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{CommandName, GridSpec, RunConfig, Tolerances};
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "bellbound",
    version,
    about = "Bell bounds, optimal measurements and certified randomness for two qubits"
)]
pub struct Cli {
    /// Machine-readable output.
    #[arg(long, global = true)]
    pub json: bool,
    /// Run from a JSON config; flags given alongside override its fields.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form bound, singular values and classical comparison for a state.
    Bound(StateArgs),
    /// Measurements reaching the closed-form bound, with a tightness report.
    Measure {
        #[command(flatten)]
        state: StateArgs,
        /// Write the strategy as JSON.
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
        /// Write the resulting behavior as CSV.
        #[arg(long, value_name = "PATH")]
        behavior: Option<PathBuf>,
    },
    /// Local bound by enumerating deterministic strategies.
    Classical(ExprArgs),
    /// Upper bound on the quantum value from an NPA relaxation.
    Tsirelson {
        #[command(flatten)]
        expr: ExprArgs,
        /// 1, 1+ab or 2.
        #[arg(long)]
        level: Option<String>,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Min-entropy curve over a state family.
    Randomness {
        /// pure or werner.
        #[arg(long)]
        family: Option<String>,
        #[command(flatten)]
        expr: ExprArgs,
        /// start:stop:steps, endpoints included.
        #[arg(long)]
        grid: Option<GridSpec>,
        /// 1, 1+ab or 2 (default 2).
        #[arg(long)]
        level: Option<String>,
        /// One-based input pair x,y, or all (default 1,1).
        #[arg(long)]
        pair: Option<String>,
        /// Second expression; reports where the main one overtakes it.
        #[arg(long)]
        compare: Option<String>,
        /// CSV destination (default stdout).
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
        /// Worker threads (overrides BELLBOUND_THREADS).
        #[arg(long)]
        threads: Option<usize>,
        /// eq (default) or geq for the Bell-value constraint.
        #[arg(long)]
        ineq: Option<String>,
        /// See-saw seed for expressions without a closed-form violation.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        seesaw_restarts: Option<usize>,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// The four-vector Gram SDP and its dual certificate.
    GramDemo,
    /// Solve an SDP problem file.
    Solve {
        #[arg(long, value_name = "PATH")]
        problem: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverArgs,
    },
}

#[derive(Debug, Args)]
pub struct StateArgs {
    /// pure, werner, singlet, phi-plus, mixed or file.
    #[arg(long)]
    pub state: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    pub theta: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub p: Option<f64>,
    #[arg(long, value_name = "PATH")]
    pub state_file: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExprArgs {
    /// ebi, chsh or chained.
    #[arg(long)]
    pub expr: Option<String>,
    /// Settings per party for chained (default 3).
    #[arg(long)]
    pub n: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    #[arg(long)]
    pub gap_tol: Option<f64>,
    #[arg(long)]
    pub feasibility_tol: Option<f64>,
    #[arg(long)]
    pub max_iterations: Option<usize>,
}

impl Cli {
    /// The effective configuration: the config file (if any) with flags
    /// layered on top.
    pub fn into_config(self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
                serde_json::from_str(&text)
                    .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
            }
            None => RunConfig::default(),
        };
        cfg.json |= self.json;
        if let Some(cmd) = self.command {
            let name = cmd.name();
            if cfg.command.is_some_and(|c| c != name) {
                return Err(CliError::Config(format!(
                    "config is for {:?} but the command line asks for {name:?}",
                    cfg.command.expect("checked")
                )));
            }
            cfg.command = Some(name);
            cmd.apply(&mut cfg);
        }
        Ok(cfg)
    }
}

fn set<T>(slot: &mut Option<T>, v: Option<T>) {
    if v.is_some() {
        *slot = v;
    }
}

impl StateArgs {
    fn apply(self, cfg: &mut RunConfig) {
        set(&mut cfg.state, self.state);
        set(&mut cfg.theta, self.theta);
        set(&mut cfg.p, self.p);
        set(&mut cfg.state_file, self.state_file);
    }
}

impl ExprArgs {
    fn apply(self, cfg: &mut RunConfig) {
        set(&mut cfg.expr, self.expr);
        set(&mut cfg.n, self.n);
    }
}

impl SolverArgs {
    fn apply(self, t: &mut Tolerances) {
        set(&mut t.gap_tol, self.gap_tol);
        set(&mut t.feasibility_tol, self.feasibility_tol);
        set(&mut t.max_iterations, self.max_iterations);
    }
}

impl Command {
    fn name(&self) -> CommandName {
        match self {
            Command::Bound(_) => CommandName::Bound,
            Command::Measure { .. } => CommandName::Measure,
            Command::Classical(_) => CommandName::Classical,
            Command::Tsirelson { .. } => CommandName::Tsirelson,
            Command::Randomness { .. } => CommandName::Randomness,
            Command::GramDemo => CommandName::GramDemo,
            Command::Solve { .. } => CommandName::Solve,
        }
    }

    fn apply(self, cfg: &mut RunConfig) {
        match self {
            Command::Bound(s) => s.apply(cfg),
            Command::Measure {
                state,
                out,
                behavior,
            } => {
                state.apply(cfg);
                set(&mut cfg.out, out);
                set(&mut cfg.behavior, behavior);
            }
            Command::Classical(e) => e.apply(cfg),
            Command::Tsirelson {
                expr,
                level,
                solver,
            } => {
                expr.apply(cfg);
                set(&mut cfg.level, level);
                solver.apply(&mut cfg.tolerances);
            }
            Command::Randomness {
                family,
                expr,
                grid,
                level,
                pair,
                compare,
                out,
                threads,
                ineq,
                seed,
                seesaw_restarts,
                solver,
            } => {
                set(&mut cfg.family, family);
                expr.apply(cfg);
                set(&mut cfg.grid, grid);
                set(&mut cfg.level, level);
                set(&mut cfg.pair, pair);
                set(&mut cfg.compare, compare);
                set(&mut cfg.out, out);
                set(&mut cfg.threads, threads);
                set(&mut cfg.ineq, ineq);
                set(&mut cfg.seed, seed);
                set(&mut cfg.tolerances.seesaw_restarts, seesaw_restarts);
                solver.apply(&mut cfg.tolerances);
            }
            Command::GramDemo => {}
            Command::Solve { problem, solver } => {
                set(&mut cfg.problem, problem);
                solver.apply(&mut cfg.tolerances);
            }
        }
    }
}
