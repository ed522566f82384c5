//! `RunConfig`: everything one invocation needs, whether it came from flags
//! or from a `--config` JSON file, and its validation into concrete values.

use std::path::PathBuf;
use std::str::FromStr;

use bellbound_core::bell::{
    chained, chsh, ebi, BellExpression, StateFamily, DEFAULT_SEESAW_RESTARTS,
};
use bellbound_core::npa::{NpaLevel, ValueConstraint};
use bellbound_core::sdp::SolverSettings;
use bellbound_core::states::{
    maximally_mixed, phi_plus, pure_state, singlet, werner_state, TwoQubitState,
};
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::io::state_from_json;

/// Pure-family angles this far above π/4 are taken to mean π/4, so that
/// rounded inputs such as `0.7854` work.
pub const THETA_SNAP: f64 = 1e-4;
pub const DEFAULT_SEED: u64 = bellbound_core::bell::DEFAULT_SEESAW_SEED;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandName {
    Bound,
    Measure,
    Classical,
    Tsirelson,
    Randomness,
    GramDemo,
    Solve,
}

/// Solver and see-saw overrides; absent fields keep the defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub gap_tol: Option<f64>,
    pub feasibility_tol: Option<f64>,
    pub max_iterations: Option<usize>,
    pub seesaw_restarts: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl FromStr for GridSpec {
    type Err = CliError;

    /// `start:stop:steps`, endpoints included.
    fn from_str(s: &str) -> Result<Self, CliError> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || CliError::Config(format!("grid {s:?} is not start:stop:steps"));
        let [a, b, k] = parts[..] else {
            return Err(bad());
        };
        Ok(Self {
            start: a.trim().parse().map_err(|_| bad())?,
            stop: b.trim().parse().map_err(|_| bad())?,
            steps: k.trim().parse().map_err(|_| bad())?,
        })
    }
}

impl GridSpec {
    pub fn points(&self) -> Result<Vec<f64>, CliError> {
        if self.steps < 2 {
            return Err(CliError::Config(format!(
                "grid needs at least 2 steps, got {}",
                self.steps
            )));
        }
        if !self.start.is_finite() || !self.stop.is_finite() || self.stop < self.start {
            return Err(CliError::Config(format!(
                "grid [{}, {}] is empty",
                self.start, self.stop
            )));
        }
        let last = (self.steps - 1) as f64;
        Ok((0..self.steps)
            .map(|k| {
                if k + 1 == self.steps {
                    self.stop
                } else {
                    self.start + (self.stop - self.start) * k as f64 / last
                }
            })
            .collect())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub command: Option<CommandName>,
    /// `pure`, `werner`, `singlet`, `phi-plus`, `mixed` or `file`.
    pub state: Option<String>,
    pub theta: Option<f64>,
    pub p: Option<f64>,
    pub state_file: Option<PathBuf>,
    /// `pure` or `werner`.
    pub family: Option<String>,
    /// `ebi`, `chsh` or `chained`.
    pub expr: Option<String>,
    /// Settings per party for `chained`.
    pub n: Option<usize>,
    pub compare: Option<String>,
    pub level: Option<String>,
    /// One-based `x,y`, or `all`.
    pub pair: Option<String>,
    pub grid: Option<GridSpec>,
    /// `eq` or `geq`.
    pub ineq: Option<String>,
    pub out: Option<PathBuf>,
    pub behavior: Option<PathBuf>,
    pub problem: Option<PathBuf>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub tolerances: Tolerances,
    pub json: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairChoice {
    /// Zero-based.
    One(usize, usize),
    All,
}

impl RunConfig {
    pub fn command(&self) -> Result<CommandName, CliError> {
        self.command
            .ok_or_else(|| CliError::Config("no command given".into()))
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }

    pub fn seesaw_restarts(&self) -> usize {
        self.tolerances
            .seesaw_restarts
            .unwrap_or(DEFAULT_SEESAW_RESTARTS)
    }

    pub fn solver_settings(&self) -> Result<SolverSettings, CliError> {
        let mut s = SolverSettings::default();
        let t = &self.tolerances;
        if let Some(v) = t.gap_tol {
            s.gap_tol = positive("gap_tol", v)?;
        }
        if let Some(v) = t.feasibility_tol {
            s.feasibility_tol = positive("feasibility_tol", v)?;
        }
        if let Some(v) = t.max_iterations {
            if v == 0 {
                return Err(CliError::Config("max_iterations must be positive".into()));
            }
            s.max_iterations = v;
        }
        Ok(s)
    }

    pub fn state(&self) -> Result<TwoQubitState, CliError> {
        let kind = self
            .state
            .as_deref()
            .ok_or_else(|| CliError::Config("--state is required".into()))?;
        let need = |v: Option<f64>, flag: &str| {
            v.ok_or_else(|| CliError::Config(format!("--state {kind} needs --{flag}")))
        };
        let state = match kind {
            "pure" => pure_state(snap_theta(need(self.theta, "theta")?))?,
            "werner" => werner_state(need(self.p, "p")?)?,
            "singlet" => singlet(),
            "phi-plus" => phi_plus(),
            "mixed" => maximally_mixed(),
            "file" => {
                let path = self
                    .state_file
                    .as_ref()
                    .ok_or_else(|| CliError::Config("--state file needs --state-file".into()))?;
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
                state_from_json(&text)
                    .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
            }
            other => return Err(CliError::Config(format!("unknown state {other:?}"))),
        };
        Ok(state)
    }

    pub fn expression(&self) -> Result<BellExpression, CliError> {
        let name = self
            .expr
            .as_deref()
            .ok_or_else(|| CliError::Config("--expr is required".into()))?;
        named_expression(name, self.n)
    }

    pub fn comparison(&self) -> Result<Option<BellExpression>, CliError> {
        self.compare
            .as_deref()
            .map(|c| named_expression(c, self.n))
            .transpose()
    }

    pub fn family(&self) -> Result<StateFamily, CliError> {
        match self.family.as_deref() {
            Some("pure") => Ok(StateFamily::PureTheta),
            Some("werner") => Ok(StateFamily::WernerP),
            Some(other) => Err(CliError::Config(format!("unknown family {other:?}"))),
            None => Err(CliError::Config("--family is required".into())),
        }
    }

    pub fn level(&self) -> Result<NpaLevel, CliError> {
        match &self.level {
            None => Ok(NpaLevel::Two),
            Some(s) => s.parse().map_err(|e| CliError::Config(format!("{e}"))),
        }
    }

    pub fn pair(&self) -> Result<PairChoice, CliError> {
        let Some(text) = self.pair.as_deref() else {
            return Ok(PairChoice::One(0, 0));
        };
        if text.trim().eq_ignore_ascii_case("all") {
            return Ok(PairChoice::All);
        }
        let bad = || CliError::Config(format!("pair {text:?} is not x,y (one-based) or all"));
        let parts: Vec<usize> = text
            .split(',')
            .map(|v| v.trim().parse::<usize>().map_err(|_| bad()))
            .collect::<Result<_, _>>()?;
        match parts[..] {
            [x, y] if x >= 1 && y >= 1 => Ok(PairChoice::One(x - 1, y - 1)),
            _ => Err(bad()),
        }
    }

    pub fn relation(&self) -> Result<ValueConstraint, CliError> {
        match self.ineq.as_deref() {
            None | Some("eq") => Ok(ValueConstraint::Equal),
            Some("geq") => Ok(ValueConstraint::AtLeast),
            Some(other) => Err(CliError::Config(format!(
                "--ineq must be eq or geq, got {other:?}"
            ))),
        }
    }

    /// Grid points checked against the family's domain.
    pub fn grid_points(&self, family: StateFamily) -> Result<Vec<f64>, CliError> {
        let grid = self
            .grid
            .ok_or_else(|| CliError::Config("--grid is required".into()))?;
        let (lo, hi) = family.domain();
        grid.points()?
            .into_iter()
            .map(|v| {
                let v = if family == StateFamily::PureTheta {
                    snap_theta(v)
                } else {
                    v
                };
                if v < lo || v > hi {
                    Err(CliError::Config(format!(
                        "{} parameter {v} outside [{lo}, {hi}]",
                        family.name()
                    )))
                } else {
                    Ok(v)
                }
            })
            .collect()
    }

    /// Flag, then `BELLBOUND_THREADS`, then available parallelism.
    pub fn threads(&self) -> Result<usize, CliError> {
        if let Some(t) = self.threads {
            return nonzero_threads(t);
        }
        if let Ok(v) = std::env::var("BELLBOUND_THREADS") {
            let t = v
                .trim()
                .parse()
                .map_err(|_| CliError::Config(format!("BELLBOUND_THREADS={v:?} is not a count")))?;
            return nonzero_threads(t);
        }
        Ok(std::thread::available_parallelism().map_or(1, usize::from))
    }
}

fn nonzero_threads(t: usize) -> Result<usize, CliError> {
    if t == 0 {
        Err(CliError::Config("thread count must be positive".into()))
    } else {
        Ok(t)
    }
}

fn positive(name: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Config(format!(
            "{name} must be positive, got {v}"
        )))
    }
}

pub fn snap_theta(theta: f64) -> f64 {
    let quarter = std::f64::consts::FRAC_PI_4;
    if theta > quarter && theta <= quarter + THETA_SNAP {
        quarter
    } else {
        theta
    }
}

pub fn named_expression(name: &str, n: Option<usize>) -> Result<BellExpression, CliError> {
    match name.to_ascii_lowercase().as_str() {
        "ebi" | "elegant" => Ok(ebi()),
        "chsh" => Ok(chsh()),
        "chained" => Ok(chained(n.unwrap_or(3))?),
        other => Err(CliError::Config(format!("unknown expression {other:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_includes_both_ends() {
        let g: GridSpec = "0:1:5".parse().unwrap();
        assert_eq!(g.points().unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert!("0:1".parse::<GridSpec>().is_err());
        assert!("0:1:1".parse::<GridSpec>().unwrap().points().is_err());
        assert!("1:0:3".parse::<GridSpec>().unwrap().points().is_err());
    }

    #[test]
    #[allow(clippy::approx_constant)]
    fn rounded_quarter_pi_snaps() {
        assert_eq!(snap_theta(0.7854), std::f64::consts::FRAC_PI_4);
        assert_eq!(snap_theta(0.79), 0.79);
        let cfg = RunConfig {
            grid: Some("0:0.7854:50".parse().unwrap()),
            ..Default::default()
        };
        let pts = cfg.grid_points(StateFamily::PureTheta).unwrap();
        assert_eq!(*pts.last().unwrap(), std::f64::consts::FRAC_PI_4);
        let cfg = RunConfig {
            grid: Some("0:0.8:5".parse().unwrap()),
            ..Default::default()
        };
        assert!(cfg.grid_points(StateFamily::PureTheta).is_err());
    }

    #[test]
    fn pairs_are_one_based() {
        let mut cfg = RunConfig::default();
        assert_eq!(cfg.pair().unwrap(), PairChoice::One(0, 0));
        cfg.pair = Some("2,3".into());
        assert_eq!(cfg.pair().unwrap(), PairChoice::One(1, 2));
        cfg.pair = Some("ALL".into());
        assert_eq!(cfg.pair().unwrap(), PairChoice::All);
        cfg.pair = Some("0,1".into());
        assert!(cfg.pair().is_err());
    }

    #[test]
    fn config_json_round_trip() {
        let text = r#"{"command": "randomness", "family": "werner", "expr": "chsh",
                       "grid": {"start": 0.9, "stop": 1.0, "steps": 3},
                       "tolerances": {"gap_tol": 1e-7}}"#;
        let cfg: RunConfig = serde_json::from_str(text).unwrap();
        assert_eq!(cfg.command, Some(CommandName::Randomness));
        assert_eq!(cfg.solver_settings().unwrap().gap_tol, 1e-7);
        let back: RunConfig = serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
        assert!(serde_json::from_str::<RunConfig>(r#"{"bogus": 1}"#).is_err());
    }
}
