//! File formats: states and strategies as JSON, behaviors and curves as CSV,
//! SDP problems as JSON.

use std::fmt::Write as _;
use std::io::{self, Write};

use bellbound_core::bell::{Behavior, MeasurementStrategy};
use bellbound_core::npa::RandomnessPoint;
use bellbound_core::sdp::{Constraint, SdpProblem, Sense, SparseSym};
use bellbound_core::states::TwoQubitState;
use bellbound_core::{ComplexMatrix, RealMatrix};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("expected a {expected} matrix, found {found}")]
    Shape { expected: String, found: String },
    #[error("invalid state: {0}")]
    State(#[from] bellbound_core::states::StateError),
    #[error("invalid strategy: {0}")]
    Strategy(#[from] bellbound_core::bell::BellError),
    #[error("invalid SDP problem: {0}")]
    Sdp(#[from] bellbound_core::sdp::SdpError),
}

/// Rounds to 12 significant digits so printed values are stable across
/// platforms' last-bit differences.
pub fn sig12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

/// `{"rho": [[[re, im], ...4], ...4]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateFile {
    pub rho: Vec<Vec<[f64; 2]>>,
}

pub fn state_to_json(state: &TwoQubitState) -> String {
    let rho = state.rho();
    let file = StateFile {
        rho: (0..4)
            .map(|i| {
                (0..4)
                    .map(|j| [sig12(rho[(i, j)].re), sig12(rho[(i, j)].im)])
                    .collect()
            })
            .collect(),
    };
    serde_json::to_string_pretty(&file).expect("plain data serializes")
}

pub fn state_from_json(text: &str) -> Result<TwoQubitState, FormatError> {
    let file: StateFile = serde_json::from_str(text)?;
    if file.rho.len() != 4 || file.rho.iter().any(|r| r.len() != 4) {
        return Err(FormatError::Shape {
            expected: "4x4".into(),
            found: shape(&file.rho),
        });
    }
    let m = ComplexMatrix::from_fn(4, 4, |i, j| {
        let [re, im] = file.rho[i][j];
        Complex64::new(re, im)
    });
    Ok(TwoQubitState::new(m)?)
}

/// `{"alice": [[x, y, z], ...], "bob": [...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StrategyFile {
    pub alice: Vec<[f64; 3]>,
    pub bob: Vec<[f64; 3]>,
}

pub fn strategy_to_json(strategy: &MeasurementStrategy) -> String {
    let round = |v: &Vec<[f64; 3]>| v.iter().map(|d| d.map(sig12)).collect();
    let file = StrategyFile {
        alice: round(&strategy.alice),
        bob: round(&strategy.bob),
    };
    serde_json::to_string_pretty(&file).expect("plain data serializes")
}

pub fn strategy_from_json(text: &str) -> Result<MeasurementStrategy, FormatError> {
    let file: StrategyFile = serde_json::from_str(text)?;
    Ok(MeasurementStrategy::new(file.alice, file.bob)?)
}

/// Header `x,y,a,b,p`; settings and outcomes are 1-based and 0-based
/// respectively (outcome 0 is the +1 eigenvalue).
pub fn write_behavior_csv(w: &mut impl Write, behavior: &Behavior) -> io::Result<()> {
    writeln!(w, "x,y,a,b,p")?;
    for (x, y, a, b, p) in behavior.rows() {
        writeln!(w, "{},{},{a},{b},{}", x + 1, y + 1, sig12(p))?;
    }
    Ok(())
}

pub const CURVE_HEADER: &str = "param,bell_value,guessing_probability,min_entropy_bits";

pub fn curve_row(p: &RandomnessPoint) -> String {
    let mut s = String::new();
    write!(
        s,
        "{},{},{},{}",
        sig12(p.param),
        sig12(p.bell_value),
        sig12(p.guessing_probability),
        sig12(p.min_entropy)
    )
    .expect("writing to a String");
    s
}

/// Parses a curve CSV back into points, skipping `#` comment lines.
pub fn read_curve_csv(text: &str) -> Result<Vec<RandomnessPoint>, String> {
    let mut lines = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty());
    match lines.next() {
        Some(h) if h.trim() == CURVE_HEADER => {}
        other => return Err(format!("unexpected header {other:?}")),
    }
    lines
        .map(|l| {
            let f: Vec<f64> = l
                .split(',')
                .map(|v| v.trim().parse::<f64>().map_err(|e| format!("{l}: {e}")))
                .collect::<Result<_, _>>()?;
            match f[..] {
                [param, bell_value, guessing_probability, min_entropy] => Ok(RandomnessPoint {
                    param,
                    bell_value,
                    guessing_probability,
                    min_entropy,
                }),
                _ => Err(format!("expected 4 fields: {l}")),
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SenseFile {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConstraintFile {
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    pub b: f64,
}

/// `{n, C, constraints: [{A, b}], sense}` with dense matrices.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SdpFile {
    pub n: usize,
    #[serde(rename = "C")]
    pub c: Vec<Vec<f64>>,
    pub constraints: Vec<ConstraintFile>,
    pub sense: SenseFile,
}

pub fn sdp_to_json(problem: &SdpProblem) -> String {
    let dense =
        |m: &RealMatrix| -> Vec<Vec<f64>> { (0..m.rows()).map(|i| m.row(i).to_vec()).collect() };
    let file = SdpFile {
        n: problem.dim(),
        c: dense(problem.objective()),
        constraints: problem
            .constraints()
            .iter()
            .map(|k| ConstraintFile {
                a: dense(&k.a.to_dense()),
                b: k.b,
            })
            .collect(),
        sense: match problem.sense() {
            Sense::Minimize => SenseFile::Minimize,
            Sense::Maximize => SenseFile::Maximize,
        },
    };
    serde_json::to_string_pretty(&file).expect("plain data serializes")
}

pub fn sdp_from_json(text: &str) -> Result<SdpProblem, FormatError> {
    let file: SdpFile = serde_json::from_str(text)?;
    let n = file.n;
    let matrix = |rows: &Vec<Vec<f64>>| -> Result<RealMatrix, FormatError> {
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(FormatError::Shape {
                expected: format!("{n}x{n}"),
                found: shape(rows),
            });
        }
        Ok(RealMatrix::from_fn(n, n, |i, j| rows[i][j]))
    };
    let c = matrix(&file.c)?;
    let constraints = file
        .constraints
        .iter()
        .map(|k| {
            Ok(Constraint {
                a: SparseSym::from_dense(&matrix(&k.a)?)?,
                b: k.b,
            })
        })
        .collect::<Result<Vec<_>, FormatError>>()?;
    let sense = match file.sense {
        SenseFile::Minimize => Sense::Minimize,
        SenseFile::Maximize => Sense::Maximize,
    };
    Ok(SdpProblem::new(c, constraints, sense)?)
}

fn shape<T>(rows: &[Vec<T>]) -> String {
    let widths: Vec<usize> = rows.iter().map(Vec::len).collect();
    format!("{} rows of widths {widths:?}", rows.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use bellbound_core::bell::{behavior_from, ebi_reference_strategy};
    use bellbound_core::sdp::gram_problem;
    use bellbound_core::states::{pure_state, singlet};

    #[test]
    fn sig12_rounds() {
        assert_eq!(sig12(0.1 + 0.2), 0.3);
        assert_eq!(sig12(1.0 / 3.0), 0.333333333333);
        assert_eq!(sig12(0.0), 0.0);
    }

    #[test]
    fn state_round_trip() {
        let s = pure_state(0.3).unwrap();
        let back = state_from_json(&state_to_json(&s)).unwrap();
        assert!(back.rho().sub(s.rho()).unwrap().max_abs() < 1e-11);
        assert!(matches!(
            state_from_json(r#"{"rho": [[[1,0]]]}"#),
            Err(FormatError::Shape { .. })
        ));
    }

    #[test]
    fn strategy_round_trip() {
        let s = ebi_reference_strategy();
        let back = strategy_from_json(&strategy_to_json(&s)).unwrap();
        assert_eq!(back.alice.len(), 3);
        assert_eq!(back.bob.len(), 4);
        assert!(strategy_from_json(r#"{"alice": [[1,1,0]], "bob": [[0,0,1]]}"#).is_err());
    }

    #[test]
    fn behavior_csv_shape() {
        let b = behavior_from(&singlet(), &ebi_reference_strategy());
        let mut out = Vec::new();
        write_behavior_csv(&mut out, &b).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text.lines().count(), 49);
        assert!(text.starts_with("x,y,a,b,p\n1,1,0,0,"));
    }

    #[test]
    fn sdp_round_trip() {
        let p = gram_problem();
        let back = sdp_from_json(&sdp_to_json(&p)).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn curve_round_trip() {
        let p = RandomnessPoint {
            param: 0.5,
            bell_value: 6.5,
            guessing_probability: 0.41234567891234,
            min_entropy: 1.2,
        };
        let text = format!("{CURVE_HEADER}\n{}\n# truncated: x\n", curve_row(&p));
        let back = read_curve_csv(&text).unwrap();
        assert_eq!(back.len(), 1);
        assert_eq!(back[0].guessing_probability, 0.412345678912);
    }
}
