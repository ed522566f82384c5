use std::fs::File;
use std::io::{BufWriter, Write};

use bellbound_core::bell::{
    behavior_from, classical_bound, expectation, optimal_measurements, seesaw_max_violation,
    tight_bound, tightness_check, BellExpression,
};
use bellbound_core::npa::{MomentRelaxation, RandomnessPoint};
use bellbound_core::sdp::{dual_certificate_check, gram_problem, solve, solve_with, SdpStatus};
use bellbound_core::states::correlation_data;
use serde_json::{json, Value};

use crate::config::{CommandName, RunConfig};
use crate::error::CliError;
use crate::io::{
    curve_row, sdp_from_json, sig12, strategy_to_json, write_behavior_csv, CURVE_HEADER,
};
use crate::sweep::{crossover, pool, Evaluator};

/// Gram demo results must match the analytic optimum this closely.
const GRAM_TOL: f64 = 1e-6;

/// Runs one configured command, writing reports to `out`.
pub fn execute(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    match cfg.command()? {
        CommandName::Bound => bound(cfg, out),
        CommandName::Measure => measure(cfg, out),
        CommandName::Classical => classical(cfg, out),
        CommandName::Tsirelson => tsirelson(cfg, out),
        CommandName::Randomness => randomness(cfg, out),
        CommandName::GramDemo => gram_demo(cfg, out),
        CommandName::Solve => solve_file(cfg, out),
    }
}

fn emit_json(out: &mut dyn Write, v: &Value) -> Result<(), CliError> {
    writeln!(
        out,
        "{}",
        serde_json::to_string_pretty(v).expect("json values serialize")
    )?;
    Ok(())
}

fn local_bound(expr: &BellExpression) -> Result<f64, CliError> {
    Ok(match expr.classical_bound_value() {
        Some(c) => c,
        None => classical_bound(expr)?,
    })
}

fn bound(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let state = cfg.state()?;
    let sv = correlation_data(&state).singular_values();
    let tb = tight_bound(&state);
    let seesaw = seesaw_max_violation(
        &state,
        &bellbound_core::bell::ebi(),
        cfg.seesaw_restarts(),
        cfg.seed(),
    )
    .value;
    let classical = local_bound(&bellbound_core::bell::ebi())?;
    if cfg.json {
        return emit_json(
            out,
            &json!({
                "tight_bound": sig12(tb),
                "singular_values": sv.map(sig12),
                "seesaw_value": sig12(seesaw),
                "classical_bound": classical,
                "violation": tb > classical,
            }),
        );
    }
    writeln!(out, "tight bound      {tb:.6}")?;
    writeln!(
        out,
        "singular values  {:.6} {:.6} {:.6}",
        sv[0], sv[1], sv[2]
    )?;
    writeln!(out, "see-saw value    {seesaw:.6}")?;
    writeln!(out, "classical bound  {classical:.6}")?;
    writeln!(
        out,
        "violation        {}",
        if tb > classical { "yes" } else { "no" }
    )?;
    Ok(())
}

fn measure(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let state = cfg.state()?;
    let strategy = optimal_measurements(&state)?;
    let value = expectation(&state, &bellbound_core::bell::ebi(), &strategy)?;
    let rep = tightness_check(&state, &strategy)?;
    if let Some(path) = &cfg.out {
        std::fs::write(path, strategy_to_json(&strategy) + "\n")?;
    }
    if let Some(path) = &cfg.behavior {
        let mut w = BufWriter::new(File::create(path)?);
        write_behavior_csv(&mut w, &behavior_from(&state, &strategy))?;
        w.flush()?;
    }
    if cfg.json {
        let strategy: Value =
            serde_json::from_str(&strategy_to_json(&strategy)).expect("own output");
        return emit_json(
            out,
            &json!({
                "strategy": strategy,
                "value": sig12(value),
                "tightness": {
                    "proportionality_ok": rep.proportionality_ok,
                    "gram_sum": sig12(rep.gram_sum),
                    "gram_sum_ok": rep.gram_sum_ok,
                    "alice_aligned": rep.alice_aligned,
                    "bound_gap": sig12(rep.bound_gap),
                    "all_ok": rep.all_ok(),
                },
            }),
        );
    }
    let dir = |v: &[f64; 3]| format!("({:.6}, {:.6}, {:.6})", v[0], v[1], v[2]);
    for (k, a) in strategy.alice.iter().enumerate() {
        writeln!(out, "A{}  {}", k + 1, dir(a))?;
    }
    for (l, b) in strategy.bob.iter().enumerate() {
        writeln!(out, "B{}  {}", l + 1, dir(b))?;
    }
    writeln!(out, "value              {value:.6}")?;
    writeln!(out, "gram sum           {:.6}", rep.gram_sum)?;
    writeln!(out, "proportionality    {}", rep.proportionality_ok)?;
    writeln!(out, "gram condition     {}", rep.gram_sum_ok)?;
    writeln!(out, "alice aligned      {}", rep.alice_aligned)?;
    writeln!(out, "tight              {}", rep.all_ok())?;
    Ok(())
}

fn classical(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let expr = cfg.expression()?;
    let value = classical_bound(&expr)?;
    if cfg.json {
        return emit_json(
            out,
            &json!({ "expression": expr.name(), "classical_bound": value }),
        );
    }
    writeln!(out, "{value:.6}")?;
    Ok(())
}

fn tsirelson(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let expr = cfg.expression()?;
    let level = cfg.level()?;
    let relax = MomentRelaxation::with_settings(&expr, level, cfg.solver_settings()?)?;
    if cfg.json {
        return emit_json(
            out,
            &json!({
                "expression": expr.name(),
                "level": level.to_string(),
                "bound": sig12(relax.max_value()),
            }),
        );
    }
    writeln!(out, "{:.6}", relax.max_value())?;
    Ok(())
}

fn randomness(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let family = cfg.family()?;
    let expr = cfg.expression()?;
    let compare = cfg.comparison()?;
    let level = cfg.level()?;
    let pair = cfg.pair()?;
    let relation = cfg.relation()?;
    let settings = cfg.solver_settings()?;
    let grid = cfg.grid_points(family)?;
    let pool = pool(cfg.threads()?)?;

    // Rows up to the first failure, then a trailer naming it. A relaxation
    // that cannot be built leaves just the header and the trailer.
    let mut points: Vec<RandomnessPoint> = Vec::new();
    let mut failure = None;
    let relax = MomentRelaxation::with_settings(&expr, level, settings);
    if let Ok(relax) = &relax {
        let eval = Evaluator {
            relaxation: relax,
            family,
            pair,
            relation,
            seed: cfg.seed(),
            restarts: cfg.seesaw_restarts(),
        };
        for r in eval.curve(&grid, &pool) {
            match r {
                Ok(p) => points.push(p),
                Err(e) => {
                    failure = Some(CliError::from(e));
                    break;
                }
            }
        }
    }
    let relax = match relax {
        Ok(r) => Some(r),
        Err(e) => {
            failure = Some(CliError::from(e));
            None
        }
    };
    let mut csv = format!("{CURVE_HEADER}\n");
    for p in &points {
        csv.push_str(&curve_row(p));
        csv.push('\n');
    }
    if let Some(e) = &failure {
        csv.push_str(&format!("# truncated: {e}\n"));
    }
    match &cfg.out {
        Some(path) => std::fs::write(path, &csv)?,
        None if !cfg.json => out.write_all(csv.as_bytes())?,
        None => {}
    }
    if let Some(e) = failure {
        return Err(e);
    }
    let relax = relax.expect("no failure means the relaxation was built");
    let eval = Evaluator {
        relaxation: &relax,
        family,
        pair,
        relation,
        seed: cfg.seed(),
        restarts: cfg.seesaw_restarts(),
    };

    let best = points
        .iter()
        .copied()
        .max_by(|a, b| a.min_entropy.total_cmp(&b.min_entropy))
        .expect("grids have at least two points");

    let mut crossing = None;
    if let Some(other) = &compare {
        let other_relax = MomentRelaxation::with_settings(other, level, settings)?;
        let other_eval = Evaluator {
            relaxation: &other_relax,
            ..eval
        };
        let other_points = other_eval
            .curve(&grid, &pool)
            .into_iter()
            .collect::<Result<Vec<_>, _>>()?;
        let x = crossover(&eval, &other_eval, &points, &other_points)?;
        crossing = Some((other.name().to_string(), x));
    }

    // The summary goes to stdout unless the CSV already occupies it.
    let summary: &mut dyn Write = if cfg.out.is_some() || cfg.json {
        out
    } else {
        &mut std::io::stderr()
    };
    if cfg.json {
        let rows: Vec<Value> = points
            .iter()
            .map(|p| {
                json!({
                    "param": sig12(p.param),
                    "bell_value": sig12(p.bell_value),
                    "guessing_probability": sig12(p.guessing_probability),
                    "min_entropy_bits": sig12(p.min_entropy),
                })
            })
            .collect();
        let mut v = json!({
            "family": family.name(),
            "expression": expr.name(),
            "level": level.to_string(),
            "points": rows,
            "max_min_entropy_bits": sig12(best.min_entropy),
            "max_at": sig12(best.param),
        });
        if let Some((name, x)) = &crossing {
            v["compare"] = json!({ "expression": name, "crossover": x.map(sig12) });
        }
        return emit_json(summary, &v);
    }
    writeln!(
        summary,
        "max min-entropy {:.6} bits at {} = {:.6}",
        best.min_entropy,
        family.name(),
        best.param
    )?;
    if let Some((name, x)) = crossing {
        match x {
            Some(x) => writeln!(
                summary,
                "{} exceeds {name} for {} > {x:.6}",
                expr.name(),
                family.name()
            )?,
            None => writeln!(
                summary,
                "{} never overtakes {name} on this grid",
                expr.name()
            )?,
        }
    }
    Ok(())
}

fn gram_demo(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let sol = solve(&gram_problem());
    if sol.status != SdpStatus::Optimal {
        return Err(CliError::Numerical(format!(
            "gram SDP stopped with {:?}",
            sol.status
        )));
    }
    let v: [f64; 4] = sol.y[..].try_into().expect("four constraints");
    let cert = dual_certificate_check(&v);
    let ok = (sol.primal_obj + 2.0).abs() <= GRAM_TOL && (sol.dual_obj + 2.0).abs() <= GRAM_TOL;
    if cfg.json {
        emit_json(
            out,
            &json!({
                "primal": sig12(sol.primal_obj),
                "dual": sig12(sol.dual_obj),
                "dual_vector": v.map(sig12),
                "certificate_min_eigenvalue": sig12(cert.min_eigenvalue),
                "certificate_feasible": cert.feasible,
            }),
        )?;
    } else {
        writeln!(out, "primal   {:.6}", sol.primal_obj)?;
        writeln!(out, "dual     {:.6}", sol.dual_obj)?;
        writeln!(
            out,
            "dual y   {:.6} {:.6} {:.6} {:.6}",
            v[0], v[1], v[2], v[3]
        )?;
        writeln!(
            out,
            "certificate min eigenvalue {:.6e}",
            cert.min_eigenvalue
        )?;
    }
    if !ok || !cert.feasible {
        return Err(CliError::Numerical(format!(
            "gram SDP optimum {} / {} is not -2",
            sol.primal_obj, sol.dual_obj
        )));
    }
    Ok(())
}

fn solve_file(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let path = cfg
        .problem
        .as_ref()
        .ok_or_else(|| CliError::Config("--problem is required".into()))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let problem =
        sdp_from_json(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let sol = solve_with(&problem, &cfg.solver_settings()?);
    if cfg.json {
        let x: Vec<Vec<f64>> = (0..sol.x.rows())
            .map(|i| sol.x.row(i).iter().map(|v| sig12(*v)).collect())
            .collect();
        emit_json(
            out,
            &json!({
                "status": format!("{:?}", sol.status),
                "primal": sig12(sol.primal_obj),
                "dual": sig12(sol.dual_obj),
                "iterations": sol.iterations,
                "y": sol.y.iter().map(|v| sig12(*v)).collect::<Vec<_>>(),
                "X": x,
            }),
        )?;
    } else {
        writeln!(out, "status      {:?}", sol.status)?;
        writeln!(out, "primal      {:.6}", sol.primal_obj)?;
        writeln!(out, "dual        {:.6}", sol.dual_obj)?;
        writeln!(out, "iterations  {}", sol.iterations)?;
    }
    if sol.status != SdpStatus::Optimal {
        return Err(CliError::Numerical(format!(
            "solver stopped with {:?} (merit {:e})",
            sol.status,
            sol.accuracy.merit()
        )));
    }
    Ok(())
}
