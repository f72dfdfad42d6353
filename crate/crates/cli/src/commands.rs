//! Subcommand bodies. Each returns the primary output as text plus any
//! summary lines for stderr; nothing here touches the process state.

use std::str::FromStr;

use eventum_core::atom::{analytic_rho, integrate_master_at};
use eventum_core::belavkin::belavkin_report;
use eventum_core::chainspace::{
    expectation_closed_form, expectation_mc, expectation_quadrature, McSettings, Observable,
    ObservationClass,
};
use eventum_core::filtering::{
    conditional_counts, conditional_expectation, named_observable, observation_probabilities,
    sample_observation, sde_replay, ObservationRecord, OBSERVABLE_NAMES,
};
use eventum_core::parallel::{map_streams, stream_quota, stream_rng, Execution, DEFAULT_STREAMS};
use eventum_core::qmat::{c, ComplexMatrix};
use serde::Serialize;

use crate::config::Experiment;
use crate::error::CliError;

/// Deviation above which `decay` reports a failure.
pub const DECAY_TOLERANCE: f64 = 1e-6;
/// Monte Carlo rows further than this many standard errors from the closed
/// form are flagged.
pub const MC_FLAG_SIGMAS: f64 = 4.0;
/// Replay agreement required by `trajectories`.
pub const REPLAY_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct CommandOutput {
    /// CSV or JSON-lines body.
    pub body: String,
    /// Human-readable lines for stderr.
    pub summary: Vec<String>,
    /// False when a check failed.
    pub passed: bool,
}

/// 17 significant digits, round-trip exact.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn row(out: &mut String, fields: &[String]) {
    out.push_str(&fields.join(","));
    out.push('\n');
}

/// `t, analytic rho, RK4 rho, max deviation` per grid time.
pub fn decay(exp: &Experiment) -> Result<CommandOutput, CliError> {
    let p = &exp.params;
    let rho0 = p.psi().projector();
    let integrated = integrate_master_at(p, &rho0, &exp.t_grid, exp.dt)?;
    let mut body = String::new();
    body.push_str(
        "t,analytic_gg,analytic_ge_re,analytic_ge_im,analytic_ee,\
         rk4_gg,rk4_ge_re,rk4_ge_im,rk4_ee,max_deviation\n",
    );
    let mut worst: f64 = 0.0;
    for (&t, rk4) in exp.t_grid.iter().zip(&integrated) {
        let exact = analytic_rho(p, t)?;
        let dev = exact.max_abs_diff(rk4)?;
        worst = worst.max(dev);
        let entries = |m: &ComplexMatrix| {
            [
                num(m.get(0, 0).re),
                num(m.get(0, 1).re),
                num(m.get(0, 1).im),
                num(m.get(1, 1).re),
            ]
        };
        let mut fields = vec![num(t)];
        fields.extend(entries(&exact));
        fields.extend(entries(rk4));
        fields.push(num(dev));
        row(&mut body, &fields);
    }
    let passed = worst <= DECAY_TOLERANCE;
    Ok(CommandOutput {
        body,
        summary: vec![format!(
            "decay: max deviation {worst:.3e} ({})",
            if passed { "ok" } else { "exceeds 1e-6" }
        )],
        passed,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Engine {
    Analytic,
    Quadrature,
    Mc,
}

/// Parses one of the counting observables, listing the valid names on error.
pub fn parse_observable(name: &str) -> Result<Observable, CliError> {
    if !Observable::NAMES.contains(&name) {
        return Err(CliError::usage(format!(
            "unknown observable `{name}`; expected one of {}",
            Observable::NAMES.join(", ")
        )));
    }
    Observable::from_str(name).map_err(CliError::from)
}

/// Expectation of `obs` at every grid time with the chosen engine.
pub fn expect(
    exp: &Experiment,
    obs: &Observable,
    engine: Engine,
) -> Result<CommandOutput, CliError> {
    let p = &exp.params;
    let mut body = String::new();
    let mut flagged = 0usize;
    match engine {
        Engine::Analytic => {
            body.push_str("t,value\n");
            for &t in &exp.t_grid {
                row(
                    &mut body,
                    &[num(t), num(expectation_closed_form(obs, p, t)?)],
                );
            }
        }
        Engine::Quadrature => {
            body.push_str("t,value,tail_mass\n");
            for &t in &exp.t_grid {
                let q = expectation_quadrature(obs, p, t, exp.n_max)?;
                row(&mut body, &[num(t), num(q.value), num(q.tail_mass)]);
            }
        }
        Engine::Mc => {
            body.push_str("t,value,std_err,analytic,flagged\n");
            let settings = McSettings::new(exp.samples, exp.seed);
            for &t in &exp.t_grid {
                let est = expectation_mc(obs, p, t, &settings)?;
                let exact = expectation_closed_form(obs, p, t)?;
                let flag = (est.mean - exact).abs() > MC_FLAG_SIGMAS * est.std_err;
                flagged += usize::from(flag);
                row(
                    &mut body,
                    &[
                        num(t),
                        num(est.mean),
                        num(est.std_err),
                        num(exact),
                        u8::from(flag).to_string(),
                    ],
                );
            }
        }
    }
    let summary = match engine {
        Engine::Mc => vec![format!(
            "expect {}: {flagged} of {} times beyond {MC_FLAG_SIGMAS} standard errors",
            obs.name(),
            exp.t_grid.len()
        )],
        _ => Vec::new(),
    };
    Ok(CommandOutput {
        body,
        summary,
        passed: flagged == 0,
    })
}

/// Resolves `--x`: one name, or eight reals (four real parts then four
/// imaginary parts, row-major).
pub fn parse_x_spec(values: &[String]) -> Result<ComplexMatrix, CliError> {
    let x = match values {
        [name] => named_observable(name).ok_or_else(|| {
            CliError::usage(format!(
                "unknown observable `{name}`; expected one of {} or 8 numbers",
                OBSERVABLE_NAMES.join(", ")
            ))
        })?,
        _ if values.len() == 8 => {
            let nums: Vec<f64> = values
                .iter()
                .map(|v| {
                    v.parse::<f64>()
                        .map_err(|_| CliError::usage(format!("`{v}` is not a number")))
                })
                .collect::<Result<_, _>>()?;
            ComplexMatrix::new(2, 2, (0..4).map(|i| c(nums[i], nums[i + 4])).collect())?
        }
        _ => {
            return Err(CliError::usage(format!(
                "--x takes a name or 8 numbers, got {} values",
                values.len()
            )))
        }
    };
    x.require_hermitian(1e-12)
        .map_err(|e| CliError::usage(format!("--x: {e}")))?;
    Ok(x)
}

#[derive(Serialize)]
struct RecordLine<'a> {
    times: &'a [f64],
    outcomes: &'a [u8],
    class: &'static str,
    eps_series: &'a [f64],
    counts: [usize; 2],
}

/// `samples` records over the window `[0, r)` with their filter replay.
pub fn trajectories(exp: &Experiment, x: &ComplexMatrix) -> Result<CommandOutput, CliError> {
    let p = &exp.params;
    let horizon = p.r();
    let per_stream = map_streams(DEFAULT_STREAMS, Execution::Parallel, |s| {
        let mut rng = stream_rng(exp.seed, s);
        (0..stream_quota(exp.samples, DEFAULT_STREAMS, s))
            .map(|_| sample_observation(p, horizon, &mut rng))
            .collect::<Result<Vec<ObservationRecord>, _>>()
    });

    let mut body = String::new();
    let mut counts = [0usize; 3];
    let mut worst_replay: f64 = 0.0;
    let mut n1_ok = true;
    for records in per_stream {
        for record in records? {
            let series = sde_replay(x, p, &record)?;
            let direct = conditional_expectation(x, p, &record)?;
            worst_replay = worst_replay.max((series.final_value() - direct).abs());
            let (n0, n1) = conditional_counts(&record);
            n1_ok &= n1 <= 1;
            let class = record.class();
            counts[class_index(class)] += 1;
            let line = RecordLine {
                times: record.times(),
                outcomes: record.outcomes(),
                class: class.name(),
                eps_series: &series.values,
                counts: [n0, n1],
            };
            body.push_str(&serde_json::to_string(&line).expect("plain data serializes"));
            body.push('\n');
        }
    }

    let probs = observation_probabilities(p, horizon)?;
    let n = exp.samples as f64;
    let mut summary = vec!["class,count,frequency,expected,sigma,within_3_sigma".to_string()];
    for class in ObservationClass::ALL {
        let k = counts[class_index(class)];
        let q = probs.get(class);
        let freq = k as f64 / n;
        let sigma = (q * (1.0 - q) / n).sqrt();
        let within = (freq - q).abs() <= 3.0 * sigma;
        summary.push(format!(
            "{class},{k},{},{},{},{within}",
            num(freq),
            num(q),
            num(sigma)
        ));
    }
    let passed = worst_replay <= REPLAY_TOLERANCE && n1_ok;
    summary.push(format!(
        "replay: max |final - conditional| = {worst_replay:.3e}"
    ));
    Ok(CommandOutput {
        body,
        summary,
        passed,
    })
}

fn class_index(class: ObservationClass) -> usize {
    ObservationClass::ALL
        .iter()
        .position(|&c| c == class)
        .expect("listed class")
}

/// Pseudo-Hilbert identities at every grid time. `perturbation` offsets one
/// entry of `S` as a negative control.
pub fn belavkin_check(
    exp: &Experiment,
    perturbation: Option<f64>,
) -> Result<CommandOutput, CliError> {
    let mut body = String::from("t,check,deviation,status\n");
    let mut passed = true;
    let mut failures = 0usize;
    for &t in &exp.t_grid {
        let report = belavkin_report(&exp.params, t, perturbation)?;
        for check in &report.checks {
            passed &= check.passed;
            failures += usize::from(!check.passed);
            let status = if check.passed { "pass" } else { "fail" };
            row(
                &mut body,
                &[
                    num(t),
                    check.name.to_string(),
                    num(check.deviation),
                    status.into(),
                ],
            );
        }
    }
    Ok(CommandOutput {
        body,
        summary: vec![format!("belavkin-check: {failures} failing checks")],
        passed,
    })
}
