use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use evoquant_core::entropy::{shannon_of, spectral_entropy};
use evoquant_core::game::{enumerate_symmetric_nash_with, EnumerationOptions};
use evoquant_core::lax::{integrate_lax_with, DRIFT_LIMIT};
use evoquant_core::quantum::integrate_von_neumann_with;
use evoquant_core::replicator::integrate_with;
use evoquant_core::thermal::{run, EnsembleState};
use evoquant_core::{quantize, HamiltonianMode, PayoffMatrix};
use serde_json::{json, Value};

use crate::config::{parse_list, RunConfig};
use crate::error::{CliError, CliResult};
use crate::table::{format_value, read_table, write_rows, Table, TableKind};
use crate::{load_game, Cli, Command, Form, RunArgs};

pub fn dispatch(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<()> {
    match &cli.command {
        Command::Simulate(args) => {
            let config = run_config(&args.run, args.form, args.out.clone(), cli.seed)?;
            let game = load_game(&config.game)?;
            let table = simulate(&game, &config)?;
            emit(config.out.as_deref(), out, |w| table.write(w))
        }
        Command::Equilibria(args) => {
            let game = load_game(&args.game)?;
            let value = equilibria(&game, args.tol, args.mutants, cli.seed)?;
            emit(None, out, |w| writeln!(w, "{}", serde_json::to_string_pretty(&value).expect("plain JSON")))
        }
        Command::Compare(args) => {
            let config = run_config(&args.run, Form::Vector, None, cli.seed)?;
            let game = load_game(&config.game)?;
            let value = compare(&game, &config)?;
            emit(None, out, |w| writeln!(w, "{}", serde_json::to_string_pretty(&value).expect("plain JSON")))
        }
        Command::Entropy(args) => {
            let table = read_table(&args.traj)?;
            let (header, rows) = entropy_columns(&table)?;
            emit(args.out.as_deref(), out, |w| write_rows(w, &header, rows))
        }
        Command::Thermalize(args) => {
            let temps = parse_list("--temps", &args.temps)?;
            let weights = match &args.weights {
                Some(w) => parse_list("--weights", w)?,
                None => vec![1.0; temps.len()],
            };
            let state = EnsembleState::new(temps, weights)
                .map_err(|source| CliError::Input { field: "--temps/--weights", source })?;
            let _ =
                writeln!(err, "note: the coarsening model is a qualitative illustration with no empirical calibration");
            let mut buf = Vec::new();
            let (converged, steps) = thermalize(&state, args.kappa, args.eps, args.max_steps, &mut buf)?;
            if !converged {
                let _ = writeln!(err, "note: more than one cluster remains after {steps} steps");
            }
            emit(args.out.as_deref(), out, |w| w.write_all(&buf))
        }
    }
}

fn run_config(args: &RunArgs, form: Form, out: Option<std::path::PathBuf>, seed: u64) -> CliResult<RunConfig> {
    let x0 = parse_list("--x0", &args.x0)?;
    RunConfig::new(args.game.clone(), &x0, args.t_end, args.dt, form, args.hbar, out, args.stride, seed)
}

/// Writes to `path` when given, otherwise to `out`.
fn emit(
    path: Option<&Path>,
    out: &mut dyn Write,
    body: impl FnOnce(&mut dyn Write) -> std::io::Result<()>,
) -> CliResult<()> {
    match path {
        Some(path) => {
            let wrap = |source| CliError::Write { path: path.into(), source };
            let mut w = BufWriter::new(File::create(path).map_err(wrap)?);
            body(&mut w).map_err(wrap)?;
            w.flush().map_err(wrap)
        }
        None => body(out).map_err(|source| CliError::Write { path: "<stdout>".into(), source }),
    }
}

fn check_start(game: &PayoffMatrix, config: &RunConfig) -> CliResult<()> {
    if game.n() != config.x0.len() {
        return Err(CliError::Input {
            field: "--x0",
            source: evoquant_core::Error::DimensionMismatch { expected: game.n(), found: config.x0.len() },
        });
    }
    Ok(())
}

/// Integrates the configured form.
pub fn simulate(game: &PayoffMatrix, config: &RunConfig) -> CliResult<Table> {
    check_start(game, config)?;
    let settings = config.settings()?;
    Ok(match config.form {
        Form::Vector => Table::from_vector(&integrate_with(game, &config.x0, &settings)?),
        Form::Lax => Table::from_matrix(&integrate_lax_with(game, &config.x0, &settings)?),
        Form::Quantum => {
            let rho0 = quantize(&config.x0)?.with_hbar(config.hbar)?;
            Table::from_operator(&integrate_von_neumann_with(game, &rho0, &settings, &HamiltonianMode::SelfConsistent)?)
        }
    })
}

pub fn equilibria(game: &PayoffMatrix, tol: f64, mutants: usize, seed: u64) -> CliResult<Value> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(CliError::field("--tol", format!("must be positive and finite, got {tol}")));
    }
    let options = EnumerationOptions { tol, mutant_samples: mutants, seed, ..Default::default() };
    let reports = enumerate_symmetric_nash_with(game, &options)?;
    Ok(Value::Array(
        reports
            .iter()
            .map(|r| {
                let mut v = json!({
                    "strategy": r.strategy.weights(),
                    "support": r.support,
                    "is_strict": r.is_strict,
                    "is_ess": r.is_ess,
                    "residual": r.residual,
                    "ess_mutant_samples": mutants,
                    "ess_seed": seed,
                });
                if let Some(labels) = game.labels() {
                    v["support_labels"] = json!(r.support.iter().map(|&i| &labels[i]).collect::<Vec<_>>());
                }
                v
            })
            .collect(),
    ))
}

/// Runs the three forms side by side and reports the largest pairwise
/// divergence of their diagonals together with each form's drift maxima.
pub fn compare(game: &PayoffMatrix, config: &RunConfig) -> CliResult<Value> {
    check_start(game, config)?;
    let settings = config.settings()?;
    let rho0 = quantize(&config.x0)?.with_hbar(config.hbar)?;
    // The three integrations are independent; results are joined in a fixed order.
    let (vector, lax, quantum) = std::thread::scope(|s| {
        let v = s.spawn(|| integrate_with(game, &config.x0, &settings));
        let l = s.spawn(|| integrate_lax_with(game, &config.x0, &settings));
        let q = integrate_von_neumann_with(game, &rho0, &settings, &HamiltonianMode::SelfConsistent);
        (v.join().expect("vector run panicked"), l.join().expect("lax run panicked"), q)
    });
    let (vector, lax, quantum) = (vector?, lax?, quantum?);
    let vl = vector.linf_distance(&lax.diagonal)?;
    let vq = vector.linf_distance(&quantum.diagonal)?;
    let lq = lax.diagonal.linf_distance(&quantum.diagonal)?;
    Ok(json!({
        "max_divergence": vl.max(vq).max(lq),
        "divergence": { "vector_lax": vl, "vector_quantum": vq, "lax_quantum": lq },
        "records": vector.times.len(),
        "vector": {
            "max_correction": vector.diagnostics.max_correction,
            "min_component": vector.diagnostics.min_component,
            "max_sum_defect": vector.diagnostics.max_sum_defect,
        },
        "lax": {
            "max_trace_defect": lax.diagnostics.max_trace_defect,
            "max_symmetry_defect": lax.diagnostics.max_symmetry_defect,
            "max_projector_defect": lax.diagnostics.max_projector_defect,
        },
        "quantum": {
            "max_hermiticity_defect": quantum.diagnostics.max_hermiticity_defect,
            "max_trace_defect": quantum.diagnostics.max_trace_defect,
            "max_purity_drift": quantum.diagnostics.max_purity_drift,
            "max_imag_diagonal": quantum.diagnostics.max_imag_diagonal,
        },
    }))
}

/// `(t, values)` for one CSV line.
pub type Row = (f64, Vec<f64>);

/// The trajectory's own columns followed by `shannon` and, for operator
/// tables, `von_neumann`.
pub fn entropy_columns(table: &Table) -> CliResult<(Vec<String>, Vec<Row>)> {
    let mut header = table.header();
    header.push("shannon".into());
    if table.kind == TableKind::Operator {
        header.push("von_neumann".into());
    }
    let mut rows = Vec::with_capacity(table.rows.len());
    for (k, (&t, row)) in table.times.iter().zip(&table.rows).enumerate() {
        let mut values = row.clone();
        values.push(shannon_of(&table.populations(k)));
        if let Some(rho) = table.operator(k) {
            values.push(spectral_entropy(&rho, DRIFT_LIMIT)?);
        }
        rows.push((t, values));
    }
    Ok((header, rows))
}

/// Runs the model and writes one CSV row per step:
/// `step,cluster_count,t_min,t_max,t_mean`. Returns whether a single cluster
/// remained and the last step taken.
pub fn thermalize(
    state: &EnsembleState,
    kappa: f64,
    eps: f64,
    max_steps: usize,
    out: &mut dyn Write,
) -> CliResult<(bool, usize)> {
    let result = run(state, kappa, eps, max_steps)?;
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| CliError::Write { path: "<thermal csv>".into(), source: e.into() };
    w.write_record(["step", "cluster_count", "t_min", "t_max", "t_mean"]).map_err(io)?;
    for r in &result.records {
        let s = &r.state;
        w.write_record([
            r.step.to_string(),
            s.cluster_count().to_string(),
            format_value(s.min_temperature()),
            format_value(s.max_temperature()),
            format_value(s.mean_temperature()),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|source| CliError::Write { path: "<thermal csv>".into(), source })?;
    Ok((result.converged(), result.last().step))
}
