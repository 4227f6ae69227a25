use std::fs;
use std::path::Path;

use serde_json::{json, Value};
use timearrow::catalog::{self, ProcessModel};
use timearrow::covariance::{autocov, autocov_default, default_truncation};
use timearrow::cyclicity::{self, classify, multi_rule};
use timearrow::estimation::extended::{default_precision, extended_sweep};
use timearrow::estimation::{self, default_solver, is_backward_deterministic_with, predict, Solver};
use timearrow::linalg::{frobenius, min_eigenvalue, trace_re};
use timearrow::simulate::{self, default_sim_truncation};
use timearrow::spectral;
use timearrow::symbols::CoefficientWindow;
use timearrow::{CMatrix, Complex64, Direction, PredictionSolution, Symbol};

use crate::args::{CatalogAction, Cli, Command, Format, ModelArgs, Precision};
use crate::output::{emit, matrix_json, CliError, CliResult, Meta};

/// PSD slack relative to the trace used for every emitted covariance.
const PSD_SLACK: f64 = 1e-8;

fn read_source(source: &str) -> CliResult<Option<String>> {
    let path = Path::new(source);
    if path.is_file() {
        return Ok(Some(fs::read_to_string(path)?));
    }
    if source.ends_with(".json") {
        return Err(CliError::Config(format!("file `{source}` not found")));
    }
    Ok(None)
}

pub fn load_model(args: &ModelArgs) -> CliResult<ProcessModel> {
    match read_source(&args.model)? {
        Some(text) => Ok(ProcessModel::from_json(&text)?),
        None => Ok(catalog::named(&args.model, args.alpha)?),
    }
}

pub fn load_symbol(source: &str) -> CliResult<Symbol> {
    if source == "harmonic" {
        return Ok(Symbol::Harmonic);
    }
    let text = read_source(source)?.unwrap_or_else(|| source.to_string());
    Ok(Symbol::from_json(&text)?)
}

/// `a..b` (exclusive), `a..=b` or a comma list; strictly increasing.
pub fn parse_windows(spec: &str) -> CliResult<Vec<usize>> {
    let bad = || CliError::Config(format!("cannot parse window list `{spec}`"));
    let num = |s: &str| s.trim().parse::<usize>().map_err(|_| bad());
    let windows: Vec<usize> = if let Some((a, b)) = spec.split_once("..=") {
        (num(a)?..=num(b)?).collect()
    } else if let Some((a, b)) = spec.split_once("..") {
        (num(a)?..num(b)?).collect()
    } else {
        spec.split(',').map(num).collect::<CliResult<_>>()?
    };
    if windows.is_empty() || windows[0] == 0 || windows.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CliError::Config(format!(
            "window list `{spec}` must be nonempty, positive and increasing"
        )));
    }
    Ok(windows)
}

fn check_psd(m: &CMatrix, what: &str) -> CliResult<()> {
    let lmin = min_eigenvalue(m);
    let scale = trace_re(m).abs().max(f64::MIN_POSITIVE);
    if lmin < -PSD_SLACK * scale {
        return Err(CliError::Numeric(format!(
            "{what} is not positive semidefinite (min eigenvalue {lmin:e})"
        )));
    }
    Ok(())
}

fn model_meta(meta: Meta, model: &ProcessModel) -> Meta {
    meta.set("model", json!({ "name": model.name, "n": model.n() }))
}

fn direction_name(d: Direction) -> &'static str {
    match d {
        Direction::Forward => "fwd",
        Direction::Backward => "bwd",
    }
}

fn solution_json(s: &PredictionSolution) -> Value {
    json!({
        "direction": direction_name(s.direction),
        "window": s.window,
        "error_covariance": matrix_json(&s.error_covariance),
        "trace": s.trace(),
        "det": s.det(),
        "rank_used": s.rank_used,
        "rank_tolerance": s.rank_tolerance,
        "coefficients": s.coefficients.iter().map(matrix_json).collect::<Vec<_>>(),
    })
}

fn sweep_csv_header(n: usize, complex: bool) -> String {
    let mut h = String::from("window,direction,trace,det");
    for i in 0..n {
        for j in 0..n {
            h.push_str(&format!(",omega_{i}_{j}"));
        }
    }
    if complex {
        for i in 0..n {
            for j in 0..n {
                h.push_str(&format!(",omega_{i}_{j}_im"));
            }
        }
    }
    h.push('\n');
    h
}

fn sweep_csv_row(p: usize, d: Direction, om: &CMatrix, complex: bool) -> String {
    let mut row = format!("{p},{},{:e},{:e}", direction_name(d), trace_re(om), om.determinant().re);
    for v in om.transpose().iter() {
        row.push_str(&format!(",{:e}", v.re));
    }
    if complex {
        for v in om.transpose().iter() {
            row.push_str(&format!(",{:e}", v.im));
        }
    }
    row.push('\n');
    row
}

pub fn run(cli: Cli) -> CliResult<()> {
    let out = cli.out.as_deref();
    let format = cli.format;
    match cli.command {
        Command::Catalog { action } => match action {
            CatalogAction::List => {
                let entries: Vec<Value> = catalog::NAMES
                    .iter()
                    .zip(catalog::DESCRIPTIONS)
                    .map(|(n, d)| json!({ "name": n, "description": d }))
                    .collect();
                let mut csv = String::from("name,description\n");
                for (n, d) in catalog::NAMES.iter().zip(catalog::DESCRIPTIONS) {
                    csv.push_str(&format!("{n},\"{d}\"\n"));
                }
                emit(out, format, &Meta::new("catalog list"), Value::Array(entries), Some(csv))
            }
            CatalogAction::Show { name, alpha } => {
                let model = catalog::named(&name, alpha)?;
                let record: Value = serde_json::from_str(&model.to_json()).expect("model json");
                emit(out, format, &model_meta(Meta::new("catalog show"), &model), record, None)
            }
        },
        Command::Autocov { model, lags, truncation } => {
            let model = load_model(&model)?;
            let l = truncation.unwrap_or_else(|| default_truncation(&model, lags));
            let g = autocov(&model, lags, l)?;
            let meta = model_meta(Meta::new("autocov"), &model)
                .set("truncation", l)
                .tolerance("truncation_error", g.truncation_error);
            let result = json!({
                "max_lag": lags,
                "truncation_error": g.truncation_error,
                "lags": g.lags().iter().map(matrix_json).collect::<Vec<_>>(),
            });
            emit(out, format, &meta, result, Some(g.to_csv()))
        }
        Command::Predict { model, window, direction, rank_tol } => {
            let model = load_model(&model)?;
            let g = autocov_default(&model, window)?;
            let s = predict(&g, window, direction.into(), rank_tol)?;
            check_psd(&s.error_covariance, "error covariance")?;
            let meta = model_meta(Meta::new("predict"), &model)
                .tolerance("rank_tol", rank_tol)
                .tolerance("psd_slack", PSD_SLACK)
                .tolerance("autocov_truncation_error", g.truncation_error);
            let csv = sweep_csv_header(model.n(), !model.is_real())
                + &sweep_csv_row(window, s.direction, &s.error_covariance, !model.is_real());
            emit(out, format, &meta, solution_json(&s), Some(csv))
        }
        Command::Sweep { model, windows, direction, rank_tol, precision, bits } => {
            let model = load_model(&model)?;
            let windows = parse_windows(&windows)?;
            let dir: Direction = direction.into();
            let max = *windows.last().expect("nonempty");
            let mut meta = model_meta(Meta::new("sweep"), &model).tolerance("psd_slack", PSD_SLACK);
            let (omegas, ranks): (Vec<CMatrix>, Vec<usize>) = match precision {
                Precision::Double => {
                    let g = autocov_default(&model, max)?;
                    meta = meta
                        .set("solver", Solver::PseudoInverse { rank_tol })
                        .tolerance("rank_tol", rank_tol)
                        .tolerance("autocov_truncation_error", g.truncation_error);
                    estimation::sweep(&g, &windows, dir, rank_tol)?
                        .into_iter()
                        .map(|s| (s.error_covariance, s.rank_used))
                        .unzip()
                }
                Precision::Extended => {
                    let bits = bits.unwrap_or_else(|| default_precision(max));
                    meta = meta.set("solver", Solver::Extended { precision_bits: bits });
                    let ext = extended_sweep(&model, max, dir, bits)?;
                    windows
                        .iter()
                        .map(|&p| (ext.omegas[p - 1].clone(), ext.rank_used[p - 1]))
                        .unzip()
                }
            };
            let complex = !model.is_real();
            let mut csv = sweep_csv_header(model.n(), complex);
            let mut rows = Vec::new();
            for ((&p, om), rank) in windows.iter().zip(&omegas).zip(&ranks) {
                check_psd(om, &format!("error covariance at window {p}"))?;
                csv.push_str(&sweep_csv_row(p, dir, om, complex));
                rows.push(json!({
                    "window": p,
                    "trace": trace_re(om),
                    "det": om.determinant().re,
                    "rank_used": rank,
                    "error_covariance": matrix_json(om),
                }));
            }
            let result = json!({ "direction": direction_name(dir), "windows": rows });
            emit(out, format, &meta, result, Some(csv))
        }
        Command::Szego { model, grid } => {
            let model = load_model(&model)?;
            if model.n() != 1 {
                return Err(CliError::Config("szego needs a single-channel model".into()));
            }
            let density = spectral::scalar_density(&model.channels[0], grid)?;
            let q = spectral::szego_report(&density)?;
            let meta = model_meta(Meta::new("szego"), &model)
                .set("grid", grid)
                .tolerance("log_floor", spectral::LOG_FLOOR);
            let csv = format!("value,grid_size,floor_hits\n{:e},{},{}\n", q.value, q.grid_size, q.floor_hits);
            emit(out, format, &meta, serde_json::to_value(q).expect("report"), Some(csv))
        }
        Command::WmDet { model, grid } => {
            let model = load_model(&model)?;
            let g = spectral::spectrum_grid(&model, grid)?;
            let q = spectral::wiener_masani_report(&g);
            let meta = model_meta(Meta::new("wm-det"), &model)
                .set("grid", grid)
                .tolerance("log_floor", spectral::LOG_FLOOR);
            let mut csv = String::from("theta,det\n");
            for (t, d) in g.det_curve() {
                csv.push_str(&format!("{t:e},{d:e}\n"));
            }
            emit(out, format, &meta, serde_json::to_value(q).expect("report"), Some(csv))
        }
        Command::Cyclicity { symbol, model, alpha } => {
            let meta = Meta::new("cyclicity");
            let (symbols, meta) = match (symbol, model) {
                (Some(s), None) => (vec![load_symbol(&s)?], meta),
                (None, Some(m)) => {
                    let model = load_model(&ModelArgs { model: m, alpha })?;
                    let meta = model_meta(meta, &model);
                    (model.channels, meta)
                }
                _ => return Err(CliError::Config("give exactly one of --symbol or --model".into())),
            };
            let labels: Vec<_> = symbols.iter().map(classify).collect();
            let rule = multi_rule(&labels)?;
            let mut csv = String::from("channel,symbol,label,evidence\n");
            for (i, (s, l)) in symbols.iter().zip(&labels).enumerate() {
                csv.push_str(&format!("{i},\"{s}\",{:?},{:?}\n", l.label, l.evidence));
            }
            let result = json!({
                "channels": symbols.iter().zip(&labels).map(|(s, l)| json!({
                    "symbol": s.to_string(),
                    "label": l.label,
                    "evidence": l.evidence,
                })).collect::<Vec<_>>(),
                "rule": rule,
            });
            emit(out, format, &meta, result, Some(csv))
        }
        Command::Probe { symbol, target, shifts, truncation } => {
            let g = load_symbol(&symbol)?;
            let mut values = vec![Complex64::new(0.0, 0.0); target + 1];
            values[target] = Complex64::new(1.0, 0.0);
            let tw = CoefficientWindow { values, tail_bound: 0.0 };
            let n = truncation.unwrap_or_else(|| cyclicity::default_probe_truncation(shifts, tw.len()));
            let curve = cyclicity::residual_probe(&g, &tw, shifts, n)?;
            let meta = Meta::new("probe")
                .set("symbol", g.to_string())
                .set("target", target)
                .set("truncation", n)
                .tolerance("rank_tol", cyclicity::PROBE_RANK_TOL);
            let mut csv = String::from("shifts,residual\n");
            for (j, r) in curve.iter().enumerate() {
                csv.push_str(&format!("{j},{r:e}\n"));
            }
            emit(out, format, &meta, json!({ "residuals": curve }), Some(csv))
        }
        Command::Hilbert { n } => {
            let s = cyclicity::hilbert_singular_values(n)?;
            let meta = Meta::new("hilbert").set("n", n);
            let mut csv = String::from("index,singular_value\n");
            for (i, v) in s.iter().enumerate() {
                csv.push_str(&format!("{i},{v:e}\n"));
            }
            emit(out, format, &meta, json!({ "n": n, "singular_values": s }), Some(csv))
        }
        Command::Simulate { model, t, seed, truncation } => {
            let model = load_model(&model)?;
            let l = truncation.unwrap_or_else(|| default_sim_truncation(&model));
            let path = simulate::sample_path(&model, t, seed, l)?;
            let meta = model_meta(Meta::new("simulate"), &model)
                .set("seed", seed)
                .set("T", t)
                .set("truncation", l)
                .set("burn_in", path.burn_in)
                .set("generator", path.generator);
            if let (Some(p), Format::Csv) = (out, format) {
                let side = p.with_extension("meta.json");
                fs::write(&side, serde_json::to_string_pretty(&meta.value()).expect("meta") + "\n")?;
            }
            let result = json!({ "values": path.values });
            emit(out, format, &meta, result, Some(path.to_csv()))
        }
        Command::Validate { model, t, seed, lags, window, truncation, tolerance } => {
            let model = load_model(&model)?;
            let l = truncation.unwrap_or_else(|| default_sim_truncation(&model));
            let path = simulate::sample_path(&model, t, seed, l)?;
            let analytic = autocov_default(&model, lags.max(window))?;
            let empirical = simulate::empirical_autocov(&path, lags)?;
            let rel = |a: &CMatrix, b: &CMatrix| {
                let nb = frobenius(b);
                if nb > 0.0 {
                    frobenius(&(a - b)) / nb
                } else {
                    frobenius(a)
                }
            };
            let mut pass = true;
            let mut lag_rows = Vec::new();
            for k in 0..=lags {
                let a = analytic.gamma(k as i64)?;
                let e = empirical.gamma(k as i64)?;
                let r = rel(&e, &a);
                pass &= r <= tolerance;
                lag_rows.push(json!({
                    "lag": k,
                    "analytic": matrix_json(&a),
                    "empirical": matrix_json(&e),
                    "relative_frobenius": r,
                }));
            }
            let mut pred_rows = Vec::new();
            for dir in [Direction::Forward, Direction::Backward] {
                let s = predict(&analytic, window, dir, estimation::DEFAULT_RANK_TOL)?;
                let e = simulate::empirical_prediction_error(&path, &s)?;
                // the empirical error of a fixed filter scales with Gamma_0
                let scale = frobenius(&s.error_covariance).max(tolerance * trace_re(analytic.lag0()));
                let r = frobenius(&(&e - &s.error_covariance)) / scale;
                pass &= r <= tolerance;
                pred_rows.push(json!({
                    "direction": direction_name(dir),
                    "window": window,
                    "analytic": matrix_json(&s.error_covariance),
                    "empirical": matrix_json(&e),
                    "relative_frobenius": r,
                }));
            }
            let meta = model_meta(Meta::new("validate"), &model)
                .set("seed", seed)
                .set("T", t)
                .set("truncation", l)
                .set("generator", path.generator)
                .tolerance("relative_frobenius", tolerance)
                .tolerance("rank_tol", estimation::DEFAULT_RANK_TOL);
            let result = json!({ "pass": pass, "lags": lag_rows, "prediction": pred_rows });
            emit(out, format, &meta, result, None)?;
            if pass {
                Ok(())
            } else {
                Err(CliError::Numeric(format!(
                    "empirical moments outside relative Frobenius tolerance {tolerance}"
                )))
            }
        }
        Command::Dichotomy { model, windows, threshold, rank_tol } => {
            let model = load_model(&model)?;
            let windows = parse_windows(&windows)?;
            if windows.len() < 3 {
                return Err(CliError::Config("dichotomy needs at least 3 windows".into()));
            }
            let max = *windows.last().expect("nonempty");
            let g = autocov_default(&model, max)?;
            let fwd = estimation::sweep(&g, &windows, Direction::Forward, rank_tol)?;
            let omega_f = fwd.last().expect("nonempty").error_covariance.clone();
            let solver = match default_solver(&model, &windows) {
                Solver::PseudoInverse { .. } => Solver::PseudoInverse { rank_tol },
                s => s,
            };
            let report = is_backward_deterministic_with(&model, &windows, threshold, solver)?;
            let omega_b = report.final_error_covariance.clone();
            check_psd(&omega_f, "forward error covariance")?;
            check_psd(&omega_b, "backward error covariance")?;
            let labels: Vec<_> = model.channels.iter().map(classify).collect();
            let rule = multi_rule(&labels)?;
            let meta = model_meta(Meta::new("dichotomy"), &model)
                .set("solver_backward", solver)
                .tolerance("rank_tol", rank_tol)
                .tolerance("determinism_threshold", threshold)
                .tolerance("stabilization", estimation::STABILIZATION_TOL)
                .tolerance("psd_slack", PSD_SLACK);
            let mut csv = String::from("window,trace_fwd,trace_bwd\n");
            for ((p, f), b) in windows.iter().zip(&fwd).zip(&report.traces) {
                csv.push_str(&format!("{p},{:e},{b:e}\n", f.trace()));
            }
            let result = json!({
                "window": max,
                "omega_f": matrix_json(&omega_f),
                "omega_b": matrix_json(&omega_b),
                "rule": rule,
                "labels": labels,
                "numeric": {
                    "verdict": report.verdict,
                    "strictly_decreasing": report.strictly_decreasing,
                    "relative_change": report.relative_change,
                    "threshold": report.threshold,
                },
                "windows": windows,
                "trace_fwd": fwd.iter().map(PredictionSolution::trace).collect::<Vec<_>>(),
                "trace_bwd": report.traces,
            });
            emit(out, format, &meta, result, Some(csv))
        }
    }
}
