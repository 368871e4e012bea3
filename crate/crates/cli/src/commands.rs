use clap::Parser;
use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use monollr::io::{
    format_number, write_estimate, write_ks_table, write_prediction_table, write_quantile_table,
};
use monollr::{
    distribution, lmf_bootstrap, point_predict, resolve_seed, run_experiment, select_bandwidth,
    BandwidthUnits, CvConfig, EstimatorConfig, ExperimentConfig, Method, RegressionSample,
};

use crate::args::parse_list;
use crate::{Cli, CliError, Command, OutputArgs, UnitsArg};

/// The JSON echo written next to every output.
#[derive(Debug, Serialize, Deserialize)]
pub struct Sidecar {
    pub command: String,
    /// Arguments that reproduce the run, seed included.
    pub argv: Vec<String>,
    pub seed: Option<u64>,
    pub config: serde_json::Value,
}

pub fn dispatch(argv: Vec<String>) -> Result<(), CliError> {
    let cli = match Cli::try_parse_from(
        std::iter::once("monollr".to_string()).chain(argv.iter().cloned()),
    ) {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    run(cli.command, argv)
}

fn run(command: Command, argv: Vec<String>) -> Result<(), CliError> {
    match command {
        Command::Estimate {
            data,
            est,
            x,
            method,
            output,
        } => {
            let sample = data.load()?;
            let cfg = est.config(&sample)?;
            let estimate = distribution(&sample, x, &cfg, method)?;
            emit(&output, |w| Ok(write_estimate(w, &estimate)?))?;
            echo(&output, "estimate", argv, None, &cfg)
        }
        Command::Predict {
            data,
            est,
            method,
            x,
            holdout,
            output,
        } => {
            let sample = data.load()?;
            let cfg = est.config(&sample)?;
            match (x, holdout) {
                (Some(xs), _) => {
                    let xs = parse_list(&xs, "--x")?;
                    let preds = xs
                        .iter()
                        .map(|&x| point_predict(&sample, x, &cfg, method))
                        .collect::<Result<Vec<_>, _>>()?;
                    emit(&output, |w| {
                        writeln!(w, "x,prediction")?;
                        for (x, p) in xs.iter().zip(&preds) {
                            writeln!(w, "{},{}", format_number(*x), format_number(*p))?;
                        }
                        Ok(())
                    })?;
                }
                (None, Some(range)) => {
                    let (first, last) = parse_range(&range, sample.len())?;
                    let rows = holdout_predictions(&sample, first, last, &cfg, method)?;
                    emit(&output, |w| {
                        writeln!(w, "index,x,y,prediction,error")?;
                        for &(i, p) in &rows {
                            let (x, y) = (sample.xs()[i - 1], sample.ys()[i - 1]);
                            let cells = [
                                format_number(x),
                                format_number(y),
                                format_number(p),
                                format_number(p - y),
                            ];
                            writeln!(w, "{i},{}", cells.join(","))?;
                        }
                        Ok(())
                    })?;
                    let errs: Vec<f64> =
                        rows.iter().map(|&(i, p)| p - sample.ys()[i - 1]).collect();
                    let k = errs.len() as f64;
                    let bias = errs.iter().sum::<f64>() / k;
                    let mse = errs.iter().map(|e| e * e).sum::<f64>() / k;
                    eprintln!(
                        "method={method} bias={} mse={}",
                        format_number(bias),
                        format_number(mse)
                    );
                }
                (None, None) => {
                    return Err(CliError::Usage(
                        "one of --x or --holdout is required".into(),
                    ))
                }
            }
            echo(&output, "predict", argv, None, &cfg)
        }
        Command::Cv {
            data,
            x,
            method,
            m,
            candidates,
            units,
            h0,
            kernel,
            window,
            output,
        } => {
            let sample = data.load()?;
            let mut cv = CvConfig::default_for(sample.len(), method);
            if let Some(m) = m {
                cv.m = m;
            }
            cv.candidates = parse_list(&candidates, "--candidates")?;
            cv.units = match units {
                UnitsArg::Counts => BandwidthUnits::Counts,
                UnitsArg::Regressor => BandwidthUnits::Regressor,
            };
            cv.h0 = h0;
            cv.window = window.into();
            let template = EstimatorConfig {
                family: kernel.into(),
                ..EstimatorConfig::default()
            };
            let result = select_bandwidth(&sample, x, &cv, &template)?;
            emit(&output, |w| {
                writeln!(w, "b,err")?;
                for &b in &cv.candidates {
                    writeln!(
                        w,
                        "{},{}",
                        format_number(b),
                        format_number(result.err(b).unwrap_or(f64::NAN))
                    )?;
                }
                Ok(())
            })?;
            eprintln!("best_b={}", format_number(result.best_b));
            if !result.infeasible.is_empty() {
                eprintln!(
                    "warning: {} infeasible candidate(s)",
                    result.infeasible.len()
                );
            }
            echo(&output, "cv", argv, None, &cv)
        }
        Command::Bootstrap {
            data,
            est,
            x,
            y,
            resamples,
            seed,
            output,
        } => {
            let seed = resolve_seed(seed, 0)?;
            let sample = data.load()?;
            let cfg = est.config(&sample)?;
            let summary = lmf_bootstrap(&sample, x, y, resamples, &cfg, seed)?;
            emit(&output, |w| {
                writeln!(w, "replicate")?;
                for v in &summary.replicates {
                    writeln!(w, "{}", format_number(*v))?;
                }
                Ok(())
            })?;
            eprintln!(
                "estimate={} variance={} B={} seed={}",
                format_number(summary.estimate),
                format_number(summary.variance),
                summary.resamples,
                summary.seed
            );
            echo(
                &output,
                "bootstrap",
                with_seed(argv, seed),
                Some(seed),
                &cfg,
            )
        }
        Command::Simulate { config, seed, out } => {
            let text = std::fs::read_to_string(&config)
                .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", config.display())))?;
            let mut cfg: ExperimentConfig = serde_json::from_str(&text).map_err(|e| {
                CliError::Usage(format!("invalid config {}: {e}", config.display()))
            })?;
            cfg.dgp.seed = resolve_seed(seed, cfg.dgp.seed)?;
            let report = run_experiment(&cfg)?;
            std::fs::create_dir_all(&out)?;
            for point in &report.points {
                let tag = point.eval_point.index;
                write_file(&out.join(format!("ks_i{tag}.csv")), |w| {
                    Ok(write_ks_table(w, point, &report.bandwidths)?)
                })?;
                write_file(&out.join(format!("pred_i{tag}.csv")), |w| {
                    Ok(write_prediction_table(w, point, &report.bandwidths)?)
                })?;
                write_file(&out.join(format!("quantiles_i{tag}.csv")), |w| {
                    Ok(write_quantile_table(w, point, &report.quantile_levels)?)
                })?;
            }
            write_file(&out.join("report.json"), |w| {
                serde_json::to_writer_pretty(&mut *w, &report).map_err(json_error)
            })?;
            let infeasible = report.infeasible_cells();
            if infeasible > 0 {
                eprintln!(
                    "warning: {infeasible} cell(s) infeasible in some realization; written as NA"
                );
            }
            let sidecar = Sidecar {
                command: "simulate".into(),
                argv: with_seed(argv, cfg.dgp.seed),
                seed: Some(cfg.dgp.seed),
                config: serde_json::to_value(&cfg).map_err(json_error)?,
            };
            write_json(&out.join("config.json"), &sidecar)
        }
        Command::Replay { sidecar, out } => {
            let text = std::fs::read_to_string(&sidecar)
                .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", sidecar.display())))?;
            let record: Sidecar = serde_json::from_str(&text).map_err(|e| {
                CliError::Usage(format!("invalid sidecar {}: {e}", sidecar.display()))
            })?;
            let mut argv = record.argv;
            if let Some(out) = out {
                replace_flag(&mut argv, "--out", &out.to_string_lossy());
                // The original sidecar must not be overwritten by the replay.
                if record.command != "simulate" {
                    replace_flag(
                        &mut argv,
                        "--sidecar",
                        &format!("{}.json", out.to_string_lossy()),
                    );
                }
            }
            dispatch(argv)
        }
    }
}

fn holdout_predictions(
    sample: &RegressionSample,
    first: usize,
    last: usize,
    cfg: &EstimatorConfig,
    method: Method,
) -> Result<Vec<(usize, f64)>, CliError> {
    (first..=last)
        .map(|i| {
            let reduced = sample.without(i - 1)?;
            let p = point_predict(&reduced, sample.xs()[i - 1], cfg, method).map_err(|e| {
                monollr::Error::DesignPoint {
                    index: i,
                    source: Box::new(e),
                }
            })?;
            Ok((i, p))
        })
        .collect()
}

fn parse_range(raw: &str, n: usize) -> Result<(usize, usize), CliError> {
    let bad = || {
        CliError::Usage(format!(
            "--holdout expects FIRST:LAST within 1..={n}, got `{raw}`"
        ))
    };
    let (a, b) = raw.split_once(':').ok_or_else(bad)?;
    let first: usize = a.trim().parse().map_err(|_| bad())?;
    let last: usize = b.trim().parse().map_err(|_| bad())?;
    if first == 0 || first > last || last > n {
        return Err(bad());
    }
    Ok((first, last))
}

fn with_seed(mut argv: Vec<String>, seed: u64) -> Vec<String> {
    if !replace_flag(&mut argv, "--seed", &seed.to_string()) {
        argv.push("--seed".into());
        argv.push(seed.to_string());
    }
    argv
}

/// Set the value of `flag` in `argv`, appending it when absent unless the
/// flag is a seed (handled by the caller). Returns whether it was present.
fn replace_flag(argv: &mut Vec<String>, flag: &str, value: &str) -> bool {
    let eq = format!("{flag}=");
    for k in 0..argv.len() {
        if argv[k] == flag && k + 1 < argv.len() {
            argv[k + 1] = value.to_string();
            return true;
        }
        if argv[k].starts_with(&eq) {
            argv[k] = format!("{eq}{value}");
            return true;
        }
    }
    if flag != "--seed" {
        argv.push(flag.to_string());
        argv.push(value.to_string());
    }
    false
}

fn json_error(e: serde_json::Error) -> CliError {
    CliError::Io(e.to_string())
}

fn write_file(
    path: &Path,
    body: impl FnOnce(&mut dyn Write) -> Result<(), CliError>,
) -> Result<(), CliError> {
    let file = File::create(path)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", path.display())))?;
    let mut w = BufWriter::new(file);
    body(&mut w)?;
    w.flush()?;
    Ok(())
}

fn emit(
    output: &OutputArgs,
    body: impl FnOnce(&mut dyn Write) -> Result<(), CliError>,
) -> Result<(), CliError> {
    match &output.out {
        Some(path) => write_file(path, body),
        None => {
            let stdout = std::io::stdout();
            let mut w = BufWriter::new(stdout.lock());
            body(&mut w)?;
            w.flush()?;
            Ok(())
        }
    }
}

fn sidecar_path(output: &OutputArgs) -> Option<PathBuf> {
    output.sidecar.clone().or_else(|| {
        output.out.as_ref().map(|p| {
            let mut s = p.clone().into_os_string();
            s.push(".json");
            PathBuf::from(s)
        })
    })
}

fn echo<T: Serialize>(
    output: &OutputArgs,
    command: &str,
    argv: Vec<String>,
    seed: Option<u64>,
    config: &T,
) -> Result<(), CliError> {
    let Some(path) = sidecar_path(output) else {
        return Ok(());
    };
    let sidecar = Sidecar {
        command: command.into(),
        argv,
        seed,
        config: serde_json::to_value(config).map_err(json_error)?,
    };
    write_json(&path, &sidecar)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    write_file(path, |w| {
        serde_json::to_writer_pretty(&mut *w, value).map_err(json_error)?;
        writeln!(w)?;
        Ok(())
    })
}
