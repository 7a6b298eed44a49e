//! `optbench` command line: synthetic data generation, GARCH fitting,
//! experiment runs, error-table scoring, and report re-emission.
//!
//! Exit codes: 0 success, 2 configuration error, 3 data error, 4 numerical
//! failure.

use clap::{Parser, Subcommand};
use optbench_cli::config::BenchConfig;
use optbench_cli::csvio;
use optbench_cli::errors::CliError;
use optbench_cli::harness::{ExperimentKind, Harness};
use optbench_cli::report::{emit_report, load_run_dir, write_run_dir, ReportFormat};
use optbench_core::evaluation::{score_table, ErrorTable, WeightVector};
use optbench_core::volatility::{garch_fit, log_returns, vol_series, TRADING_DAYS_PER_YEAR};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "optbench",
    about = "Option-pricing benchmark: analytic baselines, tree ensembles, and score-rate evaluation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic option market CSV from a config file.
    GenData {
        /// Benchmark config (key = value text).
        config: PathBuf,
        /// Output CSV path.
        out: PathBuf,
        /// Seed override (defaults to the config's seed).
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Fit GARCH(1,1) to an underlying price series CSV (`date,price`).
    FitVol {
        /// Price series CSV.
        prices: PathBuf,
    },
    /// Run one experiment (or all four) and write a run directory.
    Run {
        /// input | moneyness | window | noise | all
        experiment: String,
        #[arg(long)]
        config: PathBuf,
        /// Seed override (defaults to the config's seed).
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score an error-table CSV (model,sub,error) with the score-rate
    /// mechanism; designations default from the sidecar `.meta` file.
    Score {
        /// Error table CSV.
        errors: PathBuf,
        /// Per-sub weights in table sub order, e.g. `1,1,2,2,1,1`.
        #[arg(long)]
        weights: Option<String>,
        /// Baseline row name.
        #[arg(long)]
        bs_row: Option<String>,
        /// Rows excluded from the worst-learner maximum, comma separated.
        #[arg(long)]
        exclude: Option<String>,
        /// md | csv
        #[arg(long, default_value = "md")]
        format: String,
    },
    /// Re-emit the report of a run directory.
    Report {
        run_dir: PathBuf,
        /// md | csv
        #[arg(long, default_value = "md")]
        format: String,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("optbench: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::GenData { config, out, seed } => gen_data(&config, &out, seed),
        Command::FitVol { prices } => fit_vol(&prices),
        Command::Run {
            experiment,
            config,
            seed,
            out,
        } => run(&experiment, &config, seed, &out),
        Command::Score {
            errors,
            weights,
            bs_row,
            exclude,
            format,
        } => score(&errors, weights, bs_row, exclude, &format),
        Command::Report { run_dir, format } => report(&run_dir, &format),
    }
}

fn gen_data(config: &PathBuf, out: &PathBuf, seed: Option<u64>) -> Result<(), CliError> {
    let cfg = BenchConfig::load(config)?;
    let seed = seed.unwrap_or(cfg.seed);
    let mut records = optbench_core::dataset::generate_synthetic(&cfg.main_generator(), seed)?;
    if let Some(extra) = cfg.extra_generator() {
        records.extend(optbench_core::dataset::generate_synthetic(
            &extra,
            optbench_core::mix_seed(seed, "extra-gen", 0),
        )?);
    }
    csvio::save_records(out, &records)?;
    println!("wrote {} records to {}", records.len(), out.display());
    Ok(())
}

fn fit_vol(prices: &PathBuf) -> Result<(), CliError> {
    let series = csvio::load_prices(prices)?;
    if series.is_empty() {
        return Err(CliError::data("price series is empty"));
    }
    let values: Vec<f64> = series.iter().map(|(_, p)| *p).collect();
    let returns = log_returns(&values)?;
    let fit = garch_fit(&returns)?;
    let vols = vol_series(&fit.params, &returns, TRADING_DAYS_PER_YEAR)?;
    println!("observations = {}", values.len());
    println!("returns = {}", returns.len());
    println!("omega = {}", fit.params.omega);
    println!("alpha = {}", fit.params.alpha);
    println!("beta = {}", fit.params.beta);
    println!("persistence = {}", fit.params.persistence());
    println!("loglik = {}", fit.params.loglik);
    println!("degenerate = {}", fit.degenerate);
    println!(
        "unconditional_vol_annualized = {}",
        (fit.params.unconditional_variance() * TRADING_DAYS_PER_YEAR as f64).sqrt()
    );
    println!(
        "last_vol_annualized = {}",
        vols.last().copied().unwrap_or(f64::NAN)
    );
    Ok(())
}

fn run(
    experiment: &str,
    config: &PathBuf,
    seed: Option<u64>,
    out: &PathBuf,
) -> Result<(), CliError> {
    let snapshot = std::fs::read_to_string(config)
        .map_err(|e| CliError::config(format!("cannot read config {}: {e}", config.display())))?;
    let cfg = BenchConfig::parse(&snapshot)?;
    let seed = seed.unwrap_or(cfg.seed);
    let kinds: Vec<ExperimentKind> = if experiment == "all" {
        ExperimentKind::ALL.to_vec()
    } else {
        vec![ExperimentKind::parse(experiment).ok_or_else(|| {
            CliError::config(format!(
                "unknown experiment `{experiment}` (input|moneyness|window|noise|all)"
            ))
        })?]
    };

    let mut harness = Harness::new(cfg, seed)?;
    for kind in kinds {
        let record = harness.run(kind)?;
        let dir = if experiment == "all" {
            out.join(kind.name())
        } else {
            out.clone()
        };
        write_run_dir(&dir, &snapshot, &record)?;
        println!(
            "{}: {} models x {} sub-experiments -> {}",
            kind.name(),
            record.errors.models().len(),
            record.errors.subs().len(),
            dir.display()
        );
    }
    Ok(())
}

fn score(
    errors: &PathBuf,
    weights: Option<String>,
    bs_row: Option<String>,
    exclude: Option<String>,
    format: &str,
) -> Result<(), CliError> {
    let raw = csvio::load_error_csv(errors)?;
    let meta_path = csvio::meta_path_for(errors);
    let meta = if meta_path.exists() {
        Some(csvio::load_meta(&meta_path)?)
    } else {
        None
    };

    let bs_row = bs_row
        .or_else(|| meta.as_ref().and_then(|m| m.bs_row.clone()))
        .unwrap_or_else(|| "BS".to_string());
    let exclude: Vec<String> = match exclude {
        Some(s) => s.split(',').map(|p| p.trim().to_string()).collect(),
        None => meta
            .as_ref()
            .filter(|m| !m.exclude.is_empty())
            .map(|m| m.exclude.clone())
            .unwrap_or_else(ErrorTable::default_exclusions),
    };
    let weight_vector = match weights {
        Some(s) => {
            let values: Result<Vec<f64>, _> = s.split(',').map(|p| p.trim().parse()).collect();
            let values =
                values.map_err(|_| CliError::config(format!("bad --weights list `{s}`")))?;
            if values.len() != raw.subs.len() {
                return Err(CliError::config(format!(
                    "--weights has {} entries but the table has {} sub-experiments",
                    values.len(),
                    raw.subs.len()
                )));
            }
            WeightVector::new(raw.subs.iter().cloned().zip(values).collect())?
        }
        None => match meta.as_ref().and_then(|m| m.weights.clone()) {
            Some(w) => WeightVector::new(w)?,
            None => WeightVector::equal(&raw.subs),
        },
    };

    let table = ErrorTable::new(raw.models, raw.subs, raw.cells, Some(&bs_row), exclude)?;
    let report = score_table(&table, &weight_vector)?;
    match ReportFormat::parse(format) {
        Some(ReportFormat::Markdown) => {
            println!("| model | vs BS | vs worst learner |");
            println!("|---|---|---|");
            for e in &report.entries {
                println!("| {} | {:.4} | {:.4} |", e.model, e.score_bs, e.score_ml);
            }
        }
        Some(ReportFormat::Csv) => {
            println!("model,score_bs,score_ml");
            for e in &report.entries {
                println!("{},{:.4},{:.4}", e.model, e.score_bs, e.score_ml);
            }
        }
        None => return Err(CliError::config(format!("unknown format `{format}`"))),
    }
    Ok(())
}

fn report(run_dir: &PathBuf, format: &str) -> Result<(), CliError> {
    let format =
        ReportFormat::parse(format).ok_or_else(|| CliError::config(format!("unknown format `{format}`")))?;
    let record = load_run_dir(run_dir)?;
    print!("{}", emit_report(&record, format));
    Ok(())
}
