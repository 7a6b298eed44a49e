//! Deterministic report rendering (markdown and CSV) and run-directory
//! reading/writing.
//!
//! Report bytes are a pure function of the run record minus its wall
//! clock, so two same-seed runs emit identical reports; timing and
//! diagnostics go to the run log instead.

use crate::csvio::{self, TableMeta};
use crate::errors::CliError;
use crate::harness::{ExperimentKind, ResolvedModel, RunRecord};
use optbench_core::evaluation::{error_increase_pct, score_table, ErrorTable, WeightVector};
use std::fmt::Write as _;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Markdown,
    Csv,
}

impl ReportFormat {
    pub fn parse(s: &str) -> Option<ReportFormat> {
        match s {
            "md" | "markdown" => Some(ReportFormat::Markdown),
            "csv" => Some(ReportFormat::Csv),
            _ => None,
        }
    }
}

fn fmt4(v: f64) -> String {
    format!("{v:.4}")
}

/// Renders a run record; output is deterministic for a given record.
pub fn emit_report(record: &RunRecord, format: ReportFormat) -> String {
    match format {
        ReportFormat::Markdown => emit_markdown(record),
        ReportFormat::Csv => emit_csv(record),
    }
}

fn emit_markdown(record: &RunRecord) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# {} experiment", record.experiment.name());
    let _ = writeln!(out);
    let _ = writeln!(out, "- seed: {}", record.seed);
    let _ = writeln!(out, "- data: {}", record.note);
    let _ = writeln!(out, "- metric: {}", record.metric.to_uppercase());
    if let Some(weights) = &record.weights {
        let parts: Vec<String> = weights
            .entries()
            .iter()
            .map(|(n, w)| format!("{n}={w}"))
            .collect();
        let _ = writeln!(out, "- weights: {}", parts.join(", "));
    }
    let _ = writeln!(out);

    let _ = writeln!(out, "## models");
    let _ = writeln!(out);
    let _ = writeln!(out, "| model | parameters | provenance |");
    let _ = writeln!(out, "|---|---|---|");
    for m in &record.resolved {
        let _ = writeln!(out, "| {} | {} | {} |", m.name, m.spec, m.source);
    }
    let _ = writeln!(out);

    let _ = writeln!(out, "## errors ({})", record.metric.to_uppercase());
    let _ = writeln!(out);
    let subs = record.errors.subs();
    let _ = writeln!(out, "| model | {} |", subs.join(" | "));
    let _ = writeln!(out, "|---{}|", "|---".repeat(subs.len()));
    for model in record.errors.models() {
        let cells: Vec<String> = subs
            .iter()
            .map(|s| fmt4(record.errors.get(model, s).expect("dense table")))
            .collect();
        let _ = writeln!(out, "| {} | {} |", model, cells.join(" | "));
    }
    let _ = writeln!(out);

    if let Some(score) = &record.score {
        let _ = writeln!(out, "## score rates");
        let _ = writeln!(out);
        let _ = writeln!(out, "| model | vs BS | vs worst learner |");
        let _ = writeln!(out, "|---|---|---|");
        for entry in &score.entries {
            let _ = writeln!(
                out,
                "| {} | {} | {} |",
                entry.model,
                fmt4(entry.score_bs),
                fmt4(entry.score_ml)
            );
        }
        let _ = writeln!(out);
    }

    if let Some(increases) = &record.noise_increase {
        let _ = writeln!(out, "## denoised error increase");
        let _ = writeln!(out);
        let _ = writeln!(out, "| model | original | denoised | increase (%) |");
        let _ = writeln!(out, "|---|---|---|---|");
        for (model, pct) in increases {
            let orig = record.errors.get(model, "original").expect("dense table");
            let den = record.errors.get(model, "denoised").expect("dense table");
            let _ = writeln!(
                out,
                "| {} | {} | {} | {} |",
                model,
                fmt4(orig),
                fmt4(den),
                pct.map_or("n/a".to_string(), fmt4)
            );
        }
        let _ = writeln!(out);
    }
    out
}

fn emit_csv(record: &RunRecord) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "kind,model,key,value");
    let _ = writeln!(out, "meta,,experiment,{}", record.experiment.name());
    let _ = writeln!(out, "meta,,seed,{}", record.seed);
    let _ = writeln!(out, "meta,,metric,{}", record.metric);
    for m in &record.resolved {
        let _ = writeln!(out, "param,{},source,{}", m.name, m.source);
        let _ = writeln!(out, "param,{},spec,{}", m.name, m.spec);
    }
    for model in record.errors.models() {
        for sub in record.errors.subs() {
            let _ = writeln!(
                out,
                "error,{model},{sub},{}",
                fmt4(record.errors.get(model, sub).expect("dense table"))
            );
        }
    }
    if let Some(score) = &record.score {
        for entry in &score.entries {
            let _ = writeln!(out, "score_bs,{},,{}", entry.model, fmt4(entry.score_bs));
            let _ = writeln!(out, "score_ml,{},,{}", entry.model, fmt4(entry.score_ml));
        }
    }
    if let Some(increases) = &record.noise_increase {
        for (model, pct) in increases {
            let _ = writeln!(
                out,
                "increase,{model},,{}",
                pct.map_or("n/a".to_string(), fmt4)
            );
        }
    }
    out
}

/// Writes the run directory: config snapshot, resolved hyperparameters,
/// error table + sidecar, score CSV, markdown report, and log.
pub fn write_run_dir(
    dir: &Path,
    config_snapshot: &str,
    record: &RunRecord,
) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("config.cfg"), config_snapshot)?;

    let mut params = String::new();
    for m in &record.resolved {
        let _ = writeln!(params, "{} | {} | {}", m.name, m.source, m.spec);
    }
    std::fs::write(dir.join("resolved_params.txt"), params)?;

    csvio::save_error_csv(&dir.join("errors.csv"), &record.errors)?;
    csvio::save_meta(&dir.join("errors.meta"), &meta_of(record))?;

    if let Some(score) = &record.score {
        let mut s = String::new();
        let _ = writeln!(s, "model,score_bs,score_ml");
        for e in &score.entries {
            let _ = writeln!(s, "{},{},{}", e.model, e.score_bs, e.score_ml);
        }
        std::fs::write(dir.join("scores.csv"), s)?;
    }

    std::fs::write(
        dir.join("report.md"),
        emit_report(record, ReportFormat::Markdown),
    )?;

    let mut log = String::new();
    let _ = writeln!(log, "experiment: {}", record.experiment.name());
    let _ = writeln!(log, "wall_ms: {}", record.wall_ms);
    for d in &record.diagnostics {
        let _ = writeln!(log, "note: {d}");
    }
    std::fs::write(dir.join("log.txt"), log)?;
    Ok(())
}

fn meta_of(record: &RunRecord) -> TableMeta {
    TableMeta {
        experiment: record.experiment.name().to_string(),
        seed: Some(record.seed),
        note: record.note.clone(),
        metric: record.metric.to_string(),
        bs_row: record.errors.bs_row().map(String::from),
        exclude: record.errors.excluded().to_vec(),
        weights: record
            .weights
            .as_ref()
            .map(|w| w.entries().to_vec()),
        scored: record.score.is_some(),
    }
}

/// Rebuilds a run record from a run directory (errors + meta + params), so
/// reports can be re-emitted byte-identically.
pub fn load_run_dir(dir: &Path) -> Result<RunRecord, CliError> {
    let raw = csvio::load_error_csv(&dir.join("errors.csv"))?;
    let meta = csvio::load_meta(&dir.join("errors.meta"))?;
    let experiment = ExperimentKind::parse(&meta.experiment)
        .ok_or_else(|| CliError::data(format!("unknown experiment `{}`", meta.experiment)))?;
    let table = ErrorTable::new(
        raw.models,
        raw.subs,
        raw.cells,
        meta.bs_row.as_deref(),
        meta.exclude.clone(),
    )?;

    let params_text = std::fs::read_to_string(dir.join("resolved_params.txt"))
        .map_err(|e| CliError::data(format!("cannot read resolved_params.txt: {e}")))?;
    let mut resolved = Vec::new();
    for line in params_text.lines() {
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.splitn(3, " | ").collect();
        if parts.len() != 3 {
            return Err(CliError::data(format!(
                "bad resolved_params line: `{line}`"
            )));
        }
        resolved.push(ResolvedModel {
            name: parts[0].to_string(),
            source: parts[1].to_string(),
            spec: parts[2].to_string(),
        });
    }

    let weights = meta
        .weights
        .as_ref()
        .map(|w| WeightVector::new(w.clone()))
        .transpose()?;
    let score = if meta.scored {
        let w = weights
            .clone()
            .ok_or_else(|| CliError::data("scored table without weights in meta"))?;
        Some(score_table(&table, &w)?)
    } else {
        None
    };
    let noise_increase = if experiment == ExperimentKind::Noise {
        let mut increases = Vec::new();
        for model in table.models() {
            let orig = table.get(model, "original")?;
            let den = table.get(model, "denoised")?;
            increases.push((model.clone(), error_increase_pct(orig, den).ok()));
        }
        Some(increases)
    } else {
        None
    };

    Ok(RunRecord {
        experiment,
        seed: meta.seed.unwrap_or(0),
        note: meta.note,
        resolved,
        errors: table,
        metric: if meta.metric == "mse" { "mse" } else { "rmse" },
        weights,
        score,
        noise_increase,
        diagnostics: Vec::new(),
        wall_ms: 0,
    })
}
