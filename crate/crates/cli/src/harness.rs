//! Experiment orchestration: the four experiment protocols with
//! parameter-transfer hyperparameter handling.
//!
//! Hyperparameters are tuned exactly once per plan source — the input
//! experiment tunes on In1 features, the moneyness experiment on the full
//! (ALL) training set — and are then frozen: every sub-experiment of a plan
//! reuses them, the window experiment inherits the In1 result, and the
//! noise experiment inherits the ALL result. Provenance is recorded on
//! every resolved model and ends up in reports.

use crate::config::{BenchConfig, RosterModel};
use crate::csvio;
use crate::errors::CliError;
use optbench_core::dataset::{
    build_denoised_train, decimate, generate_synthetic, moneyness_bucket_with, split_by_dates,
    DatasetSplit, MoneynessBucket, OptionRecord,
};
use optbench_core::evaluation::{
    error_increase_pct, mse, rmse, score_table, ErrorTable, ScoreReport, WeightVector,
};
use optbench_core::features::{assemble, sliding_window, FeatureMatrix, InputConfig, InputSet};
use optbench_core::mix_seed;
use optbench_core::models::{fit_model_with_seed, tune, FittedModel, ModelSpec};
use optbench_core::pricing::{bs_price, bsm_price};
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    Input,
    Moneyness,
    Window,
    Noise,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 4] = [
        ExperimentKind::Input,
        ExperimentKind::Moneyness,
        ExperimentKind::Window,
        ExperimentKind::Noise,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::Input => "input",
            ExperimentKind::Moneyness => "moneyness",
            ExperimentKind::Window => "window",
            ExperimentKind::Noise => "noise",
        }
    }

    pub fn parse(s: &str) -> Option<ExperimentKind> {
        Self::ALL.iter().copied().find(|k| k.name() == s)
    }
}

/// One model's resolved setup, as recorded in reports.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedModel {
    pub name: String,
    /// "analytic", "tuned@input/In1", "inherited@moneyness/ALL", ...
    pub source: String,
    pub spec: String,
}

/// Everything one experiment run produced.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub experiment: ExperimentKind,
    pub seed: u64,
    pub note: String,
    pub resolved: Vec<ResolvedModel>,
    pub errors: ErrorTable,
    pub metric: &'static str,
    pub weights: Option<WeightVector>,
    pub score: Option<ScoreReport>,
    /// Noise experiment only: per-model denoised error increase (%).
    pub noise_increase: Option<Vec<(String, Option<f64>)>>,
    /// Log-only notes (dropped rows, skipped cells).
    pub diagnostics: Vec<String>,
    /// Log-only wall clock; never part of report bytes.
    pub wall_ms: u128,
}

/// Loads or generates records, routes them by date, sorts each part, and
/// applies the row caps.
pub fn prepare_split(cfg: &BenchConfig, seed: u64) -> Result<DatasetSplit, CliError> {
    let records = match &cfg.data_csv {
        Some(path) => csvio::load_records(path)?,
        None => {
            let mut records = generate_synthetic(&cfg.main_generator(), seed)?;
            if let Some(extra_cfg) = cfg.extra_generator() {
                records.extend(generate_synthetic(&extra_cfg, mix_seed(seed, "extra-gen", 0))?);
            }
            records
        }
    };
    let mut train_ranges = vec![cfg.train_range];
    if let Some(extra) = cfg.extra_range {
        train_ranges.push(extra);
    }
    let mut split = split_by_dates(records, &train_ranges, cfg.test_range)?;
    let by_date = |a: &OptionRecord, b: &OptionRecord| {
        (a.trade_date, a.contract_id.as_str()).cmp(&(b.trade_date, b.contract_id.as_str()))
    };
    split.train.sort_by(by_date);
    split.test.sort_by(by_date);
    split.denoised_extra.sort_by(by_date);
    split.train = decimate(&split.train, cfg.train_cap);
    split.test = decimate(&split.test, cfg.test_cap);
    split.denoised_extra = decimate(&split.denoised_extra, cfg.extra_cap);
    Ok(split)
}

/// Cached tuning results, so plans that inherit cause exactly one tuning
/// pass of their source.
pub struct Harness {
    cfg: BenchConfig,
    seed: u64,
    split: DatasetSplit,
    tuned_input_in1: Option<Vec<(RosterModel, ModelSpec)>>,
    tuned_moneyness_all: Option<Vec<(RosterModel, ModelSpec)>>,
}

impl Harness {
    pub fn new(cfg: BenchConfig, seed: u64) -> Result<Self, CliError> {
        let split = prepare_split(&cfg, seed)?;
        if split.train.is_empty() {
            return Err(CliError::data("training set is empty"));
        }
        if split.test.is_empty() {
            return Err(CliError::data("test set is empty"));
        }
        Ok(Self {
            cfg,
            seed,
            split,
            tuned_input_in1: None,
            tuned_moneyness_all: None,
        })
    }

    pub fn split(&self) -> &DatasetSplit {
        &self.split
    }

    pub fn config(&self) -> &BenchConfig {
        &self.cfg
    }

    fn data_note(&self) -> String {
        format!(
            "{} (train {} / test {} / extra {})",
            if self.cfg.data_csv.is_some() {
                "csv"
            } else {
                "synthetic"
            },
            self.split.train.len(),
            self.split.test.len(),
            self.split.denoised_extra.len()
        )
    }

    fn trainables(&self) -> Vec<RosterModel> {
        self.cfg
            .roster
            .iter()
            .copied()
            .filter(|m| !m.is_analytic())
            .collect()
    }

    fn maybe_window(&self, matrix: FeatureMatrix) -> Result<FeatureMatrix, CliError> {
        if self.cfg.window_in_all_experiments {
            Ok(sliding_window(&matrix, self.cfg.window)?)
        } else {
            Ok(matrix)
        }
    }

    /// Tunes every trainable roster model on the given training matrix.
    fn tune_roster(
        &self,
        matrix: &FeatureMatrix,
        tag: &str,
    ) -> Result<Vec<(RosterModel, ModelSpec)>, CliError> {
        let mut out = Vec::new();
        for model in self.trainables() {
            let grid = self.cfg.grids.grid_for(model);
            if grid.is_empty() {
                return Err(CliError::config(format!(
                    "empty tuning grid for {}",
                    model.name()
                )));
            }
            let outcome = tune(
                &grid,
                &matrix.x,
                &matrix.y,
                self.cfg.val_fraction,
                mix_seed(self.seed, tag, model as u64),
            )?;
            out.push((model, outcome.best));
        }
        Ok(out)
    }

    fn tuned_input_in1(&mut self) -> Result<Vec<(RosterModel, ModelSpec)>, CliError> {
        if self.tuned_input_in1.is_none() {
            let matrix =
                self.maybe_window(assemble(&self.split.train, &InputConfig::named(InputSet::In1))?)?;
            self.tuned_input_in1 = Some(self.tune_roster(&matrix, "tune-input-In1")?);
        }
        Ok(self.tuned_input_in1.clone().expect("just set"))
    }

    fn tuned_moneyness_all(&mut self) -> Result<Vec<(RosterModel, ModelSpec)>, CliError> {
        if self.tuned_moneyness_all.is_none() {
            let matrix = self.maybe_window(assemble(
                &self.split.train,
                &InputConfig::named(InputSet::Standard),
            )?)?;
            self.tuned_moneyness_all = Some(self.tune_roster(&matrix, "tune-moneyness-ALL")?);
        }
        Ok(self.tuned_moneyness_all.clone().expect("just set"))
    }

    fn analytic_predictions(&self, model: RosterModel, records: &[OptionRecord]) -> Vec<f64> {
        records
            .iter()
            .map(|rec| {
                let terms = match self.cfg.bs_sigma_override {
                    Some(vol) => rec.pricing_terms_with_vol(vol),
                    None => rec.pricing_terms(),
                };
                let result = match model {
                    RosterModel::Bs => bs_price(&terms),
                    RosterModel::Bsm => bsm_price(&terms),
                    _ => unreachable!("analytic_predictions is only for BS/BSM"),
                };
                result.map(|r| r.price).unwrap_or(f64::NAN)
            })
            .collect()
    }

    /// Scores a table when it has both a baseline row and at least one
    /// non-excluded learner; otherwise explains why not.
    fn try_score(
        &self,
        table: &ErrorTable,
        weights: &WeightVector,
    ) -> Result<ScoreReport, String> {
        if table.bs_row().is_none() {
            return Err("BS not in roster; score rates skipped".into());
        }
        let has_learner = table
            .models()
            .iter()
            .any(|m| !table.excluded().contains(m));
        if !has_learner {
            return Err("no non-excluded learner in roster; score rates skipped".into());
        }
        score_table(table, weights).map_err(|e| format!("scoring failed: {e}"))
    }

    fn fit_seed(&self, experiment: &str, sub: &str, model: RosterModel) -> u64 {
        mix_seed(
            self.seed,
            &format!("fit/{experiment}/{sub}/{}", model.name()),
            0,
        )
    }

    fn fit(
        &self,
        spec: &ModelSpec,
        matrix: &FeatureMatrix,
        experiment: &str,
        sub: &str,
        model: RosterModel,
    ) -> Result<FittedModel, CliError> {
        Ok(fit_model_with_seed(
            spec,
            &matrix.x,
            &matrix.y,
            self.fit_seed(experiment, sub, model),
        )?)
    }

    pub fn run(&mut self, kind: ExperimentKind) -> Result<RunRecord, CliError> {
        match kind {
            ExperimentKind::Input => self.run_input(),
            ExperimentKind::Moneyness => self.run_moneyness(),
            ExperimentKind::Window => self.run_window(),
            ExperimentKind::Noise => self.run_noise(),
        }
    }

    /// Input experiment: tune on In1, fit and evaluate all six input sets
    /// with the frozen hyperparameters, score with the configured weights.
    pub fn run_input(&mut self) -> Result<RunRecord, CliError> {
        let started = Instant::now();
        let tuned = self.tuned_input_in1()?;
        let subs: Vec<String> = InputSet::ALL_INPUT_EXPERIMENT
            .iter()
            .map(|s| s.name().to_string())
            .collect();

        let mut resolved = Vec::new();
        let mut models = Vec::new();
        let mut cells = Vec::new();
        for roster in self.cfg.roster.clone() {
            models.push(roster.name().to_string());
            if roster.is_analytic() {
                resolved.push(ResolvedModel {
                    name: roster.name().to_string(),
                    source: "analytic".into(),
                    spec: "closed form".into(),
                });
                let pred = self.analytic_predictions(roster, &self.split.test);
                let actual: Vec<f64> = self.split.test.iter().map(|r| r.price).collect();
                let err = rmse(&pred, &actual)?;
                cells.extend(std::iter::repeat(err).take(subs.len()));
            } else {
                let spec = lookup(&tuned, roster)?;
                resolved.push(ResolvedModel {
                    name: roster.name().to_string(),
                    source: "tuned@input/In1".into(),
                    spec: spec.describe(),
                });
                for set in InputSet::ALL_INPUT_EXPERIMENT {
                    let train = self.maybe_window(assemble(
                        &self.split.train,
                        &InputConfig::named(set),
                    )?)?;
                    let test =
                        self.maybe_window(assemble(&self.split.test, &InputConfig::named(set))?)?;
                    let model = self.fit(&spec, &train, "input", set.name(), roster)?;
                    cells.push(rmse(&model.predict(&test.x), &test.y)?);
                }
            }
        }

        let table = ErrorTable::new(
            models,
            subs.clone(),
            cells,
            self.cfg.roster.contains(&RosterModel::Bs).then_some("BS"),
            ErrorTable::default_exclusions(),
        )?;
        let weights = WeightVector::new(
            subs.iter()
                .cloned()
                .zip(self.cfg.input_weights.iter().copied())
                .collect(),
        )?;
        let mut diagnostics = Vec::new();
        let score = match self.try_score(&table, &weights) {
            Ok(report) => Some(report),
            Err(msg) => {
                diagnostics.push(msg);
                None
            }
        };

        Ok(RunRecord {
            experiment: ExperimentKind::Input,
            seed: self.seed,
            note: self.data_note(),
            resolved,
            errors: table,
            metric: "rmse",
            weights: Some(weights),
            score,
            noise_increase: None,
            diagnostics,
            wall_ms: started.elapsed().as_millis(),
        })
    }

    /// Moneyness experiment: STANDARD features, tune on ALL, fit once, and
    /// evaluate the ALL/ITM/ATM/OTM test partitions.
    pub fn run_moneyness(&mut self) -> Result<RunRecord, CliError> {
        let started = Instant::now();
        let tuned = self.tuned_moneyness_all()?;
        let mut diagnostics = Vec::new();

        // Test partitions; empty buckets are dropped with a warning.
        let mut partitions: Vec<(String, Vec<usize>)> =
            vec![("ALL".into(), (0..self.split.test.len()).collect())];
        for bucket in [
            MoneynessBucket::Itm,
            MoneynessBucket::Atm,
            MoneynessBucket::Otm,
        ] {
            let idx: Vec<usize> = self
                .split
                .test
                .iter()
                .enumerate()
                .filter(|(_, r)| {
                    moneyness_bucket_with(r.spot, r.strike, self.cfg.itm_side)
                        .map(|b| b == bucket)
                        .unwrap_or(false)
                })
                .map(|(i, _)| i)
                .collect();
            if idx.is_empty() {
                diagnostics.push(format!(
                    "bucket {} is empty; column dropped from the table",
                    bucket.as_str()
                ));
            } else {
                partitions.push((bucket.as_str().to_string(), idx));
            }
        }
        let subs: Vec<String> = partitions.iter().map(|(n, _)| n.clone()).collect();

        let std_cfg = InputConfig::named(InputSet::Standard);
        let train = self.maybe_window(assemble(&self.split.train, &std_cfg)?)?;
        let test = self.maybe_window(assemble(&self.split.test, &std_cfg)?)?;
        // Row indices survive windowing only when it is disabled; remap via
        // keys when the window transform is on.
        let key_rows: Vec<usize> = if self.cfg.window_in_all_experiments {
            let lookup: std::collections::BTreeMap<(&str, chrono::NaiveDate), usize> = self
                .split
                .test
                .iter()
                .enumerate()
                .map(|(i, r)| ((r.contract_id.as_str(), r.trade_date), i))
                .collect();
            test.keys
                .iter()
                .map(|(c, d)| *lookup.get(&(c.as_str(), *d)).expect("windowed key exists"))
                .collect()
        } else {
            (0..self.split.test.len()).collect()
        };

        let actual_all: Vec<f64> = self.split.test.iter().map(|r| r.price).collect();
        let mut resolved = Vec::new();
        let mut models = Vec::new();
        let mut cells = Vec::new();
        for roster in self.cfg.roster.clone() {
            models.push(roster.name().to_string());
            let predictions_by_test_row: Vec<(usize, f64)> = if roster.is_analytic() {
                resolved.push(ResolvedModel {
                    name: roster.name().to_string(),
                    source: "analytic".into(),
                    spec: "closed form".into(),
                });
                self.analytic_predictions(roster, &self.split.test)
                    .into_iter()
                    .enumerate()
                    .collect()
            } else {
                let spec = lookup(&tuned, roster)?;
                resolved.push(ResolvedModel {
                    name: roster.name().to_string(),
                    source: "tuned@moneyness/ALL".into(),
                    spec: spec.describe(),
                });
                let model = self.fit(&spec, &train, "moneyness", "ALL", roster)?;
                model
                    .predict(&test.x)
                    .into_iter()
                    .enumerate()
                    .map(|(row, p)| (key_rows[row], p))
                    .collect()
            };
            // Scatter predictions to test-row slots, then slice per bucket.
            let mut by_row: Vec<Option<f64>> = vec![None; self.split.test.len()];
            for (row, p) in predictions_by_test_row {
                by_row[row] = Some(p);
            }
            for (_, idx) in &partitions {
                let mut pred = Vec::new();
                let mut actual = Vec::new();
                for &i in idx {
                    if let Some(p) = by_row[i] {
                        pred.push(p);
                        actual.push(actual_all[i]);
                    }
                }
                if pred.is_empty() {
                    return Err(CliError::data(format!(
                        "no predictions left in bucket for {}",
                        roster.name()
                    )));
                }
                cells.push(rmse(&pred, &actual)?);
            }
        }

        let table = ErrorTable::new(
            models,
            subs.clone(),
            cells,
            self.cfg.roster.contains(&RosterModel::Bs).then_some("BS"),
            ErrorTable::default_exclusions(),
        )?;
        let weights = WeightVector::equal(&subs);
        let score = match self.try_score(&table, &weights) {
            Ok(report) => Some(report),
            Err(msg) => {
                diagnostics.push(msg);
                None
            }
        };

        Ok(RunRecord {
            experiment: ExperimentKind::Moneyness,
            seed: self.seed,
            note: self.data_note(),
            resolved,
            errors: table,
            metric: "rmse",
            weights: Some(weights),
            score,
            noise_increase: None,
            diagnostics,
            wall_ms: started.elapsed().as_millis(),
        })
    }

    /// Sliding-window experiment: per moneyness bucket, fit and evaluate
    /// each trainable twice (window on / off) with hyperparameters
    /// inherited from the input experiment's In1 tuning.
    pub fn run_window(&mut self) -> Result<RunRecord, CliError> {
        let started = Instant::now();
        let tuned = self.tuned_input_in1()?;
        let trainables = self.trainables();
        if trainables.is_empty() {
            return Err(CliError::config(
                "window experiment needs at least one trainable model",
            ));
        }
        let mut diagnostics = Vec::new();
        let std_cfg = InputConfig::named(InputSet::Standard);

        // Column results gathered per sub, dropped wholesale when any model
        // cannot produce a cell (tiny or empty bucket data).
        let mut subs: Vec<String> = Vec::new();
        let mut columns: Vec<Vec<f64>> = Vec::new();
        for bucket in [
            MoneynessBucket::Itm,
            MoneynessBucket::Atm,
            MoneynessBucket::Otm,
        ] {
            let in_bucket = |r: &&OptionRecord| {
                moneyness_bucket_with(r.spot, r.strike, self.cfg.itm_side)
                    .map(|b| b == bucket)
                    .unwrap_or(false)
            };
            let train_b: Vec<OptionRecord> =
                self.split.train.iter().filter(in_bucket).cloned().collect();
            let test_b: Vec<OptionRecord> =
                self.split.test.iter().filter(in_bucket).cloned().collect();
            if train_b.is_empty() || test_b.is_empty() {
                diagnostics.push(format!(
                    "bucket {}: empty ({} train / {} test rows); both arms dropped",
                    bucket.as_str(),
                    train_b.len(),
                    test_b.len()
                ));
                continue;
            }
            let train_plain = assemble(&train_b, &std_cfg)?;
            let test_plain = assemble(&test_b, &std_cfg)?;

            for on in [true, false] {
                let sub = format!("{}_{}", bucket.as_str(), if on { "on" } else { "off" });
                let (train_m, test_m) = if on {
                    let tw = sliding_window(&train_plain, self.cfg.window)?;
                    let sw = sliding_window(&test_plain, self.cfg.window)?;
                    diagnostics.push(format!(
                        "bucket {}: window dropped {} train / {} test rows",
                        bucket.as_str(),
                        train_plain.rows() - tw.rows(),
                        test_plain.rows() - sw.rows()
                    ));
                    (tw, sw)
                } else {
                    (train_plain.clone(), test_plain.clone())
                };
                if train_m.rows() == 0 || test_m.rows() == 0 {
                    diagnostics.push(format!(
                        "sub {sub}: no rows survive the window; column dropped"
                    ));
                    continue;
                }
                let mut column = Vec::with_capacity(trainables.len());
                let mut failed = None;
                for &roster in &trainables {
                    let spec = lookup(&tuned, roster)?;
                    match self.fit(&spec, &train_m, "window", &sub, roster) {
                        Ok(model) => column.push(rmse(&model.predict(&test_m.x), &test_m.y)?),
                        Err(e) => {
                            failed = Some(format!("sub {sub}: {} failed: {e}", roster.name()));
                            break;
                        }
                    }
                }
                match failed {
                    Some(msg) => diagnostics.push(format!("{msg}; column dropped")),
                    None => {
                        subs.push(sub);
                        columns.push(column);
                    }
                }
            }
        }
        if subs.is_empty() {
            return Err(CliError::data(
                "window experiment produced no sub-experiments (all buckets empty or window too long)",
            ));
        }

        let models: Vec<String> = trainables.iter().map(|m| m.name().to_string()).collect();
        let mut cells = Vec::with_capacity(models.len() * subs.len());
        for (mi, _) in models.iter().enumerate() {
            for column in &columns {
                cells.push(column[mi]);
            }
        }
        let resolved: Vec<ResolvedModel> = trainables
            .iter()
            .map(|&roster| {
                let spec = lookup(&tuned, roster).expect("resolved above");
                ResolvedModel {
                    name: roster.name().to_string(),
                    source: "inherited@input/In1".into(),
                    spec: spec.describe(),
                }
            })
            .collect();
        let table = ErrorTable::new(models, subs, cells, None, Vec::new())?;

        Ok(RunRecord {
            experiment: ExperimentKind::Window,
            seed: self.seed,
            note: self.data_note(),
            resolved,
            errors: table,
            metric: "rmse",
            weights: None,
            score: None,
            noise_increase: None,
            diagnostics,
            wall_ms: started.elapsed().as_millis(),
        })
    }

    /// Noise experiment: each trainable fitted on the original training set
    /// and on the denoised (train + extra) set, with hyperparameters
    /// inherited from the moneyness experiment's ALL tuning; reports test
    /// MSE per arm and the relative error increase.
    pub fn run_noise(&mut self) -> Result<RunRecord, CliError> {
        let started = Instant::now();
        if self.split.denoised_extra.is_empty() {
            return Err(CliError::config(
                "noise experiment requires a non-empty denoised extension (extra range)",
            ));
        }
        let tuned = self.tuned_moneyness_all()?;
        let trainables = self.trainables();
        if trainables.is_empty() {
            return Err(CliError::config(
                "noise experiment needs at least one trainable model",
            ));
        }
        let std_cfg = InputConfig::named(InputSet::Standard);
        let train_orig = self.maybe_window(assemble(&self.split.train, &std_cfg)?)?;
        let denoised_records = build_denoised_train(&self.split);
        let train_denoised = self.maybe_window(assemble(&denoised_records, &std_cfg)?)?;
        let test = self.maybe_window(assemble(&self.split.test, &std_cfg)?)?;

        let subs = vec!["original".to_string(), "denoised".to_string()];
        let mut models = Vec::new();
        let mut cells = Vec::new();
        let mut resolved = Vec::new();
        let mut increases = Vec::new();
        let mut diagnostics = Vec::new();
        for &roster in &trainables {
            let spec = lookup(&tuned, roster)?;
            models.push(roster.name().to_string());
            resolved.push(ResolvedModel {
                name: roster.name().to_string(),
                source: "inherited@moneyness/ALL".into(),
                spec: spec.describe(),
            });
            let fit_orig = self.fit(&spec, &train_orig, "noise", "original", roster)?;
            let fit_den = self.fit(&spec, &train_denoised, "noise", "denoised", roster)?;
            let mse_orig = mse(&fit_orig.predict(&test.x), &test.y)?;
            let mse_den = mse(&fit_den.predict(&test.x), &test.y)?;
            cells.push(mse_orig);
            cells.push(mse_den);
            match error_increase_pct(mse_orig, mse_den) {
                Ok(pct) => increases.push((roster.name().to_string(), Some(pct))),
                Err(e) => {
                    diagnostics.push(format!(
                        "{}: error increase undefined: {e}",
                        roster.name()
                    ));
                    increases.push((roster.name().to_string(), None));
                }
            }
        }
        let table = ErrorTable::new(models, subs, cells, None, Vec::new())?;

        Ok(RunRecord {
            experiment: ExperimentKind::Noise,
            seed: self.seed,
            note: self.data_note(),
            resolved,
            errors: table,
            metric: "mse",
            weights: None,
            score: None,
            noise_increase: Some(increases),
            diagnostics,
            wall_ms: started.elapsed().as_millis(),
        })
    }
}

fn lookup(tuned: &[(RosterModel, ModelSpec)], model: RosterModel) -> Result<ModelSpec, CliError> {
    tuned
        .iter()
        .find(|(m, _)| *m == model)
        .map(|(_, spec)| spec.clone())
        .ok_or_else(|| CliError::config(format!("no tuned parameters for {}", model.name())))
}
