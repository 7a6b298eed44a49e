//! Benchmark configuration: key = value text with `#` comments. Every key
//! has a desk-scale default, so a config file only lists overrides.
//!
//! ```text
//! train_start = 2020-01-01
//! train_end   = 2020-08-31
//! noise_eta   = 0.02
//! strikes     = 80,90,100,110,120
//! roster      = BS,BSM,RF,GB2
//! ```

use crate::errors::CliError;
use chrono::NaiveDate;
use optbench_core::dataset::{DateRange, GeneratorConfig, ItmSide};
use optbench_core::models::{
    BoostOrder, BoostParams, ForestParams, ModelSpec, SplitMode, TreeParams,
};
use optbench_core::pricing::OptionKind;
use std::path::PathBuf;

/// Roster entry: the analytic baselines plus the trainable families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RosterModel {
    Bs,
    Bsm,
    Cart,
    Rf,
    Gb1,
    Gb2,
    Gb2Hist,
    Ngb,
}

impl RosterModel {
    pub const ALL: [RosterModel; 8] = [
        RosterModel::Bs,
        RosterModel::Bsm,
        RosterModel::Cart,
        RosterModel::Rf,
        RosterModel::Gb1,
        RosterModel::Gb2,
        RosterModel::Gb2Hist,
        RosterModel::Ngb,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            RosterModel::Bs => "BS",
            RosterModel::Bsm => "BSM",
            RosterModel::Cart => "CART",
            RosterModel::Rf => "RF",
            RosterModel::Gb1 => "GB1",
            RosterModel::Gb2 => "GB2",
            RosterModel::Gb2Hist => "GB2-hist",
            RosterModel::Ngb => "NGB",
        }
    }

    pub fn parse(s: &str) -> Option<RosterModel> {
        Self::ALL.iter().copied().find(|m| m.name() == s)
    }

    pub fn is_analytic(&self) -> bool {
        matches!(self, RosterModel::Bs | RosterModel::Bsm)
    }

    /// The learners counted as ensembles in benchmark summaries.
    pub fn is_ensemble(&self) -> bool {
        matches!(
            self,
            RosterModel::Rf | RosterModel::Gb1 | RosterModel::Gb2 | RosterModel::Gb2Hist | RosterModel::Ngb
        )
    }
}

/// Hyperparameter grid axes; the cartesian product per family feeds `tune`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridConfig {
    pub max_depths: Vec<usize>,
    pub learning_rates: Vec<f64>,
    pub n_rounds: Vec<usize>,
    pub n_trees: Vec<usize>,
    pub feature_subset: Option<usize>,
    pub lambdas: Vec<f64>,
    pub gammas: Vec<f64>,
    pub min_samples_leaf: usize,
    pub n_bins: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            max_depths: vec![4, 7],
            learning_rates: vec![0.1, 0.2],
            n_rounds: vec![150],
            n_trees: vec![100],
            feature_subset: Some(3),
            lambdas: vec![1.0],
            gammas: vec![0.0],
            min_samples_leaf: 2,
            n_bins: 32,
        }
    }
}

impl GridConfig {
    fn tree(&self, max_depth: usize, mode: SplitMode) -> TreeParams {
        TreeParams {
            max_depth,
            min_samples_leaf: self.min_samples_leaf,
            split_mode: mode,
            n_bins: self.n_bins,
        }
    }

    /// The tuning grid for one trainable family.
    pub fn grid_for(&self, model: RosterModel) -> Vec<ModelSpec> {
        let mut grid = Vec::new();
        match model {
            RosterModel::Bs | RosterModel::Bsm => {}
            RosterModel::Cart => {
                for &d in &self.max_depths {
                    grid.push(ModelSpec::Cart(self.tree(d + 3, SplitMode::Exact)));
                }
            }
            RosterModel::Rf => {
                for &d in &self.max_depths {
                    for &n in &self.n_trees {
                        grid.push(ModelSpec::RandomForest {
                            forest: ForestParams {
                                n_trees: n,
                                feature_subset: self.feature_subset,
                                bootstrap: true,
                                seed: 0,
                            },
                            tree: self.tree(d + 3, SplitMode::Exact),
                        });
                    }
                }
            }
            RosterModel::Gb1 | RosterModel::Gb2 | RosterModel::Gb2Hist | RosterModel::Ngb => {
                let (order, mode) = match model {
                    RosterModel::Gb1 => (BoostOrder::First, SplitMode::Exact),
                    RosterModel::Gb2Hist => (BoostOrder::Second, SplitMode::Histogram),
                    _ => (BoostOrder::Second, SplitMode::Exact),
                };
                for &d in &self.max_depths {
                    for &lr in &self.learning_rates {
                        for &m in &self.n_rounds {
                            for &lambda in &self.lambdas {
                                for &gamma in &self.gammas {
                                    let params = BoostParams {
                                        n_rounds: m,
                                        learning_rate: lr,
                                        lambda,
                                        gamma,
                                        tree: self.tree(d, mode),
                                        order,
                                    };
                                    grid.push(match model {
                                        RosterModel::Gb1 => ModelSpec::GbFirstOrder(params),
                                        RosterModel::Ngb => ModelSpec::NgbGaussian(BoostParams {
                                            lambda: 0.0,
                                            gamma: 0.0,
                                            ..params
                                        }),
                                        _ => ModelSpec::GbSecondOrder(params),
                                    });
                                }
                            }
                        }
                    }
                }
                grid.dedup();
            }
        }
        grid
    }
}

/// Full benchmark configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub train_range: DateRange,
    pub test_range: DateRange,
    pub extra_range: Option<DateRange>,
    pub train_cap: usize,
    pub test_cap: usize,
    pub extra_cap: usize,

    pub spot0: f64,
    pub gbm_mu: f64,
    pub gbm_sigma: f64,
    pub rate: f64,
    pub q_monthly: f64,
    pub strikes: Vec<f64>,
    pub maturities: Vec<f64>,
    pub kinds: Vec<OptionKind>,
    pub noise_eta: f64,
    pub extra_noise_eta: f64,
    pub periods_per_year: usize,
    pub seed: u64,
    pub data_csv: Option<PathBuf>,

    pub window: usize,
    pub window_in_all_experiments: bool,
    pub itm_side: ItmSide,
    pub input_weights: Vec<f64>,
    pub bs_sigma_override: Option<f64>,

    pub val_fraction: f64,
    pub roster: Vec<RosterModel>,
    pub grids: GridConfig,
}

fn date(y: i32, m: u32, d: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(y, m, d).expect("static date")
}

impl Default for BenchConfig {
    /// Desk-scale defaults: the 2020 calendar protocol with a 2021
    /// low-noise extension, capped at 5000/2000/1200 rows.
    fn default() -> Self {
        Self {
            train_range: DateRange::new(date(2020, 1, 1), date(2020, 8, 31)).expect("static"),
            test_range: DateRange::new(date(2020, 9, 1), date(2020, 12, 31)).expect("static"),
            extra_range: Some(
                DateRange::new(date(2021, 9, 1), date(2021, 12, 31)).expect("static"),
            ),
            train_cap: 5000,
            test_cap: 2000,
            extra_cap: 1200,
            spot0: 100.0,
            gbm_mu: 0.04,
            gbm_sigma: 0.16,
            rate: 0.025,
            q_monthly: 0.0015,
            strikes: vec![
                70.0, 76.0, 82.0, 88.0, 94.0, 100.0, 106.0, 112.0, 118.0, 124.0,
            ],
            maturities: vec![1.0, 1.5, 2.1, 2.7],
            kinds: vec![OptionKind::Call],
            noise_eta: 0.02,
            extra_noise_eta: 0.0,
            periods_per_year: 252,
            seed: 42,
            data_csv: None,
            window: 5,
            window_in_all_experiments: false,
            itm_side: ItmSide::LowRatio,
            input_weights: vec![1.0, 1.0, 2.0, 2.0, 1.0, 1.0],
            bs_sigma_override: None,
            val_fraction: 0.2,
            roster: RosterModel::ALL.to_vec(),
            grids: GridConfig::default(),
        }
    }
}

fn parse_date(v: &str, line: usize) -> Result<NaiveDate, CliError> {
    NaiveDate::parse_from_str(v, "%Y-%m-%d")
        .map_err(|_| CliError::config(format!("line {line}: bad date `{v}` (want YYYY-MM-DD)")))
}

fn parse_f64(v: &str, line: usize) -> Result<f64, CliError> {
    v.parse()
        .map_err(|_| CliError::config(format!("line {line}: bad number `{v}`")))
}

fn parse_usize(v: &str, line: usize) -> Result<usize, CliError> {
    v.parse()
        .map_err(|_| CliError::config(format!("line {line}: bad count `{v}`")))
}

fn parse_u64(v: &str, line: usize) -> Result<u64, CliError> {
    v.parse()
        .map_err(|_| CliError::config(format!("line {line}: bad seed `{v}`")))
}

fn parse_f64_list(v: &str, line: usize) -> Result<Vec<f64>, CliError> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_f64(s, line))
        .collect()
}

fn parse_usize_list(v: &str, line: usize) -> Result<Vec<usize>, CliError> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_usize(s, line))
        .collect()
}

fn parse_bool(v: &str, line: usize) -> Result<bool, CliError> {
    match v {
        "true" | "yes" | "on" => Ok(true),
        "false" | "no" | "off" => Ok(false),
        _ => Err(CliError::config(format!("line {line}: bad flag `{v}`"))),
    }
}

impl BenchConfig {
    /// Parses config text over the desk-scale defaults. Unknown keys are
    /// rejected.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut cfg = BenchConfig::default();
        let mut train_start = cfg.train_range.start;
        let mut train_end = cfg.train_range.end;
        let mut test_start = cfg.test_range.start;
        let mut test_end = cfg.test_range.end;
        let mut extra_start = cfg.extra_range.map(|r| r.start);
        let mut extra_end = cfg.extra_range.map(|r| r.end);

        for (no, raw) in text.lines().enumerate() {
            let line = no + 1;
            let stripped = raw.split('#').next().unwrap_or("").trim();
            if stripped.is_empty() {
                continue;
            }
            let (key, value) = stripped.split_once('=').ok_or_else(|| {
                CliError::config(format!("line {line}: expected `key = value`, got `{stripped}`"))
            })?;
            let key = key.trim();
            let value = value.trim();
            match key {
                "train_start" => train_start = parse_date(value, line)?,
                "train_end" => train_end = parse_date(value, line)?,
                "test_start" => test_start = parse_date(value, line)?,
                "test_end" => test_end = parse_date(value, line)?,
                "extra_start" => {
                    extra_start = if value == "none" {
                        None
                    } else {
                        Some(parse_date(value, line)?)
                    }
                }
                "extra_end" => {
                    extra_end = if value == "none" {
                        None
                    } else {
                        Some(parse_date(value, line)?)
                    }
                }
                "train_cap" => cfg.train_cap = parse_usize(value, line)?,
                "test_cap" => cfg.test_cap = parse_usize(value, line)?,
                "extra_cap" => cfg.extra_cap = parse_usize(value, line)?,
                "spot0" => cfg.spot0 = parse_f64(value, line)?,
                "gbm_mu" => cfg.gbm_mu = parse_f64(value, line)?,
                "gbm_sigma" => cfg.gbm_sigma = parse_f64(value, line)?,
                "rate" => cfg.rate = parse_f64(value, line)?,
                "q_monthly" => cfg.q_monthly = parse_f64(value, line)?,
                "strikes" => cfg.strikes = parse_f64_list(value, line)?,
                "maturities" => cfg.maturities = parse_f64_list(value, line)?,
                "kinds" => {
                    cfg.kinds = value
                        .split(',')
                        .map(str::trim)
                        .filter(|s| !s.is_empty())
                        .map(|s| match s {
                            "call" => Ok(OptionKind::Call),
                            "put" => Ok(OptionKind::Put),
                            other => Err(CliError::config(format!(
                                "line {line}: bad option kind `{other}`"
                            ))),
                        })
                        .collect::<Result<_, _>>()?;
                }
                "noise_eta" => cfg.noise_eta = parse_f64(value, line)?,
                "extra_noise_eta" => cfg.extra_noise_eta = parse_f64(value, line)?,
                "periods_per_year" => cfg.periods_per_year = parse_usize(value, line)?,
                "seed" => cfg.seed = parse_u64(value, line)?,
                "data_csv" => cfg.data_csv = Some(PathBuf::from(value)),
                "window" => cfg.window = parse_usize(value, line)?,
                "window_in_all_experiments" => {
                    cfg.window_in_all_experiments = parse_bool(value, line)?
                }
                "itm_labeling" => {
                    cfg.itm_side = match value {
                        "low_ratio" => ItmSide::LowRatio,
                        "high_ratio" => ItmSide::HighRatio,
                        other => {
                            return Err(CliError::config(format!(
                                "line {line}: bad itm_labeling `{other}` (low_ratio|high_ratio)"
                            )))
                        }
                    }
                }
                "input_weights" => {
                    let w = parse_f64_list(value, line)?;
                    if w.len() != 6 {
                        return Err(CliError::config(format!(
                            "line {line}: input_weights needs 6 entries, got {}",
                            w.len()
                        )));
                    }
                    cfg.input_weights = w;
                }
                "bs_sigma_override" => {
                    cfg.bs_sigma_override = if value == "none" {
                        None
                    } else {
                        Some(parse_f64(value, line)?)
                    };
                }
                "val_fraction" => cfg.val_fraction = parse_f64(value, line)?,
                "roster" => {
                    cfg.roster = value
                        .split(',')
                        .map(str::trim)
                        .filter(|s| !s.is_empty())
                        .map(|s| {
                            RosterModel::parse(s).ok_or_else(|| {
                                CliError::config(format!("line {line}: unknown model `{s}`"))
                            })
                        })
                        .collect::<Result<_, _>>()?;
                }
                "grid_max_depth" => cfg.grids.max_depths = parse_usize_list(value, line)?,
                "grid_learning_rate" => cfg.grids.learning_rates = parse_f64_list(value, line)?,
                "grid_n_rounds" => cfg.grids.n_rounds = parse_usize_list(value, line)?,
                "grid_n_trees" => cfg.grids.n_trees = parse_usize_list(value, line)?,
                "grid_feature_subset" => {
                    cfg.grids.feature_subset = if value == "all" {
                        None
                    } else {
                        Some(parse_usize(value, line)?)
                    };
                }
                "grid_lambda" => cfg.grids.lambdas = parse_f64_list(value, line)?,
                "grid_gamma" => cfg.grids.gammas = parse_f64_list(value, line)?,
                "grid_min_samples_leaf" => {
                    cfg.grids.min_samples_leaf = parse_usize(value, line)?
                }
                "grid_n_bins" => cfg.grids.n_bins = parse_usize(value, line)?,
                other => {
                    return Err(CliError::config(format!(
                        "line {line}: unknown key `{other}`"
                    )))
                }
            }
        }

        cfg.train_range = DateRange::new(train_start, train_end).map_err(CliError::from)?;
        cfg.test_range = DateRange::new(test_start, test_end).map_err(CliError::from)?;
        cfg.extra_range = match (extra_start, extra_end) {
            (Some(s), Some(e)) => Some(DateRange::new(s, e).map_err(CliError::from)?),
            (None, None) => None,
            _ => {
                return Err(CliError::config(
                    "extra_start and extra_end must be given together",
                ))
            }
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    fn validate(&self) -> Result<(), CliError> {
        if self.roster.is_empty() {
            return Err(CliError::config("roster is empty"));
        }
        if !(self.val_fraction > 0.0 && self.val_fraction < 1.0) {
            return Err(CliError::config("val_fraction must be in (0, 1)"));
        }
        if self.window == 0 {
            return Err(CliError::config("window must be >= 1"));
        }
        if self.train_range.overlaps(&self.test_range) {
            return Err(CliError::config("train and test ranges overlap"));
        }
        if let Some(extra) = &self.extra_range {
            if extra.overlaps(&self.test_range) {
                return Err(CliError::config("extra and test ranges overlap"));
            }
        }
        Ok(())
    }

    /// Generator settings for the main (train + test) span.
    pub fn main_generator(&self) -> GeneratorConfig {
        GeneratorConfig {
            start: self.train_range.start.min(self.test_range.start),
            end: self.train_range.end.max(self.test_range.end),
            spot0: self.spot0,
            gbm_mu: self.gbm_mu,
            gbm_sigma: self.gbm_sigma,
            rate: self.rate,
            q_monthly: self.q_monthly,
            strikes: self.strikes.clone(),
            maturities: self.maturities.clone(),
            kinds: self.kinds.clone(),
            noise_eta: self.noise_eta,
            periods_per_year: self.periods_per_year,
        }
    }

    /// Generator settings for the low-noise extension span, if configured.
    pub fn extra_generator(&self) -> Option<GeneratorConfig> {
        self.extra_range.map(|range| GeneratorConfig {
            start: range.start,
            end: range.end,
            noise_eta: self.extra_noise_eta,
            ..self.main_generator()
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_empty_config() {
        let cfg = BenchConfig::parse("").unwrap();
        assert_eq!(cfg, BenchConfig::default());
    }

    #[test]
    fn overrides_apply() {
        let cfg = BenchConfig::parse(
            "noise_eta = 0.05\nroster = BS,RF\nstrikes = 90, 100 ,110\nseed = 7\nkinds = call,put\n",
        )
        .unwrap();
        assert_eq!(cfg.noise_eta, 0.05);
        assert_eq!(cfg.roster, vec![RosterModel::Bs, RosterModel::Rf]);
        assert_eq!(cfg.strikes, vec![90.0, 100.0, 110.0]);
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.kinds, vec![OptionKind::Call, OptionKind::Put]);
    }

    #[test]
    fn comments_and_blanks_ignored() {
        let cfg = BenchConfig::parse("# a comment\n\nwindow = 3 # trailing\n").unwrap();
        assert_eq!(cfg.window, 3);
    }

    #[test]
    fn unknown_key_rejected() {
        assert!(BenchConfig::parse("no_such_key = 1\n").is_err());
    }

    #[test]
    fn overlapping_ranges_rejected() {
        let err = BenchConfig::parse("train_end = 2020-09-15\n").unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn bad_weights_rejected() {
        assert!(BenchConfig::parse("input_weights = 1,1,2\n").is_err());
    }

    #[test]
    fn grids_build_per_family() {
        let g = GridConfig::default();
        assert_eq!(g.grid_for(RosterModel::Bs).len(), 0);
        assert!(!g.grid_for(RosterModel::Rf).is_empty());
        assert!(g.grid_for(RosterModel::Gb2).len() >= 4);
        // NGB collapses the lambda/gamma axes.
        let ngb = g.grid_for(RosterModel::Ngb);
        assert!(ngb.len() >= 4);
    }
}
