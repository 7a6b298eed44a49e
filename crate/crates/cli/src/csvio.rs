//! File formats: the option-record CSV, the underlying price series CSV,
//! and the long-form error-table CSV with its key = value sidecar.
//!
//! Option CSV header:
//!
//! ```text
//! trade_date,contract_id,S,K,tau_years,r,q_monthly,kind,sigma,delta,price
//! ```
//!
//! Error-table CSV header: `model,sub,error` (long form, every cell
//! present). Floats are written in shortest round-trip form, so a write
//! followed by a read reproduces the values exactly.

use crate::errors::CliError;
use chrono::NaiveDate;
use optbench_core::dataset::OptionRecord;
use optbench_core::evaluation::ErrorTable;
use optbench_core::pricing::OptionKind;
use std::io::Write;
use std::path::Path;

pub const OPTION_CSV_HEADER: [&str; 11] = [
    "trade_date",
    "contract_id",
    "S",
    "K",
    "tau_years",
    "r",
    "q_monthly",
    "kind",
    "sigma",
    "delta",
    "price",
];

fn parse_row_f64(field: &str, value: &str, row: usize) -> Result<f64, CliError> {
    value
        .parse()
        .map_err(|_| CliError::data(format!("row {row}: bad {field} `{value}`")))
}

/// Reads option records; every row is validated and errors carry the row
/// number and field. Row order is preserved.
pub fn load_records(path: &Path) -> Result<Vec<OptionRecord>, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::data(format!("cannot open {}: {e}", path.display())))?;
    {
        let headers = reader.headers()?;
        let got: Vec<&str> = headers.iter().collect();
        if got != OPTION_CSV_HEADER {
            return Err(CliError::data(format!(
                "bad header: expected {:?}, got {:?}",
                OPTION_CSV_HEADER.join(","),
                got.join(",")
            )));
        }
    }
    let mut out = Vec::new();
    for (i, result) in reader.records().enumerate() {
        let row = i + 2; // 1-based, after the header
        let record = result?;
        if record.len() != OPTION_CSV_HEADER.len() {
            return Err(CliError::data(format!(
                "row {row}: expected {} fields, got {}",
                OPTION_CSV_HEADER.len(),
                record.len()
            )));
        }
        let trade_date = NaiveDate::parse_from_str(&record[0], "%Y-%m-%d")
            .map_err(|_| CliError::data(format!("row {row}: bad trade_date `{}`", &record[0])))?;
        let kind = match &record[7] {
            "call" => OptionKind::Call,
            "put" => OptionKind::Put,
            other => {
                return Err(CliError::data(format!("row {row}: bad kind `{other}`")));
            }
        };
        let rec = OptionRecord {
            trade_date,
            contract_id: record[1].to_string(),
            spot: parse_row_f64("S", &record[2], row)?,
            strike: parse_row_f64("K", &record[3], row)?,
            tau: parse_row_f64("tau_years", &record[4], row)?,
            rate: parse_row_f64("r", &record[5], row)?,
            q_monthly: parse_row_f64("q_monthly", &record[6], row)?,
            kind,
            sigma: parse_row_f64("sigma", &record[8], row)?,
            delta: parse_row_f64("delta", &record[9], row)?,
            price: parse_row_f64("price", &record[10], row)?,
        };
        rec.validate()
            .map_err(|e| CliError::data(format!("row {row}: {e}")))?;
        out.push(rec);
    }
    Ok(out)
}

/// Writes option records with full round-trip float precision.
pub fn save_records(path: &Path, records: &[OptionRecord]) -> Result<(), CliError> {
    let mut file = std::fs::File::create(path)?;
    writeln!(file, "{}", OPTION_CSV_HEADER.join(","))?;
    for r in records {
        writeln!(
            file,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.trade_date.format("%Y-%m-%d"),
            r.contract_id,
            r.spot,
            r.strike,
            r.tau,
            r.rate,
            r.q_monthly,
            r.kind.as_str(),
            r.sigma,
            r.delta,
            r.price
        )?;
    }
    Ok(())
}

/// Reads an underlying price series (`date,price` header).
pub fn load_prices(path: &Path) -> Result<Vec<(NaiveDate, f64)>, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::data(format!("cannot open {}: {e}", path.display())))?;
    {
        let headers = reader.headers()?;
        let got: Vec<&str> = headers.iter().collect();
        if got != ["date", "price"] {
            return Err(CliError::data(format!(
                "bad header: expected `date,price`, got {:?}",
                got.join(",")
            )));
        }
    }
    let mut out = Vec::new();
    for (i, result) in reader.records().enumerate() {
        let row = i + 2;
        let record = result?;
        let d = NaiveDate::parse_from_str(&record[0], "%Y-%m-%d")
            .map_err(|_| CliError::data(format!("row {row}: bad date `{}`", &record[0])))?;
        out.push((d, parse_row_f64("price", &record[1], row)?));
    }
    Ok(out)
}

/// Raw long-form error cells in file order.
#[derive(Debug)]
pub struct RawErrorTable {
    pub models: Vec<String>,
    pub subs: Vec<String>,
    /// Row-major `[model][sub]`.
    pub cells: Vec<f64>,
}

/// Reads `model,sub,error` rows (comments starting with `#` allowed) into a
/// dense table; models and subs keep first-appearance order and the grid
/// must be complete.
pub fn load_error_csv(path: &Path) -> Result<RawErrorTable, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| CliError::data(format!("cannot open {}: {e}", path.display())))?;
    {
        let headers = reader.headers()?;
        let got: Vec<&str> = headers.iter().collect();
        if got != ["model", "sub", "error"] {
            return Err(CliError::data(format!(
                "bad header: expected `model,sub,error`, got {:?}",
                got.join(",")
            )));
        }
    }
    let mut models: Vec<String> = Vec::new();
    let mut subs: Vec<String> = Vec::new();
    let mut cells: Vec<(String, String, f64)> = Vec::new();
    for (i, result) in reader.records().enumerate() {
        let row = i + 2;
        let record = result?;
        let model = record[0].to_string();
        let sub = record[1].to_string();
        let value = parse_row_f64("error", &record[2], row)?;
        if !models.contains(&model) {
            models.push(model.clone());
        }
        if !subs.contains(&sub) {
            subs.push(sub.clone());
        }
        cells.push((model, sub, value));
    }
    if models.is_empty() {
        return Err(CliError::data("error table has no rows"));
    }
    let mut dense = vec![None; models.len() * subs.len()];
    for (model, sub, value) in cells {
        let mi = models.iter().position(|m| *m == model).expect("tracked");
        let si = subs.iter().position(|s| *s == sub).expect("tracked");
        let slot = &mut dense[mi * subs.len() + si];
        if slot.is_some() {
            return Err(CliError::data(format!(
                "duplicate cell for model `{model}`, sub `{sub}`"
            )));
        }
        *slot = Some(value);
    }
    let mut flat = Vec::with_capacity(dense.len());
    for (idx, v) in dense.into_iter().enumerate() {
        match v {
            Some(v) => flat.push(v),
            None => {
                return Err(CliError::data(format!(
                    "missing cell for model `{}`, sub `{}`",
                    models[idx / subs.len()],
                    subs[idx % subs.len()]
                )))
            }
        }
    }
    Ok(RawErrorTable {
        models,
        subs,
        cells: flat,
    })
}

/// Writes a dense error table in long form.
pub fn save_error_csv(path: &Path, table: &ErrorTable) -> Result<(), CliError> {
    let mut file = std::fs::File::create(path)?;
    writeln!(file, "model,sub,error")?;
    for model in table.models() {
        for sub in table.subs() {
            let v = table.get(model, sub).map_err(CliError::from)?;
            writeln!(file, "{model},{sub},{v}")?;
        }
    }
    Ok(())
}

/// Sidecar metadata for an error-table CSV.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TableMeta {
    pub experiment: String,
    pub seed: Option<u64>,
    pub note: String,
    /// "rmse" or "mse".
    pub metric: String,
    pub bs_row: Option<String>,
    pub exclude: Vec<String>,
    /// Keyed weights, e.g. `In1:1,In2:1,...`.
    pub weights: Option<Vec<(String, f64)>>,
    pub scored: bool,
}

/// The sidecar path convention: `<table>.meta` next to `<table>.csv`.
pub fn meta_path_for(csv_path: &Path) -> std::path::PathBuf {
    csv_path.with_extension("meta")
}

pub fn load_meta(path: &Path) -> Result<TableMeta, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::data(format!("cannot read {}: {e}", path.display())))?;
    let mut meta = TableMeta::default();
    for (no, raw) in text.lines().enumerate() {
        let line = no + 1;
        let stripped = raw.split('#').next().unwrap_or("").trim();
        if stripped.is_empty() {
            continue;
        }
        let (key, value) = stripped.split_once('=').ok_or_else(|| {
            CliError::data(format!("meta line {line}: expected `key = value`"))
        })?;
        let (key, value) = (key.trim(), value.trim());
        match key {
            "experiment" => meta.experiment = value.to_string(),
            "seed" => {
                meta.seed = Some(value.parse().map_err(|_| {
                    CliError::data(format!("meta line {line}: bad seed `{value}`"))
                })?)
            }
            "note" => meta.note = value.to_string(),
            "metric" => meta.metric = value.to_string(),
            "bs_row" => meta.bs_row = Some(value.to_string()),
            "exclude" => {
                meta.exclude = value
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(String::from)
                    .collect()
            }
            "weights" => {
                let mut weights = Vec::new();
                for part in value.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                    let (name, w) = part.split_once(':').ok_or_else(|| {
                        CliError::data(format!("meta line {line}: bad weight `{part}`"))
                    })?;
                    let w: f64 = w.trim().parse().map_err(|_| {
                        CliError::data(format!("meta line {line}: bad weight `{part}`"))
                    })?;
                    weights.push((name.trim().to_string(), w));
                }
                meta.weights = Some(weights);
            }
            "scored" => {
                meta.scored = matches!(value, "true" | "yes");
            }
            other => {
                return Err(CliError::data(format!(
                    "meta line {line}: unknown key `{other}`"
                )))
            }
        }
    }
    Ok(meta)
}

pub fn save_meta(path: &Path, meta: &TableMeta) -> Result<(), CliError> {
    let mut file = std::fs::File::create(path)?;
    writeln!(file, "experiment = {}", meta.experiment)?;
    if let Some(seed) = meta.seed {
        writeln!(file, "seed = {seed}")?;
    }
    if !meta.note.is_empty() {
        writeln!(file, "note = {}", meta.note)?;
    }
    writeln!(file, "metric = {}", meta.metric)?;
    if let Some(bs) = &meta.bs_row {
        writeln!(file, "bs_row = {bs}")?;
    }
    if !meta.exclude.is_empty() {
        writeln!(file, "exclude = {}", meta.exclude.join(","))?;
    }
    if let Some(weights) = &meta.weights {
        let parts: Vec<String> = weights.iter().map(|(n, w)| format!("{n}:{w}")).collect();
        writeln!(file, "weights = {}", parts.join(","))?;
    }
    writeln!(file, "scored = {}", meta.scored)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use optbench_core::dataset::{generate_synthetic, GeneratorConfig};

    fn tmp() -> tempfile::TempDir {
        tempfile::tempdir().expect("tempdir")
    }

    fn sample_records() -> Vec<OptionRecord> {
        let cfg = GeneratorConfig {
            start: NaiveDate::from_ymd_opt(2020, 1, 1).unwrap(),
            end: NaiveDate::from_ymd_opt(2020, 1, 31).unwrap(),
            spot0: 100.0,
            gbm_mu: 0.03,
            gbm_sigma: 0.2,
            rate: 0.02,
            q_monthly: 0.001,
            strikes: vec![95.0, 105.0],
            maturities: vec![0.5],
            kinds: vec![OptionKind::Call, OptionKind::Put],
            noise_eta: 0.01,
            periods_per_year: 252,
        };
        generate_synthetic(&cfg, 3).unwrap()
    }

    #[test]
    fn records_round_trip_exactly() {
        let dir = tmp();
        let path = dir.path().join("records.csv");
        let records = sample_records();
        save_records(&path, &records).unwrap();
        let loaded = load_records(&path).unwrap();
        assert_eq!(loaded, records);
    }

    #[test]
    fn empty_data_section_is_empty_list() {
        let dir = tmp();
        let path = dir.path().join("empty.csv");
        std::fs::write(&path, format!("{}\n", OPTION_CSV_HEADER.join(","))).unwrap();
        assert_eq!(load_records(&path).unwrap(), Vec::new());
    }

    #[test]
    fn negative_spot_names_row_and_field() {
        let dir = tmp();
        let path = dir.path().join("bad.csv");
        std::fs::write(
            &path,
            format!(
                "{}\n2020-01-02,c1,-1,100,0.5,0.02,0.001,call,0.2,0.5,3.0\n",
                OPTION_CSV_HEADER.join(",")
            ),
        )
        .unwrap();
        let err = load_records(&path).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("row 2"), "{msg}");
        assert!(msg.contains('S'), "{msg}");
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn bad_header_rejected() {
        let dir = tmp();
        let path = dir.path().join("hdr.csv");
        std::fs::write(&path, "a,b,c\n1,2,3\n").unwrap();
        assert!(load_records(&path).is_err());
    }

    #[test]
    fn error_table_round_trip() {
        let table = ErrorTable::new(
            vec!["BS".into(), "A".into()],
            vec!["s1".into(), "s2".into()],
            vec![0.1270, 0.05, 0.08, 0.033],
            Some("BS"),
            vec!["BS".into()],
        )
        .unwrap();
        let dir = tmp();
        let path = dir.path().join("errors.csv");
        save_error_csv(&path, &table).unwrap();
        let raw = load_error_csv(&path).unwrap();
        assert_eq!(raw.models, vec!["BS", "A"]);
        assert_eq!(raw.subs, vec!["s1", "s2"]);
        assert_eq!(raw.cells, vec![0.1270, 0.05, 0.08, 0.033]);
    }

    #[test]
    fn incomplete_error_table_rejected() {
        let dir = tmp();
        let path = dir.path().join("sparse.csv");
        std::fs::write(&path, "model,sub,error\nA,s1,0.1\nA,s2,0.2\nB,s1,0.3\n").unwrap();
        let err = load_error_csv(&path).unwrap_err();
        assert!(err.to_string().contains("missing cell"), "{err}");
    }

    #[test]
    fn meta_round_trip() {
        let meta = TableMeta {
            experiment: "input".into(),
            seed: Some(42),
            note: "synthetic desk".into(),
            metric: "rmse".into(),
            bs_row: Some("BS".into()),
            exclude: vec!["BS".into(), "BSM".into()],
            weights: Some(vec![("In1".into(), 1.0), ("In3".into(), 2.0)]),
            scored: true,
        };
        let dir = tmp();
        let path = dir.path().join("errors.meta");
        save_meta(&path, &meta).unwrap();
        assert_eq!(load_meta(&path).unwrap(), meta);
    }
}
