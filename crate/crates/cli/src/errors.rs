//! CLI error classes mapped to process exit codes: configuration problems
//! exit 2, data problems exit 3, numerical failures exit 4.

use optbench_core::dataset::DataError;
use optbench_core::evaluation::EvalError;
use optbench_core::features::FeatureError;
use optbench_core::models::ModelError;
use optbench_core::pricing::PricingError;
use optbench_core::volatility::VolError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("numerical failure: {0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Numeric(_) => 4,
        }
    }

    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn data(msg: impl Into<String>) -> Self {
        CliError::Data(msg.into())
    }

    pub fn numeric(msg: impl Into<String>) -> Self {
        CliError::Numeric(msg.into())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<DataError> for CliError {
    fn from(e: DataError) -> Self {
        match e {
            DataError::EmptyGrid { .. }
            | DataError::BadDateRange { .. }
            | DataError::OverlappingRanges { .. }
            | DataError::TooFewDates { .. } => CliError::Config(e.to_string()),
            DataError::InvalidField { .. } => CliError::Data(e.to_string()),
            DataError::Pricing(_) | DataError::Vol(_) => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<FeatureError> for CliError {
    fn from(e: FeatureError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::Config(_) => CliError::Config(e.to_string()),
            ModelError::Parse { .. } => CliError::Data(e.to_string()),
            ModelError::DimensionMismatch { .. }
            | ModelError::TooFewRows { .. }
            | ModelError::ZeroVarianceTarget => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::NonPositiveReference { .. } => CliError::Numeric(e.to_string()),
            EvalError::NegativeError { .. } | EvalError::MissingCell { .. } => {
                CliError::Data(e.to_string())
            }
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<PricingError> for CliError {
    fn from(e: PricingError) -> Self {
        CliError::Numeric(e.to_string())
    }
}

impl From<VolError> for CliError {
    fn from(e: VolError) -> Self {
        match e {
            VolError::NonPositivePrice { .. } | VolError::NonFinite { .. } => {
                CliError::Data(e.to_string())
            }
            _ => CliError::Numeric(e.to_string()),
        }
    }
}
