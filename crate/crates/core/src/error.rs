use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{what} = {value} is outside {range}")]
    Domain {
        what: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("invalid weight specification: {0}")]
    InvalidWeight(String),

    #[error("invalid costs: {0}")]
    InvalidCost(String),

    #[error("invalid dataset: {0}")]
    InvalidData(String),

    /// The input is valid but the requested quantity is undefined for it,
    /// e.g. a scaled score on a dataset with a single outcome class.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("both outcome classes must be present")]
    SingleClass,

    #[error("invalid binning: {0}")]
    InvalidBinning(String),

    #[error("bin {index} is empty")]
    EmptyBin { index: usize },

    #[error("datasets are not aligned: {0}")]
    Alignment(String),

    #[error("bootstrap failed: {0}")]
    Bootstrap(String),

    #[error("model fit failed: {0}")]
    Fit(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_unit(what: &'static str, value: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(Error::Domain {
            what,
            value,
            range: "[0, 1]",
        })
    }
}

pub(crate) fn check_open_unit(what: &'static str, value: f64) -> Result<f64> {
    if value > 0.0 && value < 1.0 {
        Ok(value)
    } else {
        Err(Error::Domain {
            what,
            value,
            range: "(0, 1)",
        })
    }
}
