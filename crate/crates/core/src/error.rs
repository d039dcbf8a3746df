use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{what} = {value} is outside {domain}")]
    Domain {
        what: &'static str,
        value: f64,
        domain: String,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("distribution is not regular: hazard rate decreases near t = {at}")]
    Irregular { at: f64 },

    #[error("quadrature did not converge on [{a}, {b}] (estimated error {error:e})")]
    Quadrature { a: f64, b: f64, error: f64 },

    #[error("no sign change on [{a}, {b}]")]
    NoBracket { a: f64, b: f64 },

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn domain(what: &'static str, value: f64, lo: f64, hi: f64) -> Self {
        Error::Domain {
            what,
            value,
            domain: format!("[{lo}, {hi}]"),
        }
    }

    /// True for failures of the numerical machinery, as opposed to bad inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Quadrature { .. } | Error::NoBracket { .. } | Error::Infeasible(_)
        )
    }
}
