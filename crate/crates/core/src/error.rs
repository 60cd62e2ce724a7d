use std::fmt;

use serde::Serialize;

/// Failure modes shared by every module of the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("pole of Gamma at argument {re}{im:+}i ({context})")]
    Pole { re: f64, im: f64, context: &'static str },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("isometry is not hyperbolic (|tr| = {trace})")]
    NotHyperbolic { trace: f64 },

    #[error("surface construction failed: {0}")]
    Construction(String),

    #[error("enumeration budget exceeded: more than {cap} classes")]
    BudgetExceeded { cap: usize },

    #[error("insufficient data: {found} classes below the cutoff, need at least {needed}")]
    InsufficientData { found: usize, needed: usize },

    #[error("fit residual {residual:.3e} exceeds bound {bound:.3e}")]
    Fit { residual: f64, bound: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}

/// Non-fatal diagnostics attached to computed values.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Warning {
    /// `Re s` is not safely above the estimated exponent of convergence.
    Convergence,
    /// The exponent of convergence could not be estimated, so the regime is unknown.
    DeltaUnavailable,
    /// Three consecutive word-length shells failed to decrease.
    ShellStall,
    /// A removable singularity was resolved by symmetric perturbation.
    RemovableSingularity,
    /// Some enumerated class has a trace within 1e-6 of the parabolic boundary.
    NearParabolic,
    /// Value lies in the regime where direct sums are not claimed to converge.
    Exploratory,
    /// The word-length budget may have cut off classes below the length cutoff.
    IncompleteSpectrum,
}

impl Warning {
    pub fn as_str(&self) -> &'static str {
        match self {
            Warning::Convergence => "convergence",
            Warning::DeltaUnavailable => "delta_unavailable",
            Warning::ShellStall => "shell_stall",
            Warning::RemovableSingularity => "removable_singularity",
            Warning::NearParabolic => "near_parabolic",
            Warning::Exploratory => "exploratory",
            Warning::IncompleteSpectrum => "incomplete_spectrum",
        }
    }
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for Warning {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

/// Sorted, duplicate-free set of warnings.
pub(crate) fn merge_warnings(into: &mut Vec<Warning>, from: &[Warning]) {
    into.extend_from_slice(from);
    into.sort();
    into.dedup();
}
