use std::path::PathBuf;

/// Failures surfaced by the command-line tool.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("cannot read config {path}: {source}")]
    ReadConfig {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot parse config: {0}")]
    Parse(String),
    #[error("invalid value for `{key}`: {reason}")]
    Invalid { key: &'static str, reason: String },
    #[error(transparent)]
    Model(#[from] mecsched_core::Error),
    #[error("frontier search failed at f_local_hz={f_local_hz}, cache_m={cache_m}: {reason}")]
    Frontier {
        f_local_hz: f64,
        cache_m: usize,
        reason: String,
    },
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
    #[error("cannot write csv: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub(crate) fn invalid(key: &'static str, reason: impl Into<String>) -> Self {
        CliError::Invalid {
            key,
            reason: reason.into(),
        }
    }

    /// 1 for configuration problems, 2 for everything that fails at run time.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::ReadConfig { .. } | CliError::Parse(_) | CliError::Invalid { .. } => 1,
            CliError::Model(mecsched_core::Error::Config(_)) => 1,
            _ => 2,
        }
    }
}
