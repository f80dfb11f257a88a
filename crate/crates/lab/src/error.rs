use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] jmgt_core::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("asymptotic regime not reached: {0}")]
    NotAsymptotic(String),
}

impl LabError {
    /// 2 config, 3 resolution refusal, 4 hypothesis violation, 5 solver or numerical failure.
    pub fn exit_code(&self) -> u8 {
        match self {
            LabError::Config(_) => 2,
            LabError::Core(jmgt_core::Error::Resolution { .. }) => 3,
            LabError::Core(jmgt_core::Error::Support(_)) => 4,
            LabError::Core(jmgt_core::Error::Admissibility { .. }) => 2,
            _ => 5,
        }
    }
}
