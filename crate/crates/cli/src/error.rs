use std::fmt;

/// Exit status classes: bad input (1) or a stage that failed while running (2).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Input,
    Runtime,
}

#[derive(Debug)]
pub struct CliError {
    pub stage: String,
    pub kind: Kind,
    pub source: anyhow::Error,
}

impl CliError {
    pub fn input(stage: &str, source: impl Into<anyhow::Error>) -> Self {
        CliError {
            stage: stage.to_string(),
            kind: Kind::Input,
            source: source.into(),
        }
    }

    pub fn runtime(stage: &str, source: impl Into<anyhow::Error>) -> Self {
        CliError {
            stage: stage.to_string(),
            kind: Kind::Runtime,
            source: source.into(),
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self.kind {
            Kind::Input => 1,
            Kind::Runtime => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {:#}", self.stage, self.source)
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub trait StageExt<T> {
    fn input(self, stage: &str) -> CliResult<T>;
    fn runtime(self, stage: &str) -> CliResult<T>;
}

impl<T, E: Into<anyhow::Error>> StageExt<T> for Result<T, E> {
    fn input(self, stage: &str) -> CliResult<T> {
        self.map_err(|e| CliError::input(stage, e))
    }

    fn runtime(self, stage: &str) -> CliResult<T> {
        self.map_err(|e| CliError::runtime(stage, e))
    }
}
