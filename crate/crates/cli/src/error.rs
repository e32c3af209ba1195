use metaring::model::Violation;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration rejected:\n{}", format_violations(.0))]
    Schema(Vec<Violation>),

    #[error("solver error: {0}")]
    Solver(#[from] metaring::Error),

    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn missing(path: &str) -> Self {
        CliError::Schema(vec![Violation::new(path, "section required by this command is missing")])
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Schema(_) => 2,
            CliError::Solver(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub fn format_violations(list: &[Violation]) -> String {
    list.iter()
        .map(|v| {
            let path = if v.path.is_empty() { "<root>" } else { &v.path };
            format!("  {path}: {}", v.message)
        })
        .collect::<Vec<_>>()
        .join("\n")
}
