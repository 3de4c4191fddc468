use std::fmt;
use std::path::PathBuf;

#[derive(Debug)]
pub enum LabError {
    /// Bad command line or configuration; `field` names the offending key.
    Usage { field: String, message: String },
    /// The owning module rejected the run before any row was produced.
    Module { context: String, source: latlab_core::Error },
    Io { path: PathBuf, source: std::io::Error },
    /// A report file that does not parse.
    Malformed { path: PathBuf, line: u64, message: String },
}

impl LabError {
    pub fn usage(field: &str, message: impl Into<String>) -> Self {
        LabError::Usage { field: field.to_string(), message: message.into() }
    }

    pub fn module(context: impl Into<String>, source: latlab_core::Error) -> Self {
        LabError::Module { context: context.into(), source }
    }

    /// 2 for anything that stops a run before its verdict; verdicts use 0 and 1.
    pub fn exit_code(&self) -> i32 {
        2
    }
}

impl fmt::Display for LabError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LabError::Usage { field, message } => write!(f, "usage error in `{field}`: {message}"),
            LabError::Module { context, source } => write!(f, "{context}: {source}"),
            LabError::Io { path, source } => write!(f, "{}: {source}", path.display()),
            LabError::Malformed { path, line, message } => {
                write!(f, "{}:{line}: {message}", path.display())
            }
        }
    }
}

impl std::error::Error for LabError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            LabError::Module { source, .. } => Some(source),
            LabError::Io { source, .. } => Some(source),
            _ => None,
        }
    }
}

pub type LabResult<T> = Result<T, LabError>;
