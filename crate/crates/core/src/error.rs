use std::fmt;

use thiserror::Error;

/// A sequence of child indices from the root of a computation tree.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PathPrefix(pub Vec<usize>);

impl fmt::Display for PathPrefix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("<root>");
        }
        for (i, step) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(".")?;
            }
            write!(f, "{step}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("depth bound {bound} exceeded below path {prefix}")]
    DepthExceeded { bound: usize, prefix: PathPrefix },

    #[error("internal node without successors at path {0}")]
    EmptyBranch(PathPrefix),

    #[error("normalization error: {0}")]
    Normalization(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("format error at line {line}: {message}")]
    Format { line: usize, message: String },

    #[error("capacity exceeded: {what} is {actual}, limit {limit}")]
    Capacity {
        what: &'static str,
        actual: usize,
        limit: usize,
    },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("self-reduction audit failed for {reduction}: {message}")]
    Audit { reduction: String, message: String },

    #[error("reduction kind mismatch: {0}")]
    KindMismatch(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn depth(bound: usize, prefix: Vec<usize>) -> Self {
        Error::DepthExceeded {
            bound,
            prefix: PathPrefix(prefix),
        }
    }

    pub(crate) fn format(line: usize, message: impl Into<String>) -> Self {
        Error::Format {
            line,
            message: message.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
