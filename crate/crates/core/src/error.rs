use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Genotype length does not match the arm.
    #[error("dimension mismatch: expected {expected} joint angles, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    /// A task parameter violates its table constraint.
    #[error("task `{task}`: parameter `{param}` = {value} violates constraint `{constraint}`")]
    Constraint {
        task: &'static str,
        param: String,
        value: f64,
        constraint: &'static str,
    },

    #[error("task `{task}` has no parameter `{param}`")]
    UnknownParam { task: &'static str, param: String },

    /// An operation was called with inputs outside its contract.
    #[error("usage error: {0}")]
    Usage(String),
}
