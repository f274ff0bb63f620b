pub mod coefficients;
pub mod complex;
pub mod error;
pub mod logsigned;
pub mod precision;
pub mod spectrum;
pub mod nodal;
pub mod tail;
pub mod linalg;
pub mod cyclicity;
pub mod gram;
pub mod derivative;
pub mod problem;
