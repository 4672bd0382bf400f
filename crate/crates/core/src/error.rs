use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("partition {partition} cannot be produced by {m} flips")]
    NotRepresentable { partition: String, m: usize },

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("invalid count table: {0}")]
    InvalidTable(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("table up to {max_n} needs about {needed} bytes, budget is {budget}")]
    ResourceLimit { max_n: usize, needed: u64, budget: u64 },

    #[error("{what} = {requested} exceeds the cap of {cap}")]
    CapExceeded {
        what: &'static str,
        requested: u64,
        cap: u64,
    },

    #[error("index {index} is outside the table (max_n = {max_n})")]
    OutOfRange { index: u64, max_n: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("m = {m} is below the threshold {threshold} required by the inequality")]
    PreconditionNotMet { m: u64, threshold: u64 },

    #[error("verdict still indeterminate at {precision} bits")]
    Indeterminate { precision: u32 },
}
