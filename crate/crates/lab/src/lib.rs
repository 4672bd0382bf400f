//! Table cache, parallel drivers, reports and the `partlab` command line,
//! on top of `partlab-core`.

pub mod cache;
pub mod cli;
pub mod parallel;
pub mod report;
