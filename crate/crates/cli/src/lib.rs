//! Command-line tools, corpus IO and benchmarks for `ridgesketch-core`.

pub mod app;
pub mod bench;
pub mod clock;
pub mod corpus;

pub use clock::StdClock;
