pub mod corpus;
pub mod error;
pub mod features;
pub mod filtering;
pub mod hashing;
pub mod pipeline;
pub mod report;
pub mod clustering;
pub mod config;
pub mod sentiment;
pub mod synth;
pub mod textprep;
pub mod trends;

pub use error::{Error, Result};

/// Property-test configuration shared by the unit tests: a fixed seed so
/// every run explores the same cases, and no regression files on disk.
#[cfg(test)]
pub(crate) fn proptest_cases(cases: u32) -> proptest::test_runner::Config {
    use proptest::test_runner::{Config, RngSeed};
    Config { cases, rng_seed: RngSeed::Fixed(0x7e4d_5eed), failure_persistence: None, ..Config::default() }
}
