//! Entropy, mutual information and Kullback-Leibler divergence for
//! log-skew-normal and related skew-normal families.

pub mod cli;
pub mod distributions;
pub mod entropy;
pub mod error;
pub mod information;
pub mod numerics;
pub mod oracle;
pub mod specfile;
pub mod stream;

pub use distributions::{Block, Cfusn, DistributionSpec, Family, LocationScale, LogDensity, Partition, SkewnessMatrix};
pub use error::{Error, Result};
pub use stream::SeedStream;
