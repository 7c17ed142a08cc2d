//! Feature relevance intervals for L1-regularized large-margin ordinal
//! regression.
//!
//! The baseline model ([`ordinal`]) is an LP; so is every relevance bound
//! ([`relevance`]). Permutation probes ([`probes`]) turn the bounds into a
//! strong / weak / irrelevant verdict per feature. [`datagen`] and [`eval`]
//! reproduce the synthetic and benchmark experiments, and [`io`] reads and
//! writes the dataset CSV format.

pub mod dataset;
pub mod datagen;
pub mod error;
pub mod eval;
pub mod io;
pub mod lp;
pub mod ordinal;
pub mod probes;
pub mod relevance;

pub use dataset::{standardize, Dataset, Standardization};
pub use error::{Error, Result};
pub use ordinal::{FitConfig, OrdinalModel};
pub use probes::{AnalysisConfig, ProbeConfig, RelevanceClass, RelevanceReport};
pub use relevance::{RelevanceConfig, RelevanceInterval};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent RNG stream `index` within `domain`, derived from `seed`.
/// Parallel work items each take their own stream so results do not depend
/// on scheduling.
pub fn child_rng(seed: u64, domain: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((domain << 40) | index);
    rng
}
