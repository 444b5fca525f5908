//! Exhaustive and sampled checks of the discrete claims: Cartan cells, `k₁ ∈ K`,
//! congruences, the `K = (K₁K₂)^{30}` decomposition, averaging and parity volumes.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::exactfield::FieldError;
use crate::lemma_witnesses::WitnessError;
use crate::sp4::Sp4Error;

pub mod averaging;
pub mod cells;
pub mod decompose;
pub mod haar;
pub mod identities;
pub mod parity;
pub mod report;

pub use report::{Mode, Status, VerificationReport};

/// Largest number of witness evaluations an exhaustive run may perform.
pub const MAX_EVALUATIONS: u64 = 10_000_000;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error(transparent)]
    Witness(#[from] WitnessError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Group(#[from] Sp4Error),
    #[error("enumeration needs {needed} evaluations, over the limit {limit}; use sample mode")]
    Budget { needed: u64, limit: u64 },
    #[error("{0}")]
    Precondition(String),
}

/// Independent RNG stream for a task under a global seed.
pub fn task_rng(seed: u64, task: &str) -> ChaCha8Rng {
    // FNV-1a of the task name mixed into the seed
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in task.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    ChaCha8Rng::seed_from_u64(seed ^ h)
}
