//! Exact verification of the matrix constructions, valuation identities and
//! combinatorial bookkeeping behind strong Banach property (T) for `Sp_4` over a
//! non-archimedean local field.

pub mod cli;
pub mod exactfield;
pub mod fourier;
pub mod sp4;
pub mod lemma_witnesses;
pub mod par;
pub mod verifiers;
pub mod zigzag;
