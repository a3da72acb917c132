//! Exact VC-dimension toolkit for finite binary hypothesis spaces and their
//! similarity lifts.
//!
//! * [`space`]: canonical hypothesis spaces, restriction and shattering.
//! * [`vc`]: level-wise exact VC search and a brute-force oracle.
//! * [`similarity`]: the pair-domain lift, chain witnesses and forest tools.
//! * [`bounds`]: binomial sums, Sauer–Shelah, binary entropy, bound constants.
//! * [`families`]: k-sparse, cube, seeded random and exhaustive spaces.
//! * [`experiments`]: per-space bound reports, ratio search, report files.

pub mod bounds;
pub mod error;
pub mod experiments;
pub mod families;
pub mod io;
pub mod similarity;
pub mod space;
pub mod vc;

pub use error::{Error, Result};
pub use space::{make_space, DomainIndex, Hypothesis, HypothesisSpace, ShatterWitness, Shattering, Subset};
pub use vc::{vc_exact, vc_exact_with, vc_naive, VcOptions, VcResult};
