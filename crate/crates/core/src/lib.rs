//! Exact block discrepancies of binary sequences and seeded experiments on
//! `s`-uniform distribution.
//!
//! * [`bitseq`]: packed bit sequences, seeded generation, text/packed I/O
//! * [`discrepancy`]: exact `D(t,n)`, `D_k(t,n)` and checkpointed profiles
//! * [`thresholds`]: schedules `s(n)`, the margin `φ_s`, prefix order,
//!   inverse and domination of integer sequences
//! * [`montecarlo`]: deterministic parallel experiments and the exact
//!   binomial law of `D(t,n)`
//! * [`report`]: CSV/JSON schemas

pub mod bitseq;
pub mod discrepancy;
pub mod error;
pub mod montecarlo;
pub mod report;
pub mod rng;
pub mod thresholds;

pub use bitseq::{generate, BitSequence, Seed};
pub use discrepancy::{
    d1, dk, dk_bounded, profile, BlockCountTable, DiscrepancyValue, ProfilePoint, DEFAULT_K_MAX,
};
pub use error::{Error, Result};
pub use montecarlo::{
    exact_d1_distribution, regime_compare, run, run_trials, Checkpoints, ExperimentResult,
    ExperimentSpec, NamedSchedule, TrendReport,
};
pub use report::ResultDocument;
pub use thresholds::{admissible, phi, phi_fn, Eval, FinitePrefixSeq, PointwiseOrder, ThresholdFn};
