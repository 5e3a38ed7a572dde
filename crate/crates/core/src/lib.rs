//! Deterministic random walks on Markov chains.
//!
//! Tokens are moved by deterministic routers whose per-edge emission counts
//! track the expected flow `χ_v · P_{v,u}`. The crate simulates those walks,
//! measures their discrepancy against the expected evolution `μ^(t)`, and
//! evaluates the closed-form bounds for four routers: shortest remaining
//! time, billiard, quasi-random (van der Corput) and rotor.

pub mod analysis;
pub mod chain;
pub mod chains;
pub mod cli;
pub mod engine;
pub mod error;
pub mod router;

pub use analysis::{
    bound_coefficients, check_bounds, discrepancy, dtv_sum, lemma1_residual, theoretical_bound, BoundInputs,
    DiscrepancyReport,
};
pub use chain::{
    mixing_profile, mixing_rate, point_wise_distance, stationary_distribution, total_variation, validate_chain,
    ChainProfile, Distribution, TransitionMatrix, ValidationReport,
};
pub use engine::{run, run_with_routers, step, InitialConfig, RunOptions, StepFlow, TokenConfiguration, TokenTrace};
pub use error::{Error, Result};
pub use router::{interval_count, van_der_corput, Router, RouterKind, RouterState, ScriptedRouter};
