//! High-low frequency machinery: data splitting, the interaction term and the
//! iterated scheme with its ledger.

pub mod bourgain;
pub mod interaction;
pub mod split;

pub use bourgain::{
    bourgain_iterate, step_time, BourgainConfig, IterationLedger, LedgerRow, LedgerSummary,
};
pub use interaction::{solve_interaction, InteractionSolution};
pub use split::{split_at_radius, split_data, SplitResult};
