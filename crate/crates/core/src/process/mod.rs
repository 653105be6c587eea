//! The randomized coloring process on finite graphs.

mod graph;
mod phases;
mod rng;
mod rules;
mod solver;
mod state;

pub use graph::{gen_regular_graph, parse_fixture, tree_ball, Fixture, Graph, GraphKind, MAX_REPAIR_ATTEMPTS};
pub use phases::{
    buffer_rounds, complete_remainder, run_phase1, tidy_to_proper, BufferReport, CompletionReport, StepRecord,
    TidyReport,
};
pub use rng::{KeyedRng, PermutedPalette, Randomness, Stream};
pub use rules::{greedy_step, trace_cascade, CascadeRecord, StepReport};
pub use solver::{solve_list_coloring, SolveOutcome, NODE_BUDGET};
pub use state::{Color, ColoringState};
