//! Run statistics and the estimators that compare them with the
//! deterministic predictions.

mod estimators;
mod histogram;
mod run;

pub use estimators::{
    cascade_tail_fit, component_stats, neighbor_type_law, red_scaling, total_variation, trajectory_distance,
    ComponentStats, NeighborLaw, RedScaling, TailFit, TrajectoryGap, MIN_TAIL_SAMPLES,
};
pub use histogram::Histogram;
pub use run::{run_simulation, FinalStats, RunStats, Simulation, SimulationConfig, StepStats};
