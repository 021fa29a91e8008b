//! Orchestration: configuration, time ladder, scaling fits, the inflation
//! pipeline and sweeps.

pub mod config;
pub mod inflation;
pub mod ladder;
pub mod scaling;
pub mod sweep;

pub use config::{ExperimentConfig, FamilyConfig, NormSettings, ScalingPlan, SolverSettings, SweepAxes};
pub use inflation::{run_inflation_experiment, run_with_scaling, scaling_fits, InflationReport};
pub use ladder::{build_time_ladder, LadderEntry, TimeLadder};
pub use scaling::{fit_power_law, measure_scaling, Axis, Component, ScalingBase, ScalingFit};
pub use sweep::{sweep, SweepOutcome, SweepRow, SweepSummary};
