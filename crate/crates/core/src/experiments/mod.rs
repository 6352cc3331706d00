//! Seeded batch experiments: figure curves for the qutrit example, the
//! multiplicativity-violation study, and their CSV/SVG output.

mod config;
mod figures;
pub mod output;
pub mod sampling;
mod violation;

pub use config::{ExperimentConfig, OutputFormat};
pub use figures::{figure_curves, write_figures, CurvePoint, FigureData};
pub use sampling::{ginibre_state, task_rng, TaskRng};
pub use violation::{
    violation_experiment, violation_with, write_violation, ScatterRecord, Summary, ViolationReport,
};
