//! Random matrix ensembles and the suite that runs the bounds catalog over them.

mod ensemble;
mod suite;

pub use ensemble::{generate, EnsembleKind, EnsembleSpec};
pub use suite::{
    cell_instance, cell_seed, draw_params, run_suite, standard_maps, Aggregate, BoundReport, CellReport,
    EvaluationError, SuiteConfig, SuiteReport, TORUS_SAMPLES,
};
