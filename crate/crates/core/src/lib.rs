//! Post-hoc hyperparameter selection over several tasks and several criteria.
//!
//! Completed training runs are reduced to an [`EvaluationMatrix`]: per
//! combination, four statistics of classification error and convergence epoch
//! over cross-validation folds, averaged over test tasks. Selection keeps the
//! Pareto-optimal combinations, min-max scales them per criterion and picks the
//! one whose scaled row has the smallest projection onto a user-chosen vector
//! of criteria significances.
//!
//! ```
//! use mtmc::{select, EvaluationMatrix};
//!
//! let matrix = EvaluationMatrix::from_rows([[0.0, 4.0], [2.0, 2.0], [4.0, 0.0], [3.0, 3.0]]).unwrap();
//! let chosen = select(&matrix, &[0.0, 1.0]).unwrap();
//! assert_eq!(chosen.selected_id, "c2");
//! ```

pub mod cli;
pub mod evaluation;
pub mod matrix;
pub mod report;
pub mod select;
pub mod service;
pub mod synth;

pub use evaluation::{
    build_matrix, compute_task_criteria, parse_run_log, summarize_fold, CombinationSpec,
    EvaluationError, FoldSummary, RunRecord, CRITERIA_NAMES,
};
pub use matrix::{Combination, CriteriaVector, EvaluationMatrix, MatrixError};
pub use select::{
    dominates, pareto_front, project, resolve_weights, scale_front, select, sweep, ParetoFront,
    SelectError, SelectionResult, WeightVector,
};
pub use synth::{generate, SynthConfig, SynthError};
