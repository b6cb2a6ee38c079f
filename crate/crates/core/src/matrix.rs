//! The evaluation matrix: one row of criteria per hyperparameter combination,
//! kept both per task and aggregated over tasks.
//!
//! Every criterion is minimized. The matrix is validated on construction and on
//! deserialization, so a value of [`EvaluationMatrix`] always satisfies its
//! invariants.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::io;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Relative tolerance used when checking that the aggregated row is the task mean.
pub const AGGREGATE_TOLERANCE: f64 = 1e-12;

/// One value per criterion, lower is better.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CriteriaVector(Vec<f64>);

impl CriteriaVector {
    pub fn new(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl From<Vec<f64>> for CriteriaVector {
    fn from(values: Vec<f64>) -> Self {
        Self(values)
    }
}

impl<const N: usize> From<[f64; N]> for CriteriaVector {
    fn from(values: [f64; N]) -> Self {
        Self(values.to_vec())
    }
}

impl std::ops::Index<usize> for CriteriaVector {
    type Output = f64;

    fn index(&self, index: usize) -> &f64 {
        &self.0[index]
    }
}

impl fmt::Display for CriteriaVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{v}")?;
        }
        f.write_str(")")
    }
}

/// A single evaluated hyperparameter combination.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Combination {
    pub id: String,
    pub hyperparameters: BTreeMap<String, String>,
    pub per_task: BTreeMap<String, CriteriaVector>,
    pub aggregated: CriteriaVector,
}

impl Combination {
    /// A combination known only through its aggregated criteria (no per-task breakdown).
    pub fn aggregated_only(id: impl Into<String>, aggregated: impl Into<CriteriaVector>) -> Self {
        Self {
            id: id.into(),
            hyperparameters: BTreeMap::new(),
            per_task: BTreeMap::new(),
            aggregated: aggregated.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MatrixError {
    #[error("matrix declares no criteria")]
    NoCriteria,
    #[error("combination at position {position} has an empty id")]
    EmptyId { position: usize },
    #[error("duplicate combination id `{0}`")]
    DuplicateId(String),
    #[error("duplicate task id `{0}`")]
    DuplicateTask(String),
    #[error("combination `{id}`: {which} has {actual} criteria, expected {expected}")]
    Dimension {
        id: String,
        which: String,
        expected: usize,
        actual: usize,
    },
    #[error("combination `{id}`: {which} contains a non-finite value")]
    NonFinite { id: String, which: String },
    #[error("combination `{id}`: task set does not match the matrix task list")]
    TaskSet { id: String },
    #[error(
        "combination `{id}`: aggregated criterion {criterion} is {actual}, task mean is {expected}"
    )]
    Aggregate {
        id: String,
        criterion: usize,
        expected: f64,
        actual: f64,
    },
}

/// Combinations x criteria table, with the per-task rows it was aggregated from.
///
/// `tasks` may be empty, in which case combinations carry only an aggregated row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMatrix")]
pub struct EvaluationMatrix {
    criteria_names: Vec<String>,
    tasks: Vec<String>,
    combinations: Vec<Combination>,
}

#[derive(Deserialize)]
struct RawMatrix {
    criteria_names: Vec<String>,
    #[serde(default)]
    tasks: Vec<String>,
    combinations: Vec<Combination>,
}

impl TryFrom<RawMatrix> for EvaluationMatrix {
    type Error = MatrixError;

    fn try_from(raw: RawMatrix) -> Result<Self, Self::Error> {
        Self::new(raw.criteria_names, raw.tasks, raw.combinations)
    }
}

impl EvaluationMatrix {
    pub fn new(
        criteria_names: Vec<String>,
        tasks: Vec<String>,
        combinations: Vec<Combination>,
    ) -> Result<Self, MatrixError> {
        let matrix = Self {
            criteria_names,
            tasks,
            combinations,
        };
        matrix.validate()?;
        Ok(matrix)
    }

    /// Builds a task-less matrix from bare aggregated rows, ids `c0`, `c1`, ...
    /// and criteria names `k0`, `k1`, ...
    pub fn from_rows<R>(rows: impl IntoIterator<Item = R>) -> Result<Self, MatrixError>
    where
        R: Into<CriteriaVector>,
    {
        let combinations: Vec<Combination> = rows
            .into_iter()
            .enumerate()
            .map(|(i, row)| Combination::aggregated_only(format!("c{i}"), row))
            .collect();
        let n = combinations.first().map_or(0, |c| c.aggregated.len());
        let names = (0..n).map(|j| format!("k{j}")).collect();
        Self::new(names, Vec::new(), combinations)
    }

    fn validate(&self) -> Result<(), MatrixError> {
        let n = self.criteria_names.len();
        if n == 0 {
            return Err(MatrixError::NoCriteria);
        }
        let mut seen_tasks = HashSet::new();
        for t in &self.tasks {
            if !seen_tasks.insert(t.as_str()) {
                return Err(MatrixError::DuplicateTask(t.clone()));
            }
        }
        let mut seen = HashSet::new();
        for (position, c) in self.combinations.iter().enumerate() {
            if c.id.is_empty() {
                return Err(MatrixError::EmptyId { position });
            }
            if !seen.insert(c.id.as_str()) {
                return Err(MatrixError::DuplicateId(c.id.clone()));
            }
            check_vector(&c.id, "aggregated", &c.aggregated, n)?;
            if c.per_task.len() != self.tasks.len()
                || !self.tasks.iter().all(|t| c.per_task.contains_key(t))
            {
                return Err(MatrixError::TaskSet { id: c.id.clone() });
            }
            for (task, v) in &c.per_task {
                check_vector(&c.id, &format!("task `{task}`"), v, n)?;
            }
            if !self.tasks.is_empty() {
                let mean = task_mean(self.tasks.iter().map(|t| &c.per_task[t]), n);
                for (j, (&expected, &actual)) in mean.iter().zip(c.aggregated.values()).enumerate()
                {
                    let scale = expected.abs().max(actual.abs()).max(1.0);
                    if (expected - actual).abs() > AGGREGATE_TOLERANCE * scale {
                        return Err(MatrixError::Aggregate {
                            id: c.id.clone(),
                            criterion: j,
                            expected,
                            actual,
                        });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn criteria_names(&self) -> &[String] {
        &self.criteria_names
    }

    pub fn n_criteria(&self) -> usize {
        self.criteria_names.len()
    }

    pub fn tasks(&self) -> &[String] {
        &self.tasks
    }

    pub fn combinations(&self) -> &[Combination] {
        &self.combinations
    }

    pub fn len(&self) -> usize {
        self.combinations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.combinations.is_empty()
    }

    /// Aggregated rows in combination order.
    pub fn aggregated_rows(&self) -> Vec<CriteriaVector> {
        self.combinations
            .iter()
            .map(|c| c.aggregated.clone())
            .collect()
    }

    /// Sorted union of hyperparameter names across all combinations.
    pub fn hyperparameter_names(&self) -> Vec<String> {
        self.combinations
            .iter()
            .flat_map(|c| c.hyperparameters.keys().cloned())
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("matrix serialization is infallible")
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("matrix serialization is infallible")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    pub fn read_json(reader: impl io::Read) -> serde_json::Result<Self> {
        serde_json::from_reader(reader)
    }
}

fn check_vector(id: &str, which: &str, v: &CriteriaVector, n: usize) -> Result<(), MatrixError> {
    if v.len() != n {
        return Err(MatrixError::Dimension {
            id: id.to_string(),
            which: which.to_string(),
            expected: n,
            actual: v.len(),
        });
    }
    if !v.is_finite() {
        return Err(MatrixError::NonFinite {
            id: id.to_string(),
            which: which.to_string(),
        });
    }
    Ok(())
}

/// Elementwise arithmetic mean of task rows, summed in iteration order.
pub fn task_mean<'a>(rows: impl IntoIterator<Item = &'a CriteriaVector>, n: usize) -> Vec<f64> {
    let mut sum = vec![0.0; n];
    let mut count = 0usize;
    for row in rows {
        for (s, v) in sum.iter_mut().zip(row.values()) {
            *s += v;
        }
        count += 1;
    }
    sum.iter().map(|s| s / count as f64).collect()
}
