//! Selection over the Pareto front.
//!
//! The pipeline is: resolve the criteria-significance weights, extract the
//! non-dominated combinations, min-max scale them per criterion, project each
//! scaled row onto the weight vector and take the smallest projection.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::{CriteriaVector, EvaluationMatrix};

/// Weight substituted for every component when all supplied weights are zero.
pub const FALLBACK_WEIGHT: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SelectError {
    #[error("dimension mismatch: expected {expected} components, got {actual}")]
    Dimension { expected: usize, actual: usize },
    #[error("weight component {component} is {value}, must lie in [0, 1]")]
    Range { component: usize, value: f64 },
    #[error("no combinations to select from")]
    EmptyInput,
    #[error("weight vector has zero norm")]
    ZeroNorm,
    #[error("phi row {row}: {source}")]
    SweepRow {
        row: usize,
        #[source]
        source: Box<SelectError>,
    },
}

impl SelectError {
    /// Offending weight component, if the error is about one.
    pub fn component(&self) -> Option<usize> {
        match self {
            SelectError::Range { component, .. } => Some(*component),
            SelectError::SweepRow { source, .. } => source.component(),
            _ => None,
        }
    }
}

/// Criteria-significance coefficients, one per criterion, each in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn components(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|w| w * w).sum::<f64>().sqrt()
    }
}

/// Non-dominated combinations of a matrix, in ascending matrix order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoFront {
    pub member_indices: Vec<usize>,
    pub raw: Vec<CriteriaVector>,
    pub scaled: Vec<CriteriaVector>,
}

impl ParetoFront {
    pub fn len(&self) -> usize {
        self.member_indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.member_indices.is_empty()
    }

    /// Position of a matrix index within the front, if it is a member.
    pub fn position_of(&self, matrix_index: usize) -> Option<usize> {
        self.member_indices.binary_search(&matrix_index).ok()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    pub selected_index: usize,
    pub selected_id: String,
    pub hyperparameters: BTreeMap<String, String>,
    /// Aligned with `ParetoFront::member_indices`.
    pub projections: Vec<f64>,
    pub resolved_weights: WeightVector,
}

/// Weak Pareto dominance for minimization: `a` is nowhere worse and somewhere better.
pub fn dominates(a: &[f64], b: &[f64]) -> Result<bool, SelectError> {
    if a.len() != b.len() {
        return Err(SelectError::Dimension {
            expected: a.len(),
            actual: b.len(),
        });
    }
    Ok(dominates_unchecked(a, b))
}

fn dominates_unchecked(a: &[f64], b: &[f64]) -> bool {
    let mut strictly = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        if x < y {
            strictly = true;
        }
    }
    strictly
}

fn lexicographic(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        // rows are validated finite, so partial_cmp never fails
        match x.partial_cmp(y).unwrap_or(Ordering::Equal) {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    Ordering::Equal
}

/// Indices of the non-dominated rows, ascending.
///
/// Rows are visited in lexicographic order. Any dominator of a row sorts
/// strictly before it, and by transitivity some non-dominated dominator does
/// too, so each row only needs checking against the members kept so far.
pub fn non_dominated_indices(rows: &[CriteriaVector]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..rows.len()).collect();
    order.sort_by(|&i, &j| lexicographic(rows[i].values(), rows[j].values()).then(i.cmp(&j)));

    let mut members: Vec<usize> = Vec::new();
    for i in order {
        let row = rows[i].values();
        if !members
            .iter()
            .any(|&m| dominates_unchecked(rows[m].values(), row))
        {
            members.push(i);
        }
    }
    members.sort_unstable();
    members
}

/// Extracts the Pareto front of the matrix's aggregated rows and scales it.
pub fn pareto_front(matrix: &EvaluationMatrix) -> Result<ParetoFront, SelectError> {
    front_of_rows(&matrix.aggregated_rows())
}

/// Pareto front of bare rows; the rows must share one length and be finite.
pub fn front_of_rows(rows: &[CriteriaVector]) -> Result<ParetoFront, SelectError> {
    let first = rows.first().ok_or(SelectError::EmptyInput)?;
    check_rows(rows, first.len())?;
    let member_indices = non_dominated_indices(rows);
    let raw: Vec<CriteriaVector> = member_indices.iter().map(|&i| rows[i].clone()).collect();
    let scaled = scale_front(&raw)?;
    Ok(ParetoFront {
        member_indices,
        raw,
        scaled,
    })
}

fn check_rows(rows: &[CriteriaVector], n: usize) -> Result<(), SelectError> {
    for row in rows {
        if row.len() != n {
            return Err(SelectError::Dimension {
                expected: n,
                actual: row.len(),
            });
        }
    }
    Ok(())
}

/// Per-criterion min-max scaling onto `[0, 1]`.
///
/// A criterion that is constant over the rows scales to 0 in every row.
pub fn scale_front(rows: &[CriteriaVector]) -> Result<Vec<CriteriaVector>, SelectError> {
    let first = rows.first().ok_or(SelectError::EmptyInput)?;
    let n = first.len();
    check_rows(rows, n)?;

    let mut lo = vec![f64::INFINITY; n];
    let mut hi = vec![f64::NEG_INFINITY; n];
    for row in rows {
        for (j, &v) in row.values().iter().enumerate() {
            lo[j] = lo[j].min(v);
            hi[j] = hi[j].max(v);
        }
    }

    Ok(rows
        .iter()
        .map(|row| {
            row.values()
                .iter()
                .enumerate()
                .map(|(j, &v)| scale_value(v, lo[j], hi[j]))
                .collect::<Vec<f64>>()
                .into()
        })
        .collect())
}

fn scale_value(v: f64, lo: f64, hi: f64) -> f64 {
    if hi == lo {
        return 0.0;
    }
    let range = hi - lo;
    if range.is_finite() {
        (v - lo) / range
    } else {
        // range overflowed; halve both sides first
        (v / 2.0 - lo / 2.0) / (hi / 2.0 - lo / 2.0)
    }
}

/// Validates the weights and substitutes `(0.5, ..., 0.5)` when all are zero.
pub fn resolve_weights(phi: &[f64], n_criteria: usize) -> Result<WeightVector, SelectError> {
    if phi.len() != n_criteria {
        return Err(SelectError::Dimension {
            expected: n_criteria,
            actual: phi.len(),
        });
    }
    for (component, &value) in phi.iter().enumerate() {
        if !(0.0..=1.0).contains(&value) {
            return Err(SelectError::Range { component, value });
        }
    }
    if phi.iter().all(|&w| w == 0.0) {
        log::info!(
            "all criteria weights are zero; using ({}) instead",
            vec![FALLBACK_WEIGHT.to_string(); n_criteria].join(", ")
        );
        return Ok(WeightVector(vec![FALLBACK_WEIGHT; n_criteria]));
    }
    Ok(WeightVector(phi.to_vec()))
}

/// Scalar projection of each scaled row onto the weight vector.
///
/// Zero-weight criteria are skipped outright, so their column never enters the sum.
pub fn project(scaled: &[CriteriaVector], phi: &WeightVector) -> Result<Vec<f64>, SelectError> {
    let norm = phi.norm();
    if norm == 0.0 {
        return Err(SelectError::ZeroNorm);
    }
    check_rows(scaled, phi.len())?;
    Ok(scaled
        .iter()
        .map(|row| {
            let dot: f64 = row
                .values()
                .iter()
                .zip(phi.components())
                .filter(|(_, &w)| w != 0.0)
                .map(|(s, w)| s * w)
                .sum();
            dot / norm
        })
        .collect())
}

/// Position of the first minimum; ties resolve to the earliest position.
fn argmin(values: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &v) in values.iter().enumerate() {
        match best {
            Some(b) if values[b] <= v => {}
            _ => best = Some(i),
        }
    }
    best
}

/// Full selection: weights, front, projection, argmin.
pub fn select(matrix: &EvaluationMatrix, phi: &[f64]) -> Result<SelectionResult, SelectError> {
    let weights = resolve_weights(phi, matrix.n_criteria())?;
    let front = pareto_front(matrix)?;
    select_on_front(matrix, &front, weights)
}

/// Selection against a front computed earlier for the same matrix.
pub fn select_on_front(
    matrix: &EvaluationMatrix,
    front: &ParetoFront,
    weights: WeightVector,
) -> Result<SelectionResult, SelectError> {
    let projections = project(&front.scaled, &weights)?;
    let position = argmin(&projections).ok_or(SelectError::EmptyInput)?;
    let selected_index = front.member_indices[position];
    let combination = &matrix.combinations()[selected_index];
    Ok(SelectionResult {
        selected_index,
        selected_id: combination.id.clone(),
        hyperparameters: combination.hyperparameters.clone(),
        projections,
        resolved_weights: weights,
    })
}

/// One selection per weight vector, in input order. The front is computed once.
pub fn sweep(
    matrix: &EvaluationMatrix,
    phi_list: &[Vec<f64>],
) -> Result<Vec<(Vec<f64>, SelectionResult)>, SelectError> {
    let weights = phi_list
        .iter()
        .enumerate()
        .map(|(row, phi)| {
            resolve_weights(phi, matrix.n_criteria()).map_err(|e| SelectError::SweepRow {
                row,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    if phi_list.is_empty() {
        return Ok(Vec::new());
    }
    let front = pareto_front(matrix)?;
    phi_list
        .iter()
        .zip(weights)
        .map(|(phi, w)| Ok((phi.clone(), select_on_front(matrix, &front, w)?)))
        .collect()
}
