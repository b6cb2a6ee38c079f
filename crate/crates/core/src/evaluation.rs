//! Run-log ingestion and criteria computation.
//!
//! A run log holds one test accuracy per (combination, task, fold, epoch).
//! Each fold is reduced to its best accuracy and the earliest epoch reaching
//! it; each (combination, task) is then described by four statistics over its
//! folds, and the tasks are averaged into the aggregated row.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::io;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::{task_mean, Combination, CriteriaVector, EvaluationMatrix, MatrixError};

pub const RUN_LOG_HEADER: [&str; 5] = ["combination_id", "task_id", "fold_id", "epoch", "accuracy"];

/// Criteria computed per task, in matrix column order.
pub const CRITERIA_NAMES: [&str; 4] = ["error_mean", "error_var", "epoch_mean", "epoch_var"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub combination_id: String,
    pub task_id: String,
    pub fold_id: String,
    /// 1-based.
    pub epoch: u32,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CombinationSpec {
    pub combination_id: String,
    pub hyperparameters: BTreeMap<String, String>,
}

/// Best accuracy of one fold and the earliest epoch that reached it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FoldSummary {
    pub max_accuracy: f64,
    pub convergence_epoch: u32,
}

/// One reason a matrix could not be built.
#[derive(Debug, Clone, PartialEq)]
pub enum Offender {
    UnknownCombination {
        combination: String,
    },
    MissingTasks {
        combination: String,
        missing: Vec<String>,
    },
    InsufficientFolds {
        combination: String,
        task: String,
        folds: usize,
    },
}

impl fmt::Display for Offender {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Offender::UnknownCombination { combination } => {
                write!(
                    f,
                    "combination `{combination}` is not in the combination specs"
                )
            }
            Offender::MissingTasks {
                combination,
                missing,
            } => {
                write!(
                    f,
                    "combination `{combination}` has no runs for task(s) {}",
                    missing.join(", ")
                )
            }
            Offender::InsufficientFolds {
                combination,
                task,
                folds,
            } => write!(
                f,
                "combination `{combination}`, task `{task}`: {folds} fold(s), at least 2 required"
            ),
        }
    }
}

#[derive(Debug, Error)]
pub enum EvaluationError {
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("run log contains no records")]
    EmptyInput,
    #[error("fold has no epochs")]
    EmptyFold,
    #[error("{folds} fold(s) given, at least 2 required for a sample variance")]
    TooFewFolds { folds: usize },
    #[error("invalid combination specs: {0}")]
    Specs(String),
    #[error("{} problem(s) building the matrix:\n  {}", .0.len(), .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("\n  "))]
    Build(Vec<Offender>),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Parses a run-log CSV. Line numbers in errors are 1-based and count the header.
pub fn parse_run_log(reader: impl io::Read) -> Result<Vec<RunRecord>, EvaluationError> {
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut rows = csv.records();

    let header = match rows.next() {
        None => {
            return Err(EvaluationError::Parse {
                line: 1,
                message: "missing header".into(),
            })
        }
        Some(r) => r.map_err(|e| csv_error(1, e))?,
    };
    if header.iter().ne(RUN_LOG_HEADER) {
        return Err(EvaluationError::Parse {
            line: 1,
            message: format!("expected header `{}`", RUN_LOG_HEADER.join(",")),
        });
    }

    let mut records = Vec::new();
    let mut keys: HashSet<(String, String, String, u32)> = HashSet::new();
    for row in rows {
        let row = row.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            csv_error(line, e)
        })?;
        let line = row.position().map_or(0, |p| p.line());
        let fail = |message: String| EvaluationError::Parse { line, message };
        if row.len() != RUN_LOG_HEADER.len() {
            return Err(fail(format!(
                "expected {} columns, found {}",
                RUN_LOG_HEADER.len(),
                row.len()
            )));
        }
        let epoch: u32 = row[3]
            .parse()
            .map_err(|_| fail(format!("epoch `{}` is not a positive integer", &row[3])))?;
        if epoch == 0 {
            return Err(fail("epoch must be at least 1".into()));
        }
        let accuracy: f64 = row[4]
            .parse()
            .map_err(|_| fail(format!("accuracy `{}` is not a number", &row[4])))?;
        if !(0.0..=1.0).contains(&accuracy) {
            return Err(fail(format!("accuracy {} outside [0, 1]", &row[4])));
        }
        for (i, name) in RUN_LOG_HEADER.iter().enumerate().take(3) {
            if row[i].is_empty() {
                return Err(fail(format!("empty {name}")));
            }
        }
        let key = (
            row[0].to_string(),
            row[1].to_string(),
            row[2].to_string(),
            epoch,
        );
        if !keys.insert(key) {
            return Err(fail(format!(
                "duplicate record for combination `{}`, task `{}`, fold `{}`, epoch {epoch}",
                &row[0], &row[1], &row[2]
            )));
        }
        records.push(RunRecord {
            combination_id: row[0].to_string(),
            task_id: row[1].to_string(),
            fold_id: row[2].to_string(),
            epoch,
            accuracy,
        });
    }
    Ok(records)
}

fn csv_error(line: u64, e: csv::Error) -> EvaluationError {
    EvaluationError::Parse {
        line,
        message: e.to_string(),
    }
}

pub fn write_run_log(records: &[RunRecord], writer: impl io::Write) -> Result<(), EvaluationError> {
    let mut csv = csv::Writer::from_writer(writer);
    let to_io = |e: csv::Error| io::Error::other(e.to_string());
    csv.write_record(RUN_LOG_HEADER).map_err(to_io)?;
    for r in records {
        csv.write_record([
            r.combination_id.as_str(),
            r.task_id.as_str(),
            r.fold_id.as_str(),
            &r.epoch.to_string(),
            &r.accuracy.to_string(),
        ])
        .map_err(to_io)?;
    }
    csv.flush()?;
    Ok(())
}

pub fn read_combination_specs(
    reader: impl io::Read,
) -> Result<Vec<CombinationSpec>, EvaluationError> {
    let specs: Vec<CombinationSpec> =
        serde_json::from_reader(reader).map_err(|e| EvaluationError::Specs(e.to_string()))?;
    validate_specs(&specs)?;
    Ok(specs)
}

pub fn write_combination_specs(
    specs: &[CombinationSpec],
    writer: impl io::Write,
) -> Result<(), EvaluationError> {
    serde_json::to_writer_pretty(writer, specs).map_err(|e| EvaluationError::Specs(e.to_string()))
}

fn validate_specs(specs: &[CombinationSpec]) -> Result<(), EvaluationError> {
    let mut seen = HashSet::new();
    for s in specs {
        if s.combination_id.is_empty() {
            return Err(EvaluationError::Specs("empty combination_id".into()));
        }
        if !seen.insert(s.combination_id.as_str()) {
            return Err(EvaluationError::Specs(format!(
                "duplicate combination_id `{}`",
                s.combination_id
            )));
        }
        if s.hyperparameters.keys().any(String::is_empty) {
            return Err(EvaluationError::Specs(format!(
                "combination `{}` has an empty hyperparameter name",
                s.combination_id
            )));
        }
    }
    Ok(())
}

/// Maximum accuracy over the epochs and the earliest epoch attaining it.
pub fn summarize_fold(epochs: &[(u32, f64)]) -> Result<FoldSummary, EvaluationError> {
    let mut best: Option<FoldSummary> = None;
    for &(epoch, accuracy) in epochs {
        let better = match best {
            None => true,
            Some(b) => {
                accuracy > b.max_accuracy
                    || (accuracy == b.max_accuracy && epoch < b.convergence_epoch)
            }
        };
        if better {
            best = Some(FoldSummary {
                max_accuracy: accuracy,
                convergence_epoch: epoch,
            });
        }
    }
    best.ok_or(EvaluationError::EmptyFold)
}

/// Running mean and unbiased variance (Welford).
#[derive(Default)]
struct Moments {
    n: usize,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn sample_variance(&self) -> f64 {
        (self.m2 / (self.n - 1) as f64).max(0.0)
    }
}

/// `(error mean, error variance, epoch mean, epoch variance)` over folds,
/// with error = 1 - max accuracy and variances using the n - 1 denominator.
pub fn compute_task_criteria(folds: &[FoldSummary]) -> Result<CriteriaVector, EvaluationError> {
    if folds.len() < 2 {
        return Err(EvaluationError::TooFewFolds { folds: folds.len() });
    }
    let mut error = Moments::default();
    let mut epoch = Moments::default();
    for f in folds {
        error.push(1.0 - f.max_accuracy);
        epoch.push(f64::from(f.convergence_epoch));
    }
    Ok(CriteriaVector::from([
        error.mean,
        error.sample_variance(),
        epoch.mean,
        epoch.sample_variance(),
    ]))
}

/// Builds the matrix. Combination order follows `specs`; tasks are sorted by id.
pub fn build_matrix(
    records: &[RunRecord],
    specs: &[CombinationSpec],
) -> Result<EvaluationMatrix, EvaluationError> {
    if records.is_empty() {
        return Err(EvaluationError::EmptyInput);
    }
    validate_specs(specs)?;
    let known: HashMap<&str, usize> = specs
        .iter()
        .enumerate()
        .map(|(i, s)| (s.combination_id.as_str(), i))
        .collect();

    let mut offenders = Vec::new();
    let mut unknown = BTreeSet::new();
    let mut tasks = BTreeSet::new();
    // (spec index, task) -> fold -> epochs
    type Folds<'a> = BTreeMap<&'a str, Vec<(u32, f64)>>;
    let mut grouped: BTreeMap<(usize, &str), Folds> = BTreeMap::new();
    for r in records {
        tasks.insert(r.task_id.as_str());
        match known.get(r.combination_id.as_str()) {
            Some(&i) => grouped
                .entry((i, r.task_id.as_str()))
                .or_default()
                .entry(r.fold_id.as_str())
                .or_default()
                .push((r.epoch, r.accuracy)),
            None => {
                unknown.insert(r.combination_id.as_str());
            }
        }
    }
    offenders.extend(unknown.into_iter().map(|c| Offender::UnknownCombination {
        combination: c.to_string(),
    }));

    let task_ids: Vec<String> = tasks.iter().map(|t| t.to_string()).collect();
    let n = CRITERIA_NAMES.len();
    let mut combinations = Vec::with_capacity(specs.len());
    for (i, spec) in specs.iter().enumerate() {
        let mut per_task = BTreeMap::new();
        let mut missing = Vec::new();
        for &task in &tasks {
            let Some(folds) = grouped.get(&(i, task)) else {
                missing.push(task.to_string());
                continue;
            };
            let summaries = folds
                .values()
                .map(|epochs| summarize_fold(epochs))
                .collect::<Result<Vec<_>, _>>()?;
            match compute_task_criteria(&summaries) {
                Ok(v) => {
                    per_task.insert(task.to_string(), v);
                }
                Err(EvaluationError::TooFewFolds { folds }) => {
                    offenders.push(Offender::InsufficientFolds {
                        combination: spec.combination_id.clone(),
                        task: task.to_string(),
                        folds,
                    });
                }
                Err(e) => return Err(e),
            }
        }
        if !missing.is_empty() {
            offenders.push(Offender::MissingTasks {
                combination: spec.combination_id.clone(),
                missing,
            });
        }
        if per_task.len() == task_ids.len() {
            let aggregated = task_mean(task_ids.iter().map(|t| &per_task[t]), n);
            combinations.push(Combination {
                id: spec.combination_id.clone(),
                hyperparameters: spec.hyperparameters.clone(),
                per_task,
                aggregated: aggregated.into(),
            });
        }
    }
    if !offenders.is_empty() {
        return Err(EvaluationError::Build(offenders));
    }
    let names = CRITERIA_NAMES.iter().map(|s| s.to_string()).collect();
    Ok(EvaluationMatrix::new(names, task_ids, combinations)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(c: &str, t: &str, f: &str, epoch: u32, accuracy: f64) -> RunRecord {
        RunRecord {
            combination_id: c.into(),
            task_id: t.into(),
            fold_id: f.into(),
            epoch,
            accuracy,
        }
    }

    fn spec(id: &str) -> CombinationSpec {
        CombinationSpec {
            combination_id: id.into(),
            hyperparameters: BTreeMap::from([("base_lr".into(), "0.01".into())]),
        }
    }

    fn fold(max_accuracy: f64, convergence_epoch: u32) -> FoldSummary {
        FoldSummary {
            max_accuracy,
            convergence_epoch,
        }
    }

    const HEADER: &str = "combination_id,task_id,fold_id,epoch,accuracy\n";

    #[test]
    fn parses_single_row() {
        let text = format!("{HEADER}c0,t0,f0,1,0.5\n");
        let r = parse_run_log(text.as_bytes()).unwrap();
        assert_eq!(r, vec![rec("c0", "t0", "f0", 1, 0.5)]);
    }

    #[test]
    fn accepts_crlf() {
        let text = "combination_id,task_id,fold_id,epoch,accuracy\r\nc0,t0,f0,2,0.25\r\n";
        assert_eq!(parse_run_log(text.as_bytes()).unwrap().len(), 1);
    }

    fn parse_err(body: &str) -> (u64, String) {
        match parse_run_log(format!("{HEADER}{body}").as_bytes()).unwrap_err() {
            EvaluationError::Parse { line, message } => (line, message),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_out_of_range_accuracy_with_line() {
        let (line, msg) = parse_err("c0,t0,f0,1,1.3\n");
        assert_eq!(line, 2);
        assert!(msg.contains("1.3"));
    }

    #[test]
    fn rejects_malformed_rows() {
        assert_eq!(parse_err("c0,t0,f0,1,0.5\nc0,t0,f0,2\n").0, 3);
        assert_eq!(parse_err("c0,t0,f0,1,0.5,9\n").0, 2);
        assert_eq!(parse_err("c0,t0,f0,x,0.5\n").0, 2);
        assert_eq!(parse_err("c0,t0,f0,0,0.5\n").0, 2);
        assert_eq!(parse_err("c0,t0,f0,1,abc\n").0, 2);
        assert_eq!(parse_err("c0,t0,f0,1,NaN\n").0, 2);
        assert_eq!(parse_err(",t0,f0,1,0.5\n").0, 2);
        let (line, msg) = parse_err("c0,t0,f0,1,0.5\nc0,t0,f0,1,0.6\n");
        assert_eq!(line, 3);
        assert!(msg.contains("duplicate"));
    }

    #[test]
    fn rejects_bad_or_missing_header() {
        assert!(matches!(
            parse_run_log("".as_bytes()),
            Err(EvaluationError::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_run_log("a,b,c,d,e\n".as_bytes()),
            Err(EvaluationError::Parse { line: 1, .. })
        ));
        assert!(parse_run_log(HEADER.as_bytes()).unwrap().is_empty());
    }

    #[test]
    fn fold_summary_examples() {
        assert_eq!(
            summarize_fold(&[(1, 0.5), (2, 0.7), (3, 0.6)]).unwrap(),
            fold(0.7, 2)
        );
        assert_eq!(
            summarize_fold(&[(1, 0.4), (2, 0.8), (3, 0.8)]).unwrap(),
            fold(0.8, 2)
        );
        assert_eq!(
            summarize_fold(&[(3, 0.8), (2, 0.8), (1, 0.4)]).unwrap(),
            fold(0.8, 2)
        );
        assert_eq!(summarize_fold(&[(1, 0.9)]).unwrap(), fold(0.9, 1));
        assert!(matches!(
            summarize_fold(&[]),
            Err(EvaluationError::EmptyFold)
        ));
    }

    #[test]
    fn criteria_examples() {
        let v = compute_task_criteria(&[fold(0.7, 2), fold(0.8, 2)]).unwrap();
        // errors are 1 - 0.7 and 1 - 0.8 in binary floating point, so the
        // variance lands a few ulps away from the decimal 0.005
        assert_eq!(v[0], 0.25);
        assert!((v[1] - 0.005).abs() < 1e-15);
        assert_eq!(v[2], 2.0);
        assert_eq!(v[3], 0.0);

        let v = compute_task_criteria(&[fold(0.9, 5), fold(0.9, 5)]).unwrap();
        assert_eq!(v.values(), &[1.0 - 0.9, 0.0, 5.0, 0.0]);

        let v = compute_task_criteria(&[fold(1.0, 1), fold(1.0, 3)]).unwrap();
        assert_eq!(v.values(), &[0.0, 0.0, 2.0, 2.0]);

        assert!(matches!(
            compute_task_criteria(&[fold(1.0, 1)]),
            Err(EvaluationError::TooFewFolds { folds: 1 })
        ));
    }

    /// Records whose per-task criteria are known exactly: two folds, one epoch each.
    fn two_fold_task(c: &str, t: &str, acc: (f64, f64)) -> Vec<RunRecord> {
        vec![rec(c, t, "f0", 1, acc.0), rec(c, t, "f1", 1, acc.1)]
    }

    #[test]
    fn builds_matrix_and_aggregates() {
        let mut records = two_fold_task("a", "t0", (0.75, 0.75));
        records.extend(two_fold_task("a", "t1", (0.25, 0.25)));
        let m = build_matrix(&records, &[spec("a")]).unwrap();
        assert_eq!(m.criteria_names(), CRITERIA_NAMES);
        assert_eq!(m.tasks(), ["t0", "t1"]);
        let c = &m.combinations()[0];
        assert_eq!(c.per_task["t0"].values(), &[0.25, 0.0, 1.0, 0.0]);
        assert_eq!(c.per_task["t1"].values(), &[0.75, 0.0, 1.0, 0.0]);
        assert_eq!(c.aggregated.values(), &[0.5, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn combination_order_follows_specs() {
        let mut records = two_fold_task("b", "t0", (0.5, 0.5));
        records.extend(two_fold_task("a", "t0", (0.5, 0.5)));
        let m = build_matrix(&records, &[spec("b"), spec("a")]).unwrap();
        let ids: Vec<_> = m.combinations().iter().map(|c| c.id.as_str()).collect();
        assert_eq!(ids, ["b", "a"]);
    }

    #[test]
    fn lists_every_offender() {
        let mut records = two_fold_task("a", "t0", (0.5, 0.5));
        records.extend(two_fold_task("a", "t1", (0.5, 0.5)));
        records.extend(two_fold_task("b", "t0", (0.5, 0.5)));
        records.push(rec("b", "t1", "f0", 1, 0.5));
        records.extend(two_fold_task("zz", "t0", (0.5, 0.5)));
        let err = build_matrix(&records, &[spec("a"), spec("b"), spec("c")]).unwrap_err();
        let EvaluationError::Build(offenders) = err else {
            panic!("expected build error");
        };
        assert_eq!(
            offenders,
            vec![
                Offender::UnknownCombination {
                    combination: "zz".into()
                },
                Offender::InsufficientFolds {
                    combination: "b".into(),
                    task: "t1".into(),
                    folds: 1
                },
                Offender::MissingTasks {
                    combination: "c".into(),
                    missing: vec!["t0".into(), "t1".into()]
                },
            ]
        );
    }

    #[test]
    fn empty_records_and_bad_specs() {
        assert!(matches!(
            build_matrix(&[], &[spec("a")]),
            Err(EvaluationError::EmptyInput)
        ));
        let records = two_fold_task("a", "t0", (0.5, 0.5));
        assert!(matches!(
            build_matrix(&records, &[spec("a"), spec("a")]),
            Err(EvaluationError::Specs(_))
        ));
    }

    #[test]
    fn specs_json_round_trip() {
        let specs = vec![spec("a"), spec("b")];
        let mut buf = Vec::new();
        write_combination_specs(&specs, &mut buf).unwrap();
        assert_eq!(read_combination_specs(buf.as_slice()).unwrap(), specs);
        let text = r#"[{"combination_id": "x", "hyperparameters": {"": "1"}}]"#;
        assert!(read_combination_specs(text.as_bytes()).is_err());
    }
}
