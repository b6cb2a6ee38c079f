//! Serializable views shared by the command line and the HTTP API, and the
//! tabular layouts for fronts and weight sweeps.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io;

use serde::{Deserialize, Serialize};

use crate::matrix::EvaluationMatrix;
use crate::select::{ParetoFront, SelectionResult};

/// Weight rows of the published sweep table, one per line, four criteria.
pub const TABLE3_PHI_CSV: &str = include_str!("../fixtures/table3_phi.csv");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontMember {
    pub combination_id: String,
    #[serde(default)]
    pub hyperparameters: BTreeMap<String, String>,
    pub raw: Vec<f64>,
    pub scaled: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontReport {
    pub members: Vec<FrontMember>,
}

impl FrontReport {
    pub fn new(matrix: &EvaluationMatrix, front: &ParetoFront) -> Self {
        let members = front
            .member_indices
            .iter()
            .zip(front.raw.iter().zip(&front.scaled))
            .map(|(&i, (raw, scaled))| {
                let c = &matrix.combinations()[i];
                FrontMember {
                    combination_id: c.id.clone(),
                    hyperparameters: c.hyperparameters.clone(),
                    raw: raw.values().to_vec(),
                    scaled: scaled.values().to_vec(),
                }
            })
            .collect();
        Self { members }
    }

    pub fn member_ids(&self) -> Vec<&str> {
        self.members
            .iter()
            .map(|m| m.combination_id.as_str())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionScore {
    pub combination_id: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectResponse {
    pub selected_id: String,
    pub hyperparameters: BTreeMap<String, String>,
    pub resolved_phi: Vec<f64>,
    pub projections: Vec<ProjectionScore>,
    pub front_member_ids: Vec<String>,
}

impl SelectResponse {
    pub fn new(matrix: &EvaluationMatrix, front: &ParetoFront, result: &SelectionResult) -> Self {
        let ids: Vec<String> = front
            .member_indices
            .iter()
            .map(|&i| matrix.combinations()[i].id.clone())
            .collect();
        Self {
            selected_id: result.selected_id.clone(),
            hyperparameters: result.hyperparameters.clone(),
            resolved_phi: result.resolved_weights.components().to_vec(),
            projections: ids
                .iter()
                .zip(&result.projections)
                .map(|(id, &score)| ProjectionScore {
                    combination_id: id.clone(),
                    score,
                })
                .collect(),
            front_member_ids: ids,
        }
    }
}

fn fmt_row(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| format!("{v:.6}"))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Plain-text listing of front members: hyperparameters, raw and scaled criteria.
pub fn front_table(matrix: &EvaluationMatrix, report: &FrontReport) -> String {
    let params = matrix.hyperparameter_names();
    let mut header = vec!["combination_id".to_string()];
    header.extend(params.iter().cloned());
    header.push(format!("raw({})", matrix.criteria_names().join(" ")));
    header.push("scaled".to_string());

    let rows: Vec<Vec<String>> = report
        .members
        .iter()
        .map(|m| {
            let mut row = vec![m.combination_id.clone()];
            row.extend(params.iter().map(|p| {
                m.hyperparameters
                    .get(p)
                    .cloned()
                    .unwrap_or_else(|| "-".into())
            }));
            row.push(fmt_row(&m.raw));
            row.push(fmt_row(&m.scaled));
            row
        })
        .collect();

    let widths: Vec<usize> = (0..header.len())
        .map(|j| {
            rows.iter()
                .map(|r| r[j].len())
                .chain([header[j].len()])
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut out = String::new();
    let mut line = |cells: &[String]| {
        let joined: Vec<String> = cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect();
        let _ = writeln!(out, "{}", joined.join(" | ").trim_end());
    };
    line(&header);
    line(&widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>());
    for r in &rows {
        line(r);
    }
    out
}

/// Writes the sweep as CSV: `phi_0..phi_{k-1},selected_id,<hyperparameter columns>`.
///
/// Hyperparameter columns are the sorted union over the matrix; a cell is empty
/// when the selected combination lacks that hyperparameter.
pub fn write_sweep_csv(
    matrix: &EvaluationMatrix,
    rows: &[(Vec<f64>, SelectionResult)],
    writer: impl io::Write,
) -> io::Result<()> {
    let params = matrix.hyperparameter_names();
    let mut csv = csv::Writer::from_writer(writer);
    let to_io = |e: csv::Error| io::Error::other(e.to_string());

    let mut header: Vec<String> = (0..matrix.n_criteria())
        .map(|j| format!("phi_{j}"))
        .collect();
    header.push("selected_id".into());
    header.extend(params.iter().cloned());
    csv.write_record(&header).map_err(to_io)?;

    for (phi, result) in rows {
        let mut record: Vec<String> = phi.iter().map(f64::to_string).collect();
        record.push(result.selected_id.clone());
        record.extend(
            params
                .iter()
                .map(|p| result.hyperparameters.get(p).cloned().unwrap_or_default()),
        );
        csv.write_record(&record).map_err(to_io)?;
    }
    csv.flush()
}

/// Error reading a weight file.
#[derive(Debug, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct PhiFileError {
    pub line: u64,
    pub message: String,
}

/// Reads weight rows from CSV. A first line that is not entirely numeric is
/// taken as a header and skipped.
pub fn read_phi_csv(reader: impl io::Read) -> Result<Vec<(u64, Vec<f64>)>, PhiFileError> {
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut out = Vec::new();
    for (i, rec) in csv.records().enumerate() {
        let rec = rec.map_err(|e| PhiFileError {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = rec.position().map_or(i as u64 + 1, |p| p.line());
        if rec.iter().all(str::is_empty) {
            continue;
        }
        let parsed: Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(phi) => out.push((line, phi)),
            Err(_) if i == 0 => continue,
            Err(_) => {
                return Err(PhiFileError {
                    line,
                    message: "weights must be numbers".into(),
                })
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::select::{pareto_front, sweep};

    #[test]
    fn table3_fixture_has_seventeen_rows() {
        let rows = read_phi_csv(TABLE3_PHI_CSV.as_bytes()).unwrap();
        assert_eq!(rows.len(), 17);
        assert!(rows.iter().all(|(_, phi)| phi.len() == 4));
        assert_eq!(rows[0].1, vec![0.5, 0.5, 0.5, 0.5]);
        assert_eq!(rows[13].1, vec![1.0, 0.0, 0.0, 0.0]);
        assert_eq!(rows[16].1, vec![0.0, 0.0, 0.0, 1.0]);
        assert_eq!(rows[0].0, 2);
    }

    #[test]
    fn phi_csv_reports_bad_lines() {
        let err = read_phi_csv("phi_0,phi_1\n1,0\n0.5,x\n".as_bytes()).unwrap_err();
        assert_eq!(err.line, 3);
        assert!(read_phi_csv("".as_bytes()).unwrap().is_empty());
        assert_eq!(
            read_phi_csv("1,0\n".as_bytes()).unwrap(),
            vec![(1, vec![1.0, 0.0])]
        );
    }

    #[test]
    fn front_report_and_table() {
        let m = EvaluationMatrix::from_rows([[1.0, 2.0], [2.0, 1.0], [2.0, 2.0]]).unwrap();
        let front = pareto_front(&m).unwrap();
        let report = FrontReport::new(&m, &front);
        assert_eq!(report.member_ids(), ["c0", "c1"]);
        let table = front_table(&m, &report);
        assert_eq!(table.lines().count(), 4);
        assert!(table.lines().nth(2).unwrap().starts_with("c0"));
        let json = serde_json::to_string(&report).unwrap();
        assert_eq!(serde_json::from_str::<FrontReport>(&json).unwrap(), report);
    }

    #[test]
    fn sweep_csv_layout() {
        let m = EvaluationMatrix::from_rows([[0.0, 4.0], [4.0, 0.0]]).unwrap();
        let rows = sweep(&m, &[vec![1.0, 0.0], vec![0.0, 0.0]]).unwrap();
        let mut buf = Vec::new();
        write_sweep_csv(&m, &rows, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "phi_0,phi_1,selected_id\n1,0,c0\n0,0,c0\n"
        );
    }
}
