//! Task losses from CSV data: feature columns followed by one label column.

use std::io::Read;
use std::path::Path;

use crdc_core::mtl::{mean_squared_linear, MtlError, TaskSpec};
use crdc_core::scalar::parse_rational;
use crdc_core::{Dim, Rational};
use serde::Deserialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
pub enum LossKind {
    /// `(1/D) Σ_d (⟨x_d, (W₀, Wᵢ)⟩ − y_d)²`
    #[serde(rename = "meanSquaredLinear")]
    MeanSquaredLinear,
}

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Csv(#[from] csv::Error),
    #[error("no data rows")]
    Empty,
    #[error("row {row} has {found} cells, expected {expected}")]
    Ragged { row: usize, expected: usize, found: usize },
    #[error("row {row}, column {col}: `{text}` is not a number")]
    Cell { row: usize, col: usize, text: String },
    #[error(transparent)]
    Task(#[from] MtlError),
}

pub fn load_csv_task(
    path: &Path,
    kind: LossKind,
    shared_dim: Dim,
    task_dim: Dim,
    header: bool,
) -> Result<TaskSpec, LoadError> {
    let file = std::fs::File::open(path)?;
    read_csv_task(file, kind, shared_dim, task_dim, header)
}

/// Rows are numbered from 1, counting data rows only.
pub fn read_csv_task<R: Read>(
    input: R,
    kind: LossKind,
    shared_dim: Dim,
    task_dim: Dim,
    header: bool,
) -> Result<TaskSpec, LoadError> {
    let width = shared_dim + task_dim + 1;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut features = Vec::new();
    let mut labels = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let row = i + 1;
        if record.len() != width {
            return Err(LoadError::Ragged { row, expected: width, found: record.len() });
        }
        let cells = record
            .iter()
            .enumerate()
            .map(|(c, text)| {
                parse_rational(text).map_err(|_| LoadError::Cell { row, col: c + 1, text: text.to_string() })
            })
            .collect::<Result<Vec<Rational>, _>>()?;
        let (x, y) = cells.split_at(width - 1);
        features.push(x.to_vec());
        labels.push(y[0].clone());
    }
    if features.is_empty() {
        return Err(LoadError::Empty);
    }
    match kind {
        LossKind::MeanSquaredLinear => Ok(mean_squared_linear(&features, &labels, shared_dim, task_dim)?),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crdc_core::{eval, DomainTag, ScalarKind, Vector};

    fn load(text: &str, shared: Dim, task: Dim, header: bool) -> Result<TaskSpec, LoadError> {
        read_csv_task(text.as_bytes(), LossKind::MeanSquaredLinear, shared, task, header)
    }

    fn loss_at(t: &TaskSpec, w: &[i64]) -> Vector {
        eval(t.loss(), &Vector::from_ints(ScalarKind::Rational, w), DomainTag::PolyOverRationals).unwrap()
    }

    #[test]
    fn single_row() {
        let t = load("1,2\n", 1, 0, false).unwrap();
        assert_eq!(t.data_rows(), Some(1));
        assert_eq!(loss_at(&t, &[5]), Vector::from_ints(ScalarKind::Rational, &[9]));
    }

    #[test]
    fn header_and_decimals() {
        let t = load("x0,x1,y\n0.5, 1, 2\n1/2, -1, 0\n", 1, 1, true).unwrap();
        assert_eq!(t.data_rows(), Some(2));
        // ((1 + 1 − 2)² + (1 − 1 − 0)²) / 2 at w = (2, 1)
        assert_eq!(loss_at(&t, &[2, 1]), Vector::from_ints(ScalarKind::Rational, &[0]));
    }

    #[test]
    fn duplicated_rows_give_the_same_loss() {
        let once = load("1,2,3\n-1,4,0\n", 1, 1, false).unwrap();
        let twice = load("1,2,3\n-1,4,0\n1,2,3\n-1,4,0\n", 1, 1, false).unwrap();
        for w in [[0, 0], [1, -2], [3, 5]] {
            assert_eq!(loss_at(&once, &w), loss_at(&twice, &w));
        }
    }

    #[test]
    fn malformed_input() {
        assert!(matches!(load("", 1, 0, false), Err(LoadError::Empty)));
        assert!(matches!(load("a,b\n", 1, 0, true), Err(LoadError::Empty)));
        assert!(matches!(load("1,2\n1,2,3\n", 1, 0, false), Err(LoadError::Ragged { row: 2, expected: 2, found: 3 })));
        match load("1,x\n", 1, 0, false) {
            Err(LoadError::Cell { row: 1, col: 2, text }) => assert_eq!(text, "x"),
            other => panic!("{other:?}"),
        }
    }
}
