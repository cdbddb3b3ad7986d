//! Performance matrix, average performance / average forgetting, and report files.

mod plot;
mod report;

use serde::Serialize;

use crate::error::{Error, Result};

pub use plot::{emit_curve, sweep_csv, sweep_svg, CurvePoint};
pub use report::{
    emit_report, heatmap_svg, matrix_csv, parse_matrix_csv, RunReport, REPORT_SCHEMA_VERSION,
};

/// Lower-triangular accuracies: row `k` holds the accuracy on tasks `0..=k`
/// measured right after session `k`. Rows are append-only.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PerformanceMatrix {
    rows: Vec<Vec<f64>>,
}

impl PerformanceMatrix {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a matrix from complete rows; row `k` must have `k + 1` entries.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let mut m = Self::new();
        for row in rows {
            m.push_row(row)?;
        }
        Ok(m)
    }

    /// Appends the accuracies measured after the next session.
    pub fn push_row(&mut self, row: Vec<f64>) -> Result<()> {
        let k = self.rows.len();
        if row.len() != k + 1 {
            return Err(Error::Shape(format!(
                "row for session {k} needs {} entries, got {}",
                k + 1,
                row.len()
            )));
        }
        if let Some(bad) = row.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::Validation(format!("accuracy {bad} outside [0, 1]")));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn num_sessions(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// `M[k][i]`, defined for `i <= k`.
    pub fn get(&self, session: usize, task: usize) -> Option<f64> {
        self.rows.get(session).and_then(|r| r.get(task)).copied()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn final_row(&self) -> Option<&[f64]> {
        self.rows.last().map(Vec::as_slice)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        self.rows.iter().enumerate().map(|(k, r)| r[k]).collect()
    }
}

/// Wall-clock seconds per stage.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Timings {
    pub base_training: f64,
    pub alignment: f64,
    /// One entry per incremental session, feature extraction included.
    pub incremental: Vec<f64>,
    pub evaluation: f64,
    pub total: f64,
}

impl Timings {
    /// Training time as reported in comparisons: base training plus all analytic stages.
    pub fn training(&self) -> f64 {
        self.base_training + self.alignment + self.incremental.iter().sum::<f64>()
    }
}

/// Mean accuracy over all tasks after the final session.
pub fn average_performance(m: &PerformanceMatrix) -> Result<f64> {
    let last = m
        .final_row()
        .ok_or_else(|| Error::Undefined("average performance of an empty matrix".into()))?;
    Ok(last.iter().sum::<f64>() / last.len() as f64)
}

/// Mean drop from just-learned accuracy to final accuracy over all but the last task.
///
/// Positive values mean forgetting. Undefined (an error, not zero) for fewer
/// than two sessions.
pub fn average_forgetting(m: &PerformanceMatrix) -> Result<f64> {
    let k = m.num_sessions();
    if k < 2 {
        return Err(Error::Undefined(format!(
            "average forgetting needs at least 2 sessions, got {k}"
        )));
    }
    let last = m.final_row().expect("k >= 2");
    let total: f64 = (0..k - 1).map(|i| m.rows[i][i] - last[i]).sum();
    Ok(total / (k - 1) as f64)
}

/// `(mean, sample standard deviation)` of repeated measurements.
pub fn mean_std(values: &[f64]) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = if values.len() > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    Some((mean, std))
}
