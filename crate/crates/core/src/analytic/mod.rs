//! Gradient-free classifier: closed-form ridge alignment on the base session
//! followed by exact recursive least-squares updates per incremental session.
//!
//! The only memory carried between sessions is [`AnalyticState`]: the weight
//! matrix and `R = (Σ XᵢᵀXᵢ + γI)^{-1}`. After any number of sessions the
//! recursive weights equal the ridge solution over all data seen so far.

mod autocorr;
mod joint;
mod learner;

use crate::container::{ContainerReader, ContainerWriter, PayloadKind};
use crate::error::{Error, Result};
use crate::linalg::{add_to_diagonal, gram, hstack, is_finite, spd_factor, symmetrize, Matrix};

pub use autocorr::{
    autocorrelation_updates, update_r, Auto, AutocorrelationUpdate, DirectInverse, Woodbury,
};
pub use joint::joint_solve;
pub use learner::{
    classifier_learners, ClassifierLearner, JointRetrain, LearnerSettings, RecursiveLearner,
};

/// Expanded features and one-hot targets of one session's training nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionBatch {
    x: Matrix,
    y: Matrix,
    class_ids: Vec<usize>,
}

impl SessionBatch {
    /// `y` must be one-hot per row with column `j` meaning class `class_ids[j]`.
    pub fn new(x: Matrix, y: Matrix, class_ids: Vec<usize>) -> Result<Self> {
        if x.nrows() != y.nrows() {
            return Err(Error::Shape(format!(
                "{} feature rows but {} target rows",
                x.nrows(),
                y.nrows()
            )));
        }
        if y.ncols() != class_ids.len() {
            return Err(Error::Shape(format!(
                "{} target columns for {} classes",
                y.ncols(),
                class_ids.len()
            )));
        }
        let mut sorted = class_ids.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != class_ids.len() {
            return Err(Error::Validation("session class ids repeat".into()));
        }
        for (i, row) in y.row_iter().enumerate() {
            let ones = row.iter().filter(|v| **v == 1.0).count();
            let zeros = row.iter().filter(|v| **v == 0.0).count();
            if ones != 1 || ones + zeros != row.len() {
                return Err(Error::Validation(format!("target row {i} is not one-hot")));
            }
        }
        if !is_finite(&x) {
            return Err(Error::Numerical("session features are not finite".into()));
        }
        Ok(Self { x, y, class_ids })
    }

    /// Builds the one-hot targets from global labels.
    pub fn from_labels(x: Matrix, labels: &[usize], class_ids: Vec<usize>) -> Result<Self> {
        if labels.len() != x.nrows() {
            return Err(Error::Shape(format!(
                "{} labels for {} rows",
                labels.len(),
                x.nrows()
            )));
        }
        let mut y = Matrix::zeros(labels.len(), class_ids.len());
        for (i, label) in labels.iter().enumerate() {
            let col = class_ids.iter().position(|c| c == label).ok_or_else(|| {
                Error::Validation(format!("label {label} is not a class of this session"))
            })?;
            y[(i, col)] = 1.0;
        }
        Self::new(x, y, class_ids)
    }

    pub fn features(&self) -> &Matrix {
        &self.x
    }

    pub fn targets(&self) -> &Matrix {
        &self.y
    }

    pub fn class_ids(&self) -> &[usize] {
        &self.class_ids
    }

    pub fn len(&self) -> usize {
        self.x.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.x.nrows() == 0
    }
}

/// Everything the classifier remembers across sessions.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticState {
    weights: Matrix,
    autocorrelation: Matrix,
    gamma: f64,
    seen_classes: Vec<usize>,
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma > 0.0 && gamma.is_finite() {
        Ok(())
    } else {
        Err(Error::param(
            "analytic.gamma",
            format!("must be a positive finite real, got {gamma}"),
        ))
    }
}

/// Ridge solution `W = (XᵀX + γI)^{-1} XᵀY` and `R = (XᵀX + γI)^{-1}`.
///
/// Factors the `d × d` primal system when there are at least as many rows as
/// features, and the `N × N` dual system `XXᵀ + γI` otherwise.
fn ridge(x: &Matrix, y: &Matrix, gamma: f64) -> Result<(Matrix, Matrix)> {
    let (n, d) = x.shape();
    if n >= d {
        let mut g = gram(x);
        add_to_diagonal(&mut g, gamma);
        let chol = spd_factor(g, "XᵀX + γI")?;
        let w = chol.solve(&x.tr_mul(y));
        let mut r = chol.inverse();
        symmetrize(&mut r);
        Ok((w, r))
    } else {
        let mut k = x * x.transpose();
        symmetrize(&mut k);
        add_to_diagonal(&mut k, gamma);
        let chol = spd_factor(k, "XXᵀ + γI")?;
        // W = Xᵀ (XXᵀ + γI)^{-1} Y
        let w = x.tr_mul(&chol.solve(y));
        // R = (I − Xᵀ (XXᵀ + γI)^{-1} X) / γ
        let mut r = -(x.tr_mul(&chol.solve(x)));
        add_to_diagonal(&mut r, 1.0);
        r /= gamma;
        symmetrize(&mut r);
        Ok((w, r))
    }
}

/// Closed-form ridge alignment of the classifier on the base session.
pub fn align_base(batch: &SessionBatch, gamma: f64) -> Result<AnalyticState> {
    check_gamma(gamma)?;
    let (weights, autocorrelation) = ridge(&batch.x, &batch.y, gamma)?;
    Ok(AnalyticState {
        weights,
        autocorrelation,
        gamma,
        seen_classes: batch.class_ids.clone(),
    })
}

/// Recursive update with the default autocorrelation rule; returns the new state.
pub fn update_weights(state: &AnalyticState, batch: &SessionBatch) -> Result<AnalyticState> {
    let mut next = state.clone();
    next.learn(batch, &Auto)?;
    Ok(next)
}

/// Column index of the largest entry in row `row`; ties go to the lowest index.
pub fn argmax_row(m: &Matrix, row: usize) -> usize {
    let mut best = 0;
    for j in 1..m.ncols() {
        if m[(row, j)] > m[(row, best)] {
            best = j;
        }
    }
    best
}

/// Class id with the highest score per row of `x · weights`.
///
/// Ties resolve to the lowest class id, whatever its column position.
pub fn predict_with(x: &Matrix, weights: &Matrix, classes: &[usize]) -> Result<Vec<usize>> {
    if x.ncols() != weights.nrows() {
        return Err(Error::Shape(format!(
            "features have {} columns, classifier expects {}",
            x.ncols(),
            weights.nrows()
        )));
    }
    if classes.is_empty() {
        return Err(Error::Empty("classifier has no classes".into()));
    }
    let scores = x * weights;
    Ok((0..scores.nrows())
        .map(|i| {
            let mut best = 0;
            for j in 1..scores.ncols() {
                let (s, b) = (scores[(i, j)], scores[(i, best)]);
                if s > b || (s == b && classes[j] < classes[best]) {
                    best = j;
                }
            }
            classes[best]
        })
        .collect())
}

pub fn predict(x: &Matrix, state: &AnalyticState) -> Result<Vec<usize>> {
    predict_with(x, &state.weights, &state.seen_classes)
}

impl AnalyticState {
    /// State before any data: `W` has no columns and `R = I/γ`.
    pub fn empty(dim: usize, gamma: f64) -> Result<Self> {
        check_gamma(gamma)?;
        Ok(Self {
            weights: Matrix::zeros(dim, 0),
            autocorrelation: Matrix::identity(dim, dim) / gamma,
            gamma,
            seen_classes: Vec::new(),
        })
    }

    /// Folds one session into the state in place.
    ///
    /// `R` is updated first; existing columns are then corrected by
    /// `R_n XᵀX W` and the new classes appended as `R_n XᵀY`.
    pub fn learn(&mut self, batch: &SessionBatch, rule: &dyn AutocorrelationUpdate) -> Result<()> {
        if batch.x.ncols() != self.dim() {
            return Err(Error::Shape(format!(
                "session features have {} columns, state has {}",
                batch.x.ncols(),
                self.dim()
            )));
        }
        let overlap: Vec<usize> = batch
            .class_ids
            .iter()
            .copied()
            .filter(|c| self.seen_classes.contains(c))
            .collect();
        if !overlap.is_empty() {
            return Err(Error::ClassOverlap(overlap));
        }
        let r_next = rule.update(&self.autocorrelation, &batch.x)?;
        let x = &batch.x;
        // R_n Xᵀ first keeps the cost at O(d²N + dNC), flat in the number of seen classes.
        let gain = &r_next * x.transpose();
        let corrected = &self.weights - &gain * (x * &self.weights);
        let appended = &gain * &batch.y;
        self.weights = hstack(&corrected, &appended)?;
        self.autocorrelation = r_next;
        self.seen_classes.extend_from_slice(&batch.class_ids);
        Ok(())
    }

    pub fn weights(&self) -> &Matrix {
        &self.weights
    }

    pub fn autocorrelation(&self) -> &Matrix {
        &self.autocorrelation
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn seen_classes(&self) -> &[usize] {
        &self.seen_classes
    }

    /// Expanded feature dimension `d_feg`.
    pub fn dim(&self) -> usize {
        self.autocorrelation.nrows()
    }

    /// Shapes of every stored matrix: `R` then `W`.
    pub fn stored_matrix_shapes(&self) -> [(usize, usize); 2] {
        [self.autocorrelation.shape(), self.weights.shape()]
    }

    /// Number of reals retained between sessions, `d² + d·C_seen + 1`.
    pub fn stored_reals(&self) -> usize {
        self.autocorrelation.len() + self.weights.len() + 1
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = ContainerWriter::new(PayloadKind::AnalyticState);
        w.f64(self.gamma).u64(self.seen_classes.len() as u64);
        for &c in &self.seen_classes {
            w.u64(c as u64);
        }
        w.u64(self.dim() as u64)
            .matrix(&self.weights)
            .matrix(&self.autocorrelation);
        w.finish()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = ContainerReader::open(bytes, PayloadKind::AnalyticState)?;
        let gamma = r.f64()?;
        check_gamma(gamma).map_err(|e| Error::Container(e.to_string()))?;
        let count = r.usize()?;
        let seen_classes = (0..count).map(|_| r.usize()).collect::<Result<Vec<_>>>()?;
        let d = r.usize()?;
        let weights = r.matrix(d, count)?;
        let autocorrelation = r.matrix(d, d)?;
        r.finish()?;
        Ok(Self {
            weights,
            autocorrelation,
            gamma,
            seen_classes,
        })
    }
}
