use crate::error::{Error, Result};
use crate::linalg::{add_to_diagonal, spd_factor, vstack, Matrix};

use super::SessionBatch;

/// Ridge solution over all sessions at once.
///
/// Rows of every batch are stacked; targets form a block-diagonal matrix with
/// one column block per session, in session order. The result is the weight
/// matrix retraining from scratch on all data would produce.
pub fn joint_solve(batches: &[SessionBatch], gamma: f64) -> Result<Matrix> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::param(
            "analytic.gamma",
            format!("must be a positive finite real, got {gamma}"),
        ));
    }
    let first = batches
        .first()
        .ok_or_else(|| Error::Empty("joint solve needs at least one session".into()))?;
    let d = first.features().ncols();
    let mut seen = Vec::new();
    for b in batches {
        for &c in b.class_ids() {
            if seen.contains(&c) {
                return Err(Error::ClassOverlap(vec![c]));
            }
            seen.push(c);
        }
    }
    let x = vstack(batches.iter().map(|b| b.features()), d)?;
    let rows = x.nrows();
    let mut y = Matrix::zeros(rows, seen.len());
    let (mut row, mut col) = (0, 0);
    for b in batches {
        y.view_mut((row, col), (b.len(), b.class_ids().len()))
            .copy_from(b.targets());
        row += b.len();
        col += b.class_ids().len();
    }
    let mut g = x.tr_mul(&x);
    add_to_diagonal(&mut g, gamma);
    Ok(spd_factor(g, "ΣXᵀX + γI")?.solve(&x.tr_mul(&y)))
}
