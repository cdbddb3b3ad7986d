//! Update rules for the regularized autocorrelation matrix
//! `R_n = (R_{n−1}^{-1} + X_nᵀ X_n)^{-1}`.

use crate::error::{Error, Result};
use crate::linalg::{gram, is_finite, spd_factor, spd_inverse, symmetrize, Matrix};
use crate::registry::Registry;

/// One way of folding a new block of feature rows into `R`.
pub trait AutocorrelationUpdate: Send + Sync {
    fn name(&self) -> &'static str;

    /// Returns `(R_prev^{-1} + xᵀ x)^{-1}` for symmetric positive-definite `r_prev`.
    fn update(&self, r_prev: &Matrix, x: &Matrix) -> Result<Matrix>;
}

/// `R − R Xᵀ (I + X R Xᵀ)^{-1} X R`, factoring only an `N × N` matrix.
#[derive(Debug, Default, Clone, Copy)]
pub struct Woodbury;

/// Re-inverts `R^{-1} + XᵀX` at full `d × d` size.
#[derive(Debug, Default, Clone, Copy)]
pub struct DirectInverse;

/// Woodbury when the block has fewer rows than `R` has columns, direct otherwise.
#[derive(Debug, Default, Clone, Copy)]
pub struct Auto;

fn check(r_prev: &Matrix, x: &Matrix) -> Result<()> {
    if !r_prev.is_square() {
        return Err(Error::Shape(format!(
            "R is {}x{}, not square",
            r_prev.nrows(),
            r_prev.ncols()
        )));
    }
    if x.ncols() != r_prev.nrows() {
        return Err(Error::Shape(format!(
            "feature block has {} columns, R is {}x{}",
            x.ncols(),
            r_prev.nrows(),
            r_prev.nrows()
        )));
    }
    if !is_finite(x) {
        return Err(Error::Numerical(
            "feature block contains non-finite values".into(),
        ));
    }
    Ok(())
}

impl AutocorrelationUpdate for Woodbury {
    fn name(&self) -> &'static str {
        "woodbury"
    }

    fn update(&self, r_prev: &Matrix, x: &Matrix) -> Result<Matrix> {
        check(r_prev, x)?;
        if x.nrows() == 0 {
            return Ok(r_prev.clone());
        }
        let r_xt = r_prev * x.transpose();
        let mut inner = x * &r_xt;
        symmetrize(&mut inner);
        for i in 0..inner.nrows() {
            inner[(i, i)] += 1.0;
        }
        let chol = spd_factor(inner, "I + X R Xᵀ")?;
        // K^{-1} X R, using X R = (R Xᵀ)ᵀ
        let gain = chol.solve(&r_xt.transpose());
        let mut r = r_prev - &r_xt * gain;
        symmetrize(&mut r);
        Ok(r)
    }
}

impl AutocorrelationUpdate for DirectInverse {
    fn name(&self) -> &'static str {
        "direct"
    }

    fn update(&self, r_prev: &Matrix, x: &Matrix) -> Result<Matrix> {
        check(r_prev, x)?;
        if x.nrows() == 0 {
            return Ok(r_prev.clone());
        }
        let precision = spd_inverse(r_prev.clone(), "R")?;
        spd_inverse(precision + gram(x), "R^{-1} + XᵀX")
    }
}

impl AutocorrelationUpdate for Auto {
    fn name(&self) -> &'static str {
        "auto"
    }

    fn update(&self, r_prev: &Matrix, x: &Matrix) -> Result<Matrix> {
        if x.nrows() < r_prev.nrows() {
            Woodbury.update(r_prev, x)
        } else {
            DirectInverse.update(r_prev, x)
        }
    }
}

/// Built-in update rules, selectable by name (`analytic.r_update`).
pub fn autocorrelation_updates() -> Registry<dyn AutocorrelationUpdate> {
    Registry::<dyn AutocorrelationUpdate>::new("autocorrelation update")
        .with(
            "auto",
            "Woodbury for blocks smaller than d_feg, direct re-inversion otherwise",
            |_| Ok(Box::new(Auto)),
        )
        .with(
            "woodbury",
            "always apply the Woodbury identity (N_n x N_n inner solve)",
            |_| Ok(Box::new(Woodbury)),
        )
        .with(
            "direct",
            "always re-invert R^{-1} + X^T X at full size",
            |_| Ok(Box::new(DirectInverse)),
        )
}

/// `update_R` with the default rule.
pub fn update_r(r_prev: &Matrix, x: &Matrix) -> Result<Matrix> {
    Auto.update(r_prev, x)
}
