//! One-dimensional sweeps: the same experiment repeated over values of one
//! config entry, seeds included in what stays fixed.

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::metrics::{emit_curve, emit_report, CurvePoint, RunReport};
use crate::registry::Registry;

use super::{run_experiment_on, ExperimentConfig};

/// A config entry that can be swept over real values.
pub trait SweepAxis: Send + Sync {
    fn name(&self) -> &'static str;
    /// Sets the entry in `config`, rejecting values the entry cannot take.
    fn apply(&self, config: &mut ExperimentConfig, value: f64) -> Result<()>;
}

pub struct GammaAxis;

impl SweepAxis for GammaAxis {
    fn name(&self) -> &'static str {
        "gamma"
    }

    fn apply(&self, config: &mut ExperimentConfig, value: f64) -> Result<()> {
        if !(value.is_finite() && value > 0.0) {
            return Err(Error::param(
                "gamma",
                format!("must be positive and finite, got {value}"),
            ));
        }
        config.gamma = value;
        Ok(())
    }
}

pub struct ExpanderDimAxis;

impl SweepAxis for ExpanderDimAxis {
    fn name(&self) -> &'static str {
        "feg_dim"
    }

    fn apply(&self, config: &mut ExperimentConfig, value: f64) -> Result<()> {
        if !(value.fract() == 0.0 && value >= 1.0 && value <= u32::MAX as f64) {
            return Err(Error::param(
                "feg_dim",
                format!("must be a positive integer, got {value}"),
            ));
        }
        config.expander_dim = value as usize;
        Ok(())
    }
}

pub fn sweep_axes() -> Registry<dyn SweepAxis> {
    Registry::<dyn SweepAxis>::new("sweep axis")
        .with("gamma", "ridge regularization analytic.gamma", |_| {
            Ok(Box::new(GammaAxis))
        })
        .with("feg_dim", "expanded feature dimension expander.dim", |_| {
            Ok(Box::new(ExpanderDimAxis))
        })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub value: f64,
    pub report: RunReport,
}

impl SweepPoint {
    pub fn curve_point(&self) -> CurvePoint {
        CurvePoint {
            value: self.value,
            ap: self.report.ap,
            af: self.report.af,
            seconds: self.report.timings.training(),
        }
    }
}

/// Runs one experiment per value. Every value is checked before the first run.
pub fn run_sweep(config: &ExperimentConfig, axis: &str, values: &[f64]) -> Result<Vec<SweepPoint>> {
    if values.is_empty() {
        return Err(Error::param("values", "sweep needs at least one value"));
    }
    let axis = sweep_axes().create(axis)?;
    let configs = values
        .iter()
        .map(|&v| {
            let mut c = config.clone();
            axis.apply(&mut c, v)?;
            c.validate()?;
            Ok(c)
        })
        .collect::<Result<Vec<_>>>()?;
    let graph = config.load_graph()?;
    values
        .iter()
        .zip(&configs)
        .map(|(&value, c)| {
            let outcome = run_experiment_on(c, &graph)?;
            Ok(SweepPoint {
                value,
                report: RunReport::new(outcome.matrix, outcome.timings, c.entries())?,
            })
        })
        .collect()
}

/// Per-point reports go to `point_000/`, `point_001/`, ...; the curve to `sweep.csv` and `sweep.svg`.
pub fn emit_sweep(axis: &str, points: &[SweepPoint], out_dir: &Path) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    for (i, p) in points.iter().enumerate() {
        written.extend(emit_report(
            &p.report,
            &out_dir.join(format!("point_{i:03}")),
        )?);
    }
    let curve: Vec<CurvePoint> = points.iter().map(SweepPoint::curve_point).collect();
    written.extend(emit_curve(axis, &curve, out_dir)?);
    Ok(written)
}
