//! Parameter sweeps: run one simulation per grid cell over scenario axes
//! and tabulate distortion, power, and objective.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::ScenarioConfig;
use crate::sim::{self, SimError};

/// Sweepable scalar fields of the scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    DMax,
    DMaxTrans,
    Rho1,
    Rho2,
    V,
}

impl SweepAxis {
    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::DMax => "d_max",
            SweepAxis::DMaxTrans => "d_max_trans",
            SweepAxis::Rho1 => "rho1",
            SweepAxis::Rho2 => "rho2",
            SweepAxis::V => "v",
        }
    }

    fn apply(&self, config: &mut ScenarioConfig, value: f64) {
        match self {
            SweepAxis::DMax => config.d_max_s = value,
            SweepAxis::DMaxTrans => config.d_max_trans_s = value,
            SweepAxis::Rho1 => config.weights.rho1 = value,
            SweepAxis::Rho2 => config.weights.rho2 = value,
            SweepAxis::V => config.weights.v = value,
        }
    }
}

/// A sweep: the cross product of one or more axes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub axes: Vec<(SweepAxis, Vec<f64>)>,
}

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("sweep needs at least one axis with at least one finite value")]
    EmptySpec,
    #[error("axis {axis} has non-finite value {value}")]
    NonFinite { axis: &'static str, value: f64 },
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), SweepError> {
        if self.axes.is_empty() || self.axes.iter().any(|(_, v)| v.is_empty()) {
            return Err(SweepError::EmptySpec);
        }
        for (axis, values) in &self.axes {
            for &v in values {
                if !v.is_finite() {
                    return Err(SweepError::NonFinite { axis: axis.name(), value: v });
                }
            }
        }
        Ok(())
    }
}

/// One sweep cell: the axis values and the cell's aggregates, or the
/// failure that kept it empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub values: Vec<(String, f64)>,
    /// Time-average of D_e over the horizon.
    pub sd: Option<f64>,
    pub mean_ptot: Option<f64>,
    pub mean_objective: Option<f64>,
    pub error: Option<String>,
}

/// Run one simulate per cell of the axis cross product. Failures are
/// recorded in the cell and the sweep continues.
pub fn sweep(config: &ScenarioConfig, spec: &SweepSpec) -> Result<Vec<SweepCell>, SweepError> {
    spec.validate()?;
    let mut cells = Vec::new();
    let mut index = vec![0usize; spec.axes.len()];
    loop {
        let mut cell_config = config.clone();
        let mut values = Vec::with_capacity(spec.axes.len());
        for (axis_i, (axis, axis_values)) in spec.axes.iter().enumerate() {
            let v = axis_values[index[axis_i]];
            axis.apply(&mut cell_config, v);
            values.push((axis.name().to_string(), v));
        }

        let cell = match cell_config
            .validate()
            .map_err(|e| e.to_string())
            .and_then(|_| sim::simulate(&cell_config).map_err(|e: SimError| e.to_string()))
        {
            Ok(artifact) => {
                let n = artifact.records.len().max(1) as f64;
                let objective: f64 = artifact
                    .records
                    .iter()
                    .map(|r| {
                        // penalty part of the slot objective from the row
                        cell_config.weights.v
                            * (r.de + cell_config.weights.rho1 * r.dc
                                + cell_config.weights.rho2 * r.ptot)
                    })
                    .sum::<f64>()
                    / n;
                SweepCell {
                    values,
                    sd: Some(artifact.summary.mean_de),
                    mean_ptot: Some(artifact.summary.mean_ptot),
                    mean_objective: Some(objective),
                    error: None,
                }
            }
            Err(e) => SweepCell {
                values,
                sd: None,
                mean_ptot: None,
                mean_objective: None,
                error: Some(e),
            },
        };
        cells.push(cell);

        // advance the mixed-radix cell index
        let mut axis_i = spec.axes.len();
        loop {
            if axis_i == 0 {
                return Ok(cells);
            }
            axis_i -= 1;
            index[axis_i] += 1;
            if index[axis_i] < spec.axes[axis_i].1.len() {
                break;
            }
            index[axis_i] = 0;
        }
    }
}

/// Write sweep cells as long-format CSV: one row per cell, axis columns
/// first.
pub fn write_csv(path: &Path, spec: &SweepSpec, cells: &[SweepCell]) -> std::io::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header: Vec<String> = spec.axes.iter().map(|(a, _)| a.name().to_string()).collect();
    header.extend(["sd", "mean_ptot", "mean_objective", "error"].map(String::from));
    w.write_record(&header)?;
    for cell in cells {
        let mut row: Vec<String> = cell.values.iter().map(|(_, v)| v.to_string()).collect();
        row.push(cell.sd.map_or(String::new(), |v| v.to_string()));
        row.push(cell.mean_ptot.map_or(String::new(), |v| v.to_string()));
        row.push(cell.mean_objective.map_or(String::new(), |v| v.to_string()));
        row.push(cell.error.clone().unwrap_or_default());
        w.write_record(&row)?;
    }
    w.flush()
}
