//! CSV sample loading and JSON emission for the regression fits.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use dprd_core::fit::{self, DcoeFit, FitError, SigmaFit};
use dprd_core::source;

#[derive(Debug, Error)]
pub enum FitIoError {
    #[error("cannot read samples: {0}")]
    Io(#[from] csv::Error),
    #[error("{path} line {line}: {reason}")]
    Malformed { path: String, line: usize, reason: String },
    #[error("fit failed: {0:?}")]
    Fit(FitError),
}

/// Samples of the residual deviation model, CSV header `lambda,qp,sigma`.
/// QP indices are mapped through the quantizer curve to Q steps.
pub fn read_sigma_samples(path: &Path) -> Result<Vec<(f64, f64, f64)>, FitIoError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
    let mut out = Vec::new();
    for (i, row) in reader.deserialize::<(f64, i32, f64)>().enumerate() {
        // +2: one for the header row, one for 1-based numbering
        let line = i + 2;
        let (lambda, qp, sigma) = row.map_err(|e| FitIoError::Malformed {
            path: path.display().to_string(),
            line,
            reason: e.to_string(),
        })?;
        let q = source::qp_to_qstep(qp).map_err(|e| FitIoError::Malformed {
            path: path.display().to_string(),
            line,
            reason: e.to_string(),
        })?;
        out.push((lambda, q, sigma));
    }
    Ok(out)
}

/// Samples of the delay-coefficient model, CSV header `q,dcoe`.
pub fn read_dcoe_samples(path: &Path) -> Result<Vec<(f64, f64)>, FitIoError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
    let mut out = Vec::new();
    for (i, row) in reader.deserialize::<(f64, f64)>().enumerate() {
        let line = i + 2;
        let sample = row.map_err(|e| FitIoError::Malformed {
            path: path.display().to_string(),
            line,
            reason: e.to_string(),
        })?;
        out.push(sample);
    }
    Ok(out)
}

/// Combined fit report written by the `fit` subcommand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct FitReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<SigmaFit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dcoe: Option<DcoeFit>,
}

/// Fit whichever sample files are given and bundle the coefficients.
pub fn fit_from_files(
    sigma_csv: Option<&Path>,
    dcoe_csv: Option<&Path>,
) -> Result<FitReport, FitIoError> {
    let mut report = FitReport::default();
    if let Some(path) = sigma_csv {
        let samples = read_sigma_samples(path)?;
        report.sigma = Some(fit::fit_sigma_model(&samples).map_err(FitIoError::Fit)?);
    }
    if let Some(path) = dcoe_csv {
        let samples = read_dcoe_samples(path)?;
        report.dcoe = Some(fit::fit_dcoe_model(&samples).map_err(FitIoError::Fit)?);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    use dprd_core::source::{sigma, SigmaModel};

    #[test]
    fn sigma_samples_round_trip_through_csv_fit() {
        let model = SigmaModel { a1: 5.0, a2: 0.1, a3: 2.0, a4: 0.05 };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sigma.csv");
        let mut f = std::fs::File::create(&path).unwrap();
        writeln!(f, "lambda,qp,sigma").unwrap();
        for lambda in [1, 4, 8, 16, 32] {
            for qp in [18, 24, 30, 36, 42] {
                let q = source::qp_to_qstep(qp).unwrap();
                writeln!(f, "{lambda},{qp},{}", sigma(&model, lambda as f64, q)).unwrap();
            }
        }
        drop(f);

        let report = fit_from_files(Some(&path), None).unwrap();
        let fitted = report.sigma.unwrap();
        assert!((fitted.model.a1 - 5.0).abs() / 5.0 < 1e-4);
        assert!((fitted.model.a3 - 2.0).abs() / 2.0 < 1e-4);
        assert!(fitted.rms < 1e-6);
    }

    #[test]
    fn malformed_row_names_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "q,dcoe\n1.0,0.5\nnot-a-number,0.4\n").unwrap();
        match read_dcoe_samples(&path) {
            Err(FitIoError::Malformed { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected malformed-row error, got {other:?}"),
        }
    }

    #[test]
    fn out_of_range_qp_rejected_with_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sigma.csv");
        std::fs::write(&path, "lambda,qp,sigma\n1,18,5.0\n1,77,6.0\n").unwrap();
        match read_sigma_samples(&path) {
            Err(FitIoError::Malformed { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected malformed-row error, got {other:?}"),
        }
    }
}
