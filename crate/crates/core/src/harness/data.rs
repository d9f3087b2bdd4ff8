//! Observed data in CSV form: header `t,x,y`, one aligned pair
//! (x_t, y_{t+1}) per row.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{bandwidth_from_exponent, Bandwidth, Kernel};
use crate::models::model_by_name;
use crate::teststat::{run_test, TestOptions, TestResult};

pub const MIN_OBSERVATIONS: usize = 10;

/// Parse aligned (x, y) columns. Rows in errors count data rows from 1.
pub fn read_pairs<R: std::io::Read>(reader: R) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut rd = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rd.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
            .ok_or_else(|| Error::Data(format!("missing column '{name}' (expected header t,x,y)")))
    };
    col("t")?;
    let (ix, iy) = (col("x")?, col("y")?);
    let (mut x, mut y) = (Vec::new(), Vec::new());
    for (i, rec) in rd.records().enumerate() {
        let row = i + 1;
        let rec = rec?;
        let field = |idx: usize, name: &str| -> Result<f64> {
            let raw = rec.get(idx).unwrap_or("");
            let v: f64 = raw.parse().map_err(|_| Error::Parse {
                row,
                column: name.to_string(),
                message: format!("'{raw}' is not a number"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    row,
                    column: name.to_string(),
                    message: format!("'{raw}' is not finite"),
                });
            }
            Ok(v)
        };
        x.push(field(ix, "x")?);
        y.push(field(iy, "y")?);
    }
    Ok((x, y))
}

pub fn read_pairs_file(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    read_pairs(std::fs::File::open(path)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BandwidthChoice {
    /// h = n^{−p}
    Exponent { p: f64 },
    Explicit { h: f64 },
}

#[derive(Clone, Debug)]
pub struct CsvTestOptions {
    pub model: String,
    pub kernel: Kernel,
    pub bandwidth: BandwidthChoice,
    pub alpha: f64,
    pub theta_init: Option<Vec<f64>>,
}

impl Default for CsvTestOptions {
    fn default() -> Self {
        Self {
            model: "linear".into(),
            kernel: Kernel::Gaussian,
            bandwidth: BandwidthChoice::Exponent { p: 1.0 / 3.0 },
            alpha: 0.05,
            theta_init: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CsvTestOutcome {
    pub result: TestResult,
    pub bandwidth: Bandwidth,
    pub warnings: Vec<String>,
}

impl CsvTestOutcome {
    pub fn verdict(&self) -> String {
        let r = &self.result;
        format!(
            "{} null '{}' at level {}: Z = {:.4}, p = {:.4} (n = {}, h = {:.4}, kernel = {})",
            if r.reject_alpha { "reject" } else { "do not reject" },
            r.model,
            r.alpha,
            r.z,
            r.p_value,
            r.n,
            r.h,
            r.kernel
        )
    }
}

/// Run the test on already parsed pairs.
pub fn apply_test(x: &[f64], y: &[f64], opts: &CsvTestOptions) -> Result<CsvTestOutcome> {
    let n = x.len();
    if n < MIN_OBSERVATIONS {
        return Err(Error::Data(format!(
            "need at least {MIN_OBSERVATIONS} observations, got {n}"
        )));
    }
    let bandwidth = match opts.bandwidth {
        BandwidthChoice::Exponent { p } => bandwidth_from_exponent(n, p)?,
        BandwidthChoice::Explicit { h } => Bandwidth::explicit(h, n)?,
    };
    let mut warnings = Vec::new();
    if !bandwidth.wide_enough {
        warnings.push(format!("n h^2 = {:.3} <= 1: bandwidth may be too small", n as f64 * bandwidth.h.powi(2)));
    }
    if !bandwidth.narrow_enough {
        let ln = (n as f64).ln();
        warnings.push(format!(
            "n h^4 log^2 n = {:.3} >= 1: bandwidth may be too large",
            n as f64 * bandwidth.h.powi(4) * ln * ln
        ));
    }
    let model = model_by_name(&opts.model)?;
    let test_opts = TestOptions {
        kernel: opts.kernel,
        h: bandwidth.h,
        alpha: opts.alpha,
        theta_init: opts.theta_init.clone(),
    };
    let result = run_test(x, y, model.as_ref(), &test_opts)?;
    Ok(CsvTestOutcome {
        result,
        bandwidth,
        warnings,
    })
}

pub fn apply_test_csv(path: &Path, opts: &CsvTestOptions) -> Result<CsvTestOutcome> {
    let (x, y) = read_pairs_file(path)?;
    apply_test(&x, &y, opts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_aligned_pairs() {
        let text = "t,x,y\n1,0.5,1.0\n2,-1.5,2e-1\n";
        let (x, y) = read_pairs(text.as_bytes()).unwrap();
        assert_eq!(x, vec![0.5, -1.5]);
        assert_eq!(y, vec![1.0, 0.2]);
    }

    #[test]
    fn column_order_is_free() {
        let (x, y) = read_pairs("y,t,x\n3,1,4\n".as_bytes()).unwrap();
        assert_eq!((x, y), (vec![4.0], vec![3.0]));
    }

    #[test]
    fn bad_cell_names_row_and_column() {
        let text = "t,x,y\n1,0.5,1.0\n2,abc,2.0\n";
        match read_pairs(text.as_bytes()) {
            Err(Error::Parse { row, column, .. }) => {
                assert_eq!(row, 2);
                assert_eq!(column, "x");
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            read_pairs("t,x,y\n1,1,NaN\n".as_bytes()),
            Err(Error::Parse { row: 1, .. })
        ));
    }

    #[test]
    fn missing_column() {
        assert!(matches!(read_pairs("t,x\n1,2\n".as_bytes()), Err(Error::Data(_))));
    }

    #[test]
    fn too_few_rows() {
        let x = vec![1.0; 5];
        assert!(matches!(apply_test(&x, &x, &CsvTestOptions::default()), Err(Error::Data(_))));
    }
}
