//! Kernel functions and bandwidth rules.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad;

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Half-width of the interval used when a Gaussian kernel is integrated
/// numerically.
pub const GAUSSIAN_QUAD_HALF_WIDTH: f64 = 40.0;

/// Absolute tolerance handed to adaptive Simpson for kernel integrals.
pub const QUAD_TOLERANCE: f64 = 1e-13;

/// Nonnegative symmetric kernels with unit mass.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kernel {
    /// Standard normal density.
    Gaussian,
    /// 0.75 (1 − x²) on [−1, 1].
    Epanechnikov,
    /// 1 on [−1/2, 1/2].
    Uniform,
}

impl Default for Kernel {
    fn default() -> Self {
        Kernel::Gaussian
    }
}

impl Kernel {
    pub const ALL: [Kernel; 3] = [Kernel::Gaussian, Kernel::Epanechnikov, Kernel::Uniform];

    #[inline]
    pub fn eval(self, x: f64) -> f64 {
        match self {
            Kernel::Gaussian => INV_SQRT_2PI * (-0.5 * x * x).exp(),
            Kernel::Epanechnikov => {
                if x.abs() <= 1.0 {
                    0.75 * (1.0 - x * x)
                } else {
                    0.0
                }
            }
            Kernel::Uniform => {
                if x.abs() <= 0.5 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Distance beyond which the kernel is exactly zero in f64. For the
    /// Gaussian this is where exp(−x²/2) underflows to 0.
    pub fn zero_beyond(self) -> f64 {
        match self {
            Kernel::Gaussian => 38.7,
            Kernel::Epanechnikov => 1.0,
            Kernel::Uniform => 0.5,
        }
    }

    /// Integration interval that carries all of the kernel's mass.
    pub fn support(self) -> (f64, f64) {
        match self {
            Kernel::Gaussian => (-GAUSSIAN_QUAD_HALF_WIDTH, GAUSSIAN_QUAD_HALF_WIDTH),
            Kernel::Epanechnikov => (-1.0, 1.0),
            Kernel::Uniform => (-0.5, 0.5),
        }
    }

    /// ∫ K²(x) dx in closed form.
    pub fn l2(self) -> f64 {
        match self {
            Kernel::Gaussian => 0.5 / PI.sqrt(),
            Kernel::Epanechnikov => 0.6,
            Kernel::Uniform => 1.0,
        }
    }

    /// ∫ |x|^m K(x) dx in closed form.
    pub fn moment(self, m: u32) -> Result<f64> {
        let mf = m as f64;
        Ok(match self {
            Kernel::Gaussian => {
                // E|Z|^m = (m−1)!! for even m, √(2/π)(m−1)!! for odd m
                let mut df = 1.0;
                let mut k = m as i64 - 1;
                while k > 1 {
                    df *= k as f64;
                    k -= 2;
                }
                if m % 2 == 0 {
                    df
                } else {
                    (2.0 / PI).sqrt() * df
                }
            }
            Kernel::Epanechnikov => 1.5 * (1.0 / (mf + 1.0) - 1.0 / (mf + 3.0)),
            Kernel::Uniform => 0.5f64.powi(m as i32) / (mf + 1.0),
        })
    }

    /// ∫ K² by adaptive Simpson over the support.
    pub fn l2_quadrature(self) -> f64 {
        let (a, b) = self.support();
        quad::integrate(|x| self.eval(x).powi(2), a, b, 16, QUAD_TOLERANCE)
    }

    /// ∫ |x|^m K by adaptive Simpson over the support.
    pub fn moment_quadrature(self, m: u32) -> f64 {
        let (a, b) = self.support();
        quad::integrate(|x| x.abs().powi(m as i32) * self.eval(x), a, b, 16, QUAD_TOLERANCE)
    }

    pub fn name(self) -> &'static str {
        match self {
            Kernel::Gaussian => "gaussian",
            Kernel::Epanechnikov => "epanechnikov",
            Kernel::Uniform => "uniform",
        }
    }
}

impl fmt::Display for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Kernel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "gaussian" | "normal" => Ok(Kernel::Gaussian),
            "epanechnikov" => Ok(Kernel::Epanechnikov),
            "uniform" | "box" => Ok(Kernel::Uniform),
            other => Err(Error::InvalidSpec(format!("unknown kernel '{other}'"))),
        }
    }
}

/// Bandwidth exponent p in h = n^{−p}, remembered with the label it was
/// written as ("1/2.5", "0.25", ...).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Exponent {
    pub value: f64,
    pub label: String,
}

impl Exponent {
    pub fn new(value: f64) -> Self {
        Self {
            value,
            label: format!("{value}"),
        }
    }
}

impl FromStr for Exponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let bad = || Error::InvalidSpec(format!("bad bandwidth exponent '{s}'"));
        let value = match t.split_once('/') {
            Some((num, den)) => {
                let num: f64 = num.trim().parse().map_err(|_| bad())?;
                let den: f64 = den.trim().parse().map_err(|_| bad())?;
                num / den
            }
            None => t.parse().map_err(|_| bad())?,
        };
        if !(value.is_finite() && value > 0.0) {
            return Err(bad());
        }
        Ok(Self {
            value,
            label: t.to_string(),
        })
    }
}

impl TryFrom<String> for Exponent {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Exponent> for String {
    fn from(e: Exponent) -> String {
        e.label
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bandwidth {
    pub h: f64,
    /// Exponent p when h = n^{−p}.
    pub exponent: Option<f64>,
    /// n h² > 1, the finite-sample proxy for n h² → ∞.
    pub wide_enough: bool,
    /// n h⁴ log² n < 1, the proxy for n h⁴ log² n → 0.
    pub narrow_enough: bool,
}

impl Bandwidth {
    pub fn explicit(h: f64, n: usize) -> Result<Self> {
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::InvalidBandwidth(h));
        }
        let (wide, narrow) = rate_flags(h, n);
        Ok(Self {
            h,
            exponent: None,
            wide_enough: wide,
            narrow_enough: narrow,
        })
    }
}

fn rate_flags(h: f64, n: usize) -> (bool, bool) {
    let nf = n as f64;
    let ln = nf.ln();
    (nf * h * h > 1.0, nf * h.powi(4) * ln * ln < 1.0)
}

/// h = n^{−p}
pub fn bandwidth_from_exponent(n: usize, p: f64) -> Result<Bandwidth> {
    if n < 2 {
        return Err(Error::InvalidSpec(format!("sample size must be >= 2, got {n}")));
    }
    if !(p.is_finite() && p > 0.0) {
        return Err(Error::InvalidSpec(format!("bandwidth exponent must be > 0, got {p}")));
    }
    let h = (n as f64).powf(-p);
    let (wide, narrow) = rate_flags(h, n);
    Ok(Bandwidth {
        h,
        exponent: Some(p),
        wide_enough: wide,
        narrow_enough: narrow,
    })
}
