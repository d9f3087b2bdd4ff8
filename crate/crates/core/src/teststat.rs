//! The kernel-smoothed U-statistic S_n, its self-normalizer V_n², the
//! standardized statistic Z_n = S_n / (√2 V_n), the decomposition of S_n
//! into martingale and estimation-error parts, and the theoretical scale
//! normalizers d_n², τ_n².
//!
//! Pair sums run over s ≠ t only. Both sums are evaluated as twice the
//! upper triangle, visiting pairs in the fixed order (s ascending, then
//! t > s ascending) with Neumaier-compensated accumulation, so results are
//! bit-stable across runs and thread counts.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::Kernel;
use crate::models::{fit_null, FitResult, NullModel};
use crate::stats::{normal_upper_tail, upper_critical_value, CompensatedSum};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairSums {
    pub s: f64,
    pub v2: f64,
    /// Ordered pairs (s, t) with s ≠ t.
    pub pairs: usize,
}

fn check_inputs(u: &[f64], x: &[f64], h: f64) -> Result<()> {
    if u.len() != x.len() {
        return Err(Error::LengthMismatch {
            expected: x.len(),
            got: u.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::Data(format!("need at least 2 observations, got {}", x.len())));
    }
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::InvalidBandwidth(h));
    }
    Ok(())
}

/// S_n and V_n² in one pass over the pairs.
pub fn pair_sums(u: &[f64], x: &[f64], kernel: Kernel, h: f64) -> Result<PairSums> {
    check_inputs(u, x, h)?;
    let n = x.len();
    let inv_h = 1.0 / h;
    let cutoff = kernel.zero_beyond();
    let mut s = CompensatedSum::new();
    let mut v = CompensatedSum::new();
    for i in 0..n {
        let (xi, ui) = (x[i], u[i]);
        for j in (i + 1)..n {
            let d = (x[j] - xi) * inv_h;
            if d.abs() > cutoff {
                continue;
            }
            let k = kernel.eval(d);
            let a = ui * u[j];
            s.add(a * k);
            v.add(a * a * k * k);
        }
    }
    Ok(PairSums {
        s: 2.0 * s.value(),
        v2: 2.0 * v.value(),
        pairs: n * (n - 1),
    })
}

/// S_n = Σ_{s≠t} û_{t+1} û_{s+1} K[(x_t − x_s)/h]
pub fn statistic_s(u_hat: &[f64], x: &[f64], kernel: Kernel, h: f64) -> Result<f64> {
    Ok(pair_sums(u_hat, x, kernel, h)?.s)
}

/// V_n² = Σ_{s≠t} û²_{t+1} û²_{s+1} K²[(x_t − x_s)/h]
pub fn statistic_v2(u_hat: &[f64], x: &[f64], kernel: Kernel, h: f64) -> Result<f64> {
    Ok(pair_sums(u_hat, x, kernel, h)?.v2)
}

/// Σ_{s≠t} K²[(x_t − x_s)/h], the residual-free part of V_n².
pub fn kernel_square_sum(x: &[f64], kernel: Kernel, h: f64) -> Result<f64> {
    let ones = vec![1.0; x.len()];
    statistic_v2(&ones, x, kernel, h)
}

/// Z = S / (√2 √V²)
pub fn z_statistic(s: f64, v2: f64) -> Result<f64> {
    if v2.is_nan() || v2 < 0.0 {
        return Err(Error::NonFinite(format!("V^2 = {v2}")));
    }
    if v2 == 0.0 {
        return Err(Error::DegenerateStatistic);
    }
    Ok(s / (std::f64::consts::SQRT_2 * v2.sqrt()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub s: f64,
    pub v2: f64,
    pub z: f64,
    /// 1 − Φ(Z)
    pub p_value: f64,
    pub reject_05: bool,
    pub reject_01: bool,
    pub alpha: f64,
    pub reject_alpha: bool,
    pub n: usize,
    pub h: f64,
    pub kernel: Kernel,
    pub pairs_used: usize,
    pub model: String,
    pub theta_hat: Vec<f64>,
}

/// Test settings besides the data.
#[derive(Clone, Debug)]
pub struct TestOptions {
    pub kernel: Kernel,
    pub h: f64,
    pub alpha: f64,
    /// Starting value for Gauss–Newton; ignored for the linear model.
    pub theta_init: Option<Vec<f64>>,
}

/// One-sided upper-tail decision for Z at level α.
pub fn rejects(z: f64, alpha: f64) -> bool {
    z >= upper_critical_value(alpha)
}

/// Assemble a [`TestResult`] from residuals of an already fitted null.
pub fn test_from_fit(x: &[f64], fit: &FitResult, model_name: &str, opts: &TestOptions) -> Result<TestResult> {
    if !(opts.alpha > 0.0 && opts.alpha < 1.0) {
        return Err(Error::InvalidSpec(format!("alpha must be in (0,1), got {}", opts.alpha)));
    }
    let ps = pair_sums(&fit.residuals, x, opts.kernel, opts.h)?;
    let z = z_statistic(ps.s, ps.v2)?;
    Ok(TestResult {
        s: ps.s,
        v2: ps.v2,
        z,
        p_value: normal_upper_tail(z),
        reject_05: rejects(z, 0.05),
        reject_01: rejects(z, 0.01),
        alpha: opts.alpha,
        reject_alpha: rejects(z, opts.alpha),
        n: x.len(),
        h: opts.h,
        kernel: opts.kernel,
        pairs_used: ps.pairs,
        model: model_name.to_string(),
        theta_hat: fit.theta_hat.clone(),
    })
}

/// Fit the null model to (x_t, y_{t+1}) and run the test.
pub fn run_test(x: &[f64], y: &[f64], model: &dyn NullModel, opts: &TestOptions) -> Result<TestResult> {
    let fit = fit_null(model, x, y, opts.theta_init.as_deref())?;
    test_from_fit(x, &fit, &model.name(), opts)
}

/// Pieces of S_n = 2 S₁ + 2 S₂ + S₃ in a simulation where the true errors
/// and parameter are known.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    /// Σ_t u_{t+1} Y_{nt}
    pub s1: f64,
    /// Σ_{i≠t} u_{i+1} [f(x_t,θ) − f(x_t,θ̂)] K[(x_t − x_i)/h]
    pub s2: f64,
    /// Σ_{i≠t} [f(x_i,θ) − f(x_i,θ̂)][f(x_t,θ) − f(x_t,θ̂)] K[(x_t − x_i)/h]
    pub s3: f64,
    /// Y_{nt} = Σ_{i<t} u_{i+1} K[(x_t − x_i)/h]
    pub y: Vec<f64>,
    pub sum_y2: f64,
    /// û = u + f(x,θ) − f(x,θ̂)
    pub u_hat: Vec<f64>,
}

impl Decomposition {
    pub fn recombined(&self) -> f64 {
        2.0 * self.s1 + 2.0 * self.s2 + self.s3
    }
}

#[allow(clippy::too_many_arguments)]
pub fn decompose(
    u_true: &[f64],
    theta_true: &[f64],
    theta_hat: &[f64],
    model: &dyn NullModel,
    x: &[f64],
    kernel: Kernel,
    h: f64,
) -> Result<Decomposition> {
    check_inputs(u_true, x, h)?;
    let n = x.len();
    let diff: Vec<f64> = x
        .iter()
        .map(|&xt| model.value(xt, theta_true) - model.value(xt, theta_hat))
        .collect();
    let mut y = vec![0.0; n];
    let mut s1 = CompensatedSum::new();
    let mut s2 = CompensatedSum::new();
    let mut s3 = CompensatedSum::new();
    for t in 0..n {
        let mut yt = CompensatedSum::new();
        for i in 0..n {
            if i == t {
                continue;
            }
            let k = kernel.eval((x[t] - x[i]) / h);
            if i < t {
                yt.add(u_true[i] * k);
            }
            s2.add(u_true[i] * diff[t] * k);
            s3.add(diff[i] * diff[t] * k);
        }
        y[t] = yt.value();
        s1.add(u_true[t] * y[t]);
    }
    let sum_y2 = y.iter().map(|v| v * v).sum();
    let u_hat = u_true.iter().zip(&diff).map(|(u, d)| u + d).collect();
    Ok(Decomposition {
        s1: s1.value(),
        s2: s2.value(),
        s3: s3.value(),
        y,
        sum_y2,
        u_hat,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Normalizers {
    /// d_n² = (2φ)⁻¹ σ² n^{3/2} h ∫K²
    pub d2: f64,
    /// τ_n² = (8φ)⁻¹ σ⁴ n^{3/2} h ∫K²
    pub tau2: f64,
    pub sigma: f64,
    pub phi: f64,
    pub n: usize,
    pub h: f64,
    pub kernel_l2: f64,
}

pub fn normalizers(n: usize, h: f64, sigma: f64, phi: f64, kernel_l2: f64) -> Result<Normalizers> {
    if phi == 0.0 || !phi.is_finite() {
        return Err(Error::InvalidSpec(format!("phi must be finite and nonzero, got {phi}")));
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidSpec(format!("sigma must be positive, got {sigma}")));
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidBandwidth(h));
    }
    let base = (n as f64).powf(1.5) * h * kernel_l2;
    Ok(Normalizers {
        d2: sigma * sigma * base / (2.0 * phi),
        tau2: sigma.powi(4) * base / (8.0 * phi),
        sigma,
        phi,
        n,
        h,
        kernel_l2,
    })
}
