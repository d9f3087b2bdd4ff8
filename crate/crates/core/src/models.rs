//! Parametric null families f(x, θ), least-squares fitting under the null,
//! residuals and local-alternative mean functions.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A parametric regression function with analytic gradient in θ.
pub trait NullModel: Send + Sync {
    fn name(&self) -> String;

    /// Number of parameters k.
    fn dim(&self) -> usize;

    fn value(&self, x: f64, theta: &[f64]) -> f64;

    /// ∂f/∂θ at (x, θ), written into `out` (length `dim()`).
    fn gradient(&self, x: f64, theta: &[f64], out: &mut [f64]);

    /// Declared β with |∂f/∂θ| ≤ C(1 + |x|^β) near θ.
    fn growth_exponent(&self, theta: &[f64]) -> f64;

    /// Parameter used when simulating under the null without an override.
    fn default_theta(&self) -> Vec<f64>;
}

/// θ₁ + θ₂x + ··· + θ_k x^{k−1}. `k = 2` is the linear model.
#[derive(Clone, Copy, Debug)]
pub struct Polynomial {
    pub k: usize,
}

impl NullModel for Polynomial {
    fn name(&self) -> String {
        if self.k == 2 {
            "linear".into()
        } else {
            format!("poly:{}", self.k)
        }
    }

    fn dim(&self) -> usize {
        self.k
    }

    fn value(&self, x: f64, theta: &[f64]) -> f64 {
        theta.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    fn gradient(&self, x: f64, _theta: &[f64], out: &mut [f64]) {
        let mut p = 1.0;
        for o in out.iter_mut() {
            *o = p;
            p *= x;
        }
    }

    fn growth_exponent(&self, _theta: &[f64]) -> f64 {
        (self.k - 1) as f64
    }

    fn default_theta(&self) -> Vec<f64> {
        let mut t = vec![0.0; self.k];
        if self.k > 1 {
            t[1] = 1.0;
        }
        t
    }
}

/// a + b·|x|^c.
///
/// The absolute value keeps the family real on the whole line. The declared
/// growth exponent is the current c; the c-derivative carries an extra
/// log|x| factor, so the bound holds on any fixed region of θ with β = c + ε.
#[derive(Clone, Copy, Debug)]
pub struct Power;

impl NullModel for Power {
    fn name(&self) -> String {
        "power".into()
    }

    fn dim(&self) -> usize {
        3
    }

    fn value(&self, x: f64, theta: &[f64]) -> f64 {
        theta[0] + theta[1] * x.abs().powf(theta[2])
    }

    fn gradient(&self, x: f64, theta: &[f64], out: &mut [f64]) {
        let ax = x.abs();
        let p = ax.powf(theta[2]);
        out[0] = 1.0;
        out[1] = p;
        out[2] = if ax > 0.0 { theta[1] * p * ax.ln() } else { 0.0 };
    }

    fn growth_exponent(&self, theta: &[f64]) -> f64 {
        theta[2].max(0.0)
    }

    fn default_theta(&self) -> Vec<f64> {
        vec![0.0, 1.0, 1.5]
    }
}

/// (a + b·eˣ)/(1 + eˣ), a bounded logistic blend of two levels.
#[derive(Clone, Copy, Debug)]
pub struct WeightedExp;

fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

impl NullModel for WeightedExp {
    fn name(&self) -> String {
        "wexp".into()
    }

    fn dim(&self) -> usize {
        2
    }

    fn value(&self, x: f64, theta: &[f64]) -> f64 {
        let s = logistic(x);
        theta[0] * (1.0 - s) + theta[1] * s
    }

    fn gradient(&self, x: f64, _theta: &[f64], out: &mut [f64]) {
        let s = logistic(x);
        out[0] = 1.0 - s;
        out[1] = s;
    }

    fn growth_exponent(&self, _theta: &[f64]) -> f64 {
        0.0
    }

    fn default_theta(&self) -> Vec<f64> {
        vec![-1.0, 1.0]
    }
}

/// Look up a built-in model: "linear", "poly:k", "power", "wexp".
pub fn model_by_name(name: &str) -> Result<Arc<dyn NullModel>> {
    let name = name.trim().to_ascii_lowercase();
    match name.as_str() {
        "linear" => return Ok(Arc::new(Polynomial { k: 2 })),
        "power" => return Ok(Arc::new(Power)),
        "wexp" => return Ok(Arc::new(WeightedExp)),
        _ => {}
    }
    if let Some(k) = name.strip_prefix("poly:") {
        let k: usize = k
            .parse()
            .map_err(|_| Error::InvalidSpec(format!("bad polynomial order in '{name}'")))?;
        if k == 0 {
            return Err(Error::InvalidSpec("polynomial needs at least one coefficient".into()));
        }
        return Ok(Arc::new(Polynomial { k }));
    }
    Err(Error::InvalidSpec(format!("unknown model '{name}'")))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub theta_hat: Vec<f64>,
    /// û_{t+1} = y_{t+1} − f(x_t, θ̂)
    pub residuals: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Σ û², computed from `residuals`.
    pub objective: f64,
    /// Objective at the start and after every accepted step.
    pub objective_path: Vec<f64>,
}

fn sum_sq(v: &[f64]) -> f64 {
    v.iter().map(|r| r * r).sum()
}

fn check_aligned(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    Ok(())
}

/// Closed-form least squares of y_{t+1} on (1, x_t).
pub fn fit_linear(x: &[f64], y: &[f64]) -> Result<FitResult> {
    check_aligned(x, y)?;
    let n = x.len();
    if n < 3 {
        return Err(Error::Data(format!("need at least 3 observations, got {n}")));
    }
    let nf = n as f64;
    let xbar = x.iter().sum::<f64>() / nf;
    let ybar = y.iter().sum::<f64>() / nf;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (&xi, &yi) in x.iter().zip(y) {
        let dx = xi - xbar;
        sxx += dx * dx;
        sxy += dx * (yi - ybar);
    }
    let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if !(sxx > 0.0) || sxx <= 1e-24 * nf * scale * scale {
        return Err(Error::SingularDesign);
    }
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let residuals: Vec<f64> = x
        .iter()
        .zip(y)
        .map(|(&xi, &yi)| (yi - ybar) - slope * (xi - xbar))
        .collect();
    if residuals.iter().any(|r| !r.is_finite()) {
        return Err(Error::NonFinite("residuals of linear fit".into()));
    }
    let objective = sum_sq(&residuals);
    Ok(FitResult {
        theta_hat: vec![intercept, slope],
        residuals,
        iterations: 0,
        converged: true,
        objective,
        objective_path: vec![objective],
    })
}

/// y − f(x, θ) elementwise.
pub fn residuals(model: &dyn NullModel, theta: &[f64], x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    check_aligned(x, y)?;
    x.iter()
        .zip(y)
        .enumerate()
        .map(|(t, (&xi, &yi))| {
            let r = yi - model.value(xi, theta);
            if r.is_finite() {
                Ok(r)
            } else {
                Err(Error::NonFinite(format!("model value at position {t} (x = {xi})")))
            }
        })
        .collect()
}

#[derive(Clone, Copy, Debug)]
pub struct GaussNewtonOptions {
    pub max_iterations: usize,
    pub max_halvings: usize,
    /// Stop when ‖step‖ / (1 + ‖θ‖) falls below this.
    pub step_tolerance: f64,
    /// Stop when the relative decrease of Σ r² falls below this.
    pub objective_tolerance: f64,
    /// Singular values below `rank_tolerance · σ_max` count as zero.
    pub rank_tolerance: f64,
}

impl Default for GaussNewtonOptions {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            max_halvings: 30,
            step_tolerance: 1e-10,
            objective_tolerance: 1e-12,
            rank_tolerance: 1e-12,
        }
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

/// Damped Gauss–Newton for min_θ Σ (y_{t+1} − f(x_t, θ))².
pub fn fit_nls(
    model: &dyn NullModel,
    x: &[f64],
    y: &[f64],
    theta_init: &[f64],
    opts: &GaussNewtonOptions,
) -> Result<FitResult> {
    check_aligned(x, y)?;
    let k = model.dim();
    if theta_init.len() != k {
        return Err(Error::LengthMismatch {
            expected: k,
            got: theta_init.len(),
        });
    }
    if theta_init.iter().any(|t| !t.is_finite()) {
        return Err(Error::NonFinite("initial parameter".into()));
    }
    let n = x.len();
    let mut theta = theta_init.to_vec();
    let mut res = residuals(model, &theta, x, y)?;
    let mut obj = sum_sq(&res);
    let mut path = vec![obj];
    let mut grad = vec![0.0; k];
    let mut converged = false;
    let mut iterations = 0;

    for it in 1..=opts.max_iterations {
        iterations = it;
        let mut jac = DMatrix::<f64>::zeros(n, k);
        for (t, &xt) in x.iter().enumerate() {
            model.gradient(xt, &theta, &mut grad);
            for (j, g) in grad.iter().enumerate() {
                jac[(t, j)] = *g;
            }
        }
        let svd = jac.svd(true, true);
        let smax = svd.singular_values.max();
        let smin = svd.singular_values.min();
        if !(smax > 0.0) || smin <= opts.rank_tolerance * smax {
            return Err(Error::RankDeficient { iteration: it });
        }
        let rhs = DVector::from_column_slice(&res);
        let step = svd
            .solve(&rhs, 0.0)
            .map_err(|e| Error::Data(format!("least-squares step failed: {e}")))?;
        let step: Vec<f64> = step.iter().copied().collect();

        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..=opts.max_halvings {
            let trial: Vec<f64> = theta.iter().zip(&step).map(|(t, s)| t + alpha * s).collect();
            if let Ok(r) = residuals(model, &trial, x, y) {
                let o = sum_sq(&r);
                if o <= obj {
                    accepted = Some((trial, r, o));
                    break;
                }
            }
            alpha *= 0.5;
        }

        let full_rel_step = norm(&step) / (1.0 + norm(&theta));
        let Some((trial, r, o)) = accepted else {
            // no decrease along the Gauss–Newton direction: either at the
            // minimum up to rounding, or stuck
            converged = full_rel_step < 1e-8;
            break;
        };
        let rel_step = alpha * full_rel_step;
        let rel_dec = if obj > 0.0 { (obj - o) / obj } else { 0.0 };
        theta = trial;
        res = r;
        obj = o;
        path.push(obj);
        if obj == 0.0 || rel_step < opts.step_tolerance || rel_dec < opts.objective_tolerance {
            converged = true;
            break;
        }
    }

    Ok(FitResult {
        theta_hat: theta,
        objective: sum_sq(&res),
        residuals: res,
        iterations,
        converged,
        objective_path: path,
    })
}

/// Fit under the null: closed-form OLS when the model is linear, damped
/// Gauss–Newton otherwise.
pub fn fit_null(model: &dyn NullModel, x: &[f64], y: &[f64], theta_init: Option<&[f64]>) -> Result<FitResult> {
    if model.name() == "linear" {
        return fit_linear(x, y);
    }
    let init = theta_init
        .map(|t| t.to_vec())
        .ok_or_else(|| Error::InvalidSpec(format!("model '{}' needs an initial parameter", model.name())))?;
    fit_nls(model, x, y, &init, &GaussNewtonOptions::default())
}

/// Largest ratio |∂f/∂θ_j| / (1 + |x|^β) over the sample, β the declared
/// growth exponent.
pub fn growth_constant(model: &dyn NullModel, theta: &[f64], xs: &[f64]) -> f64 {
    let beta = model.growth_exponent(theta);
    let mut g = vec![0.0; model.dim()];
    xs.iter().fold(0.0f64, |c, &x| {
        model.gradient(x, theta, &mut g);
        let denom = 1.0 + x.abs().powf(beta);
        g.iter().fold(c, |c, v| c.max(v.abs() / denom))
    })
}

/// Deviation from the null: ρ_n·m(x), with m(x) = |x|^ν unless replaced.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlternativeSpec {
    pub nu: f64,
    pub rho_n: f64,
}

impl AlternativeSpec {
    pub fn new(nu: f64, rho_n: f64) -> Result<Self> {
        if !(nu >= 0.0 && nu.is_finite()) {
            return Err(Error::InvalidSpec(format!("nu must be >= 0, got {nu}")));
        }
        if !(rho_n >= 0.0 && rho_n.is_finite()) {
            return Err(Error::InvalidSpec(format!("rho_n must be >= 0, got {rho_n}")));
        }
        Ok(Self { nu, rho_n })
    }

    pub fn m(&self, x: f64) -> f64 {
        x.abs().powf(self.nu)
    }
}

/// x ↦ f_null(x) + ρ_n |x|^ν
pub fn apply_alternative<F>(f_null: F, alt: AlternativeSpec) -> impl Fn(f64) -> f64
where
    F: Fn(f64) -> f64,
{
    move |x| f_null(x) + alt.rho_n * alt.m(x)
}

/// x ↦ f_null(x) + ρ_n m(x) for a user-supplied m.
pub fn apply_alternative_with<F, M>(f_null: F, rho_n: f64, m: M) -> impl Fn(f64) -> f64
where
    F: Fn(f64) -> f64,
    M: Fn(f64) -> f64,
{
    move |x| f_null(x) + rho_n * m(x)
}
