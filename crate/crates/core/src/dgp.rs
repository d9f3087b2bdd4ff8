//! Data-generating processes: correlated innovation pairs, linear-process
//! errors η_t, the near-integrated regressor x_t and responses y_{t+1}.
//!
//! Stream layout for [`simulate_path`] (fixed, part of the reproducibility
//! contract): from `ChaCha8Rng::seed_from_u64(seed)` draw first the
//! `eta.burn_in_len()` pre-sample innovations, then `n + 1` pairs
//! `(ε_t, ξ_t)` in order, with `u_t = r·ε_t + √(1−r²)·ξ_t`. The regressor uses
//! ε_1..ε_n and the responses use u_2..u_{n+1}, so u_{t+1} is paired with the
//! innovation ε_{t+1} that first enters x_{t+1}.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{rng_from_seed, SimRng};

/// Burn-in length for AR(1) errors, started from η = 0.
pub const AR_BURN_IN: usize = 500;

/// Tail mass below which a linear-process expansion is truncated.
pub const LINEAR_TAIL_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InnovationSpec {
    /// Correlation between ε_t and u_t.
    pub r: f64,
}

impl InnovationSpec {
    pub fn new(r: f64) -> Result<Self> {
        let spec = Self { r };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.r.is_finite() || self.r.abs() > 1.0 {
            return Err(Error::InvalidSpec(format!(
                "correlation r must lie in [-1, 1], got {}",
                self.r
            )));
        }
        Ok(())
    }
}

/// Law of the linear process η_t = Σ φ_k ε_{t−k}.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum EtaSpec {
    Iid,
    /// η_t = λ η_{t−1} + ε_t
    Ar { lambda: f64 },
    /// η_t = ε_t + λ ε_{t−1}
    Ma { lambda: f64 },
    /// η_t = Σ_{k=0}^{L} φ_k ε_{t−k} with finitely many weights.
    Linear { phi: Vec<f64> },
}

impl Default for EtaSpec {
    fn default() -> Self {
        EtaSpec::Iid
    }
}

impl EtaSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            EtaSpec::Iid => {}
            EtaSpec::Ar { lambda } => {
                if !lambda.is_finite() || lambda.abs() >= 1.0 {
                    return Err(Error::InvalidSpec(format!(
                        "AR coefficient must satisfy |lambda| < 1, got {lambda}"
                    )));
                }
            }
            EtaSpec::Ma { lambda } => {
                if !lambda.is_finite() {
                    return Err(Error::InvalidSpec("MA coefficient is not finite".into()));
                }
            }
            EtaSpec::Linear { phi } => {
                if phi.is_empty() || phi.iter().any(|p| !p.is_finite()) {
                    return Err(Error::InvalidSpec(
                        "linear-process weights must be finite and nonempty".into(),
                    ));
                }
            }
        }
        if self.long_run_phi() == 0.0 {
            return Err(Error::InvalidSpec(
                "long-run coefficient phi = sum of weights must be nonzero".into(),
            ));
        }
        Ok(())
    }

    /// Long-run coefficient φ = Σ_k φ_k.
    pub fn long_run_phi(&self) -> f64 {
        match self {
            EtaSpec::Iid => 1.0,
            EtaSpec::Ar { lambda } => 1.0 / (1.0 - lambda),
            EtaSpec::Ma { lambda } => 1.0 + lambda,
            EtaSpec::Linear { phi } => phi.iter().sum(),
        }
    }

    /// Number of pre-sample innovations consumed before ε_1.
    pub fn burn_in_len(&self) -> usize {
        match self {
            EtaSpec::Iid => 0,
            EtaSpec::Ar { .. } => AR_BURN_IN,
            EtaSpec::Ma { .. } => 1,
            EtaSpec::Linear { phi } => phi.len() - 1,
        }
    }

    /// MA(∞) form of an AR(1), truncated at the first lag L with
    /// Σ_{k>L} |λ|^k < [`LINEAR_TAIL_TOLERANCE`].
    pub fn ar_as_linear(lambda: f64) -> Result<Self> {
        EtaSpec::Ar { lambda }.validate()?;
        let a = lambda.abs();
        let mut phi = vec![1.0];
        // tail after lag L is a^{L+1} / (1 - a)
        while a > 0.0 && a.powi(phi.len() as i32) / (1.0 - a) >= LINEAR_TAIL_TOLERANCE {
            let last = *phi.last().unwrap();
            phi.push(last * lambda);
        }
        Ok(EtaSpec::Linear { phi })
    }

    pub fn mode_name(&self) -> &'static str {
        match self {
            EtaSpec::Iid => "iid",
            EtaSpec::Ar { .. } => "ar",
            EtaSpec::Ma { .. } => "ma",
            EtaSpec::Linear { .. } => "linear",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegressorSpec {
    pub kappa: f64,
    pub n: usize,
}

impl RegressorSpec {
    pub fn new(kappa: f64, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidSpec(format!("sample size must be >= 2, got {n}")));
        }
        if !kappa.is_finite() {
            return Err(Error::InvalidSpec("kappa is not finite".into()));
        }
        Ok(Self { kappa, n })
    }

    /// ρ = 1 + κ/n
    pub fn rho(&self) -> f64 {
        1.0 + self.kappa / self.n as f64
    }
}

/// One simulated replication, aligned so that position `t` (0-based) holds
/// the regression pair (x_{t+1}, y_{t+2}) of the 1-based notation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplePath {
    pub n: usize,
    /// x_1..x_n
    pub x: Vec<f64>,
    /// u_2..u_{n+1}
    pub u: Vec<f64>,
    /// y_2..y_{n+1}
    pub y: Vec<f64>,
    /// ε_1..ε_n
    pub eps: Vec<f64>,
    pub seed: u64,
}

/// Full description of a simulated design (everything except the mean
/// function and the seed).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DgpSpec {
    pub n: usize,
    pub kappa: f64,
    pub innovations: InnovationSpec,
    pub eta: EtaSpec,
}

/// Draw `n` i.i.d. pairs (ε_t, u_t) with unit variances and correlation `r`.
pub fn draw_innovations(n: usize, spec: &InnovationSpec, seed: u64) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut rng = rng_from_seed(seed);
    draw_innovations_with(&mut rng, n, spec)
}

pub fn draw_innovations_with(
    rng: &mut SimRng,
    n: usize,
    spec: &InnovationSpec,
) -> Result<(Vec<f64>, Vec<f64>)> {
    spec.validate()?;
    if n == 0 {
        return Err(Error::InvalidSpec("need at least one innovation".into()));
    }
    let r = spec.r;
    let s = (1.0 - r * r).max(0.0).sqrt();
    let mut eps = Vec::with_capacity(n);
    let mut u = Vec::with_capacity(n);
    for _ in 0..n {
        let e: f64 = rng.sample(StandardNormal);
        let xi: f64 = rng.sample(StandardNormal);
        eps.push(e);
        u.push(r * e + s * xi);
    }
    Ok((eps, u))
}

pub fn draw_presample(rng: &mut SimRng, spec: &EtaSpec) -> Vec<f64> {
    (0..spec.burn_in_len())
        .map(|_| rng.sample::<f64, _>(StandardNormal))
        .collect()
}

/// Build η_1..η_n from ε_1..ε_n. `presample` holds the burn-in innovations
/// in time order ending at ε_0; missing pre-sample values are taken as 0.
pub fn build_eta(eps: &[f64], spec: &EtaSpec, presample: &[f64]) -> Result<Vec<f64>> {
    spec.validate()?;
    if eps.is_empty() {
        return Err(Error::InvalidSpec("empty innovation series".into()));
    }
    let eta = match spec {
        EtaSpec::Iid => eps.to_vec(),
        EtaSpec::Ar { lambda } => {
            let mut state = presample.iter().fold(0.0, |s, &e| lambda * s + e);
            eps.iter()
                .map(|&e| {
                    state = lambda * state + e;
                    state
                })
                .collect()
        }
        EtaSpec::Ma { lambda } => {
            let mut prev = presample.last().copied().unwrap_or(0.0);
            eps.iter()
                .map(|&e| {
                    let v = e + lambda * prev;
                    prev = e;
                    v
                })
                .collect()
        }
        EtaSpec::Linear { phi } => {
            // ε history indexed so that hist[presample.len() + t] = ε_{t+1}
            let hist: Vec<f64> = presample.iter().chain(eps.iter()).copied().collect();
            let off = presample.len();
            (0..eps.len())
                .map(|t| {
                    let pos = off + t;
                    phi.iter()
                        .enumerate()
                        .take_while(|(k, _)| *k <= pos)
                        .map(|(k, w)| w * hist[pos - k])
                        .sum()
                })
                .collect()
        }
    };
    Ok(eta)
}

/// x_t = ρ x_{t−1} + η_t with x_0 = 0.
pub fn build_regressor(eta: &[f64], spec: &RegressorSpec) -> Result<Vec<f64>> {
    if eta.len() != spec.n {
        return Err(Error::LengthMismatch {
            expected: spec.n,
            got: eta.len(),
        });
    }
    let rho = spec.rho();
    let mut x = 0.0;
    Ok(eta
        .iter()
        .map(|&e| {
            x = rho * x + e;
            x
        })
        .collect())
}

/// y_{t+1} = f(x_t) + u_{t+1}
pub fn build_response<F>(x: &[f64], u: &[f64], f_true: F) -> Result<Vec<f64>>
where
    F: Fn(f64) -> f64,
{
    if x.len() != u.len() {
        return Err(Error::LengthMismatch {
            expected: x.len(),
            got: u.len(),
        });
    }
    x.iter()
        .zip(u)
        .enumerate()
        .map(|(t, (&xt, &ut))| {
            let y = f_true(xt) + ut;
            if y.is_finite() {
                Ok(y)
            } else {
                Err(Error::NonFinite(format!("response at position {t} (x = {xt})")))
            }
        })
        .collect()
}

pub fn long_run_phi(spec: &EtaSpec) -> f64 {
    spec.long_run_phi()
}

/// Simulate one replication of the design with mean function `f_true`.
pub fn simulate_path<F>(spec: &DgpSpec, f_true: F, seed: u64) -> Result<SamplePath>
where
    F: Fn(f64) -> f64,
{
    let reg = RegressorSpec::new(spec.kappa, spec.n)?;
    spec.eta.validate()?;
    let mut rng = rng_from_seed(seed);
    let presample = draw_presample(&mut rng, &spec.eta);
    let (mut eps, mut u) = draw_innovations_with(&mut rng, spec.n + 1, &spec.innovations)?;
    eps.truncate(spec.n);
    u.remove(0);
    let eta = build_eta(&eps, &spec.eta, &presample)?;
    let x = build_regressor(&eta, &reg)?;
    let y = build_response(&x, &u, f_true)?;
    Ok(SamplePath {
        n: spec.n,
        x,
        u,
        y,
        eps,
        seed,
    })
}
