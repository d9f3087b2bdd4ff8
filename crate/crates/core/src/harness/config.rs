use serde::{Deserialize, Serialize};

use crate::dgp::{DgpSpec, EtaSpec, InnovationSpec};
use crate::error::{Error, Result};
use crate::kernels::{Exponent, Kernel};

/// How the local-alternative scale ρ_n is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "lowercase")]
pub enum RhoRule {
    /// ρ_n = 1 / (n^{1/4 + ν/3} h^{1/4})
    Paper,
    Fixed { value: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AltConfig {
    pub nu: f64,
    pub rho: RhoRule,
}

impl AltConfig {
    pub fn paper(nu: f64) -> Self {
        Self {
            nu,
            rho: RhoRule::Paper,
        }
    }

    pub fn rho_n(&self, n: usize, h: f64) -> f64 {
        match self.rho {
            RhoRule::Paper => 1.0 / ((n as f64).powf(0.25 + self.nu / 3.0) * h.powf(0.25)),
            RhoRule::Fixed { value } => value,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub n_list: Vec<usize>,
    pub p_list: Vec<Exponent>,
    /// corr(u_t, ε_t)
    pub r: f64,
    pub eta: EtaSpec,
    pub kappa: f64,
    /// Null model fitted in every replication (also the H₀ truth).
    pub model: String,
    /// True parameter of the null model.
    pub theta_true: Vec<f64>,
    pub alt: Option<AltConfig>,
    pub reps: usize,
    pub base_seed: u64,
    pub levels: Vec<f64>,
    pub kernel: Kernel,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n_list: vec![100, 200, 500],
            p_list: standard_exponents(),
            r: 0.0,
            eta: EtaSpec::Iid,
            kappa: 0.0,
            model: "linear".into(),
            theta_true: vec![0.0, 1.0],
            alt: None,
            reps: 5000,
            base_seed: 20_240_601,
            levels: vec![0.05, 0.01],
            kernel: Kernel::Gaussian,
        }
    }
}

/// p ∈ {1/4, 1/3, 1/2.5}
pub fn standard_exponents() -> Vec<Exponent> {
    ["1/4", "1/3", "1/2.5"]
        .iter()
        .map(|s| s.parse().expect("static exponent"))
        .collect()
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(Error::InvalidSpec("reps must be >= 1".into()));
        }
        if self.n_list.is_empty() || self.p_list.is_empty() {
            return Err(Error::InvalidSpec("need at least one n and one bandwidth exponent".into()));
        }
        if let Some(n) = self.n_list.iter().find(|n| **n < 3) {
            return Err(Error::InvalidSpec(format!("sample size must be >= 3, got {n}")));
        }
        if self.levels.is_empty() || self.levels.iter().any(|a| !(*a > 0.0 && *a < 1.0)) {
            return Err(Error::InvalidSpec("levels must lie in (0, 1)".into()));
        }
        if let Some(alt) = &self.alt {
            if !(alt.nu >= 0.0 && alt.nu.is_finite()) {
                return Err(Error::InvalidSpec(format!("nu must be >= 0, got {}", alt.nu)));
            }
            if let RhoRule::Fixed { value } = alt.rho {
                if !value.is_finite() {
                    return Err(Error::InvalidSpec("rho_n is not finite".into()));
                }
            }
        }
        InnovationSpec::new(self.r)?;
        self.eta.validate()?;
        if !self.kappa.is_finite() {
            return Err(Error::InvalidSpec("kappa is not finite".into()));
        }
        let model = crate::models::model_by_name(&self.model)?;
        if model.dim() != self.theta_true.len() {
            return Err(Error::InvalidSpec(format!(
                "model '{}' has {} parameters, theta_true has {}",
                self.model,
                model.dim(),
                self.theta_true.len()
            )));
        }
        Ok(())
    }

    pub fn dgp(&self, n: usize) -> DgpSpec {
        DgpSpec {
            n,
            kappa: self.kappa,
            innovations: InnovationSpec { r: self.r },
            eta: self.eta.clone(),
        }
    }
}
