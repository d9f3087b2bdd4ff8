//! Local-time demonstration: coupled sup-discrepancies across n and the
//! sensitivity of L̂(1, 0) to the window.

use serde::{Deserialize, Serialize};

use crate::dgp::EtaSpec;
use crate::error::Result;
use crate::localtime::{
    coupled_discrepancy, default_r_grid, intersection_l, simulate_coupled, simulate_g, FunctionalConfig,
    TestFunction,
};
use crate::rng::mix_seed;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DemoConfig {
    pub n_list: Vec<usize>,
    pub kappa: f64,
    pub eta: EtaSpec,
    pub seeds: usize,
    pub base_seed: u64,
    /// Grid size of the path used for the window sensitivity rows.
    pub m: usize,
}

impl Default for DemoConfig {
    fn default() -> Self {
        Self {
            n_list: vec![500, 1000, 2000],
            kappa: 0.0,
            eta: EtaSpec::Iid,
            seeds: 5,
            base_seed: 7,
            m: 20_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DemoRow {
    pub section: String,
    pub n: usize,
    pub seed: u64,
    pub epsilon: f64,
    pub value: f64,
}

/// c_n = √n φ / h with h = n^{−1/3}.
pub fn coupling_scale(n: usize, phi: f64) -> f64 {
    let nf = n as f64;
    nf.sqrt() * phi * nf.powf(1.0 / 3.0)
}

pub fn localtime_demo(cfg: &DemoConfig) -> Result<Vec<DemoRow>> {
    cfg.eta.validate()?;
    let grid = default_r_grid();
    let phi = cfg.eta.long_run_phi();
    let mut rows = Vec::new();
    for &n in &cfg.n_list {
        let fc = FunctionalConfig::new(TestFunction::GaussianBump, coupling_scale(n, phi), None)?;
        for s in 0..cfg.seeds {
            let seed = mix_seed(cfg.base_seed, &[n as u64, s as u64]);
            let sample = simulate_coupled(n, cfg.kappa, &cfg.eta, seed)?;
            rows.push(DemoRow {
                section: "sup_discrepancy".into(),
                n,
                seed,
                epsilon: sample.g1.default_window(),
                value: coupled_discrepancy(&sample, &fc, &grid, None)?,
            });
        }
    }
    let seed = mix_seed(cfg.base_seed, &[u64::MAX]);
    let path = simulate_g(cfg.kappa, cfg.m, seed)?;
    let eps = path.default_window();
    for scale in [0.5, 1.0, 2.0] {
        rows.push(DemoRow {
            section: "window_sensitivity".into(),
            n: cfg.m,
            seed,
            epsilon: scale * eps,
            value: intersection_l(&path, 1.0, 0.0, scale * eps)?.value,
        });
    }
    Ok(rows)
}

pub fn render_demo_csv(rows: &[DemoRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| crate::error::Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
