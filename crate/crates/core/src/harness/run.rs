use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::report::{Cell, Report, ReportKind};
use crate::dgp::simulate_path;
use crate::error::{Error, Result};
use crate::kernels::bandwidth_from_exponent;
use crate::models::{fit_null, model_by_name, NullModel};
use crate::rng::replication_seed;
use crate::teststat::{pair_sums, rejects, z_statistic};

/// Execution settings that must not influence any reported number.
#[derive(Clone, Copy, Debug, Default)]
pub struct RunOptions {
    /// Worker threads; `None` uses the global rayon pool.
    pub workers: Option<usize>,
}

/// Z draws for one (n, p) cell; failed replications are counted and left out.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NullSample {
    pub n: usize,
    pub exponent: String,
    pub h: f64,
    pub z: Vec<f64>,
    pub failed: usize,
}

struct CellPlan {
    n: usize,
    p_index: usize,
    h: f64,
    rho_n: f64,
}

fn theta_init(theta: &[f64]) -> Vec<f64> {
    theta
        .iter()
        .map(|t| if *t == 0.0 { 0.1 } else { 1.1 * t })
        .collect()
}

fn replicate(cfg: &ExperimentConfig, model: &dyn NullModel, plan: &CellPlan, rep: usize) -> Result<f64> {
    let seed = replication_seed(cfg.base_seed, plan.n, plan.p_index, rep);
    let theta = &cfg.theta_true;
    let nu = cfg.alt.map_or(0.0, |a| a.nu);
    let rho = plan.rho_n;
    let f_true = |x: f64| {
        let base = model.value(x, theta);
        if rho == 0.0 {
            base
        } else {
            base + rho * x.abs().powf(nu)
        }
    };
    let path = simulate_path(&cfg.dgp(plan.n), f_true, seed)?;
    let init = if model.name() == "linear" {
        None
    } else {
        Some(theta_init(theta))
    };
    let fit = fit_null(model, &path.x, &path.y, init.as_deref())?;
    let ps = pair_sums(&fit.residuals, &path.x, cfg.kernel, plan.h)?;
    z_statistic(ps.s, ps.v2)
}

fn in_pool<T: Send>(opts: &RunOptions, job: impl FnOnce() -> T + Send) -> Result<T> {
    match opts.workers {
        None => Ok(job()),
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w.max(1))
                .build()
                .map_err(|e| Error::InvalidSpec(format!("thread pool: {e}")))?;
            Ok(pool.install(job))
        }
    }
}

fn plans(cfg: &ExperimentConfig) -> Result<Vec<CellPlan>> {
    let mut out = Vec::new();
    for &n in &cfg.n_list {
        for (p_index, p) in cfg.p_list.iter().enumerate() {
            let h = bandwidth_from_exponent(n, p.value)?.h;
            let rho_n = cfg.alt.map_or(0.0, |a| a.rho_n(n, h));
            out.push(CellPlan { n, p_index, h, rho_n });
        }
    }
    Ok(out)
}

/// Z for every replication of one cell, in replication order.
fn cell_draws(cfg: &ExperimentConfig, model: &Arc<dyn NullModel>, plan: &CellPlan) -> Vec<Option<f64>> {
    (0..cfg.reps)
        .into_par_iter()
        .map(|rep| replicate(cfg, model.as_ref(), plan, rep).ok())
        .collect()
}

fn run(cfg: &ExperimentConfig, kind: ReportKind, opts: &RunOptions) -> Result<Report> {
    cfg.validate()?;
    let start = Instant::now();
    let model = model_by_name(&cfg.model)?;
    let plans = plans(cfg)?;
    let mut cells = Vec::new();
    for plan in &plans {
        let draws = in_pool(opts, || cell_draws(cfg, &model, plan))?;
        let valid: Vec<f64> = draws.iter().flatten().copied().collect();
        let failed = draws.len() - valid.len();
        for &level in &cfg.levels {
            let rejections = valid.iter().filter(|z| rejects(**z, level)).count();
            cells.push(Cell::new(
                plan.n,
                cfg.p_list[plan.p_index].label.clone(),
                plan.h,
                plan.rho_n,
                level,
                rejections,
                valid.len(),
                failed,
            ));
        }
    }
    Ok(Report {
        kind,
        config: cfg.clone(),
        cells,
        runtime_seconds: Some(start.elapsed().as_secs_f64()),
    })
}

/// Empirical size under H₀ for every (n, p) of the configuration.
pub fn run_size(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Report> {
    if cfg.alt.is_some() {
        return Err(Error::InvalidSpec("size runs take no alternative".into()));
    }
    run(cfg, ReportKind::Size, opts)
}

/// Empirical power under the local alternative of the configuration.
pub fn run_power(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Report> {
    if cfg.alt.is_none() {
        return Err(Error::InvalidSpec("power runs need an alternative (nu)".into()));
    }
    run(cfg, ReportKind::Power, opts)
}

/// The Z draws of the first (n, p) cell under H₀.
pub fn null_distribution_sample(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<NullSample> {
    if cfg.alt.is_some() {
        return Err(Error::InvalidSpec("null distribution runs take no alternative".into()));
    }
    cfg.validate()?;
    let model = model_by_name(&cfg.model)?;
    let plan = plans(cfg)?.swap_remove(0);
    let draws = in_pool(opts, || cell_draws(cfg, &model, &plan))?;
    let z: Vec<f64> = draws.iter().flatten().copied().collect();
    Ok(NullSample {
        n: plan.n,
        exponent: cfg.p_list[0].label.clone(),
        h: plan.h,
        failed: draws.len() - z.len(),
        z,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::{AltConfig, RhoRule};

    fn small() -> ExperimentConfig {
        ExperimentConfig {
            n_list: vec![60],
            p_list: vec!["1/3".parse().unwrap()],
            reps: 40,
            ..Default::default()
        }
    }

    #[test]
    fn single_rep_rates_are_binary() {
        let cfg = ExperimentConfig { reps: 1, ..small() };
        let rep = run_size(&cfg, &RunOptions::default()).unwrap();
        for c in &rep.cells {
            assert!(c.rate == 0.0 || c.rate == 1.0);
        }
    }

    #[test]
    fn worker_count_does_not_matter() {
        let cfg = small();
        let a = run_size(&cfg, &RunOptions { workers: Some(1) }).unwrap();
        let b = run_size(&cfg, &RunOptions { workers: Some(3) }).unwrap();
        assert_eq!(a.cells, b.cells);
    }

    #[test]
    fn null_sample_matches_size_counts() {
        let cfg = small();
        let ns = null_distribution_sample(&cfg, &RunOptions::default()).unwrap();
        assert_eq!(ns.z.len() + ns.failed, cfg.reps);
        let rep = run_size(&cfg, &RunOptions::default()).unwrap();
        let hits = ns.z.iter().filter(|z| rejects(**z, 0.05)).count();
        assert_eq!(rep.cells[0].rejections, hits);
    }

    #[test]
    fn zero_rho_alternative_is_the_null() {
        let cfg = small();
        let alt = ExperimentConfig {
            alt: Some(AltConfig {
                nu: 3.0,
                rho: RhoRule::Fixed { value: 0.0 },
            }),
            ..cfg.clone()
        };
        let a = run_size(&cfg, &RunOptions::default()).unwrap();
        let b = run_power(&alt, &RunOptions::default()).unwrap();
        for (x, y) in a.cells.iter().zip(&b.cells) {
            assert_eq!(x.rejections, y.rejections);
        }
    }

    #[test]
    fn paper_rho_rule() {
        let a = AltConfig::paper(3.0);
        let h = 500f64.powf(-0.25);
        let expect = 1.0 / (500f64.powf(0.25 + 1.0) * h.powf(0.25));
        assert!((a.rho_n(500, h) - expect).abs() < 1e-15);
    }

    #[test]
    fn kind_mismatch_rejected() {
        let cfg = small();
        assert!(run_power(&cfg, &RunOptions::default()).is_err());
        let alt = ExperimentConfig {
            alt: Some(AltConfig::paper(2.0)),
            ..cfg
        };
        assert!(run_size(&alt, &RunOptions::default()).is_err());
    }

    #[test]
    fn nonlinear_null_runs() {
        let cfg = ExperimentConfig {
            model: "power".into(),
            theta_true: vec![0.5, 1.0, 1.5],
            reps: 10,
            ..small()
        };
        let rep = run_size(&cfg, &RunOptions::default()).unwrap();
        assert!(rep.cells[0].valid >= 8);
    }
}
