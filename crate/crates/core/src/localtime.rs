//! The Gaussian limit process G(t) = ∫₀ᵗ e^{κ(t−s)} dW(s), window estimators
//! of its intersection local time L_G(r, u) and occupation density, the
//! functional S_[nr] of a normalized near-integrated series, and the
//! coupled construction that puts both on one probability space.
//!
//! Conventions. Grid points are t_i = i/m. Double sums in
//! [`intersection_l`] and [`functional_s`] run over the full square
//! i, j = 1..⌊rm⌋, diagonal included; the test statistic in
//! [`crate::teststat`] excludes its diagonal instead.

use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::dgp::{build_eta, build_regressor, draw_presample, EtaSpec, RegressorSpec};
use crate::error::{Error, Result};
use crate::quad;
use crate::rng::rng_from_seed;

/// G on the grid t_i = i/m, i = 0..m, with `values[0] = 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussPath {
    pub m: usize,
    pub kappa: f64,
    pub seed: Option<u64>,
    pub values: Vec<f64>,
}

impl GaussPath {
    /// Wrap explicit grid values (G(t_0), ..., G(t_m)).
    pub fn from_values(values: Vec<f64>, kappa: f64) -> Result<Self> {
        if values.len() < 3 {
            return Err(Error::InvalidSpec("a path needs at least 2 grid steps".into()));
        }
        Ok(Self {
            m: values.len() - 1,
            kappa,
            seed: None,
            values,
        })
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.m as f64
    }

    /// Number of grid points t_1..t_k with t_k ≤ r.
    pub fn points_up_to(&self, r: f64) -> usize {
        (((r * self.m as f64) + 1e-9).floor().max(0.0) as usize).min(self.m)
    }

    /// Sample standard deviation of G(t_1..t_m).
    pub fn spread(&self) -> f64 {
        let v = &self.values[1..];
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        (v.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    }

    /// ε = m^{−a} · sd(path).
    pub fn window(&self, exponent: f64) -> f64 {
        (self.m as f64).powf(-exponent) * self.spread()
    }

    /// ε = m^{−1/4} · sd(path).
    pub fn default_window(&self) -> f64 {
        self.window(0.25)
    }

    /// ε = 2b/3 for the histogram of `bins` bins over the path range. The
    /// window and histogram estimators of ∫ℓ² then carry the same leading
    /// bias (the local time has a |u| cusp at 0).
    pub fn histogram_matched_window(&self, bins: usize) -> f64 {
        let v = &self.values[1..];
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        2.0 * (hi - lo) / (3.0 * bins as f64)
    }
}

/// Exact transition of G on a uniform grid:
/// G(t_i) = e^{κΔ} G(t_{i−1}) + ξ_i, ξ_i ~ N(0, (e^{2κΔ} − 1)/(2κ)).
pub fn simulate_g(kappa: f64, m: usize, seed: u64) -> Result<GaussPath> {
    if m < 2 {
        return Err(Error::InvalidSpec(format!("grid size must be >= 2, got {m}")));
    }
    if !kappa.is_finite() {
        return Err(Error::InvalidSpec("kappa is not finite".into()));
    }
    let dt = 1.0 / m as f64;
    let decay = (kappa * dt).exp();
    let var = if kappa == 0.0 {
        dt
    } else {
        (2.0 * kappa * dt).exp_m1() / (2.0 * kappa)
    };
    let sd = var.sqrt();
    let mut rng = rng_from_seed(seed);
    let mut values = Vec::with_capacity(m + 1);
    let mut g = 0.0;
    values.push(g);
    for _ in 0..m {
        let xi: f64 = rng.sample(StandardNormal);
        g = decay * g + sd * xi;
        values.push(g);
    }
    Ok(GaussPath {
        m,
        kappa,
        seed: Some(seed),
        values,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalTimeEstimate {
    pub value: f64,
    pub r: f64,
    pub u: f64,
    pub epsilon: f64,
    pub m: usize,
}

/// Number of ordered pairs (i, j) over `sorted` with |v_i − v_j − u| < ε.
fn window_pair_count(sorted: &[f64], u: f64, eps: f64) -> u64 {
    // for fixed v_i the predicate is monotone along sorted v_j, so the
    // matching j form one contiguous run
    sorted
        .iter()
        .map(|&vi| {
            let lo = sorted.partition_point(|&vj| (vi - vj) - u >= eps);
            let hi = sorted.partition_point(|&vj| (vi - vj) - u > -eps);
            (hi.saturating_sub(lo)) as u64
        })
        .sum()
}

/// L̂(r, u) = (1/2ε) Δ² Σ_{i,j ≤ ⌊rm⌋} 1[|G(t_i) − G(t_j) − u| < ε]
pub fn intersection_l(path: &GaussPath, r: f64, u: f64, eps: f64) -> Result<LocalTimeEstimate> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidSpec(format!("window must be positive, got {eps}")));
    }
    if !(r >= 0.0 && r <= 1.0 + 1e-12) {
        return Err(Error::InvalidSpec(format!("time horizon must be in [0, 1], got {r}")));
    }
    let k = path.points_up_to(r);
    let mut v: Vec<f64> = path.values[1..=k].to_vec();
    v.sort_by(f64::total_cmp);
    let count = window_pair_count(&v, u, eps);
    let m = path.m as f64;
    Ok(LocalTimeEstimate {
        value: count as f64 / (m * m) / (2.0 * eps),
        r,
        u,
        epsilon: eps,
        m: path.m,
    })
}

/// L̂(r, 0) for every r in `grid`, sharing one window.
pub fn intersection_l_grid(path: &GaussPath, grid: &[f64], eps: f64) -> Result<Vec<f64>> {
    grid.iter()
        .map(|&r| intersection_l(path, r, 0.0, eps).map(|e| e.value))
        .collect()
}

/// Time-histogram estimate of the occupation density ℓ(r, a).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OccupationDensity {
    pub lo: f64,
    pub width: f64,
    /// ℓ̂ at each bin, (time in bin) / width.
    pub density: Vec<f64>,
}

impl OccupationDensity {
    /// ∫ ℓ̂(a)² da
    pub fn square_integral(&self) -> f64 {
        self.density.iter().map(|d| d * d).sum::<f64>() * self.width
    }
}

pub fn occupation_density(path: &GaussPath, r: f64, bins: usize) -> Result<OccupationDensity> {
    if bins == 0 {
        return Err(Error::InvalidSpec("need at least one bin".into()));
    }
    let k = path.points_up_to(r);
    let v = &path.values[1..=k];
    if v.is_empty() {
        return Err(Error::InvalidSpec("no grid points before r".into()));
    }
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = (hi - lo) / bins as f64;
    if !(width > 0.0) {
        return Err(Error::Data("path is constant; occupation density undefined".into()));
    }
    let mut counts = vec![0u64; bins];
    for &a in v {
        let b = (((a - lo) / width) as usize).min(bins - 1);
        counts[b] += 1;
    }
    let dt = path.dt();
    Ok(OccupationDensity {
        lo,
        width,
        density: counts.iter().map(|&c| c as f64 * dt / width).collect(),
    })
}

/// Both sides of L_G(1, 0) = ∫ ℓ_G(1, a)² da, each estimated from the path:
/// the window estimator and the squared occupation-density histogram.
pub fn occupation_identity(path: &GaussPath, bins: usize, eps: f64) -> Result<(f64, f64)> {
    if bins < 10 {
        return Err(Error::InvalidSpec(format!("need at least 10 bins, got {bins}")));
    }
    let direct = intersection_l(path, 1.0, 0.0, eps)?.value;
    let via = occupation_density(path, 1.0, bins)?.square_integral();
    Ok((direct, via))
}

/// Integrable test function g for the functional S_[nr].
#[derive(Clone)]
pub enum TestFunction {
    /// Standard normal density.
    GaussianBump,
    /// cos(x); bounded but not integrable, for the c_n = 1 regime only.
    Cosine,
    /// 1[|x| < half_width]
    Indicator { half_width: f64 },
    Custom {
        f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        symmetric: bool,
    },
}

impl std::fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TestFunction::GaussianBump => f.write_str("GaussianBump"),
            TestFunction::Cosine => f.write_str("Cosine"),
            TestFunction::Indicator { half_width } => write!(f, "Indicator({half_width})"),
            TestFunction::Custom { symmetric, .. } => write!(f, "Custom(symmetric={symmetric})"),
        }
    }
}

impl TestFunction {
    pub fn custom<F>(f: F, symmetric: bool) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        TestFunction::Custom {
            f: Arc::new(f),
            symmetric,
        }
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            TestFunction::GaussianBump => {
                if x.abs() > 38.7 {
                    0.0
                } else {
                    0.398_942_280_401_432_7 * (-0.5 * x * x).exp()
                }
            }
            TestFunction::Cosine => x.cos(),
            TestFunction::Indicator { half_width } => {
                if x.abs() < *half_width {
                    1.0
                } else {
                    0.0
                }
            }
            TestFunction::Custom { f, .. } => f(x),
        }
    }

    pub fn is_symmetric(&self) -> bool {
        match self {
            TestFunction::Custom { symmetric, .. } => *symmetric,
            _ => true,
        }
    }

    /// |x| beyond which g vanishes identically, if any.
    fn vanishes_beyond(&self) -> Option<f64> {
        match self {
            TestFunction::GaussianBump => Some(38.7),
            TestFunction::Indicator { half_width } => Some(*half_width),
            _ => None,
        }
    }

    /// ω = ∫ g, in closed form for the built-ins and by quadrature over
    /// [−50, 50] for custom functions. `None` when g is not integrable.
    pub fn integral(&self) -> Option<f64> {
        match self {
            TestFunction::GaussianBump => Some(1.0),
            TestFunction::Cosine => None,
            TestFunction::Indicator { half_width } => Some(2.0 * half_width),
            TestFunction::Custom { f, .. } => Some(quad::integrate(|x| f(x), -50.0, 50.0, 100, 1e-12)),
        }
    }
}

#[derive(Clone, Debug)]
pub struct FunctionalConfig {
    pub g: TestFunction,
    pub c_n: f64,
    /// ∫ g
    pub omega: f64,
}

impl FunctionalConfig {
    /// `omega = None` takes ∫ g from [`TestFunction::integral`].
    pub fn new(g: TestFunction, c_n: f64, omega: Option<f64>) -> Result<Self> {
        if !(c_n > 0.0 && c_n.is_finite()) {
            return Err(Error::InvalidSpec(format!("c_n must be positive, got {c_n}")));
        }
        let omega = match omega {
            Some(w) => w,
            None => g
                .integral()
                .ok_or_else(|| Error::InvalidSpec("g is not integrable; supply omega".into()))?,
        };
        if !omega.is_finite() {
            return Err(Error::InvalidSpec("omega is not finite".into()));
        }
        Ok(Self { g, c_n, omega })
    }
}

/// S_[nr] = (c_n / n²) Σ_{k,j=1}^{[nr]} g[c_n (x_{k,n} − x_{j,n})], with
/// n = `x_norm.len()` and the diagonal k = j included.
pub fn functional_s(x_norm: &[f64], config: &FunctionalConfig, r: f64) -> f64 {
    let n = x_norm.len();
    let k = (((r * n as f64) + 1e-9).floor().max(0.0) as usize).min(n);
    let c = config.c_n;
    let g = &config.g;
    let mut total = 0.0;
    for a in &x_norm[..k] {
        for b in &x_norm[..k] {
            total += g.eval(c * (a - b));
        }
    }
    c / (n as f64 * n as f64) * total
}

/// S_[nr] at every k = [nr] = 1..n, built incrementally in O(n²).
pub fn functional_s_path(x_norm: &[f64], config: &FunctionalConfig) -> Vec<f64> {
    let n = x_norm.len();
    let c = config.c_n;
    let g = &config.g;
    let scale = c / (n as f64 * n as f64);
    let sym = g.is_symmetric();
    let reach = g.vanishes_beyond().map(|w| w / c);
    let g0 = g.eval(0.0);
    let mut acc = 0.0;
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let xk = x_norm[k];
        let mut add = g0;
        for &xj in &x_norm[..k] {
            let d = xk - xj;
            if let Some(w) = reach {
                if d.abs() > w {
                    continue;
                }
            }
            add += if sym {
                2.0 * g.eval(c * d)
            } else {
                g.eval(c * d) + g.eval(-c * d)
            };
        }
        acc += add;
        out.push(scale * acc);
    }
    out
}

/// The normalized regressor x_{k,n} = y_{k,n} / (√n φ) and the limit path
/// G₁ driven by the same innovations.
#[derive(Clone, Debug)]
pub struct CoupledSample {
    pub x_norm: Vec<f64>,
    pub g1: GaussPath,
    pub phi: f64,
}

/// ∫₀^Δ v e^{κv} dv
fn weighted_step_integral(kappa: f64, dt: f64) -> f64 {
    let x = kappa * dt;
    if x.abs() < 0.1 {
        // Δ² Σ_k x^k / (k! (k + 2))
        let mut term = 1.0;
        let mut sum = 0.5;
        for k in 1..25 {
            term *= x / k as f64;
            sum += term / (k as f64 + 2.0);
        }
        dt * dt * sum
    } else {
        (x.exp() * (x - 1.0) + 1.0) / (kappa * kappa)
    }
}

/// Build x_{k,n} from ε_1..ε_n (plus the η pre-sample) and G₁ on the grid
/// i/n from W₁(i/n) = n^{−1/2} Σ_{j≤i} ε_j, using
/// G₁(t) = W₁(t) + κ ∫₀ᵗ e^{κ(t−s)} W₁(s) ds with W₁ linear between grid
/// points (the integral is then exact).
pub fn coupled_sample(eps: &[f64], presample: &[f64], kappa: f64, eta: &EtaSpec) -> Result<CoupledSample> {
    let n = eps.len();
    let reg = RegressorSpec::new(kappa, n)?;
    let phi = eta.long_run_phi();
    let eta_series = build_eta(eps, eta, presample)?;
    let y = build_regressor(&eta_series, &reg)?;
    let scale = 1.0 / ((n as f64).sqrt() * phi);
    let x_norm = y.iter().map(|v| v * scale).collect();

    let dt = 1.0 / n as f64;
    let decay = (kappa * dt).exp();
    let e1 = if kappa == 0.0 { dt } else { (kappa * dt).exp_m1() / kappa };
    let e2 = weighted_step_integral(kappa, dt);
    let sq = (n as f64).sqrt();
    let mut values = Vec::with_capacity(n + 1);
    values.push(0.0);
    let (mut w_prev, mut integral) = (0.0, 0.0);
    for &e in eps {
        let w = w_prev + e / sq;
        integral = decay * integral + w * e1 - (w - w_prev) / dt * e2;
        values.push(w + kappa * integral);
        w_prev = w;
    }
    Ok(CoupledSample {
        x_norm,
        g1: GaussPath {
            m: n,
            kappa,
            seed: None,
            values,
        },
        phi,
    })
}

/// Draw the η pre-sample and ε_1..ε_n from one seeded stream and couple.
pub fn simulate_coupled(n: usize, kappa: f64, eta: &EtaSpec, seed: u64) -> Result<CoupledSample> {
    eta.validate()?;
    let mut rng = rng_from_seed(seed);
    let presample = draw_presample(&mut rng, eta);
    let eps: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    coupled_sample(&eps, &presample, kappa, eta)
}

/// sup over `grid_r` of |S_[nr] − ω L̂_{G₁}(r, 0)|. `window` defaults to
/// [`GaussPath::default_window`] of G₁.
pub fn coupled_discrepancy(
    sample: &CoupledSample,
    config: &FunctionalConfig,
    grid_r: &[f64],
    window: Option<f64>,
) -> Result<f64> {
    if config.omega == 0.0 {
        return Err(Error::InvalidSpec("omega = 0: the limit is degenerate".into()));
    }
    let n = sample.x_norm.len();
    let path = functional_s_path(&sample.x_norm, config);
    let eps = window.unwrap_or_else(|| sample.g1.default_window());
    let mut worst = 0.0f64;
    for &r in grid_r {
        let k = (((r * n as f64) + 1e-9).floor().max(0.0) as usize).min(n);
        let s = if k == 0 { 0.0 } else { path[k - 1] };
        let l = intersection_l(&sample.g1, r, 0.0, eps)?.value;
        worst = worst.max((s - config.omega * l).abs());
    }
    Ok(worst)
}

/// Build the coupled pair from an innovation stream and return the sup
/// discrepancy over `grid_r`.
#[allow(clippy::too_many_arguments)]
pub fn coupled_convergence(
    eps: &[f64],
    presample: &[f64],
    kappa: f64,
    eta: &EtaSpec,
    config: &FunctionalConfig,
    grid_r: &[f64],
    window: Option<f64>,
) -> Result<f64> {
    if config.omega == 0.0 {
        return Err(Error::InvalidSpec("omega = 0: the limit is degenerate".into()));
    }
    let sample = coupled_sample(eps, presample, kappa, eta)?;
    coupled_discrepancy(&sample, config, grid_r, window)
}

/// c_n = 1 comparison: n⁻² Σ_{k,j} g(x_{k,n} − x_{j,n}) against the Riemann
/// sum of ∬ g[G₁(u) − G₁(v)] du dv on the coupled path.
pub fn riemann_compare(sample: &CoupledSample, g: &TestFunction) -> (f64, f64) {
    let double_mean = |v: &[f64]| {
        let n = v.len() as f64;
        let mut total = 0.0;
        for a in v {
            for b in v {
                total += g.eval(a - b);
            }
        }
        total / (n * n)
    };
    (double_mean(&sample.x_norm), double_mean(&sample.g1.values[1..]))
}

/// Recommended grid for sup-norm comparisons: r = 1/20, 2/20, ..., 1.
pub fn default_r_grid() -> Vec<f64> {
    (1..=20).map(|i| i as f64 / 20.0).collect()
}
