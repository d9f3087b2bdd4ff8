use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use nistest::dgp::EtaSpec;
use nistest::harness::{
    self, AltConfig, BandwidthChoice, CsvTestOptions, DemoConfig, ExperimentConfig, Format, RunOptions,
};
use nistest::kernels::{Exponent, Kernel};
use nistest::stats;
use nistest::Error;

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;
const EXIT_DEGENERATE: u8 = 3;
const EXIT_REPRODUCTION: u8 = 4;

#[derive(Parser)]
#[command(name = "nistest", version, about = "Kernel specification test for regressions on near-integrated series")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Empirical size under the linear null
    Size(SimArgs),
    /// Empirical power under the local alternative ρ_n|x|^ν
    Power {
        #[command(flatten)]
        sim: SimArgs,
        /// Exponent ν of the alternative
        #[arg(long)]
        nu: f64,
        /// Use this ρ_n instead of 1/(n^{1/4+ν/3} h^{1/4})
        #[arg(long)]
        rho: Option<f64>,
    },
    /// Z draws under the null for one (n, h)
    Nulldist(SimArgs),
    /// Run the test on a CSV file with header t,x,y
    Test(TestArgs),
    /// Coupled local-time discrepancies and window sensitivity (CSV)
    LocaltimeDemo(DemoArgs),
    /// Rerun a published table and compare cell by cell
    Reproduce {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=6))]
        table: u8,
        #[arg(long, default_value_t = 5000)]
        reps: usize,
        #[arg(long, default_value_t = ExperimentConfig::default().base_seed)]
        seed: u64,
        #[arg(long, default_value = "gaussian")]
        kernel: Kernel,
        #[arg(long, value_enum, default_value_t = FormatArg::Markdown)]
        format: FormatArg,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum EtaMode {
    Iid,
    Ar,
    Ma,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
    Markdown,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Json => Format::Json,
            FormatArg::Csv => Format::Csv,
            FormatArg::Markdown => Format::Markdown,
        }
    }
}

#[derive(Args)]
struct SimArgs {
    /// Sample sizes (repeatable or comma separated)
    #[arg(long = "n", value_delimiter = ',', default_values_t = [100usize, 200, 500])]
    n: Vec<usize>,
    /// Bandwidth exponents p in h = n^-p, e.g. 1/3 (repeatable)
    #[arg(long = "bw-exp", value_delimiter = ',', default_values = ["1/4", "1/3", "1/2.5"])]
    bw_exp: Vec<Exponent>,
    /// Correlation between u_t and ε_t
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    r: f64,
    #[arg(long, value_enum, default_value_t = EtaMode::Iid)]
    eta: EtaMode,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    lambda: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    kappa: f64,
    #[arg(long, default_value_t = 5000)]
    reps: usize,
    #[arg(long, default_value_t = ExperimentConfig::default().base_seed)]
    seed: u64,
    #[arg(long, default_value = "gaussian")]
    kernel: Kernel,
    /// Null model: linear, poly:k, power, wexp
    #[arg(long, default_value = "linear")]
    model: String,
    /// True parameter of the null model (comma separated)
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    theta: Option<Vec<f64>>,
    #[arg(long, value_enum, default_value_t = FormatArg::Json)]
    format: FormatArg,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (results do not depend on this)
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct TestArgs {
    /// CSV file with header t,x,y; row t holds (x_t, y_{t+1})
    data: PathBuf,
    #[arg(long, default_value = "linear")]
    model: String,
    #[arg(long, default_value = "gaussian")]
    kernel: Kernel,
    /// Bandwidth exponent p in h = n^-p
    #[arg(long = "bw-exp", default_value = "1/3", conflicts_with = "h")]
    bw_exp: Exponent,
    /// Explicit bandwidth
    #[arg(long)]
    h: Option<f64>,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Starting value for Gauss-Newton (comma separated)
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    theta_init: Option<Vec<f64>>,
    #[arg(long, value_enum, default_value_t = FormatArg::Json)]
    format: FormatArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DemoArgs {
    #[arg(long = "n", value_delimiter = ',', default_values_t = [500usize, 1000, 2000])]
    n: Vec<usize>,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    kappa: f64,
    #[arg(long, value_enum, default_value_t = EtaMode::Iid)]
    eta: EtaMode,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    lambda: f64,
    /// Seeds per sample size
    #[arg(long, default_value_t = 5)]
    seeds: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Grid size of the path for the window sensitivity rows
    #[arg(long, default_value_t = 20_000)]
    m: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn eta_spec(mode: EtaMode, lambda: f64) -> EtaSpec {
    match mode {
        EtaMode::Iid => EtaSpec::Iid,
        EtaMode::Ar => EtaSpec::Ar { lambda },
        EtaMode::Ma => EtaSpec::Ma { lambda },
    }
}

impl SimArgs {
    fn config(&self, alt: Option<AltConfig>) -> ExperimentConfig {
        let base = ExperimentConfig::default();
        let theta_true = self.theta.clone().unwrap_or_else(|| {
            if self.model == "linear" {
                base.theta_true.clone()
            } else {
                nistest::models::model_by_name(&self.model)
                    .map(|m| m.default_theta())
                    .unwrap_or_default()
            }
        });
        ExperimentConfig {
            n_list: self.n.clone(),
            p_list: self.bw_exp.clone(),
            r: self.r,
            eta: eta_spec(self.eta, self.lambda),
            kappa: self.kappa,
            model: self.model.clone(),
            theta_true,
            alt,
            reps: self.reps,
            base_seed: self.seed,
            kernel: self.kernel,
            ..base
        }
    }

    fn run_options(&self) -> RunOptions {
        RunOptions { workers: self.workers }
    }
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::DegenerateStatistic => EXIT_DEGENERATE,
        Error::InvalidSpec(_) | Error::InvalidBandwidth(_) | Error::DivergentMoment(_) => EXIT_USAGE,
        _ => EXIT_DATA,
    }
}

fn null_summary_markdown(ns: &harness::NullSample) -> String {
    let z = &ns.z;
    format!(
        "| n | h | draws | failed | mean | sd | 95th pct | KS vs N(0,1) |\n|---|---|---|---|---|---|---|---|\n| {} | {:.4} | {} | {} | {:.4} | {:.4} | {:.4} | {:.4} |\n",
        ns.n,
        ns.h,
        z.len(),
        ns.failed,
        stats::mean(z),
        stats::variance(z).sqrt(),
        stats::quantile(z, 0.95),
        stats::ks_distance_normal(z)
    )
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::Size(sim) => {
            let report = harness::run_size(&sim.config(None), &sim.run_options())?;
            harness::emit_report(&report, sim.format.into(), sim.out.as_deref())?;
        }
        Command::Power { sim, nu, rho } => {
            let alt = AltConfig {
                nu,
                rho: match rho {
                    Some(value) => harness::RhoRule::Fixed { value },
                    None => harness::RhoRule::Paper,
                },
            };
            let report = harness::run_power(&sim.config(Some(alt)), &sim.run_options())?;
            harness::emit_report(&report, sim.format.into(), sim.out.as_deref())?;
        }
        Command::Nulldist(sim) => {
            let ns = harness::null_distribution_sample(&sim.config(None), &sim.run_options())?;
            let text = match sim.format {
                FormatArg::Json => serde_json::to_string_pretty(&ns)? + "\n",
                FormatArg::Csv => {
                    let mut s = String::from("z\n");
                    for z in &ns.z {
                        s.push_str(&format!("{z}\n"));
                    }
                    s
                }
                FormatArg::Markdown => null_summary_markdown(&ns),
            };
            harness::write_output(&text, sim.out.as_deref())?;
        }
        Command::Test(t) => {
            let opts = CsvTestOptions {
                model: t.model.clone(),
                kernel: t.kernel,
                bandwidth: match t.h {
                    Some(h) => BandwidthChoice::Explicit { h },
                    None => BandwidthChoice::Exponent { p: t.bw_exp.value },
                },
                alpha: t.alpha,
                theta_init: t.theta_init.clone(),
            };
            let outcome = harness::apply_test_csv(&t.data, &opts)?;
            for w in &outcome.warnings {
                eprintln!("warning: {w}");
            }
            eprintln!("{}", outcome.verdict());
            let r = &outcome.result;
            let text = match t.format {
                FormatArg::Json => serde_json::to_string_pretty(&outcome)? + "\n",
                FormatArg::Csv => format!(
                    "n,h,kernel,model,s,v2,z,p_value,alpha,reject\n{},{},{},{},{},{},{},{},{},{}\n",
                    r.n, r.h, r.kernel, r.model, r.s, r.v2, r.z, r.p_value, r.alpha, r.reject_alpha
                ),
                FormatArg::Markdown => format!(
                    "| n | h | Z | p-value | reject at {} |\n|---|---|---|---|---|\n| {} | {:.4} | {:.4} | {:.4} | {} |\n",
                    r.alpha, r.n, r.h, r.z, r.p_value, r.reject_alpha
                ),
            };
            harness::write_output(&text, t.out.as_deref())?;
        }
        Command::LocaltimeDemo(d) => {
            let cfg = DemoConfig {
                n_list: d.n,
                kappa: d.kappa,
                eta: eta_spec(d.eta, d.lambda),
                seeds: d.seeds,
                base_seed: d.seed,
                m: d.m,
            };
            let rows = harness::localtime_demo(&cfg)?;
            harness::write_output(&harness::render_demo_csv(&rows)?, d.out.as_deref())?;
        }
        Command::Reproduce {
            table,
            reps,
            seed,
            kernel,
            format,
            out,
            workers,
        } => {
            let rep = harness::reproduce(table, reps, seed, kernel, &RunOptions { workers })?;
            let text = match format {
                FormatArg::Json => serde_json::to_string_pretty(&rep)? + "\n",
                FormatArg::Csv => {
                    let mut s = String::from("r,eta,level,n,exponent,paper,ours,se,tolerance,pass\n");
                    for b in &rep.blocks {
                        for c in &b.cells {
                            s.push_str(&format!(
                                "{},{},{},{},{},{},{},{},{},{}\n",
                                b.r,
                                b.eta.mode_name(),
                                b.level,
                                c.n,
                                c.exponent,
                                c.paper,
                                c.ours,
                                c.se,
                                c.tolerance,
                                c.pass
                            ));
                        }
                    }
                    s
                }
                FormatArg::Markdown => harness::render_reproduction(&rep),
            };
            harness::write_output(&text, out.as_deref())?;
            if !rep.all_pass() {
                eprintln!("{} cells outside tolerance", rep.failures());
                return Ok(EXIT_REPRODUCTION);
            }
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
