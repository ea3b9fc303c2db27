//! `stream-ista` command line.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use super::config::ExperimentConfig;
use super::experiment::{run_trials, sweep, sweep_lambda_s, SweepParam, SweepPoint};
use super::fit::fit_steady_state;
use super::lemmas::{inactive_lemma_grid, rip_lemma_suite};
use super::theorem::{check_theorem1, check_theorem2};
use crate::error::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "stream-ista", about = "Streaming sparse recovery experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args, Clone, Default)]
struct Common {
    /// Experiment config (`key = value` lines).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed override.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Trial count override.
    #[arg(long)]
    trials: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Average pre-measurement error curve.
    Run(Common),
    /// Sweep iterations per measurement and fit the steady-state model.
    SweepP(Common),
    /// Sweep the innovation energy.
    SweepMu(Common),
    /// Max support ratio over a threshold-sparsity grid.
    SweepLambdaS(Common),
    /// Fit the steady-state model to a `P,steady` file.
    FitSteady {
        #[command(flatten)]
        common: Common,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 0.8)]
        mu: f64,
        #[arg(long, default_value_t = 1.0)]
        dl: f64,
    },
    /// Check both tracking bounds on small exactly-analysable instances.
    CheckTheorems {
        #[command(flatten)]
        common: Common,
        /// Slack factor on `delta * mu * tau` for the LCA bound.
        #[arg(long, default_value_t = 5.0)]
        slack: f64,
    },
    /// Randomized and grid checks of the supporting lemmas.
    LemmaSuite(Common),
}

/// Small instances where the RIP constant at level `S + 2q` can be enumerated.
pub fn theorem_defaults() -> ExperimentConfig {
    ExperimentConfig {
        m: 48,
        n: 16,
        s: 2,
        n_pairs: 1,
        q: 2,
        measurements: 50,
        p: 10,
        beta: 1.0,
        mu: 0.5,
        lambda: 0.01,
        noise_level: 0.05,
        trials: 20,
        ..Default::default()
    }
}

fn load_config(common: &Common, base: ExperimentConfig) -> Result<ExperimentConfig> {
    let mut cfg = match &common.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
            ExperimentConfig::parse_with_base(&text, base)?
        }
        None => base,
    };
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(trials) = common.trials {
        cfg.trials = trials;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write(out: &Path, name: &str, contents: &str) -> Result<()> {
    fs::create_dir_all(out)?;
    fs::write(out.join(name), contents)?;
    Ok(())
}

fn curves_csv(points: &[SweepPoint], axis: &str) -> String {
    let mut out = format!("{axis},k,error_mean,error_std\n");
    for p in points {
        for (k, (m, s)) in p.set.mean.iter().zip(&p.set.std).enumerate() {
            out.push_str(&format!("{},{},{},{}\n", p.value, k + 1, m, s));
        }
    }
    out
}

fn steady_csv(points: &[SweepPoint], axis: &str, tail: f64) -> Result<(String, Vec<f64>)> {
    let mut out = format!("{axis},steady\n");
    let mut values = Vec::with_capacity(points.len());
    for p in points {
        let s = p.set.steady(tail)?;
        out.push_str(&format!("{},{}\n", p.value, s));
        values.push(s);
    }
    Ok((out, values))
}

fn read_steady(path: &Path) -> Result<(Vec<usize>, Vec<f64>)> {
    let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut ps = Vec::new();
    let mut ys = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (i == 0 && line.starts_with(|c: char| c.is_alphabetic())) {
            continue;
        }
        let (p, y) = line.split_once(',').ok_or_else(|| Error::Config(format!("line {}: expected P,steady", i + 1)))?;
        let p: f64 = p.trim().parse().map_err(|_| Error::Config(format!("line {}: bad P", i + 1)))?;
        ps.push(p as usize);
        ys.push(y.trim().parse().map_err(|_| Error::Config(format!("line {}: bad steady value", i + 1)))?);
    }
    Ok((ps, ys))
}

fn execute(cmd: Command) -> Result<()> {
    match cmd {
        Command::Run(common) => {
            let cfg = load_config(&common, ExperimentConfig::default())?;
            let set = run_trials(&cfg)?;
            write(&common.out, "curve.csv", &set.curve_csv())?;
            println!("steady_state,{}", set.steady(cfg.tail_fraction)?);
        }
        Command::SweepP(common) => {
            let cfg = load_config(&common, ExperimentConfig::default())?;
            let values = if cfg.sweep_values.is_empty() { (1..=10).map(f64::from).collect() } else { cfg.sweep_values.clone() };
            let points = sweep(&cfg, SweepParam::P, &values)?;
            let (steady, ys) = steady_csv(&points, "P", cfg.tail_fraction)?;
            write(&common.out, "curves.csv", &curves_csv(&points, "P"))?;
            write(&common.out, "steady.csv", &steady)?;
            let ps: Vec<usize> = values.iter().map(|v| *v as usize).collect();
            match fit_steady_state(&ps, &ys, cfg.mu, cfg.dl) {
                Ok(fit) => {
                    write(&common.out, "fit.csv", &fit.csv())?;
                    println!("c_hat,{}\nV_hat,{}\nr2,{}", fit.c_hat, fit.v_hat, fit.r2);
                }
                Err(e) => eprintln!("fit skipped: {e}"),
            }
        }
        Command::SweepMu(common) => {
            let cfg = load_config(&common, ExperimentConfig::default())?;
            let values = if cfg.sweep_values.is_empty() { vec![0.4, 0.8, 1.6] } else { cfg.sweep_values.clone() };
            let points = sweep(&cfg, SweepParam::Mu, &values)?;
            let (steady, _) = steady_csv(&points, "mu", cfg.tail_fraction)?;
            write(&common.out, "curves.csv", &curves_csv(&points, "mu"))?;
            write(&common.out, "steady.csv", &steady)?;
        }
        Command::SweepLambdaS(common) => {
            let cfg = load_config(&common, ExperimentConfig::default())?;
            let lambdas = if cfg.lambda_values.is_empty() { (1..=16).map(|i| 0.05 * i as f64).collect() } else { cfg.lambda_values.clone() };
            let ss = if cfg.s_values.is_empty() { vec![4, 8, 16] } else { cfg.s_values.clone() };
            let sw = sweep_lambda_s(&cfg, &lambdas, &ss)?;
            write(&common.out, "qratio.csv", &sw.csv())?;
            let c = sw.c_fit.map_or_else(|| "nan".to_string(), |c| c.to_string());
            write(&common.out, "qfit.csv", &format!("level,C\n{},{}\n", sw.level, c))?;
            println!("C,{c}");
        }
        Command::FitSteady { common, input, mu, dl } => {
            let (ps, ys) = read_steady(&input)?;
            let fit = fit_steady_state(&ps, &ys, mu, dl)?;
            if common.config.is_some() || common.out != Path::new(".") {
                write(&common.out, "fit.csv", &fit.csv())?;
            }
            println!("c_hat,{}\nV_hat,{}\nsse,{}\nr2,{}", fit.c_hat, fit.v_hat, fit.sse, fit.r2);
        }
        Command::CheckTheorems { common, slack } => {
            let cfg = load_config(&common, theorem_defaults())?;
            let thm1 = check_theorem1(&cfg)?;
            let thm2 = check_theorem2(&cfg, slack, 10)?;
            let mut pre = String::from("condition,lhs,rhs,pass\n");
            for o in &thm1 {
                pre.push_str(&o.report.to_lines(&format!("thm1.trial{}.", o.trial)));
            }
            for o in &thm2 {
                pre.push_str(&o.report.to_lines(&format!("thm2.trial{}.", o.trial)));
            }
            write(&common.out, "preconditions.csv", &pre)?;
            let mut dom = String::from("theorem,trial,delta,lambda,preconditions,violations,max_excess,max_support,q\n");
            let (mut passing, mut failing) = (0, 0);
            for o in &thm1 {
                match &o.dominance {
                    Some(d) => {
                        dom.push_str(&format!("1,{},{},{},true,{},{},{},{}\n", o.trial, o.delta, o.lambda, d.violations + d.step_violations, d.max_excess, d.max_support, d.q));
                        if d.ok() { passing += 1 } else { failing += 1 }
                    }
                    None => dom.push_str(&format!("1,{},{},{},false,,,,{}\n", o.trial, o.delta, o.lambda, cfg.q)),
                }
            }
            for o in &thm2 {
                match &o.coarse {
                    Some(d) => dom.push_str(&format!("2,{},{},{},true,{},{},{},{}\n", o.trial, o.delta, o.lambda, d.violations, d.max_excess, d.max_support, cfg.q)),
                    None => dom.push_str(&format!("2,{},{},{},false,,,,{}\n", o.trial, o.delta, o.lambda, cfg.q)),
                }
            }
            write(&common.out, "dominance.csv", &dom)?;
            println!("thm1_passing_instances,{passing}\nthm1_failing_instances,{failing}");
            if failing > 0 {
                return Err(Error::Precondition(format!("{failing} instances broke the ISTA bound")));
            }
        }
        Command::LemmaSuite(common) => {
            let cfg = load_config(&common, theorem_defaults())?;
            let rip = rip_lemma_suite(10, 8, 16, 2, 2, 1000, cfg.seed, 1e-10)?;
            let inactive = inactive_lemma_grid(21, 3.0, &[0.5, 1.0, 2.0], &[1, 2, 3])?;
            let mut out = String::from("lemma,cases,violations,max_excess\n");
            out.push_str(&format!("rip_consequences,{},{},{}\n", rip.cases, rip.violations, rip.max_excess));
            out.push_str(&format!("inactive_nodes,{},{},{}\n", inactive.cases, inactive.violations, inactive.max_excess));
            write(&common.out, "lemmas.csv", &out)?;
            print!("{out}");
        }
    }
    Ok(())
}

/// Entry point returning the process exit code.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match execute(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e @ Error::Config(_)) => {
            eprintln!("error: {e}");
            EXIT_CONFIG
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_RUNTIME
        }
    }
}
