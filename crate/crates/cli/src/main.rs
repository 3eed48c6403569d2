use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use nadic_core::config::{DepthSetting, Mode, StageConfig};
use nadic_core::driver::{matrix, run, verify_all};
use nadic_core::report::Report;
use nadic_core::{ExactRational, ExperimentConfig};

#[derive(Parser)]
#[command(name = "nadic", version, about = "Exact n-adic doubling and reverse Hölder experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a single-stage density (or a ray of stages with --stages) and check its bounds
    Construct(Opts),
    /// n-adic doubling constants of the constructed density
    Doubling(Opts),
    /// Reverse Hölder constants over n-adic intervals and anchored intervals
    Rh(Opts),
    /// A_r constants and subdivision bounds of the constructed weight
    Ar(Opts),
    /// Simultaneous approximation witness for the given bases
    Lemma4(Opts),
    /// Nested construction meeting a target table
    Nested(Opts),
    /// Full invariant suite with a pass/fail matrix
    Verify(Opts),
}

#[derive(Args, Clone, Default)]
struct Opts {
    /// Experiment config (TOML)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for report.json, constants.csv and plotdata.tsv
    #[arg(long)]
    out: Option<PathBuf>,
    /// Search depth: `auto` or a level
    #[arg(long)]
    depth: Option<DepthSetting>,
    /// Comma-separated bases, e.g. 2,3,5
    #[arg(long, value_delimiter = ',')]
    bases: Option<Vec<u32>>,
    /// Comma-separated exponents r
    #[arg(long, value_delimiter = ',')]
    r: Option<Vec<u32>>,
    /// Number of stages
    #[arg(long)]
    stages: Option<usize>,
    /// Seed for the randomized oracle comparisons
    #[arg(long)]
    seed: Option<u64>,
    /// Approximation tolerance, e.g. 1/50
    #[arg(long)]
    epsilon: Option<ExactRational>,
    /// Largest centre exponent searched
    #[arg(long)]
    x_max: Option<u64>,
    /// Weight a of every stage, e.g. 2/3
    #[arg(long)]
    a: Option<ExactRational>,
    /// Exponent alpha of every stage
    #[arg(long)]
    alpha: Option<u32>,
    /// Density file replacing the constructed density
    #[arg(long)]
    density: Option<PathBuf>,
}

fn allowed(cmd: &Command) -> &'static [Mode] {
    match cmd {
        Command::Construct(_) | Command::Doubling(_) => &[Mode::SingleStage, Mode::Ray, Mode::Motivating],
        Command::Rh(_) | Command::Ar(_) => &[Mode::Weights],
        Command::Lemma4(_) => &[Mode::Lemma4],
        Command::Nested(_) => &[Mode::Nested],
        Command::Verify(_) => &[Mode::SingleStage, Mode::Ray, Mode::Nested, Mode::Motivating, Mode::Lemma4, Mode::Weights],
    }
}

fn opts(cmd: &Command) -> &Opts {
    match cmd {
        Command::Construct(o)
        | Command::Doubling(o)
        | Command::Rh(o)
        | Command::Ar(o)
        | Command::Lemma4(o)
        | Command::Nested(o)
        | Command::Verify(o) => o,
    }
}

/// Configuration used when no --config is given.
fn default_config(cmd: &Command, o: &Opts) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default_single_stage();
    match cmd {
        Command::Construct(_) | Command::Doubling(_) if o.stages.is_some_and(|s| s > 1) => {
            cfg.mode = Mode::Ray;
            cfg.a = Some(cfg.stage[0].a.clone());
            cfg.stage.clear();
        }
        Command::Rh(_) | Command::Ar(_) => cfg.mode = Mode::Weights,
        Command::Lemma4(_) => {
            cfg.mode = Mode::Lemma4;
            cfg.bases = Some(vec![3]);
            cfg.epsilon = Some(ExactRational::new(7, 500));
            cfg.x_max = Some(50);
            cfg.stage.clear();
        }
        Command::Nested(_) => {
            cfg.mode = Mode::Nested;
            cfg.bases = None;
            cfg.stages = Some(3);
            let target: BTreeMap<String, ExactRational> =
                (2..=8).map(|n| (n.to_string(), ExactRational::from(n as i64))).collect();
            cfg.target = Some(target);
            cfg.epsilon = None;
            cfg.stage.clear();
        }
        _ => {}
    }
    cfg
}

fn build_config(cmd: &Command) -> anyhow::Result<ExperimentConfig> {
    let o = opts(cmd);
    let mut cfg = match &o.config {
        Some(p) => ExperimentConfig::load(p).with_context(|| format!("reading {}", p.display()))?,
        None => default_config(cmd, o),
    };
    if !allowed(cmd).contains(&cfg.mode) {
        bail!("config mode {:?} does not fit this subcommand", cfg.mode);
    }
    if let Some(d) = o.depth {
        cfg.depth = d;
    }
    if let Some(b) = &o.bases {
        cfg.bases = Some(b.clone());
    }
    if let Some(r) = &o.r {
        cfg.r = r.clone();
    }
    if let Some(s) = o.stages {
        cfg.stages = Some(s);
    }
    if let Some(s) = o.seed {
        cfg.seed = Some(s);
    }
    if let Some(e) = &o.epsilon {
        cfg.epsilon = Some(e.clone());
    }
    if let Some(x) = o.x_max {
        cfg.x_max = Some(x);
    }
    if let Some(a) = &o.a {
        cfg.a = cfg.a.as_ref().map(|_| a.clone());
        cfg.stage.iter_mut().for_each(|s| s.a = a.clone());
    }
    if let Some(al) = o.alpha {
        cfg.stage.iter_mut().for_each(|s| s.alpha = al);
    }
    if let Some(d) = &o.density {
        cfg.density = Some(d.clone());
    }
    // a ray given only by stage count repeats the single stage
    if cfg.mode == Mode::Ray && cfg.stage.len() == 1 && cfg.stages.is_some_and(|s| s > 1) {
        let s: &StageConfig = &cfg.stage[0];
        cfg.a = Some(s.a.clone());
        cfg.stage.clear();
    }
    Ok(cfg)
}

fn out_dir(o: &Opts, cfg: &ExperimentConfig) -> PathBuf {
    o.out.clone().or_else(|| cfg.out.clone()).unwrap_or_else(|| Path::new("out").to_path_buf())
}

fn execute(cmd: &Command) -> anyhow::Result<Report> {
    let cfg = build_config(cmd)?;
    let rep = match cmd {
        Command::Verify(_) => verify_all(&cfg)?,
        _ => run(&cfg)?,
    };
    let dir = out_dir(opts(cmd), &cfg);
    rep.write_to(&dir).with_context(|| format!("writing {}", dir.display()))?;
    Ok(rep)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli.command) {
        Ok(rep) => {
            print!("{}", matrix(&rep));
            if rep.all_passed() {
                ExitCode::SUCCESS
            } else {
                let failures = serde_json::to_string_pretty(&rep.failures()).unwrap_or_default();
                eprintln!("failed checks:\n{failures}");
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
