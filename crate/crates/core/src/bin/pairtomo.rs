//! Command-line front end: POM checks and tomography campaigns.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use pairtomo::harness::{output, run_campaign, CampaignConfig, CampaignKind, CampaignResult};
use pairtomo::pom::{verify_pom, Pom, PomKind};
use pairtomo::states::{EnsembleKind, EnsembleSpec};

/// Exit status for malformed invocations and unusable configuration.
const USAGE: u8 = 2;

#[derive(Parser)]
#[command(name = "pairtomo", version, about = "Simulated two-qubit tomography with product and SIC measurements")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the algebraic properties of a POM and print the check table.
    VerifyPom {
        /// product or sic.
        #[arg(long, value_parser = parse::<PomKind>)]
        kind: PomKind,
    },
    /// Write the outcomes and dual operators of a POM as JSON.
    ExportPom {
        /// product or sic.
        #[arg(long, value_parser = parse::<PomKind>)]
        kind: PomKind,
        #[arg(long)]
        out: PathBuf,
    },
    /// Distance curves, fits and η for the four Bell states.
    Bell(Overrides),
    /// Sample averages of N-to-threshold and η over a random ensemble.
    Table {
        /// unbiased_mixed, biased_mixed, pure or max_entangled.
        #[arg(long, value_parser = parse::<EnsembleKind>)]
        ensemble: Option<EnsembleKind>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Any campaign described by a config file.
    Run {
        /// Campaign kind: bell, ensemble_average or single_state.
        #[arg(long, value_parser = parse::<CampaignKind>)]
        kind: Option<CampaignKind>,
        /// unbiased_mixed, biased_mixed, pure or max_entangled.
        #[arg(long, value_parser = parse::<EnsembleKind>)]
        ensemble: Option<EnsembleKind>,
        #[command(flatten)]
        overrides: Overrides,
    },
}

#[derive(Args)]
struct Overrides {
    /// JSON campaign configuration; every field is optional.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Runs per `N`.
    #[arg(long)]
    runs: Option<usize>,
    /// Number of sampled states.
    #[arg(long)]
    states: Option<usize>,
    /// Also write per-run distances.
    #[arg(long)]
    raw: bool,
}

fn parse<T: std::str::FromStr<Err = pairtomo::Error>>(s: &str) -> Result<T, String> {
    s.parse().map_err(|e: pairtomo::Error| e.to_string())
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<pairtomo::Error> for Failure {
    fn from(e: pairtomo::Error) -> Self {
        match e {
            pairtomo::Error::Config(_) | pairtomo::Error::InvalidEnsemble(_) => Failure::Usage(e.to_string()),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

fn build_config(
    overrides: &Overrides,
    kind: Option<CampaignKind>,
    ensemble: Option<EnsembleKind>,
) -> Result<CampaignConfig, Failure> {
    let mut cfg = match &overrides.config {
        Some(path) => CampaignConfig::load(path)?,
        None => CampaignConfig::default(),
    };
    if let Some(kind) = kind {
        cfg.kind = kind;
    }
    if let Some(ensemble) = ensemble {
        let keeps_spec = cfg.ensemble.as_ref().is_some_and(|s| s.kind == ensemble);
        if !keeps_spec {
            cfg.ensemble = Some(EnsembleSpec::new(ensemble, 0));
        }
    }
    if let Some(seed) = overrides.seed {
        cfg.master_seed = seed;
    }
    if let Some(runs) = overrides.runs {
        cfg.runs_per_point = runs;
    }
    if let Some(states) = overrides.states {
        cfg.n_states = states;
    }
    cfg.raw_runs |= overrides.raw;
    cfg.validate()?;
    Ok(cfg)
}

fn campaign(cfg: &CampaignConfig, out: &Path) -> Result<(), Failure> {
    let started = output::timestamp();
    let result = run_campaign(cfg)?;
    for w in &result.warnings {
        eprintln!("warning: {w}");
    }
    let files = output::write_outputs(&result, out, Some(started))?;
    report(&result);
    println!("wrote {}", files.points.parent().unwrap_or(out).display());
    Ok(())
}

fn report(result: &CampaignResult) {
    let s = &result.summary;
    println!("{} campaign, {} ({} states, D_thr = {})", s.campaign, s.ensemble, s.n_states, s.d_thr);
    for (pom, cells) in &s.n_thr {
        for (estimator, m) in cells {
            println!("  n_thr {pom:>7} {estimator}: {:8.1} ± {:.1}", m.mean, m.sd);
        }
    }
    for (estimator, m) in &s.eta {
        println!("  eta {estimator}: {:.3} ± {:.3}", m.mean, m.sd);
    }
    if s.ml_runs > 0 {
        println!("  ML runs {} (excluded {}), mean iterations {:.1}", s.ml_runs, s.ml_excluded, s.ml_iterations_mean);
    }
}

fn execute(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::VerifyPom { kind } => {
            let report = verify_pom(&Pom::build(kind));
            print!("{report}");
            if report.passed() {
                Ok(())
            } else {
                Err(Failure::Runtime(format!("{kind} POM failed verification")))
            }
        }
        Command::ExportPom { kind, out } => {
            Pom::build(kind).write_json(&out)?;
            println!("wrote {}", out.display());
            Ok(())
        }
        Command::Bell(overrides) => {
            let cfg = build_config(&overrides, Some(CampaignKind::Bell), None)?;
            campaign(&cfg, &overrides.out)
        }
        Command::Table { ensemble, overrides } => {
            let mut cfg = build_config(&overrides, Some(CampaignKind::EnsembleAverage), ensemble);
            if let Err(Failure::Usage(_)) = &cfg {
                if ensemble.is_none() && overrides.config.is_none() {
                    cfg = Err(Failure::Usage("table needs --ensemble or a config with an ensemble".into()));
                }
            }
            campaign(&cfg?, &overrides.out)
        }
        Command::Run { kind, ensemble, overrides } => {
            if overrides.config.is_none() {
                return Err(Failure::Usage("run needs --config".into()));
            }
            let cfg = build_config(&overrides, kind, ensemble)?;
            campaign(&cfg, &overrides.out)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(USAGE)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
