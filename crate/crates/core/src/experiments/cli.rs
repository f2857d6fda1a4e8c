//! Command-line entry point.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use super::{compare, evaluate_method, summarize, train_method, MethodId, MethodRuns, Setup};
use crate::env::write_trace;
use crate::error::{Error, Result};
use crate::learning::{write_curves, Checkpoint};
use crate::model::{generate_synthetic, load_requests, write_requests, RunConfig};
use crate::segmentation::MapKind;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "skyfleet", version, about = "Multi-drone parcel delivery planning and evaluation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a synthetic request CSV.
    Generate {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build a service map and write it as JSON.
    Segment {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_parser = parse_kind, default_value = "kmeans")]
        kind: MapKind,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train a learned method; writes checkpoint.json and curves.csv.
    Train {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "mar_ops")]
        method: MethodId,
        #[arg(long)]
        episodes: Option<usize>,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Evaluate one method on a request file; writes report.json,
    /// timing.json and trace.csv.
    Evaluate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        method: MethodId,
        #[arg(long)]
        requests: Option<PathBuf>,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long)]
        reps: Option<usize>,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Train and evaluate all five methods on held-out days.
    Compare {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        reps: Option<usize>,
        #[arg(long)]
        episodes: Option<usize>,
        #[arg(long)]
        out_dir: PathBuf,
    },
}

fn parse_kind(s: &str) -> std::result::Result<MapKind, String> {
    match s.to_ascii_lowercase().as_str() {
        "kmeans" => Ok(MapKind::Kmeans),
        "grid" => Ok(MapKind::Grid),
        other => Err(format!("unknown map kind `{other}` (kmeans or grid)")),
    }
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_)
        | Error::Io { .. }
        | Error::MalformedRow { .. }
        | Error::DuplicateId(_)
        | Error::InvalidRequest { .. }
        | Error::Parse(_)
        | Error::Csv(_)
        | Error::Json(_)
        | Error::Segmentation(_) => EXIT_CONFIG,
        Error::Infeasible { .. } => EXIT_INFEASIBLE,
        _ => EXIT_FAILURE,
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match execute(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn load_config(path: &Path) -> Result<RunConfig> {
    let rc = RunConfig::load(path)?;
    if rc.scenario.num_drones == 0 {
        return Err(Error::Config("num_drones must be >= 1".into()));
    }
    Ok(rc)
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn execute(cmd: Command) -> Result<()> {
    match cmd {
        Command::Generate { config, seed, out } => {
            let mut rc = match config {
                Some(p) => load_config(&p)?,
                None => RunConfig::default(),
            };
            if let Some(s) = seed {
                rc.scenario.rng_seed = s;
            }
            let s = &rc.scenario;
            let reqs = generate_synthetic(s, rc.drone.max_payload, s.cluster_count, s.requests_per_window)?;
            write_requests(&out, &reqs)?;
            println!("wrote {} requests to {}", reqs.len(), out.display());
        }
        Command::Segment { config, kind, out } => {
            let rc = load_config(&config)?;
            let setup = Setup::new(&rc)?;
            setup.map(kind)?.write_json(&out)?;
            println!("wrote {} areas to {}", rc.scenario.num_depots, out.display());
        }
        Command::Train {
            config,
            method,
            episodes,
            out_dir,
        } => {
            let mut rc = load_config(&config)?;
            if let Some(e) = episodes {
                rc.learning.episodes = e;
            }
            ensure_dir(&out_dir)?;
            let setup = Setup::new(&rc)?;
            let policy = train_method(&setup, method, &rc.learning)?;
            Checkpoint::new(method.name(), &policy.agent).save(out_dir.join("checkpoint.json"))?;
            write_curves(out_dir.join("curves.csv"), &policy.curves)?;
            println!("trained {method} for {} episodes", rc.learning.episodes);
        }
        Command::Evaluate {
            config,
            method,
            requests,
            checkpoint,
            reps,
            out_dir,
        } => {
            let rc = load_config(&config)?;
            let Some(req_path) = requests else {
                return Err(Error::Config("evaluate needs --requests <csv>".into()));
            };
            let reqs = load_requests(&req_path, &rc.scenario, rc.drone.max_payload)?;
            let setup = Setup::new(&rc)?;
            let agent = match (&checkpoint, method.is_learned()) {
                (Some(p), _) => {
                    let cp = Checkpoint::load(p)?;
                    if cp.method != method.name() {
                        return Err(Error::Config(format!(
                            "checkpoint is for {}, not {method}",
                            cp.method
                        )));
                    }
                    Some(cp.agent)
                }
                (None, true) => return Err(Error::Config(format!("{method} needs --checkpoint"))),
                (None, false) => None,
            };
            ensure_dir(&out_dir)?;
            let reps = reps.unwrap_or(rc.experiment.reps);
            let outcomes = evaluate_method(&setup, method, agent.as_ref(), reps, Some(&reqs))?;
            write_trace(out_dir.join("trace.csv"), &outcomes[0].trace)?;
            let runs = vec![MethodRuns { method, outcomes }];
            let (report, timing) = summarize(&setup, &runs, 0);
            report.validate()?;
            report.write(out_dir.join("report.json"))?;
            timing.write(out_dir.join("timing.json"))?;
            println!("{}", report.to_json()?);
        }
        Command::Compare {
            config,
            reps,
            episodes,
            out_dir,
        } => {
            let mut rc = load_config(&config)?;
            if let Some(r) = reps {
                rc.experiment.reps = r;
            }
            if let Some(e) = episodes {
                rc.learning.episodes = e;
            }
            rc.validate()?;
            ensure_dir(&out_dir)?;
            let setup = Setup::new(&rc)?;
            let result = compare(&setup, rc.experiment.reps)?;
            result.report.validate()?;
            result.report.write(out_dir.join("report.json"))?;
            result.timing.write(out_dir.join("timing.json"))?;
            setup.kmeans_map.write_json(out_dir.join("servicemap.json"))?;
            for (m, p) in &result.policies {
                let stem = m.name().to_ascii_lowercase();
                write_curves(out_dir.join(format!("curves_{stem}.csv")), &p.curves)?;
            }
            if let Some(mar) = result.runs.iter().find(|r| r.method == MethodId::MarOps) {
                write_trace(out_dir.join("trace.csv"), &mar.outcomes[0].trace)?;
            }
            for m in &result.report.methods {
                println!(
                    "{:<11} energy {:>8.1} ± {:<6.1} kJ  delay {:>6.3} ± {:<5.3} h  combined {:.3}  gini {:.3}",
                    m.method.name(),
                    m.mean_energy_kj.mean,
                    m.mean_energy_kj.std,
                    m.avg_delay_h.mean,
                    m.avg_delay_h.std,
                    m.combined_cost.mean,
                    m.delay_unfairness.mean
                );
            }
        }
    }
    Ok(())
}
