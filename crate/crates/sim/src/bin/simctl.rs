use std::net::TcpListener;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use gridsoc_core::session::replay;
use gridsoc_sim::backend::{BackendKind, BackendSpec};
use gridsoc_sim::export::export_run;
use gridsoc_sim::load::{load_lexicon, load_runlog, load_scenario, sample_lexicon, shipped_scenario};
use gridsoc_sim::pipeline::{self, PipelineOptions};
use gridsoc_sim::scaling;
use gridsoc_sim::server::{serve, Hub, ServerConfig};
use gridsoc_sim::store::Store;

#[derive(Parser)]
#[command(name = "simctl", version, about = "Create, run, export and replay grid-society sessions")]
struct Cli {
    /// Session directory root (defaults to $SIMCTL_HOME, then ./sessions).
    #[arg(long, global = true)]
    home: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Create a session from a scenario file or a shipped scenario name.
    New {
        scenario: String,
        #[arg(long, default_value = "mock")]
        backend: BackendKind,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Reply transcript for the canned backend.
        #[arg(long)]
        transcript: Option<PathBuf>,
        /// VAD lexicon file; the bundled sample when omitted.
        #[arg(long)]
        lexicon: Option<PathBuf>,
    },
    /// Advance a session until round R.
    Run {
        id: String,
        #[arg(long)]
        until: u64,
    },
    /// Write the CSV tables and manifest of a session.
    Export { id: String, dir: PathBuf },
    /// Re-execute a run log and report the first divergence.
    Replay {
        scenario: PathBuf,
        runlog: PathBuf,
        /// Lexicon the session was created with; the bundled sample when omitted.
        #[arg(long)]
        lexicon: Option<PathBuf>,
    },
    /// Print session state as JSON.
    Show { id: String },
    /// Serve sessions over newline-delimited JSON.
    Serve {
        #[arg(long, default_value = "127.0.0.1:7878")]
        addr: String,
        /// Round barrier timeout in milliseconds; waits indefinitely when unset.
        #[arg(long)]
        barrier_ms: Option<u64>,
    },
    /// Run the shipped study pipelines.
    Study {
        /// `1`, `2`, `3` or `all`.
        #[arg(default_value = "all")]
        which: String,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value = "mock")]
        backend: BackendKind,
        #[arg(long, default_value = "study-out")]
        out: PathBuf,
    },
    /// Time rounds over growing populations and fit a line.
    Scaling {
        #[arg(long, default_value_t = 3)]
        rounds: u64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
}

fn print_json<T: serde::Serialize>(v: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    let store = cli.home.map(Store::new).unwrap_or_else(Store::from_env);
    match cli.command {
        Command::New { scenario, backend, seed, transcript, lexicon } => {
            let path = PathBuf::from(&scenario);
            let doc = if path.exists() { load_scenario(&path)? } else { shipped_scenario(&scenario)? };
            let spec = BackendSpec { kind: backend, transcript };
            spec.build(seed, doc.config.embed_dim).context("checking the backend")?;
            let (meta, session) = store.create(doc, spec, seed, lexicon)?;
            println!("{}", meta.id);
            log::info!("{} agents, digest {}", session.agent_ids().len(), session.state_digest());
        }
        Command::Run { id, until } => {
            let (meta, mut session) = store.open(&id)?;
            let mut backend = meta.backend.build(meta.seed, session.scenario().config.embed_dim)?;
            if !session.awaiting_humans().is_empty() {
                log::warn!("attached humans idle in batch runs");
            }
            let status = session.run_until(until, backend.as_mut());
            store.save(&meta, &session)?;
            print_json(&status)?;
        }
        Command::Export { id, dir } => {
            let (_, session) = store.open(&id)?;
            let manifest = export_run(&session, &dir)?;
            print_json(&manifest)?;
        }
        Command::Replay { scenario, runlog, lexicon } => {
            let doc = load_scenario(&scenario)?;
            let log = load_runlog(&runlog)?;
            let lexicon = match lexicon {
                Some(p) => load_lexicon(&p)?,
                None => sample_lexicon(),
            };
            let report = replay(Arc::new(doc), Arc::new(lexicon), &log)?;
            print_json(&report)?;
            if let Some(d) = &report.divergence {
                eprintln!("diverged at {d}");
                return Ok(ExitCode::from(2));
            }
        }
        Command::Show { id } => {
            let (_, session) = store.open(&id)?;
            print_json(&session.snapshot())?;
        }
        Command::Serve { addr, barrier_ms } => {
            let listener = TcpListener::bind(&addr).with_context(|| format!("binding {addr}"))?;
            eprintln!("listening on {}", listener.local_addr()?);
            let hub = Hub::new(ServerConfig { store: Some(store), default_barrier: barrier_ms.map(Duration::from_millis) });
            serve(listener, hub)?;
        }
        Command::Study { which, seed, backend, out } => {
            let opts = PipelineOptions { seed, backend: BackendSpec { kind: backend, transcript: None }, out: Some(out) };
            let reports = match which.as_str() {
                "1" => vec![pipeline::study1(&opts)?],
                "2" => vec![pipeline::study2(&opts)?],
                "3" => vec![pipeline::study3(&opts)?],
                "all" => pipeline::run_all(&opts)?,
                other => bail!("unknown study `{other}`; use 1, 2, 3 or all"),
            };
            for r in reports {
                println!("{}: {} run(s), {:.1}s", r.study, r.runs.len(), r.elapsed_secs);
                for s in &r.stats {
                    match (&s.result, &s.error) {
                        (Some(v), _) => println!("  {} {}: stat {:.4} p {:?}", s.test, s.label, v.statistic, v.p_value),
                        (None, Some(e)) => println!("  {} {}: {e}", s.test, s.label),
                        _ => {}
                    }
                }
            }
        }
        Command::Scaling { rounds, seed } => {
            let report = scaling::sweep(&scaling::SIZES, rounds, seed)?;
            print_json(&report)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
