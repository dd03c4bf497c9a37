//! Command-line entry points.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand};
use sitrep_core::engine::{Config, Engine};
use sitrep_core::ingest::{self, ScenarioSpec};
use sitrep_core::{Ontology, SemanticFeature, Snapshot};

use crate::service::{self, LoopOptions};

#[derive(Debug, Parser)]
#[command(name = "sitrep", version, about = "Factual-agent situation representation engine")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Replay a scenario through the engine.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        ontology: PathBuf,
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Milliseconds between ticks (0 = as fast as possible).
        #[arg(long)]
        tick_ms: Option<u64>,
        /// Serve the live API on HOST:PORT instead of exiting at the end.
        #[arg(long)]
        serve: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        snapshot_log: Option<PathBuf>,
    },
    /// Generate a synthetic scenario (and its map) from a spec.
    Gen {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
        /// Where to write the map; defaults to OUT with a `.map.jsonl` extension.
        #[arg(long)]
        map_out: Option<PathBuf>,
    },
    /// Check an ontology file and optionally a feature against it.
    Validate {
        #[arg(long)]
        ontology: PathBuf,
        #[arg(long)]
        feature: Option<String>,
    },
    /// Print one snapshot (or one agent row) from a snapshot log.
    Inspect {
        #[arg(long)]
        log: PathBuf,
        #[arg(long)]
        cycle: u64,
        #[arg(long)]
        agent: Option<u64>,
    },
}

/// Failure with its exit status: bad input is 1, anything going wrong
/// while running is 2.
#[derive(Debug)]
pub enum Failure {
    Input(anyhow::Error),
    Runtime(anyhow::Error),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Input(_) => 1,
            Failure::Runtime(_) => 2,
        }
    }

    pub fn error(&self) -> &anyhow::Error {
        match self {
            Failure::Input(e) | Failure::Runtime(e) => e,
        }
    }
}

fn input<T>(r: anyhow::Result<T>) -> Result<T, Failure> {
    r.map_err(Failure::Input)
}

fn runtime<T>(r: anyhow::Result<T>) -> Result<T, Failure> {
    r.map_err(Failure::Runtime)
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

pub fn load_ontology(path: &Path) -> anyhow::Result<Ontology> {
    Ontology::from_json(&read(path)?).with_context(|| format!("loading ontology {}", path.display()))
}

pub fn execute(cli: Cli, out: &mut dyn Write) -> Result<(), Failure> {
    match cli.command {
        Command::Run {
            scenario,
            ontology,
            map,
            config,
            tick_ms,
            serve,
            seed,
            snapshot_log,
        } => {
            let ontology = input(load_ontology(&ontology))?;
            let map = input(
                read(&map).and_then(|t| ingest::load_worldmap(&t).with_context(|| format!("loading map {}", map.display()))),
            )?;
            let scenario = input(read(&scenario).and_then(|t| {
                ingest::read_scenario(&t).with_context(|| format!("loading scenario {}", scenario.display()))
            }))?;
            let mut cfg = match config {
                Some(path) => input(read(&path).and_then(|t| {
                    Config::from_json(&t).with_context(|| format!("loading config {}", path.display()))
                }))?,
                None => Config::default(),
            };
            if let Some(t) = tick_ms {
                cfg.engine.tick_ms = t;
            }
            if let Some(s) = seed {
                cfg.engine.seed = s;
            }
            if let Some(p) = snapshot_log {
                cfg.engine.snapshot_log = Some(p.display().to_string());
            }
            let engine = input(Engine::new(ontology, map, cfg.clone()).map_err(Into::into))?.with_feed(scenario);
            run(engine, &cfg, serve.as_deref(), out)
        }
        Command::Gen { spec, seed, out: path, map_out } => {
            let mut spec: ScenarioSpec = input(read(&spec).and_then(|t| {
                serde_json::from_str(&t).with_context(|| format!("parsing spec {}", spec.display()))
            }))?;
            if let Some(s) = seed {
                spec.seed = s;
            }
            let world = input(ingest::generate_scenario(&spec).map_err(Into::into))?;
            let map_path = map_out.unwrap_or_else(|| path.with_extension("map.jsonl"));
            runtime(
                fs::write(&path, ingest::write_scenario(&world.scenario))
                    .and_then(|_| fs::write(&map_path, ingest::write_worldmap(&world.map)))
                    .context("writing generated scenario"),
            )?;
            let count = world.scenario.observations().count();
            runtime(
                writeln!(
                    out,
                    "wrote {count} observations over {} cycles to {} (map: {})",
                    world.scenario.meta.cycles,
                    path.display(),
                    map_path.display()
                )
                .map_err(Into::into),
            )
        }
        Command::Validate { ontology, feature } => {
            let ont = input(load_ontology(&ontology))?;
            let mut report = format!("ontology ok: {} concepts\n", ont.concepts().count());
            if let Some(text) = feature {
                let f = input(SemanticFeature::parse(&text).map_err(|e| anyhow!("feature does not parse: {e}")))?;
                let violations = ont.validate_feature(&f);
                if !violations.is_empty() {
                    let list: Vec<String> = violations.iter().map(|v| format!("  {v}")).collect();
                    return Err(Failure::Input(anyhow!("feature violates the ontology:\n{}", list.join("\n"))));
                }
                report.push_str(&format!("feature ok: {}\n", f.format()));
            }
            runtime(out.write_all(report.as_bytes()).map_err(Into::into))
        }
        Command::Inspect { log, cycle, agent } => {
            let text = input(read(&log))?;
            let mut found = None;
            for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
                let snap = input(
                    Snapshot::from_json(line).with_context(|| format!("{} line {}", log.display(), i + 1)),
                )?;
                if snap.cycle == cycle {
                    found = Some(snap);
                    break;
                }
            }
            let snap = input(found.ok_or_else(|| anyhow!("no snapshot for cycle {cycle} in {}", log.display())))?;
            let body = match agent {
                None => snap.to_json(),
                Some(id) => {
                    let row = input(snap.agent(id).ok_or_else(|| anyhow!("no agent {id} at cycle {cycle}")))?;
                    sitrep_core::engine::canonical_json(row)
                }
            };
            runtime(writeln!(out, "{body}").map_err(Into::into))
        }
    }
}

fn open_log(cfg: &Config) -> Result<Option<Box<dyn Write + Send>>, Failure> {
    match &cfg.engine.snapshot_log {
        None => Ok(None),
        Some(path) => {
            let file = runtime(fs::File::create(path).with_context(|| format!("creating snapshot log {path}")))?;
            Ok(Some(Box::new(BufWriter::new(file))))
        }
    }
}

fn run(mut engine: Engine, cfg: &Config, serve: Option<&str>, out: &mut dyn Write) -> Result<(), Failure> {
    let cycles = engine.feed_length();
    let tick = Duration::from_millis(cfg.engine.tick_ms);
    let mut log = open_log(cfg)?;
    match serve {
        None => {
            for _ in 0..cycles {
                let snap = engine.advance().expect("engine is not frozen");
                if let Some(log) = log.as_mut() {
                    runtime(writeln!(log, "{}", snap.to_json()).context("writing snapshot log"))?;
                }
                if !tick.is_zero() {
                    std::thread::sleep(tick);
                }
            }
            if let Some(log) = log.as_mut() {
                runtime(log.flush().context("writing snapshot log"))?;
            }
            let snap = engine.snapshot();
            runtime(
                writeln!(
                    out,
                    "cycle {}: {} agents, {} clusters, {} diagnostics",
                    snap.cycle,
                    snap.agents.len(),
                    snap.clusters.len(),
                    snap.diagnostics.len()
                )
                .map_err(Into::into),
            )
        }
        Some(addr) => {
            let rt = runtime(tokio::runtime::Runtime::new().context("starting runtime"))?;
            rt.block_on(async {
                let (handle, engine_task) = service::spawn_engine(engine, LoopOptions { tick, cycles }, log.take());
                let server = runtime(service::serve(handle, addr).await.map_err(Into::into))?;
                runtime(writeln!(out, "serving on http://{}", server.addr).map_err(Into::into))?;
                out.flush().ok();
                tokio::select! {
                    _ = tokio::signal::ctrl_c() => {}
                    r = engine_task => runtime(match r {
                        Ok(inner) => inner.context("engine loop failed"),
                        Err(e) => Err(anyhow!("engine task panicked: {e}")),
                    })?,
                }
                runtime(server.stop().await.context("server failed"))
            })
        }
    }
}
