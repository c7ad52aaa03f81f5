use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use anyhow::{anyhow, Context};
use carecall_core::bench::{run_bench, BenchOptions};
use carecall_core::dispatch::Dispatcher;
use carecall_core::session::{Session, SessionEvent};
use carecall_core::trace::{generate, read_trace_file, replay, write_trace_file, GestureScript, Pace};
use carecall_core::AppConfig;
use clap::{Parser, Subcommand};

use crate::server::Server;

#[derive(Debug, Parser)]
#[command(name = "carecall", version, about = "Hands-only patient call system: replay, generate, serve, bench")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a trace through the pipeline and deliver any selections.
    Replay {
        trace: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Overrides the outbox path from the config file.
        #[arg(long)]
        outbox: Option<PathBuf>,
        /// Pace frames at their recorded timestamps.
        #[arg(long)]
        realtime: bool,
        /// Print every event as a protocol line.
        #[arg(long)]
        events: bool,
    },
    /// Render a gesture script into a trace.
    Generate {
        script: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Uniform pixel noise amplitude.
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        /// Camera settings come from here.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Accept UI connections (raw TCP lines or WebSocket).
    Serve {
        #[arg(long, default_value = "127.0.0.1:7878")]
        listen: String,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Time the pipeline on a trace at full speed.
    Bench {
        trace: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        outbox: Option<PathBuf>,
        #[arg(long, default_value_t = 5)]
        passes: usize,
        /// Emit the report as JSON.
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Runtime(e)
    }
}

fn require(path: &Path) -> Result<(), CliError> {
    if path.is_file() {
        Ok(())
    } else {
        Err(CliError::Usage(format!("no such file: {}", path.display())))
    }
}

fn load_config(path: Option<&Path>) -> Result<AppConfig, CliError> {
    match path {
        None => Ok(AppConfig::default()),
        Some(p) => {
            require(p)?;
            AppConfig::load(p).map_err(|e| CliError::Usage(e.to_string()))
        }
    }
}

fn labels(config: &AppConfig) -> Vec<Arc<str>> {
    config.session.labels.iter().map(|l| Arc::from(l.as_str())).collect()
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Replay {
            trace,
            config,
            outbox,
            realtime,
            events,
        } => {
            require(&trace)?;
            let mut config = load_config(config.as_deref())?;
            if let Some(o) = outbox {
                config.dispatch.outbox = o;
            }
            let records = read_trace_file(&trace, &config.session.camera)
                .map_err(|e| CliError::Usage(format!("{}: {e}", trace.display())))?;
            let dispatcher = Dispatcher::spawn(config.dispatch.clone(), &labels(&config)).context("starting dispatcher")?;
            let mut session = Session::new(config.session.clone(), Some(dispatcher.handle())).context("session setup")?;
            let pace = if realtime { Pace::Realtime } else { Pace::MaxSpeed };
            let mut selections = Vec::new();
            let mut pipe_closed = false;
            let summary = replay(&records, pace, |record| {
                for event in session.process_record(record) {
                    if events {
                        writeln!(out, "{}", crate::protocol::encode(&event)).inspect_err(|e| {
                            pipe_closed = e.kind() == std::io::ErrorKind::BrokenPipe;
                        })?;
                    }
                    if let SessionEvent::Selection(s) = event {
                        selections.push(s);
                    }
                }
                Ok::<_, std::io::Error>(())
            });
            if pipe_closed {
                dispatcher.finish();
                return Ok(());
            }
            if let Some(reason) = summary.aborted {
                return Err(CliError::Runtime(anyhow!("replay aborted: {reason}")));
            }
            let outbox_path = dispatcher.outbox().path().to_path_buf();
            let (accepted, rejected) = (dispatcher.handle().accepted(), dispatcher.handle().rejected());
            dispatcher.finish();
            let counters = session.counters();
            let wall = summary.wall.as_secs_f64();
            writeln!(out, "frames        {}", summary.frames).context("writing output")?;
            writeln!(out, "errors        {}", counters.errors).context("writing output")?;
            writeln!(out, "switches      {}", counters.switches).context("writing output")?;
            for s in &selections {
                writeln!(out, "selection     {} (cell {}, frame {})", s.label, s.cell, s.frame_index)
                    .context("writing output")?;
            }
            writeln!(out, "selections    {}", selections.len()).context("writing output")?;
            writeln!(out, "dispatched    {accepted} accepted, {rejected} rejected").context("writing output")?;
            writeln!(out, "outbox        {}", outbox_path.display()).context("writing output")?;
            writeln!(out, "wall_s        {wall:.3}").context("writing output")?;
            if realtime {
                let fps = if wall > 0.0 { summary.frames as f64 / wall } else { 0.0 };
                writeln!(out, "realtime_fps  {fps:.2}").context("writing output")?;
                writeln!(out, "backlog       {}", summary.backlog_frames).context("writing output")?;
            }
            Ok(())
        }
        Command::Generate {
            script,
            output,
            seed,
            noise,
            config,
        } => {
            require(&script)?;
            let config = load_config(config.as_deref())?;
            let parsed = GestureScript::load(&script).map_err(|e| CliError::Usage(format!("{}: {e}", script.display())))?;
            let records = generate(&parsed, &config.session.camera, seed, noise);
            write_trace_file(&output, &records).with_context(|| format!("writing {}", output.display()))?;
            writeln!(out, "wrote {} frames to {}", records.len(), output.display()).context("writing output")?;
            Ok(())
        }
        Command::Serve { listen, config } => {
            let config = load_config(config.as_deref())?;
            let server = Server::bind(listen.as_str(), config)?;
            writeln!(out, "listening on {}", server.local_addr().context("reading local address")?)
                .context("writing output")?;
            out.flush().ok();
            server.run().context("serving")?;
            Ok(())
        }
        Command::Bench {
            trace,
            config,
            outbox,
            passes,
            json,
        } => {
            require(&trace)?;
            let mut config = load_config(config.as_deref())?;
            if let Some(o) = outbox {
                config.dispatch.outbox = o;
            }
            let records = read_trace_file(&trace, &config.session.camera)
                .map_err(|e| CliError::Usage(format!("{}: {e}", trace.display())))?;
            let dispatcher = Dispatcher::spawn(config.dispatch.clone(), &labels(&config)).context("starting dispatcher")?;
            let report = run_bench(
                &records,
                &config.session,
                Some(dispatcher.handle()),
                BenchOptions {
                    passes,
                    ..BenchOptions::default()
                },
            )
            .context("bench")?;
            if json {
                writeln!(out, "{}", serde_json::to_string_pretty(&report).context("encoding report")?)
            } else {
                writeln!(out, "{report}")
            }
            .context("writing output")?;
            // leave slow deliveries behind rather than holding the report
            if !dispatcher.wait_idle(Duration::from_secs(2)) {
                log::info!("exiting with deliveries still in flight");
            }
            Ok(())
        }
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match run(cli, &mut out) {
        Ok(()) => 0,
        // a closed pipe on stdout (`| head`) is the reader's choice, not a failure
        Err(CliError::Runtime(err))
            if err
                .chain()
                .any(|c| c.downcast_ref::<std::io::Error>().is_some_and(|io| io.kind() == std::io::ErrorKind::BrokenPipe)) =>
        {
            0
        }
        Err(e) => {
            match &e {
                CliError::Usage(msg) => eprintln!("error: {msg}"),
                CliError::Runtime(err) => eprintln!("error: {err:#}"),
            }
            e.exit_code()
        }
    }
}
