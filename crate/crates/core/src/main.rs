use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use srv_handoff::harness::csv_io::{read_csv, write_csv};
use srv_handoff::harness::plot::emit_plot;
use srv_handoff::harness::scenario::{preset, run_scenario, ScenarioSpec, PRESETS};
use srv_handoff::{avg_service_time, fig1, run_metrics, run_simulation, throughput, SimConfig};

const OUT_DIR_ENV: &str = "SRV_HANDOFF_OUT_DIR";

#[derive(Parser)]
#[command(
    name = "srv-handoff",
    version,
    about = "Slotted CR MAC simulator with proactive spectrum handoff"
)]
#[command(arg_required_else_help = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration and print its metrics.
    Run {
        /// Key-value config file.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Override a config field, e.g. `--set lambda_p=3`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        /// Write the event trace here.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Run a preset (fig4..fig8) or a scenario file over seeds and write a CSV.
    Scenario {
        name: String,
        #[arg(long)]
        seeds: Option<usize>,
        /// Defaults to `$SRV_HANDOFF_OUT_DIR/<name>.csv`, or `results/<name>.csv`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Draw a line chart from a results CSV.
    Plot {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
        #[arg(long, default_value = "protocol")]
        series: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Replay the five-channel worked example and print its decisions.
    ReplayFig1,
}

fn load_config(path: Option<&Path>, overrides: &[String]) -> Result<SimConfig> {
    let mut cfg = match path {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            SimConfig::from_kv_text(&text).with_context(|| format!("in {}", p.display()))?
        }
        None => SimConfig::default(),
    };
    for o in overrides {
        let Some((k, v)) = o.split_once('=') else {
            bail!("--set expects KEY=VALUE, got `{o}`");
        };
        cfg.set(k.trim(), v.trim())?;
    }
    Ok(cfg.validate()?)
}

fn write_out(path: &Path, contents: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn run(cfg: SimConfig, trace: Option<PathBuf>) -> Result<()> {
    let m = match &trace {
        Some(path) => {
            let (m, t) = run_simulation(&cfg)?;
            write_out(path, t.serialize().as_bytes())?;
            m
        }
        None => run_metrics(&cfg)?,
    };
    println!("protocol = {}", cfg.protocol);
    println!("seed = {}", cfg.seed);
    println!("throughput_bps = {}", throughput(&m, &cfg));
    match avg_service_time(&m, &cfg) {
        Some(s) => println!("avg_service_time_s = {s}"),
        None => println!("avg_service_time_s = undefined"),
    }
    println!("completed_packets = {}", m.completed_packets());
    println!("pu_su_collision_slots = {}", m.pu_su_collision_slots);
    println!("su_su_collision_slots = {}", m.su_su_collision_slots);
    println!("handoffs = {}", m.handoffs);
    Ok(())
}

fn scenario(name: &str, seeds: Option<usize>, out: Option<PathBuf>) -> Result<()> {
    let mut spec = if PRESETS.contains(&name) {
        preset(name, seeds.unwrap_or(10))?
    } else {
        let text = fs::read_to_string(name).with_context(|| {
            format!(
                "`{name}` is neither a preset ({}) nor a readable file",
                PRESETS.join(", ")
            )
        })?;
        ScenarioSpec::from_kv_text(&text)?
    };
    if let Some(n) = seeds {
        if n == 0 {
            bail!("--seeds must be at least 1");
        }
        spec.seeds = (1..=n as u64).collect();
    }
    let out = out.unwrap_or_else(|| {
        let dir =
            std::env::var_os(OUT_DIR_ENV).map_or_else(|| PathBuf::from("results"), PathBuf::from);
        dir.join(format!("{}.csv", spec.name))
    });
    log::info!(
        "scenario {}: {} runs",
        spec.name,
        spec.protocols.len() * spec.sweep.values.len() * spec.seeds.len()
    );
    let rows = run_scenario(&spec)?;
    let mut buf = Vec::new();
    write_csv(&rows, &mut buf)?;
    write_out(&out, &buf)?;
    println!("wrote {} rows to {}", rows.len(), out.display());
    Ok(())
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match Cli::parse().command {
        Command::Run {
            config,
            overrides,
            trace,
        } => run(load_config(config.as_deref(), &overrides)?, trace),
        Command::Scenario { name, seeds, out } => scenario(&name, seeds, out),
        Command::Plot {
            input,
            x,
            y,
            series,
            out,
        } => {
            let file =
                fs::File::open(&input).with_context(|| format!("opening {}", input.display()))?;
            let rows = read_csv(file).with_context(|| format!("in {}", input.display()))?;
            let svg = emit_plot(&rows, &x, &y, &series)?;
            write_out(&out, svg.as_bytes())
        }
        Command::ReplayFig1 => {
            let r = fig1::replay();
            println!("{}", fig1::narrative(&r.decisions));
            Ok(())
        }
    }
}
