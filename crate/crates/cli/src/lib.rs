//! The `namo` command line. Every command returns its process exit code:
//! 0 on success, 2 when no path exists or the goal is not reached. Errors
//! are returned and map to 1.

use std::fs;
use std::io::{BufWriter, Write};
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{ArgGroup, Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use namo_core::baselines::{graph_params, plan, Plan, PlannerKind};
use namo_core::benchmark::{generate_scenario, run_suite, run_trial, trace_file_name, TrialResult};
use namo_core::config::{Config, CONFIG_ENV};
use namo_core::planner::{build_graph, EndpointPolicy, SemanticGraph};
use namo_core::{Point2, Scenario};

pub mod render;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_NOT_REACHED: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "namo", version, about = "Navigation among movable obstacles")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a graph, search it and write the waypoints.
    Plan(PlanArgs),
    /// Run one closed-loop trial and write its trace.
    Simulate(SimulateArgs),
    /// Run every planner over a range of generated scenarios.
    Bench(BenchArgs),
    /// Draw a graph dump or a trace as an SVG image.
    Render(RenderArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ConfigArgs {
    /// TOML config file. Falls back to $NAMO_CONFIG, then built-in defaults.
    #[arg(long, value_name = "FILE", env = CONFIG_ENV)]
    pub config: Option<PathBuf>,
    /// Override a config key, e.g. `--set mppi.K=64`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Disable monitor-triggered replanning.
    #[arg(long)]
    pub no_replan: bool,
    /// Fraction of light obstacles whose true mass is secretly heavy
    /// (generated scenarios only).
    #[arg(long, value_name = "P")]
    pub mass_belief_error: Option<f64>,
}

#[derive(Debug, Clone, Args)]
#[command(group(ArgGroup::new("source").required(true).args(["scenario", "seed"])))]
pub struct ScenarioArgs {
    /// Scenario JSON file.
    #[arg(long, value_name = "FILE")]
    pub scenario: Option<PathBuf>,
    /// Generate the scenario from this seed instead.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct PlanArgs {
    #[command(flatten)]
    pub source: ScenarioArgs,
    /// nvg, bvg, brrt or svg. Defaults to the config's `planner`.
    #[arg(long)]
    pub planner: Option<PlannerKind>,
    #[command(flatten)]
    pub config: ConfigArgs,
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    /// Also write plan.svg.
    #[arg(long)]
    pub render: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub source: ScenarioArgs,
    #[arg(long)]
    pub planner: Option<PlannerKind>,
    #[command(flatten)]
    pub config: ConfigArgs,
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    /// Also write trace.svg.
    #[arg(long)]
    pub render: bool,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    /// Inclusive range `A..B`, a list `1,4,9`, or one seed.
    #[arg(long, alias = "seed", value_name = "SEEDS")]
    pub seeds: String,
    /// Comma-separated planners. Defaults to all four.
    #[arg(long, value_delimiter = ',')]
    pub planner: Vec<PlannerKind>,
    #[command(flatten)]
    pub config: ConfigArgs,
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    /// Also draw every trace next to its .jsonl file.
    #[arg(long)]
    pub render: bool,
}

#[derive(Debug, Clone, Args)]
pub struct RenderArgs {
    /// A graph.json from `plan` or a trace .jsonl.
    pub input: PathBuf,
    /// Output SVG file.
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
}

/// Parses and runs; usage errors print and return 1.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_ERROR
        }
    }
}

pub fn run(command: &Command) -> Result<i32> {
    match command {
        Command::Plan(a) => cmd_plan(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Render(a) => cmd_render(&a.input, &a.out),
    }
}

/// Defaults, then the config file, then `--set` overrides, then flags.
pub fn effective_config(args: &ConfigArgs) -> Result<Config> {
    let mut table = match &args.config {
        Some(p) => {
            let text = fs::read_to_string(p)
                .with_context(|| format!("cannot read config {}", p.display()))?;
            text.parse::<toml::Table>()
                .with_context(|| format!("invalid config {}", p.display()))?
        }
        None => toml::Table::new(),
    };
    for kv in &args.set {
        apply_override(&mut table, kv)?;
    }
    let mut cfg = Config::from_toml(&toml::to_string(&table)?)?;
    if args.no_replan {
        cfg.trial.replan = false;
    }
    if let Some(p) = args.mass_belief_error {
        if !(0.0..=1.0).contains(&p) {
            bail!("--mass-belief-error must lie in [0, 1], got {p}");
        }
        cfg.generator.mass_belief_error = p;
    }
    Ok(cfg)
}

fn apply_override(table: &mut toml::Table, kv: &str) -> Result<()> {
    let (key, raw) = kv
        .split_once('=')
        .with_context(|| format!("override `{kv}` is not KEY=VALUE"))?;
    // bare words such as `svg` are strings
    let value = format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let parts: Vec<&str> = key.trim().split('.').collect();
    let (last, path) = parts.split_last().expect("split yields one part");
    let mut node = table;
    for p in path {
        node = node
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .with_context(|| format!("`{p}` in `{key}` is not a table"))?;
    }
    node.insert(last.to_string(), value);
    Ok(())
}

/// `A..B` (inclusive), `A..=B`, `a,b,c` or a single seed.
pub fn parse_seeds(text: &str) -> Result<Vec<u64>> {
    let t = text.trim();
    if let Some((a, b)) = t.split_once("..") {
        let b = b.strip_prefix('=').unwrap_or(b);
        let range: RangeInclusive<u64> = a.trim().parse()?..=b.trim().parse()?;
        if range.is_empty() {
            bail!("empty seed range `{t}`");
        }
        return Ok(range.collect());
    }
    t.split(',')
        .map(|s| {
            s.trim()
                .parse::<u64>()
                .with_context(|| format!("bad seed `{s}`"))
        })
        .collect()
}

fn load_scenario(source: &ScenarioArgs, cfg: &Config) -> Result<Scenario> {
    match (&source.scenario, source.seed) {
        (Some(p), _) => Scenario::load(p).with_context(|| format!("scenario {}", p.display())),
        (None, Some(seed)) => Ok(generate_scenario(seed, &cfg.generator)?),
        (None, None) => bail!("either --scenario or --seed is required"),
    }
}

fn prepare_out(out: &Path, cfg: &Config) -> Result<()> {
    fs::create_dir_all(out).with_context(|| format!("cannot create {}", out.display()))?;
    fs::write(out.join("config.toml"), cfg.to_toml())?;
    Ok(())
}

/// What `plan` writes to graph.json.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphDump {
    pub planner: PlannerKind,
    pub scenario: Scenario,
    pub path_found: bool,
    pub graph: Option<SemanticGraph>,
    pub route: Vec<Point2>,
    pub waypoints: Vec<Point2>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

fn waypoints_csv(points: &[Point2]) -> String {
    let mut s = String::from("x,y\n");
    for p in points {
        s.push_str(&format!("{:.6},{:.6}\n", p.x, p.y));
    }
    s
}

pub fn cmd_plan(a: &PlanArgs) -> Result<i32> {
    let cfg = effective_config(&a.config)?;
    let scenario = load_scenario(&a.source, &cfg)?;
    let kind = a.planner.unwrap_or(cfg.planner);
    prepare_out(&a.out, &cfg)?;
    fs::write(a.out.join("scenario.json"), scenario.to_json() + "\n")?;

    let clock = Instant::now();
    let result = plan(
        kind,
        &scenario,
        scenario.start,
        &cfg.planning,
        &cfg.brrt,
        scenario.seed,
        EndpointPolicy::Strict,
    );
    let elapsed = clock.elapsed().as_secs_f64();
    let dump = match result {
        Ok(Plan {
            graph,
            route,
            waypoints,
            ..
        }) => GraphDump {
            planner: kind,
            scenario: scenario.clone(),
            path_found: true,
            graph: Some(graph),
            route,
            waypoints: waypoints.points,
            error: None,
        },
        Err(e) => {
            // keep the graph so the failure can be inspected
            let graph = graph_params(kind, &cfg.planning, EndpointPolicy::Strict).and_then(|p| {
                build_graph(&scenario.bodies(), scenario.start, scenario.goal, &p).ok()
            });
            GraphDump {
                planner: kind,
                scenario: scenario.clone(),
                path_found: false,
                graph,
                route: Vec::new(),
                waypoints: Vec::new(),
                error: Some(e.to_string()),
            }
        }
    };
    fs::write(
        a.out.join("graph.json"),
        serde_json::to_string_pretty(&dump)? + "\n",
    )?;
    fs::write(a.out.join("waypoints.csv"), waypoints_csv(&dump.waypoints))?;
    fs::write(
        a.out.join("timing.json"),
        serde_json::to_string_pretty(
            &serde_json::json!({ "planner": kind, "planner_time_s": elapsed }),
        )? + "\n",
    )?;
    if a.render {
        fs::write(a.out.join("plan.svg"), render::graph_svg(&dump))?;
    }
    match &dump.error {
        None => {
            println!(
                "{}: path with {} waypoints, {} nodes, {:.3} s",
                kind.label(),
                dump.waypoints.len(),
                dump.graph.as_ref().map_or(0, |g| g.nodes.len()),
                elapsed
            );
            Ok(EXIT_OK)
        }
        Some(e) => {
            println!("{}: no path ({e})", kind.label());
            Ok(EXIT_NOT_REACHED)
        }
    }
}

pub fn cmd_simulate(a: &SimulateArgs) -> Result<i32> {
    let cfg = effective_config(&a.config)?;
    let scenario = load_scenario(&a.source, &cfg)?;
    let kind = a.planner.unwrap_or(cfg.planner);
    prepare_out(&a.out, &cfg)?;
    fs::write(a.out.join("scenario.json"), scenario.to_json() + "\n")?;
    let trace_path = a.out.join("trace.jsonl");
    let mut w = BufWriter::new(fs::File::create(&trace_path)?);
    let result = run_trial(&scenario, kind, &cfg, Some(&mut w))?;
    w.flush()?;
    drop(w);
    fs::write(
        a.out.join("result.json"),
        serde_json::to_string_pretty(&result)? + "\n",
    )?;
    if a.render {
        cmd_render(&trace_path, &a.out.join("trace.svg"))?;
    }
    println!("{}", summary(&result));
    Ok(if result.executed {
        EXIT_OK
    } else {
        EXIT_NOT_REACHED
    })
}

fn summary(r: &TrialResult) -> String {
    format!(
        "seed {} {}: {:?} after {:.1} s, force {:.1} N·s, {} replans",
        r.seed,
        r.planner.label(),
        r.outcome,
        r.execution_time,
        r.cumulative_force,
        r.replans
    )
}

pub fn cmd_bench(a: &BenchArgs) -> Result<i32> {
    let cfg = effective_config(&a.config)?;
    let seeds = parse_seeds(&a.seeds)?;
    let planners = if a.planner.is_empty() {
        PlannerKind::ALL.to_vec()
    } else {
        a.planner.clone()
    };
    prepare_out(&a.out, &cfg)?;
    let suite = run_suite(&seeds, &planners, &cfg, Some(&a.out), |r| {
        eprintln!("{}", summary(r))
    })?;
    for (seed, why) in &suite.failed_seeds {
        eprintln!("seed {seed} skipped: {why}");
    }
    if a.render {
        for t in &suite.trials {
            let trace = a
                .out
                .join("traces")
                .join(trace_file_name(t.seed, t.planner));
            cmd_render(&trace, &trace.with_extension("svg"))?;
        }
    }
    print!("{}", suite.report.to_csv());
    Ok(EXIT_OK)
}

/// Renders a graph dump or a trace, decided by content.
pub fn cmd_render(input: &Path, out: &Path) -> Result<i32> {
    let text =
        fs::read_to_string(input).with_context(|| format!("cannot read {}", input.display()))?;
    let svg = if let Ok(dump) = serde_json::from_str::<GraphDump>(&text) {
        render::graph_svg(&dump)
    } else {
        let trace = namo_core::benchmark::Trace::parse(&text)
            .with_context(|| format!("{} is neither a graph dump nor a trace", input.display()))?;
        render::trace_svg(&trace)
    };
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(out, svg).with_context(|| format!("cannot write {}", out.display()))?;
    Ok(EXIT_OK)
}
