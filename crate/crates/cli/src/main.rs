//! `coarse-lab`: batch front end over the library.
//!
//! Exit codes: 0 ok, 2 inconclusive, 3 budget exceeded, 64 usage error,
//! 70 internal invariant failure (a diagnostic dump is written to the
//! output directory).

mod commands;
mod config;
mod output;

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::RunConfig;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Budget(String),
    Inconclusive(String),
    Internal(String),
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// Reading a user-supplied input failed.
    pub fn input(path: &Path, source: impl fmt::Display) -> Self {
        CliError::Usage(format!("{}: {source}", path.display()))
    }

    pub fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 64,
            CliError::Budget(_) => 3,
            CliError::Inconclusive(_) => 2,
            CliError::Internal(_) | CliError::Io { .. } => 70,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Budget(m) => write!(f, "budget exceeded: {m}"),
            CliError::Inconclusive(m) => write!(f, "inconclusive: {m}"),
            CliError::Internal(m) => write!(f, "internal invariant failure: {m}"),
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
        }
    }
}

impl From<coarse_lab::Error> for CliError {
    fn from(e: coarse_lab::Error) -> Self {
        use coarse_lab::Error as E;
        let m = e.to_string();
        match e {
            E::BudgetExceeded { .. } | E::Incomplete { .. } | E::NotFound => CliError::Budget(m),
            E::NoPathWithinBall | E::NoAvoidingPath => CliError::Inconclusive(m),
            E::NonPlanarAssembly(_) | E::InconsistentLabels(_) | E::EmptyPath => CliError::Internal(m),
            E::Syntax { .. }
            | E::EmptyGeneratorSet
            | E::EmptyWord
            | E::NoRelators
            | E::NoPresentation
            | E::InvalidParameter(_)
            | E::UnknownGenerator(_)
            | E::RadiusOutOfRange { .. }
            | E::NotIdentity
            | E::InvalidData(_) => CliError::Usage(m),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "coarse-lab", version, about = "Finite-scale coarse geometry of finitely generated groups")]
struct Cli {
    #[command(flatten)]
    shared: Shared,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct Shared {
    /// Group model descriptor, e.g. z^2, free:2, lamplighter, presentation:<a,b|aba^-1b^-1>
    #[arg(long, global = true)]
    model: Option<String>,
    #[arg(long, global = true)]
    radius: Option<u32>,
    /// Scale d
    #[arg(long, global = true)]
    d: Option<u64>,
    /// Diameter bound D
    #[arg(long = "D", global = true)]
    bound: Option<u64>,
    #[arg(long, global = true)]
    budget_vertices: Option<usize>,
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Flat key = value file; flags win over it
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build B(e, R): growth table and plot
    Ball {
        /// Print the vertex count only
        #[arg(long)]
        stat: bool,
    },
    /// End counts over a schedule of (r, R) windows
    Ends {
        /// Windows as r:R,r:R,...
        #[arg(long)]
        schedule: Option<String>,
        #[arg(long)]
        margin: Option<u32>,
    },
    /// Geodesics from the identity, their extendability and a bi-infinite witness
    Geodesics {
        /// Geodesic length n
        #[arg(long, default_value_t = 4)]
        n: usize,
        /// Extension depth m (default n + 2)
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long)]
        geodesic_cap: Option<usize>,
    },
    #[command(subcommand)]
    Cover(CoverCommand),
    #[command(subcommand)]
    Vk(VkCommand),
    /// Search for a verified violation of a claimed multiplicity-2 cover
    Refute {
        #[arg(long)]
        cover: PathBuf,
        #[arg(long)]
        n_used: Option<u64>,
        #[arg(long)]
        max_factors: Option<usize>,
        #[arg(long)]
        max_nodes: Option<usize>,
    },
    /// Proof constants for the model presentation and bound D
    Constants {
        #[arg(long)]
        n_used: Option<u64>,
    },
    /// Growth, ends and dimension estimates for one model
    Report {
        #[arg(long)]
        schedule: Option<String>,
        #[arg(long)]
        scales: Option<String>,
        #[arg(long)]
        exact_limit: Option<usize>,
    },
}

#[derive(Subcommand, Debug)]
enum CoverCommand {
    /// Construct a cover of B(e, R)
    Make {
        #[arg(long, value_enum)]
        kind: commands::CoverKind,
        /// Piece length L (interval, brick, lamplighter) or strip width
        #[arg(long)]
        len: Option<i64>,
    },
    /// Class-wise d-disconnectedness and diameter check
    Check {
        #[arg(long)]
        cover: PathBuf,
    },
    /// Colour the proximity graph and relabel classes
    Color {
        #[arg(long)]
        cover: PathBuf,
        #[arg(long)]
        exact_limit: Option<usize>,
    },
    /// d-multiplicity over a list of scales
    Multiplicity {
        #[arg(long)]
        cover: PathBuf,
        #[arg(long)]
        scales: Option<String>,
    },
}

#[derive(Subcommand, Debug)]
enum VkCommand {
    /// Build and check a diagram for a word equal to the identity
    Build {
        #[arg(long)]
        word: String,
        #[arg(long)]
        max_factors: Option<usize>,
        #[arg(long)]
        max_nodes: Option<usize>,
    },
    /// Fewest faces found, with the winding lower bound on Z^2
    Area {
        #[arg(long)]
        word: String,
        #[arg(long)]
        max_factors: Option<usize>,
        #[arg(long)]
        max_nodes: Option<usize>,
    },
    /// Render a stored diagram as SVG
    Render {
        #[arg(long)]
        diagram: PathBuf,
    },
}

/// Flag values as config keys, in the same namespace as the file.
fn flag_settings(cli: &Cli) -> BTreeMap<String, String> {
    let mut kv = BTreeMap::new();
    let mut put = |k: &str, v: Option<String>| {
        if let Some(v) = v {
            kv.insert(k.to_string(), v);
        }
    };
    let s = &cli.shared;
    put("model", s.model.clone());
    put("radius", s.radius.map(|x| x.to_string()));
    put("d", s.d.map(|x| x.to_string()));
    put("D", s.bound.map(|x| x.to_string()));
    put("budget_vertices", s.budget_vertices.map(|x| x.to_string()));
    put("cache_dir", s.cache_dir.as_ref().map(|p| p.display().to_string()));
    put("out", s.out.as_ref().map(|p| p.display().to_string()));
    put("seed", s.seed.map(|x| x.to_string()));
    let n = |x: &Option<usize>| x.map(|v| v.to_string());
    match &cli.command {
        Command::Ends { schedule, margin } => {
            put("schedule", schedule.clone());
            put("margin", margin.map(|x| x.to_string()));
        }
        Command::Geodesics { geodesic_cap, .. } => put("geodesic_cap", n(geodesic_cap)),
        Command::Refute {
            n_used,
            max_factors,
            max_nodes,
            ..
        } => {
            put("n_used", n_used.map(|x| x.to_string()));
            put("max_factors", n(max_factors));
            put("max_nodes", n(max_nodes));
        }
        Command::Constants { n_used } => put("n_used", n_used.map(|x| x.to_string())),
        Command::Report {
            schedule,
            scales,
            exact_limit,
        } => {
            put("schedule", schedule.clone());
            put("scales", scales.clone());
            put("exact_limit", n(exact_limit));
        }
        Command::Cover(CoverCommand::Color { exact_limit, .. }) => put("exact_limit", n(exact_limit)),
        Command::Cover(CoverCommand::Multiplicity { scales, .. }) => put("scales", scales.clone()),
        Command::Vk(VkCommand::Build {
            max_factors, max_nodes, ..
        })
        | Command::Vk(VkCommand::Area {
            max_factors, max_nodes, ..
        }) => {
            put("max_factors", n(max_factors));
            put("max_nodes", n(max_nodes));
        }
        _ => {}
    }
    kv
}

/// The cover a command reads, if any; it fixes the model and radius.
fn cover_input(cmd: &Command) -> Option<&Path> {
    match cmd {
        Command::Refute { cover, .. }
        | Command::Cover(CoverCommand::Check { cover })
        | Command::Cover(CoverCommand::Color { cover, .. })
        | Command::Cover(CoverCommand::Multiplicity { cover, .. }) => Some(cover),
        _ => None,
    }
}

fn effective_config(cli: &Cli, cover: Option<&coarse_lab::covers::Cover>) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::default();
    if let Some(c) = cover {
        cfg.model = c.ball.model_descriptor.clone();
        cfg.radius = c.ball.radius;
    }
    if let Some(path) = &cli.shared.config {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::input(path, e))?;
        cfg.apply(&config::parse_file(&text)?)?;
    }
    cfg.apply(&flag_settings(cli))?;
    if let Some(c) = cover {
        let normal = coarse_lab::models::model_from_descriptor(&cfg.model)?;
        if normal.descriptor() != c.ball.model_descriptor || cfg.radius != c.ball.radius {
            return Err(CliError::Usage(format!(
                "cover lives on {} radius {}, not {} radius {}",
                c.ball.model_descriptor, c.ball.radius, cfg.model, cfg.radius
            )));
        }
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(String, u8), CliError> {
    let cover = match cover_input(&cli.command) {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::input(path, e))?;
            Some(coarse_lab::covers::Cover::from_json(&text).map_err(|e| CliError::input(path, e))?)
        }
        None => None,
    };
    let cfg = effective_config(&cli, cover.as_ref())?;
    watchdog(cfg.time_cap);
    let mut ctx = commands::Context::new(cfg)?;
    let result = dispatch(&mut ctx, cli.command, cover);
    if let Err(CliError::Internal(m)) = &result {
        ctx.dump_diagnostic(m);
    }
    result
}

/// Stops the process once the time cap has passed. Artifacts are renamed
/// into place whole, so none is left half written.
fn watchdog(secs: u64) {
    std::thread::spawn(move || {
        std::thread::sleep(std::time::Duration::from_secs(secs));
        eprintln!("coarse-lab: budget exceeded: time cap of {secs} s");
        std::process::exit(3);
    });
}

fn dispatch(
    ctx: &mut commands::Context,
    cmd: Command,
    cover: Option<coarse_lab::covers::Cover>,
) -> Result<(String, u8), CliError> {
    let cover = || cover.ok_or_else(|| CliError::Internal("cover not loaded".into()));
    match cmd {
        Command::Ball { stat } => ctx.ball(stat),
        Command::Ends { .. } => ctx.ends(),
        Command::Geodesics { n, depth, .. } => ctx.geodesics(n, depth.unwrap_or(n + 2)),
        Command::Cover(CoverCommand::Make { kind, len }) => ctx.cover_make(kind, len),
        Command::Cover(CoverCommand::Check { .. }) => ctx.cover_check(&cover()?),
        Command::Cover(CoverCommand::Color { .. }) => ctx.cover_color(&cover()?),
        Command::Cover(CoverCommand::Multiplicity { .. }) => ctx.cover_multiplicity(&cover()?),
        Command::Vk(VkCommand::Build { word, .. }) => ctx.vk_build(&word),
        Command::Vk(VkCommand::Area { word, .. }) => ctx.vk_area(&word),
        Command::Vk(VkCommand::Render { diagram }) => ctx.vk_render(&diagram),
        Command::Refute { .. } => ctx.refute(&cover()?),
        Command::Constants { .. } => ctx.constants(),
        Command::Report { .. } => ctx.report(),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 64 } else { 0 });
        }
    };
    match std::panic::catch_unwind(|| run(cli)) {
        Ok(Ok((summary, code))) => {
            println!("{summary}");
            ExitCode::from(code)
        }
        Ok(Err(e)) => {
            eprintln!("coarse-lab: {e}");
            ExitCode::from(e.code())
        }
        Err(_) => {
            eprintln!("coarse-lab: internal invariant failure: panic");
            ExitCode::from(70)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("coarse-lab").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn flags_become_config_keys() {
        let cli = parse(&["ends", "--model", "z", "--schedule", "1:4,2:8", "--D", "9"]);
        let kv = flag_settings(&cli);
        assert_eq!(kv["model"], "z");
        assert_eq!(kv["schedule"], "1:4,2:8");
        assert_eq!(kv["D"], "9");
        let cfg = effective_config(&cli, None).unwrap();
        assert_eq!((cfg.bound, cfg.schedule.len()), (Some(9), 2));
    }

    #[test]
    fn error_codes() {
        let budget = CliError::from(coarse_lab::Error::BudgetExceeded { estimated_size: 9 });
        assert_eq!(budget.code(), 3);
        assert_eq!(CliError::from(coarse_lab::Error::EmptyWord).code(), 64);
        assert_eq!(CliError::from(coarse_lab::Error::InconsistentLabels(0)).code(), 70);
        assert!(Cli::try_parse_from(["coarse-lab", "ball", "--radius", "x"]).is_err());
    }
}
