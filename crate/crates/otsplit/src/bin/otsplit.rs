use clap::{Parser, Subcommand};
use otsplit::scenario::{self, ScenarioConfig, Stage};
use std::path::PathBuf;
use std::process::ExitCode;

/// Scenario runner for the 2D → 1D optimal transport toolkit.
#[derive(Parser)]
#[command(name = "otsplit", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Scenario name (bilinear | shelf | quarter_disk_full |
    /// quarter_disk_quarter | separable_quadratic).
    #[arg(long, global = true, default_value = "bilinear")]
    scenario: String,

    /// Optional config file; CLI flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory for report.json and CSV artifacts.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Source quadrature resolution N.
    #[arg(long, global = true)]
    grid_n: Option<usize>,

    /// Oracle source atom grid.
    #[arg(long, global = true)]
    oracle_nx: Option<usize>,

    /// Oracle target atom count.
    #[arg(long, global = true)]
    oracle_ny: Option<usize>,

    /// Comma-separated check names; default runs all checks of the stage.
    #[arg(long, global = true, value_delimiter = ',')]
    checks: Vec<String>,

    /// Seed for all sampled checks.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Write only report.json, no CSV artifacts.
    #[arg(long, global = true)]
    json_only: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Cost diagnostics: non-degeneracy, c-linearity/convexity, curvature, MCP.
    Diagnose,
    /// Quotient reduction: coarea density, Lᵖ bounds, reduced 1D solve.
    Quotient,
    /// Mass-splitting map: map field, pushforward, continuity probes.
    Split,
    /// Discrete Kantorovich oracle: LP certificates and c-monotonicity.
    Oracle,
    /// Cross-validation of the oracle against the splitting construction.
    Compare,
    /// All stages in dependency order.
    All,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> otsplit::Result<bool> {
    let mut cfg = ScenarioConfig::new(&cli.scenario);
    if let Some(path) = &cli.config {
        cfg.apply_file(path)?;
    }
    // Flags override the file.
    if cli.scenario != "bilinear" || cli.config.is_none() {
        cfg.scenario = cli.scenario;
    }
    if let Some(v) = cli.grid_n {
        cfg.grid_n = v;
    }
    if let Some(v) = cli.oracle_nx {
        cfg.oracle_nx = v;
    }
    if let Some(v) = cli.oracle_ny {
        cfg.oracle_ny = v;
    }
    if let Some(v) = cli.seed {
        cfg.seed = v;
    }
    if !cli.checks.is_empty() {
        cfg.checks = cli.checks;
    }
    if cli.out.is_some() {
        cfg.out_dir = cli.out;
    }
    if cli.json_only {
        cfg.json_only = true;
    }
    cfg.stages = match cli.command {
        Command::Diagnose => vec![Stage::Diagnose],
        Command::Quotient => vec![Stage::Quotient],
        Command::Split => vec![Stage::Split],
        Command::Oracle => vec![Stage::Oracle],
        Command::Compare => vec![Stage::Compare],
        Command::All => Stage::ALL.to_vec(),
    };

    let report = scenario::run(&cfg)?;
    for c in &report.checks {
        println!(
            "{} [{}] {:?}: measured {:.6e} vs {:.6e} ({:.2}s){}",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.stage,
            c.measured,
            c.expected,
            c.seconds,
            if c.detail.is_empty() { String::new() } else { format!(" — {}", c.detail) },
        );
    }
    if report.checks.is_empty() {
        eprintln!("no checks selected for scenario '{}'", report.scenario);
    }
    for a in &report.artifacts {
        println!("wrote {a}");
    }
    Ok(report.all_pass())
}
