use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use shelfguide::lists::{build_from_script, build_interactive, parse_script, read_list, write_list, ListOutcome};
use shelfguide::server::{serve, AppState};
use shelfguide::setup::{build_reasoner, load_fixtures, load_scenario, session_services, GEOMETRIC_MODEL};
use shelfguide::sim::{add_list_entry, parse_events, replay, Autopilot};
use shelfguide::GatewayError;
use shelfguide_core::catalog::Catalog;
use shelfguide_core::reasoner::Reasoner;
use shelfguide_core::simulator::{run_evaluation, Experiment, GuidanceSession};

/// Exit status for unusable configuration or input files.
const EXIT_CONFIG: u8 = 2;
/// Exit status when `eval --check` finds a closure failure.
const EXIT_CHECK: u8 = 3;

#[derive(Parser)]
#[command(name = "shelfguide", version, about = "Shelf product search and hand guidance")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scenario TOML file; built-in defaults when omitted.
    #[arg(long, env = "SHELF_CONFIG")]
    config: Option<PathBuf>,
    /// Directory holding catalog.jsonl, queries.jsonl and images/.
    #[arg(long, env = "SHELF_FIXTURES", default_value = "fixtures")]
    fixtures: PathBuf,
    /// Replaces the scenario seed.
    #[arg(long, env = "SHELF_SEED")]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Resolve product requests against the catalog into a shopping list.
    BuildList {
        #[arg(long)]
        catalog: Option<PathBuf>,
        /// Ask for each product on the terminal.
        #[arg(long, conflicts_with = "script", required_unless_present = "script")]
        interactive: bool,
        /// JSON lines of {"brand", "name", "quantity"?, "choice"?}.
        #[arg(long)]
        script: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Also require every product's reference images to load.
        #[arg(long)]
        check_images: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Run a headless guidance session over a shopping list.
    RunSim {
        #[arg(long)]
        list: PathBuf,
        /// JSON lines of session events; without it the autopilot shops.
        #[arg(long)]
        events: Option<PathBuf>,
        /// Autopilot rests on a neighbouring product before each target.
        #[arg(long)]
        touch_wrong: bool,
        /// Write every frame message as JSON lines.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Run the evaluation protocols and write CSV tables.
    Eval {
        /// detection, navigation, correction, catalog or all; repeatable.
        #[arg(long, default_value = "all")]
        experiment: Vec<String>,
        #[arg(long, env = "SHELF_OUT_DIR", default_value = "results")]
        out_dir: PathBuf,
        /// Noiseless run with the geometric reasoner; fails unless every
        /// table is at 100%.
        #[arg(long)]
        check: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Serve the session API.
    Serve {
        #[arg(long, env = "SHELF_BIND", default_value = "127.0.0.1:8080")]
        bind: String,
        #[command(flatten)]
        common: Common,
    },
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::try_from_env("SHELF_LOG").unwrap_or_else(|_| "warn".into()))
        .with_writer(std::io::stderr)
        .init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            let config = err.chain().any(|e| e.downcast_ref::<GatewayError>().is_some_and(GatewayError::is_config));
            ExitCode::from(if config { EXIT_CONFIG } else { 1 })
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::BuildList { catalog, interactive, script, out, check_images, common } => {
            let cfg = load_scenario(common.config.as_deref(), common.seed)?;
            let catalog_path = catalog.unwrap_or_else(|| common.fixtures.join("catalog.jsonl"));
            let catalog = Catalog::load(&catalog_path)
                .map_err(|e| GatewayError::Config(format!("{}: {e}", catalog_path.display())))?;
            let images = check_images.then(|| shelfguide_core::catalog::FixtureImageSource::new(&common.fixtures));
            let images = images.as_ref().map(|i| i as &dyn shelfguide_core::catalog::ImageSource);
            let outcome: ListOutcome = if interactive {
                let stdin = std::io::stdin();
                build_interactive(&catalog, &cfg.catalog, images, &mut stdin.lock(), &mut std::io::stdout())?
            } else {
                let path = script.expect("clap requires --script without --interactive");
                let text = std::fs::read_to_string(&path)
                    .map_err(|e| GatewayError::Config(format!("{}: {e}", path.display())))?;
                build_from_script(&catalog, &cfg.catalog, images, &parse_script(&text)?)
            };
            write_list(&out, &outcome.items)?;
            for (req, why) in &outcome.failures {
                eprintln!("unresolved: {} {}: {why}", req.brand, req.name);
            }
            println!("{} item(s) written to {}", outcome.items.len(), out.display());
            Ok(if outcome.failures.is_empty() { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
        Command::RunSim { list, events, touch_wrong, out, common } => {
            let cfg = load_scenario(common.config.as_deref(), common.seed)?;
            let fixtures = load_fixtures(&common.fixtures)?;
            let (reasoner, _) = build_reasoner(&cfg)?;
            let mut session = GuidanceSession::new(cfg.session_config(), session_services(&cfg, &fixtures, reasoner))
                .map_err(GatewayError::from)?;
            for entry in read_list(&list)? {
                add_list_entry(&mut session, &entry).with_context(|| format!("adding {}", entry.display_name()))?;
            }
            let messages = match events {
                Some(path) => {
                    let text = std::fs::read_to_string(&path)
                        .map_err(|e| GatewayError::Config(format!("{}: {e}", path.display())))?;
                    replay(&mut session, parse_events(&text)?)?
                }
                None => Autopilot { touch_wrong_first: touch_wrong, ..Autopilot::default() }.run(&mut session)?,
            };
            if let Some(path) = out {
                let mut w = std::io::BufWriter::new(std::fs::File::create(&path)?);
                for m in &messages {
                    serde_json::to_writer(&mut w, m)?;
                    w.write_all(b"\n")?;
                }
                w.flush()?;
            }
            let mut last_advice = None;
            for m in &messages {
                if let Some(a) = &m.advice {
                    if last_advice != Some(&a.text) {
                        println!("frame {:>5}: {}", m.frame_idx, a.text);
                        last_advice = Some(&a.text);
                    }
                }
            }
            let snap = session.snapshot();
            let done = snap.shopping_list.iter().filter(|i| i.done).count();
            println!("{done}/{} item(s) retrieved in {} frames", snap.shopping_list.len(), snap.frame_idx);
            Ok(ExitCode::SUCCESS)
        }
        Command::Eval { experiment, out_dir, check, common } => {
            let mut cfg = load_scenario(common.config.as_deref(), common.seed)?;
            let experiments = parse_experiments(&experiment)?;
            let (reasoner, model) = if check {
                cfg = cfg.noiseless();
                (Reasoner::geometric(), GEOMETRIC_MODEL.to_string())
            } else {
                build_reasoner(&cfg)?
            };
            let fixtures = fixtures_for(&experiments, &common.fixtures)?;
            let report = run_evaluation(&cfg, &experiments, fixtures.as_ref(), &reasoner, &model)?;
            for path in report.write_csvs(&out_dir)? {
                println!("wrote {}", path.display());
            }
            print!("{}", report.summary());
            if check {
                let failures = report.closure_failures();
                if !failures.is_empty() {
                    for f in &failures {
                        eprintln!("closure failure: {f}");
                    }
                    return Ok(ExitCode::from(EXIT_CHECK));
                }
                println!("closure check passed");
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Serve { bind, common } => {
            let cfg = load_scenario(common.config.as_deref(), common.seed)?;
            let fixtures = load_fixtures(&common.fixtures)?;
            // the blocking HTTP client must be built outside the runtime
            let (reasoner, _) = build_reasoner(&cfg)?;
            let state = AppState::new(cfg.session_config(), session_services(&cfg, &fixtures, reasoner));
            let rt = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
            rt.block_on(serve(&bind, state))?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn parse_experiments(names: &[String]) -> Result<Vec<Experiment>, GatewayError> {
    let mut out = Vec::new();
    for name in names.iter().flat_map(|n| n.split(',')) {
        let selected: Vec<Experiment> = match name.trim() {
            "all" => Experiment::ALL.to_vec(),
            other => vec![other.parse().map_err(GatewayError::from)?],
        };
        for e in selected {
            if !out.contains(&e) {
                out.push(e);
            }
        }
    }
    Ok(out)
}

/// Fixtures are required for the catalog table and used for detection
/// references when present.
fn fixtures_for(experiments: &[Experiment], root: &Path) -> Result<Option<shelfguide_core::simulator::Fixtures>> {
    if experiments.contains(&Experiment::Catalog) {
        return Ok(Some(load_fixtures(root)?));
    }
    if experiments.contains(&Experiment::Detection) && root.is_dir() {
        return Ok(Some(load_fixtures(root)?));
    }
    if experiments.is_empty() {
        bail!("no experiment selected");
    }
    Ok(None)
}
