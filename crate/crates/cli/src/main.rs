use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use planx_cli::{handle_request, App, BackendConfig, Config, Input, Outcome, DEFAULT_HTTP_TIMEOUT_MS};
use planx_core::prompt::ENDPOINT_ENV;
use planx_core::runtime::OfficeWorld;
use serde_json::Value;

#[derive(Parser)]
#[command(name = "plan-x", version, about = "Plan and execute office requests")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write prompt, dictionary, problem, plan, report and response here.
    #[arg(long, global = true)]
    dump_dir: Option<PathBuf>,
    /// Print the compiled PDDL problem.
    #[arg(long, global = true)]
    dump_problem: bool,
    /// Print the plan.
    #[arg(long, global = true)]
    dump_plan: bool,
    #[arg(long, global = true, value_enum)]
    backend: Option<BackendKind>,
    /// Directory holding the simulated office. Changes are written back.
    #[arg(long, global = true)]
    world: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Handle one request.
    Run {
        request: Option<String>,
        /// Task dictionary to use instead of asking the language model.
        #[arg(long)]
        seed_state: Option<PathBuf>,
    },
    /// Read requests from stdin, one per line, against one world.
    Repl,
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendKind {
    Scripted,
    Http,
}

fn config(cli: &Cli) -> Result<Config> {
    let mut config = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    if let Some(d) = &cli.dump_dir {
        config.dump.dir = Some(d.clone());
    }
    config.dump.problem |= cli.dump_problem;
    config.dump.plan |= cli.dump_plan;
    if let Some(w) = &cli.world {
        config.world = Some(w.clone());
    }
    match (cli.backend, &config.backend) {
        (Some(BackendKind::Scripted), BackendConfig::Http { .. }) => config.backend = BackendConfig::default(),
        (Some(BackendKind::Http), BackendConfig::Scripted { .. }) => {
            let endpoint = std::env::var(ENDPOINT_ENV)
                .with_context(|| format!("--backend http needs an endpoint in the config or {ENDPOINT_ENV}"))?;
            config.backend = BackendConfig::Http { endpoint, timeout_ms: DEFAULT_HTTP_TIMEOUT_MS, params: Default::default() };
        }
        _ => {}
    }
    Ok(config)
}

fn load_world(config: &Config) -> Result<OfficeWorld> {
    Ok(match &config.world {
        Some(dir) => OfficeWorld::load(dir)?,
        None => OfficeWorld::new(),
    })
}

fn save_world(config: &Config, world: &OfficeWorld) -> Result<()> {
    if let Some(dir) = &config.world {
        world.save(dir).with_context(|| format!("saving world to {}", dir.display()))?;
    }
    Ok(())
}

fn show(app: &App, outcome: &Outcome) {
    if app.dump.problem {
        println!("{}", outcome.problem);
    }
    if app.dump.plan {
        println!("{}", outcome.plan);
    }
    println!("{}", outcome.response.trim_end());
}

/// Prints the result of one request and returns its exit code.
fn turn(app: &App, input: Input<'_>, world: &mut OfficeWorld, dump_dir: Option<&Path>) -> i32 {
    match handle_request(input, app, world, dump_dir) {
        Ok(outcome) => {
            show(app, &outcome);
            outcome.exit_code()
        }
        Err(e) => {
            eprintln!("error: {e}");
            println!("{}", e.response());
            e.exit_code()
        }
    }
}

fn run(cli: &Cli, request: Option<&str>, seed: Option<&Path>) -> Result<i32> {
    let config = config(cli)?;
    let app = App::new(&config)?;
    let mut world = load_world(&config)?;
    let dump_dir = config.dump.dir.as_deref();
    let code = match (request, seed) {
        (_, Some(path)) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let raw: Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
            turn(&app, Input::Seeded(&raw), &mut world, dump_dir)
        }
        (Some(r), None) => turn(&app, Input::Request(r), &mut world, dump_dir),
        (None, None) => bail!("give a request or --seed-state"),
    };
    save_world(&config, &world)?;
    Ok(code)
}

fn repl(cli: &Cli) -> Result<i32> {
    let config = config(cli)?;
    let app = App::new(&config)?;
    let mut world = load_world(&config)?;
    let mut last = 0;
    let stdin = io::stdin();
    let mut n = 0;
    loop {
        print!("> ");
        io::stdout().flush()?;
        let mut line = String::new();
        if stdin.lock().read_line(&mut line)? == 0 {
            break;
        }
        let request = line.trim();
        if request.is_empty() {
            continue;
        }
        if matches!(request, ":q" | ":quit" | "exit") {
            break;
        }
        n += 1;
        let dir = config.dump.dir.as_ref().map(|d| d.join(format!("turn-{n}")));
        last = turn(&app, Input::Request(request), &mut world, dir.as_deref());
        save_world(&config, &world)?;
    }
    Ok(last)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run { request, seed_state } => run(&cli, request.as_deref(), seed_state.as_deref()),
        Command::Repl => repl(&cli),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(planx_cli::EXIT_VALIDATION as u8)
        }
    }
}
