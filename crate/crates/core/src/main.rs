use std::io::{self, IsTerminal, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use nanolog::api::QueryResponse;
use nanolog::repl::Repl;
use nanolog::service::{self, AppState, ServiceConfig};
use nanolog::solver::trace_depths;
use nanolog::{parse_program, parse_query, solve, Program, SolveOptions, SolveOutcome, Strategy, Term};

#[derive(Parser)]
#[command(name = "nanolog", version, about = "A small Prolog interpreter and proof assistant")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one query against a program file and print its solutions.
    Solve(SolveArgs),
    /// Interactive interpreter.
    Repl {
        /// Program to start with.
        #[arg(long)]
        file: Option<PathBuf>,
    },
    /// Start the HTTP service.
    Serve(ServeArgs),
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    file: PathBuf,
    #[arg(long)]
    query: String,
    #[arg(long, default_value = "dfs")]
    strategy: Strategy,
    #[arg(long, default_value_t = 256)]
    max_depth: usize,
    #[arg(long, default_value_t = 10)]
    max_solutions: usize,
    /// Also print the rules applied for each solution.
    #[arg(long)]
    trace: bool,
    /// Print the service's query response instead of text.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long, env = "NANOLOG_ADDR", default_value = "127.0.0.1:8080")]
    addr: SocketAddr,
    #[arg(long, env = "NANOLOG_DATA_DIR", default_value = "data")]
    data_dir: PathBuf,
    /// Program file new workspaces are seeded with.
    #[arg(long, env = "NANOLOG_SEED")]
    seed: Option<PathBuf>,
    /// Browser origin allowed to call the API (`*` for any).
    #[arg(long, env = "NANOLOG_CORS_ORIGIN")]
    cors_origin: Option<String>,
    /// Directory of static files served outside /api.
    #[arg(long, env = "NANOLOG_STATIC_DIR")]
    static_dir: Option<PathBuf>,
    #[arg(long, env = "NANOLOG_QUERY_TIMEOUT_MS", default_value_t = 2000)]
    query_timeout_ms: u64,
    #[arg(long, env = "NANOLOG_REQUEST_TIMEOUT_MS", default_value_t = 500)]
    request_timeout_ms: u64,
    #[arg(long, env = "NANOLOG_STEP_BUDGET", default_value_t = 100_000)]
    step_budget: usize,
    /// Idle time after which proof sessions are dropped.
    #[arg(long, env = "NANOLOG_SESSION_TTL_SECS", default_value_t = 24 * 60 * 60)]
    session_ttl_secs: u64,
}

const USAGE_ERROR: u8 = 2;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Solve(args) => run_solve(args),
        Command::Repl { file } => run_repl(file.as_deref()),
        Command::Serve(args) => run_serve(args),
    }
}

fn read_program(path: &Path) -> Result<Program, String> {
    let src = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_program(&src).map_err(|e| format!("{}:{e}", path.display()))
}

fn fail(message: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {message}");
    ExitCode::from(USAGE_ERROR)
}

fn run_solve(args: SolveArgs) -> ExitCode {
    let program = match read_program(&args.file) {
        Ok(p) => p,
        Err(e) => return fail(e),
    };
    let goals = match parse_query(&args.query) {
        Ok(g) => g,
        Err(e) => return fail(format!("query:{e}")),
    };
    let opts = SolveOptions::default()
        .with_strategy(args.strategy)
        .with_max_depth(args.max_depth)
        .with_max_solutions(args.max_solutions);
    let outcome = match solve(&program, &goals, opts) {
        Ok(o) => o,
        Err(e) => return fail(e),
    };
    let text = if args.json {
        format!("{}\n", QueryResponse::from(&outcome).to_json())
    } else {
        render(&outcome, args.trace)
    };
    let _ = io::stdout().lock().write_all(text.as_bytes());
    if outcome.solutions.is_empty() {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}

/// Text output of `solve`: one `Var = term` line per binding, solutions
/// separated by blank lines when they bind more than one variable.
fn render(outcome: &SolveOutcome, trace: bool) -> String {
    let mut out = String::new();
    let multi = outcome.solutions.first().is_some_and(|s| s.bindings.len() > 1);
    for (i, s) in outcome.solutions.iter().enumerate() {
        if i > 0 && (multi || trace) {
            out.push('\n');
        }
        let shown: Vec<_> = s
            .bindings
            .iter()
            .filter(|(v, t)| !matches!(t, Term::Var(n) if n == v))
            .collect();
        if shown.is_empty() {
            out.push_str("true\n");
        }
        for (v, t) in shown {
            out.push_str(&format!("{v} = {t}\n"));
        }
        if s.cyclic {
            out.push_str("% some bindings are cyclic and shown unresolved\n");
        }
        if trace {
            for (step, depth) in s.trace.iter().zip(trace_depths(&s.trace)) {
                out.push_str(&format!(
                    "{}{}  <- {} [{}]\n",
                    "  ".repeat(depth + 1),
                    step.goal,
                    step.rule,
                    step.instance_id
                ));
            }
        }
    }
    if outcome.solutions.is_empty() {
        out.push_str("no solutions.\n");
    }
    match outcome.budget_hit {
        Some(b) => out.push_str(&format!("budget hit: {b}\n")),
        None => out.push_str("exhausted\n"),
    }
    out
}

fn run_repl(file: Option<&Path>) -> ExitCode {
    let program = match file.map(read_program).transpose() {
        Ok(p) => p.unwrap_or_default(),
        Err(e) => return fail(e),
    };
    let mut repl = Repl::new(program, SolveOptions::default(), io::stdout().lock());
    match repl.run(io::stdin().lock()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(e),
    }
}

fn run_serve(args: ServeArgs) -> ExitCode {
    tracing_subscriber::fmt()
        .with_writer(io::stdout)
        .with_ansi(io::stdout().is_terminal())
        .with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()))
        .init();
    match serve(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(format!("{e:#}")),
    }
}

fn serve(args: ServeArgs) -> anyhow::Result<()> {
    let mut config = ServiceConfig::new(&args.data_dir);
    config.seed = args
        .seed
        .as_deref()
        .map(read_program)
        .transpose()
        .map_err(anyhow::Error::msg)?;
    config.cors_origin = args.cors_origin;
    config.static_dir = args.static_dir;
    config.query_timeout = Duration::from_millis(args.query_timeout_ms);
    config.request_timeout = Duration::from_millis(args.request_timeout_ms);
    config.session_ttl = Duration::from_secs(args.session_ttl_secs);
    config.solve.step_budget = args.step_budget;
    let state =
        AppState::new(config).with_context(|| format!("cannot open data directory {}", args.data_dir.display()))?;

    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind(args.addr)
            .await
            .with_context(|| format!("cannot listen on {}", args.addr))?;
        let addr = listener.local_addr()?;
        println!("listening on {addr}");
        io::stdout().flush()?;
        service::serve(listener, state).await?;
        Ok(())
    })
}
