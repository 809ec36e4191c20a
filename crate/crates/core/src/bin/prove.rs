use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use matr::engine::{load_config, Engine};
use matr::interface::{self, AppState};
use matr::pruning;

/// Runs a proof configuration to completion, quiescence, or the iteration
/// limit. Exit codes: 0 complete, 1 config error, 2 quiescent, 3 iteration
/// limit.
#[derive(Parser, Debug)]
#[command(name = "prove", version)]
struct Args {
    /// YAML configuration file.
    config: PathBuf,
    #[arg(long)]
    max_iterations: Option<usize>,
    #[arg(long)]
    clause_limit: Option<usize>,
    /// Write the final proof-space JSON here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the pruned proofs of the root goals here.
    #[arg(long)]
    pruned: Option<PathBuf>,
    /// Serve the REST API instead of running; the port defaults to MATR_PORT or 7878.
    #[arg(long, num_args = 0..=1, value_name = "PORT")]
    serve: Option<Option<u16>>,
}

fn fail(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("prove: {msg}");
    ExitCode::from(1)
}

fn main() -> ExitCode {
    let args = Args::parse();
    let yaml = match std::fs::read_to_string(&args.config) {
        Ok(s) => s,
        Err(e) => return fail(format!("{}: {e}", args.config.display())),
    };
    let mut config = match load_config(&yaml) {
        Ok(c) => c,
        Err(e) => return fail(e),
    };
    if let Some(n) = args.max_iterations {
        config.limits.max_iterations = n;
    }
    if let Some(n) = args.clause_limit {
        config.limits.clause_limit = n;
    }
    let mut engine = match Engine::new(config) {
        Ok(e) => e,
        Err(e) => return fail(e),
    };
    if let Err(e) = engine.setup() {
        return fail(e);
    }

    if let Some(port) = args.serve {
        let port = port.unwrap_or_else(interface::port_from_env);
        let state = AppState::default();
        let id = state.insert(engine);
        let addr = SocketAddr::from(([0, 0, 0, 0], port));
        eprintln!("serving on {addr}; preloaded session {id}");
        let rt = tokio::runtime::Runtime::new().expect("tokio runtime");
        return match rt.block_on(interface::serve(addr, state)) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => fail(e),
        };
    }

    let report = engine.run();
    for s in &report.stats {
        eprintln!(
            "iteration {}: {} recommendations, {} applied, {} newly checked",
            s.iteration, s.recommendations, s.applied, s.newly_checked
        );
    }
    for d in &report.diagnostics {
        eprintln!("[{}] {}: {}", d.iteration, d.codelet, d.message);
    }
    println!("{:?} after {} iterations", report.status, report.iterations);

    if let Some(path) = &args.out {
        let json = serde_json::to_string_pretty(&report.final_state).expect("serializable");
        if let Err(e) = std::fs::write(path, json + "\n") {
            return fail(format!("{}: {e}", path.display()));
        }
    }
    if let Some(path) = &args.pruned {
        let proofs: Vec<_> = pruning::prune_all(engine.space())
            .into_iter()
            .flatten()
            .collect();
        let json = serde_json::to_string_pretty(&proofs).expect("serializable");
        if let Err(e) = std::fs::write(path, json + "\n") {
            return fail(format!("{}: {e}", path.display()));
        }
    }
    ExitCode::from(report.status.exit_code() as u8)
}
