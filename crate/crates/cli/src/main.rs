//! Batch front end: classify, solve, barrier, verify and convexity runs over
//! problem config files.
//!
//! Exit codes: 0 success, 2 config error, 3 classification-gate failure
//! without override, 4 non-convergence, 5 verification failure, 6 barrier
//! not found.

use clap::{Parser, Subcommand};
use orbitpde::error::Error;
use orbitpde::pipeline;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "orbitpde", version, about = "Reduced Dirichlet problems on quotient charts")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify the flux profile of a config against the decay conditions
    Classify {
        #[arg(long)]
        config: PathBuf,
        /// also write the classification as JSON next to the other outputs
        #[arg(long)]
        json: bool,
    },
    /// Solve the reduced problem(s) and run the verification suite
    Solve {
        /// one or more config files
        #[arg(long, required = true, num_args = 1..)]
        config: Vec<PathBuf>,
        /// proceed when the solvability gate fails
        #[arg(long)]
        override_gate: bool,
        /// extra grid-doubling levels for an order table
        #[arg(long, default_value_t = 0)]
        refine: usize,
        /// parallel workers for independent configs
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Construct boundary barriers and emit their profiles
    Barrier {
        #[arg(long)]
        config: PathBuf,
    },
    /// Re-run the verification checks on a stored field
    Verify {
        #[arg(long)]
        config: PathBuf,
        /// field CSV produced by a previous solve
        #[arg(long)]
        field: PathBuf,
    },
    /// Evaluate the screw-invariant mean-convexity inequality along a curve
    Convexity {
        #[arg(long)]
        config: PathBuf,
    },
}

fn code_for(err: &Error) -> u8 {
    match err {
        Error::GateFailure(_) => 3,
        Error::NonConvergence { .. } | Error::LinearSolve(_) => 4,
        Error::BarrierNotFound(_) => 6,
        _ => 2,
    }
}

fn run_one_solve(path: &PathBuf, override_gate: bool, refine: usize) -> (u8, String) {
    match pipeline::run_solve(path, override_gate, refine) {
        Ok(run) => {
            let c = &run.report.convergence;
            let mut text = format!(
                "{}: {} after {} iterations, residual {:.3e} ({} unknowns, {} form)\n",
                path.display(),
                if run.converged { "converged" } else { "NOT CONVERGED" },
                c.iterations,
                c.residual_norm,
                c.unknowns,
                c.primary_form,
            );
            for flag in &run.report.verification.flags {
                text.push_str(&format!(
                    "  [{}] {}: {}\n",
                    if flag.pass { "pass" } else { "FAIL" },
                    flag.name,
                    flag.detail
                ));
            }
            text.push_str(&format!("  report: {}\n", run.report_path.display()));
            let code = if !run.converged {
                4
            } else if !run.verification_ok {
                5
            } else {
                0
            };
            (code, text)
        }
        Err(e) => (code_for(&e), format!("{}: error: {e}\n", path.display())),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Classify { config, json } => match pipeline::run_classify(&config, json) {
            Ok(run) => {
                print!("{}", run.summary);
                if let Some(p) = run.report_path {
                    println!("json: {}", p.display());
                }
                0
            }
            Err(e) => {
                eprintln!("error: {e}");
                code_for(&e)
            }
        },
        Command::Solve { config, override_gate, refine, jobs } => {
            let jobs = jobs.max(1);
            let n = config.len();
            let mut results: Vec<Option<(u8, String)>> = (0..n).map(|_| None).collect();
            if jobs == 1 || n == 1 {
                for (i, path) in config.iter().enumerate() {
                    results[i] = Some(run_one_solve(path, override_gate, refine));
                }
            } else {
                let next = std::sync::atomic::AtomicUsize::new(0);
                let slots: Vec<std::sync::Mutex<Option<(u8, String)>>> =
                    (0..n).map(|_| std::sync::Mutex::new(None)).collect();
                std::thread::scope(|scope| {
                    for _ in 0..jobs.min(n) {
                        scope.spawn(|| loop {
                            let i = next.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
                            if i >= n {
                                break;
                            }
                            let r = run_one_solve(&config[i], override_gate, refine);
                            *slots[i].lock().unwrap() = Some(r);
                        });
                    }
                });
                for (i, slot) in slots.into_iter().enumerate() {
                    results[i] = slot.into_inner().unwrap();
                }
            }
            let mut worst = 0u8;
            for r in results.into_iter().flatten() {
                print!("{}", r.1);
                worst = worst.max(r.0);
            }
            worst
        }
        Command::Barrier { config } => match pipeline::run_barrier(&config) {
            Ok(run) => {
                print!("{}", run.summary);
                println!("json: {}", run.report_path.display());
                if run.pass {
                    0
                } else {
                    5
                }
            }
            Err(e) => {
                eprintln!("error: {e}");
                code_for(&e)
            }
        },
        Command::Verify { config, field } => match pipeline::run_verify(&config, &field) {
            Ok(run) => {
                for flag in &run.report.verification.flags {
                    println!(
                        "[{}] {}: {}",
                        if flag.pass { "pass" } else { "FAIL" },
                        flag.name,
                        flag.detail
                    );
                }
                println!("report: {}", run.report_path.display());
                if run.verification_ok {
                    0
                } else {
                    5
                }
            }
            Err(e) => {
                eprintln!("error: {e}");
                code_for(&e)
            }
        },
        Command::Convexity { config } => match pipeline::run_convexity(&config) {
            Ok(rep) => {
                println!(
                    "lambda = {}: {} of {} samples violate the inequality; sufficient condition {}",
                    rep.lambda,
                    rep.violations,
                    rep.samples,
                    if rep.all_sufficient { "holds" } else { "fails somewhere" }
                );
                0
            }
            Err(e) => {
                eprintln!("error: {e}");
                code_for(&e)
            }
        },
    };
    ExitCode::from(code)
}
