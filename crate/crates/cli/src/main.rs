//! qrec: config-driven experiments over the core library. Subcommands
//! group by module; every run emits one JSON or CSV document, with timing
//! on stderr only so output files are byte-stable.

mod args;
mod emit;
mod parse;
mod run;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "qrec", version, about = "exact experiments for polynomial recurrence machinery")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Exponential-sum decay scans.
    #[command(subcommand)]
    Expsum(ExpsumCmd),
    /// Polynomial-vector complexity reports.
    #[command(subcommand)]
    Poly(PolyCmd),
    /// Unipotent orbit polynomials and certificates.
    #[command(subcommand)]
    Orbit(OrbitCmd),
    /// Exact experiments on finite rotation systems.
    #[command(subcommand)]
    System(SystemCmd),
    /// Difference-set image scans over integer windows.
    #[command(subcommand)]
    Scan(ScanCmd),
}

#[derive(Subcommand)]
enum ExpsumCmd {
    /// Worst normalized sum magnitude per modulus.
    Scan(args::ExpsumScanArgs),
}

#[derive(Subcommand)]
enum PolyCmd {
    /// Multiplicative complexity and hyperplane-fleeing report.
    Complexity(args::PolyComplexityArgs),
}

#[derive(Subcommand)]
enum OrbitCmd {
    /// Orbit polynomial, rescaling, complexity, and a point certificate.
    Build(args::OrbitBuildArgs),
    /// Uniform depth/index certificate over random companion matrices.
    Certify(args::OrbitCertifyArgs),
}

#[derive(Subcommand)]
enum SystemCmd {
    /// Density-increment trace.
    Increment(args::SystemIncrementArgs),
    /// Uniform single-k recurrence experiment, or the remark counterexample.
    Sarkozy(args::SystemSarkozyArgs),
    /// Stagewise Bogolyubov iteration on a rank-2 system.
    Bog(args::SystemBogArgs),
}

#[derive(Subcommand)]
enum ScanCmd {
    /// Quadratic-form image of a difference set with k-coverage.
    Quadform(args::ScanQuadformArgs),
    /// Shifted-polynomial image of a planar difference set.
    Bog(args::ScanBogArgs),
    /// Bohr-set negative control for the linear two-variable form.
    Bohr(args::ScanBohrArgs),
}

fn dispatch(cmd: Cmd) -> Result<(), run::CliError> {
    match cmd {
        Cmd::Expsum(ExpsumCmd::Scan(a)) => run::expsum_scan(a),
        Cmd::Poly(PolyCmd::Complexity(a)) => run::poly_complexity(a),
        Cmd::Orbit(OrbitCmd::Build(a)) => run::orbit_build(a),
        Cmd::Orbit(OrbitCmd::Certify(a)) => run::orbit_certify(a),
        Cmd::System(SystemCmd::Increment(a)) => run::system_increment(a),
        Cmd::System(SystemCmd::Sarkozy(a)) => run::system_sarkozy(a),
        Cmd::System(SystemCmd::Bog(a)) => run::system_bog(a),
        Cmd::Scan(ScanCmd::Quadform(a)) => run::scan_quadform(a),
        Cmd::Scan(ScanCmd::Bog(a)) => run::scan_bog(a),
        Cmd::Scan(ScanCmd::Bohr(a)) => run::scan_bohr(a),
    }
}

fn init_threads() {
    if let Ok(v) = std::env::var("TOOLKIT_THREADS") {
        match v.parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => eprintln!("ignoring TOOLKIT_THREADS={v:?}: expected a positive integer"),
        }
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    init_threads();
    let started = std::time::Instant::now();
    let outcome = dispatch(cli.cmd);
    eprintln!("wall clock: {:.3}s", started.elapsed().as_secs_f64());
    match outcome {
        Ok(()) => {}
        Err(run::CliError::Usage(m)) => {
            eprintln!("usage error: {m}");
            std::process::exit(1);
        }
        Err(run::CliError::Verification(m)) => {
            eprintln!("verification failure: {m}");
            std::process::exit(2);
        }
        Err(run::CliError::Other(e)) => {
            eprintln!("error: {e:#}");
            std::process::exit(1);
        }
    }
}
