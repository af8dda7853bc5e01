use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};

use nestinst::pipeline::{
    exit_code, report_json, report_text, run_pipeline, BackendKind, Flags,
};
use nestinst::problem::{parse_problem, print_problem};

#[derive(Parser)]
#[command(name = "nestinst", version, about = "Instantiation-based satisfiability for hierarchic theory combinations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a problem file and print the verdict report.
    Solve(SolveArgs),
    /// Parse a problem file and print it back in canonical form.
    Parse { file: PathBuf },
    /// Emit the ground problem as an SMT-LIB 2 script without solving.
    Emit(SolveArgs),
}

#[derive(clap::Args)]
struct SolveArgs {
    file: PathBuf,
    /// Ground backend to decide the instantiated problem.
    #[arg(long, value_enum, default_value_t = BackendArg::Bounded)]
    backend: BackendArg,
    /// Symmetric window half-width for the bounded search.
    #[arg(long)]
    window: Option<i64>,
    /// Element-domain size for free sorts in the bounded search.
    #[arg(long)]
    free_domain: Option<usize>,
    /// Saturation round limit for the hyper-linking scheme.
    #[arg(long, default_value_t = 16)]
    max_rounds: usize,
    /// Reproduce the paper-exact pools: no upper-bound constant or axioms.
    #[arg(long)]
    no_chi: bool,
    /// Absorb index offsets into renamed arrays before validating.
    #[arg(long)]
    shift: bool,
    /// Split an integer sort used as both index and element into a copy.
    #[arg(long)]
    copy_elements: bool,
    /// Write the final ground clause set as a re-parseable problem file.
    #[arg(long)]
    emit_instances: Option<PathBuf>,
    /// Write the emitted SMT-LIB script to this path.
    #[arg(long)]
    emit_script: Option<PathBuf>,
    /// External solver command (defaults to $NESTINST_SOLVER).
    #[arg(long)]
    solver: Option<String>,
    /// External solver timeout in seconds.
    #[arg(long, default_value_t = 60)]
    timeout: u64,
    /// Node cap for the bounded search.
    #[arg(long, default_value_t = 50_000_000)]
    node_cap: u64,
    /// Machine-readable JSON report.
    #[arg(long)]
    json: bool,
    /// Include wall-clock timings in the report (breaks byte-identical
    /// reproducibility).
    #[arg(long)]
    timings: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    Bounded,
    Smtlib,
    External,
}

impl SolveArgs {
    fn flags(&self, backend_override: Option<BackendKind>) -> Flags {
        Flags {
            backend: backend_override.unwrap_or(match self.backend {
                BackendArg::Bounded => BackendKind::Bounded,
                BackendArg::Smtlib => BackendKind::Smtlib,
                BackendArg::External => BackendKind::External,
            }),
            window: self.window,
            free_domain: self.free_domain,
            max_rounds: self.max_rounds,
            no_chi: self.no_chi,
            shift: self.shift,
            copy_elements: self.copy_elements,
            emit_instances: self.emit_instances.clone(),
            emit_script: self.emit_script.clone(),
            solver: self.solver.clone(),
            timeout: Duration::from_secs(self.timeout),
            node_cap: self.node_cap,
            with_timings: self.timings,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}

fn run(cli: Cli) -> nestinst::Result<i32> {
    match cli.command {
        Command::Parse { file } => {
            let text = std::fs::read_to_string(&file)?;
            let problem = parse_problem(&text)?;
            print!("{}", print_problem(&problem));
            Ok(0)
        }
        Command::Solve(args) => {
            let text = std::fs::read_to_string(&args.file)?;
            let problem = parse_problem(&text)?;
            let out = run_pipeline(&problem, &args.flags(None))?;
            if args.json {
                println!("{}", report_json(&out.report));
            } else {
                print!("{}", report_text(&out.report));
            }
            Ok(exit_code(&out.verdict))
        }
        Command::Emit(args) => {
            let text = std::fs::read_to_string(&args.file)?;
            let problem = parse_problem(&text)?;
            let out = run_pipeline(&problem, &args.flags(Some(BackendKind::Smtlib)))?;
            if args.json {
                println!("{}", report_json(&out.report));
            } else {
                print!("{}", report_text(&out.report));
            }
            Ok(0)
        }
    }
}
