use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use geomatch_core::generate::{generate, GeneratorSpec, Regime, ShapeSpec};
use geomatch_core::pipeline::{run, Mode, Report, RunConfig};
use geomatch_core::separator::{build_separator_tree, SeparatorParams};
use geomatch_core::sparsify::{sparsify, StructureChoice};
use geomatch_core::{build_graph, Error, Instance, Result};

/// Retry budget override for the algebraic matcher.
const RETRIES_VAR: &str = "GEOMATCH_MAX_RETRIES";

#[derive(Parser)]
#[command(name = "geomatch", version, about = "Maximum matching in geometric intersection graphs")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Match one instance and print a report.
    Run(RunArgs),
    /// Write a random instance as JSON.
    Generate {
        #[command(flatten)]
        src: Source,
    },
    /// Print the intersection graph as an edge list.
    Graph {
        #[command(flatten)]
        src: Source,
    },
    /// Print the separator tree as JSON.
    Tree {
        #[command(flatten)]
        src: Source,
    },
    /// Print the kept family and residual clusters as JSON.
    Sparsify {
        #[command(flatten)]
        src: Source,
        #[arg(long, value_enum, default_value_t = Structure::Naive)]
        structure: Structure,
    },
}

#[derive(Args)]
struct Source {
    /// Instance JSON file; overrides the generator options.
    #[arg(long)]
    instance: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Generator::UnitDisk)]
    generator: Generator,
    #[arg(long, default_value_t = 100)]
    n: usize,
    /// Radius ratio for disk-ratio, side bound for box.
    #[arg(long, default_value_t = 1.0)]
    psi: f64,
    /// Side of the placement square; default sqrt(4n)·psi.
    #[arg(long)]
    side: Option<f64>,
    /// Redraw until the density estimate is at most this.
    #[arg(long, conflicts_with = "depth")]
    rho: Option<usize>,
    /// Cluster objects around n/depth centers.
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    src: Source,
    #[arg(long, value_enum, default_value_t = ModeArg::Algebraic)]
    mode: ModeArg,
    /// Compare against the blossom oracle; exit 2 on a mismatch.
    #[arg(long)]
    verify: bool,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long, value_enum, default_value_t = Structure::Naive)]
    structure: Structure,
    /// Record per-stage wall times (reports are then not reproducible).
    #[arg(long)]
    timings: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Generator {
    UnitDisk,
    DiskRatio,
    Box,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Algebraic,
    SparsifyThenAlgebraic,
    SparsifyThenBlossom,
    Blossom,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum Structure {
    Naive,
    Unitdisk,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Algebraic => Mode::Algebraic,
            ModeArg::SparsifyThenAlgebraic => Mode::SparsifyThenAlgebraic,
            ModeArg::SparsifyThenBlossom => Mode::SparsifyThenBlossom,
            ModeArg::Blossom => Mode::Blossom,
        }
    }
}

impl From<Structure> for StructureChoice {
    fn from(s: Structure) -> Self {
        match s {
            Structure::Naive => StructureChoice::Naive,
            Structure::Unitdisk => StructureChoice::UnitDisk,
        }
    }
}

impl Source {
    fn spec(&self) -> GeneratorSpec {
        let shape = match self.generator {
            Generator::UnitDisk => ShapeSpec::UnitDisk,
            Generator::DiskRatio => ShapeSpec::DiskRatio { ratio: self.psi },
            Generator::Box => ShapeSpec::Box { psi: self.psi },
        };
        let regime = match (self.rho, self.depth) {
            (_, Some(depth)) => Regime::Clustered { depth },
            (Some(rho), None) => Regime::LowDensity { rho },
            (None, None) => Regime::LowDensity { rho: usize::MAX },
        };
        let side = self.side.unwrap_or_else(|| (4.0 * self.n as f64).sqrt() * self.psi.max(1.0));
        GeneratorSpec { shape, n: self.n, regime, side }
    }

    /// The instance and an id for reports.
    fn load(&self) -> Result<(Instance, String)> {
        match &self.instance {
            Some(path) => {
                let inst = Instance::from_json(&fs::read_to_string(path)?)?;
                let id = path.file_stem().map_or_else(|| "instance".into(), |s| s.to_string_lossy().into_owned());
                Ok((inst, id))
            }
            None => Ok((generate(&self.spec(), self.seed)?, format!("gen-{}", self.seed))),
        }
    }

    fn emit(&self, text: &str) -> Result<()> {
        match &self.out {
            Some(path) => fs::write(path, format!("{text}\n"))?,
            None => writeln!(io::stdout().lock(), "{text}")?,
        }
        Ok(())
    }
}

fn max_retries() -> Result<usize> {
    match std::env::var(RETRIES_VAR) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Error::InvalidParams(format!("{RETRIES_VAR} must be a non-negative integer, got {v:?}"))),
        Err(_) => Ok(RunConfig::default().max_retries),
    }
}

fn run_cmd(args: &RunArgs) -> Result<Report> {
    let (inst, id) = args.src.load()?;
    let config = RunConfig {
        mode: args.mode.into(),
        seed: args.src.seed,
        verify: args.verify,
        structure: args.structure.into(),
        max_retries: max_retries()?,
        timings: args.timings,
    };
    let report = run(&inst, &id, &config)?;
    let text = match args.format {
        Format::Json => report.to_json(),
        Format::Csv => format!("{}\n{}", Report::csv_header(), report.csv_row()),
    };
    args.src.emit(&text)?;
    Ok(report)
}

/// Exit status for a finished run: 2 on a failed verification.
fn verdict(report: &Report) -> u8 {
    if report.mismatch() {
        2
    } else {
        0
    }
}

fn dispatch(cli: &Cli) -> Result<ExitCode> {
    match &cli.cmd {
        Command::Run(args) => {
            let report = run_cmd(args)?;
            let code = verdict(&report);
            if code != 0 {
                eprintln!(
                    "verification failed: matching of size {} (valid: {}), oracle size {}",
                    report.matching_size,
                    report.valid,
                    report.oracle_size.unwrap_or(0)
                );
                return Ok(ExitCode::from(code));
            }
        }
        Command::Generate { src } => src.emit(&src.load()?.0.to_json())?,
        Command::Graph { src } => src.emit(build_graph(&src.load()?.0.objects).to_edge_list().trim_end())?,
        Command::Tree { src } => {
            let inst = src.load()?.0;
            let mut rng = ChaCha8Rng::seed_from_u64(src.seed);
            let tb = build_separator_tree(&inst.objects, &SeparatorParams::default(), &mut rng)?;
            src.emit(&tb.tree.to_json())?;
        }
        Command::Sparsify { src, structure } => {
            let inst = src.load()?.0;
            src.emit(&sparsify(&inst.objects, inst.psi, (*structure).into())?.to_json())?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
