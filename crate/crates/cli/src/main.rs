// SPDX-License-Identifier: MIT OR Apache-2.0
//! `gcdeform`: exact checks and computations on JSON model files.
//!
//! Exit status 0 means success, 1 a check that came out false (the report carries the witness),
//! 2 an input error.

use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gcdeform::checks::DEFAULT_SEED;
use gcdeform::cli::{run, selftest, CliError, Command, Model, Options, Outcome};

#[derive(Parser)]
#[command(name = "gcdeform", version, about = "Exact generalized complex geometry and brane deformations")]
struct Cli {
    #[command(subcommand)]
    group: Group,
}

#[derive(Subcommand)]
enum Group {
    /// Generalized complex structures.
    Gc {
        #[command(subcommand)]
        cmd: GcCmd,
    },
    /// Generalized complex branes.
    Brane {
        #[command(subcommand)]
        cmd: BraneCmd,
    },
    /// Formal deformations of branes.
    Deform {
        #[command(subcommand)]
        cmd: DeformCmd,
    },
    /// Differential graded Lie algebras and totalizations.
    Dgla {
        #[command(subcommand)]
        cmd: DglaCmd,
    },
    /// Runs the acceptance suite and prints a pass/fail matrix.
    Selftest {
        /// Run a single criterion.
        #[arg(long)]
        criterion: Option<usize>,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        output: Format,
    },
}

#[derive(Subcommand)]
enum GcCmd {
    /// Almost-GC and integrability verdict with the type at the origin.
    Check(Io),
    /// Nonzero Nijenhuis values on frame pairs.
    Nijenhuis(Io),
    /// Hamiltonian symmetry `x_f`, bracket closure with `g`, holomorphy of `section`.
    Hamiltonian(Io),
}

#[derive(Subcommand)]
enum BraneCmd {
    /// Compatibility of the brane with the GC structure.
    Check(Io),
    /// Leaf-wise Lagrangian test at sample points.
    Lwl(Io),
    /// Dimension of the brane cohomology in degree `--k`.
    Cohomology(Io),
}

#[derive(Subcommand)]
enum DeformCmd {
    /// First-order section and cohomology class.
    FirstOrder(Io),
    /// Action of a symmetry `element` on a deformation.
    Act(Io),
    /// Compatibility of a deformation with the GC structure.
    Compat(Io),
    /// Validation and reassembly of descent data.
    Descent(Io),
}

#[derive(Subcommand)]
enum DglaCmd {
    /// Maurer–Cartan test with its residual.
    Mc(Io),
    /// Gauge action, or a gauge equivalence between `x` and `x2`.
    Gauge(Io),
    /// Totalization of a semicosimplicial complex.
    Tot(Io),
    /// The Čech model of a brane on a cover.
    BuildV(Io),
    /// The map from H² of the Čech model to brane cohomology.
    Phi(Io),
    /// Lifting along small extensions, or the obstruction class.
    Obstruct(Io),
}

#[derive(Args)]
struct Io {
    /// Model file, or `-` for standard input.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    output: Format,
    /// Polynomial degree bound.
    #[arg(long, default_value_t = 2)]
    deg: u32,
    /// Cohomological degree.
    #[arg(long, default_value_t = 1)]
    k: usize,
}

#[derive(Clone, Copy, Default, PartialEq, Eq, ValueEnum)]
enum Format {
    #[default]
    Json,
    Table,
}

fn dispatch(group: Group) -> (Format, Result<Outcome, CliError>) {
    let (cmd, io) = match group {
        Group::Selftest { criterion, output } => {
            let seed = match std::env::var("GCDEFORM_SEED") {
                Err(_) => Ok(DEFAULT_SEED),
                Ok(s) => s.parse().map_err(|_| CliError::Schema {
                    pointer: "GCDEFORM_SEED".into(),
                    message: format!("`{s}` is not an unsigned integer"),
                }),
            };
            return (output, seed.and_then(|s| selftest(s, criterion)));
        }
        Group::Gc { cmd } => match cmd {
            GcCmd::Check(io) => (Command::GcCheck, io),
            GcCmd::Nijenhuis(io) => (Command::GcNijenhuis, io),
            GcCmd::Hamiltonian(io) => (Command::GcHamiltonian, io),
        },
        Group::Brane { cmd } => match cmd {
            BraneCmd::Check(io) => (Command::BraneCheck, io),
            BraneCmd::Lwl(io) => (Command::BraneLwl, io),
            BraneCmd::Cohomology(io) => (Command::BraneCohomology, io),
        },
        Group::Deform { cmd } => match cmd {
            DeformCmd::FirstOrder(io) => (Command::DeformFirstOrder, io),
            DeformCmd::Act(io) => (Command::DeformAct, io),
            DeformCmd::Compat(io) => (Command::DeformCompat, io),
            DeformCmd::Descent(io) => (Command::DeformDescent, io),
        },
        Group::Dgla { cmd } => match cmd {
            DglaCmd::Mc(io) => (Command::DglaMc, io),
            DglaCmd::Gauge(io) => (Command::DglaGauge, io),
            DglaCmd::Tot(io) => (Command::DglaTot, io),
            DglaCmd::BuildV(io) => (Command::DglaBuildV, io),
            DglaCmd::Phi(io) => (Command::DglaPhi, io),
            DglaCmd::Obstruct(io) => (Command::DglaObstruct, io),
        },
    };
    let result = read_input(&io.input).and_then(|text| run(cmd, &Model::parse(&text)?, Options { deg: io.deg, k: io.k }));
    (io.output, result)
}

fn read_input(path: &PathBuf) -> Result<String, CliError> {
    let io_error = |e: std::io::Error| CliError::Schema { pointer: "/".into(), message: format!("cannot read {}: {e}", path.display()) };
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(io_error)?;
        Ok(s)
    } else {
        std::fs::read_to_string(path).map_err(io_error)
    }
}

fn main() -> ExitCode {
    let (format, result) = dispatch(Cli::parse().group);
    match result {
        Ok(out) => {
            match format {
                Format::Json => println!("{}", out.to_json_string()),
                Format::Table => print!("{}", out.to_table()),
            }
            ExitCode::from(out.exit_code() as u8)
        }
        Err(e) => {
            if format == Format::Json {
                println!("{}", e.to_json());
            }
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
