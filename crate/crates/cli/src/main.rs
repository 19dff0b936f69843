//! `arithlat`: verification suites and ad-hoc computations.
//!
//! Exit codes: 0 pass, 1 verification failed or unresolved, 2 resource
//! guard hit, 3 bad input.

mod suite;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use arithlat::lattice::{EnumerationLimits, DEFAULT_NODE_BUDGET};
use arithlat::modring::Modulus;
use arithlat::qfield::u0;
use arithlat::report::{Report, Status};
use arithlat::{Error, FieldElement, FieldMatrix};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "arithlat", version, about = "Exact checks for the lattice Γ_n over Q[⁴√2]")]
struct Cli {
    /// Print reports as JSON.
    #[arg(long, global = true)]
    json: bool,
    /// Also write the JSON report to this file.
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Named verification suites.
    #[command(subcommand)]
    Verify(Verify),
    /// Sign criterion for γ and a torus direction t.
    Pipeline {
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, value_name = "FILE")]
        gamma: PathBuf,
        #[arg(long, value_name = "FILE")]
        t: PathBuf,
        #[arg(long, default_value_t = 1000)]
        denom_bound: u64,
    },
    /// ad(u) relations and vanishing of the normal coefficient.
    Lie {
        #[arg(long)]
        n: usize,
    },
    /// Is the matrix in Γ_n?
    Membership(MatrixArg),
    /// Reduce an integral matrix mod m.
    Reduce {
        #[command(flatten)]
        matrix: MatrixArg,
        #[arg(long)]
        modulus: u64,
    },
    /// Solve a·t = γtγ⁻¹·a, a·u = u·a over L and optionally mod m.
    SolveStar {
        #[arg(long, value_name = "FILE")]
        gamma: PathBuf,
        #[arg(long, value_name = "FILE")]
        t: PathBuf,
        #[arg(long)]
        modulus: Option<u64>,
        /// Only accept solutions with invertible determinant mod m.
        #[arg(long)]
        invertible: bool,
    },
    /// Members of Γ_n in a coefficient box and distance ball.
    Enumerate {
        #[arg(long)]
        n: usize,
        #[arg(long = "box", default_value_t = 2)]
        coeff_box: i64,
        #[arg(long, default_value_t = 3.0)]
        cap: f64,
        #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
        budget: u64,
    },
    /// d(o, g·o) in the symmetric space.
    Distance(MatrixArg),
    /// Is Ad(k)𝔞 transverse to 𝔭₁?
    Transversality {
        #[arg(long, value_name = "FILE")]
        k: PathBuf,
    },
    /// Does the orbit of u mod m avoid −1?
    PowerOrbit {
        /// Field element "c0 c1 c2 c3"; defaults to u₀.
        #[arg(long, allow_hyphen_values = true)]
        element: Option<String>,
        #[arg(long, default_value_t = 4)]
        modulus: u64,
    },
}

#[derive(Subcommand)]
enum Verify {
    /// u₀ generates the unit group U₀ up to sign.
    Units {
        /// Check this element instead of u₀.
        #[arg(long, hide = true, allow_hyphen_values = true)]
        generator: Option<String>,
    },
    /// −1 and ±(2+x²) are not squares mod m.
    Nonsquares {
        #[arg(long, default_value_t = 4)]
        modulus: u64,
    },
    /// Same as `arithlat lie`.
    Lie {
        #[arg(long)]
        n: usize,
    },
    /// Every lemma in order, as a table.
    All {
        #[arg(long, default_value_t = 3)]
        n: usize,
    },
}

#[derive(Args)]
struct MatrixArg {
    /// Matrix JSON file: {"n": .., "entries": [["c0 c1 c2 c3", ..], ..]}.
    #[arg(long, value_name = "FILE")]
    matrix: PathBuf,
}

enum Failure {
    Input(String),
    Guard(String),
    Other(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Size(_) => Failure::Guard(e.to_string()),
            Error::Internal(_) | Error::Precision(_) => Failure::Other(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

fn read_matrix(path: &Path) -> Result<FieldMatrix, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn modulus(m: u64) -> Result<Modulus, Failure> {
    Ok(Modulus::new(m)?)
}

fn element(text: &str) -> Result<FieldElement, Failure> {
    Ok(text.parse()?)
}

fn exit_code(status: Status) -> u8 {
    match status {
        Status::Pass => 0,
        Status::Fail | Status::Unresolved => 1,
        Status::BudgetExhausted => 2,
    }
}

fn print_report(r: &Report) {
    println!("{}: {} ({} ms)", r.check_name, r.status.as_str(), r.elapsed_ms);
    if let Some(w) = &r.witness {
        println!("{}", serde_json::to_string_pretty(w).expect("serialisable"));
    }
}

fn write_out(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Input(format!("{}: {e}", p.display()))),
        None => Ok(()),
    }
}

fn run_all(cli: &Cli, n: usize) -> Result<u8, Failure> {
    let rows = suite::all(n);
    let mut code = 0u8;
    let mut reports = Vec::new();
    if !cli.json {
        println!("{:<40} {:<18} {:>8}", "lemma", "status", "ms");
    }
    for (lemma, r) in rows {
        let (status, ms, report) = match r {
            Ok(r) => (r.status.as_str().to_string(), r.elapsed_ms.to_string(), Some(r)),
            Err(e) => {
                let f = Failure::from(e);
                let c = match &f {
                    Failure::Guard(_) => 2,
                    Failure::Input(_) => 3,
                    Failure::Other(_) => 1,
                };
                code = code.max(c);
                let msg = match f {
                    Failure::Input(m) | Failure::Guard(m) | Failure::Other(m) => m,
                };
                (format!("error: {msg}"), "-".into(), None)
            }
        };
        if !cli.json {
            println!("{lemma:<40} {status:<18} {ms:>8}");
        }
        if let Some(r) = report {
            code = code.max(exit_code(r.status));
            reports.push(serde_json::json!({ "lemma": lemma, "report": r }));
        } else {
            reports.push(serde_json::json!({ "lemma": lemma, "error": status }));
        }
    }
    let text = serde_json::to_string_pretty(&reports).expect("serialisable");
    if cli.json {
        println!("{text}");
    }
    write_out(cli.out.as_deref(), &text)?;
    Ok(code)
}

fn run(cli: &Cli) -> Result<u8, Failure> {
    let report = match &cli.command {
        Command::Verify(Verify::All { n }) => return run_all(cli, *n),
        Command::Verify(Verify::Units { generator }) => {
            let g = generator.as_deref().map(element).transpose()?;
            suite::units(g.as_ref())
        }
        Command::Verify(Verify::Nonsquares { modulus: m }) => suite::nonsquares(modulus(*m)?)?,
        Command::Verify(Verify::Lie { n }) | Command::Lie { n } => suite::lie(*n)?,
        Command::Pipeline { n, gamma, t, denom_bound } => {
            suite::pipeline(&read_matrix(gamma)?, &read_matrix(t)?, *n, *denom_bound)?
        }
        Command::Membership(m) => suite::membership(&read_matrix(&m.matrix)?)?,
        Command::Reduce { matrix, modulus: m } => suite::reduce(&read_matrix(&matrix.matrix)?, modulus(*m)?)?,
        Command::SolveStar { gamma, t, modulus: m, invertible } => {
            let m = m.map(modulus).transpose()?;
            suite::solve_star(&read_matrix(gamma)?, &read_matrix(t)?, m, *invertible)?
        }
        Command::Enumerate { n, coeff_box, cap, budget } => {
            let limits = EnumerationLimits { coeff_box: *coeff_box, distance_cap: *cap, node_budget: *budget };
            suite::enumerate(*n, limits)?
        }
        Command::Distance(m) => suite::distance(&read_matrix(&m.matrix)?)?,
        Command::Transversality { k } => suite::transversality(&read_matrix(k)?)?,
        Command::PowerOrbit { element: e, modulus: m } => {
            let u = match e {
                Some(text) => element(text)?,
                None => u0(),
            };
            suite::power_orbit(&u, modulus(*m)?)?
        }
    };
    let text = serde_json::to_string_pretty(&report).expect("serialisable");
    if cli.json {
        println!("{text}");
    } else {
        print_report(&report);
    }
    write_out(cli.out.as_deref(), &text)?;
    Ok(exit_code(report.status))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return ExitCode::from(if usage { 3 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Guard(msg)) => {
            eprintln!("arithlat: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("arithlat: {msg}");
            ExitCode::from(3)
        }
        Err(Failure::Other(msg)) => {
            eprintln!("arithlat: {msg}");
            ExitCode::from(1)
        }
    }
}
