//! The `mrlc` command line.
//!
//! Exit codes: 0 for success or a positive verdict, 1 for a negative result
//! (not maximally recoverable, uncorrectable erasures, no code found), 2 for
//! usage errors, unreadable or malformed input, exceeded budgets and
//! corrupted data.

use std::ffi::OsString;
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use mrlc::codec::{decode_erasures, encode, CodecError, Codeword};
use mrlc::constructions::{
    basic_generator_set, construct_basic, construct_optimized, derive_data_local,
    optimized_generator_set,
};
use mrlc::experiments::{
    exhaustive_lower_bound_search, field_size_table, random_csv_row, random_mr_probability,
    search_csv_row, table_csv, RandomSpec, SearchOutcome, RANDOM_CSV_HEADER, SEARCH_CSV_HEADER,
};
use mrlc::format::{parse_code, serialize_code};
use mrlc::gf2::{modulus_table_digest, FieldElement};
use mrlc::topology::{CodeInstance, CodeKind, ErasurePattern};
use mrlc::verification::{
    verify_data_local_mr_with, verify_mr_oracle_with, verify_mr_with, Coverage, Sampling,
    VerifyError, VerifyOptions,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

/// Grid used by `experiment table` when none is given.
const DEFAULT_TABLE_GRID: &str = "4,2,2;6,2,2;6,3,3;12,3,3;60,4,4";

#[derive(Debug, Parser)]
#[command(
    name = "mrlc",
    about = "Maximally recoverable local erasure codes",
    disable_version_flag = true
)]
struct Cli {
    /// Worker threads for verification and experiments (default: all cores).
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    jobs: Option<u64>,

    /// Print the version and the digest of the irreducible-polynomial table.
    #[arg(short = 'V', long)]
    version: bool,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build an explicit maximally recoverable code and write it as a code file.
    Construct(ConstructArgs),
    /// Check whether a code file describes a maximally recoverable code.
    Verify(VerifyArgs),
    /// Encode k data symbols (hex, whitespace separated, on stdin).
    Encode(EncodeArgs),
    /// Recover erased symbols of a codeword read from stdin.
    Decode(DecodeArgs),
    /// Run an experiment and print CSV.
    Experiment(ExperimentArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Construction {
    Basic,
    Optimized,
}

#[derive(Debug, Args)]
struct Shape {
    /// Data symbols
    #[arg(long)]
    k: usize,
    /// Data symbols per local group
    #[arg(long)]
    r: usize,
    /// Heavy (global) parities
    #[arg(long)]
    h: usize,
}

#[derive(Debug, Args)]
struct ConstructArgs {
    #[arg(long, value_enum, default_value = "optimized")]
    kind: Construction,
    #[command(flatten)]
    shape: Shape,
    /// Derive a data-local code from the local one.
    #[arg(long)]
    data_local: bool,
    /// Number of data symbols of the data-local code (a multiple of r).
    #[arg(long, requires = "data_local")]
    k_target: Option<usize>,
    /// Output file (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    file: PathBuf,
    /// Use the rank-based oracle instead of the difference-set test.
    #[arg(long)]
    oracle: bool,
    /// Maximum amount of work before refusing.
    #[arg(long)]
    budget: Option<u64>,
    /// Check this many random puncturings instead of all of them.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    sample: Option<u64>,
    /// Seed for the sampled puncturings
    #[arg(long, default_value_t = 0, requires = "sample")]
    seed: u64,
}

#[derive(Debug, Args)]
struct EncodeArgs {
    file: PathBuf,
}

#[derive(Debug, Args)]
struct DecodeArgs {
    file: PathBuf,
    /// Erased coordinates, e.g. `--erase 0,4,7`. Their input tokens are
    /// ignored and may be `?`.
    #[arg(long, value_delimiter = ',')]
    erase: Vec<usize>,
}

#[derive(Debug, Args)]
struct ExperimentArgs {
    #[command(subcommand)]
    mode: ExperimentMode,
}

#[derive(Debug, Subcommand)]
enum ExperimentMode {
    /// Fraction of random codes that are maximally recoverable.
    Random {
        #[command(flatten)]
        shape: Shape,
        /// Field degree: coefficients come from GF(2^q).
        #[arg(long)]
        q: u32,
        #[arg(long, default_value_t = 200)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        budget: Option<u64>,
    },
    /// Exhaustive search over all heavy-parity coefficients in GF(2^q).
    Search {
        #[command(flatten)]
        shape: Shape,
        /// Field degree: coefficients come from GF(2^q).
        #[arg(long)]
        q: u32,
        /// Maximum assignments times puncturings (default 2^24)
        #[arg(long)]
        budget: Option<u64>,
    },
    /// Field degrees of both constructions.
    Table {
        /// Semicolon separated `k,r,h` triples.
        #[arg(long, default_value = DEFAULT_TABLE_GRID)]
        grid: String,
    },
}

/// A failure that ends the command with a message on stderr.
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn error(message: impl ToString) -> Self {
        Failure {
            code: EXIT_ERROR,
            message: message.to_string(),
        }
    }
}

type Outcome = Result<i32, Failure>;

struct Io<'a> {
    stdin: &'a mut (dyn Read + Send),
    stdout: &'a mut (dyn Write + Send),
    stderr: &'a mut (dyn Write + Send),
}

impl Io<'_> {
    fn out(&mut self, text: &str) -> Result<(), Failure> {
        self.stdout
            .write_all(text.as_bytes())
            .map_err(|e| Failure::error(format!("cannot write output: {e}")))
    }

    fn note(&mut self, text: &str) {
        let _ = writeln!(self.stderr, "{text}");
    }

    fn read_stdin(&mut self) -> Result<String, Failure> {
        let mut text = String::new();
        self.stdin
            .read_to_string(&mut text)
            .map_err(|e| Failure::error(format!("cannot read standard input: {e}")))?;
        Ok(text)
    }
}

/// Runs the command line `args` (program name first) and returns the exit
/// code.
pub fn run<I, T>(
    args: I,
    stdin: &mut (dyn Read + Send),
    stdout: &mut (dyn Write + Send),
    stderr: &mut (dyn Write + Send),
) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = stderr.write_all(text.as_bytes());
                EXIT_ERROR
            } else {
                let _ = stdout.write_all(text.as_bytes());
                EXIT_OK
            };
        }
    };
    let mut io = Io {
        stdin,
        stdout,
        stderr,
    };
    match dispatch(cli, &mut io) {
        Ok(code) => code,
        Err(Failure { code, message }) => {
            io.note(&format!("error: {message}"));
            code
        }
    }
}

fn dispatch(cli: Cli, io: &mut Io<'_>) -> Outcome {
    if cli.version {
        io.out(&format!(
            "mrlc {}\nmodulus table sha256 {}\n",
            env!("CARGO_PKG_VERSION"),
            modulus_table_digest()
        ))?;
        return Ok(EXIT_OK);
    }
    let Some(command) = cli.command else {
        return Err(Failure::error("a subcommand is required; see --help"));
    };
    let work = move |io: &mut Io<'_>| match command {
        Command::Construct(args) => construct(args, io),
        Command::Verify(args) => verify(args, io),
        Command::Encode(args) => encode_cmd(args, io),
        Command::Decode(args) => decode_cmd(args, io),
        Command::Experiment(args) => experiment(args.mode, io),
    };
    match cli.jobs {
        None => work(io),
        Some(jobs) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(jobs as usize)
                .build()
                .map_err(Failure::error)?;
            pool.install(|| work(io))
        }
    }
}

fn load_code(path: &Path) -> Result<CodeInstance, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::error(format!("cannot read {}: {e}", path.display())))?;
    parse_code(&text).map_err(|e| Failure::error(format!("{}: {e}", path.display())))
}

fn construct(args: ConstructArgs, io: &mut Io<'_>) -> Outcome {
    let Shape { k, r, h } = args.shape;
    let (local, m) = match args.kind {
        Construction::Basic => (
            construct_basic(k, r, h),
            basic_generator_set(k, r, h).ok().and_then(|g| g.m),
        ),
        Construction::Optimized => (
            construct_optimized(k, r, h),
            optimized_generator_set(k, r, h).ok().and_then(|g| g.m),
        ),
    };
    let local = local.map_err(Failure::error)?;
    let code = if args.data_local {
        derive_data_local(&local, args.k_target).map_err(Failure::error)?
    } else {
        local
    };
    let text = serialize_code(&code);
    match &args.out {
        Some(path) => fs::write(path, &text)
            .map_err(|e| Failure::error(format!("cannot write {}: {e}", path.display())))?,
        None => io.out(&text)?,
    }
    let topo = code.topology();
    io.note(&format!(
        "{} ({},{},{}) code: n={} over GF(2^{}), m={}",
        topo.kind(),
        topo.k(),
        topo.r(),
        topo.h(),
        topo.len(),
        code.field().degree(),
        m.unwrap_or(0)
    ));
    Ok(EXIT_OK)
}

fn verify(args: VerifyArgs, io: &mut Io<'_>) -> Outcome {
    let code = load_code(&args.file)?;
    let options = VerifyOptions {
        budget: args.budget,
        sampling: args.sample.map(|samples| Sampling {
            samples,
            seed: args.seed,
        }),
    };
    let result = match code.topology().kind() {
        CodeKind::Local if args.oracle => verify_mr_oracle_with(&code, &options),
        CodeKind::Local => verify_mr_with(&code, &options),
        // data-local codes only have the rank-based check
        CodeKind::DataLocal => verify_data_local_mr_with(&code, &options),
    };
    let verdict = match result {
        Ok(v) => v,
        Err(e @ VerifyError::BudgetExceeded { .. }) => {
            return Err(Failure::error(format!(
                "{e}; raise --budget or use --sample N"
            )))
        }
        Err(e) => return Err(Failure::error(e)),
    };
    let coverage = match verdict.coverage {
        Coverage::Exhaustive { checked } => format!("all {checked} puncturings"),
        Coverage::Sampled { samples, seed } => {
            format!("{samples} sampled puncturings (seed {seed})")
        }
    };
    match &verdict.witness {
        None => {
            io.out(&format!("MR ({coverage})\n"))?;
            Ok(EXIT_OK)
        }
        Some(w) => {
            io.out(&format!("NOT MR: {w}\n"))?;
            Ok(EXIT_NEGATIVE)
        }
    }
}

fn parse_symbol(token: &str, index: usize) -> Result<FieldElement, Failure> {
    let digits = token.strip_prefix("0x").unwrap_or(token);
    u64::from_str_radix(digits, 16)
        .map(FieldElement::from_bits)
        .map_err(|_| Failure::error(format!("symbol {index}: '{token}' is not a hex value")))
}

fn format_symbols(symbols: &[FieldElement]) -> String {
    let mut line = symbols
        .iter()
        .map(|s| format!("{s:#x}"))
        .collect::<Vec<_>>()
        .join(" ");
    line.push('\n');
    line
}

fn codec_failure(e: CodecError) -> Failure {
    match e {
        CodecError::Uncorrectable { .. } => Failure {
            code: EXIT_NEGATIVE,
            message: e.to_string(),
        },
        other => Failure::error(other),
    }
}

fn encode_cmd(args: EncodeArgs, io: &mut Io<'_>) -> Outcome {
    let code = load_code(&args.file)?;
    let input = io.read_stdin()?;
    let data = input
        .split_whitespace()
        .enumerate()
        .map(|(i, tok)| parse_symbol(tok, i))
        .collect::<Result<Vec<_>, _>>()?;
    let word = encode(&code, &data).map_err(codec_failure)?;
    io.out(&format_symbols(&word.symbols))?;
    Ok(EXIT_OK)
}

fn decode_cmd(args: DecodeArgs, io: &mut Io<'_>) -> Outcome {
    let code = load_code(&args.file)?;
    let pattern =
        ErasurePattern::new(code.topology(), args.erase.iter().copied()).map_err(Failure::error)?;
    let input = io.read_stdin()?;
    let symbols = input
        .split_whitespace()
        .enumerate()
        .map(|(i, tok)| {
            if pattern.contains(i) {
                Ok(FieldElement::ZERO)
            } else {
                parse_symbol(tok, i)
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    let word = Codeword::new(symbols).erase(&pattern);
    let decoded = decode_erasures(&code, &word).map_err(codec_failure)?;
    io.out(&format_symbols(&decoded.symbols))?;
    Ok(EXIT_OK)
}

fn parse_grid(text: &str) -> Result<Vec<(usize, usize, usize)>, Failure> {
    text.split(';')
        .filter(|s| !s.trim().is_empty())
        .map(|triple| {
            let parts: Vec<usize> = triple
                .split(',')
                .map(|p| p.trim().parse())
                .collect::<Result<_, _>>()
                .map_err(|_| Failure::error(format!("invalid grid entry '{triple}'")))?;
            match parts[..] {
                [k, r, h] => Ok((k, r, h)),
                _ => Err(Failure::error(format!(
                    "grid entry '{triple}' must be k,r,h"
                ))),
            }
        })
        .collect()
}

fn experiment(mode: ExperimentMode, io: &mut Io<'_>) -> Outcome {
    match mode {
        ExperimentMode::Random {
            shape,
            q,
            trials,
            seed,
            budget,
        } => {
            let estimate = random_mr_probability(&RandomSpec {
                k: shape.k,
                r: shape.r,
                h: shape.h,
                q_degree: q,
                trials,
                seed,
                budget,
            })
            .map_err(Failure::error)?;
            io.out(&format!(
                "{RANDOM_CSV_HEADER}\n{}\n",
                random_csv_row(&estimate)
            ))?;
            Ok(EXIT_OK)
        }
        ExperimentMode::Search { shape, q, budget } => {
            let outcome = exhaustive_lower_bound_search(shape.k, shape.r, shape.h, q, budget)
                .map_err(Failure::error)?;
            io.out(&format!(
                "{SEARCH_CSV_HEADER}\n{}\n",
                search_csv_row(shape.k, shape.r, shape.h, q, &outcome)
            ))?;
            Ok(match outcome {
                SearchOutcome::ExistsMr { .. } => EXIT_OK,
                SearchOutcome::NoneExists { .. } => EXIT_NEGATIVE,
            })
        }
        ExperimentMode::Table { grid } => {
            let rows = field_size_table(&parse_grid(&grid)?).map_err(Failure::error)?;
            io.out(&table_csv(&rows))?;
            Ok(EXIT_OK)
        }
    }
}
