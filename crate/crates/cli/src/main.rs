//! `cas` — split images into cellular-automata threshold shares, recover,
//! inspect, and analyze them.
//!
//! Exit codes: 0 success, 2 input or parameter error, 3 protocol error
//! (below threshold, non-consecutive shares, or mixed schemes).

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgAction, Parser, Subcommand};
use rand::rngs::OsRng;

use cas_core::analysis::{self, CensusParams};
use cas_core::bbs::{BbsError, BbsGenerator};
use cas_core::ca::{CaError, RuleNumber};
use cas_core::image::{CodecError, Image};
use cas_core::num_bigint::BigUint;
use cas_core::scheme::{self, SchemeError, SchemeParams};
use cas_core::share::{validate_share_set, Share, SchemeId, ShareError};
use cas_core::pnm;

const EXIT_INPUT: u8 = 2;
const EXIT_PROTOCOL: u8 = 3;

#[derive(Parser)]
#[command(
    name = "cas",
    version,
    about = "(k,n)-threshold secret sharing for images via reversible memory cellular automata"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Print extra detail (-v, -vv)
    #[arg(short, long, global = true, action = ArgAction::Count)]
    verbose: u8,
}

#[derive(Subcommand)]
enum Command {
    /// Split a PBM/PGM/PPM image into n share files
    Split {
        /// Threshold: consecutive shares needed to recover
        #[arg(long)]
        k: u8,
        /// Total number of shares
        #[arg(long)]
        n: u8,
        /// Index of the first share configuration; defaults to k
        #[arg(long)]
        m: Option<u16>,
        /// Comma-separated rule numbers (k-1 values, each 0..=511); drawn
        /// randomly when omitted
        #[arg(long, value_delimiter = ',')]
        rules: Option<Vec<u16>>,
        /// Fixed BBS parameters "p,q,x0" (decimal) for reproducible splits
        #[arg(long, value_name = "P,Q,X0")]
        bbs: Option<String>,
        /// Prime size in bits when BBS parameters are generated
        #[arg(long, default_value_t = BbsGenerator::DEFAULT_PRIME_BITS)]
        bbs_prime_bits: u64,
        /// Collapse an RGB input with R=G=B everywhere to an 8-bit secret
        #[arg(long)]
        gray: bool,
        /// Also export each share payload as a PNM image beside the .cas file
        #[arg(long)]
        also_pgm: bool,
        /// Output directory for share_0.cas .. share_{n-1}.cas
        #[arg(short, long, default_value = ".")]
        output: PathBuf,
        /// Input image (raw PBM, PGM, or PPM)
        input: PathBuf,
    },
    /// Recover the secret image from k or more consecutive share files
    Recover {
        /// Output image path
        #[arg(short, long)]
        output: PathBuf,
        /// Share files (.cas)
        #[arg(required = true)]
        shares: Vec<PathBuf>,
    },
    /// Print a share file's header fields and CRC status
    Inspect {
        /// Share file (.cas)
        file: PathBuf,
    },
    /// Uniformity statistics for share files, and optionally an exhaustive
    /// perfectness census on tiny synthetic parameters
    Analyze {
        /// Share files (.cas) to analyze
        files: Vec<PathBuf>,
        /// Run the exhaustive census
        #[arg(long)]
        census: bool,
        /// Census grid rows
        #[arg(long, default_value_t = 2)]
        r: usize,
        /// Census grid columns
        #[arg(long, default_value_t = 2)]
        s: usize,
        /// Census state count c (a power of two)
        #[arg(long, default_value_t = 2)]
        c: u64,
        /// Census threshold k
        #[arg(long, default_value_t = 2)]
        k: u8,
        /// Census offset m; defaults to k
        #[arg(long)]
        m: Option<u16>,
        /// Census share count n; defaults to k
        #[arg(long)]
        n: Option<u8>,
        /// Census rules (k-1 values); defaults to 232 repeated
        #[arg(long, value_delimiter = ',')]
        rules: Option<Vec<u16>>,
        /// Observed share count j (1..=k); defaults to k-1
        #[arg(long)]
        observed: Option<usize>,
        /// Emit machine-readable JSON instead of tables
        #[arg(long)]
        json: bool,
    },
}

struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn input(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }

    fn protocol(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_PROTOCOL,
            message: message.into(),
        }
    }
}

impl From<CodecError> for CliError {
    fn from(e: CodecError) -> Self {
        CliError::input(e.to_string())
    }
}

impl From<BbsError> for CliError {
    fn from(e: BbsError) -> Self {
        CliError::input(e.to_string())
    }
}

impl From<CaError> for CliError {
    fn from(e: CaError) -> Self {
        CliError::input(e.to_string())
    }
}

impl From<ShareError> for CliError {
    fn from(e: ShareError) -> Self {
        match e {
            ShareError::MixedScheme(_) | ShareError::InsufficientShares { .. } => {
                CliError::protocol(e.to_string())
            }
            other => CliError::input(other.to_string()),
        }
    }
}

impl From<SchemeError> for CliError {
    fn from(e: SchemeError) -> Self {
        match e {
            SchemeError::Share(inner) => inner.into(),
            other => CliError::input(other.to_string()),
        }
    }
}

impl From<analysis::AnalysisError> for CliError {
    fn from(e: analysis::AnalysisError) -> Self {
        CliError::input(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Split {
            k,
            n,
            m,
            rules,
            bbs,
            bbs_prime_bits,
            gray,
            also_pgm,
            output,
            input,
        } => cmd_split(SplitArgs {
            k,
            n,
            m,
            rules,
            bbs,
            bbs_prime_bits,
            gray,
            also_pgm,
            output,
            input,
            verbose: cli.verbose,
        }),
        Command::Recover { output, shares } => cmd_recover(&output, &shares),
        Command::Inspect { file } => cmd_inspect(&file),
        Command::Analyze {
            files,
            census,
            r,
            s,
            c,
            k,
            m,
            n,
            rules,
            observed,
            json,
        } => cmd_analyze(AnalyzeArgs {
            files,
            census,
            r,
            s,
            c,
            k,
            m,
            n,
            rules,
            observed,
            json,
        }),
    }
}

struct SplitArgs {
    k: u8,
    n: u8,
    m: Option<u16>,
    rules: Option<Vec<u16>>,
    bbs: Option<String>,
    bbs_prime_bits: u64,
    gray: bool,
    also_pgm: bool,
    output: PathBuf,
    input: PathBuf,
    verbose: u8,
}

fn parse_rules(values: &[u16], k: u8) -> Result<Vec<RuleNumber>, CliError> {
    if values.len() != usize::from(k).saturating_sub(1) {
        return Err(CliError::input(format!(
            "expected {} comma-separated rules for k = {k}, got {}",
            usize::from(k).saturating_sub(1),
            values.len()
        )));
    }
    values
        .iter()
        .map(|&v| RuleNumber::new(v).map_err(CliError::from))
        .collect()
}

fn parse_bbs_triple(text: &str) -> Result<(BigUint, BigUint, BigUint), CliError> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(CliError::input(format!(
            "--bbs expects three comma-separated decimal integers p,q,x0; got {text:?}"
        )));
    }
    let parse = |name: &str, s: &str| {
        BigUint::parse_bytes(s.as_bytes(), 10)
            .ok_or_else(|| CliError::input(format!("--bbs {name} is not a decimal integer: {s:?}")))
    };
    Ok((
        parse("p", parts[0])?,
        parse("q", parts[1])?,
        parse("x0", parts[2])?,
    ))
}

fn read_file(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes)
        .map_err(|e| CliError::input(format!("cannot write {}: {e}", path.display())))
}

fn cmd_split(args: SplitArgs) -> Result<(), CliError> {
    let bytes = read_file(&args.input)?;
    let mut image = pnm::decode(&bytes)?;
    if args.gray {
        image = image.into_gray()?;
    }
    let secret = image.to_matrix();
    let depth = image.depth();
    let m = args.m.unwrap_or(u16::from(args.k));

    // All randomness flows through either the fixed BBS parameters or the
    // OS entropy source. With --bbs the scheme id and any undrawn rules are
    // taken from the BBS bit stream (id first, then rules), so repeated
    // runs are byte-identical.
    let (params, mut generator) = match &args.bbs {
        Some(text) => {
            let (p, q, x0) = parse_bbs_triple(text)?;
            let mut generator = BbsGenerator::new(&p, &q, &x0)?;
            let mut id = [0u8; 16];
            generator.fill_bytes(&mut id);
            let rules = match &args.rules {
                Some(values) => parse_rules(values, args.k)?,
                None => (0..args.k.max(1) - 1)
                    .map(|_| {
                        RuleNumber::new(generator.next_rule_value())
                            .expect("nine bits form a valid rule")
                    })
                    .collect(),
            };
            let params = SchemeParams::new(
                args.k,
                args.n,
                m,
                depth,
                secret.rows() as u32,
                secret.cols() as u32,
                rules,
                SchemeId::new(id),
            )?;
            (params, generator)
        }
        None => {
            let generator = BbsGenerator::generate(args.bbs_prime_bits, &mut OsRng);
            let params = match &args.rules {
                Some(values) => SchemeParams::new(
                    args.k,
                    args.n,
                    m,
                    depth,
                    secret.rows() as u32,
                    secret.cols() as u32,
                    parse_rules(values, args.k)?,
                    SchemeId::random(&mut OsRng),
                )?,
                None => SchemeParams::generate(
                    args.k,
                    args.n,
                    m,
                    depth,
                    secret.rows() as u32,
                    secret.cols() as u32,
                    &mut OsRng,
                )?,
            };
            (params, generator)
        }
    };

    if params.all_rules_zero() {
        eprintln!(
            "warning: all rules are zero; the shares are periodic echoes of the initial window"
        );
    }

    let shares = scheme::split(&secret, &params, &mut generator)?;
    fs::create_dir_all(&args.output).map_err(|e| {
        CliError::input(format!("cannot create {}: {e}", args.output.display()))
    })?;

    for share in &shares {
        let slot = share.header().index - params.m();
        let path = args.output.join(format!("share_{slot}.cas"));
        write_file(&path, &share.encode())?;
        if args.verbose > 0 {
            println!("wrote {} (C^({}))", path.display(), share.header().index);
        }
        if args.also_pgm {
            let img = Image::from_matrix(share.payload(), depth)?;
            let img_path = args
                .output
                .join(format!("share_{slot}.{}", pnm::extension(depth)));
            write_file(&img_path, &pnm::encode(&img))?;
        }
    }

    let rule_values: Vec<u16> = params.rules().iter().map(|r| r.value()).collect();
    println!("scheme id: {}", params.scheme_id());
    println!("rules: {rule_values:?}");
    println!(
        "shares: {} files in {}, indices {}..={} (k={}, n={}, m={}, {}x{} at depth {})",
        shares.len(),
        args.output.display(),
        params.m(),
        params.m() + u16::from(params.n()) - 1,
        params.k(),
        params.n(),
        params.m(),
        secret.rows(),
        secret.cols(),
        depth.bits(),
    );
    Ok(())
}

fn cmd_recover(output: &Path, share_paths: &[PathBuf]) -> Result<(), CliError> {
    let mut shares = Vec::with_capacity(share_paths.len());
    for path in share_paths {
        let bytes = read_file(path)?;
        let share = Share::decode(&bytes)
            .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
        shares.push(share);
    }
    let set = validate_share_set(&shares)?;
    let alpha = set.alpha;
    let iterations = set.inverse_iterations();
    let depth = set.shares[0].header().depth;

    let secret = scheme::recover(&shares)?;
    let image = Image::from_matrix(&secret, depth)?;
    write_file(output, &pnm::encode(&image))?;

    println!(
        "recovered {} from window alpha={alpha}: {iterations} inverse iterations",
        output.display()
    );
    Ok(())
}

fn cmd_inspect(path: &Path) -> Result<(), CliError> {
    let bytes = read_file(path)?;
    let share = match Share::decode(&bytes) {
        Ok(share) => share,
        Err(ShareError::Integrity { stored, computed }) => {
            println!("file: {}", path.display());
            println!("crc: MISMATCH (stored {stored:08x}, computed {computed:08x})");
            return Err(CliError::input(format!(
                "{}: crc mismatch",
                path.display()
            )));
        }
        Err(e) => return Err(CliError::input(format!("{}: {e}", path.display()))),
    };
    let h = share.header();
    let rule_values: Vec<u16> = h.rules.iter().map(|r| r.value()).collect();
    println!("file: {}", path.display());
    println!("format: CAS1 v1");
    println!("depth: {} bits", h.depth.bits());
    println!("k: {}", h.k);
    println!("n: {}", h.n);
    println!("m: {}", h.m);
    println!("i: {} (participant {})", h.index, h.index - h.m);
    println!("size: {}x{} cells", h.rows, h.cols);
    println!("scheme id: {}", h.scheme_id);
    println!("rules: {rule_values:?}");
    println!("payload: {} bytes", bytes.len() - 37 - 2 * rule_values.len() - 12);
    println!("crc: ok");
    Ok(())
}

struct AnalyzeArgs {
    files: Vec<PathBuf>,
    census: bool,
    r: usize,
    s: usize,
    c: u64,
    k: u8,
    m: Option<u16>,
    n: Option<u8>,
    rules: Option<Vec<u16>>,
    observed: Option<usize>,
    json: bool,
}

fn cmd_analyze(args: AnalyzeArgs) -> Result<(), CliError> {
    if args.files.is_empty() && !args.census {
        return Err(CliError::input(
            "nothing to analyze: pass share files, --census, or both",
        ));
    }

    let mut json_files = Vec::new();
    for path in &args.files {
        let bytes = read_file(path)?;
        let share = Share::decode(&bytes)
            .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
        let stats = analysis::uniformity_stats(share.payload());
        if args.json {
            json_files.push(serde_json::json!({
                "file": path.display().to_string(),
                "stats": stats,
            }));
        } else {
            println!("file: {}", path.display());
            print!("{stats}");
        }
    }

    let mut json_census = None;
    if args.census {
        if !args.c.is_power_of_two() || args.c < 2 {
            return Err(CliError::input(format!(
                "census state count c must be a power of two >= 2, got {}",
                args.c
            )));
        }
        let bits = args.c.trailing_zeros() as u8;
        let k = args.k;
        let rules = match &args.rules {
            Some(values) => parse_rules(values, k)?,
            None => vec![RuleNumber::new(232).expect("232 is a valid rule"); usize::from(k.max(1)) - 1],
        };
        let params = CensusParams {
            rows: args.r,
            cols: args.s,
            bits,
            k,
            m: args.m.unwrap_or(u16::from(k)),
            n: args.n.unwrap_or(k),
            rules,
            observed: args.observed.unwrap_or(usize::from(k) - 1),
        };
        let report = analysis::perfectness_census(&params)?;
        if args.json {
            json_census = Some(serde_json::to_value(&report).expect("report serializes"));
        } else {
            println!("{report}");
        }
    }

    if args.json {
        let doc = serde_json::json!({
            "files": json_files,
            "census": json_census,
        });
        println!("{}", serde_json::to_string_pretty(&doc).expect("document serializes"));
    }
    Ok(())
}
