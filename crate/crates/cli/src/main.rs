//! genusforge: enumerate genera of integral quadratic lattices, build
//! verified Gram-matrix representatives, compute maximal overlattices and
//! symbol-counting reports.

use std::io::Write;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;

use genusforge::construct::{
    maximal_overlattice, representative_with_options, MaximalityCertificate, MaximalityWitness,
};
use genusforge::count::CountReport;
use genusforge::error::Error;
use genusforge::exactla::RationalMatrix;
use genusforge::genus::{enumerate, symbol_of, EnumerateOptions, GenusSymbol, Parity};
use genusforge::lattice::Lattice;

/// Default seed, published so default runs are reproducible everywhere.
const DEFAULT_SEED: u64 = 0x67656E7573_u64;

#[derive(Parser)]
#[command(name = "genusforge", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate all genera of a given rank and determinant (or a sweep).
    Enumerate(EnumerateArgs),
    /// Print the genus symbol of a Gram matrix read from a JSON file.
    Symbol {
        /// JSON file with {"gram": [[..]]} or a serialized lattice
        gram_file: String,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Construct a verified representative of a genus symbol.
    Representative {
        /// symbol text, e.g. 'sig(2,0); 2:[0^+2_2:I]'
        symbol: String,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        no_verify: bool,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Compute an integral maximal overlattice with certificates.
    Maximal {
        gram_file: String,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Counting report rows for local symbols.
    Count(CountArgs),
}

#[derive(Args)]
struct EnumerateArgs {
    #[arg(long)]
    rank: u32,
    #[arg(long, conflicts_with = "max_det")]
    det: Option<u64>,
    #[arg(long)]
    max_det: Option<u64>,
    #[arg(long, conflicts_with = "odd")]
    even: bool,
    #[arg(long)]
    odd: bool,
    /// fixed signature "a,b"
    #[arg(long)]
    signature: Option<String>,
    #[arg(long)]
    with_representatives: bool,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    no_verify: bool,
    /// worker threads for representative construction
    #[arg(long, default_value = "1")]
    jobs: usize,
}

#[derive(Args)]
struct CountArgs {
    #[arg(long)]
    rank: u32,
    /// full determinant: one row per prime dividing 2*det
    #[arg(long, conflicts_with_all = ["prime", "k_max"])]
    det: Option<u64>,
    /// single prime for a k-range sweep
    #[arg(long, requires = "k_max")]
    prime: Option<u64>,
    #[arg(long)]
    k_max: Option<u32>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Parse { .. } | Error::BadArgument(_) => 2,
                Error::Verify(_) => 3,
                Error::ResourceLimit(_) => 4,
                _ => 1,
            })
        }
    }
}

fn seed_from(flag: Option<u64>) -> u64 {
    flag.or_else(|| {
        std::env::var("GENUSFORGE_SEED")
            .ok()
            .and_then(|s| s.parse().ok())
    })
    .unwrap_or(DEFAULT_SEED)
}

/// Stable per-job seed derived from the run seed and the job identity.
fn job_seed(seed: u64, text: &str) -> u64 {
    let mut h = 0xcbf29ce484222325u64;
    for b in text.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x100000001b3);
    }
    seed ^ h
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Enumerate(args) => cmd_enumerate(args),
        Command::Symbol { gram_file, format } => cmd_symbol(&gram_file, format),
        Command::Representative { symbol, seed, no_verify, format } => {
            cmd_representative(&symbol, seed_from(seed), !no_verify, format)
        }
        Command::Maximal { gram_file, seed, format } => {
            cmd_maximal(&gram_file, seed_from(seed), format)
        }
        Command::Count(args) => cmd_count(args),
    }
}

fn parse_signature(s: &str) -> Result<(u32, u32), Error> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| Error::BadArgument("signature must be 'a,b'".into()))?;
    let pa = a.trim().parse().map_err(|_| Error::BadArgument("bad signature".into()))?;
    let pb = b.trim().parse().map_err(|_| Error::BadArgument("bad signature".into()))?;
    Ok((pa, pb))
}

fn read_gram_file(path: &str) -> Result<Lattice, Error> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::BadArgument(format!("cannot read {path}: {e}")))?;
    let v: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| Error::Parse { pos: 0, msg: format!("bad JSON: {e}") })?;
    if v.get("basis").is_some() {
        return Lattice::from_json(&v);
    }
    let rows = v
        .get("gram")
        .and_then(|g| g.as_array())
        .ok_or_else(|| Error::Parse { pos: 0, msg: "expected a 'gram' array".into() })?;
    let n = rows.len();
    let mut m = RationalMatrix::zero(n, n);
    for (i, row) in rows.iter().enumerate() {
        let row = row
            .as_array()
            .ok_or_else(|| Error::Parse { pos: 0, msg: "gram rows must be arrays".into() })?;
        if row.len() != n {
            return Err(Error::Parse { pos: 0, msg: "gram must be square".into() });
        }
        for (j, e) in row.iter().enumerate() {
            let x: BigInt = match e {
                serde_json::Value::Number(n) => n
                    .as_i64()
                    .map(BigInt::from)
                    .ok_or_else(|| Error::Parse { pos: 0, msg: "non-integer gram entry".into() })?,
                serde_json::Value::String(s) => s
                    .parse()
                    .map_err(|_| Error::Parse { pos: 0, msg: "bad gram entry".into() })?,
                _ => {
                    return Err(Error::Parse { pos: 0, msg: "gram entries must be integers".into() })
                }
            };
            m[(i, j)] = genusforge::BigRational::from(x);
        }
    }
    Lattice::from_gram(m)
}

fn gram_json(l: &Lattice) -> serde_json::Value {
    let g = l.gram();
    let rows: Vec<serde_json::Value> = (0..g.rows)
        .map(|i| {
            serde_json::Value::Array(
                (0..g.cols)
                    .map(|j| {
                        serde_json::Value::String(g[(i, j)].to_integer().to_string())
                    })
                    .collect(),
            )
        })
        .collect();
    serde_json::Value::Array(rows)
}

struct SweepRecord {
    d: BigInt,
    symbol: GenusSymbol,
    gram: Option<serde_json::Value>,
    verified: Option<bool>,
    error: Option<Error>,
}

impl SweepRecord {
    fn render(&self, format: Format) -> String {
        match format {
            Format::Text => {
                let mut s = format!("d={} {}", self.d, self.symbol.format());
                if let Some(g) = &self.gram {
                    s.push_str(&format!(" gram={g}"));
                }
                if let Some(v) = self.verified {
                    s.push_str(&format!(" verified={v}"));
                }
                if let Some(e) = &self.error {
                    s.push_str(&format!(" error=\"{e}\""));
                }
                s
            }
            Format::Json => {
                let mut obj = serde_json::json!({
                    "d": self.d.to_string(),
                    "symbol": self.symbol.format(),
                    "data": self.symbol.to_json(),
                });
                if let Some(g) = &self.gram {
                    obj["gram"] = g.clone();
                }
                if let Some(v) = self.verified {
                    obj["verified"] = serde_json::Value::Bool(v);
                }
                if let Some(e) = &self.error {
                    obj["error"] = serde_json::Value::String(e.to_string());
                }
                obj.to_string()
            }
            Format::Csv => {
                let gram = self
                    .gram
                    .as_ref()
                    .map(|g| g.to_string().replace('"', "'"))
                    .unwrap_or_default();
                format!(
                    "{},\"{}\",\"{}\",{},\"{}\"",
                    self.d,
                    self.symbol.format(),
                    gram,
                    self.verified.map(|v| v.to_string()).unwrap_or_default(),
                    self.error.as_ref().map(|e| e.to_string()).unwrap_or_default()
                )
            }
        }
    }
}

fn cmd_enumerate(args: EnumerateArgs) -> Result<ExitCode, Error> {
    let parity = if args.even {
        Parity::Even
    } else if args.odd {
        Parity::Odd
    } else {
        Parity::Any
    };
    let signature = args.signature.as_deref().map(parse_signature).transpose()?;
    let opts = EnumerateOptions { signature, parity };
    let (d_lo, d_hi) = match (args.det, args.max_det) {
        (Some(d), None) => (d, d),
        (None, Some(m)) => (1, m),
        (None, None) => return Err(Error::BadArgument("need --det or --max-det".into())),
        _ => unreachable!("clap conflicts"),
    };
    if d_lo < 1 {
        return Err(Error::BadArgument("determinant must be at least 1".into()));
    }
    let seed = seed_from(args.seed);
    let verify = !args.no_verify;
    let jobs = args.jobs.max(1);
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    if matches!(args.format, Format::Csv) {
        let _ = writeln!(out, "d,symbol,gram,verified,error");
    }
    let mut any_verify_fail = false;
    let mut any_resource = false;

    let ds: Vec<u64> = (d_lo..=d_hi).collect();
    for chunk in ds.chunks(jobs.max(1) * 4) {
        // enumerate per d, then build representatives in a worker pool
        let mut per_d: Vec<(BigInt, Vec<GenusSymbol>)> = Vec::new();
        for &d in chunk {
            let db = BigInt::from(d);
            per_d.push((db.clone(), enumerate(args.rank, &db, &opts)?));
        }
        let tasks: Vec<(usize, BigInt, GenusSymbol)> = per_d
            .iter()
            .flat_map(|(d, symbols)| {
                symbols.iter().map(move |s| (0usize, d.clone(), s.clone()))
            })
            .enumerate()
            .map(|(i, (_, d, s))| (i, d, s))
            .collect();
        let mut results: Vec<Option<SweepRecord>> = (0..tasks.len()).map(|_| None).collect();
        if args.with_representatives {
            let shared = std::sync::Mutex::new(&mut results);
            let counter = std::sync::atomic::AtomicUsize::new(0);
            std::thread::scope(|scope| {
                for _ in 0..jobs {
                    scope.spawn(|| loop {
                        let i = counter.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
                        if i >= tasks.len() {
                            break;
                        }
                        let (_, d, symbol) = &tasks[i];
                        let js = job_seed(seed, &format!("{d}:{}", symbol.format()));
                        let rec = match representative_with_options(symbol, js, verify) {
                            Ok(l) => SweepRecord {
                                d: d.clone(),
                                symbol: symbol.clone(),
                                gram: Some(gram_json(&l)),
                                verified: Some(verify),
                                error: None,
                            },
                            Err(e) => SweepRecord {
                                d: d.clone(),
                                symbol: symbol.clone(),
                                gram: None,
                                verified: Some(false),
                                error: Some(e),
                            },
                        };
                        shared.lock().unwrap()[i] = Some(rec);
                    });
                }
            });
        } else {
            for (i, (_, d, symbol)) in tasks.iter().enumerate() {
                results[i] = Some(SweepRecord {
                    d: d.clone(),
                    symbol: symbol.clone(),
                    gram: None,
                    verified: None,
                    error: None,
                });
            }
        }
        for rec in results.into_iter().flatten() {
            match &rec.error {
                Some(Error::ResourceLimit(_)) => any_resource = true,
                Some(_) => any_verify_fail = true,
                None => {}
            }
            let _ = writeln!(out, "{}", rec.render(args.format));
        }
    }
    Ok(if any_verify_fail {
        ExitCode::from(3)
    } else if any_resource {
        ExitCode::from(4)
    } else {
        ExitCode::SUCCESS
    })
}

fn cmd_symbol(path: &str, format: Format) -> Result<ExitCode, Error> {
    let l = read_gram_file(path)?;
    let s = symbol_of(&l)?;
    match format {
        Format::Json => println!(
            "{}",
            serde_json::json!({"symbol": s.format(), "data": s.to_json()})
        ),
        _ => println!("{}", s.format()),
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_representative(
    text: &str,
    seed: u64,
    verify: bool,
    format: Format,
) -> Result<ExitCode, Error> {
    let g = GenusSymbol::parse(text)?;
    let l = representative_with_options(&g, seed, verify)?;
    match format {
        Format::Text => println!("{}", l.gram()),
        _ => println!(
            "{}",
            serde_json::json!({
                "symbol": g.format(),
                "gram": gram_json(&l),
                "verified": verify,
            })
        ),
    }
    Ok(ExitCode::SUCCESS)
}

fn certificate_json(c: &MaximalityCertificate) -> serde_json::Value {
    serde_json::json!({
        "prime": c.prime.to_string(),
        "group_size": c.group_size.to_string(),
        "witness": match &c.witness {
            MaximalityWitness::DimensionAtMostOne => "dimension ≤ 1".to_string(),
            MaximalityWitness::BinaryNonResidue => "binary non-residue case".to_string(),
            MaximalityWitness::NoIsotropicVector { exhaustive } => {
                format!("no isotropic vector (exhaustive={exhaustive})")
            }
        },
    })
}

fn cmd_maximal(path: &str, seed: u64, format: Format) -> Result<ExitCode, Error> {
    let l = read_gram_file(path)?;
    let (m, certs) = maximal_overlattice(&l, seed, &[])?;
    let certs_json: Vec<serde_json::Value> = certs.iter().map(certificate_json).collect();
    match format {
        Format::Text => {
            println!("{}", m.gram());
            for c in certs_json {
                println!("certificate: {c}");
            }
        }
        _ => println!(
            "{}",
            serde_json::json!({"gram": gram_json(&m), "certificates": certs_json})
        ),
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_count(args: CountArgs) -> Result<ExitCode, Error> {
    let mut rows = Vec::new();
    if let Some(d) = args.det {
        let db = BigInt::from(d.max(1));
        let fac = genusforge::arith::factorize(&db)?;
        let mut primes: Vec<BigInt> = fac.primes().cloned().collect();
        let two = BigInt::from(2u8);
        if !primes.contains(&two) {
            primes.insert(0, two);
        }
        for p in primes {
            let k = fac.valuation(&p);
            rows.push(CountReport::build(args.rank, &p, k)?);
        }
    } else if let (Some(p), Some(k_max)) = (args.prime, args.k_max) {
        let pb = BigInt::from(p);
        for k in 0..=k_max {
            rows.push(CountReport::build(args.rank, &pb, k)?);
        }
    } else {
        return Err(Error::BadArgument("count needs --det or --prime with --k-max".into()));
    }
    match args.format {
        Format::Json => {
            for r in rows {
                println!("{}", r.to_json());
            }
        }
        _ => {
            println!("{}", CountReport::csv_header());
            for r in rows {
                println!("{}", r.to_csv());
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}
