//! Command-line frontend: single values, weight tables, double tails,
//! relation reports and a benchmark harness, with certified digits
//! throughout and an optional JSON-lines result cache.

mod cache;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use mzv::fixnum::{ratio_to_sci, to_decimal, FixnumError};
use mzv::series::SeriesError;
use mzv::tails::TailError;
use mzv::words::{Composition, Word, WordError};
use mzv::{dp, relations, series, tails};

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(name = "mzv", version, about = "Multiple zeta values with certified error bounds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Algorithm {
    /// descending diagonal recurrence over the subword closure
    Dp,
    /// accelerated central-binomial series
    Series,
    /// polylog-at-1/2 splitting (reference baseline)
    Baseline,
}

impl Algorithm {
    fn name(self) -> &'static str {
        match self {
            Algorithm::Dp => "dp",
            Algorithm::Series => "series",
            Algorithm::Baseline => "baseline",
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Compute one multiple zeta value
    Zeta {
        /// composition "(3,1)" or binary word "0011"
        target: String,
        #[arg(long, default_value_t = 30)]
        digits: u32,
        #[arg(long, value_enum, default_value_t = Algorithm::Series)]
        algorithm: Algorithm,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        /// JSON-lines result cache
        #[arg(long)]
        cache: Option<PathBuf>,
        /// iteration-count override (dp only)
        #[arg(long)]
        n_max: Option<u64>,
    },
    /// Compute every MZV of weight at most k in one recurrence run
    Table {
        weight: usize,
        #[arg(long, default_value_t = 30)]
        digits: u32,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[arg(long)]
        cache: Option<PathBuf>,
    },
    /// Compute one double tail zeta(w)_{m,n}
    Tails {
        word: String,
        m: u64,
        n: u64,
        #[arg(long, default_value_t = 20)]
        digits: u32,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Recurrence matrix, rank, kernel and bridge of one weight class
    Relations {
        weight: u32,
        /// numerically certify each kernel vector's vanishing
        #[arg(long)]
        certify: bool,
        /// digits for the certification run
        #[arg(long, default_value_t = 30)]
        digits: u32,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Wall-clock and step-count comparison across algorithms
    Bench {
        /// run the table computation for this weight (dp)
        #[arg(long)]
        weight: Option<usize>,
        /// run single-value algorithms on this target
        #[arg(long)]
        target: Option<String>,
        #[arg(long, default_value_t = 100)]
        digits: u32,
        #[arg(long, value_enum, value_delimiter = ',', default_values_t = vec![Algorithm::Series, Algorithm::Baseline])]
        algorithms: Vec<Algorithm>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

/// One computed value; also the cache line format.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct ResultRecord {
    pub composition: String,
    pub word: String,
    pub weight: u64,
    pub depth: usize,
    pub digits: u32,
    pub value: String,
    pub algorithm: String,
    pub n_iterations: u64,
    pub certified_error: String,
    pub wall_ms: u64,
    pub version: String,
}

enum AppError {
    Parse(String),
    Precondition(String),
}

impl AppError {
    fn code(&self) -> u8 {
        match self {
            AppError::Parse(_) => 1,
            AppError::Precondition(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            AppError::Parse(m) | AppError::Precondition(m) => m,
        }
    }
}

impl From<WordError> for AppError {
    fn from(e: WordError) -> Self {
        AppError::Parse(e.to_string())
    }
}

impl From<TailError> for AppError {
    fn from(e: TailError) -> Self {
        match e {
            TailError::NotAdmissible => AppError::Parse(e.to_string()),
            other => AppError::Precondition(other.to_string()),
        }
    }
}

impl From<SeriesError> for AppError {
    fn from(e: SeriesError) -> Self {
        match e {
            SeriesError::NotAdmissible => AppError::Parse(e.to_string()),
            SeriesError::Tail(t) => t.into(),
            other => AppError::Precondition(other.to_string()),
        }
    }
}

impl From<dp::DpError> for AppError {
    fn from(e: dp::DpError) -> Self {
        match e {
            dp::DpError::NotAdmissible(_) | dp::DpError::EmptyPlan => AppError::Parse(e.to_string()),
            other => AppError::Precondition(other.to_string()),
        }
    }
}

impl From<FixnumError> for AppError {
    fn from(e: FixnumError) -> Self {
        AppError::Precondition(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

fn run(cli: Cli) -> Result<(), AppError> {
    match cli.command {
        Command::Zeta { target, digits, algorithm, format, cache, n_max } => {
            cmd_zeta(&target, digits, algorithm, format, cache.as_deref(), n_max)
        }
        Command::Table { weight, digits, format, cache } => {
            cmd_table(weight, digits, format, cache.as_deref())
        }
        Command::Tails { word, m, n, digits, format } => cmd_tails(&word, m, n, digits, format),
        Command::Relations { weight, certify, digits, format } => {
            cmd_relations(weight, certify, digits, format)
        }
        Command::Bench { weight, target, digits, algorithms, format } => {
            cmd_bench(weight, target.as_deref(), digits, &algorithms, format)
        }
    }
}

/// Accepts "(3,1)" or "0011"; must name a non-empty admissible composition.
fn parse_target(s: &str) -> Result<(Composition, Word), AppError> {
    let t = s.trim();
    let comp: Composition = if t.starts_with('(') {
        t.parse()?
    } else {
        let word: Word = t.parse()?;
        word.to_composition()?
    };
    if comp.is_empty() || !comp.is_admissible() {
        return Err(AppError::Parse(format!(
            "{} is not admissible: the first part a_1 must be >= 2",
            comp
        )));
    }
    Ok((comp.clone(), comp.to_word()))
}

fn compute_zeta(
    comp: &Composition,
    word: &Word,
    digits: u32,
    algorithm: Algorithm,
    n_max: Option<u64>,
) -> Result<ResultRecord, AppError> {
    let start = Instant::now();
    let (value, error, iterations): (String, BigRational, u64) = match algorithm {
        Algorithm::Dp => {
            let mut plan = dp::DpPlan::for_words(std::slice::from_ref(word), digits)?;
            if let Some(n) = n_max {
                plan.override_iterations(n);
            }
            let res = dp::run(&plan);
            let total = res.total_error();
            let v = res.value(word).expect("plan contains the target");
            (to_decimal(v, digits, &total)?, total, res.n_iters)
        }
        Algorithm::Series => {
            let v = series::zeta_series(comp, digits)?;
            (to_decimal(&v.value, digits, &v.error)?, v.error, v.outer_terms)
        }
        Algorithm::Baseline => {
            let v = series::baseline_chasles(comp, digits)?;
            (to_decimal(&v.value, digits, &v.error)?, v.error, v.outer_terms)
        }
    };
    Ok(ResultRecord {
        composition: comp.to_string(),
        word: word.to_string(),
        weight: comp.weight(),
        depth: comp.depth(),
        digits,
        value,
        algorithm: algorithm.name().to_string(),
        n_iterations: iterations,
        certified_error: ratio_to_sci(&error, 3),
        wall_ms: start.elapsed().as_millis() as u64,
        version: VERSION.to_string(),
    })
}

fn print_record(rec: &ResultRecord, format: Format) {
    match format {
        Format::Json => println!("{}", serde_json::to_string(rec).expect("serializes")),
        Format::Text => {
            println!("zeta{} = {}", rec.composition, rec.value);
            println!(
                "  word {}  weight {}  depth {}  algorithm {}  N = {}  certified error <= {}  wall {} ms",
                rec.word,
                rec.weight,
                rec.depth,
                rec.algorithm,
                rec.n_iterations,
                rec.certified_error,
                rec.wall_ms
            );
        }
    }
}

fn cmd_zeta(
    target: &str,
    digits: u32,
    algorithm: Algorithm,
    format: Format,
    cache_path: Option<&std::path::Path>,
    n_max: Option<u64>,
) -> Result<(), AppError> {
    let (comp, word) = parse_target(target)?;
    if let Some(path) = cache_path {
        if let Some(rec) = cache::lookup(path, &comp.to_string(), digits, algorithm.name(), VERSION) {
            if matches!(format, Format::Text) {
                eprintln!("(cache hit)");
            }
            print_record(&rec, format);
            return Ok(());
        }
    }
    let rec = compute_zeta(&comp, &word, digits, algorithm, n_max)?;
    if let Some(path) = cache_path {
        cache::append(path, &rec)
            .map_err(|e| AppError::Precondition(format!("cache write failed: {}", e)))?;
    }
    print_record(&rec, format);
    Ok(())
}

fn cmd_table(
    weight: usize,
    digits: u32,
    format: Format,
    cache_path: Option<&std::path::Path>,
) -> Result<(), AppError> {
    if weight < 2 {
        return Err(AppError::Parse("table weight must be at least 2".into()));
    }
    let start = Instant::now();
    let plan = dp::DpPlan::for_weight(weight, digits)?;
    let res = dp::run(&plan);
    let total = res.total_error();
    let wall = start.elapsed().as_millis() as u64;
    for (w, v) in res.words.iter().zip(&res.values) {
        let comp = w.to_composition().expect("admissible");
        let rec = ResultRecord {
            composition: comp.to_string(),
            word: w.to_string(),
            weight: comp.weight(),
            depth: comp.depth(),
            digits,
            value: to_decimal(v, digits, &total)?,
            algorithm: "dp".into(),
            n_iterations: res.n_iters,
            certified_error: ratio_to_sci(&total, 3),
            wall_ms: wall,
            version: VERSION.to_string(),
        };
        match format {
            Format::Json => println!("{}", serde_json::to_string(&rec).expect("serializes")),
            Format::Text => println!("{:<16} {}", rec.composition, rec.value),
        }
        if let Some(path) = cache_path {
            cache::append(path, &rec)
                .map_err(|e| AppError::Precondition(format!("cache write failed: {}", e)))?;
        }
    }
    if matches!(format, Format::Text) {
        eprintln!(
            "({} values, N = {}, certified error <= {}, {} ms)",
            res.words.len(),
            res.n_iters,
            ratio_to_sci(&total, 3),
            wall
        );
    }
    Ok(())
}

fn cmd_tails(word: &str, m: u64, n: u64, digits: u32, format: Format) -> Result<(), AppError> {
    let word: Word = word.parse()?;
    if word.is_empty() {
        return Err(AppError::Parse("the word must be non-empty".into()));
    }
    if !tails::index_valid(&word, m, n) {
        return Err(AppError::Precondition(format!(
            "(m={}, n={}) is invalid for {}: m >= 1 is needed when the word starts with 1, n >= 1 when it ends with 0",
            m, n, word
        )));
    }
    let start = Instant::now();
    let v = series::tail_value(&word, m, n, digits)?;
    let value = to_decimal(&v.value, digits, &v.error)?;
    let wall = start.elapsed().as_millis() as u64;

    // attach the slow independent oracle when it is cheap enough to be useful
    let oracle_target = BigRational::new(1.into(), mzv::fixnum::pow10(12).into());
    let oracle = tails::eval_tail(&word, m, n, &oracle_target)
        .ok()
        .filter(|c| c.error < BigRational::new(1.into(), mzv::fixnum::pow10(6).into()));

    match format {
        Format::Json => {
            let json = serde_json::json!({
                "word": word.to_string(),
                "m": m,
                "n": n,
                "digits": digits,
                "value": value,
                "certified_error": ratio_to_sci(&v.error, 3),
                "outer_terms": v.outer_terms,
                "wall_ms": wall,
                "oracle": oracle.map(|c| serde_json::json!({
                    "value": ratio_to_sci(&c.value, 15),
                    "certified_error": ratio_to_sci(&c.error, 3),
                })),
            });
            println!("{}", json);
        }
        Format::Text => {
            println!("zeta({})_{{{},{}}} = {}", word, m, n, value);
            println!(
                "  certified error <= {}  outer terms {}  wall {} ms",
                ratio_to_sci(&v.error, 3),
                v.outer_terms,
                wall
            );
            if let Some(c) = oracle {
                println!(
                    "  oracle cross-check: {} (error <= {})",
                    ratio_to_sci(&c.value, 15),
                    ratio_to_sci(&c.error, 3)
                );
            }
        }
    }
    Ok(())
}

fn bridge_identity(b: &relations::BridgeResult, labels: &[String]) -> String {
    let terms: Vec<String> = b
        .combination
        .iter()
        .zip(labels)
        .filter(|(c, _)| !num_traits::Zero::is_zero(*c))
        .map(|(c, l)| format!("{:+} zeta{}", c, l))
        .collect();
    format!(
        "{} sum_n n^-{} C(2n,n)^-1 = {}",
        b.constant,
        b.weight,
        terms.join(" ")
    )
}

fn cmd_relations(weight: u32, certify: bool, digits: u32, format: Format) -> Result<(), AppError> {
    if weight < 2 {
        return Err(AppError::Parse("weight must be at least 2".into()));
    }
    let a = relations::build_matrix(weight);
    let kr = relations::kernel(weight);
    let bridge = relations::bridge(weight);
    let labels = a.row_labels();

    let certs: Vec<relations::CertifyReport> = if certify {
        kr.basis
            .iter()
            .map(|l| relations::certify_vanishing(l, weight, 5, digits))
            .collect::<Result<_, _>>()?
    } else {
        Vec::new()
    };

    match format {
        Format::Json => {
            let json = serde_json::json!({
                "weight": weight,
                "matrix": a.to_json(),
                "rank": kr.rank,
                "d_k": kr.d_k,
                "kernel": kr.basis.iter().map(|l| l.iter().map(|x| x.to_string()).collect::<Vec<_>>()).collect::<Vec<_>>(),
                "bridge": bridge.as_ref().map(|b| serde_json::json!({
                    "combination": b.combination.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
                    "constant": b.constant.to_string(),
                    "identity": bridge_identity(b, &labels),
                })),
                "certification": certs.iter().map(|c| serde_json::json!({
                    "max_residual": ratio_to_sci(&c.max_residual(), 3),
                    "passes": c.passes(),
                })).collect::<Vec<_>>(),
            });
            println!("{}", json);
        }
        Format::Text => {
            println!("weight {}: {} representatives", weight, a.rows());
            print!("{}", a);
            println!("rank(A) = {}   d_{} = {}", kr.rank, weight, kr.d_k);
            if kr.basis.is_empty() {
                println!("kernel: trivial");
            } else {
                println!("kernel basis (over the rows above):");
                for l in &kr.basis {
                    let parts: Vec<String> = l.iter().map(|x| x.to_string()).collect();
                    println!("  ({})", parts.join(", "));
                }
            }
            match &bridge {
                Some(b) => {
                    let parts: Vec<String> = b.combination.iter().map(|x| x.to_string()).collect();
                    println!("bridge: L = ({}), c = {}", parts.join(", "), b.constant);
                    println!("  {}", bridge_identity(b, &labels));
                }
                None => println!("bridge: none (the empty column lies in the span of the others)"),
            }
            for (l, c) in kr.basis.iter().zip(&certs) {
                let parts: Vec<String> = l.iter().map(|x| x.to_string()).collect();
                println!(
                    "certify ({}): max residual {} over n <= 5 at {} digits -> {}",
                    parts.join(", "),
                    ratio_to_sci(&c.max_residual(), 3),
                    digits,
                    if c.passes() { "PASS" } else { "FAIL" }
                );
            }
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct BenchRow {
    task: String,
    algorithm: String,
    digits: u32,
    steps: u64,
    wall_ms: u64,
    value_prefix: String,
    certified_error: String,
}

fn cmd_bench(
    weight: Option<usize>,
    target: Option<&str>,
    digits: u32,
    algorithms: &[Algorithm],
    format: Format,
) -> Result<(), AppError> {
    if weight.is_none() && target.is_none() {
        return Err(AppError::Parse("bench needs --weight and/or --target".into()));
    }
    let mut rows: Vec<BenchRow> = Vec::new();

    if let Some(k) = weight {
        let start = Instant::now();
        let plan = dp::DpPlan::for_weight(k, digits)?;
        let res = dp::run(&plan);
        let total = res.total_error();
        let sample = to_decimal(&res.values[0], digits, &total)?;
        rows.push(BenchRow {
            task: format!("table weight<={}", k),
            algorithm: "dp".into(),
            digits,
            steps: res.n_iters,
            wall_ms: start.elapsed().as_millis() as u64,
            value_prefix: sample.chars().take(14).collect(),
            certified_error: ratio_to_sci(&total, 3),
        });
    }

    if let Some(t) = target {
        let (comp, word) = parse_target(t)?;
        for &alg in algorithms {
            let rec = compute_zeta(&comp, &word, digits, alg, None)?;
            rows.push(BenchRow {
                task: format!("zeta{}", comp),
                algorithm: alg.name().into(),
                digits,
                steps: rec.n_iterations,
                wall_ms: rec.wall_ms,
                value_prefix: rec.value.chars().take(14).collect(),
                certified_error: rec.certified_error,
            });
        }
    }

    match format {
        Format::Json => println!("{}", serde_json::to_string(&rows).expect("serializes")),
        Format::Text => {
            println!(
                "{:<20} {:<9} {:>7} {:>9} {:>10}  {:<14} {}",
                "task", "algo", "digits", "steps", "wall_ms", "value", "error"
            );
            for r in &rows {
                println!(
                    "{:<20} {:<9} {:>7} {:>9} {:>10}  {:<14} {}",
                    r.task, r.algorithm, r.digits, r.steps, r.wall_ms, r.value_prefix, r.certified_error
                );
            }
            let steps: std::collections::HashMap<&str, u64> =
                rows.iter().map(|r| (r.algorithm.as_str(), r.steps)).collect();
            if let (Some(&s), Some(&b)) = (steps.get("series"), steps.get("baseline")) {
                println!("step-count ratio series/baseline = {:.3}", s as f64 / b as f64);
            }
        }
    }
    Ok(())
}
