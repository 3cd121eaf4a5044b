//! Command-line front end for the engelnq engine.

use clap::{Parser, Subcommand, ValueEnum};
use engelnq::engelgen::{self, ExperimentCase};
use engelnq::exactalg::{self, SparseRow};
use engelnq::freelie::count_upper_bound;
use engelnq::wreath3;
use engelnq::{nqcore, Error, EngelMode, Presentation, TruncationSpec};
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

#[derive(Parser, Debug)]
#[command(name = "engelnq", version, about = "Graded nilpotent quotients of Lie rings with Engel relations")]
struct Cli {
    /// Write the report here instead of standard output.
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Human, global = true)]
    format: Format,
    /// Worker threads; falls back to ENGELNQ_THREADS, then to all cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Progress on standard error; repeat for more.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Human,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build the nilpotent quotient of a presentation file.
    Build {
        presentation: PathBuf,
        /// Also write the structure table to this file.
        #[arg(long)]
        table: Option<PathBuf>,
    },
    /// Relation matrix, Smith form and exceptional primes of a target multidegree.
    EngelPrimes {
        /// Target multidegree, e.g. 6,1,1.
        #[arg(long, value_delimiter = ',', required = true)]
        case: Vec<u32>,
        /// Also write the relation matrix to this file.
        #[arg(long)]
        matrix: Option<PathBuf>,
    },
    /// Class statistics of the 5-Engel ring over GF(p).
    GfpTable {
        /// The characteristic, a prime of at least 5.
        #[arg(long)]
        p: u64,
        /// Number of a-generators; defaults per prime.
        #[arg(long)]
        m: Option<usize>,
        /// Cap on the degree in x; defaults per prime.
        #[arg(long)]
        cap_x: Option<u32>,
        /// Defaults to multilinear, or multilinear-plus-power for p = 5.
        #[arg(long)]
        mode: Option<EngelMode>,
    },
    /// Upper bound on the dimension from the Hall-basis count.
    CountBound {
        #[arg(long, default_value_t = 6)]
        m: usize,
        #[arg(long, default_value_t = 4)]
        cap_x: u32,
    },
    /// The characteristic-3 counterexample.
    Wreath3 {
        #[command(subcommand)]
        action: WreathAction,
    },
    /// Smith normal form of a matrix in `col:coeff` row format.
    Snf {
        matrix: PathBuf,
        /// Column count; defaults to the largest column index present.
        #[arg(long)]
        columns: Option<usize>,
    },
}

#[derive(Subcommand, Debug)]
enum WreathAction {
    /// Check the three 5-Engel cases on all monomials up to a weight.
    Verify {
        #[arg(long, default_value_t = 6)]
        max_index: u32,
        #[arg(long, default_value_t = 6)]
        weight_cap: u32,
        /// Additional random pairs checked directly against [u, v, v, v, v, v].
        #[arg(long, default_value_t = 200)]
        random: usize,
    },
    /// A nonzero product of b with k elements of Id(a_1).
    Witness {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        max_index: Option<u32>,
    },
}

/// What a subcommand produced: its result tree, and whether every verified
/// property held.
struct Outcome {
    result: Value,
    ok: bool,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Engine(#[from] Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Usage(String),
}

fn read(path: &PathBuf) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.clone(),
        source,
    })
}

fn write(path: &PathBuf, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Io {
        path: path.clone(),
        source,
    })
}

fn strings<T: ToString>(v: &[T]) -> Vec<String> {
    v.iter().map(|x| x.to_string()).collect()
}

fn progress(verbose: u8) -> impl FnMut(u32, usize) {
    move |class, dim| {
        if verbose > 0 {
            eprintln!("class {class}: dimension {dim}");
        }
    }
}

fn run_build(path: &PathBuf, table: Option<&PathBuf>, verbose: u8) -> Result<Outcome, CliError> {
    let text = read(path)?;
    let pres = Presentation::parse(&text)?;
    let alg = nqcore::build_with_progress(&pres, &mut progress(verbose))?;
    if let Some(t) = table {
        write(t, &alg.export_table())?;
    }
    let mut by_weight = Map::new();
    for b in alg.basis() {
        let e = by_weight.entry(b.weight.to_string()).or_insert(json!(0));
        *e = json!(e.as_u64().unwrap() + 1);
    }
    let mut result = json!({
        "ring": pres.ring.to_string(),
        "generators": pres.generators,
        "dimension": alg.dimension(),
        "class": alg.class(),
        "dimension_by_weight": by_weight,
    });
    if pres.trunc.cap_x.is_some() {
        result["class_id_first_generator"] = json!(alg.ideal_class(0)?);
    }
    Ok(Outcome { result, ok: true })
}

fn run_engel_primes(target: &[u32], matrix: Option<&PathBuf>) -> Result<Outcome, CliError> {
    let case = ExperimentCase::lookup(target)?;
    let r = engelgen::exceptional_primes(&case)?;
    if let Some(m) = matrix {
        write(m, &r.matrix.dump())?;
    }
    let divisors = &r.snf.elementary_divisors;
    let ones = divisors.iter().take_while(|d| **d == 1u32.into()).count();
    let result = json!({
        "target": case.target.to_string(),
        "dimension": r.dimension,
        "class": r.class,
        "columns": r.matrix.num_columns(),
        "rows": r.matrix.rows.len(),
        "tuples": r.matrix.tuples,
        "rank": r.snf.rank,
        "full_rank": r.full_rank,
        "unit_divisors": ones,
        "other_divisors": strings(&divisors[ones..]),
        "primes": strings(&r.primes),
        "expected_primes": case.expected,
        "unexpected_primes": strings(&r.unexpected),
    });
    let ok = r.full_rank && (case.expected.is_empty() || r.unexpected.is_empty());
    Ok(Outcome { result, ok })
}

fn run_gfp_table(
    p: u64,
    m: Option<usize>,
    cap_x: Option<u32>,
    mode: Option<EngelMode>,
    verbose: u8,
) -> Result<Outcome, CliError> {
    let defaults = engelgen::default_caps(p);
    let (m, cap_x) = match (m, cap_x, defaults) {
        (Some(m), Some(c), _) => (m, c),
        (m, c, Some((dm, dc))) => (m.unwrap_or(dm), c.unwrap_or(dc)),
        _ => return Err(CliError::Usage(format!("no default caps for p = {p}; give --m and --cap-x"))),
    };
    let caps = TruncationSpec::new(Some(cap_x), Some(1), cap_x + m as u32)?;
    let mode = mode.unwrap_or_else(|| engelgen::engel_mode_for(p));
    let row = engelgen::gfp_table_row_with(p, m, &caps, mode, &mut progress(verbose))?;
    let reference = engelgen::reference_row(p).filter(|_| defaults == Some((m, cap_x)));
    let ok = reference.is_none_or(|r| r == row.statistics());
    let result = json!({
        "p": p,
        "m": m,
        "cap_x": cap_x,
        "mode": mode.to_string(),
        "dimension": row.dimension,
        "class_l": row.class_l,
        "class_id_x": row.class_id_x,
        "max_a": row.max_a,
        "hits_cap_x": row.hits_cap_x,
        "hits_all_a": row.hits_all_a,
        "reference": reference.map(|r| json!([r.0, r.1, r.2])),
    });
    Ok(Outcome { result, ok })
}

fn run_count_bound(m: usize, cap_x: u32) -> Result<Outcome, CliError> {
    let b = count_upper_bound(m, cap_x)?;
    let blocks: Vec<Value> = b
        .by_multidegree
        .iter()
        .map(|(d, n)| json!({"multidegree": d, "count": n}))
        .collect();
    let result = json!({"m": m, "cap_x": cap_x, "total": b.total, "blocks": blocks});
    Ok(Outcome { result, ok: true })
}

fn run_wreath3(action: &WreathAction) -> Result<Outcome, CliError> {
    match *action {
        WreathAction::Verify {
            max_index,
            weight_cap,
            random,
        } => {
            let r = wreath3::verify_engel_cases(max_index, weight_cap)?;
            let rand = wreath3::random_engel_check(max_index, weight_cap, random, 1)?;
            let ok = r.passed() && rand.is_ok();
            let result = json!({
                "max_index": max_index,
                "weight_cap": weight_cap,
                "monomials": r.monomials,
                "case1": r.case1,
                "case2": r.case2,
                "case3": r.case3,
                "instances": r.instances(),
                "counterexample": r.counterexample,
                "random_pairs": random,
                "random_failure": rand.err(),
            });
            Ok(Outcome { result, ok })
        }
        WreathAction::Witness { k, max_index } => {
            let w = wreath3::id_a1_nonnilpotence_witness(k, max_index.unwrap_or(k + 1))?;
            let (m, _) = w.c_part().iter().next().expect("witness is a monomial");
            let result = json!({
                "k": k,
                "witness": w.to_string(),
                "bracket_indices": m.bracket_indices(),
                "nonzero": !w.is_zero(),
            });
            Ok(Outcome { ok: !w.is_zero(), result })
        }
    }
}

/// Rows in `col:coeff` format with 1-based columns, one per line.
fn parse_matrix(text: &str) -> Result<(Vec<SparseRow>, usize), CliError> {
    let mut rows = Vec::new();
    let mut ncols = 0;
    for (ln, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("");
        let mut entries = Vec::new();
        for tok in line.split_whitespace() {
            let bad = || Error::Parse {
                line: ln + 1,
                column: line.find(tok).unwrap_or(0) + 1,
                message: format!("expected col:coeff, found `{tok}`"),
            };
            let (c, v) = tok.split_once(':').ok_or_else(bad)?;
            let c: usize = c.parse().map_err(|_| bad())?;
            let v: num_bigint::BigInt = v.parse().map_err(|_| bad())?;
            if c == 0 {
                return Err(bad().into());
            }
            ncols = ncols.max(c);
            entries.push(((c - 1) as u32, engelnq::Scalar::Integer(v)));
        }
        if !entries.is_empty() {
            rows.push(SparseRow::new(entries)?);
        }
    }
    Ok((rows, ncols))
}

fn run_snf(path: &PathBuf, columns: Option<usize>) -> Result<Outcome, CliError> {
    let (rows, found) = parse_matrix(&read(path)?)?;
    let n = columns.unwrap_or(found);
    if n < found {
        return Err(CliError::Usage(format!("--columns {n} is below the largest column {found}")));
    }
    let snf = exactalg::smith_normal_form(&rows, n)?;
    let primes = exactalg::prime_support(&snf);
    let result = json!({
        "rows": rows.len(),
        "columns": n,
        "rank": snf.rank,
        "divisors": strings(&snf.elementary_divisors),
        "primes": strings(&primes),
    });
    Ok(Outcome { result, ok: true })
}

fn input_digest(cli: &Cli) -> Result<String, CliError> {
    let mut h = Sha256::new();
    h.update(format!("{:?}", cli.command).as_bytes());
    match &cli.command {
        Command::Build { presentation, .. } => h.update(read(presentation)?.as_bytes()),
        Command::Snf { matrix, .. } => h.update(read(matrix)?.as_bytes()),
        _ => {}
    }
    Ok(hex::encode(h.finalize()))
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Build { .. } => "build",
        Command::EngelPrimes { .. } => "engel-primes",
        Command::GfpTable { .. } => "gfp-table",
        Command::CountBound { .. } => "count-bound",
        Command::Wreath3 { .. } => "wreath3",
        Command::Snf { .. } => "snf",
    }
}

fn human(v: &Value, indent: usize, out: &mut String) {
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                match x {
                    Value::Object(_) => {
                        out.push_str(&format!("{:indent$}{k}:\n", ""));
                        human(x, indent + 2, out);
                    }
                    Value::Array(a) if a.iter().any(|e| e.is_object()) => {
                        out.push_str(&format!("{:indent$}{k}:\n", ""));
                        for e in a {
                            out.push_str(&format!("{:indent$}  -\n", ""));
                            human(e, indent + 4, out);
                        }
                    }
                    _ => out.push_str(&format!("{:indent$}{k}: {}\n", "", scalar(x))),
                }
            }
        }
        _ => out.push_str(&format!("{:indent$}{}\n", "", scalar(v))),
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Array(a) => strings(&a.iter().map(scalar).collect::<Vec<_>>()).join(" "),
        Value::Null => "-".into(),
        other => other.to_string(),
    }
}

fn threads(flag: Option<usize>) -> Result<Option<usize>, CliError> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var("ENGELNQ_THREADS") {
        Ok(s) => s
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| CliError::Usage(format!("ENGELNQ_THREADS must be a positive integer, got `{s}`"))),
        Err(_) => Ok(None),
    }
}

fn run(cli: &Cli) -> Result<Outcome, CliError> {
    if let Some(n) = threads(cli.threads)? {
        if n == 0 {
            return Err(CliError::Usage("thread count must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    match &cli.command {
        Command::Build { presentation, table } => run_build(presentation, table.as_ref(), cli.verbose),
        Command::EngelPrimes { case, matrix } => run_engel_primes(case, matrix.as_ref()),
        Command::GfpTable { p, m, cap_x, mode } => run_gfp_table(*p, *m, *cap_x, *mode, cli.verbose),
        Command::CountBound { m, cap_x } => run_count_bound(*m, *cap_x),
        Command::Wreath3 { action } => run_wreath3(action),
        Command::Snf { matrix, columns } => run_snf(matrix, *columns),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let started = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
    let clock = Instant::now();
    let outcome = input_digest(&cli).and_then(|digest| run(&cli).map(|o| (digest, o)));
    let (digest, outcome) = match outcome {
        Ok(x) => x,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let report = json!({
        "tool": {"name": "engelnq", "version": env!("CARGO_PKG_VERSION")},
        "command": command_name(&cli.command),
        "input_sha256": digest,
        "status": if outcome.ok { "ok" } else { "property-failed" },
        "result": outcome.result,
        "timestamp": {"started_unix": started, "wall_seconds": clock.elapsed().as_secs_f64()},
    });
    let text = match cli.format {
        Format::Json => serde_json::to_string_pretty(&report).expect("report serializes") + "\n",
        Format::Human => {
            let mut s = String::new();
            human(&report, 0, &mut s);
            s
        }
    };
    match &cli.output {
        Some(path) => {
            if let Err(e) = write(path, &text) {
                eprintln!("error: {e}");
                return ExitCode::from(1);
            }
        }
        None => print!("{text}"),
    }
    if outcome.ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}
