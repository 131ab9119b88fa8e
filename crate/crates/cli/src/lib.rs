//! Command-line front end for the `primcount` library.

use std::io::Write;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use primcount::budget::WorkBudget;
use primcount::charsum::{CharTable, JacobiMagnitude, MulCharacter};
use primcount::count::{
    count_points, count_primitive_brute, primitive_main_term, primitive_via_moebius, CountReport,
};
use primcount::error::{Error, Result};
use primcount::fermat::{
    dwork_bound_check, primitive_count_fermat_charsum, primitive_count_fermat_exact, sieve_criterion_sides,
    sieve_delta, sieve_lower_bound_check, sphere_scan, sphere_sufficiency_sides, sufficiency_threshold,
    superelliptic_bound, theorem2_check, SieveConfig,
};
use primcount::field::{FieldCtx, FqElem};
use primcount::hyperplane::primitive_count_hyperplane_exact;
use primcount::poly::{parse_poly, FermatShape, MultiPoly};
use serde_json::{json, Value};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_VERIFY: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "primcount", version, about = "Primitive points on hypersurfaces over finite fields")]
struct Cli {
    /// Work budget in elementary operations (overrides PRIMCOUNT_WORK_BUDGET).
    #[arg(long, global = true)]
    budget: Option<u128>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Field construction details.
    Field {
        #[command(subcommand)]
        what: FieldCmd,
    },
    /// Primitive point count of a polynomial.
    Count(CountArgs),
    /// Compare a count with one of the analytic bounds.
    Bound {
        #[command(subcommand)]
        which: BoundCmd,
    },
    /// Primitive points on a hyperplane over a Fermat prime.
    Hyperplane(HyperplaneArgs),
    /// A Jacobi sum and its predicted magnitude.
    Jacobi(JacobiArgs),
    /// The prime-sieve criterion, optionally checked against exact counts.
    Sieve(SieveArgs),
    /// Exhaustive scans.
    Scan {
        #[command(subcommand)]
        what: ScanCmd,
    },
    /// Analytic thresholds.
    Threshold {
        #[command(subcommand)]
        what: ThresholdCmd,
    },
}

#[derive(Args, Debug, Clone)]
struct FieldArgs {
    /// Field order, a prime power.
    #[arg(long)]
    q: Option<u64>,
    /// Characteristic, with --n instead of --q.
    #[arg(long)]
    p: Option<u64>,
    /// Extension degree, with --p.
    #[arg(long)]
    n: Option<u32>,
}

#[derive(Subcommand, Debug)]
enum FieldCmd {
    Info(FieldArgs),
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum CountMethod {
    Brute,
    Moebius,
    /// Exact dynamic programme, Fermat shapes only.
    Dp,
    /// Character-sum expansion, Fermat shapes only.
    Charsum,
    /// All points of F_q^s, not only primitive ones.
    Points,
}

impl CountMethod {
    fn name(self) -> &'static str {
        match self {
            CountMethod::Brute => "brute",
            CountMethod::Moebius => "moebius",
            CountMethod::Dp => "dp",
            CountMethod::Charsum => "charsum",
            CountMethod::Points => "points",
        }
    }
}

#[derive(Args, Debug)]
struct CountArgs {
    #[command(flatten)]
    field: FieldArgs,
    /// Polynomial, e.g. "x1^2+x2^2+x3^2-1".
    #[arg(long)]
    poly: String,
    #[arg(long, value_enum, default_value = "brute")]
    method: CountMethod,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Subcommand, Debug)]
enum BoundCmd {
    /// Diagonal equation a_1 x_1^{d_1} + ... = b.
    Fermat {
        #[command(flatten)]
        field: FieldArgs,
        /// Exponents d_1,...,d_s, each dividing q-1.
        #[arg(long, value_delimiter = ',', required = true)]
        d: Vec<u64>,
        /// Coefficients as field encodings; all ones when omitted.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        a: Vec<i64>,
        #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
        b: i64,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Dwork-regular polynomial.
    Dwork {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long)]
        poly: String,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Right-hand side of the superelliptic estimate.
    Superelliptic {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        d: u64,
        #[arg(long)]
        s: u32,
    },
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum HyperplaneMethod {
    Exact,
    Brute,
}

#[derive(Args, Debug)]
struct HyperplaneArgs {
    #[command(flatten)]
    field: FieldArgs,
    #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
    a: Vec<i64>,
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    b: i64,
    #[arg(long, value_enum, default_value = "exact")]
    method: HyperplaneMethod,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum JacobiMethod {
    Direct,
    Fast,
}

#[derive(Args, Debug)]
struct JacobiArgs {
    #[command(flatten)]
    field: FieldArgs,
    /// Character indices k, meaning g^j -> exp(2 pi i jk/(q-1)).
    #[arg(long, value_delimiter = ',', required_unless_present = "orders", conflicts_with = "orders")]
    chars: Vec<u64>,
    /// Character orders r_i dividing q-1; picks index (q-1)/r_i.
    #[arg(long, value_delimiter = ',')]
    orders: Vec<u64>,
    #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
    b: i64,
    #[arg(long, value_enum, default_value = "direct")]
    method: JacobiMethod,
}

#[derive(Args, Debug)]
struct SieveArgs {
    #[arg(long)]
    q: u64,
    #[arg(long, value_delimiter = ',', required = true)]
    d: Vec<u64>,
    /// l_i dividing (q-1)/d_i.
    #[arg(long, value_delimiter = ',', required = true)]
    ell: Vec<u64>,
    /// Sieving primes shared by every coordinate; derived from q, d and l when omitted.
    #[arg(long, value_delimiter = ',')]
    primes: Vec<u64>,
    /// W(l_i) values; computed from l when omitted.
    #[arg(long, value_delimiter = ',')]
    w_ell: Vec<u64>,
    /// Also verify the sieve inequality with exact counts for these coefficients.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    a: Vec<i64>,
    #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
    b: i64,
}

#[derive(Subcommand, Debug)]
enum ScanCmd {
    /// Odd prime powers q for which x^2+y^2+z^2 = 1 has no primitive point.
    Sphere {
        #[arg(long)]
        max: u64,
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        /// Expected exceptional list; a mismatch exits with status 2.
        #[arg(long, value_delimiter = ',')]
        expect: Option<Vec<u64>>,
    },
}

#[derive(Subcommand, Debug)]
enum ThresholdCmd {
    /// Where the sphere sufficiency inequality starts to hold.
    Sphere,
}

/// Command output plus the exit status it implies.
struct Outcome {
    text: String,
    code: i32,
}

impl Outcome {
    fn ok(text: String) -> Self {
        Outcome { text, code: EXIT_OK }
    }

    fn checked(text: String, holds: bool) -> Self {
        Outcome {
            text,
            code: if holds { EXIT_OK } else { EXIT_VERIFY },
        }
    }
}

/// Rounds to 12 significant digits; non-finite values become null.
fn sig12(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    let r: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    json!(r)
}

fn sig12_text(x: Option<f64>) -> String {
    match x.map(sig12) {
        Some(Value::Number(n)) => n.to_string(),
        _ => String::new(),
    }
}

const REPORT_HEADER: [&str; 11] = [
    "q", "p", "n", "poly", "method", "count", "main_term", "deviation", "bound", "holds", "elapsed_ms",
];

fn report_json(r: &CountReport) -> Value {
    json!({
        "q": r.q,
        "p": r.p,
        "n": r.n,
        "poly": r.poly,
        "method": r.method,
        "count": r.count,
        "main_term": sig12(r.main_term),
        "deviation": sig12(r.deviation),
        "bound": r.bound.map(sig12).unwrap_or(Value::Null),
        "holds": r.holds,
        "elapsed_ms": r.elapsed.as_millis() as u64,
    })
}

fn csv_text(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

fn report_row(r: &CountReport) -> Vec<String> {
    vec![
        r.q.to_string(),
        r.p.to_string(),
        r.n.to_string(),
        r.poly.clone(),
        r.method.clone(),
        r.count.to_string(),
        sig12_text(Some(r.main_term)),
        sig12_text(Some(r.deviation)),
        sig12_text(r.bound),
        r.holds.map(|h| h.to_string()).unwrap_or_default(),
        r.elapsed.as_millis().to_string(),
    ]
}

/// Serializes reports: one JSON object per line, or CSV with a header row.
pub fn emit_report(reports: &[CountReport], format: Format) -> String {
    match format {
        Format::Json => reports
            .iter()
            .map(|r| report_json(r).to_string() + "\n")
            .collect(),
        Format::Csv => {
            let rows: Vec<Vec<String>> = reports.iter().map(report_row).collect();
            csv_text(&REPORT_HEADER, &rows)
        }
    }
}

fn emit_checked(report: CountReport, format: Format) -> Outcome {
    let holds = report.holds.unwrap_or(true);
    Outcome::checked(emit_report(&[report], format), holds)
}

fn field_ctx(f: &FieldArgs) -> Result<Arc<FieldCtx>> {
    let ctx = match (f.q, f.p, f.n) {
        (Some(q), None, None) => FieldCtx::of_order(q)?,
        (Some(q), Some(p), Some(n)) => {
            let ctx = FieldCtx::new(p, n)?;
            if ctx.q() != q {
                return Err(Error::InvalidInput(format!("{p}^{n} is not {q}")));
            }
            ctx
        }
        (None, Some(p), Some(n)) => FieldCtx::new(p, n)?,
        _ => return Err(Error::InvalidInput("give --q, or both --p and --n".into())),
    };
    Ok(Arc::new(ctx))
}

/// Nonnegative values are field encodings, negative ones live in the prime field.
fn element(ctx: &FieldCtx, v: i64) -> Result<FqElem> {
    if v < 0 {
        Ok(ctx.from_int(v))
    } else {
        ctx.from_encoding(v as u64)
    }
}

fn coefficients(ctx: &FieldCtx, a: &[i64], s: usize) -> Result<Vec<FqElem>> {
    if a.is_empty() {
        return Ok(vec![FqElem::ONE; s]);
    }
    if a.len() != s {
        return Err(Error::InvalidInput(format!("expected {s} coefficients, got {}", a.len())));
    }
    a.iter().map(|&v| element(ctx, v)).collect()
}

fn fermat_shape_of(f: &MultiPoly) -> Result<FermatShape> {
    f.as_fermat_shape()
        .ok_or_else(|| Error::InvalidInput("polynomial is not of the form sum a_i x_i^d_i - b".into()))
}

fn cmd_field_info(f: &FieldArgs) -> Result<Outcome> {
    let info = field_ctx(f)?.info();
    let v = json!({
        "q": info.q,
        "p": info.p,
        "n": info.n,
        "modulus": info.modulus,
        "generator": info.generator,
    });
    Ok(Outcome::ok(v.to_string() + "\n"))
}

fn cmd_count(args: &CountArgs, budget: WorkBudget) -> Result<Outcome> {
    let ctx = field_ctx(&args.field)?;
    let f = parse_poly(&args.poly, ctx.clone())?;
    let start = Instant::now();
    let s = f.vars();
    let (count, main) = match args.method {
        CountMethod::Brute => (count_primitive_brute(&f, budget)?, primitive_main_term(&ctx, s)),
        CountMethod::Moebius => (primitive_via_moebius(&f, budget)?, primitive_main_term(&ctx, s)),
        CountMethod::Dp => (
            primitive_count_fermat_exact(&ctx, &fermat_shape_of(&f)?, budget)?,
            primitive_main_term(&ctx, s),
        ),
        CountMethod::Charsum => {
            let table = Arc::new(CharTable::new(ctx.clone()));
            (
                primitive_count_fermat_charsum(table, &fermat_shape_of(&f)?, budget)?,
                primitive_main_term(&ctx, s),
            )
        }
        CountMethod::Points => (
            count_points(&f, budget)?,
            (ctx.q() as f64).powi(s as i32 - 1),
        ),
    };
    let report = CountReport::new(&ctx, f.to_string(), args.method.name(), count, main, None)
        .with_elapsed(start.elapsed());
    Ok(Outcome::ok(emit_report(&[report], args.format)))
}

fn cmd_bound(which: &BoundCmd, budget: WorkBudget) -> Result<Outcome> {
    match which {
        BoundCmd::Fermat { field, d, a, b, format } => {
            let ctx = field_ctx(field)?;
            let coeffs = coefficients(&ctx, a, d.len())?;
            let shape = FermatShape::new(coeffs, d.clone(), element(&ctx, *b)?)?;
            Ok(emit_checked(theorem2_check(&ctx, &shape, budget)?, *format))
        }
        BoundCmd::Dwork { field, poly, format } => {
            let ctx = field_ctx(field)?;
            let f = parse_poly(poly, ctx)?;
            Ok(emit_checked(dwork_bound_check(&f, budget)?, *format))
        }
        BoundCmd::Superelliptic { q, n, d, s } => {
            let bound = superelliptic_bound(*q, *n, *d, *s)?;
            let v = json!({"q": q, "n": n, "d": d, "s": s, "bound": sig12(bound)});
            Ok(Outcome::ok(v.to_string() + "\n"))
        }
    }
}

fn cmd_hyperplane(args: &HyperplaneArgs, budget: WorkBudget) -> Result<Outcome> {
    let ctx = field_ctx(&args.field)?;
    let a = coefficients(&ctx, &args.a, args.a.len())?;
    let b = element(&ctx, args.b)?;
    let s = a.len();
    let shape = FermatShape::new(a.clone(), vec![1; s], b)?;
    let f = shape.to_poly(ctx.clone())?;
    let start = Instant::now();
    let (count, method) = match args.method {
        HyperplaneMethod::Exact => (primitive_count_hyperplane_exact(&ctx, &a, b)?, "exact"),
        HyperplaneMethod::Brute => (count_primitive_brute(&f, budget)?, "brute"),
    };
    let report = CountReport::new(&ctx, f.to_string(), method, count, primitive_main_term(&ctx, s), None)
        .with_elapsed(start.elapsed());
    Ok(Outcome::ok(emit_report(&[report], args.format)))
}

fn cmd_jacobi(args: &JacobiArgs, budget: WorkBudget) -> Result<Outcome> {
    let ctx = field_ctx(&args.field)?;
    let m = ctx.group_order();
    let indices: Vec<u64> = if args.orders.is_empty() {
        args.chars.clone()
    } else {
        args.orders
            .iter()
            .map(|&r| {
                if r == 0 || m % r != 0 {
                    Err(Error::InvalidInput(format!("order {r} does not divide q-1 = {m}")))
                } else {
                    Ok((m / r) % m)
                }
            })
            .collect::<Result<_>>()?
    };
    if let Some(&k) = indices.iter().find(|&&k| k >= m) {
        return Err(Error::InvalidInput(format!("character index {k} must be below q-1 = {m}")));
    }
    let chars: Vec<MulCharacter> = indices.iter().map(|&k| MulCharacter::new(&ctx, k)).collect();
    let b = element(&ctx, args.b)?;
    let table = CharTable::new(ctx.clone());
    let (value, method) = match args.method {
        JacobiMethod::Direct => (table.jacobi_sum_direct(&chars, b, budget)?, "direct"),
        JacobiMethod::Fast => (table.jacobi_sum_fast(&chars, b, budget)?, "fast"),
    };
    let class = JacobiMagnitude::classify(&chars);
    // the magnitude laws are stated for b != 0
    let expected = (!b.is_zero()).then(|| class.expected_abs(ctx.q(), chars.len()));
    let v = json!({
        "q": ctx.q(),
        "chars": indices,
        "b": ctx.encode(b),
        "method": method,
        "re": sig12(value.re),
        "im": sig12(value.im),
        "abs": sig12(value.norm()),
        "class": class,
        "expected_abs": expected.map(sig12).unwrap_or(Value::Null),
    });
    Ok(Outcome::ok(v.to_string() + "\n"))
}

fn cmd_sieve(args: &SieveArgs, budget: WorkBudget) -> Result<Outcome> {
    let mut config = SieveConfig::new(args.q, args.d.clone(), args.ell.clone())?;
    if !args.primes.is_empty() {
        config.primes = vec![args.primes.clone(); args.d.len()];
    }
    let w_ell = if args.w_ell.is_empty() {
        config.w_ell()?
    } else if args.w_ell.len() == args.d.len() {
        args.w_ell.clone()
    } else {
        return Err(Error::InvalidInput("--w-ell needs one value per exponent".into()));
    };
    let delta = sieve_delta(&config.primes);
    if !(delta > 0.0) {
        return Err(Error::InvalidInput(format!("delta must be positive, got {delta}")));
    }
    let t_total = config.t_total() as u64;
    let (lhs, rhs) = sieve_criterion_sides(args.q, &config.d, &w_ell, t_total, delta);
    let mut v = json!({
        "q": args.q,
        "d": config.d,
        "ell": config.ell,
        "primes": config.primes,
        "t_total": t_total,
        "delta": sig12(delta),
        "w_ell": w_ell,
        "lhs": sig12(lhs),
        "rhs": sig12(rhs),
        "criterion": lhs > rhs,
    });
    let mut holds = true;
    if !args.a.is_empty() {
        let ctx = field_ctx(&FieldArgs { q: Some(args.q), p: None, n: None })?;
        let a = coefficients(&ctx, &args.a, args.d.len())?;
        let check = sieve_lower_bound_check(&ctx, &config, &a, element(&ctx, args.b)?, budget)?;
        holds = check.holds;
        v["check"] = json!({"lhs": check.lhs, "rhs": check.rhs, "holds": check.holds});
    }
    Ok(Outcome::checked(v.to_string() + "\n", holds))
}

fn cmd_scan_sphere(
    max: u64,
    jobs: Option<usize>,
    checkpoint: Option<&PathBuf>,
    format: Format,
    expect: Option<&Vec<u64>>,
) -> Result<Outcome> {
    let jobs = jobs.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let outcome = sphere_scan(max, jobs, checkpoint.map(|p| p.as_path()))?;
    let text = match format {
        Format::Json => {
            json!({
                "max_q": max,
                "scanned": outcome.records.len(),
                "exceptional": outcome.exceptional,
            })
            .to_string()
                + "\n"
        }
        Format::Csv => {
            let rows: Vec<Vec<String>> = outcome
                .records
                .iter()
                .map(|r| {
                    let w = r.witness.map(|w| w.map(|x| x.to_string()));
                    let [x, y, z] = w.unwrap_or_default();
                    vec![r.q.to_string(), r.has_primitive.to_string(), x, y, z]
                })
                .collect();
            csv_text(&["q", "has_primitive", "x", "y", "z"], &rows)
        }
    };
    let holds = expect.map_or(true, |e| *e == outcome.exceptional);
    Ok(Outcome::checked(text, holds))
}

fn cmd_threshold_sphere() -> Result<Outcome> {
    let t = sufficiency_threshold()?;
    let (lhs, rhs) = sphere_sufficiency_sides(t.first_integer as f64)?;
    let v = json!({
        "crossing": sig12(t.crossing),
        "first_integer": t.first_integer,
        "lhs": sig12(lhs),
        "rhs": sig12(rhs),
    });
    Ok(Outcome::ok(v.to_string() + "\n"))
}

fn dispatch(cli: &Cli) -> Result<Outcome> {
    let budget = cli.budget.map(WorkBudget::new).unwrap_or_else(WorkBudget::from_env);
    match &cli.command {
        Command::Field { what: FieldCmd::Info(f) } => cmd_field_info(f),
        Command::Count(args) => cmd_count(args, budget),
        Command::Bound { which } => cmd_bound(which, budget),
        Command::Hyperplane(args) => cmd_hyperplane(args, budget),
        Command::Jacobi(args) => cmd_jacobi(args, budget),
        Command::Sieve(args) => cmd_sieve(args, budget),
        Command::Scan {
            what: ScanCmd::Sphere { max, jobs, checkpoint, format, expect },
        } => cmd_scan_sphere(*max, *jobs, checkpoint.as_ref(), *format, expect.as_ref()),
        Command::Threshold { what: ThresholdCmd::Sphere } => cmd_threshold_sphere(),
    }
}

fn error_json(message: &str, position: Option<usize>) -> String {
    json!({"error": message, "position": position}).to_string()
}

fn error_code(e: &Error) -> i32 {
    match e {
        Error::Integrity(_) => EXIT_VERIFY,
        _ => EXIT_INVALID,
    }
}

/// Runs the command line `argv` (program name first), writing to the given sinks.
pub fn run_with<O: Write, E: Write>(argv: &[String], out: &mut O, err: &mut E) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return EXIT_OK;
            }
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("invalid arguments");
            let _ = writeln!(err, "{}", error_json(first.trim_start_matches("error: "), None));
            return EXIT_INVALID;
        }
    };
    match dispatch(&cli) {
        Ok(o) => {
            let _ = out.write_all(o.text.as_bytes());
            o.code
        }
        Err(e) => {
            let _ = writeln!(err, "{}", error_json(&e.to_string(), e.position()));
            error_code(&e)
        }
    }
}

/// Runs against the process's standard streams.
pub fn run(argv: &[String]) -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}
