//! `burstecc`: balls, verifications, bound tables and codebooks from the
//! command line.
//!
//! Exit codes: 0 success, 1 usage or refused input, 2 a verification found a
//! counterexample, 3 a decode failed.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use burst_ecc::analysis::{bounds, verify_ball_size, verify_thm1, verify_thm2};
use burst_ecc::channel::{self, ChannelSpec, Model, Variant};
use burst_ecc::code_general::{
    decode_general, encode_general, row_burst_sweep, GeneralParams, SideInfo,
};
use burst_ecc::code_tt::{build_code_tt, lemma4_check, FootprintReport};
use burst_ecc::codebook::Codebook;
use burst_ecc::syncomp::complexity_table;
use burst_ecc::{BitSequence, Error};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "burstecc", version, about = "Two-burst deletion-insertion codes")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print the sorted error ball of a word.
    Ball(BallArgs),
    /// Run one exhaustive check and print a JSON report.
    Verify(VerifyArgs),
    /// Lower and upper bounds on the optimal code size, as JSON.
    Bounds(Triple),
    /// Complexity of the window inversions, as CSV.
    ComplexityTable,
    /// Build a codebook file.
    Build(BuildArgs),
    /// Map a message index to its codeword.
    Encode(EncodeArgs),
    /// Recover the codeword from a corrupted word.
    Decode(DecodeArgs),
    /// Corrupt sampled codewords with sampled bursts and decode them.
    Roundtrip(RoundtripArgs),
}

#[derive(Args)]
struct Triple {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    t1: usize,
    #[arg(long)]
    t2: usize,
}

#[derive(Args)]
struct BallArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 2)]
    m: usize,
    #[arg(long)]
    t1: usize,
    #[arg(long)]
    t2: usize,
    #[arg(long, default_value = "di")]
    model: String,
    /// strict (alias definition), first-only, free or partition.
    #[arg(long, default_value = "partition")]
    variant: String,
    #[arg(long)]
    x: String,
}

#[derive(Clone, Copy, ValueEnum)]
enum Theorem {
    #[value(name = "1")]
    Swap,
    #[value(name = "2")]
    Mixed,
    Eq7,
    Obs2,
    Lemma4,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, value_enum)]
    theorem: Theorem,
    #[command(flatten)]
    p: Triple,
    /// Burst variant for the edge-set checks.
    #[arg(long, default_value = "free")]
    variant: String,
}

#[derive(Clone, Copy, ValueEnum)]
enum Construction {
    Tt,
    General,
}

#[derive(Args)]
struct BuildArgs {
    #[arg(value_enum)]
    construction: Construction,
    #[arg(long)]
    n: usize,
    /// Burst length of the equal-length construction.
    #[arg(long)]
    t: Option<usize>,
    #[arg(long)]
    t1: Option<usize>,
    #[arg(long)]
    t2: Option<usize>,
    /// Regularity parameter of the first row.
    #[arg(long, default_value_t = 1.5)]
    d: f64,
    #[arg(long)]
    rho1: Option<usize>,
    #[arg(long)]
    rho2: Option<usize>,
    #[arg(long)]
    out: PathBuf,
    /// Where to write the side information (general only); defaults to
    /// `<out>.side.json`.
    #[arg(long)]
    side: Option<PathBuf>,
}

#[derive(Args)]
struct EncodeArgs {
    #[arg(long)]
    codebook: PathBuf,
    #[arg(long)]
    msg: u128,
}

#[derive(Args)]
struct DecodeArgs {
    #[arg(long)]
    codebook: PathBuf,
    #[arg(long)]
    y: String,
}

#[derive(Args)]
struct RoundtripArgs {
    #[arg(long)]
    codebook: PathBuf,
    #[arg(long, default_value_t = 100)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

enum Failure {
    /// Stdout was closed by the reader.
    Closed,
    Usage(String),
    Counterexample(Value),
    Decode(Value),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Closed) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Counterexample(report)) => {
            emit(&pretty(&report));
            ExitCode::from(2)
        }
        Err(Failure::Decode(reason)) => {
            emit(&reason.to_string());
            ExitCode::from(3)
        }
    }
}

fn run(cmd: Cmd) -> Outcome {
    match cmd {
        Cmd::Ball(a) => ball(a),
        Cmd::Verify(a) => verify(a),
        Cmd::Bounds(p) => bound_report(p),
        Cmd::ComplexityTable => table(),
        Cmd::Build(a) => build(a),
        Cmd::Encode(a) => encode(a),
        Cmd::Decode(a) => decode(a),
        Cmd::Roundtrip(a) => roundtrip(a),
    }
}

// Writes one line to stdout; a closed pipe is not an error.
fn emit(line: &str) {
    let _ = writeln!(io::stdout().lock(), "{line}");
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).unwrap_or_default()
}

fn to_json<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}

fn ball(a: BallArgs) -> Outcome {
    let x: BitSequence = a.x.parse()?;
    if let Some(n) = a.n {
        if n != x.len() {
            return Err(Failure::Usage(format!("--n {n} but --x has length {}", x.len())));
        }
    }
    let spec = ChannelSpec::new(a.m, a.t1, a.t2, a.model.parse::<Model>()?, a.variant.parse::<Variant>()?);
    let words = channel::ball(&x, &spec)?;
    let mut out = BufWriter::new(io::stdout().lock());
    let io = |e: io::Error| match e.kind() {
        io::ErrorKind::BrokenPipe => Failure::Closed,
        _ => Failure::Usage(e.to_string()),
    };
    writeln!(
        out,
        "# ball x={x} m={} t1={} t2={} model={} variant={} size={}",
        spec.m,
        spec.t1,
        spec.t2,
        spec.model,
        spec.variant,
        words.len()
    )
    .map_err(io)?;
    for w in words {
        writeln!(out, "{w}").map_err(io)?;
    }
    out.flush().map_err(io)
}

fn verify(a: VerifyArgs) -> Outcome {
    let Triple { n, t1, t2 } = a.p;
    let variant: Variant = a.variant.parse()?;
    let (passed, report) = match a.theorem {
        Theorem::Swap => {
            let r = verify_thm1(n, t1, t2, variant)?;
            (r.passed(), to_json(&r))
        }
        Theorem::Mixed => {
            let r = verify_thm2(n, t1, t2, variant)?;
            (r.passed(), to_json(&r))
        }
        Theorem::Eq7 => {
            let r = verify_ball_size(n, t1, t2)?;
            (r.passed(), to_json(&r))
        }
        Theorem::Obs2 => {
            burst_ecc::check_budget("row burst sweep", n)?;
            let r = row_burst_sweep(n, t1, t2)?;
            (r.passed() && r.start_violations == 0, to_json(&r))
        }
        Theorem::Lemma4 => {
            if t1 != t2 {
                return Err(Failure::Usage("lemma4 is stated for t1 = t2".into()));
            }
            burst_ecc::check_budget("symbol footprint scan", n)?;
            let mut total = FootprintReport {
                patterns: 0,
                violations: 0,
                max_changed_symbols: 0,
                first_violation: None,
            };
            for x in BitSequence::all(n) {
                let r = lemma4_check(&x, t1)?;
                total.patterns += r.patterns;
                total.violations += r.violations;
                total.max_changed_symbols = total.max_changed_symbols.max(r.max_changed_symbols);
                total.first_violation = total.first_violation.or(r.first_violation);
            }
            (total.passed(), to_json(&total))
        }
    };
    let report = json!({ "passed": passed, "report": report });
    if passed {
        emit(&pretty(&report));
        Ok(())
    } else {
        Err(Failure::Counterexample(report))
    }
}

fn bound_report(p: Triple) -> Outcome {
    let r = bounds(p.n, p.t1, p.t2)?;
    let log2 = |q: &num_rational::BigRational| {
        let (num, den) = (q.numer().to_f64().unwrap_or(f64::NAN), q.denom().to_f64().unwrap_or(f64::NAN));
        num.log2() - den.log2()
    };
    let report = json!({
        "n": p.n,
        "t1": p.t1,
        "t2": p.t2,
        "lower": r.lower.to_string(),
        "lower_log2": log2(&r.lower),
        "upper": r.upper.to_string(),
        "upper_log2": log2(&r.upper),
        "a1": r.a1.to_string(),
        "a2": r.a2.to_string(),
    });
    emit(&pretty(&report));
    Ok(())
}

fn table() -> Outcome {
    let rows = complexity_table()?;
    let mut w = csv::Writer::from_writer(io::stdout().lock());
    let csv_err = |e: csv::Error| Failure::Usage(e.to_string());
    w.write_record([
        "row", "n", "t1", "t2", "t_prime", "di", "di_log2", "ref_di_exp", "ds", "ds_log2",
        "ref_ds_exp", "ds_counts",
    ])
    .map_err(csv_err)?;
    for r in rows {
        let opt = |v: Option<String>| v.unwrap_or_default();
        w.write_record([
            r.row.to_string(),
            r.n.to_string(),
            r.t1.to_string(),
            r.t2.to_string(),
            opt(r.t_prime.map(|t| t.to_string())),
            r.di.to_string(),
            format!("{:.2}", r.di_log2),
            r.ref_di_exp.to_string(),
            opt(r.ds.as_ref().map(|d| d.to_string())),
            opt(r.ds_log2.map(|l| format!("{l:.2}"))),
            r.ref_ds_exp.to_string(),
            if r.rs_row { "rs-operations" } else { "ds-ball" }.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Failure::Usage(e.to_string()))
}

fn write_codebook(cb: &Codebook, path: &Path) -> Outcome {
    let f = File::create(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    let mut out = BufWriter::new(f);
    cb.write_to(&mut out)?;
    out.flush().map_err(|e| Failure::Usage(e.to_string()))
}

fn read_codebook(path: &Path) -> Result<Codebook, Failure> {
    let f = File::open(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    Ok(Codebook::read_from(BufReader::new(f))?)
}

fn build(a: BuildArgs) -> Outcome {
    let (cb, side) = match a.construction {
        Construction::Tt => {
            let t = a
                .t
                .or(a.t1)
                .ok_or_else(|| Failure::Usage("build tt needs --t".into()))?;
            (build_code_tt(a.n, t, None)?.codebook()?, None)
        }
        Construction::General => {
            let (t1, t2) = match (a.t1, a.t2) {
                (Some(t1), Some(t2)) => (t1, t2),
                _ => return Err(Failure::Usage("build general needs --t1 and --t2".into())),
            };
            let desk = GeneralParams::desk(a.n, t1, t2, a.d)?;
            let params = GeneralParams::new(
                a.n,
                t1,
                t2,
                a.d,
                a.rho1.unwrap_or(desk.rho1),
                a.rho2.unwrap_or(desk.rho2),
            )?;
            let code = encode_general(&params, None)?;
            (code.codebook, Some(code.side))
        }
    };
    write_codebook(&cb, &a.out)?;
    let mut summary = json!({
        "construction": cb.header.construction,
        "n": cb.header.n,
        "codewords": cb.len().to_string(),
        "codebook": a.out.display().to_string(),
    });
    if let Some(side) = side {
        let path = a.side.unwrap_or_else(|| {
            let mut p = a.out.clone().into_os_string();
            p.push(".side.json");
            p.into()
        });
        std::fs::write(&path, pretty(&side.to_json()))
            .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
        summary["side"] = json!(path.display().to_string());
    }
    emit(&pretty(&summary));
    Ok(())
}

fn encode(a: EncodeArgs) -> Outcome {
    let cb = read_codebook(&a.codebook)?;
    emit(&cb.encode(a.msg)?.to_string());
    Ok(())
}

/// A decoder rebuilt from a codebook header.
enum Decoder {
    Tt(burst_ecc::code_tt::TtCode),
    General(SideInfo),
}

impl Decoder {
    fn from_codebook(cb: &Codebook) -> Result<Self, Failure> {
        let p = &cb.header.params;
        match cb.header.construction.as_str() {
            "tt" => {
                let u = p
                    .get("u")
                    .and_then(Value::as_array)
                    .ok_or_else(|| Failure::Usage("tt codebook lacks its shift".into()))?
                    .iter()
                    .map(|v| v.as_str().and_then(|s| s.parse().ok()))
                    .collect::<Option<Vec<u64>>>()
                    .ok_or_else(|| Failure::Usage("malformed shift".into()))?;
                Ok(Decoder::Tt(build_code_tt(cb.header.n, cb.header.t1, Some(u))?))
            }
            "general" => {
                let side = p
                    .get("side")
                    .ok_or_else(|| Failure::Usage("general codebook lacks side information".into()))?;
                Ok(Decoder::General(SideInfo::from_json(side)?))
            }
            other => Err(Failure::Usage(format!("unknown construction {other:?}"))),
        }
    }

    fn decode(&self, y: &BitSequence) -> burst_ecc::Result<BitSequence> {
        match self {
            Decoder::Tt(code) => code.decode(y),
            Decoder::General(side) => decode_general(y, side),
        }
    }
}

fn reason(e: &Error) -> &'static str {
    match e {
        Error::ConstructionViolation(_) => "construction-violation",
        Error::LengthMismatch { .. } => "length-mismatch",
        _ => "undecodable",
    }
}

fn decode(a: DecodeArgs) -> Outcome {
    let cb = read_codebook(&a.codebook)?;
    let y: BitSequence = a.y.parse()?;
    let dec = Decoder::from_codebook(&cb)?;
    match dec.decode(&y) {
        Ok(x) => {
            emit(&x.to_string());
            Ok(())
        }
        Err(e) => Err(Failure::Decode(json!({ "error": reason(&e), "detail": e.to_string() }))),
    }
}

fn roundtrip(a: RoundtripArgs) -> Outcome {
    let cb = read_codebook(&a.codebook)?;
    if cb.is_empty() {
        return Err(Failure::Usage("empty codebook".into()));
    }
    let dec = Decoder::from_codebook(&cb)?;
    let spec = ChannelSpec::di(2, cb.header.t1, cb.header.t2);
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let mut failures = Vec::new();
    let mut trials = 0usize;
    for _ in 0..a.samples {
        let x = cb.words()[rng.gen_range(0..cb.len())];
        let ball = channel::ball(&x, &spec)?;
        let y = ball[rng.gen_range(0..ball.len())];
        trials += 1;
        match dec.decode(&y) {
            Ok(w) if w == x => {}
            Ok(w) => failures.push(json!({ "x": x.to_string(), "y": y.to_string(), "got": w.to_string() })),
            Err(e) => failures.push(json!({ "x": x.to_string(), "y": y.to_string(), "error": reason(&e) })),
        }
    }
    let report = json!({
        "seed": a.seed,
        "trials": trials,
        "failures": failures.len(),
        "first_failures": failures.iter().take(5).collect::<Vec<_>>(),
    });
    emit(&pretty(&report));
    if failures.is_empty() {
        Ok(())
    } else {
        Err(Failure::Decode(report))
    }
}
