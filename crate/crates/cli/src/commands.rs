use std::fmt;
use std::fs::File;
use std::io::{self, Read, Write};
use std::path::Path;

use sunif_core::montecarlo::{self, Checkpoints, ExperimentSpec, EXACT_D1_MAX_N};
use sunif_core::report::{self, ResultDocument};
use sunif_core::thresholds::{self, ThresholdFn};
use sunif_core::{discrepancy, generate, BitSequence, Seed};

use crate::{
    AdmissibleArgs, CompareArgs, DiscArgs, DistArgs, ExpArgs, GenArgs, InFormat, OutFormat, PhiArgs,
    ProfileArgs,
};

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or unparsable input files (exit 1).
    Usage(String),
    /// Data, feasibility and I/O failures (exit 2).
    Failure(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Failure(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage: {m}"),
            CliError::Failure(m) => f.write_str(m),
        }
    }
}

impl From<sunif_core::Error> for CliError {
    fn from(e: sunif_core::Error) -> Self {
        CliError::Failure(e.to_string())
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Failure(format!("i/o error: {e}"))
    }
}

type CmdResult = Result<u8, CliError>;

const HAZARD_EXIT: u8 = 3;

fn is_stdio(path: &Path) -> bool {
    path.as_os_str() == "-"
}

fn read_input(path: &Path) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    if is_stdio(path) {
        io::stdin().read_to_end(&mut buf)?;
    } else {
        File::open(path)
            .and_then(|mut f| f.read_to_end(&mut buf))
            .map_err(|e| CliError::Failure(format!("{}: {e}", path.display())))?;
    }
    Ok(buf)
}

fn write_output(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if is_stdio(path) {
        let mut out = io::stdout().lock();
        out.write_all(bytes)?;
        out.flush()?;
    } else {
        std::fs::write(path, bytes).map_err(|e| CliError::Failure(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

fn looks_like_text(bytes: &[u8]) -> bool {
    bytes.iter().all(|b| matches!(b, b'0' | b'1' | b'\n' | b'\r'))
}

fn read_sequence(path: &Path, format: InFormat) -> Result<BitSequence, CliError> {
    let bytes = read_input(path)?;
    let text = match format {
        InFormat::Text => true,
        InFormat::Packed => false,
        InFormat::Auto => looks_like_text(&bytes),
    };
    let seq = if text { BitSequence::read_text(&bytes[..]) } else { BitSequence::from_packed_bytes(&bytes) };
    Ok(seq?)
}

fn parse_schedule(spec: &str) -> Result<ThresholdFn, CliError> {
    ThresholdFn::parse(spec).map_err(|e| match e {
        sunif_core::Error::Io(m) => CliError::Failure(m),
        other => CliError::Usage(format!("--s-spec {spec:?}: {other}")),
    })
}

fn parse_range(text: &str) -> Result<(u64, u64), CliError> {
    let (a, b) = text
        .split_once("..")
        .or_else(|| text.split_once(':'))
        .ok_or_else(|| CliError::Usage(format!("range {text:?} must look like A:B")))?;
    let parse = |s: &str| {
        s.trim()
            .parse::<u64>()
            .map_err(|e| CliError::Usage(format!("range bound {s:?}: {e}")))
    };
    let (a, b) = (parse(a)?, parse(b)?);
    if a > b {
        return Err(CliError::Usage(format!("empty range {a}..{b}")));
    }
    Ok((a, b))
}

fn threads(requested: Option<usize>) -> Result<usize, CliError> {
    match requested {
        Some(0) => Err(CliError::Usage("--threads must be at least 1".into())),
        Some(t) => Ok(t),
        None => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

fn load_spec(path: &Path) -> Result<ExperimentSpec, CliError> {
    let bytes = read_input(path)?;
    serde_json::from_slice(&bytes).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

pub fn gen(args: GenArgs) -> CmdResult {
    let length = usize::try_from(args.length)
        .map_err(|_| CliError::Usage(format!("--length {} is too large", args.length)))?;
    let t = generate(Seed::new(args.seed, args.stream), length)?;
    let bytes = match args.format {
        OutFormat::Text => {
            let mut v = Vec::with_capacity(length + 1);
            t.write_text(&mut v)?;
            v
        }
        OutFormat::Packed => t.to_packed_bytes(),
    };
    write_output(&args.out, &bytes)?;
    Ok(0)
}

pub fn disc(args: DiscArgs) -> CmdResult {
    let t = read_sequence(&args.input, args.format)?;
    if args.k == 0 || args.n == 0 {
        return Err(CliError::Usage("--k and --n must be at least 1".into()));
    }
    let d = discrepancy::dk_bounded(&t, args.k, args.n, args.k_max)?;
    println!("{} {}", d.numerator(), d.denominator());
    Ok(0)
}

pub fn profile(args: ProfileArgs) -> CmdResult {
    let s = parse_schedule(&args.s_spec)?;
    let checkpoints = match &args.geometric {
        Some(g) => {
            let (from, to) = parse_range(g)?;
            let exps = |x: u64| u32::try_from(x).map_err(|_| CliError::Usage(format!("exponent {x} too large")));
            Checkpoints::Geometric { from_exp: exps(from)?, to_exp: Some(exps(to)?) }.resolve(u64::MAX)?
        }
        None => args.checkpoints.clone(),
    };
    let t = read_sequence(&args.input, args.format)?;
    let points = discrepancy::profile(&t, &s, &checkpoints, args.k_max)?;
    write_output(&args.out, &report::emit_profile_csv(&points))?;
    Ok(0)
}

pub fn phi(args: PhiArgs) -> CmdResult {
    let s = parse_schedule(&args.s_spec)?;
    let (lo, hi) = match (args.n, &args.range) {
        (Some(n), _) => (n, n),
        (None, Some(r)) => parse_range(r)?,
        (None, None) => return Err(CliError::Usage("one of --n or --range is required".into())),
    };
    if lo < 2 {
        return Err(CliError::Usage(format!("phi is defined for n >= 2, got {lo}")));
    }
    let mut out = io::BufWriter::new(io::stdout().lock());
    let mut hazards = 0u64;
    for n in lo..=hi {
        let e = thresholds::phi(&s, n)?;
        hazards += e.hazard as u64;
        writeln!(out, "{n} {} {}", e.value, if e.hazard { "hazard" } else { "ok" })?;
    }
    out.flush()?;
    if hazards > 0 {
        eprintln!("sunif: {hazards} of {} points are within the floor hazard band", hi - lo + 1);
        return Ok(HAZARD_EXIT);
    }
    Ok(0)
}

pub fn admissible(args: AdmissibleArgs) -> CmdResult {
    let s = parse_schedule(&args.s_spec)?;
    if args.horizon < 2 {
        return Err(CliError::Usage("--horizon must be at least 2".into()));
    }
    let r = thresholds::admissible(&s, args.horizon)?;
    write_output(Path::new("-"), &report::emit_json(&r)?)?;
    Ok(if r.hazard_points.is_empty() { 0 } else { HAZARD_EXIT })
}

pub fn exp(args: ExpArgs) -> CmdResult {
    let spec = load_spec(&args.spec_file)?;
    let threads = threads(args.threads)?;
    let result = montecarlo::run(&spec, threads)?;
    let doc = ResultDocument::new(&spec, result)?;
    let digest = doc.digest()?;
    write_output(&args.out, &report::emit_json(&doc)?)?;
    if let Some(csv) = &args.csv {
        write_output(csv, &report::emit_experiment_csv(&doc.payload))?;
    }
    eprintln!(
        "sunif exp: {} trials, {} schedule(s), family pass {}/{}, digest {digest}",
        doc.payload.trials,
        doc.payload.schedules.len(),
        doc.payload.family_pass_count,
        doc.payload.trials
    );
    Ok(0)
}

pub fn compare(args: CompareArgs) -> CmdResult {
    let a = load_spec(&args.a)?;
    let b = load_spec(&args.b)?;
    let threads = threads(args.threads)?;
    let report = montecarlo::regime_compare(&a, &b, threads)?;
    let doc = ResultDocument::new(&serde_json::json!({ "a": a, "b": b }), report)?;
    write_output(&args.out, &report::emit_json(&doc)?)?;
    for r in [&doc.payload.a, &doc.payload.b] {
        eprintln!(
            "sunif compare: {}: strictly decreasing = {}, bounded below = {}",
            r.name, r.strictly_decreasing, r.bounded_below
        );
    }
    Ok(0)
}

pub fn dist(args: DistArgs) -> CmdResult {
    if !(1..=EXACT_D1_MAX_N).contains(&args.n) {
        return Err(CliError::Usage(format!("--n must be in 1..={EXACT_D1_MAX_N}, got {}", args.n)));
    }
    let atoms = montecarlo::exact_d1_distribution(args.n)?;
    write_output(Path::new("-"), &report::emit_distribution_csv(&atoms))?;
    Ok(0)
}
