//! The `mdsfit` command line.
//!
//! Exit codes: 0 success, 1 a negative domain answer (condition fails,
//! counterexample found, no points found, reduction stuck), 2 usage or
//! input errors.

use std::ffi::OsString;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::codegen::{build_code, smallest_prime_power, SearchOptions, Strategy, DEFAULT_BUDGET, DEFAULT_SEED};
use crate::error::Error;
use crate::fields::make_field;
use crate::io::{code_to_json, one_based, parse_family, parse_matrix, trace_json};
use crate::reduction::{reduce, reduce_all, TieBreak};
use crate::structures::{mds_condition, to_root_family, RootFamily};
use crate::verify::{check_fact1, check_reduction_lemmas, run_suite, LemmaScope, Mode, Scope};

#[derive(Debug, Parser)]
#[command(name = "mdsfit", version, about = "MDS generator matrices with a prescribed zero pattern")]
pub struct Cli {
    /// Worker threads (default: available cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Skip the n ≤ m(m-1) bound on root families.
    #[arg(long, global = true)]
    pub allow_loose_n: bool,
    /// Extra diagnostics on stderr.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Test the MDS condition of a support matrix.
    Check {
        /// Matrix file (text or JSON), `-` for stdin.
        matrix: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Build and verify an MDS generator matrix fitting a support matrix.
    Build(BuildArgs),
    /// Print W(P_1..P_m) for a root family.
    W {
        #[command(flatten)]
        input: FamilyInput,
    },
    /// Run the degree reduction on a root family.
    Reduce {
        #[command(flatten)]
        input: FamilyInput,
        #[arg(long, value_enum, default_value_t = Policy::Lex)]
        policy: Policy,
        #[arg(long)]
        json: bool,
    },
    /// Check "W ≡ 0 implies GRP" over enumerated or sampled families.
    Verify(VerifyArgs),
    /// Check that the MDS condition matches the absence of RP.
    Fact1 {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        /// Largest matrix count checked exhaustively; above it, this many samples.
        #[arg(long, default_value_t = 100_000)]
        limit: u64,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        json: bool,
    },
    /// Check the reduction lemmas on GNRP families.
    Lemmas(LemmaArgs),
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    /// Matrix file (text or JSON), `-` for stdin.
    pub matrix: PathBuf,
    /// Field size (default: smallest prime power ≥ n + m - 1).
    #[arg(long)]
    pub q: Option<u64>,
    #[arg(long, value_enum, default_value_t = StrategyArg::Auto)]
    pub strategy: StrategyArg,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    pub budget: u64,
    #[arg(long)]
    pub allow_small_field: bool,
    #[arg(long)]
    pub json: bool,
    /// Also print W in canonical text.
    #[arg(long)]
    pub dump_w: bool,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct FamilyInput {
    /// Root family JSON, `-` for stdin.
    #[arg(long)]
    pub family: Option<PathBuf>,
    /// Support matrix whose root family to use.
    #[arg(long)]
    pub matrix: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub m: usize,
    #[arg(long)]
    pub n: usize,
    /// Degree profile such as `2,2,2` (default: every profile).
    #[arg(long, value_delimiter = ',')]
    pub profile: Option<Vec<usize>>,
    #[arg(long, value_enum, default_value_t = ModeArg::Exhaustive)]
    pub mode: ModeArg,
    #[arg(long, default_value_t = 1000)]
    pub samples: u64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Randomized zero test; flagged cases are rechecked exactly.
    #[arg(long)]
    pub fast: bool,
    /// Enumerate every labeled family instead of orbit representatives.
    #[arg(long)]
    pub raw: bool,
    /// Stop an exhaustive run after this many families.
    #[arg(long)]
    pub budget: Option<u64>,
    /// Write the full report as JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write counterexamples (if any) as JSON.
    #[arg(long)]
    pub counterexamples: Option<PathBuf>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct LemmaArgs {
    #[arg(long)]
    pub m: usize,
    #[arg(long)]
    pub n: usize,
    #[arg(long, value_delimiter = ',')]
    pub profile: Option<Vec<usize>>,
    /// Enumerate orbit representatives instead of sampling.
    #[arg(long)]
    pub exhaustive: bool,
    #[arg(long, default_value_t = 1000)]
    pub samples: u64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Also check the derivative identity on every trace.
    #[arg(long)]
    pub lemma1: bool,
    /// Randomized comparisons for the derivative identity.
    #[arg(long)]
    pub fast: bool,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Policy {
    Lex,
    Reverse,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    Auto,
    Greedy,
    Exhaustive,
    Random,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::Auto => Strategy::Auto,
            StrategyArg::Greedy => Strategy::Greedy,
            StrategyArg::Exhaustive => Strategy::Exhaustive,
            StrategyArg::Random => Strategy::Random,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Exhaustive,
    Random,
}

/// Failure of a command, carrying its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NotMdsCondition { .. }
            | Error::NotFound { .. }
            | Error::FieldTooSmall { .. }
            | Error::FieldBelowBound { .. }
            | Error::StuckGrp { .. }
            | Error::NotAcceptable { .. } => 1,
            _ => 2,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::usage(e.to_string())
    }
}

type Outcome = std::result::Result<i32, Failure>;

fn read_input(path: &Path) -> Result<String, Failure> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s)?;
        return Ok(s);
    }
    std::fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Failure::usage(e.to_string()))?;
    std::fs::write(path, text + "\n").map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn print_json(out: &mut dyn Write, value: &Value) -> Result<(), Failure> {
    writeln!(out, "{}", serde_json::to_string_pretty(value).expect("serializable"))?;
    Ok(())
}

fn load_family(input: &FamilyInput, allow_loose_n: bool) -> Result<RootFamily, Failure> {
    // The n ≤ m(m-1) bound applies to families given directly; a support
    // matrix fixes n by its width.
    match (&input.family, &input.matrix) {
        (Some(path), _) => {
            let family = parse_family(&read_input(path)?)?;
            family.validate(allow_loose_n)?;
            Ok(family)
        }
        (None, Some(path)) => Ok(to_root_family(&parse_matrix(&read_input(path)?)?)?),
        (None, None) => Err(Failure::usage("one of --family or --matrix is required")),
    }
}

fn cmd_check(matrix: &Path, json_out: bool, out: &mut dyn Write) -> Outcome {
    let m = parse_matrix(&read_input(matrix)?)?;
    let check = mds_condition(&m);
    let witness = check.witness.as_deref().map(one_based);
    if json_out {
        print_json(out, &json!({ "holds": check.holds, "witness": witness }))?;
    } else if check.holds {
        writeln!(out, "MDS condition holds ({}x{})", m.m(), m.n())?;
    } else {
        let rows = witness.unwrap_or_default();
        writeln!(out, "MDS condition fails on rows {rows:?}")?;
    }
    Ok(if check.holds { 0 } else { 1 })
}

fn cmd_build(args: &BuildArgs, out: &mut dyn Write, verbose: u8) -> Outcome {
    let matrix = parse_matrix(&read_input(&args.matrix)?)?;
    let q = args
        .q
        .unwrap_or_else(|| smallest_prime_power((matrix.n() + matrix.m() - 1) as u64));
    let field = make_field(q)?;
    let opts = SearchOptions {
        strategy: args.strategy.into(),
        seed: args.seed,
        budget: args.budget,
        allow_small_field: args.allow_small_field,
    };
    let code = build_code(&matrix, &field, &opts)?;
    if verbose > 0 {
        eprintln!("root family {}", code.family);
    }
    let passed = code.verification.passed;
    if args.json {
        let mut doc = code_to_json(&code);
        doc["seed"] = json!(args.seed);
        if args.dump_w {
            doc["W"] = json!(code.w.to_string());
        }
        print_json(out, &doc)?;
    } else {
        let render = |v: &[crate::fields::FieldElem]| v.iter().map(|&x| field.render(x)).collect::<Vec<_>>().join(" ");
        writeln!(out, "field {field}  seed {}  strategy {:?}", args.seed, args.strategy)?;
        writeln!(out, "points: {}", render(&code.points))?;
        if code.padded() {
            writeln!(out, "padded family: {}", code.family)?;
            writeln!(out, "auxiliary values: {}", render(&code.aux_values))?;
        }
        writeln!(out, "T =\n{}", code.t)?;
        writeln!(out, "G =\n{}", code.g)?;
        writeln!(out, "det T = {}", field.render(code.det_t))?;
        if args.dump_w {
            writeln!(out, "W = {}", code.w)?;
        }
        let v = &code.verification;
        writeln!(
            out,
            "{} minors checked, {} singular, {} fit violations: {}",
            v.minors_checked,
            v.singular_minors.len(),
            v.fit_violations.len(),
            if passed { "verified" } else { "FAILED" }
        )?;
    }
    Ok(if passed { 0 } else { 1 })
}

fn cmd_reduce(family: &RootFamily, policy: Policy, json_out: bool, out: &mut dyn Write) -> Outcome {
    let result = match policy {
        Policy::Lex => reduce(family, TieBreak::Lex).map(|t| vec![t]),
        Policy::Reverse => reduce(family, TieBreak::Reverse).map(|t| vec![t]),
        Policy::All => reduce_all(family),
    };
    let traces = match result {
        Ok(t) => t,
        Err(Error::StuckGrp { first, second }) => {
            if json_out {
                print_json(out, &json!({ "status": "stuck", "witness": [first + 1, second + 1] }))?;
            } else {
                writeln!(out, "stuck: P{} and P{} are identical of degree m-1", first + 1, second + 1)?;
            }
            return Ok(1);
        }
        Err(e) => return Err(e.into()),
    };
    if json_out {
        let traces: Vec<Value> = traces.iter().map(trace_json).collect();
        print_json(out, &json!({ "status": "accepted", "traces": traces }))?;
    } else {
        for (i, t) in traces.iter().enumerate() {
            if traces.len() > 1 {
                writeln!(out, "outcome {}:", i + 1)?;
            }
            writeln!(out, "{t}")?;
        }
    }
    Ok(0)
}

fn cmd_verify(args: &VerifyArgs, out: &mut dyn Write) -> Outcome {
    let scope = Scope {
        m: args.m,
        n: args.n,
        profile: args.profile.clone(),
        mode: match args.mode {
            ModeArg::Exhaustive => Mode::Exhaustive,
            ModeArg::Random => Mode::Random,
        },
        samples: args.samples,
        seed: args.seed,
        fast: args.fast,
        canonical: !args.raw,
        budget: args.budget,
    };
    let report = run_suite(&scope)?;
    if let Some(path) = &args.out {
        write_json(path, &report)?;
    }
    if let Some(path) = &args.counterexamples {
        if !report.counterexamples.is_empty() {
            write_json(path, &report.counterexamples)?;
        }
    }
    if args.json {
        print_json(out, &serde_json::to_value(&report).expect("serializable"))?;
    } else {
        let c = &report.counts;
        writeln!(out, "seed {}  m={} n={} mode {:?}", args.seed, args.m, args.n, scope.mode)?;
        writeln!(
            out,
            "tested {}  W≡0 {}  GRP {}  counterexamples {}  converse anomalies {}{}",
            c.tested,
            c.w_zero,
            c.grp,
            c.counterexamples,
            c.nonzero_grp,
            if report.truncated { "  (truncated)" } else { "" }
        )?;
        for f in &report.counterexamples {
            writeln!(out, "COUNTEREXAMPLE n={} sets={:?}", f.family.n, f.family.sets)?;
        }
        writeln!(out, "runtime {:.3}s", report.runtime_secs)?;
    }
    Ok(if report.passed() { 0 } else { 1 })
}

fn cmd_fact1(m: usize, n: usize, limit: u64, seed: u64, json_out: bool, out: &mut dyn Write) -> Outcome {
    let report = check_fact1(m, n, limit, seed)?;
    if json_out {
        let mut doc = serde_json::to_value(&report).expect("serializable");
        doc["seed"] = json!(seed);
        print_json(out, &doc)?;
    } else {
        writeln!(
            out,
            "seed {seed}  m={m} n={n}  {} matrices ({})  MDS condition true on {}  violations {}",
            report.checked,
            if report.exhaustive { "exhaustive" } else { "sampled" },
            report.mds_true,
            report.violations.len()
        )?;
    }
    Ok(if report.violations.is_empty() { 0 } else { 1 })
}

fn cmd_lemmas(args: &LemmaArgs, out: &mut dyn Write) -> Outcome {
    let scope = LemmaScope {
        m: args.m,
        n: args.n,
        profile: args.profile.clone(),
        exhaustive: args.exhaustive,
        samples: args.samples,
        seed: args.seed,
        lemma1: args.lemma1,
        lemma1_fast: args.fast,
    };
    let report = check_reduction_lemmas(&scope)?;
    if args.json {
        print_json(out, &serde_json::to_value(&report).expect("serializable"))?;
    } else {
        writeln!(
            out,
            "seed {}  m={} n={}  families {}  traces {}  derivative checks {}  breaking checks {}  violations {}",
            args.seed,
            args.m,
            args.n,
            report.families,
            report.traces,
            report.lemma1_checked,
            report.lemma6_checked,
            report.violations.len()
        )?;
        for v in &report.violations {
            writeln!(out, "lemma {}: {:?} R={:?}: {}", v.lemma, v.family.sets, v.reduction_set, v.detail)?;
        }
    }
    Ok(if report.passed() { 0 } else { 1 })
}

fn dispatch(cli: &Cli, out: &mut dyn Write) -> Outcome {
    if let Some(t) = cli.threads {
        // A second call in the same process keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    match &cli.command {
        Command::Check { matrix, json } => cmd_check(matrix, *json, out),
        Command::Build(args) => cmd_build(args, out, cli.verbose),
        Command::W { input } => {
            let family = load_family(input, cli.allow_loose_n)?;
            writeln!(out, "{}", family.wdet()?)?;
            Ok(0)
        }
        Command::Reduce { input, policy, json } => {
            let family = load_family(input, cli.allow_loose_n)?;
            cmd_reduce(&family, *policy, *json, out)
        }
        Command::Verify(args) => cmd_verify(args, out),
        Command::Fact1 {
            m,
            n,
            limit,
            seed,
            json,
        } => cmd_fact1(*m, *n, *limit, *seed, *json, out),
        Command::Lemmas(args) => cmd_lemmas(args, out),
    }
}

/// Parses `args` (including the program name), runs the command and
/// returns the exit code. Errors go to stderr.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(&cli, out) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}
