//! The `chainsmith` command line.
//!
//! Exit codes: 0 success, 1 usage or domain error, 2 search budget exhausted
//! or no witness within the length cap, 3 internal verification failure.
//! `--json` output is deterministic for fixed inputs, seed and memo state,
//! whatever `--workers` is.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::{BigInt, BigUint};
use num_traits::Zero;
use serde::Serialize;

use crate::analysis::{
    addition_count_report, alpha_decompose, census, extremal_survey, gap_report, AlphaError,
    ReportError,
};
use crate::chain::{
    classify, evaluate, evaluate_mod, format_chain, parse_chain, Classification, Model, Op, Program,
};
use crate::construct::{brauer_slp, fermat_amc, tower_slp, BrauerPlan};
use crate::equiv::{
    certificate_holds, equal_exact_with, equal_probabilistic_with, ratio_log10, EquivConfig,
    Verdict, DEFAULT_ROUNDS,
};
use crate::search::memo::StoreOutcome;
use crate::search::{
    shortest_program, MemoDb, MemoRecord, SearchError, SearchOptions, SearchResult, SearchStatus,
    MAX_SEARCH_LENGTH,
};

pub const DEFAULT_MEMO_PATH: &str = "chainsmith-memo.jsonl";
/// `eval` refuses programs whose value could pass this many bits.
pub const EVAL_BIT_CAP: u128 = 1 << 28;
const DEEP_GAP_TIME_BUDGET: Duration = Duration::from_secs(600);

#[derive(Debug, Parser)]
#[command(
    name = "chainsmith",
    version,
    about = "Straight-line programs and addition-multiplication chains"
)]
struct Cli {
    /// Emit JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Worker threads for search, enumeration and equality rounds.
    #[arg(long, global = true, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..=256))]
    workers: u16,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate a program exactly or modulo M.
    Eval(EvalArgs),
    /// Build a program with one of the explicit constructions.
    #[command(subcommand)]
    Construct(ConstructCmd),
    /// Shortest program for a value.
    Search(SearchArgs),
    /// Decide whether two programs compute the same integer.
    Equal(EqualArgs),
    /// Fraction of n-bit numbers with short programs.
    Census(CensusArgs),
    /// Largest and second-largest irredundant AMC values.
    Extremal(ExtremalArgs),
    /// α-decomposition of an AMC.
    Alpha(AlphaArgs),
    /// Fewest additions per AMC length for a value.
    Additions(AdditionsArgs),
    /// τ versus τ₊ for 2^(2^n) − 1.
    Gap(GapArgs),
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct ChainInput {
    /// Program file, one step per line.
    #[arg(long)]
    chain_file: Option<PathBuf>,
    /// Inline program, steps separated by `;` or newlines.
    #[arg(long)]
    chain: Option<String>,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[command(flatten)]
    input: ChainInput,
    #[arg(long = "mod", value_parser = clap::value_parser!(u64).range(2..))]
    modulus: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum ConstructCmd {
    /// 2^k-ary construction for Z.
    Brauer {
        #[arg(long, value_parser = parse_biguint)]
        value: BigUint,
        #[arg(long)]
        k: Option<u32>,
    },
    /// 2^(2^n) − 1 in n + 2 steps.
    Tower {
        #[arg(long)]
        n: u32,
    },
    /// 2^(2^n) − 1 as a product of Fermat numbers, 2n steps.
    FermatAmc {
        #[arg(long)]
        n: u32,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModelArg {
    Slp,
    Amc,
}

impl From<ModelArg> for Model {
    fn from(m: ModelArg) -> Model {
        match m {
            ModelArg::Slp => Model::Slp,
            ModelArg::Amc => Model::Amc,
        }
    }
}

#[derive(Debug, Args)]
struct SearchArgs {
    #[arg(long, value_parser = parse_biguint)]
    value: BigUint,
    #[arg(long, value_enum)]
    model: ModelArg,
    #[arg(long, default_value_t = MAX_SEARCH_LENGTH)]
    max_len: usize,
    #[arg(long, default_value = DEFAULT_MEMO_PATH)]
    memo: PathBuf,
    #[arg(long)]
    budget_nodes: Option<u64>,
}

#[derive(Debug, Args)]
struct EqualArgs {
    #[arg(long)]
    left: PathBuf,
    #[arg(long)]
    right: PathBuf,
    #[arg(long, default_value_t = DEFAULT_ROUNDS, value_parser = clap::value_parser!(u32).range(1..))]
    rounds: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Compare exact values instead of fingerprints.
    #[arg(long)]
    exact: bool,
}

#[derive(Debug, Args)]
struct CensusArgs {
    #[arg(long)]
    bits: u32,
    #[arg(long)]
    max_len: usize,
}

#[derive(Debug, Args)]
struct ExtremalArgs {
    #[arg(long)]
    additions: usize,
    #[arg(long)]
    mults: usize,
}

#[derive(Debug, Args)]
struct AlphaArgs {
    #[arg(long)]
    chain_file: PathBuf,
}

#[derive(Debug, Args)]
struct AdditionsArgs {
    #[arg(long, value_parser = parse_biguint)]
    value: BigUint,
    #[arg(long)]
    max_len: usize,
}

#[derive(Debug, Args)]
struct GapArgs {
    #[arg(long)]
    n: u32,
    /// Allow n = 4, with a ten-minute time budget per search.
    #[arg(long)]
    deep: bool,
}

fn parse_biguint(s: &str) -> Result<BigUint, String> {
    s.parse::<BigUint>()
        .map_err(|_| format!("`{s}` is not a nonnegative decimal integer"))
}

/// Failure classes, one per nonzero exit code.
#[derive(Debug)]
enum Failure {
    Domain(String),
    Budget(String),
    Internal(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Domain(_) => 1,
            Failure::Budget(_) => 2,
            Failure::Internal(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Domain(m) | Failure::Budget(m) | Failure::Internal(m) => m,
        }
    }
}

fn domain(e: impl std::fmt::Display) -> Failure {
    Failure::Domain(e.to_string())
}

impl From<ReportError> for Failure {
    fn from(e: ReportError) -> Failure {
        match e {
            ReportError::Search(SearchError::BudgetExhausted) => Failure::Budget(e.to_string()),
            ReportError::Verification(_) => Failure::Internal(e.to_string()),
            _ => domain(e),
        }
    }
}

/// Output collected by a command, plus a nonzero code for results that are
/// still printed (budget exhaustion).
struct Output {
    text: String,
    code: u8,
}

impl Output {
    fn ok(text: String) -> Self {
        Output { text, code: 0 }
    }
}

/// Runs the CLI with stdout and stderr.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(args, out, &mut std::io::stderr())
}

pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let rendered = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = out.write_all(rendered.as_bytes());
                    0
                }
                _ => {
                    let _ = err.write_all(rendered.as_bytes());
                    1
                }
            };
        }
    };
    finish(dispatch(&cli), out, err)
}

fn finish(result: Result<Output, Failure>, out: &mut dyn Write, err: &mut dyn Write) -> u8 {
    match result {
        Ok(output) => {
            let _ = out.write_all(output.text.as_bytes());
            output.code
        }
        Err(failure) => {
            let _ = writeln!(err, "error: {}", failure.message());
            failure.code()
        }
    }
}

fn dispatch(cli: &Cli) -> Result<Output, Failure> {
    let ctx = Ctx {
        json: cli.json,
        workers: cli.workers as usize,
    };
    match &cli.command {
        Command::Eval(a) => ctx.eval(a),
        Command::Construct(c) => ctx.construct(c),
        Command::Search(a) => ctx.search(a),
        Command::Equal(a) => ctx.equal(a),
        Command::Census(a) => ctx.census(a),
        Command::Extremal(a) => ctx.extremal(a),
        Command::Alpha(a) => ctx.alpha(a),
        Command::Additions(a) => ctx.additions(a),
        Command::Gap(a) => ctx.gap(a),
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

fn read_program(path: &Path) -> Result<Program, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Domain(format!("{}: {e}", path.display())))?;
    parse_chain(&text).map_err(|e| Failure::Domain(format!("{}: {e}", path.display())))
}

fn read_input(input: &ChainInput) -> Result<Program, Failure> {
    match (&input.chain_file, &input.chain) {
        (Some(path), _) => read_program(path),
        (None, Some(inline)) => parse_chain(&inline.replace(';', "\n")).map_err(domain),
        (None, None) => Err(Failure::Domain("no program given".into())),
    }
}

/// Bit-length upper bound of every register, saturating.
fn bit_bound(p: &Program) -> u128 {
    let mut bits: Vec<u128> = vec![1];
    for s in p.steps() {
        let (a, b) = (bits[s.lhs], bits[s.rhs]);
        bits.push(match s.op {
            Op::Add | Op::Sub => a.max(b).saturating_add(1),
            Op::Mul => a.saturating_add(b),
        });
    }
    bits.into_iter().max().unwrap_or(1)
}

struct Ctx {
    json: bool,
    workers: usize,
}

#[derive(Serialize)]
struct EvalJson {
    length: usize,
    model: Model,
    additions: usize,
    subtractions: usize,
    multiplications: usize,
    irredundant: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    value: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    trace: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    modulus: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    residue: Option<u64>,
}

#[derive(Serialize)]
struct ConstructJson {
    construction: &'static str,
    #[serde(with = "crate::json::decimal")]
    value: BigUint,
    length: usize,
    length_bound: u64,
    chain: Program,
    #[serde(skip_serializing_if = "Option::is_none")]
    plan: Option<BrauerPlan>,
}

#[derive(Serialize)]
struct MemoJson {
    hit: bool,
    recorded: &'static str,
}

#[derive(Serialize)]
struct SearchJson<'a> {
    #[serde(flatten)]
    result: &'a SearchResult,
    memo: MemoJson,
}

#[derive(Serialize)]
struct ExactJson {
    method: &'static str,
    equal: bool,
}

impl Ctx {
    fn eval(&self, a: &EvalArgs) -> Result<Output, Failure> {
        let p = read_input(&a.input)?;
        let small = bit_bound(&p) <= EVAL_BIT_CAP;
        // the irredundancy check compares exact values
        let c = if small {
            classify(&p)
        } else {
            let count = |op| p.steps().iter().filter(|s| s.op == op).count();
            Classification {
                model: p.model(),
                additions: count(Op::Add),
                subtractions: count(Op::Sub),
                multiplications: count(Op::Mul),
                irredundant: None,
            }
        };
        let mut report = EvalJson {
            length: p.len(),
            model: c.model,
            additions: c.additions,
            subtractions: c.subtractions,
            multiplications: c.multiplications,
            irredundant: c.irredundant,
            value: None,
            trace: None,
            modulus: None,
            residue: None,
        };
        match a.modulus {
            Some(m) => {
                report.modulus = Some(m);
                report.residue = Some(evaluate_mod(&p, m).map_err(domain)?);
            }
            None => {
                if !small {
                    return Err(Failure::Domain(format!(
                        "value may exceed {EVAL_BIT_CAP} bits; use --mod"
                    )));
                }
                let (value, trace) = evaluate(&p);
                report.value = Some(value.to_string());
                report.trace = Some(trace.values.iter().map(BigInt::to_string).collect());
            }
        }
        if self.json {
            return Ok(Output::ok(to_json(&report)));
        }
        let mut s = String::new();
        if let (Some(m), Some(r)) = (report.modulus, report.residue) {
            let _ = writeln!(s, "residue: {r} (mod {m})");
        }
        if let (Some(v), Some(t)) = (&report.value, &report.trace) {
            let _ = writeln!(s, "value: {v}");
            let _ = writeln!(s, "trace: {}", t.join(" "));
        }
        let _ = writeln!(
            s,
            "length: {} ({}; {} add, {} sub, {} mul)",
            report.length,
            report.model,
            report.additions,
            report.subtractions,
            report.multiplications
        );
        if let Some(irr) = report.irredundant {
            let _ = writeln!(s, "irredundant: {irr}");
        }
        Ok(Output::ok(s))
    }

    fn construct(&self, c: &ConstructCmd) -> Result<Output, Failure> {
        let report = match c {
            ConstructCmd::Brauer { value, k } => {
                let (chain, plan) = brauer_slp(value, *k).map_err(domain)?;
                if plan.value() != *value {
                    return Err(Failure::Internal(
                        "plan limbs do not reassemble the target".into(),
                    ));
                }
                ConstructJson {
                    construction: "brauer",
                    value: value.clone(),
                    length: chain.len(),
                    length_bound: plan.length_bound(),
                    chain,
                    plan: Some(plan),
                }
            }
            ConstructCmd::Tower { n } => {
                let chain = tower_slp(*n).map_err(domain)?;
                ConstructJson {
                    construction: "tower",
                    value: fermat_target(*n, &chain)?,
                    length: chain.len(),
                    length_bound: *n as u64 + 2,
                    chain,
                    plan: None,
                }
            }
            ConstructCmd::FermatAmc { n } => {
                let chain = fermat_amc(*n).map_err(domain)?;
                ConstructJson {
                    construction: "fermat-amc",
                    value: fermat_target(*n, &chain)?,
                    length: chain.len(),
                    length_bound: 2 * *n as u64,
                    chain,
                    plan: None,
                }
            }
        };
        if report.length as u64 > report.length_bound {
            return Err(Failure::Internal(format!(
                "{} chain has {} steps, above its bound {}",
                report.construction, report.length, report.length_bound
            )));
        }
        if self.json {
            return Ok(Output::ok(to_json(&report)));
        }
        let mut s = format_chain(&report.chain);
        let _ = writeln!(s, "# {} value {}", report.construction, report.value);
        let _ = writeln!(
            s,
            "# length {} (bound {})",
            report.length, report.length_bound
        );
        if let Some(plan) = &report.plan {
            let _ = writeln!(s, "# n {} k {} m {} r {}", plan.n, plan.k, plan.m, plan.r);
        }
        Ok(Output::ok(s))
    }

    fn search(&self, a: &SearchArgs) -> Result<Output, Failure> {
        let model = Model::from(a.model);
        if a.max_len > MAX_SEARCH_LENGTH {
            return Err(domain(SearchError::LengthCap(a.max_len)));
        }
        let (mut db, _) = MemoDb::load(&a.memo, false).map_err(domain)?;

        let cached = db
            .get(&a.value, model)
            .filter(|r| r.optimal && r.length <= a.max_len)
            .cloned();
        let (result, hit) = match cached {
            Some(record) => {
                let (_, witness) = record
                    .validate()
                    .map_err(|e| Failure::Internal(format!("memo record: {e}")))?;
                let result = SearchResult {
                    target: a.value.clone(),
                    model,
                    length: record.length,
                    witness,
                    proven_optimal: true,
                    status: SearchStatus::Optimal,
                    refuted_below: record.length,
                    nodes_expanded: 0,
                    dedup_hits: 0,
                };
                (result, true)
            }
            None => {
                let mut opts = SearchOptions::new(model)
                    .with_max_length(a.max_len)
                    .with_workers(self.workers);
                opts.node_budget = a.budget_nodes;
                (shortest_program(&a.value, &opts).map_err(domain)?, false)
            }
        };

        let (value, _) = evaluate(&result.witness);
        if value != BigInt::from(a.value.clone())
            || (model == Model::Amc && result.witness.has_subtraction())
        {
            return Err(Failure::Internal(
                "search witness does not compute the target".into(),
            ));
        }

        let recorded = if hit || !result.proven_optimal {
            "unchanged"
        } else {
            match db.store(MemoRecord::from_result(&result)).map_err(domain)? {
                StoreOutcome::Rejected => "unchanged",
                outcome => {
                    db.save(&a.memo).map_err(domain)?;
                    if outcome == StoreOutcome::Inserted {
                        "inserted"
                    } else {
                        "replaced"
                    }
                }
            }
        };

        let code = match result.status {
            SearchStatus::Optimal => 0,
            SearchStatus::BudgetExhausted | SearchStatus::InfeasibleAtCap => 2,
        };
        let text = if self.json {
            to_json(&SearchJson {
                result: &result,
                memo: MemoJson { hit, recorded },
            })
        } else {
            let mut s = String::new();
            let name = if model == Model::Slp {
                "tau"
            } else {
                "tau_plus"
            };
            let status = match result.status {
                SearchStatus::Optimal => "optimal",
                SearchStatus::InfeasibleAtCap => "no witness within the length cap",
                SearchStatus::BudgetExhausted => "budget exhausted",
            };
            let _ = writeln!(s, "{name}({}) = {} ({status})", a.value, result.length);
            let _ = writeln!(s, "refuted below: {}", result.refuted_below);
            let _ = writeln!(
                s,
                "nodes: {} (dedup hits {})",
                result.nodes_expanded, result.dedup_hits
            );
            let _ = writeln!(s, "memo: {}", if hit { "hit" } else { recorded });
            s.push_str(&format_chain(&result.witness));
            s
        };
        Ok(Output { text, code })
    }

    fn equal(&self, a: &EqualArgs) -> Result<Output, Failure> {
        let left = read_program(&a.left)?;
        let right = read_program(&a.right)?;
        let config = EquivConfig {
            workers: self.workers,
            ..EquivConfig::default()
        };
        if a.exact {
            let equal = equal_exact_with(&left, &right, &config).map_err(domain)?;
            let report = ExactJson {
                method: "exact",
                equal,
            };
            return Ok(Output::ok(if self.json {
                to_json(&report)
            } else {
                format!("{}\n", if equal { "equal" } else { "not equal" })
            }));
        }
        let verdict =
            equal_probabilistic_with(&left, &right, a.rounds, a.seed, &config).map_err(domain)?;
        if verdict.verdict == Verdict::NotEqual && !certificate_holds(&left, &right, &verdict) {
            return Err(Failure::Internal(
                "inequality certificate does not verify".into(),
            ));
        }
        if self.json {
            return Ok(Output::ok(to_json(&verdict)));
        }
        let mut s = String::new();
        match (verdict.witness_modulus, verdict.residues) {
            (Some(p), Some((l, r))) => {
                let _ = writeln!(s, "not equal");
                let _ = writeln!(s, "certificate: left = {l}, right = {r} (mod {p})");
                let _ = writeln!(s, "rounds used: {}", verdict.rounds_used);
            }
            _ => {
                let _ = writeln!(s, "equal");
                let _ = writeln!(s, "rounds used: {}", verdict.rounds_used);
                if verdict.error_bound.is_zero() {
                    let _ = writeln!(s, "error bound: 0 (identical programs)");
                } else {
                    let _ = writeln!(
                        s,
                        "error bound: 10^{:.2} (exact rational in --json)",
                        ratio_log10(&verdict.error_bound)
                    );
                }
            }
        }
        Ok(Output::ok(s))
    }

    fn census(&self, a: &CensusArgs) -> Result<Output, Failure> {
        let r = census(a.bits, a.max_len)?;
        if r.per_length.iter().any(|l| !l.within_bound) {
            return Err(Failure::Internal(
                "a per-length count exceeds the counting bound".into(),
            ));
        }
        if self.json {
            return Ok(Output::ok(to_json(&r)));
        }
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{}-bit range [2^{}, 2^{}): {} of {} computable within {} steps ({:.6})",
            a.bits + 1,
            a.bits,
            a.bits + 1,
            r.computable_count,
            r.total,
            r.max_len,
            r.fraction
        );
        if r.lower_bound_only {
            let _ = writeln!(s, "enumeration truncated: counts are lower bounds");
        }
        let _ = writeln!(s, "length  new  cumulative  bound");
        for l in &r.per_length {
            let bound = l
                .count_bound
                .as_ref()
                .map_or("-".to_string(), |b| b.to_string());
            let _ = writeln!(
                s,
                "{:>6}  {:>3}  {:>10}  {bound}",
                l.length, l.new_values, l.cumulative
            );
        }
        Ok(Output::ok(s))
    }

    fn extremal(&self, a: &ExtremalArgs) -> Result<Output, Failure> {
        let r = extremal_survey(a.additions, a.mults).map_err(domain)?;
        if !r.max_matches {
            return Err(Failure::Internal(format!(
                "enumerated maximum {} differs from 2^(a*2^m) = {}",
                r.max_value, r.max_formula
            )));
        }
        if self.json {
            return Ok(Output::ok(to_json(&r)));
        }
        let opt = |v: &Option<BigUint>| v.as_ref().map_or("-".to_string(), |v| v.to_string());
        let mut s = String::new();
        let _ = writeln!(
            s,
            "a = {}, m = {}: {} irredundant AMCs, {} distinct values",
            r.a, r.m, r.programs, r.distinct_values
        );
        let _ = writeln!(s, "max: {} (2^(a*2^m) = {})", r.max_value, r.max_formula);
        s.push_str(&format_chain(&r.max_witness));
        let _ = writeln!(s, "second: {}", opt(&r.second_value));
        if let Some(w) = &r.second_witness {
            s.push_str(&format_chain(w));
        }
        let ce = &r.candidate_exponents;
        for (label, cands, best) in [
            ("re-derived", &ce.rederived, &ce.rederived_second),
            ("printed", &ce.printed, &ce.printed_second),
        ] {
            let _ = writeln!(s, "{label} candidates (max {}):", opt(best));
            for c in cands {
                let _ = writeln!(s, "  2^({}) = {}", c.formula, opt(&c.value));
            }
        }
        let _ = writeln!(
            s,
            "second matches re-derived: {}, printed: {}",
            r.second_matches_rederived, r.second_matches_printed
        );
        Ok(Output::ok(s))
    }

    fn alpha(&self, a: &AlphaArgs) -> Result<Output, Failure> {
        let p = read_program(&a.chain_file)?;
        let d = alpha_decompose(&p).map_err(|e| match e {
            AlphaError::Mismatch { .. } => Failure::Internal(e.to_string()),
            _ => domain(e),
        })?;
        if self.json {
            return Ok(Output::ok(to_json(&d)));
        }
        let mut s = String::new();
        let alphas: Vec<String> = d.alphas.iter().map(BigUint::to_string).collect();
        let _ = writeln!(s, "value: {}", d.value);
        let _ = writeln!(s, "alphas: {}", alphas.join(" "));
        let _ = writeln!(s, "addition steps: {:?}", d.addition_positions);
        if let Some(c) = d.c_exponent {
            let _ = writeln!(s, "alpha_2 = 2^{c} + 1");
        }
        for (reg, e) in d.exponents.iter().enumerate() {
            let _ = writeln!(s, "r{reg}: {e:?}");
        }
        Ok(Output::ok(s))
    }

    fn additions(&self, a: &AdditionsArgs) -> Result<Output, Failure> {
        if a.value.is_zero() {
            return Err(Failure::Domain("value must be at least 1".into()));
        }
        let opts = SearchOptions::new(Model::Amc).with_workers(self.workers);
        let r = addition_count_report(&a.value, a.max_len, &opts)?;
        let code = if r.partial { 2 } else { 0 };
        let text = if self.json {
            to_json(&r)
        } else {
            let mut s = String::new();
            let _ = writeln!(
                s,
                "fewest additions per AMC length for {} (lengths <= {})",
                r.target, r.max_length
            );
            for row in &r.rows {
                let _ = writeln!(
                    s,
                    "length {}: {} additions, {} multiplications",
                    row.length, row.min_additions, row.multiplications
                );
                s.push_str(&format_chain(&row.witness));
            }
            if r.rows.is_empty() {
                let _ = writeln!(s, "no AMC within the cap");
            }
            if r.partial {
                let _ = writeln!(s, "budget exhausted: report is partial");
            }
            s
        };
        Ok(Output { text, code })
    }

    fn gap(&self, a: &GapArgs) -> Result<Output, Failure> {
        let mut opts = SearchOptions::new(Model::Slp).with_workers(self.workers);
        if a.deep {
            opts.time_budget = Some(DEEP_GAP_TIME_BUDGET);
        }
        let r = gap_report(a.n, a.deep, &opts)?;
        if self.json {
            return Ok(Output::ok(to_json(&r)));
        }
        let mut s = String::new();
        let _ = writeln!(s, "target 2^(2^{}) - 1 = {}", r.n, r.target);
        let _ = writeln!(
            s,
            "tau = {} (upper bound n+2 = {})",
            r.tau, r.tau_upper_bound
        );
        s.push_str(&format_chain(&r.tau_witness));
        let _ = writeln!(
            s,
            "tau_plus = {} (upper bound 2n = {}, asymptotic prediction n+3 = {})",
            r.tau_plus, r.tau_plus_upper_bound, r.predicted_tau_plus
        );
        s.push_str(&format_chain(&r.tau_plus_witness));
        let _ = writeln!(s, "gap = {}", r.gap);
        if let Some(m) = r.min_additions_among_optimal_amcs {
            let _ = writeln!(s, "fewest additions in an optimal AMC: {m}");
        }
        Ok(Output::ok(s))
    }
}

fn fermat_target(n: u32, chain: &Program) -> Result<BigUint, Failure> {
    let target = (BigUint::from(1u32) << (1u64 << n)) - 1u32;
    // only checked when the value is small enough to build
    if n <= 24 && evaluate(chain).0 != BigInt::from(target.clone()) {
        return Err(Failure::Internal(format!(
            "chain for n = {n} misses 2^(2^n) - 1"
        )));
    }
    Ok(target)
}
