//! `sleepcomb`: verifiers, reductions and sleeping games from the command line.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

use sleepcomb::disjunctions::{best_disjunction, Disjunction, LabeledStream};
use sleepcomb::extensible::{extend_with, verify_property1, verify_property2, MinCutGadget};
use sleepcomb::hard::{build_hard, verify_heaviness, verify_richness, verify_special_heaviness, Verdict, VerifyOptions};
use sleepcomb::learners::{make_learner, LearnerConfig, LearnerKind};
use sleepcomb::problems::random::{random_instance, random_losses, random_sleeping, RandomAdversary};
use sleepcomb::problems::{min_by_enumeration, Graph};
use sleepcomb::reductions::{
    check_chain, disjunction_losses, has_collision, verify_dphi_round, DisjunctionLearner, PatternMode,
    PerActionWrapper,
};
use sleepcomb::{
    best_ranking_bruteforce, per_action_regret, ranking_regret, run_game, FamilyKind, GameHistory, LossFunction,
    LossRange, ProblemInstance, DEFAULT_ENUM_CAP, Q,
};

const CSV_HELP: &str = "\
CSV columns (one row per round, rounds 1-based):
  round,skipped,chosen_action,sleeping,algo_loss
  skipped is 0/1; label lists are ';'-joined; losses are exact rationals.
  reduce-disjunction appends x,y,y_hat,mistake; reduce-per-action appends bits.
Each run prints one key=value summary line and writes a JSON sidecar
(\"schema\": 1) next to the CSV, or to --json.
SLEEPCOMB_ENUM_CAP overrides the enumeration cap (default 100000).
Exit codes: 0 pass, 1 verification failure, 2 usage error.";

#[derive(Parser)]
#[command(name = "sleepcomb", version, about = "Online sleeping combinatorial optimization", after_help = CSV_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check heaviness and richness of hard instances.
    VerifyHard(VerifyHardArgs),
    /// Check both extensible-structure properties.
    VerifyExtensible(VerifyExtArgs),
    /// Learn disjunctions through a sleeping learner on a hard instance.
    ReduceDisjunction(DisjArgs),
    /// Run a ranking learner through the per-action wrapper.
    ReducePerAction(PerActionArgs),
    /// Play a sleeping game against a random adversary.
    RunGame(GameArgs),
    /// Brute-force oracle checks.
    Oracle(OracleArgs),
}

#[derive(Args, Clone)]
struct Outputs {
    /// Per-round CSV path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON sidecar path (default: the CSV path with a .json extension).
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct Trials {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Runs seeds seed..seed+K in parallel; output files get a .seed<S> suffix.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    trials: u64,
}

#[derive(Args)]
struct VerifyHardArgs {
    /// Family, or all.
    #[arg(long, default_value = "all")]
    family: String,
    /// Parameter n; default runs 1 through 4.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    n: Option<u64>,
    #[arg(long, default_value_t = VerifyOptions::default().budget)]
    budget: usize,
    #[arg(long, default_value_t = VerifyOptions::default().samples)]
    samples: usize,
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyExtArgs {
    #[arg(long, default_value = "all")]
    family: String,
    /// Base parameter n; default runs 1 and 2.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    n: Option<u64>,
    /// Number of bit pairs; default runs 1 through 3.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    p: Option<u64>,
    /// Use two parallel s-t edges per bit for min cut.
    #[arg(long)]
    paper_mincut_gadget: bool,
    #[arg(long, default_value_t = VerifyOptions::default().budget)]
    budget: usize,
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct DisjArgs {
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..=10))]
    n: u64,
    #[arg(long, default_value = "k-subsets")]
    family: FamilyKind,
    /// hedge, ftl or random.
    #[arg(long, default_value = "hedge")]
    learner: LearnerKind,
    /// iid-realizable, iid-noisy:<q> or file:<path>.
    #[arg(long, default_value = "iid-realizable")]
    adversary: String,
    /// Target disjunction for i.i.d. streams, e.g. "x1|!x3" (default: drawn from the seed).
    #[arg(long)]
    target: Option<String>,
    /// Comma-separated P[x(i)=1] per coordinate (default 0.5 each).
    #[arg(long)]
    probs: Option<String>,
    #[arg(long = "T", value_parser = clap::value_parser!(u64).range(1..))]
    t: Option<u64>,
    #[arg(long)]
    eta: Option<f64>,
    #[command(flatten)]
    trials: Trials,
    #[command(flatten)]
    outputs: Outputs,
}

#[derive(Args, Clone)]
struct PerActionArgs {
    #[arg(long)]
    family: FamilyKind,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    n: u64,
    #[arg(long = "T", value_parser = clap::value_parser!(u64).range(1..))]
    t: u64,
    #[arg(long, default_value = "ftl")]
    inner: LearnerKind,
    /// det or iid.
    #[arg(long, default_value = "det")]
    mode: String,
    /// Pattern width multiplier in iid mode.
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..))]
    multiplier: u64,
    #[arg(long, default_value_t = 0.3)]
    sleep_rate: f64,
    #[arg(long)]
    eta: Option<f64>,
    #[command(flatten)]
    trials: Trials,
    #[command(flatten)]
    outputs: Outputs,
}

#[derive(Args, Clone)]
struct GameArgs {
    #[arg(long)]
    family: FamilyKind,
    /// Hard-instance parameter, ignored with --graph.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    n: u64,
    /// Graph file for graph families.
    #[arg(long)]
    graph: Option<PathBuf>,
    #[arg(long, default_value = "hedge")]
    learner: LearnerKind,
    #[arg(long = "T", value_parser = clap::value_parser!(u64).range(1..))]
    t: u64,
    #[arg(long, default_value_t = 0.3)]
    sleep_rate: f64,
    /// Losses in [-1, 1] instead of [0, 1].
    #[arg(long)]
    signed: bool,
    #[arg(long)]
    eta: Option<f64>,
    #[command(flatten)]
    trials: Trials,
    #[command(flatten)]
    outputs: Outputs,
}

#[derive(Args)]
struct OracleArgs {
    /// Solver/enumeration equivalence for a family, or all.
    #[arg(long, default_value = "all")]
    family: String,
    #[arg(long, default_value_t = 100)]
    instances: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Exhaustive D_phi check for n = 1 through N instead.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..=8))]
    dphi: Option<u64>,
    /// Best disjunction in hindsight for a stream file instead.
    #[arg(long)]
    stream: Option<PathBuf>,
    #[arg(long)]
    json: Option<PathBuf>,
}

/// A bad flag value; exits with status 2.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

/// Ordered summary fields.
#[derive(Default)]
struct Report(Vec<(String, Value)>);

impl Report {
    fn put(&mut self, key: &str, value: impl Into<Value>) {
        self.0.push((key.to_string(), value.into()));
    }

    fn line(&self) -> String {
        self.0
            .iter()
            .map(|(k, v)| {
                let s = match v {
                    Value::String(s) if !s.is_empty() && !s.contains(char::is_whitespace) => s.clone(),
                    other => other.to_string(),
                };
                format!("{k}={s}")
            })
            .collect::<Vec<_>>()
            .join(" ")
    }

    fn json(&self) -> Value {
        let mut m = Map::new();
        m.insert("schema".into(), json!(1));
        for (k, v) in &self.0 {
            m.insert(k.clone(), v.clone());
        }
        Value::Object(m)
    }
}

fn enum_cap() -> Result<usize> {
    match std::env::var("SLEEPCOMB_ENUM_CAP") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&c| c > 0)
            .ok_or_else(|| usage(format!("SLEEPCOMB_ENUM_CAP must be a positive integer, got {v:?}"))),
        Err(_) => Ok(DEFAULT_ENUM_CAP),
    }
}

fn families(spec: &str) -> Result<Vec<FamilyKind>> {
    if spec == "all" {
        return Ok(FamilyKind::ALL.to_vec());
    }
    Ok(vec![spec.parse().map_err(|e| usage(format!("{e}")))?])
}

fn suffixed(path: &Path, seed: u64, trials: u64) -> PathBuf {
    if trials == 1 {
        return path.to_path_buf();
    }
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}.seed{seed}.{}", ext.to_string_lossy()),
        None => format!("{stem}.seed{seed}"),
    };
    path.with_file_name(name)
}

/// Where this trial writes its CSV and JSON.
fn trial_paths(outputs: &Outputs, seed: u64, trials: u64) -> (Option<PathBuf>, Option<PathBuf>) {
    let csv = outputs.out.as_ref().map(|p| suffixed(p, seed, trials));
    let json = match (&outputs.json, &csv) {
        (Some(j), _) => Some(suffixed(j, seed, trials)),
        (None, Some(c)) => Some(c.with_extension("json")),
        (None, None) => None,
    };
    (csv, json)
}

fn write_json(path: Option<&Path>, report: &Report) -> Result<()> {
    if let Some(p) = path {
        let text = serde_json::to_string_pretty(&report.json())?;
        fs::write(p, text + "\n").with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(())
}

fn write_csv(path: Option<&Path>, bytes: Vec<u8>) -> Result<()> {
    if let Some(p) = path {
        fs::write(p, bytes).with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(())
}

/// Runs one trial per seed on scoped threads and prints the summaries in
/// seed order. Returns whether every trial passed.
fn run_trials<F>(trials: &Trials, run: F) -> Result<bool>
where
    F: Fn(u64) -> Result<(bool, Report)> + Sync,
{
    let seeds: Vec<u64> = (0..trials.trials).map(|i| trials.seed + i).collect();
    let results: Vec<Result<(bool, Report)>> = if seeds.len() == 1 {
        vec![run(seeds[0])]
    } else {
        std::thread::scope(|scope| {
            let run = &run;
            let handles: Vec<_> = seeds.iter().map(|&s| scope.spawn(move || run(s))).collect();
            handles.into_iter().map(|h| h.join().expect("trial thread panicked")).collect()
        })
    };
    let mut all = true;
    for r in results {
        let (ok, report) = r?;
        println!("{}", report.line());
        all &= ok;
    }
    Ok(all)
}

fn print_verdict(v: &Verdict, context: &str) {
    let status = if v.holds { "PASS" } else { "FAIL" };
    let mode = format!("{:?}", v.mode).to_lowercase();
    match &v.counterexample {
        Some(c) => println!("{status} {} {context} mode={mode} checked={} counterexample={{{c}}}", v.property, v.checked),
        None => println!("{status} {} {context} mode={mode} checked={}", v.property, v.checked),
    }
}

fn verify_hard_cmd(a: &VerifyHardArgs) -> Result<bool> {
    let cap = enum_cap()?;
    let opts = VerifyOptions { budget: a.budget, samples: a.samples, ..VerifyOptions::default() };
    let ns: Vec<usize> = match a.n {
        Some(n) => vec![n as usize],
        None => (1..=4).collect(),
    };
    let start = Instant::now();
    let (mut ok, mut checks, mut failures) = (true, 0usize, Vec::new());
    let mut records = Vec::new();
    for family in families(&a.family)? {
        for &n in &ns {
            let mut hi = build_hard(family, n)?;
            hi.instance = hi.instance.with_enum_cap(cap);
            let ctx = format!("family={family} n={n}");
            for v in [verify_heaviness(&hi, &opts)?, verify_richness(&hi)?] {
                print_verdict(&v, &ctx);
                checks += 1;
                if !v.holds {
                    ok = false;
                    failures.push(format!("{family}:{n}:{}", v.property));
                }
                records.push(json!({"family": family.name(), "n": n, "verdict": v}));
            }
            let info = verify_special_heaviness(&hi, &opts)?;
            println!(
                "INFO special-heaviness {ctx} holds={} counterexample={}",
                info.holds,
                info.counterexample.as_deref().map(|c| format!("{{{c}}}")).unwrap_or_else(|| "none".into())
            );
            records.push(json!({"family": family.name(), "n": n, "verdict": info}));
        }
    }
    let mut r = Report::default();
    r.put("command", "verify-hard");
    r.put("family", a.family.clone());
    r.put("checks", checks);
    r.put("failures", failures.len());
    r.put("pass", ok);
    r.put("elapsed_ms", start.elapsed().as_millis() as u64);
    println!("{}", r.line());
    r.put("verdicts", Value::Array(records));
    write_json(a.json.as_deref(), &r)?;
    Ok(ok)
}

fn verify_ext_cmd(a: &VerifyExtArgs) -> Result<bool> {
    let cap = enum_cap()?;
    let opts = VerifyOptions { budget: a.budget, ..VerifyOptions::default() };
    let ns: Vec<usize> = a.n.map_or((1..=2).collect(), |n| vec![n as usize]);
    let ps: Vec<usize> = a.p.map_or((1..=3).collect(), |p| vec![p as usize]);
    let gadget = if a.paper_mincut_gadget { MinCutGadget::Parallel } else { MinCutGadget::Series };
    let (mut ok, mut checks) = (true, 0usize);
    let mut records = Vec::new();
    for family in families(&a.family)? {
        for &n in &ns {
            let base = build_hard(family, n)?.instance.with_enum_cap(cap);
            for &p in &ps {
                let ext = extend_with(&base, p, gadget)?;
                let ctx = format!("family={family} n={n} p={p}");
                for v in [verify_property1(&ext, &opts)?, verify_property2(&ext, &opts)?] {
                    print_verdict(&v, &ctx);
                    checks += 1;
                    ok &= v.holds;
                    records.push(json!({"family": family.name(), "n": n, "p": p, "verdict": v}));
                }
            }
        }
    }
    let mut r = Report::default();
    r.put("command", "verify-extensible");
    r.put("family", a.family.clone());
    r.put("gadget", if a.paper_mincut_gadget { "parallel" } else { "series" });
    r.put("checks", checks);
    r.put("pass", ok);
    println!("{}", r.line());
    r.put("verdicts", Value::Array(records));
    write_json(a.json.as_deref(), &r)?;
    Ok(ok)
}

fn with_eta(kind: LearnerKind, eta: Option<f64>) -> Result<LearnerKind> {
    match (kind, eta) {
        (_, Some(e)) if !(e.is_finite() && e > 0.0) => Err(usage(format!("--eta must be positive, got {e}"))),
        (LearnerKind::SleepingHedge { .. }, Some(e)) => Ok(LearnerKind::SleepingHedge { eta: Some(e) }),
        (_, Some(_)) => Err(usage("--eta applies to the hedge learner only")),
        (k, None) => Ok(k),
    }
}

fn parse_probs(spec: Option<&str>, n: usize) -> Result<Vec<f64>> {
    let Some(spec) = spec else { return Ok(vec![0.5; n]) };
    let probs: Vec<f64> = spec
        .split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|_| usage(format!("bad probability {s:?}"))))
        .collect::<Result<_>>()?;
    if probs.len() != n || probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
        bail!(usage(format!("--probs needs {n} values in [0, 1]")));
    }
    Ok(probs)
}

fn bits_field(x: &[bool]) -> String {
    x.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

enum StreamSpec {
    Realizable,
    Noisy(f64),
    File(PathBuf),
}

fn parse_adversary(spec: &str) -> Result<StreamSpec> {
    if spec == "iid-realizable" {
        return Ok(StreamSpec::Realizable);
    }
    if let Some(q) = spec.strip_prefix("iid-noisy:") {
        let q: f64 = q.parse().map_err(|_| usage(format!("bad flip probability in {spec:?}")))?;
        if !(0.0..0.5).contains(&q) {
            bail!(usage(format!("flip probability {q} outside [0, 1/2)")));
        }
        return Ok(StreamSpec::Noisy(q));
    }
    if let Some(p) = spec.strip_prefix("file:") {
        return Ok(StreamSpec::File(PathBuf::from(p)));
    }
    Err(usage(format!("unknown adversary {spec:?} (iid-realizable, iid-noisy:<q>, file:<path>)")))
}

fn random_target(n: usize, seed: u64) -> Disjunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let (mut pos, mut neg) = (Vec::new(), Vec::new());
    for i in 1..=n {
        match rng.gen_range(0..3) {
            1 => pos.push(i),
            2 => neg.push(i),
            _ => {}
        }
    }
    Disjunction::new(n, pos, neg).expect("indices in range")
}

/// Per-action regret of every pattern action in `D_phi` is computed for
/// `n` up to this bound.
const CHAIN_MAX_N: usize = 6;

fn disjunction_cmd(a: &DisjArgs) -> Result<bool> {
    let n = a.n as usize;
    let cap = enum_cap()?;
    let kind = with_eta(a.learner, a.eta)?;
    let spec = parse_adversary(&a.adversary)?;
    let probs = parse_probs(a.probs.as_deref(), n)?;
    let file_stream = match &spec {
        StreamSpec::File(p) => {
            let text = fs::read_to_string(p).map_err(|e| usage(format!("reading {}: {e}", p.display())))?;
            let s = LabeledStream::parse(&text).map_err(|e| usage(format!("{}: {e}", p.display())))?;
            if s.n != n {
                bail!(usage(format!("stream has n={}, --n is {n}", s.n)));
            }
            Some(s)
        }
        _ => None,
    };
    let horizon = match (a.t, &file_stream) {
        (Some(t), Some(s)) if t as usize > s.rounds.len() => {
            bail!(usage(format!("--T {t} exceeds the {} rounds in the stream", s.rounds.len())))
        }
        (Some(t), _) => t as usize,
        (None, Some(s)) => s.rounds.len(),
        (None, None) => bail!(usage("--T is required for i.i.d. adversaries")),
    };
    let fixed_target = match &a.target {
        Some(t) => Some(Disjunction::parse(n, t).map_err(|e| usage(e.to_string()))?),
        None => None,
    };
    run_trials(&a.trials, |seed| {
        let target = fixed_target.clone().unwrap_or_else(|| random_target(n, seed));
        let stream = match &spec {
            StreamSpec::Realizable => LabeledStream::iid_realizable(&target, &probs, horizon, seed)?,
            StreamSpec::Noisy(q) => LabeledStream::iid_noisy(&target, &probs, *q, horizon, seed)?,
            StreamSpec::File(_) => {
                let s = file_stream.clone().expect("file stream loaded");
                LabeledStream::new(s.n, s.rounds[..horizon].to_vec(), s.source)?
            }
        };
        let mut hard = build_hard(a.family, n)?;
        hard.instance = hard.instance.with_enum_cap(cap);
        let config = LearnerConfig { kind, seed, horizon, range: LossRange::Signed };
        let inner = make_learner::<Q>(&hard.instance, &config)?;
        let d_size = hard.instance.count_up_to(cap)?;
        let run = DisjunctionLearner::new(hard, inner).run(&stream)?;

        let (csv_path, json_path) = trial_paths(&a.outputs, seed, a.trials.trials);
        let mut buf = Vec::new();
        run.history.write_csv_with(&mut buf, &["x", "y", "y_hat", "mistake"], |i| {
            let (x, y) = &stream.rounds[i];
            let p = run.predictions[i];
            vec![bits_field(x), u8::from(*y).to_string(), u8::from(p).to_string(), u8::from(p != *y).to_string()]
        })?;
        write_csv(csv_path.as_deref(), buf)?;

        let (best, best_errors) = best_disjunction(&stream)?;
        let loss_violation = run.loss_bound_violation()?;
        let chain = if n <= CHAIN_MAX_N { Some(run.chain_violation()?) } else { None };
        let bound = d_size.map(|d| 4.0 * (n as f64 + 1.0) * (horizon as f64 * (d as f64).ln()).sqrt());
        let ok = loss_violation.is_none() && chain.as_ref().is_none_or(|c| c.is_none());

        let mut r = Report::default();
        r.put("command", "reduce-disjunction");
        r.put("family", a.family.name());
        r.put("n", n);
        r.put("learner", kind.name());
        if let LearnerKind::SleepingHedge { eta } = kind {
            r.put("eta", eta.map_or(Value::from("default"), Value::from));
        }
        r.put("adversary", a.adversary.clone());
        r.put("source", serde_json::to_value(&stream.source)?);
        r.put("target", target.to_string());
        r.put("T", horizon);
        r.put("seed", seed);
        r.put("mistakes", run.mistakes());
        r.put("best_phi", best.to_string());
        r.put("best_errors", best_errors);
        r.put("regret_best", run.regret(&best));
        r.put("regret_target", run.regret(&target));
        r.put("bound", bound.map_or(Value::Null, Value::from));
        r.put("decision_set", d_size.map_or(Value::Null, Value::from));
        if let Some(e) = &run.expected_losses {
            r.put("expected_inner_loss", e.iter().sum::<f64>());
        }
        r.put("loss_bound", loss_violation.map_or("ok".to_string(), |t| format!("violated@{t}")));
        r.put(
            "chain",
            match &chain {
                None => "skipped".to_string(),
                Some(None) => "ok".to_string(),
                Some(Some(phi)) => format!("violated:{phi}"),
            },
        );
        r.put("pass", ok);
        if let Some(p) = &csv_path {
            r.put("csv", p.display().to_string());
        }
        write_json(json_path.as_deref(), &r)?;
        Ok((ok, r))
    })
}

fn parse_mode(mode: &str, seed: u64, multiplier: u64) -> Result<PatternMode> {
    match mode {
        "det" => Ok(PatternMode::Deterministic),
        "iid" => Ok(PatternMode::StochasticIid { seed: seed ^ 0xb175, multiplier: multiplier as usize }),
        _ => Err(usage(format!("unknown mode {mode:?} (det, iid)"))),
    }
}

fn check_rate(rate: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&rate) {
        bail!(usage(format!("--sleep-rate {rate} outside [0, 1]")));
    }
    Ok(())
}

/// Chain checks cost about `|D| * T^2` label operations; past this they are skipped.
const CHAIN_WORK_CAP: usize = 200_000_000;

fn per_action_cmd(a: &PerActionArgs) -> Result<bool> {
    let cap = enum_cap()?;
    let kind = with_eta(a.inner, a.eta)?;
    check_rate(a.sleep_rate)?;
    parse_mode(&a.mode, 0, a.multiplier)?;
    let horizon = a.t as usize;
    run_trials(&a.trials, |seed| {
        let mode = parse_mode(&a.mode, seed, a.multiplier)?;
        let base = build_hard(a.family, a.n as usize)?.instance.with_enum_cap(cap);
        let config = LearnerConfig { kind, seed, horizon, range: LossRange::Unit };
        let mut wrapper = PerActionWrapper::<Q, _>::new(&base, horizon, mode, |d| make_learner::<Q>(d, &config))?;
        let mut adv = RandomAdversary::new(&base, a.sleep_rate, LossRange::Unit, 4, seed);
        let history: GameHistory<Q> = run_game(&base, &mut adv, &mut wrapper, horizon)?;
        let (ext, _, patterns, derived) = wrapper.finish();

        let (csv_path, json_path) = trial_paths(&a.outputs, seed, a.trials.trials);
        let mut buf = Vec::new();
        history.write_csv_with(&mut buf, &["bits"], |i| vec![bits_field(&patterns[i])])?;
        write_csv(csv_path.as_deref(), buf)?;

        let collision = has_collision(&patterns);
        let actions = base.enumerate()?;
        let mut max_regret: Option<(Q, String)> = None;
        for v in &actions {
            let reg = per_action_regret(&history, v)?;
            if max_regret.as_ref().is_none_or(|(m, _)| reg > *m) {
                max_regret = Some((reg, v.to_field()));
            }
        }
        let report = if actions.len().saturating_mul(horizon * horizon) <= CHAIN_WORK_CAP {
            Some(check_chain(&ext, &history, &derived, &patterns)?)
        } else {
            None
        };
        let ok = match &report {
            Some(c) => c.dominance.is_none() && (collision || c.holds()),
            None => true,
        } && (matches!(mode, PatternMode::StochasticIid { .. }) || !collision);

        let mut r = Report::default();
        r.put("command", "reduce-per-action");
        r.put("family", a.family.name());
        r.put("n", a.n);
        r.put("inner", kind.name());
        r.put("mode", a.mode.clone());
        r.put("p", ext.p);
        r.put("T", horizon);
        r.put("seed", seed);
        r.put("total_loss", history.total_algo_loss()?.to_string());
        if let Some((m, v)) = &max_regret {
            r.put("max_per_action_regret", m.to_string());
            r.put("argmax_action", format!("{{{v}}}"));
        }
        r.put("collision", collision);
        match &report {
            Some(c) => {
                r.put("dominance", c.dominance.map_or("ok".to_string(), |t| format!("violated@{t}")));
                r.put("replay", c.replay.as_ref().map_or("ok".to_string(), |v| format!("violated:{{{}}}", v.to_field())));
                r.put("chain", c.chain.as_ref().map_or("ok".to_string(), |v| format!("violated:{{{}}}", v.to_field())));
            }
            None => {
                r.put("dominance", "skipped");
                r.put("replay", "skipped");
                r.put("chain", "skipped");
            }
        }
        r.put("pass", ok);
        if let Some(p) = &csv_path {
            r.put("csv", p.display().to_string());
        }
        write_json(json_path.as_deref(), &r)?;
        Ok((ok, r))
    })
}

fn game_instance(a: &GameArgs, cap: usize) -> Result<ProblemInstance> {
    let inst = match &a.graph {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| usage(format!("reading {}: {e}", path.display())))?;
            let g = Graph::parse(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
            ProblemInstance::from_graph(a.family, g).map_err(|e| usage(e.to_string()))?
        }
        None => build_hard(a.family, a.n as usize)?.instance,
    };
    Ok(inst.with_enum_cap(cap))
}

fn run_game_cmd(a: &GameArgs) -> Result<bool> {
    let cap = enum_cap()?;
    let kind = with_eta(a.learner, a.eta)?;
    check_rate(a.sleep_rate)?;
    let range = if a.signed { LossRange::Signed } else { LossRange::Unit };
    let inst = game_instance(a, cap)?;
    let horizon = a.t as usize;
    run_trials(&a.trials, |seed| {
        let config = LearnerConfig { kind, seed, horizon, range };
        let mut learner = make_learner::<Q>(&inst, &config)?;
        let mut adv = RandomAdversary::new(&inst, a.sleep_rate, range, 4, seed);
        let history: GameHistory<Q> = run_game(&inst, &mut adv, &mut learner, horizon)?;

        let (csv_path, json_path) = trial_paths(&a.outputs, seed, a.trials.trials);
        let mut buf = Vec::new();
        history.write_csv(&mut buf)?;
        write_csv(csv_path.as_deref(), buf)?;

        let mut max_regret: Option<(Q, String)> = None;
        if let Ok(actions) = inst.enumerate() {
            for v in &actions {
                let reg = per_action_regret(&history, v)?;
                if max_regret.as_ref().is_none_or(|(m, _)| reg > *m) {
                    max_regret = Some((reg, v.to_field()));
                }
            }
        }
        let skipped = history.rounds().iter().filter(|r| r.played().is_none()).count();
        let mut r = Report::default();
        r.put("command", "run-game");
        r.put("family", a.family.name());
        if a.graph.is_none() {
            r.put("n", a.n);
        }
        r.put("learner", kind.name());
        r.put("T", horizon);
        r.put("seed", seed);
        r.put("skipped", skipped);
        r.put("total_loss", history.total_algo_loss()?.to_string());
        match &max_regret {
            Some((m, v)) => {
                r.put("max_per_action_regret", m.to_string());
                r.put("argmax_action", format!("{{{v}}}"));
            }
            None => r.put("max_per_action_regret", "skipped"),
        }
        match best_ranking_bruteforce(&history, &inst) {
            Ok((ranking, _)) => r.put("best_ranking_regret", ranking_regret(&history, &ranking, &inst)?.to_string()),
            Err(_) => r.put("best_ranking_regret", "skipped"),
        }
        r.put("pass", true);
        if let Some(p) = &csv_path {
            r.put("csv", p.display().to_string());
        }
        write_json(json_path.as_deref(), &r)?;
        Ok((true, r))
    })
}

fn oracle_cmd(a: &OracleArgs) -> Result<bool> {
    let cap = enum_cap()?;
    let mut r = Report::default();
    r.put("command", "oracle");
    let ok = if let Some(path) = &a.stream {
        let text = fs::read_to_string(path).map_err(|e| usage(format!("reading {}: {e}", path.display())))?;
        let stream = LabeledStream::parse(&text).map_err(|e| usage(e.to_string()))?;
        let (phi, errors) = best_disjunction(&stream)?;
        r.put("mode", "best-disjunction");
        r.put("n", stream.n);
        r.put("T", stream.rounds.len());
        r.put("best_phi", phi.to_string());
        r.put("best_errors", errors);
        true
    } else if let Some(max_n) = a.dphi {
        let mut ok = true;
        let mut checked = 0usize;
        for n in 1..=max_n as usize {
            let mut n_ok = true;
            for phi in sleepcomb::disjunctions::enumerate_disjunctions(n)? {
                for code in 0..1usize << n {
                    let x: Vec<bool> = (0..n).map(|i| code >> i & 1 == 1).collect();
                    checked += 1;
                    let good = match verify_dphi_round(&phi, &x) {
                        Ok((v, _)) => [false, true].into_iter().all(|y| {
                            let awake = v.iter().copied();
                            let loss: Q = disjunction_losses::<Q>(n, y, awake).action_loss(&v).expect("losses on v");
                            loss == Q::from_integer(i64::from(y != phi.eval(&x)))
                        }),
                        Err(_) => false,
                    };
                    if !good {
                        println!("FAIL dphi n={n} phi={phi} x={}", bits_field(&x));
                        n_ok = false;
                    }
                }
            }
            if n_ok {
                println!("PASS dphi n={n}");
            }
            ok &= n_ok;
        }
        r.put("mode", "dphi");
        r.put("max_n", max_n);
        r.put("checked", checked);
        ok
    } else {
        let mut ok = true;
        let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
        for family in families(&a.family)? {
            let mut bad = None;
            for case in 0..a.instances {
                let (inst, range) = random_instance(family, &mut rng);
                let inst = inst.with_enum_cap(cap);
                let sleeping = random_sleeping(&inst, 0.3, &mut rng);
                let losses: LossFunction<Q> = random_losses(&inst, range, 6, &mut rng);
                let got = inst.min_loss_awake(&sleeping, &losses)?.map(|g| g.1);
                let want = min_by_enumeration(&inst, &sleeping, &losses)?.map(|w| w.1);
                if got != want {
                    bad = Some(case);
                    break;
                }
            }
            match bad {
                None => println!("PASS solver family={family} instances={}", a.instances),
                Some(c) => {
                    println!("FAIL solver family={family} case={c}");
                    ok = false;
                }
            }
        }
        r.put("mode", "solver");
        r.put("family", a.family.clone());
        r.put("instances", a.instances);
        r.put("seed", a.seed);
        ok
    };
    r.put("pass", ok);
    println!("{}", r.line());
    write_json(a.json.as_deref(), &r)?;
    Ok(ok)
}

fn dispatch(cli: &Cli) -> Result<bool> {
    match &cli.command {
        Command::VerifyHard(a) => verify_hard_cmd(a),
        Command::VerifyExtensible(a) => verify_ext_cmd(a),
        Command::ReduceDisjunction(a) => disjunction_cmd(a),
        Command::ReducePerAction(a) => per_action_cmd(a),
        Command::RunGame(a) => run_game_cmd(a),
        Command::Oracle(a) => oracle_cmd(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            if e.downcast_ref::<Usage>().is_some() {
                eprintln!("error: {e}");
            } else {
                eprintln!("error: {e:#}");
            }
            ExitCode::from(2)
        }
    }
}
