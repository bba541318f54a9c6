use std::collections::{BTreeMap, HashSet};
use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use polaris::config;
use polaris::estimation::{alpha_table, estimate_network};
use polaris::evaluation::{
    pr_curve, precision_recall, run_experiment, summary_record, CellKey, ExperimentConfig,
    RESULTS_HEADER,
};
use polaris::io;
use polaris::rng::substream;
use polaris::scoring::{local_scores, ScoreKind};
use polaris::synthesis::{generate_network, sample, SynthesisConfig};
use polaris::{Error, LearnOptions, MpnType};

#[derive(Parser)]
#[command(name = "polaris", version, about = "Monotonic progression network structure learning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random monotonic progression network.
    GenNet(GenNetArgs),
    /// Forward-sample a dataset from a network.
    Sample(SampleArgs),
    /// Learn a network structure from a dataset.
    Learn(LearnArgs),
    /// Score a fixed structure against a dataset.
    Score(ScoreArgs),
    /// Compare a learned network with the true one.
    Eval(EvalArgs),
    /// Run an experiment grid.
    Bench(BenchArgs),
    /// Precision-recall curve points for a learned network.
    PlotData(PlotDataArgs),
}

#[derive(Args, Serialize)]
struct GenNetArgs {
    /// Flat key=value file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    mpn_type: Option<MpnType>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    max_parents: Option<usize>,
    /// Positive-row probability range `lo,hi`.
    #[arg(long)]
    theta_pos: Option<String>,
    /// Negative-row probability range `lo,hi`.
    #[arg(long)]
    theta_neg: Option<String>,
    /// Root marginal range `lo,hi`.
    #[arg(long)]
    root_range: Option<String>,
    #[arg(long)]
    forbid_transitive: bool,
    /// Resample until every parent is more frequent than its children.
    #[arg(long)]
    faithful: bool,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Args, Serialize)]
struct SampleArgs {
    #[arg(long)]
    network: PathBuf,
    #[arg(long, short)]
    m: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Args, Serialize, Clone)]
struct ScoreOptions {
    #[arg(long, default_value = "cmpn")]
    mpn_type: MpnType,
    /// bic, polaris or diprog.
    #[arg(long, default_value = "polaris")]
    score: String,
    /// Noise level for the diprog score.
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pseudocount: f64,
}

impl ScoreOptions {
    fn kind(&self) -> polaris::Result<ScoreKind> {
        match self.score.to_ascii_lowercase().as_str() {
            "diprog" => match self.epsilon {
                Some(e) => ScoreKind::diprog(e),
                None => Err(config_error("epsilon", "--score diprog requires --epsilon")),
            },
            "bic" | "polaris" => self.score.parse(),
            other => Err(config_error(
                "score",
                format!("unknown score `{other}` (bic, polaris, diprog)"),
            )),
        }
    }
}

#[derive(Args, Serialize)]
struct LearnArgs {
    #[arg(long)]
    data: PathBuf,
    #[command(flatten)]
    score: ScoreOptions,
    #[arg(long, default_value_t = polaris::search::DEFAULT_MAX_PARENTS)]
    max_parents: usize,
    /// Alpha-filter threshold (filter is on by default for polaris only).
    #[arg(long)]
    alpha_threshold: Option<f64>,
    #[arg(long, conflicts_with = "alpha_threshold")]
    no_filter: bool,
    /// Recorded in the manifest; learning itself is deterministic.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Learned network (structure and fitted CPDs) as JSON.
    #[arg(long, short)]
    out: PathBuf,
    /// Graphviz output with fold-change edge labels.
    #[arg(long)]
    dot: Option<PathBuf>,
    /// Diagnostics JSON (scores, rejection counts, fold changes).
    #[arg(long)]
    diagnostics: Option<PathBuf>,
    /// Every rejected hypothesis with its offending row.
    #[arg(long)]
    dump_filter: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct ScoreArgs {
    #[arg(long)]
    data: PathBuf,
    /// Network whose structure is scored.
    #[arg(long)]
    network: PathBuf,
    #[command(flatten)]
    score: ScoreOptions,
    #[arg(long, short)]
    out: PathBuf,
    /// Alpha tables of every node as JSON.
    #[arg(long)]
    dump_alpha: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct EvalArgs {
    #[arg(long)]
    truth: PathBuf,
    #[arg(long)]
    learned: PathBuf,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct BenchArgs {
    /// Flat key=value experiment file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a config key, e.g. `--set sample_sizes=100,200`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (defaults to all cores).
    #[arg(long)]
    jobs: Option<usize>,
    /// Skip cells already present in the output file.
    #[arg(long)]
    resume: bool,
    /// Per-replicate JSON lines log.
    #[arg(long)]
    log: Option<PathBuf>,
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Args, Serialize)]
struct PlotDataArgs {
    #[arg(long)]
    truth: PathBuf,
    #[arg(long)]
    learned: PathBuf,
    /// Diagnostics file written by `learn`, providing edge confidences.
    #[arg(long)]
    diagnostics: PathBuf,
    #[arg(long, short)]
    out: PathBuf,
}

fn config_error(field: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidConfig {
        field,
        reason: reason.into(),
    }
}

/// Errors from reading a config file count as usage errors.
fn read_config(path: &Path) -> polaris::Result<Vec<(String, String)>> {
    let text = fs::read_to_string(path)?;
    config::parse(&text).map_err(|e| config_error("config", e.to_string()))
}

fn sha256_file(path: &Path) -> polaris::Result<String> {
    Ok(hex::encode(Sha256::digest(fs::read(path)?)))
}

fn digests(paths: &[&Path]) -> polaris::Result<BTreeMap<String, String>> {
    paths
        .iter()
        .map(|p| Ok((p.display().to_string(), sha256_file(p)?)))
        .collect()
}

/// Writes `<primary>.manifest.json` next to the main output.
fn write_manifest(
    command: &str,
    args: &impl Serialize,
    seed: Option<u64>,
    inputs: &[&Path],
    outputs: &[&Path],
) -> polaris::Result<()> {
    let manifest = json!({
        "command": command,
        "config": args,
        "seed": seed,
        "version": env!("CARGO_PKG_VERSION"),
        "inputs": digests(inputs)?,
        "outputs": digests(outputs)?,
    });
    let mut path = outputs[0].as_os_str().to_owned();
    path.push(".manifest.json");
    write_json(Path::new(&path), &manifest)
}

fn write_json(path: &Path, value: &impl Serialize) -> polaris::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn gen_net(args: &GenNetArgs) -> polaris::Result<()> {
    let mut c = SynthesisConfig::new(10, MpnType::Cmpn, 0.1);
    let mut kv = match &args.config {
        Some(path) => read_config(path)?,
        None => Vec::new(),
    };
    let flags = [
        ("n", args.n.map(|v| v.to_string())),
        ("mpn_type", args.mpn_type.map(|v| v.to_string())),
        ("epsilon", args.epsilon.map(|v| v.to_string())),
        ("max_parents", args.max_parents.map(|v| v.to_string())),
        ("theta_pos_range", args.theta_pos.clone()),
        ("theta_neg_range", args.theta_neg.clone()),
        ("root_marginal_range", args.root_range.clone()),
        ("forbid_transitive_edges", args.forbid_transitive.then(|| "true".into())),
        ("require_faithful", args.faithful.then(|| "true".into())),
        ("seed", args.seed.map(|v| v.to_string())),
    ];
    kv.extend(flags.into_iter().filter_map(|(k, v)| v.map(|v| (k.to_string(), v))));
    // range defaults follow epsilon unless given explicitly
    let explicit = |key: &str| kv.iter().any(|(k, _)| k == key);
    if let Some((_, e)) = kv.iter().rev().find(|(k, _)| k == "epsilon") {
        let e: f64 = e
            .parse()
            .map_err(|_| config_error("epsilon", format!("cannot parse `{e}`")))?;
        let defaults = SynthesisConfig::new(c.n, c.mpn_type, e);
        if !explicit("theta_pos_range") {
            c.theta_pos_range = defaults.theta_pos_range;
        }
        if !explicit("theta_neg_range") {
            c.theta_neg_range = defaults.theta_neg_range;
        }
    }
    for (k, v) in &kv {
        config::apply_synthesis(&mut c, k, v)?;
    }
    c.validate()?;
    let network = generate_network(&c)?;
    io::write_network(&args.out, &network)?;
    let inputs: Vec<&Path> = args.config.iter().map(PathBuf::as_path).collect();
    write_manifest("gen-net", args, Some(c.seed), &inputs, &[&args.out])
}

fn sample_cmd(args: &SampleArgs) -> polaris::Result<()> {
    let network = io::read_network(&args.network)?;
    let mut rng = substream(args.seed, "sample", &[]);
    let data = sample(&network, args.m, &mut rng)?;
    io::write_dataset(&args.out, &data)?;
    write_manifest("sample", args, Some(args.seed), &[&args.network], &[&args.out])
}

fn learn_cmd(args: &LearnArgs) -> polaris::Result<()> {
    let data = io::read_dataset(&args.data)?;
    let kind = args.score.kind()?;
    let mut opts = LearnOptions::new(args.score.mpn_type, kind);
    opts.max_parents = args.max_parents;
    opts.pseudocount = args.score.pseudocount;
    if args.no_filter {
        opts.alpha_threshold = None;
    } else if let Some(t) = args.alpha_threshold {
        opts.alpha_threshold = Some(t);
    }
    let outcome = polaris::learn(&data, &opts)?;
    let network = estimate_network(
        &data,
        &outcome.dag,
        opts.mpn_type,
        args.score.epsilon,
        opts.pseudocount,
    )?;
    io::write_network(&args.out, &network)?;
    let mut outputs: Vec<&Path> = vec![&args.out];
    if let Some(dot) = &args.dot {
        let labels: Vec<_> = outcome
            .diagnostics
            .edges
            .iter()
            .map(|f| ((f.from, f.to), f.ratio))
            .collect();
        fs::write(dot, io::dag_to_dot(&outcome.dag, &labels))?;
        outputs.push(dot);
    }
    if let Some(path) = &args.diagnostics {
        // runtime is left out so reruns produce identical files
        let mut value = serde_json::to_value(&outcome.diagnostics)?;
        if let Value::Object(map) = &mut value {
            map.remove("runtime_ms");
        }
        write_json(path, &value)?;
        outputs.push(path);
    }
    if let Some(path) = &args.dump_filter {
        write_json(path, &outcome.candidates)?;
        outputs.push(path);
    }
    write_manifest("learn", args, Some(args.seed), &[&args.data], &outputs)
}

fn score_cmd(args: &ScoreArgs) -> polaris::Result<()> {
    let data = io::read_dataset(&args.data)?;
    let network = io::read_network(&args.network)?;
    let kind = args.score.kind()?;
    let mpn = args.score.mpn_type;
    let dag = network.dag();
    let locals = local_scores(&data, dag, mpn, kind, args.score.pseudocount)?;
    let total: f64 = locals.iter().map(|l| l.total).sum();
    let report = json!({
        "kind": kind,
        "mpn_type": mpn,
        "pseudocount": args.score.pseudocount,
        "total": total,
        "locals": locals,
    });
    write_json(&args.out, &report)?;
    let mut outputs: Vec<&Path> = vec![&args.out];
    if let Some(path) = &args.dump_alpha {
        let tables: Vec<_> = (0..dag.n())
            .map(|v| alpha_table(mpn, &data, v, dag.parents(v), args.score.pseudocount))
            .collect();
        write_json(path, &tables)?;
        outputs.push(path);
    }
    write_manifest("score", args, None, &[&args.data, &args.network], &outputs)
}

fn eval_cmd(args: &EvalArgs) -> polaris::Result<()> {
    let truth = io::read_network(&args.truth)?;
    let learned = io::read_network(&args.learned)?;
    let (precision, recall) = precision_recall(truth.dag(), learned.dag())?;
    let report = json!({
        "precision": precision,
        "recall": recall,
        "true_edges": truth.dag().edge_count(),
        "learned_edges": learned.dag().edge_count(),
    });
    match &args.out {
        Some(path) => {
            write_json(path, &report)?;
            write_manifest("eval", args, None, &[&args.truth, &args.learned], &[path])
        }
        None => {
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(())
        }
    }
}

fn read_completed(path: &Path) -> polaris::Result<HashSet<CellKey>> {
    let mut reader = csv::Reader::from_path(path)?;
    let mut done = HashSet::new();
    for record in reader.records() {
        let r = record?;
        if r.len() >= 4 {
            done.insert(CellKey {
                mpn_type: r[0].to_string(),
                epsilon: r[1].to_string(),
                m: r[2].to_string(),
                score: r[3].to_string(),
            });
        }
    }
    Ok(done)
}

fn bench_cmd(args: &BenchArgs) -> polaris::Result<()> {
    let mut c = ExperimentConfig::default();
    let mut kv = match &args.config {
        Some(path) => read_config(path)?,
        None => Vec::new(),
    };
    for o in &args.overrides {
        kv.push(config::parse_override(o)?);
    }
    if let Some(seed) = args.seed {
        kv.push(("seed".into(), seed.to_string()));
    }
    for (k, v) in &kv {
        config::apply_experiment(&mut c, k, v)?;
    }
    c.validate()?;
    if args.jobs == Some(0) {
        return Err(config_error("jobs", "must be at least 1"));
    }

    let resuming = args.resume && args.out.exists();
    let skip = if resuming {
        read_completed(&args.out)?
    } else {
        HashSet::new()
    };
    let file = if resuming {
        OpenOptions::new().append(true).open(&args.out)?
    } else {
        File::create(&args.out)?
    };
    let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(file);
    if !resuming {
        writer.write_record(RESULTS_HEADER)?;
        writer.flush()?;
    }
    let mut log = match &args.log {
        Some(path) => Some(
            OpenOptions::new()
                .create(true)
                .append(resuming)
                .write(true)
                .truncate(!resuming)
                .open(path)?,
        ),
        None => None,
    };

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(jobs) = args.jobs {
        builder = builder.num_threads(jobs);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::InfeasibleConfig(format!("thread pool: {e}")))?;
    pool.install(|| {
        run_experiment(&c, &skip, |cell| {
            for s in &cell.summaries {
                writer.write_record(summary_record(s))?;
                eprintln!(
                    "{} eps={} m={} {}: aupr {:.4} recall {:.4} precision {:.4}",
                    s.mpn_type, s.epsilon, s.m, s.score, s.aupr_mean, s.recall_mean, s.precision_mean
                );
            }
            writer.flush()?;
            if let Some(log) = log.as_mut() {
                for r in &cell.records {
                    writeln!(log, "{}", serde_json::to_string(r)?)?;
                }
                log.flush()?;
            }
            Ok(())
        })
    })?;
    drop(writer);

    let mut inputs: Vec<&Path> = Vec::new();
    if let Some(p) = &args.config {
        inputs.push(p);
    }
    let mut outputs: Vec<&Path> = vec![&args.out];
    if let Some(p) = &args.log {
        outputs.push(p);
    }
    let echo = json!({ "args": args, "experiment": c });
    write_manifest("bench", &echo, Some(c.seed), &inputs, &outputs)
}

fn plot_data_cmd(args: &PlotDataArgs) -> polaris::Result<()> {
    let truth = io::read_network(&args.truth)?;
    let learned = io::read_network(&args.learned)?;
    let diagnostics: Value = serde_json::from_str(&fs::read_to_string(&args.diagnostics)?)?;
    let edges = diagnostics
        .get("edges")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::InvalidNetwork("diagnostics file has no `edges` list".into()))?;
    let mut confidences = Vec::with_capacity(edges.len());
    for e in edges {
        let field = |name: &str| {
            e.get(name)
                .and_then(Value::as_f64)
                .ok_or_else(|| Error::InvalidNetwork(format!("edge entry lacks `{name}`")))
        };
        let edge = (field("from")? as usize, field("to")? as usize);
        confidences.push((edge, field("difference")?));
    }
    let curve = pr_curve(truth.dag(), learned.dag(), &confidences)?;
    let mut writer = csv::Writer::from_path(&args.out)?;
    writer.write_record(["cutoff", "recall", "precision"])?;
    for p in &curve {
        writer.write_record([p.cutoff.to_string(), p.recall.to_string(), p.precision.to_string()])?;
    }
    writer.flush()?;
    drop(writer);
    write_manifest(
        "plot-data",
        args,
        None,
        &[&args.truth, &args.learned, &args.diagnostics],
        &[&args.out],
    )
}

fn run(cli: &Cli) -> polaris::Result<()> {
    match &cli.command {
        Command::GenNet(a) => gen_net(a),
        Command::Sample(a) => sample_cmd(a),
        Command::Learn(a) => learn_cmd(a),
        Command::Score(a) => score_cmd(a),
        Command::Eval(a) => eval_cmd(a),
        Command::Bench(a) => bench_cmd(a),
        Command::PlotData(a) => plot_data_cmd(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_usage() {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
