//! Structure-recovery metrics and the seeded experiment grid.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Dag, Dataset, MpnType, Network};
use crate::rng::substream;
use crate::scoring::ScoreKind;
use crate::search::{learn, LearnOptions, LearnOutcome};
use crate::synthesis::{generate_network_with, sample, SynthesisConfig};

fn check_same_nodes(truth: &Dag, learned: &Dag) -> Result<()> {
    if truth.n() != learned.n() {
        return Err(Error::NodeMismatch(format!(
            "truth has {} nodes, learned graph has {}",
            truth.n(),
            learned.n()
        )));
    }
    if truth.names() != learned.names() {
        return Err(Error::NodeMismatch(
            "variable names differ between truth and learned graph".into(),
        ));
    }
    Ok(())
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        1.0
    } else {
        num as f64 / den as f64
    }
}

/// Directed-edge `(precision, recall)`. An empty prediction has precision 1
/// and an empty truth has recall 1.
pub fn precision_recall(truth: &Dag, learned: &Dag) -> Result<(f64, f64)> {
    check_same_nodes(truth, learned)?;
    let learned_edges = learned.edges();
    let hits = learned_edges.iter().filter(|&&(a, b)| truth.has_edge(a, b)).count();
    Ok((
        ratio(hits, learned_edges.len()),
        ratio(hits, truth.edge_count()),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PrPoint {
    pub cutoff: usize,
    pub recall: f64,
    pub precision: f64,
}

fn ranked_edges(
    learned: &Dag,
    confidences: &[((usize, usize), f64)],
) -> Result<Vec<(usize, usize)>> {
    let mut ranked = Vec::with_capacity(learned.edge_count());
    for (a, b) in learned.edges() {
        let Some(&(_, c)) = confidences.iter().find(|(e, _)| *e == (a, b)) else {
            return Err(Error::EdgeNotPresent { from: a, to: b });
        };
        ranked.push(((a, b), c));
    }
    // stable sort keeps edge order among equal confidences
    ranked.sort_by(|x, y| y.1.total_cmp(&x.1));
    Ok(ranked.into_iter().map(|(e, _)| e).collect())
}

/// Precision and recall after keeping the top `1..=|learned|` edges.
pub fn pr_curve(
    truth: &Dag,
    learned: &Dag,
    confidences: &[((usize, usize), f64)],
) -> Result<Vec<PrPoint>> {
    check_same_nodes(truth, learned)?;
    let ranked = ranked_edges(learned, confidences)?;
    let mut hits = 0;
    Ok(ranked
        .iter()
        .enumerate()
        .map(|(i, &(a, b))| {
            if truth.has_edge(a, b) {
                hits += 1;
            }
            PrPoint {
                cutoff: i + 1,
                recall: ratio(hits, truth.edge_count()),
                precision: hits as f64 / (i + 1) as f64,
            }
        })
        .collect())
}

/// Step-wise area `sum (R_i - R_{i-1}) * P_i` under the rank-cutoff curve.
/// With no true edges the area is 1 for an empty prediction and 0 otherwise.
pub fn aupr(truth: &Dag, learned: &Dag, confidences: &[((usize, usize), f64)]) -> Result<f64> {
    let curve = pr_curve(truth, learned, confidences)?;
    if truth.edge_count() == 0 {
        return Ok(if curve.is_empty() { 1.0 } else { 0.0 });
    }
    let mut area = 0.0;
    let mut prev = 0.0;
    for p in &curve {
        area += (p.recall - prev) * p.precision;
        prev = p.recall;
    }
    Ok(area)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvalResult {
    pub recall: f64,
    pub precision: f64,
    pub aupr: f64,
    pub true_edges: usize,
    pub learned_edges: usize,
    pub runtime_ms: u64,
}

pub fn evaluate(truth: &Dag, outcome: &LearnOutcome) -> Result<EvalResult> {
    let (precision, recall) = precision_recall(truth, &outcome.dag)?;
    let conf: Vec<_> = outcome
        .diagnostics
        .edges
        .iter()
        .map(|f| ((f.from, f.to), f.confidence()))
        .collect();
    Ok(EvalResult {
        recall,
        precision,
        aupr: aupr(truth, &outcome.dag, &conf)?,
        true_edges: truth.edge_count(),
        learned_edges: outcome.dag.edge_count(),
        runtime_ms: outcome.diagnostics.runtime_ms,
    })
}

/// Scores compared by the experiment grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ScoreSpec {
    Bic,
    Polaris,
    /// DiProg told the generating epsilon.
    DiprogTrue,
    DiprogFixed(f64),
    /// DiProg with epsilon drawn uniformly from the configured range.
    DiprogRandom,
}

impl fmt::Display for ScoreSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScoreSpec::Bic => f.write_str("bic"),
            ScoreSpec::Polaris => f.write_str("polaris"),
            ScoreSpec::DiprogTrue => f.write_str("diprog-true"),
            ScoreSpec::DiprogFixed(e) => write!(f, "diprog:{e}"),
            ScoreSpec::DiprogRandom => f.write_str("diprog-random"),
        }
    }
}

impl FromStr for ScoreSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        Ok(match s.as_str() {
            "bic" => ScoreSpec::Bic,
            "polaris" => ScoreSpec::Polaris,
            "diprog-true" => ScoreSpec::DiprogTrue,
            "diprog-random" => ScoreSpec::DiprogRandom,
            _ => match s.strip_prefix("diprog:").map(str::parse::<f64>) {
                Some(Ok(e)) if (0.0..=1.0).contains(&e) => ScoreSpec::DiprogFixed(e),
                _ => {
                    return Err(Error::config(
                        "scores",
                        format!("unknown score `{s}` (bic, polaris, diprog-true, diprog-random, diprog:<eps>)"),
                    ))
                }
            },
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub mpn_types: Vec<MpnType>,
    pub epsilons: Vec<f64>,
    pub sample_sizes: Vec<usize>,
    pub topologies: usize,
    pub resamples_per_topology: usize,
    pub n: usize,
    pub k: usize,
    pub scores: Vec<ScoreSpec>,
    pub random_epsilon_draws: usize,
    pub random_epsilon_range: (f64, f64),
    pub pseudocount: f64,
    /// Alpha-filter threshold used with the POLARIS score.
    pub alpha_threshold: f64,
    pub forbid_transitive_edges: bool,
    pub require_faithful: bool,
    /// Synthesis overrides; `None` keeps the synthesis defaults.
    pub theta_pos_range: Option<(f64, f64)>,
    pub theta_neg_range: Option<(f64, f64)>,
    pub root_marginal_range: Option<(f64, f64)>,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            mpn_types: vec![MpnType::Cmpn],
            epsilons: vec![0.15],
            sample_sizes: vec![200],
            topologies: 10,
            resamples_per_topology: 3,
            n: 10,
            k: 3,
            scores: vec![
                ScoreSpec::Bic,
                ScoreSpec::Polaris,
                ScoreSpec::DiprogTrue,
                ScoreSpec::DiprogRandom,
            ],
            random_epsilon_draws: 50,
            random_epsilon_range: (0.01, 0.40),
            pseudocount: 1.0,
            alpha_threshold: 0.0,
            forbid_transitive_edges: false,
            require_faithful: false,
            theta_pos_range: None,
            theta_neg_range: None,
            root_marginal_range: None,
            seed: 0,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let nonempty = [
            ("mpn_types", self.mpn_types.is_empty()),
            ("epsilons", self.epsilons.is_empty()),
            ("sample_sizes", self.sample_sizes.is_empty()),
            ("scores", self.scores.is_empty()),
        ];
        if let Some((field, _)) = nonempty.iter().find(|(_, empty)| *empty) {
            return Err(Error::config(field, "must not be empty"));
        }
        for (field, v) in [
            ("topologies", self.topologies),
            ("resamples_per_topology", self.resamples_per_topology),
            ("n", self.n),
        ] {
            if v == 0 {
                return Err(Error::config(field, "must be at least 1"));
            }
        }
        if self.sample_sizes.contains(&0) {
            return Err(Error::config("sample_sizes", "sample sizes must be at least 1"));
        }
        if self.scores.contains(&ScoreSpec::DiprogRandom) && self.random_epsilon_draws == 0 {
            return Err(Error::config("random_epsilon_draws", "must be at least 1"));
        }
        let (lo, hi) = self.random_epsilon_range;
        if !(0.0 <= lo && lo <= hi && hi <= 1.0) {
            return Err(Error::config(
                "random_epsilon_range",
                format!("[{lo}, {hi}] must lie within [0, 1]"),
            ));
        }
        if !(self.pseudocount >= 0.0) {
            return Err(Error::config("pseudocount", "must be non-negative"));
        }
        for &e in &self.epsilons {
            self.synthesis(self.mpn_types[0], e, 0).validate()?;
        }
        Ok(())
    }

    fn synthesis(&self, mpn_type: MpnType, epsilon: f64, seed: u64) -> SynthesisConfig {
        let mut s = SynthesisConfig::new(self.n, mpn_type, epsilon);
        s.max_parents = self.k.max(1);
        s.forbid_transitive_edges = self.forbid_transitive_edges;
        s.require_faithful = self.require_faithful;
        if let Some(r) = self.theta_pos_range {
            s.theta_pos_range = r;
        }
        if let Some(r) = self.theta_neg_range {
            s.theta_neg_range = r;
        }
        if let Some(r) = self.root_marginal_range {
            s.root_marginal_range = r;
        }
        s.seed = seed;
        s
    }

    pub fn replicates(&self) -> usize {
        self.topologies * self.resamples_per_topology
    }
}

/// Identifies one output row: grid coordinates plus score label.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellKey {
    pub mpn_type: String,
    pub epsilon: String,
    pub m: String,
    pub score: String,
}

/// Aggregated metrics of one grid cell and score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub mpn_type: MpnType,
    pub epsilon: f64,
    pub m: usize,
    pub score: String,
    pub replicates: usize,
    pub recall_mean: f64,
    pub recall_sd: f64,
    pub precision_mean: f64,
    pub precision_sd: f64,
    pub aupr_mean: f64,
    pub aupr_sd: f64,
    pub rejected_mean: f64,
    /// Mean number of true parent sets rejected by the alpha filter.
    pub true_rejected_mean: f64,
}

impl CellSummary {
    pub fn key(&self) -> CellKey {
        CellKey {
            mpn_type: self.mpn_type.to_string(),
            epsilon: self.epsilon.to_string(),
            m: self.m.to_string(),
            score: self.score.clone(),
        }
    }
}

/// Metrics of a single learning run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicateRecord {
    pub mpn_type: MpnType,
    pub epsilon: f64,
    pub m: usize,
    pub score: String,
    pub topology: usize,
    pub resample: usize,
    pub draw: Option<usize>,
    pub score_epsilon: Option<f64>,
    pub recall: f64,
    pub precision: f64,
    pub aupr: f64,
    pub rejected: usize,
    pub true_rejected: usize,
    pub runtime_ms: u64,
}

pub fn mean_sd(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn summarize(
    records: &[ReplicateRecord],
    mpn_type: MpnType,
    epsilon: f64,
    m: usize,
    score: String,
) -> CellSummary {
    let col = |f: fn(&ReplicateRecord) -> f64| mean_sd(&records.iter().map(f).collect::<Vec<_>>());
    let (recall_mean, recall_sd) = col(|r| r.recall);
    let (precision_mean, precision_sd) = col(|r| r.precision);
    let (aupr_mean, aupr_sd) = col(|r| r.aupr);
    CellSummary {
        mpn_type,
        epsilon,
        m,
        score,
        replicates: records.len(),
        recall_mean,
        recall_sd,
        precision_mean,
        precision_sd,
        aupr_mean,
        aupr_sd,
        rejected_mean: col(|r| r.rejected as f64).0,
        true_rejected_mean: col(|r| r.true_rejected as f64).0,
    }
}

/// A generated truth network and one dataset sampled from it.
pub struct Replicate {
    pub topology: usize,
    pub resample: usize,
    pub network: Network,
    pub dataset: Dataset,
}

/// Networks depend on `(seed, mpn index, epsilon index, topology)` and are
/// shared across sample sizes; datasets also depend on `m` and the resample.
pub fn replicates(
    config: &ExperimentConfig,
    mpn_index: usize,
    eps_index: usize,
    m_index: usize,
) -> Result<Vec<Replicate>> {
    let mpn_type = config.mpn_types[mpn_index];
    let epsilon = config.epsilons[eps_index];
    let m = config.sample_sizes[m_index];
    let networks = (0..config.topologies)
        .into_par_iter()
        .map(|t| {
            let ids = [mpn_index as u64, eps_index as u64, t as u64];
            let mut rng = substream(config.seed, "topology", &ids);
            generate_network_with(&config.synthesis(mpn_type, epsilon, config.seed), &mut rng)
        })
        .collect::<Result<Vec<_>>>()?;
    let jobs: Vec<(usize, usize)> = (0..config.topologies)
        .flat_map(|t| (0..config.resamples_per_topology).map(move |r| (t, r)))
        .collect();
    jobs.into_par_iter()
        .map(|(t, r)| {
            let ids = [mpn_index as u64, eps_index as u64, m_index as u64, t as u64, r as u64];
            let mut rng = substream(config.seed, "sample", &ids);
            let dataset = sample(&networks[t], m, &mut rng)?;
            Ok(Replicate {
                topology: t,
                resample: r,
                network: networks[t].clone(),
                dataset,
            })
        })
        .collect()
}

fn true_rejections(outcome: &LearnOutcome, truth: &Dag) -> usize {
    outcome
        .candidates
        .iter()
        .flat_map(|c| c.rejected.iter().map(move |r| (c.child, &r.parents)))
        .filter(|(child, parents)| truth.parents(*child) == parents.as_slice())
        .count()
}

fn run_one(
    config: &ExperimentConfig,
    rep: &Replicate,
    kind: ScoreKind,
) -> Result<(EvalResult, usize, usize)> {
    let mpn_type = rep.network.mpn_type();
    let mut opts = LearnOptions::new(mpn_type, kind);
    opts.max_parents = config.k;
    opts.pseudocount = config.pseudocount;
    if kind == ScoreKind::Polaris {
        opts.alpha_threshold = Some(config.alpha_threshold);
    }
    let outcome = learn(&rep.dataset, &opts)?;
    let eval = evaluate(rep.network.dag(), &outcome)?;
    let rejected = outcome.candidates.iter().map(|c| c.rejected.len()).sum();
    Ok((eval, rejected, true_rejections(&outcome, rep.network.dag())))
}

/// Draws used for the random-epsilon DiProg rows of one cell.
pub fn random_epsilons(config: &ExperimentConfig, ids: &[u64]) -> Vec<f64> {
    let mut rng = substream(config.seed, "epsilon-draws", ids);
    let (lo, hi) = config.random_epsilon_range;
    (0..config.random_epsilon_draws)
        .map(|_| if lo < hi { rng.gen_range(lo..=hi) } else { lo })
        .collect()
}

/// Results handed to the caller after each completed cell.
pub struct CellOutput {
    pub summaries: Vec<CellSummary>,
    pub records: Vec<ReplicateRecord>,
}

/// Runs the grid cell by cell. Cells whose summary key is in `skip` are not
/// recomputed. `on_cell` receives each finished cell in grid order.
///
/// Random-epsilon DiProg yields two rows: `diprog-random` pools every draw
/// and replicate, `diprog-random-worst` is the draw with the lowest mean AUPR.
pub fn run_experiment<F>(
    config: &ExperimentConfig,
    skip: &HashSet<CellKey>,
    mut on_cell: F,
) -> Result<Vec<CellSummary>>
where
    F: FnMut(&CellOutput) -> Result<()>,
{
    config.validate()?;
    let mut all = Vec::new();
    for (mi, &mpn_type) in config.mpn_types.iter().enumerate() {
        for (ei, &epsilon) in config.epsilons.iter().enumerate() {
            for (si, &m) in config.sample_sizes.iter().enumerate() {
                let key = |score: String| CellKey {
                    mpn_type: mpn_type.to_string(),
                    epsilon: epsilon.to_string(),
                    m: m.to_string(),
                    score,
                };
                let pending: Vec<ScoreSpec> = config
                    .scores
                    .iter()
                    .copied()
                    .filter(|s| !skip.contains(&key(s.to_string())))
                    .collect();
                if pending.is_empty() {
                    continue;
                }
                let reps = replicates(config, mi, ei, si)?;
                for spec in pending {
                    let out = run_cell(config, &reps, spec, (mi, ei, si), mpn_type, epsilon, m)?;
                    on_cell(&out)?;
                    all.extend(out.summaries);
                }
            }
        }
    }
    Ok(all)
}

fn run_cell(
    config: &ExperimentConfig,
    reps: &[Replicate],
    spec: ScoreSpec,
    (mi, ei, si): (usize, usize, usize),
    mpn_type: MpnType,
    epsilon: f64,
    m: usize,
) -> Result<CellOutput> {
    let label = spec.to_string();
    let draws: Vec<(Option<usize>, ScoreKind, Option<f64>)> = match spec {
        ScoreSpec::Bic => vec![(None, ScoreKind::Bic, None)],
        ScoreSpec::Polaris => vec![(None, ScoreKind::Polaris, None)],
        ScoreSpec::DiprogTrue => vec![(None, ScoreKind::diprog(epsilon)?, Some(epsilon))],
        ScoreSpec::DiprogFixed(e) => vec![(None, ScoreKind::diprog(e)?, Some(e))],
        ScoreSpec::DiprogRandom => random_epsilons(config, &[mi as u64, ei as u64, si as u64])
            .into_iter()
            .enumerate()
            .map(|(d, e)| Ok((Some(d), ScoreKind::diprog(e)?, Some(e))))
            .collect::<Result<_>>()?,
    };
    let jobs: Vec<(usize, usize)> = (0..draws.len())
        .flat_map(|d| (0..reps.len()).map(move |r| (d, r)))
        .collect();
    let records = jobs
        .into_par_iter()
        .map(|(d, r)| {
            let (draw, kind, score_epsilon) = draws[d];
            let rep = &reps[r];
            let (eval, rejected, true_rejected) = run_one(config, rep, kind)?;
            Ok(ReplicateRecord {
                mpn_type,
                epsilon,
                m,
                score: label.clone(),
                topology: rep.topology,
                resample: rep.resample,
                draw,
                score_epsilon,
                recall: eval.recall,
                precision: eval.precision,
                aupr: eval.aupr,
                rejected,
                true_rejected,
                runtime_ms: eval.runtime_ms,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut summaries = vec![summarize(&records, mpn_type, epsilon, m, label.clone())];
    if spec == ScoreSpec::DiprogRandom {
        let per_draw = |d: usize| -> Vec<ReplicateRecord> {
            records.iter().filter(|r| r.draw == Some(d)).cloned().collect()
        };
        let worst = (0..draws.len())
            .map(|d| (d, mean_sd(&per_draw(d).iter().map(|r| r.aupr).collect::<Vec<_>>()).0))
            .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
            .map(|(d, _)| d)
            .unwrap_or(0);
        summaries.push(summarize(
            &per_draw(worst),
            mpn_type,
            epsilon,
            m,
            format!("{label}-worst"),
        ));
    }
    Ok(CellOutput { summaries, records })
}

/// CSV header of the results table.
pub const RESULTS_HEADER: [&str; 13] = [
    "mpn_type",
    "epsilon",
    "m",
    "score",
    "replicates",
    "recall_mean",
    "recall_sd",
    "precision_mean",
    "precision_sd",
    "aupr_mean",
    "aupr_sd",
    "rejected_mean",
    "true_rejected_mean",
];

pub fn summary_record(s: &CellSummary) -> Vec<String> {
    vec![
        s.mpn_type.to_string(),
        s.epsilon.to_string(),
        s.m.to_string(),
        s.score.clone(),
        s.replicates.to_string(),
        s.recall_mean.to_string(),
        s.recall_sd.to_string(),
        s.precision_mean.to_string(),
        s.precision_sd.to_string(),
        s.aupr_mean.to_string(),
        s.aupr_sd.to_string(),
        s.rejected_mean.to_string(),
        s.true_rejected_mean.to_string(),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dag(n: usize, edges: &[(usize, usize)]) -> Dag {
        let mut parents = vec![Vec::new(); n];
        for &(a, b) in edges {
            parents[b].push(a);
        }
        Dag::from_parents(parents).unwrap()
    }

    #[test]
    fn precision_recall_examples() {
        let truth = dag(3, &[(0, 1), (1, 2)]);
        assert_eq!(precision_recall(&truth, &truth).unwrap(), (1.0, 1.0));
        assert_eq!(precision_recall(&truth, &dag(3, &[])).unwrap(), (1.0, 0.0));
        assert_eq!(
            precision_recall(&truth, &dag(3, &[(0, 1), (2, 1)])).unwrap(),
            (0.5, 0.5)
        );
        assert!(matches!(
            precision_recall(&truth, &dag(2, &[])),
            Err(Error::NodeMismatch(_))
        ));
    }

    #[test]
    fn aupr_examples() {
        let truth = dag(3, &[(0, 1)]);
        let learned = dag(3, &[(0, 1), (2, 1)]);
        let conf = [((0, 1), 2.0), ((2, 1), 1.1)];
        let curve = pr_curve(&truth, &learned, &conf).unwrap();
        assert_eq!(
            curve.iter().map(|p| (p.recall, p.precision)).collect::<Vec<_>>(),
            [(1.0, 1.0), (1.0, 0.5)]
        );
        assert_eq!(aupr(&truth, &learned, &conf).unwrap(), 1.0);
        // reversing the ranking puts the false edge first
        let conf = [((0, 1), 1.0), ((2, 1), 3.0)];
        assert_eq!(aupr(&truth, &learned, &conf).unwrap(), 0.5);
        let wrong = dag(3, &[(1, 0)]);
        assert_eq!(aupr(&truth, &wrong, &[((1, 0), 5.0)]).unwrap(), 0.0);
        assert_eq!(aupr(&truth, &truth, &[((0, 1), -7.0)]).unwrap(), 1.0);
        assert!(aupr(&truth, &learned, &[((0, 1), 1.0)]).is_err());
    }

    #[test]
    fn score_spec_parsing() {
        for s in ["bic", "polaris", "diprog-true", "diprog-random", "diprog:0.25"] {
            assert_eq!(s.parse::<ScoreSpec>().unwrap().to_string(), s);
        }
        assert!("diprog:2".parse::<ScoreSpec>().is_err());
        assert!("mdl".parse::<ScoreSpec>().is_err());
    }

    #[test]
    fn mean_sd_basics() {
        assert_eq!(mean_sd(&[2.0]), (2.0, 0.0));
        let (m, s) = mean_sd(&[1.0, 2.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_grid() {
        let config = ExperimentConfig {
            epsilons: vec![0.0],
            topologies: 1,
            resamples_per_topology: 1,
            n: 4,
            scores: vec![ScoreSpec::Bic],
            ..ExperimentConfig::default()
        };
        let mut cells = 0;
        let rows = run_experiment(&config, &HashSet::new(), |_| {
            cells += 1;
            Ok(())
        })
        .unwrap();
        assert_eq!(cells, 1);
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].replicates, 1);
        assert_eq!(rows[0].recall_sd, 0.0);
        let again = run_experiment(&config, &HashSet::new(), |_| Ok(())).unwrap();
        assert_eq!(rows, again);
        let skip: HashSet<_> = rows.iter().map(CellSummary::key).collect();
        assert!(run_experiment(&config, &skip, |_| Ok(())).unwrap().is_empty());
    }

    #[test]
    fn random_draws_within_range() {
        let config = ExperimentConfig::default();
        let d = random_epsilons(&config, &[0, 0, 0]);
        assert_eq!(d.len(), 50);
        assert!(d.iter().all(|e| (0.01..=0.40).contains(e)));
        assert_eq!(d, random_epsilons(&config, &[0, 0, 0]));
    }
}
