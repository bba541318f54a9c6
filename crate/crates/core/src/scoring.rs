//! Decomposable local and network scores.
//!
//! All logarithms are natural. The complexity penalty counts `2^|Pa|`
//! parameters per node.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::{row_indices, AlphaTable, RowCounts};
use crate::model::{Dag, Dataset, MpnType, RowClass};

/// Which decomposable score to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ScoreKind {
    Bic,
    Polaris,
    /// BIC with negative-row estimates clamped to a known noise level.
    Diprog { epsilon: f64 },
}

impl ScoreKind {
    pub fn diprog(epsilon: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&epsilon) {
            return Err(Error::config("epsilon", format!("{epsilon} is outside [0, 1]")));
        }
        Ok(ScoreKind::Diprog { epsilon })
    }

    pub fn name(&self) -> &'static str {
        match self {
            ScoreKind::Bic => "bic",
            ScoreKind::Polaris => "polaris",
            ScoreKind::Diprog { .. } => "diprog",
        }
    }
}

impl fmt::Display for ScoreKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScoreKind::Diprog { epsilon } => write!(f, "diprog({epsilon})"),
            other => f.write_str(other.name()),
        }
    }
}

impl FromStr for ScoreKind {
    type Err = Error;

    /// Accepts `bic`, `polaris`, `diprog:<epsilon>`.
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        match lower.split_once(':') {
            None if lower == "bic" => Ok(ScoreKind::Bic),
            None if lower == "polaris" => Ok(ScoreKind::Polaris),
            Some(("diprog", eps)) => {
                let eps: f64 = eps
                    .parse()
                    .map_err(|_| Error::config("epsilon", format!("`{eps}` is not a number")))?;
                ScoreKind::diprog(eps)
            }
            _ => Err(Error::config("score", format!("unknown score `{s}`"))),
        }
    }
}

/// Score of one node given one parent set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalScore {
    pub child: usize,
    pub parents: Vec<usize>,
    pub ll: f64,
    /// Sum of `ln alpha` over samples falling on negative rows.
    pub alpha_term: f64,
    pub dim: u64,
    pub total: f64,
}

fn bic_penalty(m: usize, n_parents: usize) -> f64 {
    (m as f64).ln() / 2.0 * (1u64 << n_parents) as f64
}

/// Per-row `(ln theta, ln (1 - theta))`.
fn log_table(thetas: &[f64]) -> Vec<(f64, f64)> {
    thetas.iter().map(|&t| (t.ln(), (1.0 - t).ln())).collect()
}

/// Sums the per-sample log likelihood of `child` against per-row estimates.
fn sample_log_likelihood(dataset: &Dataset, child: usize, rows: &[u32], thetas: &[f64]) -> f64 {
    let logs = log_table(thetas);
    let mut ll = 0.0;
    for (sample, &r) in dataset.samples().zip(rows) {
        let (l1, l0) = logs[r as usize];
        ll += if sample[child] == 1 { l1 } else { l0 };
    }
    ll
}

/// Everything the local scores need about one (child, parents) hypothesis.
struct Hypothesis<'a> {
    dataset: &'a Dataset,
    child: usize,
    parents: &'a [usize],
    rows: Vec<u32>,
    counts: RowCounts,
    thetas: Vec<f64>,
}

impl<'a> Hypothesis<'a> {
    fn new(dataset: &'a Dataset, child: usize, parents: &'a [usize], pseudocount: f64) -> Self {
        let rows = row_indices(dataset, parents);
        let counts = RowCounts::from_indices(dataset, child, &rows, 1 << parents.len());
        let thetas = counts
            .ones
            .iter()
            .zip(&counts.totals)
            .map(|(&o, &t)| crate::estimation::smoothed(o, t, pseudocount))
            .collect();
        Hypothesis {
            dataset,
            child,
            parents,
            rows,
            counts,
            thetas,
        }
    }

    fn log_likelihood(&self, thetas: &[f64]) -> f64 {
        sample_log_likelihood(self.dataset, self.child, &self.rows, thetas)
    }

    fn local(&self, ll: f64, alpha_term: f64, total: f64) -> LocalScore {
        LocalScore {
            child: self.child,
            parents: self.parents.to_vec(),
            ll,
            alpha_term,
            dim: 1 << self.parents.len(),
            total,
        }
    }

    fn alpha_term(&self, mpn_type: MpnType, pseudocount: f64) -> Result<f64> {
        let table =
            AlphaTable::from_counts(mpn_type, self.child, self.parents, &self.counts, pseudocount);
        if let Some((row, a)) = table.supported_negative_rows().find(|&(_, a)| a <= 0.0) {
            return Err(Error::NonPositiveAlpha {
                child: self.child,
                row,
                alpha: a,
            });
        }
        let log_alpha: Vec<f64> = table.alpha.iter().map(|a| a.ln()).collect();
        let mut term = 0.0;
        for &r in &self.rows {
            let r = r as usize;
            if table.row_class[r] == RowClass::Negative {
                term += log_alpha[r];
            }
        }
        Ok(term)
    }
}

/// `sum_d ln P(child = d_child | parents = d_parents)` under the smoothed ML estimate.
pub fn log_likelihood_local(
    dataset: &Dataset,
    child: usize,
    parents: &[usize],
    pseudocount: f64,
) -> f64 {
    let h = Hypothesis::new(dataset, child, parents, pseudocount);
    h.log_likelihood(&h.thetas)
}

pub fn bic_local(dataset: &Dataset, child: usize, parents: &[usize], pseudocount: f64) -> LocalScore {
    let h = Hypothesis::new(dataset, child, parents, pseudocount);
    let ll = h.log_likelihood(&h.thetas);
    h.local(ll, 0.0, ll - bic_penalty(dataset.m(), parents.len()))
}

/// Sum of `ln alpha_row` over samples whose parent assignment is a
/// negative row. Fails when a supported negative row has `alpha <= 0`.
pub fn alpha_term_local(
    mpn_type: MpnType,
    dataset: &Dataset,
    child: usize,
    parents: &[usize],
    pseudocount: f64,
) -> Result<f64> {
    Hypothesis::new(dataset, child, parents, pseudocount).alpha_term(mpn_type, pseudocount)
}

/// `ll + alpha_term / m - (ln m / 2) 2^|parents|`.
pub fn polaris_local(
    mpn_type: MpnType,
    dataset: &Dataset,
    child: usize,
    parents: &[usize],
    pseudocount: f64,
) -> Result<LocalScore> {
    let h = Hypothesis::new(dataset, child, parents, pseudocount);
    let ll = h.log_likelihood(&h.thetas);
    let alpha_term = h.alpha_term(mpn_type, pseudocount)?;
    let m = dataset.m();
    let total = ll + alpha_term / m as f64 - bic_penalty(m, parents.len());
    Ok(h.local(ll, alpha_term, total))
}

/// BIC after clamping every negative-row estimate to at most `epsilon`.
pub fn diprog_local(
    mpn_type: MpnType,
    dataset: &Dataset,
    child: usize,
    parents: &[usize],
    epsilon: f64,
    pseudocount: f64,
) -> LocalScore {
    let h = Hypothesis::new(dataset, child, parents, pseudocount);
    let k = parents.len();
    let clamped: Vec<f64> = h
        .thetas
        .iter()
        .enumerate()
        .map(|(r, &t)| match mpn_type.row_class(k, r) {
            RowClass::Negative => t.min(epsilon),
            RowClass::Positive => t,
        })
        .collect();
    let ll = h.log_likelihood(&clamped);
    h.local(ll, 0.0, ll - bic_penalty(dataset.m(), k))
}

pub fn local_score(
    kind: ScoreKind,
    mpn_type: MpnType,
    dataset: &Dataset,
    child: usize,
    parents: &[usize],
    pseudocount: f64,
) -> Result<LocalScore> {
    match kind {
        ScoreKind::Bic => Ok(bic_local(dataset, child, parents, pseudocount)),
        ScoreKind::Polaris => polaris_local(mpn_type, dataset, child, parents, pseudocount),
        ScoreKind::Diprog { epsilon } => Ok(diprog_local(
            mpn_type,
            dataset,
            child,
            parents,
            epsilon,
            pseudocount,
        )),
    }
}

/// Local scores of every node under the graph's parent sets.
pub fn local_scores(
    dataset: &Dataset,
    dag: &Dag,
    mpn_type: MpnType,
    kind: ScoreKind,
    pseudocount: f64,
) -> Result<Vec<LocalScore>> {
    check_nodes(dataset, dag)?;
    (0..dag.n())
        .map(|v| local_score(kind, mpn_type, dataset, v, dag.parents(v), pseudocount))
        .collect()
}

pub fn network_score(
    dataset: &Dataset,
    dag: &Dag,
    mpn_type: MpnType,
    kind: ScoreKind,
    pseudocount: f64,
) -> Result<f64> {
    Ok(local_scores(dataset, dag, mpn_type, kind, pseudocount)?
        .iter()
        .map(|s| s.total)
        .sum())
}

fn check_nodes(dataset: &Dataset, dag: &Dag) -> Result<()> {
    if dataset.n() != dag.n() {
        return Err(Error::NodeMismatch(format!(
            "dataset has {} variables, graph has {} nodes",
            dataset.n(),
            dag.n()
        )));
    }
    Ok(())
}

/// Effect of leaving one edge out of a graph.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FoldChange {
    pub from: usize,
    pub to: usize,
    /// `score(G) / score(G without the edge)`.
    pub ratio: f64,
    /// `score(G) - score(G without the edge)`; positive when the edge helps.
    pub difference: f64,
}

impl FoldChange {
    /// Edge confidence used for ranking: larger means the edge matters more.
    pub fn confidence(&self) -> f64 {
        self.difference
    }
}

/// Only the child's local score changes when an edge is removed, so this
/// recomputes that one term.
pub fn edge_fold_change(
    dataset: &Dataset,
    dag: &Dag,
    mpn_type: MpnType,
    kind: ScoreKind,
    pseudocount: f64,
    (from, to): (usize, usize),
) -> Result<FoldChange> {
    let locals = local_scores(dataset, dag, mpn_type, kind, pseudocount)?;
    fold_change_from_locals(dataset, dag, mpn_type, kind, pseudocount, &locals, (from, to))
}

pub(crate) fn fold_change_from_locals(
    dataset: &Dataset,
    dag: &Dag,
    mpn_type: MpnType,
    kind: ScoreKind,
    pseudocount: f64,
    locals: &[LocalScore],
    (from, to): (usize, usize),
) -> Result<FoldChange> {
    let reduced = dag.without_edge(from, to)?;
    let full: f64 = locals.iter().map(|s| s.total).sum();
    let replaced = match local_score(kind, mpn_type, dataset, to, reduced.parents(to), pseudocount) {
        Ok(s) => s.total,
        Err(Error::NonPositiveAlpha { .. }) => f64::NEG_INFINITY,
        Err(e) => return Err(e),
    };
    let without = full - locals[to].total + replaced;
    let ratio = if without == 0.0 && full == 0.0 {
        1.0
    } else {
        full / without
    };
    Ok(FoldChange {
        from,
        to,
        ratio,
        difference: full - without,
    })
}

/// Fold changes for every edge of `dag`, in edge order.
pub fn all_fold_changes(
    dataset: &Dataset,
    dag: &Dag,
    mpn_type: MpnType,
    kind: ScoreKind,
    pseudocount: f64,
) -> Result<Vec<FoldChange>> {
    let locals = local_scores(dataset, dag, mpn_type, kind, pseudocount)?;
    dag.edges()
        .into_iter()
        .map(|e| fold_change_from_locals(dataset, dag, mpn_type, kind, pseudocount, &locals, e))
        .collect()
}
