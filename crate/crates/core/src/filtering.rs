//! Candidate parent-set enumeration and the alpha filter.

use rayon::prelude::*;
use serde::Serialize;

use crate::estimation::{alpha_table, AlphaTable};
use crate::model::{Dataset, MpnType};

/// Default rejection threshold: a supported negative row with alpha below
/// zero rejects the hypothesis.
pub const DEFAULT_ALPHA_THRESHOLD: f64 = 0.0;

/// All subsets of `{0..n} \ {child}` with at most `k` elements, ordered by
/// size and then lexicographically.
pub fn enumerate_candidates(n: usize, child: usize, k: usize) -> Vec<Vec<usize>> {
    let others: Vec<usize> = (0..n).filter(|&v| v != child).collect();
    let mut out = vec![Vec::new()];
    for size in 1..=k.min(others.len()) {
        let mut idx: Vec<usize> = (0..size).collect();
        loop {
            out.push(idx.iter().map(|&i| others[i]).collect());
            // advance to the next combination in lexicographic order
            let Some(pos) = (0..size).rev().find(|&i| idx[i] != i + others.len() - size) else {
                break;
            };
            idx[pos] += 1;
            for j in pos + 1..size {
                idx[j] = idx[j - 1] + 1;
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "decision", rename_all = "lowercase")]
pub enum FilterDecision {
    Accept,
    Reject { row: usize, alpha: f64 },
}

impl FilterDecision {
    pub fn is_accept(&self) -> bool {
        matches!(self, FilterDecision::Accept)
    }
}

/// Rejects when the lowest-indexed supported negative row has alpha below
/// `threshold`. Rows without support never reject.
pub fn filter_table(table: &AlphaTable, threshold: f64) -> FilterDecision {
    match table.supported_negative_rows().find(|&(_, a)| a < threshold) {
        Some((row, alpha)) => FilterDecision::Reject { row, alpha },
        None => FilterDecision::Accept,
    }
}

pub fn alpha_filter(
    mpn_type: MpnType,
    dataset: &Dataset,
    child: usize,
    parents: &[usize],
    pseudocount: f64,
    threshold: f64,
) -> FilterDecision {
    if parents.is_empty() {
        return FilterDecision::Accept;
    }
    filter_table(&alpha_table(mpn_type, dataset, child, parents, pseudocount), threshold)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Rejection {
    pub parents: Vec<usize>,
    pub row: usize,
    pub alpha: f64,
}

/// Surviving hypotheses of one node, plus the rejected ones with reasons.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CandidateSet {
    pub child: usize,
    pub parent_sets: Vec<Vec<usize>>,
    pub rejected: Vec<Rejection>,
}

pub fn filter_node(
    mpn_type: MpnType,
    dataset: &Dataset,
    child: usize,
    k: usize,
    pseudocount: f64,
    threshold: f64,
) -> CandidateSet {
    let mut set = CandidateSet {
        child,
        parent_sets: Vec::new(),
        rejected: Vec::new(),
    };
    for parents in enumerate_candidates(dataset.n(), child, k) {
        match alpha_filter(mpn_type, dataset, child, &parents, pseudocount, threshold) {
            FilterDecision::Accept => set.parent_sets.push(parents),
            FilterDecision::Reject { row, alpha } => set.rejected.push(Rejection { parents, row, alpha }),
        }
    }
    set
}

/// Enumerates and filters the hypotheses of every node.
pub fn filter_all(
    mpn_type: MpnType,
    dataset: &Dataset,
    k: usize,
    pseudocount: f64,
    threshold: f64,
) -> Vec<CandidateSet> {
    (0..dataset.n())
        .into_par_iter()
        .map(|child| filter_node(mpn_type, dataset, child, k, pseudocount, threshold))
        .collect()
}

/// Every hypothesis accepted, for searches run without the filter.
pub fn unfiltered(n: usize, k: usize) -> Vec<CandidateSet> {
    (0..n)
        .map(|child| CandidateSet {
            child,
            parent_sets: enumerate_candidates(n, child, k),
            rejected: Vec::new(),
        })
        .collect()
}
