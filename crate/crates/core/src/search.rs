//! Exact score maximization over DAGs with bounded in-degree.
//!
//! The optimizer is a dynamic program over node subsets: for every subset
//! `S` it records the best score of a DAG on `S` together with the sink
//! placed last, where a sink `v` may draw its parents only from `S \ {v}`.
//! Each node's cache entries are kept sorted by descending score (ties by
//! ascending mask), so the first entry contained in the allowed set is the
//! best parent set for it.

use std::cmp::Ordering;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filtering::{self, CandidateSet, DEFAULT_ALPHA_THRESHOLD};
use crate::model::{Dag, Dataset, MpnType};
use crate::scoring::{all_fold_changes, local_score, FoldChange, ScoreKind};

/// Largest node count the subset DP accepts.
pub const MAX_SEARCH_NODES: usize = 25;
/// Largest in-degree bound accepted when building a cache.
pub const MAX_PARENTS_LIMIT: usize = 5;
pub const DEFAULT_MAX_PARENTS: usize = 3;

pub fn mask_of(parents: &[usize]) -> u64 {
    parents.iter().fold(0, |m, &p| m | (1 << p))
}

pub fn parents_of(mask: u64) -> Vec<usize> {
    (0..64).filter(|&i| (mask >> i) & 1 == 1).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub mask: u64,
    pub score: f64,
}

/// Local scores of the admissible parent sets of every node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalScoreCache {
    n: usize,
    k: usize,
    kind: Option<ScoreKind>,
    entries: Vec<Vec<CacheEntry>>,
}

fn by_score_then_mask(a: &CacheEntry, b: &CacheEntry) -> Ordering {
    b.score
        .partial_cmp(&a.score)
        .unwrap_or(Ordering::Equal)
        .then(a.mask.cmp(&b.mask))
}

impl LocalScoreCache {
    /// Builds a cache from raw entries; entries are re-sorted, masks validated.
    pub fn new(
        n: usize,
        k: usize,
        kind: Option<ScoreKind>,
        mut entries: Vec<Vec<CacheEntry>>,
    ) -> Result<Self> {
        if entries.len() != n {
            return Err(Error::InvalidNetwork(format!(
                "cache has {} nodes, expected {n}",
                entries.len()
            )));
        }
        if n > 64 {
            return Err(Error::TooLarge {
                what: "parent-set bitmask",
                n,
                limit: 64,
            });
        }
        for (v, list) in entries.iter_mut().enumerate() {
            for e in list.iter() {
                if (e.mask >> v) & 1 == 1 {
                    return Err(Error::SelfLoop { node: v });
                }
                if n < 64 && e.mask >> n != 0 {
                    return Err(Error::IndexOutOfRange {
                        node: v,
                        parent: 63 - e.mask.leading_zeros() as usize,
                        n,
                    });
                }
                if e.mask.count_ones() as usize > k {
                    return Err(Error::InvalidNetwork(format!(
                        "node {v}: parent set {:?} exceeds in-degree bound {k}",
                        parents_of(e.mask)
                    )));
                }
                if e.score.is_nan() {
                    return Err(Error::InvalidNetwork(format!("node {v}: NaN score")));
                }
            }
            list.sort_by(by_score_then_mask);
        }
        Ok(LocalScoreCache { n, k, kind, entries })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn max_parents(&self) -> usize {
        self.k
    }

    pub fn kind(&self) -> Option<ScoreKind> {
        self.kind
    }

    /// Entries of `node`, best first.
    pub fn entries(&self, node: usize) -> &[CacheEntry] {
        &self.entries[node]
    }

    pub fn len(&self) -> usize {
        self.entries.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn score_of(&self, node: usize, mask: u64) -> Option<f64> {
        self.entries[node]
            .iter()
            .find(|e| e.mask == mask)
            .map(|e| e.score)
    }

    /// Best entry of `node` whose parents all lie in `allowed`.
    fn best_within(&self, node: usize, allowed: u64) -> Option<&CacheEntry> {
        self.entries[node].iter().find(|e| e.mask & !allowed == 0)
    }
}

/// Scores every candidate set. Hypotheses scoring `-inf` (for instance a
/// non-positive alpha under the POLARIS score) are left out.
pub fn build_cache_from_candidates(
    mpn_type: MpnType,
    dataset: &Dataset,
    kind: ScoreKind,
    pseudocount: f64,
    k: usize,
    candidates: &[CandidateSet],
) -> Result<LocalScoreCache> {
    let n = dataset.n();
    let entries = candidates
        .par_iter()
        .map(|c| {
            let mut list = Vec::with_capacity(c.parent_sets.len());
            for parents in &c.parent_sets {
                let score = match local_score(kind, mpn_type, dataset, c.child, parents, pseudocount) {
                    Ok(s) => s.total,
                    Err(Error::NonPositiveAlpha { .. }) => continue,
                    Err(e) => return Err(e),
                };
                if score > f64::NEG_INFINITY {
                    list.push(CacheEntry {
                        mask: mask_of(parents),
                        score,
                    });
                }
            }
            Ok(list)
        })
        .collect::<Result<Vec<_>>>()?;
    LocalScoreCache::new(n, k, Some(kind), entries)
}

fn check_max_parents(k: usize) -> Result<()> {
    if k > MAX_PARENTS_LIMIT {
        return Err(Error::config(
            "max_parents",
            format!("{k} exceeds the limit of {MAX_PARENTS_LIMIT}"),
        ));
    }
    Ok(())
}

/// Enumerates (and, with a threshold, alpha-filters) candidate sets, then scores them.
pub fn build_cache(
    mpn_type: MpnType,
    dataset: &Dataset,
    k: usize,
    kind: ScoreKind,
    pseudocount: f64,
    alpha_threshold: Option<f64>,
) -> Result<LocalScoreCache> {
    check_max_parents(k)?;
    let k = k.min(dataset.n() - 1);
    let candidates = match alpha_threshold {
        Some(t) => filtering::filter_all(mpn_type, dataset, k, pseudocount, t),
        None => filtering::unfiltered(dataset.n(), k),
    };
    build_cache_from_candidates(mpn_type, dataset, kind, pseudocount, k, &candidates)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    /// Chosen parent mask of every node.
    pub masks: Vec<u64>,
    pub score: f64,
}

impl SearchResult {
    pub fn dag(&self, names: Vec<String>) -> Result<Dag> {
        Dag::new(names, self.masks.iter().map(|&m| parents_of(m)).collect())
    }
}

/// Highest-scoring DAG assembled from cache entries.
///
/// Ties between parent sets go to the smaller mask; ties between sinks of
/// the same subset go to the smaller node index.
pub fn exact_search(cache: &LocalScoreCache) -> Result<SearchResult> {
    let n = cache.n();
    if n > MAX_SEARCH_NODES {
        return Err(Error::TooLarge {
            what: "exact search",
            n,
            limit: MAX_SEARCH_NODES,
        });
    }
    if let Some(node) = (0..n).find(|&v| cache.entries(v).is_empty()) {
        return Err(Error::InfeasibleCache { node });
    }
    let full = (1usize << n) - 1;
    let mut best = vec![f64::NEG_INFINITY; full + 1];
    let mut sink = vec![u8::MAX; full + 1];
    best[0] = 0.0;
    for set in 1..=full {
        let mut rest = set;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            let others = set & !(1 << v);
            if best[others] == f64::NEG_INFINITY {
                continue;
            }
            if let Some(e) = cache.best_within(v, others as u64) {
                let candidate = best[others] + e.score;
                if candidate > best[set] {
                    best[set] = candidate;
                    sink[set] = v as u8;
                }
            }
        }
    }
    if best[full] == f64::NEG_INFINITY {
        // some node never finds a parent set inside any predecessor set
        let node = (0..n)
            .find(|&v| cache.best_within(v, (full & !(1 << v)) as u64).is_none())
            .unwrap_or(0);
        return Err(Error::InfeasibleCache { node });
    }

    let mut masks = vec![0u64; n];
    let mut scores = vec![0.0; n];
    let mut set = full;
    while set != 0 {
        let v = sink[set] as usize;
        let others = set & !(1 << v);
        let e = cache
            .best_within(v, others as u64)
            .expect("sink recorded with a feasible entry");
        masks[v] = e.mask;
        scores[v] = e.score;
        set = others;
    }
    Ok(SearchResult {
        masks,
        score: scores.iter().sum(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnOptions {
    pub mpn_type: MpnType,
    pub kind: ScoreKind,
    pub max_parents: usize,
    pub pseudocount: f64,
    /// `None` disables the alpha filter.
    pub alpha_threshold: Option<f64>,
    /// Compute leave-one-out fold changes of the learned edges.
    pub fold_changes: bool,
}

impl LearnOptions {
    /// Defaults: three parents, pseudocount 1, alpha filter on for POLARIS only.
    pub fn new(mpn_type: MpnType, kind: ScoreKind) -> Self {
        LearnOptions {
            mpn_type,
            kind,
            max_parents: DEFAULT_MAX_PARENTS,
            pseudocount: 1.0,
            alpha_threshold: (kind == ScoreKind::Polaris).then_some(DEFAULT_ALPHA_THRESHOLD),
            fold_changes: true,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Diagnostics {
    pub options: LearnOptions,
    pub hypotheses_total: usize,
    pub hypotheses_rejected: usize,
    pub cache_size: usize,
    pub score: f64,
    pub runtime_ms: u64,
    pub edges: Vec<FoldChange>,
}

#[derive(Debug, Clone)]
pub struct LearnOutcome {
    pub dag: Dag,
    pub candidates: Vec<CandidateSet>,
    pub diagnostics: Diagnostics,
}

/// Filter, build the score cache, search, then rate each learned edge.
pub fn learn(dataset: &Dataset, options: &LearnOptions) -> Result<LearnOutcome> {
    let start = Instant::now();
    check_max_parents(options.max_parents)?;
    if !(options.pseudocount >= 0.0) {
        return Err(Error::config("pseudocount", "must be non-negative"));
    }
    let n = dataset.n();
    let k = options.max_parents.min(n - 1);
    let candidates = match options.alpha_threshold {
        Some(t) => filtering::filter_all(options.mpn_type, dataset, k, options.pseudocount, t),
        None => filtering::unfiltered(n, k),
    };
    let cache = build_cache_from_candidates(
        options.mpn_type,
        dataset,
        options.kind,
        options.pseudocount,
        k,
        &candidates,
    )?;
    let result = exact_search(&cache)?;
    let dag = result.dag(dataset.names().to_vec())?;
    let edges = if options.fold_changes {
        all_fold_changes(dataset, &dag, options.mpn_type, options.kind, options.pseudocount)?
    } else {
        Vec::new()
    };
    let rejected = candidates.iter().map(|c| c.rejected.len()).sum();
    let diagnostics = Diagnostics {
        options: options.clone(),
        hypotheses_total: candidates
            .iter()
            .map(|c| c.parent_sets.len() + c.rejected.len())
            .sum(),
        hypotheses_rejected: rejected,
        cache_size: cache.len(),
        score: result.score,
        runtime_ms: start.elapsed().as_millis() as u64,
        edges,
    };
    Ok(LearnOutcome {
        dag,
        candidates,
        diagnostics,
    })
}
