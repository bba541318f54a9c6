//! Empirical CPD estimates and the per-row alpha monotonicity statistic.
//!
//! For a negative row `i` the statistic is
//! `alpha_i = (theta_plus - theta_i) / (theta_plus + theta_i)`, where
//! `theta_plus` is the child's probability pooled over every positive row.
//! Positive rows have `alpha = 1`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{Cpd, Dag, Dataset, MpnType, Network, RowClass};

/// Row index of every sample for the given parent list.
pub fn row_indices(dataset: &Dataset, parents: &[usize]) -> Vec<u32> {
    dataset
        .samples()
        .map(|s| {
            parents
                .iter()
                .enumerate()
                .fold(0u32, |acc, (i, &p)| acc | (u32::from(s[p]) << i))
        })
        .collect()
}

/// Per-row sample counts: how many samples match the row, and how many of
/// those have the child present.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowCounts {
    pub ones: Vec<u64>,
    pub totals: Vec<u64>,
}

impl RowCounts {
    pub fn from_indices(dataset: &Dataset, child: usize, rows: &[u32], n_rows: usize) -> Self {
        let mut ones = vec![0u64; n_rows];
        let mut totals = vec![0u64; n_rows];
        for (sample, &r) in dataset.samples().zip(rows) {
            totals[r as usize] += 1;
            ones[r as usize] += u64::from(sample[child]);
        }
        RowCounts { ones, totals }
    }

    pub fn count(dataset: &Dataset, child: usize, parents: &[usize]) -> Self {
        let rows = row_indices(dataset, parents);
        RowCounts::from_indices(dataset, child, &rows, 1 << parents.len())
    }

    pub fn n_rows(&self) -> usize {
        self.totals.len()
    }
}

/// `(ones + pc) / (total + 2 pc)`; an unobserved, unsmoothed row is 0.5.
pub fn smoothed(ones: u64, total: u64, pseudocount: f64) -> f64 {
    if total == 0 && pseudocount == 0.0 {
        0.5
    } else {
        (ones as f64 + pseudocount) / (total as f64 + 2.0 * pseudocount)
    }
}

pub fn estimate_cpd(dataset: &Dataset, child: usize, parents: &[usize], pseudocount: f64) -> Cpd {
    let counts = RowCounts::count(dataset, child, parents);
    cpd_from_counts(child, parents, &counts, pseudocount)
}

pub(crate) fn cpd_from_counts(
    child: usize,
    parents: &[usize],
    counts: &RowCounts,
    pseudocount: f64,
) -> Cpd {
    let rows = counts
        .ones
        .iter()
        .zip(&counts.totals)
        .map(|(&o, &t)| smoothed(o, t, pseudocount))
        .collect();
    Cpd {
        child,
        parents: parents.to_vec(),
        rows,
        support: counts.totals.clone(),
    }
}

/// Fits every CPD of `dag` to the data. Without an explicit `epsilon` the
/// network records the largest estimate on a supported negative row.
pub fn estimate_network(
    dataset: &Dataset,
    dag: &Dag,
    mpn_type: MpnType,
    epsilon: Option<f64>,
    pseudocount: f64,
) -> Result<Network> {
    if dag.names() != dataset.names() {
        return Err(Error::NodeMismatch(
            "graph and dataset variable names differ".into(),
        ));
    }
    let cpds: Vec<Cpd> = (0..dag.n())
        .map(|v| estimate_cpd(dataset, v, dag.parents(v), pseudocount))
        .collect();
    let epsilon = epsilon.unwrap_or_else(|| {
        let observed = cpds
            .iter()
            .flat_map(|c| {
                (0..c.n_rows())
                    .filter(|&r| c.support[r] > 0 && mpn_type.row_class(c.parents.len(), r) == RowClass::Negative)
                    .map(|r| c.rows[r])
            })
            .fold(0.0, f64::max);
        observed.min(1.0 - f64::EPSILON)
    });
    Network::new(dag.clone(), cpds, mpn_type, epsilon)
}

/// Pooled estimate of `P(child = 1 | parent assignment is a positive row)`.
pub fn theta_plus(
    mpn_type: MpnType,
    dataset: &Dataset,
    child: usize,
    parents: &[usize],
    pseudocount: f64,
) -> f64 {
    let counts = RowCounts::count(dataset, child, parents);
    pooled_positive(mpn_type, parents.len(), &counts, pseudocount).0
}

/// Pooled positive-row estimate and the number of samples it rests on.
fn pooled_positive(
    mpn_type: MpnType,
    n_parents: usize,
    counts: &RowCounts,
    pseudocount: f64,
) -> (f64, u64) {
    let (mut ones, mut total) = (0, 0);
    for r in 0..counts.n_rows() {
        if mpn_type.row_class(n_parents, r) == RowClass::Positive {
            ones += counts.ones[r];
            total += counts.totals[r];
        }
    }
    (smoothed(ones, total, pseudocount), total)
}

/// `(theta_plus - theta_minus) / (theta_plus + theta_minus)`, or 0 when both are 0.
pub fn alpha(theta_plus: f64, theta_minus: f64) -> f64 {
    let sum = theta_plus + theta_minus;
    if sum == 0.0 {
        0.0
    } else {
        (theta_plus - theta_minus) / sum
    }
}

/// Per-row alpha statistics of one (child, parent set) hypothesis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlphaTable {
    pub child: usize,
    pub parents: Vec<usize>,
    pub row_class: Vec<RowClass>,
    pub theta_hat: Vec<f64>,
    pub theta_plus_pooled: f64,
    /// Samples behind the pooled positive estimate (probability mass for exact tables).
    pub pooled_support: f64,
    pub alpha: Vec<f64>,
    /// Samples matching each row (probability mass for exact tables).
    pub support: Vec<f64>,
}

impl AlphaTable {
    pub fn from_counts(
        mpn_type: MpnType,
        child: usize,
        parents: &[usize],
        counts: &RowCounts,
        pseudocount: f64,
    ) -> Self {
        let k = parents.len();
        let (theta_plus, pooled) = pooled_positive(mpn_type, k, counts, pseudocount);
        let theta_hat: Vec<f64> = counts
            .ones
            .iter()
            .zip(&counts.totals)
            .map(|(&o, &t)| smoothed(o, t, pseudocount))
            .collect();
        let support = counts.totals.iter().map(|&t| t as f64).collect();
        AlphaTable::assemble(mpn_type, child, parents, theta_hat, theta_plus, pooled as f64, support)
    }

    /// Alpha table from exact row masses: `weight[r] = P(parents = r)` and
    /// `joint_one[r] = P(parents = r, child = 1)`.
    pub fn from_masses(
        mpn_type: MpnType,
        child: usize,
        parents: &[usize],
        weight: &[f64],
        joint_one: &[f64],
    ) -> Self {
        let k = parents.len();
        let ratio = |num: f64, den: f64| if den > 0.0 { num / den } else { 0.5 };
        let theta_hat = weight
            .iter()
            .zip(joint_one)
            .map(|(&w, &j)| ratio(j, w))
            .collect();
        let (mut num, mut den) = (0.0, 0.0);
        for r in 0..weight.len() {
            if mpn_type.row_class(k, r) == RowClass::Positive {
                num += joint_one[r];
                den += weight[r];
            }
        }
        AlphaTable::assemble(
            mpn_type,
            child,
            parents,
            theta_hat,
            ratio(num, den),
            den,
            weight.to_vec(),
        )
    }

    fn assemble(
        mpn_type: MpnType,
        child: usize,
        parents: &[usize],
        theta_hat: Vec<f64>,
        theta_plus_pooled: f64,
        pooled_support: f64,
        support: Vec<f64>,
    ) -> Self {
        let k = parents.len();
        let row_class: Vec<RowClass> = (0..theta_hat.len())
            .map(|r| mpn_type.row_class(k, r))
            .collect();
        let alpha = row_class
            .iter()
            .zip(&theta_hat)
            .map(|(c, &t)| match c {
                RowClass::Positive => 1.0,
                RowClass::Negative => alpha(theta_plus_pooled, t),
            })
            .collect();
        AlphaTable {
            child,
            parents: parents.to_vec(),
            row_class,
            theta_hat,
            theta_plus_pooled,
            pooled_support,
            alpha,
            support,
        }
    }

    /// Negative rows with support, as `(row, alpha)`.
    pub fn supported_negative_rows(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        (0..self.alpha.len())
            .filter(|&r| self.row_class[r] == RowClass::Negative && self.support[r] > 0.0)
            .map(|r| (r, self.alpha[r]))
    }
}

pub fn alpha_table(
    mpn_type: MpnType,
    dataset: &Dataset,
    child: usize,
    parents: &[usize],
    pseudocount: f64,
) -> AlphaTable {
    let counts = RowCounts::count(dataset, child, parents);
    AlphaTable::from_counts(mpn_type, child, parents, &counts, pseudocount)
}
