//! Random monotonic progression networks, forward sampling and exact marginals.

use rand::seq::{index, SliceRandom};
use rand::Rng as _;

use crate::error::{Error, Result};
use crate::model::{default_names, Cpd, Dag, Dataset, MpnType, Network, RowClass};
use crate::rng::{substream, Rng};

/// Largest network for which the full joint is enumerated.
pub const MAX_EXACT_NODES: usize = 22;

const PARENT_DRAWS: usize = 256;
const NETWORK_ATTEMPTS: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct SynthesisConfig {
    pub n: usize,
    pub max_parents: usize,
    pub mpn_type: MpnType,
    pub epsilon: f64,
    /// Positive rows are drawn uniformly from `(lo, hi]`; `lo` must exceed epsilon.
    pub theta_pos_range: (f64, f64),
    /// Negative rows are drawn uniformly from `[lo, hi]`; `hi` must not exceed epsilon.
    pub theta_neg_range: (f64, f64),
    /// Root marginals are drawn uniformly from this range.
    pub root_marginal_range: (f64, f64),
    pub forbid_transitive_edges: bool,
    /// Resample networks until every parent is more frequent than its child.
    pub require_faithful: bool,
    pub seed: u64,
}

impl SynthesisConfig {
    /// Defaults: up to three parents, negative rows in `[0, epsilon]`,
    /// positive rows in `[max(0.5, midpoint of (epsilon, 1)), 0.95]`.
    pub fn new(n: usize, mpn_type: MpnType, epsilon: f64) -> Self {
        let pos_lo = if epsilon < 0.5 { 0.5 } else { (1.0 + epsilon) / 2.0 };
        SynthesisConfig {
            n,
            max_parents: 3,
            mpn_type,
            epsilon,
            theta_pos_range: (pos_lo, pos_lo.max(0.95)),
            theta_neg_range: (0.0, epsilon),
            root_marginal_range: (0.2, 0.8),
            forbid_transitive_edges: false,
            require_faithful: false,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::config("n", "must be at least 1"));
        }
        if self.max_parents == 0 {
            return Err(Error::config("max_parents", "must be at least 1"));
        }
        if !(0.0..1.0).contains(&self.epsilon) {
            return Err(Error::config(
                "epsilon",
                format!("{} is outside [0, 1)", self.epsilon),
            ));
        }
        let (lo, hi) = self.theta_pos_range;
        if !(lo > self.epsilon && lo <= hi && hi <= 1.0) {
            return Err(Error::config(
                "theta_pos_range",
                format!("({lo}, {hi}] must satisfy epsilon < lo <= hi <= 1"),
            ));
        }
        let (lo, hi) = self.theta_neg_range;
        if !(lo >= 0.0 && lo <= hi && hi <= self.epsilon) {
            return Err(Error::config(
                "theta_neg_range",
                format!("[{lo}, {hi}] must satisfy 0 <= lo <= hi <= epsilon"),
            ));
        }
        let (lo, hi) = self.root_marginal_range;
        if !(lo >= 0.0 && lo <= hi && hi <= 1.0) {
            return Err(Error::config(
                "root_marginal_range",
                format!("({lo}, {hi}) must lie within [0, 1]"),
            ));
        }
        Ok(())
    }
}

fn uniform(rng: &mut Rng, (lo, hi): (f64, f64)) -> f64 {
    if lo >= hi {
        lo
    } else {
        rng.gen_range(lo..=hi)
    }
}

/// Random DAG: a uniformly shuffled topological order, then for each node a
/// parent count uniform in `[0, max_parents]` and parents drawn uniformly
/// from its predecessors. Parent draws creating a shortcut edge are redrawn
/// when transitive edges are forbidden.
pub fn random_dag(config: &SynthesisConfig, rng: &mut Rng) -> Result<Dag> {
    config.validate()?;
    let n = config.n;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);

    let mut parents = vec![Vec::new(); n];
    // ancestors[v][u]: u is a proper ancestor of v
    let mut ancestors = vec![vec![false; n]; n];
    for (pos, &v) in order.iter().enumerate() {
        let max = config.max_parents.min(pos);
        let mut chosen = None;
        for _ in 0..PARENT_DRAWS {
            let count = rng.gen_range(0..=max);
            let set: Vec<usize> = index::sample(rng, pos, count)
                .into_iter()
                .map(|i| order[i])
                .collect();
            let shortcut = config.forbid_transitive_edges
                && set
                    .iter()
                    .any(|&a| set.iter().any(|&b| a != b && ancestors[b][a]));
            if !shortcut {
                chosen = Some(set);
                break;
            }
        }
        let mut set = chosen.ok_or_else(|| {
            Error::InfeasibleConfig(format!(
                "no admissible parent set for node {v} after {PARENT_DRAWS} draws"
            ))
        })?;
        set.sort_unstable();
        let mut anc = vec![false; n];
        for &p in &set {
            anc[p] = true;
            for u in 0..n {
                anc[u] |= ancestors[p][u];
            }
        }
        ancestors[v] = anc;
        parents[v] = set;
    }
    Dag::new(default_names(n), parents)
}

/// Draws CPD rows for `dag` conforming to the configured monotonicity constraints.
pub fn random_mpn(dag: &Dag, config: &SynthesisConfig, rng: &mut Rng) -> Result<Network> {
    config.validate()?;
    let mut cpds = Vec::with_capacity(dag.n());
    for v in 0..dag.n() {
        let parents = dag.parents(v).to_vec();
        let k = parents.len();
        let rows = if k == 0 {
            vec![uniform(rng, config.root_marginal_range)]
        } else {
            (0..1usize << k)
                .map(|r| match config.mpn_type.row_class(k, r) {
                    RowClass::Positive => uniform(rng, config.theta_pos_range),
                    RowClass::Negative => uniform(rng, config.theta_neg_range),
                })
                .collect()
        };
        cpds.push(Cpd::new(v, parents, rows)?);
    }
    Network::new(dag.clone(), cpds, config.mpn_type, config.epsilon)
}

/// Generates a network from `config.seed`, resampling until the
/// faithfulness requirement (if any) is met.
pub fn generate_network(config: &SynthesisConfig) -> Result<Network> {
    let mut rng = substream(config.seed, "network", &[]);
    generate_network_with(config, &mut rng)
}

pub fn generate_network_with(config: &SynthesisConfig, rng: &mut Rng) -> Result<Network> {
    config.validate()?;
    for _ in 0..NETWORK_ATTEMPTS {
        let dag = random_dag(config, rng)?;
        let network = random_mpn(&dag, config, rng)?;
        if !config.require_faithful || is_faithful(&network)? {
            return Ok(network);
        }
    }
    Err(Error::InfeasibleConfig(format!(
        "no faithful network found in {NETWORK_ATTEMPTS} attempts"
    )))
}

/// Forward-samples `m` i.i.d. samples in topological order.
pub fn sample(network: &Network, m: usize, rng: &mut Rng) -> Result<Dataset> {
    if m == 0 {
        return Err(Error::config("m", "sample count must be at least 1"));
    }
    let n = network.n();
    let order = network.dag().topological_order();
    let mut values = vec![0u8; m * n];
    for row in values.chunks_exact_mut(n) {
        for &v in &order {
            let cpd = network.cpd(v);
            let p = cpd.rows[cpd.row_for(row)];
            row[v] = u8::from(rng.gen::<f64>() < p);
        }
    }
    Dataset::from_flat(network.names().to_vec(), values)
}

/// The full joint distribution of a small network.
///
/// Entry `a` is the probability of the assignment where bit `v` of `a`
/// is the value of node `v`.
#[derive(Debug, Clone)]
pub struct ExactJoint {
    n: usize,
    probs: Vec<f64>,
}

impl ExactJoint {
    pub fn new(network: &Network) -> Result<Self> {
        let n = network.n();
        if n > MAX_EXACT_NODES {
            return Err(Error::TooLarge {
                what: "exact joint enumeration",
                n,
                limit: MAX_EXACT_NODES,
            });
        }
        let probs = (0..1usize << n)
            .map(|a| {
                network
                    .cpds()
                    .iter()
                    .map(|cpd| {
                        let row = cpd
                            .parents
                            .iter()
                            .enumerate()
                            .fold(0, |acc, (i, &p)| acc | (((a >> p) & 1) << i));
                        let p = cpd.rows[row];
                        if (a >> cpd.child) & 1 == 1 {
                            p
                        } else {
                            1.0 - p
                        }
                    })
                    .product()
            })
            .collect();
        Ok(ExactJoint { n, probs })
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    pub fn marginals(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for (a, &p) in self.probs.iter().enumerate() {
            for (v, slot) in out.iter_mut().enumerate() {
                if (a >> v) & 1 == 1 {
                    *slot += p;
                }
            }
        }
        out
    }

    /// For each row of `parents`: `(P(parents = row), P(parents = row, child = 1))`.
    pub fn row_masses(&self, child: usize, parents: &[usize]) -> (Vec<f64>, Vec<f64>) {
        let rows = 1usize << parents.len();
        let mut weight = vec![0.0; rows];
        let mut joint_one = vec![0.0; rows];
        for (a, &p) in self.probs.iter().enumerate() {
            let row = parents
                .iter()
                .enumerate()
                .fold(0, |acc, (i, &q)| acc | (((a >> q) & 1) << i));
            weight[row] += p;
            if (a >> child) & 1 == 1 {
                joint_one[row] += p;
            }
        }
        (weight, joint_one)
    }
}

/// `P(X_i = 1)` for every node, by summing the factorized joint.
pub fn exact_marginals(network: &Network) -> Result<Vec<f64>> {
    Ok(ExactJoint::new(network)?.marginals())
}

/// Every parent is strictly more probable than its child. Along any
/// directed path marginals then strictly decrease, so ancestors are
/// more probable than all of their descendants.
pub fn is_faithful(network: &Network) -> Result<bool> {
    let marginals = exact_marginals(network)?;
    Ok(network
        .dag()
        .edges()
        .iter()
        .all(|&(u, w)| marginals[u] > marginals[w]))
}
