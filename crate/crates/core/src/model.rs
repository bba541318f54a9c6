//! Graphs, conditional probability tables, networks and datasets.
//!
//! A CPD row index `r` encodes a parent assignment: bit `i` of `r` (least
//! significant bit first) is the value of the `i`-th parent in ascending
//! parent order. Every file format and every score uses this encoding.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Logical relation among the parents under which a child is expected to occur.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MpnType {
    /// Child occurs when all of its parents are present.
    #[serde(rename = "CMPN")]
    Cmpn,
    /// Child occurs when at least one parent is present.
    #[serde(rename = "DMPN")]
    Dmpn,
    /// Child occurs when exactly one parent is present.
    #[serde(rename = "XMPN")]
    Xmpn,
}

impl MpnType {
    pub const ALL: [MpnType; 3] = [MpnType::Cmpn, MpnType::Dmpn, MpnType::Xmpn];

    /// Classifies CPD row `row` of a node with `n_parents` parents.
    ///
    /// A root node has one row and it is always positive.
    pub fn row_class(self, n_parents: usize, row: usize) -> RowClass {
        debug_assert!(n_parents < usize::BITS as usize && row < (1usize << n_parents));
        if n_parents == 0 {
            return RowClass::Positive;
        }
        let active = row.count_ones() as usize;
        let positive = match self {
            MpnType::Cmpn => active == n_parents,
            MpnType::Dmpn => active > 0,
            MpnType::Xmpn => active == 1,
        };
        if positive {
            RowClass::Positive
        } else {
            RowClass::Negative
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            MpnType::Cmpn => "CMPN",
            MpnType::Dmpn => "DMPN",
            MpnType::Xmpn => "XMPN",
        }
    }
}

impl fmt::Display for MpnType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MpnType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "CMPN" => Ok(MpnType::Cmpn),
            "DMPN" | "SMPN" => Ok(MpnType::Dmpn),
            "XMPN" => Ok(MpnType::Xmpn),
            _ => Err(Error::config("mpn_type", format!("unknown MPN type `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RowClass {
    Positive,
    Negative,
}

/// Classifies a parent assignment given as one flag per parent.
pub fn row_class(mpn_type: MpnType, assignment: &[bool]) -> RowClass {
    mpn_type.row_class(assignment.len(), row_index(assignment))
}

/// Row index of a parent assignment (first parent = least significant bit).
pub fn row_index(assignment: &[bool]) -> usize {
    assignment
        .iter()
        .enumerate()
        .fold(0, |acc, (i, &on)| acc | (usize::from(on) << i))
}

/// Parent assignment encoded by `row` for a node with `n_parents` parents.
pub fn row_assignment(row: usize, n_parents: usize) -> Vec<bool> {
    (0..n_parents).map(|i| (row >> i) & 1 == 1).collect()
}

/// Checks that `parent_sets` describes a DAG over `parent_sets.len()` nodes.
pub fn validate_dag(parent_sets: &[Vec<usize>]) -> Result<()> {
    let n = parent_sets.len();
    for (node, parents) in parent_sets.iter().enumerate() {
        let mut seen = BTreeSet::new();
        for &parent in parents {
            if parent >= n {
                return Err(Error::IndexOutOfRange { node, parent, n });
            }
            if parent == node {
                return Err(Error::SelfLoop { node });
            }
            if !seen.insert(parent) {
                return Err(Error::DuplicateParent { node, parent });
            }
        }
    }
    topological_order(parent_sets).map(|_| ())
}

/// Kahn's algorithm; among ready nodes the smallest index goes first.
///
/// Fails with `CycleDetected` naming one cycle when the graph is cyclic.
/// Parent indices must already be in range.
pub fn topological_order(parent_sets: &[Vec<usize>]) -> Result<Vec<usize>> {
    let n = parent_sets.len();
    let mut remaining: Vec<usize> = parent_sets.iter().map(Vec::len).collect();
    let mut children = vec![Vec::new(); n];
    for (child, parents) in parent_sets.iter().enumerate() {
        for &p in parents {
            if p >= n {
                return Err(Error::IndexOutOfRange {
                    node: child,
                    parent: p,
                    n,
                });
            }
            children[p].push(child);
        }
    }
    let mut ready: BTreeSet<usize> = (0..n).filter(|&v| remaining[v] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(v) = ready.pop_first() {
        order.push(v);
        for &c in &children[v] {
            remaining[c] -= 1;
            if remaining[c] == 0 {
                ready.insert(c);
            }
        }
    }
    if order.len() == n {
        return Ok(order);
    }

    // Every unplaced node still waits on an unplaced parent, so walking
    // parent links from any of them must revisit a node.
    let start = (0..n).find(|&v| remaining[v] > 0).expect("unplaced node");
    let mut position = vec![usize::MAX; n];
    let mut walk = Vec::new();
    let mut v = start;
    while position[v] == usize::MAX {
        position[v] = walk.len();
        walk.push(v);
        v = *parent_sets[v]
            .iter()
            .find(|&&p| remaining[p] > 0)
            .expect("unplaced parent");
    }
    let mut cycle = walk[position[v]..].to_vec();
    // The walk follows parent links; report the cycle in edge direction.
    cycle.reverse();
    Err(Error::CycleDetected(cycle))
}

/// A validated directed acyclic graph with named nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dag {
    names: Vec<String>,
    parents: Vec<Vec<usize>>,
}

impl Dag {
    /// Builds a DAG, sorting each parent set into ascending order.
    pub fn new(names: Vec<String>, mut parents: Vec<Vec<usize>>) -> Result<Self> {
        if names.len() != parents.len() {
            return Err(Error::InvalidNetwork(format!(
                "{} names for {} parent sets",
                names.len(),
                parents.len()
            )));
        }
        validate_dag(&parents)?;
        for set in &mut parents {
            set.sort_unstable();
        }
        Ok(Dag { names, parents })
    }

    /// Builds a DAG with default names `X0`, `X1`, ...
    pub fn from_parents(parents: Vec<Vec<usize>>) -> Result<Self> {
        Dag::new(default_names(parents.len()), parents)
    }

    pub fn empty(names: Vec<String>) -> Self {
        let n = names.len();
        Dag {
            names,
            parents: vec![Vec::new(); n],
        }
    }

    pub fn n(&self) -> usize {
        self.parents.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn parents(&self, node: usize) -> &[usize] {
        &self.parents[node]
    }

    pub fn parent_sets(&self) -> &[Vec<usize>] {
        &self.parents
    }

    /// Directed edges `(from, to)` in ascending order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut edges: Vec<_> = self
            .parents
            .iter()
            .enumerate()
            .flat_map(|(to, ps)| ps.iter().map(move |&from| (from, to)))
            .collect();
        edges.sort_unstable();
        edges
    }

    pub fn edge_count(&self) -> usize {
        self.parents.iter().map(Vec::len).sum()
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        to < self.n() && self.parents[to].binary_search(&from).is_ok()
    }

    pub fn topological_order(&self) -> Vec<usize> {
        topological_order(&self.parents).expect("validated at construction")
    }

    /// Copy of the graph with `node`'s parents replaced.
    pub fn with_parents(&self, node: usize, parents: Vec<usize>) -> Result<Dag> {
        let mut sets = self.parents.clone();
        sets[node] = parents;
        Dag::new(self.names.clone(), sets)
    }

    pub fn without_edge(&self, from: usize, to: usize) -> Result<Dag> {
        if !self.has_edge(from, to) {
            return Err(Error::EdgeNotPresent { from, to });
        }
        let mut sets = self.parents.clone();
        sets[to].retain(|&p| p != from);
        Ok(Dag {
            names: self.names.clone(),
            parents: sets,
        })
    }

    /// `reach[u][w]` is true when a directed path of length >= 1 leads from u to w.
    pub fn reachability(&self) -> Vec<Vec<bool>> {
        let n = self.n();
        let mut reach = vec![vec![false; n]; n];
        for v in self.topological_order() {
            for &p in &self.parents[v] {
                reach[p][v] = true;
                for row in reach.iter_mut() {
                    if row[p] {
                        row[v] = true;
                    }
                }
            }
        }
        reach
    }

    /// Edges `u -> w` that are implied by a longer path `u -> ... -> w`.
    pub fn transitive_edges(&self) -> Vec<(usize, usize)> {
        let reach = self.reachability();
        self.edges()
            .into_iter()
            .filter(|&(u, w)| {
                self.parents[w]
                    .iter()
                    .any(|&p| p != u && reach[u][p])
            })
            .collect()
    }
}

pub(crate) fn default_names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("X{i}")).collect()
}

/// Conditional probability table `P(child = 1 | parents)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cpd {
    pub child: usize,
    pub parents: Vec<usize>,
    /// One probability per parent assignment, indexed by row encoding.
    pub rows: Vec<f64>,
    /// Samples matching each row; zero for analytic tables.
    pub support: Vec<u64>,
}

impl Cpd {
    pub fn new(child: usize, parents: Vec<usize>, rows: Vec<f64>) -> Result<Self> {
        let expected = 1usize << parents.len();
        if rows.len() != expected {
            return Err(Error::InvalidNetwork(format!(
                "node {child}: CPD has {} rows, expected {expected}",
                rows.len()
            )));
        }
        if let Some(p) = rows.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::InvalidNetwork(format!(
                "node {child}: probability {p} outside [0, 1]"
            )));
        }
        let support = vec![0; rows.len()];
        Ok(Cpd {
            child,
            parents,
            rows,
            support,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    /// Row matched by a full sample (one value per variable).
    pub fn row_for(&self, sample: &[u8]) -> usize {
        self.parents
            .iter()
            .enumerate()
            .fold(0, |acc, (i, &p)| acc | (usize::from(sample[p]) << i))
    }
}

/// A complete monotonic progression network.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    dag: Dag,
    cpds: Vec<Cpd>,
    mpn_type: MpnType,
    epsilon: f64,
}

impl Network {
    pub fn new(dag: Dag, cpds: Vec<Cpd>, mpn_type: MpnType, epsilon: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&epsilon) {
            return Err(Error::config("epsilon", format!("{epsilon} is outside [0, 1)")));
        }
        if cpds.len() != dag.n() {
            return Err(Error::InvalidNetwork(format!(
                "{} CPDs for {} nodes",
                cpds.len(),
                dag.n()
            )));
        }
        for (i, cpd) in cpds.iter().enumerate() {
            if cpd.child != i || cpd.parents != dag.parents(i) {
                return Err(Error::InvalidNetwork(format!(
                    "CPD {i} does not match the graph's parent set for node {i}"
                )));
            }
            if cpd.rows.len() != 1 << cpd.parents.len() {
                return Err(Error::InvalidNetwork(format!("node {i}: wrong row count")));
            }
        }
        Ok(Network {
            dag,
            cpds,
            mpn_type,
            epsilon,
        })
    }

    pub fn dag(&self) -> &Dag {
        &self.dag
    }

    pub fn cpds(&self) -> &[Cpd] {
        &self.cpds
    }

    pub fn cpd(&self, node: usize) -> &Cpd {
        &self.cpds[node]
    }

    pub fn mpn_type(&self) -> MpnType {
        self.mpn_type
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn n(&self) -> usize {
        self.dag.n()
    }

    pub fn names(&self) -> &[String] {
        self.dag.names()
    }

    /// Rows breaking the monotonicity constraints, as `(node, row)`.
    /// Root nodes are unconstrained.
    pub fn monotonicity_violations(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for cpd in &self.cpds {
            let k = cpd.parents.len();
            if k == 0 {
                continue;
            }
            for (row, &p) in cpd.rows.iter().enumerate() {
                let ok = match self.mpn_type.row_class(k, row) {
                    RowClass::Positive => p > self.epsilon,
                    RowClass::Negative => p <= self.epsilon,
                };
                if !ok {
                    out.push((cpd.child, row));
                }
            }
        }
        out
    }

    pub fn is_conformant(&self) -> bool {
        self.monotonicity_violations().is_empty()
    }
}

/// `m` binary samples over `n` named variables, stored row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    names: Vec<String>,
    m: usize,
    values: Vec<u8>,
}

impl Dataset {
    pub fn new(names: Vec<String>, rows: &[Vec<u8>]) -> Result<Self> {
        let n = names.len();
        let mut values = Vec::with_capacity(rows.len() * n);
        for (s, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidDataset(format!(
                    "sample {s} has {} values, expected {n}",
                    row.len()
                )));
            }
            values.extend_from_slice(row);
        }
        Dataset::from_flat(names, values)
    }

    pub fn from_flat(names: Vec<String>, values: Vec<u8>) -> Result<Self> {
        let n = names.len();
        if n == 0 {
            return Err(Error::InvalidDataset("no variables".into()));
        }
        if !values.len().is_multiple_of(n) {
            return Err(Error::InvalidDataset(format!(
                "{} values do not fill rows of {n}",
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|&v| v > 1) {
            return Err(Error::InvalidDataset(format!(
                "sample {}, variable {}: value {} is not 0 or 1",
                pos / n,
                pos % n,
                values[pos]
            )));
        }
        Ok(Dataset {
            m: values.len() / n,
            names,
            values,
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn sample(&self, s: usize) -> &[u8] {
        let n = self.n();
        &self.values[s * n..(s + 1) * n]
    }

    pub fn samples(&self) -> impl Iterator<Item = &[u8]> + '_ {
        self.values.chunks_exact(self.n())
    }

    pub fn get(&self, s: usize, var: usize) -> u8 {
        self.values[s * self.n() + var]
    }

    pub fn values(&self) -> &[u8] {
        &self.values
    }

    /// Empirical frequency of `var = 1`.
    pub fn frequency(&self, var: usize) -> f64 {
        if self.m == 0 {
            return 0.0;
        }
        let ones: usize = self.samples().map(|s| usize::from(s[var])).sum();
        ones as f64 / self.m as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validate_examples() {
        assert!(validate_dag(&[vec![], vec![0]]).is_ok());
        assert!(matches!(
            validate_dag(&[vec![1], vec![0]]),
            Err(Error::CycleDetected(_))
        ));
        assert!(matches!(validate_dag(&[vec![0]]), Err(Error::SelfLoop { node: 0 })));
        assert!(matches!(
            validate_dag(&[vec![], vec![0, 0]]),
            Err(Error::DuplicateParent { node: 1, parent: 0 })
        ));
        assert!(matches!(
            validate_dag(&[vec![3]]),
            Err(Error::IndexOutOfRange { node: 0, parent: 3, n: 1 })
        ));
    }

    #[test]
    fn cycle_is_named_in_edge_direction() {
        // 0 -> 1 -> 2 -> 0, plus an innocent node 3.
        let err = topological_order(&[vec![2], vec![0], vec![1], vec![]]).unwrap_err();
        let Error::CycleDetected(cycle) = err else {
            panic!("expected a cycle")
        };
        assert_eq!(cycle.len(), 3);
        for (i, &v) in cycle.iter().enumerate() {
            let next = cycle[(i + 1) % cycle.len()];
            assert!([vec![2], vec![0], vec![1]][next].contains(&v));
        }
    }

    #[test]
    fn topological_order_examples() {
        assert_eq!(topological_order(&[vec![], vec![0], vec![1]]).unwrap(), [0, 1, 2]);
        assert_eq!(topological_order(&[vec![], vec![], vec![0, 1]]).unwrap(), [0, 1, 2]);
        assert_eq!(topological_order(&[vec![], vec![], vec![]]).unwrap(), [0, 1, 2]);
        assert_eq!(topological_order(&[vec![2], vec![], vec![]]).unwrap(), [1, 2, 0]);
    }

    #[test]
    fn row_class_examples() {
        assert_eq!(row_class(MpnType::Cmpn, &[true, true]), RowClass::Positive);
        assert_eq!(row_class(MpnType::Dmpn, &[false, false]), RowClass::Negative);
        assert_eq!(row_class(MpnType::Xmpn, &[true, true]), RowClass::Negative);
        for t in MpnType::ALL {
            assert_eq!(row_class(t, &[]), RowClass::Positive);
        }
    }

    #[test]
    fn row_class_counts() {
        for k in 1..=6usize {
            let count = |t: MpnType, c: RowClass| {
                (0..1usize << k).filter(|&r| t.row_class(k, r) == c).count()
            };
            assert_eq!(count(MpnType::Cmpn, RowClass::Positive), 1);
            assert_eq!(count(MpnType::Dmpn, RowClass::Negative), 1);
            assert_eq!(count(MpnType::Xmpn, RowClass::Positive), k);
            for r in 0..1usize << k {
                let a = row_assignment(r, k);
                let ones = a.iter().filter(|&&b| b).count();
                assert_eq!(row_index(&a), r);
                assert_eq!(
                    row_class(MpnType::Cmpn, &a) == RowClass::Positive,
                    ones == k
                );
                assert_eq!(row_class(MpnType::Dmpn, &a) == RowClass::Positive, ones > 0);
                assert_eq!(row_class(MpnType::Xmpn, &a) == RowClass::Positive, ones == 1);
            }
        }
    }

    #[test]
    fn mpn_type_parses() {
        assert_eq!("cmpn".parse::<MpnType>().unwrap(), MpnType::Cmpn);
        assert_eq!("XMPN".parse::<MpnType>().unwrap(), MpnType::Xmpn);
        assert!("nope".parse::<MpnType>().is_err());
    }

    #[test]
    fn dag_sorts_parents_and_lists_edges() {
        let dag = Dag::from_parents(vec![vec![], vec![], vec![1, 0]]).unwrap();
        assert_eq!(dag.parents(2), [0, 1]);
        assert_eq!(dag.edges(), [(0, 2), (1, 2)]);
        assert!(dag.has_edge(1, 2));
        assert!(!dag.has_edge(2, 1));
        let pruned = dag.without_edge(0, 2).unwrap();
        assert_eq!(pruned.edges(), [(1, 2)]);
        assert!(matches!(
            pruned.without_edge(0, 2),
            Err(Error::EdgeNotPresent { from: 0, to: 2 })
        ));
    }

    #[test]
    fn transitive_edges_found() {
        // 0 -> 1 -> 2 and the shortcut 0 -> 2.
        let dag = Dag::from_parents(vec![vec![], vec![0], vec![0, 1]]).unwrap();
        assert_eq!(dag.transitive_edges(), [(0, 2)]);
        let chain = Dag::from_parents(vec![vec![], vec![0], vec![1]]).unwrap();
        assert!(chain.transitive_edges().is_empty());
    }

    #[test]
    fn cpd_row_for_sample() {
        let cpd = Cpd::new(3, vec![0, 2], vec![0.0, 0.1, 0.2, 0.9]).unwrap();
        assert_eq!(cpd.row_for(&[1, 0, 0, 0]), 1);
        assert_eq!(cpd.row_for(&[0, 1, 1, 0]), 2);
        assert_eq!(cpd.row_for(&[1, 1, 1, 0]), 3);
        assert!(Cpd::new(0, vec![], vec![1.5]).is_err());
        assert!(Cpd::new(0, vec![1], vec![0.5]).is_err());
    }

    #[test]
    fn dataset_rejects_non_binary() {
        let names = vec!["a".to_string(), "b".to_string()];
        assert!(Dataset::new(names.clone(), &[vec![0, 2]]).is_err());
        assert!(Dataset::new(names.clone(), &[vec![0]]).is_err());
        let ds = Dataset::new(names, &[vec![0, 1], vec![1, 1]]).unwrap();
        assert_eq!(ds.m(), 2);
        assert_eq!(ds.sample(1), [1, 1]);
        assert_eq!(ds.frequency(0), 0.5);
    }

    #[test]
    fn network_conformance() {
        let dag = Dag::from_parents(vec![vec![], vec![0]]).unwrap();
        let cpds = vec![
            Cpd::new(0, vec![], vec![0.99]).unwrap(),
            Cpd::new(1, vec![0], vec![0.05, 0.8]).unwrap(),
        ];
        let net = Network::new(dag.clone(), cpds, MpnType::Cmpn, 0.1).unwrap();
        assert!(net.is_conformant());
        let bad = vec![
            Cpd::new(0, vec![], vec![0.5]).unwrap(),
            Cpd::new(1, vec![0], vec![0.2, 0.8]).unwrap(),
        ];
        let net = Network::new(dag, bad, MpnType::Cmpn, 0.1).unwrap();
        assert_eq!(net.monotonicity_violations(), [(1, 0)]);
    }
}
