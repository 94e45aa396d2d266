//! Undirected signed graphs and their algebraic matrices.
//!
//! Edges are stored with a fixed orientation (tail, head). The orientation only
//! affects the incidence matrix column signs; the Laplacian is invariant and the
//! edge Laplacian changes by a diagonal ±1 similarity.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::RealMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "i64", into = "i64")]
pub enum Sign {
    Cooperative,
    Antagonistic,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Cooperative => 1.0,
            Sign::Antagonistic => -1.0,
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Sign::Cooperative => 1,
            Sign::Antagonistic => -1,
        }
    }

    pub fn flipped(self) -> Sign {
        match self {
            Sign::Cooperative => Sign::Antagonistic,
            Sign::Antagonistic => Sign::Cooperative,
        }
    }
}

impl TryFrom<i64> for Sign {
    type Error = String;

    fn try_from(v: i64) -> std::result::Result<Self, String> {
        match v {
            1 => Ok(Sign::Cooperative),
            -1 => Ok(Sign::Antagonistic),
            other => Err(format!("edge sign must be +1 or -1, got {other}")),
        }
    }
}

impl From<Sign> for i64 {
    fn from(s: Sign) -> i64 {
        s.as_i8() as i64
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Cooperative => "+",
            Sign::Antagonistic => "-",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SignedEdge {
    pub tail: usize,
    pub head: usize,
    pub sign: Sign,
}

impl SignedEdge {
    pub fn new(tail: usize, head: usize, sign: Sign) -> Self {
        SignedEdge { tail, head, sign }
    }

    pub fn coop(tail: usize, head: usize) -> Self {
        Self::new(tail, head, Sign::Cooperative)
    }

    pub fn anta(tail: usize, head: usize) -> Self {
        Self::new(tail, head, Sign::Antagonistic)
    }

    pub fn touches(&self, node: usize) -> bool {
        self.tail == node || self.head == node
    }

    /// The endpoint opposite `node`.
    pub fn other(&self, node: usize) -> usize {
        if self.tail == node {
            self.head
        } else {
            self.tail
        }
    }

    fn unordered(&self) -> (usize, usize) {
        (self.tail.min(self.head), self.tail.max(self.head))
    }
}

/// A validated undirected signed graph with labelled nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct SignedGraph {
    labels: Vec<String>,
    edges: Vec<SignedEdge>,
}

impl SignedGraph {
    /// Graph on `n_nodes` nodes labelled `"0"`, `"1"`, ...
    pub fn new(n_nodes: usize, edges: Vec<SignedEdge>) -> Result<Self> {
        Self::with_labels((0..n_nodes).map(|i| i.to_string()).collect(), edges)
    }

    pub fn with_labels(labels: Vec<String>, edges: Vec<SignedEdge>) -> Result<Self> {
        let n = labels.len();
        if n == 0 {
            return Err(Error::InvalidGraph("a graph needs at least one node".into()));
        }
        let distinct: BTreeSet<&str> = labels.iter().map(String::as_str).collect();
        if distinct.len() != n {
            return Err(Error::InvalidGraph("node labels must be unique".into()));
        }
        let mut pairs = BTreeSet::new();
        for (k, e) in edges.iter().enumerate() {
            if e.tail >= n || e.head >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge {k} references node outside [0, {n})"
                )));
            }
            if e.tail == e.head {
                return Err(Error::InvalidGraph(format!("edge {k} is a self-loop")));
            }
            if !pairs.insert(e.unordered()) {
                return Err(Error::InvalidGraph(format!(
                    "edge {k} duplicates the node pair ({}, {})",
                    labels[e.tail], labels[e.head]
                )));
            }
        }
        Ok(SignedGraph { labels, edges })
    }

    pub fn n_nodes(&self) -> usize {
        self.labels.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[SignedEdge] {
        &self.edges
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, node: usize) -> &str {
        &self.labels[node]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Same topology and orientation with every edge cooperative.
    pub fn unsigned(&self) -> SignedGraph {
        SignedGraph {
            labels: self.labels.clone(),
            edges: self
                .edges
                .iter()
                .map(|e| SignedEdge::coop(e.tail, e.head))
                .collect(),
        }
    }

    /// Incident edge indices per node, in increasing edge order.
    pub(crate) fn incidence_lists(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n_nodes()];
        for (k, e) in self.edges.iter().enumerate() {
            adj[e.tail].push(k);
            adj[e.head].push(k);
        }
        adj
    }

    /// Label-level identity of the graph, insensitive to edge order and orientation.
    pub fn canonical_key(&self) -> (BTreeSet<String>, BTreeSet<(String, String, i8)>) {
        let nodes = self.labels.iter().cloned().collect();
        let edges = self
            .edges
            .iter()
            .map(|e| {
                let (a, b) = (self.label(e.tail), self.label(e.head));
                let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
                (lo.to_string(), hi.to_string(), e.sign.as_i8())
            })
            .collect();
        (nodes, edges)
    }
}

/// Signed incidence matrix (N×M): `+1` at the tail, `-sign` at the head.
pub fn incidence_matrix(g: &SignedGraph) -> RealMatrix {
    let mut e = RealMatrix::zeros(g.n_nodes(), g.n_edges());
    for (k, edge) in g.edges().iter().enumerate() {
        e[(edge.tail, k)] = 1.0;
        e[(edge.head, k)] = -edge.sign.value();
    }
    e
}

/// Signed Laplacian: `ℓ_ii = Σ|a_ij|`, `ℓ_ij = -a_ij`.
pub fn signed_laplacian(g: &SignedGraph) -> RealMatrix {
    let mut l = RealMatrix::zeros(g.n_nodes(), g.n_nodes());
    for e in g.edges() {
        l[(e.tail, e.tail)] += 1.0;
        l[(e.head, e.head)] += 1.0;
        l[(e.tail, e.head)] -= e.sign.value();
        l[(e.head, e.tail)] -= e.sign.value();
    }
    l
}

/// Edge Laplacian `Eᵀ E` (M×M).
pub fn edge_laplacian(g: &SignedGraph) -> RealMatrix {
    let e = incidence_matrix(g);
    &e.transpose() * &e
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BalanceResult {
    /// Structurally balanced; `gauge[i] = +1` for the first camp, `-1` for the second.
    Balanced { gauge: Vec<i8> },
    /// Structurally unbalanced; the edges of a cycle with negative sign product.
    Unbalanced { witness_cycle: Vec<usize> },
}

impl BalanceResult {
    pub fn is_balanced(&self) -> bool {
        matches!(self, BalanceResult::Balanced { .. })
    }

    pub fn gauge(&self) -> Option<&[i8]> {
        match self {
            BalanceResult::Balanced { gauge } => Some(gauge),
            BalanceResult::Unbalanced { .. } => None,
        }
    }

    pub fn witness_cycle(&self) -> Option<&[usize]> {
        match self {
            BalanceResult::Balanced { .. } => None,
            BalanceResult::Unbalanced { witness_cycle } => Some(witness_cycle),
        }
    }

    /// Node indices of the two camps (`+1` first).
    pub fn partition(&self) -> Option<(Vec<usize>, Vec<usize>)> {
        let gauge = self.gauge()?;
        let (plus, minus): (Vec<usize>, Vec<usize>) = (0..gauge.len()).partition(|&i| gauge[i] > 0);
        Some((plus, minus))
    }

    pub fn verdict(&self) -> &'static str {
        if self.is_balanced() {
            "SB"
        } else {
            "SUB"
        }
    }
}

/// Breadth-first 2-colouring with `d_tail · d_head = sign` on every edge.
///
/// Each component is rooted at its lowest-index node, which receives `+1`.
/// The first contradiction found yields the witness cycle.
pub fn check_structural_balance(g: &SignedGraph) -> BalanceResult {
    let n = g.n_nodes();
    let adj = g.incidence_lists();
    let mut gauge: Vec<i8> = vec![0; n];
    // (parent node, edge to parent)
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; n];
    let mut queue = VecDeque::new();

    for root in 0..n {
        if gauge[root] != 0 {
            continue;
        }
        gauge[root] = 1;
        queue.push_back(root);
        while let Some(u) = queue.pop_front() {
            for &k in &adj[u] {
                let e = g.edges()[k];
                let v = e.other(u);
                let want = gauge[u] * e.sign.as_i8();
                if gauge[v] == 0 {
                    gauge[v] = want;
                    parent[v] = Some((u, k));
                    queue.push_back(v);
                } else if gauge[v] != want {
                    return BalanceResult::Unbalanced {
                        witness_cycle: close_cycle(&parent, u, v, k),
                    };
                }
            }
        }
    }
    BalanceResult::Balanced { gauge }
}

fn close_cycle(parent: &[Option<(usize, usize)>], u: usize, v: usize, closing: usize) -> Vec<usize> {
    let ancestors = |mut x: usize| {
        let mut path = vec![x];
        while let Some((p, _)) = parent[x] {
            path.push(p);
            x = p;
        }
        path
    };
    let up_u = ancestors(u);
    let up_v = ancestors(v);
    let on_u: BTreeSet<usize> = up_u.iter().copied().collect();
    let lca = *up_v.iter().find(|x| on_u.contains(x)).expect("same BFS tree");

    let mut cycle = Vec::new();
    for path in [&up_u, &up_v] {
        for &x in path.iter().take_while(|&&x| x != lca) {
            cycle.push(parent[x].expect("non-root").1);
        }
    }
    cycle.push(closing);
    cycle
}

/// Node and edge gauge matrices `D = diag(d)` and `D_e = diag(d_tail(k))`.
pub fn gauge_matrices(g: &SignedGraph, balance: &BalanceResult) -> Result<(RealMatrix, RealMatrix)> {
    let gauge = balance.gauge().ok_or(Error::NotStructurallyBalanced)?;
    if gauge.len() != g.n_nodes() {
        return Err(Error::DimensionMismatch {
            what: "gauge vector",
            expected: g.n_nodes(),
            found: gauge.len(),
        });
    }
    let d: Vec<f64> = gauge.iter().map(|&s| s as f64).collect();
    let d_e: Vec<f64> = g.edges().iter().map(|e| d[e.tail]).collect();
    Ok((RealMatrix::from_diag(&d), RealMatrix::from_diag(&d_e)))
}

pub fn is_connected(g: &SignedGraph) -> bool {
    bfs_tree(g).len() + 1 == g.n_nodes()
}

/// Breadth-first spanning tree from node 0, taking the lowest edge index first.
/// Returned edge indices are sorted.
pub fn spanning_tree(g: &SignedGraph) -> Result<Vec<usize>> {
    let mut tree = bfs_tree(g);
    if tree.len() + 1 != g.n_nodes() {
        return Err(Error::NotConnected);
    }
    tree.sort_unstable();
    Ok(tree)
}

fn bfs_tree(g: &SignedGraph) -> Vec<usize> {
    let adj = g.incidence_lists();
    let mut seen = vec![false; g.n_nodes()];
    let mut tree = Vec::new();
    let mut queue = VecDeque::from([0]);
    seen[0] = true;
    while let Some(u) = queue.pop_front() {
        for &k in &adj[u] {
            let v = g.edges()[k].other(u);
            if !seen[v] {
                seen[v] = true;
                tree.push(k);
                queue.push_back(v);
            }
        }
    }
    tree
}
