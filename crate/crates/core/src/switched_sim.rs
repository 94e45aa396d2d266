//! Switched closed loop of the open multi-agent system.
//!
//! Node states are integrated with `ẋ = −k₁ L_s x` between switching instants
//! and edge errors `e = Eᵀ x` are derived from them. At a switch the node
//! state carries over for persisting agents, joining agents take their
//! configured value, and the edge-error jump `e⁺ = Ξ e⁻ + Φ` is recorded.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::{norm_inf, RealMatrix};
use crate::signed_graph::{incidence_matrix, is_connected, signed_laplacian, BalanceResult, SignedGraph};

#[derive(Clone, Debug, PartialEq)]
pub struct Mode {
    pub graph: SignedGraph,
    /// Activation time in seconds.
    pub start: f64,
}

/// Scalar consensus scenario: a finite mode sequence plus gains and initial states.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub modes: Vec<Mode>,
    pub k1: f64,
    /// Initial states of the first mode's nodes, in node order.
    pub x0: Vec<f64>,
    /// Value assigned to a node when it joins after `t = 0`.
    pub new_node_states: BTreeMap<String, f64>,
    pub t_end: f64,
    pub step: f64,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        let first = self
            .modes
            .first()
            .ok_or_else(|| Error::NonMonotoneSchedule("scenario has no modes".into()))?;
        if first.start != 0.0 {
            return Err(Error::NonMonotoneSchedule("first mode must start at t = 0".into()));
        }
        if let Some(w) = self.modes.windows(2).find(|w| !(w[1].start > w[0].start)) {
            return Err(Error::NonMonotoneSchedule(format!(
                "start time {} does not follow {}",
                w[1].start, w[0].start
            )));
        }
        let last = self.modes.last().unwrap().start;
        if !(self.t_end > last) || !self.t_end.is_finite() {
            return Err(Error::NonMonotoneSchedule(format!(
                "t_end {} must exceed the last switch time {last}",
                self.t_end
            )));
        }
        if !(self.step > 0.0) {
            return Err(Error::NonpositiveInput { what: "step", value: self.step });
        }
        if !(self.k1 > 0.0) {
            return Err(Error::NonpositiveInput { what: "k1", value: self.k1 });
        }
        if self.x0.len() != first.graph.n_nodes() {
            return Err(Error::DimensionMismatch {
                what: "initial state",
                expected: first.graph.n_nodes(),
                found: self.x0.len(),
            });
        }
        for m in &self.modes {
            if !is_connected(&m.graph) {
                return Err(Error::NotConnected);
            }
        }
        for w in self.modes.windows(2) {
            check_transition(&w[0].graph, &w[1].graph)?;
            for label in joining_nodes(&w[0].graph, &w[1].graph) {
                if !self.new_node_states.contains_key(label) {
                    return Err(Error::MissingInitialState(label.to_string()));
                }
            }
        }
        Ok(())
    }

    /// End of mode `i`'s activity interval.
    pub fn mode_end(&self, i: usize) -> f64 {
        self.modes.get(i + 1).map_or(self.t_end, |m| m.start)
    }
}

fn joining_nodes<'a>(old: &SignedGraph, new: &'a SignedGraph) -> Vec<&'a str> {
    new.labels()
        .iter()
        .filter(|l| old.index_of(l).is_none())
        .map(String::as_str)
        .collect()
}

/// Checks that `new` follows `old` by open-system operations only: at most one
/// node joins (appended last) or the most recently added node leaves, edges
/// may be created, and signs may flip. Edges between persisting nodes are never
/// removed.
pub fn check_transition(old: &SignedGraph, new: &SignedGraph) -> Result<()> {
    let old_set: BTreeSet<&str> = old.labels().iter().map(String::as_str).collect();
    let new_set: BTreeSet<&str> = new.labels().iter().map(String::as_str).collect();
    let added: Vec<&str> = new_set.difference(&old_set).copied().collect();
    let removed: Vec<&str> = old_set.difference(&new_set).copied().collect();
    if added.len() + removed.len() > 1 {
        return Err(Error::IllegalTransition(format!(
            "{} node(s) join and {} leave in one switch; at most one change is allowed",
            added.len(),
            removed.len()
        )));
    }
    if let Some(&gone) = removed.first() {
        let latest = old.labels().last().map(String::as_str);
        if latest != Some(gone) {
            return Err(Error::IllegalTransition(format!(
                "node `{gone}` leaves but only the most recently added node may be removed"
            )));
        }
    }
    let persisting: Vec<&str> = old
        .labels()
        .iter()
        .map(String::as_str)
        .filter(|l| new_set.contains(l))
        .collect();
    if new.labels().iter().zip(&persisting).any(|(a, b)| a != b) {
        return Err(Error::IllegalTransition(
            "persisting nodes must keep their order with any joining node last".into(),
        ));
    }

    let new_pairs: BTreeSet<(String, String)> = new
        .edges()
        .iter()
        .map(|e| label_pair(new, e.tail, e.head))
        .collect();
    for e in old.edges() {
        let (a, b) = (old.label(e.tail), old.label(e.head));
        if new_set.contains(a) && new_set.contains(b) && !new_pairs.contains(&label_pair(old, e.tail, e.head)) {
            return Err(Error::IllegalTransition(format!(
                "edge ({a}, {b}) disappears while both endpoints persist"
            )));
        }
    }
    Ok(())
}

fn label_pair(g: &SignedGraph, u: usize, v: usize) -> (String, String) {
    let (a, b) = (g.label(u), g.label(v));
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

/// Node state right after a switch: persisting nodes keep their value, joining
/// nodes take the configured one.
pub fn carry_state(
    old: &SignedGraph,
    new: &SignedGraph,
    x_old: &[f64],
    new_node_states: &BTreeMap<String, f64>,
) -> Result<Vec<f64>> {
    expect_len("node state", old.n_nodes(), x_old.len())?;
    new.labels()
        .iter()
        .map(|l| match old.index_of(l) {
            Some(i) => Ok(x_old[i]),
            None => new_node_states
                .get(l)
                .copied()
                .ok_or_else(|| Error::MissingInitialState(l.clone())),
        })
        .collect()
}

fn expect_len(what: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { what, expected, found });
    }
    Ok(())
}

/// `e_k = x_tail − sign · x_head`, i.e. `Eᵀ x`.
pub fn edge_error(g: &SignedGraph, x: &[f64]) -> Result<Vec<f64>> {
    expect_len("node state", g.n_nodes(), x.len())?;
    Ok(g.edges()
        .iter()
        .map(|e| x[e.tail] - e.sign.value() * x[e.head])
        .collect())
}

/// `u = −k₁ E e`.
pub fn control_input(g: &SignedGraph, e: &[f64], k1: f64) -> Result<Vec<f64>> {
    expect_len("edge error", g.n_edges(), e.len())?;
    let mut u = vec![0.0; g.n_nodes()];
    for (edge, &ek) in g.edges().iter().zip(e) {
        u[edge.tail] -= k1 * ek;
        u[edge.head] += k1 * edge.sign.value() * ek;
    }
    Ok(u)
}

/// Linear vector field `ẋ = A x` with a classical RK4 step.
#[derive(Clone, Debug)]
pub struct LinearFlow {
    a: RealMatrix,
}

impl LinearFlow {
    /// `A = −k₁ L_s` for the given mode.
    pub fn consensus(g: &SignedGraph, k1: f64) -> Self {
        LinearFlow {
            a: signed_laplacian(g).scale(-k1),
        }
    }

    pub fn from_matrix(a: RealMatrix) -> Self {
        LinearFlow { a }
    }

    pub fn rk4(&self, x: &[f64], h: f64) -> Vec<f64> {
        let k1 = self.a.mul_vec(x);
        let k2 = self.a.mul_vec(&axpy(x, 0.5 * h, &k1));
        let k3 = self.a.mul_vec(&axpy(x, 0.5 * h, &k2));
        let k4 = self.a.mul_vec(&axpy(x, h, &k3));
        x.iter()
            .enumerate()
            .map(|(i, xi)| xi + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
            .collect()
    }
}

pub(crate) fn axpy(x: &[f64], a: f64, y: &[f64]) -> Vec<f64> {
    x.iter().zip(y).map(|(xi, yi)| xi + a * yi).collect()
}

/// One RK4 step of `ẋ = −k₁ L_s x`.
pub fn flow_step(g: &SignedGraph, x: &[f64], k1: f64, h: f64) -> Vec<f64> {
    LinearFlow::consensus(g, k1).rk4(x, h)
}

/// Edge-error jump `e⁺ = Ξ e⁻ + Φ`.
#[derive(Clone, Debug, PartialEq)]
pub struct TransitionMap {
    /// `M_new × M_old` selection matrix with entries in {0, 1}.
    pub xi: RealMatrix,
    pub phi: Vec<f64>,
}

impl TransitionMap {
    pub fn apply(&self, e_old: &[f64]) -> Vec<f64> {
        let carried = self.xi.mul_vec(e_old);
        carried.iter().zip(&self.phi).map(|(a, b)| a + b).collect()
    }
}

/// Builds `Ξ` by matching edges on labelled endpoints and sign; a new or
/// sign-flipped edge gets a zero row and its value is carried entirely by `Φ`.
pub fn transition_map(old: &SignedGraph, new: &SignedGraph, x_old: &[f64], x_new: &[f64]) -> Result<TransitionMap> {
    check_transition(old, new)?;
    let mut xi = RealMatrix::zeros(new.n_edges(), old.n_edges());
    for (k_new, e_new) in new.edges().iter().enumerate() {
        let key = label_pair(new, e_new.tail, e_new.head);
        let matched = old
            .edges()
            .iter()
            .position(|e_old| e_old.sign == e_new.sign && label_pair(old, e_old.tail, e_old.head) == key);
        if let Some(k_old) = matched {
            xi[(k_new, k_old)] = 1.0;
        }
    }
    let e_old = edge_error(old, x_old)?;
    let e_new = edge_error(new, x_new)?;
    let carried = xi.mul_vec(&e_old);
    let phi = e_new.iter().zip(&carried).map(|(a, b)| a - b).collect();
    Ok(TransitionMap { xi, phi })
}

#[derive(Clone, Debug)]
pub struct JumpRecord {
    pub time: f64,
    pub from_mode: usize,
    pub to_mode: usize,
    pub map: TransitionMap,
    pub e_before: Vec<f64>,
    pub e_after: Vec<f64>,
}

/// Time-indexed trace. A switching instant appears twice: once closing the
/// old mode and once opening the new one.
#[derive(Clone, Debug, Default)]
pub struct SimulationTrace {
    pub times: Vec<f64>,
    pub mode_index: Vec<usize>,
    pub node_states: Vec<Vec<f64>>,
    pub edge_errors: Vec<Vec<f64>>,
    /// Node labels of each mode, in state order.
    pub node_labels: Vec<Vec<String>>,
    pub jumps: Vec<JumpRecord>,
}

impl SimulationTrace {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_state(&self) -> &[f64] {
        self.node_states.last().map_or(&[], Vec::as_slice)
    }

    pub fn final_edge_error(&self) -> &[f64] {
        self.edge_errors.last().map_or(&[], Vec::as_slice)
    }

    /// Sample index range covered by mode `i`.
    pub fn mode_samples(&self, i: usize) -> std::ops::Range<usize> {
        let start = self.mode_index.partition_point(|&m| m < i);
        let end = self.mode_index.partition_point(|&m| m <= i);
        start..end
    }

    fn push(&mut self, t: f64, mode: usize, x: Vec<f64>, e: Vec<f64>) {
        self.times.push(t);
        self.mode_index.push(mode);
        self.node_states.push(x);
        self.edge_errors.push(e);
    }
}

/// Number of integration steps covering `[t_a, t_b]` with nominal step `h`;
/// the last step is shortened so that it lands on `t_b`.
pub(crate) fn step_grid(t_a: f64, t_b: f64, h: f64) -> impl Iterator<Item = f64> {
    let n = (((t_b - t_a) / h) - 1e-9).ceil().max(1.0) as usize;
    (1..=n).map(move |j| if j == n { t_b } else { t_a + j as f64 * h })
}

pub fn simulate(s: &Scenario) -> Result<SimulationTrace> {
    s.validate()?;
    let mut trace = SimulationTrace {
        node_labels: s.modes.iter().map(|m| m.graph.labels().to_vec()).collect(),
        ..Default::default()
    };
    let mut x = s.x0.clone();
    for (i, mode) in s.modes.iter().enumerate() {
        let g = &mode.graph;
        if i > 0 {
            let prev = &s.modes[i - 1].graph;
            let x_new = carry_state(prev, g, &x, &s.new_node_states)?;
            let map = transition_map(prev, g, &x, &x_new)?;
            trace.jumps.push(JumpRecord {
                time: mode.start,
                from_mode: i - 1,
                to_mode: i,
                map,
                e_before: edge_error(prev, &x)?,
                e_after: edge_error(g, &x_new)?,
            });
            x = x_new;
        }
        let flow = LinearFlow::consensus(g, s.k1);
        let e_matrix = incidence_matrix(g);
        trace.push(mode.start, i, x.clone(), e_matrix.tr_mul_vec(&x));
        let mut t = mode.start;
        for t_next in step_grid(mode.start, s.mode_end(i), s.step) {
            x = flow.rk4(&x, t_next - t);
            t = t_next;
            trace.push(t, i, x.clone(), e_matrix.tr_mul_vec(&x));
        }
    }
    Ok(trace)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Outcome {
    /// `x → α D 1`.
    Bipartite {
        alpha: f64,
        positive_camp: Vec<String>,
        negative_camp: Vec<String>,
        max_deviation: f64,
    },
    /// `x → 0`.
    Trivial { max_state: f64 },
    NotConverged { max_edge_error: f64, max_deviation: f64 },
}

/// Classifies the terminal state against the final mode's balance.
pub fn classify_outcome(trace: &SimulationTrace, final_graph: &SignedGraph, balance: &BalanceResult, tol: f64) -> Outcome {
    let x = trace.final_state();
    let max_edge_error = norm_inf(trace.final_edge_error());
    match balance.gauge() {
        Some(d) => {
            let alpha = x.iter().zip(d).map(|(xi, &di)| xi * di as f64).sum::<f64>() / x.len() as f64;
            let max_deviation = x
                .iter()
                .zip(d)
                .map(|(xi, &di)| (xi - alpha * di as f64).abs())
                .fold(0.0, f64::max);
            if max_edge_error > tol || max_deviation > tol {
                return Outcome::NotConverged {
                    max_edge_error,
                    max_deviation,
                };
            }
            let (plus, minus) = balance.partition().unwrap();
            let names = |idx: Vec<usize>| idx.into_iter().map(|i| final_graph.label(i).to_string()).collect();
            Outcome::Bipartite {
                alpha,
                positive_camp: names(plus),
                negative_camp: names(minus),
                max_deviation,
            }
        }
        None => {
            let max_state = norm_inf(x);
            if max_edge_error > tol || max_state > tol {
                Outcome::NotConverged {
                    max_edge_error,
                    max_deviation: max_state,
                }
            } else {
                Outcome::Trivial { max_state }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signed_graph::{check_structural_balance, SignedEdge};

    fn labelled(labels: &[&str], edges: Vec<SignedEdge>) -> SignedGraph {
        SignedGraph::with_labels(labels.iter().map(|s| s.to_string()).collect(), edges).unwrap()
    }

    fn g1() -> SignedGraph {
        labelled(
            &["v1", "v2", "v3", "v4"],
            vec![
                SignedEdge::anta(0, 1),
                SignedEdge::coop(0, 2),
                SignedEdge::coop(1, 3),
                SignedEdge::anta(2, 3),
            ],
        )
    }

    fn g2() -> SignedGraph {
        let mut edges = g1().edges().to_vec();
        edges.push(SignedEdge::coop(0, 4));
        labelled(&["v1", "v2", "v3", "v4", "v5"], edges)
    }

    #[test]
    fn edge_errors_at_agreement() {
        let g = SignedGraph::new(2, vec![SignedEdge::coop(0, 1)]).unwrap();
        assert_eq!(edge_error(&g, &[3.0, 3.0]).unwrap(), vec![0.0]);
        let g = SignedGraph::new(2, vec![SignedEdge::anta(0, 1)]).unwrap();
        assert_eq!(edge_error(&g, &[3.0, -3.0]).unwrap(), vec![0.0]);
        assert_eq!(edge_error(&g1(), &[1.0, -1.0, 1.0, -1.0]).unwrap(), vec![0.0; 4]);
        assert!(edge_error(&g1(), &[1.0]).is_err());
    }

    #[test]
    fn control_inputs() {
        let g = SignedGraph::new(2, vec![SignedEdge::coop(0, 1)]).unwrap();
        assert_eq!(control_input(&g, &[0.0], 2.0).unwrap(), vec![0.0, 0.0]);
        let e = edge_error(&g, &[1.0, 0.0]).unwrap();
        assert_eq!(control_input(&g, &e, 2.0).unwrap(), vec![-2.0, 2.0]);
        let g = SignedGraph::new(2, vec![SignedEdge::anta(0, 1)]).unwrap();
        let e = edge_error(&g, &[1.0, 0.0]).unwrap();
        assert_eq!(control_input(&g, &e, 2.0).unwrap(), vec![-2.0, -2.0]);
        assert!(control_input(&g, &[1.0, 2.0], 1.0).is_err());
    }

    #[test]
    fn consensus_is_an_equilibrium() {
        let x = vec![2.0, -2.0, 2.0, -2.0];
        assert_eq!(flow_step(&g1(), &x, 1.0, 0.1), x);
    }

    #[test]
    fn two_node_decay_matches_closed_form() {
        // ė = −2e for a single cooperative edge with k₁ = 1
        let g = SignedGraph::new(2, vec![SignedEdge::coop(0, 1)]).unwrap();
        let mut x = vec![1.0, -1.0];
        for _ in 0..1000 {
            x = flow_step(&g, &x, 1.0, 1e-3);
        }
        let e = x[0] - x[1];
        assert!((e - 2.0 * (-2.0f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn cooperative_flow_conserves_sum() {
        let g = g1().unsigned();
        let x = vec![1.0, 4.0, -2.0, 0.5];
        let y = flow_step(&g, &x, 1.3, 0.05);
        assert!((x.iter().sum::<f64>() - y.iter().sum::<f64>()).abs() < 1e-9);
    }

    #[test]
    fn identical_graphs_give_identity_jump() {
        let x = vec![1.0, 2.0, 3.0, 4.0];
        let m = transition_map(&g1(), &g1(), &x, &x).unwrap();
        assert_eq!(m.xi, RealMatrix::identity(4));
        assert_eq!(m.phi, vec![0.0; 4]);
    }

    #[test]
    fn node_join_jump() {
        let x = vec![1.0, 2.0, 3.0, 4.0];
        let x_new = vec![1.0, 2.0, 3.0, 4.0, 7.0];
        let m = transition_map(&g1(), &g2(), &x, &x_new).unwrap();
        let mut xi = RealMatrix::zeros(5, 4);
        for i in 0..4 {
            xi[(i, i)] = 1.0;
        }
        assert_eq!(m.xi, xi);
        assert_eq!(m.phi, vec![0.0, 0.0, 0.0, 0.0, 1.0 - 7.0]);
    }

    #[test]
    fn sign_flip_jump_zeroes_row() {
        let mut edges = g1().edges().to_vec();
        edges[1] = SignedEdge::anta(0, 2);
        let flipped = labelled(&["v1", "v2", "v3", "v4"], edges);
        let x = vec![1.5, 2.0, -3.0, 4.0];
        let m = transition_map(&g1(), &flipped, &x, &x).unwrap();
        assert_eq!(m.xi.row(1), &[0.0; 4]);
        assert_eq!(m.phi[1], 1.5 + -3.0);
        let e_after = m.apply(&edge_error(&g1(), &x).unwrap());
        assert_eq!(e_after, edge_error(&flipped, &x).unwrap());
    }

    #[test]
    fn illegal_transitions() {
        // two nodes join at once
        let mut edges = g1().edges().to_vec();
        edges.push(SignedEdge::coop(0, 4));
        edges.push(SignedEdge::coop(0, 5));
        let two_more = labelled(&["v1", "v2", "v3", "v4", "v5", "v6"], edges);
        assert!(matches!(check_transition(&g1(), &two_more), Err(Error::IllegalTransition(_))));

        // removing a node that is not the latest
        let without_v1 = labelled(&["v2", "v3", "v4"], vec![SignedEdge::coop(0, 2), SignedEdge::anta(1, 2)]);
        assert!(matches!(check_transition(&g1(), &without_v1), Err(Error::IllegalTransition(_))));

        // the latest node may leave
        assert!(check_transition(&g2(), &g1()).is_ok());

        // an edge between persisting nodes vanishes
        let mut edges = g1().edges().to_vec();
        edges.pop();
        let fewer = labelled(&["v1", "v2", "v3", "v4"], edges);
        assert!(matches!(check_transition(&g1(), &fewer), Err(Error::IllegalTransition(_))));
    }

    fn scenario(modes: Vec<(SignedGraph, f64)>, x0: Vec<f64>, joins: &[(&str, f64)], t_end: f64) -> Scenario {
        Scenario {
            modes: modes.into_iter().map(|(graph, start)| Mode { graph, start }).collect(),
            k1: 1.0,
            x0,
            new_node_states: joins.iter().map(|(l, v)| (l.to_string(), *v)).collect(),
            t_end,
            step: 1e-3,
        }
    }

    #[test]
    fn zero_initial_state_stays_zero() {
        let s = scenario(vec![(g1(), 0.0), (g2(), 0.5)], vec![0.0; 4], &[("v5", 0.0)], 1.0);
        let tr = simulate(&s).unwrap();
        assert!(tr.node_states.iter().all(|x| x.iter().all(|&v| v == 0.0)));
        assert_eq!(tr.jumps.len(), 1);
        assert_eq!(tr.jumps[0].map.phi, vec![0.0; 5]);
    }

    #[test]
    fn simulation_lands_on_switch_times() {
        let s = scenario(vec![(g1(), 0.0), (g2(), 0.4567)], vec![1.0, 2.0, 3.0, 4.0], &[("v5", 5.0)], 1.0);
        let tr = simulate(&s).unwrap();
        let r0 = tr.mode_samples(0);
        let r1 = tr.mode_samples(1);
        assert_eq!(tr.times[r0.end - 1], 0.4567);
        assert_eq!(tr.times[r1.start], 0.4567);
        assert_eq!(*tr.times.last().unwrap(), 1.0);
        assert_eq!(tr.node_states[r1.start][4], 5.0);
        // persisting nodes are continuous across the switch
        assert_eq!(&tr.node_states[r1.start][..4], &tr.node_states[r0.end - 1][..]);
    }

    #[test]
    fn missing_join_state_is_rejected() {
        let s = scenario(vec![(g1(), 0.0), (g2(), 0.5)], vec![0.0; 4], &[], 1.0);
        assert_eq!(simulate(&s).unwrap_err(), Error::MissingInitialState("v5".into()));
    }

    #[test]
    fn classification_cases() {
        let g = g1();
        let b = check_structural_balance(&g);
        let trace = SimulationTrace {
            times: vec![30.0],
            mode_index: vec![0],
            node_states: vec![vec![2.0, -2.0, 2.0, -2.0]],
            edge_errors: vec![edge_error(&g, &[2.0, -2.0, 2.0, -2.0]).unwrap()],
            ..Default::default()
        };
        match classify_outcome(&trace, &g, &b, 1e-3) {
            Outcome::Bipartite { alpha, positive_camp, negative_camp, .. } => {
                assert_eq!(alpha, 2.0);
                assert_eq!(positive_camp, vec!["v1", "v3"]);
                assert_eq!(negative_camp, vec!["v2", "v4"]);
            }
            other => panic!("unexpected {other:?}"),
        }

        let mut edges = g.edges().to_vec();
        edges[1] = SignedEdge::anta(0, 2);
        let sub = labelled(&["v1", "v2", "v3", "v4"], edges);
        let bs = check_structural_balance(&sub);
        let trace = SimulationTrace {
            node_states: vec![vec![0.0; 4]],
            edge_errors: vec![vec![0.0; 4]],
            ..trace
        };
        assert!(matches!(classify_outcome(&trace, &sub, &bs, 1e-3), Outcome::Trivial { .. }));

        let trace = SimulationTrace {
            node_states: vec![vec![1.0, 0.0, 0.0, 0.0]],
            edge_errors: vec![edge_error(&g, &[1.0, 0.0, 0.0, 0.0]).unwrap()],
            ..trace
        };
        assert!(matches!(classify_outcome(&trace, &g, &b, 1e-3), Outcome::NotConverged { .. }));
    }
}
