//! Scenario files.
//!
//! A scenario is a TOML document with a version tag, gains, integrator
//! settings, tolerances, an optional unicycle block, a node list and an
//! ordered mode list. Unknown keys are rejected. See `scenarios/paper.scenario`
//! for a complete example.
//!
//! Each mode lists its edges as `[tail_label, head_label, sign]` triples with
//! `sign` equal to `1` or `-1`; the first label is the edge tail. A mode's node
//! set is the set of labels its edges mention. Persisting nodes keep their
//! order between modes and a joining node is appended last.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::Error;
use crate::matrix::RealMatrix;
use crate::signed_graph::{check_structural_balance, edge_laplacian, is_connected, Sign, SignedEdge, SignedGraph};
use crate::spectral::zero_eigenspace;
use crate::switched_sim::{check_transition, Mode, Scenario};

pub const FORMAT_VERSION: u32 = 1;

/// The bundled six-mode robot scenario.
pub const PAPER_SCENARIO: &str = include_str!("../scenarios/paper.scenario");

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rule {
    UnsupportedVersion,
    EmptyModes,
    DuplicateLabel,
    UnknownNode,
    UnusedNode,
    EmptyMode,
    InvalidEdge,
    DisconnectedMode,
    IllegalTransition,
    NonMonotoneSchedule,
    InvalidValue,
    DimensionMismatch,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid scenario [{rule}]: {message}")]
    Validation { rule: Rule, message: String },
}

impl ScenarioError {
    fn invalid(rule: Rule, message: impl Into<String>) -> Self {
        ScenarioError::Validation {
            rule,
            message: message.into(),
        }
    }

    pub fn rule(&self) -> Option<Rule> {
        match self {
            ScenarioError::Validation { rule, .. } => Some(*rule),
            ScenarioError::Parse { .. } => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub version: u32,
    pub gains: Gains,
    pub integrator: Integrator,
    #[serde(default)]
    pub tolerance: Tolerance,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unicycle: Option<UnicycleConfig>,
    pub nodes: Vec<NodeSpec>,
    pub modes: Vec<ModeSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Gains {
    pub k1: f64,
    #[serde(default)]
    pub q: QSpec,
    #[serde(default)]
    pub alphas: AlphaSpec,
    #[serde(default = "default_n_hat")]
    pub n_hat: f64,
}

fn default_n_hat() -> f64 {
    1.0
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NamedQ {
    Identity,
}

/// `"identity"` or one explicit matrix per mode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum QSpec {
    Named(NamedQ),
    PerMode(Vec<Vec<Vec<f64>>>),
}

impl Default for QSpec {
    fn default() -> Self {
        QSpec::Named(NamedQ::Identity)
    }
}

/// One weight for every zero eigenvalue of every mode, or explicit lists per mode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AlphaSpec {
    Uniform(f64),
    PerMode(Vec<Vec<f64>>),
}

impl Default for AlphaSpec {
    fn default() -> Self {
        AlphaSpec::Uniform(1.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Integrator {
    pub step: f64,
    pub t_end: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerance {
    /// Terminal classification tolerance in state units.
    #[serde(default = "default_convergence")]
    pub convergence: f64,
    /// Relative zero tolerance for eigenvalues and ranks.
    #[serde(default = "default_eigen")]
    pub eigen: f64,
}

fn default_convergence() -> f64 {
    1e-3
}

fn default_eigen() -> f64 {
    crate::spectral::DEFAULT_TOL
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            convergence: default_convergence(),
            eigen: default_eigen(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnicycleConfig {
    /// Off-axis distance of the controlled point, metres.
    pub delta: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NodeValue {
    Scalar(f64),
    Planar([f64; 2]),
}

impl NodeValue {
    pub fn dim(&self) -> usize {
        match self {
            NodeValue::Scalar(_) => 1,
            NodeValue::Planar(_) => 2,
        }
    }

    pub fn component(&self, axis: usize) -> f64 {
        match self {
            NodeValue::Scalar(v) => *v,
            NodeValue::Planar(v) => v[axis],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeSpec {
    pub label: String,
    /// Initial (or joining) value; the robot centre when a unicycle block is present.
    pub init: NodeValue,
    /// Initial heading in radians, unicycle scenarios only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub heading: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeSpec {
    pub start: f64,
    pub edges: Vec<(String, String, Sign)>,
}

/// Parses and validates a scenario document.
pub fn parse_scenario(text: &str) -> Result<ScenarioFile, ScenarioError> {
    let file: ScenarioFile = toml::from_str(text).map_err(|e| ScenarioError::Parse {
        line: e
            .span()
            .map_or(0, |span| text[..span.start.min(text.len())].lines().count().max(1)),
        message: e.message().to_string(),
    })?;
    file.validate()?;
    Ok(file)
}

pub fn paper_scenario() -> ScenarioFile {
    parse_scenario(PAPER_SCENARIO).expect("bundled scenario is valid")
}

impl ScenarioFile {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serialises")
    }

    /// Number of consensus axes (1 or 2).
    pub fn dim(&self) -> usize {
        self.nodes.first().map_or(1, |n| n.init.dim())
    }

    fn node(&self, label: &str) -> Option<&NodeSpec> {
        self.nodes.iter().find(|n| n.label == label)
    }

    pub fn heading(&self, label: &str) -> f64 {
        self.node(label).and_then(|n| n.heading).unwrap_or(0.0)
    }

    /// Consensus variable of `label` on `axis` when it enters the system. For
    /// unicycle scenarios this is the off-axis point, not the robot centre.
    pub fn consensus_value(&self, label: &str, axis: usize) -> Option<f64> {
        let node = self.node(label)?;
        let base = node.init.component(axis);
        Some(match &self.unicycle {
            Some(u) => {
                let theta = node.heading.unwrap_or(0.0);
                let offset = if axis == 0 { theta.cos() } else { theta.sin() };
                base + u.delta * offset
            }
            None => base,
        })
    }

    /// Mode graphs, with node order carried from one mode to the next.
    pub fn graphs(&self) -> Result<Vec<SignedGraph>, ScenarioError> {
        let declared: Vec<&str> = self.nodes.iter().map(|n| n.label.as_str()).collect();
        let mut previous: Vec<String> = Vec::new();
        let mut graphs = Vec::with_capacity(self.modes.len());
        for (i, mode) in self.modes.iter().enumerate() {
            let idx = i + 1;
            if mode.edges.is_empty() {
                return Err(ScenarioError::invalid(Rule::EmptyMode, format!("mode {idx} has no edges")));
            }
            let mut present = BTreeSet::new();
            for (a, b, _) in &mode.edges {
                for l in [a, b] {
                    if !declared.contains(&l.as_str()) {
                        return Err(ScenarioError::invalid(
                            Rule::UnknownNode,
                            format!("mode {idx} references undeclared node `{l}`"),
                        ));
                    }
                    present.insert(l.as_str());
                }
            }
            let mut order: Vec<String> = previous.iter().filter(|l| present.contains(l.as_str())).cloned().collect();
            for l in &declared {
                if present.contains(l) && !order.iter().any(|o| o == l) {
                    order.push(l.to_string());
                }
            }
            let index = |l: &str| order.iter().position(|o| o == l).unwrap();
            let edges = mode
                .edges
                .iter()
                .map(|(a, b, s)| SignedEdge::new(index(a), index(b), *s))
                .collect();
            let g = SignedGraph::with_labels(order.clone(), edges)
                .map_err(|e| ScenarioError::invalid(Rule::InvalidEdge, format!("mode {idx}: {e}")))?;
            graphs.push(g);
            previous = order;
        }
        Ok(graphs)
    }

    fn validate(&self) -> Result<(), ScenarioError> {
        use Rule::*;
        let bad = |rule, msg: String| Err(ScenarioError::invalid(rule, msg));
        if self.version != FORMAT_VERSION {
            return bad(UnsupportedVersion, format!("version {} (expected {FORMAT_VERSION})", self.version));
        }
        if self.modes.is_empty() {
            return bad(EmptyModes, "the mode list is empty".into());
        }
        let mut seen = BTreeSet::new();
        for n in &self.nodes {
            if n.label.is_empty() || !seen.insert(n.label.as_str()) {
                return bad(DuplicateLabel, format!("node label `{}` is empty or repeated", n.label));
            }
        }
        let dim = self.dim();
        if let Some(n) = self.nodes.iter().find(|n| n.init.dim() != dim) {
            return bad(DimensionMismatch, format!("node `{}` has a {}-D value, expected {dim}-D", n.label, n.init.dim()));
        }
        let finite = |v: f64| v.is_finite();
        if self.nodes.iter().any(|n| !(0..dim).all(|a| finite(n.init.component(a)))) {
            return bad(InvalidValue, "node values must be finite".into());
        }
        match &self.unicycle {
            Some(u) => {
                if !(u.delta > 0.0) {
                    return bad(InvalidValue, format!("unicycle delta must be positive, got {}", u.delta));
                }
                if dim != 2 {
                    return bad(DimensionMismatch, "unicycle scenarios need planar node values".into());
                }
            }
            None => {
                if let Some(n) = self.nodes.iter().find(|n| n.heading.is_some()) {
                    return bad(InvalidValue, format!("node `{}` has a heading but no [unicycle] block", n.label));
                }
            }
        }
        let positive = [
            ("gains.k1", self.gains.k1),
            ("integrator.step", self.integrator.step),
            ("tolerance.convergence", self.tolerance.convergence),
            ("tolerance.eigen", self.tolerance.eigen),
        ];
        if let Some((name, v)) = positive.iter().find(|(_, v)| !(*v > 0.0) || !v.is_finite()) {
            return bad(InvalidValue, format!("{name} must be positive, got {v}"));
        }
        if !(self.gains.n_hat >= 0.0) {
            return bad(InvalidValue, format!("gains.n_hat must be nonnegative, got {}", self.gains.n_hat));
        }

        let graphs = self.graphs()?;
        for (i, g) in graphs.iter().enumerate() {
            if !is_connected(g) {
                return bad(DisconnectedMode, format!("mode {} is not connected", i + 1));
            }
        }
        if self.modes[0].start != 0.0 {
            return bad(NonMonotoneSchedule, "the first mode must start at 0".into());
        }
        for (i, w) in self.modes.windows(2).enumerate() {
            if !(w[1].start > w[0].start) {
                return bad(NonMonotoneSchedule, format!("mode {} starts at {} after {}", i + 2, w[1].start, w[0].start));
            }
        }
        let last = self.modes.last().unwrap().start;
        if !(self.integrator.t_end > last) || !self.integrator.t_end.is_finite() {
            return bad(NonMonotoneSchedule, format!("t_end {} must exceed the last start {last}", self.integrator.t_end));
        }
        for (i, w) in graphs.windows(2).enumerate() {
            if let Err(e) = check_transition(&w[0], &w[1]) {
                let msg = match e {
                    Error::IllegalTransition(m) => m,
                    other => other.to_string(),
                };
                return bad(IllegalTransition, format!("mode {} -> {}: {msg}", i + 1, i + 2));
            }
        }
        let used: BTreeSet<&str> = graphs.iter().flat_map(|g| g.labels().iter().map(String::as_str)).collect();
        if let Some(n) = self.nodes.iter().find(|n| !used.contains(n.label.as_str())) {
            return bad(UnusedNode, format!("node `{}` never appears in a mode", n.label));
        }

        if let QSpec::PerMode(qs) = &self.gains.q {
            if qs.len() != graphs.len() {
                return bad(DimensionMismatch, format!("{} Q matrices for {} modes", qs.len(), graphs.len()));
            }
            for (i, (q, g)) in qs.iter().zip(&graphs).enumerate() {
                let m = RealMatrix::try_from_rows(q)
                    .map_err(|e| ScenarioError::invalid(InvalidValue, format!("Q of mode {}: {e}", i + 1)))?;
                if m.rows() != g.n_edges() || m.cols() != g.n_edges() {
                    return bad(DimensionMismatch, format!("Q of mode {} must be {0}x{0}", g.n_edges()));
                }
                if !m.is_symmetric(0.0) {
                    return bad(InvalidValue, format!("Q of mode {} is not symmetric", i + 1));
                }
            }
        }
        match &self.gains.alphas {
            AlphaSpec::Uniform(a) => {
                if !(*a > 0.0) {
                    return bad(InvalidValue, format!("alphas must be positive, got {a}"));
                }
            }
            AlphaSpec::PerMode(lists) => {
                if lists.len() != graphs.len() {
                    return bad(DimensionMismatch, format!("{} alpha lists for {} modes", lists.len(), graphs.len()));
                }
                for (i, (list, g)) in lists.iter().zip(&graphs).enumerate() {
                    let xi = zero_eigenspace(&edge_laplacian(g), self.tolerance.eigen)
                        .map(|z| z.xi)
                        .unwrap_or(0);
                    if list.len() != xi {
                        return bad(DimensionMismatch, format!("mode {} needs {xi} alphas, got {}", i + 1, list.len()));
                    }
                    if list.iter().any(|a| !(*a > 0.0)) {
                        return bad(InvalidValue, format!("alphas of mode {} must be positive", i + 1));
                    }
                }
            }
        }
        Ok(())
    }

    /// Explicit `Q` for mode `i`, or `None` for the identity.
    pub fn q_for_mode(&self, i: usize) -> Option<RealMatrix> {
        match &self.gains.q {
            QSpec::Named(NamedQ::Identity) => None,
            QSpec::PerMode(qs) => Some(RealMatrix::from_rows(&qs[i])),
        }
    }

    /// Deflation weights for mode `i` given its zero-eigenvalue count.
    pub fn alphas_for_mode(&self, i: usize, xi: usize) -> Vec<f64> {
        match &self.gains.alphas {
            AlphaSpec::Uniform(a) => vec![*a; xi],
            AlphaSpec::PerMode(lists) => lists[i].clone(),
        }
    }

    /// Scalar consensus scenario for one axis.
    pub fn scenario(&self, axis: usize) -> Result<Scenario, ScenarioError> {
        if axis >= self.dim() {
            return Err(ScenarioError::invalid(
                Rule::DimensionMismatch,
                format!("axis {axis} out of range for a {}-D scenario", self.dim()),
            ));
        }
        let graphs = self.graphs()?;
        let value = |l: &str| self.consensus_value(l, axis).expect("declared node");
        let x0 = graphs[0].labels().iter().map(|l| value(l)).collect();
        let new_node_states: BTreeMap<String, f64> =
            self.nodes.iter().map(|n| (n.label.clone(), value(&n.label))).collect();
        Ok(Scenario {
            modes: graphs
                .into_iter()
                .zip(&self.modes)
                .map(|(graph, m)| Mode { graph, start: m.start })
                .collect(),
            k1: self.gains.k1,
            x0,
            new_node_states,
            t_end: self.integrator.t_end,
            step: self.integrator.step,
        })
    }

    /// Balance verdict of every mode.
    pub fn balance_sequence(&self) -> Result<Vec<bool>, ScenarioError> {
        Ok(self.graphs()?.iter().map(|g| check_structural_balance(g).is_balanced()).collect())
    }
}
