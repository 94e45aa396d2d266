//! Wheeled robots with unicycle kinematics.
//!
//! The consensus variable of robot `i` is the off-axis point
//! `p = r + δ (cos θ, sin θ)`; with the linearizing control below its
//! kinematics reduce to `ṗ = u`, so the scalar consensus law can run
//! independently on each axis.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::RealMatrix;
use crate::scenario_io::{paper_scenario, ScenarioFile};
use crate::signed_graph::signed_laplacian;
use crate::switched_sim::{check_transition, simulate, step_grid, SimulationTrace};

/// Wraps an angle to `(−π, π]`.
pub fn wrap_angle(theta: f64) -> f64 {
    let mut t = theta.rem_euclid(2.0 * PI);
    if t > PI {
        t -= 2.0 * PI;
    }
    t
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct UnicycleState {
    pub r_x: f64,
    pub r_y: f64,
    /// Heading, always in `(−π, π]`.
    pub theta: f64,
}

impl UnicycleState {
    pub fn new(r_x: f64, r_y: f64, theta: f64) -> Self {
        UnicycleState {
            r_x,
            r_y,
            theta: wrap_angle(theta),
        }
    }

    pub fn off_axis_point(&self, delta: f64) -> Result<OffAxisPoint> {
        check_delta(delta)?;
        Ok(OffAxisPoint {
            p_x: self.r_x + delta * self.theta.cos(),
            p_y: self.r_y + delta * self.theta.sin(),
            delta,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OffAxisPoint {
    pub p_x: f64,
    pub p_y: f64,
    pub delta: f64,
}

fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta.is_finite() {
        Ok(())
    } else {
        Err(Error::NonpositiveInput { what: "delta", value: delta })
    }
}

/// `(v, ω)` that makes the off-axis point move with velocity `u`.
pub fn linearizing_control(theta: f64, delta: f64, u: (f64, f64)) -> Result<(f64, f64)> {
    check_delta(delta)?;
    let (s, c) = theta.sin_cos();
    Ok((u.0 * c + u.1 * s, (-u.0 * s + u.1 * c) / delta))
}

fn kinematics(theta: f64, v: f64, omega: f64) -> [f64; 3] {
    [v * theta.cos(), v * theta.sin(), omega]
}

fn rk4_3(y: [f64; 3], h: f64, f: impl Fn([f64; 3]) -> [f64; 3]) -> [f64; 3] {
    let add = |a: [f64; 3], s: f64, b: [f64; 3]| [a[0] + s * b[0], a[1] + s * b[1], a[2] + s * b[2]];
    let k1 = f(y);
    let k2 = f(add(y, h / 2.0, k1));
    let k3 = f(add(y, h / 2.0, k2));
    let k4 = f(add(y, h, k3));
    std::array::from_fn(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
}

/// One RK4 step of the unicycle under constant `(v, ω)`.
pub fn unicycle_step(s: UnicycleState, v: f64, omega: f64, h: f64) -> UnicycleState {
    let y = rk4_3([s.r_x, s.r_y, s.theta], h, |y| kinematics(y[2], v, omega));
    UnicycleState::new(y[0], y[1], y[2])
}

/// One RK4 step of the unicycle with the linearizing control recomputed
/// from the current heading so that the off-axis point tracks `u`.
pub fn tracking_step(s: UnicycleState, delta: f64, u: (f64, f64), h: f64) -> Result<UnicycleState> {
    check_delta(delta)?;
    let y = rk4_3([s.r_x, s.r_y, s.theta], h, |y| {
        let (v, w) = linearizing_control(y[2], delta, u).expect("delta checked");
        kinematics(y[2], v, w)
    });
    Ok(UnicycleState::new(y[0], y[1], y[2]))
}

/// Overrides applied on top of a scenario file before running the demo.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DemoOverrides {
    pub k1: Option<f64>,
    pub step: Option<f64>,
    pub t_end: Option<f64>,
}

/// Robot states sampled on the same grid as the consensus traces.
#[derive(Clone, Debug, Default)]
pub struct RobotTrace {
    pub delta: f64,
    pub times: Vec<f64>,
    pub mode_index: Vec<usize>,
    /// Robot labels of each mode, in state order.
    pub labels: Vec<Vec<String>>,
    pub states: Vec<Vec<UnicycleState>>,
}

impl RobotTrace {
    /// Off-axis points of sample `k`, per axis.
    pub fn points(&self, k: usize) -> (Vec<f64>, Vec<f64>) {
        self.states[k]
            .iter()
            .map(|s| {
                let p = s.off_axis_point(self.delta).expect("delta validated");
                (p.p_x, p.p_y)
            })
            .unzip()
    }

    /// CSV with header `t,robot,r_x,r_y,theta,p_x,p_y`, one row per robot and sample.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,robot,r_x,r_y,theta,p_x,p_y\n");
        for k in 0..self.times.len() {
            let labels = &self.labels[self.mode_index[k]];
            for (label, s) in labels.iter().zip(&self.states[k]) {
                let p = s.off_axis_point(self.delta).expect("delta validated");
                let row = [self.times[k], s.r_x, s.r_y, s.theta, p.p_x, p.p_y].map(crate::report::fmt_num);
                out.push_str(&format!(
                    "{},{label},{},{},{},{},{}\n",
                    row[0], row[1], row[2], row[3], row[4], row[5]
                ));
            }
        }
        out
    }
}

/// Output of a unicycle demo run.
#[derive(Clone, Debug)]
pub struct DemoRun {
    pub file: ScenarioFile,
    /// First-order consensus traces, one per axis.
    pub axes: Vec<SimulationTrace>,
    pub robots: RobotTrace,
}

fn apply_overrides(file: &ScenarioFile, o: DemoOverrides) -> ScenarioFile {
    let mut f = file.clone();
    if let Some(k1) = o.k1 {
        f.gains.k1 = k1;
    }
    if let Some(h) = o.step {
        f.integrator.step = h;
    }
    if let Some(t) = o.t_end {
        // a shortened horizon drops the modes it never reaches
        f.integrator.t_end = t;
        let keep = f.modes.iter().take_while(|m| m.start < t).count().max(1);
        f.modes.truncate(keep);
        if let crate::scenario_io::QSpec::PerMode(q) = &mut f.gains.q {
            q.truncate(keep);
        }
        if let crate::scenario_io::AlphaSpec::PerMode(a) = &mut f.gains.alphas {
            a.truncate(keep);
        }
        let used: std::collections::BTreeSet<String> = f
            .modes
            .iter()
            .flat_map(|m| m.edges.iter().flat_map(|(a, b, _)| [a.clone(), b.clone()]))
            .collect();
        f.nodes.retain(|n| used.contains(&n.label));
    }
    f
}

fn robot_rhs(lap: &RealMatrix, k1: f64, delta: f64, y: &[f64]) -> Vec<f64> {
    let n = y.len() / 3;
    let px: Vec<f64> = (0..n).map(|i| y[3 * i] + delta * y[3 * i + 2].cos()).collect();
    let py: Vec<f64> = (0..n).map(|i| y[3 * i + 1] + delta * y[3 * i + 2].sin()).collect();
    let ux = lap.mul_vec(&px);
    let uy = lap.mul_vec(&py);
    let mut dy = vec![0.0; y.len()];
    for i in 0..n {
        let u = (-k1 * ux[i], -k1 * uy[i]);
        let (v, w) = linearizing_control(y[3 * i + 2], delta, u).expect("delta validated");
        dy[3 * i..3 * i + 3].copy_from_slice(&kinematics(y[3 * i + 2], v, w));
    }
    dy
}

fn robots_rk4(lap: &RealMatrix, k1: f64, delta: f64, y: &[f64], h: f64) -> Vec<f64> {
    use crate::switched_sim::axpy;
    let f = |z: &[f64]| robot_rhs(lap, k1, delta, z);
    let k_1 = f(y);
    let k_2 = f(&axpy(y, h / 2.0, &k_1));
    let k_3 = f(&axpy(y, h / 2.0, &k_2));
    let k_4 = f(&axpy(y, h, &k_3));
    (0..y.len())
        .map(|i| y[i] + h / 6.0 * (k_1[i] + 2.0 * k_2[i] + 2.0 * k_3[i] + k_4[i]))
        .collect()
}

fn unpack(y: &[f64]) -> Vec<UnicycleState> {
    y.chunks(3).map(|c| UnicycleState::new(c[0], c[1], c[2])).collect()
}

fn pack(states: &[UnicycleState]) -> Vec<f64> {
    states.iter().flat_map(|s| [s.r_x, s.r_y, s.theta]).collect()
}

/// Runs a unicycle scenario: the coupled nonlinear robot system and, for
/// comparison, the first-order consensus simulation on each axis.
pub fn run_demo(file: &ScenarioFile, overrides: DemoOverrides) -> Result<DemoRun> {
    let file = apply_overrides(file, overrides);
    let delta = file
        .unicycle
        .as_ref()
        .map(|u| u.delta)
        .ok_or_else(|| Error::InvalidGraph("scenario has no [unicycle] block".into()))?;
    check_delta(delta)?;
    let axes = (0..2)
        .map(|axis| {
            let s = file.scenario(axis).map_err(|e| Error::InvalidGraph(e.to_string()))?;
            simulate(&s)
        })
        .collect::<Result<Vec<_>>>()?;

    let s = file.scenario(0).map_err(|e| Error::InvalidGraph(e.to_string()))?;
    let mut robots = RobotTrace {
        delta,
        labels: s.modes.iter().map(|m| m.graph.labels().to_vec()).collect(),
        ..Default::default()
    };
    let initial = |label: &str| {
        let node = file.nodes.iter().find(|n| n.label == label).expect("declared node");
        UnicycleState::new(node.init.component(0), node.init.component(1), file.heading(label))
    };
    let mut y = pack(&s.modes[0].graph.labels().iter().map(|l| initial(l)).collect::<Vec<_>>());
    for (i, mode) in s.modes.iter().enumerate() {
        let g = &mode.graph;
        if i > 0 {
            // robots keep their state; a joining robot starts at its configured pose
            let prev = &s.modes[i - 1].graph;
            let old = unpack(&y);
            let mut carried = Vec::with_capacity(g.n_nodes());
            for label in g.labels() {
                carried.push(match prev.index_of(label) {
                    Some(j) => old[j],
                    None => initial(label),
                });
            }
            check_transition(prev, g)?;
            y = pack(&carried);
        }
        let lap = signed_laplacian(g);
        robots.times.push(mode.start);
        robots.mode_index.push(i);
        robots.states.push(unpack(&y));
        let mut t = mode.start;
        for t_next in step_grid(mode.start, s.mode_end(i), s.step) {
            y = robots_rk4(&lap, s.k1, delta, &y, t_next - t);
            for k in 0..y.len() / 3 {
                y[3 * k + 2] = wrap_angle(y[3 * k + 2]);
            }
            t = t_next;
            robots.times.push(t);
            robots.mode_index.push(i);
            robots.states.push(unpack(&y));
        }
    }
    Ok(DemoRun { file, axes, robots })
}

/// The bundled seven-robot demo.
pub fn run_paper_demo(overrides: DemoOverrides) -> Result<DemoRun> {
    run_demo(&paper_scenario(), overrides)
}

/// Largest distance between the robots' off-axis points and the first-order
/// consensus states over all samples.
pub fn max_point_mismatch(run: &DemoRun) -> f64 {
    let mut worst: f64 = 0.0;
    for k in 0..run.robots.times.len() {
        let (px, py) = run.robots.points(k);
        for (axis, p) in [px, py].iter().enumerate() {
            let x = &run.axes[axis].node_states[k];
            for (a, b) in p.iter().zip(x) {
                worst = worst.max((a - b).abs());
            }
        }
    }
    worst
}
