//! Strict Lyapunov certificates for signed edge Laplacians and the
//! average-dwell-time test for switching schedules.
//!
//! For a spanning tree the edge Laplacian is positive definite and
//! `P L + L P = Q` is solved directly. Otherwise the zero eigenspace is
//! deflated, `R = L + Σ α_i v_i v_iᵀ`, and `P R + R P = Q` is solved instead.
//! Along the closed loop `ė = −k₁ L e` the error stays orthogonal to the zero
//! eigenspace, so `V = ½ eᵀ P e` decays at rate `γ = k₁ / λ_max(P)`.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::{dot, solve_linear, RealMatrix};
use crate::signed_graph::{edge_laplacian, is_connected, SignedGraph};
use crate::spectral::{symmetric_eigen, zero_eigenspace, zero_threshold, ZeroEigenspace, DEFAULT_TOL};
use crate::switched_sim::Scenario;

/// Residual bound for the spanning-tree equation, relative to `‖Q‖_max`.
pub const TREE_RESIDUAL_TOL: f64 = 1e-10;
/// Residual bound for the deflated equation, relative to `‖Q‖_max`.
pub const DEFLATED_RESIDUAL_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateBranch {
    SpanningTree,
    Deflated,
}

#[derive(Clone, Debug)]
pub struct LyapunovCertificate {
    pub p: RealMatrix,
    pub q: RealMatrix,
    pub alphas: Vec<f64>,
    pub zero_basis: ZeroEigenspace,
    pub k1: f64,
    /// Decay rate `k₁ / λ_max(P)` in 1/s.
    pub gamma: f64,
    /// Max-norm defect of the Lyapunov equation that was solved.
    pub residual: f64,
    pub lambda_min_p: f64,
    pub lambda_max_p: f64,
    pub branch: CertificateBranch,
}

impl LyapunovCertificate {
    /// `V(e) = ½ eᵀ P e`.
    pub fn value(&self, e: &[f64]) -> f64 {
        0.5 * dot(e, &self.p.mul_vec(e))
    }

    pub fn xi(&self) -> usize {
        self.zero_basis.xi
    }

    /// Whether the residual meets the bound for its branch.
    pub fn residual_ok(&self) -> bool {
        let bound = match self.branch {
            CertificateBranch::SpanningTree => TREE_RESIDUAL_TOL,
            CertificateBranch::Deflated => DEFLATED_RESIDUAL_TOL,
        };
        self.residual <= bound * self.q.max_abs()
    }
}

/// Solves `P A + Aᵀ P = Q` for symmetric `P` by vectorising the upper triangle.
///
/// Returns `None` if the linear system is singular.
pub fn solve_lyapunov_equation(a: &RealMatrix, q: &RealMatrix) -> Option<RealMatrix> {
    let m = a.rows();
    let n_unknowns = m * (m + 1) / 2;
    let idx = |i: usize, j: usize| {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        i * m - i * (i + 1) / 2 + j
    };
    let mut sys = RealMatrix::zeros(n_unknowns, n_unknowns);
    let mut rhs = vec![0.0; n_unknowns];
    for i in 0..m {
        for j in i..m {
            let row = idx(i, j);
            rhs[row] = q[(i, j)];
            // (P A)_ij = Σ_k P_ik A_kj, (Aᵀ P)_ij = Σ_k A_ki P_kj
            for k in 0..m {
                sys[(row, idx(i, k))] += a[(k, j)];
                sys[(row, idx(k, j))] += a[(k, i)];
            }
        }
    }
    let sol = solve_linear(sys, rhs)?;
    Some(RealMatrix::from_fn(m, m, |i, j| sol[idx(i, j)]))
}

fn check_q(q: &RealMatrix, m: usize) -> Result<()> {
    if q.rows() != m || q.cols() != m {
        return Err(Error::DimensionMismatch {
            what: "Q",
            expected: m,
            found: q.rows(),
        });
    }
    let eig = symmetric_eigen(q, zero_threshold(q, DEFAULT_TOL))?;
    if eig.min() <= 0.0 {
        return Err(Error::NotPositiveDefinite {
            what: "Q",
            lambda_min: eig.min(),
        });
    }
    Ok(())
}

fn check_square(l: &RealMatrix) -> Result<()> {
    if !l.is_square() {
        return Err(Error::DimensionMismatch {
            what: "edge Laplacian columns",
            expected: l.rows(),
            found: l.cols(),
        });
    }
    Ok(())
}

fn require_spd(p: &RealMatrix) -> Result<(f64, f64)> {
    let eig = symmetric_eigen(p, zero_threshold(p, DEFAULT_TOL))?;
    if eig.min() <= 0.0 {
        return Err(Error::NotPositiveDefinite {
            what: "P",
            lambda_min: eig.min(),
        });
    }
    Ok((eig.min(), eig.max()))
}

/// `‖P L + Lᵀ P − Q‖_max`.
pub fn tree_residual(p: &RealMatrix, l_es: &RealMatrix, q: &RealMatrix) -> f64 {
    let pl = p * l_es;
    pl.add(&pl.transpose()).sub(q).max_abs()
}

/// Defect of the deflated equation
/// `P L + L P = Q − Σ α_i (P v_i v_iᵀ + v_i v_iᵀ P)`, in max norm.
pub fn deflated_residual(
    p: &RealMatrix,
    l_es: &RealMatrix,
    q: &RealMatrix,
    alphas: &[f64],
    zs: &ZeroEigenspace,
) -> f64 {
    let pl = p * l_es;
    let mut rhs = q.clone();
    for (alpha, v) in alphas.iter().zip(&zs.basis) {
        let pv = p.mul_vec(v);
        rhs.add_outer(-alpha, &pv, v);
        rhs.add_outer(-alpha, v, &pv);
    }
    pl.add(&pl.transpose()).sub(&rhs).max_abs()
}

/// Certificate equation for a spanning tree: `P L + Lᵀ P = Q`.
pub fn solve_lyapunov_tree(l_es: &RealMatrix, q: &RealMatrix) -> Result<RealMatrix> {
    check_square(l_es)?;
    check_q(q, l_es.rows())?;
    let threshold = zero_threshold(l_es, DEFAULT_TOL);
    let eig = symmetric_eigen(l_es, threshold)?;
    if eig.min() <= threshold {
        return Err(Error::SingularEdgeLaplacian { lambda_min: eig.min() });
    }
    let p = solve_lyapunov_equation(l_es, q)
        .ok_or_else(|| Error::Numerical("Lyapunov system is singular".into()))?;
    let residual = tree_residual(&p, l_es, q);
    if residual > TREE_RESIDUAL_TOL * q.max_abs() {
        return Err(Error::Numerical(format!("Lyapunov residual {residual:e} too large")));
    }
    require_spd(&p)?;
    Ok(p)
}

/// Deflated certificate equation for graphs whose edge Laplacian is singular.
pub fn solve_lyapunov_deflated(
    l_es: &RealMatrix,
    q: &RealMatrix,
    alphas: &[f64],
    zs: &ZeroEigenspace,
) -> Result<RealMatrix> {
    check_square(l_es)?;
    let m = l_es.rows();
    check_q(q, m)?;
    if alphas.len() != zs.xi || zs.basis.len() != zs.xi {
        return Err(Error::DimensionMismatch {
            what: "deflation weights",
            expected: zs.xi,
            found: alphas.len(),
        });
    }
    if let Some(v) = zs.basis.iter().find(|v| v.len() != m) {
        return Err(Error::DimensionMismatch {
            what: "zero eigenvector",
            expected: m,
            found: v.len(),
        });
    }
    if let Some(&a) = alphas.iter().find(|&&a| !(a > 0.0)) {
        return Err(Error::NonpositiveInput {
            what: "deflation weight",
            value: a,
        });
    }
    if l_es.max_asymmetry() > zero_threshold(l_es, DEFAULT_TOL) {
        return Err(Error::NotSymmetric {
            max_asymmetry: l_es.max_asymmetry(),
        });
    }

    let mut r = l_es.clone();
    for (alpha, v) in alphas.iter().zip(&zs.basis) {
        r.add_outer(*alpha, v, v);
    }
    let threshold = zero_threshold(&r, DEFAULT_TOL);
    let eig_r = symmetric_eigen(&r, threshold)?;
    if eig_r.min() <= threshold {
        return Err(Error::DeflationInsufficient {
            lambda_min: eig_r.min(),
        });
    }
    let p = solve_lyapunov_equation(&r, q)
        .ok_or_else(|| Error::Numerical("deflated Lyapunov system is singular".into()))?;
    let residual = deflated_residual(&p, l_es, q, alphas, zs);
    if residual > DEFLATED_RESIDUAL_TOL * q.max_abs() {
        return Err(Error::Numerical(format!(
            "deflated Lyapunov residual {residual:e} too large"
        )));
    }
    require_spd(&p)?;
    Ok(p)
}

/// Builds the certificate of one mode. `q` defaults to the identity and every
/// deflation weight to 1.
pub fn certificate_for_mode(
    g: &SignedGraph,
    k1: f64,
    q: Option<&RealMatrix>,
    alphas: Option<&[f64]>,
) -> Result<LyapunovCertificate> {
    if !(k1 > 0.0) {
        return Err(Error::NonpositiveInput { what: "k1", value: k1 });
    }
    if !is_connected(g) {
        return Err(Error::NotConnected);
    }
    let l_es = edge_laplacian(g);
    let m = l_es.rows();
    if m == 0 {
        return Err(Error::InvalidGraph("a certified mode needs at least one edge".into()));
    }
    let q = q.cloned().unwrap_or_else(|| RealMatrix::identity(m));
    let zs = zero_eigenspace(&l_es, DEFAULT_TOL)?;
    let alphas = match alphas {
        Some(a) => a.to_vec(),
        None => vec![1.0; zs.xi],
    };

    let is_tree = m + 1 == g.n_nodes();
    let (p, residual, branch) = if is_tree {
        let p = solve_lyapunov_tree(&l_es, &q)?;
        let res = tree_residual(&p, &l_es, &q);
        (p, res, CertificateBranch::SpanningTree)
    } else {
        let p = solve_lyapunov_deflated(&l_es, &q, &alphas, &zs)?;
        let res = deflated_residual(&p, &l_es, &q, &alphas, &zs);
        (p, res, CertificateBranch::Deflated)
    };
    let (lambda_min_p, lambda_max_p) = require_spd(&p)?;
    Ok(LyapunovCertificate {
        p,
        q,
        alphas,
        zero_basis: zs,
        k1,
        gamma: k1 / lambda_max_p,
        residual,
        lambda_min_p,
        lambda_max_p,
        branch,
    })
}

/// Jump gain `Ω = 2 λ_max(P_to) / λ_min(P_from)`.
pub fn transition_gain(cert_to: &LyapunovCertificate, cert_from: &LyapunovCertificate) -> f64 {
    2.0 * cert_to.lambda_max_p / cert_from.lambda_min_p
}

/// Minimum average dwell time `max(0, ln Ω / γ)` in seconds.
pub fn min_dwell_time(omega: f64, gamma: f64) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(Error::NonpositiveInput { what: "Omega", value: omega });
    }
    if !(gamma > 0.0) {
        return Err(Error::NonpositiveInput { what: "gamma", value: gamma });
    }
    Ok((omega.ln() / gamma).max(0.0))
}

/// Aggregate over every switch of one (from, to) mode pair.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TransitionRecord {
    pub from_mode: usize,
    pub to_mode: usize,
    /// Number of switches `N_{from,to}` on `[0, t_end)`.
    pub count: usize,
    /// Total active time `T_to` of the target mode on `[0, t_end)`.
    pub active_time: f64,
    /// Largest jump gain over the instances of this transition.
    pub omega: f64,
    pub tau_min: f64,
    /// `T_to / N_{from,to}`.
    pub actual_dwell: f64,
    pub admissible: bool,
}

/// One switching instant.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SwitchRecord {
    pub time: f64,
    pub from_mode: usize,
    pub to_mode: usize,
    pub omega: f64,
    /// `λ_max(P_to) |Φ_l|²`, present when jump offsets were supplied.
    pub theta: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DwellTimeReport {
    pub n_hat: f64,
    pub switches: Vec<SwitchRecord>,
    pub transitions: Vec<TransitionRecord>,
    pub overall: bool,
}

/// Identifies each scheduled mode with the first earlier position holding the same graph.
pub fn mode_ids(scenario: &Scenario) -> Vec<usize> {
    let keys: Vec<_> = scenario.modes.iter().map(|m| m.graph.canonical_key()).collect();
    (0..keys.len())
        .map(|i| (0..=i).find(|&j| keys[j] == keys[i]).unwrap())
        .collect()
}

/// Checks the schedule against the transition-dependent average dwell time
/// condition `N_{from,to} ≤ N̂ + T_to / τ_min(from,to)`.
///
/// `certificates[i]` certifies `scenario.modes[i]`. `phi_sq_norms`, when given,
/// holds `|Φ_l|²` for each switching instant in order.
pub fn verify_schedule(
    scenario: &Scenario,
    certificates: &[LyapunovCertificate],
    n_hat: f64,
    phi_sq_norms: Option<&[f64]>,
) -> Result<DwellTimeReport> {
    let modes = &scenario.modes;
    if certificates.len() != modes.len() {
        return Err(Error::DimensionMismatch {
            what: "certificates",
            expected: modes.len(),
            found: certificates.len(),
        });
    }
    if modes.is_empty() {
        return Err(Error::NonMonotoneSchedule("schedule has no modes".into()));
    }
    if modes[0].start != 0.0 {
        return Err(Error::NonMonotoneSchedule("first mode must start at t = 0".into()));
    }
    if let Some(w) = modes.windows(2).find(|w| !(w[1].start > w[0].start)) {
        return Err(Error::NonMonotoneSchedule(format!(
            "start time {} does not follow {}",
            w[1].start, w[0].start
        )));
    }
    let last = modes.last().unwrap().start;
    if !(scenario.t_end > last) {
        return Err(Error::NonMonotoneSchedule(format!(
            "t_end {} must exceed the last switch time {last}",
            scenario.t_end
        )));
    }
    if !(n_hat >= 0.0) {
        return Err(Error::NonpositiveInput { what: "N_hat", value: n_hat });
    }
    if let Some(phis) = phi_sq_norms {
        if phis.len() != modes.len() - 1 {
            return Err(Error::DimensionMismatch {
                what: "jump offsets",
                expected: modes.len() - 1,
                found: phis.len(),
            });
        }
    }

    let ids = mode_ids(scenario);
    let mut active: BTreeMap<usize, f64> = BTreeMap::new();
    for (i, m) in modes.iter().enumerate() {
        let end = modes.get(i + 1).map_or(scenario.t_end, |n| n.start);
        *active.entry(ids[i]).or_default() += end - m.start;
    }

    let mut switches = Vec::with_capacity(modes.len().saturating_sub(1));
    // (from, to) -> (count, worst omega)
    let mut pairs: BTreeMap<(usize, usize), (usize, f64)> = BTreeMap::new();
    for l in 1..modes.len() {
        let omega = transition_gain(&certificates[l], &certificates[l - 1]);
        let theta = phi_sq_norms.map(|phis| certificates[l].lambda_max_p * phis[l - 1]);
        switches.push(SwitchRecord {
            time: modes[l].start,
            from_mode: ids[l - 1],
            to_mode: ids[l],
            omega,
            theta,
        });
        let entry = pairs.entry((ids[l - 1], ids[l])).or_insert((0, 0.0));
        entry.0 += 1;
        entry.1 = entry.1.max(omega);
    }

    let mut transitions = Vec::with_capacity(pairs.len());
    for ((from, to), (count, omega)) in pairs {
        let gamma = certificates[to].gamma;
        let tau_min = min_dwell_time(omega, gamma)?;
        let active_time = active[&to];
        let admissible = tau_min == 0.0 || (count as f64) <= n_hat + active_time / tau_min;
        transitions.push(TransitionRecord {
            from_mode: from,
            to_mode: to,
            count,
            active_time,
            omega,
            tau_min,
            actual_dwell: active_time / count as f64,
            admissible,
        });
    }
    let overall = transitions.iter().all(|t| t.admissible);
    Ok(DwellTimeReport {
        n_hat,
        switches,
        transitions,
        overall,
    })
}
