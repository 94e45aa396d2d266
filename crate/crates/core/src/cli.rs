//! Command-line front end.
//!
//! Exit codes: 0 success, 1 unreadable or invalid input (or an I/O failure
//! writing results), 2 numerical failure, 3 inadmissible switching schedule.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::error::Error;
use crate::lyapunov::{certificate_for_mode, verify_schedule, CertificateBranch, DwellTimeReport, LyapunovCertificate};
use crate::matrix::dot;
use crate::report::{jump_entries, to_json, trace_csv};
use crate::scenario_io::{parse_scenario, ScenarioFile};
use crate::signed_graph::{
    check_structural_balance, edge_laplacian, incidence_matrix, signed_laplacian, BalanceResult, SignedGraph,
};
use crate::spectral::{expected_zero_count, rank_of, zero_eigenspace};
use crate::switched_sim::{classify_outcome, simulate, Outcome, SimulationTrace};
use crate::unicycle::{max_point_mismatch, run_paper_demo, DemoOverrides};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_INADMISSIBLE: i32 = 3;

/// Balance verdicts of the bundled scenario's six modes.
pub const PAPER_BALANCE: [&str; 6] = ["SB", "SB", "SB", "SUB", "SB", "SB"];
/// Camps of the bundled scenario's last mode.
pub const PAPER_FINAL_CAMPS: ([&str; 4], [&str; 3]) = (["v1", "v3", "v5", "v7"], ["v2", "v4", "v6"]);

#[derive(Parser, Debug)]
#[command(name = "omas", version, about = "Bipartite consensus over switching signed graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Balance, ranks and zero-eigenvalue counts of every mode.
    Analyze { file: PathBuf },
    /// Lyapunov certificates and the dwell-time report.
    Certify { file: PathBuf },
    /// Simulate the scenario and write traces, jumps and the outcome.
    Simulate {
        file: PathBuf,
        /// Output directory, created if missing.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the bundled seven-robot scenario end to end.
    ReproducePaper {
        /// Output directory, created if missing.
        #[arg(long)]
        out: PathBuf,
        /// Override the control gain.
        #[arg(long)]
        k1: Option<f64>,
        /// Override the integrator step.
        #[arg(long)]
        step: Option<f64>,
        /// Stop early; modes starting at or after this time are dropped.
        #[arg(long)]
        t_end: Option<f64>,
    },
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn new(code: i32, message: impl std::fmt::Display) -> Self {
        Failure {
            code,
            message: message.to_string(),
        }
    }

    fn numerical(e: Error) -> Self {
        Failure::new(EXIT_NUMERICAL, e)
    }

    fn io(path: &Path, e: std::io::Error) -> Self {
        Failure::new(EXIT_INVALID, format!("{}: {e}", path.display()))
    }
}

type CliResult = std::result::Result<i32, Failure>;

/// Runs the CLI with stdout/stderr. Returns the exit code.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run(argv, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}

/// Runs the CLI writing reports to `out` and diagnostics to `err`.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let _ = if e.use_stderr() { write!(err, "{e}") } else { write!(out, "{e}") };
            return code;
        }
    };
    let result = match cli.command {
        Command::Analyze { file } => analyze(&file, out),
        Command::Certify { file } => certify(&file, out),
        Command::Simulate { file, out: dir } => simulate_cmd(&file, &dir, out),
        Command::ReproducePaper { out: dir, k1, step, t_end } => {
            reproduce_paper(&dir, DemoOverrides { k1, step, t_end }, out)
        }
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn load(path: &Path) -> std::result::Result<ScenarioFile, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::io(path, e))?;
    parse_scenario(&text).map_err(|e| Failure::new(EXIT_INVALID, format!("{}: {e}", path.display())))
}

fn emit(out: &mut dyn Write, text: &str) -> std::result::Result<(), Failure> {
    out.write_all(text.as_bytes())
        .map_err(|e| Failure::new(EXIT_INVALID, format!("stdout: {e}")))
}

fn write_file(dir: &Path, name: &str, text: &str) -> std::result::Result<(), Failure> {
    let path = dir.join(name);
    fs::write(&path, text).map_err(|e| Failure::io(&path, e))
}

fn labels(g: &SignedGraph, idx: &[usize]) -> Vec<String> {
    idx.iter().map(|&i| g.label(i).to_string()).collect()
}

#[derive(Serialize)]
struct Partition {
    positive: Vec<String>,
    negative: Vec<String>,
}

fn partition(g: &SignedGraph, b: &BalanceResult) -> Option<Partition> {
    b.partition().map(|(p, n)| Partition {
        positive: labels(g, &p),
        negative: labels(g, &n),
    })
}

#[derive(Serialize)]
struct ModeAnalysis {
    mode: usize,
    start: f64,
    n_nodes: usize,
    n_edges: usize,
    nodes: Vec<String>,
    balance: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    partition: Option<Partition>,
    #[serde(skip_serializing_if = "Option::is_none")]
    /// Edges of a negative cycle as `[tail, head, sign]`.
    witness_cycle: Option<Vec<(String, String, i8)>>,
    rank_incidence: usize,
    rank_laplacian: usize,
    rank_edge_laplacian: usize,
    xi: usize,
    xi_expected: usize,
}

fn analyze_modes(file: &ScenarioFile) -> std::result::Result<Vec<ModeAnalysis>, Failure> {
    let graphs = file.graphs().map_err(|e| Failure::new(EXIT_INVALID, e))?;
    let tol = file.tolerance.eigen;
    graphs
        .iter()
        .zip(&file.modes)
        .enumerate()
        .map(|(i, (g, m))| {
            let b = check_structural_balance(g);
            let l_es = edge_laplacian(g);
            let xi = zero_eigenspace(&l_es, tol).map_err(Failure::numerical)?.xi;
            Ok(ModeAnalysis {
                mode: i + 1,
                start: m.start,
                n_nodes: g.n_nodes(),
                n_edges: g.n_edges(),
                nodes: g.labels().to_vec(),
                balance: b.verdict(),
                partition: partition(g, &b),
                witness_cycle: b.witness_cycle().map(|c| {
                    c.iter()
                        .map(|&k| {
                            let e = g.edges()[k];
                            (g.label(e.tail).to_string(), g.label(e.head).to_string(), e.sign.as_i8())
                        })
                        .collect()
                }),
                rank_incidence: rank_of(&incidence_matrix(g), tol),
                rank_laplacian: rank_of(&signed_laplacian(g), tol),
                rank_edge_laplacian: rank_of(&l_es, tol),
                xi,
                xi_expected: expected_zero_count(g, &b).map_err(Failure::numerical)?,
            })
        })
        .collect()
}

fn analyze(path: &Path, out: &mut dyn Write) -> CliResult {
    let file = load(path)?;
    emit(out, &to_json(&analyze_modes(&file)?))?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct CertificateSummary {
    mode: usize,
    branch: CertificateBranch,
    xi: usize,
    alphas: Vec<f64>,
    lambda_min_p: f64,
    lambda_max_p: f64,
    gamma: f64,
    residual: f64,
    residual_ok: bool,
    p: Vec<Vec<f64>>,
}

#[derive(Serialize)]
struct CertifyReport {
    k1: f64,
    certificates: Vec<CertificateSummary>,
    dwell_time: DwellTimeReport,
    all_residuals_ok: bool,
}

fn certificates(file: &ScenarioFile) -> std::result::Result<Vec<LyapunovCertificate>, Failure> {
    let graphs = file.graphs().map_err(|e| Failure::new(EXIT_INVALID, e))?;
    graphs
        .iter()
        .enumerate()
        .map(|(i, g)| {
            let xi = zero_eigenspace(&edge_laplacian(g), file.tolerance.eigen)
                .map_err(Failure::numerical)?
                .xi;
            let q = file.q_for_mode(i);
            let alphas = file.alphas_for_mode(i, xi);
            certificate_for_mode(g, file.gains.k1, q.as_ref(), Some(&alphas)).map_err(Failure::numerical)
        })
        .collect()
}

fn simulate_axes(file: &ScenarioFile) -> std::result::Result<Vec<SimulationTrace>, Failure> {
    (0..file.dim())
        .map(|axis| {
            let s = file.scenario(axis).map_err(|e| Failure::new(EXIT_INVALID, e))?;
            simulate(&s).map_err(Failure::numerical)
        })
        .collect()
}

fn certify(path: &Path, out: &mut dyn Write) -> CliResult {
    let file = load(path)?;
    let certs = certificates(&file)?;
    let traces = simulate_axes(&file)?;
    // |Φ|² summed over the independent axes
    let phi_sq: Vec<f64> = (0..traces[0].jumps.len())
        .map(|l| traces.iter().map(|t| dot(&t.jumps[l].map.phi, &t.jumps[l].map.phi)).sum())
        .collect();
    let scenario = file.scenario(0).map_err(|e| Failure::new(EXIT_INVALID, e))?;
    let dwell = verify_schedule(&scenario, &certs, file.gains.n_hat, Some(&phi_sq)).map_err(Failure::numerical)?;
    let summaries: Vec<CertificateSummary> = certs
        .iter()
        .enumerate()
        .map(|(i, c)| CertificateSummary {
            mode: i + 1,
            branch: c.branch,
            xi: c.xi(),
            alphas: c.alphas.clone(),
            lambda_min_p: c.lambda_min_p,
            lambda_max_p: c.lambda_max_p,
            gamma: c.gamma,
            residual: c.residual,
            residual_ok: c.residual_ok(),
            p: c.p.to_rows(),
        })
        .collect();
    let report = CertifyReport {
        k1: file.gains.k1,
        all_residuals_ok: summaries.iter().all(|c| c.residual_ok),
        certificates: summaries,
        dwell_time: renumber(dwell),
    };
    emit(out, &to_json(&report))?;
    Ok(if !report.all_residuals_ok {
        EXIT_NUMERICAL
    } else if !report.dwell_time.overall {
        EXIT_INADMISSIBLE
    } else {
        EXIT_OK
    })
}

/// Reports number modes from 1.
fn renumber(mut r: DwellTimeReport) -> DwellTimeReport {
    for s in &mut r.switches {
        s.from_mode += 1;
        s.to_mode += 1;
    }
    for t in &mut r.transitions {
        t.from_mode += 1;
        t.to_mode += 1;
    }
    r
}

const AXIS_NAMES: [&str; 2] = ["x", "y"];

fn outcomes(file: &ScenarioFile, traces: &[SimulationTrace]) -> std::result::Result<Vec<Outcome>, Failure> {
    let graphs = file.graphs().map_err(|e| Failure::new(EXIT_INVALID, e))?;
    let last = graphs.last().expect("validated scenario has modes");
    let b = check_structural_balance(last);
    Ok(traces
        .iter()
        .map(|t| classify_outcome(t, last, &b, file.tolerance.convergence))
        .collect())
}

fn write_traces(dir: &Path, traces: &[SimulationTrace]) -> std::result::Result<(), Failure> {
    for (axis, t) in traces.iter().enumerate() {
        let suffix = if traces.len() == 1 { String::new() } else { format!("_{}", AXIS_NAMES[axis]) };
        write_file(dir, &format!("trace{suffix}.csv"), &trace_csv(t))?;
        write_file(dir, &format!("jumps{suffix}.json"), &to_json(&jump_entries(t)))?;
    }
    Ok(())
}

fn outcome_json(outcomes: &[Outcome]) -> String {
    if outcomes.len() == 1 {
        to_json(&outcomes[0])
    } else {
        let map: serde_json::Map<String, serde_json::Value> = outcomes
            .iter()
            .zip(AXIS_NAMES)
            .map(|(o, name)| (name.to_string(), serde_json::to_value(o).expect("outcome serialises")))
            .collect();
        to_json(&map)
    }
}

fn simulate_cmd(path: &Path, dir: &Path, out: &mut dyn Write) -> CliResult {
    let file = load(path)?;
    let traces = simulate_axes(&file)?;
    let outcomes = outcomes(&file, &traces)?;
    fs::create_dir_all(dir).map_err(|e| Failure::io(dir, e))?;
    write_traces(dir, &traces)?;
    let text = outcome_json(&outcomes);
    write_file(dir, "outcome.json", &text)?;
    emit(out, &text)?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct Summary {
    k1: f64,
    step: f64,
    t_end: f64,
    balance_sequence: Vec<&'static str>,
    expected_balance_sequence: Vec<&'static str>,
    balance_sequence_matches: bool,
    final_partition: Option<Partition>,
    expected_final_partition: Partition,
    final_partition_matches: bool,
    outcomes: serde_json::Value,
    max_final_edge_error: Vec<f64>,
    max_point_mismatch: f64,
}

fn reproduce_paper(dir: &Path, overrides: DemoOverrides, out: &mut dyn Write) -> CliResult {
    let run = run_paper_demo(overrides).map_err(Failure::numerical)?;
    let file = &run.file;
    let analysis = analyze_modes(file)?;
    let outcomes = outcomes(file, &run.axes)?;
    let balance_sequence: Vec<&'static str> = analysis.iter().map(|m| m.balance).collect();
    let expected: Vec<&'static str> = PAPER_BALANCE[..balance_sequence.len().min(6)].to_vec();
    let final_partition = analysis.last().and_then(|m| {
        m.partition.as_ref().map(|p| Partition {
            positive: p.positive.clone(),
            negative: p.negative.clone(),
        })
    });
    let expected_partition = Partition {
        positive: PAPER_FINAL_CAMPS.0.iter().map(|s| s.to_string()).collect(),
        negative: PAPER_FINAL_CAMPS.1.iter().map(|s| s.to_string()).collect(),
    };
    let final_partition_matches = final_partition.as_ref().is_some_and(|p| {
        let sorted = |v: &[String]| {
            let mut v = v.to_vec();
            v.sort();
            v
        };
        sorted(&p.positive) == expected_partition.positive && sorted(&p.negative) == expected_partition.negative
    });
    let summary = Summary {
        k1: file.gains.k1,
        step: file.integrator.step,
        t_end: file.integrator.t_end,
        balance_sequence_matches: balance_sequence == expected,
        balance_sequence,
        expected_balance_sequence: expected,
        final_partition,
        expected_final_partition: expected_partition,
        final_partition_matches,
        outcomes: serde_json::from_str(&outcome_json(&outcomes)).expect("round trip"),
        max_final_edge_error: run
            .axes
            .iter()
            .map(|t| crate::matrix::norm_inf(t.final_edge_error()))
            .collect(),
        max_point_mismatch: max_point_mismatch(&run),
    };
    fs::create_dir_all(dir).map_err(|e| Failure::io(dir, e))?;
    write_file(dir, "trajectories.csv", &run.robots.to_csv())?;
    write_traces(dir, &run.axes)?;
    let text = to_json(&summary);
    write_file(dir, "summary.json", &text)?;
    emit(out, &text)?;
    Ok(EXIT_OK)
}
