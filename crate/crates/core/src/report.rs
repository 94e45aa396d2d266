//! Text output shared by the CLI: numbers are written with 12 significant
//! digits so that reports are stable across runs and platforms.

use serde::Serialize;
use serde_json::Value;

use crate::matrix::norm2;
use crate::switched_sim::SimulationTrace;

pub const SIGNIFICANT_DIGITS: usize = 12;

/// Rounds to 12 significant digits; `-0` becomes `0`.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return if x == 0.0 { 0.0 } else { x };
    }
    let r: f64 = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x).parse().unwrap();
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

pub fn fmt_num(x: f64) -> String {
    format!("{}", round_sig(x))
}

fn round_value(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = round_sig(n.as_f64().unwrap());
            *v = serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number);
        }
        Value::Array(items) => items.iter_mut().for_each(round_value),
        Value::Object(map) => map.values_mut().for_each(round_value),
        _ => {}
    }
}

/// Pretty JSON with every float rounded, newline-terminated.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut v = serde_json::to_value(value).expect("report serialises");
    round_value(&mut v);
    let mut s = serde_json::to_string_pretty(&v).expect("value serialises");
    s.push('\n');
    s
}

/// Trace CSV with header `t,mode,x_<label>...,e_<k>...`. Columns cover every
/// node and edge slot that appears in any mode; absent entries are blank.
/// Modes are numbered from 1.
pub fn trace_csv(trace: &SimulationTrace) -> String {
    let mut labels: Vec<&str> = Vec::new();
    for mode in &trace.node_labels {
        for l in mode {
            if !labels.contains(&l.as_str()) {
                labels.push(l);
            }
        }
    }
    let n_edges = trace.edge_errors.iter().map(Vec::len).max().unwrap_or(0);
    let mut out = String::from("t,mode");
    for l in &labels {
        out.push_str(&format!(",x_{l}"));
    }
    for k in 1..=n_edges {
        out.push_str(&format!(",e_{k}"));
    }
    out.push('\n');
    for s in 0..trace.len() {
        let mode = trace.mode_index[s];
        out.push_str(&format!("{},{}", fmt_num(trace.times[s]), mode + 1));
        let present = &trace.node_labels[mode];
        for l in &labels {
            out.push(',');
            if let Some(j) = present.iter().position(|p| p == l) {
                out.push_str(&fmt_num(trace.node_states[s][j]));
            }
        }
        let e = &trace.edge_errors[s];
        for k in 0..n_edges {
            out.push(',');
            if let Some(v) = e.get(k) {
                out.push_str(&fmt_num(*v));
            }
        }
        out.push('\n');
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JumpEntry {
    pub t: f64,
    pub from_mode: usize,
    pub to_mode: usize,
    pub phi_norm: f64,
}

/// Jump log entries, modes numbered from 1.
pub fn jump_entries(trace: &SimulationTrace) -> Vec<JumpEntry> {
    trace
        .jumps
        .iter()
        .map(|j| JumpEntry {
            t: j.time,
            from_mode: j.from_mode + 1,
            to_mode: j.to_mode + 1,
            phi_norm: norm2(&j.map.phi),
        })
        .collect()
}
