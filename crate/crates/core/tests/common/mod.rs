#![allow(dead_code)]

use std::collections::BTreeSet;

use omas::{Sign, SignedEdge, SignedGraph};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const SEED: u64 = 0x5eed_0b1a;

fn all_pairs(n: usize) -> Vec<(usize, usize)> {
    let mut v = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            v.push((i, j));
        }
    }
    v
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

fn connected(n: usize, edges: &[(usize, usize)]) -> bool {
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(u) = stack.pop() {
        for &(a, b) in edges {
            let v = if a == u {
                b
            } else if b == u {
                a
            } else {
                continue;
            };
            if !seen[v] {
                seen[v] = true;
                stack.push(v);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// One representative of every isomorphism class of connected simple graphs
/// on `n` nodes, edges as `(lower, higher)` pairs in lexicographic order.
pub fn connected_topologies(n: usize) -> Vec<Vec<(usize, usize)>> {
    let pairs = all_pairs(n);
    let perms = permutations(n);
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for mask in 0u32..(1 << pairs.len()) {
        let edges: Vec<(usize, usize)> = (0..pairs.len()).filter(|k| mask >> k & 1 == 1).map(|k| pairs[k]).collect();
        if edges.len() + 1 < n || !connected(n, &edges) {
            continue;
        }
        let canon = perms
            .iter()
            .map(|p| {
                let mut e: Vec<(usize, usize)> = edges
                    .iter()
                    .map(|&(a, b)| {
                        let (x, y) = (p[a], p[b]);
                        (x.min(y), x.max(y))
                    })
                    .collect();
                e.sort();
                e
            })
            .min()
            .unwrap();
        if seen.insert(canon) {
            out.push(edges);
        }
    }
    out
}

pub fn signed(n: usize, topology: &[(usize, usize)], signs: u32) -> SignedGraph {
    let edges = topology
        .iter()
        .enumerate()
        .map(|(k, &(a, b))| {
            let s = if signs >> k & 1 == 1 { Sign::Antagonistic } else { Sign::Cooperative };
            SignedEdge::new(a, b, s)
        })
        .collect();
    SignedGraph::new(n, edges).unwrap()
}

/// Every connected signed graph with 2 ≤ N ≤ `max_n` nodes up to isomorphism
/// of the underlying topology, with all sign patterns.
pub fn exhaustive_corpus(max_n: usize) -> Vec<SignedGraph> {
    let mut out = Vec::new();
    for n in 2..=max_n {
        for topo in connected_topologies(n) {
            for signs in 0..(1u32 << topo.len()) {
                out.push(signed(n, &topo, signs));
            }
        }
    }
    out
}

/// Random labelled tree on `n` nodes from a Prüfer sequence, tail = lower index.
pub fn random_tree_topology(n: usize, rng: &mut impl Rng) -> Vec<(usize, usize)> {
    if n == 2 {
        return vec![(0, 1)];
    }
    let seq: Vec<usize> = (0..n - 2).map(|_| rng.random_range(0..n)).collect();
    let mut degree = vec![1usize; n];
    for &s in &seq {
        degree[s] += 1;
    }
    let mut edges = Vec::with_capacity(n - 1);
    for &s in &seq {
        let leaf = (0..n).find(|&i| degree[i] == 1).unwrap();
        edges.push((leaf.min(s), leaf.max(s)));
        degree[leaf] -= 1;
        degree[s] -= 1;
    }
    let rest: Vec<usize> = (0..n).filter(|&i| degree[i] == 1).collect();
    edges.push((rest[0], rest[1]));
    edges.sort();
    edges
}

/// `count` random signed trees with 2 ≤ N ≤ `max_n`.
pub fn random_signed_trees(count: usize, max_n: usize, seed: u64) -> Vec<SignedGraph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let n = rng.random_range(2..=max_n);
            let topo = random_tree_topology(n, &mut rng);
            let signs = rng.random_range(0..(1u32 << topo.len()));
            signed(n, &topo, signs)
        })
        .collect()
}

/// Random connected signed graph: a random tree plus extra random edges.
pub fn random_connected(rng: &mut impl Rng, min_n: usize, max_n: usize) -> SignedGraph {
    let n = rng.random_range(min_n..=max_n);
    let mut topo: BTreeSet<(usize, usize)> = random_tree_topology(n, rng).into_iter().collect();
    for (a, b) in all_pairs(n) {
        if rng.random_bool(0.3) {
            topo.insert((a, b));
        }
    }
    let edges = topo
        .into_iter()
        .map(|(a, b)| {
            let s = if rng.random_bool(0.5) { Sign::Antagonistic } else { Sign::Cooperative };
            SignedEdge::new(a, b, s)
        })
        .collect();
    SignedGraph::new(n, edges).unwrap()
}

/// Edge subsets forming one simple cycle.
pub fn simple_cycles(g: &SignedGraph) -> Vec<Vec<usize>> {
    let m = g.n_edges();
    assert!(m <= 20, "cycle enumeration is exponential");
    let mut out = Vec::new();
    for mask in 1u32..(1 << m) {
        let ks: Vec<usize> = (0..m).filter(|k| mask >> k & 1 == 1).collect();
        if ks.len() < 3 {
            continue;
        }
        let mut deg = vec![0; g.n_nodes()];
        for &k in &ks {
            deg[g.edges()[k].tail] += 1;
            deg[g.edges()[k].head] += 1;
        }
        if deg.iter().any(|&d| d != 0 && d != 2) {
            continue;
        }
        // a 2-regular edge set is a single cycle iff it is connected
        let nodes: Vec<usize> = (0..g.n_nodes()).filter(|&v| deg[v] == 2).collect();
        let mut seen = vec![false; g.n_nodes()];
        let mut stack = vec![nodes[0]];
        seen[nodes[0]] = true;
        while let Some(u) = stack.pop() {
            for &k in &ks {
                let e = g.edges()[k];
                if e.touches(u) && !seen[e.other(u)] {
                    seen[e.other(u)] = true;
                    stack.push(e.other(u));
                }
            }
        }
        if nodes.iter().all(|&v| seen[v]) {
            out.push(ks);
        }
    }
    out
}

/// SB iff every simple cycle has positive sign product.
pub fn balanced_by_cycles(g: &SignedGraph) -> bool {
    simple_cycles(g)
        .iter()
        .all(|c| c.iter().map(|&k| g.edges()[k].sign.value()).product::<f64>() > 0.0)
}

/// Eigenvalues from an independent dense solver.
pub fn oracle_eigenvalues(a: &omas::RealMatrix) -> Vec<f64> {
    let n = a.rows();
    let m = nalgebra::DMatrix::from_fn(n, n, |i, j| a[(i, j)]);
    let mut ev: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

pub fn to_nalgebra(a: &omas::RealMatrix) -> nalgebra::DMatrix<f64> {
    nalgebra::DMatrix::from_fn(a.rows(), a.cols(), |i, j| a[(i, j)])
}

pub mod dwell {
    use std::collections::BTreeMap;

    use omas::lyapunov::{certificate_for_mode, LyapunovCertificate};
    use omas::switched_sim::{Mode, Scenario};
    use omas::{Sign, SignedEdge, SignedGraph};
    use rand::Rng;

    /// Three sign patterns on one four-node topology, so that every
    /// transition between them is legal.
    pub fn pool() -> Vec<SignedGraph> {
        let topo = [(0, 1), (0, 2), (1, 2), (1, 3), (2, 3)];
        let labels: Vec<String> = ["a", "b", "c", "d"].iter().map(|s| s.to_string()).collect();
        [0b00000u32, 0b00101, 0b11010]
            .iter()
            .map(|&signs| {
                let edges = topo
                    .iter()
                    .enumerate()
                    .map(|(k, &(a, b))| {
                        SignedEdge::new(a, b, if signs >> k & 1 == 1 { Sign::Antagonistic } else { Sign::Cooperative })
                    })
                    .collect();
                SignedGraph::with_labels(labels.clone(), edges).unwrap()
            })
            .collect()
    }

    pub struct RandomSchedule {
        pub scenario: Scenario,
        /// Pool index of each scheduled mode.
        pub picks: Vec<usize>,
        pub n_hat: f64,
    }

    pub fn random_schedule(rng: &mut impl Rng, pool: &[SignedGraph]) -> RandomSchedule {
        let n_modes = rng.random_range(2..=14);
        let mut picks = vec![rng.random_range(0..pool.len())];
        while picks.len() < n_modes {
            let next = rng.random_range(0..pool.len());
            if next != *picks.last().unwrap() {
                picks.push(next);
            }
        }
        let mut t = 0.0;
        let mut modes = Vec::new();
        for &p in &picks {
            modes.push(Mode { graph: pool[p].clone(), start: t });
            t += (rng.random_range(5..300) as f64) * 0.01;
        }
        RandomSchedule {
            scenario: Scenario {
                modes,
                k1: 1.0,
                x0: vec![0.0; 4],
                new_node_states: BTreeMap::new(),
                t_end: t,
                step: 1e-3,
            },
            picks,
            n_hat: rng.random_range(0..3) as f64,
        }
    }

    pub fn pool_certificates(pool: &[SignedGraph]) -> Vec<LyapunovCertificate> {
        pool.iter().map(|g| certificate_for_mode(g, 1.0, None, None).unwrap()).collect()
    }

    /// Admissibility per `(from, to)` pool-index pair, from events counted on
    /// a fine time grid and dwell bounds recomputed from scratch.
    pub fn oracle(s: &RandomSchedule, certs: &[LyapunovCertificate]) -> BTreeMap<(usize, usize), (usize, bool)> {
        let dt = 1e-3;
        let starts: Vec<f64> = s.scenario.modes.iter().map(|m| m.start).collect();
        let sigma = |t: f64| s.picks[starts.iter().rposition(|&st| st <= t + 1e-12).unwrap()];
        let mut events: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let steps = (s.scenario.t_end / dt).round() as usize;
        let mut prev = sigma(0.0);
        for k in 1..steps {
            let cur = sigma(k as f64 * dt);
            if cur != prev {
                *events.entry((prev, cur)).or_default() += 1;
            }
            prev = cur;
        }
        let mut active: BTreeMap<usize, f64> = BTreeMap::new();
        for (i, &p) in s.picks.iter().enumerate() {
            let end = starts.get(i + 1).copied().unwrap_or(s.scenario.t_end);
            *active.entry(p).or_default() += end - starts[i];
        }
        events
            .into_iter()
            .map(|((from, to), count)| {
                let omega = 2.0 * certs[to].lambda_max_p / certs[from].lambda_min_p;
                let tau = (omega.ln() / certs[to].gamma).max(0.0);
                let ok = tau == 0.0 || count as f64 <= s.n_hat + active[&to] / tau;
                ((from, to), (count, ok))
            })
            .collect()
    }
}
