//! Bipartite consensus in open multi-agent systems over switching signed graphs.
//!
//! * [`signed_graph`]: signed graphs, incidence and Laplacian matrices, structural balance.
//! * [`spectral`]: symmetric eigensolver, ranks and the zero eigenspace of the edge Laplacian.
//! * [`lyapunov`]: per-mode Lyapunov certificates and dwell-time checks.
//! * [`switched_sim`]: switched edge-error dynamics with node joins and departures.
//! * [`unicycle`]: wheeled-robot kinematics and the bundled robot demo.
//! * [`scenario_io`]: scenario files; [`cli`]: the `omas` command.
// `!(x > 0.0)` is used on purpose so that NaN is rejected along with non-positive input.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod lyapunov;
pub mod matrix;
pub mod report;
pub mod scenario_io;
pub mod signed_graph;
pub mod spectral;
pub mod switched_sim;
pub mod unicycle;

pub use error::{Error, Result};
pub use matrix::RealMatrix;
pub use signed_graph::{BalanceResult, Sign, SignedEdge, SignedGraph};
