//! Exact random graph sampling.
//!
//! Every sampler here reproduces its model's edge distribution exactly:
//! each cell `(i, j)` of the probability matrix becomes an edge with
//! probability `P[i][j]`, independently. The fast samplers get there by
//! *grass-hopping* (skipping between successes with geometric gaps) or
//! *ball-dropping* (drawing the edge count, then dropping uniform cells).
//!
//! * [`er`]: Erdős–Rényi by coin flips, ball drops, grass hops, plus the
//!   fixed-edge-count model and symmetrization.
//! * [`block`]: Chung-Lu and stochastic block models as unions of
//!   Erdős–Rényi blocks.
//! * [`kronecker`]: stochastic Kronecker graphs by grass-hopping each
//!   constant-probability region of the multiplication table and mapping
//!   hits back through a Morton decode.
//! * [`combinat`]: region enumeration, multiset-permutation unranking,
//!   combination unranking and Morton codes.
//! * [`stats`] and [`verify`]: the statistical checks used to validate the
//!   samplers against brute-force oracles.

pub mod block;
pub mod combinat;
pub mod er;
mod error;
mod graph;
pub mod io;
pub mod kronecker;
pub mod random;
pub mod stats;
pub mod verify;

pub use error::{Error, Result};
pub use graph::{Edge, EdgeList, ProbabilityMatrix};
pub use random::{Probability, RandomStream};

/// How independent blocks or regions of a sampler are scheduled.
///
/// Each block draws from its own child stream keyed by the block index, so
/// both modes produce identical output for the same seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    #[default]
    Sequential,
    /// Run blocks on a rayon pool. `threads == 0` uses the global pool.
    Parallel { threads: usize },
}

impl Execution {
    pub(crate) fn map_ordered<T, R, F>(self, items: &[T], f: F) -> Result<Vec<R>>
    where
        T: Sync,
        R: Send,
        F: Fn(usize, &T) -> Result<R> + Sync + Send,
    {
        use rayon::prelude::*;
        match self {
            Execution::Sequential => items.iter().enumerate().map(|(i, t)| f(i, t)).collect(),
            Execution::Parallel { threads } => {
                let run = || {
                    items
                        .par_iter()
                        .enumerate()
                        .map(|(i, t)| f(i, t))
                        .collect::<Result<Vec<R>>>()
                };
                if threads == 0 {
                    run()
                } else {
                    rayon::ThreadPoolBuilder::new()
                        .num_threads(threads)
                        .build()
                        .map_err(|e| Error::Capacity(format!("cannot build thread pool: {e}")))?
                        .install(run)
                }
            }
        }
    }
}
