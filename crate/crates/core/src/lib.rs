//! Graph reordering and compression toolkit.
//!
//! The crate is organised around an immutable [`Graph`] with sorted successor
//! lists. Orderings produce a [`Permutation`], which can be applied to the
//! graph before handing it to the BV-style codec in [`codec`]. The main
//! ordering is Layered Label Propagation ([`llp`]), built on the Absolute
//! Potts Model clustering rule in [`apm`]. Baselines live in [`orderings`];
//! host-recovery measures live in [`metrics`].
//!
//! ```
//! use llp_core::{codec::{self, CodecConfig}, llp::{self, LlpConfig}, synthetic, Permutation};
//!
//! let g = synthetic::stochastic_block_model(&[40, 40], 0.3, 0.01, 7);
//! let perm = llp::run_llp(&g, &Permutation::identity(g.num_nodes()), &LlpConfig::default()).unwrap();
//! let reordered = g.apply_permutation(&perm).unwrap();
//! let stats = codec::measure(&reordered, &CodecConfig::default()).unwrap();
//! assert!(stats.bits_per_link > 0.0);
//! ```

pub mod apm;
pub mod codec;
pub mod codes;
mod error;
pub mod graph;
pub mod llp;
pub mod metrics;
pub mod orderings;
pub mod pipeline;
pub mod synthetic;

pub use error::{Error, Result};
pub use graph::{Graph, NodeId, Permutation, SymSplit};
