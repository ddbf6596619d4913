//! Node embeddings from electrical-circuit connection subgraphs.
//!
//! Each node's context is built in two phases. A distance-driven
//! [`expansion`] grows a candidate neighborhood through low-degree hops, and
//! a current-driven [`refinement`] keeps the nodes lying on the
//! source-to-sink paths that carry the most current in the circuit spanned
//! by that neighborhood. The resulting neighborhoods feed a SkipGram model
//! with negative sampling ([`skipgram`]); every stage is deterministic for a
//! given seed.
//!
//! ```
//! use csembed::graph::{Graph, NodeId};
//! use csembed::{expansion, refinement};
//!
//! let g = Graph::from_edges(4, &[(0, 1, 1.0), (0, 2, 1.0), (1, 3, 1.0), (2, 3, 1.0)]);
//! let ag = g.augment(NodeId(0), 1.0);
//! let ne = expansion::expand(&ag, 4);
//! let nr = refinement::refine(&ne, &ag, 3, 100);
//! assert_eq!(nr.members[0], NodeId(0));
//! assert!(nr.members.iter().all(|v| ne.contains(*v)));
//! ```

pub mod circuit;
pub mod embedding;
pub mod error;
pub mod eval;
pub mod expansion;
pub mod graph;
mod linalg;
mod parallel;
pub mod paths;
pub mod pipeline;
pub mod refinement;
pub mod skipgram;
pub mod synthetic;

pub use error::{Error, Result};
