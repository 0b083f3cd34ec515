//! Hybrid peer-to-peer / mesh video-on-demand delivery, modeled two ways:
//!
//! * [`analytic`] — closed-form teletraffic and tier-capacity models
//!   (Erlang-B port blocking, partitioned-port discovery, level-wise
//!   streaming capacity, active-peer tail probabilities, signed-sum
//!   transfer bounds).
//! * [`engine`] — a deterministic discrete-event simulator of the same
//!   architecture: Poisson request classes admitted onto partitioned proxy
//!   ports, LRFU proxy caches, and cache-miss chunk retrieval through the
//!   peer tiers via a queue-driven cluster-head search.
//!
//! The point of keeping both in one crate is validation: simulated blocking,
//! per-level volume, and hop counts can be checked against the analytic
//! predictions (see `vodsim-cli`'s `validate` command).

// Validation uses `!(x > 0.0)` so NaN fails alongside out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod content;
pub mod engine;
pub mod error;
pub mod search;
pub mod topology;

pub use content::{Chunk, ChunkKey, PlacementMap, ProxyCache, VideoAsset};
pub use engine::{MetricsReport, SimConfig};
pub use error::{Error, Result};
pub use search::{SearchOutcome, SearchQuery, SessionWindow};
pub use topology::{Adjacency, LinkKind, NodeId, NodeKind, Topology, VirtualCluster};
