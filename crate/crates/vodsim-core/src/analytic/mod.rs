//! Closed-form performance models for the multitier delivery architecture.
//!
//! Everything in this module is a pure function of its arguments: no shared
//! state, no RNG, safe to call concurrently. The submodules group the models
//! by what they predict:
//!
//! * [`blocking`] — proxy-port admission and loss: admission limits, offered
//!   load in Erlangs, Erlang-B blocking, sequential free-port discovery over
//!   partitioned ports.
//! * [`tiers`] — level-wise streaming capacity of the peer tiers and the
//!   probability that enough peers per level are active.
//! * [`bounds`] — signed-sum bounds on aggregate transfer rate (Rademacher
//!   enumeration, Khintchine-type two-sided bounds, p-norms).

pub mod blocking;
pub mod bounds;
pub mod tiers;

pub use blocking::{
    admission_limit, erlang_b, free_port_discovery_prob, multi_partition_blocking, offered_load,
    AdmissionPolicy, PortPartition, ProxyPortPlan, ServiceClass, ServiceClassSet,
};
pub use bounds::{
    aggregate_transfer_feasible, bernoulli_indicator_mean, khintchine_bounds, p_norm,
    rademacher_mean_abs, TransferEnsemble,
};
pub use tiers::{
    active_peer_tail, level_sharing_capacity, multilevel_active_product, tier_capacity_closed,
    tier_capacity_iterative, LevelActivity, TierCapacityParams,
};
