//! Proxy-port admission and blocking models.
//!
//! A proxy owns `C` ports split into partitions; `k` request classes arrive
//! as Poisson streams and hold a port for their class holding time. These
//! functions predict how often such a proxy turns requests away.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One class of service requests: Poisson arrivals at `arrival_rate` per
/// second, each holding a port for `holding_time` seconds and streaming at
/// `playback_rate` kbps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ServiceClass {
    pub arrival_rate: f64,
    pub holding_time: f64,
    pub playback_rate: f64,
}

/// The full set of request classes a proxy serves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServiceClassSet {
    classes: Vec<ServiceClass>,
}

impl ServiceClassSet {
    /// Validates and wraps a class list: at least one class, non-negative
    /// arrival rates, positive holding times and playback rates.
    pub fn new(classes: Vec<ServiceClass>) -> Result<Self> {
        if classes.is_empty() {
            return Err(Error::arg("service class set must contain at least one class"));
        }
        for (i, c) in classes.iter().enumerate() {
            if !(c.arrival_rate >= 0.0) {
                return Err(Error::arg(format!("class {i}: arrival rate must be >= 0")));
            }
            if !(c.holding_time > 0.0) {
                return Err(Error::arg(format!("class {i}: holding time must be > 0")));
            }
            if !(c.playback_rate > 0.0) {
                return Err(Error::arg(format!("class {i}: playback rate must be > 0")));
            }
        }
        Ok(Self { classes })
    }

    pub fn classes(&self) -> &[ServiceClass] {
        &self.classes
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction guarantees k >= 1
    }
}

/// One port partition: fixed capacity and current occupancy, with the
/// occupancy broken down by request class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PortPartition {
    pub capacity: u32,
    pub class_occupancy: Vec<u32>,
}

impl PortPartition {
    pub fn new(capacity: u32, class_count: usize) -> Self {
        Self { capacity, class_occupancy: vec![0; class_count] }
    }

    /// Total ports currently held in this partition.
    pub fn occupancy(&self) -> u32 {
        self.class_occupancy.iter().sum()
    }

    pub fn has_free_port(&self) -> bool {
        self.occupancy() < self.capacity
    }
}

/// Partitioned port plan of a proxy: total capacity `C` carved into
/// partitions of capacity `C_j`, each tracking per-class occupancy.
///
/// Invariants enforced on construction and mutation: the partition
/// capacities never exceed the total, and occupancy never exceeds a
/// partition's capacity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProxyPortPlan {
    total_ports: u32,
    partitions: Vec<PortPartition>,
}

impl ProxyPortPlan {
    /// Builds a plan of `partition_count` equal partitions of
    /// `ports_per_partition` ports each.
    pub fn uniform(partition_count: u32, ports_per_partition: u32, class_count: usize) -> Result<Self> {
        if partition_count == 0 || ports_per_partition == 0 {
            return Err(Error::config("port plan requires at least one partition and one port"));
        }
        let partitions = (0..partition_count)
            .map(|_| PortPartition::new(ports_per_partition, class_count))
            .collect();
        Ok(Self { total_ports: partition_count * ports_per_partition, partitions })
    }

    pub fn total_ports(&self) -> u32 {
        self.total_ports
    }

    pub fn partitions(&self) -> &[PortPartition] {
        &self.partitions
    }

    pub fn partition_count(&self) -> usize {
        self.partitions.len()
    }

    /// Total ports held across all partitions.
    pub fn occupancy(&self) -> u32 {
        self.partitions.iter().map(|p| p.occupancy()).sum()
    }

    /// Takes one port in partition `j` for class `class`. Fails if the
    /// partition is full.
    pub fn acquire(&mut self, j: usize, class: usize) -> Result<()> {
        let p = self
            .partitions
            .get_mut(j)
            .ok_or_else(|| Error::arg(format!("partition {j} out of range")))?;
        if !p.has_free_port() {
            return Err(Error::arg(format!("partition {j} has no free port")));
        }
        p.class_occupancy[class] += 1;
        Ok(())
    }

    /// Releases one class-`class` port in partition `j`.
    pub fn release(&mut self, j: usize, class: usize) -> Result<()> {
        let p = self
            .partitions
            .get_mut(j)
            .ok_or_else(|| Error::arg(format!("partition {j} out of range")))?;
        if p.class_occupancy[class] == 0 {
            return Err(Error::arg(format!("partition {j} holds no class-{class} port")));
        }
        p.class_occupancy[class] -= 1;
        Ok(())
    }
}

/// Admission control at the proxy: disk bandwidth `R_d` kbps and a hard cap
/// `eta` on concurrent streams.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdmissionPolicy {
    pub disk_bandwidth: f64,
    pub threshold: u32,
}

impl AdmissionPolicy {
    pub fn new(disk_bandwidth: f64, threshold: u32) -> Result<Self> {
        if !(disk_bandwidth > 0.0) {
            return Err(Error::arg("disk bandwidth must be > 0"));
        }
        if threshold < 1 {
            return Err(Error::arg("admission threshold must be >= 1"));
        }
        Ok(Self { disk_bandwidth, threshold })
    }
}

/// Maximum number of concurrent streams the proxy admits:
/// `min(floor(R_d / R_p), eta)`.
pub fn admission_limit(policy: AdmissionPolicy, playback_rate: f64) -> Result<u32> {
    if !(playback_rate > 0.0) {
        return Err(Error::arg("playback rate must be > 0"));
    }
    let by_disk = (policy.disk_bandwidth / playback_rate).floor();
    // Ratios beyond u32 range are capped by the threshold anyway.
    let by_disk = if by_disk >= u32::MAX as f64 { u32::MAX } else { by_disk as u32 };
    Ok(by_disk.min(policy.threshold))
}

/// Offered load in Erlangs over a busy horizon of `busy_horizon` seconds:
/// `(1 / T_n) * sum_i lambda_i * h_i`.
pub fn offered_load(classes: &ServiceClassSet, busy_horizon: f64) -> Result<f64> {
    if !(busy_horizon > 0.0) {
        return Err(Error::arg("busy horizon must be > 0"));
    }
    let total: f64 = classes
        .classes()
        .iter()
        .map(|c| c.arrival_rate * c.holding_time)
        .sum();
    Ok(total / busy_horizon)
}

/// Erlang-B blocking probability of a loss system with `ports` servers and
/// `offered` Erlangs of load.
///
/// Evaluated with the stable recurrence
/// `B(0) = 1, B(c) = E*B(c-1) / (c + E*B(c-1))`,
/// which avoids the overflow-prone factorials of the textbook ratio
/// `(E^C / C!) / sum_m E^m / m!`.
pub fn erlang_b(offered: f64, ports: u32) -> Result<f64> {
    if !(offered >= 0.0) {
        return Err(Error::arg("offered load must be >= 0 and finite"));
    }
    let mut b = 1.0_f64;
    for c in 1..=ports {
        b = offered * b / (c as f64 + offered * b);
    }
    Ok(b)
}

/// Probability that a sequential scan over `k` partitions lands on partition
/// `j` (1-based) and finds a free port there:
/// `(1 - 1/k)^(j-1) * (1/k) * ((C_j - Q_j) / C_j)`.
///
/// The partition index follows a geometric law with parameter `1/k`; the
/// last factor is the fraction of partition `j` still free.
pub fn free_port_discovery_prob(j: u32, k: u32, capacity: u32, occupancy: u32) -> Result<f64> {
    if j < 1 {
        return Err(Error::arg("partition index j must be >= 1"));
    }
    if k < 1 {
        return Err(Error::arg("partition count k must be >= 1"));
    }
    if capacity < 1 {
        return Err(Error::arg("partition capacity must be >= 1"));
    }
    if occupancy > capacity {
        return Err(Error::arg(format!(
            "occupancy {occupancy} exceeds partition capacity {capacity}"
        )));
    }
    let k = k as f64;
    let geometric = (1.0 - 1.0 / k).powi(j as i32 - 1) * (1.0 / k);
    let free_fraction = (capacity - occupancy) as f64 / capacity as f64;
    Ok(geometric * free_fraction)
}

/// Probability that every listed partition blocks simultaneously: the
/// product of per-partition Erlang-B terms.
pub fn multi_partition_blocking(loads: &[f64], capacities: &[u32]) -> Result<f64> {
    if loads.len() != capacities.len() {
        return Err(Error::arg(format!(
            "got {} loads but {} capacities",
            loads.len(),
            capacities.len()
        )));
    }
    let mut product = 1.0;
    for (&e, &c) in loads.iter().zip(capacities) {
        product *= erlang_b(e, c)?;
    }
    Ok(product)
}
