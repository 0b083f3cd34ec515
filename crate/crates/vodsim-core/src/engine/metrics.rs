//! Accumulated observations of one simulation run.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::topology::NodeId;

/// Per-proxy delivered-throughput series: kilobits delivered to the viewer
/// cluster per time bucket.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProxyThroughput {
    pub proxy: NodeId,
    pub viewers: u32,
    pub bucket_s: f64,
    pub delivered_kbit: Vec<f64>,
}

impl ProxyThroughput {
    pub fn total_kbit(&self) -> f64 {
        self.delivered_kbit.iter().sum()
    }
}

/// Everything a run reports. Counters are per class where that matters;
/// `admitted + blocked == arrivals` holds per class and in total, and the
/// hop histogram plus failed searches account for every cache-miss search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub arrivals: Vec<u64>,
    pub admitted: Vec<u64>,
    pub blocked: Vec<u64>,
    pub cache_hits: u64,
    pub cache_miss_searches: u64,
    pub failed_searches: u64,
    /// adjacency size -> hop count -> number of found searches
    pub hop_histogram: BTreeMap<u32, BTreeMap<u32, u64>>,
    pub throughput: Vec<ProxyThroughput>,
    /// level -> kilobits received by nodes at that level during transfers
    pub per_level_volume_kbit: BTreeMap<u32, f64>,
    /// probes[class][partition] / rejections[class][partition]
    pub partition_probes: Vec<Vec<u64>>,
    pub partition_rejections: Vec<Vec<u64>>,
    /// arrival timestamps across all proxies, in event order
    pub arrival_times: Vec<f64>,
    pub elapsed_wall_s: f64,
}

impl MetricsReport {
    pub fn new(class_count: usize, partition_count: usize) -> Self {
        Self {
            arrivals: vec![0; class_count],
            admitted: vec![0; class_count],
            blocked: vec![0; class_count],
            cache_hits: 0,
            cache_miss_searches: 0,
            failed_searches: 0,
            hop_histogram: BTreeMap::new(),
            throughput: Vec::new(),
            per_level_volume_kbit: BTreeMap::new(),
            partition_probes: vec![vec![0; partition_count]; class_count],
            partition_rejections: vec![vec![0; partition_count]; class_count],
            arrival_times: Vec::new(),
            elapsed_wall_s: 0.0,
        }
    }

    pub fn total_arrivals(&self) -> u64 {
        self.arrivals.iter().sum()
    }

    pub fn total_admitted(&self) -> u64 {
        self.admitted.iter().sum()
    }

    pub fn total_blocked(&self) -> u64 {
        self.blocked.iter().sum()
    }

    /// Fraction of arrivals blocked, over all classes.
    pub fn measured_blocking(&self) -> f64 {
        let arrivals = self.total_arrivals();
        if arrivals == 0 {
            return 0.0;
        }
        self.total_blocked() as f64 / arrivals as f64
    }

    /// Fraction of class-`class` probes of partition `j` that found it
    /// full.
    pub fn measured_partition_blocking(&self, class: usize, j: usize) -> f64 {
        let probes = self.partition_probes[class][j];
        if probes == 0 {
            return 0.0;
        }
        self.partition_rejections[class][j] as f64 / probes as f64
    }

    /// Total mass of the hop histogram (found searches).
    pub fn found_searches(&self) -> u64 {
        self.hop_histogram
            .values()
            .flat_map(|h| h.values())
            .sum()
    }

    /// Serialized form with the wall-clock field zeroed; two runs of the
    /// same config must produce identical keys.
    pub fn determinism_key(&self) -> String {
        let mut clone = self.clone();
        clone.elapsed_wall_s = 0.0;
        serde_json::to_string(&clone).expect("report serializes")
    }
}
