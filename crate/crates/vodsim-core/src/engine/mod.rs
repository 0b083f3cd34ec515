//! Deterministic discrete-event simulation of the delivery architecture.
//!
//! One run owns its event queue, proxy states and caches; everything is
//! driven by a seeded RNG split into fixed streams (topology, placement,
//! adjacency, viewers, arrivals, service), so identical configs replay
//! bit-identically. Request classes arrive as Poisson streams scaled by the
//! attached viewer population, are admitted onto partitioned proxy ports,
//! and stream on a cache hit or trigger a cluster-head search and
//! store-and-forward chunk transfer on a miss.

mod events;
mod metrics;

pub use events::{Event, EventKind, EventQueue};
pub use metrics::{MetricsReport, ProxyThroughput};

use std::collections::BTreeMap;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Zipf};
use serde::{Deserialize, Serialize};

use crate::analytic::{admission_limit, AdmissionPolicy, ProxyPortPlan, ServiceClass};
use crate::content::{chunkify, place_initial, AssetId, Chunk, PlacementMap, ProxyCache, VideoAsset};
use crate::error::{Error, Result};
use crate::search::{search_with_stats, ClusterIndex, SearchOutcome, SearchQuery, SessionWindow};
use crate::topology::{
    build_hybrid, form_clusters, Adjacency, LinkCapacityPolicy, NodeId, Topology, TopologyConfig,
};

/// How port holding times are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HoldingModel {
    /// Exponential with the class holding time as mean (memoryless, the
    /// Erlang-comparable mode).
    Exponential,
    /// Exactly the class holding time, for deterministic traces.
    Fixed,
}

/// Full configuration of a simulation run. The defaults follow the
/// reference parameter table: 10 ports per partition, 20 partitions, 120 s
/// port access time, 15 levels, 4 peers per level, 30 fps video in 30-frame
/// GOPs, 400-800 kbps links, 20-40 viewers per proxy, 480 s horizon.
///
/// Class arrival rates are per viewer per second; a proxy's arrival rate
/// for class `i` is `viewers * classes[i].arrival_rate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub ports_per_partition: u32,
    pub partition_count: u32,
    pub port_access_time_s: f64,
    pub levels: u32,
    pub peers_per_level: u32,
    pub frame_rate: f64,
    pub gop_frames: u32,
    pub link_kbps_range: (f64, f64),
    pub viewers_per_proxy: (u32, u32),
    pub sim_time_s: f64,

    pub proxy_count: u32,
    pub archive_count: u32,
    pub adjacency_size: u32,
    pub link_jitter_kbps: f64,

    pub classes: Vec<ServiceClass>,
    pub popularity_exponent: f64,
    pub asset_count: u32,
    pub asset_duration_s: f64,
    pub share_fraction: f64,
    pub holding: HoldingModel,

    pub cache_capacity: usize,
    pub cache_half_life_s: f64,
    pub disk_bandwidth_kbps: f64,
    pub admission_threshold: u32,

    pub session_duration_s: f64,
    pub probe_latency_s: f64,
    pub propagation_delay_s: f64,
    pub throughput_bucket_s: f64,

    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            ports_per_partition: 10,
            partition_count: 20,
            port_access_time_s: 120.0,
            levels: 15,
            peers_per_level: 4,
            frame_rate: 30.0,
            gop_frames: 30,
            link_kbps_range: (400.0, 800.0),
            viewers_per_proxy: (20, 40),
            sim_time_s: 480.0,

            proxy_count: 4,
            archive_count: 1,
            adjacency_size: 6,
            link_jitter_kbps: 0.0,

            classes: vec![
                // Sequential playback from the top of an asset, and
                // interactive jumps to a random offset.
                ServiceClass { arrival_rate: 0.01, holding_time: 120.0, playback_rate: 600.0 },
                ServiceClass { arrival_rate: 0.01, holding_time: 120.0, playback_rate: 600.0 },
            ],
            popularity_exponent: 0.8,
            asset_count: 20,
            asset_duration_s: 60.0,
            share_fraction: 0.5,
            holding: HoldingModel::Exponential,

            cache_capacity: 120,
            cache_half_life_s: 60.0,
            disk_bandwidth_kbps: 600_000.0,
            admission_threshold: 1000,

            session_duration_s: 2.0,
            probe_latency_s: 0.01,
            propagation_delay_s: 0.01,
            throughput_bucket_s: 1.0,

            seed: 1,
        }
    }
}

impl SimConfig {
    /// Preset reproducing the measured request burst: a single class whose
    /// rate accumulates about 200 requests by t = 0.36 s.
    pub fn burst_calibration() -> Self {
        Self {
            classes: vec![ServiceClass {
                arrival_rate: 200.0 / 0.36,
                holding_time: 120.0,
                playback_rate: 600.0,
            }],
            viewers_per_proxy: (1, 1),
            proxy_count: 1,
            sim_time_s: 0.5,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            (self.ports_per_partition as f64, "ports_per_partition"),
            (self.partition_count as f64, "partition_count"),
            (self.peers_per_level as f64, "peers_per_level"),
            (self.proxy_count as f64, "proxy_count"),
            (self.archive_count as f64, "archive_count"),
            (self.asset_count as f64, "asset_count"),
            (self.port_access_time_s, "port_access_time"),
            (self.sim_time_s, "sim_time"),
            (self.frame_rate, "frame_rate"),
            (self.gop_frames as f64, "gop_frames"),
            (self.asset_duration_s, "asset_duration"),
            (self.session_duration_s, "session_duration"),
            (self.probe_latency_s, "probe_latency"),
            (self.throughput_bucket_s, "throughput_bucket"),
            (self.disk_bandwidth_kbps, "disk_bandwidth"),
            (self.admission_threshold as f64, "admission_threshold"),
            (self.popularity_exponent, "popularity_exponent"),
        ];
        for (value, name) in positive {
            if !(value > 0.0) {
                return Err(Error::config(format!("{name} must be > 0")));
            }
        }
        if self.levels < 3 {
            return Err(Error::config("levels must be >= 3"));
        }
        if !(1..=6).contains(&self.adjacency_size) {
            return Err(Error::config(format!(
                "adjacency_size must lie in [1,6], got {}",
                self.adjacency_size
            )));
        }
        if self.classes.is_empty() {
            return Err(Error::config("at least one service class is required"));
        }
        for (i, c) in self.classes.iter().enumerate() {
            if !(c.arrival_rate >= 0.0) {
                return Err(Error::config(format!("class {i}: arrival rate must be >= 0")));
            }
            if !(c.holding_time > 0.0) || !(c.playback_rate > 0.0) {
                return Err(Error::config(format!(
                    "class {i}: holding time and playback rate must be > 0"
                )));
            }
        }
        if !(self.share_fraction > 0.0 && self.share_fraction < 1.0) {
            return Err(Error::config("share_fraction must lie in (0,1)"));
        }
        let (vmin, vmax) = self.viewers_per_proxy;
        if vmin < 1 || vmin > vmax {
            return Err(Error::config(format!(
                "viewers_per_proxy range [{vmin},{vmax}] is invalid"
            )));
        }
        if !(self.propagation_delay_s >= 0.0) {
            return Err(Error::config("propagation_delay must be >= 0"));
        }
        if !(self.link_jitter_kbps >= 0.0) {
            return Err(Error::config("link_jitter must be >= 0"));
        }
        let (lo, hi) = self.link_kbps_range;
        if !(lo > 0.0 && lo <= hi) {
            return Err(Error::config("link_kbps_range must satisfy 0 < low <= high"));
        }
        Ok(())
    }

    pub fn topology_config(&self) -> TopologyConfig {
        TopologyConfig {
            levels: self.levels,
            peers_per_level: self.peers_per_level,
            proxy_count: self.proxy_count,
            archive_count: self.archive_count,
            capacity: LinkCapacityPolicy {
                jitter_kbps: self.link_jitter_kbps,
                ..LinkCapacityPolicy::default()
            },
        }
    }

    pub fn catalog(&self) -> Vec<VideoAsset> {
        (0..self.asset_count)
            .map(|i| VideoAsset {
                id: AssetId(i),
                duration_s: self.asset_duration_s,
                frame_rate: self.frame_rate,
                gop_frames: self.gop_frames,
                avg_bitrate_kbps: 600.0,
            })
            .collect()
    }

    fn rng_stream(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng
    }
}

// Fixed RNG stream ids, one per stochastic subsystem.
const STREAM_PLACEMENT: u64 = 1;
const STREAM_ADJACENCY: u64 = 2;
const STREAM_VIEWERS: u64 = 3;
const STREAM_SERVICE: u64 = 4;
const STREAM_SWEEP: u64 = 6;
const STREAM_ARRIVALS_BASE: u64 = 16;

/// Per-class Poisson arrival streams over `[0, horizon)`: exponential
/// inter-arrival gaps, merged into one time-ordered `(time, class)` list.
pub fn generate_arrivals(
    rates: &[f64],
    horizon: f64,
    rng: &mut impl Rng,
) -> Result<Vec<(f64, usize)>> {
    if !(horizon > 0.0) {
        return Err(Error::config("arrival horizon must be > 0"));
    }
    let mut merged = Vec::new();
    for (class, &rate) in rates.iter().enumerate() {
        if rate < 0.0 {
            return Err(Error::config(format!("class {class}: negative arrival rate")));
        }
        if rate == 0.0 {
            continue;
        }
        let gaps = Exp::new(rate).map_err(|e| Error::config(format!("bad rate: {e}")))?;
        let mut t = 0.0;
        loop {
            t += gaps.sample(rng);
            if t >= horizon {
                break;
            }
            merged.push((t, class));
        }
    }
    merged.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    Ok(merged)
}

/// Store-and-forward latency of one chunk over a link chain:
/// `sum(size / capacity) + hops * propagation_delay`.
pub fn transfer_time(size_kbit: f64, capacities_kbps: &[f64], propagation_delay_s: f64) -> Result<f64> {
    let mut total = 0.0;
    for &cap in capacities_kbps {
        if !(cap > 0.0) {
            return Err(Error::InvalidTopology("zero-capacity link on transfer path".into()));
        }
        total += size_kbit / cap;
    }
    Ok(total + capacities_kbps.len() as f64 * propagation_delay_s)
}

/// Live state of one proxy during a run.
#[derive(Debug, Clone)]
pub struct ProxyRuntime {
    pub id: NodeId,
    pub plan: ProxyPortPlan,
    pub cache: ProxyCache,
    pub viewers: u32,
    pub active_streams: u32,
}

/// Sequential port search: probe partitions in order from a uniformly
/// random start, admit at the first one with a free port. `None` means
/// blocked: the stream cap was reached or every partition was full.
pub fn admit_request(
    proxy: &mut ProxyRuntime,
    class: usize,
    stream_limit: u32,
    rng: &mut impl Rng,
    metrics: &mut MetricsReport,
) -> Option<usize> {
    if proxy.active_streams >= stream_limit {
        return None;
    }
    let k = proxy.plan.partition_count();
    let start = rng.gen_range(0..k);
    for offset in 0..k {
        let j = (start + offset) % k;
        metrics.partition_probes[class][j] += 1;
        if proxy.plan.partitions()[j].has_free_port() {
            proxy.plan.acquire(j, class).expect("probed partition has a free port");
            proxy.active_streams += 1;
            return Some(j);
        }
        metrics.partition_rejections[class][j] += 1;
    }
    None
}

/// The static world of one run: topology, placement, adjacency and the
/// cluster layout it induces, all derived deterministically from the
/// config seed. Shared by the engine, the sweep, and single-shot searches.
#[derive(Debug, Clone)]
pub struct Environment {
    pub topology: Topology,
    pub adjacency: Adjacency,
    pub clusters: Vec<crate::topology::VirtualCluster>,
    pub index: ClusterIndex,
    pub placement: PlacementMap,
    pub chunk_table: Vec<Vec<Chunk>>,
}

impl Environment {
    pub fn build(config: &SimConfig) -> Result<Self> {
        config.validate()?;
        let topology = build_hybrid(&config.topology_config(), config.seed)?;
        let catalog = config.catalog();
        let chunk_table: Vec<Vec<Chunk>> = catalog.iter().map(chunkify).collect::<Result<_>>()?;

        let mut placement_rng = config.rng_stream(STREAM_PLACEMENT);
        let placement =
            place_initial(&catalog, &topology, config.share_fraction, &mut placement_rng)?;

        let mut adjacency_rng = config.rng_stream(STREAM_ADJACENCY);
        let adjacency = Adjacency::sample(&topology, config.adjacency_size, &mut adjacency_rng)?;

        let mut clusters = Vec::new();
        for level in 1..topology.top_level() {
            clusters.extend(form_clusters(&topology, &adjacency, level, |id| {
                placement.chunk_count(id)
            })?);
        }
        let index = ClusterIndex::build(&topology, &clusters);

        Ok(Self { topology, adjacency, clusters, index, placement, chunk_table })
    }
}

struct PendingRequest {
    proxy: usize,
    class: usize,
    partition: usize,
    chunk: Chunk,
    release_at: f64,
    outcome: Option<(SearchOutcome, crate::search::SearchStats)>,
}

struct Sim<'c> {
    config: &'c SimConfig,
    env: Environment,
    proxies: Vec<ProxyRuntime>,
    queue: EventQueue,
    pending: Vec<PendingRequest>,
    service_rng: ChaCha8Rng,
    zipf: Zipf<f64>,
    stream_limits: Vec<u32>,
    metrics: MetricsReport,
}

impl<'c> Sim<'c> {
    fn new(config: &'c SimConfig) -> Result<Self> {
        let env = Environment::build(config)?;

        let mut viewer_rng = config.rng_stream(STREAM_VIEWERS);
        let (vmin, vmax) = config.viewers_per_proxy;
        let proxies: Vec<ProxyRuntime> = env
            .topology
            .proxies()
            .map(|node| {
                Ok(ProxyRuntime {
                    id: node.id,
                    plan: ProxyPortPlan::uniform(
                        config.partition_count,
                        config.ports_per_partition,
                        config.classes.len(),
                    )?,
                    cache: ProxyCache::new(config.cache_capacity, config.cache_half_life_s),
                    viewers: viewer_rng.gen_range(vmin..=vmax),
                    active_streams: 0,
                })
            })
            .collect::<Result<_>>()?;

        let policy = AdmissionPolicy::new(config.disk_bandwidth_kbps, config.admission_threshold)?;
        let stream_limits = config
            .classes
            .iter()
            .map(|c| admission_limit(policy, c.playback_rate))
            .collect::<Result<_>>()?;

        let zipf = Zipf::new(config.asset_count as u64, config.popularity_exponent)
            .map_err(|e| Error::config(format!("bad popularity exponent: {e}")))?;

        let mut metrics = MetricsReport::new(config.classes.len(), config.partition_count as usize);
        let bucket_count = (config.sim_time_s / config.throughput_bucket_s).ceil() as usize;
        for p in &proxies {
            metrics.throughput.push(ProxyThroughput {
                proxy: p.id,
                viewers: p.viewers,
                bucket_s: config.throughput_bucket_s,
                delivered_kbit: vec![0.0; bucket_count],
            });
        }

        Ok(Self {
            config,
            env,
            proxies,
            queue: EventQueue::new(config.sim_time_s),
            pending: Vec::new(),
            service_rng: config.rng_stream(STREAM_SERVICE),
            zipf,
            stream_limits,
            metrics,
        })
    }

    fn schedule_arrivals(&mut self) -> Result<()> {
        self.queue.push(self.config.sim_time_s, EventKind::SessionEnd);
        for p in 0..self.proxies.len() {
            let viewers = self.proxies[p].viewers as f64;
            let rates: Vec<f64> =
                self.config.classes.iter().map(|c| c.arrival_rate * viewers).collect();
            let mut rng = self.config.rng_stream(STREAM_ARRIVALS_BASE + p as u64);
            for (t, class) in generate_arrivals(&rates, self.config.sim_time_s, &mut rng)? {
                self.queue.push(t, EventKind::RequestArrival { proxy: p, class });
            }
        }
        Ok(())
    }

    fn pick_chunk(&mut self, class: usize) -> Chunk {
        let asset = self.zipf.sample(&mut self.service_rng) as usize - 1;
        let chunks = &self.env.chunk_table[asset];
        // Class 0 plays from the top; the interactive classes jump to a
        // uniformly random offset.
        let index = if class == 0 { 0 } else { self.service_rng.gen_range(0..chunks.len()) };
        chunks[index]
    }

    fn record_delivery(&mut self, proxy: usize, from: f64, to: f64, rate_kbps: f64) {
        let series = &mut self.metrics.throughput[proxy];
        let bucket = series.bucket_s;
        let to = to.min(self.config.sim_time_s);
        let from = from.max(0.0);
        if from >= to {
            return;
        }
        let mut b = (from / bucket).floor() as usize;
        while (b as f64) * bucket < to && b < series.delivered_kbit.len() {
            let lo = (b as f64 * bucket).max(from);
            let hi = ((b + 1) as f64 * bucket).min(to);
            series.delivered_kbit[b] += rate_kbps * (hi - lo);
            b += 1;
        }
    }

    fn release_port(&mut self, proxy: usize, partition: usize, class: usize) {
        let p = &mut self.proxies[proxy];
        p.plan.release(partition, class).expect("releasing a held port");
        p.active_streams -= 1;
    }

    fn on_arrival(&mut self, now: f64, proxy: usize, class: usize) -> Result<()> {
        self.metrics.arrivals[class] += 1;
        self.metrics.arrival_times.push(now);

        let limit = self.stream_limits[class];
        let admitted = admit_request(
            &mut self.proxies[proxy],
            class,
            limit,
            &mut self.service_rng,
            &mut self.metrics,
        );
        let Some(partition) = admitted else {
            self.metrics.blocked[class] += 1;
            return Ok(());
        };
        self.metrics.admitted[class] += 1;

        let spec = self.config.classes[class];
        let holding = match self.config.holding {
            HoldingModel::Exponential => {
                let exp = Exp::new(1.0 / spec.holding_time)
                    .map_err(|e| Error::config(format!("bad holding time: {e}")))?;
                exp.sample(&mut self.service_rng)
            }
            HoldingModel::Fixed => spec.holding_time,
        };
        let release_at = now + holding;
        let chunk = self.pick_chunk(class);

        if self.proxies[proxy].cache.lookup(chunk.key(), now) {
            self.metrics.cache_hits += 1;
            self.record_delivery(proxy, now, release_at, spec.playback_rate);
            self.queue.push(release_at, EventKind::PortRelease { proxy, partition, class });
            return Ok(());
        }

        self.metrics.cache_miss_searches += 1;
        let query = SearchQuery { target: chunk.key(), origin: self.proxies[proxy].id };
        let window = SessionWindow::new(now, self.config.session_duration_s)?;
        let (outcome, stats) = search_with_stats(
            &self.env.topology,
            &self.env.adjacency,
            &self.env.index,
            &self.env.placement,
            &query,
            &window,
            self.config.probe_latency_s,
        )?;
        let elapsed = stats.elapsed;
        self.pending.push(PendingRequest {
            proxy,
            class,
            partition,
            chunk,
            release_at,
            outcome: Some((outcome, stats)),
        });
        let token = self.pending.len() - 1;
        self.queue.push(now + elapsed, EventKind::SearchComplete { token });
        Ok(())
    }

    fn on_search_complete(&mut self, now: f64, token: usize) -> Result<()> {
        let (outcome, stats) = self.pending[token].outcome.clone().expect("outcome recorded");
        match outcome {
            SearchOutcome::Found { hop_count, .. } => {
                let hist = self
                    .metrics
                    .hop_histogram
                    .entry(self.config.adjacency_size)
                    .or_default();
                *hist.entry(hop_count).or_insert(0) += 1;
                let chunk = self.pending[token].chunk;
                let latency = transfer_time(
                    chunk.size_kbit,
                    &stats.transfer_capacities_kbps,
                    self.config.propagation_delay_s,
                )?;
                self.queue.push(now + latency, EventKind::TransferComplete { token });
            }
            SearchOutcome::NotFound { .. } => {
                self.metrics.failed_searches += 1;
                let req = &self.pending[token];
                let (proxy, partition, class) = (req.proxy, req.partition, req.class);
                self.release_port(proxy, partition, class);
            }
        }
        Ok(())
    }

    fn on_transfer_complete(&mut self, now: f64, token: usize) {
        let req = &self.pending[token];
        let (proxy, partition, class) = (req.proxy, req.partition, req.class);
        let chunk = req.chunk;
        let release_at = req.release_at;
        let (outcome, _) = req.outcome.as_ref().expect("outcome recorded");
        let path = match outcome {
            SearchOutcome::Found { path, .. } => path.clone(),
            SearchOutcome::NotFound { .. } => unreachable!("transfers follow found searches"),
        };

        // The source (last path entry) sends; every earlier head and
        // finally the proxy receive one copy of the chunk.
        for node in path.iter().take(path.len().saturating_sub(1)) {
            let level = self.env.topology.node(*node).level;
            *self.metrics.per_level_volume_kbit.entry(level).or_insert(0.0) += chunk.size_kbit;
        }
        *self
            .metrics
            .per_level_volume_kbit
            .entry(self.env.topology.top_level())
            .or_insert(0.0) += chunk.size_kbit;

        self.proxies[proxy].cache.admit(chunk.key(), now);

        let playback = self.config.classes[class].playback_rate;
        if now < release_at {
            self.record_delivery(proxy, now, release_at, playback);
            self.queue.push(release_at, EventKind::PortRelease { proxy, partition, class });
        } else {
            // Holding time expired mid-transfer; free the port right away.
            self.queue.push(now, EventKind::PortRelease { proxy, partition, class });
        }
    }

    fn run(mut self) -> Result<MetricsReport> {
        let started = Instant::now();
        self.schedule_arrivals()?;
        while let Some(event) = self.queue.pop() {
            match event.kind {
                EventKind::SessionEnd => break,
                EventKind::RequestArrival { proxy, class } => {
                    self.on_arrival(event.time, proxy, class)?
                }
                EventKind::SearchComplete { token } => self.on_search_complete(event.time, token)?,
                EventKind::TransferComplete { token } => self.on_transfer_complete(event.time, token),
                EventKind::PortRelease { proxy, partition, class } => {
                    self.release_port(proxy, partition, class)
                }
            }
        }
        self.metrics.elapsed_wall_s = started.elapsed().as_secs_f64();
        debug_assert_eq!(
            self.metrics.total_admitted() + self.metrics.total_blocked(),
            self.metrics.total_arrivals()
        );
        Ok(self.metrics)
    }
}

/// Runs one simulation to completion and returns its metrics. Identical
/// configs (including the seed) produce identical reports.
pub fn run(config: &SimConfig) -> Result<MetricsReport> {
    Sim::new(config)?.run()
}

/// Hop histogram of one adjacency size in a sweep.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SizeHistogram {
    pub hops: BTreeMap<u32, u64>,
    pub trials: u64,
    pub found: u64,
    pub not_found: u64,
}

impl SizeHistogram {
    pub fn mean(&self) -> Option<f64> {
        if self.found == 0 {
            return None;
        }
        let sum: f64 = self.hops.iter().map(|(h, n)| *h as f64 * *n as f64).sum();
        Some(sum / self.found as f64)
    }

    pub fn variance(&self) -> Option<f64> {
        let mean = self.mean()?;
        let sq: f64 = self
            .hops
            .iter()
            .map(|(h, n)| (*h as f64 - mean).powi(2) * *n as f64)
            .sum();
        Some(sq / self.found as f64)
    }
}

/// Result of an adjacency sweep: one histogram per requested size.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub per_size: BTreeMap<u32, SizeHistogram>,
}

/// For each adjacency size, runs `trials` independent cache-miss searches,
/// each over a freshly sampled adjacency (and the clusters it induces), and
/// accumulates the hop counts of found outcomes.
pub fn sweep_adjacency(config: &SimConfig, sizes: &[u32], trials: u32) -> Result<SweepResult> {
    config.validate()?;
    if trials < 1 {
        return Err(Error::arg("at least one trial is required"));
    }
    for &s in sizes {
        if !(1..=6).contains(&s) {
            return Err(Error::arg(format!("adjacency size {s} outside [1,6]")));
        }
    }

    let Environment { topology, placement, chunk_table, .. } = Environment::build(config)?;
    let proxies: Vec<NodeId> = topology.proxies().map(|n| n.id).collect();
    let zipf = Zipf::new(config.asset_count as u64, config.popularity_exponent)
        .map_err(|e| Error::config(format!("bad popularity exponent: {e}")))?;

    let mut result = SweepResult::default();
    let mut rng = config.rng_stream(STREAM_SWEEP);
    for &size in sizes {
        let entry = result.per_size.entry(size).or_default();
        for _ in 0..trials {
            let adjacency = Adjacency::sample(&topology, size, &mut rng)?;
            let mut clusters = Vec::new();
            for level in 1..topology.top_level() {
                clusters.extend(form_clusters(&topology, &adjacency, level, |id| {
                    placement.chunk_count(id)
                })?);
            }
            let index = ClusterIndex::build(&topology, &clusters);

            let asset = zipf.sample(&mut rng) as usize - 1;
            let chunk_index = rng.gen_range(0..chunk_table[asset].len());
            let origin = proxies[rng.gen_range(0..proxies.len())];
            let query = SearchQuery {
                target: chunk_table[asset][chunk_index].key(),
                origin,
            };
            let window = SessionWindow::new(0.0, config.session_duration_s)?;
            let (outcome, _) = search_with_stats(
                &topology,
                &adjacency,
                &index,
                &placement,
                &query,
                &window,
                config.probe_latency_s,
            )?;
            entry.trials += 1;
            match outcome {
                SearchOutcome::Found { hop_count, .. } => {
                    entry.found += 1;
                    *entry.hops.entry(hop_count).or_insert(0) += 1;
                }
                SearchOutcome::NotFound { .. } => entry.not_found += 1,
            }
        }
    }
    Ok(result)
}
