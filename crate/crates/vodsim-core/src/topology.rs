//! The leveled hybrid delivery architecture.
//!
//! Level 0 holds archive storage, levels 1..top-1 hold peer tiers (level 1
//! also hosts an inert billing node), and the top level holds proxy servers
//! with no links between them. Each peer owns ten link slots: four unicast
//! down-links for pulling content from the level below, three forward
//! up-links toward the level above, and three intra-level links for chunk
//! exchange with same-level peers.
//!
//! A constructed [`Topology`] is immutable. The dynamic per-session link
//! selection lives in a separate [`Adjacency`] overlay so topologies can be
//! shared across concurrent runs while each run re-samples its own
//! adjacency.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Identifier of a node; ids are dense indices into the topology's node
/// table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

/// Role of a node in the architecture.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    ArchiveStorage,
    Peer,
    ProxyServer,
    BillingServer,
    ViewerCluster,
}

/// Orientation of a link slot relative to its owner's level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkKind {
    UnicastDown,
    ForwardUp,
    IntraLevel,
}

/// One of a node's fixed link slots. A slot may be unwired
/// (`endpoint == None`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkSlot {
    pub kind: LinkKind,
    pub endpoint: Option<NodeId>,
    pub capacity_kbps: f64,
}

/// A node with its level and link slots. Peers always carry exactly ten
/// slots (4 down, 3 up, 3 intra); proxies carry down slots toward the peer
/// level below; archive and billing nodes own no slots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: NodeId,
    pub kind: NodeKind,
    pub level: u32,
    pub slots: Vec<LinkSlot>,
}

impl Node {
    /// Wired slots only, with their slot index.
    pub fn wired_slots(&self) -> impl Iterator<Item = (usize, &LinkSlot)> {
        self.slots.iter().enumerate().filter(|(_, s)| s.endpoint.is_some())
    }
}

/// Average link capacities by placement in the hierarchy, with optional
/// uniform jitter. Links touching level 0 get the storage rate, everything
/// else between content nodes gets the intermediate rate; the viewer rate is
/// the proxy-to-viewer figure used by the engine.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkCapacityPolicy {
    pub storage_kbps: f64,
    pub intermediate_kbps: f64,
    pub viewer_kbps: f64,
    pub jitter_kbps: f64,
}

impl Default for LinkCapacityPolicy {
    fn default() -> Self {
        Self { storage_kbps: 800.0, intermediate_kbps: 600.0, viewer_kbps: 400.0, jitter_kbps: 0.0 }
    }
}

impl LinkCapacityPolicy {
    /// Capacity for a link between the given levels; jitter is sampled
    /// uniformly and the result clamped to [400, 800] kbps.
    fn capacity(&self, level_a: u32, level_b: u32, rng: &mut impl Rng) -> f64 {
        let base = if level_a == 0 || level_b == 0 {
            self.storage_kbps
        } else {
            self.intermediate_kbps
        };
        let jittered = if self.jitter_kbps > 0.0 {
            base + rng.gen_range(-self.jitter_kbps..=self.jitter_kbps)
        } else {
            base
        };
        jittered.clamp(400.0, 800.0)
    }
}

/// Construction parameters; the defaults are the reference configuration
/// (15 levels, 4 peers per level, 4 proxies, one archive server).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TopologyConfig {
    pub levels: u32,
    pub peers_per_level: u32,
    pub proxy_count: u32,
    pub archive_count: u32,
    pub capacity: LinkCapacityPolicy,
}

impl Default for TopologyConfig {
    fn default() -> Self {
        Self {
            levels: 15,
            peers_per_level: 4,
            proxy_count: 4,
            archive_count: 1,
            capacity: LinkCapacityPolicy::default(),
        }
    }
}

/// The immutable leveled graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Topology {
    levels: u32,
    nodes: Vec<Node>,
}

/// A logical group of same-level peers with a designated head. Clusters at
/// a level partition that level's peers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VirtualCluster {
    pub level: u32,
    pub head: NodeId,
    pub members: Vec<NodeId>,
}

const PEER_DOWN_SLOTS: usize = 4;
const PEER_UP_SLOTS: usize = 3;
const PEER_INTRA_SLOTS: usize = 3;
pub const PEER_SLOT_COUNT: usize = PEER_DOWN_SLOTS + PEER_UP_SLOTS + PEER_INTRA_SLOTS;

/// Builds the hybrid architecture. Requires at least 3 levels (archive,
/// one peer tier, proxies) and at least one peer per level.
pub fn build_hybrid(config: &TopologyConfig, seed: u64) -> Result<Topology> {
    if config.levels < 3 {
        return Err(Error::config(format!(
            "a hybrid topology needs at least 3 levels, got {}",
            config.levels
        )));
    }
    if config.peers_per_level < 1 {
        return Err(Error::config("at least one peer per level is required"));
    }
    if config.proxy_count < 1 {
        return Err(Error::config("at least one proxy is required"));
    }
    if config.archive_count < 1 {
        return Err(Error::config("at least one archive server is required"));
    }

    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);

    let top = config.levels - 1;
    let mut nodes: Vec<Node> = Vec::new();
    let mut by_level: BTreeMap<u32, Vec<NodeId>> = BTreeMap::new();

    let push = |nodes: &mut Vec<Node>, by_level: &mut BTreeMap<u32, Vec<NodeId>>, kind, level| {
        let id = NodeId(nodes.len() as u32);
        nodes.push(Node { id, kind, level, slots: Vec::new() });
        by_level.entry(level).or_default().push(id);
        id
    };

    for _ in 0..config.archive_count {
        push(&mut nodes, &mut by_level, NodeKind::ArchiveStorage, 0);
    }
    for level in 1..top {
        for _ in 0..config.peers_per_level {
            push(&mut nodes, &mut by_level, NodeKind::Peer, level);
        }
        if level == 1 {
            push(&mut nodes, &mut by_level, NodeKind::BillingServer, 1);
        }
    }
    for _ in 0..config.proxy_count {
        push(&mut nodes, &mut by_level, NodeKind::ProxyServer, top);
    }

    // Link candidates exclude inert billing nodes.
    let linkable = |nodes: &[Node], ids: &[NodeId], kind_ok: fn(NodeKind) -> bool| -> Vec<NodeId> {
        ids.iter().copied().filter(|id| kind_ok(nodes[id.index()].kind)).collect()
    };
    let is_content_source = |k: NodeKind| matches!(k, NodeKind::Peer | NodeKind::ArchiveStorage);
    let is_upstream = |k: NodeKind| matches!(k, NodeKind::Peer | NodeKind::ProxyServer);
    let is_peer = |k: NodeKind| matches!(k, NodeKind::Peer);

    // Samples `want` distinct targets, returned in ascending id order so
    // slot layout is stable.
    fn sample_targets(
        candidates: &[NodeId],
        want: usize,
        rng: &mut rand_chacha::ChaCha8Rng,
    ) -> Vec<NodeId> {
        let mut chosen: Vec<NodeId> =
            candidates.choose_multiple(rng, want.min(candidates.len())).copied().collect();
        chosen.sort_unstable();
        chosen
    }

    for idx in 0..nodes.len() {
        let (id, kind, level) = (nodes[idx].id, nodes[idx].kind, nodes[idx].level);
        let mut slots = Vec::new();
        match kind {
            NodeKind::Peer => {
                let below = linkable(&nodes, &by_level[&(level - 1)], is_content_source);
                let above = linkable(&nodes, &by_level[&(level + 1)], is_upstream);
                let same: Vec<NodeId> = linkable(&nodes, &by_level[&level], is_peer)
                    .into_iter()
                    .filter(|other| *other != id)
                    .collect();

                // Unwired slots carry no capacity; only wired ones draw
                // from the policy (keeps the RNG trace and exports stable).
                let down = sample_targets(&below, PEER_DOWN_SLOTS, &mut rng);
                for i in 0..PEER_DOWN_SLOTS {
                    let endpoint = down.get(i).copied();
                    let cap = endpoint
                        .map(|_| config.capacity.capacity(level, level - 1, &mut rng))
                        .unwrap_or(0.0);
                    slots.push(LinkSlot { kind: LinkKind::UnicastDown, endpoint, capacity_kbps: cap });
                }
                let up = sample_targets(&above, PEER_UP_SLOTS, &mut rng);
                for i in 0..PEER_UP_SLOTS {
                    let endpoint = up.get(i).copied();
                    let cap = endpoint
                        .map(|_| config.capacity.capacity(level, level + 1, &mut rng))
                        .unwrap_or(0.0);
                    slots.push(LinkSlot { kind: LinkKind::ForwardUp, endpoint, capacity_kbps: cap });
                }
                let intra = sample_targets(&same, PEER_INTRA_SLOTS, &mut rng);
                for i in 0..PEER_INTRA_SLOTS {
                    let endpoint = intra.get(i).copied();
                    let cap = endpoint
                        .map(|_| config.capacity.capacity(level, level, &mut rng))
                        .unwrap_or(0.0);
                    slots.push(LinkSlot { kind: LinkKind::IntraLevel, endpoint, capacity_kbps: cap });
                }
            }
            NodeKind::ProxyServer => {
                // Proxies reach down into the adjacent peer tier; never to
                // other proxies.
                let below = linkable(&nodes, &by_level[&(level - 1)], is_peer);
                let down = sample_targets(&below, PEER_DOWN_SLOTS, &mut rng);
                for endpoint in down {
                    let cap = config.capacity.capacity(level, level - 1, &mut rng);
                    slots.push(LinkSlot {
                        kind: LinkKind::UnicastDown,
                        endpoint: Some(endpoint),
                        capacity_kbps: cap,
                    });
                }
            }
            NodeKind::ArchiveStorage | NodeKind::BillingServer | NodeKind::ViewerCluster => {}
        }
        nodes[idx].slots = slots;
    }

    Ok(Topology { levels: config.levels, nodes })
}

impl Topology {
    pub fn levels(&self) -> u32 {
        self.levels
    }

    /// The proxy level.
    pub fn top_level(&self) -> u32 {
        self.levels - 1
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.index()]
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Total wired link slots across all nodes.
    pub fn link_count(&self) -> usize {
        self.nodes.iter().map(|n| n.wired_slots().count()).sum()
    }

    pub fn nodes_at_level(&self, level: u32) -> impl Iterator<Item = &Node> {
        self.nodes.iter().filter(move |n| n.level == level)
    }

    pub fn peers_at_level(&self, level: u32) -> impl Iterator<Item = &Node> {
        self.nodes_at_level(level).filter(|n| n.kind == NodeKind::Peer)
    }

    pub fn proxies(&self) -> impl Iterator<Item = &Node> {
        self.nodes.iter().filter(|n| n.kind == NodeKind::ProxyServer)
    }

    pub fn archives(&self) -> impl Iterator<Item = &Node> {
        self.nodes.iter().filter(|n| n.kind == NodeKind::ArchiveStorage)
    }

    /// Undirected view of one wired slot: does either endpoint own an
    /// intra-level link to the other?
    pub fn intra_linked(&self, a: NodeId, b: NodeId) -> bool {
        let has = |from: NodeId, to: NodeId| {
            self.node(from)
                .slots
                .iter()
                .any(|s| s.kind == LinkKind::IntraLevel && s.endpoint == Some(to))
        };
        has(a, b) || has(b, a)
    }
}

/// Per-session active-link selection, kept outside [`Topology`] so the
/// graph itself can be shared immutably between concurrent runs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Adjacency {
    active: Vec<Vec<bool>>,
}

impl Adjacency {
    /// Every wired slot active.
    pub fn full(topology: &Topology) -> Self {
        let active = topology
            .nodes
            .iter()
            .map(|n| n.slots.iter().map(|s| s.endpoint.is_some()).collect())
            .collect();
        Self { active }
    }

    /// Fresh adjacency with `size` active slots per peer (uniform without
    /// replacement among that peer's wired slots). Proxies gate their down
    /// slots the same way, so a session's seed clusters also depend on the
    /// adjacency size; other nodes keep all wired slots active.
    pub fn sample(topology: &Topology, size: u32, rng: &mut impl Rng) -> Result<Self> {
        if !(1..=6).contains(&size) {
            return Err(Error::arg(format!("adjacency size must lie in [1,6], got {size}")));
        }
        let mut adjacency = Self::full(topology);
        for node in topology.nodes() {
            let chosen = match node.kind {
                NodeKind::Peer => select_adjacency(topology, node.id, size, rng)?,
                NodeKind::ProxyServer => {
                    let wired: Vec<usize> = node.wired_slots().map(|(i, _)| i).collect();
                    let mut chosen: Vec<usize> = wired
                        .choose_multiple(rng, (size as usize).min(wired.len()))
                        .copied()
                        .collect();
                    chosen.sort_unstable();
                    chosen
                }
                _ => continue,
            };
            let flags = &mut adjacency.active[node.id.index()];
            flags.iter_mut().for_each(|f| *f = false);
            for slot in chosen {
                flags[slot] = true;
            }
        }
        Ok(adjacency)
    }

    pub fn is_active(&self, node: NodeId, slot: usize) -> bool {
        self.active[node.index()][slot]
    }

    /// Active wired slots of a node.
    pub fn active_slots<'t>(
        &'t self,
        topology: &'t Topology,
        node: NodeId,
    ) -> impl Iterator<Item = (usize, &'t LinkSlot)> + 't {
        topology
            .node(node)
            .slots
            .iter()
            .enumerate()
            .filter(move |(i, s)| s.endpoint.is_some() && self.is_active(node, *i))
    }
}

/// Picks a peer's active link subset for one session: `size` slots in
/// [1, 6], sampled uniformly without replacement from the peer's wired
/// slots. Peers near the edges of the hierarchy may have fewer wired slots
/// than requested; all of them are activated in that case.
pub fn select_adjacency(
    topology: &Topology,
    node: NodeId,
    size: u32,
    rng: &mut impl Rng,
) -> Result<Vec<usize>> {
    if !(1..=6).contains(&size) {
        return Err(Error::arg(format!("adjacency size must lie in [1,6], got {size}")));
    }
    let n = topology.node(node);
    if n.kind != NodeKind::Peer {
        return Err(Error::arg(format!("{node} is not a peer")));
    }
    let wired: Vec<usize> = n.wired_slots().map(|(i, _)| i).collect();
    let mut chosen: Vec<usize> =
        wired.choose_multiple(rng, (size as usize).min(wired.len())).copied().collect();
    chosen.sort_unstable();
    Ok(chosen)
}

/// Groups a level's peers into virtual clusters: connected components of
/// the active intra-level link graph. The head is the member holding the
/// most locally placed chunks (`chunk_counts`), ties broken by lowest id.
pub fn form_clusters<F>(
    topology: &Topology,
    adjacency: &Adjacency,
    level: u32,
    chunk_counts: F,
) -> Result<Vec<VirtualCluster>>
where
    F: Fn(NodeId) -> usize,
{
    let peers: Vec<NodeId> = topology.peers_at_level(level).map(|n| n.id).collect();
    if peers.is_empty() {
        return Err(Error::arg(format!("level {level} hosts no peers")));
    }

    // Undirected intra-level edges restricted to active slots.
    let mut neighbors: BTreeMap<NodeId, BTreeSet<NodeId>> =
        peers.iter().map(|p| (*p, BTreeSet::new())).collect();
    for &p in &peers {
        for (_, slot) in adjacency.active_slots(topology, p) {
            if slot.kind == LinkKind::IntraLevel {
                if let Some(q) = slot.endpoint {
                    neighbors.get_mut(&p).unwrap().insert(q);
                    neighbors.get_mut(&q).unwrap().insert(p);
                }
            }
        }
    }

    let mut seen: BTreeSet<NodeId> = BTreeSet::new();
    let mut clusters = Vec::new();
    for &start in &peers {
        if seen.contains(&start) {
            continue;
        }
        let mut members = Vec::new();
        let mut queue = VecDeque::from([start]);
        seen.insert(start);
        while let Some(p) = queue.pop_front() {
            members.push(p);
            for &q in &neighbors[&p] {
                if seen.insert(q) {
                    queue.push_back(q);
                }
            }
        }
        members.sort_unstable();
        let head = *members
            .iter()
            .max_by(|a, b| {
                chunk_counts(**a).cmp(&chunk_counts(**b)).then(b.cmp(a)) // ties: lowest id
            })
            .expect("cluster has at least one member");
        clusters.push(VirtualCluster { level, head, members });
    }
    clusters.sort_by_key(|c| c.members[0]);
    Ok(clusters)
}

// ---------------------------------------------------------------------------
// Export / import
// ---------------------------------------------------------------------------

/// Export formats for a constructed topology.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Dot,
    Json,
}

impl std::str::FromStr for ExportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dot" => Ok(ExportFormat::Dot),
            "json" => Ok(ExportFormat::Json),
            other => Err(Error::arg(format!("unknown export format '{other}'"))),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct TopologyJson {
    levels: u32,
    nodes: Vec<NodeRecord>,
    links: Vec<LinkRecord>,
    clusters: Vec<ClusterRecord>,
}

#[derive(Serialize, Deserialize)]
struct NodeRecord {
    id: u32,
    kind: NodeKind,
    level: u32,
}

#[derive(Serialize, Deserialize)]
struct LinkRecord {
    from: u32,
    to: u32,
    kind: LinkKind,
    kbps: f64,
}

#[derive(Serialize, Deserialize)]
struct ClusterRecord {
    level: u32,
    head: u32,
    members: Vec<u32>,
}

/// Serializes the topology (and optional cluster layout) to DOT or to the
/// round-trippable JSON schema
/// `{levels, nodes:[{id,kind,level}], links:[{from,to,kind,kbps}], clusters:[...]}`.
pub fn export_topology(
    topology: &Topology,
    clusters: &[VirtualCluster],
    format: ExportFormat,
) -> Result<String> {
    match format {
        ExportFormat::Json => {
            let doc = TopologyJson {
                levels: topology.levels,
                nodes: topology
                    .nodes
                    .iter()
                    .map(|n| NodeRecord { id: n.id.0, kind: n.kind, level: n.level })
                    .collect(),
                links: topology
                    .nodes
                    .iter()
                    .flat_map(|n| {
                        n.wired_slots().map(move |(_, s)| LinkRecord {
                            from: n.id.0,
                            to: s.endpoint.unwrap().0,
                            kind: s.kind,
                            kbps: s.capacity_kbps,
                        })
                    })
                    .collect(),
                clusters: clusters
                    .iter()
                    .map(|c| ClusterRecord {
                        level: c.level,
                        head: c.head.0,
                        members: c.members.iter().map(|m| m.0).collect(),
                    })
                    .collect(),
            };
            serde_json::to_string_pretty(&doc)
                .map_err(|e| Error::arg(format!("json encoding failed: {e}")))
        }
        ExportFormat::Dot => {
            let mut out = String::from("digraph vodsim {\n");
            for n in &topology.nodes {
                out.push_str(&format!(
                    "  n{} [label=\"{:?}/L{}\"];\n",
                    n.id.0, n.kind, n.level
                ));
            }
            for n in &topology.nodes {
                for (_, s) in n.wired_slots() {
                    out.push_str(&format!(
                        "  n{} -> n{} [label=\"{} kbps\"];\n",
                        n.id.0,
                        s.endpoint.unwrap().0,
                        s.capacity_kbps
                    ));
                }
            }
            out.push_str("}\n");
            Ok(out)
        }
    }
}

/// Rebuilds a topology from its JSON export. Slot layout is normalized to
/// the canonical composition (peers: 4 down + 3 up + 3 intra, wired slots
/// first within each group), which matches what [`build_hybrid`] produces.
pub fn import_topology_json(text: &str) -> Result<Topology> {
    let doc: TopologyJson =
        serde_json::from_str(text).map_err(|e| Error::arg(format!("malformed topology json: {e}")))?;

    let mut records = doc.nodes;
    records.sort_by_key(|r| r.id);
    for (i, r) in records.iter().enumerate() {
        if r.id as usize != i {
            return Err(Error::InvalidTopology(format!(
                "node ids must be dense indices; missing id {i}"
            )));
        }
    }

    let mut nodes: Vec<Node> = records
        .iter()
        .map(|r| Node { id: NodeId(r.id), kind: r.kind, level: r.level, slots: Vec::new() })
        .collect();

    let mut owned: BTreeMap<u32, Vec<LinkRecord>> = BTreeMap::new();
    for link in doc.links {
        if link.from as usize >= nodes.len() || link.to as usize >= nodes.len() {
            return Err(Error::InvalidTopology(format!(
                "link {} -> {} references an unknown node",
                link.from, link.to
            )));
        }
        owned.entry(link.from).or_default().push(link);
    }

    for node in nodes.iter_mut() {
        let links = owned.remove(&node.id.0).unwrap_or_default();
        let mut groups: BTreeMap<&str, Vec<&LinkRecord>> = BTreeMap::new();
        for l in &links {
            let key = match l.kind {
                LinkKind::UnicastDown => "down",
                LinkKind::ForwardUp => "up",
                LinkKind::IntraLevel => "intra",
            };
            groups.entry(key).or_default().push(l);
        }
        let take = |groups: &BTreeMap<&str, Vec<&LinkRecord>>,
                    key: &str,
                    kind: LinkKind,
                    width: Option<usize>|
         -> Result<Vec<LinkSlot>> {
            let list = groups.get(key).map(|v| v.as_slice()).unwrap_or(&[]);
            if let Some(w) = width {
                if list.len() > w {
                    return Err(Error::InvalidTopology(format!(
                        "node has {} {key} links but only {w} slots",
                        list.len()
                    )));
                }
            }
            let width = width.unwrap_or(list.len());
            let mut slots = Vec::with_capacity(width);
            for i in 0..width {
                slots.push(match list.get(i) {
                    Some(l) => LinkSlot {
                        kind,
                        endpoint: Some(NodeId(l.to)),
                        capacity_kbps: l.kbps,
                    },
                    None => LinkSlot { kind, endpoint: None, capacity_kbps: 0.0 },
                });
            }
            Ok(slots)
        };
        node.slots = match node.kind {
            NodeKind::Peer => {
                let mut slots = take(&groups, "down", LinkKind::UnicastDown, Some(PEER_DOWN_SLOTS))?;
                slots.extend(take(&groups, "up", LinkKind::ForwardUp, Some(PEER_UP_SLOTS))?);
                slots.extend(take(&groups, "intra", LinkKind::IntraLevel, Some(PEER_INTRA_SLOTS))?);
                // Unwired pad slots keep the build-time capacity convention.
                slots
            }
            NodeKind::ProxyServer => take(&groups, "down", LinkKind::UnicastDown, None)?,
            _ => {
                if !links.is_empty() {
                    return Err(Error::InvalidTopology(format!(
                        "{:?} nodes own no link slots",
                        node.kind
                    )));
                }
                Vec::new()
            }
        };
    }

    Ok(Topology { levels: doc.levels, nodes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn default_topology(seed: u64) -> Topology {
        build_hybrid(&TopologyConfig::default(), seed).unwrap()
    }

    #[test]
    fn default_build_counts() {
        let topo = default_topology(7);
        // 1 archive + 13 levels x 4 peers + 1 billing + 4 proxies.
        assert_eq!(topo.node_count(), 58);
        assert_eq!(topo.archives().count(), 1);
        assert_eq!(topo.proxies().count(), 4);
        assert_eq!(topo.nodes().iter().filter(|n| n.kind == NodeKind::Peer).count(), 52);
        assert_eq!(topo.nodes().iter().filter(|n| n.kind == NodeKind::BillingServer).count(), 1);
        assert_eq!(topo.top_level(), 14);
    }

    #[test]
    fn minimal_chain_topology() {
        let config = TopologyConfig {
            levels: 3,
            peers_per_level: 1,
            proxy_count: 1,
            ..TopologyConfig::default()
        };
        let topo = build_hybrid(&config, 1).unwrap();
        assert_eq!(topo.node_count(), 4); // archive, peer, billing, proxy
        let peer = topo.peers_at_level(1).next().unwrap();
        let down: Vec<_> = peer
            .wired_slots()
            .filter(|(_, s)| s.kind == LinkKind::UnicastDown)
            .collect();
        assert_eq!(down.len(), 1);
        assert_eq!(topo.node(down[0].1.endpoint.unwrap()).kind, NodeKind::ArchiveStorage);
    }

    #[test]
    fn too_few_levels_rejected() {
        let config = TopologyConfig { levels: 2, ..TopologyConfig::default() };
        assert!(matches!(build_hybrid(&config, 1), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn capacities_stay_in_band() {
        let mut config = TopologyConfig::default();
        config.capacity.jitter_kbps = 150.0;
        let topo = build_hybrid(&config, 42).unwrap();
        for node in topo.nodes() {
            for (_, slot) in node.wired_slots() {
                assert!((400.0..=800.0).contains(&slot.capacity_kbps));
            }
        }
    }

    #[test]
    fn slot_orientation_invariants() {
        let topo = default_topology(99);
        for node in topo.nodes() {
            if node.kind == NodeKind::Peer {
                assert_eq!(node.slots.len(), PEER_SLOT_COUNT);
            }
            for (_, slot) in node.wired_slots() {
                let other = topo.node(slot.endpoint.unwrap());
                match slot.kind {
                    LinkKind::UnicastDown => assert_eq!(other.level + 1, node.level),
                    LinkKind::ForwardUp => assert_eq!(other.level, node.level + 1),
                    LinkKind::IntraLevel => assert_eq!(other.level, node.level),
                }
            }
        }
    }

    #[test]
    fn proxies_never_interlink() {
        let topo = default_topology(3);
        for proxy in topo.proxies() {
            for (_, slot) in proxy.wired_slots() {
                assert_ne!(topo.node(slot.endpoint.unwrap()).kind, NodeKind::ProxyServer);
            }
        }
    }

    #[test]
    fn construction_is_deterministic() {
        let a = default_topology(12345);
        let b = default_topology(12345);
        assert_eq!(a, b);
        let c = default_topology(54321);
        assert_ne!(a, c);
    }

    #[test]
    fn adjacency_selection_basics() {
        let topo = default_topology(5);
        let peer = topo.peers_at_level(7).next().unwrap().id;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let one = select_adjacency(&topo, peer, 1, &mut rng).unwrap();
        assert_eq!(one.len(), 1);

        let mut r1 = ChaCha8Rng::seed_from_u64(77);
        let mut r2 = ChaCha8Rng::seed_from_u64(77);
        let a = select_adjacency(&topo, peer, 6, &mut r1).unwrap();
        let b = select_adjacency(&topo, peer, 6, &mut r2).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 6);

        assert!(select_adjacency(&topo, peer, 0, &mut rng).is_err());
        assert!(select_adjacency(&topo, peer, 7, &mut rng).is_err());
        let proxy = topo.proxies().next().unwrap().id;
        assert!(select_adjacency(&topo, proxy, 1, &mut rng).is_err());
    }

    #[test]
    fn adjacency_selection_is_uniform() {
        let topo = default_topology(5);
        // An interior peer has all ten slots wired.
        let peer = topo
            .peers_at_level(7)
            .find(|n| n.wired_slots().count() == PEER_SLOT_COUNT)
            .unwrap()
            .id;
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let draws = 10_000;
        let mut counts = [0u32; PEER_SLOT_COUNT];
        for _ in 0..draws {
            let chosen = select_adjacency(&topo, peer, 1, &mut rng).unwrap();
            counts[chosen[0]] += 1;
        }
        // Binomial(10000, 1/10): sigma ~ 30.
        let expected = draws as f64 / PEER_SLOT_COUNT as f64;
        let sigma = (expected * (1.0 - 1.0 / PEER_SLOT_COUNT as f64)).sqrt();
        for (slot, &count) in counts.iter().enumerate() {
            assert!(
                (count as f64 - expected).abs() < 3.0 * sigma,
                "slot {slot}: {count} draws vs expected {expected}"
            );
        }
    }

    #[test]
    fn fully_interconnected_level_forms_one_cluster() {
        let topo = default_topology(8);
        let adjacency = Adjacency::full(&topo);
        let clusters = form_clusters(&topo, &adjacency, 7, |_| 0).unwrap();
        // 4 peers with 3 intra slots each: everyone can reach everyone.
        assert_eq!(clusters.len(), 1);
        assert_eq!(clusters[0].members.len(), 4);
        // Equal chunk counts: the head is the lowest id.
        assert_eq!(clusters[0].head, clusters[0].members[0]);
    }

    #[test]
    fn inactive_intra_links_give_singletons() {
        let topo = default_topology(8);
        let mut adjacency = Adjacency::full(&topo);
        // Deactivate every intra-level slot.
        for node in topo.nodes() {
            for (i, slot) in node.slots.iter().enumerate() {
                if slot.kind == LinkKind::IntraLevel {
                    adjacency.active[node.id.index()][i] = false;
                }
            }
        }
        let clusters = form_clusters(&topo, &adjacency, 7, |_| 0).unwrap();
        assert_eq!(clusters.len(), 4);
        for c in &clusters {
            assert_eq!(c.members.len(), 1);
            assert_eq!(c.head, c.members[0]);
        }
    }

    #[test]
    fn cluster_head_prefers_most_chunks() {
        let topo = default_topology(8);
        let adjacency = Adjacency::full(&topo);
        let peers: Vec<NodeId> = topo.peers_at_level(7).map(|n| n.id).collect();
        let favored = peers[2];
        let clusters =
            form_clusters(&topo, &adjacency, 7, |id| if id == favored { 10 } else { 1 }).unwrap();
        assert_eq!(clusters[0].head, favored);
    }

    #[test]
    fn clusters_partition_the_level() {
        let topo = default_topology(21);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let adjacency = Adjacency::sample(&topo, 2, &mut rng).unwrap();
        let clusters = form_clusters(&topo, &adjacency, 3, |_| 0).unwrap();
        let mut all: Vec<NodeId> = clusters.iter().flat_map(|c| c.members.clone()).collect();
        all.sort_unstable();
        let mut expected: Vec<NodeId> = topo.peers_at_level(3).map(|n| n.id).collect();
        expected.sort_unstable();
        assert_eq!(all, expected);
        for c in &clusters {
            assert!(c.members.contains(&c.head));
        }
    }

    #[test]
    fn clusters_rejected_on_peerless_level() {
        let topo = default_topology(8);
        let adjacency = Adjacency::full(&topo);
        assert!(form_clusters(&topo, &adjacency, 0, |_| 0).is_err());
        assert!(form_clusters(&topo, &adjacency, topo.top_level(), |_| 0).is_err());
    }

    #[test]
    fn json_round_trip_preserves_structure() {
        let topo = default_topology(17);
        let adjacency = Adjacency::full(&topo);
        let clusters = form_clusters(&topo, &adjacency, 1, |_| 0).unwrap();
        let text = export_topology(&topo, &clusters, ExportFormat::Json).unwrap();
        let back = import_topology_json(&text).unwrap();
        assert_eq!(topo, back);
    }

    #[test]
    fn json_export_has_one_record_per_node() {
        let topo = default_topology(17);
        let text = export_topology(&topo, &[], ExportFormat::Json).unwrap();
        let doc: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(doc["nodes"].as_array().unwrap().len(), 58);
        assert_eq!(doc["links"].as_array().unwrap().len(), topo.link_count());
    }

    #[test]
    fn dot_export_has_one_edge_per_link() {
        let topo = default_topology(17);
        let text = export_topology(&topo, &[], ExportFormat::Dot).unwrap();
        let edges = text.lines().filter(|l| l.contains("->")).count();
        assert_eq!(edges, topo.link_count());
    }

    #[test]
    fn unknown_export_format_rejected() {
        assert!("yaml".parse::<ExportFormat>().is_err());
        assert!("dot".parse::<ExportFormat>().is_ok());
    }
}
