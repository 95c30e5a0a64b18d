//! Static road network and the lazily cached shortest-travel-time oracle.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};
use std::io::{Read, Write};
use std::path::Path;
use std::sync::{Arc, RwLock};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::geo::{DistanceMetric, Point, SpatialGrid};
use crate::time::Seconds;

/// External road-node identifier as it appears in input files.
pub type NodeId = u64;

/// Dense index into [`RoadGraph`] node arrays. Indices follow ascending
/// [`NodeId`] order, so "smallest index" and "smallest id" agree.
pub type NodeIx = u32;

pub const UNREACHABLE: u32 = u32::MAX;

#[derive(Clone, Debug)]
pub struct RoadGraph {
    metric: DistanceMetric,
    ids: Vec<NodeId>,
    points: Vec<Point>,
    index: HashMap<NodeId, NodeIx>,
    fwd: Csr,
    bwd: Csr,
    arc_count: usize,
}

#[derive(Clone, Debug, Default)]
struct Csr {
    offsets: Vec<u32>,
    heads: Vec<NodeIx>,
    times: Vec<u32>,
}

impl Csr {
    fn build(n: usize, arcs: &[(NodeIx, NodeIx, u32)], reverse: bool) -> Self {
        let mut tagged: Vec<(NodeIx, NodeIx, u32)> = arcs.iter().map(|&(a, b, t)| if reverse { (b, a, t) } else { (a, b, t) }).collect();
        tagged.sort_unstable();
        let mut offsets = vec![0u32; n + 1];
        for &(a, _, _) in &tagged {
            offsets[a as usize + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        Csr { offsets, heads: tagged.iter().map(|a| a.1).collect(), times: tagged.iter().map(|a| a.2).collect() }
    }

    fn star(&self, v: NodeIx) -> impl Iterator<Item = (NodeIx, u32)> + '_ {
        let (a, b) = (self.offsets[v as usize] as usize, self.offsets[v as usize + 1] as usize);
        self.heads[a..b].iter().copied().zip(self.times[a..b].iter().copied())
    }
}

#[derive(Deserialize)]
struct NodeRow {
    id: NodeId,
    x: f64,
    y: f64,
}

#[derive(Deserialize)]
struct LinkRow {
    from: NodeId,
    to: NodeId,
    travel_time_seconds: f64,
}

pub(crate) fn csv_reader<R: Read>(r: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(r)
}

/// Deserializes each data row of a headed table, passing its 1-based line number.
pub(crate) fn for_each_row<T: serde::de::DeserializeOwned>(
    file: &str,
    r: impl Read,
    mut each: impl FnMut(u64, T) -> Result<()>,
) -> Result<()> {
    let mut rdr = csv_reader(r);
    let headers = rdr.headers().map_err(|e| Error::from_csv(file, e))?.clone();
    let mut rec = csv::StringRecord::new();
    loop {
        match rdr.read_record(&mut rec) {
            Ok(false) => return Ok(()),
            Ok(true) => {}
            Err(e) => return Err(Error::from_csv(file, e)),
        }
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let row: T = rec.deserialize(Some(&headers)).map_err(|e| Error::parse(file, line, e.to_string()))?;
        each(line, row)?;
    }
}

impl RoadGraph {
    /// Builds a graph from `(id, point)` nodes and `(from, to, seconds)` arcs.
    pub fn new(
        metric: DistanceMetric,
        nodes: impl IntoIterator<Item = (NodeId, Point)>,
        arcs: impl IntoIterator<Item = (NodeId, NodeId, u32)>,
    ) -> Result<Self> {
        let mut nodes: Vec<(NodeId, Point)> = nodes.into_iter().collect();
        nodes.sort_by_key(|n| n.0);
        if let Some(w) = nodes.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::Config(format!("duplicate road node id {}", w[0].0)));
        }
        let index: HashMap<NodeId, NodeIx> = nodes.iter().enumerate().map(|(i, n)| (n.0, i as NodeIx)).collect();
        let mut dense = Vec::new();
        for (a, b, t) in arcs {
            let ia = *index.get(&a).ok_or(Error::UnknownNode(a))?;
            let ib = *index.get(&b).ok_or(Error::UnknownNode(b))?;
            dense.push((ia, ib, t));
        }
        Ok(RoadGraph {
            metric,
            fwd: Csr::build(nodes.len(), &dense, false),
            bwd: Csr::build(nodes.len(), &dense, true),
            arc_count: dense.len(),
            ids: nodes.iter().map(|n| n.0).collect(),
            points: nodes.iter().map(|n| n.1).collect(),
            index,
        })
    }

    /// Reads node (`id,x,y`) and link (`from,to,travel_time_seconds`) tables.
    pub fn from_readers(metric: DistanceMetric, nodes: impl Read, links: impl Read) -> Result<Self> {
        Self::from_named_readers(metric, ("nodes", nodes), ("links", links))
    }

    pub fn load(metric: DistanceMetric, nodes: &Path, links: &Path) -> Result<Self> {
        let open = |p: &Path| std::fs::File::open(p).map_err(|e| Error::io(p, e));
        Self::from_named_readers(metric, (&nodes.display().to_string(), open(nodes)?), (&links.display().to_string(), open(links)?))
    }

    fn from_named_readers(metric: DistanceMetric, nodes: (&str, impl Read), links: (&str, impl Read)) -> Result<Self> {
        let node_rows = read_nodes(nodes.0, nodes.1)?;
        let mut seen = HashMap::new();
        for (row, (id, _)) in &node_rows {
            if let Some(prev) = seen.insert(*id, *row) {
                return Err(Error::parse(nodes.0, *row, format!("duplicate node id {id} (first at row {prev})")));
            }
        }
        let arcs = read_links(links.0, links.1)?;
        for (row, (a, b, _)) in &arcs {
            for id in [a, b] {
                if !seen.contains_key(id) {
                    return Err(Error::parse(links.0, *row, format!("unknown node id {id}")));
                }
            }
        }
        Self::new(metric, node_rows.into_iter().map(|(_, n)| n), arcs.into_iter().map(|(_, a)| a))
    }

    pub fn metric(&self) -> DistanceMetric {
        self.metric
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn arc_count(&self) -> usize {
        self.arc_count
    }

    pub fn index_of(&self, id: NodeId) -> Option<NodeIx> {
        self.index.get(&id).copied()
    }

    pub fn require(&self, id: NodeId) -> Result<NodeIx> {
        self.index_of(id).ok_or(Error::UnknownNode(id))
    }

    pub fn id(&self, ix: NodeIx) -> NodeId {
        self.ids[ix as usize]
    }

    pub fn point(&self, ix: NodeIx) -> Point {
        self.points[ix as usize]
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    /// Degree (in plus out) of every node.
    pub fn degree(&self, ix: NodeIx) -> usize {
        self.fwd.star(ix).count() + self.bwd.star(ix).count()
    }

    pub fn out_arcs(&self, ix: NodeIx) -> impl Iterator<Item = (NodeIx, u32)> + '_ {
        self.fwd.star(ix)
    }

    pub fn in_arcs(&self, ix: NodeIx) -> impl Iterator<Item = (NodeIx, u32)> + '_ {
        self.bwd.star(ix)
    }

    pub fn arcs(&self) -> impl Iterator<Item = (NodeIx, NodeIx, u32)> + '_ {
        (0..self.len() as NodeIx).flat_map(move |a| self.fwd.star(a).map(move |(b, t)| (a, b, t)))
    }

    pub fn spatial_index(&self) -> SpatialGrid {
        SpatialGrid::new(self.metric, &self.points, None)
    }

    /// Order-sensitive FNV-1a digest of the metric, nodes and arcs. A transit
    /// graph records this to detect use with a different road network.
    pub fn fingerprint(&self) -> u64 {
        let mut h = Fnv::default();
        h.write(&[self.metric as u8]);
        for (id, p) in self.ids.iter().zip(&self.points) {
            h.write(&id.to_le_bytes());
            h.write(&p.x.to_bits().to_le_bytes());
            h.write(&p.y.to_bits().to_le_bytes());
        }
        for (a, b, t) in self.arcs() {
            h.write(&a.to_le_bytes());
            h.write(&b.to_le_bytes());
            h.write(&t.to_le_bytes());
        }
        h.0
    }

    /// Writes the node and link tables in the format read by [`RoadGraph::load`].
    pub fn write_tables(&self, nodes: impl Write, links: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(nodes);
        let map = |e: csv::Error| Error::Config(format!("writing road tables: {e}"));
        w.write_record(["id", "x", "y"]).map_err(map)?;
        for (id, p) in self.ids.iter().zip(&self.points) {
            w.write_record([id.to_string(), p.x.to_string(), p.y.to_string()]).map_err(map)?;
        }
        w.flush().map_err(|e| Error::io(Path::new("nodes"), e))?;
        let mut w = csv::Writer::from_writer(links);
        w.write_record(["from", "to", "travel_time_seconds"]).map_err(map)?;
        for (a, b, t) in self.arcs() {
            w.write_record([self.id(a).to_string(), self.id(b).to_string(), t.to_string()]).map_err(map)?;
        }
        w.flush().map_err(|e| Error::io(Path::new("links"), e))
    }
}

#[derive(Clone, Copy)]
struct Fnv(u64);

impl Default for Fnv {
    fn default() -> Self {
        Fnv(0xcbf2_9ce4_8422_2325)
    }
}

impl Fnv {
    fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 ^= b as u64;
            self.0 = self.0.wrapping_mul(0x0100_0000_01b3);
        }
    }
}

/// Parses a node table, returning `(row, (id, point))`.
pub fn read_nodes(file: &str, r: impl Read) -> Result<Vec<(u64, (NodeId, Point))>> {
    let mut out = Vec::new();
    for_each_row::<NodeRow>(file, r, |line, row| {
        if !row.x.is_finite() || !row.y.is_finite() {
            return Err(Error::parse(file, line, "non-finite coordinate"));
        }
        out.push((line, (row.id, Point::new(row.x, row.y))));
        Ok(())
    })?;
    Ok(out)
}

/// Parses a link table, returning `(row, (from, to, seconds))`. Fractional
/// times are rounded to the nearest second.
/// A link row: id, then (from, to, travel time).
pub type LinkRecord = (u64, (NodeId, NodeId, u32));

pub fn read_links(file: &str, r: impl Read) -> Result<Vec<LinkRecord>> {
    let mut out = Vec::new();
    for_each_row::<LinkRow>(file, r, |line, row| {
        let t = row.travel_time_seconds;
        if t.is_nan() || t < 0.0 || t > u32::MAX as f64 / 2.0 {
            return Err(Error::parse(file, line, format!("invalid travel time {t}")));
        }
        out.push((line, (row.from, row.to, t.round() as u32)));
        Ok(())
    })?;
    Ok(out)
}

/// Single-source (or single-target) shortest-path tree.
#[derive(Clone, Debug)]
pub struct ShortestTree {
    pub root: NodeIx,
    /// `true` when labels are times *to* `root` rather than *from* it.
    pub reverse: bool,
    dist: Vec<u32>,
    pred: Vec<NodeIx>,
}

impl ShortestTree {
    pub fn time(&self, v: NodeIx) -> Option<Seconds> {
        match self.dist[v as usize] {
            UNREACHABLE => None,
            d => Some(d as Seconds),
        }
    }

    /// Next node toward the root for reverse trees, previous node for forward ones.
    pub fn pred(&self, v: NodeIx) -> Option<NodeIx> {
        match self.pred[v as usize] {
            UNREACHABLE => None,
            p => Some(p),
        }
    }

    /// Node sequence from the root to `v` (forward) or from `v` to the root (reverse).
    pub fn path(&self, v: NodeIx) -> Option<Vec<NodeIx>> {
        self.time(v)?;
        let mut path = vec![v];
        let mut cur = v;
        while let Some(p) = self.pred(cur) {
            path.push(p);
            cur = p;
        }
        if !self.reverse {
            path.reverse();
        }
        Some(path)
    }
}

/// Dijkstra with a binary heap; equal labels are settled smallest index first.
pub fn dijkstra(g: &RoadGraph, root: NodeIx, reverse: bool) -> ShortestTree {
    let n = g.len();
    let mut dist = vec![UNREACHABLE; n];
    let mut pred = vec![UNREACHABLE; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[root as usize] = 0;
    heap.push(Reverse((0u64, root)));
    while let Some(Reverse((d, v))) = heap.pop() {
        if done[v as usize] {
            continue;
        }
        done[v as usize] = true;
        let star: Box<dyn Iterator<Item = (NodeIx, u32)>> = if reverse { Box::new(g.in_arcs(v)) } else { Box::new(g.out_arcs(v)) };
        for (w, t) in star {
            let nd = d + t as u64;
            if nd < dist[w as usize] as u64 && nd < UNREACHABLE as u64 {
                dist[w as usize] = nd as u32;
                pred[w as usize] = v;
                heap.push(Reverse((nd, w)));
            }
        }
    }
    ShortestTree { root, reverse, dist, pred }
}

const SHARDS: usize = 16;

/// Bounded, sharded store of shortest-path trees keyed by root.
#[derive(Debug)]
struct TreeCache {
    shards: Vec<RwLock<HashMap<NodeIx, Arc<ShortestTree>>>>,
    per_shard: usize,
}

impl TreeCache {
    fn new(capacity: usize) -> Self {
        TreeCache { shards: (0..SHARDS).map(|_| RwLock::new(HashMap::new())).collect(), per_shard: capacity.div_ceil(SHARDS).max(1) }
    }

    fn get_or(&self, key: NodeIx, make: impl FnOnce() -> ShortestTree) -> Arc<ShortestTree> {
        let shard = &self.shards[key as usize % SHARDS];
        if let Some(t) = shard.read().expect("tree cache poisoned").get(&key) {
            return t.clone();
        }
        let tree = Arc::new(make());
        let mut map = shard.write().expect("tree cache poisoned");
        if let Some(t) = map.get(&key) {
            return t.clone();
        }
        if map.len() >= self.per_shard {
            // Evict the smallest key; any policy preserves correctness.
            if let Some(&k) = map.keys().min() {
                map.remove(&k);
            }
        }
        map.insert(key, tree.clone());
        tree
    }

    fn len(&self) -> usize {
        self.shards.iter().map(|s| s.read().expect("tree cache poisoned").len()).sum()
    }
}

/// Shortest travel times `t(i, j)` over a shared road graph.
///
/// Trees are computed on first use and cached per root. Concurrent readers
/// are supported; two threads racing on the same root compute identical trees.
#[derive(Debug)]
pub struct TravelTimeOracle {
    graph: Arc<RoadGraph>,
    forward: TreeCache,
    backward: TreeCache,
}

impl TravelTimeOracle {
    pub const DEFAULT_CAPACITY: usize = 4096;

    pub fn new(graph: Arc<RoadGraph>) -> Self {
        Self::with_capacity(graph, Self::DEFAULT_CAPACITY)
    }

    pub fn with_capacity(graph: Arc<RoadGraph>, trees: usize) -> Self {
        TravelTimeOracle { graph, forward: TreeCache::new(trees), backward: TreeCache::new(trees) }
    }

    pub fn graph(&self) -> &RoadGraph {
        &self.graph
    }

    pub fn graph_arc(&self) -> &Arc<RoadGraph> {
        &self.graph
    }

    /// Tree of times from `source` to every node.
    pub fn from_source(&self, source: NodeIx) -> Arc<ShortestTree> {
        self.forward.get_or(source, || dijkstra(&self.graph, source, false))
    }

    /// Tree of times from every node to `target`.
    pub fn to_target(&self, target: NodeIx) -> Arc<ShortestTree> {
        self.backward.get_or(target, || dijkstra(&self.graph, target, true))
    }

    /// Shortest time between dense indices; `None` when unreachable.
    pub fn time(&self, i: NodeIx, j: NodeIx) -> Option<Seconds> {
        if i == j {
            return Some(0);
        }
        self.from_source(i).time(j)
    }

    /// Shortest time between external node ids.
    pub fn shortest_time(&self, i: NodeId, j: NodeId) -> Result<Option<Seconds>> {
        let a = self.graph.require(i)?;
        let b = self.graph.require(j)?;
        Ok(self.time(a, b))
    }

    pub fn cached_trees(&self) -> usize {
        self.forward.len() + self.backward.len()
    }
}
