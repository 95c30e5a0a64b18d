//! Trip-based time-expanded transit graph.
//!
//! Every (trip, stop) visit becomes an event node carrying its scheduled time.
//! Links are access (road anchor to event), egress (event to road anchor),
//! in-vehicle (consecutive events of one trip) and transfers between events of
//! different routes, split into same-stop waiting and walking transfers.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use chrono::NaiveDate;

use crate::error::{Error, Result};
use crate::geo::{DistanceMetric, Point, SpatialGrid};
use crate::gtfs::{GtfsFeed, STOP_TIMES};
use crate::road::{NodeIx, RoadGraph};
use crate::time::Seconds;

/// Index of a transit node.
pub type TNode = u32;
/// Index of a transit link.
pub type TLink = u32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LinkKind {
    Access,
    Egress,
    InVehicle,
    WaitTransfer,
    WalkTransfer,
}

impl LinkKind {
    pub const ALL: [LinkKind; 5] =
        [LinkKind::Access, LinkKind::Egress, LinkKind::InVehicle, LinkKind::WaitTransfer, LinkKind::WalkTransfer];

    pub fn is_transfer(self) -> bool {
        matches!(self, LinkKind::WaitTransfer | LinkKind::WalkTransfer)
    }

    fn code(self) -> u8 {
        self as u8
    }

    fn from_code(c: u8) -> Option<Self> {
        Self::ALL.get(c as usize).copied()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AnchorRole {
    Origin,
    Destination,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeKind {
    /// A trip's visit to a stop; `seq` is the 1-based position within the trip.
    Event { stop: u32, trip: u32, route: u32, seq: u32 },
    /// A road node where riders enter or leave the transit graph.
    Anchor { road: NodeIx, role: AnchorRole },
    /// An unscheduled stop-level node, used by hand-built graphs.
    Platform { stop: u32 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransitNode {
    pub kind: NodeKind,
    pub sched_time: Option<Seconds>,
    pub point: Point,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TransitLink {
    pub from: TNode,
    pub to: TNode,
    pub kind: LinkKind,
    pub traverse_time: u32,
    /// Walking share of `traverse_time`.
    pub walk_time: u32,
}

#[derive(Clone, Debug, Default, PartialEq)]
struct Star {
    offsets: Vec<u32>,
    entries: Vec<(TNode, TLink)>,
}

impl Star {
    fn build(n: usize, links: &[TransitLink], reverse: bool) -> Self {
        let mut rows: Vec<(TNode, TNode, TLink)> =
            links.iter().enumerate().map(|(k, l)| if reverse { (l.to, l.from, k as TLink) } else { (l.from, l.to, k as TLink) }).collect();
        rows.sort_unstable();
        let mut offsets = vec![0u32; n + 1];
        for r in &rows {
            offsets[r.0 as usize + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        Star { offsets, entries: rows.into_iter().map(|r| (r.1, r.2)).collect() }
    }

    fn of(&self, v: TNode) -> &[(TNode, TLink)] {
        &self.entries[self.offsets[v as usize] as usize..self.offsets[v as usize + 1] as usize]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TransitGraph {
    metric: DistanceMetric,
    road_fingerprint: u64,
    stop_ids: Vec<String>,
    stop_points: Vec<Point>,
    trip_ids: Vec<String>,
    route_ids: Vec<String>,
    nodes: Vec<TransitNode>,
    links: Vec<TransitLink>,
    z_map: Vec<Option<NodeIx>>,
    origin_anchor: BTreeMap<NodeIx, TNode>,
    destination_anchor: BTreeMap<NodeIx, TNode>,
    forward: Star,
    backward: Star,
}

/// Table-style node and link counts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize)]
pub struct NetworkStats {
    pub stops: usize,
    pub routes: usize,
    pub trips: usize,
    pub nodes: usize,
    pub event_nodes: usize,
    pub anchor_nodes: usize,
    pub in_vehicle_links: usize,
    pub wait_transfer_links: usize,
    pub walk_transfer_links: usize,
    pub access_links: usize,
    pub egress_links: usize,
    pub total_links: usize,
}

impl TransitGraph {
    pub fn metric(&self) -> DistanceMetric {
        self.metric
    }

    pub fn road_fingerprint(&self) -> u64 {
        self.road_fingerprint
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[TransitNode] {
        &self.nodes
    }

    pub fn node(&self, v: TNode) -> &TransitNode {
        &self.nodes[v as usize]
    }

    pub fn links(&self) -> &[TransitLink] {
        &self.links
    }

    pub fn link(&self, k: TLink) -> &TransitLink {
        &self.links[k as usize]
    }

    /// Links leaving `v` as `(head, link)`, ordered by head then link id.
    pub fn forward_star(&self, v: TNode) -> &[(TNode, TLink)] {
        self.forward.of(v)
    }

    /// Links entering `v` as `(tail, link)`, ordered by tail then link id.
    pub fn backward_star(&self, v: TNode) -> &[(TNode, TLink)] {
        self.backward.of(v)
    }

    /// Road node nearest to `v`; `None` for nodes without a location mapping.
    pub fn nearest_road_node(&self, v: TNode) -> Option<NodeIx> {
        self.z_map[v as usize]
    }

    pub fn origin_anchor(&self, road: NodeIx) -> Option<TNode> {
        self.origin_anchor.get(&road).copied()
    }

    pub fn destination_anchor(&self, road: NodeIx) -> Option<TNode> {
        self.destination_anchor.get(&road).copied()
    }

    pub fn stop_id(&self, stop: u32) -> &str {
        &self.stop_ids[stop as usize]
    }

    pub fn stop_points(&self) -> &[Point] {
        &self.stop_points
    }

    pub fn trip_id(&self, trip: u32) -> &str {
        &self.trip_ids[trip as usize]
    }

    pub fn route_id(&self, route: u32) -> &str {
        &self.route_ids[route as usize]
    }

    pub fn is_anchor(&self, v: TNode) -> bool {
        matches!(self.nodes[v as usize].kind, NodeKind::Anchor { .. })
    }

    pub fn is_event(&self, v: TNode) -> bool {
        matches!(self.nodes[v as usize].kind, NodeKind::Event { .. })
    }

    /// Human-readable node name.
    pub fn node_label(&self, v: TNode) -> String {
        match self.nodes[v as usize].kind {
            NodeKind::Event { stop, trip, seq, .. } => {
                format!("{}@{}#{}", self.trip_ids[trip as usize], self.stop_ids[stop as usize], seq)
            }
            NodeKind::Anchor { road, role } => {
                let tag = if role == AnchorRole::Origin { "o" } else { "d" };
                format!("road{road}/{tag}")
            }
            NodeKind::Platform { stop } => self.stop_ids[stop as usize].clone(),
        }
    }

    pub fn stats(&self) -> NetworkStats {
        let mut s = NetworkStats {
            stops: self.stop_ids.len(),
            routes: self.route_ids.len(),
            trips: self.trip_ids.len(),
            nodes: self.nodes.len(),
            total_links: self.links.len(),
            ..Default::default()
        };
        for n in &self.nodes {
            match n.kind {
                NodeKind::Event { .. } => s.event_nodes += 1,
                NodeKind::Anchor { .. } => s.anchor_nodes += 1,
                NodeKind::Platform { .. } => {}
            }
        }
        for l in &self.links {
            match l.kind {
                LinkKind::Access => s.access_links += 1,
                LinkKind::Egress => s.egress_links += 1,
                LinkKind::InVehicle => s.in_vehicle_links += 1,
                LinkKind::WaitTransfer => s.wait_transfer_links += 1,
                LinkKind::WalkTransfer => s.walk_transfer_links += 1,
            }
        }
        s
    }

    /// Fails unless this graph was built over `road`.
    pub fn check_road(&self, road: &RoadGraph) -> Result<()> {
        if road.metric() != self.metric || road.fingerprint() != self.road_fingerprint {
            return Err(Error::Config("transit graph was built over a different road network or coordinate frame".into()));
        }
        Ok(())
    }
}

/// Incremental constructor used by [`build_network`] and by hand-built graphs.
#[derive(Clone, Debug)]
pub struct TransitGraphBuilder {
    g: TransitGraph,
}

impl TransitGraphBuilder {
    pub fn new(metric: DistanceMetric, road_fingerprint: u64) -> Self {
        TransitGraphBuilder {
            g: TransitGraph {
                metric,
                road_fingerprint,
                stop_ids: Vec::new(),
                stop_points: Vec::new(),
                trip_ids: Vec::new(),
                route_ids: Vec::new(),
                nodes: Vec::new(),
                links: Vec::new(),
                z_map: Vec::new(),
                origin_anchor: BTreeMap::new(),
                destination_anchor: BTreeMap::new(),
                forward: Star::default(),
                backward: Star::default(),
            },
        }
    }

    pub fn for_road(road: &RoadGraph) -> Self {
        Self::new(road.metric(), road.fingerprint())
    }

    pub fn add_stop(&mut self, id: impl Into<String>, point: Point) -> u32 {
        self.g.stop_ids.push(id.into());
        self.g.stop_points.push(point);
        self.g.stop_ids.len() as u32 - 1
    }

    pub fn add_trip(&mut self, id: impl Into<String>) -> u32 {
        self.g.trip_ids.push(id.into());
        self.g.trip_ids.len() as u32 - 1
    }

    pub fn add_route(&mut self, id: impl Into<String>) -> u32 {
        self.g.route_ids.push(id.into());
        self.g.route_ids.len() as u32 - 1
    }

    pub fn add_node(&mut self, kind: NodeKind, sched_time: Option<Seconds>, point: Point, z: Option<NodeIx>) -> TNode {
        self.g.nodes.push(TransitNode { kind, sched_time, point });
        self.g.z_map.push(z);
        let v = self.g.nodes.len() as TNode - 1;
        if let NodeKind::Anchor { road, role } = kind {
            match role {
                AnchorRole::Origin => self.g.origin_anchor.insert(road, v),
                AnchorRole::Destination => self.g.destination_anchor.insert(road, v),
            };
        }
        v
    }

    pub fn add_anchor(&mut self, road: NodeIx, role: AnchorRole, point: Point) -> TNode {
        self.add_node(NodeKind::Anchor { road, role }, None, point, Some(road))
    }

    pub fn add_link(&mut self, from: TNode, to: TNode, kind: LinkKind, traverse_time: u32, walk_time: u32) -> TLink {
        self.g.links.push(TransitLink { from, to, kind, traverse_time, walk_time });
        self.g.links.len() as TLink - 1
    }

    pub fn node_count(&self) -> usize {
        self.g.nodes.len()
    }

    pub fn finish(mut self) -> TransitGraph {
        let n = self.g.nodes.len();
        self.g.forward = Star::build(n, &self.g.links, false);
        self.g.backward = Star::build(n, &self.g.links, true);
        self.g
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BuildParams {
    /// Miles between an anchor and a stop for access and egress.
    pub max_access_walk: f64,
    /// Miles between two stops for a walking transfer.
    pub max_transfer_walk: f64,
    /// Longest wait allowed on a transfer.
    pub schedule_slack: Seconds,
    /// Miles per hour.
    pub walk_speed: f64,
    /// Mode-change time added to every access link.
    pub access_service_time: Seconds,
    /// Keep only trips running on this date; all trips when `None`.
    pub service_date: Option<NaiveDate>,
}

impl Default for BuildParams {
    fn default() -> Self {
        BuildParams {
            max_access_walk: 0.75,
            max_transfer_walk: 0.25,
            schedule_slack: 600,
            walk_speed: 3.0,
            access_service_time: 120,
            service_date: None,
        }
    }
}

impl BuildParams {
    pub fn validate(&self) -> Result<()> {
        let pos = |v: f64| v.is_finite() && v > 0.0;
        if !pos(self.max_access_walk) || !pos(self.max_transfer_walk) || !pos(self.walk_speed) {
            return Err(Error::Config("walking distances and speed must be positive".into()));
        }
        if self.schedule_slack <= 0 || self.access_service_time < 0 {
            return Err(Error::Config("schedule slack must be positive and service time nonnegative".into()));
        }
        Ok(())
    }

    pub fn walk_time(&self, miles: f64) -> u32 {
        (miles / self.walk_speed * 3600.0).round() as u32
    }
}

/// Road nodes that get anchor nodes.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Anchors {
    pub origins: BTreeSet<NodeIx>,
    pub destinations: BTreeSet<NodeIx>,
}

impl Anchors {
    /// Anchors at every rider origin and destination.
    pub fn for_riders<'a>(participants: impl IntoIterator<Item = &'a crate::request::Participant>) -> Self {
        let mut a = Anchors::default();
        for p in participants {
            if p.role() == crate::request::Role::Rider {
                a.origins.insert(p.origin);
                a.destinations.insert(p.destination);
            }
        }
        a
    }
}

/// Builds the time-expanded graph for one service day.
pub fn build_network(feed: &GtfsFeed, road: &RoadGraph, params: &BuildParams, anchors: &Anchors) -> Result<TransitGraph> {
    params.validate()?;
    feed.check_references()?;
    if feed.stop_times.is_empty() {
        return Err(Error::parse(STOP_TIMES, 0, "feed has no stop times"));
    }
    for &a in anchors.origins.iter().chain(&anchors.destinations) {
        if a as usize >= road.len() {
            return Err(Error::Config(format!("anchor road index {a} out of range")));
        }
    }
    let metric = road.metric();
    let mut b = TransitGraphBuilder::for_road(road);
    let road_grid = road.spatial_index();

    let stop_index: HashMap<&str, u32> = feed.stops.iter().map(|s| (s.id.as_str(), b.add_stop(s.id.clone(), s.point))).collect();
    let stop_z: Vec<Option<NodeIx>> = feed.stops.iter().map(|s| road_grid.nearest(s.point).map(|r| r.0)).collect();

    let active = feed.active_trips(params.service_date);
    let mut route_index: HashMap<&str, u32> = HashMap::new();
    let mut trip_meta: HashMap<&str, (u32, u32)> = HashMap::new();
    for t in &feed.trips {
        if !active.contains(t.id.as_str()) {
            continue;
        }
        let route = *route_index.entry(t.route_id.as_str()).or_insert_with(|| b.add_route(t.route_id.clone()));
        trip_meta.insert(t.id.as_str(), (b.add_trip(t.id.clone()), route));
    }

    let mut by_trip: BTreeMap<u32, Vec<&crate::gtfs::StopTime>> = BTreeMap::new();
    for st in &feed.stop_times {
        if let Some(&(trip, _)) = trip_meta.get(st.trip_id.as_str()) {
            by_trip.entry(trip).or_default().push(st);
        }
    }

    // Event nodes, one trip at a time.
    let mut trip_events: Vec<(Vec<TNode>, u32)> = Vec::with_capacity(by_trip.len());
    let mut events_at_stop: Vec<Vec<(Seconds, TNode)>> = vec![Vec::new(); feed.stops.len()];
    for (&trip, sts) in by_trip.iter_mut() {
        sts.sort_by_key(|st| (st.seq, st.row));
        for w in sts.windows(2) {
            if w[1].seq == w[0].seq {
                return Err(Error::parse(STOP_TIMES, w[1].row, "repeated stop_sequence within trip"));
            }
            if w[1].arrival < w[0].departure || w[1].departure < w[0].departure {
                return Err(Error::parse(STOP_TIMES, w[1].row, "stop times decrease along the trip"));
            }
        }
        let route = trip_meta[sts[0].trip_id.as_str()].1;
        let mut evs = Vec::with_capacity(sts.len());
        for (k, st) in sts.iter().enumerate() {
            let stop = stop_index[st.stop_id.as_str()];
            let kind = NodeKind::Event { stop, trip, route, seq: k as u32 + 1 };
            let v = b.add_node(kind, Some(st.departure), feed.stops[stop as usize].point, stop_z[stop as usize]);
            events_at_stop[stop as usize].push((st.departure, v));
            evs.push(v);
        }
        trip_events.push((evs, trip));
    }
    for list in &mut events_at_stop {
        list.sort_unstable();
    }
    let trip_len: HashMap<u32, u32> = trip_events.iter().map(|(e, t)| (*t, e.len() as u32)).collect();

    for (evs, _) in &trip_events {
        for w in evs.windows(2) {
            let dt = b.g.nodes[w[1] as usize].sched_time.unwrap() - b.g.nodes[w[0] as usize].sched_time.unwrap();
            b.add_link(w[0], w[1], LinkKind::InVehicle, dt as u32, 0);
        }
    }

    // Transfers.
    let stop_grid = SpatialGrid::new(metric, &b.g.stop_points, None);
    let near_stops: Vec<Vec<(u32, f64)>> =
        (0..feed.stops.len()).map(|s| stop_grid.within(feed.stops[s].point, params.max_transfer_walk)).collect();
    for (evs, _) in &trip_events {
        for &i in evs {
            let (stop_i, route_i, seq_i) = match b.g.nodes[i as usize].kind {
                NodeKind::Event { stop, route, seq, .. } => (stop, route, seq),
                _ => unreachable!(),
            };
            if seq_i == 1 {
                continue;
            }
            let ti = b.g.nodes[i as usize].sched_time.unwrap();
            for &(stop_j, dist) in &near_stops[stop_i as usize] {
                let walk = if stop_j == stop_i { 0 } else { params.walk_time(dist) };
                let lo = ti + walk as Seconds;
                let hi = lo + params.schedule_slack;
                let list = &events_at_stop[stop_j as usize];
                let start = list.partition_point(|&(t, _)| t < lo);
                for &(tj, j) in list[start..].iter().take_while(|&&(t, _)| t <= hi) {
                    let NodeKind::Event { trip, route, seq, .. } = b.g.nodes[j as usize].kind else { unreachable!() };
                    if route == route_i || seq == trip_len[&trip] {
                        continue;
                    }
                    let kind = if dist == 0.0 { LinkKind::WaitTransfer } else { LinkKind::WalkTransfer };
                    b.add_link(i, j, kind, (tj - ti) as u32, walk);
                }
            }
        }
    }

    // Access and egress.
    let service = params.access_service_time as u32;
    for &o in &anchors.origins {
        let a = b.add_anchor(o, AnchorRole::Origin, road.point(o));
        for (stop, dist) in stop_grid.within(road.point(o), params.max_access_walk) {
            let walk = params.walk_time(dist);
            for &(_, j) in &events_at_stop[stop as usize] {
                b.add_link(a, j, LinkKind::Access, walk + service, walk);
            }
        }
    }
    for &d in &anchors.destinations {
        let a = b.add_anchor(d, AnchorRole::Destination, road.point(d));
        for (stop, dist) in stop_grid.within(road.point(d), params.max_access_walk) {
            let walk = params.walk_time(dist);
            for &(_, j) in &events_at_stop[stop as usize] {
                b.add_link(j, a, LinkKind::Egress, walk, walk);
            }
        }
    }
    let g = b.finish();
    log::info!("built transit graph: {} nodes, {} links ({} in-vehicle)", g.len(), g.links.len(), g.stats().in_vehicle_links);
    Ok(g)
}

const MAGIC: &[u8; 8] = b"TRSGRAPH";
const VERSION: u32 = 1;

impl TransitGraph {
    /// Serializes to the versioned binary dump format.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Vec::with_capacity(64 + self.nodes.len() * 40 + self.links.len() * 17);
        w.extend_from_slice(MAGIC);
        put_u32(&mut w, VERSION);
        w.push(self.metric as u8);
        w.extend_from_slice(&self.road_fingerprint.to_le_bytes());
        put_u32(&mut w, self.stop_ids.len() as u32);
        for (id, p) in self.stop_ids.iter().zip(&self.stop_points) {
            put_str(&mut w, id);
            put_point(&mut w, *p);
        }
        for table in [&self.trip_ids, &self.route_ids] {
            put_u32(&mut w, table.len() as u32);
            for s in table.iter() {
                put_str(&mut w, s);
            }
        }
        put_u32(&mut w, self.nodes.len() as u32);
        for (n, z) in self.nodes.iter().zip(&self.z_map) {
            match n.kind {
                NodeKind::Event { stop, trip, route, seq } => {
                    w.push(0);
                    for v in [stop, trip, route, seq] {
                        put_u32(&mut w, v);
                    }
                }
                NodeKind::Anchor { road, role } => {
                    w.push(1);
                    put_u32(&mut w, road);
                    w.push(role as u8);
                }
                NodeKind::Platform { stop } => {
                    w.push(2);
                    put_u32(&mut w, stop);
                }
            }
            match n.sched_time {
                Some(t) => {
                    w.push(1);
                    w.extend_from_slice(&t.to_le_bytes());
                }
                None => w.push(0),
            }
            put_point(&mut w, n.point);
            match z {
                Some(r) => {
                    w.push(1);
                    put_u32(&mut w, *r);
                }
                None => w.push(0),
            }
        }
        put_u32(&mut w, self.links.len() as u32);
        for l in &self.links {
            put_u32(&mut w, l.from);
            put_u32(&mut w, l.to);
            w.push(l.kind.code());
            put_u32(&mut w, l.traverse_time);
            put_u32(&mut w, l.walk_time);
        }
        w
    }

    /// Decodes a dump, rejecting truncated, inconsistent or trailing data.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { buf: bytes, pos: 0 };
        if r.take(8)? != MAGIC {
            return Err(Error::Dump("bad magic".into()));
        }
        let version = r.u32()?;
        if version != VERSION {
            return Err(Error::Dump(format!("unsupported version {version}")));
        }
        let metric = match r.u8()? {
            0 => DistanceMetric::Euclidean,
            1 => DistanceMetric::GreatCircle,
            m => return Err(Error::Dump(format!("unknown metric {m}"))),
        };
        let fingerprint = r.u64()?;
        let mut b = TransitGraphBuilder::new(metric, fingerprint);
        let stops = r.count(12)?;
        for _ in 0..stops {
            let id = r.string()?;
            let p = r.point()?;
            b.add_stop(id, p);
        }
        let trips = r.count(4)?;
        for _ in 0..trips {
            let s = r.string()?;
            b.add_trip(s);
        }
        let routes = r.count(4)?;
        for _ in 0..routes {
            let s = r.string()?;
            b.add_route(s);
        }
        let nodes = r.count(19)?;
        for _ in 0..nodes {
            let kind = match r.u8()? {
                0 => {
                    let (stop, trip, route, seq) = (r.u32()?, r.u32()?, r.u32()?, r.u32()?);
                    if stop as usize >= stops || trip as usize >= trips || route as usize >= routes || seq == 0 {
                        return Err(Error::Dump("event node references out of range".into()));
                    }
                    NodeKind::Event { stop, trip, route, seq }
                }
                1 => {
                    let road = r.u32()?;
                    let role = match r.u8()? {
                        0 => AnchorRole::Origin,
                        1 => AnchorRole::Destination,
                        x => return Err(Error::Dump(format!("bad anchor role {x}"))),
                    };
                    NodeKind::Anchor { road, role }
                }
                2 => {
                    let stop = r.u32()?;
                    if stop as usize >= stops {
                        return Err(Error::Dump("platform stop out of range".into()));
                    }
                    NodeKind::Platform { stop }
                }
                t => return Err(Error::Dump(format!("unknown node tag {t}"))),
            };
            let sched = match r.u8()? {
                0 => None,
                1 => Some(r.i64()?),
                x => return Err(Error::Dump(format!("bad option flag {x}"))),
            };
            let point = r.point()?;
            let z = match r.u8()? {
                0 => None,
                1 => Some(r.u32()?),
                x => return Err(Error::Dump(format!("bad option flag {x}"))),
            };
            b.add_node(kind, sched, point, z);
        }
        let links = r.count(17)?;
        for _ in 0..links {
            let (from, to) = (r.u32()?, r.u32()?);
            if from as usize >= nodes || to as usize >= nodes {
                return Err(Error::Dump("link endpoint out of range".into()));
            }
            let kind = LinkKind::from_code(r.u8()?).ok_or_else(|| Error::Dump("unknown link kind".into()))?;
            let (t, walk) = (r.u32()?, r.u32()?);
            b.add_link(from, to, kind, t, walk);
        }
        if r.pos != bytes.len() {
            return Err(Error::Dump("trailing bytes".into()));
        }
        Ok(b.finish())
    }

    pub fn write_dump(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn read_dump(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }
}

fn put_u32(w: &mut Vec<u8>, v: u32) {
    w.extend_from_slice(&v.to_le_bytes());
}

fn put_str(w: &mut Vec<u8>, s: &str) {
    put_u32(w, s.len() as u32);
    w.extend_from_slice(s.as_bytes());
}

fn put_point(w: &mut Vec<u8>, p: Point) {
    w.extend_from_slice(&p.x.to_le_bytes());
    w.extend_from_slice(&p.y.to_le_bytes());
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len());
        let end = end.ok_or_else(|| Error::Dump(format!("truncated at byte {}", self.pos)))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn i64(&mut self) -> Result<i64> {
        Ok(i64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn point(&mut self) -> Result<Point> {
        Ok(Point::new(self.f64()?, self.f64()?))
    }

    /// Element count, refused when the remaining input cannot possibly hold it.
    fn count(&mut self, min_item: usize) -> Result<usize> {
        let n = self.u32()? as usize;
        if n.saturating_mul(min_item) > self.buf.len() - self.pos {
            return Err(Error::Dump(format!("count {n} exceeds remaining input")));
        }
        Ok(n)
    }

    fn string(&mut self) -> Result<String> {
        let n = self.u32()? as usize;
        let bytes = self.take(n)?;
        String::from_utf8(bytes.to_vec()).map_err(|_| Error::Dump("invalid utf-8 string".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gtfs::{Route, Stop, StopTime, Trip};

    fn road() -> RoadGraph {
        RoadGraph::new(
            DistanceMetric::Euclidean,
            (0..5u64).map(|i| (i, Point::new(i as f64 * 0.5, 0.0))),
            (0..4u64).map(|i| (i, i + 1, 60)),
        )
        .unwrap()
    }

    type TripSpec<'a> = (&'a str, &'a str, &'a [(&'a str, Seconds)]);

    fn feed(stops: &[(&str, f64, f64)], trips: &[TripSpec]) -> GtfsFeed {
        let mut f = GtfsFeed::default();
        for &(id, x, y) in stops {
            f.stops.push(Stop { id: id.into(), point: Point::new(x, y) });
        }
        let mut routes = BTreeSet::new();
        for &(tid, rid, sts) in trips {
            routes.insert(rid);
            f.trips.push(Trip { id: tid.into(), route_id: rid.into(), service_id: "S".into() });
            for (k, &(stop, t)) in sts.iter().enumerate() {
                f.stop_times.push(StopTime {
                    trip_id: tid.into(),
                    arrival: t,
                    departure: t,
                    stop_id: stop.into(),
                    seq: k as u32 + 1,
                    row: f.stop_times.len() as u64 + 2,
                });
            }
        }
        f.routes = routes.into_iter().map(|r| Route { id: r.into() }).collect();
        f
    }

    #[test]
    fn single_trip() {
        let f = feed(&[("A", 0.0, 0.0), ("B", 0.5, 0.0), ("C", 1.0, 0.0)], &[("T", "R", &[("A", 100), ("B", 200), ("C", 300)])]);
        let g = build_network(&f, &road(), &BuildParams::default(), &Anchors::default()).unwrap();
        let s = g.stats();
        assert_eq!((s.in_vehicle_links, s.wait_transfer_links + s.walk_transfer_links), (2, 0));
        assert_eq!(g.nearest_road_node(1), Some(1));
    }

    #[test]
    fn distant_routes_do_not_connect() {
        let f = feed(
            &[("A", 0.0, 0.0), ("B", 0.5, 0.0), ("C", 0.0, 1.0), ("D", 0.5, 1.0)],
            &[("T1", "R1", &[("A", 100), ("B", 200)]), ("T2", "R2", &[("C", 100), ("D", 200), ("C", 300)])],
        );
        let g = build_network(&f, &road(), &BuildParams::default(), &Anchors::default()).unwrap();
        assert_eq!(g.stats().walk_transfer_links + g.stats().wait_transfer_links, 0);
    }

    #[test]
    fn transfer_windows() {
        // R1 reaches X at 100; R2 leaves X at 100, 400, 800 and then continues.
        let f = feed(
            &[("W", 0.0, 0.0), ("X", 0.5, 0.0), ("Y", 1.0, 0.0), ("Z", 0.55, 0.0)],
            &[
                ("T1", "R1", &[("W", 0), ("X", 100)]),
                ("T2", "R2", &[("X", 100), ("Y", 200)]),
                ("T3", "R2", &[("X", 400), ("Y", 500)]),
                ("T4", "R2", &[("X", 800), ("Y", 900)]),
                ("T5", "R3", &[("Z", 300), ("Y", 1000)]),
            ],
        );
        let g = build_network(&f, &road(), &BuildParams::default(), &Anchors::default()).unwrap();
        let s = g.stats();
        // X@100 -> T2 (wait 0) and T3 (wait 300); T4 exceeds the 600 s slack from 100? No: 700 > 600.
        assert_eq!(s.wait_transfer_links, 2);
        // X@100 -> Z@300: 0.05 mi takes 60 s, wait 140 s.
        assert_eq!(s.walk_transfer_links, 1);
        let walk = g.links().iter().find(|l| l.kind == LinkKind::WalkTransfer).unwrap();
        assert_eq!((walk.traverse_time, walk.walk_time), (200, 60));
    }

    #[test]
    fn anchors_get_access_and_egress() {
        let f = feed(&[("A", 0.0, 0.0), ("B", 1.5, 0.0)], &[("T", "R", &[("A", 100), ("B", 200)])]);
        let anchors = Anchors { origins: BTreeSet::from([1]), destinations: BTreeSet::from([3]) };
        let g = build_network(&f, &road(), &BuildParams::default(), &anchors).unwrap();
        let s = g.stats();
        assert_eq!((s.access_links, s.egress_links, s.anchor_nodes), (1, 1, 2));
        let acc = g.links().iter().find(|l| l.kind == LinkKind::Access).unwrap();
        assert_eq!((acc.walk_time, acc.traverse_time), (600, 720));
        assert_eq!(g.origin_anchor(1), Some(acc.from));
    }

    #[test]
    fn inactive_trips_dropped() {
        let mut f = feed(&[("A", 0.0, 0.0), ("B", 0.5, 0.0)], &[("T", "R", &[("A", 100), ("B", 200)])]);
        f.calendar.push(crate::gtfs::Calendar {
            service_id: "S".into(),
            days: [true, true, true, true, true, false, false],
            start: NaiveDate::from_ymd_opt(2024, 1, 1).unwrap(),
            end: NaiveDate::from_ymd_opt(2024, 12, 31).unwrap(),
        });
        let mut p = BuildParams { service_date: NaiveDate::from_ymd_opt(2024, 1, 6), ..Default::default() };
        assert_eq!(build_network(&f, &road(), &p, &Anchors::default()).unwrap().len(), 0);
        p.service_date = NaiveDate::from_ymd_opt(2024, 1, 8);
        assert_eq!(build_network(&f, &road(), &p, &Anchors::default()).unwrap().len(), 2);
    }

    #[test]
    fn decreasing_times_rejected_with_row() {
        let f = feed(&[("A", 0.0, 0.0), ("B", 0.5, 0.0)], &[("T", "R", &[("A", 300), ("B", 200)])]);
        match build_network(&f, &road(), &BuildParams::default(), &Anchors::default()) {
            Err(Error::Parse { file, row, .. }) => assert_eq!((file.as_str(), row), (STOP_TIMES, 3)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn empty_feed_is_an_error() {
        assert!(build_network(&GtfsFeed::default(), &road(), &BuildParams::default(), &Anchors::default()).is_err());
    }

    #[test]
    fn dump_round_trip_and_corruption() {
        let f = feed(
            &[("A", 0.0, 0.0), ("B", 0.5, 0.0), ("C", 0.5, 0.1)],
            &[("T1", "R1", &[("A", 0), ("B", 100), ("A", 200)]), ("T2", "R2", &[("C", 150), ("A", 300)])],
        );
        let anchors = Anchors { origins: BTreeSet::from([0]), destinations: BTreeSet::from([0, 2]) };
        let g = build_network(&f, &road(), &BuildParams::default(), &anchors).unwrap();
        let bytes = g.to_bytes();
        let back = TransitGraph::from_bytes(&bytes).unwrap();
        assert_eq!(back, g);
        assert_eq!(back.to_bytes(), bytes);
        assert!(TransitGraph::from_bytes(&bytes[..bytes.len() - 1]).is_err());
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(TransitGraph::from_bytes(&extra).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(TransitGraph::from_bytes(&bad).is_err());
        assert!(TransitGraph::from_bytes(&[]).is_err());
    }
}
