//! Small hand-built networks with known answers, shared by tests, examples
//! and the command-line front end.
//!
//! All times are whole minutes stored as seconds.

use std::sync::Arc;

use crate::feasibility::{Itinerary, SearchParams, Weights};
use crate::geo::{DistanceMetric, Point};
use crate::request::{Participant, Request, Role};
use crate::road::{NodeId, RoadGraph, TravelTimeOracle};
use crate::time::Seconds;
use crate::transit::{AnchorRole, LinkKind, NodeKind, TLink, TNode, TransitGraph, TransitGraphBuilder};

pub const MIN: Seconds = 60;

/// A road network, a transit graph and one rider-driver pair.
#[derive(Debug)]
pub struct Fixture {
    pub oracle: TravelTimeOracle,
    pub graph: TransitGraph,
    pub rider: Participant,
    pub driver: Participant,
    pub params: SearchParams,
    pub requests: Vec<Request>,
    names: Vec<(&'static str, TNode)>,
}

impl Fixture {
    pub fn road(&self) -> &RoadGraph {
        self.oracle.graph()
    }

    pub fn node(&self, name: &str) -> TNode {
        self.names.iter().find(|(n, _)| *n == name).unwrap_or_else(|| panic!("no fixture node {name}")).1
    }

    pub fn name(&self, v: TNode) -> &'static str {
        self.names.iter().find(|(_, x)| *x == v).map(|(n, _)| *n).unwrap_or("?")
    }

    pub fn link(&self, from: &str, to: &str) -> TLink {
        let (a, b) = (self.node(from), self.node(to));
        self.graph.forward_star(a).iter().find(|(j, _)| *j == b).unwrap_or_else(|| panic!("no fixture link {from}->{to}")).1
    }

    /// Itinerary along named nodes.
    pub fn path(&self, names: &[&str]) -> Itinerary {
        Itinerary { links: names.windows(2).map(|w| self.link(w[0], w[1])).collect() }
    }

    pub fn road_ix(&self, id: NodeId) -> u32 {
        self.road().index_of(id).expect("fixture road node")
    }
}

fn road(nodes: &[(NodeId, f64, f64)], arcs: &[(NodeId, NodeId, Seconds)]) -> TravelTimeOracle {
    let g = RoadGraph::new(
        DistanceMetric::Euclidean,
        nodes.iter().map(|&(id, x, y)| (id, Point::new(x, y))),
        arcs.iter().map(|&(a, b, t)| (a, b, (t * MIN) as u32)),
    )
    .expect("fixture road graph");
    TravelTimeOracle::new(Arc::new(g))
}

fn request(id: u64, role: Role, o: NodeId, d: NodeId, depart: Seconds, arrive: Seconds, delay: Seconds) -> Request {
    Request {
        id,
        role,
        origin: o,
        destination: d,
        announce_time: 0,
        pref_depart: Some(depart * MIN),
        pref_arrive: Some(arrive * MIN),
        sched_dev: 0,
        travel_delay: delay * MIN,
    }
}

struct Net<'a> {
    b: TransitGraphBuilder,
    road: &'a RoadGraph,
    names: Vec<(&'static str, TNode)>,
    routes: u32,
}

impl<'a> Net<'a> {
    fn new(road: &'a RoadGraph) -> Self {
        Net { b: TransitGraphBuilder::for_road(road), road, names: Vec::new(), routes: 0 }
    }

    fn anchor(&mut self, name: &'static str, road_id: NodeId, role: AnchorRole) {
        let r = self.road.index_of(road_id).unwrap();
        let v = self.b.add_anchor(r, role, self.road.point(r));
        self.names.push((name, v));
    }

    fn platform(&mut self, name: &'static str) {
        let s = self.b.add_stop(name, Point::default());
        let v = self.b.add_node(NodeKind::Platform { stop: s }, None, Point::default(), None);
        self.names.push((name, v));
    }

    /// A two-event trip with an in-vehicle link of `ride` minutes. Events are
    /// unscheduled unless `times` is given; `z` maps them to road nodes.
    fn trip(&mut self, names: [&'static str; 2], ride: Seconds, times: Option<[Seconds; 2]>, z: [Option<NodeId>; 2], reversed: bool) {
        let trip = self.b.add_trip(format!("k{}", self.routes));
        let route = self.b.add_route(format!("l{}", self.routes));
        self.routes += 1;
        let stop = self.b.add_stop(format!("{}-stop", names[0]), Point::default());
        let stop2 = self.b.add_stop(format!("{}-stop", names[1]), Point::default());
        let mut ids = [0; 2];
        for k in 0..2 {
            let zr = z[k].map(|id| self.road.index_of(id).unwrap());
            let point = zr.map(|r| self.road.point(r)).unwrap_or_default();
            let seq = if reversed { 2 - k as u32 } else { k as u32 + 1 };
            ids[k] = self.b.add_node(NodeKind::Event { stop: [stop, stop2][k], trip, route, seq }, times.map(|t| t[k] * MIN), point, zr);
            self.names.push((names[k], ids[k]));
        }
        let (a, b) = if reversed { (ids[1], ids[0]) } else { (ids[0], ids[1]) };
        self.b.add_link(a, b, LinkKind::InVehicle, (ride * MIN) as u32, 0);
    }

    fn link(&mut self, from: &str, to: &str, kind: LinkKind, minutes: Seconds) {
        let f = |n: &str| self.names.iter().find(|(x, _)| *x == n).unwrap().1;
        let (a, b) = (f(from), f(to));
        let walk = match kind {
            LinkKind::Access | LinkKind::Egress | LinkKind::WalkTransfer => minutes,
            _ => 0,
        };
        self.b.add_link(a, b, kind, (minutes * MIN) as u32, (walk * MIN) as u32);
    }
}

/// Link weights of the drop-off illustration: walking 1, waiting 2,
/// in-vehicle 1, transfer 2.
pub const ILLUSTRATION_WEIGHTS: Weights = Weights { access: 1.0, in_vehicle: 1.0, wait_transfer: 2.0, walk_transfer: 2.0 };

// Road node ids of the drop-off illustration.
pub const OR_D: NodeId = 1;
pub const OR_R: NodeId = 2;
pub const N1: NodeId = 3;
pub const N2: NodeId = 4;
pub const DS_D: NodeId = 5;
pub const DS_R: NodeId = 6;

const ILLUSTRATION_NODES: [(NodeId, f64, f64); 6] =
    [(OR_D, 0.0, 0.0), (OR_R, 2.0, 0.0), (N1, 3.0, 0.5), (N2, 3.0, -0.5), (DS_D, 4.0, 0.0), (DS_R, 8.0, 0.0)];

// Car times in minutes. The rider's own drive to DS_R is not part of the
// illustration; it is added so the rider's direct trip is defined.
const ILLUSTRATION_ARCS: [(NodeId, NodeId, Seconds); 7] =
    [(OR_D, OR_R, 10), (OR_R, DS_D, 6), (OR_R, N1, 5), (OR_R, N2, 6), (N2, DS_D, 7), (N1, DS_D, 5), (OR_R, DS_R, 30)];

/// Transit links of the illustration as (from, to, kind, minutes).
/// Links around `n2`/`s2`/`s5` have no printed durations; the values here
/// make `n2` cheap for the rider but unreachable in time for the driver.
const ILLUSTRATION_LINKS: [(&str, &str, LinkKind, Seconds); 16] = [
    ("n1", "s1", LinkKind::Access, 2),
    ("n2", "s2", LinkKind::Access, 2),
    ("s1", "u1", LinkKind::WaitTransfer, 4),
    ("s1", "u2", LinkKind::WaitTransfer, 2),
    ("s1", "u3", LinkKind::WaitTransfer, 2),
    ("s3", "u6", LinkKind::WaitTransfer, 1),
    ("s2", "u4", LinkKind::WaitTransfer, 3),
    ("s2", "u5", LinkKind::WaitTransfer, 5),
    ("u1'", "s3", LinkKind::WalkTransfer, 2),
    ("u6'", "s4", LinkKind::Egress, 2),
    ("u2'", "s4", LinkKind::Egress, 4),
    ("u3'", "s4", LinkKind::Egress, 7),
    ("s4", "DS(r)", LinkKind::Egress, 3),
    ("u4'", "s5", LinkKind::Egress, 2),
    ("u5'", "s5", LinkKind::Egress, 2),
    ("s5", "DS(r)", LinkKind::Egress, 3),
];

const ILLUSTRATION_TRIPS: [([&str; 2], Seconds); 6] =
    [(["u1", "u1'"], 3), (["u2", "u2'"], 12), (["u3", "u3'"], 15), (["u6", "u6'"], 4), (["u4", "u4'"], 10), (["u5", "u5'"], 14)];

/// Transit path names from `s1` for the three candidate itineraries.
pub const PI_1: [&str; 8] = ["s1", "u1", "u1'", "s3", "u6", "u6'", "s4", "DS(r)"];
pub const PI_2: [&str; 5] = ["s1", "u2", "u2'", "s4", "DS(r)"];
pub const PI_3: [&str; 5] = ["s1", "u3", "u3'", "s4", "DS(r)"];

/// The first-mile drop-off illustration. Driver: departs at 0, must arrive
/// by 20. Rider: departs at 10, must arrive by 40.
pub fn illustration() -> Fixture {
    let oracle = road(&ILLUSTRATION_NODES, &ILLUSTRATION_ARCS);
    let mut net = Net::new(oracle.graph());
    net.anchor("n1", N1, AnchorRole::Origin);
    net.anchor("n2", N2, AnchorRole::Origin);
    net.anchor("DS(r)", DS_R, AnchorRole::Destination);
    for s in ["s1", "s2", "s3", "s4", "s5"] {
        net.platform(s);
    }
    for (names, ride) in ILLUSTRATION_TRIPS {
        net.trip(names, ride, None, [None, None], false);
    }
    for (a, b, kind, m) in ILLUSTRATION_LINKS {
        net.link(a, b, kind, m);
    }
    let names = std::mem::take(&mut net.names);
    let graph = net.b.finish();
    let requests = vec![request(1, Role::Rider, OR_R, DS_R, 10, 40, 0), request(2, Role::Driver, OR_D, DS_D, 0, 20, 4)];
    finish(oracle, graph, requests, names, ILLUSTRATION_WEIGHTS, 2 * MIN)
}

/// The illustration with every road arc and transit link reversed, solved
/// as a last-mile problem. The mirrored rider leaves DS_R at 0 and must
/// reach OR_R by 30; the mirrored driver leaves DS_D at 18 and must reach
/// OR_D by 40.
pub fn illustration_mirrored() -> Fixture {
    let arcs: Vec<_> = ILLUSTRATION_ARCS.iter().map(|&(a, b, t)| (b, a, t)).collect();
    let oracle = road(&ILLUSTRATION_NODES, &arcs);
    let mut net = Net::new(oracle.graph());
    net.anchor("n1", N1, AnchorRole::Destination);
    net.anchor("n2", N2, AnchorRole::Destination);
    net.anchor("DS(r)", DS_R, AnchorRole::Origin);
    for s in ["s1", "s2", "s3", "s4", "s5"] {
        net.platform(s);
    }
    for (names, ride) in ILLUSTRATION_TRIPS {
        net.trip(names, ride, None, [None, None], true);
    }
    for (a, b, kind, m) in ILLUSTRATION_LINKS {
        let kind = match kind {
            LinkKind::Access => LinkKind::Egress,
            LinkKind::Egress => LinkKind::Access,
            k => k,
        };
        net.link(b, a, kind, m);
    }
    let names = std::mem::take(&mut net.names);
    let graph = net.b.finish();
    let requests = vec![request(1, Role::Rider, DS_R, OR_R, 0, 30, 0), request(2, Role::Driver, DS_D, OR_D, 18, 40, 12)];
    finish(oracle, graph, requests, names, ILLUSTRATION_WEIGHTS, 2 * MIN)
}

// Road node ids of the savings example: driver j, rider i, transfer point S.
pub const OR_J: NodeId = 1;
pub const DS_J: NodeId = 2;
pub const OR_I: NodeId = 3;
pub const DS_I: NodeId = 4;
pub const S: NodeId = 5;

/// The savings example: driver j gives rider i a lift to S, from where i
/// rides transit for 5 minutes. Transit departs S at 6 and arrives at 11.
pub fn savings_example() -> Fixture {
    let oracle = road(
        &[(OR_J, 0.0, 0.0), (DS_J, 3.0, 1.0), (OR_I, 1.0, -1.0), (DS_I, 4.0, -1.0), (S, 2.0, 0.0)],
        &[(OR_J, DS_J, 5), (OR_J, OR_I, 2), (OR_I, S, 3), (S, DS_I, 3), (S, DS_J, 2), (DS_I, DS_J, 2)],
    );
    let mut net = Net::new(oracle.graph());
    net.trip(["S@6", "DS(i)@11"], 5, Some([6, 11]), [Some(S), Some(DS_I)], false);
    net.anchor("DS(i)", DS_I, AnchorRole::Destination);
    net.link("DS(i)@11", "DS(i)", LinkKind::Egress, 0);
    let names = std::mem::take(&mut net.names);
    let graph = net.b.finish();
    let requests = vec![request(1, Role::Rider, OR_I, DS_I, 2, 12, 4), request(2, Role::Driver, OR_J, DS_J, 0, 10, 5)];
    finish(oracle, graph, requests, names, Weights::UNIT, 0)
}

fn finish(
    oracle: TravelTimeOracle,
    graph: TransitGraph,
    requests: Vec<Request>,
    names: Vec<(&'static str, TNode)>,
    weights: Weights,
    service_time: Seconds,
) -> Fixture {
    let rider = Participant::new(requests[0].clone(), &oracle).expect("fixture rider");
    let driver = Participant::new(requests[1].clone(), &oracle).expect("fixture driver");
    Fixture { oracle, graph, rider, driver, params: SearchParams { weights, service_time }, requests, names }
}
