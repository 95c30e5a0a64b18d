//! Random road graphs, random GTFS feeds and random requests.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use trs_core::geo::{DistanceMetric, Point};
use trs_core::gtfs::{GtfsFeed, Route, Stop, StopTime, Trip};
use trs_core::request::{Participant, Request, Role};
use trs_core::road::{RoadGraph, TravelTimeOracle};
use trs_core::transit::{build_network, Anchors, BuildParams, TransitGraph};

pub const UNREACHED: i64 = i64::MAX / 4;

/// Random directed graph with integer arc times in `1..=max_time`.
pub fn random_road(rng: &mut impl Rng, n: usize, max_time: u32) -> RoadGraph {
    let nodes: Vec<(u64, Point)> = (0..n).map(|i| (i as u64 + 1, Point::new(rng.gen_range(0.0..5.0), rng.gen_range(0.0..5.0)))).collect();
    let density = rng.gen_range(0.05..0.35);
    let mut arcs = Vec::new();
    for a in 0..n {
        for b in 0..n {
            if a != b && rng.gen_bool(density) {
                arcs.push((a as u64 + 1, b as u64 + 1, rng.gen_range(1..=max_time)));
            }
        }
    }
    RoadGraph::new(DistanceMetric::Euclidean, nodes, arcs).unwrap()
}

/// All-pairs shortest times by Floyd-Warshall over dense indices.
pub fn floyd(g: &RoadGraph) -> Vec<Vec<i64>> {
    let n = g.len();
    let mut d = vec![vec![UNREACHED; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0;
    }
    for (a, b, t) in g.arcs() {
        let (a, b) = (a as usize, b as usize);
        d[a][b] = d[a][b].min(t as i64);
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    d
}

/// A `side` x `side` street grid with `spacing` miles between
/// intersections and random block times.
pub fn grid_road(rng: &mut impl Rng, side: u32, spacing: f64) -> RoadGraph {
    let id = |x: u32, y: u32| (y * side + x + 1) as u64;
    let mut nodes = Vec::new();
    let mut arcs = Vec::new();
    for y in 0..side {
        for x in 0..side {
            nodes.push((id(x, y), Point::new(x as f64 * spacing, y as f64 * spacing)));
            if x + 1 < side {
                let t = rng.gen_range(20..=90);
                arcs.push((id(x, y), id(x + 1, y), t));
                arcs.push((id(x + 1, y), id(x, y), t));
            }
            if y + 1 < side {
                let t = rng.gen_range(20..=90);
                arcs.push((id(x, y), id(x, y + 1), t));
                arcs.push((id(x, y + 1), id(x, y), t));
            }
        }
    }
    RoadGraph::new(DistanceMetric::Euclidean, nodes, arcs).unwrap()
}

#[derive(Clone, Copy, Debug)]
pub struct FeedShape {
    pub routes: (usize, usize),
    pub trips: (usize, usize),
    pub stops_per_route: (usize, usize),
    /// Trip start times are drawn from this window.
    pub start_window: (i64, i64),
}

/// Random feed whose stops sit on road nodes. Routes are random walks over
/// the road graph's nodes; stops of different routes at the same node
/// share a stop id, so transfers occur.
pub fn random_feed(rng: &mut impl Rng, road: &RoadGraph, shape: FeedShape) -> GtfsFeed {
    let mut feed = GtfsFeed::default();
    let mut stop_of = std::collections::BTreeMap::new();
    let mut row = 1;
    let n_routes = rng.gen_range(shape.routes.0..=shape.routes.1);
    for r in 0..n_routes {
        let route_id = format!("r{r}");
        feed.routes.push(Route { id: route_id.clone() });
        let len = rng.gen_range(shape.stops_per_route.0..=shape.stops_per_route.1).max(2);
        let mut path = vec![rng.gen_range(0..road.len() as u32)];
        while path.len() < len {
            let last = *path.last().unwrap();
            let next: Vec<u32> = road.out_arcs(last).map(|(v, _)| v).filter(|v| !path.contains(v)).collect();
            match next.choose(rng) {
                Some(&v) => path.push(v),
                None => break,
            }
        }
        if path.len() < 2 {
            continue;
        }
        for &v in &path {
            stop_of.entry(v).or_insert_with(|| {
                let id = format!("n{}", road.id(v));
                feed.stops.push(Stop { id: id.clone(), point: road.point(v) });
                id
            });
        }
        let legs: Vec<i64> = (1..path.len()).map(|_| rng.gen_range(60..=240)).collect();
        let n_trips = rng.gen_range(shape.trips.0..=shape.trips.1);
        for k in 0..n_trips {
            let trip_id = format!("r{r}t{k}");
            feed.trips.push(Trip { id: trip_id.clone(), route_id: route_id.clone(), service_id: "s".into() });
            let mut t = rng.gen_range(shape.start_window.0..shape.start_window.1);
            for (s, &v) in path.iter().enumerate() {
                if s > 0 {
                    t += legs[s - 1];
                }
                feed.stop_times.push(StopTime {
                    trip_id: trip_id.clone(),
                    arrival: t,
                    departure: t,
                    stop_id: stop_of[&v].clone(),
                    seq: s as u32 + 1,
                    row,
                });
                row += 1;
            }
        }
    }
    feed
}

/// Random request between distinct connected nodes with the given slack
/// ranges, departing inside `depart`.
pub fn random_request(
    rng: &mut impl Rng,
    oracle: &TravelTimeOracle,
    id: u64,
    role: Role,
    depart: (i64, i64),
    dev: (i64, i64),
    delay: (i64, i64),
) -> Option<Participant> {
    let g = oracle.graph();
    let o = rng.gen_range(0..g.len() as u32);
    let d = rng.gen_range(0..g.len() as u32);
    if o == d {
        return None;
    }
    let pd = rng.gen_range(depart.0..=depart.1);
    let sd = rng.gen_range(dev.0..=dev.1);
    let req = Request {
        id,
        role,
        origin: g.id(o),
        destination: g.id(d),
        announce_time: pd - sd - rng.gen_range(0..=600),
        pref_depart: Some(pd),
        pref_arrive: None,
        sched_dev: sd,
        travel_delay: rng.gen_range(delay.0..=delay.1),
    };
    Participant::new(req, oracle).ok()
}

pub struct World {
    pub oracle: TravelTimeOracle,
    pub graph: TransitGraph,
    pub riders: Vec<Participant>,
    pub drivers: Vec<Participant>,
}

/// A random city: grid road, random feed, riders and drivers, and the built
/// transit graph with anchors at every rider's origin and destination.
pub fn random_world(rng: &mut impl Rng, side: u32, shape: FeedShape, n_riders: usize, n_drivers: usize) -> Option<World> {
    let road = grid_road(rng, side, 0.2);
    let feed = random_feed(rng, &road, shape);
    if feed.stop_times.is_empty() {
        return None;
    }
    let oracle = TravelTimeOracle::new(Arc::new(road));
    let mut riders = Vec::new();
    let mut id = 1;
    let window = shape.start_window;
    while riders.len() < n_riders {
        if let Some(p) = random_request(rng, &oracle, id, Role::Rider, window, (60, 900), (600, 3600)) {
            riders.push(p);
        }
        id += 1;
    }
    let mut drivers = Vec::new();
    while drivers.len() < n_drivers {
        if let Some(p) = random_request(rng, &oracle, id, Role::Driver, (window.0 - 900, window.1), (0, 600), (300, 1800)) {
            drivers.push(p);
        }
        id += 1;
    }
    let params = BuildParams { max_access_walk: 0.45, max_transfer_walk: 0.25, ..Default::default() };
    let graph = build_network(&feed, oracle.graph(), &params, &Anchors::for_riders(&riders)).ok()?;
    Some(World { oracle, graph, riders, drivers })
}
