//! First-mile matching: a backward search from each rider's destination
//! with embedded driver compatibility checks.

use crate::error::Result;
use crate::request::{Participant, RequestId};
use crate::road::{NodeIx, TravelTimeOracle};
use crate::time::Seconds;
use crate::transit::{TNode, TransitGraph};

use super::search::{label_search, Direction, LabelSet};
use super::{replay, FeasibleMatch, MatchEngine, MatchMode, SearchParams, Variant};

/// A settled node where the rider could be dropped off.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Candidate {
    pub node: TNode,
    pub road: NodeIx,
    pub cost: f64,
    /// Latest time the rider may start the transit leg here.
    pub time: Seconds,
    pub service: Seconds,
}

#[derive(Clone, Debug)]
pub struct RiderSearch {
    pub rider: RequestId,
    pub labels: LabelSet,
    /// Sorted by road node, then cost, then transit node.
    pub candidates: Vec<Candidate>,
}

/// The update rule's time prune: the rider must be able to reach `v` by car
/// from its origin, plus the mode-change time, strictly before the label.
pub fn prune<'a>(
    rider: &'a Participant,
    g: &'a TransitGraph,
    oracle: &'a TravelTimeOracle,
    params: &'a SearchParams,
) -> impl Fn(TNode, Seconds) -> bool + 'a {
    let from_origin = oracle.from_source(rider.origin);
    let base = rider.windows.earliest_depart;
    move |v, t| match g.nearest_road_node(v) {
        None => base < t,
        Some(z) => match from_origin.time(z) {
            None => false,
            Some(d) => base + d + params.service_at(g, v) < t,
        },
    }
}

/// Runs the backward search for `rider`; `None` when its destination has no anchor.
pub fn search_rider(
    rider: &Participant,
    g: &TransitGraph,
    oracle: &TravelTimeOracle,
    params: &SearchParams,
    trace: bool,
) -> Option<RiderSearch> {
    let root = g.destination_anchor(rider.destination)?;
    let labels =
        label_search(g, root, rider.windows.latest_arrive, Direction::Backward, &params.weights, prune(rider, g, oracle, params), trace);
    let mut candidates: Vec<Candidate> = labels
        .settled()
        .iter()
        .filter(|&&v| v != root)
        .filter_map(|&v| {
            let road = g.nearest_road_node(v)?;
            let l = labels.label(v)?;
            Some(Candidate { node: v, road, cost: l.cost, time: l.time, service: params.service_at(g, v) })
        })
        .collect();
    candidates.sort_by(|a, b| a.road.cmp(&b.road).then(a.cost.total_cmp(&b.cost)).then(a.node.cmp(&b.node)));
    Some(RiderSearch { rider: rider.id(), labels, candidates })
}

/// Checks every driver against a finished rider search. At most one match is
/// kept per (rider, driver, drop-off road node): the cheapest feasible one.
pub fn match_drivers(
    s: &RiderSearch,
    rider: &Participant,
    drivers: &[&Participant],
    g: &TransitGraph,
    oracle: &TravelTimeOracle,
) -> Vec<FeasibleMatch> {
    let mut out = Vec::new();
    if s.candidates.is_empty() {
        return out;
    }
    let to_pickup = oracle.to_target(rider.origin);
    let from_origin = oracle.from_source(rider.origin);
    for d in drivers {
        let Some(t_dr) = to_pickup.time(d.origin) else { continue };
        let pickup = d.windows.earliest_depart + t_dr;
        if pickup < rider.windows.earliest_depart || pickup > rider.windows.latest_depart {
            continue;
        }
        let to_dest = oracle.to_target(d.destination);
        let mut last_road = None;
        for c in &s.candidates {
            if last_road == Some(c.road) {
                continue;
            }
            let (Some(t_rz), Some(t_zd)) = (from_origin.time(c.road), to_dest.time(c.road)) else {
                continue;
            };
            let handoff = pickup + t_rz;
            let board = handoff + c.service;
            if board > c.time || board + t_zd > d.windows.latest_arrive {
                continue;
            }
            let itinerary = s.labels.itinerary(g, c.node);
            let Ok(tl) = replay(g, c.node, board, &itinerary.links) else {
                debug_assert!(false, "label path not replayable");
                continue;
            };
            let totals = itinerary.totals(g);
            let t_drive = t_dr + t_rz + t_zd;
            out.push(FeasibleMatch {
                rider: rider.id(),
                driver: d.id(),
                variant: Variant::FirstMile,
                transfer_node: Some(c.node),
                handoff_road: c.road,
                itinerary,
                depart_time: d.windows.earliest_depart,
                handoff_time: handoff,
                arrive_time: tl.end_time,
                driver_arrive: board + t_zd,
                t_drive,
                t_shared: t_rz,
                t_transit: totals.in_vehicle,
                t_walk: totals.walk,
                t_wait: totals.wait + tl.idle_wait,
                n_transfers: totals.transfers,
                t_vhrs: rider.direct_time + d.direct_time - t_drive,
                transit_cost: c.cost,
                total_cost: (t_dr + t_rz + c.service) as f64 + c.cost,
            });
            last_road = Some(c.road);
        }
    }
    out
}

/// First-mile feasible matches between every rider and every driver.
pub fn rider_driver_potential_match(
    riders: &[Participant],
    drivers: &[Participant],
    g: &TransitGraph,
    oracle: &TravelTimeOracle,
    params: &SearchParams,
) -> Result<Vec<FeasibleMatch>> {
    let engine = MatchEngine::new(Some(g), oracle, *params, MatchMode::FirstMile)?;
    let r: Vec<&Participant> = riders.iter().collect();
    let d: Vec<&Participant> = drivers.iter().collect();
    Ok(engine.all_matches(&r, &d))
}
