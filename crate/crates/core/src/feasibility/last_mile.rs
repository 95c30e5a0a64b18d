//! Last-mile matching: a forward search from each rider's origin; the driver
//! collects the rider where the transit leg ends.

use crate::error::Result;
use crate::request::{Participant, RequestId};
use crate::road::TravelTimeOracle;
use crate::time::Seconds;
use crate::transit::{TNode, TransitGraph};

use super::first_mile::Candidate;
use super::search::{label_search, Direction, LabelSet};
use super::{replay, FeasibleMatch, MatchEngine, MatchMode, SearchParams, Variant};

#[derive(Clone, Debug)]
pub struct RiderSearch {
    pub rider: RequestId,
    pub labels: LabelSet,
    pub candidates: Vec<Candidate>,
}

/// Labels later than the rider's latest arrival are discarded.
pub fn prune(rider: &Participant) -> impl Fn(TNode, Seconds) -> bool + '_ {
    move |_, t| t <= rider.windows.latest_arrive
}

/// Runs the forward search for `rider`; `None` when its origin has no anchor.
pub fn search_rider(rider: &Participant, g: &TransitGraph, params: &SearchParams, trace: bool) -> Option<RiderSearch> {
    let root = g.origin_anchor(rider.origin)?;
    let labels = label_search(g, root, rider.windows.earliest_depart, Direction::Forward, &params.weights, prune(rider), trace);
    let mut candidates: Vec<Candidate> = labels
        .settled()
        .iter()
        .filter(|&&v| v != root)
        .filter_map(|&v| {
            let road = g.nearest_road_node(v)?;
            let l = labels.label(v)?;
            Some(Candidate { node: v, road, cost: l.cost, time: l.time, service: 0 })
        })
        .collect();
    candidates.sort_by(|a, b| a.road.cmp(&b.road).then(a.cost.total_cmp(&b.cost)).then(a.node.cmp(&b.node)));
    Some(RiderSearch { rider: rider.id(), labels, candidates })
}

/// Checks drivers against a finished rider search, one match per pick-up road node.
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
    let to_rider_dest = oracle.to_target(rider.destination);
    for d in drivers {
        let Some(t_rd) = oracle.to_target(d.destination).time(rider.destination) else {
            continue;
        };
        let from_driver = oracle.from_source(d.origin);
        let mut last_road = None;
        for c in &s.candidates {
            if last_road == Some(c.road) {
                continue;
            }
            let (Some(t_dz), Some(t_zr)) = (from_driver.time(c.road), to_rider_dest.time(c.road)) else {
                continue;
            };
            let at = c.time;
            if d.windows.earliest_depart + t_dz > at
                || at + t_zr > rider.windows.latest_arrive
                || at + t_zr + t_rd > d.windows.latest_arrive
            {
                continue;
            }
            let itinerary = s.labels.itinerary(g, c.node);
            let Ok(tl) = replay(g, s.labels.root, rider.windows.earliest_depart, &itinerary.links) else {
                debug_assert!(false, "label path not replayable");
                continue;
            };
            let totals = itinerary.totals(g);
            let t_drive = t_dz + t_zr + t_rd;
            out.push(FeasibleMatch {
                rider: rider.id(),
                driver: d.id(),
                variant: Variant::LastMile,
                transfer_node: Some(c.node),
                handoff_road: c.road,
                itinerary,
                depart_time: d.windows.earliest_depart,
                handoff_time: at,
                arrive_time: at + t_zr,
                driver_arrive: at + t_zr + t_rd,
                t_drive,
                t_shared: t_zr,
                t_transit: totals.in_vehicle,
                t_walk: totals.walk,
                t_wait: totals.wait + tl.idle_wait,
                n_transfers: totals.transfers,
                t_vhrs: rider.direct_time + d.direct_time - t_drive,
                transit_cost: c.cost,
                total_cost: c.cost + t_zr as f64,
            });
            last_road = Some(c.road);
        }
    }
    out
}

/// Last-mile feasible matches between every rider and every driver.
pub fn last_mile_potential_match(
    riders: &[Participant],
    drivers: &[Participant],
    g: &TransitGraph,
    oracle: &TravelTimeOracle,
    params: &SearchParams,
) -> Result<Vec<FeasibleMatch>> {
    let engine = MatchEngine::new(Some(g), oracle, *params, MatchMode::LastMile)?;
    let r: Vec<&Participant> = riders.iter().collect();
    let d: Vec<&Participant> = drivers.iter().collect();
    Ok(engine.all_matches(&r, &d))
}
