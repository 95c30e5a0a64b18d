//! Feasible rider-driver matches.
//!
//! A first-mile match has the driver carry the rider from the rider's origin
//! to a road node next to a transit node, from which the rider continues by
//! transit. A last-mile match has the rider ride transit first and the driver
//! finish the trip. A stand-alone match covers the whole trip by car.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::request::{Participant, RequestId};
use crate::road::{NodeIx, TravelTimeOracle};
use crate::time::Seconds;
use crate::transit::{LinkKind, TLink, TNode, TransitGraph};

pub mod first_mile;
pub mod last_mile;
mod search;
pub mod standalone;
pub mod validate;

pub use first_mile::rider_driver_potential_match;
pub use last_mile::last_mile_potential_match;
pub use search::{Direction, Label, LabelSet, Reject, TraceEvent};
pub use standalone::standalone_rs_match;
pub use validate::{validate_match, Condition, Violation};

/// Per-kind generalized-cost multipliers.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Weights {
    /// Access and egress walking.
    pub access: f64,
    pub in_vehicle: f64,
    pub wait_transfer: f64,
    pub walk_transfer: f64,
}

impl Default for Weights {
    fn default() -> Self {
        Weights { access: 1.5, in_vehicle: 1.0, wait_transfer: 2.0, walk_transfer: 2.0 }
    }
}

impl Weights {
    pub const UNIT: Weights = Weights { access: 1.0, in_vehicle: 1.0, wait_transfer: 1.0, walk_transfer: 1.0 };

    pub fn of(&self, kind: LinkKind) -> f64 {
        match kind {
            LinkKind::Access | LinkKind::Egress => self.access,
            LinkKind::InVehicle => self.in_vehicle,
            LinkKind::WaitTransfer => self.wait_transfer,
            LinkKind::WalkTransfer => self.walk_transfer,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.access, self.in_vehicle, self.wait_transfer, self.walk_transfer];
        if all.iter().all(|w| w.is_finite() && *w > 0.0) {
            Ok(())
        } else {
            Err(Error::Config(format!("link weights must be positive, got {self:?}")))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchParams {
    pub weights: Weights,
    /// Time to leave the car and board transit at a drop-off event.
    pub service_time: Seconds,
}

impl Default for SearchParams {
    fn default() -> Self {
        SearchParams { weights: Weights::default(), service_time: 120 }
    }
}

impl SearchParams {
    pub fn validate(&self) -> Result<()> {
        self.weights.validate()?;
        if self.service_time < 0 {
            return Err(Error::Config("service time must be nonnegative".into()));
        }
        Ok(())
    }

    /// Mode-change time charged when the rider is handed over at `v`.
    /// Anchors reach transit through access links that already include it.
    pub(crate) fn service_at(&self, graph: &TransitGraph, v: TNode) -> Seconds {
        if graph.is_anchor(v) {
            0
        } else {
            self.service_time
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    FirstMile,
    LastMile,
    Standalone,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::FirstMile => "first-mile",
            Variant::LastMile => "last-mile",
            Variant::Standalone => "standalone",
        })
    }
}

impl FromStr for Variant {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim() {
            "first-mile" | "fm" => Ok(Variant::FirstMile),
            "last-mile" | "lm" => Ok(Variant::LastMile),
            "standalone" | "rs" => Ok(Variant::Standalone),
            other => Err(format!("unknown variant {other:?}")),
        }
    }
}

/// Time spent per activity along an itinerary.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct LegTotals {
    pub in_vehicle: Seconds,
    pub walk: Seconds,
    pub wait: Seconds,
    pub transfers: u32,
}

/// Ordered transit links; consecutive links share endpoints.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Itinerary {
    pub links: Vec<TLink>,
}

impl Itinerary {
    pub fn totals(&self, g: &TransitGraph) -> LegTotals {
        let mut t = LegTotals::default();
        for &k in &self.links {
            let l = g.link(k);
            let (tt, wt) = (l.traverse_time as Seconds, l.walk_time as Seconds);
            match l.kind {
                LinkKind::InVehicle => t.in_vehicle += tt,
                LinkKind::Access | LinkKind::Egress => t.walk += tt,
                LinkKind::WaitTransfer => t.wait += tt,
                LinkKind::WalkTransfer => {
                    t.walk += wt;
                    t.wait += tt - wt;
                }
            }
            if l.kind.is_transfer() && g.is_event(l.from) {
                t.transfers += 1;
            }
        }
        t
    }

    pub fn cost(&self, g: &TransitGraph, w: &Weights) -> f64 {
        self.links
            .iter()
            .map(|&k| {
                let l = g.link(k);
                w.of(l.kind) * l.traverse_time as f64
            })
            .sum()
    }

    /// Checks that links chain from `start` to `end`.
    pub fn connects(&self, g: &TransitGraph, start: TNode, end: TNode) -> bool {
        let mut at = start;
        for &k in &self.links {
            if k as usize >= g.links().len() || g.link(k).from != at {
                return false;
            }
            at = g.link(k).to;
        }
        at == end
    }

    pub fn to_field(&self) -> String {
        self.links.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(";")
    }

    pub fn parse_field(s: &str) -> Option<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Some(Itinerary::default());
        }
        s.split(';').map(|x| x.trim().parse().ok()).collect::<Option<Vec<_>>>().map(|links| Itinerary { links })
    }
}

/// Outcome of replaying an itinerary forward in time.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Timeline {
    pub end_time: Seconds,
    /// Time spent waiting for scheduled departures, including at the start node.
    pub idle_wait: Seconds,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ReplayError {
    Broken { link: TLink },
    Missed { node: TNode, arrive: Seconds, scheduled: Seconds },
}

/// Replays `links` from `start` at time `t`; a scheduled node is caught only
/// if reached no later than its scheduled time, and is left at that time.
pub fn replay(g: &TransitGraph, start: TNode, mut t: Seconds, links: &[TLink]) -> std::result::Result<Timeline, ReplayError> {
    let mut idle = 0;
    let mut at = start;
    let hold = |node: TNode, t: &mut Seconds, idle: &mut Seconds| -> std::result::Result<(), ReplayError> {
        if let Some(s) = g.node(node).sched_time {
            if *t > s {
                return Err(ReplayError::Missed { node, arrive: *t, scheduled: s });
            }
            *idle += s - *t;
            *t = s;
        }
        Ok(())
    };
    hold(at, &mut t, &mut idle)?;
    for &k in links {
        if k as usize >= g.links().len() || g.link(k).from != at {
            return Err(ReplayError::Broken { link: k });
        }
        let l = g.link(k);
        t += l.traverse_time as Seconds;
        at = l.to;
        hold(at, &mut t, &mut idle)?;
    }
    Ok(Timeline { end_time: t, idle_wait: idle })
}

/// A feasible (rider, driver, transfer point, itinerary) tuple with its
/// time decomposition.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FeasibleMatch {
    pub rider: RequestId,
    pub driver: RequestId,
    pub variant: Variant,
    /// Drop-off (first mile) or pick-up (last mile) transit node.
    pub transfer_node: Option<TNode>,
    /// Road node where the rider changes mode; the rider's destination for stand-alone matches.
    pub handoff_road: NodeIx,
    pub itinerary: Itinerary,
    /// Driver departure from its origin.
    pub depart_time: Seconds,
    /// Time the driver and rider meet at `handoff_road`.
    pub handoff_time: Seconds,
    /// Rider arrival at its destination.
    pub arrive_time: Seconds,
    /// Driver arrival at its destination.
    pub driver_arrive: Seconds,
    pub t_drive: Seconds,
    /// Driving time with the rider on board.
    pub t_shared: Seconds,
    pub t_transit: Seconds,
    pub t_walk: Seconds,
    pub t_wait: Seconds,
    pub n_transfers: u32,
    pub t_vhrs: Seconds,
    /// Generalized cost of the transit part.
    pub transit_cost: f64,
    /// Generalized cost including shared driving.
    pub total_cost: f64,
}

impl FeasibleMatch {
    /// Ordering key used to give edges stable ids.
    pub fn canonical_key(&self) -> (RequestId, RequestId, Variant, NodeIx, TNode) {
        (self.rider, self.driver, self.variant, self.handoff_road, self.transfer_node.unwrap_or(TNode::MAX))
    }
}

/// Orders matches canonically.
pub fn sort_matches(ms: &mut [FeasibleMatch]) {
    ms.sort_by_key(|a| a.canonical_key());
}

/// Metrics recomputed from a match's itinerary and the road oracle.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MatchMetrics {
    pub t_drive: Seconds,
    pub t_shared: Seconds,
    pub t_transit: Seconds,
    pub t_walk: Seconds,
    pub t_wait: Seconds,
    pub n_transfers: u32,
    pub t_vhrs: Seconds,
}

/// Recomputes driving, transit, walking and waiting times and the savings of `m`.
pub fn match_metrics(
    m: &FeasibleMatch,
    rider: &Participant,
    driver: &Participant,
    graph: Option<&TransitGraph>,
    oracle: &TravelTimeOracle,
    params: &SearchParams,
) -> Option<MatchMetrics> {
    let t = |a: NodeIx, b: NodeIx| oracle.time(a, b);
    let z = m.handoff_road;
    let (t_drive, t_shared, start) = match m.variant {
        Variant::FirstMile => {
            let a = t(driver.origin, rider.origin)?;
            let b = t(rider.origin, z)?;
            let c = t(z, driver.destination)?;
            let g = graph?;
            let j = m.transfer_node?;
            let board = m.depart_time + a + b + params.service_at(g, j);
            (a + b + c, b, Some((j, board)))
        }
        Variant::LastMile => {
            let a = t(driver.origin, z)?;
            let b = t(z, rider.destination)?;
            let c = t(rider.destination, driver.destination)?;
            let g = graph?;
            let root = g.origin_anchor(rider.origin)?;
            (a + b + c, b, Some((root, rider.windows.earliest_depart)))
        }
        Variant::Standalone => {
            let a = t(driver.origin, rider.origin)?;
            let b = t(rider.origin, rider.destination)?;
            let c = t(rider.destination, driver.destination)?;
            (a + b + c, b, None)
        }
    };
    let (totals, idle) = match (graph, start) {
        (Some(g), Some((node, at))) => {
            let tl = replay(g, node, at, &m.itinerary.links).ok()?;
            (m.itinerary.totals(g), tl.idle_wait)
        }
        _ => (LegTotals::default(), 0),
    };
    Some(MatchMetrics {
        t_drive,
        t_shared,
        t_transit: totals.in_vehicle,
        t_walk: totals.walk,
        t_wait: totals.wait + idle,
        n_transfers: totals.transfers,
        t_vhrs: rider.direct_time + driver.direct_time - t_drive,
    })
}

/// Which match families an engine generates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatchMode {
    FirstMile,
    LastMile,
    Standalone,
    /// First-mile transit matches plus stand-alone ridesharing.
    Combined,
}

impl MatchMode {
    pub fn needs_transit(self) -> bool {
        !matches!(self, MatchMode::Standalone)
    }
}

/// Per-rider search results reusable against later drivers.
#[derive(Clone, Debug)]
pub struct RiderState {
    pub rider: RequestId,
    first_mile: Option<first_mile::RiderSearch>,
    last_mile: Option<last_mile::RiderSearch>,
}

impl RiderState {
    pub fn settled_nodes(&self) -> usize {
        self.first_mile.as_ref().map_or(0, |s| s.labels.settled().len()) + self.last_mile.as_ref().map_or(0, |s| s.labels.settled().len())
    }
}

/// Shared, immutable context for feasibility searches.
#[derive(Clone, Copy, Debug)]
pub struct MatchEngine<'a> {
    pub graph: Option<&'a TransitGraph>,
    pub oracle: &'a TravelTimeOracle,
    pub params: SearchParams,
    pub mode: MatchMode,
}

impl<'a> MatchEngine<'a> {
    pub fn new(graph: Option<&'a TransitGraph>, oracle: &'a TravelTimeOracle, params: SearchParams, mode: MatchMode) -> Result<Self> {
        params.validate()?;
        match graph {
            Some(g) => g.check_road(oracle.graph())?,
            None if mode.needs_transit() => {
                return Err(Error::Config(format!("mode {mode:?} needs a transit graph")));
            }
            None => {}
        }
        Ok(MatchEngine { graph, oracle, params, mode })
    }

    pub fn prepare(&self, rider: &Participant) -> RiderState {
        let g = self.graph;
        let fm = matches!(self.mode, MatchMode::FirstMile | MatchMode::Combined);
        let lm = self.mode == MatchMode::LastMile;
        RiderState {
            rider: rider.id(),
            first_mile: g.filter(|_| fm).and_then(|g| first_mile::search_rider(rider, g, self.oracle, &self.params, false)),
            last_mile: g.filter(|_| lm).and_then(|g| last_mile::search_rider(rider, g, &self.params, false)),
        }
    }

    /// Matches between one prepared rider and `drivers`, canonically ordered.
    pub fn matches_for(&self, state: &RiderState, rider: &Participant, drivers: &[&Participant]) -> Vec<FeasibleMatch> {
        let mut out = Vec::new();
        if let (Some(g), Some(s)) = (self.graph, &state.first_mile) {
            out.extend(first_mile::match_drivers(s, rider, drivers, g, self.oracle));
        }
        if let (Some(g), Some(s)) = (self.graph, &state.last_mile) {
            out.extend(last_mile::match_drivers(s, rider, drivers, g, self.oracle));
        }
        if matches!(self.mode, MatchMode::Standalone | MatchMode::Combined) {
            out.extend(drivers.iter().filter_map(|d| standalone::check_pair(rider, d, self.oracle)));
        }
        sort_matches(&mut out);
        out
    }

    /// All matches between `riders` and `drivers`; riders are searched in parallel.
    pub fn all_matches(&self, riders: &[&Participant], drivers: &[&Participant]) -> Vec<FeasibleMatch> {
        let mut out: Vec<FeasibleMatch> = riders
            .par_iter()
            .flat_map_iter(|r| {
                let state = self.prepare(r);
                self.matches_for(&state, r, drivers)
            })
            .collect();
        sort_matches(&mut out);
        out
    }
}
