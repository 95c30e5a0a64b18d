//! Independent check of the five feasible-match conditions.
//!
//! Times are recomputed from the road oracle and by replaying the itinerary;
//! optimality of the transit leg is checked against a multi-label
//! (cost, time) search that keeps every non-dominated label.

use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, HashMap};
use std::fmt;

use crate::request::Participant;
use crate::road::TravelTimeOracle;
use crate::time::Seconds;
use crate::transit::{TNode, TransitGraph};

use super::search::{step_time, Direction};
use super::{first_mile, last_mile, match_metrics, replay, FeasibleMatch, ReplayError, SearchParams, Variant, Weights};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Condition {
    /// The driver leaves no earlier than its earliest departure.
    DriverDeparture,
    /// The driver reaches the rider within the rider's departure window
    /// (first mile), or reaches the pick-up point before the rider (last mile).
    Pickup,
    /// The rider arrives by its latest arrival time.
    RiderArrival,
    /// The driver arrives by its latest arrival time.
    DriverArrival,
    /// The transit leg has minimum generalized cost.
    OptimalItinerary,
    /// Reported fields disagree with recomputation or the itinerary is malformed.
    Consistency,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub condition: Condition,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}: {}", self.condition, self.detail)
    }
}

const COST_TOL: f64 = 1e-9;

/// Returns every violated condition; an empty vector means the match is feasible.
pub fn validate_match(
    m: &FeasibleMatch,
    rider: &Participant,
    driver: &Participant,
    graph: Option<&TransitGraph>,
    oracle: &TravelTimeOracle,
    params: &SearchParams,
) -> Vec<Violation> {
    let mut v = Vec::new();
    let mut fail = |condition: Condition, detail: String| v.push(Violation { condition, detail });
    if m.rider != rider.id() || m.driver != driver.id() {
        fail(Condition::Consistency, "participant ids do not match".into());
        return v;
    }
    let (rw, dw) = (&rider.windows, &driver.windows);
    if m.depart_time < dw.earliest_depart {
        fail(Condition::DriverDeparture, format!("departs {} before {}", m.depart_time, dw.earliest_depart));
    }
    let t = |a, b| oracle.time(a, b);
    let z = m.handoff_road;
    match m.variant {
        Variant::Standalone => {
            let (Some(a), Some(b), Some(c)) =
                (t(driver.origin, rider.origin), t(rider.origin, rider.destination), t(rider.destination, driver.destination))
            else {
                fail(Condition::Consistency, "unreachable leg".into());
                return v;
            };
            let pickup = m.depart_time + a;
            if pickup < rw.earliest_depart || pickup > rw.latest_depart {
                fail(Condition::Pickup, format!("pickup {pickup} outside [{}, {}]", rw.earliest_depart, rw.latest_depart));
            }
            if pickup + b > rw.latest_arrive {
                fail(Condition::RiderArrival, format!("rider arrives {}", pickup + b));
            }
            if pickup + b + c > dw.latest_arrive {
                fail(Condition::DriverArrival, format!("driver arrives {}", pickup + b + c));
            }
            if !m.itinerary.links.is_empty() {
                fail(Condition::Consistency, "stand-alone match with transit links".into());
            }
        }
        Variant::FirstMile | Variant::LastMile => {
            let (Some(g), Some(j)) = (graph, m.transfer_node) else {
                fail(Condition::Consistency, "transit match without graph or transfer node".into());
                return v;
            };
            if j as usize >= g.len() || g.nearest_road_node(j) != Some(z) {
                fail(Condition::Consistency, "handoff road node is not the transfer node's road node".into());
                return v;
            }
            if m.variant == Variant::FirstMile {
                let Some(root) = g.destination_anchor(rider.destination) else {
                    fail(Condition::Consistency, "rider destination has no anchor".into());
                    return v;
                };
                if !m.itinerary.connects(g, j, root) {
                    fail(Condition::Consistency, "itinerary does not lead from drop-off to destination".into());
                    return v;
                }
                let (Some(a), Some(b), Some(c)) = (t(driver.origin, rider.origin), t(rider.origin, z), t(z, driver.destination)) else {
                    fail(Condition::Consistency, "unreachable leg".into());
                    return v;
                };
                let pickup = m.depart_time + a;
                if pickup < rw.earliest_depart || pickup > rw.latest_depart {
                    fail(Condition::Pickup, format!("pickup {pickup} outside [{}, {}]", rw.earliest_depart, rw.latest_depart));
                }
                let board = pickup + b + params.service_at(g, j);
                match replay(g, j, board, &m.itinerary.links) {
                    Ok(tl) if tl.end_time > rw.latest_arrive => {
                        fail(Condition::RiderArrival, format!("rider arrives {} after {}", tl.end_time, rw.latest_arrive))
                    }
                    Ok(tl) if tl.end_time != m.arrive_time => {
                        fail(Condition::Consistency, format!("arrival {} reported as {}", tl.end_time, m.arrive_time))
                    }
                    Ok(_) => {}
                    Err(e) => fail(Condition::RiderArrival, replay_detail(e)),
                }
                if board + c > dw.latest_arrive {
                    fail(Condition::DriverArrival, format!("driver arrives {}", board + c));
                }
                let best = pareto_optimum(
                    g,
                    root,
                    rw.latest_arrive,
                    Direction::Backward,
                    &params.weights,
                    first_mile::prune(rider, g, oracle, params),
                    j,
                );
                check_cost(&mut fail, m.itinerary.cost(g, &params.weights), best);
            } else {
                let Some(root) = g.origin_anchor(rider.origin) else {
                    fail(Condition::Consistency, "rider origin has no anchor".into());
                    return v;
                };
                if !m.itinerary.connects(g, root, j) {
                    fail(Condition::Consistency, "itinerary does not lead from origin to pick-up".into());
                    return v;
                }
                let (Some(a), Some(b), Some(c)) = (t(driver.origin, z), t(z, rider.destination), t(rider.destination, driver.destination))
                else {
                    fail(Condition::Consistency, "unreachable leg".into());
                    return v;
                };
                match replay(g, root, rw.earliest_depart, &m.itinerary.links) {
                    Ok(tl) => {
                        let at = tl.end_time;
                        if m.depart_time + a > at {
                            fail(Condition::Pickup, format!("driver reaches pick-up at {} after rider at {at}", m.depart_time + a));
                        }
                        if at + b > rw.latest_arrive {
                            fail(Condition::RiderArrival, format!("rider arrives {}", at + b));
                        }
                        if at + b + c > dw.latest_arrive {
                            fail(Condition::DriverArrival, format!("driver arrives {}", at + b + c));
                        }
                        if at + b != m.arrive_time {
                            fail(Condition::Consistency, format!("arrival {} reported as {}", at + b, m.arrive_time));
                        }
                    }
                    Err(e) => fail(Condition::RiderArrival, replay_detail(e)),
                }
                let best = pareto_optimum(g, root, rw.earliest_depart, Direction::Forward, &params.weights, last_mile::prune(rider), j);
                check_cost(&mut fail, m.itinerary.cost(g, &params.weights), best);
            }
        }
    }
    match match_metrics(m, rider, driver, graph, oracle, params) {
        None => fail(Condition::Consistency, "metrics cannot be recomputed".into()),
        Some(x) => {
            let reported = (m.t_drive, m.t_transit, m.t_walk, m.t_wait, m.n_transfers, m.t_vhrs);
            let want = (x.t_drive, x.t_transit, x.t_walk, x.t_wait, x.n_transfers, x.t_vhrs);
            if reported != want {
                fail(Condition::Consistency, format!("reported metrics {reported:?}, recomputed {want:?}"));
            }
            if x.t_vhrs != rider.direct_time + driver.direct_time - x.t_drive {
                fail(Condition::Consistency, "savings identity broken".into());
            }
        }
    }
    v
}

fn replay_detail(e: ReplayError) -> String {
    match e {
        ReplayError::Broken { link } => format!("itinerary broken at link {link}"),
        ReplayError::Missed { node, arrive, scheduled } => {
            format!("reaches node {node} at {arrive}, after its scheduled departure {scheduled}")
        }
    }
}

fn check_cost(fail: &mut impl FnMut(Condition, String), cost: f64, best: Option<f64>) {
    match best {
        None => fail(Condition::OptimalItinerary, "no time-feasible transit path exists".into()),
        Some(b) if (cost - b).abs() > COST_TOL * b.abs().max(1.0) => {
            fail(Condition::OptimalItinerary, format!("itinerary cost {cost} exceeds optimum {b}"))
        }
        Some(_) => {}
    }
}

struct Entry {
    cost: f64,
    node: TNode,
    time: Seconds,
}

impl PartialEq for Entry {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl Eq for Entry {}
impl PartialOrd for Entry {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Entry {
    fn cmp(&self, o: &Self) -> Ordering {
        self.cost.total_cmp(&o.cost).then(self.node.cmp(&o.node)).then(self.time.cmp(&o.time))
    }
}

/// Minimum cost from `root` to `target` over all paths whose every prefix
/// satisfies the schedule rule and `admit`.
pub fn pareto_optimum(
    g: &TransitGraph,
    root: TNode,
    seed: Seconds,
    dir: Direction,
    w: &Weights,
    admit: impl Fn(TNode, Seconds) -> bool,
    target: TNode,
) -> Option<f64> {
    // A later time is better going backward, an earlier one going forward.
    let no_worse = |a: Seconds, b: Seconds| match dir {
        Direction::Backward => a >= b,
        Direction::Forward => a <= b,
    };
    let mut labels: HashMap<TNode, Vec<(f64, Seconds)>> = HashMap::new();
    let mut heap = BinaryHeap::new();
    labels.insert(root, vec![(0.0, seed)]);
    heap.push(Reverse(Entry { cost: 0.0, node: root, time: seed }));
    while let Some(Reverse(e)) = heap.pop() {
        if !labels.get(&e.node).is_some_and(|ls| ls.contains(&(e.cost, e.time))) {
            continue;
        }
        if e.node == target {
            return Some(e.cost);
        }
        let star = match dir {
            Direction::Backward => g.backward_star(e.node),
            Direction::Forward => g.forward_star(e.node),
        };
        for &(j, k) in star {
            let l = g.link(k);
            let Some(t) = step_time(g, dir, e.time, l.traverse_time as Seconds, j) else { continue };
            if !admit(j, t) {
                continue;
            }
            let c = e.cost + w.of(l.kind) * l.traverse_time as f64;
            let ls = labels.entry(j).or_default();
            if ls.iter().any(|&(c2, t2)| c2 <= c && no_worse(t2, t)) {
                continue;
            }
            ls.retain(|&(c2, t2)| !(c <= c2 && no_worse(t, t2)));
            ls.push((c, t));
            heap.push(Reverse(Entry { cost: c, node: j, time: t }));
        }
    }
    None
}
