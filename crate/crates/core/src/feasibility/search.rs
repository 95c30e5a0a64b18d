//! Single-label generalized-cost label setting over the transit graph.

use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, HashMap, HashSet};

use crate::time::Seconds;
use crate::transit::{TLink, TNode, TransitGraph};

use super::{Itinerary, Weights};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    /// From the destination toward possible drop-off nodes; times are latest departures.
    Backward,
    /// From the origin toward possible pick-up nodes; times are earliest arrivals.
    Forward,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Label {
    pub time: Seconds,
    pub cost: f64,
    /// Link to the node's successor (backward) or predecessor (forward).
    pub via: Option<TLink>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Reject {
    /// The scheduled departure cannot be made.
    Schedule,
    /// The time prune failed.
    Prune,
    /// The cost did not improve.
    NotImproved,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TraceEvent {
    Settled { node: TNode, time: Seconds, cost: f64 },
    Updated { node: TNode, time: Seconds, cost: f64, via: TLink },
    Rejected { node: TNode, time: Seconds, cost: f64, via: TLink, reason: Reject },
}

/// Labels produced by one search.
#[derive(Clone, Debug)]
pub struct LabelSet {
    pub direction: Direction,
    pub root: TNode,
    labels: HashMap<TNode, Label>,
    settled: Vec<TNode>,
    trace: Option<Vec<TraceEvent>>,
}

impl LabelSet {
    pub fn label(&self, v: TNode) -> Option<&Label> {
        self.labels.get(&v)
    }

    /// Nodes in extraction order.
    pub fn settled(&self) -> &[TNode] {
        &self.settled
    }

    pub fn trace(&self) -> Option<&[TraceEvent]> {
        self.trace.as_deref()
    }

    /// Path between `v` and the root in travel order.
    pub fn itinerary(&self, g: &TransitGraph, v: TNode) -> Itinerary {
        let mut links = Vec::new();
        let mut at = v;
        while let Some(k) = self.labels.get(&at).and_then(|l| l.via) {
            links.push(k);
            let l = g.link(k);
            at = match self.direction {
                Direction::Backward => l.to,
                Direction::Forward => l.from,
            };
        }
        if self.direction == Direction::Forward {
            links.reverse();
        }
        Itinerary { links }
    }
}

#[derive(PartialEq)]
struct Key(f64, TNode);

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0).then(self.1.cmp(&other.1))
    }
}

/// New time label after crossing a link of `dt` seconds into `v`, or `None`
/// when `v`'s scheduled departure cannot be served.
pub(crate) fn step_time(g: &TransitGraph, dir: Direction, from: Seconds, dt: Seconds, v: TNode) -> Option<Seconds> {
    let sched = g.node(v).sched_time;
    match dir {
        Direction::Backward => {
            let t = from - dt;
            match sched {
                Some(s) if t < s => None,
                Some(s) => Some(s),
                None => Some(t),
            }
        }
        Direction::Forward => {
            let t = from + dt;
            match sched {
                Some(s) if t > s => None,
                Some(s) => Some(s),
                None => Some(t),
            }
        }
    }
}

/// Label-setting search from `root`. `admit(v, time)` is the time prune
/// applied to every tentative update.
pub(crate) fn label_search(
    g: &TransitGraph,
    root: TNode,
    seed: Seconds,
    dir: Direction,
    w: &Weights,
    admit: impl Fn(TNode, Seconds) -> bool,
    trace: bool,
) -> LabelSet {
    let mut labels: HashMap<TNode, Label> = HashMap::new();
    let mut done: HashSet<TNode> = HashSet::new();
    let mut settled = Vec::new();
    let mut events = trace.then(Vec::new);
    let mut heap = BinaryHeap::new();
    labels.insert(root, Label { time: seed, cost: 0.0, via: None });
    heap.push(Reverse(Key(0.0, root)));
    while let Some(Reverse(Key(cost, i))) = heap.pop() {
        let li = labels[&i];
        if done.contains(&i) || li.cost != cost {
            continue;
        }
        done.insert(i);
        settled.push(i);
        if let Some(ev) = events.as_mut() {
            ev.push(TraceEvent::Settled { node: i, time: li.time, cost });
        }
        let star = match dir {
            Direction::Backward => g.backward_star(i),
            Direction::Forward => g.forward_star(i),
        };
        for &(j, k) in star {
            let l = g.link(k);
            let new_cost = cost + w.of(l.kind) * l.traverse_time as f64;
            let outcome = match step_time(g, dir, li.time, l.traverse_time as Seconds, j) {
                None => Err((Reject::Schedule, li.time)),
                Some(t) => {
                    let improves = labels.get(&j).is_none_or(|lj| new_cost < lj.cost);
                    if !improves {
                        Err((Reject::NotImproved, t))
                    } else if !admit(j, t) {
                        Err((Reject::Prune, t))
                    } else {
                        Ok(t)
                    }
                }
            };
            match outcome {
                Ok(t) => {
                    labels.insert(j, Label { time: t, cost: new_cost, via: Some(k) });
                    heap.push(Reverse(Key(new_cost, j)));
                    if let Some(ev) = events.as_mut() {
                        ev.push(TraceEvent::Updated { node: j, time: t, cost: new_cost, via: k });
                    }
                }
                Err((reason, t)) => {
                    if let Some(ev) = events.as_mut() {
                        ev.push(TraceEvent::Rejected { node: j, time: t, cost: new_cost, via: k, reason });
                    }
                }
            }
        }
    }
    // Unsettled entries cannot exist once the heap drains; keep settled labels only.
    labels.retain(|v, _| done.contains(v));
    LabelSet { direction: dir, root, labels, settled, trace: events }
}
