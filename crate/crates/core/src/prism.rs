//! Space-time prism predicates for a participant on the road network.

use crate::request::Participant;
use crate::road::{NodeIx, TravelTimeOracle};
use crate::time::Seconds;

/// `n` is reachable by `tau` leaving the origin no earlier than the earliest departure.
pub fn in_forward_cone(p: &Participant, n: NodeIx, tau: Seconds, oracle: &TravelTimeOracle) -> bool {
    match oracle.time(p.origin, n) {
        Some(t) => tau >= p.windows.earliest_depart + t && tau <= p.windows.latest_arrive,
        None => false,
    }
}

/// The destination is still reachable by the latest arrival time leaving `n` at `tau`.
pub fn in_backward_cone(p: &Participant, n: NodeIx, tau: Seconds, oracle: &TravelTimeOracle) -> bool {
    match oracle.time(n, p.destination) {
        Some(t) => tau <= p.windows.latest_arrive - t && tau >= p.windows.earliest_depart,
        None => false,
    }
}

pub fn in_stp(p: &Participant, n: NodeIx, tau: Seconds, oracle: &TravelTimeOracle) -> bool {
    in_forward_cone(p, n, tau, oracle) && in_backward_cone(p, n, tau, oracle)
}

/// Potential path area: `n` can be visited within the total time budget.
pub fn in_ppa(p: &Participant, n: NodeIx, oracle: &TravelTimeOracle) -> bool {
    match (oracle.time(p.origin, n), oracle.time(n, p.destination)) {
        (Some(a), Some(b)) => a + b <= p.windows.latest_arrive - p.windows.earliest_depart,
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geo::{DistanceMetric, Point};
    use crate::request::{Request, Role};
    use crate::road::RoadGraph;
    use std::sync::Arc;

    // Driver road network of the algorithm illustration, in minutes.
    fn fixture() -> (TravelTimeOracle, Participant) {
        let (od, or, n1, n2, dd) = (1u64, 2, 3, 4, 5);
        let g = RoadGraph::new(
            DistanceMetric::Euclidean,
            (1..=6).map(|i| (i, Point::new(i as f64, 0.0))),
            [(od, or, 10), (or, dd, 6), (or, n1, 5), (or, n2, 6), (n2, dd, 7), (n1, dd, 5)],
        )
        .unwrap();
        let o = TravelTimeOracle::new(Arc::new(g));
        let d = Participant::new(
            Request {
                id: 1,
                role: Role::Driver,
                origin: od,
                destination: dd,
                announce_time: 0,
                pref_depart: Some(0),
                pref_arrive: Some(20),
                sched_dev: 0,
                travel_delay: 4,
            },
            &o,
        )
        .unwrap();
        (o, d)
    }

    #[test]
    fn cones_on_driver_fixture() {
        let (o, d) = fixture();
        let ix = |id| o.graph().index_of(id).unwrap();
        assert!(in_forward_cone(&d, d.origin, 0, &o));
        assert!(!in_forward_cone(&d, d.origin, 21, &o));
        assert!(in_forward_cone(&d, ix(2), 10, &o));
        assert!(!in_forward_cone(&d, ix(2), 9, &o));
        assert!(in_backward_cone(&d, d.destination, 20, &o));
        assert!(in_backward_cone(&d, ix(3), 15, &o));
        assert!(!in_backward_cone(&d, ix(3), 16, &o));
        assert!(in_forward_cone(&d, ix(4), 16, &o));
        assert!(!in_stp(&d, ix(4), 16, &o));
        assert!(in_ppa(&d, ix(3), &o));
        assert!(!in_ppa(&d, ix(4), &o));
    }

    #[test]
    fn unreachable_is_outside() {
        let (o, d) = fixture();
        let isolated = o.graph().index_of(6).unwrap();
        assert!(!in_forward_cone(&d, isolated, 10, &o));
        assert!(!in_backward_cone(&d, isolated, 10, &o));
        assert!(!in_ppa(&d, isolated, &o));
    }
}
