//! Stand-alone ridesharing: the driver carries the rider door to door.

use crate::request::Participant;
use crate::road::TravelTimeOracle;

use super::{sort_matches, FeasibleMatch, Itinerary, Variant};

/// The chained drive OR(d) -> OR(r) -> DS(r) -> DS(d), if it fits both windows.
pub fn check_pair(rider: &Participant, driver: &Participant, oracle: &TravelTimeOracle) -> Option<FeasibleMatch> {
    let t_dr = oracle.time(driver.origin, rider.origin)?;
    let t_rr = oracle.time(rider.origin, rider.destination)?;
    let t_rd = oracle.time(rider.destination, driver.destination)?;
    let (rw, dw) = (&rider.windows, &driver.windows);
    let pickup = dw.earliest_depart + t_dr;
    let drop = pickup + t_rr;
    let end = drop + t_rd;
    if pickup < rw.earliest_depart || pickup > rw.latest_depart || drop > rw.latest_arrive || end > dw.latest_arrive {
        return None;
    }
    let t_drive = t_dr + t_rr + t_rd;
    Some(FeasibleMatch {
        rider: rider.id(),
        driver: driver.id(),
        variant: Variant::Standalone,
        transfer_node: None,
        handoff_road: rider.destination,
        itinerary: Itinerary::default(),
        depart_time: dw.earliest_depart,
        handoff_time: pickup,
        arrive_time: drop,
        driver_arrive: end,
        t_drive,
        t_shared: t_rr,
        t_transit: 0,
        t_walk: 0,
        t_wait: 0,
        n_transfers: 0,
        t_vhrs: rider.direct_time + driver.direct_time - t_drive,
        transit_cost: 0.0,
        total_cost: (t_dr + t_rr) as f64,
    })
}

pub fn standalone_rs_match(riders: &[Participant], drivers: &[Participant], oracle: &TravelTimeOracle) -> Vec<FeasibleMatch> {
    let mut out: Vec<FeasibleMatch> = riders.iter().flat_map(|r| drivers.iter().filter_map(move |d| check_pair(r, d, oracle))).collect();
    sort_matches(&mut out);
    out
}
