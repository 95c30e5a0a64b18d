//! Delimited files of feasible matches.
//!
//! Columns: `rider, driver, dropoff_node, depart_time, arrive_time, t_drive,
//! t_transit, t_walk, t_wait, n_transfers, t_vhrs, itinerary`, followed by
//! `variant, handoff_road, handoff_time, driver_arrive, t_shared,
//! transit_cost, total_cost`. `dropoff_node` is the transit node where the
//! rider changes mode and is empty for stand-alone matches; `handoff_road` is
//! the external id of its road node.

use std::io::{Read, Write};
use std::path::Path;

use serde::Deserialize;

use crate::feasibility::{FeasibleMatch, Itinerary, Variant};
use crate::road::{for_each_row, RoadGraph};
use crate::transit::TNode;
use crate::{Error, Result, Seconds};

pub const MATCH_COLUMNS: &str = "rider,driver,dropoff_node,depart_time,arrive_time,t_drive,t_transit,t_walk,t_wait,n_transfers,t_vhrs,itinerary,variant,handoff_road,handoff_time,driver_arrive,t_shared,transit_cost,total_cost";

pub fn write_matches(mut w: impl Write, header: &[String], matches: &[FeasibleMatch], road: &RoadGraph) -> std::io::Result<()> {
    for line in header {
        writeln!(w, "# {line}")?;
    }
    writeln!(w, "{MATCH_COLUMNS}")?;
    for m in matches {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            m.rider,
            m.driver,
            m.transfer_node.map(|j| j.to_string()).unwrap_or_default(),
            m.depart_time,
            m.arrive_time,
            m.t_drive,
            m.t_transit,
            m.t_walk,
            m.t_wait,
            m.n_transfers,
            m.t_vhrs,
            m.itinerary.to_field(),
            m.variant,
            road.id(m.handoff_road),
            m.handoff_time,
            m.driver_arrive,
            m.t_shared,
            m.transit_cost,
            m.total_cost,
        )?;
    }
    Ok(())
}

#[derive(Deserialize)]
struct MatchRow {
    rider: u64,
    driver: u64,
    dropoff_node: Option<TNode>,
    depart_time: Seconds,
    arrive_time: Seconds,
    t_drive: Seconds,
    t_transit: Seconds,
    t_walk: Seconds,
    t_wait: Seconds,
    n_transfers: u32,
    t_vhrs: Seconds,
    itinerary: String,
    variant: String,
    handoff_road: u64,
    handoff_time: Seconds,
    driver_arrive: Seconds,
    t_shared: Seconds,
    transit_cost: f64,
    total_cost: f64,
}

pub fn read_matches(file: &str, r: impl Read, road: &RoadGraph) -> Result<Vec<FeasibleMatch>> {
    let mut out = Vec::new();
    for_each_row::<MatchRow>(file, r, |line, row| {
        let variant: Variant = row.variant.parse().map_err(|e: String| Error::parse(file, line, e))?;
        let itinerary = Itinerary::parse_field(&row.itinerary).ok_or_else(|| Error::parse(file, line, "malformed itinerary"))?;
        if (variant == Variant::Standalone) != row.dropoff_node.is_none() {
            return Err(Error::parse(file, line, "dropoff_node must be empty exactly for stand-alone matches"));
        }
        let handoff_road =
            road.index_of(row.handoff_road).ok_or_else(|| Error::parse(file, line, format!("unknown road node {}", row.handoff_road)))?;
        out.push(FeasibleMatch {
            rider: row.rider,
            driver: row.driver,
            variant,
            transfer_node: row.dropoff_node,
            handoff_road,
            itinerary,
            depart_time: row.depart_time,
            handoff_time: row.handoff_time,
            arrive_time: row.arrive_time,
            driver_arrive: row.driver_arrive,
            t_drive: row.t_drive,
            t_shared: row.t_shared,
            t_transit: row.t_transit,
            t_walk: row.t_walk,
            t_wait: row.t_wait,
            n_transfers: row.n_transfers,
            t_vhrs: row.t_vhrs,
            transit_cost: row.transit_cost,
            total_cost: row.total_cost,
        });
        Ok(())
    })?;
    Ok(out)
}

pub fn load_matches(path: &Path, road: &RoadGraph) -> Result<Vec<FeasibleMatch>> {
    let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_matches(&path.display().to_string(), f, road)
}
