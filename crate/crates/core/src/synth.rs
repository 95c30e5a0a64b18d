//! Synthetic networks for experiments without external data.
//!
//! [`synth_city`] lays out a square street grid with bus lines confined to a
//! central core, leaving suburbs beyond walking distance of any stop.
//! [`twin_cities_scale_feed`] produces a feed with the route, stop and trip
//! counts of the Twin Cities Metro Transit feed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::geo::{DistanceMetric, Point};
use crate::gtfs::{GtfsFeed, Route, Stop, StopTime, Trip};
use crate::road::RoadGraph;
use crate::time::{HOUR, MINUTE};
use crate::{Error, Result, Seconds};

const SERVICE_ID: &str = "daily";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CityParams {
    /// Intersections per side.
    pub grid: u32,
    /// Miles between adjacent intersections.
    pub block_len: f64,
    pub street_mph: f64,
    /// Every `arterial_every`-th street is an arterial.
    pub arterial_every: u32,
    pub arterial_mph: f64,
    /// Half-width of the served core, in blocks.
    pub core_half_width: u32,
    /// Blocks between parallel bus lines.
    pub line_spacing: u32,
    /// Blocks between stops along a line.
    pub stop_spacing: u32,
    /// Bus running time per block.
    pub bus_block_time: Seconds,
    pub headway: Seconds,
    pub service_start: Seconds,
    pub service_end: Seconds,
}

impl Default for CityParams {
    fn default() -> Self {
        CityParams {
            grid: 41,
            block_len: 0.25,
            street_mph: 25.0,
            arterial_every: 4,
            arterial_mph: 40.0,
            core_half_width: 10,
            line_spacing: 4,
            stop_spacing: 2,
            bus_block_time: 60,
            headway: 10 * MINUTE,
            service_start: 5 * HOUR,
            service_end: 13 * HOUR,
        }
    }
}

impl CityParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(format!("synthetic city: {m}")));
        if self.grid < 2 {
            return bad("grid needs at least two intersections per side");
        }
        if !(self.block_len > 0.0 && self.street_mph > 0.0 && self.arterial_mph > 0.0) {
            return bad("block length and speeds must be positive");
        }
        if self.arterial_every == 0 || self.line_spacing == 0 || self.stop_spacing == 0 {
            return bad("spacings must be positive");
        }
        if self.bus_block_time <= 0 || self.headway <= 0 || self.service_end <= self.service_start {
            return bad("bus times and service span must be positive");
        }
        if 2 * self.core_half_width >= self.grid {
            return bad("core must be smaller than the city");
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct SyntheticCity {
    pub road: RoadGraph,
    pub feed: GtfsFeed,
}

fn block_time(miles: f64, mph: f64) -> u32 {
    (miles / mph * 3600.0).round().max(1.0) as u32
}

pub fn synth_city(p: &CityParams) -> Result<SyntheticCity> {
    p.validate()?;
    let n = p.grid;
    let id = |x: u32, y: u32| (y * n + x + 1) as u64;
    let at = |x: u32, y: u32| Point::new(x as f64 * p.block_len, y as f64 * p.block_len);
    let street = |k: u32| {
        if k.is_multiple_of(p.arterial_every) {
            block_time(p.block_len, p.arterial_mph)
        } else {
            block_time(p.block_len, p.street_mph)
        }
    };
    let mut nodes = Vec::with_capacity((n * n) as usize);
    let mut arcs = Vec::new();
    for y in 0..n {
        for x in 0..n {
            nodes.push((id(x, y), at(x, y)));
            if x + 1 < n {
                let t = street(y);
                arcs.push((id(x, y), id(x + 1, y), t));
                arcs.push((id(x + 1, y), id(x, y), t));
            }
            if y + 1 < n {
                let t = street(x);
                arcs.push((id(x, y), id(x, y + 1), t));
                arcs.push((id(x, y + 1), id(x, y), t));
            }
        }
    }
    let road = RoadGraph::new(DistanceMetric::Euclidean, nodes, arcs)?;

    // Bus lines along core rows and columns, both directions.
    let c = n / 2;
    let (lo, hi) = (c - p.core_half_width, c + p.core_half_width);
    let mut offsets = Vec::new();
    let mut k = 0;
    while k <= p.core_half_width {
        offsets.push(c - k);
        if k > 0 {
            offsets.push(c + k);
        }
        k += p.line_spacing;
    }
    offsets.sort_unstable();
    let mut lines: Vec<(String, Vec<(u32, u32)>)> = Vec::new();
    for &o in &offsets {
        let along: Vec<u32> = (lo..=hi).step_by(p.stop_spacing as usize).collect();
        lines.push((format!("row{o}"), along.iter().map(|&x| (x, o)).collect()));
        lines.push((format!("col{o}"), along.iter().map(|&y| (o, y)).collect()));
    }

    let mut feed = GtfsFeed::default();
    let mut stop_ids = std::collections::BTreeMap::new();
    for (_, pts) in &lines {
        for &(x, y) in pts {
            stop_ids.entry((y, x)).or_insert_with(|| format!("s{x}_{y}"));
        }
    }
    feed.stops = stop_ids.iter().map(|(&(y, x), sid)| Stop { id: sid.clone(), point: at(x, y) }).collect();
    let leg = p.bus_block_time * p.stop_spacing as Seconds;
    let mut row = 1u64;
    for (li, (name, pts)) in lines.iter().enumerate() {
        feed.routes.push(Route { id: name.clone() });
        let offset = (li as Seconds * 97) % p.headway;
        for dir in 0..2 {
            let seq: Vec<(u32, u32)> = if dir == 0 { pts.clone() } else { pts.iter().rev().copied().collect() };
            let mut start = p.service_start + offset;
            let mut trip_no = 0;
            while start <= p.service_end {
                let trip_id = format!("{name}_{dir}_{trip_no}");
                feed.trips.push(Trip { id: trip_id.clone(), route_id: name.clone(), service_id: SERVICE_ID.into() });
                for (s, &(x, y)) in seq.iter().enumerate() {
                    let t = start + s as Seconds * leg;
                    feed.stop_times.push(StopTime {
                        trip_id: trip_id.clone(),
                        arrival: t,
                        departure: t,
                        stop_id: stop_ids[&(y, x)].clone(),
                        seq: s as u32 + 1,
                        row,
                    });
                    row += 1;
                }
                start += p.headway;
                trip_no += 1;
            }
        }
    }
    Ok(SyntheticCity { road, feed })
}

pub const TWIN_CITIES_ROUTES: usize = 191;
pub const TWIN_CITIES_STOPS: usize = 13_672;
pub const TWIN_CITIES_TRIPS: usize = 9_042;

/// A feed with the Twin Cities route, stop and trip counts on a stop lattice
/// 0.3 mi apart. Routes are monotone staircase walks over the lattice of
/// 30 to 80 stops, and each route's trips alternate direction.
pub fn twin_cities_scale_feed(seed: u64) -> GtfsFeed {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let side = (TWIN_CITIES_STOPS as f64).sqrt().ceil() as usize;
    let spacing = 0.3;
    let mut feed = GtfsFeed {
        stops: (0..TWIN_CITIES_STOPS)
            .map(|i| Stop { id: format!("{i}"), point: Point::new((i % side) as f64 * spacing, (i / side) as f64 * spacing) })
            .collect(),
        ..Default::default()
    };
    let rows = TWIN_CITIES_STOPS.div_ceil(side);
    let mut row = 1u64;
    let mut trips_left = TWIN_CITIES_TRIPS;
    for r in 0..TWIN_CITIES_ROUTES {
        let route_id = format!("R{r}");
        feed.routes.push(Route { id: route_id.clone() });
        let len = rng.gen_range(30..=80usize);
        let (mut x, mut y) = (rng.gen_range(0..side), rng.gen_range(0..rows));
        let mut path = Vec::with_capacity(len);
        while path.len() < len {
            let i = y * side + x;
            if i >= TWIN_CITIES_STOPS {
                break;
            }
            path.push(i);
            let right = rng.gen_bool(0.5);
            if (right && x + 1 < side) || y + 1 >= rows {
                if x + 1 >= side {
                    break;
                }
                x += 1;
            } else {
                y += 1;
            }
        }
        if path.len() < 2 {
            path = vec![0, 1];
        }
        let legs: Vec<Seconds> = (1..path.len()).map(|_| rng.gen_range(60..=150)).collect();
        let n_trips = trips_left / (TWIN_CITIES_ROUTES - r);
        trips_left -= n_trips;
        let first = 5 * HOUR + rng.gen_range(0..30 * MINUTE);
        let headway = (18 * HOUR) / n_trips.max(1) as Seconds;
        for k in 0..n_trips {
            let trip_id = format!("R{r}_{k}");
            feed.trips.push(Trip { id: trip_id.clone(), route_id: route_id.clone(), service_id: SERVICE_ID.into() });
            let forward = k % 2 == 0;
            let mut t = first + k as Seconds * headway;
            for s in 0..path.len() {
                let (stop, dt) = if forward {
                    (path[s], if s == 0 { 0 } else { legs[s - 1] })
                } else {
                    (path[path.len() - 1 - s], if s == 0 { 0 } else { legs[path.len() - 1 - s] })
                };
                t += dt;
                feed.stop_times.push(StopTime {
                    trip_id: trip_id.clone(),
                    arrival: t,
                    departure: t,
                    stop_id: feed.stops[stop].id.clone(),
                    seq: s as u32 + 1,
                    row,
                });
                row += 1;
            }
        }
    }
    feed
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gtfs::GtfsFeed;
    use crate::scenario::fmlm_filter;
    use crate::transit::{build_network, Anchors, BuildParams};

    #[test]
    fn city_shape() {
        let p = CityParams { grid: 21, core_half_width: 4, ..Default::default() };
        let city = synth_city(&p).unwrap();
        assert_eq!(city.road.len(), 441);
        assert_eq!(city.road.arc_count(), 4 * 21 * 20);
        city.feed.check_references().unwrap();
        // Lines at offsets -4, 0, 4: three rows and three columns, 5 stops each.
        assert_eq!(city.feed.routes.len(), 6);
        assert_eq!(city.feed.stops.len(), 6 * 5 - 9);
        let g = build_network(&city.feed, &city.road, &BuildParams::default(), &Anchors::default()).unwrap();
        assert!(g.stats().wait_transfer_links > 0);
    }

    #[test]
    fn corners_lack_transit() {
        let city = synth_city(&CityParams::default()).unwrap();
        let stops: Vec<Point> = city.feed.stops.iter().map(|s| s.point).collect();
        let corner = [Point::new(0.0, 0.0), Point::new(5.0, 5.0)];
        assert_eq!(fmlm_filter(&corner, &stops, DistanceMetric::Euclidean, 0.75), vec![0]);
    }

    #[test]
    fn feed_round_trips_through_files() {
        let city = synth_city(&CityParams { grid: 11, core_half_width: 2, service_end: 6 * HOUR, ..Default::default() }).unwrap();
        let dir = tempfile::tempdir().unwrap();
        city.feed.write_dir(dir.path()).unwrap();
        let back = GtfsFeed::load_dir(dir.path()).unwrap();
        assert_eq!(back.stops.len(), city.feed.stops.len());
        assert_eq!(back.stop_times.len(), city.feed.stop_times.len());
    }

    #[test]
    fn twin_cities_counts() {
        let f = twin_cities_scale_feed(7);
        assert_eq!(f.routes.len(), TWIN_CITIES_ROUTES);
        assert_eq!(f.stops.len(), TWIN_CITIES_STOPS);
        assert_eq!(f.trips.len(), TWIN_CITIES_TRIPS);
        f.check_references().unwrap();
    }

    #[test]
    fn invalid_city() {
        assert!(synth_city(&CityParams { grid: 1, ..Default::default() }).is_err());
        assert!(synth_city(&CityParams { core_half_width: 30, ..Default::default() }).is_err());
    }
}
