//! Synthetic demand.
//!
//! Trips are sampled over the road network, given a departure time on a
//! half-hour grid plus a uniform jitter, filtered to those whose access end
//! has no transit stop within the buffer distance, and turned into rider or
//! driver requests whose windows stretch the shortest driving time by the
//! role's time flexibility.
//!
//! Every trip consumes the same sequence of draws from a seeded ChaCha8
//! stream, so a seed reproduces the request file exactly.

use log::warn;
use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::geo::{DistanceMetric, Point, SpatialGrid};
use crate::request::{Request, Role};
use crate::road::{NodeIx, TravelTimeOracle};
use crate::time::{format_hms, HOUR, MINUTE};
use crate::{Error, Result, Seconds};

/// Name of the random generator recorded in manifests.
pub const GENERATOR: &str = "ChaCha8Rng";

const DEPARTURE_SLOT: Seconds = 30 * MINUTE;
const DESTINATION_ATTEMPTS: usize = 32;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OdSampling {
    #[default]
    Uniform,
    /// Nodes weighted by their degree.
    Gravity,
}

/// Which trip end must lack a nearby stop.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AccessSide {
    #[default]
    Origin,
    Destination,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioParams {
    /// Trips sampled before participation and access filtering.
    pub n_trips: usize,
    pub participation_rate: f64,
    /// Drivers per rider.
    pub driver_rider_ratio: f64,
    pub rider_flex: f64,
    pub driver_flex: f64,
    /// Announcements precede the earliest departure by up to this much.
    pub announce_back: Seconds,
    pub seed: u64,
    /// Miles for great-circle networks, coordinate units otherwise.
    pub fmlm_buffer: f64,
    /// Base departures fall in `[depart_start, depart_end)`.
    pub depart_start: Seconds,
    pub depart_end: Seconds,
    /// Uniform jitter added to the half-hour base departure.
    pub depart_jitter: Seconds,
    pub od_sampling: OdSampling,
    pub access_side: AccessSide,
    /// Assign exactly `round(n * ratio / (1 + ratio))` drivers.
    pub deterministic_partition: bool,
}

impl Default for ScenarioParams {
    fn default() -> Self {
        ScenarioParams {
            n_trips: 10_000,
            participation_rate: 1.0,
            driver_rider_ratio: 1.0,
            rider_flex: 1.5,
            driver_flex: 0.5,
            announce_back: HOUR,
            seed: 1,
            fmlm_buffer: 0.75,
            depart_start: 6 * HOUR,
            depart_end: 9 * HOUR,
            depart_jitter: 30 * MINUTE,
            od_sampling: OdSampling::Uniform,
            access_side: AccessSide::Origin,
            deterministic_partition: false,
        }
    }
}

impl ScenarioParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.participation_rate > 0.0 && self.participation_rate <= 1.0) {
            return bad(format!("participation_rate must be in (0, 1], got {}", self.participation_rate));
        }
        if !(self.driver_rider_ratio > 0.0 && self.driver_rider_ratio.is_finite()) {
            return bad(format!("driver_rider_ratio must be positive, got {}", self.driver_rider_ratio));
        }
        for (name, v) in [("rider_flex", self.rider_flex), ("driver_flex", self.driver_flex)] {
            if !(v >= 0.0 && v.is_finite()) {
                return bad(format!("{name} must be non-negative, got {v}"));
            }
        }
        if self.announce_back < 0 || self.depart_jitter < 0 {
            return bad("announce_back and depart_jitter must be non-negative".into());
        }
        if self.fmlm_buffer.is_nan() || self.fmlm_buffer < 0.0 {
            return bad(format!("fmlm_buffer must be non-negative, got {}", self.fmlm_buffer));
        }
        if self.depart_end <= self.depart_start {
            return bad(format!("empty departure window [{}, {})", self.depart_start, self.depart_end));
        }
        Ok(())
    }

    pub fn flex(&self, role: Role) -> f64 {
        match role {
            Role::Rider => self.rider_flex,
            Role::Driver => self.driver_flex,
        }
    }

    fn driver_share(&self) -> f64 {
        self.driver_rider_ratio / (1.0 + self.driver_rider_ratio)
    }
}

/// A sampled trip before it becomes a request.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TripRecord {
    pub origin: NodeIx,
    pub destination: NodeIx,
    /// Earliest departure.
    pub depart: Seconds,
    pub announce: Seconds,
    pub direct_time: Seconds,
    pub role: Role,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ScenarioManifest {
    pub params: ScenarioParams,
    pub generator: String,
    pub road_fingerprint: String,
    pub sampled: usize,
    pub disconnected: usize,
    pub not_participating: usize,
    pub fmlm_excluded: usize,
    pub riders: usize,
    pub drivers: usize,
}

impl ScenarioManifest {
    /// Header lines for the request file.
    pub fn header_lines(&self) -> Vec<String> {
        let p = &self.params;
        vec![
            format!("generator: {} seed={}", self.generator, p.seed),
            format!(
                "params: n_trips={} participation_rate={} driver_rider_ratio={} rider_flex={} driver_flex={} fmlm_buffer={} departures={}-{}",
                p.n_trips,
                p.participation_rate,
                p.driver_rider_ratio,
                p.rider_flex,
                p.driver_flex,
                p.fmlm_buffer,
                format_hms(p.depart_start),
                format_hms(p.depart_end)
            ),
            format!("road_fingerprint: {}", self.road_fingerprint),
            format!("counts: riders={} drivers={} fmlm_excluded={}", self.riders, self.drivers, self.fmlm_excluded),
        ]
    }
}

#[derive(Clone, Debug)]
pub struct Scenario {
    pub requests: Vec<Request>,
    pub trips: Vec<TripRecord>,
    pub manifest: ScenarioManifest,
}

/// Indices of the points whose nearest stop is farther than `buffer`.
pub fn fmlm_filter(points: &[Point], stops: &[Point], metric: DistanceMetric, buffer: f64) -> Vec<usize> {
    if stops.is_empty() {
        return (0..points.len()).collect();
    }
    let grid = SpatialGrid::new(metric, stops, None);
    points.iter().enumerate().filter(|(_, &p)| grid.nearest(p).is_none_or(|(_, d)| d > buffer)).map(|(i, _)| i).collect()
}

/// Request fields realizing the earliest departure `depart` and the latest
/// arrival `depart + direct + slack`, with the departure window
/// `[depart, depart + 2 * floor(slack / 2)]`.
pub fn request_for(id: u64, trip: &TripRecord, slack: Seconds, origin: u64, destination: u64) -> Request {
    let dev = slack / 2;
    Request {
        id,
        role: trip.role,
        origin,
        destination,
        announce_time: trip.announce,
        pref_depart: Some(trip.depart + dev),
        pref_arrive: Some(trip.depart + trip.direct_time + slack - dev),
        sched_dev: dev,
        travel_delay: slack,
    }
}

pub fn generate(params: &ScenarioParams, oracle: &TravelTimeOracle, stops: &[Point]) -> Result<Scenario> {
    params.validate()?;
    let road = oracle.graph();
    let mut manifest = ScenarioManifest {
        params: params.clone(),
        generator: GENERATOR.to_string(),
        road_fingerprint: format!("{:016x}", road.fingerprint()),
        ..Default::default()
    };
    if road.len() < 2 {
        return Err(Error::Config("scenario generation needs at least two road nodes".into()));
    }
    let access_ok: Vec<bool> = {
        let mut ok = vec![false; road.len()];
        for i in fmlm_filter(road.points(), stops, road.metric(), params.fmlm_buffer) {
            ok[i] = true;
        }
        ok
    };
    let weights: Vec<f64> = match params.od_sampling {
        OdSampling::Uniform => vec![1.0; road.len()],
        OdSampling::Gravity => (0..road.len() as NodeIx).map(|v| road.degree(v) as f64).collect(),
    };
    let nodes = WeightedIndex::new(&weights).map_err(|e| Error::Config(format!("od sampling: {e}")))?;
    let slots = ((params.depart_end - params.depart_start + DEPARTURE_SLOT - 1) / DEPARTURE_SLOT).max(1);

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut trips = Vec::new();
    for _ in 0..params.n_trips {
        manifest.sampled += 1;
        let origin = nodes.sample(&mut rng) as NodeIx;
        let from = oracle.from_source(origin);
        let mut dest = None;
        for _ in 0..DESTINATION_ATTEMPTS {
            let d = nodes.sample(&mut rng) as NodeIx;
            if d != origin {
                if let Some(t) = from.time(d) {
                    dest = Some((d, t));
                    break;
                }
            }
        }
        let slot = rng.gen_range(0..slots);
        let jitter = rng.gen_range(0..=params.depart_jitter);
        let back = rng.gen_range(0..=params.announce_back);
        let joins = rng.gen::<f64>() < params.participation_rate;
        let is_driver = rng.gen::<f64>() < params.driver_share();

        let Some((destination, direct_time)) = dest else {
            manifest.disconnected += 1;
            continue;
        };
        if !joins {
            manifest.not_participating += 1;
            continue;
        }
        let end = match params.access_side {
            AccessSide::Origin => origin,
            AccessSide::Destination => destination,
        };
        if !access_ok[end as usize] {
            manifest.fmlm_excluded += 1;
            continue;
        }
        let depart = params.depart_start + slot * DEPARTURE_SLOT + jitter;
        trips.push(TripRecord {
            origin,
            destination,
            depart,
            announce: depart - back,
            direct_time,
            role: if is_driver { Role::Driver } else { Role::Rider },
        });
    }

    if params.deterministic_partition {
        let n_drivers = (trips.len() as f64 * params.driver_share()).round() as usize;
        let mut order: Vec<usize> = (0..trips.len()).collect();
        order.shuffle(&mut rng);
        for (rank, &i) in order.iter().enumerate() {
            trips[i].role = if rank < n_drivers { Role::Driver } else { Role::Rider };
        }
    }

    let requests: Vec<Request> = trips
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let slack = (params.flex(t.role) * t.direct_time as f64).round() as Seconds;
            request_for(i as u64 + 1, t, slack, road.id(t.origin), road.id(t.destination))
        })
        .collect();
    manifest.drivers = trips.iter().filter(|t| t.role == Role::Driver).count();
    manifest.riders = trips.len() - manifest.drivers;
    if requests.is_empty() {
        warn!("no sampled trip qualifies for the scenario ({} sampled)", manifest.sampled);
    }
    Ok(Scenario { requests, trips, manifest })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::request::derive_windows;
    use crate::road::RoadGraph;
    use std::sync::Arc;

    fn grid_oracle(n: u64) -> TravelTimeOracle {
        let id = |x: u64, y: u64| y * n + x + 1;
        let mut nodes = Vec::new();
        let mut arcs = Vec::new();
        for y in 0..n {
            for x in 0..n {
                nodes.push((id(x, y), Point::new(x as f64, y as f64)));
                if x + 1 < n {
                    arcs.push((id(x, y), id(x + 1, y), 120));
                    arcs.push((id(x + 1, y), id(x, y), 120));
                }
                if y + 1 < n {
                    arcs.push((id(x, y), id(x, y + 1), 120));
                    arcs.push((id(x, y + 1), id(x, y), 120));
                }
            }
        }
        TravelTimeOracle::new(Arc::new(RoadGraph::new(DistanceMetric::Euclidean, nodes, arcs).unwrap()))
    }

    #[test]
    fn buffer_predicate() {
        let stops = [Point::new(0.0, 0.0)];
        let pts = [Point::new(0.5, 0.0), Point::new(1.0, 0.0), Point::new(0.75, 0.0)];
        assert_eq!(fmlm_filter(&pts, &stops, DistanceMetric::Euclidean, 0.75), vec![1]);
        assert_eq!(fmlm_filter(&pts, &[], DistanceMetric::Euclidean, 0.75), vec![0, 1, 2]);
        let dense: Vec<Point> = (0..20).flat_map(|x| (0..20).map(move |y| Point::new(x as f64 * 0.5, y as f64 * 0.5))).collect();
        assert!(fmlm_filter(&pts, &dense, DistanceMetric::Euclidean, 0.75).is_empty());
    }

    #[test]
    fn zero_flex_gives_direct_window() {
        let oracle = grid_oracle(6);
        let p = ScenarioParams { n_trips: 200, rider_flex: 0.0, driver_flex: 0.0, ..Default::default() };
        let s = generate(&p, &oracle, &[]).unwrap();
        assert!(!s.requests.is_empty());
        for (r, t) in s.requests.iter().zip(&s.trips) {
            let w = derive_windows(r, &oracle).unwrap();
            assert_eq!(w.earliest_depart, t.depart);
            assert_eq!(w.latest_arrive - w.earliest_depart, t.direct_time);
        }
    }

    #[test]
    fn windows_follow_flexibility() {
        let oracle = grid_oracle(8);
        let p = ScenarioParams { n_trips: 500, ..Default::default() };
        let s = generate(&p, &oracle, &[]).unwrap();
        for (r, t) in s.requests.iter().zip(&s.trips) {
            let w = derive_windows(r, &oracle).unwrap();
            let slack = (p.flex(t.role) * t.direct_time as f64).round() as Seconds;
            assert_eq!(w.earliest_depart, t.depart);
            assert_eq!(w.latest_arrive, t.depart + t.direct_time + slack);
            assert!(w.latest_depart + t.direct_time <= w.latest_arrive);
            assert!(r.announce_time <= w.earliest_depart);
            assert!(w.earliest_depart - r.announce_time <= p.announce_back);
            assert!(t.depart >= p.depart_start && t.depart <= p.depart_end + p.depart_jitter);
        }
    }

    #[test]
    fn seed_reproduces() {
        let oracle = grid_oracle(6);
        let p = ScenarioParams { n_trips: 300, participation_rate: 0.5, ..Default::default() };
        let a = generate(&p, &oracle, &[]).unwrap();
        let b = generate(&p, &oracle, &[]).unwrap();
        assert_eq!(a.requests, b.requests);
        let c = generate(&ScenarioParams { seed: 2, ..p }, &oracle, &[]).unwrap();
        assert_ne!(a.requests, c.requests);
    }

    #[test]
    fn deterministic_partition_is_exact() {
        let oracle = grid_oracle(6);
        let p = ScenarioParams { n_trips: 400, driver_rider_ratio: 0.25, deterministic_partition: true, ..Default::default() };
        let s = generate(&p, &oracle, &[]).unwrap();
        let n = s.requests.len();
        assert_eq!(s.manifest.drivers, (n as f64 * 0.2).round() as usize);
        assert_eq!(s.manifest.riders + s.manifest.drivers, n);
    }

    #[test]
    fn all_origins_near_stops() {
        let oracle = grid_oracle(4);
        let stops: Vec<Point> = oracle.graph().points().to_vec();
        let s = generate(&ScenarioParams { n_trips: 50, ..Default::default() }, &oracle, &stops).unwrap();
        assert!(s.requests.is_empty());
        assert_eq!(s.manifest.fmlm_excluded + s.manifest.not_participating + s.manifest.disconnected, 50);
    }

    #[test]
    fn invalid_params() {
        let oracle = grid_oracle(3);
        for p in [
            ScenarioParams { participation_rate: 0.0, ..Default::default() },
            ScenarioParams { driver_rider_ratio: 0.0, ..Default::default() },
            ScenarioParams { rider_flex: -1.0, ..Default::default() },
            ScenarioParams { depart_end: 0, ..Default::default() },
        ] {
            assert!(generate(&p, &oracle, &[]).is_err());
        }
    }
}
