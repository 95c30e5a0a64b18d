//! Participant announcements and their derived time windows.

use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::road::{for_each_row, NodeId, NodeIx, TravelTimeOracle};
use crate::time::Seconds;

pub type RequestId = u64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Rider,
    Driver,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::Rider => "rider",
            Role::Driver => "driver",
        })
    }
}

impl FromStr for Role {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "rider" | "r" => Ok(Role::Rider),
            "driver" | "d" => Ok(Role::Driver),
            other => Err(format!("unknown role {other:?}")),
        }
    }
}

/// An announced trip. At least one of `pref_depart` and `pref_arrive` must be
/// present; the missing one is filled in from the maximum ride time.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Request {
    pub id: RequestId,
    pub role: Role,
    #[serde(rename = "origin_node")]
    pub origin: NodeId,
    #[serde(rename = "dest_node")]
    pub destination: NodeId,
    pub announce_time: Seconds,
    pub pref_depart: Option<Seconds>,
    pub pref_arrive: Option<Seconds>,
    pub sched_dev: Seconds,
    pub travel_delay: Seconds,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeWindows {
    pub earliest_depart: Seconds,
    pub latest_depart: Seconds,
    pub earliest_arrive: Seconds,
    pub latest_arrive: Seconds,
    pub max_ride: Seconds,
}

/// Derives departure and arrival windows and the maximum ride time.
pub fn derive_windows(req: &Request, oracle: &TravelTimeOracle) -> Result<TimeWindows> {
    let invalid = |reason: &str| Error::InvalidRequest { id: req.id, reason: reason.to_string() };
    if req.origin == req.destination {
        return Err(invalid("origin equals destination"));
    }
    if req.sched_dev < 0 || req.travel_delay < 0 {
        return Err(invalid("negative schedule deviation or travel delay"));
    }
    let direct = oracle.shortest_time(req.origin, req.destination)?.ok_or(Error::DisconnectedRequest(req.id))?;
    let max_ride = direct + req.travel_delay;
    let (pd, pa) = match (req.pref_depart, req.pref_arrive) {
        (Some(pd), Some(pa)) => (pd, pa),
        (Some(pd), None) => (pd, pd + max_ride),
        (None, Some(pa)) => (pa - max_ride, pa),
        (None, None) => return Err(invalid("neither preferred departure nor arrival given")),
    };
    let dev = req.sched_dev;
    let w =
        TimeWindows { earliest_depart: pd - dev, latest_depart: pd + dev, earliest_arrive: pa - dev, latest_arrive: pa + dev, max_ride };
    if req.announce_time > w.earliest_depart {
        return Err(invalid("announced after its earliest departure"));
    }
    Ok(w)
}

/// A request resolved against the road network: windows plus dense node indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Participant {
    pub request: Request,
    pub windows: TimeWindows,
    pub origin: NodeIx,
    pub destination: NodeIx,
    /// Shortest driving time from origin to destination.
    pub direct_time: Seconds,
}

impl Participant {
    pub fn new(request: Request, oracle: &TravelTimeOracle) -> Result<Self> {
        let windows = derive_windows(&request, oracle)?;
        let g = oracle.graph();
        let origin = g.require(request.origin)?;
        let destination = g.require(request.destination)?;
        let direct_time = oracle.time(origin, destination).ok_or(Error::DisconnectedRequest(request.id))?;
        Ok(Participant { request, windows, origin, destination, direct_time })
    }

    pub fn id(&self) -> RequestId {
        self.request.id
    }

    pub fn role(&self) -> Role {
        self.request.role
    }
}

#[derive(Deserialize)]
struct RequestRow {
    id: RequestId,
    role: String,
    origin_node: NodeId,
    dest_node: NodeId,
    announce_time: Seconds,
    pref_depart: Option<Seconds>,
    pref_arrive: Option<Seconds>,
    sched_dev: Seconds,
    travel_delay: Seconds,
}

/// Reads a request table. `file` names the source in error messages.
pub fn read_requests(file: &str, r: impl Read) -> Result<Vec<Request>> {
    let mut out: Vec<Request> = Vec::new();
    let mut ids = std::collections::HashSet::new();
    for_each_row::<RequestRow>(file, r, |line, row| {
        let role = row.role.parse::<Role>().map_err(|e| Error::parse(file, line, e))?;
        if !ids.insert(row.id) {
            return Err(Error::parse(file, line, format!("duplicate request id {}", row.id)));
        }
        if row.pref_depart.is_none() && row.pref_arrive.is_none() {
            return Err(Error::parse(file, line, "pref_depart and pref_arrive are both empty"));
        }
        out.push(Request {
            id: row.id,
            role,
            origin: row.origin_node,
            destination: row.dest_node,
            announce_time: row.announce_time,
            pref_depart: row.pref_depart,
            pref_arrive: row.pref_arrive,
            sched_dev: row.sched_dev,
            travel_delay: row.travel_delay,
        });
        Ok(())
    })?;
    Ok(out)
}

pub fn load_requests(path: &Path) -> Result<Vec<Request>> {
    let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_requests(&path.display().to_string(), f)
}

/// Writes requests, preceded by `#`-prefixed header lines.
pub fn write_requests(mut w: impl Write, header: &[String], reqs: &[Request]) -> std::io::Result<()> {
    for line in header {
        writeln!(w, "# {line}")?;
    }
    writeln!(w, "id,role,origin_node,dest_node,announce_time,pref_depart,pref_arrive,sched_dev,travel_delay")?;
    let opt = |v: Option<Seconds>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in reqs {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            r.id,
            r.role,
            r.origin,
            r.destination,
            r.announce_time,
            opt(r.pref_depart),
            opt(r.pref_arrive),
            r.sched_dev,
            r.travel_delay
        )?;
    }
    Ok(())
}

/// Resolves requests, failing on the first invalid one.
pub fn resolve_all(reqs: &[Request], oracle: &TravelTimeOracle) -> Result<Vec<Participant>> {
    reqs.iter().cloned().map(|r| Participant::new(r, oracle)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geo::{DistanceMetric, Point};
    use crate::road::RoadGraph;
    use proptest::prelude::*;
    use std::sync::Arc;

    fn oracle(t: u32) -> TravelTimeOracle {
        let g = RoadGraph::new(
            DistanceMetric::Euclidean,
            [(1, Point::new(0.0, 0.0)), (2, Point::new(1.0, 0.0)), (3, Point::new(2.0, 0.0))],
            [(1, 2, t)],
        )
        .unwrap();
        TravelTimeOracle::new(Arc::new(g))
    }

    fn req(pd: Seconds, dev: Seconds, pa: Seconds, delay: Seconds) -> Request {
        Request {
            id: 7,
            role: Role::Rider,
            origin: 1,
            destination: 2,
            announce_time: 0,
            pref_depart: Some(pd),
            pref_arrive: Some(pa),
            sched_dev: dev,
            travel_delay: delay,
        }
    }

    #[test]
    fn zero_deviation() {
        let w = derive_windows(&req(600, 0, 1800, 0), &oracle(1200)).unwrap();
        assert_eq!((w.earliest_depart, w.latest_depart, w.earliest_arrive, w.latest_arrive, w.max_ride), (600, 600, 1800, 1800, 1200));
    }

    #[test]
    fn substitution() {
        let w = derive_windows(&req(600, 120, 1800, 300), &oracle(1200)).unwrap();
        assert_eq!((w.earliest_depart, w.latest_depart, w.earliest_arrive, w.latest_arrive, w.max_ride), (480, 720, 1680, 1920, 1500));
    }

    #[test]
    fn one_sided_preferences() {
        let o = oracle(1200);
        let mut r = req(600, 60, 0, 300);
        r.pref_arrive = None;
        let w = derive_windows(&r, &o).unwrap();
        assert_eq!((w.earliest_arrive, w.latest_arrive), (600 + 1500 - 60, 600 + 1500 + 60));
        let mut r = req(0, 60, 3000, 300);
        r.pref_depart = None;
        let w = derive_windows(&r, &o).unwrap();
        assert_eq!((w.earliest_depart, w.latest_depart), (1500 - 60, 1500 + 60));
    }

    #[test]
    fn rejects_bad_requests() {
        let o = oracle(1200);
        let mut r = req(600, 0, 1800, 0);
        r.destination = 3;
        assert!(matches!(derive_windows(&r, &o), Err(Error::DisconnectedRequest(7))));
        let mut r = req(600, 0, 1800, 0);
        r.destination = 1;
        assert!(matches!(derive_windows(&r, &o), Err(Error::InvalidRequest { .. })));
        let mut r = req(600, 100, 1800, 0);
        r.announce_time = 550;
        assert!(derive_windows(&r, &o).is_err());
        assert!(derive_windows(&req(600, -1, 1800, 0), &o).is_err());
        let mut r = req(600, 0, 1800, 0);
        r.origin = 99;
        assert!(matches!(derive_windows(&r, &o), Err(Error::UnknownNode(99))));
    }

    #[test]
    fn table_round_trip() {
        let mut a = req(600, 10, 1800, 5);
        a.pref_arrive = None;
        let mut b = req(700, 0, 2000, 0);
        b.id = 8;
        b.role = Role::Driver;
        let mut buf = Vec::new();
        write_requests(&mut buf, &["seed=1".into()], &[a.clone(), b.clone()]).unwrap();
        let back = read_requests("requests.csv", buf.as_slice()).unwrap();
        assert_eq!(back, vec![a, b]);
    }

    #[test]
    fn table_errors_name_row() {
        let text = "id,role,origin_node,dest_node,announce_time,pref_depart,pref_arrive,sched_dev,travel_delay\n\
                    1,rider,1,2,0,10,,0,0\n2,pilot,1,2,0,10,,0,0\n";
        match read_requests("r.csv", text.as_bytes()) {
            Err(Error::Parse { file, row, .. }) => assert_eq!((file.as_str(), row), ("r.csv", 3)),
            other => panic!("{other:?}"),
        }
    }

    proptest! {
        #[test]
        fn widening_deviation_widens_both_windows(
            pd in 1000i64..5000, pa in 5000i64..9000, dev in 0i64..500, x in 0i64..500, delay in 0i64..100,
        ) {
            let o = oracle(1200);
            let a = derive_windows(&req(pd, dev, pa, delay), &o).unwrap();
            let b = derive_windows(&req(pd, dev + x, pa, delay), &o).unwrap();
            prop_assert_eq!(a.earliest_depart - b.earliest_depart, x);
            prop_assert_eq!(b.latest_depart - a.latest_depart, x);
            prop_assert_eq!(a.earliest_arrive - b.earliest_arrive, x);
            prop_assert_eq!(b.latest_arrive - a.latest_arrive, x);
            prop_assert_eq!(b.latest_depart - b.earliest_depart, 2 * (dev + x));
            prop_assert_eq!(derive_windows(&req(pd, dev, pa, delay), &o).unwrap(), a);
        }
    }
}
