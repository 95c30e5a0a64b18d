//! Minimal GTFS static-feed reader and writer: stops, routes, trips,
//! stop_times, calendar and calendar_dates.

use std::collections::{HashMap, HashSet};
use std::io::{Read, Write};
use std::path::Path;

use chrono::{Datelike, NaiveDate};
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::geo::Point;
use crate::road::for_each_row;
use crate::time::{format_hms, parse_hms, Seconds};

#[derive(Clone, Debug, PartialEq)]
pub struct Stop {
    pub id: String,
    /// `x` = stop_lon, `y` = stop_lat.
    pub point: Point,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Route {
    pub id: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trip {
    pub id: String,
    pub route_id: String,
    pub service_id: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StopTime {
    pub trip_id: String,
    pub arrival: Seconds,
    pub departure: Seconds,
    pub stop_id: String,
    pub seq: u32,
    /// Source row in stop_times.txt, kept for error reporting.
    pub row: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Calendar {
    pub service_id: String,
    /// Monday first.
    pub days: [bool; 7],
    pub start: NaiveDate,
    pub end: NaiveDate,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CalendarDate {
    pub service_id: String,
    pub date: NaiveDate,
    /// 1 adds service, 2 removes it.
    pub exception: u8,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct GtfsFeed {
    pub stops: Vec<Stop>,
    pub routes: Vec<Route>,
    pub trips: Vec<Trip>,
    pub stop_times: Vec<StopTime>,
    pub calendar: Vec<Calendar>,
    pub calendar_dates: Vec<CalendarDate>,
}

pub const STOPS: &str = "stops.txt";
pub const ROUTES: &str = "routes.txt";
pub const TRIPS: &str = "trips.txt";
pub const STOP_TIMES: &str = "stop_times.txt";
pub const CALENDAR: &str = "calendar.txt";
pub const CALENDAR_DATES: &str = "calendar_dates.txt";

#[derive(Deserialize)]
struct StopRow {
    stop_id: String,
    stop_lat: f64,
    stop_lon: f64,
}

#[derive(Deserialize)]
struct RouteRow {
    route_id: String,
}

#[derive(Deserialize)]
struct TripRow {
    route_id: String,
    service_id: String,
    trip_id: String,
}

#[derive(Deserialize)]
struct StopTimeRow {
    trip_id: String,
    arrival_time: Option<String>,
    departure_time: Option<String>,
    stop_id: String,
    stop_sequence: u32,
}

#[derive(Deserialize)]
struct CalendarRow {
    service_id: String,
    monday: u8,
    tuesday: u8,
    wednesday: u8,
    thursday: u8,
    friday: u8,
    saturday: u8,
    sunday: u8,
    start_date: String,
    end_date: String,
}

#[derive(Deserialize)]
struct CalendarDateRow {
    service_id: String,
    date: String,
    exception_type: u8,
}

pub fn parse_date(text: &str) -> Option<NaiveDate> {
    NaiveDate::parse_from_str(text.trim(), "%Y%m%d").ok()
}

pub fn parse_stops(r: impl Read) -> Result<Vec<Stop>> {
    let mut out = Vec::new();
    for_each_row::<StopRow>(STOPS, r, |line, s| {
        if !s.stop_lat.is_finite() || !s.stop_lon.is_finite() {
            return Err(Error::parse(STOPS, line, "non-finite coordinate"));
        }
        out.push(Stop { id: s.stop_id, point: Point::new(s.stop_lon, s.stop_lat) });
        Ok(())
    })?;
    Ok(out)
}

pub fn parse_routes(r: impl Read) -> Result<Vec<Route>> {
    let mut out = Vec::new();
    for_each_row::<RouteRow>(ROUTES, r, |_, row| {
        out.push(Route { id: row.route_id });
        Ok(())
    })?;
    Ok(out)
}

pub fn parse_trips(r: impl Read) -> Result<Vec<Trip>> {
    let mut out = Vec::new();
    for_each_row::<TripRow>(TRIPS, r, |_, row| {
        out.push(Trip { id: row.trip_id, route_id: row.route_id, service_id: row.service_id });
        Ok(())
    })?;
    Ok(out)
}

pub fn parse_stop_times(r: impl Read) -> Result<Vec<StopTime>> {
    let mut out = Vec::new();
    for_each_row::<StopTimeRow>(STOP_TIMES, r, |line, row| {
        let parse = |v: &Option<String>| -> Result<Option<Seconds>> {
            match v.as_deref().map(str::trim) {
                None | Some("") => Ok(None),
                Some(t) => parse_hms(t).map(Some).ok_or_else(|| Error::parse(STOP_TIMES, line, format!("bad time {t:?}"))),
            }
        };
        let (arrival, departure) = match (parse(&row.arrival_time)?, parse(&row.departure_time)?) {
            (Some(a), Some(d)) => (a, d),
            (Some(a), None) => (a, a),
            (None, Some(d)) => (d, d),
            (None, None) => return Err(Error::parse(STOP_TIMES, line, "untimed stop")),
        };
        if departure < arrival {
            return Err(Error::parse(STOP_TIMES, line, "departure before arrival"));
        }
        out.push(StopTime { trip_id: row.trip_id, arrival, departure, stop_id: row.stop_id, seq: row.stop_sequence, row: line });
        Ok(())
    })?;
    Ok(out)
}

pub fn parse_calendar(r: impl Read) -> Result<Vec<Calendar>> {
    let mut out = Vec::new();
    for_each_row::<CalendarRow>(CALENDAR, r, |line, c| {
        let date = |s: &str| parse_date(s).ok_or_else(|| Error::parse(CALENDAR, line, format!("bad date {s:?}")));
        out.push(Calendar {
            days: [c.monday, c.tuesday, c.wednesday, c.thursday, c.friday, c.saturday, c.sunday].map(|d| d == 1),
            start: date(&c.start_date)?,
            end: date(&c.end_date)?,
            service_id: c.service_id,
        });
        Ok(())
    })?;
    Ok(out)
}

pub fn parse_calendar_dates(r: impl Read) -> Result<Vec<CalendarDate>> {
    let mut out = Vec::new();
    for_each_row::<CalendarDateRow>(CALENDAR_DATES, r, |line, c| {
        let date = parse_date(&c.date).ok_or_else(|| Error::parse(CALENDAR_DATES, line, "bad date"))?;
        if !matches!(c.exception_type, 1 | 2) {
            return Err(Error::parse(CALENDAR_DATES, line, "exception_type must be 1 or 2"));
        }
        out.push(CalendarDate { service_id: c.service_id, date, exception: c.exception_type });
        Ok(())
    })?;
    Ok(out)
}

impl GtfsFeed {
    /// Loads a feed from a directory. calendar.txt and calendar_dates.txt are optional.
    pub fn load_dir(dir: &Path) -> Result<Self> {
        let open = |name: &str| -> Result<Option<std::fs::File>> {
            let p = dir.join(name);
            match std::fs::File::open(&p) {
                Ok(f) => Ok(Some(f)),
                Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
                Err(e) => Err(Error::io(&p, e)),
            }
        };
        let required = |name: &str| -> Result<std::fs::File> {
            open(name)?.ok_or_else(|| Error::parse(name, 0, format!("missing {name} in {}", dir.display())))
        };
        let feed = GtfsFeed {
            stops: parse_stops(required(STOPS)?)?,
            routes: parse_routes(required(ROUTES)?)?,
            trips: parse_trips(required(TRIPS)?)?,
            stop_times: parse_stop_times(required(STOP_TIMES)?)?,
            calendar: open(CALENDAR)?.map(parse_calendar).transpose()?.unwrap_or_default(),
            calendar_dates: open(CALENDAR_DATES)?.map(parse_calendar_dates).transpose()?.unwrap_or_default(),
        };
        feed.check_references()?;
        Ok(feed)
    }

    /// Verifies that every id referenced by trips and stop_times exists.
    pub fn check_references(&self) -> Result<()> {
        let mut stop_ids = HashSet::new();
        for (i, s) in self.stops.iter().enumerate() {
            if !stop_ids.insert(s.id.as_str()) {
                return Err(Error::parse(STOPS, i as u64 + 2, format!("duplicate stop_id {:?}", s.id)));
            }
        }
        let route_ids: HashSet<&str> = self.routes.iter().map(|r| r.id.as_str()).collect();
        let mut trip_ids = HashSet::new();
        for (i, t) in self.trips.iter().enumerate() {
            let row = i as u64 + 2;
            if !route_ids.contains(t.route_id.as_str()) {
                return Err(Error::parse(TRIPS, row, format!("unknown route_id {:?}", t.route_id)));
            }
            if !trip_ids.insert(t.id.as_str()) {
                return Err(Error::parse(TRIPS, row, format!("duplicate trip_id {:?}", t.id)));
            }
        }
        for st in &self.stop_times {
            if !trip_ids.contains(st.trip_id.as_str()) {
                return Err(Error::parse(STOP_TIMES, st.row, format!("unknown trip_id {:?}", st.trip_id)));
            }
            if !stop_ids.contains(st.stop_id.as_str()) {
                return Err(Error::parse(STOP_TIMES, st.row, format!("unknown stop_id {:?}", st.stop_id)));
            }
        }
        Ok(())
    }

    /// Whether `service_id` runs on `date`. A feed without any calendar
    /// information runs every service every day.
    pub fn service_active(&self, service_id: &str, date: NaiveDate) -> bool {
        if self.calendar.is_empty() && self.calendar_dates.is_empty() {
            return true;
        }
        for cd in &self.calendar_dates {
            if cd.service_id == service_id && cd.date == date {
                return cd.exception == 1;
            }
        }
        let dow = date.weekday().num_days_from_monday() as usize;
        self.calendar.iter().any(|c| c.service_id == service_id && c.start <= date && date <= c.end && c.days[dow])
    }

    /// Ids of trips running on `date`, or of all trips when `date` is `None`.
    pub fn active_trips(&self, date: Option<NaiveDate>) -> HashSet<&str> {
        let mut memo: HashMap<&str, bool> = HashMap::new();
        self.trips
            .iter()
            .filter(|t| match date {
                None => true,
                Some(d) => *memo.entry(t.service_id.as_str()).or_insert_with(|| self.service_active(&t.service_id, d)),
            })
            .map(|t| t.id.as_str())
            .collect()
    }

    /// Writes the feed as GTFS text files into `dir`.
    pub fn write_dir(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let create = |name: &str| {
            let p = dir.join(name);
            std::fs::File::create(&p).map(std::io::BufWriter::new).map_err(|e| Error::io(&p, e))
        };
        let io = |name: &str| {
            let p = dir.join(name);
            move |e: std::io::Error| Error::io(&p, e)
        };
        let mut w = create(STOPS)?;
        (|| -> std::io::Result<()> {
            writeln!(w, "stop_id,stop_name,stop_lat,stop_lon")?;
            for s in &self.stops {
                writeln!(w, "{},{},{},{}", s.id, s.id, s.point.y, s.point.x)?;
            }
            w.flush()
        })()
        .map_err(io(STOPS))?;
        let mut w = create(ROUTES)?;
        (|| -> std::io::Result<()> {
            writeln!(w, "route_id,route_short_name,route_type")?;
            for r in &self.routes {
                writeln!(w, "{},{},3", r.id, r.id)?;
            }
            w.flush()
        })()
        .map_err(io(ROUTES))?;
        let mut w = create(TRIPS)?;
        (|| -> std::io::Result<()> {
            writeln!(w, "route_id,service_id,trip_id")?;
            for t in &self.trips {
                writeln!(w, "{},{},{}", t.route_id, t.service_id, t.id)?;
            }
            w.flush()
        })()
        .map_err(io(TRIPS))?;
        let mut w = create(STOP_TIMES)?;
        (|| -> std::io::Result<()> {
            writeln!(w, "trip_id,arrival_time,departure_time,stop_id,stop_sequence")?;
            for st in &self.stop_times {
                writeln!(w, "{},{},{},{},{}", st.trip_id, format_hms(st.arrival), format_hms(st.departure), st.stop_id, st.seq)?;
            }
            w.flush()
        })()
        .map_err(io(STOP_TIMES))?;
        if !self.calendar.is_empty() {
            let mut w = create(CALENDAR)?;
            (|| -> std::io::Result<()> {
                writeln!(w, "service_id,monday,tuesday,wednesday,thursday,friday,saturday,sunday,start_date,end_date")?;
                for c in &self.calendar {
                    let d: Vec<String> = c.days.iter().map(|&b| u8::from(b).to_string()).collect();
                    writeln!(w, "{},{},{},{}", c.service_id, d.join(","), c.start.format("%Y%m%d"), c.end.format("%Y%m%d"))?;
                }
                w.flush()
            })()
            .map_err(io(CALENDAR))?;
        }
        if !self.calendar_dates.is_empty() {
            let mut w = create(CALENDAR_DATES)?;
            (|| -> std::io::Result<()> {
                writeln!(w, "service_id,date,exception_type")?;
                for c in &self.calendar_dates {
                    writeln!(w, "{},{},{}", c.service_id, c.date.format("%Y%m%d"), c.exception)?;
                }
                w.flush()
            })()
            .map_err(io(CALENDAR_DATES))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, name: &str, body: &str) {
        std::fs::write(dir.join(name), body).unwrap();
    }

    fn tiny(dir: &Path) {
        write(dir, STOPS, "stop_id,stop_name,stop_lat,stop_lon\nA,a,0,0\nB,b,0,1\n");
        write(dir, ROUTES, "route_id,route_type\nR,3\n");
        write(dir, TRIPS, "route_id,service_id,trip_id\nR,WK,T1\nR,SAT,T2\n");
        write(
            dir,
            STOP_TIMES,
            "trip_id,arrival_time,departure_time,stop_id,stop_sequence\n\
             T1,08:00:00,08:00:00,A,1\nT1,08:05:00,08:06:00,B,2\nT2,09:00:00,,A,1\nT2,09:05:00,09:05:00,B,2\n",
        );
        write(
            dir,
            CALENDAR,
            "service_id,monday,tuesday,wednesday,thursday,friday,saturday,sunday,start_date,end_date\n\
             WK,1,1,1,1,1,0,0,20240101,20241231\nSAT,0,0,0,0,0,1,0,20240101,20241231\n",
        );
        write(dir, CALENDAR_DATES, "service_id,date,exception_type\nSAT,20240115,1\n");
    }

    #[test]
    fn loads_and_filters_by_date() {
        let dir = tempfile::tempdir().unwrap();
        tiny(dir.path());
        let feed = GtfsFeed::load_dir(dir.path()).unwrap();
        assert_eq!(feed.stop_times.len(), 4);
        assert_eq!(feed.stop_times[2].departure, 9 * 3600);
        let monday = NaiveDate::from_ymd_opt(2024, 1, 8).unwrap();
        let saturday = NaiveDate::from_ymd_opt(2024, 1, 13).unwrap();
        let holiday = NaiveDate::from_ymd_opt(2024, 1, 15).unwrap();
        assert_eq!(feed.active_trips(Some(monday)), HashSet::from(["T1"]));
        assert_eq!(feed.active_trips(Some(saturday)), HashSet::from(["T2"]));
        assert_eq!(feed.active_trips(Some(holiday)), HashSet::from(["T1", "T2"]));
        assert_eq!(feed.active_trips(None).len(), 2);
    }

    #[test]
    fn write_then_read_is_identity() {
        let dir = tempfile::tempdir().unwrap();
        tiny(dir.path());
        let feed = GtfsFeed::load_dir(dir.path()).unwrap();
        let out = tempfile::tempdir().unwrap();
        feed.write_dir(out.path()).unwrap();
        let back = GtfsFeed::load_dir(out.path()).unwrap();
        assert_eq!(back, feed);
    }

    #[test]
    fn missing_reference_names_file_and_row() {
        let dir = tempfile::tempdir().unwrap();
        tiny(dir.path());
        write(
            dir.path(),
            STOP_TIMES,
            "trip_id,arrival_time,departure_time,stop_id,stop_sequence\nT1,08:00:00,08:00:00,A,1\nT1,08:05:00,08:05:00,Z,2\n",
        );
        match GtfsFeed::load_dir(dir.path()) {
            Err(Error::Parse { file, row, .. }) => assert_eq!((file.as_str(), row), (STOP_TIMES, 3)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bad_time_is_rejected() {
        let body = "trip_id,arrival_time,departure_time,stop_id,stop_sequence\nT,8:99:00,,A,1\n";
        assert!(matches!(parse_stop_times(body.as_bytes()), Err(Error::Parse { row: 2, .. })));
    }

    #[test]
    fn missing_required_file() {
        let dir = tempfile::tempdir().unwrap();
        assert!(GtfsFeed::load_dir(dir.path()).is_err());
    }
}
