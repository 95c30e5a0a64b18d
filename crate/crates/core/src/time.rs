//! Clock arithmetic. Every instant is an integer count of seconds since the
//! service day's midnight; GTFS times past 24:00:00 stay on the same day.

pub type Seconds = i64;

pub const MINUTE: Seconds = 60;
pub const HOUR: Seconds = 3600;

/// Parses `H:MM:SS` or `HH:MM:SS` (hours may exceed 23).
pub fn parse_hms(text: &str) -> Option<Seconds> {
    let mut parts = text.trim().split(':');
    let h: Seconds = parts.next()?.trim().parse().ok()?;
    let m: Seconds = parts.next()?.trim().parse().ok()?;
    let s: Seconds = parts.next()?.trim().parse().ok()?;
    if parts.next().is_some() || h < 0 || !(0..60).contains(&m) || !(0..60).contains(&s) {
        return None;
    }
    h.checked_mul(HOUR)?.checked_add(m * MINUTE + s)
}

pub fn format_hms(t: Seconds) -> String {
    let sign = if t < 0 { "-" } else { "" };
    let t = t.abs();
    format!("{sign}{:02}:{:02}:{:02}", t / HOUR, (t % HOUR) / MINUTE, t % MINUTE)
}
