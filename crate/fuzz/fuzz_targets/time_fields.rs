#![no_main]

use libfuzzer_sys::fuzz_target;
use trs_core::feasibility::Itinerary;
use trs_core::gtfs::parse_date;
use trs_core::time::{format_hms, parse_hms};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Some(t) = parse_hms(text) {
        assert_eq!(parse_hms(&format_hms(t)), Some(t));
    }
    let _ = parse_date(text);
    if let Some(it) = Itinerary::parse_field(text) {
        assert_eq!(Itinerary::parse_field(&it.to_field()), Some(it));
    }
});
