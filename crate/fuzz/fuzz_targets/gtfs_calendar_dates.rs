#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let _ = trs_core::gtfs::parse_calendar_dates(data);
});
