#![no_main]

use libfuzzer_sys::fuzz_target;
use trs_core::road::read_links;

fuzz_target!(|data: &[u8]| {
    let _ = read_links("road_links.csv", data);
});
