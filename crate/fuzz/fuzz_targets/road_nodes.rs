#![no_main]

use libfuzzer_sys::fuzz_target;
use trs_core::road::read_nodes;

fuzz_target!(|data: &[u8]| {
    if let Ok(nodes) = read_nodes("road_nodes.csv", data) {
        assert!(nodes.iter().all(|(_, (_, p))| p.x.is_finite() && p.y.is_finite()));
    }
});
