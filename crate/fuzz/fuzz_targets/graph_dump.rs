#![no_main]

use libfuzzer_sys::fuzz_target;
use trs_core::transit::TransitGraph;

fuzz_target!(|data: &[u8]| {
    let Ok(g) = TransitGraph::from_bytes(data) else { return };
    let bytes = g.to_bytes();
    assert_eq!(TransitGraph::from_bytes(&bytes).unwrap(), g);
});
