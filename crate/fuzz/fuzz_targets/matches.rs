#![no_main]

use libfuzzer_sys::fuzz_target;
use trs_core::fixtures;
use trs_core::records::read_matches;

fuzz_target!(|data: &[u8]| {
    // Road ids 1..=6 of the drop-off illustration resolve; others are errors.
    let fx = fixtures::illustration();
    let _ = read_matches("matches.csv", data, fx.road());
});
