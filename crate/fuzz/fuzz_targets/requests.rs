#![no_main]

use libfuzzer_sys::fuzz_target;
use trs_core::request::{read_requests, write_requests};

fuzz_target!(|data: &[u8]| {
    let Ok(reqs) = read_requests("requests.csv", data) else { return };
    let mut out = Vec::new();
    write_requests(&mut out, &[], &reqs).unwrap();
    assert_eq!(read_requests("requests.csv", out.as_slice()).unwrap(), reqs);
});
