#![no_main]

use libfuzzer_sys::fuzz_target;
use trs_cli::RunConfig;

// The first line is a `--set` override, the rest is the config file.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let (first, rest) = text.split_once('\n').unwrap_or((text, ""));
    let Ok(cfg) = RunConfig::parse(rest, &[first.to_string()]) else { return };
    let _ = cfg.build_params();
    let back = RunConfig::parse(&cfg.canonical(), &[]).expect("canonical text parses");
    assert_eq!(back.paths, cfg.paths);
});
