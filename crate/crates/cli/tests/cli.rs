use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;
use trs_cli::commands;
use trs_cli::inputs::{load_demand, load_road, TransitSource};
use trs_cli::RunConfig;
use trs_core::fixtures::{self, PI_2};
use trs_core::optimize::Objective;
use trs_core::records::load_matches;
use trs_core::request::write_requests;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn trs(args: &[&str]) -> Output {
    let out = Command::new(env!("CARGO_BIN_EXE_trs")).args(args).output().expect("binary runs");
    if !out.status.success() {
        eprintln!("{}", String::from_utf8_lossy(&out.stderr));
    }
    out
}

fn run_ok(args: &[&str]) -> String {
    let out = trs(args);
    assert!(out.status.success(), "trs {args:?} failed");
    String::from_utf8(out.stdout).unwrap()
}

fn code(args: &[&str]) -> i32 {
    trs(args).status.code().expect("exit code")
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let p = dir.join("run.toml");
    fs::write(&p, body).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Selected (rider, driver) pairs of an assignment file.
fn assignment_pairs(path: &Path) -> BTreeSet<(u64, u64)> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_path(path).unwrap();
    r.records()
        .map(|row| {
            let row = row.unwrap();
            (row[0].parse().unwrap(), row[1].parse().unwrap())
        })
        .collect()
}

fn csv_rows(path: &Path) -> Vec<csv::StringRecord> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_path(path).unwrap();
    r.records().map(Result::unwrap).collect()
}

fn mini_config(dir: &Path) -> PathBuf {
    let m = data("mini");
    write_config(
        dir,
        &format!(
            "[paths]\nroad_nodes = {:?}\nroad_links = {:?}\ngtfs_dir = {:?}\nrequests = {:?}\noutput_dir = \"out\"\n\n[network]\nservice_date = \"2026-10-14\"\n",
            m.join("road_nodes.csv"),
            m.join("road_links.csv"),
            m.join("gtfs"),
            m.join("requests.csv"),
        ),
    )
}

#[test]
fn mini_feed_counts_match_manifest() {
    let dir = TempDir::new().unwrap();
    let cfg = mini_config(dir.path());
    let stdout = run_ok(&["-c", s(&cfg), "build-network"]);
    assert!(stdout.contains("Number of in-vehicle links        5"), "{stdout}");

    let manifest: toml::Table = fs::read_to_string(data("mini/manifest.toml")).unwrap().parse().unwrap();
    let stats: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("out/network_stats.json")).unwrap()).unwrap();
    for (k, v) in &manifest {
        if k == "service_date" {
            continue;
        }
        assert_eq!(stats["stats"][k].as_i64(), v.as_integer(), "{k}");
    }
}

#[test]
fn rebuild_gives_identical_dump() {
    let dir = TempDir::new().unwrap();
    let cfg = mini_config(dir.path());
    let dump = dir.path().join("out/network.bin");
    run_ok(&["-c", s(&cfg), "build-network"]);
    let first = fs::read(&dump).unwrap();
    run_ok(&["-c", s(&cfg), "build-network"]);
    assert_eq!(first, fs::read(&dump).unwrap());
    assert_eq!(trs_core::transit::TransitGraph::from_bytes(&first).unwrap().stats().total_links, 13);
}

#[test]
fn empty_feed_is_an_input_error() {
    let dir = TempDir::new().unwrap();
    let gtfs = dir.path().join("gtfs");
    fs::create_dir(&gtfs).unwrap();
    for f in ["stops.txt", "routes.txt", "trips.txt", "stop_times.txt"] {
        let header = fs::read_to_string(data("mini/gtfs").join(f)).unwrap();
        fs::write(gtfs.join(f), header.lines().next().unwrap()).unwrap();
    }
    let m = data("mini");
    let cfg = write_config(
        dir.path(),
        &format!(
            "[paths]\nroad_nodes = {:?}\nroad_links = {:?}\ngtfs_dir = \"gtfs\"\nrequests = {:?}\n",
            m.join("road_nodes.csv"),
            m.join("road_links.csv"),
            m.join("requests.csv"),
        ),
    );
    let out = trs(&["-c", s(&cfg), "build-network"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("stop_times.txt"));
}

/// Writes the drop-off illustration as road tables, a request file and a
/// graph dump, with a config using its weights.
fn illustration_config(dir: &Path, mode: &str) -> PathBuf {
    let fx = fixtures::illustration();
    let (mut nodes, mut links) = (Vec::new(), Vec::new());
    fx.road().write_tables(&mut nodes, &mut links).unwrap();
    fs::write(dir.join("nodes.csv"), nodes).unwrap();
    fs::write(dir.join("links.csv"), links).unwrap();
    let mut reqs = Vec::new();
    write_requests(&mut reqs, &[], &fx.requests).unwrap();
    fs::write(dir.join("requests.csv"), reqs).unwrap();
    fx.graph.write_dump(&dir.join("fixture.bin")).unwrap();
    let w = fx.params.weights;
    write_config(
        dir,
        &format!(
            "[paths]\nroad_nodes = \"nodes.csv\"\nroad_links = \"links.csv\"\ngraph = \"fixture.bin\"\nrequests = \"requests.csv\"\noutput_dir = \"out\"\n\n\
             [matching]\nmode = \"{mode}\"\nservice_time = {}\n\n[matching.weights]\naccess = {:?}\nin_vehicle = {:?}\nwait_transfer = {:?}\nwalk_transfer = {:?}\n",
            fx.params.service_time, w.access, w.in_vehicle, w.wait_transfer, w.walk_transfer
        ),
    )
}

#[test]
fn illustration_has_one_optimal_match_under_both_objectives() {
    let dir = TempDir::new().unwrap();
    let cfg = illustration_config(dir.path(), "static-trs");
    run_ok(&["-c", s(&cfg), "match", "--objective", "both"]);
    let fx = fixtures::illustration();
    let out = dir.path().join("out");
    let ms = load_matches(&out.join("matches.csv"), fx.road()).unwrap();
    assert_eq!(ms.len(), 1);
    let via_n1: Vec<&str> = std::iter::once("n1").chain(PI_2).collect();
    assert_eq!(ms[0].itinerary, fx.path(&via_n1));
    for tag in ["z1", "z2"] {
        let pairs = assignment_pairs(&out.join(format!("assignment_{tag}.csv")));
        assert_eq!(pairs, BTreeSet::from([(fx.rider.id(), fx.driver.id())]), "{tag}");
    }
    run_ok(&["-c", s(&cfg), "validate", "--matches", s(&out.join("matches.csv"))]);
}

#[test]
fn no_feasible_edges_give_an_empty_assignment() {
    let dir = TempDir::new().unwrap();
    // The driver cannot reach the rider's destination by its deadline.
    let cfg = illustration_config(dir.path(), "static-rs");
    let stdout = run_ok(&["-c", s(&cfg), "match"]);
    assert!(stdout.contains("Optimal matches           0"), "{stdout}");
    assert!(assignment_pairs(&dir.path().join("out/assignment_z2.csv")).is_empty());
    assert!(csv_rows(&dir.path().join("out/matches.csv")).is_empty());
}

#[test]
fn dynamic_mode_is_rejected_by_match() {
    let dir = TempDir::new().unwrap();
    let cfg = illustration_config(dir.path(), "dynamic");
    assert_eq!(code(&["-c", s(&cfg), "match"]), 1);
    run_ok(&["-c", s(&cfg), "run"]);
    assert!(dir.path().join("out/sim_summary.json").exists());
}

#[test]
fn violated_matches_exit_with_two() {
    let dir = TempDir::new().unwrap();
    let cfg = illustration_config(dir.path(), "static-trs");
    run_ok(&["-c", s(&cfg), "match"]);
    let path = dir.path().join("out/matches.csv");
    let text = fs::read_to_string(&path).unwrap();
    let mut rows = csv_rows(&path);
    let arrive = rows[0][4].parse::<i64>().unwrap();
    let forged: Vec<String> =
        rows[0].iter().enumerate().map(|(i, f)| if i == 4 { (arrive + 60).to_string() } else { f.to_string() }).collect();
    rows[0] = csv::StringRecord::from(forged);
    let header = text.lines().find(|l| l.starts_with("rider,")).unwrap();
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, format!("{header}\n{}\n", rows[0].iter().collect::<Vec<_>>().join(","))).unwrap();
    let out = trs(&["-c", s(&cfg), "validate", "--matches", s(&bad)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stdout).contains("consistency"));
}

#[test]
fn config_errors_exit_with_one() {
    let dir = TempDir::new().unwrap();
    let cfg = illustration_config(dir.path(), "static-trs");
    assert_eq!(code(&["-c", s(&cfg), "--set", "matching.colour=1", "match"]), 1);
    assert_eq!(code(&["-c", s(&cfg), "--set", "paths.requests=missing.csv", "match"]), 1);
    assert_eq!(code(&["-c", s(&cfg), "--set", "matching.mode=diagonal", "match"]), 1);
    assert_eq!(code(&["-c", s(&cfg), "--set", "matching.multi_label=true", "match"]), 1);
    assert_eq!(code(&["-c", s(&dir.path().join("nope.toml")), "match"]), 1);
}

#[test]
fn outputs_carry_provenance() {
    let dir = TempDir::new().unwrap();
    let cfg = illustration_config(dir.path(), "static-trs");
    run_ok(&["-c", s(&cfg), "match"]);
    let text = fs::read_to_string(dir.path().join("out/assignment_z2.csv")).unwrap();
    for key in ["# tool: trs ", "# config_sha256: ", "# seed: ", "# input graph: sha256 ", "# input requests: sha256 "] {
        assert!(text.contains(key), "missing {key}");
    }
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("out/summary.json")).unwrap()).unwrap();
    assert_eq!(summary["report"]["results"][0]["optimal_matches"], 1);
}

/// A small synthetic city with a generated-scenario config.
fn city(dir: &Path, n_trips: usize) -> PathBuf {
    let c = dir.join("city");
    run_ok(&["synth-city", "--out", s(&c), "--grid", "17", "--core-half-width", "5"]);
    let cfg = c.join("run.toml");
    let text = fs::read_to_string(&cfg).unwrap().replace("n_trips = 2000", &format!("n_trips = {n_trips}"));
    fs::write(&cfg, text).unwrap();
    cfg
}

fn load(cfg: &Path, overrides: &[&str]) -> RunConfig {
    let o: Vec<String> = overrides.iter().map(|s| s.to_string()).collect();
    RunConfig::load(Some(cfg), &o).unwrap()
}

#[test]
fn combined_finds_at_least_as_many_matches_as_either_family() {
    let dir = TempDir::new().unwrap();
    let cfg = city(dir.path(), 600);
    for seed in [1, 2, 3] {
        let seed = format!("scenario.seed={seed}");
        let mut counts = Vec::new();
        for mode in ["static-trs", "static-rs", "static-combined"] {
            let c = load(&cfg, &[&seed, &format!("matching.mode={mode}")]);
            let rep = commands::match_cmd(&c, &[Objective::MaxMatches]).unwrap();
            counts.push((rep.feasible_matches, rep.results[0].summary.optimal_matches));
        }
        let (trs, rs, both) = (counts[0], counts[1], counts[2]);
        assert!(both.0 >= trs.0.max(rs.0), "{seed}: {counts:?}");
        assert!(both.1 >= trs.1.max(rs.1), "{seed}: {counts:?}");
    }
}

#[test]
fn single_step_simulation_reproduces_static_matching() {
    let dir = TempDir::new().unwrap();
    let cfg = city(dir.path(), 500);
    let base = load(&cfg, &["matching.mode=static-combined", "matching.objective=max-matches"]);
    let oracle = load_road(&base).unwrap();
    let stops = TransitSource::load(&base).unwrap().unwrap().stop_points();
    let demand = load_demand(&base, &base.scenario, &oracle, &stops).unwrap();
    let start = demand.participants.iter().map(|p| p.request.announce_time).min().unwrap();
    let last = demand.participants.iter().map(|p| p.windows.latest_arrive).max().unwrap();
    let len = last - start;

    commands::match_cmd(&base, &[Objective::MaxMatches]).unwrap();
    let static_pairs = assignment_pairs(&base.paths.output("assignment_z1.csv"));
    assert!(!static_pairs.is_empty());

    let sim = load(
        &cfg,
        &[
            "matching.objective=max-matches",
            "simulation.engine=combined",
            &format!("simulation.step_len={len}"),
            &format!("simulation.lead_time={len}"),
            &format!("simulation.start={start}"),
            &format!("simulation.end={}", start + len),
        ],
    );
    let rep = commands::simulate(&sim).unwrap();
    let dynamic_pairs: BTreeSet<(u64, u64)> = rep.finalized.iter().map(|f| (f.m.rider, f.m.driver)).collect();
    assert_eq!(static_pairs, dynamic_pairs);
}

#[test]
fn simulation_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let cfg = city(dir.path(), 400);
    let c = s(&cfg);
    let out = dir.path().join("city/out");
    run_ok(&["-c", c, "simulate"]);
    let first: Vec<String> = ["finalized.csv", "expired.csv"].iter().map(|f| fs::read_to_string(out.join(f)).unwrap()).collect();
    assert!(!csv_rows(&out.join("steps.csv")).is_empty());
    run_ok(&["-c", c, "simulate"]);
    let second: Vec<String> = ["finalized.csv", "expired.csv"].iter().map(|f| fs::read_to_string(out.join(f)).unwrap()).collect();
    assert_eq!(first, second);
}

#[test]
fn zero_requests_give_an_empty_report() {
    let dir = TempDir::new().unwrap();
    let cfg = city(dir.path(), 400);
    let empty = dir.path().join("none.csv");
    fs::write(&empty, "id,role,origin_node,dest_node,announce_time,pref_depart,pref_arrive,sched_dev,travel_delay\n").unwrap();
    let c = load(&cfg, &[&format!("paths.requests={:?}", s(&empty))]);
    let rep = commands::simulate(&c).unwrap();
    assert_eq!(rep.participants, 0);
    assert!(rep.finalized.is_empty() && rep.expired.is_empty());
    let m = commands::match_cmd(&c, &[Objective::MaxSavings]).unwrap();
    assert_eq!(m.feasible_matches, 0);
}

#[test]
fn rider_flexibility_never_shrinks_the_edge_set() {
    let dir = TempDir::new().unwrap();
    let cfg = city(dir.path(), 500);
    let c = load(&cfg, &["matching.mode=static-combined"]);
    let values = [0.25, 0.5, 1.0, 1.5, 2.0, 3.0];
    let rows = commands::sweep(&c, commands::SweepDimension::RiderFlex, &values).unwrap();
    assert_eq!(rows.len(), values.len());
    for w in rows.windows(2) {
        assert!(w[1].feasible_matches >= w[0].feasible_matches, "{} -> {}", w[0].value, w[1].value);
    }
    assert!(c.paths.output("sweep_rider_flex.csv").exists());
}

#[test]
fn single_value_sweep_matches_match() {
    let dir = TempDir::new().unwrap();
    let cfg = city(dir.path(), 400);
    let c = load(&cfg, &["scenario.driver_rider_ratio=0.5"]);
    let m = commands::match_cmd(&c, &[c.matching.objective]).unwrap();
    let rows = commands::sweep(&load(&cfg, &[]), commands::SweepDimension::Ratio, &[0.5]).unwrap();
    assert_eq!(rows[0].feasible_matches, m.feasible_matches);
    assert_eq!(rows[0].optimal_matches, m.results[0].summary.optimal_matches);
    assert_eq!(rows[0].savings_veh_hrs, m.results[0].savings_veh_hrs);
}

#[test]
fn scenario_then_match_from_file_agrees_with_generated() {
    let dir = TempDir::new().unwrap();
    let cfg = city(dir.path(), 400);
    let c = s(&cfg);
    run_ok(&["-c", c, "scenario"]);
    let out = dir.path().join("city/out");
    assert!(out.join("requests.manifest.json").exists());
    run_ok(&["-c", c, "match"]);
    let generated = assignment_pairs(&out.join("assignment_z2.csv"));
    run_ok(&["-c", c, "--set", "paths.requests=\"out/requests.csv\"", "match"]);
    assert_eq!(assignment_pairs(&out.join("assignment_z2.csv")), generated);
    run_ok(&["-c", c, "validate", "--matches", s(&out.join("matches.csv"))]);
}
