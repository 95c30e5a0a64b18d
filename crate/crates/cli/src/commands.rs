//! The subcommands. Each returns after writing its files into
//! `paths.output_dir` and printing a human-readable summary to stdout.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use log::info;
use serde::Serialize;
use serde_json::json;
use trs_core::feasibility::{validate_match, Condition, FeasibleMatch, MatchEngine, MatchMode};
use trs_core::horizon;
use trs_core::optimize::{solve, summarize, write_assignment, AssignmentSummary, MatchingInstance, Objective};
use trs_core::records::{load_matches, write_matches};
use trs_core::request::{write_requests, Participant};
use trs_core::scenario::ScenarioParams;
use trs_core::synth::{synth_city, CityParams};
use trs_core::transit::{NetworkStats, TransitGraph};

use crate::config::{RunConfig, RunMode};
use crate::error::{CliError, CliResult};
use crate::inputs::{load_demand, load_road, require_transit, Demand, TransitSource};
use crate::provenance::{sha256_hex, Provenance};

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    Ok(BufWriter::new(File::create(path).map_err(|e| CliError::io(path, e))?))
}

fn write_with(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> CliResult<()> {
    let mut w = create(path)?;
    f(&mut w).and_then(|_| w.flush()).map_err(|e| CliError::io(path, e))?;
    info!("wrote {}", path.display());
    Ok(())
}

fn write_json(path: &Path, value: &impl Serialize) -> CliResult<()> {
    write_with(path, |w| {
        serde_json::to_writer_pretty(&mut *w, value)?;
        writeln!(w)
    })
}

fn print_table(title: &str, rows: &[(String, String)]) {
    let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    println!("{title}");
    for (k, v) in rows {
        println!("  {k:<width$}  {v}");
    }
}

fn row(k: &str, v: impl ToString) -> (String, String) {
    (k.to_string(), v.to_string())
}

fn minutes(s: f64) -> String {
    format!("{:.2}", s / 60.0)
}

fn stats_rows(s: &NetworkStats) -> Vec<(String, String)> {
    vec![
        row("Number of stops", s.stops),
        row("Number of routes", s.routes),
        row("Number of trips", s.trips),
        row("Number of nodes", s.nodes),
        row("Number of stop-time nodes", s.event_nodes),
        row("Number of anchor nodes", s.anchor_nodes),
        row("Number of in-vehicle links", s.in_vehicle_links),
        row("Number of waiting transfer links", s.wait_transfer_links),
        row("Number of walking transfer links", s.walk_transfer_links),
        row("Number of access links", s.access_links),
        row("Number of egress links", s.egress_links),
        row("Total links", s.total_links),
    ]
}

pub fn build_network(cfg: &RunConfig) -> CliResult<()> {
    let prov = Provenance::new("build-network", cfg)?;
    let oracle = load_road(cfg)?;
    let p = &cfg.paths;
    let dir = p.require("gtfs_dir", &p.gtfs_dir)?;
    let src = TransitSource::Feed(trs_core::gtfs::GtfsFeed::load_dir(dir)?);
    let demand = load_demand(cfg, &cfg.scenario, &oracle, &src.stop_points())?;
    let (g, secs) = src.graph(cfg, oracle.graph(), &demand.participants)?;
    let bytes = g.to_bytes();
    let dump = p.output("network.bin");
    write_with(&dump, |w| w.write_all(&bytes))?;
    let stats = g.stats();
    let digest = sha256_hex(&bytes);
    let mut rows = stats_rows(&stats);
    rows.push(row("Build time (s)", format!("{secs:.2}")));
    rows.push(row("Graph dump sha256", &digest));
    print_table("Transit network", &rows);
    write_json(
        &p.output("network_stats.json"),
        &json!({ "provenance": prov.lines, "stats": stats, "build_seconds": secs, "dump": dump, "dump_sha256": digest }),
    )
}

#[derive(Clone, Debug, Serialize)]
pub struct ObjectiveResult {
    #[serde(flatten)]
    pub summary: AssignmentSummary,
    pub optimize_seconds: f64,
    pub savings_veh_hrs: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct MatchReport {
    pub mode: MatchMode,
    pub riders: usize,
    pub drivers: usize,
    pub build_seconds: f64,
    pub feasibility_seconds: f64,
    pub feasible_matches: usize,
    pub results: Vec<ObjectiveResult>,
}

struct StaticRun {
    report: MatchReport,
    edges: Vec<FeasibleMatch>,
    solved: Vec<(MatchingInstance, trs_core::optimize::Assignment, AssignmentSummary)>,
}

fn static_run(
    cfg: &RunConfig,
    src: Option<&TransitSource>,
    demand: &Demand,
    oracle: &trs_core::road::TravelTimeOracle,
    objectives: &[Objective],
) -> CliResult<(StaticRun, Option<TransitGraph>)> {
    let mode = cfg.engine_mode();
    let (graph, build_seconds) = match (mode.needs_transit(), src) {
        (true, None) => return Err(CliError::Input(format!("mode {:?} needs paths.gtfs_dir or paths.graph", cfg.matching.mode))),
        (true, Some(s)) => {
            let (g, t) = s.graph(cfg, oracle.graph(), &demand.participants)?;
            (Some(g), t)
        }
        (false, _) => (None, 0.0),
    };
    let engine = MatchEngine::new(graph.as_ref(), oracle, cfg.search_params(), mode)?;
    let (riders, drivers) = (demand.riders(), demand.drivers());
    let t0 = Instant::now();
    let edges = engine.all_matches(&riders, &drivers);
    let feasibility_seconds = t0.elapsed().as_secs_f64();
    info!("{} feasible matches in {feasibility_seconds:.2} s", edges.len());
    let direct: BTreeMap<u64, i64> = demand.participants.iter().map(|p| (p.id(), p.direct_time)).collect();
    let mut solved = Vec::new();
    let mut results = Vec::new();
    for &obj in objectives {
        let inst = MatchingInstance::new(edges.clone(), obj);
        let t1 = Instant::now();
        let asg = solve(&inst);
        let optimize_seconds = t1.elapsed().as_secs_f64();
        inst.check_selection(&asg.selected).map_err(|e| CliError::Invariant(e.to_string()))?;
        let summary = summarize(&inst, &asg, demand.participants.len(), |d| direct.get(&d).copied());
        results.push(ObjectiveResult {
            savings_veh_hrs: summary.total_savings as f64 / 3600.0,
            summary: summary.clone(),
            optimize_seconds,
        });
        solved.push((inst, asg, summary));
    }
    let report = MatchReport {
        mode,
        riders: riders.len(),
        drivers: drivers.len(),
        build_seconds,
        feasibility_seconds,
        feasible_matches: edges.len(),
        results,
    };
    Ok((StaticRun { report, edges, solved }, graph))
}

fn print_match_report(r: &MatchReport) {
    for res in &r.results {
        let s = &res.summary;
        print_table(
            &format!("Static matching, {:?}, objective {}", r.mode, s.objective),
            &[
                row("Riders", r.riders),
                row("Drivers", r.drivers),
                row("Run time (s)", format!("{:.2}", r.feasibility_seconds + res.optimize_seconds)),
                row("Feasible matches |M|", s.feasible_matches),
                row("Optimal matches", s.optimal_matches),
                row("Matching rate", format!("{:.3}", s.matching_rate)),
                row("Veh-hrs savings", format!("{:.2}", res.savings_veh_hrs)),
                row("Avg detour (min)", minutes(s.avg_detour)),
                row("Avg shared driving (min)", minutes(s.avg_shared)),
                row("Avg transit (min)", minutes(s.avg_transit)),
                row("Avg walking (min)", minutes(s.avg_walk)),
                row("Avg waiting (min)", minutes(s.avg_wait)),
            ],
        );
    }
}

pub fn match_cmd(cfg: &RunConfig, objectives: &[Objective]) -> CliResult<MatchReport> {
    if cfg.matching.mode == RunMode::Dynamic {
        return Err(CliError::Input("matching.mode = dynamic: use the simulate command".into()));
    }
    let prov = Provenance::new("match", cfg)?;
    let oracle = load_road(cfg)?;
    let src = TransitSource::load(cfg)?;
    let stops = src.as_ref().map(TransitSource::stop_points).unwrap_or_default();
    let demand = load_demand(cfg, &cfg.scenario, &oracle, &stops)?;
    let (run, _) = static_run(cfg, src.as_ref(), &demand, &oracle, objectives)?;
    let header = prov.with(demand.header_lines().into_iter().chain([format!("mode: {:?}", run.report.mode)]));
    let p = &cfg.paths;
    write_with(&p.output("matches.csv"), |w| write_matches(w, &header, &run.edges, oracle.graph()))?;
    for (inst, asg, summary) in &run.solved {
        let name = format!("assignment_{}.csv", inst.objective.tag().to_lowercase());
        write_with(&p.output(&name), |w| write_assignment(w, &header, inst, asg, summary))?;
    }
    write_json(&p.output("summary.json"), &json!({ "provenance": prov.lines, "report": run.report }))?;
    print_match_report(&run.report);
    Ok(run.report)
}

pub fn simulate(cfg: &RunConfig) -> CliResult<horizon::SimReport> {
    let prov = Provenance::new("simulate", cfg)?;
    let oracle = load_road(cfg)?;
    let src = TransitSource::load(cfg)?;
    let stops = src.as_ref().map(TransitSource::stop_points).unwrap_or_default();
    let demand = load_demand(cfg, &cfg.scenario, &oracle, &stops)?;
    let mode = cfg.sim_mode();
    let graph = if mode.needs_transit() { Some(require_transit(src)?.graph(cfg, oracle.graph(), &demand.participants)?.0) } else { None };
    let engine = MatchEngine::new(graph.as_ref(), &oracle, cfg.search_params(), mode)?;
    let sim = cfg.sim_config();
    let t0 = Instant::now();
    let rep = horizon::run(&demand.participants, &sim, &engine)?;
    let secs = t0.elapsed().as_secs_f64();
    check_simulation(&rep, &demand.participants)?;

    let header = prov.with(demand.header_lines());
    let p = &cfg.paths;
    write_with(&p.output("steps.csv"), |w| {
        for l in &header {
            writeln!(w, "# {l}")?;
        }
        writeln!(w, "step,start,new_riders,new_drivers,pairs_evaluated,feasible_added,open_matches,optimal_matches,finalized,expired,active_riders,active_drivers,feasibility_s,optimize_s")?;
        for s in &rep.steps {
            let c = &s.counts;
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{},{},{},{:.4},{:.4}",
                c.step,
                c.start,
                c.new_riders,
                c.new_drivers,
                c.pairs_evaluated,
                c.feasible_added,
                c.open_matches,
                c.optimal_matches,
                c.finalized,
                c.expired,
                c.active_riders,
                c.active_drivers,
                s.times.feasibility,
                s.times.optimize
            )?;
        }
        Ok(())
    })?;
    write_with(&p.output("finalized.csv"), |w| {
        for l in &header {
            writeln!(w, "# {l}")?;
        }
        writeln!(w, "step,decided_at,rider,driver,variant,dropoff_node,depart_time,arrive_time,t_vhrs")?;
        for f in &rep.finalized {
            let m = &f.m;
            let dropoff = m.transfer_node.map(|j| j.to_string()).unwrap_or_default();
            writeln!(
                w,
                "{},{},{},{},{},{dropoff},{},{},{}",
                f.step, f.decided_at, m.rider, m.driver, m.variant, m.depart_time, m.arrive_time, m.t_vhrs
            )?;
        }
        Ok(())
    })?;
    write_with(&p.output("expired.csv"), |w| {
        for l in &header {
            writeln!(w, "# {l}")?;
        }
        writeln!(w, "id,role,step,step_start,late")?;
        for e in &rep.expired {
            writeln!(w, "{},{},{},{},{}", e.id, e.role, e.step, e.step_start, e.late)?;
        }
        Ok(())
    })?;
    let summary = json!({
        "provenance": prov.lines,
        "mode": mode,
        "config": rep.config,
        "steps": rep.steps.len(),
        "participants": rep.participants,
        "matched_participants": rep.matched_participants,
        "finalized": rep.finalized.len(),
        "expired": rep.expired.len(),
        "matching_rate": rep.matching_rate,
        "total_savings": rep.total_savings,
        "pairs_evaluated": rep.pairs_evaluated,
        "run_seconds": secs,
    });
    write_json(&p.output("sim_summary.json"), &summary)?;
    let max_step = rep.steps.iter().map(|s| s.times.feasibility + s.times.optimize).fold(0.0, f64::max);
    print_table(
        &format!("Rolling-horizon simulation, {mode:?}, objective {}", sim.objective.tag()),
        &[
            row("Steps", rep.steps.len()),
            row("Participants", rep.participants),
            row("Finalized matches", rep.finalized.len()),
            row("Expired requests", rep.expired.len()),
            row("Matching rate", format!("{:.3}", rep.matching_rate)),
            row("Veh-hrs savings", format!("{:.2}", rep.total_savings as f64 / 3600.0)),
            row("Pairs evaluated", rep.pairs_evaluated),
            row("Longest step (s)", format!("{max_step:.2}")),
            row("Run time (s)", format!("{secs:.2}")),
        ],
    );
    Ok(rep)
}

/// Fails when a participant was finalized twice or finalized and expired.
fn check_simulation(rep: &horizon::SimReport, people: &[Participant]) -> CliResult<()> {
    let mut seen = std::collections::HashSet::new();
    for f in &rep.finalized {
        if !seen.insert((trs_core::request::Role::Rider, f.m.rider)) || !seen.insert((trs_core::request::Role::Driver, f.m.driver)) {
            return Err(CliError::Invariant(format!("participant of match ({}, {}) finalized twice", f.m.rider, f.m.driver)));
        }
    }
    for e in &rep.expired {
        if seen.contains(&(e.role, e.id)) {
            return Err(CliError::Invariant(format!("request {} both finalized and expired", e.id)));
        }
    }
    if seen.len() + rep.expired.len() > people.len() {
        return Err(CliError::Invariant("more outcomes than requests".into()));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum SweepDimension {
    RiderFlex,
    DriverFlex,
    Participation,
    Ratio,
}

impl SweepDimension {
    fn apply(self, p: &mut ScenarioParams, v: f64) {
        match self {
            SweepDimension::RiderFlex => p.rider_flex = v,
            SweepDimension::DriverFlex => p.driver_flex = v,
            SweepDimension::Participation => p.participation_rate = v,
            SweepDimension::Ratio => p.driver_rider_ratio = v,
        }
    }

    fn name(self) -> &'static str {
        match self {
            SweepDimension::RiderFlex => "rider_flex",
            SweepDimension::DriverFlex => "driver_flex",
            SweepDimension::Participation => "participation",
            SweepDimension::Ratio => "ratio",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub riders: usize,
    pub drivers: usize,
    pub run_seconds: f64,
    pub feasible_matches: usize,
    pub optimal_matches: usize,
    pub matching_rate: f64,
    pub savings_veh_hrs: f64,
}

pub fn sweep(cfg: &RunConfig, dim: SweepDimension, values: &[f64]) -> CliResult<Vec<SweepRow>> {
    if cfg.paths.requests.is_some() {
        return Err(CliError::Input("sweep regenerates requests from [scenario]; unset paths.requests".into()));
    }
    if values.is_empty() {
        return Err(CliError::Input("sweep needs at least one value".into()));
    }
    if cfg.matching.mode == RunMode::Dynamic {
        return Err(CliError::Input("sweep runs static matching; choose a static matching.mode".into()));
    }
    let prov = Provenance::new("sweep", cfg)?;
    let oracle = load_road(cfg)?;
    let src = TransitSource::load(cfg)?;
    let stops = src.as_ref().map(TransitSource::stop_points).unwrap_or_default();
    let mut rows = Vec::new();
    for &v in values {
        let mut params = cfg.scenario.clone();
        dim.apply(&mut params, v);
        params.validate()?;
        let demand = load_demand(cfg, &params, &oracle, &stops)?;
        let (run, _) = static_run(cfg, src.as_ref(), &demand, &oracle, &[cfg.matching.objective])?;
        let r = &run.report;
        let res = &r.results[0];
        rows.push(SweepRow {
            value: v,
            riders: r.riders,
            drivers: r.drivers,
            run_seconds: r.feasibility_seconds + res.optimize_seconds,
            feasible_matches: r.feasible_matches,
            optimal_matches: res.summary.optimal_matches,
            matching_rate: res.summary.matching_rate,
            savings_veh_hrs: res.savings_veh_hrs,
        });
    }
    let path = cfg.paths.output(&format!("sweep_{}.csv", dim.name()));
    write_with(&path, |w| {
        for l in &prov.lines {
            writeln!(w, "# {l}")?;
        }
        writeln!(w, "{},riders,drivers,run_seconds,feasible_matches,optimal_matches,matching_rate,savings_veh_hrs", dim.name())?;
        for r in &rows {
            writeln!(
                w,
                "{},{},{},{:.4},{},{},{:.6},{:.4}",
                r.value, r.riders, r.drivers, r.run_seconds, r.feasible_matches, r.optimal_matches, r.matching_rate, r.savings_veh_hrs
            )?;
        }
        Ok(())
    })?;
    let peak = rows.iter().max_by(|a, b| a.optimal_matches.cmp(&b.optimal_matches).then(b.value.total_cmp(&a.value))).unwrap();
    println!("Sweep over {} ({} objective)", dim.name(), cfg.matching.objective.tag());
    println!(
        "  {:>8}  {:>7}  {:>7}  {:>8}  {:>9}  {:>8}  {:>6}  {:>9}",
        dim.name(),
        "riders",
        "drivers",
        "time (s)",
        "|M|",
        "optimal",
        "rate",
        "veh-hrs"
    );
    for r in &rows {
        println!(
            "  {:>8}  {:>7}  {:>7}  {:>8.2}  {:>9}  {:>8}  {:>6.3}  {:>9.2}",
            r.value, r.riders, r.drivers, r.run_seconds, r.feasible_matches, r.optimal_matches, r.matching_rate, r.savings_veh_hrs
        );
    }
    println!("  peak optimal matches: {} at {} = {}", peak.optimal_matches, dim.name(), peak.value);
    write_json(
        &cfg.paths.output(&format!("sweep_{}.json", dim.name())),
        &json!({ "provenance": prov.lines, "dimension": dim.name(), "rows": rows, "peak_value": peak.value }),
    )?;
    Ok(rows)
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct ValidationReport {
    pub matches: usize,
    pub valid: usize,
    pub violations: BTreeMap<String, usize>,
}

pub fn validate(cfg: &RunConfig, matches: &Path) -> CliResult<ValidationReport> {
    let oracle = load_road(cfg)?;
    let src = TransitSource::load(cfg)?;
    let stops = src.as_ref().map(TransitSource::stop_points).unwrap_or_default();
    let demand = load_demand(cfg, &cfg.scenario, &oracle, &stops)?;
    let ms = load_matches(matches, oracle.graph())?;
    let graph = match &src {
        Some(s) => Some(s.graph(cfg, oracle.graph(), &demand.participants)?.0),
        None => None,
    };
    if graph.is_none() && ms.iter().any(|m| m.variant != trs_core::feasibility::Variant::Standalone) {
        return Err(CliError::Input("transit matches need paths.gtfs_dir or paths.graph".into()));
    }
    let by_id: BTreeMap<u64, &Participant> = demand.participants.iter().map(|p| (p.id(), p)).collect();
    let params = cfg.search_params();
    let mut rep = ValidationReport { matches: ms.len(), ..Default::default() };
    let mut first = None;
    for (i, m) in ms.iter().enumerate() {
        let (Some(r), Some(d)) = (by_id.get(&m.rider), by_id.get(&m.driver)) else {
            return Err(CliError::Input(format!(
                "{}: match {} names unknown participants ({}, {})",
                matches.display(),
                i + 1,
                m.rider,
                m.driver
            )));
        };
        let v = validate_match(m, r, d, graph.as_ref(), &oracle, &params);
        if v.is_empty() {
            rep.valid += 1;
        }
        for x in &v {
            *rep.violations.entry(condition_name(x.condition).to_string()).or_default() += 1;
        }
        if first.is_none() && !v.is_empty() {
            first = Some(format!("match {} ({}, {}): {}", i + 1, m.rider, m.driver, v[0]));
        }
    }
    print_table(
        "Feasible-match validation",
        &std::iter::once(row("Matches", rep.matches))
            .chain(std::iter::once(row("Valid", rep.valid)))
            .chain(rep.violations.iter().map(|(k, n)| row(k, n)))
            .collect::<Vec<_>>(),
    );
    match first {
        None => Ok(rep),
        Some(f) => {
            Err(CliError::Invariant(format!("{} of {} matches violate feasibility; first: {f}", rep.matches - rep.valid, rep.matches)))
        }
    }
}

fn condition_name(c: Condition) -> &'static str {
    match c {
        Condition::DriverDeparture => "driver departure",
        Condition::DriverArrival => "driver arrival",
        Condition::Pickup => "pick-up",
        Condition::RiderArrival => "rider arrival",
        Condition::OptimalItinerary => "optimal itinerary",
        Condition::Consistency => "consistency",
    }
}

pub fn scenario(cfg: &RunConfig, out: Option<PathBuf>) -> CliResult<Demand> {
    if cfg.paths.requests.is_some() {
        return Err(CliError::Input("scenario generates requests; unset paths.requests".into()));
    }
    let prov = Provenance::new("scenario", cfg)?;
    let oracle = load_road(cfg)?;
    let src = TransitSource::load(cfg)?;
    let stops = src.as_ref().map(TransitSource::stop_points).unwrap_or_default();
    let demand = load_demand(cfg, &cfg.scenario, &oracle, &stops)?;
    let path = out.unwrap_or_else(|| cfg.paths.output("requests.csv"));
    let header = prov.with(demand.header_lines());
    write_with(&path, |w| write_requests(w, &header, &demand.requests))?;
    let m = demand.manifest.as_ref().expect("generated demand has a manifest");
    write_json(&path.with_extension("manifest.json"), &json!({ "provenance": prov.lines, "manifest": m }))?;
    print_table(
        "Scenario",
        &[
            row("Sampled trips", m.sampled),
            row("Disconnected", m.disconnected),
            row("Not participating", m.not_participating),
            row("Walkable to transit (excluded)", m.fmlm_excluded),
            row("Riders", m.riders),
            row("Drivers", m.drivers),
            row("Requests file", path.display()),
        ],
    );
    Ok(demand)
}

/// Writes a synthetic road network, feed and a run config pointing at them.
pub fn synth_city_cmd(params: &CityParams, out: &Path) -> CliResult<()> {
    let city = synth_city(params)?;
    std::fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    let (nodes, links) = (out.join("road_nodes.csv"), out.join("road_links.csv"));
    let (mut wn, mut wl) = (create(&nodes)?, create(&links)?);
    city.road.write_tables(&mut wn, &mut wl)?;
    wn.flush().map_err(|e| CliError::io(&nodes, e))?;
    wl.flush().map_err(|e| CliError::io(&links, e))?;
    let gtfs = out.join("gtfs");
    std::fs::create_dir_all(&gtfs).map_err(|e| CliError::io(&gtfs, e))?;
    city.feed.write_dir(&gtfs)?;
    let run = out.join("run.toml");
    write_with(&run, |w| {
        writeln!(w, "[paths]")?;
        writeln!(w, "road_nodes = \"road_nodes.csv\"")?;
        writeln!(w, "road_links = \"road_links.csv\"")?;
        writeln!(w, "gtfs_dir = \"gtfs\"")?;
        writeln!(w, "output_dir = \"out\"")?;
        writeln!(w)?;
        writeln!(w, "[scenario]")?;
        writeln!(w, "n_trips = 2000")
    })?;
    print_table(
        "Synthetic city",
        &[
            row("Road nodes", city.road.len()),
            row("Road arcs", city.road.arc_count()),
            row("Stops", city.feed.stops.len()),
            row("Routes", city.feed.routes.len()),
            row("Trips", city.feed.trips.len()),
            row("Run config", run.display()),
        ],
    );
    Ok(())
}
