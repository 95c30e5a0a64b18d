//! Rolling-horizon simulation with a fixed time step.
//!
//! Step `k` covers `[clock, clock + step_len)`. Requests announced in that
//! interval join the system, feasible matches are generated only for pairs
//! involving a new participant, the assignment is re-solved over all open
//! matches, and optimal matches whose rider or driver must leave within the
//! lead time of `clock + step_len` are finalized. Requests that can no longer
//! wait for the next step are expired. After the horizon ends the loop keeps
//! stepping, without admitting anything, until no participant is active.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::time::Instant;

use log::{debug, info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::feasibility::{sort_matches, FeasibleMatch, MatchEngine, RiderState};
use crate::optimize::{solve, MatchingInstance, Objective};
use crate::request::{Participant, RequestId, Role};
use crate::time::{HOUR, MINUTE};
use crate::{Error, Result, Seconds};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    /// Step length.
    pub step_len: Seconds,
    /// Lead time before a participant's latest departure.
    pub lead_time: Seconds,
    pub start: Seconds,
    pub end: Seconds,
    pub objective: Objective,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig { step_len: 5 * MINUTE, lead_time: 5 * MINUTE, start: 5 * HOUR, end: 9 * HOUR, objective: Objective::MaxMatches }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.step_len <= 0 {
            return Err(Error::Config(format!("step_len must be positive, got {}", self.step_len)));
        }
        if self.lead_time < 0 {
            return Err(Error::Config(format!("lead_time must be non-negative, got {}", self.lead_time)));
        }
        if self.end < self.start {
            return Err(Error::Config(format!("horizon end {} precedes start {}", self.end, self.start)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Finalized {
    pub step: usize,
    /// End of the step that committed the match.
    pub decided_at: Seconds,
    #[serde(flatten)]
    pub m: FeasibleMatch,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Expiry {
    pub id: RequestId,
    pub role: Role,
    pub step: usize,
    /// Start of the step that removed the request.
    pub step_start: Seconds,
    /// Announced after its latest departure.
    pub late: bool,
}

/// Wall-clock seconds per phase.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct PhaseTimes {
    pub feasibility: f64,
    pub optimize: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct StepCounts {
    pub step: usize,
    pub start: Seconds,
    pub new_riders: usize,
    pub new_drivers: usize,
    pub pairs_evaluated: usize,
    pub feasible_added: usize,
    pub open_matches: usize,
    pub optimal_matches: usize,
    pub finalized: usize,
    pub expired: usize,
    pub active_riders: usize,
    pub active_drivers: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct StepReport {
    #[serde(flatten)]
    pub counts: StepCounts,
    #[serde(flatten)]
    pub times: PhaseTimes,
}

#[derive(Debug)]
pub struct SimState {
    pub clock: Seconds,
    pub active_riders: BTreeMap<RequestId, Participant>,
    pub active_drivers: BTreeMap<RequestId, Participant>,
    /// Canonically ordered.
    pub open_matches: Vec<FeasibleMatch>,
    pub finalized: Vec<Finalized>,
    pub expired: Vec<Expiry>,
    pub admitted: usize,
    rider_states: HashMap<RequestId, RiderState>,
    evaluated: HashSet<(RequestId, RequestId)>,
    next: usize,
    steps: usize,
}

impl SimState {
    pub fn new(cfg: &SimConfig) -> Self {
        SimState {
            clock: cfg.start,
            active_riders: BTreeMap::new(),
            active_drivers: BTreeMap::new(),
            open_matches: Vec::new(),
            finalized: Vec::new(),
            expired: Vec::new(),
            admitted: 0,
            rider_states: HashMap::new(),
            evaluated: HashSet::new(),
            next: 0,
            steps: 0,
        }
    }

    pub fn is_idle(&self) -> bool {
        self.active_riders.is_empty() && self.active_drivers.is_empty()
    }

    /// Every (rider, driver) pair the feasibility search has run on.
    pub fn evaluated_pairs(&self) -> usize {
        self.evaluated.len()
    }

    fn expire(&mut self, p: &Participant, late: bool) {
        self.expired.push(Expiry { id: p.id(), role: p.role(), step: self.steps, step_start: self.clock, late });
    }

    fn remove(&mut self, ids: &HashSet<(Role, RequestId)>) {
        for &(role, id) in ids {
            match role {
                Role::Rider => {
                    self.active_riders.remove(&id);
                    self.rider_states.remove(&id);
                }
                Role::Driver => {
                    self.active_drivers.remove(&id);
                }
            }
        }
        self.open_matches.retain(|m| !ids.contains(&(Role::Rider, m.rider)) && !ids.contains(&(Role::Driver, m.driver)));
    }
}

/// Runs one step. `requests` must be sorted by announce time.
pub fn step(state: &mut SimState, requests: &[Participant], cfg: &SimConfig, engine: &MatchEngine) -> StepReport {
    let index = state.steps;
    let clock = state.clock;
    let next_clock = clock + cfg.step_len;
    let mut counts = StepCounts { step: index, start: clock, ..Default::default() };
    let mut new_riders = Vec::new();
    let mut new_drivers = Vec::new();

    while let Some(p) = requests.get(state.next) {
        if p.request.announce_time >= next_clock {
            break;
        }
        debug_assert!(state.next == 0 || requests[state.next - 1].request.announce_time <= p.request.announce_time);
        state.next += 1;
        state.admitted += 1;
        if p.windows.latest_depart < clock {
            warn!("request {} announced after its latest departure, expired", p.id());
            state.expire(p, true);
            counts.expired += 1;
            continue;
        }
        match p.role() {
            Role::Rider => {
                new_riders.push(p.id());
                state.active_riders.insert(p.id(), p.clone());
            }
            Role::Driver => {
                new_drivers.push(p.id());
                state.active_drivers.insert(p.id(), p.clone());
            }
        }
    }
    counts.new_riders = new_riders.len();
    counts.new_drivers = new_drivers.len();

    // Feasibility for new riders against every driver and for earlier riders against new drivers.
    let t0 = Instant::now();
    let all_drivers: Vec<&Participant> = state.active_drivers.values().collect();
    let fresh_drivers: Vec<&Participant> = new_drivers.iter().map(|d| &state.active_drivers[d]).collect();
    let new_set: HashSet<RequestId> = new_riders.iter().copied().collect();
    let jobs: Vec<(&Participant, bool)> = state
        .active_riders
        .values()
        .map(|r| (r, new_set.contains(&r.id())))
        .filter(|&(_, is_new)| is_new || !fresh_drivers.is_empty())
        .collect();
    let cached = &state.rider_states;
    #[allow(clippy::type_complexity)]
    let results: Vec<(RequestId, Option<RiderState>, Vec<RequestId>, Vec<FeasibleMatch>)> = jobs
        .par_iter()
        .map(|&(r, is_new)| {
            let drivers: &[&Participant] = if is_new { &all_drivers } else { &fresh_drivers };
            let fresh = if is_new { Some(engine.prepare(r)) } else { None };
            let rs = fresh.as_ref().unwrap_or_else(|| &cached[&r.id()]);
            let ms = engine.matches_for(rs, r, drivers);
            (r.id(), fresh, drivers.iter().map(|d| d.id()).collect(), ms)
        })
        .collect();
    for (rider, fresh, drivers, ms) in results {
        if let Some(rs) = fresh {
            state.rider_states.insert(rider, rs);
        }
        for d in drivers {
            let first = state.evaluated.insert((rider, d));
            debug_assert!(first, "pair ({rider}, {d}) evaluated twice");
            counts.pairs_evaluated += 1;
        }
        counts.feasible_added += ms.len();
        state.open_matches.extend(ms);
    }
    sort_matches(&mut state.open_matches);
    counts.open_matches = state.open_matches.len();
    let feasibility = t0.elapsed().as_secs_f64();

    let t1 = Instant::now();
    let inst = MatchingInstance::new(std::mem::take(&mut state.open_matches), cfg.objective);
    let asg = solve(&inst);
    let optimize = t1.elapsed().as_secs_f64();
    counts.optimal_matches = asg.count();
    state.open_matches = inst.edges;

    let near = |p: &Participant| p.windows.latest_depart - next_clock <= cfg.lead_time;
    let mut gone: HashSet<(Role, RequestId)> = HashSet::new();
    let chosen: Vec<usize> = asg.selected_edges().collect();
    for k in chosen {
        let m = &state.open_matches[k];
        let (r, d) = (&state.active_riders[&m.rider], &state.active_drivers[&m.driver]);
        if near(r) || near(d) {
            debug!("step {index}: finalized rider {} with driver {}", m.rider, m.driver);
            gone.insert((Role::Rider, m.rider));
            gone.insert((Role::Driver, m.driver));
            state.finalized.push(Finalized { step: index, decided_at: next_clock, m: m.clone() });
            counts.finalized += 1;
        }
    }
    state.remove(&gone);

    // Unmatched requests that cannot wait for the next step.
    gone.clear();
    let leaving = |p: &Participant| p.windows.latest_depart < next_clock + cfg.step_len;
    let expiring: Vec<Participant> =
        state.active_riders.values().chain(state.active_drivers.values()).filter(|p| leaving(p)).cloned().collect();
    for p in &expiring {
        state.expire(p, false);
        gone.insert((p.role(), p.id()));
    }
    counts.expired += expiring.len();
    state.remove(&gone);

    counts.active_riders = state.active_riders.len();
    counts.active_drivers = state.active_drivers.len();
    state.clock = next_clock;
    state.steps += 1;
    StepReport { counts, times: PhaseTimes { feasibility, optimize } }
}

#[derive(Clone, Debug, Serialize)]
pub struct SimReport {
    pub config: SimConfig,
    pub steps: Vec<StepReport>,
    pub finalized: Vec<Finalized>,
    pub expired: Vec<Expiry>,
    pub participants: usize,
    pub matched_participants: usize,
    /// Matched participants over admitted participants.
    pub matching_rate: f64,
    /// Seconds of vehicle time saved by finalized matches.
    pub total_savings: Seconds,
    pub pairs_evaluated: usize,
}

/// Runs the whole horizon and drains the remaining participants.
pub fn run(requests: &[Participant], cfg: &SimConfig, engine: &MatchEngine) -> Result<SimReport> {
    cfg.validate()?;
    let mut sorted: Vec<Participant> = requests.to_vec();
    sorted.sort_by_key(|p| (p.request.announce_time, p.id()));
    let mut state = SimState::new(cfg);
    let mut steps = Vec::new();
    while state.clock < cfg.end || !state.is_idle() {
        steps.push(step(&mut state, &sorted, cfg, engine));
    }
    // Requests announced after the horizon never enter the system.
    let participants = state.admitted;
    let matched_participants = 2 * state.finalized.len();
    let total_savings = state.finalized.iter().map(|f| f.m.t_vhrs).sum();
    info!(
        "simulated {} steps: {} finalized matches, {} expired, {} pairs evaluated",
        steps.len(),
        state.finalized.len(),
        state.expired.len(),
        state.evaluated_pairs()
    );
    Ok(SimReport {
        config: *cfg,
        steps,
        matching_rate: if participants == 0 { 0.0 } else { matched_participants as f64 / participants as f64 },
        participants,
        matched_participants,
        total_savings,
        pairs_evaluated: state.evaluated_pairs(),
        finalized: state.finalized,
        expired: state.expired,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::feasibility::{MatchMode, SearchParams};
    use crate::geo::{DistanceMetric, Point};
    use crate::request::Request;
    use crate::road::{RoadGraph, TravelTimeOracle};
    use std::sync::Arc;

    fn line_oracle() -> TravelTimeOracle {
        let nodes: Vec<(u64, Point)> = (1..=4).map(|i| (i, Point::new(i as f64, 0.0))).collect();
        let mut arcs = Vec::new();
        for i in 1..4u64 {
            arcs.push((i, i + 1, 300));
            arcs.push((i + 1, i, 300));
        }
        TravelTimeOracle::new(Arc::new(RoadGraph::new(DistanceMetric::Euclidean, nodes, arcs).unwrap()))
    }

    fn req(id: u64, role: Role, o: u64, d: u64, announce: Seconds, depart: Seconds, dev: Seconds) -> Request {
        Request {
            id,
            role,
            origin: o,
            destination: d,
            announce_time: announce,
            pref_depart: Some(depart),
            pref_arrive: None,
            sched_dev: dev,
            travel_delay: dev,
        }
    }

    fn cfg(start: Seconds, end: Seconds) -> SimConfig {
        SimConfig { step_len: 300, lead_time: 300, start, end, objective: Objective::MaxMatches }
    }

    #[test]
    fn empty_step_advances_clock() {
        let oracle = line_oracle();
        let engine = MatchEngine::new(None, &oracle, SearchParams::default(), MatchMode::Standalone).unwrap();
        let c = cfg(0, 600);
        let mut st = SimState::new(&c);
        let r = step(&mut st, &[], &c, &engine);
        assert_eq!(st.clock, 300);
        assert_eq!(r.counts, StepCounts { step: 0, start: 0, ..Default::default() });
        let rep = run(&[], &c, &engine).unwrap();
        assert_eq!((rep.steps.len(), rep.matching_rate, rep.total_savings), (2, 0.0, 0));
    }

    #[test]
    fn pair_finalized_in_second_step() {
        let oracle = line_oracle();
        let engine = MatchEngine::new(None, &oracle, SearchParams::default(), MatchMode::Standalone).unwrap();
        // Both announced in step 0; the driver's latest departure is 900.
        let reqs = [req(1, Role::Rider, 2, 3, 50, 1000, 200), req(2, Role::Driver, 1, 4, 100, 700, 200)];
        let ps = crate::request::resolve_all(&reqs, &oracle).unwrap();
        assert_eq!(ps[1].windows.latest_depart, 900);
        let c = cfg(0, 1800);
        let mut st = SimState::new(&c);
        let s0 = step(&mut st, &ps, &c, &engine);
        assert_eq!((s0.counts.optimal_matches, s0.counts.finalized, s0.counts.pairs_evaluated), (1, 0, 1));
        let s1 = step(&mut st, &ps, &c, &engine);
        assert_eq!((s1.counts.finalized, s1.counts.pairs_evaluated), (1, 0));
        assert!(st.is_idle());
        assert_eq!(st.finalized[0].decided_at, 600);
    }

    #[test]
    fn late_request_expires_at_once() {
        let oracle = line_oracle();
        let engine = MatchEngine::new(None, &oracle, SearchParams::default(), MatchMode::Standalone).unwrap();
        // Announced before the horizon starts, with its window already closed.
        let ps = crate::request::resolve_all(&[req(1, Role::Rider, 1, 2, 100, 500, 0)], &oracle).unwrap();
        let rep = run(&ps, &cfg(1000, 1200), &engine).unwrap();
        assert_eq!(rep.expired.len(), 1);
        assert!(rep.expired[0].late);
    }

    #[test]
    fn config_validation() {
        assert!(SimConfig { step_len: 0, ..Default::default() }.validate().is_err());
        assert!(SimConfig { lead_time: -1, ..Default::default() }.validate().is_err());
        assert!(SimConfig { start: 10, end: 0, ..Default::default() }.validate().is_err());
        assert!(SimConfig::default().validate().is_ok());
    }
}
