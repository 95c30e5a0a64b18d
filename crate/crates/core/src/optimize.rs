//! Rider-driver assignment.
//!
//! Each rider is assigned to at most one driver and each driver to at most
//! one rider, maximizing either the number of matches or the total vehicle
//! time saved. The program is a bipartite matching, solved exactly with
//! successive shortest augmenting paths. [`verify_integral`] solves the
//! continuous relaxation with a general LP solver and checks that its
//! optimum is 0/1.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap, HashMap};
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use microlp::{ComparisonOp, OptimizationDirection, Problem};
use serde::{Deserialize, Serialize};

use crate::feasibility::FeasibleMatch;
use crate::request::RequestId;
use crate::{Error, Result, Seconds};

/// Integrality tolerance of the relaxation check.
pub const INTEGRALITY_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Objective {
    /// Z1: number of matches.
    #[default]
    #[serde(rename = "max-matches", alias = "z1", alias = "Z1")]
    MaxMatches,
    /// Z2: vehicle time saved.
    #[serde(rename = "max-savings", alias = "z2", alias = "Z2")]
    MaxSavings,
}

impl Objective {
    pub const ALL: [Objective; 2] = [Objective::MaxMatches, Objective::MaxSavings];

    pub fn tag(self) -> &'static str {
        match self {
            Objective::MaxMatches => "Z1",
            Objective::MaxSavings => "Z2",
        }
    }

    pub fn weight(self, m: &FeasibleMatch) -> i64 {
        match self {
            Objective::MaxMatches => 1,
            Objective::MaxSavings => m.t_vhrs,
        }
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Objective::MaxMatches => "max-matches",
            Objective::MaxSavings => "max-savings",
        })
    }
}

impl FromStr for Objective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "max-matches" | "z1" => Ok(Objective::MaxMatches),
            "max-savings" | "z2" => Ok(Objective::MaxSavings),
            _ => Err(Error::Config(format!("unknown objective `{s}` (expected max-matches or max-savings)"))),
        }
    }
}

/// The edge set of the assignment program. Edge ids are positions in `edges`.
#[derive(Clone, Debug)]
pub struct MatchingInstance {
    pub edges: Vec<FeasibleMatch>,
    pub rider_index: BTreeMap<RequestId, Vec<usize>>,
    pub driver_index: BTreeMap<RequestId, Vec<usize>>,
    pub objective: Objective,
}

impl MatchingInstance {
    pub fn new(edges: Vec<FeasibleMatch>, objective: Objective) -> Self {
        let mut rider_index: BTreeMap<RequestId, Vec<usize>> = BTreeMap::new();
        let mut driver_index: BTreeMap<RequestId, Vec<usize>> = BTreeMap::new();
        for (k, e) in edges.iter().enumerate() {
            rider_index.entry(e.rider).or_default().push(k);
            driver_index.entry(e.driver).or_default().push(k);
        }
        MatchingInstance { edges, rider_index, driver_index, objective }
    }

    pub fn with_objective(&self, objective: Objective) -> Self {
        MatchingInstance { objective, ..self.clone() }
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn weight(&self, k: usize) -> i64 {
        self.objective.weight(&self.edges[k])
    }

    /// Objective value of an arbitrary selection.
    pub fn value_of(&self, selected: &[bool]) -> i64 {
        selected.iter().enumerate().filter(|(_, &s)| s).map(|(k, _)| self.weight(k)).sum()
    }

    /// Checks that no rider or driver appears in two selected edges.
    pub fn check_selection(&self, selected: &[bool]) -> Result<()> {
        if selected.len() != self.edges.len() {
            return Err(Error::Solver(format!("selection has {} entries for {} edges", selected.len(), self.edges.len())));
        }
        for (role, index) in [("rider", &self.rider_index), ("driver", &self.driver_index)] {
            for (id, ks) in index {
                let n = ks.iter().filter(|&&k| selected[k]).count();
                if n > 1 {
                    return Err(Error::Solver(format!("{role} {id} selected {n} times")));
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Assignment {
    pub selected: Vec<bool>,
    /// Match count (Z1) or seconds saved (Z2).
    pub objective_value: i64,
}

impl Assignment {
    pub fn selected_edges(&self) -> impl Iterator<Item = usize> + '_ {
        self.selected.iter().enumerate().filter(|(_, &s)| s).map(|(k, _)| k)
    }

    pub fn count(&self) -> usize {
        self.selected.iter().filter(|&&s| s).count()
    }

    pub fn savings(&self, inst: &MatchingInstance) -> Seconds {
        self.selected_edges().map(|k| inst.edges[k].t_vhrs).sum()
    }
}

/// Optimal assignment.
///
/// Among optimal assignments the solver prefers the one maximizing
/// `sum(m - k)` over selected edge ids `k`, so outputs are deterministic and
/// favour low ids. Zero-weight edges are selected when they fit; edges with
/// negative weight never are.
pub fn solve(inst: &MatchingInstance) -> Assignment {
    let m = inst.edges.len();
    let mut selected = vec![false; m];
    if m == 0 {
        return Assignment { selected, objective_value: 0 };
    }
    // Perturbed weights: the objective dominates, the id bonus breaks ties.
    let scale = (m as i128) * (m as i128 + 1) / 2 + 1;
    let perturbed = |k: usize| inst.weight(k) as i128 * scale + (m - k) as i128;

    let riders: HashMap<RequestId, usize> = inst.rider_index.keys().enumerate().map(|(i, &r)| (r, i)).collect();
    let drivers: HashMap<RequestId, usize> = inst.driver_index.keys().enumerate().map(|(i, &d)| (d, i)).collect();

    // Best parallel edge per (rider, driver).
    let mut best: BTreeMap<(usize, usize), (i128, usize)> = BTreeMap::new();
    for (k, e) in inst.edges.iter().enumerate() {
        let w = perturbed(k);
        if w <= 0 {
            continue;
        }
        let key = (riders[&e.rider], drivers[&e.driver]);
        match best.get(&key) {
            Some(&(bw, _)) if bw >= w => {}
            _ => {
                best.insert(key, (w, k));
            }
        }
    }

    let mut flow = Flow::new(riders.len(), drivers.len());
    let arcs: Vec<(usize, usize)> = best.iter().map(|(&(r, d), &(w, k))| (flow.add_match_arc(r, d, w), k)).collect();
    flow.max_weight();
    for (arc, k) in arcs {
        if flow.cap[arc] == 0 {
            selected[k] = true;
        }
    }
    let objective_value = inst.value_of(&selected);
    let a = Assignment { selected, objective_value };
    debug_assert!(inst.check_selection(&a.selected).is_ok());
    a
}

/// Residual network source -> riders -> drivers -> sink with unit capacities.
struct Flow {
    n_riders: usize,
    head: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<u8>,
    cost: Vec<i128>,
}

impl Flow {
    fn new(n_riders: usize, n_drivers: usize) -> Self {
        let n = n_riders + n_drivers + 2;
        let mut f = Flow { n_riders, head: vec![Vec::new(); n], to: Vec::new(), cap: Vec::new(), cost: Vec::new() };
        let (s, t) = (f.source(), f.sink());
        for r in 0..n_riders {
            f.add_arc(s, 1 + r, 0);
        }
        for d in 0..n_drivers {
            f.add_arc(1 + n_riders + d, t, 0);
        }
        f
    }

    fn source(&self) -> usize {
        0
    }

    fn sink(&self) -> usize {
        self.head.len() - 1
    }

    fn add_arc(&mut self, u: usize, v: usize, cost: i128) -> usize {
        let a = self.to.len();
        self.head[u].push(a);
        self.to.push(v);
        self.cap.push(1);
        self.cost.push(cost);
        self.head[v].push(a + 1);
        self.to.push(u);
        self.cap.push(0);
        self.cost.push(-cost);
        a
    }

    fn add_match_arc(&mut self, r: usize, d: usize, weight: i128) -> usize {
        self.add_arc(1 + r, 1 + self.n_riders + d, -weight)
    }

    /// Augments along shortest paths while they have negative cost.
    fn max_weight(&mut self) {
        let n = self.head.len();
        let (s, t) = (self.source(), self.sink());
        // Initial potentials for the acyclic network with negative arcs.
        let mut pot = vec![0i128; n];
        for r in 0..self.n_riders {
            for &a in &self.head[1 + r] {
                if self.cap[a] > 0 {
                    let v = self.to[a];
                    pot[v] = pot[v].min(self.cost[a]);
                }
            }
        }
        for v in 1 + self.n_riders..t {
            pot[t] = pot[t].min(pot[v]);
        }
        let mut dist = vec![i128::MAX; n];
        let mut via = vec![usize::MAX; n];
        loop {
            dist.fill(i128::MAX);
            via.fill(usize::MAX);
            dist[s] = 0;
            let mut heap = BinaryHeap::new();
            heap.push(Reverse((0i128, s)));
            while let Some(Reverse((d, u))) = heap.pop() {
                if d > dist[u] {
                    continue;
                }
                for &a in &self.head[u] {
                    if self.cap[a] == 0 {
                        continue;
                    }
                    let v = self.to[a];
                    let nd = d + self.cost[a] + pot[u] - pot[v];
                    if nd < dist[v] {
                        dist[v] = nd;
                        via[v] = a;
                        heap.push(Reverse((nd, v)));
                    }
                }
            }
            if dist[t] == i128::MAX || dist[t] + pot[t] - pot[s] >= 0 {
                break;
            }
            for v in 0..n {
                if dist[v] != i128::MAX {
                    pot[v] += dist[v];
                }
            }
            let mut v = t;
            while v != s {
                let a = via[v];
                self.cap[a] -= 1;
                self.cap[a ^ 1] += 1;
                v = self.to[a ^ 1];
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IntegralityReport {
    pub edges: usize,
    /// Optimum of the continuous relaxation.
    pub lp_objective: f64,
    /// Largest distance of a relaxation value from {0, 1}.
    pub max_fractionality: f64,
    /// Edges the relaxation sets to 1.
    pub ones: Vec<usize>,
}

/// Solves the continuous relaxation and checks its optimum is integral.
///
/// All edges take part, including parallel edges for the same pair and
/// edges with negative savings.
pub fn verify_integral(inst: &MatchingInstance) -> Result<IntegralityReport> {
    let m = inst.edges.len();
    if m == 0 {
        return Ok(IntegralityReport { edges: 0, lp_objective: 0.0, max_fractionality: 0.0, ones: Vec::new() });
    }
    let mut lp = Problem::new(OptimizationDirection::Maximize);
    let vars: Vec<_> = (0..m).map(|k| lp.add_var(inst.weight(k) as f64, (0.0, 1.0))).collect();
    for index in [&inst.rider_index, &inst.driver_index] {
        for ks in index.values() {
            if ks.len() > 1 {
                let row: Vec<_> = ks.iter().map(|&k| (vars[k], 1.0)).collect();
                lp.add_constraint(row, ComparisonOp::Le, 1.0);
            }
        }
    }
    let outcome = lp.solve().map_err(|e| Error::Solver(e.to_string()))?;
    let sol = outcome.solution().ok_or_else(|| Error::Solver("relaxation solve was interrupted".into()))?;
    let mut fractional = Vec::new();
    let mut ones = Vec::new();
    let mut max_fractionality = 0.0f64;
    for (k, &v) in vars.iter().enumerate() {
        let x = sol.var_value_raw(v);
        let frac = x.abs().min((1.0 - x).abs());
        max_fractionality = max_fractionality.max(frac);
        if frac > INTEGRALITY_TOL {
            fractional.push(k);
        } else if x > 0.5 {
            ones.push(k);
        }
    }
    if !fractional.is_empty() {
        return Err(Error::FractionalRelaxation { edges: fractional });
    }
    Ok(IntegralityReport { edges: m, lp_objective: sol.objective(), max_fractionality, ones })
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct AssignmentSummary {
    pub objective: String,
    pub objective_value: i64,
    pub feasible_matches: usize,
    pub optimal_matches: usize,
    pub participants: usize,
    /// Share of participants that are matched.
    pub matching_rate: f64,
    /// Seconds.
    pub total_savings: Seconds,
    pub avg_detour: f64,
    pub avg_shared: f64,
    pub avg_transit: f64,
    pub avg_walk: f64,
    pub avg_wait: f64,
}

/// Summary statistics of an assignment. `driver_direct` gives a driver's
/// solo driving time, used for the detour average.
pub fn summarize(
    inst: &MatchingInstance,
    asg: &Assignment,
    participants: usize,
    driver_direct: impl Fn(RequestId) -> Option<Seconds>,
) -> AssignmentSummary {
    let sel: Vec<&FeasibleMatch> = asg.selected_edges().map(|k| &inst.edges[k]).collect();
    let n = sel.len();
    let avg = |f: &dyn Fn(&FeasibleMatch) -> Seconds| {
        if n == 0 {
            0.0
        } else {
            sel.iter().map(|m| f(m) as f64).sum::<f64>() / n as f64
        }
    };
    AssignmentSummary {
        objective: inst.objective.tag().to_string(),
        objective_value: asg.objective_value,
        feasible_matches: inst.len(),
        optimal_matches: n,
        participants,
        matching_rate: if participants == 0 { 0.0 } else { (2 * n) as f64 / participants as f64 },
        total_savings: asg.savings(inst),
        avg_detour: avg(&|m| m.t_drive - driver_direct(m.driver).unwrap_or(m.t_drive)),
        avg_shared: avg(&|m| m.t_shared),
        avg_transit: avg(&|m| m.t_transit),
        avg_walk: avg(&|m| m.t_walk),
        avg_wait: avg(&|m| m.t_wait),
    }
}

/// Writes the selected edges as `rider,driver,dropoff_node,objective_tag,t_vhrs`
/// rows, followed by a commented summary block. `dropoff_node` is the
/// transit node of the hand-off and empty for stand-alone matches.
pub fn write_assignment(
    mut w: impl Write,
    header: &[String],
    inst: &MatchingInstance,
    asg: &Assignment,
    summary: &AssignmentSummary,
) -> std::io::Result<()> {
    for line in header {
        writeln!(w, "# {line}")?;
    }
    writeln!(w, "rider,driver,dropoff_node,objective_tag,t_vhrs")?;
    for k in asg.selected_edges() {
        let e = &inst.edges[k];
        let dropoff = e.transfer_node.map(|j| j.to_string()).unwrap_or_default();
        writeln!(w, "{},{},{},{},{}", e.rider, e.driver, dropoff, inst.objective.tag(), e.t_vhrs)?;
    }
    writeln!(w, "# objective_value: {}", summary.objective_value)?;
    writeln!(w, "# optimal_matches: {}", summary.optimal_matches)?;
    writeln!(w, "# matching_rate: {:.6}", summary.matching_rate)?;
    writeln!(w, "# total_savings: {}", summary.total_savings)?;
    Ok(())
}
