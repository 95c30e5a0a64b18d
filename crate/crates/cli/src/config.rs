//! Run configuration: one TOML file with `[paths]`, `[network]`,
//! `[matching]`, `[simulation]` and `[scenario]` sections. Every key is
//! optional and defaults to the engine defaults.

use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use trs_core::feasibility::{MatchMode, SearchParams, Variant, Weights};
use trs_core::geo::DistanceMetric;
use trs_core::horizon::SimConfig;
use trs_core::optimize::Objective;
use trs_core::scenario::ScenarioParams;
use trs_core::transit::BuildParams;
use trs_core::Seconds;

use crate::error::{CliError, CliResult};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub paths: Paths,
    pub network: Network,
    pub matching: Matching,
    pub simulation: Simulation,
    pub scenario: ScenarioParams,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub road_nodes: Option<PathBuf>,
    pub road_links: Option<PathBuf>,
    pub gtfs_dir: Option<PathBuf>,
    /// A graph dump from `build-network`; used instead of building from `gtfs_dir`.
    pub graph: Option<PathBuf>,
    /// Request file. Without one, requests come from the `[scenario]` section.
    pub requests: Option<PathBuf>,
    pub output_dir: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Network {
    pub metric: DistanceMetric,
    pub max_access_walk: f64,
    pub max_transfer_walk: f64,
    pub schedule_slack: Seconds,
    pub walk_speed: f64,
    pub access_service_time: Seconds,
    /// `YYYYMMDD` or `YYYY-MM-DD`; all trips when unset.
    #[serde(deserialize_with = "date_text")]
    pub service_date: Option<String>,
}

impl Default for Network {
    fn default() -> Self {
        let b = BuildParams::default();
        Network {
            metric: DistanceMetric::Euclidean,
            max_access_walk: b.max_access_walk,
            max_transfer_walk: b.max_transfer_walk,
            schedule_slack: b.schedule_slack,
            walk_speed: b.walk_speed,
            access_service_time: b.access_service_time,
            service_date: None,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunMode {
    #[default]
    StaticTrs,
    StaticRs,
    StaticCombined,
    Dynamic,
}

impl RunMode {
    pub fn needs_transit(self) -> bool {
        self != RunMode::StaticRs
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Matching {
    pub mode: RunMode,
    /// Transit leg covered by the driver in TRS modes.
    pub variant: Variant,
    pub objective: Objective,
    pub weights: Weights,
    pub service_time: Seconds,
    /// Reserved for a multi-label search; only `false` is supported.
    pub multi_label: bool,
}

impl Default for Matching {
    fn default() -> Self {
        let s = SearchParams::default();
        Matching {
            mode: RunMode::StaticTrs,
            variant: Variant::FirstMile,
            objective: Objective::MaxSavings,
            weights: s.weights,
            service_time: s.service_time,
            multi_label: false,
        }
    }
}

/// Families searched by `simulate`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SimEngine {
    #[default]
    Trs,
    Rs,
    Combined,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Simulation {
    pub step_len: Seconds,
    pub lead_time: Seconds,
    pub start: Seconds,
    pub end: Seconds,
    pub engine: SimEngine,
}

impl Default for Simulation {
    fn default() -> Self {
        let c = SimConfig::default();
        Simulation { step_len: c.step_len, lead_time: c.lead_time, start: c.start, end: c.end, engine: SimEngine::Trs }
    }
}

impl RunConfig {
    /// Reads `path` (or starts from defaults) and applies `key=value`
    /// overrides, where `key` is `section.field` and `value` is a TOML value
    /// or a bare string. Relative paths are taken from the file's directory.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> CliResult<Self> {
        let mut cfg = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
                Self::parse(&text, overrides).map_err(|e| match e {
                    CliError::Input(m) => CliError::Input(format!("{}: {m}", p.display())),
                    e => e,
                })?
            }
            None => Self::parse("", overrides)?,
        };
        if let Some(dir) = path.and_then(Path::parent) {
            cfg.paths.resolve_relative(dir);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Config text plus overrides, unvalidated.
    pub fn parse(text: &str, overrides: &[String]) -> CliResult<Self> {
        let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| CliError::Input(e.to_string()))?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        toml::Value::Table(table).try_into().map_err(|e: toml::de::Error| CliError::Input(format!("config: {}", e.message())))
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.matching.multi_label {
            return Err(CliError::Input("matching.multi_label = true is not supported; the search keeps one label per node".into()));
        }
        self.build_params()?.validate()?;
        self.search_params().validate()?;
        self.sim_config().validate()?;
        self.scenario.validate()?;
        self.paths.check_exist()
    }

    pub fn build_params(&self) -> CliResult<BuildParams> {
        let n = &self.network;
        let service_date = match &n.service_date {
            None => None,
            Some(s) => Some(parse_date(s).ok_or_else(|| CliError::Input(format!("network.service_date: bad date {s:?}")))?),
        };
        Ok(BuildParams {
            max_access_walk: n.max_access_walk,
            max_transfer_walk: n.max_transfer_walk,
            schedule_slack: n.schedule_slack,
            walk_speed: n.walk_speed,
            access_service_time: n.access_service_time,
            service_date,
        })
    }

    pub fn search_params(&self) -> SearchParams {
        SearchParams { weights: self.matching.weights, service_time: self.matching.service_time }
    }

    pub fn sim_config(&self) -> SimConfig {
        let s = &self.simulation;
        SimConfig { step_len: s.step_len, lead_time: s.lead_time, start: s.start, end: s.end, objective: self.matching.objective }
    }

    pub fn engine_mode(&self) -> MatchMode {
        match self.matching.mode {
            RunMode::StaticRs => MatchMode::Standalone,
            RunMode::StaticCombined => MatchMode::Combined,
            RunMode::StaticTrs => self.trs_mode(),
            RunMode::Dynamic => self.sim_mode(),
        }
    }

    /// Families searched by the rolling-horizon simulation.
    pub fn sim_mode(&self) -> MatchMode {
        match self.simulation.engine {
            SimEngine::Trs => self.trs_mode(),
            SimEngine::Rs => MatchMode::Standalone,
            SimEngine::Combined => MatchMode::Combined,
        }
    }

    fn trs_mode(&self) -> MatchMode {
        match self.matching.variant {
            Variant::LastMile => MatchMode::LastMile,
            _ => MatchMode::FirstMile,
        }
    }

    /// Canonical text of the effective configuration.
    pub fn canonical(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

impl Paths {
    fn resolve_relative(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        for p in [&mut self.road_nodes, &mut self.road_links, &mut self.gtfs_dir, &mut self.graph, &mut self.requests].into_iter().flatten()
        {
            fix(p);
        }
        if !self.output_dir.as_os_str().is_empty() {
            fix(&mut self.output_dir);
        }
    }

    fn check_exist(&self) -> CliResult<()> {
        for (key, p) in [
            ("paths.road_nodes", &self.road_nodes),
            ("paths.road_links", &self.road_links),
            ("paths.gtfs_dir", &self.gtfs_dir),
            ("paths.graph", &self.graph),
            ("paths.requests", &self.requests),
        ] {
            if let Some(p) = p {
                if !p.exists() {
                    return Err(CliError::Input(format!("{key}: {} does not exist", p.display())));
                }
            }
        }
        Ok(())
    }

    pub fn require<'a>(&self, key: &str, p: &'a Option<PathBuf>) -> CliResult<&'a Path> {
        p.as_deref().ok_or_else(|| CliError::Input(format!("paths.{key} is required for this command")))
    }

    pub fn output(&self, name: &str) -> PathBuf {
        if self.output_dir.as_os_str().is_empty() {
            PathBuf::from(name)
        } else {
            self.output_dir.join(name)
        }
    }
}

fn parse_date(s: &str) -> Option<NaiveDate> {
    NaiveDate::parse_from_str(s, "%Y%m%d").or_else(|_| NaiveDate::parse_from_str(s, "%Y-%m-%d")).ok()
}

/// Accepts a bare `YYYYMMDD` integer as well as a string.
fn date_text<'de, D: serde::Deserializer<'de>>(d: D) -> Result<Option<String>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Text(String),
        Number(i64),
    }
    Ok(Option::<Raw>::deserialize(d)?.map(|r| match r {
        Raw::Text(s) => s,
        Raw::Number(n) => n.to_string(),
    }))
}

fn apply_override(table: &mut toml::Table, o: &str) -> CliResult<()> {
    let (key, raw) = o.split_once('=').ok_or_else(|| CliError::Input(format!("override {o:?} is not key=value")))?;
    let value = parse_value(raw.trim());
    let mut parts: Vec<&str> = key.trim().split('.').collect();
    let last = parts.pop().filter(|s| !s.is_empty()).ok_or_else(|| CliError::Input(format!("empty key in {o:?}")))?;
    let mut t = table;
    for p in parts {
        let entry = t.entry(p.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        t = entry.as_table_mut().ok_or_else(|| CliError::Input(format!("{p} in {key:?} is not a section")))?;
    }
    t.insert(last.to_string(), value);
    Ok(())
}

fn parse_value(raw: &str) -> toml::Value {
    format!("v = {raw}").parse::<toml::Table>().ok().and_then(|mut t| t.remove("v")).unwrap_or_else(|| toml::Value::String(raw.to_string()))
}
