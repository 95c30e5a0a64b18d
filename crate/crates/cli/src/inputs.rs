//! Loading the road network, transit network and requests named by a config.

use std::sync::Arc;
use std::time::Instant;

use log::{info, warn};
use trs_core::geo::Point;
use trs_core::gtfs::GtfsFeed;
use trs_core::request::{load_requests, resolve_all, Participant, Request, Role};
use trs_core::road::{RoadGraph, TravelTimeOracle};
use trs_core::scenario::{self, ScenarioManifest, ScenarioParams};
use trs_core::transit::{build_network, Anchors, TransitGraph};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

pub fn load_road(cfg: &RunConfig) -> CliResult<TravelTimeOracle> {
    let p = &cfg.paths;
    let nodes = p.require("road_nodes", &p.road_nodes)?;
    let links = p.require("road_links", &p.road_links)?;
    let road = RoadGraph::load(cfg.network.metric, nodes, links)?;
    info!("road network: {} nodes, {} arcs", road.len(), road.arc_count());
    Ok(TravelTimeOracle::new(Arc::new(road)))
}

/// Where transit comes from: a feed to build, or a prebuilt dump.
pub enum TransitSource {
    Feed(GtfsFeed),
    Dump(TransitGraph),
}

impl TransitSource {
    pub fn load(cfg: &RunConfig) -> CliResult<Option<Self>> {
        let p = &cfg.paths;
        if let Some(g) = &p.graph {
            let graph = TransitGraph::read_dump(g)?;
            info!("transit graph dump: {} nodes, {} links", graph.len(), graph.links().len());
            return Ok(Some(TransitSource::Dump(graph)));
        }
        match &p.gtfs_dir {
            Some(d) => Ok(Some(TransitSource::Feed(GtfsFeed::load_dir(d)?))),
            None => Ok(None),
        }
    }

    pub fn stop_points(&self) -> Vec<Point> {
        match self {
            TransitSource::Feed(f) => f.stops.iter().map(|s| s.point).collect(),
            TransitSource::Dump(g) => g.stop_points().to_vec(),
        }
    }

    /// The graph, built with anchors for `people` when coming from a feed.
    pub fn graph(&self, cfg: &RunConfig, road: &RoadGraph, people: &[Participant]) -> CliResult<(TransitGraph, f64)> {
        let t0 = Instant::now();
        let g = match self {
            TransitSource::Feed(f) => build_network(f, road, &cfg.build_params()?, &Anchors::for_riders(people))?,
            TransitSource::Dump(g) => {
                g.check_road(road)?;
                let missing = people
                    .iter()
                    .filter(|p| p.role() == Role::Rider)
                    .filter(|p| g.destination_anchor(p.destination).is_none() || g.origin_anchor(p.origin).is_none())
                    .count();
                if missing > 0 {
                    warn!("{missing} riders have no anchor in the graph dump and get no transit matches");
                }
                g.clone()
            }
        };
        Ok((g, t0.elapsed().as_secs_f64()))
    }
}

pub struct Demand {
    pub requests: Vec<Request>,
    pub participants: Vec<Participant>,
    pub manifest: Option<ScenarioManifest>,
}

impl Demand {
    pub fn riders(&self) -> Vec<&Participant> {
        self.participants.iter().filter(|p| p.role() == Role::Rider).collect()
    }

    pub fn drivers(&self) -> Vec<&Participant> {
        self.participants.iter().filter(|p| p.role() == Role::Driver).collect()
    }

    pub fn header_lines(&self) -> Vec<String> {
        self.manifest.as_ref().map(ScenarioManifest::header_lines).unwrap_or_default()
    }
}

/// Requests from `paths.requests`, or generated from `params`.
pub fn load_demand(cfg: &RunConfig, params: &ScenarioParams, oracle: &TravelTimeOracle, stops: &[Point]) -> CliResult<Demand> {
    let (requests, manifest) = match &cfg.paths.requests {
        Some(p) => (load_requests(p)?, None),
        None => {
            if stops.is_empty() {
                warn!("no transit stops known: every origin counts as lacking access");
            }
            let sc = scenario::generate(params, oracle, stops)?;
            (sc.requests, Some(sc.manifest))
        }
    };
    let participants = resolve_all(&requests, oracle)?;
    if participants.is_empty() {
        warn!("no requests");
    }
    Ok(Demand { requests, participants, manifest })
}

pub fn require_transit(src: Option<TransitSource>) -> CliResult<TransitSource> {
    src.ok_or_else(|| CliError::Input("this mode needs paths.gtfs_dir or paths.graph".into()))
}
