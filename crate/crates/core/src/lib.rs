//! Transit-based ridesharing for first-mile/last-mile access.
//!
//! The crate generates feasible rider-driver matches over a schedule-based
//! (time-expanded) transit network, assigns riders to drivers optimally and
//! simulates dynamic operation with a rolling-horizon policy.
//!
//! Module map:
//!
//! * [`request`]: participant announcements and their time windows.
//! * [`road`] and [`prism`]: the static road network, the travel-time oracle
//!   and space-time prism predicates.
//! * [`gtfs`] and [`transit`]: GTFS ingestion and the trip-based
//!   time-expanded transit graph.
//! * [`feasibility`]: the label-setting feasible-match searches, the
//!   stand-alone ridesharing baseline and the feasible-match validator.
//! * [`optimize`]: the rider-driver assignment program and its integrality check.
//! * [`horizon`]: the rolling-horizon simulation.
//! * [`records`]: the feasible-match file format.
//! * [`scenario`] and [`synth`]: synthetic demand and synthetic networks.

pub mod error;
pub mod feasibility;
pub mod fixtures;
pub mod geo;
pub mod gtfs;
pub mod horizon;
pub mod optimize;
pub mod prism;
pub mod records;
pub mod request;
pub mod road;
pub mod scenario;
pub mod synth;
pub mod time;
pub mod transit;

pub use error::{Error, Result};
pub use feasibility::standalone_rs_match;
pub use time::Seconds;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
