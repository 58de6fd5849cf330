//! Link-level simulation of cooperative downlink transmission from a LEO
//! satellite swarm in trail formation to a multi-antenna ground station.
//!
//! The crate is organized bottom-up:
//!
//! - [`geometry`]: in-plane orbit geometry (polar angle, elevation, slant
//!   range, angle of departure) and swarm placement.
//! - [`channel`]: steering vectors, the rank-one geometric channel model and
//!   the exact line-of-sight channel with its stochastic link budget.
//! - [`precoding`]: waterfilling, the SVD capacity-achieving precoder and the
//!   distributed block-diagonal geometric precoder.
//! - [`equalization`]: the SINR-optimal linear equalizer and the
//!   geometry-only equalizer at the ground station.
//! - [`rates`]: capacity, ideal-receiver rate, per-stream SINR, linear sum
//!   rate and the geometric upper bound.
//! - [`spacing`]: the orthogonality condition on the angles of arrival and
//!   the resulting optimal inter-satellite distance.
//! - [`sim`]: scenario files, deterministic Monte Carlo sweeps and result
//!   serialization.

pub mod channel;
pub mod equalization;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod precoding;
pub mod rates;
pub mod sim;
pub mod spacing;
pub mod units;

pub use channel::{ArrayConfig, ChannelSet, LinkBudget, LossConfig};
pub use equalization::{Equalizer, EqualizerKind};
pub use error::{Error, Result};
pub use geometry::{OrbitConfig, PointingPolicy, SatelliteState, SwarmGeometry};
pub use linalg::{CMatrix, CVector};
pub use num_complex::Complex64;
pub use precoding::{PowerAllocation, Precoder, PrecoderKind};
pub use rates::RateReport;
pub use sim::{ScenarioConfig, SweepAxis, SweepRecord, SweepSpec};
pub use spacing::{SpacingQuery, SpacingResult};
