//! Layered non-orthogonal random access over multichannel slotted ALOHA.
//!
//! Users pick one of L power layers and one (or B) of N channels; the
//! receiver runs successive interference cancellation across layers. The
//! crate provides
//!
//! * [`model`]: parameters, the SINR gap and the descending power rule,
//! * [`throughput`]: closed-form capture probability and throughput,
//! * [`optimize`]: per-layer rate and arrival optimization,
//! * [`outage`]: outage analysis with B-fold repetition,
//! * [`sim`]: a slot-level Monte Carlo simulator used to check the analysis,
//! * [`experiment`]: CSV scenario runner behind the `layered-ra` binary.

pub mod config_file;
pub mod error;
pub mod experiment;
pub mod model;
pub mod optimize;
pub mod outage;
pub mod sim;
pub mod throughput;

pub use error::{ModelError, Result};
pub use model::{LayerParams, SystemConfig, TargetSinr};
