//! Slot-level Monte Carlo simulation of layered random access.
//!
//! Only channel power gains are simulated: decoding depends on the received
//! powers through the SINR threshold, so symbols and phases are not needed.

mod decode;
mod estimate;
mod slot;

pub use decode::{sic_decode, BlockingRule, DecodeReport, Outcome};
pub use estimate::{
    estimate_joint_capture, estimate_outage, estimate_throughput, slot_rng, EstimatorOutput,
    JointCaptureEstimate, SimSettings, ThroughputEstimate,
};
pub use slot::{sample_slot, SlotRealization, SlotUser};
