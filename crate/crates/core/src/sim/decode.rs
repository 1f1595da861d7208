//! Inter-layer SIC receiver operating on channel power gains.
//!
//! Layers are processed globally from 1 to L. Within a layer pass every
//! channel that is still open is examined on its own:
//!
//! * no copy: the channel stays open;
//! * one copy: it is decoded iff `P_l g / (Σ_{i>l} P_i g + N_0) ≥ 2^{R_l} − 1`,
//!   otherwise SIC stops on that channel;
//! * two or more copies: all collide and SIC stops on that channel.
//!
//! After the pass, every copy of every user decoded in that layer is
//! cancelled. There is no intra-layer SIC, so cancellation never re-opens a
//! same-layer collision.

use super::slot::SlotRealization;
use crate::model::{snr_gap, SystemConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    Decoded,
    Collided,
    SinrFailure,
    /// Every copy sat on a channel where SIC had already stopped.
    Blocked,
}

/// When a channel may be used again after SIC stopped on it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BlockingRule {
    /// A stop is final for the rest of the slot.
    #[default]
    Sticky,
    /// A channel re-opens for upper layers once every lower-layer signal on it
    /// has been cancelled, e.g. because colliding users were decoded through
    /// copies elsewhere.
    ReopenOnCancel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeReport {
    /// `outcomes[l][k]` is the outcome of the k-th user of layer `l + 1`.
    pub outcomes: Vec<Vec<Outcome>>,
    /// Copies of layer `l + 1` still present at each channel after that
    /// layer's cancellation step.
    pub residual: Vec<Vec<u32>>,
    /// Decoded users per layer.
    pub decoded: Vec<usize>,
    /// Layer (1-based) at which SIC stopped on each channel, `None` if it ran
    /// through all L layers.
    pub stop_layer: Vec<Option<usize>>,
}

impl DecodeReport {
    pub fn count(&self, layer: usize, outcome: Outcome) -> usize {
        self.outcomes[layer - 1]
            .iter()
            .filter(|&&o| o == outcome)
            .count()
    }

    /// Stop layer with "never stopped" mapped to `L + 1`, for ordering.
    pub fn stop_depth(&self, channel: usize) -> usize {
        self.stop_layer[channel].unwrap_or(self.outcomes.len() + 1)
    }
}

#[derive(Clone, Copy, PartialEq)]
enum CopyState {
    Blocked,
    Collided,
    Failed,
    Decoded,
}

pub fn sic_decode(slot: &SlotRealization, config: &SystemConfig, rule: BlockingRule) -> DecodeReport {
    let n = slot.channels;
    let layers = config.num_layers();
    debug_assert_eq!(slot.layers.len(), layers);

    let mut count = vec![vec![0u32; n]; layers];
    let mut received = vec![vec![0.0f64; n]; layers];
    for (l, users) in slot.layers.iter().enumerate() {
        let power = config.layers()[l].power;
        for user in users {
            for (&q, &g) in user.channels.iter().zip(&user.gains) {
                count[l][q] += 1;
                received[l][q] += power * g;
            }
        }
    }
    // interference[l][q] = Σ_{i>l} received[i][q] + N_0.
    let mut interference = vec![vec![config.noise_power(); n]; layers];
    for l in (0..layers.saturating_sub(1)).rev() {
        for q in 0..n {
            interference[l][q] = interference[l + 1][q] + received[l + 1][q];
        }
    }

    let mut stop_layer: Vec<Option<usize>> = vec![None; n];
    let mut residual = count.clone();
    let mut outcomes = Vec::with_capacity(layers);
    let mut decoded = Vec::with_capacity(layers);

    for (l, users) in slot.layers.iter().enumerate() {
        let params = &config.layers()[l];
        let threshold = snr_gap(params.rate);
        let open = |q: usize, stop: &[Option<usize>], residual: &[Vec<u32>]| match rule {
            BlockingRule::Sticky => stop[q].is_none(),
            BlockingRule::ReopenOnCancel => residual[..l].iter().all(|row| row[q] == 0),
        };

        let mut layer_outcomes = Vec::with_capacity(users.len());
        let mut stops = Vec::new();
        for user in users {
            let mut any_collided = false;
            let mut any_failed = false;
            let mut any_decoded = false;
            for (&q, &g) in user.channels.iter().zip(&user.gains) {
                let state = if !open(q, &stop_layer, &residual) {
                    CopyState::Blocked
                } else if count[l][q] >= 2 {
                    CopyState::Collided
                } else if params.power * g >= threshold * interference[l][q] {
                    CopyState::Decoded
                } else {
                    CopyState::Failed
                };
                match state {
                    CopyState::Blocked => {}
                    CopyState::Collided => {
                        any_collided = true;
                        stops.push(q);
                    }
                    CopyState::Failed => {
                        any_failed = true;
                        stops.push(q);
                    }
                    CopyState::Decoded => any_decoded = true,
                }
            }
            layer_outcomes.push(if any_decoded {
                Outcome::Decoded
            } else if any_collided {
                Outcome::Collided
            } else if any_failed {
                Outcome::SinrFailure
            } else {
                Outcome::Blocked
            });
        }
        for q in stops {
            stop_layer[q].get_or_insert(l + 1);
        }

        for (user, outcome) in users.iter().zip(&layer_outcomes) {
            if *outcome == Outcome::Decoded {
                for &q in &user.channels {
                    residual[l][q] -= 1;
                }
            }
        }
        decoded.push(
            layer_outcomes
                .iter()
                .filter(|&&o| o == Outcome::Decoded)
                .count(),
        );
        outcomes.push(layer_outcomes);
    }

    if rule == BlockingRule::ReopenOnCancel {
        // SIC on a channel ends at the first layer that leaves a residual.
        for (q, stop) in stop_layer.iter_mut().enumerate() {
            *stop = residual.iter().position(|row| row[q] > 0).map(|l| l + 1);
        }
    }

    DecodeReport {
        outcomes,
        residual,
        decoded,
        stop_layer,
    }
}
