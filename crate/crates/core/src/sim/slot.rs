use rand::seq::index;
use rand::Rng;
use rand_distr::{Distribution, Exp1, Poisson};

use crate::model::SystemConfig;

/// One active user: the B distinct channels it transmits on and the channel
/// power gain |h|² it sees on each of them.
#[derive(Debug, Clone, PartialEq)]
pub struct SlotUser {
    pub id: usize,
    pub channels: Vec<usize>,
    pub gains: Vec<f64>,
}

/// A sampled slot. `layers[l]` holds the users of layer `l + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SlotRealization {
    pub channels: usize,
    pub layers: Vec<Vec<SlotUser>>,
}

impl SlotRealization {
    pub fn empty(channels: usize, layers: usize) -> Self {
        Self {
            channels,
            layers: vec![Vec::new(); layers],
        }
    }

    pub fn user_count(&self) -> usize {
        self.layers.iter().map(Vec::len).sum()
    }

    /// Appends a user with explicit channels and gains, returning its id.
    pub fn push_user(&mut self, layer: usize, channels: Vec<usize>, gains: Vec<f64>) -> usize {
        assert_eq!(channels.len(), gains.len(), "one gain per channel");
        assert!(channels.iter().all(|&q| q < self.channels));
        let id = self.user_count();
        self.layers[layer - 1].push(SlotUser {
            id,
            channels,
            gains,
        });
        id
    }
}

/// Draws a slot: Poisson user counts per layer, B distinct uniformly chosen
/// channels per user, and an independent exponential gain (mean σ_h²) on each
/// of them.
pub fn sample_slot<R: Rng + ?Sized>(config: &SystemConfig, rng: &mut R) -> SlotRealization {
    let n = config.channels();
    let b = config.repetition();
    let mut next_id = 0;
    let layers = config
        .layers()
        .iter()
        .map(|params| {
            let count = if params.arrival_rate > 0.0 {
                Poisson::new(params.arrival_rate)
                    .expect("validated arrival rate")
                    .sample(rng) as usize
            } else {
                0
            };
            (0..count)
                .map(|_| {
                    let channels = index::sample(rng, n, b).into_vec();
                    let gains = (0..b)
                        .map(|_| {
                            let e: f64 = Exp1.sample(rng);
                            e * config.gain_mean()
                        })
                        .collect();
                    let id = next_id;
                    next_id += 1;
                    SlotUser {
                        id,
                        channels,
                        gains,
                    }
                })
                .collect()
        })
        .collect();
    SlotRealization { channels: n, layers }
}
