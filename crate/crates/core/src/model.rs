//! System parameters shared by the analysis and the simulator.
//!
//! All powers, gains and noise levels are linear-scale. Layer numbers in the
//! public API are 1-based: layer 1 carries the highest power and is decoded
//! first, layer L is decoded last and only sees background noise.

use crate::error::{ModelError, Result};

/// Per-layer design parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayerParams {
    /// Expected number of users choosing this layer in a slot.
    pub arrival_rate: f64,
    /// Transmit power of every user in this layer.
    pub power: f64,
    /// Code rate in bits per channel use.
    pub rate: f64,
}

impl LayerParams {
    pub fn new(arrival_rate: f64, power: f64, rate: f64) -> Self {
        Self {
            arrival_rate,
            power,
            rate,
        }
    }

    fn validate(&self, layer: usize) -> Result<()> {
        let fail = |reason: String| Err(ModelError::InvalidLayer { layer, reason });
        if !self.arrival_rate.is_finite() || self.arrival_rate < 0.0 {
            return fail(format!(
                "arrival rate must be finite and >= 0, got {}",
                self.arrival_rate
            ));
        }
        if !self.power.is_finite() || self.power <= 0.0 {
            return fail(format!("power must be finite and > 0, got {}", self.power));
        }
        if !self.rate.is_finite() || self.rate < 0.0 {
            return fail(format!("rate must be finite and >= 0, got {}", self.rate));
        }
        Ok(())
    }
}

/// Target average SINR shared by all layers, linear scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetSinr(f64);

impl TargetSinr {
    pub fn new(gamma: f64) -> Result<Self> {
        if gamma.is_finite() && gamma > 0.0 {
            Ok(Self(gamma))
        } else {
            Err(ModelError::NotPositive {
                name: "target SINR",
                value: gamma,
            })
        }
    }

    pub fn from_db(db: f64) -> Result<Self> {
        Self::new(db_to_linear(db))
    }

    pub fn linear(self) -> f64 {
        self.0
    }

    pub fn db(self) -> f64 {
        10.0 * self.0.log10()
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// A validated system configuration.
///
/// Construction checks every invariant, so downstream code can rely on
/// `1 <= B <= N`, at least one layer and finite, positive parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    channels: usize,
    layers: Vec<LayerParams>,
    gain_mean: f64,
    noise_power: f64,
    repetition: usize,
}

impl SystemConfig {
    pub fn new(
        channels: usize,
        layers: Vec<LayerParams>,
        gain_mean: f64,
        noise_power: f64,
        repetition: usize,
    ) -> Result<Self> {
        if layers.is_empty() {
            return Err(ModelError::NoLayers);
        }
        if channels == 0 {
            return Err(ModelError::NoChannels);
        }
        if repetition == 0 || repetition > channels {
            return Err(ModelError::RepetitionOutOfRange {
                repetition,
                channels,
            });
        }
        check_positive("channel gain mean", gain_mean)?;
        check_positive("noise power", noise_power)?;
        for (i, layer) in layers.iter().enumerate() {
            layer.validate(i + 1)?;
        }
        Ok(Self {
            channels,
            layers,
            gain_mean,
            noise_power,
            repetition,
        })
    }

    /// Builds a configuration whose powers follow the descending target-SINR
    /// rule (see [`allocate_powers`]).
    pub fn with_target_sinr(
        channels: usize,
        arrivals: &[f64],
        rates: &[f64],
        gamma: TargetSinr,
        gain_mean: f64,
        noise_power: f64,
        repetition: usize,
    ) -> Result<Self> {
        if arrivals.len() != rates.len() {
            return Err(ModelError::LengthMismatch {
                name: "rate",
                expected: arrivals.len(),
                got: rates.len(),
            });
        }
        if arrivals.is_empty() {
            return Err(ModelError::NoLayers);
        }
        if channels == 0 {
            return Err(ModelError::NoChannels);
        }
        check_positive("channel gain mean", gain_mean)?;
        check_positive("noise power", noise_power)?;
        for (i, &a) in arrivals.iter().enumerate() {
            if !a.is_finite() || a < 0.0 {
                return Err(ModelError::InvalidLayer {
                    layer: i + 1,
                    reason: format!("arrival rate must be finite and >= 0, got {a}"),
                });
            }
        }
        let powers = allocate_powers(gamma, arrivals, channels, gain_mean, noise_power);
        let layers = arrivals
            .iter()
            .zip(rates)
            .zip(powers)
            .map(|((&a, &r), p)| LayerParams::new(a, p, r))
            .collect();
        Self::new(channels, layers, gain_mean, noise_power, repetition)
    }

    /// Number of layers L.
    pub fn num_layers(&self) -> usize {
        self.layers.len()
    }

    /// Number of orthogonal channels N per layer.
    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn layers(&self) -> &[LayerParams] {
        &self.layers
    }

    /// Parameters of a 1-based layer.
    ///
    /// Panics if `layer` is not in `1..=L`.
    pub fn layer(&self, layer: usize) -> &LayerParams {
        assert!(
            layer >= 1 && layer <= self.layers.len(),
            "layer index {layer} out of range 1..={}",
            self.layers.len()
        );
        &self.layers[layer - 1]
    }

    pub fn check_layer(&self, layer: usize) -> Result<()> {
        if layer >= 1 && layer <= self.layers.len() {
            Ok(())
        } else {
            Err(ModelError::LayerOutOfRange {
                layer,
                layers: self.layers.len(),
            })
        }
    }

    /// Mean channel power gain σ_h².
    pub fn gain_mean(&self) -> f64 {
        self.gain_mean
    }

    /// Background noise power N_0.
    pub fn noise_power(&self) -> f64 {
        self.noise_power
    }

    /// Number of copies B sent by each user.
    pub fn repetition(&self) -> usize {
        self.repetition
    }

    pub fn arrivals(&self) -> Vec<f64> {
        self.layers.iter().map(|l| l.arrival_rate).collect()
    }

    pub fn powers(&self) -> Vec<f64> {
        self.layers.iter().map(|l| l.power).collect()
    }

    pub fn rates(&self) -> Vec<f64> {
        self.layers.iter().map(|l| l.rate).collect()
    }

    pub fn with_rates(&self, rates: &[f64]) -> Result<Self> {
        if rates.len() != self.layers.len() {
            return Err(ModelError::LengthMismatch {
                name: "rate",
                expected: self.layers.len(),
                got: rates.len(),
            });
        }
        let layers = self
            .layers
            .iter()
            .zip(rates)
            .map(|(l, &r)| LayerParams { rate: r, ..*l })
            .collect();
        Self::new(
            self.channels,
            layers,
            self.gain_mean,
            self.noise_power,
            self.repetition,
        )
    }

    pub fn with_uniform_rate(&self, rate: f64) -> Result<Self> {
        self.with_rates(&vec![rate; self.layers.len()])
    }

    pub fn with_repetition(&self, repetition: usize) -> Result<Self> {
        Self::new(
            self.channels,
            self.layers.clone(),
            self.gain_mean,
            self.noise_power,
            repetition,
        )
    }

    /// Keeps only the first `layers` layers (powers are left untouched).
    pub fn truncated(&self, layers: usize) -> Result<Self> {
        Self::new(
            self.channels,
            self.layers.iter().take(layers).copied().collect(),
            self.gain_mean,
            self.noise_power,
            self.repetition,
        )
    }
}

fn check_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(ModelError::NotPositive { name, value })
    }
}

/// SINR threshold ν(R) = 2^R − 1 for a capacity-achieving code at rate R.
pub fn snr_gap(rate: f64) -> f64 {
    rate.exp2() - 1.0
}

/// Probability that a given copy collides when `m` users share a layer of
/// `channels` channels and each user occupies `repetition` distinct channels:
/// `1 − (1 − 1/N)^{B(m−1)}`.
pub fn collision_prob(m: usize, channels: usize, repetition: usize) -> Result<f64> {
    if m < 1 {
        return Err(ModelError::NoUsers(m));
    }
    if channels == 0 {
        return Err(ModelError::NoChannels);
    }
    if repetition == 0 || repetition > channels {
        return Err(ModelError::RepetitionOutOfRange {
            repetition,
            channels,
        });
    }
    if m == 1 {
        // Also avoids 0 · ln 0 when N = 1.
        return Ok(0.0);
    }
    let exponent = (repetition * (m - 1)) as f64;
    Ok(-(exponent * (-1.0 / channels as f64).ln_1p()).exp_m1())
}

/// Average interference-plus-noise seen by a lone layer-`layer` signal once
/// every lower layer has been cancelled:
/// `Σ_{i>l} σ_h² P_i λ_i B / N + N_0`.
///
/// `repetition` is passed explicitly because the power rule always uses the
/// single-copy occupancy while the repetition analysis uses `B` copies.
pub fn interference_variance(config: &SystemConfig, layer: usize, repetition: usize) -> f64 {
    let _ = config.layer(layer);
    let n = config.channels() as f64;
    let b = repetition as f64;
    let upper: f64 = config.layers()[layer..]
        .iter()
        .map(|p| config.gain_mean() * p.power * p.arrival_rate * b / n)
        .sum();
    upper + config.noise_power()
}

/// Descending power allocation that gives every layer the same average SINR.
///
/// Powers are fixed from layer L down to layer 1 as `P_l = γ σ̄_l² / σ_h²`,
/// where σ̄_l² only depends on the already-fixed upper-layer powers.
pub fn allocate_powers(
    gamma: TargetSinr,
    arrivals: &[f64],
    channels: usize,
    gain_mean: f64,
    noise_power: f64,
) -> Vec<f64> {
    let n = channels as f64;
    let mut powers = vec![0.0; arrivals.len()];
    // Running Σ_{i>l} σ_h² P_i λ_i / N.
    let mut upper = 0.0;
    for l in (0..arrivals.len()).rev() {
        let variance = upper + noise_power;
        powers[l] = gamma.linear() * variance / gain_mean;
        upper += gain_mean * powers[l] * arrivals[l] / n;
    }
    powers
}
