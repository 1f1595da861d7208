//! Closed-form throughput of layered multichannel ALOHA under Rayleigh fading.
//!
//! A layer-l signal that is alone on its channel, with every lower layer
//! already cancelled, is captured with probability
//!
//! ```text
//! φ_l = exp(−ν(R_l) N_0 / (P_l σ_h²) − Σ_{i>l} (λ_i/N) ν(R_l) P_i / (P_l + ν(R_l) P_i))
//! ```
//!
//! Layer l contributes `R_l (Π_{m<l} ρ_m) η_l` to the total, where `η_l` is
//! the expected number of decoded layer-l packets and `ρ_m` is the probability
//! that a given channel of layer m is either empty or carries a decoded signal.
//! The total treats decoding events of different layers as independent, which
//! makes it exact for L = 1 and an approximation otherwise.

use crate::model::{interference_variance, snr_gap, SystemConfig, TargetSinr};

/// Reference throughput of IRSA with an optimized degree distribution
/// (maximum repetition 16, asymptotic frame length), per channel.
/// This is a cited constant, not something computed here.
pub const IRSA_REFERENCE_PER_CHANNEL: f64 = 0.965;

/// Which capture probability feeds the throughput formulas.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CaptureModel {
    /// Exact Rayleigh/Poisson expression.
    #[default]
    Exact,
    /// Jensen lower bound `exp(−ν(R_l)/γ_l)`.
    LowerBound,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticReport {
    pub capture_exact: Vec<f64>,
    pub capture_bound: Vec<f64>,
    /// Capture model used for `eta`, `rho` and the throughput values.
    pub model: CaptureModel,
    pub eta: Vec<f64>,
    pub rho: Vec<f64>,
    pub layer_throughput: Vec<f64>,
    pub total_throughput: f64,
}

/// Exact capture probability of a lone layer-`layer` signal (1-based).
///
/// Upper-layer occupancy per channel is Poisson with mean `λ_i B / N`, so with
/// `B = 1` this is the single-copy capture probability. The repetition
/// analysis reuses it through [`capture_prob_with_repetition`].
pub fn capture_prob_exact(config: &SystemConfig, layer: usize) -> f64 {
    capture_prob_with_repetition(config, layer, 1)
}

pub(crate) fn capture_prob_with_repetition(
    config: &SystemConfig,
    layer: usize,
    repetition: usize,
) -> f64 {
    capture_exponent(config, layer, repetition, false).map_or(1.0, |x| (-x).exp())
}

/// Exponent of the capture probability, or `None` at zero rate. The Jensen
/// variant drops `ν P_m` from each denominator; sharing the numerators keeps
/// the bound below the exact value after rounding too.
fn capture_exponent(config: &SystemConfig, layer: usize, repetition: usize, jensen: bool) -> Option<f64> {
    let own = config.layer(layer);
    let nu = snr_gap(own.rate);
    if nu == 0.0 {
        return None;
    }
    let occupancy_scale = repetition as f64 / config.channels() as f64;
    let noise_term = nu * config.noise_power() / (own.power * config.gain_mean());
    let interference_term: f64 = config.layers()[layer..]
        .iter()
        .map(|p| {
            let denom = if jensen { own.power } else { own.power + nu * p.power };
            p.arrival_rate * occupancy_scale * nu * p.power / denom
        })
        .sum();
    Some(noise_term + interference_term)
}

/// Average SINR `γ_l = P_l σ_h² / σ̄_l²` of a lone layer-`layer` signal.
pub fn average_sinr(config: &SystemConfig, layer: usize) -> f64 {
    config.layer(layer).power * config.gain_mean() / interference_variance(config, layer, 1)
}

/// Jensen lower bound `exp(−ν(R_l)/γ_l)` on the capture probability.
///
/// Algebraically equal to `exp(−ν N_0/(P_l σ_h²) − Σ_m λ_m ν P_m/(N P_l))`.
pub fn capture_prob_lower_bound(config: &SystemConfig, layer: usize) -> f64 {
    capture_exponent(config, layer, 1, true).map_or(1.0, |x| (-x).exp())
}

pub fn capture_prob(config: &SystemConfig, layer: usize, model: CaptureModel) -> f64 {
    match model {
        CaptureModel::Exact => capture_prob_exact(config, layer),
        CaptureModel::LowerBound => capture_prob_lower_bound(config, layer),
    }
}

/// Expected number of decoded layer-l packets, `φ_l λ_l e^{−λ_l/N}`, given
/// that all lower layers are cancelled.
pub fn eta(arrival_rate: f64, channels: usize, capture: f64) -> f64 {
    capture * arrival_rate * (-arrival_rate / channels as f64).exp()
}

/// Probability that a channel of the layer is empty or carries a decoded
/// signal, `(1 + φ_l λ_l/N) e^{−λ_l/N}`.
pub fn rho(arrival_rate: f64, channels: usize, capture: f64) -> f64 {
    let load = arrival_rate / channels as f64;
    (1.0 + capture * load) * (-load).exp()
}

/// Total approximate throughput in bits per channel use.
pub fn throughput(config: &SystemConfig, model: CaptureModel) -> AnalyticReport {
    let layers = config.num_layers();
    let n = config.channels();
    let capture_exact: Vec<f64> = (1..=layers).map(|l| capture_prob_exact(config, l)).collect();
    let capture_bound: Vec<f64> = (1..=layers)
        .map(|l| capture_prob_lower_bound(config, l))
        .collect();
    let capture = match model {
        CaptureModel::Exact => &capture_exact,
        CaptureModel::LowerBound => &capture_bound,
    };

    let mut eta_v = Vec::with_capacity(layers);
    let mut rho_v = Vec::with_capacity(layers);
    let mut layer_throughput = Vec::with_capacity(layers);
    // Probability that every lower layer is clear at a given channel.
    let mut clear = 1.0;
    for (params, &phi) in config.layers().iter().zip(capture) {
        let e = eta(params.arrival_rate, n, phi);
        let r = rho(params.arrival_rate, n, phi);
        layer_throughput.push(params.rate * clear * e);
        eta_v.push(e);
        rho_v.push(r);
        clear *= r;
    }
    let total_throughput = layer_throughput.iter().sum();
    AnalyticReport {
        capture_exact,
        capture_bound,
        model,
        eta: eta_v,
        rho: rho_v,
        layer_throughput,
        total_throughput,
    }
}

/// Common-rate capture lower bound `φ̃ = e^{−ν(R)/γ}`.
pub fn common_capture_bound(rate: f64, gamma: TargetSinr) -> f64 {
    (-snr_gap(rate) / gamma.linear()).exp()
}

/// Per-layer terms of the lower bound on the expected number of decoded
/// packets when every layer uses rate R and target SINR γ:
/// `N (Π_{m<l} ρ̃_m) φ̃ τ_l e^{−τ_l}` with `ρ̃_m = (1 + φ̃ τ_m) e^{−τ_m}`.
pub fn decoded_packets_bound_terms(
    channels: usize,
    normalized_arrivals: &[f64],
    rate: f64,
    gamma: TargetSinr,
) -> Vec<f64> {
    let phi = common_capture_bound(rate, gamma);
    let n = channels as f64;
    let mut clear = 1.0;
    normalized_arrivals
        .iter()
        .map(|&tau| {
            let term = n * clear * phi * tau * (-tau).exp();
            clear *= (1.0 + phi * tau) * (-tau).exp();
            term
        })
        .collect()
}

/// Lower bound on the expected number of decoded packets per slot, given the
/// normalized arrival rates `τ_l = λ_l / N`.
pub fn decoded_packets_bound(
    channels: usize,
    normalized_arrivals: &[f64],
    rate: f64,
    gamma: TargetSinr,
) -> f64 {
    decoded_packets_bound_terms(channels, normalized_arrivals, rate, gamma)
        .iter()
        .sum()
}

/// Peak expected decoded packets of multichannel ALOHA, `e^{−1} N`.
pub fn baseline_aloha_max(channels: usize) -> f64 {
    (-1f64).exp() * channels as f64
}

/// Cited IRSA reference, `0.965 N`.
pub fn baseline_irsa(channels: usize) -> f64 {
    IRSA_REFERENCE_PER_CHANNEL * channels as f64
}
