//! Outage analysis when every user sends B copies on B distinct channels.
//!
//! For a user in layer l with `m − 1` other layer-l users, a given copy fails
//! with probability `α_l(m) = p_c(m) + (1 − p_c(m)) β_l`. Treating the B copies
//! as independent, the probability that all of them fail, averaged over the
//! zero-truncated Poisson count of layer-l users, is
//!
//! ```text
//! Ψ_l = Σ_{m≥1} α_l(m)^B P(M_l = m | M_l ≥ 1)
//!     = Σ_{b=0}^{B} C(B,b) (1−β_l)^b β_l^{B−b} g_l(b)
//! ```
//!
//! where `g_l(b) = E[p_c(M)^b | M ≥ 1]` has a finite alternating form in
//! `ω = (1 − 1/N)^B`. Outage at layer l includes error propagation from the
//! layers below: `P_out,l = 1 − Π_{i≤l} (1 − Ψ_i)`.

use crate::error::{ModelError, Result};
use crate::model::{collision_prob, SystemConfig};
use crate::throughput::capture_prob_with_repetition;

/// Default truncation tolerance for the series evaluations.
pub const DEFAULT_TAIL_TOL: f64 = 1e-12;

/// Above this order the alternating sum for `g(b)` is not trusted.
const MAX_ALTERNATING_ORDER: usize = 20;
/// Largest acceptable ratio between the biggest alternating term and the result.
const MAX_CANCELLATION: f64 = 1e6;

#[derive(Debug, Clone, PartialEq)]
pub struct OutageReport {
    pub psi: Vec<f64>,
    pub outage: Vec<f64>,
    pub omega: f64,
    pub beta: Vec<f64>,
}

/// Per-copy decoding error probability of a lone layer-`layer` copy when the
/// upper layers each occupy a channel with Poisson mean `λ_i B / N`.
pub fn beta_crrd(config: &SystemConfig, layer: usize) -> f64 {
    1.0 - capture_prob_with_repetition(config, layer, config.repetition())
}

/// `ω = (1 − 1/N)^B`, the probability that another user's B copies all miss
/// a given channel.
pub fn omega(channels: usize, repetition: usize) -> f64 {
    (repetition as f64 * (-1.0 / channels as f64).ln_1p()).exp()
}

/// Zero-truncated Poisson probabilities `P(M = m | M ≥ 1)` for `m = 1, 2, …`,
/// stopping once `m ≥ min_terms` and the remaining tail is below `tail_tol`.
struct TruncatedPoisson {
    lambda: f64,
    m: usize,
    pmf: f64,
    min_terms: usize,
    tail_tol: f64,
}

impl TruncatedPoisson {
    fn new(lambda: f64, tail_tol: f64) -> Self {
        let min_terms = ((lambda + 10.0 * lambda.sqrt() + 30.0).ceil() as usize).max(50);
        Self {
            lambda,
            m: 0,
            // P(M = 1 | M >= 1) = λ / (e^λ − 1)
            pmf: lambda / lambda.exp_m1(),
            min_terms,
            tail_tol,
        }
    }
}

impl Iterator for TruncatedPoisson {
    type Item = (usize, f64);

    fn next(&mut self) -> Option<(usize, f64)> {
        if self.m > 0 {
            let m = self.m as f64;
            // Tail after term m is bounded by a geometric series once m + 1 > λ.
            let ratio = self.lambda / (m + 2.0);
            if self.m >= self.min_terms && ratio < 1.0 {
                let tail = self.pmf * self.lambda / (m + 1.0) / (1.0 - ratio);
                if tail < self.tail_tol {
                    return None;
                }
            }
            self.pmf *= self.lambda / (m + 1.0);
        }
        self.m += 1;
        Some((self.m, self.pmf))
    }
}

fn check_arrival(config: &SystemConfig, layer: usize) -> Result<f64> {
    let lambda = config.layer(layer).arrival_rate;
    if lambda > 0.0 {
        Ok(lambda)
    } else {
        Err(ModelError::ZeroArrival { layer })
    }
}

fn check_tol(tail_tol: f64) -> Result<()> {
    if tail_tol.is_finite() && tail_tol > 0.0 {
        Ok(())
    } else {
        Err(ModelError::NotPositive {
            name: "tail tolerance",
            value: tail_tol,
        })
    }
}

/// Ψ_l by direct summation of `α_l(m)^B` over the zero-truncated Poisson law.
pub fn psi_series(config: &SystemConfig, layer: usize, tail_tol: f64) -> Result<f64> {
    let lambda = check_arrival(config, layer)?;
    check_tol(tail_tol)?;
    let beta = beta_crrd(config, layer);
    let (n, b) = (config.channels(), config.repetition());
    let mut sum = 0.0;
    for (m, p) in TruncatedPoisson::new(lambda, tail_tol) {
        let pc = collision_prob(m, n, b)?;
        let alpha = pc + (1.0 - pc) * beta;
        sum += alpha.powi(b as i32) * p;
    }
    Ok(sum.min(1.0))
}

/// `g(b) = E[p_c(M)^b | M ≥ 1]` by direct summation.
pub fn collision_moment_series(order: usize, lambda: f64, omega: f64, tail_tol: f64) -> f64 {
    TruncatedPoisson::new(lambda, tail_tol)
        .map(|(m, p)| (1.0 - omega.powi(m as i32 - 1)).powi(order as i32) * p)
        .sum()
}

/// `g(b)` from the finite alternating sum
/// `Σ_{j=0}^{b} C(b,j) (−1)^j ω^{−j} (e^{λω^j} − 1) / (e^λ − 1)`.
///
/// Returns the value and the largest absolute term, which measures how much
/// cancellation happened.
pub fn collision_moment_alternating(order: usize, lambda: f64, omega: f64) -> (f64, f64) {
    let denom = lambda.exp_m1();
    let mut sum = 0.0;
    let mut largest: f64 = 0.0;
    let mut binom = 1.0;
    for j in 0..=order {
        if j > 0 {
            binom *= (order - j + 1) as f64 / j as f64;
        }
        let wj = omega.powi(j as i32);
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        let term = sign * binom * (lambda * wj).exp_m1() / (wj * denom);
        largest = largest.max(term.abs());
        sum += term;
    }
    (sum, largest)
}

/// `g(b)`, taken from the alternating form unless it is numerically unsafe.
pub fn collision_moment(order: usize, lambda: f64, omega: f64) -> f64 {
    if order <= MAX_ALTERNATING_ORDER {
        let (value, largest) = collision_moment_alternating(order, lambda, omega);
        if order == 0 || (value > 0.0 && largest <= MAX_CANCELLATION * value) {
            return value.clamp(0.0, 1.0);
        }
    }
    collision_moment_series(order, lambda, omega, DEFAULT_TAIL_TOL)
}

fn binomial_mix<G: Fn(usize) -> f64>(repetition: usize, beta: f64, moment: G) -> f64 {
    let mut binom = 1.0;
    let mut sum = 0.0;
    for b in 0..=repetition {
        if b > 0 {
            binom *= (repetition - b + 1) as f64 / b as f64;
        }
        sum += binom
            * (1.0 - beta).powi(b as i32)
            * beta.powi((repetition - b) as i32)
            * moment(b);
    }
    sum
}

/// Ψ_l from the finite double sum, with the cancellation guard on `g(b)`.
pub fn psi_closed_form(config: &SystemConfig, layer: usize) -> Result<f64> {
    let lambda = check_arrival(config, layer)?;
    let w = omega(config.channels(), config.repetition());
    let beta = beta_crrd(config, layer);
    let psi = binomial_mix(config.repetition(), beta, |b| collision_moment(b, lambda, w));
    Ok(psi.clamp(0.0, 1.0))
}

/// Ψ_l from the finite double sum with no fallback, exactly as written.
pub fn psi_closed_form_unguarded(config: &SystemConfig, layer: usize) -> Result<f64> {
    let lambda = check_arrival(config, layer)?;
    let w = omega(config.channels(), config.repetition());
    let beta = beta_crrd(config, layer);
    Ok(binomial_mix(config.repetition(), beta, |b| {
        collision_moment_alternating(b, lambda, w).0
    }))
}

/// Cascaded outage `P_out,l = 1 − Π_{i≤l} (1 − Ψ_i)`, accumulated as
/// `P_out,l = P_out,l−1 + (1 − P_out,l−1) Ψ_l` so that `P_out,1 = Ψ_1` exactly.
pub fn outage_from_psi(psi: &[f64]) -> Vec<f64> {
    let mut out = 0.0;
    psi.iter()
        .map(|&p| {
            out += (1.0 - out) * p;
            out
        })
        .collect()
}

pub fn outage(config: &SystemConfig) -> Result<OutageReport> {
    let layers = config.num_layers();
    let psi = (1..=layers)
        .map(|l| psi_closed_form(config, l))
        .collect::<Result<Vec<_>>>()?;
    Ok(OutageReport {
        outage: outage_from_psi(&psi),
        omega: omega(config.channels(), config.repetition()),
        beta: (1..=layers).map(|l| beta_crrd(config, l)).collect(),
        psi,
    })
}
