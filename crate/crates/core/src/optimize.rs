//! Per-layer rate optimization.
//!
//! With arrivals and powers fixed, φ_l (and so η_l and ρ_l) depends on R_l
//! alone. The total throughput therefore nests as
//!
//! ```text
//! T_L(R_L) = R_L η_L(R_L)
//! T_l(R_l) = R_l η_l(R_l) + ρ_l(R_l) T_{l+1}(R*_{l+1})
//! ```
//!
//! and the L-dimensional maximization splits into L scalar searches run from
//! the top layer down. The same recursion maximizes the common-rate lower
//! bound over normalized arrival rates.

use crate::error::{ModelError, Result};
use crate::model::{SystemConfig, TargetSinr};
use crate::throughput::{capture_prob, common_capture_bound, eta, rho, CaptureModel};

/// Scalar search settings: a uniform grid over `[0, upper]` followed by a
/// golden-section refinement around the best grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchSettings {
    /// Upper end of the search interval (R_max for rates, τ_max for arrivals).
    pub upper: f64,
    /// Number of grid intervals on `(0, upper]`.
    pub grid_points: usize,
    /// Bracket width at which refinement stops.
    pub refine_tol: f64,
}

impl Default for SearchSettings {
    fn default() -> Self {
        Self {
            upper: 16.0,
            grid_points: 2048,
            refine_tol: 1e-10,
        }
    }
}

impl SearchSettings {
    /// Defaults for the normalized-arrival search, where the single-layer
    /// optimum sits at τ = 1.
    pub fn for_arrivals() -> Self {
        Self {
            upper: 8.0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.upper.is_finite() && self.upper > 0.0) {
            return Err(ModelError::InvalidSearch(format!(
                "upper bound must be finite and > 0, got {}",
                self.upper
            )));
        }
        if self.grid_points < 2 {
            return Err(ModelError::InvalidSearch(format!(
                "need at least 2 grid points, got {}",
                self.grid_points
            )));
        }
        if !(self.refine_tol.is_finite() && self.refine_tol > 0.0) {
            return Err(ModelError::InvalidSearch(format!(
                "refinement tolerance must be finite and > 0, got {}",
                self.refine_tol
            )));
        }
        Ok(())
    }
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Maximizes `f` over `[0, upper]`. Returns `(argmax, max)`; ties go to the
/// smallest argument.
pub fn maximize_scalar<F: Fn(f64) -> f64>(f: F, settings: &SearchSettings) -> (f64, f64) {
    let n = settings.grid_points;
    let step = settings.upper / n as f64;
    let mut best_i = 0;
    let mut best = f(0.0);
    for i in 1..=n {
        let v = f(i as f64 * step);
        if v > best {
            best = v;
            best_i = i;
        }
    }
    let mut best_x = best_i as f64 * step;

    let mut lo = best_i.saturating_sub(1) as f64 * step;
    let mut hi = (best_i + 1).min(n) as f64 * step;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > settings.refine_tol {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    for (x, v) in [(x1, f1), (x2, f2)] {
        if v > best {
            best = v;
            best_x = x;
        }
    }
    (best_x, best)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatePlan {
    pub optimal_rates: Vec<f64>,
    /// `T_l(R*_l)` for each layer; the first entry is the total.
    pub layer_values: Vec<f64>,
    pub achieved_throughput: f64,
}

/// Finds the throughput-maximizing rates for fixed arrivals and powers.
/// The rates stored in `config` are ignored.
pub fn optimize_rates(
    config: &SystemConfig,
    settings: &SearchSettings,
    model: CaptureModel,
) -> Result<RatePlan> {
    settings.validate()?;
    let layers = config.num_layers();
    let n = config.channels();
    let mut rates = vec![0.0; layers];
    let mut values = vec![0.0; layers];
    let mut next_value = 0.0;
    for l in (1..=layers).rev() {
        let arrival = config.layer(l).arrival_rate;
        if arrival == 0.0 {
            // Empty layer: no packets, and its channels never block.
            rates[l - 1] = 0.0;
            values[l - 1] = next_value;
            continue;
        }
        let objective = |r: f64| {
            let phi = layer_capture(config, l, r, model);
            r * eta(arrival, n, phi) + rho(arrival, n, phi) * next_value
        };
        let (r, v) = maximize_scalar(objective, settings);
        rates[l - 1] = r;
        values[l - 1] = v;
        next_value = v;
    }
    Ok(RatePlan {
        achieved_throughput: values[0],
        optimal_rates: rates,
        layer_values: values,
    })
}

/// Capture probability of layer `layer` if it used rate `rate`. φ_l does not
/// depend on other layers' rates, so only this layer's rate is swapped in.
fn layer_capture(config: &SystemConfig, layer: usize, rate: f64, model: CaptureModel) -> f64 {
    let mut rates = config.rates();
    rates[layer - 1] = rate;
    let probe = config
        .with_rates(&rates)
        .expect("non-negative finite rate keeps the config valid");
    capture_prob(&probe, layer, model)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArrivalPlan {
    /// Optimal normalized arrival rates τ*_l = λ_l / N.
    pub normalized_arrivals: Vec<f64>,
    /// Lower bound on the expected decoded packets at the optimum.
    pub value: f64,
}

/// Maximizes the common-rate lower bound on decoded packets over the
/// normalized arrival rates of `layers` layers.
pub fn optimize_arrivals(
    layers: usize,
    channels: usize,
    rate: f64,
    gamma: TargetSinr,
    settings: &SearchSettings,
) -> Result<ArrivalPlan> {
    settings.validate()?;
    if layers == 0 {
        return Err(ModelError::NoLayers);
    }
    if channels == 0 {
        return Err(ModelError::NoChannels);
    }
    let phi = common_capture_bound(rate, gamma);
    let mut tau = vec![0.0; layers];
    let mut next_value = 0.0;
    for l in (0..layers).rev() {
        let objective = |t: f64| {
            let decay = (-t).exp();
            phi * t * decay + (1.0 + phi * t) * decay * next_value
        };
        let (t, v) = maximize_scalar(objective, settings);
        tau[l] = t;
        next_value = v;
    }
    Ok(ArrivalPlan {
        normalized_arrivals: tau,
        value: channels as f64 * next_value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::LayerParams;
    use crate::throughput::{decoded_packets_bound, throughput};

    fn single(arrival: f64) -> SystemConfig {
        SystemConfig::new(10, vec![LayerParams::new(arrival, 2.0, 0.0)], 1.0, 1.0, 1).unwrap()
    }

    #[test]
    fn golden_refinement_finds_smooth_peak() {
        let s = SearchSettings {
            upper: 4.0,
            grid_points: 16,
            refine_tol: 1e-12,
        };
        let (x, v) = maximize_scalar(|x| -(x - 1.2345).powi(2), &s);
        assert!((x - 1.2345).abs() < 1e-6);
        assert!(v <= 0.0 && v > -1e-11);
    }

    #[test]
    fn flat_objective_ties_to_zero() {
        let (x, v) = maximize_scalar(|_| 0.0, &SearchSettings::default());
        assert_eq!((x, v), (0.0, 0.0));
    }

    #[test]
    fn empty_layer_gets_zero_rate() {
        let plan = optimize_rates(&single(0.0), &SearchSettings::default(), CaptureModel::Exact)
            .unwrap();
        assert_eq!(plan.optimal_rates, vec![0.0]);
        assert_eq!(plan.achieved_throughput, 0.0);
    }

    #[test]
    fn single_layer_matches_dense_scan() {
        let plan = optimize_rates(&single(10.0), &SearchSettings::default(), CaptureModel::Exact)
            .unwrap();
        // Independent 1e5-point scan of R e^{−ν(R)/2} 10 e^{−1}.
        let scale = 10.0 * (-1f64).exp();
        let (mut best_r, mut best) = (0.0, 0.0);
        for i in 0..=100_000 {
            let r = 16.0 * i as f64 / 100_000.0;
            let v = r * (-(2f64.powf(r) - 1.0) / 2.0).exp() * scale;
            if v > best {
                best = v;
                best_r = r;
            }
        }
        assert!((plan.optimal_rates[0] - best_r).abs() < 2e-4);
        assert!(plan.achieved_throughput >= best - 1e-12);
        assert!(plan.achieved_throughput - best < 1e-7);
    }

    #[test]
    fn plan_value_equals_throughput_at_plan() {
        let cfg = SystemConfig::with_target_sinr(
            10,
            &[6.0, 6.0, 6.0],
            &[0.0; 3],
            TargetSinr::from_db(3.0).unwrap(),
            1.0,
            1.0,
            1,
        )
        .unwrap();
        let plan = optimize_rates(&cfg, &SearchSettings::default(), CaptureModel::Exact).unwrap();
        let t = throughput(&cfg.with_rates(&plan.optimal_rates).unwrap(), CaptureModel::Exact);
        assert!((t.total_throughput - plan.achieved_throughput).abs() < 1e-12);
    }

    #[test]
    fn arrival_single_layer_peaks_at_one() {
        let g = TargetSinr::new(10.0).unwrap();
        let plan = optimize_arrivals(1, 10, 1.0, g, &SearchSettings::for_arrivals()).unwrap();
        assert!((plan.normalized_arrivals[0] - 1.0).abs() < 1e-6);
        let expected = 10.0 * (-0.1f64).exp() * (-1f64).exp();
        assert!((plan.value - expected).abs() < 1e-12);
        let at_plan = decoded_packets_bound(10, &plan.normalized_arrivals, 1.0, g);
        assert!((at_plan - plan.value).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_settings() {
        let bad = SearchSettings {
            upper: 0.0,
            ..SearchSettings::default()
        };
        assert!(optimize_rates(&single(1.0), &bad, CaptureModel::Exact).is_err());
        let g = TargetSinr::new(10.0).unwrap();
        assert!(optimize_arrivals(2, 10, 1.0, g, &bad).is_err());
    }
}
