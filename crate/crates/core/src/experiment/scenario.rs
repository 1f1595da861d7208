use rayon::prelude::*;

use super::csv::{Dataset, LayerTag, Quantity, Row, SimStat};
use super::ExperimentError;
use crate::model::{SystemConfig, TargetSinr};
use crate::optimize::{optimize_arrivals, optimize_rates, SearchSettings};
use crate::outage::outage;
use crate::sim::{estimate_outage, estimate_throughput, EstimatorOutput, SimSettings};
use crate::throughput::{
    baseline_aloha_max, baseline_irsa, decoded_packets_bound_terms, throughput, CaptureModel,
};

/// Parameter varied along a scenario grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVar {
    /// Arrival rate λ, applied to every layer.
    Arrival,
    /// Common rate R for every layer.
    Rate,
    GammaDb,
    Copies,
    Layers,
    Channels,
}

impl SweepVar {
    pub fn name(self) -> &'static str {
        match self {
            SweepVar::Arrival => "arrival",
            SweepVar::Rate => "rate",
            SweepVar::GammaDb => "gamma_db",
            SweepVar::Copies => "copies",
            SweepVar::Layers => "layers",
            SweepVar::Channels => "channels",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            SweepVar::Arrival,
            SweepVar::Rate,
            SweepVar::GammaDb,
            SweepVar::Copies,
            SweepVar::Layers,
            SweepVar::Channels,
        ]
        .into_iter()
        .find(|v| v.name() == s)
    }

    fn is_integer(self) -> bool {
        matches!(self, SweepVar::Copies | SweepVar::Layers | SweepVar::Channels)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RateChoice {
    /// Same rate on every layer.
    Fixed(f64),
    /// Per-layer throughput-maximizing rates.
    Optimal,
}

/// Fixed parameters of a scenario; the swept one is overwritten per point.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioBase {
    pub layers: usize,
    pub channels: usize,
    /// Per-layer arrival rate (equal across layers).
    pub arrival: f64,
    pub rate: RateChoice,
    pub gamma_db: f64,
    pub repetition: usize,
    pub gain_mean: f64,
    pub noise_power: f64,
}

impl Default for ScenarioBase {
    fn default() -> Self {
        Self {
            layers: 3,
            channels: 10,
            arrival: 10.0,
            rate: RateChoice::Optimal,
            gamma_db: 3.0,
            repetition: 1,
            gain_mean: 1.0,
            noise_power: 1.0,
        }
    }
}

impl ScenarioBase {
    fn at(&self, var: SweepVar, x: f64) -> Self {
        let mut p = self.clone();
        match var {
            SweepVar::Arrival => p.arrival = x,
            SweepVar::Rate => p.rate = RateChoice::Fixed(x),
            SweepVar::GammaDb => p.gamma_db = x,
            SweepVar::Copies => p.repetition = x as usize,
            SweepVar::Layers => p.layers = x as usize,
            SweepVar::Channels => p.channels = x as usize,
        }
        p
    }

    pub fn describe(&self) -> String {
        let rate = match self.rate {
            RateChoice::Fixed(r) => r.to_string(),
            RateChoice::Optimal => "optimal".into(),
        };
        format!(
            "layers={} channels={} arrival={} rate={} gamma_db={} repetition={} gain_mean={} noise_power={}",
            self.layers,
            self.channels,
            self.arrival,
            rate,
            self.gamma_db,
            self.repetition,
            self.gain_mean,
            self.noise_power
        )
    }
}

/// Which quantities a scenario emits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Outputs {
    pub analytic: bool,
    pub capture: bool,
    pub simulated: bool,
    pub bound: bool,
    pub baselines: bool,
    pub outage: bool,
    pub power: bool,
}

impl Outputs {
    pub fn parse_list(s: &str) -> Option<Self> {
        let mut o = Outputs::default();
        for part in s.split(',').map(str::trim) {
            match part {
                "analytic" => o.analytic = true,
                "capture" => o.capture = true,
                "simulated" => o.simulated = true,
                "bound" => o.bound = true,
                "baselines" => o.baselines = true,
                "outage" => o.outage = true,
                "power" => o.power = true,
                _ => return None,
            }
        }
        Some(o)
    }
}

/// One data series: a grid over one parameter with everything else fixed.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    /// Written to the `scenario` CSV column. Must not contain commas.
    pub label: String,
    pub sweep: SweepVar,
    pub grid: Vec<f64>,
    pub base: ScenarioBase,
    pub outputs: Outputs,
    pub sim: SimSettings,
    pub search: SearchSettings,
    /// Capture model used for the analytic throughput and rate search.
    pub capture_model: CaptureModel,
}

impl Scenario {
    pub fn validate(&self) -> Result<(), ExperimentError> {
        let invalid = |m: String| Err(ExperimentError::InvalidScenario(m));
        if self.label.is_empty() || self.label.contains([',', '\n']) {
            return invalid(format!("label `{}` must be non-empty without commas", self.label));
        }
        if self.grid.is_empty() {
            return invalid("grid is empty".into());
        }
        if self.grid.windows(2).any(|w| w[0] >= w[1]) {
            return invalid("grid must be strictly increasing".into());
        }
        if self.sweep.is_integer() && self.grid.iter().any(|x| x.fract() != 0.0 || *x < 1.0) {
            return invalid(format!("{} grid must hold positive integers", self.sweep.name()));
        }
        if self.outputs.simulated && self.sim.slots == 0 {
            return invalid("simulation needs at least one slot".into());
        }
        self.search.validate()?;
        Ok(())
    }

    pub fn provenance(&self) -> Vec<String> {
        let mut lines = vec![format!(
            "series {}: sweep {} over [{}]; {}",
            self.label,
            self.sweep.name(),
            self.grid
                .iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(" "),
            self.base.describe()
        )];
        if self.outputs.simulated {
            lines.push(format!(
                "series {}: slots={} seed={} blocking={:?} (same seed at every grid point)",
                self.label, self.sim.slots, self.sim.seed, self.sim.blocking
            ));
        }
        if matches!(self.base.rate, RateChoice::Optimal) || self.outputs.bound {
            lines.push(format!(
                "series {}: search upper={} grid_points={} refine_tol={} capture={:?}",
                self.label,
                self.search.upper,
                self.search.grid_points,
                self.search.refine_tol,
                self.capture_model
            ));
        }
        lines
    }
}

/// Builds the system configuration for one grid point, resolving powers from
/// the target SINR and, if requested, optimal rates.
pub fn resolve_point(
    base: &ScenarioBase,
    search: &SearchSettings,
    model: CaptureModel,
) -> Result<SystemConfig, ExperimentError> {
    let gamma = TargetSinr::from_db(base.gamma_db)?;
    let arrivals = vec![base.arrival; base.layers];
    let fixed_rate = match base.rate {
        RateChoice::Fixed(r) => r,
        RateChoice::Optimal => 0.0,
    };
    let config = SystemConfig::with_target_sinr(
        base.channels,
        &arrivals,
        &vec![fixed_rate; base.layers],
        gamma,
        base.gain_mean,
        base.noise_power,
        base.repetition,
    )?;
    Ok(match base.rate {
        RateChoice::Fixed(_) => config,
        RateChoice::Optimal => {
            let plan = optimize_rates(&config, search, model)?;
            config.with_rates(&plan.optimal_rates)?
        }
    })
}

fn sim_stat(e: &EstimatorOutput) -> Option<SimStat> {
    Some(SimStat {
        stderr: e.std_error,
        slots: e.slots,
        seed: e.seed,
    })
}

fn point_rows(scenario: &Scenario, x: f64) -> Result<Vec<Row>, ExperimentError> {
    let params = scenario.base.at(scenario.sweep, x);
    let mut rows = Vec::new();
    let mut push = |layer: LayerTag, quantity: Quantity, value: f64, sim: Option<SimStat>| {
        rows.push(Row {
            scenario: scenario.label.clone(),
            x_name: scenario.sweep.name(),
            x_value: x,
            layer,
            quantity,
            value,
            sim,
        })
    };
    let o = scenario.outputs;

    if o.bound || o.baselines {
        let n = params.channels;
        if o.bound {
            let rate = match params.rate {
                RateChoice::Fixed(r) => r,
                RateChoice::Optimal => {
                    return Err(ExperimentError::InvalidScenario(
                        "the decoded-packet bound needs a fixed common rate".into(),
                    ))
                }
            };
            let gamma = TargetSinr::from_db(params.gamma_db)?;
            let search = SearchSettings {
                grid_points: scenario.search.grid_points,
                refine_tol: scenario.search.refine_tol,
                ..SearchSettings::for_arrivals()
            };
            let plan = optimize_arrivals(params.layers, n, rate, gamma, &search)?;
            let terms = decoded_packets_bound_terms(n, &plan.normalized_arrivals, rate, gamma);
            for (l, t) in terms.iter().enumerate() {
                push(LayerTag::Layer(l + 1), Quantity::BoundThroughput, *t, None);
            }
            push(LayerTag::Total, Quantity::BoundThroughput, plan.value, None);
        }
        if o.baselines {
            push(LayerTag::Total, Quantity::BaselineIrsa, baseline_irsa(n), None);
            push(LayerTag::Total, Quantity::BaselineAloha, baseline_aloha_max(n), None);
        }
    }

    let needs_config = o.analytic || o.capture || o.simulated || o.outage || o.power;
    if !needs_config {
        return Ok(rows);
    }
    let config = resolve_point(&params, &scenario.search, scenario.capture_model)?;

    if o.power {
        let powers = config.powers();
        let mean = powers.iter().sum::<f64>() / powers.len() as f64;
        push(LayerTag::Total, Quantity::PowerMean, mean, None);
    }
    if o.analytic || o.capture {
        let report = throughput(&config, scenario.capture_model);
        if o.capture {
            for (l, (&e, &b)) in report
                .capture_exact
                .iter()
                .zip(&report.capture_bound)
                .enumerate()
            {
                push(LayerTag::Layer(l + 1), Quantity::CaptureExact, e, None);
                push(LayerTag::Layer(l + 1), Quantity::CaptureBound, b, None);
            }
        }
        if o.analytic {
            for (l, &t) in report.layer_throughput.iter().enumerate() {
                push(LayerTag::Layer(l + 1), Quantity::AnalyticThroughput, t, None);
            }
            push(
                LayerTag::Total,
                Quantity::AnalyticThroughput,
                report.total_throughput,
                None,
            );
        }
    }
    if o.simulated && !o.outage {
        let est = estimate_throughput(&config, &scenario.sim)?;
        for (l, e) in est.per_layer.iter().enumerate() {
            push(LayerTag::Layer(l + 1), Quantity::SimulatedThroughput, e.mean, sim_stat(e));
        }
        push(
            LayerTag::Total,
            Quantity::SimulatedThroughput,
            est.total.mean,
            sim_stat(&est.total),
        );
    }
    if o.outage {
        let report = outage(&config)?;
        for (l, &p) in report.outage.iter().enumerate() {
            push(LayerTag::Layer(l + 1), Quantity::AnalyticOutage, p, None);
        }
        if o.simulated {
            let est = estimate_outage(&config, &scenario.sim)?;
            for (l, e) in est.iter().enumerate() {
                push(LayerTag::Layer(l + 1), Quantity::SimulatedOutage, e.mean, sim_stat(e));
            }
        }
    }
    Ok(rows)
}

/// Evaluates every grid point (concurrently) and returns the rows in grid
/// order, preceded by the series provenance.
pub fn run_scenario(scenario: &Scenario) -> Result<Dataset, ExperimentError> {
    scenario.validate()?;
    let per_point = scenario
        .grid
        .par_iter()
        .map(|&x| point_rows(scenario, x))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Dataset {
        provenance: scenario.provenance(),
        rows: per_point.into_iter().flatten().collect(),
    })
}

/// Average transmit power `Σ_l P_l / L` along the scenario grid.
pub fn run_power_report(scenario: &Scenario) -> Result<Dataset, ExperimentError> {
    let power_only = Scenario {
        outputs: Outputs {
            power: true,
            ..Outputs::default()
        },
        ..scenario.clone()
    };
    run_scenario(&power_only)
}
