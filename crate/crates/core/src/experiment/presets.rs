use super::scenario::{Outputs, RateChoice, Scenario, ScenarioBase, SweepVar};
use super::ExperimentError;
use crate::optimize::SearchSettings;
use crate::sim::SimSettings;
use crate::throughput::CaptureModel;

/// A named experiment scenario.
#[derive(Debug, Clone, Copy)]
pub struct PresetInfo {
    pub name: &'static str,
    /// Which published plot the series reproduce, by caption.
    pub description: &'static str,
    /// Assumptions written into the CSV provenance.
    pub notes: &'static [&'static str],
    build: fn(SimSettings, SearchSettings) -> Vec<Scenario>,
}

impl PresetInfo {
    pub fn scenarios(&self, sim: SimSettings, search: SearchSettings) -> Vec<Scenario> {
        (self.build)(sim, search)
    }
}

fn range(from: f64, to: f64, step: f64) -> Vec<f64> {
    let n = ((to - from) / step).round() as usize;
    // Rounded so that e.g. 0.1 steps land on 0.3 rather than 0.30000000000000004.
    (0..=n)
        .map(|i| ((from + i as f64 * step) * 1e9).round() / 1e9)
        .collect()
}

fn ints(from: usize, to: usize) -> Vec<f64> {
    (from..=to).map(|v| v as f64).collect()
}

struct Builder {
    sim: SimSettings,
    search: SearchSettings,
}

impl Builder {
    fn series(
        &self,
        label: String,
        sweep: SweepVar,
        grid: Vec<f64>,
        base: ScenarioBase,
        outputs: Outputs,
    ) -> Scenario {
        Scenario {
            label,
            sweep,
            grid,
            base,
            outputs,
            sim: self.sim,
            search: self.search,
            capture_model: CaptureModel::Exact,
        }
    }
}

const ANALYTIC_SIM: Outputs = Outputs {
    analytic: true,
    capture: true,
    simulated: true,
    bound: false,
    baselines: false,
    outage: false,
    power: false,
};

const ANALYTIC_ONLY: Outputs = Outputs {
    analytic: true,
    capture: false,
    simulated: false,
    bound: false,
    baselines: false,
    outage: false,
    power: false,
};

const BOUND: Outputs = Outputs {
    analytic: false,
    capture: false,
    simulated: false,
    bound: true,
    baselines: true,
    outage: false,
    power: false,
};

const OUTAGE: Outputs = Outputs {
    analytic: false,
    capture: false,
    simulated: true,
    bound: false,
    baselines: false,
    outage: true,
    power: false,
};

const POWER: Outputs = Outputs {
    analytic: false,
    capture: false,
    simulated: false,
    bound: false,
    baselines: false,
    outage: false,
    power: true,
};

fn bound_base(layers: usize, channels: usize) -> ScenarioBase {
    ScenarioBase {
        layers,
        channels,
        arrival: channels as f64,
        rate: RateChoice::Fixed(1.0),
        gamma_db: 10.0,
        ..ScenarioBase::default()
    }
}

fn outage_base() -> ScenarioBase {
    ScenarioBase {
        layers: 3,
        channels: 60,
        arrival: 3.0,
        rate: RateChoice::Fixed(1.0),
        gamma_db: 10.0,
        repetition: 4,
        ..ScenarioBase::default()
    }
}

fn compare_irsa(sim: SimSettings, search: SearchSettings) -> Vec<Scenario> {
    let b = Builder { sim, search };
    let mut s = b.series("bound-N10".into(), SweepVar::Layers, ints(1, 8), bound_base(1, 10), BOUND);
    s.capture_model = CaptureModel::LowerBound;
    vec![s]
}

fn compare_irsa_channels(sim: SimSettings, search: SearchSettings) -> Vec<Scenario> {
    let b = Builder { sim, search };
    [3, 4]
        .into_iter()
        .map(|l| {
            let mut s = b.series(
                format!("bound-L{l}"),
                SweepVar::Channels,
                range(10.0, 100.0, 10.0),
                bound_base(l, 10),
                BOUND,
            );
            s.capture_model = CaptureModel::LowerBound;
            s
        })
        .collect()
}

fn throughput_vs_arrival(sim: SimSettings, search: SearchSettings) -> Vec<Scenario> {
    let b = Builder { sim, search };
    [3, 6]
        .into_iter()
        .map(|l| {
            let base = ScenarioBase {
                layers: l,
                ..ScenarioBase::default()
            };
            b.series(format!("L{l}"), SweepVar::Arrival, ints(1, 14), base, ANALYTIC_SIM)
        })
        .collect()
}

fn power_vs_arrival(sim: SimSettings, search: SearchSettings) -> Vec<Scenario> {
    let b = Builder { sim, search };
    [3, 6]
        .into_iter()
        .map(|l| {
            let base = ScenarioBase {
                layers: l,
                rate: RateChoice::Fixed(1.0),
                ..ScenarioBase::default()
            };
            b.series(format!("L{l}"), SweepVar::Arrival, ints(0, 14), base, POWER)
        })
        .collect()
}

fn throughput_vs_rate(sim: SimSettings, search: SearchSettings) -> Vec<Scenario> {
    let b = Builder { sim, search };
    let mut out = Vec::new();
    for l in [3, 6] {
        let base = ScenarioBase {
            layers: l,
            ..ScenarioBase::default()
        };
        out.push(b.series(
            format!("L{l}-uniform"),
            SweepVar::Rate,
            range(0.1, 6.0, 0.1),
            base.clone(),
            ANALYTIC_ONLY,
        ));
        // Reference level: optimal rates at the same arrival rate.
        out.push(b.series(
            format!("L{l}-optimal"),
            SweepVar::Arrival,
            vec![base.arrival],
            base,
            ANALYTIC_ONLY,
        ));
    }
    out
}

fn throughput_vs_layers(sim: SimSettings, search: SearchSettings) -> Vec<Scenario> {
    let b = Builder { sim, search };
    [5.0, 10.0]
        .into_iter()
        .map(|arrival| {
            let base = ScenarioBase {
                arrival,
                ..ScenarioBase::default()
            };
            b.series(format!("lambda{arrival}"), SweepVar::Layers, ints(1, 8), base, ANALYTIC_ONLY)
        })
        .collect()
}

fn throughput_vs_gamma(sim: SimSettings, search: SearchSettings) -> Vec<Scenario> {
    let b = Builder { sim, search };
    [3, 6]
        .into_iter()
        .map(|l| {
            let base = ScenarioBase {
                layers: l,
                ..ScenarioBase::default()
            };
            b.series(format!("L{l}"), SweepVar::GammaDb, range(0.0, 20.0, 1.0), base, ANALYTIC_ONLY)
        })
        .collect()
}

fn outage_vs_rate(sim: SimSettings, search: SearchSettings) -> Vec<Scenario> {
    let b = Builder { sim, search };
    vec![b.series("B4".into(), SweepVar::Rate, range(0.25, 3.0, 0.25), outage_base(), OUTAGE)]
}

fn outage_vs_copies(sim: SimSettings, search: SearchSettings) -> Vec<Scenario> {
    let b = Builder { sim, search };
    vec![b.series("R1".into(), SweepVar::Copies, ints(1, 12), outage_base(), OUTAGE)]
}

fn outage_vs_arrival(sim: SimSettings, search: SearchSettings) -> Vec<Scenario> {
    let b = Builder { sim, search };
    vec![b.series("B4".into(), SweepVar::Arrival, range(0.5, 6.0, 0.5), outage_base(), OUTAGE)]
}

pub const PRESETS: &[PresetInfo] = &[
    PresetInfo {
        name: "compare-irsa",
        description: "decoded-packet lower bound vs number of layers (N = 10, R = 1) against ALOHA and IRSA",
        notes: &[
            "target SINR 10 dB is assumed for this plot",
            "lower-bound capture probability; normalized arrivals optimized per layer",
            "IRSA reference is the constant 0.965 N",
        ],
        build: compare_irsa,
    },
    PresetInfo {
        name: "compare-irsa-channels",
        description: "decoded-packet lower bound vs number of channels (R = 1, L in {3, 4}, 10 dB)",
        notes: &["lower-bound capture probability; normalized arrivals optimized per layer"],
        build: compare_irsa_channels,
    },
    PresetInfo {
        name: "throughput-vs-arrival",
        description: "throughput vs arrival rate with optimal rates (3 dB, N = 10, L in {3, 6})",
        notes: &[
            "integer arrival grid 1..14",
            "rates optimized per grid point with exact capture probability",
        ],
        build: throughput_vs_arrival,
    },
    PresetInfo {
        name: "power-vs-arrival",
        description: "average transmit power vs arrival rate (3 dB, N = 10, L in {3, 6})",
        notes: &[],
        build: power_vs_arrival,
    },
    PresetInfo {
        name: "throughput-vs-rate",
        description: "throughput vs a common rate against optimal per-layer rates (lambda = N = 10, 3 dB)",
        notes: &["the -optimal series holds a single point at the same arrival rate"],
        build: throughput_vs_rate,
    },
    PresetInfo {
        name: "throughput-vs-layers",
        description: "throughput with optimal rates vs number of layers (N = 10, lambda in {N/2, N}, 3 dB)",
        notes: &[],
        build: throughput_vs_layers,
    },
    PresetInfo {
        name: "throughput-vs-gamma",
        description: "throughput with optimal rates vs target SINR (N = 10, lambda = N, L in {3, 6})",
        notes: &[],
        build: throughput_vs_gamma,
    },
    PresetInfo {
        name: "outage-vs-rate",
        description: "outage per layer vs rate with repetition (B = 4, N = 60, L = 3, lambda = 3, 10 dB)",
        notes: &["simulation uses sticky blocking unless overridden"],
        build: outage_vs_rate,
    },
    PresetInfo {
        name: "outage-vs-copies",
        description: "outage per layer vs number of copies B (R = 1, N = 60, L = 3, lambda = 3, 10 dB)",
        notes: &["simulation uses sticky blocking unless overridden"],
        build: outage_vs_copies,
    },
    PresetInfo {
        name: "outage-vs-arrival",
        description: "outage per layer vs arrival rate (B = 4, R = 1, N = 60, L = 3, 10 dB)",
        notes: &["simulation uses sticky blocking unless overridden"],
        build: outage_vs_arrival,
    },
];

pub fn preset_names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|p| p.name)
}

pub fn preset(name: &str) -> Result<&'static PresetInfo, ExperimentError> {
    PRESETS
        .iter()
        .find(|p| p.name == name)
        .ok_or_else(|| ExperimentError::UnknownScenario(name.to_string()))
}
