use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use layered_ra::config_file::{ConfigSpec, PerLayer};
use layered_ra::experiment::{
    format_sig9, preset, run_scenario, run_series, version_string, Dataset, ExperimentError,
    LayerTag, Outputs, Quantity, RateChoice, Row, Scenario, ScenarioBase, SimStat, SweepVar,
    PRESETS,
};
use layered_ra::optimize::{optimize_rates, SearchSettings};
use layered_ra::outage::outage;
use layered_ra::sim::{estimate_outage, estimate_throughput, BlockingRule, SimSettings};
use layered_ra::throughput::{throughput, CaptureModel};
use layered_ra::SystemConfig;

#[derive(Parser)]
#[command(name = "layered-ra", version, about = "Layered NOMA random access: analysis, optimization and simulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a named experiment scenario.
    Scenario {
        /// Scenario name; omit with --list.
        name: Option<String>,
        /// List the available scenarios.
        #[arg(long)]
        list: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Sweep one parameter over a grid.
    Sweep {
        /// arrival, rate, gamma_db, copies, layers or channels.
        #[arg(long)]
        var: String,
        /// Comma-separated grid values.
        #[arg(long, conflicts_with_all = ["from", "to", "step"])]
        grid: Option<String>,
        #[arg(long, requires_all = ["to", "step"])]
        from: Option<f64>,
        #[arg(long)]
        to: Option<f64>,
        #[arg(long)]
        step: Option<f64>,
        /// Comma-separated subset of analytic, capture, simulated, bound,
        /// baselines, outage, power.
        #[arg(long, default_value = "analytic")]
        outputs: String,
        /// Optimize the per-layer rates at every grid point.
        #[arg(long)]
        optimal_rates: bool,
        /// Use the lower-bound capture probability in the analysis.
        #[arg(long)]
        capture_bound: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Print the throughput-maximizing per-layer rates.
    OptimizeRates {
        #[arg(long)]
        capture_bound: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Print the per-layer outage analysis with repetition.
    Outage {
        #[command(flatten)]
        common: Common,
    },
    /// Estimate throughput (or outage) by Monte Carlo simulation.
    Simulate {
        /// Estimate outage instead of throughput.
        #[arg(long)]
        outage: bool,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args, Clone)]
struct Common {
    /// `key = value` configuration file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    channels: Option<usize>,
    #[arg(long)]
    layers: Option<usize>,
    /// Arrival rate per layer: one value or a comma-separated list.
    #[arg(long)]
    arrival: Option<PerLayer>,
    /// Rate per layer (bits per channel use): one value or a list.
    #[arg(long)]
    rate: Option<PerLayer>,
    #[arg(long)]
    gamma_db: Option<f64>,
    /// Copies per packet (repetition over distinct channels).
    #[arg(long)]
    copies: Option<usize>,
    #[arg(long)]
    noise_power: Option<f64>,
    #[arg(long)]
    gain_mean: Option<f64>,
    /// Explicit powers instead of the target-SINR rule.
    #[arg(long, value_delimiter = ',')]
    powers: Option<Vec<f64>>,
    #[arg(long, default_value_t = 100_000)]
    slots: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Worker threads for simulation (0 = all cores).
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Let cancelled channels re-open for upper layers in simulation.
    #[arg(long)]
    reopen_blocked: bool,
    #[arg(long, default_value_t = 16.0)]
    rate_max: f64,
    #[arg(long, default_value_t = 2048)]
    grid_points: usize,
    #[arg(long, default_value_t = 1e-10)]
    refine_tol: f64,
    /// Output path; `-` or omitted writes to standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn spec(&self) -> Result<ConfigSpec, ExperimentError> {
        let file = match &self.config {
            Some(path) => ConfigSpec::parse(&std::fs::read_to_string(path)?)?,
            None => ConfigSpec::default(),
        };
        Ok(file.merged(ConfigSpec {
            layers: self.layers,
            channels: self.channels,
            arrival_rate: self.arrival.clone(),
            rate: self.rate.clone(),
            gamma_db: self.gamma_db,
            noise_power: self.noise_power,
            gain_mean: self.gain_mean,
            repetition: self.copies,
            powers: self.powers.clone(),
        }))
    }

    fn system(&self) -> Result<SystemConfig, ExperimentError> {
        Ok(self.spec()?.build()?)
    }

    fn sim(&self) -> SimSettings {
        let blocking = if self.reopen_blocked {
            BlockingRule::ReopenOnCancel
        } else {
            BlockingRule::Sticky
        };
        SimSettings::new(self.slots, self.seed)
            .with_workers(self.workers)
            .with_blocking(blocking)
    }

    fn search(&self) -> Result<SearchSettings, ExperimentError> {
        let s = SearchSettings {
            upper: self.rate_max,
            grid_points: self.grid_points,
            refine_tol: self.refine_tol,
        };
        s.validate()?;
        Ok(s)
    }

    fn writer(&self) -> Result<Box<dyn Write>, ExperimentError> {
        Ok(match &self.out {
            Some(p) if p.as_os_str() != "-" => Box::new(BufWriter::new(File::create(p)?)),
            _ => Box::new(BufWriter::new(io::stdout().lock())),
        })
    }

    /// Scalar sweep base; per-layer lists and explicit powers are rejected.
    fn base(&self, optimal_rates: bool) -> Result<ScenarioBase, ExperimentError> {
        let spec = self.spec()?;
        let scalar = |v: &Option<PerLayer>, name: &str| match v {
            None => Ok(None),
            Some(PerLayer::Uniform(x)) => Ok(Some(*x)),
            Some(PerLayer::List(_)) => Err(ExperimentError::InvalidScenario(format!(
                "sweep needs a single {name} shared by all layers"
            ))),
        };
        if spec.powers.is_some() {
            return Err(ExperimentError::InvalidScenario(
                "sweep derives powers from the target SINR; drop `powers`".into(),
            ));
        }
        let channels = spec.resolved_channels();
        let rate = scalar(&spec.rate, "rate")?;
        if optimal_rates && rate.is_some() {
            return Err(ExperimentError::InvalidScenario(
                "--optimal-rates conflicts with a fixed rate".into(),
            ));
        }
        Ok(ScenarioBase {
            layers: spec.resolved_layers()?,
            channels,
            arrival: scalar(&spec.arrival_rate, "arrival rate")?.unwrap_or(channels as f64),
            rate: if optimal_rates {
                RateChoice::Optimal
            } else {
                RateChoice::Fixed(rate.unwrap_or(layered_ra::config_file::DEFAULT_RATE))
            },
            gamma_db: spec.gamma_db.unwrap_or(layered_ra::config_file::DEFAULT_GAMMA_DB),
            repetition: spec.repetition.unwrap_or(1),
            gain_mean: spec.gain_mean.unwrap_or(1.0),
            noise_power: spec.noise_power.unwrap_or(1.0),
        })
    }
}

fn echo(config: &SystemConfig) -> String {
    let join = |v: Vec<f64>| v.iter().map(|x| format_sig9(*x)).collect::<Vec<_>>().join(" ");
    format!(
        "channels={} repetition={} gain_mean={} noise_power={} arrivals=[{}] powers=[{}] rates=[{}]",
        config.channels(),
        config.repetition(),
        config.gain_mean(),
        config.noise_power(),
        join(config.arrivals()),
        join(config.powers()),
        join(config.rates())
    )
}

fn write_table(
    out: &mut dyn Write,
    provenance: &[String],
    header: &str,
    rows: &[Vec<String>],
) -> io::Result<()> {
    for line in provenance {
        writeln!(out, "# {line}")?;
    }
    writeln!(out, "{header}")?;
    for row in rows {
        writeln!(out, "{}", row.join(","))?;
    }
    out.flush()
}

fn run(cli: Cli) -> Result<(), ExperimentError> {
    match cli.command {
        Command::Scenario { name, list, common } => {
            if list {
                let mut out = common.writer()?;
                for p in PRESETS {
                    writeln!(out, "{:<24}{}", p.name, p.description)?;
                }
                out.flush()?;
                return Ok(());
            }
            let name = name.ok_or_else(|| {
                ExperimentError::InvalidScenario("give a scenario name or --list".into())
            })?;
            let info = preset(&name)?;
            let series = info.scenarios(common.sim(), common.search()?);
            let data = run_series(info.name, &series, info.notes)?;
            data.write_csv(common.writer()?)?;
        }
        Command::Sweep {
            var,
            grid,
            from,
            to,
            step,
            outputs,
            optimal_rates,
            capture_bound,
            common,
        } => {
            let sweep = SweepVar::parse(&var)
                .ok_or_else(|| ExperimentError::InvalidScenario(format!("unknown sweep variable `{var}`")))?;
            let grid = match (grid, from, to, step) {
                (Some(g), ..) => layered_ra::config_file::parse_list(&g)
                    .map_err(ExperimentError::InvalidScenario)?,
                (None, Some(a), Some(b), Some(s)) if s > 0.0 && b >= a => {
                    let n = ((b - a) / s + 1e-9).floor() as usize;
                    (0..=n).map(|i| a + i as f64 * s).collect()
                }
                _ => {
                    return Err(ExperimentError::InvalidScenario(
                        "give --grid or --from/--to/--step with step > 0".into(),
                    ))
                }
            };
            let outputs = Outputs::parse_list(&outputs)
                .ok_or_else(|| ExperimentError::InvalidScenario(format!("unknown outputs `{outputs}`")))?;
            let scenario = Scenario {
                label: "sweep".into(),
                sweep,
                grid,
                base: common.base(optimal_rates)?,
                outputs,
                sim: common.sim(),
                search: common.search()?,
                capture_model: if capture_bound {
                    CaptureModel::LowerBound
                } else {
                    CaptureModel::Exact
                },
            };
            let mut data = Dataset {
                provenance: vec![version_string(), "sweep".into()],
                rows: Vec::new(),
            };
            data.extend(run_scenario(&scenario)?);
            data.write_csv(common.writer()?)?;
        }
        Command::OptimizeRates {
            capture_bound,
            common,
        } => {
            let config = common.system()?;
            let model = if capture_bound {
                CaptureModel::LowerBound
            } else {
                CaptureModel::Exact
            };
            let plan = optimize_rates(&config, &common.search()?, model)?;
            let rows: Vec<Vec<String>> = plan
                .optimal_rates
                .iter()
                .zip(&plan.layer_values)
                .enumerate()
                .map(|(l, (r, v))| vec![(l + 1).to_string(), format_sig9(*r), format_sig9(*v)])
                .collect();
            let provenance = vec![
                version_string(),
                echo(&config),
                format!("capture={model:?} throughput={}", format_sig9(plan.achieved_throughput)),
            ];
            write_table(&mut *common.writer()?, &provenance, "layer,optimal_rate,layer_value", &rows)?;
        }
        Command::Outage { common } => {
            let config = common.system()?;
            let report = outage(&config)?;
            let rows: Vec<Vec<String>> = (0..config.num_layers())
                .map(|l| {
                    vec![
                        (l + 1).to_string(),
                        format_sig9(report.beta[l]),
                        format_sig9(report.psi[l]),
                        format_sig9(report.outage[l]),
                    ]
                })
                .collect();
            let provenance = vec![
                version_string(),
                echo(&config),
                format!("omega={}", format_sig9(report.omega)),
            ];
            write_table(&mut *common.writer()?, &provenance, "layer,beta,psi,outage", &rows)?;
        }
        Command::Simulate { outage: as_outage, common } => {
            let config = common.system()?;
            let settings = common.sim();
            let row = |layer, quantity, value, e: &layered_ra::sim::EstimatorOutput| Row {
                scenario: "simulate".into(),
                x_name: "slots",
                x_value: settings.slots as f64,
                layer,
                quantity,
                value,
                sim: Some(SimStat {
                    stderr: e.std_error,
                    slots: e.slots,
                    seed: e.seed,
                }),
            };
            let mut rows = Vec::new();
            let analytic = throughput(&config, CaptureModel::Exact);
            if as_outage {
                for (l, e) in estimate_outage(&config, &settings)?.iter().enumerate() {
                    rows.push(row(LayerTag::Layer(l + 1), Quantity::SimulatedOutage, e.mean, e));
                }
            } else {
                let est = estimate_throughput(&config, &settings)?;
                for (l, e) in est.per_layer.iter().enumerate() {
                    rows.push(row(LayerTag::Layer(l + 1), Quantity::SimulatedThroughput, e.mean, e));
                }
                rows.push(row(LayerTag::Total, Quantity::SimulatedThroughput, est.total.mean, &est.total));
            }
            let data = Dataset {
                provenance: vec![
                    version_string(),
                    echo(&config),
                    format!(
                        "seed={} slots={} blocking={:?} analytic_throughput={}",
                        settings.seed,
                        settings.slots,
                        settings.blocking,
                        format_sig9(analytic.total_throughput)
                    ),
                ],
                rows,
            };
            data.write_csv(common.writer()?)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
