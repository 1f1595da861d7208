use layered_ra::experiment::{
    preset, run_power_report, run_scenario, LayerTag, Outputs, Quantity, RateChoice, Scenario,
    ScenarioBase, SweepVar, PRESETS,
};
use layered_ra::optimize::SearchSettings;
use layered_ra::sim::SimSettings;
use layered_ra::throughput::CaptureModel;

fn power_scenario(layers: usize, gamma_db: f64, grid: Vec<f64>) -> Scenario {
    Scenario {
        label: "p".into(),
        sweep: SweepVar::Arrival,
        grid,
        base: ScenarioBase {
            layers,
            gamma_db,
            rate: RateChoice::Fixed(1.0),
            ..ScenarioBase::default()
        },
        outputs: Outputs::default(),
        sim: SimSettings::new(1, 1),
        search: SearchSettings::default(),
        capture_model: CaptureModel::Exact,
    }
}

#[test]
fn power_report_examples() {
    let gamma_db = 10.0 * 2f64.log10();
    let single = run_power_report(&power_scenario(1, gamma_db, vec![0.0])).unwrap();
    assert!((single.rows[0].value - 2.0).abs() < 1e-12);

    let two = run_power_report(&power_scenario(2, gamma_db, vec![10.0])).unwrap();
    assert_eq!(two.rows.len(), 1);
    assert_eq!(two.rows[0].quantity, Quantity::PowerMean);
    assert!((two.rows[0].value - 4.0).abs() < 1e-12);

    let grid: Vec<f64> = (0..=14).map(f64::from).collect();
    for layers in [3, 6] {
        let d = run_power_report(&power_scenario(layers, 3.0, grid.clone())).unwrap();
        assert!(d.rows.windows(2).all(|w| w[1].value >= w[0].value));
    }
}

#[test]
fn power_grows_with_layers() {
    let grid = vec![2.0, 8.0];
    let three = run_power_report(&power_scenario(3, 3.0, grid.clone())).unwrap();
    let six = run_power_report(&power_scenario(6, 3.0, grid)).unwrap();
    for (a, b) in three.rows.iter().zip(&six.rows) {
        assert!(b.value > a.value);
    }
}

#[test]
fn one_row_per_layer_plus_total() {
    let mut s = power_scenario(3, 3.0, vec![4.0, 9.0]);
    s.outputs = Outputs {
        analytic: true,
        simulated: true,
        ..Outputs::default()
    };
    s.sim = SimSettings::new(2000, 5);
    let d = run_scenario(&s).unwrap();
    // 2 grid points × (analytic + simulated) × (3 layers + total).
    assert_eq!(d.rows.len(), 16);
    assert_eq!(d.select("p", Quantity::SimulatedThroughput, LayerTag::Total).len(), 2);
    let csv = d.to_csv_string();
    assert!(csv.contains("p,arrival,4,total,analytic_throughput,"));
    assert!(csv.lines().any(|l| l.starts_with("p,arrival,9,2,simulated_throughput,") && l.ends_with(",2000,5")));
    assert_eq!(csv, run_scenario(&s).unwrap().to_csv_string());
}

#[test]
fn invalid_scenarios_are_rejected() {
    let mut s = power_scenario(2, 3.0, vec![]);
    assert!(run_scenario(&s).is_err());
    s.grid = vec![3.0, 1.0];
    assert!(run_scenario(&s).is_err());
    s.grid = vec![1.0];
    s.label = "a,b".into();
    assert!(run_scenario(&s).is_err());
    let mut s = power_scenario(2, 3.0, vec![1.5]);
    s.sweep = SweepVar::Copies;
    assert!(run_scenario(&s).is_err());
    let mut s = power_scenario(2, 3.0, vec![1.0]);
    s.outputs.simulated = true;
    s.sim = SimSettings::new(0, 1);
    assert!(run_scenario(&s).is_err());
}

#[test]
fn throughput_vs_arrival_layer_one_tracks_simulation() {
    let info = preset("throughput-vs-arrival").unwrap();
    let series = info.scenarios(SimSettings::new(20_000, 2), SearchSettings::default());
    let mut l3 = series[0].clone();
    l3.grid = vec![6.0];
    let d = run_scenario(&l3).unwrap();
    let a = d.select("L3", Quantity::AnalyticThroughput, LayerTag::Layer(1))[0].value;
    let sim = d.select("L3", Quantity::SimulatedThroughput, LayerTag::Layer(1))[0];
    let se = sim.sim.unwrap().stderr;
    assert!((a - sim.value).abs() < 4.0 * se, "{a} vs {} ± {se}", sim.value);
    assert_eq!(d.select("L3", Quantity::CaptureExact, LayerTag::Layer(3)).len(), 1);
}

#[test]
fn presets_have_unique_names() {
    let mut names: Vec<_> = PRESETS.iter().map(|p| p.name).collect();
    names.sort_unstable();
    names.dedup();
    assert_eq!(names.len(), PRESETS.len());
}
