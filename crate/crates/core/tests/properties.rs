use proptest::prelude::*;
use rand::Rng;

use layered_ra::model::{allocate_powers, collision_prob, interference_variance};
use layered_ra::optimize::{optimize_rates, SearchSettings};
use layered_ra::outage::{beta_crrd, outage, psi_closed_form, psi_series};
use layered_ra::sim::{sample_slot, sic_decode, slot_rng, BlockingRule, Outcome, SlotRealization};
use layered_ra::throughput::{
    capture_prob_exact, capture_prob_lower_bound, rho, throughput, CaptureModel,
};
use layered_ra::{SystemConfig, TargetSinr};

fn config_strategy(max_layers: usize, max_copies: usize) -> impl Strategy<Value = SystemConfig> {
    (1..=max_layers, 1usize..=60, 0.0f64..15.0, 0.0f64..20.0)
        .prop_flat_map(move |(layers, channels, gamma_db, _)| {
            let copies = 1..=max_copies.min(channels);
            (
                Just(layers),
                Just(channels),
                Just(gamma_db),
                proptest::collection::vec(0.05f64..20.0, layers),
                proptest::collection::vec(0.0f64..4.0, layers),
                copies,
            )
        })
        .prop_map(|(_, channels, gamma_db, arrivals, rates, copies)| {
            SystemConfig::with_target_sinr(
                channels,
                &arrivals,
                &rates,
                TargetSinr::from_db(gamma_db).unwrap(),
                1.0,
                1.0,
                copies,
            )
            .unwrap()
        })
}

proptest! {
    #[test]
    fn collision_prob_monotone(
        m in 1usize..200,
        (n, b) in (1usize..80).prop_flat_map(|n| (Just(n), 1..=n)),
    ) {
        let p = collision_prob(m, n, b).unwrap();
        prop_assert!((0.0..=1.0).contains(&p));
        prop_assert!(collision_prob(m + 1, n, b).unwrap() >= p);
        if b < n {
            prop_assert!(collision_prob(m, n, b + 1).unwrap() >= p);
        }
        prop_assert_eq!(p == 0.0, m == 1);
    }

    #[test]
    fn powers_descend_and_hit_target(
        arrivals in proptest::collection::vec(0.0f64..20.0, 1..8),
        gamma_db in -5.0f64..20.0,
        n in 1usize..100,
    ) {
        let gamma = TargetSinr::from_db(gamma_db).unwrap();
        let p = allocate_powers(gamma, &arrivals, n, 1.0, 1.0);
        let cfg = SystemConfig::with_target_sinr(n, &arrivals, &vec![1.0; arrivals.len()], gamma, 1.0, 1.0, 1).unwrap();
        for l in 0..arrivals.len() {
            if l + 1 < arrivals.len() {
                prop_assert!(p[l] >= p[l + 1]);
                // The step P_l − P_{l+1} is proportional to λ_{l+1}.
                if arrivals[l + 1] > 0.0 {
                    prop_assert!(p[l] > p[l + 1]);
                }
            }
            let sinr = p[l] / interference_variance(&cfg, l + 1, 1);
            prop_assert!((sinr / gamma.linear() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn jensen_bound_holds(cfg in config_strategy(6, 1)) {
        let top = cfg.num_layers();
        for l in 1..=top {
            let exact = capture_prob_exact(&cfg, l);
            let bound = capture_prob_lower_bound(&cfg, l);
            prop_assert!(bound <= exact + 1e-15);
        }
        prop_assert!((capture_prob_exact(&cfg, top) - capture_prob_lower_bound(&cfg, top)).abs() < 1e-12);
    }

    #[test]
    fn psi_bracketed_by_fading_failure(cfg in config_strategy(4, 8)) {
        for l in 1..=cfg.num_layers() {
            let beta = beta_crrd(&cfg, l);
            let psi = psi_closed_form(&cfg, l).unwrap();
            let b = cfg.repetition() as i32;
            prop_assert!(psi >= beta.powi(b) - 1e-12, "psi {psi} < beta^B {}", beta.powi(b));
            prop_assert!(psi <= 1.0 + 1e-12);
            let series = psi_series(&cfg, l, 1e-12).unwrap();
            prop_assert!((psi - series).abs() < 1e-10);
        }
        let r = outage(&cfg).unwrap();
        prop_assert_eq!(r.outage[0], r.psi[0]);
        prop_assert!(r.outage.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn optimum_dominates_random_rates(
        cfg in config_strategy(3, 1),
        samples in proptest::collection::vec(proptest::collection::vec(0.0f64..8.0, 3), 20),
    ) {
        let settings = SearchSettings { grid_points: 512, ..SearchSettings::default() };
        let plan = optimize_rates(&cfg, &settings, CaptureModel::Exact).unwrap();
        let at_opt = throughput(&cfg.with_rates(&plan.optimal_rates).unwrap(), CaptureModel::Exact).total_throughput;
        prop_assert!((at_opt - plan.achieved_throughput).abs() < 1e-9);
        for s in samples {
            let rates = &s[..cfg.num_layers()];
            let t = throughput(&cfg.with_rates(rates).unwrap(), CaptureModel::Exact).total_throughput;
            prop_assert!(plan.achieved_throughput >= t - 1e-9);
        }
    }

    #[test]
    fn recursion_values_are_consistent(cfg in config_strategy(4, 1)) {
        let settings = SearchSettings { grid_points: 512, ..SearchSettings::default() };
        let plan = optimize_rates(&cfg, &settings, CaptureModel::Exact).unwrap();
        let again = optimize_rates(&cfg.with_rates(&plan.optimal_rates).unwrap(), &settings, CaptureModel::Exact).unwrap();
        prop_assert_eq!(&again, &plan);
        let report = throughput(&cfg.with_rates(&plan.optimal_rates).unwrap(), CaptureModel::Exact);
        let l_max = cfg.num_layers();
        let mut next = 0.0;
        for l in (0..l_max).rev() {
            let t = plan.optimal_rates[l] * report.eta[l] + report.rho[l] * next;
            prop_assert!((t - plan.layer_values[l]).abs() < 1e-12);
            next = plan.layer_values[l];
        }
        // T_l(R*_l) ≥ ρ_l(r) T_{l+1}(R*_{l+1}) at any rate r.
        for l in 0..l_max.saturating_sub(1) {
            let arrival = cfg.layers()[l].arrival_rate;
            for r in [0.0, 0.5, 1.0, 3.0] {
                let mut rates = plan.optimal_rates.clone();
                rates[l] = r;
                let phi = capture_prob_exact(&cfg.with_rates(&rates).unwrap(), l + 1);
                let bound = rho(arrival, cfg.channels(), phi) * plan.layer_values[l + 1];
                prop_assert!(plan.layer_values[l] >= bound - 1e-12);
            }
        }
    }

    #[test]
    fn decode_conserves_users(cfg in config_strategy(4, 4), seed in any::<u64>(), reopen in any::<bool>()) {
        let rule = if reopen { BlockingRule::ReopenOnCancel } else { BlockingRule::Sticky };
        let slot = sample_slot(&cfg, &mut slot_rng(seed, 0));
        let report = sic_decode(&slot, &cfg, rule);
        let mut total = 0;
        for l in 1..=cfg.num_layers() {
            let counted: usize = [Outcome::Decoded, Outcome::Collided, Outcome::SinrFailure, Outcome::Blocked]
                .iter()
                .map(|&o| report.count(l, o))
                .sum();
            prop_assert_eq!(counted, slot.layers[l - 1].len());
            prop_assert_eq!(report.decoded[l - 1], report.count(l, Outcome::Decoded));
            total += counted;
        }
        prop_assert_eq!(total, slot.user_count());
        for users in &slot.layers {
            for u in users {
                prop_assert_eq!(u.channels.len(), cfg.repetition());
                let mut c = u.channels.clone();
                c.sort_unstable();
                c.dedup();
                prop_assert_eq!(c.len(), cfg.repetition());
                prop_assert!(u.gains.iter().all(|&g| g > 0.0));
            }
        }
    }

    #[test]
    fn decoded_users_had_an_open_singleton(cfg in config_strategy(4, 3), seed in any::<u64>()) {
        let slot = sample_slot(&cfg, &mut slot_rng(seed, 7));
        let report = sic_decode(&slot, &cfg, BlockingRule::Sticky);
        let n = cfg.channels();
        for (l, users) in slot.layers.iter().enumerate() {
            let mut count = vec![0; n];
            for u in users {
                for &q in &u.channels {
                    count[q] += 1;
                }
            }
            for (u, o) in users.iter().zip(&report.outcomes[l]) {
                if *o == Outcome::Decoded {
                    prop_assert!(u.channels.iter().any(|&q| count[q] == 1 && report.stop_layer[q].is_none_or(|s| s > l + 1)));
                }
            }
        }
    }

    #[test]
    fn injected_lower_user_never_deepens_sic(
        cfg in config_strategy(4, 1),
        seed in any::<u64>(),
        layer_pick in any::<u32>(),
        gain in 0.01f64..10.0,
    ) {
        let base = sample_slot(&cfg, &mut slot_rng(seed, 1));
        let n = cfg.channels();
        let mut rng = slot_rng(seed, 2);
        let layer = 1 + layer_pick as usize % cfg.num_layers();
        let channel = rng.random_range(0..n);
        let mut extended: SlotRealization = base.clone();
        extended.push_user(layer, vec![channel], vec![gain]);
        let before = sic_decode(&base, &cfg, BlockingRule::Sticky);
        let after = sic_decode(&extended, &cfg, BlockingRule::Sticky);
        // Only the injected channel changes, and SIC there can only stop earlier.
        for q in 0..n {
            if q != channel {
                prop_assert_eq!(before.stop_layer[q], after.stop_layer[q]);
            }
        }
        // The new user also interferes below its own layer, so even a channel
        // that stopped earlier may stop earlier still.
        prop_assert!(after.stop_depth(channel) <= before.stop_depth(channel));
    }

    #[test]
    fn empty_top_layer_changes_nothing(cfg in config_strategy(4, 1)) {
        let mut arrivals = cfg.arrivals();
        arrivals.push(0.0);
        let mut powers = cfg.powers();
        powers.push(*powers.last().unwrap() * 0.5);
        let mut rates = cfg.rates();
        rates.push(1.0);
        let params = arrivals
            .iter()
            .zip(&powers)
            .zip(&rates)
            .map(|((&a, &p), &r)| layered_ra::LayerParams::new(a, p, r))
            .collect();
        let grown = SystemConfig::new(cfg.channels(), params, 1.0, 1.0, 1).unwrap();
        let a = throughput(&cfg, CaptureModel::Exact).total_throughput;
        let b = throughput(&grown, CaptureModel::Exact).total_throughput;
        prop_assert!((a - b).abs() < 1e-12);
    }
}
