//! Monte Carlo estimators.
//!
//! Slot `i` draws from its own ChaCha stream `(seed, i)`, slots are grouped
//! into fixed batches by index, and every accumulator is an exact integer
//! count. Results therefore do not depend on how many worker threads run the
//! batches.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::decode::{sic_decode, BlockingRule, Outcome};
use super::slot::sample_slot;
use crate::error::{ModelError, Result};
use crate::model::{snr_gap, SystemConfig};

const BATCH: u64 = 2048;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorOutput {
    pub mean: f64,
    pub std_error: f64,
    pub slots: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimSettings {
    pub slots: u64,
    pub seed: u64,
    /// Worker threads; 0 uses the global rayon pool.
    pub workers: usize,
    pub blocking: BlockingRule,
}

impl SimSettings {
    pub fn new(slots: u64, seed: u64) -> Self {
        Self {
            slots,
            seed,
            workers: 0,
            blocking: BlockingRule::default(),
        }
    }

    pub fn with_workers(self, workers: usize) -> Self {
        Self { workers, ..self }
    }

    pub fn with_blocking(self, blocking: BlockingRule) -> Self {
        Self { blocking, ..self }
    }
}

/// RNG for a single slot.
pub fn slot_rng(seed: u64, slot: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(slot);
    rng
}

trait Accumulator: Send {
    fn merge(&mut self, other: Self);
}

/// Runs `per_slot` over every slot and merges batch accumulators in order.
fn run_batches<A, F>(settings: &SimSettings, init: impl Fn() -> A + Sync, per_slot: F) -> Result<A>
where
    A: Accumulator,
    F: Fn(&mut A, u64) + Sync,
{
    if settings.slots == 0 {
        return Err(ModelError::InvalidSimulation(
            "number of slots must be at least 1".into(),
        ));
    }
    let batches = settings.slots.div_ceil(BATCH);
    let work = || {
        (0..batches)
            .into_par_iter()
            .map(|b| {
                let mut acc = init();
                let end = ((b + 1) * BATCH).min(settings.slots);
                for slot in b * BATCH..end {
                    per_slot(&mut acc, slot);
                }
                acc
            })
            .collect::<Vec<A>>()
    };
    let parts = if settings.workers == 0 {
        work()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(settings.workers)
            .build()
            .map_err(|e| ModelError::InvalidSimulation(e.to_string()))?
            .install(work)
    };
    let mut parts = parts.into_iter();
    let mut total = parts.next().expect("at least one batch");
    for p in parts {
        total.merge(p);
    }
    Ok(total)
}

/// Mean and standard error of an i.i.d. sample from its first two moments.
fn mean_and_error(sum: f64, sum_sq: f64, n: u64) -> (f64, f64) {
    let n_f = n as f64;
    let mean = sum / n_f;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = ((sum_sq - sum * mean) / (n_f - 1.0)).max(0.0);
    (mean, (var / n_f).sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThroughputEstimate {
    pub per_layer: Vec<EstimatorOutput>,
    pub total: EstimatorOutput,
}

struct DecodedMoments {
    /// Σ_s d_l(s)
    sum: Vec<u64>,
    /// Σ_s d_l(s) d_k(s), row-major L × L.
    cross: Vec<u64>,
}

impl Accumulator for DecodedMoments {
    fn merge(&mut self, other: Self) {
        for (a, b) in self.sum.iter_mut().zip(other.sum) {
            *a += b;
        }
        for (a, b) in self.cross.iter_mut().zip(other.cross) {
            *a += b;
        }
    }
}

/// Throughput in bits per channel use per slot: `Σ_l R_l × (decoded in layer l)`.
pub fn estimate_throughput(
    config: &SystemConfig,
    settings: &SimSettings,
) -> Result<ThroughputEstimate> {
    let layers = config.num_layers();
    let acc = run_batches(
        settings,
        || DecodedMoments {
            sum: vec![0; layers],
            cross: vec![0; layers * layers],
        },
        |acc, slot| {
            let mut rng = slot_rng(settings.seed, slot);
            let realization = sample_slot(config, &mut rng);
            let report = sic_decode(&realization, config, settings.blocking);
            for (l, &d) in report.decoded.iter().enumerate() {
                acc.sum[l] += d as u64;
                for (k, &e) in report.decoded.iter().enumerate() {
                    acc.cross[l * layers + k] += (d * e) as u64;
                }
            }
        },
    )?;

    let rates = config.rates();
    let out = |(mean, std_error): (f64, f64)| EstimatorOutput {
        mean,
        std_error,
        slots: settings.slots,
        seed: settings.seed,
    };
    let per_layer = (0..layers)
        .map(|l| {
            let r = rates[l];
            out(mean_and_error(
                r * acc.sum[l] as f64,
                r * r * acc.cross[l * layers + l] as f64,
                settings.slots,
            ))
        })
        .collect();
    let sum: f64 = (0..layers).map(|l| rates[l] * acc.sum[l] as f64).sum();
    let mut sum_sq = 0.0;
    for l in 0..layers {
        for k in 0..layers {
            sum_sq += rates[l] * rates[k] * acc.cross[l * layers + k] as f64;
        }
    }
    Ok(ThroughputEstimate {
        per_layer,
        total: out(mean_and_error(sum, sum_sq, settings.slots)),
    })
}

#[derive(Default, Clone)]
struct RatioMoments {
    x: u64,
    n: u64,
    xx: u64,
    nn: u64,
    xn: u64,
}

impl RatioMoments {
    fn add(&mut self, x: u64, n: u64) {
        self.x += x;
        self.n += n;
        self.xx += x * x;
        self.nn += n * n;
        self.xn += x * n;
    }

    fn merge_one(&mut self, o: &Self) {
        self.x += o.x;
        self.n += o.n;
        self.xx += o.xx;
        self.nn += o.nn;
        self.xn += o.xn;
    }

    /// Ratio estimate Σx/Σn with a delta-method standard error over slots.
    fn estimate(&self, slots: u64) -> (f64, f64) {
        if self.n == 0 {
            return (f64::NAN, f64::NAN);
        }
        let p = self.x as f64 / self.n as f64;
        if slots < 2 {
            return (p, 0.0);
        }
        // Σ_s (x_s − p n_s)²
        let ss = (self.xx as f64 - 2.0 * p * self.xn as f64 + p * p * self.nn as f64).max(0.0);
        let s = slots as f64;
        let var = ss * s / (s - 1.0) / (self.n as f64).powi(2);
        (p, var.sqrt())
    }
}

struct OutageMoments(Vec<RatioMoments>);

impl Accumulator for OutageMoments {
    fn merge(&mut self, other: Self) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            a.merge_one(b);
        }
    }
}

/// Fraction of layer-l users that are not decoded, pooled over slots.
/// A layer that never had a user reports NaN.
pub fn estimate_outage(
    config: &SystemConfig,
    settings: &SimSettings,
) -> Result<Vec<EstimatorOutput>> {
    let layers = config.num_layers();
    for (l, p) in config.layers().iter().enumerate() {
        if p.arrival_rate <= 0.0 {
            return Err(ModelError::ZeroArrival { layer: l + 1 });
        }
    }
    let acc = run_batches(
        settings,
        || OutageMoments(vec![RatioMoments::default(); layers]),
        |acc, slot| {
            let mut rng = slot_rng(settings.seed, slot);
            let realization = sample_slot(config, &mut rng);
            let report = sic_decode(&realization, config, settings.blocking);
            for (l, outcomes) in report.outcomes.iter().enumerate() {
                let users = outcomes.len() as u64;
                acc.0[l].add(users - report.decoded[l] as u64, users);
            }
        },
    )?;
    Ok(acc
        .0
        .iter()
        .map(|m| {
            let (mean, std_error) = m.estimate(settings.slots);
            EstimatorOutput {
                mean,
                std_error,
                slots: settings.slots,
                seed: settings.seed,
            }
        })
        .collect())
}

/// Decoding statistics for channels that carry exactly one layer-1 and one
/// layer-2 copy in a two-layer, single-copy system.
#[derive(Debug, Clone, PartialEq)]
pub struct JointCaptureEstimate {
    /// Both users decoded.
    pub joint: EstimatorOutput,
    /// Layer-1 user decoded.
    pub layer1: EstimatorOutput,
    /// Layer-2 SNR clears the threshold once layer 1 is removed.
    pub layer2_clean: EstimatorOutput,
    pub trials: u64,
}

#[derive(Default)]
struct JointCounts {
    trials: u64,
    joint: u64,
    first: u64,
    second: u64,
}

impl Accumulator for JointCounts {
    fn merge(&mut self, o: Self) {
        self.trials += o.trials;
        self.joint += o.joint;
        self.first += o.first;
        self.second += o.second;
    }
}

pub fn estimate_joint_capture(
    config: &SystemConfig,
    settings: &SimSettings,
) -> Result<JointCaptureEstimate> {
    if config.num_layers() != 2 || config.repetition() != 1 {
        return Err(ModelError::InvalidSimulation(
            "joint capture needs exactly 2 layers and one copy per user".into(),
        ));
    }
    let n = config.channels();
    let second = config.layer(2);
    let second_threshold = snr_gap(second.rate) * config.noise_power();
    let acc = run_batches(settings, JointCounts::default, |acc, slot| {
        let mut rng = slot_rng(settings.seed, slot);
        let realization = sample_slot(config, &mut rng);
        let report = sic_decode(&realization, config, settings.blocking);
        let mut occupant: [Vec<Option<usize>>; 2] = [vec![None; n], vec![None; n]];
        let mut count = [vec![0u32; n], vec![0u32; n]];
        for l in 0..2 {
            for (k, user) in realization.layers[l].iter().enumerate() {
                let q = user.channels[0];
                count[l][q] += 1;
                occupant[l][q] = Some(k);
            }
        }
        for q in 0..n {
            if count[0][q] != 1 || count[1][q] != 1 {
                continue;
            }
            let (a, b) = (occupant[0][q].unwrap(), occupant[1][q].unwrap());
            acc.trials += 1;
            let first_ok = report.outcomes[0][a] == Outcome::Decoded;
            let second_ok = report.outcomes[1][b] == Outcome::Decoded;
            let clean = second.power * realization.layers[1][b].gains[0] >= second_threshold;
            acc.first += first_ok as u64;
            acc.joint += (first_ok && second_ok) as u64;
            acc.second += clean as u64;
        }
    })?;
    let proportion = |k: u64| {
        let t = acc.trials.max(1) as f64;
        let p = k as f64 / t;
        EstimatorOutput {
            mean: if acc.trials == 0 { f64::NAN } else { p },
            std_error: (p * (1.0 - p) / t).sqrt(),
            slots: settings.slots,
            seed: settings.seed,
        }
    };
    Ok(JointCaptureEstimate {
        joint: proportion(acc.joint),
        layer1: proportion(acc.first),
        layer2_clean: proportion(acc.second),
        trials: acc.trials,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{LayerParams, TargetSinr};

    #[test]
    fn empty_system_has_zero_throughput() {
        let cfg =
            SystemConfig::new(10, vec![LayerParams::new(0.0, 1.0, 1.0)], 1.0, 1.0, 1).unwrap();
        let est = estimate_throughput(&cfg, &SimSettings::new(500, 3)).unwrap();
        assert_eq!(est.total.mean, 0.0);
        assert_eq!(est.total.std_error, 0.0);
    }

    #[test]
    fn zero_slots_rejected() {
        let cfg =
            SystemConfig::new(10, vec![LayerParams::new(1.0, 1.0, 1.0)], 1.0, 1.0, 1).unwrap();
        assert!(estimate_throughput(&cfg, &SimSettings::new(0, 3)).is_err());
    }

    #[test]
    fn same_seed_same_answer() {
        let cfg = SystemConfig::with_target_sinr(
            10,
            &[5.0, 5.0],
            &[1.0, 0.5],
            TargetSinr::from_db(3.0).unwrap(),
            1.0,
            1.0,
            1,
        )
        .unwrap();
        let s = SimSettings::new(5000, 99);
        assert_eq!(
            estimate_throughput(&cfg, &s).unwrap(),
            estimate_throughput(&cfg, &s.with_workers(3)).unwrap()
        );
        let other = estimate_throughput(&cfg, &SimSettings::new(5000, 100)).unwrap();
        assert_ne!(other, estimate_throughput(&cfg, &s).unwrap());
    }

    #[test]
    fn outage_extremes() {
        let hopeless =
            SystemConfig::new(10, vec![LayerParams::new(2.0, 1.0, 60.0)], 1.0, 1.0, 2).unwrap();
        let est = estimate_outage(&hopeless, &SimSettings::new(2000, 1)).unwrap();
        assert_eq!(est[0].mean, 1.0);

        // λ tiny: almost every non-empty slot has one user, and R = 0 always decodes.
        let easy =
            SystemConfig::new(10, vec![LayerParams::new(1e-3, 1.0, 0.0)], 1.0, 1.0, 1).unwrap();
        let est = estimate_outage(&easy, &SimSettings::new(20_000, 1)).unwrap();
        assert!(est[0].mean < 0.01);
    }

    #[test]
    fn joint_capture_degenerate_rates() {
        let base = SystemConfig::with_target_sinr(
            10,
            &[5.0, 5.0],
            &[0.0, 0.0],
            TargetSinr::from_db(3.0).unwrap(),
            1.0,
            1.0,
            1,
        )
        .unwrap();
        let s = SimSettings::new(2000, 5);
        let j = estimate_joint_capture(&base, &s).unwrap();
        assert!(j.trials > 0);
        assert_eq!(j.joint.mean, 1.0);

        let cfg = base.with_rates(&[1.0, 0.0]).unwrap();
        let j = estimate_joint_capture(&cfg, &s).unwrap();
        assert_eq!(j.joint.mean, j.layer1.mean);
        assert!(j.joint.mean < 1.0);

        let three = SystemConfig::with_target_sinr(
            10,
            &[1.0; 3],
            &[1.0; 3],
            TargetSinr::new(2.0).unwrap(),
            1.0,
            1.0,
            1,
        )
        .unwrap();
        assert!(estimate_joint_capture(&three, &s).is_err());
    }
}
