//! Line-oriented `key = value` configuration.
//!
//! ```text
//! # three layers over ten channels
//! layers = 3
//! channels = 10
//! arrival_rate = 10          # one value for every layer ...
//! rate = 1.2, 0.8, 0.5       # ... or one per layer
//! gamma_db = 3
//! noise_power = 1
//! gain_mean = 1
//! repetition = 1
//! ```
//!
//! Powers come from the target-SINR rule unless `powers` lists them.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::error::ModelError;
use crate::model::{LayerParams, SystemConfig, TargetSinr};

#[derive(Debug, Error)]
pub enum ConfigFileError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: key `{key}` given twice")]
    Duplicate { line: usize, key: String },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// A value that is either shared by all layers or given per layer.
#[derive(Debug, Clone, PartialEq)]
pub enum PerLayer {
    Uniform(f64),
    List(Vec<f64>),
}

impl PerLayer {
    pub fn resolve(&self, layers: usize) -> Vec<f64> {
        match self {
            PerLayer::Uniform(v) => vec![*v; layers],
            PerLayer::List(v) => v.clone(),
        }
    }

    fn explicit_len(&self) -> Option<usize> {
        match self {
            PerLayer::Uniform(_) => None,
            PerLayer::List(v) => Some(v.len()),
        }
    }
}

impl FromStr for PerLayer {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let values = parse_list(s)?;
        if s.contains(',') {
            Ok(PerLayer::List(values))
        } else {
            Ok(PerLayer::Uniform(values[0]))
        }
    }
}

impl fmt::Display for PerLayer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PerLayer::Uniform(v) => write!(f, "{v}"),
            PerLayer::List(v) => {
                let parts: Vec<String> = v.iter().map(f64::to_string).collect();
                write!(f, "{}", parts.join(","))
            }
        }
    }
}

pub fn parse_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|part| {
            let part = part.trim();
            part.parse::<f64>()
                .map_err(|_| format!("`{part}` is not a number"))
        })
        .collect()
}

/// Partially specified configuration. Unset fields fall back to defaults
/// when [`ConfigSpec::build`] is called.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigSpec {
    pub layers: Option<usize>,
    pub channels: Option<usize>,
    pub arrival_rate: Option<PerLayer>,
    pub rate: Option<PerLayer>,
    pub gamma_db: Option<f64>,
    pub noise_power: Option<f64>,
    pub gain_mean: Option<f64>,
    pub repetition: Option<usize>,
    pub powers: Option<Vec<f64>>,
}

pub const DEFAULT_LAYERS: usize = 3;
pub const DEFAULT_CHANNELS: usize = 10;
pub const DEFAULT_GAMMA_DB: f64 = 3.0;
pub const DEFAULT_RATE: f64 = 1.0;

impl ConfigSpec {
    pub fn parse(text: &str) -> Result<Self, ConfigFileError> {
        let mut spec = ConfigSpec::default();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigFileError::Syntax {
                line: line_no,
                message: format!("expected `key = value`, got `{line}`"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            let syntax = |message: String| ConfigFileError::Syntax {
                line: line_no,
                message,
            };
            let dup = || ConfigFileError::Duplicate {
                line: line_no,
                key: key.to_string(),
            };
            macro_rules! set {
                ($field:ident, $parse:expr) => {{
                    if spec.$field.is_some() {
                        return Err(dup());
                    }
                    spec.$field = Some($parse.map_err(|e: String| syntax(format!("{key}: {e}")))?);
                }};
            }
            match key {
                "layers" => set!(layers, parse_count(value)),
                "channels" => set!(channels, parse_count(value)),
                "repetition" => set!(repetition, parse_count(value)),
                "arrival_rate" => set!(arrival_rate, value.parse::<PerLayer>()),
                "rate" => set!(rate, value.parse::<PerLayer>()),
                "gamma_db" => set!(gamma_db, parse_scalar(value)),
                "noise_power" => set!(noise_power, parse_scalar(value)),
                "gain_mean" => set!(gain_mean, parse_scalar(value)),
                "powers" => set!(powers, parse_list(value)),
                _ => {
                    return Err(ConfigFileError::UnknownKey {
                        line: line_no,
                        key: key.to_string(),
                    })
                }
            }
        }
        Ok(spec)
    }

    /// Fields set in `overrides` replace those in `self`.
    pub fn merged(self, overrides: ConfigSpec) -> ConfigSpec {
        ConfigSpec {
            layers: overrides.layers.or(self.layers),
            channels: overrides.channels.or(self.channels),
            arrival_rate: overrides.arrival_rate.or(self.arrival_rate),
            rate: overrides.rate.or(self.rate),
            gamma_db: overrides.gamma_db.or(self.gamma_db),
            noise_power: overrides.noise_power.or(self.noise_power),
            gain_mean: overrides.gain_mean.or(self.gain_mean),
            repetition: overrides.repetition.or(self.repetition),
            powers: overrides.powers.or(self.powers),
        }
    }

    /// Number of layers: explicit, else implied by a per-layer list, else the default.
    pub fn resolved_layers(&self) -> Result<usize, ConfigFileError> {
        let implied = [
            self.arrival_rate.as_ref().and_then(PerLayer::explicit_len),
            self.rate.as_ref().and_then(PerLayer::explicit_len),
            self.powers.as_ref().map(Vec::len),
        ];
        let layers = self
            .layers
            .or_else(|| implied.iter().flatten().next().copied())
            .unwrap_or(DEFAULT_LAYERS);
        for (name, len) in ["arrival_rate", "rate", "powers"].into_iter().zip(implied) {
            if let Some(len) = len {
                if len != layers {
                    return Err(ModelError::LengthMismatch {
                        name,
                        expected: layers,
                        got: len,
                    }
                    .into());
                }
            }
        }
        Ok(layers)
    }

    pub fn resolved_channels(&self) -> usize {
        self.channels.unwrap_or(DEFAULT_CHANNELS)
    }

    pub fn target_sinr(&self) -> Result<TargetSinr, ModelError> {
        TargetSinr::from_db(self.gamma_db.unwrap_or(DEFAULT_GAMMA_DB))
    }

    /// Builds a validated configuration. Arrival rates default to λ = N.
    pub fn build(&self) -> Result<SystemConfig, ConfigFileError> {
        let layers = self.resolved_layers()?;
        let channels = self.resolved_channels();
        let arrivals = self
            .arrival_rate
            .clone()
            .unwrap_or(PerLayer::Uniform(channels as f64))
            .resolve(layers);
        let rates = self
            .rate
            .clone()
            .unwrap_or(PerLayer::Uniform(DEFAULT_RATE))
            .resolve(layers);
        let gain_mean = self.gain_mean.unwrap_or(1.0);
        let noise_power = self.noise_power.unwrap_or(1.0);
        let repetition = self.repetition.unwrap_or(1);
        let config = match &self.powers {
            Some(powers) => SystemConfig::new(
                channels,
                arrivals
                    .iter()
                    .zip(&rates)
                    .zip(powers)
                    .map(|((&a, &r), &p)| LayerParams::new(a, p, r))
                    .collect(),
                gain_mean,
                noise_power,
                repetition,
            )?,
            None => SystemConfig::with_target_sinr(
                channels,
                &arrivals,
                &rates,
                self.target_sinr()?,
                gain_mean,
                noise_power,
                repetition,
            )?,
        };
        Ok(config)
    }
}

fn parse_count(s: &str) -> Result<usize, String> {
    s.parse::<usize>()
        .map_err(|_| format!("`{s}` is not a non-negative integer"))
}

fn parse_scalar(s: &str) -> Result<f64, String> {
    s.parse::<f64>().map_err(|_| format!("`{s}` is not a number"))
}
