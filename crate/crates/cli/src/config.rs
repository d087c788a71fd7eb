//! Experiment configuration.
//!
//! A configuration is a TOML document. Every key is optional except where a
//! mode needs it; flags given on the command line override file values.
//!
//! ```toml
//! mode = "attack"          # simulate | attack | attack-misr | brute-check | bench
//! lambda = 64              # LFSR / key length
//! b = 1                    # gate spacing (direct mode)
//! h = 4                    # MISR length; selects the compressed topology
//! shadow = true
//! taps = "random"          # or an explicit bit string c_0..c_{λ-1}
//! misr_taps = "all-ones"   # or an explicit bit string d_0..d_{h-1}
//! seed = "random"          # or an explicit bit string
//! trials = 10
//! rng_seed = 0
//! cap = 1048576            # enumeration cap
//! timeout_secs = 28800     # per trial
//! workers = 1
//!
//! [bench]
//! lambdas = [8, 16, 32, 64, 128, 256, 500]
//! ```

use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use gf_flush::attack::{BRUTE_FORCE_MAX_LAMBDA, DEFAULT_ENUMERATION_CAP};
use gf_flush::BitVector;
use serde::Deserialize;

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(8 * 60 * 60);
pub const DEFAULT_BENCH_LAMBDAS: [usize; 7] = [8, 16, 32, 64, 128, 256, 500];

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConfigError {
    #[error("config syntax: {0}")]
    Syntax(String),
    #[error("config field `{field}`: {reason}")]
    Invalid { field: &'static str, reason: String },
}

fn invalid(field: &'static str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field,
        reason: reason.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Simulate,
    Attack,
    AttackMisr,
    BruteCheck,
    Bench,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Simulate => "simulate",
            Mode::Attack => "attack",
            Mode::AttackMisr => "attack-misr",
            Mode::BruteCheck => "brute-check",
            Mode::Bench => "bench",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "simulate" => Ok(Mode::Simulate),
            "attack" => Ok(Mode::Attack),
            "attack-misr" => Ok(Mode::AttackMisr),
            "brute-check" => Ok(Mode::BruteCheck),
            "bench" => Ok(Mode::Bench),
            other => Err(invalid("mode", format!("unknown mode {other:?}"))),
        }
    }
}

/// A bit-vector setting that is either drawn per trial or given explicitly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BitsSetting {
    Random,
    AllOnes,
    Explicit(BitVector),
}

impl BitsSetting {
    fn parse(field: &'static str, text: &str) -> Result<Self, ConfigError> {
        match text.trim() {
            "random" => Ok(Self::Random),
            "all-ones" => Ok(Self::AllOnes),
            bits => bits
                .parse::<BitVector>()
                .map(Self::Explicit)
                .map_err(|e| invalid(field, e.to_string())),
        }
    }
}

/// The document as written, before defaults and validation.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub mode: Option<Mode>,
    pub lambda: Option<usize>,
    pub b: Option<usize>,
    pub h: Option<usize>,
    pub shadow: Option<bool>,
    pub taps: Option<String>,
    pub misr_taps: Option<String>,
    pub seed: Option<String>,
    pub trials: Option<usize>,
    pub rng_seed: Option<u64>,
    pub cap: Option<usize>,
    /// Seconds; fractional values allowed.
    pub timeout_secs: Option<f64>,
    pub workers: Option<usize>,
    pub bench: Option<RawBench>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawBench {
    pub lambdas: Option<Vec<usize>>,
}

impl RawConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Syntax(e.to_string()))
    }

    /// Applies defaults and checks every cross-field constraint.
    pub fn validate(self) -> Result<ExperimentConfig, ConfigError> {
        let mode = self.mode.ok_or_else(|| invalid("mode", "missing"))?;
        let misr = matches!(mode, Mode::AttackMisr) || self.h.is_some();
        if matches!(mode, Mode::AttackMisr) && self.h.is_none() {
            return Err(invalid("h", "attack-misr needs the MISR length"));
        }

        let lambdas = match (mode, self.lambda) {
            (Mode::Bench, Some(l)) => vec![l],
            (Mode::Bench, None) => self
                .bench
                .and_then(|b| b.lambdas)
                .unwrap_or_else(|| DEFAULT_BENCH_LAMBDAS.to_vec()),
            (_, Some(l)) => vec![l],
            (_, None) => return Err(invalid("lambda", "missing")),
        };
        if lambdas.is_empty() {
            return Err(invalid("lambda", "no key lengths to run"));
        }
        if let Some(&bad) = lambdas.iter().find(|&&l| l < 2) {
            return Err(invalid("lambda", format!("must be at least 2, got {bad}")));
        }

        let b = self.b.unwrap_or(1);
        if b == 0 {
            return Err(invalid("b", "gate spacing must be at least 1"));
        }
        if misr && b != 1 {
            return Err(invalid("b", "MISR chains carry one gate per flip-flop (b = 1)"));
        }
        let h = self.h;
        if let Some(h) = h {
            if h == 0 {
                return Err(invalid("h", "must be at least 1"));
            }
            if let Some(&bad) = lambdas.iter().find(|&&l| l % h != 0) {
                return Err(invalid("h", format!("lambda {bad} is not a multiple of h = {h}")));
            }
        }

        let taps = BitsSetting::parse("taps", self.taps.as_deref().unwrap_or("random"))?;
        match &taps {
            BitsSetting::AllOnes => {}
            BitsSetting::Random => {}
            BitsSetting::Explicit(c) => {
                if lambdas.iter().any(|&l| l != c.len()) {
                    return Err(invalid(
                        "taps",
                        format!("{} taps given for lambda {:?}", c.len(), lambdas),
                    ));
                }
                if c.is_zero() {
                    return Err(invalid("taps", "at least one tap must be set"));
                }
            }
        }
        let misr_taps = BitsSetting::parse("misr_taps", self.misr_taps.as_deref().unwrap_or("all-ones"))?;
        if let (BitsSetting::Explicit(d), Some(h)) = (&misr_taps, h) {
            if d.len() != h {
                return Err(invalid("misr_taps", format!("{} taps given for h = {h}", d.len())));
            }
        }
        let seed = BitsSetting::parse("seed", self.seed.as_deref().unwrap_or("random"))?;
        match &seed {
            BitsSetting::Explicit(s) if lambdas.iter().any(|&l| l != s.len()) => {
                return Err(invalid(
                    "seed",
                    format!("{} bits given for lambda {:?}", s.len(), lambdas),
                ));
            }
            BitsSetting::AllOnes => return Err(invalid("seed", "use \"random\" or an explicit bit string")),
            _ => {}
        }

        if matches!(mode, Mode::BruteCheck) {
            if let Some(&big) = lambdas.iter().find(|&&l| l > BRUTE_FORCE_MAX_LAMBDA) {
                return Err(invalid(
                    "lambda",
                    format!("brute-check is limited to lambda <= {BRUTE_FORCE_MAX_LAMBDA}, got {big}"),
                ));
            }
        }

        let trials = self.trials.unwrap_or(if matches!(mode, Mode::Bench) { 10 } else { 1 });
        if trials == 0 {
            return Err(invalid("trials", "must be at least 1"));
        }
        let cap = self.cap.unwrap_or(DEFAULT_ENUMERATION_CAP);
        if cap == 0 {
            return Err(invalid("cap", "must be at least 1"));
        }
        let timeout = match self.timeout_secs {
            Some(s) => match Duration::try_from_secs_f64(s) {
                Ok(d) if !d.is_zero() => d,
                _ => return Err(invalid("timeout_secs", "must be a positive number of seconds")),
            },
            None => DEFAULT_TIMEOUT,
        };
        let workers = self.workers.unwrap_or(1);
        if workers == 0 {
            return Err(invalid("workers", "must be at least 1"));
        }

        Ok(ExperimentConfig {
            mode,
            lambdas,
            b,
            h,
            shadow: self.shadow.unwrap_or(true),
            taps,
            misr_taps,
            seed,
            trials,
            rng_seed: self.rng_seed.unwrap_or(0),
            cap,
            timeout,
            workers,
        })
    }
}

/// A validated experiment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExperimentConfig {
    pub mode: Mode,
    /// Key lengths to run; a single entry outside bench mode.
    pub lambdas: Vec<usize>,
    pub b: usize,
    /// MISR length; `Some` selects the compressed topology.
    pub h: Option<usize>,
    pub shadow: bool,
    pub taps: BitsSetting,
    pub misr_taps: BitsSetting,
    pub seed: BitsSetting,
    pub trials: usize,
    pub rng_seed: u64,
    pub cap: usize,
    pub timeout: Duration,
    pub workers: usize,
}

impl ExperimentConfig {
    pub fn lambda(&self) -> usize {
        self.lambdas[0]
    }

    /// Chain length `N` for a given key length.
    pub fn chain_len(&self, lambda: usize) -> usize {
        match self.h {
            Some(h) => lambda / h,
            None => lambda * self.b,
        }
    }

    pub fn uses_misr(&self) -> bool {
        self.h.is_some()
    }
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    RawConfig::from_toml(text)?.validate()
}
