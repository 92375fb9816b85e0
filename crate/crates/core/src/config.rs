//! Run configuration: the absolute constants of the argument, numeric
//! tolerance, sampler mode, and key=value config-file parsing.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Numeric comparison tolerance used everywhere a float identity is checked.
pub const TOLERANCE: f64 = 1e-9;

/// Sampling strategy for almost-period discovery. `Exhaustive` is the
/// certification path; `MonteCarlo` proposes candidates that are then
/// intersected with the exhaustive set, so certified output never depends
/// on the sampler.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplerMode {
    Exhaustive,
    MonteCarlo,
}

/// All tunable constants in one place. Defaults are the values the
/// acceptance runs use; every certificate embeds the config it ran with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    /// eta = c * alpha-independent increment fraction.
    pub c: f64,
    /// epsilon = c_prime * alpha^2.
    pub c_prime: f64,
    /// Additive slack multiplier on epsilon in increment assertions.
    pub c_slack: f64,
    /// Per-step density gain used to cap the iteration count.
    pub c_inc: f64,
    /// Almost-period exponent scale: p = c_p * log(2/delta) + 2.
    pub c_p: f64,
    /// Almost-period width scale: eta = c_eta / k.
    pub c_eta: f64,
    pub seed: u64,
    pub mode: SamplerMode,
    /// Monte-Carlo sample count per candidate.
    pub samples: usize,
    /// Retry budget for certification loops.
    pub max_retries: usize,
    /// Safety margin added to the iteration cap.
    pub iteration_guard: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            c: 0.125,
            c_prime: 1.0 / 1024.0,
            c_slack: 4.0,
            c_inc: 1.0 / 32.0,
            c_p: 1.0,
            c_eta: 0.25,
            seed: 0,
            mode: SamplerMode::Exhaustive,
            samples: 64,
            max_retries: 8,
            iteration_guard: 4,
        }
    }
}

impl RunConfig {
    pub fn eta(&self, _alpha: f64) -> f64 {
        self.c
    }

    pub fn epsilon(&self, alpha: f64) -> f64 {
        (self.c_prime * alpha * alpha).clamp(1e-12, 1.0)
    }

    /// Iteration cap: the density cannot gain a (1 + c_inc) factor more than
    /// log(1/alpha) / log(1 + c_inc) times.
    pub fn iteration_cap(&self, alpha: f64) -> usize {
        let base = if alpha > 0.0 && alpha < 1.0 {
            ((1.0 / alpha).ln() / (1.0 + self.c_inc).ln()).ceil() as usize
        } else {
            0
        };
        base + self.iteration_guard
    }

    /// Parse `key = value` lines; `#` starts a comment. Unknown keys are
    /// rejected so typos do not silently fall back to defaults.
    pub fn parse(text: &str) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected key=value", lineno + 1)))?;
            let key = key.trim();
            let value = value.trim();
            let bad = |what: &str| Error::Parse(format!("line {}: bad {what} `{value}`", lineno + 1));
            match key {
                "c" => cfg.c = value.parse().map_err(|_| bad("float"))?,
                "c_prime" => cfg.c_prime = value.parse().map_err(|_| bad("float"))?,
                "c_slack" => cfg.c_slack = value.parse().map_err(|_| bad("float"))?,
                "c_inc" => cfg.c_inc = value.parse().map_err(|_| bad("float"))?,
                "c_p" => cfg.c_p = value.parse().map_err(|_| bad("float"))?,
                "c_eta" => cfg.c_eta = value.parse().map_err(|_| bad("float"))?,
                "seed" => cfg.seed = value.parse().map_err(|_| bad("integer"))?,
                "samples" => cfg.samples = value.parse().map_err(|_| bad("integer"))?,
                "max_retries" => cfg.max_retries = value.parse().map_err(|_| bad("integer"))?,
                "iteration_guard" => {
                    cfg.iteration_guard = value.parse().map_err(|_| bad("integer"))?
                }
                "mode" => {
                    cfg.mode = match value {
                        "exhaustive" => SamplerMode::Exhaustive,
                        "montecarlo" | "monte_carlo" => SamplerMode::MonteCarlo,
                        _ => return Err(bad("mode")),
                    }
                }
                _ => {
                    return Err(Error::Parse(format!(
                        "line {}: unknown key `{key}`",
                        lineno + 1
                    )))
                }
            }
        }
        Ok(cfg)
    }
}
