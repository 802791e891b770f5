//! Gaussian collapse probabilities and a first-passage Monte Carlo check.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_MAX_STEPS: u64 = 10_000_000;

/// Trials handled per work item; fixed so the partition never depends on the pool.
const CHUNK: u64 = 1024;

/// Standard normal cumulative distribution.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// `P(φ(f) ≤ 0)` for a Gaussian with mean `phi0` and width `sigma`.
pub fn collapse_probability(phi0: f64, sigma: f64) -> Result<f64> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::Domain(format!(
            "sigma must be positive, got {sigma}"
        )));
    }
    if !phi0.is_finite() {
        return Err(Error::Domain(format!("phi0 must be finite, got {phi0}")));
    }
    Ok(normal_cdf(-phi0 / sigma))
}

/// `Φ(-τ²)`.
pub fn collapse_probability_tau(tau: f64) -> Result<f64> {
    if !(tau >= 0.0) || !tau.is_finite() {
        return Err(Error::Domain(format!(
            "tau must be non-negative, got {tau}"
        )));
    }
    Ok(normal_cdf(-tau * tau))
}

/// Mean of the geometric law with per-step probability `beta`, in units of `step`.
pub fn mean_time_to_collapse(beta: f64, step: f64) -> Result<f64> {
    if beta == 0.0 {
        return Err(Error::InfiniteExpectation);
    }
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::Domain(format!(
            "beta must lie in (0, 1], got {beta}"
        )));
    }
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::Domain(format!("step must be positive, got {step}")));
    }
    Ok(step / beta)
}

/// Normal approximation of the smeared field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianModel {
    pub mean: f64,
    pub sigma: f64,
}

impl GaussianModel {
    pub fn new(mean: f64, sigma: f64) -> Result<Self> {
        let m = Self { mean, sigma };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.mean.is_finite() {
            return Err(Error::Domain(format!(
                "mean must be finite, got {}",
                self.mean
            )));
        }
        if !(self.sigma > 0.0) || !self.sigma.is_finite() {
            return Err(Error::Domain(format!(
                "sigma must be positive, got {}",
                self.sigma
            )));
        }
        Ok(())
    }

    pub fn collapse_probability(&self) -> Result<f64> {
        collapse_probability(self.mean, self.sigma)
    }

    /// The `τ` with `mean / sigma = τ²`, when the mean is non-negative.
    pub fn tau(&self) -> Option<f64> {
        (self.mean >= 0.0).then(|| (self.mean / self.sigma).sqrt())
    }
}

/// Monte Carlo settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McSettings {
    pub tau: f64,
    pub n_trials: u64,
    #[serde(default = "default_max_steps")]
    pub max_steps: u64,
    #[serde(default)]
    pub seed: u64,
}

fn default_max_steps() -> u64 {
    DEFAULT_MAX_STEPS
}

impl McSettings {
    pub fn new(tau: f64, n_trials: u64, seed: u64) -> Self {
        Self {
            tau,
            n_trials,
            max_steps: DEFAULT_MAX_STEPS,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau >= 0.0) || !self.tau.is_finite() {
            return Err(Error::config("mc.tau", "must be finite and non-negative"));
        }
        if self.n_trials == 0 {
            return Err(Error::config("mc.n_trials", "must be at least 1"));
        }
        if self.max_steps == 0 {
            return Err(Error::config("mc.max_steps", "must be at least 1"));
        }
        Ok(())
    }
}

/// An estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

impl Estimate {
    /// Whether `target` lies within `k` standard errors.
    pub fn covers(&self, target: f64, k: f64) -> bool {
        (self.value - target).abs() <= k * self.std_error
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollapseReport {
    pub tau: f64,
    /// `Φ(-τ²)`.
    pub beta: f64,
    /// `1/β`, absent when `β` underflows to zero.
    pub mean_steps: Option<f64>,
    pub mc_trials: u64,
    /// Maximum-likelihood per-step probability, collapses over draws.
    pub mc_collapse_fraction: Estimate,
    /// Mean first-passage step over the trials that collapsed.
    pub mc_mean_steps: Option<Estimate>,
    pub collapsed_trials: u64,
    pub censored_trials: u64,
    pub censored: bool,
    pub total_draws: u64,
    pub max_steps: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    collapsed: u64,
    censored: u64,
    draws: u64,
    sum_steps: u128,
    sum_steps_sq: u128,
}

impl Tally {
    fn merge(self, o: Tally) -> Tally {
        Tally {
            collapsed: self.collapsed + o.collapsed,
            censored: self.censored + o.censored,
            draws: self.draws + o.draws,
            sum_steps: self.sum_steps + o.sum_steps,
            sum_steps_sq: self.sum_steps_sq + o.sum_steps_sq,
        }
    }
}

/// First step at which a standard normal draw falls to `-τ²` or below.
fn first_passage(seed: u64, trial: u64, threshold: f64, max_steps: u64) -> Option<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    (1..=max_steps).find(|_| rng.sample::<f64, _>(StandardNormal) <= threshold)
}

fn run_chunk(s: &McSettings, chunk: u64) -> Tally {
    let threshold = -s.tau * s.tau;
    let start = chunk * CHUNK;
    let end = (start + CHUNK).min(s.n_trials);
    let mut t = Tally::default();
    for trial in start..end {
        match first_passage(s.seed, trial, threshold, s.max_steps) {
            Some(k) => {
                t.collapsed += 1;
                t.draws += k;
                t.sum_steps += k as u128;
                t.sum_steps_sq += (k as u128) * (k as u128);
            }
            None => {
                t.censored += 1;
                t.draws += s.max_steps;
            }
        }
    }
    t
}

/// Runs i.i.d. per-step Gaussian trials on the current rayon pool.
pub fn simulate_poisson_collapse(settings: &McSettings) -> Result<CollapseReport> {
    settings.validate()?;
    let chunks = settings.n_trials.div_ceil(CHUNK);
    let tally = (0..chunks)
        .into_par_iter()
        .map(|c| run_chunk(settings, c))
        .reduce(Tally::default, Tally::merge);
    report(settings, tally)
}

/// As [`simulate_poisson_collapse`] on a dedicated pool of `workers` threads.
pub fn simulate_poisson_collapse_with_workers(
    settings: &McSettings,
    workers: usize,
) -> Result<CollapseReport> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Precondition(format!("cannot build worker pool: {e}")))?;
    pool.install(|| simulate_poisson_collapse(settings))
}

fn report(s: &McSettings, t: Tally) -> Result<CollapseReport> {
    let beta = collapse_probability_tau(s.tau)?;
    let mean_steps = mean_time_to_collapse(beta, 1.0).ok();

    let draws = t.draws as f64;
    let fraction = if t.collapsed > 0 {
        let p = t.collapsed as f64 / draws;
        Estimate {
            value: p,
            std_error: p * ((1.0 - p) / t.collapsed as f64).sqrt(),
        }
    } else {
        // No events: quote the resolution of the sample instead of a zero error.
        Estimate {
            value: 0.0,
            std_error: 1.0 / draws,
        }
    };

    let mc_mean_steps = (t.collapsed > 0).then(|| {
        let n = t.collapsed as f64;
        let mean = t.sum_steps as f64 / n;
        let std_error = if t.collapsed > 1 {
            let nn = t.collapsed as u128;
            let spread = (nn * t.sum_steps_sq - t.sum_steps * t.sum_steps) as f64;
            (spread / (n * (n - 1.0)) / n).sqrt()
        } else {
            mean
        };
        Estimate {
            value: mean,
            std_error,
        }
    });

    Ok(CollapseReport {
        tau: s.tau,
        beta,
        mean_steps,
        mc_trials: s.n_trials,
        mc_collapse_fraction: fraction,
        mc_mean_steps,
        collapsed_trials: t.collapsed,
        censored_trials: t.censored,
        censored: t.censored > 0,
        total_draws: t.draws,
        max_steps: s.max_steps,
        seed: s.seed,
    })
}
