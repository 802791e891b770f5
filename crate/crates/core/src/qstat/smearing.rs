//! Smearing functions and their Fourier transforms, `f^(p) = ∫ f(x) e^{-ipx} dx`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{interpolate, ProperTimeGrid};
use crate::quadrature::simpson;

/// Half-width of the Gaussian's numerical support in units of `tau`.
/// `exp(-6.5^2)` is below `5e-19`.
pub const GAUSSIAN_CUTOFF: f64 = 6.5;

/// Shape of the undilated, uncentred profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Profile {
    /// `exp(-y^2) / sqrt(pi)`, unit integral.
    Gaussian,
    /// Uniform samples vanishing at both ends of their interval.
    Sampled {
        t_start: f64,
        t_end: f64,
        values: Vec<f64>,
    },
}

/// A real smearing function
/// `f(x) = normalization * profile((x - center) / tau) / tau`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    pub profile: Profile,
    pub center: f64,
    pub tau: f64,
    pub normalization: f64,
}

impl TestFunction {
    /// `normalization * exp(-((x - center)/tau)^2) / (sqrt(pi) tau)`.
    pub fn gaussian(center: f64, tau: f64, normalization: f64) -> Result<Self> {
        let f = Self {
            profile: Profile::Gaussian,
            center,
            tau,
            normalization,
        };
        f.validate()?;
        Ok(f)
    }

    /// Profile given by samples on `grid`; both end samples must vanish.
    pub fn sampled(grid: &ProperTimeGrid, values: Vec<f64>) -> Result<Self> {
        grid.check_len("smearing.values", values.len())?;
        let f = Self {
            profile: Profile::Sampled {
                t_start: grid.t_start(),
                t_end: grid.t_end(),
                values,
            },
            center: 0.0,
            tau: 1.0,
            normalization: 1.0,
        };
        f.validate()?;
        Ok(f)
    }

    /// Samples `shape` on `grid` as a sampled profile.
    pub fn sampled_from_fn(grid: &ProperTimeGrid, shape: impl Fn(f64) -> f64) -> Result<Self> {
        Self::sampled(grid, grid.sample(shape))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0) || !self.tau.is_finite() {
            return Err(Error::config(
                "smearing.tau",
                "dilation must be positive and finite",
            ));
        }
        if !self.center.is_finite() {
            return Err(Error::config("smearing.center", "must be finite"));
        }
        if !self.normalization.is_finite() {
            return Err(Error::config("smearing.normalization", "must be finite"));
        }
        if let Profile::Sampled {
            t_start,
            t_end,
            values,
        } = &self.profile
        {
            let grid = ProperTimeGrid::new(*t_start, *t_end, values.len())
                .map_err(|_| Error::config("smearing.values", "invalid sample interval"))?;
            if values.len() < 5 {
                return Err(Error::config("smearing.values", "need at least 5 samples"));
            }
            if values.iter().any(|v| !v.is_finite()) {
                return Err(Error::config("smearing.values", "non-finite sample"));
            }
            let peak = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let edge = values[0].abs().max(values[values.len() - 1].abs());
            if edge > 1e-12 * peak {
                return Err(Error::config(
                    "smearing.values",
                    format!(
                        "samples must vanish at both ends of [{}, {}] (compact support)",
                        grid.t_start(),
                        grid.t_end()
                    ),
                ));
            }
        }
        Ok(())
    }

    /// `f_s(x) = f(x/s)/s`. Dilation about the origin moves the centre to `s * center`.
    pub fn dilate(&self, s: f64) -> Result<Self> {
        let f = Self {
            center: self.center * s,
            tau: self.tau * s,
            ..self.clone()
        };
        f.validate()?;
        Ok(f)
    }

    /// `f(x - c)`.
    pub fn translate(&self, c: f64) -> Self {
        Self {
            center: self.center + c,
            ..self.clone()
        }
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self {
            normalization: self.normalization * k,
            ..self.clone()
        }
    }

    pub fn is_zero(&self) -> bool {
        self.normalization == 0.0
            || matches!(&self.profile, Profile::Sampled { values, .. } if values.iter().all(|&v| v == 0.0))
    }

    fn profile_value(&self, y: f64) -> f64 {
        match &self.profile {
            Profile::Gaussian => (-y * y).exp() / PI.sqrt(),
            Profile::Sampled {
                t_start,
                t_end,
                values,
            } => {
                let step = (t_end - t_start) / (values.len() - 1) as f64;
                interpolate(*t_start, step, values, y)
            }
        }
    }

    fn profile_support(&self) -> (f64, f64) {
        match &self.profile {
            Profile::Gaussian => (-GAUSSIAN_CUTOFF, GAUSSIAN_CUTOFF),
            Profile::Sampled { t_start, t_end, .. } => (*t_start, *t_end),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.normalization * self.profile_value((x - self.center) / self.tau) / self.tau
    }

    /// Closed interval outside which `f` is treated as zero.
    pub fn support(&self) -> (f64, f64) {
        let (a, b) = self.profile_support();
        (self.center + self.tau * a, self.center + self.tau * b)
    }

    /// `∫ f`.
    pub fn integral(&self) -> f64 {
        match &self.profile {
            Profile::Gaussian => self.normalization,
            Profile::Sampled {
                t_start,
                t_end,
                values,
            } => {
                let step = (t_end - t_start) / (values.len() - 1) as f64;
                self.normalization * simpson(values, step)
            }
        }
    }

    /// Transform of the undilated profile at frequency `q`.
    fn profile_transform(&self, q: f64) -> Complex64 {
        match &self.profile {
            Profile::Gaussian => Complex64::new((-q * q / 4.0).exp(), 0.0),
            Profile::Sampled {
                t_start,
                t_end,
                values,
            } => {
                let step = (t_end - t_start) / (values.len() - 1) as f64;
                let weights = simpson_weights(values.len(), step);
                let mut acc = Complex64::new(0.0, 0.0);
                for (k, (&v, &w)) in values.iter().zip(&weights).enumerate() {
                    if v == 0.0 {
                        continue;
                    }
                    let y = t_start + k as f64 * step;
                    acc += Complex64::from_polar(w * v, -q * y);
                }
                acc
            }
        }
    }

    /// `f^(p) = normalization * e^{-ip center} * profile^(tau p)`.
    pub fn fourier(&self, p: f64) -> Complex64 {
        let phase = Complex64::from_polar(self.normalization, -p * self.center);
        phase * self.profile_transform(self.tau * p)
    }

    /// `|f^(p)|^2`, which does not depend on the centre.
    pub fn spectral_density(&self, p: f64) -> f64 {
        self.normalization * self.normalization * self.profile_transform(self.tau * p).norm_sqr()
    }

    /// Samples `f` on `grid`.
    pub fn sample_on(&self, grid: &ProperTimeGrid) -> Vec<f64> {
        grid.sample(|t| self.eval(t))
    }

    /// Shortest length scale resolved by the profile: `tau` for the Gaussian,
    /// the sample spacing times `tau` for sampled profiles.
    pub(crate) fn resolution_scale(&self) -> f64 {
        match &self.profile {
            Profile::Gaussian => self.tau,
            Profile::Sampled {
                t_start,
                t_end,
                values,
            } => self.tau * (t_end - t_start) / (values.len() - 1) as f64,
        }
    }

    /// Highest frequency at which the profile transform is free of aliasing.
    pub(crate) fn nyquist(&self) -> f64 {
        match &self.profile {
            Profile::Gaussian => f64::INFINITY,
            Profile::Sampled { .. } => PI / self.resolution_scale(),
        }
    }

    pub(crate) fn profile_width(&self) -> f64 {
        let (a, b) = self.profile_support();
        self.tau * (b - a)
    }
}

/// Composite Simpson weights matching [`simpson`].
pub(crate) fn simpson_weights(n: usize, step: f64) -> Vec<f64> {
    let mut w = vec![0.0; n];
    let add_simpson = |w: &mut [f64], lo: usize, hi: usize| {
        for (k, wk) in w.iter_mut().enumerate().take(hi + 1).skip(lo) {
            let c = if k == lo || k == hi {
                1.0
            } else if (k - lo) % 2 == 1 {
                4.0
            } else {
                2.0
            };
            *wk += c * step / 3.0;
        }
    };
    let add_38 = |w: &mut [f64], lo: usize| {
        for (j, c) in [1.0, 3.0, 3.0, 1.0].iter().enumerate() {
            w[lo + j] += 3.0 * step / 8.0 * c;
        }
    };
    match n {
        0 | 1 => {}
        2 => {
            w[0] = 0.5 * step;
            w[1] = 0.5 * step;
        }
        _ => {
            let intervals = n - 1;
            if intervals.is_multiple_of(2) {
                add_simpson(&mut w, 0, n - 1);
            } else if intervals == 3 {
                add_38(&mut w, 0);
            } else {
                add_simpson(&mut w, 0, n - 4);
                add_38(&mut w, n - 4);
            }
        }
    }
    w
}
