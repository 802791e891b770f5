//! Compactly supported smooth profiles with analytic derivatives.
//!
//! The template is the standard mollifier `psi(u) = exp(-1/(1 - u^2))` on
//! `|u| < 1`. Writing `psi = exp(g)` with
//! `g^(k)(u) = -(k!/2) [(1-u)^-(k+1) + (-1)^k (1+u)^-(k+1)]`, derivatives follow
//! from `psi^(n+1) = sum_k C(n,k) g^(k+1) psi^(n-k)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::ProperTimeGrid;

/// Highest derivative order the analytic recursion provides.
pub const MAX_DERIVATIVE: usize = 8;

/// Minimum number of grid cells per bump half-width for its eighth
/// derivative to count as resolved.
pub const MIN_CELLS_PER_HALF_WIDTH: f64 = 250.0;

/// A smooth function known through its derivatives.
pub trait SmoothProfile {
    /// `d^order/dx^order` at `x`.
    fn derivative(&self, order: usize, x: f64) -> f64;

    /// Highest order for which [`SmoothProfile::derivative`] is trustworthy.
    fn resolved_order(&self) -> usize;

    /// Closed interval outside which the profile and all its derivatives vanish.
    fn support(&self) -> (f64, f64);

    fn value(&self, x: f64) -> f64 {
        self.derivative(0, x)
    }
}

/// `psi^(n)(u)` for `n = 0..=MAX_DERIVATIVE`.
pub fn mollifier_derivatives(u: f64) -> [f64; MAX_DERIVATIVE + 1] {
    let mut psi = [0.0; MAX_DERIVATIVE + 1];
    if u.abs() >= 1.0 {
        return psi;
    }
    let base = (-1.0 / (1.0 - u * u)).exp();
    if base == 0.0 {
        return psi;
    }
    let a = 1.0 / (1.0 - u);
    let b = 1.0 / (1.0 + u);
    // g[k] holds g^(k) for k >= 1.
    let mut g = [0.0; MAX_DERIVATIVE + 1];
    let mut fact = 1.0;
    let (mut ap, mut bp) = (a, b);
    for (k, gk) in g.iter_mut().enumerate().skip(1) {
        fact *= k as f64;
        ap *= a;
        bp *= b;
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        *gk = -0.5 * fact * (ap + sign * bp);
    }
    psi[0] = base;
    for n in 0..MAX_DERIVATIVE {
        let mut binom = 1.0;
        let mut acc = 0.0;
        for k in 0..=n {
            acc += binom * g[k + 1] * psi[n - k];
            binom = binom * (n - k) as f64 / (k + 1) as f64;
        }
        psi[n + 1] = acc;
    }
    psi
}

/// `amplitude * psi((x - center) / half_width)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MollifierBump {
    pub center: f64,
    pub half_width: f64,
    pub amplitude: f64,
}

impl MollifierBump {
    pub fn new(center: f64, half_width: f64, amplitude: f64) -> Result<Self> {
        let b = Self {
            center,
            half_width,
            amplitude,
        };
        b.validate()?;
        Ok(b)
    }

    /// Bump with peak value `peak` (the template peaks at `1/e`).
    pub fn with_peak(center: f64, half_width: f64, peak: f64) -> Result<Self> {
        Self::new(center, half_width, peak * std::f64::consts::E)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.center.is_finite() || !self.amplitude.is_finite() {
            return Err(Error::config(
                "coupling.bump",
                "center and amplitude must be finite",
            ));
        }
        if !(self.half_width > 0.0) || !self.half_width.is_finite() {
            return Err(Error::config(
                "coupling.bump.half_width",
                "must be positive",
            ));
        }
        Ok(())
    }

    /// All derivatives `0..=MAX_DERIVATIVE` at `x`.
    pub fn derivatives(&self, x: f64) -> [f64; MAX_DERIVATIVE + 1] {
        let mut d = mollifier_derivatives((x - self.center) / self.half_width);
        let inv = 1.0 / self.half_width;
        let mut scale = self.amplitude;
        for v in d.iter_mut() {
            *v *= scale;
            scale *= inv;
        }
        d
    }
}

impl SmoothProfile for MollifierBump {
    fn derivative(&self, order: usize, x: f64) -> f64 {
        assert!(
            order <= MAX_DERIVATIVE,
            "derivative order {order} not provided"
        );
        self.derivatives(x)[order]
    }

    fn resolved_order(&self) -> usize {
        MAX_DERIVATIVE
    }

    fn support(&self) -> (f64, f64) {
        (self.center - self.half_width, self.center + self.half_width)
    }
}

/// Switching function of the interaction: a smooth bump, or identically one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingWindow {
    Adiabatic,
    Bump(MollifierBump),
}

impl CouplingWindow {
    pub fn value(&self, x: f64) -> f64 {
        match self {
            CouplingWindow::Adiabatic => 1.0,
            CouplingWindow::Bump(b) => b.value(x),
        }
    }

    pub fn is_adiabatic(&self) -> bool {
        matches!(self, CouplingWindow::Adiabatic)
    }

    /// Checks that a bump lies inside `grid` and that its derivatives up to
    /// order eight are resolved by the grid step.
    pub fn check_resolved(&self, grid: &ProperTimeGrid) -> Result<()> {
        let CouplingWindow::Bump(b) = self else {
            return Ok(());
        };
        b.validate()?;
        let (lo, hi) = b.support();
        if lo < grid.t_start() || hi > grid.t_end() {
            return Err(Error::Domain(format!(
                "coupling support [{lo}, {hi}] escapes grid [{}, {}]",
                grid.t_start(),
                grid.t_end()
            )));
        }
        let cells = b.half_width / grid.step();
        if cells < MIN_CELLS_PER_HALF_WIDTH {
            return Err(Error::Resolution(format!(
                "coupling bump spans {cells:.1} cells per half-width; \
                 eighth derivative needs at least {MIN_CELLS_PER_HALF_WIDTH}"
            )));
        }
        Ok(())
    }
}
