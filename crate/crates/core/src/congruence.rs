//! Classical Raychaudhuri dynamics of the expansion along a congruence, the
//! linearizing substitution `theta = 3 phi' / phi`, and focusing detection.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{interpolate, midpoints, ProperTimeGrid, Trajectory};
use crate::ode::{self, rk4_step, Cell};

/// Default `|theta|` above which an integration is treated as having reached a caustic.
pub const DEFAULT_BLOWUP_THRESHOLD: f64 = 1e12;

/// Default tolerance on `|phi|` for declaring an exact zero.
pub const DEFAULT_ZERO_TOL: f64 = 1e-12;

/// Classical fields along the congruence, one sample per grid point.
///
/// `sigma2` and `omega2` are the contractions of shear and twist with
/// themselves, `ricci_xx` is the Ricci tensor on the tangent field, and
/// `t_anom` the anomalous trace supplied by the caller.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CongruenceBackground {
    pub sigma2: Vec<f64>,
    pub omega2: Vec<f64>,
    pub ricci_xx: Vec<f64>,
    pub t_anom: Vec<f64>,
}

impl CongruenceBackground {
    /// Vanishing shear, twist, curvature and anomaly.
    pub fn flat(grid: &ProperTimeGrid) -> Self {
        let zeros = vec![0.0; grid.len()];
        Self {
            sigma2: zeros.clone(),
            omega2: zeros.clone(),
            ricci_xx: zeros.clone(),
            t_anom: zeros,
        }
    }

    /// Checks lengths against `grid`, finiteness, and non-negativity of the squares.
    pub fn validate(&self, grid: &ProperTimeGrid) -> Result<()> {
        let fields = [
            ("background.sigma2", &self.sigma2),
            ("background.omega2", &self.omega2),
            ("background.ricci_xx", &self.ricci_xx),
            ("background.t_anom", &self.t_anom),
        ];
        for (name, samples) in fields {
            grid.check_len(name, samples.len())?;
            if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
                return Err(Error::config(
                    name,
                    format!("non-finite sample at index {i}"),
                ));
            }
        }
        for (name, samples) in [
            ("background.sigma2", &self.sigma2),
            ("background.omega2", &self.omega2),
        ] {
            if let Some(i) = samples.iter().position(|&v| v < 0.0) {
                return Err(Error::config(name, format!("negative sample at index {i}")));
            }
        }
        Ok(())
    }

    /// `-sigma2 + omega2 - ricci_xx`, the linear forcing of the expansion.
    fn forcing(&self) -> Vec<f64> {
        self.sigma2
            .iter()
            .zip(&self.omega2)
            .zip(&self.ricci_xx)
            .map(|((s, w), r)| -s + w - r)
            .collect()
    }
}

/// The external potential `V(t)` of the linearized focusing equation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Potential {
    grid: ProperTimeGrid,
    values: Vec<f64>,
}

impl Potential {
    pub fn new(grid: ProperTimeGrid, values: Vec<f64>) -> Result<Self> {
        grid.check_len("potential", values.len())?;
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::config(
                "potential",
                format!("non-finite sample at index {i}"),
            ));
        }
        Ok(Self { grid, values })
    }

    pub fn zero(grid: ProperTimeGrid) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: ProperTimeGrid, value: f64) -> Self {
        Self {
            values: vec![value; grid.len()],
            grid,
        }
    }

    pub fn from_fn(grid: ProperTimeGrid, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(grid, grid.sample(f))
    }

    pub fn grid(&self) -> &ProperTimeGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Local cubic interpolation of the samples; zero outside the grid.
    pub fn at(&self, t: f64) -> f64 {
        interpolate(self.grid.t_start(), self.grid.step(), &self.values, t)
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }
}

/// `V = (sigma2 - omega2 + t_anom / 2) / 3` at every sample.
pub fn potential_from_background(
    bg: &CongruenceBackground,
    grid: &ProperTimeGrid,
) -> Result<Potential> {
    bg.validate(grid)?;
    let values = bg
        .sigma2
        .iter()
        .zip(&bg.omega2)
        .zip(&bg.t_anom)
        .map(|((s, w), a)| (s - w + 0.5 * a) / 3.0)
        .collect();
    Potential::new(*grid, values)
}

/// `(sigma2 - omega2 + ricci_xx) / 3`, the potential of the classical
/// Raychaudhuri equation linearized by `θ = 3 φ̇/φ`. It agrees with
/// [`potential_from_background`] when `ricci_xx = t_anom / 2`.
pub fn raychaudhuri_potential(
    bg: &CongruenceBackground,
    grid: &ProperTimeGrid,
) -> Result<Potential> {
    bg.validate(grid)?;
    let values = bg.forcing().iter().map(|q| -q / 3.0).collect();
    Potential::new(*grid, values)
}

/// Result of integrating the expansion forward in proper time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalEvolution {
    /// Expansion samples; truncated before the caustic when one is met.
    pub theta: Trajectory,
    /// Estimated proper time at which `theta` diverges.
    pub divergence_time: Option<f64>,
}

impl ClassicalEvolution {
    pub fn diverged(&self) -> bool {
        self.divergence_time.is_some()
    }
}

#[derive(Clone, Copy, PartialEq)]
enum State {
    Theta(f64),
    Inverse(f64),
}

impl State {
    fn theta(self) -> f64 {
        match self {
            State::Theta(t) => t,
            State::Inverse(w) => 1.0 / w,
        }
    }
}

/// Integrates `theta' = -theta^2/3 - sigma2 + omega2 - ricci_xx` from `theta0`.
///
/// Near a caustic the integration switches to `w = 1/theta`, which obeys
/// `w' = 1/3 - q w^2` and stays smooth through the pole. A sign change of `w`
/// inside a cell, or `|theta|` above `blowup_threshold`, stops the run; the
/// divergence time comes from the zero of the linear extrapolation of `w`.
pub fn evolve_classical_raychaudhuri(
    theta0: f64,
    bg: &CongruenceBackground,
    grid: &ProperTimeGrid,
    blowup_threshold: f64,
) -> Result<ClassicalEvolution> {
    if !theta0.is_finite() {
        return Err(Error::Precondition("theta0 must be finite".into()));
    }
    if !(blowup_threshold > 0.0) {
        return Err(Error::config("blowup_threshold", "must be positive"));
    }
    bg.validate(grid)?;
    let q = bg.forcing();
    let q_mid = midpoints(&q);
    let h = grid.step();

    let theta_rhs = |c: f64, y: &[f64; 1]| [-y[0] * y[0] / 3.0 + c];
    let inverse_rhs = |c: f64, y: &[f64; 1]| [1.0 / 3.0 - c * y[0] * y[0]];

    let mut state = if theta0.abs() > 2.0 {
        State::Inverse(1.0 / theta0)
    } else {
        State::Theta(theta0)
    };
    let mut values = Vec::with_capacity(grid.len());
    values.push(theta0);
    let mut divergence_time = None;

    for i in 0..grid.len() - 1 {
        let cell = Cell {
            start: q[i],
            mid: q_mid[i],
            end: q[i + 1],
        };
        let t = grid.time(i);
        let next = match state {
            State::Theta(th) => State::Theta(rk4_step([th], h, cell, theta_rhs)[0]),
            State::Inverse(w) => State::Inverse(rk4_step([w], h, cell, inverse_rhs)[0]),
        };
        match (state, next) {
            (State::Inverse(w0), State::Inverse(w1)) if w0 * w1 <= 0.0 => {
                divergence_time = Some(t + h * w0 / (w0 - w1));
                break;
            }
            _ => {}
        }
        let th = next.theta();
        if !th.is_finite() || th.abs() > blowup_threshold {
            let w0 = 1.0 / state.theta();
            let w1 = 1.0 / th;
            let estimate = if w1.is_finite() && w0 != w1 {
                t + h * w0 / (w0 - w1)
            } else {
                t + h
            };
            divergence_time = Some(estimate);
            break;
        }
        values.push(th);
        state = match next {
            State::Theta(th) if th.abs() > 2.0 => State::Inverse(1.0 / th),
            State::Inverse(w) if w.abs() > 1.0 => State::Theta(1.0 / w),
            s => s,
        };
    }

    Ok(ClassicalEvolution {
        theta: Trajectory::from_parts(grid.t_start(), h, values),
        divergence_time,
    })
}

/// `theta = 3 phi' / phi` with second-order finite differences.
///
/// Fails with [`Error::ZeroCrossing`] at the first sample where `|phi| <= tol`.
pub fn theta_from_phi(phi: &Trajectory, tol: f64) -> Result<Trajectory> {
    let v = phi.values();
    let n = v.len();
    if n < 2 {
        return Err(Error::Precondition(
            "need at least two samples to differentiate".into(),
        ));
    }
    if let Some(index) = v.iter().position(|x| x.abs() <= tol) {
        return Err(Error::ZeroCrossing {
            index,
            time: phi.time(index),
        });
    }
    let h = phi.step();
    let derivative: Vec<f64> = if n == 2 {
        let d = (v[1] - v[0]) / h;
        vec![d, d]
    } else {
        (0..n)
            .map(|i| {
                if i == 0 {
                    (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h)
                } else if i == n - 1 {
                    (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * h)
                } else {
                    (v[i + 1] - v[i - 1]) / (2.0 * h)
                }
            })
            .collect()
    };
    let theta = derivative.iter().zip(v).map(|(d, p)| 3.0 * d / p).collect();
    Ok(Trajectory::from_parts(phi.t_start(), h, theta))
}

/// Solves `phi'' + (V + source/3) phi = 0` with `phi(t_start) = phi0`,
/// `phi'(t_start) = phidot0` by fixed-step RK4 on the potential's grid.
pub fn solve_linear_phi(
    phi0: f64,
    phidot0: f64,
    potential: &Potential,
    source: Option<&Trajectory>,
) -> Result<Trajectory> {
    if !phi0.is_finite() || !phidot0.is_finite() {
        return Err(Error::Precondition("initial data must be finite".into()));
    }
    let grid = potential.grid();
    let mut q = potential.values().to_vec();
    if let Some(src) = source {
        grid.check_len("source", src.len())?;
        if src.values().iter().any(|v| !v.is_finite()) {
            return Err(Error::Precondition("source must be finite".into()));
        }
        for (qi, s) in q.iter_mut().zip(src.values()) {
            *qi += s / 3.0;
        }
    }
    let q_mid = midpoints(&q);
    let values =
        ode::second_order_linear(&q, &q_mid, grid.step(), 0, grid.len() - 1, [phi0, phidot0]);
    Trajectory::on_grid(grid, values)
}

/// First focusing time of `phi`: the first sample with `|phi| <= tol`, or the
/// linear interpolation of the first sign change.
pub fn detect_collapse(phi: &Trajectory, tol: f64) -> Option<f64> {
    let v = phi.values();
    for i in 0..v.len() {
        if v[i].abs() <= tol {
            return Some(phi.time(i));
        }
        if i + 1 < v.len() && v[i] * v[i + 1] <= 0.0 {
            if v[i + 1].abs() <= tol {
                return Some(phi.time(i + 1));
            }
            let s = v[i] / (v[i] - v[i + 1]);
            return Some(phi.time(i) + s * phi.step());
        }
    }
    None
}
