use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default number of samples when a configuration leaves the resolution open.
pub const DEFAULT_POINTS: usize = 4001;

/// Uniform sampling of a proper-time interval, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGrid", into = "RawGrid")]
pub struct ProperTimeGrid {
    t_start: f64,
    t_end: f64,
    n_points: usize,
}

#[derive(Serialize, Deserialize)]
struct RawGrid {
    t_start: f64,
    t_end: f64,
    #[serde(default = "default_points")]
    n_points: usize,
}

fn default_points() -> usize {
    DEFAULT_POINTS
}

impl TryFrom<RawGrid> for ProperTimeGrid {
    type Error = Error;

    fn try_from(raw: RawGrid) -> Result<Self> {
        ProperTimeGrid::new(raw.t_start, raw.t_end, raw.n_points)
    }
}

impl From<ProperTimeGrid> for RawGrid {
    fn from(g: ProperTimeGrid) -> Self {
        RawGrid {
            t_start: g.t_start,
            t_end: g.t_end,
            n_points: g.n_points,
        }
    }
}

impl ProperTimeGrid {
    pub fn new(t_start: f64, t_end: f64, n_points: usize) -> Result<Self> {
        if !t_start.is_finite() || !t_end.is_finite() {
            return Err(Error::config("grid", "interval endpoints must be finite"));
        }
        if t_end <= t_start {
            return Err(Error::config(
                "grid.t_end",
                format!("t_end ({t_end}) must exceed t_start ({t_start})"),
            ));
        }
        if n_points < 2 {
            return Err(Error::config("grid.n_points", "need at least 2 samples"));
        }
        Ok(Self {
            t_start,
            t_end,
            n_points,
        })
    }

    /// Grid on `[t_start, t_end]` whose step does not exceed `max_step`.
    pub fn with_max_step(t_start: f64, t_end: f64, max_step: f64) -> Result<Self> {
        let n = ((t_end - t_start) / max_step).ceil() as usize + 1;
        Self::new(t_start, t_end, n.max(2))
    }

    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn step(&self) -> f64 {
        (self.t_end - self.t_start) / (self.n_points - 1) as f64
    }

    /// Time of sample `i`. The last sample is pinned to `t_end` exactly.
    pub fn time(&self, i: usize) -> f64 {
        if i + 1 == self.n_points {
            self.t_end
        } else {
            self.t_start + i as f64 * self.step()
        }
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(move |i| self.time(i))
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.t_start && t <= self.t_end
    }

    /// Index of the sample nearest to `t`, clamped to the grid.
    pub fn nearest_index(&self, t: f64) -> usize {
        let x = ((t - self.t_start) / self.step()).round();
        x.clamp(0.0, (self.n_points - 1) as f64) as usize
    }

    /// Samples `f` at every grid point.
    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        self.times().map(f).collect()
    }

    /// Same interval refined by an integer factor.
    pub fn refined(&self, factor: usize) -> Self {
        Self {
            n_points: (self.n_points - 1) * factor + 1,
            ..*self
        }
    }

    pub(crate) fn check_len(&self, field: &str, len: usize) -> Result<()> {
        if len != self.n_points {
            return Err(Error::config(
                field,
                format!("expected {} samples, got {len}", self.n_points),
            ));
        }
        Ok(())
    }
}

/// A real function sampled on a uniform proper-time mesh.
///
/// Integrations that stop early (a blow-up of the expansion) return a
/// trajectory covering only a prefix of the requested grid, so the mesh is
/// stored by origin and step rather than as a [`ProperTimeGrid`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    t_start: f64,
    step: f64,
    values: Vec<f64>,
}

impl Trajectory {
    pub fn on_grid(grid: &ProperTimeGrid, values: Vec<f64>) -> Result<Self> {
        grid.check_len("trajectory", values.len())?;
        Ok(Self {
            t_start: grid.t_start(),
            step: grid.step(),
            values,
        })
    }

    pub(crate) fn from_parts(t_start: f64, step: f64, values: Vec<f64>) -> Self {
        Self {
            t_start,
            step,
            values,
        }
    }

    pub fn sample(grid: &ProperTimeGrid, f: impl Fn(f64) -> f64) -> Self {
        Self {
            t_start: grid.t_start(),
            step: grid.step(),
            values: grid.sample(f),
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t_start + i as f64 * self.step
    }

    pub fn t_end(&self) -> f64 {
        self.time(self.values.len().saturating_sub(1))
    }

    /// Ordered `(t, value)` pairs.
    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(move |(i, &v)| (self.time(i), v))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            values: self.values.iter().map(|&v| f(v)).collect(),
            ..*self
        }
    }
}

/// Values of a sampled function at cell midpoints `t_i + h/2`, by local cubic
/// interpolation (one-sided stencils in the first and last cells).
pub(crate) fn midpoints(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    if n < 4 {
        return values.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    }
    (0..n - 1)
        .map(|i| {
            if i == 0 {
                (5.0 * values[0] + 15.0 * values[1] - 5.0 * values[2] + values[3]) / 16.0
            } else if i == n - 2 {
                (values[n - 4] - 5.0 * values[n - 3] + 15.0 * values[n - 2] + 5.0 * values[n - 1])
                    / 16.0
            } else {
                (-values[i - 1] + 9.0 * values[i] + 9.0 * values[i + 1] - values[i + 2]) / 16.0
            }
        })
        .collect()
}

/// Local cubic interpolation of uniform samples; zero outside the sampled interval.
pub(crate) fn interpolate(t_start: f64, step: f64, values: &[f64], t: f64) -> f64 {
    let n = values.len();
    let x = (t - t_start) / step;
    let last = (n - 1) as f64;
    if !(0.0..=last).contains(&x) {
        return 0.0;
    }
    if n < 4 {
        let i = (x.floor() as usize).min(n - 2);
        let s = x - i as f64;
        return values[i] * (1.0 - s) + values[i + 1] * s;
    }
    let i = (x.floor() as usize).min(n - 2);
    let base = i.saturating_sub(1).min(n - 4);
    let s = x - base as f64;
    let (v0, v1, v2, v3) = (
        values[base],
        values[base + 1],
        values[base + 2],
        values[base + 3],
    );
    // Lagrange basis on nodes 0,1,2,3.
    let l0 = -(s - 1.0) * (s - 2.0) * (s - 3.0) / 6.0;
    let l1 = s * (s - 2.0) * (s - 3.0) / 2.0;
    let l2 = -s * (s - 1.0) * (s - 3.0) / 2.0;
    let l3 = s * (s - 1.0) * (s - 2.0) / 6.0;
    v0 * l0 + v1 * l1 + v2 * l2 + v3 * l3
}
