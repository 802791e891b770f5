//! Retarded fundamental solution of `d²/dt² + V` on a proper-time grid.
//!
//! The operator is built from the bi-solution `S(t, s)`: the solution of
//! `u'' + V u = 0` in `t` with `u(s) = 0`, `u'(s) = 1`. The retarded kernel is
//! `R_V(t, s) = ϑ(t - s) S(t, s)`. Columns `S(·, t_j)` are integrated on demand
//! and cached.

use std::sync::OnceLock;

use rayon::prelude::*;

use crate::congruence::Potential;
use crate::error::{Error, Result};
use crate::grid::{interpolate, midpoints, ProperTimeGrid, Trajectory};
use crate::ode::{rk4_step, second_order_linear, Cell};
use crate::qstat::TestFunction;
use crate::quadrature::simpson;

/// Relative distance below which a time is identified with a grid node.
const NODE_SNAP: f64 = 1e-9;

/// Bi-solution `S(·, x2)` sampled on the potential's grid.
///
/// `x2` may fall between nodes, in which case partial RK4 steps reach the
/// neighbouring nodes first.
pub fn bisolution(potential: &Potential, x2: f64) -> Result<Trajectory> {
    let grid = potential.grid();
    if !grid.contains(x2) {
        return Err(Error::Domain(format!(
            "source point {x2} outside [{}, {}]",
            grid.t_start(),
            grid.t_end()
        )));
    }
    let q = potential.values();
    let q_mid = midpoints(q);
    let h = grid.step();
    let n = grid.len();
    let x = (x2 - grid.t_start()) / h;
    let j = x.round();
    if (x - j).abs() < NODE_SNAP {
        let values = solve_column(q, &q_mid, h, j as usize);
        return Trajectory::on_grid(grid, values);
    }

    let lo = x.floor() as usize;
    let hi = lo + 1;
    let v_at = |t: f64| interpolate(grid.t_start(), h, q, t);
    let rhs = |c: f64, y: &[f64; 2]| [y[1], -c * y[0]];

    let partial = |to: usize| -> [f64; 2] {
        let t_to = grid.time(to);
        let d = t_to - x2;
        let cell = Cell {
            start: v_at(x2),
            mid: v_at(x2 + 0.5 * d),
            end: q[to],
        };
        rk4_step([0.0, 1.0], d, cell, rhs)
    };
    let mut values = second_order_linear(q, &q_mid, h, lo, 0, partial(lo));
    values.extend(second_order_linear(q, &q_mid, h, hi, n - 1, partial(hi)));
    Trajectory::on_grid(grid, values)
}

fn solve_column(q: &[f64], q_mid: &[f64], h: f64, j: usize) -> Vec<f64> {
    let n = q.len();
    let mut col = second_order_linear(q, q_mid, h, j, 0, [0.0, 1.0]);
    col.pop();
    col.extend(second_order_linear(q, q_mid, h, j, n - 1, [0.0, 1.0]));
    col
}

/// Retarded Green operator of `d²/dt² + V` with a lazily filled bi-solution table.
pub struct GreenOperator {
    potential: Potential,
    q_mid: Vec<f64>,
    columns: Vec<OnceLock<Vec<f64>>>,
}

impl std::fmt::Debug for GreenOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GreenOperator")
            .field("grid", self.potential.grid())
            .field(
                "cached_columns",
                &self.columns.iter().filter(|c| c.get().is_some()).count(),
            )
            .finish()
    }
}

impl GreenOperator {
    pub fn new(potential: Potential) -> Self {
        let n = potential.grid().len();
        Self {
            q_mid: midpoints(potential.values()),
            columns: (0..n).map(|_| OnceLock::new()).collect(),
            potential,
        }
    }

    /// Builds the operator and fills every column in parallel.
    pub fn eager(potential: Potential) -> Self {
        let g = Self::new(potential);
        (0..g.columns.len()).into_par_iter().for_each(|j| {
            g.column(j);
        });
        g
    }

    pub fn grid(&self) -> &ProperTimeGrid {
        self.potential.grid()
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    /// `S(t_i, t_j)` for all `i`.
    pub fn column(&self, j: usize) -> &[f64] {
        self.columns[j].get_or_init(|| {
            solve_column(self.potential.values(), &self.q_mid, self.grid().step(), j)
        })
    }

    /// `S(t_i, t_j)`.
    pub fn bisolution_entry(&self, i: usize, j: usize) -> f64 {
        self.column(j)[i]
    }

    /// Index range `[lo, hi]` of grid nodes covering the support of `f`.
    fn support_indices(&self, f: &TestFunction) -> Result<(usize, usize)> {
        let grid = self.grid();
        let (a, b) = f.support();
        let slack = 1e-12 * (grid.t_end() - grid.t_start());
        if a < grid.t_start() - slack || b > grid.t_end() + slack {
            return Err(Error::Domain(format!(
                "smearing support [{a}, {b}] escapes grid [{}, {}]",
                grid.t_start(),
                grid.t_end()
            )));
        }
        let h = grid.step();
        let last = grid.len() - 1;
        let lo = (((a - grid.t_start()) / h).floor().max(0.0) as usize).min(last);
        let hi = (((b - grid.t_start()) / h).ceil().max(0.0) as usize).min(last);
        Ok((lo, hi))
    }

    /// `(R_V f)(t) = ∫ ϑ(t - s) S(t, s) f(s) ds` at every grid node.
    ///
    /// The upper integration limit is always a node, so the kink of the
    /// kernel at `s = t` sits on a cell boundary.
    pub fn retarded_apply(&self, f: &TestFunction) -> Result<Trajectory> {
        let (lo, hi) = self.support_indices(f)?;
        let grid = self.grid();
        let fv = f.sample_on(grid);
        let h = grid.step();
        // Columns are shared by many rows; fill them up front.
        (lo..=hi).into_par_iter().for_each(|k| {
            self.column(k);
        });
        let values: Vec<f64> = (0..grid.len())
            .into_par_iter()
            .map(|i| {
                if i <= lo {
                    return 0.0;
                }
                let top = i.min(hi);
                let integrand: Vec<f64> = (lo..=i)
                    .map(|k| {
                        if k <= top {
                            self.column(k)[i] * fv[k]
                        } else {
                            0.0
                        }
                    })
                    .collect();
                simpson(&integrand, h)
            })
            .collect();
        Trajectory::on_grid(grid, values)
    }

    /// Adjoint action `f_R(x) = ∫ ϑ(y - x) S(y, x) f(y) dy` at every grid node.
    pub fn retarded_adjoint_apply(&self, f: &TestFunction) -> Result<Trajectory> {
        let values = self.retarded_adjoint_on(f, 0, self.grid().len() - 1)?;
        Trajectory::on_grid(self.grid(), values)
    }

    /// `f_R` at nodes `first..=last` only; columns outside are never built.
    pub(crate) fn retarded_adjoint_on(
        &self,
        f: &TestFunction,
        first: usize,
        last: usize,
    ) -> Result<Vec<f64>> {
        let (lo, hi) = self.support_indices(f)?;
        let grid = self.grid();
        let fv = f.sample_on(grid);
        let h = grid.step();
        Ok((first..=last)
            .into_par_iter()
            .map(|j| {
                if j >= hi {
                    return 0.0;
                }
                let col = self.column(j);
                let start = j.max(lo);
                let mut integrand: Vec<f64> = Vec::with_capacity(hi - j + 1);
                integrand.extend((j..start).map(|_| 0.0));
                integrand.extend((start..=hi).map(|i| col[i] * fv[i]));
                simpson(&integrand, h)
            })
            .collect())
    }

    /// Retarded kernel `ϑ(t_i - t_j) S(t_i, t_j)`; exactly zero for `i < j`.
    pub fn retarded_entry(&self, i: usize, j: usize) -> f64 {
        if i < j {
            0.0
        } else {
            self.column(j)[i]
        }
    }

    /// `max |(d²/dt² + V)(R_V f) - f|` over interior nodes.
    pub fn verify_green(&self, f: &TestFunction) -> Result<f64> {
        if f.is_zero() {
            return Ok(0.0);
        }
        let u = self.retarded_apply(f)?;
        let grid = self.grid();
        let h = grid.step();
        let v = self.potential.values();
        let u = u.values();
        let residual = (1..grid.len() - 1)
            .map(|i| {
                let second = (u[i + 1] - 2.0 * u[i] + u[i - 1]) / (h * h);
                (second + v[i] * u[i] - f.eval(grid.time(i))).abs()
            })
            .fold(0.0, f64::max);
        Ok(residual)
    }

    /// Empirical bound `10 h² (‖f″‖∞ + ‖V‖∞ ‖f‖∞)` for [`Self::verify_green`].
    pub fn residual_bound(&self, f: &TestFunction) -> f64 {
        let grid = self.grid();
        let e = 1e-4 * f.tau.min(1.0);
        let mut d2: f64 = 0.0;
        let mut f_max: f64 = 0.0;
        for t in grid.times() {
            let c = f.eval(t);
            d2 = d2.max(((f.eval(t + e) - 2.0 * c + f.eval(t - e)) / (e * e)).abs());
            f_max = f_max.max(c.abs());
        }
        let v_max = self
            .potential
            .values()
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()));
        10.0 * grid.step().powi(2) * (d2 + v_max * f_max)
    }

    /// `max |S(t_i, t_j) + S(t_j, t_i)|` over pairs drawn from `indices`.
    pub fn antisymmetry_defect(&self, indices: &[usize]) -> f64 {
        let mut worst: f64 = 0.0;
        for &i in indices {
            for &j in indices {
                worst =
                    worst.max((self.bisolution_entry(i, j) + self.bisolution_entry(j, i)).abs());
            }
        }
        worst
    }

    /// `max |(S(t_{j+1}, t_j) - S(t_{j-1}, t_j)) / 2h - 1|` over interior `indices`.
    pub fn slope_defect(&self, indices: &[usize]) -> f64 {
        let n = self.grid().len();
        let h = self.grid().step();
        indices
            .iter()
            .filter(|&&j| j > 0 && j + 1 < n)
            .map(|&j| {
                let col = self.column(j);
                ((col[j + 1] - col[j - 1]) / (2.0 * h) - 1.0).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// Residual of [`GreenOperator::verify_green`] at one refinement level.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RefinementLevel {
    pub step: f64,
    pub residual: f64,
}

/// Result of a grid-refinement study of the inverse property.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RefinementStudy {
    pub levels: Vec<RefinementLevel>,
    /// Least-squares slope of `ln residual` against `ln step`.
    pub order: f64,
}

/// Runs [`GreenOperator::verify_green`] on `levels` successively halved grids.
pub fn refinement_study(
    coarse: ProperTimeGrid,
    levels: usize,
    potential: impl Fn(f64) -> f64,
    f: &TestFunction,
) -> Result<RefinementStudy> {
    let mut out = Vec::with_capacity(levels);
    let mut grid = coarse;
    for _ in 0..levels {
        let g = GreenOperator::new(Potential::from_fn(grid, &potential)?);
        out.push(RefinementLevel {
            step: grid.step(),
            residual: g.verify_green(f)?,
        });
        grid = grid.refined(2);
    }
    let order = fitted_order(&out);
    Ok(RefinementStudy { levels: out, order })
}

/// Slope of the least-squares line through `(ln step, ln residual)`.
pub fn fitted_order(levels: &[RefinementLevel]) -> f64 {
    let pts: Vec<(f64, f64)> = levels
        .iter()
        .map(|l| (l.step.ln(), l.residual.ln()))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}
