//! Classical fourth-order Runge-Kutta on uniform grids.
//!
//! Coefficient functions of the equations solved here are only known at grid
//! samples, so each step receives the coefficient at the start, midpoint and
//! end of the cell instead of a continuous time argument.

/// Coefficient values on one integration cell.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Cell<C> {
    pub start: C,
    pub mid: C,
    pub end: C,
}

/// One RK4 step of size `h` for `y' = rhs(c, y)`.
pub(crate) fn rk4_step<const N: usize, C: Copy>(
    y: [f64; N],
    h: f64,
    cell: Cell<C>,
    rhs: impl Fn(C, &[f64; N]) -> [f64; N],
) -> [f64; N] {
    let axpy = |a: &[f64; N], s: f64, b: &[f64; N]| -> [f64; N] {
        let mut out = *a;
        for (o, bi) in out.iter_mut().zip(b) {
            *o += s * bi;
        }
        out
    };
    let k1 = rhs(cell.start, &y);
    let k2 = rhs(cell.mid, &axpy(&y, 0.5 * h, &k1));
    let k3 = rhs(cell.mid, &axpy(&y, 0.5 * h, &k2));
    let k4 = rhs(cell.end, &axpy(&y, h, &k3));
    let mut out = y;
    for i in 0..N {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

/// Integrates `u'' + q(t) u = 0` across a sampled coefficient `q`, starting
/// at sample `from` with `(u, u')` and walking towards sample `to` in either
/// direction. Returns `u` at every sample between the two, in grid order.
pub(crate) fn second_order_linear(
    q: &[f64],
    q_mid: &[f64],
    step: f64,
    from: usize,
    to: usize,
    initial: [f64; 2],
) -> Vec<f64> {
    let rhs = |c: f64, y: &[f64; 2]| [y[1], -c * y[0]];
    let mut y = initial;
    if to >= from {
        let mut out = Vec::with_capacity(to - from + 1);
        out.push(y[0]);
        for i in from..to {
            let cell = Cell {
                start: q[i],
                mid: q_mid[i],
                end: q[i + 1],
            };
            y = rk4_step(y, step, cell, rhs);
            out.push(y[0]);
        }
        out
    } else {
        let mut out = Vec::with_capacity(from - to + 1);
        out.push(y[0]);
        for i in (to..from).rev() {
            let cell = Cell {
                start: q[i + 1],
                mid: q_mid[i],
                end: q[i],
            };
            y = rk4_step(y, -step, cell, rhs);
            out.push(y[0]);
        }
        out.reverse();
        out
    }
}
