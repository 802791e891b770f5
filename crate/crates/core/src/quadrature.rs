//! Quadrature on uniform samples and a double-exponential wrapper for
//! integrands with integrable endpoint singularities.

/// Composite Simpson rule over uniformly spaced samples.
///
/// An odd number of intervals closes with the 3/8 rule on the last three
/// cells; two samples fall back to the trapezoid.
pub fn simpson(values: &[f64], step: f64) -> f64 {
    let n = values.len();
    match n {
        0 | 1 => 0.0,
        2 => 0.5 * step * (values[0] + values[1]),
        _ => {
            let intervals = n - 1;
            if intervals.is_multiple_of(2) {
                simpson_even(values, step)
            } else if intervals == 3 {
                three_eighths(values, step)
            } else {
                simpson_even(&values[..n - 3], step) + three_eighths(&values[n - 4..], step)
            }
        }
    }
}

fn simpson_even(values: &[f64], step: f64) -> f64 {
    let n = values.len();
    debug_assert!(n % 2 == 1);
    let mut odd = 0.0;
    let mut even = 0.0;
    for (i, &v) in values.iter().enumerate().take(n - 1).skip(1) {
        if i % 2 == 1 {
            odd += v;
        } else {
            even += v;
        }
    }
    step / 3.0 * (values[0] + 4.0 * odd + 2.0 * even + values[n - 1])
}

fn three_eighths(v: &[f64], step: f64) -> f64 {
    3.0 * step / 8.0 * (v[0] + 3.0 * v[1] + 3.0 * v[2] + v[3])
}

/// Tanh-sinh integration of `f` over `[a, b]` to an absolute tolerance.
/// Endpoint singularities such as `ln(u)` at `u = 0` are handled.
pub fn tanh_sinh(f: impl Fn(f64) -> f64, a: f64, b: f64, abs_tol: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    quadrature::double_exponential::integrate(f, a, b, abs_tol).integral
}

/// Tanh-sinh over `[a, b]` split into `panels` equal pieces.
pub fn tanh_sinh_panels(
    f: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    panels: usize,
    abs_tol: f64,
) -> f64 {
    if b <= a {
        return 0.0;
    }
    let panels = panels.max(1);
    let w = (b - a) / panels as f64;
    let tol = abs_tol / panels as f64;
    (0..panels)
        .map(|k| {
            let lo = a + k as f64 * w;
            let hi = if k + 1 == panels { b } else { lo + w };
            tanh_sinh(&f, lo, hi, tol)
        })
        .sum()
}
