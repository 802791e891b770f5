//! Vacuum two-point function on a worldline and the retarded products built
//! from it up to second order, together with their renormalized extension.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::window::{SmoothProfile, MAX_DERIVATIVE};
use crate::error::{Error, Result};
use crate::quadrature::tanh_sinh_panels;

/// `7!`.
pub const FACTORIAL_7: f64 = 5040.0;

/// Prefactor `1/(4 pi^2)` of the restricted two-point function.
pub fn two_point_prefactor() -> f64 {
    1.0 / (4.0 * PI * PI)
}

/// Coefficient `9/pi^4` of the `(x1 - x0)^-8` term of the unextended product.
pub fn vacuum_coefficient() -> f64 {
    9.0 / PI.powi(4)
}

/// Coefficient `6/pi^2` of the mixed `(x1 - x0)^-4` term. It does not enter
/// vacuum moments at second order and is kept as stated.
pub fn mixed_coefficient() -> f64 {
    6.0 / (PI * PI)
}

/// `9 / (7! pi^4)`, the weight of `d^8 [ϑ ln]` in the extended product.
pub fn extended_vacuum_coefficient() -> f64 {
    vacuum_coefficient() / FACTORIAL_7
}

/// `1/(4 pi^2 (t - t' - i eps)^2)` at finite regulator `eps`.
///
/// Only for cross-checks: production paths never sample kernels at finite
/// `eps`.
pub fn restricted_two_point(t: f64, t_prime: f64, eps: f64) -> Complex64 {
    let z = Complex64::new(t - t_prime, -eps);
    two_point_prefactor() / (z * z)
}

/// `ϑ(u) ln(u)`.
pub fn theta_log(u: f64) -> f64 {
    if u > 0.0 {
        u.ln()
    } else {
        0.0
    }
}

/// Second-order retarded product `^0r(x1, x0)` away from the diagonal for
/// classical field derivatives `phidot1 = φ̇(x1)`, `phidot0 = φ̇(x0)`.
///
/// Returns `None` on the diagonal, where only the extension is defined, and
/// exactly zero when `x1 < x0`.
pub fn unextended_product(x1: f64, x0: f64, phidot1: f64, phidot0: f64) -> Option<f64> {
    if x1 == x0 {
        return None;
    }
    if x1 < x0 {
        return Some(0.0);
    }
    let d = x1 - x0;
    let d4 = d * d * d * d;
    Some(
        vacuum_coefficient() / (d4 * d4)
            + mixed_coefficient() / d4 * phidot1 * phidot0
            + phidot1 * phidot1 * phidot0 * phidot0,
    )
}

/// First-order product `r(x0) = φ̇²(x0)`.
pub fn first_order_product(phidot0: f64) -> f64 {
    phidot0 * phidot0
}

/// Coefficients of the `δ^(α)` counterterms fixing the extension to the diagonal.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct RenormConstants {
    /// `a_0 ..= a_7`, multiplying `δ^(α)(x1 - x0)`.
    pub a: [f64; 8],
    /// `b_0 ..= b_3`, multiplying `δ^(α)(x1 - x0) φ̇(x1) φ̇(x0)`. Stored only: the
    /// terms they multiply have vanishing vacuum expectation.
    pub b: [f64; 4],
}

impl RenormConstants {
    pub fn validate(&self) -> Result<()> {
        if let Some(i) = self.a.iter().position(|v| !v.is_finite()) {
            return Err(Error::config(format!("renorm.a[{i}]"), "must be finite"));
        }
        if let Some(i) = self.b.iter().position(|v| !v.is_finite()) {
            return Err(Error::config(format!("renorm.b[{i}]"), "must be finite"));
        }
        Ok(())
    }
}

/// Pairs the c-number part of the extended second-order product with a
/// smooth function `h` of the difference variable `u = x1 - x0`:
///
/// `-(9/(7! pi^4)) ∫_0^∞ ln(u) h^(8)(u) du + Σ_α (-1)^α a_α h^(α)(0)`.
///
/// The distributional eighth derivative of `ϑ ln` is moved onto `h`.
pub fn c_number_kernel_pairing(h: &impl SmoothProfile, rc: &RenormConstants) -> Result<f64> {
    if h.resolved_order() < MAX_DERIVATIVE {
        return Err(Error::Resolution(format!(
            "kernel pairing needs 8 derivatives, profile resolves {}",
            h.resolved_order()
        )));
    }
    rc.validate()?;
    let (lo, hi) = h.support();
    let log_part = if hi > 0.0 {
        -extended_vacuum_coefficient() * log_moment(h, lo, hi)
    } else {
        0.0
    };
    let delta_part: f64 =
        rc.a.iter()
            .enumerate()
            .map(|(alpha, &a)| {
                if a == 0.0 {
                    0.0
                } else {
                    let sign = if alpha % 2 == 0 { 1.0 } else { -1.0 };
                    sign * a * h.derivative(alpha, 0.0)
                }
            })
            .sum();
    Ok(log_part + delta_part)
}

/// `∫_0^hi ln(u) h^(8)(u) du` for `h` vanishing to all orders at `hi`.
///
/// Past a split point `c` the eight derivatives are moved back off `h` by parts,
/// leaving boundary terms at `c` and `-7! ∫_c^hi h/u^8`, which avoids the heavy
/// cancellation in `h^(8)` near the support edge.
fn log_moment(h: &impl SmoothProfile, lo: f64, hi: f64) -> f64 {
    let c = if lo > 0.0 { lo } else { 0.5 * hi };
    let tail = |u: f64| h.value(u) / u.powi(8);
    let tail_scale = sampled_scale(&tail, c, hi);
    let mut total = -FACTORIAL_7 * tanh_sinh_panels(tail, c, hi, 16, 1e-15 * tail_scale);
    if lo <= 0.0 {
        let near = |u: f64| theta_log(u) * h.derivative(MAX_DERIVATIVE, u);
        let near_scale = sampled_scale(&near, 0.0, c);
        total += tanh_sinh_panels(near, 0.0, c, 8, 1e-15 * near_scale);
        // Σ_j (-1)^(j+1) g_j(c) h^(7-j)(c), g_j the j-th derivative of ln.
        let mut g = c.ln();
        let mut fact = 1.0;
        for j in 0..MAX_DERIVATIVE {
            if j > 0 {
                g = if j % 2 == 1 { 1.0 } else { -1.0 } * fact / c.powi(j as i32);
                fact *= j as f64;
            }
            let sign = if j % 2 == 0 { -1.0 } else { 1.0 };
            total += sign * g * h.derivative(MAX_DERIVATIVE - 1 - j, c);
        }
    }
    total
}

/// Rough magnitude of `∫ |f|` over `[a, b]`, used to set absolute tolerances.
pub(crate) fn sampled_scale(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let n = 64;
    let w = (b - a) / n as f64;
    let s: f64 = (0..n)
        .map(|k| f(a + (k as f64 + 0.5) * w).abs())
        .sum::<f64>()
        * w;
    if s > 0.0 {
        s
    } else {
        f64::MIN_POSITIVE
    }
}

#[cfg(test)]
mod tests {
    use super::super::window::MollifierBump;
    use super::*;

    #[test]
    fn two_point_limits() {
        let v = restricted_two_point(1.0, 0.0, 0.0);
        assert!((v.re - two_point_prefactor()).abs() < 1e-16);
        // Symmetric part is even in the separation.
        let a = restricted_two_point(0.3, 0.0, 1e-6);
        let b = restricted_two_point(0.0, 0.3, 1e-6);
        assert!((a.re - b.re).abs() < 1e-9 * a.re);
    }

    #[test]
    fn commutator_limit_is_derivative_of_delta() {
        // ∫ [Ω(t,0) - Ω(0,t)] g(t) dt -> i g'(0) / (2 pi) as eps -> 0.
        let g = |t: f64| (-(t - 0.3) * (t - 0.3)).exp();
        let dg0 = 0.6 * (-0.09f64).exp();
        let expected = dg0 / (2.0 * PI);
        let mut last_err = f64::INFINITY;
        for &eps in &[1e-1, 1e-2, 1e-3] {
            let f = |t: f64| {
                (restricted_two_point(t, 0.0, eps) - restricted_two_point(0.0, t, eps)).im * g(t)
            };
            let v = tanh_sinh_panels(f, -8.0, 8.0, 400, 1e-13);
            let err = (v - expected).abs();
            // The regulated pairing approaches the limit linearly in eps.
            assert!(err < last_err);
            assert!(err < 3.0 * eps * expected.abs(), "eps {eps}: err {err}");
            last_err = err;
        }
    }

    #[test]
    fn unextended_product_is_retarded() {
        assert_eq!(unextended_product(0.0, 1.0, 2.0, 3.0), Some(0.0));
        assert_eq!(unextended_product(1.0, 1.0, 2.0, 3.0), None);
        let v = unextended_product(2.0, 1.0, 0.0, 0.0).unwrap();
        assert!((v - vacuum_coefficient()).abs() < 1e-15);
        let v = unextended_product(2.0, 1.0, 1.0, 1.0).unwrap();
        assert!((v - vacuum_coefficient() - mixed_coefficient() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn pairing_vanishes_for_past_supported_profiles() {
        let h = MollifierBump::new(-2.0, 1.0, 1.0).unwrap();
        let rc = RenormConstants {
            a: [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0],
            ..Default::default()
        };
        assert_eq!(c_number_kernel_pairing(&h, &rc).unwrap(), 0.0);
    }

    #[test]
    fn delta_term_pairs_with_value_at_origin() {
        // Supported in u < 0 except for the value at the origin region.
        let h = MollifierBump::with_peak(0.0, 0.5, 1.0).unwrap();
        let zero = c_number_kernel_pairing(&h, &RenormConstants::default()).unwrap();
        let rc = RenormConstants {
            a: [2.5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
            ..Default::default()
        };
        let with = c_number_kernel_pairing(&h, &rc).unwrap();
        assert!((with - zero - 2.5).abs() < 1e-12);
    }

    struct LowOrder;
    impl SmoothProfile for LowOrder {
        fn derivative(&self, _: usize, _: f64) -> f64 {
            0.0
        }
        fn resolved_order(&self) -> usize {
            4
        }
        fn support(&self) -> (f64, f64) {
            (0.0, 1.0)
        }
    }

    #[test]
    fn unresolved_profile_is_rejected() {
        assert!(matches!(
            c_number_kernel_pairing(&LowOrder, &RenormConstants::default()),
            Err(Error::Resolution(_))
        ));
    }
}
