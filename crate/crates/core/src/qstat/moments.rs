//! Mean and variance of the smeared fluctuation field up to second order in
//! the coupling, on flat background in the vacuum.

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::kernels::{extended_vacuum_coefficient, sampled_scale, RenormConstants, FACTORIAL_7};
use super::smearing::{Profile, TestFunction};
use super::window::{CouplingWindow, MollifierBump, SmoothProfile};
use crate::error::{Error, Result};
use crate::green::GreenOperator;
use crate::grid::Trajectory;
use crate::quadrature::{simpson, tanh_sinh_panels};

/// Relative level of `p^3 |f^(p)|^2` below which the frequency integral is truncated.
pub const SPECTRAL_CUTOFF: f64 = 1e-14;

/// Consecutive panel ends that must sit below the cutoff before truncating,
/// so that isolated zeros of the transform do not end the integral early.
const CUTOFF_RUN: usize = 8;

const MAX_PANELS: usize = 200_000;

/// Sign in front of the first-order term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    Plus,
    #[default]
    Minus,
}

impl Sign {
    pub fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// Normalization choices that the field equations leave open.
///
/// `coupling_scale` multiplies the coupling at every order: `1` reproduces
/// the moment formulas as stated for coupling `λ`, `1/3` carries the factor
/// of the `φ̈ + (λ/3) φ̇² φ = 0` normalization. The first order picks up
/// `sign * coupling_scale`, the second order `coupling_scale^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Conventions {
    pub coupling_scale: f64,
    pub first_order_sign: Sign,
}

impl Default for Conventions {
    fn default() -> Self {
        Self {
            coupling_scale: 1.0,
            first_order_sign: Sign::Minus,
        }
    }
}

/// `φ0^2 / (π^2 7!)`.
fn variance_prefactor(phi0: f64) -> f64 {
    phi0 * phi0 / (PI * PI * FACTORIAL_7)
}

/// Adiabatic-limit variance `(φ0²/π²)(1/7!) ∫_0^∞ p³ |f^(p)|² dp`.
///
/// Closed form for the Gaussian profile (`∫ p³ e^{-τ²p²/2} dp = 2/τ⁴`),
/// frequency quadrature for sampled profiles.
pub fn variance_adiabatic(f: &TestFunction, phi0: f64) -> Result<f64> {
    f.validate()?;
    if !phi0.is_finite() {
        return Err(Error::Precondition("phi0 must be finite".into()));
    }
    match f.profile {
        Profile::Gaussian => {
            let n = f.normalization;
            Ok(variance_prefactor(phi0) * n * n * 2.0 / f.tau.powi(4))
        }
        Profile::Sampled { .. } => variance_spectral_quadrature(f, phi0),
    }
}

/// Second-order-truncated variance `<φ1(f) ⋆ φ1(f)>` in the adiabatic limit.
/// Same quantity as [`variance_adiabatic`].
pub fn variance_first_order_spectral(f: &TestFunction, phi0: f64) -> Result<f64> {
    variance_adiabatic(f, phi0)
}

/// Evaluates the spectral variance integral numerically for any profile.
///
/// Panels of width `π / (2 L)`, with `L` the support length, are integrated
/// by 16-point Gauss-Legendre until `p³|f^|²` has stayed below
/// `SPECTRAL_CUTOFF` times its running peak for `CUTOFF_RUN` panel ends.
/// Smooth profiles decay faster than any power, so the neglected tail is
/// of the order of the cutoff times the peak width.
pub fn variance_spectral_quadrature(f: &TestFunction, phi0: f64) -> Result<f64> {
    f.validate()?;
    if phi0 == 0.0 || f.is_zero() {
        return Ok(0.0);
    }
    let (integral, _) = spectral_moment(f)?;
    Ok(variance_prefactor(phi0) * integral)
}

/// `(∫_0^{p_max} p³|f^|² dp, p_max)`.
pub fn spectral_moment(f: &TestFunction) -> Result<(f64, f64)> {
    let rule = gauss_legendre();
    let dp = PI / (2.0 * f.profile_width());
    let nyquist = f.nyquist();
    let density = |p: f64| p * p * p * f.spectral_density(p);
    let mut total = 0.0;
    let mut peak = 0.0f64;
    let mut quiet = 0;
    for k in 0..MAX_PANELS {
        let a = k as f64 * dp;
        let b = a + dp;
        if b > nyquist {
            return Err(Error::Resolution(format!(
                "spectrum of the smearing function has not decayed below {SPECTRAL_CUTOFF:e} \
                 of its peak before the sampling limit p = {nyquist:.3}"
            )));
        }
        total += rule.integrate(a, b, density);
        let end = density(b);
        peak = peak.max(end);
        if end <= SPECTRAL_CUTOFF * peak {
            quiet += 1;
            if quiet >= CUTOFF_RUN {
                return Ok((total, b));
            }
        } else {
            quiet = 0;
        }
    }
    Err(Error::Resolution(
        "frequency integral did not converge within the panel budget".into(),
    ))
}

/// Spectral variance from an arbitrary transform truncated at `p_max`.
///
/// Real smearing functions satisfy `f^(-p) = conj(f^(p))`; a transform that
/// violates it is rejected.
pub fn variance_from_transform(
    transform: impl Fn(f64) -> Complex64,
    phi0: f64,
    p_max: f64,
) -> Result<f64> {
    if !(p_max > 0.0) || !p_max.is_finite() {
        return Err(Error::Precondition(
            "p_max must be positive and finite".into(),
        ));
    }
    let checks = 257;
    for k in 0..checks {
        let p = p_max * k as f64 / (checks - 1) as f64;
        let a = transform(p);
        let b = transform(-p).conj();
        if (a - b).norm() > 1e-10 * a.norm().max(b.norm()).max(1e-300) {
            return Err(Error::Precondition(format!(
                "smearing function is not real: transform fails conjugate symmetry at p = {p}"
            )));
        }
    }
    let rule = gauss_legendre();
    let panels = 512;
    let w = p_max / panels as f64;
    let integral: f64 = (0..panels)
        .map(|k| {
            let a = k as f64 * w;
            rule.integrate(a, a + w, |p| p * p * p * transform(p).norm_sqr())
        })
        .sum();
    Ok(variance_prefactor(phi0) * integral)
}

fn gauss_legendre() -> GaussLegendre {
    GaussLegendre::new(NonZeroUsize::new(16).expect("nonzero degree"))
}

/// Contributions to `<φ(f)>` order by order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanBreakdown {
    /// `φ0 ∫ f`.
    pub zeroth: f64,
    /// Vanishes in the vacuum.
    pub first: f64,
    pub second: f64,
    pub total: f64,
}

/// Convolution kernel of the second-order mean at `p`:
///
/// `9/(7!π⁴) [8 (λ⁽⁷⁾ ∗ ϑ ln)(p) - (λ⁽⁸⁾ ∗ S ϑ ln)(p)] + Σ_{α≤6} (-1)^α a_α λ⁽α⁾(p)`
///
/// with `S(u) = u` on flat background.
pub fn mean_kernel(bump: &MollifierBump, rc: &RenormConstants, p: f64) -> f64 {
    let (lo, hi) = bump.support();
    let mut k = 0.0;
    let upper = p - lo;
    if upper > 0.0 && p - hi < upper {
        let a = (p - hi).max(0.0);
        let integrand = |u: f64| {
            let d = bump.derivatives(p - u);
            u.ln() * (8.0 * d[7] - u * d[8])
        };
        let scale = sampled_scale(&integrand, a, upper);
        k +=
            extended_vacuum_coefficient() * tanh_sinh_panels(integrand, a, upper, 8, 1e-15 * scale);
    }
    let d = bump.derivatives(p);
    for (alpha, &a) in rc.a.iter().enumerate().take(7) {
        if a != 0.0 {
            let sign = if alpha % 2 == 0 { 1.0 } else { -1.0 };
            k += sign * a * d[alpha];
        }
    }
    k
}

/// `<φ(f)>` to second order in the coupling.
///
/// The zeroth order is `φ0 ∫f` and the first order vanishes. The second order
/// integrates `f_R λ K` over the grid of `green`, with `K` from
/// [`mean_kernel`]. In the adiabatic limit all derivatives of `λ` vanish and
/// only `a_0 φ0 ∫ f_R` survives; that term grows with the grid interval and
/// is skipped when `a_0 = 0`.
pub fn mean_phi(
    f: &TestFunction,
    lam: &CouplingWindow,
    rc: &RenormConstants,
    phi0: f64,
    green: &GreenOperator,
    conventions: &Conventions,
) -> Result<MeanBreakdown> {
    f.validate()?;
    rc.validate()?;
    if !phi0.is_finite() {
        return Err(Error::Precondition("phi0 must be finite".into()));
    }
    let grid = *green.grid();
    lam.check_resolved(&grid)?;
    let zeroth = phi0 * f.integral();
    let coupling2 = conventions.coupling_scale * conventions.coupling_scale;

    let second = if phi0 == 0.0 || f.is_zero() {
        0.0
    } else {
        match lam {
            CouplingWindow::Adiabatic => {
                if rc.a[0] == 0.0 {
                    0.0
                } else {
                    let fr = green.retarded_adjoint_apply(f)?;
                    coupling2 * phi0 * rc.a[0] * simpson(fr.values(), grid.step())
                }
            }
            CouplingWindow::Bump(bump) => {
                let (lo, hi) = bump.support();
                let first = grid.nearest_index(lo).saturating_sub(1);
                let last = (grid.nearest_index(hi) + 1).min(grid.len() - 1);
                let fr = green.retarded_adjoint_on(f, first, last)?;
                let integrand: Vec<f64> = (first..=last)
                    .zip(&fr)
                    .map(|(i, &frv)| {
                        let p = grid.time(i);
                        let lv = bump.value(p);
                        if lv == 0.0 || frv == 0.0 {
                            0.0
                        } else {
                            frv * lv * mean_kernel(bump, rc, p)
                        }
                    })
                    .collect();
                coupling2 * phi0 * simpson(&integrand, grid.step())
            }
        }
    };
    Ok(MeanBreakdown {
        zeroth,
        first: 0.0,
        second,
        total: zeroth + second,
    })
}

/// Classical weight `w(x0) = φ0 f_R(x0) λ(x0)` multiplying `φ̇²(x0)` in the
/// first-order field.
pub fn first_order_field_kernel(
    f: &TestFunction,
    lam: &CouplingWindow,
    phi0: f64,
    green: &GreenOperator,
) -> Result<Trajectory> {
    if let CouplingWindow::Bump(b) = lam {
        b.validate()?;
    }
    let fr = green.retarded_adjoint_apply(f)?;
    let grid = green.grid();
    let values = fr
        .values()
        .iter()
        .enumerate()
        .map(|(i, &v)| phi0 * v * lam.value(grid.time(i)))
        .collect();
    Trajectory::on_grid(grid, values)
}

/// First-order term `sign * coupling_scale * ∫ w φ̇²` for a classical sample of `φ̇²`.
pub fn first_order_term(
    weight: &Trajectory,
    phidot_sq: &Trajectory,
    conventions: &Conventions,
) -> Result<f64> {
    if weight.len() != phidot_sq.len() || weight.step() != phidot_sq.step() {
        return Err(Error::config(
            "phidot_sq",
            "must be sampled on the same grid as the weight",
        ));
    }
    let prod: Vec<f64> = weight
        .values()
        .iter()
        .zip(phidot_sq.values())
        .map(|(w, p)| w * p)
        .collect();
    Ok(conventions.first_order_sign.factor()
        * conventions.coupling_scale
        * simpson(&prod, weight.step()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::congruence::Potential;
    use crate::grid::ProperTimeGrid;

    fn gaussian() -> TestFunction {
        TestFunction::gaussian(0.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn zero_function_has_zero_variance() {
        let f = gaussian().scaled(0.0);
        assert_eq!(variance_adiabatic(&f, 1.0).unwrap(), 0.0);
        let g = ProperTimeGrid::new(-1.0, 1.0, 101).unwrap();
        let s = TestFunction::sampled(&g, vec![0.0; 101]).unwrap();
        assert_eq!(variance_adiabatic(&s, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn gaussian_closed_form_and_quadrature_agree() {
        for tau in [0.5, 1.0, 3.0] {
            let f = TestFunction::gaussian(0.2, tau, 1.3).unwrap();
            let a = variance_adiabatic(&f, 0.7).unwrap();
            let b = variance_spectral_quadrature(&f, 0.7).unwrap();
            assert!(((a - b) / a).abs() < 1e-12, "tau {tau}: {a} vs {b}");
        }
    }

    #[test]
    fn dilation_quarter_power() {
        let f = gaussian();
        let v1 = variance_adiabatic(&f, 1.0).unwrap();
        let v2 = variance_adiabatic(&f.dilate(2.0).unwrap(), 1.0).unwrap();
        assert!((v2 * 16.0 - v1).abs() < 1e-15 * v1);
    }

    #[test]
    fn sampled_profile_with_jumps_is_unresolved() {
        let g = ProperTimeGrid::new(-1.0, 2.0, 301).unwrap();
        let f =
            TestFunction::sampled_from_fn(&g, |t| if (0.0..=1.0).contains(&t) { 1.0 } else { 0.0 })
                .unwrap();
        assert!(matches!(
            variance_adiabatic(&f, 1.0),
            Err(Error::Resolution(_))
        ));
    }

    #[test]
    fn complex_transform_rejected() {
        let bad = |p: f64| Complex64::new((-p * p).exp(), 0.3 * (-p * p).exp());
        assert!(matches!(
            variance_from_transform(bad, 1.0, 5.0),
            Err(Error::Precondition(_))
        ));
        let good = |p: f64| Complex64::from_polar((-p * p / 4.0).exp(), -0.5 * p);
        let v = variance_from_transform(good, 1.0, 12.0).unwrap();
        let expected = 2.0 / (PI * PI * FACTORIAL_7);
        assert!(((v - expected) / expected).abs() < 1e-10);
    }

    #[test]
    fn adiabatic_mean_is_zeroth_order() {
        let grid = ProperTimeGrid::new(-8.0, 8.0, 201).unwrap();
        let g = GreenOperator::new(Potential::zero(grid));
        let m = mean_phi(
            &gaussian(),
            &CouplingWindow::Adiabatic,
            &RenormConstants::default(),
            2.0,
            &g,
            &Conventions::default(),
        )
        .unwrap();
        assert_eq!(m.second, 0.0);
        assert_eq!(m.total, 2.0);
    }

    #[test]
    fn adiabatic_a0_pairs_with_adjoint() {
        let grid = ProperTimeGrid::new(-8.0, 8.0, 801).unwrap();
        let g = GreenOperator::new(Potential::zero(grid));
        let rc = RenormConstants {
            a: [0.5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
            ..Default::default()
        };
        let m = mean_phi(
            &gaussian(),
            &CouplingWindow::Adiabatic,
            &rc,
            1.0,
            &g,
            &Conventions::default(),
        )
        .unwrap();
        // ∫_{-8}^{8} f_R = ∫ f(y) (y+8)^2/2 dy = (1/2 + 64)/2 for the unit Gaussian.
        let expected = 0.5 * (0.5 + 64.0) / 2.0;
        assert!((m.second - expected).abs() < 1e-6, "{}", m.second);
    }

    #[test]
    fn vanishing_phi0_vanishes_everywhere() {
        let grid = ProperTimeGrid::new(-8.0, 8.0, 4001).unwrap();
        let g = GreenOperator::new(Potential::zero(grid));
        let lam = CouplingWindow::Bump(MollifierBump::with_peak(-1.0, 1.0, 1.0).unwrap());
        let rc = RenormConstants {
            a: [0.1; 8],
            b: [0.2; 4],
        };
        let m = mean_phi(&gaussian(), &lam, &rc, 0.0, &g, &Conventions::default()).unwrap();
        assert_eq!((m.zeroth, m.first, m.second, m.total), (0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn underresolved_window_rejected() {
        let grid = ProperTimeGrid::new(-8.0, 8.0, 401).unwrap();
        let g = GreenOperator::new(Potential::zero(grid));
        let lam = CouplingWindow::Bump(MollifierBump::with_peak(0.0, 1.0, 1.0).unwrap());
        let r = mean_phi(
            &gaussian(),
            &lam,
            &RenormConstants::default(),
            1.0,
            &g,
            &Conventions::default(),
        );
        assert!(matches!(r, Err(Error::Resolution(_))));
    }

    #[test]
    fn first_order_weight_examples() {
        let grid = ProperTimeGrid::new(-1.0, 2.0, 3001).unwrap();
        let g = GreenOperator::new(Potential::zero(grid));
        let plateau = TestFunction::sampled_from_fn(&grid, |t| {
            if (t.abs() < 1e-9) || ((t - 1.0).abs() < 1e-9) {
                0.5
            } else if t > 0.0 && t < 1.0 {
                1.0
            } else {
                0.0
            }
        })
        .unwrap();
        let w = first_order_field_kernel(&plateau, &CouplingWindow::Adiabatic, 2.0, &g).unwrap();
        assert!((w.values()[0] - 3.0).abs() < 5.0 * grid.step());
        for (t, v) in w.points() {
            if t > 1.0 {
                assert_eq!(v, 0.0);
            }
        }
        let w0 = first_order_field_kernel(&plateau, &CouplingWindow::Adiabatic, 0.0, &g).unwrap();
        assert!(w0.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn first_order_term_sign_and_scale() {
        let grid = ProperTimeGrid::new(0.0, 1.0, 11).unwrap();
        let w = Trajectory::sample(&grid, |_| 1.0);
        let p = Trajectory::sample(&grid, |_| 2.0);
        let c = Conventions::default();
        assert!((first_order_term(&w, &p, &c).unwrap() + 2.0).abs() < 1e-14);
        let c = Conventions {
            coupling_scale: 1.0 / 3.0,
            first_order_sign: Sign::Plus,
        };
        assert!((first_order_term(&w, &p, &c).unwrap() - 2.0 / 3.0).abs() < 1e-14);
    }
}
