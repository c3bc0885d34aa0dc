//! Off-resonance error machinery: the propagator-distance function f(alpha),
//! the six per-angle derivative bounds assembling to g(c2) in the on-resonance
//! case, and the commutator-series directional derivative with the final
//! on-transition bound.

use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, SQRT_2};

use crate::diag::diag_angles;
use crate::error::{Error, Result};
use crate::hamiltonian::{perturbed_hamiltonian, ReducedParams, RfPulse, SpinSystem};
use crate::operator::{expm_hermitian, ga_norm, scalar_part, Operator4};

/// Measured propagator distance against its analytic bound.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BoundReport {
    /// Measured f(1) = |exp(-i t H_eff) - exp(-i t H_eff^0)|^2 / 2.
    pub f1: f64,
    /// The analytic bound for these parameters.
    pub bound: f64,
    pub satisfied: bool,
    pub params: ReducedParams,
    pub omega1: f64,
    pub t: f64,
}

impl BoundReport {
    /// On-resonance case: f(1) against the six-term g(c2) (valid for c1 = 1,
    /// omega1 t <= pi/sqrt(2)).
    pub fn onres(sys: &SpinSystem, pulse: &RfPulse, t: f64) -> Result<BoundReport> {
        let params = ReducedParams::from_system(sys, pulse);
        let f1 = f_alpha(sys, pulse, t, 1.0)?;
        let bound = g_c2(params.c2)?;
        Ok(BoundReport { f1, bound, satisfied: f1 <= bound + 1e-12, params, omega1: pulse.omega1, t })
    }

    /// On-transition case at t = pi/omega1: f(1) against sqrt(8)/(|c2|-2|c1|).
    pub fn ontrn(sys: &SpinSystem, pulse: &RfPulse) -> Result<BoundReport> {
        let params = ReducedParams::from_system(sys, pulse);
        let t = PI / pulse.omega1;
        let f1 = f_alpha(sys, pulse, t, 1.0)?;
        let bound = ontrn_offres_bound(params.c1, params.c2)?;
        Ok(BoundReport { f1, bound, satisfied: f1 <= bound + 1e-12, params, omega1: pulse.omega1, t })
    }
}

/// f(alpha) = |exp(-i t H_eff^alpha) - exp(-i t H_eff^0)|^2 / 2 in the
/// ga-norm, which equals 1 - Re<exp(-i t H^alpha) exp(+i t H^0)>.
pub fn f_alpha(sys: &SpinSystem, pulse: &RfPulse, t: f64, alpha: f64) -> Result<f64> {
    let h_a = perturbed_hamiltonian(sys, pulse, alpha)?;
    let h_0 = perturbed_hamiltonian(sys, pulse, 0.0)?;
    let u_a = expm_hermitian(&h_a, t)?;
    let u_0 = expm_hermitian(&h_0, t)?;
    Ok(0.5 * ga_norm(&(u_a - u_0)).powi(2))
}

/// Scalar-part route for f(alpha); equal to [`f_alpha`] to roundoff and used
/// as its cross-check.
pub fn f_alpha_trace_route(sys: &SpinSystem, pulse: &RfPulse, t: f64, alpha: f64) -> Result<f64> {
    let h_a = perturbed_hamiltonian(sys, pulse, alpha)?;
    let h_0 = perturbed_hamiltonian(sys, pulse, 0.0)?;
    let u_a = expm_hermitian(&h_a, t)?;
    let u_0 = expm_hermitian(&h_0, t)?;
    Ok(1.0 - scalar_part(&(u_a * u_0.adjoint())).re)
}

/// The on-resonance off-resonance-error bound
///
///   g(c2) = 1/|c2| + 1/c2^2 + 1/(sqrt2 c2^2) + 1/(sqrt2 |c2| (|c2| - sqrt2))
///           + pi/(8 |c2|) + (pi/sqrt2)/(4 (|c2| - sqrt2)),
///
/// derived for c1 = 1 and omega1 t <= pi/sqrt(2). Requires |c2| > sqrt(2).
pub fn g_c2(c2: f64) -> Result<f64> {
    let a = c2.abs();
    if a <= SQRT_2 {
        return Err(Error::VacuousBound(format!(
            "g(c2) needs |c2| > sqrt(2), got {c2}"
        )));
    }
    Ok(1.0 / a
        + 1.0 / (a * a)
        + 1.0 / (SQRT_2 * a * a)
        + 1.0 / (SQRT_2 * a * (a - SQRT_2))
        + PI / (8.0 * a)
        + (PI / SQRT_2) / (4.0 * (a - SQRT_2)))
}

/// The six per-factor derivative terms of the propagator derivative bound,
/// either as analytic bounds or as finite-difference measurements. The mu/nu
/// entries are |d mu/d alpha| and |d nu/d alpha|, the kappa entries carry the
/// 1/sqrt(2) generator norm, and the lambda entries carry omega1 t/(2 sqrt2).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TermBounds {
    pub mu: f64,
    pub nu: f64,
    pub kappa_plus: f64,
    pub kappa_minus: f64,
    pub lambda_plus: f64,
    pub lambda_minus: f64,
}

impl TermBounds {
    pub fn sum(&self) -> f64 {
        self.mu + self.nu + self.kappa_plus + self.kappa_minus + self.lambda_plus + self.lambda_minus
    }
}

fn check_standing_assumptions(c1: f64, c2: f64) -> Result<()> {
    let one_c1 = 1.0 + c1 * c1;
    if !(2.0 <= one_c1 && one_c1 <= c2 * c2) {
        return Err(Error::AssumptionViolated(format!(
            "need 2 <= 1 + c1^2 <= c2^2, got c1 = {c1}, c2 = {c2}"
        )));
    }
    if c2.abs() <= SQRT_2 * c1.abs() {
        return Err(Error::AssumptionViolated(format!(
            "need |c2| > sqrt(2) |c1| for the kappa-/lambda- denominators, got c1 = {c1}, c2 = {c2}"
        )));
    }
    Ok(())
}

/// Analytic sup bounds over alpha in [0, 1] of the six derivative terms:
/// mu <= 1/|c2|, nu <= 1/(|c1| c2^2), kappa+ <= |c1|/(sqrt2 c2^2),
/// kappa- <= |c1|/(sqrt2 |c2| (|c2| - sqrt2 |c1|)),
/// lambda+ <= omega1 t/(4 sqrt2 |c2|),
/// lambda- <= omega1 t/(4 (|c2| - sqrt2 |c1|)).
///
/// Valid under the standing assumptions 2 <= 1 + c1^2 <= c2^2.
pub fn derivative_term_bounds(c1: f64, c2: f64, omega1_t: f64) -> Result<TermBounds> {
    check_standing_assumptions(c1, c2)?;
    let a1 = c1.abs();
    let a2 = c2.abs();
    Ok(TermBounds {
        mu: 1.0 / a2,
        nu: 1.0 / (a1 * a2 * a2),
        kappa_plus: a1 / (SQRT_2 * a2 * a2),
        kappa_minus: a1 / (SQRT_2 * a2 * (a2 - SQRT_2 * a1)),
        lambda_plus: omega1_t / (4.0 * SQRT_2 * a2),
        lambda_minus: omega1_t / (4.0 * (a2 - SQRT_2 * a1)),
    })
}

fn wrap_angle(d: f64) -> f64 {
    let two_pi = 2.0 * PI;
    d - two_pi * (d / two_pi).round()
}

/// Finite-difference measurement of the six derivative terms at a given
/// alpha (central stencil, h = 1e-5, branch-cut aware for the angles).
pub fn measured_derivative_terms(
    c1: f64,
    c2: f64,
    omega1_t: f64,
    alpha: f64,
) -> Result<TermBounds> {
    let h = 1e-5;
    let up = diag_angles(c1, c2, alpha + h)?;
    let dn = diag_angles(c1, c2, alpha - h)?;
    let d = |a: f64, b: f64| wrap_angle(a - b).abs() / (2.0 * h);
    let dl = |a: f64, b: f64| ((a - b) / (2.0 * h)).abs();
    Ok(TermBounds {
        mu: d(up.mu, dn.mu),
        nu: d(up.nu, dn.nu),
        kappa_plus: d(up.kappa_plus, dn.kappa_plus) / SQRT_2,
        kappa_minus: d(up.kappa_minus, dn.kappa_minus) / SQRT_2,
        lambda_plus: omega1_t * dl(up.lambda_plus, dn.lambda_plus) / (2.0 * SQRT_2),
        lambda_minus: omega1_t * dl(up.lambda_minus, dn.lambda_minus) / (2.0 * SQRT_2),
    })
}

/// Recursive commutator power {X, Y^k}: {X, Y^0} = X and
/// {X, Y^k} = [{X, Y^(k-1)}, Y]. The bracket is the plain commutator
/// AB - BA; that is the convention under which the series of
/// [`sinch_directional_derivative`] reproduces the finite-difference
/// derivative of the matrix exponential.
pub fn commutator_power(x: &Operator4, y: &Operator4, k: usize) -> Operator4 {
    let mut acc = *x;
    for _ in 0..k {
        acc = acc.commutator(y);
    }
    acc
}

/// Truncated commutator-series ("sinch") directional derivative:
///
///   exp(-i t/2 H) [ sum_k {X, (t/2 H)^(2k)} / ((-1)^k (2k+1)!) ] exp(-i t/2 H)
///
/// equals (i/t) d/ds exp(-i t (H + s X)) at s = 0. With 30 terms the
/// factorial tail is far below roundoff for desk-scale arguments.
pub fn sinch_directional_derivative(
    h: &Operator4,
    x: &Operator4,
    t: f64,
    terms: usize,
) -> Result<Operator4> {
    if terms == 0 {
        return Err(Error::InvalidParameter("terms must be >= 1".to_string()));
    }
    let y = (t / 2.0) * *h;
    let mut bracket = *x; // {X, Y^(2k)} for the current k
    let mut sum = Operator4::zero();
    let mut factorial = 1.0f64; // (2k+1)!
    for k in 0..terms {
        if k > 0 {
            bracket = bracket.commutator(&y).commutator(&y);
            factorial *= (2 * k() as f64) * (2 * k + 1) as f64;
        }
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sum = sum + (sign / factorial) * bracket;
    }
    let half = expm_hermitian(h, t / 2.0)?;
    Ok(half * sum * half)
}

/// The on-transition off-resonance bound sqrt(8)/(|c2| - 2|c1|), valid for
/// |c2| > 2|c1| and all times.
pub fn ontrn_offres_bound(c1: f64, c2: f64) -> Result<f64> {
    let denom = c2.abs() - 2.0 * c1.abs();
    if denom <= 0.0 {
        return Err(Error::VacuousBound(format!(
            "need |c2| > 2|c1|, got c1 = {c1}, c2 = {c2}"
        )));
    }
    Ok(8.0f64.sqrt() / denom)
}
