//! Analytic diagonalization of the on-resonance effective Hamiltonian:
//! characteristic eigenvalues, the rotation angles mu/nu/kappa, the
//! conditional rotation completing the diagonalization, and the fully
//! factored propagator. Everything is parameterized by the dimensionless
//! (c1, c2, alpha) with alpha = 1 the physical case and alpha scaling the
//! off-resonance drive term.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::{perturbed_hamiltonian, RfPulse, SpinSystem};
use crate::operator::{basis_op, Axis, OpLabel, Operator4, Sign, Spin};

const I: C64 = C64::new(0.0, 1.0);

/// Angle/eigenvalue bundle of the analytic diagonalization.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DiagFactorization {
    /// B-spin tilt absorbing the drive into the offset: tan(mu) = alpha/c2.
    pub mu: f64,
    /// Conditional tilt mixing Ix_A into the coupling: tan(nu) = 1/(c1 cos mu).
    pub nu: f64,
    /// Final B-tilt on the A-up block: tan(kappa+) = -c1 sin(mu)/(c1' + c2').
    pub kappa_plus: f64,
    /// Final B-tilt on the A-down block, branch chosen continuous in alpha.
    pub kappa_minus: f64,
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    /// sqrt(1 + c1^2 cos^2 mu).
    pub c1_prime: f64,
    /// sqrt(alpha^2 + c2^2).
    pub c2_prime: f64,
}

/// The two nonnegative eigenvalue magnitudes of H_eff^alpha / omega1 from the
/// characteristic polynomial (a quadratic in lambda^2):
///
///   lambda_pm^2 = (1 + alpha^2 + c1^2 + c2^2
///                  +- 2 sqrt(alpha^2 + c2^2 (1 + c1^2))) / 4.
///
/// The spectrum is {+lambda+, -lambda+, +lambda-, -lambda-}.
pub fn char_eigenvalues(c1: f64, c2: f64, alpha: f64) -> (f64, f64) {
    let xi = alpha * alpha + c2 * c2 * (1.0 + c1 * c1);
    let base = 1.0 + alpha * alpha + c1 * c1 + c2 * c2;
    let lp = 0.25 * (base + 2.0 * xi.sqrt());
    let lm = 0.25 * (base - 2.0 * xi.sqrt());
    (lp.max(0.0).sqrt(), lm.max(0.0).sqrt())
}

/// All angles and eigenvalues of the analytic diagonalization.
///
/// Branches: mu = atan2(alpha, c2), so c2 = 0 with a live drive gives
/// mu = pi/2 and the downstream formulas are evaluated in that limit.
/// kappa- is taken from atan2 and folded to (-pi, pi) away from the +pi
/// branch edge so it stays continuous as alpha crosses zero.
pub fn diag_angles(c1: f64, c2: f64, alpha: f64) -> Result<DiagFactorization> {
    if c1 == 0.0 && c2 == 0.0 {
        return Err(Error::Degenerate(
            "c1 = c2 = 0: the A-spin doublet collapses and the angle formulas degenerate"
                .to_string(),
        ));
    }
    let c2_prime = (alpha * alpha + c2 * c2).sqrt();
    let mu = alpha.atan2(c2);
    let (cos_mu, sin_mu) = if c2_prime > 0.0 {
        (c2 / c2_prime, alpha / c2_prime)
    } else {
        (1.0, 0.0)
    };
    let c1_prime = (1.0 + c1 * c1 * cos_mu * cos_mu).sqrt();
    let nu = 1.0f64.atan2(c1 * cos_mu);
    let kappa_plus = (-c1 * sin_mu).atan2(c1_prime + c2_prime);
    let mut kappa_minus = (-c1 * sin_mu).atan2(c1_prime - c2_prime);
    if kappa_minus > std::f64::consts::PI - 1e-12 {
        kappa_minus -= 2.0 * std::f64::consts::PI;
    }
    let s = c1 * sin_mu;
    let lambda_plus = 0.5 * ((c1_prime + c2_prime).powi(2) + s * s).sqrt();
    let lambda_minus = 0.5 * ((c1_prime - c2_prime).powi(2) + s * s).sqrt();
    Ok(DiagFactorization {
        mu,
        nu,
        kappa_plus,
        kappa_minus,
        lambda_plus,
        lambda_minus,
        c1_prime,
        c2_prime,
    })
}

/// exp(-i theta G) for generators with G^3 = a^2 G (every generator in the
/// factorization is of this type), via
/// 1 + (cos(a theta) - 1) G^2/a^2 - i sin(a theta) G/a.
fn exp_generator(g: &Operator4, theta: f64, a: f64) -> Operator4 {
    let c = (a * theta).cos();
    let s = (a * theta).sin();
    Operator4::identity() + ((c - 1.0) / (a * a)) * (*g * *g) - (s / a) * (I * *g)
}

struct Generators {
    iy_b: Operator4,
    two_iya_izb: Operator4,
    eplus_iy: Operator4,
    eminus_iy: Operator4,
    two_eplus_iz: Operator4,
    two_eminus_iz: Operator4,
}

fn generators() -> Generators {
    let iy_b = basis_op(OpLabel::Single(Spin::B, Axis::Y));
    let iz_b = basis_op(OpLabel::Single(Spin::B, Axis::Z));
    let e_plus_a = basis_op(OpLabel::Proj(Spin::A, Sign::Plus));
    let e_minus_a = basis_op(OpLabel::Proj(Spin::A, Sign::Minus));
    Generators {
        iy_b,
        two_iya_izb: basis_op(OpLabel::Two(Axis::Y, Axis::Z)),
        eplus_iy: e_plus_a * iy_b,
        eminus_iy: e_minus_a * iy_b,
        two_eplus_iz: 2.0 * (e_plus_a * iz_b),
        two_eminus_iz: 2.0 * (e_minus_a * iz_b),
    }
}

/// The unitary V and diagonal D with V (H_eff^alpha / omega1) V^dag = D,
/// where D = diag(lambda+, -lambda+, -lambda-, lambda-):
/// V = K exp(i nu 2 Iy_A Iz_B) exp(i mu Iy_B) with
/// K = exp(i kappa+ E+_A Iy_B) exp(i kappa- E-_A Iy_B).
pub fn diag_transform(c1: f64, c2: f64, alpha: f64) -> Result<(Operator4, Operator4)> {
    let ang = diag_angles(c1, c2, alpha)?;
    let g = generators();
    let r1 = exp_generator(&g.iy_b, -ang.mu, 0.5);
    let r2 = exp_generator(&g.two_iya_izb, -ang.nu, 0.5);
    let k = exp_generator(&g.eplus_iy, -ang.kappa_plus, 0.5)
        * exp_generator(&g.eminus_iy, -ang.kappa_minus, 0.5);
    let v = k * r2 * r1;
    let zr = C64::new(0.0, 0.0);
    let d = Operator4::from_diagonal([
        C64::new(ang.lambda_plus, 0.0),
        C64::new(-ang.lambda_plus, 0.0),
        C64::new(-ang.lambda_minus, 0.0),
        C64::new(ang.lambda_minus, 0.0),
    ]);
    let _ = zr;
    Ok((v, d))
}

/// The fully factored propagator exp(-i t H_eff^alpha) as the ten-factor
/// product V^dag exp(-i omega1 t D) V with every factor in closed form.
pub fn factored_propagator(c1: f64, c2: f64, alpha: f64, omega1: f64, t: f64) -> Result<Operator4> {
    let ang = diag_angles(c1, c2, alpha)?;
    let g = generators();
    let w = omega1 * t;
    Ok(exp_generator(&g.iy_b, ang.mu, 0.5)
        * exp_generator(&g.two_iya_izb, ang.nu, 0.5)
        * exp_generator(&g.eplus_iy, ang.kappa_plus, 0.5)
        * exp_generator(&g.eminus_iy, ang.kappa_minus, 0.5)
        * exp_generator(&g.two_eplus_iz, w * ang.lambda_plus, 1.0)
        * exp_generator(&g.two_eminus_iz, -w * ang.lambda_minus, 1.0)
        * exp_generator(&g.eminus_iy, -ang.kappa_minus, 0.5)
        * exp_generator(&g.eplus_iy, -ang.kappa_plus, 0.5)
        * exp_generator(&g.two_iya_izb, -ang.nu, 0.5)
        * exp_generator(&g.iy_b, -ang.mu, 0.5))
}

/// H_eff^alpha / omega1 for reduced parameters, used by the oracle tests and
/// the CLI. Built at unit RF power so the division is trivial.
pub fn reduced_hamiltonian(c1: f64, c2: f64, alpha: f64) -> Result<Operator4> {
    let sys = SpinSystem::from_reduced(c1, c2, 1.0);
    let pulse = RfPulse::on_resonance_a(1.0, 1.0);
    perturbed_hamiltonian(&sys, &pulse, alpha)
}
