//! Lab-frame and rotating-frame Hamiltonians of the driven two-spin system,
//! plus the per-resonance effective-fields geometry.
//!
//! Unit conventions: every stored frequency is rad/s except the scalar
//! coupling J, which is kept in Hz and multiplied by 2*pi at the single
//! conversion site inside the Hamiltonian builders. Zeeman terms carry a
//! minus sign (positive gyromagnetic ratio).

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::operator::{basis_op, Axis, OpLabel, Operator4, Sign, Spin};

/// Scalar-coupling model for the pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coupling {
    /// Keep only the 2 pi J Iz Iz secular part.
    Weak,
    /// Full isotropic exchange 2 pi J (IxIx + IyIy + IzIz).
    Strong,
}

/// Physical constants of the two-spin system.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SpinSystem {
    /// Larmor frequency of spin A (rad/s).
    pub omega0_a: f64,
    /// Larmor frequency of spin B (rad/s).
    pub omega0_b: f64,
    /// Scalar coupling (Hz).
    pub j_hz: f64,
    pub coupling: Coupling,
}

impl SpinSystem {
    /// Difference of Larmor frequencies omega0_A - omega0_B (rad/s).
    pub fn delta_omega(&self) -> f64 {
        self.omega0_a - self.omega0_b
    }

    /// Build a system realizing the dimensionless parameters c1 = pi J/omega1
    /// and c2 = (omega0_A - omega0_B)/omega1 at the given RF power, with the
    /// A frequency placed at zero (only offsets matter in the rotating frame).
    pub fn from_reduced(c1: f64, c2: f64, omega1: f64) -> Self {
        SpinSystem {
            omega0_a: 0.0,
            omega0_b: -c2 * omega1,
            j_hz: c1 * omega1 / PI,
            coupling: Coupling::Weak,
        }
    }

    /// Non-fatal diagnostics: conditions under which downstream formulas are
    /// outside their derivation regime.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.delta_omega().abs() <= 2.0 * PI * self.j_hz.abs() {
            out.push(format!(
                "weak-coupling regime questionable: |omega0_A - omega0_B| = {:.3e} rad/s \
                 is not large compared to 2 pi |J| = {:.3e} rad/s",
                self.delta_omega().abs(),
                2.0 * PI * self.j_hz.abs()
            ));
        }
        if self.j_hz < 0.0 {
            out.push(
                "J < 0: the conditional-phase derivations assume J > 0; \
                 signs of the extracted phases may differ"
                    .to_string(),
            );
        }
        out
    }
}

/// Where the RF carrier sits relative to the A-spin doublet.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Placement {
    /// Carrier at omega0_A, between the two lines of the A doublet.
    OnResonanceA,
    /// Carrier at omega0_A + pi J, on the |01> <-> |11> line.
    OnTransitionAMinus,
    /// Carrier given explicitly (rad/s).
    Explicit { omega2: f64 },
}

/// A monochromatic RF pulse: amplitude, carrier placement, duration.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RfPulse {
    /// RF amplitude omega1 (rad/s, > 0).
    pub omega1: f64,
    /// Pulse duration (seconds, >= 0).
    pub duration: f64,
    pub placement: Placement,
}

impl RfPulse {
    pub fn on_resonance_a(omega1: f64, duration: f64) -> Self {
        RfPulse { omega1, duration, placement: Placement::OnResonanceA }
    }

    pub fn on_transition_a_minus(omega1: f64, duration: f64) -> Self {
        RfPulse { omega1, duration, placement: Placement::OnTransitionAMinus }
    }

    pub fn explicit(omega1: f64, omega2: f64, duration: f64) -> Self {
        RfPulse { omega1, duration, placement: Placement::Explicit { omega2 } }
    }

    /// Carrier frequency omega2 (rad/s) implied by the placement.
    pub fn carrier(&self, sys: &SpinSystem) -> f64 {
        match self.placement {
            Placement::OnResonanceA => sys.omega0_a,
            Placement::OnTransitionAMinus => sys.omega0_a + PI * sys.j_hz,
            Placement::Explicit { omega2 } => omega2,
        }
    }

    /// Frequency offset omega0_A - omega2 of spin A from the carrier.
    ///
    /// For the named placements the offset is formed symbolically (0 or
    /// -pi J) rather than by subtracting two large Larmor frequencies, so
    /// no precision is lost at MHz-scale carriers.
    pub fn offset_a(&self, sys: &SpinSystem) -> f64 {
        match self.placement {
            Placement::OnResonanceA => 0.0,
            Placement::OnTransitionAMinus => -PI * sys.j_hz,
            Placement::Explicit { omega2 } => sys.omega0_a - omega2,
        }
    }

    /// Frequency offset omega0_B - omega2 of spin B from the carrier.
    pub fn offset_b(&self, sys: &SpinSystem) -> f64 {
        self.offset_a(sys) - sys.delta_omega()
    }

    pub fn validate(&self) -> Result<()> {
        if self.omega1 <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "omega1 must be > 0 (got {})",
                self.omega1
            )));
        }
        if self.duration < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "duration must be >= 0 (got {})",
                self.duration
            )));
        }
        Ok(())
    }
}

/// Dimensionless pulse parameters c1 = pi J / omega1,
/// c2 = (omega0_A - omega0_B) / omega1, and the perturbation knob alpha.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ReducedParams {
    pub c1: f64,
    pub c2: f64,
    pub alpha: f64,
}

impl ReducedParams {
    pub fn from_system(sys: &SpinSystem, pulse: &RfPulse) -> Self {
        ReducedParams {
            c1: PI * sys.j_hz / pulse.omega1,
            c2: sys.delta_omega() / pulse.omega1,
            alpha: 1.0,
        }
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }
}

fn op(label: OpLabel) -> Operator4 {
    basis_op(label)
}

fn coupling_term(sys: &SpinSystem) -> Operator4 {
    let two_pi_j = 2.0 * PI * sys.j_hz;
    let zz = PI * sys.j_hz * op(OpLabel::Two(Axis::Z, Axis::Z)); // 2 pi J IzIz
    match sys.coupling {
        Coupling::Weak => zz,
        Coupling::Strong => {
            zz + 0.5
                * two_pi_j
                * (op(OpLabel::Two(Axis::X, Axis::X)) + op(OpLabel::Two(Axis::Y, Axis::Y)))
        }
    }
}

/// Static Hamiltonian of the undriven pair in the lab frame:
/// -omega0_A Iz_A - omega0_B Iz_B plus the coupling term.
pub fn lab_hamiltonian(sys: &SpinSystem) -> Operator4 {
    -sys.omega0_a * op(OpLabel::Single(Spin::A, Axis::Z))
        - sys.omega0_b * op(OpLabel::Single(Spin::B, Axis::Z))
        + coupling_term(sys)
}

/// Time-independent effective Hamiltonian in the frame co-rotating with the
/// RF carrier:
///
///   H_eff = -(omega0_A - omega2) Iz_A - (omega0_B - omega2) Iz_B
///           + coupling + omega1 (Ix_A + Ix_B).
///
/// The coupling commutes with the frame generator, so this is exact for both
/// coupling models.
pub fn rotating_frame_hamiltonian(sys: &SpinSystem, pulse: &RfPulse) -> Operator4 {
    -pulse.offset_a(sys) * op(OpLabel::Single(Spin::A, Axis::Z))
        - pulse.offset_b(sys) * op(OpLabel::Single(Spin::B, Axis::Z))
        + coupling_term(sys)
        + pulse.omega1 * (op(OpLabel::Single(Spin::A, Axis::X)) + op(OpLabel::Single(Spin::B, Axis::X)))
}

/// Subtract the off-resonance drive term omega1 Ix_B, yielding H_eff^0.
pub fn drop_offres_term(h_eff: &Operator4, pulse: &RfPulse) -> Operator4 {
    *h_eff - pulse.omega1 * op(OpLabel::Single(Spin::B, Axis::X))
}

/// The interpolating Hamiltonian H_eff^alpha = H_eff^0 + alpha omega1 Ix_B.
/// alpha = 0 drops the off-resonance term entirely, alpha = 1 recovers the
/// full rotating-frame Hamiltonian.
pub fn perturbed_hamiltonian(sys: &SpinSystem, pulse: &RfPulse, alpha: f64) -> Result<Operator4> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::AlphaOutOfRange(alpha));
    }
    Ok(-pulse.offset_a(sys) * op(OpLabel::Single(Spin::A, Axis::Z))
        - pulse.offset_b(sys) * op(OpLabel::Single(Spin::B, Axis::Z))
        + coupling_term(sys)
        + pulse.omega1 * op(OpLabel::Single(Spin::A, Axis::X))
        + (alpha * pulse.omega1) * op(OpLabel::Single(Spin::B, Axis::X)))
}

/// Rotating-frame effective field seen by one resonance line of the observed
/// spin's doublet, labelled by the partner spin's orientation.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EffectiveField {
    /// Orientation of the partner spin in this subpopulation.
    pub partner: Sign,
    /// Field vector (rad/s): x = omega1, y = 0, z = line offset.
    pub vector: [f64; 3],
}

impl EffectiveField {
    pub fn magnitude(&self) -> f64 {
        let [x, y, z] = self.vector;
        (x * x + y * y + z * z).sqrt()
    }

    /// Angle from the +z axis in [0, pi].
    pub fn angle_from_z(&self) -> f64 {
        let [x, y, z] = self.vector;
        (x * x + y * y).sqrt().atan2(z)
    }
}

/// The two per-subpopulation effective fields of the observed spin's doublet.
///
/// The line with the partner spin up sits at offset (omega0 - omega2) - pi J,
/// the partner-down line at (omega0 - omega2) + pi J; the RF drive adds the
/// transverse component omega1 along x.
pub fn effective_fields(
    sys: &SpinSystem,
    pulse: &RfPulse,
    observed: Spin,
) -> Result<Vec<EffectiveField>> {
    if sys.coupling != Coupling::Weak {
        return Err(Error::AssumptionViolated(
            "effective-fields picture requires the weak coupling model".to_string(),
        ));
    }
    let offset = match observed {
        Spin::A => pulse.offset_a(sys),
        Spin::B => pulse.offset_b(sys),
    };
    let pi_j = PI * sys.j_hz;
    Ok(vec![
        EffectiveField { partner: Sign::Plus, vector: [pulse.omega1, 0.0, offset - pi_j] },
        EffectiveField { partner: Sign::Minus, vector: [pulse.omega1, 0.0, offset + pi_j] },
    ])
}

/// Time for a spin to precess by `angle` about the given effective field:
/// t = angle / |field|.
pub fn rotation_time(field: &EffectiveField, angle: f64) -> Result<f64> {
    let mag = field.magnitude();
    if mag == 0.0 {
        return Err(Error::ZeroField);
    }
    Ok(angle / mag)
}
