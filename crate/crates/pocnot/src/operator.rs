//! Complex 4x4 operator arithmetic for a two-spin-1/2 system, the product
//! operator basis, trace-normalized norms, and Hermitian matrix exponentials.
//!
//! Basis order is |00>, |01>, |10>, |11> with spin A as the left (most
//! significant) label and index 0 meaning spin "up" (positive gyromagnetic
//! ratio convention). Single-spin operators use I_k = sigma_k / 2.

use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const I: C64 = C64::new(0.0, 1.0);

/// Which spin of the pair an operator acts on. A is the target (left label),
/// B the control (right label).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Spin {
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// Up/down projector sign: E_plus = (1 + 2 I_z)/2 projects onto "up".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

/// A named operator: one of the 16 product-operator basis elements or a
/// single-spin idempotent E_plus/E_minus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OpLabel {
    /// The identity.
    Unit,
    /// I_k on one spin.
    Single(Spin, Axis),
    /// 2 I_k^A I_l^B.
    Two(Axis, Axis),
    /// E_plus/E_minus on one spin.
    Proj(Spin, Sign),
}

impl OpLabel {
    /// The 16 product-operator basis labels in canonical order:
    /// 1, I_k^A, I_k^B, then 2 I_k^A I_l^B row-major in (k, l).
    pub const BASIS: [OpLabel; 16] = {
        use Axis::*;
        use OpLabel::*;
        [
            Unit,
            Single(Spin::A, X),
            Single(Spin::A, Y),
            Single(Spin::A, Z),
            Single(Spin::B, X),
            Single(Spin::B, Y),
            Single(Spin::B, Z),
            Two(X, X),
            Two(X, Y),
            Two(X, Z),
            Two(Y, X),
            Two(Y, Y),
            Two(Y, Z),
            Two(Z, X),
            Two(Z, Y),
            Two(Z, Z),
        ]
    };

    /// Parse a text label as used in CSV headers and the CLI, e.g. "Ix_A",
    /// "2IyIz", "E+_B", "1".
    pub fn parse(s: &str) -> Result<OpLabel> {
        fn axis(c: char) -> Option<Axis> {
            match c {
                'x' => Some(Axis::X),
                'y' => Some(Axis::Y),
                'z' => Some(Axis::Z),
                _ => None,
            }
        }
        let reject = || Error::UnknownLabel(s.to_string());
        match s {
            "1" => return Ok(OpLabel::Unit),
            "E+_A" => return Ok(OpLabel::Proj(Spin::A, Sign::Plus)),
            "E-_A" => return Ok(OpLabel::Proj(Spin::A, Sign::Minus)),
            "E+_B" => return Ok(OpLabel::Proj(Spin::B, Sign::Plus)),
            "E-_B" => return Ok(OpLabel::Proj(Spin::B, Sign::Minus)),
            _ => {}
        }
        let chars: Vec<char> = s.chars().collect();
        match chars.as_slice() {
            // "Ix_A"
            ['I', k, '_', spin] => {
                let k = axis(*k).ok_or_else(reject)?;
                let spin = match spin {
                    'A' => Spin::A,
                    'B' => Spin::B,
                    _ => return Err(reject()),
                };
                Ok(OpLabel::Single(spin, k))
            }
            // "2IxIz"
            ['2', 'I', k, 'I', l] => {
                let k = axis(*k).ok_or_else(reject)?;
                let l = axis(*l).ok_or_else(reject)?;
                Ok(OpLabel::Two(k, l))
            }
            _ => Err(reject()),
        }
    }

    /// Canonical text form, inverse of [`OpLabel::parse`].
    pub fn name(&self) -> String {
        fn ax(a: Axis) -> char {
            match a {
                Axis::X => 'x',
                Axis::Y => 'y',
                Axis::Z => 'z',
            }
        }
        match self {
            OpLabel::Unit => "1".to_string(),
            OpLabel::Single(s, k) => {
                format!("I{}_{}", ax(*k), if *s == Spin::A { 'A' } else { 'B' })
            }
            OpLabel::Two(k, l) => format!("2I{}I{}", ax(*k), ax(*l)),
            OpLabel::Proj(s, sg) => format!(
                "E{}_{}",
                if *sg == Sign::Plus { '+' } else { '-' },
                if *s == Spin::A { 'A' } else { 'B' }
            ),
        }
    }
}

/// A 4x4 complex operator on the two-spin Hilbert space. Immutable value
/// type; all arithmetic returns fresh operators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Operator4 {
    m: Matrix4<C64>,
}

fn pauli_half(axis: Axis) -> Matrix2<C64> {
    let z = C64::new(0.0, 0.0);
    let h = C64::new(0.5, 0.0);
    match axis {
        Axis::X => Matrix2::new(z, h, h, z),
        Axis::Y => Matrix2::new(z, -0.5 * I, 0.5 * I, z),
        Axis::Z => Matrix2::new(h, z, z, -h),
    }
}

fn eye2() -> Matrix2<C64> {
    Matrix2::identity()
}

impl Operator4 {
    pub fn zero() -> Self {
        Operator4 { m: Matrix4::zeros() }
    }

    pub fn identity() -> Self {
        Operator4 { m: Matrix4::identity() }
    }

    pub fn from_matrix(m: Matrix4<C64>) -> Self {
        Operator4 { m }
    }

    /// Build from 16 complex entries in row-major order.
    pub fn from_rows(rows: [[C64; 4]; 4]) -> Self {
        let mut m = Matrix4::zeros();
        for (r, row) in rows.iter().enumerate() {
            for (c, v) in row.iter().enumerate() {
                m[(r, c)] = *v;
            }
        }
        Operator4 { m }
    }

    pub fn from_diagonal(d: [C64; 4]) -> Self {
        let mut m = Matrix4::zeros();
        for (k, v) in d.iter().enumerate() {
            m[(k, k)] = *v;
        }
        Operator4 { m }
    }

    pub fn matrix(&self) -> &Matrix4<C64> {
        &self.m
    }

    pub fn entry(&self, row: usize, col: usize) -> C64 {
        self.m[(row, col)]
    }

    pub fn diagonal(&self) -> [C64; 4] {
        [self.m[(0, 0)], self.m[(1, 1)], self.m[(2, 2)], self.m[(3, 3)]]
    }

    pub fn adjoint(&self) -> Self {
        Operator4 { m: self.m.adjoint() }
    }

    pub fn trace(&self) -> C64 {
        self.m.trace()
    }

    /// Largest entry magnitude; the entrywise max norm.
    pub fn max_abs(&self) -> f64 {
        self.m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Hermiticity defect max |X - X^dag| entrywise.
    pub fn hermiticity_defect(&self) -> f64 {
        (*self - self.adjoint()).max_abs()
    }

    /// Deviation of X X^dag from the identity, Frobenius norm.
    pub fn unitarity_defect(&self) -> f64 {
        (*self * self.adjoint() - Operator4::identity()).frobenius_norm()
    }

    /// True when X = X^dag up to roundoff, scaled by the operator magnitude.
    pub fn is_hermitian(&self) -> bool {
        self.hermiticity_defect() <= 1e-12 * self.max_abs().max(1.0)
    }

    pub fn is_unitary(&self) -> bool {
        self.unitarity_defect() < 1e-10
    }

    pub fn commutator(&self, other: &Operator4) -> Operator4 {
        *self * *other - *other * *self
    }
}

impl std::ops::Add for Operator4 {
    type Output = Operator4;
    fn add(self, rhs: Operator4) -> Operator4 {
        Operator4 { m: self.m + rhs.m }
    }
}

impl std::ops::Sub for Operator4 {
    type Output = Operator4;
    fn sub(self, rhs: Operator4) -> Operator4 {
        Operator4 { m: self.m - rhs.m }
    }
}

impl std::ops::Neg for Operator4 {
    type Output = Operator4;
    fn neg(self) -> Operator4 {
        Operator4 { m: -self.m }
    }
}

impl std::ops::Mul for Operator4 {
    type Output = Operator4;
    fn mul(self, rhs: Operator4) -> Operator4 {
        Operator4 { m: self.m * rhs.m }
    }
}

impl std::ops::Mul<Operator4> for f64 {
    type Output = Operator4;
    fn mul(self, rhs: Operator4) -> Operator4 {
        Operator4 { m: rhs.m.map(|z| z * self) }
    }
}

impl std::ops::Mul<Operator4> for C64 {
    type Output = Operator4;
    fn mul(self, rhs: Operator4) -> Operator4 {
        Operator4 { m: rhs.m.map(|z| z * self) }
    }
}

/// Matrix of a named operator with spin-1/2 conventions I_k = sigma_k/2 and
/// E_pm = (1 pm 2 I_z)/2.
pub fn basis_op(label: OpLabel) -> Operator4 {
    let m = match label {
        OpLabel::Unit => Matrix4::identity(),
        OpLabel::Single(Spin::A, k) => pauli_half(k).kronecker(&eye2()),
        OpLabel::Single(Spin::B, k) => eye2().kronecker(&pauli_half(k)),
        OpLabel::Two(k, l) => pauli_half(k).kronecker(&pauli_half(l)).map(|z| z * 2.0),
        OpLabel::Proj(s, sign) => {
            let iz = match s {
                Spin::A => pauli_half(Axis::Z).kronecker(&eye2()),
                Spin::B => eye2().kronecker(&pauli_half(Axis::Z)),
            };
            let sgn = if sign == Sign::Plus { 1.0 } else { -1.0 };
            (Matrix4::identity() + iz.map(|z| z * (2.0 * sgn))).map(|z| z * 0.5)
        }
    };
    Operator4 { m }
}

/// Parse-then-build; the error path for text-driven callers.
pub fn basis_op_named(name: &str) -> Result<Operator4> {
    Ok(basis_op(OpLabel::parse(name)?))
}

/// Normalized trace tr(X)/4. Unitaries have scalar_part(U U^dag) = 1 under
/// this convention, which is the normalization the error bounds rely on.
pub fn scalar_part(x: &Operator4) -> C64 {
    x.trace() / 4.0
}

/// sqrt(scalar_part(X X^dag)); equals Frobenius/2, so unit for unitaries.
pub fn ga_norm(x: &Operator4) -> f64 {
    scalar_part(&(*x * x.adjoint())).re.max(0.0).sqrt()
}

/// 1 - |tr(U1 U2^dag)/4|^2: zero iff the unitaries agree up to one global
/// phase. Rejects non-unitary inputs.
pub fn phase_insensitive_distance(u1: &Operator4, u2: &Operator4) -> Result<f64> {
    for u in [u1, u2] {
        let d = u.unitarity_defect();
        if d >= 1e-10 {
            return Err(Error::NotUnitary(d));
        }
    }
    let z = (*u1 * u2.adjoint()).trace() / 4.0;
    Ok(1.0 - z.norm_sqr())
}

/// exp(-i t H) for Hermitian H via eigendecomposition, exactly unitary up to
/// roundoff. H in rad/s, t in seconds (or both dimensionless).
pub fn expm_hermitian(h: &Operator4, t: f64) -> Result<Operator4> {
    let defect = h.hermiticity_defect();
    if defect > 1e-12 * h.max_abs().max(1.0) {
        return Err(Error::NotHermitian(defect));
    }
    // Symmetrize so the eigensolver sees an exactly Hermitian matrix.
    let sym = (h.m + h.m.adjoint()).map(|z| z * 0.5);
    let eig = nalgebra::SymmetricEigen::new(sym);
    let mut d = Matrix4::zeros();
    for k in 0..4 {
        let phase = -t * eig.eigenvalues[k];
        d[(k, k)] = C64::new(phase.cos(), phase.sin());
    }
    let u = eig.eigenvectors * d * eig.eigenvectors.adjoint();
    Ok(Operator4 { m: u })
}

/// Eigenvalues of a Hermitian operator, ascending.
pub fn eigenvalues_hermitian(h: &Operator4) -> Result<[f64; 4]> {
    let defect = h.hermiticity_defect();
    if defect > 1e-12 * h.max_abs().max(1.0) {
        return Err(Error::NotHermitian(defect));
    }
    let sym = (h.m + h.m.adjoint()).map(|z| z * 0.5);
    let eig = nalgebra::SymmetricEigen::new(sym);
    let mut vals = [0.0; 4];
    for k in 0..4 {
        vals[k] = eig.eigenvalues[k];
    }
    vals.sort_by(|a, b| a.total_cmp(b));
    Ok(vals)
}

/// Coefficients of an operator over the 16 product-operator basis elements,
/// ordered as [`OpLabel::BASIS`].
#[derive(Debug, Clone, PartialEq)]
pub struct ProductOperatorCoeffs {
    pub values: [C64; 16],
}

impl ProductOperatorCoeffs {
    pub fn get(&self, label: OpLabel) -> C64 {
        let idx = OpLabel::BASIS
            .iter()
            .position(|l| *l == label)
            .expect("not a basis label");
        self.values[idx]
    }

    /// Max imaginary magnitude across coefficients; ~0 for Hermitian input.
    pub fn max_imag(&self) -> f64 {
        self.values.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }
}

/// Coefficient of basis element P is tr(P^dag X)/tr(P^dag P).
pub fn decompose(x: &Operator4) -> ProductOperatorCoeffs {
    let mut values = [C64::new(0.0, 0.0); 16];
    for (k, label) in OpLabel::BASIS.iter().enumerate() {
        let p = basis_op(*label);
        let norm = if *label == OpLabel::Unit { 4.0 } else { 1.0 };
        values[k] = (p.adjoint() * *x).trace() / norm;
    }
    ProductOperatorCoeffs { values }
}

/// Linear inverse of [`decompose`].
pub fn recompose(c: &ProductOperatorCoeffs) -> Operator4 {
    let mut acc = Operator4::zero();
    for (k, label) in OpLabel::BASIS.iter().enumerate() {
        acc = acc + c.values[k] * basis_op(*label);
    }
    acc
}

/// Absolute tolerances for operator comparisons and phase extraction.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Tolerances {
    pub eq_tol: f64,
    pub phase_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { eq_tol: 1e-10, phase_tol: 1e-10 }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        if self.eq_tol > 0.0 && self.phase_tol > 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidParameter(
                "tolerances must be strictly positive".to_string(),
            ))
        }
    }
}
