//! Complex vector core: states, the angle metric, projectors and unitaries.
//!
//! Every pure state is a [`StateVector`]. Two states are compared through the
//! [`Angle`] between them, `δ(a, b) = arccos |⟨a|b⟩|`, which ignores global
//! phase and lives in `[0, π/2]`.
//!
//! Composite systems use the Kronecker convention of [`tensor`]: component
//! `(i, j)` of `a ⊗ b` sits at position `i * b.dim() + j`.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::{Error, Result, ALGEBRAIC_TOL, UNITARY_TOL};

/// A finite-dimensional vector of complex amplitudes.
///
/// Most operations expect unit vectors, but intermediate objects such as the
/// unnormalised `q` of a cloner output are also carried by this type.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector(DVector<Complex64>);

impl StateVector {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::Empty);
        }
        Ok(StateVector(DVector::from_vec(amplitudes)))
    }

    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        Self::new(amplitudes.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// Builds a vector from `(re, im)` pairs.
    pub fn from_pairs(pairs: &[[f64; 2]]) -> Result<Self> {
        Self::new(pairs.iter().map(|p| Complex64::new(p[0], p[1])).collect())
    }

    /// The `index`-th standard basis vector of a `dim`-dimensional space.
    ///
    /// # Panics
    ///
    /// If `index >= dim`.
    pub fn basis(dim: usize, index: usize) -> Self {
        assert!(index < dim, "basis index {index} out of range for dim {dim}");
        let mut v = DVector::zeros(dim);
        v[index] = Complex64::new(1.0, 0.0);
        StateVector(v)
    }

    pub fn zeros(dim: usize) -> Self {
        StateVector(DVector::zeros(dim))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        self.0.as_slice()
    }

    pub fn as_dvector(&self) -> &DVector<Complex64> {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn is_unit(&self, tol: f64) -> bool {
        (self.norm() - 1.0).abs() <= tol
    }

    /// Returns `Err(NotUnit)` unless `| ‖v‖ − 1 | ≤ 1e−12`.
    pub fn check_unit(&self) -> Result<()> {
        if self.is_unit(ALGEBRAIC_TOL) {
            Ok(())
        } else {
            Err(Error::NotUnit { norm: self.norm() })
        }
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::NotUnit { norm: n });
        }
        Ok(StateVector(self.0.unscale(n)))
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        StateVector(&self.0 * c)
    }

    /// `e^{iθ} · self`.
    pub fn with_phase(&self, theta: f64) -> Self {
        self.scaled(Complex64::from_polar(1.0, theta))
    }

    /// Largest componentwise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &StateVector) -> Result<f64> {
        same_dim(self, other)?;
        Ok(self
            .0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// Amplitudes as `[re, im]` pairs, the wire format used by reports.
    pub fn to_pairs(&self) -> Vec<[f64; 2]> {
        self.0.iter().map(|c| [c.re, c.im]).collect()
    }
}

impl fmt::Display for StateVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl Add for &StateVector {
    type Output = StateVector;

    fn add(self, rhs: &StateVector) -> StateVector {
        StateVector(&self.0 + &rhs.0)
    }
}

impl Sub for &StateVector {
    type Output = StateVector;

    fn sub(self, rhs: &StateVector) -> StateVector {
        StateVector(&self.0 - &rhs.0)
    }
}

impl Mul<f64> for &StateVector {
    type Output = StateVector;

    fn mul(self, rhs: f64) -> StateVector {
        StateVector(self.0.map(|c| c * rhs))
    }
}

impl Mul<Complex64> for &StateVector {
    type Output = StateVector;

    fn mul(self, rhs: Complex64) -> StateVector {
        self.scaled(rhs)
    }
}

fn same_dim(a: &StateVector, b: &StateVector) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    Ok(())
}

/// An angle between pure states, always in `[0, π/2]`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, serde::Serialize)]
#[serde(transparent)]
pub struct Angle(f64);

impl Angle {
    pub const ZERO: Angle = Angle(0.0);
    pub const RIGHT: Angle = Angle(FRAC_PI_2);

    /// `arccos` of an overlap modulus, clamped into `[0, 1]` first.
    pub fn from_overlap(modulus: f64) -> Self {
        Angle(modulus.clamp(0.0, 1.0).acos())
    }

    /// Angle whose cosine and sine are proportional to `parallel` and
    /// `perp`. Accurate near `0` where [`Angle::from_overlap`] loses half the
    /// digits.
    pub fn from_components(parallel: f64, perp: f64) -> Self {
        Angle(perp.abs().atan2(parallel.abs()).clamp(0.0, FRAC_PI_2))
    }

    pub fn from_radians(radians: f64) -> Result<Self> {
        if !(0.0..=FRAC_PI_2).contains(&radians) {
            return Err(Error::out_of_domain("angle", radians, "[0, π/2]"));
        }
        Ok(Angle(radians))
    }

    pub fn radians(self) -> f64 {
        self.0
    }

    pub fn cos(self) -> f64 {
        self.0.cos()
    }

    pub fn sin(self) -> f64 {
        self.0.sin()
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} rad", self.0)
    }
}

/// Hermitian inner product `⟨a|b⟩`, conjugate-linear in `a`.
pub fn inner(a: &StateVector, b: &StateVector) -> Result<Complex64> {
    same_dim(a, b)?;
    Ok(a.0.dotc(&b.0))
}

/// The angle metric `arccos |⟨a|b⟩|` between two unit vectors.
pub fn angle(a: &StateVector, b: &StateVector) -> Result<Angle> {
    same_dim(a, b)?;
    a.check_unit()?;
    b.check_unit()?;
    // half-angle form after aligning phases: same value as arccos|⟨a|b⟩|,
    // without the loss of precision near zero
    let overlap = a.0.dotc(&b.0);
    let phase = if overlap.norm() > 0.0 {
        overlap.conj() / overlap.norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    let aligned = &b.0 * phase;
    let diff = (&a.0 - &aligned).norm();
    let sum = (&a.0 + &aligned).norm();
    Ok(Angle((2.0 * diff.atan2(sum)).clamp(0.0, FRAC_PI_2)))
}

/// Kronecker product `a ⊗ b`.
pub fn tensor(a: &StateVector, b: &StateVector) -> StateVector {
    StateVector(a.0.kronecker(&b.0))
}

/// Tensor product of several factors, left to right.
pub fn tensor_all(factors: &[&StateVector]) -> StateVector {
    let mut it = factors.iter();
    let first = (*it.next().expect("at least one factor")).clone();
    it.fold(first, |acc, f| tensor(&acc, f))
}

/// Unit vector along the part of `target` orthogonal to `anchor`:
///
/// ```text
/// Θ = (target − anchor ⟨anchor|target⟩) / √(1 − |⟨anchor|target⟩|²)
/// ```
///
/// Fails if the pair is collinear (`|overlap| ≥ 1 − 1e−12`).
pub fn gram_schmidt_residual(target: &StateVector, anchor: &StateVector) -> Result<StateVector> {
    same_dim(target, anchor)?;
    target.check_unit()?;
    anchor.check_unit()?;
    let overlap = anchor.0.dotc(&target.0);
    if overlap.norm() >= 1.0 - ALGEBRAIC_TOL {
        return Err(Error::Collinear {
            overlap: overlap.norm(),
        });
    }
    let mut residual = &target.0 - &anchor.0 * overlap;
    // One re-orthogonalisation pass keeps ⟨anchor|Θ⟩ at rounding level even
    // for nearly collinear inputs.
    let again = anchor.0.dotc(&residual);
    residual -= &anchor.0 * again;
    Ok(StateVector(residual.unscale(residual.norm())))
}

/// Extends an orthonormal family to an orthonormal basis of the whole space,
/// returning only the new vectors. Candidates are the standard basis vectors,
/// taken in order, each orthogonalised twice against everything kept so far.
pub fn orthonormal_completion(family: &[StateVector], dim: usize) -> Result<Vec<StateVector>> {
    for v in family {
        if v.dim() != dim {
            return Err(Error::DimensionMismatch {
                left: v.dim(),
                right: dim,
            });
        }
    }
    let mut kept: Vec<DVector<Complex64>> = family.iter().map(|v| v.0.clone()).collect();
    let mut added = Vec::new();
    for i in 0..dim {
        if kept.len() == dim {
            break;
        }
        let mut c = StateVector::basis(dim, i).0;
        for _ in 0..2 {
            for k in &kept {
                let proj = k.dotc(&c);
                c -= k * proj;
            }
        }
        let n = c.norm();
        // A fresh basis vector always keeps at least 1/√dim of its norm in
        // one of the candidates; anything far below that is a dependent one.
        if n > 1e-6 {
            let unit = c.unscale(n);
            kept.push(unit.clone());
            added.push(StateVector(unit));
        }
    }
    Ok(added)
}

/// Orthogonal projector stored as an orthonormal basis of its range.
#[derive(Clone, Debug, PartialEq)]
pub struct Projector {
    basis: Vec<StateVector>,
    ambient_dim: usize,
}

impl Projector {
    /// Wraps an orthonormal basis. Inner products must be within 1e−12 of
    /// the identity.
    pub fn new(basis: Vec<StateVector>, ambient_dim: usize) -> Result<Self> {
        for v in &basis {
            if v.dim() != ambient_dim {
                return Err(Error::DimensionMismatch {
                    left: v.dim(),
                    right: ambient_dim,
                });
            }
        }
        let mut deviation: f64 = 0.0;
        for (i, a) in basis.iter().enumerate() {
            for (j, b) in basis.iter().enumerate().skip(i) {
                let expected = if i == j { 1.0 } else { 0.0 };
                deviation = deviation.max((a.0.dotc(&b.0) - expected).norm());
            }
        }
        if deviation > ALGEBRAIC_TOL {
            return Err(Error::NotOrthonormal { deviation });
        }
        Ok(Projector { basis, ambient_dim })
    }

    /// Projector onto the span of arbitrary (non-zero, independent) vectors.
    pub fn spanning(vectors: &[StateVector]) -> Result<Self> {
        let dim = vectors.first().ok_or(Error::Empty)?.dim();
        let mut basis: Vec<StateVector> = Vec::with_capacity(vectors.len());
        for v in vectors {
            if v.dim() != dim {
                return Err(Error::DimensionMismatch {
                    left: v.dim(),
                    right: dim,
                });
            }
            let mut c = v.0.clone();
            for _ in 0..2 {
                for b in &basis {
                    let proj = b.0.dotc(&c);
                    c -= &b.0 * proj;
                }
            }
            let n = c.norm();
            if n <= 1e-9 * v.norm().max(1.0) {
                return Err(Error::Collinear { overlap: 1.0 });
            }
            basis.push(StateVector(c.unscale(n)));
        }
        Projector::new(basis, dim)
    }

    /// `|v⟩⟨v|` for a unit `v`.
    pub fn rank_one(v: &StateVector) -> Result<Self> {
        v.check_unit()?;
        Projector::new(vec![v.clone()], v.dim())
    }

    pub fn identity(dim: usize) -> Self {
        Projector {
            basis: (0..dim).map(|i| StateVector::basis(dim, i)).collect(),
            ambient_dim: dim,
        }
    }

    /// The projector onto the orthogonal complement of the range.
    pub fn complement(&self) -> Result<Self> {
        let basis = orthonormal_completion(&self.basis, self.ambient_dim)?;
        Projector::new(basis, self.ambient_dim)
    }

    pub fn basis(&self) -> &[StateVector] {
        &self.basis
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }
}

/// `Σ_k |b_k⟩⟨b_k|v⟩` over the basis of `p`.
pub fn apply_projector(p: &Projector, v: &StateVector) -> Result<StateVector> {
    if p.ambient_dim != v.dim() {
        return Err(Error::DimensionMismatch {
            left: p.ambient_dim,
            right: v.dim(),
        });
    }
    let mut out = DVector::zeros(v.dim());
    for b in &p.basis {
        out += &b.0 * b.0.dotc(&v.0);
    }
    Ok(StateVector(out))
}

/// Outcome probability `⟨s|Π|s⟩` for a unit state `s`.
pub fn measure_prob(p: &Projector, s: &StateVector) -> Result<f64> {
    if p.ambient_dim != s.dim() {
        return Err(Error::DimensionMismatch {
            left: p.ambient_dim,
            right: s.dim(),
        });
    }
    s.check_unit()?;
    Ok(p.basis.iter().map(|b| b.0.dotc(&s.0).norm_sqr()).sum())
}

/// A square unitary matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryMatrix(DMatrix<Complex64>);

impl UnitaryMatrix {
    /// Wraps `m` after checking `m† m = 1` to within 1e−10 (max-abs entry).
    pub fn new(m: DMatrix<Complex64>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch {
                left: m.nrows(),
                right: m.ncols(),
            });
        }
        let deviation = unitarity_deviation(&m);
        if deviation > UNITARY_TOL {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(UnitaryMatrix(m))
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(columns: &[StateVector]) -> Result<Self> {
        let cols: Vec<DVector<Complex64>> = columns.iter().map(|c| c.0.clone()).collect();
        if cols.is_empty() {
            return Err(Error::Empty);
        }
        Self::new(DMatrix::from_columns(&cols))
    }

    pub fn identity(dim: usize) -> Self {
        UnitaryMatrix(DMatrix::identity(dim, dim))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn apply(&self, v: &StateVector) -> Result<StateVector> {
        if self.dim() != v.dim() {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: v.dim(),
            });
        }
        Ok(StateVector(&self.0 * &v.0))
    }

    /// `e^{iθ} U`.
    pub fn with_phase(&self, theta: f64) -> Self {
        UnitaryMatrix(&self.0 * Complex64::from_polar(1.0, theta))
    }

    /// `self · other`.
    pub fn compose(&self, other: &UnitaryMatrix) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        Ok(UnitaryMatrix(&self.0 * &other.0))
    }

    /// Operator norm `‖self − other‖` induced by the Euclidean vector norm.
    pub fn distance(&self, other: &UnitaryMatrix) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        Ok(operator_norm(&(&self.0 - &other.0)))
    }
}

/// Max-abs entry of `m† m − 1`.
pub fn unitarity_deviation(m: &DMatrix<Complex64>) -> f64 {
    let gram = m.adjoint() * m;
    let n = gram.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let expected = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((gram[(i, j)] - expected).norm());
        }
    }
    worst
}

/// Largest singular value.
pub fn operator_norm(m: &DMatrix<Complex64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .fold(0.0, f64::max)
}
