//! Concrete copying machines for a two-state set.
//!
//! The optimal symmetric and asymmetric machines need no ancilla: both keep
//! their outputs in the plane `span{φ⊗φ, ψ⊗ψ}` and differ only in how the
//! angle budget `Δ − δ` is shared between the two outputs. The Wootters–Zurek
//! machine copies the orthonormal pair `{φ, ω}` perfectly and records which
//! one it copied in a two-level ancilla.
//!
//! Outputs are built directly; they are realisable by some unitary because
//! `⟨V^(φ)|V^(ψ)⟩ = ⟨φ|ψ⟩`. [`materialize_unitary`] constructs one such
//! unitary explicitly when an end-to-end check is wanted.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::cloning::{ClonerResult, FactorDims, TwoStateSet, Which};
use crate::geometry::plane_point;
use crate::statespace::{
    gram_schmidt_residual, orthonormal_completion, tensor, tensor_all, StateVector, UnitaryMatrix,
};
use crate::{Complex64, Error, Result, ALGEBRAIC_TOL};

/// Which state an asymmetric machine copies perfectly.
pub type Favored = Which;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ClonerKind {
    Symmetric,
    Asymmetric,
    WoottersZurek,
}

/// A machine choice: kind, favoured state (asymmetric only), ancilla size.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ClonerSpec {
    pub kind: ClonerKind,
    pub favored: Option<Favored>,
    pub ancilla_dim: usize,
}

impl ClonerSpec {
    pub fn symmetric() -> Self {
        ClonerSpec {
            kind: ClonerKind::Symmetric,
            favored: None,
            ancilla_dim: 1,
        }
    }

    pub fn asymmetric(favored: Favored) -> Self {
        ClonerSpec {
            kind: ClonerKind::Asymmetric,
            favored: Some(favored),
            ancilla_dim: 1,
        }
    }

    pub fn wootters_zurek() -> Self {
        ClonerSpec {
            kind: ClonerKind::WoottersZurek,
            favored: None,
            ancilla_dim: 2,
        }
    }

    pub fn build(&self, set: &TwoStateSet) -> Result<ClonerResult> {
        match (self.kind, self.favored) {
            (ClonerKind::Symmetric, None) => build_symmetric(set),
            (ClonerKind::Asymmetric, Some(f)) => build_asymmetric(set, f),
            (ClonerKind::WoottersZurek, None) => build_wootters_zurek(set),
            _ => Err(Error::InvalidConfig(
                "`favored` is required for, and only for, the asymmetric cloner".into(),
            )),
        }
    }
}

fn reject_identical(set: &TwoStateSet) -> Result<()> {
    if set.z() * set.z() >= 1.0 - ALGEBRAIC_TOL {
        Err(Error::IdenticalStates)
    } else {
        Ok(())
    }
}

/// Orthonormal frame `(φ⊗φ, residual of ψ⊗ψ)` of the copy plane. With the
/// set's canonical phases, `ψ⊗ψ = z² e1 + √(1 − z⁴) e2`.
pub fn plane_frame(set: &TwoStateSet) -> Result<(StateVector, StateVector)> {
    reject_identical(set)?;
    let e1 = tensor(set.phi(), set.phi());
    let psi2 = tensor(set.psi(), set.psi());
    let e2 = gram_schmidt_residual(&psi2, &e1)?;
    Ok((e1, e2))
}

/// Optimal symmetric machine: each output sits at angle `(Δ − δ)/2` from its
/// ideal product, rotated towards the other one.
pub fn build_symmetric(set: &TwoStateSet) -> Result<ClonerResult> {
    let (e1, e2) = plane_frame(set)?;
    let big = set.tensor_delta().radians();
    let theta = (big - set.delta().radians()) / 2.0;
    let v_phi = plane_point(&e1, &e2, theta);
    let v_psi = plane_point(&e1, &e2, big - theta);
    ClonerResult::from_outputs(set.clone(), FactorDims::new(set.dim(), 1)?, &v_phi, &v_psi)
}

/// Optimal asymmetric machine: the favoured state is copied perfectly, the
/// other output sits at angle `δ` from it inside the copy plane.
pub fn build_asymmetric(set: &TwoStateSet, favored: Favored) -> Result<ClonerResult> {
    let (e1, e2) = plane_frame(set)?;
    let big = set.tensor_delta().radians();
    let delta = set.delta().radians();
    let (v_phi, v_psi) = match favored {
        Which::Phi => (e1.clone(), plane_point(&e1, &e2, delta)),
        Which::Psi => (plane_point(&e1, &e2, big - delta), tensor(set.psi(), set.psi())),
    };
    ClonerResult::from_outputs(set.clone(), FactorDims::new(set.dim(), 1)?, &v_phi, &v_psi)
}

/// Wootters–Zurek machine for the basis `{φ, ω}`, `ω ⊥ φ` in `span{φ, ψ}`:
/// `s ⊗ 0 ↦ s ⊗ s ⊗ f_s` with orthonormal ancilla flags `f_φ`, `f_ω`.
pub fn build_wootters_zurek(set: &TwoStateSet) -> Result<ClonerResult> {
    reject_identical(set)?;
    let z = set.z();
    let omega = gram_schmidt_residual(set.psi(), set.phi())?;
    let f1 = StateVector::basis(2, 0);
    let f2 = StateVector::basis(2, 1);
    let copy_phi = tensor_all(&[set.phi(), set.phi(), &f1]);
    let copy_omega = tensor_all(&[&omega, &omega, &f2]);
    let v_psi = &(&copy_phi * z) + &(&copy_omega * (1.0 - z * z).sqrt());
    ClonerResult::from_outputs(set.clone(), FactorDims::new(set.dim(), 2)?, &copy_phi, &v_psi)
}

/// Relative error of the optimal symmetric machine,
/// `√2 [ (1+z+z²)/(1+z+z²+z³) − 1/√(1+z²) ]^{1/2}`.
pub fn closed_form_re_s(z: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&z) {
        return Err(Error::out_of_domain("z", z, "[0, 1)"));
    }
    let a = 1.0 + z + z * z;
    let inside = a / (a + z * z * z) - 1.0 / (1.0 + z * z).sqrt();
    Ok(std::f64::consts::SQRT_2 * inside.max(0.0).sqrt())
}

/// The usual closed form for the Wootters–Zurek relative error,
/// `√3 z / √(1 + z²)`. It equals `X^(ψ) / √(1 − z⁴)`, i.e. it divides by the
/// ancilla-free ideal angle.
pub fn closed_form_re_wz(z: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&z) {
        return Err(Error::out_of_domain("z", z, "[0, 1]"));
    }
    Ok(3f64.sqrt() * z / (1.0 + z * z).sqrt())
}

/// The machine's input `s ⊗ e_0 ⊗ e_0` on original ⊗ copy ⊗ ancilla.
pub fn machine_input(s: &StateVector, dims: FactorDims) -> StateVector {
    tensor_all(&[
        s,
        &StateVector::basis(dims.d2, 0),
        &StateVector::basis(dims.danc, 0),
    ])
}

/// A unitary `U` with `U (s ⊗ 0 ⊗ 0) = V^(s)` for both states, obtained by
/// completing the input frame and the output frame to orthonormal bases and
/// mapping one onto the other.
pub fn materialize_unitary(result: &ClonerResult) -> Result<UnitaryMatrix> {
    let dims = result.dims;
    let n = dims.total();
    let in_phi = machine_input(result.set.phi(), dims);
    let in_psi = machine_input(result.set.psi(), dims);
    let out_phi = result.a_phi.v.clone();
    let out_psi = result.a_psi.v.clone();

    let frame = |a: StateVector, b: &StateVector| -> Result<Vec<StateVector>> {
        let second = gram_schmidt_residual(b, &a)?;
        let mut f = vec![a, second];
        let rest = orthonormal_completion(&f, n)?;
        f.extend(rest);
        Ok(f)
    };
    let ins = frame(in_phi, &in_psi)?;
    let outs = frame(out_phi, &out_psi)?;
    if ins.len() != n || outs.len() != n {
        return Err(Error::InvalidConfig("basis completion fell short".into()));
    }

    let to_matrix = |vs: &[StateVector]| {
        DMatrix::<Complex64>::from_columns(&vs.iter().map(|v| v.as_dvector().clone()).collect::<Vec<_>>())
    };
    let u = to_matrix(&outs) * to_matrix(&ins).adjoint();
    UnitaryMatrix::new(u)
}
