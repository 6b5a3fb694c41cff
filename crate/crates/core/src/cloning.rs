//! Error calculus for a copying machine acting on a two-state set.
//!
//! A machine maps `|s⟩ ⊗ |0⟩ ⊗ |m⟩` to an output `|V^(s)⟩` on
//! original ⊗ copy ⊗ ancilla. Projecting the output onto `|s⟩⟨s| ⊗ |s⟩⟨s| ⊗ 1`
//! splits it into
//!
//! ```text
//! |V^(s)⟩ = |s⟩|s⟩|q^(s)⟩ + |⊥^(s)⟩,      ‖q‖² + ‖⊥‖² = 1.
//! ```
//!
//! The error size is `X^(s) = ‖⊥^(s)‖ = sin δ^(s)`, where `δ^(s)` is the angle
//! from the output to the closest product `s ⊗ s ⊗ k`, reached at the ideal
//! output `Id^(s) = s ⊗ s ⊗ q/‖q‖`.
//!
//! The absolute error of a machine is `X^(φ) + X^(ψ)`; the relative error
//! divides it by `sin δ(Id^(φ), Id^(ψ))`.

use serde::Serialize;

use crate::geometry::InequalityReport;
use crate::statespace::{angle, inner, measure_prob, tensor, Angle, Projector, StateVector};
use crate::{Complex64, Error, Result, ALGEBRAIC_TOL, UNITARY_TOL};

/// A pair of unit states `{φ, ψ}` of the same dimension.
///
/// `ψ` is stored with its global phase chosen so that `⟨φ|ψ⟩ = z ≥ 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoStateSet {
    phi: StateVector,
    psi: StateVector,
    z: f64,
    delta: Angle,
}

impl TwoStateSet {
    pub fn new(phi: StateVector, psi: StateVector) -> Result<Self> {
        phi.check_unit()?;
        psi.check_unit()?;
        let overlap = inner(&phi, &psi)?;
        let z = overlap.norm().min(1.0);
        let psi = if overlap.norm() > 0.0 {
            psi.scaled(overlap.conj() / overlap.norm())
        } else {
            psi
        };
        Ok(TwoStateSet {
            phi,
            psi,
            z,
            delta: Angle::from_overlap(z),
        })
    }

    /// `φ = e_0`, `ψ = z e_0 + √(1 − z²) e_1` in dimension `dim`.
    pub fn canonical(z: f64, dim: usize) -> Result<Self> {
        if !(0.0..=1.0).contains(&z) {
            return Err(Error::out_of_domain("z", z, "[0, 1]"));
        }
        if dim < 2 {
            return Err(Error::InvalidConfig(format!("dimension {dim} < 2")));
        }
        let phi = StateVector::basis(dim, 0);
        let psi = &(&phi * z) + &(&StateVector::basis(dim, 1) * (1.0 - z * z).sqrt());
        Ok(TwoStateSet {
            phi,
            psi,
            z,
            delta: Angle::from_overlap(z),
        })
    }

    pub fn phi(&self) -> &StateVector {
        &self.phi
    }

    pub fn psi(&self) -> &StateVector {
        &self.psi
    }

    /// `|⟨φ|ψ⟩|`
    pub fn z(&self) -> f64 {
        self.z
    }

    /// `δ(φ, ψ)`
    pub fn delta(&self) -> Angle {
        self.delta
    }

    /// `Δ = δ(φ⊗φ, ψ⊗ψ) = arccos z²`.
    pub fn tensor_delta(&self) -> Angle {
        Angle::from_overlap(self.z * self.z)
    }

    pub fn dim(&self) -> usize {
        self.phi.dim()
    }

    pub fn state(&self, which: Which) -> &StateVector {
        match which {
            Which::Phi => &self.phi,
            Which::Psi => &self.psi,
        }
    }
}

/// Selects one member of a [`TwoStateSet`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Which {
    Phi,
    Psi,
}

impl Which {
    pub fn other(self) -> Self {
        match self {
            Which::Phi => Which::Psi,
            Which::Psi => Which::Phi,
        }
    }
}

/// Factor dimensions of original ⊗ copy ⊗ ancilla.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct FactorDims {
    pub d1: usize,
    pub d2: usize,
    /// 1 means no ancilla.
    pub danc: usize,
}

impl FactorDims {
    pub fn new(d: usize, danc: usize) -> Result<Self> {
        if d == 0 || danc == 0 {
            return Err(Error::InvalidConfig(format!("bad factor dims d={d}, danc={danc}")));
        }
        Ok(FactorDims { d1: d, d2: d, danc })
    }

    pub fn total(&self) -> usize {
        self.d1 * self.d2 * self.danc
    }

    fn index(&self, i: usize, j: usize, l: usize) -> usize {
        (i * self.d2 + j) * self.danc + l
    }
}

/// Decomposition of one cloner output.
#[derive(Clone, Debug, PartialEq)]
pub struct CloneAnalysis {
    pub dims: FactorDims,
    /// The output `|V^(s)⟩`.
    pub v: StateVector,
    /// `|q^(s)⟩` on the ancilla, generally not normalised.
    pub q: StateVector,
    pub perp_norm: f64,
    /// Error size `X^(s)`.
    pub x: f64,
    /// `δ^(s)`, the angle from `V^(s)` to `Id^(s)`.
    pub delta_s: Angle,
    /// `Id^(s)`; `None` when `q = 0` and every `k` is equally far.
    pub ideal: Option<StateVector>,
    /// `k^(s) = q/‖q‖`; `None` together with `ideal`.
    pub k: Option<StateVector>,
}

/// Splits `v` into its `s ⊗ s ⊗ q` part and the orthogonal remainder.
pub fn analyze_output(v: &StateVector, s: &StateVector, dims: FactorDims) -> Result<CloneAnalysis> {
    if v.dim() != dims.total() {
        return Err(Error::DimensionMismatch {
            left: v.dim(),
            right: dims.total(),
        });
    }
    if s.dim() != dims.d1 || dims.d1 != dims.d2 {
        return Err(Error::DimensionMismatch {
            left: s.dim(),
            right: dims.d1,
        });
    }
    v.check_unit()?;
    s.check_unit()?;

    let ss = tensor(s, s);
    let amps = v.amplitudes();
    let ss_amps = ss.amplitudes();
    let q: Vec<Complex64> = (0..dims.danc)
        .map(|l| {
            ss_amps
                .iter()
                .enumerate()
                .map(|(ij, c)| c.conj() * amps[ij * dims.danc + l])
                .sum()
        })
        .collect();
    let q = StateVector::new(q)?;
    let perp = v - &tensor(&ss, &q);
    let perp_norm = perp.norm();
    let q_norm = q.norm();

    let (ideal, k) = if q_norm > ALGEBRAIC_TOL {
        let k = q.normalized()?;
        (Some(tensor(&ss, &k)), Some(k))
    } else {
        (None, None)
    };

    Ok(CloneAnalysis {
        dims,
        v: v.clone(),
        q,
        perp_norm,
        x: perp_norm,
        delta_s: Angle::from_components(q_norm, perp_norm),
        ideal,
        k,
    })
}

/// `X^(φ) + X^(ψ)`.
pub fn absolute_error(r_phi: &CloneAnalysis, r_psi: &CloneAnalysis) -> f64 {
    r_phi.x + r_psi.x
}

/// Both outputs of a machine on a [`TwoStateSet`] with derived errors.
#[derive(Clone, Debug, PartialEq)]
pub struct ClonerResult {
    pub set: TwoStateSet,
    pub dims: FactorDims,
    pub a_phi: CloneAnalysis,
    pub a_psi: CloneAnalysis,
    pub ae: f64,
    /// `None` when an ideal output is degenerate or the two ideals coincide.
    pub re: Option<f64>,
    /// `δ(Id^(φ), Id^(ψ))`, when both ideals exist.
    pub ideal_angle: Option<Angle>,
}

impl ClonerResult {
    /// Analyses a pair of outputs. Realisability is not checked here; see
    /// [`ClonerResult::unitarity_residual`].
    pub fn from_outputs(
        set: TwoStateSet,
        dims: FactorDims,
        v_phi: &StateVector,
        v_psi: &StateVector,
    ) -> Result<Self> {
        let a_phi = analyze_output(v_phi, set.phi(), dims)?;
        let a_psi = analyze_output(v_psi, set.psi(), dims)?;
        let ae = absolute_error(&a_phi, &a_psi);
        let ideal_angle = match (&a_phi.ideal, &a_psi.ideal) {
            (Some(a), Some(b)) => Some(angle(a, b)?),
            _ => None,
        };
        let mut result = ClonerResult {
            set,
            dims,
            a_phi,
            a_psi,
            ae,
            re: None,
            ideal_angle,
        };
        result.re = relative_error(&result).unwrap_or(None);
        Ok(result)
    }

    pub fn analysis(&self, which: Which) -> &CloneAnalysis {
        match which {
            Which::Phi => &self.a_phi,
            Which::Psi => &self.a_psi,
        }
    }

    /// `|⟨V^(φ)|V^(ψ)⟩ − ⟨φ|ψ⟩|`; zero for outputs of a genuine unitary.
    pub fn unitarity_residual(&self) -> f64 {
        let out = inner(&self.a_phi.v, &self.a_psi.v).expect("same dims");
        let inp = inner(self.set.phi(), self.set.psi()).expect("same dims");
        (out - inp).norm()
    }

    pub fn is_realizable(&self) -> bool {
        self.unitarity_residual() < UNITARY_TOL
    }
}

/// `AE / sin δ(Id^(φ), Id^(ψ))`.
///
/// Returns `Ok(None)` when the two ideal outputs coincide (`sin < 1e−12`),
/// and `Err(DegenerateIdeal)` when either ideal output does not exist.
pub fn relative_error(r: &ClonerResult) -> Result<Option<f64>> {
    let ideal_angle = r.ideal_angle.ok_or(Error::DegenerateIdeal)?;
    let s = ideal_angle.sin();
    if s < ALGEBRAIC_TOL {
        Ok(None)
    } else {
        Ok(Some(r.ae / s))
    }
}

/// The two angle restrictions every unitary machine obeys:
///
/// 1. `δ(Id^(φ), Id^(ψ)) ≤ δ^(φ) + δ^(ψ) + δ(V^(φ), V^(ψ))`
/// 2. `δ^(φ) + δ^(ψ) ≥ Δ − δ(φ, ψ)`
pub fn inequality_chain(r: &ClonerResult) -> Result<(InequalityReport, InequalityReport)> {
    let ideal_angle = r.ideal_angle.ok_or(Error::DegenerateIdeal)?;
    let budget = r.a_phi.delta_s.radians() + r.a_psi.delta_s.radians();
    let output_angle = angle(&r.a_phi.v, &r.a_psi.v)?;
    let first = InequalityReport::new(
        ideal_angle.radians(),
        budget + output_angle.radians(),
        UNITARY_TOL,
    );
    let second = InequalityReport::new(
        r.set.tensor_delta().radians() - r.set.delta().radians(),
        budget,
        UNITARY_TOL,
    );
    Ok((first, second))
}

/// Which factor a single-particle observable is measured on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Mode {
    /// particle 1
    Original,
    /// particle 2
    Copy,
}

/// `⟨V| Π ⊗ 1 ⊗ 1 |V⟩` or `⟨V| 1 ⊗ Π ⊗ 1 |V⟩`, contracted factor by factor.
pub fn lifted_prob(v: &StateVector, p: &Projector, dims: FactorDims, mode: Mode) -> Result<f64> {
    if v.dim() != dims.total() {
        return Err(Error::DimensionMismatch {
            left: v.dim(),
            right: dims.total(),
        });
    }
    if p.ambient_dim() != dims.d1 {
        return Err(Error::DimensionMismatch {
            left: p.ambient_dim(),
            right: dims.d1,
        });
    }
    let amps = v.amplitudes();
    let mut total = 0.0;
    for b in p.basis() {
        let b = b.amplitudes();
        for other in 0..dims.d1 {
            for l in 0..dims.danc {
                let c: Complex64 = (0..dims.d1)
                    .map(|m| {
                        let idx = match mode {
                            Mode::Original => dims.index(m, other, l),
                            Mode::Copy => dims.index(other, m, l),
                        };
                        b[m].conj() * amps[idx]
                    })
                    .sum();
                total += c.norm_sqr();
            }
        }
    }
    Ok(total)
}

/// `Π ⊗ 1 ⊗ 1` or `1 ⊗ Π ⊗ 1` as an explicit projector on the composite space.
pub fn lift_projector(p: &Projector, dims: FactorDims, mode: Mode) -> Result<Projector> {
    if p.ambient_dim() != dims.d1 {
        return Err(Error::DimensionMismatch {
            left: p.ambient_dim(),
            right: dims.d1,
        });
    }
    let mut basis = Vec::with_capacity(p.rank() * dims.d2 * dims.danc);
    for b in p.basis() {
        for other in 0..dims.d2 {
            for l in 0..dims.danc {
                let e = StateVector::basis(dims.d2, other);
                let f = StateVector::basis(dims.danc, l);
                let pair = match mode {
                    Mode::Original => tensor(b, &e),
                    Mode::Copy => tensor(&e, b),
                };
                basis.push(tensor(&pair, &f));
            }
        }
    }
    Projector::new(basis, dims.total())
}

/// `| P(a for mode | V^(s)) − ⟨s|Π|s⟩ | ≤ X^(s)`.
pub fn measurement_deviation(
    a: &CloneAnalysis,
    s: &StateVector,
    p: &Projector,
    mode: Mode,
) -> Result<InequalityReport> {
    let observed = lifted_prob(&a.v, p, a.dims, mode)?;
    let desired = measure_prob(p, s)?;
    Ok(InequalityReport::new((observed - desired).abs(), a.x, UNITARY_TOL))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_proper_projector, random_state, trial_rng};
    use crate::statespace::tensor_all;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn canonical_set() {
        let set = TwoStateSet::canonical(0.5, 3).unwrap();
        assert_eq!(set.z(), 0.5);
        assert_abs_diff_eq!(inner(set.phi(), set.psi()).unwrap().re, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(set.delta().radians(), std::f64::consts::FRAC_PI_3, epsilon = 1e-15);
        assert!(TwoStateSet::canonical(1.5, 2).is_err());
        assert!(TwoStateSet::canonical(0.5, 1).is_err());
    }

    #[test]
    fn new_canonicalises_phase() {
        let mut rng = trial_rng(5, 0);
        let phi = random_state(&mut rng, 3);
        let psi = random_state(&mut rng, 3);
        let set = TwoStateSet::new(phi.clone(), psi.clone()).unwrap();
        let o = inner(set.phi(), set.psi()).unwrap();
        assert!(o.im.abs() < 1e-15 && o.re >= 0.0);
        assert_abs_diff_eq!(o.re, inner(&phi, &psi).unwrap().norm(), epsilon = 1e-15);
        // Δ ≥ δ
        assert!(set.tensor_delta().radians() >= set.delta().radians() - 1e-12);
    }

    #[test]
    fn perfect_copy_has_no_error() {
        let s = StateVector::from_real(&[0.6, 0.8]).unwrap();
        let m = StateVector::new(vec![Complex64::new(0.0, 1.0), Complex64::new(0.0, 0.0)]).unwrap();
        let dims = FactorDims::new(2, 2).unwrap();
        let v = tensor_all(&[&s, &s, &m]);
        let a = analyze_output(&v, &s, dims).unwrap();
        assert!(a.x < 1e-15);
        assert!(a.delta_s.radians() < 1e-15);
        assert!(a.ideal.as_ref().unwrap().max_abs_diff(&v).unwrap() < 1e-15);
    }

    #[test]
    fn orthogonal_copy_is_degenerate() {
        let s = StateVector::from_real(&[0.6, 0.8]).unwrap();
        let t = StateVector::from_real(&[-0.8, 0.6]).unwrap();
        let m = StateVector::basis(1, 0);
        let dims = FactorDims::new(2, 1).unwrap();
        let a = analyze_output(&tensor_all(&[&s, &t, &m]), &s, dims).unwrap();
        assert_abs_diff_eq!(a.x, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(a.delta_s.radians(), FRAC_PI_2, epsilon = 1e-7);
        assert!(a.ideal.is_none() && a.k.is_none());
    }

    #[test]
    fn random_outputs_satisfy_norm_split() {
        let mut rng = trial_rng(17, 0);
        for danc in 1..=3 {
            let dims = FactorDims::new(3, danc).unwrap();
            for _ in 0..200 {
                let v = random_state(&mut rng, dims.total());
                let s = random_state(&mut rng, 3);
                let a = analyze_output(&v, &s, dims).unwrap();
                assert_abs_diff_eq!(a.q.norm().powi(2) + a.x * a.x, 1.0, epsilon = 1e-12);
                assert_abs_diff_eq!(a.x, a.delta_s.sin(), epsilon = 1e-12);
                assert_abs_diff_eq!(a.q.norm(), a.delta_s.cos(), epsilon = 1e-12);
                // the ideal output is at angle δ^(s) from V
                let ideal = a.ideal.unwrap();
                assert_abs_diff_eq!(
                    angle(&v, &ideal).unwrap().radians(),
                    a.delta_s.radians(),
                    epsilon = 1e-7
                );
            }
        }
    }

    #[test]
    fn analysis_rejects_bad_dims() {
        let dims = FactorDims::new(2, 1).unwrap();
        let s = StateVector::basis(2, 0);
        assert!(analyze_output(&StateVector::basis(8, 0), &s, dims).is_err());
        assert!(analyze_output(&StateVector::basis(4, 0), &StateVector::basis(3, 0), dims).is_err());
    }

    #[test]
    fn absolute_error_sums() {
        let dims = FactorDims::new(2, 1).unwrap();
        let s = StateVector::basis(2, 0);
        let mk = |x: f64| {
            let v = StateVector::from_real(&[(1.0 - x * x).sqrt(), x, 0.0, 0.0]).unwrap();
            analyze_output(&v, &s, dims).unwrap()
        };
        assert_abs_diff_eq!(absolute_error(&mk(0.3), &mk(0.4)), 0.7, epsilon = 1e-15);
        assert_eq!(absolute_error(&mk(0.0), &mk(0.0)), 0.0);
    }

    #[test]
    fn orthogonal_states_with_perfect_copies() {
        let set = TwoStateSet::canonical(0.0, 2).unwrap();
        let dims = FactorDims::new(2, 1).unwrap();
        let vp = tensor(set.phi(), set.phi());
        let vs = tensor(set.psi(), set.psi());
        let r = ClonerResult::from_outputs(set, dims, &vp, &vs).unwrap();
        assert_eq!(r.ae, 0.0);
        assert_eq!(r.re, Some(0.0));
        assert!(r.is_realizable());
    }

    #[test]
    fn identical_states_have_undefined_relative_error() {
        let set = TwoStateSet::canonical(1.0, 2).unwrap();
        let dims = FactorDims::new(2, 1).unwrap();
        let v = tensor(set.phi(), set.phi());
        let r = ClonerResult::from_outputs(set, dims, &v, &v).unwrap();
        assert_eq!(r.ae, 0.0);
        assert_eq!(relative_error(&r), Ok(None));
        assert_eq!(r.re, None);
    }

    #[test]
    fn degenerate_ideal_is_an_error_for_relative_error() {
        let set = TwoStateSet::canonical(0.0, 2).unwrap();
        let dims = FactorDims::new(2, 1).unwrap();
        // ψ-output orthogonal to ψ⊗ψ
        let vp = tensor(set.phi(), set.phi());
        let vs = tensor(set.psi(), set.phi());
        let r = ClonerResult::from_outputs(set, dims, &vp, &vs).unwrap();
        assert_eq!(relative_error(&r), Err(Error::DegenerateIdeal));
        assert_eq!(inequality_chain(&r).unwrap_err(), Error::DegenerateIdeal);
    }

    #[test]
    fn lifted_probability_matches_explicit_projector() {
        let mut rng = trial_rng(23, 0);
        for danc in [1, 2] {
            let dims = FactorDims::new(3, danc).unwrap();
            for _ in 0..50 {
                let v = random_state(&mut rng, dims.total());
                let p = random_proper_projector(&mut rng, 3);
                for mode in [Mode::Original, Mode::Copy] {
                    let fast = lifted_prob(&v, &p, dims, mode).unwrap();
                    let slow = measure_prob(&lift_projector(&p, dims, mode).unwrap(), &v).unwrap();
                    assert_abs_diff_eq!(fast, slow, epsilon = 1e-13);
                }
            }
        }
    }

    #[test]
    fn perfect_copy_reproduces_single_particle_statistics() {
        let mut rng = trial_rng(29, 0);
        let dims = FactorDims::new(2, 2).unwrap();
        let s = random_state(&mut rng, 2);
        let m = random_state(&mut rng, 2);
        let a = analyze_output(&tensor_all(&[&s, &s, &m]), &s, dims).unwrap();
        for _ in 0..20 {
            let p = random_proper_projector(&mut rng, 2);
            for mode in [Mode::Original, Mode::Copy] {
                let r = measurement_deviation(&a, &s, &p, mode).unwrap();
                assert!(r.lhs < 1e-14);
            }
        }
    }

    #[test]
    fn random_outputs_obey_measurement_deviation() {
        let mut rng = trial_rng(31, 0);
        let dims = FactorDims::new(2, 2).unwrap();
        for _ in 0..500 {
            let v = random_state(&mut rng, dims.total());
            let s = random_state(&mut rng, 2);
            let a = analyze_output(&v, &s, dims).unwrap();
            let p = random_proper_projector(&mut rng, 2);
            assert!(measurement_deviation(&a, &s, &p, Mode::Copy).unwrap().holds);
            assert!(measurement_deviation(&a, &s, &p, Mode::Original).unwrap().holds);
        }
    }
}
