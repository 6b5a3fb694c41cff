//! Angle inequalities as executable checks.
//!
//! Each check returns an [`InequalityReport`] comparing a left-hand side with
//! the right-hand side it can never exceed. The sweep helpers run a check over
//! many seeded random inputs and keep the smallest slack seen.
//!
//! | check | inequality |
//! |---|---|
//! | [`lemma1_check`] | `cos δ(Φ,Ψ) ≤ cos(δ(Φ,Υ) − δ(Υ,Ψ))` |
//! | [`lemma2_defect`] | `δ(Φ,Υ) ≤ δ(Φ,Ψ) + δ(Υ,Ψ)` |
//! | [`lemma3_check`] | `\| \|⟨Θ\|Φ⟩\|² − \|⟨Θ\|Ψ⟩\|² \| ≤ sin δ(Φ,Ψ)` |
//! | [`lemma4_check`] | `\| ⟨Φ\|Π\|Φ⟩ − ⟨Ψ\|Π\|Ψ⟩ \| ≤ sin δ(Φ,Ψ)` |
//! | [`gate_approx_check`] | `\| P(R\|UΣ) − P(R\|VΣ) \| ≤ ε √(1 − ε²/4)`, `ε = ‖U − V‖` |

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, SQRT_2};
use std::ops::RangeInclusive;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::random::{
    perturbed_unitary, random_proper_projector, random_state, random_unitary, trial_rng,
};
use crate::statespace::{
    angle, inner, measure_prob, Projector, StateVector, UnitaryMatrix,
};
use crate::{Error, Result};

/// Default violation tolerance for the sweeps.
pub const SWEEP_TOL: f64 = 1e-10;

/// `lhs ≤ rhs` evaluated at tolerance `tol`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct InequalityReport {
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs − lhs`
    pub slack: f64,
    pub holds: bool,
    pub tol: f64,
}

impl InequalityReport {
    pub fn new(lhs: f64, rhs: f64, tol: f64) -> Self {
        let slack = rhs - lhs;
        InequalityReport {
            lhs,
            rhs,
            slack,
            holds: slack >= -tol,
            tol,
        }
    }

    pub fn with_tol(self, tol: f64) -> Self {
        InequalityReport::new(self.lhs, self.rhs, tol)
    }
}

fn same_dims(vs: &[&StateVector]) -> Result<()> {
    let d = vs[0].dim();
    for v in &vs[1..] {
        if v.dim() != d {
            return Err(Error::DimensionMismatch {
                left: d,
                right: v.dim(),
            });
        }
    }
    Ok(())
}

/// `cos δ(Φ,Ψ) ≤ cos(δ(Φ,Υ) − δ(Υ,Ψ))`.
pub fn lemma1_check(
    phi: &StateVector,
    upsilon: &StateVector,
    psi: &StateVector,
) -> Result<InequalityReport> {
    same_dims(&[phi, upsilon, psi])?;
    let lhs = angle(phi, psi)?.cos();
    let rhs = (angle(phi, upsilon)?.radians() - angle(upsilon, psi)?.radians()).cos();
    Ok(InequalityReport::new(lhs, rhs, SWEEP_TOL))
}

/// Spherical triangle inequality `δ(Φ,Υ) ≤ δ(Φ,Ψ) + δ(Υ,Ψ)`.
pub fn lemma2_defect(
    phi: &StateVector,
    upsilon: &StateVector,
    psi: &StateVector,
) -> Result<InequalityReport> {
    same_dims(&[phi, upsilon, psi])?;
    let lhs = angle(phi, upsilon)?.radians();
    let rhs = angle(phi, psi)?.radians() + angle(upsilon, psi)?.radians();
    Ok(InequalityReport::new(lhs, rhs, SWEEP_TOL))
}

/// `| |⟨Θ|Φ⟩|² − |⟨Θ|Ψ⟩|² | ≤ sin δ(Φ,Ψ)`.
pub fn lemma3_check(
    theta: &StateVector,
    phi: &StateVector,
    psi: &StateVector,
) -> Result<InequalityReport> {
    same_dims(&[theta, phi, psi])?;
    theta.check_unit()?;
    let lhs = (inner(theta, phi)?.norm_sqr() - inner(theta, psi)?.norm_sqr()).abs();
    let rhs = angle(phi, psi)?.sin();
    Ok(InequalityReport::new(lhs, rhs, SWEEP_TOL))
}

/// `| ⟨Φ|Π|Φ⟩ − ⟨Ψ|Π|Ψ⟩ | ≤ sin δ(Φ,Ψ)` for any orthogonal projector.
pub fn lemma4_check(p: &Projector, phi: &StateVector, psi: &StateVector) -> Result<InequalityReport> {
    same_dims(&[phi, psi])?;
    let lhs = (measure_prob(p, phi)? - measure_prob(p, psi)?).abs();
    let rhs = angle(phi, psi)?.sin();
    Ok(InequalityReport::new(lhs, rhs, SWEEP_TOL))
}

/// `ε √(1 − ε²/4)` for `0 ≤ ε ≤ 2`.
pub fn gate_bound(epsilon: f64) -> Result<f64> {
    if !(0.0..=2.0).contains(&epsilon) {
        return Err(Error::out_of_domain("epsilon", epsilon, "[0, 2]"));
    }
    Ok(epsilon * (1.0 - epsilon * epsilon / 4.0).max(0.0).sqrt())
}

/// Bound on an outcome-probability shift when `V` replaces `U`, given
/// `‖U − V‖ = ε`. Only for `ε ≤ √2` does `ε√(1 − ε²/4)` apply; beyond that the
/// final states can be orthogonal and the best available bound is 1.
pub fn probability_shift_bound(epsilon: f64) -> Result<f64> {
    if epsilon <= SQRT_2 {
        gate_bound(epsilon)
    } else if epsilon <= 2.0 + 1e-12 {
        Ok(1.0)
    } else {
        Err(Error::out_of_domain("epsilon", epsilon, "[0, 2]"))
    }
}

/// Compares `|P(R|UΣ) − P(R|VΣ)|` with [`probability_shift_bound`] of
/// `ε = ‖U − V‖` (largest singular value).
pub fn gate_approx_check(
    u: &UnitaryMatrix,
    v: &UnitaryMatrix,
    sigma: &StateVector,
    p: &Projector,
) -> Result<InequalityReport> {
    sigma.check_unit()?;
    let epsilon = u.distance(v)?.min(2.0);
    let gamma = u.apply(sigma)?;
    let upsilon = v.apply(sigma)?;
    let lhs = (measure_prob(p, &gamma)? - measure_prob(p, &upsilon)?).abs();
    Ok(InequalityReport::new(lhs, probability_shift_bound(epsilon)?, SWEEP_TOL))
}

/// Unit vector `cos θ · u + sin θ · w` in the real plane spanned by
/// orthonormal `u`, `w`.
pub fn plane_point(u: &StateVector, w: &StateVector, theta: f64) -> StateVector {
    &(u * theta.cos()) + &(w * theta.sin())
}

/// Three states at the given angles (radians) along one great circle of the
/// real plane `span{e_0, e_{dim−1}}`.
pub fn coplanar_triplet(dim: usize, angles: [f64; 3]) -> [StateVector; 3] {
    assert!(dim >= 2);
    let u = StateVector::basis(dim, 0);
    let w = StateVector::basis(dim, dim - 1);
    angles.map(|a| plane_point(&u, &w, a))
}

/// Equality witnesses for lemmas 1 and 2: coplanar triplets with `Ψ` lying
/// between `Φ` and `Υ`, all pairwise angles ≤ π/2.
pub fn coplanar_witnesses(dim: usize) -> Vec<(InequalityReport, InequalityReport)> {
    const CONFIGS: [[f64; 3]; 5] = [
        // Φ, Ψ, Υ in degrees
        [0.0, 20.0, 50.0],
        [0.0, 45.0, 90.0],
        [10.0, 10.0, 80.0],
        [5.0, 60.0, 61.0],
        [-30.0, 0.0, 40.0],
    ];
    CONFIGS
        .iter()
        .map(|deg| {
            let [phi, psi, upsilon] = coplanar_triplet(dim, deg.map(f64::to_radians));
            (
                lemma1_check(&phi, &upsilon, &psi).expect("valid triplet"),
                lemma2_defect(&phi, &upsilon, &psi).expect("valid triplet"),
            )
        })
        .collect()
}

/// For real qubit states `Φ`, `Ψ` at plane angles `a`, `b`, the rank-one
/// projector onto the direction at `(a + b)/2 + π/4`. It attains equality in
/// lemma 4.
pub fn bisector_projector(a: f64, b: f64) -> Projector {
    let u = StateVector::basis(2, 0);
    let w = StateVector::basis(2, 1);
    Projector::rank_one(&plane_point(&u, &w, (a + b) / 2.0 + FRAC_PI_4)).expect("unit")
}

/// `sup` over rank-one real projectors in `d = 2` of the lemma 4 left-hand
/// side, evaluated on a uniform grid of `steps` directions in `[0, π)`.
pub fn lemma4_rank_one_sup(phi: &StateVector, psi: &StateVector, steps: usize) -> Result<f64> {
    if phi.dim() != 2 || psi.dim() != 2 {
        return Err(Error::DimensionMismatch {
            left: phi.dim(),
            right: 2,
        });
    }
    let u = StateVector::basis(2, 0);
    let w = StateVector::basis(2, 1);
    let mut best: f64 = 0.0;
    for k in 0..steps {
        let alpha = std::f64::consts::PI * k as f64 / steps as f64;
        let p = Projector::rank_one(&plane_point(&u, &w, alpha))?;
        best = best.max(lemma4_check(&p, phi, psi)?.lhs);
    }
    Ok(best)
}

/// Aggregate of a seeded sweep.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepSummary {
    pub name: String,
    pub trials: u64,
    pub min_slack: f64,
    /// Trial index that produced `min_slack`.
    pub worst_trial: u64,
    pub violations: u64,
    pub tol: f64,
}

/// FNV-1a of the sweep name, mixed into the master seed so that sweeps run
/// with the same seed draw independent samples.
fn name_salt(name: &str) -> u64 {
    name.bytes()
        .fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3))
}

/// Runs `trial` for indices `0..trials` in parallel, each with its own
/// derived RNG stream, and reduces to a [`SweepSummary`].
pub fn run_sweep<F>(name: &str, trials: u64, seed: u64, tol: f64, trial: F) -> Result<SweepSummary>
where
    F: Fn(&mut rand_chacha::ChaCha8Rng) -> Result<InequalityReport> + Sync,
{
    let master = seed ^ name_salt(name);
    let (min_slack, worst_trial, violations) = (0..trials)
        .into_par_iter()
        .map(|i| {
            let report = trial(&mut trial_rng(master, i))?.with_tol(tol);
            Ok((report.slack, i, u64::from(!report.holds)))
        })
        .try_reduce(
            || (f64::INFINITY, u64::MAX, 0),
            |a, b| {
                // (slack, index) ordering keeps the reduction order-independent
                let worst = if (b.0, b.1) < (a.0, a.1) { (b.0, b.1) } else { (a.0, a.1) };
                Ok((worst.0, worst.1, a.2 + b.2))
            },
        )?;
    Ok(SweepSummary {
        name: name.to_string(),
        trials,
        min_slack,
        worst_trial,
        violations,
        tol,
    })
}

fn pick_dim<R: Rng>(rng: &mut R, dims: &RangeInclusive<usize>) -> usize {
    rng.random_range(dims.clone())
}

pub fn sweep_lemma1(trials: u64, dims: RangeInclusive<usize>, seed: u64, tol: f64) -> Result<SweepSummary> {
    run_sweep("lemma1", trials, seed, tol, |rng| {
        let d = pick_dim(rng, &dims);
        let (a, b, c) = (random_state(rng, d), random_state(rng, d), random_state(rng, d));
        lemma1_check(&a, &b, &c)
    })
}

pub fn sweep_lemma2(trials: u64, dims: RangeInclusive<usize>, seed: u64, tol: f64) -> Result<SweepSummary> {
    run_sweep("lemma2", trials, seed, tol, |rng| {
        let d = pick_dim(rng, &dims);
        let (a, b, c) = (random_state(rng, d), random_state(rng, d), random_state(rng, d));
        lemma2_defect(&a, &b, &c)
    })
}

pub fn sweep_lemma3(trials: u64, dims: RangeInclusive<usize>, seed: u64, tol: f64) -> Result<SweepSummary> {
    run_sweep("lemma3", trials, seed, tol, |rng| {
        let d = pick_dim(rng, &dims);
        let (a, b, c) = (random_state(rng, d), random_state(rng, d), random_state(rng, d));
        lemma3_check(&a, &b, &c)
    })
}

pub fn sweep_lemma4(trials: u64, dims: RangeInclusive<usize>, seed: u64, tol: f64) -> Result<SweepSummary> {
    run_sweep("lemma4", trials, seed, tol, |rng| {
        let d = pick_dim(rng, &dims);
        let p = random_proper_projector(rng, d);
        let (a, b) = (random_state(rng, d), random_state(rng, d));
        lemma4_check(&p, &a, &b)
    })
}

/// Addendum sweep: random `U`, a perturbation `V` (perturbation scale uniform
/// in `[0, 1]`, one trial in eight a pure global phase), random state and
/// projector.
pub fn sweep_gate(trials: u64, dims: RangeInclusive<usize>, seed: u64, tol: f64) -> Result<SweepSummary> {
    run_sweep("gate", trials, seed, tol, |rng| {
        let d = pick_dim(rng, &dims);
        let u = random_unitary(rng, d);
        let v = if rng.random_range(0..8) == 0 {
            u.with_phase(rng.random_range(-FRAC_PI_2..FRAC_PI_2))
        } else {
            let scale = rng.random_range(0.0..1.0);
            perturbed_unitary(rng, &u, scale)?
        };
        let sigma = random_state(rng, d);
        let p = random_proper_projector(rng, d);
        gate_approx_check(&u, &v, &sigma, &p)
    })
}

/// All five sweeps with the same trial count, dimension range and seed.
pub fn sweep_all(trials: u64, dims: RangeInclusive<usize>, seed: u64, tol: f64) -> Result<Vec<SweepSummary>> {
    Ok(vec![
        sweep_lemma1(trials, dims.clone(), seed, tol)?,
        sweep_lemma2(trials, dims.clone(), seed, tol)?,
        sweep_lemma3(trials, dims.clone(), seed, tol)?,
        sweep_lemma4(trials, dims.clone(), seed, tol)?,
        sweep_gate(trials, dims, seed, tol)?,
    ])
}
