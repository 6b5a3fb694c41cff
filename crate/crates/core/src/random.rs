//! Seeded samplers for states, projectors and unitaries.
//!
//! Every sweep derives one independent ChaCha stream per trial from a master
//! seed, so results do not depend on how trials are scheduled across threads.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::statespace::{Projector, StateVector, UnitaryMatrix};
use crate::Result;

/// RNG for trial `trial` of a run seeded with `master`.
pub fn trial_rng(master: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(trial);
    rng
}

fn gaussian_complex<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Vector of i.i.d. complex standard Gaussians (not normalised).
pub fn gaussian_vector<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> StateVector {
    StateVector::new((0..dim).map(|_| gaussian_complex(rng)).collect())
        .expect("dim must be positive")
}

/// Haar-random unit vector.
pub fn random_state<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> StateVector {
    loop {
        let g = gaussian_vector(rng, dim);
        if let Ok(v) = g.normalized() {
            return v;
        }
    }
}

/// Projector onto the span of `rank` Gaussian vectors.
pub fn random_projector<R: Rng + ?Sized>(rng: &mut R, dim: usize, rank: usize) -> Projector {
    assert!(rank >= 1 && rank <= dim, "rank {rank} invalid for dim {dim}");
    loop {
        let vectors: Vec<StateVector> = (0..rank).map(|_| gaussian_vector(rng, dim)).collect();
        if let Ok(p) = Projector::spanning(&vectors) {
            return p;
        }
    }
}

/// Projector of uniformly drawn rank in `1..=dim−1` (rank 1 when `dim == 1`).
pub fn random_proper_projector<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Projector {
    let rank = if dim <= 2 { 1 } else { rng.random_range(1..dim) };
    random_projector(rng, dim, rank)
}

/// Random unitary from orthonormalising the columns of a Gaussian matrix.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> UnitaryMatrix {
    let p = random_projector(rng, dim, dim);
    UnitaryMatrix::from_columns(p.basis()).expect("orthonormal columns")
}

/// `U · W` with `W` the orthonormalised columns of `1 + scale · G`.
pub fn perturbed_unitary<R: Rng + ?Sized>(
    rng: &mut R,
    u: &UnitaryMatrix,
    scale: f64,
) -> Result<UnitaryMatrix> {
    let dim = u.dim();
    loop {
        let g = DMatrix::from_fn(dim, dim, |_, _| gaussian_complex(rng));
        let m = DMatrix::<Complex64>::identity(dim, dim) + g * Complex64::new(scale, 0.0);
        let columns: Vec<StateVector> = m
            .column_iter()
            .map(|c| StateVector::new(c.iter().copied().collect()).expect("non-empty"))
            .collect();
        if let Ok(p) = Projector::spanning(&columns) {
            let w = UnitaryMatrix::from_columns(p.basis())?;
            return u.compose(&w);
        }
    }
}
