//! Numerical tightness checks for the error bounds.
//!
//! Any pair of unit outputs with `⟨V^(φ)|V^(ψ)⟩ = ⟨φ|ψ⟩` extends to a unitary
//! machine, so minimising over such pairs minimises over all machines. Pairs
//! are searched inside a subspace of the copy space spanned by `φ⊗φ`, the
//! residual of `ψ⊗ψ`, and `subspace_dim − 2` further orthonormal directions.
//!
//! Pairs are written as `V^(ψ) = z V^(φ) + √(1 − z²) W` with `W ⊥ V^(φ)`,
//! which fixes the inner product by construction (see [`parameterize_pair`]).

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{ae_lower_bound, re_lower_bound};
use crate::cloners::plane_frame;
use crate::cloning::{inequality_chain, ClonerResult, FactorDims, TwoStateSet};
use crate::random::{gaussian_vector, random_state, trial_rng};
use crate::statespace::{orthonormal_completion, StateVector};
use crate::{Complex64, Error, Result, UNITARY_TOL};

/// Slack allowed below an analytic bound before a value counts as a violation.
pub const FLOOR_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SearchConfig {
    pub z: f64,
    /// Dimension of the search subspace, at least 2 (the copy plane).
    pub subspace_dim: usize,
    pub restarts: usize,
    /// Nelder–Mead iterations per start.
    pub max_iters: usize,
    /// Simplex spread at which a local run counts as converged.
    pub objective_tol: f64,
    pub seed: u64,
}

impl SearchConfig {
    pub fn new(z: f64) -> Self {
        SearchConfig {
            z,
            subspace_dim: 4,
            restarts: 20,
            max_iters: 400,
            objective_tol: 1e-14,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.subspace_dim < 2 {
            return Err(Error::InvalidConfig(format!(
                "subspace_dim must be at least 2, got {}",
                self.subspace_dim
            )));
        }
        if self.restarts < 1 {
            return Err(Error::InvalidConfig("restarts must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&self.z) {
            return Err(Error::out_of_domain("z", self.z, "[0, 1)"));
        }
        Ok(())
    }

    /// Number of real parameters of [`parameterize_pair`].
    pub fn param_len(&self) -> usize {
        4 * self.subspace_dim - 4
    }
}

/// What to minimise.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Objective {
    /// absolute error
    Ae,
    /// relative error
    Re,
}

/// Unit vector from a leading `1` followed by `(re, im)` parameter pairs.
fn raw_vector(params: &[f64]) -> Vec<Complex64> {
    std::iter::once(Complex64::new(1.0, 0.0))
        .chain(params.chunks_exact(2).map(|p| Complex64::new(p[0], p[1])))
        .collect()
}

/// Output pair in subspace coordinates from `4n − 4` real parameters
/// (`n = subspace_dim`).
///
/// The first `2n − 2` parameters give the raw `V^(φ) = (1, v_2, …, v_n)`, the
/// rest the raw `W = (1, w_2, …, w_n)`. Pinning the first raw coordinate to 1
/// removes the scale and phase gauge of each vector. `V^(φ)` is normalised,
/// `W` is projected off `V^(φ)` and normalised, and
/// `V^(ψ) = z V^(φ) + √(1 − z²) W`.
pub fn parameterize_pair(params: &[f64], z: f64, subspace_dim: usize) -> Result<(StateVector, StateVector)> {
    let half = 2 * subspace_dim - 2;
    if subspace_dim < 2 || params.len() != 2 * half {
        return Err(Error::InvalidConfig(format!(
            "expected {} parameters for subspace_dim {subspace_dim}, got {}",
            4 * subspace_dim.max(1) - 4,
            params.len()
        )));
    }
    if !(0.0..=1.0).contains(&z) {
        return Err(Error::out_of_domain("z", z, "[0, 1]"));
    }
    let v = StateVector::new(raw_vector(&params[..half]))?.normalized()?;
    let w_raw = StateVector::new(raw_vector(&params[half..]))?;
    let w_norm = w_raw.norm();
    let mut w = &w_raw - &v.scaled(v.as_dvector().dotc(w_raw.as_dvector()));
    let again = v.as_dvector().dotc(w.as_dvector());
    w = &w - &v.scaled(again);
    if w.norm() <= 1e-12 * w_norm {
        return Err(Error::Collinear { overlap: 1.0 });
    }
    let w = w.normalized()?;
    let v_psi = &(&v * z) + &(&w * (1.0 - z * z).sqrt());
    Ok((v, v_psi))
}

/// Parameters that reproduce the asymmetric machine favouring `φ`:
/// `V^(φ) = b_1`, `W = b_2`.
pub fn asymmetric_params(subspace_dim: usize) -> Vec<f64> {
    let mut p = vec![0.0; 4 * subspace_dim - 4];
    p[2 * subspace_dim - 2] = 1.0;
    p
}

/// The search subspace inside the copy space of a [`TwoStateSet`].
#[derive(Clone, Debug)]
pub struct SearchSpace {
    set: TwoStateSet,
    dims: FactorDims,
    basis: Vec<StateVector>,
}

impl SearchSpace {
    /// Basis `φ⊗φ`, residual of `ψ⊗ψ`, then `subspace_dim − 2` standard
    /// completion vectors of the `d²`-dimensional copy space.
    pub fn new(set: &TwoStateSet, subspace_dim: usize) -> Result<Self> {
        let d = set.dim();
        if subspace_dim < 2 || subspace_dim > d * d {
            return Err(Error::InvalidConfig(format!(
                "subspace_dim {subspace_dim} must lie in [2, {}]",
                d * d
            )));
        }
        let (e1, e2) = plane_frame(set)?;
        let mut basis = vec![e1, e2];
        let extra = orthonormal_completion(&basis, d * d)?;
        basis.extend(extra.into_iter().take(subspace_dim - 2));
        Ok(SearchSpace {
            set: set.clone(),
            dims: FactorDims::new(d, 1)?,
            basis,
        })
    }

    pub fn subspace_dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[StateVector] {
        &self.basis
    }

    /// Maps subspace coordinates into the copy space.
    pub fn embed(&self, coords: &StateVector) -> StateVector {
        let mut out = StateVector::zeros(self.dims.total());
        for (c, b) in coords.amplitudes().iter().zip(&self.basis) {
            out = &out + &b.scaled(*c);
        }
        out
    }

    /// Full error analysis of a pair given in subspace coordinates.
    pub fn analyze(&self, v_phi: &StateVector, v_psi: &StateVector) -> Result<ClonerResult> {
        ClonerResult::from_outputs(self.set.clone(), self.dims, &self.embed(v_phi), &self.embed(v_psi))
    }

    fn objective(&self, which: Objective, params: &[f64]) -> f64 {
        let Ok((a, b)) = parameterize_pair(params, self.set.z(), self.subspace_dim()) else {
            return f64::INFINITY;
        };
        let Ok(r) = self.analyze(&a, &b) else {
            return f64::INFINITY;
        };
        match which {
            Objective::Ae => r.ae,
            Objective::Re => r.re.unwrap_or(f64::INFINITY),
        }
    }
}

/// Result of [`minimize_objective`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SearchOutcome {
    pub objective: Objective,
    /// AE at the best point found.
    pub best_ae: f64,
    /// RE at the best point found.
    pub best_re: f64,
    pub bound_ae: f64,
    pub bound_re: f64,
    /// `max(best_ae − bound_ae, best_re − bound_re)`.
    pub attained_within: f64,
    pub best_params: Vec<f64>,
    /// Local runs performed (random starts plus the warm start).
    pub trials: usize,
    pub evaluations: u64,
    /// Evaluations where RE was undefined and scored as +∞.
    pub undefined_points: u64,
    /// Gap to the bound of the best run started at a random point.
    pub best_random_gap: f64,
}

impl SearchOutcome {
    pub fn floor_violated(&self) -> bool {
        self.best_ae < self.bound_ae - FLOOR_TOL || self.best_re < self.bound_re - FLOOR_TOL
    }
}

mod simplex {
    //! Nelder–Mead with the standard coefficients and a restart around the
    //! incumbent whenever a run converges, until a restart stops helping or
    //! the iteration budget is spent.

    pub struct Run {
        pub x: Vec<f64>,
        pub fx: f64,
        pub evaluations: u64,
    }

    const REFLECT: f64 = 1.0;
    const EXPAND: f64 = 2.0;
    const CONTRACT: f64 = 0.5;
    const SHRINK: f64 = 0.5;

    fn once<F: FnMut(&[f64]) -> f64>(
        f: &mut F,
        x0: &[f64],
        step: f64,
        budget: usize,
        ftol: f64,
        evals: &mut u64,
    ) -> (Vec<f64>, f64, usize) {
        let n = x0.len();
        let mut eval = |x: &[f64]| {
            *evals += 1;
            f(x)
        };
        let mut pts: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
        pts.push((x0.to_vec(), eval(x0)));
        for i in 0..n {
            let mut x = x0.to_vec();
            x[i] += step;
            let fx = eval(&x);
            pts.push((x, fx));
        }
        let mut iters = 0;
        while iters < budget {
            pts.sort_by(|a, b| a.1.total_cmp(&b.1));
            let (best, worst) = (pts[0].1, pts[n].1);
            if worst.is_finite() && worst - best <= ftol {
                break;
            }
            iters += 1;
            let centroid: Vec<f64> = (0..n)
                .map(|j| pts[..n].iter().map(|p| p.0[j]).sum::<f64>() / n as f64)
                .collect();
            let along = |t: f64| -> Vec<f64> {
                centroid
                    .iter()
                    .zip(&pts[n].0)
                    .map(|(c, w)| c + t * (c - w))
                    .collect()
            };
            let xr = along(REFLECT);
            let fr = eval(&xr);
            if fr < pts[0].1 {
                let xe = along(EXPAND);
                let fe = eval(&xe);
                pts[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            } else if fr < pts[n - 1].1 {
                pts[n] = (xr, fr);
            } else {
                let (xc, fc) = if fr < pts[n].1 {
                    let xc = along(CONTRACT * REFLECT);
                    let fc = eval(&xc);
                    (xc, fc)
                } else {
                    let xc = along(-CONTRACT);
                    let fc = eval(&xc);
                    (xc, fc)
                };
                if fc < pts[n].1.min(fr) {
                    pts[n] = (xc, fc);
                } else {
                    let x_best = pts[0].0.clone();
                    for p in pts.iter_mut().skip(1) {
                        for (xi, bi) in p.0.iter_mut().zip(&x_best) {
                            *xi = bi + SHRINK * (*xi - bi);
                        }
                        p.1 = eval(&p.0);
                    }
                }
            }
        }
        pts.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (x, fx) = pts.swap_remove(0);
        (x, fx, iters)
    }

    pub fn minimize<F: FnMut(&[f64]) -> f64>(
        mut f: F,
        x0: &[f64],
        step: f64,
        max_iters: usize,
        ftol: f64,
    ) -> Run {
        let mut evaluations = 0;
        let mut x = x0.to_vec();
        let mut fx = f(&x);
        evaluations += 1;
        let mut left = max_iters;
        let mut step = step;
        loop {
            let (xn, fxn, used) = once(&mut f, &x, step, left, ftol, &mut evaluations);
            let improvement = fx - fxn;
            if fxn < fx {
                x = xn;
                fx = fxn;
            }
            left -= used.min(left);
            if left == 0 || !(improvement > ftol) {
                break;
            }
            step = (step * 0.5).max(1e-4);
        }
        Run { x, fx, evaluations }
    }
}

fn random_start(rng: &mut impl Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

fn check_search_inputs(cfg: &SearchConfig, set: &TwoStateSet) -> Result<()> {
    cfg.validate()?;
    if (cfg.z - set.z()).abs() > 1e-12 {
        return Err(Error::InvalidConfig(format!(
            "config z = {} does not match the state set's overlap {}",
            cfg.z,
            set.z()
        )));
    }
    if !(set.z() > 0.0 && set.z() < 1.0) {
        return Err(Error::out_of_domain("z", set.z(), "(0, 1)"));
    }
    Ok(())
}

fn summarise(
    space: &SearchSpace,
    objective: Objective,
    runs: Vec<(simplex::Run, u64)>,
    bound_ae: f64,
    bound_re: f64,
) -> Result<SearchOutcome> {
    let bound = match objective {
        Objective::Ae => bound_ae,
        Objective::Re => bound_re,
    };
    let evaluations = runs.iter().map(|r| r.0.evaluations).sum();
    let undefined_points = runs.iter().map(|r| r.1).sum();
    let best_random_gap = runs[1..]
        .iter()
        .map(|r| r.0.fx - bound)
        .fold(f64::INFINITY, f64::min);
    let trials = runs.len();
    // first run wins ties, so the choice does not depend on scheduling
    let best = runs
        .into_iter()
        .map(|r| r.0)
        .reduce(|a, b| if b.fx < a.fx { b } else { a })
        .expect("at least one run");
    Ok(SearchOutcome {
        objective,
        best_ae: 0.0,
        best_re: 0.0,
        bound_ae,
        bound_re,
        attained_within: 0.0,
        best_params: best.x,
        trials,
        evaluations,
        undefined_points,
        best_random_gap,
    })
    .and_then(|mut o| {
        let r = pair_result(space, &o.best_params)?;
        o.best_ae = r.ae;
        o.best_re = r.re.unwrap_or(f64::INFINITY);
        o.attained_within = (o.best_ae - bound_ae).max(o.best_re - bound_re);
        Ok(o)
    })
}

fn pair_result(space: &SearchSpace, params: &[f64]) -> Result<ClonerResult> {
    let (a, b) = parameterize_pair(params, space.set.z(), space.subspace_dim())?;
    space.analyze(&a, &b)
}

/// Minimises AE or RE over realisable output pairs: one warm start at the
/// asymmetric machine plus `restarts` random starts, each a Nelder–Mead run
/// with its own seeded stream. Starts run in parallel; the result does not
/// depend on the thread count.
pub fn minimize_objective(objective: Objective, cfg: &SearchConfig, set: &TwoStateSet) -> Result<SearchOutcome> {
    check_search_inputs(cfg, set)?;
    let space = SearchSpace::new(set, cfg.subspace_dim)?;
    let len = cfg.param_len();
    let runs: Vec<(simplex::Run, u64)> = (0..=cfg.restarts)
        .into_par_iter()
        .map(|i| {
            let x0 = if i == 0 {
                asymmetric_params(cfg.subspace_dim)
            } else {
                random_start(&mut trial_rng(cfg.seed, i as u64), len)
            };
            let mut undefined = 0u64;
            let run = simplex::minimize(
                |p| {
                    let v = space.objective(objective, p);
                    if v.is_infinite() {
                        undefined += 1;
                    }
                    v
                },
                &x0,
                0.5,
                cfg.max_iters,
                cfg.objective_tol,
            );
            (run, undefined)
        })
        .collect();
    summarise(&space, objective, runs, ae_lower_bound(set.z())?, re_lower_bound(set.z())?)
}

/// Output pair with equal error sizes, in subspace coordinates.
///
/// Uses the reflection `R` that swaps `φ⊗φ` and `ψ⊗ψ` and fixes the extra
/// directions: `V^(φ) = √((1+z)/2) U + √((1−z)/2) e^{iχ} u₋`, `V^(ψ) = R V^(φ)`,
/// with `U` a unit vector in the `+1` eigenspace and `u₋` the `−1`
/// eigenvector. Parameters: `2(n − 2)` for raw `U = (1, …)`, then `χ`.
pub fn parameterize_symmetric_pair(
    params: &[f64],
    z: f64,
    subspace_dim: usize,
) -> Result<(StateVector, StateVector)> {
    let n = subspace_dim;
    if n < 2 || params.len() != 2 * n - 3 {
        return Err(Error::InvalidConfig(format!(
            "expected {} parameters for subspace_dim {n}",
            2 * n.max(2) - 3
        )));
    }
    let z2 = z * z;
    let s = (1.0 - z2 * z2).sqrt();
    // plane coordinates of φ⊗φ = (1, 0) and ψ⊗ψ = (z², s)
    let plus = {
        let norm = ((1.0 + z2) * (1.0 + z2) + s * s).sqrt();
        ((1.0 + z2) / norm, s / norm)
    };
    let minus = {
        let norm = ((1.0 - z2) * (1.0 - z2) + s * s).sqrt();
        ((1.0 - z2) / norm, -s / norm)
    };
    let raw_u = raw_vector(&params[..2 * n - 4]);
    let chi = params[2 * n - 4];
    // U in the +1 eigenspace: first raw coordinate along u₊, the rest along the
    // extra directions
    let mut u = vec![Complex64::new(0.0, 0.0); n];
    u[0] = raw_u[0] * plus.0;
    u[1] = raw_u[0] * plus.1;
    for (k, c) in raw_u.iter().enumerate().skip(1) {
        u[k + 1] = *c;
    }
    let u = StateVector::new(u)?.normalized()?;
    let mut m = vec![Complex64::new(0.0, 0.0); n];
    m[0] = Complex64::new(minus.0, 0.0);
    m[1] = Complex64::new(minus.1, 0.0);
    let m = StateVector::new(m)?.scaled(Complex64::from_polar(1.0, chi));
    let a = ((1.0 + z) / 2.0).sqrt();
    let b = ((1.0 - z) / 2.0).sqrt();
    let v_phi = &(&u * a) + &(&m * b);
    let v_psi = &(&u * a) - &(&m * b);
    Ok((v_phi, v_psi))
}

/// Minimises RE over pairs with `δ^(φ) = δ^(ψ)` enforced by the mirrored
/// parameterisation. The returned outcome's `bound_*` fields still carry
/// the unrestricted bounds.
pub fn minimize_symmetric(cfg: &SearchConfig, set: &TwoStateSet) -> Result<SearchOutcome> {
    check_search_inputs(cfg, set)?;
    let space = SearchSpace::new(set, cfg.subspace_dim)?;
    let n = cfg.subspace_dim;
    let len = 2 * n - 3;
    let z = set.z();
    let eval = |p: &[f64]| -> f64 {
        parameterize_symmetric_pair(p, z, n)
            .and_then(|(a, b)| space.analyze(&a, &b))
            .ok()
            .and_then(|r| r.re)
            .unwrap_or(f64::INFINITY)
    };
    let runs: Vec<simplex::Run> = (1..=cfg.restarts)
        .into_par_iter()
        .map(|i| {
            let x0 = random_start(&mut trial_rng(cfg.seed, i as u64), len);
            simplex::minimize(eval, &x0, 0.5, cfg.max_iters, cfg.objective_tol)
        })
        .collect();
    let evaluations = runs.iter().map(|r| r.evaluations).sum();
    let trials = runs.len();
    let best = runs
        .into_iter()
        .reduce(|a, b| if b.fx < a.fx { b } else { a })
        .expect("at least one run");
    let (a, b) = parameterize_symmetric_pair(&best.x, z, n)?;
    let r = space.analyze(&a, &b)?;
    let bound_ae = ae_lower_bound(z)?;
    let bound_re = re_lower_bound(z)?;
    let best_re = r.re.unwrap_or(f64::INFINITY);
    Ok(SearchOutcome {
        objective: Objective::Re,
        best_ae: r.ae,
        best_re,
        bound_ae,
        bound_re,
        attained_within: (r.ae - bound_ae).max(best_re - bound_re),
        best_params: best.x,
        trials,
        evaluations,
        undefined_points: 0,
        best_random_gap: best_re - bound_re,
    })
}

/// Statistics of [`random_cloner_sweep`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepStats {
    pub samples: u64,
    pub min_ae: f64,
    pub mean_ae: f64,
    pub max_ae: f64,
    pub min_re: f64,
    pub mean_re: f64,
    pub max_re: f64,
    pub ae_violations: u64,
    pub re_violations: u64,
    /// Samples where either angle restriction of [`inequality_chain`] failed.
    pub chain_violations: u64,
    /// Smallest slack seen in either angle restriction.
    pub chain_min_slack: f64,
    /// Samples whose ideal output was degenerate (skipped for RE and chain).
    pub undefined: u64,
    /// Samples whose outputs were not realisable (should be 0).
    pub unrealizable: u64,
}

impl SweepStats {
    pub fn violations(&self) -> u64 {
        self.ae_violations + self.re_violations + self.chain_violations + self.unrealizable
    }
}

/// Samples `n` random realisable pairs in the search subspace (Gaussian
/// then normalised for `V^(φ)`, Gaussian then projected for `W`) and checks
/// both bounds and both angle restrictions on each.
pub fn random_cloner_sweep(cfg: &SearchConfig, set: &TwoStateSet, n: u64) -> Result<SweepStats> {
    check_search_inputs(cfg, set)?;
    if n < 1 {
        return Err(Error::InvalidConfig("need at least one sample".into()));
    }
    let space = SearchSpace::new(set, cfg.subspace_dim)?;
    let z = set.z();
    let bound_ae = ae_lower_bound(z)?;
    let bound_re = re_lower_bound(z)?;
    let dim = cfg.subspace_dim;

    struct Sample {
        ae: f64,
        re: Option<f64>,
        chain: Option<(bool, f64)>,
        realizable: bool,
    }

    let samples: Vec<Sample> = (0..n)
        .into_par_iter()
        .map(|i| -> Result<Sample> {
            let mut rng = trial_rng(cfg.seed, i);
            let v = random_state(&mut rng, dim);
            let w = loop {
                let g = gaussian_vector(&mut rng, dim);
                let proj = &g - &v.scaled(v.as_dvector().dotc(g.as_dvector()));
                if let Ok(w) = proj.normalized() {
                    break w;
                }
            };
            let v_psi = &(&v * z) + &(&w * (1.0 - z * z).sqrt());
            let r = space.analyze(&v, &v_psi)?;
            let chain = inequality_chain(&r)
                .ok()
                .map(|(a, b)| (a.holds && b.holds, a.slack.min(b.slack)));
            Ok(Sample {
                ae: r.ae,
                re: r.re,
                chain,
                realizable: r.unitarity_residual() < UNITARY_TOL,
            })
        })
        .collect::<Result<_>>()?;

    let mut stats = SweepStats {
        samples: n,
        min_ae: f64::INFINITY,
        mean_ae: 0.0,
        max_ae: f64::NEG_INFINITY,
        min_re: f64::INFINITY,
        mean_re: 0.0,
        max_re: f64::NEG_INFINITY,
        ae_violations: 0,
        re_violations: 0,
        chain_violations: 0,
        chain_min_slack: f64::INFINITY,
        undefined: 0,
        unrealizable: 0,
    };
    let mut re_count = 0u64;
    for s in &samples {
        stats.min_ae = stats.min_ae.min(s.ae);
        stats.max_ae = stats.max_ae.max(s.ae);
        stats.mean_ae += s.ae;
        stats.ae_violations += u64::from(s.ae < bound_ae - FLOOR_TOL);
        stats.unrealizable += u64::from(!s.realizable);
        match (s.re, s.chain) {
            (Some(re), Some((ok, slack))) => {
                re_count += 1;
                stats.min_re = stats.min_re.min(re);
                stats.max_re = stats.max_re.max(re);
                stats.mean_re += re;
                stats.re_violations += u64::from(re < bound_re - FLOOR_TOL);
                stats.chain_violations += u64::from(!ok);
                stats.chain_min_slack = stats.chain_min_slack.min(slack);
            }
            _ => stats.undefined += 1,
        }
    }
    stats.mean_ae /= n as f64;
    if re_count > 0 {
        stats.mean_re /= re_count as f64;
    }
    Ok(stats)
}
