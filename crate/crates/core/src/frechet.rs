//! Sample Fréchet mean on the quotient, global dispersion summaries, and the
//! fixed-reference Procrustes means used as alignment-based baselines.
//!
//! The mean minimizes `F(Y) = (1/M) Σ_m d²(Y, Y^(m))` over centered factors.
//! Each iteration aligns every draw to the current iterate, averages the
//! aligned factors, projects the difference onto the horizontal space and
//! takes a retraction step. Steps are halved until the objective shows
//! sufficient decrease, so the recorded objective trace never increases.

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::draws::DrawSet;
use crate::error::{Error, Result};
use crate::quotient::{
    horizontal_project, procrustes_align, quotient_distance, retract, CenteredFactor, GramMatrix,
};
use crate::stats;

/// Starting point for the Fréchet iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Initialization {
    /// Top-`r` eigenpairs of the average Gram matrix; falls back to the
    /// medoid draw when the `r`-th eigenvalue is negligible.
    MeanGramEigen,
    /// Start from draw `k`.
    Draw(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FrechetConfig {
    pub step_size: f64,
    /// Stop once `‖η Z_hor‖_F < tolerance · max(1, ‖Y‖_F)`.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub init: Initialization,
    /// Backtracking halvings allowed per iteration.
    pub max_halvings: usize,
}

impl Default for FrechetConfig {
    fn default() -> Self {
        Self {
            step_size: 1.0,
            tolerance: 1e-8,
            max_iterations: 200,
            init: Initialization::MeanGramEigen,
            max_halvings: 30,
        }
    }
}

impl FrechetConfig {
    fn validate(&self) -> Result<()> {
        if self.step_size.is_nan()
            || self.step_size <= 0.0
            || self.tolerance.is_nan()
            || self.tolerance <= 0.0
            || self.max_iterations == 0
        {
            return Err(Error::invalid(
                "step size, tolerance and max_iterations must be positive",
            ));
        }
        Ok(())
    }
}

/// Why the iteration stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    StepBelowTolerance,
    /// Backtracking could not decrease the objective: numerically stationary.
    LineSearchStalled,
    MaxIterations,
}

#[derive(Debug, Clone)]
pub struct FrechetResult {
    pub mean_factor: CenteredFactor,
    pub mean_gram: GramMatrix,
    /// `(1/M) Σ d²(B̂_F, B^(m))`, the attained objective.
    pub variation: f64,
    pub iterations: usize,
    pub converged: bool,
    pub stop_reason: StopReason,
    pub per_draw_distances: Vec<f64>,
    /// Objective at the initial point followed by each accepted step.
    pub objective_trace: Vec<f64>,
    /// Set when the eigen initializer fell back to the medoid.
    pub used_medoid_fallback: bool,
}

struct Sweep {
    aligned_mean: DMatrix<f64>,
    distances: Vec<f64>,
    objective: f64,
}

/// Aligns every draw to `y`; reductions run in draw order.
fn sweep(y: &CenteredFactor, draws: &DrawSet) -> Result<Sweep> {
    let aligned: Vec<(DMatrix<f64>, f64)> = draws
        .factors()
        .par_iter()
        .map(|ym| {
            let a = procrustes_align(y, ym)?;
            Ok((ym.as_matrix() * &a.rotation, a.residual))
        })
        .collect::<Result<_>>()?;
    let m = draws.len() as f64;
    let mut sum = DMatrix::zeros(draws.n(), draws.rank_bound());
    let mut distances = Vec::with_capacity(aligned.len());
    for (a, d) in aligned {
        sum += a;
        distances.push(d);
    }
    let objective = distances.iter().map(|d| d * d).sum::<f64>() / m;
    Ok(Sweep {
        aligned_mean: sum / m,
        distances,
        objective,
    })
}

/// `F(Y) = (1/M) Σ_m d²(Y Yᵀ, B^(m))`.
pub fn frechet_objective(y: &CenteredFactor, draws: &DrawSet) -> Result<f64> {
    Ok(sweep(y, draws)?.objective)
}

fn initial_factor(draws: &DrawSet, init: Initialization) -> Result<(CenteredFactor, bool)> {
    match init {
        Initialization::Draw(k) => {
            if k >= draws.len() {
                return Err(Error::invalid(format!(
                    "initial draw {k} out of range for M = {}",
                    draws.len()
                )));
            }
            Ok((draws.factor(k).clone(), false))
        }
        Initialization::MeanGramEigen => {
            let r = draws.rank_bound();
            let mean = draws.mean_gram();
            let trace = mean.trace();
            let eig = SymmetricEigen::new(mean);
            let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
            order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
            let top = &order[..r];
            if eig.eigenvalues[top[r - 1]] <= 1e-10 * trace {
                let k = quotient_medoid(draws)?;
                return Ok((draws.factor(k).clone(), true));
            }
            let y = DMatrix::from_fn(draws.n(), r, |i, k| {
                eig.eigenvectors[(i, top[k])] * eig.eigenvalues[top[k]].sqrt()
            });
            Ok((CenteredFactor::recentered(y), false))
        }
    }
}

/// Computes the sample Fréchet mean of the draws' Gram matrices.
///
/// Only a local minimizer is promised; the attained objective is reported so
/// that runs from different starts can be compared (see
/// [`frechet_mean_multistart`]). Hitting `max_iterations` is not an error.
pub fn frechet_mean(draws: &DrawSet, config: &FrechetConfig) -> Result<FrechetResult> {
    config.validate()?;
    let (mut y, used_medoid_fallback) = initial_factor(draws, config.init)?;
    let mut current = sweep(&y, draws)?;
    let mut trace = vec![current.objective];
    let mut stop_reason = StopReason::MaxIterations;
    let mut iterations = 0;

    while iterations < config.max_iterations {
        iterations += 1;
        let z = &current.aligned_mean - y.as_matrix();
        let z_hor = horizontal_project(&y, &z)?.into_inner();
        let z_sq = z_hor.norm_squared();
        let threshold = config.tolerance * y.norm().max(1.0);

        let mut eta = config.step_size;
        let mut accepted = None;
        for _ in 0..=config.max_halvings {
            let candidate = retract(&y, &(&z_hor * eta));
            let next = sweep(&candidate, draws)?;
            if next.objective <= current.objective - 1e-4 * eta * z_sq {
                accepted = Some((candidate, next));
                break;
            }
            eta *= 0.5;
        }
        let Some((candidate, next)) = accepted else {
            stop_reason = StopReason::LineSearchStalled;
            break;
        };
        y = candidate;
        current = next;
        trace.push(current.objective);
        if eta * z_sq.sqrt() < threshold {
            stop_reason = StopReason::StepBelowTolerance;
            break;
        }
    }

    let variation = stats::mean(&current.distances.iter().map(|d| d * d).collect::<Vec<_>>());
    Ok(FrechetResult {
        mean_gram: y.gram(),
        mean_factor: y,
        variation,
        iterations,
        converged: stop_reason != StopReason::MaxIterations,
        stop_reason,
        per_draw_distances: current.distances,
        objective_trace: trace,
        used_medoid_fallback,
    })
}

/// Runs [`frechet_mean`] from each start and keeps the lowest objective
/// (earliest start on ties).
pub fn frechet_mean_multistart(
    draws: &DrawSet,
    config: &FrechetConfig,
    starts: &[Initialization],
) -> Result<FrechetResult> {
    let mut best: Option<FrechetResult> = None;
    for &init in starts {
        let run = frechet_mean(draws, &FrechetConfig { init, ..*config })?;
        if best.as_ref().is_none_or(|b| run.variation < b.variation) {
            best = Some(run);
        }
    }
    best.ok_or_else(|| Error::invalid("no starting points given"))
}

/// `(1/M) Σ_m d²(B̂_F, B^(m))`.
pub fn frechet_variation(result: &FrechetResult) -> f64 {
    result.variation
}

/// Radius of the intrinsic credible ball: the interpolated empirical quantile
/// of the per-draw distances to the mean at `level ∈ (0, 1]`.
pub fn credible_radius(result: &FrechetResult, level: f64) -> Result<f64> {
    if !(level > 0.0 && level <= 1.0) {
        return Err(Error::invalid(format!("credible level {level} outside (0, 1]")));
    }
    stats::quantile(&result.per_draw_distances, level)
}

/// Index of the draw minimizing the summed squared quotient distance to all
/// draws. Ties (within rounding) go to the smallest index.
pub fn quotient_medoid(draws: &DrawSet) -> Result<usize> {
    let m = draws.len();
    let pairs: Vec<(usize, usize)> = (0..m).flat_map(|a| ((a + 1)..m).map(move |b| (a, b))).collect();
    let sq: Vec<f64> = pairs
        .par_iter()
        .map(|&(a, b)| Ok(quotient_distance(draws.factor(a), draws.factor(b))?.powi(2)))
        .collect::<Result<_>>()?;
    let mut totals = vec![0.0; m];
    for (&(a, b), d) in pairs.iter().zip(&sq) {
        totals[a] += d;
        totals[b] += d;
    }
    let min = totals.iter().copied().fold(f64::INFINITY, f64::min);
    let slack = 1e-12 * min.max(1e-300) + 1e-24;
    Ok(totals.iter().position(|&t| t <= min + slack).unwrap_or(0))
}

/// Fixed-reference Procrustes mean.
#[derive(Debug, Clone)]
pub struct ProcrustesMean {
    pub mean_factor: DMatrix<f64>,
    pub mean_gram: GramMatrix,
}

/// Aligns every draw to draw `reference` and averages the aligned coordinates.
/// With `randomize_orientation`, each factor (the reference included) is first
/// right-multiplied by an independent random orthogonal matrix drawn from `seed`.
pub fn procrustes_mean(
    draws: &DrawSet,
    reference: usize,
    randomize_orientation: bool,
    seed: u64,
) -> Result<ProcrustesMean> {
    if reference >= draws.len() {
        return Err(Error::invalid(format!(
            "reference {reference} out of range for M = {}",
            draws.len()
        )));
    }
    let oriented;
    let draws = if randomize_orientation {
        oriented = draws.randomly_oriented(seed);
        &oriented
    } else {
        draws
    };
    let target = draws.factor(reference);
    let aligned: Vec<DMatrix<f64>> = draws
        .factors()
        .par_iter()
        .map(|ym| Ok(ym.as_matrix() * procrustes_align(target, ym)?.rotation))
        .collect::<Result<_>>()?;
    let mut sum = DMatrix::zeros(draws.n(), draws.rank_bound());
    for a in aligned {
        sum += a;
    }
    let mean = CenteredFactor::recentered(sum / draws.len() as f64);
    Ok(ProcrustesMean {
        mean_gram: mean.gram(),
        mean_factor: mean.into_inner(),
    })
}
