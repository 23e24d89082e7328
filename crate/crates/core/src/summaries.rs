//! Intrinsic posterior summaries built from the distances `D_ij^(m)` of each
//! draw: dyad tables, node uncertainty `U_i`, node-wise loss `L_i`, posterior
//! predictive replicates, and the reference-sensitivity diagnostic `S_ref`
//! for fixed-reference Procrustes means.

use nalgebra::DMatrix;
use rand::seq::index;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::draws::DrawSet;
use crate::error::{Error, Result};
use crate::frechet::procrustes_mean;
use crate::link::LinkFunction;
use crate::quotient::GramMatrix;
use crate::rng::{derive_seed, stream_rng};
use crate::sim::AdjacencyMatrix;
use crate::stats::{mean, quantile_sorted, sample_variance};
use crate::tangent::{delta_variance_matrix, TangentSample};

/// Posterior summary of one dyad.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DyadSummary {
    pub i: usize,
    pub j: usize,
    pub mean_distance: f64,
    pub median_distance: f64,
    pub var_distance: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub mean_probability: Option<f64>,
    pub ci_prob_lo: Option<f64>,
    pub ci_prob_hi: Option<f64>,
    /// Posterior mean of `α − D_ij`.
    pub mean_link_effect: Option<f64>,
}

/// All pairs `i < j` in row-major order.
pub fn all_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).collect()
}

fn check_level(level: f64) -> Result<()> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::invalid(format!("interval level {level} outside (0, 1)")));
    }
    Ok(())
}

/// Equal-tailed interval and median from unsorted samples.
fn interval(mut values: Vec<f64>, level: f64) -> (f64, f64, f64) {
    values.sort_by(f64::total_cmp);
    let tail = 0.5 * (1.0 - level);
    (
        quantile_sorted(&values, tail),
        quantile_sorted(&values, 0.5),
        quantile_sorted(&values, 1.0 - tail),
    )
}

/// Distance and, with a link, edge-probability summaries for each pair at
/// interval `level`. Variances use denominator `M − 1` (zero when `M = 1`).
pub fn dyad_summaries(
    draws: &DrawSet,
    pairs: &[(usize, usize)],
    level: f64,
    link: Option<&LinkFunction>,
) -> Result<Vec<DyadSummary>> {
    check_level(level)?;
    for &(i, j) in pairs {
        draws.check_node(i)?;
        draws.check_node(j)?;
        if i == j {
            return Err(Error::invalid(format!("dyad ({i}, {j}) repeats a node")));
        }
    }
    let alpha = match link {
        Some(_) => Some(draws.require_intercepts()?),
        None => None,
    };
    Ok(pairs
        .par_iter()
        .map(|&(i, j)| {
            let d = draws.distance_samples(i, j);
            let (ci_lo, median_distance, ci_hi) = interval(d.clone(), level);
            let mut s = DyadSummary {
                i,
                j,
                mean_distance: mean(&d),
                median_distance,
                var_distance: sample_variance(&d),
                ci_lo,
                ci_hi,
                mean_probability: None,
                ci_prob_lo: None,
                ci_prob_hi: None,
                mean_link_effect: None,
            };
            if let (Some(g), Some(alpha)) = (link, alpha) {
                let eta: Vec<f64> = alpha.iter().zip(&d).map(|(a, d)| a - d).collect();
                let p: Vec<f64> = eta.iter().map(|&e| g.prob(e)).collect();
                let (lo, _, hi) = interval(p.clone(), level);
                s.mean_probability = Some(mean(&p));
                s.ci_prob_lo = Some(lo);
                s.ci_prob_hi = Some(hi);
                s.mean_link_effect = Some(mean(&eta));
            }
            s
        })
        .collect())
}

/// Symmetric matrix with zero diagonal from `f(i, j)` on `i < j`.
fn pairwise_map<F>(n: usize, f: F) -> DMatrix<f64>
where
    F: Fn(usize, usize) -> f64 + Sync,
{
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| ((i + 1)..n).map(|j| f(i, j)).collect())
        .collect();
    let mut out = DMatrix::zeros(n, n);
    for (i, row) in rows.into_iter().enumerate() {
        for (off, v) in row.into_iter().enumerate() {
            out[(i, i + 1 + off)] = v;
            out[(i + 1 + off, i)] = v;
        }
    }
    out
}

/// `Var{D_ij}` over draws (denominator `M − 1`).
pub fn dyad_variance_matrix(draws: &DrawSet) -> Result<DMatrix<f64>> {
    if draws.len() < 2 {
        return Err(Error::invalid("dyad variances need at least 2 draws"));
    }
    Ok(pairwise_map(draws.n(), |i, j| {
        sample_variance(&draws.distance_samples(i, j))
    }))
}

/// `D̄_ij = (1/M) Σ_m D_ij^(m)`.
pub fn mean_distance_matrix(draws: &DrawSet) -> DMatrix<f64> {
    pairwise_map(draws.n(), |i, j| mean(&draws.distance_samples(i, j)))
}

/// How `Var{D_ij}` is estimated for [`node_uncertainty`].
#[derive(Debug, Clone, Copy)]
pub enum UncertaintyMethod<'a> {
    MonteCarlo,
    /// Delta method on residuals at the Fréchet mean.
    Delta(&'a TangentSample),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UncertaintyKind {
    MonteCarlo,
    Delta,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeUncertainty {
    pub values: Vec<f64>,
    pub method: UncertaintyKind,
}

fn off_diagonal_row_means(m: &DMatrix<f64>) -> Vec<f64> {
    let n = m.nrows();
    (0..n)
        .map(|i| (0..n).filter(|&j| j != i).map(|j| m[(i, j)]).sum::<f64>() / (n - 1) as f64)
        .collect()
}

/// `U_i = (1/(n−1)) Σ_{j≠i} Var{D_ij}`.
///
/// With the delta method, dyads whose distance at the base is degenerate
/// contribute their squared-scale variance.
pub fn node_uncertainty(draws: &DrawSet, method: UncertaintyMethod<'_>) -> Result<NodeUncertainty> {
    let (matrix, kind) = match method {
        UncertaintyMethod::MonteCarlo => (dyad_variance_matrix(draws)?, UncertaintyKind::MonteCarlo),
        UncertaintyMethod::Delta(sample) => {
            if sample.base().n() != draws.n() {
                return Err(Error::shape(
                    format!("{} nodes", draws.n()),
                    format!("{} nodes", sample.base().n()),
                ));
            }
            (delta_variance_matrix(sample)?.0, UncertaintyKind::Delta)
        }
    };
    Ok(NodeUncertainty {
        values: off_diagonal_row_means(&matrix),
        method: kind,
    })
}

/// `L_i = (1/(n−1)) Σ_{j≠i} (D̄_ij − D_ij(B*))²`.
pub fn nodewise_loss(draws: &DrawSet, truth: &GramMatrix) -> Result<Vec<f64>> {
    if truth.n() != draws.n() {
        return Err(Error::shape(
            format!("{} nodes", draws.n()),
            format!("{} nodes", truth.n()),
        ));
    }
    let mean_d = mean_distance_matrix(draws);
    let sq = pairwise_map(draws.n(), |i, j| (mean_d[(i, j)] - truth.distance(i, j)).powi(2));
    Ok(off_diagonal_row_means(&sq))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityResult {
    pub s_ref: f64,
    pub k: usize,
    pub reference_indices: Vec<usize>,
    /// `‖B̂^(a) − B̂^(b)‖_F` for `a < b` in row-major order.
    pub pairwise_gaps: Vec<f64>,
}

/// Mean pairwise Frobenius gap between randomized-orientation Procrustes-mean
/// Grams computed from `k` references drawn without replacement.
pub fn reference_sensitivity(draws: &DrawSet, k: usize, seed: u64) -> Result<SensitivityResult> {
    if k < 2 || k > draws.len() {
        return Err(Error::invalid(format!(
            "reference count {k} outside [2, {}]",
            draws.len()
        )));
    }
    let mut rng = stream_rng(seed, 0);
    let reference_indices = index::sample(&mut rng, draws.len(), k).into_vec();
    let grams: Vec<DMatrix<f64>> = reference_indices
        .par_iter()
        .enumerate()
        .map(|(slot, &m)| {
            Ok(
                procrustes_mean(draws, m, true, derive_seed(seed, slot as u64 + 1))?
                    .mean_gram
                    .into_inner(),
            )
        })
        .collect::<Result<_>>()?;
    let pairwise_gaps: Vec<f64> = all_pairs(k)
        .into_iter()
        .map(|(a, b)| (&grams[a] - &grams[b]).norm())
        .collect();
    Ok(SensitivityResult {
        s_ref: mean(&pairwise_gaps),
        k,
        reference_indices,
        pairwise_gaps,
    })
}

/// Replicate networks; replicate `t` uses draw `t mod M` and its own derived
/// seed, so output is independent of scheduling.
pub fn posterior_predictive(
    draws: &DrawSet,
    link: &LinkFunction,
    count: usize,
    seed: u64,
) -> Result<Vec<AdjacencyMatrix>> {
    if count == 0 {
        return Err(Error::invalid("replicate count must be at least 1"));
    }
    let alpha = draws.require_intercepts()?;
    Ok((0..count)
        .into_par_iter()
        .map(|t| {
            let m = t % draws.len();
            let y = draws.factor(m);
            AdjacencyMatrix::sample(draws.n(), derive_seed(seed, t as u64), |i, j| {
                link.prob(alpha[m] - y.row_distance(i, j))
            })
        })
        .collect())
}
