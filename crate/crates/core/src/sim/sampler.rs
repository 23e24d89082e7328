use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{calibrate_on_distances, AdjacencyMatrix};
use crate::draws::DrawSet;
use crate::error::{Error, Result};
use crate::link::LinkFunction;
use crate::quotient::{CenteredFactor, Configuration};
use crate::rng::stream_rng;

/// Priors, proposal scales and schedule for [`mh_sample`].
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplerConfig {
    /// `x_i ~ N(0, σ² I)`.
    pub prior_sd_positions: f64,
    pub alpha_prior_mean: f64,
    pub alpha_prior_sd: f64,
    /// Per-coordinate random-walk scale; 0.4 keeps acceptance near 0.65 on
    /// the default templates.
    pub proposal_sd_position: f64,
    pub proposal_sd_alpha: f64,
    pub burn_in: usize,
    pub thin: usize,
    pub draws: usize,
    pub seed: u64,
    /// Holds `α` at this value instead of sampling it.
    pub fixed_alpha: Option<f64>,
    pub link: LinkFunction,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            prior_sd_positions: 10.0,
            alpha_prior_mean: 0.0,
            alpha_prior_sd: 2.0,
            proposal_sd_position: 0.4,
            proposal_sd_alpha: 0.1,
            burn_in: 10_000,
            thin: 20,
            draws: 500,
            seed: 0,
            fixed_alpha: None,
            link: LinkFunction::Logistic,
        }
    }
}

impl SamplerConfig {
    /// Intercept prior `N(2, 2²)` for the 16-family marriage network.
    pub fn florentine() -> Self {
        Self {
            alpha_prior_mean: 2.0,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        let scales = [
            self.prior_sd_positions,
            self.alpha_prior_sd,
            self.proposal_sd_position,
            self.proposal_sd_alpha,
        ];
        if scales.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
            return Err(Error::invalid("prior and proposal scales must be positive"));
        }
        if self.thin == 0 || self.draws == 0 {
            return Err(Error::invalid("thin and draws must be at least 1"));
        }
        if !self.alpha_prior_mean.is_finite() || self.fixed_alpha.is_some_and(|a| !a.is_finite()) {
            return Err(Error::invalid("intercept settings must be finite"));
        }
        Ok(())
    }
}

/// Retained chain states and acceptance diagnostics.
#[derive(Debug, Clone)]
pub struct SamplerOutput {
    /// Centered factors with their intercepts.
    pub draws: DrawSet,
    pub acceptance_position: f64,
    /// `None` when `α` was held fixed.
    pub acceptance_alpha: Option<f64>,
    /// Log posterior of each retained state.
    pub log_posterior: Vec<f64>,
    pub initial_alpha: f64,
}

fn log_likelihood_pairs(
    positions: &DMatrix<f64>,
    alpha: f64,
    a: &AdjacencyMatrix,
    link: &LinkFunction,
) -> f64 {
    let n = positions.nrows();
    let mut total = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let d = (positions.row(i) - positions.row(j)).norm();
            total += link.log_likelihood(a.get(i, j), alpha - d);
        }
    }
    total
}

fn log_prior(positions: &DMatrix<f64>, alpha: f64, config: &SamplerConfig) -> f64 {
    let s2 = config.prior_sd_positions.powi(2);
    let t2 = config.alpha_prior_sd.powi(2);
    -positions.norm_squared() / (2.0 * s2) - (alpha - config.alpha_prior_mean).powi(2) / (2.0 * t2)
}

/// Log likelihood plus Gaussian log priors on every coordinate and on `α`,
/// dropping the normalizing constants.
pub fn log_posterior(
    x: &Configuration,
    alpha: f64,
    a: &AdjacencyMatrix,
    config: &SamplerConfig,
) -> Result<f64> {
    if x.n() != a.n() {
        return Err(Error::shape(
            format!("{} nodes", a.n()),
            format!("{} nodes", x.n()),
        ));
    }
    Ok(log_likelihood_pairs(x.positions(), alpha, a, &config.link) + log_prior(x.positions(), alpha, config))
}

/// Classical scaling of hop distances; unreachable pairs sit one hop beyond
/// the largest finite distance. Missing dimensions are left at zero.
fn initial_positions(a: &AdjacencyMatrix, r: usize) -> DMatrix<f64> {
    let n = a.n();
    let sp = a.shortest_paths();
    let far = sp.iter().flatten().flatten().copied().max().unwrap_or(0) + 1;
    let sq = DMatrix::from_fn(n, n, |i, j| {
        let d = sp[i][j].unwrap_or(far) as f64;
        d * d
    });
    let row_means: Vec<f64> = sq.row_iter().map(|r| r.mean()).collect();
    let grand = sq.mean();
    let b = DMatrix::from_fn(n, n, |i, j| {
        -0.5 * (sq[(i, j)] - row_means[i] - row_means[j] + grand)
    });
    let eig = SymmetricEigen::new(b);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&p, &q| eig.eigenvalues[q].total_cmp(&eig.eigenvalues[p]));
    DMatrix::from_fn(n, r, |i, k| {
        if k >= n {
            return 0.0;
        }
        let c = order[k];
        eig.eigenvectors[(i, c)] * eig.eigenvalues[c].max(0.0).sqrt()
    })
}

/// Component-wise random-walk Metropolis for the latent space model.
///
/// Each sweep proposes a Gaussian move for every node in turn, then one move
/// for `α`. After `burn_in` sweeps every `thin`-th state is kept until
/// `draws` states are stored. Deterministic given `config.seed`.
pub fn mh_sample(a: &AdjacencyMatrix, r: usize, config: &SamplerConfig) -> Result<SamplerOutput> {
    config.validate()?;
    let n = a.n();
    if n < 2 || r == 0 {
        return Err(Error::invalid(format!(
            "sampler needs n >= 2 and r >= 1 (got n = {n}, r = {r})"
        )));
    }
    let link = &config.link;
    let mut rng = stream_rng(config.seed, 0);
    let mut x = initial_positions(a, r);

    let mut dist = DMatrix::from_fn(n, n, |i, j| (x.row(i) - x.row(j)).norm());
    let mut alpha = match config.fixed_alpha {
        Some(v) => v,
        None => {
            let density = a.density();
            let pairs: Vec<f64> = (0..n)
                .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
                .map(|(i, j)| dist[(i, j)])
                .collect();
            if density > 0.0 && density < 1.0 {
                calibrate_on_distances(&pairs, density, link).unwrap_or(config.alpha_prior_mean)
            } else {
                config.alpha_prior_mean
            }
        }
    };
    let initial_alpha = alpha;

    let s2 = config.prior_sd_positions.powi(2);
    let t2 = config.alpha_prior_sd.powi(2);
    let mut proposal = vec![0.0; r];
    let mut new_dist = vec![0.0; n];
    let (mut pos_accepted, mut pos_tried) = (0u64, 0u64);
    let (mut alpha_accepted, mut alpha_tried) = (0u64, 0u64);

    let total = config.burn_in + config.thin * config.draws;
    let mut factors = Vec::with_capacity(config.draws);
    let mut intercepts = Vec::with_capacity(config.draws);
    let mut trace = Vec::with_capacity(config.draws);

    for sweep in 1..=total {
        for i in 0..n {
            for (k, p) in proposal.iter_mut().enumerate() {
                let z: f64 = rng.sample(StandardNormal);
                *p = x[(i, k)] + config.proposal_sd_position * z;
            }
            let mut delta = 0.0;
            for j in 0..n {
                if j == i {
                    continue;
                }
                let d = proposal
                    .iter()
                    .enumerate()
                    .map(|(k, p)| (p - x[(j, k)]).powi(2))
                    .sum::<f64>()
                    .sqrt();
                new_dist[j] = d;
                let edge = a.get(i, j);
                delta +=
                    link.log_likelihood(edge, alpha - d) - link.log_likelihood(edge, alpha - dist[(i, j)]);
            }
            let old_sq: f64 = (0..r).map(|k| x[(i, k)].powi(2)).sum();
            let new_sq: f64 = proposal.iter().map(|p| p * p).sum();
            delta -= (new_sq - old_sq) / (2.0 * s2);

            pos_tried += 1;
            let u: f64 = rng.random();
            if u.ln() < delta {
                pos_accepted += 1;
                for (k, p) in proposal.iter().enumerate() {
                    x[(i, k)] = *p;
                }
                for j in 0..n {
                    if j != i {
                        dist[(i, j)] = new_dist[j];
                        dist[(j, i)] = new_dist[j];
                    }
                }
            }
        }

        if config.fixed_alpha.is_none() {
            let z: f64 = rng.sample(StandardNormal);
            let candidate = alpha + config.proposal_sd_alpha * z;
            let mut delta = 0.0;
            for i in 0..n {
                for j in (i + 1)..n {
                    let edge = a.get(i, j);
                    delta += link.log_likelihood(edge, candidate - dist[(i, j)])
                        - link.log_likelihood(edge, alpha - dist[(i, j)]);
                }
            }
            delta -= ((candidate - config.alpha_prior_mean).powi(2)
                - (alpha - config.alpha_prior_mean).powi(2))
                / (2.0 * t2);
            alpha_tried += 1;
            let u: f64 = rng.random();
            if u.ln() < delta {
                alpha_accepted += 1;
                alpha = candidate;
            }
        }

        if sweep > config.burn_in && (sweep - config.burn_in).is_multiple_of(config.thin) {
            trace.push(log_likelihood_pairs(&x, alpha, a, link) + log_prior(&x, alpha, config));
            factors.push(CenteredFactor::recentered(x.clone()));
            intercepts.push(alpha);
        }
    }

    let rate = |acc: u64, tried: u64| {
        if tried == 0 {
            0.0
        } else {
            acc as f64 / tried as f64
        }
    };
    Ok(SamplerOutput {
        draws: DrawSet::new(factors, Some(intercepts))?,
        acceptance_position: rate(pos_accepted, pos_tried),
        acceptance_alpha: config
            .fixed_alpha
            .is_none()
            .then(|| rate(alpha_accepted, alpha_tried)),
        log_posterior: trace,
        initial_alpha,
    })
}
