//! Three-group simulation design, intercept calibration, graph generation,
//! and a random-walk Metropolis sampler for the latent space model
//! `P(A_ij = 1) = g(α − ‖x_i − x_j‖)`.

mod graph;
mod sampler;

pub use graph::AdjacencyMatrix;
pub use sampler::{log_posterior, mh_sample, SamplerConfig, SamplerOutput};

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::link::LinkFunction;
use crate::quotient::Configuration;
use crate::rng::stream_rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// Core groups well separated, compact bridge.
    Well,
    /// Core groups closer, diffuse bridge at the origin.
    Weak,
}

/// Two core groups (`L`, `R`) and a bridge group (`B`) in the plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationSpec {
    /// `(n_L, n_B, n_R)`.
    pub group_sizes: [usize; 3],
    pub group_means: [[f64; 2]; 3],
    pub group_sds: [f64; 3],
    pub target_density: f64,
    pub regime: Option<Regime>,
}

impl SimulationSpec {
    pub fn well_identified() -> Self {
        Self {
            group_sizes: [48, 24, 48],
            group_means: [[-1.8, 0.0], [0.0, 0.9], [1.8, 0.0]],
            group_sds: [0.20, 0.25, 0.20],
            target_density: 0.1,
            regime: Some(Regime::Well),
        }
    }

    pub fn weak() -> Self {
        Self {
            group_sizes: [48, 24, 48],
            group_means: [[-1.25, 0.0], [0.0, 0.0], [1.25, 0.0]],
            group_sds: [0.20, 0.45, 0.20],
            target_density: 0.1,
            regime: Some(Regime::Weak),
        }
    }

    pub fn for_regime(regime: Regime) -> Self {
        match regime {
            Regime::Well => Self::well_identified(),
            Regime::Weak => Self::weak(),
        }
    }

    pub fn with_sizes(mut self, sizes: [usize; 3]) -> Self {
        self.group_sizes = sizes;
        self
    }

    pub fn n(&self) -> usize {
        self.group_sizes.iter().sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.group_sizes.contains(&0) {
            return Err(Error::invalid("group sizes must be positive"));
        }
        if self.group_sds.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
            return Err(Error::invalid("group standard deviations must be positive"));
        }
        if self.group_means.iter().flatten().any(|m| !m.is_finite()) {
            return Err(Error::invalid("group means must be finite"));
        }
        if !(self.target_density > 0.0 && self.target_density < 1.0) {
            return Err(Error::invalid("target density must lie in (0, 1)"));
        }
        if self.n() < 2 {
            return Err(Error::invalid("need at least two nodes"));
        }
        Ok(())
    }
}

/// Labels `0 = L`, `1 = B`, `2 = R`; nodes are ordered by block.
pub const GROUP_NAMES: [&str; 3] = ["L", "B", "R"];

/// `x_i ~ N(μ_g, σ_g² I₂)` with nodes ordered `L`, `B`, `R`.
pub fn simulate_template(spec: &SimulationSpec, seed: u64) -> Result<(Configuration, Vec<usize>)> {
    spec.validate()?;
    let mut rng = stream_rng(seed, 0);
    let labels: Vec<usize> = spec
        .group_sizes
        .iter()
        .enumerate()
        .flat_map(|(g, &size)| std::iter::repeat_n(g, size))
        .collect();
    let mut x = DMatrix::zeros(labels.len(), 2);
    for (i, &g) in labels.iter().enumerate() {
        for k in 0..2 {
            let z: f64 = rng.sample(StandardNormal);
            x[(i, k)] = spec.group_means[g][k] + spec.group_sds[g] * z;
        }
    }
    Ok((Configuration::new(x)?, labels))
}

fn pair_distances(x: &Configuration) -> Vec<f64> {
    let p = x.positions();
    let n = x.n();
    (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (p.row(i) - p.row(j)).norm()))
        .collect()
}

fn mean_probability(distances: &[f64], alpha: f64, link: &LinkFunction) -> f64 {
    distances.iter().map(|d| link.prob(alpha - d)).sum::<f64>() / distances.len() as f64
}

/// `(2/(n(n−1))) Σ_{i<j} g(α − d_ij)`.
pub fn expected_density(x: &Configuration, alpha: f64, link: &LinkFunction) -> f64 {
    mean_probability(&pair_distances(x), alpha, link)
}

pub const ALPHA_BRACKET: (f64, f64) = (-50.0, 50.0);

/// Intercept giving expected density `target`, by bisection on
/// [`ALPHA_BRACKET`]. The density is increasing in `α`.
pub fn calibrate_intercept(x: &Configuration, target: f64, link: &LinkFunction) -> Result<f64> {
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::invalid(format!("target density {target} outside (0, 1)")));
    }
    calibrate_on_distances(&pair_distances(x), target, link)
}

pub(crate) fn calibrate_on_distances(distances: &[f64], target: f64, link: &LinkFunction) -> Result<f64> {
    let (mut lo, mut hi) = ALPHA_BRACKET;
    let (f_lo, f_hi) = (
        mean_probability(distances, lo, link),
        mean_probability(distances, hi, link),
    );
    if !(f_lo <= target && target <= f_hi) {
        return Err(Error::Calibration {
            target,
            low: f_lo,
            high: f_hi,
        });
    }
    // Narrow to rounding; the density tolerance 1e-10 is met long before.
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if mean_probability(distances, mid, link) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Independent `Bernoulli(g(α − d_ij))` edges.
pub fn simulate_graph(x: &Configuration, alpha: f64, link: &LinkFunction, seed: u64) -> AdjacencyMatrix {
    let p = x.positions();
    AdjacencyMatrix::sample(x.n(), seed, |i, j| {
        link.prob(alpha - (p.row(i) - p.row(j)).norm())
    })
}
