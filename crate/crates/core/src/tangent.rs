//! Second-order posterior analysis at a base point, usually the Fréchet mean:
//! tangent residuals, their empirical covariance, principal directions, and
//! delta-method variances of latent distances.
//!
//! Residuals are stored in factor coordinates (`n × r`), and the covariance
//! acts on their column-major vectorization, so memory is `O(M n r + (n r)²)`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;

use crate::draws::DrawSet;
use crate::error::{Error, Result};
use crate::quotient::{center_columns, horizontal_project, log_lift, CenteredFactor, HorizontalTangent};

/// Horizontal residuals `ξ^(m) = Log_Ŷ(Y^(m))` of the retained draws.
#[derive(Debug, Clone)]
pub struct TangentSample {
    base: CenteredFactor,
    residuals: Vec<HorizontalTangent>,
    retained: Vec<usize>,
    excluded: Vec<usize>,
}

impl TangentSample {
    /// Wraps residuals that are already horizontal at `base`.
    pub fn from_residuals(base: CenteredFactor, residuals: Vec<DMatrix<f64>>) -> Result<Self> {
        base.ensure_full_rank()?;
        let residuals = residuals
            .into_iter()
            .map(|xi| HorizontalTangent::new(&base, xi))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            base,
            retained: (0..residuals.len()).collect(),
            residuals,
            excluded: Vec::new(),
        })
    }

    pub fn base(&self) -> &CenteredFactor {
        &self.base
    }

    pub fn residuals(&self) -> &[HorizontalTangent] {
        &self.residuals
    }

    pub fn len(&self) -> usize {
        self.residuals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.residuals.is_empty()
    }

    /// Draw index of each residual.
    pub fn retained(&self) -> &[usize] {
        &self.retained
    }

    /// Draws dropped because their factor is not of full column rank.
    pub fn excluded(&self) -> &[usize] {
        &self.excluded
    }

    pub fn mean_residual(&self) -> DMatrix<f64> {
        let (n, r) = (self.base.n(), self.base.rank_bound());
        let mut sum = DMatrix::zeros(n, r);
        for xi in &self.residuals {
            sum += xi.direction();
        }
        if self.residuals.is_empty() {
            sum
        } else {
            sum / self.residuals.len() as f64
        }
    }
}

/// Residual of every draw at `base`. Rank-deficient draws leave the smooth
/// stratum and are excluded, not fatal.
pub fn tangent_residuals(base: &CenteredFactor, draws: &DrawSet) -> Result<TangentSample> {
    if base.n() != draws.n() || base.rank_bound() != draws.rank_bound() {
        return Err(Error::shape(
            format!("{}x{}", draws.n(), draws.rank_bound()),
            format!("{}x{}", base.n(), base.rank_bound()),
        ));
    }
    base.ensure_full_rank()?;
    let lifted: Vec<Option<HorizontalTangent>> = draws
        .factors()
        .par_iter()
        .map(|ym| {
            if !ym.is_full_rank() {
                return Ok(None);
            }
            log_lift(base, ym).map(Some)
        })
        .collect::<Result<_>>()?;
    let mut sample = TangentSample {
        base: base.clone(),
        residuals: Vec::with_capacity(lifted.len()),
        retained: Vec::with_capacity(lifted.len()),
        excluded: Vec::new(),
    };
    for (m, xi) in lifted.into_iter().enumerate() {
        match xi {
            Some(xi) => {
                sample.residuals.push(xi);
                sample.retained.push(m);
            }
            None => sample.excluded.push(m),
        }
    }
    Ok(sample)
}

/// `Σ̂ = (1/(M−1)) Σ vec(ξ) vec(ξ)ᵀ` with its eigendecomposition.
#[derive(Debug, Clone)]
pub struct TangentCovariance {
    base: CenteredFactor,
    pub matrix: DMatrix<f64>,
    /// Descending.
    pub eigenvalues: Vec<f64>,
    /// Column `k` pairs with `eigenvalues[k]`; largest-magnitude entry positive.
    pub eigenvectors: DMatrix<f64>,
}

impl TangentCovariance {
    /// `n r − r(r+1)/2`, the dimension of the horizontal space.
    pub fn effective_dim(&self) -> usize {
        let (n, r) = (self.base.n(), self.base.rank_bound());
        n * r - r * (r + 1) / 2
    }

    pub fn base(&self) -> &CenteredFactor {
        &self.base
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace()
    }

    /// Eigenvalues above `1e-10 · trace`.
    pub fn numerical_rank(&self) -> usize {
        let cut = 1e-10 * self.trace();
        self.eigenvalues.iter().filter(|&&l| l > cut).count()
    }
}

pub fn tangent_covariance(sample: &TangentSample) -> Result<TangentCovariance> {
    let m = sample.len();
    if m < 2 {
        return Err(Error::invalid(format!(
            "tangent covariance needs at least 2 residuals, got {m}"
        )));
    }
    let dim = sample.base.n() * sample.base.rank_bound();
    let stacked = DMatrix::from_fn(dim, m, |a, k| sample.residuals[k].direction().as_slice()[a]);
    let mut matrix = &stacked * stacked.transpose() / (m - 1) as f64;
    crate::quotient::symmetrize(&mut matrix);

    let eig = SymmetricEigen::new(matrix.clone());
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut eigenvectors = DMatrix::from_fn(dim, dim, |a, k| eig.eigenvectors[(a, order[k])]);
    for mut col in eigenvectors.column_iter_mut() {
        let pivot = col.iamax();
        if col[pivot] < 0.0 {
            col.neg_mut();
        }
    }
    Ok(TangentCovariance {
        base: sample.base.clone(),
        matrix,
        eigenvalues,
        eigenvectors,
    })
}

/// Top-`k` eigenpairs, eigenvectors reshaped to `n × r` tangents at the base.
pub fn principal_directions(cov: &TangentCovariance, k: usize) -> Result<Vec<(f64, HorizontalTangent)>> {
    let (n, r) = (cov.base.n(), cov.base.rank_bound());
    if k == 0 || k > n * r {
        return Err(Error::invalid(format!(
            "number of directions {k} outside [1, {}]",
            n * r
        )));
    }
    (0..k)
        .map(|c| {
            let mut v = DMatrix::from_column_slice(n, r, cov.eigenvectors.column(c).as_slice());
            center_columns(&mut v);
            Ok((cov.eigenvalues[c], horizontal_project(&cov.base, &v)?))
        })
        .collect()
}

/// `E_ii + E_jj − 2E_ij` for the Gram perturbation `E = ξŶᵀ + Ŷξᵀ`,
/// i.e. the differential of `D²_ij` at `Ŷ` along `ξ`.
pub fn squared_distance_differential(base: &CenteredFactor, xi: &DMatrix<f64>, i: usize, j: usize) -> f64 {
    let y = base.as_matrix();
    let dy = y.row(i) - y.row(j);
    let dxi = xi.row(i) - xi.row(j);
    2.0 * dy.dot(&dxi)
}

/// Delta-method variance of a latent distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaVariance {
    pub variance: f64,
    /// `D_ij(B̂)` at the base.
    pub distance: f64,
    /// Set when `D_ij(B̂) ≤ δ_D`; `variance` then refers to `D²_ij`.
    pub squared_scale: bool,
}

/// `δ_D = 1e-8 · √(tr(B̂)/n)`.
pub fn degenerate_distance_threshold(base: &CenteredFactor) -> f64 {
    1e-8 * (base.norm().powi(2) / base.n() as f64).sqrt()
}

/// `∇ᵀ Σ̂ ∇ = (1/(M−1)) Σ_m ℓ(ξ^(m))²` with `ℓ(ξ) = dD²_ij[E(ξ)] / (2 D_ij)`.
///
/// Below `δ_D` the functional is `dD²_ij[E(ξ)]` and the result is flagged;
/// at exactly coincident nodes that differential vanishes.
pub fn delta_variance_distance(sample: &TangentSample, i: usize, j: usize) -> Result<DeltaVariance> {
    let n = sample.base.n();
    if i >= n || j >= n {
        return Err(Error::invalid(format!("node index out of range for n = {n}")));
    }
    if i == j {
        return Err(Error::invalid("delta variance needs two distinct nodes"));
    }
    if sample.len() < 2 {
        return Err(Error::invalid(format!(
            "delta variance needs at least 2 residuals, got {}",
            sample.len()
        )));
    }
    let distance = sample.base.row_distance(i, j);
    let squared_scale = distance <= degenerate_distance_threshold(&sample.base);
    let scale = if squared_scale { 1.0 } else { 2.0 * distance };
    let sum_sq: f64 = sample
        .residuals
        .iter()
        .map(|xi| (squared_distance_differential(&sample.base, xi.direction(), i, j) / scale).powi(2))
        .sum();
    Ok(DeltaVariance {
        variance: sum_sq / (sample.len() - 1) as f64,
        distance,
        squared_scale,
    })
}

/// Delta-method variances for every dyad `i < j`, symmetric with zero diagonal.
/// Entries flagged squared-scale are reported in the second matrix as `1.0`.
pub fn delta_variance_matrix(sample: &TangentSample) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let n = sample.base.n();
    let rows: Vec<Vec<DeltaVariance>> = (0..n)
        .into_par_iter()
        .map(|i| {
            ((i + 1)..n)
                .map(|j| delta_variance_distance(sample, i, j))
                .collect()
        })
        .collect::<Result<_>>()?;
    let mut var = DMatrix::zeros(n, n);
    let mut flags = DMatrix::zeros(n, n);
    for (i, row) in rows.into_iter().enumerate() {
        for (off, dv) in row.into_iter().enumerate() {
            let j = i + 1 + off;
            var[(i, j)] = dv.variance;
            var[(j, i)] = dv.variance;
            let f = if dv.squared_scale { 1.0 } else { 0.0 };
            flags[(i, j)] = f;
            flags[(j, i)] = f;
        }
    }
    Ok((var, flags))
}

/// Column-major vectorization used by the covariance.
pub fn vectorize(xi: &DMatrix<f64>) -> DVector<f64> {
    DVector::from_column_slice(xi.as_slice())
}
