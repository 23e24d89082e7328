//! Centered Gram representation of latent configurations and the quotient
//! geometry of centered factors under the right action of `O(r)`.
//!
//! A configuration `X` (n nodes in `R^r`) is identified with its centered Gram
//! matrix `B = H X Xᵀ H`. Every such `B` is represented by a centered factor
//! `Y` with `B = Y Yᵀ`, unique up to `Y ~ Y R` for orthogonal `R`. All
//! computations here work on the `n × r` factors; `n × n` matrices are only
//! formed when a caller explicitly asks for a Gram or distance matrix.

mod horizontal;
mod procrustes;

pub use horizontal::{
    horizontal_project, log_lift, retract, solve_lyapunov, HorizontalTangent, SkewSymmetric,
};
pub use procrustes::{procrustes_align, quotient_distance, Alignment};

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Relative singular-value threshold below which a factor counts as rank deficient.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// Raw latent coordinates, one row per node.
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    positions: DMatrix<f64>,
}

impl Configuration {
    pub fn new(positions: DMatrix<f64>) -> Result<Self> {
        if positions.nrows() < 2 {
            return Err(Error::invalid(format!(
                "a configuration needs at least 2 nodes, got {}",
                positions.nrows()
            )));
        }
        if positions.ncols() < 1 {
            return Err(Error::invalid("latent dimension must be at least 1"));
        }
        ensure_finite(&positions, "configuration")?;
        Ok(Self { positions })
    }

    /// Builds a configuration from row slices.
    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let r = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != r) {
            return Err(Error::invalid("rows have differing lengths"));
        }
        Self::new(DMatrix::from_fn(rows.len(), r, |i, k| rows[i][k]))
    }

    pub fn n(&self) -> usize {
        self.positions.nrows()
    }

    pub fn dim(&self) -> usize {
        self.positions.ncols()
    }

    pub fn positions(&self) -> &DMatrix<f64> {
        &self.positions
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.positions
    }
}

/// An `n × r` factor whose columns sum to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct CenteredFactor {
    factor: DMatrix<f64>,
}

impl CenteredFactor {
    /// Wraps `factor`, checking that every column sums to zero within
    /// `1e-10 · n · max|entry|`.
    pub fn new(factor: DMatrix<f64>) -> Result<Self> {
        ensure_finite(&factor, "factor")?;
        if factor.nrows() == 0 || factor.ncols() == 0 {
            return Err(Error::invalid("factor must be non-empty"));
        }
        let scale = factor.amax();
        let tol = 1e-10 * factor.nrows() as f64 * scale;
        for (k, col) in factor.column_iter().enumerate() {
            let sum: f64 = col.iter().sum();
            if sum.abs() > tol {
                return Err(Error::invalid(format!(
                    "factor column {k} sums to {sum:e}, not zero"
                )));
            }
        }
        Ok(Self { factor })
    }

    /// Subtracts column means from `matrix`. Never fails on finite input.
    pub fn recentered(mut matrix: DMatrix<f64>) -> Self {
        center_columns(&mut matrix);
        Self { factor: matrix }
    }

    pub(crate) fn from_raw(factor: DMatrix<f64>) -> Self {
        Self { factor }
    }

    pub fn n(&self) -> usize {
        self.factor.nrows()
    }

    pub fn rank_bound(&self) -> usize {
        self.factor.ncols()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.factor
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.factor
    }

    pub fn norm(&self) -> f64 {
        self.factor.norm()
    }

    /// Right-multiplies by an `r × r` matrix. Column sums stay zero for any `r × r` matrix.
    pub fn rotated(&self, rotation: &DMatrix<f64>) -> Self {
        Self {
            factor: &self.factor * rotation,
        }
    }

    pub fn gram(&self) -> GramMatrix {
        GramMatrix::from_factor(self)
    }

    /// Singular values of the factor, descending.
    pub fn singular_values(&self) -> Vec<f64> {
        let mut sv: Vec<f64> = self.factor.singular_values().iter().copied().collect();
        sv.sort_by(|a, b| b.total_cmp(a));
        sv
    }

    /// `σ_min > RANK_TOLERANCE · σ_max`.
    pub fn is_full_rank(&self) -> bool {
        self.ensure_full_rank().is_ok()
    }

    pub(crate) fn ensure_full_rank(&self) -> Result<()> {
        let sv = self.singular_values();
        let largest = sv.first().copied().unwrap_or(0.0);
        let smallest = sv.last().copied().unwrap_or(0.0);
        let threshold = RANK_TOLERANCE * largest;
        if largest == 0.0 || smallest <= threshold {
            return Err(Error::RankDeficient {
                what: "factor",
                smallest,
                threshold,
            });
        }
        Ok(())
    }

    /// Squared Euclidean distance between rows `i` and `j`.
    pub fn squared_row_distance(&self, i: usize, j: usize) -> f64 {
        let y = &self.factor;
        (0..y.ncols())
            .map(|k| {
                let d = y[(i, k)] - y[(j, k)];
                d * d
            })
            .sum()
    }

    pub fn row_distance(&self, i: usize, j: usize) -> f64 {
        self.squared_row_distance(i, j).sqrt()
    }
}

/// A centered positive semidefinite `n × n` matrix of rank at most `r`.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    matrix: DMatrix<f64>,
    rank_bound: usize,
}

impl GramMatrix {
    /// Validates symmetry, zero row sums, positive semidefiniteness and the rank bound.
    pub fn new(matrix: DMatrix<f64>, rank_bound: usize) -> Result<Self> {
        ensure_finite(&matrix, "Gram matrix")?;
        let n = matrix.nrows();
        if n != matrix.ncols() {
            return Err(Error::shape(
                format!("{n}x{n}"),
                format!("{n}x{}", matrix.ncols()),
            ));
        }
        let scale = matrix.amax().max(1.0);
        if (&matrix - matrix.transpose()).amax() > 1e-10 * scale {
            return Err(Error::invalid("Gram matrix is not symmetric"));
        }
        for (i, row) in matrix.row_iter().enumerate() {
            let sum: f64 = row.iter().sum();
            if sum.abs() > 1e-10 * n as f64 * scale {
                return Err(Error::invalid(format!("Gram row {i} sums to {sum:e}")));
            }
        }
        let trace = matrix.trace();
        let floor = 1e-10 * trace.max(f64::MIN_POSITIVE);
        let eig = SymmetricEigen::new(matrix.clone()).eigenvalues;
        if let Some(min) = eig.iter().copied().reduce(f64::min) {
            if min < -floor {
                return Err(Error::invalid(format!(
                    "Gram matrix has negative eigenvalue {min:e}"
                )));
            }
        }
        let significant = eig.iter().filter(|&&l| l > floor).count();
        if significant > rank_bound {
            return Err(Error::invalid(format!(
                "Gram matrix has {significant} significant eigenvalues, rank bound is {rank_bound}"
            )));
        }
        Ok(Self { matrix, rank_bound })
    }

    /// `Y Yᵀ`, symmetrized.
    pub fn from_factor(factor: &CenteredFactor) -> Self {
        let y = factor.as_matrix();
        let mut b = y * y.transpose();
        symmetrize(&mut b);
        Self {
            matrix: b,
            rank_bound: factor.rank_bound(),
        }
    }

    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn rank_bound(&self) -> usize {
        self.rank_bound
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace()
    }

    /// `D²_ij = B_ii + B_jj − 2 B_ij`, clamped at zero.
    pub fn squared_distance(&self, i: usize, j: usize) -> f64 {
        let b = &self.matrix;
        (b[(i, i)] + b[(j, j)] - 2.0 * b[(i, j)]).max(0.0)
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.squared_distance(i, j).sqrt()
    }
}

/// Squared pairwise distances `Δ_ij = ‖x_i − x_j‖²`.
#[derive(Debug, Clone, PartialEq)]
pub struct SquaredDistanceMatrix {
    matrix: DMatrix<f64>,
}

impl SquaredDistanceMatrix {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        ensure_finite(&matrix, "distance matrix")?;
        let n = matrix.nrows();
        if n != matrix.ncols() {
            return Err(Error::shape(
                format!("{n}x{n}"),
                format!("{n}x{}", matrix.ncols()),
            ));
        }
        let scale = matrix.amax().max(1.0);
        for i in 0..n {
            if matrix[(i, i)] != 0.0 {
                return Err(Error::invalid(format!("diagonal entry {i} is nonzero")));
            }
            for j in 0..i {
                if (matrix[(i, j)] - matrix[(j, i)]).abs() > 1e-10 * scale {
                    return Err(Error::invalid("distance matrix is not symmetric"));
                }
                if matrix[(i, j)] < 0.0 {
                    return Err(Error::invalid("distance matrix has a negative entry"));
                }
            }
        }
        Ok(Self { matrix })
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Elementwise square root.
    pub fn distances(&self) -> DMatrix<f64> {
        self.matrix.map(f64::sqrt)
    }
}

/// Result of double-centering a squared distance matrix.
///
/// For a Euclidean-realizable input this is a valid Gram matrix. Otherwise it
/// is indefinite and `min_eigenvalue` reports by how much; nothing is repaired.
#[derive(Debug, Clone)]
pub struct DoubleCentered {
    pub matrix: DMatrix<f64>,
    pub min_eigenvalue: f64,
}

impl DoubleCentered {
    pub fn into_gram(self, rank_bound: usize) -> Result<GramMatrix> {
        GramMatrix::new(self.matrix, rank_bound)
    }
}

/// Subtracts the column-means row.
pub fn center_configuration(x: &Configuration) -> CenteredFactor {
    CenteredFactor::recentered(x.positions.clone())
}

/// `B = Y Yᵀ` with `Y` the centered configuration.
pub fn gram_of(x: &Configuration) -> GramMatrix {
    GramMatrix::from_factor(&center_configuration(x))
}

pub fn distances_from_gram(b: &GramMatrix) -> SquaredDistanceMatrix {
    let n = b.n();
    let matrix = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            0.0
        } else {
            b.squared_distance(i.min(j), i.max(j))
        }
    });
    SquaredDistanceMatrix { matrix }
}

/// `−½ H Δ H`, computed from row, column and grand means.
pub fn gram_from_squared_distances(delta: &SquaredDistanceMatrix) -> DoubleCentered {
    let d = &delta.matrix;
    let n = d.nrows();
    let row_means: Vec<f64> = d.row_iter().map(|r| r.sum() / n as f64).collect();
    let col_means: Vec<f64> = d.column_iter().map(|c| c.sum() / n as f64).collect();
    let grand = row_means.iter().sum::<f64>() / n as f64;
    let mut b = DMatrix::from_fn(n, n, |i, j| {
        -0.5 * (d[(i, j)] - row_means[i] - col_means[j] + grand)
    });
    symmetrize(&mut b);
    let min_eigenvalue = SymmetricEigen::new(b.clone())
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    DoubleCentered {
        matrix: b,
        min_eigenvalue,
    }
}

pub(crate) fn center_columns(m: &mut DMatrix<f64>) {
    let n = m.nrows() as f64;
    for mut col in m.column_iter_mut() {
        let mean = col.sum() / n;
        col.add_scalar_mut(-mean);
    }
}

pub(crate) fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in 0..i {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

pub(crate) fn ensure_finite(m: &DMatrix<f64>, what: &str) -> Result<()> {
    if m.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::invalid(format!("{what} contains non-finite entries")))
    }
}
