//! Vertical/horizontal splitting of factor perturbations, the retraction, and
//! the log lift.
//!
//! At a full-rank factor `Y` the vertical directions `Y Ω` (skew `Ω`) leave
//! `Y Yᵀ` unchanged. A centered direction `Z` is horizontal when `Yᵀ Z` is
//! symmetric; the projection removes the vertical part `Y Ω` where `Ω` solves
//! `S Ω + Ω S = Yᵀ Z − Zᵀ Y` with `S = Yᵀ Y`.

use nalgebra::{DMatrix, SymmetricEigen};

use super::{center_columns, procrustes_align, CenteredFactor};
use crate::error::{Error, Result};

/// An `r × r` skew-symmetric matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SkewSymmetric {
    omega: DMatrix<f64>,
}

impl SkewSymmetric {
    pub fn new(omega: DMatrix<f64>) -> Result<Self> {
        if !omega.is_square() {
            return Err(Error::invalid("skew-symmetric matrix must be square"));
        }
        if (&omega + omega.transpose()).amax() > 1e-12 * omega.amax().max(1.0) {
            return Err(Error::invalid("matrix is not skew-symmetric"));
        }
        Ok(Self { omega })
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.omega
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.omega
    }
}

/// A perturbation of a base factor that changes its Gram matrix only along
/// identifiable directions. The base is held by the caller.
#[derive(Debug, Clone, PartialEq)]
pub struct HorizontalTangent {
    direction: DMatrix<f64>,
}

impl HorizontalTangent {
    /// Checks that `direction` is centered and that `baseᵀ direction` is symmetric.
    pub fn new(base: &CenteredFactor, direction: DMatrix<f64>) -> Result<Self> {
        if direction.shape() != base.as_matrix().shape() {
            return Err(Error::shape(
                format!("{}x{}", base.n(), base.rank_bound()),
                format!("{}x{}", direction.nrows(), direction.ncols()),
            ));
        }
        let scale = direction.amax();
        for col in direction.column_iter() {
            if col.sum().abs() > 1e-10 * direction.nrows() as f64 * scale {
                return Err(Error::invalid("tangent direction is not centered"));
            }
        }
        let m = base.as_matrix().transpose() * &direction;
        let tol = 1e-8 * base.norm() * direction.norm();
        if (&m - m.transpose()).amax() > tol {
            return Err(Error::invalid("tangent direction is not horizontal"));
        }
        Ok(Self { direction })
    }

    pub(crate) fn from_raw(direction: DMatrix<f64>) -> Self {
        Self { direction }
    }

    pub fn direction(&self) -> &DMatrix<f64> {
        &self.direction
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.direction
    }

    pub fn norm(&self) -> f64 {
        self.direction.norm()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            direction: &self.direction * s,
        }
    }
}

/// Solves `S Ω + Ω S = C` for skew `Ω` given SPD `S` and skew `C`.
///
/// With `S = Q Λ Qᵀ` the equation decouples in the eigenbasis:
/// `(Qᵀ Ω Q)_ij = (Qᵀ C Q)_ij / (λ_i + λ_j)`.
pub fn solve_lyapunov(s: &DMatrix<f64>, c: &DMatrix<f64>) -> Result<SkewSymmetric> {
    let r = s.nrows();
    if !s.is_square() || c.shape() != (r, r) {
        return Err(Error::shape(
            format!("{r}x{r}"),
            format!("{}x{}", c.nrows(), c.ncols()),
        ));
    }
    if (c + c.transpose()).amax() > 1e-10 * c.amax().max(1.0) {
        return Err(Error::invalid("right-hand side is not skew-symmetric"));
    }
    let eig = SymmetricEigen::new(s.clone());
    let smallest = eig.eigenvalues.min();
    let threshold = 1e-12 * s.trace();
    if smallest.is_nan() || smallest <= threshold {
        return Err(Error::RankDeficient {
            what: "Lyapunov coefficient matrix",
            smallest,
            threshold,
        });
    }
    let q = &eig.eigenvectors;
    let lambda = &eig.eigenvalues;
    let rotated_rhs = q.transpose() * c * q;
    let inner = DMatrix::from_fn(r, r, |i, j| rotated_rhs[(i, j)] / (lambda[i] + lambda[j]));
    let omega = q * inner * q.transpose();
    Ok(SkewSymmetric {
        omega: 0.5 * (&omega - omega.transpose()),
    })
}

/// `Z − Y Ω`, the horizontal part of a centered direction `Z` at `Y`.
///
/// `Y` must have full column rank; the quotient is not smooth elsewhere.
pub fn horizontal_project(y: &CenteredFactor, z: &DMatrix<f64>) -> Result<HorizontalTangent> {
    let ym = y.as_matrix();
    if z.shape() != ym.shape() {
        return Err(Error::shape(
            format!("{}x{}", ym.nrows(), ym.ncols()),
            format!("{}x{}", z.nrows(), z.ncols()),
        ));
    }
    let scale = z.amax().max(ym.amax());
    for col in z.column_iter() {
        if col.sum().abs() > 1e-8 * z.nrows() as f64 * scale {
            return Err(Error::invalid("direction to project is not centered"));
        }
    }
    y.ensure_full_rank()?;
    let yt_z = ym.transpose() * z;
    let c = &yt_z - yt_z.transpose();
    let s = ym.transpose() * ym;
    let omega = solve_lyapunov(&s, &c)?;
    Ok(HorizontalTangent::from_raw(z - ym * omega.as_matrix()))
}

/// `H (Y + Z)`: step in factor space, then recenter.
pub fn retract(y: &CenteredFactor, z: &DMatrix<f64>) -> CenteredFactor {
    let mut next = y.as_matrix() + z;
    center_columns(&mut next);
    CenteredFactor::from_raw(next)
}

/// Aligned difference `Y2 R* − Y1`, projected horizontally at `Y1` as a
/// numerical guard (it is horizontal in exact arithmetic). Its norm equals
/// the quotient distance.
pub fn log_lift(y1: &CenteredFactor, y2: &CenteredFactor) -> Result<HorizontalTangent> {
    let alignment = procrustes_align(y1, y2)?;
    let z = y2.as_matrix() * &alignment.rotation - y1.as_matrix();
    horizontal_project(y1, &z)
}
