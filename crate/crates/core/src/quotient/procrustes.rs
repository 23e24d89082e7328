use nalgebra::DMatrix;

use super::CenteredFactor;
use crate::error::{Error, Result};

/// Optimal orthogonal alignment of one factor onto another.
#[derive(Debug, Clone)]
pub struct Alignment {
    /// `R*` with `Y2 · R*` closest to `Y1`.
    pub rotation: DMatrix<f64>,
    /// `‖Y1 − Y2 R*‖_F`.
    pub residual: f64,
    /// `tr(Σ)` for the SVD `Y2ᵀ Y1 = U Σ Vᵀ`.
    pub singular_value_sum: f64,
}

fn check_shapes(y1: &CenteredFactor, y2: &CenteredFactor) -> Result<()> {
    let (a, b) = (y1.as_matrix().shape(), y2.as_matrix().shape());
    if a != b {
        return Err(Error::shape(
            format!("{}x{}", a.0, a.1),
            format!("{}x{}", b.0, b.1),
        ));
    }
    Ok(())
}

/// Solves `min_{R ∈ O(r)} ‖Y1 − Y2 R‖_F` through the SVD of the `r × r`
/// cross product `Y2ᵀ Y1 = U Σ Vᵀ`, giving `R* = U Vᵀ`.
///
/// When the cross product is rank deficient the rotation is not unique; any
/// valid `U Vᵀ` is returned and only the residual is meaningful.
pub fn procrustes_align(y1: &CenteredFactor, y2: &CenteredFactor) -> Result<Alignment> {
    check_shapes(y1, y2)?;
    let cross = y2.as_matrix().transpose() * y1.as_matrix();
    let svd = cross
        .clone()
        .try_svd(true, true, f64::EPSILON, 10_000)
        .ok_or_else(|| {
            Error::Numerical(format!(
                "SVD of the {r}x{r} Procrustes cross product did not converge \
             (max |entry| {:e})",
                cross.amax(),
                r = cross.nrows()
            ))
        })?;
    let (u, v_t) = match (svd.u, svd.v_t) {
        (Some(u), Some(v_t)) => (u, v_t),
        _ => return Err(Error::Numerical("SVD factors were not computed".into())),
    };
    let rotation = u * v_t;
    let residual = (y1.as_matrix() - y2.as_matrix() * &rotation).norm();
    Ok(Alignment {
        rotation,
        residual,
        singular_value_sum: svd.singular_values.sum(),
    })
}

/// `d(B1, B2) = min_{R ∈ O(r)} ‖Y1 − Y2 R‖_F`.
pub fn quotient_distance(y1: &CenteredFactor, y2: &CenteredFactor) -> Result<f64> {
    Ok(procrustes_align(y1, y2)?.residual)
}
