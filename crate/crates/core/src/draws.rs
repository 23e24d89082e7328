use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quotient::{center_configuration, CenteredFactor, Configuration};
use crate::rng::{random_orthogonal, stream_rng};

/// Posterior sample on the quotient: `M` centered factors sharing `(n, r)`,
/// optionally paired with intercept draws.
#[derive(Debug, Clone, PartialEq)]
pub struct DrawSet {
    factors: Vec<CenteredFactor>,
    intercepts: Option<Vec<f64>>,
    n: usize,
    r: usize,
}

impl DrawSet {
    pub fn new(factors: Vec<CenteredFactor>, intercepts: Option<Vec<f64>>) -> Result<Self> {
        let first = factors
            .first()
            .ok_or_else(|| Error::invalid("a draw set needs at least one draw"))?;
        let (n, r) = (first.n(), first.rank_bound());
        for (m, f) in factors.iter().enumerate() {
            if f.n() != n || f.rank_bound() != r {
                return Err(Error::shape(
                    format!("{n}x{r}"),
                    format!("{}x{} (draw {m})", f.n(), f.rank_bound()),
                ));
            }
        }
        if let Some(alpha) = &intercepts {
            if alpha.len() != factors.len() {
                return Err(Error::shape(
                    format!("{} intercepts", factors.len()),
                    format!("{} intercepts", alpha.len()),
                ));
            }
            if alpha.iter().any(|a| !a.is_finite()) {
                return Err(Error::invalid("intercepts contain non-finite values"));
            }
        }
        Ok(Self {
            factors,
            intercepts,
            n,
            r,
        })
    }

    /// Centers each configuration.
    pub fn from_configurations(configs: &[Configuration], intercepts: Option<Vec<f64>>) -> Result<Self> {
        Self::new(configs.iter().map(center_configuration).collect(), intercepts)
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rank_bound(&self) -> usize {
        self.r
    }

    pub fn factors(&self) -> &[CenteredFactor] {
        &self.factors
    }

    pub fn factor(&self, m: usize) -> &CenteredFactor {
        &self.factors[m]
    }

    pub fn intercepts(&self) -> Option<&[f64]> {
        self.intercepts.as_deref()
    }

    pub(crate) fn require_intercepts(&self) -> Result<&[f64]> {
        self.intercepts()
            .ok_or_else(|| Error::invalid("this summary needs intercept draws"))
    }

    pub fn with_intercepts(self, intercepts: Vec<f64>) -> Result<Self> {
        Self::new(self.factors, Some(intercepts))
    }

    /// `(1/M) Σ_m Y^(m) Y^(m)ᵀ`, accumulated in draw order.
    pub fn mean_gram(&self) -> DMatrix<f64> {
        let mut acc = DMatrix::zeros(self.n, self.n);
        for f in &self.factors {
            let y = f.as_matrix();
            acc.gemm(1.0, y, &y.transpose(), 1.0);
        }
        acc / self.len() as f64
    }

    /// Right-multiplies every factor by an independent Haar-random orthogonal
    /// matrix. Each draw's Gram matrix is unchanged.
    pub fn randomly_oriented(&self, seed: u64) -> Self {
        let factors = self
            .factors
            .par_iter()
            .enumerate()
            .map(|(m, f)| {
                let mut rng = stream_rng(seed, m as u64);
                f.rotated(&random_orthogonal(&mut rng, self.r))
            })
            .collect();
        Self {
            factors,
            intercepts: self.intercepts.clone(),
            n: self.n,
            r: self.r,
        }
    }

    /// `D_ij^(m)` for every draw.
    pub fn distance_samples(&self, i: usize, j: usize) -> Vec<f64> {
        self.factors.iter().map(|f| f.row_distance(i, j)).collect()
    }

    pub(crate) fn check_node(&self, i: usize) -> Result<()> {
        if i >= self.n {
            return Err(Error::invalid(format!(
                "node index {i} out of range for n = {}",
                self.n
            )));
        }
        Ok(())
    }
}
