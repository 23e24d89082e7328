//! Posterior summaries for Euclidean latent space network models that respect
//! the model's identifiability: every quantity is a function of the centered
//! Gram matrix `B = H X Xᵀ H`, so draws that differ by a rigid motion of the
//! latent positions are treated as the same point.

pub mod cli;
pub mod draws;
pub mod error;
pub mod frechet;
pub mod io;
pub mod link;
pub mod quotient;
pub mod rng;
pub mod sim;
pub mod stats;
pub mod summaries;
pub mod tangent;

pub use draws::DrawSet;
pub use error::{Error, Result};
pub use frechet::{
    credible_radius, frechet_mean, frechet_mean_multistart, frechet_variation, procrustes_mean,
    quotient_medoid, FrechetConfig, FrechetResult, Initialization,
};
pub use link::LinkFunction;
pub use quotient::{CenteredFactor, Configuration, GramMatrix, SquaredDistanceMatrix};
pub use sim::{AdjacencyMatrix, SamplerConfig, SimulationSpec};

/// Book chapters compiled as doc-tests so their snippets stay current.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/identifiable-structure.md")]
    mod identifiable_structure {}
    #[doc = include_str!("../../../book/src/frechet-mean.md")]
    mod frechet_mean {}
    #[doc = include_str!("../../../book/src/tangent-analysis.md")]
    mod tangent_analysis {}
    #[doc = include_str!("../../../book/src/summaries.md")]
    mod summaries {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    mod simulation {}
    #[doc = include_str!("../../../book/src/command-line.md")]
    mod command_line {}
}
