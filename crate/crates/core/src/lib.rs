//! Numerical and symbolic verification of the Poisson structures, loop-algebra
//! brackets, Hamiltonian reconstructions, hierarchy flows and Lax identities of
//! the Mikhalev–Pavlov and Plebański heavenly equations on periodic grids.
//!
//! The modules build on each other:
//!
//! * [`grid`]: spectral calculus on the 1- and 2-torus, discrete δ and Green kernels;
//! * [`loop_algebra`]: Laurent vector fields / 1-forms, commutator, R-bracket,
//!   residue pairing and coadjoint action;
//! * [`lie_poisson`]: seed elements, coordinate gradients and bracket kernels;
//! * [`poisson`]: the operators θ₀, θ₋₁ with skew / Jacobi / pencil checks;
//! * [`hamiltonian`]: variational derivatives and homotopy reconstruction;
//! * [`flows`]: the reduced hierarchy flows and their conservation laws;
//! * [`lax`]: Lax pairs, compatibility residuals and Casimir defects;
//! * [`expr`]: manufactured-field expressions with exact derivatives;
//! * [`suites`]: report-producing check families used by the command-line driver.

pub mod error;
pub mod expr;
pub mod flows;
pub mod grid;
pub mod hamiltonian;
pub mod lax;
pub mod lie_poisson;
pub mod loop_algebra;
pub mod poisson;
pub mod report;
pub mod sampling;
pub mod suites;

pub use error::{Error, Result};
pub use grid::{Grid, GridFunction};
pub use report::VerificationReport;

/// Which heavenly equation a computation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Case {
    /// Mikhalev–Pavlov, on the 1-torus.
    #[serde(rename = "mp")]
    MikhalevPavlov,
    /// Plebański, on the 2-torus.
    Plebanski,
}

impl Case {
    pub fn torus_dim(self) -> usize {
        match self {
            Case::MikhalevPavlov => 1,
            Case::Plebanski => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Case::MikhalevPavlov => "mp",
            Case::Plebanski => "plebanski",
        }
    }
}
