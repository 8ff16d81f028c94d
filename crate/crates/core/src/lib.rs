//! Certification toolkit for finite-dimensional strategies of synchronous
//! nonlocal games.
//!
//! The crate provides the machinery needed to certify that a concrete
//! finite-dimensional strategy is (close to) a local dilation of an ideal
//! projective maximally-entangled strategy:
//!
//! - [`numerics`]: dense complex linear algebra (tensor products, vec/mat
//!   reshaping, Hermitian eigendecomposition, partial traces, Schmidt
//!   decompositions, state seminorms),
//! - [`strategy`]: tensor-product, PME, and mixed strategies and the
//!   correlations they induce,
//! - [`correlation`]: correlation tables, the ℓ¹ metric, synchronicity,
//!   and game-loss evaluation,
//! - [`games`]: synchronous games, the ∨-combinator, and strategy lifting,
//! - [`algebra`]: matrix *-algebra tools (commutants, irreducibility,
//!   simultaneous block diagonalization, game-relation checks),
//! - [`certificates`]: the synchronicity operator, spectral-gap
//!   certificates, robustness constants, dilation discovery/verification,
//!   and moment-closeness bounds,
//! - [`lcs`]: linear constraint systems mod d, solution groups, and the
//!   conversion of operator solutions into perfect strategies,
//! - [`formats`]: the JSON interchange schemas used by the CLI,
//! - [`corpus`]: reference games and strategies used throughout the test
//!   suites and as CLI fixtures.

pub mod algebra;
pub mod certificates;
pub mod correlation;
pub mod corpus;
mod error;
pub mod formats;
pub mod games;
pub mod lcs;
pub mod numerics;
pub mod strategy;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
