//! Exact linear-algebra toolkit for relative endomorphism algebras of
//! subspace pairs over finite-field extensions, stratification of
//! Grassmannian/Lagrangian varieties, supersingular mass formulas,
//! quaternion-order torsion tests and the explicit g=4 Dieudonne chain.

pub mod dieudonne;
pub mod eo;
pub mod error;
pub mod field;
pub mod galois;
pub mod linalg;
pub mod mass;
pub mod pair;
pub mod quat;
pub mod strata;
pub mod symplectic;

pub use error::{Error, Result};
