//! Exact finite-dimensional modules of the augmented tridiagonal algebra.
//!
//! Modules are built from evaluation modules of the `U_q(sl2)`-loop algebra,
//! pushed through the embeddings `phi_s` and `iota_t`, and analysed with exact
//! linear algebra over `Q(sqrt D)`.

pub mod field;
pub mod linalg;
mod modp;
pub mod loopmod;
pub mod tdalg;
pub mod qstrings;
pub mod analysis;
pub mod grid;
