//! Eigenvalues of the Sturm-Liouville problem `-z'' + q(x) z = lambda z`
//! on `[0, ell]` with separated boundary conditions, and the first- and
//! second-order derivatives of the eigenvalue map `q -> lambda_n(q)`.
//!
//! The first derivative in a direction `h` is `L = int E_n^2 h`, where
//! `E_n` is the normalized eigenfunction. The second derivative `M` is
//! computed by three independent routes (direct, energy, kernel) that
//! must agree, and everything is cross-checked against finite-difference
//! and variational oracles.
//!
//! ```
//! use sl_frechet::eigen::{eigenpair, BoundaryData};
//! use sl_frechet::mesh::{Grid, SampledFn};
//! use std::f64::consts::PI;
//!
//! let grid = Grid::new(PI, 2000)?;
//! let q = SampledFn::zeros(grid);
//! let ep = eigenpair(&q, &BoundaryData::dirichlet(), 0)?;
//! assert!((ep.lambda - 1.0).abs() < 1e-7);
//! # Ok::<(), sl_frechet::error::Error>(())
//! ```
//!
//! See the `book/` guide for a narrative walk through the concepts; its
//! code snippets are compiled as doc-tests below.

pub mod cli;
pub mod eigen;
pub mod error;
pub mod frechet;
pub mod mesh;
pub mod ode;
pub mod oracle;

pub use error::{Error, Result};

// Compile the book's code snippets together with the library so the
// guide can never drift out of sync with the API.
#[doc = include_str!("../../../book/src/quadrature.md")]
mod _book_quadrature {}
#[doc = include_str!("../../../book/src/eigenvalues.md")]
mod _book_eigenvalues {}
#[doc = include_str!("../../../book/src/derivatives.md")]
mod _book_derivatives {}
#[doc = include_str!("../../../book/src/verification.md")]
mod _book_verification {}
