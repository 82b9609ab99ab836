//! Desk-scale laboratory for elliptic obstacle problems with measure data.
//!
//! The crate has three layers:
//!
//! * a data model for bounded Radon measures carrying both the Jordan split
//!   `mu = mu_plus - mu_minus` and the capacity split `mu = mu_a + mu_s`
//!   ([`measure`]);
//! * mesh-free potential kernels (fundamental solutions, ball averages of
//!   potentials, ratio scans for mutually singular pairs) in
//!   [`potential`](mod@potential);
//! * a P1 finite-element discretization of a linear elliptic operator on a
//!   rectangle with Dirichlet solves for measure data, discrete Green
//!   functions, capacity estimates ([`grid`], [`operator`]) and
//!   complementarity solvers for the discrete variational inequality
//!   ([`obstacle`]).
//!
//! The [`experiments`] module ties the pieces into refinement studies run by
//! the `oplab` binary; see the README for the CLI and file formats.

// `!(x > 0.0)` deliberately rejects NaN along with nonpositive values, and
// banded kernels index with offsets that do not zip cleanly.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod band;
pub mod cli;
pub mod config;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod grid;
pub mod measure;
pub mod obstacle;
pub mod operator;
pub mod potential;
pub mod quadrature;
pub mod textio;

pub use error::{Error, Result};
pub use geometry::{BoxN, Point, Rect};
pub use grid::{Grid, NodalFunction};
pub use measure::{
    capacity_decompose, jordan_decompose, mutually_singular, total_variation, Atom, CurvePiece,
    Density, Measure, MeasureDecomposition,
};
pub use obstacle::{
    complementarity_residual, condition_check, minimality_probe, solve_lcp, solve_naive, solve_op,
    LcpResult, Obstacle, OpResult, SolverOptions,
};
pub use operator::{assemble, estimate_capacity, CoefficientField, EllipticOperator};
pub use potential::{
    averaged_kernel, ball_average_potential, fundamental_solution, potential, ratio_scan, Dim,
    RatioScan,
};
