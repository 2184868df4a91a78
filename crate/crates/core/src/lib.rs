//! Estimation of the Minkowski dimension and the fractal curvatures of planar
//! fractal sets from binary images.
//!
//! The pipeline:
//!
//! 1. [`ifs`] – self-similar sets from iterated function systems, rasterized
//!    to a [`BinaryImage`].
//! 2. [`image`] / [`distance`] – exact Euclidean distance transform and
//!    dilation to parallel sets.
//! 3. [`minkowski`] – area, half boundary length and Euler characteristic of
//!    a binary image from a single 2×2 configuration scan.
//! 4. [`series`] – radii schedules, the measurement loop over dilations, sign
//!    screening and the log-log regression variables.
//! 5. [`estimators`] – the linear (LRE) and quasi-linear Fourier (NRE)
//!    regression estimators, periodogram period estimation, box counting and
//!    design-matrix diagnostics.
//! 6. [`lab`] – Monte Carlo checks of the estimators on synthetic regressions.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod distance;
pub mod error;
pub mod estimators;
pub mod ifs;
pub mod image;
pub mod lab;
pub mod minkowski;
pub mod series;

pub use distance::{dilate, distance_transform, DistanceMap};
pub use error::{Error, Result};
pub use ifs::{ArithmeticityClass, IfsSystem, Similarity};
pub use image::BinaryImage;
pub use minkowski::{intrinsic_volumes, IntrinsicVolumes};
pub use series::{CurvatureSeries, RadiiSchedule, RegressionData};

/// Ambient dimension of every set handled by this crate.
pub const AMBIENT_DIM: usize = 2;
