//! Numerical laboratory for cut loci, focal points and injectivity radii of points and closed
//! curves on compact Riemannian surfaces, together with the stability sweeps that probe how
//! these objects move under perturbations of the metric and of the embedding.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cut;
pub mod distance;
pub mod error;
pub mod export;
pub mod geodesics;
pub mod geometry;
pub mod numeric;
pub mod spatial;
pub mod stability;
pub mod submanifold;

pub use error::{Error, Result};
pub use geodesics::{exp_map, integrate_geodesic, integrate_with_jacobi, normal_exp, GeodesicPath, Sample, Termination};
pub use geometry::{aux_distance, AuxSpace, Backend, MetricField, ScalarField, Surface, Vec3};
pub use submanifold::{Curve, NormalFrame, Shape, Side, SubmanifoldSpec};
pub use distance::{build_atlas, distance, DistanceEstimate, WavefrontAtlas};
pub use stability::{hausdorff, PointCloud};
