//! Rotationally invariant surfaces of constant Gauss curvature in Berger spheres.
//!
//! Everything is generic over the scalar type. Closed-form pieces work in any
//! [`Scalar`] (including exact rationals); anything needing roots, trig or
//! integration works in any [`Real`].

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(a <= b)` is deliberate: NaN must fail

pub mod geometry;
pub mod mesh;
pub mod ode;
pub mod phase;
pub mod profile;
pub mod quadrature;
pub mod scalar;
pub mod sphere;

pub use scalar::{Real, Scalar};

/// Double-double scalar (about 32 significant digits).
pub type DoubleDouble = twofloat::TwoFloat;

pub type Params64 = geometry::BergerParams<f64>;
pub type ParamsExact = geometry::BergerParams<num_rational::Ratio<i64>>;
pub type ParamsDD = geometry::BergerParams<DoubleDouble>;
pub type PhasePoint64 = phase::PhasePoint<f64>;
pub type ProfileState64 = profile::ProfileState<f64>;
pub type Trajectory64 = profile::Trajectory<f64>;
pub type SphereSolution64 = sphere::SphereSolution<f64>;
pub type SurfaceMesh64 = mesh::SurfaceMesh<f64>;
