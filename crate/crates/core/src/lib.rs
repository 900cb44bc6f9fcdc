//! Numerical laboratory for the Landau-de Gennes Q-tensor model of nematic
//! liquid-crystal droplets with radial anchoring: the radial-hedgehog profile
//! equation, reduced energies on the ball, gradient-flow relaxation of the
//! full Euler-Lagrange system, and quadrature verification of the associated
//! integral identities.
//!
//! The numerical core is generic over the scalar type via [`scalar::Real`];
//! concrete f64 aliases are exported at the crate root.

pub mod error;
pub mod scalar;

pub mod fmt;
pub mod quad;
pub mod rng;
pub mod tensor;

pub mod energy;
pub mod fields;
pub mod identities;
pub mod material;
pub mod profile;
pub mod relax;

pub use error::{Error, Result};
pub use scalar::Real;

/// Concrete f64 aliases for the main data types.
pub type QTensor64 = tensor::QTensor<f64>;
pub type EigenFrame64 = tensor::EigenFrame<f64>;
pub type MaterialParams64 = material::MaterialParams<f64>;
pub type ReducedParams64 = material::ReducedParams<f64>;
pub type RadialProfile64 = profile::RadialProfile<f64>;
pub type BallField64 = fields::BallField<f64>;
pub type EnergyBreakdown64 = energy::EnergyBreakdown<f64>;
pub type RelaxConfig64 = relax::RelaxConfig<f64>;
pub type BTensor64 = identities::BTensor<f64>;
