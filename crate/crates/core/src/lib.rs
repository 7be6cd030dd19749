//! Weighted Bergman, spectral and heat kernels for scaled line bundles.
//!
//! The crate is generic over the scalar type; `f64` aliases live at the root.

pub mod config;
pub mod error;
pub mod form;
pub mod galerkin;
pub mod model_kernel;
pub mod quadrature;
pub mod report;
pub mod scalar;
pub mod scaling;
pub mod torus;
pub mod weight;

pub use error::{Error, Result};
pub use nalgebra::Complex;
pub use scalar::Real;

pub type C64 = Complex<f64>;
pub type ModelSpectrum = model_kernel::ModelSpectrum<f64>;
pub type FormKernelValue = form::FormKernelValue<f64>;
pub type WeightPolynomial = weight::WeightPolynomial<f64>;
pub type WeightFamily = weight::WeightFamily<f64>;
pub type ExtendedWeight = weight::ExtendedWeight<f64>;
pub type GalerkinSystem = galerkin::GalerkinSystem<f64>;
pub type TorusBundle = torus::TorusBundle<f64>;
