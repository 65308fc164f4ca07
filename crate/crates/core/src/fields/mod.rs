//! Periodic grid, fields, spectral operators and norms.

mod field;
mod grid;
pub mod io;
mod norms;
mod spectral;

pub use field::{ScalarField, TensorField, VectorField};
pub use grid::Grid;
pub use norms::{holder_ratio, integrate, lp_norm, lp_norm_of_sq, magnitude_sq, FieldData};
pub use spectral::{resample, resample_scalar, resample_values, Coeffs, Spectral, SpectralField};

#[cfg(test)]
mod tests;
