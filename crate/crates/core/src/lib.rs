//! Pseudo-spectral solver for the incompressible Ericksen–Leslie
//! liquid-crystal system with Oseen–Frank elasticity on a periodic box,
//! together with the energy diagnostics that monitor it.
//!
//! All kernels are generic over [`Real`] (`f32` or `f64`); the `*64`
//! aliases below name the double-precision instantiations used by the CLI.

pub mod diagnostics;
pub mod dynamics;
mod error;
pub mod fields;
pub mod frank;
pub mod init;
mod scalar;

pub use error::{Error, Result};
pub use scalar::Real;

pub use diagnostics::{DiagnosticsRecord, Ledger, RunSummary};
pub use dynamics::{DtPolicy, SolverConfig, State};
pub use fields::{Grid, ScalarField, Spectral, TensorField, VectorField};
pub use frank::{FrankConstants, PointState};

pub type Grid64 = Grid<f64>;
pub type ScalarField64 = ScalarField<f64>;
pub type VectorField64 = VectorField<f64>;
pub type TensorField64 = TensorField<f64>;
pub type Spectral64 = Spectral<f64>;
pub type FrankConstants64 = FrankConstants<f64>;
pub type State64 = State<f64>;
pub type SolverConfig64 = SolverConfig<f64>;
pub type DiagnosticsRecord64 = DiagnosticsRecord<f64>;
pub type Ledger64 = Ledger<f64>;

pub type Grid32 = Grid<f32>;
pub type VectorField32 = VectorField<f32>;
pub type State32 = State<f32>;
