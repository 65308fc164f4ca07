use crate::error::{Error, Result};
use crate::fields::{Spectral, VectorField};
use crate::Real;

/// Velocity, director and time at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct State<T> {
    pub u: VectorField<T>,
    pub d: VectorField<T>,
    pub t: T,
}

impl<T: Real> State<T> {
    pub fn new(u: VectorField<T>, d: VectorField<T>, t: T) -> Result<Self> {
        if !u.grid.same_as(&d.grid) {
            return Err(Error::GridMismatch);
        }
        Ok(Self { u, d, t })
    }

    /// `max | |d| − 1 |`.
    pub fn unit_error(&self) -> T {
        self.d.unit_error()
    }

    /// `max |div u| / (1 + ‖u‖₂)`.
    pub fn divergence_error(&self, spectral: &Spectral<T>) -> Result<T> {
        let div = spectral.divergence(&self.u)?;
        let l2 = crate::fields::lp_norm(&self.u, 2)?;
        Ok(div.max_abs() / (T::one() + l2))
    }

    /// Checks finiteness, unit length and incompressibility.
    pub fn validate(&self, spectral: &Spectral<T>, unit_tol: T, div_tol: T) -> Result<()> {
        self.u.validate()?;
        self.d.validate()?;
        let ue = self.unit_error();
        if ue > unit_tol {
            return Err(Error::Precondition(format!("director length error {ue:e} exceeds {unit_tol:e}")));
        }
        let de = self.divergence_error(spectral)?;
        if de > div_tol {
            return Err(Error::Precondition(format!("velocity divergence {de:e} exceeds {div_tol:e}")));
        }
        Ok(())
    }
}
