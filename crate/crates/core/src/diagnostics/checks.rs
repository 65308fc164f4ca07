//! Pointwise identities for unit director fields.

use crate::error::{Error, Result};
use crate::fields::{integrate, magnitude_sq, lp_norm_of_sq, Spectral, VectorField};
use crate::frank::{energy_density, FrankConstants, PointState};
use crate::Real;

const UNIT_PRECONDITION: f64 = 1e-8;

fn require_unit<T: Real>(d: &VectorField<T>) -> Result<()> {
    d.validate()?;
    let err = d.unit_error();
    if err > T::lit(UNIT_PRECONDITION) {
        return Err(Error::Precondition(format!("director is not unit length (max deviation {err:e})")));
    }
    Ok(())
}

/// `‖ |∇d|² + d·Δd ‖₂ / ‖ |∇d|² ‖₂`, which vanishes for unit fields.
/// Returns 0 when `∇d ≡ 0`.
pub fn unit_identity_check<T: Real>(spectral: &Spectral<T>, d: &VectorField<T>) -> Result<T> {
    require_unit(d)?;
    let grad = spectral.gradient(d)?;
    let lap = spectral.laplacian(d)?;
    let grid = *spectral.grid();
    let g_sq = magnitude_sq(&grad);
    let defect: Vec<T> = (0..grid.len())
        .map(|i| {
            let dv = d.at(i);
            let lv = lap.at(i);
            let v = g_sq[i] + dv[0] * lv[0] + dv[1] * lv[1] + dv[2] * lv[2];
            v * v
        })
        .collect();
    let base_sq: Vec<T> = g_sq.iter().map(|v| *v * *v).collect();
    let num = lp_norm_of_sq(&grid, &defect, 2);
    let den = lp_norm_of_sq(&grid, &base_sq, 2);
    Ok(if den > T::zero() { num / den } else { T::zero() })
}

/// `|∫W_k(d, ∇d) − k‖∇d‖₂²| / (k‖∇d‖₂²)` for equal moduli `k`.
/// Returns 0 when `∇d ≡ 0`.
pub fn one_constant_reduction_check<T: Real>(spectral: &Spectral<T>, d: &VectorField<T>, k: T) -> Result<T> {
    require_unit(d)?;
    let c = FrankConstants::isotropic(k)?;
    let grad = spectral.gradient(d)?;
    let grid = *spectral.grid();
    let w: Vec<T> = (0..grid.len()).map(|i| energy_density(&PointState::new(d.at(i), grad.at(i)), &c)).collect();
    let elastic = integrate(&grid, &w);
    let dirichlet = k * integrate(&grid, &magnitude_sq(&grad));
    Ok(if dirichlet > T::zero() { (elastic - dirichlet).abs() / dirichlet } else { T::zero() })
}
