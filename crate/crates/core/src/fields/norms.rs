//! Equal-weight quadrature and Lebesgue norms over the box.

use crate::error::{Error, Result};
use crate::fields::{Grid, ScalarField, TensorField, VectorField};
use crate::Real;

/// Read access to the components of any field rank.
pub trait FieldData<T> {
    fn grid(&self) -> &Grid<T>;
    fn components(&self) -> Vec<&[T]>;
}

impl<T> FieldData<T> for ScalarField<T> {
    fn grid(&self) -> &Grid<T> {
        &self.grid
    }
    fn components(&self) -> Vec<&[T]> {
        vec![&self.values]
    }
}

impl<T> FieldData<T> for VectorField<T> {
    fn grid(&self) -> &Grid<T> {
        &self.grid
    }
    fn components(&self) -> Vec<&[T]> {
        self.comps.iter().map(|c| c.as_slice()).collect()
    }
}

impl<T> FieldData<T> for TensorField<T> {
    fn grid(&self) -> &Grid<T> {
        &self.grid
    }
    fn components(&self) -> Vec<&[T]> {
        self.comps.iter().flatten().map(|c| c.as_slice()).collect()
    }
}

/// `∫ f dx` by the equal-weight rule, summed in node order.
pub fn integrate<T: Real>(grid: &Grid<T>, values: &[T]) -> T {
    values.iter().fold(T::zero(), |acc, &v| acc + v) * grid.cell_volume()
}

/// Pointwise squared magnitude (Euclidean / Frobenius).
pub fn magnitude_sq<T: Real, F: FieldData<T> + ?Sized>(f: &F) -> Vec<T> {
    let comps = f.components();
    let len = f.grid().len();
    let mut out = vec![T::zero(); len];
    for c in comps {
        for (o, &v) in out.iter_mut().zip(c) {
            *o += v * v;
        }
    }
    out
}

/// `(∫ |f|^p dx)^(1/p)` with `|f|` the pointwise magnitude.
pub fn lp_norm<T: Real, F: FieldData<T> + ?Sized>(f: &F, p: u32) -> Result<T> {
    if p == 0 {
        return Err(Error::Precondition("Lebesgue exponent must be positive".into()));
    }
    if f.components().iter().any(|c| c.iter().any(|v| !v.is_finite())) {
        return Err(Error::NonFinite("field passed to lp_norm".into()));
    }
    Ok(lp_norm_of_sq(f.grid(), &magnitude_sq(f), p))
}

/// Same as [`lp_norm`] given precomputed squared magnitudes.
pub fn lp_norm_of_sq<T: Real>(grid: &Grid<T>, mag_sq: &[T], p: u32) -> T {
    let pw: Vec<T> = if p.is_multiple_of(2) {
        let half = (p / 2) as i32;
        mag_sq.iter().map(|&s| s.powi(half)).collect()
    } else {
        let e = T::lit(f64::from(p) / 2.0);
        mag_sq.iter().map(|&s| s.powf(e)).collect()
    };
    integrate(grid, &pw).powf(T::one() / T::lit(f64::from(p)))
}

/// `‖f‖₄ / (‖f‖₂^{1/4} ‖f‖₆^{3/4})`, at most one for equal-weight
/// quadrature. Returns 0 for the zero field.
pub fn holder_ratio<T: Real>(grid: &Grid<T>, mag_sq: &[T]) -> T {
    let l2 = lp_norm_of_sq(grid, mag_sq, 2);
    let l4 = lp_norm_of_sq(grid, mag_sq, 4);
    let l6 = lp_norm_of_sq(grid, mag_sq, 6);
    let denom = l2.powf(T::lit(0.25)) * l6.powf(T::lit(0.75));
    if denom > T::zero() {
        l4 / denom
    } else {
        T::zero()
    }
}
