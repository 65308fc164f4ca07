use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Real;

/// Uniform periodic grid on `[0, L)³` with `n` nodes per axis.
///
/// Node `(ix, iy, iz)` is stored at `ix + n * (iy + n * iz)` (x fastest).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid<T> {
    n: usize,
    box_length: T,
}

impl<T: Real> Grid<T> {
    pub fn new(n: usize, box_length: T) -> Result<Self> {
        if n < 8 || !n.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!("n = {n} must be even and at least 8")));
        }
        if !(box_length.is_finite() && box_length > T::zero()) {
            return Err(Error::InvalidGrid(format!("box length {box_length} must be positive")));
        }
        Ok(Self { n, box_length })
    }

    /// `n` nodes on a box of length 2π, so wavenumbers are integers.
    pub fn periodic_2pi(n: usize) -> Result<Self> {
        Self::new(n, T::TAU())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn box_length(&self) -> T {
        self.box_length
    }

    pub fn spacing(&self) -> T {
        self.box_length / T::count(self.n)
    }

    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn volume(&self) -> T {
        self.box_length * self.box_length * self.box_length
    }

    /// Quadrature weight of a single node.
    pub fn cell_volume(&self) -> T {
        let h = self.spacing();
        h * h * h
    }

    #[inline]
    pub fn index(&self, ix: usize, iy: usize, iz: usize) -> usize {
        ix + self.n * (iy + self.n * iz)
    }

    /// Inverse of [`Grid::index`].
    #[inline]
    pub fn coords(&self, idx: usize) -> [usize; 3] {
        let n = self.n;
        [idx % n, (idx / n) % n, idx / (n * n)]
    }

    /// Physical position of node `(ix, iy, iz)`.
    pub fn position(&self, ix: usize, iy: usize, iz: usize) -> [T; 3] {
        let h = self.spacing();
        [T::count(ix) * h, T::count(iy) * h, T::count(iz) * h]
    }

    /// Signed mode number of FFT slot `i`; the Nyquist slot maps to `-n/2`.
    #[inline]
    pub fn mode(&self, i: usize) -> i64 {
        let n = self.n as i64;
        let i = i as i64;
        if i < n / 2 {
            i
        } else {
            i - n
        }
    }

    /// Slot of signed mode `m` (taken modulo `n`).
    #[inline]
    pub fn slot(&self, m: i64) -> usize {
        m.rem_euclid(self.n as i64) as usize
    }

    pub fn fundamental_wavenumber(&self) -> T {
        T::TAU() / self.box_length
    }

    pub fn same_as(&self, other: &Self) -> bool {
        self == other
    }
}
