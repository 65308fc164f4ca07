use crate::error::{Error, Result};
use crate::fields::Grid;
use crate::Real;

/// Real samples of a scalar quantity at every grid node.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField<T> {
    pub grid: Grid<T>,
    pub values: Vec<T>,
}

/// Three scalar components sharing one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField<T> {
    pub grid: Grid<T>,
    pub comps: [Vec<T>; 3],
}

/// Nine components `comps[j][k]`; for a gradient this is `∂_j f^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorField<T> {
    pub grid: Grid<T>,
    pub comps: [[Vec<T>; 3]; 3],
}

fn check_finite<T: Real>(what: &str, values: &[T]) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what.to_string()))
    }
}

impl<T: Real> ScalarField<T> {
    pub fn zeros(grid: Grid<T>) -> Self {
        Self { grid, values: vec![T::zero(); grid.len()] }
    }

    pub fn constant(grid: Grid<T>, c: T) -> Self {
        Self { grid, values: vec![c; grid.len()] }
    }

    pub fn from_values(grid: Grid<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        Ok(Self { grid, values })
    }

    /// Samples `f(x, y, z)` at the grid nodes.
    pub fn from_fn(grid: Grid<T>, f: impl Fn([T; 3]) -> T) -> Self {
        let values = (0..grid.len())
            .map(|idx| {
                let [x, y, z] = grid.coords(idx);
                f(grid.position(x, y, z))
            })
            .collect();
        Self { grid, values }
    }

    pub fn validate(&self) -> Result<()> {
        check_finite("scalar field", &self.values)
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, s: T) -> Self {
        Self { grid: self.grid, values: self.values.iter().map(|&v| v * s).collect() }
    }
}

impl<T: Real> VectorField<T> {
    pub fn zeros(grid: Grid<T>) -> Self {
        let z = vec![T::zero(); grid.len()];
        Self { grid, comps: [z.clone(), z.clone(), z] }
    }

    pub fn constant(grid: Grid<T>, v: [T; 3]) -> Self {
        Self { grid, comps: v.map(|c| vec![c; grid.len()]) }
    }

    pub fn from_components(grid: Grid<T>, comps: [Vec<T>; 3]) -> Result<Self> {
        if comps.iter().any(|c| c.len() != grid.len()) {
            return Err(Error::GridMismatch);
        }
        Ok(Self { grid, comps })
    }

    pub fn from_fn(grid: Grid<T>, f: impl Fn([T; 3]) -> [T; 3]) -> Self {
        let mut out = Self::zeros(grid);
        for idx in 0..grid.len() {
            let [x, y, z] = grid.coords(idx);
            let v = f(grid.position(x, y, z));
            for c in 0..3 {
                out.comps[c][idx] = v[c];
            }
        }
        out
    }

    #[inline]
    pub fn at(&self, idx: usize) -> [T; 3] {
        [self.comps[0][idx], self.comps[1][idx], self.comps[2][idx]]
    }

    #[inline]
    pub fn set(&mut self, idx: usize, v: [T; 3]) {
        for c in 0..3 {
            self.comps[c][idx] = v[c];
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.comps.iter().try_for_each(|c| check_finite("vector field", c))
    }

    pub fn component(&self, c: usize) -> ScalarField<T> {
        ScalarField { grid: self.grid, values: self.comps[c].clone() }
    }

    /// Pointwise Euclidean magnitude.
    pub fn magnitude(&self) -> ScalarField<T> {
        let values = (0..self.grid.len())
            .map(|i| {
                let v = self.at(i);
                (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
            })
            .collect();
        ScalarField { grid: self.grid, values }
    }

    pub fn max_magnitude(&self) -> T {
        self.magnitude().max_abs()
    }

    pub fn scaled(&self, s: T) -> Self {
        Self { grid: self.grid, comps: self.comps.clone().map(|c| c.into_iter().map(|v| v * s).collect()) }
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        let mut m = T::zero();
        for c in 0..3 {
            for (a, b) in self.comps[c].iter().zip(&other.comps[c]) {
                m = m.max((*a - *b).abs());
            }
        }
        m
    }

    /// Pointwise `v / |v|`. Fails if any node is shorter than `min_norm`,
    /// returning the smallest length seen.
    pub fn normalized(&self, min_norm: T) -> std::result::Result<Self, T> {
        let mut out = self.clone();
        let mut smallest = T::infinity();
        for idx in 0..self.grid.len() {
            let v = self.at(idx);
            let len = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            smallest = smallest.min(len);
            out.set(idx, v.map(|x| x / len));
        }
        if smallest.is_nan() || smallest < min_norm {
            Err(smallest)
        } else {
            Ok(out)
        }
    }

    /// `max | |v| − 1 |` over nodes.
    pub fn unit_error(&self) -> T {
        (0..self.grid.len()).fold(T::zero(), |m, idx| {
            let v = self.at(idx);
            m.max(((v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt() - T::one()).abs())
        })
    }
}

impl<T: Real> TensorField<T> {
    pub fn zeros(grid: Grid<T>) -> Self {
        let z = vec![T::zero(); grid.len()];
        let row = [z.clone(), z.clone(), z];
        Self { grid, comps: [row.clone(), row.clone(), row] }
    }

    #[inline]
    pub fn at(&self, idx: usize) -> [[T; 3]; 3] {
        std::array::from_fn(|j| std::array::from_fn(|k| self.comps[j][k][idx]))
    }

    pub fn validate(&self) -> Result<()> {
        self.comps.iter().flatten().try_for_each(|c| check_finite("tensor field", c))
    }

    /// Pointwise Frobenius norm.
    pub fn magnitude(&self) -> ScalarField<T> {
        let values = (0..self.grid.len())
            .map(|i| {
                self.comps
                    .iter()
                    .flatten()
                    .fold(T::zero(), |acc, c| acc + c[i] * c[i])
                    .sqrt()
            })
            .collect();
        ScalarField { grid: self.grid, values }
    }
}
