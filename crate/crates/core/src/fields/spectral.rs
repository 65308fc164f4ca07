//! FFT-backed differential operators on the periodic grid.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::fields::{Grid, ScalarField, TensorField, VectorField};
use crate::Real;

pub type Coeffs<T> = Vec<Complex<T>>;

/// Fourier coefficients of a real field (unnormalized forward transform).
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField<T> {
    pub grid: Grid<T>,
    pub coeffs: Coeffs<T>,
}

impl<T: Real> SpectralField<T> {
    /// Largest `|c(k) − conj(c(−k))|` over all modes.
    pub fn hermitian_defect(&self) -> T {
        let neg = negation_table(&self.grid);
        self.coeffs
            .iter()
            .zip(&neg)
            .fold(T::zero(), |m, (c, &j)| m.max((*c - self.coeffs[j].conj()).norm()))
    }
}

fn negation_table<T: Real>(grid: &Grid<T>) -> Vec<usize> {
    let n = grid.n();
    (0..grid.len())
        .map(|idx| {
            let [x, y, z] = grid.coords(idx);
            grid.index((n - x) % n, (n - y) % n, (n - z) % n)
        })
        .collect()
}

/// Transform plans plus precomputed wavenumber tables for one grid.
///
/// Derivatives use the wavenumber with the Nyquist slot zeroed, so every
/// operator maps real fields to real fields and `div ∘ grad` equals the
/// spectral Laplacian exactly. The implicit diffusion solves use the full
/// `|k|²` including the Nyquist slot.
pub struct Spectral<T: Real> {
    grid: Grid<T>,
    fwd: Arc<dyn Fft<T>>,
    inv: Arc<dyn Fft<T>>,
    kvec: [Vec<T>; 3],
    ksq: Vec<T>,
    ksq_full: Vec<T>,
    keep: Vec<bool>,
}

impl<T: Real> std::fmt::Debug for Spectral<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Spectral").field("grid", &self.grid).finish()
    }
}

impl<T: Real> Spectral<T> {
    pub fn new(grid: Grid<T>) -> Self {
        let n = grid.n();
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let k0 = grid.fundamental_wavenumber();
        let half = (n / 2) as i64;
        let deriv_1d: Vec<T> = (0..n)
            .map(|i| {
                let m = grid.mode(i);
                if m == -half {
                    T::zero()
                } else {
                    T::lit(m as f64) * k0
                }
            })
            .collect();
        let full_1d: Vec<T> = (0..n).map(|i| T::lit(grid.mode(i) as f64) * k0).collect();
        let keep_1d: Vec<bool> = (0..n).map(|i| 3 * grid.mode(i).unsigned_abs() as usize <= n).collect();

        let len = grid.len();
        let mut kvec = [vec![T::zero(); len], vec![T::zero(); len], vec![T::zero(); len]];
        let mut ksq = vec![T::zero(); len];
        let mut ksq_full = vec![T::zero(); len];
        let mut keep = vec![false; len];
        for idx in 0..len {
            let c = grid.coords(idx);
            for a in 0..3 {
                kvec[a][idx] = deriv_1d[c[a]];
            }
            ksq[idx] = c.iter().fold(T::zero(), |s, &i| s + deriv_1d[i] * deriv_1d[i]);
            ksq_full[idx] = c.iter().fold(T::zero(), |s, &i| s + full_1d[i] * full_1d[i]);
            keep[idx] = c.iter().all(|&i| keep_1d[i]);
        }
        Self { grid, fwd, inv, kvec, ksq, ksq_full, keep }
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    /// Derivative wavenumber along `axis` for every coefficient slot.
    pub fn wavenumbers(&self, axis: usize) -> &[T] {
        &self.kvec[axis]
    }

    /// `|k|²` used by the derivative operators.
    pub fn k_squared(&self) -> &[T] {
        &self.ksq
    }

    /// `|k|²` including the Nyquist slot, for implicit diffusion solves.
    pub fn k_squared_full(&self) -> &[T] {
        &self.ksq_full
    }

    fn check_grid(&self, g: &Grid<T>) -> Result<()> {
        if self.grid.same_as(g) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// In-place 3D transform: contiguous x lines first, then y and z lines
    /// through per-plane transposes that stay in cache.
    fn fft3(&self, data: &mut [Complex<T>], plan: &Arc<dyn Fft<T>>) {
        let n = self.grid.n();
        let nn = n * n;
        let zero = Complex::new(T::zero(), T::zero());
        let mut scratch = vec![zero; plan.get_inplace_scratch_len()];
        plan.process_with_scratch(data, &mut scratch);

        let mut buf = vec![zero; nn];
        // y lines: plane z fixed, transpose (y, x) -> (x, y)
        for plane in data.chunks_exact_mut(nn) {
            for iy in 0..n {
                for ix in 0..n {
                    buf[ix * n + iy] = plane[iy * n + ix];
                }
            }
            plan.process_with_scratch(&mut buf, &mut scratch);
            for ix in 0..n {
                for iy in 0..n {
                    plane[iy * n + ix] = buf[ix * n + iy];
                }
            }
        }
        // z lines: plane y fixed, gather (z, x) -> (x, z)
        for iy in 0..n {
            for iz in 0..n {
                let row = n * (iy + n * iz);
                for ix in 0..n {
                    buf[ix * n + iz] = data[row + ix];
                }
            }
            plan.process_with_scratch(&mut buf, &mut scratch);
            for iz in 0..n {
                let row = n * (iy + n * iz);
                for ix in 0..n {
                    data[row + ix] = buf[ix * n + iz];
                }
            }
        }
    }

    pub fn forward(&self, values: &[T]) -> Coeffs<T> {
        let mut data: Coeffs<T> = values.iter().map(|&v| Complex::new(v, T::zero())).collect();
        self.fft3(&mut data, &self.fwd);
        data
    }

    pub fn inverse(&self, coeffs: &[Complex<T>]) -> Vec<T> {
        let mut data = coeffs.to_vec();
        self.fft3(&mut data, &self.inv);
        let scale = T::one() / T::count(self.grid.len());
        data.iter().map(|c| c.re * scale).collect()
    }

    /// Forward transform of two real arrays with one complex FFT.
    pub fn forward_pair(&self, a: &[T], b: &[T]) -> (Coeffs<T>, Coeffs<T>) {
        let mut z: Coeffs<T> = a.iter().zip(b).map(|(&x, &y)| Complex::new(x, y)).collect();
        self.fft3(&mut z, &self.fwd);
        let half = T::lit(0.5);
        let zero = Complex::new(T::zero(), T::zero());
        let mut fa = vec![zero; z.len()];
        let mut fb = vec![zero; z.len()];
        let n = self.grid.n();
        for iz in 0..n {
            for iy in 0..n {
                let row = n * (iy + n * iz);
                let mrow = n * ((n - iy) % n + n * ((n - iz) % n));
                for ix in 0..n {
                    let zk = z[row + ix];
                    let zm = z[mrow + (n - ix) % n].conj();
                    fa[row + ix] = (zk + zm) * half;
                    // (z − conj z(−k)) / 2i
                    let d = (zk - zm) * half;
                    fb[row + ix] = Complex::new(d.im, -d.re);
                }
            }
        }
        (fa, fb)
    }

    /// Inverse transform of two Hermitian spectra with one complex FFT.
    pub fn inverse_pair(&self, a: &[Complex<T>], b: &[Complex<T>]) -> (Vec<T>, Vec<T>) {
        let mut z: Coeffs<T> = a.iter().zip(b).map(|(x, y)| x + Complex::new(-y.im, y.re)).collect();
        self.fft3(&mut z, &self.inv);
        let scale = T::one() / T::count(self.grid.len());
        let re = z.iter().map(|c| c.re * scale).collect();
        let im = z.iter().map(|c| c.im * scale).collect();
        (re, im)
    }

    /// Forward transforms of any number of real arrays, paired internally.
    pub fn forward_many(&self, arrays: &[&[T]]) -> Vec<Coeffs<T>> {
        let mut out = Vec::with_capacity(arrays.len());
        for chunk in arrays.chunks(2) {
            match chunk {
                [a, b] => {
                    let (fa, fb) = self.forward_pair(a, b);
                    out.push(fa);
                    out.push(fb);
                }
                [a] => out.push(self.forward(a)),
                _ => unreachable!(),
            }
        }
        out
    }

    /// Inverse transforms of any number of Hermitian spectra, paired internally.
    pub fn inverse_many(&self, spectra: &[&[Complex<T>]]) -> Vec<Vec<T>> {
        let mut out = Vec::with_capacity(spectra.len());
        for chunk in spectra.chunks(2) {
            match chunk {
                [a, b] => {
                    let (ra, rb) = self.inverse_pair(a, b);
                    out.push(ra);
                    out.push(rb);
                }
                [a] => out.push(self.inverse(a)),
                _ => unreachable!(),
            }
        }
        out
    }

    pub fn forward_vector(&self, v: &VectorField<T>) -> [Coeffs<T>; 3] {
        let mut it = self.forward_many(&[&v.comps[0], &v.comps[1], &v.comps[2]]).into_iter();
        std::array::from_fn(|_| it.next().unwrap())
    }

    pub fn inverse_vector(&self, c: &[Coeffs<T>; 3]) -> VectorField<T> {
        let mut it = self.inverse_many(&[&c[0], &c[1], &c[2]]).into_iter();
        VectorField { grid: self.grid, comps: std::array::from_fn(|_| it.next().unwrap()) }
    }

    pub fn to_spectral(&self, f: &ScalarField<T>) -> Result<SpectralField<T>> {
        self.check_grid(&f.grid)?;
        f.validate()?;
        Ok(SpectralField { grid: self.grid, coeffs: self.forward(&f.values) })
    }

    pub fn to_physical(&self, s: &SpectralField<T>) -> Result<ScalarField<T>> {
        self.check_grid(&s.grid)?;
        Ok(ScalarField { grid: self.grid, values: self.inverse(&s.coeffs) })
    }

    /// `i k_axis ĉ`.
    pub fn derivative_coeffs(&self, c: &[Complex<T>], axis: usize) -> Coeffs<T> {
        c.iter()
            .zip(&self.kvec[axis])
            .map(|(z, &k)| Complex::new(-z.im * k, z.re * k))
            .collect()
    }

    /// Spectral gradient of spectral data: `out[j][k] = ∂_j f^k`.
    pub fn gradient_coeffs(&self, c: &[Coeffs<T>; 3]) -> [[Coeffs<T>; 3]; 3] {
        std::array::from_fn(|j| std::array::from_fn(|k| self.derivative_coeffs(&c[k], j)))
    }

    /// Physical-space tensor from nine spectra.
    pub fn inverse_tensor(&self, c: &[[Coeffs<T>; 3]; 3]) -> TensorField<T> {
        let refs: Vec<&[Complex<T>]> = c.iter().flatten().map(|v| v.as_slice()).collect();
        let mut it = self.inverse_many(&refs).into_iter();
        TensorField {
            grid: self.grid,
            comps: std::array::from_fn(|_| std::array::from_fn(|_| it.next().unwrap())),
        }
    }

    pub fn gradient_scalar(&self, f: &ScalarField<T>) -> Result<VectorField<T>> {
        self.check_grid(&f.grid)?;
        f.validate()?;
        let c = self.forward(&f.values);
        let d: [Coeffs<T>; 3] = std::array::from_fn(|a| self.derivative_coeffs(&c, a));
        Ok(self.inverse_vector(&d))
    }

    /// `∇v` with `out.comps[j][k] = ∂_j v^k`.
    pub fn gradient(&self, v: &VectorField<T>) -> Result<TensorField<T>> {
        self.check_grid(&v.grid)?;
        v.validate()?;
        let c = self.forward_vector(v);
        Ok(self.inverse_tensor(&self.gradient_coeffs(&c)))
    }

    pub fn divergence_coeffs(&self, c: &[Coeffs<T>; 3]) -> Coeffs<T> {
        let zero = Complex::new(T::zero(), T::zero());
        let mut out = vec![zero; self.grid.len()];
        for (a, comp) in c.iter().enumerate() {
            for ((o, z), &k) in out.iter_mut().zip(comp).zip(&self.kvec[a]) {
                *o += Complex::new(-z.im * k, z.re * k);
            }
        }
        out
    }

    pub fn divergence(&self, v: &VectorField<T>) -> Result<ScalarField<T>> {
        self.check_grid(&v.grid)?;
        v.validate()?;
        let c = self.forward_vector(v);
        Ok(ScalarField { grid: self.grid, values: self.inverse(&self.divergence_coeffs(&c)) })
    }

    pub fn curl_coeffs(&self, c: &[Coeffs<T>; 3]) -> [Coeffs<T>; 3] {
        // (curl v)_i = ∂_j v^k − ∂_k v^j for cyclic (i, j, k)
        std::array::from_fn(|i| {
            let j = (i + 1) % 3;
            let k = (i + 2) % 3;
            let a = self.derivative_coeffs(&c[k], j);
            let b = self.derivative_coeffs(&c[j], k);
            a.into_iter().zip(b).map(|(x, y)| x - y).collect()
        })
    }

    pub fn curl(&self, v: &VectorField<T>) -> Result<VectorField<T>> {
        self.check_grid(&v.grid)?;
        v.validate()?;
        let c = self.forward_vector(v);
        Ok(self.inverse_vector(&self.curl_coeffs(&c)))
    }

    pub fn laplacian_coeffs(&self, c: &[Complex<T>]) -> Coeffs<T> {
        c.iter().zip(&self.ksq).map(|(z, &k2)| *z * (-k2)).collect()
    }

    pub fn laplacian_scalar(&self, f: &ScalarField<T>) -> Result<ScalarField<T>> {
        self.check_grid(&f.grid)?;
        f.validate()?;
        let c = self.forward(&f.values);
        Ok(ScalarField { grid: self.grid, values: self.inverse(&self.laplacian_coeffs(&c)) })
    }

    pub fn laplacian(&self, v: &VectorField<T>) -> Result<VectorField<T>> {
        self.check_grid(&v.grid)?;
        v.validate()?;
        let c = self.forward_vector(v);
        let l: [Coeffs<T>; 3] = std::array::from_fn(|a| self.laplacian_coeffs(&c[a]));
        Ok(self.inverse_vector(&l))
    }

    /// Removes the gradient part of a spectral vector field in place.
    pub fn project_coeffs(&self, c: &mut [Coeffs<T>; 3]) {
        for idx in 0..self.grid.len() {
            let k2 = self.ksq[idx];
            if k2 == T::zero() {
                continue;
            }
            let k = [self.kvec[0][idx], self.kvec[1][idx], self.kvec[2][idx]];
            let kdotv = c[0][idx] * k[0] + c[1][idx] * k[1] + c[2][idx] * k[2];
            let s = kdotv / k2;
            for a in 0..3 {
                c[a][idx] -= s * k[a];
            }
        }
    }

    /// Leray projection onto divergence-free fields; keeps the mean.
    pub fn leray_project(&self, v: &VectorField<T>) -> Result<VectorField<T>> {
        self.check_grid(&v.grid)?;
        v.validate()?;
        let mut c = self.forward_vector(v);
        self.project_coeffs(&mut c);
        Ok(self.inverse_vector(&c))
    }

    /// Zeroes every slot with some `|k_i| > n/3`.
    pub fn mask_in_place(&self, c: &mut [Complex<T>]) {
        let zero = Complex::new(T::zero(), T::zero());
        for (z, &keep) in c.iter_mut().zip(&self.keep) {
            if !keep {
                *z = zero;
            }
        }
    }

    pub fn dealias(&self, s: &SpectralField<T>) -> Result<SpectralField<T>> {
        self.check_grid(&s.grid)?;
        let mut out = s.clone();
        self.mask_in_place(&mut out.coeffs);
        Ok(out)
    }

    /// `Σ_k |k|^(2 order) |ĉ_k|²` in physical normalization (equals the
    /// equal-weight quadrature of the squared derivative tensor).
    pub fn weighted_power(&self, c: &[Complex<T>], order: u32) -> T {
        let mut acc = T::zero();
        for (z, &k2) in c.iter().zip(&self.ksq) {
            acc += k2.powi(order as i32) * z.norm_sqr();
        }
        let n3 = T::count(self.grid.len());
        acc * self.grid.cell_volume() / n3
    }

    /// L² norm of the order-`order` derivative tensor of a vector field.
    pub fn h_seminorm(&self, v: &VectorField<T>, order: u32) -> Result<T> {
        self.check_grid(&v.grid)?;
        v.validate()?;
        let c = self.forward_vector(v);
        Ok(c.iter().map(|comp| self.weighted_power(comp, order)).sum::<T>().sqrt())
    }

    pub fn h_seminorm_scalar(&self, f: &ScalarField<T>, order: u32) -> Result<T> {
        self.check_grid(&f.grid)?;
        f.validate()?;
        Ok(self.weighted_power(&self.forward(&f.values), order).sqrt())
    }
}

/// Per-axis source slots (with weights) for each target slot when moving
/// between grids of `n_old` and `n_new` points.
fn axis_map(n_old: usize, n_new: usize) -> Vec<Vec<(usize, f64)>> {
    let old_half = (n_old / 2) as i64;
    let new_half = (n_new / 2) as i64;
    (0..n_new)
        .map(|t| {
            let m = if (t as i64) < new_half { t as i64 } else { t as i64 - n_new as i64 };
            let slot = |mm: i64| mm.rem_euclid(n_old as i64) as usize;
            if n_new > n_old {
                if m.abs() < old_half {
                    vec![(slot(m), 1.0)]
                } else if m.abs() == old_half {
                    // split the old Nyquist coefficient between ±n_old/2
                    vec![(slot(old_half), 0.5)]
                } else {
                    vec![]
                }
            } else if m.abs() < new_half {
                vec![(slot(m), 1.0)]
            } else {
                // new Nyquist collects both ±n_new/2
                vec![(slot(new_half), 1.0), (slot(-new_half), 1.0)]
            }
        })
        .collect()
}

/// Spectral interpolation (`n_new > n`) or truncation (`n_new < n`) of grid
/// samples. Shared modes are copied exactly; the box length is unchanged.
pub fn resample_values<T: Real>(grid: &Grid<T>, values: &[T], n_new: usize) -> Result<(Grid<T>, Vec<T>)> {
    let new_grid = Grid::new(n_new, grid.box_length())?;
    if n_new == grid.n() {
        return Ok((new_grid, values.to_vec()));
    }
    let src = Spectral::new(*grid);
    let dst = Spectral::new(new_grid);
    let c = src.forward(values);
    let map = axis_map(grid.n(), n_new);
    let ratio = T::count(new_grid.len()) / T::count(grid.len());
    let zero = Complex::new(T::zero(), T::zero());
    let mut out = vec![zero; new_grid.len()];
    for iz in 0..n_new {
        for iy in 0..n_new {
            for ix in 0..n_new {
                let mut acc = zero;
                for &(sz, wz) in &map[iz] {
                    for &(sy, wy) in &map[iy] {
                        for &(sx, wx) in &map[ix] {
                            acc += c[grid.index(sx, sy, sz)] * T::lit(wx * wy * wz);
                        }
                    }
                }
                out[new_grid.index(ix, iy, iz)] = acc * ratio;
            }
        }
    }
    Ok((new_grid, dst.inverse(&out)))
}

pub fn resample_scalar<T: Real>(f: &ScalarField<T>, n_new: usize) -> Result<ScalarField<T>> {
    f.validate()?;
    let (grid, values) = resample_values(&f.grid, &f.values, n_new)?;
    Ok(ScalarField { grid, values })
}

pub fn resample<T: Real>(v: &VectorField<T>, n_new: usize) -> Result<VectorField<T>> {
    v.validate()?;
    let mut grid = v.grid;
    let mut comps: [Vec<T>; 3] = Default::default();
    for c in 0..3 {
        let (g, vals) = resample_values(&v.grid, &v.comps[c], n_new)?;
        grid = g;
        comps[c] = vals;
    }
    Ok(VectorField { grid, comps })
}
