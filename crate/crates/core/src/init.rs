//! Initial data recipes and the rescaling check for the smallness quantity.
//!
//! Random perturbations are drawn from `ChaCha8Rng` seeded with a `u64`,
//! which produces the same stream on every platform.

use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::dynamics::State;
use crate::error::{Error, Result};
use crate::fields::{resample, Grid, Spectral, VectorField};
use crate::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitKind {
    /// `u = 0`, `d = d*`.
    Equilibrium,
    /// Taylor–Green velocity, uniform director.
    TaylorGreen,
    /// Zero velocity, randomly perturbed director.
    DirectorPerturb,
    /// Taylor–Green velocity and perturbed director.
    Mixed,
}

impl FromStr for InitKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "equilibrium" => Ok(Self::Equilibrium),
            "taylor-green" => Ok(Self::TaylorGreen),
            "director-perturb" => Ok(Self::DirectorPerturb),
            "mixed" | "taylor-green+director-perturb" => Ok(Self::Mixed),
            other => Err(Error::UnknownInitKind(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InitSpec<T> {
    pub kind: InitKind,
    /// Taylor–Green velocity amplitude.
    pub amplitude: T,
    /// Peak of the director perturbation before renormalization.
    pub director_amplitude: T,
    /// Largest integer mode per axis in the random perturbation.
    pub modes: usize,
    pub seed: u64,
    pub d_star: [T; 3],
}

/// `A (sin x cos y cos z, −cos x sin y cos z, 0)` in units of `2π/L`.
pub fn taylor_green<T: Real>(grid: Grid<T>, amplitude: T) -> VectorField<T> {
    let k0 = grid.fundamental_wavenumber();
    VectorField::from_fn(grid, |[x, y, z]| {
        let (sx, cx) = (k0 * x).sin_cos();
        let (sy, cy) = (k0 * y).sin_cos();
        let cz = (k0 * z).cos();
        [amplitude * sx * cy * cz, -amplitude * cx * sy * cz, T::zero()]
    })
}

/// Real random field with integer modes `|k_i| ≤ modes`, scaled so the
/// largest nodal component magnitude is 1.
pub fn bandlimited_random<T: Real>(spectral: &Spectral<T>, modes: usize, seed: u64) -> Result<VectorField<T>> {
    let grid = *spectral.grid();
    if modes == 0 || 3 * modes > grid.n() {
        return Err(Error::InvalidConfig(format!("perturbation modes {modes} must be in 1..={}", grid.n() / 3)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let zero = Complex::new(T::zero(), T::zero());
    let scale = T::count(grid.len()) * T::lit(0.5);
    let m = modes as i64;
    let mut comps: [Vec<T>; 3] = Default::default();
    for comp in comps.iter_mut() {
        let mut coeffs = vec![zero; grid.len()];
        for kz in -m..=m {
            for ky in -m..=m {
                for kx in -m..=m {
                    // one representative per ± pair
                    let upper = kz > 0 || (kz == 0 && (ky > 0 || (ky == 0 && kx > 0)));
                    if !upper {
                        continue;
                    }
                    let a: f64 = rng.gen_range(-1.0..1.0);
                    let b: f64 = rng.gen_range(-1.0..1.0);
                    let c = Complex::new(T::lit(a), -T::lit(b)) * scale;
                    coeffs[grid.index(grid.slot(kx), grid.slot(ky), grid.slot(kz))] = c;
                    coeffs[grid.index(grid.slot(-kx), grid.slot(-ky), grid.slot(-kz))] = c.conj();
                }
            }
        }
        *comp = spectral.inverse(&coeffs);
    }
    let peak = comps.iter().flatten().fold(T::zero(), |p, v| p.max(v.abs()));
    for c in comps.iter_mut() {
        for v in c.iter_mut() {
            *v /= peak;
        }
    }
    VectorField::from_components(grid, comps)
}

/// Builds a valid initial state: divergence-free velocity and unit director.
pub fn generate_initial_data<T: Real>(spectral: &Spectral<T>, spec: &InitSpec<T>) -> Result<State<T>> {
    let grid = *spectral.grid();
    let ds = spec.d_star;
    let len = (ds[0] * ds[0] + ds[1] * ds[1] + ds[2] * ds[2]).sqrt();
    if (len - T::one()).abs() > T::lit(1e-12) {
        return Err(Error::InvalidConfig(format!("d_star must be a unit vector (|d_star| = {len})")));
    }
    let with_flow = matches!(spec.kind, InitKind::TaylorGreen | InitKind::Mixed);
    let with_perturbation = matches!(spec.kind, InitKind::DirectorPerturb | InitKind::Mixed);

    let u = if with_flow {
        spectral.leray_project(&taylor_green(grid, spec.amplitude))?
    } else {
        VectorField::zeros(grid)
    };
    let d = if with_perturbation {
        let psi = bandlimited_random(spectral, spec.modes, spec.seed)?;
        let raw = VectorField::from_components(
            grid,
            std::array::from_fn(|c| psi.comps[c].iter().map(|&p| ds[c] + spec.director_amplitude * p).collect()),
        )?;
        raw.normalized(T::lit(0.5)).map_err(|min| {
            Error::InvalidConfig(format!("director amplitude too large: |d_star + perturbation| reaches {min}"))
        })?
    } else {
        VectorField::constant(grid, ds)
    };
    State::new(u, d, T::zero())
}

/// `(‖u‖₂ + ‖∇d‖₂)(‖∇u‖₂ + ‖∇²d‖₂)` of a single state.
pub fn smallness_product<T: Real>(spectral: &Spectral<T>, u: &VectorField<T>, d: &VectorField<T>) -> Result<T> {
    let l2_u = spectral.h_seminorm(u, 0)?;
    let grad_u = spectral.h_seminorm(u, 1)?;
    let grad_d = spectral.h_seminorm(d, 1)?;
    let hess_d = spectral.h_seminorm(d, 2)?;
    Ok((l2_u + grad_d) * (grad_u + hess_d))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub lambda: usize,
    pub m_original: f64,
    pub m_rescaled: f64,
    /// `|m_rescaled − m_original| / m_original` (0 when both vanish).
    pub discrepancy: f64,
}

/// Rescales `(u, d)` to `(λ u(λx), d(λx))` and compares the smallness
/// product before and after.
///
/// One period of the rescaled data occupies a box of length `L/λ`, which
/// is sampled by every `λ`-th node of the original grid (spectrally, the
/// original modes relabelled on the `n/λ` grid), so the grid spacing is
/// unchanged.
pub fn scaling_test<T: Real>(state: &State<T>, lambda: usize) -> Result<ScalingReport> {
    let grid = state.u.grid;
    if lambda == 0 || !grid.n().is_multiple_of(lambda) {
        return Err(Error::InvalidConfig(format!("n = {} is not divisible by lambda = {lambda}", grid.n())));
    }
    let spectral = Spectral::new(grid);
    let m_original = smallness_product(&spectral, &state.u, &state.d)?;

    let n_small = grid.n() / lambda;
    let small_grid = Grid::new(n_small, grid.box_length() / T::count(lambda))?;
    let lam = T::count(lambda);
    let u_coarse = resample(&state.u, n_small)?;
    let d_coarse = resample(&state.d, n_small)?;
    let u_l = VectorField::from_components(small_grid, u_coarse.comps.map(|c| c.into_iter().map(|v| v * lam).collect()))?;
    let d_l = VectorField::from_components(small_grid, d_coarse.comps)?;
    let m_rescaled = smallness_product(&Spectral::new(small_grid), &u_l, &d_l)?;

    let (mo, mr) = (m_original.to_f64_lossy(), m_rescaled.to_f64_lossy());
    let discrepancy = if mo > 0.0 {
        (mr - mo).abs() / mo
    } else if mr == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    Ok(ScalingReport { lambda, m_original: mo, m_rescaled: mr, discrepancy })
}
