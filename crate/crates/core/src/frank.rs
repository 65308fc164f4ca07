//! Oseen–Frank elastic energy density and its variational derivatives.
//!
//! The density of a director value `d` with gradient `p[j][k] = ∂_j d^k` is
//!
//! ```text
//! W(d, p) = k1 (div d)^2 + k2 (d · curl d)^2 + k3 |d × curl d|^2
//! ```
//!
//! with `div d = tr p` and `(curl d)_i = ε_ijk p[j][k]`. Every derivative
//! below is the closed-form expansion of that expression. None of them
//! assume `|d| = 1`; the time stepper lets the length drift between
//! renormalizations.

use serde::{Deserialize, Serialize};

pub mod check;

use crate::error::{Error, Result};
use crate::Real;

pub type Vec3<T> = [T; 3];
pub type Mat3<T> = [[T; 3]; 3];
/// Second derivative with respect to `p`, flattened as `[3 * j + k][3 * l + m]`.
pub type Hessian9<T> = [[T; 9]; 9];
/// Mixed derivative `∂²W / ∂d^m ∂p[j][k]`, indexed `[m][j][k]`.
pub type MixedDerivative<T> = [[[T; 3]; 3]; 3];

/// Splay, twist and bend moduli.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrankConstants<T> {
    k1: T,
    k2: T,
    k3: T,
}

impl<T: Real> FrankConstants<T> {
    pub fn new(k1: T, k2: T, k3: T) -> Result<Self> {
        for (name, k) in [("k1", k1), ("k2", k2), ("k3", k3)] {
            if !(k.is_finite() && k > T::zero()) {
                return Err(Error::InvalidConstants(format!("{name} = {k} must be positive")));
            }
        }
        Ok(Self { k1, k2, k3 })
    }

    /// Equal-constant (one-constant) approximation.
    pub fn isotropic(k: T) -> Result<Self> {
        Self::new(k, k, k)
    }

    pub fn k1(&self) -> T {
        self.k1
    }

    pub fn k2(&self) -> T {
        self.k2
    }

    pub fn k3(&self) -> T {
        self.k3
    }

    pub fn max_modulus(&self) -> T {
        self.k1.max(self.k2).max(self.k3)
    }

    pub fn is_one_constant(&self) -> bool {
        self.k1 == self.k2 && self.k2 == self.k3
    }
}

/// `a = min(k1, k2, k3)`.
pub fn ellipticity_constant<T: Real>(c: &FrankConstants<T>) -> T {
    c.k1.min(c.k2).min(c.k3)
}

/// Director value and gradient at a single point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointState<T> {
    pub d: Vec3<T>,
    pub p: Mat3<T>,
}

impl<T: Real> PointState<T> {
    pub fn new(d: Vec3<T>, p: Mat3<T>) -> Self {
        Self { d, p }
    }
}

#[inline]
pub(crate) fn dot<T: Real>(a: &Vec3<T>, b: &Vec3<T>) -> T {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub(crate) fn cross<T: Real>(a: &Vec3<T>, b: &Vec3<T>) -> Vec3<T> {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Levi-Civita symbol.
#[inline]
pub fn levi_civita(i: usize, j: usize, k: usize) -> i32 {
    match (i, j, k) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1,
        _ => 0,
    }
}

#[inline]
pub fn trace<T: Real>(p: &Mat3<T>) -> T {
    p[0][0] + p[1][1] + p[2][2]
}

/// `(curl)_i = ε_ijk p[j][k]`.
#[inline]
pub fn curl_of<T: Real>(p: &Mat3<T>) -> Vec3<T> {
    [p[1][2] - p[2][1], p[2][0] - p[0][2], p[0][1] - p[1][0]]
}

/// `E(v)[j][k] = v_i ε_ijk`, the adjoint of [`curl_of`].
#[inline]
fn eps_contract<T: Real>(v: &Vec3<T>) -> Mat3<T> {
    let z = T::zero();
    [
        [z, v[2], -v[1]],
        [-v[2], z, v[0]],
        [v[1], -v[0], z],
    ]
}

pub fn frobenius_sq<T: Real>(p: &Mat3<T>) -> T {
    p.iter().flatten().fold(T::zero(), |acc, &x| acc + x * x)
}

/// `W(d, p)`.
pub fn energy_density<T: Real>(s: &PointState<T>, c: &FrankConstants<T>) -> T {
    let div = trace(&s.p);
    let curl = curl_of(&s.p);
    let twist = dot(&s.d, &curl);
    let bend = cross(&s.d, &curl);
    c.k1 * div * div + c.k2 * twist * twist + c.k3 * dot(&bend, &bend)
}

/// `∂W/∂d` at fixed `p`.
pub fn w_d<T: Real>(s: &PointState<T>, c: &FrankConstants<T>) -> Vec3<T> {
    let two = T::lit(2.0);
    let curl = curl_of(&s.p);
    let twist = dot(&s.d, &curl);
    // ∂|d × c|²/∂d = 2 c × (d × c)
    let bend = cross(&curl, &cross(&s.d, &curl));
    std::array::from_fn(|m| two * (c.k2 * twist * curl[m] + c.k3 * bend[m]))
}

/// `∂W/∂p[j][k]` at fixed `d`. Linear in `p`.
pub fn w_p<T: Real>(s: &PointState<T>, c: &FrankConstants<T>) -> Mat3<T> {
    let two = T::lit(2.0);
    let div = trace(&s.p);
    let curl = curl_of(&s.p);
    let twist = dot(&s.d, &curl);
    // ∂|d × c|²/∂c = 2 (d × c) × d
    let bend_dir = cross(&cross(&s.d, &curl), &s.d);
    let e_d = eps_contract(&s.d);
    let e_b = eps_contract(&bend_dir);
    let mut out = [[T::zero(); 3]; 3];
    for j in 0..3 {
        for k in 0..3 {
            let splay = if j == k { c.k1 * div } else { T::zero() };
            out[j][k] = two * (splay + c.k2 * twist * e_d[j][k] + c.k3 * e_b[j][k]);
        }
    }
    out
}

/// Full Hessian `∂²W/∂p∂p`. Independent of `p` because `W` is quadratic in it.
pub fn w_pp<T: Real>(d: &Vec3<T>, c: &FrankConstants<T>) -> Hessian9<T> {
    let two = T::lit(2.0);
    let dd = dot(d, d);
    let e_d = eps_contract(d);
    // (d × c) × d = M c with M = |d|² I − d ⊗ d
    let m: Mat3<T> = std::array::from_fn(|i| {
        std::array::from_fn(|r| if i == r { dd - d[i] * d[r] } else { -d[i] * d[r] })
    });
    let mut h = [[T::zero(); 9]; 9];
    for j in 0..3 {
        for k in 0..3 {
            for l in 0..3 {
                for n in 0..3 {
                    let splay = if j == k && l == n { c.k1 } else { T::zero() };
                    let twist = c.k2 * e_d[j][k] * e_d[l][n];
                    let mut bend = T::zero();
                    for i in 0..3 {
                        let e1 = levi_civita(i, j, k);
                        if e1 == 0 {
                            continue;
                        }
                        for r in 0..3 {
                            let e2 = levi_civita(r, l, n);
                            if e2 != 0 {
                                bend += T::lit(f64::from(e1 * e2)) * m[i][r];
                            }
                        }
                    }
                    h[3 * j + k][3 * l + n] = two * (splay + twist + c.k3 * bend);
                }
            }
        }
    }
    h
}

/// `W_pp(d) ξ : ξ`, contracted from the full Hessian.
pub fn w_pp_quadratic_form<T: Real>(d: &Vec3<T>, xi: &Mat3<T>, c: &FrankConstants<T>) -> T {
    let h = w_pp(d, c);
    let flat: [T; 9] = std::array::from_fn(|a| xi[a / 3][a % 3]);
    let mut acc = T::zero();
    for a in 0..9 {
        for b in 0..9 {
            acc += h[a][b] * flat[a] * flat[b];
        }
    }
    acc
}

/// `∂²W/∂d∂d`.
pub fn w_dd<T: Real>(s: &PointState<T>, c: &FrankConstants<T>) -> Mat3<T> {
    let two = T::lit(2.0);
    let curl = curl_of(&s.p);
    let cc = dot(&curl, &curl);
    std::array::from_fn(|m| {
        std::array::from_fn(|n| {
            let outer = curl[m] * curl[n];
            let iso = if m == n { cc } else { T::zero() };
            two * (c.k2 * outer + c.k3 * (iso - outer))
        })
    })
}

/// `∂²W/∂d^m ∂p[j][k]`.
pub fn w_dp<T: Real>(s: &PointState<T>, c: &FrankConstants<T>) -> MixedDerivative<T> {
    let two = T::lit(2.0);
    let d = &s.d;
    let curl = curl_of(&s.p);
    let twist = dot(d, &curl);
    // g[m][r] = ∂(W_d)_m / ∂c_r
    let g: Mat3<T> = std::array::from_fn(|m| {
        std::array::from_fn(|r| {
            let delta = if m == r { T::one() } else { T::zero() };
            two * (c.k2 * (d[r] * curl[m] + twist * delta)
                + c.k3 * (two * d[m] * curl[r] - delta * twist - curl[m] * d[r]))
        })
    });
    let mut out = [[[T::zero(); 3]; 3]; 3];
    for m in 0..3 {
        let e = eps_contract(&g[m]);
        out[m] = e;
    }
    out
}

/// Upper bounds for the growth estimates of `W` and its derivatives at unit
/// director length.
///
/// Each constant is the analytic bound obtained from `|div| ≤ √3|p|`,
/// `|curl| ≤ √2|p|` and the orthogonality of the twist and bend parts; the
/// randomized maximization in the test suite confirms every sampled ratio
/// stays below it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthBounds<T> {
    /// `W ≤ C |d|²|p|²`
    pub energy: T,
    /// `|W_d| ≤ C |d||p|²`
    pub w_d: T,
    /// `|W_p| ≤ C |d|²|p|`
    pub w_p: T,
    /// `|W_pp| ≤ C |d|²` (Frobenius norm of the 9×9 Hessian)
    pub w_pp: T,
    /// `|W_dd| ≤ C |p|²`
    pub w_dd: T,
    /// `|W_dp| ≤ C |d||p|`
    pub w_dp: T,
}

impl<T: Real> GrowthBounds<T> {
    pub fn for_constants(c: &FrankConstants<T>) -> Self {
        let f = |x: f64| T::lit(x);
        let kt = c.k2.max(c.k3);
        Self {
            energy: f(3.0) * c.k1 + f(2.0) * kt,
            w_d: f(4.0) * kt,
            w_p: f(6.0) * c.k1 + f(4.0) * kt,
            w_pp: f(6.0) * c.k1 + f(4.0) * c.k2 + f(6.0) * c.k3,
            w_dd: f(4.0) * (c.k2 + f(2.0) * c.k3),
            w_dp: f(11.0) * c.k2 + f(19.0) * c.k3,
        }
    }
}
