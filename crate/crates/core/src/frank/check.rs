//! Randomized certification of the analytic derivatives and of the
//! ellipticity bounds. Used by the verification workflows, never by the
//! time stepper.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{ellipticity_constant, energy_density, frobenius_sq, w_d, w_p, w_pp, FrankConstants, Mat3, PointState, Vec3};

/// Central-difference step for first derivatives.
pub const FD_STEP: f64 = 1e-5;
/// Step for the mixed second difference in `p`. `W` is exactly quadratic in
/// `p`, so the second difference has no truncation error and a large step
/// only reduces cancellation.
pub const FD_STEP_PP: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradientReport {
    pub samples: usize,
    pub max_rel_w_d: f64,
    pub max_rel_w_p: f64,
    pub max_rel_w_pp: f64,
}

impl GradientReport {
    pub fn worst(&self) -> f64 {
        self.max_rel_w_d.max(self.max_rel_w_p).max(self.max_rel_w_pp)
    }
}

/// Smallest normalized margins found by [`ellipticity_sweep`]. A negative
/// value means the corresponding bound failed on some sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EllipticityReport {
    pub samples: usize,
    /// `min (W(d, p) − a|p|²) / |p|²` over general `p`.
    pub density_margin: f64,
    /// `min (W_pp ξ:ξ − a|ξ|²) / |ξ|²` over general `ξ`.
    pub form_margin: f64,
    /// `min (W(d, ν⊗b) − a|ν|²|b|²) / (|ν|²|b|²)` over rank-one gradients.
    pub rank_one_margin: f64,
    /// Gradient attaining `density_margin`, with its director.
    pub worst_d: Vec3<f64>,
    pub worst_p: Mat3<f64>,
}

pub fn random_unit<R: Rng>(rng: &mut R) -> Vec3<f64> {
    loop {
        let v: Vec3<f64> = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        let n2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
        if n2 > 1e-4 && n2 <= 1.0 {
            let n = n2.sqrt();
            return v.map(|x| x / n);
        }
    }
}

/// Entries uniform in `[−1, 1]`, then shrunk to `|p|_F ≤ 2`.
pub fn random_gradient<R: Rng>(rng: &mut R) -> Mat3<f64> {
    let p: Mat3<f64> = std::array::from_fn(|_| std::array::from_fn(|_| rng.gen_range(-1.0..1.0)));
    let norm = frobenius_sq(&p).sqrt();
    if norm > 2.0 {
        p.map(|r| r.map(|x| 2.0 * x / norm))
    } else {
        p
    }
}

fn l2(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Richardson-refined central difference of `f` at 0.
fn richardson(f: impl Fn(f64) -> f64, h: f64) -> f64 {
    let coarse = (f(h) - f(-h)) / (2.0 * h);
    let fine = (f(0.5 * h) - f(-0.5 * h)) / h;
    (4.0 * fine - coarse) / 3.0
}

fn relative(err: f64, size: f64, floor: f64) -> f64 {
    err / size.max(floor)
}

/// Compares `w_d`, `w_p` and `w_pp` with finite differences of the density
/// on `samples` random points with `|d| ∈ [0.5, 1.5]` and `|p|_F ≤ 2`.
///
/// Errors are normwise, relative to the analytic value, floored at `1e-3`
/// of the natural size (`k_max |d| |p|²`, `k_max |d|² |p|`, `k_max |d|²`) so
/// that accidental near-zeros do not dominate.
pub fn gradient_consistency(c: &FrankConstants<f64>, samples: usize, seed: u64) -> GradientReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = c.max_modulus();
    let (mut e_d, mut e_p, mut e_pp) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..samples {
        let len = rng.gen_range(0.5..1.5);
        let d = random_unit(&mut rng).map(|x| len * x);
        let p = random_gradient(&mut rng);
        let s = PointState::new(d, p);
        let (dn, pn) = (len, frobenius_sq(&p).sqrt());

        let a_d = w_d(&s, c);
        let fd_d: Vec3<f64> = std::array::from_fn(|m| {
            richardson(
                |h| {
                    let mut dd = d;
                    dd[m] += h;
                    energy_density(&PointState::new(dd, p), c)
                },
                FD_STEP,
            )
        });
        let err = l2((0..3).map(|m| a_d[m] - fd_d[m]));
        e_d = e_d.max(relative(err, l2(a_d), 1e-3 * k * dn * pn * pn));

        let a_p = w_p(&s, c);
        let mut err = 0.0;
        for j in 0..3 {
            for kk in 0..3 {
                let fd = richardson(
                    |h| {
                        let mut pp = p;
                        pp[j][kk] += h;
                        energy_density(&PointState::new(d, pp), c)
                    },
                    FD_STEP,
                );
                err += (a_p[j][kk] - fd).powi(2);
            }
        }
        e_p = e_p.max(relative(err.sqrt(), l2(a_p.iter().flatten().copied()), 1e-3 * k * dn * dn * pn));

        let a_pp = w_pp(&d, c);
        let h = FD_STEP_PP;
        let w_at = |a: usize, sa: f64, b: usize, sb: f64| {
            let mut pp = p;
            pp[a / 3][a % 3] += sa;
            pp[b / 3][b % 3] += sb;
            energy_density(&PointState::new(d, pp), c)
        };
        let mut err = 0.0;
        for a in 0..9 {
            for b in 0..9 {
                let fd = (w_at(a, h, b, h) - w_at(a, h, b, -h) - w_at(a, -h, b, h) + w_at(a, -h, b, -h)) / (4.0 * h * h);
                err += (a_pp[a][b] - fd).powi(2);
            }
        }
        e_pp = e_pp.max(relative(err.sqrt(), l2(a_pp.iter().flatten().copied()), 1e-3 * k * dn * dn));
    }
    GradientReport { samples, max_rel_w_d: e_d, max_rel_w_p: e_p, max_rel_w_pp: e_pp }
}

/// Samples unit directors and gradients and records the worst margins of
/// the pointwise, quadratic-form and rank-one ellipticity bounds.
pub fn ellipticity_sweep(c: &FrankConstants<f64>, samples: usize, seed: u64) -> EllipticityReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = ellipticity_constant(c);
    let mut rep = EllipticityReport {
        samples,
        density_margin: f64::INFINITY,
        form_margin: f64::INFINITY,
        rank_one_margin: f64::INFINITY,
        worst_d: [0.0; 3],
        worst_p: [[0.0; 3]; 3],
    };
    for _ in 0..samples {
        let d = random_unit(&mut rng);
        let p = random_gradient(&mut rng);
        let p2 = frobenius_sq(&p);
        if p2 > 0.0 {
            let m = (energy_density(&PointState::new(d, p), c) - a * p2) / p2;
            if m < rep.density_margin {
                rep.density_margin = m;
                rep.worst_d = d;
                rep.worst_p = p;
            }
        }

        let xi = random_gradient(&mut rng);
        let x2 = frobenius_sq(&xi);
        if x2 > 0.0 {
            let h = w_pp(&d, c);
            let flat: [f64; 9] = std::array::from_fn(|i| xi[i / 3][i % 3]);
            let q: f64 = (0..9).flat_map(|i| (0..9).map(move |j| (i, j))).map(|(i, j)| h[i][j] * flat[i] * flat[j]).sum();
            rep.form_margin = rep.form_margin.min((q - a * x2) / x2);
        }

        let nu: Vec3<f64> = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        let b: Vec3<f64> = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        let r1: Mat3<f64> = std::array::from_fn(|j| std::array::from_fn(|k| nu[j] * b[k]));
        let r2 = frobenius_sq(&r1);
        if r2 > 0.0 {
            let m = (energy_density(&PointState::new(d, r1), c) - a * r2) / r2;
            rep.rank_one_margin = rep.rank_one_margin.min(m);
        }
    }
    rep
}
