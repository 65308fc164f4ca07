use rustfft::num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::dynamics::{DtPolicy, SolverConfig, State};
use crate::error::{Error, Result};
use crate::fields::{Coeffs, Grid, ScalarField, Spectral, TensorField, VectorField};
use crate::frank::{self, ellipticity_constant, FrankConstants, PointState};
use crate::Real;

/// Smallest director length tolerated before renormalization.
const MIN_DIRECTOR_NORM: f64 = 0.5;

/// Spectral right-hand sides of the semi-discrete system, dealiased, with
/// the velocity part projected onto divergence-free fields and the
/// implicit director diffusion `a Δd` removed.
struct Explicit<T> {
    u: [Coeffs<T>; 3],
    d: [Coeffs<T>; 3],
}

/// Pointwise elastic quantities on the grid.
struct Elastic<T> {
    grad_d: TensorField<T>,
    /// `h = ∂_j W_p[j][·] − W_d`, dealiased.
    h: VectorField<T>,
    /// `∂_i d^k W_p[j][k]`, stored `[i][j]`.
    stress: Option<[[Vec<T>; 3]; 3]>,
}

/// Semi-discrete time derivatives at one state.
pub(crate) struct Evaluation<T> {
    /// Leray-projected velocity spectrum.
    pub u_hat: [Coeffs<T>; 3],
    pub d_hat: [Coeffs<T>; 3],
    pub grad_d: TensorField<T>,
    /// `h − (h·d)d = ∂_t d + (u·∇)d`.
    pub tangential: VectorField<T>,
    pub du_dt: [Coeffs<T>; 3],
    pub dd_dt: [Coeffs<T>; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome<T> {
    pub state: State<T>,
    pub dt: T,
    pub halvings: u32,
}

/// Why a run stopped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "cause", rename_all = "kebab-case")]
pub enum Termination {
    Completed,
    BlowUpSuspect { t: f64, min_norm: f64 },
    NonFinite { t: f64 },
    StepRejected { t: f64, message: String },
}

#[derive(Debug, Clone)]
pub struct RunOutcome<T> {
    pub state: State<T>,
    pub steps: usize,
    pub halvings: u32,
    pub termination: Termination,
}

/// IMEX pseudo-spectral integrator.
///
/// Each step is a Crank–Nicolson / Heun pair: the predictor is IMEX Euler,
/// the corrector averages the explicit terms of the old and predicted
/// states and treats `Δu` and `a Δd` with the trapezoidal rule. The scheme
/// is second order in `dt`. Velocity is Leray-projected and the director
/// renormalized after each stage.
pub struct Solver<T: Real> {
    spectral: Spectral<T>,
    cfg: SolverConfig<T>,
}

impl<T: Real> Solver<T> {
    pub fn new(grid: Grid<T>, cfg: SolverConfig<T>) -> Result<Self> {
        cfg.validate()?;
        Ok(Self { spectral: Spectral::new(grid), cfg })
    }

    pub fn spectral(&self) -> &Spectral<T> {
        &self.spectral
    }

    pub fn config(&self) -> &SolverConfig<T> {
        &self.cfg
    }

    pub fn grid(&self) -> &Grid<T> {
        self.spectral.grid()
    }

    pub fn frank(&self) -> &FrankConstants<T> {
        &self.cfg.frank
    }

    fn check(&self, v: &VectorField<T>) -> Result<()> {
        if !self.grid().same_as(&v.grid) {
            return Err(Error::GridMismatch);
        }
        v.validate()
    }

    fn elastic(&self, d: &VectorField<T>, d_hat: &[Coeffs<T>; 3], with_stress: bool) -> Result<Elastic<T>> {
        let sp = &self.spectral;
        let c = &self.cfg.frank;
        let len = self.grid().len();
        let grad_d = sp.inverse_tensor(&sp.gradient_coeffs(d_hat));

        let mut wp: [[Vec<T>; 3]; 3] = std::array::from_fn(|_| std::array::from_fn(|_| vec![T::zero(); len]));
        let mut wd: [Vec<T>; 3] = std::array::from_fn(|_| vec![T::zero(); len]);
        let mut stress: Option<[[Vec<T>; 3]; 3]> =
            with_stress.then(|| std::array::from_fn(|_| std::array::from_fn(|_| vec![T::zero(); len])));
        for idx in 0..len {
            let s = PointState::new(d.at(idx), grad_d.at(idx));
            let p_deriv = frank::w_p(&s, c);
            let d_deriv = frank::w_d(&s, c);
            for j in 0..3 {
                wd[j][idx] = d_deriv[j];
                for k in 0..3 {
                    wp[j][k][idx] = p_deriv[j][k];
                }
            }
            if let Some(st) = stress.as_mut() {
                for i in 0..3 {
                    for j in 0..3 {
                        st[i][j][idx] = s.p[i][0] * p_deriv[j][0] + s.p[i][1] * p_deriv[j][1] + s.p[i][2] * p_deriv[j][2];
                    }
                }
            }
        }
        if wp.iter().flatten().chain(wd.iter()).any(|c| c.iter().any(|v| !v.is_finite())) {
            return Err(Error::NonFinite("elastic derivatives".into()));
        }

        let mut arrays: Vec<&[T]> = wp.iter().flatten().map(|v| v.as_slice()).collect();
        arrays.extend(wd.iter().map(|v| v.as_slice()));
        let spectra = sp.forward_many(&arrays);
        let zero = Complex::new(T::zero(), T::zero());
        let mut h_hat: [Coeffs<T>; 3] = std::array::from_fn(|_| vec![zero; len]);
        for i in 0..3 {
            for j in 0..3 {
                // ∂_j W_p[j][i]
                let coeffs = &spectra[3 * j + i];
                let kj = sp.wavenumbers(j);
                for ((h, z), &k) in h_hat[i].iter_mut().zip(coeffs).zip(kj) {
                    *h += Complex::new(-z.im * k, z.re * k);
                }
            }
            for (h, z) in h_hat[i].iter_mut().zip(&spectra[9 + i]) {
                *h -= *z;
            }
            sp.mask_in_place(&mut h_hat[i]);
        }
        let h = sp.inverse_vector(&h_hat);
        Ok(Elastic { grad_d, h, stress })
    }

    /// `h = ∂_j W_p(d, ∇d)[j][·] − W_d(d, ∇d)`, the negative variational
    /// derivative of the elastic energy.
    pub fn molecular_field(&self, d: &VectorField<T>) -> Result<VectorField<T>> {
        self.check(d)?;
        let d_hat = self.spectral.forward_vector(d);
        Ok(self.elastic(d, &d_hat, false)?.h)
    }

    /// `−∂_j(∂_i d^k W_p[j][k])`, the force the director exerts on the fluid.
    pub fn ericksen_stress_divergence(&self, d: &VectorField<T>) -> Result<VectorField<T>> {
        self.check(d)?;
        let sp = &self.spectral;
        let d_hat = sp.forward_vector(d);
        let el = self.elastic(d, &d_hat, true)?;
        let stress = el.stress.expect("stress requested");
        let out = self.neg_divergence_of_tensor(&stress);
        Ok(sp.inverse_vector(&out))
    }

    /// `−∂_j F[i][j]` in spectral space, dealiased.
    fn neg_divergence_of_tensor(&self, f: &[[Vec<T>; 3]; 3]) -> [Coeffs<T>; 3] {
        let sp = &self.spectral;
        let len = self.grid().len();
        let arrays: Vec<&[T]> = f.iter().flatten().map(|v| v.as_slice()).collect();
        let spectra = sp.forward_many(&arrays);
        let zero = Complex::new(T::zero(), T::zero());
        std::array::from_fn(|i| {
            let mut acc = vec![zero; len];
            for j in 0..3 {
                let kj = sp.wavenumbers(j);
                for ((a, z), &k) in acc.iter_mut().zip(&spectra[3 * i + j]).zip(kj) {
                    *a -= Complex::new(-z.im * k, z.re * k);
                }
            }
            sp.mask_in_place(&mut acc);
            acc
        })
    }

    /// `−(u·∇)d + h − (h·d)d`, the time derivative of the director.
    pub fn director_rhs(&self, s: &State<T>) -> Result<VectorField<T>> {
        self.check(&s.u)?;
        self.check(&s.d)?;
        let d_hat = self.spectral.forward_vector(&s.d);
        let el = self.elastic(&s.d, &d_hat, false)?;
        let (tangential, advection) = director_terms(&s.u, &s.d, &el);
        let mut out = tangential;
        for c in 0..3 {
            for (o, a) in out.comps[c].iter_mut().zip(&advection.comps[c]) {
                *o -= *a;
            }
        }
        Ok(out)
    }

    /// Tangential molecular field `h − (h·d)d`, which equals `∂_t d + (u·∇)d`.
    pub fn tangential_molecular_field(&self, d: &VectorField<T>) -> Result<VectorField<T>> {
        let h = self.molecular_field(d)?;
        let mut out = h.clone();
        for idx in 0..d.grid.len() {
            let dv = d.at(idx);
            let hv = h.at(idx);
            let hd = frank::dot(&hv, &dv);
            out.set(idx, std::array::from_fn(|c| hv[c] - hd * dv[c]));
        }
        Ok(out)
    }

    /// Velocity time derivative `Δu + P[−(u·∇)u + ∇·σ]` in physical space.
    pub fn velocity_rhs(&self, s: &State<T>) -> Result<VectorField<T>> {
        let (u_hat, d_hat) = self.forward_state(s);
        let ex = self.explicit(&s.u, &s.d, &d_hat)?;
        let ksq = self.spectral.k_squared_full();
        let out: [Coeffs<T>; 3] = std::array::from_fn(|c| {
            ex.u[c].iter().zip(&u_hat[c]).zip(ksq).map(|((n, u), &k2)| *n - *u * k2).collect()
        });
        Ok(self.spectral.inverse_vector(&out))
    }

    /// Pressure with zero mean, recovered from the gradient part of the
    /// nonlinear momentum terms. Output only; the stepper never forms it.
    pub fn pressure(&self, s: &State<T>) -> Result<ScalarField<T>> {
        self.check(&s.u)?;
        self.check(&s.d)?;
        let sp = &self.spectral;
        let d_hat = sp.forward_vector(&s.d);
        let el = self.elastic(&s.d, &d_hat, true)?;
        let flux = momentum_flux(&s.u, el.stress.expect("stress requested"));
        let n_hat = self.neg_divergence_of_tensor(&flux);
        let len = self.grid().len();
        let zero = Complex::new(T::zero(), T::zero());
        let mut p_hat = vec![zero; len];
        let ksq = sp.k_squared();
        for idx in 0..len {
            if ksq[idx] == T::zero() {
                continue;
            }
            let kn = (0..3).fold(zero, |acc, a| acc + n_hat[a][idx] * sp.wavenumbers(a)[idx]);
            // i k P̂ = k (k·N̂)/|k|²  ⇒  P̂ = −i (k·N̂)/|k|²
            let q = kn / ksq[idx];
            p_hat[idx] = Complex::new(q.im, -q.re);
        }
        Ok(ScalarField { grid: *self.grid(), values: sp.inverse(&p_hat) })
    }

    fn forward_state(&self, s: &State<T>) -> ([Coeffs<T>; 3], [Coeffs<T>; 3]) {
        let mut it = self
            .spectral
            .forward_many(&[&s.u.comps[0], &s.u.comps[1], &s.u.comps[2], &s.d.comps[0], &s.d.comps[1], &s.d.comps[2]])
            .into_iter();
        let mut u_hat: [Coeffs<T>; 3] = std::array::from_fn(|_| it.next().unwrap());
        let d_hat: [Coeffs<T>; 3] = std::array::from_fn(|_| it.next().unwrap());
        self.spectral.project_coeffs(&mut u_hat);
        (u_hat, d_hat)
    }

    fn explicit(&self, u: &VectorField<T>, d: &VectorField<T>, d_hat: &[Coeffs<T>; 3]) -> Result<Explicit<T>> {
        Ok(self.explicit_with_parts(u, d, d_hat)?.0)
    }

    /// Time derivatives and intermediate fields at `s`, for diagnostics.
    pub(crate) fn evaluate(&self, s: &State<T>) -> Result<Evaluation<T>> {
        self.check(&s.u)?;
        self.check(&s.d)?;
        let (u_hat, d_hat) = self.forward_state(s);
        let (ex, grad_d, tangential) = self.explicit_with_parts(&s.u, &s.d, &d_hat)?;
        let a = ellipticity_constant(&self.cfg.frank);
        let ksq = self.spectral.k_squared_full();
        let du_dt = std::array::from_fn(|c| {
            ex.u[c].iter().zip(&u_hat[c]).zip(ksq).map(|((n, u), &k2)| *n - *u * k2).collect()
        });
        let dd_dt = std::array::from_fn(|c| {
            ex.d[c].iter().zip(&d_hat[c]).zip(ksq).map(|((n, d), &k2)| *n - *d * (a * k2)).collect()
        });
        Ok(Evaluation { u_hat, d_hat, grad_d, tangential, du_dt, dd_dt })
    }

    fn explicit_with_parts(
        &self,
        u: &VectorField<T>,
        d: &VectorField<T>,
        d_hat: &[Coeffs<T>; 3],
    ) -> Result<(Explicit<T>, TensorField<T>, VectorField<T>)> {
        let sp = &self.spectral;
        let el = self.elastic(d, d_hat, true)?;
        let (tangential, advection) = director_terms(u, d, &el);
        let flux = momentum_flux(u, el.stress.expect("stress requested"));

        let mut arrays: Vec<&[T]> = flux.iter().flatten().map(|v| v.as_slice()).collect();
        let mut director_force: [Vec<T>; 3] = tangential.comps.clone();
        for c in 0..3 {
            for (f, a) in director_force[c].iter_mut().zip(&advection.comps[c]) {
                *f -= *a;
            }
        }
        arrays.extend(director_force.iter().map(|v| v.as_slice()));
        let spectra = sp.forward_many(&arrays);
        let len = self.grid().len();
        let zero = Complex::new(T::zero(), T::zero());

        let mut nu: [Coeffs<T>; 3] = std::array::from_fn(|i| {
            let mut acc = vec![zero; len];
            for j in 0..3 {
                let kj = sp.wavenumbers(j);
                for ((a, z), &k) in acc.iter_mut().zip(&spectra[3 * i + j]).zip(kj) {
                    *a -= Complex::new(-z.im * k, z.re * k);
                }
            }
            sp.mask_in_place(&mut acc);
            acc
        });
        sp.project_coeffs(&mut nu);

        let a = ellipticity_constant(&self.cfg.frank);
        let ksq = sp.k_squared_full();
        // not masked: h is already dealiased, and the implicit a|k|² part must
        // cancel exactly on every mode
        let nd: [Coeffs<T>; 3] = std::array::from_fn(|c| {
            spectra[9 + c].iter().zip(&d_hat[c]).zip(ksq).map(|((f, dh), &k2)| *f + *dh * (a * k2)).collect()
        });
        if nu.iter().chain(nd.iter()).any(|c| c.iter().any(|z| !(z.re.is_finite() && z.im.is_finite()))) {
            return Err(Error::NonFinite("explicit terms".into()));
        }
        Ok((Explicit { u: nu, d: nd }, el.grad_d, tangential))
    }

    /// Stability limit `min(h / max|u|, h² / (4 max k))`.
    pub fn stability_limit(&self, s: &State<T>) -> T {
        let h = self.grid().spacing();
        let umax = s.u.max_magnitude();
        let diff = h * h / (T::lit(4.0) * self.cfg.frank.max_modulus());
        if umax > T::zero() {
            diff.min(h / umax)
        } else {
            diff
        }
    }

    /// Step size requested by the configured policy.
    pub fn policy_dt(&self, s: &State<T>) -> T {
        match self.cfg.dt_policy {
            DtPolicy::Fixed(dt) => dt,
            DtPolicy::Adaptive { max_dt } => {
                let dt = self.cfg.cfl_safety * self.stability_limit(s);
                max_dt.map_or(dt, |m| dt.min(m))
            }
        }
    }

    /// Advances one step with the policy's `dt`.
    pub fn step(&self, s: &State<T>) -> Result<StepOutcome<T>> {
        self.step_with_dt(s, self.policy_dt(s))
    }

    /// Advances one step, halving `dt` while it exceeds the stability limit
    /// or produces non-finite values.
    pub fn step_with_dt(&self, s: &State<T>, dt: T) -> Result<StepOutcome<T>> {
        if !(dt > T::zero()) {
            return Err(Error::InvalidConfig(format!("dt = {dt} must be positive")));
        }
        let limit = self.stability_limit(s);
        let mut dt = dt;
        for halvings in 0..=self.cfg.max_halvings {
            if dt <= limit {
                match self.imex_step(s, dt) {
                    Ok(state) => return Ok(StepOutcome { state, dt, halvings }),
                    Err(Error::NonFinite(_)) => {}
                    Err(e) => return Err(e),
                }
            }
            dt *= T::lit(0.5);
        }
        Err(Error::CflViolation {
            dt: dt.to_f64_lossy(),
            limit: limit.to_f64_lossy(),
            halvings: self.cfg.max_halvings,
        })
    }

    /// One predictor–corrector step without renormalizing the result.
    pub fn unnormalized_step(&self, s: &State<T>, dt: T) -> Result<State<T>> {
        self.imex_stages(s, dt)
    }

    fn imex_step(&self, s: &State<T>, dt: T) -> Result<State<T>> {
        let mut next = self.imex_stages(s, dt)?;
        next.d = renormalize(&next.d, next.t)?;
        Ok(next)
    }

    fn imex_stages(&self, s: &State<T>, dt: T) -> Result<State<T>> {
        self.check(&s.u)?;
        self.check(&s.d)?;
        let sp = &self.spectral;
        let a = ellipticity_constant(&self.cfg.frank);
        let ksq = sp.k_squared_full();
        let half = T::lit(0.5);

        let (u_hat, d_hat) = self.forward_state(s);
        let n0 = self.explicit(&s.u, &s.d, &d_hat)?;

        // predictor: IMEX Euler
        let pred_u: [Coeffs<T>; 3] = std::array::from_fn(|c| {
            u_hat[c]
                .iter()
                .zip(&n0.u[c])
                .zip(ksq)
                .map(|((u, n), &k2)| (*u + *n * dt) / (T::one() + dt * k2))
                .collect()
        });
        let pred_d: [Coeffs<T>; 3] = std::array::from_fn(|c| {
            d_hat[c]
                .iter()
                .zip(&n0.d[c])
                .zip(ksq)
                .map(|((d, n), &k2)| (*d + *n * dt) / (T::one() + dt * a * k2))
                .collect()
        });
        let mut it = sp
            .inverse_many(&[&pred_u[0], &pred_u[1], &pred_u[2], &pred_d[0], &pred_d[1], &pred_d[2]])
            .into_iter();
        let grid = *self.grid();
        let u1 = VectorField { grid, comps: std::array::from_fn(|_| it.next().unwrap()) };
        let d1_raw = VectorField { grid, comps: std::array::from_fn(|_| it.next().unwrap()) };
        u1.validate()?;
        d1_raw.validate()?;
        let d1 = renormalize(&d1_raw, s.t + dt)?;
        let d1_hat = sp.forward_vector(&d1);
        let n1 = self.explicit(&u1, &d1, &d1_hat)?;

        // corrector: trapezoidal
        let mut new_u: [Coeffs<T>; 3] = std::array::from_fn(|c| {
            (0..grid.len())
                .map(|i| {
                    let l = dt * half * ksq[i];
                    (u_hat[c][i] * (T::one() - l) + (n0.u[c][i] + n1.u[c][i]) * (dt * half)) / (T::one() + l)
                })
                .collect()
        });
        sp.project_coeffs(&mut new_u);
        let new_d: [Coeffs<T>; 3] = std::array::from_fn(|c| {
            (0..grid.len())
                .map(|i| {
                    let l = dt * half * a * ksq[i];
                    (d_hat[c][i] * (T::one() - l) + (n0.d[c][i] + n1.d[c][i]) * (dt * half)) / (T::one() + l)
                })
                .collect()
        });
        let mut it = sp
            .inverse_many(&[&new_u[0], &new_u[1], &new_u[2], &new_d[0], &new_d[1], &new_d[2]])
            .into_iter();
        let u = VectorField { grid, comps: std::array::from_fn(|_| it.next().unwrap()) };
        let d = VectorField { grid, comps: std::array::from_fn(|_| it.next().unwrap()) };
        u.validate()?;
        d.validate()?;
        Ok(State { u, d, t: s.t + dt })
    }

    /// Integrates until `t_end`, calling `sink` at the initial state, every
    /// `output_every` steps and at the final state.
    ///
    /// Numerical failures end the run and are reported in the outcome;
    /// errors returned by `sink` are propagated.
    pub fn simulate<F>(&self, s0: &State<T>, mut sink: F) -> Result<RunOutcome<T>>
    where
        F: FnMut(&State<T>, usize) -> Result<()>,
    {
        let t_end = self.cfg.t_end;
        let mut state = s0.clone();
        let mut steps = 0usize;
        let mut last_emitted = 0usize;
        let mut halvings = 0u32;
        sink(&state, 0)?;
        let termination = loop {
            let remaining = t_end - state.t;
            let dt = self.policy_dt(&state);
            if remaining <= dt * T::lit(1e-9) {
                break Termination::Completed;
            }
            match self.step_with_dt(&state, dt.min(remaining)) {
                Ok(out) => {
                    state = out.state;
                    halvings += out.halvings;
                    steps += 1;
                    if steps.is_multiple_of(self.cfg.output_every) {
                        sink(&state, steps)?;
                        last_emitted = steps;
                    }
                }
                Err(Error::RenormalizationFailure { min_norm, t }) => {
                    break Termination::BlowUpSuspect { t, min_norm };
                }
                Err(Error::NonFinite(_)) => break Termination::NonFinite { t: state.t.to_f64_lossy() },
                Err(e @ Error::CflViolation { .. }) => {
                    break Termination::StepRejected { t: state.t.to_f64_lossy(), message: e.to_string() };
                }
                Err(e) => return Err(e),
            }
        };
        if last_emitted != steps {
            sink(&state, steps)?;
        }
        Ok(RunOutcome { state, steps, halvings, termination })
    }
}

fn renormalize<T: Real>(d: &VectorField<T>, t: T) -> Result<VectorField<T>> {
    d.normalized(T::lit(MIN_DIRECTOR_NORM)).map_err(|min_norm| Error::RenormalizationFailure {
        min_norm: min_norm.to_f64_lossy(),
        t: t.to_f64_lossy(),
    })
}

/// `(h − (h·d)d, (u·∇)d)` pointwise.
fn director_terms<T: Real>(u: &VectorField<T>, d: &VectorField<T>, el: &Elastic<T>) -> (VectorField<T>, VectorField<T>) {
    let grid = d.grid;
    let mut tangential = VectorField::zeros(grid);
    let mut advection = VectorField::zeros(grid);
    for idx in 0..grid.len() {
        let dv = d.at(idx);
        let hv = el.h.at(idx);
        let uv = u.at(idx);
        let hd = frank::dot(&hv, &dv);
        let g = el.grad_d.at(idx);
        tangential.set(idx, std::array::from_fn(|c| hv[c] - hd * dv[c]));
        advection.set(idx, std::array::from_fn(|k| uv[0] * g[0][k] + uv[1] * g[1][k] + uv[2] * g[2][k]));
    }
    (tangential, advection)
}

/// `F[i][j] = u_i u_j + ∂_i d^k W_p[j][k]`, so that `−∂_j F[i][j]` is the
/// advective plus elastic momentum forcing for divergence-free `u`.
fn momentum_flux<T: Real>(u: &VectorField<T>, mut stress: [[Vec<T>; 3]; 3]) -> [[Vec<T>; 3]; 3] {
    for i in 0..3 {
        for j in 0..3 {
            for ((f, a), b) in stress[i][j].iter_mut().zip(&u.comps[i]).zip(&u.comps[j]) {
                *f += *a * *b;
            }
        }
    }
    stress
}
