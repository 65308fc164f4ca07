use serde::{Deserialize, Serialize};

use crate::dynamics::{Solver, State};
use crate::error::Result;
use crate::fields::{holder_ratio, integrate, lp_norm_of_sq, magnitude_sq, Coeffs, TensorField};
use crate::frank::{energy_density, PointState};
use crate::Real;

/// One row of the energy ledger.
///
/// Norms are box norms (`‖·‖₂` over `[0, L)³`). Derivative norms are
/// spectral and coincide with the equal-weight quadrature of the
/// corresponding derivative tensors.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord<T> {
    pub t: T,
    /// Step size since the previous record (0 for the first).
    pub dt: T,
    pub e_kin: T,
    pub e_frank: T,
    pub e_total: T,
    /// `‖∇u‖₂²`
    pub d_visc: T,
    /// `‖∂_t d + (u·∇)d‖₂²`
    pub d_dir: T,
    pub balance_residual: T,
    pub l2_u: T,
    pub l2_grad_d: T,
    pub l2_grad_u: T,
    pub l2_hess_d: T,
    pub l2_hess_u: T,
    pub l2_grad3_d: T,
    pub h1_u: T,
    pub h1_grad_d: T,
    /// `(‖u‖₂ + ‖∇d‖₂)(‖∇u‖₂ + ‖∇²d‖₂)` at this instant.
    pub m_instant: T,
    /// Running supremum of `m_instant`.
    pub m_running: T,
    /// `∫(|u|² + |∇d|² + 2W)`
    pub lyap0: T,
    /// `∫(|∇u|² + |∇²d|²)`
    pub lyap1: T,
    pub blowup_ind: T,
    pub unit_err: T,
    pub div_err: T,
    /// `d/dt ‖∇d‖₂²` from the semi-discrete right-hand side.
    pub rate_grad_d_sq: T,
    /// `d/dt (‖∇u‖₂² + ‖∇²d‖₂²)` from the semi-discrete right-hand side.
    pub rate_h1: T,
    /// `∫(|u|² + |∇d|²)|∇²d|`
    pub rhs_first: T,
    /// `∫(|u|² + |∇d|²)(|∇u|² + |∇²d|²)`
    pub rhs_second: T,
    /// Largest discrete Hölder ratio over `|u|`, `|∇d|`, `|∇u|`, `|∇²d|`.
    pub holder_max: T,
    /// `‖u‖₆ / ‖∇u‖₂`
    pub sobolev_u: T,
    /// `‖∇d‖₆ / ‖∇²d‖₂`
    pub sobolev_grad_d: T,
}

/// Column names of the CSV ledger, in order.
pub const CSV_COLUMNS: [&str; 17] = [
    "t",
    "e_kin",
    "e_frank",
    "e_total",
    "d_visc",
    "d_dir",
    "balance_residual",
    "l2_u",
    "l2_grad_d",
    "l2_grad_u",
    "l2_hess_d",
    "m",
    "lyap0",
    "lyap1",
    "blowup_ind",
    "unit_err",
    "div_err",
];

impl<T: Real> DiagnosticsRecord<T> {
    pub fn csv_row(&self) -> [T; 17] {
        [
            self.t,
            self.e_kin,
            self.e_frank,
            self.e_total,
            self.d_visc,
            self.d_dir,
            self.balance_residual,
            self.l2_u,
            self.l2_grad_d,
            self.l2_grad_u,
            self.l2_hess_d,
            self.m_running,
            self.lyap0,
            self.lyap1,
            self.blowup_ind,
            self.unit_err,
            self.div_err,
        ]
    }

    /// Total dissipation rate `‖∇u‖₂² + ‖∂_t d + (u·∇)d‖₂²`.
    pub fn dissipation(&self) -> T {
        self.d_visc + self.d_dir
    }
}

fn ratio<T: Real>(num: T, den: T) -> T {
    if den > T::zero() {
        num / den
    } else {
        T::zero()
    }
}

/// `2 Σ |k|^(2 order) Re(conj(a) b)` in physical normalization.
fn weighted_inner<T: Real>(solver: &Solver<T>, a: &[Coeffs<T>; 3], b: &[Coeffs<T>; 3], order: i32) -> T {
    let sp = solver.spectral();
    let ksq = sp.k_squared();
    let mut acc = T::zero();
    for c in 0..3 {
        for ((x, y), &k2) in a[c].iter().zip(&b[c]).zip(ksq) {
            acc += k2.powi(order) * (x.re * y.re + x.im * y.im);
        }
    }
    let grid = sp.grid();
    T::lit(2.0) * acc * grid.cell_volume() / T::count(grid.len())
}

/// Pointwise `|∇²f|²` for a vector field given its spectrum.
fn hessian_magnitude_sq<T: Real>(solver: &Solver<T>, hat: &[Coeffs<T>; 3]) -> Vec<T> {
    let sp = solver.spectral();
    let mut spectra = Vec::with_capacity(18);
    let mut weights = Vec::with_capacity(18);
    for c in hat {
        for i in 0..3 {
            let di = sp.derivative_coeffs(c, i);
            for j in i..3 {
                spectra.push(sp.derivative_coeffs(&di, j));
                weights.push(if i == j { T::one() } else { T::lit(2.0) });
            }
        }
    }
    let refs: Vec<&[_]> = spectra.iter().map(|s| s.as_slice()).collect();
    let fields = sp.inverse_many(&refs);
    let mut out = vec![T::zero(); sp.grid().len()];
    for (f, w) in fields.iter().zip(weights) {
        for (o, &v) in out.iter_mut().zip(f) {
            *o += w * v * v;
        }
    }
    out
}

/// Builds the record of a single state. `balance_residual`, `m_running`
/// and `dt` are left for [`crate::diagnostics::Ledger`] to fill.
pub fn compute_record<T: Real>(solver: &Solver<T>, s: &State<T>) -> Result<DiagnosticsRecord<T>> {
    let sp = solver.spectral();
    let grid = *sp.grid();
    let c = solver.frank();
    let ev = solver.evaluate(s)?;

    let u_sq = magnitude_sq(&s.u);
    let grad_d_sq = magnitude_sq(&ev.grad_d);
    let grad_u: TensorField<T> = sp.inverse_tensor(&sp.gradient_coeffs(&ev.u_hat));
    let grad_u_sq = magnitude_sq(&grad_u);
    let hess_d_sq = hessian_magnitude_sq(solver, &ev.d_hat);

    let w: Vec<T> = (0..grid.len())
        .map(|idx| energy_density(&PointState::new(s.d.at(idx), ev.grad_d.at(idx)), c))
        .collect();
    let e_frank = integrate(&grid, &w);
    let l2_u_sq = integrate(&grid, &u_sq);
    let e_kin = T::lit(0.5) * l2_u_sq;

    let power = |hat: &[Coeffs<T>; 3], order: u32| -> T { hat.iter().map(|h| sp.weighted_power(h, order)).sum() };
    let grad_d_l2_sq = power(&ev.d_hat, 1);
    let hess_d_l2_sq = power(&ev.d_hat, 2);
    let grad3_d_l2_sq = power(&ev.d_hat, 3);
    let grad_u_l2_sq = power(&ev.u_hat, 1);
    let hess_u_l2_sq = power(&ev.u_hat, 2);

    let d_dir = integrate(&grid, &magnitude_sq(&ev.tangential));

    let l2_u = l2_u_sq.sqrt();
    let l2_grad_d = grad_d_l2_sq.sqrt();
    let l2_grad_u = grad_u_l2_sq.sqrt();
    let l2_hess_d = hess_d_l2_sq.sqrt();
    let m_instant = (l2_u + l2_grad_d) * (l2_grad_u + l2_hess_d);

    let rate_grad_d_sq = weighted_inner(solver, &ev.d_hat, &ev.dd_dt, 1);
    let rate_h1 = weighted_inner(solver, &ev.u_hat, &ev.du_dt, 1) + weighted_inner(solver, &ev.d_hat, &ev.dd_dt, 2);

    let low: Vec<T> = u_sq.iter().zip(&grad_d_sq).map(|(a, b)| *a + *b).collect();
    let rhs_first_pts: Vec<T> = low.iter().zip(&hess_d_sq).map(|(l, h)| *l * h.sqrt()).collect();
    let rhs_second_pts: Vec<T> = low
        .iter()
        .zip(grad_u_sq.iter().zip(&hess_d_sq))
        .map(|(l, (gu, hd))| *l * (*gu + *hd))
        .collect();

    let holder_max = [&u_sq, &grad_d_sq, &grad_u_sq, &hess_d_sq]
        .iter()
        .map(|f| holder_ratio(&grid, f))
        .fold(T::zero(), T::max);

    let div_hat = sp.divergence_coeffs(&sp.forward_vector(&s.u));
    let div_max = sp.inverse(&div_hat).iter().fold(T::zero(), |m, v| m.max(v.abs()));

    Ok(DiagnosticsRecord {
        t: s.t,
        dt: T::zero(),
        e_kin,
        e_frank,
        e_total: e_kin + e_frank,
        d_visc: grad_u_l2_sq,
        d_dir,
        balance_residual: T::zero(),
        l2_u,
        l2_grad_d,
        l2_grad_u,
        l2_hess_d,
        l2_hess_u: hess_u_l2_sq.sqrt(),
        l2_grad3_d: grad3_d_l2_sq.sqrt(),
        h1_u: (l2_u_sq + grad_u_l2_sq).sqrt(),
        h1_grad_d: (grad_d_l2_sq + hess_d_l2_sq).sqrt(),
        m_instant,
        m_running: m_instant,
        lyap0: l2_u_sq + grad_d_l2_sq + T::lit(2.0) * e_frank,
        lyap1: grad_u_l2_sq + hess_d_l2_sq,
        blowup_ind: l2_u_sq + grad_u_l2_sq + grad_d_l2_sq + hess_d_l2_sq,
        unit_err: s.d.unit_error(),
        div_err: div_max / (T::one() + l2_u),
        rate_grad_d_sq,
        rate_h1,
        rhs_first: integrate(&grid, &rhs_first_pts),
        rhs_second: integrate(&grid, &rhs_second_pts),
        holder_max,
        sobolev_u: ratio(lp_norm_of_sq(&grid, &u_sq, 6), l2_grad_u),
        sobolev_grad_d: ratio(lp_norm_of_sq(&grid, &grad_d_sq, 6), l2_hess_d),
    })
}
