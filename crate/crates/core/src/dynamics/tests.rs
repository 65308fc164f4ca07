use approx::assert_relative_eq;

use super::*;
use crate::diagnostics::{run_with_ledger, Ledger};
use crate::fields::{integrate, Grid, Spectral, VectorField};
use crate::frank::{self, FrankConstants, PointState};
use crate::init::bandlimited_random;
use crate::Error;

fn grid(n: usize) -> Grid<f64> {
    Grid::periodic_2pi(n).unwrap()
}

fn solver(n: usize, c: FrankConstants<f64>, dt: f64, t_end: f64) -> Solver<f64> {
    Solver::new(grid(n), SolverConfig::new(c, DtPolicy::Fixed(dt), t_end).unwrap()).unwrap()
}

fn unit_director(sp: &Spectral<f64>, amplitude: f64, seed: u64) -> VectorField<f64> {
    let psi = bandlimited_random(sp, 2, seed).unwrap();
    let raw = VectorField::from_fn(*sp.grid(), |_| [0.0, 0.0, 1.0]);
    let comps = std::array::from_fn(|c| raw.comps[c].iter().zip(&psi.comps[c]).map(|(a, p)| a + amplitude * p).collect());
    VectorField::from_components(*sp.grid(), comps).unwrap().normalized(0.5).unwrap()
}

fn solenoidal(sp: &Spectral<f64>, amplitude: f64, seed: u64) -> VectorField<f64> {
    let v = bandlimited_random(sp, 2, seed).unwrap();
    sp.leray_project(&v).unwrap().scaled(amplitude)
}

/// `d = (cos z, sin z, 0)`: a pure twist with `curl d = −d`.
fn twist(g: Grid<f64>) -> VectorField<f64> {
    VectorField::from_fn(g, |[_, _, z]| [z.cos(), z.sin(), 0.0])
}

fn general() -> FrankConstants<f64> {
    FrankConstants::new(1.0, 1.5, 2.0).unwrap()
}

fn dot_field(a: &VectorField<f64>, b: &VectorField<f64>) -> Vec<f64> {
    (0..a.grid.len()).map(|i| frank::dot(&a.at(i), &b.at(i))).collect()
}

#[test]
fn constant_director_has_no_forcing() {
    let g = grid(8);
    let s = solver(8, general(), 1e-3, 1.0);
    let d = VectorField::constant(g, [0.6, 0.0, 0.8]);
    assert_eq!(s.molecular_field(&d).unwrap().max_magnitude(), 0.0);
    assert_eq!(s.ericksen_stress_divergence(&d).unwrap().max_magnitude(), 0.0);
    let st = State::new(VectorField::zeros(g), d, 0.0).unwrap();
    assert_eq!(s.director_rhs(&st).unwrap().max_magnitude(), 0.0);
}

#[test]
fn equilibrium_is_a_fixed_point() {
    let g = grid(8);
    let d = VectorField::constant(g, [0.0, 0.6, 0.8]);
    let st = State::new(VectorField::zeros(g), d, 0.0).unwrap();
    for dt in [1e-4, 1e-2, 0.5] {
        let s = solver(8, general(), dt, 1.0);
        let out = s.step_with_dt(&st, dt.min(s.stability_limit(&st))).unwrap();
        assert_eq!(out.state.u, st.u);
        assert!(out.state.d.max_abs_diff(&st.d) <= 1e-16);
    }
}

#[test]
fn twist_closed_form() {
    let g = grid(16);
    let c = general();
    let s = solver(16, c, 1e-3, 1.0);
    let d = twist(g);
    // W_p[z][·] = −2 k2 (sin z, −cos z, 0), W_d = 2 k2 d, so h = −4 k2 d.
    let h = s.molecular_field(&d).unwrap();
    let expect = d.scaled(-4.0 * c.k2());
    assert!(h.max_abs_diff(&expect) <= 1e-10);
    assert!(s.ericksen_stress_divergence(&d).unwrap().max_magnitude() <= 1e-10);
    assert!(s.tangential_molecular_field(&d).unwrap().max_magnitude() <= 1e-10);
}

#[test]
fn one_constant_molecular_field_is_twice_the_laplacian_tangentially() {
    let n = 64;
    let g = grid(n);
    let k = 0.7;
    let s = solver(n, FrankConstants::isotropic(k).unwrap(), 1e-3, 1.0);
    let d = VectorField::from_fn(g, |[x, _, _]| {
        let th = 0.3 * x.sin();
        [th.sin(), 0.0, th.cos()]
    });
    let tangential_h = s.tangential_molecular_field(&d).unwrap();
    let lap = s.spectral().laplacian(&d).unwrap();
    let mut defect = VectorField::zeros(g);
    for i in 0..g.len() {
        let (dv, lv, hv) = (d.at(i), lap.at(i), tangential_h.at(i));
        let ld = frank::dot(&lv, &dv);
        defect.set(i, std::array::from_fn(|c| hv[c] - 2.0 * k * (lv[c] - ld * dv[c])));
    }
    let rel = crate::fields::lp_norm(&defect, 2).unwrap() / crate::fields::lp_norm(&lap, 2).unwrap();
    assert!(rel <= 1e-6, "relative defect {rel:e}");
}

/// `∂_j W_p[j][·] − W_d` assembled with centred differences only.
fn finite_difference_molecular_field(d: &VectorField<f64>, c: &FrankConstants<f64>) -> VectorField<f64> {
    let g = d.grid;
    let n = g.n();
    let h = g.spacing();
    let neighbour = |idx: usize, axis: usize, step: isize| {
        let mut p = g.coords(idx);
        p[axis] = (p[axis] as isize + step).rem_euclid(n as isize) as usize;
        g.index(p[0], p[1], p[2])
    };
    let mut wp: Vec<[[f64; 3]; 3]> = Vec::with_capacity(g.len());
    let mut wd: Vec<[f64; 3]> = Vec::with_capacity(g.len());
    for idx in 0..g.len() {
        let p: [[f64; 3]; 3] = std::array::from_fn(|j| {
            let (fw, bw) = (d.at(neighbour(idx, j, 1)), d.at(neighbour(idx, j, -1)));
            std::array::from_fn(|k| (fw[k] - bw[k]) / (2.0 * h))
        });
        let ps = PointState::new(d.at(idx), p);
        wp.push(frank::w_p(&ps, c));
        wd.push(frank::w_d(&ps, c));
    }
    let mut out = VectorField::zeros(g);
    for idx in 0..g.len() {
        let v = std::array::from_fn(|k| {
            (0..3)
                .map(|j| (wp[neighbour(idx, j, 1)][j][k] - wp[neighbour(idx, j, -1)][j][k]) / (2.0 * h))
                .sum::<f64>()
                - wd[idx][k]
        });
        out.set(idx, v);
    }
    out
}

#[test]
fn molecular_field_matches_finite_differences_at_second_order() {
    let c = general();
    let smooth = |g: Grid<f64>| {
        VectorField::from_fn(g, |[x, y, z]| {
            let th = 0.4 * (x + y).sin();
            let ph = 0.3 * z.cos();
            [th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos()]
        })
    };
    let errors: Vec<f64> = [16usize, 32]
        .iter()
        .map(|&n| {
            let s = solver(n, c, 1e-3, 1.0);
            let d = smooth(grid(n));
            let spectral = s.molecular_field(&d).unwrap();
            finite_difference_molecular_field(&d, &c).max_abs_diff(&spectral)
        })
        .collect();
    let order = (errors[0] / errors[1]).log2();
    assert!(order > 1.8 && order < 2.3, "errors {errors:?}, observed order {order}");
}

#[test]
fn director_rhs_is_tangent_to_unit_directors() {
    let n = 32;
    let s = solver(n, general(), 1e-3, 1.0);
    let sp = s.spectral();
    let d = unit_director(sp, 0.1, 3);
    let u = solenoidal(sp, 0.5, 4);
    let st = State::new(u.clone(), d.clone(), 0.0).unwrap();
    let rhs = s.director_rhs(&st).unwrap();
    let worst = dot_field(&rhs, &d).iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let h = s.molecular_field(&d).unwrap();
    let grad = sp.gradient(&d).unwrap();
    let grad_max = (0..grad.grid.len()).map(|i| frank::frobenius_sq(&grad.at(i)).sqrt()).fold(0.0, f64::max);
    let scale = h.max_magnitude() + u.max_magnitude() * grad_max;
    assert!(worst <= 1e-10 * scale, "|rhs·d| = {worst:e}, scale {scale:e}");
}

#[test]
fn uniform_flow_advects() {
    let g = grid(16);
    let s = solver(16, general(), 1e-3, 1.0);
    let d = VectorField::from_fn(g, |[x, _, _]| {
        let th = 0.3 * x.sin();
        [th.sin(), 0.0, th.cos()]
    });
    let u = VectorField::constant(g, [1.0, 0.0, 0.0]);
    let still = s.director_rhs(&State::new(VectorField::zeros(g), d.clone(), 0.0).unwrap()).unwrap();
    let moving = s.director_rhs(&State::new(u, d.clone(), 0.0).unwrap()).unwrap();
    let dx = s.spectral().gradient(&d).unwrap();
    for i in 0..g.len() {
        for c in 0..3 {
            assert!((moving.comps[c][i] - still.comps[c][i] + dx.comps[0][c][i]).abs() <= 1e-10);
        }
    }
}

#[test]
fn elastic_work_cancels_between_equations() {
    let n = 32;
    let s = solver(n, general(), 1e-3, 1.0);
    let sp = s.spectral();
    let g = *sp.grid();
    let d = unit_director(sp, 0.15, 7);
    let u = solenoidal(sp, 1.0, 8);
    let force = s.ericksen_stress_divergence(&d).unwrap();
    let h = s.molecular_field(&d).unwrap();
    let grad = sp.gradient(&d).unwrap();
    let mut advection = VectorField::zeros(g);
    for i in 0..g.len() {
        let (uv, p) = (u.at(i), grad.at(i));
        advection.set(i, std::array::from_fn(|k| uv[0] * p[0][k] + uv[1] * p[1][k] + uv[2] * p[2][k]));
    }
    let a = integrate(&g, &dot_field(&force, &u));
    let b = integrate(&g, &dot_field(&advection, &h));
    assert!((a + b).abs() <= 1e-8 * (a.abs() + b.abs()), "{a} vs {b}");
}

#[test]
fn step_preserves_the_constraints() {
    let n = 16;
    let s = solver(n, general(), 2e-3, 1.0);
    let sp = s.spectral();
    let st = State::new(solenoidal(sp, 0.5, 1), unit_director(sp, 0.3, 2), 0.0).unwrap();
    let mut cur = st;
    for _ in 0..5 {
        cur = s.step(&cur).unwrap().state;
        assert!(cur.unit_error() <= 1e-12);
        assert!(cur.divergence_error(sp).unwrap() <= 1e-10);
        cur.validate(sp, 1e-12, 1e-10).unwrap();
    }
    assert_relative_eq!(cur.t, 0.01, max_relative = 1e-12);
}

#[test]
fn unnormalized_step_drifts_at_second_order() {
    let n = 16;
    let s = solver(n, FrankConstants::isotropic(1.0).unwrap(), 1e-3, 1.0);
    let sp = s.spectral();
    let st = State::new(solenoidal(sp, 0.5, 5), unit_director(sp, 0.3, 6), 0.0).unwrap();
    let drift = |dt: f64| {
        let raw = s.unnormalized_step(&st, dt).unwrap();
        (0..raw.d.grid.len()).map(|i| (frank::dot(&raw.d.at(i), &raw.d.at(i)) - 1.0).abs()).fold(0.0, f64::max)
    };
    let (a, b) = (drift(2e-3), drift(1e-3));
    let order = (a / b).log2();
    assert!(order > 1.7, "drift {a:e} -> {b:e}, order {order}");
}

#[test]
fn time_stepping_is_second_order() {
    let n = 16;
    let c = FrankConstants::new(1.0, 1.2, 1.4).unwrap();
    let sp = Spectral::new(grid(n));
    let s0 = State::new(solenoidal(&sp, 0.5, 9), unit_director(&sp, 0.3, 10), 0.0).unwrap();
    let t_end = 0.02;
    let run = |dt: f64| {
        let s = solver(n, c, dt, t_end);
        s.simulate(&s0, |_, _| Ok(())).unwrap().state
    };
    let reference = run(t_end / 256.0);
    let err = |st: &State<f64>| st.u.max_abs_diff(&reference.u).max(st.d.max_abs_diff(&reference.d));
    let e1 = err(&run(t_end / 16.0));
    let e2 = err(&run(t_end / 32.0));
    let order = (e1 / e2).log2();
    assert!(order > 1.8 && order < 2.3, "errors {e1:e} {e2:e}, order {order}");
}

#[test]
fn oversized_steps_are_halved() {
    let n = 16;
    let s = solver(n, general(), 1.0, 1.0);
    let sp = s.spectral();
    let st = State::new(solenoidal(sp, 0.5, 1), unit_director(sp, 0.3, 2), 0.0).unwrap();
    let limit = s.stability_limit(&st);
    let out = s.step(&st).unwrap();
    assert!(out.halvings > 0 && out.dt <= limit);
    assert_relative_eq!(out.dt, 0.5f64.powi(out.halvings as i32));

    let mut cfg = s.config().clone();
    cfg.max_halvings = 1;
    let strict = Solver::new(grid(n), cfg).unwrap();
    assert!(matches!(strict.step(&st), Err(Error::CflViolation { .. })));
}

#[test]
fn adaptive_policy_respects_the_stability_limit() {
    let g = grid(16);
    let mut cfg = SolverConfig::new(general(), DtPolicy::Adaptive { max_dt: None }, 1.0).unwrap();
    cfg.cfl_safety = 0.4;
    let s = Solver::new(g, cfg).unwrap();
    let st = State::new(solenoidal(s.spectral(), 2.0, 1), unit_director(s.spectral(), 0.3, 2), 0.0).unwrap();
    let h = g.spacing();
    let expect = 0.4 * (h / st.u.max_magnitude()).min(h * h / 8.0);
    assert_relative_eq!(s.policy_dt(&st), expect, max_relative = 1e-14);
}

#[test]
fn config_validation() {
    let c = general();
    assert!(SolverConfig::new(c, DtPolicy::Fixed(0.0), 1.0).is_err());
    assert!(SolverConfig::new(c, DtPolicy::Fixed(1e-3), -1.0).is_err());
    let mut cfg = SolverConfig::new(c, DtPolicy::Fixed(1e-3), 1.0).unwrap();
    cfg.cfl_safety = 1.5;
    assert!(cfg.validate().is_err());
    cfg.cfl_safety = 1.0;
    cfg.output_every = 0;
    assert!(cfg.validate().is_err());
}

#[test]
fn state_rejects_mismatched_grids_and_broken_invariants() {
    let d = VectorField::constant(grid(8), [0.0, 0.0, 1.0]);
    assert!(matches!(State::new(VectorField::zeros(grid(16)), d.clone(), 0.0), Err(Error::GridMismatch)));
    let sp = Spectral::new(grid(8));
    let long = State::new(VectorField::zeros(grid(8)), d.scaled(2.0), 0.0).unwrap();
    assert!(long.validate(&sp, 1e-12, 1e-10).is_err());
    let shear = VectorField::from_fn(grid(8), |[x, _, _]| [x.sin(), 0.0, 0.0]);
    let compressible = State::new(shear, d, 0.0).unwrap();
    assert!(compressible.validate(&sp, 1e-12, 1e-10).is_err());
}

#[test]
fn zero_length_run_returns_the_initial_state() {
    let g = grid(8);
    let s = solver(8, general(), 1e-3, 0.0);
    let sp = s.spectral();
    let s0 = State::new(solenoidal(sp, 0.3, 1), VectorField::constant(g, [0.0, 0.0, 1.0]), 0.0).unwrap();
    let mut calls = 0;
    let out = s.simulate(&s0, |_, _| {
        calls += 1;
        Ok(())
    })
    .unwrap();
    assert_eq!(calls, 1);
    assert_eq!(out.steps, 0);
    assert_eq!(out.state, s0);
    assert_eq!(out.termination, Termination::Completed);
}

#[test]
fn simulate_emits_at_cadence_and_at_the_end() {
    let g = grid(8);
    let mut cfg = SolverConfig::new(general(), DtPolicy::Fixed(1e-3), 0.0075).unwrap();
    cfg.output_every = 3;
    let s = Solver::new(g, cfg).unwrap();
    let s0 = State::new(solenoidal(s.spectral(), 0.3, 1), unit_director(s.spectral(), 0.2, 3), 0.0).unwrap();
    let mut seen = Vec::new();
    let out = s.simulate(&s0, |st, step| {
        seen.push((step, st.t));
        Ok(())
    })
    .unwrap();
    assert_eq!(out.steps, 8);
    assert_eq!(seen.iter().map(|p| p.0).collect::<Vec<_>>(), vec![0, 3, 6, 8]);
    assert_relative_eq!(seen.last().unwrap().1, 0.0075, max_relative = 1e-12);
}

#[test]
fn pressure_has_zero_mean() {
    let s = solver(16, general(), 1e-3, 1.0);
    let sp = s.spectral();
    let st = State::new(solenoidal(sp, 0.5, 3), unit_director(sp, 0.3, 4), 0.0).unwrap();
    let p = s.pressure(&st).unwrap();
    let mean = p.values.iter().sum::<f64>() / p.values.len() as f64;
    assert!(mean.abs() <= 1e-13 * p.max_abs().max(1.0));
    assert!(p.max_abs() > 0.0);
}

#[test]
fn runs_are_deterministic() {
    let s = solver(8, general(), 1e-3, 0.005);
    let sp = s.spectral();
    let s0 = State::new(solenoidal(sp, 0.4, 1), unit_director(sp, 0.3, 2), 0.0).unwrap();
    let csv = || {
        let (_, ledger): (_, Ledger<f64>) = run_with_ledger(&s, &s0).unwrap();
        let mut out = Vec::new();
        ledger.write_csv(&mut out).unwrap();
        out
    };
    assert_eq!(csv(), csv());
}

#[test]
fn single_precision_step() {
    let g = Grid::<f32>::periodic_2pi(8).unwrap();
    let cfg = SolverConfig::new(FrankConstants::isotropic(1.0f32).unwrap(), DtPolicy::Fixed(1e-3), 1.0).unwrap();
    let s = Solver::new(g, cfg).unwrap();
    let d = VectorField::from_fn(g, |[x, _, _]| {
        let th = 0.3 * x.sin();
        [th.sin(), 0.0, th.cos()]
    });
    let st = State::new(VectorField::zeros(g), d, 0.0).unwrap();
    let next = s.step(&st).unwrap().state;
    assert!(next.unit_error() <= 1e-6);
}
