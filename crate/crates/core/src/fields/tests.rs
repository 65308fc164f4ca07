use std::f64::consts::PI;

use approx::assert_relative_eq;
use proptest::prelude::*;

use super::*;
use crate::init::bandlimited_random;
use crate::Error;

fn grid(n: usize) -> Grid<f64> {
    Grid::periodic_2pi(n).unwrap()
}

fn random_vector(n: usize, seed: u64) -> VectorField<f64> {
    let sp = Spectral::new(grid(n));
    bandlimited_random(&sp, n / 4, seed).unwrap()
}

fn shift_x(v: &[f64], g: &Grid<f64>) -> Vec<f64> {
    let n = g.n();
    (0..g.len())
        .map(|idx| {
            let [x, y, z] = g.coords(idx);
            v[g.index((x + n - 1) % n, y, z)]
        })
        .collect()
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

#[test]
fn gradient_of_constant_vanishes() {
    let g = grid(16);
    let sp = Spectral::new(g);
    let grad = sp.gradient_scalar(&ScalarField::constant(g, 3.5)).unwrap();
    assert!(grad.max_magnitude() < 1e-14);
}

#[test]
fn gradient_of_single_mode_is_exact() {
    let g = Grid::new(16, 3.0).unwrap();
    let sp = Spectral::new(g);
    let k = 2.0 * PI / 3.0;
    let f = ScalarField::from_fn(g, |[x, _, _]| (k * x).sin());
    let grad = sp.gradient_scalar(&f).unwrap();
    let expect: Vec<f64> = (0..g.len())
        .map(|i| {
            let [ix, iy, iz] = g.coords(i);
            k * (k * g.position(ix, iy, iz)[0]).cos()
        })
        .collect();
    assert!(max_diff(&grad.comps[0], &expect) <= 1e-12);
    assert!(grad.comps[1].iter().chain(&grad.comps[2]).all(|v| v.abs() <= 1e-12));
}

#[test]
fn divergence_of_gradient_is_laplacian() {
    let g = grid(16);
    let sp = Spectral::new(g);
    let f = random_vector(16, 3).component(0);
    let div_grad = sp.divergence(&sp.gradient_scalar(&f).unwrap()).unwrap();
    let lap = sp.laplacian_scalar(&f).unwrap();
    assert!(max_diff(&div_grad.values, &lap.values) <= 1e-11);
}

#[test]
fn curl_of_gradient_vanishes() {
    let g = grid(16);
    let sp = Spectral::new(g);
    let f = ScalarField::from_fn(g, |[x, _, _]| x.sin());
    let c = sp.curl(&sp.gradient_scalar(&f).unwrap()).unwrap();
    assert!(c.max_magnitude() <= 1e-12);
}

#[test]
fn shear_is_divergence_free() {
    let g = grid(16);
    let sp = Spectral::new(g);
    let v = VectorField::from_fn(g, |[_, y, _]| [y.sin(), 0.0, 0.0]);
    assert!(sp.divergence(&v).unwrap().max_abs() <= 1e-12);
}

#[test]
fn divergence_of_curl_vanishes() {
    let g = grid(16);
    let sp = Spectral::new(g);
    let w = random_vector(16, 11);
    assert!(sp.divergence(&sp.curl(&w).unwrap()).unwrap().max_abs() <= 1e-11);
}

#[test]
fn leray_annihilates_gradients() {
    let g = grid(16);
    let sp = Spectral::new(g);
    let phi = ScalarField::from_fn(g, |[x, y, z]| (x + 2.0 * y).sin() * z.cos());
    let v = sp.gradient_scalar(&phi).unwrap();
    assert!(sp.leray_project(&v).unwrap().max_magnitude() <= 1e-12);
}

#[test]
fn leray_fixes_solenoidal_fields_and_is_idempotent() {
    let g = grid(16);
    let sp = Spectral::new(g);
    let w = random_vector(16, 5);
    let sol = sp.curl(&w).unwrap();
    assert!(sp.leray_project(&sol).unwrap().max_abs_diff(&sol) <= 1e-12);

    let once = sp.leray_project(&w).unwrap();
    let twice = sp.leray_project(&once).unwrap();
    assert!(twice.max_abs_diff(&once) <= 1e-12);
    let rel = sp.divergence(&once).unwrap().max_abs() / lp_norm(&w, 2).unwrap();
    assert!(rel <= 1e-11, "divergence after projection {rel:e}");
}

#[test]
fn leray_keeps_the_mean() {
    let g = grid(8);
    let sp = Spectral::new(g);
    let v = VectorField::from_fn(g, |[x, y, _]| [1.0 + x.sin(), -2.0 + y.cos(), 0.5]);
    let p = sp.leray_project(&v).unwrap();
    for c in 0..3 {
        let mean = |f: &[f64]| f.iter().sum::<f64>() / f.len() as f64;
        assert_relative_eq!(mean(&p.comps[c]), mean(&v.comps[c]), epsilon = 1e-13);
    }
}

#[test]
fn l2_norm_of_sine() {
    let g = grid(16);
    let f = ScalarField::from_fn(g, |[x, _, _]| x.sin());
    let expect = (2.0 * PI).powf(1.5) / 2f64.sqrt();
    assert_relative_eq!(lp_norm(&f, 2).unwrap(), expect, max_relative = 1e-12);
}

#[test]
fn lp_norm_of_constant() {
    let g = Grid::new(8, 1.7).unwrap();
    let f = ScalarField::constant(g, -2.0);
    for p in [2, 4, 6] {
        assert_relative_eq!(lp_norm(&f, p).unwrap(), 2.0 * 1.7f64.powf(3.0 / p as f64), max_relative = 1e-13);
    }
}

#[test]
fn lp_norm_rejects_non_finite() {
    let g = grid(8);
    let mut f = ScalarField::constant(g, 1.0);
    f.values[3] = f64::NAN;
    assert!(matches!(lp_norm(&f, 2), Err(Error::NonFinite(_))));
    assert!(f.validate().is_err());
}

#[test]
fn seminorms_of_single_mode() {
    let g = grid(16);
    let sp = Spectral::new(g);
    let f = ScalarField::from_fn(g, |[_, _, z]| (2.0 * z).cos());
    let base = (2.0 * PI).powf(1.5) / 2f64.sqrt();
    for order in 0..=3u32 {
        let expect = base * 2f64.powi(order as i32);
        assert_relative_eq!(sp.h_seminorm_scalar(&f, order).unwrap(), expect, max_relative = 1e-12);
    }
}

#[test]
fn seminorm_matches_quadrature_of_gradient() {
    let g = grid(16);
    let sp = Spectral::new(g);
    let v = random_vector(16, 21);
    let grad = sp.gradient(&v).unwrap();
    assert_relative_eq!(sp.h_seminorm(&v, 1).unwrap(), lp_norm(&grad, 2).unwrap(), max_relative = 1e-12);
}

#[test]
fn parseval() {
    let g = grid(16);
    let sp = Spectral::new(g);
    let v = random_vector(16, 8);
    let physical = lp_norm(&v, 2).unwrap();
    let spectral: f64 = v.comps.iter().map(|c| sp.weighted_power(&sp.forward(c), 0)).sum::<f64>().sqrt();
    assert_relative_eq!(physical, spectral, max_relative = 1e-11);
}

#[test]
fn operators_commute_with_translation() {
    let g = grid(16);
    let sp = Spectral::new(g);
    let v = random_vector(16, 13);
    let shifted = VectorField::from_components(g, v.comps.clone().map(|c| shift_x(&c, &g))).unwrap();

    let grad = sp.gradient(&v).unwrap();
    let grad_s = sp.gradient(&shifted).unwrap();
    for j in 0..3 {
        for k in 0..3 {
            assert!(max_diff(&shift_x(&grad.comps[j][k], &g), &grad_s.comps[j][k]) <= 1e-11);
        }
    }
    let curl = sp.curl(&v).unwrap();
    let curl_s = sp.curl(&shifted).unwrap();
    let lap = sp.laplacian(&v).unwrap();
    let lap_s = sp.laplacian(&shifted).unwrap();
    let proj = sp.leray_project(&v).unwrap();
    let proj_s = sp.leray_project(&shifted).unwrap();
    for c in 0..3 {
        assert!(max_diff(&shift_x(&curl.comps[c], &g), &curl_s.comps[c]) <= 1e-11);
        assert!(max_diff(&shift_x(&lap.comps[c], &g), &lap_s.comps[c]) <= 1e-10);
        assert!(max_diff(&shift_x(&proj.comps[c], &g), &proj_s.comps[c]) <= 1e-11);
    }
    let div = sp.divergence(&v).unwrap();
    let div_s = sp.divergence(&shifted).unwrap();
    assert!(max_diff(&shift_x(&div.values, &g), &div_s.values) <= 1e-11);
}

#[test]
fn null_lagrangian_identity() {
    let g = grid(16);
    let sp = Spectral::new(g);
    for seed in [1, 2, 3] {
        let v = random_vector(16, seed);
        let div = sp.divergence(&v).unwrap();
        let curl = sp.curl(&v).unwrap();
        let lhs = integrate(&g, &magnitude_sq(&div)) + integrate(&g, &magnitude_sq(&curl));
        let rhs = integrate(&g, &magnitude_sq(&sp.gradient(&v).unwrap()));
        assert_relative_eq!(lhs, rhs, max_relative = 1e-10);
    }
}

#[test]
fn spectra_stay_hermitian() {
    let g = grid(8);
    let sp = Spectral::new(g);
    let v = random_vector(8, 4);
    let f = sp.divergence(&sp.curl(&v).unwrap()).unwrap();
    let s = sp.to_spectral(&v.component(1)).unwrap();
    let scale = s.coeffs.iter().fold(0.0f64, |m, c| m.max(c.norm()));
    assert!(s.hermitian_defect() <= 1e-13 * scale);
    let s = sp.dealias(&sp.to_spectral(&f).unwrap()).unwrap();
    assert!(s.hermitian_defect() <= 1e-12);
}

#[test]
fn dealias_keeps_resolved_modes_and_drops_the_rest() {
    let g = grid(12);
    let sp = Spectral::new(g);
    let low = ScalarField::from_fn(g, |[x, y, z]| (4.0 * x).sin() + (3.0 * y + z).cos());
    let s = sp.to_spectral(&low).unwrap();
    let kept = sp.to_physical(&sp.dealias(&s).unwrap()).unwrap();
    assert!(max_diff(&kept.values, &low.values) <= 1e-13);

    let high = ScalarField::from_fn(g, |[x, _, _]| (5.0 * x).cos());
    let gone = sp.to_physical(&sp.dealias(&sp.to_spectral(&high).unwrap()).unwrap()).unwrap();
    assert!(gone.max_abs() <= 1e-14);
}

#[test]
fn resample_same_size_is_identity() {
    let v = random_vector(8, 9);
    assert_eq!(resample(&v, 8).unwrap(), v);
}

#[test]
fn resample_round_trip() {
    let v = random_vector(16, 10);
    let up = resample(&v, 32).unwrap();
    let back = resample(&up, 16).unwrap();
    assert!(back.max_abs_diff(&v) <= 1e-12);
}

#[test]
fn resample_is_exact_on_shared_modes() {
    let g = grid(16);
    let f = ScalarField::from_fn(g, |[x, y, z]| (2.0 * x - y).sin() + (3.0 * z).cos());
    let coarse = resample_scalar(&f, 8).unwrap();
    let expect = ScalarField::from_fn(coarse.grid, |[x, y, z]| (2.0 * x - y).sin() + (3.0 * z).cos());
    assert!(max_diff(&coarse.values, &expect.values) <= 1e-13);
    let fine = resample_scalar(&f, 24).unwrap();
    let expect = ScalarField::from_fn(fine.grid, |[x, y, z]| (2.0 * x - y).sin() + (3.0 * z).cos());
    assert!(max_diff(&fine.values, &expect.values) <= 1e-13);
}

#[test]
fn resample_rejects_bad_sizes() {
    let v = random_vector(8, 1);
    assert!(matches!(resample(&v, 7), Err(Error::InvalidGrid(_))));
    assert!(matches!(resample(&v, 6), Err(Error::InvalidGrid(_))));
}

#[test]
fn grid_mismatch_is_reported() {
    let sp = Spectral::new(grid(8));
    let v = VectorField::zeros(grid(16));
    assert!(matches!(sp.gradient(&v), Err(Error::GridMismatch)));
}

#[test]
fn snapshot_round_trip_is_bit_exact() {
    let dir = tempfile::tempdir().unwrap();
    let v = random_vector(8, 17);
    let meta = io::write_vector_snapshot(dir.path(), "d", &v, 0.125).unwrap();
    assert_eq!(meta.components, 3);
    let (back_meta, back) = io::read_vector_snapshot(dir.path(), "d").unwrap();
    assert_eq!(back_meta, meta);
    for c in 0..3 {
        assert!(v.comps[c].iter().zip(&back.comps[c]).all(|(a, b)| a.to_bits() == b.to_bits()));
    }
}

#[test]
fn truncated_snapshot_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let v = random_vector(8, 17);
    io::write_vector_snapshot(dir.path(), "u", &v, 0.0).unwrap();
    let (bin, _) = io::snapshot_paths(dir.path(), "u");
    let bytes = std::fs::read(&bin).unwrap();
    std::fs::write(&bin, &bytes[..bytes.len() - 8]).unwrap();
    assert!(io::read_vector_snapshot(dir.path(), "u").is_err());
}

#[test]
fn single_precision_gradient() {
    let g = Grid::<f32>::periodic_2pi(16).unwrap();
    let sp = Spectral::new(g);
    let f = ScalarField::from_fn(g, |[x, _, _]| x.sin());
    let grad = sp.gradient_scalar(&f).unwrap();
    for i in 0..g.len() {
        let [ix, iy, iz] = g.coords(i);
        assert!((grad.comps[0][i] - g.position(ix, iy, iz)[0].cos()).abs() < 1e-5);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn discrete_holder(values in prop::collection::vec(-10.0f64..10.0, 512)) {
        let g = grid(8);
        let sq: Vec<f64> = values.iter().map(|v| v * v).collect();
        prop_assert!(holder_ratio(&g, &sq) <= 1.0 + 1e-12);
    }

    #[test]
    fn projection_is_idempotent(seed in any::<u64>()) {
        let g = grid(8);
        let sp = Spectral::new(g);
        let v = bandlimited_random(&sp, 2, seed).unwrap();
        let once = sp.leray_project(&v).unwrap();
        prop_assert!(sp.leray_project(&once).unwrap().max_abs_diff(&once) <= 1e-12);
    }

    #[test]
    fn laplacian_is_divergence_of_gradient(seed in any::<u64>()) {
        let g = grid(8);
        let sp = Spectral::new(g);
        let v = bandlimited_random(&sp, 2, seed).unwrap();
        let lap = sp.laplacian(&v).unwrap();
        let grad = sp.gradient(&v).unwrap();
        for k in 0..3 {
            let column = VectorField::from_components(g, std::array::from_fn(|j| grad.comps[j][k].clone())).unwrap();
            let dg = sp.divergence(&column).unwrap();
            prop_assert!(max_diff(&dg.values, &lap.comps[k]) <= 1e-11);
        }
    }
}
