//! Values frozen from an independent NumPy evaluation of the transform,
//! coefficient and kernel formulas, plus published figures.

use num_complex::Complex64;
use otfs_dse::channel::{doppler_bounds, PathParams};
use otfs_dse::estimation::{build_sensing_tf, omp_estimate, AtomLayout, StopRule};
use otfs_dse::io_analysis::{dd_kernel_ideal, dirichlet, max_squint_phase, tf_coeff_ideal};
use otfs_dse::link::NoiseSpec;
use otfs_dse::params::kmh_to_mps;
use otfs_dse::transform::isfft;
use otfs_dse::{DdGrid, OtfsParams};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn assert_close(got: Complex64, want: Complex64, tol: f64, what: &str) {
    let err = (got - want).norm();
    assert!(
        err <= tol * want.norm().max(1e-3),
        "{what}: got {got}, want {want}, |err| = {err:e}"
    );
}

#[test]
fn isfft_of_a_4x8_grid() {
    let params = OtfsParams::new(8, 4, 15e3, 4e9, 2, 1.5).unwrap();
    let x = DdGrid::from_fn(&params, |k, l| {
        let (k, l) = (k as f64, l as f64);
        c((0.3 * k + 0.7 * l * l).cos(), (1.1 * k * l - 0.2 * l).sin())
    });
    let tf = isfft(&x).unwrap();
    for (n, m, want) in [
        (0, 0, c(1.5537060591418492, -0.6512725301051917)),
        (1, 3, c(0.39799407254013586, 0.5388667190809269)),
        (3, 7, c(0.29327227776607956, 0.5149788041735122)),
    ] {
        assert_close(tf.grid().row(n)[m], want, 1e-12, &format!("X[{n},{m}]"));
    }
}

fn moving_path() -> (PathParams, OtfsParams) {
    let params = OtfsParams::new(16, 8, 15e3, 4e9, 4, 1.2).unwrap();
    let path = PathParams::new(c(0.8, 0.3), 3.0, 1.0, &params).unwrap();
    (path, params)
}

#[test]
fn ideal_tf_coefficient_of_a_moving_path() {
    let (path, params) = moving_path();
    for (n, m, want) in [
        (0, 0, c(0.7473217439322345, 0.4141370868101106)),
        (5, 11, c(-0.5318407180511623, -0.6686888411274001)),
        (7, 15, c(0.5317412549191272, 0.6687679369127328)),
    ] {
        assert_close(tf_coeff_ideal(&path, n, m, &params), want, 1e-9, &format!("H[{n},{m}]"));
    }
}

#[test]
fn ideal_dd_kernel_of_a_moving_path() {
    let (path, params) = moving_path();
    for (k, l, want, tol) in [
        (1, 3, c(0.7472900435538428, 0.41419510775343776), 1e-10),
        (2, 3, c(-1.5351634764515645e-05, -1.929824987079529e-05), 1e-6),
        (1, 4, c(2.1497899715704592e-05, 6.880694272588044e-06), 1e-6),
    ] {
        let got = dd_kernel_ideal(&path, k, l, &params).unwrap();
        let err = (got - want).norm();
        assert!(err <= tol * want.norm(), "h[{k},{l}]: got {got}, want {want}");
    }
    let far = dd_kernel_ideal(&path, 6, 10, &params).unwrap();
    assert!(far.norm() < 1e-9, "{far}");
}

#[test]
fn dirichlet_ratio_values() {
    for (x, len, want) in [
        (0.3, 16, 0.04540890800033509),
        (2.5, 7, -0.14285714285714285),
        (-1.3, 8, -0.14694631307311823),
    ] {
        let got = dirichlet(x, len);
        assert!((got - want).abs() < 1e-13, "D({x}, {len}) = {got}, want {want}");
    }
    assert_eq!(dirichlet(-1.25, 8), 0.0);
}

#[test]
fn omp_recovers_three_atoms_like_a_least_squares_reference() {
    let params = OtfsParams::new(16, 8, 15e3, 4e9, 4, 2.5).unwrap();
    let dict = build_sensing_tf(&params, AtomLayout::new(2, 4, &params).unwrap(), c(2.0, 0.0));
    let mut y: Vec<Complex64> = (0..params.grid_size())
        .map(|i| {
            let i = i as f64;
            0.01 * c(i.sin(), (2.0 * i).cos())
        })
        .collect();
    for (j, g) in [(7, c(0.5, -0.2)), (18, c(-0.3, 0.4)), (11, c(0.05, 0.02))] {
        for (yi, a) in y.iter_mut().zip(dict.col(j)) {
            *yi += g * a;
        }
    }
    let est = omp_estimate(&y, &dict, StopRule::iterations(3)).unwrap();
    assert_eq!(est.support, vec![7, 18, 11]);
    for (got, want) in est
        .residual_norms
        .iter()
        .zip([5.689068296657636, 0.6258233192499247, 0.11308361132755607])
    {
        assert!((got - want).abs() < 1e-10 * want, "residual {got} vs {want}");
    }
    for (got, want) in est.beta_hat.iter().zip([
        c(0.5001010443210439, -0.19998226230912894),
        c(-0.29981236501120556, 0.3998859173461704),
        c(0.05058300556276096, 0.020031410104772884),
    ]) {
        assert_close(*got, want, 1e-10, "gain");
    }
}

#[test]
fn noise_variance_from_ebn0() {
    let qpsk = NoiseSpec::from_ebn0(10.0, 1.0, 2).unwrap();
    assert!((qpsk.sigma2() - 0.05).abs() < 1e-15);
    let qam16 = NoiseSpec::from_ebn0(20.0, 1.0, 4).unwrap();
    assert!((qam16.sigma2() - 0.0025).abs() < 1e-15);
    assert!((qam16.ebn0_db(1.0, 4) - 20.0).abs() < 1e-12);
}

#[test]
fn squint_phase_at_2048_subcarriers_and_500_kmh_is_about_quarter_pi() {
    let params = OtfsParams::new(2048, 128, 15e3, 4e9, 20, 10.0).unwrap();
    let bounds = doppler_bounds(kmh_to_mps(500.0), &params);
    let phase = max_squint_phase(&params, bounds.max_doppler_hz) / std::f64::consts::PI;
    assert!((phase - 0.24).abs() < 0.005, "{phase}");
}
