//! Shared helpers for the integration tests.
#![allow(dead_code)]

use std::path::PathBuf;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use utc::cli::Config;
use utc::linalg::{spectral_norm, spectral_radius, Mat};
use utc::plant::{BoundedNonlinearity, LtiPlant};
use utc::sim::Scenario;

pub const FIXTURES: [&str; 4] = [
    "admire_regulation.toml",
    "quad_regulation.toml",
    "quad_tracking.toml",
    "scalar_certify.toml",
];

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

pub fn load_fixture(name: &str) -> Config {
    Config::load(&fixture_path(name)).expect("fixture parses").0
}

pub fn fixture_scenario(name: &str) -> Scenario {
    load_fixture(name).scenario().expect("fixture builds")
}

pub fn gaussian_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

pub fn gaussian_mat(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Mat {
    Mat::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

/// Random matrix rescaled to the given spectral norm.
pub fn mat_with_norm(rng: &mut ChaCha8Rng, n: usize, norm: f64) -> Mat {
    let a = gaussian_mat(rng, n, n);
    let s = spectral_norm(&a);
    a.scale(norm / s.max(1e-300))
}

/// Random square matrix rescaled to the given spectral radius.
pub fn mat_with_radius(rng: &mut ChaCha8Rng, n: usize, radius: f64) -> Mat {
    loop {
        let a = gaussian_mat(rng, n, n);
        let rho = spectral_radius(&a);
        if rho > 1e-6 {
            return a.scale(radius / rho);
        }
    }
}

/// Random SPD matrix `G G^T + eps I`.
pub fn random_spd(rng: &mut ChaCha8Rng, n: usize, eps: f64) -> Mat {
    let g = gaussian_mat(rng, n, n);
    &(&g * &g.transpose()) + &Mat::identity(n).scale(eps)
}

/// Sinusoidal nonlinearity with a phase offset so the origin is not an
/// equilibrium; `||f(x)|| <= f_bar`.
pub fn shifted_sinusoid(rng: &mut ChaCha8Rng, n: usize, f_bar: f64) -> BoundedNonlinearity {
    let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.2..1.0)).collect();
    let scale = f_bar / utc::linalg::norm2(&raw);
    let beta: Vec<f64> = raw.iter().map(|b| b * scale).collect();
    let alpha: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..5.0)).collect();
    let phase: Vec<f64> = (0..n)
        .map(|_| rng.gen_range(0.0..std::f64::consts::TAU))
        .collect();
    BoundedNonlinearity::new(n, f_bar, "beta * sin(alpha * x + phase)", move |x| {
        x.iter()
            .enumerate()
            .map(|(i, xi)| beta[i] * (alpha[i] * xi + phase[i]).sin())
            .collect()
    })
}

/// Random LTI plant with `||A||_2 = a_norm` and a sinusoidal perturbation
/// bounded by `f_bar` (zero when `f_bar == 0`).
pub fn random_lti(
    rng: &mut ChaCha8Rng,
    n: usize,
    m: usize,
    p: usize,
    a_norm: f64,
    f_bar: f64,
) -> LtiPlant {
    let a = mat_with_norm(rng, n, a_norm);
    let b = gaussian_mat(rng, n, m);
    let c = gaussian_mat(rng, p, n);
    let f = if f_bar > 0.0 {
        shifted_sinusoid(rng, n, f_bar)
    } else {
        BoundedNonlinearity::zero(n)
    };
    LtiPlant::new(a, b, c, f, 0.0).expect("consistent shapes")
}

/// Independent N-step oracle: every intermediate state is formed from the
/// closed form `x_i = A^i x + (sum_{j<i} A^j) B u + sum_{j<i} A^{i-1-j} f(x_j)`
/// with explicit matrix powers. Returns `(x_N, g)` where `g` is the
/// accumulated nonlinearity.
pub fn unrolled_oracle(
    plant: &LtiPlant,
    x: &[f64],
    u: &[f64],
    n_steps: usize,
) -> (Vec<f64>, Vec<f64>) {
    let a = plant.a();
    let n = a.rows();
    let bu = plant.b().mul_vec(u);
    let powers: Vec<Mat> = (0..=n_steps).map(|i| a.pow(i)).collect();
    let mut fs: Vec<Vec<f64>> = Vec::new();
    let closed_form = |i: usize, fs: &[Vec<f64>]| -> (Vec<f64>, Vec<f64>) {
        let mut g = vec![0.0; n];
        for (j, fj) in fs.iter().enumerate().take(i) {
            let t = powers[i - 1 - j].mul_vec(fj);
            g.iter_mut().zip(&t).for_each(|(a, b)| *a += b);
        }
        let mut acc = Mat::zeros(n, n);
        for pw in powers.iter().take(i) {
            acc = &acc + pw;
        }
        let free = powers[i].mul_vec(x);
        let forced = acc.mul_vec(&bu);
        let xi = (0..n).map(|k| free[k] + forced[k] + g[k]).collect();
        (xi, g)
    };
    for i in 0..n_steps {
        let (xi, _) = closed_form(i, &fs);
        fs.push(plant.nonlinearity().evaluate(&xi));
    }
    closed_form(n_steps, &fs)
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
