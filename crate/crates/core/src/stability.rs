//! Lyapunov certificate for the fixed-gain closed loop.
//!
//! With the gain frozen at `K`, the controller applied to an LTI plant with a
//! bounded nonlinearity becomes `a+ = Z a + D` on the augmented vector
//! `a = [x; u_prev]`. When `Z` is Schur stable the Stein solution `P` of
//! `Z^T P Z - P = -I` gives `V = a^T P a`, which strictly decreases whenever
//! `||a|| > R`, where `R` depends only on `||Z||`, `lambda_max(P)` and the bound
//! `D_bar` on the disturbance term.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use thiserror::Error;

use crate::controller::{unroll, NStepUnroll};
use crate::linalg::{
    dot, eig_extrema_sym, norm2, solve_stein, spectral_norm, spectral_radius, stein_residual,
    LinalgError, Mat, SCHUR_EPS,
};
use crate::plant::{BoundedNonlinearity, LtiPlant, Plant};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StabilityError {
    #[error("gain is {rows}x{cols}, expected {m}x{p}")]
    GainShape {
        rows: usize,
        cols: usize,
        m: usize,
        p: usize,
    },
    #[error("prediction horizon N must be at least 1")]
    ZeroHorizon,
    #[error("nonlinearity bound must be non-negative, got {0}")]
    NegativeBound(f64),
    #[error("no certificate: closed loop is not Schur stable")]
    NoCertificate,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Augmented closed loop for a fixed gain.
#[derive(Clone, Debug)]
pub struct ClosedLoop {
    pub z: Mat,
    pub gain: Mat,
    pub unroll: NStepUnroll,
    pub n_steps: usize,
    pub plant: LtiPlant,
}

impl ClosedLoop {
    pub fn state_dim(&self) -> usize {
        self.plant.state_dim()
    }

    pub fn dim(&self) -> usize {
        self.z.rows()
    }

    /// `K C`.
    pub fn kc(&self) -> Mat {
        &self.gain * self.plant.c()
    }

    /// `B K C`.
    pub fn bkc(&self) -> Mat {
        self.plant.b() * &self.kc()
    }
}

/// Proof data for a Schur-stable closed loop.
#[derive(Clone, Debug)]
pub struct LyapunovCertificate {
    pub p: Mat,
    pub p_min: f64,
    pub p_max: f64,
    pub radius: f64,
    pub stein_residual: f64,
}

#[derive(Clone, Debug)]
pub struct StabilityCertificate {
    pub spectral_radius: f64,
    pub z_norm: f64,
    pub g_bar: f64,
    pub d_bar: f64,
    /// `None` when `Z` is not Schur stable: no ball is certified.
    pub lyapunov: Option<LyapunovCertificate>,
}

impl StabilityCertificate {
    pub fn is_schur(&self) -> bool {
        self.lyapunov.is_some()
    }

    pub fn radius(&self) -> Option<f64> {
        self.lyapunov.as_ref().map(|l| l.radius)
    }

    /// Flat `key=value` block.
    pub fn to_report(&self) -> String {
        let mut out = String::new();
        let opt = |v: Option<f64>| v.map_or_else(|| "none".to_string(), |v| format!("{v:.12e}"));
        let l = self.lyapunov.as_ref();
        let _ = writeln!(out, "Z_norm={:.12e}", self.z_norm);
        let _ = writeln!(out, "spectral_radius={:.12e}", self.spectral_radius);
        let _ = writeln!(out, "p_max={}", opt(l.map(|l| l.p_max)));
        let _ = writeln!(out, "p_min={}", opt(l.map(|l| l.p_min)));
        let _ = writeln!(out, "g_bar={:.12e}", self.g_bar);
        let _ = writeln!(out, "D_bar={:.12e}", self.d_bar);
        let _ = writeln!(out, "R={}", opt(l.map(|l| l.radius)));
        let _ = writeln!(out, "schur={}", self.is_schur());
        let _ = writeln!(out, "stein_residual={}", opt(l.map(|l| l.stein_residual)));
        out
    }
}

/// Assembles `Z = [[A - BKCF, (I - BKCG) B], [-KCF, I - KCGB]]`.
pub fn build_closed_loop(
    plant: &LtiPlant,
    gain: &Mat,
    n_steps: usize,
) -> Result<ClosedLoop, StabilityError> {
    let (n, m, p) = (plant.state_dim(), plant.input_dim(), plant.output_dim());
    if gain.shape() != (m, p) {
        return Err(StabilityError::GainShape {
            rows: gain.rows(),
            cols: gain.cols(),
            m,
            p,
        });
    }
    if n_steps == 0 {
        return Err(StabilityError::ZeroHorizon);
    }
    let nl = unroll(plant.a(), n_steps, plant.nonlinearity().bound());
    let (a, b) = (plant.a(), plant.b());
    let kc = gain * plant.c();
    let bkc = b * &kc;
    let f = &nl.transition;
    let g = &nl.input_accumulation;

    let top_left = a - &(&bkc * f);
    let top_right = &(&Mat::identity(n) - &(&bkc * g)) * b;
    let bottom_left = -&(&kc * f);
    let bottom_right = &Mat::identity(m) - &(&(&kc * g) * b);
    Ok(ClosedLoop {
        z: Mat::from_blocks(&top_left, &top_right, &bottom_left, &bottom_right),
        gain: gain.clone(),
        unroll: nl,
        n_steps,
        plant: plant.clone(),
    })
}

/// `R = D_bar (||Z|| p_max + sqrt(||Z||^2 p_max^2 + p_max))`.
pub fn ball_radius(d_bar: f64, z_norm: f64, p_max: f64) -> f64 {
    let zp = z_norm * p_max;
    d_bar * (zp + (zp * zp + p_max).sqrt())
}

/// `D_bar = sqrt((f_bar + ||BKC|| g_bar)^2 + (||KC|| g_bar)^2)`.
pub fn disturbance_bound(f_bar: f64, bkc_norm: f64, kc_norm: f64, g_bar: f64) -> f64 {
    (f_bar + bkc_norm * g_bar).hypot(kc_norm * g_bar)
}

/// Builds the certificate for nonlinearity bound `f_bar`.
pub fn certify(cl: &ClosedLoop, f_bar: f64) -> Result<StabilityCertificate, StabilityError> {
    if f_bar.is_nan() || f_bar < 0.0 {
        return Err(StabilityError::NegativeBound(f_bar));
    }
    let rho = spectral_radius(&cl.z);
    let z_norm = spectral_norm(&cl.z);
    let g_bar = unroll(cl.plant.a(), cl.n_steps, f_bar).g_bar;
    let d_bar = disturbance_bound(
        f_bar,
        spectral_norm(&cl.bkc()),
        spectral_norm(&cl.kc()),
        g_bar,
    );

    let lyapunov = if rho >= 1.0 - SCHUR_EPS {
        None
    } else {
        let q = Mat::identity(cl.dim());
        let p = solve_stein(&cl.z, &q)?;
        let (p_min, p_max) = eig_extrema_sym(&p)?;
        Some(LyapunovCertificate {
            stein_residual: stein_residual(&cl.z, &p, &q),
            radius: ball_radius(d_bar, z_norm, p_max),
            p,
            p_min,
            p_max,
        })
    };
    Ok(StabilityCertificate {
        spectral_radius: rho,
        z_norm,
        g_bar,
        d_bar,
        lyapunov,
    })
}

/// One step of the augmented recursion.
#[derive(Clone, Debug)]
pub struct AugmentedStep {
    pub a: Vec<f64>,
    pub norm: f64,
    pub d_norm: f64,
    pub g_norm: f64,
}

/// Accumulated nonlinearity over the prediction horizon,
/// `g = sum_i A^{N-1-i} f(x_i)`, with `x_i` predicted from `x` under the held
/// input `v`.
pub fn accumulated_nonlinearity(
    plant: &LtiPlant,
    f: &BoundedNonlinearity,
    x: &[f64],
    v: &[f64],
    n_steps: usize,
) -> Vec<f64> {
    let bv = plant.b().mul_vec(v);
    let mut g = vec![0.0; x.len()];
    let mut xi = x.to_vec();
    for _ in 0..n_steps {
        let fx = f.evaluate(&xi);
        g = plant
            .a()
            .mul_vec(&g)
            .iter()
            .zip(&fx)
            .map(|(a, b)| a + b)
            .collect();
        xi = plant
            .a()
            .mul_vec(&xi)
            .iter()
            .zip(&bv)
            .zip(&fx)
            .map(|((a, b), c)| a + b + c)
            .collect();
    }
    g
}

/// Disturbance `D = [f(x) - BKC g; -KC g]` and `g` itself.
pub fn disturbance(cl: &ClosedLoop, f: &BoundedNonlinearity, a: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = cl.state_dim();
    let (x, v) = a.split_at(n);
    let g = accumulated_nonlinearity(&cl.plant, f, x, v, cl.n_steps);
    let fx = f.evaluate(x);
    let kcg = cl.kc().mul_vec(&g);
    let bkcg = cl.plant.b().mul_vec(&kcg);
    let mut d: Vec<f64> = fx.iter().zip(&bkcg).map(|(f, b)| f - b).collect();
    d.extend(kcg.iter().map(|v| -v));
    (d, g)
}

/// Runs `a+ = Z a + D(a)` from `a0` for `steps` steps; returns `steps + 1`
/// records including the initial one.
pub fn simulate_augmented(
    cl: &ClosedLoop,
    f: &BoundedNonlinearity,
    a0: &[f64],
    steps: usize,
) -> Vec<AugmentedStep> {
    let mut out = Vec::with_capacity(steps + 1);
    let mut a = a0.to_vec();
    for k in 0..=steps {
        let (d, g) = disturbance(cl, f, &a);
        let rec = AugmentedStep {
            norm: norm2(&a),
            d_norm: norm2(&d),
            g_norm: norm2(&g),
            a: a.clone(),
        };
        out.push(rec);
        if k < steps {
            a =
                cl.z.mul_vec(&a)
                    .iter()
                    .zip(&d)
                    .map(|(z, d)| z + d)
                    .collect();
        }
    }
    out
}

/// Empirical check of the certified ball.
#[derive(Clone, Debug, Default)]
pub struct FalsifyReport {
    pub trials: usize,
    pub steps: usize,
    pub radius: f64,
    /// Max over trials of the largest `||a_k||` in the last 10% of steps.
    pub max_tail_norm: f64,
    /// Steps with `||a_k|| > R` where `V` failed to strictly decrease.
    pub lyapunov_violations: usize,
    /// Steps where `||D_k|| > D_bar`.
    pub disturbance_violations: usize,
    /// Steps where `||g(x_k, N)|| > g_bar`.
    pub g_violations: usize,
    pub tail_violations: usize,
}

impl FalsifyReport {
    pub fn passed(&self) -> bool {
        self.lyapunov_violations == 0
            && self.disturbance_violations == 0
            && self.g_violations == 0
            && self.tail_violations == 0
    }
}

fn quadratic_form(p: &Mat, a: &[f64]) -> f64 {
    dot(a, &p.mul_vec(a))
}

/// Checks one trajectory against a certificate. Returns the partial report.
pub fn check_trajectory(
    cert: &StabilityCertificate,
    traj: &[AugmentedStep],
) -> Result<FalsifyReport, StabilityError> {
    let lyap = cert
        .lyapunov
        .as_ref()
        .ok_or(StabilityError::NoCertificate)?;
    let r = lyap.radius;
    let mut report = FalsifyReport {
        trials: 1,
        steps: traj.len().saturating_sub(1),
        radius: r,
        ..FalsifyReport::default()
    };
    // relative slack for roundoff in the norm comparisons only
    let slack = 1e-12;
    for w in traj.windows(2) {
        if w[0].norm > r {
            let v0 = quadratic_form(&lyap.p, &w[0].a);
            let v1 = quadratic_form(&lyap.p, &w[1].a);
            if v1 >= v0 {
                report.lyapunov_violations += 1;
            }
        }
    }
    for s in traj {
        if s.d_norm > cert.d_bar * (1.0 + slack) + f64::MIN_POSITIVE {
            report.disturbance_violations += 1;
        }
        if s.g_norm > cert.g_bar * (1.0 + slack) + f64::MIN_POSITIVE {
            report.g_violations += 1;
        }
    }
    let tail = (traj.len() / 10).max(1);
    let tail_max = traj[traj.len() - tail..]
        .iter()
        .map(|s| s.norm)
        .fold(0.0, f64::max);
    report.max_tail_norm = tail_max;
    if tail_max > r {
        report.tail_violations += 1;
    }
    Ok(report)
}

/// Simulates `trials` random initial conditions and checks every step of
/// each trajectory against the certificate.
///
/// Initial conditions have uniformly random direction and norm uniform in
/// `[0, 10 max(R, 1)]`. Each trial gets its own generator seeded from `rng`,
/// so the result does not depend on scheduling.
pub fn falsify<R: Rng + ?Sized>(
    cert: &StabilityCertificate,
    cl: &ClosedLoop,
    f: &BoundedNonlinearity,
    trials: usize,
    steps: usize,
    rng: &mut R,
) -> Result<FalsifyReport, StabilityError> {
    let radius = cert.radius().ok_or(StabilityError::NoCertificate)?;
    let seeds: Vec<u64> = (0..trials).map(|_| rng.gen()).collect();
    let dim = cl.dim();
    let scale = 10.0 * radius.max(1.0);
    let reports = seeds
        .par_iter()
        .map(|&seed| {
            let mut trial_rng = ChaCha8Rng::seed_from_u64(seed);
            let dir: Vec<f64> = (0..dim).map(|_| trial_rng.sample(StandardNormal)).collect();
            let len = norm2(&dir).max(f64::MIN_POSITIVE);
            let mag = scale * trial_rng.gen::<f64>();
            let a0: Vec<f64> = dir.iter().map(|d| d / len * mag).collect();
            let traj = simulate_augmented(cl, f, &a0, steps);
            check_trajectory(cert, &traj)
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut total = FalsifyReport {
        radius,
        steps,
        ..FalsifyReport::default()
    };
    for r in reports {
        total.trials += 1;
        total.max_tail_norm = total.max_tail_norm.max(r.max_tail_norm);
        total.lyapunov_violations += r.lyapunov_violations;
        total.disturbance_violations += r.disturbance_violations;
        total.g_violations += r.g_violations;
        total.tail_violations += r.tail_violations;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn scalar_plant(a: f64, b: f64, f: BoundedNonlinearity) -> LtiPlant {
        LtiPlant::new(
            Mat::from_diag(&[a]),
            Mat::from_diag(&[b]),
            Mat::identity(1),
            f,
            0.0,
        )
        .unwrap()
    }

    #[test]
    fn zero_gain_is_open_loop_block() {
        let plant = scalar_plant(0.5, 2.0, BoundedNonlinearity::zero(1));
        let cl = build_closed_loop(&plant, &Mat::zeros(1, 1), 3).unwrap();
        assert_eq!(cl.z, Mat::from_row_slice(2, 2, &[0.5, 2.0, 0.0, 1.0]));
        let cert = certify(&cl, 0.0).unwrap();
        assert!(!cert.is_schur());
        assert!(cert.to_report().contains("schur=false"));
        assert!(cert.to_report().contains("R=none"));
    }

    #[test]
    fn scalar_block_substitution() {
        let plant = scalar_plant(0.5, 1.0, BoundedNonlinearity::zero(1));
        let cl = build_closed_loop(&plant, &Mat::from_diag(&[0.2]), 1).unwrap();
        let expected = Mat::from_row_slice(2, 2, &[0.4, 0.8, -0.1, 0.8]);
        assert!((&cl.z - &expected).max_abs() < 1e-15);

        let cert = certify(&cl, 0.1).unwrap();
        let lyap = cert.lyapunov.as_ref().expect("scalar loop is Schur stable");
        assert!(lyap.stein_residual <= 1e-10);
        assert!(lyap.p_min > 0.0);
        assert!(cert.radius().unwrap().is_finite());
    }

    #[test]
    fn two_step_horizon_blocks() {
        let b = Mat::from_row_slice(2, 1, &[1.0, 0.5]);
        let c = Mat::from_row_slice(1, 2, &[1.0, 1.0]);
        let plant = LtiPlant::new(
            Mat::identity(2),
            b.clone(),
            c.clone(),
            BoundedNonlinearity::zero(2),
            0.0,
        )
        .unwrap();
        let k = Mat::from_diag(&[0.3]);
        let cl = build_closed_loop(&plant, &k, 2).unwrap();
        assert_eq!(cl.unroll.input_accumulation, Mat::identity(2).scale(2.0));
        let expected = 1.0 - 2.0 * (&(&k * &c) * &b)[(0, 0)];
        assert_abs_diff_eq!(cl.z[(2, 2)], expected, epsilon = 1e-15);
    }

    #[test]
    fn zero_nonlinearity_gives_zero_radius() {
        let plant = scalar_plant(0.5, 1.0, BoundedNonlinearity::zero(1));
        let cl = build_closed_loop(&plant, &Mat::from_diag(&[0.2]), 2).unwrap();
        let cert = certify(&cl, 0.0).unwrap();
        assert_eq!(cert.g_bar, 0.0);
        assert_eq!(cert.d_bar, 0.0);
        assert_eq!(cert.radius(), Some(0.0));
    }

    #[test]
    fn synthetic_radius() {
        assert_abs_diff_eq!(ball_radius(1.0, 0.5, 4.0 / 3.0), 2.0, epsilon = 1e-12);
        assert_eq!(ball_radius(0.0, 0.5, 4.0 / 3.0), 0.0);
    }

    #[test]
    fn gain_shape_checked() {
        let plant = scalar_plant(0.5, 1.0, BoundedNonlinearity::zero(1));
        assert!(matches!(
            build_closed_loop(&plant, &Mat::zeros(2, 1), 1),
            Err(StabilityError::GainShape { .. })
        ));
        assert!(matches!(
            build_closed_loop(&plant, &Mat::zeros(1, 1), 0),
            Err(StabilityError::ZeroHorizon)
        ));
    }

    #[test]
    fn falsify_requires_certificate() {
        let plant = scalar_plant(0.5, 1.0, BoundedNonlinearity::zero(1));
        let cl = build_closed_loop(&plant, &Mat::zeros(1, 1), 1).unwrap();
        let cert = certify(&cl, 0.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(
            falsify(&cert, &cl, &BoundedNonlinearity::zero(1), 2, 10, &mut rng),
            Err(StabilityError::NoCertificate)
        ));
    }

    #[test]
    fn augmented_recursion_matches_plant() {
        // x+ = A x + B u + f(x) with u = v - KC(F x + G B v + g)
        let f = BoundedNonlinearity::sinusoidal(&[0.3], &[2.0], 1.0);
        let plant = scalar_plant(0.7, 1.0, f.clone());
        let k = Mat::from_diag(&[0.3]);
        let n = 3;
        let cl = build_closed_loop(&plant, &k, n).unwrap();
        let (x0, v0) = (0.8, -0.4);
        let traj = simulate_augmented(&cl, &f, &[x0, v0], 1);

        let mut xp = x0;
        for _ in 0..n {
            xp = plant.step(&[xp], &[v0]).unwrap()[0];
        }
        let u = v0 - 0.3 * xp;
        let x1 = plant.step(&[x0], &[u]).unwrap()[0];
        assert_abs_diff_eq!(traj[1].a[0], x1, epsilon = 1e-14);
        assert_abs_diff_eq!(traj[1].a[1], u, epsilon = 1e-14);
    }
}
