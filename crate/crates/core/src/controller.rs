//! The unscented transform controller.
//!
//! Each control step treats the control input as the quantity being
//! "estimated" and the reference as the "measurement": a prior control is
//! formed, spread into `2m + 1` sigma points along the columns of the square
//! root of the control covariance, each point is held fixed while the plant
//! model is rolled forward `N` steps, and the resulting predicted outputs are
//! fused back into a new control through a Kalman-style gain.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::linalg::{
    clamp_psd, default_tol, psd_sqrt, solve_linear, spectral_norm, vec_sub, LinalgError, Mat,
};
use crate::plant::{Plant, PlantError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum UtcError {
    #[error("invalid controller parameter: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Plant(#[from] PlantError),
}

type FeedbackLaw = dyn Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync;

/// How the prior control for the next step is formed.
#[derive(Clone)]
pub enum Propagation {
    /// `u- = u_k`.
    Hold,
    /// `u- = u_k + w`, `w ~ N(0, Q_u)`, drawn from the caller's generator.
    Noise,
    /// `u- = h(x_k, u_k)`.
    Feedback(Arc<FeedbackLaw>),
}

impl Propagation {
    pub fn feedback(h: impl Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        Propagation::Feedback(Arc::new(h))
    }
}

impl fmt::Debug for Propagation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Propagation::Hold => write!(f, "Hold"),
            Propagation::Noise => write!(f, "Noise"),
            Propagation::Feedback(_) => write!(f, "Feedback(..)"),
        }
    }
}

/// Controller tuning.
#[derive(Clone, Debug)]
pub struct UtcParams {
    /// Prediction steps `N`, at least 1.
    pub n_steps: usize,
    /// Center sigma-point weight, in (0, 1).
    pub w0: f64,
    /// Control process covariance; also the initial control covariance.
    pub q_u: Mat,
    /// Output covariance floor added to the predicted output covariance.
    pub p_err: Mat,
    /// Dimension used in the sigma-point spread `sqrt(d / (1 - w0))`.
    pub sigma_scale_dim: usize,
    pub propagation: Propagation,
    /// Optional per-input `[lo, hi]` box imposed on every sigma point.
    pub input_bounds: Option<Vec<(f64, f64)>>,
    pub rng_seed: u64,
}

impl UtcParams {
    /// Hold-mode defaults with the sigma spread scaled by the input dimension.
    pub fn new(n_steps: usize, w0: f64, q_u: Mat, p_err: Mat) -> Self {
        let m = q_u.rows();
        Self {
            n_steps,
            w0,
            q_u,
            p_err,
            sigma_scale_dim: m,
            propagation: Propagation::Hold,
            input_bounds: None,
            rng_seed: 0,
        }
    }

    pub fn input_dim(&self) -> usize {
        self.q_u.rows()
    }

    pub fn output_dim(&self) -> usize {
        self.p_err.rows()
    }

    pub fn validate(&self) -> Result<(), UtcError> {
        let invalid = |msg: String| Err(UtcError::InvalidParams(msg));
        if self.n_steps < 1 {
            return invalid("N (prediction steps) must be at least 1".into());
        }
        if !(self.w0 > 0.0 && self.w0 < 1.0) {
            return invalid(format!("W0 must lie in (0,1), got {}", self.w0));
        }
        if self.sigma_scale_dim == 0 {
            return invalid("sigma_scale_dim must be positive".into());
        }
        for (name, m) in [("Q_u", &self.q_u), ("P_err", &self.p_err)] {
            if !m.is_square() {
                return invalid(format!(
                    "{name} must be square, got {}x{}",
                    m.rows(),
                    m.cols()
                ));
            }
            if !m.is_finite() {
                return invalid(format!("{name} has non-finite entries"));
            }
            let tol = default_tol(m);
            if m.asymmetry() > tol {
                return invalid(format!("{name} must be symmetric"));
            }
            let (lo, _) = crate::linalg::eig_extrema_sym(m)?;
            if lo < -tol {
                return invalid(format!(
                    "{name} must be positive semi-definite (min eigenvalue {lo:e})"
                ));
            }
        }
        let (lo, _) = crate::linalg::eig_extrema_sym(&self.p_err)?;
        if lo <= 0.0 {
            return invalid(
                "P_err must be positive definite so the output covariance is invertible".into(),
            );
        }
        if let Some(bounds) = &self.input_bounds {
            if bounds.len() != self.input_dim() {
                return invalid(format!(
                    "input_bounds has {} entries, expected {}",
                    bounds.len(),
                    self.input_dim()
                ));
            }
            if let Some((i, (lo, hi))) = bounds
                .iter()
                .enumerate()
                .find(|(_, (lo, hi))| lo.is_nan() || hi.is_nan() || lo > hi)
            {
                return invalid(format!("input_bounds[{i}] = [{lo}, {hi}] is empty"));
            }
        }
        Ok(())
    }

    /// Checks the tuning against a plant's dimensions.
    pub fn validate_for(&self, plant: &dyn Plant) -> Result<(), UtcError> {
        self.validate()?;
        if self.input_dim() != plant.input_dim() {
            return Err(UtcError::InvalidParams(format!(
                "Q_u is {0}x{0} but the plant has {1} inputs",
                self.input_dim(),
                plant.input_dim()
            )));
        }
        if self.output_dim() != plant.output_dim() {
            return Err(UtcError::InvalidParams(format!(
                "P_err is {0}x{0} but the plant has {1} outputs",
                self.output_dim(),
                plant.output_dim()
            )));
        }
        Ok(())
    }
}

/// Current control and its covariance.
#[derive(Clone, Debug, PartialEq)]
pub struct UtcState {
    pub u: Vec<f64>,
    pub p: Mat,
}

impl UtcState {
    pub fn new(u: Vec<f64>, p: Mat) -> Self {
        Self { u, p }
    }
}

/// Control sigma points and their weights.
#[derive(Clone, Debug, PartialEq)]
pub struct SigmaSet {
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl SigmaSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn weighted_mean(&self) -> Vec<f64> {
        weighted_mean(&self.points, &self.weights)
    }
}

/// Everything produced by one controller update.
#[derive(Clone, Debug)]
pub struct UpdateResult {
    pub u_pred: Vec<f64>,
    pub y_pred: Vec<f64>,
    pub p_pred: Mat,
    pub p_y: Mat,
    pub p_uy: Mat,
    pub gain: Mat,
    pub u_next: Vec<f64>,
    pub p_next: Mat,
    /// Magnitude of the negative eigenvalue removed from the posterior
    /// covariance, 0 when no repair was needed.
    pub clamped: f64,
    pub sigma: SigmaSet,
    pub outputs: Vec<Vec<f64>>,
}

/// `F = A^N`, `G = sum_{i<N} A^i` and the bound `g_bar` on the accumulated
/// nonlinearity over the horizon.
#[derive(Clone, Debug, PartialEq)]
pub struct NStepUnroll {
    pub transition: Mat,
    pub input_accumulation: Mat,
    pub g_bar: f64,
}

/// Forms the prior control `u-` for the upcoming step.
pub fn propagate_prior<R: Rng + ?Sized>(
    state: &UtcState,
    x: &[f64],
    params: &UtcParams,
    rng: &mut R,
) -> Result<Vec<f64>, UtcError> {
    match &params.propagation {
        Propagation::Hold => Ok(state.u.clone()),
        Propagation::Noise => {
            let root = psd_sqrt(&params.q_u, default_tol(&params.q_u))?;
            let z: Vec<f64> = (0..state.u.len())
                .map(|_| rng.sample(StandardNormal))
                .collect();
            let w = root.mul_vec(&z);
            Ok(state.u.iter().zip(&w).map(|(u, w)| u + w).collect())
        }
        Propagation::Feedback(h) => {
            let u = h(x, &state.u);
            if u.len() != state.u.len() {
                return Err(UtcError::InvalidParams(format!(
                    "feedback law returned {} inputs, expected {}",
                    u.len(),
                    state.u.len()
                )));
            }
            Ok(u)
        }
    }
}

/// Symmetric sigma points around `u_minus`, spread by `sqrt(d / (1 - w0))`
/// times the columns of the PSD square root of `p`.
pub fn generate_sigma_points(
    u_minus: &[f64],
    p: &Mat,
    params: &UtcParams,
) -> Result<SigmaSet, UtcError> {
    let m = u_minus.len();
    if p.shape() != (m, m) {
        return Err(UtcError::InvalidParams(format!(
            "covariance is {}x{}, expected {m}x{m}",
            p.rows(),
            p.cols()
        )));
    }
    let root = psd_sqrt(p, default_tol(p))?;
    let spread = (params.sigma_scale_dim as f64 / (1.0 - params.w0)).sqrt();

    let mut points = Vec::with_capacity(2 * m + 1);
    points.push(u_minus.to_vec());
    for j in 0..m {
        let col = root.column(j);
        points.push(
            u_minus
                .iter()
                .zip(&col)
                .map(|(u, s)| u + spread * s)
                .collect(),
        );
        points.push(
            u_minus
                .iter()
                .zip(&col)
                .map(|(u, s)| u - spread * s)
                .collect(),
        );
    }
    if let Some(bounds) = &params.input_bounds {
        for point in &mut points {
            for (v, (lo, hi)) in point.iter_mut().zip(bounds) {
                *v = v.clamp(*lo, *hi);
            }
        }
    }

    let side = (1.0 - params.w0) / (2 * m) as f64;
    let mut weights = vec![side; 2 * m + 1];
    weights[0] = params.w0;
    Ok(SigmaSet { points, weights })
}

pub fn unroll(a: &Mat, n_steps: usize, f_bar: f64) -> NStepUnroll {
    assert!(n_steps >= 1, "N must be at least 1");
    let dim = a.rows();
    let mut input_accumulation = Mat::zeros(dim, dim);
    let mut power = Mat::identity(dim);
    let mut norm_sum = 0.0;
    for _ in 0..n_steps {
        input_accumulation = &input_accumulation + &power;
        norm_sum += spectral_norm(&power);
        power = &power * a;
    }
    NStepUnroll {
        transition: power,
        input_accumulation,
        g_bar: f_bar * norm_sum,
    }
}

/// Rolls the plant forward `n_steps` from `x` with `u` held, returning the
/// output of the final state.
pub fn propagate_sigma_n_step(
    plant: &dyn Plant,
    x: &[f64],
    u: &[f64],
    n_steps: usize,
) -> Result<Vec<f64>, UtcError> {
    let mut state = x.to_vec();
    for _ in 0..n_steps {
        state = plant.step(&state, u)?;
    }
    Ok(plant.output(&state))
}

fn weighted_mean(points: &[Vec<f64>], weights: &[f64]) -> Vec<f64> {
    let mut mean = vec![0.0; points[0].len()];
    for (point, w) in points.iter().zip(weights) {
        for (acc, v) in mean.iter_mut().zip(point) {
            *acc += w * v;
        }
    }
    mean
}

fn weighted_cross(
    a: &[Vec<f64>],
    a_mean: &[f64],
    b: &[Vec<f64>],
    b_mean: &[f64],
    weights: &[f64],
) -> Mat {
    let mut acc = Mat::zeros(a_mean.len(), b_mean.len());
    for ((ai, bi), w) in a.iter().zip(b).zip(weights) {
        let da = vec_sub(ai, a_mean);
        let db = vec_sub(bi, b_mean);
        acc = &acc + &Mat::outer(&da, &db).scale(*w);
    }
    acc
}

/// One full controller step: prior, sigma points, N-step prediction, gain,
/// next control and repaired posterior covariance.
pub fn update<R: Rng + ?Sized>(
    state: &UtcState,
    x: &[f64],
    r: &[f64],
    plant: &dyn Plant,
    params: &UtcParams,
    rng: &mut R,
) -> Result<UpdateResult, UtcError> {
    if r.len() != plant.output_dim() {
        return Err(UtcError::InvalidParams(format!(
            "reference has {} entries, plant has {} outputs",
            r.len(),
            plant.output_dim()
        )));
    }
    let u_minus = propagate_prior(state, x, params, rng)?;
    let sigma = generate_sigma_points(&u_minus, &state.p, params)?;

    let outputs = sigma
        .points
        .iter()
        .map(|u| propagate_sigma_n_step(plant, x, u, params.n_steps))
        .collect::<Result<Vec<_>, _>>()?;

    let y_pred = weighted_mean(&outputs, &sigma.weights);
    let u_pred = sigma.weighted_mean();

    let spread_u = weighted_cross(
        &sigma.points,
        &u_pred,
        &sigma.points,
        &u_pred,
        &sigma.weights,
    );
    let p_pred = &params.q_u + &spread_u;
    let spread_y = weighted_cross(&outputs, &y_pred, &outputs, &y_pred, &sigma.weights);
    let p_y = &params.p_err + &spread_y.symmetrized();
    let p_uy = weighted_cross(&sigma.points, &u_pred, &outputs, &y_pred, &sigma.weights);

    // K P_y = P_uy, solved as P_y K^T = P_uy^T.
    let gain = solve_linear(&p_y, &p_uy.transpose())?.transpose();

    let innovation = vec_sub(r, &y_pred);
    let correction = gain.mul_vec(&innovation);
    let u_next: Vec<f64> = u_pred.iter().zip(&correction).map(|(u, c)| u + c).collect();

    let raw = &p_pred - &(&(&gain * &p_y) * &gain.transpose());
    let (p_next, clamped) = clamp_psd(&raw);
    let budget = default_tol(&p_pred);
    if clamped > budget {
        return Err(LinalgError::NotPsd {
            min_eigenvalue: -clamped,
            tol: budget,
        }
        .into());
    }
    if clamped > 0.0 {
        log::debug!("posterior covariance repaired, clamped eigenvalue magnitude {clamped:e}");
    }

    Ok(UpdateResult {
        u_pred,
        y_pred,
        p_pred,
        p_y,
        p_uy,
        gain,
        u_next,
        p_next,
        clamped,
        sigma,
        outputs,
    })
}
