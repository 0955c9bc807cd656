//! Plant models driven by the controller.
//!
//! Two shapes are supported: [`LtiPlant`], a discrete linear plant plus a
//! norm-bounded state nonlinearity, and [`NonlinearPlant`], an arbitrary
//! one-step map used for the quadcopter attitude model.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::linalg::{norm2, Mat};

/// Default discretization step, seconds.
pub const DEFAULT_DT: f64 = 0.01;

/// Pitch margin from +/- pi/2 at which the Euler-rate map is refused.
pub const GIMBAL_GUARD: f64 = 1e-3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlantError {
    #[error("discretization step must be positive, got {0}")]
    NonPositiveStep(f64),
    #[error("pitch angle {theta} rad is within {guard} rad of gimbal lock")]
    GimbalLock { theta: f64, guard: f64 },
    #[error("invalid plant parameter: {0}")]
    InvalidParams(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

type StateMap = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;
type StepMap = dyn Fn(&[f64], &[f64]) -> Result<Vec<f64>, PlantError> + Send + Sync;

/// A state nonlinearity with a known global bound `||f(x)||_2 <= bound`.
#[derive(Clone)]
pub struct BoundedNonlinearity {
    dim: usize,
    bound: f64,
    description: String,
    eval: Arc<StateMap>,
}

impl BoundedNonlinearity {
    /// Wraps an arbitrary map. The caller vouches for `bound`.
    pub fn new(
        dim: usize,
        bound: f64,
        description: impl Into<String>,
        eval: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        assert!(bound >= 0.0, "nonlinearity bound must be non-negative");
        Self {
            dim,
            bound,
            description: description.into(),
            eval: Arc::new(eval),
        }
    }

    pub fn zero(dim: usize) -> Self {
        Self::new(dim, 0.0, "zero", move |_| vec![0.0; dim])
    }

    /// `f(x)_i = scale * beta_i * sin(alpha_i * x_i)`, bounded by
    /// `|scale| * ||beta||_2`.
    pub fn sinusoidal(beta: &[f64], alpha: &[f64], scale: f64) -> Self {
        assert_eq!(beta.len(), alpha.len());
        let dim = beta.len();
        let bound = scale.abs() * norm2(beta);
        let beta = beta.to_vec();
        let alpha = alpha.to_vec();
        let description =
            format!("{scale} * beta * sin(alpha * x), beta = {beta:?}, alpha = {alpha:?}");
        Self::new(dim, bound, description, move |x| {
            x.iter()
                .zip(beta.iter().zip(&alpha))
                .map(|(xi, (b, a))| scale * b * (a * xi).sin())
                .collect()
        })
    }

    pub fn evaluate(&self, x: &[f64]) -> Vec<f64> {
        (self.eval)(x)
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn description(&self) -> &str {
        &self.description
    }
}

impl fmt::Debug for BoundedNonlinearity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BoundedNonlinearity")
            .field("dim", &self.dim)
            .field("bound", &self.bound)
            .field("description", &self.description)
            .finish()
    }
}

/// Common interface for anything the controller can roll forward.
pub trait Plant: Send + Sync {
    fn state_dim(&self) -> usize;
    fn input_dim(&self) -> usize;
    fn output_dim(&self) -> usize;
    fn step(&self, x: &[f64], u: &[f64]) -> Result<Vec<f64>, PlantError>;
    fn output(&self, x: &[f64]) -> Vec<f64>;
    /// Sampling time in seconds, 0 if the model is natively discrete.
    fn dt(&self) -> f64;
}

/// `x+ = A x + B u + f(x)`, `y = C x`.
#[derive(Clone, Debug)]
pub struct LtiPlant {
    a: Mat,
    b: Mat,
    c: Mat,
    f: BoundedNonlinearity,
    dt: f64,
}

impl LtiPlant {
    pub fn new(
        a: Mat,
        b: Mat,
        c: Mat,
        f: BoundedNonlinearity,
        dt: f64,
    ) -> Result<Self, PlantError> {
        let n = a.rows();
        if !a.is_square() {
            return Err(PlantError::DimensionMismatch(format!(
                "A must be square, got {}x{}",
                a.rows(),
                a.cols()
            )));
        }
        if b.rows() != n {
            return Err(PlantError::DimensionMismatch(format!(
                "B has {} rows, expected {n}",
                b.rows()
            )));
        }
        if c.cols() != n {
            return Err(PlantError::DimensionMismatch(format!(
                "C has {} columns, expected {n}",
                c.cols()
            )));
        }
        if f.dim() != n {
            return Err(PlantError::DimensionMismatch(format!(
                "nonlinearity acts on dimension {}, expected {n}",
                f.dim()
            )));
        }
        if !(a.is_finite() && b.is_finite() && c.is_finite()) {
            return Err(PlantError::InvalidParams("non-finite matrix entry".into()));
        }
        if dt < 0.0 || !dt.is_finite() {
            return Err(PlantError::InvalidParams(format!(
                "dt must be >= 0, got {dt}"
            )));
        }
        Ok(Self { a, b, c, f, dt })
    }

    pub fn a(&self) -> &Mat {
        &self.a
    }

    pub fn b(&self) -> &Mat {
        &self.b
    }

    pub fn c(&self) -> &Mat {
        &self.c
    }

    pub fn nonlinearity(&self) -> &BoundedNonlinearity {
        &self.f
    }
}

impl Plant for LtiPlant {
    fn state_dim(&self) -> usize {
        self.a.rows()
    }

    fn input_dim(&self) -> usize {
        self.b.cols()
    }

    fn output_dim(&self) -> usize {
        self.c.rows()
    }

    fn step(&self, x: &[f64], u: &[f64]) -> Result<Vec<f64>, PlantError> {
        let ax = self.a.mul_vec(x);
        let bu = self.b.mul_vec(u);
        let fx = self.f.evaluate(x);
        Ok(ax
            .iter()
            .zip(&bu)
            .zip(&fx)
            .map(|((a, b), f)| a + b + f)
            .collect())
    }

    fn output(&self, x: &[f64]) -> Vec<f64> {
        self.c.mul_vec(x)
    }

    fn dt(&self) -> f64 {
        self.dt
    }
}

/// General discrete-time plant given by a step map and an output map.
#[derive(Clone)]
pub struct NonlinearPlant {
    n: usize,
    m: usize,
    p: usize,
    dt: f64,
    step: Arc<StepMap>,
    output: Arc<StateMap>,
}

impl NonlinearPlant {
    pub fn new(
        dims: (usize, usize, usize),
        dt: f64,
        step: impl Fn(&[f64], &[f64]) -> Result<Vec<f64>, PlantError> + Send + Sync + 'static,
        output: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        let (n, m, p) = dims;
        Self {
            n,
            m,
            p,
            dt,
            step: Arc::new(step),
            output: Arc::new(output),
        }
    }
}

impl fmt::Debug for NonlinearPlant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NonlinearPlant")
            .field("n", &self.n)
            .field("m", &self.m)
            .field("p", &self.p)
            .field("dt", &self.dt)
            .finish()
    }
}

impl Plant for NonlinearPlant {
    fn state_dim(&self) -> usize {
        self.n
    }

    fn input_dim(&self) -> usize {
        self.m
    }

    fn output_dim(&self) -> usize {
        self.p
    }

    fn step(&self, x: &[f64], u: &[f64]) -> Result<Vec<f64>, PlantError> {
        (self.step)(x, u)
    }

    fn output(&self, x: &[f64]) -> Vec<f64> {
        (self.output)(x)
    }

    fn dt(&self) -> f64 {
        self.dt
    }
}

/// Either plant shape, so scenarios can own one without boxing.
#[derive(Clone, Debug)]
pub enum PlantModel {
    Lti(LtiPlant),
    Nonlinear(NonlinearPlant),
}

impl PlantModel {
    pub fn as_lti(&self) -> Option<&LtiPlant> {
        match self {
            PlantModel::Lti(p) => Some(p),
            PlantModel::Nonlinear(_) => None,
        }
    }

    fn inner(&self) -> &dyn Plant {
        match self {
            PlantModel::Lti(p) => p,
            PlantModel::Nonlinear(p) => p,
        }
    }
}

impl Plant for PlantModel {
    fn state_dim(&self) -> usize {
        self.inner().state_dim()
    }

    fn input_dim(&self) -> usize {
        self.inner().input_dim()
    }

    fn output_dim(&self) -> usize {
        self.inner().output_dim()
    }

    fn step(&self, x: &[f64], u: &[f64]) -> Result<Vec<f64>, PlantError> {
        self.inner().step(x, u)
    }

    fn output(&self, x: &[f64]) -> Vec<f64> {
        self.inner().output(x)
    }

    fn dt(&self) -> f64 {
        self.inner().dt()
    }
}

/// Forward-Euler discretization: `(I + dt A_c, dt B_c)`.
pub fn euler_discretize(a_c: &Mat, b_c: &Mat, dt: f64) -> Result<(Mat, Mat), PlantError> {
    if dt <= 0.0 || !dt.is_finite() {
        return Err(PlantError::NonPositiveStep(dt));
    }
    let a = &Mat::identity(a_c.rows()) + &a_c.scale(dt);
    Ok((a, b_c.scale(dt)))
}

/// Continuous-time ADMIRE attitude subsystem, states (p, q, r).
pub fn admire_continuous() -> (Mat, Mat) {
    let a = Mat::from_row_slice(
        3,
        3,
        &[
            -0.9967, 0.0, 0.6176, //
            0.0, -0.5057, 0.0, //
            -0.0939, 0.0, -0.2127,
        ],
    );
    let b = Mat::from_row_slice(
        3,
        4,
        &[
            0.0, -4.2423, 4.2423, 1.4871, //
            1.6532, -1.2735, -1.2735, 0.0024, //
            0.0, -0.2805, 0.2805, -0.8823,
        ],
    );
    (a, b)
}

/// ADMIRE attitude model discretized at `dt`, with full-state output and the
/// per-axis perturbation `dt * beta_i * sin(alpha_i x_i)`.
pub fn make_admire(dt: f64, beta: [f64; 3], alpha: [f64; 3]) -> Result<LtiPlant, PlantError> {
    let (a_c, b_c) = admire_continuous();
    let (a, b) = euler_discretize(&a_c, &b_c, dt)?;
    let f = if beta.iter().all(|b| *b == 0.0) {
        BoundedNonlinearity::zero(3)
    } else {
        BoundedNonlinearity::sinusoidal(&beta, &alpha, dt)
    };
    LtiPlant::new(a, b, Mat::identity(3), f, dt)
}

/// Quadcopter attitude constants. SI units throughout.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadcopterParams {
    pub ixx: f64,
    pub iyy: f64,
    pub izz: f64,
    /// Rotor inertia.
    pub jr: f64,
    /// Thrust coefficient.
    pub kt: f64,
    /// Drag torque coefficient.
    pub kb: f64,
    /// Arm length.
    pub arm: f64,
    pub dt: f64,
}

impl Default for QuadcopterParams {
    fn default() -> Self {
        Self {
            ixx: 4.856e-3,
            iyy: 4.856e-3,
            izz: 8.801e-3,
            jr: 3.357e-5,
            kt: 2.98e-6,
            kb: 1.14e-7,
            arm: 0.225,
            dt: DEFAULT_DT,
        }
    }
}

impl QuadcopterParams {
    pub fn validate(&self) -> Result<(), PlantError> {
        let named = [
            ("ixx", self.ixx),
            ("iyy", self.iyy),
            ("izz", self.izz),
            ("jr", self.jr),
            ("kt", self.kt),
            ("kb", self.kb),
            ("arm", self.arm),
            ("dt", self.dt),
        ];
        for (name, value) in named {
            if value <= 0.0 || !value.is_finite() {
                return Err(PlantError::InvalidParams(format!(
                    "quadcopter parameter {name} must be strictly positive, got {value}"
                )));
            }
        }
        Ok(())
    }
}

/// Body-rate derivative `[p', q', r']` for body rates `v` and rotor speeds `u`.
pub fn quad_body_rates_deriv(v: &[f64], u: &[f64], params: &QuadcopterParams) -> Vec<f64> {
    let (p, q, r) = (v[0], v[1], v[2]);
    let sq: Vec<f64> = u.iter().map(|w| w * w).collect();
    let omega_r = -u[0] + u[1] - u[2] + u[3];

    let tau_phi = params.arm * params.kt * (-sq[1] + sq[3]);
    let tau_theta = params.arm * params.kt * (-sq[0] + sq[2]);
    let tau_psi = params.kb * (-sq[0] + sq[1] - sq[2] + sq[3]);

    let QuadcopterParams {
        ixx, iyy, izz, jr, ..
    } = *params;
    vec![
        (iyy - izz) * q * r / ixx - jr * q / ixx * omega_r + tau_phi / ixx,
        (izz - ixx) * p * r / iyy + jr * p / iyy * omega_r + tau_theta / iyy,
        (ixx - iyy) * p * q / izz + tau_psi / izz,
    ]
}

/// Euler-angle rates `R(phi, theta, psi) v`.
pub fn quad_euler_rates(z: &[f64], v: &[f64]) -> Result<Vec<f64>, PlantError> {
    let (phi, theta) = (z[0], z[1]);
    if theta.abs() >= std::f64::consts::FRAC_PI_2 - GIMBAL_GUARD {
        return Err(PlantError::GimbalLock {
            theta,
            guard: GIMBAL_GUARD,
        });
    }
    let (sphi, cphi) = phi.sin_cos();
    let (tt, ct) = (theta.tan(), theta.cos());
    Ok(vec![
        v[0] + sphi * tt * v[1] + cphi * tt * v[2],
        cphi * v[1] - sphi * v[2],
        sphi / ct * v[1] + cphi / ct * v[2],
    ])
}

/// Quadcopter attitude plant: state `[phi, theta, psi, p, q, r]`, input
/// rotor speeds, output body rates. One forward-Euler step per `step`.
pub fn make_quadcopter(params: QuadcopterParams) -> Result<NonlinearPlant, PlantError> {
    params.validate()?;
    let step = move |x: &[f64], u: &[f64]| -> Result<Vec<f64>, PlantError> {
        let (z, v) = x.split_at(3);
        let zdot = quad_euler_rates(z, v)?;
        let vdot = quad_body_rates_deriv(v, u, &params);
        let dt = params.dt;
        Ok(z.iter()
            .zip(&zdot)
            .chain(v.iter().zip(&vdot))
            .map(|(s, d)| s + dt * d)
            .collect())
    };
    let output = |x: &[f64]| x[3..6].to_vec();
    Ok(NonlinearPlant::new((6, 4, 3), params.dt, step, output))
}
