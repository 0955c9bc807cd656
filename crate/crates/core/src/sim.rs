//! Closed-loop simulation of a plant under the controller.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::controller::{update, UtcError, UtcParams, UtcState};
use crate::linalg::{norm2, vec_sub, Mat};
use crate::plant::{Plant, PlantError, PlantModel};

/// Default fraction of steps treated as the "tail" by limsup metrics.
pub const DEFAULT_TAIL_FRACTION: f64 = 0.1;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error("controller failed at step {step}: {source}")]
    Controller { step: usize, source: UtcError },
    #[error("plant failed at step {step}: {source}")]
    Plant { step: usize, source: PlantError },
}

/// Reference signal for the plant output.
#[derive(Clone, Debug, PartialEq)]
pub enum Reference {
    /// Regulation to the origin.
    Zero,
    /// `r_i(t) = amplitude_i * sin(2 pi frequency_hz_i t + phase_i)`.
    Sinusoid {
        amplitude: Vec<f64>,
        frequency_hz: Vec<f64>,
        phase: Vec<f64>,
    },
}

impl Reference {
    /// Value at step `k`; `dt` converts steps to seconds.
    pub fn at(&self, k: usize, dt: f64, dim: usize) -> Vec<f64> {
        match self {
            Reference::Zero => vec![0.0; dim],
            Reference::Sinusoid {
                amplitude,
                frequency_hz,
                phase,
            } => {
                let t = k as f64 * dt;
                amplitude
                    .iter()
                    .zip(frequency_hz)
                    .zip(phase)
                    .map(|((a, f), ph)| a * (2.0 * std::f64::consts::PI * f * t + ph).sin())
                    .collect()
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct Scenario {
    pub plant: PlantModel,
    pub params: UtcParams,
    pub horizon: usize,
    /// Initial states are drawn uniformly from `[-h_i, h_i]`.
    pub x0_half_width: Vec<f64>,
    pub seed: u64,
    pub reference: Reference,
    pub u0: Vec<f64>,
    pub p0: Mat,
}

impl Scenario {
    /// Scenario with `u0 = 0` and `P0 = Q_u`.
    pub fn new(
        plant: PlantModel,
        params: UtcParams,
        horizon: usize,
        x0_half_width: Vec<f64>,
        seed: u64,
    ) -> Self {
        let m = plant.input_dim();
        let p0 = params.q_u.clone();
        Self {
            plant,
            params,
            horizon,
            x0_half_width,
            seed,
            reference: Reference::Zero,
            u0: vec![0.0; m],
            p0,
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let invalid = |m: String| Err(SimError::Invalid(m));
        if self.horizon < 1 {
            return invalid("horizon must be at least 1".into());
        }
        self.params
            .validate_for(&self.plant)
            .map_err(|e| SimError::Invalid(e.to_string()))?;
        let (n, m, p) = (
            self.plant.state_dim(),
            self.plant.input_dim(),
            self.plant.output_dim(),
        );
        if self.x0_half_width.len() != n {
            return invalid(format!(
                "x0 box has {} entries, expected {n}",
                self.x0_half_width.len()
            ));
        }
        if self
            .x0_half_width
            .iter()
            .any(|h| *h < 0.0 || !h.is_finite())
        {
            return invalid("x0 box half-widths must be finite and non-negative".into());
        }
        if self.u0.len() != m {
            return invalid(format!("u0 has {} entries, expected {m}", self.u0.len()));
        }
        if self.p0.shape() != (m, m) {
            return invalid(format!("P0 must be {m}x{m}"));
        }
        let (lo, _) = crate::linalg::eig_extrema_sym(&self.p0)
            .map_err(|e| SimError::Invalid(format!("P0: {e}")))?;
        if lo < -crate::linalg::default_tol(&self.p0) {
            return invalid("P0 must be positive semi-definite".into());
        }
        if let Reference::Sinusoid {
            amplitude,
            frequency_hz,
            phase,
        } = &self.reference
        {
            if amplitude.len() != p || frequency_hz.len() != p || phase.len() != p {
                return invalid(format!(
                    "sinusoid reference must have {p} entries per field"
                ));
            }
            if frequency_hz.iter().any(|f| f.is_nan() || *f < 0.0) {
                return invalid("reference frequencies must be non-negative".into());
            }
        }
        Ok(())
    }

    /// Seconds per step used by the reference; 1 for natively discrete plants.
    pub fn time_step(&self) -> f64 {
        let dt = self.plant.dt();
        if dt > 0.0 {
            dt
        } else {
            1.0
        }
    }

    pub fn initial_state(&self) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        self.x0_half_width
            .iter()
            .map(|&h| if h > 0.0 { rng.gen_range(-h..=h) } else { 0.0 })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepRecord {
    pub k: usize,
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub y: Vec<f64>,
    pub r: Vec<f64>,
    /// Prediction formed at this step; absent for the initial record.
    pub y_pred: Option<Vec<f64>>,
    pub err_norm: f64,
    pub gain_fro: f64,
    pub p_trace: f64,
    /// Stored control covariance after the update.
    pub p: Mat,
    /// Negative eigenvalue magnitude removed by the covariance repair.
    pub clamped: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub records: Vec<StepRecord>,
    /// Gain from the final controller update.
    pub final_gain: Option<Mat>,
}

impl Trajectory {
    pub fn horizon(&self) -> usize {
        self.records.len() - 1
    }

    pub fn errors(&self) -> impl Iterator<Item = f64> + '_ {
        self.records.iter().map(|r| r.err_norm)
    }
}

/// Simulates the closed loop. Each step applies `u_k` to the plant, then asks
/// the controller for `u_{k+1}` from the new state and reference.
pub fn run(scn: &Scenario) -> Result<Trajectory, SimError> {
    scn.validate()?;
    let plant = &scn.plant;
    let p = plant.output_dim();
    let dt = scn.time_step();

    let mut ctrl_rng = ChaCha8Rng::seed_from_u64(scn.seed);
    ctrl_rng.set_stream(1);

    let mut x = scn.initial_state();
    let mut state = UtcState::new(scn.u0.clone(), scn.p0.clone());
    let mut records = Vec::with_capacity(scn.horizon + 1);

    let y0 = plant.output(&x);
    let r0 = scn.reference.at(0, dt, p);
    records.push(StepRecord {
        k: 0,
        err_norm: norm2(&vec_sub(&r0, &y0)),
        x: x.clone(),
        u: state.u.clone(),
        y: y0,
        r: r0,
        y_pred: None,
        gain_fro: 0.0,
        p_trace: state.p.trace(),
        p: state.p.clone(),
        clamped: 0.0,
    });

    let mut final_gain = None;
    for k in 1..=scn.horizon {
        x = plant
            .step(&x, &state.u)
            .map_err(|source| SimError::Plant { step: k, source })?;
        let r = scn.reference.at(k, dt, p);
        let res = update(&state, &x, &r, plant, &scn.params, &mut ctrl_rng)
            .map_err(|source| SimError::Controller { step: k, source })?;
        state = UtcState::new(res.u_next, res.p_next);

        let y = plant.output(&x);
        records.push(StepRecord {
            k,
            err_norm: norm2(&vec_sub(&r, &y)),
            x: x.clone(),
            u: state.u.clone(),
            y,
            r,
            y_pred: Some(res.y_pred),
            gain_fro: res.gain.frobenius_norm(),
            p_trace: state.p.trace(),
            p: state.p.clone(),
            clamped: res.clamped,
        });
        final_gain = Some(res.gain);
    }
    Ok(Trajectory {
        records,
        final_gain,
    })
}

/// First step from which the tracking error stays within `band`; the record
/// count (`horizon + 1`) if it never settles.
pub fn settling_time(traj: &Trajectory, band: f64) -> usize {
    assert!(band > 0.0, "settling band must be positive");
    traj.records
        .iter()
        .rposition(|r| r.err_norm > band)
        .map_or(0, |i| i + 1)
}

fn tail_len(len: usize, tail_fraction: f64) -> usize {
    assert!(
        tail_fraction > 0.0 && tail_fraction <= 1.0,
        "tail fraction must lie in (0, 1]"
    );
    ((len as f64 * tail_fraction).ceil() as usize).clamp(1, len)
}

/// Largest tracking error over the final `tail_fraction` of records.
pub fn error_limsup(traj: &Trajectory, tail_fraction: f64) -> f64 {
    let n = traj.records.len();
    let tail = tail_len(n, tail_fraction);
    traj.records[n - tail..]
        .iter()
        .map(|r| r.err_norm)
        .fold(0.0, f64::max)
}

/// Largest tracking error before the tail window, excluding the initial record.
pub fn transient_peak(traj: &Trajectory, tail_fraction: f64) -> f64 {
    let n = traj.records.len();
    let tail = tail_len(n, tail_fraction);
    traj.records[1.min(n)..n - tail]
        .iter()
        .map(|r| r.err_norm)
        .fold(0.0, f64::max)
}

/// Writes the trajectory as CSV: `k, x_*, u_*, y_*, r_*, err_norm, K_fro, P_trace`.
pub fn export_csv(traj: &Trajectory, path: &Path) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_csv(traj, &mut w)?;
    w.flush()
}

pub fn write_csv<W: Write>(traj: &Trajectory, w: &mut W) -> io::Result<()> {
    let first = &traj.records[0];
    let mut header = vec!["k".to_string()];
    for (prefix, len) in [
        ("x", first.x.len()),
        ("u", first.u.len()),
        ("y", first.y.len()),
        ("r", first.r.len()),
    ] {
        header.extend((0..len).map(|i| format!("{prefix}_{i}")));
    }
    header.extend(["err_norm", "K_fro", "P_trace"].map(String::from));
    writeln!(w, "{}", header.join(","))?;

    for rec in &traj.records {
        write!(w, "{}", rec.k)?;
        let values = rec
            .x
            .iter()
            .chain(&rec.u)
            .chain(&rec.y)
            .chain(&rec.r)
            .chain([&rec.err_norm, &rec.gain_fro, &rec.p_trace]);
        for v in values {
            write!(w, ",{v:.15e}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// Outcome of one horizon length in a sweep.
#[derive(Clone, Debug)]
pub struct SweepEntry {
    pub n_steps: usize,
    pub trajectory: Trajectory,
    pub wall_time: Duration,
}

/// Runs the scenario once per prediction horizon, concurrently, all with the
/// scenario's seed. Results come back in the order of `n_list`.
pub fn sweep(scn: &Scenario, n_list: &[usize]) -> Result<Vec<SweepEntry>, SimError> {
    let mut seen = std::collections::BTreeSet::new();
    for &n in n_list {
        if n == 0 {
            return Err(SimError::Invalid(
                "prediction horizons must be at least 1".into(),
            ));
        }
        if !seen.insert(n) {
            return Err(SimError::Invalid(format!(
                "duplicate prediction horizon {n}"
            )));
        }
    }
    n_list
        .par_iter()
        .map(|&n| {
            let mut s = scn.clone();
            s.params.n_steps = n;
            let start = Instant::now();
            let trajectory = run(&s)?;
            Ok(SweepEntry {
                n_steps: n,
                trajectory,
                wall_time: start.elapsed(),
            })
        })
        .collect()
}
