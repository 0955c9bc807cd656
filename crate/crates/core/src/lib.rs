//! Unscented transform control for discrete-time plants with bounded
//! nonlinearities.
//!
//! - [`linalg`]: dense matrix kernel (PSD square root, Stein solver, norms).
//! - [`plant`]: LTI-plus-bounded-nonlinearity plants, the ADMIRE attitude
//!   model and a quadcopter attitude model.
//! - [`controller`]: sigma-point generation, N-step prediction and the
//!   controller update.
//! - [`stability`]: fixed-gain closed loop, Lyapunov certificate and its
//!   empirical falsification.
//! - [`sim`]: closed-loop simulation, metrics and CSV export.
//! - [`cli`]: configuration files and the `utc` command-line front end.

pub mod cli;
pub mod controller;
pub mod linalg;
pub mod plant;
pub mod sim;
pub mod stability;

pub use controller::{UpdateResult, UtcParams, UtcState};
pub use linalg::Mat;
pub use plant::{LtiPlant, NonlinearPlant, Plant, PlantModel};
