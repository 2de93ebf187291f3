#![allow(clippy::neg_cmp_op_on_partial_ord)]
//! Local-to-normal vibrational mode transitions in A₂B triatomics driven by
//! a time-dependent bond angle, solved exactly through the Ermakov equation.
//!
//! The numerical core is generic over [`Real`] (`f32` or `f64`); the
//! aliases below fix it to `f64`.

pub mod algebra;
pub mod dynamics;
pub mod ermakov;
pub mod error;
pub mod molecule;
pub mod ode;
pub mod scalar;
pub mod scenario;
pub mod schedule;
pub mod tabular;
pub mod units;
pub mod wavefunction;

pub use algebra::ResonanceWeights;
pub use dynamics::{ModeOccupation, ObservableSeries, Uncertainties};
pub use ermakov::{ErmakovState, ModeTrajectories, SolverConfig};
pub use error::{Error, Result};
pub use molecule::{builtin, builtin_table, NormalMode};
pub use scalar::Real;
pub use scenario::{RunConfig, RunManifest, RunOutput};
pub use schedule::ScheduleKind;

pub type Molecule = molecule::MoleculeSpec<f64>;
pub type Schedule = schedule::AngleSchedule<f64>;
pub type Solver = ermakov::SolverConfig<f64>;
pub type State = ermakov::ErmakovState<f64>;
pub type Trajectory = ermakov::ErmakovTrajectory<f64>;
pub type Trajectories = ermakov::ModeTrajectories<f64>;
pub type Observables = dynamics::ObservableSeries<f64>;
