//! Stick-slip motion of a third-order linear plant under relay (Coulomb)
//! feedback: `y''' + a·y'' + b·y' + c·y = −γ·sign(y'')`.
//!
//! - [`sysmodel`]: parameters, decay-rate configurations, state space.
//! - [`stability`]: Routh–Hurwitz, closed-form Lyapunov matrix, harmonic balance.
//! - [`closedform`]: analytic solution of a slip phase.
//! - [`hybridsim`]: event-driven stick/slip engine and cycle metrics.
//! - [`batch`]: data-parallel batches (sequential without the `parallel` feature).

pub mod batch;
pub mod closedform;
pub mod cubic;
pub mod hybridsim;
pub mod stability;
pub mod sysmodel;

pub use batch::{simulate_batch, simulate_batch_sequential, BatchJob};
pub use closedform::{build_slip_solution, SlipSolution};
pub use hybridsim::{simulate, SimConfig, Tolerances, Trajectory};
pub use sysmodel::{RootConfig, State, SystemParams};
