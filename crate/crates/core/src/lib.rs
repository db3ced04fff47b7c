//! Oscillator-based Ising machines.
//!
//! Two phase-oscillator models minimise the Ising Hamiltonian
//! `H(σ) = -Σ_{i<j} J_ij σ_i σ_j`:
//!
//! ```text
//! OIM: dφ_i/dt = -K Σ_j J_ij sin(φ_i - φ_j) - K_s sin 2φ_i
//! DIM: dφ_i/dt = -K Σ_j J_ij sin(φ_i + φ_j) - K_s sin 2φ_i
//! ```
//!
//! The crate covers graph input and Max-Cut bookkeeping ([`graph`]),
//! integration of both models ([`dynamics`]), Jacobian spectra at Type I
//! fixed points ([`stability`]), ground-state estimation from the DIM
//! bifurcation ([`bifurcation`]), exhaustive ground truth ([`oracle`]) and
//! seeded OIM/DIM portfolio trials ([`harness`]).
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix the scalar to `f64` or `f32`.

pub mod bifurcation;
pub mod dynamics;
pub mod error;
pub mod graph;
pub mod harness;
pub mod oracle;
pub mod scalar;
pub mod stability;

pub use dynamics::{integrate, AnnealSchedule, IntegratorConfig, ModelKind, PhaseState, Trajectory};
pub use error::{Error, Result};
pub use graph::{CouplingMatrix, CouplingMode, Graph, SpinConfig};
pub use scalar::Real;

pub type Graph64 = Graph<f64>;
pub type CouplingMatrix64 = CouplingMatrix<f64>;
pub type PhaseState64 = PhaseState<f64>;
pub type AnnealSchedule64 = AnnealSchedule<f64>;
pub type Trajectory64 = Trajectory<f64>;

pub type Graph32 = Graph<f32>;
pub type CouplingMatrix32 = CouplingMatrix<f32>;
pub type PhaseState32 = PhaseState<f32>;
pub type AnnealSchedule32 = AnnealSchedule<f32>;
pub type Trajectory32 = Trajectory<f32>;
