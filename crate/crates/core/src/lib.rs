//! Numerical laboratory for the resource theory of quantum coherence.
//!
//! Modules, bottom-up:
//!
//! - [`qmat`]: dense complex matrices, partial traces, Hermitian eigensolver,
//!   majorization.
//! - [`measures`]: l1-norm, robustness and coherence fraction.
//! - [`channels`]: Kraus channels, IO/SIO/Schur classification,
//!   superoperators and the quantum addition channel.
//! - [`catalysis`]: the correlated-catalysis protocol on classical-quantum
//!   block states and the qutrit dephasing example.
//! - [`phasedisc`]: phase-discrimination games and minimum-error
//!   discrimination.
//! - [`experiments`]: seeded sampling, figure curves, the multiplicativity
//!   violation study and CSV/SVG output.

pub mod catalysis;
pub mod channels;
pub mod error;
pub mod experiments;
pub mod measures;
pub mod phasedisc;
pub mod qmat;

pub use error::{Error, Result};

/// Default validation tolerance for states and channels.
pub const DEFAULT_TOL: f64 = 1e-9;
