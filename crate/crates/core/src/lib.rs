//! Exact simulator for first-order four-wave-mixing amplitudes of bosonic and
//! fermionic matter waves.
//!
//! Three independent routes compute the same scattered norm:
//!
//! * [`scatter`] applies the pair-scattering event to first-quantized states
//!   built in [`fock`], path by path;
//! * [`oracle`] applies ladder operators in the occupation-number basis;
//! * [`closed_form`] evaluates the analytic expressions.
//!
//! [`runner`] and [`config`] drive grids of parameters through the engines
//! and serialize the comparison records.

pub mod amplitude;
pub mod closed_form;
pub mod config;
pub mod error;
pub mod fock;
pub mod oracle;
pub mod permutation;
pub mod runner;
pub mod scatter;

pub use amplitude::{approx_eq, AmplitudeForm, Complex};
pub use error::StateError;
pub use fock::{ManyBodyState, Mode, ProductTerm, SectorSpec, SingleParticleState, Statistics};
