//! Numerical laboratory for n-species chemostat models with constant material
//! delays and periodic forcing.
//!
//! The model tracks a nutrient concentration `S` and `n` competing species
//! `x_1..x_n` in a vessel with periodic dilution rate `d(t)` and periodic
//! nutrient feed `S_0(t)`:
//!
//! ```text
//! S'(t)   = d(t) (S_0(t) - S(t)) - sum_i p_i(S(t)) x_i(t)
//! x_i'(t) = -d(t) x_i(t) + exp(-int_{t-tau_i}^t d) p_i(S(t-tau_i)) x_i(t-tau_i)
//! ```
//!
//! The crate provides:
//! * forward simulation of the delay system by the method of steps
//!   ([`simulate`](simulate::simulate)),
//! * the explicit periodic washout solution `y*(t)` of the species-free
//!   nutrient equation ([`washout_solution`](washout::washout_solution)),
//! * numeric margins for every sufficient condition used to classify the
//!   dynamics: extinction, existence, persistence, exclusion and coexistence
//!   ([`conditions`]),
//! * construction of nontrivial periodic solutions as fixed points of the
//!   period-map integral operator, with a Poincare shooting cross-check
//!   ([`solver`]).

pub mod conditions;
pub mod config;
pub mod defaults;
mod error;
pub mod model;
pub mod periodic;
pub mod quad;
pub mod report;
pub mod response;
pub mod simulate;
pub mod solver;
pub mod sweep;
pub mod washout;

pub use error::Error;
pub type Result<T> = std::result::Result<T, Error>;

pub use conditions::CascadeStage;
pub use model::{ChemostatModel, Species};
pub use periodic::PeriodicFn;
pub use quad::{QuadRule, QuadratureGrid};
pub use report::{ConditionEntry, ConditionId, ConditionReport, PersistenceEstimate, Verdict};
pub use response::ResponseFn;
pub use solver::{ConeParams, PeriodicCandidate, PeriodicOrbit, SolveOptions};
pub use washout::WashoutSolution;
