//! Boost PFC inductor simulator.
//!
//! Synthesizes the inductor current over a mains half-cycle for
//! boundary/quasi-resonant, fixed-frequency CCM and mixed operation, then
//! evaluates DC and eddy-current copper loss, gap-fringing loss and
//! Steinmetz core loss, solves the axial temperature profile of the coil and
//! proposes a litz-wire replacement.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod capture;
pub mod controller;
pub mod error;
pub mod exec;
pub mod library;
pub mod litz;
pub mod losses;
pub mod magnetics;
pub mod numeric;
pub mod report;
pub mod scenario;
pub mod spectrum;
pub mod thermal;

pub use error::{Error, Result};
pub use exec::Strategy;
