//! Small-signal D-Q models of transmission networks and passivity tests for
//! the four interface-variable formulations built on them.
//!
//! Typical flow:
//!
//! ```
//! use dqpass::{netcase, powerflow};
//!
//! let case = netcase::ieee9();
//! let op = powerflow::solve_powerflow(&case).unwrap();
//! let j = powerflow::build_jlf_analytic(&case, &op).unwrap();
//! let eig = j.symmetric_part_eigenvalues();
//! assert!(eig[0] < 0.0);
//! ```

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dqstamp;
pub mod error;
pub mod netcase;
pub mod par;
pub mod passcheck;
pub mod passivate;
pub mod polarmodels;
pub mod powerflow;
pub mod reference;
pub mod spectral;
pub mod statespace;
pub mod study;

pub use error::{Error, Result};
pub use netcase::{BusId, NetworkCase, VariantFlags};
pub use num_complex::Complex64;
pub use statespace::StateSpace;
