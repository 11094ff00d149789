//! Spectral and time-domain computation of the magnetic-island final state
//! of Alfvén waves in a flowing plasma channel.
//!
//! The crate is organised bottom-up: [`profiles`] holds the background
//! fields and their extension, [`sturmian`] solves the homogeneous
//! degenerate ODE by Picard iteration of Volterra operators, [`spectral`]
//! assembles the Wronskian and the inhomogeneous solution, [`island`]
//! computes the limiting profiles and [`evolution`] integrates the mode
//! equations in time as an independent check.

pub mod error;
pub mod evolution;
pub mod grid;
pub mod island;
pub mod par;
pub mod poly;
pub mod profiles;
pub mod quad;
pub mod smooth;
pub mod spectral;
pub mod sturmian;

pub use error::{Error, Result};
pub use num_complex::Complex64;
