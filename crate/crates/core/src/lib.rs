//! Channel simulator for reflecting-surface-assisted massive-MIMO links.
//!
//! The simulator realizes a three-dimensional, non-stationary, geometry-based
//! stochastic channel between a base station (BS), an intelligent reflecting
//! surface (IRS), and a user (UE).  Each of the three sub-links (BS-IRS,
//! IRS-UE, BS-UE) is modelled with twin scatterer clusters whose visibility
//! evolves along the antenna arrays, and the IRS contributes a per-element
//! reflection phase that can be tuned to maximize the received power.
//!
//! Everything is driven by a declarative scenario description
//! ([`scenario::Scenario`]) plus a master seed; identical inputs reproduce
//! byte-identical outputs regardless of thread count.
//!
//! ```
//! use risim::scenario::Scenario;
//! use risim::experiments;
//!
//! let scenario = Scenario::preset("fig5").unwrap();
//! let run = experiments::RunOptions { seed: 1, ensemble: 200, ..Default::default() };
//! let tables = experiments::run_acf(&scenario, &run).unwrap();
//! assert!(!tables.is_empty());
//! ```

// Validation guards are written `!(x > 0.0)` on purpose: unlike
// `x <= 0.0`, the negated comparison also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod clusters;
pub mod cmat;
pub mod error;
pub mod experiments;
pub mod fading;
pub mod geometry;
pub mod irs_control;
pub mod link;
pub mod link_budget;
pub mod output;
pub mod scenario;
pub mod seeds;
pub mod stats;

pub use error::{Error, Result};
pub use scenario::Scenario;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Crate version reported by the CLI and written into output headers.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
