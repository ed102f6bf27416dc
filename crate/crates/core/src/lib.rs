//! Explicit staggered-grid finite-difference schemes for the Camassa-Holm
//! equation in hyperbolic-elliptic form
//!
//! ```text
//! u_t + u u_x + P_x = 0,    P - P_xx = u^2 + (u_x)^2 / 2,
//! ```
//!
//! with a first-order upwind scheme ([`scheme1`]), its second-order
//! finite-volume extension ([`scheme2`]), exact peakon references
//! ([`peakons`]), diagnostics and the experiment drivers ([`harness`]).

pub mod cfl;
pub mod config;
pub mod csv;
pub mod diagnostics;
pub mod elliptic;
pub mod error;
pub mod harness;
pub mod mesh;
pub mod peakons;
pub mod scheme1;
pub mod scheme2;
pub mod stepping;

pub use cfl::{CflMode, CflPolicy};
pub use config::{parse_config, RunConfig, Scheme};
pub use error::{Error, Result};
pub use mesh::{GridFn, GridSpec, Site};
