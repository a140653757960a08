//! Process-capability analysis toolkit.
//!
//! The crate is organized in layers:
//!
//! * [`special`] — scalar special functions (log-gamma, incomplete
//!   gamma/beta, normal cdf and quantile);
//! * [`dist`] — process model families and auxiliary distributions;
//! * [`classical`] — moment-based indices (c_p, c_pk, c_pm, c_pmk, s_pk and
//!   the two-parameter superstructure);
//! * [`yield_based`] — quantile- and yield-based indices for non-normal
//!   processes;
//! * [`generalized`] — the yield-ratio index family c_py / c_pyk / c_ptk;
//! * [`inference`] — model fitting, plug-in estimation, bootstrap intervals,
//!   Monte Carlo yield checks;
//! * [`multivariate`] — structural-function transforms and multivariate
//!   capability indices;
//! * [`report`] — index registry and report entry types shared with front
//!   ends.

pub mod classical;
pub mod dist;
pub mod error;
pub mod generalized;
pub mod inference;
pub mod multivariate;
pub mod report;
pub mod special;
pub mod yield_based;

pub use error::{Error, Result};
