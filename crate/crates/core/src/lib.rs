//! Volatility spillover estimation toolkit.
//!
//! The crate covers the full pipeline from raw price panels to connectedness
//! measures:
//!
//! * [`panel`] loads and aligns daily price panels and derives log returns and
//!   annualized range-based volatilities.
//! * [`stats`] produces descriptive statistics with Jarque-Bera and augmented
//!   Dickey-Fuller diagnostics.
//! * [`optim`] is the shared quasi-Newton minimizer plus finite-difference
//!   derivatives and Hessian-based standard errors.
//! * [`garch`], [`dcc`] and [`bekk`] estimate univariate GARCH(1,1),
//!   two-step DCC-GARCH and full BEKK-GARCH(1,1) models by Gaussian QML.
//! * [`spillover`] fits VARs, computes generalized forecast-error variance
//!   decompositions and builds spillover tables; [`rolling`] repeats that over
//!   sliding windows.
//! * [`simulate`] draws seeded synthetic data from the same recursions.

pub mod bekk;
pub mod dcc;
pub mod error;
pub mod garch;
pub mod linalg;
pub mod optim;
pub mod panel;
pub mod rolling;
pub mod simulate;
pub mod spillover;
pub mod stats;

pub use error::{Error, Result};
