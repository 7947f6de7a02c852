//! Factor modeling of high-dimensional multivariate time series.
//!
//! Observations `y_n = Q f_n + e_n` are reduced to a `K x mK` matrix of
//! stacked lag-autocovariances. The number of factors is read off as the
//! numerical rank of that matrix using a rank-revealing QR decomposition,
//! and the loading matrix is taken from the leading columns of its
//! orthonormal factor. The eigen-decomposition (EVD) and PCA baselines,
//! the simulation generators used to compare them, and a rolling-window
//! forecast evaluator live alongside.
//!
//! ```
//! use lagfactor::simgen::gen_sim1;
//! use lagfactor::factor::{fit_rrqr, default_p_cap};
//!
//! let data = gen_sim1(20, 200, 7).unwrap();
//! let fit = fit_rrqr(&data.y, 1, 5, None, default_p_cap(20)).unwrap();
//! assert_eq!(fit.p_hat, 1);
//! ```

pub mod baselines;
pub mod covariance;
mod error;
pub mod factor;
pub mod forecast;
pub mod linalg;
mod par;
pub mod rrqr;
pub mod simgen;
pub mod tsdata;

pub use error::{Error, Result};

pub use baselines::{fit_evd, fit_pca};
pub use covariance::{build_augmented, sample_autocov, AugmentedCov, LagCovariance};
pub use factor::{fit_rrqr, scan_model_order, FactorModelFit, Method, ModelOrderScan};
pub use rrqr::{gs_qr, hybrid1, hybrid2, hybrid3, qr_cp, singular_values, Permutation, QrFactors, RrqrResult};
pub use tsdata::{Orientation, TimeSeries};
