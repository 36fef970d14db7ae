//! Robust wavelet density estimation under Huber contamination.
//!
//! Densities on `[0,1]^D` are represented by their periodized wavelet
//! coefficients. Losses are integral probability metrics over Besov balls,
//! which reduce to weighted sequence norms of coefficient differences.
//!
//! ```
//! use besov_robust::{besov::{besov_ipm, BesovParams}, coefficients::exact_coeffs,
//!     density::{sample, DensityModel}, estimators::{estimate, EstimatorConfig},
//!     wavelet::WaveletFamily};
//!
//! let family = WaveletFamily::haar();
//! let truth = DensityModel::uniform(1);
//! let x = sample(&truth, 4096, 7).unwrap();
//! let est = estimate(&x, &family, &EstimatorConfig::linear(4)).unwrap();
//! let exact = exact_coeffs(&truth, &family, 4).unwrap();
//! let tv = BesovParams::loss_preset("tv").unwrap();
//! assert!(besov_ipm(&est, &exact, &tv).unwrap() < 0.5);
//! ```
#![no_std]

extern crate alloc;

pub mod besov;
pub mod coefficients;
pub mod contamination;
pub mod density;
pub mod error;
pub mod estimators;
pub mod harness;
pub mod math;
pub mod points;
pub mod quadrature;
pub mod rng;
pub mod tree;
pub mod wavelet;

#[cfg(feature = "serde")]
mod serde_ext;

pub use error::{Error, Result};
