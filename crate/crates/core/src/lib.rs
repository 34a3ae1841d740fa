//! Automatic target-PDF generation for histogram specification.
//!
//! The enhancement pipeline derives a desired gray-level distribution from
//! the input image itself:
//!
//! 1. the image histogram is smoothed and peak-normalized ([`histogram`]);
//! 2. a sum of symmetric Gaussians is fitted to it by gradient descent
//!    ([`gaussfit`]);
//! 3. upper and lower membership functions are fitted to the envelopes
//!    around that fit, forming an interval type-2 footprint of uncertainty
//!    ([`fou`]);
//! 4. per-level membership values are extracted with one of four methods
//!    ([`membership`]) and turned into a target PDF ([`pdfgen`]);
//! 5. the image is remapped by histogram specification ([`hspec`]).
//!
//! [`pipeline`] runs the stages end to end and compares against the
//! histogram-equalization and RMSHE baselines using the entropy metric in
//! [`metrics`]. [`cli`] backs the `fuzzy-histspec` binary.
//!
//! ```no_run
//! use fuzzy_histspec::{imagio, pipeline::{run_enhance, PipelineConfig}, MvMethod};
//!
//! let img = imagio::load_image("input.pgm").unwrap();
//! let cfg = PipelineConfig { method: MvMethod::Km, ..Default::default() };
//! let result = run_enhance(&img, &cfg).unwrap();
//! println!("AIC {:.4} -> {:.4}", result.aic_in, result.aic_out);
//! imagio::save_image(&result.enhanced, "enhanced.pgm").unwrap();
//! ```

pub mod cli;
pub mod error;
pub mod fou;
pub mod gaussfit;
pub mod histogram;
pub mod hspec;
pub mod imagio;
pub mod membership;
pub mod metrics;
pub mod pdfgen;
pub mod pipeline;
pub mod report;
pub mod synthetic;

pub use error::{Error, Result, Stage};
pub use imagio::GrayImage;
pub use membership::MvMethod;

/// Number of gray levels in an 8-bit image.
pub const LEVELS: usize = 256;

/// Largest gray level, `LEVELS - 1`.
pub const MAX_LEVEL: f64 = (LEVELS - 1) as f64;

/// One real value per gray level.
pub type Series = [f64; LEVELS];
