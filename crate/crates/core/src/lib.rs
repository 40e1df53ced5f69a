//! Pansharpening engine and validation harness.
//!
//! The library fuses a low-resolution multispectral image with a
//! high-resolution panchromatic image using component-substitution or
//! high-pass-filtering methods (additive or multiplicative), wraps five
//! optional corrections around them, and validates results with the
//! ERGAS/SAM measures across three reduced-resolution protocols.
//!
//! Module map:
//! - [`raster`]: the multi-band image carrier plus resampling primitives
//! - [`filters`]: MTF-matched Gaussian/Butterworth low-pass design
//! - [`spectral`]: intensity synthesis, BVLS weight estimation, sensor
//!   profiles, shift registration
//! - [`enhance`]: haze correction, histogram matching, Pan correction
//! - [`fusion`]: the four fusion methods and the correction pipeline
//! - [`metrics`]: RMSE, ERGAS, SAM, Pearson correlation
//! - [`validate`]: the three validation protocols, the experiment
//!   matrix, cross-scale correlation, synthetic scenes
//! - [`report`]: table/record formatting
//! - [`fixtures`]: bundled benchmark tables

pub mod enhance;
pub mod error;
pub mod filters;
pub mod fixtures;
pub mod fusion;
pub mod metrics;
pub mod raster;
pub mod report;
pub mod spectral;
pub mod validate;

pub use error::{Error, Result};
pub use filters::{CutoffMode, FilterKind, FilterSpec, SpatialKernel};
pub use fusion::{Correction, Fused, FusionConfig, HistVariant, Method, WeightDomain};
pub use metrics::{Protocol, QualityRecord};
pub use raster::{BandStats, Raster};
pub use spectral::{SensorProfile, Weights};
pub use validate::{ProtocolRun, SyntheticScene};
