//! Reference-based quality measures (RMSE, ERGAS, SAM) and Pearson
//! correlation for cross-resolution result analysis.

use std::fmt;
use std::str::FromStr;

use crate::error::{invalid_argument, invalid_input, Error, Result};
use crate::fusion::{Correction, Method};
use crate::raster::Raster;

/// Validation protocol a quality record belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Protocol {
    /// Fuse at original resolution, degrade the result 1:4, compare to
    /// the original MS (consistency property).
    OriginalConsistency,
    /// Degrade the inputs 1:4, fuse, compare to the original MS
    /// (synthesis property at reduced scale).
    Reduced4,
    /// Degrade the inputs 1:2, fuse, degrade the result 1:2 more,
    /// compare to the original MS.
    Reduced2,
}

impl Protocol {
    pub const ALL: [Protocol; 3] = [
        Protocol::OriginalConsistency,
        Protocol::Reduced4,
        Protocol::Reduced2,
    ];

    pub fn token(self) -> &'static str {
        match self {
            Protocol::OriginalConsistency => "original",
            Protocol::Reduced4 => "reduced_4",
            Protocol::Reduced2 => "reduced_2",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Protocol::OriginalConsistency => "Original",
            Protocol::Reduced4 => "Reduced 4x4",
            Protocol::Reduced2 => "Reduced 2x2",
        }
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Protocol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase();
        Protocol::ALL
            .into_iter()
            .find(|p| p.token() == norm)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown protocol '{s}'")))
    }
}

/// One cell of a validation table: ERGAS and SAM for a (dataset,
/// protocol, method, correction) combination; `None` encodes "na".
#[derive(Debug, Clone, PartialEq)]
pub struct QualityRecord {
    pub dataset: String,
    pub protocol: Protocol,
    pub method: Method,
    pub correction: Correction,
    pub ergas: Option<f64>,
    pub sam: Option<f64>,
}

impl QualityRecord {
    pub fn na(dataset: &str, protocol: Protocol, method: Method, correction: Correction) -> Self {
        Self {
            dataset: dataset.into(),
            protocol,
            method,
            correction,
            ergas: None,
            sam: None,
        }
    }
}

/// Root mean squared difference of two equally sized bands.
pub fn rmse(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() || a.is_empty() {
        return invalid_argument("rmse needs two equally sized non-empty bands");
    }
    let acc: f64 = a.iter().zip(b).map(|(&x, &y)| (x - y) * (x - y)).sum();
    Ok((acc / a.len() as f64).sqrt())
}

/// Relative dimensionless global error in synthesis:
/// `100/scale * sqrt(1/K * sum_k (RMSE_k / mean_k)^2)`.
pub fn ergas(test: &Raster, reference: &Raster, scale: f64) -> Result<f64> {
    if !test.same_dims(reference) || test.bands() != reference.bands() {
        return invalid_argument("ergas needs matching dimensions and band counts");
    }
    if scale <= 0.0 {
        return invalid_argument("ergas scale must be positive");
    }
    let k = test.bands();
    let mut acc = 0.0;
    for band in 0..k {
        let r = reference.band(band);
        let mean = r.iter().sum::<f64>() / r.len() as f64;
        if mean == 0.0 {
            return invalid_input(format!("reference band {band} has zero mean"));
        }
        let e = rmse(test.band(band), r)?;
        acc += (e / mean) * (e / mean);
    }
    Ok(100.0 / scale * (acc / k as f64).sqrt())
}

/// Mean spectral angle in degrees. Pixels where either spectral vector is
/// (near-)zero are skipped; the skipped count is reported through the
/// second tuple element of [`sam_with_skips`].
pub fn sam(test: &Raster, reference: &Raster) -> Result<f64> {
    sam_with_skips(test, reference).map(|(angle, _)| angle)
}

pub fn sam_with_skips(test: &Raster, reference: &Raster) -> Result<(f64, usize)> {
    if !test.same_dims(reference) || test.bands() != reference.bands() {
        return invalid_argument("sam needs matching dimensions and band counts");
    }
    if test.bands() < 2 {
        return invalid_argument("sam needs at least two bands");
    }
    let n = test.pixels_per_band();
    let k = test.bands();
    let mut acc = 0.0;
    let mut skipped = 0usize;
    for i in 0..n {
        let (mut dot, mut nt, mut nr) = (0.0, 0.0, 0.0);
        for band in 0..k {
            let t = test.band(band)[i];
            let r = reference.band(band)[i];
            dot += t * r;
            nt += t * t;
            nr += r * r;
        }
        let norm = (nt * nr).sqrt();
        if norm < 1e-12 {
            skipped += 1;
            continue;
        }
        acc += (dot / norm).clamp(-1.0, 1.0).acos();
    }
    if skipped == n {
        return invalid_input("all spectral vectors degenerate");
    }
    Ok((
        acc / (n - skipped) as f64 * 180.0 / std::f64::consts::PI,
        skipped,
    ))
}

/// Sample Pearson correlation. NaN entries encode "na" and are dropped
/// pairwise; fewer than two remaining pairs or zero variance is an error.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return invalid_argument("pearson needs equally long sequences");
    }
    let pairs: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(a, b)| !a.is_nan() && !b.is_nan())
        .map(|(&a, &b)| (a, b))
        .collect();
    if pairs.len() < 2 {
        return invalid_input("pearson needs at least two valid pairs");
    }
    let n = pairs.len() as f64;
    let mx = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in &pairs {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return invalid_input("pearson undefined for zero-variance input");
    }
    Ok(sxy / (sxx * syy).sqrt())
}
