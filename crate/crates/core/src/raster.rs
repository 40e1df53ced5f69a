//! Multi-band raster storage, resampling, decimation, shifting and
//! per-band statistics.
//!
//! Samples are 64-bit reals, band-sequential, row-major within a band.
//! Resampling follows the pixel-center convention: output pixel `j` at
//! magnification `f` reads the input at coordinate `(j + 0.5) / f - 0.5`.
//! Neighborhood operations reflect at the borders (half-sample mirror);
//! `shift_image` replicates edge pixels instead.

use rayon::prelude::*;

use crate::error::{invalid_argument, Result};
use crate::filters::SpatialKernel;

/// Multi-band grid of radiance samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    width: usize,
    height: usize,
    bands: usize,
    pixel_size: f64,
    samples: Vec<f64>,
}

impl Raster {
    /// Builds a raster, validating dimensions, sample count and finiteness.
    pub fn new(
        width: usize,
        height: usize,
        bands: usize,
        pixel_size: f64,
        samples: Vec<f64>,
    ) -> Result<Self> {
        if width == 0 || height == 0 || bands == 0 {
            return invalid_argument(format!(
                "raster dimensions must be positive, got {width}x{height}x{bands}"
            ));
        }
        let expected = width.checked_mul(height).and_then(|p| p.checked_mul(bands));
        if expected != Some(samples.len()) {
            return invalid_argument(format!(
                "sample count {} does not match {width}x{height}x{bands}",
                samples.len()
            ));
        }
        if !samples.iter().all(|v| v.is_finite()) {
            return invalid_argument("raster samples must be finite");
        }
        Ok(Self {
            width,
            height,
            bands,
            pixel_size,
            samples,
        })
    }

    /// Constant-valued raster with unit pixel size.
    pub fn filled(width: usize, height: usize, bands: usize, value: f64) -> Result<Self> {
        Self::new(
            width,
            height,
            bands,
            1.0,
            vec![value; width * height * bands],
        )
    }

    /// Single-band raster from per-pixel values.
    pub fn single_band(width: usize, height: usize, samples: Vec<f64>) -> Result<Self> {
        Self::new(width, height, 1, 1.0, samples)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bands(&self) -> usize {
        self.bands
    }

    pub fn pixel_size(&self) -> f64 {
        self.pixel_size
    }

    pub fn pixels_per_band(&self) -> usize {
        self.width * self.height
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    /// Samples of band `k` (row-major). Panics if `k` is out of range;
    /// fallible band access goes through [`band_stats`] and friends.
    pub fn band(&self, k: usize) -> &[f64] {
        assert!(
            k < self.bands,
            "band index {k} out of range ({})",
            self.bands
        );
        let n = self.pixels_per_band();
        &self.samples[k * n..(k + 1) * n]
    }

    pub fn sample(&self, band: usize, x: usize, y: usize) -> f64 {
        self.band(band)[y * self.width + x]
    }

    pub fn same_dims(&self, other: &Raster) -> bool {
        self.width == other.width && self.height == other.height
    }

    /// Replaces the informational pixel size.
    pub fn with_pixel_size(mut self, pixel_size: f64) -> Self {
        self.pixel_size = pixel_size;
        self
    }

    /// Single-band raster sharing this raster's geometry.
    pub fn extract_band(&self, k: usize) -> Result<Self> {
        if k >= self.bands {
            return invalid_argument(format!("band {k} out of range ({})", self.bands));
        }
        Raster::new(
            self.width,
            self.height,
            1,
            self.pixel_size,
            self.band(k).to_vec(),
        )
    }

    /// Stacks single-band rasters of identical geometry into one raster.
    pub fn stack(bands: &[Raster]) -> Result<Self> {
        let first = bands
            .first()
            .ok_or_else(|| crate::error::Error::InvalidArgument("no bands to stack".into()))?;
        let mut samples = Vec::with_capacity(first.pixels_per_band() * bands.len());
        for b in bands {
            if !b.same_dims(first) || b.bands != 1 {
                return invalid_argument("stack requires single-band rasters of equal dimensions");
            }
            samples.extend_from_slice(b.samples());
        }
        Raster::new(
            first.width,
            first.height,
            bands.len(),
            first.pixel_size,
            samples,
        )
    }

    /// Pixel-wise binary combination of two rasters with matching shape.
    pub(crate) fn zip_map(&self, other: &Raster, f: impl Fn(f64, f64) -> f64) -> Result<Raster> {
        if !self.same_dims(other) || self.bands != other.bands {
            return invalid_argument(format!(
                "shape mismatch: {}x{}x{} vs {}x{}x{}",
                self.width, self.height, self.bands, other.width, other.height, other.bands
            ));
        }
        let samples = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Raster::new(
            self.width,
            self.height,
            self.bands,
            self.pixel_size,
            samples,
        )
    }
}

/// Mirror (half-sample symmetric) index reflection: ..., 1, 0 | 0, 1, ...
pub(crate) fn mirror_index(i: isize, n: usize) -> usize {
    debug_assert!(n > 0);
    let n = n as isize;
    let mut i = i;
    loop {
        if i < 0 {
            i = -i - 1;
        } else if i >= n {
            i = 2 * n - 1 - i;
        } else {
            return i as usize;
        }
    }
}

/// Edge replication.
pub(crate) fn clamp_index(i: isize, n: usize) -> usize {
    i.clamp(0, n as isize - 1) as usize
}

/// Cubic convolution weight, Catmull-Rom parameterization (a = -1/2).
fn cubic_weight(s: f64) -> f64 {
    let s = s.abs();
    if s <= 1.0 {
        (1.5 * s - 2.5) * s * s + 1.0
    } else if s < 2.0 {
        ((-0.5 * s + 2.5) * s - 4.0) * s + 2.0
    } else {
        0.0
    }
}

/// Per-output-coordinate taps for one axis of a bicubic upsample.
fn cubic_phases(n_in: usize, factor: usize) -> Vec<([usize; 4], [f64; 4])> {
    let n_out = n_in * factor;
    (0..n_out)
        .map(|j| {
            let x = (j as f64 + 0.5) / factor as f64 - 0.5;
            let i0 = x.floor();
            let t = x - i0;
            let base = i0 as isize - 1;
            let idx = [
                mirror_index(base, n_in),
                mirror_index(base + 1, n_in),
                mirror_index(base + 2, n_in),
                mirror_index(base + 3, n_in),
            ];
            let w = [
                cubic_weight(t + 1.0),
                cubic_weight(t),
                cubic_weight(1.0 - t),
                cubic_weight(2.0 - t),
            ];
            (idx, w)
        })
        .collect()
}

/// Upsamples by an integer factor with separable cubic convolution.
///
/// Constant inputs are preserved exactly and linear ramps are reproduced
/// away from the mirrored borders.
pub fn upsample_bicubic(img: &Raster, factor: usize) -> Result<Raster> {
    if factor < 2 {
        return invalid_argument(format!("upsample factor must be >= 2, got {factor}"));
    }
    let (w, h) = (img.width, img.height);
    let (ow, oh) = (w * factor, h * factor);
    let xs = cubic_phases(w, factor);
    let ys = cubic_phases(h, factor);

    let mut out = vec![0.0; ow * oh * img.bands];
    for (k, band_out) in out.chunks_mut(ow * oh).enumerate() {
        let band = img.band(k);
        // horizontal pass
        let mut mid = vec![0.0; ow * h];
        mid.par_chunks_mut(ow).enumerate().for_each(|(y, row)| {
            let src = &band[y * w..(y + 1) * w];
            for (x, v) in row.iter_mut().enumerate() {
                let (idx, wt) = &xs[x];
                *v = wt[0] * src[idx[0]]
                    + wt[1] * src[idx[1]]
                    + wt[2] * src[idx[2]]
                    + wt[3] * src[idx[3]];
            }
        });
        // vertical pass
        band_out
            .par_chunks_mut(ow)
            .enumerate()
            .for_each(|(y, row)| {
                let (idx, wt) = &ys[y];
                let rows = [
                    &mid[idx[0] * ow..idx[0] * ow + ow],
                    &mid[idx[1] * ow..idx[1] * ow + ow],
                    &mid[idx[2] * ow..idx[2] * ow + ow],
                    &mid[idx[3] * ow..idx[3] * ow + ow],
                ];
                for x in 0..ow {
                    row[x] = wt[0] * rows[0][x]
                        + wt[1] * rows[1][x]
                        + wt[2] * rows[2][x]
                        + wt[3] * rows[3][x];
                }
            });
    }
    Raster::new(ow, oh, img.bands, img.pixel_size / factor as f64, out)
}

/// Low-pass filters with `kernel` and subsamples by `factor` in one pass.
///
/// The kernel window for output pixel `X` starts at input column
/// `f*X + floor((f - L) / 2)`, which centers the window on the center of
/// the corresponding `f x f` input block (exactly when `L` and `f` have
/// equal parity). Borders are mirrored.
pub fn decimate(img: &Raster, kernel: &SpatialKernel, factor: usize) -> Result<Raster> {
    if factor == 0 {
        return invalid_argument("decimation factor must be positive");
    }
    if !img.width.is_multiple_of(factor) || !img.height.is_multiple_of(factor) {
        return invalid_argument(format!(
            "factor {factor} does not divide {}x{}",
            img.width, img.height
        ));
    }
    if (kernel.sum() - 1.0).abs() > 1e-9 {
        return invalid_argument("decimation kernel must sum to 1");
    }
    let l = kernel.size();
    let (w, h) = (img.width, img.height);
    let (ow, oh) = (w / factor, h / factor);
    let delta = (factor as isize - l as isize).div_euclid(2);

    let mut out = vec![0.0; ow * oh * img.bands];
    if let Some(taps) = kernel.taps_1d() {
        // separable: horizontal on all input rows at output columns, then vertical
        for (k, band_out) in out.chunks_mut(ow * oh).enumerate() {
            let band = img.band(k);
            let mut mid = vec![0.0; ow * h];
            mid.par_chunks_mut(ow).enumerate().for_each(|(y, row)| {
                let src = &band[y * w..(y + 1) * w];
                for (ox, v) in row.iter_mut().enumerate() {
                    let start = (ox * factor) as isize + delta;
                    let mut acc = 0.0;
                    for (u, &t) in taps.iter().enumerate() {
                        acc += t * src[mirror_index(start + u as isize, w)];
                    }
                    *v = acc;
                }
            });
            band_out
                .par_chunks_mut(ow)
                .enumerate()
                .for_each(|(oy, row)| {
                    let start = (oy * factor) as isize + delta;
                    for x in 0..ow {
                        let mut acc = 0.0;
                        for (v, &t) in taps.iter().enumerate() {
                            acc += t * mid[mirror_index(start + v as isize, h) * ow + x];
                        }
                        row[x] = acc;
                    }
                });
        }
    } else {
        for (k, band_out) in out.chunks_mut(ow * oh).enumerate() {
            let band = img.band(k);
            band_out
                .par_chunks_mut(ow)
                .enumerate()
                .for_each(|(oy, row)| {
                    let ys = (oy * factor) as isize + delta;
                    for (ox, out_px) in row.iter_mut().enumerate() {
                        let xs = (ox * factor) as isize + delta;
                        let mut acc = 0.0;
                        for v in 0..l {
                            let yy = mirror_index(ys + v as isize, h);
                            for u in 0..l {
                                let xx = mirror_index(xs + u as isize, w);
                                acc += kernel.tap(v, u) * band[yy * w + xx];
                            }
                        }
                        *out_px = acc;
                    }
                });
        }
    }
    Raster::new(ow, oh, img.bands, img.pixel_size * factor as f64, out)
}

/// Translates content by whole pixels; vacated borders replicate edges.
pub fn shift_image(img: &Raster, dx: i64, dy: i64) -> Result<Raster> {
    let limit = (img.width.min(img.height) / 2) as i64;
    if dx.abs() >= limit || dy.abs() >= limit {
        return invalid_argument(format!("shift ({dx}, {dy}) out of range (limit {limit})"));
    }
    let (w, h) = (img.width, img.height);
    let mut out = vec![0.0; img.samples.len()];
    for (k, band_out) in out.chunks_mut(w * h).enumerate() {
        let band = img.band(k);
        band_out.par_chunks_mut(w).enumerate().for_each(|(y, row)| {
            let sy = clamp_index(y as isize - dy as isize, h);
            let src = &band[sy * w..(sy + 1) * w];
            for (x, v) in row.iter_mut().enumerate() {
                *v = src[clamp_index(x as isize - dx as isize, w)];
            }
        });
    }
    Raster::new(w, h, img.bands, img.pixel_size, out)
}

/// Summary statistics of one band.
#[derive(Debug, Clone)]
pub struct BandStats {
    mean: f64,
    std: f64,
    min: f64,
    sorted: Vec<f64>,
}

impl BandStats {
    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Population standard deviation.
    pub fn std(&self) -> f64 {
        self.std
    }

    pub fn min(&self) -> f64 {
        self.min
    }

    /// Nearest-rank percentile: the value at rank `ceil(p/100 * N)` of the
    /// sorted samples. `p` is clamped to [0, 100].
    pub fn percentile(&self, p: f64) -> f64 {
        let n = self.sorted.len();
        let rank = (p.clamp(0.0, 100.0) / 100.0 * n as f64).ceil() as usize;
        self.sorted[rank.clamp(1, n) - 1]
    }
}

/// Mean, population standard deviation, minimum and sorted samples of a band.
pub fn band_stats(img: &Raster, band: usize) -> Result<BandStats> {
    if band >= img.bands {
        return invalid_argument(format!("band {band} out of range ({})", img.bands));
    }
    Ok(slice_stats(img.band(band)))
}

pub(crate) fn slice_stats(data: &[f64]) -> BandStats {
    let n = data.len() as f64;
    let mean = data.iter().sum::<f64>() / n;
    let var = data.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let mut sorted = data.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    BandStats {
        mean,
        std: var.sqrt(),
        min: sorted[0],
        sorted,
    }
}
