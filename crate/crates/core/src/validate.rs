//! Three-resolution validation protocols, the method x correction
//! experiment matrix, cross-scale correlation analysis and a synthetic
//! scene generator with known ground truth.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{invalid_argument, Result};
use crate::filters::{lowpass_decimate, FilterSpec, SpatialKernel};
use crate::fusion::{fuse, Correction, FusionConfig, Method};
use crate::metrics::{ergas, pearson, sam, Protocol, QualityRecord};
use crate::raster::{decimate, Raster};
use crate::spectral::{intensity, SensorProfile, Weights};

/// ERGAS scale parameter shared by all three protocols so values stay
/// comparable across table rows.
pub const ERGAS_SCALE: f64 = 4.0;

/// Run provenance carried alongside each protocol's records.
#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub dataset: String,
    pub profile: String,
    pub filter: String,
    pub seed: Option<u64>,
}

/// All records of one validation protocol.
#[derive(Debug, Clone)]
pub struct ProtocolRun {
    pub protocol: Protocol,
    pub records: Vec<QualityRecord>,
    pub provenance: Provenance,
}

fn band_filter(profile: &SensorProfile, band: usize, bands: usize, factor: usize) -> FilterSpec {
    FilterSpec::mtf_gaussian(factor, profile.mtf_for_band(band, bands))
}

fn pan_filter(profile: &SensorProfile, factor: usize) -> FilterSpec {
    FilterSpec::mtf_gaussian(factor, profile.mtf_pan)
}

/// MTF-matched degradation: per-band low-pass, then block-mean
/// decimation by `factor`.
pub fn degrade_ms(img: &Raster, profile: &SensorProfile, factor: usize) -> Result<Raster> {
    let bands: Vec<Raster> = (0..img.bands())
        .map(|k| {
            let spec = band_filter(profile, k, img.bands(), factor);
            lowpass_decimate(&img.extract_band(k)?, &spec, factor)
        })
        .collect::<Result<_>>()?;
    Raster::stack(&bands)
}

/// Pan degradation with the profile's Pan MTF.
pub fn degrade_pan(img: &Raster, profile: &SensorProfile, factor: usize) -> Result<Raster> {
    lowpass_decimate(img, &pan_filter(profile, factor), factor)
}

fn measure(
    dataset: &str,
    protocol: Protocol,
    cfg: &FusionConfig,
    result: &Raster,
    reference: &Raster,
) -> Result<QualityRecord> {
    Ok(QualityRecord {
        dataset: dataset.into(),
        protocol,
        method: cfg.method,
        correction: cfg.correction,
        ergas: Some(ergas(result, reference, ERGAS_SCALE)?),
        sam: Some(sam(result, reference)?),
    })
}

/// Consistency protocol: fuse at original resolution, degrade the result
/// 1:4 with the per-band MTF filters, compare to the original MS.
pub fn protocol_original(
    ms: &Raster,
    pan: &Raster,
    cfg: &FusionConfig,
    dataset: &str,
) -> Result<QualityRecord> {
    if !cfg.correction.applicable_to(cfg.method) {
        return Ok(QualityRecord::na(
            dataset,
            Protocol::OriginalConsistency,
            cfg.method,
            cfg.correction,
        ));
    }
    let fused = fuse(ms, pan, cfg)?;
    let degraded = degrade_ms(&fused.raster, &cfg.profile, cfg.scale)?;
    measure(dataset, Protocol::OriginalConsistency, cfg, &degraded, ms)
}

/// Synthesis protocol at 1:4: degrade both inputs, fuse, compare to the
/// original MS.
pub fn protocol_reduced4(
    ms: &Raster,
    pan: &Raster,
    cfg: &FusionConfig,
    dataset: &str,
) -> Result<QualityRecord> {
    if !cfg.correction.applicable_to(cfg.method) {
        return Ok(QualityRecord::na(
            dataset,
            Protocol::Reduced4,
            cfg.method,
            cfg.correction,
        ));
    }
    let ms4 = degrade_ms(ms, &cfg.profile, 4)?;
    let pan4 = degrade_pan(pan, &cfg.profile, 4)?;
    let fused = fuse(&ms4, &pan4, cfg)?;
    measure(dataset, Protocol::Reduced4, cfg, &fused.raster, ms)
}

/// Intermediate protocol at 1:2: degrade inputs 1:2, fuse, degrade the
/// result 1:2 more onto the original MS grid, compare.
pub fn protocol_reduced2(
    ms: &Raster,
    pan: &Raster,
    cfg: &FusionConfig,
    dataset: &str,
) -> Result<QualityRecord> {
    if !cfg.correction.applicable_to(cfg.method) {
        return Ok(QualityRecord::na(
            dataset,
            Protocol::Reduced2,
            cfg.method,
            cfg.correction,
        ));
    }
    let ms2 = degrade_ms(ms, &cfg.profile, 2)?;
    let pan2 = degrade_pan(pan, &cfg.profile, 2)?;
    let fused = fuse(&ms2, &pan2, cfg)?;
    let down = degrade_ms(&fused.raster, &cfg.profile, 2)?;
    measure(dataset, Protocol::Reduced2, cfg, &down, ms)
}

/// Runs every protocol over the full method x correction matrix in the
/// table layout order. Inapplicable combinations yield "na" records.
pub fn run_matrix(
    ms: &Raster,
    pan: &Raster,
    profile: &SensorProfile,
    dataset: &str,
    seed: Option<u64>,
) -> Result<Vec<ProtocolRun>> {
    profile.validate()?;
    crate::spectral::resolution_ratio(ms, pan)?;
    let provenance = |p: &FilterSpec| Provenance {
        dataset: dataset.into(),
        profile: profile.name.clone(),
        filter: format!("{p:?}"),
        seed,
    };
    let mut runs = Vec::with_capacity(3);
    for protocol in Protocol::ALL {
        let mut records = Vec::with_capacity(Method::ALL.len() * Correction::ALL.len());
        let mut filter_desc = None;
        for method in Method::ALL {
            for correction in Correction::ALL {
                let cfg = FusionConfig::new(method, correction, profile.clone());
                filter_desc.get_or_insert_with(|| cfg.filter.clone());
                let record = match protocol {
                    Protocol::OriginalConsistency => protocol_original(ms, pan, &cfg, dataset)?,
                    Protocol::Reduced4 => protocol_reduced4(ms, pan, &cfg, dataset)?,
                    Protocol::Reduced2 => protocol_reduced2(ms, pan, &cfg, dataset)?,
                };
                records.push(record);
            }
        }
        runs.push(ProtocolRun {
            protocol,
            records,
            provenance: provenance(&filter_desc.expect("matrix is never empty")),
        });
    }
    Ok(runs)
}

/// How quality vectors are assembled for the correlation analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VectorMode {
    /// Concatenate (ERGAS, SAM) across methods (default construction).
    ErgasAndSam,
    ErgasOnly,
    SamOnly,
}

/// Resolution pairs of the correlation table, in row order:
/// original~1:2 (upper), original~1:4 (middle), 1:2~1:4 (lower).
pub const PAIR_LABELS: [&str; 3] = ["orig~1:2", "orig~1:4", "1:2~1:4"];

/// Cross-scale correlation per correction column; `None` marks cells
/// where the coefficient is undefined.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationTable {
    pub dataset: String,
    pub mode: VectorMode,
    pub columns: Vec<(Correction, [Option<f64>; 3])>,
}

fn quality_vector(records: &[QualityRecord], correction: Correction, mode: VectorMode) -> Vec<f64> {
    let mut v = Vec::new();
    for method in Method::ALL {
        let rec = records
            .iter()
            .find(|r| r.method == method && r.correction == correction);
        let (e, s) = match rec {
            Some(r) => (r.ergas.unwrap_or(f64::NAN), r.sam.unwrap_or(f64::NAN)),
            None => (f64::NAN, f64::NAN),
        };
        match mode {
            VectorMode::ErgasAndSam => {
                v.push(e);
                v.push(s);
            }
            VectorMode::ErgasOnly => v.push(e),
            VectorMode::SamOnly => v.push(s),
        }
    }
    v
}

/// Builds the correlation table from one run per protocol: per correction
/// column, quality vectors are paired across resolutions (na entries
/// dropped pairwise) and Pearson-correlated.
pub fn cross_scale_correlation(runs: &[ProtocolRun], mode: VectorMode) -> Result<CorrelationTable> {
    let find = |p: Protocol| -> Result<&ProtocolRun> {
        runs.iter()
            .find(|r| r.protocol == p)
            .ok_or_else(|| crate::error::Error::InvalidArgument(format!("missing protocol {p}")))
    };
    let original = find(Protocol::OriginalConsistency)?;
    let reduced4 = find(Protocol::Reduced4)?;
    let reduced2 = find(Protocol::Reduced2)?;

    let columns = Correction::ALL
        .into_iter()
        .map(|correction| {
            let vo = quality_vector(&original.records, correction, mode);
            let v4 = quality_vector(&reduced4.records, correction, mode);
            let v2 = quality_vector(&reduced2.records, correction, mode);
            let cell = |a: &[f64], b: &[f64]| pearson(a, b).ok();
            (correction, [cell(&vo, &v2), cell(&vo, &v4), cell(&v2, &v4)])
        })
        .collect();
    Ok(CorrelationTable {
        dataset: original.provenance.dataset.clone(),
        mode,
        columns,
    })
}

/// Synthetic acquisition with known ground truth: Pan is the weighted
/// band sum of the high-resolution truth (plus an optional smooth energy
/// offset), MS is its MTF-filtered decimation.
#[derive(Debug, Clone)]
pub struct SyntheticScene {
    pub truth_ms: Raster,
    pub pan: Raster,
    pub ms: Raster,
    pub weights: Weights,
    pub seed: u64,
}

/// Generates a reproducible synthetic scene. `width`/`height` are the
/// high-resolution (Pan) dimensions and must be divisible by 4;
/// `smoothness` is the Gaussian blur sigma (pixels) applied to the white
/// noise driving each truth band.
pub fn make_synthetic(
    seed: u64,
    width: usize,
    height: usize,
    bands: usize,
    smoothness: f64,
) -> Result<SyntheticScene> {
    make_synthetic_with_offset(seed, width, height, bands, smoothness, 0.0)
}

/// As [`make_synthetic`], with a smooth additive Pan offset of the given
/// amplitude standing in for the inter-sensor energy imbalance.
pub fn make_synthetic_with_offset(
    seed: u64,
    width: usize,
    height: usize,
    bands: usize,
    smoothness: f64,
    offset_amplitude: f64,
) -> Result<SyntheticScene> {
    if !width.is_multiple_of(4) || !height.is_multiple_of(4) {
        return invalid_argument("synthetic scene dimensions must be divisible by 4");
    }
    if bands == 0 {
        return invalid_argument("synthetic scene needs at least one band");
    }
    if !smoothness.is_finite() || smoothness <= 0.0 {
        return invalid_argument("smoothness must be positive");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // band-limited truth: blurred unit white noise, normalized per band,
    // lifted to a radiance-like positive range
    let blur = gaussian_taps(smoothness);
    let mut truth_bands = Vec::with_capacity(bands);
    for _ in 0..bands {
        let noise: Vec<f64> = (0..width * height)
            .map(|_| <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng))
            .collect();
        let field = Raster::single_band(width, height, noise)?;
        let smooth = crate::filters::convolve_separable(&field, &blur)?;
        let stats = crate::raster::slice_stats(smooth.band(0));
        let (mean, std) = (stats.mean(), stats.std().max(1e-12));
        let values: Vec<f64> = smooth
            .band(0)
            .iter()
            .map(|v| 100.0 + 20.0 * (v - mean) / std)
            .collect();
        truth_bands.push(Raster::single_band(width, height, values)?);
    }
    let truth_ms = Raster::stack(&truth_bands)?;

    // weights drawn in [0,1], normalized to unit sum
    let raw: Vec<f64> = (0..bands).map(|_| rng.random::<f64>()).collect();
    let total: f64 = raw.iter().sum();
    let weights = Weights::new(raw.iter().map(|v| v / total).collect())?;

    let mut pan = intensity(&truth_ms, &weights)?;
    if offset_amplitude != 0.0 {
        let offset: Vec<f64> = (0..height)
            .flat_map(|y| {
                (0..width).map(move |x| {
                    offset_amplitude
                        * ((x as f64 / width as f64).sin() + (y as f64 / height as f64).cos())
                })
            })
            .collect();
        let offset = Raster::single_band(width, height, offset)?;
        pan = pan.zip_map(&offset, |p, v| p + v)?;
    }

    // MS: MTF-filtered x4 decimation, same default filter for every band
    let ms = lowpass_decimate(&truth_ms, &FilterSpec::mtf_gaussian(4, 0.3), 4)?;

    Ok(SyntheticScene {
        truth_ms,
        pan,
        ms,
        weights,
        seed,
    })
}

fn gaussian_taps(sigma: f64) -> Vec<f64> {
    let half = (4.0 * sigma).ceil() as usize;
    let len = 2 * half + 1;
    let mut taps: Vec<f64> = (0..len)
        .map(|i| {
            let d = i as f64 - half as f64;
            (-d * d / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let s: f64 = taps.iter().sum();
    taps.iter_mut().for_each(|t| *t /= s);
    taps
}

/// Sensor profile used for synthetic runs: default MTF values plus the
/// scene's true weights as provider weights.
pub fn synthetic_profile(scene: &SyntheticScene) -> SensorProfile {
    SensorProfile {
        name: "synthetic".into(),
        mtf_pan: 0.15,
        mtf_ms: vec![0.3; scene.ms.bands()],
        provider_weights: Some(scene.weights.clone()),
    }
}

/// Upsampling-only baseline for the synthesis protocol: ERGAS of the
/// bicubically upsampled degraded MS against the original MS.
pub fn bicubic_baseline_ergas(ms: &Raster, profile: &SensorProfile) -> Result<f64> {
    let ms4 = degrade_ms(ms, profile, 4)?;
    let up = crate::raster::upsample_bicubic(&ms4, 4)?;
    ergas(&up, ms, ERGAS_SCALE)
}

/// Plain unit-sum box kernel decimation used by oracle tests.
pub fn box_decimate(img: &Raster, factor: usize) -> Result<Raster> {
    let kernel = SpatialKernel::box_kernel(factor)?;
    decimate(img, &kernel, factor)
}
