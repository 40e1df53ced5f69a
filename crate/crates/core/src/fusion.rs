//! Component-substitution and high-pass-filtering fusion with the
//! correction pipeline orchestrated around them.
//!
//! Both families come in additive and multiplicative flavors. The only
//! difference between CS and HPF is the detail base subtracted from (or
//! divided into) the corrected Pan: CS uses the intensity image computed
//! from the upsampled MS bands, HPF uses the low-pass filtered Pan on the
//! high-resolution grid.

use std::fmt;
use std::str::FromStr;

use crate::enhance::{
    haze_correct_ratio, haze_estimate, hist_match_full, hist_match_simple, mean_std, pan_correct,
    result_hist_match, HazeMode, HazeSpec,
};
use crate::error::{invalid_argument, Error, Result};
use crate::filters::{lowpass, lowpass_decimate, FilterSpec};
use crate::raster::{upsample_bicubic, Raster};
use crate::spectral::{
    estimate_weights, estimate_weights_highres, intensity, resolution_ratio, SensorProfile, Weights,
};

/// Fusion method: family x injection model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    CsAdditive,
    CsMultiplicative,
    HpfAdditive,
    HpfMultiplicative,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::CsAdditive,
        Method::CsMultiplicative,
        Method::HpfAdditive,
        Method::HpfMultiplicative,
    ];

    pub fn is_multiplicative(self) -> bool {
        matches!(self, Method::CsMultiplicative | Method::HpfMultiplicative)
    }

    pub fn is_cs(self) -> bool {
        matches!(self, Method::CsAdditive | Method::CsMultiplicative)
    }

    /// Short token used in files and on the command line.
    pub fn token(self) -> &'static str {
        match self {
            Method::CsAdditive => "cs_a",
            Method::CsMultiplicative => "cs_m",
            Method::HpfAdditive => "hpf_a",
            Method::HpfMultiplicative => "hpf_m",
        }
    }

    /// Display label in table layout ("CS a", "HPF m", ...).
    pub fn label(self) -> &'static str {
        match self {
            Method::CsAdditive => "CS a",
            Method::CsMultiplicative => "CS m",
            Method::HpfAdditive => "HPF a",
            Method::HpfMultiplicative => "HPF m",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace([' ', '-'], "_");
        Method::ALL
            .into_iter()
            .find(|m| m.token() == norm)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown method '{s}'")))
    }
}

/// Correction applied around the fusion core.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Correction {
    /// No correction.
    Nc,
    /// Haze correction (multiplicative methods only).
    Hc,
    /// Pan histogram matching against the low-resolution intensity.
    Phm,
    /// Weight estimation for the intensity calculation (CS methods only).
    We,
    /// Weight estimation plus virtual-band Pan correction plus Pan
    /// histogram matching.
    WePc,
    /// Fusion-result histogram matching against the original MS bands.
    Mhm,
}

impl Correction {
    pub const ALL: [Correction; 6] = [
        Correction::Nc,
        Correction::Hc,
        Correction::Phm,
        Correction::We,
        Correction::WePc,
        Correction::Mhm,
    ];

    /// Applicability matrix: haze correction only exists for the
    /// multiplicative forms, weight estimation only changes CS methods.
    pub fn applicable_to(self, method: Method) -> bool {
        match self {
            Correction::Hc => method.is_multiplicative(),
            Correction::We => method.is_cs(),
            _ => true,
        }
    }

    pub fn token(self) -> &'static str {
        match self {
            Correction::Nc => "nc",
            Correction::Hc => "hc",
            Correction::Phm => "phm",
            Correction::We => "we",
            Correction::WePc => "we_pc",
            Correction::Mhm => "mhm",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Correction::Nc => "NC",
            Correction::Hc => "HC",
            Correction::Phm => "PHM",
            Correction::We => "WE",
            Correction::WePc => "WE+PC",
            Correction::Mhm => "MHM",
        }
    }
}

impl fmt::Display for Correction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Correction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace([' ', '-', '+'], "_");
        Correction::ALL
            .into_iter()
            .find(|c| c.token() == norm || (*c == Correction::WePc && norm == "wepc"))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown correction '{s}'")))
    }
}

/// Histogram matching flavor used by the PHM correction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HistVariant {
    Full,
    Simple,
}

/// Domain in which spectral weights are estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightDomain {
    /// Regress the MS bands against the decimated Pan (default).
    LowRes,
    /// Regress the upsampled MS bands against the full-resolution Pan.
    /// Exposed for completeness; no advantage over the low-resolution
    /// domain has been observed.
    HighRes,
}

/// Method and correction selection plus every tuning parameter of a run.
#[derive(Debug, Clone)]
pub struct FusionConfig {
    pub method: Method,
    pub correction: Correction,
    pub hist_variant: HistVariant,
    pub haze_mode: HazeMode,
    /// Fixed per-band haze values; bypasses estimation when set.
    pub haze_values: Option<Vec<f64>>,
    pub profile: SensorProfile,
    /// Pan:MS resolution ratio.
    pub scale: usize,
    /// Low-pass filter for the HPF base and Pan decimation.
    pub filter: FilterSpec,
    pub weight_domain: WeightDomain,
}

impl FusionConfig {
    /// Defaults: full histogram matching, band-minimum haze, scale 4 and
    /// the MTF-matched Gaussian built from the profile's Pan MTF.
    pub fn new(method: Method, correction: Correction, profile: SensorProfile) -> Self {
        let filter = FilterSpec::mtf_gaussian(4, profile.mtf_pan);
        Self {
            method,
            correction,
            hist_variant: HistVariant::Full,
            haze_mode: HazeMode::BandMin,
            haze_values: None,
            profile,
            scale: 4,
            filter,
            weight_domain: WeightDomain::LowRes,
        }
    }

    pub fn with_scale(mut self, scale: usize) -> Self {
        self.scale = scale;
        self.filter = FilterSpec::mtf_gaussian(scale, self.profile.mtf_pan)
            .with_mtf(self.profile.mtf_pan, self.filter.cutoff_mode);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !self.correction.applicable_to(self.method) {
            return invalid_argument(format!(
                "correction {} is not applicable to method {}",
                self.correction, self.method
            ));
        }
        self.profile.validate()?;
        self.filter.validate()?;
        if self.scale == 0 {
            return invalid_argument("fusion scale must be positive");
        }
        Ok(())
    }
}

/// Fusion output: the sharpened raster plus run diagnostics.
#[derive(Debug, Clone)]
pub struct Fused {
    pub raster: Raster,
    /// Weights used for the intensity calculation.
    pub weights: Weights,
    /// Haze actually applied (HC only).
    pub haze: Option<HazeSpec>,
    /// Ratio denominators clamped during multiplicative injection.
    pub clamped_pixels: usize,
}

/// Runs the configured pansharpening pipeline.
///
/// Steps: upsample MS, apply the correction preprocessing to Pan, compute
/// the detail base (intensity for CS, low-passed Pan for HPF), inject the
/// detail per band, and optionally histogram-match the result back to the
/// original MS. Negative radiances in the output are left untouched.
pub fn fuse(ms: &Raster, pan: &Raster, cfg: &FusionConfig) -> Result<Fused> {
    cfg.validate()?;
    let scale = resolution_ratio(ms, pan)?;
    if scale != cfg.scale {
        return invalid_argument(format!(
            "configured scale {} but images have ratio {scale}",
            cfg.scale
        ));
    }

    let s_hr = if scale > 1 {
        upsample_bicubic(ms, scale)?
    } else {
        ms.clone()
    };

    // weights: provider/equal, or re-estimated for WE and WE+PC
    let w0 = cfg.profile.initial_weights(ms.bands());
    let weights = if matches!(cfg.correction, Correction::We | Correction::WePc) {
        match cfg.weight_domain {
            WeightDomain::LowRes => {
                let pan_lr = lowpass_decimate(pan, &cfg.filter, scale)?;
                estimate_weights(ms, &pan_lr, &w0)?.weights
            }
            WeightDomain::HighRes => estimate_weights_highres(ms, pan, &w0)?.weights,
        }
    } else {
        w0
    };

    // correction preprocessing of Pan
    let pan_hat = match cfg.correction {
        Correction::Phm => {
            let i_lr = intensity(ms, &weights)?;
            match cfg.hist_variant {
                HistVariant::Full => hist_match_full(pan, &i_lr)?,
                HistVariant::Simple => {
                    let (m, s) = mean_std(&i_lr);
                    hist_match_simple(pan, m, s)?
                }
            }
        }
        Correction::WePc => {
            let corrected = pan_correct(pan, ms, &weights, &cfg.filter)?;
            let i_lr = intensity(ms, &weights)?;
            hist_match_full(&corrected, &i_lr)?
        }
        _ => pan.clone(),
    };

    // detail base
    let base = if cfg.method.is_cs() {
        intensity(&s_hr, &weights)?
    } else {
        lowpass(&pan_hat, &cfg.filter)?
    };

    // haze (zero unless HC)
    let haze = if cfg.correction == Correction::Hc {
        match &cfg.haze_values {
            Some(values) => HazeSpec::from_values(values.clone(), &weights)?,
            None => haze_estimate(&s_hr, cfg.haze_mode, &weights)?,
        }
    } else {
        HazeSpec::zero(ms.bands())
    };

    // per-band injection
    let mut out_bands = Vec::with_capacity(ms.bands());
    let mut clamped_pixels = 0;
    let detail = if cfg.method.is_multiplicative() {
        None
    } else {
        Some(pan_hat.zip_map(&base, |p, b| p - b)?)
    };
    for k in 0..ms.bands() {
        let band = s_hr.extract_band(k)?;
        let fused = match &detail {
            // additive: band + (pan - base)
            Some(detail) => band.zip_map(detail, |s, d| s + d)?,
            None => {
                let (r, clamped) = haze_correct_ratio(
                    &pan_hat,
                    &base,
                    &band,
                    haze.per_band[k],
                    haze.intensity_haze,
                )?;
                clamped_pixels += clamped;
                r
            }
        };
        out_bands.push(fused);
    }
    let mut raster = Raster::stack(&out_bands)?.with_pixel_size(pan.pixel_size());

    if cfg.correction == Correction::Mhm {
        raster = result_hist_match(&raster, ms)?;
    }

    let haze = (cfg.correction == Correction::Hc).then_some(haze);
    Ok(Fused {
        raster,
        weights,
        haze,
        clamped_pixels,
    })
}
