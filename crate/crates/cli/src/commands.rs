//! Command implementations behind the `psharp` subcommands.

use std::path::{Path, PathBuf};

use psharp_core::enhance::HazeMode;
use psharp_core::error::{Error, Result};
use psharp_core::filters::{CutoffMode, FilterKind, FilterSpec};
use psharp_core::fusion::{fuse, Correction, FusionConfig, HistVariant, Method};
use psharp_core::raster::shift_image;
use psharp_core::report::{format_correlation_table, format_dataset_table, records_to_csv};
use psharp_core::spectral::{estimate_weights, find_profile, SensorProfile, Weights};
use psharp_core::validate::{cross_scale_correlation, run_matrix, VectorMode};
use psharp_core::{fixtures, Raster};

use crate::io;

/// Default registration search window in high-resolution pixels.
const SHIFT_WINDOW: usize = 4;

/// Fully resolved run description shared by the commands: input paths,
/// profile, selections and output location.
#[derive(Debug, Clone)]
pub struct RunManifest {
    pub ms_path: Option<PathBuf>,
    pub pan_path: Option<PathBuf>,
    pub profile: SensorProfile,
    pub method: Option<Method>,
    pub correction: Correction,
    pub hist_variant: HistVariant,
    pub haze_mode: HazeMode,
    pub filter_kind: FilterKind,
    pub cutoff_mode: CutoffMode,
    pub scale: usize,
    pub seed: Option<u64>,
    pub use_fixtures: bool,
    pub out: PathBuf,
}

impl RunManifest {
    fn require_pair(&self) -> Result<(Raster, Raster)> {
        let ms_path = self
            .ms_path
            .as_ref()
            .ok_or_else(|| Error::InvalidArgument("missing --ms input".into()))?;
        let pan_path = self
            .pan_path
            .as_ref()
            .ok_or_else(|| Error::InvalidArgument("missing --pan input".into()))?;
        Ok((io::read_psras(ms_path)?, io::read_psras(pan_path)?))
    }

    fn filter_spec(&self) -> FilterSpec {
        let base = match self.filter_kind {
            FilterKind::Gaussian => FilterSpec::gaussian(self.scale),
            FilterKind::Butterworth => FilterSpec::butterworth(self.scale),
        };
        match self.cutoff_mode {
            CutoffMode::Plain => base,
            mode => base.with_mtf(self.profile.mtf_pan, mode),
        }
    }

    fn fusion_config(&self, method: Method) -> FusionConfig {
        let mut cfg = FusionConfig::new(method, self.correction, self.profile.clone());
        cfg.hist_variant = self.hist_variant;
        cfg.haze_mode = self.haze_mode;
        cfg.scale = self.scale;
        cfg.filter = self.filter_spec();
        cfg
    }

    fn dataset_id(&self) -> String {
        self.ms_path
            .as_deref()
            .and_then(Path::file_stem)
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "run".into())
    }
}

/// Resolves `--profile`: a built-in sensor name first, then a config
/// file path.
pub fn resolve_profile(token: &str) -> Result<SensorProfile> {
    if let Some(profile) = find_profile(token) {
        return Ok(profile);
    }
    let path = Path::new(token);
    if path.exists() {
        return SensorProfile::from_config_file(path);
    }
    Err(Error::InvalidArgument(format!("unknown profile '{token}'")))
}

fn align_pan(ms: &Raster, pan: &Raster, w: &Weights) -> Result<(Raster, (i64, i64))> {
    let quarter = pan.width().min(pan.height()) / 4;
    let window = SHIFT_WINDOW.min(quarter);
    let shift = psharp_core::spectral::estimate_shift(ms, pan, w, window)?;
    let aligned = if shift == (0, 0) {
        pan.clone()
    } else {
        shift_image(pan, -shift.0, -shift.1)?
    };
    Ok((aligned, shift))
}

/// `psharp fuse`: align, fuse, write the sharpened raster, report the
/// estimated weights, haze, shift and clamp diagnostics.
pub fn cmd_fuse(manifest: &RunManifest) -> Result<()> {
    let (ms, pan) = manifest.require_pair()?;
    let method = manifest
        .method
        .ok_or_else(|| Error::InvalidArgument("missing --method".into()))?;
    let w0 = manifest.profile.initial_weights(ms.bands());
    let (pan, shift) = align_pan(&ms, &pan, &w0)?;
    println!("shift: {} {}", shift.0, shift.1);

    let cfg = manifest.fusion_config(method);
    let fused = fuse(&ms, &pan, &cfg)?;
    let weights: Vec<String> = fused
        .weights
        .as_slice()
        .iter()
        .map(|w| format!("{w:.6}"))
        .collect();
    println!("weights: {}", weights.join(" "));
    match &fused.haze {
        Some(h) => {
            let per: Vec<String> = h.per_band.iter().map(|v| format!("{v:.6}")).collect();
            println!(
                "haze: {} (intensity {:.6})",
                per.join(" "),
                h.intensity_haze
            );
        }
        None => println!("haze: none"),
    }
    println!("clamped_pixels: {}", fused.clamped_pixels);

    io::write_psras(&manifest.out, &fused.raster)?;
    println!("wrote: {}", manifest.out.display());
    Ok(())
}

/// `psharp estimate`: print BVLS weights, fit residual and the estimated
/// integer shift for an MS/Pan pair.
pub fn cmd_estimate(manifest: &RunManifest) -> Result<()> {
    let (ms, pan) = manifest.require_pair()?;
    let scale = pan.width() / ms.width().max(1);
    let pan_lr = psharp_core::filters::lowpass_decimate(&pan, &manifest.filter_spec(), scale)?;
    let w0 = manifest.profile.initial_weights(ms.bands());
    let estimate = estimate_weights(&ms, &pan_lr, &w0)?;
    let weights: Vec<String> = estimate
        .weights
        .as_slice()
        .iter()
        .map(|w| format!("{w:.6}"))
        .collect();
    println!("weights: {}", weights.join(" "));
    println!("residual: {:.6}", estimate.residual);
    if estimate.rank_deficient {
        println!("warning: rank-deficient system, minimal-norm solution");
    }
    let quarter = pan.width().min(pan.height()) / 4;
    let window = SHIFT_WINDOW.min(quarter);
    let shift = psharp_core::spectral::estimate_shift(&ms, &pan, &estimate.weights, window)?;
    println!("shift: {} {}", shift.0, shift.1);
    Ok(())
}

/// `psharp validate`: run the full experiment matrix (or load the
/// bundled benchmark tables with `--fixtures`) and emit the aligned
/// tables, delimited records and the cross-scale correlation table.
pub fn cmd_validate(manifest: &RunManifest) -> Result<()> {
    std::fs::create_dir_all(&manifest.out)?;
    let mut correlation_out = String::new();

    if manifest.use_fixtures {
        for dataset in fixtures::DATASETS {
            let records = fixtures::dataset_records(dataset)?;
            let runs = fixtures::fixture_runs(dataset)?;
            write_reports(
                &manifest.out,
                dataset,
                &format_dataset_table(dataset, &records),
                &records_to_csv(&records, true),
            )?;
            let table = cross_scale_correlation(&runs, VectorMode::ErgasAndSam)?;
            correlation_out.push_str(&format_correlation_table(&table));
            correlation_out.push('\n');
        }
    } else {
        let (ms, pan) = manifest.require_pair()?;
        let dataset = manifest.dataset_id();
        let runs = run_matrix(&ms, &pan, &manifest.profile, &dataset, manifest.seed)?;
        let records: Vec<_> = runs.iter().flat_map(|r| r.records.clone()).collect();
        write_reports(
            &manifest.out,
            &dataset,
            &format_dataset_table(&dataset, &records),
            &records_to_csv(&records, false),
        )?;
        let table = cross_scale_correlation(&runs, VectorMode::ErgasAndSam)?;
        correlation_out.push_str(&format_correlation_table(&table));
    }

    let corr_path = manifest.out.join("correlations.txt");
    std::fs::write(&corr_path, &correlation_out)?;
    print!("{correlation_out}");
    println!("wrote: {}", corr_path.display());
    Ok(())
}

fn write_reports(dir: &Path, dataset: &str, table: &str, csv: &str) -> Result<()> {
    let safe: String = dataset
        .chars()
        .map(|c| {
            if c.is_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect();
    std::fs::write(dir.join(format!("table_{safe}.txt")), table)?;
    std::fs::write(dir.join(format!("records_{safe}.csv")), csv)?;
    println!("wrote: {}", dir.join(format!("table_{safe}.txt")).display());
    println!(
        "wrote: {}",
        dir.join(format!("records_{safe}.csv")).display()
    );
    Ok(())
}

/// `psharp convert`: PGM -> PSRAS1 or PSRAS1 -> PGM, by extension.
pub fn cmd_convert(input: &Path, output: &Path) -> Result<()> {
    let ext = |p: &Path| {
        p.extension()
            .map(|e| e.to_string_lossy().to_ascii_lowercase())
            .unwrap_or_default()
    };
    match (ext(input).as_str(), ext(output).as_str()) {
        ("pgm", _) => {
            let raster = io::read_pgm(input)?;
            io::write_psras(output, &raster)?;
        }
        (_, "pgm") => {
            let raster = io::read_psras(input)?;
            io::write_pgm(output, &raster)?;
        }
        _ => {
            return Err(Error::InvalidArgument(
                "convert needs a .pgm on one side (psras on the other)".into(),
            ))
        }
    }
    println!("wrote: {}", output.display());
    Ok(())
}
