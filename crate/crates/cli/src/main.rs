//! `psharp` — pansharpening and validation from the command line.
//!
//! Exit codes: 0 success, 1 runtime/numeric error, 2 usage error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use psharp_cli::commands::{self, RunManifest};
use psharp_core::enhance::HazeMode;
use psharp_core::error::Error;
use psharp_core::filters::{CutoffMode, FilterKind};
use psharp_core::fusion::{Correction, HistVariant, Method};

#[derive(Parser)]
#[command(
    name = "psharp",
    version,
    about = "Pansharpening engine and validation harness",
    max_term_width = 100
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fuse a multispectral/panchromatic pair into a sharpened raster.
    Fuse(FuseArgs),
    /// Run the validation matrix and emit tables, records and
    /// cross-scale correlations.
    Validate(ValidateArgs),
    /// Estimate spectral weights and the inter-image shift.
    Estimate(EstimateArgs),
    /// Convert between ASCII PGM and PSRAS1 rasters.
    Convert(ConvertArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Multispectral input (PSRAS1).
    #[arg(long)]
    ms: Option<PathBuf>,
    /// Panchromatic input (PSRAS1).
    #[arg(long)]
    pan: Option<PathBuf>,
    /// Sensor profile: built-in name (QB, IKONOS, GeoEye-1, WV-2, WV-3,
    /// WV-4, Default) or a key-value config file path.
    #[arg(long, default_value = "Default")]
    profile: String,
    /// Pan:MS resolution ratio.
    #[arg(long, default_value_t = 4)]
    scale: usize,
    /// Low-pass filter kind: gaussian or butterworth.
    #[arg(long, default_value = "gaussian")]
    filter: String,
    /// Cutoff adaptation: plain, mtf_paper or mtf_exact.
    #[arg(long = "cutoff-mode", default_value = "mtf_paper")]
    cutoff_mode: String,
    /// Pan histogram matching flavor: full or simple.
    #[arg(long, default_value = "full")]
    hist: String,
    /// Haze estimation: min or percentile4.
    #[arg(long, default_value = "min")]
    haze: String,
    /// Seed recorded in run provenance.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct FuseArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Fusion method: cs_a, cs_m, hpf_a or hpf_m.
    #[arg(long)]
    method: String,
    /// Correction: nc, hc, phm, we, we_pc or mhm.
    #[arg(long, default_value = "nc")]
    correction: String,
    /// Output raster path.
    #[arg(long, default_value = "fused.psras")]
    out: PathBuf,
}

#[derive(Args)]
struct ValidateArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Use the bundled benchmark tables instead of fusing inputs.
    #[arg(long)]
    fixtures: bool,
    /// Output directory for report files.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct EstimateArgs {
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct ConvertArgs {
    input: PathBuf,
    output: PathBuf,
}

fn parse_filter_kind(s: &str) -> Result<FilterKind, Error> {
    match s.trim().to_ascii_lowercase().as_str() {
        "gaussian" => Ok(FilterKind::Gaussian),
        "butterworth" => Ok(FilterKind::Butterworth),
        _ => Err(Error::InvalidArgument(format!("unknown filter '{s}'"))),
    }
}

fn parse_cutoff_mode(s: &str) -> Result<CutoffMode, Error> {
    match s.trim().to_ascii_lowercase().as_str() {
        "plain" => Ok(CutoffMode::Plain),
        "mtf_paper" => Ok(CutoffMode::MtfPaper),
        "mtf_exact" => Ok(CutoffMode::MtfExact),
        _ => Err(Error::InvalidArgument(format!("unknown cutoff mode '{s}'"))),
    }
}

fn parse_hist(s: &str) -> Result<HistVariant, Error> {
    match s.trim().to_ascii_lowercase().as_str() {
        "full" => Ok(HistVariant::Full),
        "simple" => Ok(HistVariant::Simple),
        _ => Err(Error::InvalidArgument(format!(
            "unknown histogram variant '{s}'"
        ))),
    }
}

fn parse_haze(s: &str) -> Result<HazeMode, Error> {
    match s.trim().to_ascii_lowercase().as_str() {
        "min" | "band_min" => Ok(HazeMode::BandMin),
        "percentile4" | "four_band_percentile" => Ok(HazeMode::FourBandPercentile),
        _ => Err(Error::InvalidArgument(format!("unknown haze mode '{s}'"))),
    }
}

/// Builds the manifest, classifying every selection error as usage.
fn build_manifest(
    common: &CommonArgs,
    method: Option<&str>,
    correction: Option<&str>,
    fixtures: bool,
    out: PathBuf,
) -> Result<RunManifest, Error> {
    let profile = commands::resolve_profile(&common.profile)?;
    let method = method.map(|s| s.parse::<Method>()).transpose()?;
    let correction = correction
        .map(|s| s.parse::<Correction>())
        .transpose()?
        .unwrap_or(Correction::Nc);
    Ok(RunManifest {
        ms_path: common.ms.clone(),
        pan_path: common.pan.clone(),
        profile,
        method,
        correction,
        hist_variant: parse_hist(&common.hist)?,
        haze_mode: parse_haze(&common.haze)?,
        filter_kind: parse_filter_kind(&common.filter)?,
        cutoff_mode: parse_cutoff_mode(&common.cutoff_mode)?,
        scale: common.scale,
        seed: common.seed,
        use_fixtures: fixtures,
        out,
    })
}

fn configure_thread_pool() {
    if let Ok(value) = std::env::var("PSHARP_THREADS") {
        match value.trim().parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global();
            }
            _ => eprintln!("warning: ignoring invalid PSHARP_THREADS value '{value}'"),
        }
    }
}

fn run() -> Result<(), (u8, String)> {
    let cli = Cli::parse();
    configure_thread_pool();

    // selection/usage problems exit 2, runtime problems exit 1
    let usage = |e: Error| (2u8, e.to_string());
    let runtime = |e: Error| (1u8, e.to_string());

    match cli.command {
        Command::Fuse(args) => {
            let manifest = build_manifest(
                &args.common,
                Some(&args.method),
                Some(&args.correction),
                false,
                args.out.clone(),
            )
            .map_err(usage)?;
            commands::cmd_fuse(&manifest).map_err(runtime)
        }
        Command::Validate(args) => {
            let manifest =
                build_manifest(&args.common, None, None, args.fixtures, args.out.clone())
                    .map_err(usage)?;
            commands::cmd_validate(&manifest).map_err(runtime)
        }
        Command::Estimate(args) => {
            let manifest = build_manifest(&args.common, None, None, false, PathBuf::from("."))
                .map_err(usage)?;
            commands::cmd_estimate(&manifest).map_err(runtime)
        }
        Command::Convert(args) => commands::cmd_convert(&args.input, &args.output).map_err(runtime),
    }
}

fn main() -> ExitCode {
    env_logger::init();
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err((code, message)) => {
            let message = message.replace('\n', " ");
            eprintln!("error: {message}");
            ExitCode::from(code)
        }
    }
}
