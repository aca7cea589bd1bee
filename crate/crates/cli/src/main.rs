//! `cadet`: generate, rasterize, project, summarize and validate synthetic
//! KITTI-layout datasets.
//!
//! Exit status is 0 on success, 1 for invalid input or a failed validation
//! and 2 for I/O errors.

use std::ops::Range;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cadet_core::bev::{BevConfig, BevPreset};
use cadet_core::pipeline::{
    cmd_project, cmd_rasterize, cmd_stats, cmd_validate, generate_dataset, write_stats_csv, GenerateConfig, Mixture,
    PipelineError,
};
use cadet_core::scene_synth::LidarRig;

#[derive(Debug, Parser)]
#[command(name = "cadet", version, about = "Synthetic LIDAR/camera dataset tooling")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a KITTI-layout dataset from randomized box-world scenes.
    Generate(GenerateArgs),
    /// Rasterize every sample's scan into BEV feature maps.
    Rasterize(RasterizeArgs),
    /// Draw a sample's LIDAR points on its camera image, colored by depth.
    Project {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        index: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Per-class counts, orientation and box-size histograms as CSV.
    Stats {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check file presence and contents; exits 1 on any violation.
    Validate {
        #[arg(long)]
        dataset: PathBuf,
    },
}

#[derive(Debug, Args)]
struct GenerateArgs {
    #[arg(long)]
    samples: usize,
    /// Samples per scene before a fresh scene is drawn.
    #[arg(long, default_value_t = 25)]
    reset_interval: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Target labeled objects per image, e.g. `car=1.4,ped=0.49`.
    #[arg(long)]
    mixture: Option<Mixture>,
    /// Base configuration (a `generate.toml` from an earlier run); flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// LIDAR azimuth step in degrees.
    #[arg(long)]
    horizontal_step: Option<f64>,
    /// LIDAR channel count.
    #[arg(long)]
    channels: Option<u32>,
    /// Standard deviation of Gaussian range noise, meters.
    #[arg(long)]
    range_noise: Option<f64>,
    /// Also label heuristic-occluded objects (occlusion field 2).
    #[arg(long)]
    keep_occluded: bool,
    /// Write per-sample vertex visibility overlays.
    #[arg(long)]
    debug_overlays: bool,
}

#[derive(Debug, Args)]
struct RasterizeArgs {
    /// Preset name (`default`, `max3_density3`, `max_min_density`) or a TOML file.
    #[arg(long)]
    config: String,
    #[arg(long)]
    dataset: PathBuf,
    /// Half-open index range `A..B`.
    #[arg(long, value_parser = parse_range)]
    range: Option<Range<usize>>,
    /// Output directory; defaults to `DATASET/bev_NAME`.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_range(s: &str) -> Result<Range<usize>, String> {
    let (a, b) = s.split_once("..").ok_or("expected A..B")?;
    let a: usize = a.trim().parse().map_err(|_| format!("bad start `{a}`"))?;
    let b: usize = b.trim().parse().map_err(|_| format!("bad end `{b}`"))?;
    if a > b {
        return Err(format!("empty range {a}..{b}"));
    }
    Ok(a..b)
}

fn read_file(path: &Path) -> Result<String, PipelineError> {
    std::fs::read_to_string(path).map_err(|source| PipelineError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn generate(args: GenerateArgs) -> Result<(), PipelineError> {
    let mut cfg = match &args.config {
        Some(path) => toml::from_str(&read_file(path)?)
            .map_err(|e| PipelineError::InvalidArgument(format!("{}: {e}", path.display())))?,
        None => GenerateConfig::default(),
    };
    cfg.samples = args.samples;
    cfg.reset_interval = args.reset_interval;
    cfg.seed = args.seed;
    if let Some(m) = args.mixture {
        cfg.mixture = m;
    }
    let rig: &mut LidarRig = &mut cfg.rig;
    if let Some(step) = args.horizontal_step {
        rig.horizontal_step = step;
    }
    if let Some(ch) = args.channels {
        rig.channels = ch;
    }
    if let Some(sigma) = args.range_noise {
        rig.range_noise_sigma = sigma;
    }
    cfg.keep_occluded |= args.keep_occluded;
    cfg.debug_overlays |= args.debug_overlays;

    let s = generate_dataset(&cfg, &args.out)?;
    println!(
        "generated {} samples in {:.1} s: {} cars, {} pedestrians, {:.3} objects/image",
        s.samples,
        s.seconds,
        s.cars,
        s.pedestrians,
        (s.cars + s.pedestrians) as f64 / s.samples as f64
    );
    println!(
        "occlusion heuristic vs oracle: {} of {} candidates disagree ({:.2}%)",
        s.disagreements,
        s.candidates,
        100.0 * s.disagreement_rate()
    );
    Ok(())
}

fn rasterize(args: RasterizeArgs) -> Result<(), PipelineError> {
    let (cfg, name): (BevConfig<f32>, String) = match args.config.parse::<BevPreset>() {
        Ok(p) => (BevConfig::from_preset(p), p.name().to_string()),
        Err(_) => {
            let path = Path::new(&args.config);
            if !path.is_file() {
                return Err(PipelineError::InvalidArgument(format!(
                    "`{}` is neither a preset nor a config file",
                    args.config
                )));
            }
            let name = path
                .file_stem()
                .map_or("custom".into(), |s| s.to_string_lossy().into_owned());
            (BevConfig::from_toml(&read_file(path)?)?, name)
        }
    };
    let out = args.out.unwrap_or_else(|| args.dataset.join(format!("bev_{name}")));
    let r = cmd_rasterize(&args.dataset, &cfg, args.range, &out)?;
    println!(
        "rasterized {} samples x {} layers into {} in {:.2} s ({:.1} samples/s)",
        r.samples,
        r.layers,
        r.out_dir.display(),
        r.seconds,
        r.samples_per_sec
    );
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode, PipelineError> {
    match cli.command {
        Command::Generate(args) => generate(args)?,
        Command::Rasterize(args) => rasterize(args)?,
        Command::Project { dataset, index, out } => {
            cmd_project(&dataset, index, &out)?;
            println!("wrote {}", out.display());
        }
        Command::Stats { dataset, out } => {
            let stats = cmd_stats(&dataset)?;
            write_stats_csv(&stats, &out)?;
            println!(
                "{} samples, {} objects, {:.3} objects/image",
                stats.samples,
                stats.total_objects(),
                stats.mean_objects_per_image()
            );
            for (class, c) in &stats.classes {
                println!("  {class}: {}", c.count);
            }
        }
        Command::Validate { dataset } => {
            let report = cmd_validate(&dataset)?;
            for v in &report.violations {
                println!("{v}");
            }
            println!(
                "{} samples checked, {} violations",
                report.samples_checked,
                report.violations.len()
            );
            if !report.is_clean() {
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
