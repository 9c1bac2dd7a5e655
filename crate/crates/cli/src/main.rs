//! `degforge`: synthesize degraded LR/HR video training pairs.
//!
//! Exit codes: 0 success, 2 configuration or usage error, 3 I/O error,
//! 4 data mismatch (e.g. frame sizes incompatible with a plan).

mod format;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use degforge::blur::{save_kernel_pool, KernelPool, SyntheticKernelRanges};
use degforge::media::{read_clip, read_frame, write_clip};
use degforge::pipeline::{apply_plan, synthesize_dataset, DegradationPlan, Planner};
use degforge::quality::{brisque_features, BrisqueFeatures, LinearModel};
use degforge::{Error, PipelineConfig};

#[derive(Parser)]
#[command(name = "degforge", version, about = "Shuffled real-world degradations for video super-resolution data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cut HR clips into patch groups, degrade them and write the dataset.
    Synth {
        /// Directory searched recursively for clip directories.
        #[arg(long)]
        hr: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Pipeline config (JSON).
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: u64,
        /// Worker threads; defaults to the number of CPUs.
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Print the degradation plan for one group.
    Plan {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        group: u64,
    },
    /// Degrade one clip with a saved plan.
    Apply {
        /// HR clip directory.
        #[arg(long)]
        hr: PathBuf,
        /// Plan JSON, as printed by `plan` or stored in a manifest.
        #[arg(long)]
        plan: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write a pool of synthetic isotropic/anisotropic Gaussian kernels.
    KernelsGen {
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        count: u32,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: u64,
        /// Pipeline config whose `kernel` ranges to use.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Per-frame NSS features (and optional linear score) as CSV.
    Quality {
        /// Directory of PNG frames.
        #[arg(long = "in")]
        input: PathBuf,
        /// Linear model JSON; adds a `score` column.
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        csv: PathBuf,
    },
}

/// An error plus the exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::InvalidConfig(_)
            | Error::Json { .. }
            | Error::InvalidSize(_)
            | Error::InvalidSigma(_)
            | Error::InvalidNoise(_)
            | Error::InvalidResample(_)
            | Error::InvalidBoxSize(_)
            | Error::InvalidQuality(_)
            | Error::InvalidCodec(_)
            | Error::NonPsdCovariance => 2,
            Error::Io { .. }
            | Error::NoClipsFound(_)
            | Error::UnsupportedFormat(_)
            | Error::MissingModel(_)
            | Error::CorruptPool(_)
            | Error::UnnormalizedKernel { .. }
            | Error::ExternalCodecFailure(_) => 3,
            _ => 4,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn io_failure(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure {
        code: 3,
        message: format!("{}: {e}", path.display()),
    }
}

fn load_config(path: &Path) -> Result<PipelineConfig, Failure> {
    Ok(PipelineConfig::load(path)?)
}

fn synth(hr: &Path, out: &Path, config: &Path, seed: u64, workers: Option<usize>) -> Result<(), Failure> {
    let cfg = load_config(config)?;
    let workers = workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let start = Instant::now();
    let manifest = synthesize_dataset(hr, out, &cfg, seed, workers)?;
    let secs = start.elapsed().as_secs_f64();
    let frames = manifest.groups.len() * cfg.group_len;
    println!("groups: {}", manifest.groups.len());
    println!("frames: {frames}");
    println!("seconds: {secs:.3}");
    println!("throughput: {:.2} frames/s", frames as f64 / secs.max(1e-9));
    Ok(())
}

fn plan(config: &Path, seed: u64, group: u64) -> Result<(), Failure> {
    let cfg = load_config(config)?;
    let plan = Planner::new(&cfg)?.sample(seed, group);
    println!("{}", plan.to_json());
    Ok(())
}

fn apply(hr: &Path, plan_path: &Path, out: &Path) -> Result<(), Failure> {
    let text = std::fs::read_to_string(plan_path).map_err(|e| io_failure(plan_path, e))?;
    let plan: DegradationPlan = serde_json::from_str(&text).map_err(|e| Failure {
        code: 2,
        message: format!("{}: {e}", plan_path.display()),
    })?;
    let clip = read_clip(hr)?;
    let lr = apply_plan(&clip, &plan)?;
    write_clip(&lr, out)?;
    Ok(())
}

fn kernels_gen(count: u32, out: &Path, seed: u64, config: Option<&Path>) -> Result<(), Failure> {
    let ranges = match config {
        Some(p) => load_config(p)?.kernel,
        None => SyntheticKernelRanges::default(),
    };
    let pool = KernelPool::synthetic(count as usize, seed, &ranges)?;
    save_kernel_pool(&pool, out)?;
    Ok(())
}

fn frame_paths(dir: &Path) -> Result<Vec<PathBuf>, Failure> {
    let entries = std::fs::read_dir(dir).map_err(|e| io_failure(dir, e))?;
    let mut paths = Vec::new();
    for entry in entries {
        let p = entry.map_err(|e| io_failure(dir, e))?.path();
        if p.extension().is_some_and(|x| x.eq_ignore_ascii_case("png")) {
            paths.push(p);
        }
    }
    paths.sort();
    if paths.is_empty() {
        return Err(Failure {
            code: 3,
            message: format!("{}: no PNG frames", dir.display()),
        });
    }
    Ok(paths)
}

fn quality(input: &Path, model: Option<&Path>, csv_path: &Path) -> Result<(), Failure> {
    let model = model.map(LinearModel::load).transpose()?;
    let paths = frame_paths(input)?;
    let rows = {
        use rayon::prelude::*;
        paths
            .par_iter()
            .map(|p| {
                let feats = brisque_features(&read_frame(p)?)?;
                let score = model.as_ref().map(|m| m.score(&feats));
                Ok((feats, score))
            })
            .collect::<Result<Vec<(BrisqueFeatures, Option<f64>)>, Error>>()?
    };

    let mut w = csv::Writer::from_path(csv_path).map_err(|e| io_failure(csv_path, e))?;
    let mut header = vec!["frame".to_owned()];
    header.extend(BrisqueFeatures::names());
    if model.is_some() {
        header.push("score".into());
    }
    w.write_record(&header).map_err(|e| io_failure(csv_path, e))?;

    for (p, (feats, score)) in paths.iter().zip(&rows) {
        let name = p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        let mut record = vec![name];
        record.extend(feats.values().iter().chain(score.iter()).map(|&v| format::sig9(v)));
        w.write_record(&record).map_err(|e| io_failure(csv_path, e))?;
    }
    w.flush().map_err(|e| io_failure(csv_path, e))?;
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Synth {
            hr,
            out,
            config,
            seed,
            workers,
        } => synth(&hr, &out, &config, seed, workers),
        Command::Plan { config, seed, group } => plan(&config, seed, group),
        Command::Apply { hr, plan: p, out } => apply(&hr, &p, &out),
        Command::KernelsGen {
            count,
            out,
            seed,
            config,
        } => kernels_gen(count, &out, seed, config.as_deref()),
        Command::Quality { input, model, csv } => {
            quality(&input, model.as_deref(), &csv)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("degforge: error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
