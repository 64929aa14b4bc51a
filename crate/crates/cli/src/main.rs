//! `pqual`: score, evaluate and sweep human-parsing predictions; generate
//! synthetic corpora.
//!
//! Exit codes: 0 success, 1 data error, 2 usage error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use parsing_quality::io::{
    evaluate_corpus, load_manifest, prepare_sweep, score_corpus, ScoresFile, TruthSidecar,
};
use parsing_quality::synthetic::{self, Storage, SynthConfig};
use parsing_quality::{
    default_grid, par, sweep_weights, MatchThresholds, Objective, PixelScoreConfig, QualityWeights,
    SweepRow,
};

#[derive(Parser)]
#[command(name = "pqual", version, about = "Quality scoring and evaluation for multiple-human parsing")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true, value_name = "N", value_parser = clap::value_parser!(u64).range(1..))]
    jobs: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute instance and part quality scores for every prediction.
    Score(ScoreArgs),
    /// Evaluate scored predictions against ground truth.
    Evaluate(EvaluateArgs),
    /// Re-fuse under a grid of weights and rank the candidates.
    SweepWeights(SweepArgs),
    /// Generate a synthetic corpus with known true quality.
    Synth(SynthArgs),
    /// Rank-correlate candidate scores with the truth of a synthetic corpus.
    Correlate(CorrelateArgs),
}

fn parse_threshold(s: &str) -> Result<f64, String> {
    let t: f64 = s.parse().map_err(|e| format!("{e}"))?;
    PixelScoreConfig::new(t).map(|c| c.threshold()).map_err(|e| e.to_string())
}

fn parse_from_str<T: FromStr>(s: &str) -> Result<T, String>
where
    T::Err: std::fmt::Display,
{
    s.parse().map_err(|e: T::Err| e.to_string())
}

fn parse_pair(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("expected LO,HI, got {s:?}"))?;
    let a = a.trim().parse().map_err(|e| format!("{e}"))?;
    let b = b.trim().parse().map_err(|e| format!("{e}"))?;
    if a > b {
        return Err(format!("empty range {a},{b}"));
    }
    Ok((a, b))
}

#[derive(Args)]
struct ScoreArgs {
    /// Prediction manifest.
    #[arg(long, env = "PQUAL_MANIFEST")]
    manifest: PathBuf,
    /// Confidence threshold T of the high-confidence mask, in [0, 1).
    #[arg(long, default_value = "0.2", value_parser = parse_threshold)]
    threshold: f64,
    /// Fusion weights alpha,beta,gamma for box, IoU and pixel scores.
    #[arg(long, default_value = "1,1,1", value_parser = parse_from_str::<QualityWeights>)]
    weights: QualityWeights,
    /// Scores file to write.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Scores file from `score`.
    #[arg(long)]
    pred: PathBuf,
    /// Manifest with ground truth and prediction masks.
    #[arg(long, env = "PQUAL_MANIFEST")]
    gt: PathBuf,
    /// Match thresholds: `mhp` (0.1..0.9), `coco` (0.5..0.95) or a comma list.
    #[arg(long, default_value = "mhp", value_parser = parse_from_str::<MatchThresholds>)]
    thresholds: MatchThresholds,
    /// JSON report to write; the text report always goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Manifest with ground truth and prediction payloads.
    #[arg(long, env = "PQUAL_MANIFEST")]
    manifest: PathBuf,
    #[arg(long, default_value = "0.2", value_parser = parse_threshold)]
    threshold: f64,
    #[arg(long, default_value = "mhp", value_parser = parse_from_str::<MatchThresholds>)]
    thresholds: MatchThresholds,
    /// Metric to rank by: ap_p, ap_p_50, ap_r or ap_r_50.
    #[arg(long, default_value = "ap_r", value_parser = parse_from_str::<Objective>)]
    objective: Objective,
    /// Candidate weights as `a,b,c;a,b,c;...` (default: {0,0.5,1,2,3}^3 minus zero).
    #[arg(long, value_delimiter = ';', value_parser = parse_from_str::<QualityWeights>)]
    grid: Option<Vec<QualityWeights>>,
    /// TSV to write (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    Clean,
    BoundaryNoise,
    Mixed,
}

#[derive(Clone, Copy, ValueEnum)]
enum StorageArg {
    Tensor,
    Maps,
}

#[derive(Args)]
struct SynthArgs {
    /// Output directory (manifest.json, truth.json, gt/, pred/).
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "mixed")]
    preset: Preset,
    #[arg(long, default_value_t = 50)]
    images: usize,
    /// Humans per image, inclusive range LO,HI.
    #[arg(long, value_parser = parse_pair)]
    humans: Option<(usize, usize)>,
    /// Number of categories including background.
    #[arg(long)]
    categories: Option<usize>,
    #[arg(long)]
    height: Option<usize>,
    #[arg(long)]
    width: Option<usize>,
    #[arg(long)]
    box_sigma: Option<f64>,
    #[arg(long)]
    iou_sigma: Option<f64>,
    #[arg(long)]
    boundary_noise_px: Option<u32>,
    #[arg(long)]
    part_swap_prob: Option<f64>,
    /// Erosion range LO,HI in pixels.
    #[arg(long, value_parser = parse_pair)]
    erosion_px: Option<(usize, usize)>,
    /// Exact boxes and box_score = 1 for every prediction.
    #[arg(long)]
    gt_boxes: bool,
    #[arg(long, value_enum, default_value = "tensor")]
    storage: StorageArg,
}

#[derive(Args)]
struct CorrelateArgs {
    #[arg(long, env = "PQUAL_MANIFEST")]
    manifest: PathBuf,
    /// Truth sidecar written by `synth`.
    #[arg(long)]
    truth: PathBuf,
    /// Pixel-score thresholds to compare.
    #[arg(long, value_delimiter = ',', default_value = "0,0.2", value_parser = parse_threshold)]
    pixel_thresholds: Vec<f64>,
    #[arg(long, default_value = "1,1,1", value_parser = parse_from_str::<QualityWeights>)]
    weights: QualityWeights,
    /// TSV to write (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run_score(a: ScoreArgs) -> Result<()> {
    let corpus = load_manifest(&a.manifest)?;
    let scores = score_corpus(&corpus, PixelScoreConfig::new(a.threshold)?, a.weights)?;
    scores.write(&a.out)?;
    log::info!("scored {} instances -> {}", scores.instances.len(), a.out.display());
    Ok(())
}

fn run_evaluate(a: EvaluateArgs) -> Result<()> {
    let corpus = load_manifest(&a.gt)?;
    let scores = ScoresFile::read(&a.pred)?;
    let report = evaluate_corpus(&corpus, &scores, &a.thresholds)?;
    if let Some(out) = &a.out {
        write_output(Some(out), &report.to_json())?;
    }
    print!("{}", report.to_text());
    Ok(())
}

fn run_sweep(a: SweepArgs) -> Result<()> {
    let corpus = load_manifest(&a.manifest)?;
    let scored = prepare_sweep(&corpus, PixelScoreConfig::new(a.threshold)?)?;
    let grid = a.grid.unwrap_or_else(default_grid);
    let rows = sweep_weights(&scored, &grid, a.objective, &a.thresholds)?;
    write_output(a.out.as_deref(), &SweepRow::to_tsv(&rows))
}

fn run_synth(a: SynthArgs) -> Result<()> {
    let mut cfg = match a.preset {
        Preset::Clean => SynthConfig::clean(a.seed, a.images),
        Preset::BoundaryNoise => SynthConfig::boundary_noise(a.seed, a.images),
        Preset::Mixed => SynthConfig::mixed(a.seed, a.images),
    };
    if let Some(h) = a.humans {
        cfg.humans_per_image = h;
    }
    if let Some(c) = a.categories {
        cfg.categories = c;
    }
    if let Some(h) = a.height {
        cfg.height = h;
    }
    if let Some(w) = a.width {
        cfg.width = w;
    }
    if let Some(s) = a.box_sigma {
        cfg.score_noise.box_sigma = s;
    }
    if let Some(s) = a.iou_sigma {
        cfg.score_noise.iou_sigma = s;
    }
    if let Some(r) = a.boundary_noise_px {
        cfg.corruption.boundary_noise_px = r;
    }
    if let Some(p) = a.part_swap_prob {
        cfg.corruption.part_swap_prob = p;
    }
    if let Some((lo, hi)) = a.erosion_px {
        cfg.corruption.erosion_px = (lo as u32, hi as u32);
    }
    cfg.gt_boxes = a.gt_boxes;
    let storage = match a.storage {
        StorageArg::Tensor => Storage::Tensor,
        StorageArg::Maps => Storage::Maps,
    };
    let manifest = synthetic::generate_to_dir(&cfg, &a.out, storage)?;
    log::info!("wrote {} images -> {}", cfg.num_images, manifest.display());
    Ok(())
}

fn run_correlate(a: CorrelateArgs) -> Result<()> {
    let corpus = load_manifest(&a.manifest)?;
    let truth = TruthSidecar::read(&a.truth)?;
    let order: Vec<usize> = corpus
        .image_order()
        .into_iter()
        .flat_map(|slot| corpus.instances_of(slot).to_vec())
        .collect();
    let records = par::try_map_range(order.len(), |i| corpus.load_instance(order[i]))?;
    let report = synthetic::correlation_report(
        &records,
        &truth,
        corpus.num_categories(),
        &a.pixel_thresholds,
        a.weights,
    )?;
    write_output(a.out.as_deref(), &report.to_tsv())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let jobs = cli.jobs.map(|n| n as usize);
    let result = par::with_jobs(jobs, || match cli.command {
        Command::Score(a) => run_score(a),
        Command::Evaluate(a) => run_evaluate(a),
        Command::SweepWeights(a) => run_sweep(a),
        Command::Synth(a) => run_synth(a),
        Command::Correlate(a) => run_correlate(a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
