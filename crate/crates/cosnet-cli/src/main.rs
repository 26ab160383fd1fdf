//! Command line front end: train policies, emit summaries, score them,
//! run the reward ablation, and generate synthetic datasets. Every failure
//! exits nonzero with a machine-readable error JSON on stderr.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cosnet::error::{Error, Result};
use cosnet::eval::{extract_summary, f_score, generate_synthetic, SyntheticSpec};
use cosnet::io::{
    load_annotations, load_checkpoint, load_config, load_summary, load_track, save_annotations,
    save_checkpoint, save_config, save_features, save_summary, write_learning_curve, RunConfig,
    SummaryRecord,
};
use cosnet::reward::RewardMode;
use cosnet::rng::indexed_stream;
use cosnet::train::{greedy_episode, train, TrainConfig, Video};
use cosnet::types::ClipTrack;

#[derive(Parser)]
#[command(name = "cosnet", about = "Clip-subset video summarization by multi-agent RL")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a policy on feature files and write checkpoint + learning curve.
    Train(CommonArgs),
    /// Roll out a trained policy greedily and write summary JSON per input.
    Summarize(CommonArgs),
    /// Score summaries against reference annotations into a CSV table.
    Eval(EvalArgs),
    /// Train once per reward mode and tabulate the resulting F-scores.
    Ablate(CommonArgs),
    /// Generate a synthetic planted-cluster dataset.
    Synth(SynthArgs),
}

#[derive(Args, Clone, Default)]
struct CommonArgs {
    /// Key=value run config file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Reward mode: US, U, S, LU, GU, LS, or GS.
    #[arg(long)]
    mode: Option<String>,
    /// Output directory (default: current directory).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Clip feature files.
    #[arg(long, num_args = 1..)]
    features: Vec<PathBuf>,
    /// Per-frame annotation files, matched to --features by position.
    #[arg(long, num_args = 1..)]
    annotations: Vec<PathBuf>,
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Working clip width in frames: 16, 32 (pairs averaged), or 48 (triples).
    #[arg(long)]
    clip_frames: Option<u16>,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Pre-computed summary JSON files to score instead of a checkpoint.
    #[arg(long, num_args = 1..)]
    summaries: Vec<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Total clips.
    #[arg(long, default_value_t = 24)]
    clips: usize,
    /// Feature dimension.
    #[arg(long, default_value_t = 16)]
    dim: usize,
    /// Clips planted on the key centroid.
    #[arg(long, default_value_t = 4)]
    planted: usize,
    /// Centroid separation; cross-cluster cosine is 1 - margin.
    #[arg(long, default_value_t = 0.8)]
    margin: f64,
    /// Per-coordinate Gaussian noise.
    #[arg(long, default_value_t = 0.05)]
    noise: f64,
    /// Frames each synthetic clip stands for.
    #[arg(long, default_value_t = 16)]
    frames_per_clip: usize,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            emit_error("invalid_arguments", &e.render().to_string());
            return ExitCode::FAILURE;
        }
        // Help and version go to stdout with a clean exit.
        Err(e) => {
            print!("{}", e.render());
            return ExitCode::SUCCESS;
        }
    };
    configure_threads();
    let outcome = match cli.command {
        Command::Train(args) => cli_train(&args),
        Command::Summarize(args) => cli_summarize(&args),
        Command::Eval(args) => cli_eval(&args),
        Command::Ablate(args) => cli_ablate(&args),
        Command::Synth(args) => cli_synth(&args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            emit_error(e.kind(), &e.to_string());
            ExitCode::FAILURE
        }
    }
}

fn emit_error(kind: &str, message: &str) {
    let payload = serde_json::json!({
        "error": { "kind": kind, "message": message }
    });
    eprintln!("{payload}");
}

/// COSNET_THREADS caps the worker pool; unset means one thread per core.
fn configure_threads() {
    if let Ok(value) = std::env::var("COSNET_THREADS") {
        if let Ok(threads) = value.parse::<usize>() {
            if threads >= 1 {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build_global();
            }
        }
    }
}

/// Defaults, then the config file, then explicit flags.
fn build_config(args: &CommonArgs) -> Result<RunConfig> {
    let mut config = match &args.config {
        Some(path) => load_config(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(mode) = &args.mode {
        config.set("mode", mode)?;
    }
    if let Some(frames) = args.clip_frames {
        config.set("clip_frames", &frames.to_string())?;
    }
    if let Some(out) = &args.out {
        config.out = Some(out.clone());
    }
    if let Some(checkpoint) = &args.checkpoint {
        config.checkpoint = Some(checkpoint.clone());
    }
    if !args.features.is_empty() {
        config.features = args.features.clone();
    }
    if !args.annotations.is_empty() {
        config.annotations = args.annotations.clone();
    }
    Ok(config)
}

fn out_dir(config: &RunConfig) -> Result<PathBuf> {
    let dir = config.out.clone().unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(dir.clone(), e))?;
    Ok(dir)
}

fn video_id(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// Pairs every feature file with its annotation file (by position) and
/// loads the dataset at the configured clip granularity.
fn load_dataset(config: &RunConfig) -> Result<Vec<Video<f64>>> {
    if config.features.is_empty() {
        return Err(Error::BadConfigValue {
            key: "features".into(),
            value: String::new(),
            detail: "at least one feature file is required".into(),
        });
    }
    if !config.annotations.is_empty() && config.annotations.len() != config.features.len() {
        return Err(Error::BadConfigValue {
            key: "annotations".into(),
            value: config.annotations.len().to_string(),
            detail: format!("expected one per feature file ({})", config.features.len()),
        });
    }
    let multiplier = config.clip_multiplier();
    config
        .features
        .iter()
        .enumerate()
        .map(|(i, features)| {
            let annotations = config.annotations.get(i).map(PathBuf::as_path);
            let track = load_track::<f64>(features, annotations, multiplier)?;
            Ok(Video {
                id: video_id(features),
                track,
            })
        })
        .collect()
}

fn cli_train(args: &CommonArgs) -> Result<()> {
    let config = build_config(args)?;
    let dir = out_dir(&config)?;
    let dataset = load_dataset(&config)?;
    let train_config: TrainConfig<f64> = config.train_config()?;
    let outcome = train(&dataset, &train_config)?;

    let checkpoint = dir.join("policy.csnc");
    save_checkpoint(&checkpoint, &outcome.params, &train_config.action_space)?;
    let curve = dir.join("learning_curve.csv");
    write_learning_curve(&curve, &outcome.curve)?;
    let effective = dir.join("run_config.txt");
    save_config(&effective, &config)?;
    println!("{}", checkpoint.display());
    println!("{}", curve.display());
    println!("{}", effective.display());
    Ok(())
}

/// Greedy rollout for one video under a fixed policy. The rng stream only
/// seeds the initial layout.
fn greedy_summary(
    video: &Video<f64>,
    trainer_params: &cosnet::PolicyParametersF64,
    config: &TrainConfig<f64>,
    seed: u64,
    index: u64,
) -> Result<SummaryRecord> {
    let mut rng = indexed_stream(seed, "summarize", index);
    let episode = greedy_episode(&video.track, trainer_params, config, &mut rng)?;
    let summary = extract_summary(&episode.trace, &video.track);
    let score = match &video.track.annotations {
        Some(mask) => Some(f_score::<f64>(&summary.frame_mask, mask)?),
        None => None,
    };
    Ok(SummaryRecord::new(&video.id, &summary, score))
}

fn cli_summarize(args: &CommonArgs) -> Result<()> {
    let config = build_config(args)?;
    let dir = out_dir(&config)?;
    let checkpoint_path = config.checkpoint.clone().ok_or_else(|| Error::BadConfigValue {
        key: "checkpoint".into(),
        value: String::new(),
        detail: "summarize needs a trained checkpoint".into(),
    })?;
    let (params, actions) = load_checkpoint::<f64>(&checkpoint_path)?;
    let dataset = load_dataset(&config)?;
    let mut train_config: TrainConfig<f64> = config.train_config()?;
    // The checkpoint's action menu is authoritative; it sized the network.
    train_config.action_space = actions;

    for (i, video) in dataset.iter().enumerate() {
        let record = greedy_summary(video, &params, &train_config, config.seed, i as u64)?;
        let path = dir.join(format!("{}.summary.json", video.id));
        save_summary(&path, &record)?;
        println!("{}", path.display());
    }
    Ok(())
}

fn cli_eval(args: &EvalArgs) -> Result<()> {
    let config = build_config(&args.common)?;
    let dir = out_dir(&config)?;
    let mut rows: Vec<(String, f64)> = Vec::new();

    if !args.summaries.is_empty() {
        // Mask-vs-mask: score stored summaries against annotation files.
        if args.summaries.len() != config.annotations.len() {
            return Err(Error::BadConfigValue {
                key: "annotations".into(),
                value: config.annotations.len().to_string(),
                detail: format!("expected one per summary file ({})", args.summaries.len()),
            });
        }
        for (summary_path, ann_path) in args.summaries.iter().zip(&config.annotations) {
            let record = load_summary(summary_path)?;
            let reference = load_annotations(ann_path, None)?;
            let score = f_score::<f64>(&record.frame_mask(), &reference.mask)?;
            rows.push((record.video_id, score));
        }
    } else {
        // Checkpoint mode: roll out greedily on annotated tracks.
        let checkpoint_path = config.checkpoint.clone().ok_or_else(|| Error::BadConfigValue {
            key: "checkpoint".into(),
            value: String::new(),
            detail: "eval needs either --summaries or a checkpoint".into(),
        })?;
        if config.annotations.is_empty() {
            return Err(Error::BadConfigValue {
                key: "annotations".into(),
                value: String::new(),
                detail: "eval needs reference annotations".into(),
            });
        }
        let (params, actions) = load_checkpoint::<f64>(&checkpoint_path)?;
        let dataset = load_dataset(&config)?;
        let mut train_config: TrainConfig<f64> = config.train_config()?;
        train_config.action_space = actions;
        for (i, video) in dataset.iter().enumerate() {
            let record = greedy_summary(video, &params, &train_config, config.seed, i as u64)?;
            let score = record.f_score.expect("annotated dataset yields scores");
            rows.push((video.id.clone(), score));
        }
    }

    let mut csv = String::from("input,f_score\n");
    for (id, score) in &rows {
        csv.push_str(&format!("{id},{score}\n"));
    }
    let path = dir.join("f_scores.csv");
    cosnet::io::atomic_write(&path, csv.as_bytes())?;
    println!("{}", path.display());
    Ok(())
}

fn cli_ablate(args: &CommonArgs) -> Result<()> {
    let config = build_config(args)?;
    let dir = out_dir(&config)?;
    let dataset = load_dataset(&config)?;

    let mut csv = String::from("mode,f_score\n");
    for mode in RewardMode::ALL {
        let mut mode_config = config.clone();
        mode_config.mode = mode;
        let train_config: TrainConfig<f64> = mode_config.train_config()?;
        let outcome = train(&dataset, &train_config)?;
        let mut total = 0.0;
        for (i, video) in dataset.iter().enumerate() {
            let record = greedy_summary(video, &outcome.params, &train_config, config.seed, i as u64)?;
            total += record.f_score.ok_or(Error::MissingAnnotations { mode })?;
        }
        let mean = total / dataset.len() as f64;
        csv.push_str(&format!("{mode},{mean}\n"));
    }
    let path = dir.join("ablation.csv");
    cosnet::io::atomic_write(&path, csv.as_bytes())?;
    println!("{}", path.display());
    Ok(())
}

fn cli_synth(args: &SynthArgs) -> Result<()> {
    let config = build_config(&args.common)?;
    let dir = out_dir(&config)?;
    let spec = SyntheticSpec {
        clips: args.clips,
        dim: args.dim,
        frames_per_clip: args.frames_per_clip,
        planted: args.planted,
        margin: args.margin,
        noise: args.noise,
        seed: config.seed,
    };
    let track: ClipTrack<f64> = generate_synthetic(&spec);
    let features = dir.join("synthetic.csnf");
    save_features(&features, &track)?;
    let annotations = dir.join("synthetic.ann");
    save_annotations(&annotations, track.annotations.as_ref().expect("synth always annotates"))?;
    println!("{}", features.display());
    println!("{}", annotations.display());
    Ok(())
}
