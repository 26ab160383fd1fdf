//! On-disk formats and run configuration: the binary clip-feature container,
//! per-frame annotation files, policy checkpoints, flat key=value run
//! configs, and the CSV/JSON artifacts the command line emits. All writes go
//! through a temp-file-then-rename step so readers never see partial files.

use std::fmt::Write as _;
use std::io::{Cursor, Read, Write};
use std::path::{Path, PathBuf};

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::Summary;
use crate::linalg::Mat;
use crate::num::Scalar;
use crate::policy::{NetDims, PolicyParameters};
use crate::reward::{RewardConfig, RewardMode};
use crate::train::{CurvePoint, TrainConfig};
use crate::types::{validate_track, ActionSpace, ClipTrack};

const FEATURE_MAGIC: &[u8; 4] = b"CSNF";
const FEATURE_VERSION: u16 = 1;
const CHECKPOINT_MAGIC: &[u8; 4] = b"CSNC";
const CHECKPOINT_VERSION: u16 = 1;

/// Writes bytes to a sibling temp file and renames it over the target, so a
/// crash mid-write never leaves a truncated artifact behind.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let dir = dir.unwrap_or_else(|| Path::new("."));
    let mut tmp =
        tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(path.to_path_buf(), e))?;
    tmp.write_all(bytes)
        .map_err(|e| Error::io(path.to_path_buf(), e))?;
    tmp.persist(path)
        .map_err(|e| Error::io(path.to_path_buf(), e.error))?;
    Ok(())
}

// -------------------------------------------------------------------------
// Clip feature container

/// Serializes a track's feature matrix: a fixed header (magic "CSNF",
/// version, clip count, dimension, frames per clip, total frames) followed
/// by the matrix as little-endian 32-bit floats, row-major by clip.
/// Annotations are not part of this container.
pub fn save_features<T: Scalar>(path: &Path, track: &ClipTrack<T>) -> Result<()> {
    let m = track.clip_count();
    let d = track.dim();
    let mut buf = Vec::with_capacity(20 + m * d * 4);
    buf.extend_from_slice(FEATURE_MAGIC);
    buf.write_u16::<LittleEndian>(FEATURE_VERSION).unwrap();
    buf.write_u32::<LittleEndian>(m as u32).unwrap();
    buf.write_u32::<LittleEndian>(d as u32).unwrap();
    buf.write_u16::<LittleEndian>(track.frames_per_clip as u16)
        .unwrap();
    buf.write_u32::<LittleEndian>(track.frame_count as u32).unwrap();
    for clip in 0..m {
        for value in track.clip(clip) {
            buf.write_f32::<LittleEndian>(value.as_f64() as f32).unwrap();
        }
    }
    atomic_write(path, &buf)
}

/// Reads a feature container back into an unannotated track. The body must
/// hold exactly clip_count * dim floats; anything shorter or longer is
/// reported as corruption with the byte counts.
pub fn load_features<T: Scalar>(path: &Path) -> Result<ClipTrack<T>> {
    let data = std::fs::read(path).map_err(|e| Error::io(path.to_path_buf(), e))?;
    if data.len() < 20 {
        return Err(Error::corrupt(
            path,
            format!("header needs 20 bytes, file has {}", data.len()),
        ));
    }
    if &data[..4] != FEATURE_MAGIC {
        return Err(Error::corrupt(path, "bad magic, not a clip feature file"));
    }
    let mut cursor = Cursor::new(&data[4..20]);
    let version = cursor.read_u16::<LittleEndian>().unwrap();
    if version != FEATURE_VERSION {
        return Err(Error::corrupt(
            path,
            format!("unsupported feature file version {version}"),
        ));
    }
    let m = cursor.read_u32::<LittleEndian>().unwrap() as usize;
    let d = cursor.read_u32::<LittleEndian>().unwrap() as usize;
    let frames_per_clip = cursor.read_u16::<LittleEndian>().unwrap() as usize;
    let frame_count = cursor.read_u32::<LittleEndian>().unwrap() as usize;
    let expected = 20 + m * d * 4;
    if data.len() != expected {
        return Err(Error::corrupt(
            path,
            format!("expected {expected} bytes, found {}", data.len()),
        ));
    }
    let mut body = Cursor::new(&data[20..]);
    let mut features = Mat::zeros(m, d);
    for r in 0..m {
        for c in 0..d {
            features[(r, c)] = T::of(body.read_f32::<LittleEndian>().unwrap() as f64);
        }
    }
    Ok(ClipTrack::new(features, frames_per_clip, frame_count))
}

/// Converts a plain-text feature matrix (one clip per line, values separated
/// by whitespace or commas) into the binary container. Total frame count
/// defaults to lines * frames_per_clip when not supplied.
pub fn import_text_features(
    src: &Path,
    dst: &Path,
    frames_per_clip: usize,
    frame_count: Option<usize>,
) -> Result<()> {
    let text = std::fs::read_to_string(src).map_err(|e| Error::io(src.to_path_buf(), e))?;
    let mut rows: Vec<Vec<f32>> = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row: Vec<f32> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse::<f32>().map_err(|_| {
                    Error::corrupt(src, format!("line {}: unparseable value '{s}'", idx + 1))
                })
            })
            .collect::<Result<_>>()?;
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(Error::corrupt(
                    src,
                    format!(
                        "line {}: {} values, earlier lines had {}",
                        idx + 1,
                        row.len(),
                        first.len()
                    ),
                ));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::corrupt(src, "no feature rows"));
    }
    let dim = rows[0].len();
    let features = Mat::from_fn(rows.len(), dim, |r, c| rows[r][c]);
    let track: ClipTrack<f32> = ClipTrack::new(
        features,
        frames_per_clip,
        frame_count.unwrap_or(rows.len() * frames_per_clip),
    );
    save_features(dst, &track)
}

// -------------------------------------------------------------------------
// Annotations

/// Per-frame annotations as loaded from disk: always a binary key-frame
/// mask, plus the raw scores when the file carried real-valued importance.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedAnnotations {
    pub mask: Vec<bool>,
    pub importance: Option<Vec<f64>>,
}

/// Reads a one-value-per-line annotation file. Files of exact 0/1 values are
/// a key-frame mask as written; real-valued files in [0, 1] are importance
/// scores, kept and binarized: a frame is key iff its score reaches the
/// threshold (the dataset median when none is given).
pub fn load_annotations(path: &Path, threshold: Option<f64>) -> Result<LoadedAnnotations> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path.to_path_buf(), e))?;
    let mut values = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        let value: f64 = line.parse().map_err(|_| {
            Error::corrupt(path, format!("line {}: unparseable value '{line}'", idx + 1))
        })?;
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::corrupt(
                path,
                format!("line {}: value {value} outside [0, 1]", idx + 1),
            ));
        }
        values.push(value);
    }
    if values.is_empty() {
        return Err(Error::corrupt(path, "no annotation values"));
    }
    if values.iter().all(|&v| v == 0.0 || v == 1.0) {
        return Ok(LoadedAnnotations {
            mask: values.iter().map(|&v| v == 1.0).collect(),
            importance: None,
        });
    }
    let cut = threshold.unwrap_or_else(|| median(&values));
    Ok(LoadedAnnotations {
        mask: values.iter().map(|&v| v >= cut).collect(),
        importance: Some(values),
    })
}

/// Writes a key-frame mask in the annotation format, one 0/1 per line.
pub fn save_annotations(path: &Path, mask: &[bool]) -> Result<()> {
    let mut out = String::with_capacity(mask.len() * 2);
    for &key in mask {
        out.push(if key { '1' } else { '0' });
        out.push('\n');
    }
    atomic_write(path, out.as_bytes())
}

fn median(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("annotation scores are finite"));
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

// -------------------------------------------------------------------------
// Track assembly

/// Loads features plus optional annotations into a validated track.
///
/// `clip_multiplier` widens clips by averaging that many consecutive feature
/// rows (1 keeps the file's granularity); leftover rows that do not fill a
/// whole group are dropped, and frames_per_clip scales up to match. The
/// frame-level annotation vector is untouched by regrouping.
pub fn load_track<T: Scalar>(
    features: &Path,
    annotations: Option<&Path>,
    clip_multiplier: usize,
) -> Result<ClipTrack<T>> {
    if !(1..=3).contains(&clip_multiplier) {
        return Err(Error::BadConfigValue {
            key: "clip_multiplier".into(),
            value: clip_multiplier.to_string(),
            detail: "must be 1, 2, or 3".into(),
        });
    }
    let mut track: ClipTrack<T> = load_features(features)?;
    if clip_multiplier > 1 {
        let grouped = track.clip_count() / clip_multiplier;
        let d = track.dim();
        let scale = T::of(1.0 / clip_multiplier as f64);
        let merged = Mat::from_fn(grouped, d, |r, c| {
            let mut sum = T::zero();
            for k in 0..clip_multiplier {
                sum += track.features[(r * clip_multiplier + k, c)];
            }
            sum * scale
        });
        track = ClipTrack::new(
            merged,
            track.frames_per_clip * clip_multiplier,
            track.frame_count,
        );
    }
    if let Some(ann_path) = annotations {
        let loaded = load_annotations(ann_path, None)?;
        if loaded.mask.len() != track.frame_count {
            return Err(Error::corrupt(
                ann_path,
                format!(
                    "{} annotation values, track has {} frames",
                    loaded.mask.len(),
                    track.frame_count
                ),
            ));
        }
        track.annotations = Some(loaded.mask);
        track.importance = loaded
            .importance
            .map(|scores| scores.into_iter().map(T::of).collect());
    }
    let violations = validate_track(&track);
    if !violations.is_empty() {
        return Err(Error::InvalidTrack { violations });
    }
    Ok(track)
}

// -------------------------------------------------------------------------
// Checkpoints

/// Writes policy parameters with their shape and action menu: magic "CSNC",
/// version, the four network dimensions, the action steps, then every
/// tensor in declaration order as little-endian 64-bit floats.
pub fn save_checkpoint<T: Scalar>(
    path: &Path,
    params: &PolicyParameters<T>,
    actions: &ActionSpace,
) -> Result<()> {
    assert_eq!(
        actions.len(),
        params.dims.actions,
        "action menu must match the network's output width"
    );
    let mut buf = Vec::new();
    buf.extend_from_slice(CHECKPOINT_MAGIC);
    buf.write_u16::<LittleEndian>(CHECKPOINT_VERSION).unwrap();
    buf.write_u32::<LittleEndian>(params.dims.input as u32).unwrap();
    buf.write_u32::<LittleEndian>(params.dims.hidden as u32).unwrap();
    buf.write_u32::<LittleEndian>(params.dims.hidden2 as u32).unwrap();
    buf.write_u32::<LittleEndian>(params.dims.actions as u32).unwrap();
    for &step in actions.steps() {
        buf.write_i32::<LittleEndian>(step).unwrap();
    }
    for tensor in params.tensors() {
        for value in tensor {
            buf.write_f64::<LittleEndian>(value.as_f64()).unwrap();
        }
    }
    atomic_write(path, &buf)
}

/// Reads a checkpoint back. The file length must match the header's shape
/// exactly, and the parameters must be finite.
pub fn load_checkpoint<T: Scalar>(path: &Path) -> Result<(PolicyParameters<T>, ActionSpace)> {
    let data = std::fs::read(path).map_err(|e| Error::io(path.to_path_buf(), e))?;
    if data.len() < 22 {
        return Err(Error::corrupt(
            path,
            format!("header needs 22 bytes, file has {}", data.len()),
        ));
    }
    if &data[..4] != CHECKPOINT_MAGIC {
        return Err(Error::corrupt(path, "bad magic, not a checkpoint"));
    }
    let mut cursor = Cursor::new(&data[4..]);
    let version = cursor.read_u16::<LittleEndian>().unwrap();
    if version != CHECKPOINT_VERSION {
        return Err(Error::corrupt(
            path,
            format!("unsupported checkpoint version {version}"),
        ));
    }
    let dims = NetDims {
        input: cursor.read_u32::<LittleEndian>().unwrap() as usize,
        hidden: cursor.read_u32::<LittleEndian>().unwrap() as usize,
        hidden2: cursor.read_u32::<LittleEndian>().unwrap() as usize,
        actions: cursor.read_u32::<LittleEndian>().unwrap() as usize,
    };
    let mut params = PolicyParameters::<T>::zeros(dims);
    let expected = 22 + dims.actions * 4 + params.param_count() * 8;
    if data.len() != expected {
        return Err(Error::corrupt(
            path,
            format!("expected {expected} bytes, found {}", data.len()),
        ));
    }
    let mut steps = Vec::with_capacity(dims.actions);
    for _ in 0..dims.actions {
        steps.push(cursor.read_i32::<LittleEndian>().unwrap());
    }
    let actions = ActionSpace::from_steps(steps)?;
    for tensor in params.tensors_mut() {
        for value in tensor {
            *value = T::of(cursor.read_f64::<LittleEndian>().unwrap());
        }
    }
    debug_assert_eq!(cursor.position() as usize, data.len() - 4);
    if !params.is_finite() {
        return Err(Error::NonFinite {
            quantity: "checkpoint parameters",
        });
    }
    Ok((params, actions))
}

// -------------------------------------------------------------------------
// Run configuration

/// Everything a run needs, serializable as a flat key=value text file.
/// Defaults match the published training setup; unknown keys are rejected
/// rather than ignored so typos cannot silently fall back to defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mode: RewardMode,
    pub seed: u64,
    pub learning_rate: f64,
    pub l2_weight: f64,
    pub gamma: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub alpha3: f64,
    pub alpha4: f64,
    pub hidden: usize,
    pub hidden2: usize,
    pub sequences_per_update: usize,
    pub episodes_per_dataset: usize,
    pub max_rounds: usize,
    /// Frames per clip of the working granularity: 16, 32, or 48.
    pub clip_frames: usize,
    /// Fixed team size; None derives it from track length.
    pub agents: Option<usize>,
    pub baseline: bool,
    pub actions: Vec<i32>,
    pub features: Vec<PathBuf>,
    pub annotations: Vec<PathBuf>,
    pub out: Option<PathBuf>,
    pub checkpoint: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let train = TrainConfig::<f64>::default();
        RunConfig {
            mode: train.reward.mode,
            seed: train.seed,
            learning_rate: train.learning_rate,
            l2_weight: train.l2_weight,
            gamma: train.reward.gamma,
            alpha1: train.reward.alpha1,
            alpha2: train.reward.alpha2,
            alpha3: train.reward.alpha3,
            alpha4: train.reward.alpha4,
            hidden: train.hidden,
            hidden2: train.hidden2,
            sequences_per_update: train.sequences_per_update,
            episodes_per_dataset: train.episodes_per_dataset,
            max_rounds: train.max_rounds,
            clip_frames: 16,
            agents: train.agents,
            baseline: train.use_baseline,
            actions: train.action_space.steps().to_vec(),
            features: Vec::new(),
            annotations: Vec::new(),
            out: None,
            checkpoint: None,
        }
    }
}

impl RunConfig {
    /// Parses the flat key=value form. Blank lines and '#' comments are
    /// skipped; later keys override earlier ones; unknown keys error.
    pub fn parse(text: &str) -> Result<RunConfig> {
        let mut config = RunConfig::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::BadConfigValue {
                    key: line.to_string(),
                    value: String::new(),
                    detail: format!("line {}: expected key=value", idx + 1),
                });
            };
            config.set(key.trim(), value.trim())?;
        }
        Ok(config)
    }

    /// Applies one key=value pair; the CLI funnels flag overrides through
    /// here too so both layers accept the same vocabulary.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "mode" => self.mode = parse_mode(key, value)?,
            "seed" => self.seed = parse_num(key, value)?,
            "learning_rate" => self.learning_rate = parse_float(key, value)?,
            "l2_weight" => self.l2_weight = parse_float(key, value)?,
            "gamma" => self.gamma = parse_float(key, value)?,
            "alpha1" => self.alpha1 = parse_float(key, value)?,
            "alpha2" => self.alpha2 = parse_float(key, value)?,
            "alpha3" => self.alpha3 = parse_float(key, value)?,
            "alpha4" => self.alpha4 = parse_float(key, value)?,
            "hidden" => self.hidden = parse_num(key, value)?,
            "hidden2" => self.hidden2 = parse_num(key, value)?,
            "sequences_per_update" => self.sequences_per_update = parse_num(key, value)?,
            "episodes_per_dataset" => self.episodes_per_dataset = parse_num(key, value)?,
            "max_rounds" => self.max_rounds = parse_num(key, value)?,
            "clip_frames" => {
                let frames: usize = parse_num(key, value)?;
                if ![16, 32, 48].contains(&frames) {
                    return Err(bad_value(key, value, "must be 16, 32, or 48"));
                }
                self.clip_frames = frames;
            }
            "agents" => {
                self.agents = if value == "auto" {
                    None
                } else {
                    Some(parse_num(key, value)?)
                }
            }
            "baseline" => {
                self.baseline = match value {
                    "true" | "1" => true,
                    "false" | "0" => false,
                    _ => return Err(bad_value(key, value, "must be true or false")),
                }
            }
            "actions" => {
                let steps: Vec<i32> = value
                    .split(',')
                    .map(|s| {
                        s.trim()
                            .parse::<i32>()
                            .map_err(|_| bad_value(key, value, "expected comma-separated integers"))
                    })
                    .collect::<Result<_>>()?;
                self.actions = steps;
            }
            "features" => self.features = parse_paths(value),
            "annotations" => self.annotations = parse_paths(value),
            "out" => self.out = parse_opt_path(value),
            "checkpoint" => self.checkpoint = parse_opt_path(value),
            _ => {
                return Err(Error::UnknownConfigKey {
                    key: key.to_string(),
                })
            }
        }
        Ok(())
    }

    /// Serializes every field, defaults included, in a fixed order.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "mode={}", self.mode);
        let _ = writeln!(out, "seed={}", self.seed);
        let _ = writeln!(out, "learning_rate={}", self.learning_rate);
        let _ = writeln!(out, "l2_weight={}", self.l2_weight);
        let _ = writeln!(out, "gamma={}", self.gamma);
        let _ = writeln!(out, "alpha1={}", self.alpha1);
        let _ = writeln!(out, "alpha2={}", self.alpha2);
        let _ = writeln!(out, "alpha3={}", self.alpha3);
        let _ = writeln!(out, "alpha4={}", self.alpha4);
        let _ = writeln!(out, "hidden={}", self.hidden);
        let _ = writeln!(out, "hidden2={}", self.hidden2);
        let _ = writeln!(out, "sequences_per_update={}", self.sequences_per_update);
        let _ = writeln!(out, "episodes_per_dataset={}", self.episodes_per_dataset);
        let _ = writeln!(out, "max_rounds={}", self.max_rounds);
        let _ = writeln!(out, "clip_frames={}", self.clip_frames);
        let agents = self
            .agents
            .map_or_else(|| "auto".to_string(), |n| n.to_string());
        let _ = writeln!(out, "agents={agents}");
        let _ = writeln!(out, "baseline={}", self.baseline);
        let steps: Vec<String> = self.actions.iter().map(|s| s.to_string()).collect();
        let _ = writeln!(out, "actions={}", steps.join(","));
        let _ = writeln!(out, "features={}", join_paths(&self.features));
        let _ = writeln!(out, "annotations={}", join_paths(&self.annotations));
        let _ = writeln!(out, "out={}", opt_path(&self.out));
        let _ = writeln!(out, "checkpoint={}", opt_path(&self.checkpoint));
        out
    }

    /// How many base feature rows merge into one working clip.
    pub fn clip_multiplier(&self) -> usize {
        self.clip_frames / 16
    }

    /// Lowers this config into the trainer's form.
    pub fn train_config<T: Scalar>(&self) -> Result<TrainConfig<T>> {
        Ok(TrainConfig {
            sequences_per_update: self.sequences_per_update,
            episodes_per_dataset: self.episodes_per_dataset,
            max_rounds: self.max_rounds,
            learning_rate: T::of(self.learning_rate),
            l2_weight: T::of(self.l2_weight),
            reward: RewardConfig {
                alpha1: T::of(self.alpha1),
                alpha2: T::of(self.alpha2),
                alpha3: T::of(self.alpha3),
                alpha4: T::of(self.alpha4),
                gamma: T::of(self.gamma),
                mode: self.mode,
            },
            action_space: ActionSpace::from_steps(self.actions.clone())?,
            hidden: self.hidden,
            hidden2: self.hidden2,
            agents: self.agents,
            use_baseline: self.baseline,
            seed: self.seed,
        })
    }
}

/// Reads a config file.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path.to_path_buf(), e))?;
    RunConfig::parse(&text)
}

/// Writes a config file.
pub fn save_config(path: &Path, config: &RunConfig) -> Result<()> {
    atomic_write(path, config.to_text().as_bytes())
}

fn parse_mode(key: &str, value: &str) -> Result<RewardMode> {
    value
        .parse::<RewardMode>()
        .map_err(|detail| bad_value(key, value, &detail))
}

fn parse_num<N: std::str::FromStr>(key: &str, value: &str) -> Result<N> {
    value
        .parse::<N>()
        .map_err(|_| bad_value(key, value, "expected a non-negative integer"))
}

fn parse_float(key: &str, value: &str) -> Result<f64> {
    let parsed: f64 = value
        .parse()
        .map_err(|_| bad_value(key, value, "expected a number"))?;
    if !parsed.is_finite() {
        return Err(bad_value(key, value, "must be finite"));
    }
    Ok(parsed)
}

fn parse_paths(value: &str) -> Vec<PathBuf> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(PathBuf::from)
        .collect()
}

fn parse_opt_path(value: &str) -> Option<PathBuf> {
    (!value.is_empty()).then(|| PathBuf::from(value))
}

fn join_paths(paths: &[PathBuf]) -> String {
    paths
        .iter()
        .map(|p| p.display().to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn opt_path(path: &Option<PathBuf>) -> String {
    path.as_ref().map_or_else(String::new, |p| p.display().to_string())
}

fn bad_value(key: &str, value: &str, detail: &str) -> Error {
    Error::BadConfigValue {
        key: key.to_string(),
        value: value.to_string(),
        detail: detail.to_string(),
    }
}

// -------------------------------------------------------------------------
// Run artifacts

/// Writes the learning curve as CSV, one row per update. The f_score column
/// is empty on runs without annotations.
pub fn write_learning_curve<T: Scalar>(path: &Path, points: &[CurvePoint<T>]) -> Result<()> {
    let mut out = String::from("update_index,video_id,mean_return,grad_norm,f_score\n");
    for p in points {
        let f = p
            .f_score
            .map_or_else(String::new, |v| format!("{}", v.as_f64()));
        let _ = writeln!(
            out,
            "{},{},{},{},{f}",
            p.update_index,
            p.video_id,
            p.mean_return.as_f64(),
            p.grad_norm.as_f64()
        );
    }
    atomic_write(path, out.as_bytes())
}

/// A summary as written to JSON: selected clips, the frame intervals they
/// cover, and the F-score when ground truth was available.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRecord {
    pub video_id: String,
    pub clips: Vec<usize>,
    pub frame_intervals: Vec<FrameInterval>,
    pub frame_count: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f_score: Option<f64>,
}

/// A half-open run of selected frames.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameInterval {
    pub start: usize,
    pub end: usize,
}

impl SummaryRecord {
    pub fn new(video_id: &str, summary: &Summary, f_score: Option<f64>) -> Self {
        SummaryRecord {
            video_id: video_id.to_string(),
            clips: summary.clips.clone(),
            frame_intervals: intervals(&summary.frame_mask),
            frame_count: summary.frame_mask.len(),
            f_score,
        }
    }

    /// Expands the intervals back into the frame mask they came from.
    pub fn frame_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.frame_count];
        for iv in &self.frame_intervals {
            for frame in iv.start..iv.end.min(self.frame_count) {
                mask[frame] = true;
            }
        }
        mask
    }
}

fn intervals(mask: &[bool]) -> Vec<FrameInterval> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, &b) in mask.iter().enumerate() {
        match (b, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                out.push(FrameInterval { start: s, end: i });
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push(FrameInterval {
            start: s,
            end: mask.len(),
        });
    }
    out
}

/// Writes one summary as pretty JSON.
pub fn save_summary(path: &Path, record: &SummaryRecord) -> Result<()> {
    let json = serde_json::to_string_pretty(record).expect("summary records always serialize");
    atomic_write(path, json.as_bytes())
}

/// Reads a summary JSON back, as the evaluator accepts pre-computed masks.
pub fn load_summary(path: &Path) -> Result<SummaryRecord> {
    let mut text = String::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_string(&mut text))
        .map_err(|e| Error::io(path.to_path_buf(), e))?;
    serde_json::from_str(&text).map_err(|e| Error::corrupt(path, e.to_string()))
}
