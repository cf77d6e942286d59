use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use groundscale::augment::{augment, AugmentationRanges};
use groundscale::classiccv::viz::{annotate, distance_to_gray, mask_to_gray};
use groundscale::classiccv::detect_classic;
use groundscale::eval::evaluate;
use groundscale::frames::{fuse, split};
use groundscale::io::{self, Config};
use groundscale::scalemap::build_scale_map;
use groundscale::synth::render;
use groundscale::DetectionBox;

/// Flag combination rejected after parsing; reported with exit code 1.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

#[derive(Debug, Parser)]
#[command(name = "groundscale", version, about = "Ground-scale channel, classic obstacle detection, augmentation and mAP evaluation")]
pub struct Cli {
    /// Worker threads for per-file work (default: one per core)
    #[arg(long, global = true, value_parser = clap::value_parser!(u32).range(1..))]
    pub jobs: Option<u32>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Encode the per-pixel ground scale (meters per pixel) of a rig as an 8-bit PGM
    Scalemap(ScalemapArgs),
    /// Green filter + distance-transform obstacle detection on PPM images
    DetectClassic(DetectArgs),
    /// Combine an RGB PPM and an S-plane PGM into an FRM1 frame, or split one back
    Fuse(FuseArgs),
    /// Write seeded geometric/color augmentations of an FRM1 frame and its labels
    Augment(AugmentArgs),
    /// Per-class AP and mAP at IoU 0.5..0.9 for prediction vs ground-truth label directories
    Eval(EvalArgs),
    /// Render synthetic field scenes with ground truth
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct ScalemapArgs {
    /// Rig config (TOML; angles in degrees, lengths in meters, intrinsics in pixels)
    #[arg(long)]
    pub config: PathBuf,
    /// Grid stride in pixels; overrides `stride_px` from the config
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub stride: Option<u32>,
    /// Output PGM (P5) of the encoded scale plane
    #[arg(long)]
    pub out: PathBuf,
    /// Optional raw dump of the interpolated scale in meters per pixel (u32 width, u32 height, f32 LE; +inf above the horizon)
    #[arg(long)]
    pub dump: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DetectArgs {
    /// Rig and pipeline config (TOML)
    #[arg(long)]
    pub config: PathBuf,
    /// Input images (binary PPM, P6)
    #[arg(long, num_args = 1.., required = true)]
    pub image: Vec<PathBuf>,
    /// Directory for `<stem>.txt` prediction labels (class cx cy w h confidence, normalized)
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Also write `<stem>.annotated.ppm` (walkable overlay, contours, obstacle rays, query dot)
    #[arg(long)]
    pub annotate: bool,
    /// Also write `<stem>.mask.pgm`, `<stem>.core.pgm` and `<stem>.distance.pgm`
    #[arg(long)]
    pub debug_planes: bool,
}

#[derive(Debug, Args)]
pub struct FuseArgs {
    /// RGB input (PPM) to fuse
    #[arg(long, requires_all = ["s", "out"], conflicts_with = "split")]
    pub rgb: Option<PathBuf>,
    /// S-plane input (PGM) to fuse
    #[arg(long)]
    pub s: Option<PathBuf>,
    /// FRM1 output of fusing
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// FRM1 input to split into a PPM + PGM pair
    #[arg(long, requires_all = ["out_rgb", "out_s"])]
    pub split: Option<PathBuf>,
    /// RGB output (PPM) of splitting
    #[arg(long)]
    pub out_rgb: Option<PathBuf>,
    /// S-plane output (PGM) of splitting
    #[arg(long)]
    pub out_s: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AugmentArgs {
    /// Input frame (FRM1)
    #[arg(long)]
    pub frame: PathBuf,
    /// Ground-truth labels for the frame
    #[arg(long)]
    pub labels: PathBuf,
    /// Base seed; replica `i` uses `seed + i`
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of replicas
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub n: u64,
    /// Directory for `<stem>_<i>.frm` and `<stem>_<i>.txt`
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Directory of prediction label files (`<name>.txt`, with confidence)
    #[arg(long)]
    pub pred: PathBuf,
    /// Directory of ground-truth label files (`<name>.txt`); a missing prediction file counts as no detections
    #[arg(long)]
    pub gt: PathBuf,
    /// Also write the table as comma-separated values
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Scene file: rig config keys plus optional [field], [[line]], [[obstacle]] and [scatter] sections
    #[arg(long)]
    pub scene: PathBuf,
    /// Seed for scattered obstacles; scene `i` uses `seed + i`
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of scenes
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub count: u64,
    /// Output directory
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Base name of the outputs
    #[arg(long, default_value = "scene")]
    pub name: String,
}

pub fn run(cli: Cli) -> Result<()> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.jobs {
        pool = pool.num_threads(n as usize);
    }
    let pool = pool.build().context("creating worker pool")?;
    pool.install(|| match cli.command {
        Command::Scalemap(a) => scalemap(a),
        Command::DetectClassic(a) => detect(a),
        Command::Fuse(a) => fuse_cmd(a),
        Command::Augment(a) => augment_cmd(a),
        Command::Eval(a) => eval_cmd(a),
        Command::Synth(a) => synth(a),
    })
}

fn read_config(path: &Path) -> Result<Config> {
    io::read_config(path).with_context(|| format!("reading config {}", path.display()))
}

fn stem(path: &Path) -> Result<String> {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .with_context(|| format!("{} has no file name", path.display()))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn scalemap(a: ScalemapArgs) -> Result<()> {
    let config = read_config(&a.config)?;
    let stride = a.stride.unwrap_or(config.stride);
    let map = build_scale_map(&config.rig, stride)?;
    io::write_pgm(&a.out, &map.to_channel(&config.encoding))?;
    if let Some(dump) = &a.dump {
        io::write_float_dump(dump, map.width(), map.height(), &map.dense())?;
    }
    println!("scalemap: {}x{} at stride {stride} -> {}", map.width(), map.height(), a.out.display());
    Ok(())
}

fn detect(a: DetectArgs) -> Result<()> {
    let config = read_config(&a.config)?;
    ensure_dir(&a.out_dir)?;
    let stems = a.image.iter().map(|p| stem(p)).collect::<Result<Vec<_>>>()?;
    let logs = a
        .image
        .par_iter()
        .zip(&stems)
        .map(|(path, stem)| -> Result<String> {
            let img = io::read_ppm(path).with_context(|| format!("reading {}", path.display()))?;
            let out = detect_classic(&img, &config.rig, &config.classic)
                .with_context(|| format!("detecting in {}", path.display()))?;
            io::write_labels(&a.out_dir.join(format!("{stem}.txt")), &out.boxes, true)?;
            if a.annotate {
                let ann = annotate(&img, &out, &config.rig, &config.classic);
                io::write_ppm(&a.out_dir.join(format!("{stem}.annotated.ppm")), &ann)?;
            }
            if a.debug_planes {
                io::write_pgm(&a.out_dir.join(format!("{stem}.mask.pgm")), &mask_to_gray(&out.cleaned))?;
                io::write_pgm(&a.out_dir.join(format!("{stem}.core.pgm")), &mask_to_gray(&out.core))?;
                io::write_pgm(&a.out_dir.join(format!("{stem}.distance.pgm")), &distance_to_gray(&out.distance))?;
            }
            Ok(format!(
                "{}: {} boxes, {} obstacle points in range",
                path.display(),
                out.boxes.len(),
                out.obstacles.len()
            ))
        })
        .collect::<Vec<_>>();
    for log in logs {
        println!("{}", log?);
    }
    Ok(())
}

fn fuse_cmd(a: FuseArgs) -> Result<()> {
    match (&a.rgb, &a.split) {
        (Some(rgb_path), None) => {
            let (s_path, out) = (a.s.as_ref().unwrap(), a.out.as_ref().unwrap());
            let rgb = io::read_ppm(rgb_path).with_context(|| format!("reading {}", rgb_path.display()))?;
            let s = io::read_pgm(s_path).with_context(|| format!("reading {}", s_path.display()))?;
            io::write_frame(out, &fuse(&rgb, &s)?)?;
            println!("fuse: {}x{} -> {}", rgb.width(), rgb.height(), out.display());
        }
        (None, Some(frame_path)) => {
            let frame = io::read_frame(frame_path).with_context(|| format!("reading {}", frame_path.display()))?;
            let (rgb, s) = split(&frame);
            io::write_ppm(a.out_rgb.as_ref().unwrap(), &rgb)?;
            io::write_pgm(a.out_s.as_ref().unwrap(), &s)?;
            println!("split: {}x{} <- {}", rgb.width(), rgb.height(), frame_path.display());
        }
        _ => return Err(usage("give either --rgb/--s/--out or --split/--out-rgb/--out-s")),
    }
    Ok(())
}

fn augment_cmd(a: AugmentArgs) -> Result<()> {
    let frame = io::read_frame(&a.frame).with_context(|| format!("reading {}", a.frame.display()))?;
    let boxes = io::read_labels(&a.labels).with_context(|| format!("reading {}", a.labels.display()))?;
    let stem = stem(&a.frame)?;
    ensure_dir(&a.out_dir)?;
    let ranges = AugmentationRanges::default();
    let logs = (0..a.n)
        .into_par_iter()
        .map(|i| -> Result<String> {
            let seed = a.seed.wrapping_add(i);
            let (out, moved, _) = augment(&frame, &boxes, &ranges, seed);
            let base = a.out_dir.join(format!("{stem}_{i}"));
            io::write_frame(&base.with_extension("frm"), &out)?;
            io::write_labels(&base.with_extension("txt"), &moved, false)?;
            Ok(format!("{}: seed {seed}, {} of {} boxes kept", base.display(), moved.len(), boxes.len()))
        })
        .collect::<Vec<_>>();
    for log in logs {
        println!("{}", log?);
    }
    Ok(())
}

fn label_files(dir: &Path) -> Result<Vec<String>> {
    let mut names = Vec::new();
    for entry in fs::read_dir(dir).with_context(|| format!("listing {}", dir.display()))? {
        let path = entry?.path();
        if path.extension().is_some_and(|e| e == "txt") && path.is_file() {
            names.push(path.file_name().unwrap().to_string_lossy().into_owned());
        }
    }
    names.sort();
    Ok(names)
}

fn eval_cmd(a: EvalArgs) -> Result<()> {
    let gt_names = label_files(&a.gt)?;
    if gt_names.is_empty() {
        bail!("no ground-truth label files in {}", a.gt.display());
    }
    if let Some(orphan) = label_files(&a.pred)?.into_iter().find(|n| !gt_names.contains(n)) {
        bail!("prediction file {orphan} has no ground truth");
    }
    let read = |path: PathBuf| -> Result<Vec<DetectionBox>> {
        io::read_labels(&path).with_context(|| format!("reading {}", path.display()))
    };
    let pairs = gt_names
        .par_iter()
        .map(|name| -> Result<(Vec<DetectionBox>, Vec<DetectionBox>)> {
            let pred_path = a.pred.join(name);
            let preds = if pred_path.exists() { read(pred_path)? } else { Vec::new() };
            Ok((preds, read(a.gt.join(name))?))
        })
        .collect::<Result<Vec<_>>>()?;
    let (preds, gts): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
    let table = evaluate(&preds, &gts)?;
    print!("{}", table.to_text());
    if let Some(csv) = &a.csv {
        io::write_atomic(csv, table.to_csv().as_bytes())?;
    }
    Ok(())
}

fn synth(a: SynthArgs) -> Result<()> {
    let file = io::read_scene(&a.scene).with_context(|| format!("reading scene {}", a.scene.display()))?;
    ensure_dir(&a.out_dir)?;
    io::write_config(&a.out_dir.join(format!("{}.rig.toml", a.name)), &file.config)?;
    let map = build_scale_map(&file.config.rig, file.config.stride)?;
    let s_plane = map.to_channel(&file.config.encoding);
    let logs = (0..a.count)
        .into_par_iter()
        .map(|i| -> Result<String> {
            let seed = a.seed.wrapping_add(i);
            let mut scene = file.scene.clone();
            if let Some((count, radius, height)) = file.scatter {
                scene.scatter_obstacles(count, radius, height, seed);
            }
            let r = render(&scene)?;
            let name = if a.count == 1 { a.name.clone() } else { format!("{}_{i:04}", a.name) };
            let base = a.out_dir.join(&name);
            io::write_ppm(&base.with_extension("ppm"), &r.image)?;
            io::write_labels(&base.with_extension("txt"), &r.boxes, false)?;
            io::write_frame(&base.with_extension("frm"), &fuse(&r.image, &s_plane)?)?;
            io::write_float_dump(&base.with_extension("f32"), r.image.width(), r.image.height(), &r.scale)?;
            Ok(format!("{}: seed {seed}, {} obstacles visible", base.display(), r.boxes.len()))
        })
        .collect::<Vec<_>>();
    for log in logs {
        println!("{}", log?);
    }
    Ok(())
}
