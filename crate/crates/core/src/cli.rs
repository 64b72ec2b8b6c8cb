//! `vidstitch stitch | synth | eval`.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::geometry::{Correspondence, Point2};
use crate::io::{
    check_match_extents, format_truth, frame_name, inlier_overlay, read_config, read_match_file, read_scene,
    read_truth_file, seam_overlay, write_atomic, write_frame, DirSource, FrameFormat,
};
use crate::pipeline::{
    align, align_with_matches, overlap_rmse, prepare_frame, run_with, stitch_frame, AlignMode, AlignmentModel,
    FrameSource, FrameState, StitchConfig,
};
use crate::raster::Frame;
use crate::synth::make_sequence;

pub const EXIT_USAGE: i32 = 1;
pub const EXIT_IO: i32 = 2;
pub const EXIT_ALIGNMENT: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "vidstitch", version, about = "Stitch a wide-angle and a fisheye frame sequence")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Global,
    Multi,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Stitch two synchronized frame directories.
    Stitch {
        /// Wide-angle frames (directory or single image).
        #[arg(long)]
        left: PathBuf,
        /// Fisheye frames.
        #[arg(long)]
        right: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// key=value configuration file.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Externally computed matches `x1 y1 x2 y2`, in input-frame pixels.
        #[arg(long)]
        matches: Option<PathBuf>,
        #[arg(long)]
        realign_interval: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Write seam and inlier overlays per alignment here.
        #[arg(long)]
        diag: Option<PathBuf>,
        /// Add per-stage timings to stats.txt (makes it run-dependent).
        #[arg(long)]
        timing: bool,
    },
    /// Render a synthetic scene into paired frame directories.
    Synth {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long, default_value_t = 1)]
        frames: usize,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the scene file's seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Alignment error against ground truth plus seam statistics.
    Eval {
        #[arg(long)]
        left: PathBuf,
        #[arg(long)]
        right: PathBuf,
        #[arg(long)]
        truth: PathBuf,
        #[arg(long, value_enum, default_value_t = ModeArg::Multi)]
        mode: ModeArg,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        matches: Option<PathBuf>,
    },
}

/// Exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io { .. } | Error::DimensionMismatch(_) => EXIT_IO,
        Error::InvalidParameter(_) | Error::Parse { .. } => EXIT_USAGE,
        _ => EXIT_ALIGNMENT,
    }
}

/// Runs the command line and returns the process exit code. Errors go to
/// stderr as one line.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{e}");
                    0
                }
                _ => {
                    let msg = e.to_string();
                    let first = msg.lines().next().unwrap_or("usage error");
                    eprintln!("vidstitch: {}", first.trim_start_matches("error: "));
                    EXIT_USAGE
                }
            };
        }
    };
    let result = match cli.command {
        Command::Stitch {
            left,
            right,
            out,
            config,
            matches,
            realign_interval,
            seed,
            diag,
            timing,
        } => cmd_stitch(&StitchArgs {
            left,
            right,
            out,
            config,
            matches,
            realign_interval,
            seed,
            diag,
            timing,
        }),
        Command::Synth { scene, frames, out, seed } => cmd_synth(&scene, frames, &out, seed),
        Command::Eval {
            left,
            right,
            truth,
            mode,
            config,
            matches,
        } => cmd_eval(&left, &right, &truth, mode, config.as_deref(), matches.as_deref()),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("vidstitch: {e}");
            exit_code(&e)
        }
    }
}

struct StitchArgs {
    left: PathBuf,
    right: PathBuf,
    out: PathBuf,
    config: Option<PathBuf>,
    matches: Option<PathBuf>,
    realign_interval: Option<usize>,
    seed: Option<u64>,
    diag: Option<PathBuf>,
    timing: bool,
}

fn load_config(path: Option<&Path>) -> Result<StitchConfig> {
    match path {
        Some(p) => read_config(p),
        None => Ok(StitchConfig::default()),
    }
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, None, e.to_string()))
}

/// Scales points given in input-frame pixels to the prepared frame size.
fn scale_matches(matches: &[Correspondence], from_a: (u32, u32), from_b: (u32, u32), config: &StitchConfig) -> Vec<Correspondence> {
    let factor = |(w, h): (u32, u32)| match config.input_size {
        Some((tw, th)) => (tw as f64 / w as f64, th as f64 / h as f64),
        None => (1.0, 1.0),
    };
    let (fa, fb) = (factor(from_a), factor(from_b));
    matches
        .iter()
        .map(|c| Correspondence {
            src: Point2::new(c.src.x * fa.0, c.src.y * fa.1),
            dst: Point2::new(c.dst.x * fb.0, c.dst.y * fb.1),
        })
        .collect()
}

fn prepared_size(dims: (u32, u32), config: &StitchConfig) -> (usize, usize) {
    config.input_size.unwrap_or((dims.0 as usize, dims.1 as usize))
}

/// Aligner used by the commands: external matches when given, otherwise
/// detection and matching on the frames.
fn make_aligner<'a>(
    config: &'a StitchConfig,
    matches: Option<Vec<Correspondence>>,
    dims: ((u32, u32), (u32, u32)),
) -> impl FnMut(usize, &Frame, &Frame) -> Result<AlignmentModel> + 'a {
    let scaled = matches.map(|m| scale_matches(&m, dims.0, dims.1, config));
    move |_, a, b| match &scaled {
        Some(m) => align_with_matches(prepared_size(dims.0, config), prepared_size(dims.1, config), m, config),
        None => align(a, b, config),
    }
}

fn read_matches_for(path: Option<&Path>, a: &DirSource, b: &DirSource) -> Result<Option<Vec<Correspondence>>> {
    path.map(|p| {
        let m = read_match_file(p)?;
        check_match_extents(&m, a.dims, b.dims, p)?;
        Ok(m)
    })
    .transpose()
}

fn cmd_stitch(args: &StitchArgs) -> Result<()> {
    let mut config = load_config(args.config.as_deref())?;
    if let Some(n) = args.realign_interval {
        config.realign_interval = n;
    }
    if let Some(s) = args.seed {
        config.seed = s;
    }
    config.validate()?;
    let a = DirSource::open(&args.left)?;
    let b = DirSource::open(&args.right)?;
    let matches = read_matches_for(args.matches.as_deref(), &a, &b)?;
    create_dir(&args.out)?;
    if let Some(d) = &args.diag {
        create_dir(d)?;
    }

    let diag = args.diag.as_deref();
    let mut inner = make_aligner(&config, matches, (a.dims, b.dims));
    let aligner = |i: usize, fa: &Frame, fb: &Frame| {
        let model = inner(i, fa, fb)?;
        if let Some(d) = diag {
            let overlay = inlier_overlay(&prepare_frame(fa, &config), &prepare_frame(fb, &config), &model.inliers);
            write_frame(&d.join(format!("inliers_{i:06}.png")), &overlay)?;
        }
        Ok(model)
    };
    let mut last_model = None;
    let sink = |f: &crate::pipeline::StitchedFrame| {
        write_frame(&args.out.join(frame_name(f.index, FrameFormat::Png)), &f.frame)?;
        if let Some(d) = diag {
            if last_model != Some(f.model_frame) {
                write_frame(&d.join(format!("seam_{:06}.png", f.index)), &seam_overlay(&f.frame, &f.seam))?;
            }
        }
        last_model = Some(f.model_frame);
        Ok(())
    };
    let stats = run_with(&a, &b, &config, aligner, sink)?;
    write_atomic(&args.out.join("stats.txt"), stats.report(args.timing).as_bytes())?;
    if stats.truncated {
        eprintln!(
            "vidstitch: warning: {} left and {} right frames; stitched the first {}",
            stats.frames_a, stats.frames_b, stats.frames_stitched
        );
    }
    Ok(())
}

fn cmd_synth(scene: &Path, frames: usize, out: &Path, seed: Option<u64>) -> Result<()> {
    let mut spec = read_scene(scene)?;
    if let Some(s) = seed {
        spec.seed = s;
    }
    if frames == 0 {
        return Err(Error::param("--frames must be at least 1"));
    }
    let seq = make_sequence(&spec, spec.motion, frames)?;
    let (left, right) = (out.join("left"), out.join("right"));
    create_dir(&left)?;
    create_dir(&right)?;
    for k in 0..frames {
        write_frame(&left.join(frame_name(k, FrameFormat::Png)), &seq.frames_a[k])?;
        write_frame(&right.join(frame_name(k, FrameFormat::Png)), &seq.frames_b[k])?;
    }
    if spec.object.is_some() {
        let masks = out.join("object");
        create_dir(&masks)?;
        for (k, m) in seq.object_masks_a.iter().enumerate() {
            let img = Frame::from_fn(m.width as u32, m.height as u32, |x, y| {
                image::Rgb([if m.get(x as usize, y as usize) { 255 } else { 0 }; 3])
            });
            write_frame(&masks.join(frame_name(k, FrameFormat::Png)), &img)?;
        }
    }
    write_atomic(&out.join("truth.txt"), format_truth(&seq.truth.correspondences).as_bytes())
}

fn cmd_eval(
    left: &Path,
    right: &Path,
    truth: &Path,
    mode: ModeArg,
    config: Option<&Path>,
    matches: Option<&Path>,
) -> Result<()> {
    let mut config = load_config(config)?;
    config.mode = match mode {
        ModeArg::Global => AlignMode::Global,
        ModeArg::Multi => AlignMode::Multi,
    };
    let truth_pairs = read_truth_file(truth)?;
    let a = DirSource::open(left)?;
    let b = DirSource::open(right)?;
    let matches = read_matches_for(matches, &a, &b)?;
    let (fa, fb) = (a.frame(0)?, b.frame(0)?);
    let model = make_aligner(&config, matches, (a.dims, b.dims))(0, &fa, &fb)?;

    let inliers: Vec<Correspondence> = truth_pairs.iter().filter(|t| t.is_inlier()).map(|t| t.correspondence).collect();
    let (rmse, counted) = overlap_rmse(&model, &scale_matches(&inliers, a.dims, b.dims, &config));
    let (_, state) = stitch_frame(&fa, &fb, &model, &FrameState::default(), &config)?;
    let seam = state.prev_seam.expect("stitched frame has a seam");

    let mut s = String::new();
    let _ = writeln!(s, "mode={}", if config.mode == AlignMode::Global { "global" } else { "multi" });
    let _ = writeln!(s, "truth_pairs={}", inliers.len());
    let _ = writeln!(s, "pairs_in_overlap={counted}");
    let _ = writeln!(s, "overlap_rmse={rmse:.6}");
    let _ = writeln!(s, "matches={}", model.diag.matches);
    let _ = writeln!(s, "inliers={}", model.diag.inliers);
    let _ = writeln!(s, "inlier_mean_residual={:.6}", model.diag.mean_residual);
    let _ = writeln!(s, "canvas={}x{}", model.canvas.width, model.canvas.height);
    let _ = writeln!(s, "seam_length={}", seam.path.len());
    let _ = writeln!(s, "seam_cost={:.6}", seam.cost);
    let _ = writeln!(s, "seam_mean_cost={:.6}", seam.cost / seam.path.len().max(1) as f64);
    print!("{s}");
    Ok(())
}
