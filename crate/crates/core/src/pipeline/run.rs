use std::fmt::Write as _;
use std::time::{Duration, Instant};

use super::{align, stitch_frame, AlignmentModel, FrameState, FrameTiming, StitchConfig};
use crate::error::{Error, Result};
use crate::raster::Frame;
use crate::seam::Seam;

/// Random-access, fallible frame stream.
pub trait FrameSource {
    fn len(&self) -> usize;
    fn frame(&self, index: usize) -> Result<Frame>;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl FrameSource for [Frame] {
    fn len(&self) -> usize {
        <[Frame]>::len(self)
    }

    fn frame(&self, index: usize) -> Result<Frame> {
        Ok(self[index].clone())
    }
}

impl FrameSource for Vec<Frame> {
    fn len(&self) -> usize {
        self.as_slice().len()
    }

    fn frame(&self, index: usize) -> Result<Frame> {
        Ok(self[index].clone())
    }
}

/// Frames produced on demand by a closure.
pub struct FnSource<F> {
    pub len: usize,
    pub f: F,
}

impl<F: Fn(usize) -> Result<Frame>> FrameSource for FnSource<F> {
    fn len(&self) -> usize {
        self.len
    }

    fn frame(&self, index: usize) -> Result<Frame> {
        (self.f)(index)
    }
}

/// A stitched frame handed to the sink.
#[derive(Debug, Clone)]
pub struct StitchedFrame {
    pub index: usize,
    pub frame: Frame,
    pub seam: Seam,
    /// Frame index the alignment in use was estimated at.
    pub model_frame: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunStats {
    pub frames_a: usize,
    pub frames_b: usize,
    pub frames_stitched: usize,
    /// Streams differed in length and the longer was cut.
    pub truncated: bool,
    pub alignments_attempted: usize,
    pub alignments_succeeded: usize,
    pub alignments_failed: usize,
    pub alignment_frames: Vec<usize>,
    pub failed_alignment_frames: Vec<usize>,
    pub matches: usize,
    pub inliers: usize,
    pub fallback_cells: usize,
    pub canvas: (usize, usize),
    pub pyramid_levels: usize,
    pub mean_seam_displacement: f64,
    pub mean_seam_cost: f64,
    pub align_times: Vec<Duration>,
    pub frame_times: Vec<FrameTiming>,
}

fn percentile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return 0.0;
    }
    let idx = ((sorted.len() - 1) as f64 * q).round() as usize;
    sorted[idx]
}

fn stage_summary(out: &mut String, name: &str, durations: impl Iterator<Item = Duration>) {
    let mut ms: Vec<f64> = durations.map(|d| d.as_secs_f64() * 1e3).collect();
    ms.sort_by(f64::total_cmp);
    let mean = if ms.is_empty() { 0.0 } else { ms.iter().sum::<f64>() / ms.len() as f64 };
    let _ = writeln!(out, "{name}_ms_mean={mean:.3}");
    let _ = writeln!(out, "{name}_ms_p50={:.3}", percentile(&ms, 0.5));
    let _ = writeln!(out, "{name}_ms_p95={:.3}", percentile(&ms, 0.95));
}

impl RunStats {
    /// Frames per second of the per-frame path (warp + seam + blend),
    /// excluding alignment.
    pub fn fps(&self) -> f64 {
        let total: f64 = self.frame_times.iter().map(|t| t.total.as_secs_f64()).sum();
        if total > 0.0 {
            self.frame_times.len() as f64 / total
        } else {
            0.0
        }
    }

    /// Flat `key=value` report. Timing lines are included only on request so
    /// the default report is reproducible.
    pub fn report(&self, timing: bool) -> String {
        let mut s = String::new();
        let join = |v: &[usize]| v.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(",");
        let _ = writeln!(s, "frames_a={}", self.frames_a);
        let _ = writeln!(s, "frames_b={}", self.frames_b);
        let _ = writeln!(s, "frames_stitched={}", self.frames_stitched);
        let _ = writeln!(s, "truncated={}", self.truncated);
        if self.truncated {
            let _ = writeln!(
                s,
                "warning=stream lengths differ ({} vs {}); processed {}",
                self.frames_a, self.frames_b, self.frames_stitched
            );
        }
        let _ = writeln!(s, "alignments_attempted={}", self.alignments_attempted);
        let _ = writeln!(s, "alignments_succeeded={}", self.alignments_succeeded);
        let _ = writeln!(s, "alignments_failed={}", self.alignments_failed);
        let _ = writeln!(s, "alignment_frames={}", join(&self.alignment_frames));
        let _ = writeln!(s, "failed_alignment_frames={}", join(&self.failed_alignment_frames));
        let _ = writeln!(s, "matches={}", self.matches);
        let _ = writeln!(s, "inliers={}", self.inliers);
        let _ = writeln!(s, "fallback_cells={}", self.fallback_cells);
        let _ = writeln!(s, "canvas={}x{}", self.canvas.0, self.canvas.1);
        let _ = writeln!(s, "pyramid_levels={}", self.pyramid_levels);
        let _ = writeln!(s, "mean_seam_displacement={:.6}", self.mean_seam_displacement);
        let _ = writeln!(s, "mean_seam_cost={:.6}", self.mean_seam_cost);
        if timing {
            let _ = writeln!(s, "fps={:.3}", self.fps());
            stage_summary(&mut s, "align", self.align_times.iter().copied());
            stage_summary(&mut s, "warp", self.frame_times.iter().map(|t| t.warp));
            stage_summary(&mut s, "seam", self.frame_times.iter().map(|t| t.seam));
            stage_summary(&mut s, "blend", self.frame_times.iter().map(|t| t.blend));
            stage_summary(&mut s, "frame", self.frame_times.iter().map(|t| t.total));
        }
        s
    }
}

/// Whether frame `index` is scheduled for (re-)alignment.
pub fn is_alignment_frame(index: usize, realign_interval: usize) -> bool {
    index == 0 || (realign_interval > 0 && index % realign_interval == 0)
}

/// Stitches two synchronized streams with the default aligner.
pub fn run<A, B, S>(stream_a: &A, stream_b: &B, config: &StitchConfig, sink: S) -> Result<RunStats>
where
    A: FrameSource + ?Sized,
    B: FrameSource + ?Sized,
    S: FnMut(&StitchedFrame) -> Result<()>,
{
    run_with(stream_a, stream_b, config, |_, a, b| align(a, b, config), sink)
}

/// Like [`run`] with a caller-supplied aligner `(frame index, a, b)`.
/// A failed alignment keeps the previous model; failing before any model
/// exists aborts the run.
pub fn run_with<A, B, L, S>(
    stream_a: &A,
    stream_b: &B,
    config: &StitchConfig,
    mut aligner: L,
    mut sink: S,
) -> Result<RunStats>
where
    A: FrameSource + ?Sized,
    B: FrameSource + ?Sized,
    L: FnMut(usize, &Frame, &Frame) -> Result<AlignmentModel>,
    S: FnMut(&StitchedFrame) -> Result<()>,
{
    config.validate()?;
    let n = stream_a.len().min(stream_b.len());
    let mut stats = RunStats {
        frames_a: stream_a.len(),
        frames_b: stream_b.len(),
        truncated: stream_a.len() != stream_b.len(),
        ..RunStats::default()
    };
    let mut model: Option<AlignmentModel> = None;
    let mut state = FrameState::default();
    let (mut displacement_sum, mut displacement_n, mut cost_sum) = (0.0, 0usize, 0.0);

    for i in 0..n {
        let a = stream_a.frame(i)?;
        let b = stream_b.frame(i)?;
        if is_alignment_frame(i, config.realign_interval) {
            stats.alignments_attempted += 1;
            let t = Instant::now();
            let result = aligner(i, &a, &b);
            stats.align_times.push(t.elapsed());
            match result {
                Ok(mut m) => {
                    m.frame_estimated = i;
                    stats.alignments_succeeded += 1;
                    stats.alignment_frames.push(i);
                    stats.matches = m.diag.matches;
                    stats.inliers = m.diag.inliers;
                    stats.fallback_cells = m.diag.fallback_cells;
                    stats.canvas = (m.canvas.width, m.canvas.height);
                    stats.pyramid_levels = m.pyramid_levels();
                    model = Some(m);
                    state.prev_seam = None;
                }
                Err(e) => {
                    stats.alignments_failed += 1;
                    stats.failed_alignment_frames.push(i);
                    if model.is_none() {
                        return Err(match e {
                            Error::AlignmentFailed(_) => e,
                            other => Error::AlignmentFailed(Box::new(other)),
                        });
                    }
                }
            }
        }
        let m = model.as_ref().expect("model exists after the first alignment");
        let (frame, next) = stitch_frame(&a, &b, m, &state, config)?;
        state = next;
        stats.frame_times.push(state.timing);
        if let Some(d) = state.seam_displacement {
            displacement_sum += d;
            displacement_n += 1;
        }
        let seam = state.prev_seam.clone().expect("stitch_frame sets the seam");
        cost_sum += seam.cost;
        sink(&StitchedFrame {
            index: i,
            frame,
            seam,
            model_frame: m.frame_estimated,
        })?;
        stats.frames_stitched += 1;
    }
    if displacement_n > 0 {
        stats.mean_seam_displacement = displacement_sum / displacement_n as f64;
    }
    if stats.frames_stitched > 0 {
        stats.mean_seam_cost = cost_sum / stats.frames_stitched as f64;
    }
    Ok(stats)
}
