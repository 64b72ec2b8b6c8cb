//! End-to-end stitching: alignment with caching, per-frame seam update and
//! blending, and run statistics.

mod config;
mod model;
mod run;
mod stitch;

pub use config::{AlignMode, StitchConfig};
pub use model::{align, align_with_matches, overlap_rmse, prepare_frame, AlignmentDiagnostics, AlignmentModel};
pub use run::{is_alignment_frame, run, run_with, FnSource, FrameSource, RunStats, StitchedFrame};
pub use stitch::{seam_displacement, stitch_frame, FrameState, FrameTiming};
