//! Frame directories, text formats (matches, truth, config, scenes) and
//! diagnostic overlays.

mod config;
mod diag;
mod frame;
mod scene;
mod text;

pub use config::{parse_config, read_config};
pub use diag::{inlier_overlay, seam_overlay};
pub use frame::{
    decode_ppm, encode_ppm, frame_name, list_frames, read_frame, write_atomic, write_frame, DirSource, FrameFormat,
};
pub use scene::{parse_scene, parse_texture, read_scene};
pub use text::{
    check_match_extents, format_matches, format_truth, parse_matches, parse_truth, read_match_file, read_truth_file,
    write_match_file,
};
