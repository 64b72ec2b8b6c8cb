//! Stitching of synchronized wide-angle and fisheye video streams.

pub mod blend;
pub mod cli;
pub mod error;
pub mod geometry;
pub mod io;
pub mod matching;
pub mod pipeline;
pub mod raster;
pub mod seam;
pub mod synth;

pub use error::{Error, Result};
