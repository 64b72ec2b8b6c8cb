//! Synthetic wide-angle / fisheye frame pairs with known geometry, used as
//! ground truth for alignment and pipeline tests.

mod lens;
mod scene;
mod texture;

pub use lens::FisheyeLens;
pub use scene::{
    make_sequence, render_pair, GroundTruth, LabeledCorrespondence, MovingObject, PlaneSpec, SceneRenderer, SceneSpec,
    Sequence,
};
pub use texture::{Texture, TextureKind};
