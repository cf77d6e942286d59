//! Ground-plane geometry toolkit for a tilted monocular camera.
//!
//! - [`geometry`]: pinhole rig, pixel↔ground projection, per-pixel ground scale.
//! - [`scalemap`]: stride-sampled scale grid and its 8-bit `S` channel encoding.
//! - [`classiccv`]: green filter, opening, exact distance transform, line-width thresholding,
//!   contour tracing and obstacle extraction.
//! - [`frames`]: four-plane R,G,B,S detector input frames.
//! - [`augment`]: seeded geometric and color augmentation of frames and boxes.
//! - [`eval`]: IoU, VOC-style matching, all-point AP and the mAP table.
//! - [`synth`]: ray-cast field scenes with exact ground truth.
//! - [`io`]: PPM/PGM, FRM1 frames, label files and config parsing.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod augment;
pub mod classiccv;
pub mod detection;
pub mod eval;
pub mod frames;
pub mod geometry;
pub mod image;
pub mod io;
pub mod scalemap;
pub mod synth;

pub use detection::DetectionBox;
pub use geometry::{CameraIntrinsics, CameraPose, CameraRig, GeometryError, GroundPoint, Pixel};
pub use image::{GrayImage, RgbImage};
pub use scalemap::{build_scale_map, ScaleEncoding, ScaleMap};
