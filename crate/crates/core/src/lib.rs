//! headcast — region-blended 3D head reconstruction.
//!
//! Given frontal/side face images with precomputed 68-point landmarks and a
//! database of fixed-topology head scans, the pipeline scores rendered
//! database regions against the input face, blends the closest region
//! models into one head, morphs it onto the detected landmarks, and warps
//! the input frames into the database's shared UV texture.
//!
//! The stages live in their own modules and are plain functions over
//! immutable data:
//!
//! - [`mesh`], [`region`], [`landmark`]: core types and file formats
//! - [`render`]: software-rasterized frontal renders, cut into regions
//! - [`similarity`]: PCA / SSIM / LBP region scoring and blend weights
//! - [`blend`]: weighted region blendshapes and seam-aligned attachment
//! - [`morph`]: landmark-driven mesh morphing
//! - [`texture`]: frame picking and piecewise-affine UV texturing
//! - [`synth`]: deterministic synthetic database generation
//! - [`pipeline`]: end-to-end orchestration plus the JSON report
//!
//! With the default `parallel` feature the data-parallel loops fan out via
//! rayon; outputs are bit-identical to sequential runs.

pub mod blend;
pub mod config;
pub mod error;
pub mod img;
pub mod landmark;
pub mod math;
pub mod mesh;
pub mod morph;
pub mod par;
pub mod pipeline;
pub mod region;
pub mod similarity;
pub mod synth;
pub mod texture;
pub mod render;

pub use error::{Error, Result};

/// Number of facial feature points in the landmark convention used
/// throughout (the standard 68-point layout).
pub const LANDMARK_COUNT: usize = 68;
