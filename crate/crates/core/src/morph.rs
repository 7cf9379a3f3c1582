//! Landmark-driven mesh morphing.
//!
//! The blended head resembles the subject but its proportions are off; the
//! morph pulls the 68 mapped vertices toward the detected feature locations
//! and drags nearby vertices along. Influence decays with distance through
//! a per-feature sigmoid; three passes with shrinking reach settle large
//! structure first and details last. Morphing is strictly 2D — the model is
//! frontal-aligned and landmarks carry no depth, so Z coordinates pass
//! through bit-identical.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::landmark::LandmarkSet;
use crate::math::{vec2, vec3, ScaleOffset2, Vec2};
use crate::mesh::HeadMesh;
use crate::par;
use crate::region::LandmarkVertexMap;
use crate::LANDMARK_COUNT;

/// One morph pass: the reach multiplier and which features take part
/// (0-based indices into the 68-point layout).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MorphPass {
    pub k: f64,
    pub features: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MorphSchedule {
    pub passes: Vec<MorphPass>,
}

impl Default for MorphSchedule {
    fn default() -> Self {
        // Pass 1: everything. Pass 2: drop the jawline (0..=16), whose
        // coarse alignment is settled. Pass 3: only the fine detail
        // features - eyes, nostril base, mouth corners.
        let all: Vec<usize> = (0..LANDMARK_COUNT).collect();
        let no_jaw: Vec<usize> = (17..LANDMARK_COUNT).collect();
        let mut fine: Vec<usize> = (36..48).collect(); // eyes
        fine.extend(31..36); // nostril base
        fine.extend([48, 54]); // mouth corners
        fine.sort_unstable();
        MorphSchedule {
            passes: vec![
                MorphPass { k: 1.0, features: all },
                MorphPass { k: 0.45, features: no_jaw },
                MorphPass { k: 0.2, features: fine },
            ],
        }
    }
}

impl MorphSchedule {
    pub fn validate(&self) -> Result<()> {
        if self.passes.is_empty() {
            return Err(Error::InvalidConfig("morph schedule has no passes".into()));
        }
        for (i, pass) in self.passes.iter().enumerate() {
            if !(pass.k > 0.0) {
                return Err(Error::InvalidConfig(format!("pass {i}: k must be > 0")));
            }
            if pass.features.is_empty() {
                return Err(Error::InvalidConfig(format!("pass {i}: empty feature mask")));
            }
            if pass.features.iter().any(|&f| f >= LANDMARK_COUNT) {
                return Err(Error::InvalidConfig(format!(
                    "pass {i}: feature index out of range"
                )));
            }
        }
        Ok(())
    }
}

/// Adjustment weight: influence of a feature at distance `d` (model units)
/// with drop-off `sigma` and pass multiplier `k`.
///
/// `1 - 1 / (1 + exp((-d / (sigma^2 k) + 0.5) * 7))`: about 0.97 at the
/// feature itself, exactly 0.5 at `d = 0.5 sigma^2 k`, and decaying to 0.
pub fn awf(d: f64, sigma: f64, k: f64) -> f64 {
    1.0 - 1.0 / (1.0 + ((-d / (sigma * sigma * k) + 0.5) * 7.0).exp())
}

/// Least-squares scale+translation from normalized landmark space to model
/// X/Y, using the 68 landmark-to-vertex correspondences. Landmark files are
/// image-convention (y down), so y is flipped before the fit.
pub fn model_frame_transform(
    landmarks: &LandmarkSet,
    mesh: &HeadMesh,
    lmap: &LandmarkVertexMap,
) -> Result<ScaleOffset2> {
    landmarks.validate()?;
    lmap.validate(mesh.vertex_count())?;
    let pairs: Vec<(Vec2, Vec2)> = landmarks
        .points
        .iter()
        .zip(&lmap.vertex_index)
        .map(|(p, &vi)| (flip_y(*p), mesh.vertices[vi as usize].xy()))
        .collect();
    ScaleOffset2::fit(&pairs)
}

/// Feature targets in model X/Y coordinates.
pub fn landmarks_to_model_frame(
    landmarks: &LandmarkSet,
    mesh: &HeadMesh,
    lmap: &LandmarkVertexMap,
) -> Result<Vec<Vec2>> {
    let transform = model_frame_transform(landmarks, mesh, lmap)?;
    Ok(landmarks
        .points
        .iter()
        .map(|p| transform.apply(flip_y(*p)))
        .collect())
}

/// Image convention (y down) to model convention (y up) on the unit square.
pub fn flip_y(p: Vec2) -> Vec2 {
    vec2(p.x, 1.0 - p.y)
}

/// One morph pass over every vertex.
///
/// For each active feature `i`: the movement vector is target minus mapped
/// vertex. Every vertex `j` accumulates the movement vectors weighted by
/// `awf(|target_i - v_j|, sigma_i, k)`; if the accumulated weight exceeds 1
/// the sum is normalized by it, which keeps densely packed features from
/// overwhelming a vertex. Updates read old positions only.
pub fn morph_pass(
    mesh: &HeadMesh,
    targets: &[Vec2],
    lmap: &LandmarkVertexMap,
    k: f64,
    features: &[usize],
) -> Result<HeadMesh> {
    if targets.len() != LANDMARK_COUNT {
        return Err(Error::InvalidLandmarks(format!(
            "expected {LANDMARK_COUNT} targets, got {}",
            targets.len()
        )));
    }
    lmap.validate(mesh.vertex_count())?;
    if !(k > 0.0) {
        return Err(Error::InvalidConfig("morph k must be > 0".into()));
    }

    struct ActiveFeature {
        target: Vec2,
        movement: Vec2,
        sigma: f64,
    }
    let active: Vec<ActiveFeature> = features
        .iter()
        .map(|&i| {
            let mapped = mesh.vertices[lmap.vertex_index[i] as usize].xy();
            ActiveFeature {
                target: targets[i],
                movement: targets[i] - mapped,
                sigma: lmap.sigma[i],
            }
        })
        .collect();

    let vertices = par::map_slice(&mesh.vertices, |v| {
        let pos = v.xy();
        let mut sum = Vec2::ZERO;
        let mut weight_total = 0.0;
        for f in &active {
            let d = (f.target - pos).norm();
            let w = awf(d, f.sigma, k);
            sum += f.movement * w;
            weight_total += w;
        }
        let step = if weight_total > 1.0 {
            sum / weight_total
        } else {
            sum
        };
        if step.x == 0.0 && step.y == 0.0 {
            *v
        } else {
            vec3(v.x + step.x, v.y + step.y, v.z)
        }
    });

    Ok(HeadMesh {
        vertices,
        faces: mesh.faces.clone(),
        uvs: mesh.uvs.clone(),
    })
}

/// Runs the full schedule. Targets are mapped into the model frame once;
/// movement vectors are recomputed each pass from the current mesh, so
/// later passes correct residual error instead of replaying stale offsets.
pub fn morph(
    mesh: &HeadMesh,
    landmarks: &LandmarkSet,
    lmap: &LandmarkVertexMap,
    schedule: &MorphSchedule,
) -> Result<HeadMesh> {
    schedule.validate()?;
    let targets = landmarks_to_model_frame(landmarks, mesh, lmap)?;
    let mut current = mesh.clone();
    for pass in &schedule.passes {
        current = morph_pass(&current, &targets, lmap, pass.k, &pass.features)?;
    }
    Ok(current)
}
