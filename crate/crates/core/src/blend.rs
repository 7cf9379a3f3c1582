//! Region blendshapes and seam-aligned attachment.
//!
//! Each region model is a per-vertex convex combination of the selected
//! database heads. The face blendshape is the base; nose, then eyes and
//! mouth are attached onto it. Attachment first removes the mean offset
//! between the two models over the seam overlap (half of it, applied to
//! the added region), then blends per vertex with a sigmoid-like ramp on
//! the normalized distance from the added region's center.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{mean3, vec2, Vec3};
use crate::mesh::HeadMesh;
use crate::region::{Region, RegionMap};
use crate::similarity::WeightVector;

/// Constants of the transition weight function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TransitionWeightParams {
    pub a: f64,
    pub b: f64,
    pub x0: f64,
    pub p: f64,
}

impl Default for TransitionWeightParams {
    fn default() -> Self {
        TransitionWeightParams {
            a: 1.013,
            b: 1.019,
            x0: 0.264,
            p: 3.244,
        }
    }
}

impl TransitionWeightParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.x0 > 0.0 && self.p > 0.0) {
            return Err(Error::InvalidConfig(
                "transition weight x0 and p must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Unclamped transition weight `a - b / (1 + (delta/x0)^p)`.
///
/// With the default constants this is slightly below 0 at delta = 0 and
/// tops out slightly above 1, so [`twf`] clamps it into `[0, 1]` to keep
/// the blend convex.
pub fn twf_raw(delta: f64, params: &TransitionWeightParams) -> f64 {
    params.a - params.b / (1.0 + (delta / params.x0).powf(params.p))
}

/// Transition weight clamped to `[0, 1]`.
pub fn twf(delta: f64, params: &TransitionWeightParams) -> f64 {
    twf_raw(delta, params).clamp(0.0, 1.0)
}

/// Diagnostics of one attachment: the seam shift and the normalized
/// distance field the blend weights came from.
#[derive(Debug, Clone)]
pub struct SeamBlend {
    /// Mean base-minus-added offset over the seam overlap.
    pub shift: Vec3,
    /// Bounding extents (x, y) of the shifted added region.
    pub extents: (f64, f64),
    /// Normalized center distance for every added-region vertex, in
    /// `added_indices` order.
    pub distances: Vec<f64>,
    /// Mean of the shifted added-region vertices.
    pub region_mean: Vec3,
}

/// Per-vertex weighted combination of the selected database models.
/// Faces and UVs are copied from the first model.
pub fn combine_blendshape(models: &[HeadMesh], weights: &WeightVector) -> Result<HeadMesh> {
    if models.is_empty() || weights.weights.len() != models.len() {
        return Err(Error::InvalidMesh(format!(
            "{} weights for {} models",
            weights.weights.len(),
            models.len()
        )));
    }
    weights.validate().map_err(|e| Error::InvalidMesh(e.to_string()))?;
    for (i, m) in models.iter().enumerate() {
        if !m.same_topology(&models[0]) {
            return Err(Error::InvalidMesh(format!(
                "model {i} does not share the database topology"
            )));
        }
    }

    let n = models[0].vertex_count();
    let mut vertices = Vec::with_capacity(n);
    for v in 0..n {
        let mut acc: Option<Vec3> = None;
        for &i in &weights.support {
            let term = models[i].vertices[v] * weights.weights[i];
            acc = Some(match acc {
                None => term,
                Some(a) => a + term,
            });
        }
        vertices.push(acc.expect("support is never empty"));
    }
    Ok(HeadMesh {
        vertices,
        faces: models[0].faces.clone(),
        uvs: models[0].uvs.clone(),
    })
}

/// Attaches `added`'s region onto `base`.
///
/// The seam shift is the mean of `base - added` over the overlap of the two
/// index sets; half of it is applied to every added-region vertex. Each
/// added-region vertex is then blended between base and shifted-added by
/// the transition weight of its normalized (x, y) distance from the shifted
/// region's mean. Vertices outside `added_indices` are untouched.
pub fn attach_region(
    base: &HeadMesh,
    added: &HeadMesh,
    added_indices: &[u32],
    base_indices: &[u32],
    params: &TransitionWeightParams,
) -> Result<(HeadMesh, SeamBlend)> {
    params.validate()?;
    if !base.same_topology(added) {
        return Err(Error::InvalidMesh(
            "base and added meshes do not share topology".into(),
        ));
    }
    let overlap = RegionMap::overlap(added_indices, base_indices);
    if overlap.is_empty() {
        return Err(Error::Degenerate(
            "added and base regions share no vertices".into(),
        ));
    }

    let shift = mean3(
        overlap
            .iter()
            .map(|&i| base.vertices[i as usize] - added.vertices[i as usize]),
    );
    let half_shift = shift / 2.0;

    let shifted: Vec<Vec3> = added_indices
        .iter()
        .map(|&i| added.vertices[i as usize] + half_shift)
        .collect();

    let (mut min_x, mut max_x) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut min_y, mut max_y) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in &shifted {
        min_x = min_x.min(v.x);
        max_x = max_x.max(v.x);
        min_y = min_y.min(v.y);
        max_y = max_y.max(v.y);
    }
    let extent_x = max_x - min_x;
    let extent_y = max_y - min_y;
    if extent_x <= 1e-12 || extent_y <= 1e-12 {
        return Err(Error::Degenerate(format!(
            "added region has zero extent ({extent_x} x {extent_y})"
        )));
    }

    let region_mean = mean3(shifted.iter().copied());
    let distances: Vec<f64> = shifted
        .iter()
        .map(|v| {
            let d = vec2(
                (region_mean.x - v.x) / extent_x,
                (region_mean.y - v.y) / extent_y,
            );
            d.norm()
        })
        .collect();

    let mut out = base.clone();
    for ((&i, &a), &delta) in added_indices.iter().zip(&shifted).zip(&distances) {
        let t = twf(delta, params);
        let b = base.vertices[i as usize];
        // b + t*(a-b): identical inputs stay bit-identical.
        out.vertices[i as usize] = b + (a - b) * t;
    }
    Ok((
        out,
        SeamBlend {
            shift,
            extents: (extent_x, extent_y),
            distances,
            region_mean,
        },
    ))
}

/// Per-region model selections for one reconstruction.
#[derive(Debug, Clone)]
pub struct RegionSelection {
    pub eyes: WeightVector,
    pub nose: WeightVector,
    pub mouth: WeightVector,
    pub face: WeightVector,
}

impl RegionSelection {
    pub fn weights(&self, region: Region) -> &WeightVector {
        match region {
            Region::Eyes => &self.eyes,
            Region::Nose => &self.nose,
            Region::Mouth => &self.mouth,
            Region::Face => &self.face,
            Region::Unused => unreachable!("no selection for the unused region"),
        }
    }
}

/// Builds the full blended head: face blendshape as the base (which also
/// supplies the unused vertices), then nose, eyes, mouth attached in that
/// order. Eyes and mouth are disjoint, so their relative order cannot
/// matter; the nose goes first because it overlaps both.
pub fn build_blended_model(
    models: &[HeadMesh],
    selection: &RegionSelection,
    regions: &RegionMap,
    params: &TransitionWeightParams,
) -> Result<HeadMesh> {
    let mut base = combine_blendshape(models, &selection.face)?;
    let mut attached: BTreeSet<u32> = regions.face.iter().copied().collect();

    for region in [Region::Nose, Region::Eyes, Region::Mouth] {
        let shape = combine_blendshape(models, selection.weights(region))?;
        let base_indices: Vec<u32> = attached.iter().copied().collect();
        let added_indices = regions.indices(region);
        let (next, _) = attach_region(&base, &shape, added_indices, &base_indices, params)?;
        base = next;
        attached.extend(added_indices.iter().copied());
    }
    Ok(base)
}
