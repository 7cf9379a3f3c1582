//! Region index sets and the landmark-to-vertex mapping.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::HeadMesh;
use crate::LANDMARK_COUNT;

/// The five primary regions a head is split into. `Face` is the base the
/// other three get attached to; `Unused` is everything the pipeline never
/// touches (back of the head, neck rim).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Region {
    Eyes,
    Nose,
    Mouth,
    Face,
    Unused,
}

impl Region {
    pub const ACTIVE: [Region; 4] = [Region::Eyes, Region::Nose, Region::Mouth, Region::Face];
    pub const ALL: [Region; 5] = [
        Region::Eyes,
        Region::Nose,
        Region::Mouth,
        Region::Face,
        Region::Unused,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Region::Eyes => "eyes",
            Region::Nose => "nose",
            Region::Mouth => "mouth",
            Region::Face => "face",
            Region::Unused => "unused",
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Sorted vertex-index sets for the five regions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionMap {
    pub eyes: Vec<u32>,
    pub nose: Vec<u32>,
    pub mouth: Vec<u32>,
    pub face: Vec<u32>,
    pub unused: Vec<u32>,
}

impl RegionMap {
    pub fn indices(&self, region: Region) -> &[u32] {
        match region {
            Region::Eyes => &self.eyes,
            Region::Nose => &self.nose,
            Region::Mouth => &self.mouth,
            Region::Face => &self.face,
            Region::Unused => &self.unused,
        }
    }

    /// Indices present in both sets. Inputs are sorted, so this is a merge.
    pub fn overlap(a: &[u32], b: &[u32]) -> Vec<u32> {
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    out.push(a[i]);
                    i += 1;
                    j += 1;
                }
            }
        }
        out
    }

    pub fn union(sets: &[&[u32]]) -> Vec<u32> {
        let mut all: BTreeSet<u32> = BTreeSet::new();
        for s in sets {
            all.extend(s.iter().copied());
        }
        all.into_iter().collect()
    }

    /// Structural validation against a mesh with `vertex_count` vertices.
    pub fn validate(&self, vertex_count: usize) -> Result<()> {
        for region in Region::ALL {
            let set = self.indices(region);
            for w in set.windows(2) {
                if w[0] >= w[1] {
                    return Err(Error::InvalidRegionMap(format!(
                        "region {region} is not sorted/deduplicated"
                    )));
                }
            }
            if let Some(&last) = set.last() {
                if last as usize >= vertex_count {
                    return Err(Error::InvalidRegionMap(format!(
                        "region {region} references vertex {last}, mesh has {vertex_count}"
                    )));
                }
            }
        }

        let active = RegionMap::union(&[&self.eyes, &self.nose, &self.mouth, &self.face]);
        let covered = RegionMap::union(&[&active, &self.unused]);
        if covered.len() != vertex_count {
            return Err(Error::InvalidRegionMap(format!(
                "regions cover {} of {} vertices",
                covered.len(),
                vertex_count
            )));
        }
        if !RegionMap::overlap(&active, &self.unused).is_empty() {
            return Err(Error::InvalidRegionMap(
                "unused region overlaps an active region".into(),
            ));
        }
        if !RegionMap::overlap(&self.eyes, &self.mouth).is_empty() {
            return Err(Error::InvalidRegionMap(
                "eyes and mouth regions must not share vertices".into(),
            ));
        }
        // Each attached region needs a seam overlap with the regions it can
        // be attached over, otherwise mean-shift alignment is undefined.
        if RegionMap::overlap(&self.nose, &self.face).is_empty() {
            return Err(Error::InvalidRegionMap(
                "nose and face regions share no vertices".into(),
            ));
        }
        if RegionMap::overlap(&self.eyes, &self.nose).is_empty()
            && RegionMap::overlap(&self.eyes, &self.face).is_empty()
        {
            return Err(Error::InvalidRegionMap(
                "eyes region shares no vertices with nose or face".into(),
            ));
        }
        if RegionMap::overlap(&self.mouth, &self.nose).is_empty()
            && RegionMap::overlap(&self.mouth, &self.face).is_empty()
        {
            return Err(Error::InvalidRegionMap(
                "mouth region shares no vertices with nose or face".into(),
            ));
        }
        Ok(())
    }

    pub fn load_json(path: impl AsRef<Path>) -> Result<RegionMap> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Json {
            path: path.to_path_buf(),
            source: e,
        })
    }

    pub fn save_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string(self).expect("region map serializes");
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}

/// Which mesh vertex each of the 68 feature points lives on, plus the
/// per-feature drop-off `sigma` used by the morph weight function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LandmarkVertexMap {
    pub vertex_index: Vec<u32>,
    pub sigma: Vec<f64>,
}

impl LandmarkVertexMap {
    pub fn validate(&self, vertex_count: usize) -> Result<()> {
        if self.vertex_index.len() != LANDMARK_COUNT || self.sigma.len() != LANDMARK_COUNT {
            return Err(Error::InvalidLandmarks(format!(
                "landmark map needs {LANDMARK_COUNT} entries, got {} indices / {} sigmas",
                self.vertex_index.len(),
                self.sigma.len()
            )));
        }
        let mut seen = BTreeSet::new();
        for &v in &self.vertex_index {
            if v as usize >= vertex_count {
                return Err(Error::InvalidLandmarks(format!(
                    "landmark vertex {v} out of range (mesh has {vertex_count})"
                )));
            }
            if !seen.insert(v) {
                return Err(Error::InvalidLandmarks(format!(
                    "landmark vertex {v} mapped twice"
                )));
            }
        }
        if self.sigma.iter().any(|&s| !(s > 0.0)) {
            return Err(Error::InvalidLandmarks("sigma values must be > 0".into()));
        }
        Ok(())
    }

    pub fn load_json(path: impl AsRef<Path>) -> Result<LandmarkVertexMap> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Json {
            path: path.to_path_buf(),
            source: e,
        })
    }

    pub fn save_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string(self).expect("landmark map serializes");
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Per-check outcome of database validation. Failures are reported, not
/// raised, so callers can show everything that is wrong at once.
#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<ValidationCheck>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(
                f,
                "[{}] {}: {}",
                if c.passed { "pass" } else { "FAIL" },
                c.name,
                c.detail
            )?;
        }
        Ok(())
    }
}

/// Confirms a database is internally consistent: shared topology, shared UV
/// table, all region and landmark indices valid.
pub fn validate_database(
    meshes: &[HeadMesh],
    regions: &RegionMap,
    lmap: &LandmarkVertexMap,
) -> ValidationReport {
    let mut checks = Vec::new();
    let mut push = |name: &str, passed: bool, detail: String| {
        checks.push(ValidationCheck {
            name: name.to_string(),
            passed,
            detail,
        });
    };

    if meshes.is_empty() {
        push("nonempty", false, "database has no meshes".into());
        return ValidationReport { checks };
    }
    push("nonempty", true, format!("{} meshes", meshes.len()));

    let vc = meshes[0].vertex_count();
    match meshes
        .iter()
        .enumerate()
        .find(|(_, m)| m.vertex_count() != vc)
    {
        Some((i, m)) => push(
            "vertex count",
            false,
            format!("mesh {i} has {} vertices, expected {vc}", m.vertex_count()),
        ),
        None => push("vertex count", true, format!("all meshes have {vc} vertices")),
    }

    match meshes.iter().enumerate().find(|(_, m)| m.faces != meshes[0].faces) {
        Some((i, _)) => push("face topology", false, format!("mesh {i} differs from mesh 0")),
        None => push(
            "face topology",
            true,
            format!("shared list of {} quads", meshes[0].faces.len()),
        ),
    }

    match meshes.iter().enumerate().find(|(_, m)| m.uvs != meshes[0].uvs) {
        Some((i, _)) => push("uv table", false, format!("mesh {i} differs from mesh 0")),
        None => push("uv table", true, "shared UV table".into()),
    }

    match meshes
        .iter()
        .enumerate()
        .find_map(|(i, m)| m.validate().err().map(|e| (i, e)))
    {
        Some((i, e)) => push("mesh invariants", false, format!("mesh {i}: {e}")),
        None => push("mesh invariants", true, "all meshes structurally valid".into()),
    }

    match regions.validate(vc) {
        Ok(()) => push("region map", true, "cover and overlap constraints hold".into()),
        Err(e) => push("region map", false, e.to_string()),
    }

    match lmap.validate(vc) {
        Ok(()) => push("landmark map", true, format!("{LANDMARK_COUNT} distinct vertices")),
        Err(e) => push("landmark map", false, e.to_string()),
    }

    ValidationReport { checks }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::{vec2, vec3};

    fn tiny_mesh(extra_vertex: bool) -> HeadMesh {
        let mut vertices = vec![
            vec3(0.0, 0.0, 0.0),
            vec3(1.0, 0.0, 0.0),
            vec3(1.0, 1.0, 0.0),
            vec3(0.0, 1.0, 0.0),
            vec3(0.0, 2.0, 0.0),
            vec3(1.0, 2.0, 0.0),
        ];
        if extra_vertex {
            vertices.push(vec3(2.0, 2.0, 0.0));
        }
        let n = vertices.len();
        HeadMesh {
            uvs: (0..n).map(|i| vec2(i as f64 / n as f64, 0.5)).collect(),
            faces: vec![[0, 1, 2, 3], [3, 2, 5, 4]],
            vertices,
        }
    }

    fn tiny_regions() -> RegionMap {
        RegionMap {
            eyes: vec![0, 1],
            nose: vec![1, 2, 3],
            mouth: vec![3, 4],
            face: vec![0, 1, 2, 3, 4],
            unused: vec![5],
        }
    }

    fn tiny_lmap(n: usize) -> LandmarkVertexMap {
        // Not 68 entries; only used to exercise failure paths.
        LandmarkVertexMap {
            vertex_index: (0..n as u32).collect(),
            sigma: vec![1.0; n],
        }
    }

    #[test]
    fn region_map_json_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("regions.json");
        let map = tiny_regions();
        map.save_json(&path).unwrap();
        assert_eq!(RegionMap::load_json(&path).unwrap(), map);
    }

    #[test]
    fn region_validation_accepts_consistent_map() {
        tiny_regions().validate(6).unwrap();
    }

    #[test]
    fn eyes_mouth_overlap_is_rejected() {
        let mut map = tiny_regions();
        map.mouth = vec![0, 3, 4];
        let err = map.validate(6).unwrap_err();
        assert!(err.to_string().contains("eyes and mouth"));
    }

    #[test]
    fn incomplete_cover_is_rejected() {
        let mut map = tiny_regions();
        map.unused = vec![];
        assert!(map.validate(6).is_err());
    }

    #[test]
    fn validate_database_passes_on_identical_topology() {
        let meshes = vec![tiny_mesh(false), tiny_mesh(false)];
        let report = validate_database(&meshes, &tiny_regions(), &tiny_lmap(6));
        // landmark map check fails (not 68 entries) but the topology checks pass
        assert!(report.checks.iter().any(|c| c.name == "vertex count" && c.passed));
        assert!(report.checks.iter().any(|c| c.name == "uv table" && c.passed));
    }

    #[test]
    fn extra_vertex_names_the_offender() {
        let meshes = vec![tiny_mesh(false), tiny_mesh(true)];
        let report = validate_database(&meshes, &tiny_regions(), &tiny_lmap(6));
        let check = report.checks.iter().find(|c| c.name == "vertex count").unwrap();
        assert!(!check.passed);
        assert!(check.detail.contains("mesh 1"));
    }

    #[test]
    fn landmark_index_at_vertex_count_fails_range_check() {
        let mut lmap = LandmarkVertexMap {
            vertex_index: (0..LANDMARK_COUNT as u32).collect(),
            sigma: vec![1.0; LANDMARK_COUNT],
        };
        lmap.vertex_index[10] = 100; // == vertex count below
        let err = lmap.validate(100).unwrap_err();
        assert!(err.to_string().contains("out of range"));
    }
}
