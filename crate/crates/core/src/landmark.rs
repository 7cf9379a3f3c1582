//! Per-frame 68-point landmark sets.
//!
//! One JSON file per frame:
//!
//! ```json
//! {"frame_id": "f012", "yaw": -2.5, "pitch": 0.4, "roll": 1.1,
//!  "points": [[0.31, 0.42], ...]}
//! ```
//!
//! Points are normalized to `[0,1]^2` in the full frame, image convention
//! (x right, y down). Rotations are degrees; yaw 0 is frontal.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{vec2, Vec2};
use crate::LANDMARK_COUNT;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Rotation {
    pub yaw: f64,
    pub pitch: f64,
    pub roll: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LandmarkSet {
    pub frame_id: String,
    pub rotation: Rotation,
    pub points: Vec<Vec2>,
}

#[derive(Serialize, Deserialize)]
struct LandmarkFile {
    frame_id: String,
    yaw: f64,
    pitch: f64,
    roll: f64,
    points: Vec<[f64; 2]>,
}

impl LandmarkSet {
    pub fn new(frame_id: impl Into<String>, rotation: Rotation, points: Vec<Vec2>) -> Result<Self> {
        let set = LandmarkSet {
            frame_id: frame_id.into(),
            rotation,
            points,
        };
        set.validate()?;
        Ok(set)
    }

    pub fn validate(&self) -> Result<()> {
        if self.points.len() != LANDMARK_COUNT {
            return Err(Error::InvalidLandmarks(format!(
                "frame {}: expected {LANDMARK_COUNT} points, got {}",
                self.frame_id,
                self.points.len()
            )));
        }
        for (i, p) in self.points.iter().enumerate() {
            if !(0.0..=1.0).contains(&p.x) || !(0.0..=1.0).contains(&p.y) {
                return Err(Error::InvalidLandmarks(format!(
                    "frame {}: point {i} = ({}, {}) outside [0,1]^2",
                    self.frame_id, p.x, p.y
                )));
            }
        }
        Ok(())
    }

    pub fn load_json(path: impl AsRef<Path>) -> Result<LandmarkSet> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let raw: LandmarkFile = serde_json::from_str(&text).map_err(|e| Error::Json {
            path: path.to_path_buf(),
            source: e,
        })?;
        let set = LandmarkSet {
            frame_id: raw.frame_id,
            rotation: Rotation {
                yaw: raw.yaw,
                pitch: raw.pitch,
                roll: raw.roll,
            },
            points: raw.points.iter().map(|p| vec2(p[0], p[1])).collect(),
        };
        set.validate()?;
        Ok(set)
    }

    pub fn save_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        self.validate()?;
        let raw = LandmarkFile {
            frame_id: self.frame_id.clone(),
            yaw: self.rotation.yaw,
            pitch: self.rotation.pitch,
            roll: self.rotation.roll,
            points: self.points.iter().map(|p| [p.x, p.y]).collect(),
        };
        let text = serde_json::to_string(&raw).expect("landmark set serializes");
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    /// Loads every `*.json` in a directory, sorted by file stem.
    pub fn load_dir(dir: impl AsRef<Path>) -> Result<Vec<LandmarkSet>> {
        let dir = dir.as_ref();
        let mut paths: Vec<_> = std::fs::read_dir(dir)
            .map_err(|e| Error::io(dir, e))?
            .filter_map(|e| e.ok())
            .map(|e| e.path())
            .filter(|p| p.extension().is_some_and(|e| e == "json"))
            .collect();
        paths.sort();
        paths.iter().map(LandmarkSet::load_json).collect()
    }
}
