//! End-to-end orchestration: feature input, region selection, blending,
//! morphing and texturing, with a JSON report of what was selected and how
//! long each stage took.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use serde::Serialize;

use crate::blend::{build_blended_model, RegionSelection};
use crate::config::{DbConfig, PipelineConfig};
use crate::error::{Error, Result};
use crate::img::{resample_rect_gray, GrayImage, RgbImage};
use crate::landmark::LandmarkSet;
use crate::math::{vec2, ScaleOffset2, Vec2};
use crate::mesh::HeadMesh;
use crate::morph::morph;
use crate::region::{validate_database, LandmarkVertexMap, Region, RegionMap, ValidationReport};
use crate::render::{build_region_db, RenderedRegionDb};
use crate::similarity::{select_weights, Method, RegionMatcher, WeightVector};
use crate::synth::{ProbeFrame, SyntheticDb};
use crate::texture::{
    compose_texture, median_skin_color, pick_frames, shift_average_texture, warp_to_uv,
    FramePick, FrameSlot, TextureAtlas, UvLandmarks, WarpedFrame, ATLAS_SIZE,
};

/// A head database ready for fitting: meshes, region/landmark maps, UV
/// landmarks, the average texture and the render setup.
pub struct Database {
    pub model_ids: Vec<String>,
    pub meshes: Vec<HeadMesh>,
    pub regions: RegionMap,
    pub lmap: LandmarkVertexMap,
    pub uv_landmarks: UvLandmarks,
    pub average: RgbImage,
    pub config: DbConfig,
}

impl Database {
    pub fn len(&self) -> usize {
        self.meshes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.meshes.is_empty()
    }

    pub fn load(dir: impl AsRef<Path>) -> Result<Database> {
        let dir = dir.as_ref();
        let mesh_dir = dir.join("meshes");
        let mut ids: Vec<String> = std::fs::read_dir(&mesh_dir)
            .map_err(|e| Error::io(&mesh_dir, e))?
            .filter_map(|e| e.ok())
            .filter_map(|e| {
                let name = e.file_name().into_string().ok()?;
                name.strip_suffix(".obj").map(str::to_string)
            })
            .collect();
        ids.sort();
        if ids.is_empty() {
            return Err(Error::Database(format!(
                "no meshes found in {}",
                mesh_dir.display()
            )));
        }
        let meshes: Vec<HeadMesh> = ids
            .iter()
            .map(|id| crate::mesh::load_head_mesh(mesh_dir.join(format!("{id}.obj"))))
            .collect::<Result<_>>()?;
        Ok(Database {
            meshes,
            model_ids: ids,
            regions: RegionMap::load_json(dir.join("regions.json"))?,
            lmap: LandmarkVertexMap::load_json(dir.join("landmark_map.json"))?,
            uv_landmarks: UvLandmarks::load_json(dir.join("uv_landmarks.json"))?,
            average: RgbImage::load_png(dir.join("average_texture.png"))?,
            config: DbConfig::load_toml(dir.join("db_config.toml"))?,
        })
    }

    pub fn from_synthetic(db: SyntheticDb) -> Database {
        Database {
            model_ids: db.model_ids,
            meshes: db.meshes,
            regions: db.regions,
            lmap: db.lmap,
            uv_landmarks: db.uv_landmarks,
            average: db.average,
            config: db.config,
        }
    }

    pub fn validate(&self) -> ValidationReport {
        validate_database(&self.meshes, &self.regions, &self.lmap)
    }

    /// Renders the comparison regions for every model.
    pub fn render_regions(&self) -> Result<RenderedRegionDb> {
        build_region_db(
            &self.meshes,
            &self.model_ids,
            &self.config.render,
            &self.config.boxes,
            &self.config.sizes,
        )
    }

    /// Mean projected pixel position of each landmark vertex over the whole
    /// database; the anchor the input face is aligned against.
    fn mean_landmark_pixels(&self) -> Result<Vec<Vec2>> {
        let mut acc = vec![Vec2::ZERO; self.lmap.vertex_index.len()];
        for mesh in &self.meshes {
            for (a, &vi) in acc.iter_mut().zip(&self.lmap.vertex_index) {
                let px = self
                    .config
                    .render
                    .project(mesh.vertices[vi as usize])
                    .ok_or_else(|| Error::Render("landmark behind camera".into()))?;
                *a += px;
            }
        }
        let n = self.meshes.len() as f64;
        Ok(acc.into_iter().map(|p| p / n).collect())
    }
}

/// One input frame: the image plus its landmark file.
#[derive(Debug)]
pub struct InputFrame {
    pub id: String,
    pub image: RgbImage,
    pub landmarks: LandmarkSet,
}

#[derive(Debug)]
pub struct InputSet {
    pub frames: Vec<InputFrame>,
}

impl InputSet {
    /// Loads `*.png` frames and their landmark files, matched by stem.
    /// The two directories may be the same.
    pub fn load(frames_dir: impl AsRef<Path>, landmarks_dir: impl AsRef<Path>) -> Result<InputSet> {
        let frames_dir = frames_dir.as_ref();
        let landmarks_dir = landmarks_dir.as_ref();
        let mut stems: Vec<String> = std::fs::read_dir(frames_dir)
            .map_err(|e| Error::io(frames_dir, e).in_stage("feature input"))?
            .filter_map(|e| e.ok())
            .filter_map(|e| {
                let name = e.file_name().into_string().ok()?;
                name.strip_suffix(".png").map(str::to_string)
            })
            .collect();
        stems.sort();
        if stems.is_empty() {
            return Err(
                Error::Database(format!("no frames in {}", frames_dir.display()))
                    .in_stage("feature input"),
            );
        }
        let mut frames = Vec::with_capacity(stems.len());
        for stem in stems {
            let image = RgbImage::load_png(frames_dir.join(format!("{stem}.png")))
                .map_err(|e| e.in_stage("feature input"))?;
            let lm_path = landmarks_dir.join(format!("{stem}.json"));
            if !lm_path.exists() {
                return Err(Error::Database(format!(
                    "frame {stem} has no landmark file {}",
                    lm_path.display()
                ))
                .in_stage("feature input"));
            }
            let landmarks =
                LandmarkSet::load_json(&lm_path).map_err(|e| e.in_stage("feature input"))?;
            frames.push(InputFrame {
                id: stem,
                image,
                landmarks,
            });
        }
        Ok(InputSet { frames })
    }

    pub fn from_probes(probes: Vec<ProbeFrame>) -> InputSet {
        InputSet {
            frames: probes
                .into_iter()
                .map(|p| InputFrame {
                    id: p.id,
                    image: p.image,
                    landmarks: p.landmarks,
                })
                .collect(),
        }
    }

    /// The frontally best aligned frame: smallest overall rotation.
    pub fn frontal_index(&self) -> Result<usize> {
        if self.frames.is_empty() {
            return Err(Error::Database("input set has no frames".into()).in_stage("feature input"));
        }
        let score = |f: &InputFrame| {
            let r = &f.landmarks.rotation;
            r.yaw * r.yaw + r.pitch * r.pitch + r.roll * r.roll
        };
        Ok((0..self.frames.len())
            .min_by(|&a, &b| {
                score(&self.frames[a])
                    .partial_cmp(&score(&self.frames[b]))
                    .unwrap()
                    .then(a.cmp(&b))
            })
            .unwrap())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StageTiming {
    pub stage: String,
    pub ms: f64,
}

#[derive(Default)]
pub struct Stopwatch {
    timings: Vec<StageTiming>,
}

impl Stopwatch {
    pub fn time<T>(&mut self, stage: &str, f: impl FnOnce() -> Result<T>) -> Result<T> {
        let start = Instant::now();
        let out = f().map_err(|e| match e {
            e @ Error::Stage { .. } => e,
            other => other.in_stage(stage),
        })?;
        self.timings.push(StageTiming {
            stage: stage.to_string(),
            ms: start.elapsed().as_secs_f64() * 1e3,
        });
        Ok(out)
    }

    pub fn into_timings(self) -> Vec<StageTiming> {
        self.timings
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RegionReport {
    pub method: Method,
    pub errors: Vec<f64>,
    pub support: Vec<String>,
    pub weights: Vec<f64>,
    pub top: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct FitReport {
    pub frontal_frame: String,
    pub regions: BTreeMap<String, RegionReport>,
    pub timings_ms: Vec<StageTiming>,
}

#[derive(Debug)]
pub struct FitOutcome {
    pub mesh: HeadMesh,
    pub selection: RegionSelection,
    pub report: FitReport,
}

/// Crops the four comparison regions out of an input frame.
///
/// The database's template boxes are carried into the frame through the
/// similarity transform fitted between the database's mean projected
/// landmarks and the frame's detected landmarks, then resampled to the
/// comparison sizes and converted to grayscale.
fn crop_input_regions(
    db: &Database,
    frame: &InputFrame,
) -> Result<BTreeMap<Region, GrayImage>> {
    let mean_px = db.mean_landmark_pixels()?;
    let (w, h) = (frame.image.width(), frame.image.height());
    let pairs: Vec<(Vec2, Vec2)> = mean_px
        .iter()
        .zip(&frame.landmarks.points)
        .map(|(&m, &p)| (m, vec2(p.x * w as f64, p.y * h as f64)))
        .collect();
    let to_frame = ScaleOffset2::fit(&pairs)?;
    if to_frame.scale <= 0.0 {
        return Err(Error::Degenerate("landmark alignment flipped the face".into()));
    }

    let gray = frame.image.to_gray();
    let mut out = BTreeMap::new();
    for region in Region::ACTIVE {
        let r = db.config.boxes.rect(region);
        let corner = to_frame.apply(vec2(r.left as f64, r.top as f64));
        let size = vec2(r.width as f64, r.height as f64) * to_frame.scale;
        let [cw, ch] = db.config.sizes.size(region);
        out.insert(
            region,
            resample_rect_gray(&gray, corner.x, corner.y, size.x, size.y, cw, ch),
        );
    }
    Ok(out)
}

/// Region selection, blending and morphing against a rendered database.
pub fn fit(
    db: &Database,
    rendered: &RenderedRegionDb,
    cfg: &PipelineConfig,
    input: &InputSet,
) -> Result<FitOutcome> {
    cfg.validate()?;
    if rendered.len() != db.len() {
        return Err(Error::Database(format!(
            "rendered region db has {} models, database has {}",
            rendered.len(),
            db.len()
        )));
    }
    let mut watch = Stopwatch::default();

    let frontal = watch.time("feature input", || {
        let idx = input.frontal_index()?;
        Ok(idx)
    })?;
    let frame = &input.frames[frontal];

    let crops = watch.time("region crop", || crop_input_regions(db, frame))?;

    let mut weights: BTreeMap<Region, WeightVector> = BTreeMap::new();
    let mut region_reports = BTreeMap::new();
    watch.time("similarity", || {
        for region in Region::ACTIVE {
            let method = Method::for_region(region);
            let matcher = RegionMatcher::fit(
                method,
                rendered.images(region),
                cfg.pca.retained(),
                &cfg.lbp,
            )?;
            let errors = matcher.errors(&crops[&region])?;
            let w = select_weights(&errors, cfg.top_n)?;
            region_reports.insert(
                region.name().to_string(),
                RegionReport {
                    method,
                    errors: errors.errors.clone(),
                    support: w.support.iter().map(|&i| db.model_ids[i].clone()).collect(),
                    weights: w.weights.clone(),
                    top: db.model_ids[errors.argmin()].clone(),
                },
            );
            weights.insert(region, w);
        }
        Ok(())
    })?;

    let selection = RegionSelection {
        eyes: weights.remove(&Region::Eyes).unwrap(),
        nose: weights.remove(&Region::Nose).unwrap(),
        mouth: weights.remove(&Region::Mouth).unwrap(),
        face: weights.remove(&Region::Face).unwrap(),
    };

    let blended = watch.time("blend", || {
        build_blended_model(&db.meshes, &selection, &db.regions, &cfg.blend)
    })?;

    let morphed = watch.time("morph", || {
        morph(&blended, &frame.landmarks, &db.lmap, &cfg.morph)
    })?;

    Ok(FitOutcome {
        mesh: morphed,
        selection,
        report: FitReport {
            frontal_frame: frame.id.clone(),
            regions: region_reports,
            timings_ms: watch.into_timings(),
        },
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct TextureReport {
    pub center_frame: String,
    pub left_frame: Option<String>,
    pub right_frame: Option<String>,
    pub skin_tone: [f32; 3],
    pub timings_ms: Vec<StageTiming>,
}

pub struct TextureOutcome {
    pub atlas: TextureAtlas,
    pub report: TextureReport,
}

/// Full texture creation: frame picking, skin-tone shift, warps, composite.
pub fn texture(db: &Database, cfg: &PipelineConfig, input: &InputSet) -> Result<TextureOutcome> {
    cfg.validate()?;
    let mut watch = Stopwatch::default();

    let sets: Vec<LandmarkSet> = input.frames.iter().map(|f| f.landmarks.clone()).collect();
    let pick: FramePick = watch.time("frame pick", || pick_frames(&sets))?;

    let skin = watch.time("skin tone", || {
        let f = &input.frames[pick.center];
        median_skin_color(&f.image, &f.landmarks)
    })?;

    let base = watch.time("shift average", || {
        let shifted = shift_average_texture(&db.average, skin, &db.uv_landmarks.skin_polygon)?;
        // databases ship 2048x2048 textures; anything else (small test
        // databases) is scaled up so the output invariant holds
        if shifted.width() != ATLAS_SIZE || shifted.height() != ATLAS_SIZE {
            Ok(shifted.resize(ATLAS_SIZE, ATLAS_SIZE))
        } else {
            Ok(shifted)
        }
    })?;

    let partials = watch.time("warp", || {
        let mut out = Vec::new();
        let slots = [
            (pick.left, FrameSlot::Left),
            (Some(pick.center), FrameSlot::Center),
            (pick.right, FrameSlot::Right),
        ];
        for (idx, slot) in slots {
            let Some(idx) = idx else { continue };
            let f = &input.frames[idx];
            let (image, mask) = warp_to_uv(&f.image, &f.landmarks, &db.uv_landmarks, ATLAS_SIZE)?;
            out.push(WarpedFrame {
                image,
                mask,
                yaw: f.landmarks.rotation.yaw,
                slot,
            });
        }
        Ok(out)
    })?;

    let atlas = watch.time("compose", || {
        let (image, provenance) = compose_texture(&partials, &base, cfg.texture.feather)?;
        TextureAtlas::new(image, provenance)
    })?;

    let frame_id = |i: Option<usize>| i.map(|i| input.frames[i].id.clone());
    Ok(TextureOutcome {
        report: TextureReport {
            center_frame: input.frames[pick.center].id.clone(),
            left_frame: frame_id(pick.left),
            right_frame: frame_id(pick.right),
            skin_tone: skin,
            timings_ms: watch.into_timings(),
        },
        atlas,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct PipelineReport {
    pub fit: FitReport,
    pub texture: TextureReport,
    pub render_db_ms: Option<f64>,
    pub total_ms: f64,
}

pub struct RunOutcome {
    pub mesh: HeadMesh,
    pub atlas: TextureAtlas,
    pub report: PipelineReport,
}

/// `fit` + `texture` in one call. Renders the comparison database on demand
/// when `rendered` is `None`.
pub fn run(
    db: &Database,
    rendered: Option<&RenderedRegionDb>,
    cfg: &PipelineConfig,
    input: &InputSet,
) -> Result<RunOutcome> {
    let start = Instant::now();
    let mut render_db_ms = None;
    let built;
    let rendered = match rendered {
        Some(r) => r,
        None => {
            let t = Instant::now();
            built = db.render_regions().map_err(|e| e.in_stage("render db"))?;
            render_db_ms = Some(t.elapsed().as_secs_f64() * 1e3);
            &built
        }
    };
    let fit_out = fit(db, rendered, cfg, input)?;
    let tex_out = texture(db, cfg, input)?;
    Ok(RunOutcome {
        mesh: fit_out.mesh,
        atlas: tex_out.atlas,
        report: PipelineReport {
            fit: fit_out.report,
            texture: tex_out.report,
            render_db_ms,
            total_ms: start.elapsed().as_secs_f64() * 1e3,
        },
    })
}

/// Writes mesh/texture/report files, removing everything it already wrote
/// if any write fails.
pub struct OutputWriter {
    written: Vec<std::path::PathBuf>,
}

impl OutputWriter {
    pub fn new() -> OutputWriter {
        OutputWriter { written: Vec::new() }
    }

    pub fn write(
        &mut self,
        path: impl AsRef<Path>,
        f: impl FnOnce(&Path) -> Result<()>,
    ) -> Result<()> {
        let path = path.as_ref();
        match f(path) {
            Ok(()) => {
                self.written.push(path.to_path_buf());
                Ok(())
            }
            Err(e) => {
                for p in &self.written {
                    let _ = std::fs::remove_file(p);
                }
                self.written.clear();
                Err(e)
            }
        }
    }
}

impl Default for OutputWriter {
    fn default() -> Self {
        OutputWriter::new()
    }
}
