//! Software rasterizer for the region comparison renders.
//!
//! Heads are rendered untextured, in frontal orientation, under a fixed rig
//! of directional lights; the shading alone is the signal the similarity
//! measures compare. Quads are split into two triangles for rasterization
//! only — mesh topology is never altered.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::img::GrayImage;
use crate::math::{vec2, vec3, Vec2, Vec3};
use crate::mesh::HeadMesh;
use crate::par;
use crate::region::Region;

/// Directional light. `direction` is the propagation direction (pointing
/// from the source toward the head center) and must be unit length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Light {
    pub direction: Vec3,
    pub intensity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RenderConfig {
    /// Square output size in pixels.
    pub image_size: usize,
    /// Vertical field of view, degrees.
    pub fov_deg: f64,
    /// Camera sits on +Z at this distance from the origin, looking at it.
    pub camera_distance: f64,
    pub lights: Vec<Light>,
    pub albedo: f64,
}

impl Default for RenderConfig {
    fn default() -> Self {
        let s60 = 60f64.to_radians().sin();
        let c60 = 60f64.to_radians().cos();
        let s45 = 45f64.to_radians().sin();
        let c45 = 45f64.to_radians().cos();
        RenderConfig {
            image_size: 512,
            // Long lens: near-orthographic framing keeps landmark projection
            // consistent with the frontal-aligned model space.
            fov_deg: 7.0,
            camera_distance: 25.0,
            lights: vec![
                Light {
                    direction: vec3(0.0, 0.0, -1.0),
                    intensity: 0.55,
                },
                Light {
                    direction: vec3(s60, 0.0, -c60),
                    intensity: 0.16,
                },
                Light {
                    direction: vec3(-s60, 0.0, -c60),
                    intensity: 0.16,
                },
                Light {
                    direction: vec3(0.0, -s45, -c45),
                    intensity: 0.22,
                },
                Light {
                    direction: vec3(0.0, s45, -c45),
                    intensity: 0.10,
                },
            ],
            albedo: 1.0,
        }
    }
}

impl RenderConfig {
    pub fn validate(&self) -> Result<()> {
        if self.image_size == 0 {
            return Err(Error::InvalidConfig("image_size must be positive".into()));
        }
        if !(0.0 < self.fov_deg && self.fov_deg < 120.0) {
            return Err(Error::InvalidConfig(format!(
                "fov {} outside (0, 120)",
                self.fov_deg
            )));
        }
        if self.camera_distance <= 0.0 {
            return Err(Error::InvalidConfig("camera distance must be positive".into()));
        }
        for (i, l) in self.lights.iter().enumerate() {
            if (l.direction.norm() - 1.0).abs() > 1e-6 {
                return Err(Error::InvalidConfig(format!(
                    "light {i} direction is not unit length"
                )));
            }
            if l.intensity < 0.0 {
                return Err(Error::InvalidConfig(format!("light {i} intensity < 0")));
            }
        }
        Ok(())
    }

    /// Projects a model-space point to continuous pixel coordinates
    /// (origin at the image's top-left corner, pixel centers at `i + 0.5`).
    /// `None` when the point is at or behind the camera plane.
    pub fn project(&self, p: Vec3) -> Option<Vec2> {
        let depth = self.camera_distance - p.z;
        if depth <= 1e-9 {
            return None;
        }
        let f = (self.fov_deg.to_radians() / 2.0).tan();
        let ndc_x = p.x / (depth * f);
        let ndc_y = p.y / (depth * f);
        let half = self.image_size as f64 / 2.0;
        Some(vec2((ndc_x + 1.0) * half, (1.0 - ndc_y) * half))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PixelRect {
    pub left: u32,
    pub top: u32,
    pub width: u32,
    pub height: u32,
}

/// Crop rectangles for the four comparison regions, in render pixels.
/// Fixed per database; the renders are pre-aligned so template boxes apply
/// to every model.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionBoxes {
    pub eyes: PixelRect,
    pub nose: PixelRect,
    pub mouth: PixelRect,
    pub face: PixelRect,
}

impl RegionBoxes {
    pub fn rect(&self, region: Region) -> PixelRect {
        match region {
            Region::Eyes => self.eyes,
            Region::Nose => self.nose,
            Region::Mouth => self.mouth,
            Region::Face => self.face,
            Region::Unused => unreachable!("no comparison box for the unused region"),
        }
    }
}

/// Pixel resolution each region is compared at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct RegionSizes {
    pub eyes: [usize; 2],
    pub nose: [usize; 2],
    pub mouth: [usize; 2],
    pub face: [usize; 2],
}

impl Default for RegionSizes {
    fn default() -> Self {
        RegionSizes {
            eyes: [128, 48],
            nose: [64, 96],
            mouth: [96, 48],
            face: [128, 128],
        }
    }
}

impl RegionSizes {
    pub fn size(&self, region: Region) -> [usize; 2] {
        match region {
            Region::Eyes => self.eyes,
            Region::Nose => self.nose,
            Region::Mouth => self.mouth,
            Region::Face => self.face,
            Region::Unused => unreachable!("no comparison size for the unused region"),
        }
    }
}

/// Area-weighted smooth vertex normals from the quad faces.
pub fn vertex_normals(mesh: &HeadMesh) -> Vec<Vec3> {
    let mut normals = vec![Vec3::ZERO; mesh.vertices.len()];
    for face in &mesh.faces {
        for tri in [[face[0], face[1], face[2]], [face[0], face[2], face[3]]] {
            let a = mesh.vertices[tri[0] as usize];
            let b = mesh.vertices[tri[1] as usize];
            let c = mesh.vertices[tri[2] as usize];
            let n = (b - a).cross(c - a); // length = 2x area
            for &vi in &tri {
                normals[vi as usize] += n;
            }
        }
    }
    normals.into_iter().map(Vec3::normalized).collect()
}

/// Rotates a mesh about the vertical axis; positive angles turn the head's
/// left side toward the camera.
pub fn rotate_y(mesh: &HeadMesh, degrees: f64) -> HeadMesh {
    let (s, c) = degrees.to_radians().sin_cos();
    HeadMesh {
        vertices: mesh
            .vertices
            .iter()
            .map(|v| vec3(c * v.x + s * v.z, v.y, -s * v.x + c * v.z))
            .collect(),
        faces: mesh.faces.clone(),
        uvs: mesh.uvs.clone(),
    }
}

struct ProjectedVertex {
    pixel: Vec2,
    inv_depth: f64,
    normal_over_depth: Vec3,
    visible: bool,
}

/// Lambertian-shaded frontal render.
///
/// Per pixel: `clamp(sum_l intensity_l * max(0, n . to_light_l) * albedo)`,
/// background 0, nearest surface wins via a depth buffer. Normals are
/// smooth vertex normals, perspective-correct interpolated.
pub fn render_frontal(mesh: &HeadMesh, cfg: &RenderConfig) -> Result<GrayImage> {
    cfg.validate()?;
    mesh.validate()?;
    let size = cfg.image_size;
    let normals = vertex_normals(mesh);

    let projected: Vec<ProjectedVertex> = mesh
        .vertices
        .iter()
        .zip(&normals)
        .map(|(&v, &n)| {
            let depth = cfg.camera_distance - v.z;
            match cfg.project(v) {
                Some(pixel) => ProjectedVertex {
                    pixel,
                    inv_depth: 1.0 / depth,
                    normal_over_depth: n / depth,
                    visible: true,
                },
                None => ProjectedVertex {
                    pixel: Vec2::ZERO,
                    inv_depth: 0.0,
                    normal_over_depth: Vec3::ZERO,
                    visible: false,
                },
            }
        })
        .collect();

    if !mesh.vertices.is_empty() && projected.iter().all(|p| !p.visible) {
        return Err(Error::Render("mesh is entirely behind the camera".into()));
    }

    let mut triangles: Vec<[u32; 3]> = Vec::with_capacity(mesh.faces.len() * 2);
    for face in &mesh.faces {
        triangles.push([face[0], face[1], face[2]]);
        triangles.push([face[0], face[2], face[3]]);
    }

    // (depth, shade) per pixel. Rasterized triangle-major inside disjoint
    // row bands so parallel output matches the sequential order exactly.
    let mut buf: Vec<[f32; 2]> = vec![[f32::INFINITY, 0.0]; size * size];
    let band_rows = 32usize;
    par::for_each_chunk_mut(&mut buf, band_rows * size, |band_idx, band| {
        let y0 = band_idx * band_rows;
        let y1 = y0 + band.len() / size;
        for tri in &triangles {
            raster_triangle(tri, &projected, cfg, size, y0, y1, band);
        }
    });

    Ok(GrayImage::from_raw(size, size, buf.iter().map(|p| p[1]).collect()).unwrap())
}

fn raster_triangle(
    tri: &[u32; 3],
    projected: &[ProjectedVertex],
    cfg: &RenderConfig,
    size: usize,
    band_y0: usize,
    band_y1: usize,
    band: &mut [[f32; 2]],
) {
    let [i0, i1, i2] = [tri[0] as usize, tri[1] as usize, tri[2] as usize];
    let (v0, v1, v2) = (&projected[i0], &projected[i1], &projected[i2]);
    if !(v0.visible && v1.visible && v2.visible) {
        return;
    }
    let (p0, p1, p2) = (v0.pixel, v1.pixel, v2.pixel);
    let area = (p1 - p0).cross(p2 - p0);
    if area.abs() < 1e-12 {
        return;
    }

    let min_x = p0.x.min(p1.x).min(p2.x).floor().max(0.0) as usize;
    let max_x = (p0.x.max(p1.x).max(p2.x).ceil().max(0.0) as usize).min(size);
    let min_y = p0.y.min(p1.y).min(p2.y).floor().max(0.0) as usize;
    let max_y = (p0.y.max(p1.y).max(p2.y).ceil().max(0.0) as usize).min(size);
    let y_lo = min_y.max(band_y0);
    let y_hi = max_y.min(band_y1);

    let inv_area = 1.0 / area;
    for y in y_lo..y_hi {
        let row = (y - band_y0) * size;
        let py = y as f64 + 0.5;
        for x in min_x..max_x {
            let p = vec2(x as f64 + 0.5, py);
            let mut l0 = (p1 - p).cross(p2 - p) * inv_area;
            let mut l1 = (p2 - p).cross(p0 - p) * inv_area;
            let mut l2 = (p0 - p).cross(p1 - p) * inv_area;
            // allow either winding
            if l0 < 0.0 || l1 < 0.0 || l2 < 0.0 {
                if l0 > 0.0 || l1 > 0.0 || l2 > 0.0 {
                    continue;
                }
                l0 = -l0;
                l1 = -l1;
                l2 = -l2;
            }
            let inv_depth = l0 * v0.inv_depth + l1 * v1.inv_depth + l2 * v2.inv_depth;
            if inv_depth <= 0.0 {
                continue;
            }
            let depth = (1.0 / inv_depth) as f32;
            let px = &mut band[row + x];
            if depth < px[0] {
                let n = (v0.normal_over_depth * l0
                    + v1.normal_over_depth * l1
                    + v2.normal_over_depth * l2)
                    .normalized();
                px[0] = depth;
                px[1] = shade(n, cfg);
            }
        }
    }
}

fn shade(normal: Vec3, cfg: &RenderConfig) -> f32 {
    let mut sum = 0.0;
    for light in &cfg.lights {
        // direction points source -> head, so the to-light vector is its negation
        sum += light.intensity * normal.dot(-light.direction).max(0.0);
    }
    (sum * cfg.albedo).clamp(0.0, 1.0) as f32
}

/// Cuts the four region rectangles out of a render. Pure crop: pixel values
/// are copied verbatim at the box offset.
pub fn crop_regions(image: &GrayImage, boxes: &RegionBoxes) -> Result<BTreeMap<Region, GrayImage>> {
    let mut out = BTreeMap::new();
    for region in Region::ACTIVE {
        let r = boxes.rect(region);
        let crop = image
            .crop(r.left as usize, r.top as usize, r.width as usize, r.height as usize)
            .map_err(|e| Error::Render(format!("{region} box: {e}")))?;
        out.insert(region, crop);
    }
    Ok(out)
}

/// Rendered comparison regions for every model, in database order.
#[derive(Debug, Clone)]
pub struct RenderedRegionDb {
    pub model_ids: Vec<String>,
    pub eyes: Vec<GrayImage>,
    pub nose: Vec<GrayImage>,
    pub mouth: Vec<GrayImage>,
    pub face: Vec<GrayImage>,
}

impl RenderedRegionDb {
    pub fn len(&self) -> usize {
        self.model_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.model_ids.is_empty()
    }

    pub fn images(&self, region: Region) -> &[GrayImage] {
        match region {
            Region::Eyes => &self.eyes,
            Region::Nose => &self.nose,
            Region::Mouth => &self.mouth,
            Region::Face => &self.face,
            Region::Unused => unreachable!("unused region is never rendered"),
        }
    }

    /// Writes `<model_id>_<region>.png` for every model and region.
    pub fn save_dir(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for (i, id) in self.model_ids.iter().enumerate() {
            for region in Region::ACTIVE {
                let path = dir.join(format!("{id}_{region}.png"));
                self.images(region)[i].save_png(&path)?;
            }
        }
        Ok(())
    }

    /// Loads a directory written by [`RenderedRegionDb::save_dir`]; model
    /// order is the sorted order of the ids found on disk.
    pub fn load_dir(dir: impl AsRef<Path>) -> Result<RenderedRegionDb> {
        let dir = dir.as_ref();
        let mut ids: Vec<String> = std::fs::read_dir(dir)
            .map_err(|e| Error::io(dir, e))?
            .filter_map(|e| e.ok())
            .filter_map(|e| {
                let name = e.file_name().into_string().ok()?;
                name.strip_suffix("_face.png").map(str::to_string)
            })
            .collect();
        ids.sort();
        if ids.is_empty() {
            return Err(Error::Database(format!(
                "no rendered regions found in {}",
                dir.display()
            )));
        }
        let mut db = RenderedRegionDb {
            model_ids: ids,
            eyes: Vec::new(),
            nose: Vec::new(),
            mouth: Vec::new(),
            face: Vec::new(),
        };
        for i in 0..db.model_ids.len() {
            let id = db.model_ids[i].clone();
            for region in Region::ACTIVE {
                let img = GrayImage::load_png(dir.join(format!("{id}_{region}.png")))?;
                match region {
                    Region::Eyes => db.eyes.push(img),
                    Region::Nose => db.nose.push(img),
                    Region::Mouth => db.mouth.push(img),
                    Region::Face => db.face.push(img),
                    Region::Unused => unreachable!(),
                }
            }
        }
        Ok(db)
    }
}

/// Renders every model once, crops the four regions and resizes each crop
/// to its comparison resolution. Model order is preserved no matter how the
/// work is scheduled.
pub fn build_region_db(
    meshes: &[HeadMesh],
    model_ids: &[String],
    cfg: &RenderConfig,
    boxes: &RegionBoxes,
    sizes: &RegionSizes,
) -> Result<RenderedRegionDb> {
    if meshes.len() != model_ids.len() {
        return Err(Error::Database(format!(
            "{} meshes but {} model ids",
            meshes.len(),
            model_ids.len()
        )));
    }
    let per_model: Vec<Result<Vec<GrayImage>>> = par::map_slice(meshes, |mesh| {
        let render = render_frontal(mesh, cfg)?;
        let crops = crop_regions(&render, boxes)?;
        let mut out = Vec::with_capacity(4);
        for region in Region::ACTIVE {
            let [w, h] = sizes.size(region);
            out.push(crops[&region].resize(w, h));
        }
        Ok(out)
    });

    let mut db = RenderedRegionDb {
        model_ids: model_ids.to_vec(),
        eyes: Vec::with_capacity(meshes.len()),
        nose: Vec::with_capacity(meshes.len()),
        mouth: Vec::with_capacity(meshes.len()),
        face: Vec::with_capacity(meshes.len()),
    };
    for item in per_model {
        let mut images = item?;
        db.face.push(images.pop().unwrap());
        db.mouth.push(images.pop().unwrap());
        db.nose.push(images.pop().unwrap());
        db.eyes.push(images.pop().unwrap());
    }
    Ok(db)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::{vec2, vec3};

    fn camera_facing_quad(z: f64, half: f64) -> HeadMesh {
        HeadMesh {
            vertices: vec![
                vec3(-half, -half, z),
                vec3(half, -half, z),
                vec3(half, half, z),
                vec3(-half, half, z),
            ],
            faces: vec![[0, 1, 2, 3]],
            uvs: vec![vec2(0.0, 0.0), vec2(1.0, 0.0), vec2(1.0, 1.0), vec2(0.0, 1.0)],
        }
    }

    fn single_light_cfg() -> RenderConfig {
        RenderConfig {
            image_size: 64,
            fov_deg: 60.0,
            camera_distance: 3.0,
            lights: vec![Light {
                direction: vec3(0.0, 0.0, -1.0),
                intensity: 1.0,
            }],
            albedo: 1.0,
        }
    }

    #[test]
    fn frontal_quad_fully_lit() {
        let img = render_frontal(&camera_facing_quad(0.0, 1.0), &single_light_cfg()).unwrap();
        assert_eq!(img.get(32, 32), 1.0);
    }

    #[test]
    fn back_facing_quad_renders_black() {
        let mesh = rotate_y(&camera_facing_quad(0.0, 1.0), 180.0);
        let img = render_frontal(&mesh, &single_light_cfg()).unwrap();
        assert_eq!(img.get(32, 32), 0.0);
    }

    #[test]
    fn nearer_quad_wins_depth_test() {
        // Far quad fully lit; near quad sheared so its shading differs.
        let far = camera_facing_quad(-0.5, 1.0);
        let mut near = camera_facing_quad(0.5, 0.4);
        for v in near.vertices.iter_mut() {
            v.z += 0.4 * v.x;
        }
        let mut mesh = far.clone();
        let base = mesh.vertices.len() as u32;
        mesh.vertices.extend(near.vertices.iter().copied());
        mesh.uvs.extend(near.uvs.iter().copied());
        mesh.faces.push([base, base + 1, base + 2, base + 3]);

        let img = render_frontal(&mesh, &single_light_cfg()).unwrap();
        let near_only = render_frontal(&near, &single_light_cfg()).unwrap();
        assert!(near_only.get(32, 32) < 0.999);
        assert_eq!(img.get(32, 32), near_only.get(32, 32));
    }

    #[test]
    fn mesh_behind_camera_errors() {
        let mesh = camera_facing_quad(10.0, 1.0); // camera at z=3
        assert!(matches!(
            render_frontal(&mesh, &single_light_cfg()),
            Err(Error::Render(_))
        ));
    }

    #[test]
    fn light_additivity_before_clamp() {
        let mesh = camera_facing_quad(0.0, 1.0);
        let mk = |lights: Vec<Light>| RenderConfig {
            lights,
            ..single_light_cfg()
        };
        let a = Light {
            direction: vec3(0.0, 0.0, -1.0),
            intensity: 0.3,
        };
        let b = Light {
            direction: vec3(0.6, 0.0, -0.8),
            intensity: 0.4,
        };
        let img_a = render_frontal(&mesh, &mk(vec![a])).unwrap();
        let img_b = render_frontal(&mesh, &mk(vec![b])).unwrap();
        let img_ab = render_frontal(&mesh, &mk(vec![a, b])).unwrap();
        for i in 0..img_a.pixels().len() {
            let sum = img_a.pixels()[i] + img_b.pixels()[i];
            assert!((sum - img_ab.pixels()[i]).abs() < 1e-6);
        }
    }

    #[test]
    fn translation_shifts_image_in_orthographic_limit() {
        let cfg = RenderConfig {
            image_size: 128,
            fov_deg: 2.0,
            camera_distance: 60.0,
            ..single_light_cfg()
        };
        let mesh = camera_facing_quad(0.0, 0.5);
        let mut moved = mesh.clone();
        let dx = 0.3;
        for v in moved.vertices.iter_mut() {
            v.x += dx;
        }
        let img_a = render_frontal(&mesh, &cfg).unwrap();
        let img_b = render_frontal(&moved, &cfg).unwrap();

        let centroid_x = |img: &GrayImage| {
            let (mut sx, mut n) = (0.0f64, 0.0f64);
            for y in 0..img.height() {
                for x in 0..img.width() {
                    let v = img.get(x, y) as f64;
                    sx += x as f64 * v;
                    n += v;
                }
            }
            sx / n
        };
        let f = (cfg.fov_deg.to_radians() / 2.0).tan();
        let expected_px = dx / (cfg.camera_distance * f) * cfg.image_size as f64 / 2.0;
        let shift = centroid_x(&img_b) - centroid_x(&img_a);
        assert!(
            (shift - expected_px).abs() < 1.0,
            "shift {shift} vs expected {expected_px}"
        );
    }

    #[test]
    fn crop_regions_copies_source_pixels() {
        let img = GrayImage::from_fn(64, 64, |x, y| ((x * 7 + y * 13) % 64) as f32 / 64.0);
        let boxes = RegionBoxes {
            eyes: PixelRect { left: 4, top: 8, width: 16, height: 8 },
            nose: PixelRect { left: 24, top: 16, width: 8, height: 12 },
            mouth: PixelRect { left: 20, top: 40, width: 12, height: 6 },
            face: PixelRect { left: 0, top: 0, width: 64, height: 64 },
        };
        let crops = crop_regions(&img, &boxes).unwrap();
        assert_eq!(crops[&Region::Face], img);
        let eyes = &crops[&Region::Eyes];
        for y in 0..8 {
            for x in 0..16 {
                assert_eq!(eyes.get(x, y), img.get(x + 4, y + 8));
            }
        }
    }

    #[test]
    fn single_pixel_box() {
        let img = GrayImage::from_fn(8, 8, |x, y| (x + y) as f32 / 16.0);
        let r = PixelRect { left: 3, top: 5, width: 1, height: 1 };
        let boxes = RegionBoxes { eyes: r, nose: r, mouth: r, face: r };
        let crops = crop_regions(&img, &boxes).unwrap();
        assert_eq!(crops[&Region::Eyes].get(0, 0), img.get(3, 5));
    }

    #[test]
    fn out_of_bounds_box_errors() {
        let img = GrayImage::new(32, 32);
        let r = PixelRect { left: 30, top: 0, width: 4, height: 4 };
        let boxes = RegionBoxes { eyes: r, nose: r, mouth: r, face: r };
        assert!(crop_regions(&img, &boxes).is_err());
    }

    #[test]
    fn region_db_cardinality_and_determinism() {
        let meshes = vec![camera_facing_quad(0.0, 1.0), camera_facing_quad(0.1, 1.0)];
        let ids = vec!["m0".to_string(), "m1".to_string()];
        let cfg = single_light_cfg();
        let r = PixelRect { left: 8, top: 8, width: 32, height: 24 };
        let boxes = RegionBoxes { eyes: r, nose: r, mouth: r, face: r };
        let sizes = RegionSizes::default();
        let db1 = build_region_db(&meshes, &ids, &cfg, &boxes, &sizes).unwrap();
        let db2 = build_region_db(&meshes, &ids, &cfg, &boxes, &sizes).unwrap();
        assert_eq!(db1.len(), 2);
        assert_eq!(db1.eyes[0].width(), 128);
        assert_eq!(db1.eyes[0].height(), 48);
        for region in Region::ACTIVE {
            for i in 0..db1.len() {
                assert_eq!(db1.images(region)[i], db2.images(region)[i]);
            }
        }
    }

    #[test]
    fn identical_meshes_render_identically() {
        let meshes = vec![camera_facing_quad(0.0, 1.0), camera_facing_quad(0.0, 1.0)];
        let ids = vec!["a".to_string(), "b".to_string()];
        let r = PixelRect { left: 0, top: 0, width: 64, height: 64 };
        let boxes = RegionBoxes { eyes: r, nose: r, mouth: r, face: r };
        let db = build_region_db(&meshes, &ids, &single_light_cfg(), &boxes, &RegionSizes::default())
            .unwrap();
        assert_eq!(db.face[0], db.face[1]);
    }

    #[test]
    fn region_db_round_trips_through_dir() {
        let meshes = vec![camera_facing_quad(0.0, 1.0)];
        let ids = vec!["head_000".to_string()];
        let r = PixelRect { left: 0, top: 0, width: 64, height: 64 };
        let boxes = RegionBoxes { eyes: r, nose: r, mouth: r, face: r };
        let db = build_region_db(&meshes, &ids, &single_light_cfg(), &boxes, &RegionSizes::default())
            .unwrap();
        let dir = tempfile::tempdir().unwrap();
        db.save_dir(dir.path()).unwrap();
        let back = RenderedRegionDb::load_dir(dir.path()).unwrap();
        assert_eq!(back.model_ids, db.model_ids);
        // 8-bit quantization on disk
        for (a, b) in db.face[0].pixels().iter().zip(back.face[0].pixels()) {
            assert!((a - b).abs() < 0.5 / 255.0);
        }
    }
}
