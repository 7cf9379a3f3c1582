//! Deterministic synthetic head database.
//!
//! Stands in for a real scan collection: a closed all-quad sphere-like
//! template (latitude rings plus two pole caps, 2402 vertices / 2400 quads
//! at the default resolution) deformed per head by bounded shape
//! coefficients, with procedural skin textures painted in the shared UV
//! space. Everything is a pure function of `(seed, head index)`, so a
//! database regenerates byte-identically.
//!
//! The UV seam and both poles sit at the back of the head, inside the
//! unused region, where neither rendering nor texturing ever looks.

use std::f64::consts::{PI, TAU};
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::DbConfig;
use crate::error::{Error, Result};
use crate::img::{GrayImage, RgbImage};
use crate::landmark::{LandmarkSet, Rotation};
use crate::math::{vec2, vec3, Vec2};
use crate::mesh::HeadMesh;
use crate::region::{LandmarkVertexMap, RegionMap};
use crate::render::{self, PixelRect, RegionBoxes, RenderConfig, RegionSizes};
use crate::texture::UvLandmarks;
use crate::LANDMARK_COUNT;

/// Bounded shape coefficients of one synthetic head. All ranges are chosen
/// so the displacement field stays well below the base radius and the mesh
/// cannot self-intersect.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticHeadParams {
    pub head_width: f64,
    pub head_height: f64,
    pub head_depth: f64,
    pub nose_length: f64,
    pub nose_width: f64,
    pub eye_spacing: f64,
    pub eye_size: f64,
    pub mouth_width: f64,
    pub mouth_thickness: f64,
    pub jaw_taper: f64,
}

impl Default for SyntheticHeadParams {
    fn default() -> Self {
        SyntheticHeadParams {
            head_width: 1.0,
            head_height: 1.0,
            head_depth: 1.0,
            nose_length: 0.11,
            nose_width: 1.0,
            eye_spacing: 0.125 * PI,
            eye_size: 0.038,
            mouth_width: 1.0,
            mouth_thickness: 0.035,
            jaw_taper: 0.14,
        }
    }
}

impl SyntheticHeadParams {
    pub fn sample(rng: &mut impl Rng) -> SyntheticHeadParams {
        SyntheticHeadParams {
            head_width: rng.random_range(0.88..1.12),
            head_height: rng.random_range(0.88..1.12),
            head_depth: rng.random_range(0.90..1.10),
            nose_length: rng.random_range(0.06..0.16),
            nose_width: rng.random_range(0.75..1.30),
            eye_spacing: rng.random_range(0.105..0.145) * PI,
            eye_size: rng.random_range(0.020..0.055),
            mouth_width: rng.random_range(0.75..1.30),
            mouth_thickness: rng.random_range(0.020..0.050),
            jaw_taper: rng.random_range(0.0..0.28),
        }
    }
}

/// Per-head RNG stream, independent of the database size.
fn head_rng(seed: u64, index: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ (index as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

/// Shared grid layout: `rings` latitude rows of `cols` columns, wrapped in
/// longitude, plus two pole vertices closed by quad fans.
#[derive(Debug, Clone)]
pub struct HeadTemplate {
    pub rings: usize,
    pub cols: usize,
}

impl Default for HeadTemplate {
    fn default() -> Self {
        HeadTemplate { rings: 40, cols: 60 }
    }
}

impl HeadTemplate {
    pub fn new(rings: usize, cols: usize) -> Result<HeadTemplate> {
        if rings < 8 || cols < 12 || cols % 2 != 0 {
            return Err(Error::InvalidConfig(
                "template needs rings >= 8 and an even cols >= 12".into(),
            ));
        }
        Ok(HeadTemplate { rings, cols })
    }

    pub fn vertex_count(&self) -> usize {
        self.rings * self.cols + 2
    }

    fn top_pole(&self) -> u32 {
        0
    }

    fn bottom_pole(&self) -> u32 {
        (self.rings * self.cols + 1) as u32
    }

    fn grid_index(&self, ring: usize, col: usize) -> u32 {
        (1 + ring * self.cols + col % self.cols) as u32
    }

    /// Longitude/latitude of a vertex. The face center is at `phi = PI`;
    /// `phi = 0` is the back seam. Poles are `theta = 0` and `theta = PI`.
    pub fn angles(&self, vertex: u32) -> (f64, f64) {
        if vertex == self.top_pole() {
            return (PI, 0.0);
        }
        if vertex == self.bottom_pole() {
            return (PI, PI);
        }
        let i = vertex as usize - 1;
        let ring = i / self.cols;
        let col = i % self.cols;
        (
            TAU * col as f64 / self.cols as f64,
            PI * (ring + 1) as f64 / (self.rings + 1) as f64,
        )
    }

    pub fn faces(&self) -> Vec<[u32; 4]> {
        let mut faces = Vec::with_capacity((self.rings - 1) * self.cols + self.cols);
        // top cap: fans of quads spanning two ring edges each
        for i in 0..self.cols / 2 {
            faces.push([
                self.top_pole(),
                self.grid_index(0, 2 * i),
                self.grid_index(0, 2 * i + 1),
                self.grid_index(0, 2 * i + 2),
            ]);
        }
        for ring in 0..self.rings - 1 {
            for col in 0..self.cols {
                faces.push([
                    self.grid_index(ring, col),
                    self.grid_index(ring + 1, col),
                    self.grid_index(ring + 1, col + 1),
                    self.grid_index(ring, col + 1),
                ]);
            }
        }
        for i in 0..self.cols / 2 {
            faces.push([
                self.bottom_pole(),
                self.grid_index(self.rings - 1, 2 * i + 2),
                self.grid_index(self.rings - 1, 2 * i + 1),
                self.grid_index(self.rings - 1, 2 * i),
            ]);
        }
        faces
    }

    /// Shared UV table: longitude maps to u (seam at the back), latitude to
    /// v with the top pole at v = 1.
    pub fn uvs(&self) -> Vec<Vec2> {
        let mut uvs = Vec::with_capacity(self.vertex_count());
        for v in 0..self.vertex_count() as u32 {
            if v == self.top_pole() {
                uvs.push(vec2(0.5, 1.0));
            } else if v == self.bottom_pole() {
                uvs.push(vec2(0.5, 0.0));
            } else {
                let (phi, theta) = self.angles(v);
                uvs.push(vec2(phi / TAU, 1.0 - theta / PI));
            }
        }
        uvs
    }

    /// Head surface for one set of shape coefficients.
    pub fn mesh(&self, params: &SyntheticHeadParams) -> HeadMesh {
        let rx = 0.70 * params.head_width;
        let ry = 0.90 * params.head_height;
        let rz = 0.78 * params.head_depth;
        let mut vertices = Vec::with_capacity(self.vertex_count());
        for v in 0..self.vertex_count() as u32 {
            let (phi, theta) = self.angles(v);
            let d = displacement(phi, theta, params);
            let taper = 1.0 - params.jaw_taper * smoothstep((theta - 0.60 * PI) / (0.25 * PI));
            let radial = 1.0 + d;
            vertices.push(vec3(
                -rx * theta.sin() * phi.sin() * radial * taper,
                ry * theta.cos() * radial,
                -rz * theta.sin() * phi.cos() * radial,
            ));
        }
        HeadMesh {
            vertices,
            faces: self.faces(),
            uvs: self.uvs(),
        }
    }

    /// Landmark-to-vertex mapping: the 68 standard anchors in longitude /
    /// latitude, snapped to distinct grid vertices. Shared by the whole
    /// database, like the topology itself.
    pub fn landmark_map(&self) -> LandmarkVertexMap {
        let anchors = landmark_anchors();
        let mut used = vec![false; self.vertex_count()];
        // poles are never landmarks
        used[self.top_pole() as usize] = true;
        used[self.bottom_pole() as usize] = true;

        let mut vertex_index = Vec::with_capacity(LANDMARK_COUNT);
        for &(phi, theta) in &anchors {
            let mut best = None;
            let mut best_d = f64::INFINITY;
            for v in 1..(self.vertex_count() as u32 - 1) {
                if used[v as usize] {
                    continue;
                }
                let (vp, vt) = self.angles(v);
                let mut dphi = (vp - phi).abs();
                if dphi > PI {
                    dphi = TAU - dphi;
                }
                let d = (dphi * 0.65).powi(2) + (vt - theta).powi(2);
                if d < best_d {
                    best_d = d;
                    best = Some(v);
                }
            }
            let v = best.expect("grid has enough free vertices");
            used[v as usize] = true;
            vertex_index.push(v);
        }

        let mut sigma = Vec::with_capacity(LANDMARK_COUNT);
        for i in 0..LANDMARK_COUNT {
            sigma.push(match i {
                0..=16 => 2.0,  // jawline
                17..=26 => 1.2, // brows
                27..=35 => 0.8, // nose
                36..=47 => 0.5, // eyes
                _ => 0.6,       // mouth
            });
        }
        LandmarkVertexMap { vertex_index, sigma }
    }

    /// The five region index sets as elliptical masks in angle space.
    pub fn region_map(&self) -> RegionMap {
        let in_ellipse = |phi: f64, theta: f64, c: (f64, f64), half: (f64, f64)| {
            let mut dphi = (phi - c.0).abs();
            if dphi > PI {
                dphi = TAU - dphi;
            }
            let a = dphi / half.0;
            let b = (theta - c.1) / half.1;
            a * a + b * b <= 1.0
        };

        let mut eyes = Vec::new();
        let mut nose = Vec::new();
        let mut mouth = Vec::new();
        let mut face = Vec::new();
        let mut unused = Vec::new();
        for v in 0..self.vertex_count() as u32 {
            let (phi, theta) = self.angles(v);
            let in_eyes = in_ellipse(phi, theta, (PI - 0.125 * PI, 0.44 * PI), (0.095 * PI, 0.075 * PI))
                || in_ellipse(phi, theta, (PI + 0.125 * PI, 0.44 * PI), (0.095 * PI, 0.075 * PI));
            let in_nose = in_ellipse(phi, theta, (PI, 0.52 * PI), (0.085 * PI, 0.12 * PI));
            let in_mouth = in_ellipse(phi, theta, (PI, 0.675 * PI), (0.11 * PI, 0.065 * PI));
            let in_face = in_ellipse(phi, theta, (PI, 0.52 * PI), (0.45 * PI, 0.40 * PI));
            if in_eyes {
                eyes.push(v);
            }
            if in_nose {
                nose.push(v);
            }
            if in_mouth {
                mouth.push(v);
            }
            if in_face {
                face.push(v);
            }
            if !(in_eyes || in_nose || in_mouth || in_face) {
                unused.push(v);
            }
        }
        RegionMap {
            eyes,
            nose,
            mouth,
            face,
            unused,
        }
    }

    /// UV-space landmark positions, border anchors and the skin reference
    /// polygon, all derived from the landmark vertices' shared UVs.
    pub fn uv_landmarks(&self, lmap: &LandmarkVertexMap) -> UvLandmarks {
        let uvs = self.uvs();
        let points: Vec<Vec2> = lmap
            .vertex_index
            .iter()
            .map(|&v| uvs[v as usize])
            .collect();

        let (mut lo, mut hi) = (vec2(1.0, 1.0), vec2(0.0, 0.0));
        for p in &points {
            lo.x = lo.x.min(p.x);
            lo.y = lo.y.min(p.y);
            hi.x = hi.x.max(p.x);
            hi.y = hi.y.max(p.y);
        }
        let center = (lo + hi) / 2.0;
        let half = (hi - lo) / 2.0;
        let expand = 1.45;
        let clamp01 = |p: Vec2| vec2(p.x.clamp(0.02, 0.98), p.y.clamp(0.02, 0.98));
        let corner = |sx: f64, sy: f64| {
            clamp01(vec2(
                center.x + sx * half.x * expand,
                center.y + sy * half.y * expand,
            ))
        };
        let border = vec![
            corner(-1.0, -1.0),
            corner(0.0, -1.2),
            corner(1.0, -1.0),
            corner(1.2, 0.0),
            corner(1.0, 1.0),
            corner(0.0, 1.2),
            corner(-1.0, 1.0),
            corner(-1.2, 0.0),
        ];

        // Skin reference: the cheeks-and-forehead quad between the outer
        // eye corners and the mouth corners.
        let cheek_l = (points[36] + points[48]) / 2.0;
        let cheek_r = (points[45] + points[54]) / 2.0;
        let forehead_l = points[17] + vec2(0.0, 0.05);
        let forehead_r = points[26] + vec2(0.0, 0.05);
        let skin_polygon = vec![
            clamp01(cheek_l),
            clamp01(forehead_l),
            clamp01(forehead_r),
            clamp01(cheek_r),
        ];
        UvLandmarks {
            points,
            border,
            skin_polygon,
        }
    }
}

fn smoothstep(t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    t * t * (3.0 - 2.0 * t)
}

/// Angular bump: gaussian in wrapped longitude / latitude offsets.
fn bump(phi: f64, theta: f64, center: (f64, f64), width: (f64, f64)) -> f64 {
    let mut dphi = (phi - center.0).abs();
    if dphi > PI {
        dphi = TAU - dphi;
    }
    let a = dphi / width.0;
    let b = (theta - center.1) / width.1;
    (-(a * a + b * b)).exp()
}

/// Radial displacement field of the facial features.
fn displacement(phi: f64, theta: f64, p: &SyntheticHeadParams) -> f64 {
    let mut d = 0.0;
    // nose: vertically elongated ridge plus a wider base
    d += p.nose_length * bump(phi, theta, (PI, 0.54 * PI), (0.055 * PI * p.nose_width, 0.075 * PI));
    d += 0.3 * p.nose_length * bump(phi, theta, (PI, 0.575 * PI), (0.09 * PI * p.nose_width, 0.04 * PI));
    // brow ridge
    d += 0.035 * bump(phi, theta, (PI, 0.40 * PI), (0.16 * PI, 0.035 * PI));
    // eye sockets: a dent with a small central bulge per side
    for side in [-1.0, 1.0] {
        let c = (PI + side * p.eye_spacing, 0.44 * PI);
        d -= p.eye_size * bump(phi, theta, c, (0.05 * PI, 0.035 * PI));
        d += 0.5 * p.eye_size * bump(phi, theta, c, (0.02 * PI, 0.015 * PI));
    }
    // lips: two stacked ridges with a groove between
    let mw = 0.085 * PI * p.mouth_width;
    d += p.mouth_thickness * bump(phi, theta, (PI, 0.655 * PI), (mw, 0.022 * PI));
    d += 0.8 * p.mouth_thickness * bump(phi, theta, (PI, 0.695 * PI), (mw * 0.95, 0.020 * PI));
    d -= 0.4 * p.mouth_thickness * bump(phi, theta, (PI, 0.675 * PI), (mw * 0.9, 0.012 * PI));
    // chin
    d += 0.03 * bump(phi, theta, (PI, 0.80 * PI), (0.06 * PI, 0.05 * PI));
    d
}

/// The 68 standard landmark anchors in (longitude, latitude).
fn landmark_anchors() -> Vec<(f64, f64)> {
    let mut a = Vec::with_capacity(LANDMARK_COUNT);
    // jawline, left ear over the chin to the right ear
    for i in 0..17 {
        let u = PI * i as f64 / 16.0 - PI / 2.0;
        a.push((PI + 0.40 * PI * u.sin(), 0.48 * PI + 0.34 * PI * u.cos()));
    }
    // brows
    for i in 0..5 {
        a.push((PI - 0.21 * PI + 0.04 * PI * i as f64, 0.385 * PI));
    }
    for i in 0..5 {
        a.push((PI + 0.05 * PI + 0.04 * PI * i as f64, 0.385 * PI));
    }
    // nose bridge and base
    for i in 0..4 {
        a.push((PI, 0.44 * PI + 0.035 * PI * i as f64));
    }
    for i in 0..5 {
        a.push((PI + (i as f64 - 2.0) * 0.03 * PI, 0.575 * PI));
    }
    // eyes: hexagons starting at the outer corner
    for side in [-1.0f64, 1.0] {
        let cx = PI + side * 0.125 * PI;
        for k in 0..6 {
            let t = TAU * k as f64 / 6.0;
            a.push((cx + side * 0.045 * PI * -t.cos(), 0.44 * PI - 0.022 * PI * t.sin()));
        }
    }
    // outer lip ring (left corner, over the top, right corner, under)
    for k in 0..12 {
        let t = PI - TAU * k as f64 / 12.0;
        a.push((PI + 0.08 * PI * t.cos(), 0.675 * PI - 0.028 * PI * t.sin()));
    }
    // inner lip ring
    for k in 0..8 {
        let t = PI - TAU * k as f64 / 8.0;
        a.push((PI + 0.05 * PI * t.cos(), 0.675 * PI - 0.012 * PI * t.sin()));
    }
    debug_assert_eq!(a.len(), LANDMARK_COUNT);
    a
}

// ---------------------------------------------------------------------------
// Procedural textures
// ---------------------------------------------------------------------------

fn hash2(x: i64, y: i64, seed: u64) -> f64 {
    let mut h = seed
        ^ (x as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15)
        ^ (y as u64).wrapping_mul(0xc2b2_ae3d_27d4_eb4f);
    h ^= h >> 30;
    h = h.wrapping_mul(0xbf58_476d_1ce4_e5b9);
    h ^= h >> 27;
    h = h.wrapping_mul(0x94d0_49bb_1331_11eb);
    h ^= h >> 31;
    (h >> 11) as f64 / (1u64 << 53) as f64
}

/// Smoothed lattice value noise in [0, 1].
fn value_noise(x: f64, y: f64, cell: f64, seed: u64) -> f64 {
    let gx = x / cell;
    let gy = y / cell;
    let x0 = gx.floor();
    let y0 = gy.floor();
    let fx = smoothstep(gx - x0);
    let fy = smoothstep(gy - y0);
    let (x0, y0) = (x0 as i64, y0 as i64);
    let v00 = hash2(x0, y0, seed);
    let v10 = hash2(x0 + 1, y0, seed);
    let v01 = hash2(x0, y0 + 1, seed);
    let v11 = hash2(x0 + 1, y0 + 1, seed);
    (v00 * (1.0 - fx) + v10 * fx) * (1.0 - fy) + (v01 * (1.0 - fx) + v11 * fx) * fy
}

/// Accumulates gaussian stamps into a low-res mask (values clamped later).
struct StampMask {
    res: usize,
    data: Vec<f32>,
}

impl StampMask {
    fn new(res: usize) -> StampMask {
        StampMask {
            res,
            data: vec![0.0; res * res],
        }
    }

    fn stamp(&mut self, uv: Vec2, sigma_uv: f64, amplitude: f64) {
        let cx = uv.x * self.res as f64;
        let cy = (1.0 - uv.y) * self.res as f64;
        let sigma = sigma_uv * self.res as f64;
        let r = (3.0 * sigma).ceil() as i64;
        let (icx, icy) = (cx as i64, cy as i64);
        for y in (icy - r).max(0)..(icy + r + 1).min(self.res as i64) {
            for x in (icx - r).max(0)..(icx + r + 1).min(self.res as i64) {
                let dx = (x as f64 + 0.5 - cx) / sigma;
                let dy = (y as f64 + 0.5 - cy) / sigma;
                self.data[y as usize * self.res + x as usize] +=
                    (amplitude * (-(dx * dx + dy * dy) / 2.0).exp()) as f32;
            }
        }
    }

    fn sample(&self, u: f64, v_down: f64) -> f64 {
        let x = (u * self.res as f64 - 0.5).clamp(0.0, (self.res - 1) as f64);
        let y = (v_down * self.res as f64 - 0.5).clamp(0.0, (self.res - 1) as f64);
        let (x0, y0) = (x.floor() as usize, y.floor() as usize);
        let (x1, y1) = ((x0 + 1).min(self.res - 1), (y0 + 1).min(self.res - 1));
        let (fx, fy) = (x - x0 as f64, y - y0 as f64);
        let at = |x: usize, y: usize| self.data[y * self.res + x] as f64;
        (at(x0, y0) * (1.0 - fx) + at(x1, y0) * fx) * (1.0 - fy)
            + (at(x0, y1) * (1.0 - fx) + at(x1, y1) * fx) * fy
    }
}

/// Procedural skin texture for one head, painted in UV space: a per-head
/// skin tone with soft noise, plus darker eye/brow/nostril patches and
/// reddened lips aligned with the UV landmarks.
pub fn head_texture(seed: u64, index: usize, uv: &UvLandmarks, size: usize) -> RgbImage {
    let mut rng = head_rng(seed, index);
    // burn the shape draws so texture variation is independent
    let _ = SyntheticHeadParams::sample(&mut rng);
    let base_r: f64 = rng.random_range(0.62..0.80);
    let base_g = base_r * rng.random_range(0.72..0.80);
    let base_b = base_g * rng.random_range(0.70..0.80);
    let noise_seed: u64 = rng.random();

    let mask_res = (size / 4).clamp(64, 512);
    let mut dark = StampMask::new(mask_res);
    let mut lips = StampMask::new(mask_res);

    let eye_center = |range: std::ops::Range<usize>| {
        let mut c = Vec2::ZERO;
        for i in range.clone() {
            c += uv.points[i];
        }
        c / range.len() as f64
    };
    for range in [36..42, 42..48] {
        let c = eye_center(range);
        dark.stamp(c, 0.030, 0.25); // socket shading
        dark.stamp(c, 0.012, 0.65); // iris
    }
    for i in 17..27 {
        dark.stamp(uv.points[i], 0.012, 0.5); // brows
    }
    for i in 31..36 {
        dark.stamp(uv.points[i], 0.008, 0.4); // nostril line
    }
    for i in 48..60 {
        lips.stamp(uv.points[i], 0.015, 0.8);
    }

    let lip_color = [0.62f64, 0.33, 0.30];
    RgbImage::from_fn(size, size, |x, y| {
        let u = (x as f64 + 0.5) / size as f64;
        let v_down = (y as f64 + 0.5) / size as f64;
        let px = x as f64;
        let py = y as f64;
        let n = 0.025 * (value_noise(px, py, size as f64 / 32.0, noise_seed) - 0.5)
            + 0.012 * (value_noise(px, py, size as f64 / 128.0, noise_seed ^ 0xabcd) - 0.5)
            + 0.006 * (value_noise(px, py, size as f64 / 512.0, noise_seed ^ 0x1234) - 0.5);
        let grad = 0.04 * (0.5 - v_down);
        let tone = 1.0 + n + grad;
        let d = dark.sample(u, v_down).min(1.0);
        let l = (lips.sample(u, v_down) * 0.75).min(1.0);
        let mut c = [base_r * tone, base_g * tone, base_b * tone];
        for ch in 0..3 {
            c[ch] *= 1.0 - 0.55 * d;
            c[ch] = c[ch] * (1.0 - l) + lip_color[ch] * l;
        }
        [
            c[0].clamp(0.0, 1.0) as f32,
            c[1].clamp(0.0, 1.0) as f32,
            c[2].clamp(0.0, 1.0) as f32,
        ]
    })
}

/// Pixelwise mean of all head textures, computed streaming.
pub fn average_texture(seed: u64, count: usize, uv: &UvLandmarks, size: usize) -> RgbImage {
    let mut acc = vec![[0.0f64; 3]; size * size];
    for index in 0..count {
        let tex = head_texture(seed, index, uv, size);
        for (a, p) in acc.iter_mut().zip(tex.pixels()) {
            a[0] += p[0] as f64;
            a[1] += p[1] as f64;
            a[2] += p[2] as f64;
        }
    }
    let n = count as f64;
    let mut out = RgbImage::new(size, size);
    for (o, a) in out.pixels_mut().iter_mut().zip(&acc) {
        *o = [(a[0] / n) as f32, (a[1] / n) as f32, (a[2] / n) as f32];
    }
    out
}

// ---------------------------------------------------------------------------
// Database assembly
// ---------------------------------------------------------------------------

/// Comparison boxes derived from the template head's projected landmarks.
pub fn default_boxes(template: &HeadTemplate, cfg: &RenderConfig) -> Result<RegionBoxes> {
    let mesh = template.mesh(&SyntheticHeadParams::default());
    let lmap = template.landmark_map();
    let project = |i: usize| -> Result<Vec2> {
        cfg.project(mesh.vertices[lmap.vertex_index[i] as usize])
            .ok_or_else(|| Error::Render("template landmark behind camera".into()))
    };
    let group = |range: std::ops::Range<usize>| -> Result<Vec<Vec2>> {
        range.map(project).collect()
    };

    let eyes: Vec<Vec2> = [group(17..27)?, group(36..48)?].concat();
    let nose = group(27..36)?;
    let mouth = group(48..68)?;
    let face = group(0..LANDMARK_COUNT)?;

    Ok(RegionBoxes {
        eyes: fit_box(&eyes, 1.30, (8, 3), cfg.image_size)?,
        nose: fit_box(&nose, 1.45, (2, 3), cfg.image_size)?,
        mouth: fit_box(&mouth, 1.35, (2, 1), cfg.image_size)?,
        face: fit_box(&face, 1.10, (1, 1), cfg.image_size)?,
    })
}

/// Smallest aspect-ratio-true rectangle covering the padded point bounds.
fn fit_box(points: &[Vec2], pad: f64, aspect: (u32, u32), image_size: usize) -> Result<PixelRect> {
    let (mut lo, mut hi) = (vec2(f64::INFINITY, f64::INFINITY), vec2(0.0, 0.0));
    for p in points {
        lo.x = lo.x.min(p.x);
        lo.y = lo.y.min(p.y);
        hi.x = hi.x.max(p.x);
        hi.y = hi.y.max(p.y);
    }
    let center = (lo + hi) / 2.0;
    let (aw, ah) = (aspect.0 as f64, aspect.1 as f64);
    let mut w = (hi.x - lo.x) * pad;
    let mut h = (hi.y - lo.y) * pad;
    if w / h > aw / ah {
        h = w * ah / aw;
    } else {
        w = h * aw / ah;
    }
    let left = (center.x - w / 2.0).round().max(0.0) as u32;
    let top = (center.y - h / 2.0).round().max(0.0) as u32;
    let width = (w.round() as u32).max(2);
    let height = (h.round() as u32).max(2);
    if (left + width) as usize > image_size || (top + height) as usize > image_size {
        return Err(Error::Render(format!(
            "region box {width}x{height}+{left}+{top} exceeds the {image_size}px render"
        )));
    }
    Ok(PixelRect {
        left,
        top,
        width,
        height,
    })
}

/// A fully assembled in-memory database.
pub struct SyntheticDb {
    pub model_ids: Vec<String>,
    pub meshes: Vec<HeadMesh>,
    pub regions: RegionMap,
    pub lmap: LandmarkVertexMap,
    pub uv_landmarks: UvLandmarks,
    pub average: RgbImage,
    pub config: DbConfig,
    pub seed: u64,
}

pub fn model_id(index: usize) -> String {
    format!("head_{index:03}")
}

/// Generates `count` heads. `texture_size` controls both the per-head
/// textures and the average (2048 for real use, smaller in tests).
pub fn generate(seed: u64, count: usize, texture_size: usize) -> Result<SyntheticDb> {
    if count < 2 {
        return Err(Error::Database("a database needs at least 2 heads".into()));
    }
    let template = HeadTemplate::default();
    let lmap = template.landmark_map();
    let uv_landmarks = template.uv_landmarks(&lmap);

    let meshes: Vec<HeadMesh> = (0..count)
        .map(|i| {
            let params = SyntheticHeadParams::sample(&mut head_rng(seed, i));
            template.mesh(&params)
        })
        .collect();

    let render = RenderConfig::default();
    let config = DbConfig {
        boxes: default_boxes(&template, &render)?,
        sizes: RegionSizes::default(),
        render,
    };
    let average = average_texture(seed, count, &uv_landmarks, texture_size);

    Ok(SyntheticDb {
        model_ids: (0..count).map(model_id).collect(),
        meshes,
        regions: template.region_map(),
        lmap,
        uv_landmarks,
        average,
        config,
        seed,
    })
}

/// Writes a generated database to a directory:
///
/// ```text
/// DIR/
///   db_config.toml      render setup, region boxes, comparison sizes
///   regions.json        region index sets
///   landmark_map.json   landmark-to-vertex mapping + sigmas
///   uv_landmarks.json   UV landmark positions, border anchors, skin polygon
///   average_texture.png
///   meshes/head_XXX.obj
///   textures/head_XXX.png
/// ```
pub fn write_to_dir(db: &SyntheticDb, dir: impl AsRef<Path>, texture_size: usize) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir.join("meshes")).map_err(|e| Error::io(dir, e))?;
    std::fs::create_dir_all(dir.join("textures")).map_err(|e| Error::io(dir, e))?;

    db.config.save_toml(dir.join("db_config.toml"))?;
    db.regions.save_json(dir.join("regions.json"))?;
    db.lmap.save_json(dir.join("landmark_map.json"))?;
    db.uv_landmarks.save_json(dir.join("uv_landmarks.json"))?;
    db.average.save_png(dir.join("average_texture.png"))?;
    for (i, (id, mesh)) in db.model_ids.iter().zip(&db.meshes).enumerate() {
        crate::mesh::save_head_mesh(mesh, dir.join("meshes").join(format!("{id}.obj")))?;
        let tex = head_texture(db.seed, i, &db.uv_landmarks, texture_size);
        tex.save_png(dir.join("textures").join(format!("{id}.png")))?;
    }
    Ok(())
}

/// `generate` + `write_to_dir`.
pub fn gen_synthetic_db(
    seed: u64,
    count: usize,
    dir: impl AsRef<Path>,
    texture_size: usize,
) -> Result<()> {
    let db = generate(seed, count, texture_size)?;
    write_to_dir(&db, dir, texture_size)
}

// ---------------------------------------------------------------------------
// Probe inputs: renders + projected landmarks of a database head
// ---------------------------------------------------------------------------

/// A synthetic input frame: the head rendered at a given yaw, with the
/// landmark vertices projected through the same camera.
pub struct ProbeFrame {
    pub id: String,
    pub image: RgbImage,
    pub landmarks: LandmarkSet,
}

/// Renders a head at each yaw and projects its landmark vertices into
/// normalized frame coordinates, producing input frames whose landmarks
/// are perfectly consistent with the images.
pub fn probe_frames(
    mesh: &HeadMesh,
    lmap: &LandmarkVertexMap,
    cfg: &RenderConfig,
    yaws: &[f64],
) -> Result<Vec<ProbeFrame>> {
    let mut out = Vec::with_capacity(yaws.len());
    for (fi, &yaw) in yaws.iter().enumerate() {
        let rotated = render::rotate_y(mesh, yaw);
        let gray = render::render_frontal(&rotated, cfg)?;
        let size = cfg.image_size as f64;
        let points: Vec<Vec2> = lmap
            .vertex_index
            .iter()
            .map(|&vi| {
                let px = cfg
                    .project(rotated.vertices[vi as usize])
                    .ok_or_else(|| Error::Render("landmark behind camera".into()))?;
                Ok(vec2(px.x / size, px.y / size))
            })
            .collect::<Result<_>>()?;
        let id = format!("frame_{fi:02}_yaw{}", yaw.round() as i64);
        let landmarks = LandmarkSet::new(
            id.clone(),
            Rotation {
                yaw,
                pitch: 0.0,
                roll: 0.0,
            },
            points,
        )?;
        out.push(ProbeFrame {
            id,
            image: gray_to_rgb(&gray),
            landmarks,
        });
    }
    Ok(out)
}

pub fn gray_to_rgb(img: &GrayImage) -> RgbImage {
    let mut out = RgbImage::new(img.width(), img.height());
    for (o, &v) in out.pixels_mut().iter_mut().zip(img.pixels()) {
        *o = [v, v, v];
    }
    out
}
