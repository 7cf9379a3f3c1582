//! Piecewise-affine warp of an input frame onto the shared UV map.
//!
//! The 68 UV-space landmark positions plus 8 border anchors are Delaunay
//! triangulated in UV space; the matching image-space points come from the
//! frame's landmarks (anchors are carried over by a similarity fit, since
//! they have no detected counterpart). Every UV triangle then pulls its
//! pixels from the corresponding image triangle through that triangle's
//! affine map, with bilinear sampling.

use spade::{DelaunayTriangulation, HasPosition, Point2, Triangulation as _};

use crate::error::{Error, Result};
use crate::img::RgbImage;
use crate::landmark::LandmarkSet;
use crate::math::{vec2, ScaleOffset2, Vec2};
use crate::par;

use super::UvLandmarks;

struct IndexedPoint {
    position: Point2<f64>,
    index: usize,
}

impl HasPosition for IndexedPoint {
    type Scalar = f64;
    fn position(&self) -> Point2<f64> {
        self.position
    }
}

/// UV coordinate (v up) to continuous atlas pixel coordinate (y down,
/// corner origin).
pub fn uv_to_atlas_px(uv: Vec2, size: usize) -> Vec2 {
    vec2(uv.x * size as f64, (1.0 - uv.y) * size as f64)
}

/// Normalized image point (y down) to continuous pixel coordinate.
pub fn norm_to_px(p: Vec2, width: usize, height: usize) -> Vec2 {
    vec2(p.x * width as f64, p.y * height as f64)
}

/// Delaunay triangulation of the 68 + 8 UV points; triangles index into
/// landmarks first (0..68), border anchors after (68..76).
pub fn uv_triangulation(uv: &UvLandmarks) -> Result<Vec<[usize; 3]>> {
    uv.validate()?;
    let mut tri: DelaunayTriangulation<IndexedPoint> = DelaunayTriangulation::new();
    for (index, p) in uv.all_points().enumerate() {
        tri.insert(IndexedPoint {
            position: Point2::new(p.x, p.y),
            index,
        })
        .map_err(|e| Error::Texture(format!("UV point {index} rejected: {e:?}")))?;
    }
    if tri.num_vertices() != uv.len() {
        return Err(Error::Texture(
            "duplicate UV landmark positions collapse the triangulation".into(),
        ));
    }
    let faces: Vec<[usize; 3]> = tri
        .inner_faces()
        .map(|f| {
            let [a, b, c] = f.vertices();
            [a.data().index, b.data().index, c.data().index]
        })
        .collect();
    if faces.is_empty() {
        return Err(Error::Texture("UV landmarks are collinear".into()));
    }
    Ok(faces)
}

/// Warps one frame into UV space.
///
/// Returns the partial atlas and its coverage mask: a pixel is covered when
/// some UV triangle contains it and its source sample lies inside the
/// frame. Errors on zero-area image triangles.
pub fn warp_to_uv(
    frame: &RgbImage,
    landmarks: &LandmarkSet,
    uv: &UvLandmarks,
    atlas_size: usize,
) -> Result<(RgbImage, Vec<bool>)> {
    landmarks.validate()?;
    let triangles = uv_triangulation(uv)?;

    let uv_px: Vec<Vec2> = uv.all_points().map(|p| uv_to_atlas_px(p, atlas_size)).collect();
    let (w, h) = (frame.width(), frame.height());
    let mut img_px: Vec<Vec2> = landmarks
        .points
        .iter()
        .map(|&p| norm_to_px(p, w, h))
        .collect();

    // Border anchors have no detected image positions; carry them over with
    // the similarity transform fitted on the 68 real correspondences.
    let pairs: Vec<(Vec2, Vec2)> = uv_px[..crate::LANDMARK_COUNT]
        .iter()
        .copied()
        .zip(img_px.iter().copied())
        .collect();
    let to_image = ScaleOffset2::fit(&pairs)?;
    for anchor in &uv_px[crate::LANDMARK_COUNT..] {
        img_px.push(to_image.apply(*anchor));
    }

    for t in &triangles {
        let (a, b, c) = (img_px[t[0]], img_px[t[1]], img_px[t[2]]);
        let area = (b - a).cross(c - a);
        if area.abs() < 1e-9 {
            return Err(Error::Degenerate(format!(
                "image-space triangle ({}, {}, {}) has zero area",
                t[0], t[1], t[2]
            )));
        }
    }

    let mut pixels: Vec<([f32; 3], bool)> = vec![([0.0; 3], false); atlas_size * atlas_size];
    let band_rows = 64usize;
    par::for_each_chunk_mut(&mut pixels, band_rows * atlas_size, |band_idx, band| {
        let y0 = band_idx * band_rows;
        let y1 = y0 + band.len() / atlas_size;
        for t in &triangles {
            fill_triangle(
                t, &uv_px, &img_px, frame, atlas_size, y0, y1, band,
            );
        }
    });

    let mut out = RgbImage::new(atlas_size, atlas_size);
    let mut mask = vec![false; atlas_size * atlas_size];
    for (i, (color, covered)) in pixels.into_iter().enumerate() {
        out.pixels_mut()[i] = color;
        mask[i] = covered;
    }
    Ok((out, mask))
}

#[allow(clippy::too_many_arguments)]
fn fill_triangle(
    tri: &[usize; 3],
    uv_px: &[Vec2],
    img_px: &[Vec2],
    frame: &RgbImage,
    size: usize,
    band_y0: usize,
    band_y1: usize,
    band: &mut [([f32; 3], bool)],
) {
    let (p0, p1, p2) = (uv_px[tri[0]], uv_px[tri[1]], uv_px[tri[2]]);
    let (q0, q1, q2) = (img_px[tri[0]], img_px[tri[1]], img_px[tri[2]]);
    let area = (p1 - p0).cross(p2 - p0);
    if area.abs() < 1e-12 {
        return;
    }
    let inv_area = 1.0 / area;
    let (fw, fh) = (frame.width() as f64, frame.height() as f64);

    let min_x = p0.x.min(p1.x).min(p2.x).floor().max(0.0) as usize;
    let max_x = (p0.x.max(p1.x).max(p2.x).ceil().max(0.0) as usize).min(size);
    let min_y = p0.y.min(p1.y).min(p2.y).floor().max(0.0) as usize;
    let max_y = (p0.y.max(p1.y).max(p2.y).ceil().max(0.0) as usize).min(size);

    for y in min_y.max(band_y0)..max_y.min(band_y1) {
        let row = (y - band_y0) * size;
        let py = y as f64 + 0.5;
        for x in min_x..max_x {
            let p = vec2(x as f64 + 0.5, py);
            let mut l0 = (p1 - p).cross(p2 - p) * inv_area;
            let mut l1 = (p2 - p).cross(p0 - p) * inv_area;
            let mut l2 = (p0 - p).cross(p1 - p) * inv_area;
            if l0 < 0.0 || l1 < 0.0 || l2 < 0.0 {
                if l0 > 0.0 || l1 > 0.0 || l2 > 0.0 {
                    continue;
                }
                l0 = -l0;
                l1 = -l1;
                l2 = -l2;
            }
            let src = q0 * l0 + q1 * l1 + q2 * l2;
            if src.x < 0.0 || src.x > fw || src.y < 0.0 || src.y > fh {
                continue; // no image support
            }
            let color = frame.sample(src.x - 0.5, src.y - 0.5);
            band[row + x] = (color, true);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::landmark::Rotation;
    use crate::texture::UvLandmarks;
    use crate::LANDMARK_COUNT;

    /// Scattered but deterministic UV landmark layout with a border ring.
    pub(crate) fn toy_uv() -> UvLandmarks {
        let mut points = Vec::new();
        for i in 0..LANDMARK_COUNT {
            let a = i as f64 * 0.61803398875;
            let r = 0.12 + 0.23 * ((i * 37 % 100) as f64 / 100.0);
            points.push(vec2(
                (0.5 + r * (a * std::f64::consts::TAU).cos()).clamp(0.08, 0.92),
                (0.5 + r * (a * std::f64::consts::TAU).sin()).clamp(0.08, 0.92),
            ));
        }
        let border = vec![
            vec2(0.02, 0.02),
            vec2(0.5, 0.01),
            vec2(0.98, 0.02),
            vec2(0.99, 0.5),
            vec2(0.98, 0.98),
            vec2(0.5, 0.99),
            vec2(0.02, 0.98),
            vec2(0.01, 0.5),
        ];
        UvLandmarks {
            points,
            border,
            skin_polygon: vec![vec2(0.3, 0.3), vec2(0.7, 0.3), vec2(0.7, 0.7), vec2(0.3, 0.7)],
        }
    }

    fn identity_landmarks(uv: &UvLandmarks) -> LandmarkSet {
        // Image landmarks exactly at the UV positions (y flipped): the warp
        // becomes an identity resampling of an atlas-sized frame.
        let points = uv.points.iter().map(|p| vec2(p.x, 1.0 - p.y)).collect();
        LandmarkSet::new("id", Rotation::default(), points).unwrap()
    }

    fn test_frame(size: usize) -> RgbImage {
        RgbImage::from_fn(size, size, |x, y| {
            [
                (x % 17) as f32 / 17.0,
                (y % 13) as f32 / 13.0,
                ((x + y) % 29) as f32 / 29.0,
            ]
        })
    }

    #[test]
    fn triangulation_covers_all_points() {
        let uv = toy_uv();
        let tris = uv_triangulation(&uv).unwrap();
        assert!(!tris.is_empty());
        let mut seen = vec![false; uv.len()];
        for t in &tris {
            for &i in t {
                seen[i] = true;
            }
        }
        // Delaunay of points in general position references every site.
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn identity_correspondence_resamples_identically() {
        let uv = toy_uv();
        let size = 64;
        let frame = test_frame(size);
        let lms = identity_landmarks(&uv);
        let (out, mask) = warp_to_uv(&frame, &lms, &uv, size).unwrap();

        let mut err_sum = 0.0f64;
        let mut count = 0usize;
        for y in 0..size {
            for x in 0..size {
                if mask[y * size + x] {
                    let a = out.get(x, y);
                    let b = frame.get(x, y);
                    for c in 0..3 {
                        err_sum += (a[c] - b[c]).abs() as f64;
                    }
                    count += 3;
                }
            }
        }
        assert!(count > 0);
        let mae = err_sum / count as f64;
        assert!(mae < 2.0 / 255.0, "identity warp MAE {mae}");
    }

    #[test]
    fn translated_landmarks_equal_warp_of_translated_image() {
        let uv = toy_uv();
        let size = 64;
        let frame = test_frame(size);
        let lms = identity_landmarks(&uv);

        // integer-pixel shift keeps bilinear sampling exact
        let (dx, dy) = (3i64, -2i64);
        let mut shifted_lms = lms.clone();
        for p in shifted_lms.points.iter_mut() {
            p.x += dx as f64 / size as f64;
            p.y += dy as f64 / size as f64;
        }
        // translate(frame, -d): content moves by -d
        let moved = RgbImage::from_fn(size, size, |x, y| {
            let sx = (x as i64 + dx).clamp(0, size as i64 - 1) as usize;
            let sy = (y as i64 + dy).clamp(0, size as i64 - 1) as usize;
            frame.get(sx, sy)
        });

        let (a, mask_a) = warp_to_uv(&frame, &shifted_lms, &uv, size).unwrap();
        let (b, mask_b) = warp_to_uv(&moved, &lms, &uv, size).unwrap();
        let mut diff = 0.0f64;
        let mut n = 0usize;
        for i in 0..mask_a.len() {
            if mask_a[i] && mask_b[i] {
                for c in 0..3 {
                    diff += (a.pixels()[i][c] - b.pixels()[i][c]).abs() as f64;
                }
                n += 3;
            }
        }
        assert!(n > 1000, "warps should overlap substantially");
        let mae = diff / n as f64;
        assert!(mae < 1e-4, "MAE {mae}");
    }

    #[test]
    fn collapsed_image_triangle_is_degenerate() {
        let uv = toy_uv();
        let size = 64;
        let frame = test_frame(size);
        let mut lms = identity_landmarks(&uv);
        // Find the two closest UV landmarks: mutual nearest neighbors share
        // a Delaunay edge, so collapsing their image points collapses a
        // triangle.
        let (mut bi, mut bj, mut best) = (0, 1, f64::INFINITY);
        for i in 0..uv.points.len() {
            for j in i + 1..uv.points.len() {
                let d = (uv.points[i] - uv.points[j]).norm();
                if d < best {
                    best = d;
                    bi = i;
                    bj = j;
                }
            }
        }
        lms.points[bj] = lms.points[bi];
        let err = warp_to_uv(&frame, &lms, &uv, size).unwrap_err();
        assert!(err.to_string().contains("triangle"), "{err}");
    }

    #[test]
    fn one_hot_triangle_stays_local() {
        let uv = toy_uv();
        let size = 96;
        let lms = identity_landmarks(&uv);
        let tris = uv_triangulation(&uv).unwrap();
        // Pick an interior, reasonably large triangle among the landmarks.
        let tri = *tris
            .iter()
            .filter(|t| t.iter().all(|&i| i < LANDMARK_COUNT))
            .max_by(|a, b| {
                let area = |t: &[usize; 3]| {
                    let (p0, p1, p2) = (uv.points[t[0]], uv.points[t[1]], uv.points[t[2]]);
                    ((p1 - p0).cross(p2 - p0)).abs()
                };
                area(a).partial_cmp(&area(b)).unwrap()
            })
            .unwrap();

        // Frame: red strictly inside that triangle's image footprint.
        let corners: Vec<Vec2> = tri
            .iter()
            .map(|&i| norm_to_px(vec2(uv.points[i].x, 1.0 - uv.points[i].y), size, size))
            .collect();
        let frame = RgbImage::from_fn(size, size, |x, y| {
            let p = vec2(x as f64 + 0.5, y as f64 + 0.5);
            let l0 = (corners[1] - p).cross(corners[2] - p);
            let l1 = (corners[2] - p).cross(corners[0] - p);
            let l2 = (corners[0] - p).cross(corners[1] - p);
            let inside = (l0 >= 0.0 && l1 >= 0.0 && l2 >= 0.0)
                || (l0 <= 0.0 && l1 <= 0.0 && l2 <= 0.0);
            if inside {
                [1.0, 0.0, 0.0]
            } else {
                [0.0, 0.0, 0.0]
            }
        });

        let (out, _) = warp_to_uv(&frame, &lms, &uv, size).unwrap();
        // Red may appear only inside (or within a bilinear pixel of) the
        // matching UV triangle.
        let uv_corners: Vec<Vec2> = tri.iter().map(|&i| uv_to_atlas_px(uv.points[i], size)).collect();
        for y in 0..size {
            for x in 0..size {
                if out.get(x, y)[0] > 0.02 {
                    let p = vec2(x as f64 + 0.5, y as f64 + 0.5);
                    let dist = point_triangle_distance(p, &uv_corners);
                    assert!(
                        dist < 1.6,
                        "red pixel at ({x},{y}) is {dist} px outside its UV triangle"
                    );
                }
            }
        }
    }

    fn point_triangle_distance(p: Vec2, c: &[Vec2]) -> f64 {
        let inside = {
            let l0 = (c[1] - p).cross(c[2] - p);
            let l1 = (c[2] - p).cross(c[0] - p);
            let l2 = (c[0] - p).cross(c[1] - p);
            (l0 >= 0.0 && l1 >= 0.0 && l2 >= 0.0) || (l0 <= 0.0 && l1 <= 0.0 && l2 <= 0.0)
        };
        if inside {
            return 0.0;
        }
        let mut best = f64::INFINITY;
        for i in 0..3 {
            let (a, b) = (c[i], c[(i + 1) % 3]);
            let ab = b - a;
            let t = ((p - a).dot(ab) / ab.dot(ab)).clamp(0.0, 1.0);
            best = best.min((p - (a + ab * t)).norm());
        }
        best
    }
}
