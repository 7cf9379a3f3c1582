//! Principal component analysis over vectorized images.
//!
//! Fitting uses the Gram-matrix route: with n samples of dimension p and
//! n << p (a few dozen renders of thousands of pixels), the eigenvectors of
//! the n x n Gram matrix of centered samples give the same components as
//! the p x p covariance at a fraction of the cost.

use std::path::Path;

use nalgebra::DMatrix;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::img::GrayImage;

/// How many components to keep after fitting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Retained {
    Count(usize),
    /// Smallest count explaining at least `fraction` of the variance,
    /// capped at `cap`.
    Variance { fraction: f64, cap: usize },
}

impl Default for Retained {
    fn default() -> Self {
        Retained::Variance {
            fraction: 0.95,
            cap: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    /// Orthonormal basis vectors, strongest first. `components.len()` is the
    /// retained count; each has `mean.len()` entries.
    pub components: Vec<Vec<f64>>,
    /// Score vector of every training sample, in training order.
    pub training_scores: Vec<Vec<f64>>,
    /// Eigenvalue share of each retained component.
    pub explained: Vec<f64>,
    /// True when the request exceeded the data rank and was clamped.
    pub clamped: bool,
}

impl PcaModel {
    pub fn dims(&self) -> usize {
        self.mean.len()
    }

    pub fn retained(&self) -> usize {
        self.components.len()
    }

    pub fn fit(data: &[Vec<f64>], retained: Retained) -> Result<PcaModel> {
        let n = data.len();
        if n < 2 {
            return Err(Error::Similarity("PCA needs at least 2 samples".into()));
        }
        let p = data[0].len();
        if p == 0 || data.iter().any(|d| d.len() != p) {
            return Err(Error::DimensionMismatch {
                expected: format!("{p} elements per sample"),
                actual: "mismatched sample lengths".into(),
            });
        }

        let mut mean = vec![0.0f64; p];
        for row in data {
            for (m, &v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        for m in mean.iter_mut() {
            *m /= n as f64;
        }
        let centered: Vec<Vec<f64>> = data
            .iter()
            .map(|row| row.iter().zip(&mean).map(|(&v, &m)| v - m).collect())
            .collect();

        let gram = DMatrix::from_fn(n, n, |i, j| {
            centered[i]
                .iter()
                .zip(&centered[j])
                .map(|(&a, &b)| a * b)
                .sum::<f64>()
        });
        let eigen = gram.symmetric_eigen();

        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            eigen.eigenvalues[b]
                .partial_cmp(&eigen.eigenvalues[a])
                .unwrap()
                .then(a.cmp(&b))
        });

        let total: f64 = eigen.eigenvalues.iter().map(|&l| l.max(0.0)).sum();
        let tol = eigen.eigenvalues[order[0]].max(0.0) * 1e-12;
        let rank = order
            .iter()
            .take_while(|&&i| eigen.eigenvalues[i] > tol && eigen.eigenvalues[i] > 0.0)
            .count()
            .min(n - 1);

        let requested = match retained {
            Retained::Count(k) => k.max(1),
            Retained::Variance { fraction, cap } => {
                let mut acc = 0.0;
                let mut k = 0;
                for &i in order.iter().take(rank) {
                    acc += eigen.eigenvalues[i].max(0.0);
                    k += 1;
                    if total > 0.0 && acc / total >= fraction {
                        break;
                    }
                }
                k.clamp(1, cap.max(1))
            }
        };
        let keep = requested.min(rank.max(1));
        let clamped = requested > keep || rank == 0;

        let mut components = Vec::with_capacity(keep);
        let mut explained = Vec::with_capacity(keep);
        for &i in order.iter().take(keep) {
            let lambda = eigen.eigenvalues[i].max(0.0);
            let mut axis = vec![0.0f64; p];
            for (row, c) in centered.iter().enumerate() {
                let u = eigen.eigenvectors[(row, i)];
                for (a, &v) in axis.iter_mut().zip(c) {
                    *a += u * v;
                }
            }
            let norm = axis.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 0.0 {
                for a in axis.iter_mut() {
                    *a /= norm;
                }
            }
            // Canonical sign: strongest element positive.
            let pivot = axis
                .iter()
                .cloned()
                .fold(0.0f64, |acc, v| if v.abs() > acc.abs() { v } else { acc });
            if pivot < 0.0 {
                for a in axis.iter_mut() {
                    *a = -*a;
                }
            }
            components.push(axis);
            explained.push(if total > 0.0 { lambda / total } else { 0.0 });
        }

        let mut model = PcaModel {
            mean,
            components,
            training_scores: Vec::new(),
            explained,
            clamped,
        };
        model.training_scores = centered
            .iter()
            .map(|c| model.project_centered(c))
            .collect();
        Ok(model)
    }

    pub fn fit_images(images: &[GrayImage], retained: Retained) -> Result<PcaModel> {
        if images.len() >= 2 {
            let (w, h) = (images[0].width(), images[0].height());
            if let Some(bad) = images.iter().find(|i| i.width() != w || i.height() != h) {
                return Err(Error::DimensionMismatch {
                    expected: format!("{w}x{h}"),
                    actual: format!("{}x{}", bad.width(), bad.height()),
                });
            }
        }
        let data: Vec<Vec<f64>> = images.iter().map(image_to_vec).collect();
        PcaModel::fit(&data, retained)
    }

    fn project_centered(&self, centered: &[f64]) -> Vec<f64> {
        self.components
            .iter()
            .map(|c| c.iter().zip(centered).map(|(&a, &b)| a * b).sum())
            .collect()
    }

    /// Projection of a sample onto the retained components.
    pub fn score(&self, sample: &[f64]) -> Result<Vec<f64>> {
        if sample.len() != self.mean.len() {
            return Err(Error::DimensionMismatch {
                expected: format!("{} elements", self.mean.len()),
                actual: format!("{}", sample.len()),
            });
        }
        let centered: Vec<f64> = sample.iter().zip(&self.mean).map(|(&v, &m)| v - m).collect();
        Ok(self.project_centered(&centered))
    }

    pub fn score_image(&self, image: &GrayImage) -> Result<Vec<f64>> {
        self.score(&image_to_vec(image))
    }

    /// `mean + scores . components`.
    pub fn reconstruct(&self, scores: &[f64]) -> Vec<f64> {
        let mut out = self.mean.clone();
        for (s, c) in scores.iter().zip(&self.components) {
            for (o, &v) in out.iter_mut().zip(c) {
                *o += s * v;
            }
        }
        out
    }

    /// Euclidean distances from a score vector to every training score.
    pub fn distances_to_training(&self, scores: &[f64]) -> Vec<f64> {
        self.training_scores
            .iter()
            .map(|t| score_distance(scores, t))
            .collect()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let n = self.training_scores.len();
        let r = self.retained();
        let p = self.dims();

        let mut payload = Vec::with_capacity((p + r * p + n * r) * 8);
        let mut push = |v: f64| payload.extend_from_slice(&v.to_le_bytes());
        for &v in &self.mean {
            push(v);
        }
        for c in &self.components {
            for &v in c {
                push(v);
            }
        }
        for s in &self.training_scores {
            for &v in s {
                push(v);
            }
        }
        for &v in &self.explained {
            push(v);
        }

        let checksum = hex_digest(&payload);
        let header = serde_json::json!({
            "dims": p,
            "retained": r,
            "samples": n,
            "clamped": self.clamped,
            "checksum": checksum,
        })
        .to_string();

        let mut bytes = Vec::with_capacity(4 + header.len() + payload.len());
        bytes.extend_from_slice(&(header.len() as u32).to_le_bytes());
        bytes.extend_from_slice(header.as_bytes());
        bytes.extend_from_slice(&payload);
        std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<PcaModel> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        let bad = |m: &str| Error::Similarity(format!("{}: {m}", path.display()));
        if bytes.len() < 4 {
            return Err(bad("truncated header"));
        }
        let hlen = u32::from_le_bytes(bytes[0..4].try_into().unwrap()) as usize;
        if bytes.len() < 4 + hlen {
            return Err(bad("truncated header"));
        }
        let header: serde_json::Value = serde_json::from_slice(&bytes[4..4 + hlen])
            .map_err(|e| bad(&format!("bad header: {e}")))?;
        let p = header["dims"].as_u64().ok_or_else(|| bad("missing dims"))? as usize;
        let r = header["retained"].as_u64().ok_or_else(|| bad("missing retained"))? as usize;
        let n = header["samples"].as_u64().ok_or_else(|| bad("missing samples"))? as usize;
        let clamped = header["clamped"].as_bool().unwrap_or(false);
        let checksum = header["checksum"].as_str().ok_or_else(|| bad("missing checksum"))?;

        let payload = &bytes[4 + hlen..];
        if payload.len() != (p + r * p + n * r + r) * 8 {
            return Err(bad("payload size does not match header"));
        }
        if hex_digest(payload) != checksum {
            return Err(bad("checksum mismatch"));
        }

        let mut floats = payload
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()));
        let mut take = |count: usize| -> Vec<f64> { floats.by_ref().take(count).collect() };
        let mean = take(p);
        let components: Vec<Vec<f64>> = (0..r).map(|_| take(p)).collect();
        let training_scores: Vec<Vec<f64>> = (0..n).map(|_| take(r)).collect();
        let explained = take(r);
        Ok(PcaModel {
            mean,
            components,
            training_scores,
            explained,
            clamped,
        })
    }
}

pub fn image_to_vec(image: &GrayImage) -> Vec<f64> {
    image.pixels().iter().map(|&v| v as f64).collect()
}

pub fn score_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

fn hex_digest(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let out = hasher.finalize();
    out.iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn noise_images(n: usize, w: usize, h: usize) -> Vec<GrayImage> {
        (0..n)
            .map(|k| {
                GrayImage::from_fn(w, h, |x, y| {
                    let v = ((x * 131 + y * 197 + k * 89) % 251) as f32 / 250.0;
                    v
                })
            })
            .collect()
    }

    #[test]
    fn two_samples_have_one_component_with_symmetric_scores() {
        let a = vec![0.0, 0.0, 0.0, 0.0];
        let b = vec![1.0, 1.0, 0.0, 0.0];
        let model = PcaModel::fit(&[a.clone(), b.clone()], Retained::Count(5)).unwrap();
        assert_eq!(model.retained(), 1);
        assert!(model.clamped);
        let d = score_distance(&a, &b); // centered distance equals sample distance here
        let s0 = model.training_scores[0][0];
        let s1 = model.training_scores[1][0];
        assert!((s0.abs() - d / 2.0).abs() < 1e-12);
        assert!((s0 + s1).abs() < 1e-12);
    }

    #[test]
    fn copies_of_one_image_have_zero_scores() {
        let img = vec![0.3, 0.7, 0.1];
        let model = PcaModel::fit(&[img.clone(), img.clone(), img.clone()], Retained::Count(2)).unwrap();
        for s in &model.training_scores {
            assert!(s.iter().all(|v| v.abs() < 1e-9));
        }
    }

    #[test]
    fn full_rank_reconstruction_reproduces_training_set() {
        let images = noise_images(6, 8, 8);
        let model = PcaModel::fit_images(&images, Retained::Count(5)).unwrap();
        assert_eq!(model.retained(), 5);
        for (img, scores) in images.iter().zip(&model.training_scores) {
            let rec = model.reconstruct(scores);
            for (r, o) in rec.iter().zip(image_to_vec(img).iter()) {
                assert!((r - o).abs() < 1e-6, "reconstruction off by {}", (r - o).abs());
            }
        }
    }

    #[test]
    fn components_are_orthonormal() {
        let images = noise_images(8, 10, 6);
        let model = PcaModel::fit_images(&images, Retained::Count(7)).unwrap();
        for (i, a) in model.components.iter().enumerate() {
            for (j, b) in model.components.iter().enumerate() {
                let dot: f64 = a.iter().zip(b).map(|(&x, &y)| x * y).sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((dot - expect).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn score_of_mean_is_zero() {
        let images = noise_images(5, 6, 6);
        let model = PcaModel::fit_images(&images, Retained::default()).unwrap();
        let scores = model.score(&model.mean.clone()).unwrap();
        assert!(scores.iter().all(|v| v.abs() < 1e-9));
    }

    #[test]
    fn training_image_scores_match_cache() {
        let images = noise_images(5, 6, 6);
        let model = PcaModel::fit_images(&images, Retained::Count(4)).unwrap();
        for (k, img) in images.iter().enumerate() {
            let s = model.score_image(img).unwrap();
            for (a, b) in s.iter().zip(&model.training_scores[k]) {
                assert!((a - b).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn unit_step_along_component_scores_exactly() {
        let images = noise_images(5, 6, 6);
        let model = PcaModel::fit_images(&images, Retained::Count(3)).unwrap();
        let mut sample = model.mean.clone();
        for (s, &c) in sample.iter_mut().zip(&model.components[0]) {
            *s += 2.0 * c;
        }
        let scores = model.score(&sample).unwrap();
        assert!((scores[0] - 2.0).abs() < 1e-9);
        for v in &scores[1..] {
            assert!(v.abs() < 1e-9);
        }
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let images = noise_images(4, 6, 6);
        let model = PcaModel::fit_images(&images, Retained::default()).unwrap();
        assert!(model.score(&vec![0.0; 10]).is_err());
    }

    #[test]
    fn sidecar_round_trip_with_checksum() {
        let images = noise_images(6, 8, 4);
        let model = PcaModel::fit_images(&images, Retained::Count(3)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("face_pca.bin");
        model.save(&path).unwrap();
        let back = PcaModel::load(&path).unwrap();
        assert_eq!(model, back);

        // Flipping a payload byte must fail the checksum.
        let mut bytes = std::fs::read(&path).unwrap();
        let last = bytes.len() - 1;
        bytes[last] ^= 0xff;
        std::fs::write(&path, bytes).unwrap();
        assert!(PcaModel::load(&path).is_err());
    }
}
