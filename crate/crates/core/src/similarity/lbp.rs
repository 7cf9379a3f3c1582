//! Uniform local binary pattern descriptors.
//!
//! Each pixel is coded by comparing its `P` circular neighbors (bilinear
//! sampled at radius `R`) against the center with `>=`; codes whose
//! circular bit string has at most two 0/1 transitions are "uniform" and
//! get their own histogram bin, everything else shares one catch-all bin.
//! The image is split into a `grid x grid` cell layout and the per-cell
//! histograms (each normalized to sum 1) are concatenated row-major.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::img::GrayImage;

/// Guard against bilinear round-off: neighbors this close to the center
/// count as greater-or-equal.
const TIE_EPS: f32 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LbpConfig {
    pub neighbors: usize,
    pub radius: f64,
    /// Cells per axis.
    pub grid: usize,
    pub uniform: bool,
}

impl Default for LbpConfig {
    fn default() -> Self {
        LbpConfig {
            neighbors: 8,
            radius: 1.0,
            grid: 8,
            uniform: true,
        }
    }
}

impl LbpConfig {
    pub fn validate(&self) -> Result<()> {
        if self.neighbors != 8 && self.neighbors != 16 {
            return Err(Error::InvalidConfig(format!(
                "LBP neighbor count must be 8 or 16, got {}",
                self.neighbors
            )));
        }
        if self.radius < 1.0 {
            return Err(Error::InvalidConfig("LBP radius must be >= 1".into()));
        }
        if self.grid == 0 {
            return Err(Error::InvalidConfig("LBP grid must be positive".into()));
        }
        Ok(())
    }

    /// Histogram bins per cell: `P(P-1) + 2` uniform patterns plus one
    /// catch-all (59 for P = 8), or `2^P` when uniform binning is off.
    pub fn bins_per_cell(&self) -> usize {
        if self.uniform {
            self.neighbors * (self.neighbors - 1) + 3
        } else {
            1 << self.neighbors
        }
    }

    pub fn descriptor_len(&self) -> usize {
        self.grid * self.grid * self.bins_per_cell()
    }
}

fn transitions(code: u32, bits: usize) -> u32 {
    let mut t = 0;
    for i in 0..bits {
        let a = (code >> i) & 1;
        let b = (code >> ((i + 1) % bits)) & 1;
        t += (a ^ b) as u32;
    }
    t
}

/// code -> bin lookup. Uniform codes map to their rank among uniform codes
/// (ascending), the rest to the last bin.
fn uniform_bin_table(bits: usize) -> Vec<u32> {
    let n = 1usize << bits;
    let uniform_count = bits * (bits - 1) + 2;
    let mut table = vec![uniform_count as u32; n];
    let mut next = 0u32;
    for code in 0..n as u32 {
        if transitions(code, bits) <= 2 {
            table[code as usize] = next;
            next += 1;
        }
    }
    debug_assert_eq!(next as usize, uniform_count);
    table
}

/// Per-pixel LBP codes for every pixel whose full neighbor circle is in
/// bounds. Returns `(codes, x0, y0, coded_w, coded_h)`.
fn codes(image: &GrayImage, cfg: &LbpConfig) -> Result<(Vec<u32>, usize, usize, usize, usize)> {
    let margin = cfg.radius.ceil() as usize;
    let (w, h) = (image.width(), image.height());
    if w <= 2 * margin || h <= 2 * margin {
        return Err(Error::Similarity(format!(
            "image {w}x{h} too small for LBP radius {}",
            cfg.radius
        )));
    }
    let coded_w = w - 2 * margin;
    let coded_h = h - 2 * margin;

    let offsets: Vec<(f64, f64)> = (0..cfg.neighbors)
        .map(|p| {
            let angle = 2.0 * std::f64::consts::PI * p as f64 / cfg.neighbors as f64;
            (cfg.radius * angle.cos(), -cfg.radius * angle.sin())
        })
        .collect();

    let mut out = Vec::with_capacity(coded_w * coded_h);
    for y in margin..h - margin {
        for x in margin..w - margin {
            let center = image.get(x, y);
            let mut code = 0u32;
            for (p, &(dx, dy)) in offsets.iter().enumerate() {
                let v = image.sample(x as f64 + dx, y as f64 + dy);
                if v + TIE_EPS >= center {
                    code |= 1 << p;
                }
            }
            out.push(code);
        }
    }
    Ok((out, margin, margin, coded_w, coded_h))
}

/// Concatenated per-cell histogram descriptor.
pub fn descriptor(image: &GrayImage, cfg: &LbpConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    let (w, h) = (image.width(), image.height());
    let min_cell = (2.0 * cfg.radius + 1.0).powi(2);
    if ((w / cfg.grid) * (h / cfg.grid)) < min_cell as usize {
        return Err(Error::Similarity(format!(
            "cells of a {w}x{h} image on a {0}x{0} grid are smaller than {min_cell} pixels",
            cfg.grid
        )));
    }

    let (codes, x0, y0, cw, ch) = codes(image, cfg)?;
    let bins = cfg.bins_per_cell();
    let table = if cfg.uniform {
        Some(uniform_bin_table(cfg.neighbors))
    } else {
        None
    };

    let g = cfg.grid;
    let mut hist = vec![0.0f64; g * g * bins];
    for cy in 0..ch {
        for cx in 0..cw {
            let code = codes[cy * cw + cx] as usize;
            let bin = match &table {
                Some(t) => t[code] as usize,
                None => code,
            };
            // Cell by absolute pixel position in the full image.
            let px = x0 + cx;
            let py = y0 + cy;
            let cell_x = (px * g / w).min(g - 1);
            let cell_y = (py * g / h).min(g - 1);
            hist[(cell_y * g + cell_x) * bins + bin] += 1.0;
        }
    }
    for cell in hist.chunks_mut(bins) {
        let sum: f64 = cell.iter().sum();
        if sum > 0.0 {
            for v in cell.iter_mut() {
                *v /= sum;
            }
        }
    }
    Ok(hist)
}
