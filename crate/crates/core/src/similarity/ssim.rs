//! Structural similarity index for unit-range grayscale images.
//!
//! Mean local SSIM over an 11x11 Gaussian window (sigma 1.5), constants
//! K1 = 0.01, K2 = 0.03 with dynamic range L = 1. Only fully-supported
//! window positions contribute; there is no border padding. Identical
//! images score exactly 1; region matching uses `1 - ssim` as the error.

use crate::error::{Error, Result};
use crate::img::GrayImage;

pub const WINDOW: usize = 11;
const SIGMA: f64 = 1.5;
const K1: f64 = 0.01;
const K2: f64 = 0.03;

pub fn gaussian_kernel() -> Vec<f64> {
    let r = (WINDOW / 2) as isize;
    let mut k: Vec<f64> = (-r..=r)
        .map(|i| (-((i * i) as f64) / (2.0 * SIGMA * SIGMA)).exp())
        .collect();
    let sum: f64 = k.iter().sum();
    for v in k.iter_mut() {
        *v /= sum;
    }
    k
}

/// Separable valid-mode Gaussian filter; output is
/// `(w - WINDOW + 1) x (h - WINDOW + 1)`.
fn filter_valid(data: &[f64], w: usize, h: usize, kernel: &[f64]) -> Vec<f64> {
    let k = kernel.len();
    let ow = w - k + 1;
    let oh = h - k + 1;
    // horizontal pass
    let mut tmp = vec![0.0f64; ow * h];
    for y in 0..h {
        for x in 0..ow {
            let mut acc = 0.0;
            for (i, &kv) in kernel.iter().enumerate() {
                acc += kv * data[y * w + x + i];
            }
            tmp[y * ow + x] = acc;
        }
    }
    // vertical pass
    let mut out = vec![0.0f64; ow * oh];
    for y in 0..oh {
        for x in 0..ow {
            let mut acc = 0.0;
            for (i, &kv) in kernel.iter().enumerate() {
                acc += kv * tmp[(y + i) * ow + x];
            }
            out[y * ow + x] = acc;
        }
    }
    out
}

pub fn ssim(a: &GrayImage, b: &GrayImage) -> Result<f64> {
    if a.width() != b.width() || a.height() != b.height() {
        return Err(Error::DimensionMismatch {
            expected: format!("{}x{}", a.width(), a.height()),
            actual: format!("{}x{}", b.width(), b.height()),
        });
    }
    let (w, h) = (a.width(), a.height());
    if w < WINDOW || h < WINDOW {
        return Err(Error::Similarity(format!(
            "image {w}x{h} smaller than the {WINDOW}x{WINDOW} SSIM window"
        )));
    }

    let av: Vec<f64> = a.pixels().iter().map(|&v| v as f64).collect();
    let bv: Vec<f64> = b.pixels().iter().map(|&v| v as f64).collect();
    let aa: Vec<f64> = av.iter().map(|v| v * v).collect();
    let bb: Vec<f64> = bv.iter().map(|v| v * v).collect();
    let ab: Vec<f64> = av.iter().zip(&bv).map(|(x, y)| x * y).collect();

    let kernel = gaussian_kernel();
    let mu_a = filter_valid(&av, w, h, &kernel);
    let mu_b = filter_valid(&bv, w, h, &kernel);
    let m_aa = filter_valid(&aa, w, h, &kernel);
    let m_bb = filter_valid(&bb, w, h, &kernel);
    let m_ab = filter_valid(&ab, w, h, &kernel);

    let c1 = K1 * K1; // (K1 * L)^2 with L = 1
    let c2 = K2 * K2;
    let mut acc = 0.0;
    for i in 0..mu_a.len() {
        let (ma, mb) = (mu_a[i], mu_b[i]);
        let va = m_aa[i] - ma * ma;
        let vb = m_bb[i] - mb * mb;
        let cov = m_ab[i] - ma * mb;
        let num = (2.0 * ma * mb + c1) * (2.0 * cov + c2);
        let den = (ma * ma + mb * mb + c1) * (va + vb + c2);
        acc += num / den;
    }
    Ok(acc / mu_a.len() as f64)
}

/// `1 - ssim`, the dissimilarity used for region selection.
pub fn dissimilarity(a: &GrayImage, b: &GrayImage) -> Result<f64> {
    Ok(1.0 - ssim(a, b)?)
}

#[cfg(test)]
pub(crate) mod reference {
    //! Direct-formula implementation kept independent of the filtering
    //! route above; the oracle for the fast path.

    use super::*;

    pub fn ssim_direct(a: &GrayImage, b: &GrayImage) -> f64 {
        let kernel = gaussian_kernel();
        let (w, h) = (a.width(), a.height());
        let c1 = K1 * K1;
        let c2 = K2 * K2;
        let mut acc = 0.0;
        let mut count = 0usize;
        for wy in 0..=(h - WINDOW) {
            for wx in 0..=(w - WINDOW) {
                let mut ma = 0.0;
                let mut mb = 0.0;
                for dy in 0..WINDOW {
                    for dx in 0..WINDOW {
                        let wgt = kernel[dy] * kernel[dx];
                        ma += wgt * a.get(wx + dx, wy + dy) as f64;
                        mb += wgt * b.get(wx + dx, wy + dy) as f64;
                    }
                }
                let (mut va, mut vb, mut cov) = (0.0, 0.0, 0.0);
                for dy in 0..WINDOW {
                    for dx in 0..WINDOW {
                        let wgt = kernel[dy] * kernel[dx];
                        let da = a.get(wx + dx, wy + dy) as f64 - ma;
                        let db = b.get(wx + dx, wy + dy) as f64 - mb;
                        va += wgt * da * da;
                        vb += wgt * db * db;
                        cov += wgt * da * db;
                    }
                }
                let num = (2.0 * ma * mb + c1) * (2.0 * cov + c2);
                let den = (ma * ma + mb * mb + c1) * (va + vb + c2);
                acc += num / den;
                count += 1;
            }
        }
        acc / count as f64
    }
}
