//! Float image buffers.
//!
//! Pixels are `f32` in `[0, 1]`, row-major, with `(0, 0)` the top-left pixel.
//! Fractional coordinates address pixel centers: sampling at `(0.0, 0.0)`
//! returns pixel `(0, 0)` exactly. 8-bit PNG is the only on-disk format.

use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<f32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RgbImage {
    width: usize,
    height: usize,
    data: Vec<[f32; 3]>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize) -> GrayImage {
        GrayImage {
            width,
            height,
            data: vec![0.0; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> f32) -> GrayImage {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        GrayImage { width, height, data }
    }

    pub fn from_raw(width: usize, height: usize, data: Vec<f32>) -> Result<GrayImage> {
        if data.len() != width * height {
            return Err(Error::DimensionMismatch {
                expected: format!("{} pixels", width * height),
                actual: format!("{}", data.len()),
            });
        }
        Ok(GrayImage { width, height, data })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[f32] {
        &self.data
    }

    pub fn pixels_mut(&mut self) -> &mut [f32] {
        &mut self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f32 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: f32) {
        self.data[y * self.width + x] = v;
    }

    /// Bilinear sample at a fractional pixel position, clamped to the border.
    pub fn sample(&self, x: f64, y: f64) -> f32 {
        sample_bilinear(x, y, self.width, self.height, |xi, yi| {
            self.get(xi, yi) as f64
        }) as f32
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().map(|&v| v as f64).sum::<f64>() / self.data.len().max(1) as f64
    }

    /// Copies the `w x h` rectangle whose top-left corner is `(left, top)`.
    pub fn crop(&self, left: usize, top: usize, w: usize, h: usize) -> Result<GrayImage> {
        if left + w > self.width || top + h > self.height || w == 0 || h == 0 {
            return Err(Error::Image(format!(
                "crop {}x{}+{}+{} out of bounds for {}x{} image",
                w, h, left, top, self.width, self.height
            )));
        }
        let mut out = GrayImage::new(w, h);
        for y in 0..h {
            let src = (top + y) * self.width + left;
            out.data[y * w..(y + 1) * w].copy_from_slice(&self.data[src..src + w]);
        }
        Ok(out)
    }

    pub fn resize(&self, w: usize, h: usize) -> GrayImage {
        resize_with(w, h, self.width, self.height, |x, y| self.sample(x, y))
    }

    pub fn save_png(&self, path: impl AsRef<Path>) -> Result<()> {
        let buf: Vec<u8> = self.data.iter().map(|&v| quantize(v)).collect();
        let img = image::GrayImage::from_raw(self.width as u32, self.height as u32, buf)
            .expect("buffer size matches dimensions");
        img.save(path.as_ref())
            .map_err(|e| Error::Image(format!("{}: {e}", path.as_ref().display())))
    }

    pub fn load_png(path: impl AsRef<Path>) -> Result<GrayImage> {
        let img = image::open(path.as_ref())
            .map_err(|e| Error::Image(format!("{}: {e}", path.as_ref().display())))?
            .into_luma8();
        let (w, h) = img.dimensions();
        Ok(GrayImage {
            width: w as usize,
            height: h as usize,
            data: img.into_raw().into_iter().map(|v| v as f32 / 255.0).collect(),
        })
    }
}

impl RgbImage {
    pub fn new(width: usize, height: usize) -> RgbImage {
        RgbImage {
            width,
            height,
            data: vec![[0.0; 3]; width * height],
        }
    }

    pub fn filled(width: usize, height: usize, color: [f32; 3]) -> RgbImage {
        RgbImage {
            width,
            height,
            data: vec![color; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> [f32; 3]) -> RgbImage {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        RgbImage { width, height, data }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[[f32; 3]] {
        &self.data
    }

    pub fn pixels_mut(&mut self) -> &mut [[f32; 3]] {
        &mut self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> [f32; 3] {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: [f32; 3]) {
        self.data[y * self.width + x] = v;
    }

    pub fn sample(&self, x: f64, y: f64) -> [f32; 3] {
        let mut out = [0.0f32; 3];
        for (c, o) in out.iter_mut().enumerate() {
            *o = sample_bilinear(x, y, self.width, self.height, |xi, yi| {
                self.get(xi, yi)[c] as f64
            }) as f32;
        }
        out
    }

    pub fn resize(&self, w: usize, h: usize) -> RgbImage {
        let sx = self.width as f64 / w as f64;
        let sy = self.height as f64 / h as f64;
        RgbImage::from_fn(w, h, |x, y| {
            self.sample(
                (x as f64 + 0.5) * sx - 0.5,
                (y as f64 + 0.5) * sy - 0.5,
            )
        })
    }

    /// Rec. 601 luma conversion.
    pub fn to_gray(&self) -> GrayImage {
        GrayImage {
            width: self.width,
            height: self.height,
            data: self
                .data
                .iter()
                .map(|p| 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2])
                .collect(),
        }
    }

    pub fn save_png(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut buf = Vec::with_capacity(self.data.len() * 3);
        for p in &self.data {
            buf.push(quantize(p[0]));
            buf.push(quantize(p[1]));
            buf.push(quantize(p[2]));
        }
        let img = image::RgbImage::from_raw(self.width as u32, self.height as u32, buf)
            .expect("buffer size matches dimensions");
        img.save(path.as_ref())
            .map_err(|e| Error::Image(format!("{}: {e}", path.as_ref().display())))
    }

    pub fn load_png(path: impl AsRef<Path>) -> Result<RgbImage> {
        let img = image::open(path.as_ref())
            .map_err(|e| Error::Image(format!("{}: {e}", path.as_ref().display())))?
            .into_rgb8();
        let (w, h) = img.dimensions();
        let raw = img.into_raw();
        let data = raw
            .chunks_exact(3)
            .map(|c| {
                [
                    c[0] as f32 / 255.0,
                    c[1] as f32 / 255.0,
                    c[2] as f32 / 255.0,
                ]
            })
            .collect();
        Ok(RgbImage {
            width: w as usize,
            height: h as usize,
            data,
        })
    }
}

fn quantize(v: f32) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

fn sample_bilinear(
    x: f64,
    y: f64,
    width: usize,
    height: usize,
    get: impl Fn(usize, usize) -> f64,
) -> f64 {
    let x = x.clamp(0.0, (width - 1) as f64);
    let y = y.clamp(0.0, (height - 1) as f64);
    let x0 = x.floor() as usize;
    let y0 = y.floor() as usize;
    let x1 = (x0 + 1).min(width - 1);
    let y1 = (y0 + 1).min(height - 1);
    let fx = x - x0 as f64;
    let fy = y - y0 as f64;
    let top = get(x0, y0) * (1.0 - fx) + get(x1, y0) * fx;
    let bot = get(x0, y1) * (1.0 - fx) + get(x1, y1) * fx;
    top * (1.0 - fy) + bot * fy
}

/// Center-aligned bilinear resample shared by both image types.
fn resize_with(
    dst_w: usize,
    dst_h: usize,
    src_w: usize,
    src_h: usize,
    sample: impl Fn(f64, f64) -> f32,
) -> GrayImage {
    let sx = src_w as f64 / dst_w as f64;
    let sy = src_h as f64 / dst_h as f64;
    GrayImage::from_fn(dst_w, dst_h, |x, y| {
        sample(
            (x as f64 + 0.5) * sx - 0.5,
            (y as f64 + 0.5) * sy - 0.5,
        )
    })
}

/// Resamples an axis-aligned source rectangle (fractional corners allowed)
/// into a `dst_w x dst_h` grayscale image.
pub fn resample_rect_gray(
    src: &GrayImage,
    left: f64,
    top: f64,
    width: f64,
    height: f64,
    dst_w: usize,
    dst_h: usize,
) -> GrayImage {
    let sx = width / dst_w as f64;
    let sy = height / dst_h as f64;
    GrayImage::from_fn(dst_w, dst_h, |x, y| {
        src.sample(
            left + (x as f64 + 0.5) * sx - 0.5,
            top + (y as f64 + 0.5) * sy - 0.5,
        )
    })
}
