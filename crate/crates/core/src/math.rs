//! Small fixed-size vector types used throughout the crate.
//!
//! Geometry is done in `f64`; image data lives in `f32` (see [`crate::img`]).

use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

pub const fn vec2(x: f64, y: f64) -> Vec2 {
    Vec2 { x, y }
}

pub const fn vec3(x: f64, y: f64, z: f64) -> Vec3 {
    Vec3 { x, y, z }
}

impl Vec2 {
    pub const ZERO: Vec2 = vec2(0.0, 0.0);

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    /// Z component of the 2D cross product `self x o`.
    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }
}

impl Vec3 {
    pub const ZERO: Vec3 = vec3(0.0, 0.0, 0.0);

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Vec3) -> Vec3 {
        vec3(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn normalized(self) -> Vec3 {
        let n = self.norm();
        if n == 0.0 {
            Vec3::ZERO
        } else {
            self / n
        }
    }

    pub fn xy(self) -> Vec2 {
        vec2(self.x, self.y)
    }
}

macro_rules! impl_vec_ops {
    ($t:ty { $($f:ident),+ }) => {
        impl Add for $t {
            type Output = $t;
            fn add(self, o: $t) -> $t {
                Self { $($f: self.$f + o.$f),+ }
            }
        }
        impl Sub for $t {
            type Output = $t;
            fn sub(self, o: $t) -> $t {
                Self { $($f: self.$f - o.$f),+ }
            }
        }
        impl Mul<f64> for $t {
            type Output = $t;
            fn mul(self, s: f64) -> $t {
                Self { $($f: self.$f * s),+ }
            }
        }
        impl Div<f64> for $t {
            type Output = $t;
            fn div(self, s: f64) -> $t {
                Self { $($f: self.$f / s),+ }
            }
        }
        impl Neg for $t {
            type Output = $t;
            fn neg(self) -> $t {
                Self { $($f: -self.$f),+ }
            }
        }
        impl AddAssign for $t {
            fn add_assign(&mut self, o: $t) {
                $(self.$f += o.$f;)+
            }
        }
    };
}

impl_vec_ops!(Vec2 { x, y });
impl_vec_ops!(Vec3 { x, y, z });

/// Mean of a non-empty point set.
pub fn mean2(points: impl IntoIterator<Item = Vec2>) -> Vec2 {
    let mut sum = Vec2::ZERO;
    let mut n = 0usize;
    for p in points {
        sum += p;
        n += 1;
    }
    sum / n as f64
}

pub fn mean3(points: impl IntoIterator<Item = Vec3>) -> Vec3 {
    let mut sum = Vec3::ZERO;
    let mut n = 0usize;
    for p in points {
        sum += p;
        n += 1;
    }
    sum / n as f64
}

/// Uniform scale + translation, the alignment used between landmark spaces.
///
/// Fit is least-squares over point pairs; there is no rotation component, so
/// axis-aligned rectangles map to axis-aligned rectangles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleOffset2 {
    pub scale: f64,
    pub offset: Vec2,
}

impl ScaleOffset2 {
    pub const IDENTITY: ScaleOffset2 = ScaleOffset2 {
        scale: 1.0,
        offset: Vec2::ZERO,
    };

    /// Least-squares fit of `scale * src + offset ~= dst`.
    ///
    /// Errors when the source points are degenerate: a similarity frame is
    /// only well defined when the sources spread in both dimensions, so
    /// coincident or collinear source sets are rejected.
    pub fn fit(pairs: &[(Vec2, Vec2)]) -> crate::Result<ScaleOffset2> {
        if pairs.len() < 2 {
            return Err(crate::Error::Degenerate(
                "similarity fit needs at least two point pairs".into(),
            ));
        }
        let src_mean = mean2(pairs.iter().map(|p| p.0));
        let dst_mean = mean2(pairs.iter().map(|p| p.1));

        // 2x2 covariance of the source spread, for the degeneracy check.
        let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
        let mut num = 0.0;
        let mut den = 0.0;
        for (s, d) in pairs {
            let sc = *s - src_mean;
            let dc = *d - dst_mean;
            sxx += sc.x * sc.x;
            sxy += sc.x * sc.y;
            syy += sc.y * sc.y;
            num += sc.dot(dc);
            den += sc.dot(sc);
        }
        // Smaller eigenvalue of [[sxx, sxy], [sxy, syy]].
        let tr = sxx + syy;
        let det = sxx * syy - sxy * sxy;
        let min_eig = tr / 2.0 - ((tr * tr / 4.0 - det).max(0.0)).sqrt();
        if min_eig <= 1e-9 * pairs.len() as f64 {
            return Err(crate::Error::Degenerate(
                "source points are collinear or coincident".into(),
            ));
        }
        let scale = num / den;
        if scale.abs() < 1e-12 {
            return Err(crate::Error::Degenerate(
                "similarity fit collapsed to zero scale".into(),
            ));
        }
        Ok(ScaleOffset2 {
            scale,
            offset: dst_mean - src_mean * scale,
        })
    }

    pub fn apply(&self, p: Vec2) -> Vec2 {
        p * self.scale + self.offset
    }

    pub fn inverse(&self) -> ScaleOffset2 {
        let inv = 1.0 / self.scale;
        ScaleOffset2 {
            scale: inv,
            offset: -self.offset * inv,
        }
    }
}
