//! Fixed-topology quad head meshes and their on-disk format.
//!
//! The file format is a strict OBJ subset:
//!
//! ```text
//! v <x> <y> <z>
//! vt <u> <v>
//! f <i>/<i> <j>/<j> <k>/<k> <l>/<l>
//! ```
//!
//! Indices are 1-based and every face corner must reference the same index
//! for position and texture coordinate — UVs are per-vertex and shared
//! across a database, never per-face. Floats are written with Rust's
//! shortest round-trip formatting, so save → load is the identity and two
//! saves of the same mesh are byte-identical.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::math::{Vec2, Vec3};

/// Quad mesh with per-vertex UVs. All meshes in one database share vertex
/// count, face list and UV table; vertex `i` is the same anatomical point
/// in every mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct HeadMesh {
    pub vertices: Vec<Vec3>,
    pub faces: Vec<[u32; 4]>,
    pub uvs: Vec<Vec2>,
}

impl HeadMesh {
    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    /// Checks the structural invariants: one UV per vertex, all face indices
    /// in range, all UVs inside the unit square.
    pub fn validate(&self) -> Result<()> {
        if self.uvs.len() != self.vertices.len() {
            return Err(Error::InvalidMesh(format!(
                "UV count {} does not match vertex count {}",
                self.uvs.len(),
                self.vertices.len()
            )));
        }
        let n = self.vertices.len() as u32;
        for (fi, face) in self.faces.iter().enumerate() {
            for &idx in face {
                if idx >= n {
                    return Err(Error::InvalidMesh(format!(
                        "face {fi} references vertex {idx}, but the mesh has {n} vertices"
                    )));
                }
            }
        }
        for (i, uv) in self.uvs.iter().enumerate() {
            if !(0.0..=1.0).contains(&uv.x) || !(0.0..=1.0).contains(&uv.y) {
                return Err(Error::InvalidMesh(format!(
                    "UV {i} = ({}, {}) outside [0,1]^2",
                    uv.x, uv.y
                )));
            }
        }
        Ok(())
    }

    /// True when `other` has the identical face list and vertex count.
    pub fn same_topology(&self, other: &HeadMesh) -> bool {
        self.vertices.len() == other.vertices.len() && self.faces == other.faces
    }

    /// Axis-aligned bounds of all vertices, `(min, max)`.
    pub fn bounds(&self) -> (Vec3, Vec3) {
        let mut lo = Vec3 {
            x: f64::INFINITY,
            y: f64::INFINITY,
            z: f64::INFINITY,
        };
        let mut hi = Vec3 {
            x: f64::NEG_INFINITY,
            y: f64::NEG_INFINITY,
            z: f64::NEG_INFINITY,
        };
        for v in &self.vertices {
            lo.x = lo.x.min(v.x);
            lo.y = lo.y.min(v.y);
            lo.z = lo.z.min(v.z);
            hi.x = hi.x.max(v.x);
            hi.y = hi.y.max(v.y);
            hi.z = hi.z.max(v.z);
        }
        (lo, hi)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for v in &self.vertices {
            writeln!(out, "v {} {} {}", v.x, v.y, v.z).unwrap();
        }
        for uv in &self.uvs {
            writeln!(out, "vt {} {}", uv.x, uv.y).unwrap();
        }
        for f in &self.faces {
            writeln!(
                out,
                "f {0}/{0} {1}/{1} {2}/{2} {3}/{3}",
                f[0] + 1,
                f[1] + 1,
                f[2] + 1,
                f[3] + 1
            )
            .unwrap();
        }
        out
    }

    pub fn from_text(text: &str, origin: &Path) -> Result<HeadMesh> {
        let mut vertices = Vec::new();
        let mut uvs = Vec::new();
        let mut faces = Vec::new();
        let parse_err = |line: usize, message: String| Error::MeshParse {
            path: origin.to_path_buf(),
            line,
            message,
        };

        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let lineno = lineno + 1;
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let tag = parts.next().unwrap();
            match tag {
                "v" => {
                    let mut coords = [0.0f64; 3];
                    for c in coords.iter_mut() {
                        *c = parts
                            .next()
                            .ok_or_else(|| parse_err(lineno, "vertex needs 3 coordinates".into()))?
                            .parse()
                            .map_err(|e| parse_err(lineno, format!("bad float: {e}")))?;
                    }
                    vertices.push(Vec3 {
                        x: coords[0],
                        y: coords[1],
                        z: coords[2],
                    });
                }
                "vt" => {
                    let mut coords = [0.0f64; 2];
                    for c in coords.iter_mut() {
                        *c = parts
                            .next()
                            .ok_or_else(|| parse_err(lineno, "UV needs 2 coordinates".into()))?
                            .parse()
                            .map_err(|e| parse_err(lineno, format!("bad float: {e}")))?;
                    }
                    uvs.push(Vec2 {
                        x: coords[0],
                        y: coords[1],
                    });
                }
                "f" => {
                    let corners: Vec<&str> = parts.collect();
                    if corners.len() != 4 {
                        return Err(parse_err(
                            lineno,
                            format!("non-quadrilateral face with {} corners", corners.len()),
                        ));
                    }
                    let mut face = [0u32; 4];
                    for (slot, corner) in face.iter_mut().zip(&corners) {
                        let mut ids = corner.split('/');
                        let vi: i64 = ids
                            .next()
                            .unwrap()
                            .parse()
                            .map_err(|e| parse_err(lineno, format!("bad index: {e}")))?;
                        let ti: i64 = match ids.next() {
                            Some(t) if !t.is_empty() => t
                                .parse()
                                .map_err(|e| parse_err(lineno, format!("bad index: {e}")))?,
                            _ => vi,
                        };
                        if vi != ti {
                            return Err(parse_err(
                                lineno,
                                format!("corner {corner}: vertex and UV index must match"),
                            ));
                        }
                        if vi < 1 {
                            return Err(parse_err(lineno, format!("index {vi} out of range")));
                        }
                        *slot = (vi - 1) as u32;
                    }
                    faces.push(face);
                }
                other => {
                    return Err(parse_err(lineno, format!("unsupported directive `{other}`")));
                }
            }
        }

        let mesh = HeadMesh { vertices, faces, uvs };
        mesh.validate()?;
        Ok(mesh)
    }
}

pub fn load_head_mesh(path: impl AsRef<Path>) -> Result<HeadMesh> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    HeadMesh::from_text(&text, path)
}

pub fn save_head_mesh(mesh: &HeadMesh, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    mesh.validate()?;
    std::fs::write(path, mesh.to_text()).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::{vec2, vec3};
    use proptest::prelude::*;

    fn quad_mesh() -> HeadMesh {
        HeadMesh {
            vertices: vec![
                vec3(-0.5, -0.5, 0.0),
                vec3(0.5, -0.5, 0.0),
                vec3(0.5, 0.5, 0.0),
                vec3(-0.5, 0.5, 0.0),
            ],
            faces: vec![[0, 1, 2, 3]],
            uvs: vec![vec2(0.0, 0.0), vec2(1.0, 0.0), vec2(1.0, 1.0), vec2(0.0, 1.0)],
        }
    }

    #[test]
    fn minimal_mesh_round_trips() {
        let text = "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nvt 0 0\nvt 1 0\nvt 1 1\nvt 0 1\nf 1/1 2/2 3/3 4/4\n";
        let mesh = HeadMesh::from_text(text, Path::new("inline")).unwrap();
        assert_eq!(mesh.vertex_count(), 4);
        assert_eq!(mesh.faces.len(), 1);
    }

    #[test]
    fn triangle_face_is_rejected() {
        let text = "v 0 0 0\nv 1 0 0\nv 1 1 0\nvt 0 0\nvt 1 0\nvt 1 1\nf 1/1 2/2 3/3\n";
        let err = HeadMesh::from_text(text, Path::new("inline")).unwrap_err();
        assert!(err.to_string().contains("non-quadrilateral"));
    }

    #[test]
    fn out_of_range_index_is_rejected() {
        let text = "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nvt 0 0\nvt 1 0\nvt 1 1\nvt 0 1\nf 2/2 3/3 4/4 5/5\n";
        assert!(HeadMesh::from_text(text, Path::new("inline")).is_err());
    }

    #[test]
    fn uv_count_mismatch_is_rejected() {
        let text = "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nvt 0 0\nf 1/1 2/2 3/3 4/4\n";
        assert!(HeadMesh::from_text(text, Path::new("inline")).is_err());
    }

    #[test]
    fn mismatched_uv_index_is_rejected() {
        let text = "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nvt 0 0\nvt 1 0\nvt 1 1\nvt 0 1\nf 1/2 2/2 3/3 4/4\n";
        let err = HeadMesh::from_text(text, Path::new("inline")).unwrap_err();
        assert!(err.to_string().contains("must match"));
    }

    #[test]
    fn save_is_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.obj");
        let b = dir.path().join("b.obj");
        let mesh = quad_mesh();
        save_head_mesh(&mesh, &a).unwrap();
        save_head_mesh(&mesh, &b).unwrap();
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    }

    #[test]
    fn save_to_unwritable_path_errors() {
        let mesh = quad_mesh();
        let err = save_head_mesh(&mesh, "/nonexistent-dir/out.obj").unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }

    proptest! {
        // Shortest round-trip float formatting makes save/load the identity,
        // not merely an approximation.
        #[test]
        fn text_round_trip_is_identity(
            coords in proptest::collection::vec((-10.0f64..10.0, -10.0f64..10.0, -10.0f64..10.0), 4..40)
        ) {
            let n = coords.len();
            let vertices: Vec<Vec3> = coords.iter().map(|&(x, y, z)| vec3(x, y, z)).collect();
            let uvs: Vec<Vec2> = (0..n)
                .map(|i| vec2(i as f64 / n as f64, 1.0 - i as f64 / n as f64))
                .collect();
            let faces = vec![[0u32, 1, 2, 3], [n as u32 - 4, n as u32 - 3, n as u32 - 2, n as u32 - 1]];
            let mesh = HeadMesh { vertices, faces, uvs };
            let back = HeadMesh::from_text(&mesh.to_text(), Path::new("prop")).unwrap();
            prop_assert_eq!(mesh, back);
        }
    }
}
