use std::collections::HashMap;
use std::io::BufRead;
use std::path::Path;

use glam::Vec3;

use crate::bvh::{Aabb, Triangle};

use super::{Result, SceneError};

/// Indexed triangle mesh (positions only).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TriangleMesh {
    pub positions: Vec<Vec3>,
    pub indices: Vec<[u32; 3]>,
}

impl TriangleMesh {
    pub fn new(positions: Vec<Vec3>, indices: Vec<[u32; 3]>) -> Result<Self> {
        let m = Self { positions, indices };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(i) = self.positions.iter().position(|p| !p.is_finite()) {
            return Err(SceneError::InvalidMesh(format!("vertex {i} is not finite")));
        }
        let n = self.positions.len() as u32;
        if let Some(f) = self.indices.iter().position(|t| t.iter().any(|&i| i >= n)) {
            return Err(SceneError::InvalidMesh(format!("face {f} indexes past {n} vertices")));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn triangle(&self, i: usize) -> Triangle {
        self.indices[i].map(|v| self.positions[v as usize])
    }

    pub fn triangles(&self) -> Vec<Triangle> {
        (0..self.len()).map(|i| self.triangle(i)).collect()
    }

    pub fn bounds(&self) -> Aabb {
        self.positions.iter().fold(Aabb::EMPTY, |mut b, &p| {
            b.grow(p);
            b
        })
    }

    /// Appends `other`, re-indexing its faces.
    pub fn append(&mut self, other: &TriangleMesh) {
        let base = self.positions.len() as u32;
        self.positions.extend_from_slice(&other.positions);
        self.indices.extend(other.indices.iter().map(|t| t.map(|i| i + base)));
    }

    /// Undirected edges used by a number of faces other than two.
    pub fn non_manifold_edges(&self) -> Vec<([u32; 2], usize)> {
        let mut count: HashMap<[u32; 2], usize> = HashMap::new();
        for t in &self.indices {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                *count.entry([a.min(b), a.max(b)]).or_default() += 1;
            }
        }
        let mut bad: Vec<_> = count.into_iter().filter(|&(_, c)| c != 2).collect();
        bad.sort_unstable();
        bad
    }
}

fn from_models(models: Vec<tobj::Model>) -> Result<TriangleMesh> {
    let mut mesh = TriangleMesh::default();
    for m in models {
        let p = &m.mesh.positions;
        let part = TriangleMesh {
            positions: p.chunks_exact(3).map(|c| Vec3::new(c[0], c[1], c[2])).collect(),
            indices: m.mesh.indices.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect(),
        };
        part.validate()?;
        mesh.append(&part);
    }
    Ok(mesh)
}

fn options() -> tobj::LoadOptions {
    tobj::LoadOptions { triangulate: true, ignore_points: true, ignore_lines: true, ..Default::default() }
}

/// Loads positions and faces of an OBJ file; polygons are fan-triangulated.
pub fn load_obj(path: impl AsRef<Path>) -> Result<TriangleMesh> {
    let (models, _) = tobj::load_obj(path.as_ref(), &options())?;
    from_models(models)
}

/// [`load_obj`] from an in-memory reader; material libraries are ignored.
pub fn parse_obj(reader: &mut impl BufRead) -> Result<TriangleMesh> {
    let (models, _) = tobj::load_obj_buf(reader, &options(), |_| Ok(Default::default()))?;
    from_models(models)
}
