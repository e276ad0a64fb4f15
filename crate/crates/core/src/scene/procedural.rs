use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use glam::Vec3;

use super::{SceneError, TriangleMesh};

/// Built-in test scenes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Procedural {
    /// Closed unit room with two blocks.
    Cornell,
    /// Icosahedron subdivided `n` times, projected onto the unit sphere.
    Sphere(u32),
    /// Cube `[-1, 1]^3` with every face split into `n x n` quads.
    Grid(u32),
}

impl fmt::Display for Procedural {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Cornell => write!(f, "cornell"),
            Self::Sphere(n) => write!(f, "sphere:{n}"),
            Self::Grid(n) => write!(f, "grid:{n}"),
        }
    }
}

impl FromStr for Procedural {
    type Err = SceneError;

    /// `cornell`, `sphere:N` or `grid:N`.
    fn from_str(s: &str) -> Result<Self, SceneError> {
        let bad = || SceneError::UnknownScene(s.to_string());
        let (kind, n) = match s.split_once(':') {
            Some((k, n)) => (k, Some(n.parse::<u32>().map_err(|_| bad())?)),
            None => (s, None),
        };
        match (kind, n) {
            ("cornell", None) => Ok(Self::Cornell),
            ("sphere", Some(n)) if n <= 7 => Ok(Self::Sphere(n)),
            ("grid", Some(n)) if (1..=512).contains(&n) => Ok(Self::Grid(n)),
            _ => Err(bad()),
        }
    }
}

impl Procedural {
    pub fn mesh(&self) -> TriangleMesh {
        match *self {
            Self::Cornell => cornell(),
            Self::Sphere(n) => sphere(n),
            Self::Grid(n) => grid(n),
        }
    }
}

/// Closed axis-aligned box with every face split into `n x n` quads; the
/// vertices on shared cube edges are shared.
pub fn lattice_box(lo: Vec3, hi: Vec3, n: u32) -> TriangleMesh {
    let mut mesh = TriangleMesh::default();
    let mut ids: HashMap<[u32; 3], u32> = HashMap::new();
    let mut vertex = |p: [u32; 3], mesh: &mut TriangleMesh| -> u32 {
        *ids.entry(p).or_insert_with(|| {
            let f = Vec3::from_array(p.map(|k| k as f32 / n as f32));
            mesh.positions.push(lo + (hi - lo) * f);
            mesh.positions.len() as u32 - 1
        })
    };
    for axis in 0..3 {
        let (u, v) = ((axis + 1) % 3, (axis + 2) % 3);
        for side in [0, n] {
            for i in 0..n {
                for j in 0..n {
                    let corner = |di: u32, dj: u32| {
                        let mut p = [0; 3];
                        p[axis] = side;
                        p[u] = i + di;
                        p[v] = j + dj;
                        p
                    };
                    let q = [corner(0, 0), corner(1, 0), corner(1, 1), corner(0, 1)].map(|c| vertex(c, &mut mesh));
                    // outward winding
                    if side == n {
                        mesh.indices.push([q[0], q[1], q[2]]);
                        mesh.indices.push([q[0], q[2], q[3]]);
                    } else {
                        mesh.indices.push([q[0], q[2], q[1]]);
                        mesh.indices.push([q[0], q[3], q[2]]);
                    }
                }
            }
        }
    }
    mesh
}

/// Unit room `[0,1]^3` (walls split 16 x 16) with a short and a tall block
/// (faces split 8 x 8). 4608 triangles.
pub fn cornell() -> TriangleMesh {
    let mut m = lattice_box(Vec3::ZERO, Vec3::ONE, 16);
    m.append(&lattice_box(Vec3::new(0.15, 0.0, 0.25), Vec3::new(0.45, 0.3, 0.55), 8));
    m.append(&lattice_box(Vec3::new(0.55, 0.0, 0.15), Vec3::new(0.85, 0.6, 0.45), 8));
    m
}

pub fn grid(n: u32) -> TriangleMesh {
    lattice_box(Vec3::splat(-1.0), Vec3::ONE, n.max(1))
}

/// Icosphere with `20 * 4^n` triangles and shared midpoints.
pub fn sphere(n: u32) -> TriangleMesh {
    let t = (1.0 + 5f32.sqrt()) / 2.0;
    let mut pos: Vec<Vec3> = [
        (-1.0, t, 0.0),
        (1.0, t, 0.0),
        (-1.0, -t, 0.0),
        (1.0, -t, 0.0),
        (0.0, -1.0, t),
        (0.0, 1.0, t),
        (0.0, -1.0, -t),
        (0.0, 1.0, -t),
        (t, 0.0, -1.0),
        (t, 0.0, 1.0),
        (-t, 0.0, -1.0),
        (-t, 0.0, 1.0),
    ]
    .iter()
    .map(|&(x, y, z)| Vec3::new(x, y, z).normalize())
    .collect();
    let mut faces: Vec<[u32; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..n {
        let mut mid: HashMap<(u32, u32), u32> = HashMap::new();
        let mut midpoint = |a: u32, b: u32, pos: &mut Vec<Vec3>| {
            *mid.entry((a.min(b), a.max(b))).or_insert_with(|| {
                pos.push(((pos[a as usize] + pos[b as usize]) * 0.5).normalize());
                pos.len() as u32 - 1
            })
        };
        let mut next = Vec::with_capacity(faces.len() * 4);
        for [a, b, c] in faces {
            let ab = midpoint(a, b, &mut pos);
            let bc = midpoint(b, c, &mut pos);
            let ca = midpoint(c, a, &mut pos);
            next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    TriangleMesh { positions: pos, indices: faces }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts() {
        assert_eq!(sphere(0).len(), 20);
        assert_eq!(sphere(3).len(), 1280);
        assert_eq!(grid(4).len(), 6 * 16 * 2);
        assert_eq!(cornell().len(), 6 * 256 * 2 + 2 * 6 * 64 * 2);
    }

    #[test]
    fn closed_meshes() {
        for m in [sphere(0), sphere(3), grid(1), grid(5), cornell()] {
            assert!(m.non_manifold_edges().is_empty());
            m.validate().unwrap();
        }
    }

    #[test]
    fn cornell_bounds_are_unit_box() {
        let b = cornell().bounds();
        assert_eq!((b.lo, b.hi), (Vec3::ZERO, Vec3::ONE));
    }

    #[test]
    fn parse_names() {
        for p in [Procedural::Cornell, Procedural::Sphere(3), Procedural::Grid(8)] {
            assert_eq!(p.to_string().parse::<Procedural>().unwrap(), p);
        }
        assert!("sphere".parse::<Procedural>().is_err());
        assert!("grid:0".parse::<Procedural>().is_err());
        assert!("teapot".parse::<Procedural>().is_err());
    }
}
