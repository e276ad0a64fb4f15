//! Meshes, procedural scenes, cameras, a small diffuse path tracer and
//! image output.

mod camera;
mod image;
mod mesh;
mod procedural;
mod render;

pub use camera::{Camera, WorldRay};
pub use image::{image_diff, write_image, DiffStats, Image, NO_HIT};
pub use mesh::{load_obj, parse_obj, TriangleMesh};
pub use procedural::{cornell, grid, lattice_box, sphere, Procedural};
pub use render::{path_trace, FixedTracer, FloatTracer, Render, RenderSettings, SurfaceHit, Tracer};

use thiserror::Error;

use crate::bvh::BuildError;
use crate::traversal::TraversalError;

#[derive(Debug, Error)]
pub enum SceneError {
    #[error("OBJ: {0}")]
    Obj(#[from] tobj::LoadError),
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("unknown scene '{0}' (expected cornell, sphere:N or grid:N)")]
    UnknownScene(String),
    #[error("degenerate camera")]
    InvalidCamera,
    #[error("image sizes differ: {0:?} vs {1:?}")]
    SizeMismatch((u32, u32), (u32, u32)),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error(transparent)]
    Traversal(#[from] TraversalError),
}

pub type Result<T> = std::result::Result<T, SceneError>;
