//! Local quantization frames, 8-bit bounds and triangles, and the scale
//! propagation passes that keep quantized meshes free of holes.
//!
//! A frame stores an integer origin measured in cells of `2^e` world units
//! per axis. Child boxes and triangle vertices are expressed as 8-bit grid
//! coordinates relative to that origin. Scale exponents are monotone along
//! the hierarchy (children are never coarser than their parents) and every
//! leaf shares one exponent triple, so vertices shared by neighbouring leaves
//! land on the same world grid point.

use glam::DVec3;

/// Exponent used for axes with zero extent, and the finest exponent any
/// frame may use.
pub const DEFAULT_MIN_EXPONENT: i32 = -20;

/// Number of cells addressable by an 8-bit coordinate.
pub const GRID_MAX: i64 = 255;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum QuantizeError {
    #[error("non-finite coordinate {0}")]
    NonFinite(f64),
    #[error("bounds are inverted: min {min} > max {max}")]
    InvertedBounds { min: f64, max: f64 },
    #[error("origin {value} on axis {axis} does not fit a 32-bit integer; scene extent or precision too large")]
    OriginOverflow { axis: usize, value: i128 },
    #[error("scale exponent {0} does not fit a signed byte")]
    ExponentOutOfRange(i32),
    #[error("grid coordinate {value} on axis {axis} lies outside [0, 255] of the frame")]
    FrameMismatch { axis: usize, value: i64 },
    #[error("child exponent {child} is coarser than parent exponent {parent} on axis {axis}")]
    CoarserChild { axis: usize, child: i32, parent: i32 },
}

pub type Result<T> = std::result::Result<T, QuantizeError>;

/// Per-node local coordinate system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct QuantFrame {
    /// Origin in cells of `2^exp` world units.
    pub origin: [i32; 3],
    pub exp: [i8; 3],
}

impl QuantFrame {
    pub fn cell_size(&self, axis: usize) -> f64 {
        f64::from(self.exp[axis]).exp2()
    }

    pub fn origin_real(&self, axis: usize) -> f64 {
        f64::from(self.origin[axis]) * self.cell_size(axis)
    }

    pub fn exp_i32(&self) -> [i32; 3] {
        self.exp.map(i32::from)
    }

    /// World-space box spanned by `qbox` in this frame.
    pub fn dequantize(&self, qbox: &QBox) -> (DVec3, DVec3) {
        let f = |axis: usize, c: u8| (f64::from(self.origin[axis]) + f64::from(c)) * self.cell_size(axis);
        (
            DVec3::new(f(0, qbox.lo[0]), f(1, qbox.lo[1]), f(2, qbox.lo[2])),
            DVec3::new(f(0, qbox.hi[0]), f(1, qbox.hi[1]), f(2, qbox.hi[2])),
        )
    }
}

/// Child box in the 8-bit grid of its parent frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct QBox {
    pub lo: [u8; 3],
    pub hi: [u8; 3],
}

impl QBox {
    /// Encoding of an unused child slot; `lo > hi` fails every slab test.
    pub const EMPTY: QBox = QBox { lo: [255; 3], hi: [0; 3] };

    pub fn is_empty_slot(&self) -> bool {
        *self == Self::EMPTY
    }

    /// Cells covered on each axis, or `None` if any axis is inverted.
    pub fn extent(&self) -> Option<[i64; 3]> {
        let mut e = [0; 3];
        for a in 0..3 {
            if self.lo[a] > self.hi[a] {
                return None;
            }
            e[a] = i64::from(self.hi[a]) - i64::from(self.lo[a]);
        }
        Some(e)
    }
}

/// Triangle with vertices on the 8-bit grid of its leaf frame (9 bytes).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct QTriangle {
    pub v: [[u8; 3]; 3],
}

impl QTriangle {
    pub const BYTES: usize = 9;

    pub fn to_bytes(&self) -> [u8; 9] {
        let mut out = [0u8; 9];
        for (i, v) in self.v.iter().enumerate() {
            out[3 * i..3 * i + 3].copy_from_slice(v);
        }
        out
    }

    pub fn from_bytes(b: [u8; 9]) -> Self {
        Self { v: [[b[0], b[1], b[2]], [b[3], b[4], b[5]], [b[6], b[7], b[8]]] }
    }
}

fn finite(x: f64) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(QuantizeError::NonFinite(x))
    }
}

fn exp2i(e: i32) -> f64 {
    f64::from(e).exp2()
}

/// `x / 2^e`; exact for finite inputs away from the f64 exponent limits.
fn in_cells(x: f64, e: i32) -> f64 {
    x * exp2i(-e)
}

fn to_i32(axis: usize, v: i128) -> Result<i32> {
    i32::try_from(v).map_err(|_| QuantizeError::OriginOverflow { axis, value: v })
}

fn to_exp(e: i32) -> Result<i8> {
    i8::try_from(e).map_err(|_| QuantizeError::ExponentOutOfRange(e))
}

/// Smallest power-of-two exponent `e` such that `max - min <= 255 * 2^e`,
/// never finer than `min_exp`.
pub fn compute_scale(min: f64, max: f64, min_exp: i32) -> Result<i32> {
    let (min, max) = (finite(min)?, finite(max)?);
    if max < min {
        return Err(QuantizeError::InvertedBounds { min, max });
    }
    let extent = max - min;
    if extent == 0.0 {
        return Ok(min_exp);
    }
    let fits = |e: i32| extent <= GRID_MAX as f64 * exp2i(e);
    let mut e = (extent / GRID_MAX as f64).log2().ceil() as i32;
    // log2 is inexact; settle on the exact boundary
    while !fits(e) {
        e += 1;
    }
    while fits(e - 1) {
        e -= 1;
    }
    Ok(e.max(min_exp))
}

/// `floor(p / 2^scale)`.
pub fn compute_root_origin(p: f64, scale: i32) -> Result<i32> {
    let c = in_cells(finite(p)?, scale).floor();
    if c.abs() > 2f64.powi(40) {
        return Err(QuantizeError::OriginOverflow { axis: 0, value: c as i128 });
    }
    to_i32(0, c as i128)
}

/// Frame for a root node covering `[lo, hi]`: Eq.-1 scales coarsened until
/// the box, measured from its floored origin, fits into 255 cells. Exponents
/// below `min_exp` per axis are raised to it.
pub fn root_frame(lo: DVec3, hi: DVec3, min_exp: [i32; 3]) -> Result<QuantFrame> {
    let mut frame = QuantFrame::default();
    for axis in 0..3 {
        let mut e = compute_scale(lo[axis], hi[axis], min_exp[axis])?.max(min_exp[axis]);
        loop {
            let o = in_cells(lo[axis], e).floor();
            let top = in_cells(hi[axis], e).ceil();
            if top - o <= GRID_MAX as f64 {
                frame.origin[axis] = to_i32(axis, o as i128)?;
                break;
            }
            e += 1;
        }
        frame.exp[axis] = to_exp(e)?;
    }
    Ok(frame)
}

/// Conservative 8-bit box: lower planes rounded down, upper planes up.
pub fn quantize_bounds(frame: &QuantFrame, lo: DVec3, hi: DVec3) -> Result<QBox> {
    let mut q = QBox { lo: [0; 3], hi: [0; 3] };
    for axis in 0..3 {
        let e = i32::from(frame.exp[axis]);
        let o = i64::from(frame.origin[axis]);
        let l = in_cells(finite(lo[axis])?, e).floor() as i64 - o;
        let h = in_cells(finite(hi[axis])?, e).ceil() as i64 - o;
        for v in [l, h] {
            if !(0..=GRID_MAX).contains(&v) {
                return Err(QuantizeError::FrameMismatch { axis, value: v });
            }
        }
        q.lo[axis] = l as u8;
        q.hi[axis] = h as u8;
    }
    Ok(q)
}

/// Grid point nearest to `x` on an axis with cell size `2^e`, ties toward
/// +infinity, in absolute (world-grid) cells.
pub fn world_grid_coord(x: f64, e: i32) -> i64 {
    (in_cells(x, e) + 0.5).floor() as i64
}

/// Snaps each vertex to the nearest grid point of the leaf frame.
pub fn quantize_triangle(frame: &QuantFrame, verts: [DVec3; 3]) -> Result<QTriangle> {
    let mut t = QTriangle { v: [[0; 3]; 3] };
    for (k, v) in verts.iter().enumerate() {
        for axis in 0..3 {
            let g = world_grid_coord(finite(v[axis])?, i32::from(frame.exp[axis])) - i64::from(frame.origin[axis]);
            if !(0..=GRID_MAX).contains(&g) {
                return Err(QuantizeError::FrameMismatch { axis, value: g });
            }
            t.v[k][axis] = g as u8;
        }
    }
    Ok(t)
}

/// Frame of a child whose box is `child_box` in `parent`. The child origin is
/// the box's lower corner re-expressed in the child's finer cells.
pub fn derive_child_frame(parent: &QuantFrame, child_box: &QBox, child_exp: [i32; 3]) -> Result<QuantFrame> {
    let mut f = QuantFrame::default();
    for axis in 0..3 {
        let pe = i32::from(parent.exp[axis]);
        let ce = child_exp[axis];
        if ce > pe {
            return Err(QuantizeError::CoarserChild { axis, child: ce, parent: pe });
        }
        let shift = (pe - ce) as u32;
        let base = i128::from(parent.origin[axis]) + i128::from(child_box.lo[axis]);
        if shift > 64 {
            return Err(QuantizeError::OriginOverflow { axis, value: base });
        }
        let o = base.checked_mul(1i128 << shift).ok_or(QuantizeError::OriginOverflow { axis, value: base })?;
        f.origin[axis] = to_i32(axis, o)?;
        f.exp[axis] = to_exp(ce)?;
    }
    Ok(f)
}

/// Per-axis coarsest exponent over all leaves.
pub fn broadcast_leaf_scales(leaf_scales: &[[i32; 3]]) -> Option<[i32; 3]> {
    let first = *leaf_scales.first()?;
    Some(leaf_scales.iter().fold(first, |acc, s| [acc[0].max(s[0]), acc[1].max(s[1]), acc[2].max(s[2])]))
}

/// Raises every inner node's exponents to at least the maximum of its
/// children, bottom-up. `children[n]` lists the child node indices of node
/// `n` (empty for leaves); `scales[n]` holds the node's own exponents on
/// input. Node 0 is the root.
pub fn propagate_scales_up(children: &[Vec<usize>], scales: &[[i32; 3]]) -> Vec<[i32; 3]> {
    let mut out = scales.to_vec();
    if out.is_empty() {
        return out;
    }
    // iterative post-order
    let mut order = Vec::with_capacity(children.len());
    let mut stack = vec![0usize];
    while let Some(n) = stack.pop() {
        order.push(n);
        stack.extend(children[n].iter().copied());
    }
    for &n in order.iter().rev() {
        for &c in &children[n] {
            for a in 0..3 {
                out[n][a] = out[n][a].max(out[c][a]);
            }
        }
    }
    out
}
