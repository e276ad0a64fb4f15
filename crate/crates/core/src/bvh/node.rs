//! Serialized node records.
//!
//! Uncompressed (`W` children):
//!
//! ```text
//! f32 lo_x[W] hi_x[W] lo_y[W] hi_y[W] lo_z[W] hi_z[W]   24 W bytes
//! union { i32 childOffsets[W] | u32 primitiveOffset, numPrimitives, pad }   4 W bytes
//! u8  type
//! pad to 64 / 116 / 228 bytes
//! ```
//!
//! Compressed:
//!
//! ```text
//! u8  lo_x[W] hi_x[W] lo_y[W] hi_y[W] lo_z[W] hi_z[W]   6 W bytes
//! union (as above)                                       4 W bytes
//! i32 origin[3]                                          12 bytes
//! i8  e[3]                                               3 bytes
//! u8  type
//! ```
//!
//! which gives 36 / 56 / 96 bytes. All integers are little endian.

use crate::quantize::{QBox, QTriangle, QuantFrame};

use super::{check_width, Result};

pub const MAX_WIDTH: usize = 8;

/// Bytes of a float triangle (three `f32` vertices).
pub const FLOAT_TRIANGLE_BYTES: usize = 36;

/// Record size in bytes for `(width, compressed)`.
pub fn node_byte_size(width: usize, compressed: bool) -> Result<usize> {
    check_width(width)?;
    Ok(match (width, compressed) {
        (2, false) => 64,
        (4, false) => 116,
        (8, false) => 228,
        (2, true) => 36,
        (4, true) => 56,
        _ => 96,
    })
}

/// Triangles that fit in the union of a compressed leaf next to the
/// primitive offset and a one-byte count.
pub fn inline_capacity(width: usize) -> usize {
    (4 * width).saturating_sub(5) / QTriangle::BYTES
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum NodeType {
    Inner = 0,
    Leaf = 1,
    /// Leaf whose triangles are stored in the node union.
    LeafInline = 2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodePayload {
    /// Child node indices; `-1` marks an empty slot.
    Inner { children: [i32; MAX_WIDTH] },
    /// Range of the triangle pool.
    Leaf { first: u32, count: u32 },
    /// Range of the triangle pool whose triangles are also stored inline.
    LeafInline { first: u32, count: u8, tris: [QTriangle; 3] },
}

impl NodePayload {
    pub fn node_type(&self) -> NodeType {
        match self {
            Self::Inner { .. } => NodeType::Inner,
            Self::Leaf { .. } => NodeType::Leaf,
            Self::LeafInline { .. } => NodeType::LeafInline,
        }
    }

    fn write(&self, width: usize, out: &mut Vec<u8>) {
        let start = out.len();
        match self {
            Self::Inner { children } => {
                for c in &children[..width] {
                    out.extend_from_slice(&c.to_le_bytes());
                }
            }
            Self::Leaf { first, count } => {
                out.extend_from_slice(&first.to_le_bytes());
                out.extend_from_slice(&count.to_le_bytes());
            }
            Self::LeafInline { first, count, tris } => {
                out.extend_from_slice(&first.to_le_bytes());
                out.push(*count);
                for t in &tris[..*count as usize] {
                    out.extend_from_slice(&t.to_bytes());
                }
            }
        }
        out.resize(start + 4 * width, 0);
    }

    fn read(kind: u8, width: usize, b: &[u8]) -> Option<Self> {
        let u32_at = |i: usize| u32::from_le_bytes(b[i..i + 4].try_into().unwrap());
        match kind {
            0 => {
                let mut children = [-1; MAX_WIDTH];
                for (i, c) in children.iter_mut().take(width).enumerate() {
                    *c = u32_at(4 * i) as i32;
                }
                Some(Self::Inner { children })
            }
            1 => Some(Self::Leaf { first: u32_at(0), count: u32_at(4) }),
            2 => {
                let count = b[4];
                let mut tris = [QTriangle { v: [[0; 3]; 3] }; 3];
                for (k, t) in tris.iter_mut().take(count as usize).enumerate() {
                    let o = 5 + 9 * k;
                    *t = QTriangle::from_bytes(b[o..o + 9].try_into().ok()?);
                }
                Some(Self::LeafInline { first: u32_at(0), count, tris })
            }
            _ => None,
        }
    }
}

/// Uncompressed node with float child bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WideNodeU {
    pub width: u8,
    /// `[axis][slot]`; empty slots hold `+inf` / `-inf`.
    pub lo: [[f32; MAX_WIDTH]; 3],
    pub hi: [[f32; MAX_WIDTH]; 3],
    pub payload: NodePayload,
}

impl WideNodeU {
    pub fn empty(width: usize, payload: NodePayload) -> Self {
        Self {
            width: width as u8,
            lo: [[f32::INFINITY; MAX_WIDTH]; 3],
            hi: [[f32::NEG_INFINITY; MAX_WIDTH]; 3],
            payload,
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let w = self.width as usize;
        let size = node_byte_size(w, false).expect("node width validated on construction");
        let mut out = Vec::with_capacity(size);
        for axis in 0..3 {
            for plane in [&self.lo[axis], &self.hi[axis]] {
                for v in &plane[..w] {
                    out.extend_from_slice(&v.to_le_bytes());
                }
            }
        }
        self.payload.write(w, &mut out);
        out.push(self.payload.node_type() as u8);
        out.resize(size, 0);
        out
    }

    pub fn from_bytes(width: usize, b: &[u8]) -> Option<Self> {
        if b.len() != node_byte_size(width, false).ok()? {
            return None;
        }
        let mut n = Self::empty(width, NodePayload::Leaf { first: 0, count: 0 });
        let f32_at = |i: usize| f32::from_le_bytes(b[i..i + 4].try_into().unwrap());
        for axis in 0..3 {
            for s in 0..width {
                n.lo[axis][s] = f32_at(4 * (2 * axis * width + s));
                n.hi[axis][s] = f32_at(4 * ((2 * axis + 1) * width + s));
            }
        }
        let u = 24 * width;
        n.payload = NodePayload::read(b[u + 4 * width], width, &b[u..u + 4 * width])?;
        Some(n)
    }
}

/// Compressed node: 8-bit child bounds in the node's own frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct WideNodeC {
    pub width: u8,
    /// `[axis][slot]`; empty slots hold `lo = 255, hi = 0`.
    pub lo: [[u8; MAX_WIDTH]; 3],
    pub hi: [[u8; MAX_WIDTH]; 3],
    pub frame: QuantFrame,
    pub payload: NodePayload,
}

impl WideNodeC {
    pub fn empty(width: usize, frame: QuantFrame, payload: NodePayload) -> Self {
        Self {
            width: width as u8,
            lo: [[QBox::EMPTY.lo[0]; MAX_WIDTH]; 3],
            hi: [[QBox::EMPTY.hi[0]; MAX_WIDTH]; 3],
            frame,
            payload,
        }
    }

    pub fn child_box(&self, slot: usize) -> QBox {
        QBox {
            lo: [self.lo[0][slot], self.lo[1][slot], self.lo[2][slot]],
            hi: [self.hi[0][slot], self.hi[1][slot], self.hi[2][slot]],
        }
    }

    pub fn set_child_box(&mut self, slot: usize, b: &QBox) {
        for axis in 0..3 {
            self.lo[axis][slot] = b.lo[axis];
            self.hi[axis][slot] = b.hi[axis];
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let w = self.width as usize;
        let size = node_byte_size(w, true).expect("node width validated on construction");
        let mut out = Vec::with_capacity(size);
        for axis in 0..3 {
            out.extend_from_slice(&self.lo[axis][..w]);
            out.extend_from_slice(&self.hi[axis][..w]);
        }
        self.payload.write(w, &mut out);
        for o in self.frame.origin {
            out.extend_from_slice(&o.to_le_bytes());
        }
        out.extend(self.frame.exp.map(|e| e as u8));
        out.push(self.payload.node_type() as u8);
        debug_assert_eq!(out.len(), size);
        out
    }

    pub fn from_bytes(width: usize, b: &[u8]) -> Option<Self> {
        if b.len() != node_byte_size(width, true).ok()? {
            return None;
        }
        let mut n = Self::empty(width, QuantFrame::default(), NodePayload::Leaf { first: 0, count: 0 });
        for axis in 0..3 {
            n.lo[axis][..width].copy_from_slice(&b[2 * axis * width..(2 * axis + 1) * width]);
            n.hi[axis][..width].copy_from_slice(&b[(2 * axis + 1) * width..(2 * axis + 2) * width]);
        }
        let u = 6 * width;
        let f = u + 4 * width;
        for axis in 0..3 {
            n.frame.origin[axis] = i32::from_le_bytes(b[f + 4 * axis..f + 4 * axis + 4].try_into().ok()?);
            n.frame.exp[axis] = b[f + 12 + axis] as i8;
        }
        n.payload = NodePayload::read(b[f + 15], width, &b[u..f])?;
        Some(n)
    }
}
