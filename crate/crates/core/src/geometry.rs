//! Axis-aligned boxes in continuous pixel coordinates.

use serde::{Deserialize, Serialize};

/// Left/top edge plus extent, in pixels. Serialized as `[x, y, w, h]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 4]", into = "[f64; 4]")]
pub struct BoundingBox {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl From<[f64; 4]> for BoundingBox {
    fn from([x, y, w, h]: [f64; 4]) -> Self {
        Self { x, y, w, h }
    }
}

impl From<BoundingBox> for [f64; 4] {
    fn from(b: BoundingBox) -> Self {
        [b.x, b.y, b.w, b.h]
    }
}

/// Frame dimensions in pixels. Serialized as `[width, height]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "[u32; 2]", into = "[u32; 2]")]
pub struct FrameSize {
    pub width: u32,
    pub height: u32,
}

impl FrameSize {
    pub const fn new(width: u32, height: u32) -> Self {
        Self { width, height }
    }
}

impl From<[u32; 2]> for FrameSize {
    fn from([width, height]: [u32; 2]) -> Self {
        Self { width, height }
    }
}

impl From<FrameSize> for [u32; 2] {
    fn from(s: FrameSize) -> Self {
        [s.width, s.height]
    }
}

impl BoundingBox {
    pub const fn new(x: f64, y: f64, w: f64, h: f64) -> Self {
        Self { x, y, w, h }
    }

    /// Tightest axis-aligned container of a 4-corner polygon given as
    /// `x1,y1,x2,y2,x3,y3,x4,y4`. The result may have zero area.
    pub fn from_polygon(coords: &[f64; 8]) -> Self {
        let xs = [coords[0], coords[2], coords[4], coords[6]];
        let ys = [coords[1], coords[3], coords[5], coords[7]];
        let min_x = xs.iter().copied().fold(f64::INFINITY, f64::min);
        let max_x = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min_y = ys.iter().copied().fold(f64::INFINITY, f64::min);
        let max_y = ys.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Self::new(min_x, min_y, max_x - min_x, max_y - min_y)
    }

    /// Corners clockwise from top-left, in polygon line order.
    pub fn corners(&self) -> [f64; 8] {
        let (r, b) = (self.right(), self.bottom());
        [self.x, self.y, r, self.y, r, b, self.x, b]
    }

    pub fn right(&self) -> f64 {
        self.x + self.w
    }

    pub fn bottom(&self) -> f64 {
        self.y + self.h
    }

    pub fn area(&self) -> f64 {
        self.w.max(0.0) * self.h.max(0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.w.is_finite() && self.h.is_finite()
    }

    /// Strictly positive width and height.
    pub fn has_area(&self) -> bool {
        self.w > 0.0 && self.h > 0.0
    }

    pub fn intersection_area(&self, other: &BoundingBox) -> f64 {
        let w = self.right().min(other.right()) - self.x.max(other.x);
        let h = self.bottom().min(other.bottom()) - self.y.max(other.y);
        if w <= 0.0 || h <= 0.0 {
            0.0
        } else {
            w * h
        }
    }

    pub fn fits_in(&self, frame: FrameSize) -> bool {
        self.x >= 0.0
            && self.y >= 0.0
            && self.right() <= f64::from(frame.width)
            && self.bottom() <= f64::from(frame.height)
    }

    /// Intersection with the frame rectangle. Parts outside the frame are
    /// cut away; a box entirely outside collapses to zero extent.
    pub fn clip_to(&self, frame: FrameSize) -> Self {
        let (fw, fh) = (f64::from(frame.width), f64::from(frame.height));
        let x0 = self.x.clamp(0.0, fw);
        let y0 = self.y.clamp(0.0, fh);
        let x1 = self.right().clamp(0.0, fw);
        let y1 = self.bottom().clamp(0.0, fh);
        Self::new(x0, y0, (x1 - x0).max(0.0), (y1 - y0).max(0.0))
    }

    /// Translate the box into the frame, shrinking only if it is larger
    /// than the frame itself.
    pub fn shift_into(&self, frame: FrameSize) -> Self {
        let (fw, fh) = (f64::from(frame.width), f64::from(frame.height));
        let w = self.w.min(fw);
        let h = self.h.min(fh);
        Self::new(self.x.clamp(0.0, fw - w), self.y.clamp(0.0, fh - h), w, h)
    }
}
