//! Points, rectangles and boxes shared by the measure model and the grid.

use crate::error::{Error, Result};

/// A point of R^3; two-dimensional objects keep the third coordinate at zero.
pub type Point = [f64; 3];

pub fn dist(a: Point, b: Point) -> f64 {
    let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
}

pub fn lerp(a: Point, b: Point, t: f64) -> Point {
    [
        a[0] + t * (b[0] - a[0]),
        a[1] + t * (b[1] - a[1]),
        a[2] + t * (b[2] - a[2]),
    ]
}

/// Distance from `x` to the segment `[a, b]`, and the clamped projection
/// parameter in `[0, 1]`.
pub fn segment_distance(x: Point, a: Point, b: Point) -> (f64, f64) {
    let ab = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
    let ax = [x[0] - a[0], x[1] - a[1], x[2] - a[2]];
    let len2 = ab[0] * ab[0] + ab[1] * ab[1] + ab[2] * ab[2];
    if len2 == 0.0 {
        return (dist(x, a), 0.0);
    }
    let t = ((ax[0] * ab[0] + ax[1] * ab[1] + ax[2] * ab[2]) / len2).clamp(0.0, 1.0);
    (dist(x, lerp(a, b, t)), t)
}

/// Axis-aligned rectangle in the plane (the PDE domain).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self> {
        if !(x0.is_finite() && y0.is_finite() && x1.is_finite() && y1.is_finite())
            || x1 <= x0
            || y1 <= y0
        {
            return Err(Error::DegenerateRectangle);
        }
        Ok(Rect { x0, y0, x1, y1 })
    }

    pub fn unit_square() -> Self {
        Rect {
            x0: 0.0,
            y0: 0.0,
            x1: 1.0,
            y1: 1.0,
        }
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn diameter(&self) -> f64 {
        self.width().hypot(self.height())
    }

    /// Whether `(x, y)` lies in the closed rectangle.
    pub fn contains_closed(&self, x: f64, y: f64) -> bool {
        x >= self.x0 && x <= self.x1 && y >= self.y0 && y <= self.y1
    }

    /// Whether `(x, y)` lies in the open rectangle.
    pub fn contains_open(&self, x: f64, y: f64) -> bool {
        x > self.x0 && x < self.x1 && y > self.y0 && y < self.y1
    }
}

/// Axis-aligned box in R^N, N = 2 or 3; for N = 2 the z-extent is `[0, 0]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxN {
    pub lo: Point,
    pub hi: Point,
}

impl BoxN {
    pub fn from_rect(r: Rect) -> Self {
        BoxN {
            lo: [r.x0, r.y0, 0.0],
            hi: [r.x1, r.y1, 0.0],
        }
    }

    pub fn new(lo: Point, hi: Point, dim: u8) -> Result<Self> {
        let active = dim as usize;
        for k in 0..active {
            if !(lo[k].is_finite() && hi[k].is_finite()) || hi[k] <= lo[k] {
                return Err(Error::DegenerateRectangle);
            }
        }
        let mut lo = lo;
        let mut hi = hi;
        for k in active..3 {
            lo[k] = 0.0;
            hi[k] = 0.0;
        }
        Ok(BoxN { lo, hi })
    }

    pub fn contains_open(&self, p: Point, dim: u8) -> bool {
        (0..dim as usize).all(|k| p[k] > self.lo[k] && p[k] < self.hi[k])
    }

    pub fn rect(&self) -> Rect {
        Rect {
            x0: self.lo[0],
            y0: self.lo[1],
            x1: self.hi[0],
            y1: self.hi[1],
        }
    }
}
