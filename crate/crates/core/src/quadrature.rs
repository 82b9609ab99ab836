//! Gauss rules and adaptive composite quadrature.
//!
//! All adaptive routines bisect recursively and accept a panel when the
//! whole-panel rule agrees with the sum over the halves to the requested
//! absolute tolerance. Integrable singularities are handled by a depth cap:
//! panels that never converge keep shrinking geometrically, so their total
//! contribution is bounded by the last bisected estimate.

use crate::geometry::{lerp, Point, Rect};

/// 5-point Gauss-Legendre abscissae on [-1, 1].
const GL5_X: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683,
    0.0,
    0.538_469_310_105_683,
    0.906_179_845_938_664,
];
const GL5_W: [f64; 5] = [
    0.236_926_885_056_189,
    0.478_628_670_499_366,
    0.568_888_888_888_889,
    0.478_628_670_499_366,
    0.236_926_885_056_189,
];

/// 3-point Gauss-Legendre abscissae on [-1, 1] (degree 5 in tensor form).
const GL3_X: [f64; 3] = [-0.774_596_669_241_483, 0.0, 0.774_596_669_241_483];
const GL3_W: [f64; 3] = [
    0.555_555_555_555_556,
    0.888_888_888_888_889,
    0.555_555_555_555_556,
];

/// 2-point Gauss-Legendre rule, exact for cubics.
const GL2_X: [f64; 2] = [-0.577_350_269_189_626, 0.577_350_269_189_626];

pub fn gauss5<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> f64 {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut s = 0.0;
    for k in 0..5 {
        s += GL5_W[k] * f(c + h * GL5_X[k]);
    }
    s * h
}

pub fn gauss2<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> f64 {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    h * (f(c + h * GL2_X[0]) + f(c + h * GL2_X[1]))
}

/// Adaptive line quadrature with absolute tolerance `tol`.
pub fn adaptive_line<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64, tol: f64) -> f64 {
    fn rec<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let left = gauss5(f, a, m);
        let right = gauss5(f, m, b);
        if depth == 0 || (left + right - whole).abs() <= tol {
            return left + right;
        }
        rec(f, a, m, left, 0.5 * tol, depth - 1) + rec(f, m, b, right, 0.5 * tol, depth - 1)
    }
    let whole = gauss5(f, a, b);
    rec(f, a, b, whole, tol, 48)
}

/// Adaptive quadrature of `f(p)` along the segment `[a, b]` in R^3,
/// with optional extra breakpoints (parameters in (0, 1)) where the
/// integrand is known to be rough.
pub fn adaptive_segment<F: FnMut(Point) -> f64>(
    f: &mut F,
    a: Point,
    b: Point,
    breaks: &[f64],
    tol: f64,
) -> f64 {
    let len = crate::geometry::dist(a, b);
    if len == 0.0 {
        return 0.0;
    }
    let mut cuts: Vec<f64> = vec![0.0, 1.0];
    cuts.extend(breaks.iter().copied().filter(|t| *t > 0.0 && *t < 1.0));
    cuts.sort_by(|p, q| p.partial_cmp(q).unwrap());
    cuts.dedup();
    let mut g = |t: f64| f(lerp(a, b, t));
    let mut total = 0.0;
    for w in cuts.windows(2) {
        total += adaptive_line(&mut g, w[0], w[1], tol * (w[1] - w[0]).max(1e-3));
    }
    total * len
}

fn gauss3x3<F: FnMut(f64, f64) -> f64>(f: &mut F, r: Rect) -> f64 {
    let cx = 0.5 * (r.x0 + r.x1);
    let cy = 0.5 * (r.y0 + r.y1);
    let hx = 0.5 * r.width();
    let hy = 0.5 * r.height();
    let mut s = 0.0;
    for (i, &xi) in GL3_X.iter().enumerate() {
        for (j, &yj) in GL3_X.iter().enumerate() {
            s += GL3_W[i] * GL3_W[j] * f(cx + hx * xi, cy + hy * yj);
        }
    }
    s * hx * hy
}

/// Adaptive tensor quadrature over a rectangle (quadtree refinement).
pub fn adaptive_rect<F: FnMut(f64, f64) -> f64>(f: &mut F, r: Rect, tol: f64) -> f64 {
    fn rec<F: FnMut(f64, f64) -> f64>(f: &mut F, r: Rect, whole: f64, tol: f64, depth: u32) -> f64 {
        let cx = 0.5 * (r.x0 + r.x1);
        let cy = 0.5 * (r.y0 + r.y1);
        let kids = [
            Rect { x0: r.x0, y0: r.y0, x1: cx, y1: cy },
            Rect { x0: cx, y0: r.y0, x1: r.x1, y1: cy },
            Rect { x0: r.x0, y0: cy, x1: cx, y1: r.y1 },
            Rect { x0: cx, y0: cy, x1: r.x1, y1: r.y1 },
        ];
        let parts: Vec<f64> = kids.iter().map(|k| gauss3x3(f, *k)).collect();
        let sum: f64 = parts.iter().sum();
        if depth == 0 || (sum - whole).abs() <= tol {
            return sum;
        }
        // half-tolerance per child: integrands here are smooth away from a
        // point or curve, so refinement stays concentrated near it and the
        // budgets of the smooth children go unused
        kids.iter()
            .zip(parts)
            .map(|(k, p)| rec(f, *k, p, 0.5 * tol, depth - 1))
            .sum()
    }
    let whole = gauss3x3(f, r);
    rec(f, r, whole, tol, 22)
}

fn gauss3x3x3<F: FnMut(Point) -> f64>(f: &mut F, lo: Point, hi: Point) -> f64 {
    let c = [
        0.5 * (lo[0] + hi[0]),
        0.5 * (lo[1] + hi[1]),
        0.5 * (lo[2] + hi[2]),
    ];
    let h = [
        0.5 * (hi[0] - lo[0]),
        0.5 * (hi[1] - lo[1]),
        0.5 * (hi[2] - lo[2]),
    ];
    let mut s = 0.0;
    for (i, &xi) in GL3_X.iter().enumerate() {
        for (j, &yj) in GL3_X.iter().enumerate() {
            for (k, &zk) in GL3_X.iter().enumerate() {
                s += GL3_W[i]
                    * GL3_W[j]
                    * GL3_W[k]
                    * f([c[0] + h[0] * xi, c[1] + h[1] * yj, c[2] + h[2] * zk]);
            }
        }
    }
    s * h[0] * h[1] * h[2]
}

/// Adaptive tensor quadrature over a box (octree refinement).
pub fn adaptive_box<F: FnMut(Point) -> f64>(f: &mut F, lo: Point, hi: Point, tol: f64) -> f64 {
    fn rec<F: FnMut(Point) -> f64>(
        f: &mut F,
        lo: Point,
        hi: Point,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let c = [
            0.5 * (lo[0] + hi[0]),
            0.5 * (lo[1] + hi[1]),
            0.5 * (lo[2] + hi[2]),
        ];
        let mut sum = 0.0;
        let mut kids = Vec::with_capacity(8);
        for dx in 0..2 {
            for dy in 0..2 {
                for dz in 0..2 {
                    let klo = [
                        if dx == 0 { lo[0] } else { c[0] },
                        if dy == 0 { lo[1] } else { c[1] },
                        if dz == 0 { lo[2] } else { c[2] },
                    ];
                    let khi = [
                        if dx == 0 { c[0] } else { hi[0] },
                        if dy == 0 { c[1] } else { hi[1] },
                        if dz == 0 { c[2] } else { hi[2] },
                    ];
                    let part = gauss3x3x3(f, klo, khi);
                    sum += part;
                    kids.push((klo, khi, part));
                }
            }
        }
        if depth == 0 || (sum - whole).abs() <= tol {
            return sum;
        }
        kids.into_iter()
            .map(|(klo, khi, part)| rec(f, klo, khi, part, 0.5 * tol, depth - 1))
            .sum()
    }
    let whole = gauss3x3x3(f, lo, hi);
    rec(f, lo, hi, whole, tol, 12)
}

/// Degree-4 six-point rule on a triangle; returns the integral of `f`.
pub fn gauss_triangle<F: FnMut(f64, f64) -> f64>(
    f: &mut F,
    p0: (f64, f64),
    p1: (f64, f64),
    p2: (f64, f64),
) -> f64 {
    const A1: f64 = 0.445_948_490_915_965;
    const W1: f64 = 0.223_381_589_678_011;
    const A2: f64 = 0.091_576_213_509_771;
    const W2: f64 = 0.109_951_743_655_322;
    let bary = [
        (A1, A1, 1.0 - 2.0 * A1, W1),
        (A1, 1.0 - 2.0 * A1, A1, W1),
        (1.0 - 2.0 * A1, A1, A1, W1),
        (A2, A2, 1.0 - 2.0 * A2, W2),
        (A2, 1.0 - 2.0 * A2, A2, W2),
        (1.0 - 2.0 * A2, A2, A2, W2),
    ];
    let area = 0.5
        * ((p1.0 - p0.0) * (p2.1 - p0.1) - (p2.0 - p0.0) * (p1.1 - p0.1)).abs();
    let mut s = 0.0;
    for (l0, l1, l2, w) in bary {
        let x = l0 * p0.0 + l1 * p1.0 + l2 * p2.0;
        let y = l0 * p0.1 + l1 * p1.1 + l2 * p2.1;
        s += w * f(x, y);
    }
    s * area
}
