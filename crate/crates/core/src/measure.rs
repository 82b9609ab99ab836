//! Bounded Radon measures on a rectangle or box, represented as a diffuse
//! density plus atoms plus polyline pieces, with Jordan and capacity
//! decompositions and a structural mutual-singularity predicate.
//!
//! The representable class is deliberately small: densities against Lebesgue
//! measure, finitely many atoms, and finitely many constant-density polyline
//! pieces. In the plane, points are the only capacity-zero carriers of the
//! model (rectifiable curves are not); in three dimensions both points and
//! curves carry capacity zero.

use crate::error::{Error, Result};
use crate::geometry::{dist, BoxN, Point};
use crate::quadrature::{adaptive_box, adaptive_rect, adaptive_segment};

/// A point mass; `mass` is signed and nonzero.
#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub location: Point,
    pub mass: f64,
}

/// A polyline carrying a constant signed density per unit length.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvePiece {
    pub polyline: Vec<Point>,
    pub linear_density: f64,
}

impl CurvePiece {
    pub fn length(&self) -> f64 {
        self.polyline.windows(2).map(|w| dist(w[0], w[1])).sum()
    }
}

/// A diffuse density against Lebesgue measure, given in closed form or as
/// bilinear nodal samples. `PosPart`/`NegPart`/`Scaled` exist so that the
/// Jordan split and measure arithmetic stay exact pointwise.
#[derive(Debug, Clone, PartialEq)]
pub enum Density {
    Const(f64),
    /// `a . x + c` with the gradient in the active coordinates.
    Affine { a: Point, c: f64 },
    /// `amp * sin(pi (x-x0)/w) * sin(pi (y-y0)/h)` on the domain rectangle.
    SinSin { amp: f64 },
    /// Bilinear interpolation of nodal samples over the domain rectangle
    /// (two-dimensional only); `values` is row-major with `(nx+1)*(ny+1)`
    /// entries.
    Samples { nx: usize, ny: usize, values: Vec<f64> },
    Scaled(f64, Box<Density>),
    Sum(Vec<Density>),
    PosPart(Box<Density>),
    NegPart(Box<Density>),
}

impl Density {
    pub fn eval(&self, p: Point, domain: &BoxN) -> f64 {
        match self {
            Density::Const(c) => *c,
            Density::Affine { a, c } => a[0] * p[0] + a[1] * p[1] + a[2] * p[2] + c,
            Density::SinSin { amp } => {
                let w = domain.hi[0] - domain.lo[0];
                let h = domain.hi[1] - domain.lo[1];
                amp * (std::f64::consts::PI * (p[0] - domain.lo[0]) / w).sin()
                    * (std::f64::consts::PI * (p[1] - domain.lo[1]) / h).sin()
            }
            Density::Samples { nx, ny, values } => {
                let w = domain.hi[0] - domain.lo[0];
                let h = domain.hi[1] - domain.lo[1];
                let sx = ((p[0] - domain.lo[0]) / w * *nx as f64).clamp(0.0, *nx as f64);
                let sy = ((p[1] - domain.lo[1]) / h * *ny as f64).clamp(0.0, *ny as f64);
                let i = (sx.floor() as usize).min(nx - 1);
                let j = (sy.floor() as usize).min(ny - 1);
                let fx = sx - i as f64;
                let fy = sy - j as f64;
                let at = |ii: usize, jj: usize| values[jj * (nx + 1) + ii];
                (1.0 - fx) * (1.0 - fy) * at(i, j)
                    + fx * (1.0 - fy) * at(i + 1, j)
                    + (1.0 - fx) * fy * at(i, j + 1)
                    + fx * fy * at(i + 1, j + 1)
            }
            Density::Scaled(s, d) => s * d.eval(p, domain),
            Density::Sum(terms) => terms.iter().map(|d| d.eval(p, domain)).sum(),
            Density::PosPart(d) => d.eval(p, domain).max(0.0),
            Density::NegPart(d) => (-d.eval(p, domain)).max(0.0),
        }
    }
}

/// A bounded Radon measure with explicit carriers.
#[derive(Debug, Clone, PartialEq)]
pub struct Measure {
    dim: u8,
    domain: BoxN,
    densities: Vec<Density>,
    atoms: Vec<Atom>,
    curves: Vec<CurvePiece>,
}

impl Measure {
    pub fn new(dim: u8, domain: BoxN) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::UnsupportedDimension(dim));
        }
        Ok(Measure {
            dim,
            domain,
            densities: Vec::new(),
            atoms: Vec::new(),
            curves: Vec::new(),
        })
    }

    /// Zero measure on the unit square.
    pub fn zero2() -> Self {
        Measure::new(2, BoxN::from_rect(crate::geometry::Rect::unit_square())).unwrap()
    }

    pub fn dim(&self) -> u8 {
        self.dim
    }

    pub fn domain(&self) -> &BoxN {
        &self.domain
    }

    pub fn densities(&self) -> &[Density] {
        &self.densities
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn curves(&self) -> &[CurvePiece] {
        &self.curves
    }

    pub fn is_zero(&self) -> bool {
        self.densities.is_empty() && self.atoms.is_empty() && self.curves.is_empty()
    }

    /// Pointwise value of the total diffuse density.
    pub fn density_at(&self, p: Point) -> f64 {
        self.densities.iter().map(|d| d.eval(p, &self.domain)).sum()
    }

    pub fn with_atom(mut self, location: Point, mass: f64) -> Result<Self> {
        let mut location = location;
        if self.dim == 2 {
            location[2] = 0.0;
        }
        if mass == 0.0 || !mass.is_finite() {
            return Err(Error::InvalidMeasure(format!("atom mass {mass} invalid")));
        }
        if !self.domain.contains_open(location, self.dim) {
            return Err(Error::InvalidMeasure(format!(
                "atom at {location:?} is not in the open domain"
            )));
        }
        if self.atoms.iter().any(|a| a.location == location) {
            return Err(Error::InvalidMeasure(format!(
                "two atoms share the location {location:?}"
            )));
        }
        self.atoms.push(Atom { location, mass });
        Ok(self)
    }

    pub fn with_curve(mut self, polyline: Vec<Point>, linear_density: f64) -> Result<Self> {
        if polyline.len() < 2 {
            return Err(Error::InvalidMeasure(
                "polyline needs at least two points".into(),
            ));
        }
        let mut polyline = polyline;
        if self.dim == 2 {
            for p in &mut polyline {
                p[2] = 0.0;
            }
        }
        if polyline.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidMeasure(
                "consecutive polyline points coincide".into(),
            ));
        }
        if polyline
            .iter()
            .any(|p| !self.domain.contains_open(*p, self.dim))
        {
            return Err(Error::InvalidMeasure(
                "polyline leaves the open domain".into(),
            ));
        }
        if !linear_density.is_finite() {
            return Err(Error::InvalidMeasure("curve density invalid".into()));
        }
        self.curves.push(CurvePiece {
            polyline,
            linear_density,
        });
        Ok(self)
    }

    pub fn with_density(mut self, d: Density) -> Result<Self> {
        fn check(d: &Density, dim: u8) -> Result<()> {
            let finite = |vals: &[f64]| {
                if vals.iter().all(|v| v.is_finite()) {
                    Ok(())
                } else {
                    Err(Error::InvalidMeasure("density parameter not finite".into()))
                }
            };
            match d {
                Density::Const(c) => finite(&[*c]),
                Density::Affine { a, c } => finite(&[a[0], a[1], a[2], *c]),
                Density::SinSin { amp } => finite(&[*amp]),
                Density::Samples { nx, ny, values } => {
                    if dim != 2 {
                        return Err(Error::InvalidMeasure(
                            "sampled densities are two-dimensional".into(),
                        ));
                    }
                    if *nx == 0 || *ny == 0 || values.len() != (nx + 1) * (ny + 1) {
                        return Err(Error::InvalidMeasure("sample grid shape mismatch".into()));
                    }
                    finite(values)
                }
                Density::Scaled(s, inner) => {
                    finite(&[*s])?;
                    check(inner, dim)
                }
                Density::Sum(terms) => terms.iter().try_for_each(|t| check(t, dim)),
                Density::PosPart(inner) | Density::NegPart(inner) => check(inner, dim),
            }
        }
        check(&d, self.dim)?;
        self.densities.push(d);
        Ok(self)
    }

    /// `self + scale * other` with atoms at shared locations merged (and
    /// dropped when the merged mass vanishes).
    pub fn linear_combination(&self, other: &Measure, scale: f64) -> Result<Measure> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        let mut out = Measure::new(self.dim, self.domain)?;
        out.densities = self.densities.clone();
        for d in &other.densities {
            out.densities
                .push(Density::Scaled(scale, Box::new(d.clone())));
        }
        let mut atoms: Vec<Atom> = self.atoms.clone();
        for a in &other.atoms {
            if let Some(existing) = atoms.iter_mut().find(|e| e.location == a.location) {
                existing.mass += scale * a.mass;
            } else {
                atoms.push(Atom {
                    location: a.location,
                    mass: scale * a.mass,
                });
            }
        }
        atoms.retain(|a| a.mass != 0.0);
        out.atoms = atoms;
        out.curves = self.curves.clone();
        for c in &other.curves {
            out.curves.push(CurvePiece {
                polyline: c.polyline.clone(),
                linear_density: scale * c.linear_density,
            });
        }
        Ok(out)
    }

    /// Integral of the total diffuse density over the domain.
    pub fn diffuse_integral(&self, tol: f64) -> f64 {
        self.integrate_density(|v| v, tol)
    }

    fn integrate_density<G: Fn(f64) -> f64 + Copy>(&self, map: G, tol: f64) -> f64 {
        if self.densities.is_empty() {
            return 0.0;
        }
        let dom = self.domain;
        if self.dim == 2 {
            let mut f = |x: f64, y: f64| map(self.density_at([x, y, 0.0]));
            adaptive_rect(&mut f, dom.rect(), tol)
        } else {
            let mut f = |p: Point| map(self.density_at(p));
            adaptive_box(&mut f, dom.lo, dom.hi, tol)
        }
    }
}

/// Holds the capacity split `regular + singular` of a measure.
#[derive(Debug, Clone)]
pub struct MeasureDecomposition {
    pub regular: Measure,
    pub singular: Measure,
}

/// Default absolute tolerance for density integrals.
const TV_TOL: f64 = 1e-9;

/// Splits `mu` into nonnegative parts `(plus, minus)` with `plus - minus = mu`:
/// densities split by sign pointwise, atoms and curve pieces by the sign of
/// their mass or density.
pub fn jordan_decompose(mu: &Measure) -> (Measure, Measure) {
    let mut plus = Measure::new(mu.dim, mu.domain).unwrap();
    let mut minus = plus.clone();
    if !mu.densities.is_empty() {
        let total = if mu.densities.len() == 1 {
            mu.densities[0].clone()
        } else {
            Density::Sum(mu.densities.clone())
        };
        plus.densities.push(Density::PosPart(Box::new(total.clone())));
        minus.densities.push(Density::NegPart(Box::new(total)));
    }
    for a in &mu.atoms {
        if a.mass > 0.0 {
            plus.atoms.push(a.clone());
        } else {
            minus.atoms.push(Atom {
                location: a.location,
                mass: -a.mass,
            });
        }
    }
    for c in &mu.curves {
        if c.linear_density > 0.0 {
            plus.curves.push(c.clone());
        } else if c.linear_density < 0.0 {
            minus.curves.push(CurvePiece {
                polyline: c.polyline.clone(),
                linear_density: -c.linear_density,
            });
        }
    }
    (plus, minus)
}

/// Splits `mu` into the part vanishing on capacity-zero sets and the part
/// carried by one. Points have capacity zero in the plane and in space;
/// rectifiable curves only in space.
pub fn capacity_decompose(mu: &Measure) -> Result<MeasureDecomposition> {
    let mut regular = Measure::new(mu.dim, mu.domain)?;
    let mut singular = regular.clone();
    regular.densities = mu.densities.clone();
    singular.atoms = mu.atoms.clone();
    match mu.dim {
        2 => regular.curves = mu.curves.clone(),
        3 => singular.curves = mu.curves.clone(),
        d => return Err(Error::UnsupportedDimension(d)),
    }
    Ok(MeasureDecomposition { regular, singular })
}

/// Total variation `|mu|(domain)`.
pub fn total_variation(mu: &Measure) -> f64 {
    let atoms: f64 = mu.atoms.iter().map(|a| a.mass.abs()).sum();
    let curves: f64 = mu
        .curves
        .iter()
        .map(|c| c.length() * c.linear_density.abs())
        .sum();
    let diffuse = mu.integrate_density(f64::abs, TV_TOL);
    atoms + curves + diffuse
}

/// Resolution of the probe lattice used to compare density supports.
const SUPPORT_PROBE: usize = 96;

/// Structural mutual-singularity test: atom location sets disjoint, polylines
/// without a shared sub-segment of positive length, density supports without
/// probed overlap; carriers of different kinds never overlap (points carry no
/// length, curves no area).
pub fn mutually_singular(mu: &Measure, nu: &Measure) -> Result<bool> {
    if mu.dim != nu.dim {
        return Err(Error::DimensionMismatch {
            expected: mu.dim,
            got: nu.dim,
        });
    }
    for a in &mu.atoms {
        if nu.atoms.iter().any(|b| b.location == a.location) {
            return Ok(false);
        }
    }
    for c in &mu.curves {
        for d in &nu.curves {
            if polylines_overlap(c, d) {
                return Ok(false);
            }
        }
    }
    if !mu.densities.is_empty() && !nu.densities.is_empty() && densities_overlap(mu, nu) {
        return Ok(false);
    }
    Ok(true)
}

fn polylines_overlap(c: &CurvePiece, d: &CurvePiece) -> bool {
    // Two segments overlap when they are collinear and share positive length;
    // a transversal crossing is a single point and does not count.
    for sc in c.polyline.windows(2) {
        for sd in d.polyline.windows(2) {
            if segments_share_length(sc[0], sc[1], sd[0], sd[1]) {
                return true;
            }
        }
    }
    false
}

fn segments_share_length(a0: Point, a1: Point, b0: Point, b1: Point) -> bool {
    let eps = 1e-12;
    let ab = [a1[0] - a0[0], a1[1] - a0[1], a1[2] - a0[2]];
    let la2 = ab[0] * ab[0] + ab[1] * ab[1] + ab[2] * ab[2];
    let la = la2.sqrt();
    // both endpoints of the second segment must lie on the first's line
    let line_dist = |p: Point| {
        let ap = [p[0] - a0[0], p[1] - a0[1], p[2] - a0[2]];
        let cross = [
            ap[1] * ab[2] - ap[2] * ab[1],
            ap[2] * ab[0] - ap[0] * ab[2],
            ap[0] * ab[1] - ap[1] * ab[0],
        ];
        (cross[0] * cross[0] + cross[1] * cross[1] + cross[2] * cross[2]).sqrt() / la
    };
    if line_dist(b0) > eps * (1.0 + la) || line_dist(b1) > eps * (1.0 + la) {
        return false;
    }
    // project onto the first segment and intersect the parameter ranges
    let proj = |p: Point| {
        ((p[0] - a0[0]) * ab[0] + (p[1] - a0[1]) * ab[1] + (p[2] - a0[2]) * ab[2]) / la2
    };
    let (t0, t1) = (proj(b0), proj(b1));
    let lo = t0.min(t1).max(0.0);
    let hi = t0.max(t1).min(1.0);
    (hi - lo) * la > eps
}

fn densities_overlap(mu: &Measure, nu: &Measure) -> bool {
    let dom = &mu.domain;
    let dn = &nu.domain;
    let lo = [
        dom.lo[0].max(dn.lo[0]),
        dom.lo[1].max(dn.lo[1]),
        dom.lo[2].max(dn.lo[2]),
    ];
    let hi = [
        dom.hi[0].min(dn.hi[0]),
        dom.hi[1].min(dn.hi[1]),
        dom.hi[2].min(dn.hi[2]),
    ];
    let active = mu.dim as usize;
    if (0..active).any(|k| hi[k] <= lo[k]) {
        return false;
    }
    let steps = if mu.dim == 2 { SUPPORT_PROBE } else { 24 };
    let probe = |p: Point| mu.density_at(p).abs() > 0.0 && nu.density_at(p).abs() > 0.0;
    let n = steps as f64;
    if mu.dim == 2 {
        for i in 0..steps {
            for j in 0..steps {
                let p = [
                    lo[0] + (i as f64 + 0.5) / n * (hi[0] - lo[0]),
                    lo[1] + (j as f64 + 0.5) / n * (hi[1] - lo[1]),
                    0.0,
                ];
                if probe(p) {
                    return true;
                }
            }
        }
    } else {
        for i in 0..steps {
            for j in 0..steps {
                for k in 0..steps {
                    let p = [
                        lo[0] + (i as f64 + 0.5) / n * (hi[0] - lo[0]),
                        lo[1] + (j as f64 + 0.5) / n * (hi[1] - lo[1]),
                        lo[2] + (k as f64 + 0.5) / n * (hi[2] - lo[2]),
                    ];
                    if probe(p) {
                        return true;
                    }
                }
            }
        }
    }
    false
}

/// Integral of the total diffuse density composed with `map` along a curve or
/// over the domain is not needed publicly; potentials use the carriers via
/// accessors instead.
pub(crate) fn curve_integral<F: FnMut(Point) -> f64>(c: &CurvePiece, f: &mut F, tol: f64) -> f64 {
    let mut total = 0.0;
    for w in c.polyline.windows(2) {
        total += adaptive_segment(f, w[0], w[1], &[], tol);
    }
    total * c.linear_density
}
