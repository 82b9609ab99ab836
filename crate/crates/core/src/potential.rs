//! Mesh-free potential theory: fundamental solutions, potentials of measures,
//! ball averages with closed-form averaged kernels, and ratio scans for pairs
//! of mutually singular measures.
//!
//! The averaged kernel is the mean of the fundamental solution over a ball of
//! radius `r` whose center sits at distance `s` from the source. It equals
//! the fundamental solution for `s >= r` and is the potential of the
//! uniformly filled ball for `s < r`:
//!
//! ```text
//! N = 3:  (3 r^2 - s^2) / (8 pi r^3)
//! N = 2:  (1 / 2 pi) (log(1/r) + (1 - s^2/r^2) / 2)
//! ```
//!
//! Because the averaged kernel is bounded, ball averages of potentials reduce
//! to quadrature of a continuous integrand over the carriers, even when the
//! potential itself is infinite at the center.

use crate::error::{Error, Result};
use crate::geometry::{dist, segment_distance, Point};
use crate::measure::{curve_integral, Measure};
use crate::quadrature::{adaptive_box, adaptive_rect, adaptive_segment};

use std::f64::consts::PI;

/// Ambient dimension of the mesh-free kernels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dim {
    Two,
    Three,
}

impl Dim {
    pub fn from_u8(d: u8) -> Result<Self> {
        match d {
            2 => Ok(Dim::Two),
            3 => Ok(Dim::Three),
            other => Err(Error::UnsupportedDimension(other)),
        }
    }

    pub fn as_u8(self) -> u8 {
        match self {
            Dim::Two => 2,
            Dim::Three => 3,
        }
    }
}

/// Absolute tolerance of the curve quadratures.
const CURVE_TOL: f64 = 1e-10;
/// Absolute tolerance of the cell quadratures for diffuse parts.
const CELL_TOL: f64 = 1e-10;
/// Evaluation points closer than this to a panel get a singular split.
const SPLIT_DISTANCE: f64 = 1e-3;
/// Distance floor inside quadratures (the kernels are integrable, so the
/// clipped neighbourhood contributes nothing at this scale).
const R_FLOOR: f64 = 1e-14;

/// Fundamental solution of the Laplacian: `log(1/r)/2pi` in the plane,
/// `1/(4 pi r)` in space.
pub fn fundamental_solution(dim: Dim, r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::InvalidRadius(r));
    }
    Ok(match dim {
        Dim::Two => (1.0 / r).ln() / (2.0 * PI),
        Dim::Three => 1.0 / (4.0 * PI * r),
    })
}

/// Mean of the fundamental solution over a ball of radius `r` centered at
/// distance `s` from the source.
pub fn averaged_kernel(dim: Dim, r: f64, s: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::InvalidRadius(r));
    }
    if s < 0.0 {
        return Err(Error::InvalidRadius(s));
    }
    if s >= r {
        return fundamental_solution(dim, s);
    }
    Ok(match dim {
        Dim::Three => (3.0 * r * r - s * s) / (8.0 * PI * r * r * r),
        Dim::Two => ((1.0 / r).ln() + 0.5 * (1.0 - s * s / (r * r))) / (2.0 * PI),
    })
}

fn kernel(dim: Dim, r: f64) -> f64 {
    fundamental_solution(dim, r.max(R_FLOOR)).unwrap()
}

/// Potential `integral of G(|x - y|) d mu(y)`.
///
/// Atom contributions are exact; if `x` coincides with an atom the result is
/// the `+inf`/`-inf` sentinel carrying the sign of its mass. Curve pieces use
/// adaptive panel quadrature with a singular split when `x` projects onto a
/// nearby panel; diffuse parts use adaptive cell quadrature.
pub fn potential(mu: &Measure, x: Point) -> f64 {
    let dim = Dim::from_u8(mu.dim()).expect("measure dimension validated at construction");
    let mut total = 0.0;
    for a in mu.atoms() {
        let r = dist(x, a.location);
        if r == 0.0 {
            return if a.mass > 0.0 {
                f64::INFINITY
            } else {
                f64::NEG_INFINITY
            };
        }
        total += a.mass * kernel(dim, r);
    }
    for c in mu.curves() {
        let mut piece = 0.0;
        for w in c.polyline.windows(2) {
            let panel_len = dist(w[0], w[1]);
            let (d, t) = segment_distance(x, w[0], w[1]);
            let breaks: &[f64] = if d <= panel_len.max(SPLIT_DISTANCE) {
                &[t]
            } else {
                &[]
            };
            let mut f = |p: Point| kernel(dim, dist(x, p));
            piece += adaptive_segment(&mut f, w[0], w[1], breaks, CURVE_TOL);
        }
        total += c.linear_density * piece;
    }
    if !mu.densities().is_empty() {
        let dom = *mu.domain();
        total += match dim {
            Dim::Two => {
                let mut f =
                    |px: f64, py: f64| mu.density_at([px, py, 0.0]) * kernel(dim, dist(x, [px, py, 0.0]));
                adaptive_rect(&mut f, dom.rect(), CELL_TOL)
            }
            Dim::Three => {
                let mut f = |p: Point| mu.density_at(p) * kernel(dim, dist(x, p));
                adaptive_box(&mut f, dom.lo, dom.hi, CELL_TOL)
            }
        };
    }
    total
}

/// Mean of the potential of `mu` over the ball `B_r(x)`, computed per carrier
/// through the averaged kernel. The ball may stick out of the domain; the
/// measure is extended by zero there, which the kernel form encodes for free.
pub fn ball_average_potential(mu: &Measure, x: Point, r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::InvalidRadius(r));
    }
    let dim = Dim::from_u8(mu.dim())?;
    let mut total = 0.0;
    for a in mu.atoms() {
        total += a.mass * averaged_kernel(dim, r, dist(x, a.location))?;
    }
    for c in mu.curves() {
        let mut f = |p: Point| averaged_kernel(dim, r, dist(x, p)).unwrap();
        total += curve_integral(c, &mut f, CURVE_TOL);
    }
    if !mu.densities().is_empty() {
        let dom = *mu.domain();
        total += match dim {
            Dim::Two => {
                let mut f = |px: f64, py: f64| {
                    mu.density_at([px, py, 0.0])
                        * averaged_kernel(dim, r, dist(x, [px, py, 0.0])).unwrap()
                };
                adaptive_rect(&mut f, dom.rect(), CELL_TOL.max(1e-8 * r))
            }
            Dim::Three => {
                let mut f =
                    |p: Point| mu.density_at(p) * averaged_kernel(dim, r, dist(x, p)).unwrap();
                adaptive_box(&mut f, dom.lo, dom.hi, CELL_TOL.max(1e-8 * r))
            }
        };
    }
    Ok(total)
}

/// Ball-average ratios of two potentials along a radius ladder.
#[derive(Debug, Clone)]
pub struct RatioScan {
    pub center: Point,
    pub radii: Vec<f64>,
    pub numerator_averages: Vec<f64>,
    pub denominator_averages: Vec<f64>,
    pub ratios: Vec<f64>,
}

impl RatioScan {
    /// CSV with columns `radius, num_avg, den_avg, ratio`.
    pub fn write_csv<W: std::io::Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(
            w,
            "# ratio scan at center ({:.12e}, {:.12e}, {:.12e})",
            self.center[0], self.center[1], self.center[2]
        )?;
        writeln!(w, "radius,num_avg,den_avg,ratio")?;
        for i in 0..self.radii.len() {
            writeln!(
                w,
                "{:.12e},{:.12e},{:.12e},{:.12e}",
                self.radii[i],
                self.numerator_averages[i],
                self.denominator_averages[i],
                self.ratios[i]
            )?;
        }
        Ok(())
    }
}

/// Scans `avg(G nu) / avg(G mu)` over `B_r(x)` for a decreasing radius
/// ladder. Requires the measures to be mutually singular and nonnegative in
/// the representation (nonnegative masses, densities and curve densities).
pub fn ratio_scan(mu: &Measure, nu: &Measure, x: Point, radii: &[f64]) -> Result<RatioScan> {
    if !crate::measure::mutually_singular(mu, nu)? {
        return Err(Error::NotMutuallySingular);
    }
    for m in [mu, nu] {
        let signed = m.atoms().iter().any(|a| a.mass < 0.0)
            || m.curves().iter().any(|c| c.linear_density < 0.0);
        if signed {
            return Err(Error::InvalidMeasure(
                "ratio scans need nonnegative measures".into(),
            ));
        }
    }
    if !radii.windows(2).all(|w| w[0] > w[1]) {
        return Err(Error::Config(
            "scan radii must be strictly decreasing".into(),
        ));
    }
    let mut rs = RatioScan {
        center: x,
        radii: radii.to_vec(),
        numerator_averages: Vec::with_capacity(radii.len()),
        denominator_averages: Vec::with_capacity(radii.len()),
        ratios: Vec::with_capacity(radii.len()),
    };
    for &r in radii {
        let num = ball_average_potential(nu, x, r)?;
        let den = ball_average_potential(mu, x, r)?;
        if den == 0.0 {
            return Err(Error::ZeroDenominator(r));
        }
        rs.numerator_averages.push(num);
        rs.denominator_averages.push(den);
        rs.ratios.push(num / den);
    }
    Ok(rs)
}
