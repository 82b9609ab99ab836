//! P1 discretization of a second-order divergence-form operator on the
//! structured triangulation: stiffness assembly for bounded coefficient
//! fields, Dirichlet solves for measure data, discrete Green functions,
//! the duality identity, truncation energies and capacity estimates.

use std::sync::OnceLock;

use crate::band::{Band, BandLu, SymBand, SymBandCholesky};
use crate::error::{Error, Result};
use crate::geometry::Rect;
use crate::grid::{Grid, NodalFunction};
use crate::measure::Measure;
use crate::potential::{fundamental_solution, Dim};

/// Piecewise-constant 2x2 coefficient matrix, sampled at element centroids.
#[derive(Debug, Clone)]
pub struct CoefficientField {
    grid: Grid,
    per_element: Vec<[[f64; 2]; 2]>,
    beta: f64,
}

impl CoefficientField {
    /// Samples `a(x, y)` at every element centroid. Fails unless the sampled
    /// matrices are uniformly elliptic along the axis and diagonal directions.
    pub fn from_fn<F: Fn(f64, f64) -> [[f64; 2]; 2]>(grid: Grid, a: F) -> Result<Self> {
        let mut per_element = Vec::with_capacity(2 * grid.nx() * grid.ny());
        let mut beta = f64::INFINITY;
        let dirs = [
            (1.0, 0.0),
            (0.0, 1.0),
            (std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2),
            (std::f64::consts::FRAC_1_SQRT_2, -std::f64::consts::FRAC_1_SQRT_2),
        ];
        for (_, _, verts) in elements(&grid) {
            let cx = (verts[0].0 + verts[1].0 + verts[2].0) / 3.0;
            let cy = (verts[0].1 + verts[1].1 + verts[2].1) / 3.0;
            let m = a(cx, cy);
            if m.iter().flatten().any(|v| !v.is_finite()) {
                return Err(Error::EllipticityViolation(f64::NAN));
            }
            for (dx, dy) in dirs {
                let q = dx * (m[0][0] * dx + m[0][1] * dy) + dy * (m[1][0] * dx + m[1][1] * dy);
                beta = beta.min(q);
            }
            per_element.push(m);
        }
        if !(beta > 0.0) {
            return Err(Error::EllipticityViolation(beta));
        }
        Ok(CoefficientField {
            grid,
            per_element,
            beta,
        })
    }

    pub fn identity(grid: Grid) -> Self {
        CoefficientField::from_fn(grid, |_, _| [[1.0, 0.0], [0.0, 1.0]]).unwrap()
    }

    pub fn scaled(grid: Grid, c: f64) -> Result<Self> {
        CoefficientField::from_fn(grid, |_, _| [[c, 0.0], [0.0, c]])
    }

    /// Named fields used by the CLI and the experiment configs:
    /// `identity`, `scaled:<c>`, `diag:<a>,<b>`, `nonsym`.
    pub fn from_selector(grid: Grid, sel: &str) -> Result<Self> {
        if sel == "identity" {
            return Ok(CoefficientField::identity(grid));
        }
        if let Some(c) = sel.strip_prefix("scaled:") {
            let c: f64 = c
                .parse()
                .map_err(|_| Error::Config(format!("bad coefficient scale in {sel:?}")))?;
            return CoefficientField::scaled(grid, c);
        }
        if let Some(rest) = sel.strip_prefix("diag:") {
            let parts: Vec<&str> = rest.split(',').collect();
            if parts.len() != 2 {
                return Err(Error::Config(format!("bad diagonal field {sel:?}")));
            }
            let a: f64 = parts[0]
                .parse()
                .map_err(|_| Error::Config(format!("bad diagonal field {sel:?}")))?;
            let b: f64 = parts[1]
                .parse()
                .map_err(|_| Error::Config(format!("bad diagonal field {sel:?}")))?;
            return CoefficientField::from_fn(grid, move |_, _| [[a, 0.0], [0.0, b]]);
        }
        if sel == "nonsym" {
            // the skew part must vary in space: a constant skew assembles to
            // an exactly symmetric stiffness on zero-boundary functions
            return CoefficientField::from_fn(grid, |x, _| [[1.0, 0.3 * x], [-0.1, 1.0]]);
        }
        Err(Error::Config(format!("unknown coefficient field {sel:?}")))
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn is_symmetric(&self) -> bool {
        self.per_element.iter().all(|m| m[0][1] == m[1][0])
    }
}

/// Stencil slot offsets `(di, dj)` in ascending interior-index order.
const STENCIL: [(isize, isize); 7] = [
    (-1, -1),
    (0, -1),
    (-1, 0),
    (0, 0),
    (1, 0),
    (0, 1),
    (1, 1),
];

/// Compressed sparse rows over interior nodes.
#[derive(Debug, Clone)]
pub struct Csr {
    pub rowptr: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<f64>,
    pub diag: Vec<f64>,
}

impl Csr {
    pub fn nrows(&self) -> usize {
        self.rowptr.len() - 1
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.rowptr[i]..self.rowptr[i + 1];
        (&self.cols[r.clone()], &self.vals[r])
    }

    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        for i in 0..self.nrows() {
            let (cols, vals) = self.row(i);
            out[i] = cols.iter().zip(vals).map(|(&c, &v)| v * x[c]).sum();
        }
    }

    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        let mut s = 0.0;
        for i in 0..self.nrows() {
            let (cols, vals) = self.row(i);
            let ax: f64 = cols.iter().zip(vals).map(|(&c, &v)| v * x[c]).sum();
            s += x[i] * ax;
        }
        s
    }

    /// Column sums; for Dirichlet-trimmed stiffness these measure the
    /// discrete flux each column sends into the boundary.
    pub fn column_sums(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.nrows()];
        for i in 0..self.nrows() {
            let (cols, vals) = self.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                out[c] += v;
            }
        }
        out
    }
}

fn elements(grid: &Grid) -> impl Iterator<Item = (usize, usize, [(f64, f64); 3])> + '_ {
    let (hx, hy) = (grid.hx(), grid.hy());
    let r = grid.rect();
    (0..grid.ny()).flat_map(move |cj| {
        (0..grid.nx()).flat_map(move |ci| {
            let x = r.x0 + ci as f64 * hx;
            let y = r.y0 + cj as f64 * hy;
            let v00 = (x, y);
            let v10 = (x + hx, y);
            let v01 = (x, y + hy);
            let v11 = (x + hx, y + hy);
            [(ci, cj, [v00, v10, v11]), (ci, cj, [v00, v11, v01])]
        })
    })
}

/// Grid coordinates of the three vertices of element `t` of cell `(ci, cj)`.
fn element_nodes(ci: usize, cj: usize, t: usize) -> [(isize, isize); 3] {
    let (i, j) = (ci as isize, cj as isize);
    if t == 0 {
        [(i, j), (i + 1, j), (i + 1, j + 1)]
    } else {
        [(i, j), (i + 1, j + 1), (i, j + 1)]
    }
}

fn element_matrix(verts: &[(f64, f64); 3], a: &[[f64; 2]; 2], symmetric: bool) -> [[f64; 3]; 3] {
    let (p0, p1, p2) = (verts[0], verts[1], verts[2]);
    let area2 = (p1.0 - p0.0) * (p2.1 - p0.1) - (p2.0 - p0.0) * (p1.1 - p0.1);
    let area = 0.5 * area2.abs();
    let b = [p1.1 - p2.1, p2.1 - p0.1, p0.1 - p1.1];
    let c = [p2.0 - p1.0, p0.0 - p2.0, p1.0 - p0.0];
    let mut k = [[0.0; 3]; 3];
    let scale = 1.0 / (4.0 * area);
    for r in 0..3 {
        for s in 0..3 {
            if symmetric && s < r {
                continue;
            }
            let gx = a[0][0] * b[s] + a[0][1] * c[s];
            let gy = a[1][0] * b[s] + a[1][1] * c[s];
            k[r][s] = scale * (b[r] * gx + c[r] * gy);
        }
    }
    if symmetric {
        for r in 0..3 {
            for s in 0..r {
                k[r][s] = k[s][r];
            }
        }
    }
    k
}

enum Fact {
    Chol(SymBandCholesky),
    Lu(BandLu),
}

impl Fact {
    fn solve_in_place(&self, b: &mut [f64]) {
        match self {
            Fact::Chol(c) => c.solve_in_place(b),
            Fact::Lu(l) => l.solve_in_place(b),
        }
    }
}

/// Assembled operator: sparse stiffness over interior nodes, its adjoint,
/// and lazily built band factorizations. Immutable after assembly.
pub struct EllipticOperator {
    grid: Grid,
    symmetric: bool,
    beta: f64,
    stencil: Vec<[f64; 7]>,
    csr: Csr,
    adjoint: Csr,
    fact: OnceLock<std::result::Result<Fact, Error>>,
    fact_adjoint: OnceLock<std::result::Result<Fact, Error>>,
}

/// Assembles the P1 stiffness matrix of the coefficient field over the
/// interior nodes. For a symmetric field the element matrices are mirrored
/// exactly, so the assembled matrix equals its transpose bit for bit.
pub fn assemble(grid: &Grid, coeff: &CoefficientField) -> Result<EllipticOperator> {
    if coeff.grid != *grid {
        return Err(Error::InvalidGrid(
            "coefficient field was sampled on a different grid".into(),
        ));
    }
    if !(coeff.beta > 0.0) {
        return Err(Error::EllipticityViolation(coeff.beta));
    }
    let symmetric = coeff.is_symmetric();
    let ninterior = grid.interior_count();
    let mut stencil = vec![[0.0f64; 7]; ninterior];
    let slot_of = |di: isize, dj: isize| STENCIL.iter().position(|&p| p == (di, dj)).unwrap();
    for (e, (ci, cj, verts)) in elements(grid).enumerate() {
        let t = e % 2;
        let k = element_matrix(&verts, &coeff.per_element[e], symmetric);
        let nodes = element_nodes(ci, cj, t);
        for r in 0..3 {
            let Some(row) = grid.interior_index(nodes[r].0, nodes[r].1) else {
                continue;
            };
            for s in 0..3 {
                if grid.interior_index(nodes[s].0, nodes[s].1).is_some() {
                    let di = nodes[s].0 - nodes[r].0;
                    let dj = nodes[s].1 - nodes[r].1;
                    stencil[row][slot_of(di, dj)] += k[r][s];
                }
            }
        }
    }
    let csr = stencil_to_csr(grid, &stencil, false);
    let adjoint = if symmetric {
        csr.clone()
    } else {
        stencil_to_csr(grid, &stencil, true)
    };
    Ok(EllipticOperator {
        grid: *grid,
        symmetric,
        beta: coeff.beta,
        stencil,
        csr,
        adjoint,
        fact: OnceLock::new(),
        fact_adjoint: OnceLock::new(),
    })
}

fn stencil_to_csr(grid: &Grid, stencil: &[[f64; 7]], transpose: bool) -> Csr {
    let n = grid.interior_count();
    let mut rowptr = Vec::with_capacity(n + 1);
    let mut cols = Vec::new();
    let mut vals = Vec::new();
    let mut diag = vec![0.0; n];
    rowptr.push(0);
    for idx in 0..n {
        let (i, j) = grid.grid_coords(idx);
        for (slot, &(di, dj)) in STENCIL.iter().enumerate() {
            if let Some(col) = grid.interior_index(i as isize + di, j as isize + dj) {
                // transposed entry (idx, col) = stencil[col][mirror slot]
                let v = if transpose {
                    stencil[col][6 - slot]
                } else {
                    stencil[idx][slot]
                };
                if v != 0.0 || (di, dj) == (0, 0) {
                    cols.push(col);
                    vals.push(v);
                    if (di, dj) == (0, 0) {
                        diag[idx] = v;
                    }
                }
            }
        }
        rowptr.push(cols.len());
    }
    Csr {
        rowptr,
        cols,
        vals,
        diag,
    }
}

impl EllipticOperator {
    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn stiffness(&self) -> &Csr {
        &self.csr
    }

    pub fn adjoint(&self) -> &Csr {
        &self.adjoint
    }

    /// Dense stencil row `(offsets, values)` of an interior node.
    pub fn stencil_row(&self, idx: usize) -> &[f64; 7] {
        &self.stencil[idx]
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; x.len()];
        self.csr.apply(x, &mut out);
        out
    }

    fn band_half_width(&self) -> usize {
        self.grid.interior_nx() + 1
    }

    fn build_fact(&self, transpose: bool) -> std::result::Result<Fact, Error> {
        let n = self.grid.interior_count();
        let bw = self.band_half_width();
        let csr = if transpose { &self.adjoint } else { &self.csr };
        if self.symmetric {
            let mut sb = SymBand::zeros(n, bw);
            for i in 0..n {
                let (cols, vals) = csr.row(i);
                for (&c, &v) in cols.iter().zip(vals) {
                    if c <= i {
                        sb.add(i, c, v);
                    }
                }
            }
            sb.cholesky().map(Fact::Chol)
        } else {
            let mut b = Band::zeros(n, bw, bw);
            for i in 0..n {
                let (cols, vals) = csr.row(i);
                for (&c, &v) in cols.iter().zip(vals) {
                    b.add(i, c, v);
                }
            }
            b.lu().map(Fact::Lu)
        }
    }

    fn factorization(&self) -> Result<&Fact> {
        self.fact
            .get_or_init(|| self.build_fact(false))
            .as_ref()
            .map_err(|e| e.clone())
    }

    fn factorization_adjoint(&self) -> Result<&Fact> {
        if self.symmetric {
            return self.factorization();
        }
        self.fact_adjoint
            .get_or_init(|| self.build_fact(true))
            .as_ref()
            .map_err(|e| e.clone())
    }

    fn solve_refined(&self, csr: &Csr, fact: &Fact, m: &[f64]) -> Result<Vec<f64>> {
        let mnorm = m.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let mut x = m.to_vec();
        if mnorm == 0.0 {
            return Ok(x);
        }
        // normwise scale |A|_inf for the backward-error residual
        let anorm = (0..csr.nrows()).fold(0.0f64, |a, i| {
            let (_, vals) = csr.row(i);
            a.max(vals.iter().map(|v| v.abs()).sum())
        });
        let scale = |x: &[f64], rnorm: f64| {
            let xnorm = x.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            rnorm / (anorm * xnorm + mnorm)
        };
        fact.solve_in_place(&mut x);
        // iterative refinement until the scaled residual meets the contract
        let mut out = vec![0.0; m.len()];
        for _ in 0..3 {
            csr.apply(&x, &mut out);
            let mut rnorm = 0.0f64;
            for i in 0..m.len() {
                out[i] = m[i] - out[i];
                rnorm = rnorm.max(out[i].abs());
            }
            if scale(&x, rnorm) <= 1e-12 {
                return Ok(x);
            }
            fact.solve_in_place(&mut out);
            for i in 0..m.len() {
                x[i] += out[i];
            }
        }
        csr.apply(&x, &mut out);
        let rnorm = m
            .iter()
            .zip(&out)
            .fold(0.0f64, |a, (mi, ai)| a.max((mi - ai).abs()));
        let rel = scale(&x, rnorm);
        if rel <= 1e-12 {
            Ok(x)
        } else {
            Err(Error::SolveFailed(format!(
                "scaled residual {rel:.3e} above 1e-12"
            )))
        }
    }

    /// Direct solve of `stiffness . u = m`.
    pub fn solve_load(&self, m: &[f64]) -> Result<Vec<f64>> {
        let fact = self.factorization()?;
        self.solve_refined(&self.csr, fact, m)
    }

    /// Direct solve of `stiffness^T . u = m`.
    pub fn solve_adjoint_load(&self, m: &[f64]) -> Result<Vec<f64>> {
        let fact = self.factorization_adjoint()?;
        self.solve_refined(&self.adjoint, fact, m)
    }

    /// Nodal loads `m_i = mu(phi_i)`: atoms by hat evaluation, densities by
    /// elementwise quadrature, curve pieces by exact per-cell Gauss rules.
    pub fn load_vector(&self, mu: &Measure) -> Result<Vec<f64>> {
        if mu.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                got: mu.dim(),
            });
        }
        let grid = &self.grid;
        let mut m = vec![0.0; grid.interior_count()];
        for a in mu.atoms() {
            let (x, y) = (a.location[0], a.location[1]);
            let Some(hats) = grid.hat_values(x, y) else {
                return Err(Error::AtomOutsideDomain(x, y));
            };
            for ((i, j), w) in hats {
                if let Some(idx) = grid.interior_index(i, j) {
                    m[idx] += a.mass * w;
                }
            }
        }
        if !mu.densities().is_empty() {
            load_density(grid, mu, &mut m);
        }
        for c in mu.curves() {
            load_curve(grid, c, &mut m);
        }
        Ok(m)
    }

    pub fn solve_dirichlet(&self, mu: &Measure) -> Result<NodalFunction> {
        let m = self.load_vector(mu)?;
        Ok(NodalFunction::new(self.grid, self.solve_load(&m)?))
    }

    /// Green column: the Dirichlet solution for a unit mass at `y`.
    pub fn discrete_green(&self, y: (f64, f64)) -> Result<NodalFunction> {
        let Some(hats) = self.grid.hat_values(y.0, y.1) else {
            return Err(Error::AtomOutsideDomain(y.0, y.1));
        };
        let mut m = vec![0.0; self.grid.interior_count()];
        for ((i, j), w) in hats {
            if let Some(idx) = self.grid.interior_index(i, j) {
                m[idx] += w;
            }
        }
        Ok(NodalFunction::new(self.grid, self.solve_load(&m)?))
    }

    /// Residual of the duality identity: the mass-weighted pairing of the
    /// Dirichlet solution with `g` against the pairing of the adjoint
    /// solution with the measure.
    pub fn duality_check(&self, mu: &Measure, g: &NodalFunction) -> Result<f64> {
        let w = self.grid.hx() * self.grid.hy();
        let u = self.solve_dirichlet(mu)?;
        let rhs_star: Vec<f64> = g.values().iter().map(|v| v * w).collect();
        let ustar = self.solve_adjoint_load(&rhs_star)?;
        let lhs: f64 = u
            .values()
            .iter()
            .zip(g.values())
            .map(|(ui, gi)| ui * gi * w)
            .sum();
        let m = self.load_vector(mu)?;
        let rhs: f64 = m.iter().zip(&ustar).map(|(mi, si)| mi * si).sum();
        Ok((lhs - rhs).abs())
    }

    /// Dirichlet energy of the nodal truncation `T_k(u)` in the
    /// identity-coefficient form.
    pub fn truncation_energy(&self, u: &NodalFunction, k: f64) -> f64 {
        assert!(k > 0.0, "truncation level must be positive");
        let t: Vec<f64> = u.values().iter().map(|&v| v.clamp(-k, k)).collect();
        let id = identity_stiffness(&self.grid);
        id.quadratic_form(&t)
    }

    /// Empirical two-sided comparison of the Green column against the
    /// fundamental solution over node pairs in `k`.
    pub fn check_green_bounds(&self, k: Rect) -> Result<GreenBounds> {
        let nodes = self.grid.nodes_in(k);
        let h = self.grid.h();
        let diam = k.diameter();
        let rmax = 0.5 * diam;
        let rmin = 2.0 * h;
        let mut samples: Vec<(f64, f64, bool)> = Vec::new();
        let mut min_ga = f64::INFINITY;
        let mut min_g = f64::INFINITY;
        for &y in &nodes {
            let ypos = self.grid.node_position(y);
            let col = self.discrete_green(ypos)?;
            for &x in &nodes {
                if x == y {
                    continue;
                }
                let xpos = self.grid.node_position(x);
                let r = (xpos.0 - ypos.0).hypot(xpos.1 - ypos.1);
                let ga = col.values()[x];
                let g = fundamental_solution(Dim::Two, r)?;
                min_ga = min_ga.min(ga);
                min_g = min_g.min(g);
                if r >= rmin && r <= rmax {
                    samples.push((ga, g, r <= 2.0 * rmin));
                }
            }
        }
        if samples.is_empty() {
            return Err(Error::InvalidGrid(
                "no admissible node pairs in the sub-rectangle".into(),
            ));
        }
        // offsets shifting both kernels positive over every pair in k
        let d_num = if min_ga > 0.0 { 0.0 } else { -min_ga + 1e-9 };
        let d_den = if min_g > 0.0 { 0.0 } else { -min_g + 1e-9 };
        let mut c1 = f64::INFINITY;
        let mut c2 = f64::NEG_INFINITY;
        let mut near_min = f64::INFINITY;
        let mut near_max = f64::NEG_INFINITY;
        for &(ga, g, near) in &samples {
            let ratio = (ga + d_num) / (g + d_den);
            c1 = c1.min(ratio);
            c2 = c2.max(ratio);
            if near {
                near_min = near_min.min(ratio);
                near_max = near_max.max(ratio);
            }
        }
        if !(c1 > 0.0) || !c2.is_finite() {
            return Err(Error::SolveFailed(format!(
                "green bound ratios degenerate: c1={c1:.3e}, c2={c2:.3e}"
            )));
        }
        Ok(GreenBounds {
            c1,
            c2,
            d_num,
            d_den,
            near_min,
            near_max,
            pairs: samples.len(),
        })
    }
}

/// Empirical constants of the two-sided Green comparison.
#[derive(Debug, Clone, Copy)]
pub struct GreenBounds {
    /// Smallest ratio `(G_A + d_num) / (G + d_den)` over admissible pairs.
    pub c1: f64,
    /// Largest such ratio.
    pub c2: f64,
    pub d_num: f64,
    pub d_den: f64,
    /// Ratio extremes over the nearest admissible pairs (within `4 h`).
    pub near_min: f64,
    pub near_max: f64,
    pub pairs: usize,
}

fn identity_stiffness(grid: &Grid) -> Csr {
    let coeff = CoefficientField::identity(*grid);
    assemble(grid, &coeff).expect("identity coefficients are elliptic").csr
}

fn load_density(grid: &Grid, mu: &Measure, m: &mut [f64]) {
    // degree-4 rule on every element; the hat is linear, so products with
    // smooth or bilinear densities are integrated to quadrature accuracy
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
    let area = 0.5 * grid.hx() * grid.hy();
    let dom = *mu.domain();
    let inside = |x: f64, y: f64| {
        x >= dom.lo[0] && x <= dom.hi[0] && y >= dom.lo[1] && y <= dom.hi[1]
    };
    for (e, (ci, cj, verts)) in elements(grid).enumerate() {
        let nodes = element_nodes(ci, cj, e % 2);
        let idxs = [
            grid.interior_index(nodes[0].0, nodes[0].1),
            grid.interior_index(nodes[1].0, nodes[1].1),
            grid.interior_index(nodes[2].0, nodes[2].1),
        ];
        if idxs.iter().all(|i| i.is_none()) {
            continue;
        }
        for (l0, l1, l2, w) in bary {
            let x = l0 * verts[0].0 + l1 * verts[1].0 + l2 * verts[2].0;
            let y = l0 * verts[0].1 + l1 * verts[1].1 + l2 * verts[2].1;
            if !inside(x, y) {
                continue;
            }
            let f = mu.density_at([x, y, 0.0]);
            if f == 0.0 {
                continue;
            }
            let lam = [l0, l1, l2];
            for r in 0..3 {
                if let Some(idx) = idxs[r] {
                    m[idx] += area * w * f * lam[r];
                }
            }
        }
    }
}

fn load_curve(grid: &Grid, c: &crate::measure::CurvePiece, m: &mut [f64]) {
    // split each segment at every grid line and cell diagonal, then use a
    // 2-point Gauss rule per sub-piece: the integrand is linear there
    let r = grid.rect();
    let (hx, hy) = (grid.hx(), grid.hy());
    for w in c.polyline.windows(2) {
        let (a, b) = (w[0], w[1]);
        let seg_len = crate::geometry::dist(a, b);
        let mut ts: Vec<f64> = vec![0.0, 1.0];
        let mut add_cuts = |f0: f64, f1: f64, lines_from: f64, step: f64, extent: f64| {
            // parameters where f(t) = f0 + t (f1 - f0) crosses multiples of step
            if (f1 - f0).abs() < 1e-300 {
                return;
            }
            let lo = f0.min(f1);
            let hi = f0.max(f1);
            let kmin = ((lo - lines_from) / step).floor() as i64;
            let kmax = ((hi - lines_from) / step).ceil() as i64;
            for k in kmin..=kmax {
                let target = lines_from + k as f64 * step;
                if target < lines_from - 1e-12 || target > lines_from + extent + 1e-12 {
                    continue;
                }
                let t = (target - f0) / (f1 - f0);
                if t > 0.0 && t < 1.0 {
                    ts.push(t);
                }
            }
        };
        add_cuts(a[0], b[0], r.x0, hx, r.width());
        add_cuts(a[1], b[1], r.y0, hy, r.height());
        // cell diagonals: (x - x0)/hx - (y - y0)/hy integer
        let u0 = (a[0] - r.x0) / hx - (a[1] - r.y0) / hy;
        let u1 = (b[0] - r.x0) / hx - (b[1] - r.y0) / hy;
        add_cuts(u0, u1, -(grid.ny() as f64), 1.0, (grid.nx() + grid.ny()) as f64);
        ts.sort_by(|p, q| p.partial_cmp(q).unwrap());
        ts.dedup_by(|p, q| (*p - *q).abs() < 1e-14);
        for piece in ts.windows(2) {
            let (t0, t1) = (piece[0], piece[1]);
            let plen = seg_len * (t1 - t0);
            if plen == 0.0 {
                continue;
            }
            for gp in [-0.577_350_269_189_626, 0.577_350_269_189_626] {
                let t = 0.5 * (t0 + t1) + 0.5 * (t1 - t0) * gp;
                let p = crate::geometry::lerp(a, b, t);
                if let Some(hats) = grid.hat_values(p[0], p[1]) {
                    for ((i, j), hv) in hats {
                        if let Some(idx) = grid.interior_index(i, j) {
                            m[idx] += c.linear_density * 0.5 * plen * hv;
                        }
                    }
                }
            }
        }
    }
}

/// Minimum of `v^T L v` over nodal functions with `v = 1` on the node set
/// `e` and zero boundary values, `L` the identity-coefficient stiffness.
pub fn estimate_capacity(grid: &Grid, e: &[usize]) -> Result<f64> {
    if e.is_empty() {
        return Ok(0.0);
    }
    let csr = identity_stiffness(grid);
    let n = grid.interior_count();
    let mut constrained = vec![false; n];
    for &idx in e {
        if idx >= n {
            return Err(Error::InvalidGrid(format!("node index {idx} out of range")));
        }
        constrained[idx] = true;
    }
    // renumber the free nodes preserving order, so the band width only shrinks
    let mut newid = vec![usize::MAX; n];
    let mut nfree = 0usize;
    for i in 0..n {
        if !constrained[i] {
            newid[i] = nfree;
            nfree += 1;
        }
    }
    let mut v = vec![0.0; n];
    for i in 0..n {
        if constrained[i] {
            v[i] = 1.0;
        }
    }
    if nfree > 0 {
        let bw = grid.interior_nx() + 1;
        let mut sb = SymBand::zeros(nfree, bw);
        let mut rhs = vec![0.0; nfree];
        for i in 0..n {
            if constrained[i] {
                continue;
            }
            let (cols, vals) = csr.row(i);
            for (&cidx, &val) in cols.iter().zip(vals) {
                if constrained[cidx] {
                    rhs[newid[i]] -= val;
                } else if cidx <= i {
                    sb.add(newid[i], newid[cidx], val);
                }
            }
        }
        let chol = sb.cholesky()?;
        chol.solve_in_place(&mut rhs);
        for i in 0..n {
            if !constrained[i] {
                v[i] = rhs[newid[i]];
            }
        }
    }
    Ok(csr.quadratic_form(&v))
}
