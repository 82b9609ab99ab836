//! Structured triangulation of a rectangle and nodal fields on it.

use crate::error::{Error, Result};
use crate::geometry::Rect;

/// Uniform grid on a rectangle, each cell split along the SW-NE diagonal
/// into two right triangles. Interior nodes are indexed row-major; boundary
/// nodes carry homogeneous Dirichlet data and are eliminated everywhere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    rect: Rect,
    nx: usize,
    ny: usize,
}

impl Grid {
    pub fn new(rect: Rect, nx: usize, ny: usize) -> Result<Self> {
        if nx < 4 || ny < 4 {
            return Err(Error::InvalidGrid(format!(
                "need at least 4 subdivisions per side, got {nx} x {ny}"
            )));
        }
        Ok(Grid { rect, nx, ny })
    }

    /// `n` subdivisions per unit length, rounded per side.
    pub fn build(rect: Rect, n: usize) -> Result<Self> {
        if n < 4 {
            return Err(Error::InvalidGrid(format!("need n >= 4, got {n}")));
        }
        let nx = (rect.width() * n as f64).round() as usize;
        let ny = (rect.height() * n as f64).round() as usize;
        Grid::new(rect, nx.max(1), ny.max(1))
    }

    pub fn unit_square(n: usize) -> Result<Self> {
        Grid::new(Rect::unit_square(), n, n)
    }

    pub fn rect(&self) -> Rect {
        self.rect
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn hx(&self) -> f64 {
        self.rect.width() / self.nx as f64
    }

    pub fn hy(&self) -> f64 {
        self.rect.height() / self.ny as f64
    }

    /// Mesh size: the larger cell side.
    pub fn h(&self) -> f64 {
        self.hx().max(self.hy())
    }

    pub fn interior_nx(&self) -> usize {
        self.nx - 1
    }

    pub fn interior_ny(&self) -> usize {
        self.ny - 1
    }

    pub fn interior_count(&self) -> usize {
        self.interior_nx() * self.interior_ny()
    }

    /// Interior index of the grid node `(i, j)` with `1 <= i <= nx-1`,
    /// `1 <= j <= ny-1`; `None` on boundary or outside.
    pub fn interior_index(&self, i: isize, j: isize) -> Option<usize> {
        if i < 1 || j < 1 || i as usize > self.nx - 1 || j as usize > self.ny - 1 {
            return None;
        }
        Some((j as usize - 1) * self.interior_nx() + (i as usize - 1))
    }

    /// Grid coordinates `(i, j)` of an interior index.
    pub fn grid_coords(&self, idx: usize) -> (usize, usize) {
        (idx % self.interior_nx() + 1, idx / self.interior_nx() + 1)
    }

    pub fn node_position(&self, idx: usize) -> (f64, f64) {
        let (i, j) = self.grid_coords(idx);
        (
            self.rect.x0 + i as f64 * self.hx(),
            self.rect.y0 + j as f64 * self.hy(),
        )
    }

    /// Interior nodes inside the closed sub-rectangle `k`.
    pub fn nodes_in(&self, k: Rect) -> Vec<usize> {
        (0..self.interior_count())
            .filter(|&idx| {
                let (x, y) = self.node_position(idx);
                k.contains_closed(x, y)
            })
            .collect()
    }

    /// The three hat functions that are nonzero at `(x, y)`: global grid node
    /// coordinates and barycentric values. `None` when the point lies outside
    /// the closed rectangle.
    pub fn hat_values(&self, x: f64, y: f64) -> Option<[((isize, isize), f64); 3]> {
        if !self.rect.contains_closed(x, y) {
            return None;
        }
        let sx = ((x - self.rect.x0) / self.hx()).clamp(0.0, self.nx as f64 - 1e-12);
        let sy = ((y - self.rect.y0) / self.hy()).clamp(0.0, self.ny as f64 - 1e-12);
        let ci = (sx.floor() as usize).min(self.nx - 1);
        let cj = (sy.floor() as usize).min(self.ny - 1);
        let xi = sx - ci as f64;
        let eta = sy - cj as f64;
        let (i, j) = (ci as isize, cj as isize);
        Some(if xi >= eta {
            // lower triangle (v00, v10, v11)
            [
                ((i, j), 1.0 - xi),
                ((i + 1, j), xi - eta),
                ((i + 1, j + 1), eta),
            ]
        } else {
            // upper triangle (v00, v11, v01)
            [
                ((i, j), 1.0 - eta),
                ((i + 1, j + 1), xi),
                ((i, j + 1), eta - xi),
            ]
        })
    }
}

/// Real values at the interior nodes; the boundary is implicitly zero.
#[derive(Debug, Clone)]
pub struct NodalFunction {
    grid: Grid,
    values: Vec<f64>,
}

impl NodalFunction {
    pub fn new(grid: Grid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.interior_count());
        NodalFunction { grid, values }
    }

    pub fn zeros(grid: Grid) -> Self {
        NodalFunction {
            grid,
            values: vec![0.0; grid.interior_count()],
        }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn max_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().fold(f64::INFINITY, |m, &v| m.min(v))
    }

    /// Lumped-mass L1 norm.
    pub fn l1_norm(&self) -> f64 {
        let w = self.grid.hx() * self.grid.hy();
        self.values.iter().map(|v| v.abs()).sum::<f64>() * w
    }

    pub fn max_diff(&self, other: &NodalFunction) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// P1 interpolation at a point (zero outside and on the boundary).
    pub fn interpolate(&self, x: f64, y: f64) -> f64 {
        match self.grid.hat_values(x, y) {
            None => 0.0,
            Some(hats) => hats
                .iter()
                .map(|&((i, j), w)| match self.grid.interior_index(i, j) {
                    Some(idx) => w * self.values[idx],
                    None => 0.0,
                })
                .sum(),
        }
    }

    /// CSV with `x,y,value` rows and `#`-prefixed grid metadata.
    pub fn write_csv<W: std::io::Write>(&self, w: &mut W) -> std::io::Result<()> {
        let r = self.grid.rect();
        writeln!(
            w,
            "# grid rectangle [{:.12e},{:.12e}] x [{:.12e},{:.12e}], nx={}, ny={}",
            r.x0,
            r.x1,
            r.y0,
            r.y1,
            self.grid.nx(),
            self.grid.ny()
        )?;
        writeln!(w, "x,y,value")?;
        for idx in 0..self.values.len() {
            let (x, y) = self.grid.node_position(idx);
            writeln!(w, "{:.12e},{:.12e},{:.12e}", x, y, self.values[idx])?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interior_counts() {
        let g = Grid::unit_square(4).unwrap();
        assert_eq!(g.interior_count(), 9);
        for n in [5, 8, 33] {
            let g = Grid::unit_square(n).unwrap();
            assert_eq!(g.interior_count(), (n - 1) * (n - 1));
        }
    }

    #[test]
    fn anisotropic_counts() {
        // 2 x 1 rectangle at 4 subdivisions per unit
        let g = Grid::build(Rect::new(0.0, 0.0, 2.0, 1.0).unwrap(), 4).unwrap();
        assert_eq!(g.nx(), 8);
        assert_eq!(g.ny(), 4);
        assert_eq!(g.interior_count(), 7 * 3);
        assert!((g.hx() - 0.25).abs() < 1e-15);
        assert!((g.hy() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn rejects_coarse_grid() {
        assert!(Grid::unit_square(3).is_err());
        assert!(Rect::new(0.0, 0.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn hats_partition_of_unity() {
        let g = Grid::unit_square(8).unwrap();
        for &(x, y) in &[(0.13, 0.61), (0.5, 0.5), (0.99, 0.01), (0.625, 0.625)] {
            let hats = g.hat_values(x, y).unwrap();
            let s: f64 = hats.iter().map(|h| h.1).sum();
            assert!((s - 1.0).abs() < 1e-12);
            assert!(hats.iter().all(|h| h.1 >= -1e-12));
        }
    }

    #[test]
    fn hat_at_node_is_kronecker() {
        let g = Grid::unit_square(8).unwrap();
        let hats = g.hat_values(0.25, 0.5).unwrap();
        let mut found = false;
        for ((i, j), v) in hats {
            if (i, j) == (2, 4) {
                assert!((v - 1.0).abs() < 1e-12);
                found = true;
            } else {
                assert!(v.abs() < 1e-12);
            }
        }
        assert!(found);
    }

    #[test]
    fn interpolation_roundtrip() {
        let g = Grid::unit_square(8).unwrap();
        let f = NodalFunction::new(
            g,
            (0..g.interior_count())
                .map(|i| {
                    let (x, y) = g.node_position(i);
                    x + 2.0 * y
                })
                .collect(),
        );
        // interpolation reproduces nodal values at interior nodes
        for idx in [0, 12, 30] {
            let (x, y) = g.node_position(idx);
            assert!((f.interpolate(x, y) - f.values()[idx]).abs() < 1e-12);
        }
        // and vanishes outside
        assert_eq!(f.interpolate(2.0, 2.0), 0.0);
    }
}
