//! Banded direct factorizations sized for structured-grid stiffness matrices.
//!
//! The P1 matrices assembled on a structured triangulation have half
//! bandwidth equal to the number of nodes per grid row, so a band Cholesky
//! (symmetric positive definite case) or a band LU with partial pivoting
//! (general case) is the natural desk-scale direct solver.

use crate::error::{Error, Result};

/// Symmetric band matrix stored by columns: entry `(j + d, j)` lives at
/// `data[j * (bw + 1) + d]` for `0 <= d <= bw`.
#[derive(Debug, Clone)]
pub struct SymBand {
    pub n: usize,
    pub bw: usize,
    pub data: Vec<f64>,
}

impl SymBand {
    pub fn zeros(n: usize, bw: usize) -> Self {
        SymBand {
            n,
            bw,
            data: vec![0.0; n * (bw + 1)],
        }
    }

    /// Adds to entry `(i, j)` of the lower triangle (`i >= j`).
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i >= j && i - j <= self.bw);
        self.data[j * (self.bw + 1) + (i - j)] += v;
    }

    /// Cholesky factorization in place; fails on a nonpositive pivot.
    pub fn cholesky(mut self) -> Result<SymBandCholesky> {
        let (n, bw) = (self.n, self.bw);
        let w = bw + 1;
        for j in 0..n {
            let kmin = j.saturating_sub(bw);
            // earlier columns are read-only while column j is updated
            let (head, tail) = self.data.split_at_mut(j * w);
            let col_j = &mut tail[..w];
            for k in kmin..j {
                let ljk = head[k * w + (j - k)];
                if ljk == 0.0 {
                    continue;
                }
                let imax = (k + bw).min(n - 1);
                let len = imax + 1 - j;
                let src = &head[k * w + (j - k)..k * w + (j - k) + len];
                for (d, s) in col_j[..len].iter_mut().zip(src) {
                    *d -= s * ljk;
                }
            }
            let d = col_j[0];
            if !(d > 0.0) {
                return Err(Error::Factorization(format!(
                    "nonpositive pivot {d:.3e} at column {j}"
                )));
            }
            let s = d.sqrt();
            col_j[0] = s;
            let imax = (j + bw).min(n - 1);
            for v in col_j[1..=imax - j].iter_mut() {
                *v /= s;
            }
        }
        Ok(SymBandCholesky {
            n,
            bw,
            l: self.data,
        })
    }
}

/// Lower band Cholesky factor.
#[derive(Debug, Clone)]
pub struct SymBandCholesky {
    n: usize,
    bw: usize,
    l: Vec<f64>,
}

impl SymBandCholesky {
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let (n, bw, w) = (self.n, self.bw, self.bw + 1);
        // L y = b
        for j in 0..n {
            let y = b[j] / self.l[j * w];
            b[j] = y;
            let imax = (j + bw).min(n - 1);
            for i in j + 1..=imax {
                b[i] -= self.l[j * w + (i - j)] * y;
            }
        }
        // L^T x = y
        for j in (0..n).rev() {
            let imax = (j + bw).min(n - 1);
            let mut s = b[j];
            for i in j + 1..=imax {
                s -= self.l[j * w + (i - j)] * b[i];
            }
            b[j] = s / self.l[j * w];
        }
    }
}

/// General band matrix in LAPACK-style storage with `kl` subdiagonals,
/// `ku` superdiagonals and `kl` extra rows of pivoting fill: entry `(i, j)`
/// lives at `data[j * ldab + (kl + ku + i - j)]`.
#[derive(Debug, Clone)]
pub struct Band {
    pub n: usize,
    pub kl: usize,
    pub ku: usize,
    pub data: Vec<f64>,
}

impl Band {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        Band {
            n,
            kl,
            ku,
            data: vec![0.0; n * (2 * kl + ku + 1)],
        }
    }

    fn ldab(&self) -> usize {
        2 * self.kl + self.ku + 1
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i + self.ku >= j && j + self.kl >= i);
        let r = self.kl + self.ku + i - j;
        let ldab = self.ldab();
        self.data[j * ldab + r] += v;
    }

    /// LU factorization with partial pivoting.
    pub fn lu(mut self) -> Result<BandLu> {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        let ldab = self.ldab();
        let mut ipiv = vec![0usize; n];
        let mut ju = 0usize;
        for j in 0..n {
            let km = kl.min(n - 1 - j);
            let mut p = 0usize;
            let mut best = self.data[j * ldab + kl + ku].abs();
            for q in 1..=km {
                let v = self.data[j * ldab + kl + ku + q].abs();
                if v > best {
                    best = v;
                    p = q;
                }
            }
            if best == 0.0 {
                return Err(Error::Factorization(format!("zero pivot at column {j}")));
            }
            ipiv[j] = j + p;
            ju = ju.max((j + ku + p).min(n - 1));
            if p != 0 {
                for col in j..=ju {
                    let r1 = kl + ku + j - col;
                    self.data.swap(col * ldab + r1, col * ldab + r1 + p);
                }
            }
            let piv = self.data[j * ldab + kl + ku];
            for q in 1..=km {
                self.data[j * ldab + kl + ku + q] /= piv;
            }
            for col in j + 1..=ju {
                let f = self.data[col * ldab + kl + ku + j - col];
                if f != 0.0 {
                    let (head, tail) = self.data.split_at_mut(col * ldab);
                    let mults = &head[j * ldab + kl + ku + 1..j * ldab + kl + ku + 1 + km];
                    let base = kl + ku + (j + 1) - col;
                    for (d, s) in tail[base..base + km].iter_mut().zip(mults) {
                        *d -= s * f;
                    }
                }
            }
        }
        Ok(BandLu {
            n,
            kl,
            ku,
            data: self.data,
            ipiv,
        })
    }
}

/// Pivoted band LU factors.
#[derive(Debug, Clone)]
pub struct BandLu {
    n: usize,
    kl: usize,
    ku: usize,
    data: Vec<f64>,
    ipiv: Vec<usize>,
}

impl BandLu {
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        let ldab = 2 * kl + ku + 1;
        for j in 0..n {
            let p = self.ipiv[j];
            if p != j {
                b.swap(j, p);
            }
            let km = kl.min(n - 1 - j);
            let bj = b[j];
            if bj != 0.0 {
                for q in 1..=km {
                    b[j + q] -= self.data[j * ldab + kl + ku + q] * bj;
                }
            }
        }
        for j in (0..n).rev() {
            let x = b[j] / self.data[j * ldab + kl + ku];
            b[j] = x;
            if x != 0.0 {
                let imin = j.saturating_sub(kl + ku);
                for i in imin..j {
                    b[i] -= self.data[j * ldab + kl + ku + i - j] * x;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // dense Gaussian elimination with partial pivoting, used as the oracle
    fn dense_solve(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
        let n = b.len();
        let mut m: Vec<Vec<f64>> = a.to_vec();
        let mut x = b.to_vec();
        for j in 0..n {
            let p = (j..n).max_by(|&r, &s| m[r][j].abs().total_cmp(&m[s][j].abs())).unwrap();
            m.swap(j, p);
            x.swap(j, p);
            for i in j + 1..n {
                let f = m[i][j] / m[j][j];
                for k in j..n {
                    m[i][k] -= f * m[j][k];
                }
                x[i] -= f * x[j];
            }
        }
        for j in (0..n).rev() {
            let mut s = x[j];
            for k in j + 1..n {
                s -= m[j][k] * x[k];
            }
            x[j] = s / m[j][j];
        }
        x
    }

    fn rng_seq(seed: u64, count: usize) -> Vec<f64> {
        // small deterministic LCG so the test has no dependencies
        let mut s = seed;
        (0..count)
            .map(|_| {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
            })
            .collect()
    }

    #[test]
    fn cholesky_vs_dense() {
        let n = 40;
        let bw = 5;
        let vals = rng_seq(7, n * (bw + 1));
        let mut sb = SymBand::zeros(n, bw);
        let mut dense = vec![vec![0.0; n]; n];
        for j in 0..n {
            for d in 1..=bw.min(n - 1 - j) {
                let v = vals[j * (bw + 1) + d];
                sb.add(j + d, j, v);
                dense[j + d][j] = v;
                dense[j][j + d] = v;
            }
        }
        for i in 0..n {
            let rowsum: f64 = dense[i].iter().map(|v| v.abs()).sum();
            sb.add(i, i, rowsum + 1.0);
            dense[i][i] = rowsum + 1.0;
        }
        let rhs = rng_seq(13, n);
        let chol = sb.cholesky().unwrap();
        let mut x = rhs.clone();
        chol.solve_in_place(&mut x);
        let oracle = dense_solve(&dense, &rhs);
        for i in 0..n {
            assert!((x[i] - oracle[i]).abs() < 1e-11, "i={i}");
        }
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let mut sb = SymBand::zeros(2, 1);
        sb.add(0, 0, 1.0);
        sb.add(1, 0, 3.0);
        sb.add(1, 1, 1.0);
        assert!(sb.cholesky().is_err());
    }

    #[test]
    fn band_lu_vs_dense() {
        let n = 37;
        let (kl, ku) = (4, 3);
        let vals = rng_seq(3, n * n);
        let mut band = Band::zeros(n, kl, ku);
        let mut dense = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                if j + kl >= i && i + ku >= j {
                    let mut v = vals[i * n + j];
                    if i == j {
                        v += 3.0; // keep it comfortably nonsingular
                    }
                    band.add(i, j, v);
                    dense[i][j] = v;
                }
            }
        }
        let rhs = rng_seq(29, n);
        let lu = band.lu().unwrap();
        let mut x = rhs.clone();
        lu.solve_in_place(&mut x);
        let oracle = dense_solve(&dense, &rhs);
        for i in 0..n {
            assert!((x[i] - oracle[i]).abs() < 1e-10, "i={i}: {} vs {}", x[i], oracle[i]);
        }
    }

    #[test]
    fn band_lu_needs_pivoting_case() {
        // leading zero diagonal forces a row swap immediately
        let mut band = Band::zeros(3, 1, 1);
        let dense = vec![
            vec![0.0, 2.0, 0.0],
            vec![1.0, 1.0, 1.0],
            vec![0.0, 1.0, 3.0],
        ];
        for i in 0..3 {
            for j in 0..3 {
                if dense[i][j] != 0.0 {
                    band.add(i, j, dense[i][j]);
                }
            }
        }
        let lu = band.lu().unwrap();
        let mut x = vec![2.0, 3.0, 4.0];
        lu.solve_in_place(&mut x);
        let oracle = dense_solve(&dense, &[2.0, 3.0, 4.0]);
        for i in 0..3 {
            assert!((x[i] - oracle[i]).abs() < 1e-12);
        }
    }
}
