//! Dense and banded numerical kernels shared by the solvers and the oracles.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Stationary vector of an irreducible row-stochastic matrix by
/// Grassmann–Taksar–Heyman elimination.
///
/// Diagonal entries are never read; the row sums of the off-diagonal part
/// replace the `1 - p_kk` pivots, so no subtraction ever occurs.
pub fn gth_dense(p: &DMatrix<f64>) -> Result<Vec<f64>> {
    let n = p.nrows();
    assert_eq!(n, p.ncols(), "GTH needs a square matrix");
    if n == 0 {
        return Ok(Vec::new());
    }
    // row-major working copy
    let mut a: Vec<f64> = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| p[(i, j)]).collect();
    for k in (1..n).rev() {
        let (head, row_k) = a.split_at_mut(k * n);
        let row_k = &row_k[..n];
        let s: f64 = row_k[..k].iter().sum();
        if s <= 0.0 {
            return Err(Error::Singular(format!("GTH pivot at state {k} is zero; chain is reducible")));
        }
        for i in 0..k {
            let row_i = &mut head[i * n..(i + 1) * n];
            row_i[k] /= s;
            let f = row_i[k];
            if f != 0.0 {
                for (x, y) in row_i[..k].iter_mut().zip(&row_k[..k]) {
                    *x += f * y;
                }
            }
        }
    }
    let mut x = vec![0.0; n];
    x[0] = 1.0;
    for k in 1..n {
        x[k] = (0..k).map(|i| x[i] * a[i * n + k]).sum();
    }
    let total: f64 = x.iter().sum();
    x.iter_mut().for_each(|v| *v /= total);
    Ok(x)
}

/// Square matrix stored by diagonals within a half bandwidth `bw`.
#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    bw: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, bw: usize) -> Self {
        BandMatrix {
            n,
            bw,
            data: vec![0.0; n * (2 * bw + 1)],
        }
    }

    /// Bytes that `zeros(n, bw)` would allocate.
    pub fn storage_bytes(n: usize, bw: usize) -> usize {
        n.saturating_mul(2 * bw + 1).saturating_mul(std::mem::size_of::<f64>())
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bw
    }

    #[inline]
    fn offset(&self, i: usize, j: usize) -> usize {
        debug_assert!(i.abs_diff(j) <= self.bw, "({i},{j}) outside band {}", self.bw);
        i * (2 * self.bw + 1) + (j + self.bw - i)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i.abs_diff(j) > self.bw {
            0.0
        } else {
            self.data[self.offset(i, j)]
        }
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let o = self.offset(i, j);
        self.data[o] += v;
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let o = self.offset(i, j);
        self.data[o] = v;
    }

    /// Contiguous slice of row `i` covering columns `lo..hi` (all inside the band).
    #[inline]
    fn row_slice(&self, i: usize, lo: usize, hi: usize) -> &[f64] {
        let a = self.offset(i, lo);
        &self.data[a..a + (hi - lo)]
    }

    pub fn transpose(&self) -> BandMatrix {
        let mut t = BandMatrix::zeros(self.n, self.bw);
        for i in 0..self.n {
            let lo = i.saturating_sub(self.bw);
            let hi = (i + self.bw + 1).min(self.n);
            for j in lo..hi {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }
}

/// GTH elimination restricted to a band. Elimination of state `k` only
/// touches rows and columns within `bw` of `k`, so no fill-in escapes the
/// band and the result is the same as dense GTH with the same ordering.
pub fn gth_banded(mut a: BandMatrix) -> Result<Vec<f64>> {
    let n = a.n;
    let bw = a.bw;
    let width = 2 * bw + 1;
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut pivot_row = vec![0.0; bw];
    for k in (1..n).rev() {
        let lo = k.saturating_sub(bw);
        let len = k - lo;
        pivot_row[..len].copy_from_slice(a.row_slice(k, lo, k));
        let s: f64 = pivot_row[..len].iter().sum();
        if s <= 0.0 {
            return Err(Error::Singular(format!("GTH pivot at state {k} is zero; chain is reducible")));
        }
        for i in lo..k {
            let base = i * width;
            let ok = base + (k + bw - i);
            a.data[ok] /= s;
            let f = a.data[ok];
            if f != 0.0 {
                let start = base + (lo + bw - i);
                for (x, y) in a.data[start..start + len].iter_mut().zip(&pivot_row[..len]) {
                    *x += f * y;
                }
            }
        }
    }
    let mut x = vec![0.0; n];
    x[0] = 1.0;
    for k in 1..n {
        let lo = k.saturating_sub(bw);
        x[k] = (lo..k).map(|i| x[i] * a.get(i, k)).sum();
    }
    let total: f64 = x.iter().sum();
    x.iter_mut().for_each(|v| *v /= total);
    Ok(x)
}

/// LU factorisation without pivoting of a banded matrix. Intended for
/// nonsingular M-matrices such as `I - P` with one state removed, where
/// no pivoting is needed.
#[derive(Debug, Clone)]
pub struct BandLu {
    lu: BandMatrix,
}

impl BandLu {
    pub fn factor(mut a: BandMatrix) -> Result<Self> {
        let n = a.n;
        let bw = a.bw;
        for k in 0..n {
            let piv = a.get(k, k);
            if piv.abs() < 1e-300 {
                return Err(Error::Singular(format!("zero pivot at {k} in banded LU")));
            }
            let hi = (k + bw + 1).min(n);
            let upper: Vec<f64> = a.row_slice(k, k + 1, hi).to_vec();
            for i in k + 1..hi {
                let l = a.get(i, k) / piv;
                a.set(i, k, l);
                if l != 0.0 {
                    for (j, u) in (k + 1..hi).zip(&upper) {
                        a.add(i, j, -l * u);
                    }
                }
            }
        }
        Ok(BandLu { lu: a })
    }

    /// Solves `A x = rhs` in place.
    pub fn solve_in_place(&self, x: &mut [f64]) {
        let n = self.lu.n;
        let bw = self.lu.bw;
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            let s: f64 = (lo..i).map(|j| self.lu.get(i, j) * x[j]).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let hi = (i + bw + 1).min(n);
            let s: f64 = (i + 1..hi).map(|j| self.lu.get(i, j) * x[j]).sum();
            x[i] = (x[i] - s) / self.lu.get(i, i);
        }
    }
}

/// Spectral radius of a nonnegative square matrix via repeated squaring with
/// rescaling: `sp(M) = lim ||M^(2^j)||^(1/2^j)`.
pub fn spectral_radius(m: &DMatrix<f64>) -> f64 {
    let norm = |a: &DMatrix<f64>| a.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    let n0 = norm(m);
    if n0 == 0.0 {
        return 0.0;
    }
    let mut s = m / n0;
    let mut log_scale = n0.ln();
    let mut power = 1.0_f64;
    for _ in 0..60 {
        let sq = &s * &s;
        let nrm = norm(&sq);
        if nrm == 0.0 {
            return 0.0;
        }
        log_scale = 2.0 * log_scale + nrm.ln();
        power *= 2.0;
        s = sq / nrm;
    }
    (log_scale / power).exp()
}

/// Sup norm of a matrix (max absolute entry).
pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}
