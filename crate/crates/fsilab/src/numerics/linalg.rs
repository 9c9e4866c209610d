use num_complex::Complex64 as C;

use crate::error::{Error, Result};

pub const MAX_NULL_SIZE: usize = 8;

/// Small dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    pub n: usize,
    pub data: Vec<C>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Matrix { n, data: vec![C::new(0.0, 0.0); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = C::new(1.0, 0.0);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<C>]) -> Self {
        let n = rows.len();
        let mut m = Self::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), n, "matrix must be square");
            for (j, &v) in row.iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        m
    }

    pub fn mul_vec(&self, v: &[C]) -> Vec<C> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    /// Max absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Determinant by partial-pivot elimination.
    pub fn det(&self) -> C {
        let n = self.n;
        let mut a = self.data.clone();
        let mut det = C::new(1.0, 0.0);
        for k in 0..n {
            let p = (k..n)
                .max_by(|&i, &j| a[i * n + k].norm().total_cmp(&a[j * n + k].norm()))
                .unwrap_or(k);
            if a[p * n + k].norm() == 0.0 {
                return C::new(0.0, 0.0);
            }
            if p != k {
                for j in 0..n {
                    a.swap(k * n + j, p * n + j);
                }
                det = -det;
            }
            let piv = a[k * n + k];
            det *= piv;
            for i in k + 1..n {
                let f = a[i * n + k] / piv;
                for j in k..n {
                    let t = a[k * n + j];
                    a[i * n + j] -= f * t;
                }
            }
        }
        det
    }

    /// Solves self x = b by partial-pivot elimination.
    pub fn solve(&self, b: &[C]) -> Result<Vec<C>> {
        let n = self.n;
        let mut a = self.data.clone();
        let mut x = b.to_vec();
        for k in 0..n {
            let p = (k..n)
                .max_by(|&i, &j| a[i * n + k].norm().total_cmp(&a[j * n + k].norm()))
                .unwrap_or(k);
            if a[p * n + k].norm() == 0.0 {
                return Err(Error::Singularity("singular linear system".into()));
            }
            if p != k {
                for j in 0..n {
                    a.swap(k * n + j, p * n + j);
                }
                x.swap(k, p);
            }
            let piv = a[k * n + k];
            for i in k + 1..n {
                let f = a[i * n + k] / piv;
                for j in k..n {
                    let t = a[k * n + j];
                    a[i * n + j] -= f * t;
                }
                let t = x[k];
                x[i] -= f * t;
            }
        }
        for k in (0..n).rev() {
            let mut s = x[k];
            for j in k + 1..n {
                s -= a[k * n + j] * x[j];
            }
            x[k] = s / a[k * n + k];
        }
        Ok(x)
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = C;
    fn index(&self, (i, j): (usize, usize)) -> &C {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C {
        &mut self.data[i * self.n + j]
    }
}

/// Unit-norm null vector of a numerically singular matrix.
///
/// Full-pivot elimination; the last pivot must be at least ten times smaller
/// than the one before it, and the residual must satisfy |m v| <= 1e-8 |m|.
pub fn null_vector(m: &Matrix) -> Result<Vec<C>> {
    let n = m.n;
    if n == 0 || n > MAX_NULL_SIZE {
        return Err(Error::Domain(format!("null_vector supports sizes 1..={MAX_NULL_SIZE}")));
    }
    let mut a = m.data.clone();
    let mut cols: Vec<usize> = (0..n).collect();
    let mut pivots = Vec::with_capacity(n);
    for k in 0..n {
        let (mut pi, mut pj, mut best) = (k, k, -1.0);
        for i in k..n {
            for j in k..n {
                let v = a[i * n + j].norm();
                if v > best {
                    best = v;
                    pi = i;
                    pj = j;
                }
            }
        }
        pivots.push(best);
        if pi != k {
            for j in 0..n {
                a.swap(k * n + j, pi * n + j);
            }
        }
        if pj != k {
            for i in 0..n {
                a.swap(i * n + k, i * n + pj);
            }
            cols.swap(k, pj);
        }
        let piv = a[k * n + k];
        if piv.norm() == 0.0 {
            continue;
        }
        for i in k + 1..n {
            let f = a[i * n + k] / piv;
            for j in k..n {
                let t = a[k * n + j];
                a[i * n + j] -= f * t;
            }
        }
    }
    let last = pivots[n - 1];
    let prev = if n >= 2 { pivots[n - 2] } else { f64::INFINITY };
    let ratio = if last == 0.0 { f64::INFINITY } else { prev / last };
    if ratio < 10.0 {
        return Err(Error::Rank { ratio });
    }
    let mut y = vec![C::new(0.0, 0.0); n];
    y[n - 1] = C::new(1.0, 0.0);
    for k in (0..n - 1).rev() {
        let mut s = C::new(0.0, 0.0);
        for j in k + 1..n {
            s += a[k * n + j] * y[j];
        }
        y[k] = -s / a[k * n + k];
    }
    let mut v = vec![C::new(0.0, 0.0); n];
    for (k, &c) in cols.iter().enumerate() {
        v[c] = y[k];
    }
    let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    for c in v.iter_mut() {
        *c /= norm;
    }
    let res = m.mul_vec(&v).iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if res > 1e-8 * m.norm_inf() {
        return Err(Error::Rank { ratio });
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C {
        C::new(re, 0.0)
    }

    #[test]
    fn diagonal_rank_one() {
        let m = Matrix::from_rows(&[vec![c(1.0), c(0.0)], vec![c(0.0), c(0.0)]]);
        let v = null_vector(&m).unwrap();
        assert!(v[0].norm() < 1e-15 && (v[1].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn identity_is_nonsingular() {
        assert!(matches!(null_vector(&Matrix::identity(3)), Err(Error::Rank { .. })));
    }

    #[test]
    fn rank_deficient_three_by_three() {
        let r1 = vec![C::new(1.0, 2.0), c(-1.0), C::new(0.0, 3.0)];
        let r2 = vec![c(2.0), C::new(0.5, 0.5), c(1.0)];
        let r3: Vec<C> = r1.iter().zip(&r2).map(|(a, b)| a * C::new(0.3, -1.0) + b * 2.0).collect();
        let m = Matrix::from_rows(&[r1, r2, r3]);
        let v = null_vector(&m).unwrap();
        let res: f64 = m.mul_vec(&v).iter().map(|c| c.norm()).sum();
        assert!(res < 1e-12);
    }

    #[test]
    fn det_and_solve() {
        let m = Matrix::from_rows(&[vec![c(2.0), c(1.0)], vec![c(1.0), c(3.0)]]);
        assert!((m.det() - 5.0).norm() < 1e-14);
        let x = m.solve(&[c(3.0), c(5.0)]).unwrap();
        assert!((x[0] - 0.8).norm() < 1e-14 && (x[1] - 1.4).norm() < 1e-14);
    }
}
