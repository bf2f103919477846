//! Dense matrices, one-sided Jacobi SVD and the truncated pseudoinverse.
//!
//! The decoders solve small dense systems (tens of rows). One-sided Jacobi
//! iteration computes even the tiny singular values to high relative
//! accuracy, which the ill-conditioning diagnostics rely on.

use crate::scalar::{real, Real};

use super::KernelError;

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Real> DenseMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c));
        Self {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.rows == 0 || self.cols == 0
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows);
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == T::zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(self.cols, x.len());
        (0..self.rows)
            .map(|i| {
                let mut acc = T::zero();
                for j in 0..self.cols {
                    acc += self[(i, j)] * x[j];
                }
                acc
            })
            .collect()
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(&a, &b)| (a - b).abs())
            .fold(T::zero(), T::max)
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    fn col_dot(&self, p: usize, q: usize) -> T {
        let mut acc = T::zero();
        for i in 0..self.rows {
            acc += self[(i, p)] * self[(i, q)];
        }
        acc
    }
}

impl<T> std::ops::Index<(usize, usize)> for DenseMatrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for DenseMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

/// Thin singular value decomposition `A = U diag(sigma) V^T`.
#[derive(Debug, Clone)]
pub struct Svd<T> {
    pub u: DenseMatrix<T>,
    pub sigma: Vec<T>,
    pub v: DenseMatrix<T>,
}

/// One-sided Jacobi SVD. Singular values come back sorted descending.
pub fn svd_jacobi<T: Real>(a: &DenseMatrix<T>) -> Result<Svd<T>, KernelError> {
    if a.is_empty() {
        return Err(KernelError::EmptyMatrix);
    }
    let transposed = a.rows() < a.cols();
    let mut b = if transposed { a.transpose() } else { a.clone() };
    let n = b.cols();
    let mut v = DenseMatrix::<T>::identity(n);

    let tol = T::epsilon() * real(4.0);
    let max_sweeps = 64;
    for _ in 0..max_sweeps {
        let mut rotated = false;
        for p in 0..n.saturating_sub(1) {
            for q in p + 1..n {
                let app = b.col_dot(p, p);
                let aqq = b.col_dot(q, q);
                let apq = b.col_dot(p, q);
                if app == T::zero() || aqq == T::zero() {
                    continue;
                }
                if apq.abs() <= tol * (app * aqq).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (aqq - app) / (real::<T>(2.0) * apq);
                let t = if zeta >= T::zero() {
                    T::one() / (zeta + (T::one() + zeta * zeta).sqrt())
                } else {
                    -T::one() / (-zeta + (T::one() + zeta * zeta).sqrt())
                };
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                for i in 0..b.rows() {
                    let bp = b[(i, p)];
                    let bq = b[(i, q)];
                    b[(i, p)] = c * bp - s * bq;
                    b[(i, q)] = s * bp + c * bq;
                }
                for i in 0..n {
                    let vp = v[(i, p)];
                    let vq = v[(i, q)];
                    v[(i, p)] = c * vp - s * vq;
                    v[(i, q)] = s * vp + c * vq;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let norms: Vec<T> = (0..n).map(|j| b.col_dot(j, j).sqrt()).collect();
    order.sort_by(|&i, &j| {
        norms[j]
            .partial_cmp(&norms[i])
            .unwrap_or(std::cmp::Ordering::Equal)
    });

    let m = b.rows();
    let mut u = DenseMatrix::<T>::zeros(m, n);
    let mut v_sorted = DenseMatrix::<T>::zeros(n, n);
    let mut sigma = Vec::with_capacity(n);
    for (new_j, &old_j) in order.iter().enumerate() {
        let s = norms[old_j];
        sigma.push(s);
        if s > T::zero() {
            for i in 0..m {
                u[(i, new_j)] = b[(i, old_j)] / s;
            }
        }
        for i in 0..n {
            v_sorted[(i, new_j)] = v[(i, old_j)];
        }
    }

    if transposed {
        Ok(Svd {
            u: v_sorted,
            sigma,
            v: u,
        })
    } else {
        Ok(Svd {
            u,
            sigma,
            v: v_sorted,
        })
    }
}

/// Truncated Moore-Penrose pseudoinverse with spectrum diagnostics.
#[derive(Debug, Clone)]
pub struct PseudoInverse<T> {
    pub matrix: DenseMatrix<T>,
    pub effective_rank: usize,
    pub sigma_max: T,
    /// Smallest singular value kept after truncation.
    pub sigma_min_retained: T,
    /// Smallest positive singular value of the full spectrum.
    pub sigma_min_positive: T,
}

impl<T: Real> PseudoInverse<T> {
    /// Full-spectrum condition number `sigma_max / sigma_min_positive`.
    pub fn condition_number(&self) -> T {
        if self.sigma_min_positive > T::zero() {
            self.sigma_max / self.sigma_min_positive
        } else {
            T::infinity()
        }
    }

    /// True when singular values below the cutoff were discarded.
    pub fn truncated(&self) -> bool {
        self.sigma_min_retained > self.sigma_min_positive
    }
}

/// SVD-based pseudoinverse; singular values below `rel_cutoff * sigma_max`
/// are zeroed.
pub fn pinv_truncated<T: Real>(
    a: &DenseMatrix<T>,
    rel_cutoff: T,
) -> Result<PseudoInverse<T>, KernelError> {
    if a.is_empty() {
        return Err(KernelError::EmptyMatrix);
    }
    if !(rel_cutoff > T::zero() && rel_cutoff < T::one()) {
        return Err(KernelError::BadTolerance);
    }
    let svd = svd_jacobi(a)?;
    let sigma_max = svd.sigma.first().copied().unwrap_or(T::zero());
    let cutoff = rel_cutoff * sigma_max;
    let retained: Vec<usize> = (0..svd.sigma.len())
        .filter(|&j| svd.sigma[j] > cutoff && svd.sigma[j] > T::zero())
        .collect();
    let sigma_min_retained = retained.last().map_or(T::zero(), |&j| svd.sigma[j]);
    let sigma_min_positive = svd
        .sigma
        .iter()
        .rev()
        .find(|&&s| s > T::zero())
        .copied()
        .unwrap_or(T::zero());

    // pinv = V diag(1/sigma) U^T over the retained spectrum.
    let (m, n) = (a.rows(), a.cols());
    let mut pinv = DenseMatrix::<T>::zeros(n, m);
    for &j in &retained {
        let inv_s = T::one() / svd.sigma[j];
        for r in 0..n {
            let vj = svd.v[(r, j)] * inv_s;
            if vj == T::zero() {
                continue;
            }
            for c in 0..m {
                pinv[(r, c)] += vj * svd.u[(c, j)];
            }
        }
    }

    Ok(PseudoInverse {
        matrix: pinv,
        effective_rank: retained.len(),
        sigma_max,
        sigma_min_retained,
        sigma_min_positive,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    fn random_matrix(rng: &mut SplitMix64, rows: usize, cols: usize) -> DenseMatrix<f64> {
        DenseMatrix::from_fn(rows, cols, |_, _| rng.uniform_in(-1.0, 1.0))
    }

    fn reconstruct(svd: &Svd<f64>) -> DenseMatrix<f64> {
        let k = svd.sigma.len();
        let mut scaled = svd.u.clone();
        for j in 0..k {
            for i in 0..scaled.rows() {
                scaled[(i, j)] *= svd.sigma[j];
            }
        }
        scaled.matmul(&svd.v.transpose())
    }

    #[test]
    fn svd_reconstructs_random_matrices() {
        let mut rng = SplitMix64::new(31);
        for &(m, n) in &[(5usize, 5usize), (8, 6), (6, 8), (12, 3), (1, 4)] {
            let a = random_matrix(&mut rng, m, n);
            let svd = svd_jacobi(&a).unwrap();
            let err = reconstruct(&svd).max_abs_diff(&a);
            assert!(err < 1e-12, "({m},{n}) err={err:.3e}");
            for w in svd.sigma.windows(2) {
                assert!(w[0] >= w[1]);
            }
        }
    }

    #[test]
    fn pinv_of_identity_is_identity() {
        let eye = DenseMatrix::<f64>::identity(5);
        let p = pinv_truncated(&eye, 1e-8).unwrap();
        assert!(p.matrix.max_abs_diff(&eye) < 1e-13);
        assert_eq!(p.effective_rank, 5);
    }

    #[test]
    fn pinv_of_singular_diagonal_truncates() {
        let mut d = DenseMatrix::<f64>::zeros(3, 3);
        d[(0, 0)] = 2.0;
        d[(1, 1)] = 1.0;
        let p = pinv_truncated(&d, 1e-8).unwrap();
        let mut expect = DenseMatrix::<f64>::zeros(3, 3);
        expect[(0, 0)] = 0.5;
        expect[(1, 1)] = 1.0;
        assert!(p.matrix.max_abs_diff(&expect) < 1e-13);
        assert_eq!(p.effective_rank, 2);
    }

    #[test]
    fn penrose_identities_on_random_full_rank() {
        let mut rng = SplitMix64::new(47);
        let a = random_matrix(&mut rng, 8, 6);
        let p = pinv_truncated(&a, 1e-10).unwrap();
        let apa = a.matmul(&p.matrix).matmul(&a);
        assert!(apa.max_abs_diff(&a) < 1e-10);
        let pap = p.matrix.matmul(&a).matmul(&p.matrix);
        assert!(pap.max_abs_diff(&p.matrix) < 1e-10);
        let ap = a.matmul(&p.matrix);
        assert!(ap.max_abs_diff(&ap.transpose()) < 1e-10);
        let pa = p.matrix.matmul(&a);
        assert!(pa.max_abs_diff(&pa.transpose()) < 1e-10);
    }

    #[test]
    fn double_pinv_recovers_full_rank_square() {
        let mut rng = SplitMix64::new(53);
        for _ in 0..5 {
            let a = random_matrix(&mut rng, 6, 6);
            let p = pinv_truncated(&a, 1e-12).unwrap();
            let back = pinv_truncated(&p.matrix, 1e-12).unwrap();
            assert!(back.matrix.max_abs_diff(&a) < 1e-7);
        }
    }

    #[test]
    fn rejects_empty_matrix() {
        let a = DenseMatrix::<f64>::zeros(0, 3);
        assert!(matches!(
            pinv_truncated(&a, 1e-8),
            Err(KernelError::EmptyMatrix)
        ));
    }

    #[test]
    fn condition_number_tracks_spectrum() {
        let mut d = DenseMatrix::<f64>::zeros(2, 2);
        d[(0, 0)] = 10.0;
        d[(1, 1)] = 0.1;
        let p = pinv_truncated(&d, 1e-8).unwrap();
        assert!((p.condition_number() - 100.0).abs() < 1e-9);
        assert!(!p.truncated());
    }
}
