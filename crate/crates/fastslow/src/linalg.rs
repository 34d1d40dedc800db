//! Small dense linear algebra.
//!
//! Everything in this crate works on matrices of order <= 8 or so (Jacobians
//! of desk-scale models), so the kernel is deliberately minimal: LU with
//! partial pivoting, the characteristic polynomial by the Faddeev-LeVerrier
//! recursion, polynomial roots by Durand-Kerner, and a spectral bound on top.
//! No QR, no SVD; the operator 2-norm is obtained from the eigenvalues of
//! `A^T A`.

use crate::error::{Error, Result};
use num_complex::Complex64;

/// Pivot magnitudes below `SINGULAR_PIVOT_REL * norm(A)` are treated as
/// singular. This is the measurable behind the isolated-root audit.
pub const SINGULAR_PIVOT_REL: f64 = 1e-13;

/// Dense row-major matrix, also used for non-square Jacobians.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(order: usize) -> Self {
        let mut m = Matrix::zeros(order, order);
        for i in 0..order {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = if r > 0 { rows[0].len() } else { 0 };
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Matrix {
            rows: r,
            cols: c,
            data,
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols);
        Matrix { rows, cols, data }
    }

    pub fn diagonal(d: &[f64]) -> Self {
        let mut m = Matrix::zeros(d.len(), d.len());
        for (i, &x) in d.iter().enumerate() {
            m[(i, i)] = x;
        }
        m
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn order(&self) -> usize {
        debug_assert!(self.is_square());
        self.rows
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn trace(&self) -> f64 {
        (0..self.order()).map(|i| self[(i, i)]).sum()
    }

    /// Max row-sum norm (operator inf-norm); used for singularity thresholds.
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|x| x.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn norm_frobenius(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, x.len(), "dimension mismatch");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn scale(&self, s: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    /// Operator 2-norm as the square root of the largest eigenvalue of
    /// `A^T A` (symmetric positive semidefinite, so the spectrum is real).
    pub fn norm2(&self) -> f64 {
        if self.rows == 0 || self.cols == 0 {
            return 0.0;
        }
        if self.rows == 1 && self.cols == 1 {
            return self[(0, 0)].abs();
        }
        let ata = self.transpose().matmul(self);
        // Scale to keep the polynomial coefficients tame.
        let s = ata.norm_inf();
        if s == 0.0 {
            return 0.0;
        }
        let spec = eigenvalues(&ata.scale(1.0 / s)).expect("A^T A eigenvalues");
        let lam_max = spec.eigenvalues.iter().map(|z| z.re).fold(0.0, f64::max);
        (lam_max.max(0.0) * s).sqrt()
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// LU factorization with partial pivoting.
pub struct Lu {
    lu: Matrix,
    perm: Vec<usize>,
    sign: f64,
    /// Smallest pivot magnitude encountered; the isolation measurable.
    pub min_pivot: f64,
}

impl Lu {
    pub fn new(a: &Matrix) -> Result<Lu> {
        assert!(a.is_square(), "LU needs a square matrix");
        let n = a.order();
        let threshold = SINGULAR_PIVOT_REL * a.norm_inf().max(f64::MIN_POSITIVE);
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        let mut min_pivot = f64::INFINITY;
        for k in 0..n {
            let mut p = k;
            for i in k + 1..n {
                if lu[(i, k)].abs() > lu[(p, k)].abs() {
                    p = i;
                }
            }
            if p != k {
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = tmp;
                }
                perm.swap(k, p);
                sign = -sign;
            }
            let pivot = lu[(k, k)];
            if pivot.abs() < threshold {
                return Err(Error::SingularMatrix {
                    pivot: pivot.abs(),
                    threshold,
                });
            }
            min_pivot = min_pivot.min(pivot.abs());
            for i in k + 1..n {
                let m = lu[(i, k)] / pivot;
                lu[(i, k)] = m;
                for j in k + 1..n {
                    lu[(i, j)] -= m * lu[(k, j)];
                }
            }
        }
        Ok(Lu {
            lu,
            perm,
            sign,
            min_pivot,
        })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.lu.order();
        assert_eq!(b.len(), n);
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 1..n {
            for j in 0..i {
                x[i] -= self.lu[(i, j)] * x[j];
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                x[i] -= self.lu[(i, j)] * x[j];
            }
            x[i] /= self.lu[(i, i)];
        }
        x
    }

    pub fn det(&self) -> f64 {
        let mut d = self.sign;
        for i in 0..self.lu.order() {
            d *= self.lu[(i, i)];
        }
        d
    }
}

/// Solve `A x = b` by LU with partial pivoting.
pub fn lu_solve(a: &Matrix, b: &[f64]) -> Result<Vec<f64>> {
    Ok(Lu::new(a)?.solve(b))
}

/// Solve `A X = B` column by column; `B` given as a matrix.
pub fn lu_solve_matrix(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    let lu = Lu::new(a)?;
    let mut x = Matrix::zeros(b.rows, b.cols);
    for j in 0..b.cols {
        let col: Vec<f64> = (0..b.rows).map(|i| b[(i, j)]).collect();
        let sol = lu.solve(&col);
        for i in 0..b.rows {
            x[(i, j)] = sol[i];
        }
    }
    Ok(x)
}

/// Monic characteristic polynomial of `A` by the Faddeev-LeVerrier recursion.
///
/// Returns `[c1, c2, ..., cn]` so that `det(lambda I - A) =
/// lambda^n + c1 lambda^(n-1) + ... + cn`.
pub fn char_poly(a: &Matrix) -> Vec<f64> {
    assert!(a.is_square());
    let n = a.order();
    let mut coeffs = Vec::with_capacity(n);
    let mut m = a.clone();
    for k in 1..=n {
        let c = -m.trace() / k as f64;
        coeffs.push(c);
        if k < n {
            let mut mc = m.clone();
            for i in 0..n {
                mc[(i, i)] += c;
            }
            m = a.matmul(&mc);
        }
    }
    coeffs
}

/// Evaluate the monic polynomial with the given tail coefficients at `z`.
pub fn eval_monic(coeffs: &[f64], z: Complex64) -> Complex64 {
    let mut p = Complex64::new(1.0, 0.0);
    for &c in coeffs {
        p = p * z + c;
    }
    p
}

/// Spectrum of a small matrix: all eigenvalues with multiplicity plus the
/// spectral bound `s(A) = max Re(lambda)`.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub eigenvalues: Vec<Complex64>,
    pub spectral_bound: f64,
}

/// All roots of the monic polynomial via Durand-Kerner.
pub fn poly_roots(coeffs: &[f64]) -> Result<Vec<Complex64>> {
    let n = coeffs.len();
    if n == 0 {
        return Ok(vec![]);
    }
    if n == 1 {
        return Ok(vec![Complex64::new(-coeffs[0], 0.0)]);
    }
    let scale = 1.0 + coeffs.iter().map(|c| c.abs()).fold(0.0, f64::max);
    // Non-real, non-root-of-unity seed spreads the iterates.
    let seed = Complex64::new(0.4, 0.9);
    let mut z: Vec<Complex64> = (0..n).map(|k| seed.powu(k as u32 + 1)).collect();
    let tol = 1e-10 * scale;
    for iter in 0..500 {
        let mut max_step = 0.0f64;
        for i in 0..n {
            let p = eval_monic(coeffs, z[i]);
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..n {
                if i != j {
                    denom *= z[i] - z[j];
                }
            }
            if denom.norm() == 0.0 {
                // Perturb coincident iterates and keep going.
                z[i] += Complex64::new(1e-8 * scale, 1e-8 * scale);
                max_step = f64::INFINITY;
                continue;
            }
            let step = p / denom;
            z[i] -= step;
            max_step = max_step.max(step.norm());
        }
        if max_step <= 1e-14 * scale {
            break;
        }
        let residual = z
            .iter()
            .map(|&zi| eval_monic(coeffs, zi).norm())
            .fold(0.0, f64::max);
        if residual <= tol && iter > 0 {
            break;
        }
    }
    let residual = z
        .iter()
        .map(|&zi| eval_monic(coeffs, zi).norm())
        .fold(0.0, f64::max);
    if !residual.is_finite() || residual > tol.max(1e-8 * scale.powi(n as i32)) {
        return Err(Error::NoConvergence {
            iters: 500,
            residual,
        });
    }
    // Deterministic order; conjugate pairs come out adjacent.
    z.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());
    // Snap nearly-real roots so spectral bounds are clean.
    for zi in z.iter_mut() {
        if zi.im.abs() <= 1e-10 * scale {
            zi.im = 0.0;
        }
    }
    Ok(z)
}

/// Eigenvalues through the characteristic polynomial.
pub fn eigenvalues(a: &Matrix) -> Result<Spectrum> {
    assert!(a.is_square());
    if a.order() == 1 {
        let lam = a[(0, 0)];
        return Ok(Spectrum {
            eigenvalues: vec![Complex64::new(lam, 0.0)],
            spectral_bound: lam,
        });
    }
    let coeffs = char_poly(a);
    let eig = poly_roots(&coeffs)?;
    let spectral_bound = eig.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    Ok(Spectrum {
        eigenvalues: eig,
        spectral_bound,
    })
}

/// Spectral bound `s(A)` alone.
pub fn spectral_bound(a: &Matrix) -> Result<f64> {
    Ok(eigenvalues(a)?.spectral_bound)
}

/// Routh-Hurwitz test for a monic cubic `lambda^3 + a1 lambda^2 + a2 lambda + a3`:
/// all roots in the open left half-plane iff all coefficients are positive
/// and `a1 a2 > a3`.
pub fn hurwitz_cubic(a1: f64, a2: f64, a3: f64) -> bool {
    a1 > 0.0 && a2 > 0.0 && a3 > 0.0 && a1 * a2 > a3
}

/// Matrix exponential by scaling and squaring with a Taylor kernel.
///
/// Accurate to near machine precision for the small matrices used here;
/// serves as the independent cross-check for constant-coefficient
/// propagators.
pub fn expm(a: &Matrix) -> Matrix {
    assert!(a.is_square());
    let n = a.order();
    let norm = a.norm_inf();
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let b = a.scale(0.5f64.powi(squarings));
    // Taylor: with |B| <= 1/2, 24 terms are far below f64 epsilon.
    let mut result = Matrix::identity(n);
    let mut term = Matrix::identity(n);
    for k in 1..=24 {
        term = term.matmul(&b).scale(1.0 / k as f64);
        result = result.add(&term);
    }
    for _ in 0..squarings {
        result = result.matmul(&result);
    }
    result
}
