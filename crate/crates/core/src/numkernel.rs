//! Dense complex linear algebra for the small matrices that occur here
//! (at most a few dozen rows). Everything is a pure function of its inputs.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Symmetry tolerance, relative to `max(1, ‖a‖_max)`.
pub const HERM_TOL: f64 = 1e-10;
/// Positivity tolerance on the smallest eigenvalue.
pub const PSD_TOL: f64 = 1e-9;
/// Relative cutoff for singular values.
pub const RANK_TOL: f64 = 1e-9;

const MAX_SWEEPS: usize = 100;

/// Gram-matrix eigenvalues carry an absolute error of a few ulps of the
/// largest one, so relative cutoffs on them are clamped to this floor.
const GRAM_FLOOR: f64 = 64.0 * f64::EPSILON;

fn gram_cut(rank_tol: f64, lmax: f64) -> f64 {
    (rank_tol * rank_tol).max(GRAM_FLOOR) * lmax
}

pub const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
pub const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// Row-major dense complex matrix.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl ComplexMatrix {
    /// Builds a matrix from row-major entries, rejecting non-finite values.
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        Self::new(rows, cols, data.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub(crate) fn from_vec_unchecked(rows: usize, cols: usize, data: Vec<Complex64>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = Complex64::new(d, 0.0);
        }
        m
    }

    /// The matrix `u v*`.
    pub fn outer(u: &[Complex64], v: &[Complex64]) -> Self {
        Self::from_fn(u.len(), v.len(), |i, j| u[i] * v[j].conj())
    }

    /// Column vector as an `n x 1` matrix.
    pub fn column_vector(v: &[Complex64]) -> Self {
        Self { rows: v.len(), cols: 1, data: v.to_vec() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<Complex64> {
        self.data
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * c).collect() }
    }

    pub fn scale_real(&self, c: f64) -> Self {
        self.scale(Complex64::new(c, 0.0))
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `‖a − a*‖_max`; infinite for non-square input.
    pub fn hermitian_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows;
        let mut d: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                d = d.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        d
    }

    /// `(a + a*) / 2`.
    pub fn hermitian_part(&self) -> Self {
        let n = self.rows;
        Self::from_fn(n, n, |i, j| (self[(i, j)] + self[(j, i)].conj()) * 0.5)
    }

    pub fn matvec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.cols, "matvec dimension mismatch");
        (0..self.rows)
            .map(|i| {
                let row = &self.data[i * self.cols..(i + 1) * self.cols];
                row.iter().zip(v).map(|(a, b)| a * b).sum()
            })
            .collect()
    }

    pub fn checked_mul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == ZERO {
                    continue;
                }
                let row = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                let dst = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (d, b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    fn zip_with(&self, rhs: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Result<Self> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    pub fn checked_add(&self, rhs: &Self) -> Result<Self> {
        self.zip_with(rhs, |a, b| a + b)
    }

    pub fn checked_sub(&self, rhs: &Self) -> Result<Self> {
        self.zip_with(rhs, |a, b| a - b)
    }

    /// Max-norm distance; infinite when shapes differ.
    pub fn dist(&self, rhs: &Self) -> f64 {
        self.checked_sub(rhs).map(|d| d.max_abs()).unwrap_or(f64::INFINITY)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.checked_mul(rhs).expect("matrix product shape mismatch")
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.checked_add(rhs).expect("matrix sum shape mismatch")
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.checked_sub(rhs).expect("matrix difference shape mismatch")
    }
}

/// Spectral decomposition `a = U diag(values) U*`, values ascending.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    pub fn vector(&self, k: usize) -> Vec<Complex64> {
        self.vectors.column(k)
    }

    /// `U diag(f(values)) U*`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.values.len();
        let u = &self.vectors;
        let fv: Vec<f64> = self.values.iter().map(|&l| f(l)).collect();
        ComplexMatrix::from_fn(n, n, |i, j| {
            (0..n).map(|k| u[(i, k)] * fv[k] * u[(j, k)].conj()).sum()
        })
    }
}

fn check_hermitian(a: &ComplexMatrix) -> Result<()> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(format!("{}x{} is not square", a.rows, a.cols)));
    }
    let defect = a.hermitian_defect();
    if defect > HERM_TOL * a.max_abs().max(1.0) {
        return Err(Error::NotHermitian { defect });
    }
    Ok(())
}

/// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi rotations.
pub fn eig_hermitian(a: &ComplexMatrix) -> Result<HermitianEigen> {
    check_hermitian(a)?;
    jacobi(a.hermitian_part())
}

/// Same as [`eig_hermitian`] for matrices that are Hermitian by construction;
/// the anti-Hermitian rounding residue is discarded.
pub(crate) fn eig_hermitian_sym(a: &ComplexMatrix) -> Result<HermitianEigen> {
    jacobi(a.hermitian_part())
}

fn jacobi(mut w: ComplexMatrix) -> Result<HermitianEigen> {
    let n = w.rows;
    let mut u = ComplexMatrix::identity(n);
    let scale = w.frobenius();
    if n <= 1 || scale == 0.0 {
        return Ok(finish(w, u));
    }
    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in 0..n {
                if p != q {
                    off += w[(p, q)].norm_sqr();
                }
            }
        }
        if off.sqrt() <= 1e-15 * scale {
            converged = true;
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = w[(p, q)];
                let g = apq.norm();
                if g <= 1e-300 || g <= 1e-18 * scale {
                    continue;
                }
                let phase = apq / g;
                let app = w[(p, p)].re;
                let aqq = w[(q, q)].re;
                let theta = (aqq - app) / (2.0 * g);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // V = D·R with D = diag(1, conj(phase)), R = [[c, s], [-s, c]]
                let vpp = Complex64::new(c, 0.0);
                let vpq = Complex64::new(s, 0.0);
                let vqp = phase.conj() * (-s);
                let vqq = phase.conj() * c;
                for k in 0..n {
                    let wkp = w[(k, p)];
                    let wkq = w[(k, q)];
                    w[(k, p)] = wkp * vpp + wkq * vqp;
                    w[(k, q)] = wkp * vpq + wkq * vqq;
                    let ukp = u[(k, p)];
                    let ukq = u[(k, q)];
                    u[(k, p)] = ukp * vpp + ukq * vqp;
                    u[(k, q)] = ukp * vpq + ukq * vqq;
                }
                for k in 0..n {
                    let wpk = w[(p, k)];
                    let wqk = w[(q, k)];
                    w[(p, k)] = vpp.conj() * wpk + vqp.conj() * wqk;
                    w[(q, k)] = vpq.conj() * wpk + vqq.conj() * wqk;
                }
                w[(p, q)] = ZERO;
                w[(q, p)] = ZERO;
                w[(p, p)] = Complex64::new(w[(p, p)].re, 0.0);
                w[(q, q)] = Complex64::new(w[(q, q)].re, 0.0);
            }
        }
    }
    if !converged {
        return Err(Error::NoConvergence { sweeps: MAX_SWEEPS });
    }
    Ok(finish(w, u))
}

fn finish(w: ComplexMatrix, u: ComplexMatrix) -> HermitianEigen {
    let n = w.rows;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| w[(a, a)].re.total_cmp(&w[(b, b)].re));
    let values = order.iter().map(|&k| w[(k, k)].re).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, j| u[(i, order[j])]);
    HermitianEigen { values, vectors }
}

/// True iff the smallest eigenvalue of the Hermitian matrix `a` is at least `-tol`.
pub fn is_psd(a: &ComplexMatrix, tol: f64) -> Result<bool> {
    let eig = eig_hermitian(a)?;
    Ok(eig.values.first().is_none_or(|&l| l >= -tol))
}

/// Moore–Penrose pseudo-inverse through the eigendecomposition of `a* a`.
/// Singular values below `rank_tol · σ_max` count as zero.
pub fn pinv(a: &ComplexMatrix, rank_tol: f64) -> ComplexMatrix {
    let gram = &a.adjoint() * a;
    let eig = eig_hermitian_sym(&gram).expect("Jacobi on a Gram matrix");
    let smax2 = eig.values.iter().cloned().fold(0.0, f64::max);
    if smax2 <= 0.0 {
        return ComplexMatrix::zeros(a.cols, a.rows);
    }
    let cut = gram_cut(rank_tol, smax2);
    let inv = eig.map(|l| if l > cut { 1.0 / l } else { 0.0 });
    &inv * &a.adjoint()
}

/// Pseudo-inverse of a Hermitian matrix from its own spectrum; more accurate
/// than [`pinv`] since nothing is squared.
pub fn pinv_hermitian(a: &ComplexMatrix, rank_tol: f64) -> ComplexMatrix {
    let eig = eig_hermitian_sym(a).expect("Jacobi on a Hermitian matrix");
    let lmax = eig.values.iter().map(|l| l.abs()).fold(0.0, f64::max);
    if lmax == 0.0 {
        return ComplexMatrix::zeros(a.rows, a.cols);
    }
    eig.map(|l| if l.abs() > rank_tol * lmax { 1.0 / l } else { 0.0 })
}

/// Partial isometry `v` of the polar decomposition `a = v |a|`.
pub fn polar_isometry(a: &ComplexMatrix, rank_tol: f64) -> ComplexMatrix {
    let gram = &a.adjoint() * a;
    let eig = eig_hermitian_sym(&gram).expect("Jacobi on a Gram matrix");
    let smax2 = eig.values.iter().cloned().fold(0.0, f64::max);
    if smax2 <= 0.0 {
        return ComplexMatrix::zeros(a.rows, a.cols);
    }
    let cut = gram_cut(rank_tol, smax2);
    let abs_inv = eig.map(|l| if l > cut { 1.0 / l.sqrt() } else { 0.0 });
    a * &abs_inv
}

/// Numerical rank of a Hermitian positive semidefinite matrix.
pub fn psd_rank(a: &ComplexMatrix, rank_tol: f64) -> usize {
    let eig = eig_hermitian_sym(a).expect("Jacobi on a Hermitian matrix");
    let lmax = eig.values.iter().cloned().fold(0.0, f64::max);
    if lmax <= 0.0 {
        return 0;
    }
    eig.values.iter().filter(|&&l| l > rank_tol * lmax).count()
}

/// Rank of an arbitrary matrix, from the spectrum of the smaller Gram matrix.
pub fn rank(a: &ComplexMatrix, rank_tol: f64) -> usize {
    let gram = if a.rows <= a.cols { a * &a.adjoint() } else { &a.adjoint() * a };
    // singular values are square roots of Gram eigenvalues
    let eig = eig_hermitian_sym(&gram).expect("Jacobi on a Gram matrix");
    let lmax = eig.values.iter().cloned().fold(0.0, f64::max);
    if lmax <= 0.0 {
        return 0;
    }
    let cut = gram_cut(rank_tol, lmax);
    eig.values.iter().filter(|&&l| l > cut).count()
}

/// Orthonormal basis (as columns) of the kernel of `a`.
pub fn null_space(a: &ComplexMatrix, rank_tol: f64) -> Vec<Vec<Complex64>> {
    let gram = &a.adjoint() * a;
    let eig = eig_hermitian_sym(&gram).expect("Jacobi on a Gram matrix");
    let lmax = eig.values.iter().cloned().fold(0.0, f64::max);
    let cut = gram_cut(rank_tol, lmax.max(1.0));
    (0..a.cols)
        .filter(|&k| eig.values[k] <= cut)
        .map(|k| eig.vector(k))
        .collect()
}

pub fn inner(u: &[Complex64], v: &[Complex64]) -> Complex64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

pub fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(rows, cols, |_, _| {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        })
    }

    fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
        random_matrix(rng, n, n).hermitian_part()
    }

    fn reconstruct(e: &HermitianEigen) -> ComplexMatrix {
        e.map(|l| l)
    }

    #[test]
    fn rejects_non_finite_entries() {
        let r = ComplexMatrix::new(1, 2, vec![c(1.0), Complex64::new(f64::NAN, 0.0)]);
        assert_eq!(r, Err(Error::NonFinite));
        assert!(ComplexMatrix::new(2, 2, vec![c(1.0)]).is_err());
    }

    #[test]
    fn eig_identity_and_pauli_x() {
        let e = eig_hermitian(&ComplexMatrix::identity(2)).unwrap();
        assert_eq!(e.values, vec![1.0, 1.0]);

        let x = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
        let e = eig_hermitian(&x).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-14);
        assert!((e.values[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn eig_diagonal_index_spectrum() {
        // diag(2^k, 2^k/(2^k - 1)) at k = 2
        let d = ComplexMatrix::from_real_diag(&[4.0, 4.0 / 3.0]);
        let e = eig_hermitian(&d).unwrap();
        assert!((e.values[0] - 4.0 / 3.0).abs() < 1e-14);
        assert!((e.values[1] - 4.0).abs() < 1e-14);
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        let a = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(eig_hermitian(&a), Err(Error::NotHermitian { .. })));
        assert!(matches!(is_psd(&a, PSD_TOL), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn eig_random_reconstruction_and_unitarity() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 1..=16 {
            let a = random_hermitian(&mut rng, n);
            let e = eig_hermitian(&a).unwrap();
            assert!(reconstruct(&e).dist(&a) <= 1e-9, "n = {n}");
            let uu = &e.vectors.adjoint() * &e.vectors;
            assert!(uu.dist(&ComplexMatrix::identity(n)) <= 1e-9);
            assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn psd_examples() {
        assert!(is_psd(&ComplexMatrix::identity(3), 1e-9).unwrap());
        assert!(!is_psd(&ComplexMatrix::from_real_diag(&[1.0, -1.0]), 1e-9).unwrap());
        assert!(is_psd(&ComplexMatrix::from_real_diag(&[-1e-12, 1.0]), 1e-9).unwrap());
    }

    #[test]
    fn pinv_examples() {
        let i = ComplexMatrix::identity(3);
        assert!(pinv(&i, RANK_TOL).dist(&i) < 1e-14);
        let d = ComplexMatrix::from_real_diag(&[2.0, 0.0]);
        assert!(pinv(&d, RANK_TOL).dist(&ComplexMatrix::from_real_diag(&[0.5, 0.0])) < 1e-14);
        let v = [c(0.6), Complex64::new(0.0, 0.8)];
        let p = ComplexMatrix::outer(&v, &v);
        assert!(pinv(&p, RANK_TOL).dist(&p) < 1e-12);
    }

    #[test]
    fn pinv_penrose_identities_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..40 {
            let rows = rng.random_range(1..=12);
            let cols = rng.random_range(1..=12);
            // random rank deficiency
            let r = rng.random_range(1..=rows.min(cols));
            let a = &random_matrix(&mut rng, rows, r) * &random_matrix(&mut rng, r, cols);
            let p = pinv(&a, RANK_TOL);
            assert!((&(&a * &p) * &a).dist(&a) <= 1e-8);
            assert!((&(&p * &a) * &p).dist(&p) <= 1e-8);
            assert!((&a * &p).hermitian_defect() <= 1e-8);
            assert!((&p * &a).hermitian_defect() <= 1e-8);
        }
    }

    #[test]
    fn polar_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = random_hermitian(&mut rng, 3);
        let u = eig_hermitian(&h).unwrap().vectors;
        assert!(polar_isometry(&u, RANK_TOL).dist(&u) < 1e-10);

        let e12 = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(polar_isometry(&e12.scale_real(2.0), RANK_TOL).dist(&e12) < 1e-14);

        let z = ComplexMatrix::zeros(3, 3);
        assert_eq!(polar_isometry(&z, RANK_TOL), z);
    }

    #[test]
    fn polar_is_partial_isometry_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..30 {
            let n = rng.random_range(1..=8);
            let r = rng.random_range(1..=n);
            let a = &random_matrix(&mut rng, n, r) * &random_matrix(&mut rng, r, n);
            let v = polar_isometry(&a, RANK_TOL);
            assert!((&(&v * &v.adjoint()) * &v).dist(&v) <= 1e-8);
            // v*v is the support projection of |a|
            let vv = &v.adjoint() * &v;
            assert!((&vv * &vv).dist(&vv) <= 1e-8);
            assert!((&a * &vv).dist(&a) <= 1e-8);
        }
    }

    #[test]
    fn null_space_and_rank() {
        let a = ComplexMatrix::from_real(2, 3, &[1.0, 0.0, 1.0, 0.0, 1.0, 0.0]).unwrap();
        assert_eq!(rank(&a, RANK_TOL), 2);
        let ns = null_space(&a, RANK_TOL);
        assert_eq!(ns.len(), 1);
        assert!(norm(&a.matvec(&ns[0])) < 1e-12);
    }
}
