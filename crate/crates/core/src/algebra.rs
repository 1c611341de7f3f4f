//! Multi-matrix algebras `M_{n_1}(ℂ) ⊕ … ⊕ M_{n_s}(ℂ)` in block-diagonal form.
//!
//! Elements are stored block by block. The vectorization used for linear maps
//! concatenates the row-major entries of the blocks in order, so the standard
//! basis of the vector space is the list of matrix units `e^{(i)}_{jk}` in
//! lexicographic `(block, row, column)` order.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkernel::{self, ComplexMatrix, ONE};

/// Tolerance for classifying computed elements.
pub const CLASSIFY_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MultiMatrixAlgebra {
    block_dims: Vec<usize>,
}

impl MultiMatrixAlgebra {
    pub fn new(block_dims: Vec<usize>) -> Result<Self> {
        if block_dims.is_empty() {
            return Err(Error::InvalidDims("an algebra needs at least one block".into()));
        }
        if let Some(i) = block_dims.iter().position(|&n| n == 0) {
            return Err(Error::InvalidDims(format!("block {i} has dimension 0")));
        }
        Ok(Self { block_dims })
    }

    pub fn block_dims(&self) -> &[usize] {
        &self.block_dims
    }

    pub fn num_blocks(&self) -> usize {
        self.block_dims.len()
    }

    pub fn block_dim(&self, i: usize) -> usize {
        self.block_dims[i]
    }

    /// Complex vector-space dimension `Σ n_i²`.
    pub fn dim(&self) -> usize {
        self.block_dims.iter().map(|n| n * n).sum()
    }

    /// Offset of block `i` in the vectorization.
    pub fn vec_offset(&self, i: usize) -> usize {
        self.block_dims[..i].iter().map(|n| n * n).sum()
    }

    pub fn is_commutative(&self) -> bool {
        self.block_dims.iter().all(|&n| n == 1)
    }

    pub fn zero(&self) -> AlgebraElement {
        AlgebraElement {
            algebra: self.clone(),
            blocks: self.block_dims.iter().map(|&n| ComplexMatrix::zeros(n, n)).collect(),
        }
    }

    pub fn identity(&self) -> AlgebraElement {
        AlgebraElement {
            algebra: self.clone(),
            blocks: self.block_dims.iter().map(|&n| ComplexMatrix::identity(n)).collect(),
        }
    }

    pub fn element(&self, blocks: Vec<ComplexMatrix>) -> Result<AlgebraElement> {
        if blocks.len() != self.num_blocks() {
            return Err(Error::DimensionMismatch(format!(
                "{} blocks for an algebra with {} blocks",
                blocks.len(),
                self.num_blocks()
            )));
        }
        for (b, &n) in blocks.iter().zip(&self.block_dims) {
            if b.rows() != n || b.cols() != n {
                return Err(Error::DimensionMismatch(format!(
                    "{}x{} block where {n}x{n} is required",
                    b.rows(),
                    b.cols()
                )));
            }
        }
        Ok(AlgebraElement { algebra: self.clone(), blocks })
    }

    /// Element with the given block and zeros elsewhere.
    pub fn embed_block(&self, i: usize, block: ComplexMatrix) -> Result<AlgebraElement> {
        if i >= self.num_blocks() {
            return Err(Error::IndexOutOfRange { index: i, limit: self.num_blocks() });
        }
        let mut x = self.zero();
        if block.rows() != self.block_dims[i] || block.cols() != self.block_dims[i] {
            return Err(Error::DimensionMismatch(format!("block {i} must be {0}x{0}", self.block_dims[i])));
        }
        x.blocks[i] = block;
        Ok(x)
    }

    /// Element from its vectorization.
    pub fn from_vec(&self, v: &[Complex64]) -> AlgebraElement {
        assert_eq!(v.len(), self.dim(), "vector length does not match algebra dimension");
        let mut blocks = Vec::with_capacity(self.num_blocks());
        let mut off = 0;
        for &n in &self.block_dims {
            blocks.push(ComplexMatrix::from_vec_unchecked(n, n, v[off..off + n * n].to_vec()));
            off += n * n;
        }
        AlgebraElement { algebra: self.clone(), blocks }
    }

    /// The matrix unit `e_{jk}` of block `i`.
    pub fn matrix_unit(&self, i: usize, j: usize, k: usize) -> Result<AlgebraElement> {
        if i >= self.num_blocks() {
            return Err(Error::IndexOutOfRange { index: i, limit: self.num_blocks() });
        }
        let n = self.block_dims[i];
        if j >= n || k >= n {
            return Err(Error::IndexOutOfRange { index: j.max(k), limit: n });
        }
        let mut x = self.zero();
        x.blocks[i][(j, k)] = ONE;
        Ok(x)
    }

    /// Table `units[j][k] = e_{jk}` of block `i`.
    pub fn matrix_units(&self, i: usize) -> Result<Vec<Vec<AlgebraElement>>> {
        if i >= self.num_blocks() {
            return Err(Error::IndexOutOfRange { index: i, limit: self.num_blocks() });
        }
        let n = self.block_dims[i];
        (0..n)
            .map(|j| (0..n).map(|k| self.matrix_unit(i, j, k)).collect())
            .collect()
    }

    /// All matrix units in vectorization order.
    pub fn standard_basis(&self) -> Vec<AlgebraElement> {
        let mut out = Vec::with_capacity(self.dim());
        for (i, &n) in self.block_dims.iter().enumerate() {
            for j in 0..n {
                for k in 0..n {
                    out.push(self.matrix_unit(i, j, k).expect("in range"));
                }
            }
        }
        out
    }

    /// Block identities `1_{n_i}`: pairwise orthogonal, summing to `1`.
    pub fn minimal_central_projections(&self) -> Vec<AlgebraElement> {
        (0..self.num_blocks())
            .map(|i| {
                let mut x = self.zero();
                x.blocks[i] = ComplexMatrix::identity(self.block_dims[i]);
                x
            })
            .collect()
    }
}

/// Block-diagonal element of a [`MultiMatrixAlgebra`].
#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraElement {
    algebra: MultiMatrixAlgebra,
    blocks: Vec<ComplexMatrix>,
}

impl AlgebraElement {
    pub fn algebra(&self) -> &MultiMatrixAlgebra {
        &self.algebra
    }

    pub fn blocks(&self) -> &[ComplexMatrix] {
        &self.blocks
    }

    pub fn block(&self, i: usize) -> &ComplexMatrix {
        &self.blocks[i]
    }

    pub(crate) fn block_mut(&mut self, i: usize) -> &mut ComplexMatrix {
        &mut self.blocks[i]
    }

    pub fn to_vec(&self) -> Vec<Complex64> {
        self.blocks.iter().flat_map(|b| b.data().iter().copied()).collect()
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.algebra != other.algebra {
            return Err(Error::AlgebraMismatch {
                left: self.algebra.block_dims.clone(),
                right: other.algebra.block_dims.clone(),
            });
        }
        Ok(())
    }

    fn zip_blocks(
        &self,
        other: &Self,
        f: impl Fn(&ComplexMatrix, &ComplexMatrix) -> ComplexMatrix,
    ) -> Result<Self> {
        self.check_same(other)?;
        Ok(Self {
            algebra: self.algebra.clone(),
            blocks: self.blocks.iter().zip(&other.blocks).map(|(a, b)| f(a, b)).collect(),
        })
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.zip_blocks(other, |a, b| a + b)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.zip_blocks(other, |a, b| a - b)
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.zip_blocks(other, |a, b| a * b)
    }

    pub fn adjoint(&self) -> Self {
        Self { algebra: self.algebra.clone(), blocks: self.blocks.iter().map(|b| b.adjoint()).collect() }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self { algebra: self.algebra.clone(), blocks: self.blocks.iter().map(|b| b.scale(c)).collect() }
    }

    pub fn scale_real(&self, c: f64) -> Self {
        self.scale(Complex64::new(c, 0.0))
    }

    pub fn max_abs(&self) -> f64 {
        self.blocks.iter().map(|b| b.max_abs()).fold(0.0, f64::max)
    }

    /// Max-norm distance; infinite across different algebras.
    pub fn dist(&self, other: &Self) -> f64 {
        self.checked_sub(other).map(|d| d.max_abs()).unwrap_or(f64::INFINITY)
    }

    pub fn hermitian_defect(&self) -> f64 {
        self.blocks.iter().map(|b| b.hermitian_defect()).fold(0.0, f64::max)
    }

    /// Unweighted trace `Σ_i Tr(x_i)`.
    pub fn raw_trace(&self) -> Complex64 {
        self.blocks.iter().map(|b| b.trace()).sum()
    }

    /// Minimum eigenvalue over all blocks of a Hermitian element.
    pub fn min_eigenvalue(&self) -> Result<f64> {
        let mut m = f64::INFINITY;
        for b in &self.blocks {
            let e = numkernel::eig_hermitian(b)?;
            m = m.min(e.values[0]);
        }
        Ok(m)
    }

    pub fn is_psd(&self, tol: f64) -> Result<bool> {
        Ok(self.min_eigenvalue()? >= -tol)
    }

    /// Per-block scalar `c_i` when every block is `c_i · 1`, within `tol`.
    pub fn central_scalars(&self, tol: f64) -> Option<Vec<Complex64>> {
        self.blocks
            .iter()
            .map(|b| {
                let n = b.rows();
                let c = b.trace() / n as f64;
                let defect = (b - &ComplexMatrix::identity(n).scale(c)).max_abs();
                (defect <= tol).then_some(c)
            })
            .collect()
    }

    /// Distance to the center: largest deviation of a block from its scalar part.
    pub fn central_defect(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| {
                let n = b.rows();
                let c = b.trace() / n as f64;
                (b - &ComplexMatrix::identity(n).scale(c)).max_abs()
            })
            .fold(0.0, f64::max)
    }
}

impl Add for &AlgebraElement {
    type Output = AlgebraElement;
    fn add(self, rhs: &AlgebraElement) -> AlgebraElement {
        self.checked_add(rhs).expect("algebra mismatch in sum")
    }
}

impl Sub for &AlgebraElement {
    type Output = AlgebraElement;
    fn sub(self, rhs: &AlgebraElement) -> AlgebraElement {
        self.checked_sub(rhs).expect("algebra mismatch in difference")
    }
}

impl Mul for &AlgebraElement {
    type Output = AlgebraElement;
    fn mul(self, rhs: &AlgebraElement) -> AlgebraElement {
        self.checked_mul(rhs).expect("algebra mismatch in product")
    }
}

/// Weights `w_i > 0` of the trace `τ_w(x) = Σ_i w_i Tr(x_i)`, stored as given.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceWeights {
    weights: Vec<f64>,
}

impl TraceWeights {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::NonPositiveWeight("empty weight list".into()));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w <= 0.0) {
            return Err(Error::NonPositiveWeight(format!("weight {w}")));
        }
        Ok(Self { weights })
    }

    /// Weights of the normalized canonical trace, `w_i = 1 / Σ n_k`.
    pub fn uniform(alg: &MultiMatrixAlgebra) -> Self {
        Self { weights: vec![1.0; alg.num_blocks()] }.normalized(alg).expect("matching length")
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    fn check(&self, alg: &MultiMatrixAlgebra) -> Result<()> {
        if self.weights.len() != alg.num_blocks() {
            return Err(Error::AlgebraMismatch {
                left: vec![self.weights.len()],
                right: alg.block_dims().to_vec(),
            });
        }
        Ok(())
    }

    /// Rescaled so that `Σ_i w_i n_i = 1`.
    pub fn normalized(&self, alg: &MultiMatrixAlgebra) -> Result<Self> {
        self.check(alg)?;
        let total: f64 = self.weights.iter().zip(alg.block_dims()).map(|(w, &n)| w * n as f64).sum();
        Ok(Self { weights: self.weights.iter().map(|w| w / total).collect() })
    }

    /// `Σ_i w_i Tr(x_i)` with the weights as stored.
    pub fn trace(&self, x: &AlgebraElement) -> Result<Complex64> {
        self.check(x.algebra())?;
        Ok(self.weights.iter().zip(x.blocks()).map(|(w, b)| b.trace() * *w).sum())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Classification {
    pub is_projection: bool,
    pub is_partial_isometry: bool,
    pub is_positive: bool,
    pub is_central: bool,
}

pub fn classify(x: &AlgebraElement) -> Classification {
    let tol = CLASSIFY_TOL;
    let hermitian = x.hermitian_defect() <= tol;
    let x2 = x * x;
    let is_projection = hermitian && x2.dist(x) <= tol;
    let xxx = &(x * &x.adjoint()) * x;
    let is_partial_isometry = xxx.dist(x) <= tol;
    let is_positive = hermitian
        && x.blocks().iter().all(|b| numkernel::is_psd(&b.hermitian_part(), tol).unwrap_or(false));
    let is_central = x.central_defect() <= tol;
    Classification { is_projection, is_partial_isometry, is_positive, is_central }
}

pub fn minimal_central_projections(alg: &MultiMatrixAlgebra) -> Vec<AlgebraElement> {
    alg.minimal_central_projections()
}

pub fn matrix_units(alg: &MultiMatrixAlgebra, block: usize) -> Result<Vec<Vec<AlgebraElement>>> {
    alg.matrix_units(block)
}

/// Whether the element is the zero element within `tol`.
pub fn is_zero(x: &AlgebraElement, tol: f64) -> bool {
    x.max_abs() <= tol
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_element, rng};

    fn alg(d: &[usize]) -> MultiMatrixAlgebra {
        MultiMatrixAlgebra::new(d.to_vec()).unwrap()
    }

    #[test]
    fn rejects_bad_dims() {
        assert!(MultiMatrixAlgebra::new(vec![]).is_err());
        assert!(MultiMatrixAlgebra::new(vec![2, 0]).is_err());
        assert_eq!(alg(&[2, 3]).dim(), 13);
    }

    #[test]
    fn arithmetic_basics() {
        let a = alg(&[2, 1]);
        let mut r = rng(1);
        let x = random_element(&mut r, &a);
        assert!((&a.identity() * &x).dist(&x) < 1e-15);
        assert_eq!(x.adjoint().adjoint(), x);
        let e11 = a.matrix_unit(0, 0, 0).unwrap();
        let e12 = a.matrix_unit(0, 0, 1).unwrap();
        assert_eq!(&e11 * &e12, e12);
        let b = alg(&[3]);
        assert!(matches!(x.checked_mul(&b.identity()), Err(Error::AlgebraMismatch { .. })));
    }

    #[test]
    fn trace_examples() {
        let a = alg(&[2, 3]);
        let w = TraceWeights::new(vec![3.0, 1.0]).unwrap().normalized(&a).unwrap();
        assert!((w.trace(&a.identity()).unwrap() - 1.0).norm() < 1e-15);

        let m2 = alg(&[2]);
        let w = TraceWeights::new(vec![0.5]).unwrap();
        assert!((w.trace(&m2.matrix_unit(0, 0, 0).unwrap()).unwrap() - 0.5).norm() < 1e-15);

        let c2 = alg(&[1, 1]);
        let t = 2f64.powi(-3);
        let w = TraceWeights::new(vec![t, 1.0 - t]).unwrap();
        let p = c2.minimal_central_projections().remove(0);
        assert!((w.trace(&p).unwrap() - t).norm() < 1e-15);

        assert!(TraceWeights::new(vec![1.0, 0.0]).is_err());
        assert!(TraceWeights::new(vec![1.0]).unwrap().trace(&a.identity()).is_err());
    }

    #[test]
    fn trace_property_and_faithfulness() {
        let a = alg(&[3, 1, 2]);
        let w = TraceWeights::new(vec![0.2, 0.5, 0.3]).unwrap();
        let mut r = rng(2);
        for _ in 0..100 {
            let x = random_element(&mut r, &a);
            let y = random_element(&mut r, &a);
            let lhs = w.trace(&(&x * &y)).unwrap();
            let rhs = w.trace(&(&y * &x)).unwrap();
            assert!((lhs - rhs).norm() <= 1e-10);
            let pos = w.trace(&(&x.adjoint() * &x)).unwrap();
            assert!(pos.re > 0.0 && pos.im.abs() < 1e-12);
        }
        assert_eq!(w.trace(&a.zero()).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn classify_examples() {
        let a = alg(&[2, 1]);
        let e11 = a.matrix_unit(0, 0, 0).unwrap();
        let c = classify(&e11);
        assert!(c.is_projection && c.is_partial_isometry && c.is_positive && !c.is_central);
        let f = a.matrix_unit(1, 0, 0).unwrap();
        assert!(classify(&f).is_central);
        let e12 = a.matrix_unit(0, 0, 1).unwrap();
        let c = classify(&e12);
        assert!(c.is_partial_isometry && !c.is_projection && !c.is_positive);
        let c = classify(&a.identity());
        assert!(c.is_projection && c.is_partial_isometry && c.is_positive && c.is_central);
    }

    #[test]
    fn central_projections() {
        let ps = alg(&[1, 1]).minimal_central_projections();
        assert_eq!(ps.len(), 2);
        assert_eq!(ps[0].to_vec(), vec![Complex64::new(1.0, 0.0), Complex64::ZERO]);
        assert_eq!(alg(&[4]).minimal_central_projections(), vec![alg(&[4]).identity()]);

        let a = alg(&[2, 3]);
        let ps = a.minimal_central_projections();
        let mut sum = a.zero();
        for (i, p) in ps.iter().enumerate() {
            for (j, q) in ps.iter().enumerate() {
                let prod = p * q;
                if i == j {
                    assert_eq!(prod, *p);
                } else {
                    assert_eq!(prod, a.zero());
                }
            }
            sum = &sum + p;
        }
        assert_eq!(sum, a.identity());
        assert_eq!(ps[0].raw_trace().re, 2.0);
        assert_eq!(ps[1].raw_trace().re, 3.0);
    }

    #[test]
    fn matrix_unit_relations() {
        let a = alg(&[2, 3]);
        let u = a.matrix_units(1).unwrap();
        for j in 0..3 {
            for k in 0..3 {
                assert_eq!(u[j][k].adjoint(), u[k][j]);
                for l in 0..3 {
                    for m in 0..3 {
                        let expect = if k == l { u[j][m].clone() } else { a.zero() };
                        assert_eq!(&u[j][k] * &u[l][m], expect);
                    }
                }
            }
        }
        let u = a.matrix_units(0).unwrap();
        let id0 = a.minimal_central_projections().remove(0);
        assert_eq!(&u[0][0] + &u[1][1], id0);
        assert!(matches!(a.matrix_units(2), Err(Error::IndexOutOfRange { .. })));
    }
}
