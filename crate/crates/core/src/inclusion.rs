//! Unital inclusions `N ⊆ M` of multi-matrix algebras.
//!
//! The inclusion matrix `Λ` has one row per block of `N` and one column per
//! block of `M`. Ambient block `i` is laid out as consecutive *slots*: for
//! each sub block `j` in ascending order, `Λ_{ji}` copies of `M_{m_j}`. The
//! embedding places `x_j` on every slot of type `j`; no interleaving unitary
//! is ever applied, so all outputs are expressed in these coordinates.

use num_complex::Complex64;
use serde::Serialize;

use crate::algebra::{AlgebraElement, MultiMatrixAlgebra, CLASSIFY_TOL};
use crate::error::{Error, Result};
use crate::numkernel::{self, ComplexMatrix, ONE, RANK_TOL};

/// Tolerance for membership in the embedded subalgebra.
pub const SUB_TOL: f64 = 1e-8;

/// One copy of a sub block inside an ambient block.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Slot {
    pub sub_block: usize,
    pub copy: usize,
    /// First row/column of the slot inside the ambient block.
    pub offset: usize,
    pub size: usize,
}

#[derive(Clone, Debug)]
pub struct Inclusion {
    sub: MultiMatrixAlgebra,
    amb: MultiMatrixAlgebra,
    lambda: Vec<Vec<usize>>,
    slots: Vec<Vec<Slot>>,
    embed_matrix: ComplexMatrix,
    embed_pinv: ComplexMatrix,
}

impl PartialEq for Inclusion {
    fn eq(&self, other: &Self) -> bool {
        self.sub == other.sub && self.amb == other.amb && self.lambda == other.lambda
    }
}

impl Inclusion {
    /// Validates dimensions and `Λ` and fixes the canonical embedding.
    pub fn new(sub_dims: Vec<usize>, amb_dims: Vec<usize>, lambda: Vec<Vec<usize>>) -> Result<Self> {
        let sub = MultiMatrixAlgebra::new(sub_dims)?;
        let amb = MultiMatrixAlgebra::new(amb_dims)?;
        let (r, s) = (sub.num_blocks(), amb.num_blocks());
        if lambda.len() != r || lambda.iter().any(|row| row.len() != s) {
            return Err(Error::DimensionMismatch(format!("inclusion matrix must be {r}x{s}")));
        }
        for (j, row) in lambda.iter().enumerate() {
            if row.iter().all(|&l| l == 0) {
                return Err(Error::DeadBlock { kind: "row", index: j });
            }
        }
        for i in 0..s {
            if lambda.iter().all(|row| row[i] == 0) {
                return Err(Error::DeadBlock { kind: "column", index: i });
            }
        }
        for i in 0..s {
            let found: usize = (0..r).map(|j| lambda[j][i] * sub.block_dim(j)).sum();
            if found != amb.block_dim(i) {
                return Err(Error::NotUnital { block: i, expected: amb.block_dim(i), found });
            }
        }

        let slots: Vec<Vec<Slot>> = (0..s)
            .map(|i| {
                let mut offset = 0;
                let mut v = Vec::new();
                for j in 0..r {
                    for copy in 0..lambda[j][i] {
                        let size = sub.block_dim(j);
                        v.push(Slot { sub_block: j, copy, offset, size });
                        offset += size;
                    }
                }
                v
            })
            .collect();

        let (dm, dn) = (amb.dim(), sub.dim());
        let mut embed_matrix = ComplexMatrix::zeros(dm, dn);
        for (i, block_slots) in slots.iter().enumerate() {
            let n = amb.block_dim(i);
            let base = amb.vec_offset(i);
            for slot in block_slots {
                let m = slot.size;
                let sub_base = sub.vec_offset(slot.sub_block);
                for a in 0..m {
                    for b in 0..m {
                        let row = base + (slot.offset + a) * n + slot.offset + b;
                        embed_matrix[(row, sub_base + a * m + b)] = ONE;
                    }
                }
            }
        }
        let embed_pinv = numkernel::pinv(&embed_matrix, RANK_TOL);
        Ok(Self { sub, amb, lambda, slots, embed_matrix, embed_pinv })
    }

    pub fn sub(&self) -> &MultiMatrixAlgebra {
        &self.sub
    }

    pub fn amb(&self) -> &MultiMatrixAlgebra {
        &self.amb
    }

    pub fn lambda(&self) -> &[Vec<usize>] {
        &self.lambda
    }

    pub fn multiplicity(&self, sub_block: usize, amb_block: usize) -> usize {
        self.lambda[sub_block][amb_block]
    }

    /// Slots of ambient block `i`, in layout order.
    pub fn slots(&self, i: usize) -> &[Slot] {
        &self.slots[i]
    }

    /// Row of ambient block `i` holding row `k` of the given slot.
    pub fn slot_position(&self, i: usize, slot: usize, k: usize) -> usize {
        self.slots[i][slot].offset + k
    }

    /// `dim M × dim N` matrix of the embedding in vectorized coordinates.
    pub fn embed_matrix(&self) -> &ComplexMatrix {
        &self.embed_matrix
    }

    /// `N = M` as sets.
    pub fn is_trivial(&self) -> bool {
        self.sub.dim() == self.amb.dim()
    }

    /// Every `Λ_{ji} ≤ 1`, which is exactly when `N' ∩ M` is abelian.
    pub fn has_abelian_commutant(&self) -> bool {
        self.lambda.iter().flatten().all(|&l| l <= 1)
    }

    pub fn embed(&self, x: &AlgebraElement) -> Result<AlgebraElement> {
        if x.algebra() != &self.sub {
            return Err(Error::AlgebraMismatch {
                left: x.algebra().block_dims().to_vec(),
                right: self.sub.block_dims().to_vec(),
            });
        }
        let mut blocks = Vec::with_capacity(self.amb.num_blocks());
        for (i, block_slots) in self.slots.iter().enumerate() {
            let n = self.amb.block_dim(i);
            let mut b = ComplexMatrix::zeros(n, n);
            for slot in block_slots {
                let xj = x.block(slot.sub_block);
                for a in 0..slot.size {
                    for c in 0..slot.size {
                        b[(slot.offset + a, slot.offset + c)] = xj[(a, c)];
                    }
                }
            }
            blocks.push(b);
        }
        self.amb.element(blocks)
    }

    /// Least-squares preimage under the embedding, if `y` lies in the image.
    pub fn coefficients_in_sub(&self, y: &AlgebraElement) -> Result<AlgebraElement> {
        if y.algebra() != &self.amb {
            return Err(Error::AlgebraMismatch {
                left: y.algebra().block_dims().to_vec(),
                right: self.amb.block_dims().to_vec(),
            });
        }
        let x = self.sub.from_vec(&self.embed_pinv.matvec(&y.to_vec()));
        let distance = self.embed(&x)?.dist(y);
        if distance > SUB_TOL {
            return Err(Error::NotInSub { distance });
        }
        Ok(x)
    }

    /// Orthonormal basis of `N' ∩ M` for `⟨x, y⟩ = Tr(x* y) / Tr(1)`, from the
    /// kernel of the commutation map over the matrix units of `N`.
    pub fn relative_commutant(&self) -> Vec<AlgebraElement> {
        let dm = self.amb.dim();
        let basis = self.amb.standard_basis();
        let gens: Vec<AlgebraElement> = self
            .sub
            .standard_basis()
            .iter()
            .map(|e| self.embed(e).expect("sub element"))
            .collect();
        let mut stacked = ComplexMatrix::zeros(gens.len() * dm, dm);
        for (g, f) in gens.iter().enumerate() {
            for (col, y) in basis.iter().enumerate() {
                let comm = &(y * f) - &(f * y);
                for (row, z) in comm.to_vec().into_iter().enumerate() {
                    stacked[(g * dm + row, col)] = z;
                }
            }
        }
        let total: usize = self.amb.block_dims().iter().sum();
        let scale = (total as f64).sqrt();
        numkernel::null_space(&stacked, RANK_TOL)
            .into_iter()
            .map(|v| {
                let v: Vec<Complex64> = v.into_iter().map(|z| z * scale).collect();
                self.amb.from_vec(&v)
            })
            .collect()
    }

    /// `dim(N' ∩ M) = Σ_{i,j} Λ_{ji}²`.
    pub fn commutant_dim_formula(&self) -> usize {
        self.lambda.iter().flatten().map(|l| l * l).sum()
    }

    /// Index of the ambient block carried by `q`, if `q` is a minimal central projection.
    pub fn central_block_of(&self, q: &AlgebraElement) -> Result<usize> {
        if q.algebra() != &self.amb {
            return Err(Error::NotCentralProjection);
        }
        self.amb
            .minimal_central_projections()
            .iter()
            .position(|p| p.dist(q) <= CLASSIFY_TOL)
            .ok_or(Error::NotCentralProjection)
    }

    /// The inclusion `qN ⊆ qM` for a minimal central projection `q` of `M`.
    pub fn compress_central(&self, q: &AlgebraElement) -> Result<CentralCompression> {
        let block = self.central_block_of(q)?;
        let kept: Vec<usize> = (0..self.sub.num_blocks()).filter(|&j| self.lambda[j][block] > 0).collect();
        let inclusion = Inclusion::new(
            kept.iter().map(|&j| self.sub.block_dim(j)).collect(),
            vec![self.amb.block_dim(block)],
            kept.iter().map(|&j| vec![self.lambda[j][block]]).collect(),
        )?;
        Ok(CentralCompression { parent: self.clone(), block, kept_sub_blocks: kept, inclusion })
    }
}

/// `qN ⊆ qM` together with the maps between it and `N ⊆ M`.
#[derive(Clone, Debug)]
pub struct CentralCompression {
    parent: Inclusion,
    block: usize,
    kept_sub_blocks: Vec<usize>,
    inclusion: Inclusion,
}

impl CentralCompression {
    pub fn inclusion(&self) -> &Inclusion {
        &self.inclusion
    }

    pub fn block(&self) -> usize {
        self.block
    }

    /// Blocks `j` of `N` with `Λ_{ji} > 0`; their count is `dim Z(qN)`.
    pub fn kept_sub_blocks(&self) -> &[usize] {
        &self.kept_sub_blocks
    }

    /// `x ↦ qx`, as an element of the compressed ambient algebra.
    pub fn amb_forward(&self, x: &AlgebraElement) -> AlgebraElement {
        self.inclusion
            .amb()
            .element(vec![x.block(self.block).clone()])
            .expect("block shape")
    }

    /// Inverse of [`Self::amb_forward`] on `qM`.
    pub fn amb_backward(&self, y: &AlgebraElement) -> AlgebraElement {
        self.parent.amb().embed_block(self.block, y.block(0).clone()).expect("block shape")
    }

    /// `n ↦ qn`, as an element of the compressed sub algebra.
    pub fn sub_forward(&self, n: &AlgebraElement) -> AlgebraElement {
        let blocks = self.kept_sub_blocks.iter().map(|&j| n.block(j).clone()).collect();
        self.inclusion.sub().element(blocks).expect("block shapes")
    }

    /// Element of `N` supported on the kept blocks.
    pub fn sub_backward(&self, n: &AlgebraElement) -> AlgebraElement {
        let mut x = self.parent.sub().zero();
        for (k, &j) in self.kept_sub_blocks.iter().enumerate() {
            *x.block_mut(j) = n.block(k).clone();
        }
        x
    }
}
