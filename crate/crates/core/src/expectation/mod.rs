//! Conditional expectations `E: M → N` onto the embedded subalgebra.
//!
//! An expectation is stored as the `dim N × dim M` matrix of `x ↦ E(x) ∈ N`
//! in canonical coordinates; composing with the embedding matrix gives `E` as
//! a map `M → M`.

mod index;
mod kconst;

use std::sync::OnceLock;

use num_complex::Complex64;

pub use index::{quasi_basis, reconstruction_error, watatani_index, IndexElement};
pub use kconst::{KAnalysis, KCertificate, Witness, CERT_GAP, CERT_SLACK, K_SEED, K_STARTS};

use crate::algebra::{AlgebraElement, TraceWeights};
use crate::error::{Error, Result};
use crate::inclusion::Inclusion;
use crate::numkernel::{self, ComplexMatrix};
use crate::random::{random_element, random_rank_one, rng};

/// Tolerance for the defining identities of an expectation.
pub const EXPECTATION_TOL: f64 = 1e-8;
/// Relative spectral floor below which `E(a*a)` or the faithfulness form count as singular.
const SINGULAR_TOL: f64 = 1e-12;

#[derive(Clone, Debug)]
pub enum ExpectationKind {
    TracePreserving { weights: TraceWeights },
    Perturbed { base: Box<ConditionalExpectation>, a: AlgebraElement },
    /// `E'(x) = E(x) E(q)^{-1} q` on `qN ⊆ qM` for the central block `block`.
    Compressed { parent: Box<ConditionalExpectation>, block: usize },
}

impl ExpectationKind {
    pub fn label(&self) -> &'static str {
        match self {
            ExpectationKind::TracePreserving { .. } => "trace_preserving",
            ExpectationKind::Perturbed { .. } => "perturbed",
            ExpectationKind::Compressed { .. } => "compressed",
        }
    }
}

#[derive(Clone, Debug)]
pub struct ConditionalExpectation {
    inc: Inclusion,
    kind: ExpectationKind,
    to_sub: ComplexMatrix,
    matrix: ComplexMatrix,
    k_cache: OnceLock<Result<KAnalysis>>,
}

impl ConditionalExpectation {
    fn from_to_sub(inc: Inclusion, kind: ExpectationKind, to_sub: ComplexMatrix) -> Result<Self> {
        let matrix = inc.embed_matrix() * &to_sub;
        let e = Self { inc, kind, to_sub, matrix, k_cache: OnceLock::new() };
        if !e.is_faithful() {
            return Err(Error::NotFaithful);
        }
        Ok(e)
    }

    /// The unique `E` with `τ_w(E(x) n) = τ_w(x n)` for all `n ∈ N`.
    pub fn trace_preserving(inc: &Inclusion, w: &TraceWeights) -> Result<Self> {
        let amb = inc.amb();
        if w.weights().len() != amb.num_blocks() {
            return Err(Error::AlgebraMismatch {
                left: vec![w.weights().len()],
                right: amb.block_dims().to_vec(),
            });
        }
        // τ_w(f* x) = (f, W x) for the diagonal weight matrix W on vectorized entries
        let mut wdiag = Vec::with_capacity(amb.dim());
        for (i, &n) in amb.block_dims().iter().enumerate() {
            wdiag.extend(std::iter::repeat_n(w.weights()[i], n * n));
        }
        let emb = inc.embed_matrix();
        let rhs = ComplexMatrix::from_fn(emb.cols(), emb.rows(), |a, c| emb[(c, a)].conj() * wdiag[c]);
        let gram = &rhs * emb;
        let eig = numkernel::eig_hermitian(&gram.hermitian_part())?;
        let (lmin, lmax) = (eig.values[0], *eig.values.last().expect("nonempty"));
        if !(lmin > SINGULAR_TOL * lmax) {
            return Err(Error::SingularTrace);
        }
        let to_sub = &eig.map(|l| 1.0 / l) * &rhs;
        Self::from_to_sub(
            inc.clone(),
            ExpectationKind::TracePreserving { weights: w.clone() },
            to_sub,
        )
    }

    /// `x ↦ E(a'* x a')` with `a' = a·E(a*a)^{-1/2}`, so that the result is unital.
    pub fn perturb(&self, a: &AlgebraElement) -> Result<Self> {
        let inc = &self.inc;
        if a.algebra() != inc.amb() {
            return Err(Error::AlgebraMismatch {
                left: a.algebra().block_dims().to_vec(),
                right: inc.amb().block_dims().to_vec(),
            });
        }
        let scale = a.max_abs().max(1.0);
        let mut defect: f64 = 0.0;
        for e in inc.sub().standard_basis() {
            let f = inc.embed(&e)?;
            defect = defect.max((&(a * &f) - &(&f * a)).max_abs() / scale);
        }
        if defect > EXPECTATION_TOL {
            return Err(Error::NotInCommutant { defect });
        }
        let eaa = self.apply_sub(&(&a.adjoint() * a));
        let mut inv_sqrt = Vec::with_capacity(eaa.blocks().len());
        for b in eaa.blocks() {
            let eig = numkernel::eig_hermitian_sym(b)?;
            let lmax = eig.values.last().copied().unwrap_or(0.0);
            if !(eig.values[0] > SINGULAR_TOL * lmax.max(1.0)) {
                return Err(Error::NotNormalizable);
            }
            inv_sqrt.push(eig.map(|l| 1.0 / l.sqrt()));
        }
        let c = inc.sub().element(inv_sqrt)?;
        let a2 = a * &inc.embed(&c)?;
        let a2_adj = a2.adjoint();
        let cols: Vec<Vec<Complex64>> = inc
            .amb()
            .standard_basis()
            .iter()
            .map(|x| self.to_sub.matvec(&(&(&a2_adj * x) * &a2).to_vec()))
            .collect();
        let to_sub = ComplexMatrix::from_fn(inc.sub().dim(), cols.len(), |r, c| cols[c][r]);
        Self::from_to_sub(
            inc.clone(),
            ExpectationKind::Perturbed { base: Box::new(self.clone()), a: a.clone() },
            to_sub,
        )
    }

    /// `E'(x) = E(x) E(q)^{-1} q` on the compression `qN ⊆ qM`.
    /// Checks `K(E') ≤ K(E) + 1e-6` and `dim Z(qN) ≤ ⌊K(E)⌋`.
    pub fn compress(&self, q: &AlgebraElement) -> Result<Self> {
        let comp = self.inc.compress_central(q)?;
        let eq = self.apply_sub(q);
        let mut inv = eq.clone();
        for &j in comp.kept_sub_blocks() {
            let b = eq.block(j);
            let eig = numkernel::eig_hermitian_sym(b)?;
            if !(eig.values[0] > SINGULAR_TOL) {
                return Err(Error::NotFaithful);
            }
            *inv.block_mut(j) = eig.map(|l| 1.0 / l);
        }
        let sub_inc = comp.inclusion().clone();
        let cols: Vec<Vec<Complex64>> = sub_inc
            .amb()
            .standard_basis()
            .iter()
            .map(|y| {
                let ex = self.apply_sub(&comp.amb_backward(y));
                comp.sub_forward(&(&ex * &inv)).to_vec()
            })
            .collect();
        let to_sub = ComplexMatrix::from_fn(sub_inc.sub().dim(), cols.len(), |r, c| cols[c][r]);
        let block = comp.block();
        let compressed = Self::from_to_sub(
            sub_inc,
            ExpectationKind::Compressed { parent: Box::new(self.clone()), block },
            to_sub,
        )?;
        let k = self.k_constant()?;
        let k2 = compressed.k_constant()?;
        if k2 > k + 1e-6 {
            return Err(Error::Invariant(format!("compressed K {k2} exceeds K {k}")));
        }
        let centre = comp.kept_sub_blocks().len();
        if centre > floor_k(k) {
            return Err(Error::Invariant(format!("dim Z(qN) = {centre} exceeds floor(K) for K = {k}")));
        }
        Ok(compressed)
    }

    pub fn inclusion(&self) -> &Inclusion {
        &self.inc
    }

    pub fn kind(&self) -> &ExpectationKind {
        &self.kind
    }

    /// `dim N × dim M` matrix of `x ↦ E(x)` with values in `N`.
    pub fn to_sub_matrix(&self) -> &ComplexMatrix {
        &self.to_sub
    }

    /// `dim M × dim M` matrix of `embed ∘ E`.
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// `E(x)` as an element of `N`.
    pub fn apply_sub(&self, x: &AlgebraElement) -> AlgebraElement {
        assert_eq!(x.algebra(), self.inc.amb(), "argument must lie in the ambient algebra");
        self.inc.sub().from_vec(&self.to_sub.matvec(&x.to_vec()))
    }

    /// `E(x)` as an element of `M`.
    pub fn apply(&self, x: &AlgebraElement) -> AlgebraElement {
        assert_eq!(x.algebra(), self.inc.amb(), "argument must lie in the ambient algebra");
        self.inc.amb().from_vec(&self.matrix.matvec(&x.to_vec()))
    }

    /// Density matrix of `y ↦ τ(E(y))` on ambient block `i`, with `τ` the
    /// unweighted trace of `N`. `E` is faithful iff every density is positive definite.
    fn faithfulness_density(&self, i: usize) -> ComplexMatrix {
        let amb = self.inc.amb();
        let n = amb.block_dim(i);
        let off = amb.vec_offset(i);
        let sub = self.inc.sub();
        let diag: Vec<usize> = (0..sub.num_blocks())
            .flat_map(|j| {
                let (o, m) = (sub.vec_offset(j), sub.block_dim(j));
                (0..m).map(move |k| o + k * m + k)
            })
            .collect();
        ComplexMatrix::from_fn(n, n, |l, lp| {
            // τ(E(x*x)) = Σ_k Σ_{l,l'} conj(x_{kl}) D_{ll'} x_{kl'}
            let col = off + l * n + lp;
            diag.iter().map(|&r| self.to_sub[(r, col)]).sum()
        })
    }

    pub fn is_faithful(&self) -> bool {
        (0..self.inc.amb().num_blocks()).all(|i| {
            let d = self.faithfulness_density(i);
            match numkernel::eig_hermitian_sym(&d) {
                Ok(eig) => {
                    let lmax = eig.values.last().copied().unwrap_or(0.0);
                    lmax > 0.0 && eig.values[0] > SINGULAR_TOL.sqrt() * lmax
                }
                Err(_) => false,
            }
        })
    }

    /// Checks unitality, idempotence, the bimodule property and positivity on
    /// seeded random samples, and faithfulness exactly.
    pub fn validate(&self, samples: usize, seed: u64) -> Result<()> {
        let (amb, sub) = (self.inc.amb(), self.inc.sub());
        let unit = self.apply(&amb.identity()).dist(&amb.identity());
        if unit > EXPECTATION_TOL {
            return Err(Error::Invariant(format!("E(1) differs from 1 by {unit:.3e}")));
        }
        let sq = (&self.matrix * &self.matrix).dist(&self.matrix);
        if sq > EXPECTATION_TOL {
            return Err(Error::Invariant(format!("E is not idempotent (defect {sq:.3e})")));
        }
        let mut r = rng(seed);
        for _ in 0..samples {
            let x = random_element(&mut r, amb);
            let n1 = self.inc.embed(&random_element(&mut r, sub))?;
            let n2 = self.inc.embed(&random_element(&mut r, sub))?;
            let lhs = self.apply(&(&(&n1 * &x) * &n2));
            let rhs = &(&n1 * &self.apply(&x)) * &n2;
            let d = lhs.dist(&rhs) / (1.0 + rhs.max_abs());
            if d > EXPECTATION_TOL {
                return Err(Error::Invariant(format!("bimodule defect {d:.3e}")));
            }
            let p = random_rank_one(&mut r, amb);
            if !self.apply_sub(&p).is_psd(EXPECTATION_TOL)? {
                return Err(Error::Invariant("E maps a positive element outside the positive cone".into()));
            }
        }
        if !self.is_faithful() {
            return Err(Error::NotFaithful);
        }
        Ok(())
    }

    /// Smallest eigenvalue of `k·E(x) − x`.
    pub fn pimsner_popa_defect(&self, k: f64, x: &AlgebraElement) -> Result<f64> {
        (&self.apply(x).scale_real(k) - x).hermitian_part().min_eigenvalue()
    }

    /// `K(E)`: closed form when available, otherwise the optimizer maximum.
    pub fn k_constant(&self) -> Result<f64> {
        self.k_analysis().map(|a| a.value)
    }

    pub fn k_analysis(&self) -> Result<KAnalysis> {
        self.k_cache.get_or_init(|| kconst::analyze(self)).clone()
    }

    /// Seeded rank-one probes above `K(E)` and the optimizer witness below it.
    pub fn k_certificate(&self, probes: usize, seed: u64) -> Result<KCertificate> {
        kconst::certify(self, probes, seed)
    }
}

/// `⌊K⌋`, robust to `K` landing just below an integer.
pub fn floor_k(k: f64) -> usize {
    (k + 1e-6).floor().max(0.0) as usize
}

trait HermitianPart {
    fn hermitian_part(&self) -> AlgebraElement;
}

impl HermitianPart for AlgebraElement {
    fn hermitian_part(&self) -> AlgebraElement {
        (self + &self.adjoint()).scale_real(0.5)
    }
}
