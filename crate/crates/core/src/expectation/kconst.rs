//! The Pimsner–Popa constant `K(E) = inf { K : K·E − id ⪰ 0 }`.
//!
//! Positivity of `K·E − id` is decided on the extreme rays `ξξ*` of the
//! positive cone, all of which live in a single ambient block. For a unit
//! vector `ξ` in block `i` with `B = [E(ξξ*)]_i`, the smallest admissible `K`
//! is `f(ξ) = ξ* B⁺ ξ`, so `K(E) = max_i max_ξ f(ξ)`.

use num_complex::Complex64;
use serde::Serialize;

use super::ConditionalExpectation;
use crate::error::{Error, Result};
use crate::numkernel::{self, ComplexMatrix, RANK_TOL};
use crate::random::{random_rank_one, rng, unit_vector};

pub const K_STARTS: usize = 32;
pub const K_SEED: u64 = 0xF1DE;
const STALL_TOL: f64 = 1e-5;
const AGREE_TOL: f64 = 1e-6;
const MAX_ITERS: usize = 2000;

/// A unit vector of ambient block `block` maximizing `ξ* E(ξξ*)⁺ ξ`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub block: usize,
    #[serde(skip)]
    pub vector: Vec<Complex64>,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KAnalysis {
    /// Closed form when available, otherwise the optimizer value.
    pub value: f64,
    pub numeric: f64,
    pub closed_form: Option<f64>,
    /// Optimizer maximum per ambient block.
    pub block_values: Vec<f64>,
    /// Spread of the multi-start results per ambient block.
    pub block_spreads: Vec<f64>,
    pub witness: Witness,
}

/// `ξξ* ↦ [E(ξξ*)]_i` restricted to one ambient block, in vectorized form.
struct BlockMap {
    n: usize,
    l: ComplexMatrix,
    l_adj: ComplexMatrix,
}

impl BlockMap {
    fn new(e: &ConditionalExpectation, i: usize) -> Self {
        let amb = e.inclusion().amb();
        let (n, off) = (amb.block_dim(i), amb.vec_offset(i));
        let m = e.matrix();
        let l = ComplexMatrix::from_fn(n * n, n * n, |r, c| m[(off + r, off + c)]);
        let l_adj = l.adjoint();
        Self { n, l, l_adj }
    }

    fn apply(map: &ComplexMatrix, n: usize, x: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix::from_vec_unchecked(n, n, map.matvec(x.data())).hermitian_part()
    }

    /// `F(v) = v* B(v)⁺ v` and its gradient `2(η − C v)` with `η = B⁺v`,
    /// `C = L†(ηη*)`. `F` is invariant under `v ↦ tv`, so no normalization is needed.
    fn eval(&self, v: &[Complex64]) -> (f64, Vec<Complex64>) {
        let n = self.n;
        let b = Self::apply(&self.l, n, &ComplexMatrix::outer(v, v));
        let eta = numkernel::pinv_hermitian(&b, RANK_TOL).matvec(v);
        let f = numkernel::inner(v, &eta).re;
        let c = Self::apply(&self.l_adj, n, &ComplexMatrix::outer(&eta, &eta));
        let cv = c.matvec(v);
        let g = eta.iter().zip(&cv).map(|(a, b)| (a - b) * 2.0).collect();
        (f, g)
    }

    fn value(&self, xi: &[Complex64]) -> f64 {
        let b = Self::apply(&self.l, self.n, &ComplexMatrix::outer(xi, xi));
        numkernel::inner(xi, &numkernel::pinv_hermitian(&b, RANK_TOL).matvec(xi)).re
    }

    /// BFGS ascent on `F` over `ℂ^n ≅ ℝ^{2n}` with Armijo backtracking.
    fn ascend(&self, start: Vec<Complex64>) -> (f64, Vec<Complex64>) {
        let dim = 2 * self.n;
        let to_real = |z: &[Complex64]| z.iter().flat_map(|c| [c.re, c.im]).collect::<Vec<f64>>();
        let to_complex = |x: &[f64]| x.chunks(2).map(|p| Complex64::new(p[0], p[1])).collect::<Vec<_>>();
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        let identity = |d: usize| (0..d * d).map(|k| if k % (d + 1) == 0 { 1.0 } else { 0.0 }).collect::<Vec<f64>>();

        let mut x = to_real(&normalize(start.clone()));
        let (mut f, g) = self.eval(&start);
        let mut grad = to_real(&g);
        let mut h = identity(dim);
        for _ in 0..MAX_ITERS {
            if dot(&grad, &grad).sqrt() <= 1e-11 * f.max(1.0) {
                break;
            }
            // tangent directions only: radial growth would shrink components F does not depend on
            let tangent = |mut d: Vec<f64>| {
                let along = dot(&d, &x) / dot(&x, &x);
                d.iter_mut().zip(&x).for_each(|(a, b)| *a -= along * b);
                d
            };
            let mut p = tangent((0..dim).map(|r| dot(&h[r * dim..(r + 1) * dim], &grad)).collect());
            let mut slope = dot(&p, &grad);
            if slope <= 0.0 {
                h = identity(dim);
                p = tangent(grad.clone());
                slope = dot(&p, &grad);
            }
            let mut t = 1.0;
            let mut accepted = None;
            while t > 1e-14 {
                let cand: Vec<f64> = x.iter().zip(&p).map(|(a, b)| a + t * b).collect();
                let fc = self.value(&to_complex(&cand));
                if fc.is_finite() && fc >= f + 1e-4 * t * slope {
                    accepted = Some(cand);
                    break;
                }
                t *= 0.5;
            }
            let Some(mut cand) = accepted else { break };
            let cn = dot(&cand, &cand).sqrt();
            cand.iter_mut().for_each(|c| *c /= cn);
            let (fc, gc) = self.eval(&to_complex(&cand));
            let gc = to_real(&gc);
            // minimization form: s = step, y = −(∇F_new − ∇F_old)
            let s: Vec<f64> = cand.iter().zip(&x).map(|(a, b)| a - b).collect();
            let y: Vec<f64> = grad.iter().zip(&gc).map(|(a, b)| a - b).collect();
            let sy = dot(&s, &y);
            if sy > 1e-14 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() {
                let hy: Vec<f64> = (0..dim).map(|r| dot(&h[r * dim..(r + 1) * dim], &y)).collect();
                let yhy = dot(&y, &hy);
                for r in 0..dim {
                    for c in 0..dim {
                        h[r * dim + c] += (sy + yhy) * s[r] * s[c] / (sy * sy) - (hy[r] * s[c] + s[r] * hy[c]) / sy;
                    }
                }
            }
            let gain = fc - f;
            x = cand;
            f = fc;
            grad = gc;
            if gain <= 1e-15 * f && t < 1e-8 {
                break;
            }
        }
        (f, normalize(to_complex(&x)))
    }
}

fn normalize(mut v: Vec<Complex64>) -> Vec<Complex64> {
    let nv = numkernel::norm(&v);
    for z in &mut v {
        *z /= nv;
    }
    v
}

/// `max_i Σ_j 1/π_{ij}` where `E(s_{ij}) = π_{ij}` on block `j` of `N` for the
/// slot projections `s_{ij}`; valid when every `Λ_{ji} ≤ 1`.
pub(super) fn closed_form(e: &ConditionalExpectation) -> Option<f64> {
    let inc = e.inclusion();
    if !inc.has_abelian_commutant() {
        return None;
    }
    let amb = inc.amb();
    let mut best: f64 = 0.0;
    for i in 0..amb.num_blocks() {
        let n = amb.block_dim(i);
        let mut total = 0.0;
        for slot in inc.slots(i) {
            let mut s = ComplexMatrix::zeros(n, n);
            for k in 0..slot.size {
                s[(slot.offset + k, slot.offset + k)] = numkernel::ONE;
            }
            let es = e.apply_sub(&amb.embed_block(i, s).expect("block shape"));
            let pi = es.block(slot.sub_block).trace().re / slot.size as f64;
            total += 1.0 / pi;
        }
        best = best.max(total);
    }
    Some(best)
}

pub(super) fn analyze(e: &ConditionalExpectation) -> Result<KAnalysis> {
    let amb = e.inclusion().amb();
    let mut r = rng(K_SEED);
    let mut block_values = Vec::with_capacity(amb.num_blocks());
    let mut block_spreads = Vec::with_capacity(amb.num_blocks());
    let mut witness: Option<Witness> = None;
    for i in 0..amb.num_blocks() {
        let map = BlockMap::new(e, i);
        let starts: Vec<Vec<Complex64>> = (0..K_STARTS).map(|_| unit_vector(&mut r, map.n)).collect();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let mut best = Vec::new();
        for s in starts {
            let (f, xi) = map.ascend(s);
            lo = lo.min(f);
            if f > hi {
                hi = f;
                best = xi;
            }
        }
        let spread = hi - lo;
        if !hi.is_finite() || spread > STALL_TOL {
            return Err(Error::OptimizerStall { block: i, spread });
        }
        block_values.push(hi);
        block_spreads.push(spread);
        if witness.as_ref().is_none_or(|w| hi > w.value) {
            witness = Some(Witness { block: i, vector: best, value: hi });
        }
    }
    let witness = witness.expect("at least one block");
    let numeric = witness.value;
    assert!(numeric >= 1.0 - 1e-9, "K(E) below 1 signals a non-unital map");
    let closed = closed_form(e);
    if let Some(c) = closed {
        if (c - numeric).abs() > AGREE_TOL {
            return Err(Error::MethodDisagreement { closed: c, numeric });
        }
    }
    Ok(KAnalysis { value: closed.unwrap_or(numeric), numeric, closed_form: closed, block_values, block_spreads, witness })
}

/// Two-sided check of `K`: rank-one probes of `(K + slack)·E − id` and the
/// witness of `(K − gap)·E − id`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KCertificate {
    pub probes: usize,
    /// Smallest eigenvalue of `(K + slack)·E(x) − x` over the probes.
    pub upper_min_defect: f64,
    /// Smallest eigenvalue of `(K − gap)·E(w) − w` at the witness `w`.
    pub lower_witness_defect: f64,
    pub passed: bool,
}

pub const CERT_SLACK: f64 = 1e-5;
pub const CERT_GAP: f64 = 1e-3;
const CERT_TOL: f64 = 1e-9;

pub(super) fn certify(e: &ConditionalExpectation, probes: usize, seed: u64) -> Result<KCertificate> {
    let a = e.k_analysis()?;
    let amb = e.inclusion().amb();
    let mut r = rng(seed);
    let mut upper = f64::INFINITY;
    for _ in 0..probes {
        let x = random_rank_one(&mut r, amb);
        upper = upper.min(e.pimsner_popa_defect(a.value + CERT_SLACK, &x)? / x.max_abs().max(1.0));
    }
    let xi = &a.witness.vector;
    let w = amb.embed_block(a.witness.block, ComplexMatrix::outer(xi, xi))?;
    let lower = e.pimsner_popa_defect(a.value - CERT_GAP, &w)?;
    Ok(KCertificate {
        probes,
        upper_min_defect: upper,
        lower_witness_defect: lower,
        passed: upper >= -CERT_TOL && lower < 0.0,
    })
}
