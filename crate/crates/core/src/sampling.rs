//! Random inclusions and expectations for property suites.

use rand::Rng;

use crate::algebra::{AlgebraElement, TraceWeights};
use crate::error::Result;
use crate::expectation::ConditionalExpectation;
use crate::inclusion::Inclusion;
use crate::numkernel::ComplexMatrix;
use crate::random::SeededRng;

/// Limits on sampled inclusions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SampleBounds {
    pub max_blocks: usize,
    /// Bound on every block dimension of both algebras.
    pub max_dim: usize,
    pub max_multiplicity: usize,
    /// Require every block of `M` to be `1 × 1`.
    pub commutative_amb: bool,
}

impl Default for SampleBounds {
    fn default() -> Self {
        Self { max_blocks: 3, max_dim: 4, max_multiplicity: 2, commutative_amb: false }
    }
}

/// Rejection sampling: blocks counts, sub dimensions and `Λ` are drawn
/// uniformly; draws with a dead row or column or an oversized ambient block are redrawn.
pub fn random_inclusion(rng: &mut SeededRng, bounds: SampleBounds) -> Inclusion {
    loop {
        let r = rng.random_range(1..=bounds.max_blocks);
        let s = rng.random_range(1..=bounds.max_blocks);
        let max_sub = if bounds.commutative_amb { 1 } else { bounds.max_dim };
        let sub: Vec<usize> = (0..r).map(|_| rng.random_range(1..=max_sub)).collect();
        let lambda: Vec<Vec<usize>> = (0..r)
            .map(|_| (0..s).map(|_| rng.random_range(0..=bounds.max_multiplicity)).collect())
            .collect();
        let amb: Vec<usize> = (0..s).map(|i| (0..r).map(|j| lambda[j][i] * sub[j]).sum()).collect();
        let limit = if bounds.commutative_amb { 1 } else { bounds.max_dim };
        if amb.iter().any(|&n| n == 0 || n > limit) {
            continue;
        }
        if let Ok(inc) = Inclusion::new(sub, amb, lambda) {
            return inc;
        }
    }
}

/// Faithful trace weights drawn from `[0.1, 1]`.
pub fn random_weights(rng: &mut SeededRng, inc: &Inclusion) -> TraceWeights {
    let w = (0..inc.amb().num_blocks()).map(|_| rng.random_range(0.1..=1.0)).collect();
    TraceWeights::new(w).expect("positive weights")
}

/// Positive scalar in `[0.5, 2]` on every slot: an invertible element of an
/// abelian subalgebra of `N' ∩ M`.
pub fn random_slot_perturbation(rng: &mut SeededRng, inc: &Inclusion) -> AlgebraElement {
    let amb = inc.amb();
    let blocks = (0..amb.num_blocks())
        .map(|i| {
            let mut d = vec![0.0; amb.block_dim(i)];
            for slot in inc.slots(i) {
                let c = rng.random_range(0.5..=2.0);
                d[slot.offset..slot.offset + slot.size].iter_mut().for_each(|x| *x = c);
            }
            ComplexMatrix::from_real_diag(&d)
        })
        .collect();
    amb.element(blocks).expect("block shapes")
}

/// A trace-preserving expectation for random weights, perturbed by a random slot scalar.
pub fn random_expectation(rng: &mut SeededRng, bounds: SampleBounds) -> Result<ConditionalExpectation> {
    let inc = random_inclusion(rng, bounds);
    let w = random_weights(rng, &inc);
    let a = random_slot_perturbation(rng, &inc);
    ConditionalExpectation::trace_preserving(&inc, &w)?.perturb(&a)
}
