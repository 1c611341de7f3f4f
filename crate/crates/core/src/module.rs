//! `M` as a right Hilbert `N`-module with `⟨x, y⟩ = E(x* y)`.

use serde::Serialize;

use crate::algebra::AlgebraElement;
use crate::error::{Error, Result};
use crate::expectation::{reconstruction_error, ConditionalExpectation, EXPECTATION_TOL};
use crate::inclusion::Inclusion;
use crate::numkernel::{self, ComplexMatrix, RANK_TOL};

fn check_amb(e: &ConditionalExpectation, x: &AlgebraElement) -> Result<()> {
    if x.algebra() != e.inclusion().amb() {
        return Err(Error::AlgebraMismatch {
            left: x.algebra().block_dims().to_vec(),
            right: e.inclusion().amb().block_dims().to_vec(),
        });
    }
    Ok(())
}

/// `⟨x, y⟩ = E(x* y)` as an element of `N`.
pub fn inner(e: &ConditionalExpectation, x: &AlgebraElement, y: &AlgebraElement) -> Result<AlgebraElement> {
    check_amb(e, x)?;
    check_amb(e, y)?;
    e.inclusion().coefficients_in_sub(&e.apply(&(&x.adjoint() * y)))
}

/// Matrix of the rank-one module operator `θ_{x,y}: z ↦ y E(x* z)`.
pub fn theta(e: &ConditionalExpectation, x: &AlgebraElement, y: &AlgebraElement) -> ComplexMatrix {
    let amb = e.inclusion().amb();
    let xa = x.adjoint();
    let cols: Vec<Vec<_>> = amb.standard_basis().iter().map(|z| (y * &e.apply(&(&xa * z))).to_vec()).collect();
    ComplexMatrix::from_fn(amb.dim(), amb.dim(), |r, c| cols[c][r])
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GenerationReport {
    pub generating: bool,
    pub rank: usize,
    pub dim: usize,
}

/// Rank of `span{ g·n : g ∈ G, n ∈ N }` against `dim M`.
pub fn verify_generating(e: &ConditionalExpectation, generators: &[AlgebraElement]) -> GenerationReport {
    let inc = e.inclusion();
    let dim = inc.amb().dim();
    let units: Vec<AlgebraElement> =
        inc.sub().standard_basis().iter().map(|n| inc.embed(n).expect("sub element")).collect();
    let cols: Vec<Vec<_>> = generators.iter().flat_map(|g| units.iter().map(move |f| (g * f).to_vec())).collect();
    let rank = if cols.is_empty() {
        0
    } else {
        numkernel::rank(&ComplexMatrix::from_fn(dim, cols.len(), |r, c| cols[c][r]), RANK_TOL)
    };
    GenerationReport { generating: rank == dim, rank, dim }
}

/// `k_j = Σ_i n_i Λ_{ji}`: the dimension of `M e` for a minimal projection `e` in block `j` of `N`.
pub fn module_multiplicities(inc: &Inclusion) -> Vec<usize> {
    let amb = inc.amb();
    (0..inc.sub().num_blocks())
        .map(|j| (0..amb.num_blocks()).map(|i| amb.block_dim(i) * inc.multiplicity(j, i)).sum())
        .collect()
}

/// `max_j ⌈k_j / m_j⌉`: the fewest free copies of `N` mapping onto `M`.
pub fn min_generators(inc: &Inclusion) -> usize {
    module_multiplicities(inc)
        .iter()
        .enumerate()
        .map(|(j, &k)| k.div_ceil(inc.sub().block_dim(j)))
        .max()
        .unwrap_or(0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FrameKind {
    QuasiBasis,
    GeneratingSet,
}

#[derive(Clone, Debug)]
pub struct ModuleFrame {
    pub elements: Vec<AlgebraElement>,
    pub kind: FrameKind,
}

impl ModuleFrame {
    /// Reconstruction identity for a quasi-basis, span rank for a generating set.
    pub fn check(&self, e: &ConditionalExpectation) -> Result<()> {
        match self.kind {
            FrameKind::QuasiBasis => {
                let error = reconstruction_error(e, &self.elements);
                if error > EXPECTATION_TOL {
                    return Err(Error::ReconstructionFailure { error });
                }
            }
            FrameKind::GeneratingSet => {
                let r = verify_generating(e, &self.elements);
                if !r.generating {
                    return Err(Error::NotGenerating { rank: r.rank, dim: r.dim });
                }
            }
        }
        Ok(())
    }

    /// `Σ_i θ_{u_i,u_i}`, which is the identity map for a quasi-basis.
    pub fn theta_sum(&self, e: &ConditionalExpectation) -> ComplexMatrix {
        let d = e.inclusion().amb().dim();
        self.elements.iter().fold(ComplexMatrix::zeros(d, d), |acc, u| &acc + &theta(e, u, u))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::TraceWeights;
    use crate::expectation::quasi_basis;
    use crate::random::{random_element, rng, SeededRng};

    fn tp(inc: &Inclusion) -> ConditionalExpectation {
        ConditionalExpectation::trace_preserving(inc, &TraceWeights::uniform(inc.amb())).unwrap()
    }

    fn inc(sd: Vec<usize>, ad: Vec<usize>, lam: Vec<Vec<usize>>) -> Inclusion {
        Inclusion::new(sd, ad, lam).unwrap()
    }

    /// Smallest `g` for which one of 64 random `g`-tuples generates.
    fn search_min_generators(e: &ConditionalExpectation, r: &mut SeededRng) -> usize {
        let amb = e.inclusion().amb();
        (1..=amb.dim())
            .find(|&g| {
                (0..64).any(|_| {
                    let tuple: Vec<_> = (0..g).map(|_| random_element(r, amb)).collect();
                    verify_generating(e, &tuple).generating
                })
            })
            .expect("M generates itself")
    }

    #[test]
    fn inner_product_examples() {
        let e = tp(&inc(vec![1], vec![3], vec![vec![3]]));
        let amb = e.inclusion().amb();
        let one = inner(&e, &amb.identity(), &amb.identity()).unwrap();
        assert!(one.dist(&e.inclusion().sub().identity()) < 1e-12);
        let u = amb.matrix_unit(0, 1, 2).unwrap();
        assert!((inner(&e, &u, &u).unwrap().block(0)[(0, 0)].re - 1.0 / 3.0).abs() < 1e-12);
        assert!(inner(&e, &amb.zero(), &amb.zero()).unwrap().max_abs() == 0.0);
    }

    #[test]
    fn inner_product_is_positive() {
        let e = tp(&inc(vec![2, 1], vec![5, 3], vec![vec![2, 1], vec![1, 1]]));
        let mut r = rng(21);
        for _ in 0..200 {
            let x = random_element(&mut r, e.inclusion().amb());
            let ip = inner(&e, &x, &x).unwrap();
            assert!(ip.is_psd(1e-9).unwrap());
            assert!(ip.max_abs() > 1e-6);
        }
    }

    #[test]
    fn theta_identities() {
        let e = tp(&inc(vec![1, 1], vec![2, 1], vec![vec![1, 1], vec![1, 0]]));
        let amb = e.inclusion().amb();
        assert!(theta(&e, &amb.identity(), &amb.identity()).dist(e.matrix()) < 1e-12);
        let mut r = rng(3);
        let (x, y, u, v) = (
            random_element(&mut r, amb),
            random_element(&mut r, amb),
            random_element(&mut r, amb),
            random_element(&mut r, amb),
        );
        let lhs = &theta(&e, &x, &y) * &theta(&e, &u, &v);
        let rhs = theta(&e, &u, &(&y * &e.apply(&(&x.adjoint() * &v))));
        assert!(lhs.dist(&rhs) < 1e-10);
    }

    #[test]
    fn theta_sum_over_quasi_basis_is_identity() {
        let e = tp(&inc(vec![1, 2], vec![4, 2], vec![vec![2, 0], vec![1, 1]]));
        let frame = ModuleFrame { elements: quasi_basis(&e).unwrap(), kind: FrameKind::QuasiBasis };
        frame.check(&e).unwrap();
        let d = e.inclusion().amb().dim();
        assert!(frame.theta_sum(&e).dist(&ComplexMatrix::identity(d)) < 1e-9);
        ModuleFrame { elements: frame.elements.clone(), kind: FrameKind::GeneratingSet }.check(&e).unwrap();
    }

    #[test]
    fn verify_generating_examples() {
        let full = tp(&inc(vec![3], vec![3], vec![vec![1]]));
        assert!(verify_generating(&full, &[full.inclusion().amb().identity()]).generating);
        let e = tp(&inc(vec![1], vec![2], vec![vec![2]]));
        let amb = e.inclusion().amb();
        let r = verify_generating(&e, &[amb.matrix_unit(0, 0, 0).unwrap()]);
        assert_eq!((r.generating, r.rank, r.dim), (false, 1, 4));
        assert!(verify_generating(&e, &amb.standard_basis()).generating);
    }

    #[test]
    fn multiplicities_and_counts() {
        let scal = inc(vec![1], vec![4], vec![vec![4]]);
        assert_eq!(module_multiplicities(&scal), vec![16]);
        assert_eq!(min_generators(&scal), 16);
        let diag = inc(vec![3], vec![3, 3], vec![vec![1, 1]]);
        assert_eq!(module_multiplicities(&diag), vec![6]);
        assert_eq!(min_generators(&diag), 2);
        let same = inc(vec![4], vec![4], vec![vec![1]]);
        assert_eq!(module_multiplicities(&same), vec![4]);
        assert_eq!(min_generators(&same), 1);
    }

    #[test]
    fn min_generators_matches_random_search() {
        // oracle: randomized surjection search, plus the dimension bound g·m_j ≥ k_j for g − 1
        let cases = [
            inc(vec![1], vec![2], vec![vec![2]]),
            inc(vec![2], vec![2, 2], vec![vec![1, 1]]),
            inc(vec![1, 1], vec![2], vec![vec![1], vec![1]]),
            inc(vec![1, 2], vec![3], vec![vec![1], vec![1]]),
            inc(vec![1, 1], vec![3, 1], vec![vec![2, 1], vec![1, 0]]),
        ];
        let mut r = rng(77);
        for c in &cases {
            let e = tp(c);
            let found = search_min_generators(&e, &mut r);
            let formula = min_generators(c);
            assert_eq!(found, formula, "{:?}", c.lambda());
            let ks = module_multiplicities(c);
            let impossible = (0..ks.len()).any(|j| (formula - 1) * c.sub().block_dim(j) < ks[j]);
            assert!(impossible);
        }
    }
}
