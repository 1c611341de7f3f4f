//! Quasi-bases and the Watatani index `Ind(E) = Σ u u*`.

use serde::Serialize;

use super::{ConditionalExpectation, EXPECTATION_TOL};
use crate::algebra::AlgebraElement;
use crate::error::{Error, Result};
use crate::random::{random_unitary_element, rng};
use crate::synthesis;

/// Seed of the unitary used to cross-check basis independence of `Ind(E)`.
const INDEX_CHECK_SEED: u64 = 0x1D5;
const INDEX_TOL: f64 = 1e-7;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IndexElement {
    #[serde(skip)]
    pub value: AlgebraElement,
    /// Scalar of `Ind(E)` on each minimal central projection of `M`.
    pub scalars: Vec<f64>,
    pub component_sum: f64,
    pub norm: f64,
}

/// `max_x ‖x − Σ_i u_i E(u_i* x)‖_max` over the standard basis of `M`.
pub fn reconstruction_error(e: &ConditionalExpectation, family: &[AlgebraElement]) -> f64 {
    let adj: Vec<AlgebraElement> = family.iter().map(|u| u.adjoint()).collect();
    e.inclusion()
        .amb()
        .standard_basis()
        .iter()
        .map(|x| {
            let mut acc = x.algebra().zero();
            for (u, ua) in family.iter().zip(&adj) {
                acc = &acc + &(u * &e.apply(&(ua * x)));
            }
            acc.dist(x)
        })
        .fold(0.0, f64::max)
}

/// A quasi-basis of `E`: the composed generator family of the synthesis pipeline.
pub fn quasi_basis(e: &ConditionalExpectation) -> Result<Vec<AlgebraElement>> {
    let family = synthesis::compose(&synthesis::stage_b_reduce(synthesis::stage_a_basis(e)?)?)?.generators;
    let error = reconstruction_error(e, &family);
    if error > EXPECTATION_TOL {
        return Err(Error::ReconstructionFailure { error });
    }
    Ok(family)
}

fn index_of(family: &[AlgebraElement], like: &AlgebraElement) -> AlgebraElement {
    family.iter().fold(like.algebra().zero(), |acc, u| &acc + &(u * &u.adjoint()))
}

/// `Ind(E)` from the unreduced stage-A basis, checked for centrality, for
/// `Ind(E) ⪰ 1`, and against the index of the composed quasi-basis conjugated
/// by a seeded unitary of `N`.
pub fn watatani_index(e: &ConditionalExpectation) -> Result<IndexElement> {
    let amb = e.inclusion().amb();
    let stage_a = synthesis::stage_a_basis(e)?;
    let value = index_of(&stage_a.unreduced_family(), &amb.identity());
    let defect = value.central_defect().max(value.hermitian_defect());
    if defect > EXPECTATION_TOL * value.max_abs().max(1.0) {
        return Err(Error::NotCentral { defect });
    }
    let scalars: Vec<f64> = value.blocks().iter().map(|b| b.trace().re / b.rows() as f64).collect();
    if scalars.iter().any(|&c| c < 1.0 - EXPECTATION_TOL) {
        return Err(Error::Invariant(format!("index element {scalars:?} is not above 1")));
    }

    let w = e.inclusion().embed(&random_unitary_element(&mut rng(INDEX_CHECK_SEED), e.inclusion().sub()))?;
    let wa = w.adjoint();
    let second: Vec<AlgebraElement> = quasi_basis(e)?.iter().map(|u| &(&w * u) * &wa).collect();
    let diff = index_of(&second, &value).dist(&value);
    if diff > INDEX_TOL * value.max_abs().max(1.0) {
        return Err(Error::Invariant(format!("index depends on the quasi-basis (difference {diff:.3e})")));
    }

    let component_sum = scalars.iter().sum();
    let norm = scalars.iter().cloned().fold(0.0, f64::max);
    Ok(IndexElement { value, scalars, component_sum, norm })
}
