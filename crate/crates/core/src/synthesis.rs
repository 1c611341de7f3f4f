//! Constructive generating sets of `M` as a right Hilbert `N`-module.
//!
//! Stage A refines the minimal projections `p_ν = e^{(j)}_{kk}` of `N` into
//! rank-one projections `q_α` of `M` and links every pair of refinements in an
//! ambient block by a partial isometry, giving an unreduced quasi-basis.
//! Stage B identifies links `u_β = u_γ v` with `v` a partial isometry of `N`.
//! Stage C keeps one representative per class, groups representatives by the
//! minimal projection of `N` carrying their right support and sums across
//! groups.

use num_complex::Complex64;
use serde::Serialize;

use crate::algebra::AlgebraElement;
use crate::error::{Error, Result};
use crate::expectation::{floor_k, reconstruction_error, ConditionalExpectation, EXPECTATION_TOL};
use crate::module::verify_generating;
use crate::numkernel::{self, ComplexMatrix, RANK_TOL};
use crate::random::{gaussian_matrix, rng};

/// Seed for the fallback linking matrix when the all-ones matrix degenerates.
const LINK_SEED: u64 = 0x5EED;
/// Below this the all-ones matrix is considered not to link two refinements.
const LINK_FLOOR: f64 = 1e-6;
const EQUIV_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MinimalProjection {
    pub sub_block: usize,
    pub index: usize,
}

/// `q_α = ψψ*` inside ambient block `amb_block`, below `p_ν = e^{(sub_block)}_{kk}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Refinement {
    pub amb_block: usize,
    pub sub_block: usize,
    pub copy: usize,
    pub index: usize,
    /// `E(q_α) = μ_α p_ν`.
    pub mu: f64,
    #[serde(skip)]
    pub vector: Vec<Complex64>,
}

/// Partial isometry with left support `q_left` and right support `q_right`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Link {
    pub amb_block: usize,
    pub left: usize,
    pub right: usize,
    /// `E(u* u) = μ p_ν` for the minimal projection under the right support.
    pub mu: f64,
    #[serde(skip)]
    pub element: AlgebraElement,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EquivalenceClass {
    pub members: Vec<usize>,
    pub representative: usize,
    pub is_projection: bool,
}

/// Representatives whose right support lies under one minimal projection of `N`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Group {
    pub sub_block: usize,
    pub index: usize,
    pub members: Vec<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct StageCounts {
    pub unreduced: usize,
    pub classes: usize,
    pub generators: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct SynthesisTrace {
    pub minimal_projections: Vec<MinimalProjection>,
    pub refinements: Vec<Refinement>,
    pub links: Vec<Link>,
    pub classes: Vec<EquivalenceClass>,
    pub groups: Vec<Group>,
    pub counts: StageCounts,
    #[serde(skip)]
    e: ConditionalExpectation,
}

impl SynthesisTrace {
    pub fn expectation(&self) -> &ConditionalExpectation {
        &self.e
    }

    fn scaled(&self, link: usize, divide_sub_dim: bool) -> AlgebraElement {
        let l = &self.links[link];
        let r = &self.refinements[l.right];
        let m = if divide_sub_dim { self.e.inclusion().sub().block_dim(r.sub_block) as f64 } else { 1.0 };
        l.element.scale_real(1.0 / (m * l.mu).sqrt())
    }

    /// The stage-A quasi-basis `{(m_j μ)^{-1/2} u}` over all links.
    pub fn unreduced_family(&self) -> Vec<AlgebraElement> {
        (0..self.links.len()).map(|l| self.scaled(l, true)).collect()
    }

    /// Number of refinements below each minimal projection, in `minimal_projections` order.
    pub fn refinement_counts(&self) -> Vec<usize> {
        self.minimal_projections
            .iter()
            .map(|p| {
                self.refinements
                    .iter()
                    .filter(|r| r.sub_block == p.sub_block && r.index == p.index)
                    .count()
            })
            .collect()
    }

    /// Every `μ_α` and `μ_β`.
    pub fn mus(&self) -> impl Iterator<Item = f64> + '_ {
        self.refinements.iter().map(|r| r.mu).chain(self.links.iter().map(|l| l.mu))
    }
}

#[derive(Clone, Debug)]
pub struct Composition {
    pub groups: Vec<Group>,
    pub generators: Vec<AlgebraElement>,
}

#[derive(Clone, Debug)]
pub struct GeneratorSet {
    pub e: ConditionalExpectation,
    pub generators: Vec<AlgebraElement>,
    pub k: f64,
    /// `⌊K(E)⌋²`.
    pub certified_bound: usize,
}

/// Rank-one refinements adapted to the matrix units of `N`, their links, and
/// a reconstruction check of the scaled family.
pub fn stage_a_basis(e: &ConditionalExpectation) -> Result<SynthesisTrace> {
    let inc = e.inclusion();
    let (sub, amb) = (inc.sub(), inc.amb());
    let minimal_projections = (0..sub.num_blocks())
        .flat_map(|j| (0..sub.block_dim(j)).map(move |k| MinimalProjection { sub_block: j, index: k }))
        .collect();

    let mut refinements = Vec::new();
    for i in 0..amb.num_blocks() {
        let n = amb.block_dim(i);
        for j in 0..sub.num_blocks() {
            let lam = inc.multiplicity(j, i);
            if lam == 0 {
                continue;
            }
            let positions: Vec<usize> =
                (0..inc.slots(i).len()).filter(|&s| inc.slots(i)[s].sub_block == j).collect();
            let (m, corner) = (sub.block_dim(j), sub.vec_offset(j));
            // density of the corner functional of p_{j,0}
            let d = ComplexMatrix::from_fn(lam, lam, |c, cp| {
                let x = amb
                    .matrix_unit(i, inc.slot_position(i, positions[c], 0), inc.slot_position(i, positions[cp], 0))
                    .expect("in range");
                e.to_sub_matrix().matvec(&x.to_vec())[corner]
            });
            let d = d.hermitian_part();
            let off_diag = (0..lam)
                .flat_map(|a| (0..lam).map(move |b| (a, b)))
                .filter(|(a, b)| a != b)
                .map(|(a, b)| d[(a, b)].norm())
                .fold(0.0, f64::max);
            let v = if off_diag <= 1e-14 * d.max_abs() {
                ComplexMatrix::identity(lam)
            } else {
                let dt = ComplexMatrix::from_fn(lam, lam, |a, b| d[(b, a)]);
                numkernel::eig_hermitian_sym(&dt)?.vectors
            };
            for t in 0..lam {
                for k in 0..m {
                    let mut psi = vec![Complex64::new(0.0, 0.0); n];
                    for (c, &s) in positions.iter().enumerate() {
                        psi[inc.slot_position(i, s, k)] = v[(c, t)];
                    }
                    let q = amb.embed_block(i, ComplexMatrix::outer(&psi, &psi))?;
                    let eq = e.apply_sub(&q);
                    let mu = eq.block(j)[(k, k)].re;
                    let target = sub.matrix_unit(j, k, k)?.scale_real(mu);
                    let defect = eq.dist(&target);
                    if defect > EXPECTATION_TOL {
                        return Err(Error::RefinementNotScalar { defect });
                    }
                    refinements.push(Refinement { amb_block: i, sub_block: j, copy: t, index: k, mu, vector: psi });
                }
            }
        }
    }

    let mut fallback = rng(LINK_SEED);
    let mut links = Vec::new();
    for i in 0..amb.num_blocks() {
        let n = amb.block_dim(i);
        let ones = ComplexMatrix::from_fn(n, n, |_, _| Complex64::new(1.0, 0.0));
        let in_block: Vec<usize> = (0..refinements.len()).filter(|&a| refinements[a].amb_block == i).collect();
        for &a in &in_block {
            for &b in &in_block {
                let (pa, pb) = (&refinements[a].vector, &refinements[b].vector);
                let qa = ComplexMatrix::outer(pa, pa);
                let qb = ComplexMatrix::outer(pb, pb);
                let mut z = ones.clone();
                while numkernel::inner(pa, &z.matvec(pb)).norm() < LINK_FLOOR {
                    z = gaussian_matrix(&mut fallback, n, n);
                }
                let u = numkernel::polar_isometry(&(&(&qa * &z) * &qb), RANK_TOL);
                let element = amb.embed_block(i, u)?;
                links.push(Link { amb_block: i, left: a, right: b, mu: refinements[b].mu, element });
            }
        }
    }

    let counts = StageCounts { unreduced: links.len(), ..StageCounts::default() };
    let trace = SynthesisTrace {
        minimal_projections,
        refinements,
        links,
        classes: Vec::new(),
        groups: Vec::new(),
        counts,
        e: e.clone(),
    };
    let error = reconstruction_error(e, &trace.unreduced_family());
    if error > EXPECTATION_TOL {
        return Err(Error::ReconstructionFailure { error });
    }
    Ok(trace)
}

fn find(parent: &mut [usize], x: usize) -> usize {
    let mut r = x;
    while parent[r] != r {
        r = parent[r];
    }
    let mut y = x;
    while parent[y] != r {
        let next = parent[y];
        parent[y] = r;
        y = next;
    }
    r
}

/// `v ∈ M_{m_j}` with `u_β = u_γ · embed(v)`, if it exists and links two
/// minimal projections `e_{kk}`, `e_{k'k'}` of `N`.
fn linking_element(trace: &SynthesisTrace, beta: usize, gamma: usize) -> Option<ComplexMatrix> {
    let inc = trace.e.inclusion();
    let (lb, lg) = (&trace.links[beta], &trace.links[gamma]);
    let j = trace.refinements[lg.right].sub_block;
    let (sub, i) = (inc.sub(), lb.amb_block);
    let m = sub.block_dim(j);
    let ug = lg.element.block(i);
    let cols: Vec<Vec<Complex64>> = (0..m * m)
        .map(|kl| {
            let f = inc.embed(&sub.matrix_unit(j, kl / m, kl % m).expect("in range")).expect("sub element");
            (ug * f.block(i)).into_data()
        })
        .collect();
    let n2 = ug.rows() * ug.cols();
    let t = ComplexMatrix::from_fn(n2, m * m, |r, c| cols[c][r]);
    let target = lb.element.block(i).data().to_vec();
    let v = numkernel::pinv(&t, RANK_TOL).matvec(&target);
    let fitted = t.matvec(&v);
    let residual = fitted.iter().zip(&target).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    if residual > EQUIV_TOL {
        return None;
    }
    let v = ComplexMatrix::from_vec_unchecked(m, m, v);
    let vv = &v.adjoint() * &v;
    if (&(&v * &vv) - &v).max_abs() > EQUIV_TOL {
        return None;
    }
    // a minimal projection of N in canonical form is some e_{kk}
    let is_unit_projection = |p: &ComplexMatrix| {
        (0..m).any(|k| {
            let mut e = ComplexMatrix::zeros(m, m);
            e[(k, k)] = numkernel::ONE;
            p.dist(&e) <= EQUIV_TOL
        })
    };
    (is_unit_projection(&vv) && is_unit_projection(&(&v * &v.adjoint()))).then_some(v)
}

/// Partitions links into classes `u_β ∼ u_γ` iff they share a left support and
/// `u_β = u_γ v` for a partial isometry `v ∈ N` linking minimal projections.
pub fn stage_b_reduce(mut trace: SynthesisTrace) -> Result<SynthesisTrace> {
    let count = trace.links.len();
    let mut parent: Vec<usize> = (0..count).collect();
    for beta in 0..count {
        for gamma in (beta + 1)..count {
            let (lb, lg) = (&trace.links[beta], &trace.links[gamma]);
            if lb.amb_block != lg.amb_block || lb.left != lg.left {
                continue;
            }
            let (rb, rg) = (&trace.refinements[lb.right], &trace.refinements[lg.right]);
            if rb.sub_block != rg.sub_block || find(&mut parent, beta) == find(&mut parent, gamma) {
                continue;
            }
            if linking_element(&trace, beta, gamma).is_some() {
                let (a, b) = (find(&mut parent, beta), find(&mut parent, gamma));
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut classes: Vec<EquivalenceClass> = Vec::new();
    let mut root_class = vec![usize::MAX; count];
    for l in 0..count {
        let root = find(&mut parent, l);
        if root_class[root] == usize::MAX {
            root_class[root] = classes.len();
            classes.push(EquivalenceClass { members: Vec::new(), representative: l, is_projection: false });
        }
        classes[root_class[root]].members.push(l);
    }
    for class in &mut classes {
        if let Some(&p) = class.members.iter().find(|&&l| trace.links[l].left == trace.links[l].right) {
            class.representative = p;
            class.is_projection = true;
        } else {
            class.representative = class.members[0];
        }
    }
    trace.counts.classes = classes.len();
    trace.classes = classes;
    Ok(trace)
}

/// Groups class representatives by the minimal projection of `N` under their
/// right support, moving non-projection representatives within their class to
/// balance the groups, and sums the `r`-th member of every group.
pub fn compose(trace: &SynthesisTrace) -> Result<Composition> {
    if trace.classes.is_empty() {
        return Err(Error::Invariant("compose needs the equivalence classes of stage B".into()));
    }
    let sub = trace.e.inclusion().sub();
    let group_of = |l: usize| {
        let r = &trace.refinements[trace.links[l].right];
        sub.block_dims()[..r.sub_block].iter().sum::<usize>() + r.index
    };
    let ngroups: usize = sub.block_dims().iter().sum();
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); ngroups];
    for class in trace.classes.iter().filter(|c| c.is_projection) {
        members[group_of(class.representative)].push(class.representative);
    }
    for class in trace.classes.iter().filter(|c| !c.is_projection) {
        let chosen = class
            .members
            .iter()
            .copied()
            .min_by_key(|&l| (members[group_of(l)].len(), l != class.representative, l))
            .expect("nonempty class");
        members[group_of(chosen)].push(chosen);
    }
    let mut groups = Vec::with_capacity(ngroups);
    for (g, list) in members.iter_mut().enumerate() {
        list.sort_unstable();
        let p = &trace.minimal_projections[g];
        groups.push(Group { sub_block: p.sub_block, index: p.index, members: list.clone() });
    }
    let width = groups.iter().map(|g| g.members.len()).max().unwrap_or(0);
    let amb = trace.e.inclusion().amb();
    let generators = (0..width)
        .map(|r| {
            groups
                .iter()
                .filter_map(|g| g.members.get(r))
                .fold(amb.zero(), |acc, &l| &acc + &trace.scaled(l, false))
        })
        .collect();
    Ok(Composition { groups, generators })
}

/// [`compose`] followed by the generation test and the `⌊K⌋²` certificate.
pub fn stage_c_compose(mut trace: SynthesisTrace, k: f64) -> Result<(GeneratorSet, SynthesisTrace)> {
    let comp = compose(&trace)?;
    trace.groups = comp.groups;
    trace.counts.generators = comp.generators.len();
    let report = verify_generating(&trace.e, &comp.generators);
    if !report.generating {
        return Err(Error::NotGenerating { rank: report.rank, dim: report.dim });
    }
    let fk = floor_k(k);
    let bound = fk * fk;
    if comp.generators.len() > bound {
        return Err(Error::BoundViolation { count: comp.generators.len(), bound });
    }
    let set = GeneratorSet { e: trace.e.clone(), generators: comp.generators, k, certified_bound: bound };
    Ok((set, trace))
}

/// Checks the `μ` window and the per-`p_ν` refinement bound against `K`.
pub fn check_stage_a(trace: &SynthesisTrace, k: f64) -> Result<()> {
    for mu in trace.mus() {
        if mu < 1.0 / k - 1e-6 || mu > 1.0 + 1e-8 {
            return Err(Error::Invariant(format!("mu = {mu} outside [1/K, 1] for K = {k}")));
        }
    }
    let fk = floor_k(k);
    if let Some(c) = trace.refinement_counts().into_iter().find(|&c| c > fk) {
        return Err(Error::Invariant(format!("{c} orthogonal refinements exceed floor(K) = {fk}")));
    }
    Ok(())
}

/// Stages A, B and C with `K = K(E)` and every stage invariant checked.
pub fn synthesize(e: &ConditionalExpectation) -> Result<(GeneratorSet, SynthesisTrace)> {
    let k = e.k_constant()?;
    let trace = stage_a_basis(e)?;
    check_stage_a(&trace, k)?;
    let trace = stage_b_reduce(trace)?;
    stage_c_compose(trace, k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::TraceWeights;
    use crate::inclusion::Inclusion;
    use crate::module::min_generators;

    fn tp(sd: Vec<usize>, ad: Vec<usize>, lam: Vec<Vec<usize>>, w: Vec<f64>) -> ConditionalExpectation {
        let inc = Inclusion::new(sd, ad, lam).unwrap();
        ConditionalExpectation::trace_preserving(&inc, &TraceWeights::new(w).unwrap()).unwrap()
    }

    #[test]
    fn stage_a_identity_inclusion_uses_matrix_units() {
        let e = tp(vec![3], vec![3], vec![vec![1]], vec![1.0]);
        let a = stage_a_basis(&e).unwrap();
        assert_eq!(a.refinements.len(), 3);
        assert!(a.mus().all(|mu| (mu - 1.0).abs() < 1e-12));
        let amb = e.inclusion().amb();
        for l in &a.links {
            let u = amb.matrix_unit(0, a.refinements[l.left].index, a.refinements[l.right].index).unwrap();
            assert!(l.element.dist(&u) < 1e-12);
        }
    }

    #[test]
    fn stage_a_scalar_subalgebra() {
        let e = tp(vec![1], vec![4], vec![vec![4]], vec![1.0]);
        let a = stage_a_basis(&e).unwrap();
        assert_eq!(a.links.len(), 16);
        assert!(a.refinements.iter().all(|r| (r.mu - 0.25).abs() < 1e-12));
        for u in a.unreduced_family() {
            let big: Vec<_> = u.block(0).data().iter().filter(|z| z.norm() > 1e-12).collect();
            assert_eq!(big.len(), 1);
            assert!((big[0].norm() - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn stage_a_diagonal_splits_each_projection_in_two() {
        let s = 0.3;
        let e = tp(vec![2], vec![2, 2], vec![vec![1, 1]], vec![s, 1.0 - s]);
        let a = stage_a_basis(&e).unwrap();
        assert_eq!(a.refinement_counts(), vec![2, 2]);
        for p in &a.minimal_projections {
            let mut mus: Vec<f64> = a
                .refinements
                .iter()
                .filter(|r| r.index == p.index)
                .map(|r| r.mu)
                .collect();
            mus.sort_by(f64::total_cmp);
            assert!((mus[0] - s).abs() < 1e-12 && (mus[1] - (1.0 - s)).abs() < 1e-12);
        }
    }

    #[test]
    fn stage_a_handles_non_diagonal_densities() {
        let inc = Inclusion::new(vec![1], vec![2], vec![vec![2]]).unwrap();
        let e = ConditionalExpectation::trace_preserving(&inc, &TraceWeights::new(vec![1.0]).unwrap()).unwrap();
        let h = ComplexMatrix::from_real(2, 2, &[2.0, 1.0, 1.0, 1.5]).unwrap();
        let p = e.perturb(&inc.amb().embed_block(0, h).unwrap()).unwrap();
        let a = stage_a_basis(&p).unwrap();
        let total: f64 = a.refinements.iter().map(|r| r.mu).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn stage_b_examples() {
        let e = tp(vec![3], vec![3], vec![vec![1]], vec![1.0]);
        let b = stage_b_reduce(stage_a_basis(&e).unwrap()).unwrap();
        assert_eq!(b.counts.classes, 3);
        assert!(b.classes.iter().all(|c| c.is_projection && c.members.len() == 3));

        let e = tp(vec![1], vec![3], vec![vec![3]], vec![1.0]);
        let b = stage_b_reduce(stage_a_basis(&e).unwrap()).unwrap();
        assert_eq!(b.counts.classes, 9);

        let e = tp(vec![2], vec![2, 2], vec![vec![1, 1]], vec![0.5, 0.5]);
        let b = stage_b_reduce(stage_a_basis(&e).unwrap()).unwrap();
        assert_eq!((b.counts.unreduced, b.counts.classes), (8, 4));
    }

    #[test]
    fn stage_c_examples() {
        for n in 1..=4 {
            let e = tp(vec![1], vec![n], vec![vec![n]], vec![1.0]);
            let (g, t) = synthesize(&e).unwrap();
            assert_eq!(g.generators.len(), n * n);
            assert_eq!(g.certified_bound, n * n);
            assert_eq!(t.counts.generators, n * n);
        }
        let e = tp(vec![2, 1], vec![2, 1], vec![vec![1, 0], vec![0, 1]], vec![1.0, 1.0]);
        let (g, _) = synthesize(&e).unwrap();
        assert_eq!(g.generators.len(), 1);
        assert!(g.generators[0].dist(&e.inclusion().amb().identity()) < 1e-12);

        let e = tp(vec![2], vec![2, 2], vec![vec![1, 1]], vec![0.5, 0.5]);
        let (g, _) = synthesize(&e).unwrap();
        assert!((g.k - 2.0).abs() < 1e-9);
        assert!(g.generators.len() >= min_generators(e.inclusion()) && g.generators.len() <= 4);
    }

    #[test]
    fn abelian_subalgebra_of_two_by_two() {
        let e = tp(vec![1, 1], vec![2], vec![vec![1], vec![1]], vec![1.0]);
        let (g, _) = synthesize(&e).unwrap();
        assert!(g.generators.len() <= floor_k(g.k).pow(2));
        let ind = crate::expectation::watatani_index(&e).unwrap();
        assert!(ind.norm <= g.k + 1e-7);
    }

    #[test]
    fn composed_family_is_a_quasi_basis() {
        let e = tp(vec![1, 2], vec![4, 2], vec![vec![2, 0], vec![1, 1]], vec![0.3, 0.9]);
        let t = stage_b_reduce(stage_a_basis(&e).unwrap()).unwrap();
        let comp = compose(&t).unwrap();
        assert!(reconstruction_error(&e, &comp.generators) < 1e-9);
        assert_eq!(comp.generators.len(), min_generators(e.inclusion()));
    }

    #[test]
    fn pinching_violates_the_square_bound() {
        let e = tp(vec![1, 4], vec![5], vec![vec![1], vec![1]], vec![1.0]);
        assert_eq!(synthesize(&e).unwrap_err(), Error::BoundViolation { count: 5, bound: 4 });
        let e = tp(vec![1, 3], vec![4], vec![vec![1], vec![1]], vec![1.0]);
        let (g, _) = synthesize(&e).unwrap();
        assert_eq!((g.generators.len(), g.certified_bound), (4, 4));
    }

    #[test]
    fn two_block_ambient_violates_the_square_bound() {
        // K = max(1/π + 1, 1/(1 − π)) with π = 3/8 gives 8/3, while M e needs 5 copies of ℂ
        let e = tp(vec![1, 3], vec![4, 1], vec![vec![1, 1], vec![1, 0]], vec![1.5, 1.0]);
        assert!((e.k_constant().unwrap() - 8.0 / 3.0).abs() < 1e-6);
        assert_eq!(min_generators(e.inclusion()), 5);
        assert_eq!(synthesize(&e).unwrap_err(), Error::BoundViolation { count: 5, bound: 4 });
    }
}
