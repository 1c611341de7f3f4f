use finindex::algebra::TraceWeights;
use finindex::expectation::{quasi_basis, reconstruction_error, watatani_index, ConditionalExpectation};
use finindex::inclusion::Inclusion;
use finindex::module::{inner, min_generators, verify_generating};
use finindex::numkernel::{self, ComplexMatrix, RANK_TOL};
use finindex::random::{gaussian_matrix, random_element, rng};
use finindex::sampling::{random_expectation, random_inclusion, random_weights, SampleBounds};
use finindex::synthesis::{stage_a_basis, synthesize};
use proptest::prelude::*;

fn config() -> ProptestConfig {
    ProptestConfig { cases: 48, ..ProptestConfig::default() }
}

fn hermitian(seed: u64, n: usize) -> ComplexMatrix {
    let g = gaussian_matrix(&mut rng(seed), n, n);
    (&g + &g.adjoint()).scale_real(0.5)
}

fn sampled(seed: u64) -> ConditionalExpectation {
    random_expectation(&mut rng(seed), SampleBounds::default()).expect("sampled expectation")
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn eigendecomposition_reconstructs(seed in any::<u64>(), n in 1usize..=12) {
        let a = hermitian(seed, n);
        let eig = numkernel::eig_hermitian(&a).unwrap();
        let u = &eig.vectors;
        let d = ComplexMatrix::from_real_diag(&eig.values);
        prop_assert!((&(u * &d) * &u.adjoint()).dist(&a) <= 1e-9);
        prop_assert!((&u.adjoint() * u).dist(&ComplexMatrix::identity(n)) <= 1e-9);
        prop_assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn penrose_identities(seed in any::<u64>(), rows in 1usize..=12, cols in 1usize..=12, rank in 1usize..=12) {
        let mut r = rng(seed);
        let k = rank.min(rows).min(cols);
        let a = &gaussian_matrix(&mut r, rows, k) * &gaussian_matrix(&mut r, k, cols);
        let p = numkernel::pinv(&a, RANK_TOL);
        let scale = a.max_abs().max(1.0);
        prop_assert!((&(&a * &p) * &a).dist(&a) <= 1e-8 * scale);
        prop_assert!((&(&p * &a) * &p).dist(&p) <= 1e-8 * p.max_abs().max(1.0));
        prop_assert!((&a * &p).hermitian_defect() <= 1e-8);
        prop_assert!((&p * &a).hermitian_defect() <= 1e-8);
    }

    #[test]
    fn polar_part_is_a_partial_isometry(seed in any::<u64>(), n in 1usize..=8, rank in 1usize..=8) {
        let mut r = rng(seed);
        let k = rank.min(n);
        let a = &gaussian_matrix(&mut r, n, k) * &gaussian_matrix(&mut r, k, n);
        let v = numkernel::polar_isometry(&a, RANK_TOL);
        prop_assert!((&(&v * &v.adjoint()) * &v).dist(&v) <= 1e-8);
    }

    #[test]
    fn trace_is_tracial_and_faithful(seed in any::<u64>()) {
        let mut r = rng(seed);
        let inc = random_inclusion(&mut r, SampleBounds::default());
        let w = random_weights(&mut r, &inc);
        let (x, y) = (random_element(&mut r, inc.amb()), random_element(&mut r, inc.amb()));
        let xy = w.trace(&(&x * &y)).unwrap();
        let yx = w.trace(&(&y * &x)).unwrap();
        prop_assert!((xy - yx).norm() <= 1e-10 * (1.0 + xy.norm()));
        let xx = w.trace(&(&x.adjoint() * &x)).unwrap();
        prop_assert!(xx.re > 0.0 && xx.im.abs() <= 1e-10 * xx.re);
        prop_assert_eq!(w.trace(&inc.amb().zero()).unwrap().norm(), 0.0);
    }

    #[test]
    fn central_projections_partition_unity(seed in any::<u64>()) {
        let inc = random_inclusion(&mut rng(seed), SampleBounds::default());
        let amb = inc.amb();
        let qs = amb.minimal_central_projections();
        let total = qs.iter().fold(amb.zero(), |acc, q| &acc + q);
        prop_assert_eq!(total.dist(&amb.identity()), 0.0);
        for (a, p) in qs.iter().enumerate() {
            for (b, q) in qs.iter().enumerate() {
                let want = if a == b { p.clone() } else { amb.zero() };
                prop_assert_eq!((p * q).dist(&want), 0.0);
            }
        }
    }

    #[test]
    fn embedding_is_a_unital_star_homomorphism(seed in any::<u64>()) {
        let mut r = rng(seed);
        let inc = random_inclusion(&mut r, SampleBounds::default());
        let (x, y) = (random_element(&mut r, inc.sub()), random_element(&mut r, inc.sub()));
        let (ex, ey) = (inc.embed(&x).unwrap(), inc.embed(&y).unwrap());
        prop_assert!(inc.embed(&(&x * &y)).unwrap().dist(&(&ex * &ey)) <= 1e-10);
        prop_assert!(inc.embed(&x.adjoint()).unwrap().dist(&ex.adjoint()) <= 1e-10);
        prop_assert_eq!(inc.embed(&inc.sub().identity()).unwrap().dist(&inc.amb().identity()), 0.0);
    }

    #[test]
    fn commutant_dimension_matches_formula(seed in any::<u64>()) {
        let inc = random_inclusion(&mut rng(seed), SampleBounds::default());
        prop_assert_eq!(inc.relative_commutant().len(), inc.commutant_dim_formula());
    }

    #[test]
    fn central_compressions_are_unital(seed in any::<u64>()) {
        let inc = random_inclusion(&mut rng(seed), SampleBounds::default());
        for q in inc.amb().minimal_central_projections() {
            let c = inc.compress_central(&q).unwrap();
            let sub = c.inclusion();
            prop_assert!(Inclusion::new(sub.sub().block_dims().to_vec(), sub.amb().block_dims().to_vec(), sub.lambda().to_vec()).is_ok());
        }
    }

    #[test]
    fn expectation_axioms_hold(seed in any::<u64>()) {
        let e = sampled(seed);
        prop_assert!(e.validate(8, seed).is_ok());
    }

    #[test]
    fn k_is_one_exactly_for_identity_inclusions(seed in any::<u64>()) {
        let e = sampled(seed);
        let k = e.k_constant().unwrap();
        prop_assert!(k >= 1.0 - 1e-9);
        prop_assert_eq!(k - 1.0 <= 1e-6, e.inclusion().is_trivial());
    }

    #[test]
    fn index_dominates_one(seed in any::<u64>()) {
        let e = sampled(seed);
        let ind = watatani_index(&e).unwrap();
        prop_assert!(ind.scalars.iter().all(|&c| c >= 1.0 - 1e-8));
        prop_assert!((ind.component_sum - ind.scalars.iter().sum::<f64>()).abs() <= 1e-12);
    }

    #[test]
    fn inner_product_is_positive(seed in any::<u64>()) {
        let e = sampled(seed);
        let x = random_element(&mut rng(seed ^ 1), e.inclusion().amb());
        prop_assert!(inner(&e, &x, &x).unwrap().is_psd(1e-9).unwrap());
    }

    #[test]
    fn quasi_bases_generate(seed in any::<u64>()) {
        let e = sampled(seed);
        let qb = quasi_basis(&e).unwrap();
        prop_assert!(min_generators(e.inclusion()) <= qb.len());
        prop_assert!(verify_generating(&e, &qb).generating);
    }

    #[test]
    fn stage_a_family_is_a_quasi_basis(seed in any::<u64>()) {
        let e = sampled(seed);
        let k = e.k_constant().unwrap();
        let trace = stage_a_basis(&e).unwrap();
        prop_assert!(reconstruction_error(&e, &trace.unreduced_family()) <= 1e-8);
        prop_assert!(trace.mus().all(|mu| mu >= 1.0 / k - 1e-6 && mu <= 1.0 + 1e-8));
        let fk = finindex::expectation::floor_k(k);
        prop_assert!(trace.refinement_counts().iter().all(|&c| c <= fk));
    }

    #[test]
    fn synthesized_sets_generate_or_report_a_violation(seed in any::<u64>()) {
        let e = sampled(seed);
        match synthesize(&e) {
            Ok((g, _)) => {
                prop_assert!(verify_generating(&e, &g.generators).generating);
                prop_assert!(g.generators.len() <= g.certified_bound);
                prop_assert_eq!(g.generators.len(), min_generators(e.inclusion()));
            }
            Err(finindex::Error::BoundViolation { count, bound }) => {
                prop_assert!(count > bound);
                prop_assert_eq!(count, min_generators(e.inclusion()));
            }
            Err(err) => prop_assert!(false, "{err}"),
        }
    }
}

#[test]
fn sharpness_has_no_slack() {
    for n in 1..=4 {
        let inc = Inclusion::new(vec![1], vec![n], vec![vec![n]]).unwrap();
        let e = ConditionalExpectation::trace_preserving(&inc, &TraceWeights::uniform(inc.amb())).unwrap();
        let (g, _) = synthesize(&e).unwrap();
        assert_eq!(g.generators.len(), n * n);
        assert_eq!(min_generators(&inc), n * n);
    }
}
