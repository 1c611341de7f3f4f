//! Seeded sampling of matrices and algebra elements.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::algebra::{AlgebraElement, MultiMatrixAlgebra};
use crate::numkernel::{self, ComplexMatrix};

pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Standard complex Gaussian entry.
pub fn gaussian(rng: &mut SeededRng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn gaussian_vector(rng: &mut SeededRng, n: usize) -> Vec<Complex64> {
    (0..n).map(|_| gaussian(rng)).collect()
}

pub fn unit_vector(rng: &mut SeededRng, n: usize) -> Vec<Complex64> {
    loop {
        let v = gaussian_vector(rng, n);
        let nv = numkernel::norm(&v);
        if nv > 1e-8 {
            return v.into_iter().map(|z| z / nv).collect();
        }
    }
}

pub fn gaussian_matrix(rng: &mut SeededRng, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

/// Haar-distributed-enough unitary from the eigenvectors of a Gaussian Hermitian matrix.
pub fn random_unitary(rng: &mut SeededRng, n: usize) -> ComplexMatrix {
    let h = gaussian_matrix(rng, n, n).hermitian_part();
    numkernel::eig_hermitian(&h).expect("Hermitian by construction").vectors
}

pub fn random_element(rng: &mut SeededRng, alg: &MultiMatrixAlgebra) -> AlgebraElement {
    let blocks = alg.block_dims().iter().map(|&n| gaussian_matrix(rng, n, n)).collect();
    alg.element(blocks).expect("shapes match")
}

pub fn random_unitary_element(rng: &mut SeededRng, alg: &MultiMatrixAlgebra) -> AlgebraElement {
    let blocks = alg.block_dims().iter().map(|&n| random_unitary(rng, n)).collect();
    alg.element(blocks).expect("shapes match")
}

/// Rank-one positive element `ξξ*` supported in a single random block.
pub fn random_rank_one(rng: &mut SeededRng, alg: &MultiMatrixAlgebra) -> AlgebraElement {
    let i = rng.random_range(0..alg.num_blocks());
    let xi = unit_vector(rng, alg.block_dim(i));
    alg.embed_block(i, ComplexMatrix::outer(&xi, &xi)).expect("in range")
}
