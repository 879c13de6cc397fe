//! Seeded random generators for states and operators.
//!
//! Shared between the Monte-Carlo cross-checks, the acceptance suite and the
//! CLI sampling flags. Everything is driven by an explicit RNG so identical
//! seeds give identical outputs.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bipartite::SchmidtVector;
use crate::multipartite::{GenericStateDescriptor, LocalPSDOperator, ProductState};
use crate::spectra::{ComplexMatrix, HermitianPD};

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Fully entangled Schmidt vector from a flat Dirichlet draw.
pub fn random_schmidt(rng: &mut impl Rng, d: usize) -> SchmidtVector {
    loop {
        let mut raw: Vec<f64> = (0..d).map(|_| -rng.gen_range(1e-12..1.0f64).ln()).collect();
        let sum: f64 = raw.iter().sum();
        for x in raw.iter_mut() {
            *x /= sum;
        }
        if let Ok(sv) = SchmidtVector::new(raw) {
            return sv;
        }
    }
}

pub fn random_unit_vector(rng: &mut impl Rng, d: usize) -> Vec<Complex64> {
    loop {
        let v: Vec<Complex64> = (0..d)
            .map(|_| Complex64::new(gaussian(rng), gaussian(rng)))
            .collect();
        let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-6 {
            return v.into_iter().map(|z| z / norm).collect();
        }
    }
}

pub(crate) fn gaussian(rng: &mut impl Rng) -> f64 {
    // Box-Muller
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

pub fn random_hermitian(rng: &mut impl Rng, d: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(d);
    for i in 0..d {
        m.set(i, i, Complex64::new(gaussian(rng), 0.0));
        for j in (i + 1)..d {
            let z = Complex64::new(gaussian(rng), gaussian(rng)) * 0.5;
            m.set(i, j, z);
            m.set(j, i, z.conj());
        }
    }
    m
}

/// Random Hermitian positive-definite matrix with eigenvalues in (floor, 1].
pub fn random_pd(rng: &mut impl Rng, d: usize, floor: f64) -> HermitianPD {
    let h = random_hermitian(rng, d);
    let eig = crate::spectra::eig_hermitian(&h).expect("random Hermitian diagonalizes");
    let lo = eig.min();
    let hi = eig.max();
    let span = (hi - lo).max(1e-6);
    let rebuilt = eig.map_rebuild(|lam| floor + (1.0 - floor) * (lam - lo) / span + 1e-6);
    HermitianPD::new(rebuilt).expect("shifted spectrum is positive definite")
}

pub fn random_local_op(rng: &mut impl Rng, n: usize, d: usize, floor: f64) -> LocalPSDOperator {
    LocalPSDOperator::new((0..n).map(|_| random_pd(rng, d, floor)).collect())
        .expect("per-party PD factors are valid")
}

pub fn random_product_state(rng: &mut impl Rng, n: usize, d: usize) -> ProductState {
    ProductState::new((0..n).map(|_| random_unit_vector(rng, d)).collect())
        .expect("unit factors are valid")
}

/// Random normalized seed amplitudes of full length d^n.
pub fn random_seed_state(rng: &mut impl Rng, n: usize, d: usize) -> Vec<Complex64> {
    random_unit_vector(rng, d.pow(n as u32))
}

pub fn random_descriptor(rng: &mut impl Rng, n: usize, d: usize, floor: f64) -> GenericStateDescriptor {
    GenericStateDescriptor::new(
        n,
        d,
        random_seed_state(rng, n, d),
        random_local_op(rng, n, d, floor),
        true,
    )
    .expect("random descriptor is valid")
}

/// Random unitary matrix (eigenvectors of a random Hermitian draw).
pub fn random_unitary(rng: &mut impl Rng, d: usize) -> ComplexMatrix {
    crate::spectra::eig_hermitian(&random_hermitian(rng, d))
        .expect("random Hermitian diagonalizes")
        .vectors
}
