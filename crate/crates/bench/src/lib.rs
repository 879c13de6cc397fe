//! Shared fixture builders for the benchmarks.

use entflow_core::bipartite::SchmidtVector;
use entflow_core::multipartite::{GenericStateDescriptor, LocalPSDOperator};
use entflow_core::path::PathSpec;
use entflow_core::sampling;
use entflow_core::spectra::ComplexMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng() -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(0xbe7c)
}

pub fn hermitian(d: usize) -> ComplexMatrix {
    sampling::random_hermitian(&mut rng(), d)
}

pub fn pd_pair(d: usize) -> (entflow_core::HermitianPD, entflow_core::HermitianPD) {
    let mut r = rng();
    (
        sampling::random_pd(&mut r, d, 0.2),
        sampling::random_pd(&mut r, d, 0.2),
    )
}

pub fn schmidt_pair(d: usize) -> (SchmidtVector, SchmidtVector) {
    let mut r = rng();
    (
        sampling::random_schmidt(&mut r, d),
        sampling::random_schmidt(&mut r, d),
    )
}

pub fn ln2_path() -> PathSpec {
    let a = SchmidtVector::new(vec![0.8, 0.2]).unwrap();
    let b = SchmidtVector::new(vec![0.6, 0.4]).unwrap();
    PathSpec::straight(&a, &b).unwrap()
}

pub fn five_qubit_pair() -> (GenericStateDescriptor, LocalPSDOperator) {
    let mut r = rng();
    (
        sampling::random_descriptor(&mut r, 5, 2, 0.2),
        sampling::random_local_op(&mut r, 5, 2, 0.2),
    )
}

pub fn three_qubit_op() -> LocalPSDOperator {
    sampling::random_local_op(&mut rng(), 3, 2, 0.2)
}
