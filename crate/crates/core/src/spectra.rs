//! Dense complex-matrix kernel: Hermitian eigensolver, inverse square roots,
//! and tensor-product spectral shortcuts.
//!
//! Everything downstream works with per-party operators of dimension at most 8,
//! so a cyclic Jacobi sweep is both simple and accurate enough; no external
//! linear-algebra backend is used.

use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Absolute entrywise tolerance for accepting a matrix as Hermitian.
pub const HERMITICITY_TOL: f64 = 1e-12;
/// Off-diagonal Frobenius-norm target for Jacobi convergence.
const JACOBI_OFF_TOL: f64 = 1e-14;
const JACOBI_MAX_SWEEPS: usize = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectraError {
    #[error("matrix is not Hermitian within tolerance (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("empty operator list")]
    EmptyInput,
    #[error("matrix is not positive definite (min eigenvalue {min_eig:.3e})")]
    NotPositiveDefinite { min_eig: f64 },
    #[error("matrix entries must be finite")]
    NonFiniteEntry,
    #[error("Jacobi iteration did not converge")]
    NoConvergence,
    #[error("invalid matrix shape: {0}")]
    BadShape(String),
}

/// Dense square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.set(i, i, Complex64::new(1.0, 0.0));
        }
        m
    }

    pub fn diag_real(entries: &[f64]) -> Self {
        let mut m = Self::zeros(entries.len());
        for (i, &x) in entries.iter().enumerate() {
            m.set(i, i, Complex64::new(x, 0.0));
        }
        m
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self, SpectraError> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(SpectraError::BadShape(format!(
                    "expected {dim} columns, got {}",
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        let m = Self { dim, data };
        m.check_finite()?;
        Ok(m)
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self, SpectraError> {
        let converted: Vec<Vec<Complex64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&converted)
    }

    pub fn check_finite(&self) -> Result<(), SpectraError> {
        if self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            Ok(())
        } else {
            Err(SpectraError::NonFiniteEntry)
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.dim + j] = v;
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                out.set(j, i, self.get(i, j).conj());
            }
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "matrix product dimension mismatch");
        let d = self.dim;
        let mut out = Self::zeros(d);
        for i in 0..d {
            for k in 0..d {
                let aik = self.get(i, k);
                if aik.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..d {
                    let v = out.get(i, j) + aik * other.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(other.data.iter()) {
            *a += *b;
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(other.data.iter()) {
            *a -= *b;
        }
        out
    }

    pub fn scale(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for a in out.data.iter_mut() {
            *a *= factor;
        }
        out
    }

    /// y = M x
    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.dim);
        let d = self.dim;
        let mut y = vec![Complex64::new(0.0, 0.0); d];
        for i in 0..d {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..d {
                acc += self.get(i, j) * x[j];
            }
            y[i] = acc;
        }
        y
    }

    /// ⟨x| M |x⟩, returned as a complex number (real for Hermitian M).
    pub fn quadratic_form(&self, x: &[Complex64]) -> Complex64 {
        let mx = self.apply(x);
        x.iter().zip(mx.iter()).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Kronecker product; used for cross-checks against the per-party shortcuts.
    pub fn kron(&self, other: &Self) -> Self {
        let da = self.dim;
        let db = other.dim;
        let mut out = Self::zeros(da * db);
        for i in 0..da {
            for j in 0..da {
                let aij = self.get(i, j);
                for k in 0..db {
                    for l in 0..db {
                        out.set(i * db + k, j * db + l, aij * other.get(k, l));
                    }
                }
            }
        }
        out
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        let mut dev: f64 = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                dev = dev.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        dev
    }

    /// (A + A†)/2
    pub fn symmetrized(&self) -> Self {
        let mut out = Self::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                out.set(i, j, (self.get(i, j) + self.get(j, i).conj()) * 0.5);
            }
        }
        out
    }
}

// JSON form: list of rows, each entry a [re, im] pair.
impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<[f64; 2]>> = (0..self.dim)
            .map(|i| (0..self.dim).map(|j| [self.get(i, j).re, self.get(i, j).im]).collect())
            .collect();
        rows.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let rows: Vec<Vec<[f64; 2]>> = Vec::deserialize(deserializer)?;
        let converted: Vec<Vec<Complex64>> = rows
            .iter()
            .map(|r| r.iter().map(|p| Complex64::new(p[0], p[1])).collect())
            .collect();
        ComplexMatrix::from_rows(&converted).map_err(D::Error::custom)
    }
}

/// Eigendecomposition of a Hermitian matrix: ascending eigenvalues and the
/// matching orthonormal eigenvectors as columns.
#[derive(Debug, Clone)]
pub struct EigDecomposition {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl EigDecomposition {
    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        *self.values.last().unwrap()
    }

    /// V f(Λ) V†
    pub fn map_rebuild(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let d = self.values.len();
        let mut out = ComplexMatrix::zeros(d);
        for (k, &lam) in self.values.iter().enumerate() {
            let flam = f(lam);
            for i in 0..d {
                let vik = self.vectors.get(i, k);
                for j in 0..d {
                    let v = out.get(i, j) + vik * self.vectors.get(j, k).conj() * flam;
                    out.set(i, j, v);
                }
            }
        }
        out
    }
}

fn offdiag_frob_sq(a: &ComplexMatrix) -> f64 {
    let d = a.dim();
    let mut acc = 0.0;
    for i in 0..d {
        for j in 0..d {
            if i != j {
                acc += a.get(i, j).norm_sqr();
            }
        }
    }
    acc
}

/// Eigenvalues and eigenvectors of a Hermitian matrix by cyclic Jacobi rotations.
///
/// The input is symmetrized when its deviation from A† is within the 1e-12
/// tolerance; larger deviations are rejected as `NotHermitian`.
pub fn eig_hermitian(a: &ComplexMatrix) -> Result<EigDecomposition, SpectraError> {
    a.check_finite()?;
    let dev = a.hermiticity_deviation();
    if dev > HERMITICITY_TOL * f64::max(1.0, a.max_abs_entry()) {
        return Err(SpectraError::NotHermitian { deviation: dev });
    }
    let d = a.dim();
    let mut m = a.symmetrized();
    let mut v = ComplexMatrix::identity(d);
    if d <= 1 {
        let values = if d == 1 { vec![m.get(0, 0).re] } else { vec![] };
        return Ok(EigDecomposition { values, vectors: v });
    }

    let scale = f64::max(1.0, m.frobenius_norm());
    let threshold_sq = (JACOBI_OFF_TOL * scale).powi(2);
    let mut converged = false;
    for _ in 0..JACOBI_MAX_SWEEPS {
        if offdiag_frob_sq(&m) < threshold_sq {
            converged = true;
            break;
        }
        for p in 0..d {
            for q in (p + 1)..d {
                jacobi_rotate(&mut m, &mut v, p, q);
            }
        }
    }
    if !converged && offdiag_frob_sq(&m) >= threshold_sq {
        return Err(SpectraError::NoConvergence);
    }

    let mut order: Vec<usize> = (0..d).collect();
    let diag: Vec<f64> = (0..d).map(|i| m.get(i, i).re).collect();
    order.sort_by(|&i, &j| diag[i].partial_cmp(&diag[j]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| diag[i]).collect();
    let mut vectors = ComplexMatrix::zeros(d);
    for (new_col, &old_col) in order.iter().enumerate() {
        for row in 0..d {
            vectors.set(row, new_col, v.get(row, old_col));
        }
    }
    Ok(EigDecomposition { values, vectors })
}

/// One Jacobi rotation annihilating the (p, q) entry of the Hermitian matrix `m`.
fn jacobi_rotate(m: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = m.get(p, q);
    let beta = apq.norm();
    if beta == 0.0 {
        return;
    }
    let phase = apq / beta; // e^{i φ}
    let alpha = m.get(p, p).re;
    let gamma = m.get(q, q).re;
    let tau = (gamma - alpha) / (2.0 * beta);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        1.0 / (tau - (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    // Column block of the unitary J: [[c, s], [-s e^{-iφ}, c e^{-iφ}]].
    let jpp = Complex64::new(c, 0.0);
    let jpq = Complex64::new(s, 0.0);
    let jqp = -s * phase.conj();
    let jqq = c * phase.conj();

    let d = m.dim();
    // M <- M J (columns p and q)
    for k in 0..d {
        let mkp = m.get(k, p);
        let mkq = m.get(k, q);
        m.set(k, p, mkp * jpp + mkq * jqp);
        m.set(k, q, mkp * jpq + mkq * jqq);
    }
    // M <- J† M (rows p and q)
    for k in 0..d {
        let mpk = m.get(p, k);
        let mqk = m.get(q, k);
        m.set(p, k, jpp.conj() * mpk + jqp.conj() * mqk);
        m.set(q, k, jpq.conj() * mpk + jqq.conj() * mqk);
    }
    // Keep the matrix exactly Hermitian against rounding drift.
    m.set(p, q, Complex64::new(0.0, 0.0));
    m.set(q, p, Complex64::new(0.0, 0.0));
    m.set(p, p, Complex64::new(m.get(p, p).re, 0.0));
    m.set(q, q, Complex64::new(m.get(q, q).re, 0.0));

    // V <- V J
    for k in 0..d {
        let vkp = v.get(k, p);
        let vkq = v.get(k, q);
        v.set(k, p, vkp * jpp + vkq * jqp);
        v.set(k, q, vkp * jpq + vkq * jqq);
    }
}

/// Hermitian positive-definite matrix. Houses the per-party Gram operators
/// G_i = g_i†g_i and everything derived from them.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct HermitianPD {
    mat: ComplexMatrix,
}

impl HermitianPD {
    pub fn new(mat: ComplexMatrix) -> Result<Self, SpectraError> {
        mat.check_finite()?;
        let dev = mat.hermiticity_deviation();
        if dev > HERMITICITY_TOL * f64::max(1.0, mat.max_abs_entry()) {
            return Err(SpectraError::NotHermitian { deviation: dev });
        }
        let sym = mat.symmetrized();
        let eig = eig_hermitian(&sym)?;
        if eig.min() <= 0.0 {
            return Err(SpectraError::NotPositiveDefinite { min_eig: eig.min() });
        }
        Ok(Self { mat: sym })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            mat: ComplexMatrix::identity(dim),
        }
    }

    pub fn diag(entries: &[f64]) -> Result<Self, SpectraError> {
        Self::new(ComplexMatrix::diag_real(entries))
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.mat.dim()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn eig(&self) -> EigDecomposition {
        eig_hermitian(&self.mat).expect("validated PD matrix must diagonalize")
    }

    pub fn lambda_max(&self) -> f64 {
        self.eig().max()
    }

    pub fn lambda_min(&self) -> f64 {
        self.eig().min()
    }

    /// G^{-1/2} via eigendecomposition.
    pub fn inv_sqrt(&self) -> ComplexMatrix {
        self.eig().map_rebuild(|lam| 1.0 / lam.sqrt())
    }

    /// G^{1/2} via eigendecomposition.
    pub fn sqrt(&self) -> ComplexMatrix {
        self.eig().map_rebuild(|lam| lam.sqrt())
    }

    pub fn scale(&self, factor: f64) -> Self {
        assert!(factor > 0.0);
        Self {
            mat: self.mat.scale(factor),
        }
    }
}

impl<'de> Deserialize<'de> for HermitianPD {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let mat = ComplexMatrix::deserialize(deserializer)?;
        HermitianPD::new(mat).map_err(D::Error::custom)
    }
}

/// λ_max(G⁻¹H) via the Hermitian similarity G^{-1/2} H G^{-1/2}.
pub fn relative_eig_max(g: &HermitianPD, h: &HermitianPD) -> Result<f64, SpectraError> {
    if g.dim() != h.dim() {
        return Err(SpectraError::DimensionMismatch {
            left: g.dim(),
            right: h.dim(),
        });
    }
    let s = g.inv_sqrt();
    let m = s.mul(h.matrix()).mul(&s).symmetrized();
    Ok(eig_hermitian(&m)?.max())
}

/// λ_max of a tensor product of positive operators: the product of the
/// per-party maximal eigenvalues. Avoids forming d^n matrices.
pub fn tensor_lambda_max(parts: &[HermitianPD]) -> Result<f64, SpectraError> {
    if parts.is_empty() {
        return Err(SpectraError::EmptyInput);
    }
    Ok(parts.iter().map(|p| p.lambda_max()).product())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn random_hermitian(rng: &mut impl Rng, d: usize) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(d);
        for i in 0..d {
            m.set(i, i, Complex64::new(rng.gen_range(-1.0..1.0), 0.0));
            for j in (i + 1)..d {
                let z = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                m.set(i, j, z);
                m.set(j, i, z.conj());
            }
        }
        m
    }

    pub(crate) fn random_pd(rng: &mut impl Rng, d: usize) -> HermitianPD {
        let h = random_hermitian(rng, d);
        // A A† + ε·1 is PD
        let mut m = h.mul(&h.adjoint());
        for i in 0..d {
            m.set(i, i, m.get(i, i) + Complex64::new(0.05, 0.0));
        }
        HermitianPD::new(m).unwrap()
    }

    #[test]
    fn eig_diagonal_input() {
        let m = ComplexMatrix::diag_real(&[1.0, 0.5]);
        let e = eig_hermitian(&m).unwrap();
        assert_eq!(e.values, vec![0.5, 1.0]);
    }

    #[test]
    fn eig_identity_three() {
        let e = eig_hermitian(&ComplexMatrix::identity(3)).unwrap();
        assert_eq!(e.values, vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn eig_real_symmetric_two_by_two() {
        // characteristic polynomial of [[2,1],[1,2]]: (λ-2)² = 1 → λ ∈ {1, 3}
        let m = ComplexMatrix::from_real_rows(&[&[2.0, 1.0], &[1.0, 2.0]]).unwrap();
        let e = eig_hermitian(&m).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-12);
        assert!((e.values[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        let m = ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[0.0, 1.0]]).unwrap();
        assert!(matches!(
            eig_hermitian(&m),
            Err(SpectraError::NotHermitian { .. })
        ));
    }

    #[test]
    fn eig_reconstruction_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for d in 2..=8 {
            for _ in 0..20 {
                let a = random_hermitian(&mut rng, d);
                let e = eig_hermitian(&a).unwrap();
                let rebuilt = e.map_rebuild(|x| x);
                let resid = rebuilt.max_abs_diff(&a.symmetrized());
                assert!(
                    resid <= 1e-11 * f64::max(1.0, a.max_abs_entry()),
                    "residual {resid:.3e} at d={d}"
                );
                // ascending order
                for w in e.values.windows(2) {
                    assert!(w[0] <= w[1] + 1e-14);
                }
            }
        }
    }

    #[test]
    fn eig_invariant_under_unitary_conjugation() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let a = random_hermitian(&mut rng, 4);
            // unitary from eigenvectors of another random Hermitian matrix
            let u = eig_hermitian(&random_hermitian(&mut rng, 4)).unwrap().vectors;
            let conj = u.adjoint().mul(&a).mul(&u);
            let e1 = eig_hermitian(&a).unwrap();
            let e2 = eig_hermitian(&conj.symmetrized()).unwrap();
            for (x, y) in e1.values.iter().zip(e2.values.iter()) {
                assert!((x - y).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn relative_eig_commuting_diagonal() {
        let g = HermitianPD::diag(&[1.0, 0.8]).unwrap();
        let h = HermitianPD::diag(&[1.0, 0.5]).unwrap();
        let r = relative_eig_max(&g, &h).unwrap();
        assert!((r - 1.0).abs() < 1e-12);
    }

    #[test]
    fn relative_eig_equal_operators() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = random_pd(&mut rng, 5);
        let r = relative_eig_max(&g, &g).unwrap();
        assert!((r - 1.0).abs() < 1e-10);
    }

    #[test]
    fn relative_eig_rotated_factor() {
        // G = diag(1, 0.5), H = R(π/4) diag(1, 0.5) R(π/4)†:
        // G⁻¹H = [[0.75, 0.25], [0.5, 1.5]], trace 2.25, det 1,
        // λ_max = (2.25 + sqrt(1.0625)) / 2.
        let g = HermitianPD::diag(&[1.0, 0.5]).unwrap();
        let c = std::f64::consts::FRAC_PI_4.cos();
        let s = std::f64::consts::FRAC_PI_4.sin();
        let h = ComplexMatrix::from_real_rows(&[
            &[c * c + 0.5 * s * s, c * s - 0.5 * c * s],
            &[c * s - 0.5 * c * s, s * s + 0.5 * c * c],
        ])
        .unwrap();
        let h = HermitianPD::new(h).unwrap();
        let r = relative_eig_max(&g, &h).unwrap();
        let expected = (2.25 + 1.0625f64.sqrt()) / 2.0;
        assert!((r - expected).abs() < 1e-12, "{r} vs {expected}");
        assert!(r > 1.0);
    }

    #[test]
    fn relative_eig_dimension_mismatch() {
        let g = HermitianPD::identity(2);
        let h = HermitianPD::identity(3);
        assert!(matches!(
            relative_eig_max(&g, &h),
            Err(SpectraError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn relative_eig_reciprocal_bound() {
        // λ_max(G⁻¹H)·λ_max(H⁻¹G) ≥ 1, equality iff G ∝ H
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for _ in 0..200 {
            let g = random_pd(&mut rng, 3);
            let h = random_pd(&mut rng, 3);
            let fwd = relative_eig_max(&g, &h).unwrap();
            let bwd = relative_eig_max(&h, &g).unwrap();
            assert!(fwd * bwd >= 1.0 - 1e-10);
        }
        let g = random_pd(&mut rng, 4);
        let h = g.scale(2.5);
        let fwd = relative_eig_max(&g, &h).unwrap();
        let bwd = relative_eig_max(&h, &g).unwrap();
        assert!((fwd * bwd - 1.0).abs() < 1e-10);
    }

    #[test]
    fn tensor_lambda_max_basics() {
        let g = HermitianPD::diag(&[1.0, 0.8]).unwrap();
        let parts = vec![g; 5];
        assert!((tensor_lambda_max(&parts).unwrap() - 1.0).abs() < 1e-12);

        let a = HermitianPD::diag(&[2.0, 1.0]).unwrap();
        let b = HermitianPD::diag(&[3.0, 1.0]).unwrap();
        assert!((tensor_lambda_max(&[a.clone(), b.clone()]).unwrap() - 6.0).abs() < 1e-12);
        // explicit 4x4 Kronecker cross-check
        let kron = a.matrix().kron(b.matrix());
        let e = eig_hermitian(&kron).unwrap();
        assert!((e.max() - 6.0).abs() < 1e-12);

        let ident = vec![HermitianPD::identity(3); 4];
        assert!((tensor_lambda_max(&ident).unwrap() - 1.0).abs() < 1e-12);

        assert!(matches!(
            tensor_lambda_max(&[]),
            Err(SpectraError::EmptyInput)
        ));
    }

    #[test]
    fn tensor_lambda_max_matches_explicit_kron() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..10 {
            let a = random_pd(&mut rng, 4);
            let b = random_pd(&mut rng, 4);
            let c = random_pd(&mut rng, 4);
            let shortcut = tensor_lambda_max(&[a.clone(), b.clone(), c.clone()]).unwrap();
            let explicit = eig_hermitian(&a.matrix().kron(b.matrix()).kron(c.matrix()))
                .unwrap()
                .max();
            assert!(
                (shortcut - explicit).abs() <= 1e-9 * shortcut.max(1.0),
                "{shortcut} vs {explicit}"
            );
        }
    }

    #[test]
    fn inv_sqrt_squares_to_inverse() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let g = random_pd(&mut rng, 6);
        let s = g.inv_sqrt();
        let should_be_identity = s.mul(g.matrix()).mul(&s);
        assert!(should_be_identity.max_abs_diff(&ComplexMatrix::identity(6)) < 1e-10);
    }

    #[test]
    fn pd_constructor_rejects_indefinite() {
        let m = ComplexMatrix::diag_real(&[1.0, -0.2]);
        assert!(matches!(
            HermitianPD::new(m),
            Err(SpectraError::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn matrix_json_round_trip() {
        let m = ComplexMatrix::from_rows(&[
            vec![Complex64::new(1.0, 0.0), Complex64::new(0.25, -0.5)],
            vec![Complex64::new(0.25, 0.5), Complex64::new(0.75, 0.0)],
        ])
        .unwrap();
        let json = serde_json::to_string(&m).unwrap();
        let back: ComplexMatrix = serde_json::from_str(&json).unwrap();
        assert_eq!(m, back);
    }
}
