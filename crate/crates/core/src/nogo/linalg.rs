//! Small dense complex linear-algebra helpers.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Standard complex Gaussian entry (independent N(0,1) real and imaginary parts).
pub fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn gaussian_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CVector {
    CVector::from_fn(dim, |_, _| gaussian(rng))
}

/// Uniformly random unit vector.
pub fn random_unit_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CVector {
    loop {
        let v = gaussian_vector(dim, rng);
        let norm = v.norm();
        if norm > 1e-8 {
            return v.unscale(norm);
        }
    }
}

/// Removes the components of `v` along the orthonormal `basis`, twice
/// (modified Gram–Schmidt with one reorthogonalization pass).
pub fn orthogonalize(v: &mut CVector, basis: &[CVector]) {
    for _ in 0..2 {
        for q in basis {
            let proj = q.dotc(v);
            v.axpy(-proj, q, Complex64::new(1.0, 0.0));
        }
    }
}

/// Completes the orthonormal `seed` columns to a full orthonormal basis of
/// `C^dim`, always taking the standard basis vector with the largest
/// residual next. Deterministic.
pub fn complete_with_standard_basis(seed: Vec<CVector>, dim: usize) -> Vec<CVector> {
    let mut basis = seed;
    let mut candidates: Vec<usize> = (0..dim).collect();
    while basis.len() < dim {
        let (slot, best) = candidates
            .iter()
            .enumerate()
            .map(|(slot, &j)| {
                let mut v = CVector::zeros(dim);
                v[j] = Complex64::new(1.0, 0.0);
                orthogonalize(&mut v, &basis);
                (slot, v)
            })
            .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
            .expect("fewer basis vectors than dimensions leaves a candidate");
        candidates.swap_remove(slot);
        let norm = best.norm();
        basis.push(best.unscale(norm));
    }
    basis
}

/// Completes orthonormal `seed` columns with Gram–Schmidt on Gaussian
/// draws. With a Gaussian first column this is a Haar-distributed unitary.
pub fn complete_randomly<R: Rng + ?Sized>(seed: Vec<CVector>, dim: usize, rng: &mut R) -> Vec<CVector> {
    let mut basis = seed;
    while basis.len() < dim {
        let mut v = gaussian_vector(dim, rng);
        orthogonalize(&mut v, &basis);
        let norm = v.norm();
        if norm > 1e-6 {
            basis.push(v.unscale(norm));
        }
    }
    basis
}

pub fn from_columns(cols: &[CVector]) -> CMatrix {
    CMatrix::from_columns(cols)
}

/// `max |(M^† M - I)_{ij}|`.
pub fn unitarity_defect(m: &CMatrix) -> f64 {
    let g = m.adjoint() * m;
    let mut worst = 0.0f64;
    for i in 0..g.nrows() {
        for j in 0..g.ncols() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g[(i, j)] - Complex64::new(target, 0.0)).norm());
        }
    }
    worst
}

/// Haar-random unitary of size `dim`.
pub fn haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    from_columns(&complete_randomly(Vec::new(), dim, rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn completion_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for dim in [1, 2, 5, 16] {
            let v = random_unit_vector(dim, &mut rng);
            let m = from_columns(&complete_with_standard_basis(vec![v.clone()], dim));
            assert!(unitarity_defect(&m) < 1e-12);
            assert_eq!(m.column(0), v.column(0));
            assert!(unitarity_defect(&haar_unitary(dim, &mut rng)) < 1e-12);
        }
    }

    #[test]
    fn standard_seed_gives_identity() {
        let e0 = CVector::from_fn(4, |i, _| Complex64::new(if i == 0 { 1.0 } else { 0.0 }, 0.0));
        let m = from_columns(&complete_with_standard_basis(vec![e0], 4));
        let mut cols: Vec<usize> = (0..4)
            .map(|j| (0..4).find(|&i| m[(i, j)].norm() > 0.5).unwrap())
            .collect();
        cols.sort();
        assert_eq!(cols, vec![0, 1, 2, 3]);
        assert!(unitarity_defect(&m) == 0.0);
    }
}
