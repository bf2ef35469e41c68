use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// A proper rotation (orthogonal, determinant +1).
#[derive(Debug, Clone, PartialEq)]
pub struct RotationMatrix {
    matrix: DMatrix<f64>,
}

impl RotationMatrix {
    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: DMatrix::identity(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// `Q x`
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let v = &self.matrix * DVector::from_column_slice(x);
        v.iter().copied().collect()
    }

    /// `max |Q^T Q - I|`
    pub fn orthogonality_error(&self) -> f64 {
        let n = self.dim();
        let gram = self.matrix.transpose() * &self.matrix;
        (gram - DMatrix::<f64>::identity(n, n)).amax()
    }

    pub fn determinant(&self) -> f64 {
        self.matrix.clone().determinant()
    }
}

/// Seeded random rotation: QR of a standard Gaussian matrix, with column
/// signs fixed so that `R` has a positive diagonal (Haar-distributed `Q`),
/// then one column flipped if needed for determinant +1.
pub fn random_orthogonal(dim: usize, seed: u64) -> RotationMatrix {
    assert!(dim >= 1, "rotation dimension must be positive");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gaussian = DMatrix::from_fn(dim, dim, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = gaussian.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..dim {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    if q.clone().determinant() < 0.0 {
        q.column_mut(0).neg_mut();
    }
    RotationMatrix { matrix: q }
}
