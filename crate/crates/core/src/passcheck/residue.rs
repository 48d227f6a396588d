use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::Tolerances;
use crate::spectral;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidueVerdict {
    /// `|R - R^H|_F / |R|_F` (zero for a zero residue).
    pub hermitian_deviation: f64,
    /// Minimum eigenvalue of `(R + R^H)/2`.
    pub lambda_min: f64,
    pub hermitian: bool,
    pub psd: bool,
    pub pass: bool,
}

pub fn check_residue_psd_hermitian(r: &DMatrix<Complex64>, tol: &Tolerances) -> ResidueVerdict {
    let norm = r.norm();
    let hermitian_deviation = if norm == 0.0 { 0.0 } else { (r - r.adjoint()).norm() / norm };
    let sym = (r + r.adjoint()) * Complex64::new(0.5, 0.0);
    let lambda_min = spectral::hermitian_min_eigenvalue(&sym);
    let hermitian = hermitian_deviation <= tol.hermitian;
    let psd = lambda_min >= -tol.psd;
    ResidueVerdict { hermitian_deviation, lambda_min, hermitian, psd, pass: hermitian && psd }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_passes() {
        let v = check_residue_psd_hermitian(&DMatrix::identity(3, 3), &Tolerances::default());
        assert!(v.pass);
        assert_eq!(v.hermitian_deviation, 0.0);
        assert!((v.lambda_min - 1.0).abs() < 1e-12);
    }

    #[test]
    fn non_hermitian_fails() {
        let r = spectral::to_complex(&DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 1.0, 1.0]));
        let v = check_residue_psd_hermitian(&r, &Tolerances::default());
        assert!(!v.hermitian && !v.pass);
    }

    #[test]
    fn negative_definite_fails() {
        let r = spectral::to_complex(&(-DMatrix::<f64>::identity(2, 2)));
        let v = check_residue_psd_hermitian(&r, &Tolerances::default());
        assert!(v.hermitian && !v.psd);
    }
}
