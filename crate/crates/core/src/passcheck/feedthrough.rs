use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::Tolerances;
use crate::spectral;
use crate::statespace::StateSpace;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedthroughReport {
    /// `trace(D + D^T)`.
    pub trace: f64,
    /// `min eig(D + D^T)`.
    pub lambda_min: f64,
    /// Diagonal of `D + D^T`.
    pub diagonal: Vec<f64>,
    /// Per-bus `i_D v_Q - i_Q v_D` (equals `-Q`), filled in for the
    /// angle-rate model where it sets the sign of the diagonal.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bus_indicator: Option<Vec<f64>>,
    /// `D + D^T` is not positive semi-definite: the model cannot be passive.
    pub certificate: bool,
    pub pass: bool,
}

pub fn check_feedthrough(ss: &StateSpace, tol: &Tolerances) -> FeedthroughReport {
    check_feedthrough_matrix(&ss.d, tol)
}

pub fn check_feedthrough_matrix(d: &DMatrix<f64>, tol: &Tolerances) -> FeedthroughReport {
    let sym = d + d.transpose();
    let lambda_min = spectral::symmetric_eigenvalues(&sym).first().copied().unwrap_or(f64::INFINITY);
    let certificate = lambda_min < -tol.psd;
    FeedthroughReport {
        trace: sym.trace(),
        lambda_min,
        diagonal: sym.diagonal().iter().copied().collect(),
        bus_indicator: None,
        certificate,
        pass: !certificate,
    }
}
