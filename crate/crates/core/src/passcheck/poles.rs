use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::residue::{check_residue_psd_hermitian, ResidueVerdict};
use super::Tolerances;
use crate::spectral;
use crate::statespace::StateSpace;

/// `|Re(lambda)|` at or below this counts as an imaginary-axis pole.
pub const AXIS_TOLERANCE: f64 = 1e-9;
const CLUSTER_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisPole {
    pub pole: Complex64,
    pub multiplicity: usize,
    pub defective: bool,
    /// Residue test, absent when the pole is defective.
    pub residue: Option<ResidueVerdict>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoleReport {
    pub n_poles: usize,
    pub rhp_poles: Vec<Complex64>,
    pub axis_poles: Vec<AxisPole>,
    pub cond1_pass: bool,
    pub cond3_pass: bool,
}

/// Conditions 1 and 3 for a state-space model.
pub fn check_poles(ss: &StateSpace, tol: &Tolerances) -> PoleReport {
    check_poles_with(ss, tol, |r| r)
}

/// Like [`check_poles`], with `map` applied to each residue before the
/// Hermitian/PSD test (used to restrict to a port subspace).
pub(crate) fn check_poles_with<F>(ss: &StateSpace, tol: &Tolerances, map: F) -> PoleReport
where
    F: Fn(nalgebra::DMatrix<Complex64>) -> nalgebra::DMatrix<Complex64>,
{
    let poles = ss.poles();
    let rhp_poles: Vec<Complex64> = poles.iter().copied().filter(|p| p.re > AXIS_TOLERANCE).collect();
    let on_axis: Vec<Complex64> = poles.iter().copied().filter(|p| p.re.abs() <= AXIS_TOLERANCE).collect();

    let b = spectral::to_complex(&ss.b);
    let c = spectral::to_complex(&ss.c);
    let mut axis_poles = Vec::new();
    for (pole, multiplicity) in spectral::cluster(&on_axis, CLUSTER_TOLERANCE) {
        let pole = Complex64::new(0.0, pole.im);
        let proj = spectral::eigenprojection(&ss.a, pole, multiplicity);
        let residue = (!proj.defective).then(|| {
            let r = &c * &proj.projector * &b;
            check_residue_psd_hermitian(&map(r), tol)
        });
        axis_poles.push(AxisPole { pole, multiplicity, defective: proj.defective, residue });
    }
    let cond3_pass = axis_poles.iter().all(|p| !p.defective && p.residue.is_some_and(|r| r.pass));
    PoleReport { n_poles: poles.len(), cond1_pass: rhp_poles.is_empty(), rhp_poles, axis_poles, cond3_pass }
}
