//! Passivity tests.
//!
//! Frequency-domain conditions for a transfer matrix `G(s)`:
//!
//! 1. no poles in the open right half-plane;
//! 2. `G(jw) + G(jw)^H` positive semi-definite at every `w` that is not a pole;
//! 3. imaginary-axis poles simple, with positive semi-definite Hermitian residues.
//!
//! `D + D^T` positive semi-definite is a necessary time-domain condition and
//! gives a cheap non-passivity certificate.

mod classify;
mod dissipation;
mod feedthrough;
mod poles;
mod residue;
mod sweep;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polarmodels::RationalLF;
use crate::statespace::StateSpace;

pub use classify::{
    classify_model, reproduce_table_iii, AnalysisBand, ClassifyOptions, Evaluation, GridOutcome, ModelKind, Overall,
    PassivityVerdict,
};
pub use dissipation::{simulate_dissipation, DissipationOptions, DissipationReport, Multisine, Tone};
pub use feedthrough::{check_feedthrough, check_feedthrough_matrix, FeedthroughReport};
pub use poles::{check_poles, AxisPole, PoleReport, AXIS_TOLERANCE};
pub use residue::{check_residue_psd_hermitian, ResidueVerdict};
pub use sweep::{hermitian_part_min, sweep_psd, SweepGrid, SweepPoint, SweepReport};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Absolute tolerance on minimum eigenvalues.
    pub psd: f64,
    /// Relative tolerance on `|R - R^H| / |R|`.
    pub hermitian: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { psd: 1e-9, hermitian: 1e-9 }
    }
}

/// Anything whose transfer matrix can be evaluated on the imaginary axis.
pub trait FrequencyResponse: Sync {
    fn n_ports(&self) -> usize;
    fn response(&self, s: Complex64) -> Result<DMatrix<Complex64>>;
    /// Frequencies (rad/s, non-negative) of imaginary-axis poles.
    fn axis_pole_frequencies(&self) -> Vec<f64> {
        Vec::new()
    }
}

impl FrequencyResponse for StateSpace {
    fn n_ports(&self) -> usize {
        self.n_inputs()
    }

    fn response(&self, s: Complex64) -> Result<DMatrix<Complex64>> {
        self.eval_tf(s)
    }

    fn axis_pole_frequencies(&self) -> Vec<f64> {
        let mut w: Vec<f64> =
            self.poles().iter().filter(|p| p.re.abs() <= AXIS_TOLERANCE).map(|p| p.im.abs()).collect();
        w.sort_by(f64::total_cmp);
        w.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * b.max(1.0));
        w
    }
}

impl FrequencyResponse for RationalLF {
    fn n_ports(&self) -> usize {
        RationalLF::n_ports(self)
    }

    fn response(&self, s: Complex64) -> Result<DMatrix<Complex64>> {
        self.eval(s)
    }

    fn axis_pole_frequencies(&self) -> Vec<f64> {
        vec![0.0]
    }
}

/// A frequency-independent real gain.
#[derive(Debug, Clone)]
pub struct StaticGain(pub DMatrix<f64>);

impl FrequencyResponse for StaticGain {
    fn n_ports(&self) -> usize {
        self.0.nrows()
    }

    fn response(&self, _s: Complex64) -> Result<DMatrix<Complex64>> {
        Ok(crate::spectral::to_complex(&self.0))
    }
}

/// `U^T G(s) U` for a real orthonormal `U`: the response restricted to a
/// subspace of the ports.
pub struct Compressed<'a, M: FrequencyResponse> {
    pub inner: &'a M,
    pub basis: DMatrix<f64>,
}

impl<'a, M: FrequencyResponse> Compressed<'a, M> {
    pub fn new(inner: &'a M, basis: DMatrix<f64>) -> Result<Self> {
        if basis.nrows() != inner.n_ports() {
            return Err(Error::Dimension(format!("basis has {} rows for {} ports", basis.nrows(), inner.n_ports())));
        }
        Ok(Compressed { inner, basis })
    }
}

impl<M: FrequencyResponse> FrequencyResponse for Compressed<'_, M> {
    fn n_ports(&self) -> usize {
        self.basis.ncols()
    }

    fn response(&self, s: Complex64) -> Result<DMatrix<Complex64>> {
        let u = crate::spectral::to_complex(&self.basis);
        Ok(u.transpose() * self.inner.response(s)? * u)
    }

    fn axis_pole_frequencies(&self) -> Vec<f64> {
        self.inner.axis_pole_frequencies()
    }
}
