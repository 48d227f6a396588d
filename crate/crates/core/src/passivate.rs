//! Q-V voltage-regulation contributions and the uniform passivation search.

use std::collections::HashSet;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netcase::{BusId, NetworkCase, QvContribution};
use crate::powerflow::{structural_mode, JacobianLF};
use crate::spectral;

/// Upper limit for the uniform contribution search, pu.
pub const KQV_CAP: f64 = 1e3;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RegulationSet {
    pub entries: Vec<QvContribution>,
}

impl RegulationSet {
    pub fn none() -> Self {
        RegulationSet::default()
    }

    pub fn uniform(buses: &[BusId], k_qv: f64) -> Self {
        RegulationSet { entries: buses.iter().map(|&bus| QvContribution { bus, k_qv }).collect() }
    }

    /// Contributions listed in the case file.
    pub fn from_case(case: &NetworkCase) -> Self {
        RegulationSet { entries: case.regulation.clone() }
    }

    /// Parses `bus:k,bus:k,...`.
    pub fn parse_inline(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (bus, k) =
                item.split_once(':').ok_or_else(|| Error::Config(format!("regulation entry `{item}` is not bus:k")))?;
            let bus = bus.trim().parse::<u32>().map_err(|e| Error::Config(format!("bus in `{item}`: {e}")))?;
            let k_qv = k.trim().parse::<f64>().map_err(|e| Error::Config(format!("k_qv in `{item}`: {e}")))?;
            entries.push(QvContribution { bus: BusId(bus), k_qv });
        }
        Ok(RegulationSet { entries })
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn buses(&self) -> Vec<BusId> {
        self.entries.iter().map(|e| e.bus).collect()
    }
}

/// Adds `k_qv` to `J_LF22[k, k]` for every entry.
pub fn apply_qv_contribution(j: &JacobianLF, reg: &RegulationSet) -> Result<JacobianLF> {
    let mut out = j.clone();
    for e in &reg.entries {
        let k = j
            .bus_ids
            .iter()
            .position(|&b| b == e.bus)
            .ok_or_else(|| Error::Validation { line: None, message: format!("regulation at unknown bus {}", e.bus) })?;
        if !(e.k_qv >= 0.0 && e.k_qv.is_finite()) {
            return Err(Error::Validation { line: None, message: format!("k_qv at bus {} must be >= 0", e.bus) });
        }
        out.j22[(k, k)] += e.k_qv;
    }
    Ok(out)
}

/// `min eig(U^T (J + J^T) U)` with `U` spanning the complement of the
/// uniform angle-shift mode.
pub fn projected_min_eigenvalue(j: &JacobianLF) -> f64 {
    let u = spectral::complement_basis(&structural_mode(j.n_buses()));
    let m: DMatrix<f64> = u.transpose() * j.symmetric_part() * &u;
    spectral::symmetric_eigenvalues(&m)[0]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KqvSearch {
    pub k_star: f64,
    /// Projected minimum eigenvalue at `k_star`.
    pub lambda_min: f64,
    pub evaluations: usize,
}

/// Smallest uniform contribution at `buses` that makes the projected
/// symmetric part of `J_LF` positive semi-definite, to within `tol` in k.
pub fn min_uniform_kqv(j: &JacobianLF, buses: &[BusId], tol: f64) -> Result<KqvSearch> {
    if buses.is_empty() {
        return Err(Error::Parameter("no buses to place regulation at".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::Parameter("search tolerance must be positive".into()));
    }
    let unique: HashSet<_> = buses.iter().collect();
    if unique.len() != buses.len() {
        return Err(Error::Parameter("duplicate bus in regulation search".into()));
    }
    let mut evaluations = 0;
    let mut lambda = |k: f64| -> Result<f64> {
        evaluations += 1;
        Ok(projected_min_eigenvalue(&apply_qv_contribution(j, &RegulationSet::uniform(buses, k))?))
    };

    let at_zero = lambda(0.0)?;
    if !at_zero.is_finite() {
        return Err(Error::Numerical("non-finite eigenvalue".into()));
    }
    if at_zero >= 0.0 {
        return Ok(KqvSearch { k_star: 0.0, lambda_min: at_zero, evaluations });
    }
    let (mut lo, mut hi) = (0.0, 1e-3);
    let mut at_hi = lambda(hi)?;
    while at_hi < 0.0 {
        if hi >= KQV_CAP {
            return Err(Error::Infeasible { cap: KQV_CAP });
        }
        lo = hi;
        hi = (hi * 2.0).min(KQV_CAP);
        at_hi = lambda(hi)?;
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let at_mid = lambda(mid)?;
        if at_mid >= 0.0 {
            hi = mid;
            at_hi = at_mid;
        } else {
            lo = mid;
        }
    }
    Ok(KqvSearch { k_star: hi, lambda_min: at_hi, evaluations })
}
