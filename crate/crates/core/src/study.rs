//! Which network and operating point a variant is analysed on.
//!
//! The operating point is always solved on the full network, except that
//! dropping shunt susceptance re-solves the flow without it (the charging
//! reactive power would otherwise appear as a phantom injection). The
//! lossless variant keeps the lossy operating point: the loads and
//! generation stay the same, only the network model is simplified.

use crate::error::Result;
use crate::netcase::{derive_variant, NetworkCase, VariantFlags};
use crate::passivate::{apply_qv_contribution, RegulationSet};
use crate::powerflow::{decouple, jlf_at_operating_point, solve_powerflow, JacobianLF, OperatingPoint};

#[derive(Debug, Clone)]
pub struct Study {
    pub flags: VariantFlags,
    /// The simplified network the models are built from.
    pub network: NetworkCase,
    pub op: OperatingPoint,
}

impl Study {
    pub fn new(case: &NetworkCase, flags: VariantFlags) -> Result<Self> {
        let flow_case = derive_variant(case, VariantFlags { no_shunt_b: flags.no_shunt_b, ..Default::default() });
        let op = solve_powerflow(&flow_case)?;
        Ok(Study { flags, network: derive_variant(case, flags), op })
    }

    /// `J_LF` of the study network, decoupled if requested, with the
    /// regulation contributions added.
    pub fn jacobian(&self, reg: &RegulationSet) -> Result<JacobianLF> {
        let mut j = jlf_at_operating_point(&self.network, &self.op)?;
        if self.flags.decoupled {
            j = decouple(&j);
        }
        apply_qv_contribution(&j, reg)
    }
}

/// Sorted eigenvalues of `J_LF + J_LF^T` for a variant, as tabulated.
pub fn symmetric_spectrum(case: &NetworkCase, flags: VariantFlags, reg: &RegulationSet) -> Result<Vec<f64>> {
    Ok(Study::new(case, flags)?.jacobian(reg)?.symmetric_part_eigenvalues())
}
