use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::feedthrough::{check_feedthrough_matrix, FeedthroughReport};
use super::poles::{check_poles, AxisPole, PoleReport};
use super::residue::check_residue_psd_hermitian;
use super::sweep::{sweep_psd, SweepGrid, SweepReport};
use super::{Compressed, StaticGain, Tolerances};
use crate::dqstamp::{assemble_ydq, ParasiticConfig};
use crate::error::{Error, Result};
use crate::netcase::{NetworkCase, VariantFlags};
use crate::par::{self, Execution};
use crate::passivate::RegulationSet;
use crate::polarmodels::{build_j_of_s, build_jdf, build_jdp, build_ndf, build_np, residue_at_origin, DEFAULT_TAU};
use crate::powerflow::{admittance_matrix, structural_mode, JacobianLF};
use crate::reference::{self, GridCell};
use crate::spectral::{complement_basis, to_complex};
use crate::statespace::StateSpace;
use crate::study::Study;

/// Interface variables: I `(vD,vQ)->(iD,iQ)`, II `(phi,Vn)->(P,Q)`,
/// III `(omega~,Vn)->(P,Q)`, IV `(omega~,Vn~d)->(P,Q)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelKind {
    I,
    II,
    III,
    IV,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [ModelKind::I, ModelKind::II, ModelKind::III, ModelKind::IV];
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "I" | "1" => Ok(ModelKind::I),
            "II" | "2" => Ok(ModelKind::II),
            "III" | "3" => Ok(ModelKind::III),
            "IV" | "4" => Ok(ModelKind::IV),
            other => Err(Error::Config(format!("unknown model `{other}` (expected I, II, III or IV)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnalysisBand {
    /// Full dynamic network model `Y_DQ(s)`.
    #[serde(rename = "wideband")]
    WideBand,
    /// Static network (`J_LF` based models).
    #[serde(rename = "lowfreq")]
    LowFrequency,
}

impl fmt::Display for AnalysisBand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AnalysisBand::WideBand => "wideband",
            AnalysisBand::LowFrequency => "lowfreq",
        })
    }
}

impl FromStr for AnalysisBand {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "wideband" | "wide-band" | "wide" => Ok(AnalysisBand::WideBand),
            "lowfreq" | "low-frequency" | "low" => Ok(AnalysisBand::LowFrequency),
            other => Err(Error::Config(format!("unknown analysis `{other}` (expected wideband or lowfreq)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Overall {
    Passive,
    NonPassive,
    PassiveAfterRegulation,
}

impl Overall {
    pub fn symbol(self) -> &'static str {
        match self {
            Overall::Passive => "✓",
            Overall::NonPassive => "✗",
            Overall::PassiveAfterRegulation => "✗*",
        }
    }
}

impl fmt::Display for Overall {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Overall::Passive => "passive",
            Overall::NonPassive => "non-passive",
            Overall::PassiveAfterRegulation => "passive-after-regulation",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifyOptions {
    pub tau: f64,
    pub grid: SweepGrid,
    pub tolerances: Tolerances,
    pub parasitics: ParasiticConfig,
    #[serde(skip)]
    pub execution: Execution,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            tau: DEFAULT_TAU,
            grid: SweepGrid::default(),
            tolerances: Tolerances::default(),
            parasitics: ParasiticConfig::default(),
            execution: Execution::default(),
        }
    }
}

/// Outcome of the three conditions plus the feedthrough test for one model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub cond1_rhp_poles: PoleReport,
    pub cond2_sweep: SweepReport,
    pub feedthrough: FeedthroughReport,
    pub pass: bool,
}

impl Evaluation {
    fn new(poles: PoleReport, sweep: SweepReport, feedthrough: FeedthroughReport) -> Self {
        let pass = poles.cond1_pass && poles.cond3_pass && sweep.pass && feedthrough.pass;
        Evaluation { cond1_rhp_poles: poles, cond2_sweep: sweep, feedthrough, pass }
    }

    pub fn cond3_pass(&self) -> bool {
        self.cond1_rhp_poles.cond3_pass
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PassivityVerdict {
    pub model: ModelKind,
    pub analysis: AnalysisBand,
    pub variant: VariantFlags,
    pub tau: f64,
    /// Low-frequency models are tested on the complement of the uniform
    /// angle-shift mode, which is a structural null direction.
    pub angle_mode_removed: bool,
    pub regulation: RegulationSet,
    pub unregulated: Evaluation,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub regulated: Option<Evaluation>,
    pub overall: Overall,
}

fn per_bus_indicator(study: &Study) -> Vec<f64> {
    let op = &study.op;
    (0..op.n_buses()).map(|k| op.i_d[k] * op.v_q[k] - op.i_q[k] * op.v_d[k]).collect()
}

fn evaluate_state_space(ss: &StateSpace, opts: &ClassifyOptions) -> Result<Evaluation> {
    let poles = check_poles(ss, &opts.tolerances);
    let sweep = sweep_psd(ss, &opts.grid, &opts.tolerances, opts.execution)?;
    let feed = check_feedthrough_matrix(&ss.d, &opts.tolerances);
    Ok(Evaluation::new(poles, sweep, feed))
}

fn no_poles() -> PoleReport {
    PoleReport { n_poles: 0, rhp_poles: vec![], axis_poles: vec![], cond1_pass: true, cond3_pass: true }
}

fn compress(u: &DMatrix<f64>, m: &DMatrix<f64>) -> DMatrix<f64> {
    u.transpose() * m * u
}

fn evaluate_low_frequency(model: ModelKind, j: &JacobianLF, opts: &ClassifyOptions) -> Result<Evaluation> {
    let u = complement_basis(&structural_mode(j.n_buses()));
    let tol = &opts.tolerances;
    match model {
        ModelKind::II => {
            let gain = StaticGain(j.full());
            let sweep = sweep_psd(&Compressed::new(&gain, u.clone())?, &opts.grid, tol, opts.execution)?;
            let feed = check_feedthrough_matrix(&compress(&u, &gain.0), tol);
            Ok(Evaluation::new(no_poles(), sweep, feed))
        }
        ModelKind::III | ModelKind::IV => {
            let (rational, multiplicity) = if model == ModelKind::III {
                (build_np(j, opts.tau)?, j.n_buses())
            } else {
                (build_ndf(j, opts.tau)?, 2 * j.n_buses())
            };
            let residue = compress(&u, &residue_at_origin(&rational));
            let verdict = check_residue_psd_hermitian(&to_complex(&residue), tol);
            let poles = PoleReport {
                n_poles: multiplicity,
                rhp_poles: vec![],
                axis_poles: vec![AxisPole {
                    pole: Complex64::new(0.0, 0.0),
                    multiplicity,
                    defective: false,
                    residue: Some(verdict),
                }],
                cond1_pass: true,
                cond3_pass: verdict.pass,
            };
            let sweep = sweep_psd(&Compressed::new(&rational, u.clone())?, &opts.grid, tol, opts.execution)?;
            // N(s) as s -> infinity: tau on the filtered channels
            let mut d_inf = rational.jlf.clone();
            d_inf.columns_mut(0, multiplicity).scale_mut(opts.tau);
            let feed = check_feedthrough_matrix(&compress(&u, &d_inf), tol);
            Ok(Evaluation::new(poles, sweep, feed))
        }
        ModelKind::I => unreachable!("model I low-frequency is evaluated on Y_DQ(0)"),
    }
}

fn static_ydq(study: &Study) -> DMatrix<f64> {
    let y = admittance_matrix(&study.network);
    let n = y.nrows();
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    for r in 0..n {
        for c in 0..n {
            let z = y[(r, c)];
            m[(r, c)] = z.re;
            m[(r + n, c + n)] = z.re;
            if !study.flags.decoupled {
                m[(r, c + n)] = z.im;
                m[(r + n, c)] = -z.im;
            }
        }
    }
    m
}

/// Runs the checks that apply to `model` in the given band and folds them
/// into a verdict.
///
/// Regulation contributions act on `J_LF22`, so they only matter for
/// low-frequency Models II-IV; otherwise they are recorded but unused.
pub fn classify_model(
    case: &NetworkCase,
    flags: VariantFlags,
    model: ModelKind,
    analysis: AnalysisBand,
    reg: &RegulationSet,
    opts: &ClassifyOptions,
) -> Result<PassivityVerdict> {
    if analysis == AnalysisBand::WideBand && flags.decoupled {
        return Err(Error::Config("the decoupled variant exists only for low-frequency analysis".into()));
    }
    let study = Study::new(case, flags)?;
    let mut angle_mode_removed = false;

    let (unregulated, regulated) = match (analysis, model) {
        (AnalysisBand::WideBand, _) => {
            let ydq = assemble_ydq(&study.network, &opts.parasitics)?;
            let ss = match model {
                ModelKind::I => ydq,
                _ => {
                    let j = build_j_of_s(&ydq, &study.op)?;
                    match model {
                        ModelKind::II => j,
                        ModelKind::III => build_jdp(&j, opts.tau)?,
                        _ => build_jdf(&j, opts.tau)?,
                    }
                }
            };
            let mut eval = evaluate_state_space(&ss, opts)?;
            if model == ModelKind::III {
                eval.feedthrough.bus_indicator = Some(per_bus_indicator(&study));
            }
            (eval, None)
        }
        (AnalysisBand::LowFrequency, ModelKind::I) => {
            let gain = StaticGain(static_ydq(&study));
            let sweep = sweep_psd(&gain, &opts.grid, &opts.tolerances, opts.execution)?;
            let feed = check_feedthrough_matrix(&gain.0, &opts.tolerances);
            (Evaluation::new(no_poles(), sweep, feed), None)
        }
        (AnalysisBand::LowFrequency, _) => {
            angle_mode_removed = true;
            let mut base = evaluate_low_frequency(model, &study.jacobian(&RegulationSet::none())?, opts)?;
            if model == ModelKind::III {
                base.feedthrough.bus_indicator = Some(per_bus_indicator(&study));
            }
            let regulated = if !base.pass && !reg.is_empty() {
                Some(evaluate_low_frequency(model, &study.jacobian(reg)?, opts)?)
            } else {
                None
            };
            (base, regulated)
        }
    };

    let overall = if unregulated.pass {
        Overall::Passive
    } else if regulated.as_ref().is_some_and(|e| e.pass) {
        Overall::PassiveAfterRegulation
    } else {
        Overall::NonPassive
    };
    Ok(PassivityVerdict {
        model,
        analysis,
        variant: flags,
        tau: opts.tau,
        angle_mode_removed,
        regulation: reg.clone(),
        unregulated,
        regulated,
        overall,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridOutcome {
    pub model: ModelKind,
    pub analysis: AnalysisBand,
    pub variant: VariantFlags,
    pub expected: Overall,
    pub computed: Overall,
    pub matches: bool,
    /// Projected minimum eigenvalue evidence from the unregulated sweep.
    pub worst_lambda_min: f64,
}

/// Classifies every published grid cell with the published regulation set.
pub fn reproduce_table_iii(case: &NetworkCase, opts: &ClassifyOptions) -> Result<Vec<GridOutcome>> {
    let reg = RegulationSet::uniform(&reference::REGULATION_BUSES, reference::REGULATION_K);
    let cells = reference::table_iii();
    let inner = ClassifyOptions { execution: Execution::Sequential, ..*opts };
    let results = par::map(opts.execution, &cells, |cell: &GridCell| {
        classify_model(case, cell.flags, cell.model, cell.band, &reg, &inner).map(|v| GridOutcome {
            model: cell.model,
            analysis: cell.band,
            variant: cell.flags,
            expected: cell.expected,
            computed: v.overall,
            matches: v.overall == cell.expected,
            worst_lambda_min: v.unregulated.cond2_sweep.worst.lambda_min,
        })
    });
    results.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netcase::ieee9;

    #[test]
    fn model_names_parse() {
        assert_eq!("iii".parse::<ModelKind>().unwrap(), ModelKind::III);
        assert!("V".parse::<ModelKind>().is_err());
        assert_eq!("lowfreq".parse::<AnalysisBand>().unwrap(), AnalysisBand::LowFrequency);
    }

    #[test]
    fn decoupled_wideband_is_rejected() {
        let flags = VariantFlags { decoupled: true, ..Default::default() };
        let err = classify_model(
            &ieee9(),
            flags,
            ModelKind::II,
            AnalysisBand::WideBand,
            &RegulationSet::none(),
            &ClassifyOptions::default(),
        );
        assert!(matches!(err, Err(Error::Config(_))));
    }

    #[test]
    fn model_one_wideband_passive() {
        let v = classify_model(
            &ieee9(),
            VariantFlags::default(),
            ModelKind::I,
            AnalysisBand::WideBand,
            &RegulationSet::none(),
            &ClassifyOptions::default(),
        )
        .unwrap();
        assert_eq!(v.overall, Overall::Passive, "{:#?}", v.unregulated);
    }

    #[test]
    fn model_two_regulation_flip() {
        let opts = ClassifyOptions::default();
        let none = classify_model(
            &ieee9(),
            VariantFlags::default(),
            ModelKind::II,
            AnalysisBand::LowFrequency,
            &RegulationSet::none(),
            &opts,
        )
        .unwrap();
        assert_eq!(none.overall, Overall::NonPassive);
        let reg = RegulationSet::uniform(&reference::REGULATION_BUSES, reference::REGULATION_K);
        let with =
            classify_model(&ieee9(), VariantFlags::default(), ModelKind::II, AnalysisBand::LowFrequency, &reg, &opts)
                .unwrap();
        assert_eq!(with.overall, Overall::PassiveAfterRegulation);
    }
}
