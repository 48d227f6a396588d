use num_complex::Complex64;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// The case text is not valid for the schema (syntax, missing field, wrong type).
    #[error("parse error{}: {message}", fmt_line(*line))]
    Parse { line: Option<usize>, message: String },

    #[error("invalid case{}: {message}", fmt_line(*line))]
    Validation { line: Option<usize>, message: String },

    #[error("topology error{}: {message}", fmt_line(*line))]
    Topology { line: Option<usize>, message: String },

    /// Shunt capacitance without series parasitic resistance makes the
    /// D-Q impedance improper (unbounded as s grows).
    #[error("improper model: {0}")]
    Propriety(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("transfer function evaluated at s = {s} which is within {tol:e} of the pole {pole}")]
    AtPole { s: Complex64, pole: Complex64, tol: f64 },

    #[error("rational low-frequency model has a pole at s = 0; use its residue instead")]
    PoleAtOrigin,

    #[error("frequency sweep hit a singularity at omega = {omega} rad/s (pole {pole})")]
    SweepSingularity { omega: f64, pole: Complex64 },

    #[error("power flow did not converge in {iterations} iterations (max mismatch {mismatch:e} pu)")]
    NonConvergence { iterations: usize, mismatch: f64, trace: Vec<f64> },

    #[error("singular power-flow Jacobian at iteration {iteration}")]
    SingularJacobian { iteration: usize },

    #[error("operating point does not solve the network (max current mismatch {mismatch:e} pu)")]
    Consistency { mismatch: f64 },

    #[error("degenerate operating point: |V| = 0 at bus {bus}")]
    DegenerateOperatingPoint { bus: u32 },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("integration step unstable: {0}")]
    Integrator(String),

    #[error("no uniform Q-V contribution up to {cap} pu passivates the Jacobian")]
    Infeasible { cap: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

fn fmt_line(line: Option<usize>) -> String {
    match line {
        Some(l) => format!(" at line {l}"),
        None => String::new(),
    }
}
