use std::fmt::{self, Write as _};
use std::sync::OnceLock;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netcase::BusId;
use crate::spectral;

/// Distance (scaled by `max(1, |pole|)`) under which `eval_tf` refuses to
/// evaluate next to a pole.
pub const POLE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Channel {
    #[serde(rename = "vD")]
    VD,
    #[serde(rename = "vQ")]
    VQ,
    #[serde(rename = "iD")]
    ID,
    #[serde(rename = "iQ")]
    IQ,
    #[serde(rename = "phi")]
    Phi,
    #[serde(rename = "Vn")]
    Vn,
    #[serde(rename = "omega~")]
    OmegaTilde,
    #[serde(rename = "Vn~d")]
    VnTildeD,
    P,
    Q,
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Channel::VD => "vD",
            Channel::VQ => "vQ",
            Channel::ID => "iD",
            Channel::IQ => "iQ",
            Channel::Phi => "phi",
            Channel::Vn => "Vn",
            Channel::OmegaTilde => "omega~",
            Channel::VnTildeD => "Vn~d",
            Channel::P => "P",
            Channel::Q => "Q",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Port {
    pub bus: BusId,
    pub channel: Channel,
}

impl fmt::Display for Port {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.channel, self.bus)
    }
}

/// Stacks one channel over all buses, then the next channel.
pub fn ports(buses: &[BusId], channels: &[Channel]) -> Vec<Port> {
    channels.iter().flat_map(|&channel| buses.iter().map(move |&bus| Port { bus, channel })).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StateKind {
    Inductor,
    Capacitor,
    /// Filter/integrator state added by the polar models; stores no energy.
    Integrator,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateMeta {
    pub kind: StateKind,
    /// L or C in pu-seconds; zero for integrators.
    pub param: f64,
    pub label: String,
}

#[derive(Debug, Clone)]
pub struct StateSpace {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: DMatrix<f64>,
    pub d: DMatrix<f64>,
    pub inputs: Vec<Port>,
    pub outputs: Vec<Port>,
    pub state_meta: Vec<StateMeta>,
    poles: OnceLock<Vec<Complex64>>,
}

impl StateSpace {
    pub fn new(
        a: DMatrix<f64>,
        b: DMatrix<f64>,
        c: DMatrix<f64>,
        d: DMatrix<f64>,
        inputs: Vec<Port>,
        outputs: Vec<Port>,
        state_meta: Vec<StateMeta>,
    ) -> Result<Self> {
        let nx = a.nrows();
        let (nu, ny) = (inputs.len(), outputs.len());
        let dims = [
            ("A", a.shape(), (nx, nx)),
            ("B", b.shape(), (nx, nu)),
            ("C", c.shape(), (ny, nx)),
            ("D", d.shape(), (ny, nu)),
        ];
        for (name, got, want) in dims {
            if got != want {
                return Err(Error::Dimension(format!("{name} is {got:?}, expected {want:?}")));
            }
        }
        if state_meta.len() != nx {
            return Err(Error::Dimension(format!("{} state labels for {nx} states", state_meta.len())));
        }
        Ok(StateSpace { a, b, c, d, inputs, outputs, state_meta, poles: OnceLock::new() })
    }

    pub fn n_states(&self) -> usize {
        self.a.nrows()
    }

    pub fn n_inputs(&self) -> usize {
        self.b.ncols()
    }

    pub fn n_outputs(&self) -> usize {
        self.c.nrows()
    }

    /// Eigenvalues of A, computed once and cached.
    pub fn poles(&self) -> &[Complex64] {
        self.poles.get_or_init(|| spectral::eigenvalues(&self.a))
    }

    /// `C (sI - A)^{-1} B + D`.
    pub fn eval_tf(&self, s: Complex64) -> Result<DMatrix<Complex64>> {
        let d = spectral::to_complex(&self.d);
        let n = self.n_states();
        if n == 0 {
            return Ok(d);
        }
        if let Some(&pole) = self.poles().iter().find(|p| (s - **p).norm() <= POLE_TOLERANCE * p.norm().max(1.0)) {
            return Err(Error::AtPole { s, pole, tol: POLE_TOLERANCE });
        }
        let m = DMatrix::<Complex64>::identity(n, n) * s - spectral::to_complex(&self.a);
        let x = m
            .lu()
            .solve(&spectral::to_complex(&self.b))
            .ok_or_else(|| Error::Numerical(format!("sI - A singular at s = {s}")))?;
        Ok(spectral::to_complex(&self.c) * x + d)
    }

    /// Plain-text dump: header, port and state labels, then each matrix
    /// row-major under a `[NAME rows cols]` marker.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "states {}\ninputs {}\noutputs {}", self.n_states(), self.n_inputs(), self.n_outputs());
        let _ = writeln!(out, "[inputs]");
        for (i, p) in self.inputs.iter().enumerate() {
            let _ = writeln!(out, "{i} {p}");
        }
        let _ = writeln!(out, "[outputs]");
        for (i, p) in self.outputs.iter().enumerate() {
            let _ = writeln!(out, "{i} {p}");
        }
        let _ = writeln!(out, "[states]");
        for (i, m) in self.state_meta.iter().enumerate() {
            let kind = match m.kind {
                StateKind::Inductor => "inductor",
                StateKind::Capacitor => "capacitor",
                StateKind::Integrator => "integrator",
            };
            let _ = writeln!(out, "{i} {kind} {:e} {}", m.param, m.label);
        }
        for (name, m) in [("A", &self.a), ("B", &self.b), ("C", &self.c), ("D", &self.d)] {
            let _ = writeln!(out, "[{name} {} {}]", m.nrows(), m.ncols());
            for r in 0..m.nrows() {
                let row: Vec<String> = (0..m.ncols()).map(|c| format!("{:e}", m[(r, c)])).collect();
                let _ = writeln!(out, "{}", row.join(" "));
            }
        }
        out
    }
}
