//! Polar interface models built on `Y_DQ(s)`:
//!
//! * `J(s)`: `(dphi, dVn) -> (dP, dQ)`
//! * `J_dp(s)`: `(omega~, dVn) -> (dP, dQ)` with `omega~ = s/(1+s tau) dphi`
//! * `J_df(s)`: `(omega~, Vn~d) -> (dP, dQ)`, both inputs filtered derivatives
//!
//! plus the static-network rational models `N_p(s)` and `N_df(s)`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::powerflow::{JacobianLF, OperatingPoint};
use crate::spectral::to_complex;
use crate::statespace::{ports, Channel, StateKind, StateMeta, StateSpace};

pub const DEFAULT_TAU: f64 = 0.01;

/// Operating-point matrices relating D-Q and polar quantities.
#[derive(Debug, Clone)]
pub struct InterfaceMatrices {
    /// `[[vD, vQ], [-vQ, vD]]`: currents to powers.
    pub e: DMatrix<f64>,
    /// `[[iD, iQ], [iQ, -iD]]`: voltages to powers.
    pub c: DMatrix<f64>,
    /// `[[vQ, vD], [-vD, vQ]]`: `(dphi, dVn)` to `(dvD, dvQ)`.
    pub f: DMatrix<f64>,
}

impl InterfaceMatrices {
    pub fn new(op: &OperatingPoint) -> Result<Self> {
        if let Some(k) = op.v_mag.iter().position(|&m| !(m > 0.0)) {
            return Err(Error::DegenerateOperatingPoint { bus: op.bus_ids[k].0 });
        }
        let n = op.n_buses();
        let block = |tl: &[f64], tr: &[f64], bl: &[f64], br: &[f64]| {
            let mut m = DMatrix::zeros(2 * n, 2 * n);
            for k in 0..n {
                m[(k, k)] = tl[k];
                m[(k, k + n)] = tr[k];
                m[(k + n, k)] = bl[k];
                m[(k + n, k + n)] = br[k];
            }
            m
        };
        let neg = |v: &[f64]| v.iter().map(|x| -x).collect::<Vec<_>>();
        Ok(InterfaceMatrices {
            e: block(&op.v_d, &op.v_q, &neg(&op.v_q), &op.v_d),
            c: block(&op.i_d, &op.i_q, &op.i_q, &neg(&op.i_d)),
            f: block(&op.v_q, &op.v_d, &neg(&op.v_d), &op.v_q),
        })
    }

    /// `(E Y + C) F` for a complex D-Q admittance matrix.
    pub fn transform(&self, y: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let e = to_complex(&self.e);
        (e * y + to_complex(&self.c)) * to_complex(&self.f)
    }
}

fn check_ports(ydq: &StateSpace, op: &OperatingPoint) -> Result<()> {
    let n = op.n_buses();
    if ydq.n_inputs() != 2 * n || ydq.n_outputs() != 2 * n {
        return Err(Error::Dimension(format!(
            "Y_DQ has {}x{} ports, operating point {} buses",
            ydq.n_outputs(),
            ydq.n_inputs(),
            n
        )));
    }
    for (k, &bus) in op.bus_ids.iter().enumerate() {
        if ydq.inputs[k].bus != bus || ydq.inputs[k + n].bus != bus {
            return Err(Error::Dimension(format!("port {k} is bus {}, operating point bus {bus}", ydq.inputs[k].bus)));
        }
    }
    Ok(())
}

/// `J(s) = (E Y_DQ(s) + C) F`.
pub fn build_j_of_s(ydq: &StateSpace, op: &OperatingPoint) -> Result<StateSpace> {
    check_ports(ydq, op)?;
    let im = InterfaceMatrices::new(op)?;
    let d2 = &im.e * &ydq.d * &im.f + &im.c * &im.f;
    StateSpace::new(
        ydq.a.clone(),
        &ydq.b * &im.f,
        &im.e * &ydq.c,
        d2,
        ports(&op.bus_ids, &[Channel::Phi, Channel::Vn]),
        ports(&op.bus_ids, &[Channel::P, Channel::Q]),
        ydq.state_meta.clone(),
    )
}

fn integrator_meta(buses: &[crate::netcase::BusId], what: &str) -> Vec<StateMeta> {
    buses
        .iter()
        .map(|b| StateMeta { kind: StateKind::Integrator, param: 0.0, label: format!("{what} integrator at bus {b}") })
        .collect()
}

fn check_tau(tau: f64) -> Result<()> {
    if tau > 0.0 && tau.is_finite() {
        Ok(())
    } else {
        Err(Error::Parameter(format!("tau must be positive, got {tau}")))
    }
}

/// `J_dp(s) = J(s) diag((1+s tau)/s I, I)`.
///
/// One integrator per bus holds the angle: `phi = x + tau * omega~` with
/// `x' = omega~`.
pub fn build_jdp(j: &StateSpace, tau: f64) -> Result<StateSpace> {
    check_tau(tau)?;
    let nx = j.n_states();
    let n = j.n_inputs() / 2;
    let bus_ids: Vec<_> = j.inputs[..n].iter().map(|p| p.bus).collect();

    let b_phi = j.b.columns(0, n);
    let d_phi = j.d.columns(0, n);

    let mut a = DMatrix::zeros(nx + n, nx + n);
    a.view_mut((0, 0), (nx, nx)).copy_from(&j.a);
    a.view_mut((0, nx), (nx, n)).copy_from(&b_phi);

    let mut b = DMatrix::zeros(nx + n, 2 * n);
    b.view_mut((0, 0), (nx, n)).copy_from(&(b_phi * tau));
    b.view_mut((0, n), (nx, n)).copy_from(&j.b.columns(n, n));
    b.view_mut((nx, 0), (n, n)).fill_with_identity();

    let mut c = DMatrix::zeros(2 * n, nx + n);
    c.view_mut((0, 0), (2 * n, nx)).copy_from(&j.c);
    c.view_mut((0, nx), (2 * n, n)).copy_from(&d_phi);

    let mut d = j.d.clone();
    d.columns_mut(0, n).scale_mut(tau);

    let mut meta = j.state_meta.clone();
    meta.extend(integrator_meta(&bus_ids, "angle"));
    StateSpace::new(a, b, c, d, ports(&bus_ids, &[Channel::OmegaTilde, Channel::Vn]), j.outputs.clone(), meta)
}

/// `J_df(s) = J(s) (1+s tau)/s`, one integrator per input channel.
pub fn build_jdf(j: &StateSpace, tau: f64) -> Result<StateSpace> {
    check_tau(tau)?;
    let nx = j.n_states();
    let m = j.n_inputs();
    let n = m / 2;
    let bus_ids: Vec<_> = j.inputs[..n].iter().map(|p| p.bus).collect();

    let mut a = DMatrix::zeros(nx + m, nx + m);
    a.view_mut((0, 0), (nx, nx)).copy_from(&j.a);
    a.view_mut((0, nx), (nx, m)).copy_from(&j.b);

    let mut b = DMatrix::zeros(nx + m, m);
    b.view_mut((0, 0), (nx, m)).copy_from(&(&j.b * tau));
    b.view_mut((nx, 0), (m, m)).fill_with_identity();

    let mut c = DMatrix::zeros(j.n_outputs(), nx + m);
    c.view_mut((0, 0), (j.n_outputs(), nx)).copy_from(&j.c);
    c.view_mut((0, nx), (j.n_outputs(), m)).copy_from(&j.d);

    let mut meta = j.state_meta.clone();
    meta.extend(integrator_meta(&bus_ids, "angle"));
    meta.extend(integrator_meta(&bus_ids, "magnitude"));
    StateSpace::new(
        a,
        b,
        c,
        &j.d * tau,
        ports(&bus_ids, &[Channel::OmegaTilde, Channel::VnTildeD]),
        j.outputs.clone(),
        meta,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RationalKind {
    /// `(1+s tau)/s` on the angle channels only.
    Np,
    /// `(1+s tau)/s` on every channel.
    Ndf,
}

/// Static-network low-frequency model: `J_LF` times per-channel
/// `(1+s tau)/s` multipliers.
#[derive(Debug, Clone)]
pub struct RationalLF {
    pub kind: RationalKind,
    pub jlf: DMatrix<f64>,
    pub tau: f64,
}

impl RationalLF {
    pub fn n_ports(&self) -> usize {
        self.jlf.nrows()
    }

    fn channel_multipliers(&self, s: Complex64) -> Vec<Complex64> {
        let m = self.n_ports();
        let filt = (Complex64::new(1.0, 0.0) + s * self.tau) / s;
        (0..m)
            .map(|k| match self.kind {
                RationalKind::Ndf => filt,
                RationalKind::Np if k < m / 2 => filt,
                RationalKind::Np => Complex64::new(1.0, 0.0),
            })
            .collect()
    }

    pub fn eval(&self, s: Complex64) -> Result<DMatrix<Complex64>> {
        if s.norm() == 0.0 {
            return Err(Error::PoleAtOrigin);
        }
        let mult = self.channel_multipliers(s);
        let j = &self.jlf;
        Ok(DMatrix::from_fn(j.nrows(), j.ncols(), |r, c| mult[c] * j[(r, c)]))
    }
}

pub fn build_np(j_lf: &JacobianLF, tau: f64) -> Result<RationalLF> {
    check_tau(tau)?;
    Ok(RationalLF { kind: RationalKind::Np, jlf: j_lf.full(), tau })
}

pub fn build_ndf(j_lf: &JacobianLF, tau: f64) -> Result<RationalLF> {
    check_tau(tau)?;
    Ok(RationalLF { kind: RationalKind::Ndf, jlf: j_lf.full(), tau })
}

/// `lim_{s->0} s N(s)`.
pub fn residue_at_origin(model: &RationalLF) -> DMatrix<f64> {
    let mut r = model.jlf.clone();
    if model.kind == RationalKind::Np {
        let n = model.n_ports() / 2;
        r.columns_mut(n, n).fill(0.0);
    }
    r
}
