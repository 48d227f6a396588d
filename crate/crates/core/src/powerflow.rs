//! AC power flow and the unreduced low-frequency Jacobian.
//!
//! Angles follow `v_D = |V| sin(phi)`, `v_Q = |V| cos(phi)`, i.e. the
//! phasor is `V = v_Q + j v_D = |V| e^{j phi}`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netcase::{BusId, BusRole, NetworkCase};
use crate::spectral;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerFlowOptions {
    /// Max absolute power mismatch, pu.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for PowerFlowOptions {
    fn default() -> Self {
        PowerFlowOptions { tolerance: 1e-8, max_iterations: 50 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatingPoint {
    pub bus_ids: Vec<BusId>,
    pub v_d: Vec<f64>,
    pub v_q: Vec<f64>,
    /// Current injected into the network.
    pub i_d: Vec<f64>,
    pub i_q: Vec<f64>,
    pub v_mag: Vec<f64>,
    pub phi: Vec<f64>,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub iterations: usize,
    /// Mismatch after each Newton step, starting with the flat start.
    pub mismatch_trace: Vec<f64>,
}

impl OperatingPoint {
    /// Builds the operating point from phasor voltages and injected currents.
    pub fn from_phasors(bus_ids: Vec<BusId>, v: &[Complex64], i: &[Complex64]) -> Self {
        let s: Vec<Complex64> = v.iter().zip(i).map(|(v, i)| v * i.conj()).collect();
        OperatingPoint {
            bus_ids,
            v_d: v.iter().map(|z| z.im).collect(),
            v_q: v.iter().map(|z| z.re).collect(),
            i_d: i.iter().map(|z| z.im).collect(),
            i_q: i.iter().map(|z| z.re).collect(),
            v_mag: v.iter().map(|z| z.norm()).collect(),
            phi: v.iter().map(|z| z.im.atan2(z.re)).collect(),
            p: s.iter().map(|z| z.re).collect(),
            q: s.iter().map(|z| z.im).collect(),
            iterations: 0,
            mismatch_trace: Vec::new(),
        }
    }

    /// Operating point with the network currents `I = Y V` for the given voltages.
    pub fn from_voltages(case: &NetworkCase, v: &[Complex64]) -> Self {
        let y = admittance_matrix(case);
        let i = &y * DVector::from_column_slice(v);
        Self::from_phasors(case.bus_ids(), v, i.as_slice())
    }

    pub fn n_buses(&self) -> usize {
        self.bus_ids.len()
    }

    pub fn voltage(&self) -> Vec<Complex64> {
        self.v_q.iter().zip(&self.v_d).map(|(&q, &d)| Complex64::new(q, d)).collect()
    }

    pub fn current(&self) -> Vec<Complex64> {
        self.i_q.iter().zip(&self.i_d).map(|(&q, &d)| Complex64::new(q, d)).collect()
    }
}

/// Nodal admittance matrix at `omega0` (pi branches, off-nominal taps on
/// the `from` side, bus shunts).
pub fn admittance_matrix(case: &NetworkCase) -> DMatrix<Complex64> {
    let n = case.n_buses();
    let index = case.bus_index();
    let mut y = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
    for (k, bus) in case.buses.iter().enumerate() {
        y[(k, k)] += Complex64::new(bus.shunt_g, bus.shunt_b);
    }
    for br in &case.branches {
        let (f, t, a) = (index[&br.from], index[&br.to], br.ratio);
        let ys = Complex64::new(1.0, 0.0) / Complex64::new(br.r, br.x);
        let half = Complex64::new(0.0, 0.5 * br.b_line);
        y[(f, f)] += ys / (a * a) + half;
        y[(t, t)] += ys + half;
        y[(f, t)] -= ys / a;
        y[(t, f)] -= ys / a;
    }
    y
}

/// Full `[[dP/dphi, dP/dVn], [dQ/dphi, dQ/dVn]]` for voltages `v` and
/// injected currents `i` (the operating currents, which need not equal
/// `Y v` when `y` describes a simplified network).
fn polar_jacobian(y: &DMatrix<Complex64>, v: &[Complex64], i: &[Complex64]) -> DMatrix<f64> {
    let n = v.len();
    let j = Complex64::new(0.0, 1.0);
    let mut out = DMatrix::zeros(2 * n, 2 * n);
    for r in 0..n {
        for c in 0..n {
            // conj(Y diag(V))[r, c] scaled by V[r]
            let cross = v[r] * (y[(r, c)] * v[c]).conj();
            let own = if r == c { v[r] * i[r].conj() } else { Complex64::new(0.0, 0.0) };
            let d_phi = j * own - j * cross;
            let d_vn = own + cross;
            out[(r, c)] = d_phi.re;
            out[(r + n, c)] = d_phi.im;
            out[(r, c + n)] = d_vn.re;
            out[(r + n, c + n)] = d_vn.im;
        }
    }
    out
}

fn injected_power(y: &DMatrix<Complex64>, v: &[Complex64]) -> Vec<Complex64> {
    let i = y * DVector::from_column_slice(v);
    v.iter().zip(i.iter()).map(|(v, i)| v * i.conj()).collect()
}

pub fn solve_powerflow(case: &NetworkCase) -> Result<OperatingPoint> {
    solve_powerflow_with(case, &PowerFlowOptions::default())
}

/// Newton-Raphson from a flat start; setpoint voltages are applied at
/// slack and PV buses before the first iteration.
pub fn solve_powerflow_with(case: &NetworkCase, opts: &PowerFlowOptions) -> Result<OperatingPoint> {
    case.validate()?;
    let n = case.n_buses();
    let y = admittance_matrix(case);
    let specs = case.bus_specs();
    let mut mag: Vec<f64> = specs.iter().map(|s| s.v_set.unwrap_or(1.0)).collect();
    let mut ang = vec![0.0; n];

    let angle_buses: Vec<usize> = (0..n).filter(|&k| specs[k].role != BusRole::Slack).collect();
    let mag_buses: Vec<usize> = (0..n).filter(|&k| specs[k].role == BusRole::Pq).collect();
    let rows: Vec<usize> = angle_buses.iter().copied().chain(mag_buses.iter().map(|k| k + n)).collect();

    let mut trace = Vec::new();
    let mut iterations = 0;
    loop {
        let v: Vec<Complex64> = (0..n).map(|k| Complex64::from_polar(mag[k], ang[k])).collect();
        let s = injected_power(&y, &v);
        let mismatch: Vec<f64> = angle_buses
            .iter()
            .map(|&k| s[k].re - specs[k].p)
            .chain(mag_buses.iter().map(|&k| s[k].im - specs[k].q))
            .collect();
        let worst = mismatch.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        trace.push(worst);
        if !worst.is_finite() {
            return Err(Error::NonConvergence { iterations, mismatch: worst, trace });
        }
        if worst < opts.tolerance {
            let i = &y * DVector::from_column_slice(&v);
            let mut op = OperatingPoint::from_phasors(case.bus_ids(), &v, i.as_slice());
            op.iterations = iterations;
            op.mismatch_trace = trace;
            return Ok(op);
        }
        if iterations == opts.max_iterations {
            return Err(Error::NonConvergence { iterations, mismatch: worst, trace });
        }
        iterations += 1;

        let i = &y * DVector::from_column_slice(&v);
        let full = polar_jacobian(&y, &v, i.as_slice());
        let reduced = full.select_rows(&rows).select_columns(&rows);
        let dx = reduced
            .lu()
            .solve(&DVector::from_iterator(mismatch.len(), mismatch.iter().map(|m| -m)))
            .ok_or(Error::SingularJacobian { iteration: iterations })?;
        for (slot, &k) in angle_buses.iter().enumerate() {
            ang[k] += dx[slot];
        }
        for (slot, &k) in mag_buses.iter().enumerate() {
            mag[k] *= 1.0 + dx[angle_buses.len() + slot];
        }
    }
}

/// Unreduced low-frequency Jacobian in `(dphi, dVn) -> (dP, dQ)` block form.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobianLF {
    pub bus_ids: Vec<BusId>,
    pub j11: DMatrix<f64>,
    pub j12: DMatrix<f64>,
    pub j21: DMatrix<f64>,
    pub j22: DMatrix<f64>,
}

impl JacobianLF {
    pub fn from_full(bus_ids: Vec<BusId>, m: &DMatrix<f64>) -> Self {
        let n = bus_ids.len();
        assert_eq!(m.shape(), (2 * n, 2 * n));
        JacobianLF {
            j11: m.view((0, 0), (n, n)).into_owned(),
            j12: m.view((0, n), (n, n)).into_owned(),
            j21: m.view((n, 0), (n, n)).into_owned(),
            j22: m.view((n, n), (n, n)).into_owned(),
            bus_ids,
        }
    }

    pub fn n_buses(&self) -> usize {
        self.bus_ids.len()
    }

    pub fn full(&self) -> DMatrix<f64> {
        let n = self.n_buses();
        let mut m = DMatrix::zeros(2 * n, 2 * n);
        m.view_mut((0, 0), (n, n)).copy_from(&self.j11);
        m.view_mut((0, n), (n, n)).copy_from(&self.j12);
        m.view_mut((n, 0), (n, n)).copy_from(&self.j21);
        m.view_mut((n, n), (n, n)).copy_from(&self.j22);
        m
    }

    /// `J + J^T`.
    pub fn symmetric_part(&self) -> DMatrix<f64> {
        let m = self.full();
        &m + m.transpose()
    }

    /// Sorted eigenvalues of `J + J^T`.
    pub fn symmetric_part_eigenvalues(&self) -> Vec<f64> {
        spectral::symmetric_eigenvalues(&self.symmetric_part())
    }

    /// The uniform angle-shift direction `[1_n; 0_n]`, unit norm.
    pub fn angle_mode(&self) -> DVector<f64> {
        structural_mode(self.n_buses())
    }

    /// `max |J [1; 0]|`.
    pub fn null_residual(&self) -> f64 {
        self.j11.column_sum().abs().max().max(self.j21.column_sum().abs().max())
    }
}

/// `[1_n; 0_n] / sqrt(n)`.
pub fn structural_mode(n: usize) -> DVector<f64> {
    DVector::from_fn(2 * n, |i, _| if i < n { 1.0 / (n as f64).sqrt() } else { 0.0 })
}

/// Largest `|I_op - Y V|` over buses.
pub fn current_mismatch(case: &NetworkCase, op: &OperatingPoint) -> Result<f64> {
    if op.n_buses() != case.n_buses() {
        return Err(Error::Dimension(format!("operating point has {} buses, case {}", op.n_buses(), case.n_buses())));
    }
    let y = admittance_matrix(case);
    let i = &y * DVector::from_vec(op.voltage());
    Ok(i.iter().zip(op.current()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
}

/// Analytic `J_LF` for an operating point that solves `case`.
pub fn build_jlf_analytic(case: &NetworkCase, op: &OperatingPoint) -> Result<JacobianLF> {
    let mismatch = current_mismatch(case, op)?;
    if !(mismatch <= 1e-6) {
        return Err(Error::Consistency { mismatch });
    }
    jlf_at_operating_point(case, op)
}

/// `J_LF` of the network in `case` linearized at `op`, whose injected
/// currents are taken as given. This is the static limit of the polar
/// transformation of `Y_DQ` and is used when a simplified network is
/// studied around the operating point of the full one.
pub fn jlf_at_operating_point(case: &NetworkCase, op: &OperatingPoint) -> Result<JacobianLF> {
    if op.n_buses() != case.n_buses() {
        return Err(Error::Dimension(format!("operating point has {} buses, case {}", op.n_buses(), case.n_buses())));
    }
    if let Some(k) = op.v_mag.iter().position(|&m| !(m > 0.0)) {
        return Err(Error::DegenerateOperatingPoint { bus: op.bus_ids[k].0 });
    }
    let y = admittance_matrix(case);
    let full = polar_jacobian(&y, &op.voltage(), &op.current());
    Ok(JacobianLF::from_full(case.bus_ids(), &full))
}

/// Zeroes the P-V and Q-phi coupling blocks.
pub fn decouple(j: &JacobianLF) -> JacobianLF {
    let n = j.n_buses();
    JacobianLF { j12: DMatrix::zeros(n, n), j21: DMatrix::zeros(n, n), ..j.clone() }
}

/// Sorted eigenvalues with `|x| < 1e-9` shown as zero.
pub fn display_eigenvalues(values: &[f64]) -> Vec<f64> {
    values.iter().map(|&x| if x.abs() < 1e-9 { 0.0 } else { x }).collect()
}
