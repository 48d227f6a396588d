//! Wide-band D-Q admittance model `Y_DQ(s)` of an R-L-C network.
//!
//! Inputs are bus voltages `(v_D, v_Q)` and outputs the currents injected
//! into the network, both stacked as all D components then all Q
//! components. Phasors are `v_Q + j v_D`, rotating at `omega0`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netcase::NetworkCase;
use crate::statespace::{ports, Channel, StateKind, StateMeta, StateSpace};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParasiticConfig {
    /// Resistance in series with every shunt capacitor, pu.
    pub r_series_cap: f64,
    /// Conductance added at every bus, pu.
    pub g_shunt_bus: f64,
}

impl Default for ParasiticConfig {
    fn default() -> Self {
        ParasiticConfig { r_series_cap: 1e-4, g_shunt_bus: 0.0 }
    }
}

pub fn assemble_ydq(case: &NetworkCase, par: &ParasiticConfig) -> Result<StateSpace> {
    if !(par.r_series_cap >= 0.0 && par.g_shunt_bus >= 0.0) {
        return Err(Error::Parameter("parasitic values must be non-negative".into()));
    }
    let n = case.n_buses();
    let w0 = case.system.omega0;
    let index = case.bus_index();
    for br in &case.branches {
        for end in [br.from, br.to] {
            if !index.contains_key(&end) {
                return Err(Error::Topology { line: None, message: format!("branch references unknown bus {end}") });
            }
        }
    }

    let caps: Vec<(usize, f64)> =
        case.total_shunt_b().into_iter().enumerate().filter(|&(_, b)| b > 0.0).map(|(k, b)| (k, b / w0)).collect();
    if !caps.is_empty() && par.r_series_cap <= 0.0 {
        return Err(Error::Propriety(
            "shunt capacitance needs a positive series resistance: a bare capacitor makes the network \
             impedance improper and Y_DQ has no state-space realization"
                .into(),
        ));
    }

    let inductive: Vec<usize> = (0..case.branches.len()).filter(|&i| case.branches[i].x > 0.0).collect();
    let nx = 2 * (inductive.len() + caps.len());
    let mut a = DMatrix::zeros(nx, nx);
    let mut b = DMatrix::zeros(nx, 2 * n);
    let mut c = DMatrix::zeros(2 * n, nx);
    let mut d1 = DMatrix::<f64>::zeros(n, n);
    let mut meta = Vec::with_capacity(nx);

    for (k, bus) in case.buses.iter().enumerate() {
        d1[(k, k)] += bus.shunt_g + par.g_shunt_bus;
    }

    let mut s = 0;
    for &bi in &inductive {
        let br = &case.branches[bi];
        let (f, t, tap) = (index[&br.from], index[&br.to], br.ratio);
        let l = br.x / w0;
        // L di/dt = v_f/tap - v_t - R i - j w0 L i, D row then Q row
        for ch in 0..2 {
            let x = s + ch;
            a[(x, x)] = -br.r / l;
            b[(x, ch * n + f)] += 1.0 / (tap * l);
            b[(x, ch * n + t)] -= 1.0 / l;
            c[(ch * n + f, x)] += 1.0 / tap;
            c[(ch * n + t, x)] -= 1.0;
            let axis = if ch == 0 { "D" } else { "Q" };
            meta.push(StateMeta {
                kind: StateKind::Inductor,
                param: l,
                label: format!("branch {bi} ({}-{}) i{axis}", br.from, br.to),
            });
        }
        a[(s, s + 1)] = -w0;
        a[(s + 1, s)] = w0;
        s += 2;
    }

    for br in case.branches.iter().filter(|br| br.x == 0.0) {
        let (f, t, tap) = (index[&br.from], index[&br.to], br.ratio);
        let g = 1.0 / br.r;
        d1[(f, f)] += g / (tap * tap);
        d1[(f, t)] -= g / tap;
        d1[(t, f)] -= g / tap;
        d1[(t, t)] += g;
    }

    let r = par.r_series_cap;
    for &(k, cap) in &caps {
        // C dv_c/dt = (v - v_c)/r - j w0 C v_c
        for ch in 0..2 {
            let x = s + ch;
            a[(x, x)] = -1.0 / (r * cap);
            b[(x, ch * n + k)] = 1.0 / (r * cap);
            c[(ch * n + k, x)] = -1.0 / r;
            let axis = if ch == 0 { "D" } else { "Q" };
            meta.push(StateMeta {
                kind: StateKind::Capacitor,
                param: cap,
                label: format!("shunt C at bus {} v{axis}", case.buses[k].id),
            });
        }
        a[(s, s + 1)] = -w0;
        a[(s + 1, s)] = w0;
        d1[(k, k)] += 1.0 / r;
        s += 2;
    }

    let mut d = DMatrix::zeros(2 * n, 2 * n);
    d.view_mut((0, 0), (n, n)).copy_from(&d1);
    d.view_mut((n, n), (n, n)).copy_from(&d1);

    let ids = case.bus_ids();
    StateSpace::new(
        a,
        b,
        c,
        d,
        ports(&ids, &[Channel::VD, Channel::VQ]),
        ports(&ids, &[Channel::ID, Channel::IQ]),
        meta,
    )
}

/// Physical stored energy `1/2 sum(param * x^2)`.
pub fn storage_energy(x: &[f64], meta: &[StateMeta]) -> Result<f64> {
    if x.len() != meta.len() {
        return Err(Error::Dimension(format!("state vector has {} entries, metadata {}", x.len(), meta.len())));
    }
    Ok(0.5
        * x.iter()
            .zip(meta)
            .map(|(xi, m)| match m.kind {
                StateKind::Integrator => 0.0,
                _ => m.param * xi * xi,
            })
            .sum::<f64>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netcase::{ieee9, parse_case};
    use num_complex::Complex64;

    fn series_rl(r: f64, x: f64) -> NetworkCase {
        parse_case(&format!(
            "[system]\nbase_mva = 100.0\nomega0 = 376.99111843077515\n\
             [[buses]]\nid = 1\n[[buses]]\nid = 2\n\
             [[branches]]\nfrom = 1\nto = 2\nr = {r}\nx = {x}\n\
             [[injections]]\nbus = 1\nkind = \"slack\"\nv_set = 1.0\n"
        ))
        .unwrap()
    }

    #[test]
    fn series_branch_poles() {
        let case = series_rl(0.02, 0.1);
        let ss = assemble_ydq(&case, &ParasiticConfig::default()).unwrap();
        let w0 = case.system.omega0;
        let l = 0.1 / w0;
        let poles = ss.poles();
        assert_eq!(poles.len(), 2);
        for p in poles {
            assert!((p.re + 0.02 / l).abs() < 1e-9);
            assert!((p.im.abs() - w0).abs() < 1e-9);
        }
    }

    #[test]
    fn branch_steady_state_is_phasor_admittance() {
        let case = series_rl(0.02, 0.1);
        let ss = assemble_ydq(&case, &ParasiticConfig::default()).unwrap();
        let y0 = ss.eval_tf(Complex64::new(0.0, 0.0)).unwrap();
        // I = y V with I = iQ + j iD: [iD; iQ] = [[G, B], [-B, G]] [vD; vQ]
        let y = Complex64::new(1.0, 0.0) / Complex64::new(0.02, 0.1);
        let (g, bb) = (y.re, y.im);
        assert!((y0[(0, 0)].re - g).abs() < 1e-10);
        assert!((y0[(0, 2)].re - bb).abs() < 1e-10);
        assert!((y0[(2, 0)].re + bb).abs() < 1e-10);
        assert!((y0[(1, 0)].re + g).abs() < 1e-10);
    }

    #[test]
    fn resistor_only_network() {
        let text = "[system]\nbase_mva = 100.0\nomega0 = 376.99111843077515\n\
             [[buses]]\nid = 1\nshunt_g = 0.5\n[[buses]]\nid = 2\n[[buses]]\nid = 3\n\
             [[branches]]\nfrom = 1\nto = 2\nr = 0.5\nx = 0.0\n\
             [[branches]]\nfrom = 2\nto = 3\nr = 0.25\nx = 0.0\n\
             [[injections]]\nbus = 1\nkind = \"slack\"\nv_set = 1.0\n";
        let case = parse_case(text).unwrap();
        let ss = assemble_ydq(&case, &ParasiticConfig::default()).unwrap();
        assert_eq!(ss.n_states(), 0);
        let g = DMatrix::from_row_slice(3, 3, &[2.5, -2.0, 0.0, -2.0, 6.0, -4.0, 0.0, -4.0, 4.0]);
        let mut want = DMatrix::zeros(6, 6);
        want.view_mut((0, 0), (3, 3)).copy_from(&g);
        want.view_mut((3, 3), (3, 3)).copy_from(&g);
        assert!((&ss.d - want).norm() < 1e-12);
    }

    #[test]
    fn feedthrough_structure() {
        let ss = assemble_ydq(&ieee9(), &ParasiticConfig::default()).unwrap();
        let n = 9;
        let d = &ss.d;
        assert_eq!(d.view((0, n), (n, n)).norm(), 0.0);
        assert_eq!(d.view((n, 0), (n, n)).norm(), 0.0);
        let d1 = d.view((0, 0), (n, n)).into_owned();
        assert!((&d1 - d1.transpose()).norm() < 1e-12);
        assert_eq!(d1, d.view((n, n), (n, n)).into_owned());
        assert_eq!(ss.n_states(), 2 * 9 + 2 * 6);
    }

    #[test]
    fn bare_capacitor_is_improper() {
        let par = ParasiticConfig { r_series_cap: 0.0, g_shunt_bus: 0.0 };
        assert!(matches!(assemble_ydq(&ieee9(), &par), Err(Error::Propriety(_))));
    }

    #[test]
    fn state_ordering_branches_first() {
        let ss = assemble_ydq(&ieee9(), &ParasiticConfig::default()).unwrap();
        let kinds: Vec<_> = ss.state_meta.iter().map(|m| m.kind).collect();
        let first_cap = kinds.iter().position(|k| *k == StateKind::Capacitor).unwrap();
        assert!(kinds[..first_cap].iter().all(|k| *k == StateKind::Inductor));
        assert!(kinds[first_cap..].iter().all(|k| *k == StateKind::Capacitor));
        assert!(ss.state_meta[0].label.ends_with("iD") && ss.state_meta[1].label.ends_with("iQ"));
    }

    #[test]
    fn energy() {
        let meta = vec![
            StateMeta { kind: StateKind::Inductor, param: 0.1, label: String::new() },
            StateMeta { kind: StateKind::Inductor, param: 0.1, label: String::new() },
        ];
        assert_eq!(storage_energy(&[0.0, 0.0], &meta).unwrap(), 0.0);
        assert!((storage_energy(&[1.0, 0.0], &meta).unwrap() - 0.05).abs() < 1e-15);
        assert!(matches!(storage_energy(&[1.0], &meta), Err(Error::Dimension(_))));
    }
}
