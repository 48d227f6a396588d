#![allow(dead_code)]

use dqpass::netcase::{Branch, Bus, Injection, InjectionKind, NetworkCase, SystemBase};
use dqpass::powerflow::{admittance_matrix, solve_powerflow, OperatingPoint};
use dqpass::{BusId, Complex64};
use nalgebra::{DMatrix, DVector};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub const OMEGA0: f64 = 376.99111843077515;

/// Random connected network with positive R, X, line charging and a mix of
/// PV and PQ injections. Not checked for power-flow feasibility.
pub fn random_case(rng: &mut StdRng, n: usize) -> NetworkCase {
    let buses = (1..=n as u32)
        .map(|id| Bus {
            id: BusId(id),
            v_nominal: 1.0,
            shunt_b: if rng.random_bool(0.2) { rng.random_range(0.0..0.1) } else { 0.0 },
            shunt_g: 0.0,
        })
        .collect();
    let mut edges: Vec<(u32, u32)> = (2..=n as u32).map(|k| (rng.random_range(1..k), k)).collect();
    for _ in 0..rng.random_range(0..=n / 2) {
        let a = rng.random_range(1..=n as u32);
        let b = rng.random_range(1..=n as u32);
        if a != b && !edges.iter().any(|&(x, y)| (x, y) == (a, b) || (x, y) == (b, a)) {
            edges.push((a, b));
        }
    }
    let branches = edges
        .into_iter()
        .map(|(from, to)| Branch {
            from: BusId(from),
            to: BusId(to),
            r: rng.random_range(0.005..0.05),
            x: rng.random_range(0.05..0.25),
            b_line: rng.random_range(0.0..0.3),
            ratio: 1.0,
        })
        .collect();
    let mut injections = vec![Injection {
        bus: BusId(1),
        kind: InjectionKind::Slack,
        p: 0.0,
        q: 0.0,
        v_set: Some(rng.random_range(1.0..1.05)),
    }];
    for k in 2..=n as u32 {
        if rng.random_bool(0.3) {
            injections.push(Injection {
                bus: BusId(k),
                kind: InjectionKind::Pv,
                p: rng.random_range(0.1..0.5),
                q: 0.0,
                v_set: Some(rng.random_range(0.99..1.04)),
            });
        } else {
            injections.push(Injection {
                bus: BusId(k),
                kind: InjectionKind::Pq,
                p: -rng.random_range(0.05..0.4),
                q: -rng.random_range(-0.05..0.2),
                v_set: None,
            });
        }
    }
    NetworkCase {
        system: SystemBase { base_mva: 100.0, omega0: OMEGA0 },
        buses,
        branches,
        injections,
        regulation: vec![],
    }
}

/// Random case whose power flow converges, with nonzero reactive power at
/// some bus, together with its operating point.
pub fn solved_case(seed: u64) -> (NetworkCase, OperatingPoint) {
    let mut rng = StdRng::seed_from_u64(seed);
    loop {
        let n = rng.random_range(3..=7);
        let case = random_case(&mut rng, n);
        if let Ok(op) = solve_powerflow(&case) {
            if op.q.iter().any(|q| q.abs() > 1e-3) {
                return (case, op);
            }
        }
    }
}

/// Complex power injections `V conj(Y V)` for magnitudes and angles.
fn nodal_power(y: &DMatrix<Complex64>, mag: &[f64], ang: &[f64]) -> Vec<Complex64> {
    let v = DVector::from_iterator(mag.len(), mag.iter().zip(ang).map(|(&m, &a)| Complex64::from_polar(m, a)));
    let i = y * &v;
    v.iter().zip(i.iter()).map(|(v, i)| v * i.conj()).collect()
}

/// Central-difference Jacobian of `[P; Q]` with respect to `[phi; V_n]`,
/// where `V_n = |V| / |V|_o`.
pub fn fd_jacobian(case: &NetworkCase, op: &OperatingPoint, h: f64) -> DMatrix<f64> {
    let y = admittance_matrix(case);
    let n = op.n_buses();
    let mut jac = DMatrix::zeros(2 * n, 2 * n);
    for col in 0..2 * n {
        let eval = |sign: f64| {
            let mut mag = op.v_mag.clone();
            let mut ang = op.phi.clone();
            if col < n {
                ang[col] += sign * h;
            } else {
                mag[col - n] *= 1.0 + sign * h;
            }
            nodal_power(&y, &mag, &ang)
        };
        let (plus, minus) = (eval(1.0), eval(-1.0));
        for row in 0..n {
            let d = (plus[row] - minus[row]) / (2.0 * h);
            jac[(row, col)] = d.re;
            jac[(row + n, col)] = d.im;
        }
    }
    jac
}

pub fn rel_err(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

pub fn rel_err_c(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}
