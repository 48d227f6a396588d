use std::fmt::Write;

use dqpass::passcheck::{Evaluation, PassivityVerdict};
use dqpass::powerflow::{JacobianLF, OperatingPoint};
use dqpass::statespace::{StateKind, StateSpace};
use nalgebra::DMatrix;
use serde_json::{json, Value};

pub fn operating_point(op: &OperatingPoint) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "converged in {} iterations, final mismatch {:.3e} pu",
        op.iterations,
        op.mismatch_trace.last().copied().unwrap_or(0.0)
    );
    let _ =
        writeln!(out, "{:>5} {:>9} {:>10} {:>9} {:>9} {:>9} {:>9}", "bus", "|V|", "phi(rad)", "P", "Q", "i_D", "i_Q");
    for k in 0..op.n_buses() {
        let _ = writeln!(
            out,
            "{:>5} {:>9.5} {:>10.5} {:>9.4} {:>9.4} {:>9.4} {:>9.4}",
            op.bus_ids[k].to_string(),
            op.v_mag[k],
            op.phi[k],
            op.p[k],
            op.q[k],
            op.i_d[k],
            op.i_q[k]
        );
    }
    out
}

fn evaluation(out: &mut String, title: &str, e: &Evaluation) {
    let ok = |b: bool| if b { "pass" } else { "FAIL" };
    let poles = &e.cond1_rhp_poles;
    let _ = writeln!(out, "{title}: {}", if e.pass { "passive" } else { "not passive" });
    let _ = writeln!(
        out,
        "  condition 1 (no RHP poles): {} ({} poles, {} in RHP)",
        ok(poles.cond1_pass),
        poles.n_poles,
        poles.rhp_poles.len()
    );
    let sw = &e.cond2_sweep;
    let _ = writeln!(
        out,
        "  condition 2 (sweep): {} worst lambda_min {:.6e} at omega {:.4e} rad/s ({} points, {} excluded)",
        ok(sw.pass),
        sw.worst.lambda_min,
        sw.worst.omega,
        sw.points.len(),
        sw.excluded.len()
    );
    let _ = writeln!(out, "  condition 3 (axis poles): {}", ok(poles.cond3_pass));
    for p in &poles.axis_poles {
        let _ = write!(out, "    pole {:.4}{:+.4}j x{}", p.pole.re, p.pole.im, p.multiplicity);
        if p.defective {
            let _ = write!(out, " defective");
        }
        if let Some(r) = &p.residue {
            let _ = write!(
                out,
                " residue: hermitian deviation {:.3e}, lambda_min {:.4e}{}",
                r.hermitian_deviation,
                r.lambda_min,
                if r.hermitian { "" } else { " (not Hermitian)" }
            );
        }
        let _ = writeln!(out);
    }
    let f = &e.feedthrough;
    let _ = writeln!(
        out,
        "  feedthrough: {} trace(D+D^T) {:.3e}, lambda_min {:.4e}{}",
        ok(f.pass),
        f.trace,
        f.lambda_min,
        if f.certificate { " (non-passivity certificate)" } else { "" }
    );
    if let Some(ind) = &f.bus_indicator {
        let v: Vec<String> = ind.iter().map(|x| format!("{x:.3}")).collect();
        let _ = writeln!(out, "  per-bus i_D v_Q - i_Q v_D: {}", v.join(" "));
    }
}

pub fn verdict(v: &PassivityVerdict) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "model {} {} ({}), tau {} s", v.model, v.analysis, v.variant.label(), v.tau);
    if v.angle_mode_removed {
        let _ = writeln!(out, "uniform angle-shift mode removed before testing");
    }
    evaluation(&mut out, "unregulated", &v.unregulated);
    if let Some(r) = &v.regulated {
        let regs: Vec<String> = v.regulation.entries.iter().map(|e| format!("{}:{}", e.bus, e.k_qv)).collect();
        evaluation(&mut out, &format!("regulated [{}]", regs.join(",")), r);
    }
    let _ = writeln!(out, "verdict: {} {}", v.overall.symbol(), v.overall);
    out
}

fn rows(m: &DMatrix<f64>) -> Value {
    Value::Array((0..m.nrows()).map(|r| json!(m.row(r).iter().collect::<Vec<_>>())).collect())
}

pub fn state_space_json(ss: &StateSpace) -> Value {
    let states: Vec<Value> = ss
        .state_meta
        .iter()
        .map(|m| {
            let kind = match m.kind {
                StateKind::Inductor => "inductor",
                StateKind::Capacitor => "capacitor",
                StateKind::Integrator => "integrator",
            };
            json!({ "kind": kind, "param": m.param, "label": m.label })
        })
        .collect();
    json!({
        "inputs": ss.inputs.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
        "outputs": ss.outputs.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
        "states": states,
        "a": rows(&ss.a),
        "b": rows(&ss.b),
        "c": rows(&ss.c),
        "d": rows(&ss.d),
    })
}

pub fn jacobian(j: &JacobianLF) -> String {
    let n = j.n_buses();
    let mut out = String::new();
    let labels: Vec<String> =
        ["phi", "Vn"].iter().flat_map(|c| j.bus_ids.iter().map(move |b| format!("{c}@{b}"))).collect();
    let _ = writeln!(out, "row,{}", labels.join(","));
    let full = j.full();
    for r in 0..2 * n {
        let name = if r < n { format!("P@{}", j.bus_ids[r]) } else { format!("Q@{}", j.bus_ids[r - n]) };
        let vals: Vec<String> = full.row(r).iter().map(|x| format!("{x:e}")).collect();
        let _ = writeln!(out, "{name},{}", vals.join(","));
    }
    out
}

pub fn jacobian_json(j: &JacobianLF) -> Value {
    json!({
        "buses": j.bus_ids.iter().map(|b| b.0).collect::<Vec<_>>(),
        "j11": rows(&j.j11),
        "j12": rows(&j.j12),
        "j21": rows(&j.j21),
        "j22": rows(&j.j22),
        "symmetric_part_eigenvalues": j.symmetric_part_eigenvalues(),
    })
}
