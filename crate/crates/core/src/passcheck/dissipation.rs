//! Time-domain check of `integral(u^T y) >= S(x(t)) - S(x(0))` with the
//! physical stored energy as storage function.

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dqstamp::storage_energy;
use crate::error::{Error, Result};
use crate::statespace::StateSpace;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tone {
    pub channel: usize,
    pub amplitude: f64,
    /// rad/s
    pub omega: f64,
    pub phase: f64,
}

/// Sum of sinusoids, each driving one input channel.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Multisine {
    pub tones: Vec<Tone>,
}

impl Multisine {
    pub fn zero() -> Self {
        Multisine::default()
    }

    fn fill(&self, t: f64, u: &mut DVector<f64>) {
        u.fill(0.0);
        for tone in &self.tones {
            u[tone.channel] += tone.amplitude * (tone.omega * t + tone.phase).sin();
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DissipationOptions {
    /// Simulated time, s.
    pub horizon: f64,
    /// Fixed step; `None` picks `1 / spectral_radius(A)`, capped at `horizon/100`.
    pub step: Option<f64>,
    pub x0: Option<Vec<f64>>,
    /// Allowed negative margin.
    pub epsilon: f64,
}

impl Default for DissipationOptions {
    fn default() -> Self {
        DissipationOptions { horizon: 0.5, step: None, x0: None, epsilon: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DissipationReport {
    pub step: f64,
    pub steps: usize,
    /// `min_t [ integral(u^T y) - (S(x(t)) - S(x(0))) ]`.
    pub min_margin: f64,
    pub t_at_min: f64,
    pub supplied: f64,
    pub storage_change: f64,
    /// Largest one-step increase of the stored energy (zero-input runs
    /// should keep this at roundoff).
    pub max_storage_increase: f64,
    pub pass: bool,
}

/// RK4 stability function.
fn rk4_gain(z: Complex64) -> f64 {
    let one = Complex64::new(1.0, 0.0);
    (one + z + z * z / 2.0 + z * z * z / 6.0 + z * z * z * z / 24.0).norm()
}

pub fn simulate_dissipation(
    ss: &StateSpace,
    input: &Multisine,
    opts: &DissipationOptions,
) -> Result<DissipationReport> {
    let nx = ss.n_states();
    let nu = ss.n_inputs();
    if ss.n_outputs() != nu {
        return Err(Error::Dimension("dissipation needs a square model".into()));
    }
    if let Some(t) = input.tones.iter().find(|t| t.channel >= nu) {
        return Err(Error::Dimension(format!("tone on channel {} of {nu}", t.channel)));
    }
    if !(opts.horizon > 0.0) {
        return Err(Error::Parameter("horizon must be positive".into()));
    }
    let rho = ss.poles().iter().map(|p| p.norm()).fold(0.0, f64::max);
    let h = match opts.step {
        Some(h) if h > 0.0 => h,
        Some(h) => return Err(Error::Parameter(format!("step must be positive, got {h}"))),
        None if rho > 0.0 => (1.0 / rho).min(opts.horizon / 100.0),
        None => opts.horizon / 100.0,
    };
    if let Some(p) = ss.poles().iter().find(|p| p.re <= 0.0 && rk4_gain(*p * h) > 1.0 + 1e-12) {
        return Err(Error::Integrator(format!(
            "step {h:e} s is outside the RK4 stability region for pole {p}; use a step below {:e} s",
            1.0 / p.norm()
        )));
    }

    let mut x = match &opts.x0 {
        Some(x0) if x0.len() == nx => DVector::from_column_slice(x0),
        Some(x0) => return Err(Error::Dimension(format!("x0 has {} entries for {nx} states", x0.len()))),
        None => DVector::zeros(nx),
    };
    let s0 = storage_energy(x.as_slice(), &ss.state_meta)?;
    let steps = (opts.horizon / h).ceil() as usize;

    let mut u = DVector::zeros(nu);
    // augmented derivative: (A x + B u, u^T (C x + D u))
    let deriv = |t: f64, x: &DVector<f64>, u: &mut DVector<f64>| {
        input.fill(t, u);
        let dx = &ss.a * x + &ss.b * &*u;
        let y = &ss.c * x + &ss.d * &*u;
        (dx, u.dot(&y))
    };

    let mut w = 0.0;
    let mut t = 0.0;
    let mut prev_s = s0;
    let (mut min_margin, mut t_at_min) = (0.0f64, 0.0);
    let mut max_increase = 0.0f64;
    for _ in 0..steps {
        let (k1, p1) = deriv(t, &x, &mut u);
        let (k2, p2) = deriv(t + h / 2.0, &(&x + &k1 * (h / 2.0)), &mut u);
        let (k3, p3) = deriv(t + h / 2.0, &(&x + &k2 * (h / 2.0)), &mut u);
        let (k4, p4) = deriv(t + h, &(&x + &k3 * h), &mut u);
        x += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        w += (p1 + 2.0 * p2 + 2.0 * p3 + p4) * (h / 6.0);
        t += h;

        let s = storage_energy(x.as_slice(), &ss.state_meta)?;
        if !(s.is_finite() && w.is_finite()) {
            return Err(Error::Integrator(format!("state blew up at t = {t:e} s; reduce the step below {h:e} s")));
        }
        max_increase = max_increase.max(s - prev_s);
        prev_s = s;
        let margin = w - (s - s0);
        if margin < min_margin {
            min_margin = margin;
            t_at_min = t;
        }
    }
    Ok(DissipationReport {
        step: h,
        steps,
        min_margin,
        t_at_min,
        supplied: w,
        storage_change: prev_s - s0,
        max_storage_increase: max_increase,
        pass: min_margin >= -opts.epsilon,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dqstamp::{assemble_ydq, ParasiticConfig};
    use crate::netcase::parse_case;

    fn rl_case(r: f64) -> crate::netcase::NetworkCase {
        parse_case(&format!(
            "[system]\nbase_mva = 100.0\nomega0 = 376.99111843077515\n\
             [[buses]]\nid = 1\n[[buses]]\nid = 2\n\
             [[branches]]\nfrom = 1\nto = 2\nr = {r}\nx = 0.1\n\
             [[injections]]\nbus = 1\nkind = \"slack\"\nv_set = 1.0\n"
        ))
        .unwrap()
    }

    #[test]
    fn zero_input_energy_decays() {
        let ss = assemble_ydq(&rl_case(0.05), &ParasiticConfig::default()).unwrap();
        let opts = DissipationOptions { x0: Some(vec![1.0, -0.5]), horizon: 0.05, ..Default::default() };
        let rep = simulate_dissipation(&ss, &Multisine::zero(), &opts).unwrap();
        assert!(rep.max_storage_increase <= 1e-15);
        assert!(rep.storage_change < 0.0);
        assert!(rep.pass);
    }

    #[test]
    fn sinusoid_satisfies_inequality() {
        let ss = assemble_ydq(&rl_case(0.05), &ParasiticConfig::default()).unwrap();
        let input = Multisine { tones: vec![Tone { channel: 0, amplitude: 1.0, omega: 50.0, phase: 0.3 }] };
        let rep =
            simulate_dissipation(&ss, &input, &DissipationOptions { horizon: 0.1, ..Default::default() }).unwrap();
        assert!(rep.pass, "{rep:?}");
        assert!(rep.supplied > 0.0);
    }

    #[test]
    fn oversized_step_rejected() {
        let ss = assemble_ydq(&rl_case(0.05), &ParasiticConfig::default()).unwrap();
        let opts = DissipationOptions { step: Some(0.1), ..Default::default() };
        assert!(matches!(simulate_dissipation(&ss, &Multisine::zero(), &opts), Err(Error::Integrator(_))));
    }
}
