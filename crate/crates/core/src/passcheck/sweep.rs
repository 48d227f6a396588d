use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{FrequencyResponse, Tolerances};
use crate::error::{Error, Result};
use crate::par::{self, Execution};
use crate::spectral;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    /// rad/s
    pub omega_min: f64,
    pub omega_max: f64,
    pub points_per_decade: usize,
    /// Grid points closer than this to an imaginary-axis pole are skipped.
    pub exclusion_radius: f64,
}

impl Default for SweepGrid {
    fn default() -> Self {
        SweepGrid { omega_min: 1e-2, omega_max: 1e5, points_per_decade: 20, exclusion_radius: 1e-6 }
    }
}

impl SweepGrid {
    pub fn new(omega_min: f64, omega_max: f64, points_per_decade: usize) -> Result<Self> {
        let g = SweepGrid { omega_min, omega_max, points_per_decade, ..Default::default() };
        g.validate()?;
        Ok(g)
    }

    /// Parses `min:max:ppd`.
    pub fn parse(text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::Config(format!("sweep `{text}` is not min:max:ppd")));
        }
        let num = |s: &str| s.trim().parse::<f64>().map_err(|e| Error::Config(format!("sweep `{text}`: {e}")));
        let ppd = parts[2].trim().parse::<usize>().map_err(|e| Error::Config(format!("sweep `{text}`: {e}")))?;
        Self::new(num(parts[0])?, num(parts[1])?, ppd)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega_min > 0.0 && self.omega_max >= self.omega_min && self.omega_max.is_finite()) {
            return Err(Error::Config(format!(
                "sweep range {}..{} invalid (need 0 < min <= max)",
                self.omega_min, self.omega_max
            )));
        }
        if self.points_per_decade < 1 {
            return Err(Error::Config("sweep needs at least one point per decade".into()));
        }
        if !(self.exclusion_radius >= 0.0) {
            return Err(Error::Config("exclusion radius must be >= 0".into()));
        }
        Ok(())
    }

    /// Log-spaced frequencies including both ends.
    pub fn points(&self) -> Vec<f64> {
        let decades = (self.omega_max / self.omega_min).log10();
        let n = (decades * self.points_per_decade as f64).round() as usize;
        if n == 0 {
            return vec![self.omega_min];
        }
        let (lo, hi) = (self.omega_min.log10(), self.omega_max.log10());
        (0..=n).map(|k| 10f64.powf(lo + (hi - lo) * k as f64 / n as f64)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub omega: f64,
    pub lambda_min: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub grid: SweepGrid,
    pub points: Vec<SweepPoint>,
    /// Grid frequencies dropped for lying next to an imaginary-axis pole.
    pub excluded: Vec<f64>,
    pub worst: SweepPoint,
    pub pass: bool,
}

impl SweepReport {
    /// `omega,lambda_min` rows with a header.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("omega,lambda_min\n");
        for p in &self.points {
            s.push_str(&format!("{:e},{:e}\n", p.omega, p.lambda_min));
        }
        s
    }
}

/// Minimum eigenvalue of `G(jw) + G(jw)^H` at one frequency.
pub fn hermitian_part_min<M: FrequencyResponse + ?Sized>(model: &M, omega: f64) -> Result<f64> {
    let g = model.response(Complex64::new(0.0, omega))?;
    Ok(spectral::hermitian_min_eigenvalue(&spectral::hermitian_part2(&g)))
}

/// Condition 2 over the grid. Grid points are evaluated concurrently under
/// `Execution::Parallel`.
pub fn sweep_psd<M: FrequencyResponse>(
    model: &M,
    grid: &SweepGrid,
    tol: &Tolerances,
    exec: Execution,
) -> Result<SweepReport> {
    grid.validate()?;
    let axis = model.axis_pole_frequencies();
    let (keep, excluded): (Vec<f64>, Vec<f64>) =
        grid.points().into_iter().partition(|w| axis.iter().all(|p| (w - p).abs() > grid.exclusion_radius));

    let results = par::map(exec, &keep, |&omega| {
        hermitian_part_min(model, omega).map(|lambda_min| SweepPoint { omega, lambda_min }).map_err(|e| match e {
            Error::AtPole { pole, .. } => Error::SweepSingularity { omega, pole },
            other => other,
        })
    });
    let points = results.into_iter().collect::<Result<Vec<_>>>()?;
    let worst = points
        .iter()
        .copied()
        .min_by(|a, b| a.lambda_min.total_cmp(&b.lambda_min))
        .ok_or_else(|| Error::Config("sweep grid is empty after pole exclusion".into()))?;
    Ok(SweepReport { grid: *grid, pass: worst.lambda_min >= -tol.psd, points, excluded, worst })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::passcheck::StaticGain;
    use nalgebra::DMatrix;

    #[test]
    fn default_grid() {
        let pts = SweepGrid::default().points();
        assert_eq!(pts.len(), 141);
        assert!((pts[0] - 1e-2).abs() < 1e-15);
        assert!((pts[140] - 1e5).abs() < 1e-6);
    }

    #[test]
    fn parse_grid() {
        let g = SweepGrid::parse("0.1:1000:10").unwrap();
        assert_eq!(g.points().len(), 41);
        assert!(SweepGrid::parse("0:10:5").is_err());
        assert!(SweepGrid::parse("1:10").is_err());
        assert!(SweepGrid::parse("1:10:0").is_err());
    }

    #[test]
    fn constant_conductance() {
        let g = DMatrix::from_row_slice(2, 2, &[3.0, -1.0, -1.0, 3.0]);
        let rep =
            sweep_psd(&StaticGain(g), &SweepGrid::default(), &Tolerances::default(), Execution::Sequential).unwrap();
        assert!(rep.pass);
        assert!(rep.points.iter().all(|p| (p.lambda_min - 4.0).abs() < 1e-12));
        assert!(rep.to_csv().starts_with("omega,lambda_min\n1e-2,"));
    }
}
