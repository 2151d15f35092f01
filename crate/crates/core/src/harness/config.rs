use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::spectral::{SineBasis, SpectralField};

/// Named initial conditions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhiName {
    /// `sin x`, the first eigenfunction.
    Sin,
    /// Smooth bump supported on `[π/4, 3π/4]`.
    Bump,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PhiSpec {
    Named(PhiName),
    Coeffs { coeffs: Vec<f64> },
}

pub fn bump(x: f64) -> f64 {
    let s = (x - PI / 2.0) / (PI / 4.0);
    if s.abs() < 1.0 {
        (1.0 - 1.0 / (1.0 - s * s)).exp()
    } else {
        0.0
    }
}

impl PhiSpec {
    /// Coefficients on the first `modes` modes.
    pub fn field(&self, modes: usize) -> Result<SpectralField> {
        match self {
            PhiSpec::Named(name) => {
                // Extra nodes so that the bump's projection is converged.
                let basis = SineBasis::with_quadrature_points(modes, 16 * modes + 256)?;
                match name {
                    PhiName::Sin => basis.project(f64::sin),
                    PhiName::Bump => basis.project(bump),
                }
            }
            PhiSpec::Coeffs { coeffs } => Ok(SpectralField::new(coeffs.clone()).resized(modes)),
        }
    }

    /// Parse `sin`, `bump` or `coeffs:a,b,c`.
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "sin" => Ok(PhiSpec::Named(PhiName::Sin)),
            "bump" => Ok(PhiSpec::Named(PhiName::Bump)),
            _ => {
                let list = s
                    .strip_prefix("coeffs:")
                    .ok_or_else(|| Error::Config(format!("unknown phi '{s}'")))?;
                Ok(PhiSpec::Coeffs {
                    coeffs: parse_list(list)?,
                })
            }
        }
    }
}

pub fn parse_list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(|v| {
            v.parse()
                .map_err(|_| Error::Config(format!("cannot parse '{v}'")))
        })
        .collect()
}

/// Everything an experiment run depends on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(rename = "K")]
    pub modes: usize,
    #[serde(rename = "K_diag")]
    pub diag_modes: usize,
    #[serde(rename = "N")]
    pub chaos_order: usize,
    #[serde(rename = "T")]
    pub horizon: f64,
    pub t_report: Vec<f64>,
    pub x_grid: Vec<f64>,
    pub eps_ladder: Vec<f64>,
    pub seeds: Vec<u64>,
    pub phi: PhiSpec,
    pub steps_per_interval: usize,
    pub gamma: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            modes: 8,
            diag_modes: 32,
            chaos_order: 4,
            horizon: 0.5,
            t_report: vec![0.5],
            x_grid: (1..=9).map(|i| PI * i as f64 / 10.0).collect(),
            eps_ladder: vec![0.2, 0.1, 0.05, 0.025],
            seeds: (1..=5).collect(),
            phi: PhiSpec::Named(PhiName::Sin),
            steps_per_interval: 64,
            gamma: 0.6,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::Config(m.to_string()));
        if self.modes == 0 || self.diag_modes == 0 {
            return fail("K and K_diag must be at least 1");
        }
        if self.chaos_order < 2 {
            return fail("N must be at least 2");
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return fail("T must be positive");
        }
        if self.t_report.is_empty() {
            return fail("t_report must not be empty");
        }
        if self
            .t_report
            .iter()
            .any(|&t| !(t > 0.0 && t <= self.horizon))
        {
            return fail("t_report entries must lie in (0, T]");
        }
        if self.t_report.windows(2).any(|w| !(w[1] > w[0])) {
            return fail("t_report must be strictly increasing");
        }
        if self.x_grid.is_empty() || self.x_grid.iter().any(|x| !(0.0..=PI).contains(x)) {
            return fail("x_grid must be a non-empty subset of [0, pi]");
        }
        if self.eps_ladder.is_empty()
            || self.eps_ladder.iter().any(|e| !(*e > 0.0 && e.is_finite()))
        {
            return fail("eps_ladder entries must be positive");
        }
        if self.eps_ladder.windows(2).any(|w| !(w[1] < w[0])) {
            return fail("eps_ladder must be strictly decreasing");
        }
        if self.seeds.is_empty() {
            return fail("seeds must not be empty");
        }
        if self.steps_per_interval == 0 {
            return fail("steps_per_interval must be at least 1");
        }
        if !(self.gamma > 0.5 && self.gamma < 1.0) {
            return fail("gamma must lie in (1/2, 1)");
        }
        if let PhiSpec::Coeffs { coeffs } = &self.phi {
            if coeffs.iter().any(|c| !c.is_finite()) {
                return fail("phi coefficients must be finite");
            }
        }
        Ok(())
    }

    /// Reporting grid `{0} ∪ t_report`.
    pub fn t_grid(&self) -> Vec<f64> {
        std::iter::once(0.0)
            .chain(self.t_report.iter().copied())
            .collect()
    }

    /// SHA-256 of the canonical JSON form, hex encoded.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        Sha256::digest(json.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}
