use serde::Serialize;

use super::config::ExperimentConfig;
use super::ladder::{metadata, Metadata};
use crate::correction::{correction_field, extrapolated_correction};
use crate::error::Result;
use crate::noise::{sample, NoiseRealization};
use crate::quadrature::composite;
use crate::spectral::{heat_evolve, heat_multiplier, mode, SineBasis, SpectralField};
use crate::strat::{build_dyson_table, strat_solution};
use crate::wick::{build_table, wick_series_term};

/// Agreement required between the three first-order computations.
pub const FIRST_ORDER_TOL: f64 = 1e-8;

fn potential(nr: &NoiseRealization, x: f64) -> f64 {
    nr.xi
        .iter()
        .enumerate()
        .map(|(i, xi)| xi * mode(i + 1, x))
        .sum()
}

/// First-order term computed without the chaos or Dyson machinery:
/// `∫_0^t e^{Δ(t-s)} (V · e^{Δs} φ) ds`, with the product formed pointwise
/// in physical space and the time integral done by Gauss–Legendre.
pub fn first_order_direct(
    phi: &SpectralField,
    nr: &NoiseRealization,
    t: f64,
) -> Result<SpectralField> {
    let k = phi.modes();
    let basis = SineBasis::new(k)?;
    let panels = ((k * k) as f64 * t / 2.0).ceil().max(8.0) as usize;
    let rule = composite(0.0, t, panels, 16);
    let mut acc = vec![0.0; k];
    for (&s, &w) in rule.nodes.iter().zip(&rule.weights) {
        let u = heat_evolve(phi, s)?;
        let proj = basis.project(|x| potential(nr, x) * u.eval(x))?;
        for (j, (a, p)) in acc.iter_mut().zip(proj.coeffs()).enumerate() {
            *a += w * heat_multiplier(j + 1, t - s) * p;
        }
    }
    Ok(SpectralField::new(acc))
}

#[derive(Clone, Debug, Serialize)]
pub struct FirstOrderRow {
    pub seed: u64,
    pub t: f64,
    pub wick_vs_strat: f64,
    pub wick_vs_direct: f64,
    pub strat_vs_direct: f64,
}

impl FirstOrderRow {
    pub fn max_diff(&self) -> f64 {
        self.wick_vs_strat
            .max(self.wick_vs_direct)
            .max(self.strat_vs_direct)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FirstOrderReport {
    pub metadata: Metadata,
    pub tolerance: f64,
    pub rows: Vec<FirstOrderRow>,
}

impl FirstOrderReport {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.max_diff() <= self.tolerance)
    }
}

/// Sup-norm agreement of the first-order Wick term, the first Dyson term
/// and [`first_order_direct`] at every seed and reporting time.
pub fn run_first_order_check(config: &ExperimentConfig) -> Result<FirstOrderReport> {
    config.validate()?;
    let k = config.modes;
    let phi = config.phi.field(k)?;
    let t_grid = config.t_grid();
    let table = build_table(&phi, k, 1, &t_grid, config.steps_per_interval)?;
    let mut rows = Vec::new();
    for &seed in &config.seeds {
        let nr = sample(seed, k)?;
        let dyson = build_dyson_table(&phi, &nr, 1, &t_grid, config.steps_per_interval)?;
        for &t in &config.t_report {
            let wick = wick_series_term(&table, 1, t, &nr)?;
            let strat = dyson.term(1, t)?;
            let direct = first_order_direct(&phi, &nr, t)?;
            rows.push(FirstOrderRow {
                seed,
                t,
                wick_vs_strat: wick.sub(strat).sup_norm(),
                wick_vs_direct: wick.sub(&direct).sup_norm(),
                strat_vs_direct: strat.sub(&direct).sup_norm(),
            });
        }
    }
    Ok(FirstOrderReport {
        metadata: metadata(config),
        tolerance: FIRST_ORDER_TOL,
        rows,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct KConvergenceRow {
    pub seed: u64,
    pub t: f64,
    pub eps: f64,
    pub modes: [usize; 3],
    /// Sup over the x-grid of successive differences.
    pub diffs: [f64; 2],
}

impl KConvergenceRow {
    pub fn decreasing(&self) -> bool {
        self.diffs[1] < self.diffs[0]
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct KConvergenceReport {
    pub metadata: Metadata,
    pub rows: Vec<KConvergenceRow>,
}

/// Stratonovich solutions at `K`, `2K`, `4K` modes, all driven by one
/// realization sampled at `4K` modes, at the largest ε of the ladder.
pub fn run_k_convergence(config: &ExperimentConfig) -> Result<KConvergenceReport> {
    config.validate()?;
    let k = config.modes;
    let modes = [k, 2 * k, 4 * k];
    let eps = config.eps_ladder[0];
    let phis: Vec<SpectralField> = modes
        .iter()
        .map(|&m| config.phi.field(m))
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for &seed in &config.seeds {
        let nr = sample(seed, 4 * k)?;
        let nrs: Vec<NoiseRealization> = modes
            .iter()
            .map(|&m| nr.truncated(m))
            .collect::<Result<_>>()?;
        for &t in &config.t_report {
            let u: Vec<Vec<f64>> = phis
                .iter()
                .zip(&nrs)
                .map(|(phi, nr)| {
                    strat_solution(phi, nr, eps, t).map(|f| f.eval_many(&config.x_grid))
                })
                .collect::<Result<_>>()?;
            let sup = |a: &[f64], b: &[f64]| {
                a.iter()
                    .zip(b)
                    .fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()))
            };
            rows.push(KConvergenceRow {
                seed,
                t,
                eps,
                modes,
                diffs: [sup(&u[1], &u[0]), sup(&u[2], &u[1])],
            });
        }
    }
    Ok(KConvergenceReport {
        metadata: metadata(config),
        rows,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct CorrectionReport {
    pub metadata: Metadata,
    pub t: f64,
    pub k_basis: usize,
    pub k_diag: usize,
    pub x: Vec<f64>,
    pub value: Vec<f64>,
    /// Values at `K_diag = K`, the limit of the truncated solvers.
    pub truncated_limit: Vec<f64>,
    pub extrapolated: Vec<f64>,
    pub contraction: f64,
}

/// Correction field at `t = T` on the x-grid.
pub fn run_correction(config: &ExperimentConfig) -> Result<CorrectionReport> {
    config.validate()?;
    let k = config.modes;
    let t = config.horizon;
    let phi = config.phi.field(k)?;
    let value = correction_field(&phi, t, k, config.diag_modes)?;
    let limit = correction_field(&phi, t, k, k)?;
    let extra = extrapolated_correction(&phi, t, k, config.diag_modes)?;
    Ok(CorrectionReport {
        metadata: metadata(config),
        t,
        k_basis: k,
        k_diag: config.diag_modes,
        x: config.x_grid.clone(),
        value: value.eval_many(&config.x_grid),
        truncated_limit: limit.eval_many(&config.x_grid),
        extrapolated: extra.field.eval_many(&config.x_grid),
        contraction: extra.contraction,
    })
}
