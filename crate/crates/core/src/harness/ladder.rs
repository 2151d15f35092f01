use rayon::prelude::*;
use serde::Serialize;

use super::config::ExperimentConfig;
use crate::correction::correction_field;
use crate::error::Result;
use crate::noise::{sample, NoiseRealization};
use crate::spectral::SpectralField;
use crate::strat::GalerkinSystem;
use crate::wick::{build_table, wick_solution, PropagatorTable};

/// Gaps below this multiple of the noise floor are left out of slope fits.
pub const FLOOR_FACTOR: f64 = 100.0;

#[derive(Clone, Debug, Serialize)]
pub struct LadderRow {
    pub seed: u64,
    pub t: f64,
    pub x: f64,
    pub eps: f64,
    pub u_wick: f64,
    pub u_strat: f64,
    pub gap: f64,
    pub scaled_gap: f64,
    pub correction_ref: f64,
    pub noise_floor: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SlopeFit {
    pub seed: u64,
    pub t: f64,
    pub x: f64,
    /// `None` when fewer than two gaps clear the floor.
    pub slope: Option<f64>,
    pub points: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct Spread {
    pub t: f64,
    pub eps: f64,
    /// `max_x (max_seed - min_seed)` of the scaled gap.
    pub spread: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Deviation {
    pub seed: u64,
    pub t: f64,
    pub eps: f64,
    /// `max_x |scaled_gap - correction_ref| / max_x |correction_ref|`.
    pub rel_sup_error: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Metadata {
    pub crate_version: &'static str,
    pub config_hash: String,
    pub seeds: Vec<u64>,
    pub config: ExperimentConfig,
}

#[derive(Clone, Debug, Serialize)]
pub struct LadderReport {
    pub metadata: Metadata,
    pub rows: Vec<LadderRow>,
    pub slopes: Vec<SlopeFit>,
    pub spreads: Vec<Spread>,
    pub deviations: Vec<Deviation>,
}

impl LadderReport {
    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| r.failure.is_some()).count()
    }
}

pub fn metadata(config: &ExperimentConfig) -> Metadata {
    Metadata {
        crate_version: env!("CARGO_PKG_VERSION"),
        config_hash: config.hash(),
        seeds: config.seeds.clone(),
        config: config.clone(),
    }
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = points.iter().map(|&(x, y)| (x.ln(), y.ln())).unzip();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

fn solve_cell(
    system: &GalerkinSystem,
    table: &PropagatorTable,
    phi: &SpectralField,
    nr: &NoiseRealization,
    eps: f64,
    t: f64,
) -> Result<(SpectralField, SpectralField)> {
    let strat = system.flow(eps)?.evolve(phi, t)?;
    let wick = wick_solution(table, eps, t, nr)?.field;
    Ok((wick, strat))
}

struct SeedRun {
    cells: Vec<Vec<Result<(SpectralField, SpectralField)>>>,
    floor: f64,
}

fn run_seed(
    config: &ExperimentConfig,
    phi: &SpectralField,
    table: &PropagatorTable,
    fine: &PropagatorTable,
    seed: u64,
) -> Result<SeedRun> {
    let nr = sample(seed, config.modes)?;
    let system = GalerkinSystem::new(config.modes, &nr)?;
    let cells: Vec<Vec<_>> = config
        .t_report
        .iter()
        .map(|&t| {
            config
                .eps_ladder
                .iter()
                .map(|&eps| solve_cell(&system, table, phi, &nr, eps, t))
                .collect()
        })
        .collect();

    // Doubling the refinement at the largest ε measures the discretization
    // noise in the gap; rounding of the solution sets a lower bound.
    let eps0 = config.eps_ladder[0];
    let mut floor: f64 = 0.0;
    for (ti, &t) in config.t_report.iter().enumerate() {
        if let Ok((wick, strat)) = &cells[ti][0] {
            let fine_wick = wick_solution(fine, eps0, t, &nr)?.field;
            let delta = fine_wick.sub(wick);
            floor = floor
                .max(delta.sup_norm_on(&config.x_grid))
                .max(4.0 * f64::EPSILON * strat.sup_norm_on(&config.x_grid));
        }
    }
    Ok(SeedRun { cells, floor })
}

/// ε-ladder of Wick and Stratonovich solutions over every seed, time and
/// grid point. Numerical failures are recorded per cell.
pub fn run_ladder(config: &ExperimentConfig) -> Result<LadderReport> {
    config.validate()?;
    let k = config.modes;
    let phi = config.phi.field(k)?;
    let t_grid = config.t_grid();
    let table = build_table(
        &phi,
        k,
        config.chaos_order,
        &t_grid,
        config.steps_per_interval,
    )?;
    let fine = build_table(
        &phi,
        k,
        config.chaos_order,
        &t_grid,
        2 * config.steps_per_interval,
    )?;
    let refs: Vec<Vec<f64>> = config
        .t_report
        .iter()
        .map(|&t| correction_field(&phi, t, k, k).map(|c| c.eval_many(&config.x_grid)))
        .collect::<Result<_>>()?;

    let runs: Vec<Result<SeedRun>> = config
        .seeds
        .par_iter()
        .map(|&seed| run_seed(config, &phi, &table, &fine, seed))
        .collect();

    let mut rows = Vec::new();
    let mut slopes = Vec::new();
    let mut deviations = Vec::new();
    for (&seed, run) in config.seeds.iter().zip(runs) {
        let run = run?;
        for (ti, &t) in config.t_report.iter().enumerate() {
            let ref_sup = refs[ti].iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            let mut fit_points = vec![Vec::new(); config.x_grid.len()];
            for (ei, &eps) in config.eps_ladder.iter().enumerate() {
                let cell = &run.cells[ti][ei];
                let mut dev: f64 = 0.0;
                for (xi, &x) in config.x_grid.iter().enumerate() {
                    let correction_ref = refs[ti][xi];
                    let row = match cell {
                        Ok((wick, strat)) => {
                            let (u_wick, u_strat) = (wick.eval(x), strat.eval(x));
                            let gap = u_strat - u_wick;
                            let scaled_gap = gap / (eps * eps);
                            if gap.abs() > FLOOR_FACTOR * run.floor {
                                fit_points[xi].push((eps, gap.abs()));
                            }
                            dev = dev.max((scaled_gap - correction_ref).abs());
                            LadderRow {
                                seed,
                                t,
                                x,
                                eps,
                                u_wick,
                                u_strat,
                                gap,
                                scaled_gap,
                                correction_ref,
                                noise_floor: run.floor,
                                failure: None,
                            }
                        }
                        Err(e) => {
                            dev = f64::NAN;
                            LadderRow {
                                seed,
                                t,
                                x,
                                eps,
                                u_wick: f64::NAN,
                                u_strat: f64::NAN,
                                gap: f64::NAN,
                                scaled_gap: f64::NAN,
                                correction_ref,
                                noise_floor: run.floor,
                                failure: Some(e.to_string()),
                            }
                        }
                    };
                    rows.push(row);
                }
                deviations.push(Deviation {
                    seed,
                    t,
                    eps,
                    rel_sup_error: dev / ref_sup,
                });
            }
            for (xi, &x) in config.x_grid.iter().enumerate() {
                slopes.push(SlopeFit {
                    seed,
                    t,
                    x,
                    slope: loglog_slope(&fit_points[xi]),
                    points: fit_points[xi].len(),
                });
            }
        }
    }

    let mut spreads = Vec::new();
    for &t in &config.t_report {
        for &eps in &config.eps_ladder {
            let mut spread: f64 = 0.0;
            for &x in &config.x_grid {
                let vals = rows
                    .iter()
                    .filter(|r| r.t == t && r.eps == eps && r.x == x)
                    .map(|r| r.scaled_gap);
                let (lo, hi) = vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                    (lo.min(v), hi.max(v))
                });
                spread = spread.max(hi - lo);
            }
            spreads.push(Spread { t, eps, spread });
        }
    }

    Ok(LadderReport {
        metadata: metadata(config),
        rows,
        slopes,
        spreads,
        deviations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_power_law() {
        let pts: Vec<_> = [0.2, 0.1, 0.05]
            .iter()
            .map(|&e: &f64| (e, 3.0 * e.powi(2)))
            .collect();
        assert!((loglog_slope(&pts).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(loglog_slope(&pts[..1]), None);
    }

    #[test]
    fn small_ladder_runs() {
        let config = ExperimentConfig {
            modes: 3,
            chaos_order: 3,
            seeds: vec![1, 2],
            eps_ladder: vec![0.1, 0.05],
            x_grid: vec![1.0, 2.0],
            steps_per_interval: 16,
            ..Default::default()
        };
        let r = run_ladder(&config).unwrap();
        assert_eq!(r.rows.len(), 2 * 2 * 2);
        assert_eq!(r.slopes.len(), 4);
        assert_eq!(r.spreads.len(), 2);
        assert_eq!(r.failures(), 0);
    }
}
