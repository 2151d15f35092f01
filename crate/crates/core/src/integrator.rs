//! Exponential integrator for lower-triangular linear hierarchies
//!
//! ```text
//! dy_e/dt = -D y_e + Σ_{(k, w, p) ∈ links(e)} w · C_k y_p,   y_e(0) = 0,
//! ```
//!
//! where `D = diag(j²)`, each `y_p` lives one level below `y_e`, and level 0
//! is the heat flow of the initial data. Over a step of length `h` the decay
//! is applied exactly and the source is replaced by its cubic Hermite
//! interpolant; the source derivative comes from the parents' own equations,
//! so the scheme needs no extra evaluations and is fourth-order accurate.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reporting times plus a uniform refinement of each interval.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    points: Vec<f64>,
    steps_per_interval: usize,
}

impl TimeGrid {
    pub fn new(points: Vec<f64>, steps_per_interval: usize) -> Result<Self> {
        if points.first() != Some(&0.0) {
            return Err(Error::Config("time grid must start at 0".into()));
        }
        if points.windows(2).any(|w| !(w[1] > w[0])) || points.iter().any(|t| !t.is_finite()) {
            return Err(Error::Config(
                "time grid must be strictly increasing".into(),
            ));
        }
        if steps_per_interval == 0 {
            return Err(Error::Config(
                "steps_per_interval must be at least 1".into(),
            ));
        }
        Ok(Self {
            points,
            steps_per_interval,
        })
    }

    /// `[0, t]` split into `steps` steps.
    pub fn single(t: f64, steps: usize) -> Result<Self> {
        if t == 0.0 {
            return Self::new(vec![0.0], steps.max(1));
        }
        Self::new(vec![0.0, t], steps)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn steps_per_interval(&self) -> usize {
        self.steps_per_interval
    }

    /// Position of `t` among the reporting times; no interpolation.
    pub fn index_of(&self, t: f64) -> Result<usize> {
        self.points
            .iter()
            .position(|&p| (p - t).abs() <= 1e-12 * p.abs().max(1.0))
            .ok_or(Error::OffGrid { t })
    }
}

/// Coefficients of one exponential step for a single mode:
/// `y1 = decay·y0 + w[0]·s0 + w[1]·s0' + w[2]·s1 + w[3]·s1'`.
#[derive(Clone, Copy, Debug)]
pub struct StepWeights {
    pub decay: f64,
    pub w: [f64; 4],
}

/// `μ_m(z) = ∫_0^1 e^{-z(1-σ)} σ^m dσ` for `m = 0..=3`.
fn moments(z: f64) -> [f64; 4] {
    let mut mu = [0.0; 4];
    if z < 2.0 {
        // μ_m = m! Σ_n (-z)^n / (m+n+1)!
        let mut fact_m = 1.0;
        for (m, slot) in mu.iter_mut().enumerate() {
            if m > 0 {
                fact_m *= m as f64;
            }
            let mut term = 1.0 / (1..=m + 1).map(|i| i as f64).product::<f64>();
            let mut sum = term;
            for n in 0..60 {
                term *= -z / (m + n + 2) as f64;
                sum += term;
                if term.abs() < 1e-18 * sum.abs() {
                    break;
                }
            }
            *slot = fact_m * sum;
        }
    } else {
        mu[0] = -(-z).exp_m1() / z;
        for m in 1..4 {
            mu[m] = (1.0 - m as f64 * mu[m - 1]) / z;
        }
    }
    mu
}

pub fn step_weights(rate: f64, h: f64) -> StepWeights {
    let mu = moments(rate * h);
    StepWeights {
        decay: (-rate * h).exp(),
        w: [
            h * (mu[0] - 3.0 * mu[2] + 2.0 * mu[3]),
            h * h * (mu[1] - 2.0 * mu[2] + mu[3]),
            h * (3.0 * mu[2] - 2.0 * mu[3]),
            h * h * (mu[3] - mu[2]),
        ],
    }
}

/// Source term of an entry: `Σ weight · C_coupling · y_parent`.
#[derive(Clone, Copy, Debug)]
pub struct Link {
    pub coupling: usize,
    pub weight: f64,
    pub parent: usize,
}

/// Structure of a hierarchy: `levels[n][e]` lists the links of entry `e` at
/// level `n ≥ 1` into level `n - 1`. Level 0 has exactly one entry.
pub struct Hierarchy<'a> {
    pub rates: Vec<f64>,
    /// Row-major `K×K` coupling matrices.
    pub couplings: &'a [&'a [f64]],
    pub levels: Vec<Vec<Vec<Link>>>,
}

#[derive(Clone)]
struct EntryState {
    u: Vec<f64>,
    du: Vec<f64>,
    s: Vec<f64>,
    ds: Vec<f64>,
}

fn matvec_add(m: &[f64], w: f64, x: &[f64], out: &mut [f64]) {
    let n = x.len();
    for (j, o) in out.iter_mut().enumerate() {
        let row = &m[j * n..(j + 1) * n];
        let mut acc = 0.0;
        for (a, b) in row.iter().zip(x) {
            acc += a * b;
        }
        *o += w * acc;
    }
}

const PAR_THRESHOLD: usize = 32;

impl Hierarchy<'_> {
    fn modes(&self) -> usize {
        self.rates.len()
    }

    fn sources(&self, links: &[Link], parents: &[EntryState], s: &mut [f64], ds: &mut [f64]) {
        s.iter_mut().for_each(|v| *v = 0.0);
        ds.iter_mut().for_each(|v| *v = 0.0);
        for l in links {
            let p = &parents[l.parent];
            let c = self.couplings[l.coupling];
            matvec_add(c, l.weight, &p.u, s);
            matvec_add(c, l.weight, &p.du, ds);
        }
    }

    /// Integrate from `u0` at t = 0 and return `out[level][entry][time]`
    /// at every reporting time of `grid`.
    pub fn run(&self, u0: &[f64], grid: &TimeGrid) -> Vec<Vec<Vec<Vec<f64>>>> {
        let k = self.modes();
        assert_eq!(u0.len(), k);
        let zero = vec![0.0; k];
        let mut states: Vec<Vec<EntryState>> = Vec::with_capacity(self.levels.len() + 1);
        states.push(vec![EntryState {
            u: u0.to_vec(),
            du: u0.iter().zip(&self.rates).map(|(u, r)| -r * u).collect(),
            s: zero.clone(),
            ds: zero.clone(),
        }]);
        for links in &self.levels {
            let parents = states.last().expect("level 0 present");
            let level: Vec<EntryState> = links
                .iter()
                .map(|l| {
                    let mut s = zero.clone();
                    let mut ds = zero.clone();
                    self.sources(l, parents, &mut s, &mut ds);
                    EntryState {
                        u: zero.clone(),
                        du: s.clone(),
                        s,
                        ds,
                    }
                })
                .collect();
            states.push(level);
        }

        let snapshot = |states: &Vec<Vec<EntryState>>, out: &mut Vec<Vec<Vec<Vec<f64>>>>| {
            for (lvl, entries) in states.iter().enumerate() {
                for (e, st) in entries.iter().enumerate() {
                    out[lvl][e].push(st.u.clone());
                }
            }
        };
        let mut out: Vec<Vec<Vec<Vec<f64>>>> = states
            .iter()
            .map(|l| vec![Vec::with_capacity(grid.points().len()); l.len()])
            .collect();
        snapshot(&states, &mut out);

        let points = grid.points();
        for iv in 0..points.len().saturating_sub(1) {
            let (t0, t1) = (points[iv], points[iv + 1]);
            let steps = grid.steps_per_interval();
            let h = (t1 - t0) / steps as f64;
            let weights: Vec<StepWeights> =
                self.rates.iter().map(|&r| step_weights(r, h)).collect();
            for step in 0..steps {
                let t_new = if step + 1 == steps {
                    t1
                } else {
                    t0 + (step + 1) as f64 * h
                };
                // Level 0 is the exact heat flow.
                {
                    let st = &mut states[0][0];
                    for (j, (&a, &r)) in u0.iter().zip(&self.rates).enumerate() {
                        st.u[j] = a * (-r * t_new).exp();
                        st.du[j] = -r * st.u[j];
                    }
                }
                for lvl in 1..states.len() {
                    let (lower, upper) = states.split_at_mut(lvl);
                    let parents = &lower[lvl - 1];
                    let links = &self.levels[lvl - 1];
                    let advance = |(st, l): (&mut EntryState, &Vec<Link>)| {
                        let mut s_new = vec![0.0; k];
                        let mut ds_new = vec![0.0; k];
                        self.sources(l, parents, &mut s_new, &mut ds_new);
                        for j in 0..k {
                            let w = &weights[j];
                            st.u[j] = w.decay * st.u[j]
                                + w.w[0] * st.s[j]
                                + w.w[1] * st.ds[j]
                                + w.w[2] * s_new[j]
                                + w.w[3] * ds_new[j];
                            st.du[j] = -self.rates[j] * st.u[j] + s_new[j];
                        }
                        st.s = s_new;
                        st.ds = ds_new;
                    };
                    if upper[0].len() >= PAR_THRESHOLD {
                        upper[0]
                            .par_iter_mut()
                            .zip(links.par_iter())
                            .for_each(advance);
                    } else {
                        upper[0].iter_mut().zip(links.iter()).for_each(advance);
                    }
                }
            }
            snapshot(&states, &mut out);
        }
        out
    }
}

/// Rates `j²` for modes `1..=K`.
pub fn heat_rates(modes: usize) -> Vec<f64> {
    (1..=modes).map(|j| (j * j) as f64).collect()
}
