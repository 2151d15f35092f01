//! Stratonovich model at truncation level K.
//!
//! With the smooth potential `V = Σ_{k≤K} ξ_k m_k` the equation is an ordinary
//! PDE; its Galerkin system is `a' = (-D + ε M) a` with `D = diag(j²)` and
//! `M_{ji} = Σ_k ξ_k B_{jki}`. The flow is computed exactly through the
//! eigendecomposition of the symmetric generator, and the ε-series (Dyson)
//! terms `b⁽ⁿ⁾ = ∫_0^t e^{-D(t-s)} M b⁽ⁿ⁻¹⁾(s) ds` with the same exponential
//! integrator as the Wick propagator table.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{domain, Error, Result};
use crate::integrator::{heat_rates, Hierarchy, Link, TimeGrid};
use crate::noise::NoiseRealization;
use crate::spectral::{sobolev_norm, CouplingTensor, SpectralField};
use crate::wick::SeriesSolution;

/// `-D + ε M` data for one realization.
#[derive(Clone, Debug)]
pub struct GalerkinSystem {
    modes: usize,
    rates: Vec<f64>,
    /// Row-major `K×K`.
    interaction: Vec<f64>,
}

impl GalerkinSystem {
    /// System on `modes` modes driven by the first `modes` coordinates of `nr`.
    pub fn new(modes: usize, nr: &NoiseRealization) -> Result<Self> {
        if modes == 0 {
            return Err(domain("modes", 0.0));
        }
        if nr.modes < modes {
            return Err(Error::Index(format!(
                "realization has {} modes, system needs {modes}",
                nr.modes
            )));
        }
        let tensor = CouplingTensor::new(modes);
        Ok(Self {
            modes,
            rates: heat_rates(modes),
            interaction: tensor.contract(&nr.xi[..modes]),
        })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn interaction(&self) -> &[f64] {
        &self.interaction
    }

    /// `A(ε) = -D + ε M`.
    pub fn generator(&self, eps: f64) -> DMatrix<f64> {
        let k = self.modes;
        DMatrix::from_fn(k, k, |j, i| {
            let d = if i == j { -self.rates[j] } else { 0.0 };
            d + eps * self.interaction[j * k + i]
        })
    }

    pub fn flow(&self, eps: f64) -> Result<StratFlow> {
        let a = self.generator(eps);
        if a.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical("non-finite generator entry".into()));
        }
        let eig = SymmetricEigen::new(a);
        if eig.eigenvalues.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical(
                "eigendecomposition produced non-finite values".into(),
            ));
        }
        Ok(StratFlow {
            eigenvalues: eig.eigenvalues,
            eigenvectors: eig.eigenvectors,
        })
    }
}

/// `t ↦ exp(t A)` for a fixed symmetric generator `A`.
#[derive(Clone, Debug)]
pub struct StratFlow {
    eigenvalues: DVector<f64>,
    eigenvectors: DMatrix<f64>,
}

impl StratFlow {
    pub fn eigenvalues(&self) -> &[f64] {
        self.eigenvalues.as_slice()
    }

    pub fn evolve(&self, a0: &SpectralField, t: f64) -> Result<SpectralField> {
        if !(t >= 0.0) {
            return Err(domain("t", t));
        }
        let q = &self.eigenvectors;
        let v = DVector::from_column_slice(a0.coeffs());
        let mut c = q.tr_mul(&v);
        for (ci, l) in c.iter_mut().zip(self.eigenvalues.iter()) {
            *ci *= (l * t).exp();
        }
        Ok(SpectralField::new((q * c).as_slice().to_vec()))
    }
}

/// Stratonovich solution `u∘(t, ·; ε)` with `K = phi.modes()`.
pub fn strat_solution(
    phi: &SpectralField,
    nr: &NoiseRealization,
    eps: f64,
    t: f64,
) -> Result<SpectralField> {
    let sys = GalerkinSystem::new(phi.modes(), nr)?;
    sys.flow(eps)?.evolve(phi, t)
}

/// Dyson terms `u∘⁽ⁿ⁾` for `n ≤ N` at every reporting time.
#[derive(Clone, Debug)]
pub struct DysonTable {
    pub modes: usize,
    pub order: usize,
    pub grid: TimeGrid,
    /// `terms[n][time]`.
    pub terms: Vec<Vec<SpectralField>>,
}

pub fn build_dyson_table(
    phi: &SpectralField,
    nr: &NoiseRealization,
    order: usize,
    t_grid: &[f64],
    steps_per_interval: usize,
) -> Result<DysonTable> {
    let grid = TimeGrid::new(t_grid.to_vec(), steps_per_interval)?;
    let sys = GalerkinSystem::new(phi.modes(), nr)?;
    let couplings: [&[f64]; 1] = [sys.interaction()];
    let link = Link {
        coupling: 0,
        weight: 1.0,
        parent: 0,
    };
    let hierarchy = Hierarchy {
        rates: sys.rates().to_vec(),
        couplings: &couplings,
        levels: vec![vec![vec![link]]; order],
    };
    let out = hierarchy.run(phi.coeffs(), &grid);
    let terms = out
        .into_iter()
        .map(|mut level| {
            level
                .swap_remove(0)
                .into_iter()
                .map(SpectralField::new)
                .collect()
        })
        .collect();
    Ok(DysonTable {
        modes: phi.modes(),
        order,
        grid,
        terms,
    })
}

impl DysonTable {
    pub fn term(&self, n: usize, t: f64) -> Result<&SpectralField> {
        let ti = self.grid.index_of(t)?;
        self.terms
            .get(n)
            .map(|v| &v[ti])
            .ok_or_else(|| Error::Index(format!("series term {n} exceeds order {}", self.order)))
    }

    /// `Σ_{n ≤ order} εⁿ u∘⁽ⁿ⁾(t, ·)`.
    pub fn partial_sum(&self, eps: f64, t: f64, order: usize) -> Result<SeriesSolution> {
        if order > self.order {
            return Err(Error::Index(format!(
                "order {order} exceeds {}",
                self.order
            )));
        }
        let mut field = SpectralField::zeros(self.modes);
        let mut power = 1.0;
        let mut last = 0.0;
        for n in 0..=order {
            let term = self.term(n, t)?;
            field.axpy(power, term);
            last = power.abs() * term.l2_norm();
            power *= eps;
        }
        Ok(SeriesSolution {
            field,
            last_term_norm: last,
        })
    }
}

/// `u∘⁽ⁿ⁾(t, ·)` on the grid `[0, t]` refined into `steps` steps.
pub fn strat_series_term(
    phi: &SpectralField,
    nr: &NoiseRealization,
    n: usize,
    t: f64,
    steps: usize,
) -> Result<SpectralField> {
    let table = build_dyson_table(phi, nr, n, &grid_to(t)?, steps)?;
    Ok(table.term(n, t)?.clone())
}

/// `Σ_{n ≤ N} εⁿ u∘⁽ⁿ⁾(t, ·)`.
pub fn strat_series_solution(
    phi: &SpectralField,
    nr: &NoiseRealization,
    eps: f64,
    t: f64,
    order: usize,
    steps: usize,
) -> Result<SeriesSolution> {
    let table = build_dyson_table(phi, nr, order, &grid_to(t)?, steps)?;
    table.partial_sum(eps, t, order)
}

fn grid_to(t: f64) -> Result<Vec<f64>> {
    if !(t >= 0.0) {
        return Err(domain("t", t));
    }
    Ok(if t == 0.0 { vec![0.0] } else { vec![0.0, t] })
}

/// `‖field‖_γ t^{γ/2} / ‖φ‖_0`, the quantity bounded uniformly in `t`.
pub fn hgamma_diagnostic(
    field: &SpectralField,
    phi: &SpectralField,
    gamma: f64,
    t: f64,
) -> Result<f64> {
    if !(t > 0.0) {
        return Err(domain("t", t));
    }
    let norm = phi.l2_norm();
    if norm == 0.0 {
        return Err(domain("‖φ‖_0", 0.0));
    }
    Ok(sobolev_norm(field, gamma) * t.powf(gamma / 2.0) / norm)
}
