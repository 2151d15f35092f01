//! Chaos-expansion solution of the Wick model.
//!
//! The coefficient fields `u_α(t, ·)` of the expansion `u⋄ = Σ_α u_α ξ_α`
//! solve a noise-independent lower-triangular system: `u_0` is the heat flow
//! of `φ` and, in coefficient space,
//!
//! ```text
//! (u_α)_j(t) = ε Σ_k sqrt(α_k) ∫_0^t e^{-j²(t-s)} Σ_i B_{jki} (u_{α-e(k)})_i(s) ds.
//! ```
//!
//! A [`PropagatorTable`] stores the ε = 1 fields up to chaos order `N` at
//! every reporting time; pairing them with a realization gives the series
//! terms `u⋄⁽ⁿ⁾ = Σ_{|α|=n} u_α ξ_α` and the truncated solution.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::{heat_rates, Hierarchy, Link, TimeGrid};
use crate::noise::{enumerate_multiindices, xi_functional, MultiIndex, NoiseRealization};
use crate::spectral::{CouplingTensor, SpectralField};

/// All coefficient fields of one chaos level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChaosLevel {
    pub indices: Vec<MultiIndex>,
    /// `values[entry][time]`, coefficient vectors of length K.
    pub values: Vec<Vec<Vec<f64>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropagatorTable {
    #[serde(rename = "K")]
    pub modes: usize,
    #[serde(rename = "N")]
    pub order: usize,
    pub grid: TimeGrid,
    /// Noise intensity folded into the coefficients (1 for the standard table).
    pub intensity: f64,
    pub levels: Vec<ChaosLevel>,
}

/// Build the ε = 1 table for `phi` truncated (or padded) to `modes` modes.
pub fn build_table(
    phi: &SpectralField,
    modes: usize,
    order: usize,
    t_grid: &[f64],
    steps_per_interval: usize,
) -> Result<PropagatorTable> {
    build_table_with_intensity(phi, modes, order, t_grid, steps_per_interval, 1.0)
}

/// As [`build_table`] with the factor ε kept inside the recursion, so that
/// entries at level `n` carry `εⁿ`.
pub fn build_table_with_intensity(
    phi: &SpectralField,
    modes: usize,
    order: usize,
    t_grid: &[f64],
    steps_per_interval: usize,
    intensity: f64,
) -> Result<PropagatorTable> {
    if modes == 0 {
        return Err(Error::Config("modes must be at least 1".into()));
    }
    let grid = TimeGrid::new(t_grid.to_vec(), steps_per_interval)?;
    let phi = phi.resized(modes);
    let tensor = CouplingTensor::new(modes);
    let mats: Vec<&[f64]> = (1..=modes).map(|k| tensor.matrix(k)).collect();

    let indices: Vec<Vec<MultiIndex>> = (0..=order)
        .map(|n| enumerate_multiindices(modes, n as u32))
        .collect();
    let mut links = Vec::with_capacity(order);
    for n in 1..=order {
        let position: HashMap<&MultiIndex, usize> = indices[n - 1]
            .iter()
            .enumerate()
            .map(|(i, a)| (a, i))
            .collect();
        let level: Vec<Vec<Link>> = indices[n]
            .iter()
            .map(|alpha| {
                (1..=modes)
                    .filter_map(|k| {
                        let parent = alpha.lowered(k)?;
                        Some(Link {
                            coupling: k - 1,
                            weight: intensity * f64::from(alpha.get(k)).sqrt(),
                            parent: position[&parent],
                        })
                    })
                    .collect()
            })
            .collect();
        links.push(level);
    }
    let hierarchy = Hierarchy {
        rates: heat_rates(modes),
        couplings: &mats,
        levels: links,
    };
    let out = hierarchy.run(phi.coeffs(), &grid);
    let levels = indices
        .into_iter()
        .zip(out)
        .map(|(indices, values)| ChaosLevel { indices, values })
        .collect();
    Ok(PropagatorTable {
        modes,
        order,
        grid,
        intensity,
        levels,
    })
}

impl PropagatorTable {
    pub fn t_grid(&self) -> &[f64] {
        self.grid.points()
    }

    pub fn level(&self, n: usize) -> Option<&ChaosLevel> {
        self.levels.get(n)
    }

    /// `u_α(t, ·)` at reporting time `t`.
    pub fn entry(&self, alpha: &MultiIndex, t: f64) -> Result<SpectralField> {
        let ti = self.grid.index_of(t)?;
        let level = self
            .levels
            .get(alpha.order() as usize)
            .ok_or_else(|| Error::Index(format!("order {} exceeds table order", alpha.order())))?;
        if alpha.support_max() > self.modes {
            return Err(Error::Index("multi-index exceeds table modes".into()));
        }
        let mut padded = alpha.entries().to_vec();
        padded.resize(self.modes, 0);
        let alpha = MultiIndex::new(padded);
        let e = level
            .indices
            .iter()
            .position(|a| *a == alpha)
            .ok_or_else(|| Error::Index("multi-index not in table".into()))?;
        Ok(SpectralField::new(level.values[e][ti].clone()))
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string(self).map_err(|e| Error::Serde(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Serde(e.to_string()))
    }
}

/// Pairwise sum of equal-length vectors, order-preserving.
pub(crate) fn pairwise_sum(mut items: Vec<Vec<f64>>, len: usize) -> Vec<f64> {
    if items.is_empty() {
        return vec![0.0; len];
    }
    while items.len() > 1 {
        let mut next = Vec::with_capacity(items.len().div_ceil(2));
        let mut it = items.into_iter();
        while let Some(mut a) = it.next() {
            if let Some(b) = it.next() {
                a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
            }
            next.push(a);
        }
        items = next;
    }
    items.pop().unwrap_or_else(|| vec![0.0; len])
}

/// `u⋄⁽ⁿ⁾(t, ·) = Σ_{|α|=n} ξ_α u_α(t, ·)`, summed pairwise in canonical order.
pub fn wick_series_term(
    table: &PropagatorTable,
    n: usize,
    t: f64,
    nr: &NoiseRealization,
) -> Result<SpectralField> {
    let ti = table.grid.index_of(t)?;
    let level = table.levels.get(n).ok_or_else(|| {
        Error::Index(format!(
            "series term {n} exceeds table order {}",
            table.order
        ))
    })?;
    let mut items = Vec::with_capacity(level.indices.len());
    for (alpha, values) in level.indices.iter().zip(&level.values) {
        let w = xi_functional(alpha, nr)?;
        items.push(values[ti].iter().map(|v| w * v).collect());
    }
    Ok(SpectralField::new(pairwise_sum(items, table.modes)))
}

/// Truncated series together with the size of its last retained term.
#[derive(Clone, Debug)]
pub struct SeriesSolution {
    pub field: SpectralField,
    /// `|ε|^N ‖term_N‖_0`.
    pub last_term_norm: f64,
}

/// `Σ_{n ≤ N} εⁿ u⋄⁽ⁿ⁾(t, ·)`.
pub fn wick_solution(
    table: &PropagatorTable,
    eps: f64,
    t: f64,
    nr: &NoiseRealization,
) -> Result<SeriesSolution> {
    wick_solution_to_order(table, eps, t, nr, table.order)
}

/// As [`wick_solution`] but truncated at `order ≤ N`.
pub fn wick_solution_to_order(
    table: &PropagatorTable,
    eps: f64,
    t: f64,
    nr: &NoiseRealization,
    order: usize,
) -> Result<SeriesSolution> {
    if order > table.order {
        return Err(Error::Index(format!(
            "order {order} exceeds table order {}",
            table.order
        )));
    }
    let mut field = SpectralField::zeros(table.modes);
    let mut last = 0.0;
    let mut power = 1.0;
    for n in 0..=order {
        let term = wick_series_term(table, n, t, nr)?;
        field.axpy(power, &term);
        last = power.abs() * term.l2_norm();
        power *= eps;
    }
    Ok(SeriesSolution {
        field,
        last_term_norm: last,
    })
}

/// `‖u⋄⁽ⁿ⁾(t, ·)‖_0` for `n = 0..=N`.
pub fn series_decay_diagnostic(
    table: &PropagatorTable,
    nr: &NoiseRealization,
    t: f64,
) -> Result<Vec<f64>> {
    (0..=table.order)
        .map(|n| wick_series_term(table, n, t, nr).map(|f| f.l2_norm()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::{multiindex_count, sample};
    use crate::spectral::{triple_coeff, SineBasis};
    use std::f64::consts::PI;

    fn sin_phi(modes: usize) -> SpectralField {
        SineBasis::new(modes).unwrap().project(f64::sin).unwrap()
    }

    #[test]
    fn order_zero_is_heat_flow() {
        let phi = sin_phi(4);
        let table = build_table(&phi, 4, 0, &[0.0, 0.25, 0.5], 16).unwrap();
        let nr = sample(1, 4).unwrap();
        for &t in &[0.0, 0.25, 0.5] {
            let f = wick_series_term(&table, 0, t, &nr).unwrap();
            assert!((f.coeffs()[0] - (PI / 2.0).sqrt() * (-t).exp()).abs() < 1e-14);
            for c in &f.coeffs()[1..] {
                assert!(c.abs() < 1e-14);
            }
        }
    }

    #[test]
    fn single_mode_first_order_closed_form() {
        // (u_(1))_j(t) = sqrt(π/2) B_{j11} ∫_0^t e^{-j²(t-s)} e^{-s} ds; with K = 1 only j = 1.
        let phi = SpectralField::new(vec![(PI / 2.0).sqrt()]);
        let table = build_table(&phi, 1, 1, &[0.0, 0.3, 0.7], 64).unwrap();
        let b = triple_coeff(1, 1, 1);
        for &t in &[0.3, 0.7] {
            let expect = (PI / 2.0).sqrt() * b * t * (-t).exp();
            let got = table.entry(&MultiIndex::unit(1, 1), t).unwrap();
            assert!((got.coeffs()[0] - expect).abs() < 1e-8);
        }
        // Two modes: source e^{-s} into mode 2 gives a divided difference.
        let table = build_table(&phi, 2, 1, &[0.0, 0.7], 64).unwrap();
        let t: f64 = 0.7;
        for k in 1..=2 {
            let got = table.entry(&MultiIndex::unit(2, k), t).unwrap();
            for j in 1..=2usize {
                let jj = (j * j) as f64;
                let conv = if j == 1 {
                    t * (-t).exp()
                } else {
                    ((-t).exp() - (-jj * t).exp()) / (jj - 1.0)
                };
                let expect = (PI / 2.0).sqrt() * triple_coeff(j, k, 1) * conv;
                assert!((got.coeffs()[j - 1] - expect).abs() < 1e-8, "k={k} j={j}");
            }
        }
    }

    #[test]
    fn level_sizes_follow_binomial() {
        let table = build_table(&sin_phi(3), 3, 4, &[0.0, 0.1], 4).unwrap();
        for n in 0..=4 {
            assert_eq!(table.levels[n].indices.len(), multiindex_count(3, n as u32));
        }
    }

    #[test]
    fn zero_noise_terms() {
        let table = build_table(&sin_phi(3), 3, 3, &[0.0, 0.4], 32).unwrap();
        let nr = NoiseRealization::from_xi(vec![0.0; 3]);
        for n in [1, 3] {
            assert!(wick_series_term(&table, n, 0.4, &nr).unwrap().l2_norm() == 0.0);
        }
        // Only α = 2e(k) survive at n = 2, each with weight He_2(0)/sqrt(2).
        let two = wick_series_term(&table, 2, 0.4, &nr).unwrap();
        let mut expect = SpectralField::zeros(3);
        for k in 1..=3 {
            let mut a = vec![0; 3];
            a[k - 1] = 2;
            expect.axpy(
                -1.0 / 2f64.sqrt(),
                &table.entry(&MultiIndex::new(a), 0.4).unwrap(),
            );
        }
        assert!(two.sub(&expect).l2_norm() < 1e-15);
        assert!(two.l2_norm() > 0.0);
    }

    #[test]
    fn off_grid_request_fails() {
        let table = build_table(&sin_phi(2), 2, 1, &[0.0, 0.5], 4).unwrap();
        let nr = sample(1, 2).unwrap();
        assert!(matches!(
            wick_series_term(&table, 1, 0.3, &nr),
            Err(Error::OffGrid { .. })
        ));
        assert!(wick_series_term(&table, 2, 0.5, &nr).is_err());
        assert!(build_table(&sin_phi(2), 2, 1, &[0.0, 0.5, 0.4], 4).is_err());
    }

    #[test]
    fn eps_zero_and_linearity() {
        let phi = SpectralField::new(vec![0.3, -0.2, 0.5, 0.1]);
        let table = build_table(&phi, 4, 3, &[0.0, 0.5], 16).unwrap();
        let table2 = build_table(&phi.scaled(2.0), 4, 3, &[0.0, 0.5], 16).unwrap();
        let nr = sample(9, 4).unwrap();
        let zero = wick_solution(&table, 0.0, 0.5, &nr).unwrap().field;
        assert_eq!(zero, crate::spectral::heat_evolve(&phi, 0.5).unwrap());
        let a = wick_solution(&table, 0.3, 0.5, &nr).unwrap().field;
        let b = wick_solution(&table2, 0.3, 0.5, &nr).unwrap().field;
        assert!(b.sub(&a.scaled(2.0)).l2_norm() <= 1e-15 * a.l2_norm());
    }

    #[test]
    fn consecutive_truncations_differ_by_last_term() {
        let phi = sin_phi(4);
        let table = build_table(&phi, 4, 5, &[0.0, 0.5], 32).unwrap();
        let nr = sample(2, 4).unwrap();
        let eps: f64 = 0.3;
        for n in 1..5 {
            let a = wick_solution_to_order(&table, eps, 0.5, &nr, n)
                .unwrap()
                .field;
            let b = wick_solution_to_order(&table, eps, 0.5, &nr, n + 1)
                .unwrap()
                .field;
            let bound = eps.abs().powi(n as i32 + 1)
                * wick_series_term(&table, n + 1, 0.5, &nr)
                    .unwrap()
                    .sup_norm();
            assert!(b.sub(&a).sup_norm() <= bound * (1.0 + 1e-12) + 1e-300);
        }
    }

    #[test]
    fn decay_diagnostic_zero_phi() {
        let table = build_table(&SpectralField::zeros(4), 4, 3, &[0.0, 0.5], 8).unwrap();
        let d = series_decay_diagnostic(&table, &sample(1, 4).unwrap(), 0.5).unwrap();
        assert_eq!(d, vec![0.0; 4]);
    }

    #[test]
    fn lower_levels_independent_of_order() {
        let phi = sin_phi(3);
        let small = build_table(&phi, 3, 2, &[0.0, 0.5], 16).unwrap();
        let big = build_table(&phi, 3, 4, &[0.0, 0.5], 16).unwrap();
        for n in 0..=2 {
            assert_eq!(small.levels[n], big.levels[n]);
        }
    }

    #[test]
    fn table_json_round_trip() {
        let table = build_table(&sin_phi(2), 2, 2, &[0.0, 0.25], 4).unwrap();
        let s = table.to_json().unwrap();
        assert!(s.contains("\"K\":2") && s.contains("\"N\":2"));
        assert_eq!(PropagatorTable::from_json(&s).unwrap(), table);
    }

    #[test]
    fn pairwise_sum_matches_naive() {
        let items: Vec<Vec<f64>> = (0..7).map(|i| vec![i as f64, 1.0]).collect();
        assert_eq!(pairwise_sum(items, 2), vec![21.0, 7.0]);
        assert_eq!(pairwise_sum(Vec::new(), 3), vec![0.0; 3]);
    }
}
