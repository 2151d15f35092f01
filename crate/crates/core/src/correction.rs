//! The deterministic second-order correction `lim ε⁻² (u∘ - u⋄)`.
//!
//! In coefficient space the correction at time `t` is
//!
//! ```text
//! c_j(t) = Σ_i Σ_l W_{jil} · T(j², i², l², t) · φ_l,
//! T(a, b, c, t) = ∫_0^t ∫_0^s e^{-a(t-s)} e^{-b(s-r)} e^{-c r} dr ds,
//! ```
//!
//! where `i` runs over the modes of the on-diagonal kernel `p(s - r, y, y)`
//! and `W_{jil}` is the y-integral of `m_j m_i² m_l`. With noise truncated to
//! `K` modes the second-order gap of the two solvers carries the projected
//! weight `Σ_{k≤K} B_{jki} B_{ikl}` instead; both weights converge to the same
//! limit as the diagonal truncation grows.

use std::io::Write;

use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::noise::NoiseRealization;
use crate::spectral::{diag_coeff, CouplingTensor, SineBasis, SpectralField};
use crate::strat::build_dyson_table;
use crate::wick::{wick_series_term, PropagatorTable};

/// Scaled node spread below which the Taylor expansion is used.
const SERIES_SPREAD: f64 = 0.5;

/// `T(a, b, c, t)`: the second divided difference of `λ ↦ e^{-λt}` on the
/// nodes `{a, b, c}`.
pub fn triple_exp_convolution(a: f64, b: f64, c: f64, t: f64) -> f64 {
    if t == 0.0 {
        return 0.0;
    }
    let mut n = [a, b, c];
    n.sort_by(|p, q| p.total_cmp(q));
    let x = t * (n[1] - n[0]);
    let y = t * (n[2] - n[0]);
    (-n[0] * t).exp() * t * t * unit_second_difference(x, y)
}

/// `g[0, x, y]` for `g(z) = e^{-z}` with `0 ≤ x ≤ y`.
fn unit_second_difference(x: f64, y: f64) -> f64 {
    if y <= SERIES_SPREAD {
        // Σ_{n≥2} (-1)ⁿ/n! h_{n-2}(x, y), h the complete homogeneous polynomial.
        let mut h = 1.0;
        let mut xp = 1.0;
        let mut inv_fact = 0.5;
        let mut sum = inv_fact;
        for n in 3..40 {
            xp *= x;
            h = y * h + xp;
            inv_fact /= n as f64;
            let term = if n % 2 == 0 {
                inv_fact * h
            } else {
                -inv_fact * h
            };
            sum += term;
            if term.abs() < 1e-18 * sum.abs() {
                break;
            }
        }
        return sum;
    }
    let first = |d: f64| if d == 0.0 { -1.0 } else { (-d).exp_m1() / d };
    let g0x = first(x);
    let gxy = (-x).exp() * first(y - x);
    (gxy - g0x) / y
}

/// Which y-integral weights the diagonal sum uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DiagonalWeights {
    /// `Σ_{k ≤ K_diag} B_{jki} B_{ikl}`: the noise truncated at `K_diag` modes,
    /// matching the solvers at `K_diag = K`.
    NoiseTruncated,
    /// `∫ m_j m_i² m_l`, the untruncated noise.
    Exact,
}

/// Linear map `φ ↦ c(t)` with output modes `j ≤ K_basis` and diagonal modes
/// `i ≤ K_diag`.
#[derive(Clone, Debug)]
pub struct CorrectionKernel {
    k_basis: usize,
    k_diag: usize,
    /// `w[(j·K_diag + i)·K_basis + l]`, zero-based.
    w: Vec<f64>,
}

impl CorrectionKernel {
    pub fn new(k_basis: usize, k_diag: usize, weights: DiagonalWeights) -> Result<Self> {
        if k_basis == 0 || k_diag == 0 {
            return Err(domain("modes", 0.0));
        }
        let mut w = vec![0.0; k_basis * k_diag * k_basis];
        match weights {
            DiagonalWeights::Exact => {
                for j in 0..k_basis {
                    for i in 0..k_diag {
                        for l in 0..k_basis {
                            w[(j * k_diag + i) * k_basis + l] = diag_coeff(j + 1, i + 1, l + 1);
                        }
                    }
                }
            }
            DiagonalWeights::NoiseTruncated => {
                let n = k_diag.max(k_basis);
                let b = CouplingTensor::new(n);
                for j in 0..k_basis {
                    for i in 0..k_diag {
                        for l in 0..k_basis {
                            let mut s = 0.0;
                            for k in 1..=k_diag {
                                let m = b.matrix(k);
                                s += m[j * n + i] * m[i * n + l];
                            }
                            w[(j * k_diag + i) * k_basis + l] = s;
                        }
                    }
                }
            }
        }
        Ok(Self { k_basis, k_diag, w })
    }

    pub fn k_basis(&self) -> usize {
        self.k_basis
    }

    pub fn k_diag(&self) -> usize {
        self.k_diag
    }

    pub fn weight(&self, j: usize, i: usize, l: usize) -> f64 {
        self.w[((j - 1) * self.k_diag + (i - 1)) * self.k_basis + (l - 1)]
    }

    pub fn apply(&self, phi: &SpectralField, t: f64) -> Result<SpectralField> {
        if !(t > 0.0) {
            return Err(domain("t", t));
        }
        let phi = phi.resized(self.k_basis);
        let (kb, kd) = (self.k_basis, self.k_diag);
        let coeffs: Vec<f64> = (0..kb)
            .into_par_iter()
            .map(|j| {
                let a = ((j + 1) * (j + 1)) as f64;
                let mut acc = 0.0;
                for i in 0..kd {
                    let b = ((i + 1) * (i + 1)) as f64;
                    for (l, p) in phi.coeffs().iter().enumerate() {
                        if *p == 0.0 {
                            continue;
                        }
                        let wt = self.w[(j * kd + i) * kb + l];
                        if wt == 0.0 {
                            continue;
                        }
                        let c = ((l + 1) * (l + 1)) as f64;
                        acc += wt * triple_exp_convolution(a, b, c, t) * p;
                    }
                }
                acc
            })
            .collect();
        Ok(SpectralField::new(coeffs))
    }
}

/// Correction field with noise-truncated diagonal weights; at
/// `k_diag = K` it is exactly the limit of the truncated solvers.
pub fn correction_field(
    phi: &SpectralField,
    t: f64,
    k_basis: usize,
    k_diag: usize,
) -> Result<SpectralField> {
    CorrectionKernel::new(k_basis, k_diag, DiagonalWeights::NoiseTruncated)?.apply(phi, t)
}

/// Correction field with the untruncated diagonal weights `∫ m_j m_i² m_l`.
pub fn correction_field_exact_weights(
    phi: &SpectralField,
    t: f64,
    k_basis: usize,
    k_diag: usize,
) -> Result<SpectralField> {
    CorrectionKernel::new(k_basis, k_diag, DiagonalWeights::Exact)?.apply(phi, t)
}

/// Richardson-type estimate of the `K_diag → ∞` correction.
#[derive(Clone, Debug)]
pub struct Extrapolated {
    pub field: SpectralField,
    /// Sup-norm ratio of successive differences; ~`2^{-p}` for rate `p`.
    pub contraction: f64,
    /// Values at `k_diag`, `2 k_diag`, `4 k_diag`.
    pub ladder: [SpectralField; 3],
}

/// Extrapolate the correction over `K_diag ∈ {k, 2k, 4k}` assuming a geometric
/// error with the observed contraction.
pub fn extrapolated_correction(
    phi: &SpectralField,
    t: f64,
    k_basis: usize,
    k_diag: usize,
) -> Result<Extrapolated> {
    let v1 = correction_field(phi, t, k_basis, k_diag)?;
    let v2 = correction_field(phi, t, k_basis, 2 * k_diag)?;
    let v3 = correction_field(phi, t, k_basis, 4 * k_diag)?;
    let d1 = v2.sub(&v1);
    let d2 = v3.sub(&v2);
    let (n1, n2) = (d1.sup_norm(), d2.sup_norm());
    let contraction = if n1 > 0.0 { n2 / n1 } else { 0.0 };
    let mut field = v3.clone();
    if contraction > 0.0 && contraction < 1.0 {
        field.axpy(contraction / (1.0 - contraction), &d2);
    }
    Ok(Extrapolated {
        field,
        contraction,
        ladder: [v1, v2, v3],
    })
}

/// `u∘⁽²⁾(t, ·) - u⋄⁽²⁾(t, ·)` on the table's grid and refinement.
pub fn second_order_gap(
    table: &PropagatorTable,
    phi: &SpectralField,
    nr: &NoiseRealization,
    t: f64,
) -> Result<SpectralField> {
    if table.order < 2 {
        return Err(Error::Index("table order must be at least 2".into()));
    }
    let phi = phi.resized(table.modes);
    let nr = nr.truncated(table.modes)?;
    let dyson = build_dyson_table(
        &phi,
        &nr,
        2,
        table.t_grid(),
        table.grid.steps_per_interval(),
    )?;
    let strat = dyson.term(2, t)?;
    let wick = wick_series_term(table, 2, t, &nr)?;
    Ok(strat.sub(&wick))
}

/// `Σ_k ⟨f_k, m_k⟩`: the Stratonovich-minus-Wick value of `∫ f dW` for
/// `f = Σ_k f_k ξ_k`, independent of the realization.
pub fn ws_integral_gap(f_coeffs: &[SpectralField]) -> f64 {
    f_coeffs
        .iter()
        .enumerate()
        .map(|(i, f)| f.coeffs().get(i).copied().unwrap_or(0.0))
        .sum()
}

/// Pathwise `∫ f(x) V(x) dx` with `f = Σ_k f_k ξ_k`, by quadrature.
pub fn stratonovich_integral(
    f_coeffs: &[SpectralField],
    nr: &NoiseRealization,
    basis: &SineBasis,
) -> Result<f64> {
    if f_coeffs.len() > nr.modes {
        return Err(Error::Index(
            "more chaos coefficients than noise modes".into(),
        ));
    }
    let rule = basis.rule();
    let mut total = 0.0;
    for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
        let f: f64 = f_coeffs
            .iter()
            .zip(&nr.xi)
            .map(|(fk, xi)| xi * fk.eval(x))
            .sum();
        total += w * f * nr.white_noise_eval(x)?;
    }
    Ok(total)
}

/// `Σ_{k,j} ⟨f_k, m_j⟩ ξ_k ⋄ ξ_j` with `ξ_k ⋄ ξ_j = ξ_k ξ_j - δ_{kj}`.
pub fn wick_integral(f_coeffs: &[SpectralField], nr: &NoiseRealization) -> Result<f64> {
    if f_coeffs.len() > nr.modes {
        return Err(Error::Index(
            "more chaos coefficients than noise modes".into(),
        ));
    }
    let mut total = 0.0;
    for (k, fk) in f_coeffs.iter().enumerate() {
        for (j, c) in fk.coeffs().iter().enumerate().take(nr.modes) {
            let prod = nr.xi[k] * nr.xi[j] - if j == k { 1.0 } else { 0.0 };
            total += c * prod;
        }
    }
    Ok(total)
}

/// Write `x,value` rows of `field` on `xs`.
pub fn write_field_csv<W: Write>(field: &SpectralField, xs: &[f64], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let ser = |e: csv::Error| Error::Serde(e.to_string());
    w.write_record(["x", "value"]).map_err(ser)?;
    for &x in xs {
        w.write_record([x.to_string(), field.eval(x).to_string()])
            .map_err(ser)?;
    }
    w.flush().map_err(|e| Error::Serde(e.to_string()))?;
    Ok(())
}
