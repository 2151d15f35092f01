//! Sine basis on (0, π) with zero boundary values, the heat semigroup acting on
//! it, Sobolev norms, and the integrals of basis-function products that couple
//! modes through a multiplicative potential.
//!
//! Mode `k` (1-based) is `m_k(x) = sqrt(2/π) sin(kx)`; a [`SpectralField`]
//! stores the coefficients of `m_1..m_K` densely, index `k - 1`.

use std::f64::consts::{FRAC_2_PI, PI};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::quadrature::{self, Rule};

const PANEL_ORDER: usize = 16;
const KERNEL_CUTOFF: f64 = 1e-16;

/// `sqrt(2/π)`, the normalisation of every basis function.
pub fn mode_norm() -> f64 {
    FRAC_2_PI.sqrt()
}

/// Value of `m_k(x)`.
#[inline]
pub fn mode(k: usize, x: f64) -> f64 {
    mode_norm() * (k as f64 * x).sin()
}

/// The first `modes` sine functions together with a composite Gauss–Legendre
/// rule used to project arbitrary functions onto them.
#[derive(Clone, Debug)]
pub struct SineBasis {
    modes: usize,
    quadrature_points: usize,
    rule: Rule,
}

impl SineBasis {
    /// Basis with the default `4K + 16` quadrature points.
    pub fn new(modes: usize) -> Result<Self> {
        Self::with_quadrature_points(modes, 4 * modes + 16)
    }

    pub fn with_quadrature_points(modes: usize, quadrature_points: usize) -> Result<Self> {
        if modes == 0 {
            return Err(domain("modes", 0.0));
        }
        if quadrature_points == 0 {
            return Err(domain("quadrature_points", 0.0));
        }
        let panels = quadrature_points.div_ceil(PANEL_ORDER);
        let rule = quadrature::composite(0.0, PI, panels, PANEL_ORDER);
        Ok(Self {
            modes,
            quadrature_points,
            rule,
        })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn quadrature_points(&self) -> usize {
        self.quadrature_points
    }

    /// The projection rule on [0, π].
    pub fn rule(&self) -> &Rule {
        &self.rule
    }

    /// `a_k = ∫ f m_k dx` for `k = 1..=K`.
    pub fn project<F: Fn(f64) -> f64>(&self, f: F) -> Result<SpectralField> {
        let mut coeffs = vec![0.0; self.modes];
        for (&x, &w) in self.rule.nodes.iter().zip(&self.rule.weights) {
            let v = f(x);
            if !v.is_finite() {
                return Err(Error::NonFinite { x, value: v });
            }
            let wv = w * v;
            for (k, c) in coeffs.iter_mut().enumerate() {
                *c += wv * mode(k + 1, x);
            }
        }
        Ok(SpectralField { coeffs })
    }

    /// Gram matrix of the basis under the projection rule, row-major.
    pub fn gram(&self) -> Vec<f64> {
        let k = self.modes;
        let mut g = vec![0.0; k * k];
        for (&x, &w) in self.rule.nodes.iter().zip(&self.rule.weights) {
            let vals: Vec<f64> = (1..=k).map(|m| mode(m, x)).collect();
            for i in 0..k {
                for j in 0..k {
                    g[i * k + j] += w * vals[i] * vals[j];
                }
            }
        }
        g
    }
}

/// A function on [0, π] given by its sine-basis coefficients.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralField {
    coeffs: Vec<f64>,
}

impl SpectralField {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }

    pub fn zeros(modes: usize) -> Self {
        Self {
            coeffs: vec![0.0; modes],
        }
    }

    /// `m_k` itself, as a field with `modes` coefficients.
    pub fn unit(modes: usize, k: usize) -> Self {
        let mut f = Self::zeros(modes);
        f.coeffs[k - 1] = 1.0;
        f
    }

    pub fn modes(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    /// Pointwise value; zero at both end points.
    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(k, a)| a * mode(k + 1, x))
            .sum()
    }

    pub fn eval_many(&self, xs: &[f64]) -> Vec<f64> {
        xs.iter().map(|&x| self.eval(x)).collect()
    }

    /// L2 norm by Parseval.
    pub fn l2_norm(&self) -> f64 {
        self.coeffs.iter().map(|a| a * a).sum::<f64>().sqrt()
    }

    /// Max of `|f|` over `xs`.
    pub fn sup_norm_on(&self, xs: &[f64]) -> f64 {
        xs.iter().map(|&x| self.eval(x).abs()).fold(0.0, f64::max)
    }

    /// Max of `|f|` over a uniform grid fine enough to resolve every mode
    /// (at least 32 points per highest-mode half-period).
    pub fn sup_norm(&self) -> f64 {
        let n = (32 * self.modes()).max(256);
        let grid: Vec<f64> = (0..=n).map(|i| PI * i as f64 / n as f64).collect();
        self.sup_norm_on(&grid)
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|a| s * a).collect(),
        }
    }

    /// `self += s * other`; shorter operand is zero-padded.
    pub fn axpy(&mut self, s: f64, other: &SpectralField) {
        if other.modes() > self.modes() {
            self.coeffs.resize(other.modes(), 0.0);
        }
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += s * b;
        }
    }

    pub fn sub(&self, other: &SpectralField) -> Self {
        let mut out = self.clone();
        out.axpy(-1.0, other);
        out
    }

    /// Copy truncated or zero-padded to `modes` coefficients.
    pub fn resized(&self, modes: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(modes, 0.0);
        Self { coeffs }
    }
}

/// Heat multiplier `e^{-k² t}` of mode `k`.
#[inline]
pub fn heat_multiplier(k: usize, t: f64) -> f64 {
    let k = k as f64;
    (-k * k * t).exp()
}

/// Dirichlet heat kernel `p(t, x, y)` on (0, π), summed until the term bound
/// `(2/π) e^{-k² t}` drops below 1e-16.
pub fn heat_kernel_eval(t: f64, x: f64, y: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(domain("t", t));
    }
    let mut sum = 0.0;
    let mut k = 1usize;
    loop {
        let w = heat_multiplier(k, t);
        if FRAC_2_PI * w < KERNEL_CUTOFF {
            break;
        }
        let kf = k as f64;
        sum += w * ((kf * x).sin() * (kf * y).sin());
        k += 1;
    }
    Ok(FRAC_2_PI * sum)
}

/// Solution of the heat equation at time `t` started from `f`.
pub fn heat_evolve(f: &SpectralField, t: f64) -> Result<SpectralField> {
    if !(t >= 0.0) {
        return Err(domain("t", t));
    }
    Ok(SpectralField {
        coeffs: f
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, a)| a * heat_multiplier(k + 1, t))
            .collect(),
    })
}

/// `‖f‖_γ = sqrt(Σ k^{2γ} a_k²)`.
pub fn sobolev_norm(f: &SpectralField, gamma: f64) -> f64 {
    f.coeffs
        .iter()
        .enumerate()
        .map(|(k, a)| ((k + 1) as f64).powf(2.0 * gamma) * a * a)
        .sum::<f64>()
        .sqrt()
}

// ∫_0^π sin(n x) dx for integer n.
fn sine_integral(n: i64) -> f64 {
    if n.rem_euclid(2) == 1 {
        2.0 / n as f64
    } else {
        0.0
    }
}

/// `B_{jkl} = ∫_0^π m_j m_k m_l dx`, nonzero only when `j + k + l` is odd.
pub fn triple_coeff(j: usize, k: usize, l: usize) -> f64 {
    let mut n = [j as i64, k as i64, l as i64];
    n.sort_unstable();
    let [j, k, l] = n;
    let s = sine_integral(j - k + l) + sine_integral(k + l - j) + sine_integral(j + k - l)
        - sine_integral(j + k + l);
    let norm = mode_norm();
    0.25 * norm * norm * norm * s
}

/// `D_{jkl} = (2/π) ∫_0^π m_j(y) sin²(ky) m_l(y) dy = ∫ m_j m_k² m_l dy`,
/// the weight of mode `k` of the on-diagonal heat kernel `p(s, y, y)`.
pub fn diag_coeff(j: usize, k: usize, l: usize) -> f64 {
    let d = j.abs_diff(l);
    let mut v = 0.0;
    if j == l {
        v += 1.0;
    }
    if d == 2 * k {
        v -= 0.5;
    }
    if j + l == 2 * k {
        v += 0.5;
    }
    v / PI
}

/// Dense table of `B_{jki}` for `j, k, i ≤ K`; `matrix(k)` is the K×K operator
/// `u ↦ P_K(m_k u)` in coefficient space.
#[derive(Clone, Debug)]
pub struct CouplingTensor {
    modes: usize,
    data: Vec<f64>,
}

impl CouplingTensor {
    pub fn new(modes: usize) -> Self {
        let mut data = vec![0.0; modes * modes * modes];
        for k in 1..=modes {
            for j in 1..=modes {
                for i in 1..=modes {
                    data[((k - 1) * modes + (j - 1)) * modes + (i - 1)] = triple_coeff(j, k, i);
                }
            }
        }
        Self { modes, data }
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    /// Row-major `K×K` block for noise mode `k` (1-based).
    pub fn matrix(&self, k: usize) -> &[f64] {
        let n = self.modes * self.modes;
        &self.data[(k - 1) * n..k * n]
    }

    /// `out += w · C_k u`.
    pub fn apply_add(&self, k: usize, w: f64, u: &[f64], out: &mut [f64]) {
        let m = self.matrix(k);
        let n = self.modes;
        for (j, o) in out.iter_mut().enumerate() {
            let row = &m[j * n..(j + 1) * n];
            *o += w * row.iter().zip(u).map(|(a, b)| a * b).sum::<f64>();
        }
    }

    /// `Σ_k w_k C_k`, row-major.
    pub fn contract(&self, weights: &[f64]) -> Vec<f64> {
        let n = self.modes * self.modes;
        let mut out = vec![0.0; n];
        for (k, w) in weights.iter().enumerate().take(self.modes) {
            for (o, c) in out.iter_mut().zip(self.matrix(k + 1)) {
                *o += w * c;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn project_sine() {
        let basis = SineBasis::new(4).unwrap();
        let f = basis.project(f64::sin).unwrap();
        let expect = (PI / 2.0).sqrt();
        assert!(close(f.coeffs()[0], expect, 1e-14));
        for c in &f.coeffs()[1..] {
            assert!(c.abs() < 1e-14);
        }
        let z = basis.project(|_| 0.0).unwrap();
        assert!(z.coeffs().iter().all(|&c| c == 0.0));
    }

    #[test]
    fn project_rejects_non_finite() {
        let basis = SineBasis::new(3).unwrap();
        let err = basis
            .project(|x| if x > 1.0 { f64::NAN } else { x })
            .unwrap_err();
        match err {
            Error::NonFinite { x, .. } => assert!(x > 1.0),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn gram_is_identity_up_to_64_modes() {
        for k in [1, 8, 33, 64] {
            let basis = SineBasis::new(k).unwrap();
            let g = basis.gram();
            for i in 0..k {
                for j in 0..k {
                    let e = if i == j { 1.0 } else { 0.0 };
                    assert!((g[i * k + j] - e).abs() < 1e-10, "K={k} ({i},{j})");
                }
            }
        }
    }

    #[test]
    fn field_vanishes_at_boundary() {
        let f = SpectralField::new(vec![0.3, -1.2, 2.0, 0.7]);
        assert_eq!(f.eval(0.0), 0.0);
        assert!(f.eval(PI).abs() < 1e-14);
        let parseval = f.coeffs().iter().map(|a| a * a).sum::<f64>();
        assert!(close(f.l2_norm().powi(2), parseval, 1e-15));
    }

    #[test]
    fn heat_kernel_reference_value() {
        // (2/π) Σ_{k odd} e^{-k²}, summed directly.
        let mut s = 0.0;
        let mut k = 1.0f64;
        while (-k * k).exp() > 1e-18 {
            s += (-k * k).exp();
            k += 2.0;
        }
        let expect = FRAC_2_PI * s;
        let got = heat_kernel_eval(1.0, PI / 2.0, PI / 2.0).unwrap();
        assert!(close(got, expect, 1e-14));
        assert!((got - 0.2342779).abs() < 1e-7);
        assert_eq!(heat_kernel_eval(0.3, 0.0, 1.1).unwrap(), 0.0);
        assert!(heat_kernel_eval(0.0, 1.0, 1.0).is_err());
        assert!(heat_kernel_eval(-1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn heat_kernel_matches_mode_sum() {
        for &(t, x, y) in &[(0.05, 0.3, 2.0), (0.5, 1.0, 1.0), (2.0, 3.0, 0.1)] {
            let mut s = 0.0;
            for k in 1..400 {
                s += heat_multiplier(k, t) * mode(k, x) * mode(k, y);
            }
            let got = heat_kernel_eval(t, x, y).unwrap();
            assert!((got - s).abs() < 1e-12);
            assert!(got > 0.0);
            assert_eq!(got, heat_kernel_eval(t, y, x).unwrap());
        }
    }

    #[test]
    fn heat_evolve_eigenfunction() {
        let f = SpectralField::unit(3, 1);
        let g = heat_evolve(&f, 1.0).unwrap();
        assert_eq!(g.coeffs(), &[(-1.0f64).exp(), 0.0, 0.0]);
        assert_eq!(heat_evolve(&f, 0.0).unwrap(), f);
        assert!(heat_evolve(&f, -0.1).is_err());
    }

    #[test]
    fn sobolev_examples() {
        assert_eq!(sobolev_norm(&SpectralField::unit(3, 1), 0.0), 1.0);
        assert!(close(
            sobolev_norm(&SpectralField::unit(3, 2), 1.0),
            2.0,
            1e-15
        ));
        let f = SpectralField::new(vec![1.0, 1.0]);
        assert!(close(sobolev_norm(&f, 0.5), 3f64.sqrt(), 1e-15));
    }

    #[test]
    fn triple_coeff_parity_and_symmetry() {
        // ∫ sin³ = 4/3 and ∫ sin² x sin 2x = 0.
        assert!(close(
            triple_coeff(1, 1, 1),
            mode_norm().powi(3) * 4.0 / 3.0,
            1e-15
        ));
        assert_eq!(triple_coeff(1, 1, 2), 0.0);
        assert_eq!(triple_coeff(2, 3, 4), triple_coeff(4, 2, 3));
        for j in 1..8 {
            for k in 1..8 {
                for l in 1..8 {
                    let v = triple_coeff(j, k, l);
                    if (j + k + l) % 2 == 0 {
                        assert_eq!(v, 0.0);
                    }
                    assert!((v - triple_coeff(k, l, j)).abs() < 1e-16);
                    assert!((v - triple_coeff(l, j, k)).abs() < 1e-16);
                    assert!((v - triple_coeff(k, j, l)).abs() < 1e-16);
                }
            }
        }
    }

    #[test]
    fn diag_coeff_examples() {
        assert!(close(diag_coeff(1, 1, 1), 1.5 / PI, 1e-15));
        assert_eq!(diag_coeff(1, 2, 3), diag_coeff(3, 2, 1));
        // j + l odd: sin(jy) sin(ly) sin²(ky) integrates to zero.
        assert_eq!(diag_coeff(1, 3, 2), 0.0);
    }

    #[test]
    fn coupling_tensor_layout() {
        let c = CouplingTensor::new(5);
        let mut out = vec![0.0; 5];
        c.apply_add(2, 1.0, &[1.0, 0.0, 0.0, 0.0, 0.0], &mut out);
        for (j, o) in out.iter().enumerate() {
            assert_eq!(*o, triple_coeff(j + 1, 2, 1));
        }
        let m = c.contract(&[0.5, -1.0, 0.0, 0.0, 2.0]);
        for j in 0..5 {
            for i in 0..5 {
                let e = 0.5 * triple_coeff(j + 1, 1, i + 1) - triple_coeff(j + 1, 2, i + 1)
                    + 2.0 * triple_coeff(j + 1, 5, i + 1);
                assert!((m[j * 5 + i] - e).abs() < 1e-15);
                assert_eq!(m[j * 5 + i], m[i * 5 + j]);
            }
        }
    }

    proptest! {
        #[test]
        fn semigroup_identity(
            coeffs in prop::collection::vec(-5.0f64..5.0, 1..24),
            s in 0.0f64..2.0,
            t in 0.0f64..2.0,
        ) {
            let f = SpectralField::new(coeffs);
            let two = heat_evolve(&heat_evolve(&f, s).unwrap(), t).unwrap();
            let one = heat_evolve(&f, s + t).unwrap();
            for (a, b) in two.coeffs().iter().zip(one.coeffs()) {
                prop_assert!((a - b).abs() <= 1e-12 * b.abs() + 1e-290);
            }
        }

        #[test]
        fn heat_multipliers_in_unit_interval(k in 1usize..64, t in 0.0f64..10.0) {
            let m = heat_multiplier(k, t);
            prop_assert!((0.0..=1.0).contains(&m));
        }
    }
}
