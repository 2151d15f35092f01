//! Truncated white noise on (0, π): the Gaussian coordinates `ξ_k`, the
//! Brownian path and smooth potential they induce, probabilists' Hermite
//! polynomials and the Wiener chaos functionals `ξ_α`.

use std::cmp::Ordering;
use std::f64::consts::PI;

use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{domain, Error, Result};
use crate::spectral::{mode, mode_norm};

/// One realization of the first `K` Gaussian coordinates of white noise.
///
/// `xi[k-1]` depends only on `(seed, k)`, so a realization with more modes
/// extends one with fewer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseRealization {
    /// `None` for hand-built realizations.
    pub seed: Option<u64>,
    #[serde(rename = "K")]
    pub modes: usize,
    pub xi: Vec<f64>,
}

/// Standard normal for coordinate `k` (1-based) of stream `seed`: the
/// ChaCha20 keystream word at a position fixed by `k`, mapped through the
/// inverse normal CDF.
fn gaussian_at(seed: u64, k: usize) -> f64 {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_word_pos(2 * (k as u128 - 1));
    let bits = rng.next_u64() >> 11;
    let u = (bits as f64 + 0.5) / (1u64 << 53) as f64;
    Normal::standard().inverse_cdf(u)
}

/// Draw the realization keyed by `seed` with `modes` coordinates.
pub fn sample(seed: u64, modes: usize) -> Result<NoiseRealization> {
    if modes == 0 {
        return Err(domain("modes", 0.0));
    }
    Ok(NoiseRealization {
        seed: Some(seed),
        modes,
        xi: (1..=modes).map(|k| gaussian_at(seed, k)).collect(),
    })
}

impl NoiseRealization {
    /// Realization with explicitly given coordinates.
    pub fn from_xi(xi: Vec<f64>) -> Self {
        Self {
            seed: None,
            modes: xi.len(),
            xi,
        }
    }

    /// The first `modes` coordinates.
    pub fn truncated(&self, modes: usize) -> Result<Self> {
        if modes > self.modes {
            return Err(Error::Index(format!(
                "cannot truncate a {}-mode realization to {modes} modes",
                self.modes
            )));
        }
        Ok(Self {
            seed: self.seed,
            modes,
            xi: self.xi[..modes].to_vec(),
        })
    }

    /// Truncated Brownian path `W_K(x) = Σ ξ_k sqrt(2/π) (1 - cos kx)/k`.
    pub fn brownian_eval(&self, x: f64) -> Result<f64> {
        check_domain(x)?;
        Ok(self
            .xi
            .iter()
            .enumerate()
            .map(|(i, xi)| {
                let k = (i + 1) as f64;
                xi * mode_norm() * (1.0 - (k * x).cos()) / k
            })
            .sum())
    }

    /// Smooth potential `V(x) = Σ ξ_k m_k(x)`, the derivative of the path.
    pub fn white_noise_eval(&self, x: f64) -> Result<f64> {
        check_domain(x)?;
        Ok(self
            .xi
            .iter()
            .enumerate()
            .map(|(i, xi)| xi * mode(i + 1, x))
            .sum())
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string(self).map_err(|e| Error::Serde(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let nr: Self = serde_json::from_str(s).map_err(|e| Error::Serde(e.to_string()))?;
        if nr.xi.len() != nr.modes {
            return Err(Error::Serde(format!(
                "K = {} but xi has {} entries",
                nr.modes,
                nr.xi.len()
            )));
        }
        Ok(nr)
    }
}

fn check_domain(x: f64) -> Result<()> {
    if (0.0..=PI).contains(&x) {
        Ok(())
    } else {
        Err(domain("x", x))
    }
}

/// Probabilists' Hermite polynomial `He_n(x)` by the three-term recurrence.
pub fn hermite(n: usize, x: f64) -> f64 {
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = x;
    for m in 1..n {
        let next = x * cur - m as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// A multi-index over modes `1..=K`, stored densely (`entries[k-1] = α_k`).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(entries: Vec<u32>) -> Self {
        Self(entries)
    }

    pub fn zero(modes: usize) -> Self {
        Self(vec![0; modes])
    }

    /// `e(k)`, the unit index at mode `k` (1-based).
    pub fn unit(modes: usize, k: usize) -> Self {
        let mut v = vec![0; modes];
        v[k - 1] = 1;
        Self(v)
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    pub fn get(&self, k: usize) -> u32 {
        self.0.get(k - 1).copied().unwrap_or(0)
    }

    /// `|α| = Σ α_k`.
    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }

    /// Largest mode with a nonzero entry, 0 for the zero index.
    pub fn support_max(&self) -> usize {
        self.0.iter().rposition(|&a| a > 0).map_or(0, |p| p + 1)
    }

    /// `α - e(k)`, or `None` when `α_k = 0`.
    pub fn lowered(&self, k: usize) -> Option<Self> {
        let a = *self.0.get(k - 1)?;
        if a == 0 {
            return None;
        }
        let mut v = self.0.clone();
        v[k - 1] -= 1;
        Some(Self(v))
    }

    /// Graded reverse-lexicographic comparison; `Greater` sorts first in
    /// enumeration order.
    pub fn grevlex_cmp(&self, other: &Self) -> Ordering {
        match self.order().cmp(&other.order()) {
            Ordering::Equal => {}
            o => return o,
        }
        let n = self.0.len().max(other.0.len());
        for k in (1..=n).rev() {
            match self.get(k).cmp(&other.get(k)) {
                Ordering::Equal => continue,
                // Smaller trailing entry means larger in grevlex.
                o => return o.reverse(),
            }
        }
        Ordering::Equal
    }
}

/// `ξ_α = Π_k He_{α_k}(ξ_k) / sqrt(α_k!)` over the support of `α`.
pub fn xi_functional(alpha: &MultiIndex, nr: &NoiseRealization) -> Result<f64> {
    if alpha.support_max() > nr.modes {
        return Err(Error::Index(format!(
            "multi-index supported on mode {} but realization has {} modes",
            alpha.support_max(),
            nr.modes
        )));
    }
    let mut prod = 1.0;
    for (i, &a) in alpha.entries().iter().enumerate() {
        if a == 0 {
            continue;
        }
        let fact: f64 = (1..=a).map(f64::from).product();
        prod *= hermite(a as usize, nr.xi[i]) / fact.sqrt();
    }
    Ok(prod)
}

/// All multi-indices of order exactly `n` over `modes` modes, in descending
/// grevlex order.
pub fn enumerate_multiindices(modes: usize, n: u32) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    let mut cur = vec![0u32; modes];
    fill(&mut cur, 0, n, &mut out);
    out.sort_by(|a, b| b.grevlex_cmp(a));
    out
}

fn fill(cur: &mut Vec<u32>, pos: usize, remaining: u32, out: &mut Vec<MultiIndex>) {
    if pos + 1 >= cur.len() {
        if let Some(last) = cur.last_mut() {
            *last = remaining;
            out.push(MultiIndex(cur.clone()));
        } else if remaining == 0 {
            out.push(MultiIndex(Vec::new()));
        }
        return;
    }
    for a in (0..=remaining).rev() {
        cur[pos] = a;
        fill(cur, pos + 1, remaining - a, out);
    }
    cur[pos] = 0;
}

/// `C(n + K - 1, K - 1)`, the number of order-`n` indices over `K` modes.
pub fn multiindex_count(modes: usize, n: u32) -> usize {
    if modes == 0 {
        return usize::from(n == 0);
    }
    let (top, k) = (n as usize + modes - 1, modes - 1);
    let k = k.min(top - k);
    (0..k).fold(1usize, |acc, i| acc * (top - i) / (i + 1))
}
