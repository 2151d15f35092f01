//! Independent numerical oracles shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

/// Adaptive Simpson on `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn rec<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
            + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 40)
}

/// Gauss–Legendre nodes and weights on [-1, 1] from the three-term
/// recurrence and Newton's method.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                let (mut p0, mut p1) = (1.0, z);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                let dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
                w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
                break;
            }
        }
        x[i] = z;
    }
    (x, w)
}

/// Composite 20-point Gauss–Legendre over `panels` equal panels.
pub fn composite_gl<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, panels: usize) -> f64 {
    let (x, w) = gauss_legendre(20);
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let c = a + (p as f64 + 0.5) * h;
        let mut s = 0.0;
        for (xi, wi) in x.iter().zip(&w) {
            s += wi * f(c + 0.5 * h * xi);
        }
        total += 0.5 * h * s;
    }
    total
}

/// `∫_0^t ∫_0^s e^{-a(t-s)} e^{-b(s-r)} e^{-c r} dr ds` by nested quadrature.
pub fn triple_conv_2d(a: f64, b: f64, c: f64, t: f64) -> f64 {
    let rate = a.max(b).max(c);
    let panels = ((rate * t / 2.0).ceil() as usize).max(8);
    composite_gl(
        |s| {
            let inner = composite_gl(|r| (-b * (s - r) - c * r).exp(), 0.0, s, panels);
            (-a * (t - s)).exp() * inner
        },
        0.0,
        t,
        panels,
    )
}

pub fn mode(k: usize, x: f64) -> f64 {
    (2.0 / PI).sqrt() * (k as f64 * x).sin()
}

/// `∫_0^π m_j m_k m_l` by dense quadrature.
pub fn triple_integral(j: usize, k: usize, l: usize) -> f64 {
    composite_gl(|x| mode(j, x) * mode(k, x) * mode(l, x), 0.0, PI, 16)
}

/// Dormand–Prince 5(4) with step control, for `y' = A y`.
pub fn dopri_linear(a: &[Vec<f64>], y0: &[f64], t_end: f64, tol: f64) -> Vec<f64> {
    let n = y0.len();
    let rhs = |y: &[f64]| -> Vec<f64> {
        (0..n)
            .map(|i| (0..n).map(|j| a[i][j] * y[j]).sum())
            .collect()
    };
    const C: [[f64; 6]; 6] = [
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [
            19372.0 / 6561.0,
            -25360.0 / 2187.0,
            64448.0 / 6561.0,
            -212.0 / 729.0,
            0.0,
            0.0,
        ],
        [
            9017.0 / 3168.0,
            -355.0 / 33.0,
            46732.0 / 5247.0,
            49.0 / 176.0,
            -5103.0 / 18656.0,
            0.0,
        ],
        [
            35.0 / 384.0,
            0.0,
            500.0 / 1113.0,
            125.0 / 192.0,
            -2187.0 / 6784.0,
            11.0 / 84.0,
        ],
    ];
    const E: [f64; 7] = [
        71.0 / 57600.0,
        0.0,
        -71.0 / 16695.0,
        71.0 / 1920.0,
        -17253.0 / 339200.0,
        22.0 / 525.0,
        -1.0 / 40.0,
    ];
    let mut y = y0.to_vec();
    let mut t = 0.0;
    let mut h = 1e-4;
    while t < t_end {
        if t + h > t_end {
            h = t_end - t;
        }
        let mut k: Vec<Vec<f64>> = vec![rhs(&y)];
        for row in C.iter() {
            let stage: Vec<f64> = (0..n)
                .map(|i| y[i] + h * row.iter().zip(&k).map(|(c, kk)| c * kk[i]).sum::<f64>())
                .collect();
            k.push(rhs(&stage));
        }
        // k[6] is the derivative at the 5th-order solution (FSAL).
        let y5: Vec<f64> = (0..n)
            .map(|i| y[i] + h * C[5].iter().zip(&k).map(|(c, kk)| c * kk[i]).sum::<f64>())
            .collect();
        let err = (0..n)
            .map(|i| (h * E.iter().zip(&k).map(|(e, kk)| e * kk[i]).sum::<f64>()).abs())
            .fold(0.0, f64::max);
        if err <= tol {
            t += h;
            y = y5;
        }
        let factor = if err == 0.0 {
            5.0
        } else {
            0.9 * (tol / err).powf(0.2)
        };
        h *= factor.clamp(0.2, 5.0);
    }
    y
}

/// Deterministic uniform stream for test inputs.
pub struct Uniform(rand_chacha::ChaCha8Rng);

impl Uniform {
    pub fn new(seed: u64) -> Self {
        use rand_core::SeedableRng;
        Self(rand_chacha::ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn next_f64(&mut self) -> f64 {
        use rand_core::RngCore;
        (self.0.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }
}
