//! Independent reference computations used by the integration tests. None of
//! these share code with the library paths they check.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use sqzd_core::quantum::C64;

/// Fourth-order Runge–Kutta for `dψ/dt = −i H ψ` with `steps` equal steps.
pub fn rk4_evolve(h: &DMatrix<C64>, psi: &DVector<C64>, t: f64, steps: usize) -> DVector<C64> {
    let dt = t / steps as f64;
    let mi = C64::new(0.0, -1.0);
    let f = |v: &DVector<C64>| (h * v) * mi;
    let mut psi = psi.clone();
    for _ in 0..steps {
        let k1 = f(&psi);
        let k2 = f(&(&psi + &k1 * C64::from(dt / 2.0)));
        let k3 = f(&(&psi + &k2 * C64::from(dt / 2.0)));
        let k4 = f(&(&psi + &k3 * C64::from(dt)));
        psi += (k1 + k2 * C64::from(2.0) + k3 * C64::from(2.0) + k4) * C64::from(dt / 6.0);
    }
    psi
}

/// `|⟨ψ₀|ψ(t)⟩|²` after RK4 evolution through piecewise-constant segments.
pub fn rk4_survival(segments: &[(DMatrix<C64>, f64)], psi0: &DVector<C64>, steps: usize) -> f64 {
    let mut psi = psi0.clone();
    for (h, t) in segments {
        psi = rk4_evolve(h, &psi, *t, steps);
    }
    psi0.dotc(&psi).norm_sqr()
}

/// `exp(A)` by scaling and squaring with a truncated Taylor series.
pub fn expm_taylor(a: &DMatrix<C64>) -> DMatrix<C64> {
    let n = a.nrows();
    let norm: f64 = a.iter().map(|z| z.norm()).sum();
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let scaled = a * C64::from(0.5f64.powi(squarings as i32));
    let mut term = DMatrix::<C64>::identity(n, n);
    let mut sum = term.clone();
    for k in 1..=30 {
        term = &term * &scaled * C64::from(1.0 / k as f64);
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// `exp(−i H t)` through [`expm_taylor`].
pub fn unitary_taylor(h: &DMatrix<C64>, t: f64) -> DMatrix<C64> {
    expm_taylor(&(h * C64::new(0.0, -t)))
}

/// Textbook Rabi formula for `H = Δσz + Ωσx` from `|0⟩`:
/// `q = 1 − Ω²/(Ω²+Δ²)·sin²(√(Ω²+Δ²)·t)`.
pub fn rabi_q(detuning: f64, omega: f64, t: f64) -> f64 {
    let k2 = omega * omega + detuning * detuning;
    if k2 == 0.0 {
        return 1.0;
    }
    1.0 - omega * omega / k2 * (k2.sqrt() * t).sin().powi(2)
}

/// Exact `(⟨P(j)⟩, ⟨P²(j)⟩)`, `j = 1…m`, by enumerating every level path of
/// the discrete-hold chain: first level from `p`, then each step keeps the
/// level with probability `1 − u` or redraws it from `p`.
pub fn enumerate_paths(q: &[f64], p: &[f64], u: f64, m: usize) -> Vec<(f64, f64)> {
    let n = q.len();
    let total = n.pow(m as u32);
    let mut out = vec![(0.0, 0.0); m];
    for code in 0..total {
        let mut c = code;
        let path: Vec<usize> = (0..m)
            .map(|_| {
                let l = c % n;
                c /= n;
                l
            })
            .collect();
        let mut weight = p[path[0]];
        let mut prod = q[path[0]];
        out[0].0 += weight * prod;
        out[0].1 += weight * prod * prod;
        for j in 1..m {
            let stay = if path[j] == path[j - 1] { 1.0 - u } else { 0.0 };
            weight *= u * p[path[j]] + stay;
            prod *= q[path[j]];
            out[j].0 += weight * prod;
            out[j].1 += weight * prod * prod;
        }
    }
    // weights of the prefix of length j+1 sum over the suffixes to the
    // prefix weight, so each entry above was overcounted by n^(m-j-1)
    for (j, o) in out.iter_mut().enumerate() {
        let dup = n.pow((m - j - 1) as u32) as f64;
        o.0 /= dup;
        o.1 /= dup;
    }
    out
}

/// Two-sided check of a count against a Binomial(n, p) mean, in units of its
/// standard deviation.
pub fn binomial_z(count: u64, n: u64, p: f64) -> f64 {
    let mean = n as f64 * p;
    let sd = (n as f64 * p * (1.0 - p)).sqrt();
    (count as f64 - mean) / sd
}

/// Pearson χ² statistic of observed counts against expected probabilities.
pub fn chi_square(counts: &[u64], probs: &[f64]) -> f64 {
    let n: u64 = counts.iter().sum();
    counts
        .iter()
        .zip(probs)
        .map(|(&c, &p)| {
            let e = n as f64 * p;
            (c as f64 - e).powi(2) / e
        })
        .sum()
}

/// Sample mean and population standard deviation.
pub fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}
