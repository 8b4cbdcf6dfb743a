//! Homodyne statistics in the convention `x = (a + a†)/√2`, so the vacuum
//! has variance ½. The rotated quadrature is `x_φ = (a e^{−iφ} + a† e^{iφ})/√2`
//! and `⟨x_φ|n⟩ = e^{−inφ} ψₙ(x)`.

use super::FockVector;
use crate::C64;

/// Hermite functions `ψ₀(x) … ψ_{nmax}(x)` by the normalised recurrence.
pub fn hermite_functions(x: f64, nmax: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(nmax + 1);
    let psi0 = std::f64::consts::PI.powf(-0.25) * (-0.5 * x * x).exp();
    out.push(psi0);
    if nmax >= 1 {
        out.push(std::f64::consts::SQRT_2 * x * psi0);
    }
    for n in 1..nmax {
        let k = n as f64;
        let next = (2.0 / (k + 1.0)).sqrt() * x * out[n] - (k / (k + 1.0)).sqrt() * out[n - 1];
        out.push(next);
    }
    out
}

/// Probability density of `x_φ` sampled at `grid`.
pub fn quadrature_distribution(state: &FockVector, phase: f64, grid: &[f64]) -> Vec<f64> {
    let cutoff = state.cutoff();
    let rotated: Vec<C64> = state.amplitudes().iter().enumerate().map(|(n, a)| a * C64::from_polar(1.0, -phase * n as f64)).collect();
    grid.iter()
        .map(|&x| {
            let psi = hermite_functions(x, cutoff);
            rotated.iter().zip(&psi).map(|(a, h)| a * h).sum::<C64>().norm_sqr()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{cat, Parity};
    use std::f64::consts::{FRAC_PI_2, PI};

    fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
    }

    fn trapezoid(xs: &[f64], ys: &[f64]) -> f64 {
        xs.windows(2).zip(ys.windows(2)).map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1])).sum()
    }

    #[test]
    fn vacuum_is_gaussian_with_half_variance() {
        let xs = grid(-4.0, 4.0, 81);
        let p = quadrature_distribution(&FockVector::vacuum(10), 0.3, &xs);
        for (x, px) in xs.iter().zip(&p) {
            assert!((px - (-x * x).exp() / PI.sqrt()).abs() < 1e-14);
        }
    }

    #[test]
    fn distributions_integrate_to_one() {
        let xs = grid(-10.0, 10.0, 4001);
        let state = cat(2.0, Parity::Even, 40).unwrap();
        for phase in [0.0, 0.7, FRAC_PI_2] {
            let p = quadrature_distribution(&state, phase, &xs);
            assert!((trapezoid(&xs, &p) - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn imaginary_quadrature_fringes_interleave() {
        let xs = grid(-2.5, 2.5, 5001);
        let plus = quadrature_distribution(&cat(2.0, Parity::Even, 40).unwrap(), FRAC_PI_2, &xs);
        let minus = quadrature_distribution(&cat(2.0, Parity::Odd, 40).unwrap(), FRAC_PI_2, &xs);
        let peak = plus.iter().cloned().fold(0.0, f64::max);
        let dark = |p: &[f64]| -> Vec<usize> {
            (1..xs.len() - 1).filter(|&k| p[k] <= p[k - 1] && p[k] < p[k + 1] && p[k] < 1e-6 * peak).collect()
        };
        let (dp, dm) = (dark(&plus), dark(&minus));
        assert!(dp.len() >= 3 && dm.len() >= 3);
        // where one pattern is dark the other carries the full local intensity
        for &k in &dp {
            assert!(minus[k] / (plus[k] + minus[k]) > 1.0 - 1e-5);
        }
        for &k in &dm {
            assert!(plus[k] / (plus[k] + minus[k]) > 1.0 - 1e-5);
        }
        // dark fringes of the two patterns alternate
        let mut marks: Vec<(usize, bool)> = dp.iter().map(|&k| (k, true)).chain(dm.iter().map(|&k| (k, false))).collect();
        marks.sort();
        assert!(marks.windows(2).all(|w| w[0].1 != w[1].1));
    }
}
