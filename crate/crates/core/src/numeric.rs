//! Small numerical helpers shared across modules.

use crate::C64;

/// Probabilities below this are treated as impossible events.
pub const PROBABILITY_FLOOR: f64 = 1e-30;

/// `ln(n!)` by direct summation; exact enough for the photon numbers in use.
pub fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// `⟨n|β⟩ = e^{−|β|²/2} βⁿ/√(n!)`.
pub fn coherent_amplitude(beta: C64, n: usize) -> C64 {
    let r = beta.norm();
    if r == 0.0 {
        return if n == 0 { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
    }
    let log_mag = -0.5 * r * r + n as f64 * r.ln() - 0.5 * ln_factorial(n);
    C64::from_polar(log_mag.exp(), n as f64 * beta.arg())
}

/// All of `⟨n|β⟩` for `n = 0..=cutoff`, by the ratio recurrence.
pub fn coherent_amplitudes(beta: C64, cutoff: usize) -> Vec<C64> {
    let mut out = Vec::with_capacity(cutoff + 1);
    let mut a = C64::new((-0.5 * beta.norm_sqr()).exp(), 0.0);
    out.push(a);
    for n in 1..=cutoff {
        a = a * beta / (n as f64).sqrt();
        out.push(a);
    }
    out
}

/// Golden-section maximisation of a unimodal function on `[lo, hi]`.
/// Returns `(argmax, max)`.
pub fn golden_section_max(mut f: impl FnMut(f64) -> f64, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    let fx = f(x);
    // endpoints are legitimate maxima for monotone functions on the bracket
    [(lo, f(lo)), (hi, f(hi)), (x, fx)].into_iter().fold((x, fx), |best, cand| if cand.1 > best.1 { cand } else { best })
}

/// Gauss–Legendre nodes and weights on `[a, b]`.
pub fn gauss_legendre(order: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let n = order;
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 0 { 1.0 } else { p1 };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((0.5 * (b - a) * x + 0.5 * (b + a), 0.5 * (b - a) * w));
    }
    out
}
