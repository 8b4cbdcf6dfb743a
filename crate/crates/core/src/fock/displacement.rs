use ndarray::Array2;

use crate::numeric::coherent_amplitudes;
use crate::C64;

/// `⟨m|D(β)|n⟩` for `m, n ≤ cutoff`.
///
/// Column `n` is `(a† − β*)ⁿ|β⟩/√(n!)`, built column by column; every retained
/// element is exact because `a†` only couples `m−1 → m`.
pub fn displacement_matrix(beta: C64, cutoff: usize) -> Array2<C64> {
    let dim = cutoff + 1;
    let mut d = Array2::<C64>::zeros((dim, dim));
    for (m, a) in coherent_amplitudes(beta, cutoff).into_iter().enumerate() {
        d[(m, 0)] = a;
    }
    let bc = beta.conj();
    for n in 1..dim {
        let inv = 1.0 / (n as f64).sqrt();
        for m in 0..dim {
            let raise = if m > 0 { (m as f64).sqrt() * d[(m - 1, n - 1)] } else { C64::new(0.0, 0.0) };
            d[(m, n)] = (raise - bc * d[(m, n - 1)]) * inv;
        }
    }
    d
}

/// `D(β)·exp(−i Im(β) a)`: on real-amplitude coherent states it shifts the
/// label by `β` without the displacement phase, `|γ⟩ → |γ + β⟩`. Not unitary.
pub fn translation_matrix(beta: C64, cutoff: usize) -> Array2<C64> {
    let dim = cutoff + 1;
    let c = C64::new(0.0, -beta.im);
    // exp(c a) has ⟨n|·|n+k⟩ = cᵏ/k! √((n+k)!/n!).
    let mut e = Array2::<C64>::zeros((dim, dim));
    for n in 0..dim {
        let mut term = C64::new(1.0, 0.0);
        e[(n, n)] = term;
        for k in 1..dim - n {
            term *= c * ((n + k) as f64).sqrt() / k as f64;
            e[(n, n + k)] = term;
        }
    }
    displacement_matrix(beta, cutoff).dot(&e)
}
