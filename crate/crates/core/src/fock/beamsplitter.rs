use nalgebra::DMatrix;
use ndarray::{ArrayD, Axis, Zip};

use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BeamsplitterKind {
    /// Labels mix as `[[cos θ/2, i sin θ/2], [i sin θ/2, cos θ/2]]`;
    /// generator `exp[i(θ/2)(a b† + a† b)]`.
    PhaseCoupled,
    /// Labels mix as `[[cos φ, sin φ], [−sin φ, cos φ]]`;
    /// generator `exp[φ(a† b − a b†)]`.
    RealCoupled,
}

/// Two-mode passive linear optics, specified by its action on coherent labels:
/// `U|γ⟩|β⟩ = |γ'⟩|β'⟩` with `(γ', β') = M (γ, β)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamsplitterConvention {
    pub kind: BeamsplitterKind,
    pub angle: f64,
}

impl BeamsplitterConvention {
    pub fn phase_coupled(theta: f64) -> Self {
        Self { kind: BeamsplitterKind::PhaseCoupled, angle: theta }
    }

    pub fn real_coupled(phi: f64) -> Self {
        Self { kind: BeamsplitterKind::RealCoupled, angle: phi }
    }

    /// The 50:50 splitter used for Bell measurements: `(γ, β) → ((γ+β)/√2, (β−γ)/√2)`.
    pub fn balanced() -> Self {
        Self::real_coupled(std::f64::consts::FRAC_PI_4)
    }

    pub fn inverse(&self) -> Self {
        Self { kind: self.kind, angle: -self.angle }
    }

    pub fn label_matrix(&self) -> [[C64; 2]; 2] {
        match self.kind {
            BeamsplitterKind::PhaseCoupled => {
                let (s, c) = (self.angle / 2.0).sin_cos();
                [[C64::new(c, 0.0), C64::new(0.0, s)], [C64::new(0.0, s), C64::new(c, 0.0)]]
            }
            BeamsplitterKind::RealCoupled => {
                let (s, c) = self.angle.sin_cos();
                [[C64::new(c, 0.0), C64::new(s, 0.0)], [C64::new(-s, 0.0), C64::new(c, 0.0)]]
            }
        }
    }

    pub fn map_labels(&self, first: C64, second: C64) -> (C64, C64) {
        let m = self.label_matrix();
        (m[0][0] * first + m[0][1] * second, m[1][0] * first + m[1][1] * second)
    }

    /// Hermitian `K` with `label_matrix = exp(iK)`; the Fock-space unitary is
    /// `exp(i Σ K_jk a_j† a_k)`.
    fn generator(&self) -> [[C64; 2]; 2] {
        let zero = C64::new(0.0, 0.0);
        match self.kind {
            BeamsplitterKind::PhaseCoupled => {
                let h = C64::new(self.angle / 2.0, 0.0);
                [[zero, h], [h, zero]]
            }
            BeamsplitterKind::RealCoupled => {
                let p = self.angle;
                [[zero, C64::new(0.0, -p)], [C64::new(0.0, p), zero]]
            }
        }
    }

    /// Unitary restricted to total photon number `total`, in the basis
    /// `|p, total−p⟩`, `p = 0..=total`.
    pub fn number_block(&self, total: usize) -> DMatrix<C64> {
        let k = self.generator();
        let dim = total + 1;
        let mut h = DMatrix::<C64>::zeros(dim, dim);
        for p in 0..dim {
            h[(p, p)] = k[0][0] * p as f64 + k[1][1] * (total - p) as f64;
            if p < total {
                let amp = ((p + 1) as f64).sqrt() * ((total - p) as f64).sqrt();
                h[(p + 1, p)] = k[0][1] * amp;
                h[(p, p + 1)] = k[1][0] * amp;
            }
        }
        let eig = h.symmetric_eigen();
        let phases = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| C64::from_polar(1.0, l)));
        &eig.eigenvectors * phases * eig.eigenvectors.adjoint()
    }
}

/// Applies the splitter to axes `i`, `j` of a tensor with uniform cutoff.
pub(super) fn apply(amps: &ArrayD<C64>, i: usize, j: usize, conv: BeamsplitterConvention) -> ArrayD<C64> {
    let cutoff = amps.shape()[0] - 1;
    let mut out = ArrayD::<C64>::zeros(amps.raw_dim());
    // after removing axis `hi` first, `lo` keeps its index
    let (hi, lo) = if i > j { (i, j) } else { (j, i) };
    let slice_index = |pi: usize, pj: usize| if i > j { (pi, pj) } else { (pj, pi) };
    for total in 0..=2 * cutoff {
        let p_min = total.saturating_sub(cutoff);
        let p_max = total.min(cutoff);
        let block = conv.number_block(total);
        for p_in in p_min..=p_max {
            let (h_in, l_in) = slice_index(p_in, total - p_in);
            let src = amps.index_axis(Axis(hi), h_in);
            let src = src.index_axis(Axis(lo), l_in);
            if src.iter().all(|a| *a == C64::new(0.0, 0.0)) {
                continue;
            }
            for p_out in p_min..=p_max {
                let u = block[(p_out, p_in)];
                if u == C64::new(0.0, 0.0) {
                    continue;
                }
                let (h_out, l_out) = slice_index(p_out, total - p_out);
                let mut dst = out.index_axis_mut(Axis(hi), h_out);
                let mut dst = dst.index_axis_mut(Axis(lo), l_out);
                Zip::from(&mut dst).and(&src).for_each(|d, s| *d += u * s);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_blocks_are_unitary() {
        for conv in
            [BeamsplitterConvention::balanced(), BeamsplitterConvention::phase_coupled(0.37), BeamsplitterConvention::real_coupled(-1.1)]
        {
            for total in [0, 1, 5, 17, 40] {
                let u = conv.number_block(total);
                let err = (&u.adjoint() * &u - DMatrix::<C64>::identity(total + 1, total + 1)).camax();
                assert!(err < 1e-10, "{conv:?} N={total}: {err}");
            }
        }
    }

    #[test]
    fn single_photon_block_matches_label_matrix() {
        // |1,0⟩ = a†|0,0⟩ maps to Σ_j M_j0 a_j†|0,0⟩
        for conv in [BeamsplitterConvention::phase_coupled(0.8), BeamsplitterConvention::real_coupled(0.6)] {
            let u = conv.number_block(1);
            let m = conv.label_matrix();
            // basis index p = photons in the first mode: |0,1⟩ is 0, |1,0⟩ is 1
            assert!((u[(1, 1)] - m[0][0]).norm() < 1e-13);
            assert!((u[(0, 1)] - m[1][0]).norm() < 1e-13);
            assert!((u[(1, 0)] - m[0][1]).norm() < 1e-13);
            assert!((u[(0, 0)] - m[1][1]).norm() < 1e-13);
        }
    }

    #[test]
    fn inverse_undoes_labels() {
        let conv = BeamsplitterConvention::phase_coupled(1.3);
        let (a, b) = conv.map_labels(C64::new(1.0, 0.5), C64::new(-0.3, 0.2));
        let (x, y) = conv.inverse().map_labels(a, b);
        assert!((x - C64::new(1.0, 0.5)).norm() < 1e-14);
        assert!((y - C64::new(-0.3, 0.2)).norm() < 1e-14);
    }
}
