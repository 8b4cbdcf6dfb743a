//! Exact algebra on finite superpositions `Σᵢ cᵢ |β⃗ᵢ⟩` of multimode coherent
//! states. Displacements, phase shifts and beamsplitters map each term to one
//! term; photon counting multiplies coefficients by `⟨n|β⟩` and drops a mode.
//! All inner products reduce to [`overlap`].

mod qubit;

pub use qubit::QubitState;

use std::sync::OnceLock;

use nalgebra::DMatrix;
use ndarray::{ArrayD, IxDyn};

use crate::fock::{BeamsplitterConvention, MultiModeState, Parity, PureState};
use crate::numeric::{coherent_amplitude, coherent_amplitudes, PROBABILITY_FLOOR};
use crate::{Error, Result, C64};

/// Labels closer than this (max-norm over modes) are the same coherent state.
pub const LABEL_MERGE_TOLERANCE: f64 = 1e-12;

/// Labels closer than this count as the same code word in the orthonormal
/// (ideal-projection) picture.
pub const CODE_LABEL_TOLERANCE: f64 = 1e-9;

/// `⟨τ|α⟩ = exp[−(|τ|² + |α|²)/2 + τ*α]`.
pub fn overlap(tau: C64, alpha: C64) -> C64 {
    (-(tau.norm_sqr() + alpha.norm_sqr()) / 2.0 + tau.conj() * alpha).exp()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub coeff: C64,
    pub labels: Vec<C64>,
}

impl Term {
    fn same_labels(&self, other: &[C64], tol: f64) -> bool {
        self.labels.iter().zip(other).all(|(a, b)| (a - b).norm() <= tol)
    }

    fn overlap_with(&self, other: &Term) -> C64 {
        self.labels.iter().zip(&other.labels).map(|(a, b)| overlap(*a, *b)).product()
    }
}

/// Unnormalised superposition of `modes`-mode coherent states; the Gram norm
/// is computed on first use and cached.
#[derive(Debug, Clone)]
pub struct CoherentSuperposition {
    modes: usize,
    terms: Vec<Term>,
    norm: OnceLock<f64>,
}

impl PartialEq for CoherentSuperposition {
    fn eq(&self, other: &Self) -> bool {
        self.modes == other.modes && self.terms == other.terms
    }
}

impl CoherentSuperposition {
    /// Builds a superposition, merging terms whose labels coincide.
    pub fn new(modes: usize, terms: impl IntoIterator<Item = (C64, Vec<C64>)>) -> Result<Self> {
        let mut merged: Vec<Term> = Vec::new();
        for (coeff, labels) in terms {
            if labels.len() != modes {
                return Err(Error::DimensionMismatch(format!("term with {} labels in a {modes}-mode superposition", labels.len())));
            }
            Self::insert(&mut merged, coeff, labels);
        }
        Ok(Self::from_merged(modes, merged))
    }

    fn insert(terms: &mut Vec<Term>, coeff: C64, labels: Vec<C64>) {
        if coeff == C64::new(0.0, 0.0) {
            return;
        }
        match terms.iter_mut().find(|t| t.same_labels(&labels, LABEL_MERGE_TOLERANCE)) {
            Some(t) => t.coeff += coeff,
            None => terms.push(Term { coeff, labels }),
        }
    }

    fn from_merged(modes: usize, terms: Vec<Term>) -> Self {
        Self { modes, terms, norm: OnceLock::new() }
    }

    /// Rebuilds from per-term replacements, re-merging collisions.
    fn remap(&self, modes: usize, f: impl Fn(&Term) -> (C64, Vec<C64>)) -> Self {
        let mut merged = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            let (c, l) = f(t);
            Self::insert(&mut merged, c, l);
        }
        Self::from_merged(modes, merged)
    }

    pub fn vacuum(modes: usize) -> Self {
        Self::coherent(&vec![C64::new(0.0, 0.0); modes])
    }

    pub fn coherent(labels: &[C64]) -> Self {
        Self::from_merged(labels.len(), vec![Term { coeff: C64::new(1.0, 0.0), labels: labels.to_vec() }])
    }

    /// Normalised `(|−α⟩ ± |α⟩)/√N±`.
    pub fn cat(alpha: f64, parity: Parity) -> Result<Self> {
        let s =
            Self::new(1, [(C64::new(1.0, 0.0), vec![C64::new(-alpha, 0.0)]), (C64::new(parity.sign(), 0.0), vec![C64::new(alpha, 0.0)])])?;
        s.normalized()
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    fn check_mode(&self, mode: usize) -> Result<()> {
        if mode >= self.modes {
            return Err(Error::DimensionMismatch(format!("mode {mode} of a {}-mode superposition", self.modes)));
        }
        Ok(())
    }

    pub fn gram_matrix(&self) -> DMatrix<C64> {
        let n = self.terms.len();
        DMatrix::from_fn(n, n, |i, j| self.terms[i].overlap_with(&self.terms[j]))
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm_sqr();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::ZeroNorm);
        }
        let out = self.scaled(C64::new(1.0 / n.sqrt(), 0.0));
        let _ = out.norm.set(1.0);
        Ok(out)
    }

    pub fn scaled(&self, factor: C64) -> Self {
        let terms = self.terms.iter().map(|t| Term { coeff: t.coeff * factor, labels: t.labels.clone() }).collect();
        let out = Self::from_merged(self.modes, terms);
        if let Some(n) = self.norm.get() {
            let _ = out.norm.set(n * factor.norm_sqr());
        }
        out
    }

    /// Sum of two superpositions over the same modes.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.modes != other.modes {
            return Err(Error::DimensionMismatch(format!("{} vs {} modes", self.modes, other.modes)));
        }
        Self::new(self.modes, self.terms.iter().chain(&other.terms).map(|t| (t.coeff, t.labels.clone())))
    }

    /// Tensor product; the other state's modes are appended.
    pub fn tensor(&self, other: &Self) -> Self {
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                let mut labels = a.labels.clone();
                labels.extend_from_slice(&b.labels);
                Self::insert(&mut terms, a.coeff * b.coeff, labels);
            }
        }
        Self::from_merged(self.modes + other.modes, terms)
    }

    /// `D(β)` on one mode: `γ → γ + β` with phase `e^{(βγ* − β*γ)/2}`.
    pub fn displace(&self, mode: usize, beta: C64) -> Result<Self> {
        self.check_mode(mode)?;
        Ok(self.remap(self.modes, |t| {
            let g = t.labels[mode];
            let mut labels = t.labels.clone();
            labels[mode] = g + beta;
            (t.coeff * ((beta * g.conj() - beta.conj() * g) / 2.0).exp(), labels)
        }))
    }

    /// `γ → γ + β` on one mode with coefficients untouched. On real code
    /// words this is `D(β)` followed by undoing its phase `e^{iγ Im β}`.
    pub fn translate(&self, mode: usize, beta: C64) -> Result<Self> {
        self.check_mode(mode)?;
        Ok(self.remap(self.modes, |t| {
            let mut labels = t.labels.clone();
            labels[mode] += beta;
            (t.coeff, labels)
        }))
    }

    /// `e^{iφ n̂}` on one mode: `γ → e^{iφ} γ`.
    pub fn phase_rotate(&self, mode: usize, phi: f64) -> Result<Self> {
        self.check_mode(mode)?;
        let f = C64::from_polar(1.0, phi);
        Ok(self.remap(self.modes, |t| {
            let mut labels = t.labels.clone();
            labels[mode] *= f;
            (t.coeff, labels)
        }))
    }

    /// `e^{iπ n̂}` with labels negated exactly.
    pub fn bit_flip(&self, mode: usize) -> Result<Self> {
        self.check_mode(mode)?;
        Ok(self.remap(self.modes, |t| {
            let mut labels = t.labels.clone();
            labels[mode] = -labels[mode];
            (t.coeff, labels)
        }))
    }

    /// Logical sign flip on one mode: terms whose label has positive real
    /// part change sign.
    pub fn sign_flip(&self, mode: usize) -> Result<Self> {
        self.check_mode(mode)?;
        Ok(self.remap(self.modes, |t| {
            let s = if t.labels[mode].re > 0.0 { -1.0 } else { 1.0 };
            (t.coeff * s, t.labels.clone())
        }))
    }

    pub fn beamsplitter(&self, modes: (usize, usize), conv: BeamsplitterConvention) -> Result<Self> {
        let (i, j) = modes;
        self.check_mode(i)?;
        self.check_mode(j)?;
        if i == j {
            return Err(Error::invalid("beamsplitter needs two distinct modes"));
        }
        Ok(self.remap(self.modes, |t| {
            let mut labels = t.labels.clone();
            let (a, b) = conv.map_labels(t.labels[i], t.labels[j]);
            labels[i] = a;
            labels[j] = b;
            (t.coeff, labels)
        }))
    }

    /// Unnormalised `⟨n|_mode ψ⟩` on the remaining modes.
    pub fn project_unnormalized(&self, mode: usize, n: usize) -> Result<Self> {
        self.check_mode(mode)?;
        Ok(self.remap(self.modes - 1, |t| {
            let mut labels = t.labels.clone();
            let l = labels.remove(mode);
            (t.coeff * coherent_amplitude(l, n), labels)
        }))
    }

    /// Projects `mode` onto `|n⟩`; returns the normalised remainder and the
    /// outcome probability.
    pub fn project_fock(&self, mode: usize, n: usize) -> Result<(Self, f64)> {
        let total = self.norm_sqr();
        let rest = self.project_unnormalized(mode, n)?;
        let probability = rest.norm_sqr() / total;
        if !(probability >= PROBABILITY_FLOOR) {
            return Err(Error::ZeroProbability { probability });
        }
        Ok((rest.normalized()?, probability))
    }

    /// Annihilation operator on one mode: coefficients pick up their label.
    pub fn annihilate(&self, mode: usize) -> Result<Self> {
        self.check_mode(mode)?;
        Ok(self.remap(self.modes, |t| (t.coeff * t.labels[mode], t.labels.clone())))
    }

    /// `e^{−γt n̂/2}` on one mode with `κ = e^{−γt/2}`:
    /// `|β⟩ → e^{−|β|²(1−κ²)/2} |κβ⟩`.
    pub fn decay(&self, mode: usize, kappa: f64) -> Result<Self> {
        self.check_mode(mode)?;
        Ok(self.remap(self.modes, |t| {
            let b = t.labels[mode];
            let mut labels = t.labels.clone();
            labels[mode] = b * kappa;
            (t.coeff * (-b.norm_sqr() * (1.0 - kappa * kappa) / 2.0).exp(), labels)
        }))
    }

    /// Moves mode `from` to position `to`, shifting the modes in between.
    pub fn move_mode(&self, from: usize, to: usize) -> Result<Self> {
        self.check_mode(from)?;
        self.check_mode(to)?;
        Ok(self.remap(self.modes, |t| {
            let mut labels = t.labels.clone();
            let l = labels.remove(from);
            labels.insert(to, l);
            (t.coeff, labels)
        }))
    }

    /// Replaces each label on `mode` by the code word `±amplitude` of the same
    /// sign of real part, weighting by the overlap with that code word; the
    /// overlap with the opposite code word is dropped.
    pub fn snap_to_code(&self, mode: usize, amplitude: f64) -> Result<Self> {
        self.check_mode(mode)?;
        Ok(self.remap(self.modes, |t| {
            let l = t.labels[mode];
            let word = C64::new(if l.re >= 0.0 { amplitude } else { -amplitude }, 0.0);
            let mut labels = t.labels.clone();
            labels[mode] = word;
            (t.coeff * overlap(word, l), labels)
        }))
    }

    /// Inner product treating distinct labels as orthogonal.
    pub fn code_inner(&self, other: &Self) -> Result<C64> {
        self.check_same_modes(other)?;
        let mut acc = C64::new(0.0, 0.0);
        for a in &self.terms {
            for b in &other.terms {
                if a.same_labels(&b.labels, CODE_LABEL_TOLERANCE) {
                    acc += a.coeff.conj() * b.coeff;
                }
            }
        }
        Ok(acc)
    }

    pub fn code_norm_sqr(&self) -> f64 {
        self.code_inner(self).map(|c| c.re).unwrap_or(0.0)
    }

    fn check_same_modes(&self, other: &Self) -> Result<()> {
        if self.modes != other.modes {
            return Err(Error::DimensionMismatch(format!("{} vs {} modes", self.modes, other.modes)));
        }
        Ok(())
    }

    pub fn fidelity(&self, other: &Self) -> Result<f64> {
        crate::fock::fidelity(self, other)
    }

    /// Photon-number distribution of one mode with the others traced out.
    pub fn marginal(&self, mode: usize, nmax: usize) -> Result<Vec<f64>> {
        self.check_mode(mode)?;
        let total = self.norm_sqr();
        let nterms = self.terms.len();
        let others = DMatrix::from_fn(nterms, nterms, |i, j| {
            self.terms[i]
                .labels
                .iter()
                .zip(&self.terms[j].labels)
                .enumerate()
                .filter(|(k, _)| *k != mode)
                .map(|(_, (a, b))| overlap(*a, *b))
                .product::<C64>()
        });
        let amps: Vec<Vec<C64>> = self.terms.iter().map(|t| coherent_amplitudes(t.labels[mode], nmax)).collect();
        Ok((0..=nmax)
            .map(|n| {
                let mut p = C64::new(0.0, 0.0);
                for i in 0..nterms {
                    for j in 0..nterms {
                        p += (self.terms[i].coeff * amps[i][n]).conj() * self.terms[j].coeff * amps[j][n] * others[(i, j)];
                    }
                }
                p.re / total
            })
            .collect())
    }

    /// Dense Fock-space image with the given per-mode cutoff.
    pub fn to_fock(&self, cutoff: usize) -> Result<MultiModeState> {
        let shape = vec![cutoff + 1; self.modes];
        let mut amps = ArrayD::<C64>::zeros(IxDyn(&shape));
        for t in &self.terms {
            let factors: Vec<Vec<C64>> = t.labels.iter().map(|l| coherent_amplitudes(*l, cutoff)).collect();
            for (idx, a) in amps.indexed_iter_mut() {
                let mut v = t.coeff;
                for (k, f) in factors.iter().enumerate() {
                    v *= f[idx[k]];
                }
                *a += v;
            }
        }
        let state = MultiModeState::from_array(amps)?;
        let kept = state.norm_sqr();
        let missing = ((self.norm_sqr() - kept) / self.norm_sqr()).max(0.0);
        if missing > crate::fock::DEFAULT_TAIL_TOLERANCE {
            return Err(Error::Truncation { tail: missing, tolerance: crate::fock::DEFAULT_TAIL_TOLERANCE, cutoff });
        }
        Ok(state)
    }

    /// Largest label magnitude; sizes Fock cutoffs and count grids.
    pub fn max_amplitude(&self) -> f64 {
        self.terms.iter().flat_map(|t| t.labels.iter()).map(|l| l.norm()).fold(0.0, f64::max)
    }
}

impl PureState for CoherentSuperposition {
    fn inner(&self, other: &Self) -> Result<C64> {
        self.check_same_modes(other)?;
        let mut acc = C64::new(0.0, 0.0);
        for a in &self.terms {
            for b in &other.terms {
                acc += a.coeff.conj() * b.coeff * a.overlap_with(b);
            }
        }
        Ok(acc)
    }

    fn norm_sqr(&self) -> f64 {
        *self.norm.get_or_init(|| self.inner(self).map(|c| c.re).unwrap_or(0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{coherent, fidelity};
    use std::f64::consts::FRAC_PI_4;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn overlap_basics() {
        assert!((overlap(c(0.3, -1.2), c(0.3, -1.2)) - 1.0).norm() < 1e-15);
        assert!((overlap(c(2.0, 0.0), c(-2.0, 0.0)).norm_sqr() - (-16f64).exp()).abs() < 1e-22);
    }

    #[test]
    fn overlap_matches_fock_sum() {
        for (t, a) in [(c(0.5, 1.0), c(-1.0, 0.2)), (c(2.0, 0.0), c(-2.0, 0.0)), (c(1.5, -1.5), c(1.2, -1.7))] {
            let ft = coherent(t, 60).unwrap();
            let fa = coherent(a, 60).unwrap();
            assert!((ft.inner(&fa).unwrap() - overlap(t, a)).norm() < 1e-12);
        }
    }

    #[test]
    fn displacement_labels_and_round_trip() {
        let v = CoherentSuperposition::vacuum(1);
        assert_eq!(v.displace(0, c(0.4, 0.1)).unwrap(), CoherentSuperposition::coherent(&[c(0.4, 0.1)]));

        let q = QubitState::new(c(0.6, 0.0), c(0.0, 0.8), 2.0).unwrap().superposition();
        let theta = std::f64::consts::FRAC_PI_4;
        let shifted = q.displace(0, c(0.0, theta / 4.0)).unwrap();
        // both labels move by iθ/(2α): −α(1 − iθ/2α²) and α(1 + iθ/2α²)
        let labels: Vec<C64> = shifted.terms().iter().map(|t| t.labels[0]).collect();
        assert!((labels[0] - c(-2.0, theta / 4.0)).norm() < 1e-15);
        assert!((labels[1] - c(2.0, theta / 4.0)).norm() < 1e-15);

        let back = shifted.displace(0, c(0.0, -theta / 4.0)).unwrap();
        assert!((back.fidelity(&q).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(back.terms().len(), 2);
    }

    #[test]
    fn split_cat_is_bell_pair() {
        let alpha = 1.7;
        let src = CoherentSuperposition::cat(2f64.sqrt() * alpha, Parity::Even).unwrap().tensor(&CoherentSuperposition::vacuum(1));
        let out = src.beamsplitter((0, 1), BeamsplitterConvention::real_coupled(-FRAC_PI_4)).unwrap();
        let ideal = CoherentSuperposition::new(
            2,
            [(c(1.0, 0.0), vec![c(-alpha, 0.0), c(-alpha, 0.0)]), (c(1.0, 0.0), vec![c(alpha, 0.0), c(alpha, 0.0)])],
        )
        .unwrap();
        assert!((out.fidelity(&ideal).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn projection_completeness() {
        let s = QubitState::new(c(0.3, 0.1), c(-0.7, 0.2), 2.0)
            .unwrap()
            .superposition()
            .tensor(&CoherentSuperposition::coherent(&[c(1.0, 1.0)]));
        let total: f64 = (0..=60).map(|n| s.project_fock(0, n).map(|(_, p)| p).unwrap_or(0.0)).sum();
        assert!((total - 1.0).abs() < 1e-10);
        let (rest, p) = CoherentSuperposition::vacuum(2).project_fock(0, 0).unwrap();
        assert_eq!(p, 1.0);
        assert!((rest.fidelity(&CoherentSuperposition::vacuum(1)).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn opposite_cats_are_orthogonal() {
        let plus = CoherentSuperposition::cat(1.3, Parity::Even).unwrap();
        let minus = CoherentSuperposition::cat(1.3, Parity::Odd).unwrap();
        assert!(plus.fidelity(&minus).unwrap() < 1e-30);
        assert!((plus.fidelity(&plus).unwrap() - 1.0).abs() < 1e-15);
        let fp = crate::fock::cat(1.3, Parity::Even, 40).unwrap();
        let fm = crate::fock::cat(1.3, Parity::Odd, 40).unwrap();
        assert!(fidelity(&fp, &fm).unwrap() < 1e-30);
    }

    #[test]
    fn labels_merge_within_tolerance() {
        let s = CoherentSuperposition::new(
            1,
            [(c(1.0, 0.0), vec![c(1.0, 0.0)]), (c(2.0, 0.0), vec![c(1.0 + 1e-13, 0.0)]), (c(1.0, 0.0), vec![c(-1.0, 0.0)])],
        )
        .unwrap();
        assert_eq!(s.terms().len(), 2);
        assert_eq!(s.terms()[0].coeff, c(3.0, 0.0));
    }

    #[test]
    fn gram_matrix_is_positive_semidefinite() {
        let s = CoherentSuperposition::new(
            2,
            (0..6).map(|k| {
                let x = k as f64 * 0.3;
                (c(1.0, x), vec![c(x, -0.5 * x), c(0.2 - x, 0.1)])
            }),
        )
        .unwrap();
        let eig = s.gram_matrix().symmetric_eigen();
        assert!(eig.eigenvalues.min() >= -1e-12);
    }

    #[test]
    fn marginal_matches_fock_image() {
        let s = QubitState::worst_case(1.2).unwrap().superposition().tensor(&CoherentSuperposition::coherent(&[c(0.5, -0.2)]));
        let s = s.beamsplitter((0, 1), BeamsplitterConvention::balanced()).unwrap();
        let oracle = s.marginal(1, 30).unwrap();
        let dense = s.to_fock(30).unwrap().marginal(1).unwrap();
        for (a, b) in oracle.iter().zip(&dense) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn snap_keeps_matching_code_word() {
        let s = CoherentSuperposition::coherent(&[c(-2.0, 0.1)]);
        let snapped = s.snap_to_code(0, 2.0).unwrap();
        assert_eq!(snapped.terms()[0].labels[0], c(-2.0, 0.0));
        assert!((snapped.terms()[0].coeff - overlap(c(-2.0, 0.0), c(-2.0, 0.1))).norm() < 1e-15);
    }
}
