//! Truncated Fock-space states and the matrix actions of linear optics.
//!
//! Every mode is truncated at the same photon number `cutoff`. Preparation
//! routines refuse to return states whose weight near the cutoff exceeds the
//! tail tolerance instead of silently renormalising.

mod beamsplitter;
mod displacement;
mod quadrature;

pub use beamsplitter::{BeamsplitterConvention, BeamsplitterKind};
pub use displacement::{displacement_matrix, translation_matrix};
pub use quadrature::{hermite_functions, quadrature_distribution};

use ndarray::{ArrayD, Axis, IxDyn};

use crate::numeric::{coherent_amplitudes, PROBABILITY_FLOOR};
use crate::{Error, Result, C64};

pub const DEFAULT_TAIL_TOLERANCE: f64 = 1e-10;

/// `ceil(|β|² + 8|β| + 20)`: leaves a Poisson tail far below `1e-12` for the
/// amplitudes in play.
pub fn default_cutoff(beta_max: f64) -> usize {
    let b = beta_max.abs();
    (b * b + 8.0 * b + 20.0).ceil() as usize
}

/// Truncation settings used by the preparation routines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Truncation {
    pub cutoff: usize,
    pub tail_tolerance: f64,
}

impl Truncation {
    pub fn new(cutoff: usize) -> Self {
        Self { cutoff, tail_tolerance: DEFAULT_TAIL_TOLERANCE }
    }

    pub fn with_tail_tolerance(mut self, tolerance: f64) -> Self {
        self.tail_tolerance = tolerance;
        self
    }

    pub fn coherent(&self, alpha: C64) -> Result<FockVector> {
        let amps = coherent_amplitudes(alpha, self.cutoff);
        let missing = 1.0 - amps.iter().map(|a| a.norm_sqr()).sum::<f64>();
        self.finish(amps, missing.max(0.0))
    }

    /// `(|−α⟩ ± |α⟩)/√N±`; only even (plus) or odd (minus) photon numbers.
    pub fn cat(&self, alpha: f64, parity: Parity) -> Result<FockVector> {
        if alpha < 0.0 {
            return Err(Error::invalid("cat amplitude must be non-negative"));
        }
        let base = coherent_amplitudes(C64::new(alpha, 0.0), self.cutoff);
        let keep = parity.photon_parity();
        let amps: Vec<C64> = base.iter().enumerate().map(|(n, a)| if n % 2 == keep { 2.0 * a } else { C64::new(0.0, 0.0) }).collect();
        let expected = match parity {
            Parity::Even => 2.0 + 2.0 * (-2.0 * alpha * alpha).exp(),
            Parity::Odd => 2.0 - 2.0 * (-2.0 * alpha * alpha).exp(),
        };
        if expected < 1e-300 {
            return Err(Error::ZeroNorm);
        }
        let kept: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        self.finish(amps, ((expected - kept) / expected).max(0.0))
    }

    /// Squeezed vacuum with only even photon numbers:
    /// `(1−λ²)^{1/4} √((2n)!)/n! (λ/2)ⁿ` on `|2n⟩`.
    pub fn squeezed_even(&self, lambda: f64) -> Result<FockVector> {
        if lambda.abs() >= 1.0 {
            return Err(Error::invalid("squeezing parameter must satisfy |λ| < 1"));
        }
        let mut amps = vec![C64::new(0.0, 0.0); self.cutoff + 1];
        let mut c = (1.0 - lambda * lambda).powf(0.25);
        amps[0] = C64::new(c, 0.0);
        let mut n = 1;
        while 2 * n <= self.cutoff {
            let k = n as f64;
            c *= ((2.0 * k) * (2.0 * k - 1.0)).sqrt() / k * (lambda / 2.0);
            amps[2 * n] = C64::new(c, 0.0);
            n += 1;
        }
        let missing = 1.0 - amps.iter().map(|a| a.norm_sqr()).sum::<f64>();
        self.finish(amps, missing.max(0.0))
    }

    fn finish(&self, amps: Vec<C64>, missing: f64) -> Result<FockVector> {
        let state = FockVector { amps };
        let tail = missing + state.edge_mass();
        if tail > self.tail_tolerance {
            return Err(Error::Truncation { tail, tolerance: self.tail_tolerance, cutoff: self.cutoff });
        }
        state.normalized()
    }
}

/// Photon-number parity, or equivalently the sign of a cat state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of(n: usize) -> Self {
        if n.is_multiple_of(2) {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    fn photon_parity(self) -> usize {
        match self {
            Parity::Even => 0,
            Parity::Odd => 1,
        }
    }

    /// `+1` for even, `−1` for odd.
    pub fn sign(self) -> f64 {
        match self {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        }
    }
}

pub fn coherent(alpha: C64, cutoff: usize) -> Result<FockVector> {
    Truncation::new(cutoff).coherent(alpha)
}

pub fn cat(alpha: f64, parity: Parity, cutoff: usize) -> Result<FockVector> {
    Truncation::new(cutoff).cat(alpha, parity)
}

pub fn squeezed_even(lambda: f64, cutoff: usize) -> Result<FockVector> {
    Truncation::new(cutoff).squeezed_even(lambda)
}

/// States that support an inner product; used for fidelities and ensembles.
pub trait PureState {
    fn inner(&self, other: &Self) -> Result<C64>;
    fn norm_sqr(&self) -> f64;
}

/// `|⟨a|b⟩|²/(‖a‖²‖b‖²)`.
pub fn fidelity<S: PureState>(a: &S, b: &S) -> Result<f64> {
    let na = a.norm_sqr();
    let nb = b.norm_sqr();
    if na <= 0.0 || nb <= 0.0 {
        return Err(Error::ZeroNorm);
    }
    Ok(a.inner(b)?.norm_sqr() / (na * nb))
}

/// A mixed state held as weighted pure members; weights need not sum to one.
#[derive(Debug, Clone)]
pub struct Ensemble<S> {
    members: Vec<(f64, S)>,
}

impl<S: PureState> Ensemble<S> {
    pub fn new() -> Self {
        Self { members: Vec::new() }
    }

    pub fn push(&mut self, weight: f64, state: S) {
        self.members.push((weight, state));
    }

    pub fn members(&self) -> &[(f64, S)] {
        &self.members
    }

    pub fn total_weight(&self) -> f64 {
        self.members.iter().map(|(w, _)| w).sum()
    }

    /// `⟨ψ|ρ|ψ⟩` with `ρ` normalised to unit trace.
    pub fn fidelity_with(&self, psi: &S) -> Result<f64> {
        let total = self.total_weight();
        if total <= 0.0 {
            return Err(Error::ZeroNorm);
        }
        let mut acc = 0.0;
        for (w, s) in &self.members {
            acc += w * fidelity(psi, s)?;
        }
        Ok(acc / total)
    }
}

impl<S: PureState> Default for Ensemble<S> {
    fn default() -> Self {
        Self::new()
    }
}

impl<S: PureState> FromIterator<(f64, S)> for Ensemble<S> {
    fn from_iter<I: IntoIterator<Item = (f64, S)>>(iter: I) -> Self {
        Self { members: iter.into_iter().collect() }
    }
}

/// Single-mode state over `|0⟩ … |cutoff⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct FockVector {
    amps: Vec<C64>,
}

impl FockVector {
    pub fn new(amps: Vec<C64>) -> Result<Self> {
        if amps.is_empty() {
            return Err(Error::invalid("a Fock vector needs at least the vacuum component"));
        }
        Ok(Self { amps })
    }

    pub fn vacuum(cutoff: usize) -> Self {
        Self::number(0, cutoff)
    }

    pub fn number(n: usize, cutoff: usize) -> Self {
        let mut amps = vec![C64::new(0.0, 0.0); cutoff + 1];
        amps[n.min(cutoff)] = C64::new(1.0, 0.0);
        Self { amps }
    }

    pub fn cutoff(&self) -> usize {
        self.amps.len() - 1
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = PureState::norm_sqr(self);
        if n <= 0.0 {
            return Err(Error::ZeroNorm);
        }
        let s = 1.0 / n.sqrt();
        Ok(Self { amps: self.amps.iter().map(|a| a * s).collect() })
    }

    pub fn photon_distribution(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn mean_photon(&self) -> f64 {
        let p = self.photon_distribution();
        let total: f64 = p.iter().sum();
        p.iter().enumerate().map(|(n, w)| n as f64 * w).sum::<f64>() / total
    }

    /// Weight on the two highest retained photon numbers.
    pub fn edge_mass(&self) -> f64 {
        let n = self.amps.len();
        self.amps[n.saturating_sub(2)..].iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn check_tail(&self, tolerance: f64) -> Result<()> {
        let tail = self.edge_mass();
        if tail > tolerance {
            return Err(Error::Truncation { tail, tolerance, cutoff: self.cutoff() });
        }
        Ok(())
    }

    /// `D(β)` applied through the truncated matrix; fails if weight leaks past
    /// the cutoff.
    pub fn displace(&self, beta: C64) -> Result<Self> {
        let d = displacement_matrix(beta, self.cutoff());
        let out: Vec<C64> = (0..=self.cutoff()).map(|m| (0..=self.cutoff()).map(|n| d[(m, n)] * self.amps[n]).sum()).collect();
        let out = Self { amps: out };
        let leak = (PureState::norm_sqr(self) - PureState::norm_sqr(&out)).max(0.0) + out.edge_mass();
        if leak > DEFAULT_TAIL_TOLERANCE {
            return Err(Error::Truncation { tail: leak, tolerance: DEFAULT_TAIL_TOLERANCE, cutoff: self.cutoff() });
        }
        Ok(out)
    }

    /// `aₙ → e^{iφn} aₙ`; `φ = π` is the logical bit flip.
    pub fn phase_rotate(&self, phi: f64) -> Self {
        Self { amps: self.amps.iter().enumerate().map(|(n, a)| a * C64::from_polar(1.0, phi * n as f64)).collect() }
    }

    pub fn to_multimode(&self) -> MultiModeState {
        MultiModeState::product(std::slice::from_ref(self)).expect("single factor always matches")
    }
}

impl PureState for FockVector {
    fn inner(&self, other: &Self) -> Result<C64> {
        if self.amps.len() != other.amps.len() {
            return Err(Error::DimensionMismatch(format!("cutoffs {} and {}", self.cutoff(), other.cutoff())));
        }
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }
}

/// Joint state of `M` modes sharing one cutoff, as a tensor of shape `(N+1)^M`.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiModeState {
    amps: ArrayD<C64>,
}

impl MultiModeState {
    pub fn vacuum(modes: usize, cutoff: usize) -> Self {
        let mut amps = ArrayD::zeros(IxDyn(&vec![cutoff + 1; modes]));
        amps[IxDyn(&vec![0; modes])] = C64::new(1.0, 0.0);
        Self { amps }
    }

    /// Tensor product of single-mode factors.
    pub fn product(factors: &[FockVector]) -> Result<Self> {
        let Some(first) = factors.first() else {
            return Ok(Self { amps: ArrayD::from_elem(IxDyn(&[]), C64::new(1.0, 0.0)) });
        };
        let cutoff = first.cutoff();
        if factors.iter().any(|f| f.cutoff() != cutoff) {
            return Err(Error::DimensionMismatch("factors must share a cutoff".into()));
        }
        let shape = vec![cutoff + 1; factors.len()];
        let amps = ArrayD::from_shape_fn(IxDyn(&shape), |idx| (0..factors.len()).map(|k| factors[k].amps[idx[k]]).product());
        Ok(Self { amps })
    }

    pub fn from_array(amps: ArrayD<C64>) -> Result<Self> {
        let shape = amps.shape();
        if shape.windows(2).any(|w| w[0] != w[1]) || shape.contains(&0) {
            return Err(Error::DimensionMismatch("every mode must share one non-empty cutoff".into()));
        }
        Ok(Self { amps })
    }

    pub fn modes(&self) -> usize {
        self.amps.ndim()
    }

    pub fn cutoff(&self) -> usize {
        self.amps.shape().first().map_or(0, |d| d - 1)
    }

    pub fn amplitudes(&self) -> &ArrayD<C64> {
        &self.amps
    }

    pub fn amplitude(&self, photons: &[usize]) -> C64 {
        self.amps[IxDyn(photons)]
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = PureState::norm_sqr(self);
        if n <= 0.0 {
            return Err(Error::ZeroNorm);
        }
        let s = 1.0 / n.sqrt();
        Ok(Self { amps: self.amps.mapv(|a| a * s) })
    }

    fn check_mode(&self, mode: usize) -> Result<()> {
        if mode >= self.modes() {
            return Err(Error::DimensionMismatch(format!("mode {mode} of a {}-mode state", self.modes())));
        }
        Ok(())
    }

    /// Photon-number distribution of one mode, other modes traced out.
    pub fn marginal(&self, mode: usize) -> Result<Vec<f64>> {
        self.check_mode(mode)?;
        Ok(self.amps.axis_iter(Axis(mode)).map(|slice| slice.iter().map(|a| a.norm_sqr()).sum()).collect())
    }

    /// Distribution of the total photon number across all modes.
    pub fn total_photon_distribution(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.modes() * self.cutoff() + 1];
        for (idx, a) in self.amps.indexed_iter() {
            let total: usize = (0..self.modes()).map(|k| idx[k]).sum();
            out[total] += a.norm_sqr();
        }
        out
    }

    pub fn check_tail(&self, tolerance: f64) -> Result<()> {
        for mode in 0..self.modes() {
            let p = self.marginal(mode)?;
            let tail: f64 = p[p.len().saturating_sub(2)..].iter().sum();
            if tail > tolerance {
                return Err(Error::Truncation { tail, tolerance, cutoff: self.cutoff() });
            }
        }
        Ok(())
    }

    pub fn phase_rotate(&self, mode: usize, phi: f64) -> Result<Self> {
        self.check_mode(mode)?;
        let mut amps = self.amps.clone();
        for (n, mut slice) in amps.axis_iter_mut(Axis(mode)).enumerate() {
            let f = C64::from_polar(1.0, phi * n as f64);
            slice.mapv_inplace(|a| a * f);
        }
        Ok(Self { amps })
    }

    pub fn displace(&self, mode: usize, beta: C64) -> Result<Self> {
        self.check_mode(mode)?;
        let d = displacement_matrix(beta, self.cutoff());
        let mut amps = self.amps.clone();
        for mut lane in amps.lanes_mut(Axis(mode)) {
            let src: Vec<C64> = lane.iter().copied().collect();
            for (m, out) in lane.iter_mut().enumerate() {
                *out = src.iter().enumerate().map(|(n, a)| d[(m, n)] * a).sum();
            }
        }
        let out = Self { amps };
        out.check_leak(self)?;
        Ok(out)
    }

    /// Label shift by `β` without the displacement phase (see
    /// [`translation_matrix`]); the result is left unnormalised.
    pub fn translate(&self, mode: usize, beta: C64) -> Result<Self> {
        self.check_mode(mode)?;
        let t = translation_matrix(beta, self.cutoff());
        let mut amps = self.amps.clone();
        for mut lane in amps.lanes_mut(Axis(mode)) {
            let src: Vec<C64> = lane.iter().copied().collect();
            for (m, out) in lane.iter_mut().enumerate() {
                *out = src.iter().enumerate().map(|(n, a)| t[(m, n)] * a).sum();
            }
        }
        let out = Self { amps };
        let marginal = out.marginal(mode)?;
        let edge = marginal.iter().rev().take(2).sum::<f64>() / marginal.iter().sum::<f64>();
        if edge > DEFAULT_TAIL_TOLERANCE {
            return Err(Error::Truncation { tail: edge, tolerance: DEFAULT_TAIL_TOLERANCE, cutoff: self.cutoff() });
        }
        Ok(out)
    }

    pub fn beamsplitter(&self, modes: (usize, usize), conv: BeamsplitterConvention) -> Result<Self> {
        let (i, j) = modes;
        self.check_mode(i)?;
        self.check_mode(j)?;
        if i == j {
            return Err(Error::invalid("beamsplitter needs two distinct modes"));
        }
        let out = Self { amps: beamsplitter::apply(&self.amps, i, j, conv) };
        out.check_leak(self)?;
        Ok(out)
    }

    fn check_leak(&self, before: &Self) -> Result<()> {
        let leak = (PureState::norm_sqr(before) - PureState::norm_sqr(self)).max(0.0);
        if leak > DEFAULT_TAIL_TOLERANCE {
            return Err(Error::Truncation { tail: leak, tolerance: DEFAULT_TAIL_TOLERANCE, cutoff: self.cutoff() });
        }
        Ok(())
    }

    /// Projects `mode` onto `|n⟩`; returns the normalised state of the
    /// remaining modes and the outcome probability.
    pub fn project_fock(&self, mode: usize, n: usize) -> Result<(Self, f64)> {
        self.check_mode(mode)?;
        if n > self.cutoff() {
            return Err(Error::invalid(format!("photon number {n} beyond cutoff {}", self.cutoff())));
        }
        let total = PureState::norm_sqr(self);
        let sub = self.amps.index_axis(Axis(mode), n).to_owned();
        let weight: f64 = sub.iter().map(|a| a.norm_sqr()).sum();
        let probability = weight / total;
        if probability < PROBABILITY_FLOOR {
            return Err(Error::ZeroProbability { probability });
        }
        let s = 1.0 / weight.sqrt();
        Ok((Self { amps: sub.mapv(|a| a * s) }, probability))
    }

    /// The single remaining mode as a [`FockVector`].
    pub fn to_single_mode(&self) -> Result<FockVector> {
        if self.modes() != 1 {
            return Err(Error::DimensionMismatch(format!("expected one mode, found {}", self.modes())));
        }
        Ok(FockVector { amps: self.amps.iter().copied().collect() })
    }
}

impl PureState for MultiModeState {
    fn inner(&self, other: &Self) -> Result<C64> {
        if self.amps.shape() != other.amps.shape() {
            return Err(Error::DimensionMismatch(format!("shapes {:?} and {:?}", self.amps.shape(), other.amps.shape())));
        }
        Ok(self.amps.iter().zip(other.amps.iter()).map(|(a, b)| a.conj() * b).sum())
    }

    fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn coherent_zero_is_vacuum() {
        let v = coherent(c(0.0, 0.0), 10).unwrap();
        assert_eq!(v, FockVector::vacuum(10));
    }

    #[test]
    fn antipodal_coherent_overlap() {
        let a = coherent(c(2.0, 0.0), 40).unwrap();
        let b = coherent(c(-2.0, 0.0), 40).unwrap();
        assert_relative_eq!(fidelity(&a, &b).unwrap(), (-16f64).exp(), max_relative = 1e-9);
    }

    #[test]
    fn coherent_mean_photon_is_poisson_mean() {
        let a = coherent(c(2.0, 0.0), 40).unwrap();
        assert!((a.mean_photon() - 4.0).abs() < 1e-10);
    }

    #[test]
    fn coherent_rejects_short_cutoff() {
        assert!(matches!(coherent(c(3.0, 0.0), 10), Err(Error::Truncation { .. })));
    }

    #[test]
    fn cat_parity_structure() {
        assert_eq!(cat(0.0, Parity::Even, 10).unwrap(), FockVector::vacuum(10));
        assert_eq!(cat(0.0, Parity::Odd, 10), Err(Error::ZeroNorm));
        let plus = cat(2.0, Parity::Even, 40).unwrap();
        let odd_mass: f64 = plus.photon_distribution().iter().skip(1).step_by(2).sum();
        assert_eq!(odd_mass, 0.0);
        let minus = cat(2.0, Parity::Odd, 40).unwrap();
        let even_mass: f64 = minus.photon_distribution().iter().step_by(2).sum();
        assert_eq!(even_mass, 0.0);
        assert!((PureState::norm_sqr(&plus) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn squeezed_vacuum_moments() {
        assert_eq!(squeezed_even(0.0, 10).unwrap(), FockVector::vacuum(10));
        let s = squeezed_even(0.6, 60).unwrap();
        assert!((PureState::norm_sqr(&s) - 1.0).abs() < 1e-10);
        // norm before renormalisation is the closed-form geometric-type sum
        let raw: f64 = Truncation::new(60).with_tail_tolerance(1.0).squeezed_even(0.6).unwrap().photon_distribution().iter().sum();
        assert!((raw - 1.0).abs() < 1e-10);
        assert!((s.mean_photon() - 0.5625).abs() < 1e-8);
        assert!(squeezed_even(0.99, 20).is_err());
    }

    #[test]
    fn displacing_vacuum_gives_coherent_state() {
        let beta = c(0.8, -1.1);
        let d = FockVector::vacuum(40).displace(beta).unwrap();
        let expected = coherent(beta, 40).unwrap();
        assert!((fidelity(&d, &expected).unwrap() - 1.0).abs() < 1e-12);
        for (x, y) in d.amplitudes().iter().zip(expected.amplitudes()) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn displacement_composition_phase() {
        let (gamma, beta) = (c(0.7, 0.3), c(-0.4, 1.2));
        let out = coherent(gamma, 50).unwrap().displace(beta).unwrap();
        let expected = coherent(beta + gamma, 50).unwrap();
        let phase = C64::from_polar(1.0, (beta * gamma.conj()).im);
        let ov = expected.inner(&out).unwrap();
        assert!((ov - phase).norm() < 1e-10);
    }

    #[test]
    fn displaced_qubit_branch() {
        // θ = π/4 at α = 2: the |0⟩ label −α moves to −α + iθ/(2α)
        let shifted = coherent(c(-2.0, 0.0), 40).unwrap().displace(c(0.0, PI / 16.0)).unwrap();
        let expected = coherent(c(-2.0, PI / 16.0), 40).unwrap();
        assert!((fidelity(&shifted, &expected).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn phase_rotation_bit_flip() {
        let s = coherent(c(1.5, 0.2), 40).unwrap();
        assert_eq!(s.phase_rotate(0.0), s);
        let flipped = s.phase_rotate(PI);
        let expected = coherent(c(-1.5, -0.2), 40).unwrap();
        for (x, y) in flipped.amplitudes().iter().zip(expected.amplitudes()) {
            assert!((x - y).norm() < 1e-12);
        }
        let back = flipped.phase_rotate(PI);
        for (x, y) in back.amplitudes().iter().zip(s.amplitudes()) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn project_vacuum_pair() {
        let v = MultiModeState::vacuum(2, 6);
        let (rest, p) = v.project_fock(1, 0).unwrap();
        assert_eq!(p, 1.0);
        assert_eq!(rest, MultiModeState::vacuum(1, 6));
        assert!(matches!(v.project_fock(1, 2), Err(Error::ZeroProbability { .. })));
    }

    #[test]
    fn projection_completeness() {
        let a = coherent(c(1.0, 0.5), 30).unwrap();
        let b = cat(1.2, Parity::Even, 30).unwrap();
        let s = MultiModeState::product(&[a, b]).unwrap();
        let total: f64 = (0..=30).filter_map(|n| s.project_fock(1, n).ok()).map(|(_, p)| p).sum();
        assert!((total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn ensemble_fidelity_weights_members() {
        let a = coherent(c(2.0, 0.0), 40).unwrap();
        let b = coherent(c(-2.0, 0.0), 40).unwrap();
        let ens: Ensemble<FockVector> = [(3.0, a.clone()), (1.0, b)].into_iter().collect();
        assert!((ens.fidelity_with(&a).unwrap() - 0.75).abs() < 1e-6);
    }

    #[test]
    fn fidelity_dimension_mismatch() {
        let a = FockVector::vacuum(4);
        let b = FockVector::vacuum(5);
        assert!(matches!(fidelity(&a, &b), Err(Error::DimensionMismatch(_))));
    }
}
