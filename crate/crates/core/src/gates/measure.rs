//! Photon-counting Bell and cat measurements, generic over the state backend.

use crate::coherent::CoherentSuperposition;
use crate::fock::{BeamsplitterConvention, MultiModeState, Parity, Truncation};
use crate::numeric::PROBABILITY_FLOOR;
use crate::{Error, Result, C64};

use super::{BellOutcome, Sampler};

/// Largest photon count examined when measuring modes whose labels reach
/// `√2·alpha`: mean `2α²` plus about six standard deviations.
pub fn count_grid(alpha: f64) -> usize {
    (2.0 * alpha * alpha + 8.0 * alpha + 20.0).ceil() as usize
}

/// A state on which individual modes can be split and counted.
pub trait CountingState: Sized {
    fn mode_count(&self) -> usize;
    /// `P(n)` for `n = 0..=nmax` on one mode.
    fn count_probabilities(&self, mode: usize, nmax: usize) -> Result<Vec<f64>>;
    /// Normalised state of the other modes after counting `n` on `mode`.
    fn condition(&self, mode: usize, n: usize) -> Result<Self>;
    fn split(&self, modes: (usize, usize), conv: BeamsplitterConvention) -> Result<Self>;
}

impl CountingState for CoherentSuperposition {
    fn mode_count(&self) -> usize {
        self.modes()
    }

    fn count_probabilities(&self, mode: usize, nmax: usize) -> Result<Vec<f64>> {
        self.marginal(mode, nmax)
    }

    fn condition(&self, mode: usize, n: usize) -> Result<Self> {
        self.project_unnormalized(mode, n)?.normalized()
    }

    fn split(&self, modes: (usize, usize), conv: BeamsplitterConvention) -> Result<Self> {
        self.beamsplitter(modes, conv)
    }
}

impl CountingState for MultiModeState {
    fn mode_count(&self) -> usize {
        self.modes()
    }

    fn count_probabilities(&self, mode: usize, nmax: usize) -> Result<Vec<f64>> {
        let mut p = self.marginal(mode)?;
        p.resize(nmax + 1, 0.0);
        Ok(p)
    }

    fn condition(&self, mode: usize, n: usize) -> Result<Self> {
        self.project_fock(mode, n).map(|(s, _)| s)
    }

    fn split(&self, modes: (usize, usize), conv: BeamsplitterConvention) -> Result<Self> {
        self.beamsplitter(modes, conv)
    }
}

/// `(|−α,−α⟩ + |α,α⟩)/√N` from an even cat of amplitude `√2α` on a splitter.
pub fn bell_resource(alpha: f64) -> Result<CoherentSuperposition> {
    let cat = CoherentSuperposition::cat(2f64.sqrt() * alpha, Parity::Even)?;
    cat.tensor(&CoherentSuperposition::vacuum(1)).beamsplitter((0, 1), BeamsplitterConvention::real_coupled(-std::f64::consts::FRAC_PI_4))
}

/// The same resource built in the truncated Fock basis.
pub fn bell_resource_fock(alpha: f64, cutoff: usize) -> Result<MultiModeState> {
    let cat = Truncation::new(cutoff).cat(2f64.sqrt() * alpha, Parity::Even)?;
    let vac = crate::fock::FockVector::vacuum(cutoff);
    MultiModeState::product(&[cat, vac])?.beamsplitter((0, 1), BeamsplitterConvention::real_coupled(-std::f64::consts::FRAC_PI_4))
}

/// `(|00⟩ + |11⟩)/√2` with coefficients normalised for orthonormal code words.
pub fn ideal_bell_resource(alpha: f64) -> Result<CoherentSuperposition> {
    let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let z = C64::new(0.0, 0.0);
    super::code_state(&[h, z, z, h], &[alpha, alpha])
}

#[derive(Debug, Clone)]
pub struct CatBranch<S> {
    pub count: usize,
    pub parity: Parity,
    pub probability: f64,
    pub state: S,
}

/// Photon counting on one mode, read as a parity (cat-basis) measurement.
pub fn cat_measure<S: CountingState>(state: &S, mode: usize, nmax: usize, sampler: &mut Sampler<'_>) -> Result<Vec<CatBranch<S>>> {
    count_mode(state, mode, nmax, sampler)?
        .into_iter()
        .map(|(p, n)| Ok(CatBranch { count: n, parity: Parity::of(n), probability: p, state: state.condition(mode, n)? }))
        .collect()
}

/// Total probability of even and odd counts.
pub fn parity_probabilities<S>(branches: &[CatBranch<S>]) -> (f64, f64) {
    branches.iter().fold((0.0, 0.0), |(e, o), b| match b.parity {
        Parity::Even => (e + b.probability, o),
        Parity::Odd => (e, o + b.probability),
    })
}

#[derive(Debug, Clone)]
pub struct BellBranch<S> {
    pub outcome: BellOutcome,
    pub probability: f64,
    pub state: S,
}

/// Balanced splitter on `(a, b)` then counting both ports. The returned states
/// live on the remaining modes in their original order.
pub fn bell_measure<S: CountingState>(
    state: &S,
    modes: (usize, usize),
    nmax: usize,
    sampler: &mut Sampler<'_>,
) -> Result<Vec<BellBranch<S>>> {
    let (a, b) = modes;
    if a == b {
        return Err(Error::invalid("Bell measurement needs two distinct modes"));
    }
    let split = state.split((a, b), BeamsplitterConvention::balanced())?;
    let b_rest = if b > a { b - 1 } else { b };
    let mut out = Vec::new();
    for (pa, na) in count_mode(&split, a, nmax, sampler)? {
        let after_a = split.condition(a, na)?;
        for (pb, nb) in count_mode(&after_a, b_rest, nmax, sampler)? {
            out.push(BellBranch { outcome: BellOutcome::from_counts(na, nb), probability: pa * pb, state: after_a.condition(b_rest, nb)? });
        }
    }
    Ok(out)
}

/// Outcomes of counting one mode: all with non-negligible probability, or one
/// sampled from the marginal.
fn count_mode<S: CountingState>(state: &S, mode: usize, nmax: usize, sampler: &mut Sampler<'_>) -> Result<Vec<(f64, usize)>> {
    let probs = state.count_probabilities(mode, nmax)?;
    let total: f64 = probs.iter().sum();
    let items: Vec<(f64, usize)> = probs.into_iter().enumerate().filter(|(_, p)| *p >= PROBABILITY_FLOOR).map(|(n, p)| (p, n)).collect();
    Ok(sampler.pick(items, total))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::default_cutoff;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn resource_is_symmetric_pair() {
        let alpha = 1.3;
        let r = bell_resource(alpha).unwrap();
        let expect = CoherentSuperposition::new(
            2,
            [(C64::new(1.0, 0.0), vec![C64::new(-alpha, 0.0); 2]), (C64::new(1.0, 0.0), vec![C64::new(alpha, 0.0); 2])],
        )
        .unwrap();
        assert!((r.fidelity(&expect).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fock_and_coherent_resources_agree() {
        let alpha = 1.2;
        let cutoff = default_cutoff(2f64.sqrt() * alpha);
        let a = bell_resource(alpha).unwrap().to_fock(cutoff).unwrap();
        let b = bell_resource_fock(alpha, cutoff).unwrap();
        assert!((crate::fock::fidelity(&a, &b).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn bell_measure_probabilities_sum_to_one() {
        let alpha = 1.5;
        let q = CoherentSuperposition::cat(alpha, Parity::Even).unwrap();
        let s = q.tensor(&bell_resource(alpha).unwrap());
        let branches = bell_measure(&s, (0, 1), count_grid(alpha), &mut Sampler::Exhaustive).unwrap();
        let total: f64 = branches.iter().map(|b| b.probability).sum();
        assert!((total - 1.0).abs() < 1e-10, "{total}");
    }

    #[test]
    fn bell_measure_backends_agree() {
        let alpha = 1.0;
        let q = CoherentSuperposition::cat(alpha, Parity::Odd).unwrap();
        let s = q.tensor(&bell_resource(alpha).unwrap());
        let f = s.to_fock(default_cutoff(2.0 * alpha)).unwrap();
        let nmax = count_grid(alpha);
        let a = bell_measure(&s, (0, 1), nmax, &mut Sampler::Exhaustive).unwrap();
        let b = bell_measure(&f, (0, 1), nmax, &mut Sampler::Exhaustive).unwrap();
        for x in &a {
            let y = b.iter().find(|y| y.outcome == x.outcome).unwrap();
            assert!((x.probability - y.probability).abs() < 1e-9);
            let xf = x.state.to_fock(default_cutoff(2.0 * alpha)).unwrap();
            if x.probability > 1e-8 {
                assert!((crate::fock::fidelity(&xf, &y.state).unwrap() - 1.0).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn cat_measure_reads_parity() {
        let alpha = 1.1;
        for parity in [Parity::Even, Parity::Odd] {
            let c = CoherentSuperposition::cat(alpha, parity).unwrap();
            let (e, o) = parity_probabilities(&cat_measure(&c, 0, count_grid(alpha), &mut Sampler::Exhaustive).unwrap());
            let (want_e, want_o) = if parity == Parity::Even { (1.0, 0.0) } else { (0.0, 1.0) };
            assert!((e - want_e).abs() < 1e-12 && (o - want_o).abs() < 1e-12);
        }
    }

    #[test]
    fn sampled_counts_follow_marginal() {
        let alpha = 0.8;
        let c = CoherentSuperposition::coherent(&[C64::new(alpha, 0.0)]);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let trials = 20_000;
        let mut zeros = 0;
        for _ in 0..trials {
            let mut s = Sampler::Random(&mut rng);
            let b = cat_measure(&c, 0, count_grid(alpha), &mut s).unwrap();
            assert_eq!(b.len(), 1);
            zeros += usize::from(b[0].count == 0);
        }
        let p0 = (-alpha * alpha).exp();
        let sigma = (p0 * (1.0 - p0) / trials as f64).sqrt();
        assert!(((zeros as f64 / trials as f64) - p0).abs() < 5.0 * sigma);
    }
}
