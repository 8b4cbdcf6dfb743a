//! Photon loss as conditional histories, and the protocols that undo it:
//! re-amplification by teleportation, the three-mode sign-flip code and
//! resource amplification.
//!
//! A history is a list of loss times on one mode. Between losses the state
//! evolves under `e^{−γΔt n̂/2}`; each loss applies `√γ a`. The squared norm of
//! the result is the probability density of the history.

use rand::Rng;

use crate::coherent::{CoherentSuperposition, QubitState};
use crate::fock::{BeamsplitterConvention, FockVector, Parity, PureState};
use crate::gates::protocol::{append, bell_teleport, Branch, Frame, GateContext};
use crate::gates::{Correction, GateOutcome, MeasurementModel, Pauli, PauliAxis, Record, RotationSpec, Sampler};
use crate::numeric::{gauss_legendre, PROBABILITY_FLOOR};
use crate::{Error, Result, C64};

#[derive(Debug, Clone, PartialEq)]
pub struct LossHistory {
    gamma: f64,
    t: f64,
    events: Vec<f64>,
}

impl LossHistory {
    pub fn new(gamma: f64, t: f64, events: Vec<f64>) -> Result<Self> {
        if !(gamma >= 0.0 && gamma.is_finite()) || !(t >= 0.0 && t.is_finite()) {
            return Err(Error::invalid(format!("loss rate and duration must be non-negative, got γ={gamma}, t={t}")));
        }
        let mut last = 0.0;
        for &e in &events {
            if !(e > last && e <= t) {
                return Err(Error::invalid(format!("loss times must increase strictly within (0, {t}], got {events:?}")));
            }
            last = e;
        }
        Ok(Self { gamma, t, events })
    }

    pub fn empty(gamma: f64, t: f64) -> Result<Self> {
        Self::new(gamma, t, Vec::new())
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn duration(&self) -> f64 {
        self.t
    }

    pub fn events(&self) -> &[f64] {
        &self.events
    }

    /// Amplitude decay factor `e^{−γt/2}` over the whole history.
    pub fn kappa(&self) -> f64 {
        (-self.gamma * self.t / 2.0).exp()
    }

    /// Intervals of no-jump evolution: one before each loss and the tail.
    fn intervals(&self) -> impl Iterator<Item = (f64, bool)> + '_ {
        let mut last = 0.0;
        self.events
            .iter()
            .map(move |&e| {
                let dt = e - last;
                last = e;
                (dt, true)
            })
            .chain(std::iter::once((self.t - self.events.last().copied().unwrap_or(0.0), false)))
    }
}

/// States that can be run through a loss history on one mode.
pub trait Lossy: PureState + Sized {
    /// `e^{−γΔt n̂/2}` written through `κ = e^{−γΔt/2}`.
    fn no_jump(&self, mode: usize, kappa: f64) -> Result<Self>;
    fn jump(&self, mode: usize) -> Result<Self>;
    fn rescale(&self, factor: f64) -> Self;
}

impl Lossy for CoherentSuperposition {
    fn no_jump(&self, mode: usize, kappa: f64) -> Result<Self> {
        self.decay(mode, kappa)
    }

    fn jump(&self, mode: usize) -> Result<Self> {
        self.annihilate(mode)
    }

    fn rescale(&self, factor: f64) -> Self {
        self.scaled(C64::new(factor, 0.0))
    }
}

impl Lossy for FockVector {
    fn no_jump(&self, mode: usize, kappa: f64) -> Result<Self> {
        check_single(mode)?;
        let mut f = 1.0;
        let amps = self
            .amplitudes()
            .iter()
            .map(|a| {
                let out = a * f;
                f *= kappa;
                out
            })
            .collect();
        FockVector::new(amps)
    }

    fn jump(&self, mode: usize) -> Result<Self> {
        check_single(mode)?;
        let a = self.amplitudes();
        let amps = (0..a.len()).map(|n| a.get(n + 1).map_or(C64::new(0.0, 0.0), |x| x * ((n + 1) as f64).sqrt())).collect();
        FockVector::new(amps)
    }

    fn rescale(&self, factor: f64) -> Self {
        FockVector::new(self.amplitudes().iter().map(|a| a * factor).collect()).expect("same length")
    }
}

fn check_single(mode: usize) -> Result<()> {
    if mode != 0 {
        return Err(Error::DimensionMismatch(format!("mode {mode} of a single-mode state")));
    }
    Ok(())
}

/// Unnormalised conditional state: the time-ordered product applied to the
/// normalised input.
fn evolve<S: Lossy>(state: &S, mode: usize, history: &LossHistory) -> Result<S> {
    let n = state.norm_sqr();
    if !(n > 0.0) {
        return Err(Error::ZeroNorm);
    }
    let mut s = state.rescale(1.0 / n.sqrt());
    let root_gamma = history.gamma.sqrt();
    for (dt, jump) in history.intervals() {
        s = s.no_jump(mode, (-history.gamma * dt / 2.0).exp())?;
        if jump {
            s = s.jump(mode)?.rescale(root_gamma);
        }
    }
    Ok(s)
}

/// Normalised state conditioned on `history` for `mode`, with the history's
/// probability density (probability for the empty history).
pub fn conditional_state<S: Lossy>(state: &S, mode: usize, history: &LossHistory) -> Result<(S, f64)> {
    let s = evolve(state, mode, history)?;
    let density = s.norm_sqr();
    if !(density > 0.0) {
        return Err(Error::ZeroProbability { probability: density });
    }
    Ok((s.rescale(1.0 / density.sqrt()), density))
}

/// Draws a loss history for a single-mode Fock state by inverting the
/// no-jump survival probability between losses.
pub fn sample_history(state: &FockVector, gamma: f64, t: f64, rng: &mut impl Rng) -> Result<LossHistory> {
    LossHistory::empty(gamma, t)?;
    let mut psi = state.normalized()?;
    let mut now = 0.0;
    let mut events = Vec::new();
    loop {
        let weights = psi.photon_distribution();
        let survival = |tau: f64| weights.iter().enumerate().map(|(n, w)| w * (-gamma * tau * n as f64).exp()).sum::<f64>();
        let r: f64 = rng.gen();
        if survival(t - now) >= r {
            break;
        }
        let (mut lo, mut hi) = (0.0, t - now);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if survival(mid) > r {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let tau = 0.5 * (lo + hi);
        // a jump time that rounds onto the previous one carries no weight
        if tau <= 0.0 {
            continue;
        }
        now += tau;
        events.push(now);
        psi = psi.no_jump(0, (-gamma * tau / 2.0).exp())?.jump(0)?.normalized()?;
    }
    LossHistory::new(gamma, t, events)
}

/// Photon-number distribution after loss, as the sum over histories with at
/// most `max_events` losses, each nested time integral done by
/// Gauss–Legendre quadrature of `order` nodes.
pub fn history_photon_distribution(state: &FockVector, gamma: f64, t: f64, max_events: usize, order: usize) -> Result<Vec<f64>> {
    let mut out = vec![0.0; state.cutoff() + 1];
    accumulate(state, gamma, t, &mut Vec::new(), 0.0, 1.0, max_events, order, &mut out)?;
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn accumulate(
    state: &FockVector,
    gamma: f64,
    t: f64,
    events: &mut Vec<f64>,
    from: f64,
    weight: f64,
    remaining: usize,
    order: usize,
    out: &mut [f64],
) -> Result<()> {
    let history = LossHistory::new(gamma, t, events.clone())?;
    let s = evolve(state, 0, &history)?;
    for (o, p) in out.iter_mut().zip(s.photon_distribution()) {
        *o += weight * p;
    }
    if remaining == 0 || from >= t {
        return Ok(());
    }
    for (x, w) in gauss_legendre(order, from, t) {
        events.push(x);
        accumulate(state, gamma, t, events, x, weight * w, remaining - 1, order, out)?;
        events.pop();
    }
    Ok(())
}

/// Fidelity between the normalised `a|q⟩` and `Z|q⟩`.
pub fn loss_as_z_check(q: &QubitState) -> Result<f64> {
    let lost = q.superposition().annihilate(0)?;
    crate::fock::fidelity(&lost, &q.phase_flip().superposition())
}

/// Probability split of a re-amplification attempt.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ReampStats {
    /// Exactly one output port clicked.
    pub success: f64,
    /// Neither port clicked.
    pub vacuum: f64,
    /// Both ports clicked.
    pub both: f64,
}

/// Teleports a single-mode qubit whose amplitude has decayed onto a fresh
/// resource at `alpha`. Branches where both ports click are marked failed.
pub fn reamplify(decayed: &CoherentSuperposition, alpha: f64, sampler: &mut Sampler<'_>) -> Result<Vec<GateOutcome>> {
    if decayed.modes() != 1 {
        return Err(Error::DimensionMismatch(format!("expected one mode, found {}", decayed.modes())));
    }
    let ctx = GateContext::new(alpha, MeasurementModel::PhotonCounting)?;
    let b = append(Branch::start(decayed, ctx.model)?, &ctx.resource()?);
    Ok(bell_teleport(b, (0, 1, 2), ctx, Frame::Full, sampler)?
        .into_iter()
        .map(|mut b| {
            if let Some(Record::Bell { outcome, .. }) = b.record.last() {
                if matches!(outcome.counts, Some((na, nb)) if na > 0 && nb > 0) {
                    b.success = false;
                }
            }
            b.into_outcome(ctx.model)
        })
        .collect())
}

pub fn reamp_stats(outcomes: &[GateOutcome]) -> ReampStats {
    let mut s = ReampStats::default();
    for o in outcomes {
        match o.bell_outcomes().last().and_then(|b| b.counts) {
            Some((0, 0)) => s.vacuum += o.probability,
            Some((na, nb)) if na > 0 && nb > 0 => s.both += o.probability,
            Some(_) => s.success += o.probability,
            None => {}
        }
    }
    s
}

/// Splitter angle that sends a third of the intensity into the first output.
fn third_split() -> BeamsplitterConvention {
    BeamsplitterConvention::real_coupled(-(1.0 / 3f64.sqrt()).acos())
}

fn pad(state: &CoherentSuperposition, modes: usize) -> CoherentSuperposition {
    state.tensor(&CoherentSuperposition::vacuum(modes))
}

/// `μ|−β⟩ + ν|β⟩` with `β = √3α` spread over three modes as
/// `μ|−α,−α,−α⟩ + ν|α,α,α⟩`.
pub fn encode_three(q: &QubitState) -> Result<CoherentSuperposition> {
    pad(&q.superposition(), 2)
        .beamsplitter((0, 1), third_split())?
        .beamsplitter((1, 2), BeamsplitterConvention::real_coupled(-std::f64::consts::FRAC_PI_4))
}

/// Inverse of [`encode_three`], keeping the branch where the two freed modes
/// are found empty. Unnormalised.
fn decode_three(state: &CoherentSuperposition) -> Result<CoherentSuperposition> {
    state
        .beamsplitter((1, 2), BeamsplitterConvention::real_coupled(std::f64::consts::FRAC_PI_4))?
        .beamsplitter((0, 1), BeamsplitterConvention::real_coupled((1.0 / 3f64.sqrt()).acos()))?
        .project_unnormalized(2, 0)?
        .project_unnormalized(1, 0)
}

/// A 2×2 logical gate on one mode with `|±α⟩` treated as orthonormal; labels
/// are first snapped onto the code.
pub fn ideal_logical_gate(state: &CoherentSuperposition, mode: usize, alpha: f64, m: [[C64; 2]; 2]) -> Result<CoherentSuperposition> {
    let snapped = state.snap_to_code(mode, alpha)?;
    let terms = snapped.terms().iter().flat_map(|t| {
        let x = usize::from(t.labels[mode].re > 0.0);
        (0..2).map(move |y| {
            let mut labels = t.labels.clone();
            labels[mode] = C64::new(if y == 1 { alpha } else { -alpha }, 0.0);
            (t.coeff * m[y][x], labels)
        })
    });
    CoherentSuperposition::new(snapped.modes(), terms.collect::<Vec<_>>())
}

fn matmul(a: [[C64; 2]; 2], b: [[C64; 2]; 2]) -> [[C64; 2]; 2] {
    let mut out = [[C64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

fn as_array(m: Vec<Vec<C64>>) -> [[C64; 2]; 2] {
    [[m[0][0], m[0][1]], [m[1][0], m[1][1]]]
}

/// `R_Z(π/2) R_X(π/2) R_Z(π/2)`: a Hadamard up to a global phase.
pub fn conjugating_gate() -> [[C64; 2]; 2] {
    let half = std::f64::consts::FRAC_PI_2;
    let z = as_array(RotationSpec::single(PauliAxis::Z, half).matrix());
    let x = as_array(RotationSpec::single(PauliAxis::X, half).matrix());
    matmul(z, matmul(x, z))
}

/// Three-mode block in the conjugate basis, tracking which modes have lost
/// an odd number of photons.
#[derive(Debug, Clone)]
pub struct ProtectedQubit {
    pub state: CoherentSuperposition,
    pub alpha: f64,
    pub flipped: [bool; 3],
}

impl ProtectedQubit {
    /// Encodes `q` (at amplitude `√3α`) and conjugates every mode.
    pub fn encode(q: &QubitState) -> Result<Self> {
        let alpha = q.alpha() / 3f64.sqrt();
        let h = conjugating_gate();
        let state = (0..3).try_fold(encode_three(q)?, |s, k| ideal_logical_gate(&s, k, alpha, h))?;
        Ok(Self { state, alpha, flipped: [false; 3] })
    }

    /// Runs `history` on one mode; the labels decay and are restored to the
    /// code when the block is next processed.
    pub fn lose(&self, mode: usize, history: &LossHistory) -> Result<Self> {
        let (state, _) = conditional_state(&self.state, mode, history)?;
        let mut flipped = self.flipped;
        flipped[mode] ^= history.events().len() % 2 == 1;
        Ok(Self { state, alpha: self.alpha, flipped })
    }

    pub fn flipped_modes(&self) -> usize {
        self.flipped.iter().filter(|f| **f).count()
    }
}

/// Undoes the conjugation, compares the parities of modes `(0, 1)` and
/// `(1, 2)` with ideal projectors, flips the mode they single out and
/// decodes back to one mode at `√3α`. Works in the ideal-projection model.
///
/// A block with two or more flipped modes is refused: its syndrome names the
/// wrong mode.
pub fn correct_sign_flip(block: &ProtectedQubit, sampler: &mut Sampler<'_>) -> Result<Vec<GateOutcome>> {
    let flipped = block.flipped_modes();
    if flipped >= 2 {
        return Err(Error::Uncorrectable { flipped });
    }
    decode_with_syndrome(block, sampler)
}

/// The correction circuit without the refusal.
pub fn decode_with_syndrome(block: &ProtectedQubit, sampler: &mut Sampler<'_>) -> Result<Vec<GateOutcome>> {
    let model = MeasurementModel::IdealProjection;
    let alpha = block.alpha;
    let h = conjugating_gate();
    let inverse = [[h[0][0].conj(), h[1][0].conj()], [h[0][1].conj(), h[1][1].conj()]];
    let state = (0..3).try_fold(block.state.clone(), |s, k| ideal_logical_gate(&s, k, alpha, inverse))?;
    let mut items = Vec::with_capacity(4);
    for s01 in [Parity::Even, Parity::Odd] {
        for s12 in [Parity::Even, Parity::Odd] {
            let terms = state.terms().iter().filter_map(|t| {
                let b: Vec<bool> = t.labels.iter().map(|l| l.re > 0.0).collect();
                let keep = Parity::of(usize::from(b[0] != b[1])) == s01 && Parity::of(usize::from(b[1] != b[2])) == s12;
                keep.then(|| (t.coeff, t.labels.clone()))
            });
            let projected = CoherentSuperposition::new(3, terms.collect::<Vec<_>>())?;
            let p = projected.code_norm_sqr();
            if p >= PROBABILITY_FLOOR {
                items.push((p, (projected, (s01, s12))));
            }
        }
    }
    let total = state.code_norm_sqr();
    let mut out = Vec::with_capacity(items.len());
    for (p, (projected, parities)) in sampler.pick(items, total) {
        let corrections: Vec<Correction> = match parities {
            (Parity::Even, Parity::Even) => vec![],
            (Parity::Odd, Parity::Even) => vec![Correction { pauli: Pauli::X, mode: 0 }],
            (Parity::Odd, Parity::Odd) => vec![Correction { pauli: Pauli::X, mode: 1 }],
            (Parity::Even, Parity::Odd) => vec![Correction { pauli: Pauli::X, mode: 2 }],
        };
        let raw = projected.clone();
        let fixed = corrections.iter().try_fold(projected, |s, c| c.apply(&s))?;
        let decoded = model.normalize(&decode_three(&fixed)?)?;
        out.push(GateOutcome {
            raw_state: decode_three(&raw)?,
            state: decoded,
            record: vec![Record::Syndrome { parities, corrections: corrections.clone() }],
            corrections: vec![],
            success: true,
            probability: p / total,
            model,
            resources: 0,
        });
    }
    Ok(out)
}

/// `(|−α,−√2α⟩ + |α,√2α⟩)/√N` from an even cat of amplitude `√3α`.
pub fn amplification_resource(alpha: f64) -> Result<CoherentSuperposition> {
    pad(&CoherentSuperposition::cat(3f64.sqrt() * alpha, Parity::Even)?, 1).beamsplitter((0, 1), third_split())
}

fn amplification_resource_for(ctx: GateContext) -> Result<CoherentSuperposition> {
    match ctx.model {
        MeasurementModel::PhotonCounting => amplification_resource(ctx.alpha)?.normalized(),
        MeasurementModel::IdealProjection => {
            let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
            let z = C64::new(0.0, 0.0);
            crate::gates::code_state(&[h, z, z, h], &[ctx.alpha, 2f64.sqrt() * ctx.alpha])
        }
    }
}

/// Teleports a single-mode qubit at `ctx.alpha` through the amplification
/// resource; successful branches hold the same qubit at `√2·alpha`.
pub fn amplify(ctx: GateContext, q: &CoherentSuperposition, sampler: &mut Sampler<'_>) -> Result<Vec<GateOutcome>> {
    if q.modes() != 1 {
        return Err(Error::DimensionMismatch(format!("expected one mode, found {}", q.modes())));
    }
    let b = append(Branch::start(q, ctx.model)?, &amplification_resource_for(ctx)?);
    Ok(bell_teleport(b, (0, 1, 2), ctx, Frame::Full, sampler)?.into_iter().map(|b| b.into_outcome(ctx.model)).collect())
}

/// [`amplify`] followed by a balanced split of the output: from the plus cat
/// at `alpha` this is a Bell resource at `alpha`.
pub fn amplify_to_bell(ctx: GateContext, q: &CoherentSuperposition, sampler: &mut Sampler<'_>) -> Result<Vec<GateOutcome>> {
    amplify(ctx, q, sampler)?
        .into_iter()
        .map(|mut o| {
            if o.success {
                o.state = pad(&o.state, 1).beamsplitter((0, 1), BeamsplitterConvention::real_coupled(-std::f64::consts::FRAC_PI_4))?;
            }
            Ok(o)
        })
        .collect()
}

/// Sum of `probability × fidelity` over successful outcomes, and their total
/// probability.
pub fn success_fidelity(outcomes: &[GateOutcome], target: &CoherentSuperposition) -> Result<(f64, f64)> {
    let mut p = 0.0;
    let mut pf = 0.0;
    for o in outcomes.iter().filter(|o| o.success) {
        p += o.probability;
        pf += o.probability * o.fidelity_with(target)?;
    }
    Ok((p, if p > 0.0 { pf / p } else { 0.0 }))
}
