//! Cat states from squeezed vacuum by photon subtraction on a beamsplitter:
//! squeezed light and vacuum meet on a splitter of angle `θ`, and counting
//! `m` photons in one output heralds an approximate even cat in the other.
//!
//! Everything depends on `λ` and `θ` only through `x = λ cos²θ`, except the
//! heralding probability.

use ndarray::{ArrayD, IxDyn};

use crate::coherent::CoherentSuperposition;
use crate::fock::{BeamsplitterConvention, FockVector, MultiModeState, Parity, PureState, Truncation, DEFAULT_TAIL_TOLERANCE};
use crate::gates::{BellOutcome, PauliAxis, RotationSpec};
use crate::numeric::{coherent_amplitudes, golden_section_max, ln_factorial};
use crate::{Error, Result, C64};

/// Search bracket for the best-matching cat amplitude.
pub const CAT_SEARCH_MAX: f64 = 4.0;
pub const CAT_SEARCH_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CatGenSpec {
    lambda: f64,
    theta_bs: f64,
    m: usize,
}

impl CatGenSpec {
    pub fn new(lambda: f64, theta_bs: f64, m: usize) -> Result<Self> {
        if !(lambda.abs() < 1.0) {
            return Err(Error::invalid(format!("squeezing parameter must satisfy |λ| < 1, got {lambda}")));
        }
        if !m.is_multiple_of(2) {
            return Err(Error::invalid(format!("heralding count must be even, got {m}")));
        }
        if !theta_bs.is_finite() {
            return Err(Error::invalid("beamsplitter angle must be finite"));
        }
        Ok(Self { lambda, theta_bs, m })
    }

    /// The generator settings with `λ cos²θ = effective`, `θ ∈ [0, π/2]`.
    pub fn from_effective(lambda: f64, effective: f64, m: usize) -> Result<Self> {
        let r = effective / lambda;
        if !(0.0..=1.0).contains(&r) {
            return Err(Error::invalid(format!("λ cos²θ = {effective} is unreachable with λ = {lambda}")));
        }
        Self::new(lambda, r.sqrt().acos(), m)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn theta_bs(&self) -> f64 {
        self.theta_bs
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// `λ cos²θ`.
    pub fn effective(&self) -> f64 {
        self.lambda * self.theta_bs.cos().powi(2)
    }
}

/// Heralded state from the closed form: amplitude on `|2n⟩` proportional to
/// `(2n+m)! (x/2)^{n+m/2} / ((n+m/2)! √((2n)!))`.
pub fn dakna_state(spec: &CatGenSpec, cutoff: usize) -> Result<FockVector> {
    let x = spec.effective();
    let half = spec.m / 2;
    let mut amps = vec![C64::new(0.0, 0.0); cutoff + 1];
    if x == 0.0 {
        amps[0] = C64::new(1.0, 0.0);
        return FockVector::new(amps);
    }
    let lx = (x.abs() / 2.0).ln();
    let ln = |n: usize| ln_factorial(2 * n + spec.m) - ln_factorial(n + half) - 0.5 * ln_factorial(2 * n) + (n + half) as f64 * lx;
    // log amplitudes relative to the n = 0 term keep the sum finite
    let base = ln(0);
    let mut n = 0;
    while 2 * n <= cutoff {
        let sign = if x < 0.0 && (n + half) % 2 == 1 { -1.0 } else { 1.0 };
        amps[2 * n] = C64::new(sign * (ln(n) - base).exp(), 0.0);
        n += 1;
    }
    let state = FockVector::new(amps)?.normalized()?;
    let (last, next) = (ln(n - 1), ln(n));
    let ratio = (2.0 * (next - last)).exp();
    let tail =
        state.edge_mass() + if ratio < 1.0 { ratio / (1.0 - ratio) * state.amplitudes()[2 * (n - 1)].norm_sqr() } else { f64::INFINITY };
    if tail > DEFAULT_TAIL_TOLERANCE {
        return Err(Error::Truncation { tail, tolerance: DEFAULT_TAIL_TOLERANCE, cutoff });
    }
    Ok(state)
}

/// Squeezed vacuum and vacuum on the splitter, both outputs kept.
fn pipeline_output(spec: &CatGenSpec, cutoff: usize) -> Result<MultiModeState> {
    let squeezed = Truncation::new(cutoff).squeezed_even(spec.lambda)?;
    MultiModeState::product(&[squeezed, FockVector::vacuum(cutoff)])?
        .beamsplitter((0, 1), BeamsplitterConvention::real_coupled(spec.theta_bs))
}

/// The same heralded state simulated directly: returns it with the
/// probability of counting `m`.
pub fn dakna_pipeline(spec: &CatGenSpec, cutoff: usize) -> Result<(FockVector, f64)> {
    let (rest, p) = pipeline_output(spec, cutoff)?.project_fock(1, spec.m)?;
    Ok((rest.to_single_mode()?, p))
}

/// Probability of every count `0..=cutoff` in the heralding port, odd ones
/// included.
pub fn pipeline_count_distribution(spec: &CatGenSpec, cutoff: usize) -> Result<Vec<f64>> {
    pipeline_output(spec, cutoff)?.marginal(1)
}

/// Mean photon number from the general coefficients
/// `c_{n,m} = (n+m)!(1+(−1)^{n+m}) / (√(n!) Γ((n+m)/2+1))`.
pub fn dakna_mean_photon(spec: &CatGenSpec, cutoff: usize) -> Result<f64> {
    let x = spec.effective();
    if x == 0.0 {
        return Ok(0.0);
    }
    let lx = (x.abs() / 2.0).ln();
    let logs: Vec<(usize, f64)> = (0..=cutoff)
        .filter(|n| (n + spec.m).is_multiple_of(2))
        .map(|n| {
            let s = n + spec.m;
            let ln_c = ln_factorial(s) + 2f64.ln() - 0.5 * ln_factorial(n) - ln_factorial(s / 2);
            (n, 2.0 * ln_c + s as f64 * lx)
        })
        .collect();
    let top = logs.iter().map(|(_, l)| *l).fold(f64::NEG_INFINITY, f64::max);
    let (mut norm, mut moment) = (0.0, 0.0);
    for (n, l) in &logs {
        let w = (l - top).exp();
        norm += w;
        moment += *n as f64 * w;
    }
    let edge = logs.iter().rev().take(1).map(|(_, l)| (l - top).exp()).sum::<f64>() / norm;
    if edge > DEFAULT_TAIL_TOLERANCE {
        return Err(Error::Truncation { tail: edge, tolerance: DEFAULT_TAIL_TOLERANCE, cutoff });
    }
    Ok(moment / norm)
}

/// Closed-form heralding probability
/// `√((1−λ²)/(1−λ²cos⁴θ)) [λ² sin²2θ / 4(1−λ²cos⁴θ)]^m Σ_l m!/((m−2l)! l!² (2λcos²θ)^{2l})`,
/// with the powers regrouped so that `λ cos²θ = 0` is finite.
pub fn dakna_probability(lambda: f64, theta_bs: f64, m: usize) -> Result<f64> {
    if !(lambda.abs() < 1.0) {
        return Err(Error::invalid(format!("squeezing parameter must satisfy |λ| < 1, got {lambda}")));
    }
    if !m.is_multiple_of(2) {
        return Err(Error::invalid(format!("heralding count must be even, got {m}")));
    }
    let (s, c) = theta_bs.sin_cos();
    let d = 1.0 - lambda * lambda * c.powi(4);
    let prefactor = ((1.0 - lambda * lambda) / d).sqrt();
    let sum: f64 = (0..=m / 2)
        .map(|l| {
            let comb = (ln_factorial(m) - ln_factorial(m - 2 * l) - 2.0 * ln_factorial(l)).exp();
            comb * lambda.powi(2 * (m - l) as i32) * s.powi(2 * m as i32) * c.powi((2 * m - 4 * l) as i32)
                / (d.powi(m as i32) * 4f64.powi(l as i32))
        })
        .sum();
    Ok(prefactor * sum)
}

/// Exact `⟨n|C₊(α)⟩` for `n ≤ cutoff`, with `C₊(0) = |0⟩`.
fn even_cat_amplitudes(alpha: f64, cutoff: usize) -> Vec<f64> {
    let norm = (2.0 + 2.0 * (-2.0 * alpha * alpha).exp()).sqrt();
    coherent_amplitudes(C64::new(alpha, 0.0), cutoff)
        .into_iter()
        .enumerate()
        .map(|(n, a)| if n % 2 == 0 { 2.0 * a.re / norm } else { 0.0 })
        .collect()
}

/// Amplitude of the even cat that best matches a state, and the fidelity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BestCat {
    pub alpha: f64,
    pub fidelity: f64,
}

/// `|⟨C₊(α)|ψ⟩|²` maximised over `α ∈ [0, 4]`.
pub fn best_cat(state: &FockVector) -> Result<BestCat> {
    let psi = state.normalized()?;
    let f = |alpha: f64| {
        let cat = even_cat_amplitudes(alpha, psi.cutoff());
        psi.amplitudes().iter().zip(cat).map(|(a, c)| a * c).sum::<C64>().norm_sqr()
    };
    let (alpha, fidelity) = golden_section_max(f, 0.0, CAT_SEARCH_MAX, CAT_SEARCH_TOLERANCE);
    Ok(BestCat { alpha, fidelity })
}

pub fn dakna_fidelity(spec: &CatGenSpec, cutoff: usize) -> Result<BestCat> {
    best_cat(&dakna_state(spec, cutoff)?)
}

/// Two-mode resource made by splitting a source state with vacuum, compared
/// with `(|α,α⟩ + |−α,−α⟩)/√N` at the best `α`.
#[derive(Debug, Clone)]
pub struct SplitResource {
    pub state: MultiModeState,
    pub alpha: f64,
    pub fidelity: f64,
}

/// Splits `source` the way a cat of amplitude `√2α` becomes a Bell pair.
pub fn bell_from_source(source: &FockVector) -> Result<SplitResource> {
    let cutoff = source.cutoff();
    let state = MultiModeState::product(&[source.normalized()?, FockVector::vacuum(cutoff)])?
        .beamsplitter((0, 1), BeamsplitterConvention::real_coupled(-std::f64::consts::FRAC_PI_4))?;
    let f = |alpha: f64| {
        let a = coherent_amplitudes(C64::new(alpha, 0.0), cutoff);
        let norm = (2.0 + 2.0 * (-4.0 * alpha * alpha).exp()).sqrt();
        let mut acc = C64::new(0.0, 0.0);
        for ((j, k), v) in state.amplitudes().indexed_iter().map(|(i, v)| ((i[0], i[1]), v)) {
            if (j + k) % 2 == 0 {
                acc += 2.0 * a[j].re * a[k].re / norm * v;
            }
        }
        acc.norm_sqr()
    };
    let (alpha, fidelity) = golden_section_max(f, 0.0, CAT_SEARCH_MAX / 2f64.sqrt(), CAT_SEARCH_TOLERANCE);
    Ok(SplitResource { state, alpha, fidelity })
}

pub fn dakna_bell_resource(spec: &CatGenSpec, cutoff: usize) -> Result<SplitResource> {
    bell_from_source(&dakna_state(spec, cutoff)?)
}

/// Outcome of the single-step `R_Z` demonstration with generated states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateDemo {
    /// Average over all counts of the fidelity with the target.
    pub fidelity: f64,
    /// Code amplitude of the resource (and of the matched input).
    pub alpha: f64,
    /// `λ cos²θ` used for the input qubit.
    pub input_effective: f64,
    pub input_fidelity: f64,
    pub resource_fidelity: f64,
}

/// `R_Z(2φ)` on a plus-cat-like input through a Bell-like resource, both as
/// Fock states. Each count's raw output is compared with the target carried
/// through that count's Pauli frame; the average over counts is returned.
pub fn gate_demo_with(input: &FockVector, resource: &MultiModeState, alpha: f64, phi: f64) -> Result<f64> {
    let cutoff = input.cutoff();
    if resource.modes() != 2 || resource.cutoff() != cutoff {
        return Err(Error::DimensionMismatch("resource must be two modes with the input's cutoff".into()));
    }
    let dim = cutoff + 1;
    let mut amps = ArrayD::<C64>::zeros(IxDyn(&[dim, dim, dim]));
    for (idx, a) in amps.indexed_iter_mut() {
        *a = input.amplitudes()[idx[0]] * resource.amplitude(&[idx[1], idx[2]]);
    }
    let theta = 2.0 * phi;
    let state = MultiModeState::from_array(amps)?
        .translate(0, crate::gates::rz_displacement(theta, alpha))?
        .beamsplitter((0, 1), BeamsplitterConvention::balanced())?;
    let total = state.norm_sqr();
    let q = crate::coherent::QubitState::cat(alpha, Parity::Even)?;
    let target = crate::gates::rotated_target(&q, &RotationSpec::single(PauliAxis::Z, theta))?;
    let mut fidelity = 0.0;
    for na in 0..dim {
        for nb in 0..dim {
            let v: Vec<C64> = (0..dim).map(|k| state.amplitude(&[na, nb, k])).collect();
            let w: f64 = v.iter().map(|a| a.norm_sqr()).sum();
            if w / total < 1e-16 {
                continue;
            }
            let expected = framed_target(&target, BellOutcome::from_counts(na, nb), cutoff)?;
            let overlap: C64 = expected.iter().zip(&v).map(|(e, a)| e.conj() * a).sum();
            fidelity += overlap.norm_sqr() / total;
        }
    }
    Ok(fidelity)
}

/// The target as it appears before the frame of `outcome` is undone.
fn framed_target(target: &CoherentSuperposition, outcome: BellOutcome, cutoff: usize) -> Result<Vec<C64>> {
    let mut t = target.clone();
    for p in outcome.kind.frame().iter().rev() {
        t = crate::gates::Correction { pauli: *p, mode: 0 }.apply(&t)?;
    }
    let t = t.normalized()?;
    let mut v = vec![C64::new(0.0, 0.0); cutoff + 1];
    for term in t.terms() {
        for (n, a) in coherent_amplitudes(term.labels[0], cutoff).into_iter().enumerate() {
            v[n] += term.coeff * a;
        }
    }
    let norm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    Ok(v.into_iter().map(|a| a / norm).collect())
}

/// Full demonstration: the resource comes from `spec` split on a 50:50
/// splitter; the input qubit is generated with the same `λ` and `m` at the
/// `λ cos²θ` whose best cat matches the resource amplitude.
pub fn dakna_gate_demo(phi: f64, spec: &CatGenSpec, cutoff: usize) -> Result<GateDemo> {
    let resource = dakna_bell_resource(spec, cutoff)?;
    let alpha = resource.alpha;
    let amplitude_at = |x: f64| -> Result<BestCat> { dakna_fidelity(&CatGenSpec::from_effective(spec.lambda, x, spec.m)?, cutoff) };
    let (mut lo, mut hi) = (1e-6 * spec.effective().signum(), spec.effective());
    if amplitude_at(lo)?.alpha > alpha || amplitude_at(hi)?.alpha < alpha {
        return Err(Error::invalid(format!("no input state with best cat amplitude {alpha}")));
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if amplitude_at(mid)?.alpha < alpha {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let x = 0.5 * (lo + hi);
    let input_spec = CatGenSpec::from_effective(spec.lambda, x, spec.m)?;
    let input = dakna_state(&input_spec, cutoff)?;
    let fidelity = gate_demo_with(&input, &resource.state, alpha, phi)?;
    Ok(GateDemo { fidelity, alpha, input_effective: x, input_fidelity: best_cat(&input)?.fidelity, resource_fidelity: resource.fidelity })
}

#[cfg(test)]
mod tests {
    use super::*;

    const CUTOFF: usize = 80;

    #[test]
    fn vacuum_without_squeezing() {
        let s = dakna_state(&CatGenSpec::new(0.0, 0.3, 0).unwrap(), 20).unwrap();
        assert!((s.amplitudes()[0].norm() - 1.0).abs() < 1e-15);
        let best = dakna_fidelity(&CatGenSpec::new(0.0, 0.3, 0).unwrap(), 20).unwrap();
        assert!((best.fidelity - 1.0).abs() < 1e-12 && best.alpha < 1e-3);
        assert_eq!(dakna_mean_photon(&CatGenSpec::new(0.0, 0.0, 0).unwrap(), 20).unwrap(), 0.0);
    }

    #[test]
    fn small_x_two_photon_ratio() {
        let x = 0.01;
        for m in [0, 2, 4, 6] {
            let s = dakna_state(&CatGenSpec::from_effective(0.5, x, m).unwrap(), 40).unwrap();
            let ratio = s.amplitudes()[2].re / s.amplitudes()[0].re;
            let approx = x * (1.0 + m as f64) / 2f64.sqrt();
            assert!((ratio - approx).abs() < 1e-3, "{m}: {ratio} vs {approx}");
        }
    }

    #[test]
    fn closed_form_matches_pipeline() {
        for lambda in [0.3, 0.6] {
            for x in [0.05, 0.2, 0.3, 0.45, 0.58].into_iter().filter(|x| *x < lambda) {
                for m in [0, 2, 4, 6, 10] {
                    let spec = CatGenSpec::from_effective(lambda, x, m).unwrap();
                    // the heralded mode keeps at most `cutoff - m` photons
                    let closed = dakna_state(&spec, CUTOFF).unwrap();
                    let (piped, p) = dakna_pipeline(&spec, CUTOFF + m).unwrap();
                    let piped = FockVector::new(piped.amplitudes()[..=CUTOFF].to_vec()).unwrap();
                    assert!((crate::fock::fidelity(&closed, &piped).unwrap() - 1.0).abs() < 1e-10);
                    let formula = dakna_probability(lambda, spec.theta_bs(), m).unwrap();
                    assert!(formula > 0.0 && formula <= 1.0);
                    assert!(((formula - p) / p).abs() < 1e-8, "{lambda} {x} {m}: {formula} vs {p}");
                }
            }
        }
    }

    #[test]
    fn only_even_photon_numbers() {
        let s = dakna_state(&CatGenSpec::from_effective(0.6, 0.5, 4).unwrap(), CUTOFF).unwrap();
        assert!(s.amplitudes().iter().skip(1).step_by(2).all(|a| *a == C64::new(0.0, 0.0)));
    }

    #[test]
    fn mean_photon_two_ways() {
        for m in [0, 2, 4, 10] {
            let spec = CatGenSpec::from_effective(0.6, 0.4, m).unwrap();
            let direct = dakna_state(&spec, CUTOFF).unwrap().mean_photon();
            assert!((dakna_mean_photon(&spec, CUTOFF).unwrap() - direct).abs() < 1e-10);
        }
    }

    #[test]
    fn mean_photon_grows_with_m() {
        let mut last = -1.0;
        for m in [0, 2, 4, 6, 10] {
            let n = dakna_mean_photon(&CatGenSpec::from_effective(0.6, 0.1, m).unwrap(), CUTOFF).unwrap();
            assert!(n > last);
            last = n;
        }
    }

    #[test]
    fn heralding_probabilities_complete() {
        let spec = CatGenSpec::new(0.6, 0.7, 0).unwrap();
        let total: f64 = pipeline_count_distribution(&spec, CUTOFF).unwrap().iter().sum();
        assert!((total - 1.0).abs() < 1e-8);
        let p0 = dakna_probability(0.6, 0.7, 0).unwrap();
        let c4 = 0.7f64.cos().powi(4);
        assert!((p0 - ((1.0 - 0.36) / (1.0 - 0.36 * c4)).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn ideal_source_gives_exact_pair() {
        let alpha = 1.1;
        let source = Truncation::new(60).cat(2f64.sqrt() * alpha, Parity::Even).unwrap();
        let r = bell_from_source(&source).unwrap();
        assert!((r.fidelity - 1.0).abs() < 1e-10);
        assert!((r.alpha - alpha).abs() < 1e-4);
    }

    #[test]
    fn splitting_preserves_the_source_fidelity() {
        for x in [0.1, 0.3, 0.5] {
            let spec = CatGenSpec::from_effective(0.6, x, 2).unwrap();
            let single = dakna_fidelity(&spec, CUTOFF).unwrap();
            let pair = dakna_bell_resource(&spec, CUTOFF).unwrap();
            assert!(pair.fidelity <= single.fidelity + 1e-9);
            assert!((pair.alpha * 2f64.sqrt() - single.alpha).abs() < 1e-4);
        }
    }

    #[test]
    fn small_effective_parameter_is_nearly_a_cat() {
        for x in [0.05, 0.15, 0.3] {
            let f = dakna_fidelity(&CatGenSpec::from_effective(0.6, x, 0).unwrap(), 40).unwrap();
            assert!(f.fidelity > 0.99, "{x}: {f:?}");
        }
    }

    #[test]
    fn pinned_fidelities() {
        let f = dakna_fidelity(&CatGenSpec::from_effective(0.6, 0.5, 4).unwrap(), CUTOFF).unwrap();
        assert!((f.fidelity - 0.94324).abs() < 1e-5, "{f:?}");
        let spec = CatGenSpec::from_effective(0.6, 0.3, 2).unwrap();
        let f = dakna_fidelity(&spec, CUTOFF).unwrap();
        assert!((f.fidelity - 0.98971).abs() < 1e-5, "{f:?}");
        assert!((dakna_probability(0.6, spec.theta_bs(), 2).unwrap() - 0.05378).abs() < 1e-5);
    }

    #[test]
    fn ideal_states_reproduce_the_bare_gate() {
        let alpha = 2.0;
        let phi = std::f64::consts::PI / 32.0;
        let t = Truncation::new(50);
        let input = t.cat(alpha, Parity::Even).unwrap();
        let resource = bell_from_source(&t.cat(2f64.sqrt() * alpha, Parity::Even).unwrap()).unwrap();
        let demo = gate_demo_with(&input, &resource.state, alpha, phi).unwrap();
        let bare = crate::gates::overall_fidelity(alpha, 2.0 * phi).unwrap();
        assert!((demo - bare).abs() < 1e-5, "{demo} vs {bare}");
    }

    #[test]
    fn generated_states_drive_the_gate() {
        for x in [0.1, 0.3] {
            let spec = CatGenSpec::from_effective(0.6, x, 2).unwrap();
            let demo = dakna_gate_demo(std::f64::consts::PI / 32.0, &spec, 40).unwrap();
            assert!(demo.fidelity > 0.9, "{x}: {demo:?}");
        }
    }
}
