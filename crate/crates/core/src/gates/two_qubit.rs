//! The entangling `ZZ` rotation and the `X` rotation built from it.

use std::f64::consts::FRAC_PI_2;

use rand::RngCore;

use crate::coherent::CoherentSuperposition;
use crate::fock::{BeamsplitterConvention, Parity};
use crate::{Error, Result};

use super::protocol::{append, cat_pair, stage, teleport, Branch, Frame, GateContext};
use super::rotation::{check_steps, merge, run_teleported, single, GatedResource, TeleportedOptions};
use super::{BellKind, Correction, GateOutcome, MeasurementModel, Pauli, PortCounts, Record, Sampler};

/// How a gate is realised.
#[derive(Debug, Clone, PartialEq)]
pub enum Strategy {
    /// Couple, then teleport the coupled modes back onto the code.
    Bare,
    /// `steps` bare gates by a fraction of the angle each.
    Zeno { steps: usize },
    /// Gate a resource first and teleport the qubits through it.
    Teleported(TeleportedOptions),
}

/// Splitter angle giving the phase `e^{±iφ/2}` between equal and opposite code
/// words on two modes of amplitude `alpha`.
pub fn zz_splitter_angle(phi: f64, alpha: f64) -> Result<f64> {
    let s = phi / (4.0 * alpha * alpha);
    if s.abs() > 1.0 {
        return Err(Error::invalid(format!("rotation {phi} too large for amplitude {alpha}")));
    }
    Ok(2.0 * s.asin())
}

/// Splitter angle between qubit and resource arm for `R_X(±π/2)`.
pub fn rx_splitter_angle(theta: f64, alpha: f64) -> Result<f64> {
    zz_splitter_angle(theta, alpha)
}

pub(crate) fn zz_stage(b: Branch, (a, c): (usize, usize), phi: f64, ctx: GateContext, sampler: &mut Sampler<'_>) -> Result<Vec<Branch>> {
    let conv = BeamsplitterConvention::phase_coupled(zz_splitter_angle(phi, ctx.alpha)?);
    let b = b.map(|s| {
        let s = s.beamsplitter((a, c), conv)?;
        match ctx.model {
            MeasurementModel::IdealProjection => s.snap_to_code(a, ctx.alpha)?.snap_to_code(c, ctx.alpha),
            MeasurementModel::PhotonCounting => Ok(s),
        }
    })?;
    let first = teleport(b, a, ctx, Frame::Full, sampler)?;
    stage(first, |b| teleport(b, c, ctx, Frame::Full, sampler))
}

fn zz_zeno(
    branches: Vec<Branch>,
    modes: (usize, usize),
    phi: f64,
    steps: usize,
    ctx: GateContext,
    sampler: &mut Sampler<'_>,
) -> Result<Vec<Branch>> {
    let mut branches = branches;
    for _ in 0..steps {
        branches = stage(branches, |b| zz_stage(b, modes, phi / steps as f64, ctx, sampler))?;
        if sampler.is_exhaustive() {
            branches = merge(branches);
        }
    }
    Ok(branches)
}

/// `R(Z⊗Z, −φ)`: phase `e^{iφ/2}` on equal code words and `e^{−iφ/2}` on
/// opposite ones.
pub fn gate_zz(
    ctx: GateContext,
    state: &CoherentSuperposition,
    modes: (usize, usize),
    phi: f64,
    strategy: &Strategy,
    sampler: &mut Sampler<'_>,
) -> Result<Vec<GateOutcome>> {
    let start = Branch::start(state, ctx.model)?;
    let branches = match strategy {
        Strategy::Bare => zz_stage(start, modes, phi, ctx, sampler)?,
        Strategy::Zeno { steps } => {
            check_steps(ctx, *steps, sampler)?;
            zz_zeno(vec![start], modes, phi, *steps, ctx, sampler)?
        }
        Strategy::Teleported(options) => {
            let rng = random(sampler)?;
            return Ok(vec![run_teleported(&ZzRotation, ctx, state, &[modes.0, modes.1], phi, options, Frame::Full, rng)?]);
        }
    };
    Ok(branches.into_iter().map(|b| b.into_outcome(ctx.model)).collect())
}

fn random<'s>(sampler: &'s mut Sampler<'_>) -> Result<&'s mut dyn RngCore> {
    match sampler {
        Sampler::Random(rng) => Ok(&mut **rng),
        Sampler::Exhaustive => Err(Error::invalid("teleported gates retry until success and must be sampled")),
    }
}

struct ZzRotation;

impl GatedResource for ZzRotation {
    fn width(&self) -> usize {
        2
    }

    fn prepare(&self, angle: f64, ctx: GateContext, sampler: &mut Sampler<'_>) -> Result<(Branch, Vec<PortCounts>)> {
        let pair = ctx.resource()?;
        let mut r = Branch::start(&pair.tensor(&pair), ctx.model)?;
        r.resources = 2;
        let r = single(zz_stage(r, (0, 2), angle, ctx, sampler)?)?;
        let counts = bell_counts(&r).into_iter().rev().take(2).collect::<Vec<_>>().into_iter().rev().collect();
        Ok((r, counts))
    }

    fn realized_sign(&self, kinds: &[BellKind]) -> f64 {
        let flips = kinds.iter().filter(|k| matches!(k, BellKind::B01 | BellKind::B11)).count();
        if flips % 2 == 1 {
            -1.0
        } else {
            1.0
        }
    }

    fn pi_correction(&self, modes: &[usize]) -> Vec<Correction> {
        modes.iter().map(|&mode| Correction { pauli: Pauli::Z, mode }).collect()
    }
}

fn bell_counts(b: &Branch) -> Vec<PortCounts> {
    b.record
        .iter()
        .filter_map(|r| match r {
            Record::Bell { outcome, .. } => Some(outcome.counts),
            _ => None,
        })
        .collect()
}

/// Corrections after measuring the qubit (`first`) and the resource arm
/// (`second`) in the cat basis; the raw output is `Z^second · R_X · Z^first`.
fn rx_corrections(first: Parity, second: Parity, mode: usize) -> Vec<Correction> {
    let p = |pauli| Correction { pauli, mode };
    match (first, second) {
        (Parity::Even, Parity::Even) => vec![],
        (Parity::Even, Parity::Odd) => vec![p(Pauli::Z)],
        (Parity::Odd, Parity::Even) => vec![p(Pauli::X), p(Pauli::Z)],
        (Parity::Odd, Parity::Odd) => vec![p(Pauli::X)],
    }
}

fn check_rx_angle(theta: f64) -> Result<()> {
    if (theta.abs() - FRAC_PI_2).abs() > 1e-12 {
        return Err(Error::invalid(format!("only R_X(±π/2) is supported, got {theta}")));
    }
    Ok(())
}

/// Couples the qubit to one arm of a fresh pair, reads both in the cat basis,
/// and leaves the other arm in the qubit's place.
pub(crate) fn rx_stage(
    b: Branch,
    mode: usize,
    theta: f64,
    steps: Option<usize>,
    ctx: GateContext,
    sampler: &mut Sampler<'_>,
) -> Result<Vec<Branch>> {
    check_rx_angle(theta)?;
    let m = b.state.modes();
    let b = append(b, &ctx.resource()?);
    let coupled = match steps {
        None => {
            let conv = BeamsplitterConvention::phase_coupled(rx_splitter_angle(theta, ctx.alpha)?);
            vec![b.map(|s| s.beamsplitter((mode, m), conv))?]
        }
        Some(steps) => zz_zeno(vec![b], (mode, m), theta, steps, ctx, sampler)?,
    };
    let mut out = Vec::new();
    for b in coupled {
        if !b.success {
            out.push(b);
            continue;
        }
        for (mut c, (first, second), counts) in cat_pair(b, (mode, m), ctx, sampler)? {
            if !c.success {
                out.push(c);
                continue;
            }
            c.state = c.state.move_mode(m - 1, mode)?;
            let corrections = rx_corrections(first, second, mode);
            c.record.push(Record::Cat { parities: (first, second), counts, corrections: corrections.clone() });
            out.push(c.correct(corrections, ctx.model)?);
        }
    }
    Ok(out)
}

/// `R_X(θ)` for `θ = ±π/2`.
pub fn gate_rx(
    ctx: GateContext,
    state: &CoherentSuperposition,
    mode: usize,
    theta: f64,
    strategy: &Strategy,
    sampler: &mut Sampler<'_>,
) -> Result<Vec<GateOutcome>> {
    check_rx_angle(theta)?;
    let start = Branch::start(state, ctx.model)?;
    let branches = match strategy {
        Strategy::Bare => rx_stage(start, mode, theta, None, ctx, sampler)?,
        Strategy::Zeno { steps } => {
            check_steps(ctx, *steps, sampler)?;
            let out = rx_stage(start, mode, theta, Some(*steps), ctx, sampler)?;
            if sampler.is_exhaustive() {
                merge(out)
            } else {
                out
            }
        }
        Strategy::Teleported(options) => {
            let rng = random(sampler)?;
            return Ok(vec![run_teleported(&XRotation, ctx, state, &[mode], theta, options, Frame::ThroughRx, rng)?]);
        }
    };
    Ok(branches.into_iter().map(|b| b.into_outcome(ctx.model)).collect())
}

struct XRotation;

impl GatedResource for XRotation {
    fn width(&self) -> usize {
        1
    }

    fn prepare(&self, angle: f64, ctx: GateContext, sampler: &mut Sampler<'_>) -> Result<(Branch, Vec<PortCounts>)> {
        let mut r = Branch::start(&ctx.resource()?, ctx.model)?;
        r.resources = 1;
        let r = single(rx_stage(r, 0, angle, None, ctx, sampler)?)?;
        let counts = r
            .record
            .iter()
            .rev()
            .find_map(|x| match x {
                Record::Cat { counts, .. } => Some(*counts),
                _ => None,
            })
            .flatten();
        Ok((r, vec![counts]))
    }

    fn realized_sign(&self, _kinds: &[BellKind]) -> f64 {
        1.0
    }

    fn pi_correction(&self, modes: &[usize]) -> Vec<Correction> {
        vec![Correction { pauli: Pauli::X, mode: modes[0] }]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coherent::QubitState;
    use crate::gates::{code_state, logical_amplitudes, rotated_target, PauliAxis, RotationSpec};
    use crate::C64;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn ideal(alpha: f64) -> GateContext {
        GateContext::new(alpha, MeasurementModel::IdealProjection).unwrap()
    }

    fn pair(alpha: f64) -> (Vec<C64>, CoherentSuperposition) {
        let v = vec![C64::new(0.5, 0.1), C64::new(0.3, -0.2), C64::new(-0.4, 0.2), C64::new(0.1, 0.6)];
        let s = code_state(&v, &[alpha, alpha]).unwrap();
        (v, s)
    }

    #[test]
    fn zz_phase_pattern() {
        let (alpha, phi) = (2.0, PI / 16.0);
        let (v, s) = pair(alpha);
        let want = RotationSpec::new(vec![PauliAxis::Z, PauliAxis::Z], -phi).apply(&v).unwrap();
        let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        for o in gate_zz(ideal(alpha), &s, (0, 1), phi, &Strategy::Bare, &mut Sampler::Exhaustive).unwrap() {
            if !o.success {
                continue;
            }
            let got = logical_amplitudes(&o.state, &[alpha, alpha]).unwrap();
            let phase = got[0] / (want[0] / norm);
            let phase = phase / phase.norm();
            for (g, w) in got.iter().zip(&want) {
                assert!((g - phase * w / norm).norm() < 1e-6);
            }
        }
    }

    #[test]
    fn zz_zeno_success() {
        let alpha = 2.0;
        let (_, s) = pair(alpha);
        let out = gate_zz(ideal(alpha), &s, (0, 1), PI / 2.0, &Strategy::Zeno { steps: 8 }, &mut Sampler::Exhaustive).unwrap();
        let p: f64 = out.iter().filter(|o| o.success).map(|o| o.probability).sum();
        let expected = (-(PI / 2.0).powi(2) / (8.0 * 2.0 * 16.0)).exp();
        assert!((p - expected).abs() < 1e-3, "{p} vs {expected}");
    }

    #[test]
    fn zz_teleported_reaches_target() {
        let alpha = 2.0;
        let (v, s) = pair(alpha);
        let target = code_state(&RotationSpec::new(vec![PauliAxis::Z, PauliAxis::Z], -0.5).apply(&v).unwrap(), &[alpha, alpha]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..30 {
            let o = &gate_zz(
                ideal(alpha),
                &s,
                (0, 1),
                0.5,
                &Strategy::Teleported(TeleportedOptions::default()),
                &mut Sampler::Random(&mut rng),
            )
            .unwrap()[0];
            if o.success {
                assert!((o.fidelity_with(&target).unwrap() - 1.0).abs() < 1e-9);
            }
        }
    }

    fn rx_once(c: GateContext, s: &CoherentSuperposition, theta: f64, strategy: &Strategy) -> Vec<GateOutcome> {
        gate_rx(c, s, 0, theta, strategy, &mut Sampler::Exhaustive).unwrap()
    }

    #[test]
    fn rx_outcomes_all_give_the_rotation() {
        let alpha = 2.0;
        let c = ideal(alpha);
        let q = QubitState::new(C64::new(0.8, 0.1), C64::new(-0.3, 0.5), alpha).unwrap();
        let target = rotated_target(&q, &RotationSpec::single(PauliAxis::X, PI / 2.0)).unwrap();
        let out = rx_once(c, &q.superposition(), PI / 2.0, &Strategy::Bare);
        assert_eq!(out.iter().filter(|o| o.success).count(), 4);
        for o in out.iter().filter(|o| o.success) {
            assert!((o.fidelity_with(&target).unwrap() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn rx_squared_is_x() {
        let alpha = 2.0;
        let c = ideal(alpha);
        let q = QubitState::new(C64::new(0.8, 0.1), C64::new(-0.3, 0.5), alpha).unwrap();
        let once = rx_once(c, &q.superposition(), PI / 2.0, &Strategy::Bare).into_iter().find(|o| o.success).unwrap();
        let twice = rx_once(c, &once.state, PI / 2.0, &Strategy::Bare).into_iter().find(|o| o.success).unwrap();
        let flipped = q.bit_flip().superposition();
        assert!((c.model.fidelity(&twice.state, &flipped).unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn rx_balances_a_code_word() {
        let alpha = 2.0;
        let c = ideal(alpha);
        let one = QubitState::one(alpha).unwrap().superposition();
        for o in rx_once(c, &one, PI / 2.0, &Strategy::Bare).into_iter().filter(|o| o.success) {
            let v = logical_amplitudes(&o.state, &[alpha]).unwrap();
            assert!((v[0].norm_sqr() - v[1].norm_sqr()).abs() < 1e-6);
        }
    }

    #[test]
    fn rx_bare_success_matches_overlap_loss() {
        let alpha = 2.0;
        let c = ideal(alpha);
        let q = QubitState::worst_case(alpha).unwrap().superposition();
        let p: f64 = rx_once(c, &q, PI / 2.0, &Strategy::Bare).iter().filter(|o| o.success).map(|o| o.probability).sum();
        // Each coupled mode keeps |⟨±α|cα ± isα⟩|² = e^{−2α²(1−c)}.
        let s = PI / (8.0 * alpha * alpha);
        let expected = (-4.0 * alpha * alpha * (1.0 - (1.0 - s * s).sqrt())).exp();
        assert!((p - expected).abs() < 1e-12, "{p} vs {expected}");
    }

    #[test]
    fn rx_teleported_and_zeno() {
        let alpha = 2.0;
        let c = ideal(alpha);
        let q = QubitState::new(C64::new(0.8, 0.1), C64::new(-0.3, 0.5), alpha).unwrap();
        let target = rotated_target(&q, &RotationSpec::single(PauliAxis::X, -PI / 2.0)).unwrap();
        for o in rx_once(c, &q.superposition(), -PI / 2.0, &Strategy::Zeno { steps: 4 }).iter().filter(|o| o.success) {
            assert!((o.fidelity_with(&target).unwrap() - 1.0).abs() < 1e-9);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..30 {
            let o = &gate_rx(
                c,
                &q.superposition(),
                0,
                -PI / 2.0,
                &Strategy::Teleported(TeleportedOptions::default()),
                &mut Sampler::Random(&mut rng),
            )
            .unwrap()[0];
            if o.success {
                assert!((o.fidelity_with(&target).unwrap() - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn exhaustive_teleported_is_rejected() {
        let c = ideal(2.0);
        let q = QubitState::worst_case(2.0).unwrap().superposition();
        assert!(gate_rx(c, &q, 0, PI / 2.0, &Strategy::Teleported(TeleportedOptions::default()), &mut Sampler::Exhaustive).is_err());
    }
}
