//! Single-qubit phase rotations: `Z` by repeated teleportation and `R_Z(θ)` by
//! a small displacement followed by teleportation.

use std::collections::BTreeSet;
use std::f64::consts::{PI, TAU};

use rand::RngCore;

use crate::coherent::CoherentSuperposition;
use crate::{Error, Result, C64};

use super::protocol::{bell_teleport, stage, teleport, Branch, Frame, GateContext};
use super::{BellKind, Correction, GateOutcome, MeasurementModel, Pauli, PortCounts, Record, Sampler};

/// Cap on teleportations while waiting for the `Z` frame to appear.
pub const MAX_Z_ATTEMPTS: usize = 200;

/// Label shift that realises `R_Z(θ)` on a code of amplitude `alpha`: the
/// rotation comes from the overlap of `|±α + iθ/2α⟩` with the code words.
pub fn rz_displacement(theta: f64, alpha: f64) -> C64 {
    C64::new(0.0, theta / (2.0 * alpha))
}

/// Logical `Z`: teleport, undo only the bit-flip part of the frame, and repeat
/// until the phase-flip part shows up.
pub fn gate_z(ctx: GateContext, state: &CoherentSuperposition, mode: usize, rng: &mut dyn RngCore) -> Result<GateOutcome> {
    let mut sampler = Sampler::Random(rng);
    let mut b = Branch::start(state, ctx.model)?;
    for _ in 0..MAX_Z_ATTEMPTS {
        b = single(teleport(b, mode, ctx, Frame::BitOnly, &mut sampler)?)?;
        if !b.success || matches!(last_bell_kind(&b), Some(BellKind::B10 | BellKind::B11)) {
            return Ok(b.into_outcome(ctx.model));
        }
    }
    b.success = false;
    Ok(b.into_outcome(ctx.model))
}

fn last_bell_kind(b: &Branch) -> Option<BellKind> {
    b.record.iter().rev().find_map(|r| match r {
        Record::Bell { outcome, .. } => Some(outcome.kind),
        _ => None,
    })
}

fn last_bell_counts(b: &Branch) -> PortCounts {
    b.record.iter().rev().find_map(|r| match r {
        Record::Bell { outcome, .. } => outcome.counts,
        _ => None,
    })
}

pub(crate) fn single(mut branches: Vec<Branch>) -> Result<Branch> {
    if branches.len() != 1 {
        return Err(Error::invalid(format!("expected one sampled branch, found {}", branches.len())));
    }
    Ok(branches.pop().expect("one branch"))
}

pub(crate) fn rz_stage(b: Branch, mode: usize, theta: f64, ctx: GateContext, sampler: &mut Sampler<'_>) -> Result<Vec<Branch>> {
    let beta = rz_displacement(theta, ctx.alpha);
    let b = b.map(|s| s.translate(mode, beta))?;
    teleport(b, mode, ctx, Frame::Full, sampler)
}

/// `R_Z(θ)` with one displacement and one teleportation.
pub fn gate_rz_bare(
    ctx: GateContext,
    state: &CoherentSuperposition,
    mode: usize,
    theta: f64,
    sampler: &mut Sampler<'_>,
) -> Result<Vec<GateOutcome>> {
    let b = Branch::start(state, ctx.model)?;
    Ok(rz_stage(b, mode, theta, ctx, sampler)?.into_iter().map(|b| b.into_outcome(ctx.model)).collect())
}

/// `R_Z(θ)` as `steps` bare rotations by `θ/steps`.
///
/// Exhaustive enumeration merges branches after each step under ideal
/// projection (every successful branch holds the same state); under photon
/// counting it is limited to a single step.
pub fn gate_rz_zeno(
    ctx: GateContext,
    state: &CoherentSuperposition,
    mode: usize,
    theta: f64,
    steps: usize,
    sampler: &mut Sampler<'_>,
) -> Result<Vec<GateOutcome>> {
    check_steps(ctx, steps, sampler)?;
    let mut branches = vec![Branch::start(state, ctx.model)?];
    for _ in 0..steps {
        branches = stage(branches, |b| rz_stage(b, mode, theta / steps as f64, ctx, sampler))?;
        if sampler.is_exhaustive() {
            branches = merge(branches);
        }
    }
    Ok(branches.into_iter().map(|b| b.into_outcome(ctx.model)).collect())
}

pub(crate) fn check_steps(ctx: GateContext, steps: usize, sampler: &Sampler<'_>) -> Result<()> {
    if steps == 0 {
        return Err(Error::invalid("at least one step is needed"));
    }
    if steps > 1 && sampler.is_exhaustive() && ctx.model == MeasurementModel::PhotonCounting {
        return Err(Error::invalid("exhaustive enumeration of multi-step photon-counting protocols is not supported; sample instead"));
    }
    Ok(())
}

/// Collapses successful branches into one and failed branches into one.
pub(crate) fn merge(branches: Vec<Branch>) -> Vec<Branch> {
    let mut ok: Option<Branch> = None;
    let mut failed: Option<Branch> = None;
    for b in branches {
        let slot = if b.success { &mut ok } else { &mut failed };
        match slot {
            Some(acc) => {
                acc.probability += b.probability;
                if b.probability > acc.probability - b.probability {
                    let p = acc.probability;
                    *acc = b;
                    acc.probability = p;
                }
            }
            None => *slot = Some(b),
        }
    }
    ok.into_iter().chain(failed).collect()
}

/// Settings for gates applied to a resource before the qubit is teleported in.
#[derive(Debug, Clone, PartialEq)]
pub struct TeleportedOptions {
    /// Count pairs of the resource's own teleportation that are kept; `None`
    /// keeps every successful one.
    pub acceptance: Option<BTreeSet<(usize, usize)>>,
    /// Rotation rounds before giving up on fixing the sign.
    pub max_rounds: usize,
    /// Resource preparations per round before giving up.
    pub max_attempts: usize,
}

impl Default for TeleportedOptions {
    fn default() -> Self {
        Self { acceptance: None, max_rounds: 10, max_attempts: 10_000 }
    }
}

impl TeleportedOptions {
    pub(crate) fn accepts(&self, counts: &[PortCounts]) -> bool {
        match &self.acceptance {
            None => true,
            Some(set) => counts.iter().all(|c| c.is_none_or(|c| set.contains(&c))),
        }
    }
}

/// Angle in `(−π, π]`.
pub(crate) fn wrap_angle(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// What a teleported gate needs: a way to build a gated resource and the
/// rotation a given outer outcome actually produces.
pub(crate) trait GatedResource {
    /// Modes the gate acts on.
    fn width(&self) -> usize;
    /// Resource pairs `(arm, output)` laid out consecutively, with the rotation
    /// by `angle` applied to the arms. Also returns the counts of its inner
    /// measurements.
    fn prepare(&self, angle: f64, ctx: GateContext, sampler: &mut Sampler<'_>) -> Result<(Branch, Vec<PortCounts>)>;
    /// Sign of the realised angle given the outer Bell outcomes.
    fn realized_sign(&self, kinds: &[BellKind]) -> f64;
    /// Corrections turning a realised rotation by `π` into the identity.
    fn pi_correction(&self, modes: &[usize]) -> Vec<Correction>;
}

pub(crate) struct ZRotation;

impl GatedResource for ZRotation {
    fn width(&self) -> usize {
        1
    }

    fn prepare(&self, angle: f64, ctx: GateContext, sampler: &mut Sampler<'_>) -> Result<(Branch, Vec<PortCounts>)> {
        let mut r = Branch::start(&ctx.resource()?, ctx.model)?;
        r.resources = 1;
        let r = single(rz_stage(r, 0, angle, ctx, sampler)?)?;
        let counts = vec![last_bell_counts(&r)];
        Ok((r, counts))
    }

    fn realized_sign(&self, kinds: &[BellKind]) -> f64 {
        if matches!(kinds[0], BellKind::B01 | BellKind::B11) {
            -1.0
        } else {
            1.0
        }
    }

    fn pi_correction(&self, modes: &[usize]) -> Vec<Correction> {
        vec![Correction { pauli: Pauli::Z, mode: modes[0] }]
    }
}

/// Runs rounds of gated-resource teleportation until the net rotation equals
/// `theta`, retrying the remainder after a sign flip.
#[allow(clippy::too_many_arguments)]
pub(crate) fn run_teleported<G: GatedResource>(
    gate: &G,
    ctx: GateContext,
    state: &CoherentSuperposition,
    modes: &[usize],
    theta: f64,
    options: &TeleportedOptions,
    frame: Frame,
    rng: &mut dyn RngCore,
) -> Result<GateOutcome> {
    if modes.len() != gate.width() {
        return Err(Error::invalid(format!("gate acts on {} modes, {} given", gate.width(), modes.len())));
    }
    let mut sampler = Sampler::Random(rng);
    let mut main = Branch::start(state, ctx.model)?;
    let mut net = 0.0;
    let mut remaining = theta;
    for _ in 0..options.max_rounds {
        let resource = prepare_accepted(gate, remaining, ctx, options, &mut main, &mut sampler)?;
        let Some(resource) = resource else {
            main.success = false;
            return Ok(main.into_outcome(ctx.model));
        };
        let m = main.state.modes();
        main.state = main.state.tensor(&resource.state);
        main.resources += resource.resources;
        main.probability *= resource.probability;
        main.record.extend(resource.record);
        let mut kinds = Vec::with_capacity(modes.len());
        for &mode in modes {
            main = single(bell_teleport(main, (mode, m, m + 1), ctx, frame, &mut sampler)?)?;
            kinds.push(last_bell_kind(&main).unwrap_or(BellKind::Failure));
            if !main.success {
                return Ok(main.into_outcome(ctx.model));
            }
        }
        let realized = gate.realized_sign(&kinds) * remaining;
        main.record.push(Record::Rotation { angle: realized });
        net += realized;
        let left = wrap_angle(theta - net);
        if left.abs() < 1e-12 {
            return Ok(main.into_outcome(ctx.model));
        }
        if (left.abs() - PI).abs() < 1e-12 {
            for c in gate.pi_correction(modes) {
                main = main.extend_correction(c, ctx.model)?;
            }
            return Ok(main.into_outcome(ctx.model));
        }
        remaining = left;
    }
    main.success = false;
    Ok(main.into_outcome(ctx.model))
}

fn prepare_accepted<G: GatedResource>(
    gate: &G,
    angle: f64,
    ctx: GateContext,
    options: &TeleportedOptions,
    main: &mut Branch,
    sampler: &mut Sampler<'_>,
) -> Result<Option<Branch>> {
    for _ in 0..options.max_attempts {
        let (r, counts) = gate.prepare(angle, ctx, sampler)?;
        if r.success && options.accepts(&counts) {
            return Ok(Some(r));
        }
        main.resources += r.resources;
        main.record.push(Record::Discarded { counts: counts.into_iter().flatten().next() });
    }
    Ok(None)
}

/// `R_Z(θ)` applied to a resource arm first and teleported onto the qubit.
/// An outer bit flip reverses the realised angle; the shortfall is retried
/// (doubling the angle), and a shortfall of `π` is fixed with `Z`.
pub fn gate_rz_teleported(
    ctx: GateContext,
    state: &CoherentSuperposition,
    mode: usize,
    theta: f64,
    options: &TeleportedOptions,
    rng: &mut dyn RngCore,
) -> Result<GateOutcome> {
    run_teleported(&ZRotation, ctx, state, &[mode], theta, options, Frame::Full, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coherent::QubitState;
    use crate::fock::Parity;
    use crate::gates::{rotated_target, PauliAxis, RotationSpec};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn ctx(alpha: f64, model: MeasurementModel) -> GateContext {
        GateContext::new(alpha, model).unwrap()
    }

    fn some_qubit(alpha: f64) -> QubitState {
        QubitState::new(C64::new(0.8, 0.1), C64::new(-0.3, 0.5), alpha).unwrap()
    }

    #[test]
    fn z_turns_plus_cat_into_minus_cat() {
        let alpha = 2.0;
        let c = ctx(alpha, MeasurementModel::PhotonCounting);
        let plus = QubitState::cat(alpha, Parity::Even).unwrap().superposition();
        let minus = QubitState::cat(alpha, Parity::Odd).unwrap().superposition();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let o = gate_z(c, &plus, 0, &mut rng).unwrap();
            assert!(o.success);
            assert!((o.fidelity_with(&minus).unwrap() - 1.0).abs() < 1e-9);
            let back = gate_z(c, &o.state, 0, &mut rng).unwrap();
            assert!((back.fidelity_with(&plus).unwrap() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn z_takes_two_attempts_on_average() {
        let alpha = 2.0;
        let c = ctx(alpha, MeasurementModel::PhotonCounting);
        let plus = QubitState::cat(alpha, Parity::Even).unwrap().superposition();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let runs = 2000;
        let total: usize = (0..runs).map(|_| gate_z(c, &plus, 0, &mut rng).unwrap().resources).sum();
        let mean = total as f64 / runs as f64;
        assert!((mean - 2.0).abs() < 0.15, "{mean}");
    }

    #[test]
    fn z_anticommutes_with_x() {
        let alpha = 1.7;
        let c = ctx(alpha, MeasurementModel::IdealProjection);
        let q = c.model.normalize(&some_qubit(alpha).superposition()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let zx = gate_z(c, &q.phase_rotate(0, PI).unwrap(), 0, &mut rng).unwrap().state;
        let xz = gate_z(c, &q, 0, &mut rng).unwrap().state.phase_rotate(0, PI).unwrap();
        let inner = c.model.inner(&xz, &zx).unwrap();
        assert!((inner + 1.0).norm() < 1e-9, "{inner}");
    }

    #[test]
    fn zero_angle_is_identity() {
        let alpha = 1.5;
        let q = some_qubit(alpha);
        for model in [MeasurementModel::PhotonCounting, MeasurementModel::IdealProjection] {
            for o in gate_rz_bare(ctx(alpha, model), &q.superposition(), 0, 0.0, &mut Sampler::Exhaustive).unwrap() {
                if o.success {
                    assert!((o.fidelity_with(&q.superposition()).unwrap() - 1.0).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn ideal_bare_rotation() {
        let (alpha, theta) = (1.3, 0.9);
        let c = ctx(alpha, MeasurementModel::IdealProjection);
        let q = some_qubit(alpha);
        let target = rotated_target(&q, &RotationSpec::single(PauliAxis::Z, theta)).unwrap();
        let out = gate_rz_bare(c, &q.superposition(), 0, theta, &mut Sampler::Exhaustive).unwrap();
        let p: f64 = out.iter().filter(|o| o.success).map(|o| o.probability).sum();
        assert!((p - (-theta * theta / (4.0 * alpha * alpha)).exp()).abs() < 1e-12);
        for o in out.iter().filter(|o| o.success) {
            assert!((o.fidelity_with(&target).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn ideal_zeno_success() {
        let c = ctx(2.0, MeasurementModel::IdealProjection);
        let q = QubitState::worst_case(2.0).unwrap().superposition();
        for (n, want) in [(8, 0.995), (30, 0.999)] {
            let out = gate_rz_zeno(c, &q, 0, FRAC_PI_4, n, &mut Sampler::Exhaustive).unwrap();
            let p: f64 = out.iter().filter(|o| o.success).map(|o| o.probability).sum();
            assert!((p - want).abs() < 1e-3, "{n}: {p}");
            let exact = (-(FRAC_PI_4 * FRAC_PI_4) / (4.0 * n as f64 * 4.0)).exp();
            assert!((p - exact).abs() < 1e-12);
        }
    }

    #[test]
    fn corrections_replay() {
        let alpha = 1.4;
        let c = ctx(alpha, MeasurementModel::PhotonCounting);
        let q = some_qubit(alpha).superposition();
        for o in gate_rz_bare(c, &q, 0, 0.7, &mut Sampler::Exhaustive).unwrap() {
            let replayed = o.replay().unwrap();
            assert!((c.model.fidelity(&replayed, &o.state).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn teleported_rotation_sign_is_a_coin() {
        let alpha = 2.0;
        let c = ctx(alpha, MeasurementModel::IdealProjection);
        let q = some_qubit(alpha);
        let plus = rotated_target(&q, &RotationSpec::single(PauliAxis::Z, 0.4)).unwrap();
        let minus = rotated_target(&q, &RotationSpec::single(PauliAxis::Z, -0.4)).unwrap();
        let options = TeleportedOptions { max_rounds: 1, ..TeleportedOptions::default() };
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let runs = 2000;
        let mut positive = 0;
        for _ in 0..runs {
            let o = gate_rz_teleported(c, &q.superposition(), 0, 0.4, &options, &mut rng).unwrap();
            let angle = o.realized_angles()[0];
            let target = if angle > 0.0 { &plus } else { &minus };
            positive += usize::from(angle > 0.0);
            assert!((o.fidelity_with(target).unwrap() - 1.0).abs() < 1e-9);
        }
        let frac = positive as f64 / runs as f64;
        assert!((frac - 0.5).abs() < 0.05, "{frac}");
    }

    #[test]
    fn teleported_rotation_reaches_target() {
        let alpha = 2.0;
        let c = ctx(alpha, MeasurementModel::IdealProjection);
        let q = some_qubit(alpha);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for theta in [0.0, 0.3, FRAC_PI_2] {
            let target = rotated_target(&q, &RotationSpec::single(PauliAxis::Z, theta)).unwrap();
            for _ in 0..50 {
                let o = gate_rz_teleported(c, &q.superposition(), 0, theta, &TeleportedOptions::default(), &mut rng).unwrap();
                if o.success {
                    assert!((o.fidelity_with(&target).unwrap() - 1.0).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn wrap_angle_range() {
        assert!((wrap_angle(3.0 * PI) - PI).abs() < 1e-12);
        assert!((wrap_angle(-PI / 2.0) + PI / 2.0).abs() < 1e-12);
    }
}
