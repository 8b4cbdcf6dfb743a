//! Branch bookkeeping shared by every gate: each branch carries its state
//! (normalised in the model's inner product), its probability and its record.

use crate::coherent::CoherentSuperposition;
use crate::fock::Parity;
use crate::numeric::PROBABILITY_FLOOR;
use crate::{Error, Result, C64};

use super::measure::{bell_measure, bell_resource, cat_measure, count_grid, ideal_bell_resource};
use super::{BellKind, BellOutcome, Correction, GateOutcome, MeasurementModel, Pauli, PortCounts, Record, Sampler};

/// Code amplitude and measurement model shared by the stages of a protocol.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateContext {
    pub alpha: f64,
    pub model: MeasurementModel,
}

impl GateContext {
    pub fn new(alpha: f64, model: MeasurementModel) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::invalid(format!("code amplitude must be positive, got {alpha}")));
        }
        Ok(Self { alpha, model })
    }

    pub(crate) fn resource(&self) -> Result<CoherentSuperposition> {
        match self.model {
            MeasurementModel::IdealProjection => ideal_bell_resource(self.alpha),
            MeasurementModel::PhotonCounting => bell_resource(self.alpha)?.normalized(),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Branch {
    pub state: CoherentSuperposition,
    pub raw_state: CoherentSuperposition,
    pub probability: f64,
    pub record: Vec<Record>,
    pub corrections: Vec<Correction>,
    pub success: bool,
    pub resources: usize,
}

impl Branch {
    pub fn start(state: &CoherentSuperposition, model: MeasurementModel) -> Result<Self> {
        let state = model.normalize(state)?;
        Ok(Self {
            raw_state: state.clone(),
            state,
            probability: 1.0,
            record: Vec::new(),
            corrections: Vec::new(),
            success: true,
            resources: 0,
        })
    }

    pub fn map(mut self, f: impl FnOnce(&CoherentSuperposition) -> Result<CoherentSuperposition>) -> Result<Self> {
        if self.success {
            self.state = f(&self.state)?;
        }
        Ok(self)
    }

    fn child(&self, state: CoherentSuperposition, probability: f64) -> Self {
        Self {
            raw_state: state.clone(),
            state,
            probability: self.probability * probability,
            record: self.record.clone(),
            corrections: Vec::new(),
            success: self.success,
            resources: self.resources,
        }
    }

    /// Starts a new correction batch. Logical Paulis do not preserve the
    /// overlap-weighted norm, so the result is renormalised.
    pub fn correct(mut self, corrections: Vec<Correction>, model: MeasurementModel) -> Result<Self> {
        self.raw_state = self.state.clone();
        for c in &corrections {
            self.state = c.apply(&self.state)?;
        }
        self.state = model.normalize(&self.state)?;
        self.corrections = corrections;
        Ok(self)
    }

    /// Adds to the current correction batch.
    pub fn extend_correction(mut self, c: Correction, model: MeasurementModel) -> Result<Self> {
        self.state = model.normalize(&c.apply(&self.state)?)?;
        self.corrections.push(c);
        Ok(self)
    }

    pub fn into_outcome(self, model: MeasurementModel) -> GateOutcome {
        GateOutcome {
            state: self.state,
            raw_state: self.raw_state,
            record: self.record,
            corrections: self.corrections,
            success: self.success,
            probability: self.probability,
            model,
            resources: self.resources,
        }
    }
}

/// Applies a branching stage to every live branch; failed branches pass through.
pub(crate) fn stage(branches: Vec<Branch>, mut f: impl FnMut(Branch) -> Result<Vec<Branch>>) -> Result<Vec<Branch>> {
    let mut out = Vec::with_capacity(branches.len());
    for b in branches {
        if b.success {
            out.extend(f(b)?);
        } else {
            out.push(b);
        }
    }
    Ok(out)
}

/// Which part of the teleported Pauli frame is undone.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Frame {
    Full,
    BitOnly,
    /// Frame conjugated through `R_X(±π/2)`.
    ThroughRx,
}

impl Frame {
    fn paulis(&self, kind: BellKind) -> Vec<Pauli> {
        match self {
            Frame::Full => kind.frame().to_vec(),
            Frame::BitOnly => kind.frame().iter().copied().filter(|p| *p == Pauli::X).collect(),
            Frame::ThroughRx => match kind {
                BellKind::B00 | BellKind::Failure => vec![],
                BellKind::B10 => vec![Pauli::X, Pauli::Z],
                BellKind::B01 => vec![Pauli::X],
                BellKind::B11 => vec![Pauli::Z],
            },
        }
    }
}

/// Index of `out` once `mode` and `arm` are removed, and the slot `mode`
/// leaves behind.
fn relocation(mode: usize, arm: usize, out: usize) -> (usize, usize) {
    let from = out - usize::from(mode < out) - usize::from(arm < out);
    let to = mode - usize::from(arm < mode);
    (from, to)
}

/// Bell-measures `(mode, arm)` of a state that already holds the resource
/// `(arm, out)`; `out` takes the place of `mode` and `arm` disappears.
pub(crate) fn bell_teleport(
    b: Branch,
    (mode, arm, out): (usize, usize, usize),
    ctx: GateContext,
    frame: Frame,
    sampler: &mut Sampler<'_>,
) -> Result<Vec<Branch>> {
    if !b.success {
        return Ok(vec![b]);
    }
    let (from, to) = relocation(mode, arm, out);
    let children = match ctx.model {
        MeasurementModel::PhotonCounting => {
            let nmax = count_grid(b.state.max_amplitude());
            bell_measure(&b.state, (mode, arm), nmax, sampler)?.into_iter().map(|c| (c.outcome, c.state, c.probability)).collect::<Vec<_>>()
        }
        MeasurementModel::IdealProjection => {
            let snapped = b.state.snap_to_code(mode, ctx.alpha)?.snap_to_code(arm, ctx.alpha)?;
            let kids = ideal_bell_project(&snapped, mode, arm)?;
            let items: Vec<(f64, (BellKind, CoherentSuperposition))> =
                kids.into_iter().map(|(k, s)| (s.code_norm_sqr(), (k, s))).filter(|(p, _)| *p >= PROBABILITY_FLOOR).collect();
            let kept: f64 = items.iter().map(|(p, _)| p).sum();
            let exhaustive = sampler.is_exhaustive();
            let picked = sampler.pick(items, 1.0);
            let landed = !picked.is_empty();
            let mut children = Vec::with_capacity(picked.len());
            for (p, (k, s)) in picked {
                children.push((BellOutcome::ideal(k), ctx.model.normalize(&s)?, p));
            }
            let failed = ((exhaustive && 1.0 - kept > 1e-14) || !landed).then(|| {
                let mut f = b.clone();
                f.probability *= 1.0 - kept;
                f.record.push(Record::Bell { outcome: BellOutcome::ideal(BellKind::Failure), corrections: vec![] });
                f.success = false;
                f
            });
            return finish_teleport(&b, children, (from, to), frame, ctx.model, failed);
        }
    };
    finish_teleport(&b, children, (from, to), frame, ctx.model, None)
}

fn finish_teleport(
    parent: &Branch,
    children: Vec<(BellOutcome, CoherentSuperposition, f64)>,
    (from, to): (usize, usize),
    frame: Frame,
    model: MeasurementModel,
    failed: Option<Branch>,
) -> Result<Vec<Branch>> {
    let mut out = Vec::with_capacity(children.len() + 1);
    for (outcome, state, p) in children {
        let mut c = parent.child(state.move_mode(from, to)?, p);
        let corrections: Vec<Correction> = frame.paulis(outcome.kind).into_iter().map(|pauli| Correction { pauli, mode: to }).collect();
        c.record.push(Record::Bell { outcome, corrections: corrections.clone() });
        if outcome.kind == BellKind::Failure {
            c.success = false;
        }
        out.push(c.correct(corrections, model)?);
    }
    out.extend(failed);
    Ok(out)
}

/// Logical Bell projections of `(a, b)` on a state whose labels there are code
/// words; unnormalised, with `a` and `b` removed.
fn ideal_bell_project(state: &CoherentSuperposition, a: usize, b: usize) -> Result<Vec<(BellKind, CoherentSuperposition)>> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    [BellKind::B00, BellKind::B10, BellKind::B01, BellKind::B11]
        .into_iter()
        .map(|kind| {
            let terms = state.terms().iter().filter_map(|t| {
                let xa = t.labels[a].re > 0.0;
                let xb = t.labels[b].re > 0.0;
                let sign = if xa { -1.0 } else { 1.0 };
                let f = match kind {
                    BellKind::B00 if xa == xb => h,
                    BellKind::B10 if xa == xb => sign * h,
                    BellKind::B01 if xa != xb => h,
                    BellKind::B11 if xa != xb => sign * h,
                    _ => return None,
                };
                let labels = t.labels.iter().enumerate().filter(|(k, _)| *k != a && *k != b).map(|(_, l)| *l).collect();
                Some((t.coeff * f, labels))
            });
            Ok((kind, CoherentSuperposition::new(state.modes() - 2, terms)?))
        })
        .collect()
}

/// Fresh resource pair appended as the last two modes, then teleportation of
/// `mode` through it.
pub(crate) fn teleport(b: Branch, mode: usize, ctx: GateContext, frame: Frame, sampler: &mut Sampler<'_>) -> Result<Vec<Branch>> {
    if !b.success {
        return Ok(vec![b]);
    }
    let m = b.state.modes();
    let b = append(b, &ctx.resource()?);
    bell_teleport(b, (mode, m, m + 1), ctx, frame, sampler)
}

/// Tensors a normalised resource onto the branch and counts it as consumed.
pub(crate) fn append(mut b: Branch, resource: &CoherentSuperposition) -> Branch {
    b.state = b.state.tensor(resource);
    b.resources += 1;
    b
}

/// A branch with the parities of the two measured modes and their counts.
pub(crate) type PairOutcome = (Branch, (Parity, Parity), PortCounts);

/// Parity-basis measurement of `mode` then `arm`, removing both.
pub(crate) fn cat_pair(
    b: Branch,
    (mode, arm): (usize, usize),
    ctx: GateContext,
    sampler: &mut Sampler<'_>,
) -> Result<Vec<PairOutcome>> {
    let arm_rest = if arm > mode { arm - 1 } else { arm };
    match ctx.model {
        MeasurementModel::PhotonCounting => {
            let nmax = count_grid(b.state.max_amplitude());
            let mut out = Vec::new();
            for first in cat_measure(&b.state, mode, nmax, sampler)? {
                for second in cat_measure(&first.state, arm_rest, nmax, sampler)? {
                    let c = b.child(second.state, first.probability * second.probability);
                    out.push((c, (first.parity, second.parity), Some((first.count, second.count))));
                }
            }
            Ok(out)
        }
        MeasurementModel::IdealProjection => {
            let snapped = b.state.snap_to_code(mode, ctx.alpha)?.snap_to_code(arm, ctx.alpha)?;
            let h = 0.5;
            let mut items = Vec::new();
            for ps in [Parity::Even, Parity::Odd] {
                for pt in [Parity::Even, Parity::Odd] {
                    let terms = snapped.terms().iter().map(|t| {
                        let sa = if t.labels[mode].re > 0.0 { ps.sign() } else { 1.0 };
                        let sb = if t.labels[arm].re > 0.0 { pt.sign() } else { 1.0 };
                        let labels = t.labels.iter().enumerate().filter(|(k, _)| *k != mode && *k != arm).map(|(_, l)| *l).collect();
                        (t.coeff * C64::new(h * sa * sb, 0.0), labels)
                    });
                    let s = CoherentSuperposition::new(snapped.modes() - 2, terms)?;
                    let p = s.code_norm_sqr();
                    if p >= PROBABILITY_FLOOR {
                        items.push((p, (s, (ps, pt))));
                    }
                }
            }
            let kept: f64 = items.iter().map(|(p, _)| p).sum();
            let exhaustive = sampler.is_exhaustive();
            let picked = sampler.pick(items, 1.0);
            let mut out = Vec::new();
            let landed = !picked.is_empty();
            for (p, (s, parities)) in picked {
                out.push((b.child(ctx.model.normalize(&s)?, p), parities, None));
            }
            if (exhaustive && 1.0 - kept > 1e-14) || !landed {
                let mut failed = b.clone();
                failed.probability *= 1.0 - kept;
                failed.success = false;
                out.push((failed, (Parity::Even, Parity::Even), None));
            }
            Ok(out)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coherent::QubitState;
    use crate::fock::PureState;

    #[test]
    fn relocation_keeps_order() {
        assert_eq!(relocation(0, 2, 3), (1, 0));
        assert_eq!(relocation(1, 2, 3), (1, 1));
        assert_eq!(relocation(2, 0, 1), (0, 1));
    }

    #[test]
    fn ideal_teleport_is_exact() {
        let ctx = GateContext::new(1.2, MeasurementModel::IdealProjection).unwrap();
        let q = QubitState::new(C64::new(0.6, 0.1), C64::new(0.2, -0.7), 1.2).unwrap();
        let target = ctx.model.normalize(&q.superposition()).unwrap();
        let b = Branch::start(&q.superposition(), ctx.model).unwrap();
        let out = teleport(b, 0, ctx, Frame::Full, &mut Sampler::Exhaustive).unwrap();
        assert_eq!(out.len(), 4);
        let total: f64 = out.iter().map(|b| b.probability).sum();
        assert!((total - 1.0).abs() < 1e-12);
        for b in out {
            assert!(b.success);
            assert!((ctx.model.fidelity(&b.state, &target).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn counting_teleport_covers_all_mass() {
        let ctx = GateContext::new(1.5, MeasurementModel::PhotonCounting).unwrap();
        let q = QubitState::worst_case(1.5).unwrap();
        let b = Branch::start(&q.superposition(), ctx.model).unwrap();
        let out = teleport(b, 0, ctx, Frame::Full, &mut Sampler::Exhaustive).unwrap();
        let total: f64 = out.iter().map(|b| b.probability).sum();
        assert!((total - 1.0).abs() < 1e-9, "{total}");
        let f: f64 = out.iter().map(|b| b.probability * b.state.fidelity(&q.superposition()).unwrap()).sum();
        assert!(f > 0.99, "{f}");
        assert!(out.iter().all(|b| (b.state.norm_sqr() - 1.0).abs() < 1e-9));
    }
}
