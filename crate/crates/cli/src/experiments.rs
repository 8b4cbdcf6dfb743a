//! One function per experiment, each turning a resolved configuration into a
//! result table.
//!
//! Grid points run in parallel and are gathered in grid order. Randomised
//! tasks draw from `ChaCha8Rng::seed_from_u64(seed)` moved to stream
//! `task_index`, so output bytes do not depend on scheduling or thread count.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use catsim_core::catgen::{
    dakna_bell_resource, dakna_fidelity, dakna_gate_demo, dakna_mean_photon, dakna_probability, dakna_state, CatGenSpec,
};
use catsim_core::coherent::{self, CoherentSuperposition, QubitState};
use catsim_core::fock;
use catsim_core::gates::{
    bellcat_cost, fidelity_map, gate_rz_zeno, rotated_target, GateContext, GateOutcome, MeasurementModel, PauliAxis, RotationSpec, Sampler,
};
use catsim_core::loss::{
    amplify, correct_sign_flip, decode_with_syndrome, reamp_stats, reamplify, success_fidelity, LossHistory, ProtectedQubit,
};
use catsim_core::{Error, C64};

use crate::config::{Experiment, ExperimentConfig};
use crate::error::{CliError, Result};
use crate::output::{Row, Table};

/// Parameters compare equal to a reference point within this distance.
const MATCH: f64 = 1e-9;

fn near(a: f64, b: f64) -> bool {
    (a - b).abs() < MATCH
}

pub fn task_rng(seed: u64, task: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(task);
    rng
}

/// Evaluates `f` on every item in parallel, concatenating results in order.
fn grid<T: Sync>(items: &[T], f: impl Fn(usize, &T) -> Result<Vec<Row>> + Sync) -> Result<Vec<Row>> {
    let parts: Vec<Result<Vec<Row>>> = items.par_iter().enumerate().map(|(i, t)| f(i, t)).collect();
    let mut rows = Vec::new();
    for p in parts {
        rows.extend(p?);
    }
    Ok(rows)
}

fn product<A: Copy, B: Copy>(a: &[A], b: &[B]) -> Vec<(A, B)> {
    a.iter().flat_map(|&x| b.iter().map(move |&y| (x, y))).collect()
}

fn model(name: &str) -> MeasurementModel {
    match name {
        "counting" => MeasurementModel::PhotonCounting,
        _ => MeasurementModel::IdealProjection,
    }
}

pub fn run(config: &ExperimentConfig) -> Result<Table> {
    match config.experiment {
        Experiment::Overlap => overlap(config),
        Experiment::Zeno => zeno(config),
        Experiment::FidelityMap => map(config),
        Experiment::OverallFidelity => overall(config),
        Experiment::Postselect => postselect(config),
        Experiment::BellcatCost => cost(config),
        Experiment::DaknaFidelity => dakna_fidelity_sweep(config),
        Experiment::DaknaProbability => dakna_probability_sweep(config),
        Experiment::DaknaBell => dakna_bell(config),
        Experiment::DaknaGate => dakna_gate(config),
        Experiment::LossReamp => loss_reamp(config),
        Experiment::ThreeQubit => three_qubit(config),
        Experiment::Amplify => amplify_rounds(config),
    }
}

/// `|⟨α|−α⟩|²` from the coherent-label formula and from truncated Fock vectors.
pub fn overlap_pair(alpha: f64) -> Result<(f64, f64)> {
    let a = C64::new(alpha, 0.0);
    let labels = coherent::overlap(-a, a).norm_sqr();
    let cutoff = fock::default_cutoff(alpha);
    let (minus, plus) = (fock::coherent(-a, cutoff)?, fock::coherent(a, cutoff)?);
    let inner: C64 = minus.amplitudes().iter().zip(plus.amplitudes()).map(|(x, y)| x.conj() * y).sum();
    Ok((labels, inner.norm_sqr()))
}

fn overlap(c: &ExperimentConfig) -> Result<Table> {
    let rows = grid(&c.reals("alpha"), |_, &alpha| {
        let (labels, fock) = overlap_pair(alpha)?;
        let row = Row::new(vec![alpha.into(), labels.into(), fock.into(), (-4.0 * alpha * alpha).exp().into()]);
        Ok(vec![if near(alpha, 2.0) { row.tagged("overlap_alpha2") } else { row }])
    })?;
    Ok(Table { columns: vec!["alpha", "overlap", "overlap_fock", "closed_form"], rows })
}

/// Success probability and mean success fidelity of an ideal-projection
/// Zeno rotation on the plus cat.
pub fn zeno_ideal(alpha: f64, theta: f64, steps: usize) -> Result<(f64, f64)> {
    let ctx = GateContext::new(alpha, MeasurementModel::IdealProjection)?;
    let q = QubitState::worst_case(alpha)?;
    let target = rotated_target(&q, &RotationSpec::single(PauliAxis::Z, theta))?;
    let out = gate_rz_zeno(ctx, &q.superposition(), 0, theta, steps, &mut Sampler::Exhaustive)?;
    Ok(success_fidelity(&out, &target)?)
}

/// One sampled photon-counting Zeno run: success flag and fidelity.
fn zeno_counting_run(alpha: f64, theta: f64, steps: usize, rng: &mut ChaCha8Rng) -> Result<(bool, f64)> {
    let ctx = GateContext::new(alpha, MeasurementModel::PhotonCounting)?;
    let q = QubitState::worst_case(alpha)?;
    let target = rotated_target(&q, &RotationSpec::single(PauliAxis::Z, theta))?;
    let out = gate_rz_zeno(ctx, &q.superposition(), 0, theta, steps, &mut Sampler::Random(rng))?;
    let o = out.into_iter().next().ok_or(Error::ZeroProbability { probability: 0.0 })?;
    Ok((o.success, o.fidelity_with(&target)?))
}

fn zeno(c: &ExperimentConfig) -> Result<Table> {
    let (alpha, theta) = (c.real("alpha"), c.real("theta"));
    let steps = c.counts("n");
    let columns = vec!["alpha", "theta", "n", "model", "runs", "success_probability", "fidelity", "closed_form"];
    let closed = |n: usize| (-theta * theta / (4.0 * n as f64 * alpha * alpha)).exp();
    let rows = match model(c.choice("model")) {
        MeasurementModel::IdealProjection => grid(&steps, |_, &n| {
            let (p, f) = zeno_ideal(alpha, theta, n)?;
            let mut row =
                Row::new(vec![alpha.into(), theta.into(), n.into(), "ideal".into(), 0.into(), p.into(), f.into(), closed(n).into()]);
            if near(alpha, 2.0) && near(theta, PI / 4.0) {
                match n {
                    8 => row = row.tagged("zeno_ideal_n8"),
                    30 => row = row.tagged("zeno_ideal_n30"),
                    _ => {}
                }
            }
            Ok(vec![row])
        })?,
        MeasurementModel::PhotonCounting => {
            let runs = c.count("runs");
            if runs == 0 {
                return Err(CliError::config("`runs` must be positive for the counting model"));
            }
            let tasks: Vec<(usize, usize)> = product(&(0..steps.len()).collect::<Vec<_>>(), &(0..runs).collect::<Vec<_>>());
            let samples: Vec<Result<(bool, f64)>> = tasks
                .par_iter()
                .map(|&(i, r)| zeno_counting_run(alpha, theta, steps[i], &mut task_rng(c.seed, ((i as u64) << 32) | r as u64)))
                .collect();
            let samples = samples.into_iter().collect::<Result<Vec<_>>>()?;
            steps
                .iter()
                .zip(samples.chunks(runs))
                .map(|(&n, chunk)| {
                    let ok = chunk.iter().filter(|s| s.0).count() as f64 / runs as f64;
                    let f = chunk.iter().map(|s| s.1).sum::<f64>() / runs as f64;
                    let row = Row::new(vec![
                        alpha.into(),
                        theta.into(),
                        n.into(),
                        "counting".into(),
                        runs.into(),
                        ok.into(),
                        f.into(),
                        closed(n).into(),
                    ]);
                    if n == 8 && near(alpha, 2.0) && near(theta, FRAC_PI_2) {
                        row.tagged("counting_zeno_8")
                    } else {
                        row
                    }
                })
                .collect()
        }
    };
    Ok(Table { columns, rows })
}

fn map(c: &ExperimentConfig) -> Result<Table> {
    let m = fidelity_map(c.real("alpha"), c.real("theta"))?;
    let rows =
        m.entries.iter().map(|e| Row::new(vec![e.counts.0.into(), e.counts.1.into(), e.probability.into(), e.fidelity.into()])).collect();
    Ok(Table { columns: vec!["n_a", "n_b", "probability", "fidelity"], rows })
}

fn overall(c: &ExperimentConfig) -> Result<Table> {
    let points = product(&c.reals("alpha"), &c.reals("theta"));
    let rows = grid(&points, |_, &(alpha, theta)| {
        let m = fidelity_map(alpha, theta)?;
        let mut row =
            Row::new(vec![alpha.into(), theta.into(), m.overall_fidelity().into(), m.max_fidelity().into(), m.total_probability().into()]);
        if near(alpha, 2.0) && near(theta, FRAC_PI_2) {
            row = row.tagged("counting_single_step").tagged("best_outcome");
        }
        if near(alpha, 2.0) && near(theta, PI / 16.0) {
            row = row.tagged("counting_small_step");
        }
        if near(alpha, 5.5) && near(theta, FRAC_PI_2) {
            row = row.tagged("large_alpha");
        }
        Ok(vec![row])
    })?;
    Ok(Table { columns: vec!["alpha", "theta", "overall_fidelity", "max_fidelity", "total_probability"], rows })
}

fn selections(c: &ExperimentConfig) -> Result<Vec<(f64, f64, f64, catsim_core::gates::PostSelection)>> {
    let (theta, f_min) = (c.real("theta"), c.real("f_min"));
    let alphas = c.reals("alpha");
    let out: Vec<Result<_>> = alphas.par_iter().map(|&a| Ok((a, theta, f_min, fidelity_map(a, theta)?.postselect(f_min)?))).collect();
    out.into_iter().collect()
}

fn cost_tag(row: Row, alpha: f64, theta: f64, f_min: f64) -> Row {
    if !(near(theta, FRAC_PI_2) && near(f_min, 0.99)) {
        return row;
    }
    if near(alpha, 1.0) {
        row.tagged("bellcat_cost_alpha1")
    } else if near(alpha, 4.0) {
        row.tagged("bellcat_cost_alpha4")
    } else {
        row
    }
}

fn postselect(c: &ExperimentConfig) -> Result<Table> {
    let rows = selections(c)?
        .into_iter()
        .map(|(alpha, theta, f_min, s)| {
            let row = Row::new(vec![
                alpha.into(),
                theta.into(),
                f_min.into(),
                s.probability.into(),
                s.fidelity.into(),
                s.accepted.len().into(),
                bellcat_cost(s.probability).into(),
            ]);
            cost_tag(row, alpha, theta, f_min)
        })
        .collect();
    Ok(Table { columns: vec!["alpha", "theta", "f_min", "probability", "fidelity", "accepted_outcomes", "bellcat_cost"], rows })
}

fn cost(c: &ExperimentConfig) -> Result<Table> {
    let rows = selections(c)?
        .into_iter()
        .map(|(alpha, theta, f_min, s)| {
            cost_tag(Row::new(vec![alpha.into(), s.probability.into(), bellcat_cost(s.probability).into()]), alpha, theta, f_min)
        })
        .collect();
    Ok(Table { columns: vec!["alpha", "probability", "bellcat_cost"], rows })
}

fn dakna_fidelity_sweep(c: &ExperimentConfig) -> Result<Table> {
    let (lambda, cutoff) = (c.real("lambda"), c.count("cutoff"));
    let points = product(&c.counts("m"), &c.reals("x"));
    let rows = grid(&points, |_, &(m, x)| {
        let spec = CatGenSpec::from_effective(lambda, x, m)?;
        let best = dakna_fidelity(&spec, cutoff)?;
        let p = dakna_probability(lambda, spec.theta_bs(), m)?;
        let mean = dakna_mean_photon(&spec, cutoff)?;
        Ok(vec![Row::new(vec![
            lambda.into(),
            m.into(),
            x.into(),
            spec.theta_bs().into(),
            best.alpha.into(),
            best.fidelity.into(),
            mean.into(),
            p.into(),
        ])])
    })?;
    Ok(Table { columns: vec!["lambda", "m", "x", "theta_bs", "alpha", "fidelity", "mean_photon", "probability"], rows })
}

fn dakna_probability_sweep(c: &ExperimentConfig) -> Result<Table> {
    let (lambda, cutoff) = (c.real("lambda"), c.count("cutoff"));
    let points = product(&c.counts("m"), &c.reals("theta"));
    let rows = grid(&points, |_, &(m, theta)| {
        let spec = CatGenSpec::new(lambda, theta, m)?;
        let p = dakna_probability(lambda, theta, m)?;
        let best = fock_best(&spec, cutoff)?;
        Ok(vec![Row::new(vec![lambda.into(), m.into(), theta.into(), spec.effective().into(), p.into(), best.into()])])
    })?;
    Ok(Table { columns: vec!["lambda", "m", "theta_bs", "x", "probability", "fidelity"], rows })
}

fn fock_best(spec: &CatGenSpec, cutoff: usize) -> Result<f64> {
    Ok(catsim_core::catgen::best_cat(&dakna_state(spec, cutoff)?)?.fidelity)
}

fn dakna_bell(c: &ExperimentConfig) -> Result<Table> {
    let (lambda, cutoff) = (c.real("lambda"), c.count("cutoff"));
    let points = product(&c.counts("m"), &c.reals("x"));
    let rows = grid(&points, |_, &(m, x)| {
        let spec = CatGenSpec::from_effective(lambda, x, m)?;
        let r = dakna_bell_resource(&spec, cutoff)?;
        let p = dakna_probability(lambda, spec.theta_bs(), m)?;
        Ok(vec![Row::new(vec![lambda.into(), m.into(), x.into(), r.alpha.into(), r.fidelity.into(), p.into()])])
    })?;
    Ok(Table { columns: vec!["lambda", "m", "x", "alpha", "fidelity", "probability"], rows })
}

fn dakna_gate(c: &ExperimentConfig) -> Result<Table> {
    let (phi, lambda, cutoff) = (c.real("phi"), c.real("lambda"), c.count("cutoff"));
    let points = product(&c.counts("m"), &c.reals("x"));
    let rows = grid(&points, |_, &(m, x)| {
        let spec = CatGenSpec::from_effective(lambda, x, m)?;
        let d = dakna_gate_demo(phi, &spec, cutoff)?;
        Ok(vec![Row::new(vec![
            phi.into(),
            lambda.into(),
            m.into(),
            x.into(),
            d.alpha.into(),
            d.input_effective.into(),
            d.input_fidelity.into(),
            d.resource_fidelity.into(),
            d.fidelity.into(),
        ])])
    })?;
    Ok(Table { columns: vec!["phi", "lambda", "m", "x", "alpha", "input_x", "input_fidelity", "resource_fidelity", "fidelity"], rows })
}

/// Logical amplitudes `(μ, ν)` of the named re-amplification input.
pub fn reamp_input(name: &str) -> (C64, C64) {
    match name {
        "plus" => (C64::new(1.0, 0.0), C64::new(1.0, 0.0)),
        "zero" => (C64::new(1.0, 0.0), C64::new(0.0, 0.0)),
        _ => (C64::new(1.0, 0.0), C64::new(0.0, 1.0)),
    }
}

/// Re-amplification of a qubit whose amplitude decayed to `(1 − eps)·alpha`:
/// success, vacuum and both-click probabilities, and success fidelity.
pub fn reamp_point(alpha: f64, eps: f64, input: &str) -> Result<(catsim_core::loss::ReampStats, f64)> {
    let (mu, nu) = reamp_input(input);
    let decayed = QubitState::new(mu, nu, (1.0 - eps) * alpha)?;
    let out = reamplify(&decayed.superposition(), alpha, &mut Sampler::Exhaustive)?;
    let (_, f) = success_fidelity(&out, &QubitState::new(mu, nu, alpha)?.superposition())?;
    Ok((reamp_stats(&out), f))
}

fn loss_reamp(c: &ExperimentConfig) -> Result<Table> {
    let alpha = c.real("alpha");
    let input = c.choice("input").to_string();
    let rows = grid(&c.reals("eps"), |_, &eps| {
        if !(0.0..1.0).contains(&eps) {
            return Err(CliError::config(format!("eps = {eps} must lie in [0, 1)")));
        }
        let (s, f) = reamp_point(alpha, eps, &input)?;
        let closed = (-eps * eps * alpha * alpha / 2.0).exp();
        let mut row = Row::new(vec![
            alpha.into(),
            eps.into(),
            input.as_str().into(),
            s.success.into(),
            s.vacuum.into(),
            s.both.into(),
            f.into(),
            closed.into(),
        ]);
        if near(alpha, 2.0) && input == "y" {
            if near(eps, 0.1) {
                row = row.tagged("reamp_success");
            }
            if eps == 0.0 {
                row = row.tagged("reamp_failure");
            }
        }
        Ok(vec![row])
    })?;
    Ok(Table { columns: vec!["alpha", "eps", "input", "success", "vacuum", "both", "fidelity", "closed_form"], rows })
}

/// A placement of loss events on the three modes of a protected block.
#[derive(Debug, Clone, PartialEq)]
pub struct Placement {
    pub label: String,
    /// `(mode, events)` pairs applied in order.
    pub hits: Vec<(usize, usize)>,
}

/// Every placement of up to three events: none, one, two on distinct modes,
/// two on one mode, and one on each mode.
pub fn placements() -> Vec<Placement> {
    let mut v = vec![Placement { label: "none".into(), hits: vec![] }];
    v.extend((0..3).map(|m| Placement { label: format!("{m}"), hits: vec![(m, 1)] }));
    for a in 0..3 {
        for b in 0..3 {
            if a != b {
                v.push(Placement { label: format!("{a}+{b}"), hits: vec![(a, 1), (b, 1)] });
            }
        }
    }
    v.extend((0..3).map(|m| Placement { label: format!("{m}x2"), hits: vec![(m, 2)] }));
    v.push(Placement { label: "0+1+2".into(), hits: vec![(0, 1), (1, 1), (2, 1)] });
    v
}

/// The logical qubit the three-mode code protects in the experiments.
pub fn protected_input(alpha: f64) -> Result<QubitState> {
    Ok(QubitState::new(C64::new(0.6, 0.2), C64::new(0.3, -0.7), 3f64.sqrt() * alpha)?)
}

/// Result of correcting one placement.
#[derive(Debug, Clone, PartialEq)]
pub struct CodeRun {
    pub flipped: usize,
    pub flagged: bool,
    /// Fidelity after correction, or after the blind circuit when flagged.
    pub fidelity: f64,
}

pub fn run_placement(alpha: f64, gamma: f64, t: f64, placement: &Placement) -> Result<CodeRun> {
    let q = protected_input(alpha)?;
    let mut block = ProtectedQubit::encode(&q)?;
    for &(mode, events) in &placement.hits {
        let times = (1..=events).map(|k| t * k as f64 / (events + 1) as f64).collect();
        block = block.lose(mode, &LossHistory::new(gamma, t, times)?)?;
    }
    let (outcomes, flagged) = match correct_sign_flip(&block, &mut Sampler::Exhaustive) {
        Ok(o) => (o, false),
        Err(Error::Uncorrectable { .. }) => (decode_with_syndrome(&block, &mut Sampler::Exhaustive)?, true),
        Err(e) => return Err(e.into()),
    };
    let fidelity = weighted_fidelity(&outcomes, &q.superposition())?;
    Ok(CodeRun { flipped: block.flipped_modes(), flagged, fidelity })
}

fn weighted_fidelity(outcomes: &[GateOutcome], target: &CoherentSuperposition) -> Result<f64> {
    let p: f64 = outcomes.iter().map(|o| o.probability).sum();
    let pf = outcomes.iter().map(|o| Ok(o.probability * o.fidelity_with(target)?)).sum::<Result<f64>>()?;
    Ok(pf / p)
}

fn three_qubit(c: &ExperimentConfig) -> Result<Table> {
    let (alpha, gamma, t) = (c.real("alpha"), c.real("gamma"), c.real("t"));
    let rows = grid(&placements(), |_, p| {
        let r = run_placement(alpha, gamma, t, p)?;
        let events: usize = p.hits.iter().map(|h| h.1).sum();
        let row = Row::new(vec![p.label.as_str().into(), events.into(), r.flipped.into(), r.flagged.into(), r.fidelity.into()]);
        Ok(vec![if events == 1 { row.tagged("three_qubit_single_loss") } else { row }])
    })?;
    Ok(Table { columns: vec!["placement", "events", "flipped_modes", "flagged", "fidelity"], rows })
}

fn amplify_rounds(c: &ExperimentConfig) -> Result<Table> {
    let model = model(c.choice("model"));
    let mut alpha = c.real("alpha");
    let mut state = QubitState::worst_case(alpha)?.superposition();
    let mut rows = Vec::new();
    for round in 1..=c.count("rounds") {
        let out = amplify(GateContext::new(alpha, model)?, &state, &mut Sampler::Exhaustive)?;
        let bigger = 2f64.sqrt() * alpha;
        let (p, f) = success_fidelity(&out, &QubitState::worst_case(bigger)?.superposition())?;
        rows.push(Row::new(vec![round.into(), alpha.into(), bigger.into(), p.into(), f.into()]));
        let best = out
            .into_iter()
            .filter(|o| o.success)
            .max_by(|a, b| a.probability.total_cmp(&b.probability))
            .ok_or(Error::ZeroProbability { probability: 0.0 })?;
        state = best.state;
        alpha = bigger;
    }
    Ok(Table { columns: vec!["round", "alpha_in", "alpha_out", "success_probability", "fidelity"], rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_differ_and_repeat() {
        use rand::RngCore;
        let a = task_rng(7, 0).next_u64();
        assert_eq!(a, task_rng(7, 0).next_u64());
        assert_ne!(a, task_rng(7, 1).next_u64());
        assert_ne!(a, task_rng(8, 0).next_u64());
    }

    #[test]
    fn overlap_rows() {
        let c = ExperimentConfig::new(Experiment::Overlap, &[("alpha", "1,2")]).unwrap();
        let t = run(&c).unwrap();
        assert_eq!(t.rows.len(), 2);
        let (got, want) = (t.reals("overlap"), t.reals("closed_form"));
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() < 1e-15);
        }
        assert_eq!(t.rows[1].targets, vec!["overlap_alpha2"]);
    }

    #[test]
    fn placements_cover_every_double_loss() {
        let p = placements();
        let doubles: Vec<_> = p.iter().filter(|p| p.hits.len() == 2).collect();
        assert_eq!(doubles.len(), 6);
        assert_eq!(p.iter().filter(|p| p.hits.len() == 1 && p.hits[0].1 == 1).count(), 3);
    }

    #[test]
    fn amplification_grows_by_root_two() {
        let c = ExperimentConfig::new(Experiment::Amplify, &[("rounds", "2")]).unwrap();
        let t = run(&c).unwrap();
        let out = t.reals("alpha_out");
        assert!((out[1] - 2.0).abs() < 1e-12);
        assert!(t.reals("fidelity").iter().all(|f| *f > 1.0 - 1e-6));
    }
}
