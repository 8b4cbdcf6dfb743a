//! Outcome-resolved quality of the single-step `R_Z(θ)` gate under photon
//! counting, and post-selection on the measured counts.

use std::collections::BTreeSet;

use crate::coherent::QubitState;
use crate::{Error, Result};

use super::protocol::GateContext;
use super::rotation::gate_rz_bare;
use super::{rotated_target, MeasurementModel, PauliAxis, RotationSpec, Sampler};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapEntry {
    pub counts: (usize, usize),
    pub probability: f64,
    /// Fidelity of the corrected output with `R_Z(θ)` applied to the input.
    pub fidelity: f64,
}

/// Every `(n_a, n_b)` outcome of a bare `R_Z(θ)` on the worst-case input
/// (`μ = ν`), sorted by counts.
#[derive(Debug, Clone, PartialEq)]
pub struct FidelityMap {
    pub alpha: f64,
    pub theta: f64,
    pub entries: Vec<MapEntry>,
}

pub fn fidelity_map(alpha: f64, theta: f64) -> Result<FidelityMap> {
    let ctx = GateContext::new(alpha, MeasurementModel::PhotonCounting)?;
    let q = QubitState::worst_case(alpha)?;
    let target = rotated_target(&q, &RotationSpec::single(PauliAxis::Z, theta))?;
    let mut entries = gate_rz_bare(ctx, &q.superposition(), 0, theta, &mut Sampler::Exhaustive)?
        .into_iter()
        .map(|o| {
            let counts = o.bell_outcomes()[0].counts.expect("photon counting records counts");
            Ok(MapEntry { counts, probability: o.probability, fidelity: o.fidelity_with(&target)? })
        })
        .collect::<Result<Vec<_>>>()?;
    entries.sort_by_key(|e| e.counts);
    Ok(FidelityMap { alpha, theta, entries })
}

impl FidelityMap {
    pub fn total_probability(&self) -> f64 {
        self.entries.iter().map(|e| e.probability).sum()
    }

    /// Fidelity of the mixture over all outcomes.
    pub fn overall_fidelity(&self) -> f64 {
        ensemble_fidelity(&self.entries)
    }

    pub fn max_fidelity(&self) -> f64 {
        self.entries.iter().map(|e| e.fidelity).fold(0.0, f64::max)
    }

    /// Longest prefix of the outcomes ranked by fidelity whose mixture keeps
    /// fidelity at least `f_min`.
    pub fn postselect(&self, f_min: f64) -> Result<PostSelection> {
        let best = self.max_fidelity();
        if f_min > best {
            return Err(Error::Infeasible { f_min, best });
        }
        let mut ranked: Vec<&MapEntry> = self.entries.iter().collect();
        ranked.sort_by(|a, b| b.fidelity.total_cmp(&a.fidelity).then(a.counts.cmp(&b.counts)));
        let (mut p, mut pf) = (0.0, 0.0);
        let mut accepted = BTreeSet::new();
        for e in ranked {
            let (np, npf) = (p + e.probability, pf + e.probability * e.fidelity);
            if npf / np < f_min {
                break;
            }
            p = np;
            pf = npf;
            accepted.insert(e.counts);
        }
        let total = self.total_probability();
        Ok(PostSelection { probability: p / total, fidelity: pf / p, accepted })
    }
}

fn ensemble_fidelity(entries: &[MapEntry]) -> f64 {
    let p: f64 = entries.iter().map(|e| e.probability).sum();
    entries.iter().map(|e| e.probability * e.fidelity).sum::<f64>() / p
}

#[derive(Debug, Clone, PartialEq)]
pub struct PostSelection {
    /// `P_S`: probability that the counts land in the accepted set.
    pub probability: f64,
    /// `F_S`: fidelity of the accepted mixture.
    pub fidelity: f64,
    pub accepted: BTreeSet<(usize, usize)>,
}

pub fn overall_fidelity(alpha: f64, theta: f64) -> Result<f64> {
    Ok(fidelity_map(alpha, theta)?.overall_fidelity())
}

pub fn postselected(alpha: f64, theta: f64, f_min: f64) -> Result<PostSelection> {
    fidelity_map(alpha, theta)?.postselect(f_min)
}

/// Bell cats consumed on average by a post-selected teleported gate that
/// succeeds with probability `p_s` per attempt: two per attempt for the
/// gated resource plus the nested pair, and one for the final teleportation.
pub fn bellcat_cost(p_s: f64) -> f64 {
    4.0 / p_s + 1.0
}
