//! Teleportation-based gates on coherent-state qubits.
//!
//! Every gate runs under one of two measurement models:
//!
//! * [`MeasurementModel::PhotonCounting`]: Bell and cat measurements are a
//!   beamsplitter followed by photon counting, simulated exactly on
//!   [`CoherentSuperposition`]s. Conditional states keep all the
//!   non-orthogonality of the code words.
//! * [`MeasurementModel::IdealProjection`]: `|±α⟩` are treated as orthonormal.
//!   A label that has drifted off the code is projected onto the code word of
//!   the same sign, and Bell/cat measurements are exact logical projectors.
//!   Branch probabilities and fidelities use the orthonormal inner product.
//!
//! Randomness is explicit: each protocol takes a [`Sampler`], which either
//! draws a single outcome path from an RNG or enumerates every branch.

mod analysis;
mod homodyne;
mod measure;
pub(crate) mod protocol;
mod rotation;
mod two_qubit;

pub use analysis::{bellcat_cost, fidelity_map, overall_fidelity, postselected, FidelityMap, MapEntry, PostSelection};
pub use homodyne::{homodyne_cat_discriminate, CatVerdict, HomodyneDiscriminator};
pub use measure::{
    bell_measure, bell_resource, bell_resource_fock, cat_measure, count_grid, ideal_bell_resource, parity_probabilities, BellBranch,
    CatBranch, CountingState,
};
pub use protocol::GateContext;
pub use rotation::{gate_rz_bare, gate_rz_teleported, gate_rz_zeno, gate_z, rz_displacement, TeleportedOptions};
pub use two_qubit::{gate_rx, gate_zz, rx_splitter_angle, zz_splitter_angle, Strategy};

use rand::RngCore;

use crate::coherent::{CoherentSuperposition, QubitState};
use crate::fock::{Parity, PureState};
use crate::{Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MeasurementModel {
    IdealProjection,
    PhotonCounting,
}

impl MeasurementModel {
    pub fn norm_sqr(&self, state: &CoherentSuperposition) -> f64 {
        match self {
            MeasurementModel::IdealProjection => state.code_norm_sqr(),
            MeasurementModel::PhotonCounting => state.norm_sqr(),
        }
    }

    pub fn inner(&self, a: &CoherentSuperposition, b: &CoherentSuperposition) -> Result<C64> {
        match self {
            MeasurementModel::IdealProjection => a.code_inner(b),
            MeasurementModel::PhotonCounting => a.inner(b),
        }
    }

    /// Phase-insensitive fidelity in this model's inner product.
    pub fn fidelity(&self, a: &CoherentSuperposition, b: &CoherentSuperposition) -> Result<f64> {
        let (na, nb) = (self.norm_sqr(a), self.norm_sqr(b));
        if !(na > 0.0 && nb > 0.0) {
            return Err(Error::ZeroNorm);
        }
        Ok(self.inner(a, b)?.norm_sqr() / (na * nb))
    }

    pub fn normalize(&self, state: &CoherentSuperposition) -> Result<CoherentSuperposition> {
        let n = self.norm_sqr(state);
        if !(n > 0.0) {
            return Err(Error::ZeroNorm);
        }
        Ok(state.scaled(C64::new(1.0 / n.sqrt(), 0.0)))
    }
}

/// Where outcomes come from: one random path, or every branch.
pub enum Sampler<'a> {
    Exhaustive,
    Random(&'a mut dyn RngCore),
}

impl Sampler<'_> {
    pub fn is_exhaustive(&self) -> bool {
        matches!(self, Sampler::Exhaustive)
    }

    /// Keeps every item, or draws one with probability `weight / total`;
    /// the draw lands on nothing with probability `1 − Σweight/total`.
    pub(crate) fn pick<T>(&mut self, items: Vec<(f64, T)>, total: f64) -> Vec<(f64, T)> {
        match self {
            Sampler::Exhaustive => items,
            Sampler::Random(rng) => {
                let u = (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64 * total;
                let mut acc = 0.0;
                for (w, item) in items {
                    acc += w;
                    if u < acc {
                        return vec![(w, item)];
                    }
                }
                Vec::new()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    X,
    Z,
}

/// A Pauli applied to one mode of the gate's state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Correction {
    pub pauli: Pauli,
    pub mode: usize,
}

impl Correction {
    pub fn apply(&self, state: &CoherentSuperposition) -> Result<CoherentSuperposition> {
        match self.pauli {
            Pauli::X => state.bit_flip(self.mode),
            Pauli::Z => state.sign_flip(self.mode),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BellKind {
    B00,
    B10,
    B01,
    B11,
    Failure,
}

impl BellKind {
    /// Paulis that undo the teleported frame: the raw output is `σ q` with
    /// `σ ∈ {I, Z, X, XZ}`.
    pub fn frame(&self) -> &'static [Pauli] {
        match self {
            BellKind::B00 | BellKind::Failure => &[],
            BellKind::B10 => &[Pauli::Z],
            BellKind::B01 => &[Pauli::X],
            BellKind::B11 => &[Pauli::X, Pauli::Z],
        }
    }
}

/// Photon counts in the two output ports of a Bell measurement; `None` under
/// ideal projection.
pub type PortCounts = Option<(usize, usize)>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BellOutcome {
    pub kind: BellKind,
    pub counts: PortCounts,
}

impl BellOutcome {
    /// Zero counts in one port give the four Bell states; both dark is a
    /// failure. When both ports fire the brighter port decides, ties going to
    /// the first.
    pub fn from_counts(na: usize, nb: usize) -> Self {
        let kind = match (na, nb) {
            (0, 0) => BellKind::Failure,
            _ if na >= nb => {
                if na.is_multiple_of(2) {
                    BellKind::B00
                } else {
                    BellKind::B10
                }
            }
            _ => {
                if nb.is_multiple_of(2) {
                    BellKind::B01
                } else {
                    BellKind::B11
                }
            }
        };
        Self { kind, counts: Some((na, nb)) }
    }

    pub fn ideal(kind: BellKind) -> Self {
        Self { kind, counts: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Record {
    Bell {
        outcome: BellOutcome,
        corrections: Vec<Correction>,
    },
    Cat {
        parities: (Parity, Parity),
        counts: PortCounts,
        corrections: Vec<Correction>,
    },
    /// A rotation actually realised by a teleported gate attempt.
    Rotation {
        angle: f64,
    },
    /// A resource attempt thrown away before touching the qubit.
    Discarded {
        counts: PortCounts,
    },
    /// Two pairwise parity comparisons of a three-mode code block.
    Syndrome {
        parities: (Parity, Parity),
        corrections: Vec<Correction>,
    },
}

/// Result of one protocol run along one measurement branch.
#[derive(Debug, Clone)]
pub struct GateOutcome {
    /// Normalised output in the model's inner product.
    pub state: CoherentSuperposition,
    /// Output just before the final correction batch.
    pub raw_state: CoherentSuperposition,
    pub record: Vec<Record>,
    /// The final correction batch; replaying it on `raw_state` gives `state`.
    pub corrections: Vec<Correction>,
    pub success: bool,
    /// Probability of this branch (product of its conditional probabilities).
    pub probability: f64,
    pub model: MeasurementModel,
    /// Bell resources consumed.
    pub resources: usize,
}

impl GateOutcome {
    pub fn fidelity_with(&self, target: &CoherentSuperposition) -> Result<f64> {
        self.model.fidelity(&self.state, target)
    }

    pub fn replay(&self) -> Result<CoherentSuperposition> {
        self.corrections.iter().try_fold(self.raw_state.clone(), |s, c| c.apply(&s))
    }

    /// Bell outcomes in the order they occurred.
    pub fn bell_outcomes(&self) -> Vec<BellOutcome> {
        self.record
            .iter()
            .filter_map(|r| match r {
                Record::Bell { outcome, .. } => Some(*outcome),
                _ => None,
            })
            .collect()
    }

    pub fn realized_angles(&self) -> Vec<f64> {
        self.record
            .iter()
            .filter_map(|r| match r {
                Record::Rotation { angle } => Some(*angle),
                _ => None,
            })
            .collect()
    }

    pub fn qubit(&self, alpha: f64) -> Result<QubitState> {
        QubitState::from_superposition(&self.state, alpha)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PauliAxis {
    I,
    X,
    Y,
    Z,
}

impl PauliAxis {
    pub fn matrix(&self) -> [[C64; 2]; 2] {
        let o = C64::new(0.0, 0.0);
        let l = C64::new(1.0, 0.0);
        let i = C64::new(0.0, 1.0);
        match self {
            PauliAxis::I => [[l, o], [o, l]],
            PauliAxis::X => [[o, l], [l, o]],
            PauliAxis::Y => [[o, -i], [i, o]],
            PauliAxis::Z => [[l, o], [o, -l]],
        }
    }
}

/// `R(K, θ) = exp(−iθK/2)` with `K` a tensor product of Paulis, acting on the
/// orthonormal logical space (bit 0 ↔ `|−α⟩`, first axis most significant).
#[derive(Debug, Clone, PartialEq)]
pub struct RotationSpec {
    pub axes: Vec<PauliAxis>,
    pub theta: f64,
}

impl RotationSpec {
    pub fn new(axes: Vec<PauliAxis>, theta: f64) -> Self {
        Self { axes, theta }
    }

    pub fn single(axis: PauliAxis, theta: f64) -> Self {
        Self::new(vec![axis], theta)
    }

    fn generator(&self) -> Vec<Vec<C64>> {
        let mut k = vec![vec![C64::new(1.0, 0.0)]];
        for axis in &self.axes {
            let m = axis.matrix();
            let d = k.len();
            let mut next = vec![vec![C64::new(0.0, 0.0); 2 * d]; 2 * d];
            for (r, row) in k.iter().enumerate() {
                for (c, v) in row.iter().enumerate() {
                    for a in 0..2 {
                        for b in 0..2 {
                            next[2 * r + a][2 * c + b] = v * m[a][b];
                        }
                    }
                }
            }
            k = next;
        }
        k
    }

    pub fn matrix(&self) -> Vec<Vec<C64>> {
        let k = self.generator();
        let (s, c) = (self.theta / 2.0).sin_cos();
        k.iter()
            .enumerate()
            .map(|(r, row)| {
                row.iter()
                    .enumerate()
                    .map(|(col, v)| if r == col { C64::new(c, 0.0) } else { C64::new(0.0, 0.0) } - C64::new(0.0, s) * v)
                    .collect()
            })
            .collect()
    }

    pub fn apply(&self, logical: &[C64]) -> Result<Vec<C64>> {
        let m = self.matrix();
        if logical.len() != m.len() {
            return Err(Error::DimensionMismatch(format!("{} amplitudes for a {}-qubit rotation", logical.len(), self.axes.len())));
        }
        Ok(m.iter().map(|row| row.iter().zip(logical).map(|(a, b)| a * b).sum()).collect())
    }
}

/// `Σ_x v_x |±α…⟩` with bit `x_k = 1` meaning `+amplitudes[k]` on mode `k`.
pub fn code_state(logical: &[C64], amplitudes: &[f64]) -> Result<CoherentSuperposition> {
    let n = amplitudes.len();
    if logical.len() != 1 << n {
        return Err(Error::DimensionMismatch(format!("{} amplitudes for {n} modes", logical.len())));
    }
    CoherentSuperposition::new(
        n,
        logical.iter().enumerate().map(|(x, v)| {
            let labels = (0..n)
                .map(|k| {
                    let bit = (x >> (n - 1 - k)) & 1;
                    C64::new(if bit == 1 { amplitudes[k] } else { -amplitudes[k] }, 0.0)
                })
                .collect();
            (*v, labels)
        }),
    )
}

/// Inverse of [`code_state`] for states whose labels are all code words.
pub fn logical_amplitudes(state: &CoherentSuperposition, amplitudes: &[f64]) -> Result<Vec<C64>> {
    let n = amplitudes.len();
    if state.modes() != n {
        return Err(Error::DimensionMismatch(format!("{} modes, {n} amplitudes", state.modes())));
    }
    let mut out = vec![C64::new(0.0, 0.0); 1 << n];
    for t in state.terms() {
        let mut x = 0;
        for (k, l) in t.labels.iter().enumerate() {
            let bit = if (l - amplitudes[k]).norm() <= crate::coherent::CODE_LABEL_TOLERANCE {
                1
            } else if (l + amplitudes[k]).norm() <= crate::coherent::CODE_LABEL_TOLERANCE {
                0
            } else {
                return Err(Error::invalid(format!("label {l} on mode {k} is not a code word")));
            };
            x = (x << 1) | bit;
        }
        out[x] += t.coeff;
    }
    Ok(out)
}

/// Target for a single-qubit rotation of `q`, with the same code amplitude.
pub fn rotated_target(q: &QubitState, spec: &RotationSpec) -> Result<CoherentSuperposition> {
    let v = spec.apply(&[q.mu(), q.nu()])?;
    code_state(&v, &[q.alpha()])
}
