use catsim_core::coherent::{CoherentSuperposition, QubitState};
use catsim_core::fock::{displacement_matrix, BeamsplitterConvention, MultiModeState, PureState};
use catsim_core::gates::{
    bell_measure, bell_resource, cat_measure, gate_rx, gate_rz_bare, gate_zz, Correction, GateContext, MeasurementModel, Pauli, Sampler,
    Strategy as GateStrategy,
};
use catsim_core::C64;
use proptest::prelude::*;

const CUTOFF: usize = 45;

fn complex(r: f64) -> impl Strategy<Value = C64> {
    (-r..r, -r..r).prop_map(|(a, b)| C64::new(a, b))
}

#[derive(Debug, Clone)]
enum Op {
    Displace(usize, C64),
    Phase(usize, f64),
    Split(BeamsplitterConvention),
}

fn op() -> impl Strategy<Value = Op> {
    prop_oneof![
        (0..2usize, complex(0.35)).prop_map(|(m, b)| Op::Displace(m, b)),
        (0..2usize, -3.2..3.2f64).prop_map(|(m, p)| Op::Phase(m, p)),
        (-3.2..3.2f64).prop_map(|t| Op::Split(BeamsplitterConvention::phase_coupled(t))),
        (-1.6..1.6f64).prop_map(|t| Op::Split(BeamsplitterConvention::real_coupled(t))),
    ]
}

fn superposition() -> impl Strategy<Value = CoherentSuperposition> {
    prop::collection::vec((complex(1.0), complex(0.8), complex(0.8)), 1..4).prop_filter_map("non-zero", |terms| {
        let s = CoherentSuperposition::new(2, terms.into_iter().map(|(c, a, b)| (c, vec![a, b]))).ok()?;
        s.normalized().ok()
    })
}

fn qubit() -> impl Strategy<Value = (C64, C64, f64)> {
    (complex(1.0), complex(1.0), 0.8..2.5f64).prop_filter("non-zero", |(m, n, _)| m.norm() + n.norm() > 0.1)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn label_algebra_matches_fock_simulation(start in superposition(), ops in prop::collection::vec(op(), 1..6)) {
        let mut cs = start.clone();
        let mut fock = start.to_fock(CUTOFF).unwrap();
        for o in &ops {
            match o {
                Op::Displace(m, b) => {
                    cs = cs.displace(*m, *b).unwrap();
                    fock = fock.displace(*m, *b).unwrap();
                }
                Op::Phase(m, p) => {
                    cs = cs.phase_rotate(*m, *p).unwrap();
                    fock = fock.phase_rotate(*m, *p).unwrap();
                }
                Op::Split(conv) => {
                    cs = cs.beamsplitter((0, 1), *conv).unwrap();
                    fock = fock.beamsplitter((0, 1), *conv).unwrap();
                }
            }
        }
        let expected = cs.to_fock(CUTOFF).unwrap();
        let diff = (&expected.amplitudes().view() - &fock.amplitudes().view()).iter().map(|a| a.norm()).fold(0.0, f64::max);
        prop_assert!(diff < 1e-10, "{diff}");
        prop_assert!((cs.norm_sqr() - 1.0).abs() < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn beamsplitter_blocks_are_unitary(theta in -6.3..6.3f64, total in 0..30usize, real in any::<bool>()) {
        let conv = if real { BeamsplitterConvention::real_coupled(theta) } else { BeamsplitterConvention::phase_coupled(theta) };
        let u = conv.number_block(total);
        let err = (u.adjoint() * &u - nalgebra::DMatrix::<C64>::identity(total + 1, total + 1)).camax();
        prop_assert!(err < 1e-10, "{err}");
    }

    #[test]
    fn displacement_preserves_low_number_states(beta in complex(1.5)) {
        let d = displacement_matrix(beta, 60);
        for n in 0..10 {
            for k in 0..10 {
                let dot: C64 = (0..=60).map(|m| d[(m, n)].conj() * d[(m, k)]).sum();
                let expected = if n == k { 1.0 } else { 0.0 };
                prop_assert!((dot - expected).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn split_states_stay_normalised(start in superposition(), t in -3.0..3.0f64) {
        let fock = start.to_fock(CUTOFF).unwrap();
        let out = fock.beamsplitter((0, 1), BeamsplitterConvention::phase_coupled(t)).unwrap();
        prop_assert!((PureState::norm_sqr(&out) - PureState::norm_sqr(&fock)).abs() < 1e-10);
    }

    #[test]
    fn measurement_branches_are_complete((m, n, alpha) in qubit()) {
        let q = QubitState::new(m, n, alpha).unwrap().superposition();
        let state = q.tensor(&bell_resource(alpha).unwrap());
        let nmax = catsim_core::gates::count_grid(state.max_amplitude());
        let bell: f64 = bell_measure(&state, (0, 1), nmax, &mut Sampler::Exhaustive).unwrap().iter().map(|b| b.probability).sum();
        prop_assert!((bell - 1.0).abs() < 1e-8, "{bell}");
        let cat: f64 = cat_measure(&state, 2, nmax, &mut Sampler::Exhaustive).unwrap().iter().map(|b| b.probability).sum();
        prop_assert!((cat - 1.0).abs() < 1e-8, "{cat}");
    }

    #[test]
    fn paulis_anticommute((m, n, alpha) in qubit()) {
        let model = MeasurementModel::IdealProjection;
        let q = QubitState::new(m, n, alpha).unwrap().superposition();
        let x = Correction { pauli: Pauli::X, mode: 0 };
        let z = Correction { pauli: Pauli::Z, mode: 0 };
        let xz = model.normalize(&x.apply(&z.apply(&q).unwrap()).unwrap()).unwrap();
        let zx = model.normalize(&z.apply(&x.apply(&q).unwrap()).unwrap()).unwrap();
        let overlap = model.inner(&xz, &zx).unwrap();
        prop_assert!((overlap + 1.0).norm() < 1e-9, "{overlap}");
    }

    #[test]
    fn corrections_replay((m, n, alpha) in qubit(), theta in -1.5..1.5f64, ideal in any::<bool>()) {
        let model = if ideal { MeasurementModel::IdealProjection } else { MeasurementModel::PhotonCounting };
        let ctx = GateContext::new(alpha, model).unwrap();
        let q = QubitState::new(m, n, alpha).unwrap().superposition();
        let mut outcomes = gate_rz_bare(ctx, &q, 0, theta, &mut Sampler::Exhaustive).unwrap();
        outcomes.extend(gate_rx(ctx, &q, 0, std::f64::consts::FRAC_PI_2, &GateStrategy::Bare, &mut Sampler::Exhaustive).unwrap());
        let pair = q.tensor(&q);
        if alpha > 1.0 {
            outcomes.extend(gate_zz(ctx, &pair, (0, 1), 0.3, &GateStrategy::Bare, &mut Sampler::Exhaustive).unwrap());
        }
        for o in outcomes.iter().filter(|o| o.success) {
            let replayed = o.replay().unwrap();
            let f = model.fidelity(&replayed, &o.state).unwrap();
            prop_assert!((f - 1.0).abs() < 1e-12, "{f}");
        }
    }
}

#[test]
fn fock_marginal_is_a_distribution() {
    let s = CoherentSuperposition::cat(1.3, catsim_core::fock::Parity::Odd)
        .unwrap()
        .tensor(&CoherentSuperposition::coherent(&[C64::new(0.4, 0.2)]));
    let fock: MultiModeState = s.to_fock(CUTOFF).unwrap();
    let total: f64 = fock.marginal(1).unwrap().iter().sum();
    assert!((total - 1.0).abs() < 1e-10);
}
