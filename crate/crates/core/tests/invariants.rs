use discrim_core::ensembles::{discrete_ensemble, haar_qubit, CorrelationFlag};
use discrim_core::optics::{
    hom_projection, measure_with_noise, AnalyzerOutcome, BellAnalyzer, NoiseModel, NoiseParams,
};
use discrim_core::quantum::{
    bell_state, expected_payoff, sym_antisym_projectors, trace_norm, validate_povm, werner, DensityOperator, Kron,
    Operator, Priors, PureState, TwoOutcomePovm, WernerParameter,
};
use discrim_core::rng;
use discrim_core::strategies::{
    bloch_axis, helstrom_strategy, joint_bell_strategy, local_product_strategy, local_same_axis_strategy,
    DecisionRule,
};
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;

fn rho01() -> (DensityOperator, DensityOperator) {
    (werner(WernerParameter::new(0.5).unwrap()), werner(WernerParameter::new(0.0).unwrap()))
}

fn random_state4(seed: u64) -> PureState {
    let mut r = rng::stream(seed, 0);
    let amps: Vec<Complex64> = (0..4).map(|_| Complex64::new(r.random::<f64>() - 0.5, r.random::<f64>() - 0.5)).collect();
    PureState::normalized(amps).unwrap()
}

fn random_unitary(seed: u64) -> Operator {
    let mut r = rng::stream(seed, 1);
    let q = haar_qubit(&mut r);
    let (a, b) = (q.amp(0), q.amp(1));
    let ph = Complex64::from_polar(1.0, r.random::<f64>() * std::f64::consts::TAU);
    Operator::from_rows(2, &[a, -b.conj() * ph, b, a.conj() * ph]).unwrap()
}

fn random_hermitian(seed: u64) -> Operator {
    let mut r = rng::stream(seed, 2);
    let mut m = DMatrix::<Complex64>::zeros(4, 4);
    for i in 0..4 {
        for j in i..4 {
            let z = if i == j {
                Complex64::new(r.random::<f64>() * 2.0 - 1.0, 0.0)
            } else {
                Complex64::new(r.random::<f64>() * 2.0 - 1.0, r.random::<f64>() * 2.0 - 1.0)
            };
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    Operator::from_matrix(m).unwrap()
}

fn random_povm(seed: u64) -> TwoOutcomePovm {
    // spectral projector split of a random Hermitian operator
    let h = random_hermitian(seed);
    let mut e1 = Operator::zeros(4);
    for (val, v) in h.hermitian_eigen() {
        if val > 0.0 {
            e1 = &e1 + &Operator::projector(&v);
        }
    }
    TwoOutcomePovm::from_identical_element(e1)
}

#[test]
fn swapping_outcomes_and_priors_keeps_payoff() {
    let (r0, r1) = rho01();
    for seed in 0..20 {
        let m = random_povm(seed);
        let priors = Priors::new(0.3, 0.7).unwrap();
        let a = expected_payoff(&m, &r0, &r1, priors).unwrap();
        let b = expected_payoff(&m.swapped(), &r1, &r0, priors.swapped()).unwrap();
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn identical_states_give_chance() {
    for seed in 0..20 {
        let rho = DensityOperator::pure(&random_state4(seed)).unwrap();
        let p = expected_payoff(&random_povm(seed + 100), &rho, &rho, Priors::EQUAL).unwrap();
        assert!((p - 0.5).abs() < 1e-12);
    }
}

#[test]
fn projectors_commute_with_collective_unitaries() {
    let (ps, pa) = sym_antisym_projectors();
    for seed in 0..100 {
        let u = random_unitary(seed);
        let uu = u.kron(&u);
        for p in [&ps, &pa] {
            assert!((&uu * p).max_abs_diff(&(p * &uu)) < 1e-10, "seed {seed}");
        }
    }
}

#[test]
fn trace_norm_matches_singular_values() {
    for seed in 0..100 {
        let h = random_hermitian(seed);
        let svd: f64 = h.matrix().clone().singular_values().iter().sum();
        assert!((trace_norm(&h).unwrap() - svd).abs() < 1e-10);
    }
}

#[test]
fn helstrom_bounds_every_strategy() {
    let (r0, r1) = rho01();
    let (_, best) = helstrom_strategy(&r0, &r1, Priors::EQUAL).unwrap();
    let joint = joint_bell_strategy().payoff(&r0, &r1, Priors::EQUAL).unwrap();
    assert!((best - joint).abs() < 1e-12);
    let mut r = rng::stream(7, 0);
    for _ in 0..200 {
        let a = bloch_axis(r.random::<f64>() * std::f64::consts::PI, r.random::<f64>() * std::f64::consts::TAU);
        let b = bloch_axis(r.random::<f64>() * std::f64::consts::PI, r.random::<f64>() * std::f64::consts::TAU);
        let s = local_product_strategy(&a, &b, DecisionRule::new(r.random_range(0..16)).unwrap()).unwrap();
        let report = validate_povm(s.povm());
        assert!(report.valid);
        assert!(s.payoff(&r0, &r1, Priors::EQUAL).unwrap() <= best + 1e-10);
        for e in [&s.povm().e0, &s.povm().e1] {
            assert!(e.partial_transpose().unwrap().min_eigenvalue() >= -1e-10);
        }
    }
    for s in [joint_bell_strategy(), local_same_axis_strategy(&bloch_axis(1.0, 2.0)).unwrap()] {
        assert!(validate_povm(s.povm()).valid);
    }
}

#[test]
fn ideal_analyzer_reproduces_born_rule() {
    let analyzer = BellAnalyzer::ideal();
    for seed in 0..100 {
        let psi = random_state4(seed);
        for model in [NoiseModel::StatisticsDepolarizing, NoiseModel::FockDistinguishability] {
            let dist = measure_with_noise(&psi, NoiseParams::ideal(), model).unwrap();
            for o in AnalyzerOutcome::ALL {
                let born = bell_state(analyzer.map().to_bell(o)).inner(&psi).norm_sqr();
                assert!((dist.prob(o) - born).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn hom_matches_antisymmetric_projector() {
    let (_, pa) = sym_antisym_projectors();
    for seed in 0..100 {
        let psi = random_state4(seed);
        assert!((hom_projection(&psi, 1.0).unwrap() - pa.expectation(&psi).re).abs() < 1e-12);
    }
}

#[test]
fn depolarized_payoff_is_affine() {
    let a = BellAnalyzer::ideal();
    let p = |l: f64| a.discrete_payoff(NoiseParams::depolarizing(l).unwrap(), NoiseModel::StatisticsDepolarizing).unwrap().0;
    let (p0, ph, p1) = (p(0.0), p(0.5), p(1.0));
    assert!((ph - 0.5 * (p0 + p1)).abs() < 1e-10);
}

#[test]
fn discrete_classes_average_to_werner_forms() {
    let (r0, r1) = rho01();
    for (j, want) in [(CorrelationFlag::Orthogonal, &r0), (CorrelationFlag::Identical, &r1)] {
        let pairs = discrete_ensemble(j);
        let mut avg = Operator::zeros(4);
        for p in &pairs {
            avg = &avg + &p.product_state().density();
        }
        assert!(avg.scale(1.0 / pairs.len() as f64).max_abs_diff(want.operator()) < 1e-12);
    }
}

proptest! {
    #[test]
    fn classical_statistics_ignore_phases(seed in any::<u64>(), phases in prop::array::uniform4(0.0..std::f64::consts::TAU)) {
        let a = BellAnalyzer::ideal();
        let psi = random_state4(seed);
        let shifted: Vec<Complex64> = (0..4).map(|k| psi.amp(k) * Complex64::from_polar(1.0, phases[k])).collect();
        let shifted = PureState::new(shifted).unwrap();
        let (d0, d1) = (a.classical_distribution(&psi), a.classical_distribution(&shifted));
        for k in 0..4 {
            prop_assert!((d0.0[k] - d1.0[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn noisy_distributions_are_normalized(seed in any::<u64>(), x in 0.0..=1.0f64, fock in any::<bool>()) {
        let model = if fock { NoiseModel::FockDistinguishability } else { NoiseModel::StatisticsDepolarizing };
        let dist = measure_with_noise(&random_state4(seed), NoiseParams::with_parameter(model, x).unwrap(), model).unwrap();
        prop_assert!((dist.0.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(dist.0.iter().all(|&p| p >= -1e-15));
    }

    #[test]
    fn hom_is_affine_in_overlap(seed in any::<u64>(), v in 0.0..=1.0f64) {
        let psi = random_state4(seed);
        let want = v * hom_projection(&psi, 1.0).unwrap() + (1.0 - v) * 0.5;
        prop_assert!((hom_projection(&psi, v).unwrap() - want).abs() < 1e-12);
    }
}
