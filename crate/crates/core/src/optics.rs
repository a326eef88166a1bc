//! Linear-optics model of the Bell-state analyzer.
//!
//! The analyzer is a coincidence-basis CNOT built from beam splitters on six
//! spatial modes (two dual-rail qubits plus two vacuum ancillas), followed by
//! a D/A polarization analyzer on the control output and H/V on the target
//! output. Only events with one photon in each output arm are kept.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::ensembles::{discrete_ensemble, pol_state, CorrelationFlag, PolarizationLabel};
use crate::error::{input, Error, Result};
use crate::quantum::{bell_state, c, sym_antisym_projectors, BellState, Kron, Operator, PureState, C64};
use crate::strategies::outcome_to_estimate;

/// Mode indices of the CNOT network.
pub mod modes {
    pub const C0: usize = 0;
    pub const C1: usize = 1;
    pub const T0: usize = 2;
    pub const T1: usize = 3;
    pub const A0: usize = 4;
    pub const A1: usize = 5;
}

/// Tolerance on unitarity of a mode transfer matrix.
pub const UNITARITY_TOL: f64 = 1e-12;

/// A passive linear-optical network: `transfer[(o, i)]` is the amplitude for a
/// photon entering mode `i` to leave in mode `o`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModeNetwork {
    pub mode_count: usize,
    pub transfer: Operator,
    pub control_modes: [usize; 2],
    pub target_modes: [usize; 2],
    pub ancilla_modes: Vec<usize>,
}

impl ModeNetwork {
    pub fn new(
        transfer: Operator,
        control_modes: [usize; 2],
        target_modes: [usize; 2],
        ancilla_modes: Vec<usize>,
    ) -> Result<Self> {
        let n = transfer.dim();
        let mut seen = vec![false; n];
        for &m in control_modes.iter().chain(&target_modes).chain(&ancilla_modes) {
            if m >= n {
                return input(format!("mode {m} out of range for a {n}-mode network"));
            }
            if std::mem::replace(&mut seen[m], true) {
                return input(format!("mode {m} assigned to more than one role"));
            }
        }
        Ok(Self { mode_count: n, transfer, control_modes, target_modes, ancilla_modes })
    }

    /// `max |U U† - I|`
    pub fn unitarity_error(&self) -> f64 {
        (&self.transfer * &self.transfer.adjoint()).max_abs_diff(&Operator::identity(self.mode_count))
    }

    fn amp(&self, out: usize, inp: usize) -> C64 {
        self.transfer.get(out, inp)
    }

    /// Amplitude for photons in distinct input modes `(i, k)` to leave in
    /// distinct output modes `(o1, o2)`: the permanent of the 2×2 submatrix.
    pub fn two_photon_amplitude(&self, inputs: (usize, usize), outputs: (usize, usize)) -> C64 {
        let (i, k) = inputs;
        let (o1, o2) = outputs;
        self.amp(o1, i) * self.amp(o2, k) + self.amp(o1, k) * self.amp(o2, i)
    }

    /// Same event for distinguishable photons (no interference).
    pub fn two_photon_probability_distinguishable(&self, inputs: (usize, usize), outputs: (usize, usize)) -> f64 {
        let (i, k) = inputs;
        let (o1, o2) = outputs;
        self.amp(o1, i).norm_sqr() * self.amp(o2, k).norm_sqr()
            + self.amp(o1, k).norm_sqr() * self.amp(o2, i).norm_sqr()
    }
}

/// Beam splitter of reflectivity `eta` on modes `(m, n)`, embedded in an
/// `n_modes` identity: `m -> √η m + √(1-η) n`, `n -> √(1-η) m - √η n`.
pub fn beam_splitter(n_modes: usize, m: usize, n: usize, eta: f64) -> Operator {
    let r = eta.sqrt();
    let t = (1.0 - eta).sqrt();
    let mut u = Operator::identity(n_modes).matrix().clone();
    u[(m, m)] = c(r, 0.0);
    u[(m, n)] = c(t, 0.0);
    u[(n, m)] = c(t, 0.0);
    u[(n, n)] = c(-r, 0.0);
    Operator::from_matrix(u).expect("square")
}

/// The coincidence-basis CNOT: a 50/50 splitter on the target rails, three
/// 1/3 splitters coupling `c1` to `t0` and balancing `c0` and `t1` against
/// vacuum ancillas, then a second 50/50 splitter on the target rails.
pub fn build_cnot_network() -> ModeNetwork {
    use modes::*;
    let third = 1.0 / 3.0;
    let layers = [
        beam_splitter(6, T0, T1, 0.5),
        // Sign flip lands on the c1 self-reflection.
        beam_splitter(6, T0, C1, third),
        beam_splitter(6, C0, A0, third),
        beam_splitter(6, T1, A1, third),
        beam_splitter(6, T0, T1, 0.5),
    ];
    let transfer = layers.iter().fold(Operator::identity(6), |acc, layer| layer * &acc);
    ModeNetwork::new(transfer, [C0, C1], [T0, T1], vec![A0, A1]).expect("fixed mode roles")
}

/// Standard CNOT, control on the first qubit, basis `(HH, HV, VH, VV)`.
pub fn cnot_matrix() -> Operator {
    Operator::from_real_rows(
        4,
        &[
            1.0, 0.0, 0.0, 0.0, //
            0.0, 1.0, 0.0, 0.0, //
            0.0, 0.0, 0.0, 1.0, //
            0.0, 0.0, 1.0, 0.0,
        ],
    )
    .expect("4x4")
}

/// Post-selected two-qubit map of a network, conditioned on one photon in
/// each output arm.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionalGate {
    pub matrix: Operator,
    pub success_amplitude_scale: f64,
}

impl ConditionalGate {
    /// Coincidence probability for a two-qubit input.
    pub fn success_probability(&self, psi: &PureState) -> f64 {
        self.matrix.apply(psi).norm_squared()
    }

    /// `max |M e^{-iφ}/s - target|` with the global phase `φ` chosen to
    /// align `M` with `target`.
    pub fn deviation_from(&self, target: &Operator) -> f64 {
        let overlap = target.adjoint().trace_product(&self.matrix);
        let phase = if overlap.norm() > 0.0 { overlap / overlap.norm() } else { c(1.0, 0.0) };
        let aligned = self.matrix.scale_complex(phase.conj() / self.success_amplitude_scale);
        aligned.max_abs_diff(target)
    }
}

pub fn conditional_gate(net: &ModeNetwork) -> Result<ConditionalGate> {
    let err = net.unitarity_error();
    if err > UNITARITY_TOL {
        return input(format!("mode network is not unitary (deviation {err:e})"));
    }
    let mut m = [c(0.0, 0.0); 16];
    for ci in 0..2 {
        for ti in 0..2 {
            let inputs = (net.control_modes[ci], net.target_modes[ti]);
            for co in 0..2 {
                for to in 0..2 {
                    let outputs = (net.control_modes[co], net.target_modes[to]);
                    m[4 * (2 * co + to) + 2 * ci + ti] = net.two_photon_amplitude(inputs, outputs);
                }
            }
        }
    }
    let matrix = Operator::from_rows(4, &m)?;
    let mean_success = (0..4).map(|k| matrix.apply(&PureState::basis(4, k)).norm_squared()).sum::<f64>() / 4.0;
    Ok(ConditionalGate { matrix, success_amplitude_scale: mean_success.sqrt() })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ControlSetting {
    D,
    A,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TargetSetting {
    H,
    V,
}

/// One coincidence outcome of the polarization analyzers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AnalyzerOutcome {
    pub control: ControlSetting,
    pub target: TargetSetting,
}

impl AnalyzerOutcome {
    /// `(D,H), (D,V), (A,H), (A,V)`
    pub const ALL: [AnalyzerOutcome; 4] = [
        AnalyzerOutcome { control: ControlSetting::D, target: TargetSetting::H },
        AnalyzerOutcome { control: ControlSetting::D, target: TargetSetting::V },
        AnalyzerOutcome { control: ControlSetting::A, target: TargetSetting::H },
        AnalyzerOutcome { control: ControlSetting::A, target: TargetSetting::V },
    ];

    pub fn index(self) -> usize {
        2 * self.control as usize + self.target as usize
    }

    pub fn state(self) -> PureState {
        let ctrl = match self.control {
            ControlSetting::D => PolarizationLabel::D,
            ControlSetting::A => PolarizationLabel::A,
        };
        let tgt = match self.target {
            TargetSetting::H => PolarizationLabel::H,
            TargetSetting::V => PolarizationLabel::V,
        };
        pol_state(ctrl).kron(&pol_state(tgt))
    }
}

impl fmt::Display for AnalyzerOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?},{:?})", self.control, self.target)
    }
}

/// Bijection between analyzer outcomes and Bell states.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BellAnalyzerMap {
    bell_of: [BellState; 4],
}

impl BellAnalyzerMap {
    pub fn to_bell(&self, o: AnalyzerOutcome) -> BellState {
        self.bell_of[o.index()]
    }

    pub fn to_analyzer(&self, b: BellState) -> AnalyzerOutcome {
        AnalyzerOutcome::ALL
            .into_iter()
            .find(|o| self.bell_of[o.index()] == b)
            .expect("map is a bijection")
    }

    pub fn pairs(&self) -> [(AnalyzerOutcome, BellState); 4] {
        AnalyzerOutcome::ALL.map(|o| (o, self.to_bell(o)))
    }
}

/// Derives the map from `CNOT |bell> = |control analyzer> ⊗ |target analyzer>`.
pub fn bell_analyzer_map() -> BellAnalyzerMap {
    let cnot = cnot_matrix();
    let mut bell_of = [BellState::PsiMinus; 4];
    let mut hit = [false; 4];
    for b in BellState::ALL {
        let out = PureState::new(cnot.apply(&bell_state(b)).iter().copied().collect()).expect("CNOT is unitary");
        let o = AnalyzerOutcome::ALL
            .into_iter()
            .find(|o| o.state().same_ray(&out))
            .expect("CNOT maps Bell states onto analyzer product states");
        assert!(!std::mem::replace(&mut hit[o.index()], true), "two Bell states on one outcome");
        bell_of[o.index()] = b;
    }
    BellAnalyzerMap { bell_of }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NoiseParams {
    /// Two-photon mode overlap `v`.
    pub overlap: f64,
    /// Weight `λ` of the ideal statistics against uniform outcomes.
    pub depolarizing: f64,
}

impl NoiseParams {
    pub fn new(overlap: f64, depolarizing: f64) -> Result<Self> {
        for (name, x) in [("overlap", overlap), ("depolarizing weight", depolarizing)] {
            if !(0.0..=1.0).contains(&x) {
                return input(format!("{name} must lie in [0, 1], got {x}"));
            }
        }
        Ok(Self { overlap, depolarizing })
    }

    pub fn ideal() -> Self {
        Self { overlap: 1.0, depolarizing: 1.0 }
    }

    pub fn depolarizing(lambda: f64) -> Result<Self> {
        Self::new(1.0, lambda)
    }

    pub fn distinguishability(overlap: f64) -> Result<Self> {
        Self::new(overlap, 1.0)
    }

    /// The parameter that `model` uses.
    pub fn parameter(&self, model: NoiseModel) -> f64 {
        match model {
            NoiseModel::StatisticsDepolarizing => self.depolarizing,
            NoiseModel::FockDistinguishability => self.overlap,
        }
    }

    pub fn with_parameter(model: NoiseModel, x: f64) -> Result<Self> {
        match model {
            NoiseModel::StatisticsDepolarizing => Self::depolarizing(x),
            NoiseModel::FockDistinguishability => Self::distinguishability(x),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseModel {
    /// `p = λ p_ideal + (1-λ)/4`
    StatisticsDepolarizing,
    /// `p = v p_ideal + (1-v) p_classical`, with `p_classical` from
    /// distinguishable photons in the same network.
    FockDistinguishability,
}

impl NoiseModel {
    pub fn name(self) -> &'static str {
        match self {
            NoiseModel::StatisticsDepolarizing => "statistics_depolarizing",
            NoiseModel::FockDistinguishability => "fock_distinguishability",
        }
    }
}

impl FromStr for NoiseModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "depolarizing" | "statistics_depolarizing" => Ok(NoiseModel::StatisticsDepolarizing),
            "fock" | "distinguishability" | "fock_distinguishability" => Ok(NoiseModel::FockDistinguishability),
            _ => input(format!("unknown noise model '{s}' (expected depolarizing, fock)")),
        }
    }
}

/// Probabilities over [`AnalyzerOutcome::ALL`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OutcomeDistribution(pub [f64; 4]);

impl OutcomeDistribution {
    pub fn prob(&self, o: AnalyzerOutcome) -> f64 {
        self.0[o.index()]
    }

    pub fn mix(&self, other: &OutcomeDistribution, weight: f64) -> OutcomeDistribution {
        OutcomeDistribution(std::array::from_fn(|k| weight * self.0[k] + (1.0 - weight) * other.0[k]))
    }

    pub fn uniform() -> Self {
        OutcomeDistribution([0.25; 4])
    }

    /// Probability that the decoded Bell outcome is the singlet.
    pub fn prob_singlet(&self, map: &BellAnalyzerMap) -> f64 {
        self.prob(map.to_analyzer(BellState::PsiMinus))
    }
}

/// A CNOT network plus analyzers, ready to produce outcome statistics.
#[derive(Clone, Debug)]
pub struct BellAnalyzer {
    network: ModeNetwork,
    gate: ConditionalGate,
    map: BellAnalyzerMap,
    /// `M† |o>` for each analyzer outcome `o`.
    pulled_back: [DVector<C64>; 4],
}

impl BellAnalyzer {
    pub fn new(network: ModeNetwork) -> Result<Self> {
        let gate = conditional_gate(&network)?;
        let adj = gate.matrix.adjoint();
        let pulled_back = AnalyzerOutcome::ALL.map(|o| adj.apply(&o.state()));
        Ok(Self { network, gate, map: bell_analyzer_map(), pulled_back })
    }

    pub fn ideal() -> Self {
        Self::new(build_cnot_network()).expect("the CNOT network is unitary")
    }

    pub fn gate(&self) -> &ConditionalGate {
        &self.gate
    }

    pub fn map(&self) -> &BellAnalyzerMap {
        &self.map
    }

    pub fn network(&self) -> &ModeNetwork {
        &self.network
    }

    /// Born-rule statistics of the post-selected output, with
    /// indistinguishable photons.
    pub fn ideal_distribution(&self, psi: &PureState) -> OutcomeDistribution {
        let weights = self.pulled_back.each_ref().map(|w| w.dotc(psi.amplitudes()).norm_sqr());
        let total: f64 = weights.iter().sum();
        OutcomeDistribution(weights.map(|x| x / total))
    }

    /// Ideal statistics for a mixed input. The conditional gate is
    /// proportional to a unitary, so this is linear in `rho`.
    pub fn ideal_distribution_mixed(&self, rho: &Operator) -> OutcomeDistribution {
        let weights = self.pulled_back.each_ref().map(|w| w.dotc(&(rho.matrix() * w)).re);
        let total: f64 = weights.iter().sum();
        OutcomeDistribution(weights.map(|x| x / total))
    }

    /// Statistics for fully distinguishable photons: every computational
    /// input component propagates incoherently, the control analyzer sees no
    /// rail coherence, and non-coincident events are discarded.
    pub fn classical_distribution(&self, psi: &PureState) -> OutcomeDistribution {
        let net = &self.network;
        let mut by_target = [0.0; 2];
        for ci in 0..2 {
            for ti in 0..2 {
                let w = psi.amp(2 * ci + ti).norm_sqr();
                if w == 0.0 {
                    continue;
                }
                let inputs = (net.control_modes[ci], net.target_modes[ti]);
                for co in 0..2 {
                    for (to, slot) in by_target.iter_mut().enumerate() {
                        let outputs = (net.control_modes[co], net.target_modes[to]);
                        *slot += w * net.two_photon_probability_distinguishable(inputs, outputs);
                    }
                }
            }
        }
        let total = by_target[0] + by_target[1];
        OutcomeDistribution(AnalyzerOutcome::ALL.map(|o| 0.5 * by_target[o.target as usize] / total))
    }

    pub fn distribution(&self, psi: &PureState, noise: NoiseParams, model: NoiseModel) -> Result<OutcomeDistribution> {
        if psi.dim() != 4 {
            return input(format!("analyzer input must be a two-qubit state, got dim {}", psi.dim()));
        }
        let noise = NoiseParams::new(noise.overlap, noise.depolarizing)?;
        let ideal = self.ideal_distribution(psi);
        Ok(match model {
            NoiseModel::StatisticsDepolarizing => ideal.mix(&OutcomeDistribution::uniform(), noise.depolarizing),
            NoiseModel::FockDistinguishability => ideal.mix(&self.classical_distribution(psi), noise.overlap),
        })
    }

    /// Probability of guessing the correlation of `pair` correctly.
    pub fn success_probability(&self, psi: &PureState, j: CorrelationFlag, noise: NoiseParams, model: NoiseModel) -> Result<f64> {
        let dist = self.distribution(psi, noise, model)?;
        Ok(AnalyzerOutcome::ALL
            .into_iter()
            .filter(|&o| outcome_to_estimate(self.map.to_bell(o)) == j)
            .map(|o| dist.prob(o))
            .sum())
    }

    /// Class-balanced payoff over the twelve labeled discrete preparations,
    /// plus the mean success on the parallel class.
    pub fn discrete_payoff(&self, noise: NoiseParams, model: NoiseModel) -> Result<(f64, f64)> {
        let mut class_mean = [0.0; 2];
        for j in CorrelationFlag::BOTH {
            let pairs = discrete_ensemble(j);
            let mut sum = 0.0;
            for p in &pairs {
                sum += self.success_probability(&p.product_state(), j, noise, model)?;
            }
            class_mean[j.bit()] = sum / pairs.len() as f64;
        }
        Ok((0.5 * (class_mean[0] + class_mean[1]), class_mean[CorrelationFlag::Identical.bit()]))
    }
}

/// Outcome statistics of the ideal CNOT analyzer under a noise model.
pub fn measure_with_noise(state: &PureState, noise: NoiseParams, model: NoiseModel) -> Result<OutcomeDistribution> {
    BellAnalyzer::ideal().distribution(state, noise, model)
}

/// Fits the noise parameter of `model` so the discrete-ensemble payoff of
/// the joint measurement equals `target_payoff`, by bisection on `[0, 1]`.
pub fn fit_noise(target_payoff: f64, model: NoiseModel) -> Result<NoiseParams> {
    let analyzer = BellAnalyzer::ideal();
    let payoff = |x: f64| -> Result<f64> { Ok(analyzer.discrete_payoff(NoiseParams::with_parameter(model, x)?, model)?.0) };
    let (mut lo, mut hi) = (0.0, 1.0);
    let (f_lo, f_hi) = (payoff(lo)? - target_payoff, payoff(hi)? - target_payoff);
    let tol = 1e-12;
    if !target_payoff.is_finite() || f_lo * f_hi > 0.0 && f_lo.abs() > tol && f_hi.abs() > tol {
        return Err(Error::NoSolution(format!(
            "payoff {target_payoff} is outside the {} model's range [{:.6}, {:.6}]",
            model.name(),
            f_lo + target_payoff,
            f_hi + target_payoff
        )));
    }
    if f_hi.abs() <= tol {
        return NoiseParams::with_parameter(model, 1.0);
    }
    if f_lo.abs() <= tol {
        return NoiseParams::with_parameter(model, 0.0);
    }
    let increasing = f_hi > f_lo;
    while hi - lo > 1e-13 {
        let mid = 0.5 * (lo + hi);
        let f = payoff(mid)? - target_payoff;
        if (f < 0.0) == increasing {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    NoiseParams::with_parameter(model, 0.5 * (lo + hi))
}

/// Average gate fidelity of a two-qubit depolarizing channel that keeps the
/// state with weight `lambda`.
pub fn depolarizing_average_gate_fidelity(lambda: f64) -> f64 {
    let d = 4.0;
    let process = lambda + (1.0 - lambda) / (d * d);
    (d * process + 1.0) / (d + 1.0)
}

/// Coincidence probability when the two photons of `state` meet on a 50/50
/// beam splitter, one in each input port, with mode overlap `v`.
///
/// Modes are `(a_H, a_V, b_H, b_V)` in and `(c_H, c_V, d_H, d_V)` out. The
/// indistinguishable part is evaluated from two-photon amplitudes; the
/// distinguishable part is the classical 1/2.
pub fn hom_projection(state: &PureState, overlap: f64) -> Result<f64> {
    if state.dim() != 4 {
        return input("beam-splitter projection needs a two-qubit state");
    }
    if !(0.0..=1.0).contains(&overlap) {
        return input(format!("overlap must lie in [0, 1], got {overlap}"));
    }
    let h = FRAC_1_SQRT_2;
    // Port a -> (c + d)/√2, port b -> (c - d)/√2, polarization preserved.
    let u = |out: usize, inp: usize| -> f64 {
        let (out_port, out_pol) = (out / 2, out % 2);
        let (in_port, in_pol) = (inp / 2, inp % 2);
        if out_pol != in_pol {
            0.0
        } else if in_port == 1 && out_port == 1 {
            -h
        } else {
            h
        }
    };
    let mut coincidence = 0.0;
    for pc in 0..2 {
        for pd in 0..2 {
            let (o1, o2) = (pc, 2 + pd);
            let mut amp = c(0.0, 0.0);
            for pa in 0..2 {
                for pb in 0..2 {
                    let (i, k) = (pa, 2 + pb);
                    amp += state.amp(2 * pa + pb) * (u(o1, i) * u(o2, k) + u(o1, k) * u(o2, i));
                }
            }
            coincidence += amp.norm_sqr();
        }
    }
    Ok(overlap * coincidence + (1.0 - overlap) * 0.5)
}

/// `Tr[Π_A |ψ><ψ|]`, the antisymmetric weight the beam splitter projects onto.
pub fn antisymmetric_weight(state: &PureState) -> f64 {
    let (_, pi_a) = sym_antisym_projectors();
    pi_a.expectation(state).re
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use PolarizationLabel::*;

    fn product(a: PolarizationLabel, b: PolarizationLabel) -> PureState {
        pol_state(a).kron(&pol_state(b))
    }

    #[test]
    fn network_is_unitary() {
        let net = build_cnot_network();
        assert!(net.unitarity_error() < 1e-12);
        assert_eq!(net.mode_count, 6);
    }

    #[test]
    fn single_photon_amplitudes() {
        let net = build_cnot_network();
        // c0 only meets the vacuum ancilla.
        assert_abs_diff_eq!(net.transfer.get(modes::C0, modes::C0).norm(), (1.0f64 / 3.0).sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(net.transfer.get(modes::A0, modes::C0).norm(), (2.0f64 / 3.0).sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(net.transfer.get(modes::T0, modes::C0).norm(), 0.0);
    }

    #[test]
    fn mode_roles_are_checked() {
        let u = Operator::identity(4);
        assert!(ModeNetwork::new(u.clone(), [0, 1], [1, 2], vec![]).is_err());
        assert!(ModeNetwork::new(u, [0, 1], [2, 7], vec![]).is_err());
    }

    #[test]
    fn non_unitary_network_is_rejected() {
        let net = ModeNetwork::new(Operator::identity(6).scale(0.9), [0, 1], [2, 3], vec![4, 5]).unwrap();
        assert!(matches!(conditional_gate(&net), Err(Error::Input(_))));
    }

    #[test]
    fn gate_on_computational_inputs() {
        let gate = conditional_gate(&build_cnot_network()).unwrap();
        assert_abs_diff_eq!(gate.success_amplitude_scale, 1.0 / 3.0, epsilon = 1e-12);
        assert!(gate.deviation_from(&cnot_matrix()) < 1e-10);
        // |HH> stays |HH> with amplitude magnitude 1/3.
        assert_abs_diff_eq!(gate.matrix.get(0, 0).norm(), 1.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(gate.matrix.get(1, 0).norm(), 0.0, epsilon = 1e-12);
        for k in 0..4 {
            assert_abs_diff_eq!(gate.success_probability(&PureState::basis(4, k)), 1.0 / 9.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn gate_ignores_ancilla_input_phases() {
        let net = build_cnot_network();
        let reference = conditional_gate(&net).unwrap();
        let mut u = net.transfer.matrix().clone();
        for (col, phase) in [(modes::A0, 0.7), (modes::A1, -2.1)] {
            let z = C64::from_polar(1.0, phase);
            for row in 0..6 {
                u[(row, col)] *= z;
            }
        }
        let shifted = ModeNetwork::new(Operator::from_matrix(u).unwrap(), net.control_modes, net.target_modes, net.ancilla_modes.clone()).unwrap();
        let gate = conditional_gate(&shifted).unwrap();
        assert!(gate.matrix.max_abs_diff(&reference.matrix) < 1e-15);
    }

    #[test]
    fn analyzer_map() {
        let map = bell_analyzer_map();
        let av = AnalyzerOutcome { control: ControlSetting::A, target: TargetSetting::V };
        let dh = AnalyzerOutcome { control: ControlSetting::D, target: TargetSetting::H };
        assert_eq!(map.to_bell(av), BellState::PsiMinus);
        assert_eq!(map.to_bell(dh), BellState::PhiPlus);
        let mut seen: Vec<BellState> = map.pairs().iter().map(|p| p.1).collect();
        seen.sort();
        seen.dedup();
        assert_eq!(seen.len(), 4);
        for b in BellState::ALL {
            assert_eq!(map.to_bell(map.to_analyzer(b)), b);
        }
    }

    #[test]
    fn depolarizing_limits() {
        let hh = product(H, H);
        let map = bell_analyzer_map();
        let ideal = measure_with_noise(&hh, NoiseParams::depolarizing(1.0).unwrap(), NoiseModel::StatisticsDepolarizing).unwrap();
        assert_abs_diff_eq!(ideal.prob_singlet(&map), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(ideal.0.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        for label in [(H, V), (D, D), (R, L)] {
            let flat = measure_with_noise(&product(label.0, label.1), NoiseParams::depolarizing(0.0).unwrap(), NoiseModel::StatisticsDepolarizing).unwrap();
            for p in flat.0 {
                assert_abs_diff_eq!(p, 0.25, epsilon = 1e-12);
            }
        }
        assert!(NoiseParams::new(1.2, 0.5).is_err());
        assert!(NoiseParams::depolarizing(-0.1).is_err());
    }

    #[test]
    fn classical_statistics_are_normalized() {
        let analyzer = BellAnalyzer::ideal();
        for label in [(H, H), (V, H), (D, A), (R, R)] {
            let p = analyzer.classical_distribution(&product(label.0, label.1));
            assert_abs_diff_eq!(p.0.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn payoff_is_half_plus_quarter_lambda() {
        let analyzer = BellAnalyzer::ideal();
        for lambda in [0.0, 0.25, 0.5, 0.88, 1.0] {
            let (payoff, parallel) =
                analyzer.discrete_payoff(NoiseParams::depolarizing(lambda).unwrap(), NoiseModel::StatisticsDepolarizing).unwrap();
            assert_abs_diff_eq!(payoff, 0.5 + lambda / 4.0, epsilon = 1e-12);
            assert_abs_diff_eq!(parallel, lambda + (1.0 - lambda) * 0.75, epsilon = 1e-12);
        }
    }

    #[test]
    fn fits() {
        let fitted = fit_noise(0.72, NoiseModel::StatisticsDepolarizing).unwrap();
        assert_abs_diff_eq!(fitted.depolarizing, 0.88, epsilon = 1e-9);
        let top = fit_noise(0.75, NoiseModel::StatisticsDepolarizing).unwrap();
        assert_abs_diff_eq!(top.depolarizing, 1.0, epsilon = 1e-9);
        assert!(matches!(fit_noise(0.9, NoiseModel::StatisticsDepolarizing), Err(Error::NoSolution(_))));
        assert!(matches!(fit_noise(0.3, NoiseModel::StatisticsDepolarizing), Err(Error::NoSolution(_))));

        let v = fit_noise(0.72, NoiseModel::FockDistinguishability).unwrap();
        let (payoff, _) = BellAnalyzer::ideal().discrete_payoff(v, NoiseModel::FockDistinguishability).unwrap();
        assert_abs_diff_eq!(payoff, 0.72, epsilon = 1e-10);
    }

    #[test]
    fn hom_examples() {
        assert_abs_diff_eq!(hom_projection(&product(H, H), 1.0).unwrap(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(hom_projection(&product(H, V), 1.0).unwrap(), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(hom_projection(&product(H, H), 0.0).unwrap(), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(hom_projection(&bell_state(BellState::PsiMinus), 1.0).unwrap(), 1.0, epsilon = 1e-12);
        assert!(hom_projection(&product(H, H), 1.5).is_err());
    }

    #[test]
    fn gate_fidelity_of_fitted_lambda() {
        assert_abs_diff_eq!(depolarizing_average_gate_fidelity(1.0), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(depolarizing_average_gate_fidelity(0.88), 0.91, epsilon = 1e-12);
    }

    #[test]
    fn network_json_shape() {
        let json = serde_json::to_value(build_cnot_network()).unwrap();
        assert_eq!(json["mode_count"], 6);
        assert_eq!(json["control_modes"], serde_json::json!([0, 1]));
        assert_eq!(json["target_modes"], serde_json::json!([2, 3]));
        assert_eq!(json["ancilla_modes"], serde_json::json!([4, 5]));
        assert_eq!(json["transfer"]["entries"].as_array().unwrap().len(), 36);
        let c0c0 = &json["transfer"]["entries"][0];
        assert_abs_diff_eq!(c0c0[0].as_f64().unwrap(), (1.0f64 / 3.0).sqrt(), epsilon = 1e-15);
    }
}
