//! Alice/Bob preparation ensembles and their average states.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::quantum::{c, sym_antisym_projectors, DensityOperator, Kron, Operator, PureState, CONSTRUCT_TOL};
use crate::rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PolarizationLabel {
    H,
    V,
    D,
    A,
    R,
    L,
}

impl PolarizationLabel {
    pub const ALL: [PolarizationLabel; 6] = [
        PolarizationLabel::H,
        PolarizationLabel::V,
        PolarizationLabel::D,
        PolarizationLabel::A,
        PolarizationLabel::R,
        PolarizationLabel::L,
    ];

    /// The antipodal point on the Poincaré sphere.
    pub fn orthogonal(self) -> Self {
        use PolarizationLabel::*;
        match self {
            H => V,
            V => H,
            D => A,
            A => D,
            R => L,
            L => R,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_char(self) -> char {
        match self {
            PolarizationLabel::H => 'H',
            PolarizationLabel::V => 'V',
            PolarizationLabel::D => 'D',
            PolarizationLabel::A => 'A',
            PolarizationLabel::R => 'R',
            PolarizationLabel::L => 'L',
        }
    }
}

impl fmt::Display for PolarizationLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

impl FromStr for PolarizationLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PolarizationLabel::ALL
            .into_iter()
            .find(|l| s.len() == 1 && s.starts_with(l.as_char()))
            .ok_or_else(|| Error::Input(format!("unknown polarization label '{s}'")))
    }
}

/// Correlation between Alice's and Bob's preparations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrelationFlag {
    Orthogonal = 0,
    Identical = 1,
}

impl CorrelationFlag {
    pub const BOTH: [CorrelationFlag; 2] = [CorrelationFlag::Orthogonal, CorrelationFlag::Identical];

    pub fn bit(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            CorrelationFlag::Orthogonal => "orthogonal",
            CorrelationFlag::Identical => "identical",
        }
    }
}

impl fmt::Display for CorrelationFlag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Polarization state of a labeled point on the Poincaré sphere.
pub fn pol_state(label: PolarizationLabel) -> PureState {
    let h = FRAC_1_SQRT_2;
    let (a, b) = match label {
        PolarizationLabel::H => (c(1.0, 0.0), c(0.0, 0.0)),
        PolarizationLabel::V => (c(0.0, 0.0), c(1.0, 0.0)),
        PolarizationLabel::D => (c(h, 0.0), c(h, 0.0)),
        PolarizationLabel::A => (c(h, 0.0), c(-h, 0.0)),
        PolarizationLabel::R => (c(h, 0.0), c(0.0, -h)),
        PolarizationLabel::L => (c(h, 0.0), c(0.0, h)),
    };
    PureState::new(vec![a, b]).expect("polarization states are normalized")
}

/// Stokes/Bloch vector `(<X>, <Y>, <Z>)`: x along D/A, y along L/R, z along H/V.
pub fn bloch_vector(psi: &PureState) -> [f64; 3] {
    assert_eq!(psi.dim(), 2, "Bloch vector needs a qubit state");
    let (a, b) = (psi.amp(0), psi.amp(1));
    let cross = a.conj() * b;
    [2.0 * cross.re, 2.0 * cross.im, a.norm_sqr() - b.norm_sqr()]
}

/// For `α|H> + β|V>` returns `-β*|H> + α*|V>`.
pub fn orthogonal_partner(psi: &PureState) -> PureState {
    let (a, b) = (psi.amp(0), psi.amp(1));
    PureState::new(vec![-b.conj(), a.conj()]).expect("partner of a normalized state is normalized")
}

/// A correlated product-state preparation.
#[derive(Clone, Debug, PartialEq)]
pub struct PreparationPair {
    alice: PureState,
    bob: PureState,
    j: CorrelationFlag,
    label: Option<(PolarizationLabel, PolarizationLabel)>,
}

impl PreparationPair {
    pub fn new(
        alice: PureState,
        bob: PureState,
        j: CorrelationFlag,
        label: Option<(PolarizationLabel, PolarizationLabel)>,
    ) -> Result<Self> {
        if alice.dim() != 2 || bob.dim() != 2 {
            return input("preparations are single-qubit states");
        }
        let overlap = alice.inner(&bob).norm();
        let want = match j {
            CorrelationFlag::Identical => 1.0,
            CorrelationFlag::Orthogonal => 0.0,
        };
        if (overlap - want).abs() > CONSTRUCT_TOL {
            return input(format!("{j} preparation has |<alice|bob>| = {overlap}"));
        }
        Ok(Self { alice, bob, j, label })
    }

    fn labeled(a: PolarizationLabel, b: PolarizationLabel, j: CorrelationFlag) -> Self {
        Self::new(pol_state(a), pol_state(b), j, Some((a, b))).expect("labeled pairs satisfy their correlation")
    }

    pub fn from_alice(alice: PureState, j: CorrelationFlag) -> Self {
        let bob = match j {
            CorrelationFlag::Identical => alice.clone(),
            CorrelationFlag::Orthogonal => orthogonal_partner(&alice),
        };
        Self { alice, bob, j, label: None }
    }

    pub fn alice(&self) -> &PureState {
        &self.alice
    }

    pub fn bob(&self) -> &PureState {
        &self.bob
    }

    pub fn correlation(&self) -> CorrelationFlag {
        self.j
    }

    pub fn label(&self) -> Option<(PolarizationLabel, PolarizationLabel)> {
        self.label
    }

    pub fn label_string(&self) -> Option<String> {
        self.label.map(|(a, b)| format!("{a}{b}"))
    }

    /// `|alice> ⊗ |bob>`
    pub fn product_state(&self) -> PureState {
        self.alice.kron(&self.bob)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnsembleKind {
    /// The six labeled parallel pairs and six labeled orthogonal pairs.
    Discrete6,
    /// Haar-uniform Alice state.
    UniformSphere,
    /// Linear polarizations from H through D to V, uniform in rotation angle.
    Arc,
}

impl EnsembleKind {
    pub fn name(self) -> &'static str {
        match self {
            EnsembleKind::Discrete6 => "discrete6",
            EnsembleKind::UniformSphere => "uniform_sphere",
            EnsembleKind::Arc => "arc",
        }
    }

    pub fn is_discrete(self) -> bool {
        self == EnsembleKind::Discrete6
    }
}

impl fmt::Display for EnsembleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EnsembleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "discrete6" => Ok(EnsembleKind::Discrete6),
            "uniform_sphere" | "uniform" => Ok(EnsembleKind::UniformSphere),
            "arc" => Ok(EnsembleKind::Arc),
            _ => input(format!("unknown ensemble '{s}' (expected discrete6, uniform_sphere, arc)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub kind: EnsembleKind,
    /// Monte Carlo sample count hint for continuous kinds.
    pub sample_count: usize,
}

impl EnsembleSpec {
    pub const DEFAULT_SAMPLES: usize = 100_000;

    pub fn new(kind: EnsembleKind) -> Self {
        Self { kind, sample_count: Self::DEFAULT_SAMPLES }
    }

    pub fn discrete6() -> Self {
        Self::new(EnsembleKind::Discrete6)
    }

    pub fn uniform_sphere() -> Self {
        Self::new(EnsembleKind::UniformSphere)
    }

    pub fn arc() -> Self {
        Self::new(EnsembleKind::Arc)
    }
}

/// The six labeled pairs for correlation `j`, in the order HH, VV, DD, AA,
/// RR, LL (identical) or HV, VH, DA, AD, RL, LR (orthogonal).
pub fn discrete_ensemble(j: CorrelationFlag) -> Vec<PreparationPair> {
    PolarizationLabel::ALL
        .into_iter()
        .map(|a| {
            let b = match j {
                CorrelationFlag::Identical => a,
                CorrelationFlag::Orthogonal => a.orthogonal(),
            };
            PreparationPair::labeled(a, b, j)
        })
        .collect()
}

/// Haar-random qubit state from two complex Gaussians.
pub fn haar_qubit<R: Rng + ?Sized>(rng: &mut R) -> PureState {
    loop {
        let z: [f64; 4] = std::array::from_fn(|_| rng.sample(StandardNormal));
        if let Ok(psi) = PureState::normalized(vec![c(z[0], z[1]), c(z[2], z[3])]) {
            return psi;
        }
    }
}

pub fn sample_pair<R: Rng + ?Sized>(spec: &EnsembleSpec, j: CorrelationFlag, rng: &mut R) -> PreparationPair {
    match spec.kind {
        EnsembleKind::Discrete6 => {
            let a = PolarizationLabel::ALL[rng.random_range(0..6)];
            let b = match j {
                CorrelationFlag::Identical => a,
                CorrelationFlag::Orthogonal => a.orthogonal(),
            };
            PreparationPair::labeled(a, b, j)
        }
        EnsembleKind::UniformSphere => PreparationPair::from_alice(haar_qubit(rng), j),
        EnsembleKind::Arc => {
            let theta = rng.random::<f64>() * FRAC_PI_2;
            let alice = PureState::new(vec![c(theta.cos(), 0.0), c(theta.sin(), 0.0)])
                .expect("real unit vector");
            PreparationPair::from_alice(alice, j)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AverageMode {
    Analytic,
    MonteCarlo { samples: usize, seed: u64 },
}

/// Ensemble-average two-qubit state for correlation `j`.
pub fn average_state(spec: &EnsembleSpec, j: CorrelationFlag, mode: AverageMode) -> Result<DensityOperator> {
    match mode {
        AverageMode::Analytic => Ok(analytic_average(spec.kind, j)),
        AverageMode::MonteCarlo { samples, seed } => {
            let mut rng = rng::stream(seed, 0);
            monte_carlo_average(spec, j, samples, &mut rng)
        }
    }
}

pub fn monte_carlo_average<R: Rng + ?Sized>(
    spec: &EnsembleSpec,
    j: CorrelationFlag,
    samples: usize,
    rng: &mut R,
) -> Result<DensityOperator> {
    if samples == 0 {
        return input("Monte Carlo average needs at least one sample");
    }
    let mut acc = Operator::zeros(4);
    for _ in 0..samples {
        acc = &acc + &sample_pair(spec, j, rng).product_state().density();
    }
    DensityOperator::new(acc.scale(1.0 / samples as f64))
}

fn analytic_average(kind: EnsembleKind, j: CorrelationFlag) -> DensityOperator {
    let op = match kind {
        EnsembleKind::Discrete6 => {
            let pairs = discrete_ensemble(j);
            let sum = pairs
                .iter()
                .map(|p| p.product_state().density())
                .fold(Operator::zeros(4), |acc, d| &acc + &d);
            sum.scale(1.0 / pairs.len() as f64)
        }
        EnsembleKind::UniformSphere => {
            // Haar average of |ψψ><ψψ| is Π_S/3; of |ψ><ψ|⊗I it is I/2.
            let (pi_s, _) = sym_antisym_projectors();
            let sym = pi_s.scale(1.0 / 3.0);
            match j {
                CorrelationFlag::Identical => sym,
                CorrelationFlag::Orthogonal => &Operator::identity(4).scale(0.5) - &sym,
            }
        }
        EnsembleKind::Arc => arc_average(j),
    };
    DensityOperator::new(op).expect("ensemble averages are density operators")
}

/// Mean of `cos^a θ sin^b θ` for `θ` uniform on `[0, π/2]`, `a + b = 4`.
fn arc_moment(cos_pow: u32, sin_pow: u32) -> f64 {
    match (cos_pow, sin_pow) {
        (4, 0) | (0, 4) => 3.0 / 8.0,
        (2, 2) => 1.0 / 8.0,
        (3, 1) | (1, 3) => 1.0 / (2.0 * PI),
        _ => unreachable!("arc amplitudes are quadratic monomials"),
    }
}

fn arc_average(j: CorrelationFlag) -> Operator {
    // Two-qubit amplitudes as sign·cos^p·sin^q of the rotation angle.
    let amps: [(f64, u32, u32); 4] = match j {
        CorrelationFlag::Identical => [(1.0, 2, 0), (1.0, 1, 1), (1.0, 1, 1), (1.0, 0, 2)],
        CorrelationFlag::Orthogonal => [(-1.0, 1, 1), (1.0, 2, 0), (-1.0, 0, 2), (1.0, 1, 1)],
    };
    let mut entries = [0.0; 16];
    for (i, &(si, ci, ti)) in amps.iter().enumerate() {
        for (k, &(sk, ck, tk)) in amps.iter().enumerate() {
            entries[4 * i + k] = si * sk * arc_moment(ci + ck, ti + tk);
        }
    }
    Operator::from_real_rows(4, &entries).expect("4x4")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::Kron;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn pol_states() {
        let d = pol_state(PolarizationLabel::D);
        assert_abs_diff_eq!(d.amp(0).re, FRAC_1_SQRT_2);
        assert_abs_diff_eq!(d.amp(1).re, FRAC_1_SQRT_2);
        let r = pol_state(PolarizationLabel::R);
        let l = pol_state(PolarizationLabel::L);
        assert_abs_diff_eq!(r.inner(&l).norm(), 0.0, epsilon = 1e-15);
        let b = bloch_vector(&r);
        assert_abs_diff_eq!(b[0], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(b[1], -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(b[2], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(bloch_vector(&pol_state(PolarizationLabel::D))[0], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn label_roundtrip() {
        for l in PolarizationLabel::ALL {
            assert_eq!(l.to_string().parse::<PolarizationLabel>().unwrap(), l);
            assert_eq!(l.orthogonal().orthogonal(), l);
        }
        assert!("X".parse::<PolarizationLabel>().is_err());
    }

    #[test]
    fn discrete_sets() {
        let names = |j| discrete_ensemble(j).iter().map(|p| p.label_string().unwrap()).collect::<Vec<_>>();
        assert_eq!(names(CorrelationFlag::Identical), ["HH", "VV", "DD", "AA", "RR", "LL"]);
        assert_eq!(names(CorrelationFlag::Orthogonal), ["HV", "VH", "DA", "AD", "RL", "LR"]);
        for j in CorrelationFlag::BOTH {
            for p in discrete_ensemble(j) {
                assert!(PreparationPair::new(p.alice().clone(), p.bob().clone(), j, p.label()).is_ok());
            }
        }
    }

    #[test]
    fn pair_invariant_is_enforced() {
        let h = pol_state(PolarizationLabel::H);
        let d = pol_state(PolarizationLabel::D);
        assert!(PreparationPair::new(h.clone(), d.clone(), CorrelationFlag::Identical, None).is_err());
        assert!(PreparationPair::new(h, d, CorrelationFlag::Orthogonal, None).is_err());
    }

    #[test]
    fn partner_convention() {
        let d = pol_state(PolarizationLabel::D);
        assert!(orthogonal_partner(&d).same_ray(&pol_state(PolarizationLabel::A)));
        let r = pol_state(PolarizationLabel::R);
        assert!(orthogonal_partner(&r).same_ray(&pol_state(PolarizationLabel::L)));
    }

    #[test]
    fn discrete_averages_match_werner_forms() {
        let (pi_s, pi_a) = sym_antisym_projectors();
        let par = average_state(&EnsembleSpec::discrete6(), CorrelationFlag::Identical, AverageMode::Analytic).unwrap();
        assert!(par.operator().max_abs_diff(&pi_s.scale(1.0 / 3.0)) < 1e-12);
        let perp = average_state(&EnsembleSpec::discrete6(), CorrelationFlag::Orthogonal, AverageMode::Analytic).unwrap();
        let want = &pi_a.scale(0.5) + &pi_s.scale(1.0 / 6.0);
        assert!(perp.operator().max_abs_diff(&want) < 1e-12);
    }

    #[test]
    fn uniform_sphere_monte_carlo_matches_discrete() {
        for j in CorrelationFlag::BOTH {
            let exact = average_state(&EnsembleSpec::discrete6(), j, AverageMode::Analytic).unwrap();
            let mc = average_state(
                &EnsembleSpec::uniform_sphere(),
                j,
                AverageMode::MonteCarlo { samples: 100_000, seed: 11 },
            )
            .unwrap();
            assert!(mc.operator().max_abs_diff(exact.operator()) < 0.01);
            let analytic = average_state(&EnsembleSpec::uniform_sphere(), j, AverageMode::Analytic).unwrap();
            assert!(analytic.operator().max_abs_diff(exact.operator()) < 1e-12);
        }
    }

    /// Composite Simpson rule over θ ∈ [0, π/2] of the product-state density.
    fn arc_quadrature(j: CorrelationFlag) -> Operator {
        let n = 2000;
        let h = FRAC_PI_2 / n as f64;
        let mut acc = Operator::zeros(4);
        for k in 0..=n {
            let theta = k as f64 * h;
            let w = if k == 0 || k == n { 1.0 } else if k % 2 == 1 { 4.0 } else { 2.0 };
            let alice = PureState::new(vec![c(theta.cos(), 0.0), c(theta.sin(), 0.0)]).unwrap();
            let rho = PreparationPair::from_alice(alice, j).product_state().density();
            acc = &acc + &rho.scale(w);
        }
        acc.scale(h / 3.0 / FRAC_PI_2)
    }

    #[test]
    fn arc_analytic_matches_quadrature() {
        for j in CorrelationFlag::BOTH {
            let analytic = average_state(&EnsembleSpec::arc(), j, AverageMode::Analytic).unwrap();
            assert!(analytic.operator().max_abs_diff(&arc_quadrature(j)) < 1e-12);
        }
    }

    #[test]
    fn average_rejects_zero_samples() {
        let r = average_state(&EnsembleSpec::arc(), CorrelationFlag::Identical, AverageMode::MonteCarlo { samples: 0, seed: 1 });
        assert!(matches!(r, Err(Error::Input(_))));
    }

    #[test]
    fn sampling_moments() {
        let mut rng = rng::stream(2024, 0);
        let n = 100_000;
        let spec = EnsembleSpec::uniform_sphere();
        let reference = pol_state(PolarizationLabel::D);
        let mean = (0..n)
            .map(|_| reference.inner(sample_pair(&spec, CorrelationFlag::Identical, &mut rng).alice()).norm_sqr())
            .sum::<f64>()
            / n as f64;
        // p is uniform on [0, 1] so sd = 1/sqrt(12)
        let sigma = (1.0 / 12.0f64).sqrt() / (n as f64).sqrt();
        assert!((mean - 0.5).abs() < 3.0 * sigma, "mean {mean}");

        let spec = EnsembleSpec::arc();
        let zs: Vec<f64> =
            (0..n).map(|_| bloch_vector(sample_pair(&spec, CorrelationFlag::Identical, &mut rng).alice())[2]).collect();
        let mean = zs.iter().sum::<f64>() / n as f64;
        // <cos²2θ> = 1/2
        let sigma = (0.5f64).sqrt() / (n as f64).sqrt();
        assert!(mean.abs() < 3.0 * sigma, "mean {mean}");
    }

    #[test]
    fn discrete_sampling_is_uniform() {
        let mut rng = rng::stream(1, 0);
        let n = 60_000;
        let mut counts = [0usize; 6];
        for _ in 0..n {
            let p = sample_pair(&EnsembleSpec::discrete6(), CorrelationFlag::Orthogonal, &mut rng);
            counts[p.label().unwrap().0.index()] += 1;
        }
        let p = 1.0 / 6.0;
        let sigma = (p * (1.0 - p) / n as f64).sqrt();
        for k in counts {
            assert!((k as f64 / n as f64 - p).abs() < 3.0 * sigma, "{counts:?}");
        }
    }

    proptest! {
        #[test]
        fn sampled_pairs_are_product_states(seed in any::<u64>(), kind in 0usize..3, ident in any::<bool>()) {
            let kind = [EnsembleKind::Discrete6, EnsembleKind::UniformSphere, EnsembleKind::Arc][kind];
            let j = if ident { CorrelationFlag::Identical } else { CorrelationFlag::Orthogonal };
            let mut rng = rng::stream(seed, 0);
            let pair = sample_pair(&EnsembleSpec::new(kind), j, &mut rng);
            prop_assert!(PreparationPair::new(pair.alice().clone(), pair.bob().clone(), j, pair.label()).is_ok());
            let pt = pair.product_state().density().partial_transpose().unwrap();
            prop_assert!(pt.min_eigenvalue() >= -1e-10);
            let product = pair.alice().kron(pair.bob());
            prop_assert!(product.same_ray(&pair.product_state()));
        }

        #[test]
        fn arc_states_are_linear(seed in any::<u64>()) {
            let mut rng = rng::stream(seed, 0);
            let pair = sample_pair(&EnsembleSpec::arc(), CorrelationFlag::Identical, &mut rng);
            let (a0, a1) = (pair.alice().amp(0), pair.alice().amp(1));
            prop_assert!((a0 * a1.conj()).im.abs() < 1e-15);
            prop_assert!(bloch_vector(pair.alice())[1].abs() < 1e-15);
        }

        #[test]
        fn monte_carlo_averages_are_density_operators(seed in any::<u64>(), kind in 0usize..3, n in 1usize..200) {
            let kind = [EnsembleKind::Discrete6, EnsembleKind::UniformSphere, EnsembleKind::Arc][kind];
            for j in CorrelationFlag::BOTH {
                let mode = AverageMode::MonteCarlo { samples: n, seed };
                prop_assert!(average_state(&EnsembleSpec::new(kind), j, mode).is_ok());
            }
        }
    }
}
