//! Charlie's measurement strategies and the map from outcomes to guesses.

use std::f64::consts::PI;
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::ensembles::{average_state, orthogonal_partner, AverageMode, CorrelationFlag, EnsembleSpec};
use crate::error::{input, Result};
use crate::quantum::{
    bell_state, c, expected_payoff, sym_antisym_projectors, validate_povm, BellState, DensityOperator, Kron,
    Operator, Priors, PureState, TwoOutcomePovm, C64, CONSTRUCT_TOL,
};

pub type BellOutcome = BellState;
pub type CorrelationEstimate = CorrelationFlag;

/// Which local outcome pairs are read as "identical".
///
/// Bit `2*a + b` is set when outcome pair `(a, b)` maps to "identical", where
/// `0` means the photon was found along its axis and `1` along the orthogonal
/// direction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct DecisionRule(u8);

impl DecisionRule {
    /// "identical" iff both photons give the same outcome.
    pub const AGREE: DecisionRule = DecisionRule(0b1001);
    pub const DISAGREE: DecisionRule = DecisionRule(0b0110);

    pub fn new(id: u8) -> Result<Self> {
        if id >= 16 {
            return input(format!("decision rule id must be below 16, got {id}"));
        }
        Ok(Self(id))
    }

    pub fn all() -> impl Iterator<Item = DecisionRule> {
        (0..16).map(DecisionRule)
    }

    pub fn id(self) -> u8 {
        self.0
    }

    pub fn estimate(self, alice_bit: u8, bob_bit: u8) -> CorrelationEstimate {
        if self.0 >> (2 * alice_bit + bob_bit) & 1 == 1 {
            CorrelationFlag::Identical
        } else {
            CorrelationFlag::Orthogonal
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum StrategyKind {
    JointBell,
    LocalSameAxis { axis: PureState },
    LocalProduct { axis_a: PureState, axis_b: PureState, rule: DecisionRule },
    Helstrom,
}

impl StrategyKind {
    pub fn name(&self) -> &'static str {
        match self {
            StrategyKind::JointBell => "joint_bell",
            StrategyKind::LocalSameAxis { .. } => "local_same_axis",
            StrategyKind::LocalProduct { .. } => "local_product",
            StrategyKind::Helstrom => "helstrom",
        }
    }
}

/// A strategy together with the two-outcome POVM it realizes.
#[derive(Clone, Debug, PartialEq)]
pub struct Strategy {
    kind: StrategyKind,
    povm: TwoOutcomePovm,
}

impl Strategy {
    pub fn kind(&self) -> &StrategyKind {
        &self.kind
    }

    pub fn povm(&self) -> &TwoOutcomePovm {
        &self.povm
    }

    pub fn is_local(&self) -> bool {
        matches!(self.kind, StrategyKind::LocalSameAxis { .. } | StrategyKind::LocalProduct { .. })
    }

    pub fn payoff(&self, rho0: &DensityOperator, rho1: &DensityOperator, priors: Priors) -> Result<f64> {
        expected_payoff(&self.povm, rho0, rho1, priors)
    }

    /// Probability of answering "identical" on a pure two-qubit input.
    pub fn prob_identical(&self, psi: &PureState) -> f64 {
        self.povm.e1.expectation(psi).re
    }
}

/// `{E0, E1} = {Π_A, Π_S}`: singlet means "orthogonal", any triplet "identical".
pub fn joint_bell_strategy() -> Strategy {
    let (pi_s, pi_a) = sym_antisym_projectors();
    Strategy { kind: StrategyKind::JointBell, povm: TwoOutcomePovm::new(pi_a, pi_s) }
}

/// Four-outcome Bell projectors behind the joint strategy.
pub fn bell_refinement() -> [(BellOutcome, Operator); 4] {
    BellState::ALL.map(|b| (b, Operator::projector(&bell_state(b))))
}

pub fn outcome_to_estimate(o: BellOutcome) -> CorrelationEstimate {
    if o.is_singlet() {
        CorrelationFlag::Orthogonal
    } else {
        CorrelationFlag::Identical
    }
}

/// Rank-one projectors `[|a><a|, |a⊥><a⊥|]` for a normalized qubit axis.
pub fn axis_projectors(axis: &PureState) -> Result<[Operator; 2]> {
    if axis.dim() != 2 {
        return input(format!("measurement axis must be a qubit state, got dim {}", axis.dim()));
    }
    if (axis.inner(axis).re - 1.0).abs() > CONSTRUCT_TOL {
        return input("measurement axis must be normalized");
    }
    Ok([Operator::projector(axis), Operator::projector(&orthogonal_partner(axis))])
}

fn local_povm(axis_a: &PureState, axis_b: &PureState, rule: DecisionRule) -> Result<TwoOutcomePovm> {
    let pa = axis_projectors(axis_a)?;
    let pb = axis_projectors(axis_b)?;
    let mut e0 = Operator::zeros(4);
    let mut e1 = Operator::zeros(4);
    for a in 0..2u8 {
        for b in 0..2u8 {
            let term = pa[a as usize].kron(&pb[b as usize]);
            match rule.estimate(a, b) {
                CorrelationFlag::Identical => e1 = &e1 + &term,
                CorrelationFlag::Orthogonal => e0 = &e0 + &term,
            }
        }
    }
    Ok(TwoOutcomePovm::new(e0, e1))
}

/// Both photons measured along `axis`; "identical" iff the outcomes agree.
pub fn local_same_axis_strategy(axis: &PureState) -> Result<Strategy> {
    let povm = local_povm(axis, axis, DecisionRule::AGREE)?;
    Ok(Strategy { kind: StrategyKind::LocalSameAxis { axis: axis.clone() }, povm })
}

pub fn local_product_strategy(axis_a: &PureState, axis_b: &PureState, rule: DecisionRule) -> Result<Strategy> {
    let povm = local_povm(axis_a, axis_b, rule)?;
    Ok(Strategy {
        kind: StrategyKind::LocalProduct { axis_a: axis_a.clone(), axis_b: axis_b.clone(), rule },
        povm,
    })
}

/// Minimum-error measurement for `(ρ0, ρ1)`: `E1` projects onto the
/// nonnegative eigenspace of `π1 ρ1 - π0 ρ0`. Eigenvalues within 1e-12 of zero
/// go to `E1`.
pub fn helstrom_strategy(rho0: &DensityOperator, rho1: &DensityOperator, priors: Priors) -> Result<(Strategy, f64)> {
    let priors = Priors::new(priors.orthogonal, priors.identical)?;
    let gamma = &rho1.operator().scale(priors.identical) - &rho0.operator().scale(priors.orthogonal);
    let mut e1 = Operator::zeros(4);
    for (val, vec) in gamma.hermitian_eigen() {
        if val > -CONSTRUCT_TOL {
            e1 = &e1 + &Operator::projector(&vec);
        }
    }
    let payoff = priors.orthogonal + e1.trace_product(&gamma).re;
    let strategy = Strategy { kind: StrategyKind::Helstrom, povm: TwoOutcomePovm::from_identical_element(e1) };
    debug_assert!(validate_povm(strategy.povm()).valid);
    Ok((strategy, payoff))
}

/// Bloch-chart axis `(cos θ/2, e^{iφ} sin θ/2)`.
pub fn bloch_axis(theta: f64, phi: f64) -> PureState {
    let (s, co) = (theta / 2.0).sin_cos();
    PureState::new(vec![c(co, 0.0), C64::from_polar(s, phi)]).expect("Bloch chart points are normalized")
}

/// One row of the grid-search log: the best rule for one pair of axes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SearchRow {
    pub theta_a: f64,
    pub phi_a: f64,
    pub theta_b: f64,
    pub phi_b: f64,
    pub rule_id: u8,
    pub payoff: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SearchLog {
    pub rows: Vec<SearchRow>,
}

impl SearchLog {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
        for row in &self.rows {
            out.serialize(row)?;
        }
        out.flush()?;
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct GridSearchResult {
    pub best: Strategy,
    pub best_row: SearchRow,
    pub payoff: f64,
    pub log: SearchLog,
}

type Vec4 = [C64; 4];
type Mat4 = [[C64; 4]; 4];

fn to_array(rho: &DensityOperator) -> Mat4 {
    std::array::from_fn(|i| std::array::from_fn(|k| rho.operator().get(i, k)))
}

fn quad_form(m: &Mat4, v: &Vec4) -> f64 {
    let mut acc = c(0.0, 0.0);
    for i in 0..4 {
        let mut row = c(0.0, 0.0);
        for k in 0..4 {
            row += m[i][k] * v[k];
        }
        acc += v[i].conj() * row;
    }
    acc.re
}

struct GridAxis {
    theta: f64,
    phi: f64,
    basis: [[C64; 2]; 2],
}

fn grid_axes(resolution: usize) -> Vec<GridAxis> {
    let mut axes = Vec::with_capacity(resolution * resolution);
    for ti in 0..resolution {
        let theta = PI * ti as f64 / (resolution - 1) as f64;
        for pk in 0..resolution {
            let phi = 2.0 * PI * pk as f64 / resolution as f64;
            let a = bloch_axis(theta, phi);
            let perp = orthogonal_partner(&a);
            axes.push(GridAxis {
                theta,
                phi,
                basis: [[a.amp(0), a.amp(1)], [perp.amp(0), perp.amp(1)]],
            });
        }
    }
    axes
}

/// Exhaustive search over product projective measurements with every
/// deterministic post-processing rule, on a `(θ, φ)` grid for each photon.
///
/// Payoffs use the ensemble's analytic average states and equal priors. Ties
/// go to the smallest `(axis_a, axis_b, rule)` grid index.
pub fn local_grid_search(spec: &EnsembleSpec, resolution: usize) -> Result<GridSearchResult> {
    if resolution < 2 {
        return input(format!("grid resolution must be at least 2, got {resolution}"));
    }
    let rho0 = average_state(spec, CorrelationFlag::Orthogonal, AverageMode::Analytic)?;
    let rho1 = average_state(spec, CorrelationFlag::Identical, AverageMode::Analytic)?;
    let (m0, m1) = (to_array(&rho0), to_array(&rho1));
    let axes = grid_axes(resolution);

    let per_a: Vec<(Vec<SearchRow>, (f64, usize))> = (0..axes.len())
        .into_par_iter()
        .map(|ia| {
            let a = &axes[ia];
            let mut rows = Vec::with_capacity(axes.len());
            let mut best = (f64::NEG_INFINITY, usize::MAX);
            for (ib, b) in axes.iter().enumerate() {
                let mut p0 = [0.0; 4];
                let mut p1 = [0.0; 4];
                for oa in 0..2 {
                    for ob in 0..2 {
                        let u = &a.basis[oa];
                        let w = &b.basis[ob];
                        let v = [u[0] * w[0], u[0] * w[1], u[1] * w[0], u[1] * w[1]];
                        p0[2 * oa + ob] = quad_form(&m0, &v);
                        p1[2 * oa + ob] = quad_form(&m1, &v);
                    }
                }
                let mut cell_best = (f64::NEG_INFINITY, 0u8);
                for rule in DecisionRule::all() {
                    let mut payoff = 0.0;
                    for k in 0..4 {
                        payoff += if rule.id() >> k & 1 == 1 { 0.5 * p1[k] } else { 0.5 * p0[k] };
                    }
                    if payoff > cell_best.0 {
                        cell_best = (payoff, rule.id());
                    }
                }
                let index = (ia * axes.len() + ib) * 16 + cell_best.1 as usize;
                if cell_best.0 > best.0 {
                    best = (cell_best.0, index);
                }
                rows.push(SearchRow {
                    theta_a: a.theta,
                    phi_a: a.phi,
                    theta_b: b.theta,
                    phi_b: b.phi,
                    rule_id: cell_best.1,
                    payoff: cell_best.0,
                });
            }
            (rows, best)
        })
        .collect();

    let mut log = SearchLog { rows: Vec::with_capacity(axes.len() * axes.len()) };
    let mut best = (f64::NEG_INFINITY, usize::MAX);
    for (rows, cand) in per_a {
        log.rows.extend(rows);
        if cand.0 > best.0 || (cand.0 == best.0 && cand.1 < best.1) {
            best = cand;
        }
    }
    let rule_id = (best.1 % 16) as u8;
    let cell = best.1 / 16;
    let (ia, ib) = (cell / axes.len(), cell % axes.len());
    let axis_a = bloch_axis(axes[ia].theta, axes[ia].phi);
    let axis_b = bloch_axis(axes[ib].theta, axes[ib].phi);
    let strategy = local_product_strategy(&axis_a, &axis_b, DecisionRule::new(rule_id)?)?;
    let payoff = strategy.payoff(&rho0, &rho1, Priors::EQUAL)?;
    Ok(GridSearchResult { best: strategy, best_row: log.rows[cell], payoff, log })
}
