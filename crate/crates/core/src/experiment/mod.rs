//! Monte Carlo trial engine.
//!
//! Shots are split into fixed-size chunks; chunk `k` draws from random stream
//! `k` of the master seed, so output depends only on the configuration and
//! never on how many workers ran it.

mod info;
mod report;

pub use info::{mutual_info, Conditioning, MiVariable, MutualInfoOptions, MutualInfoReport};
pub use report::{
    fig3_rows, payoff_report, theory_report, write_fig3_csv, ClassStat, Fig3Row, PayoffReport, StateStat,
};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensembles::{
    discrete_ensemble, sample_pair, CorrelationFlag, EnsembleSpec, PolarizationLabel, PreparationPair,
};
use crate::error::{input, Error, Result};
use crate::optics::{BellAnalyzer, NoiseModel, NoiseParams, OutcomeDistribution};
use crate::quantum::{Kron, Operator, PureState};
use crate::rng;
use crate::strategies::{bloch_axis, local_same_axis_strategy, outcome_to_estimate, BellOutcome, DecisionRule, Strategy};

/// Shots per independently seeded chunk.
pub const CHUNK_SHOTS: u64 = 4096;

/// Which measurement Charlie performs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StrategySpec {
    /// Bell measurement through the CNOT analyzer.
    Joint,
    /// Both photons measured along the Bloch-chart axis `(θ, φ)`.
    LocalSameAxis { theta: f64, phi: f64 },
}

impl StrategySpec {
    /// Same-axis local measurement along a labeled polarization.
    pub fn local(label: PolarizationLabel) -> Self {
        let [x, y, z] = crate::ensembles::bloch_vector(&crate::ensembles::pol_state(label));
        StrategySpec::LocalSameAxis { theta: z.clamp(-1.0, 1.0).acos(), phi: y.atan2(x) }
    }

    pub fn axis(&self) -> Option<PureState> {
        match *self {
            StrategySpec::Joint => None,
            StrategySpec::LocalSameAxis { theta, phi } => Some(bloch_axis(theta, phi)),
        }
    }

    pub fn build(&self) -> Result<Option<Strategy>> {
        self.axis().map(|a| local_same_axis_strategy(&a)).transpose()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NoiseSpec {
    pub model: NoiseModel,
    pub params: NoiseParams,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub ensemble: EnsembleSpec,
    pub strategy: StrategySpec,
    pub noise: Option<NoiseSpec>,
    pub shots: u64,
    pub master_seed: u64,
}

impl RunConfig {
    pub fn new(ensemble: EnsembleSpec, strategy: StrategySpec, shots: u64, master_seed: u64) -> Self {
        Self { ensemble, strategy, noise: None, shots, master_seed }
    }

    pub fn with_noise(mut self, model: NoiseModel, params: NoiseParams) -> Self {
        self.noise = Some(NoiseSpec { model, params });
        self
    }
}

/// What the detectors reported for one shot.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RawOutcome {
    Bell { outcome: BellOutcome },
    /// `0` along the axis, `1` along its orthogonal complement.
    Local { alice: u8, bob: u8 },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialRecord {
    pub pair_label: Option<(PolarizationLabel, PolarizationLabel)>,
    pub j: CorrelationFlag,
    pub raw_outcome: RawOutcome,
    pub estimate: CorrelationFlag,
    pub correct: bool,
}

impl TrialRecord {
    pub fn new(
        pair_label: Option<(PolarizationLabel, PolarizationLabel)>,
        j: CorrelationFlag,
        raw_outcome: RawOutcome,
        estimate: CorrelationFlag,
    ) -> Self {
        Self { pair_label, j, raw_outcome, estimate, correct: estimate == j }
    }

    pub fn bell_outcome(&self) -> Option<BellOutcome> {
        match self.raw_outcome {
            RawOutcome::Bell { outcome } => Some(outcome),
            RawOutcome::Local { .. } => None,
        }
    }
}

/// The measurement apparatus for a run.
enum Device {
    Joint { analyzer: BellAnalyzer, noise: NoiseParams, model: NoiseModel },
    Local { basis: [PureState; 4] },
}

impl Device {
    fn new(strategy: &StrategySpec, noise: Option<NoiseSpec>) -> Result<Self> {
        match (strategy.axis(), noise) {
            (None, noise) => {
                let (model, noise) = match noise {
                    Some(n) => (n.model, NoiseParams::new(n.params.overlap, n.params.depolarizing)?),
                    None => (NoiseModel::StatisticsDepolarizing, NoiseParams::ideal()),
                };
                Ok(Device::Joint { analyzer: BellAnalyzer::ideal(), noise, model })
            }
            (Some(axis), None) => {
                let perp = crate::ensembles::orthogonal_partner(&axis);
                let one = [axis, perp];
                Ok(Device::Local { basis: std::array::from_fn(|k| one[k / 2].kron(&one[k % 2])) })
            }
            (Some(_), Some(_)) => input("noise models apply to the joint analyzer only, not to local strategies"),
        }
    }

    fn distribution(&self, pair: &PreparationPair) -> Result<[f64; 4]> {
        let psi = pair.product_state();
        match self {
            Device::Joint { analyzer, noise, model } => Ok(analyzer.distribution(&psi, *noise, *model)?.0),
            Device::Local { basis } => Ok(basis.each_ref().map(|b| b.inner(&psi).norm_sqr())),
        }
    }

    /// Linear statistics for a mixed input; `None` when the noise model is
    /// not linear in the state.
    fn distribution_mixed(&self, rho: &Operator) -> Option<[f64; 4]> {
        match self {
            Device::Joint { analyzer, noise, model } => match model {
                NoiseModel::StatisticsDepolarizing => Some(
                    analyzer.ideal_distribution_mixed(rho).mix(&OutcomeDistribution::uniform(), noise.depolarizing).0,
                ),
                NoiseModel::FockDistinguishability if noise.overlap == 1.0 => {
                    Some(analyzer.ideal_distribution_mixed(rho).0)
                }
                NoiseModel::FockDistinguishability => None,
            },
            Device::Local { basis } => {
                Some(basis.each_ref().map(|b| b.amplitudes().dotc(&(rho.matrix() * b.amplitudes())).re))
            }
        }
    }

    fn outcome(&self, k: usize) -> (RawOutcome, CorrelationFlag) {
        match self {
            Device::Joint { analyzer, .. } => {
                let bell = analyzer.map().to_bell(crate::optics::AnalyzerOutcome::ALL[k]);
                (RawOutcome::Bell { outcome: bell }, outcome_to_estimate(bell))
            }
            Device::Local { .. } => {
                let (alice, bob) = ((k / 2) as u8, (k % 2) as u8);
                (RawOutcome::Local { alice, bob }, DecisionRule::AGREE.estimate(alice, bob))
            }
        }
    }
}

fn sample_index<R: Rng + ?Sized>(probs: &[f64; 4], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (k, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return k;
        }
    }
    // u landed in the rounding gap above the cumulative sum
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(3)
}

struct Engine {
    config: RunConfig,
    device: Device,
    /// Outcome distributions of the labeled discrete pairs, by `[j][alice label]`.
    table: Option<[[[f64; 4]; 6]; 2]>,
}

impl Engine {
    fn new(config: &RunConfig) -> Result<Self> {
        if config.shots == 0 {
            return input("a run needs at least one shot");
        }
        let device = Device::new(&config.strategy, config.noise)?;
        let table = if config.ensemble.kind.is_discrete() {
            let mut t = [[[0.0; 4]; 6]; 2];
            for j in CorrelationFlag::BOTH {
                for pair in discrete_ensemble(j) {
                    let alice = pair.label().expect("discrete pairs are labeled").0;
                    t[j.bit()][alice.index()] = device.distribution(&pair)?;
                }
            }
            Some(t)
        } else {
            None
        };
        Ok(Self { config: config.clone(), device, table })
    }

    fn chunk(&self, index: u64) -> Result<Vec<TrialRecord>> {
        let start = index * CHUNK_SHOTS;
        let n = CHUNK_SHOTS.min(self.config.shots - start);
        let mut rng = rng::stream(self.config.master_seed, index);
        let mut out = Vec::with_capacity(n as usize);
        for _ in 0..n {
            let j = if rng.random::<bool>() { CorrelationFlag::Identical } else { CorrelationFlag::Orthogonal };
            let pair = sample_pair(&self.config.ensemble, j, &mut rng);
            let probs = match (&self.table, pair.label()) {
                (Some(t), Some((alice, _))) => t[j.bit()][alice.index()],
                _ => self.device.distribution(&pair)?,
            };
            let (raw, estimate) = self.device.outcome(sample_index(&probs, &mut rng));
            out.push(TrialRecord::new(pair.label(), j, raw, estimate));
        }
        Ok(out)
    }

    fn run(&self) -> Result<Vec<TrialRecord>> {
        let chunks = self.config.shots.div_ceil(CHUNK_SHOTS);
        let parts: Vec<Result<Vec<TrialRecord>>> = (0..chunks).into_par_iter().map(|k| self.chunk(k)).collect();
        let mut records = Vec::with_capacity(self.config.shots as usize);
        for part in parts {
            records.extend(part?);
        }
        Ok(records)
    }
}

/// Runs `config.shots` trials on the current rayon pool.
pub fn run(config: &RunConfig) -> Result<Vec<TrialRecord>> {
    Engine::new(config)?.run()
}

/// Runs on a dedicated pool of `workers` threads. Output is identical for
/// every worker count.
pub fn run_with_workers(config: &RunConfig, workers: usize) -> Result<Vec<TrialRecord>> {
    let engine = Engine::new(config)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Input(format!("cannot start worker pool: {e}")))?;
    pool.install(|| engine.run())
}
