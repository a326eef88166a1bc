//! Payoff statistics, exact and sampled.

use std::io::Write;

use serde::Serialize;

use super::{run, Device, NoiseSpec, RunConfig, StrategySpec, TrialRecord};
use crate::ensembles::{
    average_state, discrete_ensemble, AverageMode, CorrelationFlag, EnsembleSpec, PolarizationLabel,
};
use crate::error::{input, Result};

/// Shots used when a continuous ensemble has no exact answer.
pub const FALLBACK_SHOTS: u64 = 1_000_000;
/// Seed of the fallback run, fixed so exact reports stay reproducible.
pub const FALLBACK_SEED: u64 = 0x5eed;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StateStat {
    pub label: String,
    pub p: f64,
    pub stderr: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ClassStat {
    pub class: CorrelationFlag,
    pub p: f64,
    pub stderr: f64,
    pub shots: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Overall {
    pub payoff: f64,
    pub stderr: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PayoffReport {
    /// True when every number is computed without sampling.
    pub exact: bool,
    /// Set when exact values were requested but sampling was used instead.
    pub monte_carlo_fallback: bool,
    pub ensemble: Option<EnsembleSpec>,
    pub strategy: Option<StrategySpec>,
    pub noise: Option<NoiseSpec>,
    pub master_seed: Option<u64>,
    pub shots: u64,
    pub per_state: Vec<StateStat>,
    pub classes: [ClassStat; 2],
    pub overall: Overall,
}

impl PayoffReport {
    pub fn class(&self, j: CorrelationFlag) -> &ClassStat {
        &self.classes[j.bit()]
    }

    pub fn state(&self, label: &str) -> Option<&StateStat> {
        self.per_state.iter().find(|s| s.label == label)
    }

    /// Copies the run configuration into the report.
    pub fn with_config(mut self, config: &RunConfig) -> Self {
        self.ensemble = Some(config.ensemble);
        self.strategy = Some(config.strategy);
        self.noise = config.noise;
        self.master_seed = Some(config.master_seed);
        self
    }
}

/// Labeled pairs in display order: the identical class, then the orthogonal one.
pub(crate) fn discrete_labels() -> Vec<(PolarizationLabel, PolarizationLabel)> {
    [CorrelationFlag::Identical, CorrelationFlag::Orthogonal]
        .into_iter()
        .flat_map(|j| discrete_ensemble(j).into_iter().map(|p| p.label().expect("labeled")))
        .collect()
}

fn label_string((a, b): (PolarizationLabel, PolarizationLabel)) -> String {
    format!("{a}{b}")
}

#[derive(Clone, Copy, Default)]
struct Tally {
    n: u64,
    hits: u64,
}

impl Tally {
    fn add(&mut self, correct: bool) {
        self.n += 1;
        self.hits += correct as u64;
    }

    fn p(self) -> f64 {
        self.hits as f64 / self.n as f64
    }

    fn stderr(self) -> f64 {
        let p = self.p();
        (p * (1.0 - p) / self.n as f64).sqrt()
    }
}

fn class_stat(class: CorrelationFlag, t: Tally) -> ClassStat {
    if t.n == 0 {
        ClassStat { class, p: f64::NAN, stderr: f64::NAN, shots: 0 }
    } else {
        ClassStat { class, p: t.p(), stderr: t.stderr(), shots: t.n }
    }
}

fn overall(classes: &[ClassStat; 2]) -> Overall {
    Overall {
        payoff: 0.5 * (classes[0].p + classes[1].p),
        stderr: 0.5 * (classes[0].stderr.powi(2) + classes[1].stderr.powi(2)).sqrt(),
    }
}

/// Binomial success estimates per labeled pair (or per class when the
/// records are unlabeled) and the class-balanced payoff.
pub fn payoff_report(records: &[TrialRecord]) -> Result<PayoffReport> {
    if records.is_empty() {
        return input("payoff report needs at least one record");
    }
    let labels = discrete_labels();
    let mut by_label = vec![Tally::default(); labels.len()];
    let mut by_class = [Tally::default(); 2];
    let mut labeled = true;
    for r in records {
        by_class[r.j.bit()].add(r.correct);
        match r.pair_label.and_then(|l| labels.iter().position(|&x| x == l)) {
            Some(k) => by_label[k].add(r.correct),
            None => labeled = false,
        }
    }
    let classes = CorrelationFlag::BOTH.map(|j| class_stat(j, by_class[j.bit()]));
    let per_state = if labeled {
        labels
            .iter()
            .zip(&by_label)
            .filter(|(_, t)| t.n > 0)
            .map(|(&l, t)| StateStat { label: label_string(l), p: t.p(), stderr: t.stderr() })
            .collect()
    } else {
        [CorrelationFlag::Identical, CorrelationFlag::Orthogonal]
            .into_iter()
            .filter(|j| by_class[j.bit()].n > 0)
            .map(|j| StateStat { label: j.name().to_string(), p: classes[j.bit()].p, stderr: classes[j.bit()].stderr })
            .collect()
    };
    Ok(PayoffReport {
        exact: false,
        monte_carlo_fallback: false,
        ensemble: None,
        strategy: None,
        noise: None,
        master_seed: None,
        shots: records.len() as u64,
        per_state,
        overall: overall(&classes),
        classes,
    })
}

fn success(device: &Device, probs: &[f64; 4], j: CorrelationFlag) -> f64 {
    (0..4).filter(|&k| device.outcome(k).1 == j).map(|k| probs[k]).sum()
}

/// Exact success probabilities from `Tr[E ρ]`. Continuous ensembles use
/// their average states; when the noise model is not linear in the state,
/// a seeded high-shot run is substituted and flagged.
pub fn theory_report(ensemble: &EnsembleSpec, strategy: &StrategySpec, noise: Option<NoiseSpec>) -> Result<PayoffReport> {
    let device = Device::new(strategy, noise)?;
    let exact_class = |p: f64, j| ClassStat { class: j, p, stderr: 0.0, shots: 0 };
    let (per_state, classes) = if ensemble.kind.is_discrete() {
        let mut per_state = Vec::new();
        let mut sums = [0.0; 2];
        let mut counts = [0usize; 2];
        for j in [CorrelationFlag::Identical, CorrelationFlag::Orthogonal] {
            for pair in discrete_ensemble(j) {
                let p = success(&device, &device.distribution(&pair)?, j);
                sums[j.bit()] += p;
                counts[j.bit()] += 1;
                per_state.push(StateStat { label: pair.label_string().expect("labeled"), p, stderr: 0.0 });
            }
        }
        let classes = CorrelationFlag::BOTH.map(|j| exact_class(sums[j.bit()] / counts[j.bit()] as f64, j));
        (per_state, classes)
    } else {
        let mut ps = [0.0; 2];
        for j in CorrelationFlag::BOTH {
            let rho = average_state(ensemble, j, AverageMode::Analytic)?;
            match device.distribution_mixed(rho.operator()) {
                Some(probs) => ps[j.bit()] = success(&device, &probs, j),
                None => return fallback(ensemble, strategy, noise),
            }
        }
        let classes = CorrelationFlag::BOTH.map(|j| exact_class(ps[j.bit()], j));
        let per_state = [CorrelationFlag::Identical, CorrelationFlag::Orthogonal]
            .map(|j| StateStat { label: j.name().to_string(), p: ps[j.bit()], stderr: 0.0 })
            .to_vec();
        (per_state, classes)
    };
    Ok(PayoffReport {
        exact: true,
        monte_carlo_fallback: false,
        ensemble: Some(*ensemble),
        strategy: Some(*strategy),
        noise,
        master_seed: None,
        shots: 0,
        per_state,
        overall: overall(&classes),
        classes,
    })
}

fn fallback(ensemble: &EnsembleSpec, strategy: &StrategySpec, noise: Option<NoiseSpec>) -> Result<PayoffReport> {
    let mut config = RunConfig::new(*ensemble, *strategy, FALLBACK_SHOTS, FALLBACK_SEED);
    config.noise = noise;
    let mut report = payoff_report(&run(&config)?)?.with_config(&config);
    report.monte_carlo_fallback = true;
    Ok(report)
}

/// One bar group of the per-state success chart.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Fig3Row {
    pub label: String,
    pub class: CorrelationFlag,
    pub theory_joint: f64,
    pub simulated: f64,
    pub theory_local: f64,
}

/// Chart rows for the twelve labeled pairs. `simulated` must be a report on
/// the discrete ensemble; pairs it never saw get `NaN`.
pub fn fig3_rows(simulated: &PayoffReport) -> Result<Vec<Fig3Row>> {
    let d6 = EnsembleSpec::discrete6();
    let joint = theory_report(&d6, &StrategySpec::Joint, None)?;
    let local = theory_report(&d6, &StrategySpec::local(PolarizationLabel::H), None)?;
    discrete_labels()
        .into_iter()
        .map(|l| {
            let label = label_string(l);
            let get = |r: &PayoffReport| r.state(&label).map_or(f64::NAN, |s| s.p);
            let class = if l.1 == l.0 { CorrelationFlag::Identical } else { CorrelationFlag::Orthogonal };
            Ok(Fig3Row { theory_joint: get(&joint), simulated: get(simulated), theory_local: get(&local), class, label })
        })
        .collect()
}

pub fn write_fig3_csv<W: Write>(rows: &[Fig3Row], w: W) -> Result<()> {
    let mut out = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
    out.write_record(["label", "class", "theory_joint", "simulated", "theory_local"])?;
    for r in rows {
        out.write_record([
            r.label.clone(),
            r.class.name().to_string(),
            r.theory_joint.to_string(),
            r.simulated.to_string(),
            r.theory_local.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}
