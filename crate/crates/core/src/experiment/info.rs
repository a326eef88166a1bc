//! Mutual information between preparations and detector outcomes.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{RawOutcome, TrialRecord};
use crate::error::{input, Error, Result};
use crate::rng;

/// Preparation variable paired with the outcome.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MiVariable {
    AliceLabel,
    CorrelationJ,
    /// Alice's and Bob's labels together.
    FullPair,
}

impl MiVariable {
    pub const ALL: [MiVariable; 3] = [MiVariable::AliceLabel, MiVariable::CorrelationJ, MiVariable::FullPair];

    pub fn name(self) -> &'static str {
        match self {
            MiVariable::AliceLabel => "alice_label",
            MiVariable::CorrelationJ => "correlation_j",
            MiVariable::FullPair => "full_pair",
        }
    }

    fn bins(self) -> usize {
        match self {
            MiVariable::AliceLabel => 6,
            MiVariable::CorrelationJ => 2,
            MiVariable::FullPair => 36,
        }
    }

    fn value(self, r: &TrialRecord) -> Option<usize> {
        match self {
            MiVariable::AliceLabel => r.pair_label.map(|(a, _)| a.index()),
            MiVariable::CorrelationJ => Some(r.j.bit()),
            MiVariable::FullPair => r.pair_label.map(|(a, b)| 6 * a.index() + b.index()),
        }
    }
}

impl std::str::FromStr for MiVariable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "alice_label" | "alice" => Ok(MiVariable::AliceLabel),
            "correlation_j" | "j" => Ok(MiVariable::CorrelationJ),
            "full_pair" | "pair" => Ok(MiVariable::FullPair),
            _ => input(format!("unknown variable '{s}' (expected alice_label, correlation_j, full_pair)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Conditioning {
    None,
    /// Keep only shots whose Bell outcome is a triplet.
    SymmetricOutcomeOnly,
}

impl Conditioning {
    pub fn name(self) -> &'static str {
        match self {
            Conditioning::None => "none",
            Conditioning::SymmetricOutcomeOnly => "symmetric_outcome_only",
        }
    }
}

impl std::str::FromStr for Conditioning {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Conditioning::None),
            "symmetric_outcome_only" | "symmetric" => Ok(Conditioning::SymmetricOutcomeOnly),
            _ => input(format!("unknown conditioning '{s}' (expected none, symmetric)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct MutualInfoOptions {
    pub resamples: usize,
    pub seed: u64,
}

impl Default for MutualInfoOptions {
    fn default() -> Self {
        Self { resamples: 200, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MutualInfoReport {
    pub variable: MiVariable,
    pub conditioning: Conditioning,
    /// Records left after conditioning.
    pub samples: usize,
    pub estimate_bits: f64,
    pub bias_corrected_bits: f64,
    pub bootstrap_stderr_bits: f64,
    pub resamples: usize,
}

fn outcome_index(o: RawOutcome) -> usize {
    match o {
        RawOutcome::Bell { outcome } => outcome.index(),
        RawOutcome::Local { alice, bob } => 2 * alice as usize + bob as usize,
    }
}

/// Plug-in and Miller-Madow estimates from a flattened `kx × 4` count table.
fn estimates(counts: &[u64], n: u64) -> (f64, f64) {
    let kx = counts.len() / 4;
    let mut px = vec![0u64; kx];
    let mut py = [0u64; 4];
    for (cell, &c) in counts.iter().enumerate() {
        px[cell / 4] += c;
        py[cell % 4] += c;
    }
    let nf = n as f64;
    let mut mi = 0.0;
    for (cell, &c) in counts.iter().enumerate() {
        if c > 0 {
            let c = c as f64;
            mi += c / nf * (c * nf / (px[cell / 4] as f64 * py[cell % 4] as f64)).log2();
        }
    }
    let nonzero = |it: &mut dyn Iterator<Item = &u64>| it.filter(|&&c| c > 0).count() as f64;
    let (bx, by, bxy) = (nonzero(&mut px.iter()), nonzero(&mut py.iter()), nonzero(&mut counts.iter()));
    let mi = mi.max(0.0);
    (mi, mi + ((bx - 1.0) + (by - 1.0) - (bxy - 1.0)) / (2.0 * nf * std::f64::consts::LN_2))
}

/// Mutual information in bits between `variable` and the raw outcome.
pub fn mutual_info(
    records: &[TrialRecord],
    variable: MiVariable,
    conditioning: Conditioning,
    options: MutualInfoOptions,
) -> Result<MutualInfoReport> {
    let kx = variable.bins();
    let mut cells = Vec::with_capacity(records.len());
    for r in records {
        if conditioning == Conditioning::SymmetricOutcomeOnly {
            match r.bell_outcome() {
                Some(b) if b.is_singlet() => continue,
                Some(_) => {}
                None => return input("symmetric-outcome conditioning needs Bell outcomes"),
            }
        }
        let Some(x) = variable.value(r) else {
            return input(format!("records carry no {} (unlabeled ensemble)", variable.name()));
        };
        cells.push((4 * x + outcome_index(r.raw_outcome)) as u32);
    }
    let mut counts = vec![0u64; 4 * kx];
    for &c in &cells {
        counts[c as usize] += 1;
    }
    let distinct = |axis: &dyn Fn(usize) -> usize, bins: usize| {
        let mut seen = vec![false; bins];
        for (cell, &c) in counts.iter().enumerate() {
            seen[axis(cell)] |= c > 0;
        }
        seen.iter().filter(|&&s| s).count()
    };
    let (dx, dy) = (distinct(&|cell| cell / 4, kx), distinct(&|cell| cell % 4, 4));
    if dx < 2 || dy < 2 {
        return Err(Error::DegenerateData(format!(
            "need at least two distinct values of each variable, got {dx} for {} and {dy} for the outcome",
            variable.name()
        )));
    }
    let n = cells.len() as u64;
    let (estimate_bits, bias_corrected_bits) = estimates(&counts, n);

    let boot: Vec<f64> = (0..options.resamples as u64)
        .into_par_iter()
        .map(|b| {
            let mut rng = rng::stream(options.seed, b);
            let mut counts = vec![0u64; 4 * kx];
            for _ in 0..n {
                counts[cells[rng.random_range(0..cells.len())] as usize] += 1;
            }
            estimates(&counts, n).1
        })
        .collect();
    let bootstrap_stderr_bits = if boot.len() < 2 {
        0.0
    } else {
        let mean = boot.iter().sum::<f64>() / boot.len() as f64;
        (boot.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (boot.len() - 1) as f64).sqrt()
    };

    Ok(MutualInfoReport {
        variable,
        conditioning,
        samples: cells.len(),
        estimate_bits,
        bias_corrected_bits,
        bootstrap_stderr_bits,
        resamples: options.resamples,
    })
}
