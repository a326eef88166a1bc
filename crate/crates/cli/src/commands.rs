//! One function per subcommand, each producing a [`Report`].

use discrim_core::ensembles::{average_state, AverageMode, CorrelationFlag, EnsembleSpec, PolarizationLabel};
use discrim_core::experiment::{
    fig3_rows, mutual_info, payoff_report, run, theory_report, Conditioning, MiVariable, MutualInfoOptions,
    NoiseSpec, PayoffReport, RunConfig, StrategySpec,
};
use discrim_core::optics::{
    build_cnot_network, cnot_matrix, conditional_gate, depolarizing_average_gate_fidelity, fit_noise,
    BellAnalyzer, NoiseModel, NoiseParams,
};
use discrim_core::quantum::{sym_antisym_projectors, trace_norm, Priors, PureState};
use discrim_core::strategies::{joint_bell_strategy, local_grid_search};
use serde_json::{json, Value};

use crate::args::*;
use crate::output::{num, Report, Table};

/// Keeps bootstrap streams apart from the trial streams of the same seed.
const BOOTSTRAP_SEED_SALT: u64 = 0x9e37_79b9_7f4a_7c15;

pub type CmdResult = Result<Report, discrim_core::Error>;

fn ensemble_spec(e: EnsembleArg) -> EnsembleSpec {
    match e {
        EnsembleArg::Discrete6 => EnsembleSpec::discrete6(),
        EnsembleArg::Uniform => EnsembleSpec::uniform_sphere(),
        EnsembleArg::Arc => EnsembleSpec::arc(),
    }
}

fn strategy_spec(s: &StrategyArgs) -> StrategySpec {
    match s.strategy {
        StrategyArg::Joint => StrategySpec::Joint,
        StrategyArg::Local => StrategySpec::local(match s.axis {
            AxisArg::Hv => PolarizationLabel::H,
            AxisArg::Da => PolarizationLabel::D,
            AxisArg::Rl => PolarizationLabel::R,
        }),
    }
}

fn model(m: ModelArg) -> NoiseModel {
    match m {
        ModelArg::Depolarizing => NoiseModel::StatisticsDepolarizing,
        ModelArg::Fock => NoiseModel::FockDistinguishability,
    }
}

fn noise_spec(n: &NoiseArgs) -> Result<Option<NoiseSpec>, discrim_core::Error> {
    let m = match (n.noise_model, n.lambda, n.overlap) {
        (None, None, None) => return Ok(None),
        (Some(m), _, _) => model(m),
        (None, Some(_), _) => NoiseModel::StatisticsDepolarizing,
        (None, None, Some(_)) => NoiseModel::FockDistinguishability,
    };
    let params = NoiseParams::new(n.overlap.unwrap_or(1.0), n.lambda.unwrap_or(1.0))?;
    Ok(Some(NoiseSpec { model: m, params }))
}

fn seed(s: &SamplingArgs) -> u64 {
    s.seed.unwrap_or_else(rand::random)
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report types serialize")
}

fn payoff_text(r: &PayoffReport) -> String {
    let mut t = format!("payoff {}\nstderr {}\n", num(r.overall.payoff), num(r.overall.stderr));
    if r.monte_carlo_fallback {
        t.push_str("note exact values unavailable for this noise model; sampled instead\n");
    }
    for c in [CorrelationFlag::Identical, CorrelationFlag::Orthogonal] {
        let s = r.class(c);
        t.push_str(&format!("class {} {} ± {}\n", c, num(s.p), num(s.stderr)));
    }
    for s in &r.per_state {
        t.push_str(&format!("state {} {} ± {}\n", s.label, num(s.p), num(s.stderr)));
    }
    t
}

fn sampled(config: &RunConfig) -> Result<PayoffReport, discrim_core::Error> {
    Ok(payoff_report(&run(config)?)?.with_config(config))
}

pub fn payoff(a: &PayoffArgs) -> CmdResult {
    let ensemble = ensemble_spec(a.ensemble);
    let strategy = strategy_spec(&a.strategy);
    let noise = noise_spec(&a.noise)?;
    let (report, seed) = if a.exact {
        (theory_report(&ensemble, &strategy, noise)?, None)
    } else {
        let seed = seed(&a.sampling);
        let mut config = RunConfig::new(ensemble, strategy, a.sampling.shots, seed);
        config.noise = noise;
        (sampled(&config)?, Some(seed))
    };
    let mut text = payoff_text(&report);
    if let Some(s) = seed {
        text.push_str(&format!("seed {s}\n"));
    }
    let mut csv = Table::new(&["label", "p", "stderr"]);
    for s in &report.per_state {
        csv.row(vec![s.label.clone(), s.p.to_string(), s.stderr.to_string()]);
    }
    csv.row(vec!["overall".into(), report.overall.payoff.to_string(), report.overall.stderr.to_string()]);
    Ok(Report::new(json!({ "seed": seed, "report": to_value(&report) }), text, csv, Format::Text))
}

pub fn fig3(a: &Fig3Args) -> CmdResult {
    let d6 = EnsembleSpec::discrete6();
    let strategy = strategy_spec(&a.strategy);
    let noise = noise_spec(&a.noise)?;
    let (simulated, seed) = if a.exact {
        (theory_report(&d6, &strategy, noise)?, None)
    } else {
        let seed = seed(&a.sampling);
        let mut config = RunConfig::new(d6, strategy, a.sampling.shots, seed);
        config.noise = noise;
        (sampled(&config)?, Some(seed))
    };
    let rows = fig3_rows(&simulated)?;
    let mut csv = Table::new(&["label", "class", "theory_joint", "simulated", "theory_local"]);
    let mut text = String::from("label class       joint    sim      local\n");
    for r in &rows {
        csv.row(vec![
            r.label.clone(),
            r.class.name().into(),
            r.theory_joint.to_string(),
            r.simulated.to_string(),
            r.theory_local.to_string(),
        ]);
        text.push_str(&format!(
            "{:<5} {:<11} {:<8} {:<8} {}\n",
            r.label,
            r.class.name(),
            num(r.theory_joint),
            num(r.simulated),
            num(r.theory_local)
        ));
    }
    text.push_str(&format!("payoff {}\n", num(simulated.overall.payoff)));
    if let Some(s) = seed {
        text.push_str(&format!("seed {s}\n"));
    }
    let body = json!({
        "seed": seed,
        "exact": a.exact,
        "rows": to_value(&rows),
        "simulated_report": to_value(&simulated),
    });
    Ok(Report::new(body, text, csv, Format::Csv))
}

pub fn helstrom(a: &HelstromArgs) -> CmdResult {
    let ensemble = ensemble_spec(a.ensemble);
    let priors = Priors::new(1.0 - a.prior_identical, a.prior_identical)?;
    let rho0 = average_state(&ensemble, CorrelationFlag::Orthogonal, AverageMode::Analytic)?;
    let rho1 = average_state(&ensemble, CorrelationFlag::Identical, AverageMode::Analytic)?;
    let (strategy, payoff) = discrim_core::strategies::helstrom_strategy(&rho0, &rho1, priors)?;
    let gamma = &rho1.operator().scale(priors.identical) - &rho0.operator().scale(priors.orthogonal);
    let bound = 0.5 * (1.0 + trace_norm(&gamma)?);
    let joint = joint_bell_strategy().payoff(&rho0, &rho1, priors)?;
    let (pi_s, _) = sym_antisym_projectors();
    let e1 = &strategy.povm().e1;
    let mut max_diff: f64 = 0.0;
    let mut expectations = Vec::new();
    for (name, rho) in [("rho0", &rho0), ("rho1", &rho1)] {
        let h = e1.trace_product(rho.operator()).re;
        let s = pi_s.trace_product(rho.operator()).re;
        max_diff = max_diff.max((h - s).abs());
        expectations.push(json!({ "state": name, "helstrom_identical": h, "symmetric_projector": s }));
    }
    let body = json!({
        "ensemble": a.ensemble_name(),
        "prior_identical": a.prior_identical,
        "payoff": payoff,
        "trace_norm_bound": bound,
        "joint_payoff": joint,
        "joint_gap": payoff - joint,
        "expectations": expectations,
        "max_expectation_difference": max_diff,
        "identical_element": to_value(e1),
    });
    let text = format!(
        "payoff {}\ntrace_norm_bound {}\njoint_payoff {}\njoint_gap {}\nmax_expectation_difference {}\n",
        num(payoff),
        num(bound),
        num(joint),
        num(payoff - joint),
        num(max_diff)
    );
    let mut csv = Table::new(&["payoff", "trace_norm_bound", "joint_payoff", "max_expectation_difference"]);
    csv.row(vec![payoff.to_string(), bound.to_string(), joint.to_string(), max_diff.to_string()]);
    Ok(Report::new(body, text, csv, Format::Text))
}

impl HelstromArgs {
    fn ensemble_name(&self) -> &'static str {
        ensemble_spec(self.ensemble).kind.name()
    }
}

pub fn locc_search(a: &LoccArgs) -> CmdResult {
    let ensemble = ensemble_spec(a.ensemble);
    let result = local_grid_search(&ensemble, a.resolution)?;
    if let Some(path) = &a.log {
        let file = std::fs::File::create(path)?;
        result.log.write_csv(std::io::BufWriter::new(file))?;
    }
    let joint = theory_report(&ensemble, &StrategySpec::Joint, None)?.overall.payoff;
    let b = result.best_row;
    let body = json!({
        "ensemble": ensemble.kind.name(),
        "resolution": a.resolution,
        "payoff": result.payoff,
        "best": to_value(&b),
        "joint_payoff": joint,
        "joint_advantage": joint - result.payoff,
        "axis_pairs": result.log.rows.len(),
    });
    let text = format!(
        "payoff {}\nalice_axis theta={} phi={}\nbob_axis theta={} phi={}\nrule {:04b}\njoint_payoff {}\n",
        num(result.payoff),
        num(b.theta_a),
        num(b.phi_a),
        num(b.theta_b),
        num(b.phi_b),
        b.rule_id,
        num(joint)
    );
    let mut csv = Table::new(&["theta_a", "phi_a", "theta_b", "phi_b", "rule_id", "payoff"]);
    csv.row(vec![
        b.theta_a.to_string(),
        b.phi_a.to_string(),
        b.theta_b.to_string(),
        b.phi_b.to_string(),
        b.rule_id.to_string(),
        result.payoff.to_string(),
    ]);
    Ok(Report::new(body, text, csv, Format::Text))
}

pub fn cnot_verify(a: &CnotArgs) -> CmdResult {
    let net = build_cnot_network();
    let gate = conditional_gate(&net)?;
    let deviation = gate.deviation_from(&cnot_matrix());
    let success = gate.success_amplitude_scale.powi(2);
    let per_input: Vec<f64> = (0..4).map(|k| gate.success_probability(&PureState::basis(4, k))).collect();
    let analyzer = BellAnalyzer::ideal();
    let map: Vec<Value> = analyzer
        .map()
        .pairs()
        .iter()
        .map(|(o, b)| json!({ "control": to_value(&o.control), "target": to_value(&o.target), "bell": b.name() }))
        .collect();
    let mut body = json!({
        "success_probability": success,
        "success_probability_per_input": per_input,
        "max_deviation": deviation,
        "unitarity_error": net.unitarity_error(),
        "analyzer_map": map,
    });
    if a.network {
        body["network"] = to_value(&net);
    }
    let mut text = format!(
        "success_probability {}\nmax_deviation {}\nunitarity_error {}\n",
        num(success),
        num(deviation),
        num(net.unitarity_error())
    );
    for (o, b) in analyzer.map().pairs() {
        text.push_str(&format!("analyzer ({:?},{:?}) {}\n", o.control, o.target, b));
    }
    let mut csv = Table::new(&["success_probability", "max_deviation", "unitarity_error"]);
    csv.row(vec![success.to_string(), deviation.to_string(), net.unitarity_error().to_string()]);
    Ok(Report::new(body, text, csv, Format::Text))
}

pub fn fit(a: &FitArgs) -> CmdResult {
    let m = model(a.model);
    let params = fit_noise(a.target, m)?;
    let x = params.parameter(m);
    let name = match m {
        NoiseModel::StatisticsDepolarizing => "lambda",
        NoiseModel::FockDistinguishability => "overlap",
    };
    let (payoff, parallel) = BellAnalyzer::ideal().discrete_payoff(params, m)?;
    let fidelity = (m == NoiseModel::StatisticsDepolarizing).then(|| depolarizing_average_gate_fidelity(x));
    let body = json!({
        "model": m.name(),
        "target": a.target,
        "parameter_name": name,
        "parameter": x,
        "payoff": payoff,
        "parallel_identification": parallel,
        "average_gate_fidelity": fidelity,
    });
    let mut text = format!(
        "model {}\n{} {}\npayoff {}\nparallel_identification {}\n",
        m.name(),
        name,
        num(x),
        num(payoff),
        num(parallel)
    );
    if let Some(f) = fidelity {
        text.push_str(&format!("average_gate_fidelity {}\n", num(f)));
    }
    let mut csv = Table::new(&["model", "parameter_name", "parameter", "payoff", "parallel_identification"]);
    csv.row(vec![m.name().into(), name.into(), x.to_string(), payoff.to_string(), parallel.to_string()]);
    Ok(Report::new(body, text, csv, Format::Text))
}

pub fn mutual_information(a: &MiArgs) -> CmdResult {
    let seed = seed(&a.sampling);
    let mut config = RunConfig::new(ensemble_spec(a.ensemble), strategy_spec(&a.strategy), a.sampling.shots, seed);
    config.noise = noise_spec(&a.noise)?;
    let records = run(&config)?;

    let cond = |c: ConditioningArg| match c {
        ConditioningArg::None => Conditioning::None,
        ConditioningArg::Symmetric => Conditioning::SymmetricOutcomeOnly,
    };
    let variables: Vec<MiVariable> = match a.variable {
        VariableArg::All => MiVariable::ALL.to_vec(),
        VariableArg::AliceLabel => vec![MiVariable::AliceLabel],
        VariableArg::CorrelationJ => vec![MiVariable::CorrelationJ],
        VariableArg::FullPair => vec![MiVariable::FullPair],
    };
    let conditionings: Vec<Conditioning> = match (a.conditioning, a.variable) {
        (Some(c), _) => vec![cond(c)],
        (None, VariableArg::All) => vec![Conditioning::None, Conditioning::SymmetricOutcomeOnly],
        (None, _) => vec![Conditioning::None],
    };
    let options = MutualInfoOptions { resamples: a.resamples, seed: seed ^ BOOTSTRAP_SEED_SALT };
    let mut results = Vec::new();
    for &v in &variables {
        for &c in &conditionings {
            results.push(mutual_info(&records, v, c, options)?);
        }
    }

    let mut text = String::new();
    let mut csv = Table::new(&[
        "variable",
        "conditioning",
        "samples",
        "estimate_bits",
        "bias_corrected_bits",
        "bootstrap_stderr_bits",
    ]);
    for r in &results {
        text.push_str(&format!(
            "{} | {}: {} bits (bias-corrected {} ± {}, n={})\n",
            r.variable.name(),
            r.conditioning.name(),
            num(r.estimate_bits),
            num(r.bias_corrected_bits),
            num(r.bootstrap_stderr_bits),
            r.samples
        ));
        csv.row(vec![
            r.variable.name().into(),
            r.conditioning.name().into(),
            r.samples.to_string(),
            r.estimate_bits.to_string(),
            r.bias_corrected_bits.to_string(),
            r.bootstrap_stderr_bits.to_string(),
        ]);
    }
    text.push_str(&format!("seed {seed}\n"));
    let body = json!({ "seed": seed, "config": to_value(&config), "results": to_value(&results) });
    Ok(Report::new(body, text, csv, Format::Text))
}
