//! Command-line grammar and config-file merging.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "discrim", version, about = "Simulate joint and local discrimination of correlated photon pairs")]
#[command(args_override_self = true)]
pub struct Cli {
    /// Flat `key = value` file of default flags; command-line flags win.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Expected payoff of a strategy, exact or sampled.
    Payoff(PayoffArgs),
    /// Per-state success bars as CSV.
    Fig3(Fig3Args),
    /// Optimal joint measurement for the averaged states.
    Helstrom(HelstromArgs),
    /// Grid search over product measurements.
    LoccSearch(LoccArgs),
    /// Check the linear-optics CNOT network.
    CnotVerify(CnotArgs),
    /// Fit a noise parameter to a measured payoff.
    FitNoise(FitArgs),
    /// Mutual information between preparations and outcomes.
    MutualInfo(MiArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Payoff(_) => "payoff",
            Command::Fig3(_) => "fig3",
            Command::Helstrom(_) => "helstrom",
            Command::LoccSearch(_) => "locc-search",
            Command::CnotVerify(_) => "cnot-verify",
            Command::FitNoise(_) => "fit-noise",
            Command::MutualInfo(_) => "mutual-info",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum EnsembleArg {
    Discrete6,
    #[value(alias = "uniform_sphere", alias = "uniform-sphere")]
    Uniform,
    Arc,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    Joint,
    Local,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum AxisArg {
    #[value(name = "HV", alias = "hv")]
    Hv,
    #[value(name = "DA", alias = "da")]
    Da,
    #[value(name = "RL", alias = "rl")]
    Rl,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    #[value(alias = "statistics_depolarizing")]
    Depolarizing,
    #[value(alias = "fock_distinguishability", alias = "distinguishability")]
    Fock,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum VariableArg {
    All,
    #[value(name = "alice_label", alias = "alice")]
    AliceLabel,
    #[value(name = "correlation_j", alias = "j")]
    CorrelationJ,
    #[value(name = "full_pair", alias = "pair")]
    FullPair,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ConditioningArg {
    None,
    #[value(alias = "symmetric_outcome_only")]
    Symmetric,
}

#[derive(Clone, Debug, Args)]
pub struct OutputArgs {
    /// Write the report here instead of stdout.
    #[arg(long, value_name = "PATH")]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Clone, Debug, Args)]
pub struct StrategyArgs {
    #[arg(long, value_enum, default_value = "joint")]
    pub strategy: StrategyArg,
    /// Measurement axis of a local strategy.
    #[arg(long, value_enum, default_value = "HV")]
    pub axis: AxisArg,
}

#[derive(Clone, Debug, Args)]
pub struct NoiseArgs {
    /// Defaults to the model whose parameter is given.
    #[arg(long, value_enum)]
    pub noise_model: Option<ModelArg>,
    /// Depolarizing weight of the ideal statistics.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Two-photon mode overlap.
    #[arg(long)]
    pub overlap: Option<f64>,
}

#[derive(Clone, Debug, Args)]
pub struct SamplingArgs {
    #[arg(long, default_value_t = 100_000)]
    pub shots: u64,
    /// Master seed; generated and reported when absent.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, Args)]
pub struct WorkerArgs {
    /// Worker threads (default: available parallelism).
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Clone, Debug, Args)]
pub struct PayoffArgs {
    #[arg(long, value_enum, default_value = "discrete6")]
    pub ensemble: EnsembleArg,
    #[command(flatten)]
    pub strategy: StrategyArgs,
    /// Exact probabilities instead of sampling.
    #[arg(long)]
    pub exact: bool,
    #[command(flatten)]
    pub noise: NoiseArgs,
    #[command(flatten)]
    pub sampling: SamplingArgs,
    #[command(flatten)]
    pub workers: WorkerArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Clone, Debug, Args)]
pub struct Fig3Args {
    #[command(flatten)]
    pub strategy: StrategyArgs,
    /// Fill the simulated column with exact values.
    #[arg(long)]
    pub exact: bool,
    #[command(flatten)]
    pub noise: NoiseArgs,
    #[command(flatten)]
    pub sampling: SamplingArgs,
    #[command(flatten)]
    pub workers: WorkerArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Clone, Debug, Args)]
pub struct HelstromArgs {
    #[arg(long, value_enum, default_value = "discrete6")]
    pub ensemble: EnsembleArg,
    /// Prior probability of the identical class.
    #[arg(long, default_value_t = 0.5)]
    pub prior_identical: f64,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Clone, Debug, Args)]
pub struct LoccArgs {
    #[arg(long, value_enum, default_value = "uniform")]
    pub ensemble: EnsembleArg,
    /// Grid points per Bloch angle.
    #[arg(long, default_value_t = 24)]
    pub resolution: usize,
    /// Write the per-axis-pair search log as CSV.
    #[arg(long, value_name = "PATH")]
    pub log: Option<PathBuf>,
    #[command(flatten)]
    pub workers: WorkerArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Clone, Debug, Args)]
pub struct CnotArgs {
    /// Include the full mode transfer matrix.
    #[arg(long)]
    pub network: bool,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Clone, Debug, Args)]
pub struct FitArgs {
    /// Measured payoff to reproduce.
    #[arg(long)]
    pub target: f64,
    #[arg(long, value_enum, default_value = "depolarizing")]
    pub model: ModelArg,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Clone, Debug, Args)]
pub struct MiArgs {
    #[arg(long, value_enum, default_value = "discrete6")]
    pub ensemble: EnsembleArg,
    #[command(flatten)]
    pub strategy: StrategyArgs,
    #[arg(long, value_enum, default_value = "all")]
    pub variable: VariableArg,
    /// Defaults to all combinations when the variable is `all`, else none.
    #[arg(long, value_enum)]
    pub conditioning: Option<ConditioningArg>,
    /// Bootstrap resamples.
    #[arg(long, default_value_t = 200)]
    pub resamples: usize,
    #[command(flatten)]
    pub noise: NoiseArgs,
    #[command(flatten)]
    pub sampling: SamplingArgs,
    #[command(flatten)]
    pub workers: WorkerArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

/// Problems that happen before clap sees the arguments.
#[derive(Debug)]
pub enum PreParseError {
    Usage(String),
    Io(String),
}

fn config_path(args: &[OsString]) -> Result<Option<(usize, usize, PathBuf)>, PreParseError> {
    for (k, a) in args.iter().enumerate() {
        let Some(s) = a.to_str() else { continue };
        if s == "--" {
            break;
        }
        if s == "--config" {
            let path = args
                .get(k + 1)
                .ok_or_else(|| PreParseError::Usage("--config needs a path".into()))?;
            return Ok(Some((k, 2, PathBuf::from(path))));
        }
        if let Some(p) = s.strip_prefix("--config=") {
            return Ok(Some((k, 1, PathBuf::from(p))));
        }
    }
    Ok(None)
}

/// Parses `key = value` lines. Blank lines and `#` comments are skipped;
/// `flag = true` becomes a bare switch and `flag = false` is dropped.
pub fn parse_config_text(text: &str) -> Result<Vec<(String, String)>, PreParseError> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| PreParseError::Usage(format!("config line {}: expected key = value", n + 1)))?;
        let key = k.trim().trim_start_matches("--").replace('_', "-");
        if key.is_empty() {
            return Err(PreParseError::Usage(format!("config line {}: empty key", n + 1)));
        }
        out.push((key, v.trim().trim_matches('"').to_string()));
    }
    Ok(out)
}

/// Splices config-file entries in right after the subcommand, so that the
/// later command-line occurrences override them.
pub fn merge_config(mut args: Vec<OsString>) -> Result<Vec<OsString>, PreParseError> {
    let Some((at, len, path)) = config_path(&args)? else { return Ok(args) };
    args.drain(at..at + len);
    let text = std::fs::read_to_string(&path)
        .map_err(|e| PreParseError::Io(format!("cannot read config {}: {e}", path.display())))?;
    let entries = parse_config_text(&text)?;

    let cmd = Cli::command();
    let sub_names: Vec<String> = cmd.get_subcommands().map(|s| s.get_name().to_string()).collect();
    let mut sub_at = args.iter().position(|a| a.to_str().is_some_and(|s| sub_names.iter().any(|n| n == s)));
    let mut flags = Vec::new();
    for (key, value) in entries {
        if key == "command" {
            if sub_at.is_none() {
                args.insert(1.min(args.len()), OsString::from(&value));
                sub_at = Some(1.min(args.len() - 1));
            }
            continue;
        }
        let switch = value.eq_ignore_ascii_case("true");
        if value.eq_ignore_ascii_case("false") {
            continue;
        }
        flags.push(if switch { OsString::from(format!("--{key}")) } else { OsString::from(format!("--{key}={value}")) });
    }
    let Some(sub_at) = sub_at else {
        return Err(PreParseError::Usage("no subcommand given on the command line or in the config file".into()));
    };
    let tail = args.split_off(sub_at + 1);
    args.extend(flags);
    args.extend(tail);
    Ok(args)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn os(v: &[&str]) -> Vec<OsString> {
        v.iter().map(OsString::from).collect()
    }

    #[test]
    fn config_lines() {
        let e = parse_config_text("# run\nshots = 10\n\nexact=true\nnoise_model = \"fock\"\n").unwrap();
        assert_eq!(
            e,
            vec![
                ("shots".to_string(), "10".to_string()),
                ("exact".to_string(), "true".to_string()),
                ("noise-model".to_string(), "fock".to_string())
            ]
        );
        assert!(parse_config_text("shots 10").is_err());
    }

    #[test]
    fn flags_override_config() {
        let dir = std::env::temp_dir().join(format!("discrim-cfg-{}", std::process::id()));
        std::fs::write(&dir, "shots = 10\nseed = 4\nexact = false\n").unwrap();
        let args = merge_config(os(&["discrim", "payoff", "--config", dir.to_str().unwrap(), "--shots", "20"])).unwrap();
        let cli = Cli::try_parse_from(args).unwrap();
        let Command::Payoff(p) = cli.command else { panic!() };
        assert_eq!(p.sampling.shots, 20);
        assert_eq!(p.sampling.seed, Some(4));
        assert!(!p.exact);
        std::fs::remove_file(dir).ok();
    }

    #[test]
    fn command_from_config() {
        let dir = std::env::temp_dir().join(format!("discrim-cmd-{}", std::process::id()));
        std::fs::write(&dir, "command = fit-noise\ntarget = 0.72\n").unwrap();
        let args = merge_config(os(&["discrim", "--config", dir.to_str().unwrap()])).unwrap();
        let cli = Cli::try_parse_from(args).unwrap();
        assert!(matches!(cli.command, Command::FitNoise(FitArgs { target, .. }) if target == 0.72));
        std::fs::remove_file(dir).ok();
    }

    #[test]
    fn invalid_strategy_names_choices() {
        let err = Cli::try_parse_from(["discrim", "payoff", "--strategy", "localish"]).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("joint") && msg.contains("local"), "{msg}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn grammar_is_consistent() {
        Cli::command().debug_assert();
    }
}
