//! `consensus-rate`: generate signed networks, compare predicted and measured
//! convergence rates, and reproduce the published experiment grids.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use consensus_rate::lab::{
    self, load_scenario_config, preset_spec, run_experiment, ExperimentSpec, Preset, RunOptions, Sweep, SweepParam,
    SweepRecord,
};
use consensus_rate::netgen::DistributionSpec;
use consensus_rate::theory::{check_assumptions, monotonicity_table, predict};
use consensus_rate::{Error, Mixture, Proportions, Scenario, ScenarioConfig};
use serde_json::json;

const EXIT_IO: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERIC: u8 = 3;

#[derive(Parser)]
#[command(name = "consensus-rate", version, about = "Convergence rates of signed opinion dynamics on random networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Full spectrum of one network with its predicted bulk and outlier.
    Spectrum {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Rates over a population, connectivity or self-confidence grid.
    RateSweep {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[command(flatten)]
        run: RunArgs,
        /// Parameter to vary: n, P or d.
        #[arg(long, default_value = "n")]
        param: String,
        /// Grid as start:step:stop or a comma list; defaults to the published grid.
        #[arg(long)]
        values: Option<String>,
    },
    /// Rates over the share of one interaction type in a two-type mixture.
    MixtureSweep {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_enum, default_value_t = MixtureKind::PpMm)]
        kind: MixtureKind,
        /// Grid as start:step:stop or a comma list; defaults to 0:0.1:1.
        #[arg(long)]
        values: Option<String>,
    },
    /// Runs a named preset, or the experiment file given with --config.
    Reproduce {
        /// example1, example2, spectrum, rate-vs-n, rate-vs-P, rate-vs-d or mixture-sweep.
        preset: String,
        /// Experiment specification JSON.
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Self-confidence bounds, coexistence of trust and mistrust, and the
    /// predicted rate for one configuration.
    CheckAssumptions {
        #[command(flatten)]
        scenario: ScenarioArgs,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum MixtureKind {
    /// Mutual trust against mutual mistrust; the grid is the (+/+) share.
    PpMm,
    /// Mutual against unilateral mistrust; the grid is the (−/−) share.
    MmM0,
}

#[derive(Args)]
struct ScenarioArgs {
    /// Scenario configuration JSON; the flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    /// Probability that a pair interacts.
    #[arg(long = "p", visible_alias = "P")]
    p: Option<f64>,
    /// Self-confidence level.
    #[arg(long)]
    d: Option<f64>,
    /// Standard deviation of normal interaction strengths.
    #[arg(long)]
    sigma: Option<f64>,
    /// `random`, a type id (pp, mm, pm, p0, m0) or five shares pp,mm,pm,p0,m0.
    #[arg(long, allow_hyphen_values = true)]
    proportions: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct RunArgs {
    /// Seeds as a comma list or a half-open range a..b.
    #[arg(long)]
    seeds: Option<String>,
    /// Output directory.
    #[arg(long, default_value = "results")]
    out: PathBuf,
    /// Skip trajectory simulation.
    #[arg(long)]
    no_dynamics: bool,
    /// Record per-cell wall time (makes the CSV run-dependent).
    #[arg(long)]
    timing: bool,
}

/// Failure with the exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            _ if e.is_config() => EXIT_CONFIG,
            Error::Io { .. } | Error::Csv { .. } => EXIT_IO,
            _ => EXIT_NUMERIC,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn config_error(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_CONFIG,
        message: message.into(),
    }
}

fn parse_mixture(s: &str) -> Result<Mixture, Failure> {
    if s.contains(',') {
        return Ok(Mixture::Complex(Proportions::parse_list(s)?));
    }
    let scenario: Scenario = s.parse().map_err(|_| config_error(format!("unknown proportions '{s}'")))?;
    scenario
        .mixture()
        .ok_or_else(|| config_error("give the shares of a general mixture as pp,mm,pm,p0,m0"))
}

impl ScenarioArgs {
    fn resolve(&self, default: ScenarioConfig) -> Result<ScenarioConfig, Failure> {
        let mut cfg = match &self.config {
            Some(path) => load_scenario_config(path).map_err(|e| config_error(e.to_string()))?,
            None => default,
        };
        if let Some(n) = self.n {
            cfg.n = n;
        }
        if let Some(p) = self.p {
            cfg.p = p;
        }
        if let Some(d) = self.d {
            cfg.d = d;
        }
        if let Some(sigma) = self.sigma {
            cfg.dist = DistributionSpec::Normal { sigma };
        }
        if let Some(m) = &self.proportions {
            cfg.proportions = parse_mixture(m)?;
        }
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn parse_seeds(s: &str) -> Result<Vec<u64>, Failure> {
    let bad = |_| config_error(format!("bad seed list '{s}'"));
    if let Some((a, b)) = s.split_once("..") {
        let (a, b): (u64, u64) = (a.trim().parse().map_err(bad)?, b.trim().parse().map_err(bad)?);
        return Ok((a..b).collect());
    }
    s.split(',').map(|x| x.trim().parse().map_err(bad)).collect()
}

fn parse_values(s: &str) -> Result<Vec<f64>, Failure> {
    let bad = |_| config_error(format!("bad value list '{s}'"));
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() == 3 {
        let v: Vec<f64> = parts.iter().map(|x| x.trim().parse().map_err(bad)).collect::<Result<_, _>>()?;
        return Ok(lab::grid(v[0], v[1], v[2])?);
    }
    s.split(',').map(|x| x.trim().parse().map_err(bad)).collect()
}

impl RunArgs {
    fn apply(&self, spec: &mut ExperimentSpec) -> Result<(), Failure> {
        if let Some(s) = &self.seeds {
            spec.seeds = parse_seeds(s)?;
        }
        spec.outputs = self.out.clone();
        if self.no_dynamics {
            spec.options.dynamics = false;
        }
        if self.timing {
            spec.options.record_timing = true;
        }
        Ok(())
    }
}

fn base_default() -> ScenarioConfig {
    lab::presets::base_config(Mixture::Random)
}

/// Runs `spec`, reports the table, and fails with the numeric code when a
/// cell could not be computed.
fn execute(spec: &ExperimentSpec) -> Result<Vec<SweepRecord>, Failure> {
    let records = run_experiment(spec)?;
    let failed: Vec<&SweepRecord> = records.iter().filter(|r| r.error.is_some()).collect();
    for r in &failed {
        eprintln!(
            "warning: {} {}={} seed {}: {}",
            r.scenario,
            r.param,
            r.value,
            r.seed,
            r.error.as_deref().unwrap_or_default()
        );
    }
    println!(
        "{} records written to {}",
        records.len(),
        spec.outputs.join(format!("{}.csv", spec.preset)).display()
    );
    if failed.is_empty() {
        Ok(records)
    } else {
        Err(Failure {
            code: EXIT_NUMERIC,
            message: format!("{} of {} cells failed", failed.len(), records.len()),
        })
    }
}

fn single_spec(preset: Preset, base: ScenarioConfig, sweep: Sweep, run: &RunArgs) -> Result<ExperimentSpec, Failure> {
    let seed = base.seed;
    let mut spec = ExperimentSpec {
        preset,
        base,
        sweeps: vec![sweep],
        seeds: vec![seed],
        outputs: PathBuf::new(),
        options: RunOptions::default(),
    };
    if run.seeds.is_none() && preset != Preset::Spectrum {
        spec.seeds = (0..lab::presets::DEFAULT_SEEDS).collect();
    }
    run.apply(&mut spec)?;
    spec.validate()?;
    Ok(spec)
}

fn spectrum(scenario: &ScenarioArgs, run: &RunArgs) -> Result<(), Failure> {
    let base = scenario.resolve(base_default())?;
    let sweep = Sweep {
        proportions: None,
        param: SweepParam::N,
        values: vec![base.n as f64],
    };
    let mut spec = single_spec(Preset::Spectrum, base, sweep, run)?;
    spec.options.write_spectra = true;
    for r in execute(&spec)? {
        println!("{}", record_json(&r));
    }
    Ok(())
}

fn record_json(r: &SweepRecord) -> serde_json::Value {
    json!({
        "scenario": r.scenario,
        "seed": r.seed,
        "regime": r.regime,
        "r_theory": r.r_theory,
        "r_spectral": r.r_spectral,
        "r_dynamics": r.r_dynamics,
        "modulus_theory": r.modulus_theory,
        "modulus_spectral": r.modulus_spectral,
    })
}

fn rate_sweep(scenario: &ScenarioArgs, run: &RunArgs, param: &str, values: Option<&str>) -> Result<(), Failure> {
    let base = scenario.resolve(base_default())?;
    let param: SweepParam = param.parse()?;
    let grids = lab::presets::grids_for(base.scenario());
    let (preset, default_values) = match param {
        SweepParam::N => (Preset::RateVsN, grids.n),
        SweepParam::P => (Preset::RateVsP, grids.p),
        SweepParam::D => (Preset::RateVsD, grids.d),
        _ => return Err(config_error("rate-sweep varies n, P or d; use mixture-sweep for type shares")),
    };
    let values = values.map(parse_values).transpose()?.unwrap_or(default_values);
    let sweep = Sweep {
        proportions: None,
        param,
        values,
    };
    execute(&single_spec(preset, base, sweep, run)?).map(|_| ())
}

fn mixture_sweep(scenario: &ScenarioArgs, run: &RunArgs, kind: MixtureKind, values: Option<&str>) -> Result<(), Failure> {
    let base = scenario.resolve(base_default())?;
    let param = match kind {
        MixtureKind::PpMm => SweepParam::PlusPlusShare,
        MixtureKind::MmM0 => SweepParam::MinusMinusShare,
    };
    let values = values
        .map(parse_values)
        .transpose()?
        .unwrap_or_else(lab::presets::mixture_grid);
    let sweep = Sweep {
        proportions: None,
        param,
        values,
    };
    execute(&single_spec(Preset::MixtureSweep, base, sweep, run)?).map(|_| ())
}

fn reproduce(preset: &str, config: Option<&Path>, run: &RunArgs) -> Result<(), Failure> {
    let preset: Preset = preset.parse()?;
    let mut spec = match config {
        Some(path) => {
            let spec = ExperimentSpec::load(path).map_err(|e| config_error(e.to_string()))?;
            if spec.preset != preset {
                return Err(config_error(format!(
                    "{} describes preset {}, not {preset}",
                    path.display(),
                    spec.preset
                )));
            }
            spec
        }
        None => preset_spec(preset, &run.out),
    };
    run.apply(&mut spec)?;
    spec.validate()?;
    if preset == Preset::Example2 {
        run_experiment(&spec)?;
        let report = lab::example2_report()?;
        println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
        return Ok(());
    }
    execute(&spec).map(|_| ())
}

fn assumptions(scenario: &ScenarioArgs) -> Result<(), Failure> {
    let cfg = scenario.resolve(base_default())?;
    let report = check_assumptions(&cfg)?;
    let prediction = predict(&cfg);
    let monotonicity = monotonicity_table(cfg.scenario()).ok();
    let out = json!({
        "config": cfg,
        "assumptions": report,
        "monotonicity": monotonicity,
        "prediction": prediction.as_ref().ok(),
        "prediction_error": prediction.as_ref().err().map(|e| e.to_string()),
    });
    println!("{}", serde_json::to_string_pretty(&out).expect("report serializes"));
    prediction.map(|_| ()).map_err(Failure::from)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Spectrum { scenario, run } => spectrum(scenario, run),
        Command::RateSweep {
            scenario,
            run,
            param,
            values,
        } => rate_sweep(scenario, run, param, values.as_deref()),
        Command::MixtureSweep {
            scenario,
            run,
            kind,
            values,
        } => mixture_sweep(scenario, run, *kind, values.as_deref()),
        Command::Reproduce { preset, config, run } => reproduce(preset, config.as_deref(), run),
        Command::CheckAssumptions { scenario } => assumptions(scenario),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
