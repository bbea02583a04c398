//! Experiment orchestration: seeded sweeps over scenario parameters, each
//! cell comparing the closed-form rate, the eigensolver and a simulated
//! trajectory, written out as CSV and JSON.

pub mod examples;
pub mod export;
pub mod presets;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{self, StopReason};
use crate::error::{Error, Result};
use crate::influence::{build_influence, InfluenceMatrix};
use crate::netgen::{generate, Mixture, ScenarioConfig};
use crate::spectral::{self, RateRegime, Spectrum};
use crate::theory::{self, with_mm_m0, with_pp_mm, RatePrediction};

pub use examples::{enumerate_triangle_balance, example1_matrices, example2_report, Example2Report, TriangleTypeProbs};
pub use export::{export_csv, export_spectrum_json, read_csv, SpectrumDocument, CSV_HEADER};
pub use presets::{grid, preset_spec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    Example1,
    Example2,
    Spectrum,
    RateVsN,
    #[serde(rename = "rate-vs-P", alias = "rate-vs-p")]
    RateVsP,
    RateVsD,
    MixtureSweep,
}

impl Preset {
    pub const ALL: [Preset; 7] = [
        Preset::Example1,
        Preset::Example2,
        Preset::Spectrum,
        Preset::RateVsN,
        Preset::RateVsP,
        Preset::RateVsD,
        Preset::MixtureSweep,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Preset::Example1 => "example1",
            Preset::Example2 => "example2",
            Preset::Spectrum => "spectrum",
            Preset::RateVsN => "rate-vs-n",
            Preset::RateVsP => "rate-vs-P",
            Preset::RateVsD => "rate-vs-d",
            Preset::MixtureSweep => "mixture-sweep",
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.id().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                let names: Vec<_> = Preset::ALL.iter().map(|p| p.id()).collect();
                Error::Config(format!("unknown preset '{s}' (expected one of {})", names.join(", ")))
            })
    }
}

/// The quantity a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SweepParam {
    #[serde(rename = "n")]
    N,
    #[serde(rename = "P", alias = "p")]
    P,
    #[serde(rename = "d")]
    D,
    /// Share of (+/+) pairs in a (+/+)/(−/−) mixture.
    #[serde(rename = "P_pp")]
    PlusPlusShare,
    /// Share of (−/−) pairs in a (−/−)/(−/0) mixture.
    #[serde(rename = "P_mm")]
    MinusMinusShare,
    /// Index of a hand-written example matrix.
    #[serde(rename = "matrix")]
    Matrix,
}

impl SweepParam {
    pub fn id(self) -> &'static str {
        match self {
            SweepParam::N => "n",
            SweepParam::P => "P",
            SweepParam::D => "d",
            SweepParam::PlusPlusShare => "P_pp",
            SweepParam::MinusMinusShare => "P_mm",
            SweepParam::Matrix => "matrix",
        }
    }
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "n" => Ok(SweepParam::N),
            "P" | "p" => Ok(SweepParam::P),
            "d" => Ok(SweepParam::D),
            "P_pp" | "p_pp" => Ok(SweepParam::PlusPlusShare),
            "P_mm" | "p_mm" => Ok(SweepParam::MinusMinusShare),
            "matrix" => Ok(SweepParam::Matrix),
            _ => Err(Error::Config(format!("unknown sweep parameter '{s}' (expected n, P, d, P_pp, P_mm or matrix)"))),
        }
    }
}

/// One parameter varied over `values`, optionally under its own interaction
/// proportions instead of the base ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub proportions: Option<Mixture>,
    pub param: SweepParam,
    pub values: Vec<f64>,
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunOptions {
    /// Simulate the opinion iteration and fit its decay rate.
    #[serde(default = "default_true")]
    pub dynamics: bool,
    /// Write one spectrum JSON per cell under `spectra/`.
    pub write_spectra: bool,
    /// Fill `wall_ms`; off by default so that repeated runs give identical bytes.
    pub record_timing: bool,
    /// Run cells on the rayon pool.
    #[serde(default = "default_true")]
    pub parallel: bool,
    /// Distance from +1 within which an eigenvalue counts as unit.
    pub one_tol: f64,
    pub k_max: usize,
    pub step_tol: f64,
    pub window: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            dynamics: true,
            write_spectra: false,
            record_timing: false,
            parallel: true,
            one_tol: spectral::DEFAULT_ONE_TOL,
            k_max: dynamics::DEFAULT_K_MAX,
            step_tol: dynamics::DEFAULT_STEP_TOL,
            window: dynamics::DEFAULT_WINDOW,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub preset: Preset,
    pub base: ScenarioConfig,
    #[serde(default)]
    pub sweeps: Vec<Sweep>,
    pub seeds: Vec<u64>,
    pub outputs: PathBuf,
    #[serde(default)]
    pub options: RunOptions,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        if self.seeds.is_empty() {
            return Err(Error::Config("seed list is empty".into()));
        }
        if self.preset != Preset::Example2 && self.sweeps.is_empty() {
            return Err(Error::Config(format!("preset {} needs at least one sweep", self.preset)));
        }
        let o = &self.options;
        if !(o.one_tol > 0.0) || !(o.step_tol > 0.0) || o.window == 0 || o.k_max == 0 {
            return Err(Error::Config("run options need positive tolerances, window and k_max".into()));
        }
        for sw in &self.sweeps {
            if sw.values.is_empty() {
                return Err(Error::Config(format!("sweep over {} has no values", sw.param.id())));
            }
            if let Some(v) = sw.values.iter().find(|v| !v.is_finite()) {
                return Err(Error::Config(format!("sweep over {} has non-finite value {v}", sw.param.id())));
            }
            if sw.values.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Config(format!("sweep values over {} must be strictly increasing", sw.param.id())));
            }
            if let Some(Mixture::Complex(p)) = &sw.proportions {
                p.validate()?;
            }
            match sw.param {
                SweepParam::N => {
                    if let Some(v) = sw.values.iter().find(|v| v.fract() != 0.0 || **v < 2.0) {
                        return Err(Error::Config(format!("population sizes must be integers ≥ 2, got {v}")));
                    }
                }
                SweepParam::Matrix => {
                    if self.preset != Preset::Example1 {
                        return Err(Error::Config("matrix sweeps belong to the example1 preset".into()));
                    }
                    if let Some(v) = sw.values.iter().find(|v| ![1.0, 2.0, 3.0].contains(*v)) {
                        return Err(Error::Config(format!("example matrices are numbered 1 to 3, got {v}")));
                    }
                }
                _ => {}
            }
        }
        Ok(())
    }

    pub fn from_json_str(s: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }

    pub fn load(path: &Path) -> Result<Self> {
        load_json(path)
    }
}

pub fn load_scenario_config(path: &Path) -> Result<ScenarioConfig> {
    load_json(path)
}

fn load_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Json {
        path: path.to_path_buf(),
        source: e,
    })
}

/// One row of the results table. Absent quantities are written as empty
/// fields and infinite rates as `inf`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub scenario: String,
    pub param: String,
    pub value: f64,
    pub seed: u64,
    pub r_theory: Option<f64>,
    pub r_spectral: Option<f64>,
    pub r_dynamics: Option<f64>,
    pub modulus_theory: Option<f64>,
    pub modulus_spectral: Option<f64>,
    pub regime: String,
    pub wall_ms: u64,
    /// First failure of the cell, if any; kept out of the CSV.
    #[serde(skip)]
    pub error: Option<String>,
}

/// Label of a spectral regime in the results table.
pub fn rate_regime_label(r: RateRegime) -> &'static str {
    match r {
        RateRegime::SubunitRadius => "subunit-radius",
        RateRegime::UnitRadiusSecond => "unit-radius-second",
        RateRegime::AllUnit => "all-unit",
    }
}

/// Everything one cell produced.
#[derive(Debug, Clone)]
pub struct CellOutcome {
    pub record: SweepRecord,
    pub spectrum: Option<Spectrum>,
    pub prediction: Option<RatePrediction>,
}

fn scenario_label(param: SweepParam, cfg: &ScenarioConfig) -> String {
    match param {
        SweepParam::PlusPlusShare => "pp-mm".into(),
        SweepParam::MinusMinusShare => "mm-m0".into(),
        SweepParam::Matrix => "example1".into(),
        _ => cfg.scenario().id().into(),
    }
}

/// Configuration of one sweep point, before the seed is applied.
pub fn cell_config(base: &ScenarioConfig, sweep: &Sweep, value: f64) -> Result<ScenarioConfig> {
    let mut cfg = base.clone();
    if let Some(m) = sweep.proportions {
        cfg.proportions = m;
    }
    match sweep.param {
        SweepParam::N => cfg.n = value as usize,
        SweepParam::P => cfg.p = value,
        SweepParam::D => cfg.d = value,
        SweepParam::PlusPlusShare => cfg = with_pp_mm(value, &cfg)?,
        SweepParam::MinusMinusShare => cfg = with_mm_m0(value, &cfg)?,
        SweepParam::Matrix => {}
    }
    cfg.validate()?;
    Ok(cfg)
}

fn influence_for(sweep: &Sweep, value: f64, cfg: &ScenarioConfig) -> Result<InfluenceMatrix> {
    match sweep.param {
        SweepParam::Matrix => {
            let k = value as usize;
            let m = example1_matrices()
                .into_iter()
                .nth(k.wrapping_sub(1))
                .ok_or_else(|| Error::Config(format!("no example matrix {value}")))?;
            InfluenceMatrix::from_weights(m)
        }
        _ => {
            if cfg.n > spectral::SOLVER_CAP {
                return Err(Error::TooLarge {
                    n: cfg.n,
                    cap: spectral::SOLVER_CAP,
                });
            }
            build_influence(&generate(cfg)?, cfg.d)
        }
    }
}

/// Decay rate of a simulated trajectory from seeded random opinions. Stable
/// systems are measured against the exact zero limit, others against the
/// average of the converged tail.
pub fn dynamics_rate(w: &InfluenceMatrix, seed: u64, regime: RateRegime, opts: &RunOptions) -> Result<f64> {
    let x0 = dynamics::random_opinions(w.n(), seed);
    let traj = dynamics::simulate(w, &x0, opts.k_max, opts.step_tol)?;
    if regime == RateRegime::SubunitRadius {
        let zero = DVector::zeros(w.n());
        return dynamics::empirical_rate(&traj, &zero, opts.window, true);
    }
    if traj.stop_reason == StopReason::MaxIters {
        return Err(Error::NotConverged);
    }
    dynamics::empirical_rate(&traj, &traj.tail_average(), opts.window, false)
}

/// Runs one (sweep value, seed) cell. Failures are recorded on the record
/// rather than returned.
pub fn run_cell(base: &ScenarioConfig, sweep: &Sweep, value: f64, seed: u64, opts: &RunOptions) -> CellOutcome {
    let start = Instant::now();
    let mut record = SweepRecord {
        scenario: String::new(),
        param: sweep.param.id().into(),
        value,
        seed,
        r_theory: None,
        r_spectral: None,
        r_dynamics: None,
        modulus_theory: None,
        modulus_spectral: None,
        regime: "error".into(),
        wall_ms: 0,
        error: None,
    };
    fn note(e: Error, record: &mut SweepRecord) {
        record.error.get_or_insert_with(|| e.to_string());
    }
    let cfg = match cell_config(base, sweep, value) {
        Ok(c) => c.with_seed(seed),
        Err(e) => {
            record.scenario = "invalid".into();
            note(e, &mut record);
            return CellOutcome {
                record,
                spectrum: None,
                prediction: None,
            };
        }
    };
    record.scenario = scenario_label(sweep.param, &cfg);

    let prediction = if sweep.param == SweepParam::Matrix {
        None
    } else {
        match theory::predict(&cfg) {
            Ok(p) => {
                record.r_theory = Some(p.rate);
                record.modulus_theory = Some(p.governing_modulus);
                record.regime = p.regime.label().into();
                Some(p)
            }
            Err(e) => {
                note(e, &mut record);
                None
            }
        }
    };

    let mut spectrum = None;
    match influence_for(sweep, value, &cfg) {
        Ok(w) => match spectral::eigenvalues(w.matrix()).and_then(|s| {
            let r = spectral::rate_from_spectrum(&s, opts.one_tol)?;
            Ok((s, r))
        }) {
            Ok((s, r)) => {
                record.r_spectral = Some(r.rate);
                record.modulus_spectral = Some(r.governing_modulus);
                if prediction.is_none() {
                    record.regime = rate_regime_label(r.regime).into();
                }
                if opts.dynamics {
                    match dynamics_rate(&w, seed, r.regime, opts) {
                        Ok(rate) => record.r_dynamics = Some(rate),
                        Err(e) => note(e, &mut record),
                    }
                }
                spectrum = Some(s);
            }
            Err(e) => note(e, &mut record),
        },
        Err(e) => note(e, &mut record),
    }
    if opts.record_timing {
        record.wall_ms = start.elapsed().as_millis() as u64;
    }
    CellOutcome {
        record,
        spectrum,
        prediction,
    }
}

/// Cells in output order: sweeps, then values, then seeds.
fn cells(spec: &ExperimentSpec) -> Vec<(usize, f64, u64)> {
    spec.sweeps
        .iter()
        .enumerate()
        .flat_map(|(i, sw)| {
            sw.values
                .iter()
                .flat_map(move |&v| spec.seeds.iter().map(move |&s| (i, v, s)))
        })
        .collect()
}

fn spectrum_file_name(rec: &SweepRecord) -> String {
    format!("{}_{}-{}_seed{}.json", rec.scenario, rec.param, rec.value, rec.seed)
}

/// Runs every cell without touching the disk. Parallel and serial execution
/// give identical results in identical order.
pub fn run_cells(spec: &ExperimentSpec) -> Result<Vec<CellOutcome>> {
    spec.validate()?;
    let list = cells(spec);
    let one = |&(i, v, s): &(usize, f64, u64)| run_cell(&spec.base, &spec.sweeps[i], v, s, &spec.options);
    Ok(if spec.options.parallel {
        list.par_iter().map(one).collect()
    } else {
        list.iter().map(one).collect()
    })
}

/// Runs the experiment and writes `<preset>.csv` into the output directory,
/// plus `spectra/*.json` when requested and `example2.json` for that preset.
/// Per-cell failures are kept in the records; output failures abort.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<SweepRecord>> {
    spec.validate()?;
    fs::create_dir_all(&spec.outputs).map_err(|e| Error::io(&spec.outputs, e))?;
    if spec.preset == Preset::Example2 {
        export::write_json(&example2_report()?, &spec.outputs.join("example2.json"), true)?;
        if spec.sweeps.is_empty() {
            return Ok(Vec::new());
        }
    }
    let outcomes = run_cells(spec)?;
    if spec.options.write_spectra {
        let dir = spec.outputs.join("spectra");
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        for o in &outcomes {
            if let Some(s) = &o.spectrum {
                let geometry = o.prediction.as_ref().map(|p| &p.geometry);
                let outlier = o.prediction.and_then(|p| p.lambda_outlier);
                export_spectrum_json(s, geometry, outlier, &dir.join(spectrum_file_name(&o.record)))?;
            }
        }
    }
    let records: Vec<SweepRecord> = outcomes.into_iter().map(|o| o.record).collect();
    export_csv(&records, &spec.outputs.join(format!("{}.csv", spec.preset)))?;
    Ok(records)
}
