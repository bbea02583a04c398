//! Parameter grids of the published figures, capped at desk scale.

use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::netgen::{Mixture, Scenario, ScenarioConfig};

use super::{ExperimentSpec, Preset, RunOptions, Sweep, SweepParam};

/// Largest population any preset generates.
pub const PRESET_N_CAP: usize = 1500;
/// Seeds `0..DEFAULT_SEEDS` unless overridden.
pub const DEFAULT_SEEDS: u64 = 10;

/// `start:step:stop` in the inclusive colon notation of the tables. Each
/// point is computed from its index and rounded to 12 decimals so that
/// 0.1:0.05:0.9 yields exactly 0.15, 0.2, …
pub fn grid(start: f64, step: f64, stop: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !start.is_finite() || !stop.is_finite() || stop < start {
        return Err(Error::Config(format!("invalid grid {start}:{step}:{stop}")));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..count)
        .map(|k| ((start + k as f64 * step) * 1e12).round() / 1e12)
        .collect())
}

/// Grids of one figure row: population, connectivity, self-confidence.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrids {
    pub n: Vec<f64>,
    pub p: Vec<f64>,
    pub d: Vec<f64>,
}

/// Random-mixture grids.
pub fn random_mixture_grids() -> SweepGrids {
    SweepGrids {
        n: grid(100.0, 100.0, 1500.0).unwrap(),
        p: grid(0.1, 0.05, 0.9).unwrap(),
        d: grid(10.0, 10.0, 100.0).unwrap(),
    }
}

/// Pure-type grids.
pub fn pure_type_grids() -> SweepGrids {
    SweepGrids {
        n: grid(50.0, 50.0, 1500.0).unwrap(),
        p: grid(0.05, 0.05, 1.0).unwrap(),
        d: grid(3.0, 4.0, 47.0).unwrap(),
    }
}

pub fn grids_for(scenario: Scenario) -> SweepGrids {
    match scenario {
        Scenario::RandomMixture => random_mixture_grids(),
        _ => pure_type_grids(),
    }
}

/// Operating point shared by every figure: `n = 500, P = 0.5, d = 5`.
pub fn base_config(proportions: Mixture) -> ScenarioConfig {
    ScenarioConfig::new(500, 0.5, 5.0, proportions)
}

/// Mixture proportion grid `0:0.1:1`.
pub fn mixture_grid() -> Vec<f64> {
    grid(0.0, 0.1, 1.0).unwrap()
}

fn scenario_sweeps(param: SweepParam, pick: impl Fn(SweepGrids) -> Vec<f64>) -> Vec<Sweep> {
    Scenario::SWEEP
        .iter()
        .map(|&s| Sweep {
            proportions: s.mixture(),
            param,
            values: pick(grids_for(s)),
        })
        .collect()
}

/// The experiment a preset stands for, writing into `outputs`.
pub fn preset_spec(preset: Preset, outputs: impl Into<PathBuf>) -> ExperimentSpec {
    let seeds: Vec<u64> = (0..DEFAULT_SEEDS).collect();
    let base = base_config(Mixture::Random);
    let (sweeps, seeds, options) = match preset {
        Preset::Example1 => (
            vec![Sweep {
                proportions: None,
                param: SweepParam::Matrix,
                values: vec![1.0, 2.0, 3.0],
            }],
            vec![0],
            RunOptions::default(),
        ),
        Preset::Example2 => (Vec::new(), vec![0], RunOptions::default()),
        Preset::Spectrum => (
            Scenario::SWEEP
                .iter()
                .map(|&s| Sweep {
                    proportions: s.mixture(),
                    param: SweepParam::N,
                    values: vec![500.0],
                })
                .collect(),
            vec![0],
            RunOptions {
                write_spectra: true,
                ..RunOptions::default()
            },
        ),
        Preset::RateVsN => (scenario_sweeps(SweepParam::N, |g| g.n), seeds, RunOptions::default()),
        Preset::RateVsP => (scenario_sweeps(SweepParam::P, |g| g.p), seeds, RunOptions::default()),
        Preset::RateVsD => (scenario_sweeps(SweepParam::D, |g| g.d), seeds, RunOptions::default()),
        Preset::MixtureSweep => (
            vec![
                Sweep {
                    proportions: None,
                    param: SweepParam::PlusPlusShare,
                    values: mixture_grid(),
                },
                Sweep {
                    proportions: None,
                    param: SweepParam::MinusMinusShare,
                    values: mixture_grid(),
                },
            ],
            seeds,
            RunOptions::default(),
        ),
    };
    ExperimentSpec {
        preset,
        base,
        sweeps,
        seeds,
        outputs: outputs.into(),
        options,
    }
}
