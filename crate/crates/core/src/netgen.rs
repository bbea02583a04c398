//! Seeded random interaction networks and the moment statistics the theory
//! consumes.
//!
//! Every unordered pair `{lo, hi}` draws from its own ChaCha8 stream keyed by
//! the pair index, in a fixed order: interaction uniform, type uniform,
//! orientation, magnitudes. Networks are therefore independent of thread
//! scheduling, and for a fixed seed a network at connectivity `P` contains
//! every pair present at any smaller `P`, while the network on `n` nodes is
//! the leading principal block of the one on `n + 1` nodes.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::graph::{NetworkMeta, SignedNetwork};

/// Tolerance on `Σ proportions = 1`.
pub const PROPORTION_TOL: f64 = 1e-12;

/// Law of the interaction strength `Z` (mean zero).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum DistributionSpec {
    Normal { sigma: f64 },
    /// Magnitudes drawn uniformly from `magnitudes` with a fair random sign.
    CustomSymmetric { magnitudes: Vec<f64> },
}

impl Default for DistributionSpec {
    fn default() -> Self {
        DistributionSpec::Normal { sigma: 1.0 }
    }
}

impl DistributionSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            DistributionSpec::Normal { sigma } => {
                if !(*sigma > 0.0 && sigma.is_finite()) {
                    return Err(Error::Config(format!("sigma must be positive, got {sigma}")));
                }
            }
            DistributionSpec::CustomSymmetric { magnitudes } => {
                if magnitudes.is_empty() {
                    return Err(Error::Config("custom distribution needs magnitudes".into()));
                }
                if magnitudes.iter().any(|m| !m.is_finite()) {
                    return Err(Error::Config("custom magnitudes must be finite".into()));
                }
                if self.variance() <= 0.0 {
                    return Err(Error::Config("custom distribution has zero variance".into()));
                }
            }
        }
        Ok(())
    }

    /// `σ² = 𝔼(Z²)`.
    pub fn variance(&self) -> f64 {
        match self {
            DistributionSpec::Normal { sigma } => sigma * sigma,
            DistributionSpec::CustomSymmetric { magnitudes } => {
                magnitudes.iter().map(|m| m * m).sum::<f64>() / magnitudes.len() as f64
            }
        }
    }

    /// `𝔼(|Z|)`.
    pub fn abs_mean(&self) -> f64 {
        match self {
            DistributionSpec::Normal { sigma } => sigma * (2.0 / std::f64::consts::PI).sqrt(),
            DistributionSpec::CustomSymmetric { magnitudes } => {
                magnitudes.iter().map(|m| m.abs()).sum::<f64>() / magnitudes.len() as f64
            }
        }
    }

    fn sample_abs<R: Rng>(&self, rng: &mut R) -> f64 {
        match self {
            DistributionSpec::Normal { sigma } => {
                let z: f64 = rng.sample(StandardNormal);
                (sigma * z).abs()
            }
            DistributionSpec::CustomSymmetric { magnitudes } => {
                magnitudes[rng.random_range(0..magnitudes.len())].abs()
            }
        }
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        match self {
            DistributionSpec::Normal { sigma } => {
                let z: f64 = rng.sample(StandardNormal);
                sigma * z
            }
            DistributionSpec::CustomSymmetric { .. } => {
                let m = self.sample_abs(rng);
                if rng.random::<bool>() {
                    m
                } else {
                    -m
                }
            }
        }
    }
}

/// Sign pattern of an interacting pair `(S_ij, S_ji)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum InteractionType {
    /// Mutual trust.
    #[serde(rename = "+/+")]
    PlusPlus,
    /// Mutual mistrust.
    #[serde(rename = "-/-")]
    MinusMinus,
    /// Trust one way, mistrust the other.
    #[serde(rename = "+/-")]
    PlusMinus,
    /// Unilateral trust.
    #[serde(rename = "+/0")]
    PlusZero,
    /// Unilateral mistrust.
    #[serde(rename = "-/0")]
    MinusZero,
}

impl InteractionType {
    pub const ALL: [InteractionType; 5] = [
        InteractionType::PlusPlus,
        InteractionType::MinusMinus,
        InteractionType::PlusMinus,
        InteractionType::PlusZero,
        InteractionType::MinusZero,
    ];

    pub fn label(self) -> &'static str {
        match self {
            InteractionType::PlusPlus => "+/+",
            InteractionType::MinusMinus => "-/-",
            InteractionType::PlusMinus => "+/-",
            InteractionType::PlusZero => "+/0",
            InteractionType::MinusZero => "-/0",
        }
    }

    /// Short identifier usable in file names.
    pub fn id(self) -> &'static str {
        match self {
            InteractionType::PlusPlus => "pp",
            InteractionType::MinusMinus => "mm",
            InteractionType::PlusMinus => "pm",
            InteractionType::PlusZero => "p0",
            InteractionType::MinusZero => "m0",
        }
    }
}

impl FromStr for InteractionType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        InteractionType::ALL
            .into_iter()
            .find(|t| t.label() == s || t.id() == s)
            .ok_or_else(|| Error::Config(format!("unknown interaction type '{s}'")))
    }
}

/// Proportions of the five interaction types among interacting pairs.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Proportions {
    #[serde(default)]
    pub pp: f64,
    #[serde(default)]
    pub mm: f64,
    #[serde(default)]
    pub pm: f64,
    #[serde(default)]
    pub p0: f64,
    #[serde(default)]
    pub m0: f64,
}

impl Proportions {
    pub fn pure(t: InteractionType) -> Self {
        let mut p = Proportions::default();
        *p.get_mut(t) = 1.0;
        p
    }

    pub fn get(&self, t: InteractionType) -> f64 {
        match t {
            InteractionType::PlusPlus => self.pp,
            InteractionType::MinusMinus => self.mm,
            InteractionType::PlusMinus => self.pm,
            InteractionType::PlusZero => self.p0,
            InteractionType::MinusZero => self.m0,
        }
    }

    fn get_mut(&mut self, t: InteractionType) -> &mut f64 {
        match t {
            InteractionType::PlusPlus => &mut self.pp,
            InteractionType::MinusMinus => &mut self.mm,
            InteractionType::PlusMinus => &mut self.pm,
            InteractionType::PlusZero => &mut self.p0,
            InteractionType::MinusZero => &mut self.m0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for t in InteractionType::ALL {
            let v = self.get(t);
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Config(format!("proportion of {} is {v}", t.label())));
            }
        }
        let total: f64 = InteractionType::ALL.iter().map(|&t| self.get(t)).sum();
        if (total - 1.0).abs() > PROPORTION_TOL {
            return Err(Error::Config(format!("proportions sum to {total}, not 1")));
        }
        Ok(())
    }

    /// The single type carrying all the mass, if any.
    pub fn pure_type(&self) -> Option<InteractionType> {
        InteractionType::ALL.into_iter().find(|&t| self.get(t) == 1.0)
    }

    /// Parses `pp,mm,pm,p0,m0`.
    pub fn parse_list(s: &str) -> Result<Self> {
        let v: Vec<f64> = s
            .split(',')
            .map(|x| {
                x.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Config(format!("bad proportion '{x}': {e}")))
            })
            .collect::<Result<_>>()?;
        if v.len() != 5 {
            return Err(Error::Config(format!(
                "expected five proportions pp,mm,pm,p0,m0, got {}",
                v.len()
            )));
        }
        let p = Proportions {
            pp: v[0],
            mm: v[1],
            pm: v[2],
            p0: v[3],
            m0: v[4],
        };
        p.validate()?;
        Ok(p)
    }
}

/// Either independent signed draws per direction, or a five-type mixture.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mixture {
    Random,
    Complex(Proportions),
}

const RANDOM_MIXTURE_TAG: &str = "random-mixture";

impl Serialize for Mixture {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Mixture::Random => ser.serialize_str(RANDOM_MIXTURE_TAG),
            Mixture::Complex(p) => p.serialize(ser),
        }
    }
}

impl<'de> Deserialize<'de> for Mixture {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Tag(String),
            Props(Proportions),
        }
        match Repr::deserialize(de)? {
            Repr::Tag(t) if t == RANDOM_MIXTURE_TAG => Ok(Mixture::Random),
            Repr::Tag(t) => Err(serde::de::Error::custom(format!(
                "unknown proportions tag '{t}' (expected '{RANDOM_MIXTURE_TAG}' or an object)"
            ))),
            Repr::Props(p) => Ok(Mixture::Complex(p)),
        }
    }
}

/// Named scenario for reporting and for the monotonicity claims.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scenario {
    RandomMixture,
    Pure(InteractionType),
    /// Any other complex mixture.
    Mixed,
}

impl Scenario {
    /// The six scenarios of the parameter sweeps.
    pub const SWEEP: [Scenario; 6] = [
        Scenario::RandomMixture,
        Scenario::Pure(InteractionType::PlusPlus),
        Scenario::Pure(InteractionType::PlusMinus),
        Scenario::Pure(InteractionType::PlusZero),
        Scenario::Pure(InteractionType::MinusMinus),
        Scenario::Pure(InteractionType::MinusZero),
    ];

    pub fn of(mixture: &Mixture) -> Self {
        match mixture {
            Mixture::Random => Scenario::RandomMixture,
            Mixture::Complex(p) => p.pure_type().map_or(Scenario::Mixed, Scenario::Pure),
        }
    }

    pub fn mixture(self) -> Option<Mixture> {
        match self {
            Scenario::RandomMixture => Some(Mixture::Random),
            Scenario::Pure(t) => Some(Mixture::Complex(Proportions::pure(t))),
            Scenario::Mixed => None,
        }
    }

    pub fn id(self) -> &'static str {
        match self {
            Scenario::RandomMixture => RANDOM_MIXTURE_TAG,
            Scenario::Pure(t) => t.id(),
            Scenario::Mixed => "mixed",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            RANDOM_MIXTURE_TAG | "random" => Ok(Scenario::RandomMixture),
            "mixed" => Ok(Scenario::Mixed),
            _ => s.parse().map(Scenario::Pure),
        }
    }
}

fn default_distribution() -> DistributionSpec {
    DistributionSpec::default()
}

/// Every closed-form and generator input for one network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub n: usize,
    /// Probability that an unordered pair interacts.
    #[serde(rename = "P", alias = "p")]
    pub p: f64,
    /// Self-confidence level.
    pub d: f64,
    #[serde(default = "default_distribution")]
    pub dist: DistributionSpec,
    pub proportions: Mixture,
    #[serde(default)]
    pub seed: u64,
}

impl ScenarioConfig {
    pub fn new(n: usize, p: f64, d: f64, proportions: Mixture) -> Self {
        Self {
            n,
            p,
            d,
            dist: DistributionSpec::default(),
            proportions,
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::Config(format!("n must be at least 2, got {}", self.n)));
        }
        if !(self.p > 0.0 && self.p <= 1.0) {
            return Err(Error::Config(format!("P must lie in (0, 1], got {}", self.p)));
        }
        if !(self.d > 0.0 && self.d.is_finite()) {
            return Err(Error::NonPositiveConfidence(self.d));
        }
        self.dist.validate()?;
        if let Mixture::Complex(p) = &self.proportions {
            p.validate()?;
        }
        Ok(())
    }

    pub fn scenario(&self) -> Scenario {
        Scenario::of(&self.proportions)
    }
}

/// Index of the unordered pair `{lo, hi}` (`lo < hi`), independent of `n`.
fn pair_key(lo: usize, hi: usize) -> u64 {
    (hi as u64) * (hi as u64 - 1) / 2 + lo as u64
}

/// Generates the network described by `cfg`.
pub fn generate(cfg: &ScenarioConfig) -> Result<SignedNetwork> {
    match cfg.proportions {
        Mixture::Random => gen_random_mixture(cfg),
        Mixture::Complex(_) => gen_complex_mixture(cfg),
    }
}

/// Each pair interacts with probability `P`; both directions then take
/// independent draws of `Z`.
pub fn gen_random_mixture(cfg: &ScenarioConfig) -> Result<SignedNetwork> {
    cfg.validate()?;
    if cfg.proportions != Mixture::Random {
        return Err(Error::Config("configuration is not a random mixture".into()));
    }
    fill_pairs(cfg, |rng, dist| {
        let forward = dist.sample(rng);
        let backward = dist.sample(rng);
        (forward, backward)
    })
}

/// Each pair interacts with probability `P` and then takes one of the five
/// interaction types; magnitudes are draws of `|Z|`.
pub fn gen_complex_mixture(cfg: &ScenarioConfig) -> Result<SignedNetwork> {
    cfg.validate()?;
    let Mixture::Complex(props) = cfg.proportions else {
        return Err(Error::Config("configuration is not a complex mixture".into()));
    };
    let mut cumulative = [0.0; 5];
    let mut acc = 0.0;
    for (k, t) in InteractionType::ALL.into_iter().enumerate() {
        acc += props.get(t);
        cumulative[k] = acc;
    }
    // Rounding can leave the last bound just below 1; fall back to the last
    // type with positive mass.
    let last = InteractionType::ALL
        .into_iter()
        .rev()
        .find(|&t| props.get(t) > 0.0)
        .expect("validated proportions have positive mass");

    fill_pairs(cfg, move |rng, dist| {
        let u: f64 = rng.random();
        let ty = InteractionType::ALL
            .into_iter()
            .zip(cumulative)
            .find(|&(_, c)| u < c)
            .map_or(last, |(t, _)| t);
        let flip: bool = rng.random();
        let a = dist.sample_abs(rng);
        let b = dist.sample_abs(rng);
        let (x, y) = match ty {
            InteractionType::PlusPlus => (a, b),
            InteractionType::MinusMinus => (-a, -b),
            InteractionType::PlusMinus => (a, -b),
            InteractionType::PlusZero => (a, 0.0),
            InteractionType::MinusZero => (-a, 0.0),
        };
        if flip {
            (y, x)
        } else {
            (x, y)
        }
    })
}

/// Runs `draw` on the stream of every interacting pair and stores the result
/// as `(S[lo][hi], S[hi][lo])`.
fn fill_pairs<F>(cfg: &ScenarioConfig, draw: F) -> Result<SignedNetwork>
where
    F: Fn(&mut ChaCha8Rng, &DistributionSpec) -> (f64, f64) + Sync,
{
    let n = cfg.n;
    let base = ChaCha8Rng::seed_from_u64(cfg.seed);
    let rows: Vec<Vec<(usize, f64, f64)>> = (1..n)
        .into_par_iter()
        .map(|hi| {
            let mut out = Vec::new();
            for lo in 0..hi {
                let mut rng = base.clone();
                rng.set_stream(pair_key(lo, hi));
                let u: f64 = rng.random();
                if u < cfg.p {
                    let (fwd, bwd) = draw(&mut rng, &cfg.dist);
                    out.push((lo, fwd, bwd));
                }
            }
            out
        })
        .collect();
    let mut s = DMatrix::zeros(n, n);
    for (hi, row) in (1..n).zip(rows) {
        for (lo, fwd, bwd) in row {
            s[(lo, hi)] = fwd;
            s[(hi, lo)] = bwd;
        }
    }
    Ok(SignedNetwork::new(s)?.with_meta(NetworkMeta {
        seed: cfg.seed,
        scenario: cfg.scenario().id().to_string(),
    }))
}

/// Aggregates of the type proportions and the statistics of the off-diagonal
/// influence weights.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentStats {
    /// Probability that a given direction of an interacting pair is nonzero.
    pub p_hat: f64,
    /// Signed counterpart of `p_hat`.
    pub p_bar: f64,
    /// Sign correlation between the two directions of a pair.
    pub p_star: f64,
    /// Expected row sum of `|S|`.
    pub c: f64,
    /// Self weight `d/(C+d)` with the row sum at its mean.
    pub w_ii: f64,
    /// Mean of an off-diagonal weight.
    pub mean: f64,
    /// Variance of an off-diagonal weight.
    pub var: f64,
    /// `𝔼(W_ij·W_ji)`.
    pub cross: f64,
    /// Correlation `(cross − mean²)/var` between mirrored weights.
    pub tau: f64,
}

impl MomentStats {
    /// `√(n·var)`, the bulk radius scale.
    pub fn bulk_scale(&self, n: usize) -> f64 {
        (n as f64 * self.var).sqrt()
    }
}

/// Closed-form moment statistics of `cfg`.
pub fn derived_stats(cfg: &ScenarioConfig) -> Result<MomentStats> {
    cfg.validate()?;
    let (p_hat, p_bar, p_star) = match cfg.proportions {
        Mixture::Random => (1.0, 0.0, 0.0),
        Mixture::Complex(p) => (
            p.pp + p.pm + p.mm + 0.5 * p.p0 + 0.5 * p.m0,
            p.pp - p.mm + 0.5 * p.p0 - 0.5 * p.m0,
            p.pp + p.mm - p.pm,
        ),
    };
    let sigma2 = cfg.dist.variance();
    let m1 = cfg.dist.abs_mean();
    let (n, pr, d) = (cfg.n as f64, cfg.p, cfg.d);
    let c = (n - 1.0) * pr * p_hat * m1;
    let scale = c + d;
    let mean = pr * p_bar * m1 / scale;
    let var = pr * p_hat * sigma2 / (scale * scale) - mean * mean;
    if !(var > 0.0) {
        return Err(Error::DegenerateMoments(format!(
            "weight variance {var} is not positive: need sigma^2 > P*Pbar^2*E|Z|^2/Phat \
             (sigma^2 = {sigma2}, P = {pr}, Pbar = {p_bar}, E|Z| = {m1}, Phat = {p_hat})"
        )));
    }
    let cross = pr * p_star * m1 * m1 / (scale * scale);
    Ok(MomentStats {
        p_hat,
        p_bar,
        p_star,
        c,
        w_ii: d / scale,
        mean,
        var,
        cross,
        tau: (cross - mean * mean) / var,
    })
}

/// Sample moments of a network over its ordered off-diagonal pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalStats {
    /// `𝔼(S_ij)`.
    pub mean: f64,
    /// `𝔼(|S_ij|)`.
    pub abs_mean: f64,
    /// `𝔼(S_ij²)`.
    pub sq_mean: f64,
    /// `𝔼(S_ij·S_ji)`.
    pub cross_mean: f64,
    /// Mean of the row sums of `|S|`.
    pub row_sum_mean: f64,
    /// Population standard deviation of the row sums of `|S|`.
    pub row_sum_std: f64,
}

pub fn empirical_stats(net: &SignedNetwork) -> EmpiricalStats {
    let s = net.entries();
    let n = net.n();
    let count = (n * (n - 1)).max(1) as f64;
    let (mut sum, mut abs, mut sq, mut cross) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let v = s[(i, j)];
                sum += v;
                abs += v.abs();
                sq += v * v;
                cross += v * s[(j, i)];
            }
        }
    }
    let rows = net.row_abs_sums();
    let row_mean = rows.iter().sum::<f64>() / n as f64;
    let row_var = rows.iter().map(|r| (r - row_mean).powi(2)).sum::<f64>() / n as f64;
    EmpiricalStats {
        mean: sum / count,
        abs_mean: abs / count,
        sq_mean: sq / count,
        cross_mean: cross / count,
        row_sum_mean: row_mean,
        row_sum_std: row_var.sqrt(),
    }
}
