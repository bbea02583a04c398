//! Benchmark fixtures shared by the criterion targets.

use consensus_rate::netgen::generate;
use consensus_rate::{build_influence, InfluenceMatrix, Mixture, ScenarioConfig};

/// Random-mixture influence matrix at the figures' operating point.
pub fn random_mixture_influence(n: usize) -> InfluenceMatrix {
    let cfg = ScenarioConfig::new(n, 0.5, 5.0, Mixture::Random);
    build_influence(&generate(&cfg).expect("valid config"), cfg.d).expect("positive self-confidence")
}
