//! The two worked examples: three hand-written 4-node influence matrices and
//! the balance probability of a random three-person network.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{is_structurally_balanced, SignedNetwork};
use crate::netgen::InteractionType;

/// Spectral radii quoted for the three example matrices.
pub const EXAMPLE1_RADII: [f64; 3] = [0.8536, 0.7203, 0.7818];

/// Unbalance probability quoted for the three-person example.
pub const EXAMPLE2_CLAIM: f64 = 0.8;

/// The three influence matrices; same magnitudes, different signs.
pub fn example1_matrices() -> [DMatrix<f64>; 3] {
    let w1 = DMatrix::from_row_slice(
        4,
        4,
        &[
            0.25, 0.25, -0.25, 0.25, //
            0.5, 0.5, 0.0, 0.0, //
            0.25, -0.25, 0.25, -0.25, //
            0.0, 0.0, -0.5, 0.5,
        ],
    );
    let mut w2 = w1.clone();
    w2[(3, 2)] = 0.5;
    let mut w3 = w2.clone();
    w3[(2, 3)] = 0.25;
    [w1, w2, w3]
}

/// Probabilities of the three interaction types of a random mixture.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TriangleTypeProbs {
    pub pp: f64,
    pub mm: f64,
    pub pm: f64,
}

impl TriangleTypeProbs {
    /// Sign pattern of independent symmetric draws.
    pub const RANDOM_MIXTURE: TriangleTypeProbs = TriangleTypeProbs {
        pp: 0.25,
        mm: 0.25,
        pm: 0.5,
    };

    fn validate(&self) -> Result<()> {
        let v = [self.pp, self.mm, self.pm];
        if v.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::Config(format!("type probabilities must be nonnegative, got {v:?}")));
        }
        let total: f64 = v.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Config(format!("type probabilities sum to {total}, not 1")));
        }
        Ok(())
    }
}

/// Probability that a fully connected three-person network is structurally
/// unbalanced, by enumerating all 27 type assignments of its three pairs.
pub fn enumerate_triangle_balance(probs: TriangleTypeProbs) -> Result<f64> {
    probs.validate()?;
    let types = [
        (InteractionType::PlusPlus, probs.pp),
        (InteractionType::MinusMinus, probs.mm),
        (InteractionType::PlusMinus, probs.pm),
    ];
    let pairs = [(0usize, 1usize), (0, 2), (1, 2)];
    let mut unbalanced = 0.0;
    for a in types {
        for b in types {
            for c in types {
                let mut s = DMatrix::zeros(3, 3);
                for (&(i, j), (t, _)) in pairs.iter().zip([a, b, c]) {
                    let (x, y) = match t {
                        InteractionType::PlusPlus => (1.0, 1.0),
                        InteractionType::MinusMinus => (-1.0, -1.0),
                        _ => (1.0, -1.0),
                    };
                    s[(i, j)] = x;
                    s[(j, i)] = y;
                }
                let net = SignedNetwork::new(s)?;
                if !is_structurally_balanced(&net, &[0, 1, 2])?.balanced {
                    unbalanced += a.1 * b.1 * c.1;
                }
            }
        }
    }
    Ok(unbalanced)
}

/// Enumerated unbalance probability next to the quoted one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Example2Report {
    pub type_probabilities: TriangleTypeProbs,
    pub enumerated_unbalanced: f64,
    pub quoted_unbalanced: f64,
}

pub fn example2_report() -> Result<Example2Report> {
    let probs = TriangleTypeProbs::RANDOM_MIXTURE;
    Ok(Example2Report {
        type_probabilities: probs,
        enumerated_unbalanced: enumerate_triangle_balance(probs)?,
        quoted_unbalanced: EXAMPLE2_CLAIM,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_type_laws() {
        let all_trust = TriangleTypeProbs { pp: 1.0, mm: 0.0, pm: 0.0 };
        assert_eq!(enumerate_triangle_balance(all_trust).unwrap(), 0.0);
        let all_mixed = TriangleTypeProbs { pp: 0.0, mm: 0.0, pm: 1.0 };
        assert_eq!(enumerate_triangle_balance(all_mixed).unwrap(), 1.0);
        let bad = TriangleTypeProbs { pp: 0.5, mm: 0.0, pm: 0.0 };
        assert!(enumerate_triangle_balance(bad).is_err());
    }

    #[test]
    fn example_matrices_differ_only_in_signs() {
        let [w1, w2, w3] = example1_matrices();
        assert_eq!(w1[(3, 2)], -w2[(3, 2)]);
        assert_eq!(w2.abs(), w1.abs());
        assert_eq!(w3.abs(), w1.abs());
    }
}
