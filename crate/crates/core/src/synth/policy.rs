use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::product::Product;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolicyKind {
    Prefix,
    Suffix,
    Return,
}

/// Sizes, objective and constraint slacks of one synthesis call.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub variables: usize,
    pub constraints: usize,
    pub objective: f64,
    /// Named constraint slacks; for `>=` rows, activity minus right-hand side.
    pub slacks: Vec<(String, f64)>,
    /// Smallest slack over the safety rows, if any.
    pub min_safety_slack: Option<f64>,
    /// Suffix only: long-run cost per step with the true costs.
    pub mean_cost: Option<f64>,
    /// Suffix only: expected steps between goal visits.
    pub cycle_length: Option<f64>,
}

/// Randomized policy over product states. Distributions are over choice
/// indices of the product the policy was synthesized for; states the policy
/// does not cover have an empty distribution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Policy {
    pub kind: PolicyKind,
    pub dist: Vec<Vec<(usize, f64)>>,
    pub diagnostics: Diagnostics,
}

impl Policy {
    pub fn covers(&self, s: usize) -> bool {
        self.dist.get(s).is_some_and(|d| !d.is_empty())
    }

    pub fn distribution(&self, s: usize) -> &[(usize, f64)] {
        &self.dist[s]
    }

    /// Samples a choice index at `s`.
    pub fn sample<R: Rng + ?Sized>(&self, s: usize, rng: &mut R) -> Option<usize> {
        let d = self.dist.get(s)?;
        let (&(last, _), rest) = d.split_last()?;
        let mut u: f64 = rng.random();
        for &(k, p) in rest {
            if u < p {
                return Some(k);
            }
            u -= p;
        }
        Some(last)
    }

    /// Most likely choice at `s`, lowest index on ties.
    pub fn mode(&self, s: usize) -> Option<usize> {
        let d = self.dist.get(s)?;
        let mut best: Option<(usize, f64)> = None;
        for &(k, p) in d {
            if best.is_none_or(|(bk, bp)| p > bp + 1e-12 || ((p - bp).abs() <= 1e-12 && k < bk)) {
                best = Some((k, p));
            }
        }
        best.map(|b| b.0)
    }

    /// Checks that every distribution sums to one and uses existing choices.
    pub fn check(&self, product: &Product) -> Result<(), String> {
        for (s, d) in self.dist.iter().enumerate() {
            if d.is_empty() {
                continue;
            }
            let sum: f64 = d.iter().map(|e| e.1).sum();
            if (sum - 1.0).abs() > 1e-9 {
                return Err(format!("distribution at {s} sums to {sum}"));
            }
            if d.iter().any(|&(k, p)| k >= product.choices[s].len() || p < 0.0) {
                return Err(format!("distribution at {s} uses an unknown choice"));
            }
        }
        Ok(())
    }
}

/// Normalizes weights into a distribution, dropping zero entries.
pub(crate) fn normalize(weights: Vec<(usize, f64)>) -> Vec<(usize, f64)> {
    let total: f64 = weights.iter().map(|w| w.1).sum();
    let kept: Vec<(usize, f64)> = weights.into_iter().filter(|w| w.1 > 0.0).collect();
    let mut out: Vec<(usize, f64)> = kept.iter().map(|&(k, w)| (k, w / total)).collect();
    // Put rounding residue on the largest entry.
    let residue = 1.0 - out.iter().map(|e| e.1).sum::<f64>();
    if let Some(max) = out.iter_mut().max_by(|a, b| a.1.total_cmp(&b.1)) {
        max.1 += residue;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn sampling_matches_weights() {
        let p = Policy {
            kind: PolicyKind::Prefix,
            dist: vec![vec![(0, 0.25), (2, 0.75)]],
            diagnostics: Diagnostics::default(),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let n = 20_000;
        let twos = (0..n).filter(|_| p.sample(0, &mut rng) == Some(2)).count();
        assert!((twos as f64 / n as f64 - 0.75).abs() < 0.02);
        assert_eq!(p.mode(0), Some(2));
    }

    #[test]
    fn normalize_sums_to_one() {
        let d = normalize(vec![(0, 1.0), (1, 0.0), (2, 2.0)]);
        assert_eq!(d.len(), 2);
        assert!((d.iter().map(|e| e.1).sum::<f64>() - 1.0).abs() < 1e-15);
    }
}
