use rand::distributions::{Distribution, WeightedIndex};
use serde::{Deserialize, Serialize};

use crate::error::{Result, ShamError};
use crate::rng::{self, SeededRng};

/// Distribution of the sampled constraint index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", content = "probabilities", rename_all = "snake_case")]
pub enum SamplingScheme {
    #[default]
    Uniform,
    /// Explicit probabilities, strictly positive and summing to one.
    Weighted(Vec<f64>),
}

/// Seeded constraint-index sampler.
#[derive(Debug, Clone)]
pub struct Sampler {
    m: usize,
    probabilities: Option<Vec<f64>>,
    weighted: Option<WeightedIndex<f64>>,
    rng: SeededRng,
}

impl Sampler {
    pub fn new(scheme: &SamplingScheme, m: usize, seed: u64) -> Result<Self> {
        if m == 0 {
            return Err(ShamError::InvalidConfig("sampler needs m >= 1".into()));
        }
        let (probabilities, weighted) = match scheme {
            SamplingScheme::Uniform => (None, None),
            SamplingScheme::Weighted(p) => {
                if p.len() != m {
                    return Err(ShamError::DimensionMismatch { expected: m, actual: p.len() });
                }
                if p.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
                    return Err(ShamError::InvalidConfig(
                        "sampling probabilities must be strictly positive".into(),
                    ));
                }
                let total: f64 = p.iter().sum();
                if (total - 1.0).abs() > 1e-9 {
                    return Err(ShamError::InvalidConfig(format!(
                        "sampling probabilities sum to {total}, not 1"
                    )));
                }
                let w = WeightedIndex::new(p).map_err(|e| ShamError::InvalidConfig(e.to_string()))?;
                (Some(p.clone()), Some(w))
            }
        };
        Ok(Self {
            m,
            probabilities,
            weighted,
            rng: rng::seeded(seed),
        })
    }

    pub fn count(&self) -> usize {
        self.m
    }

    pub fn sample(&mut self) -> usize {
        match &self.weighted {
            Some(w) => w.sample(&mut self.rng),
            None => rng::index(&mut self.rng, self.m),
        }
    }

    pub fn probabilities(&self) -> Vec<f64> {
        match &self.probabilities {
            Some(p) => p.clone(),
            None => vec![1.0 / self.m as f64; self.m],
        }
    }

    /// `rho = m min_j p_j`; exactly 1 for uniform sampling.
    pub fn rho(&self) -> f64 {
        match &self.probabilities {
            None => 1.0,
            Some(p) => self.m as f64 * p.iter().copied().fold(f64::INFINITY, f64::min),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_frequencies(sampler: &mut Sampler, n: usize) {
        let p = sampler.probabilities();
        let mut counts = vec![0usize; p.len()];
        for _ in 0..n {
            counts[sampler.sample()] += 1;
        }
        for (j, (&c, &pj)) in counts.iter().zip(&p).enumerate() {
            let freq = c as f64 / n as f64;
            let band = 3.0 * (pj * (1.0 - pj) / n as f64).sqrt();
            assert!((freq - pj).abs() <= band, "index {j}: {freq} vs {pj} (band {band})");
        }
    }

    #[test]
    fn uniform_frequencies() {
        let mut s = Sampler::new(&SamplingScheme::Uniform, 5, 12).unwrap();
        check_frequencies(&mut s, 100_000);
        assert_eq!(s.rho(), 1.0);
    }

    #[test]
    fn weighted_frequencies_and_rho() {
        let p = vec![0.5, 0.3, 0.2];
        let mut s = Sampler::new(&SamplingScheme::Weighted(p), 3, 4).unwrap();
        check_frequencies(&mut s, 100_000);
        assert_eq!(s.rho(), 3.0 * 0.2);
    }

    #[test]
    fn uniform_rho_is_exactly_one_for_awkward_m() {
        let s = Sampler::new(&SamplingScheme::Uniform, 49, 0).unwrap();
        assert_eq!(s.rho(), 1.0);
    }

    #[test]
    fn deterministic_stream() {
        let mut a = Sampler::new(&SamplingScheme::Uniform, 50, 8).unwrap();
        let mut b = Sampler::new(&SamplingScheme::Uniform, 50, 8).unwrap();
        for _ in 0..1000 {
            assert_eq!(a.sample(), b.sample());
        }
    }

    #[test]
    fn rejects_bad_probabilities() {
        assert!(Sampler::new(&SamplingScheme::Weighted(vec![0.5, 0.5, 0.0]), 3, 0).is_err());
        assert!(Sampler::new(&SamplingScheme::Weighted(vec![0.5, 0.6]), 2, 0).is_err());
        assert!(Sampler::new(&SamplingScheme::Weighted(vec![1.0]), 2, 0).is_err());
        assert!(Sampler::new(&SamplingScheme::Uniform, 0, 0).is_err());
    }
}
