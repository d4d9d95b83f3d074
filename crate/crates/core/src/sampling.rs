//! Simple random sampling of related pairs, without replacement, and the
//! four-dimensional action estimator with its standard-error figures.

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::action::four_d_prefactor;
use crate::causet::CausalSet;
use crate::rng;

/// Layers tallied by the four-dimensional estimator.
pub const SAMPLED_LAYERS: usize = 4;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SamplingError {
    #[error("causal set has no related pairs to sample")]
    EmptyRelation,
    #[error("sample size {k} exceeds the {population} related pairs")]
    KTooLarge { k: usize, population: usize },
    #[error("sample size must be at least 1")]
    KZero,
}

/// Layer tallies `K_0..K_3` of one sample.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SampleResult {
    pub n: usize,
    pub sample_size: usize,
    pub counts: [u64; SAMPLED_LAYERS],
    pub population: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampledEstimate {
    pub s_hat: f64,
    pub se_full: f64,
    pub se_subadditive: f64,
    pub se_simple_bound: f64,
}

/// Precomputed population of related pairs, labelled by volume layer.
///
/// Holding the layer of every edge lets repeated resampling run without
/// recomputing any volumes.
#[derive(Debug, Clone)]
pub struct PairPopulation {
    n: usize,
    /// `k` for each related pair, or `u8::MAX` when `k >= 4`.
    layers: Vec<u8>,
}

const OUTSIDE: u8 = u8::MAX;

impl PairPopulation {
    pub fn new(c: &CausalSet) -> Self {
        let refl = c.reflexive();
        let layers = c
            .edges()
            .into_iter()
            .map(|(i, j)| {
                let k = refl.volume_at(i, j) as usize - 2;
                if k < SAMPLED_LAYERS {
                    k as u8
                } else {
                    OUTSIDE
                }
            })
            .collect();
        PairPopulation { n: c.n(), layers }
    }

    pub fn size(&self) -> usize {
        self.layers.len()
    }

    /// Exact population abundances `N_0..N_3`.
    pub fn abundances(&self) -> [u64; SAMPLED_LAYERS] {
        tally(self.layers.iter().copied())
    }

    /// Draws `k` distinct pairs by a partial Fisher–Yates shuffle of an
    /// index array.
    pub fn sample<R: Rng + ?Sized>(&self, k: usize, rng: &mut R) -> Result<SampleResult, SamplingError> {
        let population = self.size();
        if population == 0 {
            return Err(SamplingError::EmptyRelation);
        }
        if k == 0 {
            return Err(SamplingError::KZero);
        }
        if k > population {
            return Err(SamplingError::KTooLarge { k, population });
        }
        let mut index: Vec<u32> = (0..population as u32).collect();
        for i in 0..k {
            let j = rng.random_range(i..population);
            index.swap(i, j);
        }
        let counts = tally(index[..k].iter().map(|&e| self.layers[e as usize]));
        Ok(SampleResult { n: self.n, sample_size: k, counts, population })
    }
}

fn tally(layers: impl Iterator<Item = u8>) -> [u64; SAMPLED_LAYERS] {
    let mut counts = [0u64; SAMPLED_LAYERS];
    for l in layers {
        if l != OUTSIDE {
            counts[l as usize] += 1;
        }
    }
    counts
}

pub fn sample_pairs(c: &CausalSet, k: usize, seed: u64) -> Result<SampleResult, SamplingError> {
    let mut rng = rng::stream(seed, 0);
    PairPopulation::new(c).sample(k, &mut rng)
}

/// Default sample size, a quarter of the population rounded up.
pub fn default_sample_size(population: usize) -> usize {
    population.div_ceil(4).max(1)
}

/// Weights of `N_0..N_3` in the four-dimensional bracket.
const WEIGHTS: [f64; SAMPLED_LAYERS] = [-1.0, 9.0, -16.0, 8.0];

/// Cross-term coefficients `c_ab` multiplying `p_a p_b` in
/// `Var(-K0 + 9K1 - 16K2 + 8K3) / (K f)`, i.e. `-2 w_a w_b`.
const CROSS: [((usize, usize), f64); 6] =
    [((0, 1), 18.0), ((0, 2), -32.0), ((0, 3), 16.0), ((1, 2), 288.0), ((1, 3), -144.0), ((2, 3), 256.0)];

/// `(N - K) / (N - 1)`, zero for a full census.
pub fn finite_population_factor(population: usize, sample_size: usize) -> f64 {
    if sample_size >= population {
        0.0
    } else {
        (population - sample_size) as f64 / (population - 1) as f64
    }
}

/// Bracket `sum_k w_k^2 p_k (1 - p_k) + sum_{a<b} c_ab p_a p_b` for layer
/// proportions `p`.
pub fn variance_bracket(p: &[f64; SAMPLED_LAYERS]) -> f64 {
    let diag: f64 = (0..SAMPLED_LAYERS).map(|k| WEIGHTS[k] * WEIGHTS[k] * p[k] * (1.0 - p[k])).sum();
    let cross: f64 = CROSS.iter().map(|&((a, b), c)| c * p[a] * p[b]).sum();
    diag + cross
}

/// Standard deviation of the estimator under its exact hypergeometric law,
/// given the true population abundances.
pub fn exact_sigma(
    population_abundances: &[u64; SAMPLED_LAYERS],
    population: usize,
    sample_size: usize,
    length_ratio: f64,
) -> f64 {
    let big_n = population as f64;
    let p = population_abundances.map(|v| v as f64 / big_n);
    let scale = four_d_prefactor() * length_ratio * length_ratio * big_n / (sample_size as f64).sqrt();
    scale * (finite_population_factor(population, sample_size) * variance_bracket(&p).max(0.0)).sqrt()
}

pub fn estimate_sampled(s: &SampleResult, length_ratio: f64) -> SampledEstimate {
    let big_n = s.population as f64;
    let k = s.sample_size as f64;
    let scale = four_d_prefactor() * length_ratio * length_ratio;
    let ratio = big_n / k;
    let bracket: f64 = s.n as f64 + WEIGHTS.iter().zip(&s.counts).map(|(w, &kk)| w * ratio * kk as f64).sum::<f64>();
    let s_hat = scale * bracket;

    let p = s.counts.map(|v| v as f64 / k);
    let spread = scale * big_n / k.sqrt() * finite_population_factor(s.population, s.sample_size).sqrt();
    let se_full = spread * variance_bracket(&p).max(0.0).sqrt();
    let se_subadditive =
        spread * (0..SAMPLED_LAYERS).map(|i| WEIGHTS[i].abs() * (p[i] * (1.0 - p[i])).max(0.0).sqrt()).sum::<f64>();
    // 68 / sqrt(6) = (4 / sqrt(6)) * (1 + 9 + 16 + 8) / 2
    let se_simple_bound =
        scale * 17.0 * big_n / k.sqrt() * finite_population_factor(s.population, s.sample_size).sqrt();

    SampledEstimate { s_hat, se_full, se_subadditive, se_simple_bound }
}
