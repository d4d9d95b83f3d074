//! Grover-only approximate counting and the quantum action estimator.
//!
//! Grover iterations are simulated exactly in the two-dimensional subspace
//! spanned by the uniform superpositions over marked and unmarked items:
//! after `j` iterations a measurement finds a marked item with probability
//! `sin^2((2j + 1) theta)`, `sin^2 theta = K / N`.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::Serialize;
use thiserror::Error;

use crate::action::{bd_action_from, ActionCoefficients, ActionError};
use crate::causet::CausalSet;
use crate::circuits::{algorithm_width, build_oracle, pair_from_index, CircuitError};
use crate::rng;
use crate::simulators::{oracle_marks, oracle_truth, SimError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CountingError {
    #[error("no marked items were found")]
    ZeroMarked,
    #[error("first-stage estimate was zero")]
    StageOneZero,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Simulation(#[from] SimError),
    #[error(transparent)]
    Action(#[from] ActionError),
}

/// `sin^2((2j + 1) theta)` model of `j` Grover iterations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroverModel {
    pub theta: f64,
}

impl GroverModel {
    pub fn new(search_space: u64, marked: u64) -> Self {
        assert!(search_space > 0 && marked <= search_space);
        GroverModel { theta: (marked as f64 / search_space as f64).sqrt().asin() }
    }

    pub fn success_probability(&self, iterations: u64) -> f64 {
        let p = ((2 * iterations + 1) as f64 * self.theta).sin().powi(2);
        p.clamp(0.0, 1.0)
    }
}

/// A membership oracle over `{0..N-1}` with a query counter.
#[derive(Debug, Clone)]
pub struct CountingOracle {
    marked: Vec<bool>,
    count: u64,
    model: GroverModel,
    queries: u64,
}

impl CountingOracle {
    pub fn new(marked: Vec<bool>) -> Self {
        assert!(!marked.is_empty(), "search space must be nonempty");
        let count = marked.iter().filter(|&&m| m).count() as u64;
        let model = GroverModel::new(marked.len() as u64, count);
        CountingOracle { marked, count, model, queries: 0 }
    }

    pub fn from_predicate(search_space: u64, f: impl Fn(u64) -> bool) -> Self {
        Self::new((0..search_space).map(f).collect())
    }

    /// Oracle marking the first `marked` of `search_space` items.
    pub fn with_count(search_space: u64, marked: u64) -> Self {
        Self::from_predicate(search_space, |x| x < marked)
    }

    pub fn search_space(&self) -> u64 {
        self.marked.len() as u64
    }

    pub fn marked_count(&self) -> u64 {
        self.count
    }

    pub fn is_marked(&self, x: u64) -> bool {
        self.marked[x as usize]
    }

    pub fn model(&self) -> GroverModel {
        self.model
    }

    pub fn queries(&self) -> u64 {
        self.queries
    }
}

/// Runs `iterations` Grover iterations from the uniform state and measures.
pub fn grover_sample<R: Rng + ?Sized>(o: &mut CountingOracle, iterations: u64, rng: &mut R) -> bool {
    o.queries += iterations;
    rng.random_bool(o.model.success_probability(iterations))
}

/// `shots` independent repetitions of [`grover_sample`]; returns how many
/// came out marked.
pub fn grover_sample_batch<R: Rng + ?Sized>(o: &mut CountingOracle, iterations: u64, shots: u64, rng: &mut R) -> u64 {
    o.queries += iterations * shots;
    let p = o.model.success_probability(iterations);
    Binomial::new(shots, p).expect("p is a probability").sample(rng)
}

/// Fresh shots per round are sized as if for a Hoeffding interval of this
/// half-width; the interval actually used is the tighter Chernoff one.
const ROUND_HALF_WIDTH: f64 = 0.4;
const MAX_ROUNDS: u32 = 100_000;

fn check_unit(name: &str, v: f64) -> Result<(), CountingError> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(CountingError::InvalidParameter(format!("{name} must lie in (0, 1), got {v}")))
    }
}

/// Looks for a marked item with Grover samples at iteration counts drawn
/// from `[0, M)` for `M = 1, 2, 4, ...` up to `2 sqrt(N)`. Once
/// `M >= 1 / sin(2 theta)` a sample is marked with probability at least 1/4,
/// so a nonempty marked set is missed with probability at most `delta`.
pub fn zero_scan<R: Rng + ?Sized>(o: &mut CountingOracle, delta: f64, rng: &mut R) -> bool {
    let reps = ((1.0 / delta).ln() / (4.0f64 / 3.0).ln()).ceil().max(1.0) as u32;
    let top = (2.0 * (o.search_space() as f64).sqrt()).ceil() as u64;
    let mut m = 1u64;
    loop {
        for _ in 0..reps {
            let j = rng.random_range(0..m);
            if grover_sample(o, j, rng) {
                return true;
            }
        }
        if m >= top {
            return false;
        }
        m *= 2;
    }
}

enum Settle {
    Done(u64),
    Refine,
    /// No integer count fits the interval, so some confidence interval
    /// failed; give up with the nearest integer.
    Empty(u64),
}

/// Integer estimate within relative error `epsilon` of every integer count
/// compatible with `theta in [lo, hi]`, if one exists.
fn settle(lo: f64, hi: f64, space: f64, epsilon: f64) -> Settle {
    let tol = 1e-9 * space.max(1.0);
    let (x_lo, x_hi) = (space * lo.sin().powi(2), space * hi.sin().powi(2));
    let k_lo = (x_lo - tol).ceil().max(1.0);
    let k_hi = (x_hi + tol).floor().min(space);
    if k_lo > k_hi {
        return Settle::Empty(((x_lo + x_hi) / 2.0).round().max(1.0) as u64);
    }
    let first = ((1.0 - epsilon) * k_hi).floor() + 1.0;
    let last = ((1.0 + epsilon) * k_lo).ceil() - 1.0;
    if first > last {
        return Settle::Refine;
    }
    let centre = (k_lo * k_hi).sqrt().round();
    Settle::Done(centre.clamp(first, last) as u64)
}

/// Smallest `k` with `4k + 2` at least doubling whose scaled interval
/// `(4k + 2) [lo, hi]` sits inside one half-plane; otherwise keeps `k`.
/// Growing `k` by about a factor of two per round keeps the final round
/// within a constant factor of the precision actually needed.
fn next_k(k: u64, upper: bool, lo: f64, hi: f64) -> (u64, bool) {
    let current = 4 * k + 2;
    let width = hi - lo;
    if width <= 0.0 {
        return (k, upper);
    }
    let widest = (PI / width).floor().min(1e15) as u64;
    let mut scale = 2 * current;
    scale += (6 - scale % 4) % 4;
    while scale <= widest {
        let s_lo = (scale as f64 * lo).rem_euclid(TAU);
        let s_hi = (scale as f64 * hi).rem_euclid(TAU);
        if s_hi >= s_lo {
            if s_hi <= PI {
                return ((scale - 2) / 4, true);
            }
            if s_lo >= PI {
                return ((scale - 2) / 4, false);
            }
        }
        scale += 4;
    }
    (k, upper)
}

/// Bernoulli relative entropy `KL(p || q)`.
fn bernoulli_kl(p: f64, q: f64) -> f64 {
    let term = |a: f64, b: f64| if a <= 0.0 { 0.0 } else { a * (a / b).ln() };
    term(p, q) + term(1.0 - p, 1.0 - q)
}

/// Chernoff interval `{q : shots KL(freq || q) <= log_term}`; each side
/// fails with probability at most `exp(-log_term)`.
fn chernoff_interval(freq: f64, shots: u64, log_term: f64) -> (f64, f64) {
    let bound = log_term / shots as f64;
    let solve = |mut inside: f64, mut outside: f64| {
        for _ in 0..100 {
            let mid = 0.5 * (inside + outside);
            if bernoulli_kl(freq, mid) <= bound {
                inside = mid;
            } else {
                outside = mid;
            }
        }
        inside
    };
    let lo = if bernoulli_kl(freq, 0.0) <= bound { 0.0 } else { solve(freq, 0.0) };
    let hi = if bernoulli_kl(freq, 1.0) <= bound { 1.0 } else { solve(freq, 1.0) };
    (lo, hi)
}

/// Rounds needed to shrink `theta` to the finest width settling can
/// require, about `epsilon / (4 sqrt N)`, when the scale doubles per round.
fn planned_rounds(space: f64, epsilon: f64) -> u32 {
    let finest = epsilon.min(1.0) / (4.0 * space.sqrt());
    (PI / finest).log2().ceil() as u32 + 1
}

/// Confidence level of round `r`: `delta / (2T)` for the `T` planned rounds
/// and `3 delta / (pi^2 (r - T)^2)` beyond, summing to at most `delta`.
fn round_level(r: u32, planned: u32, delta: f64) -> f64 {
    if r <= planned {
        delta / (2.0 * planned as f64)
    } else {
        3.0 * delta / (PI * PI * ((r - planned) as f64).powi(2))
    }
}

/// Iterative interval refinement of `theta` for a nonempty marked set.
///
/// Each round measures at the current `k` and intersects the running
/// interval with a Chernoff interval at level [`round_level`], so all
/// intervals hold together with probability at least `1 - delta`. Rounds
/// that cannot grow `k` pool their shots with the previous rounds at the
/// same `k`.
fn count_nonzero<R: Rng + ?Sized>(o: &mut CountingOracle, epsilon: f64, delta: f64, rng: &mut R) -> u64 {
    let space = o.search_space() as f64;
    let (mut lo, mut hi) = (0.0f64, FRAC_PI_2);
    let (mut k, mut upper) = (0u64, true);
    let (mut pooled_k, mut ones, mut shots) = (u64::MAX, 0u64, 0u64);
    let planned = planned_rounds(space, epsilon);
    for r in 1..=MAX_ROUNDS {
        match settle(lo, hi, space, epsilon) {
            Settle::Done(estimate) | Settle::Empty(estimate) => return estimate,
            Settle::Refine => {}
        }
        (k, upper) = next_k(k, upper, lo, hi);
        if k != pooled_k {
            (pooled_k, ones, shots) = (k, 0, 0);
        }
        let alpha = round_level(r, planned, delta);
        let log_term = (2.0 / alpha).ln();
        let fresh = (log_term / (2.0 * ROUND_HALF_WIDTH * ROUND_HALF_WIDTH)).ceil() as u64;
        ones += grover_sample_batch(o, k, fresh, rng);
        shots += fresh;

        let freq = ones as f64 / shots as f64;
        let (a_min, a_max) = chernoff_interval(freq, shots, log_term);
        let angle = |a: f64| (1.0 - 2.0 * a).clamp(-1.0, 1.0).acos();
        let scale = (4 * k + 2) as f64;
        let base = TAU * (scale * lo / TAU).floor();
        let (phi_lo, phi_hi) =
            if upper { (angle(a_min), angle(a_max)) } else { (TAU - angle(a_max), TAU - angle(a_min)) };
        let (new_lo, new_hi) = ((base + phi_lo) / scale, (base + phi_hi) / scale);
        if new_lo > hi || new_hi < lo {
            // The fresh interval contradicts the running one; keep the fresh one.
            (lo, hi) = (new_lo.clamp(0.0, FRAC_PI_2), new_hi.clamp(0.0, FRAC_PI_2));
        } else {
            (lo, hi) = (lo.max(new_lo), hi.min(new_hi));
        }
    }
    let mid = (lo + hi) / 2.0;
    ((space * mid.sin().powi(2)).round() as u64).max(1)
}

/// `K_hat` with `|K_hat - K| < epsilon K` with probability at least
/// `1 - delta`, using only Grover iterations. Half of `delta` goes to the
/// zero scan.
pub fn approx_count<R: Rng + ?Sized>(
    o: &mut CountingOracle,
    epsilon: f64,
    delta: f64,
    rng: &mut R,
) -> Result<u64, CountingError> {
    check_unit("epsilon", epsilon)?;
    check_unit("delta", delta)?;
    if !zero_scan(o, delta / 2.0, rng) {
        return Err(CountingError::ZeroMarked);
    }
    Ok(count_nonzero(o, epsilon, delta / 2.0, rng))
}

/// Share of `zeta` spent on the zero scan of the two-stage count.
const SCAN_SHARE: f64 = 0.05;

/// Two-stage count with `|K_hat - K| < epsilon sqrt(K)`.
///
/// Stage one counts to relative error `epsilon` at failure probability
/// `delta = 1 - sqrt(1 - zeta)`; stage two recounts at
/// `epsilon_2 = epsilon sqrt(1 - epsilon) / sqrt(K_1)` with the same
/// `delta`.
pub fn approx_count_sqrt<R: Rng + ?Sized>(
    o: &mut CountingOracle,
    epsilon: f64,
    zeta: f64,
    rng: &mut R,
) -> Result<u64, CountingError> {
    check_unit("epsilon", epsilon)?;
    check_unit("zeta", zeta)?;
    let delta = 1.0 - (1.0 - zeta).sqrt();
    if !zero_scan(o, SCAN_SHARE * zeta, rng) {
        return Err(CountingError::ZeroMarked);
    }
    let mut k1 = count_nonzero(o, epsilon, delta, rng);
    if k1 == 0 {
        k1 = count_nonzero(o, epsilon, delta, rng);
        if k1 == 0 {
            return Err(CountingError::ZeroMarked);
        }
    }
    let epsilon2 = epsilon * (1.0 - epsilon).sqrt() / (k1 as f64).sqrt();
    Ok(count_nonzero(o, epsilon2, delta, rng))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OracleMode {
    /// Membership from the dot-product predicate.
    Predicate,
    /// Membership from reversible simulation of the oracle circuit.
    Circuit,
}

impl FromStr for OracleMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "predicate" => Ok(OracleMode::Predicate),
            "circuit" => Ok(OracleMode::Circuit),
            other => Err(format!("unknown oracle mode `{other}` (expected predicate|circuit)")),
        }
    }
}

/// Membership vector of `V_k` over all `n^2` pair indices.
///
/// In circuit mode a `k` too large for the volume register marks nothing:
/// the register holds values up to `2^q - 1 >= n`, and no dot product
/// exceeds `n`.
pub fn membership(c: &CausalSet, k: u64, mode: OracleMode) -> Result<Vec<bool>, CountingError> {
    let n = c.n();
    let refl = c.reflexive();
    let rows: Vec<Vec<bool>> = (0..n).map(|i| refl.row_bits(i)).collect();
    let cols: Vec<Vec<bool>> = (0..n).map(|j| refl.col_bits(j)).collect();
    let pairs = (0..(n * n) as u64).map(|h| pair_from_index(h, n).expect("h < n^2"));
    match mode {
        OracleMode::Predicate => Ok(pairs.map(|(i, j)| oracle_truth(&rows[i - 1], &cols[j - 1], k)).collect()),
        OracleMode::Circuit => match build_oracle(n, k) {
            Ok(oracle) => pairs
                .map(|(i, j)| oracle_marks(&oracle, &rows[i - 1], &cols[j - 1]).map_err(CountingError::from))
                .collect(),
            Err(CircuitError::KTooLarge { .. }) => Ok(vec![false; n * n]),
            Err(e) => Err(e.into()),
        },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LayerEstimate {
    pub k: usize,
    #[serde(rename = "N_true", skip_serializing_if = "Option::is_none")]
    pub n_true: Option<u64>,
    #[serde(rename = "N_hat")]
    pub n_hat: u64,
    pub queries: u64,
    pub zero_flag: bool,
}

/// One run of the estimator.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ActionRun {
    pub trial: u64,
    pub per_k: Vec<LayerEstimate>,
    #[serde(rename = "S_hat")]
    pub s_hat: f64,
    #[serde(rename = "S_true")]
    pub s_true: f64,
    pub width_qubits: usize,
}

impl ActionRun {
    pub fn total_queries(&self) -> u64 {
        self.per_k.iter().map(|l| l.queries).sum()
    }
}

/// Estimates `S/hbar`: one two-stage count per layer `k < n_d` over the
/// `n^2` pair indices at failure probability `delta` each, so the overall
/// confidence is `(1 - delta)^n_d`. Layer `k` of trial `t` draws from stream
/// `cell_stream(t, k)` of `seed`.
pub fn estimate_bd_action(
    c: &CausalSet,
    coeff: &ActionCoefficients,
    epsilon: f64,
    delta: f64,
    seed: u64,
    trial: u64,
    mode: OracleMode,
) -> Result<ActionRun, CountingError> {
    check_unit("epsilon", epsilon)?;
    check_unit("delta", delta)?;
    let n = c.n();
    let mut per_k = Vec::with_capacity(coeff.n_d);
    for k in 0..coeff.n_d {
        let mut oracle = CountingOracle::new(membership(c, k as u64, mode)?);
        let mut stream = rng::stream(seed, rng::cell_stream(trial, k as u64));
        let (n_hat, zero_flag) = match approx_count_sqrt(&mut oracle, epsilon, delta, &mut stream) {
            Ok(v) => (v, false),
            Err(CountingError::ZeroMarked) => (0, true),
            Err(e) => return Err(e),
        };
        per_k.push(LayerEstimate {
            k,
            n_true: Some(oracle.marked_count()),
            n_hat,
            queries: oracle.queries(),
            zero_flag,
        });
    }
    let estimates: Vec<f64> = per_k.iter().map(|l| l.n_hat as f64).collect();
    let truth: Vec<f64> = per_k.iter().map(|l| l.n_true.unwrap_or(0) as f64).collect();
    Ok(ActionRun {
        trial,
        s_hat: bd_action_from(n, &estimates, coeff)?,
        s_true: bd_action_from(n, &truth, coeff)?,
        per_k,
        width_qubits: algorithm_width(n),
    })
}

/// Batch report over independent trials.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ActionReport {
    pub n: usize,
    pub d: u32,
    pub epsilon: f64,
    pub delta: f64,
    pub oracle_mode: OracleMode,
    /// One entry per `(trial, k)`, ordered by trial then `k`.
    pub per_k: Vec<TrialLayer>,
    /// Mean of the per-trial estimates.
    #[serde(rename = "S_hat")]
    pub s_hat: f64,
    #[serde(rename = "S_hat_trials")]
    pub s_hat_trials: Vec<f64>,
    #[serde(rename = "S_true")]
    pub s_true: f64,
    pub width_qubits: usize,
    pub trials: u64,
    /// `(1 - delta)^n_d`.
    pub confidence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialLayer {
    pub trial: u64,
    #[serde(flatten)]
    pub layer: LayerEstimate,
}

impl ActionReport {
    /// Collects runs, which must be sorted by trial index.
    pub fn from_runs(
        c: &CausalSet,
        coeff: &ActionCoefficients,
        epsilon: f64,
        delta: f64,
        mode: OracleMode,
        runs: &[ActionRun],
    ) -> ActionReport {
        let s_hat_trials: Vec<f64> = runs.iter().map(|r| r.s_hat).collect();
        let s_hat = if runs.is_empty() { f64::NAN } else { s_hat_trials.iter().sum::<f64>() / runs.len() as f64 };
        ActionReport {
            n: c.n(),
            d: coeff.d,
            epsilon,
            delta,
            oracle_mode: mode,
            per_k: runs
                .iter()
                .flat_map(|r| r.per_k.iter().map(|l| TrialLayer { trial: r.trial, layer: l.clone() }))
                .collect(),
            s_hat,
            s_hat_trials,
            s_true: runs.first().map_or(f64::NAN, |r| r.s_true),
            width_qubits: algorithm_width(c.n()),
            trials: runs.len() as u64,
            confidence: (1.0 - delta).powi(coeff.n_d as i32),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::action::four_d_prefactor;

    #[test]
    fn grover_closed_forms() {
        assert!((GroverModel::new(4, 4).success_probability(0) - 1.0).abs() < 1e-15);
        for j in 0..10 {
            assert_eq!(GroverModel::new(16, 0).success_probability(j), 0.0);
        }
        let m = GroverModel::new(4, 1);
        assert!((m.theta - PI / 6.0).abs() < 1e-15);
        assert!((m.success_probability(1) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn queries_count_iterations() {
        let mut o = CountingOracle::with_count(64, 3);
        let mut r = rng::stream(1, 0);
        grover_sample(&mut o, 5, &mut r);
        grover_sample(&mut o, 0, &mut r);
        grover_sample_batch(&mut o, 3, 10, &mut r);
        assert_eq!(o.queries(), 35);
    }

    #[test]
    fn full_set_counted_immediately() {
        for seed in 0..50 {
            let mut o = CountingOracle::with_count(16, 16);
            let k = approx_count(&mut o, 0.5, 0.1, &mut rng::stream(seed, 0)).unwrap();
            assert!(k > 8 && k <= 24);
        }
    }

    #[test]
    fn parameter_errors_before_queries() {
        let mut o = CountingOracle::with_count(16, 4);
        let mut r = rng::stream(0, 0);
        for eps in [1.0, 1.5, 0.0, -0.1] {
            assert!(matches!(approx_count_sqrt(&mut o, eps, 0.1, &mut r), Err(CountingError::InvalidParameter(_))));
        }
        assert!(matches!(approx_count(&mut o, 0.5, 1.0, &mut r), Err(CountingError::InvalidParameter(_))));
        assert_eq!(o.queries(), 0);
    }

    #[test]
    fn zero_marked_detected() {
        let mut o = CountingOracle::with_count(256, 0);
        assert_eq!(approx_count(&mut o, 0.3, 0.1, &mut rng::stream(3, 0)), Err(CountingError::ZeroMarked));
        assert!(o.queries() > 0);
    }

    #[test]
    fn settle_requires_every_candidate_to_be_close() {
        // theta pinned to exactly K = 5.
        let t = (5.0f64 / 100.0).sqrt().asin();
        assert!(matches!(settle(t - 1e-12, t + 1e-12, 100.0, 0.1), Settle::Done(5)));
        // Candidates 4..=6 with epsilon = 0.1: no integer within 10% of both.
        let lo = (4.0f64 / 100.0).sqrt().asin();
        let hi = (6.0f64 / 100.0).sqrt().asin();
        assert!(matches!(settle(lo, hi, 100.0, 0.1), Settle::Refine));
        assert!(matches!(settle(lo, hi, 100.0, 0.5), Settle::Done(5)));
        // Strictly between K = 4 and K = 5.
        let a = (4.2f64 / 100.0).sqrt().asin();
        let b = (4.3f64 / 100.0).sqrt().asin();
        assert!(matches!(settle(a, b, 100.0, 0.1), Settle::Empty(4)));
    }

    #[test]
    fn next_k_keeps_halfplane() {
        let (k, upper) = next_k(0, true, 0.1, 0.12);
        let s = (4 * k + 2) as f64;
        assert!(k >= 1);
        let (a, b) = ((s * 0.1).rem_euclid(TAU), (s * 0.12).rem_euclid(TAU));
        assert!(a <= b);
        if upper {
            assert!(b <= PI);
        } else {
            assert!(a >= PI);
        }
    }

    #[test]
    fn antichain_estimate_is_exact() {
        let c = CausalSet::antichain(5);
        let coeff = ActionCoefficients::four_dimensional(1.0);
        let run = estimate_bd_action(&c, &coeff, 0.5, 0.05, 7, 0, OracleMode::Predicate).unwrap();
        assert!(run.per_k.iter().all(|l| l.zero_flag && l.n_hat == 0));
        assert!((run.s_hat - four_d_prefactor() * 5.0).abs() < 1e-12);
    }

    #[test]
    fn width_of_n8_run() {
        let c = CausalSet::chain(8);
        let coeff = ActionCoefficients::four_dimensional(1.0);
        let run = estimate_bd_action(&c, &coeff, 0.5, 0.05, 1, 0, OracleMode::Predicate).unwrap();
        assert_eq!(run.width_qubits, 32);
        assert_eq!(run.per_k.iter().map(|l| l.n_true.unwrap()).collect::<Vec<_>>(), vec![7, 6, 5, 4]);
    }

    #[test]
    fn modes_agree_on_small_sets() {
        let c =
            CausalSet::from_pairs(4, &[(1, 2), (2, 3), (1, 3), (1, 4)], crate::causet::ClosureMode::Strict).unwrap();
        for k in 0..4 {
            assert_eq!(
                membership(&c, k, OracleMode::Predicate).unwrap(),
                membership(&c, k, OracleMode::Circuit).unwrap()
            );
        }
        let coeff = ActionCoefficients::four_dimensional(1.0);
        let a = estimate_bd_action(&c, &coeff, 0.5, 0.05, 11, 2, OracleMode::Predicate).unwrap();
        let b = estimate_bd_action(&c, &coeff, 0.5, 0.05, 11, 2, OracleMode::Circuit).unwrap();
        assert_eq!(a, b);
    }
    #[test]
    fn chernoff_interval_covers_frequency() {
        let (lo, hi) = chernoff_interval(0.3, 100, (2.0f64 / 0.05).ln());
        assert!(lo < 0.3 && hi > 0.3);
        for q in [lo, hi] {
            assert!((100.0 * bernoulli_kl(0.3, q) - (2.0f64 / 0.05).ln()).abs() < 1e-6);
        }
        assert_eq!(chernoff_interval(0.0, 10, 1.0).0, 0.0);
        assert_eq!(chernoff_interval(1.0, 10, 1.0).1, 1.0);
        let (a, b) = chernoff_interval(0.5, 10_000, 3.0);
        assert!(b - a < 0.06);
    }

    #[test]
    fn round_levels_sum_below_delta() {
        let planned = planned_rounds(16384.0, 0.3);
        let total: f64 = (1..=MAX_ROUNDS).map(|r| round_level(r, planned, 0.1)).sum();
        assert!(total <= 0.1 + 1e-12, "{total}");
    }

    #[test]
    fn grover_frequencies_follow_model() {
        let mut o = CountingOracle::with_count(1000, 37);
        let mut r = rng::stream(5, 0);
        let draws = 100_000u64;
        for j in [0u64, 1, 3, 7] {
            let p = o.model().success_probability(j);
            let hits = grover_sample_batch(&mut o, j, draws, &mut r) as f64;
            let se = (p * (1.0 - p) / draws as f64).sqrt();
            assert!((hits / draws as f64 - p).abs() <= 3.0 * se + 1e-12, "j = {j}");
        }
    }
}
