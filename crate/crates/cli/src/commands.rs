use std::fs;
use std::path::Path;

use bdlab::action::{abundances, bd_action, bd_action_4d, ActionCoefficients, ActionError, Backend};
use bdlab::causet::{generate, parse_text, to_text, CausalSet, CausetError, ClosureMode, GeneratorModel, TextStyle};
use bdlab::circuits::{
    build_data_prep, build_oracle, dump, resources as circuit_resources, CircuitError, CostModel, DepthModel,
    ResourceReport,
};
use bdlab::counting::{estimate_bd_action, ActionReport, CountingError, OracleMode};
use bdlab::rng;
use bdlab::sampling::{default_sample_size, estimate_sampled, exact_sigma, PairPopulation, SamplingError};
use bdlab::simulators::{oracle_input, oracle_truth, run_reversible};
use rayon::prelude::*;
use serde::Serialize;

use crate::output::{self, float};
use crate::{
    ActionArgs, ActionBackend, CircuitKind, Format, GenArgs, InputArgs, Mode, ModelArg, OracleModeArg,
    OracleVerifyArgs, ResourcesArgs, Style, ValidateArgs,
};

pub const EXIT_VALIDATION: u8 = 2;
pub const EXIT_PARAMETER: u8 = 3;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn parameter(message: impl Into<String>) -> Self {
        Failure { code: EXIT_PARAMETER, message: message.into() }
    }

    pub fn validation(message: impl Into<String>) -> Self {
        Failure { code: EXIT_VALIDATION, message: message.into() }
    }
}

impl From<CausetError> for Failure {
    fn from(e: CausetError) -> Self {
        match e {
            CausetError::InvalidParameter(_) => Failure::parameter(e.to_string()),
            _ => Failure::validation(e.to_string()),
        }
    }
}

macro_rules! parameter_errors {
    ($($t:ty),*) => {
        $(impl From<$t> for Failure {
            fn from(e: $t) -> Self {
                Failure::parameter(e.to_string())
            }
        })*
    };
}

parameter_errors!(ActionError, SamplingError, CircuitError, CountingError);

type Outcome = Result<String, Failure>;

fn closure_mode(m: Mode) -> ClosureMode {
    match m {
        Mode::Strict => ClosureMode::Strict,
        Mode::Close => ClosureMode::Close,
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::parameter(format!("cannot read {}: {e}", path.display())))
}

fn generator(model: &str) -> Result<GeneratorModel, Failure> {
    model.parse().map_err(Failure::parameter)
}

fn load(input: &InputArgs, seed: u64) -> Result<CausalSet, Failure> {
    match (&input.input, &input.gen) {
        (Some(path), None) => Ok(parse_text(&read(path)?, closure_mode(input.mode))?),
        (None, Some(model)) => {
            let n = input.n.ok_or_else(|| Failure::parameter("--gen needs --n"))?;
            Ok(generate(n, generator(model)?, seed)?)
        }
        (None, None) => Err(Failure::parameter("give exactly one of --input or --gen")),
        (Some(_), Some(_)) => Err(Failure::parameter("--input and --gen are mutually exclusive")),
    }
}

/// Instance of size `n`: from a file, which must have `n` elements, or generated.
fn sized_instance(path: Option<&Path>, model: &str, mode: Mode, n: usize, seed: u64) -> Result<CausalSet, Failure> {
    let c = match path {
        Some(p) => parse_text(&read(p)?, closure_mode(mode))?,
        None => generate(n, generator(model)?, seed)?,
    };
    if c.n() != n {
        return Err(Failure::parameter(format!("--n {n} but the input has {} elements", c.n())));
    }
    Ok(c)
}

pub fn gen(a: &GenArgs) -> Outcome {
    let c = generate(a.n, generator(&a.model)?, a.seed)?;
    let style = match a.style {
        Style::Pairs => TextStyle::Pairs,
        Style::Matrix => TextStyle::Matrix,
    };
    let text = to_text(&c, style);
    match &a.output {
        Some(path) => {
            fs::write(path, text).map_err(|e| Failure::parameter(format!("cannot write {}: {e}", path.display())))?;
            Ok(String::new())
        }
        None => Ok(text),
    }
}

#[derive(Serialize)]
struct ValidateReport {
    valid: bool,
    n: usize,
    related_pairs: usize,
    mode: &'static str,
}

pub fn validate(a: &ValidateArgs) -> Outcome {
    let c = load(&a.input, a.seed)?;
    let r = ValidateReport {
        valid: c.check_axioms().is_ok(),
        n: c.n(),
        related_pairs: c.related_pairs(),
        mode: match a.input.mode {
            Mode::Strict => "strict",
            Mode::Close => "close",
        },
    };
    let fields = [
        ("valid", r.valid.to_string()),
        ("n", r.n.to_string()),
        ("related_pairs", r.related_pairs.to_string()),
        ("mode", r.mode.to_string()),
    ];
    Ok(match a.format {
        Format::Json => output::json(&r),
        Format::Csv => output::csv_fields(&fields),
        Format::Text => output::text_fields(&fields),
    })
}

fn coefficients(a: &ActionArgs) -> Result<(ActionCoefficients, bool), Failure> {
    let (mut coeff, preset) = match &a.coeffs {
        Some(path) => (ActionCoefficients::from_config_text(&read(path)?)?, false),
        None => (ActionCoefficients::four_dimensional(1.0), true),
    };
    if let Some(r) = a.length_ratio {
        if !(r.is_finite() && r > 0.0) {
            return Err(Failure::parameter(format!("--length-ratio must be positive, got {r}")));
        }
        coeff = coeff.with_length_ratio(r);
    }
    Ok((coeff, preset))
}

pub fn action(a: &ActionArgs) -> Outcome {
    let c = load(&a.input, a.seed)?;
    let (coeff, preset) = coefficients(a)?;
    if a.trials == 0 {
        return Err(Failure::parameter("--trials must be at least 1"));
    }
    match a.backend {
        ActionBackend::Naive => exact(a, &c, &coeff, preset, Backend::Naive),
        ActionBackend::Matrix => exact(a, &c, &coeff, preset, Backend::Matrix),
        ActionBackend::Strassen => exact(a, &c, &coeff, preset, Backend::Strassen),
        ActionBackend::Sample => sampled(a, &c, &coeff),
        ActionBackend::Quantum => quantum(a, &c, &coeff),
    }
}

#[derive(Serialize)]
struct ExactReport {
    n: usize,
    d: u32,
    backend: Backend,
    length_ratio: f64,
    related_pairs: u64,
    /// `N_0..N_kmax`.
    abundances: Vec<u64>,
    #[serde(rename = "S")]
    s: f64,
}

fn exact(a: &ActionArgs, c: &CausalSet, coeff: &ActionCoefficients, preset: bool, backend: Backend) -> Outcome {
    let kmax = a.kmax.unwrap_or(coeff.n_d - 1);
    if kmax + 1 < coeff.n_d {
        return Err(Failure::parameter(format!("--kmax {kmax} is below n_d - 1 = {}", coeff.n_d - 1)));
    }
    let ab = abundances(c, kmax, backend);
    let s = if preset { bd_action_4d(&ab, coeff.length_ratio)? } else { bd_action(&ab, coeff)? };
    let r = ExactReport {
        n: c.n(),
        d: coeff.d,
        backend,
        length_ratio: coeff.length_ratio,
        related_pairs: ab.related_pairs,
        abundances: ab.counts.clone(),
        s,
    };
    Ok(match a.format {
        Format::Json => output::json(&r),
        Format::Csv => {
            output::csv(&["k", "N_k"], r.abundances.iter().enumerate().map(|(k, v)| vec![k.to_string(), v.to_string()]))
        }
        Format::Text => {
            let mut fields = vec![
                ("n", r.n.to_string()),
                ("d", r.d.to_string()),
                ("backend", format!("{backend:?}").to_lowercase()),
                ("length_ratio", float(r.length_ratio)),
                ("related_pairs", r.related_pairs.to_string()),
            ];
            let names: Vec<String> = (0..r.abundances.len()).map(|k| format!("N_{k}")).collect();
            for (name, v) in names.iter().zip(&r.abundances) {
                fields.push((name.as_str(), v.to_string()));
            }
            fields.push(("S/hbar", float(r.s)));
            output::text_fields(&fields)
        }
    })
}

#[derive(Serialize)]
struct SampleTrial {
    trial: u64,
    counts: [u64; 4],
    #[serde(rename = "S_hat")]
    s_hat: f64,
    se_full: f64,
    se_subadditive: f64,
    se_simple_bound: f64,
}

#[derive(Serialize)]
struct SampleReport {
    n: usize,
    #[serde(rename = "N")]
    population: usize,
    #[serde(rename = "K")]
    sample_size: usize,
    trials: u64,
    seed: u64,
    length_ratio: f64,
    #[serde(rename = "S_true")]
    s_true: f64,
    #[serde(rename = "S_hat_mean")]
    s_hat_mean: f64,
    /// Sample standard deviation over trials; absent for a single trial.
    #[serde(rename = "S_hat_std", skip_serializing_if = "Option::is_none")]
    s_hat_std: Option<f64>,
    /// Standard deviation of the estimator given the true abundances.
    exact_sigma: f64,
    samples: Vec<SampleTrial>,
}

fn sampled(a: &ActionArgs, c: &CausalSet, coeff: &ActionCoefficients) -> Outcome {
    if coeff.d != 4 {
        return Err(Failure::parameter("the sample backend supports only d = 4"));
    }
    let pop = PairPopulation::new(c);
    let k = a.sample_size.unwrap_or_else(|| default_sample_size(pop.size()));
    let ratio = coeff.length_ratio;
    // Validate once before fanning out.
    pop.sample(k, &mut rng::stream(a.seed, 0))?;
    let samples: Vec<SampleTrial> = (0..a.trials)
        .into_par_iter()
        .map(|t| {
            let s = pop.sample(k, &mut rng::stream(a.seed ^ t, 0)).expect("validated");
            let e = estimate_sampled(&s, ratio);
            SampleTrial {
                trial: t,
                counts: s.counts,
                s_hat: e.s_hat,
                se_full: e.se_full,
                se_subadditive: e.se_subadditive,
                se_simple_bound: e.se_simple_bound,
            }
        })
        .collect();
    let m = samples.len() as f64;
    let mean = samples.iter().map(|s| s.s_hat).sum::<f64>() / m;
    let std =
        (samples.len() > 1).then(|| (samples.iter().map(|s| (s.s_hat - mean).powi(2)).sum::<f64>() / (m - 1.0)).sqrt());
    let r = SampleReport {
        n: c.n(),
        population: pop.size(),
        sample_size: k,
        trials: a.trials,
        seed: a.seed,
        length_ratio: ratio,
        s_true: bd_action_4d(&abundances(c, 3, Backend::Naive), ratio)?,
        s_hat_mean: mean,
        s_hat_std: std,
        exact_sigma: exact_sigma(&pop.abundances(), pop.size(), k, ratio),
        samples,
    };
    Ok(match a.format {
        Format::Json => output::json(&r),
        Format::Csv => output::csv(
            &["trial", "K", "K_0", "K_1", "K_2", "K_3", "S_hat", "se_full", "se_subadditive", "se_simple_bound"],
            r.samples.iter().map(|s| {
                let mut row = vec![s.trial.to_string(), r.sample_size.to_string()];
                row.extend(s.counts.iter().map(|v| v.to_string()));
                row.extend([s.s_hat, s.se_full, s.se_subadditive, s.se_simple_bound].map(float));
                row
            }),
        ),
        Format::Text => {
            let mut fields = vec![
                ("n", r.n.to_string()),
                ("N", r.population.to_string()),
                ("K", r.sample_size.to_string()),
                ("trials", r.trials.to_string()),
                ("S_true/hbar", float(r.s_true)),
                ("S_hat/hbar (mean)", float(r.s_hat_mean)),
            ];
            if let Some(sd) = r.s_hat_std {
                fields.push(("S_hat std", float(sd)));
            }
            fields.push(("exact sigma", float(r.exact_sigma)));
            if let Some(first) = r.samples.first() {
                fields.push(("se_full (trial 0)", float(first.se_full)));
                fields.push(("se_subadditive (trial 0)", float(first.se_subadditive)));
                fields.push(("se_simple_bound (trial 0)", float(first.se_simple_bound)));
            }
            output::text_fields(&fields)
        }
    })
}

fn quantum(a: &ActionArgs, c: &CausalSet, coeff: &ActionCoefficients) -> Outcome {
    let mode = match a.oracle_mode {
        OracleModeArg::Predicate => OracleMode::Predicate,
        OracleModeArg::Circuit => OracleMode::Circuit,
    };
    let runs = (0..a.trials)
        .into_par_iter()
        .map(|t| estimate_bd_action(c, coeff, a.epsilon, a.delta, a.seed, t, mode))
        .collect::<Result<Vec<_>, _>>()?;
    let r = ActionReport::from_runs(c, coeff, a.epsilon, a.delta, mode, &runs);
    Ok(match a.format {
        Format::Json => output::json(&r),
        Format::Csv => output::csv(
            &["trial", "k", "N_true", "N_hat", "queries", "zero_flag"],
            r.per_k.iter().map(|l| {
                vec![
                    l.trial.to_string(),
                    l.layer.k.to_string(),
                    l.layer.n_true.map_or(String::new(), |v| v.to_string()),
                    l.layer.n_hat.to_string(),
                    l.layer.queries.to_string(),
                    l.layer.zero_flag.to_string(),
                ]
            }),
        ),
        Format::Text => {
            let queries: u64 = runs.iter().map(|r| r.total_queries()).sum();
            let zero_flags = r.per_k.iter().filter(|l| l.layer.zero_flag).count();
            output::text_fields(&[
                ("n", r.n.to_string()),
                ("d", r.d.to_string()),
                ("epsilon", float(r.epsilon)),
                ("delta", float(r.delta)),
                ("trials", r.trials.to_string()),
                ("S_true/hbar", float(r.s_true)),
                ("S_hat/hbar (mean)", float(r.s_hat)),
                ("confidence", float(r.confidence)),
                ("width_qubits", r.width_qubits.to_string()),
                ("queries (all trials)", queries.to_string()),
                ("zero flags", zero_flags.to_string()),
            ])
        }
    })
}

#[derive(Serialize)]
struct OracleVerifyReport {
    n: usize,
    k: u64,
    width: usize,
    pairs: usize,
    correct: usize,
    ancillae_restored: usize,
    marked: usize,
}

pub fn oracle_verify(a: &OracleVerifyArgs) -> Outcome {
    if a.n == 0 {
        return Err(Failure::parameter("--n must be at least 1"));
    }
    let c = sized_instance(a.input.as_deref(), "random:0.3", a.mode, a.n, a.seed)?;
    let oracle = build_oracle(a.n, a.k)?;
    let refl = c.reflexive();
    let mut r = OracleVerifyReport {
        n: a.n,
        k: a.k,
        width: oracle.width(),
        pairs: 0,
        correct: 0,
        ancillae_restored: 0,
        marked: 0,
    };
    for i in 0..a.n {
        for j in 0..a.n {
            let (row, col) = (refl.row_bits(i), refl.col_bits(j));
            let input = oracle_input(&oracle, &row, &col).map_err(|e| Failure::parameter(e.to_string()))?;
            let out = run_reversible(&oracle, &input).map_err(|e| Failure::parameter(e.to_string()))?;
            let truth = oracle_truth(&row, &col, a.k);
            r.pairs += 1;
            r.correct += usize::from(out.phase_flipped == truth);
            r.ancillae_restored += usize::from(out.bits == input);
            r.marked += usize::from(truth);
        }
    }
    let summary = format!("{}/{} basis pairs correct", r.correct, r.pairs);
    if r.correct != r.pairs || r.ancillae_restored != r.pairs {
        return Err(Failure::validation(format!("{summary}, {}/{} restored ancillae", r.ancillae_restored, r.pairs)));
    }
    Ok(match a.format {
        Format::Json => output::json(&r),
        Format::Csv => output::csv(
            &["n", "k", "width", "pairs", "correct", "ancillae_restored", "marked"],
            [[r.n, r.k as usize, r.width, r.pairs, r.correct, r.ancillae_restored, r.marked]
                .map(|v| v.to_string())
                .to_vec()],
        ),
        Format::Text => format!(
            "{summary}\nancillae restored on {}/{} pairs\nmarked pairs: {}\nwidth: {}\n",
            r.ancillae_restored, r.pairs, r.marked, r.width
        ),
    })
}

#[derive(Serialize)]
struct ResourcesOut {
    circuit: &'static str,
    n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    k: Option<u64>,
    depth: u64,
    #[serde(flatten)]
    report: ResourceReport,
}

pub fn resources(a: &ResourcesArgs) -> Outcome {
    if a.n == 0 {
        return Err(Failure::parameter("--n must be at least 1"));
    }
    let (name, k, circuit) = match a.circuit {
        CircuitKind::Oracle => ("oracle", Some(a.k), build_oracle(a.n, a.k)?),
        CircuitKind::Dataprep => {
            let c = sized_instance(a.input.as_deref(), &a.gen, a.mode, a.n, a.seed)?;
            ("dataprep", None, build_data_prep(&c)?)
        }
    };
    let model = match a.model {
        ModelArg::Expanded => DepthModel::Expanded,
        ModelArg::Analytic => DepthModel::Analytic,
    };
    let cost = CostModel { c_mcx: a.c_mcx, c_fanout: a.c_fanout, c_prep: a.c_prep };
    if let Some(path) = &a.dump {
        fs::write(path, dump(&circuit))
            .map_err(|e| Failure::parameter(format!("cannot write {}: {e}", path.display())))?;
    }
    let report = circuit_resources(&circuit, model, &cost);
    let r = ResourcesOut { circuit: name, n: a.n, k, depth: report.depth(), report };
    let mut fields = vec![("circuit", r.circuit.to_string()), ("n", r.n.to_string())];
    if let Some(k) = r.k {
        fields.push(("k", k.to_string()));
    }
    fields.extend([
        ("model", format!("{model:?}").to_lowercase()),
        ("width", r.report.width.to_string()),
        ("ancilla_count", r.report.ancilla_count.to_string()),
        ("total_gates", r.report.total_gates.to_string()),
        ("depth", r.depth.to_string()),
        ("depth_layers", r.report.depth_layers.to_string()),
        ("analytic_depth_bound", r.report.analytic_depth_bound.to_string()),
    ]);
    let gate_fields: Vec<(String, String)> =
        r.report.gate_counts.iter().map(|(g, v)| (format!("gates_{g}"), v.to_string())).collect();
    fields.extend(gate_fields.iter().map(|(g, v)| (g.as_str(), v.clone())));
    Ok(match a.format {
        Format::Json => output::json(&r),
        Format::Csv => output::csv_fields(&fields),
        Format::Text => output::text_fields(&fields),
    })
}
