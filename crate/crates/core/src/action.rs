//! Interval abundances and the Benincasa–Dowker action.
//!
//! Three exact backends compute the abundances `N_k`: a streaming popcount
//! over related pairs, a schoolbook square of `A + I`, and a Strassen square
//! of `A + I`. They must agree exactly.

use serde::Serialize;
use thiserror::Error;

use crate::causet::CausalSet;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ActionError {
    #[error("action needs abundances N_0..N_{} but only {got} were supplied", needed - 1)]
    InsufficientAbundances { needed: usize, got: usize },
    #[error("invalid coefficients: {0}")]
    InvalidCoefficients(String),
    #[error("coefficient file line {line}: {message}")]
    Parse { line: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Naive,
    Matrix,
    Strassen,
}

impl std::str::FromStr for Backend {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "naive" => Ok(Self::Naive),
            "matrix" => Ok(Self::Matrix),
            "strassen" => Ok(Self::Strassen),
            other => Err(format!("unknown exact backend `{other}`")),
        }
    }
}

/// Counts `N_0..N_kmax` of pairs whose inclusive interval holds `k + 2` elements.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AbundanceVector {
    pub n: usize,
    pub counts: Vec<u64>,
    pub related_pairs: u64,
}

impl AbundanceVector {
    pub fn kmax(&self) -> usize {
        self.counts.len() - 1
    }

    pub fn get(&self, k: usize) -> u64 {
        self.counts.get(k).copied().unwrap_or(0)
    }
}

/// The matrix of inclusive volumes `(A + I)^2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VolumeMatrix {
    n: usize,
    data: Vec<u32>,
}

impl VolumeMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    /// 0-based entry.
    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.data[i * self.n + j]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u32]> {
        self.data.chunks(self.n.max(1))
    }

    fn histogram(&self, len: usize) -> Vec<u64> {
        let mut counts = vec![0u64; len];
        for i in 0..self.n {
            for j in 0..self.n {
                let v = self.get(i, j) as usize;
                if i != j && v >= 2 && v - 2 < len {
                    counts[v - 2] += 1;
                }
            }
        }
        counts
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SquareMethod {
    Schoolbook,
    Strassen,
}

/// Exact integer square of `A + I`.
pub fn volume_matrix(c: &CausalSet, method: SquareMethod) -> VolumeMatrix {
    let n = c.n();
    let a = IntMatrix::from_fn(n, |i, j| i64::from(c.reflexive().matrix().get(i, j)));
    let sq = match method {
        SquareMethod::Schoolbook => schoolbook(&a, &a),
        SquareMethod::Strassen => strassen_multiply(&a, &a),
    };
    VolumeMatrix { n, data: sq.data.iter().map(|&v| v as u32).collect() }
}

/// Abundances `N_0..=N_kmax` with the chosen backend.
pub fn abundances(c: &CausalSet, kmax: usize, backend: Backend) -> AbundanceVector {
    let len = kmax + 1;
    let counts = match backend {
        Backend::Naive => naive_counts(c, len),
        Backend::Matrix => volume_matrix(c, SquareMethod::Schoolbook).histogram(len),
        Backend::Strassen => volume_matrix(c, SquareMethod::Strassen).histogram(len),
    };
    AbundanceVector { n: c.n(), counts, related_pairs: c.related_pairs() as u64 }
}

/// Every abundance `N_0..=N_{n-2}`; these sum to the related-pair count.
pub fn volume_histogram(c: &CausalSet, backend: Backend) -> AbundanceVector {
    abundances(c, c.n().saturating_sub(2), backend)
}

fn naive_counts(c: &CausalSet, len: usize) -> Vec<u64> {
    let mut counts = vec![0u64; len];
    let refl = c.reflexive();
    for i in 0..c.n() {
        for j in c.adjacency().ones_in_row(i) {
            let k = refl.volume_at(i, j) as usize - 2;
            if k < len {
                counts[k] += 1;
            }
        }
    }
    counts
}

/// Dense square integer matrix used by the multiplication routines.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntMatrix {
    n: usize,
    data: Vec<i64>,
}

impl IntMatrix {
    pub fn zeros(n: usize) -> Self {
        IntMatrix { n, data: vec![0; n * n] }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> i64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.data[i * n + j] = f(i, j);
            }
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.data[i * self.n + j]
    }

    #[inline]
    fn set(&mut self, i: usize, j: usize, v: i64) {
        self.data[i * self.n + j] = v;
    }

    fn zip(&self, other: &IntMatrix, f: impl Fn(i64, i64) -> i64) -> IntMatrix {
        IntMatrix { n: self.n, data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect() }
    }

    fn add(&self, o: &IntMatrix) -> IntMatrix {
        self.zip(o, |a, b| a + b)
    }

    fn sub(&self, o: &IntMatrix) -> IntMatrix {
        self.zip(o, |a, b| a - b)
    }

    fn quadrant(&self, qi: usize, qj: usize) -> IntMatrix {
        let h = self.n / 2;
        IntMatrix::from_fn(h, |i, j| self.get(qi * h + i, qj * h + j))
    }

    fn padded(&self, size: usize) -> IntMatrix {
        IntMatrix::from_fn(size, |i, j| if i < self.n && j < self.n { self.get(i, j) } else { 0 })
    }

    fn truncated(&self, size: usize) -> IntMatrix {
        IntMatrix::from_fn(size, |i, j| self.get(i, j))
    }
}

pub fn schoolbook(a: &IntMatrix, b: &IntMatrix) -> IntMatrix {
    assert_eq!(a.n, b.n);
    let n = a.n;
    let mut c = IntMatrix::zeros(n);
    for i in 0..n {
        for k in 0..n {
            let aik = a.get(i, k);
            if aik == 0 {
                continue;
            }
            let (brow, crow) = (&b.data[k * n..(k + 1) * n], &mut c.data[i * n..(i + 1) * n]);
            for (cv, bv) in crow.iter_mut().zip(brow) {
                *cv += aik * bv;
            }
        }
    }
    c
}

/// Recursion stops and falls back to schoolbook at this size.
pub const STRASSEN_BASE: usize = 64;

/// Strassen's seven-product recursion. Inputs are zero-padded to the next
/// power of two.
pub fn strassen_multiply(a: &IntMatrix, b: &IntMatrix) -> IntMatrix {
    assert_eq!(a.n, b.n);
    let n = a.n;
    if n == 0 {
        return IntMatrix::zeros(0);
    }
    let size = n.next_power_of_two();
    let c = strassen_pow2(&a.padded(size), &b.padded(size));
    c.truncated(n)
}

fn strassen_pow2(a: &IntMatrix, b: &IntMatrix) -> IntMatrix {
    let n = a.n;
    if n <= STRASSEN_BASE {
        return schoolbook(a, b);
    }
    let (a11, a12, a21, a22) = (a.quadrant(0, 0), a.quadrant(0, 1), a.quadrant(1, 0), a.quadrant(1, 1));
    let (b11, b12, b21, b22) = (b.quadrant(0, 0), b.quadrant(0, 1), b.quadrant(1, 0), b.quadrant(1, 1));

    let m1 = strassen_pow2(&a11.add(&a22), &b11.add(&b22));
    let m2 = strassen_pow2(&a21.add(&a22), &b11);
    let m3 = strassen_pow2(&a11, &b12.sub(&b22));
    let m4 = strassen_pow2(&a22, &b21.sub(&b11));
    let m5 = strassen_pow2(&a11.add(&a12), &b22);
    let m6 = strassen_pow2(&a21.sub(&a11), &b11.add(&b12));
    let m7 = strassen_pow2(&a12.sub(&a22), &b21.add(&b22));

    let c11 = m1.add(&m4).sub(&m5).add(&m7);
    let c12 = m3.add(&m5);
    let c21 = m2.add(&m4);
    let c22 = m1.sub(&m2).add(&m3).add(&m6);

    let h = n / 2;
    let mut c = IntMatrix::zeros(n);
    for i in 0..h {
        for j in 0..h {
            c.set(i, j, c11.get(i, j));
            c.set(i, j + h, c12.get(i, j));
            c.set(i + h, j, c21.get(i, j));
            c.set(i + h, j + h, c22.get(i, j));
        }
    }
    c
}

/// Number of abundance layers `n_d` entering the `d`-dimensional action.
pub fn layers_for_dimension(d: u32) -> usize {
    if d.is_multiple_of(2) {
        d as usize / 2 + 2
    } else {
        (d as usize - 1) / 2 + 2
    }
}

/// Coefficients of the `d`-dimensional action
/// `S/hbar = -alpha (l/l_p)^(d-2) [n + (beta/alpha) sum_k C_{k+1} N_k]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ActionCoefficients {
    pub d: u32,
    pub n_d: usize,
    pub length_ratio: f64,
    pub alpha: f64,
    pub beta: f64,
    pub c: Vec<f64>,
}

/// `4 / sqrt(6)`, the four-dimensional prefactor.
pub fn four_d_prefactor() -> f64 {
    4.0 / 6f64.sqrt()
}

/// Four-dimensional layer weights on `N_0..N_3`.
pub const FOUR_D_WEIGHTS: [i64; 4] = [-1, 9, -16, 8];

impl ActionCoefficients {
    pub fn new(d: u32, alpha: f64, beta: f64, c: Vec<f64>, length_ratio: f64) -> Result<Self, ActionError> {
        if d == 0 {
            return Err(ActionError::InvalidCoefficients("dimension must be positive".into()));
        }
        let n_d = layers_for_dimension(d);
        if c.len() != n_d {
            return Err(ActionError::InvalidCoefficients(format!(
                "d = {d} needs {n_d} layer coefficients, got {}",
                c.len()
            )));
        }
        if alpha == 0.0 || !alpha.is_finite() || !beta.is_finite() || c.iter().any(|v| !v.is_finite()) {
            return Err(ActionError::InvalidCoefficients("alpha must be nonzero and all values finite".into()));
        }
        if !(length_ratio.is_finite() && length_ratio > 0.0) {
            return Err(ActionError::InvalidCoefficients("length_ratio must be positive".into()));
        }
        Ok(ActionCoefficients { d, n_d, length_ratio, alpha, beta, c })
    }

    /// The built-in four-dimensional preset.
    ///
    /// With `alpha = beta = -4/sqrt(6)` and `C = (-1, 9, -16, 8)` the general
    /// formula reduces term by term to the four-dimensional one.
    pub fn four_dimensional(length_ratio: f64) -> Self {
        let alpha = -four_d_prefactor();
        let c = FOUR_D_WEIGHTS.iter().map(|&w| w as f64).collect();
        Self::new(4, alpha, alpha, c, length_ratio).expect("preset is valid")
    }

    /// Parses `key=value` lines: `d`, `n_d` (optional, checked), `alpha`,
    /// `beta`, `C` (comma separated) and `length_ratio` (default 1).
    pub fn from_config_text(text: &str) -> Result<Self, ActionError> {
        let mut d = None;
        let mut n_d = None;
        let mut alpha = None;
        let mut beta = None;
        let mut c = None;
        let mut length_ratio = 1.0;
        for (no, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| ActionError::Parse { line: no + 1, message };
            let (key, value) = line.split_once('=').ok_or_else(|| err(format!("expected key=value, got `{line}`")))?;
            let (key, value) = (key.trim(), value.trim());
            let real = |v: &str| v.trim().parse::<f64>().map_err(|e| err(format!("`{v}`: {e}")));
            match key {
                "d" => d = Some(value.parse::<u32>().map_err(|e| err(format!("`{value}`: {e}")))?),
                "n_d" => n_d = Some(value.parse::<usize>().map_err(|e| err(format!("`{value}`: {e}")))?),
                "alpha" => alpha = Some(real(value)?),
                "beta" => beta = Some(real(value)?),
                "C" => c = Some(value.split(',').map(real).collect::<Result<Vec<_>, _>>()?),
                "length_ratio" => length_ratio = real(value)?,
                other => return Err(err(format!("unknown key `{other}`"))),
            }
        }
        let missing = |k: &str| ActionError::InvalidCoefficients(format!("missing `{k}`"));
        let coeff = Self::new(
            d.ok_or_else(|| missing("d"))?,
            alpha.ok_or_else(|| missing("alpha"))?,
            beta.ok_or_else(|| missing("beta"))?,
            c.ok_or_else(|| missing("C"))?,
            length_ratio,
        )?;
        if let Some(given) = n_d {
            if given != coeff.n_d {
                return Err(ActionError::InvalidCoefficients(format!(
                    "n_d = {given} disagrees with d = {} (expected {})",
                    coeff.d, coeff.n_d
                )));
            }
        }
        Ok(coeff)
    }

    pub fn with_length_ratio(mut self, length_ratio: f64) -> Self {
        self.length_ratio = length_ratio;
        self
    }
}

/// `S/hbar` from a general coefficient set.
pub fn bd_action(ab: &AbundanceVector, coeff: &ActionCoefficients) -> Result<f64, ActionError> {
    let counts: Vec<f64> = ab.counts.iter().map(|&v| v as f64).collect();
    bd_action_from(ab.n, &counts, coeff)
}

/// Same as [`bd_action`] but from real-valued abundance estimates.
pub fn bd_action_from(n: usize, counts: &[f64], coeff: &ActionCoefficients) -> Result<f64, ActionError> {
    if counts.len() < coeff.n_d {
        return Err(ActionError::InsufficientAbundances { needed: coeff.n_d, got: counts.len() });
    }
    let layers: f64 = coeff.c.iter().zip(counts).map(|(ck, nk)| ck * nk).sum();
    let bracket = n as f64 + (coeff.beta / coeff.alpha) * layers;
    let prefactor = -coeff.alpha * coeff.length_ratio.powi(coeff.d as i32 - 2);
    Ok(prefactor * bracket)
}

/// The four-dimensional action `(4/sqrt 6)(l/l_p)^2 [n - N0 + 9N1 - 16N2 + 8N3]`,
/// bracket evaluated in exact integer arithmetic.
pub fn bd_action_4d(ab: &AbundanceVector, length_ratio: f64) -> Result<f64, ActionError> {
    if ab.counts.len() < 4 {
        return Err(ActionError::InsufficientAbundances { needed: 4, got: ab.counts.len() });
    }
    let bracket: i64 = ab.n as i64 + FOUR_D_WEIGHTS.iter().zip(&ab.counts).map(|(&w, &nk)| w * nk as i64).sum::<i64>();
    Ok(four_d_prefactor() * length_ratio * length_ratio * bracket as f64)
}
