//! Finite causal sets as transitively closed DAGs stored in bit matrices.
//!
//! Elements are labelled `1..=n` at the public surface. Internally all
//! matrices are 0-based, so element `i` lives in row `i - 1`.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fmt::Write as _;

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::bits::{and_popcount, BitMatrix};
use crate::rng;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CausetError {
    #[error("relation contains a cycle through element {element}")]
    Cycle { element: usize },
    #[error("relation is not irreflexive: ({element}, {element}) present")]
    Reflexive { element: usize },
    #[error("relation is not transitive: {i} < {k} < {j} but not {i} < {j}")]
    Transitivity { i: usize, k: usize, j: usize },
    #[error("index {index} out of range 1..={n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// How [`CausalSet::from_pairs`] treats a relation that is not transitively closed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ClosureMode {
    /// Reject anything that violates the partial-order axioms.
    #[default]
    Strict,
    /// Accept any acyclic relation and take its transitive closure.
    Close,
}

impl std::str::FromStr for ClosureMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "strict" => Ok(Self::Strict),
            "close" => Ok(Self::Close),
            other => Err(format!("unknown mode `{other}` (expected strict|close)")),
        }
    }
}

/// Rows and columns of the reflexive adjacency matrix `A + I`.
///
/// Both orientations are materialized so that the inclusive volume of any
/// pair is a single word-parallel popcount.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReflexiveAdjacency {
    rows: BitMatrix,
    cols: BitMatrix,
}

impl ReflexiveAdjacency {
    fn new(adj: &BitMatrix) -> Self {
        let mut rows = adj.clone();
        for i in 0..adj.n() {
            rows.set(i, i, true);
        }
        let cols = rows.transpose();
        ReflexiveAdjacency { rows, cols }
    }

    pub fn n(&self) -> usize {
        self.rows.n()
    }

    pub fn matrix(&self) -> &BitMatrix {
        &self.rows
    }

    /// `r_i` as bits, 0-based row index.
    pub fn row_bits(&self, i: usize) -> Vec<bool> {
        self.rows.row_bits(i)
    }

    /// `c_j` as bits, 0-based column index.
    pub fn col_bits(&self, j: usize) -> Vec<bool> {
        self.cols.row_bits(j)
    }

    /// Inclusive volume for 0-based indices.
    #[inline]
    pub fn volume_at(&self, i: usize, j: usize) -> u32 {
        and_popcount(self.rows.row(i), self.cols.row(j))
    }
}

/// A finite causal set on elements `1..=n`.
///
/// Immutable once built: the relation is irreflexive, asymmetric and
/// transitive.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CausalSet {
    adj: BitMatrix,
    reflexive: ReflexiveAdjacency,
}

impl CausalSet {
    /// Builds a causal set from 1-indexed related pairs `(i, j)` meaning `i < j`.
    pub fn from_pairs(n: usize, pairs: &[(usize, usize)], mode: ClosureMode) -> Result<Self, CausetError> {
        let mut adj = BitMatrix::zeros(n);
        for &(i, j) in pairs {
            for index in [i, j] {
                if index == 0 || index > n {
                    return Err(CausetError::IndexOutOfRange { index, n });
                }
            }
            adj.set(i - 1, j - 1, true);
        }
        Self::from_matrix(adj, mode)
    }

    /// Builds a causal set from a 0-based adjacency matrix.
    pub fn from_matrix(mut adj: BitMatrix, mode: ClosureMode) -> Result<Self, CausetError> {
        let n = adj.n();
        if let Some(i) = (0..n).find(|&i| adj.get(i, i)) {
            return Err(CausetError::Reflexive { element: i + 1 });
        }
        let t = adj.transpose();
        if !adj.is_disjoint(&t) {
            let (i, _) = first_common(&adj, &t).expect("non-disjoint matrices share an entry");
            return Err(CausetError::Cycle { element: i + 1 });
        }
        if let Err(element) = kahn(&adj) {
            return Err(CausetError::Cycle { element: element + 1 });
        }
        match mode {
            ClosureMode::Strict => {
                if let Some((i, k, j)) = transitivity_violation(&adj) {
                    return Err(CausetError::Transitivity { i: i + 1, k: k + 1, j: j + 1 });
                }
            }
            ClosureMode::Close => close_in_place(&mut adj),
        }
        Ok(Self::from_closed(adj))
    }

    fn from_closed(adj: BitMatrix) -> Self {
        let reflexive = ReflexiveAdjacency::new(&adj);
        CausalSet { adj, reflexive }
    }

    pub fn chain(n: usize) -> Self {
        let mut adj = BitMatrix::zeros(n);
        for i in 0..n {
            for j in i + 1..n {
                adj.set(i, j, true);
            }
        }
        Self::from_closed(adj)
    }

    pub fn antichain(n: usize) -> Self {
        Self::from_closed(BitMatrix::zeros(n))
    }

    pub fn n(&self) -> usize {
        self.adj.n()
    }

    /// The adjacency matrix `A` (0-based).
    pub fn adjacency(&self) -> &BitMatrix {
        &self.adj
    }

    pub fn reflexive(&self) -> &ReflexiveAdjacency {
        &self.reflexive
    }

    /// `i < j`, 1-indexed.
    pub fn precedes(&self, i: usize, j: usize) -> Result<bool, CausetError> {
        self.check_index(i)?;
        self.check_index(j)?;
        Ok(self.adj.get(i - 1, j - 1))
    }

    /// Number of related pairs `|E|`.
    pub fn related_pairs(&self) -> usize {
        self.adj.count_ones()
    }

    /// Related pairs as 0-based `(i, j)` in row-major order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.n()).flat_map(|i| self.adj.ones_in_row(i).map(move |j| (i, j))).collect()
    }

    /// `|I[i, j]|`, the inclusive discrete volume of a 1-indexed pair: the dot
    /// product of row `i` and column `j` of `A + I`.
    pub fn inclusive_volume(&self, i: usize, j: usize) -> Result<u32, CausetError> {
        self.check_index(i)?;
        self.check_index(j)?;
        Ok(self.reflexive.volume_at(i - 1, j - 1))
    }

    /// Kahn's algorithm, ties broken by smallest label. Returns 1-indexed labels.
    pub fn topological_order(&self) -> Vec<usize> {
        kahn(&self.adj).expect("causal sets are acyclic by construction").into_iter().map(|i| i + 1).collect()
    }

    /// Relabels element `i` (0-based) as `perm[i]`.
    pub fn relabeled(&self, perm: &[usize]) -> Self {
        Self::from_closed(self.adj.permuted(perm))
    }

    /// Exhaustive O(n^3) check of the three partial-order axioms.
    pub fn check_axioms(&self) -> Result<(), CausetError> {
        Self::from_matrix(self.adj.clone(), ClosureMode::Strict).map(|_| ())
    }

    fn check_index(&self, index: usize) -> Result<(), CausetError> {
        if index == 0 || index > self.n() {
            Err(CausetError::IndexOutOfRange { index, n: self.n() })
        } else {
            Ok(())
        }
    }
}

fn first_common(a: &BitMatrix, b: &BitMatrix) -> Option<(usize, usize)> {
    (0..a.n()).find_map(|i| a.ones_in_row(i).find(|&j| b.get(i, j)).map(|j| (i, j)))
}

/// Deterministic Kahn ordering; on a cycle returns some element that was
/// never released.
fn kahn(adj: &BitMatrix) -> Result<Vec<usize>, usize> {
    let n = adj.n();
    let mut indegree = vec![0usize; n];
    for i in 0..n {
        for j in adj.ones_in_row(i) {
            indegree[j] += 1;
        }
    }
    let mut ready: BinaryHeap<Reverse<usize>> = (0..n).filter(|&i| indegree[i] == 0).map(Reverse).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(Reverse(i)) = ready.pop() {
        order.push(i);
        for j in adj.ones_in_row(i) {
            indegree[j] -= 1;
            if indegree[j] == 0 {
                ready.push(Reverse(j));
            }
        }
    }
    if order.len() == n {
        Ok(order)
    } else {
        Err((0..n).find(|&i| indegree[i] > 0).unwrap_or(0))
    }
}

/// First `(i, k, j)` with `i < k < j` but not `i < j`, via Boolean `A * A`.
fn transitivity_violation(adj: &BitMatrix) -> Option<(usize, usize, usize)> {
    let n = adj.n();
    for i in 0..n {
        for k in adj.ones_in_row(i) {
            let missing = adj.row(k).iter().zip(adj.row(i)).enumerate().find_map(|(w, (rk, ri))| {
                let m = rk & !ri;
                (m != 0).then(|| w * 64 + m.trailing_zeros() as usize)
            });
            if let Some(j) = missing {
                return Some((i, k, j));
            }
        }
    }
    None
}

/// Warshall's closure on packed rows.
fn close_in_place(adj: &mut BitMatrix) {
    let n = adj.n();
    for k in 0..n {
        for i in 0..n {
            if adj.get(i, k) {
                adj.or_row_into(k, i);
            }
        }
    }
}

/// Test-instance generators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum GeneratorModel {
    Chain,
    Antichain,
    /// Each pair `i < j` related with probability `p`, then closed.
    RandomOrder(f64),
    /// Consecutive layers of width `w`, every element of a layer below every
    /// element of the next one.
    Layered(usize),
}

impl std::str::FromStr for GeneratorModel {
    type Err = String;

    /// Accepts `chain`, `antichain`, `random:<p>` and `layered:<w>`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (name, arg) = match s.split_once(':') {
            Some((a, b)) => (a, Some(b)),
            None => (s, None),
        };
        match (name, arg) {
            ("chain", None) => Ok(Self::Chain),
            ("antichain", None) => Ok(Self::Antichain),
            ("random", Some(p)) => p.parse().map(Self::RandomOrder).map_err(|e| format!("{e}")),
            ("layered", Some(w)) => w.parse().map(Self::Layered).map_err(|e| format!("{e}")),
            _ => Err(format!("unknown model `{s}` (chain|antichain|random:<p>|layered:<w>)")),
        }
    }
}

pub fn generate(n: usize, model: GeneratorModel, seed: u64) -> Result<CausalSet, CausetError> {
    if n == 0 {
        return Err(CausetError::InvalidParameter("n must be at least 1".into()));
    }
    match model {
        GeneratorModel::Chain => Ok(CausalSet::chain(n)),
        GeneratorModel::Antichain => Ok(CausalSet::antichain(n)),
        GeneratorModel::RandomOrder(p) => {
            if !(0.0..=1.0).contains(&p) {
                return Err(CausetError::InvalidParameter(format!("p = {p} outside [0, 1]")));
            }
            let mut rng = rng::stream(seed, 0);
            let mut adj = BitMatrix::zeros(n);
            for i in 0..n {
                for j in i + 1..n {
                    if rng.random_bool(p) {
                        adj.set(i, j, true);
                    }
                }
            }
            close_in_place(&mut adj);
            Ok(CausalSet::from_closed(adj))
        }
        GeneratorModel::Layered(w) => {
            if w == 0 {
                return Err(CausetError::InvalidParameter("layer width must be positive".into()));
            }
            let mut adj = BitMatrix::zeros(n);
            for i in 0..n {
                for j in 0..n {
                    if j / w > i / w {
                        adj.set(i, j, true);
                    }
                }
            }
            Ok(CausalSet::from_closed(adj))
        }
    }
}

/// Output style for [`to_text`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TextStyle {
    Pairs,
    Matrix,
}

/// Serializes in the `n=<int>` text format.
pub fn to_text(c: &CausalSet, style: TextStyle) -> String {
    let mut out = format!("n={}\n", c.n());
    match style {
        TextStyle::Pairs => {
            for (i, j) in c.edges() {
                let _ = writeln!(out, "{} {}", i + 1, j + 1);
            }
        }
        TextStyle::Matrix => {
            out.push_str("matrix:\n");
            for i in 0..c.n() {
                let row: String = (0..c.n()).map(|j| if c.adj.get(i, j) { '1' } else { '0' }).collect();
                out.push_str(&row);
                out.push('\n');
            }
        }
    }
    out
}

/// Parses the `n=<int>` text format: a header followed by either `i j`
/// pair lines or a `matrix:` block of `n` rows. Blank lines and lines
/// starting with `#` are ignored.
pub fn parse_text(text: &str, mode: ClosureMode) -> Result<CausalSet, CausetError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(no, l)| (no + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let parse_err = |line: usize, message: String| CausetError::Parse { line, message };

    let (hline, header) = lines.next().ok_or_else(|| parse_err(1, "missing `n=` header".into()))?;
    let n: usize = header
        .strip_prefix("n=")
        .ok_or_else(|| parse_err(hline, format!("expected `n=<int>`, found `{header}`")))?
        .trim()
        .parse()
        .map_err(|e| parse_err(hline, format!("bad element count: {e}")))?;

    let mut pairs = Vec::new();
    let mut matrix_rows: Option<Vec<String>> = None;
    for (no, line) in lines {
        if let Some(rows) = matrix_rows.as_mut() {
            rows.push(line.to_string());
            continue;
        }
        if line == "matrix:" {
            if !pairs.is_empty() {
                return Err(parse_err(no, "`matrix:` cannot follow pair lines".into()));
            }
            matrix_rows = Some(Vec::with_capacity(n));
            continue;
        }
        let mut fields = line.split_whitespace();
        let mut next = || -> Result<usize, CausetError> {
            fields
                .next()
                .ok_or_else(|| parse_err(no, "expected two indices".into()))?
                .parse()
                .map_err(|e| parse_err(no, format!("bad index: {e}")))
        };
        let (i, j) = (next()?, next()?);
        if fields.next().is_some() {
            return Err(parse_err(no, "expected exactly two indices".into()));
        }
        pairs.push((i, j));
    }
    match matrix_rows {
        Some(rows) => {
            if rows.len() != n {
                return Err(parse_err(hline, format!("expected {n} matrix rows, found {}", rows.len())));
            }
            let m = BitMatrix::from_rows(&rows)
                .ok_or_else(|| parse_err(hline, "matrix rows must be n characters of 0/1".into()))?;
            CausalSet::from_matrix(m, mode)
        }
        None => CausalSet::from_pairs(n, &pairs, mode),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain3_pairs() -> Vec<(usize, usize)> {
        vec![(1, 2), (2, 3), (1, 3)]
    }

    #[test]
    fn strict_accepts_closed_chain() {
        let c = CausalSet::from_pairs(3, &chain3_pairs(), ClosureMode::Strict).unwrap();
        assert_eq!(c, CausalSet::chain(3));
    }

    #[test]
    fn strict_rejects_unclosed_close_fixes_it() {
        let pairs = [(1, 2), (2, 3)];
        let err = CausalSet::from_pairs(3, &pairs, ClosureMode::Strict).unwrap_err();
        assert_eq!(err, CausetError::Transitivity { i: 1, k: 2, j: 3 });
        let c = CausalSet::from_pairs(3, &pairs, ClosureMode::Close).unwrap();
        assert!(c.precedes(1, 3).unwrap());
        assert_eq!(c, CausalSet::chain(3));
    }

    #[test]
    fn two_cycle_is_rejected_in_both_modes() {
        for mode in [ClosureMode::Strict, ClosureMode::Close] {
            let err = CausalSet::from_pairs(2, &[(1, 2), (2, 1)], mode).unwrap_err();
            assert!(matches!(err, CausetError::Cycle { .. }), "{err:?}");
        }
    }

    #[test]
    fn long_cycle_is_rejected_before_closure() {
        let err = CausalSet::from_pairs(3, &[(1, 2), (2, 3), (3, 1)], ClosureMode::Close).unwrap_err();
        assert!(matches!(err, CausetError::Cycle { .. }));
    }

    #[test]
    fn reflexive_and_range_errors() {
        assert_eq!(
            CausalSet::from_pairs(3, &[(2, 2)], ClosureMode::Close).unwrap_err(),
            CausetError::Reflexive { element: 2 }
        );
        assert_eq!(
            CausalSet::from_pairs(3, &[(1, 4)], ClosureMode::Strict).unwrap_err(),
            CausetError::IndexOutOfRange { index: 4, n: 3 }
        );
        assert!(CausalSet::chain(3).inclusive_volume(0, 1).is_err());
    }

    #[test]
    fn topological_order_examples() {
        assert_eq!(CausalSet::chain(3).topological_order(), vec![1, 2, 3]);
        let reversed = CausalSet::from_pairs(3, &[(3, 2), (2, 1), (3, 1)], ClosureMode::Strict).unwrap();
        assert_eq!(reversed.topological_order(), vec![3, 2, 1]);
        // Ties resolve to the smallest label.
        assert_eq!(CausalSet::antichain(4).topological_order(), vec![1, 2, 3, 4]);
    }

    #[test]
    fn inclusive_volume_examples() {
        let c2 = CausalSet::chain(2);
        assert_eq!(c2.inclusive_volume(1, 2).unwrap(), 2);
        assert_eq!(c2.inclusive_volume(2, 1).unwrap(), 0);
        let c3 = CausalSet::chain(3);
        assert_eq!(c3.inclusive_volume(1, 3).unwrap(), 3);
        assert_eq!(c3.inclusive_volume(2, 2).unwrap(), 1);
        let a = CausalSet::antichain(3);
        assert_eq!(a.inclusive_volume(1, 2).unwrap(), 0);
    }

    #[test]
    fn generators() {
        let a = generate(5, GeneratorModel::Antichain, 0).unwrap();
        assert_eq!(a.related_pairs(), 0);
        let c = generate(5, GeneratorModel::Chain, 0).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                assert_eq!(c.adjacency().get(i, j), j > i);
            }
        }
        let r = generate(32, GeneratorModel::RandomOrder(0.3), 7).unwrap();
        r.check_axioms().unwrap();
        assert_eq!(r, generate(32, GeneratorModel::RandomOrder(0.3), 7).unwrap());
        let l = generate(7, GeneratorModel::Layered(3), 0).unwrap();
        l.check_axioms().unwrap();
        // Layers of sizes 3, 3, 1.
        assert_eq!(l.related_pairs(), 9 + 3 + 3);
        assert!(generate(0, GeneratorModel::Chain, 0).is_err());
        assert!(generate(4, GeneratorModel::RandomOrder(1.5), 0).is_err());
        assert!(generate(4, GeneratorModel::Layered(0), 0).is_err());
    }

    #[test]
    fn text_round_trip_both_styles() {
        let c = generate(12, GeneratorModel::RandomOrder(0.4), 3).unwrap();
        for style in [TextStyle::Pairs, TextStyle::Matrix] {
            let text = to_text(&c, style);
            assert_eq!(parse_text(&text, ClosureMode::Strict).unwrap(), c);
        }
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(parse_text("", ClosureMode::Strict), Err(CausetError::Parse { .. })));
        assert!(matches!(parse_text("n=3\n1 x\n", ClosureMode::Strict), Err(CausetError::Parse { line: 2, .. })));
        assert!(matches!(parse_text("n=2\nmatrix:\n01\n", ClosureMode::Strict), Err(CausetError::Parse { .. })));
        let c = parse_text("# a chain\nn=3\n1 2\n\n2 3\n", ClosureMode::Close).unwrap();
        assert_eq!(c, CausalSet::chain(3));
        assert!(matches!(parse_text("n=3\n1 2\n2 3\n", ClosureMode::Strict), Err(CausetError::Transitivity { .. })));
    }

    #[test]
    fn model_parsing() {
        assert_eq!("chain".parse::<GeneratorModel>().unwrap(), GeneratorModel::Chain);
        assert_eq!("random:0.25".parse::<GeneratorModel>().unwrap(), GeneratorModel::RandomOrder(0.25));
        assert_eq!("layered:4".parse::<GeneratorModel>().unwrap(), GeneratorModel::Layered(4));
        assert!("random".parse::<GeneratorModel>().is_err());
    }
}
