use std::collections::BTreeMap;
use std::str::FromStr;

use serde::Serialize;

use super::builders::{append_fanout_tree, ceil_log2};
use super::{Circuit, Gate};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DepthModel {
    /// Concrete gates layered greedily at unit depth. Fan-outs become CNOT
    /// trees and small open-controlled gates are X-conjugated; larger MCX
    /// gates stay opaque.
    Expanded,
    /// Abstract gates charged with their asymptotic depth formulas.
    Analytic,
}

impl FromStr for DepthModel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "expanded" => Ok(DepthModel::Expanded),
            "analytic" => Ok(DepthModel::Analytic),
            other => Err(format!("unknown depth model `{other}` (expected expanded|analytic)")),
        }
    }
}

/// Constants of the analytic model: `MCX(m) = c_mcx ceil(log2 m)^3`,
/// `FanOut(w) = c_fanout ceil(log2 w)`, `PrepareUniform(M) = c_prep ceil(log2 M)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CostModel {
    pub c_mcx: u64,
    pub c_fanout: u64,
    pub c_prep: u64,
}

impl Default for CostModel {
    fn default() -> Self {
        CostModel { c_mcx: 1, c_fanout: 1, c_prep: 1 }
    }
}

impl CostModel {
    pub fn gate_depth(&self, g: &Gate) -> u64 {
        let lg = |x: usize| (ceil_log2(x.max(1) as u64) as u64).max(1);
        match g {
            Gate::Mcx { controls, .. } => self.c_mcx * lg(controls.len()).pow(3),
            Gate::FanOut { targets, .. } => self.c_fanout * lg(targets.len()),
            Gate::PrepareUniform { states, .. } => self.c_prep * lg(*states as usize),
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResourceReport {
    pub model: DepthModel,
    pub width: usize,
    pub ancilla_count: usize,
    pub gate_counts: BTreeMap<String, usize>,
    pub total_gates: usize,
    /// Layer count of the greedy unit-depth schedule of the gate sequence
    /// the model sees.
    pub depth_layers: u64,
    /// Weighted critical path under the analytic cost model.
    pub analytic_depth_bound: u64,
}

impl ResourceReport {
    /// The depth the chosen model stands for.
    pub fn depth(&self) -> u64 {
        match self.model {
            DepthModel::Expanded => self.depth_layers,
            DepthModel::Analytic => self.analytic_depth_bound,
        }
    }
}

/// Rewrites fan-outs and small open-controlled gates into basic gates.
pub fn expand(gates: &[Gate]) -> Vec<Gate> {
    let mut out = Vec::with_capacity(gates.len());
    for g in gates {
        match g {
            Gate::FanOut { control, targets } => append_fanout_tree(&mut out, *control, targets),
            Gate::Mcx { controls, target, .. } if controls.len() <= 2 => {
                let flips: Vec<Gate> = controls.iter().filter(|c| c.open).map(|c| Gate::X(c.qubit)).collect();
                out.extend(flips.iter().cloned());
                let closed = controls.iter().map(|c| super::Control::closed(c.qubit)).collect();
                out.push(Gate::controlled_x(closed, *target, None));
                out.extend(flips);
            }
            other => out.push(other.clone()),
        }
    }
    out
}

/// ASAP schedule: each gate starts once all its qubits are free and holds
/// them for `cost(g)`.
fn critical_path(width: usize, gates: &[Gate], cost: impl Fn(&Gate) -> u64) -> u64 {
    let mut free = vec![0u64; width];
    let mut depth = 0;
    for g in gates {
        let qs = g.qubits();
        let start = qs.iter().map(|&q| free[q]).max().unwrap_or(0);
        let end = start + cost(g);
        for q in qs {
            free[q] = end;
        }
        depth = depth.max(end);
    }
    depth
}

fn counts(gates: &[Gate]) -> BTreeMap<String, usize> {
    let mut m = BTreeMap::new();
    for g in gates {
        *m.entry(g.kind().to_string()).or_insert(0) += 1;
    }
    m
}

pub fn resources(c: &Circuit, model: DepthModel, cost: &CostModel) -> ResourceReport {
    let expanded;
    let seen: &[Gate] = match model {
        DepthModel::Expanded => {
            expanded = expand(c.gates());
            &expanded
        }
        DepthModel::Analytic => c.gates(),
    };
    ResourceReport {
        model,
        width: c.width(),
        ancilla_count: c.ancilla_count(),
        gate_counts: counts(seen),
        total_gates: seen.len(),
        depth_layers: critical_path(c.width(), seen, |_| 1),
        analytic_depth_bound: critical_path(c.width(), c.gates(), |g| cost.gate_depth(g)),
    }
}

#[cfg(test)]
mod tests {
    use super::super::*;
    use super::*;

    #[test]
    fn four_control_cascade() {
        let r = resources(&mcx_cascade(4).unwrap(), DepthModel::Expanded, &CostModel::default());
        assert_eq!(r.gate_counts.get("TOFF"), Some(&5));
        assert_eq!(r.total_gates, 5);
        assert_eq!(r.depth_layers, 3);
        assert_eq!(r.ancilla_count, 2);
    }

    #[test]
    fn cascade_depth_formula() {
        for m in 2..=40usize {
            let r = resources(&mcx_cascade(m).unwrap(), DepthModel::Expanded, &CostModel::default());
            assert_eq!(r.depth_layers, 2 * ceil_log2(m as u64) as u64 - 1, "m = {m}");
        }
    }

    fn fanout(w: usize) -> Circuit {
        let mut b = CircuitBuilder::new();
        b.register("control", RegisterRole::Control, 1);
        b.register("targets", RegisterRole::Data, w);
        b.push(Gate::FanOut { control: 0, targets: (1..=w).collect() }).unwrap();
        b.build()
    }

    #[test]
    fn fanout_models() {
        let a = resources(&fanout(8), DepthModel::Analytic, &CostModel::default());
        assert_eq!(a.analytic_depth_bound, 3);
        assert_eq!(a.depth(), 3);
        for w in 1..=70usize {
            let e = resources(&fanout(w), DepthModel::Expanded, &CostModel::default());
            let lower = ceil_log2(w as u64 + 1) as u64;
            assert!(e.depth_layers >= lower && e.depth_layers < 2 * lower, "w = {w}");
            assert_eq!(e.gate_counts.get("CNOT").copied(), Some(e.total_gates));
        }
    }

    #[test]
    fn analytic_charges_abstract_gates() {
        let mut b = CircuitBuilder::new();
        b.register("r", RegisterRole::Data, 9);
        b.push(Gate::Mcx { controls: (0..8).map(Control::closed).collect(), target: 8, borrowed: None }).unwrap();
        b.push(Gate::PrepareUniform { start: 0, len: 4, states: 16 }).unwrap();
        let c = b.build();
        let r = resources(&c, DepthModel::Analytic, &CostModel::default());
        assert_eq!(r.analytic_depth_bound, 27 + 4);
        let r = resources(&c, DepthModel::Expanded, &CostModel::default());
        assert_eq!(r.depth_layers, 2);
    }

    #[test]
    fn expanded_open_controls() {
        let g = vec![Gate::Mcx { controls: vec![Control::open(0), Control::closed(1)], target: 2, borrowed: None }];
        let e = expand(&g);
        assert_eq!(e.len(), 3);
        assert_eq!(e[1], Gate::Toffoli { controls: [0, 1], target: 2 });
    }
}
