//! Gate-level circuit representation and the builders for every circuit the
//! algorithm needs.
//!
//! Registers are big-endian: the first qubit of a register holds its most
//! significant bit. The same convention fixes the ordering of basis indices
//! in the simulators.

mod builders;
mod dump;
mod resources;

pub use builders::*;
pub use dump::dump;
pub use resources::{resources, CostModel, DepthModel, ResourceReport};

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

pub type Qubit = usize;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CircuitError {
    #[error("need {needed} ancillae, got {supplied}")]
    InsufficientAncillae { needed: usize, supplied: usize },
    #[error("value {value} does not fit in {bits} bits")]
    OutOfRange { value: u128, bits: usize },
    #[error("k + 2 = {target} does not fit in a {bits}-qubit volume register")]
    KTooLarge { target: u64, bits: usize },
    #[error("gate references qubit {qubit} but the circuit has width {width}")]
    QubitOutOfRange { qubit: Qubit, width: usize },
    #[error("gate acts on qubit {0} more than once")]
    OverlappingQubits(Qubit),
    #[error("registers `{0}` and `{1}` overlap")]
    OverlappingRegisters(String, String),
    #[error("invalid argument: {0}")]
    Invalid(String),
}

/// A control line; `open` controls fire on `|0>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Control {
    pub qubit: Qubit,
    pub open: bool,
}

impl Control {
    pub fn closed(qubit: Qubit) -> Self {
        Control { qubit, open: false }
    }

    pub fn open(qubit: Qubit) -> Self {
        Control { qubit, open: true }
    }

    #[inline]
    pub fn satisfied(&self, bit: bool) -> bool {
        bit != self.open
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Gate {
    X(Qubit),
    Cnot {
        control: Qubit,
        target: Qubit,
    },
    Toffoli {
        controls: [Qubit; 2],
        target: Qubit,
    },
    /// Multi-controlled NOT. `borrowed` names a qubit lent to the
    /// decomposition as a dirty ancilla; it is left unchanged.
    Mcx {
        controls: Vec<Control>,
        target: Qubit,
        borrowed: Option<Qubit>,
    },
    FanOut {
        control: Qubit,
        targets: Vec<Qubit>,
    },
    Hadamard(Qubit),
    /// Uniform superposition over the first `states` basis states of a
    /// contiguous register. Abstract: only defined on `|0...0>`.
    PrepareUniform {
        start: Qubit,
        len: usize,
        states: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum GateKind {
    X,
    Cnot,
    Toffoli,
    Mcx,
    FanOut,
    Hadamard,
    PrepareUniform,
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            GateKind::X => "X",
            GateKind::Cnot => "CNOT",
            GateKind::Toffoli => "TOFF",
            GateKind::Mcx => "MCX",
            GateKind::FanOut => "FANOUT",
            GateKind::Hadamard => "H",
            GateKind::PrepareUniform => "PREP_UNIF",
        };
        f.write_str(s)
    }
}

impl Gate {
    /// Builds the smallest gate for an arbitrary control set: `X`, `CNOT`,
    /// Toffoli, or `MCX` when there are open controls or more than two.
    pub fn controlled_x(controls: Vec<Control>, target: Qubit, borrowed: Option<Qubit>) -> Gate {
        let all_closed = controls.iter().all(|c| !c.open);
        match controls.len() {
            0 => Gate::X(target),
            1 if all_closed => Gate::Cnot { control: controls[0].qubit, target },
            2 if all_closed => Gate::Toffoli { controls: [controls[0].qubit, controls[1].qubit], target },
            _ => Gate::Mcx { controls, target, borrowed },
        }
    }

    pub fn kind(&self) -> GateKind {
        match self {
            Gate::X(_) => GateKind::X,
            Gate::Cnot { .. } => GateKind::Cnot,
            Gate::Toffoli { .. } => GateKind::Toffoli,
            Gate::Mcx { .. } => GateKind::Mcx,
            Gate::FanOut { .. } => GateKind::FanOut,
            Gate::Hadamard(_) => GateKind::Hadamard,
            Gate::PrepareUniform { .. } => GateKind::PrepareUniform,
        }
    }

    /// Every qubit the gate touches, including a borrowed ancilla.
    pub fn qubits(&self) -> Vec<Qubit> {
        match self {
            Gate::X(q) | Gate::Hadamard(q) => vec![*q],
            Gate::Cnot { control, target } => vec![*control, *target],
            Gate::Toffoli { controls, target } => vec![controls[0], controls[1], *target],
            Gate::Mcx { controls, target, borrowed } => {
                let mut v: Vec<Qubit> = controls.iter().map(|c| c.qubit).collect();
                v.push(*target);
                v.extend(borrowed);
                v
            }
            Gate::FanOut { control, targets } => {
                let mut v = vec![*control];
                v.extend(targets);
                v
            }
            Gate::PrepareUniform { start, len, .. } => (*start..start + len).collect(),
        }
    }

    /// True for gates that permute computational basis states.
    pub fn is_classical(&self) -> bool {
        !matches!(self, Gate::Hadamard(_) | Gate::PrepareUniform { .. })
    }

    fn validate(&self, width: usize) -> Result<(), CircuitError> {
        let mut seen = BTreeSet::new();
        for q in self.qubits() {
            if q >= width {
                return Err(CircuitError::QubitOutOfRange { qubit: q, width });
            }
            if !seen.insert(q) {
                return Err(CircuitError::OverlappingQubits(q));
            }
        }
        if let Gate::PrepareUniform { len, states, .. } = self {
            if *states == 0 || (*len < 64 && *states > 1u64 << len) {
                return Err(CircuitError::Invalid(format!("{states} states do not fit in {len} qubits")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RegisterRole {
    /// Index register enumerating data (`C`).
    Control,
    /// Payload qubits (`T`, row and column strings).
    Data,
    And,
    Volume,
    Compare,
    Phase,
    Ancilla,
}

impl RegisterRole {
    pub fn is_ancilla(self) -> bool {
        !matches!(self, RegisterRole::Control | RegisterRole::Data)
    }

    pub fn name(self) -> &'static str {
        match self {
            RegisterRole::Control => "control",
            RegisterRole::Data => "data",
            RegisterRole::And => "and",
            RegisterRole::Volume => "volume",
            RegisterRole::Compare => "compare",
            RegisterRole::Phase => "phase",
            RegisterRole::Ancilla => "ancilla",
        }
    }
}

/// A named contiguous qubit range.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Register {
    pub name: String,
    pub role: RegisterRole,
    pub start: Qubit,
    pub len: usize,
}

impl Register {
    pub fn qubit(&self, i: usize) -> Qubit {
        assert!(i < self.len, "register `{}` has {} qubits", self.name, self.len);
        self.start + i
    }

    pub fn qubits(&self) -> std::ops::Range<Qubit> {
        self.start..self.start + self.len
    }
}

/// An immutable gate sequence with its register layout.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Circuit {
    width: usize,
    registers: Vec<Register>,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn registers(&self) -> &[Register] {
        &self.registers
    }

    pub fn register(&self, name: &str) -> Option<&Register> {
        self.registers.iter().find(|r| r.name == name)
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// The single phase-kickback qubit, if the layout has one.
    pub fn phase_qubit(&self) -> Option<Qubit> {
        self.registers.iter().find(|r| r.role == RegisterRole::Phase).map(|r| r.start)
    }

    pub fn ancilla_count(&self) -> usize {
        self.registers.iter().filter(|r| r.role.is_ancilla()).map(|r| r.len).sum()
    }

    /// The circuit with its gate order reversed. Every gate kind except
    /// `Hadamard`/`PrepareUniform` is self-inverse.
    pub fn reversed(&self) -> Circuit {
        let mut c = self.clone();
        c.gates.reverse();
        c
    }
}

/// Incremental construction of a [`Circuit`]. Registers are allocated in
/// order and every pushed gate is validated.
#[derive(Debug, Default)]
pub struct CircuitBuilder {
    width: usize,
    registers: Vec<Register>,
    gates: Vec<Gate>,
}

impl CircuitBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&mut self, name: &str, role: RegisterRole, len: usize) -> Register {
        let reg = Register { name: name.to_string(), role, start: self.width, len };
        self.width += len;
        self.registers.push(reg.clone());
        reg
    }

    pub fn push(&mut self, gate: Gate) -> Result<(), CircuitError> {
        gate.validate(self.width)?;
        self.gates.push(gate);
        Ok(())
    }

    pub fn extend(&mut self, gates: impl IntoIterator<Item = Gate>) -> Result<(), CircuitError> {
        for g in gates {
            self.push(g)?;
        }
        Ok(())
    }

    pub fn build(self) -> Circuit {
        Circuit { width: self.width, registers: self.registers, gates: self.gates }
    }
}

impl Circuit {
    /// Assembles a circuit from explicit parts, checking register
    /// disjointness and every gate's qubit references.
    pub fn from_parts(width: usize, registers: Vec<Register>, gates: Vec<Gate>) -> Result<Circuit, CircuitError> {
        for (a, ra) in registers.iter().enumerate() {
            if ra.start + ra.len > width {
                return Err(CircuitError::QubitOutOfRange { qubit: ra.start + ra.len - 1, width });
            }
            for rb in &registers[a + 1..] {
                if ra.start < rb.start + rb.len && rb.start < ra.start + ra.len {
                    return Err(CircuitError::OverlappingRegisters(ra.name.clone(), rb.name.clone()));
                }
            }
        }
        for g in &gates {
            g.validate(width)?;
        }
        Ok(Circuit { width, registers, gates })
    }
}
