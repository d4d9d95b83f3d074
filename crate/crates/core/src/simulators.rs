//! Basis-state (reversible) and dense state-vector simulation of circuits.

use num_complex::Complex64;
use thiserror::Error;

use crate::circuits::{Circuit, Control, Gate, GateKind, Qubit};

/// Widest circuit the state-vector simulator accepts.
pub const MAX_STATEVECTOR_WIDTH: usize = 24;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SimError {
    #[error("{0} gates are not classical reversible")]
    UnsupportedGate(GateKind),
    #[error("width {width} exceeds the state-vector limit of {max} qubits")]
    WidthTooLarge { width: usize, max: usize },
    #[error("input has {got} bits, circuit width is {expected}")]
    InputLength { expected: usize, got: usize },
    #[error("qubit {0} is the phase qubit and cannot act as a control")]
    PhaseControl(Qubit),
    #[error("the phase qubit must start in its reference state")]
    PhaseInput,
    #[error("uniform preparation applied to a register not in |0...0>")]
    PrepareOnNonzero,
    #[error("circuit has no register named `{0}`")]
    MissingRegister(String),
}

/// Result of running a classical circuit on one basis state. A NOT aimed
/// at the phase qubit (held in `|->`) toggles `phase_flipped` instead of a
/// bit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasisState {
    pub bits: Vec<bool>,
    pub phase_flipped: bool,
}

impl BasisState {
    /// Big-endian register value.
    pub fn read(&self, start: Qubit, len: usize) -> u64 {
        self.bits[start..start + len].iter().fold(0, |acc, &b| (acc << 1) | b as u64)
    }
}

pub fn run_reversible(c: &Circuit, input: &[bool]) -> Result<BasisState, SimError> {
    if input.len() != c.width() {
        return Err(SimError::InputLength { expected: c.width(), got: input.len() });
    }
    let phase = c.phase_qubit();
    if let Some(p) = phase {
        if input[p] {
            return Err(SimError::PhaseInput);
        }
    }
    let mut bits = input.to_vec();
    let mut flipped = false;
    let check_control = |q: Qubit| if Some(q) == phase { Err(SimError::PhaseControl(q)) } else { Ok(()) };
    let mut flip = |bits: &mut Vec<bool>, t: Qubit| {
        if Some(t) == phase {
            flipped = !flipped;
        } else {
            bits[t] = !bits[t];
        }
    };
    for g in c.gates() {
        match g {
            Gate::X(t) => flip(&mut bits, *t),
            Gate::Cnot { control, target } => {
                check_control(*control)?;
                if bits[*control] {
                    flip(&mut bits, *target);
                }
            }
            Gate::Toffoli { controls, target } => {
                check_control(controls[0])?;
                check_control(controls[1])?;
                if bits[controls[0]] && bits[controls[1]] {
                    flip(&mut bits, *target);
                }
            }
            Gate::Mcx { controls, target, .. } => {
                for ctl in controls {
                    check_control(ctl.qubit)?;
                }
                if controls.iter().all(|ctl| ctl.satisfied(bits[ctl.qubit])) {
                    flip(&mut bits, *target);
                }
            }
            Gate::FanOut { control, targets } => {
                check_control(*control)?;
                if bits[*control] {
                    for &t in targets {
                        flip(&mut bits, t);
                    }
                }
            }
            other => return Err(SimError::UnsupportedGate(other.kind())),
        }
    }
    Ok(BasisState { bits, phase_flipped: flipped })
}

/// Dense amplitudes over `2^width` basis states; qubit 0 is the most
/// significant bit of the index.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    width: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    pub fn basis(width: usize, index: usize) -> Result<Self, SimError> {
        if width > MAX_STATEVECTOR_WIDTH {
            return Err(SimError::WidthTooLarge { width, max: MAX_STATEVECTOR_WIDTH });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << width];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(StateVector { width, amps })
    }

    pub fn from_bits(bits: &[bool]) -> Result<Self, SimError> {
        Self::basis(bits.len(), bits.iter().fold(0, |acc, &b| (acc << 1) | b as usize))
    }

    pub fn from_amplitudes(width: usize, amps: Vec<Complex64>) -> Result<Self, SimError> {
        if width > MAX_STATEVECTOR_WIDTH {
            return Err(SimError::WidthTooLarge { width, max: MAX_STATEVECTOR_WIDTH });
        }
        assert_eq!(amps.len(), 1 << width);
        Ok(StateVector { width, amps })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    fn mask(&self, q: Qubit) -> usize {
        1 << (self.width - 1 - q)
    }

    fn satisfied(&self, i: usize, controls: &[Control]) -> bool {
        controls.iter().all(|c| c.satisfied(i & self.mask(c.qubit) != 0))
    }

    fn controlled_flip(&mut self, controls: &[Control], flip_mask: usize) {
        for i in 0..self.amps.len() {
            let j = i ^ flip_mask;
            if i < j && self.satisfied(i, controls) && self.satisfied(j, controls) {
                self.amps.swap(i, j);
            }
        }
    }

    pub fn apply(&mut self, g: &Gate) -> Result<(), SimError> {
        match g {
            Gate::X(t) => {
                let m = self.mask(*t);
                self.controlled_flip(&[], m);
            }
            Gate::Cnot { control, target } => {
                let m = self.mask(*target);
                self.controlled_flip(&[Control::closed(*control)], m);
            }
            Gate::Toffoli { controls, target } => {
                let m = self.mask(*target);
                self.controlled_flip(&[Control::closed(controls[0]), Control::closed(controls[1])], m);
            }
            Gate::Mcx { controls, target, .. } => {
                let m = self.mask(*target);
                self.controlled_flip(controls, m);
            }
            Gate::FanOut { control, targets } => {
                let m = targets.iter().fold(0, |acc, &t| acc | self.mask(t));
                self.controlled_flip(&[Control::closed(*control)], m);
            }
            Gate::Hadamard(t) => {
                let m = self.mask(*t);
                let s = std::f64::consts::FRAC_1_SQRT_2;
                for i in 0..self.amps.len() {
                    if i & m == 0 {
                        let (a, b) = (self.amps[i], self.amps[i | m]);
                        self.amps[i] = (a + b) * s;
                        self.amps[i | m] = (a - b) * s;
                    }
                }
            }
            Gate::PrepareUniform { start, len, states } => {
                let reg_mask = (*start..start + len).fold(0, |acc, q| acc | self.mask(q));
                let shift = self.width - start - len;
                if self.amps.iter().enumerate().any(|(i, a)| i & reg_mask != 0 && a.norm_sqr() > 0.0) {
                    return Err(SimError::PrepareOnNonzero);
                }
                let scale = 1.0 / (*states as f64).sqrt();
                for i in 0..self.amps.len() {
                    if i & reg_mask == 0 {
                        let a = self.amps[i] * scale;
                        for v in 0..*states as usize {
                            self.amps[i | (v << shift)] = a;
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

pub fn run_statevector(c: &Circuit, initial: StateVector) -> Result<StateVector, SimError> {
    if c.width() > MAX_STATEVECTOR_WIDTH {
        return Err(SimError::WidthTooLarge { width: c.width(), max: MAX_STATEVECTOR_WIDTH });
    }
    if initial.width() != c.width() {
        return Err(SimError::InputLength { expected: c.width(), got: initial.width() });
    }
    let mut s = initial;
    for g in c.gates() {
        s.apply(g)?;
    }
    Ok(s)
}

/// Reference predicate of `V_k`: the row/column dot product equals `k + 2`.
pub fn oracle_truth(row: &[bool], col: &[bool], k: u64) -> bool {
    row.iter().zip(col).filter(|(&a, &b)| a && b).count() as u64 == k + 2
}

/// Basis input for an oracle circuit with the `row` and `col` registers
/// loaded and everything else zero.
pub fn oracle_input(oracle: &Circuit, row: &[bool], col: &[bool]) -> Result<Vec<bool>, SimError> {
    let mut bits = vec![false; oracle.width()];
    for (name, value) in [("row", row), ("col", col)] {
        let r = oracle.register(name).ok_or_else(|| SimError::MissingRegister(name.into()))?;
        if r.len != value.len() {
            return Err(SimError::InputLength { expected: r.len, got: value.len() });
        }
        bits[r.qubits()].copy_from_slice(value);
    }
    Ok(bits)
}

/// Whether the oracle circuit marks this payload, read off from the phase.
pub fn oracle_marks(oracle: &Circuit, row: &[bool], col: &[bool]) -> Result<bool, SimError> {
    Ok(run_reversible(oracle, &oracle_input(oracle, row, col)?)?.phase_flipped)
}
