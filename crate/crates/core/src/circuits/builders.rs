use super::{Circuit, CircuitBuilder, CircuitError, Control, Gate, Qubit, RegisterRole};
use crate::causet::CausalSet;

/// `ceil(log2(x))` for `x >= 1`.
pub fn ceil_log2(x: u64) -> u32 {
    assert!(x >= 1);
    64 - (x - 1).leading_zeros()
}

/// `floor(log2(x))` for `x >= 1`.
pub fn floor_log2(x: u64) -> u32 {
    assert!(x >= 1);
    63 - x.leading_zeros()
}

/// Appends the Toffoli cascade computing `target ^= AND(controls)`.
///
/// Controls are combined pairwise in a balanced tree whose internal nodes are
/// the clean ancillae; the tree is then uncomputed, so `m` controls cost
/// `2m - 3` Toffolis in `2 ceil(log2 m) - 1` layers and `m - 2` ancillae.
pub fn append_mcx_cascade(
    out: &mut Vec<Gate>,
    controls: &[Qubit],
    target: Qubit,
    ancillae: &[Qubit],
) -> Result<(), CircuitError> {
    let m = controls.len();
    match m {
        0 => {
            out.push(Gate::X(target));
            return Ok(());
        }
        1 => {
            out.push(Gate::Cnot { control: controls[0], target });
            return Ok(());
        }
        _ => {}
    }
    let needed = m - 2;
    if ancillae.len() < needed {
        return Err(CircuitError::InsufficientAncillae { needed, supplied: ancillae.len() });
    }
    let mut free = ancillae.iter().copied();
    let mut level: Vec<Qubit> = controls.to_vec();
    let mut compute = Vec::with_capacity(needed);
    while level.len() > 2 {
        let mut next = Vec::with_capacity(level.len().div_ceil(2));
        for pair in level.chunks(2) {
            if let [a, b] = *pair {
                let anc = free.next().expect("ancilla count checked above");
                compute.push(Gate::Toffoli { controls: [a, b], target: anc });
                next.push(anc);
            } else {
                next.push(pair[0]);
            }
        }
        level = next;
    }
    out.extend(compute.iter().cloned());
    out.push(Gate::Toffoli { controls: [level[0], level[1]], target });
    out.extend(compute.into_iter().rev());
    Ok(())
}

/// Standalone `C^m NOT` cascade: registers `controls` (m), `ancilla`
/// (`max(m - 2, 0)`) and `target` (1).
pub fn mcx_cascade(m: usize) -> Result<Circuit, CircuitError> {
    if m == 0 {
        return Err(CircuitError::Invalid("C^m NOT needs m >= 1".into()));
    }
    let mut b = CircuitBuilder::new();
    let controls = b.register("controls", RegisterRole::Control, m);
    let anc = b.register("ancilla", RegisterRole::Ancilla, m.saturating_sub(2));
    let target = b.register("target", RegisterRole::Data, 1);
    let mut gates = Vec::new();
    append_mcx_cascade(
        &mut gates,
        &controls.qubits().collect::<Vec<_>>(),
        target.qubit(0),
        &anc.qubits().collect::<Vec<_>>(),
    )?;
    b.extend(gates)?;
    Ok(b.build())
}

/// Appends a fan-out `t ^= control` for every target as a CNOT tree.
///
/// Nodes `0..=w` (0 being the control) form a binomial tree where node `j`
/// hangs off `j - 2^floor(log2 j)`. Targets are first rewritten as
/// differences from their parents, bottom-up, then the control is pushed
/// down the tree level by level. Works for arbitrary target values; depth
/// is at most `2 ceil(log2(w + 1)) - 1`.
pub fn append_fanout_tree(out: &mut Vec<Gate>, control: Qubit, targets: &[Qubit]) {
    let w = targets.len();
    if w == 0 {
        return;
    }
    let node = |j: usize| if j == 0 { control } else { targets[j - 1] };
    let parent = |j: usize| j - (1usize << floor_log2(j as u64));
    let levels = ceil_log2(w as u64 + 1) as usize;
    let level_nodes = |l: usize| (1usize << (l - 1))..(1usize << l).min(w + 1);

    for l in (2..=levels).rev() {
        for j in level_nodes(l) {
            if parent(j) != 0 {
                out.push(Gate::Cnot { control: node(parent(j)), target: node(j) });
            }
        }
    }
    for l in 1..=levels {
        for j in level_nodes(l) {
            out.push(Gate::Cnot { control: node(parent(j)), target: node(j) });
        }
    }
}

/// Appends `C^m NOT^w`: the AND of the (closed) controls is computed into
/// `ancillae[0]` with a cascade using `ancillae[1..]`, fanned out to the
/// targets, then uncomputed. One control fans out directly. Needs `m - 1`
/// ancillae for `m >= 2`.
pub fn append_mcmx(
    out: &mut Vec<Gate>,
    controls: &[Qubit],
    targets: &[Qubit],
    ancillae: &[Qubit],
) -> Result<(), CircuitError> {
    if targets.is_empty() {
        return Err(CircuitError::Invalid("C^m NOT^n needs at least one target".into()));
    }
    match controls.len() {
        0 => {
            out.extend(targets.iter().map(|&t| Gate::X(t)));
            Ok(())
        }
        1 => {
            append_fanout_tree(out, controls[0], targets);
            Ok(())
        }
        m => {
            if ancillae.len() < m - 1 {
                return Err(CircuitError::InsufficientAncillae { needed: m - 1, supplied: ancillae.len() });
            }
            let (and, rest) = (ancillae[0], &ancillae[1..]);
            append_mcx_cascade(out, controls, and, rest)?;
            append_fanout_tree(out, and, targets);
            append_mcx_cascade(out, controls, and, rest)?;
            Ok(())
        }
    }
}

/// Standalone `C^m NOT^w` with the targets given as a mask over a
/// `target_mask.len()`-qubit data register.
pub fn mcmx(m: usize, target_mask: &[bool]) -> Result<Circuit, CircuitError> {
    if !target_mask.iter().any(|&b| b) {
        return Err(CircuitError::Invalid("target mask is empty".into()));
    }
    if m == 0 {
        return Err(CircuitError::Invalid("C^m NOT^n needs m >= 1".into()));
    }
    let mut b = CircuitBuilder::new();
    let controls = b.register("controls", RegisterRole::Control, m);
    let anc = b.register("ancilla", RegisterRole::Ancilla, m.saturating_sub(1));
    let data = b.register("targets", RegisterRole::Data, target_mask.len());
    let targets: Vec<Qubit> = target_mask.iter().enumerate().filter(|(_, &t)| t).map(|(i, _)| data.qubit(i)).collect();
    let mut gates = Vec::new();
    append_mcmx(&mut gates, &controls.qubits().collect::<Vec<_>>(), &targets, &anc.qubits().collect::<Vec<_>>())?;
    b.extend(gates)?;
    Ok(b.build())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Incr,
    Decr,
}

/// Appends `INCR` (or `DECR`) on a big-endian register: bit `j` flips when
/// every less significant bit is set, most significant bit first. `extra`
/// controls are added to every gate; `borrow` is lent to the resulting
/// multi-controlled gates.
pub fn append_incr_decr(
    out: &mut Vec<Gate>,
    register: &[Qubit],
    direction: Direction,
    extra: &[Qubit],
    borrow: Option<Qubit>,
) {
    let q = register.len();
    let mut gates: Vec<Gate> = (0..q)
        .map(|j| {
            let mut controls: Vec<Control> = extra.iter().map(|&c| Control::closed(c)).collect();
            controls.extend(register[j + 1..].iter().map(|&c| Control::closed(c)));
            let borrow = if controls.len() > 2 { borrow } else { None };
            Gate::controlled_x(controls, register[j], borrow)
        })
        .collect();
    if direction == Direction::Decr {
        gates.reverse();
    }
    out.extend(gates);
}

/// Standalone modular increment/decrement on a `q`-qubit register `value`,
/// optionally controlled by one extra qubit.
pub fn incr_decr(q: usize, direction: Direction, controlled: bool) -> Result<Circuit, CircuitError> {
    if q == 0 {
        return Err(CircuitError::Invalid("register needs at least one qubit".into()));
    }
    let mut b = CircuitBuilder::new();
    let ctrl = controlled.then(|| b.register("control", RegisterRole::Control, 1));
    let value = b.register("value", RegisterRole::Data, q);
    let extra: Vec<Qubit> = ctrl.iter().map(|r| r.qubit(0)).collect();
    let mut gates = Vec::new();
    append_incr_decr(&mut gates, &value.qubits().collect::<Vec<_>>(), direction, &extra, None);
    b.extend(gates)?;
    Ok(b.build())
}

/// Big-endian bits of `value` over `bits` positions.
pub fn to_bits(value: u128, bits: usize) -> Vec<bool> {
    (0..bits).map(|p| (value >> (bits - 1 - p)) & 1 == 1).collect()
}

/// Appends `X_t^c`: flip the payload bits of `t` when the index register
/// equals `c`. Every index qubit is a control; those at 0-bits of `c` are
/// conjugated with `X`, so `c = 0` conjugates them all. Needs
/// `len(index) - 1` ancillae.
pub fn append_data_load(
    out: &mut Vec<Gate>,
    c: u64,
    payload: &[bool],
    index: &[Qubit],
    data: &[Qubit],
    ancillae: &[Qubit],
) -> Result<(), CircuitError> {
    let n_c = index.len();
    if n_c < 64 && c >= 1u64 << n_c {
        return Err(CircuitError::OutOfRange { value: c as u128, bits: n_c });
    }
    assert_eq!(payload.len(), data.len());
    let targets: Vec<Qubit> = payload.iter().zip(data).filter(|(&b, _)| b).map(|(_, &q)| q).collect();
    if targets.is_empty() {
        return Ok(());
    }
    let flips: Vec<Gate> =
        to_bits(c as u128, n_c).iter().zip(index).filter(|(&b, _)| !b).map(|(_, &q)| Gate::X(q)).collect();
    out.extend(flips.iter().cloned());
    append_mcmx(out, index, &targets, ancillae)?;
    out.extend(flips);
    Ok(())
}

/// Standalone `X_t^c` over registers `index` (`n_c`), `data` (`n_t`) and
/// `ancilla` (`n_c - 1`).
pub fn data_load_gate(c: u64, t: u128, n_c: usize, n_t: usize) -> Result<Circuit, CircuitError> {
    if n_c == 0 || n_t == 0 || n_t > 128 {
        return Err(CircuitError::Invalid("need 1 <= n_C and 1 <= n_T <= 128".into()));
    }
    if n_t < 128 && t >= 1u128 << n_t {
        return Err(CircuitError::OutOfRange { value: t, bits: n_t });
    }
    let mut b = CircuitBuilder::new();
    let index = b.register("index", RegisterRole::Control, n_c);
    let data = b.register("data", RegisterRole::Data, n_t);
    let anc = b.register("ancilla", RegisterRole::Ancilla, n_c - 1);
    let mut gates = Vec::new();
    append_data_load(
        &mut gates,
        c,
        &to_bits(t, n_t),
        &index.qubits().collect::<Vec<_>>(),
        &data.qubits().collect::<Vec<_>>(),
        &anc.qubits().collect::<Vec<_>>(),
    )?;
    b.extend(gates)?;
    Ok(b.build())
}

/// `h(i, j) = (i - 1) n + j - 1` for 1-indexed `i, j`.
pub fn pair_index(i: usize, j: usize, n: usize) -> Result<u64, CircuitError> {
    for v in [i, j] {
        if v == 0 || v > n {
            return Err(CircuitError::OutOfRange { value: v as u128, bits: 0 });
        }
    }
    Ok(((i - 1) * n + j - 1) as u64)
}

/// Inverse of [`pair_index`]: `i = 1 + h / n`, `j = 1 + h mod n`.
pub fn pair_from_index(h: u64, n: usize) -> Result<(usize, usize), CircuitError> {
    let n64 = n as u64;
    if n == 0 || h >= n64 * n64 {
        return Err(CircuitError::OutOfRange { value: h as u128, bits: 0 });
    }
    Ok((1 + (h / n64) as usize, 1 + (h % n64) as usize))
}

/// Qubits in the index register of the data-preparation circuit:
/// `ceil(2 log2 n)`, at least one.
pub fn index_qubits(n: usize) -> usize {
    (ceil_log2((n * n) as u64) as usize).max(1)
}

/// The payload `r_i c_j` loaded for pair index `h`.
pub fn pair_payload(c: &CausalSet, h: u64) -> Vec<bool> {
    let (i, j) = pair_from_index(h, c.n()).expect("h < n^2");
    let mut bits = c.reflexive().row_bits(i - 1);
    bits.extend(c.reflexive().col_bits(j - 1));
    bits
}

/// Uniform preparation over the `n^2` first index states followed by the
/// `n^2` data-loading gates `X_{f(h)}^h`, `f(h) = r_i(h) c_j(h)`.
///
/// Registers: `index` (`ceil(2 log2 n)`), `row` (n), `col` (n) and reusable
/// `ancilla` (`ceil(2 log2 n) - 1`).
pub fn build_data_prep(c: &CausalSet) -> Result<Circuit, CircuitError> {
    let n = c.n();
    let n_c = index_qubits(n);
    let mut b = CircuitBuilder::new();
    let index = b.register("index", RegisterRole::Control, n_c);
    let row = b.register("row", RegisterRole::Data, n);
    let col = b.register("col", RegisterRole::Data, n);
    let anc = b.register("ancilla", RegisterRole::Ancilla, n_c - 1);
    b.push(Gate::PrepareUniform { start: index.start, len: n_c, states: (n * n) as u64 })?;

    let index_q: Vec<Qubit> = index.qubits().collect();
    let data_q: Vec<Qubit> = row.qubits().chain(col.qubits()).collect();
    let anc_q: Vec<Qubit> = anc.qubits().collect();
    let mut gates = Vec::new();
    for h in 0..(n * n) as u64 {
        append_data_load(&mut gates, h, &pair_payload(c, h), &index_q, &data_q, &anc_q)?;
    }
    b.extend(gates)?;
    Ok(b.build())
}

/// Bits in the volume and compare registers: `1 + floor(log2 n)`.
pub fn volume_qubits(n: usize) -> usize {
    1 + floor_log2(n as u64) as usize
}

/// The oracle `V_k` marking row/column payloads with dot product `k + 2`.
///
/// Registers, in order: `row` (n), `col` (n), `and` (1), `volume` (q),
/// `compare` (q), `phase` (1) with `q = 1 + floor(log2 n)`. For each bit
/// position the AND of the row and column bits is computed into `and`,
/// which controls an increment of `volume`, and is then uncomputed. The
/// volume is XORed into `compare` (holding `k + 2`), an open-controlled
/// MCX kicks the phase when `compare` is all zero, and everything is
/// uncomputed. The phase and AND qubits are lent as borrowed ancillae to
/// the multi-controlled gates.
pub fn build_oracle(n: usize, k: u64) -> Result<Circuit, CircuitError> {
    if n == 0 {
        return Err(CircuitError::Invalid("oracle needs n >= 1".into()));
    }
    let q = volume_qubits(n);
    let target = k + 2;
    if target > (1u64 << q) - 1 {
        return Err(CircuitError::KTooLarge { target, bits: q });
    }
    let mut b = CircuitBuilder::new();
    let row = b.register("row", RegisterRole::Data, n);
    let col = b.register("col", RegisterRole::Data, n);
    let and = b.register("and", RegisterRole::And, 1).qubit(0);
    let volume: Vec<Qubit> = b.register("volume", RegisterRole::Volume, q).qubits().collect();
    let compare: Vec<Qubit> = b.register("compare", RegisterRole::Compare, q).qubits().collect();
    let phase = b.register("phase", RegisterRole::Phase, 1).qubit(0);

    let prep: Vec<Gate> =
        to_bits(target as u128, q).iter().zip(&compare).filter(|(&bit, _)| bit).map(|(_, &qb)| Gate::X(qb)).collect();
    let xor_volume: Vec<Gate> =
        volume.iter().zip(&compare).map(|(&v, &c)| Gate::Cnot { control: v, target: c }).collect();

    let mut g = prep.clone();
    for bit in 0..n {
        let and_gate = Gate::Toffoli { controls: [row.qubit(bit), col.qubit(bit)], target: and };
        g.push(and_gate.clone());
        append_incr_decr(&mut g, &volume, Direction::Incr, &[and], Some(phase));
        g.push(and_gate);
    }
    g.extend(xor_volume.iter().cloned());
    g.push(Gate::controlled_x(compare.iter().map(|&c| Control::open(c)).collect(), phase, Some(and)));
    g.extend(xor_volume);
    for bit in (0..n).rev() {
        let and_gate = Gate::Toffoli { controls: [row.qubit(bit), col.qubit(bit)], target: and };
        g.push(and_gate.clone());
        append_incr_decr(&mut g, &volume, Direction::Decr, &[and], Some(phase));
        g.push(and_gate);
    }
    g.extend(prep);
    b.extend(g)?;
    Ok(b.build())
}

/// Oracle width `2(n + floor(log2 n) + 2)`.
pub fn oracle_width(n: usize) -> usize {
    2 * (n + floor_log2(n as u64) as usize + 2)
}

/// Total width of the counting stage: `2n + ceil(2 log2 n) + 2 floor(log2 n) + 4`.
pub fn algorithm_width(n: usize) -> usize {
    oracle_width(n) + index_qubits(n)
}

/// Width of the data-preparation circuit: `2(n + ceil(2 log2 n)) - 1`.
pub fn data_prep_width(n: usize) -> usize {
    2 * (n + index_qubits(n)) - 1
}
