use std::fmt::Write;

use super::{Circuit, Gate, Qubit};

fn list(qs: impl IntoIterator<Item = String>) -> String {
    format!("[{}]", qs.into_iter().collect::<Vec<_>>().join(","))
}

fn q(x: Qubit) -> String {
    format!("q{x}")
}

/// Text dump with a commented register header and one gate per line.
pub fn dump(c: &Circuit) -> String {
    let mut s = String::new();
    writeln!(s, "# width {}", c.width()).unwrap();
    for r in c.registers() {
        if r.len == 0 {
            writeln!(s, "# register {} {} empty", r.name, r.role.name()).unwrap();
        } else {
            writeln!(s, "# register {} {} q{}..q{}", r.name, r.role.name(), r.start, r.start + r.len - 1).unwrap();
        }
    }
    for g in c.gates() {
        let line = match g {
            Gate::X(t) => format!("X {}", q(*t)),
            Gate::Hadamard(t) => format!("H {}", q(*t)),
            Gate::Cnot { control, target } => format!("CNOT {} {}", q(*control), q(*target)),
            Gate::Toffoli { controls, target } => format!("TOFF {} {} {}", q(controls[0]), q(controls[1]), q(*target)),
            Gate::Mcx { controls, target, borrowed } => {
                let cs = controls.iter().map(|c| format!("{}q{}", if c.open { '-' } else { '+' }, c.qubit));
                let mut l = format!("MCX {} {}", list(cs), q(*target));
                if let Some(b) = borrowed {
                    write!(l, " borrow={}", q(*b)).unwrap();
                }
                l
            }
            Gate::FanOut { control, targets } => {
                format!("FANOUT {} {}", q(*control), list(targets.iter().map(|&t| q(t))))
            }
            Gate::PrepareUniform { start, len, states } => {
                format!("PREP_UNIF r=[q{}..q{}] M={}", start, start + len - 1, states)
            }
        };
        s.push_str(&line);
        s.push('\n');
    }
    s
}
