//! Gate and circuit vocabulary shared by the Pauli engine and the dense simulator.
//!
//! Qubit indices are flat, zero based. In a [`ShareLayout`] the flat index of
//! row `x`, column `y` (both one based) is `(x - 1) * (n + 1) + (y - 1)`.
//!
//! Circuits serialize to a line-oriented text format, one JSON object per gate:
//!
//! ```text
//! {"g":"H","q":[0]}
//! {"g":"CNOT","q":[0,1]}
//! {"g":"MEASURE_Z","q":[1],"c":0}
//! {"g":"X","q":[2],"cond":"b0^b1"}
//! ```

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// XOR of classical bit slots. The empty expression is constant 0.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct BitExpr {
    bits: Vec<usize>,
}

impl BitExpr {
    /// Builds the XOR of `bits`; repeated slots cancel in pairs.
    pub fn xor_of(bits: impl IntoIterator<Item = usize>) -> Self {
        let mut odd = BTreeSet::new();
        for b in bits {
            if !odd.remove(&b) {
                odd.insert(b);
            }
        }
        BitExpr {
            bits: odd.into_iter().collect(),
        }
    }

    pub fn bit(slot: usize) -> Self {
        BitExpr { bits: vec![slot] }
    }

    pub fn slots(&self) -> &[usize] {
        &self.bits
    }

    pub fn is_constant_zero(&self) -> bool {
        self.bits.is_empty()
    }

    /// Evaluates against a record of written bits (0/1 values).
    pub fn evaluate(&self, record: &[u8]) -> Result<bool> {
        let mut acc = 0u8;
        for &b in &self.bits {
            let v = record
                .get(b)
                .ok_or_else(|| Error::usage(format!("condition reads unwritten bit b{b}")))?;
            acc ^= v & 1;
        }
        Ok(acc == 1)
    }
}

impl fmt::Display for BitExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.bits.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.bits.iter().map(|b| format!("b{b}")).collect();
        write!(f, "{}", parts.join("^"))
    }
}

impl FromStr for BitExpr {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "0" {
            return Ok(BitExpr::default());
        }
        let mut slots = Vec::new();
        for part in s.split('^') {
            let part = part.trim();
            let digits = part
                .strip_prefix('b')
                .ok_or_else(|| Error::usage(format!("malformed bit expression {s:?}")))?;
            let slot = digits
                .parse::<usize>()
                .map_err(|_| Error::usage(format!("malformed bit expression {s:?}")))?;
            slots.push(slot);
        }
        Ok(BitExpr::xor_of(slots))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Gate {
    /// Identity on one qubit; expands to nothing.
    I(usize),
    H(usize),
    S(usize),
    Sdg(usize),
    X(usize),
    Y(usize),
    Z(usize),
    Cnot {
        control: usize,
        target: usize,
    },
    Cz(usize, usize),
    Toffoli {
        controls: [usize; 2],
        target: usize,
    },
    MeasureZ {
        qubit: usize,
        bit: usize,
    },
    Conditioned {
        condition: BitExpr,
        gate: Box<Gate>,
    },
}

impl Gate {
    pub fn cnot(control: usize, target: usize) -> Self {
        Gate::Cnot { control, target }
    }

    pub fn toffoli(c1: usize, c2: usize, target: usize) -> Self {
        Gate::Toffoli {
            controls: [c1, c2],
            target,
        }
    }

    pub fn measure(qubit: usize, bit: usize) -> Self {
        Gate::MeasureZ { qubit, bit }
    }

    pub fn conditioned(condition: BitExpr, gate: Gate) -> Self {
        Gate::Conditioned {
            condition,
            gate: Box::new(gate),
        }
    }

    /// Kind name as used in the circuit line format.
    pub fn kind_name(&self) -> &'static str {
        match self {
            Gate::I(_) => "I",
            Gate::H(_) => "H",
            Gate::S(_) => "S",
            Gate::Sdg(_) => "Sdg",
            Gate::X(_) => "X",
            Gate::Y(_) => "Y",
            Gate::Z(_) => "Z",
            Gate::Cnot { .. } => "CNOT",
            Gate::Cz(..) => "CZ",
            Gate::Toffoli { .. } => "TOFFOLI",
            Gate::MeasureZ { .. } => "MEASURE_Z",
            Gate::Conditioned { .. } => "CONDITIONED",
        }
    }

    /// Qubits touched, in operand order.
    pub fn qubits(&self) -> Vec<usize> {
        match self {
            Gate::I(q)
            | Gate::H(q)
            | Gate::S(q)
            | Gate::Sdg(q)
            | Gate::X(q)
            | Gate::Y(q)
            | Gate::Z(q) => vec![*q],
            Gate::Cnot { control, target } => vec![*control, *target],
            Gate::Cz(a, b) => vec![*a, *b],
            Gate::Toffoli { controls, target } => vec![controls[0], controls[1], *target],
            Gate::MeasureZ { qubit, .. } => vec![*qubit],
            Gate::Conditioned { gate, .. } => gate.qubits(),
        }
    }

    /// Unconditioned member of {I, H, S, Sdg, X, Y, Z, CNOT, CZ}.
    pub fn is_clifford(&self) -> bool {
        !matches!(
            self,
            Gate::Toffoli { .. } | Gate::MeasureZ { .. } | Gate::Conditioned { .. }
        )
    }

    pub fn is_unitary(&self) -> bool {
        !matches!(self, Gate::MeasureZ { .. } | Gate::Conditioned { .. })
    }

    /// Inverse of a unitary gate.
    pub fn inverse(&self) -> Result<Gate> {
        match self {
            Gate::S(q) => Ok(Gate::Sdg(*q)),
            Gate::Sdg(q) => Ok(Gate::S(*q)),
            g if g.is_unitary() => Ok(g.clone()),
            g => Err(Error::usage(format!("{} has no unitary inverse", g.kind_name()))),
        }
    }

    /// Relabels every qubit through `map`.
    pub fn remap(&self, map: impl Fn(usize) -> usize + Copy) -> Gate {
        match self {
            Gate::I(q) => Gate::I(map(*q)),
            Gate::H(q) => Gate::H(map(*q)),
            Gate::S(q) => Gate::S(map(*q)),
            Gate::Sdg(q) => Gate::Sdg(map(*q)),
            Gate::X(q) => Gate::X(map(*q)),
            Gate::Y(q) => Gate::Y(map(*q)),
            Gate::Z(q) => Gate::Z(map(*q)),
            Gate::Cnot { control, target } => Gate::cnot(map(*control), map(*target)),
            Gate::Cz(a, b) => Gate::Cz(map(*a), map(*b)),
            Gate::Toffoli { controls, target } => {
                Gate::toffoli(map(controls[0]), map(controls[1]), map(*target))
            }
            Gate::MeasureZ { qubit, bit } => Gate::measure(map(*qubit), *bit),
            Gate::Conditioned { condition, gate } => {
                Gate::conditioned(condition.clone(), gate.remap(map))
            }
        }
    }

    fn check_operands(&self, num_qubits: usize) -> Result<()> {
        let qs = self.qubits();
        for &q in &qs {
            if q >= num_qubits {
                return Err(Error::usage(format!(
                    "{} touches qubit {q} but the circuit has {num_qubits} qubits",
                    self.kind_name()
                )));
            }
        }
        let distinct: BTreeSet<_> = qs.iter().collect();
        if distinct.len() != qs.len() {
            return Err(Error::usage(format!(
                "{} operands must be distinct, got {qs:?}",
                self.kind_name()
            )));
        }
        if let Gate::Conditioned { gate, .. } = self {
            if matches!(**gate, Gate::MeasureZ { .. } | Gate::Conditioned { .. }) {
                return Err(Error::usage(
                    "conditioned gates must wrap a unitary gate".to_string(),
                ));
            }
        }
        Ok(())
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gate::MeasureZ { qubit, bit } => write!(f, "MEASURE_Z({qubit} -> b{bit})"),
            Gate::Conditioned { condition, gate } => write!(f, "[{condition}] {gate}"),
            g => write!(f, "{}{:?}", g.kind_name(), g.qubits()),
        }
    }
}

/// Ordered gate list over a fixed qubit register and classical bit record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Circuit {
    num_qubits: usize,
    num_classical_bits: usize,
    gates: Vec<Gate>,
    written: Vec<bool>,
}

impl Circuit {
    pub fn new(num_qubits: usize) -> Self {
        Circuit {
            num_qubits,
            num_classical_bits: 0,
            gates: Vec::new(),
            written: Vec::new(),
        }
    }

    pub fn from_gates(num_qubits: usize, gates: impl IntoIterator<Item = Gate>) -> Result<Self> {
        let mut c = Circuit::new(num_qubits);
        for g in gates {
            c.push(g)?;
        }
        Ok(c)
    }

    /// Appends a gate, checking operand range and that conditions only read
    /// bits an earlier measurement has written.
    pub fn push(&mut self, gate: Gate) -> Result<()> {
        gate.check_operands(self.num_qubits)?;
        match &gate {
            Gate::MeasureZ { bit, .. } => {
                if *bit >= self.written.len() {
                    self.written.resize(bit + 1, false);
                }
                self.written[*bit] = true;
                self.num_classical_bits = self.written.len();
            }
            Gate::Conditioned { condition, .. } => {
                for &b in condition.slots() {
                    if !self.written.get(b).copied().unwrap_or(false) {
                        return Err(Error::usage(format!(
                            "condition {condition} reads bit b{b} before it is measured"
                        )));
                    }
                }
            }
            _ => {}
        }
        self.gates.push(gate);
        Ok(())
    }

    pub fn extend(&mut self, gates: impl IntoIterator<Item = Gate>) -> Result<()> {
        for g in gates {
            self.push(g)?;
        }
        Ok(())
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn num_classical_bits(&self) -> usize {
        self.num_classical_bits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn has_measurements(&self) -> bool {
        self.gates.iter().any(|g| !g.is_unitary())
    }

    /// Reverse-order inverse of a measurement-free circuit.
    pub fn inverse(&self) -> Result<Circuit> {
        let gates = self
            .gates
            .iter()
            .rev()
            .map(Gate::inverse)
            .collect::<Result<Vec<_>>>()?;
        Circuit::from_gates(self.num_qubits, gates)
    }

    /// Serializes to the one-object-per-line text format.
    pub fn to_lines(&self) -> String {
        let mut out = String::new();
        for g in &self.gates {
            let line = GateLine::from(g);
            out.push_str(&serde_json::to_string(&line).expect("gate line serializes"));
            out.push('\n');
        }
        out
    }

    /// Parses the line format. Blank lines and lines starting with `#` are
    /// skipped. The register size is `num_qubits`, or one past the largest
    /// index seen when `None`.
    pub fn from_lines(text: &str, num_qubits: Option<usize>) -> Result<Circuit> {
        let mut gates = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parsed: GateLine = serde_json::from_str(line)
                .map_err(|e| Error::usage(format!("line {}: {e}", lineno + 1)))?;
            let gate = parsed
                .into_gate()
                .map_err(|e| Error::usage(format!("line {}: {e}", lineno + 1)))?;
            gates.push(gate);
        }
        let width = num_qubits.unwrap_or_else(|| {
            gates
                .iter()
                .flat_map(|g| g.qubits())
                .max()
                .map_or(0, |q| q + 1)
        });
        Circuit::from_gates(width, gates)
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct GateLine {
    g: String,
    q: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    c: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cond: Option<String>,
}

impl From<&Gate> for GateLine {
    fn from(g: &Gate) -> Self {
        match g {
            Gate::Conditioned { condition, gate } => {
                let mut line = GateLine::from(gate.as_ref());
                line.cond = Some(condition.to_string());
                line
            }
            Gate::MeasureZ { qubit, bit } => GateLine {
                g: g.kind_name().to_string(),
                q: vec![*qubit],
                c: Some(*bit),
                cond: None,
            },
            _ => GateLine {
                g: g.kind_name().to_string(),
                q: g.qubits(),
                c: None,
                cond: None,
            },
        }
    }
}

impl GateLine {
    fn into_gate(self) -> Result<Gate> {
        let arity = |n: usize| -> Result<()> {
            if self.q.len() == n {
                Ok(())
            } else {
                Err(Error::usage(format!(
                    "{} expects {n} qubit(s), got {}",
                    self.g,
                    self.q.len()
                )))
            }
        };
        let q = &self.q;
        let gate = match self.g.as_str() {
            "I" => arity(1).map(|_| Gate::I(q[0]))?,
            "H" => arity(1).map(|_| Gate::H(q[0]))?,
            "S" => arity(1).map(|_| Gate::S(q[0]))?,
            "Sdg" => arity(1).map(|_| Gate::Sdg(q[0]))?,
            "X" => arity(1).map(|_| Gate::X(q[0]))?,
            "Y" => arity(1).map(|_| Gate::Y(q[0]))?,
            "Z" => arity(1).map(|_| Gate::Z(q[0]))?,
            "CNOT" => arity(2).map(|_| Gate::cnot(q[0], q[1]))?,
            "CZ" => arity(2).map(|_| Gate::Cz(q[0], q[1]))?,
            "TOFFOLI" => arity(3).map(|_| Gate::toffoli(q[0], q[1], q[2]))?,
            "MEASURE_Z" => {
                arity(1)?;
                let bit = self
                    .c
                    .ok_or_else(|| Error::usage("MEASURE_Z needs a bit slot \"c\""))?;
                Gate::measure(q[0], bit)
            }
            other => return Err(Error::usage(format!("unknown gate kind {other:?}"))),
        };
        match self.cond {
            Some(expr) => Ok(Gate::conditioned(expr.parse()?, gate)),
            None => Ok(gate),
        }
    }
}

/// Which party holds a column of the share grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Party {
    Alice,
    /// Participant `P_i`, `i` in `1..=n`.
    Participant(usize),
}

impl Party {
    /// One-based column owned by this party.
    pub fn column(self) -> usize {
        match self {
            Party::Alice => 1,
            Party::Participant(i) => i + 1,
        }
    }

    pub fn of_column(y: usize) -> Party {
        if y == 1 {
            Party::Alice
        } else {
            Party::Participant(y - 1)
        }
    }
}

impl fmt::Display for Party {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Party::Alice => write!(f, "alice"),
            Party::Participant(i) => write!(f, "{i}"),
        }
    }
}

/// The (s + t) × (n + 1) qubit grid.
///
/// Rows `1..=s` carry the secret, rows `s+1..=s+t` the ancilla triples.
/// Column 1 is Alice's, column `y >= 2` belongs to participant `y - 1`.
/// `n = 0` gives a single-column (plaintext) layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ShareLayout {
    pub s: usize,
    pub t: usize,
    pub n: usize,
}

impl ShareLayout {
    pub fn new(s: usize, t: usize, n: usize) -> Self {
        ShareLayout { s, t, n }
    }

    pub fn rows(&self) -> usize {
        self.s + self.t
    }

    pub fn columns(&self) -> usize {
        self.n + 1
    }

    pub fn num_qubits(&self) -> usize {
        self.rows() * self.columns()
    }

    /// Flat index of row `x`, column `y` (both one based).
    pub fn index_of(&self, x: usize, y: usize) -> usize {
        assert!(
            (1..=self.rows()).contains(&x) && (1..=self.columns()).contains(&y),
            "grid position ({x},{y}) outside {}x{}",
            self.rows(),
            self.columns()
        );
        (x - 1) * self.columns() + (y - 1)
    }

    /// Inverse of [`index_of`](Self::index_of).
    pub fn position_of(&self, q: usize) -> (usize, usize) {
        (q / self.columns() + 1, q % self.columns() + 1)
    }

    pub fn row_qubits(&self, x: usize) -> Vec<usize> {
        (1..=self.columns()).map(|y| self.index_of(x, y)).collect()
    }

    pub fn column_qubits(&self, y: usize) -> Vec<usize> {
        (1..=self.rows()).map(|x| self.index_of(x, y)).collect()
    }

    pub fn owner(&self, q: usize) -> Party {
        Party::of_column(self.position_of(q).1)
    }

    pub fn ancilla_triples(&self) -> usize {
        self.t / 3
    }

    /// One-based rows of ancilla triple `j` (zero based).
    pub fn ancilla_rows(&self, j: usize) -> [usize; 3] {
        let base = self.s + 3 * j + 1;
        [base, base + 1, base + 2]
    }

    /// True when every qubit a gate touches sits in one column.
    pub fn is_column_local(&self, gate: &Gate) -> bool {
        let cols: BTreeSet<usize> = gate
            .qubits()
            .into_iter()
            .map(|q| self.position_of(q).1)
            .collect();
        cols.len() <= 1
    }
}
