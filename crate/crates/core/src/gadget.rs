//! Logical gates on shares: transversal Cliffords and the Toffoli gadget.
//!
//! A logical gate on logical qubit `q` acts on layout row `q + 1`. Row
//! encodings differ with the parity of the column count `m = n + 1`, so the
//! share-level expansion does too:
//!
//! * odd `m`: logical Paulis are `σ^{⊗m}` up to sign, every Clifford is
//!   transversal, with `S`/`Sdg` swapped when `m ≡ 3 (mod 4)`;
//! * even `m`: logical X is `I ⊗ X^{⊗m-1}` and Z is `Z^{⊗m}`, so only Paulis
//!   and CNOT have a column-local form.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::circuit::{BitExpr, Circuit, Gate, ShareLayout};
use crate::dense::{run_branches, DensityMatrix, StateVector};
use crate::error::{Error, Result};
use crate::random::{random_state, rng_from_seed};

/// `[H(0), H(1), TOFFOLI(0,1→2)]`, preparing `(|000>+|010>+|100>+|111>)/2`.
pub fn magic_state_circuit() -> Circuit {
    Circuit::from_gates(3, [Gate::H(0), Gate::H(1), Gate::toffoli(0, 1, 2)])
        .expect("static circuit")
}

fn row_of(layout: &ShareLayout, logical: usize) -> Result<usize> {
    if logical >= layout.rows() {
        Err(Error::usage(format!(
            "logical qubit {logical} outside a layout with {} rows",
            layout.rows()
        )))
    } else {
        Ok(logical + 1)
    }
}

/// One copy of `gate` per column, ignoring parity. This is the textbook
/// transversal form; for even column counts it is not a logical gate.
pub fn literal_copies(gate: &Gate, layout: &ShareLayout) -> Result<Circuit> {
    let mut out = Circuit::new(layout.num_qubits());
    if let Gate::I(q) = gate {
        row_of(layout, *q)?;
        return Ok(out);
    }
    if !gate.is_clifford() {
        return Err(Error::usage(format!("{} has no copy expansion", gate.kind_name())));
    }
    for q in gate.qubits() {
        row_of(layout, q)?;
    }
    for y in 1..=layout.columns() {
        out.push(gate.remap(|q| layout.index_of(q + 1, y)))?;
    }
    Ok(out)
}

/// Column-local circuit implementing `gate` on the encoded logical qubits.
///
/// Toffoli is refused here (see [`toffoli_gadget`]), as are gates with no
/// column-local form for even column counts.
pub fn transversal_expand(gate: &Gate, layout: &ShareLayout) -> Result<Circuit> {
    let m = layout.columns();
    let mut out = Circuit::new(layout.num_qubits());
    let all: Vec<usize> = (1..=m).collect();
    let participants: Vec<usize> = (2..=m).collect();
    let mut place = |g: Gate, cols: &[usize]| -> Result<()> {
        for &y in cols {
            out.push(g.remap(|q| layout.index_of(q + 1, y)))?;
        }
        Ok(())
    };
    for q in gate.qubits() {
        row_of(layout, q)?;
    }
    match gate {
        Gate::I(_) => {}
        Gate::Toffoli { .. } => {
            return Err(Error::usage(
                "TOFFOLI is not transversal; evaluate it with toffoli_gadget",
            ))
        }
        Gate::MeasureZ { .. } | Gate::Conditioned { .. } => {
            return Err(Error::usage(format!(
                "transversal_expand takes a unitary logical gate, got {}",
                gate.kind_name()
            )))
        }
        g if m % 2 == 1 => {
            let g = match (g, m % 4) {
                (Gate::S(q), 3) => Gate::Sdg(*q),
                (Gate::Sdg(q), 3) => Gate::S(*q),
                _ => g.clone(),
            };
            place(g, &all)?;
        }
        Gate::X(_) => place(gate.clone(), &participants)?,
        Gate::Y(q) => {
            place(Gate::Z(*q), &[1])?;
            place(gate.clone(), &participants)?;
        }
        Gate::Z(_) | Gate::Cnot { .. } => place(gate.clone(), &all)?,
        g => {
            return Err(Error::usage(format!(
                "logical {} has no column-local implementation with an even number \
                 of columns ({m}): every local unitary fixes the identity letter \
                 of the logical X operator on Alice's column",
                g.kind_name()
            )))
        }
    }
    Ok(out)
}

/// Same as [`transversal_expand`] with every emitted gate conditioned.
fn conditioned_expand(
    gate: &Gate,
    condition: &BitExpr,
    layout: &ShareLayout,
    out: &mut Circuit,
) -> Result<()> {
    for g in transversal_expand(gate, layout)?.gates() {
        out.push(Gate::conditioned(condition.clone(), g.clone()))?;
    }
    Ok(())
}

/// Tracks which ancilla triples have been used.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct AncillaPool {
    total: usize,
    consumed: BTreeSet<usize>,
}

impl AncillaPool {
    pub fn new(layout: &ShareLayout) -> Self {
        AncillaPool {
            total: layout.ancilla_triples(),
            consumed: BTreeSet::new(),
        }
    }

    pub fn total(&self) -> usize {
        self.total
    }

    pub fn remaining(&self) -> usize {
        self.total - self.consumed.len()
    }

    pub fn consumed(&self) -> &BTreeSet<usize> {
        &self.consumed
    }

    pub fn is_consumed(&self, triple: usize) -> bool {
        self.consumed.contains(&triple)
    }

    /// Lowest unconsumed triple.
    pub fn next_free(&self) -> Option<usize> {
        (0..self.total).find(|j| !self.consumed.contains(j))
    }

    pub fn consume(&mut self, triple: usize) -> Result<()> {
        if triple >= self.total {
            return Err(Error::usage(format!(
                "ancilla triple {triple} does not exist ({} available)",
                self.total
            )));
        }
        if !self.consumed.insert(triple) {
            return Err(Error::protocol(format!(
                "ancilla triple {triple} was already consumed"
            )));
        }
        Ok(())
    }
}

/// Slots and rows used by one gadget instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GadgetBits {
    pub triple: usize,
    /// Per-column slots of the three ancilla measurements, in column order.
    pub slots: [Vec<usize>; 3],
    /// One-based rows that end up measured.
    pub measured_rows: [usize; 3],
}

impl GadgetBits {
    /// Logical outcome `k` (0, 1, 2) as the XOR of its column bits.
    pub fn logical(&self, k: usize) -> BitExpr {
        BitExpr::xor_of(self.slots[k].iter().copied())
    }
}

/// Share-level Toffoli on data rows `(c1, c2, target)` (one based),
/// consuming ancilla triple `triple`, which must hold the encoded
/// `(|000>+|010>+|100>+|111>)/2`. Classical slots start at `first_bit`.
///
/// The data rows are CNOT-coupled to the ancilla rows, the ancillas are
/// measured (the third one in the X basis) and the data rows corrected with
/// classically conditioned Cliffords. Every gate stays inside one column.
pub fn toffoli_gadget(
    data: [usize; 3],
    triple: usize,
    layout: &ShareLayout,
    pool: &mut AncillaPool,
    first_bit: usize,
) -> Result<(Circuit, GadgetBits)> {
    let m = layout.columns();
    if m.is_multiple_of(2) {
        return Err(Error::usage(format!(
            "the Toffoli gadget needs a logical CZ, which has no column-local form \
             for an even number of columns ({m})"
        )));
    }
    let distinct: BTreeSet<usize> = data.iter().copied().collect();
    if distinct.len() != 3 {
        return Err(Error::usage(format!("Toffoli rows {data:?} overlap")));
    }
    if let Some(&x) = data.iter().find(|&&x| x == 0 || x > layout.rows()) {
        return Err(Error::usage(format!("row {x} outside layout")));
    }
    if triple >= layout.ancilla_triples() {
        return Err(Error::usage(format!(
            "ancilla triple {triple} does not exist ({} available)",
            layout.ancilla_triples()
        )));
    }
    let anc = layout.ancilla_rows(triple);
    if data.iter().any(|x| anc.contains(x)) {
        return Err(Error::usage(format!(
            "data rows {data:?} overlap ancilla rows {anc:?}"
        )));
    }
    pool.consume(triple)?;

    // logical indices are zero based
    let [x, y, z] = data.map(|r| r - 1);
    let [a, b, c] = anc.map(|r| r - 1);
    let mut out = Circuit::new(layout.num_qubits());
    for g in [Gate::cnot(x, a), Gate::cnot(y, b), Gate::cnot(c, z), Gate::H(c)] {
        out.extend(transversal_expand(&g, layout)?.gates().iter().cloned())?;
    }
    let mut slots: [Vec<usize>; 3] = Default::default();
    let mut next = first_bit;
    for (k, row) in anc.iter().enumerate() {
        for col in 1..=m {
            out.push(Gate::measure(layout.index_of(*row, col), next))?;
            slots[k].push(next);
            next += 1;
        }
    }
    let bits = GadgetBits {
        triple,
        slots,
        measured_rows: anc,
    };
    let (m1, m2, m3) = (bits.logical(0), bits.logical(1), bits.logical(2));
    let corrections = [
        (&m2, Gate::cnot(x, z)),
        (&m2, Gate::X(y)),
        (&m1, Gate::cnot(y, z)),
        (&m2, Gate::X(y)),
        (&m1, Gate::X(x)),
        (&m2, Gate::X(y)),
        (&m3, Gate::Cz(x, y)),
        (&m1, Gate::X(x)),
        (&m2, Gate::X(y)),
    ];
    for (cond, g) in corrections {
        conditioned_expand(&g, cond, layout, &mut out)?;
    }
    Ok((out, bits))
}

/// Single-column layout used for plaintext gadget checks: rows 1..3 data,
/// rows 4..6 the ancilla triple.
pub fn plaintext_layout() -> ShareLayout {
    ShareLayout::new(3, 3, 0)
}

pub fn plaintext_gadget() -> Result<Circuit> {
    let layout = plaintext_layout();
    let mut pool = AncillaPool::new(&layout);
    Ok(toffoli_gadget([1, 2, 3], 0, &layout, &mut pool, 0)?.0)
}

/// One measurement branch of a plaintext gadget run.
#[derive(Debug, Clone, Serialize)]
pub struct BranchFidelity {
    pub bits: Vec<u8>,
    pub probability: f64,
    pub fidelity: f64,
}

/// Runs the plaintext gadget on `input ⊗ |φ₊>` and compares every branch's
/// data register with `TOFFOLI · input`.
pub fn plaintext_branches(input: &StateVector) -> Result<Vec<BranchFidelity>> {
    if input.num_qubits() != 3 {
        return Err(Error::usage("plaintext gadget input must have 3 qubits"));
    }
    let magic = StateVector::zero(3)?.apply_circuit(&magic_state_circuit())?;
    let expected = input.apply_gate(&Gate::toffoli(0, 1, 2))?;
    let circuit = plaintext_gadget()?;
    run_branches(&input.tensor(&magic)?, &circuit)?
        .into_iter()
        .map(|b| {
            let data = DensityMatrix::from_pure(&b.state).partial_trace(&[3, 4, 5])?;
            Ok(BranchFidelity {
                bits: b.bits,
                probability: b.probability,
                fidelity: data.fidelity_with_pure(&expected),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct PlaintextGadgetReport {
    pub basis_min_fidelity: f64,
    pub basis_truth_table_ok: bool,
    pub random_states: usize,
    pub random_min_fidelity: f64,
    pub seed: u64,
    pub min_branch_probability_sum: f64,
}

/// All 8 basis inputs plus `samples` seeded Haar-random inputs.
pub fn plaintext_gadget_check(samples: usize, seed: u64, tol: f64) -> Result<PlaintextGadgetReport> {
    let mut basis_min = f64::INFINITY;
    let mut prob_sum_min = f64::INFINITY;
    for idx in 0..8 {
        let branches = plaintext_branches(&StateVector::basis(3, idx)?)?;
        prob_sum_min = prob_sum_min.min(branches.iter().map(|b| b.probability).sum());
        for b in &branches {
            basis_min = basis_min.min(b.fidelity);
        }
    }
    let mut rng = rng_from_seed(seed);
    let mut random_min = f64::INFINITY;
    for _ in 0..samples {
        let branches = plaintext_branches(&random_state(&mut rng, 3)?)?;
        prob_sum_min = prob_sum_min.min(branches.iter().map(|b| b.probability).sum());
        for b in &branches {
            random_min = random_min.min(b.fidelity);
        }
    }
    Ok(PlaintextGadgetReport {
        basis_min_fidelity: basis_min,
        basis_truth_table_ok: basis_min >= 1.0 - tol,
        random_states: samples,
        random_min_fidelity: if samples == 0 { 1.0 } else { random_min },
        seed,
        min_branch_probability_sum: prob_sum_min,
    })
}
