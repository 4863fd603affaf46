//! Dealing, evaluating and reconstructing shares.
//!
//! The global state lives in the Pauli basis. Secret terms are tagged with
//! the logical Pauli they came from so audits can follow them through
//! encoding, evaluation and partial traces.

use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate, Party, ShareLayout};
use crate::dense::{trace_distance, DensityMatrix, StateVector, DEFAULT_DENSE_CAP};
use crate::error::{Error, Result};
use crate::gadget::{magic_state_circuit, toffoli_gadget, transversal_expand, AncillaPool};
use crate::ladder::encoding_circuit;
use crate::pauli::PauliOperator;
use crate::random::rng_from_seed;

/// Tolerance for secret validity checks (trace and hermiticity).
pub const SECRET_TOL: f64 = 1e-10;
/// Branches with smaller probability are dropped during exact enumeration.
pub const BRANCH_EPS: f64 = 1e-14;
pub const DEFAULT_BRANCH_CAP: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemeParams {
    /// Participants other than Alice.
    pub n: usize,
    /// Secret rows.
    pub s: usize,
    /// Ancilla rows, three per Toffoli.
    pub t: usize,
    pub strict: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Odd,
    Even,
}

impl SchemeParams {
    /// `s = 3k`, `t = 3k'`, with `k'` a positive multiple of `k`.
    pub fn strict(n: usize, k: usize, kprime: usize) -> Result<Self> {
        if n == 0 || k == 0 || kprime == 0 {
            return Err(Error::usage(format!(
                "strict mode needs n, k, k' ≥ 1 (got n={n}, k={k}, k'={kprime})"
            )));
        }
        if !kprime.is_multiple_of(k) {
            return Err(Error::usage(format!(
                "strict mode needs k'/k to be a positive integer (k={k}, k'={kprime})"
            )));
        }
        Ok(SchemeParams {
            n,
            s: 3 * k,
            t: 3 * kprime,
            strict: true,
        })
    }

    /// Any `s ≥ 1`, with room for `toffoli_budget` gadgets.
    pub fn relaxed(n: usize, s: usize, toffoli_budget: usize) -> Result<Self> {
        if n == 0 || s == 0 {
            return Err(Error::usage(format!("need n ≥ 1 and s ≥ 1 (got n={n}, s={s})")));
        }
        Ok(SchemeParams {
            n,
            s,
            t: 3 * toffoli_budget,
            strict: false,
        })
    }

    /// Checks the invariants of whichever mode the value claims.
    pub fn validate(&self) -> Result<()> {
        if self.strict {
            if !self.s.is_multiple_of(3) || !self.t.is_multiple_of(3) {
                return Err(Error::usage("strict mode needs s and t divisible by 3"));
            }
            SchemeParams::strict(self.n, self.s / 3, self.t / 3).map(|_| ())
        } else if !self.t.is_multiple_of(3) {
            Err(Error::usage("t must be three times the Toffoli budget"))
        } else {
            SchemeParams::relaxed(self.n, self.s, self.t / 3).map(|_| ())
        }
    }

    pub fn layout(&self) -> ShareLayout {
        ShareLayout::new(self.s, self.t, self.n)
    }

    pub fn columns(&self) -> usize {
        self.n + 1
    }

    pub fn toffoli_budget(&self) -> usize {
        self.t / 3
    }

    pub fn regime(&self) -> Regime {
        if self.columns() % 2 == 1 {
            Regime::Odd
        } else {
            Regime::Even
        }
    }
}

/// One broadcast measurement outcome.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasurementRecord {
    pub gadget: usize,
    pub party: Party,
    pub qubit: usize,
    pub slot: usize,
    pub value: u8,
    /// Probability of this outcome given the earlier ones in the branch.
    pub probability: f64,
}

/// The global share state of one branch.
///
/// Measured qubits are stored traced out: they carry only identity letters
/// in [`state`](Self::state) and their outcomes live in
/// [`measured_qubits`](Self::measured_qubits).
#[derive(Debug, Clone)]
pub struct SharedState {
    layout: ShareLayout,
    state: PauliOperator,
    pool: AncillaPool,
    transcript: Vec<MeasurementRecord>,
    bits: Vec<u8>,
    measured: BTreeMap<usize, u8>,
    gadgets_run: usize,
    probability: f64,
}

impl SharedState {
    pub fn layout(&self) -> &ShareLayout {
        &self.layout
    }

    pub fn state(&self) -> &PauliOperator {
        &self.state
    }

    pub fn consumed_ancillas(&self) -> &BTreeSet<usize> {
        self.pool.consumed()
    }

    pub fn remaining_ancillas(&self) -> usize {
        self.pool.remaining()
    }

    pub fn transcript(&self) -> &[MeasurementRecord] {
        &self.transcript
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    /// Measured physical qubits and their outcomes.
    pub fn measured_qubits(&self) -> &BTreeMap<usize, u8> {
        &self.measured
    }

    /// The state with measured qubits restored to their basis states.
    pub fn exact_state(&self) -> Result<PauliOperator> {
        let all: Vec<usize> = (0..self.layout.num_qubits()).collect();
        restore_measured(&self.state, &all, &self.measured)
    }

    /// Probability of reaching this branch.
    pub fn probability(&self) -> f64 {
        self.probability
    }

    /// Applies a physical Clifford circuit directly to the shares, with no
    /// logical translation. Measured qubits must not be touched.
    pub fn apply_physical(&self, circuit: &Circuit) -> Result<SharedState> {
        if circuit.num_qubits() != self.layout.num_qubits() {
            return Err(Error::usage("circuit width differs from the share layout"));
        }
        let mut out = self.clone();
        for g in circuit.gates() {
            if let Some(q) = g.qubits().into_iter().find(|q| self.measured.contains_key(q)) {
                return Err(Error::protocol(format!("qubit {q} was already measured")));
            }
            out.state.apply_clifford(g)?;
        }
        Ok(out)
    }
}

/// `(|000>+|010>+|100>+|111>)/2` as a Pauli expansion.
pub fn magic_state_operator() -> Result<PauliOperator> {
    let mut op = PauliOperator::zero_state(3);
    for g in magic_state_circuit().gates() {
        op = op.conjugate(g)?;
    }
    Ok(op)
}

/// Pure-state secret from amplitudes.
pub fn pure_secret(state: &StateVector) -> Result<PauliOperator> {
    PauliOperator::from_dense(DensityMatrix::from_pure(state).matrix())
}

/// Product secret from a string over `0`, `1`, `+`, `-`, e.g. `"01+"`.
pub fn product_secret(spec: &str) -> Result<PauliOperator> {
    let mut out = PauliOperator::from_strs(0, &[("", 1.0)])?;
    for ch in spec.chars() {
        let terms: [(&str, f64); 2] = match ch {
            '0' => [("I", 0.5), ("Z", 0.5)],
            '1' => [("I", 0.5), ("Z", -0.5)],
            '+' => [("I", 0.5), ("X", 0.5)],
            '-' => [("I", 0.5), ("X", -0.5)],
            c => return Err(Error::usage(format!("unknown product-state letter '{c}'"))),
        };
        out = out.tensor(&PauliOperator::from_strs(1, &terms)?)?;
    }
    Ok(out)
}

fn validate_secret(params: &SchemeParams, secret: &PauliOperator) -> Result<()> {
    if secret.num_qubits() != params.s {
        return Err(Error::usage(format!(
            "secret has {} qubits, the scheme shares {}",
            secret.num_qubits(),
            params.s
        )));
    }
    let tr = secret.trace();
    if (tr - Complex64::new(1.0, 0.0)).norm() > SECRET_TOL {
        return Err(Error::usage(format!("secret trace is {tr}, expected 1")));
    }
    if !secret.is_hermitian(SECRET_TOL) {
        return Err(Error::usage("secret is not Hermitian"));
    }
    Ok(())
}

/// Shares `secret` among Alice and `n` participants.
pub fn deal(params: &SchemeParams, secret: &PauliOperator) -> Result<SharedState> {
    params.validate()?;
    validate_secret(params, secret)?;
    deal_symbolic(params, secret)
}

/// [`deal`] without the density-operator checks, for symbolic secrets whose
/// coefficients are placeholders.
pub fn deal_symbolic(params: &SchemeParams, secret: &PauliOperator) -> Result<SharedState> {
    if secret.num_qubits() != params.s {
        return Err(Error::usage(format!(
            "secret has {} qubits, the scheme shares {}",
            secret.num_qubits(),
            params.s
        )));
    }
    let layout = params.layout();
    let mut first_column = secret.tag_by_word();
    let magic = magic_state_operator()?;
    for _ in 0..layout.ancilla_triples() {
        first_column = first_column.tensor(&magic)?;
    }
    let positions: Vec<usize> = (1..=layout.rows()).map(|x| layout.index_of(x, 1)).collect();
    let mixed_qubits = layout.num_qubits() - layout.rows();
    let mut state = first_column
        .embed(layout.num_qubits(), &positions)?
        .scale(Complex64::new(0.5f64.powi(mixed_qubits as i32), 0.0));
    for g in encoding_circuit(&layout)?.gates() {
        state.apply_clifford(g)?;
    }
    Ok(SharedState {
        layout,
        pool: AncillaPool::new(&layout),
        state,
        transcript: Vec::new(),
        bits: Vec::new(),
        measured: BTreeMap::new(),
        gadgets_run: 0,
        probability: 1.0,
    })
}

/// Re-inserts `|b><b|` for measured qubits into an operator over the
/// physical qubits `kept` (in order); other measured qubits are ignored.
pub fn restore_measured(
    op: &PauliOperator,
    kept: &[usize],
    measured: &BTreeMap<usize, u8>,
) -> Result<PauliOperator> {
    let mut out = op.clone();
    for (i, q) in kept.iter().enumerate() {
        if let Some(&b) = measured.get(q) {
            out = out.project_z(i, b)?.1.scale(Complex64::new(2.0, 0.0));
        }
    }
    Ok(out)
}

/// Decodes with every column present.
pub fn reconstruct(shared: &SharedState) -> Result<PauliOperator> {
    let all: Vec<usize> = (1..=shared.layout.columns()).collect();
    reconstruct_from(shared, &all)
}

/// Decodes from the listed columns (one based); fails unless all are given.
pub fn reconstruct_from(shared: &SharedState, columns: &[usize]) -> Result<PauliOperator> {
    let layout = shared.layout;
    let given: BTreeSet<usize> = columns.iter().copied().collect();
    let all: BTreeSet<usize> = (1..=layout.columns()).collect();
    if given != all {
        return Err(Error::protocol(format!(
            "reconstruction requires all shares: got columns {given:?}, need {all:?}"
        )));
    }
    let ancilla: Vec<usize> = ((layout.s + 1)..=layout.rows())
        .flat_map(|x| layout.row_qubits(x))
        .collect();
    let mut secret_rows = shared.state.partial_trace(&ancilla)?;
    let secret_layout = ShareLayout::new(layout.s, 0, layout.n);
    for g in encoding_circuit(&secret_layout)?.inverse()?.gates() {
        secret_rows.apply_clifford(g)?;
    }
    let others: Vec<usize> = (1..=layout.s)
        .flat_map(|x| (2..=layout.columns()).map(move |y| (x, y)))
        .map(|(x, y)| secret_layout.index_of(x, y))
        .collect();
    secret_rows.partial_trace(&others)
}

/// A logical gate sequence over the secret's qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationScript {
    circuit: Circuit,
}

impl EvaluationScript {
    /// Accepts unitary Clifford and Toffoli gates only.
    pub fn new(circuit: Circuit) -> Result<Self> {
        if let Some(g) = circuit.gates().iter().find(|g| !g.is_unitary()) {
            return Err(Error::usage(format!(
                "scripts hold logical unitaries only, found {}",
                g.kind_name()
            )));
        }
        Ok(EvaluationScript { circuit })
    }

    pub fn empty(num_qubits: usize) -> Self {
        EvaluationScript {
            circuit: Circuit::new(num_qubits),
        }
    }

    pub fn from_gates(num_qubits: usize, gates: impl IntoIterator<Item = Gate>) -> Result<Self> {
        EvaluationScript::new(Circuit::from_gates(num_qubits, gates)?)
    }

    /// Reads the circuit line format; indices are logical qubits (rows − 1).
    pub fn from_lines(text: &str, num_qubits: usize) -> Result<Self> {
        EvaluationScript::new(Circuit::from_lines(text, Some(num_qubits))?)
    }

    pub fn circuit(&self) -> &Circuit {
        &self.circuit
    }

    pub fn num_qubits(&self) -> usize {
        self.circuit.num_qubits()
    }

    pub fn toffoli_count(&self) -> usize {
        self.circuit
            .gates()
            .iter()
            .filter(|g| matches!(g, Gate::Toffoli { .. }))
            .count()
    }

    /// `U ρ U†` for the whole script, applied directly to a logical operator.
    pub fn apply_logical(&self, secret: &PauliOperator) -> Result<PauliOperator> {
        if secret.num_qubits() < self.num_qubits() {
            return Err(Error::usage("script is wider than the secret"));
        }
        let mut out = secret.clone();
        for g in self.circuit.gates() {
            out = out.conjugate(g)?;
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum EvalMode {
    /// Every measurement branch, with exact probabilities.
    Exact,
    /// One branch drawn with a seeded generator.
    Sampled { seed: u64 },
}

fn run_physical<R: Rng>(
    branches: Vec<SharedState>,
    circuit: &Circuit,
    gadget: usize,
    rng: &mut Option<R>,
) -> Result<Vec<SharedState>> {
    let mut branches = branches;
    for gate in circuit.gates() {
        if let Some(b) = branches.first() {
            if let Some(q) = gate.qubits().into_iter().find(|q| b.measured.contains_key(q)) {
                return Err(Error::protocol(format!(
                    "{} acts on qubit {q}, which was already measured",
                    gate.kind_name()
                )));
            }
        }
        let mut next = Vec::with_capacity(branches.len());
        for mut b in branches {
            match gate {
                Gate::MeasureZ { qubit, bit } => {
                    let outcomes = [
                        b.state.measure_discard(*qubit, 0)?,
                        b.state.measure_discard(*qubit, 1)?,
                    ];
                    let keep: Vec<u8> = match rng {
                        None => vec![0, 1],
                        Some(r) => {
                            let p0 = outcomes[0].0;
                            vec![if r.random::<f64>() < p0 { 0 } else { 1 }]
                        }
                    };
                    for value in keep {
                        let (p, post) = &outcomes[value as usize];
                        if *p <= BRANCH_EPS {
                            continue;
                        }
                        let mut nb = b.clone();
                        nb.state = post.clone();
                        nb.probability *= p;
                        if nb.bits.len() <= *bit {
                            nb.bits.resize(bit + 1, 0);
                        }
                        nb.bits[*bit] = value;
                        nb.measured.insert(*qubit, value);
                        nb.transcript.push(MeasurementRecord {
                            gadget,
                            party: b.layout.owner(*qubit),
                            qubit: *qubit,
                            slot: *bit,
                            value,
                            probability: *p,
                        });
                        next.push(nb);
                    }
                }
                Gate::Conditioned { condition, gate } => {
                    if condition.evaluate(&b.bits)? {
                        b.state.apply_clifford(gate)?;
                    }
                    next.push(b);
                }
                g => {
                    b.state.apply_clifford(g)?;
                    next.push(b);
                }
            }
        }
        branches = next;
    }
    Ok(branches)
}

/// Runs `script` on the shares, with the default exact-branch cap.
pub fn evaluate(
    shared: &SharedState,
    script: &EvaluationScript,
    mode: EvalMode,
) -> Result<Vec<SharedState>> {
    evaluate_with_cap(shared, script, mode, DEFAULT_BRANCH_CAP)
}

/// Runs `script` on the shares. Cliffords are expanded transversally; each
/// Toffoli consumes one ancilla triple through the measurement gadget.
pub fn evaluate_with_cap(
    shared: &SharedState,
    script: &EvaluationScript,
    mode: EvalMode,
    branch_cap: usize,
) -> Result<Vec<SharedState>> {
    let layout = shared.layout;
    if script.num_qubits() > layout.s {
        return Err(Error::usage(format!(
            "script acts on {} logical qubits, the scheme holds {}",
            script.num_qubits(),
            layout.s
        )));
    }
    let toffolis = script.toffoli_count();
    if toffolis > shared.pool.remaining() {
        return Err(Error::protocol(format!(
            "Toffoli budget exhausted: script needs {toffolis}, {} ancilla triple(s) left",
            shared.pool.remaining()
        )));
    }
    if mode == EvalMode::Exact && toffolis > 0 {
        let measured_bits = 3 * layout.columns() * toffolis;
        let too_many = measured_bits >= 64 || (1u64 << measured_bits) > branch_cap as u64;
        if too_many {
            return Err(Error::resource(format!(
                "exact enumeration needs up to 2^{measured_bits} branches, cap is \
                 {branch_cap}; use sampled mode"
            )));
        }
    }
    let mut rng = match mode {
        EvalMode::Exact => None,
        EvalMode::Sampled { seed } => Some(rng_from_seed(seed)),
    };
    let mut branches = vec![shared.clone()];
    for gate in script.circuit.gates() {
        match gate {
            Gate::Toffoli { controls, target } => {
                let data = [controls[0] + 1, controls[1] + 1, target + 1];
                // every branch has consumed the same triples
                let mut pool = branches[0].pool.clone();
                let triple = pool.next_free().ok_or_else(|| {
                    Error::protocol("Toffoli budget exhausted: no ancilla triple left")
                })?;
                let first_bit = branches[0].bits.len();
                let (circuit, _) = toffoli_gadget(data, triple, &layout, &mut pool, first_bit)?;
                let gadget = branches[0].gadgets_run;
                for b in branches.iter_mut() {
                    b.pool = pool.clone();
                    b.gadgets_run += 1;
                }
                branches = run_physical(branches, &circuit, gadget, &mut rng)?;
            }
            g => {
                let circuit = transversal_expand(g, &layout)?;
                for b in branches.iter_mut() {
                    for pg in circuit.gates() {
                        b.state.apply_clifford(pg)?;
                    }
                }
            }
        }
    }
    Ok(branches)
}

/// Trace distance between two operators, converted to dense matrices.
pub fn operator_distance(a: &PauliOperator, b: &PauliOperator) -> Result<f64> {
    let da = DensityMatrix::from_matrix_unchecked(a.to_dense(DEFAULT_DENSE_CAP)?)?;
    let db = DensityMatrix::from_matrix_unchecked(b.to_dense(DEFAULT_DENSE_CAP)?)?;
    trace_distance(&da, &db)
}

/// Marginal of one broadcast slot, for each secret in turn.
#[derive(Debug, Clone, Serialize)]
pub struct BitMarginal {
    pub slot: usize,
    pub gadget: usize,
    pub party: Party,
    pub p_one: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnnouncementReport {
    pub secrets: Vec<String>,
    pub bits: Vec<BitMarginal>,
    pub outcomes: usize,
    pub max_marginal_deviation: f64,
    pub max_joint_variation: f64,
}

impl AnnouncementReport {
    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }
}

/// Exact distribution of every broadcast bit for each secret in `secrets`.
pub fn announce_distribution(
    params: &SchemeParams,
    script: &EvaluationScript,
    secrets: &[(String, PauliOperator)],
) -> Result<AnnouncementReport> {
    let mut joints: Vec<BTreeMap<Vec<u8>, f64>> = Vec::new();
    let mut slot_info: BTreeMap<usize, (usize, Party)> = BTreeMap::new();
    for (_, secret) in secrets {
        let branches = evaluate(&deal(params, secret)?, script, EvalMode::Exact)?;
        let mut joint = BTreeMap::new();
        for b in &branches {
            for r in b.transcript() {
                slot_info.entry(r.slot).or_insert((r.gadget, r.party));
            }
            *joint.entry(b.bits().to_vec()).or_insert(0.0) += b.probability();
        }
        joints.push(joint);
    }
    let mut bits = Vec::new();
    let mut max_marginal_deviation: f64 = 0.0;
    for (&slot, &(gadget, party)) in &slot_info {
        let p_one: Vec<f64> = joints
            .iter()
            .map(|j| {
                j.iter()
                    .filter(|(k, _)| k.get(slot) == Some(&1))
                    .map(|(_, p)| p)
                    .sum()
            })
            .collect();
        for p in &p_one {
            max_marginal_deviation = max_marginal_deviation.max((p - 0.5).abs());
        }
        bits.push(BitMarginal {
            slot,
            gadget,
            party,
            p_one,
        });
    }
    let keys: BTreeSet<&Vec<u8>> = joints.iter().flat_map(|j| j.keys()).collect();
    let mut max_joint_variation: f64 = 0.0;
    if let Some(first) = joints.first() {
        for k in &keys {
            let p0 = first.get(*k).copied().unwrap_or(0.0);
            for j in &joints[1..] {
                let p = j.get(*k).copied().unwrap_or(0.0);
                max_joint_variation = max_joint_variation.max((p - p0).abs());
            }
        }
    }
    Ok(AnnouncementReport {
        secrets: secrets.iter().map(|(name, _)| name.clone()).collect(),
        outcomes: if bits.is_empty() { 0 } else { keys.len() },
        bits,
        max_marginal_deviation,
        max_joint_variation,
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SecretFile {
    amplitudes: Option<Vec<[f64; 2]>>,
    pauli: Option<BTreeMap<String, serde_json::Value>>,
}

fn parse_coefficient(v: &serde_json::Value) -> Result<Complex64> {
    match v {
        serde_json::Value::Number(x) => x
            .as_f64()
            .map(|re| Complex64::new(re, 0.0))
            .ok_or_else(|| Error::usage("coefficient is not a finite number")),
        serde_json::Value::Array(a) if a.len() == 2 => {
            let re = a[0].as_f64();
            let im = a[1].as_f64();
            match (re, im) {
                (Some(re), Some(im)) => Ok(Complex64::new(re, im)),
                _ => Err(Error::usage("complex coefficient must be [re, im]")),
            }
        }
        _ => Err(Error::usage("coefficient must be a number or [re, im]")),
    }
}

/// Reads `{"amplitudes": [[re, im], …]}` or `{"pauli": {"XYZ": c, …}}`;
/// the result is validated as a density operator.
pub fn parse_secret(text: &str) -> Result<PauliOperator> {
    let file: SecretFile =
        serde_json::from_str(text).map_err(|e| Error::usage(format!("secret file: {e}")))?;
    let op = match (file.amplitudes, file.pauli) {
        (Some(amps), None) => {
            let amps = amps.into_iter().map(|[re, im]| Complex64::new(re, im)).collect();
            pure_secret(&StateVector::from_amplitudes(amps)?)?
        }
        (None, Some(terms)) => {
            let width = terms
                .keys()
                .next()
                .map(|k| k.len())
                .ok_or_else(|| Error::usage("secret file: empty pauli map"))?;
            let mut parsed = Vec::with_capacity(terms.len());
            for (word, c) in &terms {
                parsed.push((word.parse()?, None, parse_coefficient(c)?));
            }
            PauliOperator::from_terms(width, parsed)?
        }
        _ => {
            return Err(Error::usage(
                "secret file needs exactly one of \"amplitudes\" or \"pauli\"",
            ))
        }
    };
    let tr = op.trace();
    if (tr - Complex64::new(1.0, 0.0)).norm() > SECRET_TOL || !op.is_hermitian(SECRET_TOL) {
        return Err(Error::usage(format!(
            "secret is not a density operator (trace {tr})"
        )));
    }
    Ok(op)
}
