use std::path::Path;

use qsslab_core::audit::{parity_structure_check, secret_independence_check, Coalition};
use qsslab_core::dense::{StateVector, DEFAULT_DENSE_CAP};
use qsslab_core::gadget::{plaintext_branches, plaintext_gadget_check};
use qsslab_core::ladder::verify_ladder;
use qsslab_core::protocol::{
    deal, evaluate, operator_distance, parse_secret, product_secret, reconstruct, EvalMode,
    EvaluationScript, MeasurementRecord, SchemeParams,
};
use qsslab_core::random::{random_secret, rng_from_seed};
use qsslab_core::{Circuit, Error, Gate, PauliOperator, Result};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::report::{Check, Report};

const LADDER_TOL: f64 = 1e-12;
const RUN_TOL: f64 = 1e-9;
const AUDIT_TOL: f64 = 1e-10;
const GADGET_TOL: f64 = 1e-10;
const SHARE_TOL: f64 = 1e-9;
const PROBABILITY_TOL: f64 = 1e-10;
/// Reconstructed Z-basis distributions are listed up to this many secret qubits.
const LISTED_DISTRIBUTION_QUBITS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    VerifyLadder,
    Run,
    Audit,
    Gadget,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::VerifyLadder => "verify-ladder",
            Command::Run => "run",
            Command::Audit => "audit",
            Command::Gadget => "gadget",
        }
    }
}

pub fn execute(command: Command, config: RunConfig) -> Report {
    let mut report = Report::new(command.name(), config.clone());
    let outcome = match command {
        Command::VerifyLadder => verify_ladder_cmd(&config, &mut report),
        Command::Run => run_cmd(&config, &mut report),
        Command::Audit => audit_cmd(&config, &mut report),
        Command::Gadget => gadget_cmd(&config, &mut report),
    };
    match outcome {
        Ok(()) => report.finish(),
        Err(e) => report.failed_with(&e),
    }
}

fn read(path: &Path, what: &str) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::Usage(format!("cannot read {what} {}: {e}", path.display())))
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report payloads serialize")
}

fn verify_ladder_cmd(config: &RunConfig, report: &mut Report) -> Result<()> {
    let (m_min, m_max) = config.m_range()?;
    let tol = config.tolerance_or(LADDER_TOL)?;
    let dense_max = config.dense_max.unwrap_or(8);
    if dense_max > DEFAULT_DENSE_CAP {
        return Err(Error::Usage(format!(
            "dense cross-check is capped at m = {DEFAULT_DENSE_CAP}, got {dense_max}"
        )));
    }
    let sweep = verify_ladder(m_min, m_max, dense_max, tol)?;

    let mismatches = sweep.checks.iter().filter(|c| !c.symbolic_match).count();
    report.check(
        Check::count("symbolic_mismatches", mismatches)
            .with_detail(format!("{} (m, σ) pairs", sweep.checks.len())),
    );
    let dense: Vec<f64> = sweep.checks.iter().filter_map(|c| c.dense_deviation).collect();
    if !dense.is_empty() {
        report.check(
            Check::new("dense_max_deviation", dense.iter().cloned().fold(0.0, f64::max), tol)
                .with_detail(format!("{} dense comparisons", dense.len())),
        );
    }
    if !sweep.lemma.is_empty() {
        let worst = sweep.lemma.iter().map(|l| l.deviation).fold(0.0, f64::max);
        report.check(Check::new("lemma_max_deviation", worst, tol));
    }
    if let Some(d) = sweep.commutation_max_deviation {
        report.check(Check::new("half_commutation_max_deviation", d, tol));
    }
    for note in &sweep.notes {
        report.note(note.clone());
    }
    report.details = to_value(&sweep);
    Ok(())
}

#[derive(Serialize)]
struct BranchSummary {
    bits: Vec<u8>,
    probability: f64,
    distance: f64,
    consumed_ancillas: Vec<usize>,
    /// Z-basis distribution of the reconstructed secret, qubit 0 most significant.
    z_distribution: Option<Vec<f64>>,
    transcript: Vec<MeasurementRecord>,
}

fn z_distribution(op: &PauliOperator) -> Result<Option<Vec<f64>>> {
    if op.num_qubits() > LISTED_DISTRIBUTION_QUBITS {
        return Ok(None);
    }
    let m = op.to_dense(DEFAULT_DENSE_CAP)?;
    Ok(Some((0..m.nrows()).map(|i| m[(i, i)].re).collect()))
}

fn run_cmd(config: &RunConfig, report: &mut Report) -> Result<()> {
    let tol = config.tolerance_or(RUN_TOL)?;
    let mode = config.mode()?;
    let seed = config.seed_or_default();
    let script_text = match &config.script {
        Some(p) => read(p, "script")?,
        None => String::new(),
    };
    let toffolis = Circuit::from_lines(&script_text, None)?
        .gates()
        .iter()
        .filter(|g| matches!(g, Gate::Toffoli { .. }))
        .count();
    let params = config.params(toffolis)?;
    let script = EvaluationScript::from_lines(&script_text, params.s)?;

    let (secret, source) = match &config.secret {
        Some(p) => (parse_secret(&read(p, "secret")?)?, format!("file {}", p.display())),
        None => (
            random_secret(&mut rng_from_seed(seed), params.s)?,
            format!("random, seed {seed}"),
        ),
    };
    if secret.num_qubits() != params.s {
        return Err(Error::Usage(format!(
            "secret has {} qubits but the scheme shares s = {}",
            secret.num_qubits(),
            params.s
        )));
    }

    let expected = script.apply_logical(&secret)?;
    let shared = deal(&params, &secret)?;
    let branches = evaluate(&shared, &script, mode)?;

    let mut summaries = Vec::with_capacity(branches.len());
    let mut worst: f64 = 0.0;
    let mut total = 0.0;
    let mut wrong_budget = 0;
    for b in &branches {
        let got = reconstruct(b)?;
        let distance = operator_distance(&got, &expected)?;
        worst = worst.max(distance);
        total += b.probability();
        if b.consumed_ancillas().len() != toffolis {
            wrong_budget += 1;
        }
        summaries.push(BranchSummary {
            bits: b.bits().to_vec(),
            probability: b.probability(),
            distance,
            consumed_ancillas: b.consumed_ancillas().iter().copied().collect(),
            z_distribution: z_distribution(&got)?,
            transcript: b.transcript().to_vec(),
        });
    }

    report.check(
        Check::new("max_round_trip_distance", worst, tol)
            .with_detail(format!("{} branch(es) against the directly evaluated script", branches.len())),
    );
    if mode == EvalMode::Exact {
        report.check(Check::new("branch_probability_gap", (1.0 - total).abs(), PROBABILITY_TOL));
    }
    report.check(
        Check::count("ancilla_count_mismatches", wrong_budget)
            .with_detail(format!("{toffolis} Toffoli(s), one ancilla triple each")),
    );
    report.details = json!({
        "params": to_value(&params),
        "regime": to_value(&params.regime()),
        "mode": to_value(&mode),
        "seed": seed,
        "secret": source,
        "script_gates": script.circuit().len(),
        "toffolis": toffolis,
        "branches": to_value(&summaries),
    });
    Ok(())
}

fn audit_cmd(config: &RunConfig, report: &mut Report) -> Result<()> {
    let tol = config.tolerance_or(AUDIT_TOL)?;
    let params = config.params(0)?;
    let n = params.n;
    let coalitions = match &config.coalition {
        Some(spec) => {
            let c = Coalition::parse(spec, n)?;
            if c.is_full() {
                report.note(
                    "the full coalition holds every share and can reconstruct the secret, \
                     so secret independence is not expected to hold for it",
                );
                return Err(Error::Usage(format!(
                    "coalition {c} is everyone; independence audits need at least one honest party"
                )));
            }
            vec![c]
        }
        None => (1..=n).map(|m| Coalition::alice_without(m, n)).collect::<Result<_>>()?,
    };

    let mut audits = Vec::new();
    let mut parity = Vec::new();
    for c in &coalitions {
        let a = secret_independence_check(&params, c, tol)?;
        report.check(Check::count(format!("tagged_residuals[{c}]"), a.tagged_residuals));
        report.check(
            Check::new(format!("trace_distance[{c}]"), a.max_trace_distance, tol)
                .with_detail(a.distance_method.clone()),
        );
        if c.is_covered_by_proof() {
            let p = parity_structure_check(&params, c)?;
            report.check(Check::count(format!("parity_structure[{c}]"), usize::from(!p.passed)));
            parity.push(p);
        } else {
            report.note(format!("coalition {c} is outside the Alice-plus-(n-1) setting"));
        }
        audits.push(a);
    }
    report.details = json!({
        "params": to_value(&params),
        "regime": to_value(&params.regime()),
        "audits": to_value(&audits),
        "parity": to_value(&parity),
    });
    Ok(())
}

fn ket(idx: usize) -> String {
    format!("|{:03b}>", idx)
}

fn gadget_cmd(config: &RunConfig, report: &mut Report) -> Result<()> {
    let tol = config.tolerance_or(GADGET_TOL)?;
    let seed = config.seed_or_default();
    let samples = config.samples.unwrap_or(100);

    let plain = plaintext_gadget_check(samples, seed, tol)?;
    let mut table = Vec::new();
    for idx in 0..8 {
        let branches = plaintext_branches(&StateVector::basis(3, idx)?)?;
        let min = branches.iter().map(|b| b.fidelity).fold(1.0, f64::min);
        let out = if idx & 0b110 == 0b110 { idx ^ 1 } else { idx };
        table.push(json!({
            "input": ket(idx),
            "expected": ket(out),
            "branches": branches.len(),
            "min_fidelity": min,
        }));
    }
    report.check(Check::new("basis_fidelity_gap", 1.0 - plain.basis_min_fidelity, tol));
    report.check(Check::count("truth_table_failures", usize::from(!plain.basis_truth_table_ok)));
    report.check(
        Check::new("random_fidelity_gap", 1.0 - plain.random_min_fidelity, tol)
            .with_detail(format!("{samples} Haar-random inputs, seed {seed}")),
    );
    report.check(Check::new(
        "branch_probability_gap",
        (1.0 - plain.min_branch_probability_sum).abs(),
        PROBABILITY_TOL,
    ));

    // Share level: n = 2, s = 3, t = 3, one Toffoli, every branch.
    let params = SchemeParams::strict(2, 1, 1)?;
    let script = EvaluationScript::from_gates(3, [Gate::toffoli(0, 1, 2)])?;
    let secrets = [
        ("|110>".to_string(), product_secret("110")?),
        (format!("random, seed {seed}"), random_secret(&mut rng_from_seed(seed), 3)?),
    ];
    let mut shares = Vec::new();
    let mut reuse = None;
    for (label, secret) in &secrets {
        let expected = script.apply_logical(secret)?;
        let branches = evaluate(&deal(&params, secret)?, &script, EvalMode::Exact)?;
        let mut worst: f64 = 0.0;
        let mut bad_budget = 0;
        for b in &branches {
            worst = worst.max(operator_distance(&reconstruct(b)?, &expected)?);
            if b.consumed_ancillas().len() != 1 || b.remaining_ancillas() != 0 {
                bad_budget += 1;
            }
        }
        report.check(Check::new(format!("share_distance[{label}]"), worst, SHARE_TOL));
        report.check(Check::count(format!("ancilla_decrement_failures[{label}]"), bad_budget));
        shares.push(json!({ "secret": label, "branches": branches.len(), "max_distance": worst }));
        if reuse.is_none() {
            reuse = Some(evaluate(&branches[0], &script, EvalMode::Exact));
        }
    }

    // A second Toffoli on a spent pool must be refused.
    let (failures, detail) = match reuse.expect("at least one secret") {
        Err(Error::Protocol(msg)) => (0, format!("refused: {msg}")),
        Err(e) => (1, format!("unexpected error: {e}")),
        Ok(_) => (1, "second Toffoli ran on a spent ancilla pool".to_string()),
    };
    report.check(Check::count("ancilla_reuse_accepted", failures).with_detail(detail));

    report.details = json!({
        "plaintext": to_value(&plain),
        "basis_table": table,
        "shares": {
            "params": to_value(&params),
            "results": shares,
        },
    });
    Ok(())
}
