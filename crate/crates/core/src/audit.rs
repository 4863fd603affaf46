//! What a coalition of parties can learn from its shares.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::Serialize;

use crate::circuit::Party;
use crate::dense::{trace_distance, DensityMatrix, DEFAULT_DENSE_CAP};
use crate::error::{Error, Result};
use crate::pauli::{PauliLetter, PauliOperator, PauliWord, SecretTag};
use crate::protocol::{
    announce_distribution, deal, deal_symbolic, product_secret, restore_measured,
    AnnouncementReport, EvaluationScript, Regime, SchemeParams, SharedState,
};

pub const AUDIT_TOL: f64 = 1e-10;

/// Parties pooling their shares.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Coalition {
    members: BTreeSet<Party>,
    n: usize,
}

impl Coalition {
    pub fn new(members: impl IntoIterator<Item = Party>, n: usize) -> Result<Self> {
        let members: BTreeSet<Party> = members.into_iter().collect();
        for p in &members {
            if let Party::Participant(i) = p {
                if *i == 0 || *i > n {
                    return Err(Error::usage(format!(
                        "participant {i} does not exist (n = {n})"
                    )));
                }
            }
        }
        Ok(Coalition { members, n })
    }

    /// Parses `"alice,1,2"`.
    pub fn parse(spec: &str, n: usize) -> Result<Self> {
        let mut members = Vec::new();
        for tok in spec.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            if tok.eq_ignore_ascii_case("alice") {
                members.push(Party::Alice);
            } else {
                let i: usize = tok
                    .parse()
                    .map_err(|_| Error::usage(format!("bad coalition member '{tok}'")))?;
                members.push(Party::Participant(i));
            }
        }
        Coalition::new(members, n)
    }

    pub fn everyone(n: usize) -> Self {
        let mut members = vec![Party::Alice];
        members.extend((1..=n).map(Party::Participant));
        Coalition::new(members, n).expect("valid parties")
    }

    /// Alice plus every participant except `missing`.
    pub fn alice_without(missing: usize, n: usize) -> Result<Self> {
        let mut members = vec![Party::Alice];
        members.extend((1..=n).filter(|&i| i != missing).map(Party::Participant));
        Coalition::new(members, n)
    }

    pub fn members(&self) -> &BTreeSet<Party> {
        &self.members
    }

    pub fn honest(&self) -> Vec<Party> {
        Coalition::everyone(self.n)
            .members
            .into_iter()
            .filter(|p| !self.members.contains(p))
            .collect()
    }

    pub fn is_full(&self) -> bool {
        self.members.len() == self.n + 1
    }

    /// Alice together with all but one participant.
    pub fn is_covered_by_proof(&self) -> bool {
        self.members.contains(&Party::Alice) && self.members.len() == self.n
    }

    pub fn columns(&self) -> Vec<usize> {
        self.members.iter().map(|p| p.column()).collect()
    }
}

impl fmt::Display for Coalition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = self.members.iter().map(|p| p.to_string()).collect();
        write!(f, "{}", names.join(","))
    }
}

impl FromStr for Coalition {
    type Err = Error;

    /// Infers `n` from the largest participant index; prefer [`Coalition::parse`].
    fn from_str(s: &str) -> Result<Self> {
        let probe = Coalition::parse(s, usize::MAX)?;
        let n = probe
            .members
            .iter()
            .filter_map(|p| match p {
                Party::Participant(i) => Some(*i),
                Party::Alice => None,
            })
            .max()
            .unwrap_or(1);
        Coalition::new(probe.members, n)
    }
}

/// Reduced state of the coalition's columns; the honest columns are traced.
pub fn adversary_view(shared: &SharedState, coalition: &Coalition) -> Result<PauliOperator> {
    let layout = shared.layout();
    let kept: BTreeSet<usize> = coalition.columns().into_iter().collect();
    let (inside, traced): (Vec<usize>, Vec<usize>) =
        (0..layout.num_qubits()).partition(|&q| kept.contains(&layout.position_of(q).1));
    let view = shared.state().partial_trace(&traced)?;
    restore_measured(&view, &inside, shared.measured_qubits())
}

/// Number of secret-tagged terms above the audit tolerance.
pub fn tagged_residuals(op: &PauliOperator, tol: f64) -> usize {
    let scale = 2f64.powi(op.num_qubits() as i32);
    op.iter()
        .filter(|(k, c)| k.tag.is_some() && c.norm() * scale > tol)
        .count()
}

/// Every Pauli word on `s` qubits, identity first.
fn all_words(s: usize) -> Vec<PauliWord> {
    (0..4usize.pow(s as u32))
        .map(|mut idx| {
            let mut letters = vec![PauliLetter::I; s];
            for l in letters.iter_mut().rev() {
                *l = PauliLetter::ALL[idx % 4];
                idx /= 4;
            }
            PauliWord::from_letters(&letters)
        })
        .collect()
}

/// Placeholder secret with every Pauli term present. Coefficients are the
/// symbolic weights `ω_σ = 1` (scaled by `2^-s`); only the tags matter.
pub fn generic_secret(s: usize) -> PauliOperator {
    let c = Complex64::new(0.5f64.powi(s as i32), 0.0);
    let mut op = PauliOperator::zero(s);
    for w in all_words(s) {
        op.add_term(w, None, c);
    }
    op
}

/// Replaces each tag `σ` by the concrete secret's weight on `σ`, given the
/// placeholder weights the symbolic run was dealt with.
pub fn instantiate(view: &PauliOperator, placeholder: &PauliOperator, secret: &PauliOperator) -> PauliOperator {
    let mut out = PauliOperator::zero(view.num_qubits());
    for (k, c) in view.iter() {
        let factor = match &k.tag {
            None => Complex64::new(1.0, 0.0),
            Some(SecretTag(sigma)) => {
                let base = placeholder.coefficient(sigma);
                if base.norm() == 0.0 {
                    Complex64::default()
                } else {
                    secret.coefficient(sigma) / base
                }
            }
        };
        out.add_term(k.word.clone(), None, c * factor);
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct AuditReport {
    pub params: SchemeParams,
    pub coalition: Vec<Party>,
    pub honest: Vec<Party>,
    pub regime: Regime,
    pub tagged_residuals: usize,
    pub max_trace_distance: f64,
    pub distance_method: String,
    pub tolerance: f64,
    pub verdict: String,
    pub covered_by_proof: bool,
    pub notes: Vec<String>,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.verdict == "pass"
    }
}

fn reference_pairs(s: usize) -> Vec<(String, String)> {
    let zeros = "0".repeat(s);
    vec![
        (zeros.clone(), "1".repeat(s)),
        (zeros, "+".repeat(s)),
    ]
}

/// Symbolic secret-independence check for one coalition.
///
/// A fully tagged generic secret is dealt and the coalition's view computed.
/// Zero surviving tagged terms means the view is the same for every secret.
/// The view is also instantiated on reference secret pairs to report a
/// trace distance: dense when small enough, otherwise the Hilbert-Schmidt
/// bound `½·√(2^N)·‖Δ‖₂`.
pub fn secret_independence_check(
    params: &SchemeParams,
    coalition: &Coalition,
    tol: f64,
) -> Result<AuditReport> {
    params.validate()?;
    if coalition.is_full() {
        return Err(Error::usage(
            "the coalition holds every share and can reconstruct the secret; \
             independence only applies to proper subsets",
        ));
    }
    let placeholder = generic_secret(params.s);
    let shared = deal_symbolic(params, &placeholder)?;
    let view = adversary_view(&shared, coalition)?;
    let residuals = tagged_residuals(&view, tol);

    let dense = view.num_qubits() <= DEFAULT_DENSE_CAP;
    let mut max_td: f64 = 0.0;
    for (a, b) in reference_pairs(params.s) {
        let va = instantiate(&view, &placeholder, &product_secret(&a)?);
        let vb = instantiate(&view, &placeholder, &product_secret(&b)?);
        let d = if dense {
            let da = DensityMatrix::from_matrix_unchecked(va.to_dense(DEFAULT_DENSE_CAP)?)?;
            let db = DensityMatrix::from_matrix_unchecked(vb.to_dense(DEFAULT_DENSE_CAP)?)?;
            trace_distance(&da, &db)?
        } else {
            hilbert_schmidt_bound(&va, &vb)?
        };
        max_td = max_td.max(d);
    }

    let mut notes = Vec::new();
    if !coalition.is_covered_by_proof() {
        notes.push(
            "coalition is outside the analysed case (Alice plus all but one participant); \
             result is descriptive"
                .to_string(),
        );
    }
    if params.regime() == Regime::Even && !coalition.members().contains(&Party::Alice) {
        notes.push(
            "even column count without Alice: the surviving participant columns carry \
             X^{⊗n} and Y^{⊗n} patterns of the secret"
                .to_string(),
        );
    }
    notes.push(format!(
        "Toffoli budget taken as t/3 = {} ancilla triple(s)",
        params.toffoli_budget()
    ));
    let pass = residuals == 0 && max_td <= tol;
    Ok(AuditReport {
        params: *params,
        coalition: coalition.members().iter().copied().collect(),
        honest: coalition.honest(),
        regime: params.regime(),
        tagged_residuals: residuals,
        max_trace_distance: max_td,
        distance_method: if dense { "dense" } else { "hilbert-schmidt-bound" }.to_string(),
        tolerance: tol,
        verdict: if pass { "pass" } else { "fail" }.to_string(),
        covered_by_proof: coalition.is_covered_by_proof(),
        notes,
    })
}

/// Upper bound `½ ‖Δ‖₁ ≤ ½ √(2^N) ‖Δ‖₂` with `‖Δ‖₂² = 2^N Σ |Δc_P|²`.
fn hilbert_schmidt_bound(a: &PauliOperator, b: &PauliOperator) -> Result<f64> {
    let diff = a.add(&b.scale(Complex64::new(-1.0, 0.0)))?;
    let dim = 2f64.powi(a.num_qubits() as i32);
    let sum: f64 = diff.iter().map(|(_, c)| c.norm_sqr()).sum();
    Ok(0.5 * dim * sum.sqrt())
}

/// Trace distance between the coalition's views of two concrete secrets.
pub fn distinguishability(
    params: &SchemeParams,
    coalition: &Coalition,
    secret_a: &PauliOperator,
    secret_b: &PauliOperator,
) -> Result<f64> {
    let reduced_qubits = coalition.members().len() * params.layout().rows();
    if reduced_qubits > DEFAULT_DENSE_CAP {
        return Err(Error::resource(format!(
            "coalition view has {reduced_qubits} qubits, above the dense cap of \
             {DEFAULT_DENSE_CAP}; use the symbolic secret_independence_check instead"
        )));
    }
    let va = adversary_view(&deal(params, secret_a)?, coalition)?;
    let vb = adversary_view(&deal(params, secret_b)?, coalition)?;
    let da = DensityMatrix::from_matrix_unchecked(va.to_dense(DEFAULT_DENSE_CAP)?)?;
    let db = DensityMatrix::from_matrix_unchecked(vb.to_dense(DEFAULT_DENSE_CAP)?)?;
    trace_distance(&da, &db)
}

/// Terms of the dealt state restricted to the secret rows, one word per
/// term (qubit order row-major over the secret rows).
fn secret_row_words(shared: &SharedState, tagged_only: bool) -> BTreeSet<(String, Option<String>)> {
    let layout = shared.layout();
    let keep: Vec<usize> = (1..=layout.s).flat_map(|x| layout.row_qubits(x)).collect();
    shared
        .state()
        .iter()
        .filter(|(k, _)| !tagged_only || k.tag.is_some())
        .map(|(k, _)| {
            (
                k.word.restrict(&keep).to_string(),
                k.tag.as_ref().map(|t| t.to_string()),
            )
        })
        .collect()
}

/// Expected per-row letters of the encoding of `σ` on one row.
fn encoded_row(sigma: PauliLetter, m: usize) -> String {
    let mut letters = vec![sigma.as_char(); m];
    if m.is_multiple_of(2) {
        letters[0] = match sigma {
            PauliLetter::I | PauliLetter::X => 'I',
            _ => 'Z',
        };
    }
    letters.into_iter().collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct ParityReport {
    pub params: SchemeParams,
    pub regime: Regime,
    pub coalition: Vec<Party>,
    /// Encoded secret-row terms equal the expected `σ^{⊗n+1}` /
    /// `θ(σ) ⊗ σ^{⊗n}` patterns, one per secret Pauli.
    pub encoded_terms_match: bool,
    /// Surviving secret-row words after the honest column is traced.
    pub surviving_words: Vec<String>,
    pub expected_words: Vec<String>,
    /// Per-σ Alice column factor `θ(σ)` in the even regime.
    pub theta_factors: Vec<(String, String)>,
    pub passed: bool,
}

/// Compares encoded and reduced term sets with the two parity regimes.
pub fn parity_structure_check(params: &SchemeParams, coalition: &Coalition) -> Result<ParityReport> {
    let placeholder = generic_secret(params.s);
    let shared = deal_symbolic(params, &placeholder)?;
    let m = params.columns();
    let layout = params.layout();

    // Expected encoded terms on the secret rows: one per secret Pauli.
    let mut expected_encoded = BTreeSet::new();
    let mut theta_factors = Vec::new();
    for sigma in all_words(params.s) {
        let word: String = sigma.letters().map(|l| encoded_row(l, m)).collect();
        let tag = (!sigma.is_identity()).then(|| sigma.to_string());
        if m.is_multiple_of(2) {
            let theta: String = sigma.letters().map(|l| encoded_row(l, m).chars().next().unwrap()).collect();
            theta_factors.push((sigma.to_string(), theta));
        }
        expected_encoded.insert((word, tag));
    }
    // Ancilla rows contribute extra terms with the same secret-row word; the
    // set of distinct (word, tag) pairs is what is compared.
    let encoded = secret_row_words(&shared, false);
    let encoded_terms_match = encoded == expected_encoded;

    let view = adversary_view(&shared, coalition)?;
    let coalition_cols = coalition.columns();
    let kept_positions: Vec<(usize, usize)> = (0..layout.num_qubits())
        .map(|q| layout.position_of(q))
        .filter(|(_, y)| coalition_cols.contains(y))
        .collect();
    let secret_idx: Vec<usize> = kept_positions
        .iter()
        .enumerate()
        .filter(|(_, (x, _))| *x <= layout.s)
        .map(|(i, _)| i)
        .collect();
    let surviving: BTreeSet<String> = view
        .iter()
        .map(|(k, _)| k.word.restrict(&secret_idx).to_string())
        .collect();
    // After tracing a participant column every tagged term vanishes, so
    // θ reduces to I and only the all-identity secret-row word survives.
    let expected: BTreeSet<String> =
        [std::iter::repeat_n('I', secret_idx.len()).collect()].into_iter().collect();
    let passed = encoded_terms_match && surviving == expected && tagged_residuals(&view, AUDIT_TOL) == 0;
    Ok(ParityReport {
        params: *params,
        regime: params.regime(),
        coalition: coalition.members().iter().copied().collect(),
        encoded_terms_match,
        surviving_words: surviving.into_iter().collect(),
        expected_words: expected.into_iter().collect(),
        theta_factors,
        passed,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct HonestViewReport {
    pub honest: Party,
    pub branches: usize,
    /// Largest normalized deviation of the honest reduced state from
    /// maximally mixed, over branches.
    pub max_mixed_deviation: f64,
    pub announcements: Option<AnnouncementReport>,
    pub tolerance: f64,
    pub passed: bool,
}

/// Checks that the honest participant's unmeasured qubits are maximally
/// mixed on every branch, and attaches the broadcast-bit distribution.
pub fn honest_view_check(
    branches: &[SharedState],
    honest: usize,
    announcements: Option<AnnouncementReport>,
    tol: f64,
) -> Result<HonestViewReport> {
    let mut worst: f64 = 0.0;
    for b in branches {
        let layout = b.layout();
        if honest == 0 || honest > layout.n {
            return Err(Error::usage(format!("participant {honest} does not exist")));
        }
        let col = honest + 1;
        let traced: Vec<usize> = (0..layout.num_qubits())
            .filter(|&q| layout.position_of(q).1 != col || b.measured_qubits().contains_key(&q))
            .collect();
        let view = b.state().partial_trace(&traced)?;
        let mixed = PauliOperator::maximally_mixed(view.num_qubits());
        worst = worst.max(view.max_diff(&mixed)?);
    }
    let bits_ok = announcements
        .as_ref()
        .is_none_or(|a| a.max_marginal_deviation <= tol && a.max_joint_variation <= tol);
    Ok(HonestViewReport {
        honest: Party::Participant(honest),
        branches: branches.len(),
        max_mixed_deviation: worst,
        announcements,
        tolerance: tol,
        passed: worst <= tol && bits_ok,
    })
}

/// Named product secrets `|0…0>`, `|1…1>`, `|+…+>`.
pub fn reference_secrets(s: usize) -> Result<Vec<(String, PauliOperator)>> {
    ["0", "1", "+"]
        .iter()
        .map(|c| {
            let spec = c.repeat(s);
            Ok((format!("|{spec}>"), product_secret(&spec)?))
        })
        .collect()
}

/// Broadcast distribution over the reference secrets.
pub fn reference_announcements(params: &SchemeParams, script: &EvaluationScript) -> Result<AnnouncementReport> {
    announce_distribution(params, script, &reference_secrets(params.s)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Gate;
    use crate::protocol::{evaluate, EvalMode};

    #[test]
    fn coalition_parsing() {
        let c = Coalition::parse("alice, 1,2", 3).unwrap();
        assert_eq!(c.columns(), vec![1, 2, 3]);
        assert_eq!(c.honest(), vec![Party::Participant(3)]);
        assert!(c.is_covered_by_proof());
        assert!(Coalition::parse("alice,4", 3).is_err());
        assert!(Coalition::parse("bob", 3).is_err());
        assert!(Coalition::everyone(2).is_full());
    }

    #[test]
    fn full_coalition_is_rejected() {
        let p = SchemeParams::relaxed(2, 1, 0).unwrap();
        assert!(matches!(
            secret_independence_check(&p, &Coalition::everyone(2), AUDIT_TOL),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn small_independence_passes() {
        let p = SchemeParams::relaxed(2, 1, 0).unwrap();
        let r = secret_independence_check(&p, &Coalition::alice_without(2, 2).unwrap(), AUDIT_TOL)
            .unwrap();
        assert!(r.passed(), "{r:?}");
        assert_eq!(r.distance_method, "dense");
    }

    #[test]
    fn full_view_distinguishes() {
        let p = SchemeParams::relaxed(2, 1, 0).unwrap();
        let d = distinguishability(
            &p,
            &Coalition::everyone(2),
            &product_secret("0").unwrap(),
            &product_secret("1").unwrap(),
        )
        .unwrap();
        assert!((d - 1.0).abs() < 1e-10);
    }

    #[test]
    fn instantiate_recovers_concrete_view() {
        let p = SchemeParams::relaxed(2, 1, 0).unwrap();
        let coalition = Coalition::everyone(2);
        let placeholder = generic_secret(1);
        let view = adversary_view(&deal_symbolic(&p, &placeholder).unwrap(), &coalition).unwrap();
        let secret = product_secret("+").unwrap();
        let direct = adversary_view(&deal(&p, &secret).unwrap(), &coalition).unwrap();
        let inst = instantiate(&view, &placeholder, &secret);
        assert!(inst.max_diff(&direct).unwrap() < 1e-12);
    }

    #[test]
    fn even_regime_without_alice_leaks() {
        let p = SchemeParams::relaxed(3, 1, 0).unwrap();
        let c = Coalition::parse("1,2,3", 3).unwrap();
        let r = secret_independence_check(&p, &c, AUDIT_TOL).unwrap();
        assert!(!r.covered_by_proof);
        assert!(r.tagged_residuals > 0);
    }

    #[test]
    fn parity_small() {
        for n in [2, 3] {
            let p = SchemeParams::relaxed(n, 1, 0).unwrap();
            let r = parity_structure_check(&p, &Coalition::alice_without(1, n).unwrap()).unwrap();
            assert!(r.passed, "{r:?}");
        }
    }

    #[test]
    fn honest_view_clifford_only_is_vacuous() {
        let p = SchemeParams::relaxed(2, 1, 0).unwrap();
        let script = EvaluationScript::from_gates(1, [Gate::H(0)]).unwrap();
        let branches =
            evaluate(&deal(&p, &product_secret("0").unwrap()).unwrap(), &script, EvalMode::Exact)
                .unwrap();
        let ann = reference_announcements(&p, &script).unwrap();
        assert!(ann.is_empty());
        let r = honest_view_check(&branches, 1, Some(ann), AUDIT_TOL).unwrap();
        assert!(r.passed);
    }
}
