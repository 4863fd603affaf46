use std::collections::hash_map::{DefaultHasher, Entry};
use std::collections::HashMap;
use std::fmt;
use std::hash::BuildHasherDefault;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::toffoli::{local_index, table};
use super::{i_pow, PauliLetter, PauliWord};
use crate::circuit::Gate;
use crate::error::{Error, Result};

/// Terms whose normalized magnitude `|c| · 2^N = |tr(P ρ)|` falls below this
/// are dropped after branching operations.
pub const DEFAULT_PRUNE_TOLERANCE: f64 = 1e-12;

/// Labels a term with the logical secret Pauli `σ` it descends from.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct SecretTag(pub PauliWord);

impl fmt::Display for SecretTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct TermKey {
    pub word: PauliWord,
    pub tag: Option<SecretTag>,
}

// Fixed-key hasher so iteration order, and therefore float summation order,
// is reproducible across runs.
type TermMap = HashMap<TermKey, Complex64, BuildHasherDefault<DefaultHasher>>;

/// Sparse operator `Σ c_P P` in the Pauli basis.
///
/// For a density operator `c_P = 2^{-N} tr(P ρ)`. Terms with the same word
/// but different secret tags are stored separately.
#[derive(Clone)]
pub struct PauliOperator {
    num_qubits: usize,
    terms: TermMap,
}

fn scale_factor(num_qubits: usize) -> f64 {
    2f64.powi(num_qubits as i32)
}

impl PauliOperator {
    /// The zero operator.
    pub fn zero(num_qubits: usize) -> Self {
        PauliOperator {
            num_qubits,
            terms: TermMap::default(),
        }
    }

    /// `I / 2^N`.
    pub fn maximally_mixed(num_qubits: usize) -> Self {
        let mut op = PauliOperator::zero(num_qubits);
        op.add_term(
            PauliWord::identity(num_qubits),
            None,
            Complex64::new(1.0 / scale_factor(num_qubits), 0.0),
        );
        op
    }

    /// `|0…0><0…0|` = `Π (I + Z_q)/2`.
    pub fn zero_state(num_qubits: usize) -> Self {
        let mut op = PauliOperator::maximally_mixed(num_qubits);
        for q in 0..num_qubits {
            let (p, post) = op.project_z(q, 0).expect("qubit in range");
            op = post.scale(Complex64::new(1.0 / p, 0.0));
        }
        op
    }

    pub fn from_terms(
        num_qubits: usize,
        terms: impl IntoIterator<Item = (PauliWord, Option<SecretTag>, Complex64)>,
    ) -> Result<Self> {
        let mut op = PauliOperator::zero(num_qubits);
        for (word, tag, c) in terms {
            if word.num_qubits() != num_qubits {
                return Err(Error::usage(format!(
                    "term {word} has {} qubits, operator has {num_qubits}",
                    word.num_qubits()
                )));
            }
            op.add_term(word, tag, c);
        }
        Ok(op)
    }

    /// Convenience constructor from `("XYZ", coeff)` pairs, untagged.
    pub fn from_strs(num_qubits: usize, terms: &[(&str, f64)]) -> Result<Self> {
        let parsed = terms
            .iter()
            .map(|(s, c)| Ok((s.parse::<PauliWord>()?, None, Complex64::new(*c, 0.0))))
            .collect::<Result<Vec<_>>>()?;
        PauliOperator::from_terms(num_qubits, parsed)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    fn prune_threshold(&self) -> f64 {
        DEFAULT_PRUNE_TOLERANCE / scale_factor(self.num_qubits)
    }

    /// Adds `c` to the coefficient of `(word, tag)`, dropping the entry if
    /// the sum falls below the pruning tolerance.
    pub fn add_term(&mut self, word: PauliWord, tag: Option<SecretTag>, c: Complex64) {
        debug_assert_eq!(word.num_qubits(), self.num_qubits);
        let threshold = self.prune_threshold();
        match self.terms.entry(TermKey { word, tag }) {
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().norm() < threshold {
                    e.remove();
                }
            }
            Entry::Vacant(e) => {
                if c.norm() >= threshold {
                    e.insert(c);
                }
            }
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&TermKey, &Complex64)> {
        self.terms.iter()
    }

    /// Terms in a stable order.
    pub fn sorted_terms(&self) -> Vec<(&TermKey, &Complex64)> {
        let mut v: Vec<_> = self.terms.iter().collect();
        v.sort_by(|a, b| a.0.cmp(b.0));
        v
    }

    /// Coefficient of `word`, summed over all tags.
    pub fn coefficient(&self, word: &PauliWord) -> Complex64 {
        self.terms
            .iter()
            .filter(|(k, _)| &k.word == word)
            .map(|(_, c)| *c)
            .sum()
    }

    pub fn tagged_coefficient(&self, word: &PauliWord, tag: Option<&SecretTag>) -> Complex64 {
        self.terms
            .get(&TermKey {
                word: word.clone(),
                tag: tag.cloned(),
            })
            .copied()
            .unwrap_or_default()
    }

    /// `tr(op) = 2^N × (coefficient of the all-I word)`.
    pub fn trace(&self) -> Complex64 {
        self.coefficient(&PauliWord::identity(self.num_qubits)) * scale_factor(self.num_qubits)
    }

    /// Number of terms that carry a secret tag.
    pub fn tagged_term_count(&self) -> usize {
        self.terms.keys().filter(|k| k.tag.is_some()).count()
    }

    /// True if every coefficient is real to within `tol` (normalized units).
    pub fn is_hermitian(&self, tol: f64) -> bool {
        let scale = scale_factor(self.num_qubits);
        self.untagged().terms.values().all(|c| (c.im * scale).abs() <= tol)
    }

    /// Merges terms that differ only in their tag.
    pub fn untagged(&self) -> PauliOperator {
        let mut out = PauliOperator::zero(self.num_qubits);
        for (k, c) in &self.terms {
            out.add_term(k.word.clone(), None, *c);
        }
        out
    }

    /// Tags every non-identity term with its own word, as a secret expansion.
    pub fn tag_by_word(&self) -> PauliOperator {
        let mut out = PauliOperator::zero(self.num_qubits);
        for (k, c) in &self.terms {
            let tag = (!k.word.is_identity()).then(|| SecretTag(k.word.clone()));
            out.add_term(k.word.clone(), tag, *c);
        }
        out
    }

    pub fn scale(&self, factor: Complex64) -> PauliOperator {
        let mut out = PauliOperator::zero(self.num_qubits);
        for (k, c) in &self.terms {
            out.add_term(k.word.clone(), k.tag.clone(), c * factor);
        }
        out
    }

    pub fn add(&self, other: &PauliOperator) -> Result<PauliOperator> {
        self.check_width(other)?;
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.add_term(k.word.clone(), k.tag.clone(), *c);
        }
        Ok(out)
    }

    fn check_width(&self, other: &PauliOperator) -> Result<()> {
        if self.num_qubits == other.num_qubits {
            Ok(())
        } else {
            Err(Error::usage(format!(
                "operator widths differ: {} vs {}",
                self.num_qubits, other.num_qubits
            )))
        }
    }

    /// `self ⊗ other`, with `other`'s qubits appended after `self`'s.
    /// At most one factor of each product term may carry a tag.
    pub fn tensor(&self, other: &PauliOperator) -> Result<PauliOperator> {
        let n = self.num_qubits + other.num_qubits;
        let mut out = PauliOperator::zero(n);
        for (ka, ca) in &self.terms {
            for (kb, cb) in &other.terms {
                let tag = match (&ka.tag, &kb.tag) {
                    (Some(_), Some(_)) => {
                        return Err(Error::usage("tensor of two tagged terms"));
                    }
                    (a, b) => a.clone().or_else(|| b.clone()),
                };
                let letters: Vec<PauliLetter> = ka.word.letters().chain(kb.word.letters()).collect();
                out.add_term(PauliWord::from_letters(&letters), tag, ca * cb);
            }
        }
        Ok(out)
    }

    /// Places this operator's qubit `i` at `positions[i]` inside a
    /// `num_qubits`-wide register, identity elsewhere.
    pub fn embed(&self, num_qubits: usize, positions: &[usize]) -> Result<PauliOperator> {
        if positions.len() != self.num_qubits || positions.iter().any(|&p| p >= num_qubits) {
            return Err(Error::usage("embedding positions do not match operator"));
        }
        let mut out = PauliOperator::zero(num_qubits);
        for (k, c) in &self.terms {
            let mut w = PauliWord::identity(num_qubits);
            for (i, l) in k.word.letters().enumerate() {
                w.set(positions[i], l);
            }
            out.add_term(w, k.tag.clone(), *c);
        }
        Ok(out)
    }

    /// In-place Clifford conjugation `ρ -> G ρ G†`.
    pub fn apply_clifford(&mut self, gate: &Gate) -> Result<()> {
        if !gate.is_clifford() {
            return Err(Error::usage(format!(
                "{} is not a supported Clifford gate; use conjugate_toffoli for TOFFOLI",
                gate.kind_name()
            )));
        }
        let old = std::mem::take(&mut self.terms);
        let mut fresh = TermMap::with_capacity_and_hasher(old.len(), Default::default());
        for (mut k, c) in old {
            let flip = k.word.conjugate_clifford_in_place(gate)?;
            fresh.insert(k, if flip { -c } else { c });
        }
        self.terms = fresh;
        Ok(())
    }

    pub fn conjugate_clifford(&self, gate: &Gate) -> Result<PauliOperator> {
        let mut out = self.clone();
        out.apply_clifford(gate)?;
        Ok(out)
    }

    pub fn conjugate_toffoli(&self, c1: usize, c2: usize, t: usize) -> Result<PauliOperator> {
        let qs = [c1, c2, t];
        if qs.iter().any(|&q| q >= self.num_qubits) {
            return Err(Error::usage(format!(
                "toffoli qubits {qs:?} outside {}-qubit operator",
                self.num_qubits
            )));
        }
        if c1 == c2 || c1 == t || c2 == t {
            return Err(Error::usage(format!("toffoli qubits must be distinct, got {qs:?}")));
        }
        let tab = table();
        let mut out = PauliOperator::zero(self.num_qubits);
        for (k, c) in &self.terms {
            let local = [k.word.get(c1), k.word.get(c2), k.word.get(t)];
            for (coef, image) in &tab[local_index(local)] {
                let mut w = k.word.clone();
                w.set(c1, image[0]);
                w.set(c2, image[1]);
                w.set(t, image[2]);
                out.add_term(w, k.tag.clone(), c * coef);
            }
        }
        Ok(out)
    }

    /// Conjugation by any unitary gate (Clifford or Toffoli).
    pub fn conjugate(&self, gate: &Gate) -> Result<PauliOperator> {
        match gate {
            Gate::Toffoli { controls, target } => {
                self.conjugate_toffoli(controls[0], controls[1], *target)
            }
            g if g.is_clifford() => self.conjugate_clifford(g),
            g => Err(Error::usage(format!(
                "{} is not a unitary gate",
                g.kind_name()
            ))),
        }
    }

    /// Traces out `traced`. Terms with a non-identity letter there vanish;
    /// survivors keep their tag and gain a factor `2^{|traced|}`.
    pub fn partial_trace(&self, traced: &[usize]) -> Result<PauliOperator> {
        let mut drop = vec![false; self.num_qubits];
        for &q in traced {
            if q >= self.num_qubits {
                return Err(Error::usage(format!(
                    "cannot trace qubit {q} of a {}-qubit operator",
                    self.num_qubits
                )));
            }
            drop[q] = true;
        }
        let keep: Vec<usize> = (0..self.num_qubits).filter(|&q| !drop[q]).collect();
        let traced_count = self.num_qubits - keep.len();
        let factor = scale_factor(traced_count);
        let traced_list: Vec<usize> = (0..self.num_qubits).filter(|&q| drop[q]).collect();
        let mut out = PauliOperator::zero(keep.len());
        for (k, c) in &self.terms {
            if k.word.acts_on_any(&traced_list) {
                continue;
            }
            out.add_term(k.word.restrict(&keep), k.tag.clone(), c * factor);
        }
        Ok(out)
    }

    /// Unnormalized post-measurement operator `Π_b ρ Π_b` for a Z-basis
    /// outcome on `qubit`, with its weight `tr(Π_b ρ)`.
    pub fn project_z(&self, qubit: usize, outcome: u8) -> Result<(f64, PauliOperator)> {
        if qubit >= self.num_qubits {
            return Err(Error::usage(format!(
                "cannot measure qubit {qubit} of a {}-qubit operator",
                self.num_qubits
            )));
        }
        let sign = if outcome & 1 == 0 { 1.0 } else { -1.0 };
        let mut out = PauliOperator::zero(self.num_qubits);
        for (k, c) in &self.terms {
            let flipped = match k.word.get(qubit) {
                PauliLetter::I => PauliLetter::Z,
                PauliLetter::Z => PauliLetter::I,
                _ => continue,
            };
            out.add_term(k.word.clone(), k.tag.clone(), c * 0.5);
            let mut w = k.word.clone();
            w.set(qubit, flipped);
            out.add_term(w, k.tag.clone(), c * (0.5 * sign));
        }
        let p = out.trace().re;
        Ok((p, out))
    }

    /// Z-basis measurement that discards the measured qubit: returns the
    /// outcome probability and the normalized `tr_q(Π_b ρ Π_b)/p ⊗ I/2`, so
    /// the width is unchanged and `qubit` carries only identity letters.
    pub fn measure_discard(&self, qubit: usize, outcome: u8) -> Result<(f64, PauliOperator)> {
        if qubit >= self.num_qubits {
            return Err(Error::usage(format!(
                "cannot measure qubit {qubit} of a {}-qubit operator",
                self.num_qubits
            )));
        }
        let sign = if outcome & 1 == 0 { 0.5 } else { -0.5 };
        let mut out = PauliOperator::zero(self.num_qubits);
        for (k, c) in &self.terms {
            let factor = match k.word.get(qubit) {
                PauliLetter::I => 0.5,
                PauliLetter::Z => sign,
                _ => continue,
            };
            let mut w = k.word.clone();
            w.set(qubit, PauliLetter::I);
            out.add_term(w, k.tag.clone(), c * factor);
        }
        let p = out.trace().re;
        if p > 0.0 {
            out = out.scale(Complex64::new(1.0 / p, 0.0));
        }
        Ok((p, out))
    }

    /// Dense matrix `Σ c_P P` (qubit 0 is the most significant index bit).
    pub fn to_dense(&self, cap: usize) -> Result<DMatrix<Complex64>> {
        let n = self.num_qubits;
        if n > cap {
            return Err(Error::resource(format!(
                "{n} qubits exceeds the dense cap of {cap}"
            )));
        }
        let dim = 1usize << n;
        let mut m = DMatrix::<Complex64>::zeros(dim, dim);
        for (k, c) in &self.terms {
            let (xm, zm) = index_masks(&k.word);
            let y_phase = i_pow((k.word.y_count() % 4) as u8);
            for j in 0..dim {
                let sign = if (j & zm).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                m[(j ^ xm, j)] += c * y_phase * sign;
            }
        }
        Ok(m)
    }

    /// Pauli expansion of a dense `2^N × 2^N` matrix.
    pub fn from_dense(matrix: &DMatrix<Complex64>) -> Result<PauliOperator> {
        let dim = matrix.nrows();
        if dim == 0 || !dim.is_power_of_two() || matrix.ncols() != dim {
            return Err(Error::usage(format!(
                "expected a square 2^N matrix, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let n = dim.trailing_zeros() as usize;
        let norm = 1.0 / dim as f64;
        let mut out = PauliOperator::zero(n);
        for xm in 0..dim {
            for zm in 0..dim {
                let y_phase = i_pow(((xm & zm).count_ones() % 4) as u8);
                let mut tr = Complex64::default();
                for k in 0..dim {
                    let sign = if (k & zm).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                    tr += matrix[(k, k ^ xm)] * sign;
                }
                let coeff = tr * y_phase * norm;
                if coeff.norm() * dim as f64 >= DEFAULT_PRUNE_TOLERANCE {
                    out.add_term(word_from_masks(n, xm, zm), None, coeff);
                }
            }
        }
        Ok(out)
    }

    /// Largest normalized coefficient difference against `other`, comparing
    /// tagged entries key by key.
    pub fn max_tagged_diff(&self, other: &PauliOperator) -> Result<f64> {
        self.check_width(other)?;
        let scale = scale_factor(self.num_qubits);
        let mut worst: f64 = 0.0;
        for (k, c) in &self.terms {
            let d = c - other.terms.get(k).copied().unwrap_or_default();
            worst = worst.max(d.norm() * scale);
        }
        for (k, c) in &other.terms {
            if !self.terms.contains_key(k) {
                worst = worst.max(c.norm() * scale);
            }
        }
        Ok(worst)
    }

    /// Same as [`max_tagged_diff`](Self::max_tagged_diff) after merging tags.
    pub fn max_diff(&self, other: &PauliOperator) -> Result<f64> {
        self.untagged().max_tagged_diff(&other.untagged())
    }
}

/// Basis-index masks for a word: bit `N-1-q` stands for qubit `q`.
fn index_masks(word: &PauliWord) -> (usize, usize) {
    let n = word.num_qubits();
    let (mut xm, mut zm) = (0usize, 0usize);
    let (wx, wz) = (word.x_mask_u64(), word.z_mask_u64());
    for q in 0..n {
        let bit = 1usize << (n - 1 - q);
        if (wx >> q) & 1 == 1 {
            xm |= bit;
        }
        if (wz >> q) & 1 == 1 {
            zm |= bit;
        }
    }
    (xm, zm)
}

fn word_from_masks(n: usize, xm: usize, zm: usize) -> PauliWord {
    let mut w = PauliWord::identity(n);
    for q in 0..n {
        let bit = 1usize << (n - 1 - q);
        let letter = match (xm & bit != 0, zm & bit != 0) {
            (false, false) => continue,
            (true, false) => PauliLetter::X,
            (true, true) => PauliLetter::Y,
            (false, true) => PauliLetter::Z,
        };
        w.set(q, letter);
    }
    w
}

impl fmt::Debug for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliOperator[{}q]{{", self.num_qubits)?;
        for (i, (k, c)) in self.sorted_terms().into_iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}", k.word)?;
            if let Some(tag) = &k.tag {
                write!(f, "<{tag}>")?;
            }
            write!(f, ": {c}")?;
        }
        write!(f, "}}")
    }
}
