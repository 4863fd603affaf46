//! Pauli strings with packed symplectic storage and exact phase tracking.
//!
//! Letters are stored as an `(x, z)` bit pair per qubit: I = (0,0), X = (1,0),
//! Z = (0,1), Y = (1,1). `Y` is the Hermitian Pauli `i|1><0| - i|0><1|`, so
//! the pair (1,1) denotes `i·X·Z`.

mod operator;
mod toffoli;

use std::fmt;
use std::str::FromStr;

use smallvec::SmallVec;

use crate::circuit::Gate;
use crate::error::{Error, Result};

pub use operator::{PauliOperator, SecretTag, TermKey, DEFAULT_PRUNE_TOLERANCE};

type Lanes = SmallVec<[u64; 2]>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PauliLetter {
    I,
    X,
    Y,
    Z,
}

impl PauliLetter {
    pub const ALL: [PauliLetter; 4] = [PauliLetter::I, PauliLetter::X, PauliLetter::Y, PauliLetter::Z];

    fn bits(self) -> (bool, bool) {
        match self {
            PauliLetter::I => (false, false),
            PauliLetter::X => (true, false),
            PauliLetter::Y => (true, true),
            PauliLetter::Z => (false, true),
        }
    }

    fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => PauliLetter::I,
            (true, false) => PauliLetter::X,
            (true, true) => PauliLetter::Y,
            (false, true) => PauliLetter::Z,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            PauliLetter::I => 'I',
            PauliLetter::X => 'X',
            PauliLetter::Y => 'Y',
            PauliLetter::Z => 'Z',
        }
    }

    pub fn from_char(c: char) -> Result<Self> {
        match c {
            'I' => Ok(PauliLetter::I),
            'X' => Ok(PauliLetter::X),
            'Y' => Ok(PauliLetter::Y),
            'Z' => Ok(PauliLetter::Z),
            other => Err(Error::usage(format!("not a Pauli letter: {other:?}"))),
        }
    }
}

impl fmt::Display for PauliLetter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

/// Phase-free Pauli word over a fixed number of qubits.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliWord {
    num_qubits: usize,
    x: Lanes,
    z: Lanes,
}

fn lanes_for(n: usize) -> usize {
    n.div_ceil(64)
}

impl PauliWord {
    pub fn identity(num_qubits: usize) -> Self {
        let lanes = lanes_for(num_qubits);
        PauliWord {
            num_qubits,
            x: SmallVec::from_elem(0, lanes),
            z: SmallVec::from_elem(0, lanes),
        }
    }

    pub fn from_letters(letters: &[PauliLetter]) -> Self {
        let mut w = PauliWord::identity(letters.len());
        for (q, &l) in letters.iter().enumerate() {
            w.set(q, l);
        }
        w
    }

    /// `letter` on `qubit`, identity elsewhere.
    pub fn single(num_qubits: usize, qubit: usize, letter: PauliLetter) -> Self {
        let mut w = PauliWord::identity(num_qubits);
        w.set(qubit, letter);
        w
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    #[inline]
    fn xb(&self, q: usize) -> bool {
        (self.x[q / 64] >> (q % 64)) & 1 == 1
    }

    #[inline]
    fn zb(&self, q: usize) -> bool {
        (self.z[q / 64] >> (q % 64)) & 1 == 1
    }

    #[inline]
    fn put(&mut self, q: usize, x: bool, z: bool) {
        let (lane, bit) = (q / 64, 1u64 << (q % 64));
        if x {
            self.x[lane] |= bit;
        } else {
            self.x[lane] &= !bit;
        }
        if z {
            self.z[lane] |= bit;
        } else {
            self.z[lane] &= !bit;
        }
    }

    pub fn get(&self, q: usize) -> PauliLetter {
        assert!(q < self.num_qubits, "qubit {q} out of range");
        PauliLetter::from_bits(self.xb(q), self.zb(q))
    }

    pub fn set(&mut self, q: usize, letter: PauliLetter) {
        assert!(q < self.num_qubits, "qubit {q} out of range");
        let (x, z) = letter.bits();
        self.put(q, x, z);
    }

    pub fn letters(&self) -> impl Iterator<Item = PauliLetter> + '_ {
        (0..self.num_qubits).map(|q| self.get(q))
    }

    pub fn is_identity(&self) -> bool {
        self.x.iter().chain(self.z.iter()).all(|&w| w == 0)
    }

    pub fn weight(&self) -> usize {
        self.x
            .iter()
            .zip(&self.z)
            .map(|(x, z)| (x | z).count_ones() as usize)
            .sum()
    }

    /// True if any qubit in `qubits` carries a non-identity letter.
    pub fn acts_on_any(&self, qubits: &[usize]) -> bool {
        qubits.iter().any(|&q| self.xb(q) || self.zb(q))
    }

    /// Bit mask of X components, qubit `q` at bit `q` (only for <= 64 qubits).
    pub(crate) fn x_mask_u64(&self) -> u64 {
        self.x.first().copied().unwrap_or(0)
    }

    pub(crate) fn z_mask_u64(&self) -> u64 {
        self.z.first().copied().unwrap_or(0)
    }

    /// Number of Y letters.
    pub fn y_count(&self) -> usize {
        self.x
            .iter()
            .zip(&self.z)
            .map(|(x, z)| (x & z).count_ones() as usize)
            .sum()
    }

    pub fn commutes_with(&self, other: &PauliWord) -> bool {
        assert_eq!(self.num_qubits, other.num_qubits);
        let mut parity = 0u32;
        for i in 0..self.x.len() {
            parity ^= ((self.x[i] & other.z[i]) ^ (self.z[i] & other.x[i])).count_ones() & 1;
        }
        parity == 0
    }

    /// Sub-word on `keep`, in the order given.
    pub fn restrict(&self, keep: &[usize]) -> PauliWord {
        let mut w = PauliWord::identity(keep.len());
        for (i, &q) in keep.iter().enumerate() {
            w.put(i, self.xb(q), self.zb(q));
        }
        w
    }

    /// Product `self · other` as `(i-exponent mod 4, word)`.
    pub fn mul_with_phase(&self, other: &PauliWord) -> (u8, PauliWord) {
        assert_eq!(self.num_qubits, other.num_qubits);
        let mut pos = 0u32;
        let mut neg = 0u32;
        let mut out = PauliWord::identity(self.num_qubits);
        for i in 0..self.x.len() {
            let (x1, z1, x2, z2) = (self.x[i], self.z[i], other.x[i], other.z[i]);
            let (a_x, a_y, a_z) = (x1 & !z1, x1 & z1, !x1 & z1);
            let (b_x, b_y, b_z) = (x2 & !z2, x2 & z2, !x2 & z2);
            // XY = iZ, YZ = iX, ZX = iY and their reverses with -i.
            pos += ((a_x & b_y) | (a_y & b_z) | (a_z & b_x)).count_ones();
            neg += ((a_x & b_z) | (a_y & b_x) | (a_z & b_y)).count_ones();
            out.x[i] = x1 ^ x2;
            out.z[i] = z1 ^ z2;
        }
        let phase = ((pos + 3 * neg) % 4) as u8;
        (phase, out)
    }

    /// Conjugates the word in place by a Clifford gate: `P -> G P G†`.
    /// Returns true when the image picks up a factor -1.
    pub fn conjugate_clifford_in_place(&mut self, gate: &Gate) -> Result<bool> {
        let check = |q: usize| -> Result<()> {
            if q < self.num_qubits {
                Ok(())
            } else {
                Err(Error::usage(format!(
                    "gate qubit {q} outside {}-qubit operator",
                    self.num_qubits
                )))
            }
        };
        for q in gate.qubits() {
            check(q)?;
        }
        let flip = match *gate {
            Gate::I(_) => false,
            Gate::H(q) => {
                let (x, z) = (self.xb(q), self.zb(q));
                self.put(q, z, x);
                x && z
            }
            Gate::S(q) => {
                let (x, z) = (self.xb(q), self.zb(q));
                self.put(q, x, z ^ x);
                x && z
            }
            Gate::Sdg(q) => {
                let (x, z) = (self.xb(q), self.zb(q));
                self.put(q, x, z ^ x);
                x && !z
            }
            Gate::X(q) => self.zb(q),
            Gate::Y(q) => self.xb(q) ^ self.zb(q),
            Gate::Z(q) => self.xb(q),
            Gate::Cnot { control, target } => {
                let (xc, zc, xt, zt) = (
                    self.xb(control),
                    self.zb(control),
                    self.xb(target),
                    self.zb(target),
                );
                self.put(control, xc, zc ^ zt);
                self.put(target, xt ^ xc, zt);
                xc && zt && !(xt ^ zc)
            }
            Gate::Cz(a, b) => {
                let (xa, za, xb, zb) = (self.xb(a), self.zb(a), self.xb(b), self.zb(b));
                self.put(a, xa, za ^ xb);
                self.put(b, xb, zb ^ xa);
                xa && xb && (za ^ zb)
            }
            ref other => {
                return Err(Error::usage(format!(
                    "{} is not a Clifford gate; use conjugate_toffoli for TOFFOLI",
                    other.kind_name()
                )))
            }
        };
        Ok(flip)
    }
}

impl fmt::Display for PauliWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in self.letters() {
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliWord({self})")
    }
}

impl FromStr for PauliWord {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let letters = s
            .trim()
            .chars()
            .map(PauliLetter::from_char)
            .collect::<Result<Vec<_>>>()?;
        Ok(PauliWord::from_letters(&letters))
    }
}

/// Pauli word with a global factor `i^phase_power`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    word: PauliWord,
    phase_power: u8,
}

impl PauliString {
    pub fn new(word: PauliWord, phase_power: u8) -> Self {
        PauliString {
            word,
            phase_power: phase_power % 4,
        }
    }

    pub fn identity(num_qubits: usize) -> Self {
        PauliString::new(PauliWord::identity(num_qubits), 0)
    }

    pub fn word(&self) -> &PauliWord {
        &self.word
    }

    pub fn phase_power(&self) -> u8 {
        self.phase_power
    }

    pub fn num_qubits(&self) -> usize {
        self.word.num_qubits
    }

    /// `i^phase_power` as a complex number.
    pub fn phase(&self) -> num_complex::Complex64 {
        i_pow(self.phase_power)
    }

    pub fn negate(&self) -> PauliString {
        PauliString::new(self.word.clone(), self.phase_power + 2)
    }

    pub fn conjugate_clifford(&self, gate: &Gate) -> Result<PauliString> {
        let mut word = self.word.clone();
        let flip = word.conjugate_clifford_in_place(gate)?;
        Ok(PauliString::new(word, self.phase_power + if flip { 2 } else { 0 }))
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = ["+", "+i", "-", "-i"][self.phase_power as usize];
        write!(f, "{prefix}{}", self.word)
    }
}

/// Parses an optional sign prefix (`+`, `-`, `+i`, `-i`, `i`) then letters.
impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (phase, rest) = if let Some(r) = s.strip_prefix("-i") {
            (3, r)
        } else if let Some(r) = s.strip_prefix("+i") {
            (1, r)
        } else if let Some(r) = s.strip_prefix('i') {
            (1, r)
        } else if let Some(r) = s.strip_prefix('-') {
            (2, r)
        } else if let Some(r) = s.strip_prefix('+') {
            (0, r)
        } else {
            (0, s)
        };
        Ok(PauliString::new(rest.parse()?, phase))
    }
}

pub(crate) fn i_pow(k: u8) -> num_complex::Complex64 {
    use num_complex::Complex64;
    match k % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// Product of two phase-tracked Pauli strings.
pub fn multiply(a: &PauliString, b: &PauliString) -> Result<PauliString> {
    if a.num_qubits() != b.num_qubits() {
        return Err(Error::usage(format!(
            "cannot multiply a {}-qubit string by a {}-qubit string",
            a.num_qubits(),
            b.num_qubits()
        )));
    }
    let (k, word) = a.word.mul_with_phase(&b.word);
    Ok(PauliString::new(word, a.phase_power + b.phase_power + k))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ps(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn single_qubit_products() {
        assert_eq!(multiply(&ps("X"), &ps("Y")).unwrap(), ps("iZ"));
        assert_eq!(multiply(&ps("Y"), &ps("X")).unwrap(), ps("-iZ"));
        assert_eq!(multiply(&ps("Y"), &ps("Y")).unwrap(), ps("I"));
        assert_eq!(multiply(&ps("Z"), &ps("X")).unwrap(), ps("iY"));
        assert_eq!(multiply(&ps("X"), &ps("Z")).unwrap(), ps("-iY"));
    }

    #[test]
    fn identity_is_neutral() {
        let p = ps("-iXYZIZ");
        assert_eq!(multiply(&PauliString::identity(5), &p).unwrap(), p);
        assert_eq!(multiply(&p, &PauliString::identity(5)).unwrap(), p);
    }

    #[test]
    fn length_mismatch_is_usage_error() {
        assert!(matches!(
            multiply(&ps("XX"), &ps("X")),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn words_longer_than_one_lane() {
        let mut w = PauliWord::identity(130);
        w.set(0, PauliLetter::X);
        w.set(64, PauliLetter::Y);
        w.set(129, PauliLetter::Z);
        assert_eq!(w.weight(), 3);
        assert_eq!(w.get(64), PauliLetter::Y);
        let (k, sq) = w.mul_with_phase(&w);
        assert_eq!(k, 0);
        assert!(sq.is_identity());
    }

    #[test]
    fn clifford_images() {
        let cx = Gate::cnot(0, 1);
        assert_eq!(ps("XI").conjugate_clifford(&cx).unwrap(), ps("XX"));
        assert_eq!(ps("IZ").conjugate_clifford(&cx).unwrap(), ps("ZZ"));
        assert_eq!(
            ps("XX").conjugate_clifford(&Gate::cnot(1, 0)).unwrap(),
            ps("IX")
        );
        assert_eq!(ps("X").conjugate_clifford(&Gate::H(0)).unwrap(), ps("Z"));
        assert_eq!(ps("Y").conjugate_clifford(&Gate::H(0)).unwrap(), ps("-Y"));
        assert_eq!(ps("X").conjugate_clifford(&Gate::S(0)).unwrap(), ps("Y"));
        assert_eq!(ps("Y").conjugate_clifford(&Gate::S(0)).unwrap(), ps("-X"));
        assert_eq!(ps("X").conjugate_clifford(&Gate::Sdg(0)).unwrap(), ps("-Y"));
        assert_eq!(ps("XY").conjugate_clifford(&Gate::Cz(0, 1)).unwrap(), ps("-YX"));
    }

    #[test]
    fn toffoli_is_not_clifford() {
        let err = ps("XII")
            .conjugate_clifford(&Gate::toffoli(0, 1, 2))
            .unwrap_err();
        assert!(err.to_string().contains("conjugate_toffoli"));
    }

    #[test]
    fn parse_and_display() {
        assert_eq!(ps("-iXYZ").to_string(), "-iXYZ");
        assert_eq!(ps("XYZ").to_string(), "+XYZ");
        assert!("XQ".parse::<PauliWord>().is_err());
    }
}
