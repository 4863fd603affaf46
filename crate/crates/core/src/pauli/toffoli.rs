//! Conjugation table for the Toffoli gate on its three local qubits.
//!
//! `U_T = I - (I - Z1)(I - Z2)(I - X3)/4`, an 8-term real combination of
//! Pauli strings, so `U_T P U_T` expands into at most 8 strings for every
//! local Pauli `P`.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use num_complex::Complex64;

use super::{multiply, PauliLetter, PauliString, PauliWord};

pub(crate) type LocalImage = Vec<(Complex64, [PauliLetter; 3])>;

fn letter_index(l: PauliLetter) -> usize {
    match l {
        PauliLetter::I => 0,
        PauliLetter::X => 1,
        PauliLetter::Y => 2,
        PauliLetter::Z => 3,
    }
}

pub(crate) fn local_index(letters: [PauliLetter; 3]) -> usize {
    letter_index(letters[0]) * 16 + letter_index(letters[1]) * 4 + letter_index(letters[2])
}

fn toffoli_expansion() -> Vec<(f64, PauliString)> {
    [
        (0.75, "III"),
        (0.25, "ZII"),
        (0.25, "IZI"),
        (-0.25, "ZZI"),
        (0.25, "IIX"),
        (-0.25, "ZIX"),
        (-0.25, "IZX"),
        (0.25, "ZZX"),
    ]
    .into_iter()
    .map(|(c, s)| (c, s.parse().expect("static Pauli string")))
    .collect()
}

fn build_table() -> Vec<LocalImage> {
    let expansion = toffoli_expansion();
    let mut table = vec![Vec::new(); 64];
    for a in PauliLetter::ALL {
        for b in PauliLetter::ALL {
            for c in PauliLetter::ALL {
                let p = PauliString::new(PauliWord::from_letters(&[a, b, c]), 0);
                let mut acc: BTreeMap<PauliWord, Complex64> = BTreeMap::new();
                for (cj, qj) in &expansion {
                    let left = multiply(qj, &p).expect("same width");
                    for (ck, qk) in &expansion {
                        let prod = multiply(&left, qk).expect("same width");
                        *acc.entry(prod.word().clone()).or_default() +=
                            prod.phase() * (cj * ck);
                    }
                }
                let image: LocalImage = acc
                    .into_iter()
                    .filter(|(_, v)| v.norm() > 1e-12)
                    .map(|(w, v)| {
                        let l: Vec<PauliLetter> = w.letters().collect();
                        (v, [l[0], l[1], l[2]])
                    })
                    .collect();
                table[local_index([a, b, c])] = image;
            }
        }
    }
    table
}

pub(crate) fn table() -> &'static [LocalImage] {
    static TABLE: OnceLock<Vec<LocalImage>> = OnceLock::new();
    TABLE.get_or_init(build_table)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_image_has_at_most_eight_terms() {
        for image in table() {
            assert!(!image.is_empty() && image.len() <= 8);
        }
    }

    #[test]
    fn target_x_is_fixed() {
        let image = &table()[local_index([PauliLetter::I, PauliLetter::I, PauliLetter::X])];
        assert_eq!(image.len(), 1);
        assert!((image[0].0 - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    }
}
