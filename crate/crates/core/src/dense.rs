//! Exact state-vector and density-matrix reference simulator.
//!
//! Qubit 0 is the leftmost tensor factor and the most significant bit of a
//! basis index. Everything here is brute force and meant as the oracle for
//! the Pauli engine, so objects above [`DEFAULT_DENSE_CAP`] qubits are refused.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::pauli::{PauliOperator, PauliString};

pub const DEFAULT_DENSE_CAP: usize = 12;

pub type CMatrix = DMatrix<Complex64>;

const NORM_TOL: f64 = 1e-10;
const BRANCH_EPS: f64 = 1e-14;

fn check_cap(num_qubits: usize, cap: usize) -> Result<()> {
    if num_qubits > cap {
        Err(Error::resource(format!(
            "{num_qubits} qubits exceeds the dense cap of {cap}"
        )))
    } else {
        Ok(())
    }
}

fn bit_of(index: usize, num_qubits: usize, q: usize) -> usize {
    (index >> (num_qubits - 1 - q)) & 1
}

fn mask_of(num_qubits: usize, q: usize) -> usize {
    1 << (num_qubits - 1 - q)
}

fn check_gate(gate: &Gate, num_qubits: usize) -> Result<()> {
    for q in gate.qubits() {
        if q >= num_qubits {
            return Err(Error::usage(format!(
                "{} touches qubit {q} outside a {num_qubits}-qubit register",
                gate.kind_name()
            )));
        }
    }
    Ok(())
}

/// Applies a unitary gate to a column of amplitudes in place.
fn apply_to_amplitudes(amps: &mut [Complex64], num_qubits: usize, gate: &Gate) -> Result<()> {
    check_gate(gate, num_qubits)?;
    let dim = amps.len();
    let i = Complex64::new(0.0, 1.0);
    match *gate {
        Gate::I(_) => {}
        Gate::H(q) => {
            let m = mask_of(num_qubits, q);
            let r = std::f64::consts::FRAC_1_SQRT_2;
            for j in 0..dim {
                if j & m == 0 {
                    let (a, b) = (amps[j], amps[j | m]);
                    amps[j] = (a + b) * r;
                    amps[j | m] = (a - b) * r;
                }
            }
        }
        Gate::S(q) | Gate::Sdg(q) | Gate::Z(q) => {
            let phase = match gate {
                Gate::S(_) => i,
                Gate::Sdg(_) => -i,
                _ => Complex64::new(-1.0, 0.0),
            };
            let m = mask_of(num_qubits, q);
            for (j, a) in amps.iter_mut().enumerate() {
                if j & m != 0 {
                    *a *= phase;
                }
            }
        }
        Gate::X(q) | Gate::Y(q) => {
            let m = mask_of(num_qubits, q);
            for j in 0..dim {
                if j & m == 0 {
                    let (a0, a1) = (amps[j], amps[j | m]);
                    if let Gate::Y(_) = gate {
                        // Y|0> = i|1>, Y|1> = -i|0>
                        amps[j] = -i * a1;
                        amps[j | m] = i * a0;
                    } else {
                        amps[j] = a1;
                        amps[j | m] = a0;
                    }
                }
            }
        }
        Gate::Cnot { control, target } => {
            let (cm, tm) = (mask_of(num_qubits, control), mask_of(num_qubits, target));
            for j in 0..dim {
                if j & cm != 0 && j & tm == 0 {
                    amps.swap(j, j | tm);
                }
            }
        }
        Gate::Cz(a, b) => {
            let m = mask_of(num_qubits, a) | mask_of(num_qubits, b);
            for (j, amp) in amps.iter_mut().enumerate() {
                if j & m == m {
                    *amp = -*amp;
                }
            }
        }
        Gate::Toffoli { controls, target } => {
            let cm = mask_of(num_qubits, controls[0]) | mask_of(num_qubits, controls[1]);
            let tm = mask_of(num_qubits, target);
            for j in 0..dim {
                if j & cm == cm && j & tm == 0 {
                    amps.swap(j, j | tm);
                }
            }
        }
        Gate::MeasureZ { .. } | Gate::Conditioned { .. } => {
            return Err(Error::usage(format!(
                "{} is not unitary; use measure_z or run_branches",
                gate.kind_name()
            )))
        }
    }
    Ok(())
}

/// Dense matrix of a phase-tracked Pauli string.
pub fn pauli_matrix(p: &PauliString, cap: usize) -> Result<CMatrix> {
    let op = PauliOperator::from_terms(
        p.num_qubits(),
        [(p.word().clone(), None, p.phase())],
    )?;
    op.to_dense(cap)
}

/// Matrix of the ordered gate product, rightmost (first) gate applied first.
pub fn build_unitary(circuit: &Circuit, cap: usize) -> Result<CMatrix> {
    if circuit.has_measurements() {
        return Err(Error::usage(
            "build_unitary requires a measurement-free circuit",
        ));
    }
    let n = circuit.num_qubits();
    check_cap(n, cap)?;
    let dim = 1usize << n;
    let mut u = CMatrix::identity(dim, dim);
    for col in 0..dim {
        let mut column: Vec<Complex64> = u.column(col).iter().copied().collect();
        for g in circuit.gates() {
            apply_to_amplitudes(&mut column, n, g)?;
        }
        u.set_column(col, &DVector::from_vec(column));
    }
    Ok(u)
}

/// `‖A − B‖_max`.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amplitudes: DVector<Complex64>,
}

impl StateVector {
    /// `|0…0>`.
    pub fn zero(num_qubits: usize) -> Result<Self> {
        StateVector::basis(num_qubits, 0)
    }

    pub fn basis(num_qubits: usize, index: usize) -> Result<Self> {
        check_cap(num_qubits, DEFAULT_DENSE_CAP)?;
        let dim = 1usize << num_qubits;
        if index >= dim {
            return Err(Error::usage(format!("basis index {index} out of range")));
        }
        let mut amplitudes = DVector::zeros(dim);
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(StateVector {
            num_qubits,
            amplitudes,
        })
    }

    /// Validating constructor; the vector must have length `2^N` and unit norm.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let dim = amplitudes.len();
        if dim == 0 || !dim.is_power_of_two() {
            return Err(Error::usage(format!(
                "amplitude vector length {dim} is not a power of two"
            )));
        }
        let num_qubits = dim.trailing_zeros() as usize;
        check_cap(num_qubits, DEFAULT_DENSE_CAP)?;
        let v = DVector::from_vec(amplitudes);
        if (v.norm_squared() - 1.0).abs() > NORM_TOL {
            return Err(Error::usage(format!(
                "state is not normalized (norm² = {})",
                v.norm_squared()
            )));
        }
        Ok(StateVector {
            num_qubits,
            amplitudes: v,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    pub fn amplitude(&self, index: usize) -> Complex64 {
        self.amplitudes[index]
    }

    pub fn norm_squared(&self) -> f64 {
        self.amplitudes.norm_squared()
    }

    pub fn apply_gate(&self, gate: &Gate) -> Result<StateVector> {
        let mut out = self.clone();
        out.apply_gate_in_place(gate)?;
        Ok(out)
    }

    pub fn apply_gate_in_place(&mut self, gate: &Gate) -> Result<()> {
        apply_to_amplitudes(self.amplitudes.as_mut_slice(), self.num_qubits, gate)
    }

    /// Runs a measurement-free circuit.
    pub fn apply_circuit(&self, circuit: &Circuit) -> Result<StateVector> {
        if circuit.num_qubits() != self.num_qubits {
            return Err(Error::usage("circuit width differs from state width"));
        }
        let mut out = self.clone();
        for g in circuit.gates() {
            out.apply_gate_in_place(g)?;
        }
        Ok(out)
    }

    /// `self ⊗ other`.
    pub fn tensor(&self, other: &StateVector) -> Result<StateVector> {
        check_cap(self.num_qubits + other.num_qubits, DEFAULT_DENSE_CAP)?;
        Ok(StateVector {
            num_qubits: self.num_qubits + other.num_qubits,
            amplitudes: self.amplitudes.kronecker(&other.amplitudes),
        })
    }

    /// `|<self|other>|²`.
    pub fn fidelity(&self, other: &StateVector) -> f64 {
        self.amplitudes.dotc(&other.amplitudes).norm_sqr()
    }

    /// Exhaustive Z-basis measurement of `qubit`. Post-states keep the
    /// measured qubit (collapsed) and are renormalized.
    pub fn measure_z(&self, qubit: usize) -> Result<Vec<(u8, f64, StateVector)>> {
        if qubit >= self.num_qubits {
            return Err(Error::usage(format!("qubit {qubit} out of range")));
        }
        let m = mask_of(self.num_qubits, qubit);
        let mut out = Vec::with_capacity(2);
        for bit in 0..2u8 {
            let mut amps = self.amplitudes.clone();
            for (j, a) in amps.iter_mut().enumerate() {
                if ((j & m != 0) as u8) != bit {
                    *a = Complex64::default();
                }
            }
            let p = amps.norm_squared();
            if p > BRANCH_EPS {
                amps /= Complex64::new(p.sqrt(), 0.0);
                out.push((
                    bit,
                    p,
                    StateVector {
                        num_qubits: self.num_qubits,
                        amplitudes: amps,
                    },
                ));
            }
        }
        Ok(out)
    }

    /// Drops a qubit known to be in basis state `bit`.
    pub fn remove_qubit(&self, qubit: usize, bit: u8) -> Result<StateVector> {
        let n = self.num_qubits;
        if qubit >= n || n == 0 {
            return Err(Error::usage(format!("qubit {qubit} out of range")));
        }
        let dim = 1usize << (n - 1);
        let mut amps = DVector::zeros(dim);
        for j in 0..(1usize << n) {
            if bit_of(j, n, qubit) as u8 == bit {
                let high = j >> (n - qubit);
                let low = j & ((1 << (n - 1 - qubit)) - 1);
                amps[(high << (n - 1 - qubit)) | low] = self.amplitudes[j];
            }
        }
        Ok(StateVector {
            num_qubits: n - 1,
            amplitudes: amps,
        })
    }
}

/// One outcome path through a circuit with mid-circuit measurements.
#[derive(Debug, Clone)]
pub struct Branch {
    pub bits: Vec<u8>,
    pub probability: f64,
    pub state: StateVector,
}

/// Runs `circuit` on `state`, enumerating every measurement branch with
/// nonzero probability. Conditioned gates fire from each branch's own record.
pub fn run_branches(state: &StateVector, circuit: &Circuit) -> Result<Vec<Branch>> {
    if circuit.num_qubits() != state.num_qubits() {
        return Err(Error::usage("circuit width differs from state width"));
    }
    let mut branches = vec![Branch {
        bits: vec![0; circuit.num_classical_bits()],
        probability: 1.0,
        state: state.clone(),
    }];
    for gate in circuit.gates() {
        let mut next = Vec::with_capacity(branches.len());
        for mut b in branches {
            match gate {
                Gate::MeasureZ { qubit, bit } => {
                    for (outcome, p, post) in b.state.measure_z(*qubit)? {
                        let mut bits = b.bits.clone();
                        bits[*bit] = outcome;
                        next.push(Branch {
                            bits,
                            probability: b.probability * p,
                            state: post,
                        });
                    }
                }
                Gate::Conditioned { condition, gate } => {
                    if condition.evaluate(&b.bits)? {
                        b.state.apply_gate_in_place(gate)?;
                    }
                    next.push(b);
                }
                g => {
                    b.state.apply_gate_in_place(g)?;
                    next.push(b);
                }
            }
        }
        branches = next;
    }
    Ok(branches)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    num_qubits: usize,
    matrix: CMatrix,
}

impl DensityMatrix {
    /// Validating constructor: Hermitian and trace 1 within 1e-10, PSD within
    /// an eigenvalue floor of -1e-9.
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let dm = DensityMatrix::from_matrix_unchecked(matrix)?;
        let herm = max_abs_diff(&dm.matrix, &dm.matrix.adjoint());
        if herm > NORM_TOL {
            return Err(Error::usage(format!("matrix is not Hermitian (dev {herm:e})")));
        }
        let tr = dm.matrix.trace();
        if (tr - Complex64::new(1.0, 0.0)).norm() > NORM_TOL {
            return Err(Error::usage(format!("trace is {tr}, expected 1")));
        }
        let min_eig = dm
            .matrix
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        if min_eig < -1e-9 {
            return Err(Error::usage(format!(
                "matrix is not positive semidefinite (min eigenvalue {min_eig:e})"
            )));
        }
        Ok(dm)
    }

    /// Wraps a square `2^N` matrix without checking the density invariants.
    pub fn from_matrix_unchecked(matrix: CMatrix) -> Result<Self> {
        let dim = matrix.nrows();
        if dim == 0 || !dim.is_power_of_two() || matrix.ncols() != dim {
            return Err(Error::usage(format!(
                "expected a square 2^N matrix, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let num_qubits = dim.trailing_zeros() as usize;
        check_cap(num_qubits, DEFAULT_DENSE_CAP)?;
        Ok(DensityMatrix { num_qubits, matrix })
    }

    pub fn from_pure(state: &StateVector) -> DensityMatrix {
        let v = state.amplitudes();
        DensityMatrix {
            num_qubits: state.num_qubits(),
            matrix: v * v.adjoint(),
        }
    }

    pub fn maximally_mixed(num_qubits: usize) -> Result<Self> {
        check_cap(num_qubits, DEFAULT_DENSE_CAP)?;
        let dim = 1usize << num_qubits;
        Ok(DensityMatrix {
            num_qubits,
            matrix: CMatrix::identity(dim, dim) / Complex64::new(dim as f64, 0.0),
        })
    }

    pub fn from_pauli(op: &PauliOperator) -> Result<Self> {
        DensityMatrix::new(op.to_dense(DEFAULT_DENSE_CAP)?)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    pub fn tensor(&self, other: &DensityMatrix) -> Result<DensityMatrix> {
        check_cap(self.num_qubits + other.num_qubits, DEFAULT_DENSE_CAP)?;
        Ok(DensityMatrix {
            num_qubits: self.num_qubits + other.num_qubits,
            matrix: self.matrix.kronecker(&other.matrix),
        })
    }

    /// `G ρ G†` for a unitary gate.
    pub fn apply_gate(&self, gate: &Gate) -> Result<DensityMatrix> {
        let n = self.num_qubits;
        let dim = 1usize << n;
        // G ρ, column by column
        let mut left = self.matrix.clone();
        for c in 0..dim {
            let mut col: Vec<Complex64> = left.column(c).iter().copied().collect();
            apply_to_amplitudes(&mut col, n, gate)?;
            left.set_column(c, &DVector::from_vec(col));
        }
        // (G (Gρ)†)† = G ρ G†
        let mut right = left.adjoint();
        for c in 0..dim {
            let mut col: Vec<Complex64> = right.column(c).iter().copied().collect();
            apply_to_amplitudes(&mut col, n, gate)?;
            right.set_column(c, &DVector::from_vec(col));
        }
        Ok(DensityMatrix {
            num_qubits: n,
            matrix: right.adjoint(),
        })
    }

    /// Exhaustive Z-basis measurement; post-states keep the collapsed qubit.
    pub fn measure_z(&self, qubit: usize) -> Result<Vec<(u8, f64, DensityMatrix)>> {
        let n = self.num_qubits;
        if qubit >= n {
            return Err(Error::usage(format!("qubit {qubit} out of range")));
        }
        let dim = 1usize << n;
        let mut out = Vec::with_capacity(2);
        for bit in 0..2usize {
            let mut m = self.matrix.clone();
            for r in 0..dim {
                for c in 0..dim {
                    if bit_of(r, n, qubit) != bit || bit_of(c, n, qubit) != bit {
                        m[(r, c)] = Complex64::default();
                    }
                }
            }
            let p = m.trace().re;
            if p > BRANCH_EPS {
                out.push((
                    bit as u8,
                    p,
                    DensityMatrix {
                        num_qubits: n,
                        matrix: m / Complex64::new(p, 0.0),
                    },
                ));
            }
        }
        Ok(out)
    }

    /// Traces out the qubits in `traced`; the rest keep their relative order.
    pub fn partial_trace(&self, traced: &[usize]) -> Result<DensityMatrix> {
        let n = self.num_qubits;
        if let Some(&q) = traced.iter().find(|&&q| q >= n) {
            return Err(Error::usage(format!("cannot trace qubit {q} of {n}")));
        }
        let keep: Vec<usize> = (0..n).filter(|q| !traced.contains(q)).collect();
        let gone: Vec<usize> = (0..n).filter(|q| traced.contains(q)).collect();
        let (nk, ng) = (keep.len(), gone.len());
        let compose = |kept: usize, env: usize| -> usize {
            let mut idx = 0usize;
            for (i, &q) in keep.iter().enumerate() {
                if (kept >> (nk - 1 - i)) & 1 == 1 {
                    idx |= mask_of(n, q);
                }
            }
            for (i, &q) in gone.iter().enumerate() {
                if (env >> (ng - 1 - i)) & 1 == 1 {
                    idx |= mask_of(n, q);
                }
            }
            idx
        };
        let dk = 1usize << nk;
        let mut out = CMatrix::zeros(dk, dk);
        for r in 0..dk {
            for c in 0..dk {
                let mut acc = Complex64::default();
                for e in 0..(1usize << ng) {
                    acc += self.matrix[(compose(r, e), compose(c, e))];
                }
                out[(r, c)] = acc;
            }
        }
        Ok(DensityMatrix {
            num_qubits: nk,
            matrix: out,
        })
    }

    /// `<ψ|ρ|ψ>`.
    pub fn fidelity_with_pure(&self, psi: &StateVector) -> f64 {
        let v = psi.amplitudes();
        (v.adjoint() * &self.matrix * v)[(0, 0)].re
    }
}

/// `½ ‖a − b‖₁` from the eigenvalues of the Hermitian difference.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    if a.num_qubits != b.num_qubits {
        return Err(Error::usage(format!(
            "dimension mismatch: {} vs {} qubits",
            a.num_qubits, b.num_qubits
        )));
    }
    let diff = &a.matrix - &b.matrix;
    let sum: f64 = diff.symmetric_eigenvalues().iter().map(|e| e.abs()).sum();
    Ok(0.5 * sum)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cx(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn hadamard_on_zero() {
        let s = StateVector::zero(1).unwrap().apply_gate(&Gate::H(0)).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((s.amplitude(0) - cx(r, 0.0)).norm() < 1e-15);
        assert!((s.amplitude(1) - cx(r, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn toffoli_flips_target_on_11() {
        let s = StateVector::basis(3, 0b110).unwrap();
        let out = s.apply_gate(&Gate::toffoli(0, 1, 2)).unwrap();
        assert!((out.amplitude(0b111) - cx(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn cnot_on_10() {
        let s = StateVector::basis(2, 0b10).unwrap();
        let out = s.apply_gate(&Gate::cnot(0, 1)).unwrap();
        assert!((out.amplitude(0b11) - cx(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn out_of_range_gate_is_usage_error() {
        let s = StateVector::zero(2).unwrap();
        assert!(matches!(s.apply_gate(&Gate::H(2)), Err(Error::Usage(_))));
    }

    #[test]
    fn empty_circuit_is_identity() {
        let u = build_unitary(&Circuit::new(3), DEFAULT_DENSE_CAP).unwrap();
        assert!(max_abs_diff(&u, &CMatrix::identity(8, 8)) < 1e-15);
    }

    #[test]
    fn build_unitary_rejects_measurement_and_cap() {
        let mut c = Circuit::new(1);
        c.push(Gate::measure(0, 0)).unwrap();
        assert!(matches!(build_unitary(&c, 12), Err(Error::Usage(_))));
        assert!(matches!(
            build_unitary(&Circuit::new(13), 12),
            Err(Error::Resource(_))
        ));
    }

    #[test]
    fn bell_state_marginals() {
        let bell = StateVector::from_amplitudes(vec![
            cx(std::f64::consts::FRAC_1_SQRT_2, 0.0),
            cx(0.0, 0.0),
            cx(0.0, 0.0),
            cx(std::f64::consts::FRAC_1_SQRT_2, 0.0),
        ])
        .unwrap();
        let rho = DensityMatrix::from_pure(&bell);
        let half = DensityMatrix::maximally_mixed(1).unwrap();
        for q in 0..2 {
            let red = rho.partial_trace(&[q]).unwrap();
            assert!(max_abs_diff(red.matrix(), half.matrix()) < 1e-15);
        }
        let same = rho.partial_trace(&[]).unwrap();
        assert!(max_abs_diff(same.matrix(), rho.matrix()) < 1e-15);
    }

    #[test]
    fn product_state_partial_trace() {
        let zero = DensityMatrix::from_pure(&StateVector::zero(1).unwrap());
        let rho = zero
            .tensor(&DensityMatrix::maximally_mixed(1).unwrap())
            .unwrap();
        let red = rho.partial_trace(&[1]).unwrap();
        assert!(max_abs_diff(red.matrix(), zero.matrix()) < 1e-15);
    }

    #[test]
    fn trace_distance_examples() {
        let zero = DensityMatrix::from_pure(&StateVector::basis(1, 0).unwrap());
        let one = DensityMatrix::from_pure(&StateVector::basis(1, 1).unwrap());
        let plus = DensityMatrix::from_pure(
            &StateVector::zero(1).unwrap().apply_gate(&Gate::H(0)).unwrap(),
        );
        assert!(trace_distance(&zero, &zero).unwrap().abs() < 1e-12);
        assert!((trace_distance(&zero, &one).unwrap() - 1.0).abs() < 1e-12);
        // difference [[1/2,-1/2],[-1/2,-1/2]] has eigenvalues ±√2/2
        let expected = 0.5 * (2.0 * (0.5f64.powi(2) * 2.0).sqrt());
        assert!((trace_distance(&zero, &plus).unwrap() - expected).abs() < 1e-12);
        assert!((expected - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        let two = DensityMatrix::maximally_mixed(2).unwrap();
        assert!(matches!(trace_distance(&zero, &two), Err(Error::Usage(_))));
    }

    #[test]
    fn measure_examples() {
        let zero = StateVector::zero(1).unwrap();
        let branches = zero.measure_z(0).unwrap();
        assert_eq!(branches.len(), 1);
        assert_eq!(branches[0].0, 0);
        assert!((branches[0].1 - 1.0).abs() < 1e-15);

        let plus = zero.apply_gate(&Gate::H(0)).unwrap();
        let branches = plus.measure_z(0).unwrap();
        assert_eq!(branches.len(), 2);
        for (bit, p, post) in &branches {
            assert!((p - 0.5).abs() < 1e-15);
            assert!((post.amplitude(*bit as usize).norm() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn remove_qubit_keeps_order() {
        // |1>|0>|1> with qubit 1 removed -> |11>
        let s = StateVector::basis(3, 0b101).unwrap();
        let r = s.remove_qubit(1, 0).unwrap();
        assert!((r.amplitude(0b11) - cx(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn density_validation() {
        let bad = CMatrix::from_diagonal_element(2, 2, cx(0.6, 0.0));
        assert!(DensityMatrix::new(bad).is_err());
        let neg = CMatrix::from_diagonal(&DVector::from_vec(vec![cx(1.5, 0.0), cx(-0.5, 0.0)]));
        assert!(DensityMatrix::new(neg).is_err());
        assert!(DensityMatrix::new(CMatrix::identity(2, 2) * cx(0.5, 0.0)).is_ok());
    }
}
