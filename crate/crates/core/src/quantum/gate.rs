use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

use super::pauli::Pauli;
use super::C64;

/// Rotation angle of level `level`: `π / 2^level`.
pub fn theta(level: u32) -> f64 {
    PI / 2f64.powi(level as i32)
}

/// A dense unitary acting on an ordered list of qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    unitary: DMatrix<C64>,
    support: Vec<usize>,
}

/// Largest entrywise deviation of `U·U†` from the identity.
pub fn unitarity_deviation(u: &DMatrix<C64>) -> f64 {
    let prod = u * u.adjoint();
    let id = DMatrix::<C64>::identity(u.nrows(), u.ncols());
    max_abs_diff(&prod, &id)
}

pub fn max_abs_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Entrywise distance between `U` and `V` after removing the best global phase.
///
/// The phase is chosen as the argument of `tr(U†V)`; the result is the largest
/// entry of `|U†V − e^{iφ} I|`.
pub fn phase_insensitive_distance(u: &DMatrix<C64>, v: &DMatrix<C64>) -> f64 {
    let w = u.adjoint() * v;
    let tr = w.trace();
    let phase = if tr.norm() > 1e-300 { tr / tr.norm() } else { C64::new(1.0, 0.0) };
    let target = DMatrix::<C64>::identity(w.nrows(), w.ncols()) * phase;
    max_abs_diff(&w, &target)
}

/// Entrywise distance between two operators of equal shape after aligning global phase.
///
/// Unlike [`phase_insensitive_distance`] neither operand needs to be unitary.
pub fn phase_aligned_distance(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    let overlap = (a.adjoint() * b).trace();
    let phase = if overlap.norm() > 1e-300 { overlap / overlap.norm() } else { C64::new(1.0, 0.0) };
    max_abs_diff(b, &(a * phase))
}

impl Gate {
    pub fn new(unitary: DMatrix<C64>, support: Vec<usize>) -> Result<Self> {
        let dim = 1usize << support.len();
        if unitary.nrows() != dim || unitary.ncols() != dim {
            return Err(Error::DimensionMismatch { left: unitary.nrows(), right: dim });
        }
        let mut sorted = support.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != support.len() {
            return Err(Error::InvalidArgument(format!("repeated qubit in support {support:?}")));
        }
        let deviation = unitarity_deviation(&unitary);
        if deviation > 1e-12 {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(Self { unitary, support })
    }

    fn single(m: DMatrix<C64>, qubit: usize) -> Self {
        Self { unitary: m, support: vec![qubit] }
    }

    pub fn unitary(&self) -> &DMatrix<C64> {
        &self.unitary
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    /// Same unitary on a different ordered support.
    pub fn on(&self, support: &[usize]) -> Result<Self> {
        Self::new(self.unitary.clone(), support.to_vec())
    }

    pub fn adjoint(&self) -> Self {
        Self { unitary: self.unitary.adjoint(), support: self.support.clone() }
    }

    pub fn pauli(p: Pauli, qubit: usize) -> Self {
        Self::single(p.matrix(), qubit)
    }

    pub fn x(qubit: usize) -> Self {
        Self::pauli(Pauli::X, qubit)
    }

    pub fn y(qubit: usize) -> Self {
        Self::pauli(Pauli::Y, qubit)
    }

    /// `iY`, the Hermiticity-preserving form of a Y flip on a Hermitian gate.
    pub fn iy(qubit: usize) -> Self {
        Self::single(Pauli::Y.matrix() * C64::new(0.0, 1.0), qubit)
    }

    pub fn z(qubit: usize) -> Self {
        Self::pauli(Pauli::Z, qubit)
    }

    pub fn hadamard(qubit: usize) -> Self {
        let s = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Self::single(DMatrix::from_row_slice(2, 2, &[s, s, s, -s]), qubit)
    }

    /// `exp(iθY)` on `qubit`.
    pub fn rot_y(theta: f64, qubit: usize) -> Self {
        let (s, c) = theta.sin_cos();
        let m = DMatrix::from_row_slice(
            2,
            2,
            &[C64::new(c, 0.0), C64::new(s, 0.0), C64::new(-s, 0.0), C64::new(c, 0.0)],
        );
        Self::single(m, qubit)
    }

    /// `R_level = exp(iπY/2^level)`.
    pub fn r(level: u32, qubit: usize) -> Self {
        Self::rot_y(theta(level), qubit)
    }

    /// `H_level = R_{level-1} X`, Hermitian and unitary.
    pub fn h_level(level: u32, qubit: usize) -> Self {
        let m = Self::r(level - 1, qubit).unitary * Pauli::X.matrix();
        Self::single(m, qubit)
    }

    pub fn cx(control: usize, target: usize) -> Self {
        let o = C64::new(0.0, 0.0);
        let l = C64::new(1.0, 0.0);
        #[rustfmt::skip]
        let m = DMatrix::from_row_slice(4, 4, &[
            l, o, o, o,
            o, l, o, o,
            o, o, o, l,
            o, o, l, o,
        ]);
        Self { unitary: m, support: vec![control, target] }
    }

    /// `exp(iθP)` for a Pauli string `P` given as a dense Hermitian involution.
    pub fn pauli_exp(theta: f64, pauli: &DMatrix<C64>, support: Vec<usize>) -> Result<Self> {
        let id = DMatrix::<C64>::identity(pauli.nrows(), pauli.ncols());
        let m = id * C64::new(theta.cos(), 0.0) + pauli * C64::new(0.0, theta.sin());
        Self::new(m, support)
    }

    fn check_width(&self, n: usize) -> Result<()> {
        match self.support.iter().find(|&&q| q >= n) {
            Some(&qubit) => Err(Error::QubitOutOfRange { qubit, width: n }),
            None => Ok(()),
        }
    }

    /// The full `2^n × 2^n` unitary.
    pub fn embed(&self, n: usize) -> Result<DMatrix<C64>> {
        self.check_width(n)?;
        let dim = 1usize << n;
        let mut m = DMatrix::<C64>::identity(dim, dim);
        self.apply_to_columns(&mut m, n)?;
        Ok(m)
    }

    /// Applies the gate to every column of `block`, each a `2^n` state vector.
    pub fn apply_to_columns(&self, block: &mut DMatrix<C64>, n: usize) -> Result<()> {
        apply_matrix_to_columns(&self.unitary, &self.support, block, n)
    }

    /// Applies the gate in place to a single state vector.
    pub fn apply_to_vector(&self, state: &mut [C64], n: usize) -> Result<()> {
        self.check_width(n)?;
        if state.len() != 1usize << n {
            return Err(Error::DimensionMismatch { left: state.len(), right: 1 << n });
        }
        LocalPlan::new(&self.support, n).apply(&self.unitary, state);
        Ok(())
    }
}

/// Applies an arbitrary `2^k × 2^k` matrix on `support` to every column of `block`.
pub fn apply_matrix_to_columns(m: &DMatrix<C64>, support: &[usize], block: &mut DMatrix<C64>, n: usize) -> Result<()> {
    if let Some(&qubit) = support.iter().find(|&&q| q >= n) {
        return Err(Error::QubitOutOfRange { qubit, width: n });
    }
    if m.nrows() != 1usize << support.len() {
        return Err(Error::DimensionMismatch { left: m.nrows(), right: 1 << support.len() });
    }
    if block.nrows() != 1usize << n {
        return Err(Error::DimensionMismatch { left: block.nrows(), right: 1 << n });
    }
    let plan = LocalPlan::new(support, n);
    for mut col in block.column_iter_mut() {
        plan.apply(m, col.as_mut_slice());
    }
    Ok(())
}

/// A matrix bound to a support inside a fixed-width register, ready for repeated use.
#[derive(Debug, Clone)]
pub struct LocalOp {
    matrix: DMatrix<C64>,
    plan: LocalPlan,
    n: usize,
}

impl LocalOp {
    pub fn new(matrix: DMatrix<C64>, support: &[usize], n: usize) -> Result<Self> {
        if let Some(&qubit) = support.iter().find(|&&q| q >= n) {
            return Err(Error::QubitOutOfRange { qubit, width: n });
        }
        if matrix.nrows() != 1usize << support.len() || matrix.ncols() != matrix.nrows() {
            return Err(Error::DimensionMismatch { left: matrix.nrows(), right: 1 << support.len() });
        }
        Ok(Self { plan: LocalPlan::new(support, n), matrix, n })
    }

    pub fn from_gate(gate: &Gate, n: usize) -> Result<Self> {
        Self::new(gate.unitary.clone(), &gate.support, n)
    }

    /// Applies the operator to every column; panics if the row count is not `2^n`.
    pub fn apply_columns(&self, block: &mut DMatrix<C64>) {
        assert_eq!(block.nrows(), 1usize << self.n, "block height does not match register width");
        for mut col in block.column_iter_mut() {
            self.plan.apply(&self.matrix, col.as_mut_slice());
        }
    }
}

/// Precomputed index arithmetic for applying a k-qubit matrix inside an n-qubit vector.
#[derive(Debug, Clone)]
struct LocalPlan {
    offsets: Vec<usize>,
    bases: Vec<usize>,
}

impl LocalPlan {
    fn new(support: &[usize], n: usize) -> Self {
        let k = support.len();
        let bit_of = |q: usize| 1usize << (n - 1 - q);
        let offsets: Vec<usize> = (0..1usize << k)
            .map(|j| {
                (0..k).filter(|b| j & (1 << (k - 1 - b)) != 0).map(|b| bit_of(support[b])).sum()
            })
            .collect();
        let mask: usize = support.iter().map(|&q| bit_of(q)).sum();
        let bases = (0..1usize << n).filter(|i| i & mask == 0).collect();
        Self { offsets, bases }
    }

    fn apply(&self, u: &DMatrix<C64>, data: &mut [C64]) {
        let d = self.offsets.len();
        let mut buf = vec![C64::new(0.0, 0.0); d];
        for &base in &self.bases {
            for (j, off) in self.offsets.iter().enumerate() {
                buf[j] = data[base + off];
            }
            for r in 0..d {
                let mut acc = C64::new(0.0, 0.0);
                for (j, b) in buf.iter().enumerate() {
                    acc += u[(r, j)] * b;
                }
                data[base + self.offsets[r]] = acc;
            }
        }
    }
}

/// `exp(iθY)` as a single-qubit gate on qubit 0.
pub fn rot_y(theta: f64) -> Gate {
    Gate::rot_y(theta, 0)
}
