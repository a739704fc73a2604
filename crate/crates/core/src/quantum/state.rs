use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

use super::gate::{max_abs_diff, Gate};
use super::pauli::Pauli;
use super::C64;

/// Tolerance used for the Hermiticity / positivity / trace checks.
pub const STATE_TOL: f64 = 1e-12;

/// `|M_level⟩ = R_level |+⟩`.
pub fn magic_state(level: u32) -> DVector<C64> {
    let (s, c) = super::gate::theta(level).sin_cos();
    let k = std::f64::consts::FRAC_1_SQRT_2;
    DVector::from_vec(vec![C64::new(k * (c + s), 0.0), C64::new(k * (c - s), 0.0)])
}

/// `|M̄_level⟩ = R_level |−⟩`, orthogonal to [`magic_state`].
pub fn magic_state_bar(level: u32) -> DVector<C64> {
    let (s, c) = super::gate::theta(level).sin_cos();
    let k = std::f64::consts::FRAC_1_SQRT_2;
    DVector::from_vec(vec![C64::new(k * (c - s), 0.0), C64::new(-k * (s + c), 0.0)])
}

pub fn plus_state() -> DVector<C64> {
    let k = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    DVector::from_vec(vec![k, k])
}

pub fn zero_state() -> DVector<C64> {
    DVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)])
}

pub fn basis_state(n: usize, index: usize) -> DVector<C64> {
    let mut v = DVector::zeros(1 << n);
    v[index] = C64::new(1.0, 0.0);
    v
}

/// A subnormalized density operator on `n` qubits.
///
/// Postselection does not renormalize, so the trace of a state that has been
/// through a postselected measurement is the acceptance probability.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    matrix: DMatrix<C64>,
    n: usize,
}

impl DensityOperator {
    /// Validates Hermiticity, positivity and `0 < tr ≤ 1`, all to [`STATE_TOL`].
    pub fn new(matrix: DMatrix<C64>) -> Result<Self> {
        let state = Self::from_matrix_unchecked(matrix)?;
        state.validate()?;
        Ok(state)
    }

    /// Only checks the shape; used for intermediate, possibly zero-trace results.
    pub fn from_matrix_unchecked(matrix: DMatrix<C64>) -> Result<Self> {
        let dim = matrix.nrows();
        if dim != matrix.ncols() || !dim.is_power_of_two() || dim < 2 {
            return Err(Error::InvalidState(format!("{}x{} is not a qubit operator", dim, matrix.ncols())));
        }
        Ok(Self { n: dim.trailing_zeros() as usize, matrix })
    }

    pub fn validate(&self) -> Result<()> {
        let herm = max_abs_diff(&self.matrix, &self.matrix.adjoint());
        if herm > STATE_TOL {
            return Err(Error::InvalidState(format!("not Hermitian (deviation {herm:e})")));
        }
        let tr = self.trace();
        if tr <= 0.0 || tr > 1.0 + STATE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} outside (0, 1]")));
        }
        let min = self.eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min);
        if min < -STATE_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
        }
        Ok(())
    }

    pub fn from_pure(psi: &DVector<C64>) -> Result<Self> {
        Self::new(psi * psi.adjoint())
    }

    /// `(1−ε)|M_ℓ⟩⟨M_ℓ| + ε|M̄_ℓ⟩⟨M̄_ℓ|`.
    pub fn noisy_magic(level: u32, eps: f64) -> Self {
        let m = magic_state(level);
        let mb = magic_state_bar(level);
        let matrix = &m * m.adjoint() * C64::new(1.0 - eps, 0.0) + &mb * mb.adjoint() * C64::new(eps, 0.0);
        Self { matrix, n: 1 }
    }

    pub fn maximally_mixed(n: usize) -> Self {
        let dim = 1usize << n;
        Self { matrix: DMatrix::identity(dim, dim) / C64::new(dim as f64, 0.0), n }
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    pub fn width(&self) -> usize {
        self.n
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.matrix)
    }

    pub fn normalized(&self) -> Result<Self> {
        let tr = self.trace();
        if tr <= 0.0 {
            return Err(Error::ZeroAcceptance(tr));
        }
        Ok(Self { matrix: &self.matrix / C64::new(tr, 0.0), n: self.n })
    }

    pub fn tensor(&self, other: &DensityOperator) -> Self {
        Self { matrix: self.matrix.kronecker(&other.matrix), n: self.n + other.n }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { matrix: &self.matrix * C64::new(factor, 0.0), n: self.n }
    }

    pub fn add(&self, other: &DensityOperator) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch { left: self.n, right: other.n });
        }
        Ok(Self { matrix: &self.matrix + &other.matrix, n: self.n })
    }

    /// `U ρ U†` with `U` acting on the gate's support.
    pub fn apply_gate(&self, gate: &Gate) -> Result<Self> {
        let mut a = self.matrix.clone();
        gate.apply_to_columns(&mut a, self.n)?;
        let mut b = a.adjoint();
        gate.apply_to_columns(&mut b, self.n)?;
        Ok(Self { matrix: b.adjoint(), n: self.n })
    }

    /// `Σ_k K_k ρ K_k†` for Kraus operators sharing one support.
    pub fn apply_kraus(&self, kraus: &[DMatrix<C64>], support: &[usize]) -> Result<Self> {
        let mut acc = DMatrix::<C64>::zeros(self.matrix.nrows(), self.matrix.ncols());
        for k in kraus {
            let g = KrausTerm::new(k.clone(), support.to_vec());
            let mut a = self.matrix.clone();
            g.apply_to_columns(&mut a, self.n)?;
            let mut b = a.adjoint();
            g.apply_to_columns(&mut b, self.n)?;
            acc += b.adjoint();
        }
        Ok(Self { matrix: acc, n: self.n })
    }

    /// `(1−p) ρ + p P ρ P` for a single-qubit Pauli `P`.
    pub fn pauli_flip(&self, qubit: usize, p: Pauli, prob: f64) -> Result<Self> {
        let flipped = self.apply_gate(&Gate::pauli(p, qubit))?;
        Ok(Self { matrix: &self.matrix * C64::new(1.0 - prob, 0.0) + flipped.matrix * C64::new(prob, 0.0), n: self.n })
    }

    /// Projects `qubit` onto the `outcome` eigenspace of `observable` without renormalizing.
    pub fn postselect(&self, qubit: usize, observable: Pauli, outcome: i8) -> Result<Self> {
        if observable == Pauli::I {
            return Err(Error::InvalidArgument("postselection needs X, Y or Z".into()));
        }
        if outcome != 1 && outcome != -1 {
            return Err(Error::InvalidArgument(format!("outcome must be ±1, got {outcome}")));
        }
        let sign = C64::new(outcome as f64, 0.0);
        let proj = (DMatrix::<C64>::identity(2, 2) + observable.matrix() * sign) * C64::new(0.5, 0.0);
        self.apply_kraus(&[proj], &[qubit])
    }

    /// Traces out `qubit`.
    pub fn partial_trace(&self, qubit: usize) -> Result<Self> {
        if self.n < 2 {
            return Err(Error::InvalidArgument("partial trace needs at least two qubits".into()));
        }
        if qubit >= self.n {
            return Err(Error::QubitOutOfRange { qubit, width: self.n });
        }
        let n = self.n;
        let bit = 1usize << (n - 1 - qubit);
        let low = bit - 1;
        let squeeze = |i: usize| ((i >> 1) & !low) | (i & low);
        let dim = 1usize << (n - 1);
        let mut out = DMatrix::<C64>::zeros(dim, dim);
        for r in (0..1usize << n).filter(|r| r & bit == 0) {
            for c in (0..1usize << n).filter(|c| c & bit == 0) {
                out[(squeeze(r), squeeze(c))] = self.matrix[(r, c)] + self.matrix[(r | bit, c | bit)];
            }
        }
        Ok(Self { matrix: out, n: n - 1 })
    }

    /// Traces out everything except `keep`.
    pub fn reduce_to(&self, keep: usize) -> Result<Self> {
        if keep >= self.n {
            return Err(Error::QubitOutOfRange { qubit: keep, width: self.n });
        }
        let mut out = self.clone();
        for q in (0..self.n).rev().filter(|&q| q != keep) {
            out = out.partial_trace(q)?;
        }
        Ok(out)
    }

    /// `½ ‖ρ − σ‖₁`.
    pub fn trace_distance(&self, other: &DensityOperator) -> Result<f64> {
        trace_distance(self, other)
    }

    /// `1 − ⟨ψ|ρ|ψ⟩`.
    pub fn diagonal_error(&self, psi: &DVector<C64>) -> f64 {
        diagonal_error(self, psi)
    }
}

/// Shares the local-application code path of [`Gate`] for non-unitary Kraus terms.
struct KrausTerm {
    matrix: DMatrix<C64>,
    support: Vec<usize>,
}

impl KrausTerm {
    fn new(matrix: DMatrix<C64>, support: Vec<usize>) -> Self {
        Self { matrix, support }
    }

    fn apply_to_columns(&self, block: &mut DMatrix<C64>, n: usize) -> Result<()> {
        super::gate::apply_matrix_to_columns(&self.matrix, &self.support, block, n)
    }
}

pub fn hermitian_eigenvalues(m: &DMatrix<C64>) -> Vec<f64> {
    // symmetrize first so roundoff asymmetry does not leak into the spectrum
    let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
    h.symmetric_eigenvalues().iter().cloned().collect()
}

/// `½ ‖ρ − σ‖₁` for two normalized states of equal width.
pub fn trace_distance(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    if rho.n != sigma.n {
        return Err(Error::DimensionMismatch { left: rho.n, right: sigma.n });
    }
    let diff = &rho.matrix - &sigma.matrix;
    Ok(0.5 * hermitian_eigenvalues(&diff).iter().map(|e| e.abs()).sum::<f64>())
}

/// `1 − ⟨ψ|ρ|ψ⟩`.
pub fn diagonal_error(rho: &DensityOperator, psi: &DVector<C64>) -> f64 {
    let v = &rho.matrix * psi;
    1.0 - psi.dotc(&v).re
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::gate::theta;

    fn pure(v: DVector<C64>) -> DensityOperator {
        DensityOperator::from_pure(&v).unwrap()
    }

    #[test]
    fn identity_gate_leaves_state_unchanged() {
        let rho = DensityOperator::noisy_magic(4, 0.1).tensor(&pure(plus_state()));
        let id = Gate::new(DMatrix::identity(2, 2), vec![1]).unwrap();
        assert!(max_abs_diff(rho.apply_gate(&id).unwrap().matrix(), rho.matrix()) < 1e-15);
    }

    #[test]
    fn cx_truth_table() {
        let rho = pure(basis_state(2, 0b10));
        let out = rho.apply_gate(&Gate::cx(0, 1)).unwrap();
        assert!(max_abs_diff(out.matrix(), pure(basis_state(2, 0b11)).matrix()) < 1e-15);
    }

    #[test]
    fn y_maps_magic_to_its_partner() {
        for level in 3..=8 {
            let out = pure(magic_state(level)).apply_gate(&Gate::y(0)).unwrap();
            assert!(max_abs_diff(out.matrix(), pure(magic_state_bar(level)).matrix()) < 1e-14);
        }
    }

    #[test]
    fn magic_states_are_eigenstates_of_h_level() {
        for level in 3..=12 {
            let h = Gate::h_level(level, 0);
            let m = magic_state(level);
            let mb = magic_state_bar(level);
            assert!((h.unitary() * &m - &m).norm() < 1e-12);
            assert!((h.unitary() * &mb + &mb).norm() < 1e-12);
            assert!(m.dotc(&mb).norm() < 1e-15);
        }
    }

    #[test]
    fn postselect_examples() {
        let plus = pure(plus_state());
        let px = plus.postselect(0, Pauli::X, 1).unwrap();
        assert!((px.trace() - 1.0).abs() < 1e-15);
        assert!(max_abs_diff(px.matrix(), plus.matrix()) < 1e-15);

        let pz = plus.postselect(0, Pauli::Z, 1).unwrap();
        assert!((pz.trace() - 0.5).abs() < 1e-15);
        assert!((pz.matrix()[(0, 0)].re - 0.5).abs() < 1e-15);

        let zero = pure(zero_state());
        assert!(zero.postselect(0, Pauli::Z, -1).unwrap().trace().abs() < 1e-15);
        assert!(zero.postselect(0, Pauli::I, 1).is_err());
    }

    #[test]
    fn postselect_outcomes_sum_to_trace() {
        let rho = DensityOperator::noisy_magic(5, 0.2).tensor(&DensityOperator::noisy_magic(3, 0.05));
        for obs in [Pauli::X, Pauli::Y, Pauli::Z] {
            for q in 0..2 {
                let a = rho.postselect(q, obs, 1).unwrap().trace();
                let b = rho.postselect(q, obs, -1).unwrap().trace();
                assert!((a + b - rho.trace()).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn partial_trace_of_product_and_bell() {
        let a = DensityOperator::noisy_magic(4, 0.1);
        let b = pure(plus_state()).scaled(0.5);
        let prod = a.tensor(&b);
        let reduced = prod.partial_trace(1).unwrap();
        assert!(max_abs_diff(reduced.matrix(), a.scaled(0.5).matrix()) < 1e-15);

        let k = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let bell = pure(DVector::from_vec(vec![k, C64::new(0.0, 0.0), C64::new(0.0, 0.0), k]));
        for q in 0..2 {
            let r = bell.partial_trace(q).unwrap();
            assert!(max_abs_diff(r.matrix(), DensityOperator::maximally_mixed(1).matrix()) < 1e-15);
            assert!((r.trace() - 1.0).abs() < 1e-15);
        }
        assert!(a.partial_trace(0).is_err());
        assert!(prod.partial_trace(2).is_err());
    }

    #[test]
    fn trace_distance_examples() {
        let rho = DensityOperator::noisy_magic(5, 0.3);
        assert!(rho.trace_distance(&rho).unwrap().abs() < 1e-15);
        for level in 3..=10 {
            let m = pure(magic_state(level));
            let mb = pure(magic_state_bar(level));
            assert!((m.trace_distance(&mb).unwrap() - 1.0).abs() < 1e-12);
            let plus = pure(plus_state());
            let d = plus.trace_distance(&m).unwrap();
            assert!((d - theta(level).sin().abs()).abs() < 1e-12);
        }
        assert!(rho.trace_distance(&DensityOperator::maximally_mixed(2)).is_err());
    }

    #[test]
    fn diagonal_error_examples() {
        for level in 3..=9 {
            let m = magic_state(level);
            assert!(pure(m.clone()).diagonal_error(&m).abs() < 1e-15);
            let rho = DensityOperator::noisy_magic(level, 0.01);
            assert!((rho.diagonal_error(&m) - 0.01).abs() < 1e-15);
            let rho = DensityOperator::noisy_magic(level, 0.3);
            let td = rho.trace_distance(&pure(m.clone())).unwrap();
            assert!((rho.diagonal_error(&m) - 0.3).abs() < 1e-14);
            assert!((td - 0.3).abs() < 1e-14);
        }
    }

    #[test]
    fn validation_rejects_non_states() {
        let m = DMatrix::from_row_slice(2, 2, &[C64::new(1.2, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(-0.2, 0.0)]);
        assert!(DensityOperator::new(m).is_err());
        let m = DMatrix::from_row_slice(2, 2, &[C64::new(0.5, 0.0), C64::new(0.1, 0.0), C64::new(0.0, 0.0), C64::new(0.5, 0.0)]);
        assert!(DensityOperator::new(m).is_err());
    }
}
