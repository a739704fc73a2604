use nalgebra::DMatrix;

use crate::error::{Error, Result};

use super::gate::{max_abs_diff, Gate};
use super::pauli::Pauli;
use super::state::DensityOperator;
use super::C64;

/// `ρ ↦ (1−η) RρR† + η (RY)ρ(RY)†` with `R = exp(iθY)`.
///
/// Because `R` commutes with `Y`, the flip can be placed on either side of
/// the rotation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoisyRotationChannel {
    theta: f64,
    eta: f64,
}

impl NoisyRotationChannel {
    pub fn new(theta: f64, eta: f64) -> Result<Self> {
        if !theta.is_finite() {
            return Err(Error::InvalidArgument(format!("angle {theta} is not finite")));
        }
        if !(0.0..=0.5).contains(&eta) {
            return Err(Error::RateOutOfRange { name: "eta", value: eta });
        }
        Ok(Self { theta, eta })
    }

    pub fn level(level: u32, eta: f64) -> Result<Self> {
        Self::new(super::gate::theta(level), eta)
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn kraus(&self) -> [DMatrix<C64>; 2] {
        let r = Gate::rot_y(self.theta, 0).unitary().clone();
        let ry = &r * Pauli::Y.matrix();
        [r * C64::new((1.0 - self.eta).sqrt(), 0.0), ry * C64::new(self.eta.sqrt(), 0.0)]
    }

    pub fn apply(&self, rho: &DensityOperator, qubit: usize) -> Result<DensityOperator> {
        rho.apply_kraus(&self.kraus(), &[qubit])
    }

    /// Kraus operators of `R† ∘ channel`, which should be `√(1−η) I` and `√η Y`.
    pub fn residual_kraus(&self) -> [DMatrix<C64>; 2] {
        let r_dag = Gate::rot_y(self.theta, 0).unitary().adjoint();
        self.kraus().map(|k| &r_dag * k)
    }

    /// Largest deviation of `Σ K†K` from the identity.
    pub fn trace_preservation_deviation(&self) -> f64 {
        let sum = self.kraus().iter().fold(DMatrix::<C64>::zeros(2, 2), |acc, k| acc + k.adjoint() * k);
        max_abs_diff(&sum, &DMatrix::identity(2, 2))
    }

    /// Normalized Choi matrix `Σ_k (I⊗K_k)|Ω⟩⟨Ω|(I⊗K_k)†`.
    pub fn choi(&self) -> DMatrix<C64> {
        let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let omega = DMatrix::from_column_slice(4, 1, &[h, C64::new(0.0, 0.0), C64::new(0.0, 0.0), h]);
        let mut out = DMatrix::<C64>::zeros(4, 4);
        for k in self.kraus() {
            let full = DMatrix::<C64>::identity(2, 2).kronecker(&k);
            let v = full * &omega;
            out += &v * v.adjoint();
        }
        out
    }

    /// Smallest eigenvalue of the Choi matrix; nonnegative iff completely positive.
    pub fn choi_min_eigenvalue(&self) -> f64 {
        super::state::hermitian_eigenvalues(&self.choi()).into_iter().fold(f64::INFINITY, f64::min)
    }

    /// Diamond distance to the noiseless rotation.
    ///
    /// After undoing the rotation the channel is the Pauli channel
    /// `(1−η)ρ + ηYρY`, whose diamond distance to the identity is the flip
    /// weight. General channels are not supported.
    pub fn diamond_distance_to_ideal(&self) -> f64 {
        self.eta
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::state::{magic_state, trace_distance};

    #[test]
    fn residual_is_the_y_flip_channel() {
        for level in 2..=10 {
            for eta in [0.0, 1e-3, 0.2, 0.5] {
                let ch = NoisyRotationChannel::level(level, eta).unwrap();
                let [a, b] = ch.residual_kraus();
                let id = DMatrix::<C64>::identity(2, 2) * C64::new((1.0 - eta).sqrt(), 0.0);
                let y = Pauli::Y.matrix() * C64::new(eta.sqrt(), 0.0);
                assert!(max_abs_diff(&a, &id) < 1e-14);
                assert!(max_abs_diff(&b, &y) < 1e-14);
                assert!(ch.trace_preservation_deviation() < 1e-14);
                assert!(ch.choi_min_eigenvalue() > -1e-14);
                assert_eq!(ch.diamond_distance_to_ideal(), eta);
            }
        }
    }

    #[test]
    fn diamond_value_is_attained_on_an_entangled_input() {
        // for a Y-flip channel the optimal input is maximally entangled with a reference;
        // the output distance then equals the flip weight
        for eta in [0.0, 0.01, 0.3, 0.5] {
            let ch = NoisyRotationChannel::new(0.3, eta).unwrap();
            let ideal = NoisyRotationChannel::new(0.3, 0.0).unwrap();
            let a = DensityOperator::new(ch.choi()).unwrap();
            let b = DensityOperator::new(ideal.choi()).unwrap();
            assert!((trace_distance(&a, &b).unwrap() - eta).abs() < 1e-14);
        }
    }

    #[test]
    fn noisy_injection_of_plus_gives_diagonal_magic_noise() {
        let plus = DensityOperator::from_pure(&crate::quantum::state::plus_state()).unwrap();
        let out = NoisyRotationChannel::level(6, 0.07).unwrap().apply(&plus, 0).unwrap();
        assert!((out.diagonal_error(&magic_state(6)) - 0.07).abs() < 1e-14);
        assert!(max_abs_diff(out.matrix(), DensityOperator::noisy_magic(6, 0.07).matrix()) < 1e-14);
    }

    #[test]
    fn rejects_out_of_range_rates() {
        assert!(NoisyRotationChannel::new(0.1, 0.6).is_err());
        assert!(NoisyRotationChannel::new(0.1, -0.1).is_err());
        assert!(NoisyRotationChannel::new(f64::NAN, 0.1).is_err());
    }
}
