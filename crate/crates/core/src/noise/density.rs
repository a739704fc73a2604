//! Density-matrix simulation of a round with arbitrary inputs and pivot noise.
//!
//! Slower than branch enumeration but makes no diagonal-noise assumption; it
//! serves the generic-noise checks and cross-checks the enumeration.

use nalgebra::DMatrix;

use crate::circuits::circuit::{Circuit, Element, Preparation, OUTPUTS, WIDTH};
use crate::error::{Error, Result};
use crate::quantum::{magic_state, plus_state, zero_state, DensityOperator, Gate, Pauli, C64};

use super::RoundOutcome;

/// Kraus operators replacing the `R_{ℓ−1}` half of the pivot (applied after `X`).
#[derive(Debug, Clone)]
pub struct PivotChannel {
    pub kraus: Vec<DMatrix<C64>>,
}

impl PivotChannel {
    /// `R_{ℓ−1}` with a Y flip of probability `eta`.
    pub fn diagonal(rotation: &Gate, eta: f64) -> Self {
        let r = rotation.unitary().clone();
        let iy = Pauli::Y.matrix() * C64::new(0.0, 1.0);
        Self { kraus: vec![&r * C64::new((1.0 - eta).sqrt(), 0.0), iy * r * C64::new(eta.sqrt(), 0.0)] }
    }
}

#[derive(Debug, Clone)]
pub struct DensityRun {
    /// Accepted, unnormalized five-qubit state.
    pub accepted: DensityOperator,
}

impl DensityRun {
    pub fn p_suc(&self) -> f64 {
        self.accepted.trace()
    }

    /// Normalized reduced state of output `index` (0 for qubit 3, 1 for qubit 4).
    pub fn output(&self, index: usize) -> Result<DensityOperator> {
        self.accepted.reduce_to(OUTPUTS[index])?.normalized()
    }

    pub fn outcome(&self, level: u32) -> Result<RoundOutcome> {
        let m = magic_state(level);
        let target = DensityOperator::from_pure(&m)?;
        let a = self.output(0)?;
        let b = self.output(1)?;
        let mb = crate::quantum::magic_state_bar(level);
        let coh = |r: &DensityOperator| (m.adjoint() * r.matrix() * &mb)[(0, 0)].norm();
        let p_suc = self.p_suc();
        Ok(RoundOutcome {
            delta: a.trace_distance(&target)?,
            delta_partner: b.trace_distance(&target)?,
            p_suc,
            p_fail: 1.0 - p_suc,
            coherence: coh(&a).max(coh(&b)),
        })
    }
}

/// Runs `circuit` on the given inputs for qubits 3 and 4.
///
/// Every level-3 site suffers a Y flip with probability `eps3`; the pivot
/// rotation is replaced by `pivot` (or the circuit's ideal rotation if `None`).
pub fn simulate_density(
    circuit: &Circuit,
    inputs: [&DensityOperator; 2],
    eps3: f64,
    pivot: Option<&PivotChannel>,
) -> Result<DensityRun> {
    if inputs.iter().any(|r| r.width() != 1) {
        return Err(Error::InvalidArgument("inputs must be single-qubit states".into()));
    }
    let plus = DensityOperator::from_pure(&plus_state())?;
    let zero = DensityOperator::from_pure(&zero_state())?;
    let mut prepared = [None, None, None, None, None];
    let mut rho: Option<DensityOperator> = None;
    for e in circuit.elements() {
        match e {
            Element::Prepare { qubit, state } => {
                prepared[*qubit] = Some(match state {
                    Preparation::Plus => plus.clone(),
                    Preparation::Zero => zero.clone(),
                    Preparation::Magic => {
                        let slot = OUTPUTS.iter().position(|q| q == qubit).ok_or_else(|| {
                            Error::InvalidArgument(format!("magic input on unexpected qubit {qubit}"))
                        })?;
                        inputs[slot].clone()
                    }
                });
                continue;
            }
            _ => {
                if rho.is_none() {
                    let mut state = prepared[0].clone().ok_or_else(|| Error::InvalidArgument("missing preparation".into()))?;
                    for slot in prepared.iter().skip(1) {
                        let s = slot.as_ref().ok_or_else(|| Error::InvalidArgument("missing preparation".into()))?;
                        state = state.tensor(s);
                    }
                    rho = Some(state);
                }
            }
        }
        let state = rho.take().expect("initialized");
        let next = match e {
            Element::Prepare { .. } => unreachable!(),
            Element::Clifford(g) => state.apply_gate(g)?,
            Element::NoisyR3 { qubit, .. } => {
                let g = circuit.element_gate(e).expect("gate");
                state.apply_gate(&g)?.pauli_flip(*qubit, Pauli::Y, eps3)?
            }
            Element::Pivot { qubit, level } => {
                let flipped = state.apply_gate(&Gate::x(*qubit))?;
                match pivot {
                    Some(ch) => flipped.apply_kraus(&ch.kraus, &[*qubit])?,
                    None => flipped.apply_gate(&circuit.pivot_rotation(*qubit, *level))?,
                }
            }
            Element::Postselect { qubit, observable, outcome } => state.postselect(*qubit, *observable, *outcome)?,
        };
        rho = Some(next);
    }
    let accepted = rho.ok_or_else(|| Error::InvalidArgument("empty circuit".into()))?;
    debug_assert_eq!(accepted.width(), WIDTH);
    Ok(DensityRun { accepted })
}
