//! Leading coefficients of a round, read off the exact model at a small rate.

use serde::Serialize;

use crate::error::Result;

use super::{NoiseSpec, RoundModel};

/// `δ ≈ a₃ε₃² + a_ℓε_ℓ² + a_η η` and `P_fail ≈ b₃ε₃ + b_ℓε_ℓ + b_η η`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LeadingCoefficients {
    pub level: u32,
    pub probe: f64,
    /// `[a₃, a_ℓ, a_η]`.
    pub delta: [f64; 3],
    /// `[b₃, b_ℓ, b_η]`.
    pub p_fail: [f64; 3],
}

/// Turns on one rate at a time at `probe`.
pub fn leading_coefficients(model: &RoundModel, probe: f64) -> Result<LeadingCoefficients> {
    let specs = [NoiseSpec::new(probe, 0.0, 0.0)?, NoiseSpec::new(0.0, probe, 0.0)?, NoiseSpec::new(0.0, 0.0, probe)?];
    let mut delta = [0.0; 3];
    let mut p_fail = [0.0; 3];
    for (i, spec) in specs.iter().enumerate() {
        let out = model.evaluate(spec)?;
        delta[i] = out.delta / if i == 2 { probe } else { probe * probe };
        p_fail[i] = (1.0 - out.p_suc) / probe;
    }
    Ok(LeadingCoefficients { level: model.level, probe, delta, p_fail })
}

/// Published coefficients, in the same order.
pub const EXPECTED_DELTA: [f64; 3] = [8.0, 1.0, 0.25];
pub const EXPECTED_P_FAIL: [f64; 3] = [8.0, 2.0, 0.5];

impl LeadingCoefficients {
    /// Largest relative deviation from the published coefficients.
    pub fn max_relative_deviation(&self) -> f64 {
        let d = self.delta.iter().zip(EXPECTED_DELTA);
        let p = self.p_fail.iter().zip(EXPECTED_P_FAIL);
        d.chain(p).map(|(got, want)| (got - want).abs() / want).fold(0.0, f64::max)
    }
}
