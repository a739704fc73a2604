//! Places where the published closed forms disagree with the simulator.
//!
//! Nothing here patches the formulas; each flag carries the printed value next
//! to the measured one.

use serde::Serialize;

use crate::circuits::build_mekl_circuit;
use crate::error::Result;

use super::formulas::{appe_formulas, GENERIC_EPS3_MAX};
use super::{NoiseSpec, RoundModel};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrataFlag {
    pub id: &'static str,
    pub message: String,
    /// What the printed expression gives.
    pub printed: f64,
    /// What the simulator (or the exact quantity) gives.
    pub measured: f64,
    pub flagged: bool,
}

/// Rate used to read off quadratic coefficients.
const PROBE: f64 = 1e-4;

/// Compares the printed acceptance polynomial, the printed `ε_ℓ²` terms of `δ`
/// and the printed lower bound on `p_g` against level-`level` simulation.
pub fn appe_errata(level: u32) -> Result<Vec<ErrataFlag>> {
    let model = RoundModel::build(&build_mekl_circuit(level)?)?;
    let mut flags = Vec::new();

    let zero = NoiseSpec::default();
    let printed = appe_formulas(&zero).p_expr;
    let measured = model.evaluate(&zero)?.p_suc;
    flags.push(ErrataFlag {
        id: "p-expression-is-p-fail",
        message: format!(
            "printed acceptance expression is {printed} at zero noise, simulated acceptance is {measured}; \
             its leading terms are those of the failure probability, so both readings are reported"
        ),
        printed,
        measured,
        flagged: (printed - measured).abs() > 1e-9,
    });

    let probe = NoiseSpec::new(0.0, PROBE, 0.0)?;
    let printed = appe_formulas(&probe).delta_numerator / (PROBE * PROBE);
    let measured = model.evaluate(&probe)?.delta / (PROBE * PROBE);
    flags.push(ErrataFlag {
        id: "delta-epsl-squared-duplicated",
        message: format!(
            "printed δ numerator lists ε_ℓ² twice (coefficient {printed:.4}); simulated coefficient is {measured:.4}"
        ),
        printed,
        measured,
        flagged: (printed - measured).abs() > 0.01 * measured,
    });

    let e = GENERIC_EPS3_MAX;
    let printed = 1.0 - 8.0 * e * e;
    let measured = (1.0 - e).powi(8);
    flags.push(ErrataFlag {
        id: "p-g-denominator",
        message: format!(
            "printed bound uses p_g ≥ 1−8ε₃² = {printed:.6} at ε₃={e}, but p_g = (1−ε₃)⁸ = {measured:.6}; \
             the bound is evaluated with 1−8ε₃"
        ),
        printed,
        measured,
        flagged: measured < printed,
    });
    Ok(flags)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_three_are_flagged() {
        let flags = appe_errata(5).unwrap();
        assert_eq!(flags.len(), 3);
        assert!(flags.iter().all(|f| f.flagged), "{flags:?}");
        assert_eq!((flags[0].printed, flags[0].measured), (0.0, 1.0));
        assert!((flags[1].printed - 2.0).abs() < 1e-3);
        assert!((flags[1].measured - 1.0).abs() < 0.01);
    }
}
