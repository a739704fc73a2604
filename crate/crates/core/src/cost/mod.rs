//! Expected raw-state cost of magic states and rotations.
//!
//! Costs count raw non-Clifford states consumed per delivered output. Clifford
//! resources (`M_2`, `R_2`, `|+⟩`) are free and perfect.

pub mod grid;
pub mod kernel;
pub mod protocols;
pub mod table;

use serde::{Deserialize, Serialize};

use crate::circuits::build_mekl_circuit;
use crate::error::{Error, Result};
use crate::noise::{NoiseSpec, RoundModel};

pub use grid::ErrorGrid;
pub use kernel::RoundKernel;
pub use protocols::{load_protocols, parse_protocols, Level3Protocol};
pub use table::{
    build_cost_table, level3_base, CostEntry, CostTable, LevelEntries, NodeId, Recipe, RecipeNode, Resource,
    TableConfig,
};

/// An error rate and what it costs to get one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Supply {
    pub error: f64,
    pub cost: f64,
}

impl Supply {
    pub const FREE: Supply = Supply { error: 0.0, cost: 0.0 };

    pub fn new(error: f64, cost: f64) -> Self {
        Self { error, cost }
    }
}

/// Error of `R_ℓ` injected from a state of error `eps_l`, with a correction of
/// error `eta_prev` needed half the time.
pub fn injection_error(eps_l: f64, eta_prev: f64) -> f64 {
    0.5 * eps_l + 0.5 * (eps_l * (1.0 - eta_prev) + (1.0 - eps_l) * eta_prev)
}

/// `𝔠(R_ℓ) = 𝔠(M_ℓ) + ½𝔠(R_{ℓ−1})`.
pub fn rotation_cost(state: Supply, correction: Supply) -> Supply {
    Supply { error: injection_error(state.error, correction.error), cost: state.cost + 0.5 * correction.cost }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RoundCost {
    pub delta: f64,
    pub p_suc: f64,
    /// Expected cost per output state.
    pub cost: f64,
}

/// One MEK round at `level`: two inputs of `state`, eight level-3 states and
/// one pivotal `R_{ℓ−1}`, for two outputs.
pub fn mekl_round_cost(level: u32, state: Supply, m3: Supply, pivot: Supply) -> Result<RoundCost> {
    let model = RoundModel::build(&build_mekl_circuit(level)?)?;
    mekl_round_cost_with(&model, state, m3, pivot)
}

pub fn mekl_round_cost_with(model: &RoundModel, state: Supply, m3: Supply, pivot: Supply) -> Result<RoundCost> {
    let pivot = if model.level == 3 { Supply::FREE } else { pivot };
    let out = model.evaluate(&NoiseSpec::new(m3.error, state.error, pivot.error)?)?;
    if out.p_suc <= 0.0 {
        return Err(Error::ZeroAcceptance(out.p_suc));
    }
    let cost = (2.0 * state.cost + 8.0 * m3.cost + pivot.cost) / (2.0 * out.p_suc);
    Ok(RoundCost { delta: out.delta, p_suc: out.p_suc, cost })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn injection_error_values() {
        assert_eq!(injection_error(1e-3, 0.0), 1e-3);
        assert!((injection_error(1e-3, 1e-3) - 1.499e-3).abs() < 1e-15);
        assert_eq!(injection_error(0.0, 2e-3), 1e-3);
    }

    #[test]
    fn rotation_recursion() {
        let raw = Supply::new(1e-3, 1.0);
        let r3 = rotation_cost(raw, Supply::FREE);
        assert_eq!(r3, Supply::new(1e-3, 1.0));
        let r4 = rotation_cost(raw, r3);
        assert_eq!(r4.cost, 1.5);
    }

    #[test]
    fn mek3_from_raw() {
        let raw = Supply::new(0.01, 1.0);
        let r = mekl_round_cost(3, raw, raw, Supply::FREE).unwrap();
        assert!((r.delta - 9.337e-4).abs() < 1e-6, "{r:?}");
        assert!((r.cost - 10.0 / (2.0 * r.p_suc)).abs() < 1e-12);
        assert!((r.cost - 5.52).abs() < 0.01);
        let free = mekl_round_cost(7, Supply::FREE, Supply::FREE, Supply::FREE).unwrap();
        assert_eq!((free.delta.abs() < 1e-15, free.cost), (true, 0.0));
    }
}
