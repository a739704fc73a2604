//! Output error and acceptance of one distillation round.

pub mod coefficients;
pub mod density;
pub mod enumerate;
pub mod errata;
pub mod formulas;
pub mod monte_carlo;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use coefficients::{leading_coefficients, LeadingCoefficients};
pub use density::{simulate_density, DensityRun, PivotChannel};
pub use enumerate::{simulate_round, RoundModel};
pub use errata::{appe_errata, ErrataFlag};
pub use formulas::{appe_formulas, generic_bound, leading_order, ExactFormulas, GenericNoiseBound};
pub use monte_carlo::{monte_carlo_generic, MonteCarloReport};

/// Diagonal error rates attached to the non-Clifford parts of a round.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct NoiseSpec {
    /// Y-flip probability at every level-3 site.
    pub eps3: f64,
    /// Diagonal error of each `|M_ℓ⟩` input.
    pub epsl: f64,
    /// Y-flip probability of the pivotal rotation.
    pub eta: f64,
}

impl NoiseSpec {
    pub fn new(eps3: f64, epsl: f64, eta: f64) -> Result<Self> {
        let spec = Self { eps3, epsl, eta };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in [("eps3", self.eps3), ("epsl", self.epsl), ("eta", self.eta)] {
            if !(0.0..0.5).contains(&value) {
                return Err(Error::RateOutOfRange { name, value });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoundOutcome {
    /// Error of output qubit 3 after tracing out its partner.
    pub delta: f64,
    /// Same for output qubit 4.
    pub delta_partner: f64,
    pub p_suc: f64,
    pub p_fail: f64,
    /// Largest off-diagonal magnitude of either reduced output in the `{M, M̄}` basis.
    pub coherence: f64,
}
