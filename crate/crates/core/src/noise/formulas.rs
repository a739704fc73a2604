//! Closed-form expressions: leading order, the published exact polynomials,
//! and the generic-noise upper bound.

use serde::Serialize;

use crate::error::{Error, Result};

use super::{NoiseSpec, RoundOutcome};

/// `δ ≈ 8ε₃² + ε_ℓ² + η/4`, `P_suc ≈ 1 − 8ε₃ − 2ε_ℓ − η/2`, clipped to `[0, 1]`.
pub fn leading_order(noise: &NoiseSpec) -> RoundOutcome {
    let NoiseSpec { eps3, epsl, eta } = *noise;
    let delta = (8.0 * eps3 * eps3 + epsl * epsl + 0.25 * eta).clamp(0.0, 1.0);
    let p_suc = (1.0 - 8.0 * eps3 - 2.0 * epsl - 0.5 * eta).clamp(0.0, 1.0);
    RoundOutcome { delta, delta_partner: delta, p_suc, p_fail: 1.0 - p_suc, coherence: 0.0 }
}

/// The two published polynomials evaluated as printed, plus a corrected reading.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExactFormulas {
    /// The printed δ numerator, including both `ε_ℓ²` terms.
    pub delta_numerator: f64,
    /// The printed acceptance expression.
    pub p_expr: f64,
    /// Printed numerator divided by the printed acceptance expression.
    pub delta_verbatim: f64,
    /// Numerator with a single `ε_ℓ²` term.
    pub delta_numerator_corrected: f64,
    /// `1 − p_expr`, reading the printed expression as the failure probability.
    pub p_suc_corrected: f64,
    pub delta_corrected: f64,
}

pub fn appe_formulas(noise: &NoiseSpec) -> ExactFormulas {
    let NoiseSpec { eps3: e, epsl: l, eta: h } = *noise;
    let p = |x: f64, k: i32| x.powi(k);
    let l2 = l * l;
    let tail = -2.0 * h * e + 6.0 * h * p(e, 2) - 48.0 * p(e, 3) - 8.0 * h * p(e, 3) + 136.0 * p(e, 4)
        + 4.0 * h * p(e, 4)
        - 224.0 * p(e, 5)
        + 224.0 * p(e, 6)
        - 128.0 * p(e, 7)
        + 32.0 * p(e, 8);
    let cross = -h * l2 - 8.0 * e * l2 + 8.0 * h * e * l2 + 24.0 * p(e, 2) * l2 - 24.0 * h * p(e, 2) * l2
        - 32.0 * p(e, 3) * l2
        + 32.0 * h * p(e, 3) * l2
        + 16.0 * p(e, 4) * l2
        - 16.0 * h * p(e, 4) * l2;
    let head = 8.0 * e * e + 0.25 * h + tail + l2 + cross;
    let delta_numerator = head + l2;
    let delta_numerator_corrected = head;

    let p_expr = 448.0 * p(e, 5) - 448.0 * p(e, 6) + 256.0 * p(e, 7) - 64.0 * p(e, 8)
        + 0.5 * h * p(1.0 - 2.0 * e, 4) * p(1.0 - 2.0 * l, 2)
        + 2.0 * l
        - 2.0 * l2
        + 64.0 * p(e, 3) * (2.0 - l + l2)
        - 32.0 * p(e, 4) * (9.0 - l + l2)
        + 8.0 * e * (1.0 - 2.0 * l + 2.0 * l2)
        - 8.0 * p(e, 2) * (5.0 - 6.0 * l + 6.0 * l2);
    let p_suc_corrected = 1.0 - p_expr;
    ExactFormulas {
        delta_numerator,
        p_expr,
        delta_verbatim: delta_numerator / p_expr,
        delta_numerator_corrected,
        p_suc_corrected,
        delta_corrected: delta_numerator_corrected / p_suc_corrected,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GenericNoiseBound {
    /// `(1−ε₃)⁸`.
    pub p_g: f64,
    /// Probability of a nonzero even number of site flips.
    pub p_b: f64,
    /// `(ε_ℓ² + 28ε₃² + 2η) / ((1−8ε₃)(1−2ε_ℓ+2ε_ℓ²) − 2η)`.
    pub bound: f64,
    /// `ε_ℓ² + 28ε₃² + 2η`.
    pub leading: f64,
}

/// Largest `ε₃` for which the inequalities on `p_g` and `p_b` hold.
pub const GENERIC_EPS3_MAX: f64 = 0.01;

pub fn generic_bound(noise: &NoiseSpec) -> Result<GenericNoiseBound> {
    noise.validate()?;
    let NoiseSpec { eps3, epsl, eta } = *noise;
    if eps3 > GENERIC_EPS3_MAX {
        return Err(Error::OutsideValidity { value: eps3 });
    }
    let p_g = (1.0 - eps3).powi(8);
    let p_b = [2, 4, 6, 8]
        .iter()
        .map(|&w| binomial(8, w) * eps3.powi(w as i32) * (1.0 - eps3).powi(8 - w as i32))
        .sum();
    let leading = epsl * epsl + 28.0 * eps3 * eps3 + 2.0 * eta;
    let denominator = (1.0 - 8.0 * eps3) * (1.0 - 2.0 * epsl + 2.0 * epsl * epsl) - 2.0 * eta;
    if denominator <= 0.0 {
        return Err(Error::BoundUndefined(denominator));
    }
    Ok(GenericNoiseBound { p_g, p_b, bound: leading / denominator, leading })
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}
