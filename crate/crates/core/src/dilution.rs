//! Mixing a level-ℓ magic state with `|+⟩` to make a level-(ℓ+1) one.
//!
//! `λρ_{ℓ,ε} + (1−λ)|+⟩⟨+| = ρ_{ℓ+1,ε′}` with `λ = 1/(2(1−ε))`. Half the time
//! (roughly) the expensive state is replaced by a free one, so the output
//! costs `λ` times the input.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quantum::{plus_state, theta, DensityOperator};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DilutionResult {
    /// Level of the input state; the output is one level higher.
    pub level: u32,
    pub eps_in: f64,
    pub lambda: f64,
    pub eps_out: f64,
    /// Output cost per unit input cost; equal to `lambda`.
    pub cost_factor: f64,
}

fn check(level: u32, eps: f64) -> Result<()> {
    if level < 2 {
        return Err(Error::LevelTooLow { level, min: 2 });
    }
    if !(0.0..0.5).contains(&eps) {
        return Err(Error::RateOutOfRange { name: "eps", value: eps });
    }
    Ok(())
}

pub fn dilute(level: u32, eps_in: f64) -> Result<DilutionResult> {
    check(level, eps_in)?;
    let lambda = 1.0 / (2.0 * (1.0 - eps_in));
    let eps_out = 0.5 * (1.0 - (1.0 - 2.0 * eps_in) * theta(level).cos() / (1.0 - eps_in));
    Ok(DilutionResult { level, eps_in, lambda, eps_out, cost_factor: lambda })
}

/// `log₂(π/√(2ε))`: the level at which `θ_ℓ = √(2ε)`.
pub fn critical_level(eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::RateOutOfRange { name: "eps", value: eps });
    }
    Ok((std::f64::consts::PI / (2.0 * eps).sqrt()).log2())
}

/// Error of `|+⟩` used in place of `|M_ℓ⟩`: `|sin θ_ℓ|`.
pub fn plus_substitute_error(level: u32) -> Result<f64> {
    if level < 2 {
        return Err(Error::LevelTooLow { level, min: 2 });
    }
    Ok(theta(level).sin().abs())
}

/// Whether dilution lowers the error: `ε′ ≤ ε ⇔ cos θ_ℓ ≥ 1 − ε`.
pub fn dilution_reduces_error(level: u32, eps: f64) -> bool {
    theta(level).cos() >= 1.0 - eps
}

/// Trace distance between the two sides of the mixing identity.
pub fn verify_dilution_identity(level: u32, eps: f64) -> Result<f64> {
    let r = dilute(level, eps)?;
    let plus = DensityOperator::from_pure(&plus_state())?;
    let mixed = DensityOperator::noisy_magic(level, eps).scaled(r.lambda).add(&plus.scaled(1.0 - r.lambda))?;
    let target = DensityOperator::noisy_magic(level + 1, r.eps_out);
    mixed.trace_distance(&target)
}

/// 200 `(ℓ, ε)` pairs: levels 3 to 22, ten log-spaced errors from `1e-6` to about `0.25`.
pub fn check_grid() -> impl Iterator<Item = (u32, f64)> {
    (3..23).flat_map(|l| (0..10).map(move |i| (l, 1e-6 * 10f64.powf(i as f64 * 5.4 / 9.0))))
}

/// Output errors of repeated dilution starting from `(level, eps)`, one per step.
pub fn dilution_chain(level: u32, eps: f64, steps: usize) -> Result<Vec<DilutionResult>> {
    let mut out = Vec::with_capacity(steps);
    let (mut l, mut e) = (level, eps);
    for _ in 0..steps {
        let r = dilute(l, e)?;
        out.push(r);
        l += 1;
        e = r.eps_out;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noiseless_input() {
        for level in 2..=14 {
            let r = dilute(level, 0.0).unwrap();
            assert_eq!(r.lambda, 0.5);
            assert!((r.eps_out - theta(level + 1).sin().powi(2)).abs() < 1e-14);
        }
    }

    #[test]
    fn worked_values() {
        let r = dilute(10, 1e-4).unwrap();
        assert!((r.lambda - 0.50005).abs() < 1e-8);
        assert!((r.eps_out - 5.235e-5).abs() < 1e-8, "{}", r.eps_out);
        assert!(dilute(3, 1e-4).unwrap().eps_out > 1e-4);
        assert!(dilute(3, 0.5).is_err());
        assert!(dilute(1, 0.1).is_err());
    }

    #[test]
    fn critical_levels() {
        assert!((critical_level(1e-3).unwrap() - 6.134).abs() < 1e-3);
        let eps = 0.5 * theta(8).powi(2);
        assert!((critical_level(eps).unwrap() - 8.0).abs() < 1e-12);
        assert!(critical_level(0.0).is_err());
    }

    #[test]
    fn identity_holds_on_grid() {
        for level in 2..=14 {
            for eps in [0.0, 1e-4, 1e-2, 0.2] {
                assert!(verify_dilution_identity(level, eps).unwrap() < 1e-12);
            }
        }
        assert!(verify_dilution_identity(3, 0.3).unwrap() < 1e-12);
    }

    #[test]
    fn plus_error_matches_trace_distance() {
        for level in 2..=16 {
            let plus = DensityOperator::from_pure(&plus_state()).unwrap();
            let m = DensityOperator::from_pure(&crate::quantum::magic_state(level)).unwrap();
            let d = plus.trace_distance(&m).unwrap();
            assert!((plus_substitute_error(level).unwrap() - d).abs() < 1e-12);
        }
        assert!((plus_substitute_error(8).unwrap() - 1.22715e-2).abs() < 1e-6);
    }

    #[test]
    fn reduction_criterion_on_grid() {
        let mut n = 0;
        for (l, eps) in check_grid() {
            let r = dilute(l, eps).unwrap();
            assert_eq!(r.eps_out <= eps, dilution_reduces_error(l, eps), "ℓ={l} ε={eps}");
            if theta(l) <= (2.0 * eps).sqrt() {
                assert!(r.eps_out <= eps, "ℓ={l} ε={eps}");
            }
            n += 1;
        }
        assert_eq!(n, 200);
        assert!(dilute(3, 1e-4).unwrap().eps_out > 1e-4);
    }

    #[test]
    fn cost_factor_is_about_half() {
        for (l, eps) in check_grid() {
            let r = dilute(l, eps).unwrap();
            assert_eq!(r.cost_factor, r.lambda);
            assert!(r.cost_factor <= 0.5 / (1.0 - eps) + 1e-15);
        }
        assert!((dilute(9, 1e-12).unwrap().cost_factor - 0.5).abs() < 1e-11);
    }
}
