//! The invariant suite behind `rotforge verify`.

use serde::Serialize;

use crate::circuits::identities::{flipped_site_acceptance, verify_compression_identities_with};
use crate::circuits::circuit::{build_dpl_circuit_with, build_mekl_circuit_with};
use crate::circuits::{CliffordSpec, Faults};
use crate::dilution::{check_grid, dilute, dilution_reduces_error, verify_dilution_identity};
use crate::error::Result;
use crate::noise::{appe_errata, leading_coefficients, monte_carlo_generic, ErrataFlag, NoiseSpec, RoundModel};
use crate::quantum::theta;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteCheck {
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub level: Option<u32>,
    pub deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl SuiteCheck {
    fn new(name: &str, level: Option<u32>, deviation: f64, tolerance: f64) -> Self {
        Self { name: name.to_string(), level, deviation, tolerance, passed: deviation <= tolerance }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOptions {
    pub levels: Vec<u32>,
    pub seed: u64,
    pub trials: usize,
    /// Level of the Monte Carlo run.
    pub mc_level: u32,
    pub mc_caps: NoiseSpec,
    pub faults: Faults,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            levels: (4..=8).collect(),
            seed: 0,
            trials: 200,
            mc_level: 5,
            mc_caps: NoiseSpec { eps3: 1e-2, epsl: 1e-2, eta: 1e-4 },
            faults: Faults::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<SuiteCheck>,
    /// Reported, never counted as failures.
    pub errata: Vec<ErrataFlag>,
    pub mc_violations: usize,
    pub passed: bool,
}

impl VerifyReport {
    pub fn failed(&self) -> impl Iterator<Item = &SuiteCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

pub fn run_suite(opts: &VerifyOptions) -> Result<VerifyReport> {
    let mut checks = Vec::new();

    let spec = CliffordSpec::encoder();
    checks.push(SuiteCheck::new("encoder_table", None, spec.conjugation_deviation(&spec.synthesize()?), 1e-10));

    for &level in &opts.levels {
        let report = verify_compression_identities_with(level, opts.faults)?;
        for c in report.checks() {
            checks.push(SuiteCheck::new(c.name, Some(level), c.deviation, 1e-10));
        }

        let mek = build_mekl_circuit_with(level, opts.faults)?;
        let dp = build_dpl_circuit_with(level, opts.faults)?;
        let (mek_model, dp_model) = (RoundModel::build(&mek)?, RoundModel::build(&dp)?);
        let quiet = NoiseSpec::new(0.0, 3e-3, 2e-4)?;
        let (a, b) = (mek_model.evaluate(&quiet)?, dp_model.evaluate(&quiet)?);
        let dev = (a.delta - b.delta).abs().max((a.p_suc - b.p_suc).abs());
        checks.push(SuiteCheck::new("dp_equals_mek_outcome", Some(level), dev, 1e-12));

        let mut worst = 0.0f64;
        for site in 1..=mek.noisy_site_count() {
            worst = worst.max(flipped_site_acceptance(&mek, &[site])?);
        }
        checks.push(SuiteCheck::new("single_error_detection", Some(level), worst, 1e-14));

        let c = leading_coefficients(&mek_model, 1e-4)?;
        checks.push(SuiteCheck::new("leading_coefficients", Some(level), c.max_relative_deviation(), 0.01));
    }

    let mut identity = 0.0f64;
    let mut mismatches = 0;
    for (level, eps) in check_grid() {
        identity = identity.max(verify_dilution_identity(level, eps)?);
        if (dilute(level, eps)?.eps_out <= eps) != dilution_reduces_error(level, eps) {
            mismatches += 1;
        }
    }
    checks.push(SuiteCheck::new("dilution_identity", None, identity, 1e-12));
    checks.push(SuiteCheck::new("dilution_criterion", None, mismatches as f64, 0.0));
    let mut pure = 0.0f64;
    for level in 2..=30 {
        pure = pure.max((dilute(level, 0.0)?.eps_out - theta(level + 1).sin().powi(2)).abs());
    }
    checks.push(SuiteCheck::new("dilution_pure_input", None, pure, 1e-14));

    let mc = monte_carlo_generic(opts.seed, opts.trials, &opts.mc_caps, opts.mc_level)?;
    let mut generic = SuiteCheck::new("generic_bound_monte_carlo", Some(opts.mc_level), mc.max_ratio, 1.0);
    generic.passed = mc.violations == 0;
    checks.push(generic);

    let errata = appe_errata(opts.levels.first().copied().unwrap_or(5))?;
    let passed = checks.iter().all(|c| c.passed);
    Ok(VerifyReport { checks, errata, mc_violations: mc.violations, passed })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick(faults: Faults) -> VerifyReport {
        run_suite(&VerifyOptions { levels: vec![5], trials: 5, faults, ..Default::default() }).unwrap()
    }

    #[test]
    fn clean_run_passes() {
        let r = quick(Faults::default());
        assert!(r.passed, "{:?}", r.failed().collect::<Vec<_>>());
        assert_eq!(r.errata.len(), 3);
    }

    #[test]
    fn flipped_pivot_fails_v_form() {
        let r = quick(Faults { flip_pivot_sign: true });
        assert!(!r.passed);
        assert!(r.failed().any(|c| c.name == "v_form"));
    }
}
