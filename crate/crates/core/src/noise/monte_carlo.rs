//! Randomized check of the generic-noise bound.
//!
//! Each trial draws rates uniformly below the caps, a non-diagonal input
//! perturbation `Δ = ε[[−a, b], [b*, a]]` (in the `{M, M̄}` basis) with
//! `(a, b)` uniform on the half ball `a ≥ 0, a² + |b|² ≤ 1` restricted to
//! positive inputs, and a pivot channel mixing a coherent over-rotation with a
//! random unitary. The bound is evaluated at the drawn rates, with `η` set to
//! an upper bound on the drawn channel's diamond distance.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::circuits::{build_mekl_circuit, Circuit};
use crate::error::{Error, Result};
use crate::quantum::{magic_state, magic_state_bar, theta, DensityOperator, Gate, C64};

use super::density::{simulate_density, PivotChannel};
use super::formulas::generic_bound;
use super::NoiseSpec;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonteCarloReport {
    pub level: u32,
    pub trials: usize,
    pub seed: u64,
    pub max_observed_error: f64,
    /// Largest observed error divided by the bound at the same draw.
    pub max_ratio: f64,
    pub violations: usize,
}

/// One drawn configuration and its outcome.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Trial {
    pub noise: NoiseSpec,
    pub observed: f64,
    pub bound: f64,
}

fn to_computational(level: u32, rho_m: &DMatrix<C64>) -> DMatrix<C64> {
    let m = magic_state(level);
    let mb = magic_state_bar(level);
    let mut basis = DMatrix::<C64>::zeros(2, 2);
    basis.set_column(0, &m);
    basis.set_column(1, &mb);
    &basis * rho_m * basis.adjoint()
}

/// `ρ_ℓ + ε[[−a, b], [b*, a]]` in the computational basis.
pub fn perturbed_input(level: u32, eps: f64, a: f64, b: C64) -> Result<DensityOperator> {
    let rho_m = DMatrix::from_row_slice(
        2,
        2,
        &[C64::new(1.0 - eps * a, 0.0), b * eps, b.conj() * eps, C64::new(eps * a, 0.0)],
    );
    DensityOperator::new(to_computational(level, &rho_m))
}

fn random_unitary(rng: &mut ChaCha8Rng) -> DMatrix<C64> {
    // uniform point on S³ by rejection from the cube
    let v = loop {
        let v: [f64; 4] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-3 && n <= 1.0 {
            break v.map(|x| x / n);
        }
    };
    let a = C64::new(v[0], v[1]);
    let b = C64::new(v[2], v[3]);
    DMatrix::from_row_slice(2, 2, &[a, -b.conj(), b, a.conj()])
}

fn draw_shape(rng: &mut ChaCha8Rng, eps: f64) -> (f64, C64) {
    loop {
        let a: f64 = rng.random_range(0.0..1.0);
        let b = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        if a * a + b.norm_sqr() > 1.0 {
            continue;
        }
        // positivity of [[1−εa, εb], [εb*, εa]]
        if eps * a * (1.0 - eps * a) >= eps * eps * b.norm_sqr() {
            return (a, b);
        }
    }
}

/// Runs one trial with explicit inputs and pivot, returning the worse output error.
pub fn observed_error(
    circuit: &Circuit,
    input: &DensityOperator,
    eps3: f64,
    pivot: &PivotChannel,
) -> Result<f64> {
    let run = simulate_density(circuit, [input, input], eps3, Some(pivot))?;
    let out = run.outcome(circuit.level())?;
    Ok(out.delta.max(out.delta_partner))
}

pub fn monte_carlo_generic(seed: u64, trials: usize, caps: &NoiseSpec, level: u32) -> Result<MonteCarloReport> {
    Ok(monte_carlo_trials(seed, trials, caps, level)?.0)
}

pub fn monte_carlo_trials(seed: u64, trials: usize, caps: &NoiseSpec, level: u32) -> Result<(MonteCarloReport, Vec<Trial>)> {
    if trials == 0 {
        return Err(Error::InvalidArgument("need at least one trial".into()));
    }
    caps.validate()?;
    let circuit = build_mekl_circuit(level)?;
    let rotation = circuit.pivot_rotation(0, level);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report =
        MonteCarloReport { level, trials, seed, max_observed_error: 0.0, max_ratio: 0.0, violations: 0 };
    let mut log = Vec::with_capacity(trials);
    for _ in 0..trials {
        let eps3 = rng.random_range(0.0..=1.0) * caps.eps3;
        let eps = rng.random_range(0.0..=1.0) * caps.epsl;
        let (a, b) = draw_shape(&mut rng, eps);
        let input = perturbed_input(level, eps, a, b)?;
        let epsl = input.trace_distance(&DensityOperator::from_pure(&magic_state(level))?)?;

        let p = rng.random_range(0.0..=1.0) * caps.eta;
        let sin_phi = rng.random_range(-1.0..=1.0) * (caps.eta - p);
        let coherent = Gate::rot_y(theta(level - 1) + sin_phi.asin(), 0);
        let w = random_unitary(&mut rng);
        let pivot = PivotChannel {
            kraus: vec![
                coherent.unitary() * C64::new((1.0 - p).sqrt(), 0.0),
                w * rotation.unitary() * C64::new(p.sqrt(), 0.0),
            ],
        };
        let eta = (1.0 - p) * sin_phi.abs() + p;

        let noise = NoiseSpec::new(eps3, epsl, eta)?;
        let bound = generic_bound(&noise)?.bound;
        let observed = observed_error(&circuit, &input, eps3, &pivot)?;
        report.max_observed_error = report.max_observed_error.max(observed);
        if bound > 0.0 {
            report.max_ratio = report.max_ratio.max(observed / bound);
        }
        if observed > bound * (1.0 + 1e-9) + 1e-15 {
            report.violations += 1;
        }
        log.push(Trial { noise, observed, bound });
    }
    Ok((report, log))
}

/// Output error and bound when both inputs are `|+⟩`, whose error is `|sin θ_ℓ|`.
pub fn plus_input_trial(level: u32, eps3: f64, eta: f64) -> Result<Trial> {
    let circuit = build_mekl_circuit(level)?;
    let plus = DensityOperator::from_pure(&crate::quantum::plus_state())?;
    let pivot = PivotChannel::diagonal(&circuit.pivot_rotation(0, level), eta);
    let observed = observed_error(&circuit, &plus, eps3, &pivot)?;
    let noise = NoiseSpec::new(eps3, theta(level).sin(), eta)?;
    Ok(Trial { noise, observed, bound: generic_bound(&noise)?.bound })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_caps_give_zero_error() {
        let r = monte_carlo_generic(1, 5, &NoiseSpec::default(), 5).unwrap();
        assert!(r.max_observed_error < 1e-12);
        assert_eq!(r.violations, 0);
    }

    #[test]
    fn seeded_runs_repeat() {
        let caps = NoiseSpec::new(1e-2, 1e-2, 1e-4).unwrap();
        let a = monte_carlo_generic(7, 10, &caps, 4).unwrap();
        let b = monte_carlo_generic(7, 10, &caps, 4).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn perturbed_inputs_have_the_requested_distance() {
        let level = 6;
        let m = DensityOperator::from_pure(&magic_state(level)).unwrap();
        let rho = perturbed_input(level, 0.01, 0.6, C64::new(0.0, 0.8)).unwrap();
        assert!((rho.trace_distance(&m).unwrap() - 0.01).abs() < 1e-14);
    }

    #[test]
    fn plus_inputs_stay_within_bound() {
        let t = plus_input_trial(5, 1e-3, 1e-5).unwrap();
        assert!(t.observed <= t.bound, "{t:?}");
    }
}
