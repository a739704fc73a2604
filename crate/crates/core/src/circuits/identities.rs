//! Algebraic checks behind the compressed round.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::Result;
use crate::quantum::gate::{max_abs_diff, phase_aligned_distance};
use crate::quantum::{theta, Gate, PauliString, C64};

use super::circuit::{build_dpl_circuit_with, build_mekl_circuit_with, Circuit, Element, Faults, CONTROL, WIDTH};
use super::encoder::build_encoder;

pub const IDENTITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub deviation: f64,
}

impl Check {
    fn new(name: &'static str, deviation: f64) -> Self {
        Self { name, passed: deviation < IDENTITY_TOL, deviation }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompressionReport {
    pub level: u32,
    pub v_form: Check,
    pub v_anticommute: Check,
    pub q_anticommute: Check,
    pub d_equals_e: Check,
    pub r3_conjugation: Check,
}

impl CompressionReport {
    pub fn checks(&self) -> [&Check; 5] {
        [&self.v_form, &self.v_anticommute, &self.q_anticommute, &self.d_equals_e, &self.r3_conjugation]
    }

    pub fn all_passed(&self) -> bool {
        self.checks().iter().all(|c| c.passed)
    }
}

fn pauli(s: &str) -> DMatrix<C64> {
    s.parse::<PauliString>().expect("static Pauli string").to_matrix()
}

/// `V = E · H_ℓ^{(4)} · E†` on qubits 1..4.
pub fn pivot_in_code(level: u32, faults: Faults) -> Result<DMatrix<C64>> {
    let (_, e) = build_encoder(&[0, 1, 2, 3])?;
    let sign = if faults.flip_pivot_sign { -1.0 } else { 1.0 };
    let rot = Gate::rot_y(sign * theta(level - 1), 3).embed(4)?;
    let x4 = Gate::x(3).embed(4)?;
    Ok(e.unitary() * rot * x4 * e.unitary().adjoint())
}

/// `exp(−iθ_{ℓ−1} Y₁Z₃X₄) Z₁Z₃`.
pub fn expected_pivot_in_code(level: u32) -> Result<DMatrix<C64>> {
    let rot = Gate::pauli_exp(-theta(level - 1), &pauli("YIZX"), vec![0, 1, 2, 3])?;
    Ok(rot.unitary() * pauli("ZIZI"))
}

/// Kraus operator of the noiseless round from `(q3, q4)` in to `(q3, q4)` out.
///
/// After postselection the control is `|+⟩` and qubits 1, 2 are `|0⟩`, so the
/// accepted branch is a single Kraus operator.
pub fn zero_noise_kraus(circuit: &Circuit) -> Result<DMatrix<C64>> {
    let u = circuit.ideal_unitary()?;
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut k = DMatrix::<C64>::zeros(4, 4);
    for input in 0..4 {
        for output in 0..4 {
            let mut amp = C64::new(0.0, 0.0);
            for c_in in 0..2usize {
                for c_out in 0..2usize {
                    let col = (c_in << (WIDTH - 1 - CONTROL)) | input;
                    let row = (c_out << (WIDTH - 1 - CONTROL)) | output;
                    amp += u[(row, col)] * h * h;
                }
            }
            k[(output, input)] = amp;
        }
    }
    Ok(k)
}

/// `½(I + H_ℓ ⊗ H_ℓ)`.
pub fn parity_projector(level: u32) -> DMatrix<C64> {
    let h = Gate::h_level(level, 0).unitary().clone();
    (DMatrix::identity(4, 4) + h.kronecker(&h)) * C64::new(0.5, 0.0)
}

pub fn verify_compression_identities(level: u32) -> Result<CompressionReport> {
    verify_compression_identities_with(level, Faults::default())
}

pub fn verify_compression_identities_with(level: u32, faults: Faults) -> Result<CompressionReport> {
    let v = pivot_in_code(level, faults)?;
    let v_form = Check::new("v_form", max_abs_diff(&v, &expected_pivot_in_code(level)?));

    let y1 = pauli("YIII");
    let v_anticommute = Check::new("v_anticommute", max_abs_diff(&(&v * &y1), &-(&y1 * &v)));

    // Q = CX_{c,1} · exp(iθ₂Y₁) · V · CX_{c,1} on (c, 1, 2, 3, 4)
    let v5 = Gate::new(v.clone(), vec![1, 2, 3, 4])?.embed(WIDTH)?;
    let cx = Gate::cx(CONTROL, 1).embed(WIDTH)?;
    let r2 = Gate::r(2, 1).embed(WIDTH)?;
    let q = &cx * r2 * v5 * &cx;
    let y1_5 = Gate::y(1).embed(WIDTH)?;
    let q_anticommute = Check::new("q_anticommute", max_abs_diff(&(&q * &y1_5), &-(&y1_5 * &q)));

    let r3 = Gate::r(3, 0).embed(4)?;
    let lhs = &r3 * &v * r3.adjoint();
    let rhs = Gate::r(2, 0).embed(4)? * &v;
    let r3_conjugation = Check::new("r3_conjugation", max_abs_diff(&lhs, &rhs));

    let dp = zero_noise_kraus(&build_dpl_circuit_with(level, faults)?)?;
    let mek = zero_noise_kraus(&build_mekl_circuit_with(level, faults)?)?;
    let d_equals_e = Check::new("d_equals_e", phase_aligned_distance(&dp, &mek));

    Ok(CompressionReport { level, v_form, v_anticommute, q_anticommute, d_equals_e, r3_conjugation })
}

/// Acceptance of the noiseless round with Y flips after the listed level-3 sites.
///
/// Inputs are ideal `|M_ℓ⟩ ⊗ |M_ℓ⟩` and the pivot is perfect.
pub fn flipped_site_acceptance(circuit: &Circuit, flipped: &[usize]) -> Result<f64> {
    let n = WIDTH;
    let mut state = DMatrix::<C64>::zeros(1 << n, 1);
    let m = crate::quantum::magic_state(circuit.level());
    let h = std::f64::consts::FRAC_1_SQRT_2;
    for c in 0..2usize {
        for a in 0..2usize {
            for b in 0..2usize {
                state[((c << 4) | (a << 1) | b, 0)] = m[a] * m[b] * h;
            }
        }
    }
    for e in circuit.elements() {
        if let Element::Pivot { qubit, .. } = e {
            Gate::x(*qubit).apply_to_columns(&mut state, n)?;
        }
        if let Some(g) = circuit.element_gate(e) {
            g.apply_to_columns(&mut state, n)?;
        }
        if let Element::NoisyR3 { site, qubit, .. } = e {
            if flipped.contains(site) {
                Gate::y(*qubit).apply_to_columns(&mut state, n)?;
            }
        }
        if let Element::Postselect { qubit, observable, outcome } = e {
            let proj = (DMatrix::<C64>::identity(2, 2) + observable.matrix() * C64::new(*outcome as f64, 0.0))
                * C64::new(0.5, 0.0);
            crate::quantum::gate::apply_matrix_to_columns(&proj, &[*qubit], &mut state, n)?;
        }
    }
    Ok(state.norm_squared())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::circuit::{build_dpl_circuit, build_mekl_circuit};

    #[test]
    fn all_checks_pass() {
        for level in 3..=9 {
            let r = verify_compression_identities(level).unwrap();
            for c in r.checks() {
                assert!(c.passed, "level {level}: {} deviation {:e}", c.name, c.deviation);
            }
        }
    }

    #[test]
    fn flipped_pivot_is_caught() {
        let r = verify_compression_identities_with(5, Faults { flip_pivot_sign: true }).unwrap();
        assert!(!r.v_form.passed);
        assert!(!r.all_passed());
    }

    #[test]
    fn noiseless_round_is_the_parity_projection() {
        for level in 3..=8 {
            for circuit in [build_mekl_circuit(level).unwrap(), build_dpl_circuit(level).unwrap()] {
                let k = zero_noise_kraus(&circuit).unwrap();
                let p = parity_projector(level);
                assert!(max_abs_diff(&(k.adjoint() * &k), &p) < 1e-12);
            }
        }
    }

    #[test]
    fn single_flips_are_detected() {
        let c = build_mekl_circuit(5).unwrap();
        assert!((flipped_site_acceptance(&c, &[]).unwrap() - 1.0).abs() < 1e-12);
        for s in 1..=8 {
            assert!(flipped_site_acceptance(&c, &[s]).unwrap() < 1e-14, "site {s}");
        }
    }

    #[test]
    fn double_flip_acceptance() {
        for level in [3, 5, 8] {
            let circuit = build_mekl_circuit(level).unwrap();
            let (mut certain, mut rejected, mut partial, mut total) = (0, 0, 0, 0.0);
            for a in 1..=8 {
                for b in a + 1..=8 {
                    let p = flipped_site_acceptance(&circuit, &[a, b]).unwrap();
                    total += p;
                    if p < 1e-12 {
                        rejected += 1;
                    } else if p > 1.0 - 1e-12 {
                        certain += 1;
                    } else {
                        partial += 1;
                    }
                }
            }
            assert_eq!((certain, rejected, partial), (4, 8, 16), "level {level}");
            assert!((total - 12.0).abs() < 1e-12, "level {level}: {total}");
        }
    }
}
