//! Exact branch enumeration under diagonal noise.
//!
//! Every level-3 site either flips (Y) or not, the pivot either flips or not,
//! and each input is `|M_ℓ⟩` or `|M̄_ℓ⟩`. Each branch is a pure-state
//! computation, so the whole round reduces to a sum of rank-one terms. The
//! sums are grouped by (number of site flips, pivot flip, number of `|M̄_ℓ⟩`
//! inputs), which makes the result a polynomial in Bernstein form that can be
//! evaluated at any rates without cancellation.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::circuits::circuit::{Circuit, Element, Preparation, ProtocolKind, CONTROL, WIDTH};
use crate::error::{Error, Result};
use crate::quantum::gate::LocalOp;
use crate::quantum::{magic_state, magic_state_bar, Gate, C64};

use super::{NoiseSpec, RoundOutcome};

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct ClassSums {
    /// Accepted weight.
    pub acc: f64,
    /// Accepted weight with output qubit 3 (resp. 4) in `|M̄_ℓ⟩`.
    pub err: [f64; 2],
    /// Accepted `⟨M|ρ|M̄⟩` of each reduced output.
    #[serde(skip)]
    pub coh: [C64; 2],
}

enum BranchPoint {
    Site(usize),
    Pivot(usize),
}

struct Program {
    segments: Vec<(Vec<LocalOp>, BranchPoint)>,
    /// Rows: `(q3, q4)` output amplitudes after postselection.
    tail: DMatrix<C64>,
}

fn compile(circuit: &Circuit) -> Result<Program> {
    let mut segments = Vec::new();
    let mut ops: Vec<LocalOp> = Vec::new();
    let mut postselects = false;
    for e in circuit.elements() {
        match e {
            Element::Prepare { qubit, state } => {
                let expected = match qubit {
                    0 => Preparation::Plus,
                    1 | 2 => Preparation::Zero,
                    _ => Preparation::Magic,
                };
                if *state != expected {
                    return Err(Error::InvalidArgument(format!("unsupported preparation on qubit {qubit}")));
                }
            }
            Element::Clifford(g) => ops.push(LocalOp::from_gate(g, WIDTH)?),
            Element::NoisyR3 { qubit, .. } => {
                ops.push(LocalOp::from_gate(&circuit.element_gate(e).expect("gate"), WIDTH)?);
                segments.push((std::mem::take(&mut ops), BranchPoint::Site(*qubit)));
            }
            Element::Pivot { qubit, level } => {
                ops.push(LocalOp::from_gate(&Gate::x(*qubit), WIDTH)?);
                ops.push(LocalOp::from_gate(&circuit.pivot_rotation(*qubit, *level), WIDTH)?);
                segments.push((std::mem::take(&mut ops), BranchPoint::Pivot(*qubit)));
            }
            Element::Postselect { qubit, observable, outcome } => {
                let proj = (DMatrix::<C64>::identity(2, 2) + observable.matrix() * C64::new(*outcome as f64, 0.0))
                    * C64::new(0.5, 0.0);
                ops.push(LocalOp::new(proj, &[*qubit], WIDTH)?);
                postselects = true;
            }
        }
    }
    if !postselects {
        return Err(Error::InvalidArgument("circuit has no postselection".into()));
    }
    let dim = 1usize << WIDTH;
    let mut u = DMatrix::<C64>::identity(dim, dim);
    for op in &ops {
        op.apply_columns(&mut u);
    }
    // project the control on ⟨+| and qubits 1, 2 on ⟨0|
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut tail = DMatrix::<C64>::zeros(4, dim);
    for out in 0..4 {
        for c in 0..2usize {
            let row = (c << (WIDTH - 1 - CONTROL)) | out;
            for j in 0..dim {
                tail[(out, j)] += u[(row, j)] * h;
            }
        }
    }
    Ok(Program { segments, tail })
}

const IDEAL_CLASS_TOL: f64 = 1e-12;

/// Grouped branch sums for one circuit; independent of the noise rates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundModel {
    pub kind: ProtocolKind,
    pub level: u32,
    pub sites: usize,
    /// Indexed `[k][y][m]`: `k` flipped sites, pivot flip `y`, `m` inputs in `|M̄_ℓ⟩`.
    pub classes: Vec<[[ClassSums; 3]; 2]>,
}

impl RoundModel {
    pub fn build(circuit: &Circuit) -> Result<Self> {
        let program = compile(circuit)?;
        let sites = circuit.noisy_site_count();
        let level = circuit.level();
        let m = magic_state(level);
        let mb = magic_state_bar(level);
        let single = [&m, &mb];

        // column (a, b): |+⟩|0⟩|0⟩|ψ_a⟩|ψ_b⟩
        let dim = 1usize << WIDTH;
        let mut block = DMatrix::<C64>::zeros(dim, 4);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        for col in 0..4 {
            let (a, b) = (col >> 1, col & 1);
            for c in 0..2usize {
                for i in 0..2 {
                    for j in 0..2 {
                        block[((c << 4) | (i << 1) | j, col)] = single[a][i] * single[b][j] * h;
                    }
                }
            }
        }

        // output basis change to {M, M̄} ⊗ {M, M̄}
        let mut basis = DMatrix::<C64>::zeros(4, 4);
        for col in 0..4 {
            let (a, b) = (col >> 1, col & 1);
            for i in 0..2 {
                for j in 0..2 {
                    basis[((i << 1) | j, col)] = single[a][i] * single[b][j];
                }
            }
        }
        let readout = basis.adjoint() * &program.tail;

        let mut classes = vec![[[ClassSums::default(); 3]; 2]; sites + 1];
        let flips: Vec<LocalOp> = (0..WIDTH).map(|q| LocalOp::from_gate(&Gate::y(q), WIDTH)).collect::<Result<_>>()?;
        let mut walker = Walker { program: &program, readout: &readout, flips: &flips, classes: &mut classes };
        walker.descend(0, block, 0, 0);

        // The noiseless class is the parity projection: accepted with certainty
        // and error-free. Drop the ~1e-32 roundoff when the circuit is sound.
        let ideal = &mut classes[0][0][0];
        let roundoff = (ideal.acc - 1.0).abs().max(ideal.err[0]).max(ideal.err[1]);
        if roundoff < IDEAL_CLASS_TOL {
            *ideal = ClassSums { acc: 1.0, ..ClassSums::default() };
        }
        Ok(Self { kind: circuit.kind(), level, sites, classes })
    }

    fn weights(rate: f64, n: usize) -> Vec<f64> {
        (0..=n).map(|k| rate.powi(k as i32) * (1.0 - rate).powi((n - k) as i32)).collect()
    }

    pub fn evaluate(&self, noise: &NoiseSpec) -> Result<RoundOutcome> {
        noise.validate()?;
        let w3 = Self::weights(noise.eps3, self.sites);
        let wy = Self::weights(noise.eta, 1);
        let wl = Self::weights(noise.epsl, 2);
        let mut acc = 0.0;
        let mut rej = 0.0;
        let mut err = [0.0; 2];
        let mut coh = [C64::new(0.0, 0.0); 2];
        for (k, by_y) in self.classes.iter().enumerate() {
            let total_k = binomial(self.sites, k);
            for (y, by_m) in by_y.iter().enumerate() {
                for (m, s) in by_m.iter().enumerate() {
                    let w = w3[k] * wy[y] * wl[m];
                    if w == 0.0 {
                        continue;
                    }
                    acc += w * s.acc;
                    rej += w * (total_k * [1.0, 2.0, 1.0][m] - s.acc).max(0.0);
                    for q in 0..2 {
                        err[q] += w * s.err[q];
                        coh[q] += s.coh[q] * w;
                    }
                }
            }
        }
        if acc <= 0.0 {
            return Err(Error::ZeroAcceptance(acc));
        }
        Ok(RoundOutcome {
            delta: err[0] / acc,
            delta_partner: err[1] / acc,
            p_suc: acc.min(1.0),
            p_fail: rej,
            coherence: coh[0].norm().max(coh[1].norm()) / acc,
        })
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

struct Walker<'a> {
    program: &'a Program,
    readout: &'a DMatrix<C64>,
    flips: &'a [LocalOp],
    classes: &'a mut Vec<[[ClassSums; 3]; 2]>,
}

impl Walker<'_> {
    fn descend(&mut self, idx: usize, mut block: DMatrix<C64>, k: usize, y: usize) {
        if idx == self.program.segments.len() {
            self.leaf(&block, k, y);
            return;
        }
        let (ops, point) = &self.program.segments[idx];
        for op in ops {
            op.apply_columns(&mut block);
        }
        let (qubit, is_pivot) = match point {
            BranchPoint::Site(q) => (*q, false),
            BranchPoint::Pivot(q) => (*q, true),
        };
        let mut flipped = block.clone();
        self.flips[qubit].apply_columns(&mut flipped);
        if is_pivot {
            self.descend(idx + 1, block, k, y);
            self.descend(idx + 1, flipped, k, y + 1);
        } else {
            self.descend(idx + 1, block, k, y);
            self.descend(idx + 1, flipped, k + 1, y);
        }
    }

    fn leaf(&mut self, block: &DMatrix<C64>, k: usize, y: usize) {
        let out = self.readout * block;
        for col in 0..4 {
            let m = (col >> 1) + (col & 1);
            let v = out.column(col);
            let s = &mut self.classes[k][y][m];
            s.acc += v.norm_squared();
            s.err[0] += v[2].norm_sqr() + v[3].norm_sqr();
            s.err[1] += v[1].norm_sqr() + v[3].norm_sqr();
            s.coh[0] += v[0] * v[2].conj() + v[1] * v[3].conj();
            s.coh[1] += v[0] * v[1].conj() + v[2] * v[3].conj();
        }
    }
}

/// Builds the model for `circuit` and evaluates it once.
pub fn simulate_round(circuit: &Circuit, noise: &NoiseSpec) -> Result<RoundOutcome> {
    RoundModel::build(circuit)?.evaluate(noise)
}
