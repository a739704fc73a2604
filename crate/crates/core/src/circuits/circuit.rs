//! Gate lists for the two distillation rounds.
//!
//! Register layout: index 0 is the control `c`, indices 1..4 are the code
//! qubits. Qubits 3 and 4 carry the noisy inputs and the two outputs.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::{Gate, Pauli};

use super::encoder::build_encoder;

pub const CONTROL: usize = 0;
pub const WIDTH: usize = 5;
pub const OUTPUTS: [usize; 2] = [3, 4];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProtocolKind {
    /// Compressed round with 8 noisy level-3 sites.
    Mek,
    /// Uncompressed round with 16 noisy level-3 sites.
    Dp,
}

impl std::str::FromStr for ProtocolKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mek" | "mekl" => Ok(Self::Mek),
            "dp" | "dpl" => Ok(Self::Dp),
            other => Err(Error::InvalidArgument(format!("unknown protocol {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preparation {
    Plus,
    Zero,
    /// Noisy `|M_ℓ⟩`; the noise is supplied by the simulator.
    Magic,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Element {
    Prepare { qubit: usize, state: Preparation },
    Clifford(Arc<Gate>),
    /// `R_3` (or `R_3†`) with a possible Y flip right after it.
    NoisyR3 { site: usize, qubit: usize, dagger: bool },
    /// `H_ℓ = R_{ℓ−1}·X`: X first, then the rotation, then a possible `iY` flip.
    Pivot { qubit: usize, level: u32 },
    Postselect { qubit: usize, observable: Pauli, outcome: i8 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    kind: ProtocolKind,
    level: u32,
    elements: Vec<Element>,
    pivot_angle_sign: f64,
}

/// Perturbations for negative-control runs.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Faults {
    /// Builds the pivot as `R_{ℓ−1}†·X` instead of `R_{ℓ−1}·X`.
    pub flip_pivot_sign: bool,
}

impl Circuit {
    pub fn kind(&self) -> ProtocolKind {
        self.kind
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn width(&self) -> usize {
        WIDTH
    }

    pub fn noisy_site_count(&self) -> usize {
        self.elements.iter().filter(|e| matches!(e, Element::NoisyR3 { .. })).count()
    }

    pub fn pivot_count(&self) -> usize {
        self.elements.iter().filter(|e| matches!(e, Element::Pivot { .. })).count()
    }

    /// Level-3 states consumed per attempt: noisy sites plus the two inputs.
    pub fn level3_consumption(&self) -> usize {
        self.noisy_site_count() + if self.level == 3 { 2 } else { 0 }
    }

    /// The ideal unitary of an element, or `None` for preparations and measurements.
    pub fn element_gate(&self, element: &Element) -> Option<Gate> {
        match element {
            Element::Clifford(g) => Some((**g).clone()),
            Element::NoisyR3 { qubit, dagger, .. } => {
                let r = Gate::r(3, *qubit);
                Some(if *dagger { r.adjoint() } else { r })
            }
            Element::Pivot { qubit, level } => Some(self.pivot_rotation(*qubit, *level)),
            _ => None,
        }
    }

    /// The `R_{ℓ−1}` half of the pivot, applied after `X`.
    pub fn pivot_rotation(&self, qubit: usize, level: u32) -> Gate {
        Gate::rot_y(self.pivot_angle_sign * crate::quantum::theta(level - 1), qubit)
    }

    /// Unitary part of the circuit between preparations and measurements.
    pub fn ideal_unitary(&self) -> Result<nalgebra::DMatrix<crate::quantum::C64>> {
        let dim = 1usize << WIDTH;
        let mut u = nalgebra::DMatrix::identity(dim, dim);
        for e in &self.elements {
            if let Element::Pivot { qubit, .. } = e {
                Gate::x(*qubit).apply_to_columns(&mut u, WIDTH)?;
            }
            if let Some(g) = self.element_gate(e) {
                g.apply_to_columns(&mut u, WIDTH)?;
            }
        }
        Ok(u)
    }
}

fn check_level(level: u32) -> Result<()> {
    if level < 3 {
        return Err(Error::LevelTooLow { level, min: 3 });
    }
    Ok(())
}

struct Builder {
    elements: Vec<Element>,
    sites: usize,
    encoder: Arc<Gate>,
    decoder: Arc<Gate>,
}

impl Builder {
    fn new() -> Result<Self> {
        let (_, e) = build_encoder(&[1, 2, 3, 4])?;
        let decoder = Arc::new(e.adjoint());
        let mut b = Self { elements: Vec::new(), sites: 0, encoder: Arc::new(e), decoder };
        b.push(Element::Prepare { qubit: CONTROL, state: Preparation::Plus });
        b.push(Element::Prepare { qubit: 1, state: Preparation::Zero });
        b.push(Element::Prepare { qubit: 2, state: Preparation::Zero });
        b.push(Element::Prepare { qubit: 3, state: Preparation::Magic });
        b.push(Element::Prepare { qubit: 4, state: Preparation::Magic });
        Ok(b)
    }

    fn push(&mut self, e: Element) {
        self.elements.push(e);
    }

    fn clifford(&mut self, g: Gate) {
        self.push(Element::Clifford(Arc::new(g)));
    }

    fn encode(&mut self) {
        self.push(Element::Clifford(self.encoder.clone()));
    }

    fn decode(&mut self) {
        self.push(Element::Clifford(self.decoder.clone()));
    }

    fn noisy(&mut self, qubit: usize, dagger: bool) {
        self.sites += 1;
        self.push(Element::NoisyR3 { site: self.sites, qubit, dagger });
    }

    /// Controlled-Hadamard as `R_3 · CX · R_3†`.
    fn controlled_h(&mut self, target: usize) {
        self.noisy(target, true);
        self.clifford(Gate::cx(CONTROL, target));
        self.noisy(target, false);
    }

    fn finish(mut self, kind: ProtocolKind, level: u32, faults: Faults) -> Circuit {
        self.push(Element::Postselect { qubit: CONTROL, observable: Pauli::X, outcome: 1 });
        self.push(Element::Postselect { qubit: 1, observable: Pauli::Z, outcome: 1 });
        self.push(Element::Postselect { qubit: 2, observable: Pauli::Z, outcome: 1 });
        let pivot_angle_sign = if faults.flip_pivot_sign { -1.0 } else { 1.0 };
        Circuit { kind, level, elements: self.elements, pivot_angle_sign }
    }
}

/// Uncompressed round: two transversal controlled-Hadamard layers around the pivot.
pub fn build_dpl_circuit(level: u32) -> Result<Circuit> {
    build_dpl_circuit_with(level, Faults::default())
}

pub fn build_dpl_circuit_with(level: u32, faults: Faults) -> Result<Circuit> {
    check_level(level)?;
    let mut b = Builder::new()?;
    b.encode();
    for q in 1..=4 {
        b.controlled_h(q);
    }
    b.decode();
    b.push(Element::Pivot { qubit: 4, level });
    b.encode();
    for q in 1..=4 {
        b.controlled_h(q);
    }
    b.decode();
    Ok(b.finish(ProtocolKind::Dp, level, faults))
}

/// Compressed round with 8 noisy level-3 sites.
///
/// Relative to the uncompressed round, the controlled-Hadamards on qubit 2
/// cancel and those on qubit 1 reduce to a Clifford `R_2`-conjugated CX pair.
pub fn build_mekl_circuit(level: u32) -> Result<Circuit> {
    build_mekl_circuit_with(level, Faults::default())
}

pub fn build_mekl_circuit_with(level: u32, faults: Faults) -> Result<Circuit> {
    check_level(level)?;
    let mut b = Builder::new()?;
    b.encode();
    b.clifford(Gate::r(2, 1).adjoint());
    b.clifford(Gate::cx(CONTROL, 1));
    for q in 3..=4 {
        b.controlled_h(q);
    }
    b.clifford(Gate::r(2, 1));
    b.decode();
    b.push(Element::Pivot { qubit: 4, level });
    b.encode();
    for q in 3..=4 {
        b.controlled_h(q);
    }
    b.clifford(Gate::cx(CONTROL, 1));
    b.decode();
    Ok(b.finish(ProtocolKind::Mek, level, faults))
}

pub fn build_circuit(kind: ProtocolKind, level: u32) -> Result<Circuit> {
    match kind {
        ProtocolKind::Mek => build_mekl_circuit(level),
        ProtocolKind::Dp => build_dpl_circuit(level),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn site_counts() {
        for level in 3..=9 {
            let mek = build_mekl_circuit(level).unwrap();
            let dp = build_dpl_circuit(level).unwrap();
            assert_eq!(mek.noisy_site_count(), 8);
            assert_eq!(dp.noisy_site_count(), 16);
            assert_eq!(mek.pivot_count(), 1);
            assert_eq!(dp.pivot_count(), 1);
        }
        assert_eq!(build_dpl_circuit(3).unwrap().level3_consumption(), 18);
        assert_eq!(build_mekl_circuit(3).unwrap().level3_consumption(), 10);
    }

    #[test]
    fn low_levels_are_rejected() {
        assert!(matches!(build_mekl_circuit(2), Err(Error::LevelTooLow { .. })));
        assert!(build_dpl_circuit(1).is_err());
    }

    #[test]
    fn site_labels_are_sequential() {
        let c = build_dpl_circuit(5).unwrap();
        let sites: Vec<usize> = c
            .elements()
            .iter()
            .filter_map(|e| match e {
                Element::NoisyR3 { site, .. } => Some(*site),
                _ => None,
            })
            .collect();
        assert_eq!(sites, (1..=16).collect::<Vec<_>>());
    }
}
