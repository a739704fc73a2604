//! Signed Pauli strings.
//!
//! A [`PauliString`] is `i^k · P_0 ⊗ P_1 ⊗ … ⊗ P_{n-1}` with each `P_j` one of
//! `I, X, Y, Z`. Qubit 0 is the leftmost tensor factor, which is also the most
//! significant bit of a computational-basis index everywhere in this crate.

use std::fmt;
use std::ops::Mul;
use std::str::FromStr;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

use super::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn matrix(self) -> DMatrix<C64> {
        let o = C64::new(0.0, 0.0);
        let l = C64::new(1.0, 0.0);
        let i = C64::new(0.0, 1.0);
        match self {
            Pauli::I => DMatrix::from_row_slice(2, 2, &[l, o, o, l]),
            Pauli::X => DMatrix::from_row_slice(2, 2, &[o, l, l, o]),
            Pauli::Y => DMatrix::from_row_slice(2, 2, &[o, -i, i, o]),
            Pauli::Z => DMatrix::from_row_slice(2, 2, &[l, o, o, -l]),
        }
    }

    /// Single-qubit product `self · other` as `(i^k, letter)`.
    fn mul_single(self, other: Pauli) -> (u8, Pauli) {
        use Pauli::*;
        match (self, other) {
            (I, p) | (p, I) => (0, p),
            (a, b) if a == b => (0, I),
            (X, Y) => (1, Z),
            (Y, Z) => (1, X),
            (Z, X) => (1, Y),
            (Y, X) => (3, Z),
            (Z, Y) => (3, X),
            (X, Z) => (3, Y),
            _ => unreachable!(),
        }
    }

    fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    /// Overall phase as a power of `i`, reduced mod 4.
    phase: u8,
    letters: Vec<Pauli>,
}

impl PauliString {
    pub fn new(phase: u8, letters: Vec<Pauli>) -> Result<Self> {
        if letters.is_empty() {
            return Err(Error::InvalidArgument("Pauli string needs at least one qubit".into()));
        }
        Ok(Self { phase: phase % 4, letters })
    }

    pub fn identity(width: usize) -> Self {
        Self { phase: 0, letters: vec![Pauli::I; width.max(1)] }
    }

    /// `letter` on `qubit`, identity elsewhere.
    pub fn single(width: usize, qubit: usize, letter: Pauli) -> Result<Self> {
        if qubit >= width {
            return Err(Error::QubitOutOfRange { qubit, width });
        }
        let mut letters = vec![Pauli::I; width];
        letters[qubit] = letter;
        Ok(Self { phase: 0, letters })
    }

    /// Builds a string from `(qubit, letter)` pairs; repeated qubits multiply.
    pub fn from_sparse(width: usize, terms: &[(usize, Pauli)]) -> Result<Self> {
        let mut out = Self::identity(width);
        for &(q, p) in terms {
            out = &out * &Self::single(width, q, p)?;
        }
        Ok(out)
    }

    pub fn width(&self) -> usize {
        self.letters.len()
    }

    pub fn phase(&self) -> u8 {
        self.phase
    }

    pub fn phase_value(&self) -> C64 {
        match self.phase {
            0 => C64::new(1.0, 0.0),
            1 => C64::new(0.0, 1.0),
            2 => C64::new(-1.0, 0.0),
            _ => C64::new(0.0, -1.0),
        }
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.letters
    }

    pub fn with_phase(mut self, phase: u8) -> Self {
        self.phase = phase % 4;
        self
    }

    pub fn negate(&self) -> Self {
        Self { phase: (self.phase + 2) % 4, letters: self.letters.clone() }
    }

    pub fn weight(&self) -> usize {
        self.letters.iter().filter(|&&p| p != Pauli::I).count()
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        let anti = self
            .letters
            .iter()
            .zip(&other.letters)
            .filter(|(a, b)| **a != Pauli::I && **b != Pauli::I && a != b)
            .count();
        anti % 2 == 0
    }

    /// Equality up to the overall phase.
    pub fn same_letters(&self, other: &PauliString) -> bool {
        self.letters == other.letters
    }

    pub fn to_matrix(&self) -> DMatrix<C64> {
        let mut m = DMatrix::from_element(1, 1, self.phase_value());
        for p in &self.letters {
            m = m.kronecker(&p.matrix());
        }
        m
    }

    /// Recognises a dense matrix as a signed Pauli string.
    ///
    /// Returns `None` unless the matrix equals some `i^k P` entrywise within `tol`.
    pub fn from_matrix(m: &DMatrix<C64>, tol: f64) -> Option<Self> {
        let dim = m.nrows();
        if dim == 0 || m.ncols() != dim || !dim.is_power_of_two() {
            return None;
        }
        let n = dim.trailing_zeros() as usize;
        // Column 0 is i^k (-1)^0 |x>, which fixes the X part and the phase.
        let (xmask, v0) = (0..dim).map(|r| (r, m[(r, 0)])).max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))?;
        let phase = [C64::new(1.0, 0.0), C64::new(0.0, 1.0), C64::new(-1.0, 0.0), C64::new(0.0, -1.0)]
            .iter()
            .position(|p| (p - v0).norm() < tol)?;
        let mut letters = Vec::with_capacity(n);
        for q in 0..n {
            let bit = 1usize << (n - 1 - q);
            let col = bit;
            let v = m[(xmask ^ col, col)];
            // P|bit> = i^k (-1)^{z_q} |bit ^ xmask>
            let z = (v + v0).norm() < tol;
            let x = xmask & bit != 0;
            letters.push(Pauli::from_bits(x, z));
        }
        // Y = i X Z, so each Y letter contributes a factor i relative to the X^x Z^z form.
        let y_count = letters.iter().filter(|&&p| p == Pauli::Y).count() as u8;
        let phase = ((phase as u8) + 4 * 4 - y_count) % 4;
        let candidate = PauliString { phase, letters };
        let diff = (&candidate.to_matrix() - m).iter().map(|z| z.norm()).fold(0.0, f64::max);
        (diff < tol).then_some(candidate)
    }

    /// `U · self · U†` for a dense unitary on the full register.
    pub fn conjugate_by(&self, u: &DMatrix<C64>, tol: f64) -> Option<Self> {
        let m = u * self.to_matrix() * u.adjoint();
        Self::from_matrix(&m, tol)
    }
}

impl Mul for &PauliString {
    type Output = PauliString;

    fn mul(self, rhs: &PauliString) -> PauliString {
        assert_eq!(self.width(), rhs.width(), "Pauli strings of different widths");
        let mut phase = self.phase + rhs.phase;
        let letters = self
            .letters
            .iter()
            .zip(&rhs.letters)
            .map(|(&a, &b)| {
                let (k, p) = a.mul_single(b);
                phase += k;
                p
            })
            .collect();
        PauliString { phase: phase % 4, letters }
    }
}

impl Mul for PauliString {
    type Output = PauliString;

    fn mul(self, rhs: PauliString) -> PauliString {
        &self * &rhs
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = ["+", "+i", "-", "-i"][self.phase as usize];
        write!(f, "{prefix}")?;
        for p in &self.letters {
            write!(f, "{}", p.as_char())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    /// Parses `"XIZ"`, `"-iYY"`, `"+ZZ"`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (phase, rest) = if let Some(r) = s.strip_prefix("-i") {
            (3, r)
        } else if let Some(r) = s.strip_prefix("+i") {
            (1, r)
        } else if let Some(r) = s.strip_prefix('-') {
            (2, r)
        } else if let Some(r) = s.strip_prefix('+') {
            (0, r)
        } else if let Some(r) = s.strip_prefix('i') {
            (1, r)
        } else {
            (0, s)
        };
        let letters = rest
            .chars()
            .map(|c| match c {
                'I' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                other => Err(Error::InvalidArgument(format!("bad Pauli letter {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        PauliString::new(phase, letters)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn arb_pauli() -> impl Strategy<Value = Pauli> {
        prop_oneof![Just(Pauli::I), Just(Pauli::X), Just(Pauli::Y), Just(Pauli::Z)]
    }

    fn arb_string(n: usize) -> impl Strategy<Value = PauliString> {
        (0u8..4, prop::collection::vec(arb_pauli(), n)).prop_map(|(k, l)| PauliString::new(k, l).unwrap())
    }

    fn max_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
        (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn single_qubit_products() {
        let x: PauliString = "X".parse().unwrap();
        let y: PauliString = "Y".parse().unwrap();
        let z: PauliString = "Z".parse().unwrap();
        assert_eq!(&x * &y, "iZ".parse().unwrap());
        assert_eq!(&y * &x, "-iZ".parse().unwrap());
        assert_eq!(&z * &x, "iY".parse().unwrap());
    }

    #[test]
    fn parse_and_display() {
        let p: PauliString = "-iXZY".parse().unwrap();
        assert_eq!(p.to_string(), "-iXZY");
        assert!("XQ".parse::<PauliString>().is_err());
        assert!("".parse::<PauliString>().is_err());
    }

    proptest! {
        #[test]
        fn product_matches_matrix_product(a in arb_string(3), b in arb_string(3)) {
            let prod = &a * &b;
            prop_assert!(max_diff(&prod.to_matrix(), &(a.to_matrix() * b.to_matrix())) < 1e-12);
        }

        #[test]
        fn multiplication_is_associative(a in arb_string(2), b in arb_string(2), c in arb_string(2)) {
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        }

        #[test]
        fn squares_to_plus_or_minus_identity(a in arb_string(4)) {
            let sq = &a * &a;
            prop_assert!(sq.same_letters(&PauliString::identity(4)));
            prop_assert!(sq.phase() == 0 || sq.phase() == 2);
        }

        #[test]
        fn matrix_round_trip(a in arb_string(3)) {
            prop_assert_eq!(PauliString::from_matrix(&a.to_matrix(), 1e-9), Some(a));
        }

        #[test]
        fn commutation_agrees_with_matrices(a in arb_string(3), b in arb_string(3)) {
            let ab = a.to_matrix() * b.to_matrix();
            let ba = b.to_matrix() * a.to_matrix();
            prop_assert_eq!(a.commutes_with(&b), max_diff(&ab, &ba) < 1e-12);
        }
    }
}
