//! The four-qubit encoder, given by its action on Pauli generators.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::quantum::{Gate, Pauli, PauliString, C64};

/// A Clifford given by the images of `Z_j` and `X_j` for every qubit.
#[derive(Debug, Clone, PartialEq)]
pub struct CliffordSpec {
    z_images: Vec<PauliString>,
    x_images: Vec<PauliString>,
}

impl CliffordSpec {
    pub fn new(z_images: Vec<PauliString>, x_images: Vec<PauliString>) -> Result<Self> {
        let n = z_images.len();
        if n == 0 || x_images.len() != n {
            return Err(Error::InvalidArgument("need one Z and one X image per qubit".into()));
        }
        if let Some(bad) = z_images.iter().chain(&x_images).find(|p| p.width() != n) {
            return Err(Error::InvalidArgument(format!("image {bad} has the wrong width")));
        }
        let spec = Self { z_images, x_images };
        spec.check_commutation()?;
        Ok(spec)
    }

    /// The codespace encoder on qubits 1..4 (local indices 0..3), all signs `+`.
    pub fn encoder() -> Self {
        let p = |s: &str| s.parse::<PauliString>().expect("static table");
        Self::new(
            vec![p("ZZZZ"), p("XXXX"), p("ZIIZ"), p("XIIX")],
            vec![p("XIXX"), p("IZII"), p("XIXI"), p("ZIZI")],
        )
        .expect("encoder table is a valid Clifford")
    }

    pub fn width(&self) -> usize {
        self.z_images.len()
    }

    pub fn z_image(&self, qubit: usize) -> &PauliString {
        &self.z_images[qubit]
    }

    pub fn x_image(&self, qubit: usize) -> &PauliString {
        &self.x_images[qubit]
    }

    /// Images must reproduce the commutation pattern of the generators.
    fn check_commutation(&self) -> Result<()> {
        let n = self.width();
        let gens: Vec<(usize, bool, &PauliString)> = (0..n)
            .map(|q| (q, true, &self.z_images[q]))
            .chain((0..n).map(|q| (q, false, &self.x_images[q])))
            .collect();
        for (i, &(qa, za, a)) in gens.iter().enumerate() {
            for &(qb, zb, b) in &gens[i + 1..] {
                let expected = !(qa == qb && za != zb);
                if a.commutes_with(b) != expected {
                    return Err(Error::InvalidArgument(format!("images {a} and {b} break commutation")));
                }
            }
        }
        Ok(())
    }

    /// Dense unitary `U` with `U P U† = image(P)` for every generator.
    ///
    /// `U|0…0⟩` is the +1 common eigenvector of the Z images; the other columns
    /// follow from `U|b⟩ = Π_j image(X_j)^{b_j} U|0…0⟩`.
    pub fn synthesize(&self) -> Result<DMatrix<C64>> {
        let n = self.width();
        let dim = 1usize << n;
        let id = DMatrix::<C64>::identity(dim, dim);
        let half = C64::new(0.5, 0.0);
        let projector = self.z_images.iter().fold(id.clone(), |acc, z| acc * (&id + z.to_matrix()) * half);
        let mut vacuum = (0..dim)
            .map(|i| projector.column(i).into_owned())
            .find(|v| v.norm() > 0.1)
            .ok_or_else(|| Error::InvalidArgument("Z images have no common +1 eigenvector".into()))?;
        vacuum /= C64::new(vacuum.norm(), 0.0);
        if let Some(first) = vacuum.iter().find(|z| z.norm() > 1e-12).copied() {
            vacuum *= first.conj() / first.norm();
        }
        let x_mats: Vec<DMatrix<C64>> = self.x_images.iter().map(|p| p.to_matrix()).collect();
        let mut u = DMatrix::<C64>::zeros(dim, dim);
        for b in 0..dim {
            let mut col: DVector<C64> = vacuum.clone();
            for (j, x) in x_mats.iter().enumerate() {
                if b & (1 << (n - 1 - j)) != 0 {
                    col = x * col;
                }
            }
            u.set_column(b, &col);
        }
        let check = self.conjugation_deviation(&u);
        if check > 1e-12 {
            return Err(Error::InvalidArgument(format!("synthesized encoder misses its table by {check:e}")));
        }
        Ok(u)
    }

    /// Largest entrywise deviation of `U P U†` from the tabulated image over all generators.
    pub fn conjugation_deviation(&self, u: &DMatrix<C64>) -> f64 {
        let n = self.width();
        let mut worst = 0.0f64;
        for q in 0..n {
            for (letter, image) in [(Pauli::Z, &self.z_images[q]), (Pauli::X, &self.x_images[q])] {
                let g = PauliString::single(n, q, letter).expect("in range").to_matrix();
                let got = u * g * u.adjoint();
                worst = worst.max(crate::quantum::gate::max_abs_diff(&got, &image.to_matrix()));
            }
        }
        worst
    }
}

/// The encoder table together with a unitary realizing it on `support`.
pub fn build_encoder(support: &[usize]) -> Result<(CliffordSpec, Gate)> {
    let spec = CliffordSpec::encoder();
    let u = spec.synthesize()?;
    let gate = Gate::new(u, support.to_vec())?;
    Ok((spec, gate))
}
