//! Level-3 distillation protocols described by polynomial fits.
//!
//! These are data, not code: the defaults use leading-order forms and any
//! set can be replaced by a JSON file of the same shape.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `n_in → n_out` level-3 protocol with error and acceptance polynomials in the
/// input error `ε`. Coefficients are listed from the constant term upward.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Level3Protocol {
    pub id: String,
    pub n_in: u32,
    pub n_out: u32,
    pub delta_poly: Vec<f64>,
    pub psuc_poly: Vec<f64>,
}

fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

impl Level3Protocol {
    pub fn delta(&self, eps: f64) -> f64 {
        horner(&self.delta_poly, eps)
    }

    pub fn p_suc(&self, eps: f64) -> f64 {
        horner(&self.psuc_poly, eps)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidArgument(format!("protocol {}: {msg}", self.id)));
        if self.id.is_empty() {
            return Err(Error::InvalidArgument("protocol id is empty".into()));
        }
        if self.n_in == 0 || self.n_out == 0 || self.n_out > self.n_in {
            return bad("need 0 < n_out <= n_in");
        }
        if self.delta_poly.iter().chain(&self.psuc_poly).any(|c| !c.is_finite()) {
            return bad("non-finite coefficient");
        }
        if self.delta(0.0) != 0.0 {
            return bad("delta(0) must be 0");
        }
        if self.p_suc(0.0) != 1.0 {
            return bad("p_suc(0) must be 1");
        }
        Ok(())
    }

    /// Output error and expected input count per output at input error `eps`,
    /// or `None` where the fit is unusable (`p_suc ≤ 0` or a negative error).
    pub fn apply(&self, eps: f64) -> Option<(f64, f64)> {
        let p = self.p_suc(eps);
        let d = self.delta(eps);
        if !(p > 0.0 && p <= 1.0) || !(0.0..0.5).contains(&d) {
            return None;
        }
        Some((d, self.n_in as f64 / (self.n_out as f64 * p)))
    }

    pub fn reed_muller() -> Self {
        Self { id: "rm15".into(), n_in: 15, n_out: 1, delta_poly: vec![0.0, 0.0, 0.0, 35.0], psuc_poly: vec![1.0, -15.0] }
    }

    /// `3k+8 → 2k` with `δ = (1+3k)ε²`, `p = 1 − (3k+8)ε`.
    pub fn bravyi_haah(k: u32) -> Self {
        let k3 = 3.0 * k as f64;
        Self {
            id: format!("bh{k}"),
            n_in: 3 * k + 8,
            n_out: 2 * k,
            delta_poly: vec![0.0, 0.0, 1.0 + k3],
            psuc_poly: vec![1.0, -(k3 + 8.0)],
        }
    }

    pub fn defaults() -> Vec<Self> {
        vec![Self::reed_muller(), Self::bravyi_haah(1), Self::bravyi_haah(2), Self::bravyi_haah(4)]
    }
}

pub fn load_protocols(path: &Path) -> Result<Vec<Level3Protocol>> {
    let text = std::fs::read_to_string(path)?;
    parse_protocols(&text)
}

pub fn parse_protocols(text: &str) -> Result<Vec<Level3Protocol>> {
    let list: Vec<Level3Protocol> = serde_json::from_str(text)?;
    for p in &list {
        p.validate()?;
    }
    let mut ids: Vec<&str> = list.iter().map(|p| p.id.as_str()).collect();
    ids.sort_unstable();
    if ids.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidArgument("duplicate protocol id".into()));
    }
    Ok(list)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        for p in Level3Protocol::defaults() {
            p.validate().unwrap();
        }
        let bh = Level3Protocol::bravyi_haah(2);
        assert_eq!((bh.n_in, bh.n_out), (14, 4));
        assert!((bh.delta(1e-3) - 7e-6).abs() < 1e-18);
        assert!((bh.p_suc(1e-3) - 0.986).abs() < 1e-15);
        assert!((Level3Protocol::reed_muller().delta(1e-3) - 3.5e-8).abs() < 1e-20);
    }

    #[test]
    fn json_round_trip() {
        let text = serde_json::to_string(&Level3Protocol::defaults()).unwrap();
        assert_eq!(parse_protocols(&text).unwrap(), Level3Protocol::defaults());
        let bad = r#"[{"id":"x","n_in":2,"n_out":1,"delta_poly":[0.1],"psuc_poly":[1]}]"#;
        assert!(parse_protocols(bad).is_err());
        let dup = serde_json::to_string(&vec![Level3Protocol::reed_muller(), Level3Protocol::reed_muller()]).unwrap();
        assert!(parse_protocols(&dup).is_err());
    }

    #[test]
    fn unusable_regions() {
        assert!(Level3Protocol::reed_muller().apply(0.1).is_none());
        let (d, c) = Level3Protocol::reed_muller().apply(0.01).unwrap();
        assert!((d - 3.5e-5).abs() < 1e-18);
        assert!((c - 15.0 / 0.85).abs() < 1e-12);
    }
}
