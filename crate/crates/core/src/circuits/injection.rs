use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};

use super::circuit::ProtocolKind;

/// Expected magic-state consumption of one injected `R_ℓ`.
///
/// Each failed injection calls for a correction one level down, which happens
/// with probability ½, until the correction is the Clifford `R_2`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InjectionPlan {
    pub level: u32,
    /// `(level k, expected count 2^{k−ℓ})` for `k = ℓ` down to 3.
    pub consumption: Vec<(u32, f64)>,
}

impl InjectionPlan {
    pub fn total(&self) -> f64 {
        self.consumption.iter().map(|(_, c)| c).sum()
    }
}

pub fn injection_plan(level: u32) -> Result<InjectionPlan> {
    if level < 3 {
        return Err(Error::LevelTooLow { level, min: 3 });
    }
    let consumption = (3..=level).rev().map(|k| (k, 0.5f64.powi((level - k) as i32))).collect();
    Ok(InjectionPlan { level, consumption })
}

/// Expected per-attempt inputs of one round, keyed by level.
pub fn round_cocktail(kind: ProtocolKind, level: u32) -> Result<BTreeMap<u32, f64>> {
    if level < 3 {
        return Err(Error::LevelTooLow { level, min: 3 });
    }
    let sites = match kind {
        ProtocolKind::Mek => 8.0,
        ProtocolKind::Dp => 16.0,
    };
    let mut out = BTreeMap::new();
    *out.entry(3).or_insert(0.0) += sites;
    *out.entry(level).or_insert(0.0) += 2.0;
    if level > 3 {
        for (k, c) in injection_plan(level - 1)?.consumption {
            *out.entry(k).or_insert(0.0) += c;
        }
    }
    Ok(out)
}
