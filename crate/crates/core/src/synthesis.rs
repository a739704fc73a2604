//! Gate-synthesis comparators, precision conversions and angle approximation.

use std::f64::consts::{PI, SQRT_2};
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cost::Supply;
use crate::error::{Error, Result};
use crate::quantum::theta;

/// Expected T-count of probabilistic circuits with fallback at diamond precision `eps_gs`.
pub fn pqf_tcount(eps_gs: f64) -> Result<f64> {
    if !(eps_gs > 0.0 && eps_gs < 1.0) {
        return Err(Error::InvalidArgument(format!("eps_gs={eps_gs} outside (0, 1)")));
    }
    let l = (SQRT_2 / eps_gs).log2();
    Ok(l + 4.0 * l.log2() + 1.187)
}

pub trait TCount {
    fn tcount(&self, eps: f64) -> Result<f64>;
    fn name(&self) -> &'static str;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SrRecord {
    pub epsilon: f64,
    pub tcount: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angle: Option<f64>,
}

/// Tabulated T-counts, sorted by decreasing precision requirement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SrTable {
    records: Vec<SrRecord>,
}

impl SrTable {
    pub fn new(mut records: Vec<SrRecord>) -> Result<Self> {
        for r in &records {
            if !(r.epsilon > 0.0 && r.epsilon < 1.0) {
                return Err(Error::Table(format!("epsilon {} outside (0, 1)", r.epsilon)));
            }
            if !(r.tcount.is_finite() && r.tcount >= 0.0) {
                return Err(Error::Table(format!("bad tcount {} at epsilon {}", r.tcount, r.epsilon)));
            }
        }
        records.sort_by(|a, b| a.epsilon.total_cmp(&b.epsilon));
        Ok(Self { records })
    }

    /// Reads `epsilon,tcount[,angle]` with a header row.
    pub fn from_reader(reader: impl Read) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers()?.clone();
        let names: Vec<&str> = headers.iter().collect();
        if names.len() < 2 || names[0] != "epsilon" || names[1] != "tcount" || (names.len() == 3 && names[2] != "angle") || names.len() > 3 {
            return Err(Error::Table(format!("expected header epsilon,tcount[,angle], got {}", names.join(","))));
        }
        let records = rdr.deserialize().collect::<std::result::Result<Vec<SrRecord>, _>>()?;
        Self::new(records)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_reader(std::fs::File::open(path)?)
    }

    pub fn records(&self) -> &[SrRecord] {
        &self.records
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

impl TCount for SrTable {
    /// Smallest count among records at least as strict as `eps`; a circuit
    /// meeting a stricter precision meets this one too.
    fn tcount(&self, eps: f64) -> Result<f64> {
        if self.records.is_empty() {
            return Err(Error::Table("empty table".into()));
        }
        let stricter = self.records.partition_point(|r| r.epsilon <= eps);
        if stricter == 0 {
            return Err(Error::Table(format!("epsilon {eps:e} below table range")));
        }
        Ok(self.records[..stricter].iter().map(|r| r.tcount).fold(f64::INFINITY, f64::min))
    }

    fn name(&self) -> &'static str {
        "sr-table"
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SynthesisModel {
    Pqf,
    SrTable { table: SrTable },
    SrAnalytic { c: f64 },
}

impl SynthesisModel {
    pub fn sr_analytic() -> Self {
        SynthesisModel::SrAnalytic { c: 3.0 }
    }
}

impl TCount for SynthesisModel {
    fn tcount(&self, eps: f64) -> Result<f64> {
        match self {
            SynthesisModel::Pqf => pqf_tcount(eps),
            SynthesisModel::SrTable { table } => table.tcount(eps),
            SynthesisModel::SrAnalytic { c } => {
                if !(eps > 0.0 && eps < 1.0) {
                    return Err(Error::InvalidArgument(format!("eps={eps} outside (0, 1)")));
                }
                Ok(c * (1.0 / eps).log2())
            }
        }
    }

    fn name(&self) -> &'static str {
        match self {
            SynthesisModel::Pqf => "pqf",
            SynthesisModel::SrTable { .. } => "sr-table",
            SynthesisModel::SrAnalytic { .. } => "sr-analytic",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GsCost {
    pub cost: f64,
    pub tcount: f64,
    pub eps_gs: f64,
    /// The level-3 supply used for every T gate.
    pub m3: Supply,
    /// `ε_GS + 𝔗·ε₃`.
    pub error: f64,
}

/// Synthesis points tried per decade of `ε_GS` below the target.
const GS_PER_DECADE: u32 = 200;
const GS_DECADES: u32 = 12;

/// Cheapest `𝔗(ε_GS)·𝔠(M₃, ε₃)` with `ε_GS + 𝔗·ε₃ ≤ target`.
pub fn gs_rotation_cost(model: &impl TCount, m3: &[Supply], target: f64) -> Result<GsCost> {
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::InvalidArgument(format!("target {target} outside (0, 1)")));
    }
    let mut splits: Vec<f64> =
        (1..=GS_PER_DECADE * GS_DECADES).map(|i| target * 10f64.powf(-(i as f64) / GS_PER_DECADE as f64)).collect();
    splits.push(0.5 * target);
    let counts: Vec<(f64, f64)> = splits.iter().filter_map(|&e| model.tcount(e).ok().map(|t| (e, t))).collect();
    let mut best: Option<GsCost> = None;
    for s in m3 {
        for &(eps_gs, t) in &counts {
            let error = eps_gs + t * s.error;
            if error > target {
                continue;
            }
            let cand = GsCost { cost: t * s.cost, tcount: t, eps_gs, m3: *s, error };
            if best.map_or(true, |b| cand.cost < b.cost || (cand.cost == b.cost && cand.error < b.error)) {
                best = Some(cand);
            }
        }
    }
    best.ok_or(Error::Unreachable { level: 3, target })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    /// Half the diamond distance between channels (`ε_GS`).
    Diamond,
    /// Operator-norm distance of unitaries.
    Spectral,
    /// `√(1 − ½ tr U†V)`.
    Pqf,
    /// Rotation angle `φ` of `U†V`.
    Angle,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrecisionValue {
    pub value: f64,
    pub metric: Metric,
}

/// Largest angle for which the small-angle identification holds.
pub const MAX_ANGLE: f64 = 0.1;

fn to_angle(p: PrecisionValue) -> Result<f64> {
    if !(p.value >= 0.0 && p.value.is_finite()) {
        return Err(Error::OutsideValidity { value: p.value });
    }
    let half_sin = |v: f64| if v <= 1.0 { Ok(2.0 * v.asin()) } else { Err(Error::OutsideValidity { value: p.value }) };
    let phi = match p.metric {
        Metric::Angle => p.value,
        Metric::Spectral | Metric::Diamond => half_sin(p.value / 2.0)?,
        Metric::Pqf => half_sin(p.value / SQRT_2)?,
    };
    if phi > MAX_ANGLE {
        return Err(Error::OutsideValidity { value: p.value });
    }
    Ok(phi)
}

/// Converts through the angle. Diamond precision is identified with the
/// spectral one, which it matches to leading order.
pub fn convert_precision(p: PrecisionValue, to: Metric) -> Result<PrecisionValue> {
    let phi = to_angle(p)?;
    let s = (phi / 2.0).sin();
    let value = match to {
        Metric::Angle => phi,
        Metric::Spectral | Metric::Diamond => 2.0 * s,
        Metric::Pqf => SQRT_2 * s,
    };
    Ok(PrecisionValue { value, metric: to })
}

/// Bounds `|sin φ| ≤ ε_GS ≤ 2|sin(φ/2)|`.
pub fn diamond_bracket(phi: f64) -> (f64, f64) {
    (phi.sin().abs(), 2.0 * (phi / 2.0).sin().abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct AngleApprox {
    /// Smallest `ℓ` with `π/2^ℓ ≤ tol`.
    pub level: u32,
    /// Nearest multiple of `θ_ℓ`.
    pub n: u64,
    /// The same angle with `n` odd (or zero).
    pub reduced_level: u32,
    pub reduced_n: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AngleResult {
    #[serde(flatten)]
    pub approx: AngleApprox,
    pub achieved_error: f64,
}

/// Largest level handled; `n` must fit a `u64` below `2^{ℓ+1}`.
const MAX_LEVEL: u32 = 60;

pub fn approximate_angle(phi: f64, tol: f64) -> Result<AngleResult> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tol={tol} must be positive")));
    }
    if !(0.0..2.0 * PI).contains(&phi) {
        return Err(Error::InvalidArgument(format!("phi={phi} outside [0, 2π)")));
    }
    let mut level = 1;
    while PI / 2f64.powi(level as i32) > tol {
        level += 1;
        if level > MAX_LEVEL {
            return Err(Error::InvalidArgument(format!("tol={tol:e} needs more than {MAX_LEVEL} levels")));
        }
    }
    let n = (phi / theta(level)).round() as u64;
    let achieved_error = (phi - n as f64 * theta(level)).abs();
    let (mut rl, mut rn) = (level, n);
    while rn > 0 && rn % 2 == 0 && rl > 1 {
        rn /= 2;
        rl -= 1;
    }
    Ok(AngleResult { approx: AngleApprox { level, n, reduced_level: rl, reduced_n: rn }, achieved_error })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pqf_values() {
        assert!((pqf_tcount(1e-10).unwrap() - 55.21).abs() < 0.01);
        assert!((pqf_tcount(1e-15).unwrap() - 74.12).abs() < 0.01);
        assert!(pqf_tcount(1e-10).unwrap() < pqf_tcount(1e-20).unwrap());
        assert!(pqf_tcount(1.0).is_err());
    }

    #[test]
    fn sr_models() {
        assert!((SynthesisModel::sr_analytic().tcount(1e-10).unwrap() - 99.66).abs() < 0.01);
        let t = SrTable::new(vec![
            SrRecord { epsilon: 1e-10, tcount: 102.0, angle: None },
            SrRecord { epsilon: 1e-11, tcount: 114.0, angle: None },
        ])
        .unwrap();
        assert_eq!(t.tcount(1e-10).unwrap(), 102.0);
        assert_eq!(t.tcount(5e-11).unwrap(), 114.0);
        assert_eq!(t.tcount(1e-3).unwrap(), 102.0);
        assert!(t.tcount(1e-12).is_err());
        assert!(SrTable::new(vec![]).unwrap().tcount(0.1).is_err());
    }

    #[test]
    fn sr_csv() {
        let t = SrTable::from_reader("epsilon,tcount\n1e-10,102\n1e-11, 114\n".as_bytes()).unwrap();
        assert_eq!(t.records().len(), 2);
        assert!(SrTable::from_reader("eps,t\n1e-10,102\n".as_bytes()).is_err());
        assert!(SrTable::from_reader("epsilon,tcount\n2,102\n".as_bytes()).is_err());
        let empty = SrTable::from_reader("epsilon,tcount,angle\n".as_bytes()).unwrap();
        assert!(empty.is_empty());
    }

    #[test]
    fn precision_conversions() {
        let phi = PrecisionValue { value: 1e-6, metric: Metric::Angle };
        let sr = convert_precision(phi, Metric::Spectral).unwrap();
        let pqf = convert_precision(phi, Metric::Pqf).unwrap();
        assert!((sr.value - 1e-6).abs() < 1e-15);
        assert!((pqf.value - 7.0710678e-7).abs() < 1e-13);
        let back = convert_precision(convert_precision(pqf, Metric::Angle).unwrap(), Metric::Pqf).unwrap();
        assert!((back.value - pqf.value).abs() < 1e-12 * pqf.value);
        assert!(convert_precision(PrecisionValue { value: 0.2, metric: Metric::Angle }, Metric::Pqf).is_err());
        let (lo, hi) = diamond_bracket(1e-3);
        assert!(lo <= hi && (hi - lo) < 1e-9);
    }

    #[test]
    fn angles() {
        assert_eq!(approximate_angle(0.3, 1e-10).unwrap().approx.level, 35);
        let r = approximate_angle(0.1, 1e-3).unwrap();
        assert_eq!((r.approx.level, r.approx.n), (12, 130));
        assert_eq!((r.approx.reduced_level, r.approx.reduced_n), (11, 65));
        assert!((r.achieved_error - 2.91e-4).abs() < 1e-6);
        let r = approximate_angle(theta(5), 1e-3).unwrap();
        assert_eq!(r.achieved_error, 0.0);
        assert_eq!((r.approx.reduced_level, r.approx.reduced_n), (5, 1));
        assert!(approximate_angle(0.1, 0.0).is_err());
        assert!(approximate_angle(7.0, 0.1).is_err());
    }

    #[test]
    fn gs_split_respects_target() {
        let m3 = [Supply::new(1e-3, 1.0), Supply::new(1e-9, 6.0), Supply::new(1e-18, 25.0)];
        let g = gs_rotation_cost(&SynthesisModel::Pqf, &m3, 1e-10).unwrap();
        assert!(g.eps_gs + g.tcount * g.m3.error <= 1e-10);
        assert!(gs_rotation_cost(&SynthesisModel::Pqf, &m3[..1], 1e-10).is_err());
    }
}
