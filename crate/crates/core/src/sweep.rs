//! Rotation cost against level at a fixed target, next to the synthesis comparators.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::cost::{CostTable, NodeId, Recipe, Resource, Supply};
use crate::dilution::critical_level;
use crate::error::{Error, Result};
use crate::synthesis::{gs_rotation_cost, GsCost, SynthesisModel};

/// How the `M_ℓ` state behind a rotation was made.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    /// Rounds at this level fed by raw states, or diluted raw states.
    Distill,
    /// A single round at this level fed by diluted states, reaching an error
    /// below `ε_raw²` that one round on raw inputs cannot.
    Mixed,
    /// No round at this level: dilution or `|+⟩` substitution.
    Dilute,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Distill => "distill",
            Regime::Mixed => "mixed",
            Regime::Dilute => "dilute",
        }
    }
}

fn state_of(table: &CostTable, id: NodeId) -> NodeId {
    match table.nodes[id].recipe {
        Recipe::Inject { state, .. } => state,
        _ => id,
    }
}

/// Regime of the rotation or magic state at `id`.
pub fn regime(table: &CostTable, id: NodeId) -> Regime {
    let mut cur = state_of(table, id);
    let level = table.nodes[cur].level;
    let mut rounds = 0;
    while let Recipe::MeklRound { state, .. } = table.nodes[cur].recipe {
        if table.nodes[state].level != level {
            break;
        }
        rounds += 1;
        cur = state;
    }
    let diluted = matches!(table.nodes[cur].recipe, Recipe::Dilute { .. } | Recipe::PlusSubstitute);
    match rounds {
        0 if diluted => Regime::Dilute,
        1 if diluted && table.nodes[state_of(table, id)].error < table.config.eps_raw.powi(2) => Regime::Mixed,
        _ => Regime::Distill,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RowStatus {
    Ok,
    Unreachable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub level: u32,
    pub target: f64,
    pub cost_mekl: Option<f64>,
    pub error_mekl: Option<f64>,
    pub cost_pqf: Option<f64>,
    pub cost_sr: Option<f64>,
    pub regime: Option<Regime>,
    pub status: RowStatus,
}

/// Comparator costs at one target; they do not depend on the level.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SynthesisComparison {
    pub target: f64,
    pub pqf: Option<GsCost>,
    pub sr: Option<GsCost>,
    pub sr_model: &'static str,
}

pub fn compare_synthesis(table: &CostTable, sr: &SynthesisModel, target: f64) -> Result<SynthesisComparison> {
    use crate::synthesis::TCount;
    let m3: Vec<Supply> =
        table.frontier(3, Resource::Magic)?.iter().map(|e| Supply::new(e.error, e.cost)).collect();
    Ok(SynthesisComparison {
        target,
        pqf: gs_rotation_cost(&SynthesisModel::Pqf, &m3, target).ok(),
        sr: gs_rotation_cost(sr, &m3, target).ok(),
        sr_model: sr.name(),
    })
}

/// One row per level from 3 to the top of the table.
pub fn sweep(table: &CostTable, target: f64, sr: &SynthesisModel) -> Result<Vec<SweepRow>> {
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::InvalidArgument(format!("target {target} outside (0, 1)")));
    }
    let cmp = compare_synthesis(table, sr, target)?;
    let pqf = cmp.pqf.map(|g| g.cost);
    let sr = cmp.sr.map(|g| g.cost);
    let mut rows = Vec::new();
    for level in 3..=table.config.l_max {
        let row = match table.cheapest_rotation(level, target) {
            Ok(e) => SweepRow {
                level,
                target,
                cost_mekl: Some(e.cost),
                error_mekl: Some(e.error),
                cost_pqf: pqf,
                cost_sr: sr,
                regime: Some(regime(table, e.node)),
                status: RowStatus::Ok,
            },
            Err(Error::Unreachable { .. }) => SweepRow {
                level,
                target,
                cost_mekl: None,
                error_mekl: None,
                cost_pqf: pqf,
                cost_sr: sr,
                regime: None,
                status: RowStatus::Unreachable,
            },
            Err(e) => return Err(e),
        };
        rows.push(row);
    }
    Ok(rows)
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

pub const CSV_HEADER: [&str; 8] =
    ["level", "target", "cost_mekl", "error_mekl", "cost_pqf", "cost_sr", "regime", "status"];

pub fn write_csv(rows: &[SweepRow], out: impl Write) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.level.to_string(),
            format!("{:e}", r.target),
            cell(r.cost_mekl),
            cell(r.error_mekl),
            cell(r.cost_pqf),
            cell(r.cost_sr),
            r.regime.map(|g| g.as_str().to_string()).unwrap_or_default(),
            match r.status {
                RowStatus::Ok => "ok".to_string(),
                RowStatus::Unreachable => "unreachable".to_string(),
            },
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// A maximal run of rows sharing a regime.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Region {
    pub regime: Regime,
    pub first: u32,
    pub last: u32,
}

/// Features of a sweep curve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepShape {
    pub target: f64,
    pub regions: Vec<Region>,
    /// Level of the largest rotation cost.
    pub peak_level: u32,
    /// First level of the closing dilute region, where the cost starts to fall.
    pub decay_onset: Option<u32>,
    /// `ℓ_c` evaluated at the target.
    pub critical_level: f64,
    /// Least-squares slope of `log₂ cost` over the closing dilute region.
    pub dilution_slope: Option<f64>,
    /// Smallest and largest one-level change of `log₂ cost` over the same rows.
    pub dilution_step_range: Option<(f64, f64)>,
}

impl SweepShape {
    pub fn has(&self, regime: Regime) -> bool {
        self.regions.iter().any(|r| r.regime == regime)
    }
}

pub fn analyze(rows: &[SweepRow]) -> Result<SweepShape> {
    let ok: Vec<(u32, f64, Regime)> =
        rows.iter().filter_map(|r| Some((r.level, r.cost_mekl?, r.regime?))).collect();
    let Some(first) = ok.first() else {
        return Err(Error::InvalidArgument("sweep has no reachable rows".into()));
    };
    let target = rows[0].target;
    let mut regions: Vec<Region> = Vec::new();
    for &(level, _, regime) in &ok {
        match regions.last_mut() {
            Some(r) if r.regime == regime && r.last + 1 == level => r.last = level,
            _ => regions.push(Region { regime, first: level, last: level }),
        }
    }
    let peak = ok.iter().fold(*first, |best, x| if x.1 > best.1 { *x } else { best });
    let decay_onset = regions.last().filter(|r| r.regime == Regime::Dilute).map(|r| r.first);
    let tail: Vec<(f64, f64)> = ok
        .iter()
        .filter(|x| decay_onset.is_some_and(|d| x.0 >= d) && x.1 > 0.0)
        .map(|x| (x.0 as f64, x.1.log2()))
        .collect();
    let dilution_slope = (tail.len() >= 2).then(|| {
        let n = tail.len() as f64;
        let mx = tail.iter().map(|p| p.0).sum::<f64>() / n;
        let my = tail.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = tail.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = tail.iter().map(|p| (p.0 - mx).powi(2)).sum();
        sxy / sxx
    });
    let steps: Vec<f64> = tail.windows(2).filter(|w| w[1].0 == w[0].0 + 1.0).map(|w| w[1].1 - w[0].1).collect();
    let dilution_step_range = (!steps.is_empty())
        .then(|| (steps.iter().cloned().fold(f64::INFINITY, f64::min), steps.iter().cloned().fold(f64::NEG_INFINITY, f64::max)));
    Ok(SweepShape {
        target,
        regions,
        peak_level: peak.0,
        decay_onset,
        critical_level: critical_level(target)?,
        dilution_slope,
        dilution_step_range,
    })
}

/// A sweep at several targets, with the comparator costs under `synthesis`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub eps_raw: f64,
    pub l_max: u32,
    pub rows: Vec<SweepRow>,
    pub shapes: Vec<SweepShape>,
    pub synthesis: Vec<SynthesisComparison>,
}

pub fn sweep_report(table: &CostTable, targets: &[f64], sr: &SynthesisModel) -> Result<SweepReport> {
    let mut rows = Vec::new();
    let mut shapes = Vec::new();
    let mut synthesis = Vec::new();
    for &t in targets {
        let r = sweep(table, t, sr)?;
        if let Ok(s) = analyze(&r) {
            shapes.push(s);
        }
        synthesis.push(compare_synthesis(table, sr, t)?);
        rows.extend(r);
    }
    Ok(SweepReport { eps_raw: table.config.eps_raw, l_max: table.config.l_max, rows, shapes, synthesis })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::{build_cost_table, TableConfig};

    #[test]
    fn rows_cover_every_level() {
        let table = build_cost_table(&TableConfig::new(1e-3, 8)).unwrap();
        let rows = sweep(&table, 1e-10, &SynthesisModel::sr_analytic()).unwrap();
        assert_eq!(rows.iter().map(|r| r.level).collect::<Vec<_>>(), (3..=8).collect::<Vec<_>>());
        assert!(rows.iter().all(|r| r.status == RowStatus::Ok && r.cost_pqf == rows[0].cost_pqf));
        assert_eq!(rows[0].regime, Some(Regime::Distill));

        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("level,target,cost_mekl,"));
        assert_eq!(text.lines().count(), 7);
        assert!(!text.contains('\r'));
    }

    #[test]
    fn unreachable_rows_are_marked() {
        let table = build_cost_table(&TableConfig::new(1e-3, 4)).unwrap();
        let rows = sweep(&table, 1e-200, &SynthesisModel::Pqf).unwrap();
        assert!(rows.iter().all(|r| r.status == RowStatus::Unreachable && r.cost_mekl.is_none()));
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        let line = String::from_utf8(buf).unwrap().lines().nth(1).unwrap().to_string();
        let cells: Vec<&str> = line.split(',').collect();
        assert_eq!((cells[2], cells[3], cells[6], cells[7]), ("", "", "", "unreachable"));
    }
}
