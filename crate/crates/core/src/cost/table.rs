//! Level-by-level cost tables with shared recipe trees.
//!
//! Every level keeps, per error bucket, the cheapest known magic state and
//! rotation. A level is seeded with raw states and diluted states from the
//! level below, then closed under distillation rounds until nothing in its
//! buckets improves. Rotations at a level combine its magic states with the
//! rotations one level down.

use std::collections::{BTreeMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuits::build_mekl_circuit;
use crate::dilution::{dilute, plus_substitute_error};
use crate::error::{Error, Result};
use crate::noise::RoundModel;

use super::grid::ErrorGrid;
use super::injection_error;
use super::kernel::{RoundKernel, SiteTable};
use super::protocols::Level3Protocol;

pub type NodeId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Resource {
    Magic,
    Rotation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Recipe {
    Raw,
    /// `M_2` or `R_2`.
    Clifford,
    /// `|+⟩` standing in for `|M_ℓ⟩`; never fed into other recipes.
    PlusSubstitute,
    Dilute { from: NodeId, lambda: f64 },
    MeklRound { state: NodeId, m3: NodeId, pivot: NodeId, p_suc: f64 },
    Level3Round { protocol: String, input: NodeId, inputs_per_output: f64 },
    Inject { state: NodeId, correction: NodeId },
}

impl Recipe {
    pub fn children(&self) -> Vec<NodeId> {
        match self {
            Recipe::Raw | Recipe::Clifford | Recipe::PlusSubstitute => vec![],
            Recipe::Dilute { from, .. } => vec![*from],
            Recipe::MeklRound { state, m3, pivot, .. } => vec![*state, *m3, *pivot],
            Recipe::Level3Round { input, .. } => vec![*input],
            Recipe::Inject { state, correction } => vec![*state, *correction],
        }
    }

    fn remap(&mut self, map: &[NodeId]) {
        match self {
            Recipe::Raw | Recipe::Clifford | Recipe::PlusSubstitute => {}
            Recipe::Dilute { from, .. } => *from = map[*from],
            Recipe::MeklRound { state, m3, pivot, .. } => {
                *state = map[*state];
                *m3 = map[*m3];
                *pivot = map[*pivot];
            }
            Recipe::Level3Round { input, .. } => *input = map[*input],
            Recipe::Inject { state, correction } => {
                *state = map[*state];
                *correction = map[*correction];
            }
        }
    }

    fn rank(&self) -> u8 {
        match self {
            Recipe::Clifford => 0,
            Recipe::PlusSubstitute => 1,
            Recipe::Raw => 2,
            Recipe::Dilute { .. } => 3,
            Recipe::Inject { .. } => 4,
            Recipe::Level3Round { .. } => 5,
            Recipe::MeklRound { .. } => 6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecipeNode {
    pub resource: Resource,
    pub level: u32,
    pub error: f64,
    pub cost: f64,
    /// Node count of the fully expanded recipe tree.
    pub size: f64,
    pub recipe: Recipe,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostEntry {
    pub level: u32,
    pub resource: Resource,
    pub error: f64,
    pub cost: f64,
    pub node: NodeId,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableConfig {
    pub eps_raw: f64,
    pub l_max: u32,
    pub grid: ErrorGrid,
    pub protocols: Vec<Level3Protocol>,
    /// Cap on closure passes per level.
    pub max_rounds: usize,
}

impl TableConfig {
    pub fn new(eps_raw: f64, l_max: u32) -> Self {
        Self { eps_raw, l_max, grid: ErrorGrid::default(), protocols: Level3Protocol::defaults(), max_rounds: 16 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps_raw > 0.0 && self.eps_raw < 0.5) {
            return Err(Error::RateOutOfRange { name: "eps_raw", value: self.eps_raw });
        }
        if self.l_max < 3 {
            return Err(Error::LevelTooLow { level: self.l_max, min: 3 });
        }
        ErrorGrid::new(self.grid.top, self.grid.floor, self.grid.per_decade)?;
        for p in &self.protocols {
            p.validate()?;
        }
        if self.max_rounds == 0 {
            return Err(Error::InvalidArgument("max_rounds must be positive".into()));
        }
        Ok(())
    }
}

/// Pareto frontiers of one level, each sorted by increasing cost.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelEntries {
    pub level: u32,
    pub magic: Vec<NodeId>,
    pub plus: Option<NodeId>,
    pub rotation: Vec<NodeId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostTable {
    pub config: TableConfig,
    pub nodes: Vec<RecipeNode>,
    /// Levels 2 through `l_max`, in order.
    pub levels: Vec<LevelEntries>,
}

#[derive(Debug, Clone)]
struct Cand {
    error: f64,
    cost: f64,
    size: f64,
    recipe: Recipe,
}

impl Cand {
    fn key(&self) -> (u8, [NodeId; 3]) {
        let mut ids = [0; 3];
        for (slot, id) in ids.iter_mut().zip(self.recipe.children()) {
            *slot = id;
        }
        (self.recipe.rank(), ids)
    }

    /// Cheaper, then more accurate, then smaller, then lower-numbered inputs.
    fn beats(&self, other: &Cand) -> bool {
        self.cost
            .total_cmp(&other.cost)
            .then(self.error.total_cmp(&other.error))
            .then(self.size.total_cmp(&other.size))
            .then(self.key().cmp(&other.key()))
            .is_lt()
    }
}

type Slots = Vec<Option<Cand>>;

fn offer(grid: &ErrorGrid, slots: &mut Slots, cand: Cand) {
    if !(cand.cost.is_finite() && cand.cost >= 0.0) {
        return;
    }
    if let Some(b) = grid.bucket(cand.error) {
        match &slots[b] {
            Some(cur) if !cand.beats(cur) => {}
            _ => slots[b] = Some(cand),
        }
    }
}

fn merge(grid: &ErrorGrid, mut a: Slots, b: Slots) -> Slots {
    for c in b.into_iter().flatten() {
        offer(grid, &mut a, c);
    }
    a
}

struct Builder<'a> {
    cfg: &'a TableConfig,
    grid: ErrorGrid,
    nodes: Vec<RecipeNode>,
}

/// Bucketed best entries of one resource at one level.
struct Buckets {
    slots: Vec<Option<NodeId>>,
}

impl<'a> Builder<'a> {
    fn push(&mut self, resource: Resource, level: u32, c: Cand) -> NodeId {
        self.nodes.push(RecipeNode { resource, level, error: c.error, cost: c.cost, size: c.size, recipe: c.recipe });
        self.nodes.len() - 1
    }

    fn as_cand(&self, id: NodeId) -> Cand {
        let n = &self.nodes[id];
        Cand { error: n.error, cost: n.cost, size: n.size, recipe: n.recipe.clone() }
    }

    /// Folds candidate winners into the buckets; returns whether anything changed.
    fn absorb(&mut self, resource: Resource, level: u32, buckets: &mut Buckets, winners: Slots) -> bool {
        let mut changed = false;
        for (b, cand) in winners.into_iter().enumerate() {
            let Some(cand) = cand else { continue };
            let better = match buckets.slots[b] {
                Some(id) => cand.beats(&self.as_cand(id)),
                None => true,
            };
            if better {
                let id = self.push(resource, level, cand);
                buckets.slots[b] = Some(id);
                changed = true;
            }
        }
        changed
    }

    /// Bucket entries that are strictly cheaper than every more accurate one,
    /// sorted by increasing cost.
    fn frontier(&self, buckets: &Buckets) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut best = f64::INFINITY;
        for id in buckets.slots.iter().rev().flatten() {
            if self.nodes[*id].cost < best {
                best = self.nodes[*id].cost;
                out.push(*id);
            }
        }
        out.reverse();
        out
    }

    fn empty_slots(&self) -> Slots {
        vec![None; self.grid.len()]
    }

    fn leaf(&mut self, resource: Resource, level: u32, error: f64, cost: f64, recipe: Recipe) -> NodeId {
        self.push(resource, level, Cand { error, cost, size: 1.0, recipe })
    }

    fn build_level(
        &mut self,
        level: u32,
        below: &LevelEntries,
        m3: &[NodeId],
        kernel: &RoundKernel,
    ) -> Result<LevelEntries> {
        let mut seeds = self.empty_slots();
        offer(&self.grid, &mut seeds, Cand { error: self.cfg.eps_raw, cost: 1.0, size: 1.0, recipe: Recipe::Raw });
        for &id in &below.magic {
            let n = &self.nodes[id];
            if n.error >= 0.5 {
                continue;
            }
            let d = dilute(below.level, n.error)?;
            let cand =
                Cand { error: d.eps_out, cost: d.cost_factor * n.cost, size: 1.0 + n.size, recipe: Recipe::Dilute { from: id, lambda: d.lambda } };
            offer(&self.grid, &mut seeds, cand);
        }
        let mut magic = Buckets { slots: vec![None; self.grid.len()] };
        self.absorb(Resource::Magic, level, &mut magic, seeds);

        let pivots: Vec<NodeId> = below.rotation.clone();
        let mut seen: HashSet<NodeId> = HashSet::new();
        for _ in 0..self.cfg.max_rounds {
            let inputs = self.frontier(&magic);
            let fresh: Vec<bool> = inputs.iter().map(|id| !seen.contains(id)).collect();
            if !fresh.iter().any(|&f| f) {
                break;
            }
            let winners = if level == 3 {
                self.close_level3(&inputs, &fresh, pivots[0], kernel)
            } else {
                let new: Vec<NodeId> = inputs.iter().zip(&fresh).filter(|(_, f)| **f).map(|(i, _)| *i).collect();
                self.close_level(&new, m3, &pivots, kernel)
            };
            seen.extend(inputs.iter().copied());
            if !self.absorb(Resource::Magic, level, &mut magic, winners) {
                break;
            }
        }
        let magic_front = self.frontier(&magic);

        let mut rot = self.empty_slots();
        for &s in &magic_front {
            for &c in &pivots {
                let (a, b) = (&self.nodes[s], &self.nodes[c]);
                let cand = Cand {
                    error: injection_error(a.error, b.error),
                    cost: a.cost + 0.5 * b.cost,
                    size: 1.0 + a.size + b.size,
                    recipe: Recipe::Inject { state: s, correction: c },
                };
                offer(&self.grid, &mut rot, cand);
            }
        }
        let mut rotation = Buckets { slots: vec![None; self.grid.len()] };
        self.absorb(Resource::Rotation, level, &mut rotation, rot);

        let plus = self.leaf(Resource::Magic, level, plus_substitute_error(level)?, 0.0, Recipe::PlusSubstitute);
        Ok(LevelEntries { level, magic: magic_front, plus: Some(plus), rotation: self.frontier(&rotation) })
    }

    fn close_level3(&self, inputs: &[NodeId], fresh: &[bool], pivot: NodeId, kernel: &RoundKernel) -> Slots {
        let grid = self.grid;
        let nodes = &self.nodes;
        let mut slots = self.empty_slots();
        for (i, &a) in inputs.iter().enumerate() {
            if !fresh[i] {
                continue;
            }
            let n = &nodes[a];
            for p in &self.cfg.protocols {
                if let Some((d, factor)) = p.apply(n.error) {
                    let cand = Cand {
                        error: d,
                        cost: factor * n.cost,
                        size: 1.0 + n.size,
                        recipe: Recipe::Level3Round { protocol: p.id.clone(), input: a, inputs_per_output: factor },
                    };
                    offer(&grid, &mut slots, cand);
                }
            }
        }
        let tables: Vec<SiteTable> = inputs.iter().map(|&b| kernel.site_table(nodes[b].error)).collect();
        let rounds = (0..inputs.len())
            .into_par_iter()
            .fold(
                || vec![None; grid.len()],
                |mut acc, j| {
                    let b = &nodes[inputs[j]];
                    for (i, &a) in inputs.iter().enumerate() {
                        if !(fresh[i] || fresh[j]) {
                            continue;
                        }
                        let s = &nodes[a];
                        let (p, d) = tables[j].with_input(s.error).finish(0.0);
                        if !(p > 0.0) {
                            continue;
                        }
                        let cand = Cand {
                            error: d,
                            cost: (2.0 * s.cost + 8.0 * b.cost) / (2.0 * p),
                            size: 1.0 + s.size + b.size + nodes[pivot].size,
                            recipe: Recipe::MeklRound { state: a, m3: inputs[j], pivot, p_suc: p },
                        };
                        offer(&grid, &mut acc, cand);
                    }
                    acc
                },
            )
            .reduce(|| vec![None; grid.len()], |a, b| merge(&grid, a, b));
        merge(&grid, slots, rounds)
    }

    fn close_level(&self, new: &[NodeId], m3: &[NodeId], pivots: &[NodeId], kernel: &RoundKernel) -> Slots {
        let grid = self.grid;
        let nodes = &self.nodes;
        let tables: Vec<SiteTable> = m3.iter().map(|&b| kernel.site_table(nodes[b].error)).collect();
        new.par_iter()
            .fold(
                || vec![None; grid.len()],
                |mut acc, &a| {
                    let s = &nodes[a];
                    for (j, &bid) in m3.iter().enumerate() {
                        let b = &nodes[bid];
                        let t = tables[j].with_input(s.error);
                        let (p0, d0) = t.finish(0.0);
                        if !(p0 > 0.0) {
                            continue;
                        }
                        let limit = grid.bucket(d0);
                        let fixed = 2.0 * s.cost + 8.0 * b.cost;
                        let mut best_in_limit = f64::INFINITY;
                        for &cid in pivots {
                            let c = &nodes[cid];
                            // cost of this and every later pivot is at least this
                            if limit.is_some() && (fixed + c.cost) / (2.0 * p0) >= best_in_limit {
                                break;
                            }
                            let (p, d) = t.finish(c.error);
                            if !(p > 0.0) {
                                continue;
                            }
                            let cost = (fixed + c.cost) / (2.0 * p);
                            let bucket = grid.bucket(d);
                            if bucket.is_some() && bucket == limit {
                                best_in_limit = best_in_limit.min(cost);
                            }
                            let cand = Cand {
                                error: d,
                                cost,
                                size: 1.0 + s.size + b.size + c.size,
                                recipe: Recipe::MeklRound { state: a, m3: bid, pivot: cid, p_suc: p },
                            };
                            offer(&grid, &mut acc, cand);
                        }
                    }
                    acc
                },
            )
            .reduce(|| vec![None; grid.len()], |a, b| merge(&grid, a, b))
    }

    /// Drops nodes unreachable from the final frontiers and renumbers the rest.
    fn compact(mut self, mut levels: Vec<LevelEntries>) -> CostTable {
        let mut keep = vec![false; self.nodes.len()];
        let mut stack: Vec<NodeId> = levels
            .iter()
            .flat_map(|l| l.magic.iter().chain(&l.rotation).chain(l.plus.iter()).copied())
            .collect();
        while let Some(id) = stack.pop() {
            if !keep[id] {
                keep[id] = true;
                stack.extend(self.nodes[id].recipe.children());
            }
        }
        let mut map = vec![usize::MAX; self.nodes.len()];
        let mut next = 0;
        for (i, k) in keep.iter().enumerate() {
            if *k {
                map[i] = next;
                next += 1;
            }
        }
        let nodes: Vec<RecipeNode> = std::mem::take(&mut self.nodes)
            .into_iter()
            .zip(&keep)
            .filter(|(_, k)| **k)
            .map(|(mut n, _)| {
                n.recipe.remap(&map);
                n
            })
            .collect();
        for l in &mut levels {
            l.magic.iter_mut().chain(l.rotation.iter_mut()).chain(l.plus.iter_mut()).for_each(|id| *id = map[*id]);
        }
        CostTable { config: self.cfg.clone(), nodes, levels }
    }
}

/// Runs `f` on a pool capped by `ROTFORGE_THREADS`, if set.
fn with_thread_cap<T: Send>(f: impl FnOnce() -> T + Send) -> Result<T> {
    match std::env::var("ROTFORGE_THREADS") {
        Ok(v) => {
            let n: usize = v
                .trim()
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("ROTFORGE_THREADS={v:?} is not a count")))?;
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::InvalidArgument(e.to_string()))?;
            Ok(pool.install(f))
        }
        Err(_) => Ok(f()),
    }
}

pub fn build_cost_table(cfg: &TableConfig) -> Result<CostTable> {
    cfg.validate()?;
    with_thread_cap(|| build_inner(cfg))?
}

fn build_inner(cfg: &TableConfig) -> Result<CostTable> {
    let mut b = Builder { cfg, grid: cfg.grid, nodes: Vec::new() };
    let m2 = b.leaf(Resource::Magic, 2, 0.0, 0.0, Recipe::Clifford);
    let r2 = b.leaf(Resource::Rotation, 2, 0.0, 0.0, Recipe::Clifford);
    let mut levels = vec![LevelEntries { level: 2, magic: vec![m2], plus: None, rotation: vec![r2] }];
    let mut m3 = Vec::new();
    for level in 3..=cfg.l_max {
        let kernel = RoundKernel::new(&RoundModel::build(&build_mekl_circuit(level)?)?);
        let below = levels.last().expect("level 2").clone();
        let entries = b.build_level(level, &below, &m3, &kernel)?;
        if level == 3 {
            m3 = entries.magic.clone();
        }
        levels.push(entries);
    }
    Ok(b.compact(levels))
}

/// Cheapest level-3 state at error `target` or better from raw states at `eps_raw`.
pub fn level3_base(eps_raw: f64, target: f64, protocols: &[Level3Protocol]) -> Result<CostEntry> {
    let mut cfg = TableConfig::new(eps_raw, 3);
    cfg.protocols = protocols.to_vec();
    build_cost_table(&cfg)?.cheapest(3, Resource::Magic, target)
}

impl CostTable {
    pub fn level(&self, level: u32) -> Result<&LevelEntries> {
        level
            .checked_sub(2)
            .and_then(|i| self.levels.get(i as usize))
            .ok_or_else(|| Error::MissingEntry(format!("level {level} not in table")))
    }

    pub fn entry(&self, id: NodeId) -> CostEntry {
        let n = &self.nodes[id];
        CostEntry { level: n.level, resource: n.resource, error: n.error, cost: n.cost, node: id }
    }

    /// Frontier of `resource` at `level`, by increasing cost. Magic frontiers
    /// contain only states usable as inputs; see [`CostTable::cheapest`].
    pub fn frontier(&self, level: u32, resource: Resource) -> Result<Vec<CostEntry>> {
        let l = self.level(level)?;
        let ids = match resource {
            Resource::Magic => &l.magic,
            Resource::Rotation => &l.rotation,
        };
        Ok(ids.iter().map(|&id| self.entry(id)).collect())
    }

    /// Cheapest entry with error at most `target`. For magic states this
    /// includes substituting `|+⟩`.
    pub fn cheapest(&self, level: u32, resource: Resource, target: f64) -> Result<CostEntry> {
        let l = self.level(level)?;
        let (ids, extra) = match resource {
            Resource::Magic => (&l.magic, l.plus),
            Resource::Rotation => (&l.rotation, None),
        };
        ids.iter()
            .chain(extra.iter())
            .map(|&id| self.entry(id))
            .filter(|e| e.error <= target)
            .min_by(|a, b| a.cost.total_cmp(&b.cost).then(a.error.total_cmp(&b.error)))
            .ok_or(Error::Unreachable { level, target })
    }

    pub fn cheapest_rotation(&self, level: u32, target: f64) -> Result<CostEntry> {
        self.cheapest(level, Resource::Rotation, target)
    }

    /// Expected raw states consumed per output, keyed by level.
    pub fn raw_consumption(&self, id: NodeId) -> BTreeMap<u32, f64> {
        let mut memo: Vec<Option<BTreeMap<u32, f64>>> = vec![None; self.nodes.len()];
        self.consumption_memo(id, &mut memo)
    }

    fn consumption_memo(&self, id: NodeId, memo: &mut Vec<Option<BTreeMap<u32, f64>>>) -> BTreeMap<u32, f64> {
        if let Some(m) = &memo[id] {
            return m.clone();
        }
        let n = &self.nodes[id];
        let mut out = BTreeMap::new();
        let mut add = |src: BTreeMap<u32, f64>, w: f64| {
            for (k, v) in src {
                *out.entry(k).or_insert(0.0) += w * v;
            }
        };
        match &n.recipe {
            Recipe::Raw => add(BTreeMap::from([(n.level, 1.0)]), 1.0),
            Recipe::Clifford | Recipe::PlusSubstitute => {}
            Recipe::Dilute { from, lambda } => add(self.consumption_memo(*from, memo), *lambda),
            Recipe::MeklRound { state, m3, pivot, p_suc } => {
                let w = 1.0 / (2.0 * p_suc);
                add(self.consumption_memo(*state, memo), 2.0 * w);
                add(self.consumption_memo(*m3, memo), 8.0 * w);
                add(self.consumption_memo(*pivot, memo), w);
            }
            Recipe::Level3Round { input, inputs_per_output, .. } => {
                add(self.consumption_memo(*input, memo), *inputs_per_output)
            }
            Recipe::Inject { state, correction } => {
                add(self.consumption_memo(*state, memo), 1.0);
                add(self.consumption_memo(*correction, memo), 0.5);
            }
        }
        memo[id] = Some(out.clone());
        out
    }

    /// Recomputes every node's cost from its children; returns the largest
    /// relative mismatch with the stored value.
    pub fn recompute_costs(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for n in &self.nodes {
            let c = |id: &NodeId| self.nodes[*id].cost;
            let expect = match &n.recipe {
                Recipe::Raw => 1.0,
                Recipe::Clifford | Recipe::PlusSubstitute => 0.0,
                Recipe::Dilute { from, lambda } => lambda * c(from),
                Recipe::MeklRound { state, m3, pivot, p_suc } => {
                    (2.0 * c(state) + 8.0 * c(m3) + c(pivot)) / (2.0 * p_suc)
                }
                Recipe::Level3Round { input, inputs_per_output, .. } => inputs_per_output * c(input),
                Recipe::Inject { state, correction } => c(state) + 0.5 * c(correction),
            };
            let scale = expect.abs().max(1e-300);
            worst = worst.max((expect - n.cost).abs() / scale);
        }
        worst
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let table: CostTable = serde_json::from_str(text)?;
        table.check()?;
        Ok(table)
    }

    /// Structural checks for tables read from disk.
    pub fn check(&self) -> Result<()> {
        let n = self.nodes.len();
        let bad = |m: String| Err(Error::InvalidArgument(format!("cost table: {m}")));
        for (i, node) in self.nodes.iter().enumerate() {
            for c in node.recipe.children() {
                if c >= i {
                    return bad(format!("node {i} refers forward to {c}"));
                }
            }
        }
        for (k, l) in self.levels.iter().enumerate() {
            if l.level != k as u32 + 2 {
                return bad(format!("level list out of order at {}", l.level));
            }
            if l.magic.iter().chain(&l.rotation).chain(l.plus.iter()).any(|&id| id >= n) {
                return bad(format!("dangling node at level {}", l.level));
            }
        }
        Ok(())
    }
}
