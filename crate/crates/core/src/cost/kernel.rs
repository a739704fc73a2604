//! Contracted form of a round model for the inner loops of the table build.
//!
//! Summing the site classes against the level-3 weights once per level-3
//! input leaves a 2×3 table; a full evaluation is then a handful of
//! multiply-adds.

use crate::noise::RoundModel;

/// Accepted weight and accepted error weight.
pub type Pair = (f64, f64);

#[derive(Debug, Clone)]
pub struct RoundKernel {
    sites: usize,
    classes: Vec<[[Pair; 3]; 2]>,
}

/// Class sums contracted against one level-3 error rate, indexed `[y][m]`.
#[derive(Debug, Clone, Copy)]
pub struct SiteTable([[Pair; 3]; 2]);

/// Site table further contracted against one input error rate, indexed `[y]`.
#[derive(Debug, Clone, Copy)]
pub struct PivotTable([Pair; 2]);

impl RoundKernel {
    pub fn new(model: &RoundModel) -> Self {
        let classes = model
            .classes
            .iter()
            .map(|by_y| std::array::from_fn(|y| std::array::from_fn(|m| (by_y[y][m].acc, by_y[y][m].err[0]))))
            .collect();
        Self { sites: model.sites, classes }
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn site_table(&self, eps3: f64) -> SiteTable {
        let mut t = [[(0.0, 0.0); 3]; 2];
        let n = self.sites as i32;
        for (k, by_y) in self.classes.iter().enumerate() {
            let w = eps3.powi(k as i32) * (1.0 - eps3).powi(n - k as i32);
            if w == 0.0 {
                continue;
            }
            for y in 0..2 {
                for m in 0..3 {
                    t[y][m].0 += w * by_y[y][m].0;
                    t[y][m].1 += w * by_y[y][m].1;
                }
            }
        }
        SiteTable(t)
    }
}

impl SiteTable {
    pub fn with_input(&self, epsl: f64) -> PivotTable {
        let w = [(1.0 - epsl) * (1.0 - epsl), epsl * (1.0 - epsl), epsl * epsl];
        PivotTable(std::array::from_fn(|y| {
            let mut p = (0.0, 0.0);
            for m in 0..3 {
                p.0 += w[m] * self.0[y][m].0;
                p.1 += w[m] * self.0[y][m].1;
            }
            p
        }))
    }
}

impl PivotTable {
    /// `(p_suc, δ)` at pivot error `eta`.
    #[inline]
    pub fn finish(&self, eta: f64) -> Pair {
        let acc = (1.0 - eta) * self.0[0].0 + eta * self.0[1].0;
        let err = (1.0 - eta) * self.0[0].1 + eta * self.0[1].1;
        (acc, err / acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::build_mekl_circuit;
    use crate::noise::NoiseSpec;

    #[test]
    fn matches_full_evaluation() {
        let model = RoundModel::build(&build_mekl_circuit(5).unwrap()).unwrap();
        let kernel = RoundKernel::new(&model);
        for (e3, el, h) in [(1e-3, 2e-3, 1e-5), (0.05, 0.01, 0.2), (0.0, 0.0, 0.0), (1e-9, 0.3, 1e-12)] {
            let full = model.evaluate(&NoiseSpec::new(e3, el, h).unwrap()).unwrap();
            let (p, d) = kernel.site_table(e3).with_input(el).finish(h);
            assert!((p - full.p_suc).abs() < 1e-15);
            assert!((d - full.delta).abs() <= 1e-13 * full.delta.max(1e-30));
        }
    }
}
