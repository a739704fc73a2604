//! Logarithmic error buckets.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Bucket `i` covers errors in `(top·10^{−(i+1)/d}, top·10^{−i/d}]`; the last
/// bucket holds everything at or below `floor`, zero included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorGrid {
    pub top: f64,
    pub floor: f64,
    pub per_decade: u32,
}

impl Default for ErrorGrid {
    fn default() -> Self {
        Self { top: 0.5, floor: 1e-25, per_decade: 20 }
    }
}

impl ErrorGrid {
    pub fn new(top: f64, floor: f64, per_decade: u32) -> Result<Self> {
        if !(floor > 0.0 && floor < top && top <= 0.5) || per_decade == 0 {
            return Err(Error::InvalidArgument(format!("bad error grid ({top}, {floor}, {per_decade})")));
        }
        Ok(Self { top, floor, per_decade })
    }

    /// Number of buckets, including the floor bucket.
    pub fn len(&self) -> usize {
        (self.per_decade as f64 * (self.top / self.floor).log10()).ceil() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn bucket(&self, error: f64) -> Option<usize> {
        if !(error <= self.top) {
            return None;
        }
        let last = self.len() - 1;
        if error <= self.floor {
            return Some(last);
        }
        let i = (self.per_decade as f64 * (self.top / error).log10()).floor() as usize;
        Some(i.min(last))
    }

    /// Upper edge of bucket `i`.
    pub fn point(&self, i: usize) -> f64 {
        if i + 1 == self.len() {
            self.floor
        } else {
            self.top * 10f64.powf(-(i as f64) / self.per_decade as f64)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn buckets() {
        let g = ErrorGrid::default();
        assert_eq!(g.bucket(0.5), Some(0));
        assert_eq!(g.bucket(0.6), None);
        assert_eq!(g.bucket(0.0), Some(g.len() - 1));
        assert_eq!(g.bucket(1e-30), Some(g.len() - 1));
        for i in 0..g.len() - 2 {
            assert_eq!(g.bucket(g.point(i) * 0.999), Some(i));
            assert_eq!(g.bucket(g.point(i + 1) * 1.001), Some(i));
        }
        assert!(ErrorGrid::new(0.5, 0.6, 20).is_err());
    }
}
