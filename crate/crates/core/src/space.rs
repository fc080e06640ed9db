//! The set of all `k`-configurations of a metric, indexed by rank.
//!
//! Rank order is lexicographic order of the sorted point lists, so rank 0 is
//! `{0, 1, …, k-1}`. Lookups go through a `2^n` table from bitmask to rank.

use std::sync::Arc;

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::metric::{Configuration, MetricSpace, Point};

const NO_RANK: u32 = u32::MAX;

#[derive(Debug)]
pub struct ConfigSpace {
    metric: Arc<MetricSpace>,
    k: usize,
    masks: Vec<u32>,
    ranks: Vec<u32>,
}

impl ConfigSpace {
    pub fn new(metric: Arc<MetricSpace>, k: usize) -> Result<Arc<Self>> {
        let n = metric.n();
        if k == 0 {
            return Err(Error::ZeroServers);
        }
        if k > n {
            return Err(Error::KExceedsN { k, n });
        }
        let masks: Vec<u32> = (0..n)
            .combinations(k)
            .map(|c| c.iter().fold(0u32, |m, &p| m | (1 << p)))
            .collect();
        let mut ranks = vec![NO_RANK; 1 << n];
        for (rank, &mask) in masks.iter().enumerate() {
            ranks[mask as usize] = rank as u32;
        }
        Ok(Arc::new(ConfigSpace {
            metric,
            k,
            masks,
            ranks,
        }))
    }

    pub fn metric(&self) -> &MetricSpace {
        &self.metric
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of configurations, `C(n, k)`.
    pub fn len(&self) -> usize {
        self.masks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masks.is_empty()
    }

    pub fn mask(&self, rank: usize) -> u32 {
        self.masks[rank]
    }

    pub fn configuration(&self, rank: usize) -> Configuration {
        Configuration::from_mask(self.masks[rank])
    }

    /// Rank of a `k`-point bitmask. Panics on masks outside the space.
    #[inline]
    pub fn rank_of_mask(&self, mask: u32) -> usize {
        let rank = self.ranks[mask as usize];
        debug_assert_ne!(rank, NO_RANK, "mask {mask:#b} is not a {}-configuration", self.k);
        rank as usize
    }

    pub fn rank_of(&self, x: &Configuration) -> Result<usize> {
        x.check(&self.metric, self.k)?;
        Ok(self.rank_of_mask(x.mask()))
    }

    pub fn configurations(&self) -> impl Iterator<Item = Configuration> + '_ {
        self.masks.iter().map(|&m| Configuration::from_mask(m))
    }

    /// Points of a mask in ascending order.
    pub fn points_of(mask: u32) -> impl Iterator<Item = Point> {
        (0..32usize).filter(move |&p| mask & (1 << p) != 0)
    }

    /// Whether two spaces index the same configurations over the same metric.
    pub fn same_domain(&self, other: &ConfigSpace) -> bool {
        std::ptr::eq(self, other) || (self.k == other.k && self.metric == other.metric)
    }
}
