//! Seeded instance generators.

use std::fmt;
use std::ops::RangeInclusive;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{random_metric, Configuration, Instance, MetricSpace, Point};
use crate::rng::seeded_rng;
use crate::workfunction::Wfa;

/// Edge weights drawn before the shortest-path closure.
pub const DEFAULT_WEIGHTS: RangeInclusive<u64> = 1..=10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RequestModel {
    /// Each request uniform over all points.
    #[serde(rename = "uniform")]
    Uniform,
    /// Cycle through the initial configuration plus one extra point, in
    /// ascending order.
    #[serde(rename = "roundrobin_k_plus_1")]
    RoundRobinKPlus1,
    /// Always request the uncovered point farthest from the Work Function
    /// Algorithm's current configuration (smallest id on ties).
    #[serde(rename = "greedy_adversary")]
    GreedyAdversary,
}

impl RequestModel {
    pub const ALL: [RequestModel; 3] = [
        RequestModel::Uniform,
        RequestModel::RoundRobinKPlus1,
        RequestModel::GreedyAdversary,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RequestModel::Uniform => "uniform",
            RequestModel::RoundRobinKPlus1 => "roundrobin_k_plus_1",
            RequestModel::GreedyAdversary => "greedy_adversary",
        }
    }
}

impl fmt::Display for RequestModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RequestModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        RequestModel::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown request model {s:?}")))
    }
}

/// Random metric, random initial configuration and `rho_len` requests drawn
/// from `model`, all from one ChaCha8 stream seeded with `seed`.
pub fn generate_instance(n: usize, k: usize, rho_len: usize, seed: u64, model: RequestModel) -> Result<Instance> {
    if k == 0 {
        return Err(Error::ZeroServers);
    }
    if k > n {
        return Err(Error::KExceedsN { k, n });
    }
    if model != RequestModel::Uniform && k == n {
        return Err(Error::InvalidParameter(format!("request model {model} needs n > k")));
    }
    let mut rng = seeded_rng(seed);
    let metric = random_metric(n, rng.random(), DEFAULT_WEIGHTS)?;
    let initial = Configuration::new(sample(&mut rng, n, k))?;
    let requests = match model {
        RequestModel::Uniform => (0..rho_len).map(|_| rng.random_range(0..n)).collect(),
        RequestModel::RoundRobinKPlus1 => {
            let outside: Vec<Point> = (0..n).filter(|&p| !initial.contains(p)).collect();
            let extra = outside[rng.random_range(0..outside.len())];
            let mut cycle = initial.points().to_vec();
            cycle.push(extra);
            cycle.sort_unstable();
            cycle.into_iter().cycle().take(rho_len).collect()
        }
        RequestModel::GreedyAdversary => greedy_adversary(&metric, &initial, rho_len)?,
    };
    Instance::new(metric, initial, requests)
}

/// Requests generated against the Work Function Algorithm itself.
pub fn greedy_adversary(metric: &MetricSpace, initial: &Configuration, len: usize) -> Result<Vec<Point>> {
    let mut wfa = Wfa::new(metric, initial)?;
    let mut requests = Vec::with_capacity(len);
    for _ in 0..len {
        let current = wfa.configuration();
        let r = (0..metric.n())
            .filter(|&p| !current.contains(p))
            .max_by_key(|&p| {
                let gap = current.points().iter().map(|&x| metric.dist(x, p)).min().unwrap_or(0);
                (gap, std::cmp::Reverse(p))
            })
            .ok_or_else(|| Error::InvalidParameter("greedy adversary needs n > k".into()))?;
        wfa.serve(r)?;
        requests.push(r);
    }
    Ok(requests)
}
