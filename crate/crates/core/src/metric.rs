//! Finite metric spaces, server configurations and the distance between
//! configurations.

use std::fmt;
use std::ops::RangeInclusive;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matching::{brute_force_assignment, min_cost_assignment};
use crate::rng::seeded_rng;

/// A point of the metric space, `0..n`.
pub type Point = usize;

/// Supported point counts. Configurations are stored as `u32` bitmasks and
/// the work vector is dense over all `C(n, k)` configurations.
pub const MIN_POINTS: usize = 2;
pub const MAX_POINTS: usize = 16;

/// A violated metric axiom, with witnessing indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "axiom", rename_all = "snake_case")]
pub enum AxiomViolation {
    /// `dist[i][i] != 0`.
    NonzeroDiagonal { i: usize },
    /// `dist[i][j] != dist[j][i]`, reported once with `i < j`.
    Asymmetric { i: usize, j: usize },
    /// `dist[i][j] == 0` for `i != j`, reported once with `i < j`.
    IndistinctPoints { i: usize, j: usize },
    /// `dist[i][j] > dist[i][via] + dist[via][j]`, reported with `i < j`.
    Triangle { i: usize, j: usize, via: usize },
}

impl fmt::Display for AxiomViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            AxiomViolation::NonzeroDiagonal { i } => write!(f, "dist[{i}][{i}] is not zero"),
            AxiomViolation::Asymmetric { i, j } => write!(f, "dist[{i}][{j}] != dist[{j}][{i}]"),
            AxiomViolation::IndistinctPoints { i, j } => {
                write!(f, "points {i} and {j} are at distance zero")
            }
            AxiomViolation::Triangle { i, j, via } => {
                write!(f, "triangle inequality fails for ({i}, {j}) via {via}")
            }
        }
    }
}

/// Checks the metric axioms on a raw integer matrix.
///
/// Returns the list of violations (empty means the matrix is a metric).
/// Structural problems, a non-square shape or a negative entry, are reported
/// as an `Err` instead.
#[allow(clippy::needless_range_loop)]
pub fn validate_metric(dist: &[Vec<i64>]) -> Result<Vec<AxiomViolation>> {
    let n = dist.len();
    for (row, entries) in dist.iter().enumerate() {
        if entries.len() != n {
            return Err(Error::NonSquare {
                row,
                len: entries.len(),
                expected: n,
            });
        }
        if let Some((j, &value)) = entries.iter().enumerate().find(|(_, v)| **v < 0) {
            return Err(Error::NegativeEntry { i: row, j, value });
        }
    }

    let mut violations = Vec::new();
    for i in 0..n {
        if dist[i][i] != 0 {
            violations.push(AxiomViolation::NonzeroDiagonal { i });
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            if dist[i][j] != dist[j][i] {
                violations.push(AxiomViolation::Asymmetric { i, j });
            }
            if dist[i][j] == 0 || dist[j][i] == 0 {
                violations.push(AxiomViolation::IndistinctPoints { i, j });
            }
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            let via = (0..n).find(|&l| dist[i][j] as i128 > dist[i][l] as i128 + dist[l][j] as i128);
            if let Some(via) = via {
                violations.push(AxiomViolation::Triangle { i, j, via });
            }
        }
    }
    Ok(violations)
}

/// A finite metric space with exact integer distances.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetricSpace {
    n: usize,
    dist: Vec<u64>,
    labels: Option<Vec<String>>,
}

impl MetricSpace {
    /// Builds a metric space, rejecting anything that is not a metric on
    /// 2..=16 points.
    pub fn new(dist: Vec<Vec<u64>>) -> Result<Self> {
        let signed: Vec<Vec<i64>> = dist
            .iter()
            .map(|row| {
                row.iter()
                    .map(|&d| {
                        i64::try_from(d).map_err(|_| Error::InvalidParameter(format!("distance {d} overflows i64")))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        Self::from_signed(&signed)
    }

    /// Builds a metric space from a signed matrix as read from JSON.
    pub fn from_signed(dist: &[Vec<i64>]) -> Result<Self> {
        let violations = validate_metric(dist)?;
        let n = dist.len();
        if !(MIN_POINTS..=MAX_POINTS).contains(&n) {
            return Err(Error::PointCount(n));
        }
        if !violations.is_empty() {
            return Err(Error::NotAMetric(violations));
        }
        Ok(MetricSpace {
            n,
            dist: dist.iter().flatten().map(|&d| d as u64).collect(),
            labels: None,
        })
    }

    /// The metric with every off-diagonal distance equal to 1.
    pub fn uniform(n: usize) -> Result<Self> {
        let dist = (0..n).map(|i| (0..n).map(|j| u64::from(i != j)).collect()).collect();
        Self::new(dist)
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n {
            return Err(Error::LabelCount {
                expected: self.n,
                got: labels.len(),
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn dist(&self, x: Point, y: Point) -> u64 {
        self.dist[x * self.n + y]
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn matrix(&self) -> Vec<Vec<u64>> {
        self.dist.chunks(self.n).map(<[u64]>::to_vec).collect()
    }

    pub fn check_point(&self, point: Point) -> Result<()> {
        if point < self.n {
            Ok(())
        } else {
            Err(Error::PointOutOfRange { point, n: self.n })
        }
    }
}

/// A set of `k` distinct points, kept in ascending order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<Point>", into = "Vec<Point>")]
pub struct Configuration(Vec<Point>);

impl Configuration {
    /// Sorts the points; fails on repeats or points beyond the mask width.
    pub fn new(points: impl IntoIterator<Item = Point>) -> Result<Self> {
        let mut points: Vec<Point> = points.into_iter().collect();
        points.sort_unstable();
        if let Some(w) = points.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DuplicatePoint(w[0]));
        }
        if let Some(&p) = points.iter().find(|&&p| p >= MAX_POINTS) {
            return Err(Error::PointOutOfRange {
                point: p,
                n: MAX_POINTS,
            });
        }
        Ok(Configuration(points))
    }

    pub fn from_mask(mask: u32) -> Self {
        Configuration((0..32).filter(|&p| mask & (1 << p) != 0).collect())
    }

    pub fn mask(&self) -> u32 {
        self.0.iter().fold(0, |m, &p| m | (1 << p))
    }

    pub fn points(&self) -> &[Point] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, point: Point) -> bool {
        self.0.binary_search(&point).is_ok()
    }

    /// Checks that this is a valid `k`-configuration over `metric`.
    pub fn check(&self, metric: &MetricSpace, k: usize) -> Result<()> {
        if self.len() != k {
            return Err(Error::WrongSize {
                expected: k,
                got: self.len(),
            });
        }
        self.0.iter().try_for_each(|&p| metric.check_point(p))
    }

    /// `self - out + into`. The caller guarantees `out ∈ self` and
    /// `into ∉ self` (or `out == into`).
    pub fn replace(&self, out: Point, into: Point) -> Configuration {
        Configuration::from_mask((self.mask() & !(1 << out)) | (1 << into))
    }
}

impl TryFrom<Vec<Point>> for Configuration {
    type Error = Error;

    fn try_from(points: Vec<Point>) -> Result<Self> {
        Configuration::new(points)
    }
}

impl From<Configuration> for Vec<Point> {
    fn from(c: Configuration) -> Self {
        c.0
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, p) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, "}}")
    }
}

/// Weight of a minimum-weight perfect matching between two configurations.
pub fn configuration_distance(x: &Configuration, y: &Configuration, metric: &MetricSpace) -> Result<u64> {
    x.check(metric, x.len())?;
    y.check(metric, x.len())?;
    Ok(distance_between(metric, x.points(), y.points()))
}

/// Matching distance between two equally sized point lists, no validation.
pub(crate) fn distance_between(metric: &MetricSpace, x: &[Point], y: &[Point]) -> u64 {
    let k = x.len();
    min_cost_assignment(&cost_matrix(metric, x, y), k).cost
}

/// Same as [`distance_between`] but always by enumeration; used by the
/// brute-force oracle so that it shares no solver with the DP route above
/// `BRUTE_FORCE_LIMIT`.
pub(crate) fn distance_by_enumeration(metric: &MetricSpace, x: &[Point], y: &[Point]) -> u64 {
    brute_force_assignment(&cost_matrix(metric, x, y), x.len()).cost
}

fn cost_matrix(metric: &MetricSpace, x: &[Point], y: &[Point]) -> Vec<u64> {
    debug_assert_eq!(x.len(), y.len());
    x.iter()
        .flat_map(|&a| y.iter().map(move |&b| metric.dist(a, b)))
        .collect()
}

/// Moves realizing `D(from, to)`, restricted to the symmetric difference:
/// each returned pair moves a point of `from \ to` onto a point of
/// `to \ from`. Their total cost equals the full matching distance.
pub fn relocation_moves(metric: &MetricSpace, from: &Configuration, to: &Configuration) -> Vec<(Point, Point, u64)> {
    let leaving: Vec<Point> = from.points().iter().copied().filter(|&p| !to.contains(p)).collect();
    let arriving: Vec<Point> = to.points().iter().copied().filter(|&p| !from.contains(p)).collect();
    let size = leaving.len();
    let solved = min_cost_assignment(&cost_matrix(metric, &leaving, &arriving), size);
    solved
        .assignment
        .iter()
        .enumerate()
        .map(|(i, &j)| (leaving[i], arriving[j], metric.dist(leaving[i], arriving[j])))
        .collect()
}

/// Smallest distance between two distinct points of `initial`.
pub fn min_pairwise_distance(initial: &Configuration, metric: &MetricSpace) -> Result<u64> {
    initial.check(metric, initial.len())?;
    if initial.len() < 2 {
        return Err(Error::SingleServer);
    }
    let pts = initial.points();
    let mut best = u64::MAX;
    for (i, &a) in pts.iter().enumerate() {
        for &b in &pts[i + 1..] {
            best = best.min(metric.dist(a, b));
        }
    }
    Ok(best)
}

/// Random complete graph with uniform integer weights, closed under
/// shortest paths (Floyd–Warshall), so the result is always a metric.
/// Deterministic per seed.
#[allow(clippy::needless_range_loop)]
pub fn random_metric(n: usize, seed: u64, weights: RangeInclusive<u64>) -> Result<MetricSpace> {
    if !(MIN_POINTS..=MAX_POINTS).contains(&n) {
        return Err(Error::PointCount(n));
    }
    if *weights.start() == 0 || weights.start() > weights.end() {
        return Err(Error::InvalidParameter(format!(
            "weight range {}..={} must be nonempty and positive",
            weights.start(),
            weights.end()
        )));
    }
    let mut rng = seeded_rng(seed);
    let mut dist = vec![vec![0u64; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let w = rng.random_range(weights.clone());
            dist[i][j] = w;
            dist[j][i] = w;
        }
    }
    for via in 0..n {
        for i in 0..n {
            for j in 0..n {
                let through = dist[i][via] + dist[via][j];
                if through < dist[i][j] {
                    dist[i][j] = through;
                }
            }
        }
    }
    MetricSpace::new(dist)
}

/// A k-server instance: metric, initial configuration and request sequence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "InstanceFile", into = "InstanceFile")]
pub struct Instance {
    metric: MetricSpace,
    initial: Configuration,
    requests: Vec<Point>,
}

impl Instance {
    pub fn new(metric: MetricSpace, initial: Configuration, requests: Vec<Point>) -> Result<Self> {
        let k = initial.len();
        if k == 0 {
            return Err(Error::ZeroServers);
        }
        if k > metric.n() {
            return Err(Error::KExceedsN { k, n: metric.n() });
        }
        initial.check(&metric, k)?;
        requests.iter().try_for_each(|&r| metric.check_point(r))?;
        Ok(Instance {
            metric,
            initial,
            requests,
        })
    }

    pub fn metric(&self) -> &MetricSpace {
        &self.metric
    }

    pub fn k(&self) -> usize {
        self.initial.len()
    }

    pub fn initial(&self) -> &Configuration {
        &self.initial
    }

    pub fn requests(&self) -> &[Point] {
        &self.requests
    }

    /// Same metric and initial configuration, different requests.
    pub fn with_requests(&self, requests: Vec<Point>) -> Result<Instance> {
        Instance::new(self.metric.clone(), self.initial.clone(), requests)
    }

    pub fn from_json(text: &str) -> Result<Instance> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("instance serialization is infallible")
    }
}

/// On-disk layout of an instance.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    n: usize,
    k: usize,
    dist: Vec<Vec<i64>>,
    initial: Vec<Point>,
    requests: Vec<Point>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
}

impl TryFrom<InstanceFile> for Instance {
    type Error = Error;

    fn try_from(file: InstanceFile) -> Result<Self> {
        if file.dist.len() != file.n {
            return Err(Error::InvalidParameter(format!(
                "n = {} but dist has {} rows",
                file.n,
                file.dist.len()
            )));
        }
        let mut metric = MetricSpace::from_signed(&file.dist)?;
        if let Some(labels) = file.labels {
            metric = metric.with_labels(labels)?;
        }
        if file.k > file.n {
            return Err(Error::KExceedsN { k: file.k, n: file.n });
        }
        let initial = Configuration::new(file.initial)?;
        initial.check(&metric, file.k)?;
        Instance::new(metric, initial, file.requests)
    }
}

impl From<Instance> for InstanceFile {
    fn from(inst: Instance) -> Self {
        InstanceFile {
            n: inst.metric.n(),
            k: inst.k(),
            dist: inst
                .metric
                .matrix()
                .into_iter()
                .map(|row| row.into_iter().map(|d| d as i64).collect())
                .collect(),
            initial: inst.initial.into(),
            requests: inst.requests,
            labels: inst.metric.labels,
        }
    }
}
