//! Work vectors and the Work Function Algorithm.
//!
//! A work vector maps every `k`-configuration `X` to the cheapest cost of
//! serving the requests seen so far from the initial configuration and
//! ending in `X`. It is stored densely in rank order (see [`ConfigSpace`]).

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::metric::{distance_between, Configuration, Instance, MetricSpace, Point};
use crate::space::ConfigSpace;
use crate::trace::{ExecutionTrace, Move, Round};

#[derive(Debug, Clone)]
pub struct WorkVector {
    space: Arc<ConfigSpace>,
    values: Vec<u64>,
    origin: Configuration,
    served: usize,
}

/// JSON export: `(configuration, value)` pairs in rank order.
#[derive(Debug, Serialize)]
pub struct WorkVectorExport {
    pub origin: Configuration,
    pub served_count: usize,
    pub entries: Vec<(Configuration, u64)>,
}

/// Work vector of the empty request sequence: `w(X) = D(A₀, X)`.
pub fn initial_work_vector(metric: &MetricSpace, initial: &Configuration) -> Result<WorkVector> {
    let space = ConfigSpace::new(Arc::new(metric.clone()), initial.len())?;
    WorkVector::initial(space, initial)
}

/// Folds one request into a work vector, returning a new vector.
pub fn update_work_vector(w: &WorkVector, request: Point) -> Result<WorkVector> {
    w.update(request)
}

impl WorkVector {
    pub fn initial(space: Arc<ConfigSpace>, origin: &Configuration) -> Result<Self> {
        let rank = space.rank_of(origin)?;
        let values = (0..space.len())
            .map(|r| {
                let x = space.configuration(r);
                distance_between(space.metric(), origin.points(), x.points())
            })
            .collect::<Vec<_>>();
        debug_assert_eq!(values[rank], 0);
        Ok(WorkVector {
            space,
            values,
            origin: origin.clone(),
            served: 0,
        })
    }

    /// `w'(X) = min_{z ∈ X} w(X - z + r) + dist(r, z)`.
    ///
    /// When `r ∈ X` only the `z = r` term is a configuration, so
    /// `w'(X) = w(X)` there.
    pub fn update(&self, request: Point) -> Result<Self> {
        self.space.metric().check_point(request)?;
        Ok(self.update_unchecked(request))
    }

    pub(crate) fn update_unchecked(&self, request: Point) -> Self {
        let space = &*self.space;
        let metric = space.metric();
        let rbit = 1u32 << request;
        let values = (0..space.len())
            .map(|rank| {
                let mask = space.mask(rank);
                if mask & rbit != 0 {
                    return self.values[rank];
                }
                ConfigSpace::points_of(mask)
                    .map(|z| {
                        let prev = space.rank_of_mask((mask & !(1 << z)) | rbit);
                        self.values[prev] + metric.dist(request, z)
                    })
                    .min()
                    .expect("configurations are nonempty")
            })
            .collect();
        WorkVector {
            space: self.space.clone(),
            values,
            origin: self.origin.clone(),
            served: self.served + 1,
        }
    }

    pub fn space(&self) -> &Arc<ConfigSpace> {
        &self.space
    }

    pub fn origin(&self) -> &Configuration {
        &self.origin
    }

    pub fn served_count(&self) -> usize {
        self.served
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    pub fn value(&self, x: &Configuration) -> Result<u64> {
        Ok(self.values[self.space.rank_of(x)?])
    }

    #[inline]
    pub fn value_at_rank(&self, rank: usize) -> u64 {
        self.values[rank]
    }

    #[inline]
    pub(crate) fn value_of_mask(&self, mask: u32) -> u64 {
        self.values[self.space.rank_of_mask(mask)]
    }

    /// Smallest entry and the smallest rank attaining it.
    pub fn min(&self) -> (usize, u64) {
        self.values
            .iter()
            .copied()
            .enumerate()
            .min_by_key(|&(rank, v)| (v, rank))
            .expect("work vectors are nonempty")
    }

    /// The same vector with `d` added to every entry.
    pub fn shifted(&self, d: u64) -> Self {
        WorkVector {
            values: self.values.iter().map(|v| v + d).collect(),
            ..self.clone()
        }
    }

    pub fn export(&self) -> WorkVectorExport {
        WorkVectorExport {
            origin: self.origin.clone(),
            served_count: self.served,
            entries: self.space.configurations().zip(self.values.iter().copied()).collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.export()).expect("work vector serialization is infallible")
    }
}

/// `Some(d)` when `w1(X) - w2(X) = d` for every configuration `X`.
pub fn d_equivalence(w1: &WorkVector, w2: &WorkVector) -> Result<Option<i64>> {
    if !w1.space.same_domain(&w2.space) {
        return Err(Error::DomainMismatch);
    }
    let mut diffs = w1.values.iter().zip(&w2.values).map(|(&a, &b)| a as i64 - b as i64);
    let first = diffs.next().expect("work vectors are nonempty");
    Ok(diffs.all(|d| d == first).then_some(first))
}

/// The move chosen by the Work Function Algorithm for one request.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Decision {
    /// Server position that moves; equals the request for the empty move.
    pub from: Point,
    pub to: Point,
    pub cost: u64,
    pub next: Configuration,
}

/// Candidate scores `w(X - x + r) + dist(x, r)` for every `x ∈ X`, in
/// ascending order of `x`. Empty when `r ∈ X`.
pub fn wfa_scores(w: &WorkVector, current: &Configuration, request: Point) -> Result<Vec<(Point, u64)>> {
    w.space.rank_of(current)?;
    w.space.metric().check_point(request)?;
    Ok(scores_unchecked(w, current.mask(), request))
}

fn scores_unchecked(w: &WorkVector, mask: u32, request: Point) -> Vec<(Point, u64)> {
    let rbit = 1u32 << request;
    if mask & rbit != 0 {
        return Vec::new();
    }
    let metric = w.space.metric();
    ConfigSpace::points_of(mask)
        .map(|x| (x, w.value_of_mask((mask & !(1 << x)) | rbit) + metric.dist(x, request)))
        .collect()
}

/// Work Function Algorithm decision. `w` is the work vector before `request`
/// is folded in. A covered request gets the empty move; otherwise the
/// minimizing server moves, ties going to the smallest position.
pub fn wfa_decide(w: &WorkVector, current: &Configuration, request: Point) -> Result<Decision> {
    w.space.rank_of(current)?;
    w.space.metric().check_point(request)?;
    Ok(decide_unchecked(w, current, request))
}

fn decide_unchecked(w: &WorkVector, current: &Configuration, request: Point) -> Decision {
    if current.contains(request) {
        return Decision {
            from: request,
            to: request,
            cost: 0,
            next: current.clone(),
        };
    }
    let (from, _) = scores_unchecked(w, current.mask(), request)
        .into_iter()
        .min_by_key(|&(x, score)| (score, x))
        .expect("configurations are nonempty");
    Decision {
        from,
        to: request,
        cost: w.space.metric().dist(from, request),
        next: current.replace(from, request),
    }
}

/// Online state of the Work Function Algorithm: current configuration plus
/// the work vector of the requests served so far.
#[derive(Debug, Clone)]
pub struct Wfa {
    configuration: Configuration,
    vector: WorkVector,
}

impl Wfa {
    pub fn new(metric: &MetricSpace, initial: &Configuration) -> Result<Self> {
        Ok(Wfa {
            configuration: initial.clone(),
            vector: initial_work_vector(metric, initial)?,
        })
    }

    pub fn configuration(&self) -> &Configuration {
        &self.configuration
    }

    pub fn work_vector(&self) -> &WorkVector {
        &self.vector
    }

    /// Serves one request: decide on the old vector, then fold the request in.
    pub fn serve(&mut self, request: Point) -> Result<Decision> {
        let decision = wfa_decide(&self.vector, &self.configuration, request)?;
        self.vector = self.vector.update_unchecked(request);
        self.configuration = decision.next.clone();
        Ok(decision)
    }
}

/// Runs the Work Function Algorithm over an instance.
pub fn run_wfa(inst: &Instance) -> Result<ExecutionTrace> {
    let mut wfa = Wfa::new(inst.metric(), inst.initial())?;
    let mut rounds = Vec::with_capacity(inst.requests().len());
    let mut total = 0u64;
    for &r in inst.requests() {
        let d = wfa.serve(r)?;
        total += d.cost;
        rounds.push(Round {
            request: r,
            moves: vec![Move {
                from: d.from,
                to: d.to,
                cost: d.cost,
            }],
            configuration: d.next,
        });
    }
    Ok(ExecutionTrace {
        initial: inst.initial().clone(),
        final_configuration: wfa.configuration.clone(),
        rounds,
        relocation: Vec::new(),
        total_cost: total,
    })
}
