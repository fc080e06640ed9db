//! Offline optimum: costs read off the work vectors, optimal X-lazy traces
//! recovered by backtracking, and a brute-force oracle over lazy schedules.

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::metric::{distance_between, distance_by_enumeration, relocation_moves, Configuration, Instance, Point};
use crate::space::ConfigSpace;
use crate::workfunction::WorkVector;

pub use crate::trace::{Discipline, ExecutionTrace, Move, Round, TraceViolation};

/// Largest `k^|ρ|` the oracle agrees to enumerate.
pub const ORACLE_GUARD: u64 = 10_000_000;

/// `OPT(A₀, ρ) = min_X w_ρ(X)`.
pub fn opt_cost(w: &WorkVector) -> u64 {
    w.min().1
}

/// `OPT(A₀, ρ, X) = w_ρ(X)`.
pub fn opt_cost_to(w: &WorkVector, x: &Configuration) -> Result<u64> {
    w.value(x)
}

/// Every work vector `w_0, …, w_T` of an instance, kept for backtracking.
#[derive(Debug, Clone)]
pub struct WorkHistory {
    requests: Vec<Point>,
    vectors: Vec<WorkVector>,
}

impl WorkHistory {
    pub fn compute(inst: &Instance) -> Result<Self> {
        let space = ConfigSpace::new(Arc::new(inst.metric().clone()), inst.k())?;
        let mut vectors = Vec::with_capacity(inst.requests().len() + 1);
        vectors.push(WorkVector::initial(space, inst.initial())?);
        for &r in inst.requests() {
            let next = vectors.last().expect("nonempty").update_unchecked(r);
            vectors.push(next);
        }
        Ok(WorkHistory {
            requests: inst.requests().to_vec(),
            vectors,
        })
    }

    /// `w_t`, the vector after the first `t` requests.
    pub fn vector(&self, t: usize) -> &WorkVector {
        &self.vectors[t]
    }

    pub fn final_vector(&self) -> &WorkVector {
        self.vectors.last().expect("history always holds w_0")
    }

    pub fn rounds(&self) -> usize {
        self.requests.len()
    }

    /// Optimal X-lazy execution ending in `target`, with cost `w_T(target)`.
    ///
    /// Backtracking through the recurrence yields, for every round `t`, the
    /// configuration `S_t ∋ r_t` an optimal (not necessarily lazy) execution
    /// occupies when serving `r_t`. That execution is then made lazy: on a
    /// miss, the server matched to `r_t` in a minimum matching between the
    /// lazy configuration and `S_t` moves onto `r_t`. The lazy cost plus the
    /// remaining matching distance never exceeds the cost of the followed
    /// execution, so the final relocation into `target` closes the gap
    /// exactly.
    pub fn trace_to(&self, target: &Configuration) -> Result<ExecutionTrace> {
        let final_vector = self.final_vector();
        let space = final_vector.space().clone();
        space.rank_of(target)?;
        let metric = space.metric();

        // serving[t] = S_{t+1}, as bitmasks
        let mut serving = vec![0u32; self.requests.len()];
        let mut goal = target.mask();
        for t in (1..=self.requests.len()).rev() {
            let r = self.requests[t - 1];
            let rbit = 1u32 << r;
            let before = &self.vectors[t - 1];
            let (s, z) = if goal & rbit != 0 {
                (goal, r)
            } else {
                let z = ConfigSpace::points_of(goal)
                    .min_by_key(|&z| (before.value_of_mask((goal & !(1 << z)) | rbit) + metric.dist(r, z), z))
                    .expect("configurations are nonempty");
                ((goal & !(1 << z)) | rbit, z)
            };
            debug_assert_eq!(
                self.vectors[t].value_of_mask(goal),
                before.value_of_mask(s) + metric.dist(r, z)
            );
            serving[t - 1] = s;
            goal = s;
        }

        let initial = final_vector.origin().clone();
        let mut lazy = initial.clone();
        let mut rounds = Vec::with_capacity(self.requests.len());
        let mut total = 0u64;
        for (&r, &s) in self.requests.iter().zip(&serving) {
            let m = if lazy.contains(r) {
                Move {
                    from: r,
                    to: r,
                    cost: 0,
                }
            } else {
                let virt = Configuration::from_mask(s);
                let (from, _, cost) = relocation_moves(metric, &lazy, &virt)
                    .into_iter()
                    .find(|&(_, to, _)| to == r)
                    .expect("the request is in S_t but not in the lazy configuration");
                Move { from, to: r, cost }
            };
            total += m.cost;
            lazy = lazy.replace(m.from, m.to);
            rounds.push(Round {
                request: r,
                moves: vec![m],
                configuration: lazy.clone(),
            });
        }

        let relocation: Vec<Move> = relocation_moves(metric, &lazy, target)
            .into_iter()
            .map(|(from, to, cost)| Move { from, to, cost })
            .collect();
        total += relocation.iter().map(|m| m.cost).sum::<u64>();
        debug_assert_eq!(total, final_vector.value(target).expect("checked above"));

        Ok(ExecutionTrace {
            initial,
            rounds,
            relocation,
            final_configuration: target.clone(),
            total_cost: total,
        })
    }
}

/// Optimal X-lazy trace. Without a target, ends in the minimizer of the
/// final work vector (smallest rank among ties), which is a plain lazy trace.
pub fn opt_trace(inst: &Instance, target: Option<&Configuration>) -> Result<ExecutionTrace> {
    let history = WorkHistory::compute(inst)?;
    let target = match target {
        Some(x) => x.clone(),
        None => {
            let w = history.final_vector();
            w.space().configuration(w.min().0)
        }
    };
    history.trace_to(&target)
}

/// Brute-force optimum by enumerating every lazy schedule: at a miss any of
/// the `k` servers may serve, at a hit only the empty move is allowed. With
/// a target the cost of moving from the final configuration into it is
/// added.
pub fn oracle_opt(inst: &Instance, target: Option<&Configuration>) -> Result<u64> {
    if let Some(x) = target {
        x.check(inst.metric(), inst.k())?;
    }
    let finals = lazy_final_costs(inst)?;
    Ok(match target {
        None => *finals.values().min().expect("at least one schedule"),
        Some(x) => min_relocated(inst, &finals, x),
    })
}

/// The oracle evaluated at every configuration, in rank order.
pub fn oracle_work_vector(inst: &Instance) -> Result<Vec<u64>> {
    let finals = lazy_final_costs(inst)?;
    let space = ConfigSpace::new(Arc::new(inst.metric().clone()), inst.k())?;
    Ok(space
        .configurations()
        .map(|x| min_relocated(inst, &finals, &x))
        .collect())
}

fn min_relocated(inst: &Instance, finals: &HashMap<u32, u64>, x: &Configuration) -> u64 {
    let distance = if inst.k() <= 8 {
        distance_by_enumeration
    } else {
        distance_between
    };
    finals
        .iter()
        .map(|(&mask, &cost)| {
            let end = Configuration::from_mask(mask);
            cost + distance(inst.metric(), end.points(), x.points())
        })
        .min()
        .expect("at least one schedule")
}

/// Cheapest lazy cost per reachable final configuration.
fn lazy_final_costs(inst: &Instance) -> Result<HashMap<u32, u64>> {
    let k = inst.k();
    let len = inst.requests().len();
    let within_guard = u32::try_from(len)
        .ok()
        .and_then(|l| (k as u64).checked_pow(l))
        .is_some_and(|count| count <= ORACLE_GUARD);
    if !within_guard {
        return Err(Error::OracleGuard {
            k,
            len,
            guard: ORACLE_GUARD,
        });
    }
    let mut finals = HashMap::new();
    explore(inst, inst.initial().mask(), 0, 0, &mut finals);
    Ok(finals)
}

fn explore(inst: &Instance, mask: u32, t: usize, cost: u64, finals: &mut HashMap<u32, u64>) {
    let Some(&r) = inst.requests().get(t) else {
        let best = finals.entry(mask).or_insert(u64::MAX);
        *best = (*best).min(cost);
        return;
    };
    let rbit = 1u32 << r;
    if mask & rbit != 0 {
        explore(inst, mask, t + 1, cost, finals);
        return;
    }
    for server in ConfigSpace::points_of(mask) {
        let next = (mask & !(1 << server)) | rbit;
        explore(inst, next, t + 1, cost + inst.metric().dist(server, r), finals);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::MetricSpace;
    use crate::workfunction::initial_work_vector;

    fn m3() -> MetricSpace {
        MetricSpace::new(vec![vec![0, 1, 3], vec![1, 0, 2], vec![3, 2, 0]]).unwrap()
    }

    fn conf(points: &[Point]) -> Configuration {
        Configuration::new(points.iter().copied()).unwrap()
    }

    fn m3_inst(requests: Vec<Point>) -> Instance {
        Instance::new(m3(), conf(&[0, 1]), requests).unwrap()
    }

    #[test]
    fn opt_cost_examples() {
        let w0 = initial_work_vector(&m3(), &conf(&[0, 1])).unwrap();
        assert_eq!(opt_cost(&w0), 0);
        let h = WorkHistory::compute(&m3_inst(vec![2])).unwrap();
        assert_eq!(opt_cost(h.final_vector()), 2);
        let h = WorkHistory::compute(&m3_inst(vec![2, 1])).unwrap();
        assert_eq!(opt_cost(h.final_vector()), 3);
    }

    #[test]
    fn opt_cost_to_examples() {
        let w0 = initial_work_vector(&m3(), &conf(&[0, 1])).unwrap();
        assert_eq!(opt_cost_to(&w0, &conf(&[0, 1])).unwrap(), 0);
        let h = WorkHistory::compute(&m3_inst(vec![2])).unwrap();
        assert_eq!(opt_cost_to(h.final_vector(), &conf(&[0, 1])).unwrap(), 4);
        assert_eq!(opt_cost_to(h.final_vector(), &conf(&[1, 2])).unwrap(), 3);
    }

    #[test]
    fn opt_trace_examples() {
        let m = m3();
        let t = opt_trace(&m3_inst(vec![]), Some(&conf(&[0, 1]))).unwrap();
        assert!(t.rounds.is_empty() && t.relocation.is_empty());
        assert_eq!(t.total_cost, 0);

        let t = opt_trace(&m3_inst(vec![2]), None).unwrap();
        assert_eq!(t.total_cost, 2);
        assert_eq!(
            t.rounds[0].moves,
            vec![Move {
                from: 1,
                to: 2,
                cost: 2
            }]
        );
        assert_eq!(t.final_configuration, conf(&[0, 2]));
        t.check(&m, &Discipline::Lazy).unwrap();

        let x = conf(&[0, 1]);
        let t = opt_trace(&m3_inst(vec![2]), Some(&x)).unwrap();
        assert_eq!(
            t.rounds[0].moves,
            vec![Move {
                from: 1,
                to: 2,
                cost: 2
            }]
        );
        assert_eq!(
            t.relocation,
            vec![Move {
                from: 2,
                to: 1,
                cost: 2
            }]
        );
        assert_eq!(t.total_cost, 4);
        t.check(&m, &Discipline::XLazy(x)).unwrap();
    }

    #[test]
    fn empty_sequence_relocates_directly() {
        let t = opt_trace(&m3_inst(vec![]), Some(&conf(&[1, 2]))).unwrap();
        assert_eq!(t.total_cost, 3);
        t.check(&m3(), &Discipline::XLazy(conf(&[1, 2]))).unwrap();
    }

    #[test]
    fn oracle_examples() {
        assert_eq!(oracle_opt(&m3_inst(vec![]), None).unwrap(), 0);
        assert_eq!(oracle_opt(&m3_inst(vec![2]), None).unwrap(), 2);
        assert_eq!(oracle_opt(&m3_inst(vec![2]), Some(&conf(&[0, 1]))).unwrap(), 4);
        assert_eq!(oracle_opt(&m3_inst(vec![2, 1]), None).unwrap(), 3);
    }

    #[test]
    fn oracle_refuses_beyond_guard() {
        let inst = Instance::new(MetricSpace::uniform(6).unwrap(), conf(&[0, 1, 2]), [3, 4, 5].repeat(5)).unwrap();
        assert!(matches!(
            oracle_opt(&inst, None),
            Err(Error::OracleGuard { k: 3, len: 15, .. })
        ));
        let ok = inst.with_requests([3, 4, 5].repeat(4)).unwrap();
        assert!(oracle_opt(&ok, None).is_ok());
    }

    #[test]
    fn traces_realize_every_entry() {
        let metric = crate::metric::random_metric(6, 11, 1..=9).unwrap();
        let inst = Instance::new(metric.clone(), conf(&[1, 3, 4]), vec![0, 2, 5, 1, 0, 5, 2, 3]).unwrap();
        let history = WorkHistory::compute(&inst).unwrap();
        let w = history.final_vector();
        for x in w.space().configurations() {
            let trace = history.trace_to(&x).unwrap();
            assert_eq!(trace.total_cost, w.value(&x).unwrap(), "target {x}");
            trace.check(&metric, &Discipline::XLazy(x.clone())).unwrap();
        }
    }
}
