//! Execution traces shared by the online algorithm and the offline optimum.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metric::{Configuration, MetricSpace, Point};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Move {
    pub from: Point,
    pub to: Point,
    pub cost: u64,
}

impl Move {
    pub fn is_empty(&self) -> bool {
        self.from == self.to
    }
}

/// One round: the request, the move made to serve it (an empty move when the
/// request was already covered) and the configuration afterwards.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Round {
    pub request: Point,
    pub moves: Vec<Move>,
    pub configuration: Configuration,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecutionTrace {
    pub initial: Configuration,
    pub rounds: Vec<Round>,
    /// Unforced moves of the last round into the target configuration
    /// (X-lazy traces only; always empty for online runs).
    pub relocation: Vec<Move>,
    pub final_configuration: Configuration,
    pub total_cost: u64,
}

/// Move discipline a trace is checked against.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Discipline {
    Lazy,
    /// Lazy, plus a final relocation that ends exactly in this configuration.
    XLazy(Configuration),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TraceViolation {
    #[error("round {round}: expected exactly one move, found {found}")]
    MoveCount { round: usize, found: usize },
    #[error("round {round}: move ends at {to}, not at the request {request}")]
    NotForced { round: usize, to: Point, request: Point },
    #[error("round {round}: no server at {from}")]
    NoServer { round: usize, from: Point },
    #[error("round {round}: request {request} is covered but a server moved onto it")]
    CoveredRequestMoved { round: usize, request: Point },
    #[error("round {round}: recorded configuration {recorded} differs from replayed {replayed}")]
    Configuration {
        round: usize,
        recorded: Configuration,
        replayed: Configuration,
    },
    #[error("move {from}->{to} records cost {recorded}, metric says {actual}")]
    Cost {
        from: Point,
        to: Point,
        recorded: u64,
        actual: u64,
    },
    #[error("relocation move {from}->{to} does not go from outside the target into it")]
    Relocation { from: Point, to: Point },
    #[error("a lazy trace may not relocate")]
    UnexpectedRelocation,
    #[error("final configuration {recorded} differs from replayed {replayed}")]
    FinalConfiguration {
        recorded: Configuration,
        replayed: Configuration,
    },
    #[error("total cost {recorded} differs from the sum of moves {summed}")]
    TotalCost { recorded: u64, summed: u64 },
}

impl ExecutionTrace {
    /// Configuration at the end of round `t`; round 0 is the initial state.
    pub fn configuration_after(&self, t: usize) -> &Configuration {
        if t == 0 {
            &self.initial
        } else {
            &self.rounds[t - 1].configuration
        }
    }

    /// All non-relocation moves in order.
    pub fn moves(&self) -> impl Iterator<Item = &Move> {
        self.rounds.iter().flat_map(|r| r.moves.iter())
    }

    /// Replays the trace and checks the service invariant, move costs, the
    /// given discipline and the cost total.
    pub fn check(&self, metric: &MetricSpace, discipline: &Discipline) -> Result<(), TraceViolation> {
        let mut current = self.initial.clone();
        let mut summed = 0u64;
        let check_cost = |m: &Move| {
            let actual = metric.dist(m.from, m.to);
            if actual == m.cost {
                Ok(())
            } else {
                Err(TraceViolation::Cost {
                    from: m.from,
                    to: m.to,
                    recorded: m.cost,
                    actual,
                })
            }
        };
        for (i, round) in self.rounds.iter().enumerate() {
            let t = i + 1;
            let [m] = round.moves.as_slice() else {
                return Err(TraceViolation::MoveCount {
                    round: t,
                    found: round.moves.len(),
                });
            };
            if m.to != round.request {
                return Err(TraceViolation::NotForced {
                    round: t,
                    to: m.to,
                    request: round.request,
                });
            }
            if !current.contains(m.from) {
                return Err(TraceViolation::NoServer { round: t, from: m.from });
            }
            if !m.is_empty() && current.contains(round.request) {
                return Err(TraceViolation::CoveredRequestMoved {
                    round: t,
                    request: round.request,
                });
            }
            check_cost(m)?;
            summed += m.cost;
            current = current.replace(m.from, m.to);
            if current != round.configuration {
                return Err(TraceViolation::Configuration {
                    round: t,
                    recorded: round.configuration.clone(),
                    replayed: current,
                });
            }
        }

        match discipline {
            Discipline::Lazy if !self.relocation.is_empty() => return Err(TraceViolation::UnexpectedRelocation),
            Discipline::Lazy => {}
            Discipline::XLazy(target) => {
                let mut mask = current.mask();
                for m in &self.relocation {
                    let legal = !target.contains(m.from)
                        && target.contains(m.to)
                        && mask & (1 << m.from) != 0
                        && mask & (1 << m.to) == 0;
                    if !legal {
                        return Err(TraceViolation::Relocation { from: m.from, to: m.to });
                    }
                    check_cost(m)?;
                    summed += m.cost;
                    mask = (mask & !(1 << m.from)) | (1 << m.to);
                }
                current = Configuration::from_mask(mask);
                if &current != target {
                    return Err(TraceViolation::FinalConfiguration {
                        recorded: target.clone(),
                        replayed: current,
                    });
                }
            }
        }

        if current != self.final_configuration {
            return Err(TraceViolation::FinalConfiguration {
                recorded: self.final_configuration.clone(),
                replayed: current,
            });
        }
        if summed != self.total_cost {
            return Err(TraceViolation::TotalCost {
                recorded: self.total_cost,
                summed,
            });
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trace serialization is infallible")
    }
}
