//! Checks of the anchored-sequence argument on concrete instances, strict
//! ratio measurement, and seeded campaigns.
//!
//! Check ids:
//!
//! | id    | statement                                                                  |
//! |-------|----------------------------------------------------------------------------|
//! | `P1`  | `OPT(A₀,ρ,A₀) ≤ 2·OPT(A₀,ρ)`                                               |
//! | `E1`  | `OPT(A₀,ρ) ≤ OPT(A₀,ρσ) ≤ 2·OPT(A₀,ρ)`                                     |
//! | `C1a` | `A₀` is the unique minimizer of `w_ρσ`                                     |
//! | `C1b` | each extracted X-lazy realization of `w_ρσ(X)` is in `A₀` after some round `t`, `|ρ| ≤ t < |ρσ|` |
//! | `C2`  | `w_ρσ(X) = w_ρσ(A₀) + D(A₀,X)` for every `X`                               |
//! | `E2`  | `OPT(A₀,χ) = q·OPT(A₀,ρσ)`                                                 |
//! | `E3`  | `ALG(A₀,χ) = q·ALG(A₀,ρσ)` and the moves on `χ` repeat those on `ρσ`       |
//! | `R1`  | the online algorithm is back in `A₀` after `ρσ`                            |
//! | `T1`  | `ALG(A₀,ρ) ≤ 2α·OPT(A₀,ρ)`                                                 |

use std::collections::HashMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::anchor::{anchor_with_opt, build_chi, AnchorSpec};
use crate::error::{Error, Result};
use crate::generate::{generate_instance, RequestModel};
use crate::metric::{min_pairwise_distance, Instance};
use crate::offline::{opt_cost, WorkHistory};
use crate::rng::seeded_rng;
use crate::trace::{Discipline, ExecutionTrace, Move};
use crate::workfunction::{initial_work_vector, run_wfa};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CheckId {
    P1,
    E1,
    C1a,
    C1b,
    C2,
    E2,
    E3,
    R1,
    T1,
}

impl CheckId {
    pub const ALL: [CheckId; 9] = [
        CheckId::P1,
        CheckId::E1,
        CheckId::C1a,
        CheckId::C1b,
        CheckId::C2,
        CheckId::E2,
        CheckId::E3,
        CheckId::R1,
        CheckId::T1,
    ];

    pub fn describe(self) -> &'static str {
        match self {
            CheckId::P1 => "OPT(A0,rho,A0) <= 2*OPT(A0,rho): returning to A0 at most doubles the optimum",
            CheckId::E1 => "OPT(A0,rho) <= OPT(A0,rho sigma) <= 2*OPT(A0,rho): the anchor adds at most OPT",
            CheckId::C1a => "A0 is the unique minimizer of the work vector after rho sigma",
            CheckId::C1b => "every extracted X-lazy optimum for rho sigma sits in A0 after some anchor round",
            CheckId::C2 => "w(X) = w(A0) + D(A0,X) for every configuration X after rho sigma",
            CheckId::E2 => "OPT(A0,chi) = q*OPT(A0,rho sigma) for chi = (rho sigma)^q",
            CheckId::E3 => "ALG(A0,chi) = q*ALG(A0,rho sigma), with the online moves repeating q times",
            CheckId::R1 => "the online algorithm is back in A0 after rho sigma",
            CheckId::T1 => "ALG(A0,rho) <= 2*alpha*OPT(A0,rho)",
        }
    }
}

impl fmt::Display for CheckId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
}

impl Status {
    fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Inconclusive => "inconclusive",
        })
    }
}

/// Assumed competitive ratio: a fixed value or `2k-1` resolved per instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Alpha {
    #[default]
    TwoKMinusOne,
    Fixed(u64),
}

impl Alpha {
    pub fn resolve(self, k: usize) -> u64 {
        match self {
            Alpha::TwoKMinusOne => 2 * k as u64 - 1,
            Alpha::Fixed(a) => a,
        }
    }
}

impl FromStr for Alpha {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "2k-1" {
            return Ok(Alpha::TwoKMinusOne);
        }
        match s.parse::<u64>() {
            Ok(a) if a > 0 => Ok(Alpha::Fixed(a)),
            _ => Err(Error::InvalidParameter(format!(
                "alpha must be \"2k-1\" or a positive integer, got {s:?}"
            ))),
        }
    }
}

impl fmt::Display for Alpha {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Alpha::TwoKMinusOne => f.write_str("2k-1"),
            Alpha::Fixed(a) => write!(f, "{a}"),
        }
    }
}

impl Serialize for Alpha {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Alpha::TwoKMinusOne => s.serialize_str("2k-1"),
            Alpha::Fixed(a) => s.serialize_u64(*a),
        }
    }
}

impl<'de> Deserialize<'de> for Alpha {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(u64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(0) => Err(serde::de::Error::custom("alpha must be positive")),
            Raw::Int(a) => Ok(Alpha::Fixed(a)),
            Raw::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckResult {
    pub id: CheckId,
    pub status: Status,
    pub lhs: String,
    pub rhs: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub fingerprint: String,
    pub n: usize,
    pub k: usize,
    pub rho_len: usize,
    pub alpha: u64,
    pub beta_initial: u64,
    pub beta_used: u64,
    pub q: usize,
    pub m: u64,
    pub ell: u64,
    pub opt_rho: u64,
    pub alg_rho: u64,
    pub opt_rho_sigma: u64,
    pub alg_rho_sigma: u64,
    pub opt_chi: u64,
    pub alg_chi: u64,
    pub checks: Vec<CheckResult>,
}

impl PropertyReport {
    pub fn check(&self, id: CheckId) -> &CheckResult {
        self.checks
            .iter()
            .find(|c| c.id == id)
            .expect("every check id is present")
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.status == Status::Pass)
    }

    /// `R1` could not be decided within the `β` escalation cap.
    pub fn inconclusive(&self) -> bool {
        self.check(CheckId::R1).status == Status::Inconclusive
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization is infallible")
    }
}

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    /// `β` escalation stops once `β` would exceed `beta_cap_factor · ℓ`.
    pub beta_cap_factor: u64,
    /// Maximum number of target configurations for `C1b`.
    pub c1b_limit: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            beta_cap_factor: 1 << 20,
            c1b_limit: 512,
        }
    }
}

/// Short stable identifier of an instance: SHA-256 of its JSON, 16 hex digits.
pub fn fingerprint(inst: &Instance) -> String {
    let digest = Sha256::digest(inst.to_json().as_bytes());
    hex::encode(&digest[..8])
}

struct Anchored {
    anchor: AnchorSpec,
    rho_sigma: Instance,
    wfa: ExecutionTrace,
    returned: bool,
}

fn anchored_run(inst: &Instance, opt_rho: u64, alpha: u64, beta: u64) -> Result<Anchored> {
    let anchor = anchor_with_opt(inst, opt_rho, alpha, beta)?;
    let rho_sigma = inst.with_requests(build_chi(inst.requests(), &anchor.sigma, 1)?)?;
    let wfa = run_wfa(&rho_sigma)?;
    let returned = &wfa.final_configuration == inst.initial();
    Ok(Anchored {
        anchor,
        rho_sigma,
        wfa,
        returned,
    })
}

fn final_opt(inst: &Instance) -> Result<u64> {
    let mut w = initial_work_vector(inst.metric(), inst.initial())?;
    for &r in inst.requests() {
        w = w.update(r)?;
    }
    Ok(opt_cost(&w))
}

/// Runs every check on `inst` with `χ = (ρσ)^q`.
///
/// If the online algorithm does not return to `A₀` after `ρσ`, the
/// additive constant `β` used to size the anchor is escalated (`0 → 1`,
/// then doubled) until it does or `β` exceeds the cap; in the latter case
/// `R1` is reported inconclusive and the remaining checks use the anchor
/// built from `beta_initial`.
pub fn verify_anchored_properties(
    inst: &Instance,
    alpha: u64,
    beta_initial: u64,
    q: usize,
    options: &VerifyOptions,
) -> Result<PropertyReport> {
    if inst.k() < 2 {
        return Err(Error::SingleServer);
    }
    if q == 0 {
        return Err(Error::InvalidParameter("q must be at least 1".into()));
    }
    let a0 = inst.initial();
    let history_rho = WorkHistory::compute(inst)?;
    let w_rho = history_rho.final_vector();
    let opt_rho = opt_cost(w_rho);
    let alg_rho = run_wfa(inst)?.total_cost;

    let ell = min_pairwise_distance(a0, inst.metric())?;
    let cap = options.beta_cap_factor.saturating_mul(ell);
    let mut runs = HashMap::new();
    let outcome = escalate_beta(beta_initial, cap, |beta| {
        let run = anchored_run(inst, opt_rho, alpha, beta)?;
        let returned = run.returned;
        runs.retain(|&b, _| b == beta_initial);
        runs.insert(beta, run);
        Ok(returned)
    })?;
    let (beta, inconclusive) = match outcome {
        BetaOutcome::Returned(beta) => (beta, false),
        BetaOutcome::CapExceeded => (beta_initial, true),
    };
    let run = runs.remove(&beta).expect("the chosen beta was tried");
    drop(runs);
    let Anchored {
        anchor,
        rho_sigma,
        wfa: wfa_rs,
        returned,
    } = run;

    let history_rs = WorkHistory::compute(&rho_sigma)?;
    let w_rs = history_rs.final_vector();
    let opt_rs = opt_cost(w_rs);
    let space = w_rs.space().clone();
    let a0_rank = space.rank_of(a0)?;
    let w_rs_a0 = w_rs.value_at_rank(a0_rank);
    let distances = history_rs.vector(0);

    let chi = rho_sigma.with_requests(build_chi(inst.requests(), &anchor.sigma, q)?)?;
    let opt_chi = final_opt(&chi)?;
    let wfa_chi = run_wfa(&chi)?;

    let qq = q as u64;
    let mut checks = Vec::with_capacity(CheckId::ALL.len());
    let mut push = |id, ok: bool, lhs: String, rhs: String, witness: Option<String>| {
        checks.push(CheckResult {
            id,
            status: Status::from_bool(ok),
            lhs,
            rhs,
            witness: if ok { None } else { witness },
        })
    };

    let retrace = w_rho.value_at_rank(space.rank_of(a0)?);
    push(
        CheckId::P1,
        retrace <= 2 * opt_rho,
        retrace.to_string(),
        (2 * opt_rho).to_string(),
        None,
    );

    push(
        CheckId::E1,
        opt_rho <= opt_rs && opt_rs <= 2 * opt_rho,
        format!("{opt_rho} <= {opt_rs}"),
        format!("{opt_rs} <= {}", 2 * opt_rho),
        None,
    );

    let minimizers: Vec<usize> = (0..space.len()).filter(|&r| w_rs.value_at_rank(r) == opt_rs).collect();
    push(
        CheckId::C1a,
        minimizers == [a0_rank],
        format!("{} minimizer(s)", minimizers.len()),
        format!("unique minimizer {a0}"),
        minimizers
            .iter()
            .find(|&&r| r != a0_rank)
            .map(|&r| format!("also minimal: {}", space.configuration(r))),
    );

    let c1b_witness = c1b_failure(inst, &history_rs, options.c1b_limit)?;
    push(
        CheckId::C1b,
        c1b_witness.is_none(),
        format!("targets checked: {}", space.len().min(options.c1b_limit)),
        format!(
            "A0 visited in rounds [{}, {})",
            inst.requests().len(),
            rho_sigma.requests().len()
        ),
        c1b_witness,
    );

    let c2_witness = (0..space.len()).find(|&r| w_rs.value_at_rank(r) != w_rs_a0 + distances.value_at_rank(r));
    push(
        CheckId::C2,
        c2_witness.is_none(),
        "w(X)".into(),
        format!("{w_rs_a0} + D(A0,X)"),
        c2_witness.map(|r| {
            format!(
                "X = {}: w(X) = {}, w(A0) + D(A0,X) = {}",
                space.configuration(r),
                w_rs.value_at_rank(r),
                w_rs_a0 + distances.value_at_rank(r)
            )
        }),
    );

    push(
        CheckId::E2,
        opt_chi == qq * opt_rs,
        opt_chi.to_string(),
        (qq * opt_rs).to_string(),
        None,
    );

    let block: Vec<Move> = wfa_rs.moves().copied().collect();
    let repeated = block.repeat(q);
    let chi_moves: Vec<Move> = wfa_chi.moves().copied().collect();
    let e3_costs = wfa_chi.total_cost == qq * wfa_rs.total_cost;
    let e3_moves = chi_moves == repeated;
    push(
        CheckId::E3,
        e3_costs && e3_moves,
        wfa_chi.total_cost.to_string(),
        (qq * wfa_rs.total_cost).to_string(),
        (!e3_moves).then(|| {
            let at = chi_moves
                .iter()
                .zip(&repeated)
                .position(|(a, b)| a != b)
                .unwrap_or(chi_moves.len().min(repeated.len()));
            format!("move lists diverge at round {}", at + 1)
        }),
    );

    checks.push(CheckResult {
        id: CheckId::R1,
        status: if inconclusive {
            Status::Inconclusive
        } else {
            Status::from_bool(returned)
        },
        lhs: wfa_rs.final_configuration.to_string(),
        rhs: a0.to_string(),
        witness: inconclusive.then(|| format!("beta escalation exceeded cap {cap}")),
    });

    let bound = 2 * alpha * opt_rho;
    checks.push(CheckResult {
        id: CheckId::T1,
        status: Status::from_bool(alg_rho <= bound),
        lhs: alg_rho.to_string(),
        rhs: bound.to_string(),
        witness: None,
    });

    Ok(PropertyReport {
        fingerprint: fingerprint(inst),
        n: inst.metric().n(),
        k: inst.k(),
        rho_len: inst.requests().len(),
        alpha,
        beta_initial,
        beta_used: beta,
        q,
        m: anchor.m,
        ell: anchor.ell,
        opt_rho,
        alg_rho,
        opt_rho_sigma: opt_rs,
        alg_rho_sigma: wfa_rs.total_cost,
        opt_chi,
        alg_chi: wfa_chi.total_cost,
        checks,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BetaOutcome {
    /// Smallest tried `β` for which the online algorithm returned to `A₀`.
    Returned(u64),
    CapExceeded,
}

/// Tries `start`, then `1` (if `start = 0`) and successive doublings, until
/// `returns(β)` holds or `β` exceeds `cap`.
pub fn escalate_beta(start: u64, cap: u64, mut returns: impl FnMut(u64) -> Result<bool>) -> Result<BetaOutcome> {
    let mut beta = start;
    loop {
        if returns(beta)? {
            return Ok(BetaOutcome::Returned(beta));
        }
        beta = if beta == 0 { 1 } else { beta.saturating_mul(2) };
        if beta > cap {
            return Ok(BetaOutcome::CapExceeded);
        }
    }
}

/// First target configuration whose extracted realization never sits in
/// `A₀` during the anchor, or is not a valid X-lazy trace of the right cost.
fn c1b_failure(inst: &Instance, history: &WorkHistory, limit: usize) -> Result<Option<String>> {
    let w = history.final_vector();
    let space = w.space();
    let targets: Vec<usize> = if space.len() <= limit {
        (0..space.len()).collect()
    } else {
        let seed = u64::from_str_radix(&fingerprint(inst), 16).expect("hex fingerprint");
        let mut picked = sample(&mut seeded_rng(seed), space.len(), limit).into_vec();
        picked.sort_unstable();
        picked
    };
    let lo = inst.requests().len();
    let hi = history.rounds();
    let failures: Vec<Option<String>> = targets
        .par_iter()
        .map(|&rank| -> Result<Option<String>> {
            let x = space.configuration(rank);
            let trace = history.trace_to(&x)?;
            if let Err(e) = trace.check(space.metric(), &Discipline::XLazy(x.clone())) {
                return Ok(Some(format!("X = {x}: invalid trace: {e}")));
            }
            if trace.total_cost != w.value_at_rank(rank) {
                return Ok(Some(format!(
                    "X = {x}: trace cost {} != w(X) = {}",
                    trace.total_cost,
                    w.value_at_rank(rank)
                )));
            }
            let visits = (lo..hi).any(|t| trace.configuration_after(t) == inst.initial());
            Ok((!visits).then(|| format!("X = {x}: realization avoids A0 in rounds [{lo}, {hi})")))
        })
        .collect::<Result<_>>()?;
    Ok(failures.into_iter().flatten().next())
}

/// One row of strict-ratio measurements.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioRow {
    pub n: usize,
    pub k: usize,
    pub rho_len: usize,
    pub opt: u64,
    pub alg: u64,
    /// `alg / opt`; absent when `opt = 0`.
    pub ratio: Option<f64>,
    /// `4k - 2`.
    pub bound: u64,
    pub pass: bool,
}

/// Online cost against `(4k-2)·OPT`, compared in exact integers.
pub fn measure_strict_ratio(inst: &Instance) -> Result<RatioRow> {
    let alg = run_wfa(inst)?.total_cost;
    let opt = final_opt(inst)?;
    let bound = 4 * inst.k() as u64 - 2;
    Ok(RatioRow {
        n: inst.metric().n(),
        k: inst.k(),
        rho_len: inst.requests().len(),
        opt,
        alg,
        ratio: (opt > 0).then(|| alg as f64 / opt as f64),
        bound,
        pass: alg as u128 <= bound as u128 * opt as u128,
    })
}

/// Campaign description, as read from JSON. All ranges are inclusive.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignConfig {
    pub seeds: [u64; 2],
    pub n: [usize; 2],
    pub k: [usize; 2],
    pub rho_len: [usize; 2],
    pub request_model: RequestModel,
    #[serde(default)]
    pub alpha: Alpha,
    #[serde(default)]
    pub beta: u64,
    #[serde(default = "default_q")]
    pub q: usize,
}

fn default_q() -> usize {
    3
}

impl CampaignConfig {
    /// The default desk campaign: 100 uniform instances, `n ≤ 8`,
    /// `k ∈ {2, 3}`, `|ρ| ≤ 12`.
    pub fn desk() -> Self {
        CampaignConfig {
            seeds: [1, 100],
            n: [4, 8],
            k: [2, 3],
            rho_len: [0, 12],
            request_model: RequestModel::Uniform,
            alpha: Alpha::TwoKMinusOne,
            beta: 0,
            q: 3,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let config: CampaignConfig = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidCampaign(msg));
        if self.n[0] > self.n[1] || self.k[0] > self.k[1] || self.rho_len[0] > self.rho_len[1] {
            return bad("every range must have lo <= hi (an empty campaign uses seeds with lo > hi)".into());
        }
        if self.k[0] < 2 {
            return bad("k must be at least 2".into());
        }
        if self.n[0] <= self.k[0] {
            return bad(format!(
                "n must exceed k (n starts at {}, k at {})",
                self.n[0], self.k[0]
            ));
        }
        if self.n[1] > crate::metric::MAX_POINTS {
            return bad(format!("n may not exceed {}", crate::metric::MAX_POINTS));
        }
        if self.q == 0 {
            return bad("q must be at least 1".into());
        }
        Ok(())
    }

    pub fn seeds(&self) -> impl Iterator<Item = u64> + Clone {
        self.seeds[0]..=self.seeds[1]
    }

    /// Instance for `seed`: `n`, `k` (capped at `n - 1`) and `|ρ|` are drawn
    /// from ChaCha8 seeded with `seed`, then the instance is generated with
    /// the same seed.
    pub fn instance(&self, seed: u64) -> Result<Instance> {
        let mut rng = seeded_rng(seed);
        let n = rng.random_range(self.n[0]..=self.n[1]);
        let k = rng.random_range(self.k[0]..=self.k[1].min(n - 1));
        let rho_len = rng.random_range(self.rho_len[0]..=self.rho_len[1]);
        generate_instance(n, k, rho_len, seed, self.request_model)
    }
}

/// One CSV row of a campaign.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct CampaignRow {
    pub instance_id: usize,
    pub seed: u64,
    pub n: usize,
    pub k: usize,
    pub rho_len: usize,
    pub m: u64,
    pub ell: u64,
    pub beta_used: u64,
    pub opt: u64,
    pub alg: u64,
    pub opt_rho_sigma: u64,
    pub alg_rho_sigma: u64,
    pub P1: Status,
    pub E1: Status,
    pub C1a: Status,
    pub C1b: Status,
    pub C2: Status,
    pub E2: Status,
    pub E3: Status,
    pub R1: Status,
    pub T1: Status,
    pub ratio_pass: Status,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub seeds: Vec<u64>,
    pub properties: Vec<PropertyReport>,
    pub ratios: Vec<RatioRow>,
}

impl ExperimentReport {
    pub fn len(&self) -> usize {
        self.properties.len()
    }

    pub fn is_empty(&self) -> bool {
        self.properties.is_empty()
    }

    pub fn all_pass(&self) -> bool {
        self.properties.iter().all(PropertyReport::all_pass) && self.ratios.iter().all(|r| r.pass)
    }

    pub fn rows(&self) -> Vec<CampaignRow> {
        self.properties
            .iter()
            .zip(&self.ratios)
            .zip(&self.seeds)
            .enumerate()
            .map(|(id, ((p, ratio), &seed))| {
                let s = |c| p.check(c).status;
                CampaignRow {
                    instance_id: id,
                    seed,
                    n: p.n,
                    k: p.k,
                    rho_len: p.rho_len,
                    m: p.m,
                    ell: p.ell,
                    beta_used: p.beta_used,
                    opt: p.opt_rho,
                    alg: p.alg_rho,
                    opt_rho_sigma: p.opt_rho_sigma,
                    alg_rho_sigma: p.alg_rho_sigma,
                    P1: s(CheckId::P1),
                    E1: s(CheckId::E1),
                    C1a: s(CheckId::C1a),
                    C1b: s(CheckId::C1b),
                    C2: s(CheckId::C2),
                    E2: s(CheckId::E2),
                    E3: s(CheckId::E3),
                    R1: s(CheckId::R1),
                    T1: s(CheckId::T1),
                    ratio_pass: Status::from_bool(ratio.pass),
                }
            })
            .collect()
    }

    /// Writes the CSV report; the header is written even for no rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(out);
        writer.write_record(CSV_HEADER)?;
        for row in self.rows() {
            writer.serialize(row)?;
        }
        writer.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is utf-8")
    }
}

pub const CSV_HEADER: [&str; 22] = [
    "instance_id",
    "seed",
    "n",
    "k",
    "rho_len",
    "m",
    "ell",
    "beta_used",
    "opt",
    "alg",
    "opt_rho_sigma",
    "alg_rho_sigma",
    "P1",
    "E1",
    "C1a",
    "C1b",
    "C2",
    "E2",
    "E3",
    "R1",
    "T1",
    "ratio_pass",
];

/// Verifies and measures every instance of a campaign. Instances run in
/// parallel; results come back in seed order.
pub fn run_campaign(config: &CampaignConfig) -> Result<ExperimentReport> {
    run_campaign_with(config, &VerifyOptions::default())
}

pub fn run_campaign_with(config: &CampaignConfig, options: &VerifyOptions) -> Result<ExperimentReport> {
    config.validate()?;
    let seeds: Vec<u64> = config.seeds().collect();
    let results = seeds
        .par_iter()
        .map(|&seed| {
            let inst = config.instance(seed)?;
            let alpha = config.alpha.resolve(inst.k());
            let property = verify_anchored_properties(&inst, alpha, config.beta, config.q, options)?;
            let ratio = measure_strict_ratio(&inst)?;
            Ok((property, ratio))
        })
        .collect::<Result<Vec<_>>>()?;
    let (properties, ratios) = results.into_iter().unzip();
    Ok(ExperimentReport {
        seeds,
        properties,
        ratios,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{Configuration, MetricSpace};

    fn m3_inst(requests: Vec<usize>) -> Instance {
        let m = MetricSpace::new(vec![vec![0, 1, 3], vec![1, 0, 2], vec![3, 2, 0]]).unwrap();
        Instance::new(m, Configuration::new([0, 1]).unwrap(), requests).unwrap()
    }

    #[test]
    fn m3_all_nine_checks_pass() {
        let report = verify_anchored_properties(&m3_inst(vec![2]), 3, 0, 3, &VerifyOptions::default()).unwrap();
        assert_eq!(report.checks.len(), 9);
        for id in CheckId::ALL {
            assert_eq!(report.check(id).status, Status::Pass, "{id}: {:?}", report.check(id));
        }
        assert_eq!((report.m, report.ell, report.opt_rho, report.alg_rho), (13, 1, 2, 2));
    }

    #[test]
    fn empty_prefix_degenerates() {
        let report = verify_anchored_properties(&m3_inst(vec![]), 3, 0, 3, &VerifyOptions::default()).unwrap();
        assert!(report.all_pass());
        assert_eq!(report.m, 5);
        assert_eq!((report.opt_rho, report.opt_rho_sigma), (0, 0));
        assert_eq!(report.check(CheckId::E1).lhs, "0 <= 0");
    }

    #[test]
    fn single_server_is_rejected() {
        let inst = Instance::new(
            MetricSpace::uniform(3).unwrap(),
            Configuration::new([0]).unwrap(),
            vec![1],
        )
        .unwrap();
        assert!(matches!(
            verify_anchored_properties(&inst, 1, 0, 3, &VerifyOptions::default()),
            Err(Error::SingleServer)
        ));
    }

    #[test]
    fn beta_escalation_sequence() {
        let mut tried = Vec::new();
        let outcome = escalate_beta(0, 100, |b| {
            tried.push(b);
            Ok(b >= 6)
        })
        .unwrap();
        assert_eq!(outcome, BetaOutcome::Returned(8));
        assert_eq!(tried, vec![0, 1, 2, 4, 8]);

        let mut tried = Vec::new();
        let outcome = escalate_beta(5, 40, |b| {
            tried.push(b);
            Ok(false)
        })
        .unwrap();
        assert_eq!(outcome, BetaOutcome::CapExceeded);
        assert_eq!(tried, vec![5, 10, 20, 40]);

        assert_eq!(escalate_beta(3, 0, |_| Ok(true)).unwrap(), BetaOutcome::Returned(3));
    }

    #[test]
    fn ratio_examples() {
        let empty = measure_strict_ratio(&m3_inst(vec![])).unwrap();
        assert_eq!((empty.alg, empty.opt, empty.pass, empty.ratio), (0, 0, true, None));
        let one = measure_strict_ratio(&m3_inst(vec![2])).unwrap();
        assert_eq!((one.alg, one.opt, one.bound, one.pass), (2, 2, 6, true));
        assert_eq!(one.ratio, Some(1.0));
    }

    #[test]
    fn alpha_parsing() {
        assert_eq!("2k-1".parse::<Alpha>().unwrap(), Alpha::TwoKMinusOne);
        assert_eq!("7".parse::<Alpha>().unwrap(), Alpha::Fixed(7));
        assert!("0".parse::<Alpha>().is_err());
        assert!("k".parse::<Alpha>().is_err());
        assert_eq!(Alpha::TwoKMinusOne.resolve(3), 5);
        let json = serde_json::to_string(&[Alpha::TwoKMinusOne, Alpha::Fixed(4)]).unwrap();
        assert_eq!(json, r#"["2k-1",4]"#);
        let back: Vec<Alpha> = serde_json::from_str(&json).unwrap();
        assert_eq!(back, vec![Alpha::TwoKMinusOne, Alpha::Fixed(4)]);
    }

    #[test]
    fn empty_campaign_has_header_only() {
        let mut config = CampaignConfig::desk();
        config.seeds = [1, 0];
        let report = run_campaign(&config).unwrap();
        assert!(report.is_empty() && report.all_pass());
        assert_eq!(report.to_csv_string(), format!("{}\n", CSV_HEADER.join(",")));
    }

    #[test]
    fn campaign_config_validation() {
        let text = r#"{"seeds":[1,3],"n":[4,6],"k":[2,3],"rho_len":[0,5],"request_model":"uniform","alpha":"2k-1","beta":0,"q":3}"#;
        assert_eq!(CampaignConfig::from_json(text).unwrap().seeds().count(), 3);
        let unknown = text.replace("uniform", "zipf");
        assert!(CampaignConfig::from_json(&unknown).is_err());
        let single = text.replace(r#""k":[2,3]"#, r#""k":[1,3]"#);
        assert!(matches!(
            CampaignConfig::from_json(&single),
            Err(Error::InvalidCampaign(_))
        ));
    }

    #[test]
    fn small_campaign_passes_and_is_deterministic() {
        let config = CampaignConfig {
            seeds: [1, 6],
            n: [3, 6],
            k: [2, 3],
            rho_len: [0, 6],
            ..CampaignConfig::desk()
        };
        let a = run_campaign(&config).unwrap();
        assert!(a.all_pass(), "{}", a.to_csv_string());
        assert_eq!(a.to_csv_string(), run_campaign(&config).unwrap().to_csv_string());
    }
}
