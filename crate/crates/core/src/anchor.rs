//! The anchor sequence: `m` round-robin cycles over the initial
//! configuration, long enough that both the optimum and a competitive online
//! algorithm are driven back to the initial configuration.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{min_pairwise_distance, Instance, Point};
use crate::offline::{opt_cost, WorkHistory};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnchorSpec {
    /// Minimum distance between two points of the initial configuration.
    pub ell: u64,
    /// Number of round-robin cycles.
    pub m: u64,
    /// Competitive ratio assumed for the online algorithm.
    pub alpha: u64,
    /// Additive constant assumed for the online algorithm.
    pub beta: u64,
    /// Optimal cost of the prefix the anchor is built for.
    pub opt_prefix: u64,
    pub sigma: Vec<Point>,
}

/// `⌈max(2k·opt/ℓ + k², (2α·opt + β)/ℓ)⌉ + 1`, in exact integer arithmetic.
pub fn anchor_cycles(k: u64, ell: u64, opt: u64, alpha: u64, beta: u64) -> Result<u64> {
    if ell == 0 {
        return Err(Error::InvalidParameter("ell must be positive".into()));
    }
    let (k, ell, opt, alpha, beta) = (k as u128, ell as u128, opt as u128, alpha as u128, beta as u128);
    let matching_term = (2 * k * opt + k * k * ell).div_ceil(ell);
    let competitive_term = (2 * alpha * opt + beta).div_ceil(ell);
    let m = matching_term.max(competitive_term) + 1;
    u64::try_from(m).map_err(|_| Error::InvalidParameter(format!("anchor length {m} overflows")))
}

/// Builds the anchor for `inst`'s initial configuration and request prefix.
pub fn compute_anchor(inst: &Instance, alpha: u64, beta: u64) -> Result<AnchorSpec> {
    let opt = opt_cost(WorkHistory::compute(inst)?.final_vector());
    anchor_with_opt(inst, opt, alpha, beta)
}

/// As [`compute_anchor`] with `OPT(A₀, ρ)` supplied by the caller.
pub fn anchor_with_opt(inst: &Instance, opt_prefix: u64, alpha: u64, beta: u64) -> Result<AnchorSpec> {
    if alpha == 0 {
        return Err(Error::InvalidParameter("alpha must be positive".into()));
    }
    let ell = min_pairwise_distance(inst.initial(), inst.metric())?;
    let k = inst.k() as u64;
    let m = anchor_cycles(k, ell, opt_prefix, alpha, beta)?;
    let cycle = inst.initial().points();
    let len = usize::try_from(m)
        .ok()
        .and_then(|m| m.checked_mul(cycle.len()))
        .ok_or_else(|| Error::InvalidParameter(format!("anchor of {m} cycles is too long")))?;
    let sigma = cycle.iter().copied().cycle().take(len).collect();
    Ok(AnchorSpec {
        ell,
        m,
        alpha,
        beta,
        opt_prefix,
        sigma,
    })
}

/// `(ρσ)^q`.
pub fn build_chi(rho: &[Point], sigma: &[Point], q: usize) -> Result<Vec<Point>> {
    if q == 0 {
        return Err(Error::InvalidParameter("q must be at least 1".into()));
    }
    let block: Vec<Point> = rho.iter().chain(sigma).copied().collect();
    Ok(block.repeat(q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{Configuration, MetricSpace};
    use crate::workfunction::run_wfa;

    fn m3_inst(requests: Vec<Point>) -> Instance {
        let m = MetricSpace::new(vec![vec![0, 1, 3], vec![1, 0, 2], vec![3, 2, 0]]).unwrap();
        Instance::new(m, Configuration::new([0, 1]).unwrap(), requests).unwrap()
    }

    #[test]
    fn cycle_count_arithmetic() {
        assert_eq!(anchor_cycles(2, 1, 0, 3, 0).unwrap(), 5);
        assert_eq!(anchor_cycles(2, 3, 0, 3, 0).unwrap(), 5);
        assert_eq!(anchor_cycles(2, 1, 10, 3, 5).unwrap(), 66);
        assert_eq!(anchor_cycles(2, 1, 2, 3, 0).unwrap(), 13);
        // ceilings: 2·2·5/3 + 4 = 10.67 -> 11; (2·3·5+1)/3 = 10.33 -> 11
        assert_eq!(anchor_cycles(2, 3, 5, 3, 1).unwrap(), 12);
        assert!(anchor_cycles(2, 0, 5, 3, 1).is_err());
    }

    #[test]
    fn anchor_examples() {
        let a = compute_anchor(&m3_inst(vec![]), 3, 0).unwrap();
        assert_eq!((a.m, a.sigma.len()), (5, 10));

        let a = compute_anchor(&m3_inst(vec![2]), 3, 0).unwrap();
        assert_eq!((a.opt_prefix, a.ell, a.m, a.sigma.len()), (2, 1, 13, 26));
        assert_eq!(&a.sigma[..4], &[0, 1, 0, 1]);
        let ml = a.m * a.ell;
        assert!(ml > 2 * a.alpha * a.opt_prefix + a.beta);
        assert!(ml > 2 * 2 * a.opt_prefix + 4 * a.ell);
    }

    #[test]
    fn anchor_needs_two_servers() {
        let m = MetricSpace::uniform(3).unwrap();
        let inst = Instance::new(m, Configuration::new([0]).unwrap(), vec![1]).unwrap();
        assert!(matches!(compute_anchor(&inst, 1, 0), Err(Error::SingleServer)));
    }

    #[test]
    fn anchor_alone_is_free() {
        let inst = m3_inst(vec![2, 1, 2]);
        let a = compute_anchor(&inst, 3, 7).unwrap();
        let only_sigma = inst.with_requests(a.sigma).unwrap();
        assert_eq!(run_wfa(&only_sigma).unwrap().total_cost, 0);
    }

    #[test]
    fn chi_construction() {
        assert_eq!(build_chi(&[2], &[0, 1], 1).unwrap(), vec![2, 0, 1]);
        assert_eq!(build_chi(&[2], &[0, 1], 3).unwrap(), vec![2, 0, 1, 2, 0, 1, 2, 0, 1]);
        assert_eq!(build_chi(&[], &[], 4).unwrap(), Vec::<Point>::new());
        assert_eq!(build_chi(&[1, 2, 3], &[0, 4], 5).unwrap().len(), 25);
        assert!(build_chi(&[1], &[0], 0).is_err());
    }
}
